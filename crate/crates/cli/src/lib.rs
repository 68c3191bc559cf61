//! Command-line front end. [`run`] takes the argument vector and returns the
//! exit code with everything that would be printed, so tests can drive it
//! without spawning processes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use dsynth::annotation::{check_annotation, find_witness_annotation, is_witness, AnnotatedStrategy};
use dsynth::dstates::classify;
use dsynth::game::{GameSpec, ParityTreeAutomaton};
use dsynth::io::dot::{annotated_dot, dstates_dot, strategy_dot};
use dsynth::io::format::{
    parse_arena, parse_game, parse_map, parse_spec, parse_strategy, write_game, write_spec, write_strategy,
    GameFile, ParseDiagnostic, StrategyFile,
};
use dsynth::io::report::{class_table, growth_table, Report};
use dsynth::progress::{check_measure, compute_measure};
use dsynth::random::{random_one_player_instance, seeded};
use dsynth::retraction::{check_monotone, check_retraction, compaction_pipeline, retract};
use dsynth::solvers::delay::solve_delay;
use dsynth::solvers::growth::diagnose_growth;
use dsynth::solvers::one_player::{solve_one_player, Mode, Outcome};
use dsynth::solvers::oracle::{brute_force_oracle, OracleError};
use dsynth::solvers::parity::{check_solution, solve_parity};
use dsynth::solvers::Certificate;
use dsynth::strategy::check_strategy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dsynth", version, about = "Synthesis and verification for distributed games with imperfect information")]
pub struct Cli {
    /// Write a run manifest (arguments and SHA-256 digests) to this file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a game, and optionally a specification and strategy.
    Validate {
        game: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// Check uniformity, annotation and acceptance of a strategy.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        strategy: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Progress measures of a certificate.
    Measure {
        #[arg(value_enum)]
        action: MeasureAction,
        #[command(flatten)]
        inputs: Inputs,
        certificate: PathBuf,
    },
    /// Apply, check or compute retractions.
    Retract {
        #[arg(value_enum)]
        action: RetractAction,
        #[command(flatten)]
        inputs: Inputs,
        certificate: PathBuf,
        /// Node map (`u -> v` lines) for `apply` and `check`.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// D-state classification of a certificate, or growth on the history tree.
    Dstates {
        #[command(subcommand)]
        action: DstatesAction,
    },
    /// Decide a game.
    Solve {
        #[command(subcommand)]
        problem: SolveProblem,
    },
    /// Exhaustive search for a winning strategy with at most `bound` nodes.
    Oracle {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = dsynth::solvers::oracle::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Write a seeded random one-player instance.
    Generate {
        #[arg(long)]
        seed: u64,
        /// Directory receiving `instance.game` and `instance.spec`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a manifest and compare output digests.
    Replay { manifest: PathBuf },
}

#[derive(Args, Debug)]
pub struct Inputs {
    pub game: PathBuf,
    /// Specification file; defaults to the spec block of the game file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MeasureAction {
    Compute,
    Check,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum RetractAction {
    Apply,
    Check,
    Compact,
}

#[derive(Subcommand, Debug)]
pub enum DstatesAction {
    Classify {
        #[command(flatten)]
        inputs: Inputs,
        certificate: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    Growth {
        game: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = dsynth::solvers::growth::DEFAULT_TREE_BUDGET)]
        budget: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ModeArg {
    Observable,
    General,
    Auto,
}

#[derive(Subcommand, Debug)]
pub enum SolveProblem {
    OnePlayer {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        max_nodes: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the certificate alone to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Delay {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the certificate alone to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Parity { arena: PathBuf },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

fn diagnostics(path: &Path, diags: &[ParseDiagnostic]) -> Failure {
    let mut msg = String::new();
    for d in diags {
        writeln!(msg, "{}:{d}", path.display()).unwrap();
    }
    Failure::input(msg)
}

#[derive(Default)]
struct Session {
    inputs: Vec<(PathBuf, String)>,
    out: String,
}

impl Session {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.inputs.push((path.to_path_buf(), hex::encode(Sha256::digest(&bytes))));
        String::from_utf8(bytes).map_err(|_| Failure::input(format!("{}: not UTF-8", path.display())))
    }

    fn game(&mut self, path: &Path) -> Result<GameFile, Failure> {
        let text = self.read(path)?;
        parse_game(&text).map_err(|d| diagnostics(path, &d))
    }

    fn problem(&mut self, inputs: &Inputs) -> Result<(GameFile, ParityTreeAutomaton), Failure> {
        let file = self.game(&inputs.game)?;
        let spec = match &inputs.spec {
            Some(p) => {
                let text = self.read(p)?;
                parse_spec(&text, &file).map_err(|d| diagnostics(p, &d))?
            }
            None => file.spec.clone().ok_or_else(|| Failure::input("no specification: pass --spec or add a spec block"))?,
        };
        Ok((file, spec))
    }

    fn strategy(&mut self, path: &Path, game: &GameSpec, spec: Option<&ParityTreeAutomaton>) -> Result<StrategyFile, Failure> {
        let text = self.read(path)?;
        parse_strategy(&text, game, spec).map_err(|d| diagnostics(path, &d))
    }

    fn annotated(&mut self, path: &Path, game: &GameSpec, spec: &ParityTreeAutomaton) -> Result<(AnnotatedStrategy, Option<Vec<Vec<u32>>>), Failure> {
        let f = self.strategy(path, game, Some(spec))?;
        let a = f.annotated().ok_or_else(|| Failure::input(format!("{}: certificate needs label lines", path.display())))?;
        Ok((a, f.measure))
    }

    fn write_file(&mut self, path: &Path, text: &str) -> Result<(), Failure> {
        fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        writeln!(self.out, "wrote {}", path.display()).unwrap();
        Ok(())
    }

    fn write_outputs(&mut self, game: &GameSpec, spec: &ParityTreeAutomaton, c: &Certificate, dot: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
        if let Some(p) = dot {
            self.write_file(p, &annotated_dot(game, spec, &c.annotated))?;
        }
        if let Some(p) = out {
            self.write_file(p, &certificate_text(game, spec, c))?;
        }
        Ok(())
    }
}

fn certificate_text(game: &GameSpec, spec: &ParityTreeAutomaton, c: &Certificate) -> String {
    write_strategy(game, &c.annotated.strategy, Some((&c.annotated.labels, spec)), Some(&c.measure))
}

fn verdict(flag: bool) -> &'static str {
    if flag { "yes" } else { "no" }
}

fn execute(cmd: &Command, sx: &mut Session) -> Result<i32, Failure> {
    match cmd {
        Command::Validate { game, spec, strategy } => {
            let file = sx.game(game)?;
            let mut r = Report::new("validate");
            r.entry("players", file.game.players()).entry("directions", file.game.num_directions());
            let spec = match spec {
                Some(p) => {
                    let text = sx.read(p)?;
                    Some(parse_spec(&text, &file).map_err(|d| diagnostics(p, &d))?)
                }
                None => file.spec.clone(),
            };
            if let Some(s) = &spec {
                r.entry("spec states", s.num_states());
            }
            if let Some(p) = strategy {
                let st = sx.strategy(p, &file.game, spec.as_ref())?;
                r.entry("strategy nodes", st.strategy.len());
            }
            r.entry("diagnostics", 0);
            sx.out.push_str(&r.to_string());
            Ok(EXIT_OK)
        }
        Command::Verify { inputs, strategy, dot } => {
            let (file, spec) = sx.problem(inputs)?;
            let game = &file.game;
            let st = sx.strategy(strategy, game, Some(&spec))?;
            let mut r = Report::new("verify");
            let uniform = check_strategy(&st.strategy, game);
            r.entry("uniform", verdict(uniform.is_ok()));
            if let Err(v) = &uniform {
                r.entry("violation", v);
            }
            let annotated = match st.annotated() {
                Some(a) => {
                    let ok = check_annotation(&a, game, &spec);
                    r.entry("annotation", if ok.is_ok() { "valid" } else { "invalid" });
                    if let Err(e) = &ok {
                        r.entry("annotation error", e);
                    }
                    ok.ok().map(|_| a)
                }
                None => {
                    let found = find_witness_annotation(&st.strategy, game, &spec);
                    r.entry("annotation", if found.is_some() { "found" } else { "none" });
                    found
                }
            };
            let witness = match &annotated {
                Some(a) => match is_witness(a, &spec) {
                    Ok(()) => true,
                    Err(lasso) => {
                        r.entry("lasso", format!("{lasso:?}"));
                        false
                    }
                },
                None => false,
            };
            r.entry("witness", verdict(witness));
            let winning = uniform.is_ok() && witness;
            r.entry("winning", verdict(winning));
            sx.out.push_str(&r.to_string());
            if let Some(p) = dot {
                let text = match &annotated {
                    Some(a) => annotated_dot(game, &spec, a),
                    None => strategy_dot(game, &st.strategy),
                };
                sx.write_file(p, &text)?;
            }
            Ok(if winning { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Measure { action, inputs, certificate } => {
            let (file, spec) = sx.problem(inputs)?;
            let (a, mu) = sx.annotated(certificate, &file.game, &spec)?;
            let mut r = Report::new("measure");
            match action {
                MeasureAction::Compute => match compute_measure(&a, &spec) {
                    Some(m) => {
                        r.entry("measure", "found");
                        r.block(write_strategy(&file.game, &a.strategy, Some((&a.labels, &spec)), Some(&m)));
                        sx.out.push_str(&r.to_string());
                        Ok(EXIT_OK)
                    }
                    None => {
                        r.entry("measure", "none");
                        sx.out.push_str(&r.to_string());
                        Ok(EXIT_NEGATIVE)
                    }
                },
                MeasureAction::Check => {
                    let mu = mu.ok_or_else(|| Failure::input("certificate has no measure lines"))?;
                    let ok = check_measure(&a, &spec, &mu);
                    r.entry("valid", verdict(ok.is_ok()));
                    if let Err(e) = &ok {
                        r.entry("error", e);
                    }
                    sx.out.push_str(&r.to_string());
                    Ok(if ok.is_ok() { EXIT_OK } else { EXIT_NEGATIVE })
                }
            }
        }
        Command::Retract { action, inputs, certificate, map } => {
            let (file, spec) = sx.problem(inputs)?;
            let game = &file.game;
            let (a, mu) = sx.annotated(certificate, game, &spec)?;
            let mu = match mu {
                Some(m) => m,
                None => compute_measure(&a, &spec).ok_or_else(|| Failure {
                    code: EXIT_NEGATIVE,
                    message: "the annotation is not a witness, so it has no progress measure".into(),
                })?,
            };
            let mut r = Report::new("retract");
            let read_map = |sx: &mut Session| -> Result<Vec<usize>, Failure> {
                let p = map.as_ref().ok_or_else(|| Failure::input("--map is required"))?;
                let text = sx.read(p)?;
                parse_map(&text, &a.strategy).map_err(|d| diagnostics(p, &d))
            };
            match action {
                RetractAction::Check => {
                    let h = read_map(sx)?;
                    let valid = check_retraction(&a, game, &spec, &h);
                    let monotone = check_monotone(&a, &spec, &mu, &h);
                    r.entry("retraction", verdict(valid.is_ok()));
                    if let Err(e) = &valid {
                        r.entry("retraction error", e);
                    }
                    r.entry("monotone", verdict(monotone.is_ok()));
                    if let Err(e) = &monotone {
                        r.entry("monotone error", e);
                    }
                    sx.out.push_str(&r.to_string());
                    Ok(if valid.is_ok() && monotone.is_ok() { EXIT_OK } else { EXIT_NEGATIVE })
                }
                RetractAction::Apply => {
                    let h = read_map(sx)?;
                    match retract(&a, game, &spec, &mu, &h) {
                        Ok(res) => {
                            r.entry("nodes", res.annotated.len());
                            r.block(write_strategy(game, &res.annotated.strategy, Some((&res.annotated.labels, &spec)), Some(&res.measure)));
                            sx.out.push_str(&r.to_string());
                            Ok(EXIT_OK)
                        }
                        Err(e) => {
                            r.entry("error", e);
                            sx.out.push_str(&r.to_string());
                            Ok(EXIT_NEGATIVE)
                        }
                    }
                }
                RetractAction::Compact => {
                    let p = compaction_pipeline(&a, game, &spec, &mu).map_err(|e| Failure { code: EXIT_NEGATIVE, message: e.to_string() })?;
                    let m = &p.minimized;
                    let measure = compute_measure(m, &spec).expect("compaction keeps a witness");
                    r.entry("input nodes", a.len())
                        .entry("after horizontal folds", p.horizontal.annotated.len())
                        .entry("after class compaction", p.compacted.result.annotated.len())
                        .entry("class folds", p.compacted.folds)
                        .entry("after quotient", m.len())
                        .entry("frontier nodes", m.strategy.frontier.iter().filter(|&&f| f).count());
                    r.block(write_strategy(game, &m.strategy, Some((&m.labels, &spec)), Some(&measure)));
                    sx.out.push_str(&r.to_string());
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Dstates { action } => match action {
            DstatesAction::Classify { inputs, certificate, dot } => {
                let (file, spec) = sx.problem(inputs)?;
                let (a, _) = sx.annotated(certificate, &file.game, &spec)?;
                let report = classify(&a, &file.game).map_err(|e| Failure { code: EXIT_BUDGET, message: e.to_string() })?;
                let mut r = Report::new("dstates");
                r.entry("dstates", report.dstates.len())
                    .entry("classes", report.index())
                    .entry("max class size", report.max_class_size())
                    .entry("max dstate size", report.max_dstate_size())
                    .block(class_table(&report, &a.strategy.names));
                sx.out.push_str(&r.to_string());
                if let Some(p) = dot {
                    sx.write_file(p, &dstates_dot(&file.game, &spec, &a, &report))?;
                }
                Ok(EXIT_OK)
            }
            DstatesAction::Growth { game, depth, budget } => {
                let file = sx.game(game)?;
                let rows = diagnose_growth(&file.game, *depth, *budget);
                let mut r = Report::new("growth");
                r.entry("requested depth", depth).entry("reached depth", rows.last().map_or(0, |x| x.depth));
                r.block(growth_table(&rows));
                sx.out.push_str(&r.to_string());
                Ok(if rows.len() == depth + 1 { EXIT_OK } else { EXIT_BUDGET })
            }
        },
        Command::Solve { problem } => match problem {
            SolveProblem::OnePlayer { inputs, mode, max_nodes, dot, out } => {
                let (file, spec) = sx.problem(inputs)?;
                let mode = match mode {
                    ModeArg::Observable => Mode::Observable,
                    ModeArg::General => Mode::General { max_nodes: *max_nodes },
                    ModeArg::Auto => Mode::Auto { max_nodes: *max_nodes },
                };
                let outcome = solve_one_player(&file.game, &spec, mode).map_err(|e| match e {
                    dsynth::solvers::one_player::OnePlayerError::Oracle(OracleError::BudgetExceeded { .. }) => {
                        Failure { code: EXIT_BUDGET, message: e.to_string() }
                    }
                    _ => Failure::input(e.to_string()),
                })?;
                let mut r = Report::new("solve one-player");
                let code = match &outcome {
                    Outcome::Winning(c) => {
                        r.entry("verdict", "winning").entry("nodes", c.strategy.len());
                        r.block(certificate_text(&file.game, &spec, c));
                        EXIT_OK
                    }
                    Outcome::Losing => {
                        r.entry("verdict", "losing");
                        EXIT_NEGATIVE
                    }
                    Outcome::Unknown { bound } => {
                        r.entry("verdict", "unknown").entry("searched up to nodes", bound);
                        EXIT_BUDGET
                    }
                };
                sx.out.push_str(&r.to_string());
                if let Outcome::Winning(c) = &outcome {
                    sx.write_outputs(&file.game, &spec, c, dot.as_deref(), out.as_deref())?;
                }
                Ok(code)
            }
            SolveProblem::Delay { inputs, dot, out } => {
                let (file, spec) = sx.problem(inputs)?;
                let form = file.delay.as_ref().ok_or_else(|| Failure::input("the game has no delay declaration"))?;
                let got = solve_delay(form, &spec).map_err(|e| Failure { code: EXIT_BUDGET, message: e.to_string() })?;
                let mut r = Report::new("solve delay");
                r.entry("delay", form.k);
                let code = match &got {
                    Some(c) => {
                        r.entry("verdict", "winning").entry("nodes", c.strategy.len());
                        r.block(certificate_text(&file.game, &spec, c));
                        EXIT_OK
                    }
                    None => {
                        r.entry("verdict", "losing");
                        EXIT_NEGATIVE
                    }
                };
                sx.out.push_str(&r.to_string());
                if let Some(c) = &got {
                    sx.write_outputs(&file.game, &spec, c, dot.as_deref(), out.as_deref())?;
                }
                Ok(code)
            }
            SolveProblem::Parity { arena } => {
                let text = sx.read(arena)?;
                let a = parse_arena(&text).map_err(|d| diagnostics(arena, &d))?;
                let sol = solve_parity(&a);
                assert!(check_solution(&a, &sol), "solver output must pass its own check");
                let mut r = Report::new("solve parity");
                let won = sol.initial_won(&a);
                r.entry("initial", &a.names[a.initial]).entry("even wins", verdict(won));
                let mut table = String::from("position  winner  move\n");
                for v in 0..a.len() {
                    let winner = if sol.even_wins[v] { "even" } else { "odd" };
                    let mv = sol.strategy[v].map_or("-".to_string(), |w| a.names[w].clone());
                    writeln!(table, "{}  {winner}  {mv}", a.names[v]).unwrap();
                }
                r.block(table);
                sx.out.push_str(&r.to_string());
                Ok(if won { EXIT_OK } else { EXIT_NEGATIVE })
            }
        },
        Command::Oracle { inputs, bound, budget } => {
            let (file, spec) = sx.problem(inputs)?;
            let mut r = Report::new("oracle");
            r.entry("bound", bound);
            match brute_force_oracle(&file.game, &spec, *bound, *budget) {
                Ok(Some(c)) => {
                    r.entry("verdict", "winning").entry("nodes", c.strategy.len());
                    r.block(certificate_text(&file.game, &spec, &c));
                    sx.out.push_str(&r.to_string());
                    Ok(EXIT_OK)
                }
                Ok(None) => {
                    r.entry("verdict", "none within bound");
                    sx.out.push_str(&r.to_string());
                    Ok(EXIT_NEGATIVE)
                }
                Err(e) => Err(Failure { code: EXIT_BUDGET, message: e.to_string() }),
            }
        }
        Command::Generate { seed, out } => {
            let (game, spec) = random_one_player_instance(&mut seeded(*seed));
            let file = GameFile { game, spec: None, delay: None };
            fs::create_dir_all(out).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
            sx.write_file(&out.join("instance.game"), &write_game(&file))?;
            sx.write_file(&out.join("instance.spec"), &write_spec(&file, &spec))?;
            Ok(EXIT_OK)
        }
        Command::Replay { manifest } => {
            let text = sx.read(manifest)?;
            let m = Manifest::parse(&text).map_err(Failure::input)?;
            for (path, digest) in &m.inputs {
                let bytes = fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
                if &hex::encode(Sha256::digest(&bytes)) != digest {
                    return Err(Failure::input(format!("{}: input changed since the manifest was written", path.display())));
                }
            }
            let again = run(m.args.iter().cloned());
            let digest = output_digest(&again);
            let same = digest == m.output && again.code == m.code;
            let mut r = Report::new("replay");
            r.entry("exit code", again.code).entry("output sha256", &digest).entry("identical", verdict(same));
            sx.out.push_str(&r.to_string());
            Ok(if same { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

/// Arguments, input digests and output digest of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub version: String,
    pub args: Vec<String>,
    pub inputs: Vec<(PathBuf, String)>,
    pub code: i32,
    pub output: String,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut out = String::from("dsynth-manifest 1\n");
        writeln!(out, "version {}", self.version).unwrap();
        for a in &self.args {
            writeln!(out, "arg {a}").unwrap();
        }
        for (p, d) in &self.inputs {
            writeln!(out, "input {d} {}", p.display()).unwrap();
        }
        writeln!(out, "exit {}", self.code).unwrap();
        writeln!(out, "output {}", self.output).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Manifest, String> {
        let mut lines = text.lines();
        if lines.next() != Some("dsynth-manifest 1") {
            return Err("not a manifest".into());
        }
        let mut m = Manifest { version: String::new(), args: Vec::new(), inputs: Vec::new(), code: 0, output: String::new() };
        for l in lines {
            let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
            match key {
                "version" => m.version = rest.to_string(),
                "arg" => m.args.push(rest.to_string()),
                "input" => {
                    let (d, p) = rest.split_once(' ').ok_or("malformed input line")?;
                    m.inputs.push((PathBuf::from(p), d.to_string()));
                }
                "exit" => m.code = rest.parse().map_err(|_| "malformed exit line")?,
                "output" => m.output = rest.to_string(),
                _ => return Err(format!("unknown manifest line '{l}'")),
            }
        }
        Ok(m)
    }
}

fn output_digest(o: &RunOutput) -> String {
    let mut h = Sha256::new();
    h.update(o.stdout.as_bytes());
    h.update([0u8]);
    h.update(o.stderr.as_bytes());
    hex::encode(h.finalize())
}

/// Runs the command line `args` (including the program name).
pub fn run<I: IntoIterator<Item = String>>(args: I) -> RunOutput {
    let args: Vec<String> = args.into_iter().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                RunOutput { code, stdout: text, stderr: String::new() }
            } else {
                RunOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut sx = Session::default();
    let (code, stderr) = match execute(&cli.command, &mut sx) {
        Ok(c) => (c, String::new()),
        Err(f) => (f.code, if f.message.ends_with('\n') { f.message } else { f.message + "\n" }),
    };
    let mut out = RunOutput { code, stdout: sx.out, stderr };
    if let Some(path) = &cli.manifest {
        let recorded: Vec<String> = strip_manifest(&args);
        let m = Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            args: recorded,
            inputs: sx.inputs,
            code: out.code,
            output: output_digest(&out),
        };
        if let Err(e) = fs::write(path, m.render()) {
            out.stderr.push_str(&format!("{}: {e}\n", path.display()));
            out.code = EXIT_INPUT;
        }
    }
    out
}

fn strip_manifest(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--manifest" {
            skip = true;
            continue;
        }
        if a.starts_with("--manifest=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
