//! Line-based text formats for games, specifications, strategies,
//! certificates, retraction maps and parity arenas.
//!
//! Every format ignores blank lines and `#` comments. Names are whitespace-
//! and comma-free tokens; action profiles join per-player actions with `.`,
//! and `*` matches any action or direction.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use crate::annotation::{AnnotatedStrategy, Label};
use crate::game::{GameSpec, MealyMachine, ParityTreeAutomaton, StateId};
use crate::solvers::delay::{delay_game, lift_spec, DelayForm};
use crate::solvers::parity::{Owner, ParityArena};
use crate::strategy::{DecisionStructure, NodeId};

/// A problem located in an input file. Line and column are 1-based; `0`
/// means the finding concerns the file as a whole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub code: String,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.code, self.message)
    }
}

pub type ParseResult<T> = Result<T, Vec<ParseDiagnostic>>;

#[derive(Clone, Debug)]
struct Line<'a> {
    no: usize,
    raw: &'a str,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn col(&self, token: &str) -> usize {
        let base = self.raw.as_ptr() as usize;
        let p = token.as_ptr() as usize;
        if p >= base && p <= base + self.raw.len() {
            p - base + 1
        } else {
            self.raw.find(token).map_or(1, |i| i + 1)
        }
    }

    fn diag(&self, token: &str, code: &str, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic { line: self.no, column: self.col(token), code: code.into(), message: message.into() }
    }

    fn words(&self) -> Vec<&'a str> {
        self.text.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect()
    }

    fn keyword(&self) -> &'a str {
        self.text.split_whitespace().next().unwrap_or("")
    }

    /// Text after the leading keyword.
    fn rest(&self) -> &'a str {
        let k = self.keyword();
        self.text[k.len()..].trim()
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let t = raw.split('#').next().unwrap_or("").trim();
            (!t.is_empty()).then_some(Line { no: i + 1, raw, text: t })
        })
        .collect()
}

fn split_arrow<'a>(l: &Line<'a>) -> Option<(&'a str, &'a str)> {
    let i = l.text.find("->")?;
    Some((l.text[..i].trim(), l.text[i + 2..].trim()))
}

fn tokens(s: &str) -> Vec<&str> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|w| !w.is_empty()).collect()
}

fn lookup(names: &[String], token: &str) -> Option<usize> {
    names.iter().position(|n| n == token)
}

/// Expands an action-profile pattern into all matching profile indices.
fn expand_profile(game: &GameSpec, token: &str) -> Result<Vec<usize>, String> {
    let n = game.players();
    let parts: Vec<&str> = if token == "*" { vec!["*"; n] } else { token.split('.').collect() };
    if parts.len() != n {
        return Err(format!("profile '{token}' has {} components, expected {n}", parts.len()));
    }
    let mut choices: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, p) in parts.iter().enumerate() {
        if *p == "*" {
            choices.push((0..game.actions[i].len()).collect());
        } else {
            match lookup(&game.actions[i], p) {
                Some(a) => choices.push(vec![a]),
                None => return Err(format!("unknown action '{p}' for player {i}")),
            }
        }
    }
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                c.iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    Ok(out.iter().map(|acts| game.profile_of(acts)).collect())
}

fn expand_direction(directions: &[String], token: &str) -> Result<Vec<usize>, String> {
    if token == "*" {
        return Ok((0..directions.len()).collect());
    }
    lookup(directions, token).map(|d| vec![d]).ok_or_else(|| format!("unknown direction '{token}'"))
}

/// Contents of a game file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameFile {
    pub game: GameSpec,
    pub spec: Option<ParityTreeAutomaton>,
    pub delay: Option<DelayForm>,
}

const TOP: [&str; 6] = ["players", "actions", "directions", "observer", "spec", "delay"];

/// Parses a game description, validating it and its specification.
pub fn parse_game(text: &str) -> ParseResult<GameFile> {
    let ls = lines(text);
    let mut diags = Vec::new();
    let mut players: Option<usize> = None;
    let mut actions: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut directions: Option<Vec<String>> = None;
    let mut delay: Option<(usize, Line)> = None;
    let mut observer_blocks: Vec<(usize, Line, Vec<Line>)> = Vec::new();
    let mut spec_block: Option<(Line, Vec<Line>)> = None;
    enum Cur {
        Top,
        Observer,
        Spec,
    }
    let mut cur = Cur::Top;
    for l in &ls {
        let kw = l.keyword();
        if TOP.contains(&kw) {
            cur = Cur::Top;
        }
        match cur {
            Cur::Observer if !TOP.contains(&kw) => {
                observer_blocks.last_mut().unwrap().2.push(l.clone());
                continue;
            }
            Cur::Spec if !TOP.contains(&kw) => {
                spec_block.as_mut().unwrap().1.push(l.clone());
                continue;
            }
            _ => {}
        }
        let w = l.words();
        match kw {
            "players" => match w.get(1).and_then(|x| x.parse::<usize>().ok()) {
                Some(n) => players = Some(n),
                None => diags.push(l.diag(l.rest(), "Syntax", "expected 'players <count>'")),
            },
            "actions" => {
                let Some(idx) = w.get(1).and_then(|x| x.trim_end_matches(':').parse::<usize>().ok()) else {
                    diags.push(l.diag(l.rest(), "Syntax", "expected 'actions <player>: <names>'"));
                    continue;
                };
                let names: Vec<String> = w[2..].iter().map(|s| s.to_string()).collect();
                if actions.insert(idx, names).is_some() {
                    diags.push(l.diag(w[1], "Duplicate", format!("actions for player {idx} declared twice")));
                }
            }
            "directions" => directions = Some(w[1..].iter().map(|s| s.to_string()).collect()),
            "delay" => match w.get(1).and_then(|x| x.parse::<usize>().ok()) {
                Some(k) => delay = Some((k, l.clone())),
                None => diags.push(l.diag(l.rest(), "Syntax", "expected 'delay <k>'")),
            },
            "observer" => match w.get(1).and_then(|x| x.parse::<usize>().ok()) {
                Some(i) => {
                    observer_blocks.push((i, l.clone(), Vec::new()));
                    cur = Cur::Observer;
                }
                None => diags.push(l.diag(l.rest(), "Syntax", "expected 'observer <player>'")),
            },
            "spec" => {
                spec_block = Some((l.clone(), Vec::new()));
                cur = Cur::Spec;
            }
            _ => diags.push(l.diag(kw, "Syntax", format!("unexpected '{kw}'"))),
        }
    }
    let n = players.unwrap_or(actions.len());
    if players.is_none() {
        diags.push(ParseDiagnostic { line: 0, column: 0, code: "Missing".into(), message: "no 'players' line".into() });
    }
    let actions: Vec<Vec<String>> = (0..n).map(|i| actions.get(&i).cloned().unwrap_or_default()).collect();
    let directions = directions.unwrap_or_default();
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut base = GameSpec { actions, directions, observers: Vec::new() };
    let mut delay_form = None;
    if let Some((k, l)) = &delay {
        if !observer_blocks.is_empty() {
            diags.push(l.diag(l.text, "NotDelayForm", "delay games have generated observers"));
            return Err(diags);
        }
        match delay_game(&base, *k) {
            Ok(form) => delay_form = Some(form),
            Err(e) => {
                diags.push(l.diag(l.text, "Delay", e.to_string()));
                return Err(diags);
            }
        }
    } else {
        let mut observers: BTreeMap<usize, MealyMachine> = BTreeMap::new();
        for (i, head, body) in &observer_blocks {
            if *i >= n {
                diags.push(head.diag(head.rest(), "UnknownPlayer", format!("no player {i}")));
                continue;
            }
            match parse_observer(&base, body) {
                Ok(m) => {
                    observers.insert(*i, m);
                }
                Err(mut d) => diags.append(&mut d),
            }
        }
        base.observers = observers.into_values().collect();
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let game = match &delay_form {
        Some(f) => f.game.clone(),
        None => base.clone(),
    };
    for d in game.validate() {
        diags.push(ParseDiagnostic { line: 0, column: 0, code: d.code().into(), message: d.to_string() });
    }
    let mut spec = None;
    if let Some((head, body)) = &spec_block {
        match parse_spec_lines(&base, head, body) {
            Ok(s) => {
                spec = Some(match &delay_form {
                    Some(f) => lift_spec(f, &s),
                    None => s,
                })
            }
            Err(mut d) => diags.append(&mut d),
        }
    }
    if diags.is_empty() {
        Ok(GameFile { game, spec, delay: delay_form })
    } else {
        Err(diags)
    }
}

fn parse_observer(game: &GameSpec, body: &[Line]) -> ParseResult<MealyMachine> {
    let mut diags = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut declared_outputs = false;
    let mut initial: Option<(String, Line)> = None;
    let mut rows: Vec<&Line> = Vec::new();
    for l in body {
        match l.keyword() {
            "states" => states = l.words()[1..].iter().map(|s| s.to_string()).collect(),
            "outputs" => {
                outputs = l.words()[1..].iter().map(|s| s.to_string()).collect();
                declared_outputs = true;
            }
            "initial" => initial = l.words().get(1).map(|s| (s.to_string(), l.clone())),
            _ if l.text.contains("->") => rows.push(l),
            kw => diags.push(l.diag(kw, "Syntax", format!("unexpected '{kw}' in observer block"))),
        }
    }
    if states.is_empty() {
        diags.push(body.first().map_or(
            ParseDiagnostic { line: 0, column: 0, code: "Missing".into(), message: "observer without states".into() },
            |l| l.diag(l.text, "Missing", "observer without states"),
        ));
        return Err(diags);
    }
    let init = match &initial {
        None => 0,
        Some((name, l)) => match lookup(&states, name) {
            Some(q) => q,
            None => {
                diags.push(l.diag(name, "UnknownState", format!("unknown state '{name}'")));
                0
            }
        },
    };
    let mut table: Vec<Option<(StateId, usize)>> = vec![None; states.len() * game.move_count()];
    for l in rows {
        let Some((lhs, rhs)) = split_arrow(l) else { continue };
        let lt = tokens(lhs);
        let (target, out) = match rhs.split_once('/') {
            Some((t, o)) => (t.trim(), o.trim()),
            None => {
                diags.push(l.diag(rhs, "Syntax", "expected '<state> / <output>'"));
                continue;
            }
        };
        if lt.len() != 3 {
            diags.push(l.diag(lhs, "Syntax", "expected '<state>, <profile>, <direction> -> <state> / <output>'"));
            continue;
        }
        let src: Vec<usize> = if lt[0] == "*" {
            (0..states.len()).collect()
        } else {
            match lookup(&states, lt[0]) {
                Some(q) => vec![q],
                None => {
                    diags.push(l.diag(lt[0], "UnknownState", format!("unknown state '{}'", lt[0])));
                    continue;
                }
            }
        };
        let profiles = match expand_profile(game, lt[1]) {
            Ok(p) => p,
            Err(m) => {
                diags.push(l.diag(lt[1], "UnknownAction", m));
                continue;
            }
        };
        let dirs = match expand_direction(&game.directions, lt[2]) {
            Ok(d) => d,
            Err(m) => {
                diags.push(l.diag(lt[2], "UnknownDirection", m));
                continue;
            }
        };
        let tgt_same = target == "=";
        let tgt = if tgt_same {
            None
        } else {
            match lookup(&states, target) {
                Some(q) => Some(q),
                None => {
                    diags.push(l.diag(target, "UnknownState", format!("unknown state '{target}'")));
                    continue;
                }
            }
        };
        let o = match lookup(&outputs, out) {
            Some(o) => o,
            None if !declared_outputs => {
                outputs.push(out.to_string());
                outputs.len() - 1
            }
            None => {
                diags.push(l.diag(out, "UnknownOutput", format!("undeclared output '{out}'")));
                continue;
            }
        };
        for &q in &src {
            for &p in &profiles {
                for &d in &dirs {
                    let idx = game.move_index(crate::game::Move::new(p, d));
                    table[q * game.move_count() + idx] = Some((tgt.unwrap_or(q), o));
                }
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(MealyMachine { states, initial: init, outputs, moves: game.move_count(), table })
}

fn parse_spec_lines(game: &GameSpec, head: &Line, body: &[Line]) -> ParseResult<ParityTreeAutomaton> {
    let mut diags = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<(String, Line)> = None;
    let mut prio: HashMap<String, (u32, Line)> = HashMap::new();
    let mut observable = false;
    let mut rows: Vec<&Line> = Vec::new();
    for l in body {
        match l.keyword() {
            "states" => states = l.words()[1..].iter().map(|s| s.to_string()).collect(),
            "initial" => initial = l.words().get(1).map(|s| (s.to_string(), l.clone())),
            "priority" => {
                let w = l.words();
                match (w.get(1), w.get(2).and_then(|p| p.parse::<u32>().ok())) {
                    (Some(s), Some(p)) => {
                        prio.insert(s.to_string(), (p, l.clone()));
                    }
                    _ => diags.push(l.diag(l.rest(), "Syntax", "expected 'priority <state> <n>'")),
                }
            }
            "observable" => observable = true,
            _ if l.text.contains("->") => rows.push(l),
            kw => diags.push(l.diag(kw, "Syntax", format!("unexpected '{kw}' in spec block"))),
        }
    }
    if states.is_empty() {
        diags.push(head.diag(head.text, "SpecNoStates", "specification without states"));
        return Err(diags);
    }
    let init = match &initial {
        None => 0,
        Some((name, l)) => lookup(&states, name).unwrap_or_else(|| {
            diags.push(l.diag(name, "UnknownState", format!("unknown state '{name}'")));
            0
        }),
    };
    let mut priorities = vec![0u32; states.len()];
    for (i, s) in states.iter().enumerate() {
        match prio.get(s) {
            Some((p, _)) => priorities[i] = *p,
            None => diags.push(head.diag(head.text, "MissingPriority", format!("state '{s}' has no priority"))),
        }
    }
    for (s, (_, l)) in &prio {
        if lookup(&states, s).is_none() {
            diags.push(l.diag(s, "UnknownState", format!("unknown state '{s}'")));
        }
    }
    let mut spec = ParityTreeAutomaton {
        states: states.clone(),
        initial: init,
        priorities,
        transitions: BTreeMap::new(),
        observable,
    };
    let nd = game.num_directions();
    for l in rows {
        let Some((lhs, rhs)) = split_arrow(l) else { continue };
        let lt = tokens(lhs);
        if lt.len() != 2 {
            diags.push(l.diag(lhs, "Syntax", "expected '<state>, <profile> -> (<d>:<state>, ...)'"));
            continue;
        }
        let src: Vec<usize> = if lt[0] == "*" {
            (0..states.len()).collect()
        } else if let Some(q) = lookup(&states, lt[0]) {
            vec![q]
        } else {
            diags.push(l.diag(lt[0], "UnknownState", format!("unknown state '{}'", lt[0])));
            continue;
        };
        let profiles = match expand_profile(game, lt[1]) {
            Ok(p) => p,
            Err(m) => {
                diags.push(l.diag(lt[1], "UnknownAction", m));
                continue;
            }
        };
        let inner = rhs.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = tokens(inner);
        let mut tuple: Vec<Option<StateId>> = vec![None; nd];
        let mut ok = true;
        for (pos, e) in entries.iter().enumerate() {
            let (dname, sname) = match e.split_once(':') {
                Some((d, s)) => (Some(d), s),
                None => (None, *e),
            };
            let dirs: Vec<usize> = match dname {
                Some(d) => match expand_direction(&game.directions, d) {
                    Ok(ds) => ds,
                    Err(m) => {
                        diags.push(l.diag(e, "UnknownDirection", m));
                        ok = false;
                        continue;
                    }
                },
                None if entries.len() == 1 => (0..nd).collect(),
                None if pos < nd => vec![pos],
                None => {
                    diags.push(l.diag(e, "SpecTupleArity", format!("more than {nd} successors")));
                    ok = false;
                    continue;
                }
            };
            let Some(q) = lookup(&states, sname) else {
                diags.push(l.diag(sname, "UnknownState", format!("unknown state '{sname}'")));
                ok = false;
                continue;
            };
            for d in dirs {
                tuple[d] = Some(q);
            }
        }
        if !ok {
            continue;
        }
        let Some(tuple) = tuple.into_iter().collect::<Option<Vec<_>>>() else {
            diags.push(l.diag(rhs, "SpecTupleArity", format!("tuple must name a successor for all {nd} directions")));
            continue;
        };
        for &q in &src {
            for &p in &profiles {
                spec.add_transition(q, p, tuple.clone());
            }
        }
    }
    for d in game.validate_spec(&spec) {
        diags.push(head.diag(head.text, d.code(), d.to_string()));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    spec.renormalize();
    Ok(spec)
}

/// Parses a file holding only a `spec` block, resolving names against `game`
/// (the base game for delay forms, which are lifted afterwards).
pub fn parse_spec(text: &str, file: &GameFile) -> ParseResult<ParityTreeAutomaton> {
    let ls = lines(text);
    let Some(head) = ls.first().filter(|l| l.keyword() == "spec") else {
        return Err(vec![ParseDiagnostic {
            line: ls.first().map_or(0, |l| l.no),
            column: 1,
            code: "Syntax".into(),
            message: "expected 'spec'".into(),
        }]);
    };
    match &file.delay {
        Some(f) => parse_spec_lines(&f.base, head, &ls[1..]).map(|s| lift_spec(f, &s)),
        None => parse_spec_lines(&file.game, head, &ls[1..]),
    }
}

fn write_spec_block(out: &mut String, game: &GameSpec, spec: &ParityTreeAutomaton) {
    writeln!(out, "spec").unwrap();
    writeln!(out, "  states {}", spec.states.join(" ")).unwrap();
    writeln!(out, "  initial {}", spec.states[spec.initial]).unwrap();
    for (i, s) in spec.states.iter().enumerate() {
        writeln!(out, "  priority {s} {}", spec.priorities[i]).unwrap();
    }
    if spec.observable {
        writeln!(out, "  observable").unwrap();
    }
    for (&(q, p), tuples) in &spec.transitions {
        for t in tuples {
            let body: Vec<String> = t
                .iter()
                .enumerate()
                .map(|(d, &s)| format!("{}:{}", game.directions[d], spec.states[s]))
                .collect();
            writeln!(out, "  {}, {} -> ({})", spec.states[q], game.profile_name(p), body.join(", ")).unwrap();
        }
    }
}

/// Serializes a game file so that [`parse_game`] reproduces it.
pub fn write_game(file: &GameFile) -> String {
    let mut out = String::new();
    let game = file.delay.as_ref().map_or(&file.game, |f| &f.base);
    writeln!(out, "players {}", game.players()).unwrap();
    for (i, a) in game.actions.iter().enumerate() {
        writeln!(out, "actions {i}: {}", a.join(" ")).unwrap();
    }
    writeln!(out, "directions {}", game.directions.join(" ")).unwrap();
    if let Some(f) = &file.delay {
        writeln!(out, "delay {}", f.k).unwrap();
    } else {
        for (i, m) in game.observers.iter().enumerate() {
            writeln!(out, "observer {i}").unwrap();
            writeln!(out, "  states {}", m.states.join(" ")).unwrap();
            writeln!(out, "  initial {}", m.states[m.initial]).unwrap();
            writeln!(out, "  outputs {}", m.outputs.join(" ")).unwrap();
            for q in 0..m.num_states() {
                for idx in 0..m.moves {
                    if let Some((t, o)) = m.try_step(q, idx) {
                        let mv = game.move_at(idx);
                        writeln!(
                            out,
                            "  {}, {}, {} -> {} / {}",
                            m.states[q],
                            game.profile_name(mv.profile),
                            game.directions[mv.direction],
                            m.states[t],
                            m.outputs[o]
                        )
                        .unwrap();
                    }
                }
            }
        }
    }
    if let Some(spec) = &file.spec {
        match &file.delay {
            Some(f) => write_spec_block(&mut out, &f.base, &f.unlift_spec(spec)),
            None => write_spec_block(&mut out, game, spec),
        }
    }
    out
}

/// Serializes a specification alone, as accepted by [`parse_spec`].
pub fn write_spec(file: &GameFile, spec: &ParityTreeAutomaton) -> String {
    let mut out = String::new();
    match &file.delay {
        Some(f) => write_spec_block(&mut out, &f.base, &f.unlift_spec(spec)),
        None => write_spec_block(&mut out, &file.game, spec),
    }
    out
}

/// A strategy file, optionally carrying a certificate (labels and measure).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyFile {
    pub strategy: DecisionStructure,
    pub labels: Option<Vec<Label>>,
    pub measure: Option<Vec<Vec<u32>>>,
}

impl StrategyFile {
    pub fn annotated(&self) -> Option<AnnotatedStrategy> {
        self.labels
            .as_ref()
            .map(|labels| AnnotatedStrategy { strategy: self.strategy.clone(), labels: labels.clone() })
    }
}

/// Parses a strategy or certificate. Labels need a specification to
/// resolve state names. Unreachable nodes are kept; callers prune when needed.
pub fn parse_strategy(text: &str, game: &GameSpec, spec: Option<&ParityTreeAutomaton>) -> ParseResult<StrategyFile> {
    let ls = lines(text);
    let mut diags = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut choice: Vec<usize> = Vec::new();
    let mut initial: Option<(String, Line)> = None;
    let mut edge_lines: Vec<&Line> = Vec::new();
    let mut label_lines: Vec<&Line> = Vec::new();
    let mut measure_lines: Vec<&Line> = Vec::new();
    let mut frontier_names: Vec<(String, Line)> = Vec::new();
    #[derive(PartialEq)]
    enum Sec {
        None,
        Nodes,
        Edges,
    }
    let mut sec = Sec::None;
    for l in &ls {
        match l.keyword() {
            "nodes" => sec = Sec::Nodes,
            "edges" => sec = Sec::Edges,
            "initial" => {
                initial = l.words().get(1).map(|s| (s.to_string(), l.clone()));
                sec = Sec::None;
            }
            "frontier" => {
                for w in &l.words()[1..] {
                    frontier_names.push((w.to_string(), l.clone()));
                }
                sec = Sec::None;
            }
            "label" => label_lines.push(l),
            "measure" => measure_lines.push(l),
            _ if sec == Sec::Nodes => {
                let w = l.words();
                if w.len() != 2 {
                    diags.push(l.diag(l.text, "Syntax", "expected '<node> <profile>'"));
                    continue;
                }
                let profile = match expand_profile(game, w[1]) {
                    Ok(p) if p.len() == 1 => p[0],
                    Ok(_) => {
                        diags.push(l.diag(w[1], "Syntax", "a node prescribes a single profile"));
                        continue;
                    }
                    Err(m) => {
                        diags.push(l.diag(w[1], "UnknownAction", m));
                        continue;
                    }
                };
                if lookup(&names, w[0]).is_some() {
                    diags.push(l.diag(w[0], "Duplicate", format!("node '{}' declared twice", w[0])));
                    continue;
                }
                names.push(w[0].to_string());
                choice.push(profile);
            }
            _ if sec == Sec::Edges => edge_lines.push(l),
            kw => diags.push(l.diag(kw, "Syntax", format!("unexpected '{kw}'"))),
        }
    }
    let n = names.len();
    let nd = game.num_directions();
    let mut edges: Vec<Vec<Option<NodeId>>> = vec![vec![None; nd]; n];
    for l in edge_lines {
        let Some((lhs, rhs)) = split_arrow(l) else {
            diags.push(l.diag(l.text, "Syntax", "expected '<node>, <direction> -> <node>'"));
            continue;
        };
        let lt = tokens(lhs);
        if lt.len() != 2 {
            diags.push(l.diag(lhs, "Syntax", "expected '<node>, <direction> -> <node>'"));
            continue;
        }
        let Some(v) = lookup(&names, lt[0]) else {
            diags.push(l.diag(lt[0], "UnknownNode", format!("unknown node '{}'", lt[0])));
            continue;
        };
        let dirs = match expand_direction(&game.directions, lt[1]) {
            Ok(d) => d,
            Err(m) => {
                diags.push(l.diag(lt[1], "UnknownDirection", m));
                continue;
            }
        };
        let Some(w) = lookup(&names, rhs) else {
            diags.push(l.diag(rhs, "UnknownNode", format!("unknown node '{rhs}'")));
            continue;
        };
        for d in dirs {
            edges[v][d] = Some(w);
        }
    }
    let mut frontier = vec![false; n];
    for (name, l) in &frontier_names {
        match lookup(&names, name) {
            Some(v) => {
                frontier[v] = true;
                for d in 0..nd {
                    edges[v][d].get_or_insert(v);
                }
            }
            None => diags.push(l.diag(name, "UnknownNode", format!("unknown node '{name}'"))),
        }
    }
    let mut full_edges = Vec::with_capacity(n);
    for (v, row) in edges.iter().enumerate() {
        let mut r = Vec::with_capacity(nd);
        for (d, e) in row.iter().enumerate() {
            match e {
                Some(w) => r.push(*w),
                None => {
                    diags.push(ParseDiagnostic {
                        line: 0,
                        column: 0,
                        code: "MissingEdge".into(),
                        message: format!("node '{}' has no edge for direction '{}'", names[v], game.directions[d]),
                    });
                    r.push(v);
                }
            }
        }
        full_edges.push(r);
    }
    let init = match &initial {
        Some((name, l)) => lookup(&names, name).unwrap_or_else(|| {
            diags.push(l.diag(name, "UnknownNode", format!("unknown node '{name}'")));
            0
        }),
        None if n > 0 => 0,
        None => {
            diags.push(ParseDiagnostic { line: 0, column: 0, code: "Missing".into(), message: "no nodes".into() });
            0
        }
    };

    let mut labels = None;
    if !label_lines.is_empty() {
        match spec {
            None => diags.push(label_lines[0].diag("label", "Missing", "labels need a specification")),
            Some(spec) => {
                let mut ls: Vec<Option<Label>> = vec![None; n];
                for l in &label_lines {
                    match parse_label_line(l, &names, game, spec) {
                        Ok((v, lab)) => ls[v] = Some(lab),
                        Err(d) => diags.push(d),
                    }
                }
                match ls.into_iter().collect::<Option<Vec<_>>>() {
                    Some(v) => labels = Some(v),
                    None => diags.push(ParseDiagnostic {
                        line: 0,
                        column: 0,
                        code: "MissingLabel".into(),
                        message: "every node needs a label".into(),
                    }),
                }
            }
        }
    }
    let mut measure = None;
    if !measure_lines.is_empty() {
        let mut ms: Vec<Option<Vec<u32>>> = vec![None; n];
        for l in &measure_lines {
            let Some((lhs, rhs)) = split_arrow(l) else {
                diags.push(l.diag(l.text, "Syntax", "expected 'measure <node> -> (m0, ...)'"));
                continue;
            };
            let node = lhs.trim_start_matches("measure").trim();
            let Some(v) = lookup(&names, node) else {
                diags.push(l.diag(node, "UnknownNode", format!("unknown node '{node}'")));
                continue;
            };
            let inner = rhs.trim_start_matches('(').trim_end_matches(')');
            match tokens(inner).iter().map(|t| t.parse::<u32>()).collect::<Result<Vec<_>, _>>() {
                Ok(m) => ms[v] = Some(m),
                Err(_) => diags.push(l.diag(rhs, "Syntax", "measure components are naturals")),
            }
        }
        match ms.into_iter().collect::<Option<Vec<_>>>() {
            Some(v) => measure = Some(v),
            None => diags.push(ParseDiagnostic {
                line: 0,
                column: 0,
                code: "MissingMeasure".into(),
                message: "every node needs a measure".into(),
            }),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let strategy = DecisionStructure { names, choice, edges: full_edges, initial: init, frontier };
    Ok(StrategyFile { strategy, labels, measure })
}

fn parse_label_line(
    l: &Line,
    names: &[String],
    game: &GameSpec,
    spec: &ParityTreeAutomaton,
) -> Result<(NodeId, Label), ParseDiagnostic> {
    let (lhs, rhs) = split_arrow(l).ok_or_else(|| l.diag(l.text, "Syntax", "expected 'label <node> -> (q0, ... | s)'"))?;
    let node = lhs.trim_start_matches("label").trim();
    let v = lookup(names, node).ok_or_else(|| l.diag(node, "UnknownNode", format!("unknown node '{node}'")))?;
    let inner = rhs.trim_start_matches('(').trim_end_matches(')');
    let (obs, s) = inner.split_once('|').ok_or_else(|| l.diag(rhs, "Syntax", "expected '(q0, ... | s)'"))?;
    let obs = tokens(obs);
    if obs.len() != game.players() {
        return Err(l.diag(rhs, "LabelArity", format!("expected {} observer states", game.players())));
    }
    let mut observers = Vec::with_capacity(obs.len());
    for (i, q) in obs.iter().enumerate() {
        let m = &game.observers[i];
        observers.push(lookup(&m.states, q).ok_or_else(|| l.diag(q, "UnknownState", format!("observer {i} has no state '{q}'")))?);
    }
    let s = s.trim();
    let spec_state = lookup(&spec.states, s).ok_or_else(|| l.diag(s, "UnknownState", format!("unknown state '{s}'")))?;
    Ok((v, Label { observers, spec: spec_state }))
}

/// Serializes a strategy, with labels and measure when given.
pub fn write_strategy(
    game: &GameSpec,
    s: &DecisionStructure,
    annotation: Option<(&[Label], &ParityTreeAutomaton)>,
    measure: Option<&[Vec<u32>]>,
) -> String {
    let mut out = String::new();
    writeln!(out, "nodes").unwrap();
    for v in 0..s.len() {
        writeln!(out, "  {} {}", s.names[v], game.profile_name(s.choice[v])).unwrap();
    }
    writeln!(out, "initial {}", s.names[s.initial]).unwrap();
    writeln!(out, "edges").unwrap();
    for v in 0..s.len() {
        if s.is_frontier(v) {
            continue;
        }
        for (d, &w) in s.edges[v].iter().enumerate() {
            writeln!(out, "  {}, {} -> {}", s.names[v], game.directions[d], s.names[w]).unwrap();
        }
    }
    let fr: Vec<&str> = (0..s.len()).filter(|&v| s.is_frontier(v)).map(|v| s.names[v].as_str()).collect();
    if !fr.is_empty() {
        writeln!(out, "frontier {}", fr.join(" ")).unwrap();
    }
    if let Some((labels, spec)) = annotation {
        for v in 0..s.len() {
            let obs: Vec<&str> = labels[v]
                .observers
                .iter()
                .enumerate()
                .map(|(i, &q)| game.observers[i].states[q].as_str())
                .collect();
            writeln!(out, "label {} -> ({} | {})", s.names[v], obs.join(", "), spec.states[labels[v].spec]).unwrap();
        }
    }
    if let Some(m) = measure {
        for v in 0..s.len() {
            let parts: Vec<String> = m[v].iter().map(u32::to_string).collect();
            writeln!(out, "measure {} -> ({})", s.names[v], parts.join(", ")).unwrap();
        }
    }
    out
}

/// Parses `node -> node` lines into a total map; unmentioned nodes map to
/// themselves.
pub fn parse_map(text: &str, s: &DecisionStructure) -> ParseResult<Vec<NodeId>> {
    let mut map: Vec<NodeId> = (0..s.len()).collect();
    let mut diags = Vec::new();
    for l in lines(text) {
        let Some((lhs, rhs)) = split_arrow(&l) else {
            diags.push(l.diag(l.text, "Syntax", "expected '<node> -> <node>'"));
            continue;
        };
        match (s.node_index(lhs), s.node_index(rhs)) {
            (Some(u), Some(v)) => map[u] = v,
            (None, _) => diags.push(l.diag(lhs, "UnknownNode", format!("unknown node '{lhs}'"))),
            (_, None) => diags.push(l.diag(rhs, "UnknownNode", format!("unknown node '{rhs}'"))),
        }
    }
    if diags.is_empty() { Ok(map) } else { Err(diags) }
}

pub fn write_map(s: &DecisionStructure, map: &[NodeId]) -> String {
    let mut out = String::new();
    for (u, &v) in map.iter().enumerate() {
        writeln!(out, "{} -> {}", s.names[u], s.names[v]).unwrap();
    }
    out
}

/// Parses `position <name> even|odd <priority> -> <succ> ...` lines and an
/// optional `initial <name>` (default: the first position).
pub fn parse_arena(text: &str) -> ParseResult<ParityArena> {
    let ls = lines(text);
    let mut diags = Vec::new();
    let mut arena = ParityArena::new();
    let mut succ_names: Vec<(usize, Vec<String>, Line)> = Vec::new();
    let mut initial = None;
    for l in &ls {
        match l.keyword() {
            "position" => {
                let Some((lhs, rhs)) = split_arrow(l) else {
                    diags.push(l.diag(l.text, "Syntax", "expected 'position <name> even|odd <priority> -> <succ>...'"));
                    continue;
                };
                let w = tokens(lhs);
                if w.len() != 4 {
                    diags.push(l.diag(lhs, "Syntax", "expected 'position <name> even|odd <priority>'"));
                    continue;
                }
                let owner = match w[2] {
                    "even" => Owner::Even,
                    "odd" => Owner::Odd,
                    o => {
                        diags.push(l.diag(o, "Syntax", "owner must be 'even' or 'odd'"));
                        continue;
                    }
                };
                let Ok(p) = w[3].parse::<u32>() else {
                    diags.push(l.diag(w[3], "Syntax", "priority must be a natural"));
                    continue;
                };
                if lookup(&arena.names, w[1]).is_some() {
                    diags.push(l.diag(w[1], "Duplicate", format!("position '{}' declared twice", w[1])));
                    continue;
                }
                let id = arena.add_position(w[1], owner, p);
                succ_names.push((id, tokens(rhs).iter().map(|s| s.to_string()).collect(), l.clone()));
            }
            "initial" => initial = l.words().get(1).map(|s| (s.to_string(), l.clone())),
            kw => diags.push(l.diag(kw, "Syntax", format!("unexpected '{kw}'"))),
        }
    }
    for (id, succ, l) in succ_names {
        for s in succ {
            match lookup(&arena.names, &s) {
                Some(t) => arena.add_move(id, t),
                None => diags.push(l.diag(&s, "UnknownPosition", format!("unknown position '{s}'"))),
            }
        }
    }
    if let Some((name, l)) = initial {
        match lookup(&arena.names, &name) {
            Some(i) => arena.initial = i,
            None => diags.push(l.diag(&name, "UnknownPosition", format!("unknown position '{name}'"))),
        }
    }
    if arena.is_empty() {
        diags.push(ParseDiagnostic { line: 0, column: 0, code: "Missing".into(), message: "no positions".into() });
    }
    if diags.is_empty() { Ok(arena) } else { Err(diags) }
}

pub fn write_arena(arena: &ParityArena) -> String {
    let mut out = String::new();
    for v in 0..arena.len() {
        let owner = match arena.owner[v] {
            Owner::Even => "even",
            Owner::Odd => "odd",
        };
        let succ: Vec<&str> = arena.moves[v].iter().map(|&w| arena.names[w].as_str()).collect();
        writeln!(out, "position {} {owner} {} -> {}", arena.names[v], arena.priority[v], succ.join(" ")).unwrap();
    }
    writeln!(out, "initial {}", arena.names[arena.initial]).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAFE_GAME: &str = "
players 1
actions 0: a b
directions l r
observer 0
  states q
  initial q
  q, *, * -> q / _
spec
  states s bad
  initial s
  priority s 0
  priority bad 1
  s, a -> (l:s, r:s)
  s, b -> (l:bad, r:bad)
  bad, * -> (bad, bad)
";

    #[test]
    fn parses_safe_game() {
        let f = parse_game(SAFE_GAME).unwrap();
        assert_eq!(f.game.players(), 1);
        assert_eq!(f.game.move_count(), 4);
        let spec = f.spec.unwrap();
        assert_eq!(spec.priorities, vec![0, 1]);
        assert_eq!(spec.options(0, 0), &[vec![0, 0]]);
        assert_eq!(spec.options(1, 1), &[vec![1, 1]]);
    }

    #[test]
    fn unknown_direction_is_reported_at_its_line() {
        let text = SAFE_GAME.replace("s, a -> (l:s, r:s)", "s, a -> (l:s, x:s)");
        let d = parse_game(&text).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "UnknownDirection");
        assert_eq!(d[0].line, 14);
        assert!(d[0].column > 1);
    }

    #[test]
    fn game_round_trip() {
        let f = parse_game(SAFE_GAME).unwrap();
        let again = parse_game(&write_game(&f)).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn renormalizes_priorities() {
        let text = SAFE_GAME.replace("priority s 0", "priority s 4").replace("priority bad 1", "priority bad 7");
        let spec = parse_game(&text).unwrap().spec.unwrap();
        assert_eq!(spec.priorities, vec![0, 1]);
    }

    #[test]
    fn strategy_round_trip_with_certificate() {
        let f = parse_game(SAFE_GAME).unwrap();
        let spec = f.spec.clone().unwrap();
        let text = "nodes\n  x a\n  y a\ninitial x\nedges\n  x, * -> y\n  y, l -> x\n  y, r -> y\n\
                    label x -> (q | s)\nlabel y -> (q | s)\nmeasure x -> (0, 0)\nmeasure y -> (0, 0)\n";
        let sf = parse_strategy(text, &f.game, Some(&spec)).unwrap();
        assert_eq!(sf.strategy.edges, vec![vec![1, 1], vec![0, 1]]);
        let labels = sf.labels.clone().unwrap();
        let m = sf.measure.clone().unwrap();
        let out = write_strategy(&f.game, &sf.strategy, Some((&labels, &spec)), Some(&m));
        assert_eq!(parse_strategy(&out, &f.game, Some(&spec)).unwrap(), sf);
    }

    #[test]
    fn missing_edge_is_reported() {
        let f = parse_game(SAFE_GAME).unwrap();
        let d = parse_strategy("nodes\n  x a\nedges\n  x, l -> x\n", &f.game, None).unwrap_err();
        assert_eq!(d[0].code, "MissingEdge");
    }

    #[test]
    fn arena_round_trip() {
        let text = "position x odd 2 -> y z\nposition y even 0 -> y\nposition z even 1 -> z\ninitial x\n";
        let a = parse_arena(text).unwrap();
        assert_eq!(write_arena(&a), text);
    }

    #[test]
    fn map_defaults_to_identity() {
        let s = DecisionStructure::new(vec![0, 0], vec![vec![1, 1], vec![1, 1]], 0);
        assert_eq!(parse_map("v1 -> v0\n", &s).unwrap(), vec![0, 0]);
        assert_eq!(parse_map(&write_map(&s, &[1, 1]), &s).unwrap(), vec![1, 1]);
    }
}
