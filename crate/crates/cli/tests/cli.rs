use std::fs;
use std::path::{Path, PathBuf};

use dsynth::fixtures;
use dsynth::io::format::{write_arena, write_strategy};
use dsynth::progress::compute_measure;
use dsynth::solvers::parity::{Owner, ParityArena};
use dsynth_cli::{run, RunOutput, EXIT_BUDGET, EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).display().to_string()
}

fn dsynth(args: &[&str]) -> RunOutput {
    run(std::iter::once("dsynth").chain(args.iter().copied()).map(String::from))
}

fn steer_files(dir: &Path) -> (String, String, String) {
    let (g, spec, a) = fixtures::steer_witness();
    let mu = compute_measure(&a, &spec).unwrap();
    let cert = dir.join("steer.cert");
    fs::write(&cert, write_strategy(&g, &a.strategy, Some((&a.labels, &spec)), Some(&mu))).unwrap();
    (fixture("full.game"), fixture("steer.spec"), cert.display().to_string())
}

#[test]
fn validate_fixture() {
    let out = dsynth(&["validate", &fixture("blind.game"), "--spec", &fixture("safe.spec")]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("players: 1"));
}

#[test]
fn missing_file_is_an_input_error() {
    let out = dsynth(&["validate", "/nonexistent.game"]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("/nonexistent.game"));
}

#[test]
fn malformed_game_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.game");
    fs::write(&p, "players two\n").unwrap();
    let out = dsynth(&["validate", p.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("bad.game:1:"), "{}", out.stderr);
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(dsynth(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn verify_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let (game, spec, cert) = steer_files(dir.path());
    let dot = dir.path().join("w.dot");
    let out = dsynth(&["verify", &game, "--spec", &spec, &cert, "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("winning: yes"));
    assert!(fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn losing_strategy_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _, _) = fixtures::steer_witness();
    let s = dsynth::strategy::DecisionStructure::constant(g.profile_of(&[1]), 2);
    let p = dir.path().join("b.strat");
    fs::write(&p, write_strategy(&g, &s, None, None)).unwrap();
    let out = dsynth(&["verify", &fixture("blind.game"), "--spec", &fixture("safe.spec"), p.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_NEGATIVE, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("winning: no"));
}

#[test]
fn measure_and_retract() {
    let dir = tempfile::tempdir().unwrap();
    let (game, spec, cert) = steer_files(dir.path());
    let out = dsynth(&["measure", "check", &game, "--spec", &spec, &cert]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    let out = dsynth(&["measure", "compute", &game, "--spec", &spec, &cert]);
    assert_eq!(out.code, EXIT_OK);
    let out = dsynth(&["retract", "compact", &game, "--spec", &spec, &cert]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("after quotient: 2"));
    let map = dir.path().join("id.map");
    fs::write(&map, "x -> x\ny -> y\n").unwrap();
    let out = dsynth(&["retract", "check", &game, "--spec", &spec, &cert, "--map", map.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    fs::write(&map, "x -> y\ny -> y\n").unwrap();
    let out = dsynth(&["retract", "check", &game, "--spec", &spec, &cert, "--map", map.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_NEGATIVE, "{}{}", out.stdout, out.stderr);
}

#[test]
fn dstates_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (game, spec, cert) = steer_files(dir.path());
    let dot = dir.path().join("d.dot");
    let out = dsynth(&["dstates", "classify", &game, "--spec", &spec, &cert, "--dot", dot.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    assert!(fs::read_to_string(dot).unwrap().contains("cluster_0"));
    let out = dsynth(&["dstates", "growth", &fixture("blind.game"), "--depth", "3"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.contains("reached depth: 3"));
    let out = dsynth(&["dstates", "growth", &fixture("blind.game"), "--depth", "30", "--budget", "100"]);
    assert_eq!(out.code, EXIT_BUDGET);
}

#[test]
fn solve_one_player_and_oracle() {
    let out = dsynth(&["solve", "one-player", &fixture("full.game"), "--spec", &fixture("alternate.spec")]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("verdict: winning"));
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("alt.cert");
    let out = dsynth(&["solve", "one-player", &fixture("full.game"), "--spec", &fixture("alternate.spec"), "--out", cert.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK);
    let out = dsynth(&["verify", &fixture("full.game"), "--spec", &fixture("alternate.spec"), cert.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    let out = dsynth(&["oracle", &fixture("blind.game"), "--spec", &fixture("inverted_safe.spec"), "--bound", "2"]);
    assert_eq!(out.code, EXIT_NEGATIVE, "{}{}", out.stdout, out.stderr);
    let out = dsynth(&["oracle", &fixture("full.game"), "--spec", &fixture("alternate.spec"), "--bound", "3", "--budget", "1"]);
    assert_eq!(out.code, EXIT_BUDGET, "{}{}", out.stdout, out.stderr);
}

#[test]
fn solve_parity_arena() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = ParityArena::new();
    let x = a.add_position("x", Owner::Even, 0);
    let y = a.add_position("y", Owner::Odd, 1);
    a.add_move(x, y);
    a.add_move(y, x);
    a.add_move(x, x);
    let p = dir.path().join("a.arena");
    fs::write(&p, write_arena(&a)).unwrap();
    let out = dsynth(&["solve", "parity", p.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_OK, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("even wins: yes"));
}

#[test]
fn generate_is_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        assert_eq!(dsynth(&["generate", "--seed", "7", "--out", d.path().to_str().unwrap()]).code, EXIT_OK);
    }
    for f in ["instance.game", "instance.spec"] {
        assert_eq!(fs::read(d1.path().join(f)).unwrap(), fs::read(d2.path().join(f)).unwrap());
    }
    let game = d1.path().join("instance.game");
    let spec = d1.path().join("instance.spec");
    let out = dsynth(&["solve", "one-player", game.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--mode", "observable"]);
    assert!(out.code == EXIT_OK || out.code == EXIT_NEGATIVE, "{}{}", out.stdout, out.stderr);
}

#[test]
fn manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let m: PathBuf = dir.path().join("run.manifest");
    let out = dsynth(&["--manifest", m.to_str().unwrap(), "solve", "one-player", &fixture("full.game"), "--spec", &fixture("steer.spec")]);
    assert_eq!(out.code, EXIT_OK);
    let text = fs::read_to_string(&m).unwrap();
    assert!(text.starts_with("dsynth-manifest 1\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("input ")).count(), 2);
    let replay = dsynth(&["replay", m.to_str().unwrap()]);
    assert_eq!(replay.code, EXIT_OK, "{}{}", replay.stdout, replay.stderr);
    assert!(replay.stdout.contains("identical: yes"));
}
