//! Graphviz export.

use std::fmt::Write;

use crate::annotation::AnnotatedStrategy;
use crate::dstates::ClassReport;
use crate::game::{GameSpec, ParityTreeAutomaton};
use crate::strategy::DecisionStructure;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn header(out: &mut String) {
    out.push_str("digraph strategy {\n  rankdir=LR;\n  start [shape=point];\n");
}

fn edges(out: &mut String, game: &GameSpec, s: &DecisionStructure) {
    writeln!(out, "  start -> n{};", s.initial).unwrap();
    for v in 0..s.len() {
        if s.is_frontier(v) {
            continue;
        }
        for (d, &w) in s.edges[v].iter().enumerate() {
            writeln!(out, "  n{v} -> n{w} [label=\"{}\"];", escape(&game.directions[d])).unwrap();
        }
    }
}

fn node(out: &mut String, s: &DecisionStructure, v: usize, label: &str, extra: &str) {
    let style = if s.is_frontier(v) { ", style=dashed" } else { "" };
    writeln!(out, "  n{v} [label=\"{}\"{style}{extra}];", escape(label)).unwrap();
}

pub fn strategy_dot(game: &GameSpec, s: &DecisionStructure) -> String {
    let mut out = String::new();
    header(&mut out);
    for v in 0..s.len() {
        node(&mut out, s, v, &format!("{}: {}", s.names[v], game.profile_name(s.choice[v])), "");
    }
    edges(&mut out, game, s);
    out.push_str("}\n");
    out
}

fn annotated_label(game: &GameSpec, spec: &ParityTreeAutomaton, a: &AnnotatedStrategy, v: usize) -> String {
    let l = &a.labels[v];
    let obs: Vec<&str> = l.observers.iter().zip(&game.observers).map(|(&q, m)| m.states[q].as_str()).collect();
    format!(
        "{}: {}\n{} | {} ({})",
        a.strategy.names[v],
        game.profile_name(a.strategy.choice[v]),
        obs.join(","),
        spec.states[l.spec],
        spec.priority(l.spec)
    )
}

pub fn annotated_dot(game: &GameSpec, spec: &ParityTreeAutomaton, a: &AnnotatedStrategy) -> String {
    let mut out = String::new();
    header(&mut out);
    for v in 0..a.len() {
        node(&mut out, &a.strategy, v, &annotated_label(game, spec, a, v), "");
    }
    edges(&mut out, game, &a.strategy);
    out.push_str("}\n");
    out
}

/// D-states as clusters; nodes of the same isomorphism class share a colour
/// index.
pub fn dstates_dot(game: &GameSpec, spec: &ParityTreeAutomaton, a: &AnnotatedStrategy, report: &ClassReport) -> String {
    let mut out = String::new();
    header(&mut out);
    for (i, k) in report.dstates.iter().enumerate() {
        let class = report.class_of(i);
        writeln!(out, "  subgraph cluster_{i} {{\n    label=\"d{i} / class {class}\";").unwrap();
        for &v in &k.nodes {
            out.push_str("  ");
            node(&mut out, &a.strategy, v, &annotated_label(game, spec, a, v), &format!(", colorscheme=set312, color={}", class % 12 + 1));
        }
        out.push_str("  }\n");
    }
    edges(&mut out, game, &a.strategy);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn steer_witness_dot() {
        let (g, spec, a) = fixtures::steer_witness();
        let dot = annotated_dot(&g, &spec, &a);
        assert!(dot.starts_with("digraph strategy {"));
        assert!(dot.contains("n0 -> n1 [label=\"l\"]"));
        assert!(dot.contains("ql (1)"));
        let plain = strategy_dot(&g, &a.strategy);
        assert!(plain.contains("x: b"));
    }
}
