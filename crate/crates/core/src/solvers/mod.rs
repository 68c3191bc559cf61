//! Decision procedures and the brute-force oracle.

pub mod delay;
pub mod growth;
pub mod one_player;
pub mod oracle;
pub mod parity;

use crate::annotation::{find_witness_annotation, is_witness, AnnotatedStrategy};
use crate::game::{GameSpec, ParityTreeAutomaton};
use crate::progress::{check_measure, compute_measure, ProgressMeasure};
use crate::strategy::{check_strategy, DecisionStructure};

/// A strategy together with a witness annotation of its observer product and
/// a progress measure for that annotation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub strategy: DecisionStructure,
    pub annotated: AnnotatedStrategy,
    pub measure: ProgressMeasure,
}

/// Certifies `s` as a winning strategy: uniform, annotated by a witness, and
/// measured. `None` if any step fails.
pub fn certify(s: &DecisionStructure, game: &GameSpec, spec: &ParityTreeAutomaton) -> Option<Certificate> {
    check_strategy(s, game).ok()?;
    let annotated = find_witness_annotation(s, game, spec)?;
    is_witness(&annotated, spec).ok()?;
    let measure = compute_measure(&annotated, spec)?;
    check_measure(&annotated, spec, &measure).ok()?;
    Some(Certificate { strategy: s.clone(), annotated, measure })
}
