//! Synthesis and verification of finite-state strategies for synchronous
//! distributed games with imperfect information against parity tree
//! automaton specifications.

pub mod annotation;
pub mod dstates;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod progress;
pub mod random;
pub mod retraction;
pub mod solvers;
pub mod strategy;
