//! Negative translation of formulas into HA2 and CPS translation of
//! terms, stacks and processes into HA2 terms.
//!
//! Typing is preserved in the following sense, which is not checked here:
//! if `Γ ⊢ t : A` then `Γ^¬¬ ⊢ t* : A^¬¬`, and `π : A^⊥` gives `π* : A^⊥`.

mod cps;
mod formula;
mod inline;

pub use cps::{cps_process, cps_stack, cps_term};
pub use formula::{formula_bot, formula_nn, translate_context, Hypothesis, ReturnFormula};
pub use inline::Inliner;

use crate::arith::ArithError;
use crate::ha2::HTerm;
use crate::kam::MachineConfig;
use crate::syntax::{Process, Stack, Term};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NegError {
    #[error("print has no translation")]
    Print,
    #[error("instruction {0} must be inlined before translation")]
    Instruction(String),
    #[error("rules of {0} do not cover every stack")]
    NonExhaustive(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Inlines the user instructions of `cfg`, then translates.
pub fn translate_term(t: &Term, cfg: &MachineConfig) -> Result<HTerm, NegError> {
    cps_term(&Inliner::new(cfg).term(t)?)
}

pub fn translate_stack(pi: &Stack, cfg: &MachineConfig) -> Result<HTerm, NegError> {
    cps_stack(&Inliner::new(cfg).stack(pi)?)
}

pub fn translate_process(p: &Process, cfg: &MachineConfig) -> Result<HTerm, NegError> {
    cps_process(&Inliner::new(cfg).process(p)?)
}
