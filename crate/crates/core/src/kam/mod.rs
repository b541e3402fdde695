//! The Krivine abstract machine with call/cc, primitive numerals and
//! user-defined instructions.

mod machine;
mod parse;
mod rule;

pub use machine::{
    run, run_observed, slots, step, Control, Halt, MachineConfig, RuleName, RunOutcome, Stats,
    Step, DEFAULT_FUEL,
};
pub use parse::{parse_rule, parse_rule_at};
pub use rule::{Guard, InstructionRule, Relation, SlotPattern, Template};

use crate::arith::ArithError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KamError {
    #[error("`{0}` is a built-in instruction")]
    ReservedName(String),
    #[error("instruction `{0}` is defined twice")]
    DuplicateInstruction(String),
    #[error("instruction `{0}` has no rules")]
    NoRules(String),
    #[error("unknown instruction `{0}`")]
    UnknownInstruction(String),
    #[error("rule {rule} of `{name}` can never fire: rule {shadowed_by} matches first")]
    UnreachableRule {
        name: String,
        rule: usize,
        shadowed_by: usize,
    },
    #[error("malformed rule for `{0}`: {1}")]
    Malformed(String, String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}
