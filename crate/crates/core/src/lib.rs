//! Classical realizability toolkit: a Krivine machine for λc with call/cc
//! and primitive numerals, witness extraction drivers, and a CPS
//! translation into HA2 terms with a checker for its simulation
//! properties.

pub mod arith;
pub mod extract;
pub mod ha2;
pub mod kam;
pub mod lex;
pub mod negtrans;
pub mod script;
pub mod stdlib;
pub mod syntax;
mod util;

pub use lex::ParseError;
pub use syntax::{parse_process, parse_stack, parse_term, Process, Stack, Term};
