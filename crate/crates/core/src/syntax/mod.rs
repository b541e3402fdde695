//! λc terms, stacks and processes.

mod parse;
mod print;
mod term;

pub use parse::{
    parse_process, parse_process_with, parse_stack, parse_stack_with, parse_term, parse_term_with,
    ParseEnv, TermParser, BUILTIN_INSTRUCTIONS,
};
pub use print::{print_process, print_stack, print_term};
pub(crate) use term::Kind;
pub use term::{
    extend_stack_bottom, free_vars, fresh_name, substitute, ExtendBottom, Name, Process, Stack,
    StackIter, Term, TermView,
};
