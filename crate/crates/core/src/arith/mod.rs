//! Arithmetic expressions over a primitive-recursive signature, and the
//! formula languages PA2⁺ and HA2.

mod expr;
mod formula;
mod hformula;

pub use expr::{
    parse_expr, parse_expr_at, ArithExpr, Equation, Pattern, Signature, SymbolDef, SymbolKind,
    Valuation,
};
pub(crate) use formula::parse_formula_at;
pub use formula::{
    and, as_nat, bot, equal, exists1, exists2, exists_n, expand_abbreviation, forall_n, nat,
    nat_prime, normalize_formula_pa2, not, or, parse_formula, relativize_nat, top, AbbrevArg,
    Abstraction, Formula,
};
pub use hformula::{normalize_formula_ha2, parse_hformula, HFormula};

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("equations of `{0}` are not exhaustive")]
    NonExhaustive(String),
    #[error("equations of `{0}` overlap")]
    Overlap(String),
    #[error("`{0}` is not structurally primitive recursive")]
    NotPrimitiveRecursive(String),
    #[error("`{0}` is already defined")]
    Redefinition(String),
    #[error("unknown abbreviation `{0}`")]
    UnknownAbbreviation(String),
    #[error("relativization expects a PA2 formula without `{{e}} -> B`")]
    BraceInPa2,
    #[error("{0}")]
    Malformed(String),
}

/// `eval_expr(e, ρ)` over `sig`.
pub fn eval_expr(e: &ArithExpr, rho: &Valuation, sig: &Signature) -> Result<BigUint, ArithError> {
    sig.eval(e, rho)
}

pub fn normalize_expr(e: &ArithExpr, sig: &Signature) -> ArithExpr {
    sig.normalize(e)
}
