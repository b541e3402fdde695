use crate::arith::{parse_hformula, ArithExpr, Formula, HFormula};

/// The pole formula `R` of a translation session.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnFormula(pub HFormula);

impl ReturnFormula {
    /// `∃x (nat(x) ∧ null(f(x)))`.
    pub fn sigma01(f: &str) -> ReturnFormula {
        let x = "x";
        let body = HFormula::and(
            HFormula::Nat(ArithExpr::var(x)),
            HFormula::Null(ArithExpr::app(f, vec![ArithExpr::var(x)])),
        );
        ReturnFormula(HFormula::ex1(x, body))
    }

    pub fn parse(text: &str) -> Result<ReturnFormula, crate::ParseError> {
        parse_hformula(text).map(ReturnFormula)
    }
}

/// `A^⊥`, the formula of stacks against `A`.
pub fn formula_bot(a: &Formula, r: &ReturnFormula) -> HFormula {
    match a {
        Formula::Pred(x, es) => HFormula::Pred(x.clone(), es.clone()),
        Formula::Null(e) => HFormula::Null(ArithExpr::app("neg", vec![e.clone()])),
        Formula::Imp(a, b) => HFormula::and(formula_nn(a, r), formula_bot(b, r)),
        Formula::Brace(e, b) => HFormula::and(HFormula::Nat(e.clone()), formula_bot(b, r)),
        Formula::All1(x, a) => HFormula::ex1(x.clone(), formula_bot(a, r)),
        Formula::All2(x, k, a) => HFormula::ex2(x.clone(), *k, formula_bot(a, r)),
    }
}

/// `A^¬¬ ≡ A^⊥ ⇒ R`.
pub fn formula_nn(a: &Formula, r: &ReturnFormula) -> HFormula {
    HFormula::imp(formula_bot(a, r), r.0.clone())
}

/// A hypothesis of a typing context.
#[derive(Debug, Clone)]
pub enum Hypothesis {
    /// `x : A`.
    Formula(Formula),
    /// `x : {e}`.
    Nat(ArithExpr),
}

/// `Γ^¬¬`: `x : A` becomes `x : A^¬¬` and `x : {e}` becomes `x : nat(e)`.
pub fn translate_context(
    ctx: &[(String, Hypothesis)],
    r: &ReturnFormula,
) -> Vec<(String, HFormula)> {
    ctx.iter()
        .map(|(x, h)| {
            let f = match h {
                Hypothesis::Formula(a) => formula_nn(a, r),
                Hypothesis::Nat(e) => HFormula::Nat(e.clone()),
            };
            (x.clone(), f)
        })
        .collect()
}
