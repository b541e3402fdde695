use crate::syntax::{fresh_name, parse_term, Term};
use num_bigint::BigUint;

fn closed(text: &str) -> Term {
    let t = parse_term(text).expect("library term parses");
    debug_assert!(t.is_closed(), "{text}");
    t
}

pub fn identity() -> Term {
    closed("\\x.x")
}

/// `λx f. fⁿ x`.
pub fn church(n: u64) -> Term {
    let (x, f) = (fresh_name("x"), fresh_name("f"));
    let mut body = Term::var(&x);
    for _ in 0..n {
        body = Term::app(Term::var(&f), body);
    }
    Term::lams(&[x, f], body)
}

/// `ň ≡ λx. x n̂`.
pub fn lazy_numeral(n: impl Into<BigUint>) -> Term {
    let x = fresh_name("x");
    Term::lam(&x, Term::app(Term::var(&x), Term::num(n)))
}

/// `λx y z. z x y`.
pub fn pair() -> Term {
    closed("\\x y z. z x y")
}

/// `⟨a;b⟩ ≡ λz. z a b`.
pub fn make_pair(a: Term, b: Term) -> Term {
    let z = fresh_name("z");
    Term::lam(&z, Term::apps(Term::var(&z), [a, b]))
}

/// Turing's fixpoint combinator Θ, with `Θ F ⋆ π ≻* F ⋆ (Θ F)·π`.
pub fn turing_fixpoint() -> Term {
    closed("(\\y z. z (y y z)) (\\y z. z (y y z))")
}

/// Realizer of `∀x∀y (s(x)=s(y) ⇒ x=y)`.
pub fn peano3() -> Term {
    closed("\\z.z")
}

/// Realizer of `∀x ¬(s(x)=0)`, with the arbitrary proof term fixed to `I`.
pub fn peano4() -> Term {
    closed("\\z. z (\\w.w)")
}

/// Converts a Church numeral into a lazy numeral: `λz. z 0̌ (λy. y s)`.
pub fn church_to_lazy() -> Term {
    closed("\\z. z (\\x. x #0) (\\y. y s)")
}

/// Converts a lazy numeral into a Church numeral.
pub fn lazy_to_church() -> Term {
    closed("\\z. z (rec (\\x f. x) (\\a n x f. f (n x f)))")
}

/// Conditional refuter for Σ⁰₁ formulas: `λ_ z. z I`.
pub fn sigma01_refuter() -> Term {
    closed("\\a z. z (\\w.w)")
}
