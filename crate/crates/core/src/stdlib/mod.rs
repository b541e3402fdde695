//! Named λc terms: numerals, pairing, fixpoints, compiled arithmetic and
//! the minimum-principle realizer.

mod encodings;
mod minprinc;
mod primrec;

pub use encodings::{
    church, church_to_lazy, identity, lazy_numeral, lazy_to_church, make_pair, pair, peano3,
    peano4, sigma01_refuter, turing_fixpoint,
};
pub use minprinc::{
    demo_script, min_principle_realizers, test_le_rules, test_le_term, Build, MinPrinciple,
};
pub use primrec::{compile_expr, compile_primrec, Compiler};

use crate::arith::Signature;
use crate::kam::MachineConfig;
use crate::syntax::Term;

#[derive(Debug, Clone)]
pub struct NamedTerm {
    pub name: &'static str,
    pub term: Term,
    pub contract: &'static str,
}

/// Every closed library term, addressable from scripts with `use`.
pub fn catalog() -> Vec<NamedTerm> {
    let sig = Signature::new();
    let prim = |f| compile_primrec(&sig, f).expect("built-in symbol");
    let min =
        min_principle_realizers(Build::Fixpoint, MachineConfig::new()).expect("fixpoint build");
    let entry = |name, term, contract| NamedTerm {
        name,
        term,
        contract,
    };
    vec![
        entry("I", identity(), "I * t . π ≻* t * π"),
        entry("pair", pair(), "pair a b * z . π ≻* z * a . b . π"),
        entry(
            "theta",
            turing_fixpoint(),
            "theta F * π ≻* F * (theta F) . π",
        ),
        entry("peano3", peano3(), "realizes s(x)=s(y) ⇒ x=y"),
        entry("peano4", peano4(), "realizes ¬(s(x)=0)"),
        entry(
            "church_to_lazy",
            church_to_lazy(),
            "maps λxf.fⁿx to a term behaving like λx.x #n",
        ),
        entry(
            "lazy_to_church",
            lazy_to_church(),
            "maps λx.x #n to a term behaving like λxf.fⁿx",
        ),
        entry(
            "refute",
            sigma01_refuter(),
            "conditional refuter λ_ z. z I for Σ⁰₁ formulas",
        ),
        entry(
            "test_le",
            test_le_term(),
            "test_le * #n . #m . u . v . π ≻* u * π if n ≤ m, else v * π",
        ),
        entry(
            "plus",
            prim("+"),
            "plus * #n . #m . u . π ≻* u * #(n+m) . π",
        ),
        entry(
            "mult",
            prim("*"),
            "mult * #n . #m . u . π ≻* u * #(n·m) . π",
        ),
        entry("pred", prim("pred"), "pred * #n . u . π ≻* u * #(n-1) . π"),
        entry("neg", prim("neg"), "neg * #n . u . π ≻* u * #(n=0) . π"),
        entry(
            "minus",
            prim("minus"),
            "minus * #n . #m . u . π ≻* u * #(n∸m) . π",
        ),
        entry(
            "min_aux",
            min.min_aux,
            "min_aux * f . k . n . m . π ≻* pair n (λn'. …) * π",
        ),
        entry(
            "min_princ",
            min.min_princ,
            "λf. f #0 (λm. cc (λk. min_aux f k #0 m))",
        ),
    ]
}

pub fn lookup(name: &str) -> Option<NamedTerm> {
    catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kam::{run, Halt};
    use crate::syntax::{Process, Stack};
    use num_bigint::BigUint;

    fn stops_with(head: Term, stack: Vec<Term>) -> Option<BigUint> {
        let out = run(
            &Process::new(head, Stack::from_terms(stack, Stack::bottom())),
            &MachineConfig::new(),
        );
        match out.halt {
            Halt::FinalStop(n) => Some(n),
            _ => None,
        }
    }

    #[test]
    fn catalog_is_closed_and_proof_like() {
        for e in catalog() {
            assert!(e.term.is_closed() && e.term.is_proof_like(), "{}", e.name);
        }
        assert!(lookup("nope").is_none());
    }

    #[test]
    fn church_shape() {
        assert_eq!(church(0).to_string(), "\\x f.x");
        assert_eq!(church(2).to_string(), "\\x f.f (f x)");
        assert_eq!(lazy_numeral(0u32).to_string(), "\\x.x #0");
        assert_eq!(pair().to_string(), "\\x y z.z x y");
    }

    #[test]
    fn lazy_numeral_steps() {
        let p = Process::new(lazy_numeral(7u32), Stack::bottom().push(Term::var("u")));
        let out = run(&p, &MachineConfig::new());
        assert_eq!(out.steps, 2);
        assert_eq!(
            out.final_process,
            Process::new(Term::var("u"), Stack::bottom().push(Term::num(7u32)))
        );
    }

    #[test]
    fn theta_unfolds() {
        let f = Term::var("F");
        let p = Process::new(Term::app(turing_fixpoint(), f.clone()), Stack::bottom());
        let cfg = MachineConfig::new().with_fuel(10);
        let out = run(&p, &cfg);
        let want = Process::new(
            f.clone(),
            Stack::bottom().push(Term::app(turing_fixpoint(), f)),
        );
        assert_eq!(out.halt, Halt::Stuck);
        assert!(out.steps <= 10);
        assert_eq!(out.final_process, want);
    }

    #[test]
    fn numeral_conversions_round_trip() {
        for n in 0..=50u64 {
            let via = Term::app(
                church_to_lazy(),
                Term::app(lazy_to_church(), lazy_numeral(n)),
            );
            assert_eq!(
                stops_with(via, vec![Term::inst("stop")]),
                Some(BigUint::from(n))
            );
            let lazy = Term::app(church_to_lazy(), church(n));
            assert_eq!(
                stops_with(lazy, vec![Term::inst("stop")]),
                Some(BigUint::from(n))
            );
        }
    }

    #[test]
    fn peano_terms() {
        assert_eq!(peano3().to_string(), "\\z.z");
        assert_eq!(peano4().to_string(), "\\z.z (\\w.w)");
    }
}
