//! Witness extraction from realizers of existential formulas.

use crate::arith::{ArithError, ArithExpr, Signature, Valuation};
use crate::kam::{
    run, run_observed, Control, Halt, InstructionRule, KamError, MachineConfig, RunOutcome,
};
use crate::stdlib::compile_primrec;
use crate::syntax::{fresh_name, parse_term, parse_term_with, Process, Stack, Term};
use num_bigint::BigUint;
use num_traits::Zero;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Naive,
    Sigma01,
    Decidable,
    Kamikaze,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Sigma01 => "sigma01",
            Mode::Decidable => "decidable",
            Mode::Kamikaze => "kamikaze",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "naive" => Ok(Mode::Naive),
            "sigma01" => Ok(Mode::Sigma01),
            "decidable" => Ok(Mode::Decidable),
            "kamikaze" => Ok(Mode::Kamikaze),
            _ => Err(format!("unknown extraction mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("the realizer has free variables: {0}")]
    NotClosed(String),
    #[error("the realizer is not proof-like (it contains a continuation constant)")]
    NotProofLike,
    #[error("`{0}` is not a unary symbol of the signature")]
    NotUnary(String),
    #[error(transparent)]
    Kam(#[from] KamError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub mode: Mode,
    pub witness: Option<BigUint>,
    pub verified: Option<bool>,
    pub guesses: Vec<BigUint>,
    pub outcome: RunOutcome,
}

impl ExtractionReport {
    fn new(mode: Mode, outcome: RunOutcome, check: Option<&dyn Fn(&BigUint) -> bool>) -> Self {
        let witness = outcome.stop_value().cloned();
        let verified = witness.as_ref().and_then(|n| check.map(|c| c(n)));
        ExtractionReport {
            mode,
            witness,
            verified,
            guesses: outcome.printed.clone(),
            outcome,
        }
    }
}

fn wrapper(text: &str) -> Term {
    parse_term(text).expect("wrapper parses")
}

fn closed(t0: &Term) -> Result<(), ExtractError> {
    let fv = t0.free_vars();
    if fv.is_empty() {
        Ok(())
    } else {
        Err(ExtractError::NotClosed(
            fv.into_iter().collect::<Vec<_>>().join(", "),
        ))
    }
}

fn process(t0: &Term, w: Term, pi0: &Stack) -> Process {
    Process::new(t0.clone(), pi0.push(w))
}

/// `f(n) = 0` in the signature of `cfg`.
pub fn nullity_oracle<'a>(
    sig: &'a Signature,
    f: &'a str,
) -> Result<impl Fn(&BigUint) -> bool + 'a, ExtractError> {
    if sig.arity(f).ok() != Some(1) {
        return Err(ExtractError::NotUnary(f.into()));
    }
    Ok(move |n: &BigUint| {
        let e = ArithExpr::app(f, vec![ArithExpr::Num(n.clone())]);
        sig.eval(&e, &Valuation::new())
            .map(|v| v.is_zero())
            .unwrap_or(false)
    })
}

/// `t0 ⋆ (λxy. stop x)·π₀`; the answer carries no guarantee.
pub fn extract_naive(
    t0: &Term,
    cfg: &MachineConfig,
    pi0: &Stack,
    oracle: Option<&dyn Fn(&BigUint) -> bool>,
) -> Result<ExtractionReport, ExtractError> {
    closed(t0)?;
    let out = run(&process(t0, wrapper("\\x y. stop x"), pi0), cfg);
    Ok(ExtractionReport::new(Mode::Naive, out, oracle))
}

/// `t0 ⋆ (λxy. y (stop x))·π₀` for a realizer of `∃x f(x)=0`; with
/// `trace` the wrapper prints every proposed witness.
pub fn extract_sigma01(
    t0: &Term,
    f: &str,
    cfg: &MachineConfig,
    pi0: &Stack,
    trace: bool,
) -> Result<ExtractionReport, ExtractError> {
    closed(t0)?;
    let oracle = nullity_oracle(cfg.signature(), f)?;
    let w = if trace {
        "\\x y. print x y (stop x)"
    } else {
        "\\x y. y (stop x)"
    };
    let out = run(&process(t0, wrapper(w), pi0), cfg);
    Ok(ExtractionReport::new(Mode::Sigma01, out, Some(&oracle)))
}

/// `t0 ⋆ (λxy. d x (stop x) (r x y))·π₀`, with `d` and `r` registered as
/// the instructions `decide` and `refute` so their calls are counted.
pub fn extract_decidable(
    t0: &Term,
    d: &Term,
    r: &Term,
    oracle: &dyn Fn(&BigUint) -> bool,
    cfg: &MachineConfig,
    pi0: &Stack,
) -> Result<ExtractionReport, ExtractError> {
    closed(t0)?;
    closed(d)?;
    closed(r)?;
    let cfg = cfg.clone().register_batch(vec![
        (
            "decide".into(),
            vec![InstructionRule::macro_rule("decide", d.clone())],
        ),
        (
            "refute".into(),
            vec![InstructionRule::macro_rule("refute", r.clone())],
        ),
    ])?;
    let w = parse_term_with("\\x y. decide x (stop x) (refute x y)", &cfg.parse_env()).unwrap();
    let out = run(&process(t0, w, pi0), &cfg);
    Ok(ExtractionReport::new(Mode::Decidable, out, Some(oracle)))
}

/// `t0 ⋆ (λxy. print x (r x y))·π₀`; the candidate is the last printed
/// number. Stops at the first printed number the oracle accepts.
pub fn extract_kamikaze(
    t0: &Term,
    r: &Term,
    oracle: Option<&dyn Fn(&BigUint) -> bool>,
    cfg: &MachineConfig,
    pi0: &Stack,
) -> Result<ExtractionReport, ExtractError> {
    closed(t0)?;
    closed(r)?;
    let (x, y) = (fresh_name("x"), fresh_name("y"));
    let (x, y) = (x.as_str(), y.as_str());
    let body = Term::apps(
        Term::inst("print"),
        [
            Term::var(x),
            Term::apps(r.clone(), [Term::var(x), Term::var(y)]),
        ],
    );
    let w = Term::lams(&[x, y], body);
    let out = run_observed(&process(t0, w, pi0), cfg, &mut |n| match oracle {
        Some(o) if o(n) => Control::Interrupt,
        _ => Control::Continue,
    });
    let witness = out.printed.last().cloned();
    let verified = witness.as_ref().and_then(|n| oracle.map(|o| o(n)));
    Ok(ExtractionReport {
        mode: Mode::Kamikaze,
        witness,
        verified,
        guesses: out.printed.clone(),
        outcome: out,
    })
}

/// `d ⋆ n̂·u·v·π ≻* u ⋆ π` iff `f(n) = 0`, else `v ⋆ π`.
pub fn make_decider_sigma01(sig: &Signature, f: &str) -> Result<Term, ExtractError> {
    if sig.arity(f).ok() != Some(1) {
        return Err(ExtractError::NotUnary(f.into()));
    }
    let fc = compile_primrec(sig, f)?;
    let shape = parse_term("\\n u v. F n (\\r. rec u (\\a b. v) r)").unwrap();
    Ok(shape.substitute("F", &fc))
}

/// Checks a decider against an oracle on `0..samples`; returns the first
/// disagreement.
pub fn check_decider(
    d: &Term,
    oracle: &dyn Fn(&BigUint) -> bool,
    cfg: &MachineConfig,
    samples: u64,
) -> Option<BigUint> {
    (0..samples).map(BigUint::from).find(|n| {
        let yes = Term::app(Term::inst("stop"), Term::num(1u32));
        let no = Term::app(Term::inst("stop"), Term::num(0u32));
        let p = Process::new(
            Term::apps(d.clone(), [Term::num(n.clone()), yes, no]),
            Stack::bottom(),
        );
        let got = run(&p, cfg).stop_value().map(|v| !v.is_zero());
        got != Some(oracle(n))
    })
}

/// Checks a conditional refuter on `0..samples`: whenever the oracle
/// rejects `n`, `r ⋆ n̂·canary·⋄` must not reach `stop`. Returns the first
/// violation.
pub fn check_refuter(
    r: &Term,
    oracle: &dyn Fn(&BigUint) -> bool,
    cfg: &MachineConfig,
    samples: u64,
) -> Option<BigUint> {
    (0..samples)
        .map(BigUint::from)
        .filter(|n| !oracle(n))
        .find(|n| {
            let p = Process::new(
                r.clone(),
                Stack::from_terms([Term::num(n.clone()), Term::var("canary")], Stack::bottom()),
            );
            matches!(run(&p, cfg).halt, Halt::FinalStop(_))
        })
}

#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub independent: bool,
    /// One entry per stack, the empty stack first.
    pub witnesses: Vec<Option<BigUint>>,
    pub halts: Vec<Halt>,
}

/// Runs `t0 ⋆ (λxy. y (stop x))·π` on the empty stack and on each of
/// `stacks`; independent iff all runs stop with the same witness.
pub fn check_independence(
    t0: &Term,
    stacks: &[Stack],
    cfg: &MachineConfig,
) -> Result<IndependenceReport, ExtractError> {
    closed(t0)?;
    if !t0.is_proof_like() {
        return Err(ExtractError::NotProofLike);
    }
    let w = wrapper("\\x y. y (stop x)");
    let mut witnesses = Vec::new();
    let mut halts = Vec::new();
    for pi in std::iter::once(&Stack::bottom()).chain(stacks) {
        let out = run(&process(t0, w.clone(), pi), cfg);
        witnesses.push(out.stop_value().cloned());
        halts.push(out.halt);
    }
    let independent = witnesses[0].is_some() && witnesses.iter().all(|w| *w == witnesses[0]);
    Ok(IndependenceReport {
        independent,
        witnesses,
        halts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stdlib::sigma01_refuter;

    fn n(k: u32) -> BigUint {
        BigUint::from(k)
    }

    fn sig_with_f(c: u32) -> Signature {
        let mut sig = Signature::new();
        let rhs = crate::arith::parse_expr(&format!("minus(x, {c}) + minus({c}, x)")).unwrap();
        sig.define_explicit("f", &["x".into()], rhs).unwrap();
        sig
    }

    #[test]
    fn naive_direct_pair() {
        let t0 = parse_term("\\u. u #4 (\\w.w)").unwrap();
        let rep = extract_naive(&t0, &MachineConfig::new(), &Stack::bottom(), None).unwrap();
        assert_eq!(rep.witness, Some(n(4)));
        assert_eq!(rep.verified, None);
        let stuck = parse_term("\\u. u").unwrap();
        let rep = extract_naive(&stuck, &MachineConfig::new(), &Stack::bottom(), None).unwrap();
        assert_eq!((rep.witness, rep.outcome.halt), (None, Halt::Stuck));
    }

    #[test]
    fn sigma01_immediate_pair() {
        let cfg = MachineConfig::new().with_signature(sig_with_f(3));
        let t0 = parse_term("\\u. u #3 (\\z.z)").unwrap();
        let rep = extract_sigma01(&t0, "f", &cfg, &Stack::bottom(), true).unwrap();
        assert_eq!(rep.witness, Some(n(3)));
        assert_eq!(rep.verified, Some(true));
        assert_eq!(rep.guesses, vec![n(3)]);
        assert_eq!(
            extract_sigma01(&t0, "+", &cfg, &Stack::bottom(), false).unwrap_err(),
            ExtractError::NotUnary("+".into())
        );
    }

    #[test]
    fn decider_examples() {
        let sig = Signature::new();
        let cfg = MachineConfig::new();
        let d = make_decider_sigma01(&sig, "pred").unwrap();
        let p = Process::new(
            d,
            Stack::from_terms(
                [Term::num(1u32), Term::var("u"), Term::var("v")],
                Stack::bottom(),
            ),
        );
        assert_eq!(run(&p, &cfg).final_process.head, Term::var("u"));
        let d = make_decider_sigma01(&sig, "s").unwrap();
        let p = Process::new(
            d,
            Stack::from_terms(
                [Term::num(0u32), Term::var("u"), Term::var("v")],
                Stack::bottom(),
            ),
        );
        assert_eq!(run(&p, &cfg).final_process.head, Term::var("v"));
        let sig = sig_with_f(7);
        let d = make_decider_sigma01(&sig, "f").unwrap();
        let oracle = nullity_oracle(&sig, "f").unwrap();
        assert_eq!(check_decider(&d, &oracle, &cfg, 31), None);
        assert_eq!(check_refuter(&sigma01_refuter(), &oracle, &cfg, 31), None);
    }

    #[test]
    fn decidable_one_backtrack() {
        let sig = sig_with_f(5);
        let cfg = MachineConfig::new().with_signature(sig.clone());
        let oracle = nullity_oracle(&sig, "f").unwrap();
        let d = make_decider_sigma01(&sig, "f").unwrap();
        let r = sigma01_refuter();
        let right = parse_term("\\u. u #5 (\\z.z)").unwrap();
        let rep = extract_decidable(&right, &d, &r, &oracle, &cfg, &Stack::bottom()).unwrap();
        assert_eq!(
            (rep.witness.clone(), rep.verified),
            (Some(n(5)), Some(true))
        );
        assert_eq!(
            (
                rep.outcome.stats.get("decide"),
                rep.outcome.stats.get("refute")
            ),
            (1, 0)
        );
        // first proposes 2, and on refutation resumes with 5
        let t0 = parse_term("\\u. cc (\\k. u #2 (\\z. k (u #5 (\\w.w))))").unwrap();
        let rep = extract_decidable(&t0, &d, &r, &oracle, &cfg, &Stack::bottom()).unwrap();
        assert_eq!(rep.witness, Some(n(5)));
        assert_eq!(
            (
                rep.outcome.stats.get("decide"),
                rep.outcome.stats.get("refute")
            ),
            (2, 1)
        );
        assert_eq!(rep.outcome.stats.get("Resume"), 1);
    }

    #[test]
    fn kamikaze_single_guess() {
        let sig = sig_with_f(4);
        let cfg = MachineConfig::new().with_signature(sig.clone());
        let oracle = nullity_oracle(&sig, "f").unwrap();
        let t0 = parse_term("\\u. u #4 (\\z.z)").unwrap();
        let rep = extract_kamikaze(&t0, &sigma01_refuter(), None, &cfg, &Stack::bottom()).unwrap();
        assert_eq!(rep.guesses, vec![n(4)]);
        assert_eq!(rep.witness, Some(n(4)));
        let rep = extract_kamikaze(
            &t0,
            &sigma01_refuter(),
            Some(&oracle),
            &cfg,
            &Stack::bottom(),
        )
        .unwrap();
        assert_eq!(
            (rep.outcome.halt, rep.verified),
            (Halt::Interrupted, Some(true))
        );
        let diverge = parse_term("\\u. (\\x. x x) (\\x. x x)").unwrap();
        let rep = extract_kamikaze(
            &diverge,
            &sigma01_refuter(),
            None,
            &cfg.clone().with_fuel(100),
            &Stack::bottom(),
        )
        .unwrap();
        assert_eq!((rep.witness, rep.outcome.halt), (None, Halt::FuelExhausted));
    }

    #[test]
    fn independence() {
        let cfg = MachineConfig::new();
        let t0 = parse_term("\\u. u #3 (\\z.z)").unwrap();
        let stacks = [
            Stack::bottom().push(parse_term("\\x.x").unwrap()),
            Stack::from_terms(
                [Term::num(9u32), parse_term("\\x.x").unwrap()],
                Stack::bottom(),
            ),
        ];
        let rep = check_independence(&t0, &stacks, &cfg).unwrap();
        assert!(rep.independent);
        assert_eq!(rep.witnesses.len(), 3);
        let bad = Term::lam("u", Term::app(Term::kont(Stack::bottom()), Term::var("u")));
        assert_eq!(
            check_independence(&bad, &stacks, &cfg).unwrap_err(),
            ExtractError::NotProofLike
        );
    }
}
