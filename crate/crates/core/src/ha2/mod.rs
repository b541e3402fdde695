//! Second-order arithmetic terms: constants for pairing, numerals and
//! recursion, weak and inner reduction, and a bounded equality check.

mod reduce;
mod simulate;
mod term;

pub use reduce::{
    contract_at, contract_root, enumerate_inner_redexes, enumerate_weak_redexes, inner_equal,
    inner_reducts, is_weak_normal, subterm, weak_reduce, weak_reduce_to_pair, weak_reducts,
    weak_step, Dir, EqResult, Path, DEFAULT_EQ_FUEL,
};
pub use simulate::{
    simulate_one_step, simulate_run, RunReport, SimError, SimVerdict, StepReport, SIM_STEP_CAP,
};
pub use term::{parse_hterm, parse_hterm_at, HConst, HTerm, HView};

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Ha2Error {
    #[error("no pair reached after {0} weak steps")]
    NoPair(u64),
    #[error("term {0} has no weak head normal form within the step limit")]
    OutOfFuel(String),
    #[error("first component {0} is not a numeral")]
    NotNumeral(String),
}

/// Reduces `t` until it becomes `⟨v;u⟩` and reads `v` as `sⁿ0`; returns
/// the number together with `u`.
pub fn read_witness(t: &HTerm, fuel: u64) -> Result<(BigUint, HTerm), Ha2Error> {
    let (r, steps) = weak_reduce_to_pair(t, fuel);
    let Some((v, _)) = r.as_pair() else {
        return Err(if steps >= fuel {
            Ha2Error::OutOfFuel(r.to_string())
        } else {
            Ha2Error::NoPair(steps)
        });
    };
    let (v, _) = weak_reduce(v, fuel.saturating_sub(steps));
    let n = v
        .as_numeral()
        .ok_or_else(|| Ha2Error::NotNumeral(v.to_string()))?;
    Ok((
        n,
        r.as_pair()
            .map(|(_, u)| u.clone())
            .expect("pair checked above"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> HTerm {
        parse_hterm(s).unwrap()
    }

    fn lo_all(t: &HTerm, fuel: u64) -> (HTerm, u64) {
        let mut t = t.clone();
        let mut n = 0;
        while n < fuel {
            match weak_step(&t) {
                Some((r, _)) => {
                    t = r;
                    n += 1;
                }
                None => break,
            }
        }
        (t, n)
    }

    #[test]
    fn snd_of_pair() {
        let t = h("snd <a; (\\x.x) b>");
        let (r, n) = weak_reduce(&t, 100);
        assert_eq!((r, n), (h("b"), 2));
        assert_eq!(lo_all(&t, 100), (h("b"), 2));
    }

    #[test]
    fn rec_unfolds() {
        let t = h("rec u0 u1 (sc z0)");
        let (r, path) = weak_step(&t).unwrap();
        assert!(path.is_empty());
        assert_eq!(r, h("u1 z0 (rec u0 u1 z0)"));
        assert_eq!(weak_reduce(&t, 10).0, h("u1 z0 u0"));
    }

    #[test]
    fn weak_stops_at_lambda() {
        let t = h("\\x.((\\y.y) x)");
        assert!(is_weak_normal(&t));
        assert_eq!(enumerate_inner_redexes(&t).len(), 1);
        assert_eq!(inner_reducts(&t), vec![h("\\x.x")]);
        assert_eq!(
            inner_equal(&t, &h("\\x.x"), DEFAULT_EQ_FUEL),
            EqResult::Equal
        );
        assert_eq!(
            inner_equal(&h("(\\y.y) a"), &h("a"), DEFAULT_EQ_FUEL),
            EqResult::NotEqual
        );
    }

    #[test]
    fn numerals_parse() {
        assert_eq!(h("3"), h("sc (sc (sc z0))"));
        assert_eq!(h("3").as_numeral(), Some(BigUint::from(3u32)));
    }

    #[test]
    fn fast_reduction_matches_stepping() {
        for s in [
            "rec z0 (\\p r. sc (sc r)) (fst <sc (sc z0); a>)",
            "(\\f. f (f z0)) (\\x. rec (sc x) (\\p r. r) x)",
            "fst (snd <a; <(\\x.x) z0; b>>) ((\\y.y) c)",
            "x ((\\y.y) z0) (rec a b ((\\z. sc z) z0))",
        ] {
            let t = h(s);
            for fuel in 0..12 {
                assert_eq!(weak_reduce(&t, fuel), lo_all(&t, fuel), "{s} fuel {fuel}");
            }
        }
    }

    #[test]
    fn convertibility_under_binders() {
        let theta = "((\\y z. z (y y z)) (\\y z. z (y y z)))";
        let a = h(&format!("\\g. {theta} g"));
        let b = h(&format!("\\g. g ({theta} g)"));
        assert_eq!(inner_equal(&a, &b, DEFAULT_EQ_FUEL), EqResult::Equal);
        let c = h("\\x. rec z0 (\\p r. sc r) (sc (sc z0))");
        assert_eq!(
            inner_equal(&c, &h("\\x. 2"), DEFAULT_EQ_FUEL),
            EqResult::Equal
        );
        assert_eq!(
            inner_equal(&c, &h("\\x. 3"), DEFAULT_EQ_FUEL),
            EqResult::NotEqual
        );
        let omega = h("\\x. (\\y. y y) (\\y. y y)");
        assert_eq!(inner_equal(&omega, &h("\\x. x"), 50), EqResult::Unknown);
    }

    fn sim(text: &str) -> StepReport {
        let p = crate::syntax::parse_process(text).unwrap();
        simulate_one_step(&p, &crate::kam::MachineConfig::new()).unwrap()
    }

    #[test]
    fn one_step_simulation_per_rule() {
        let cases = [
            ("(\\x.x) u * $", "Push", SimVerdict::Syntactic),
            ("\\x.x * u . $", "Grab", SimVerdict::Syntactic),
            ("cc * t . $", "callcc", SimVerdict::Syntactic),
            ("s * #2 . u . $", "s", SimVerdict::Syntactic),
            ("rec * u0 . u1 . #0 . $", "rec", SimVerdict::Syntactic),
            ("rec * u0 . u1 . #3 . $", "rec", SimVerdict::Inner),
            (
                "rec * (\\a.a) . (\\n r. r) . #2 . w . $",
                "rec",
                SimVerdict::Inner,
            ),
        ];
        for (text, rule, verdict) in cases {
            let r = sim(text);
            assert_eq!((r.rule.as_str(), r.verdict), (rule, verdict), "{text}");
            assert!(r.weak_steps >= 1);
        }
        use crate::syntax::{Stack, Term};
        let k = Term::kont(Stack::bottom().push(Term::var("a")));
        let p = crate::syntax::Process::new(
            k,
            Stack::from_terms([Term::var("t"), Term::var("b")], Stack::bottom()),
        );
        let r = simulate_one_step(&p, &crate::kam::MachineConfig::new()).unwrap();
        assert_eq!(
            (r.rule.as_str(), r.verdict),
            ("Resume", SimVerdict::Syntactic)
        );
    }

    #[test]
    fn simulation_needs_a_step() {
        let p = crate::syntax::parse_process("x * $").unwrap();
        assert!(matches!(
            simulate_one_step(&p, &crate::kam::MachineConfig::new()),
            Err(SimError::NoStep(_))
        ));
        let r = simulate_run(&p, &crate::kam::MachineConfig::new(), 10).unwrap();
        assert!(r.steps.is_empty() && r.verified());
    }

    #[test]
    fn full_run_is_simulated() {
        let p =
            crate::syntax::parse_process("cc (\\k. rec (stop #1) (\\a b. k (s a stop)) #3) * $")
                .unwrap();
        let r = simulate_run(&p, &crate::kam::MachineConfig::new(), 100).unwrap();
        assert!(
            r.verified(),
            "{:?}",
            r.steps
                .iter()
                .map(|s| (&s.rule, s.verdict))
                .collect::<Vec<_>>()
        );
        assert!(r.count(SimVerdict::Inner) >= 1);
    }

    #[test]
    fn witness_reading() {
        assert_eq!(
            read_witness(&h("(\\x. <sc x; z0>) (sc z0)"), 100),
            Ok((BigUint::from(2u32), h("z0")))
        );
        assert_eq!(
            read_witness(&h("<(\\x.x) 3; w>"), 100),
            Ok((BigUint::from(3u32), h("w")))
        );
        assert_eq!(
            read_witness(&h("(\\x.x) <sc z0; w>"), 100),
            Ok((BigUint::from(1u32), h("w")))
        );
        assert!(matches!(
            read_witness(&h("<a; b>"), 100),
            Err(Ha2Error::NotNumeral(_))
        ));
        assert!(matches!(
            read_witness(&h("a b"), 100),
            Err(Ha2Error::NoPair(0))
        ));
    }
}
