use super::encodings::{identity, pair, turing_fixpoint};
use super::primrec::compile_primrec;
use crate::arith::Signature;
use crate::kam::{parse_rule, InstructionRule, KamError, MachineConfig};
use crate::syntax::{parse_term_with, ParseEnv, Term};
use std::collections::HashMap;

/// `λn m u v. minuš n m (λd. rec u (λ_ _. v) d)`.
pub fn test_le_term() -> Term {
    let minus = compile_primrec(&Signature::new(), "minus").expect("minus is built in");
    let body = parse_term_with(
        "\\n m u v. minus n m (\\d. rec u (\\a b. v) d)",
        &ParseEnv::default(),
    )
    .unwrap();
    let map = HashMap::from([("minus".to_string(), minus)]);
    body.substitute_many(&map)
}

/// The guarded instruction rules `n ≤ m → u`, otherwise `v`.
pub fn test_le_rules() -> Vec<InstructionRule> {
    let env = ParseEnv::default();
    vec![
        parse_rule("test_le #n #m u v if n <= m => u", &env).unwrap(),
        parse_rule("test_le #n #m u v => v", &env).unwrap(),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Build {
    /// Closed terms through Θ.
    Fixpoint,
    /// Named instructions `min_aux`/`min_snd`/`min_princ`.
    Instructions,
}

#[derive(Debug, Clone)]
pub struct MinPrinciple {
    pub min_aux: Term,
    pub min_princ: Term,
    pub config: MachineConfig,
}

const MIN_AUX_BODY: &str =
    "\\r f k n m. pair n (\\n'. f n' (\\m'. test_le m m' I (k (r f k n' m'))))";
const MIN_PRINC_BODY: &str = "\\f. f #0 (\\m. cc (\\k. min_aux f k #0 m))";

const INSTRUCTION_RULES: [&str; 5] = [
    "I x => x",
    "pair x y z => z x y",
    "min_aux f k n m => pair n (min_snd f k m)",
    "min_snd f k m n' => f n' (\\m'. test_le m m' I (k (min_aux f k n' m')))",
    "min_princ f => f #0 (\\m. cc (\\k. min_aux f k #0 m))",
];

/// Realizers of the minimum principle over `base`.
///
/// The instruction build registers `I`, `pair`, `test_le`, `min_aux`,
/// `min_snd` and `min_princ` unless `base` already has them.
pub fn min_principle_realizers(
    build: Build,
    base: MachineConfig,
) -> Result<MinPrinciple, KamError> {
    match build {
        Build::Fixpoint => {
            let env = ParseEnv::default();
            let names = HashMap::from([
                ("pair".to_string(), pair()),
                ("I".to_string(), identity()),
                ("test_le".to_string(), test_le_term()),
            ]);
            let f = parse_term_with(MIN_AUX_BODY, &env)
                .unwrap()
                .substitute_many(&names);
            let min_aux = Term::app(turing_fixpoint(), f);
            let princ = parse_term_with(MIN_PRINC_BODY, &env).unwrap();
            let min_princ = princ.substitute("min_aux", &min_aux);
            Ok(MinPrinciple {
                min_aux,
                min_princ,
                config: base,
            })
        }
        Build::Instructions => {
            let names = ["I", "pair", "test_le", "min_aux", "min_snd", "min_princ"];
            let env = base.parse_env().with_instructions(names);
            let mut batch: Vec<(String, Vec<InstructionRule>)> = Vec::new();
            if !base.knows("test_le") {
                batch.push(("test_le".into(), test_le_rules()));
            }
            for text in INSTRUCTION_RULES {
                let rule = parse_rule(text, &env).expect("library rule parses");
                if !base.knows(&rule.head) {
                    batch.push((rule.head.clone(), vec![rule]));
                }
            }
            let config = base.register_batch(batch)?;
            Ok(MinPrinciple {
                min_aux: Term::inst("min_aux"),
                min_princ: Term::inst("min_princ"),
                config,
            })
        }
    }
}

/// Script text of the minimum-principle demo with `f(x) = |x - c|` and
/// `g(x) = 2x + 1`.
pub fn demo_script(c: u64, build: Build) -> String {
    let mut s = format!(
        "-- minimum principle demo: f(x) = |x - {c}|, g(x) = 2x + 1\n\
         Prim dist(x) = minus(x, {c}) + minus({c}, x);\n\
         Prim next(x) = s(x + x);\n\
         Prim goal(x) = minus(dist(x), dist(next(x)));\n\
         \n\
         Define I x => x;\n\
         Define pair x y z => z x y;\n\
         Define f #n k => k #[dist(n)];\n\
         Define g #n k => k #[next(n)];\n\
         Define test_le #n #m u v if n <= m => u;\n\
         Define test_le #n #m u v => v;\n"
    );
    match build {
        Build::Instructions => s.push_str(
            "Define min_aux f k n m => pair n (min_snd f k m);\n\
             Define min_snd f k m n' => f n' (\\m'. test_le m m' I (k (min_aux f k n' m')));\n\
             Define min_princ f => f #0 (\\m. cc (\\k. min_aux f k #0 m));\n",
        ),
        Build::Fixpoint => s.push_str(
            "Define min_aux = (\\y z. z (y y z)) (\\y z. z (y y z))\n  \
             (\\r f k n m. pair n (\\n'. f n' (\\m'. test_le m m' I (k (r f k n' m')))));\n\
             Define min_princ = \\f. f #0 (\\m. cc (\\k. min_aux f k #0 m));\n",
        ),
    }
    s.push_str(
        "Define realizer = min_princ f (\\n h. pair n (g n h));\n\
         \n\
         Eval realizer * (\\x y. print x y (stop x)) . $;\n\
         Extract sigma01 realizer for goal;\n",
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kam::{run, Halt};
    use crate::syntax::{parse_process_with, Process, Stack};

    fn outcome(cfg: &MachineConfig, head: Term, stack: &[Term]) -> Process {
        let p = Process::new(
            head,
            Stack::from_terms(stack.iter().cloned(), Stack::bottom()),
        );
        let out = run(&p, cfg);
        assert_eq!(out.halt, Halt::Stuck);
        out.final_process
    }

    #[test]
    fn test_le_term_agrees_with_rules() {
        let cfg = MachineConfig::new()
            .register_instruction("test_le", test_le_rules())
            .unwrap();
        let t = test_le_term();
        assert!(t.is_closed());
        for n in 0..=20u32 {
            for m in 0..=20u32 {
                let args = [Term::num(n), Term::num(m), Term::var("u"), Term::var("v")];
                let want = if n <= m { "u * $" } else { "v * $" };
                let want = parse_process_with(want, &cfg.parse_env()).unwrap();
                assert_eq!(outcome(&cfg, t.clone(), &args), want);
                assert_eq!(outcome(&cfg, Term::inst("test_le"), &args), want);
            }
        }
    }

    #[test]
    fn both_builds_are_closed() {
        let a = min_principle_realizers(Build::Fixpoint, MachineConfig::new()).unwrap();
        assert!(a.min_princ.is_closed() && a.min_princ.is_proof_like());
        let b = min_principle_realizers(Build::Instructions, MachineConfig::new()).unwrap();
        assert!(b.config.knows("min_snd"));
    }
}
