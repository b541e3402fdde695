use super::reduce::{
    contract_at, inner_equal, subterm, weak_step, Dir, EqResult, Path, DEFAULT_EQ_FUEL,
};
use super::term::{HConst, HKind, HTerm};
use crate::kam::{step, MachineConfig, Step};
use crate::negtrans::{cps_process, cps_stack, cps_term, NegError};
use crate::syntax::Process;
use std::fmt;
use thiserror::Error;

/// Weak steps allowed before a one-step check gives up.
pub const SIM_STEP_CAP: u64 = 500;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("the machine does not step from {0}")]
    NoStep(String),
    #[error("user instruction {0} must be inlined before simulation")]
    UserInstruction(String),
    #[error(transparent)]
    Translation(#[from] NegError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimVerdict {
    /// Reached `t₂* π₂*` exactly.
    Syntactic,
    /// Reached `t₂* u` with `u =ᵢ π₂*`.
    Inner,
    /// Reached `t₂* u` but `u =ᵢ π₂*` was not decided.
    Inconclusive,
    /// No matching reduct within the step cap.
    Failed,
}

impl fmt::Display for SimVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimVerdict::Syntactic => "syntactic",
            SimVerdict::Inner => "inner",
            SimVerdict::Inconclusive => "inconclusive",
            SimVerdict::Failed => "FAILED",
        })
    }
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub rule: String,
    pub weak_steps: u64,
    pub verdict: SimVerdict,
    pub next: Process,
}

/// Projection redexes `fst ⟨a;b⟩`/`snd ⟨a;b⟩` outside λ, outermost first.
fn projection_redex(t: &HTerm) -> Option<Path> {
    fn go(t: &HTerm, path: &mut Path) -> bool {
        if let Some((f, a)) = t.as_app() {
            if matches!(f.as_const(), Some(HConst::Fst | HConst::Snd)) && a.as_pair().is_some() {
                return true;
            }
            for (d, sub) in [(Dir::Fun, f), (Dir::Arg, a)] {
                path.push(d);
                if go(sub, path) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    let mut path = Vec::new();
    go(t, &mut path).then_some(path)
}

/// One weak step, contracting pending projections before anything else.
fn sim_step(t: &HTerm) -> Option<HTerm> {
    match projection_redex(t) {
        Some(p) => {
            debug_assert!(subterm(t, &p).is_some());
            contract_at(t, &p)
        }
        None => weak_step(t).map(|(r, _)| r),
    }
}

fn check_closed_world(p: &Process, cfg: &MachineConfig) -> Result<(), SimError> {
    let mut names = p.head.instructions();
    for t in p.stack.iter() {
        names.extend(t.instructions());
    }
    match names.into_iter().find(|n| cfg.rules(n).is_some()) {
        Some(n) => Err(SimError::UserInstruction(n)),
        None => Ok(()),
    }
}

/// Checks that `p ≻ p₂` is mirrored by `p* ≻w⁺ t₂* u` with `u =ᵢ π₂*`.
pub fn simulate_one_step(p: &Process, cfg: &MachineConfig) -> Result<StepReport, SimError> {
    check_closed_world(p, cfg)?;
    let Step::Next { next, rule, .. } = step(p, cfg) else {
        return Err(SimError::NoStep(p.to_string()));
    };
    let rule = rule.key().to_string();
    let head = cps_term(&next.head)?;
    let stack = cps_stack(&next.stack)?;
    let mut t = cps_process(p)?;
    let mut verdict = SimVerdict::Failed;
    let mut found_at = 0;
    for n in 1..=SIM_STEP_CAP {
        let Some(r) = sim_step(&t) else { break };
        t = r;
        let HKind::App(h, u) = t.kind() else { continue };
        if *h != head {
            continue;
        }
        if *u == stack {
            return Ok(StepReport {
                rule,
                weak_steps: n,
                verdict: SimVerdict::Syntactic,
                next,
            });
        }
        match inner_equal(u, &stack, DEFAULT_EQ_FUEL) {
            EqResult::Equal => {
                return Ok(StepReport {
                    rule,
                    weak_steps: n,
                    verdict: SimVerdict::Inner,
                    next,
                })
            }
            EqResult::Unknown if verdict == SimVerdict::Failed => {
                verdict = SimVerdict::Inconclusive;
                found_at = n;
            }
            _ => {}
        }
    }
    Ok(StepReport {
        rule,
        weak_steps: found_at,
        verdict,
        next,
    })
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub steps: Vec<StepReport>,
    pub final_process: Process,
}

impl RunReport {
    pub fn verified(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s.verdict, SimVerdict::Syntactic | SimVerdict::Inner))
    }

    pub fn count(&self, v: SimVerdict) -> usize {
        self.steps.iter().filter(|s| s.verdict == v).count()
    }
}

/// Chains one-step checks along the machine run from `p`, for at most
/// `fuel` machine steps.
pub fn simulate_run(p: &Process, cfg: &MachineConfig, fuel: u64) -> Result<RunReport, SimError> {
    let mut cur = p.clone();
    let mut steps = Vec::new();
    for _ in 0..fuel {
        if !matches!(step(&cur, cfg), Step::Next { .. }) {
            break;
        }
        let report = simulate_one_step(&cur, cfg)?;
        cur = report.next.clone();
        steps.push(report);
    }
    Ok(RunReport {
        steps,
        final_process: cur,
    })
}
