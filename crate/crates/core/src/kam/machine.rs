use super::rule::{InstructionRule, SlotPattern};
use super::KamError;
use crate::arith::Signature;
use crate::syntax::{Kind, ParseEnv, Process, Stack, Term, BUILTIN_INSTRUCTIONS};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Instruction rules, arithmetic signature and run limits.
#[derive(Debug, Clone)]
pub struct MachineConfig {
    rules: BTreeMap<String, Arc<[InstructionRule]>>,
    signature: Arc<Signature>,
    pub fuel: u64,
    pub trace: bool,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig::new()
    }
}

impl MachineConfig {
    pub fn new() -> Self {
        MachineConfig {
            rules: BTreeMap::new(),
            signature: Arc::new(Signature::new()),
            fuel: DEFAULT_FUEL,
            trace: false,
        }
    }

    pub fn with_signature(mut self, sig: Signature) -> Self {
        self.signature = Arc::new(sig);
        self
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rules(&self, name: &str) -> Option<&[InstructionRule]> {
        self.rules.get(name).map(|r| &**r)
    }

    pub fn user_instructions(&self) -> impl Iterator<Item = &str> {
        self.rules.keys().map(String::as_str)
    }

    pub fn knows(&self, name: &str) -> bool {
        BUILTIN_INSTRUCTIONS.contains(&name) || self.rules.contains_key(name)
    }

    /// Parser environment resolving every known instruction name.
    pub fn parse_env(&self) -> ParseEnv {
        ParseEnv::default().with_instructions(self.rules.keys().cloned())
    }

    pub fn register_instruction(
        self,
        name: &str,
        rules: Vec<InstructionRule>,
    ) -> Result<Self, KamError> {
        self.register_batch(vec![(name.to_string(), rules)])
    }

    /// Registers several instructions at once; their bodies may refer to
    /// each other.
    pub fn register_batch(
        mut self,
        batch: Vec<(String, Vec<InstructionRule>)>,
    ) -> Result<Self, KamError> {
        let incoming: BTreeSet<&str> = batch.iter().map(|(n, _)| n.as_str()).collect();
        if incoming.len() != batch.len() {
            let mut seen = BTreeSet::new();
            let dup = batch
                .iter()
                .find(|(n, _)| !seen.insert(n))
                .map(|(n, _)| n.clone())
                .unwrap_or_default();
            return Err(KamError::DuplicateInstruction(dup));
        }
        for (name, rules) in &batch {
            if BUILTIN_INSTRUCTIONS.contains(&name.as_str()) {
                return Err(KamError::ReservedName(name.clone()));
            }
            if self.rules.contains_key(name) {
                return Err(KamError::DuplicateInstruction(name.clone()));
            }
            if rules.is_empty() {
                return Err(KamError::NoRules(name.clone()));
            }
            for (i, rule) in rules.iter().enumerate() {
                if rule.head != *name {
                    return Err(KamError::Malformed(
                        name.clone(),
                        format!("rule {} is for `{}`", i + 1, rule.head),
                    ));
                }
                self.check_rule(rule, &incoming)?;
                if let Some(j) = rules[..i].iter().position(|r| r.shadows(rule)) {
                    return Err(KamError::UnreachableRule {
                        name: name.clone(),
                        rule: i + 1,
                        shadowed_by: j + 1,
                    });
                }
            }
        }
        for (name, rules) in batch {
            self.rules.insert(name, rules.into());
        }
        Ok(self)
    }

    fn check_rule(
        &self,
        rule: &InstructionRule,
        incoming: &BTreeSet<&str>,
    ) -> Result<(), KamError> {
        let name = &rule.head;
        let bad = |msg: String| KamError::Malformed(name.clone(), msg);
        let mut binders = BTreeSet::new();
        for p in &rule.patterns {
            if let Some(x) = p.binder() {
                if !binders.insert(x.to_string()) {
                    return Err(bad(format!("pattern variable `{x}` is bound twice")));
                }
            }
        }
        let numerals = rule.numeral_vars();
        for g in &rule.guards {
            for e in [&g.lhs, &g.rhs] {
                self.signature.check_expr(e)?;
                if let Some(x) = e.vars().into_iter().find(|x| !numerals.contains(x)) {
                    return Err(bad(format!(
                        "guard variable `{x}` is not a numeral pattern"
                    )));
                }
            }
        }
        let mut allowed = binders;
        for (hole, e) in &rule.rhs.computed {
            self.signature.check_expr(e)?;
            if let Some(x) = e.vars().into_iter().find(|x| !numerals.contains(x)) {
                return Err(bad(format!(
                    "`#[...]` uses `{x}`, which is not a numeral pattern"
                )));
            }
            allowed.insert(hole.clone());
        }
        for t in std::iter::once(&rule.rhs.head).chain(&rule.rhs.pushed) {
            if let Some(x) = t.free_vars().into_iter().find(|x| !allowed.contains(x)) {
                return Err(bad(format!("right-hand side mentions unbound `{x}`")));
            }
            if let Some(i) = t
                .instructions()
                .into_iter()
                .find(|i| !self.knows(i) && !incoming.contains(i.as_str()))
            {
                return Err(KamError::UnknownInstruction(i));
            }
        }
        Ok(())
    }
}

/// Name of a fired rule, also its key in the statistics table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleName {
    Push,
    Grab,
    CallCc,
    Resume,
    Succ,
    Rec,
    Print,
    User(String),
}

impl RuleName {
    pub fn key(&self) -> &str {
        match self {
            RuleName::Push => "Push",
            RuleName::Grab => "Grab",
            RuleName::CallCc => "callcc",
            RuleName::Resume => "Resume",
            RuleName::Succ => "s",
            RuleName::Rec => "rec",
            RuleName::Print => "print",
            RuleName::User(n) => n,
        }
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    FinalStop(BigUint),
    Stuck,
    FuelExhausted,
    /// The print observer asked the run to end.
    Interrupted,
}

impl fmt::Display for Halt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Halt::FinalStop(n) => write!(f, "final stop #{n}"),
            Halt::Stuck => f.write_str("stuck"),
            Halt::FuelExhausted => f.write_str("fuel exhausted"),
            Halt::Interrupted => f.write_str("interrupted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Next {
        next: Process,
        rule: RuleName,
        printed: Option<BigUint>,
    },
    Halt(Halt),
}

/// One machine transition.
pub fn step(p: &Process, cfg: &MachineConfig) -> Step {
    let stuck = Step::Halt(Halt::Stuck);
    let next = |head: Term, stack: Stack, rule: RuleName| Step::Next {
        next: Process::new(head, stack),
        rule,
        printed: None,
    };
    let pi = &p.stack;
    match p.head.kind() {
        Kind::App(t, u) => next(t.clone(), pi.push(u.clone()), RuleName::Push),
        Kind::Lam(_, body) => match pi.pop() {
            Some((u, rest)) => next(body.open(u), rest.clone(), RuleName::Grab),
            None => stuck,
        },
        Kind::Kont(saved) => match pi.top() {
            Some(t) => next(t.clone(), saved.clone(), RuleName::Resume),
            None => stuck,
        },
        Kind::Inst(name) => match &**name {
            "cc" => match pi.pop() {
                Some((t, rest)) => next(
                    t.clone(),
                    rest.push(Term::kont(rest.clone())),
                    RuleName::CallCc,
                ),
                None => stuck,
            },
            "s" => match pi.take(2) {
                Some((items, rest)) => match items[0].as_numeral() {
                    Some(n) => next(
                        items[1].clone(),
                        rest.push(Term::num(n + 1u32)),
                        RuleName::Succ,
                    ),
                    None => stuck,
                },
                None => stuck,
            },
            "rec" => match pi.take(3) {
                Some((items, rest)) => match items[2].as_numeral() {
                    Some(n) if n.is_zero() => next(items[0].clone(), rest.clone(), RuleName::Rec),
                    Some(n) => {
                        let m = Term::num(n - BigUint::one());
                        let again = Term::apps(
                            Term::inst("rec"),
                            [items[0].clone(), items[1].clone(), m.clone()],
                        );
                        next(items[1].clone(), rest.push(again).push(m), RuleName::Rec)
                    }
                    None => stuck,
                },
                None => stuck,
            },
            "print" => match pi.take(2) {
                Some((items, rest)) => match items[0].as_numeral() {
                    Some(n) => Step::Next {
                        next: Process::new(items[1].clone(), rest.clone()),
                        rule: RuleName::Print,
                        printed: Some(n.clone()),
                    },
                    None => stuck,
                },
                None => stuck,
            },
            "stop" => match pi.top().and_then(Term::as_numeral) {
                Some(n) => Step::Halt(Halt::FinalStop(n.clone())),
                None => stuck,
            },
            user => match cfg.rules.get(user) {
                Some(rules) => fire_user(user, rules, pi, cfg.signature()).unwrap_or(stuck),
                None => stuck,
            },
        },
        Kind::Var(_) | Kind::Bound(_) | Kind::Numeral(_) => stuck,
    }
}

fn fire_user(name: &str, rules: &[InstructionRule], pi: &Stack, sig: &Signature) -> Option<Step> {
    for rule in rules {
        let Some((items, rest)) = pi.take(rule.patterns.len()) else {
            continue;
        };
        if let Some(map) = rule.matches(&items, sig) {
            let head = rule.rhs.head.substitute_many(&map);
            let pushed = rule.rhs.pushed.iter().map(|t| t.substitute_many(&map));
            let stack = Stack::from_terms(pushed, rest.clone());
            return Some(Step::Next {
                next: Process::new(head, stack),
                rule: RuleName::User(name.to_string()),
                printed: None,
            });
        }
    }
    None
}

/// Per-rule firing counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats(BTreeMap<String, u64>);

impl Stats {
    pub fn get(&self, key: &str) -> u64 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn bump(&mut self, key: &str) {
        *self.0.entry(key.to_string()).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Rows sorted by count, largest first, ties by name.
    pub fn rows(&self) -> Vec<(&str, u64)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        rows
    }

    /// `other - self` for every key present in either.
    pub fn delta(&self, other: &Stats) -> BTreeMap<String, i64> {
        let keys: BTreeSet<&String> = self.0.keys().chain(other.0.keys()).collect();
        keys.into_iter()
            .map(|k| (k.clone(), other.get(k) as i64 - self.get(k) as i64))
            .collect()
    }
}

impl<'a> FromIterator<(&'a str, u64)> for Stats {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        Stats(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_process: Process,
    pub halt: Halt,
    pub steps: u64,
    pub stats: Stats,
    pub printed: Vec<BigUint>,
    pub trace: Vec<String>,
}

impl RunOutcome {
    pub fn stop_value(&self) -> Option<&BigUint> {
        match &self.halt {
            Halt::FinalStop(n) => Some(n),
            _ => None,
        }
    }
}

/// Verdict of a print observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Interrupt,
}

pub fn run(p: &Process, cfg: &MachineConfig) -> RunOutcome {
    run_observed(p, cfg, &mut |_| Control::Continue)
}

/// Runs the machine, reporting every printed numeral to `sink`.
pub fn run_observed(
    p: &Process,
    cfg: &MachineConfig,
    sink: &mut dyn FnMut(&BigUint) -> Control,
) -> RunOutcome {
    let mut current = p.clone();
    let mut steps = 0u64;
    let mut stats = Stats::default();
    let mut printed = Vec::new();
    let mut trace = Vec::new();
    let halt = loop {
        match step(&current, cfg) {
            Step::Halt(h) => {
                if matches!(h, Halt::FinalStop(_)) {
                    stats.bump("stop");
                }
                break h;
            }
            Step::Next { .. } if steps >= cfg.fuel => break Halt::FuelExhausted,
            Step::Next {
                next,
                rule,
                printed: out,
            } => {
                steps += 1;
                stats.bump(rule.key());
                if cfg.trace {
                    trace.push(format!("step {steps}: {rule} | {current}"));
                }
                current = next;
                if let Some(n) = out {
                    let verdict = sink(&n);
                    printed.push(n);
                    if verdict == Control::Interrupt {
                        break Halt::Interrupted;
                    }
                }
            }
        }
    };
    RunOutcome {
        final_process: current,
        halt,
        steps,
        stats,
        printed,
        trace,
    }
}

/// Builds a rule's slot list from `#n`-style and plain binders.
pub fn slots<I, S>(items: I) -> Vec<SlotPattern>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    items
        .into_iter()
        .map(|s| {
            let s = s.as_ref();
            match s.strip_prefix('#') {
                Some(rest) => match rest.parse::<BigUint>() {
                    Ok(n) => SlotPattern::Literal(n),
                    Err(_) => SlotPattern::Numeral(rest.to_string()),
                },
                None => SlotPattern::Term(s.to_string()),
            }
        })
        .collect()
}
