use super::NegError;
use crate::arith::{ArithExpr, Signature};
use crate::kam::{InstructionRule, MachineConfig, Relation, SlotPattern};
use crate::stdlib::{compile_expr, turing_fixpoint};
use crate::syntax::{fresh_name, Process, Stack, Term, TermView};
use std::collections::HashMap;

/// Rewrites every instruction occurrence through `f`; `None` keeps it.
pub(crate) fn map_instructions(
    t: &Term,
    f: &mut dyn FnMut(&str) -> Result<Option<Term>, NegError>,
) -> Result<Term, NegError> {
    Ok(match t.view() {
        TermView::Var(_) | TermView::Numeral(_) => t.clone(),
        TermView::Inst(name) => f(name)?.unwrap_or_else(|| t.clone()),
        TermView::Lam(x, body) => Term::lam(&x, map_instructions(&body, f)?),
        TermView::App(a, b) => Term::app(map_instructions(a, f)?, map_instructions(b, f)?),
        TermView::Kont(s) => Term::kont(map_stack(s, f)?),
    })
}

fn map_stack(
    s: &Stack,
    f: &mut dyn FnMut(&str) -> Result<Option<Term>, NegError>,
) -> Result<Stack, NegError> {
    let items: Vec<Term> = s
        .iter()
        .map(|t| map_instructions(t, f))
        .collect::<Result<_, _>>()?;
    Ok(Stack::from_terms(items, Stack::bottom()))
}

/// Replaces every user instruction by a closed λ-term with the same
/// behaviour on well-formed stacks; recursive definitions go through Θ.
pub struct Inliner<'c> {
    cfg: &'c MachineConfig,
    cache: HashMap<String, Term>,
}

impl<'c> Inliner<'c> {
    pub fn new(cfg: &'c MachineConfig) -> Self {
        Inliner {
            cfg,
            cache: HashMap::new(),
        }
    }

    pub fn term(&mut self, t: &Term) -> Result<Term, NegError> {
        self.term_in(t, &mut Vec::new())
    }

    pub fn stack(&mut self, s: &Stack) -> Result<Stack, NegError> {
        let items: Vec<Term> = s.iter().map(|t| self.term(t)).collect::<Result<_, _>>()?;
        Ok(Stack::from_terms(items, Stack::bottom()))
    }

    pub fn process(&mut self, p: &Process) -> Result<Process, NegError> {
        Ok(Process::new(self.term(&p.head)?, self.stack(&p.stack)?))
    }

    fn term_in(&mut self, t: &Term, open: &mut Vec<(String, String)>) -> Result<Term, NegError> {
        map_instructions(t, &mut |name| {
            if self.cfg.rules(name).is_none() {
                return Ok(None);
            }
            if let Some((_, v)) = open.iter().find(|(n, _)| n == name) {
                return Ok(Some(Term::var(v)));
            }
            if let Some(done) = self.cache.get(name) {
                return Ok(Some(done.clone()));
            }
            self.instruction(name, open).map(Some)
        })
    }

    fn instruction(
        &mut self,
        name: &str,
        open: &mut Vec<(String, String)>,
    ) -> Result<Term, NegError> {
        let rules = self.cfg.rules(name).expect("checked by caller").to_vec();
        let me = fresh_name(name);
        open.push((name.to_string(), me.clone()));
        let body = self.dispatch(name, &rules, open);
        open.pop();
        let body = body?;
        let t = if body.free_vars().contains(&me) {
            Term::app(turing_fixpoint(), Term::lam(&me, body))
        } else {
            body
        };
        if t.free_vars().is_empty() {
            self.cache.insert(name.to_string(), t.clone());
        }
        Ok(t)
    }

    fn dispatch(
        &mut self,
        name: &str,
        rules: &[InstructionRule],
        open: &mut Vec<(String, String)>,
    ) -> Result<Term, NegError> {
        let sig = self.cfg.signature().clone();
        let k = rules.iter().map(|r| r.patterns.len()).max().unwrap_or(0);
        let xs: Vec<String> = (0..k).map(|_| fresh_name("x")).collect();
        let mut fallback: Option<Term> = None;
        for rule in rules.iter().rev() {
            let (then, conds) = self.rule_term(rule, &xs, &sig, open)?;
            fallback = Some(match (conds.is_empty(), fallback) {
                (true, _) => then,
                (false, None) => return Err(NegError::NonExhaustive(name.to_string())),
                (false, Some(other)) => conds
                    .into_iter()
                    .rev()
                    .fold(then, |acc, c| zero_test(c, acc, other.clone())),
            });
        }
        let body = fallback.ok_or_else(|| NegError::NonExhaustive(name.to_string()))?;
        Ok(Term::lams(&xs, body))
    }

    /// The rule body over the slot variables `xs`, and its side conditions as
    /// terms `c` with `c ⋆ u·π ≻* u ⋆ d̂·π`, the condition holding iff `d = 0`.
    fn rule_term(
        &mut self,
        rule: &InstructionRule,
        xs: &[String],
        sig: &Signature,
        open: &mut Vec<(String, String)>,
    ) -> Result<(Term, Vec<Term>), NegError> {
        let mut rename: HashMap<String, Term> = HashMap::new();
        let mut numeric: Vec<(String, &String)> = Vec::new();
        let mut conds: Vec<ArithExpr> = Vec::new();
        for (p, x) in rule.patterns.iter().zip(xs) {
            match p {
                SlotPattern::Term(b) => {
                    rename.insert(b.clone(), Term::var(x));
                }
                SlotPattern::Numeral(b) => {
                    rename.insert(b.clone(), Term::var(x));
                    numeric.push((b.clone(), x));
                }
                SlotPattern::Literal(n) => {
                    let b = fresh_name("lit");
                    conds.push(distance(ArithExpr::var(&b), ArithExpr::num(n.clone())));
                    numeric.push((b, x));
                }
            }
        }
        for g in &rule.guards {
            conds.push(match g.rel {
                Relation::Le => ArithExpr::call2("minus", g.lhs.clone(), g.rhs.clone()),
                Relation::Lt => {
                    ArithExpr::call2("minus", ArithExpr::succ(g.lhs.clone()), g.rhs.clone())
                }
                Relation::Eq => distance(g.lhs.clone(), g.rhs.clone()),
            });
        }
        let params: Vec<String> = numeric.iter().map(|(b, _)| b.clone()).collect();
        let args: Vec<Term> = numeric.iter().map(|(_, x)| Term::var(x)).collect();
        let compiled = |e: &ArithExpr| -> Result<Term, NegError> {
            Ok(Term::apps(
                compile_expr(sig, &params, e)?,
                args.iter().cloned(),
            ))
        };
        let rest = xs[rule.patterns.len()..].iter().map(Term::var);
        let head = self.term_in(&rule.rhs.head, open)?;
        let pushed: Vec<Term> = rule
            .rhs
            .pushed
            .iter()
            .map(|t| self.term_in(t, open))
            .collect::<Result<_, _>>()?;
        let mut then = Term::apps(head, pushed.into_iter().chain(rest)).substitute_many(&rename);
        for (hole, e) in rule.rhs.computed.iter().rev() {
            then = Term::app(compiled(e)?, Term::lam(hole, then));
        }
        let conds = conds.iter().map(compiled).collect::<Result<_, _>>()?;
        Ok((then, conds))
    }
}

fn distance(a: ArithExpr, b: ArithExpr) -> ArithExpr {
    ArithExpr::call2(
        "+",
        ArithExpr::call2("minus", a.clone(), b.clone()),
        ArithExpr::call2("minus", b, a),
    )
}

/// `c (λd. rec yes (λ_ _. no) d)`.
fn zero_test(c: Term, yes: Term, no: Term) -> Term {
    let (d, a, b) = (fresh_name("d"), fresh_name("a"), fresh_name("b"));
    let branch = Term::lams(&[a, b], no);
    Term::app(
        c,
        Term::lam(
            &d,
            Term::apps(Term::inst("rec"), [yes, branch, Term::var(&d)]),
        ),
    )
}
