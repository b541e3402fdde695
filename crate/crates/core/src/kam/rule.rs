use crate::arith::{ArithExpr, Signature, Valuation};
use crate::syntax::Term;
use num_bigint::BigUint;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// What a rule expects in one stack slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotPattern {
    /// Any closed term, bound to the name.
    Term(String),
    /// A primitive numeral, bound to the name.
    Numeral(String),
    /// Exactly this numeral.
    Literal(BigUint),
}

impl SlotPattern {
    pub fn binder(&self) -> Option<&str> {
        match self {
            SlotPattern::Term(x) | SlotPattern::Numeral(x) => Some(x),
            SlotPattern::Literal(_) => None,
        }
    }

    fn subsumes(&self, other: &SlotPattern) -> bool {
        match (self, other) {
            (SlotPattern::Term(_), _) => true,
            (SlotPattern::Numeral(_), SlotPattern::Numeral(_) | SlotPattern::Literal(_)) => true,
            (SlotPattern::Literal(a), SlotPattern::Literal(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

/// `lhs rel rhs` over numeral-bound variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub lhs: ArithExpr,
    pub rel: Relation,
    pub rhs: ArithExpr,
}

impl Guard {
    pub fn holds(&self, sig: &Signature, rho: &Valuation) -> Option<bool> {
        let a = sig.eval(&self.lhs, rho).ok()?;
        let b = sig.eval(&self.rhs, rho).ok()?;
        Some(match self.rel {
            Relation::Le => a <= b,
            Relation::Lt => a < b,
            Relation::Eq => a == b,
        })
    }
}

/// Right-hand side `head * pushed₁ . … . pushedₖ . <rest>`.
///
/// Pattern variables appear free in the terms; each `computed` entry is a
/// placeholder variable replaced by the numeral value of its expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub head: Term,
    pub pushed: Vec<Term>,
    pub computed: Vec<(String, ArithExpr)>,
}

impl Template {
    pub fn term(head: Term) -> Template {
        Template {
            head,
            pushed: Vec::new(),
            computed: Vec::new(),
        }
    }
}

/// A user rewrite rule `name ⋆ slot₁·…·slotₖ·π ≻ rhs` with an optional guard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionRule {
    pub head: String,
    pub patterns: Vec<SlotPattern>,
    pub guards: Vec<Guard>,
    pub rhs: Template,
}

impl InstructionRule {
    /// `Define name = t`: the instruction behaves like the closed term `t`.
    pub fn macro_rule(head: impl Into<String>, body: Term) -> Self {
        InstructionRule {
            head: head.into(),
            patterns: Vec::new(),
            guards: Vec::new(),
            rhs: Template::term(body),
        }
    }

    pub fn numeral_vars(&self) -> BTreeSet<String> {
        self.patterns
            .iter()
            .filter_map(|p| match p {
                SlotPattern::Numeral(x) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }

    pub(crate) fn shadows(&self, later: &InstructionRule) -> bool {
        self.guards.is_empty()
            && self.patterns.len() <= later.patterns.len()
            && self
                .patterns
                .iter()
                .zip(&later.patterns)
                .all(|(a, b)| a.subsumes(b))
    }

    /// Tries the rule on the stack items; returns the substitution map.
    pub(crate) fn matches(
        &self,
        items: &[&Term],
        sig: &Signature,
    ) -> Option<HashMap<String, Term>> {
        let mut map = HashMap::new();
        let mut rho = Valuation::new();
        for (p, t) in self.patterns.iter().zip(items) {
            match p {
                SlotPattern::Term(x) => {
                    map.insert(x.clone(), (*t).clone());
                }
                SlotPattern::Numeral(x) => {
                    let n = t.as_numeral()?;
                    rho.insert(x.clone(), n.clone());
                    map.insert(x.clone(), (*t).clone());
                }
                SlotPattern::Literal(n) => {
                    if t.as_numeral()? != n {
                        return None;
                    }
                }
            }
        }
        for g in &self.guards {
            if !g.holds(sig, &rho)? {
                return None;
            }
        }
        for (name, e) in &self.rhs.computed {
            map.insert(name.clone(), Term::num(sig.eval(e, &rho).ok()?));
        }
        Some(map)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        })
    }
}
