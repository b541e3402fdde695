use super::expr::{parse_expr_at, ArithExpr, Signature};
use super::ArithError;
use crate::lex::{Cursor, ParseError, Tok};
use crate::util::prime_until;
use std::collections::BTreeSet;
use std::fmt;

/// A formula of PA2⁺ (second-order arithmetic with the `{e} ⇒ B` form).
#[derive(Debug, Clone)]
pub enum Formula {
    Null(ArithExpr),
    Pred(String, Vec<ArithExpr>),
    Imp(Box<Formula>, Box<Formula>),
    Brace(ArithExpr, Box<Formula>),
    All1(String, Box<Formula>),
    All2(String, usize, Box<Formula>),
}

/// A second-order abstraction `λx₁…xₖ.B` substituted for a predicate variable.
#[derive(Debug, Clone)]
pub struct Abstraction<F> {
    pub params: Vec<String>,
    pub body: F,
}

impl Formula {
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn brace(e: ArithExpr, b: Formula) -> Formula {
        Formula::Brace(e, Box::new(b))
    }

    pub fn all1(x: impl Into<String>, a: Formula) -> Formula {
        Formula::All1(x.into(), Box::new(a))
    }

    pub fn all2(x: impl Into<String>, arity: usize, a: Formula) -> Formula {
        Formula::All2(x.into(), arity, Box::new(a))
    }

    pub fn pred(x: impl Into<String>, args: Vec<ArithExpr>) -> Formula {
        Formula::Pred(x.into(), args)
    }

    pub fn free_vars1(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.fv1(&mut Vec::new(), &mut out);
        out
    }

    fn fv1(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |e: &ArithExpr, bound: &Vec<String>| {
            out.extend(e.vars().into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::Null(e) => add(e, bound),
            Formula::Pred(_, es) => es.iter().for_each(|e| add(e, bound)),
            Formula::Brace(e, b) => {
                add(e, bound);
                b.fv1(bound, out);
            }
            Formula::Imp(a, b) => {
                a.fv1(bound, out);
                b.fv1(bound, out);
            }
            Formula::All1(x, a) => {
                bound.push(x.clone());
                a.fv1(bound, out);
                bound.pop();
            }
            Formula::All2(_, _, a) => a.fv1(bound, out),
        }
    }

    pub fn free_vars2(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.fv2(&mut Vec::new(), &mut out);
        out
    }

    fn fv2(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Pred(x, _) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Formula::Null(_) => {}
            Formula::Brace(_, b) | Formula::All1(_, b) => b.fv2(bound, out),
            Formula::Imp(a, b) => {
                a.fv2(bound, out);
                b.fv2(bound, out);
            }
            Formula::All2(x, _, a) => {
                bound.push(x.clone());
                a.fv2(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(f) = todo.pop() {
            match f {
                Formula::Null(e) => out.extend(e.vars()),
                Formula::Pred(x, es) => {
                    out.insert(x.clone());
                    es.iter().for_each(|e| out.extend(e.vars()));
                }
                Formula::Brace(e, b) => {
                    out.extend(e.vars());
                    todo.push(b);
                }
                Formula::Imp(a, b) => {
                    todo.push(a);
                    todo.push(b);
                }
                Formula::All1(x, a) | Formula::All2(x, _, a) => {
                    out.insert(x.clone());
                    todo.push(a);
                }
            }
        }
        out
    }

    /// Arity of the free occurrences of predicate variable `x`, if any.
    pub fn arity_of(&self, x: &str) -> Option<usize> {
        match self {
            Formula::Pred(y, es) if y == x => Some(es.len()),
            Formula::Pred(..) | Formula::Null(_) => None,
            Formula::Brace(_, b) | Formula::All1(_, b) => b.arity_of(x),
            Formula::Imp(a, b) => a.arity_of(x).or_else(|| b.arity_of(x)),
            Formula::All2(y, _, a) => {
                if y == x {
                    None
                } else {
                    a.arity_of(x)
                }
            }
        }
    }

    fn map_exprs(&self, f: &impl Fn(&ArithExpr) -> ArithExpr) -> Formula {
        match self {
            Formula::Null(e) => Formula::Null(f(e)),
            Formula::Pred(x, es) => Formula::Pred(x.clone(), es.iter().map(f).collect()),
            Formula::Brace(e, b) => Formula::brace(f(e), b.map_exprs(f)),
            Formula::Imp(a, b) => Formula::imp(a.map_exprs(f), b.map_exprs(f)),
            Formula::All1(x, a) => Formula::all1(x.clone(), a.map_exprs(f)),
            Formula::All2(x, k, a) => Formula::all2(x.clone(), *k, a.map_exprs(f)),
        }
    }

    /// Capture-avoiding `A{x:=e}`.
    pub fn subst1(&self, x: &str, e: &ArithExpr) -> Formula {
        let fv = e.vars();
        self.subst1_inner(x, e, &fv)
    }

    fn subst1_inner(&self, x: &str, e: &ArithExpr, fv: &BTreeSet<String>) -> Formula {
        match self {
            Formula::Null(d) => Formula::Null(d.subst(x, e)),
            Formula::Pred(p, es) => {
                Formula::Pred(p.clone(), es.iter().map(|d| d.subst(x, e)).collect())
            }
            Formula::Brace(d, b) => Formula::brace(d.subst(x, e), b.subst1_inner(x, e, fv)),
            Formula::Imp(a, b) => Formula::imp(a.subst1_inner(x, e, fv), b.subst1_inner(x, e, fv)),
            Formula::All2(p, k, a) => Formula::all2(p.clone(), *k, a.subst1_inner(x, e, fv)),
            Formula::All1(y, a) => {
                if y == x || !a.free_vars1().contains(x) {
                    return self.clone();
                }
                if fv.contains(y) {
                    let mut avoid = fv.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    let a2 = a.subst1(y, &ArithExpr::var(&y2));
                    Formula::all1(y2, a2.subst1_inner(x, e, fv))
                } else {
                    Formula::all1(y.clone(), a.subst1_inner(x, e, fv))
                }
            }
        }
    }

    /// Capture-avoiding `A{X:=λx⃗.B}`.
    pub fn subst2(&self, x: &str, b: &Abstraction<Formula>) -> Formula {
        let mut fv = b.body.free_vars1();
        for p in &b.params {
            fv.remove(p);
        }
        let fv2 = b.body.free_vars2();
        self.subst2_inner(x, b, &fv, &fv2)
    }

    fn subst2_inner(
        &self,
        x: &str,
        b: &Abstraction<Formula>,
        fv1: &BTreeSet<String>,
        fv2: &BTreeSet<String>,
    ) -> Formula {
        let go = |f: &Formula| f.subst2_inner(x, b, fv1, fv2);
        match self {
            Formula::Pred(p, es) if p == x => instantiate(b, es, |f, y, e| f.subst1(y, e)),
            Formula::Pred(..) | Formula::Null(_) => self.clone(),
            Formula::Brace(d, c) => Formula::brace(d.clone(), go(c)),
            Formula::Imp(a, c) => Formula::imp(go(a), go(c)),
            Formula::All1(y, a) => {
                if fv1.contains(y) && a.free_vars2().contains(x) {
                    let mut avoid = fv1.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    Formula::all1(y2.clone(), go(&a.subst1(y, &ArithExpr::var(&y2))))
                } else {
                    Formula::all1(y.clone(), go(a))
                }
            }
            Formula::All2(y, k, a) => {
                if y == x || !a.free_vars2().contains(x) {
                    self.clone()
                } else if fv2.contains(y) {
                    let mut avoid = fv2.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    let renamed = a.subst2(y, &Abstraction::pred_var(&y2, *k));
                    Formula::all2(y2, *k, go(&renamed))
                } else {
                    Formula::all2(y.clone(), *k, go(a))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_eq_pa2(self, other, &mut Vec::new(), &mut Vec::new())
    }

    pub fn normalize_exprs(&self, sig: &Signature) -> Formula {
        self.map_exprs(&|e| sig.normalize(e))
    }

    pub fn contains_brace(&self) -> bool {
        match self {
            Formula::Brace(..) => true,
            Formula::Null(_) | Formula::Pred(..) => false,
            Formula::Imp(a, b) => a.contains_brace() || b.contains_brace(),
            Formula::All1(_, a) | Formula::All2(_, _, a) => a.contains_brace(),
        }
    }
}

impl Abstraction<Formula> {
    pub fn pred_var(name: &str, arity: usize) -> Self {
        let params: Vec<String> = (0..arity).map(|i| format!("x%{i}")).collect();
        let args = params.iter().map(ArithExpr::var).collect();
        Abstraction {
            params,
            body: Formula::Pred(name.into(), args),
        }
    }
}

/// `B{x⃗:=e⃗}` for an abstraction applied to arguments.
pub(crate) fn instantiate<F: Clone>(
    b: &Abstraction<F>,
    args: &[ArithExpr],
    subst1: impl Fn(&F, &str, &ArithExpr) -> F,
) -> F {
    // Rename parameters apart first so sequential substitution is simultaneous.
    let mut body = b.body.clone();
    let tmp: Vec<String> = (0..b.params.len()).map(|i| format!("%arg{i}")).collect();
    for (p, t) in b.params.iter().zip(&tmp) {
        body = subst1(&body, p, &ArithExpr::var(t));
    }
    for (t, e) in tmp.iter().zip(args) {
        body = subst1(&body, t, e);
    }
    body
}

fn lookup(env: &[(String, String)], x: &str) -> Option<usize> {
    env.iter().rposition(|(a, _)| a == x)
}

fn lookup_r(env: &[(String, String)], x: &str) -> Option<usize> {
    env.iter().rposition(|(_, b)| b == x)
}

pub(crate) fn var_eq(env: &[(String, String)], x: &str, y: &str) -> bool {
    match (lookup(env, x), lookup_r(env, y)) {
        (Some(i), Some(j)) => i == j,
        (None, None) => x == y,
        _ => false,
    }
}

pub(crate) fn expr_alpha_eq(env: &[(String, String)], a: &ArithExpr, b: &ArithExpr) -> bool {
    match (a, b) {
        (ArithExpr::Var(x), ArithExpr::Var(y)) => var_eq(env, x, y),
        (ArithExpr::Num(m), ArithExpr::Num(n)) => m == n,
        (ArithExpr::App(f, xs), ArithExpr::App(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| expr_alpha_eq(env, x, y))
        }
        _ => false,
    }
}

fn alpha_eq_pa2(
    a: &Formula,
    b: &Formula,
    e1: &mut Vec<(String, String)>,
    e2: &mut Vec<(String, String)>,
) -> bool {
    match (a, b) {
        (Formula::Null(x), Formula::Null(y)) => expr_alpha_eq(e1, x, y),
        (Formula::Pred(p, xs), Formula::Pred(q, ys)) => {
            var_eq(e2, p, q)
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| expr_alpha_eq(e1, x, y))
        }
        (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            alpha_eq_pa2(a1, a2, e1, e2) && alpha_eq_pa2(b1, b2, e1, e2)
        }
        (Formula::Brace(x, b1), Formula::Brace(y, b2)) => {
            expr_alpha_eq(e1, x, y) && alpha_eq_pa2(b1, b2, e1, e2)
        }
        (Formula::All1(x, a1), Formula::All1(y, a2)) => {
            e1.push((x.clone(), y.clone()));
            let r = alpha_eq_pa2(a1, a2, e1, e2);
            e1.pop();
            r
        }
        (Formula::All2(x, k, a1), Formula::All2(y, l, a2)) => {
            if k != l {
                return false;
            }
            e2.push((x.clone(), y.clone()));
            let r = alpha_eq_pa2(a1, a2, e1, e2);
            e2.pop();
            r
        }
        _ => false,
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        self.alpha_eq(other)
    }
}

fn fresh_upper(base: &str, avoid: &BTreeSet<String>) -> String {
    prime_until(base, |n| avoid.contains(n))
}

/// `∀Z Z`.
pub fn bot() -> Formula {
    Formula::all2("Z", 0, Formula::pred("Z", vec![]))
}

/// `null(0)`.
pub fn top() -> Formula {
    Formula::Null(ArithExpr::num(0u32))
}

pub fn not(a: Formula) -> Formula {
    Formula::imp(a, bot())
}

pub fn and(a: Formula, b: Formula) -> Formula {
    let mut avoid = a.free_vars2();
    avoid.extend(b.free_vars2());
    let z = fresh_upper("Z", &avoid);
    let zf = Formula::pred(&z, vec![]);
    Formula::all2(
        &z,
        0,
        Formula::imp(Formula::imp(a, Formula::imp(b, zf.clone())), zf),
    )
}

pub fn or(a: Formula, b: Formula) -> Formula {
    let mut avoid = a.free_vars2();
    avoid.extend(b.free_vars2());
    let z = fresh_upper("Z", &avoid);
    let zf = Formula::pred(&z, vec![]);
    Formula::all2(
        &z,
        0,
        Formula::imp(
            Formula::imp(a, zf.clone()),
            Formula::imp(Formula::imp(b, zf.clone()), zf),
        ),
    )
}

pub fn exists1(x: &str, a: Formula) -> Formula {
    let z = fresh_upper("Z", &a.free_vars2());
    let zf = Formula::pred(&z, vec![]);
    Formula::all2(
        &z,
        0,
        Formula::imp(Formula::all1(x, Formula::imp(a, zf.clone())), zf),
    )
}

pub fn exists2(x: &str, arity: usize, a: Formula) -> Formula {
    let mut avoid = a.free_vars2();
    avoid.insert(x.into());
    let z = fresh_upper("Z", &avoid);
    let zf = Formula::pred(&z, vec![]);
    Formula::all2(
        &z,
        0,
        Formula::imp(Formula::all2(x, arity, Formula::imp(a, zf.clone())), zf),
    )
}

/// Leibniz equality `∀Z (Z(e) ⇒ Z(e′))`.
pub fn equal(e: ArithExpr, e2: ArithExpr) -> Formula {
    Formula::all2(
        "Z",
        1,
        Formula::imp(Formula::pred("Z", vec![e]), Formula::pred("Z", vec![e2])),
    )
}

/// `nat(e) ≡ ∀Z (Z(0) ⇒ ∀y (Z(y) ⇒ Z(s(y))) ⇒ Z(e))`.
pub fn nat(e: ArithExpr) -> Formula {
    let y = fresh_upper("y", &BTreeSet::new());
    let z = |a: ArithExpr| Formula::pred("Z", vec![a]);
    Formula::all2(
        "Z",
        1,
        Formula::imp(
            z(ArithExpr::num(0u32)),
            Formula::imp(
                Formula::all1(
                    &y,
                    Formula::imp(
                        z(ArithExpr::var(&y)),
                        z(ArithExpr::succ(ArithExpr::var(&y))),
                    ),
                ),
                z(e),
            ),
        ),
    )
}

/// `nat′(e) ≡ ∀Z (({e} ⇒ Z) ⇒ Z)`.
pub fn nat_prime(e: ArithExpr) -> Formula {
    let zf = Formula::pred("Z", vec![]);
    Formula::all2("Z", 0, Formula::imp(Formula::brace(e, zf.clone()), zf))
}

/// `∀ᴺx A ≡ ∀x ({x} ⇒ A)`.
pub fn forall_n(x: &str, a: Formula) -> Formula {
    Formula::all1(x, Formula::brace(ArithExpr::var(x), a))
}

/// `∃ᴺx A ≡ ∀Z (∀x ({x} ⇒ A ⇒ Z) ⇒ Z)`.
pub fn exists_n(x: &str, a: Formula) -> Formula {
    let z = fresh_upper("Z", &a.free_vars2());
    let zf = Formula::pred(&z, vec![]);
    Formula::all2(
        &z,
        0,
        Formula::imp(
            Formula::all1(
                x,
                Formula::brace(ArithExpr::var(x), Formula::imp(a, zf.clone())),
            ),
            zf,
        ),
    )
}

/// Arguments of [`expand_abbreviation`].
#[derive(Debug, Clone)]
pub enum AbbrevArg {
    Expr(ArithExpr),
    Var(String),
    Formula(Formula),
}

pub fn expand_abbreviation(name: &str, args: Vec<AbbrevArg>) -> Result<Formula, ArithError> {
    use AbbrevArg::*;
    let bad = || ArithError::Malformed(format!("wrong arguments for abbreviation `{name}`"));
    let mut it = args.into_iter();
    let mut next = || it.next().ok_or_else(bad);
    let f = match name {
        "top" => top(),
        "bot" => bot(),
        "not" => match next()? {
            Formula(a) => not(a),
            _ => return Err(bad()),
        },
        "and" | "or" => match (next()?, next()?) {
            (Formula(a), Formula(b)) if name == "and" => and(a, b),
            (Formula(a), Formula(b)) => or(a, b),
            _ => return Err(bad()),
        },
        "exists" | "forallN" | "existsN" => match (next()?, next()?) {
            (Var(x), Formula(a)) => match name {
                "exists" => exists1(&x, a),
                "forallN" => forall_n(&x, a),
                _ => exists_n(&x, a),
            },
            _ => return Err(bad()),
        },
        "exists2" => match (next()?, next()?) {
            (Var(x), Formula(a)) => {
                let k = a.arity_of(&x).unwrap_or(0);
                exists2(&x, k, a)
            }
            _ => return Err(bad()),
        },
        "=" | "eq" => match (next()?, next()?) {
            (Expr(a), Expr(b)) => equal(a, b),
            _ => return Err(bad()),
        },
        "nat" | "natp" | "nat'" => match next()? {
            Expr(e) if name == "nat" => nat(e),
            Expr(e) => nat_prime(e),
            _ => return Err(bad()),
        },
        _ => return Err(ArithError::UnknownAbbreviation(name.into())),
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(f)
}

/// Recognizes the expansion of `nat(e)`.
pub fn as_nat(f: &Formula) -> Option<&ArithExpr> {
    let Formula::All2(z, 1, body) = f else {
        return None;
    };
    let Formula::Imp(base, rest) = &**body else {
        return None;
    };
    let Formula::Imp(step, concl) = &**rest else {
        return None;
    };
    let is_z = |g: &Formula, e: &dyn Fn(&ArithExpr) -> bool| matches!(g, Formula::Pred(p, es) if p == z && es.len() == 1 && e(&es[0]));
    if !is_z(base, &|e| *e == ArithExpr::num(0u32)) {
        return None;
    }
    let Formula::All1(y, step_body) = &**step else {
        return None;
    };
    let Formula::Imp(h, c) = &**step_body else {
        return None;
    };
    let yv = ArithExpr::var(y);
    if !is_z(h, &|e| *e == yv) || !is_z(c, &|e| *e == ArithExpr::succ(yv.clone())) {
        return None;
    }
    match &**concl {
        Formula::Pred(p, es) if p == z && es.len() == 1 => Some(&es[0]),
        _ => None,
    }
}

/// `A^nat`: relativizes first-order quantifiers to `nat`.
///
/// Subformulas that already are `nat(e)` are left alone, and `∀x (nat(x) ⇒ B)`
/// counts as already relativized, so the operation is idempotent.
pub fn relativize_nat(a: &Formula) -> Result<Formula, ArithError> {
    if a.contains_brace() {
        return Err(ArithError::BraceInPa2);
    }
    Ok(relativize(a))
}

fn relativize(a: &Formula) -> Formula {
    if as_nat(a).is_some() {
        return a.clone();
    }
    match a {
        Formula::Null(_) | Formula::Pred(..) | Formula::Brace(..) => a.clone(),
        Formula::Imp(b, c) => Formula::imp(relativize(b), relativize(c)),
        Formula::All2(x, k, b) => Formula::all2(x.clone(), *k, relativize(b)),
        Formula::All1(x, b) => {
            if let Formula::Imp(h, c) = &**b {
                if as_nat(h) == Some(&ArithExpr::var(x)) {
                    return Formula::all1(x.clone(), Formula::imp((**h).clone(), relativize(c)));
                }
            }
            Formula::all1(
                x.clone(),
                Formula::imp(nat(ArithExpr::var(x)), relativize(b)),
            )
        }
    }
}

/// Normal form under expression rewriting and `null(s e) → ⊥`.
pub fn normalize_formula_pa2(a: &Formula, sig: &Signature) -> Formula {
    match a {
        Formula::Null(e) => match sig.normalize(e) {
            ArithExpr::Num(n) if n != 0u32.into() => bot(),
            ArithExpr::App(f, _) if f == "s" => bot(),
            e => Formula::Null(e),
        },
        Formula::Pred(x, es) => {
            Formula::Pred(x.clone(), es.iter().map(|e| sig.normalize(e)).collect())
        }
        Formula::Brace(e, b) => Formula::brace(sig.normalize(e), normalize_formula_pa2(b, sig)),
        Formula::Imp(b, c) => {
            Formula::imp(normalize_formula_pa2(b, sig), normalize_formula_pa2(c, sig))
        }
        Formula::All1(x, b) => Formula::all1(x.clone(), normalize_formula_pa2(b, sig)),
        Formula::All2(x, k, b) => Formula::all2(x.clone(), *k, normalize_formula_pa2(b, sig)),
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax shared by PA2⁺ and HA2 formulas.

/// Formula constructors used by the shared parser.
pub(crate) trait FormulaSyntax: Sized {
    fn null(e: ArithExpr) -> Self;
    fn nat(e: ArithExpr) -> Self;
    fn pred(x: String, args: Vec<ArithExpr>) -> Self;
    fn imp(a: Self, b: Self) -> Self;
    fn brace(e: ArithExpr, b: Self) -> Option<Self>;
    fn and(a: Self, b: Self) -> Self;
    fn or(a: Self, b: Self) -> Self;
    fn all1(x: String, a: Self) -> Self;
    fn ex1(x: String, a: Self) -> Self;
    fn all2(x: String, a: Self) -> Self;
    fn ex2(x: String, a: Self) -> Self;
    fn top() -> Self;
    fn bot() -> Self;
    fn eq(a: ArithExpr, b: ArithExpr) -> Self;
    fn nat_prime(e: ArithExpr) -> Option<Self>;
    fn forall_n(x: String, a: Self) -> Option<Self>;
    fn exists_n(x: String, a: Self) -> Option<Self>;
}

impl FormulaSyntax for Formula {
    fn null(e: ArithExpr) -> Self {
        Formula::Null(e)
    }
    fn nat(e: ArithExpr) -> Self {
        nat(e)
    }
    fn pred(x: String, args: Vec<ArithExpr>) -> Self {
        Formula::Pred(x, args)
    }
    fn imp(a: Self, b: Self) -> Self {
        Formula::imp(a, b)
    }
    fn brace(e: ArithExpr, b: Self) -> Option<Self> {
        Some(Formula::brace(e, b))
    }
    fn and(a: Self, b: Self) -> Self {
        and(a, b)
    }
    fn or(a: Self, b: Self) -> Self {
        or(a, b)
    }
    fn all1(x: String, a: Self) -> Self {
        Formula::all1(x, a)
    }
    fn ex1(x: String, a: Self) -> Self {
        exists1(&x, a)
    }
    fn all2(x: String, a: Self) -> Self {
        let k = a.arity_of(&x).unwrap_or(0);
        Formula::all2(x, k, a)
    }
    fn ex2(x: String, a: Self) -> Self {
        let k = a.arity_of(&x).unwrap_or(0);
        exists2(&x, k, a)
    }
    fn top() -> Self {
        top()
    }
    fn bot() -> Self {
        bot()
    }
    fn eq(a: ArithExpr, b: ArithExpr) -> Self {
        equal(a, b)
    }
    fn nat_prime(e: ArithExpr) -> Option<Self> {
        Some(nat_prime(e))
    }
    fn forall_n(x: String, a: Self) -> Option<Self> {
        Some(forall_n(&x, a))
    }
    fn exists_n(x: String, a: Self) -> Option<Self> {
        Some(exists_n(&x, a))
    }
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

const QUANTIFIERS: [&str; 4] = ["forall", "exists", "forallN", "existsN"];

pub(crate) fn parse_formula_at<F: FormulaSyntax>(c: &mut Cursor) -> Result<F, ParseError> {
    for q in QUANTIFIERS {
        if c.is_keyword(q) {
            let pos = c.pos();
            c.bump();
            let mut binders = vec![c.ident()?];
            while let Tok::Ident(_) = c.peek() {
                binders.push(c.ident()?);
            }
            c.expect(&Tok::Dot)?;
            let mut body = parse_formula_at::<F>(c)?;
            for x in binders.into_iter().rev() {
                let second = is_upper(&x);
                body = match (q, second) {
                    ("forall", false) => F::all1(x, body),
                    ("forall", true) => F::all2(x, body),
                    ("exists", false) => F::ex1(x, body),
                    ("exists", true) => F::ex2(x, body),
                    ("forallN", false) => F::forall_n(x, body).ok_or_else(|| only_pa2(pos, q))?,
                    ("existsN", false) => F::exists_n(x, body).ok_or_else(|| only_pa2(pos, q))?,
                    _ => {
                        return Err(ParseError::new(
                            pos,
                            format!("`{q}` binds first-order variables only"),
                        ))
                    }
                };
            }
            return Ok(body);
        }
    }
    if *c.peek() == Tok::LBrace {
        let pos = c.pos();
        c.bump();
        let e = parse_expr_at(c)?;
        c.expect(&Tok::RBrace)?;
        c.expect(&Tok::Arrow)?;
        let b = parse_formula_at::<F>(c)?;
        return F::brace(e, b)
            .ok_or_else(|| ParseError::new(pos, "`{e} -> B` is not an HA2 formula"));
    }
    let a = parse_disj::<F>(c)?;
    if c.eat(&Tok::Arrow) {
        let b = parse_formula_at::<F>(c)?;
        Ok(F::imp(a, b))
    } else {
        Ok(a)
    }
}

fn only_pa2(pos: crate::lex::Pos, what: &str) -> ParseError {
    ParseError::new(pos, format!("`{what}` is only available in PA2 formulas"))
}

fn parse_disj<F: FormulaSyntax>(c: &mut Cursor) -> Result<F, ParseError> {
    let a = parse_conj::<F>(c)?;
    if *c.peek() == Tok::Backslash && *c.peek_at(1) == Tok::Slash {
        c.bump();
        c.bump();
        let b = parse_disj::<F>(c)?;
        return Ok(F::or(a, b));
    }
    Ok(a)
}

fn parse_conj<F: FormulaSyntax>(c: &mut Cursor) -> Result<F, ParseError> {
    let a = parse_unary::<F>(c)?;
    if c.eat(&Tok::And) {
        let b = parse_conj::<F>(c)?;
        return Ok(F::and(a, b));
    }
    Ok(a)
}

fn parse_unary<F: FormulaSyntax>(c: &mut Cursor) -> Result<F, ParseError> {
    if c.eat(&Tok::Tilde) {
        let a = parse_unary::<F>(c)?;
        return Ok(F::imp(a, F::bot()));
    }
    if QUANTIFIERS.iter().any(|q| c.is_keyword(q)) || *c.peek() == Tok::LBrace {
        return parse_formula_at::<F>(c);
    }
    let pos = c.pos();
    match c.peek().clone() {
        Tok::LParen => {
            // Either a parenthesized formula or an expression `(e) = e'`.
            let save = c.clone();
            c.bump();
            match parse_formula_at::<F>(c) {
                Ok(f) if c.eat(&Tok::RParen) && *c.peek() != Tok::Eq => Ok(f),
                _ => {
                    *c = save;
                    parse_equation::<F>(c)
                }
            }
        }
        Tok::Ident(name) if name == "top" => {
            c.bump();
            Ok(F::top())
        }
        Tok::Ident(name) if name == "bot" => {
            c.bump();
            Ok(F::bot())
        }
        Tok::Ident(name)
            if ["null", "nat", "natp"].contains(&name.as_str()) && *c.peek_at(1) == Tok::LParen =>
        {
            c.bump();
            c.bump();
            let e = parse_expr_at(c)?;
            c.expect(&Tok::RParen)?;
            match name.as_str() {
                "null" => Ok(F::null(e)),
                "nat" => Ok(F::nat(e)),
                _ => F::nat_prime(e).ok_or_else(|| only_pa2(pos, "natp")),
            }
        }
        Tok::Ident(name) if is_upper(&name) => {
            c.bump();
            let mut args = Vec::new();
            if c.eat(&Tok::LParen) && !c.eat(&Tok::RParen) {
                loop {
                    args.push(parse_expr_at(c)?);
                    if c.eat(&Tok::RParen) {
                        break;
                    }
                    c.expect(&Tok::Comma)?;
                }
            }
            Ok(F::pred(name, args))
        }
        Tok::Ident(_) | Tok::Nat(_) => parse_equation::<F>(c),
        _ => Err(c.unexpected("a formula")),
    }
}

fn parse_equation<F: FormulaSyntax>(c: &mut Cursor) -> Result<F, ParseError> {
    let a = parse_expr_at(c)?;
    c.expect(&Tok::Eq)?;
    let b = parse_expr_at(c)?;
    Ok(F::eq(a, b))
}

/// Parses a PA2⁺ formula; `nat`, `/\`, `exists`, `=` and friends are
/// expanded to their second-order encodings.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = parse_formula_at::<Formula>(&mut c)?;
    c.finish()?;
    Ok(f)
}

// ---------------------------------------------------------------------------
// Printing.

pub(crate) fn write_args(f: &mut fmt::Formatter<'_>, args: &[ArithExpr]) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    write!(f, "(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{a}")?;
    }
    write!(f, ")")
}

impl Formula {
    fn level(&self) -> u8 {
        match self {
            Formula::All1(..) | Formula::All2(..) | Formula::Brace(..) => 0,
            Formula::Imp(..) => 1,
            _ => 3,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Null(e) => write!(f, "null({e})"),
            Formula::Pred(x, es) => {
                write!(f, "{x}")?;
                write_args(f, es)
            }
            Formula::Imp(a, b) => {
                if a.level() <= 1 {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
            Formula::Brace(e, b) => write!(f, "{{{e}}} -> {b}"),
            Formula::All1(x, a) | Formula::All2(x, _, a) => write!(f, "forall {x}. {a}"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let sig = Signature::new();
        assert_eq!(
            normalize_formula_pa2(&f("null(s(x))"), &sig),
            f("forall Z. Z")
        );
        assert_eq!(
            normalize_formula_pa2(&f("null(neg(s(0)))"), &sig),
            f("null(0)")
        );
        assert_eq!(
            normalize_formula_pa2(&f("null(pred(s(y)))"), &sig),
            f("null(y)")
        );
    }

    #[test]
    fn relativize_examples() {
        let r = relativize_nat(&f("forall x. X(x)")).unwrap();
        assert_eq!(
            r,
            Formula::all1("x", Formula::imp(nat(ArithExpr::var("x")), f("X(x)")))
        );
        assert_eq!(relativize_nat(&f("null(e)")).unwrap(), f("null(e)"));
        assert_eq!(relativize_nat(&f("forall X. X")).unwrap(), f("forall X. X"));
        assert_eq!(relativize_nat(&r).unwrap(), r);
        assert!(relativize_nat(&f("{x} -> null(x)")).is_err());
    }

    #[test]
    fn abbreviation_examples() {
        let e = |s: &str| AbbrevArg::Expr(crate::arith::parse_expr(s).unwrap());
        assert_eq!(
            expand_abbreviation("=", vec![e("a"), e("b")]).unwrap(),
            f("forall Z. Z(a) -> Z(b)")
        );
        let en = expand_abbreviation(
            "existsN",
            vec![AbbrevArg::Var("x".into()), AbbrevArg::Formula(f("X(x)"))],
        );
        assert_eq!(
            en.unwrap(),
            f("forall Z. (forall x. {x} -> X(x) -> Z) -> Z")
        );
        assert_eq!(expand_abbreviation("top", vec![]).unwrap(), f("null(0)"));
        assert!(matches!(
            expand_abbreviation("nope", vec![]),
            Err(ArithError::UnknownAbbreviation(_))
        ));
    }

    #[test]
    fn alpha_equivalence() {
        assert_eq!(f("forall x. X(x)"), f("forall y. X(y)"));
        assert_ne!(f("forall x. X(x)"), f("forall y. X(x)"));
        assert_eq!(f("forall X. X(a)"), f("forall Y. Y(a)"));
    }

    #[test]
    fn substitution_avoids_capture() {
        let a = f("forall y. Z(x, y)");
        let b = a.subst1("x", &ArithExpr::var("y"));
        assert_eq!(b, f("forall w. Z(y, w)"));
        let c = f("forall Y. X(a) -> Y");
        let abs = Abstraction {
            params: vec!["u".into()],
            body: f("Y(u)"),
        };
        assert_eq!(c.subst2("X", &abs), f("forall W. Y(a) -> W"));
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "forall x. X(x) -> null(s(x))",
            "(A -> B) -> C",
            "{x} -> forall Y. Y(x)",
            "forall X. X(x, y)",
        ] {
            let a = f(s);
            assert_eq!(f(&a.to_string()), a, "{s}");
        }
    }
}
