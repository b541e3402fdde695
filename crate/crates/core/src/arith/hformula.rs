use super::expr::{ArithExpr, Signature};
use super::formula::{
    expr_alpha_eq, instantiate, parse_formula_at, var_eq, write_args, Abstraction, FormulaSyntax,
};
use crate::lex::{Cursor, ParseError};
use crate::util::prime_until;
use std::collections::BTreeSet;
use std::fmt;

/// A formula of HA2, with primitive conjunction, existentials and the
/// `nat`/`null` predicates.
#[derive(Debug, Clone)]
pub enum HFormula {
    Null(ArithExpr),
    Nat(ArithExpr),
    Pred(String, Vec<ArithExpr>),
    Imp(Box<HFormula>, Box<HFormula>),
    And(Box<HFormula>, Box<HFormula>),
    All1(String, Box<HFormula>),
    All2(String, usize, Box<HFormula>),
    Ex1(String, Box<HFormula>),
    Ex2(String, usize, Box<HFormula>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Q {
    All,
    Ex,
}

impl HFormula {
    pub fn imp(a: HFormula, b: HFormula) -> HFormula {
        HFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn and(a: HFormula, b: HFormula) -> HFormula {
        HFormula::And(Box::new(a), Box::new(b))
    }

    pub fn all1(x: impl Into<String>, a: HFormula) -> HFormula {
        HFormula::All1(x.into(), Box::new(a))
    }

    pub fn ex1(x: impl Into<String>, a: HFormula) -> HFormula {
        HFormula::Ex1(x.into(), Box::new(a))
    }

    pub fn all2(x: impl Into<String>, k: usize, a: HFormula) -> HFormula {
        HFormula::All2(x.into(), k, Box::new(a))
    }

    pub fn ex2(x: impl Into<String>, k: usize, a: HFormula) -> HFormula {
        HFormula::Ex2(x.into(), k, Box::new(a))
    }

    pub fn pred(x: impl Into<String>, args: Vec<ArithExpr>) -> HFormula {
        HFormula::Pred(x.into(), args)
    }

    /// `⊤ ≡ ∃Z Z`.
    pub fn top() -> HFormula {
        HFormula::ex2("Z", 0, HFormula::pred("Z", vec![]))
    }

    /// `⊥ ≡ ∀Z Z`.
    pub fn bot() -> HFormula {
        HFormula::all2("Z", 0, HFormula::pred("Z", vec![]))
    }

    fn quant1(&self) -> Option<(Q, &String, &HFormula)> {
        match self {
            HFormula::All1(x, a) => Some((Q::All, x, a)),
            HFormula::Ex1(x, a) => Some((Q::Ex, x, a)),
            _ => None,
        }
    }

    fn quant2(&self) -> Option<(Q, &String, usize, &HFormula)> {
        match self {
            HFormula::All2(x, k, a) => Some((Q::All, x, *k, a)),
            HFormula::Ex2(x, k, a) => Some((Q::Ex, x, *k, a)),
            _ => None,
        }
    }

    fn rebuild1(q: Q, x: String, a: HFormula) -> HFormula {
        match q {
            Q::All => HFormula::all1(x, a),
            Q::Ex => HFormula::ex1(x, a),
        }
    }

    fn rebuild2(q: Q, x: String, k: usize, a: HFormula) -> HFormula {
        match q {
            Q::All => HFormula::all2(x, k, a),
            Q::Ex => HFormula::ex2(x, k, a),
        }
    }

    pub fn free_vars1(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.fv(
            &mut Vec::new(),
            &mut Vec::new(),
            &mut out,
            &mut BTreeSet::new(),
        );
        out
    }

    pub fn free_vars2(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.fv(
            &mut Vec::new(),
            &mut Vec::new(),
            &mut BTreeSet::new(),
            &mut out,
        );
        out
    }

    fn fv(
        &self,
        b1: &mut Vec<String>,
        b2: &mut Vec<String>,
        o1: &mut BTreeSet<String>,
        o2: &mut BTreeSet<String>,
    ) {
        let add = |e: &ArithExpr, b1: &Vec<String>, o1: &mut BTreeSet<String>| {
            o1.extend(e.vars().into_iter().filter(|v| !b1.contains(v)));
        };
        match self {
            HFormula::Null(e) | HFormula::Nat(e) => add(e, b1, o1),
            HFormula::Pred(x, es) => {
                if !b2.contains(x) {
                    o2.insert(x.clone());
                }
                es.iter().for_each(|e| add(e, b1, o1));
            }
            HFormula::Imp(a, b) | HFormula::And(a, b) => {
                a.fv(b1, b2, o1, o2);
                b.fv(b1, b2, o1, o2);
            }
            HFormula::All1(x, a) | HFormula::Ex1(x, a) => {
                b1.push(x.clone());
                a.fv(b1, b2, o1, o2);
                b1.pop();
            }
            HFormula::All2(x, _, a) | HFormula::Ex2(x, _, a) => {
                b2.push(x.clone());
                a.fv(b1, b2, o1, o2);
                b2.pop();
            }
        }
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(f) = todo.pop() {
            match f {
                HFormula::Null(e) | HFormula::Nat(e) => out.extend(e.vars()),
                HFormula::Pred(x, es) => {
                    out.insert(x.clone());
                    es.iter().for_each(|e| out.extend(e.vars()));
                }
                HFormula::Imp(a, b) | HFormula::And(a, b) => {
                    todo.push(a);
                    todo.push(b);
                }
                HFormula::All1(x, a)
                | HFormula::Ex1(x, a)
                | HFormula::All2(x, _, a)
                | HFormula::Ex2(x, _, a) => {
                    out.insert(x.clone());
                    todo.push(a);
                }
            }
        }
        out
    }

    pub fn arity_of(&self, x: &str) -> Option<usize> {
        match self {
            HFormula::Pred(y, es) if y == x => Some(es.len()),
            HFormula::Pred(..) | HFormula::Null(_) | HFormula::Nat(_) => None,
            HFormula::Imp(a, b) | HFormula::And(a, b) => a.arity_of(x).or_else(|| b.arity_of(x)),
            HFormula::All1(_, a) | HFormula::Ex1(_, a) => a.arity_of(x),
            HFormula::All2(y, _, a) | HFormula::Ex2(y, _, a) => {
                if y == x {
                    None
                } else {
                    a.arity_of(x)
                }
            }
        }
    }

    /// Capture-avoiding `A{x:=e}`.
    pub fn subst1(&self, x: &str, e: &ArithExpr) -> HFormula {
        let fv = e.vars();
        self.subst1_inner(x, e, &fv)
    }

    fn subst1_inner(&self, x: &str, e: &ArithExpr, fv: &BTreeSet<String>) -> HFormula {
        let go = |f: &HFormula| f.subst1_inner(x, e, fv);
        match self {
            HFormula::Null(d) => HFormula::Null(d.subst(x, e)),
            HFormula::Nat(d) => HFormula::Nat(d.subst(x, e)),
            HFormula::Pred(p, es) => {
                HFormula::Pred(p.clone(), es.iter().map(|d| d.subst(x, e)).collect())
            }
            HFormula::Imp(a, b) => HFormula::imp(go(a), go(b)),
            HFormula::And(a, b) => HFormula::and(go(a), go(b)),
            HFormula::All2(..) | HFormula::Ex2(..) => {
                let (q, p, k, a) = self.quant2().unwrap();
                HFormula::rebuild2(q, p.clone(), k, go(a))
            }
            HFormula::All1(..) | HFormula::Ex1(..) => {
                let (q, y, a) = self.quant1().unwrap();
                if y == x || !a.free_vars1().contains(x) {
                    return self.clone();
                }
                if fv.contains(y) {
                    let mut avoid = fv.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    let a2 = a.subst1(y, &ArithExpr::var(&y2));
                    HFormula::rebuild1(q, y2, go(&a2))
                } else {
                    HFormula::rebuild1(q, y.clone(), go(a))
                }
            }
        }
    }

    /// Capture-avoiding `A{X:=λx⃗.B}`.
    pub fn subst2(&self, x: &str, b: &Abstraction<HFormula>) -> HFormula {
        let mut fv1 = b.body.free_vars1();
        for p in &b.params {
            fv1.remove(p);
        }
        let fv2 = b.body.free_vars2();
        self.subst2_inner(x, b, &fv1, &fv2)
    }

    fn subst2_inner(
        &self,
        x: &str,
        b: &Abstraction<HFormula>,
        fv1: &BTreeSet<String>,
        fv2: &BTreeSet<String>,
    ) -> HFormula {
        let go = |f: &HFormula| f.subst2_inner(x, b, fv1, fv2);
        match self {
            HFormula::Pred(p, es) if p == x => instantiate(b, es, |f, y, e| f.subst1(y, e)),
            HFormula::Pred(..) | HFormula::Null(_) | HFormula::Nat(_) => self.clone(),
            HFormula::Imp(a, c) => HFormula::imp(go(a), go(c)),
            HFormula::And(a, c) => HFormula::and(go(a), go(c)),
            HFormula::All1(..) | HFormula::Ex1(..) => {
                let (q, y, a) = self.quant1().unwrap();
                if fv1.contains(y) && a.free_vars2().contains(x) {
                    let mut avoid = fv1.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    HFormula::rebuild1(q, y2.clone(), go(&a.subst1(y, &ArithExpr::var(&y2))))
                } else {
                    HFormula::rebuild1(q, y.clone(), go(a))
                }
            }
            HFormula::All2(..) | HFormula::Ex2(..) => {
                let (q, y, k, a) = self.quant2().unwrap();
                if y == x || !a.free_vars2().contains(x) {
                    self.clone()
                } else if fv2.contains(y) {
                    let mut avoid = fv2.clone();
                    avoid.extend(a.all_names());
                    let y2 = prime_until(y, |n| avoid.contains(n));
                    let renamed = a.subst2(y, &Abstraction::hpred_var(&y2, k));
                    HFormula::rebuild2(q, y2, k, go(&renamed))
                } else {
                    HFormula::rebuild2(q, y.clone(), k, go(a))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &HFormula) -> bool {
        alpha_eq_ha2(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

impl Abstraction<HFormula> {
    pub fn hpred_var(name: &str, arity: usize) -> Self {
        let params: Vec<String> = (0..arity).map(|i| format!("x%{i}")).collect();
        let args = params.iter().map(ArithExpr::var).collect();
        Abstraction {
            params,
            body: HFormula::Pred(name.into(), args),
        }
    }
}

fn alpha_eq_ha2(
    a: &HFormula,
    b: &HFormula,
    e1: &mut Vec<(String, String)>,
    e2: &mut Vec<(String, String)>,
) -> bool {
    use HFormula as H;
    match (a, b) {
        (H::Null(x), H::Null(y)) | (H::Nat(x), H::Nat(y)) => expr_alpha_eq(e1, x, y),
        (H::Pred(p, xs), H::Pred(q, ys)) => {
            var_eq(e2, p, q)
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| expr_alpha_eq(e1, x, y))
        }
        (H::Imp(a1, b1), H::Imp(a2, b2)) | (H::And(a1, b1), H::And(a2, b2)) => {
            alpha_eq_ha2(a1, a2, e1, e2) && alpha_eq_ha2(b1, b2, e1, e2)
        }
        (H::All1(x, a1), H::All1(y, a2)) | (H::Ex1(x, a1), H::Ex1(y, a2)) => {
            e1.push((x.clone(), y.clone()));
            let r = alpha_eq_ha2(a1, a2, e1, e2);
            e1.pop();
            r
        }
        (H::All2(x, k, a1), H::All2(y, l, a2)) | (H::Ex2(x, k, a1), H::Ex2(y, l, a2)) => {
            if k != l {
                return false;
            }
            e2.push((x.clone(), y.clone()));
            let r = alpha_eq_ha2(a1, a2, e1, e2);
            e2.pop();
            r
        }
        _ => false,
    }
}

impl PartialEq for HFormula {
    fn eq(&self, other: &HFormula) -> bool {
        self.alpha_eq(other)
    }
}

/// Normal form under expression rewriting, `null(0) → ⊤`, `null(s e) → ⊥`
/// and `(∃v A) ⇒ B → ∀v (A ⇒ B)`.
pub fn normalize_formula_ha2(a: &HFormula, sig: &Signature) -> HFormula {
    match a {
        HFormula::Null(e) => match sig.normalize(e) {
            ArithExpr::Num(n) if n == 0u32.into() => HFormula::top(),
            ArithExpr::Num(_) => HFormula::bot(),
            ArithExpr::App(f, _) if f == "s" => HFormula::bot(),
            e => HFormula::Null(e),
        },
        HFormula::Nat(e) => HFormula::Nat(sig.normalize(e)),
        HFormula::Pred(x, es) => {
            HFormula::Pred(x.clone(), es.iter().map(|e| sig.normalize(e)).collect())
        }
        HFormula::And(b, c) => {
            HFormula::and(normalize_formula_ha2(b, sig), normalize_formula_ha2(c, sig))
        }
        HFormula::Imp(b, c) => {
            imp_normal(normalize_formula_ha2(b, sig), normalize_formula_ha2(c, sig))
        }
        HFormula::All1(x, b) => HFormula::all1(x.clone(), normalize_formula_ha2(b, sig)),
        HFormula::Ex1(x, b) => HFormula::ex1(x.clone(), normalize_formula_ha2(b, sig)),
        HFormula::All2(x, k, b) => HFormula::all2(x.clone(), *k, normalize_formula_ha2(b, sig)),
        HFormula::Ex2(x, k, b) => HFormula::ex2(x.clone(), *k, normalize_formula_ha2(b, sig)),
    }
}

/// `a ⇒ b` for normal `a`, `b`, commuting leading existentials of `a`.
fn imp_normal(a: HFormula, b: HFormula) -> HFormula {
    match a {
        HFormula::Ex1(v, body) => {
            let (v, body) = if b.free_vars1().contains(&v) {
                let mut avoid = b.all_names();
                avoid.extend(body.all_names());
                let v2 = prime_until(&v, |n| avoid.contains(n));
                let renamed = body.subst1(&v, &ArithExpr::var(&v2));
                (v2, renamed)
            } else {
                (v, *body)
            };
            HFormula::all1(v, imp_normal(body, b))
        }
        HFormula::Ex2(v, k, body) => {
            let (v, body) = if b.free_vars2().contains(&v) {
                let mut avoid = b.all_names();
                avoid.extend(body.all_names());
                let v2 = prime_until(&v, |n| avoid.contains(n));
                let renamed = body.subst2(&v, &Abstraction::hpred_var(&v2, k));
                (v2, renamed)
            } else {
                (v, *body)
            };
            HFormula::all2(v, k, imp_normal(body, b))
        }
        a => HFormula::imp(a, b),
    }
}

impl FormulaSyntax for HFormula {
    fn null(e: ArithExpr) -> Self {
        HFormula::Null(e)
    }
    fn nat(e: ArithExpr) -> Self {
        HFormula::Nat(e)
    }
    fn pred(x: String, args: Vec<ArithExpr>) -> Self {
        HFormula::Pred(x, args)
    }
    fn imp(a: Self, b: Self) -> Self {
        HFormula::imp(a, b)
    }
    fn brace(_: ArithExpr, _: Self) -> Option<Self> {
        None
    }
    fn and(a: Self, b: Self) -> Self {
        HFormula::and(a, b)
    }
    fn or(a: Self, b: Self) -> Self {
        let mut avoid = a.free_vars2();
        avoid.extend(b.free_vars2());
        let z = prime_until("Z", |n| avoid.contains(n));
        let zf = HFormula::pred(&z, vec![]);
        HFormula::all2(
            &z,
            0,
            HFormula::imp(
                HFormula::imp(a, zf.clone()),
                HFormula::imp(HFormula::imp(b, zf.clone()), zf),
            ),
        )
    }
    fn all1(x: String, a: Self) -> Self {
        HFormula::all1(x, a)
    }
    fn ex1(x: String, a: Self) -> Self {
        HFormula::ex1(x, a)
    }
    fn all2(x: String, a: Self) -> Self {
        let k = a.arity_of(&x).unwrap_or(0);
        HFormula::all2(x, k, a)
    }
    fn ex2(x: String, a: Self) -> Self {
        let k = a.arity_of(&x).unwrap_or(0);
        HFormula::ex2(x, k, a)
    }
    fn top() -> Self {
        HFormula::top()
    }
    fn bot() -> Self {
        HFormula::bot()
    }
    fn eq(a: ArithExpr, b: ArithExpr) -> Self {
        HFormula::all2(
            "Z",
            1,
            HFormula::imp(HFormula::pred("Z", vec![a]), HFormula::pred("Z", vec![b])),
        )
    }
    fn nat_prime(_: ArithExpr) -> Option<Self> {
        None
    }
    fn forall_n(_: String, _: Self) -> Option<Self> {
        None
    }
    fn exists_n(_: String, _: Self) -> Option<Self> {
        None
    }
}

pub fn parse_hformula(text: &str) -> Result<HFormula, ParseError> {
    let mut c = Cursor::new(text)?;
    let f = parse_formula_at::<HFormula>(&mut c)?;
    c.finish()?;
    Ok(f)
}

impl HFormula {
    fn level(&self) -> u8 {
        match self {
            HFormula::All1(..) | HFormula::All2(..) | HFormula::Ex1(..) | HFormula::Ex2(..) => 0,
            HFormula::Imp(..) => 1,
            HFormula::And(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for HFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, a: &HFormula, min: u8| {
            if a.level() < min {
                write!(f, "({a})")
            } else {
                write!(f, "{a}")
            }
        };
        match self {
            HFormula::Null(e) => write!(f, "null({e})"),
            HFormula::Nat(e) => write!(f, "nat({e})"),
            HFormula::Pred(x, es) => {
                write!(f, "{x}")?;
                write_args(f, es)
            }
            HFormula::Imp(a, b) => {
                side(f, a, 2)?;
                write!(f, " -> {b}")
            }
            HFormula::And(a, b) => {
                side(f, a, 3)?;
                write!(f, " /\\ ")?;
                side(f, b, 2)
            }
            HFormula::All1(x, a) | HFormula::All2(x, _, a) => write!(f, "forall {x}. {a}"),
            HFormula::Ex1(x, a) | HFormula::Ex2(x, _, a) => write!(f, "exists {x}. {a}"),
        }
    }
}

impl std::str::FromStr for HFormula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_hformula(s)
    }
}
