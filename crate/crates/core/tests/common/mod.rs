//! Generators and property checks shared by the integration suites.
#![allow(dead_code)]

use krivine::arith::normalize_formula_ha2;
use krivine::arith::{Abstraction, ArithExpr, Formula, HFormula, Signature};
use krivine::ha2::{
    contract_at, enumerate_weak_redexes, inner_equal, inner_reducts, is_weak_normal, weak_reduce,
    weak_reducts, EqResult, HConst, HTerm, DEFAULT_EQ_FUEL,
};
use krivine::negtrans::{formula_bot, formula_nn, ReturnFormula};
use krivine::{Process, Stack, Term};
use proptest::prelude::*;
use std::collections::HashSet;

/// Outcome of one randomized check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Nothing to check for this sample.
    Vacuous,
    /// The bounded search gave up.
    Unknown(String),
    Fail(String),
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

/// Shape of a term before names are chosen; variables are indices into the
/// binders in scope.
#[derive(Debug, Clone)]
pub enum Raw {
    Var(u8),
    Num(u8),
    Const(u8),
    Lam(Box<Raw>),
    App(Box<Raw>, Box<Raw>),
}

pub fn raw(depth: u32, max_num: u8) -> impl Strategy<Value = Raw> + Clone {
    let leaf = prop_oneof![
        3 => any::<u8>().prop_map(Raw::Var),
        1 => (0..=max_num).prop_map(Raw::Num),
        1 => any::<u8>().prop_map(Raw::Const),
    ];
    leaf.prop_recursive(depth, 40, 2, |inner| {
        prop_oneof![
            2 => inner.clone().prop_map(|b| Raw::Lam(Box::new(b))),
            3 => (inner.clone(), inner).prop_map(|(f, a)| Raw::App(Box::new(f), Box::new(a))),
        ]
    })
}

const LC_CONSTS: [&str; 4] = ["cc", "s", "rec", "stop"];

fn lc(r: &Raw, ctx: &mut Vec<String>) -> Term {
    match r {
        Raw::Var(i) if ctx.is_empty() => Term::inst(LC_CONSTS[*i as usize % 4]),
        Raw::Var(i) => Term::var(&ctx[ctx.len() - 1 - *i as usize % ctx.len()]),
        Raw::Num(n) => Term::num(*n as u32),
        Raw::Const(c) => Term::inst(LC_CONSTS[*c as usize % 4]),
        Raw::Lam(b) => {
            let x = format!("x{}", ctx.len());
            ctx.push(x.clone());
            let body = lc(b, ctx);
            ctx.pop();
            Term::lam(&x, body)
        }
        Raw::App(f, a) => Term::app(lc(f, ctx), lc(a, ctx)),
    }
}

/// Closed λc term over `cc`, `s`, `rec`, `stop` and numerals.
pub fn closed_term(r: &Raw) -> Term {
    lc(r, &mut Vec::new())
}

/// Closed λc term with free variables allowed (`a`, `b`, `x`).
pub fn open_term(r: &Raw) -> Term {
    fn go(r: &Raw, ctx: &mut Vec<String>) -> Term {
        match r {
            Raw::Var(i) if ctx.is_empty() || i % 4 == 0 => {
                Term::var(["a", "b", "x"][*i as usize % 3])
            }
            Raw::Lam(b) => {
                let x = format!("x{}", ctx.len());
                ctx.push(x.clone());
                let body = go(b, ctx);
                ctx.pop();
                Term::lam(&x, body)
            }
            Raw::App(f, a) => Term::app(go(f, ctx), go(a, ctx)),
            _ => lc(r, ctx),
        }
    }
    go(r, &mut Vec::new())
}

/// Closed-world process: a closed head facing up to three closed terms, or
/// `cc`, `s` or `rec` facing arguments of the right shape.
pub fn closed_process(depth: u32, max_num: u8) -> impl Strategy<Value = Process> {
    let args = prop::collection::vec(raw(depth.min(3), max_num), 0..=3);
    let generic = (raw(depth, max_num), args.clone()).prop_map(|(h, st)| {
        Process::new(
            closed_term(&h),
            Stack::from_terms(st.iter().map(closed_term), Stack::bottom()),
        )
    });
    let sub = raw(depth - 1, max_num);
    let instr =
        (0u8..3, sub.clone(), sub, 0..=max_num, args).prop_map(|(which, u0, u1, n, rest)| {
            let rest = Stack::from_terms(rest.iter().map(closed_term), Stack::bottom());
            let (head, front) = match which {
                0 => ("cc", vec![closed_term(&u0)]),
                1 => ("s", vec![Term::num(n as u32), closed_term(&u0)]),
                _ => (
                    "rec",
                    vec![closed_term(&u0), closed_term(&u1), Term::num(n as u32)],
                ),
            };
            Process::new(Term::inst(head), Stack::from_terms(front, rest))
        });
    prop_oneof![generic, instr]
}

const H_CONSTS: [HConst; 6] = [
    HConst::Pair,
    HConst::Fst,
    HConst::Snd,
    HConst::Zero,
    HConst::Succ,
    HConst::Rec,
];

/// HA2 term; about a quarter of variable leaves are free (`a`, `b`, `x`).
pub fn hterm(r: &Raw) -> HTerm {
    fn go(r: &Raw, ctx: &mut Vec<String>) -> HTerm {
        match r {
            Raw::Var(i) if ctx.is_empty() || i % 4 == 0 => {
                HTerm::var(["a", "b", "x"][*i as usize % 3])
            }
            Raw::Var(i) => HTerm::var(&ctx[ctx.len() - 1 - *i as usize % ctx.len()]),
            Raw::Num(n) => HTerm::numeral(&(*n as u32).into()),
            Raw::Const(c) => HTerm::konst(H_CONSTS[*c as usize % 6]),
            Raw::Lam(b) => {
                let x = format!("v{}", ctx.len());
                ctx.push(x.clone());
                let body = go(b, ctx);
                ctx.pop();
                HTerm::lam(&x, body)
            }
            Raw::App(f, a) => HTerm::app(go(f, ctx), go(a, ctx)),
        }
    }
    go(r, &mut Vec::new())
}

pub fn arb_hterm(depth: u32) -> impl Strategy<Value = HTerm> {
    raw(depth, 3).prop_map(|r| hterm(&r))
}

/// `(λv. (λw. b) c) a`, which has a weak redex at the root and an inner one
/// below it, mixed with plain random terms.
pub fn arb_mixed_hterm(depth: u32) -> impl Strategy<Value = HTerm> {
    let r = raw(depth.saturating_sub(2), 3);
    let shaped = (r.clone(), r.clone(), r.clone(), r).prop_map(|(b, c, a, extra)| {
        let inner = Raw::App(Box::new(Raw::Lam(Box::new(b))), Box::new(c));
        let t = Raw::App(Box::new(Raw::Lam(Box::new(inner))), Box::new(a));
        hterm(&Raw::App(Box::new(t), Box::new(extra)))
    });
    prop_oneof![arb_hterm(depth), shaped]
}

/// Arithmetic expressions over `vars` and the built-in symbols.
pub fn arb_expr(vars: &'static [&'static str], depth: u32) -> impl Strategy<Value = ArithExpr> {
    let leaf = prop_oneof![
        2 => prop::sample::select(vars).prop_map(ArithExpr::var),
        1 => (0u32..=3).prop_map(ArithExpr::num),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (
                prop::sample::select(&["s", "pred", "neg"][..]),
                inner.clone()
            )
                .prop_map(|(f, a)| ArithExpr::app(f, vec![a])),
            (
                prop::sample::select(&["+", "*", "minus"][..]),
                inner.clone(),
                inner
            )
                .prop_map(|(f, a, b)| ArithExpr::app(f, vec![a, b])),
        ]
    })
}

const FO_VARS: &[&str] = &["x", "y", "z"];

/// PA2⁺ formulas with predicate variables `X` (arity 0) and `Y` (arity 1).
pub fn arb_formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        arb_expr(FO_VARS, 2).prop_map(Formula::Null),
        Just(Formula::pred("X", vec![])),
        arb_expr(FO_VARS, 2).prop_map(|e| Formula::pred("Y", vec![e])),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (arb_expr(FO_VARS, 2), inner.clone()).prop_map(|(e, b)| Formula::brace(e, b)),
            (prop::sample::select(FO_VARS), inner.clone()).prop_map(|(x, a)| Formula::all1(x, a)),
            (prop::bool::ANY, inner).prop_map(|(unary, a)| if unary {
                Formula::all2("Y", 1, a)
            } else {
                Formula::all2("X", 0, a)
            }),
        ]
    })
}

/// PA2 formulas without the `{e} ⇒ B` form.
pub fn arb_pa2_formula(depth: u32) -> impl Strategy<Value = Formula> {
    arb_formula(depth).prop_filter("no braces", |f| !f.contains_brace())
}

pub fn pole() -> ReturnFormula {
    ReturnFormula::sigma01("f")
}

// ---------------------------------------------------------------------------
// Reduction theory

/// `t ≻w t'` at `p` implies `t{x:=u} ≻w t'{x:=u}` at the same position.
pub fn check_subst_wred(t: &HTerm, u: &HTerm) -> Verdict {
    let redexes = enumerate_weak_redexes(t);
    if redexes.is_empty() {
        return Verdict::Vacuous;
    }
    let tu = t.substitute("x", u);
    let after = enumerate_weak_redexes(&tu);
    for p in redexes {
        let t2 = contract_at(t, &p).expect("enumerated redex contracts");
        if !after.contains(&p) {
            return Verdict::Fail(format!("redex at {p:?} of {t} lost under x:={u}"));
        }
        let lhs = contract_at(&tu, &p).expect("redex survives substitution");
        let rhs = t2.substitute("x", u);
        if lhs != rhs {
            return Verdict::Fail(format!("{t} at {p:?}, x:={u}: {lhs} vs {rhs}"));
        }
    }
    Verdict::Pass
}

const SEARCH_CAP: usize = 4000;

/// Terms reachable from `from` in at most `depth` steps of `next`, or `None`
/// once the cap is hit.
fn reachable(
    from: &[HTerm],
    depth: usize,
    next: fn(&HTerm) -> Vec<HTerm>,
) -> Option<HashSet<HTerm>> {
    let mut seen: HashSet<HTerm> = from.iter().cloned().collect();
    let mut layer: Vec<HTerm> = from.to_vec();
    for _ in 0..depth {
        let mut fresh = Vec::new();
        for t in &layer {
            for r in next(t) {
                if seen.insert(r.clone()) {
                    fresh.push(r);
                }
            }
            if seen.len() > SEARCH_CAP {
                return None;
            }
        }
        if fresh.is_empty() {
            break;
        }
        layer = fresh;
    }
    Some(seen)
}

/// A random mixed sequence `t (≻w|≻i)* u` must be matched by some
/// `t ≻w* u₀ ≻i* u`.
pub fn check_postponement(t: &HTerm, plan: &[(bool, usize)]) -> Verdict {
    let mut u = t.clone();
    let (mut weak, mut inner, mut mixed) = (0usize, 0usize, false);
    for &(want_weak, pick) in plan {
        let (w, i) = (weak_reducts(&u), inner_reducts(&u));
        let use_weak = if want_weak {
            !w.is_empty()
        } else {
            i.is_empty()
        };
        let options = if use_weak { w } else { i };
        if options.is_empty() {
            break;
        }
        if use_weak {
            mixed |= inner > 0;
            weak += 1;
        } else {
            inner += 1;
        }
        u = options[pick % options.len()].clone();
    }
    if !mixed {
        return Verdict::Vacuous;
    }
    // Inner steps under an abstraction that gets applied become weak steps.
    let Some(weak_side) = reachable(std::slice::from_ref(t), weak + 2 * inner + 1, weak_reducts)
    else {
        return Verdict::Unknown("weak search cap".into());
    };
    let starts: Vec<HTerm> = weak_side.into_iter().collect();
    match reachable(&starts, 3 * inner + 2, inner_reducts) {
        Some(set) if set.contains(&u) => Verdict::Pass,
        Some(_) => Verdict::Fail(format!(
            "{t} reaches {u} but no weak-then-inner sequence does"
        )),
        None => {
            // Fall back to searching from each weak endpoint separately.
            for s in &starts {
                if let Some(set) = reachable(std::slice::from_ref(s), 3 * inner + 2, inner_reducts)
                {
                    if set.contains(&u) {
                        return Verdict::Pass;
                    }
                }
            }
            Verdict::Unknown("inner search cap".into())
        }
    }
}

const STRATEGY_FUEL: u64 = 300;

/// Two weak strategies (leftmost-outermost and seeded random choice) end in
/// `=ᵢ`-equal normal forms.
pub fn check_confluence(t: &HTerm, picks: &[usize]) -> Verdict {
    let (a, _) = weak_reduce(t, STRATEGY_FUEL);
    let mut b = t.clone();
    for i in 0..STRATEGY_FUEL as usize {
        let rs = weak_reducts(&b);
        if rs.is_empty() {
            break;
        }
        b = rs[picks[i % picks.len()] % rs.len()].clone();
    }
    if !is_weak_normal(&a) || !is_weak_normal(&b) {
        return Verdict::Unknown("no weak normal form within fuel".into());
    }
    match inner_equal(&a, &b, DEFAULT_EQ_FUEL) {
        EqResult::Equal => Verdict::Pass,
        EqResult::Unknown => Verdict::Unknown("inner_equal ran out of fuel".into()),
        EqResult::NotEqual => Verdict::Fail(format!("{t}: {a} vs {b}")),
    }
}

// ---------------------------------------------------------------------------
// Translation algebra

pub fn check_trans_subst1(a: &Formula, x: &str, e: &ArithExpr) -> Verdict {
    let r = pole();
    let lhs = formula_bot(&a.subst1(x, e), &r);
    let rhs = formula_bot(a, &r).subst1(x, e);
    if lhs.alpha_eq(&rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("{a} with {x}:={e}: {lhs} vs {rhs}"))
    }
}

/// Second-order case: `(A{Y:=λw.B})^⊥ ≡ A^⊥{Y:=λw.B^⊥}`.
pub fn check_trans_subst2(a: &Formula, var: &str, params: &[&str], b: &Formula) -> Verdict {
    let r = pole();
    let params: Vec<String> = params.iter().map(|p| p.to_string()).collect();
    let pa2 = Abstraction {
        params: params.clone(),
        body: b.clone(),
    };
    let ha2 = Abstraction {
        params,
        body: formula_bot(b, &r),
    };
    let lhs = formula_bot(&a.subst2(var, &pa2), &r);
    let rhs = formula_bot(a, &r).subst2(var, &ha2);
    if lhs.alpha_eq(&rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("{a} with {var}:={b}: {lhs} vs {rhs}"))
    }
}

fn map_exprs(a: &Formula, f: &mut dyn FnMut(&ArithExpr) -> ArithExpr) -> Formula {
    match a {
        Formula::Null(e) => Formula::Null(f(e)),
        Formula::Pred(x, es) => Formula::Pred(x.clone(), es.iter().map(&mut *f).collect()),
        Formula::Imp(b, c) => Formula::imp(map_exprs(b, f), map_exprs(c, f)),
        Formula::Brace(e, b) => {
            let e = f(e);
            Formula::brace(e, map_exprs(b, f))
        }
        Formula::All1(x, b) => Formula::all1(x.clone(), map_exprs(b, f)),
        Formula::All2(x, k, b) => Formula::all2(x.clone(), *k, map_exprs(b, f)),
    }
}

/// Applies one defining equation at the `pick`-th rewritable spot, if any.
pub fn rewrite_once(a: &Formula, sig: &Signature, pick: usize) -> Option<Formula> {
    let mut total = 0usize;
    map_exprs(a, &mut |e| {
        total += sig.rewrite_steps(e).len();
        e.clone()
    });
    if total == 0 {
        return None;
    }
    let mut target = pick % total;
    Some(map_exprs(a, &mut |e| {
        let steps = sig.rewrite_steps(e);
        if target < steps.len() && target != usize::MAX {
            let r = steps[target].clone();
            target = usize::MAX;
            r
        } else {
            if target != usize::MAX {
                target -= steps.len();
            }
            e.clone()
        }
    }))
}

/// Congruent `A ≅ A'` (by up to `picks.len()` equation steps) have
/// translations with equal HA2 normal forms.
pub fn check_conv_sound(a: &Formula, picks: &[usize]) -> Verdict {
    let sig = Signature::new();
    let mut b = a.clone();
    let mut moved = false;
    for &p in picks {
        if let Some(next) = rewrite_once(&b, &sig, p) {
            b = next;
            moved = true;
        }
    }
    if !moved {
        return Verdict::Vacuous;
    }
    let r = pole();
    let na = normalize_formula_ha2(&formula_bot(a, &r), &sig);
    let nb = normalize_formula_ha2(&formula_bot(&b, &r), &sig);
    if na.alpha_eq(&nb) {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("{a} ≅ {b}: {na} vs {nb}"))
    }
}

/// `(∀v A)^¬¬` and `∀v (A^¬¬)` have the same HA2 normal form.
pub fn check_conv_forall(a: &Formula, v: &str, second_order: Option<usize>) -> Verdict {
    let sig = Signature::new();
    let r = pole();
    let (quantified, outside) = match second_order {
        None => (
            Formula::all1(v, a.clone()),
            HFormula::all1(v, formula_nn(a, &r)),
        ),
        Some(k) => (
            Formula::all2(v, k, a.clone()),
            HFormula::all2(v, k, formula_nn(a, &r)),
        ),
    };
    let lhs = normalize_formula_ha2(&formula_nn(&quantified, &r), &sig);
    let rhs = normalize_formula_ha2(&outside, &sig);
    if lhs.alpha_eq(&rhs) {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("{quantified}: {lhs} vs {rhs}"))
    }
}

// ---------------------------------------------------------------------------
// Oracles

/// Guesses of the minimum-principle demo with `f(x) = |x - c|` and
/// `g(x) = 2x + 1`: iterate `g` from 0 until `f(x) ≤ f(g(x))`.
pub fn demo_oracle(c: u64) -> Vec<u64> {
    let f = |x: u64| x.abs_diff(c);
    let g = |x: u64| 2 * x + 1;
    let mut xs = vec![0];
    let mut x = 0;
    while f(x) > f(g(x)) {
        x = g(x);
        xs.push(x);
    }
    xs
}

/// Direct evaluation of built-in expressions; `None` on overflow past `cap`.
pub fn eval_u64(e: &ArithExpr, env: &dyn Fn(&str) -> u64, cap: u64) -> Option<u64> {
    let v = match e {
        ArithExpr::Var(x) => env(x),
        ArithExpr::Num(n) => u64::try_from(n).ok()?,
        ArithExpr::App(f, args) => {
            let vs = args
                .iter()
                .map(|a| eval_u64(a, env, cap))
                .collect::<Option<Vec<_>>>()?;
            match (f.as_str(), vs.as_slice()) {
                ("s", [a]) => a + 1,
                ("pred", [a]) => a.saturating_sub(1),
                ("neg", [a]) => u64::from(*a == 0),
                ("+", [a, b]) => a + b,
                ("*", [a, b]) => a.checked_mul(*b)?,
                ("minus", [a, b]) => a.saturating_sub(*b),
                _ => return None,
            }
        }
    };
    (v <= cap).then_some(v)
}
