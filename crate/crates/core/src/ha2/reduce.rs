use super::term::{HConst, HKind, HTerm};
use crate::syntax::fresh_name;
use std::collections::{HashMap, HashSet};

/// One step of a path from the root to a subterm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    Fun,
    Arg,
    Body,
}

pub type Path = Vec<Dir>;

/// Contracts the term itself when it is a redex.
pub fn contract_root(t: &HTerm) -> Option<HTerm> {
    let (f, a) = t.as_app()?;
    if let HKind::Lam(_, body) = f.kind() {
        return Some(body.open(a));
    }
    match f.as_const() {
        Some(HConst::Fst) => return a.as_pair().map(|(x, _)| x.clone()),
        Some(HConst::Snd) => return a.as_pair().map(|(_, y)| y.clone()),
        _ => {}
    }
    let (f1, u1) = f.as_app()?;
    let (r, u0) = f1.as_app()?;
    if r.as_const() != Some(HConst::Rec) {
        return None;
    }
    match nat_shape(a)? {
        None => Some(u0.clone()),
        Some(p) => {
            let again = HTerm::apps(
                HTerm::konst(HConst::Rec),
                [u0.clone(), u1.clone(), p.clone()],
            );
            Some(HTerm::apps(u1.clone(), [p.clone(), again]))
        }
    }
}

/// `Some(None)` for `0`, `Some(Some(t))` for `s t`.
fn nat_shape(t: &HTerm) -> Option<Option<&HTerm>> {
    match t.kind() {
        HKind::Const(HConst::Zero) => Some(None),
        HKind::App(f, p) if f.as_const() == Some(HConst::Succ) => Some(Some(p)),
        _ => None,
    }
}

pub fn subterm<'a>(t: &'a HTerm, path: &[Dir]) -> Option<&'a HTerm> {
    let mut t = t;
    for d in path {
        t = match (d, t.kind()) {
            (Dir::Fun, HKind::App(f, _)) => f,
            (Dir::Arg, HKind::App(_, a)) => a,
            (Dir::Body, HKind::Lam(_, b)) => b,
            _ => return None,
        };
    }
    Some(t)
}

/// Contracts the redex at `path`; paths through a binder open it with a
/// fresh variable and close it again.
pub fn contract_at(t: &HTerm, path: &[Dir]) -> Option<HTerm> {
    let Some((d, rest)) = path.split_first() else {
        return contract_root(t);
    };
    match (d, t.kind()) {
        (Dir::Fun, HKind::App(f, a)) => Some(HTerm::app(contract_at(f, rest)?, a.clone())),
        (Dir::Arg, HKind::App(f, a)) => Some(HTerm::app(f.clone(), contract_at(a, rest)?)),
        (Dir::Body, HKind::Lam(hint, body)) => {
            let x = fresh_name("b");
            let inner = contract_at(&body.open(&HTerm::var(&x)), rest)?;
            let lam = HTerm::lam(&x, inner);
            let HKind::Lam(_, closed) = lam.kind() else {
                unreachable!()
            };
            Some(HTerm::lam_raw(hint.clone(), closed.clone()))
        }
        _ => None,
    }
}

fn collect(t: &HTerm, under_lam: bool, path: &mut Path, weak: bool, out: &mut Vec<Path>) {
    if contract_root(t).is_some() && (weak != under_lam) {
        out.push(path.clone());
    }
    match t.kind() {
        HKind::App(f, a) => {
            path.push(Dir::Fun);
            collect(f, under_lam, path, weak, out);
            path.pop();
            path.push(Dir::Arg);
            collect(a, under_lam, path, weak, out);
            path.pop();
        }
        HKind::Lam(_, b) if !weak => {
            path.push(Dir::Body);
            collect(b, true, path, weak, out);
            path.pop();
        }
        _ => {}
    }
}

/// Every weak redex (not below a λ), in leftmost-outermost order.
pub fn enumerate_weak_redexes(t: &HTerm) -> Vec<Path> {
    let mut out = Vec::new();
    collect(t, false, &mut Vec::new(), true, &mut out);
    out
}

/// Every inner redex (below at least one λ), in leftmost-outermost order.
pub fn enumerate_inner_redexes(t: &HTerm) -> Vec<Path> {
    let mut out = Vec::new();
    collect(t, false, &mut Vec::new(), false, &mut out);
    out
}

pub fn weak_reducts(t: &HTerm) -> Vec<HTerm> {
    enumerate_weak_redexes(t)
        .iter()
        .filter_map(|p| contract_at(t, p))
        .collect()
}

pub fn inner_reducts(t: &HTerm) -> Vec<HTerm> {
    enumerate_inner_redexes(t)
        .iter()
        .filter_map(|p| contract_at(t, p))
        .collect()
}

/// The leftmost-outermost weak step.
pub fn weak_step(t: &HTerm) -> Option<(HTerm, Path)> {
    fn go(t: &HTerm, path: &mut Path) -> Option<HTerm> {
        if let Some(r) = contract_root(t) {
            return Some(r);
        }
        let (f, a) = t.as_app()?;
        path.push(Dir::Fun);
        if let Some(f2) = go(f, path) {
            return Some(HTerm::app(f2, a.clone()));
        }
        path.pop();
        path.push(Dir::Arg);
        if let Some(a2) = go(a, path) {
            return Some(HTerm::app(f.clone(), a2));
        }
        path.pop();
        None
    }
    let mut path = Vec::new();
    go(t, &mut path).map(|r| (r, path))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Until {
    Normal,
    Nat,
    Pair,
}

impl Until {
    fn reached(self, head: &HTerm, nargs: usize) -> bool {
        match self {
            Until::Normal => false,
            Until::Nat => matches!(
                (head.as_const(), nargs),
                (Some(HConst::Zero), 0) | (Some(HConst::Succ), 1)
            ),
            Until::Pair => head.as_const() == Some(HConst::Pair) && nargs == 2,
        }
    }
}

struct Budget {
    steps: u64,
    fuel: u64,
}

impl Budget {
    fn spent(&self) -> bool {
        self.steps >= self.fuel
    }
}

fn rebuild(head: HTerm, args: impl IntoIterator<Item = HTerm>) -> HTerm {
    HTerm::apps(head, args)
}

/// Contracts the redex formed by the spine head and its first arguments.
fn head_contract(head: &HTerm, args: &[HTerm]) -> Option<(HTerm, usize)> {
    match head.kind() {
        HKind::Lam(_, body) if !args.is_empty() => Some((body.open(&args[0]), 1)),
        HKind::Const(HConst::Fst) if !args.is_empty() => {
            args[0].as_pair().map(|(a, _)| (a.clone(), 1))
        }
        HKind::Const(HConst::Snd) if !args.is_empty() => {
            args[0].as_pair().map(|(_, b)| (b.clone(), 1))
        }
        HKind::Const(HConst::Rec) if args.len() >= 3 => match nat_shape(&args[2])? {
            None => Some((args[0].clone(), 3)),
            Some(p) => {
                let again =
                    HTerm::apps(head.clone(), [args[0].clone(), args[1].clone(), p.clone()]);
                Some((HTerm::apps(args[1].clone(), [p.clone(), again]), 3))
            }
        },
        _ => None,
    }
}

fn critical(head: &HTerm, nargs: usize) -> Option<(usize, Until)> {
    match head.as_const() {
        Some(HConst::Rec) if nargs >= 3 => Some((2, Until::Nat)),
        Some(HConst::Fst | HConst::Snd) if nargs >= 1 => Some((0, Until::Pair)),
        _ => None,
    }
}

/// Leftmost-outermost weak normalization on application spines; performs
/// exactly the steps `weak_step` would, in the same order.
fn norm(t: HTerm, until: Until, b: &mut Budget) -> HTerm {
    let mut t = t;
    'outer: loop {
        let (head, args) = {
            let (h, a) = t.spine();
            (h.clone(), a.into_iter().cloned().collect::<Vec<_>>())
        };
        if until.reached(&head, args.len()) {
            return t;
        }
        if let Some((r, used)) = head_contract(&head, &args) {
            if b.spent() {
                return t;
            }
            b.steps += 1;
            t = rebuild(r, args[used..].iter().cloned());
            continue;
        }
        let crit = critical(&head, args.len());
        let mut args = args;
        for i in 0..args.len() {
            let mode = match crit {
                Some((j, m)) if j == i => m,
                _ => Until::Normal,
            };
            let a = std::mem::replace(&mut args[i], HTerm::zero());
            args[i] = norm(a, mode, b);
            if mode != Until::Normal {
                let (h, a) = args[i].spine();
                if mode.reached(h, a.len()) {
                    t = rebuild(head, args);
                    continue 'outer;
                }
            }
            if b.spent() {
                return rebuild(head, args);
            }
        }
        return rebuild(head, args);
    }
}

/// Iterates leftmost-outermost weak steps up to `fuel`; returns the reached
/// term and the number of steps.
pub fn weak_reduce(t: &HTerm, fuel: u64) -> (HTerm, u64) {
    let mut b = Budget { steps: 0, fuel };
    let r = norm(t.clone(), Until::Normal, &mut b);
    (r, b.steps)
}

/// Weak leftmost-outermost reduction that stops as soon as the term is a
/// pair `⟨a;b⟩`.
pub fn weak_reduce_to_pair(t: &HTerm, fuel: u64) -> (HTerm, u64) {
    let mut b = Budget { steps: 0, fuel };
    let r = norm(t.clone(), Until::Pair, &mut b);
    (r, b.steps)
}

pub fn is_weak_normal(t: &HTerm) -> bool {
    weak_step(t).is_none()
}

/// Verdict of a bounded equality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EqResult {
    Equal,
    NotEqual,
    /// Fuel ran out before a verdict.
    Unknown,
}

impl EqResult {
    fn and(self, other: impl FnOnce() -> EqResult) -> EqResult {
        match self {
            EqResult::NotEqual => EqResult::NotEqual,
            EqResult::Equal => other(),
            EqResult::Unknown => match other() {
                EqResult::NotEqual => EqResult::NotEqual,
                _ => EqResult::Unknown,
            },
        }
    }
}

pub const DEFAULT_EQ_FUEL: u64 = 10_000;

/// Head step towards weak head normal form, reducing the scrutinee of a
/// stuck `rec`/`fst`/`snd` first. Never goes below a λ.
fn head_step(t: &HTerm) -> Option<HTerm> {
    let (head, args) = t.spine();
    let args: Vec<HTerm> = args.into_iter().cloned().collect();
    if let Some((r, used)) = head_contract(head, &args) {
        return Some(rebuild(r, args[used..].iter().cloned()));
    }
    let (i, _) = critical(head, args.len())?;
    let inner = head_step(&args[i])?;
    let mut args = args;
    args[i] = inner;
    Some(rebuild(head.clone(), args))
}

fn peel(a: &HTerm, b: &HTerm) -> Option<(HTerm, HTerm)> {
    match (a.kind(), b.kind()) {
        (HKind::Lam(_, x), HKind::Lam(_, y)) => {
            let v = HTerm::var(fresh_name("c"));
            Some((x.open(&v), y.open(&v)))
        }
        _ => None,
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum HeadKey {
    Var(String),
    Const(HConst),
}

fn head_key(t: &HTerm) -> Option<(HeadKey, usize)> {
    let (h, args) = t.spine();
    let key = match h.kind() {
        HKind::Var(x) => HeadKey::Var(x.to_string()),
        HKind::Const(c) => HeadKey::Const(*c),
        _ => return None,
    };
    Some((key, args.len()))
}

/// The reducts met so far on one side of a conversion check.
struct Side {
    cur: HTerm,
    seen: HashSet<HTerm>,
    by_head: HashMap<(HeadKey, usize), Vec<HTerm>>,
}

impl Side {
    fn new(t: HTerm) -> Side {
        let mut s = Side {
            cur: t.clone(),
            seen: HashSet::new(),
            by_head: HashMap::new(),
        };
        s.record(t);
        s
    }

    fn record(&mut self, t: HTerm) {
        if let Some(k) = head_key(&t) {
            self.by_head.entry(k).or_default().push(t.clone());
        }
        self.seen.insert(t);
    }
}

const CONGRUENCE_SHARE: u64 = 4;

/// Tries `x ≡ y` argument-wise for spines with the same rigid head.
fn congruent(x: &HTerm, y: &HTerm, fuel: &mut u64) -> bool {
    let (_, xs) = x.spine();
    let (_, ys) = y.spine();
    let mut sub = *fuel / CONGRUENCE_SHARE;
    let before = sub;
    let ok = xs
        .iter()
        .zip(&ys)
        .all(|(p, q)| convertible(p, q, &mut sub) == EqResult::Equal);
    *fuel -= before - sub;
    ok
}

/// βρ-conversion of two terms, reducing anywhere.
fn convertible(a: &HTerm, b: &HTerm, fuel: &mut u64) -> EqResult {
    let (mut a, mut b) = (a.clone(), b.clone());
    while let Some((x, y)) = peel(&a, &b) {
        a = x;
        b = y;
    }
    if a == b {
        return EqResult::Equal;
    }
    let mut sa = Side::new(a);
    let mut sb = Side::new(b);
    loop {
        if sa.cur == sb.cur || sb.seen.contains(&sa.cur) || sa.seen.contains(&sb.cur) {
            return EqResult::Equal;
        }
        if sa.cur.is_lam() && sb.cur.is_lam() {
            return convertible(&sa.cur, &sb.cur, fuel);
        }
        let na = if sa.cur.is_lam() {
            None
        } else {
            head_step(&sa.cur)
        };
        let nb = if sb.cur.is_lam() {
            None
        } else {
            head_step(&sb.cur)
        };
        if na.is_none() && nb.is_none() {
            return compare_whnf(&sa.cur, &sb.cur, fuel);
        }
        if *fuel == 0 {
            return EqResult::Unknown;
        }
        *fuel = fuel.saturating_sub(u64::from(na.is_some()) + u64::from(nb.is_some()));
        if advance(na, &mut sa, &sb, fuel) || advance(nb, &mut sb, &sa, fuel) {
            return EqResult::Equal;
        }
    }
}

/// Moves one side to its reduct; true when the reduct is congruent to a
/// term already met on the other side.
fn advance(next: Option<HTerm>, me: &mut Side, other: &Side, fuel: &mut u64) -> bool {
    let Some(t) = next else { return false };
    if let Some(k) = head_key(&t) {
        for c in other.by_head.get(&k).into_iter().flatten() {
            if congruent(&t, c, fuel) {
                return true;
            }
        }
    }
    me.record(t.clone());
    me.cur = t;
    false
}

fn compare_whnf(a: &HTerm, b: &HTerm, fuel: &mut u64) -> EqResult {
    if a.is_lam() || b.is_lam() {
        return EqResult::NotEqual;
    }
    let (ha, aa) = a.spine();
    let (hb, ab) = b.spine();
    let same_head = match (ha.kind(), hb.kind()) {
        (HKind::Var(x), HKind::Var(y)) => x == y,
        (HKind::Const(x), HKind::Const(y)) => x == y,
        _ => false,
    };
    if !same_head || aa.len() != ab.len() {
        return EqResult::NotEqual;
    }
    let mut verdict = EqResult::Equal;
    for (x, y) in aa.into_iter().zip(ab) {
        verdict = verdict.and(|| convertible(x, y, fuel));
        if verdict == EqResult::NotEqual {
            break;
        }
    }
    verdict
}

fn inner_eq(t: &HTerm, u: &HTerm, fuel: &mut u64) -> EqResult {
    if t == u {
        return EqResult::Equal;
    }
    match (t.kind(), u.kind()) {
        (HKind::Lam(..), HKind::Lam(..)) => convertible(t, u, fuel),
        (HKind::App(f, a), HKind::App(g, b)) => inner_eq(f, g, fuel).and(|| inner_eq(a, b, fuel)),
        _ => EqResult::NotEqual,
    }
}

/// Decides `t =ᵢ u` within `fuel` reduction steps: outside every λ the
/// terms must coincide, and below a λ they must be convertible.
pub fn inner_equal(t: &HTerm, u: &HTerm, fuel: u64) -> EqResult {
    let mut fuel = fuel;
    inner_eq(t, u, &mut fuel)
}
