use crate::util::{display_hint, hash_of, mix, name_bit, prime_until};
use num_bigint::BigUint;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub type Name = Arc<str>;

/// A λc term in locally nameless form.
///
/// Binders keep their source name only as a printing hint; equality and
/// hashing ignore it, so `==` is α-equivalence.
#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: Kind,
    /// One more than the largest dangling de Bruijn index, 0 if locally closed.
    loose: u32,
    /// Bloom filter of free variable names.
    fv: u64,
    kont: bool,
    hash: u64,
}

#[derive(Clone)]
pub(crate) enum Kind {
    Var(Name),
    Bound(u32),
    Lam(Name, Term),
    App(Term, Term),
    Inst(Name),
    Numeral(BigUint),
    Kont(Stack),
}

/// A read-only view of a term with binders opened to named variables.
#[derive(Debug, Clone)]
pub enum TermView<'a> {
    Var(&'a str),
    Lam(String, Term),
    App(&'a Term, &'a Term),
    Inst(&'a str),
    Numeral(&'a BigUint),
    Kont(&'a Stack),
}

static FRESH: AtomicU64 = AtomicU64::new(0);

/// A variable name that cannot clash with any parsed identifier.
pub fn fresh_name(hint: &str) -> String {
    let k = FRESH.fetch_add(1, Ordering::Relaxed);
    format!("{}%{k}", display_hint(hint))
}

impl Term {
    fn mk(kind: Kind) -> Term {
        let (loose, fv, kont, hash) = match &kind {
            Kind::Var(x) => (0, name_bit(x), false, mix(1, hash_of(&**x))),
            Kind::Bound(i) => (i + 1, 0, false, mix(2, *i as u64)),
            Kind::Lam(_, b) => (
                b.0.loose.saturating_sub(1),
                b.0.fv,
                b.0.kont,
                mix(3, b.0.hash),
            ),
            Kind::App(f, a) => (
                f.0.loose.max(a.0.loose),
                f.0.fv | a.0.fv,
                f.0.kont || a.0.kont,
                mix(mix(4, f.0.hash), a.0.hash),
            ),
            Kind::Inst(n) => (0, 0, false, mix(5, hash_of(&**n))),
            Kind::Numeral(n) => (0, 0, false, mix(6, hash_of(n))),
            Kind::Kont(s) => (0, 0, true, mix(7, s.hash())),
        };
        Term(Arc::new(Node {
            kind,
            loose,
            fv,
            kont,
            hash,
        }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn var(name: impl AsRef<str>) -> Term {
        Term::mk(Kind::Var(Arc::from(name.as_ref())))
    }

    pub(crate) fn bound(i: u32) -> Term {
        Term::mk(Kind::Bound(i))
    }

    pub(crate) fn lam_raw(hint: Name, body: Term) -> Term {
        Term::mk(Kind::Lam(hint, body))
    }

    /// `λx.body`, binding the free occurrences of `x` in `body`.
    pub fn lam(x: impl AsRef<str>, body: Term) -> Term {
        let x = x.as_ref();
        let hint: Name = Arc::from(display_hint(x));
        Term::lam_raw(hint, body.close(x, 0))
    }

    /// `λx₁…xₙ.body`.
    pub fn lams<S: AsRef<str>>(xs: &[S], body: Term) -> Term {
        xs.iter().rev().fold(body, |acc, x| Term::lam(x, acc))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::mk(Kind::App(f, a))
    }

    /// Left-nested application `f a₁ … aₙ`.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn inst(name: impl AsRef<str>) -> Term {
        Term::mk(Kind::Inst(Arc::from(name.as_ref())))
    }

    pub fn num(n: impl Into<BigUint>) -> Term {
        Term::mk(Kind::Numeral(n.into()))
    }

    pub fn kont(saved: Stack) -> Term {
        Term::mk(Kind::Kont(saved))
    }

    /// Opens binders with names that are not free in the body.
    pub fn view(&self) -> TermView<'_> {
        match self.kind() {
            Kind::Var(x) => TermView::Var(x),
            Kind::Bound(_) => panic!("dangling bound variable in a public term"),
            Kind::Lam(hint, body) => {
                let fv = body.free_vars();
                let x = prime_until(hint, |n| fv.contains(n));
                TermView::Lam(x.clone(), body.open(&Term::var(&x)))
            }
            Kind::App(f, a) => TermView::App(f, a),
            Kind::Inst(n) => TermView::Inst(n),
            Kind::Numeral(n) => TermView::Numeral(n),
            Kind::Kont(s) => TermView::Kont(s),
        }
    }

    pub fn as_numeral(&self) -> Option<&BigUint> {
        match self.kind() {
            Kind::Numeral(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_inst(&self) -> Option<&str> {
        match self.kind() {
            Kind::Inst(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.kind() {
            Kind::Var(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Term, &Term)> {
        match self.kind() {
            Kind::App(f, a) => Some((f, a)),
            _ => None,
        }
    }

    pub fn is_lam(&self) -> bool {
        matches!(self.kind(), Kind::Lam(..))
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Kind::App(f, a) = t.kind() {
            args.push(a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Replaces the dangling index `0` of a binder body by `u`.
    pub(crate) fn open(&self, u: &Term) -> Term {
        self.open_at(u, 0)
    }

    fn open_at(&self, u: &Term, depth: u32) -> Term {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            Kind::Bound(i) if *i == depth => u.clone(),
            Kind::Bound(_) => self.clone(),
            Kind::Lam(h, b) => Term::lam_raw(h.clone(), b.open_at(u, depth + 1)),
            Kind::App(f, a) => Term::app(f.open_at(u, depth), a.open_at(u, depth)),
            _ => self.clone(),
        }
    }

    fn close(&self, x: &str, depth: u32) -> Term {
        if self.0.fv & name_bit(x) == 0 {
            return self.clone();
        }
        match self.kind() {
            Kind::Var(y) if &**y == x => Term::bound(depth),
            Kind::Lam(h, b) => Term::lam_raw(h.clone(), b.close(x, depth + 1)),
            Kind::App(f, a) => Term::app(f.close(x, depth), a.close(x, depth)),
            _ => self.clone(),
        }
    }

    /// Capture-avoiding substitution `t{x:=u}`.
    pub fn substitute(&self, x: &str, u: &Term) -> Term {
        if self.0.fv & name_bit(x) == 0 {
            return self.clone();
        }
        match self.kind() {
            Kind::Var(y) if &**y == x => u.clone(),
            Kind::Lam(h, b) => Term::lam_raw(h.clone(), b.substitute(x, u)),
            Kind::App(f, a) => Term::app(f.substitute(x, u), a.substitute(x, u)),
            _ => self.clone(),
        }
    }

    /// Simultaneous substitution of several free names.
    pub fn substitute_many(&self, map: &HashMap<String, Term>) -> Term {
        let mask = map.keys().fold(0u64, |m, k| m | name_bit(k));
        self.subst_many(map, mask)
    }

    fn subst_many(&self, map: &HashMap<String, Term>, mask: u64) -> Term {
        if self.0.fv & mask == 0 {
            return self.clone();
        }
        match self.kind() {
            Kind::Var(y) => map.get(&**y).cloned().unwrap_or_else(|| self.clone()),
            Kind::Lam(h, b) => Term::lam_raw(h.clone(), b.subst_many(map, mask)),
            Kind::App(f, a) => Term::app(f.subst_many(map, mask), a.subst_many(map, mask)),
            _ => self.clone(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut out);
        out
    }

    fn collect_fv(&self, out: &mut BTreeSet<String>) {
        if self.0.fv == 0 {
            return;
        }
        match self.kind() {
            Kind::Var(x) => {
                out.insert(x.to_string());
            }
            Kind::Lam(_, b) => b.collect_fv(out),
            Kind::App(f, a) => {
                f.collect_fv(out);
                a.collect_fv(out);
            }
            _ => {}
        }
    }

    /// Instruction names occurring in the term, continuations excluded.
    pub fn instructions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            match t.kind() {
                Kind::Inst(n) => {
                    out.insert(n.to_string());
                }
                Kind::Lam(_, b) => todo.push(b),
                Kind::App(f, a) => {
                    todo.push(f);
                    todo.push(a);
                }
                _ => {}
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.0.fv == 0 && self.0.loose == 0
    }

    /// A term is proof-like when it contains no continuation constant.
    pub fn is_proof_like(&self) -> bool {
        !self.0.kont
    }

    pub fn size(&self) -> usize {
        match self.kind() {
            Kind::Lam(_, b) => 1 + b.size(),
            Kind::App(f, a) => 1 + f.size() + a.size(),
            _ => 1,
        }
    }

    /// `t{⋄:=π₀}`.
    pub fn extend_bottom(&self, pi0: &Stack) -> Term {
        if !self.0.kont {
            return self.clone();
        }
        match self.kind() {
            Kind::Lam(h, b) => Term::lam_raw(h.clone(), b.extend_bottom(pi0)),
            Kind::App(f, a) => Term::app(f.extend_bottom(pi0), a.extend_bottom(pi0)),
            Kind::Kont(s) => Term::kont(s.extend_bottom(pi0)),
            _ => self.clone(),
        }
    }

    pub(crate) fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Bound(a), Kind::Bound(b)) => a == b,
            (Kind::Lam(_, a), Kind::Lam(_, b)) => a == b,
            (Kind::App(f, a), Kind::App(g, b)) => f == g && a == b,
            (Kind::Inst(a), Kind::Inst(b)) => a == b,
            (Kind::Numeral(a), Kind::Numeral(b)) => a == b,
            (Kind::Kont(a), Kind::Kont(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

/// A stack of closed terms over the bottom constant `⋄`.
#[derive(Clone, Default)]
pub struct Stack(Option<Arc<Cell>>);

struct Cell {
    top: Term,
    rest: Stack,
    len: usize,
    kont: bool,
    hash: u64,
}

impl Stack {
    pub fn bottom() -> Stack {
        Stack(None)
    }

    pub fn cons(top: Term, rest: Stack) -> Stack {
        let cell = Cell {
            len: rest.len() + 1,
            kont: top.0.kont || rest.has_kont(),
            hash: mix(top.0.hash, rest.hash()),
            top,
            rest,
        };
        Stack(Some(Arc::new(cell)))
    }

    /// Pushes `t` on top of `self`.
    pub fn push(&self, t: Term) -> Stack {
        Stack::cons(t, self.clone())
    }

    /// Builds `t₁·t₂·…·tₙ·rest` from a top-first slice.
    pub fn from_terms(items: impl IntoIterator<Item = Term>, rest: Stack) -> Stack {
        let items: Vec<Term> = items.into_iter().collect();
        items.into_iter().rev().fold(rest, |s, t| s.push(t))
    }

    pub fn top(&self) -> Option<&Term> {
        self.0.as_ref().map(|c| &c.top)
    }

    pub fn pop(&self) -> Option<(&Term, &Stack)> {
        self.0.as_ref().map(|c| (&c.top, &c.rest))
    }

    pub fn is_bottom(&self) -> bool {
        self.0.is_none()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |c| c.len)
    }

    pub fn is_empty(&self) -> bool {
        self.is_bottom()
    }

    pub fn iter(&self) -> StackIter<'_> {
        StackIter(self)
    }

    pub fn has_kont(&self) -> bool {
        self.0.as_ref().is_some_and(|c| c.kont)
    }

    fn hash(&self) -> u64 {
        self.0.as_ref().map_or(0x5eed, |c| c.hash)
    }

    /// `π{⋄:=π₀}`.
    pub fn extend_bottom(&self, pi0: &Stack) -> Stack {
        let items: Vec<Term> = self.iter().map(|t| t.extend_bottom(pi0)).collect();
        Stack::from_terms(items, pi0.clone())
    }

    /// `n` terms from the top, if available, and the remaining stack.
    pub fn take(&self, n: usize) -> Option<(Vec<&Term>, &Stack)> {
        let mut out = Vec::with_capacity(n);
        let mut s = self;
        for _ in 0..n {
            let (t, rest) = s.pop()?;
            out.push(t);
            s = rest;
        }
        Some((out, s))
    }
}

pub struct StackIter<'a>(&'a Stack);

impl<'a> Iterator for StackIter<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let (t, rest) = self.0.pop()?;
        self.0 = rest;
        Some(t)
    }
}

impl PartialEq for Stack {
    fn eq(&self, other: &Stack) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                Arc::ptr_eq(a, b)
                    || (a.hash == b.hash && a.len == b.len && self.iter().eq(other.iter()))
            }
            _ => false,
        }
    }
}

impl Eq for Stack {}

impl std::hash::Hash for Stack {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash());
    }
}

impl fmt::Debug for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stack({self})")
    }
}

/// A process `t ⋆ π`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Process {
    pub head: Term,
    pub stack: Stack,
}

impl Process {
    pub fn new(head: Term, stack: Stack) -> Process {
        Process { head, stack }
    }

    pub fn extend_bottom(&self, pi0: &Stack) -> Process {
        Process::new(self.head.extend_bottom(pi0), self.stack.extend_bottom(pi0))
    }

    pub fn is_proof_like(&self) -> bool {
        self.head.is_proof_like() && !self.stack.has_kont()
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Process({self})")
    }
}

/// Anything the stack-extension substitution applies to.
pub trait ExtendBottom {
    fn extend_bottom_with(&self, pi0: &Stack) -> Self;
}

impl ExtendBottom for Term {
    fn extend_bottom_with(&self, pi0: &Stack) -> Term {
        self.extend_bottom(pi0)
    }
}

impl ExtendBottom for Stack {
    fn extend_bottom_with(&self, pi0: &Stack) -> Stack {
        self.extend_bottom(pi0)
    }
}

impl ExtendBottom for Process {
    fn extend_bottom_with(&self, pi0: &Stack) -> Process {
        self.extend_bottom(pi0)
    }
}

pub fn extend_stack_bottom<T: ExtendBottom>(subject: &T, pi0: &Stack) -> T {
    subject.extend_bottom_with(pi0)
}

pub fn substitute(t: &Term, x: &str, u: &Term) -> Term {
    t.substitute(x, u)
}

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    t.free_vars()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lam_is_alpha_invariant() {
        let a = Term::lam("x", Term::var("x"));
        let b = Term::lam("y", Term::var("y"));
        assert_eq!(a, b);
        assert_ne!(a, Term::lam("x", Term::var("y")));
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(
            Term::var("x").substitute("x", &Term::num(2u32)),
            Term::num(2u32)
        );
        let id = Term::lam("x", Term::var("x"));
        assert_eq!(id.substitute("x", &Term::inst("cc")), id);
        let t = Term::lam("y", Term::app(Term::var("x"), Term::var("y")));
        let r = t.substitute("x", &Term::var("y"));
        assert_eq!(r.to_string(), "\\y'.y y'");
    }

    #[test]
    fn extension_examples() {
        let pi0 = Stack::bottom().push(Term::num(1u32));
        assert_eq!(Stack::bottom().extend_bottom(&pi0), pi0);
        assert_eq!(Term::inst("cc").extend_bottom(&pi0), Term::inst("cc"));
        assert_eq!(
            Term::kont(Stack::bottom()).extend_bottom(&pi0),
            Term::kont(pi0.clone())
        );
    }

    #[test]
    fn free_var_examples() {
        let t = Term::lam("x", Term::app(Term::var("x"), Term::var("y")));
        assert_eq!(t.free_vars().into_iter().collect::<Vec<_>>(), vec!["y"]);
        assert!(Term::inst("rec").is_proof_like() && Term::inst("rec").is_closed());
        let k = Term::kont(Stack::bottom());
        assert!(k.free_vars().is_empty() && !k.is_proof_like());
    }

    #[test]
    fn view_opens_with_unused_name() {
        let t = Term::lam("x", Term::app(Term::var("x"), Term::var("x'")));
        let t = t.substitute("x'", &Term::var("x"));
        match t.view() {
            TermView::Lam(x, body) => {
                assert_eq!(x, "x'");
                assert_eq!(body, Term::app(Term::var("x'"), Term::var("x")));
            }
            _ => unreachable!(),
        }
    }
}
