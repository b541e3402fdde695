use crate::lex::{Cursor, ParseError, Tok};
use crate::syntax::Name;
use crate::util::{display_hint, hash_of, mix, name_bit, prime_until};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HConst {
    Pair,
    Fst,
    Snd,
    Zero,
    Succ,
    Rec,
}

impl HConst {
    pub const ALL: [HConst; 6] = [
        HConst::Pair,
        HConst::Fst,
        HConst::Snd,
        HConst::Zero,
        HConst::Succ,
        HConst::Rec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HConst::Pair => "pair",
            HConst::Fst => "fst",
            HConst::Snd => "snd",
            HConst::Zero => "z0",
            HConst::Succ => "sc",
            HConst::Rec => "rec",
        }
    }

    pub fn from_name(s: &str) -> Option<HConst> {
        HConst::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// A term of HA2, locally nameless; `==` is α-equivalence.
#[derive(Clone)]
pub struct HTerm(Arc<Node>);

struct Node {
    kind: HKind,
    loose: u32,
    fv: u64,
    hash: u64,
}

#[derive(Clone)]
pub(crate) enum HKind {
    Var(Name),
    Bound(u32),
    Lam(Name, HTerm),
    App(HTerm, HTerm),
    Const(HConst),
}

/// Read-only view with the binder opened.
#[derive(Debug, Clone)]
pub enum HView<'a> {
    Var(&'a str),
    Lam(String, HTerm),
    App(&'a HTerm, &'a HTerm),
    Const(HConst),
}

impl HTerm {
    fn mk(kind: HKind) -> HTerm {
        let (loose, fv, hash) = match &kind {
            HKind::Var(x) => (0, name_bit(x), mix(11, hash_of(&**x))),
            HKind::Bound(i) => (i + 1, 0, mix(12, *i as u64)),
            HKind::Lam(_, b) => (b.0.loose.saturating_sub(1), b.0.fv, mix(13, b.0.hash)),
            HKind::App(f, a) => (
                f.0.loose.max(a.0.loose),
                f.0.fv | a.0.fv,
                mix(mix(14, f.0.hash), a.0.hash),
            ),
            HKind::Const(c) => (0, 0, mix(15, *c as u64)),
        };
        HTerm(Arc::new(Node {
            kind,
            loose,
            fv,
            hash,
        }))
    }

    pub(crate) fn kind(&self) -> &HKind {
        &self.0.kind
    }

    pub fn var(x: impl AsRef<str>) -> HTerm {
        HTerm::mk(HKind::Var(Arc::from(x.as_ref())))
    }

    fn bound(i: u32) -> HTerm {
        HTerm::mk(HKind::Bound(i))
    }

    pub(crate) fn lam_raw(hint: Name, body: HTerm) -> HTerm {
        HTerm::mk(HKind::Lam(hint, body))
    }

    pub fn lam(x: impl AsRef<str>, body: HTerm) -> HTerm {
        let x = x.as_ref();
        HTerm::lam_raw(Arc::from(display_hint(x)), body.close(x, 0))
    }

    pub fn lams<S: AsRef<str>>(xs: &[S], body: HTerm) -> HTerm {
        xs.iter().rev().fold(body, |acc, x| HTerm::lam(x, acc))
    }

    pub fn app(f: HTerm, a: HTerm) -> HTerm {
        HTerm::mk(HKind::App(f, a))
    }

    pub fn apps(f: HTerm, args: impl IntoIterator<Item = HTerm>) -> HTerm {
        args.into_iter().fold(f, HTerm::app)
    }

    pub fn konst(c: HConst) -> HTerm {
        HTerm::mk(HKind::Const(c))
    }

    /// `⟨a;b⟩ ≡ pair a b`.
    pub fn pair(a: HTerm, b: HTerm) -> HTerm {
        HTerm::apps(HTerm::konst(HConst::Pair), [a, b])
    }

    pub fn fst(t: HTerm) -> HTerm {
        HTerm::app(HTerm::konst(HConst::Fst), t)
    }

    pub fn snd(t: HTerm) -> HTerm {
        HTerm::app(HTerm::konst(HConst::Snd), t)
    }

    pub fn zero() -> HTerm {
        HTerm::konst(HConst::Zero)
    }

    pub fn succ(t: HTerm) -> HTerm {
        HTerm::app(HTerm::konst(HConst::Succ), t)
    }

    /// `sⁿ 0` as nested applications.
    pub fn numeral(n: &BigUint) -> HTerm {
        let mut t = HTerm::zero();
        let mut k = n.clone();
        while !k.is_zero() {
            t = HTerm::succ(t);
            k -= 1u32;
        }
        t
    }

    pub fn view(&self) -> HView<'_> {
        match self.kind() {
            HKind::Var(x) => HView::Var(x),
            HKind::Bound(_) => panic!("dangling bound variable in a public HA2 term"),
            HKind::Lam(hint, body) => {
                let fv = body.free_vars();
                let x = prime_until(hint, |n| fv.contains(n));
                HView::Lam(x.clone(), body.open(&HTerm::var(&x)))
            }
            HKind::App(f, a) => HView::App(f, a),
            HKind::Const(c) => HView::Const(*c),
        }
    }

    pub fn as_app(&self) -> Option<(&HTerm, &HTerm)> {
        match self.kind() {
            HKind::App(f, a) => Some((f, a)),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<HConst> {
        match self.kind() {
            HKind::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.kind() {
            HKind::Var(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_lam(&self) -> bool {
        matches!(self.kind(), HKind::Lam(..))
    }

    /// Head and arguments of the application spine.
    pub fn spine(&self) -> (&HTerm, Vec<&HTerm>) {
        let mut args = Vec::new();
        let mut t = self;
        while let HKind::App(f, a) = t.kind() {
            args.push(a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// `n` when the term is literally `sⁿ 0`.
    pub fn as_numeral(&self) -> Option<BigUint> {
        let mut n = BigUint::zero();
        let mut t = self;
        loop {
            match t.kind() {
                HKind::Const(HConst::Zero) => return Some(n),
                HKind::App(f, a) if f.as_const() == Some(HConst::Succ) => {
                    n += 1u32;
                    t = a;
                }
                _ => return None,
            }
        }
    }

    /// Components of `pair a b`.
    pub fn as_pair(&self) -> Option<(&HTerm, &HTerm)> {
        let (f, b) = self.as_app()?;
        let (p, a) = f.as_app()?;
        (p.as_const() == Some(HConst::Pair)).then_some((a, b))
    }

    pub(crate) fn open(&self, u: &HTerm) -> HTerm {
        self.open_at(u, 0)
    }

    fn open_at(&self, u: &HTerm, depth: u32) -> HTerm {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            HKind::Bound(i) if *i == depth => u.clone(),
            HKind::Lam(h, b) => HTerm::lam_raw(h.clone(), b.open_at(u, depth + 1)),
            HKind::App(f, a) => HTerm::app(f.open_at(u, depth), a.open_at(u, depth)),
            _ => self.clone(),
        }
    }

    fn close(&self, x: &str, depth: u32) -> HTerm {
        if self.0.fv & name_bit(x) == 0 {
            return self.clone();
        }
        match self.kind() {
            HKind::Var(y) if &**y == x => HTerm::bound(depth),
            HKind::Lam(h, b) => HTerm::lam_raw(h.clone(), b.close(x, depth + 1)),
            HKind::App(f, a) => HTerm::app(f.close(x, depth), a.close(x, depth)),
            _ => self.clone(),
        }
    }

    /// Capture-avoiding `t{x:=u}`.
    pub fn substitute(&self, x: &str, u: &HTerm) -> HTerm {
        if self.0.fv & name_bit(x) == 0 {
            return self.clone();
        }
        match self.kind() {
            HKind::Var(y) if &**y == x => u.clone(),
            HKind::Lam(h, b) => HTerm::lam_raw(h.clone(), b.substitute(x, u)),
            HKind::App(f, a) => HTerm::app(f.substitute(x, u), a.substitute(x, u)),
            _ => self.clone(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            if t.0.fv == 0 {
                continue;
            }
            match t.kind() {
                HKind::Var(x) => {
                    out.insert(x.to_string());
                }
                HKind::Lam(_, b) => todo.push(b),
                HKind::App(f, a) => {
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

    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            n += 1;
            match t.kind() {
                HKind::Lam(_, b) => todo.push(b),
                HKind::App(f, a) => {
                    todo.push(f);
                    todo.push(a);
                }
                _ => {}
            }
        }
        n
    }

    pub(crate) fn ptr_eq(&self, other: &HTerm) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl PartialEq for HTerm {
    fn eq(&self, other: &HTerm) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (HKind::Var(a), HKind::Var(b)) => a == b,
            (HKind::Bound(a), HKind::Bound(b)) => a == b,
            (HKind::Lam(_, a), HKind::Lam(_, b)) => a == b,
            (HKind::App(f, a), HKind::App(g, b)) => f == g && a == b,
            (HKind::Const(a), HKind::Const(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for HTerm {}

impl std::hash::Hash for HTerm {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for HTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HTerm({self})")
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Prec {
    Top,
    Fun,
    Arg,
}

struct Printer {
    avoid: BTreeSet<String>,
    ctx: Vec<String>,
}

impl Printer {
    fn term(&mut self, t: &HTerm, prec: Prec, out: &mut String) {
        match t.kind() {
            HKind::Var(x) => out.push_str(x),
            HKind::Bound(i) => {
                let name = self
                    .ctx
                    .len()
                    .checked_sub(*i as usize + 1)
                    .map(|k| self.ctx[k].clone());
                out.push_str(name.as_deref().unwrap_or("?"));
            }
            HKind::Const(c) => out.push_str(c.name()),
            HKind::App(..) => {
                if let Some((a, b)) = t.as_pair() {
                    out.push('<');
                    self.term(a, Prec::Top, out);
                    out.push_str("; ");
                    self.term(b, Prec::Top, out);
                    out.push('>');
                    return;
                }
                let (head, args) = t.spine();
                if prec == Prec::Arg {
                    out.push('(');
                }
                self.term(head, Prec::Fun, out);
                for a in args {
                    out.push(' ');
                    self.term(a, Prec::Arg, out);
                }
                if prec == Prec::Arg {
                    out.push(')');
                }
            }
            HKind::Lam(..) => {
                if prec != Prec::Top {
                    out.push('(');
                }
                out.push('\\');
                let mark = self.ctx.len();
                let mut body = t;
                let mut first = true;
                while let HKind::Lam(hint, b) = body.kind() {
                    let name = prime_until(hint, |n| {
                        self.avoid.contains(n)
                            || self.ctx.iter().any(|c| c == n)
                            || HConst::from_name(n).is_some()
                    });
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str(&name);
                    self.ctx.push(name);
                    body = b;
                }
                out.push('.');
                self.term(body, Prec::Top, out);
                self.ctx.truncate(mark);
                if prec != Prec::Top {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for HTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        Printer {
            avoid: self.free_vars(),
            ctx: Vec::new(),
        }
        .term(self, Prec::Top, &mut out);
        f.write_str(&out)
    }
}

struct HParser {
    scope: Vec<String>,
}

impl HParser {
    fn term(&mut self, c: &mut Cursor) -> Result<HTerm, ParseError> {
        if c.eat(&Tok::Backslash) {
            let mut xs = vec![c.ident()?];
            while let Tok::Ident(_) = c.peek() {
                xs.push(c.ident()?);
            }
            c.expect(&Tok::Dot)?;
            let mark = self.scope.len();
            self.scope.extend(xs.iter().cloned());
            let body = self.term(c);
            self.scope.truncate(mark);
            return Ok(HTerm::lams(&xs, body?));
        }
        let mut t = self.atom(c)?;
        while matches!(
            c.peek(),
            Tok::Ident(_) | Tok::Nat(_) | Tok::LParen | Tok::Lt | Tok::Backslash
        ) {
            let a = if *c.peek() == Tok::Backslash {
                self.term(c)?
            } else {
                self.atom(c)?
            };
            t = HTerm::app(t, a);
        }
        Ok(t)
    }

    fn atom(&mut self, c: &mut Cursor) -> Result<HTerm, ParseError> {
        match c.peek().clone() {
            Tok::Ident(x) => {
                c.bump();
                if !self.scope.contains(&x) {
                    if let Some(k) = HConst::from_name(&x) {
                        return Ok(HTerm::konst(k));
                    }
                }
                Ok(HTerm::var(x))
            }
            Tok::Nat(n) => {
                c.bump();
                Ok(HTerm::numeral(&n))
            }
            Tok::LParen => {
                c.bump();
                let t = self.term(c)?;
                c.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Lt => {
                c.bump();
                let a = self.term(c)?;
                c.expect(&Tok::Semi)?;
                let b = self.term(c)?;
                c.expect(&Tok::Gt)?;
                Ok(HTerm::pair(a, b))
            }
            _ => Err(c.unexpected("an HA2 term")),
        }
    }
}

pub fn parse_hterm_at(c: &mut Cursor) -> Result<HTerm, ParseError> {
    HParser { scope: Vec::new() }.term(c)
}

/// Parses `\x.t`, juxtaposition, `<t; u>`, the constants
/// `pair fst snd z0 sc rec`, and decimal numerals as `sⁿ 0`.
pub fn parse_hterm(text: &str) -> Result<HTerm, ParseError> {
    let mut c = Cursor::new(text)?;
    let t = parse_hterm_at(&mut c)?;
    c.finish()?;
    Ok(t)
}

impl std::str::FromStr for HTerm {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_hterm(s)
    }
}
