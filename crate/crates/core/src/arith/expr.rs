use super::ArithError;
use crate::lex::{Cursor, ParseError, Tok};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A first-order arithmetic expression.
///
/// `Num(n)` is the compact form of `sⁿ(0)`; the smart constructor
/// [`ArithExpr::app`] folds `0` and `s` applied to literals into it, so
/// structural equality never distinguishes the two spellings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithExpr {
    Var(String),
    App(String, Vec<ArithExpr>),
    Num(BigUint),
}

impl ArithExpr {
    pub fn var(x: impl Into<String>) -> Self {
        ArithExpr::Var(x.into())
    }

    pub fn num(n: impl Into<BigUint>) -> Self {
        ArithExpr::Num(n.into())
    }

    pub fn app(sym: impl Into<String>, args: Vec<ArithExpr>) -> Self {
        let sym = sym.into();
        match (sym.as_str(), args.as_slice()) {
            ("0", []) => ArithExpr::Num(BigUint::zero()),
            ("s", [ArithExpr::Num(n)]) => ArithExpr::Num(n + 1u32),
            _ => ArithExpr::App(sym, args),
        }
    }

    pub fn succ(e: ArithExpr) -> Self {
        ArithExpr::app("s", vec![e])
    }

    pub fn call2(sym: &str, a: ArithExpr, b: ArithExpr) -> Self {
        ArithExpr::app(sym, vec![a, b])
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            ArithExpr::Var(x) => {
                out.insert(x.clone());
            }
            ArithExpr::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            ArithExpr::Num(_) => {}
        }
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(e) = todo.pop() {
            if let ArithExpr::App(f, args) = e {
                out.insert(f.clone());
                todo.extend(args);
            }
        }
        out
    }

    pub fn subst(&self, x: &str, e: &ArithExpr) -> ArithExpr {
        match self {
            ArithExpr::Var(y) if y == x => e.clone(),
            ArithExpr::App(f, args) => {
                ArithExpr::app(f.clone(), args.iter().map(|a| a.subst(x, e)).collect())
            }
            _ => self.clone(),
        }
    }

    pub fn subst_many(&self, map: &HashMap<String, ArithExpr>) -> ArithExpr {
        match self {
            ArithExpr::Var(y) => map.get(y).cloned().unwrap_or_else(|| self.clone()),
            ArithExpr::App(f, args) => {
                ArithExpr::app(f.clone(), args.iter().map(|a| a.subst_many(map)).collect())
            }
            ArithExpr::Num(_) => self.clone(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            ArithExpr::App(_, args) => 1 + args.iter().map(ArithExpr::size).sum::<usize>(),
            _ => 1,
        }
    }
}

fn prec(e: &ArithExpr) -> u8 {
    match e {
        ArithExpr::App(f, args) if f == "+" && args.len() == 2 => 1,
        ArithExpr::App(f, args) if f == "*" && args.len() == 2 => 2,
        _ => 3,
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &ArithExpr, min: u8| {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            ArithExpr::Var(x) => write!(f, "{x}"),
            ArithExpr::Num(n) => write!(f, "{n}"),
            ArithExpr::App(op, args) if prec(self) < 3 => {
                let p = prec(self);
                paren(f, &args[0], p)?;
                write!(f, " {op} ")?;
                paren(f, &args[1], p + 1)
            }
            ArithExpr::App(g, args) if args.is_empty() => write!(f, "{g}"),
            ArithExpr::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses `sum ::= prod ('+' prod)*`, `prod ::= atom ('*' atom)*`.
pub fn parse_expr_at(c: &mut Cursor) -> Result<ArithExpr, ParseError> {
    let mut e = parse_prod(c)?;
    while c.eat(&Tok::Plus) {
        let r = parse_prod(c)?;
        e = ArithExpr::call2("+", e, r);
    }
    Ok(e)
}

fn parse_prod(c: &mut Cursor) -> Result<ArithExpr, ParseError> {
    let mut e = parse_atom(c)?;
    while c.eat(&Tok::Star) {
        let r = parse_atom(c)?;
        e = ArithExpr::call2("*", e, r);
    }
    Ok(e)
}

fn parse_atom(c: &mut Cursor) -> Result<ArithExpr, ParseError> {
    match c.peek().clone() {
        Tok::Nat(n) => {
            c.bump();
            Ok(ArithExpr::Num(n))
        }
        Tok::LParen => {
            c.bump();
            let e = parse_expr_at(c)?;
            c.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Ident(name) => {
            c.bump();
            if c.eat(&Tok::LParen) {
                let mut args = Vec::new();
                if !c.eat(&Tok::RParen) {
                    loop {
                        args.push(parse_expr_at(c)?);
                        if c.eat(&Tok::RParen) {
                            break;
                        }
                        c.expect(&Tok::Comma)?;
                    }
                }
                Ok(ArithExpr::app(name, args))
            } else if name == "s" && matches!(c.peek(), Tok::Ident(_) | Tok::Nat(_)) {
                Ok(ArithExpr::succ(parse_atom(c)?))
            } else {
                Ok(ArithExpr::Var(name))
            }
        }
        _ => Err(c.unexpected("an expression")),
    }
}

pub fn parse_expr(text: &str) -> Result<ArithExpr, ParseError> {
    let mut c = Cursor::new(text)?;
    let e = parse_expr_at(&mut c)?;
    c.finish()?;
    Ok(e)
}

/// Values of first-order variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(BTreeMap<String, BigUint>);

impl Valuation {
    pub fn new() -> Self {
        Valuation::default()
    }

    pub fn with(mut self, x: impl Into<String>, n: impl Into<BigUint>) -> Self {
        self.0.insert(x.into(), n.into());
        self
    }

    pub fn insert(&mut self, x: impl Into<String>, n: BigUint) {
        self.0.insert(x.into(), n);
    }

    pub fn get(&self, x: &str) -> Option<&BigUint> {
        self.0.get(x)
    }
}

impl<S: Into<String>, N: Into<BigUint>> FromIterator<(S, N)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (S, N)>>(iter: I) -> Self {
        Valuation(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

/// Left-hand side pattern of a defining equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Zero,
    Succ(String),
}

impl Pattern {
    fn var(&self) -> Option<&str> {
        match self {
            Pattern::Var(x) | Pattern::Succ(x) => Some(x),
            Pattern::Zero => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(x) => write!(f, "{x}"),
            Pattern::Zero => write!(f, "0"),
            Pattern::Succ(x) => write!(f, "s({x})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Vec<Pattern>,
    pub rhs: ArithExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Constructor,
    Builtin,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDef {
    pub arity: usize,
    pub kind: SymbolKind,
    pub equations: Vec<Equation>,
    /// Argument position on which self-calls decrease structurally.
    pub rec_pos: Option<usize>,
}

/// A primitive-recursive signature: built-ins plus user symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, SymbolDef>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

fn eqn(lhs: Vec<Pattern>, rhs: &str) -> Equation {
    Equation {
        lhs,
        rhs: parse_expr(rhs).expect("builtin equation"),
    }
}

fn pv(x: &str) -> Pattern {
    Pattern::Var(x.into())
}

fn ps(x: &str) -> Pattern {
    Pattern::Succ(x.into())
}

impl Signature {
    pub fn new() -> Self {
        use Pattern::Zero;
        let mut symbols = BTreeMap::new();
        let ctor = |arity| SymbolDef {
            arity,
            kind: SymbolKind::Constructor,
            equations: vec![],
            rec_pos: None,
        };
        symbols.insert("0".to_string(), ctor(0));
        symbols.insert("s".to_string(), ctor(1));
        let builtin = |arity, equations, rec_pos| SymbolDef {
            arity,
            kind: SymbolKind::Builtin,
            equations,
            rec_pos,
        };
        symbols.insert(
            "+".into(),
            builtin(
                2,
                vec![
                    eqn(vec![Zero, pv("y")], "y"),
                    eqn(vec![ps("x"), pv("y")], "s(x + y)"),
                ],
                Some(0),
            ),
        );
        symbols.insert(
            "*".into(),
            builtin(
                2,
                vec![
                    eqn(vec![Zero, pv("y")], "0"),
                    eqn(vec![ps("x"), pv("y")], "x * y + y"),
                ],
                Some(0),
            ),
        );
        symbols.insert(
            "pred".into(),
            builtin(1, vec![eqn(vec![Zero], "0"), eqn(vec![ps("x")], "x")], None),
        );
        symbols.insert(
            "neg".into(),
            builtin(1, vec![eqn(vec![Zero], "1"), eqn(vec![ps("x")], "0")], None),
        );
        symbols.insert(
            "minus".into(),
            builtin(
                2,
                vec![
                    eqn(vec![pv("x"), Zero], "x"),
                    eqn(vec![Zero, ps("y")], "0"),
                    eqn(vec![ps("x"), ps("y")], "minus(x, y)"),
                ],
                Some(0),
            ),
        );
        Signature { symbols }
    }

    pub fn get(&self, name: &str) -> Option<&SymbolDef> {
        self.symbols.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.keys().map(String::as_str)
    }

    pub fn arity(&self, name: &str) -> Result<usize, ArithError> {
        self.get(name)
            .map(|d| d.arity)
            .ok_or_else(|| ArithError::UnknownSymbol(name.into()))
    }

    /// Checks that every symbol of `e` exists with the right arity.
    pub fn check_expr(&self, e: &ArithExpr) -> Result<(), ArithError> {
        match e {
            ArithExpr::App(f, args) => {
                let arity = self.arity(f)?;
                if arity != args.len() {
                    return Err(ArithError::ArityMismatch {
                        symbol: f.clone(),
                        expected: arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check_expr(a))
            }
            _ => Ok(()),
        }
    }

    /// `f(x₁,…,xₖ) = rhs`.
    pub fn define_explicit(
        &mut self,
        name: &str,
        params: &[String],
        rhs: ArithExpr,
    ) -> Result<(), ArithError> {
        let lhs = params.iter().map(|p| Pattern::Var(p.clone())).collect();
        self.define(name, params.len(), vec![Equation { lhs, rhs }])
    }

    /// Adds a user symbol after checking the primitive-recursive shape.
    pub fn define(
        &mut self,
        name: &str,
        arity: usize,
        equations: Vec<Equation>,
    ) -> Result<(), ArithError> {
        if self.contains(name) {
            return Err(ArithError::Redefinition(name.into()));
        }
        if equations.is_empty() {
            return Err(ArithError::NonExhaustive(name.into()));
        }
        let mut calls_self = false;
        for eq in &equations {
            if eq.lhs.len() != arity {
                return Err(ArithError::ArityMismatch {
                    symbol: name.into(),
                    expected: arity,
                    got: eq.lhs.len(),
                });
            }
            let mut bound = BTreeSet::new();
            for p in &eq.lhs {
                if let Some(x) = p.var() {
                    if !bound.insert(x.to_string()) {
                        return Err(ArithError::Malformed(format!(
                            "variable `{x}` repeated in a pattern of `{name}`"
                        )));
                    }
                }
            }
            if let Some(x) = eq.rhs.vars().into_iter().find(|x| !bound.contains(x)) {
                return Err(ArithError::UnboundVariable(x));
            }
            for sym in eq.rhs.symbols() {
                if sym == name {
                    calls_self = true;
                    continue;
                }
                if !self.contains(&sym) {
                    return Err(ArithError::UnknownSymbol(sym));
                }
            }
            self.check_expr_allowing(&eq.rhs, name, arity)?;
        }
        check_coverage(name, arity, &equations)?;
        let rec_pos = if calls_self {
            Some(
                find_rec_pos(name, arity, &equations)
                    .ok_or_else(|| ArithError::NotPrimitiveRecursive(name.into()))?,
            )
        } else {
            None
        };
        self.symbols.insert(
            name.into(),
            SymbolDef {
                arity,
                kind: SymbolKind::User,
                equations,
                rec_pos,
            },
        );
        Ok(())
    }

    fn check_expr_allowing(
        &self,
        e: &ArithExpr,
        me: &str,
        my_arity: usize,
    ) -> Result<(), ArithError> {
        if let ArithExpr::App(f, args) = e {
            let arity = if f == me { my_arity } else { self.arity(f)? };
            if arity != args.len() {
                return Err(ArithError::ArityMismatch {
                    symbol: f.clone(),
                    expected: arity,
                    got: args.len(),
                });
            }
            for a in args {
                self.check_expr_allowing(a, me, my_arity)?;
            }
        }
        Ok(())
    }

    /// Index of the equation matching constructor-shaped arguments.
    fn select<'a>(&'a self, def: &'a SymbolDef, args: &[BigUint]) -> Option<&'a Equation> {
        def.equations.iter().find(|eq| {
            eq.lhs.iter().zip(args).all(|(p, n)| match p {
                Pattern::Var(_) => true,
                Pattern::Zero => n.is_zero(),
                Pattern::Succ(_) => !n.is_zero(),
            })
        })
    }

    /// Evaluates `f(args)` by its defining equations only.
    pub fn apply_by_equations(&self, f: &str, args: &[BigUint]) -> Result<BigUint, ArithError> {
        self.apply_equation(f, args, false)
    }

    fn apply_equation(
        &self,
        f: &str,
        args: &[BigUint],
        native: bool,
    ) -> Result<BigUint, ArithError> {
        let def = self
            .get(f)
            .ok_or_else(|| ArithError::UnknownSymbol(f.into()))?;
        if def.arity != args.len() {
            return Err(ArithError::ArityMismatch {
                symbol: f.into(),
                expected: def.arity,
                got: args.len(),
            });
        }
        match def.kind {
            SymbolKind::Constructor if f == "0" => return Ok(BigUint::zero()),
            SymbolKind::Constructor => return Ok(&args[0] + 1u32),
            _ => {}
        }
        let eq = self
            .select(def, args)
            .ok_or_else(|| ArithError::NonExhaustive(f.into()))?;
        let mut rho = Valuation::new();
        for (p, n) in eq.lhs.iter().zip(args) {
            match p {
                Pattern::Var(x) => rho.insert(x.clone(), n.clone()),
                Pattern::Succ(x) => rho.insert(x.clone(), n - 1u32),
                Pattern::Zero => {}
            }
        }
        self.eval_with(&eq.rhs, &rho, native)
    }

    fn apply(&self, f: &str, args: &[BigUint], native: bool) -> Result<BigUint, ArithError> {
        if native {
            if let Some(v) = native_builtin(f, args) {
                return Ok(v);
            }
        }
        self.apply_equation(f, args, native)
    }

    fn eval_with(
        &self,
        e: &ArithExpr,
        rho: &Valuation,
        native: bool,
    ) -> Result<BigUint, ArithError> {
        match e {
            ArithExpr::Num(n) => Ok(n.clone()),
            ArithExpr::Var(x) => rho
                .get(x)
                .cloned()
                .ok_or_else(|| ArithError::UnboundVariable(x.clone())),
            ArithExpr::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_with(a, rho, native))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(f, &vals, native)
            }
        }
    }

    /// Evaluation through the defining equations, with built-ins
    /// short-circuited to native arithmetic.
    pub fn eval(&self, e: &ArithExpr, rho: &Valuation) -> Result<BigUint, ArithError> {
        self.eval_with(e, rho, true)
    }

    /// Evaluation that never uses native arithmetic.
    pub fn eval_by_equations(&self, e: &ArithExpr, rho: &Valuation) -> Result<BigUint, ArithError> {
        self.eval_with(e, rho, false)
    }

    /// Rewrites `f(args)` with the first equation whose patterns match.
    fn rewrite_root(&self, f: &str, args: &[ArithExpr]) -> Option<ArithExpr> {
        let def = self.get(f)?;
        def.equations.iter().find_map(|eq| {
            let mut map = HashMap::new();
            for (p, a) in eq.lhs.iter().zip(args) {
                match (p, a) {
                    (Pattern::Var(x), _) => {
                        map.insert(x.clone(), a.clone());
                    }
                    (Pattern::Zero, ArithExpr::Num(n)) if n.is_zero() => {}
                    (Pattern::Succ(x), ArithExpr::Num(n)) if !n.is_zero() => {
                        map.insert(x.clone(), ArithExpr::Num(n - 1u32));
                    }
                    (Pattern::Succ(x), ArithExpr::App(g, inner)) if g == "s" => {
                        map.insert(x.clone(), inner[0].clone());
                    }
                    _ => return None,
                }
            }
            Some(eq.rhs.subst_many(&map))
        })
    }

    /// The normal form under the oriented defining equations.
    pub fn normalize(&self, e: &ArithExpr) -> ArithExpr {
        match e {
            ArithExpr::App(f, args) => {
                let args: Vec<ArithExpr> = args.iter().map(|a| self.normalize(a)).collect();
                if args.iter().all(|a| matches!(a, ArithExpr::Num(_))) {
                    let vals: Vec<BigUint> = args
                        .iter()
                        .map(|a| match a {
                            ArithExpr::Num(n) => n.clone(),
                            _ => unreachable!(),
                        })
                        .collect();
                    if let Ok(v) = self.apply(f, &vals, true) {
                        return ArithExpr::Num(v);
                    }
                }
                match self.rewrite_root(f, &args) {
                    Some(r) => self.normalize(&r),
                    None => ArithExpr::app(f.clone(), args),
                }
            }
            _ => e.clone(),
        }
    }

    /// All one-step rewrites of `e` at any position.
    pub fn rewrite_steps(&self, e: &ArithExpr) -> Vec<ArithExpr> {
        let mut out = Vec::new();
        if let ArithExpr::App(f, args) = e {
            if let Some(r) = self.rewrite_root(f, args) {
                out.push(r);
            }
            for (i, a) in args.iter().enumerate() {
                for r in self.rewrite_steps(a) {
                    let mut args2 = args.clone();
                    args2[i] = r;
                    out.push(ArithExpr::app(f.clone(), args2));
                }
            }
        }
        out
    }

    pub fn congruent(&self, a: &ArithExpr, b: &ArithExpr) -> bool {
        self.normalize(a) == self.normalize(b)
    }
}

fn native_builtin(f: &str, args: &[BigUint]) -> Option<BigUint> {
    Some(match (f, args) {
        ("0", []) => BigUint::zero(),
        ("s", [x]) => x + 1u32,
        ("+", [x, y]) => x + y,
        ("*", [x, y]) => x * y,
        ("pred", [x]) => {
            if x.is_zero() {
                BigUint::zero()
            } else {
                x - 1u32
            }
        }
        ("neg", [x]) => {
            if x.is_zero() {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        }
        ("minus", [x, y]) => {
            if x > y {
                x - y
            } else {
                BigUint::zero()
            }
        }
        _ => return None,
    })
}

fn check_coverage(name: &str, arity: usize, equations: &[Equation]) -> Result<(), ArithError> {
    // Each argument is either zero or a successor; enumerate all 2^k shapes.
    if arity > 16 {
        return Err(ArithError::Malformed(format!(
            "`{name}` has too many arguments"
        )));
    }
    for shape in 0u32..(1 << arity) {
        let matching = equations
            .iter()
            .filter(|eq| {
                eq.lhs.iter().enumerate().all(|(i, p)| match p {
                    Pattern::Var(_) => true,
                    Pattern::Zero => shape & (1 << i) == 0,
                    Pattern::Succ(_) => shape & (1 << i) != 0,
                })
            })
            .count();
        match matching {
            0 => return Err(ArithError::NonExhaustive(name.into())),
            1 => {}
            _ => return Err(ArithError::Overlap(name.into())),
        }
    }
    Ok(())
}

fn self_calls<'a>(name: &str, e: &'a ArithExpr, out: &mut Vec<&'a [ArithExpr]>) {
    if let ArithExpr::App(f, args) = e {
        if f == name {
            out.push(args);
        }
        args.iter().for_each(|a| self_calls(name, a, out));
    }
}

fn find_rec_pos(name: &str, arity: usize, equations: &[Equation]) -> Option<usize> {
    (0..arity).find(|&i| {
        equations.iter().all(|eq| {
            let mut calls = Vec::new();
            self_calls(name, &eq.rhs, &mut calls);
            calls.is_empty()
                || match &eq.lhs[i] {
                    Pattern::Succ(x) => calls
                        .iter()
                        .all(|args| args[i] == ArithExpr::Var(x.clone())),
                    _ => false,
                }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(k: u32) -> BigUint {
        BigUint::from(k)
    }

    #[test]
    fn eval_examples() {
        let sig = Signature::new();
        let rho = Valuation::new();
        assert_eq!(
            sig.eval(&parse_expr("pred(s(0))").unwrap(), &rho).unwrap(),
            n(0)
        );
        assert_eq!(
            sig.eval(&parse_expr("minus(5, 3)").unwrap(), &rho).unwrap(),
            n(2)
        );
        let rho = Valuation::new().with("x", 4u32).with("y", 2u32);
        assert_eq!(
            sig.eval(&parse_expr("s(x) + y").unwrap(), &rho).unwrap(),
            n(7)
        );
    }

    #[test]
    fn normalize_examples() {
        let sig = Signature::new();
        let norm = |s: &str| sig.normalize(&parse_expr(s).unwrap()).to_string();
        assert_eq!(norm("pred(0)"), "0");
        assert_eq!(norm("neg(s(x))"), "0");
        assert_eq!(norm("minus(s(s(0)), s(0))"), "1");
        assert_eq!(norm("pred(s(y))"), "y");
        assert_eq!(norm("0 + x"), "x");
        assert_eq!(norm("x + 0"), "x + 0");
    }

    #[test]
    fn rejects_bad_definitions() {
        let mut sig = Signature::new();
        let e = |s: &str| parse_expr(s).unwrap();
        let bad = sig.define(
            "f",
            1,
            vec![Equation {
                lhs: vec![Pattern::Zero],
                rhs: e("0"),
            }],
        );
        assert_eq!(bad, Err(ArithError::NonExhaustive("f".into())));
        let overlap = sig.define(
            "g",
            1,
            vec![
                Equation {
                    lhs: vec![pv("x")],
                    rhs: e("0"),
                },
                Equation {
                    lhs: vec![Pattern::Zero],
                    rhs: e("0"),
                },
            ],
        );
        assert_eq!(overlap, Err(ArithError::Overlap("g".into())));
        let loops = sig.define(
            "h",
            1,
            vec![
                Equation {
                    lhs: vec![Pattern::Zero],
                    rhs: e("0"),
                },
                Equation {
                    lhs: vec![ps("x")],
                    rhs: e("h(s(x))"),
                },
            ],
        );
        assert_eq!(loops, Err(ArithError::NotPrimitiveRecursive("h".into())));
        assert_eq!(
            sig.define_explicit("pred", &[], e("0")),
            Err(ArithError::Redefinition("pred".into()))
        );
    }

    #[test]
    fn user_recursion() {
        let mut sig = Signature::new();
        let e = |s: &str| parse_expr(s).unwrap();
        sig.define(
            "double",
            1,
            vec![
                Equation {
                    lhs: vec![Pattern::Zero],
                    rhs: e("0"),
                },
                Equation {
                    lhs: vec![ps("x")],
                    rhs: e("s(s(double(x)))"),
                },
            ],
        )
        .unwrap();
        assert_eq!(sig.get("double").unwrap().rec_pos, Some(0));
        assert_eq!(
            sig.eval(&e("double(21)"), &Valuation::new()).unwrap(),
            n(42)
        );
        assert_eq!(
            sig.normalize(&e("double(s(y))")).to_string(),
            "s(s(double(y)))"
        );
    }

    #[test]
    fn printing_round_trips() {
        for s in [
            "x + y * z",
            "(x + y) * z",
            "minus(x, s(y))",
            "x + (y + z)",
            "s(s(x))",
        ] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
