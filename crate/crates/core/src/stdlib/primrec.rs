use crate::arith::{ArithError, ArithExpr, Equation, Pattern, Signature, SymbolKind};
use crate::syntax::{fresh_name, Term};
use std::collections::HashMap;

/// Compiles a signature symbol `f` of arity k into a closed term `f̌` with
/// `f̌ ⋆ n̂₁·…·n̂ₖ·u·π ≻* u ⋆ m̂·π` where `m = f(n₁,…,nₖ)`.
pub fn compile_primrec(sig: &Signature, f: &str) -> Result<Term, ArithError> {
    Compiler::new(sig).symbol(f)
}

/// Compiles `e` with free variables `params` into `λparams u. …` such that
/// applying it to numerals and a continuation returns the value of `e`.
pub fn compile_expr(sig: &Signature, params: &[String], e: &ArithExpr) -> Result<Term, ArithError> {
    let mut c = Compiler::new(sig);
    let u = fresh_name("u");
    let env: HashMap<String, Term> = params.iter().map(|p| (p.clone(), Term::var(p))).collect();
    let body = c.expr(e, &env, None, Term::var(&u))?;
    let mut binders = params.to_vec();
    binders.push(u);
    Ok(Term::lams(&binders, body))
}

/// Memoizing compiler; compiled callees are inlined as closed terms.
pub struct Compiler<'s> {
    sig: &'s Signature,
    cache: HashMap<String, Term>,
}

#[derive(Clone)]
enum Shape {
    Unknown,
    Zero,
    Succ(Term),
}

#[derive(Clone)]
struct Col {
    full: Option<Term>,
    shape: Shape,
}

/// What a self-call compiles to inside the successor branch.
struct SelfCall<'a> {
    name: &'a str,
    rec_pos: usize,
    recur: Term,
}

impl<'s> Compiler<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Compiler {
            sig,
            cache: HashMap::new(),
        }
    }

    pub fn symbol(&mut self, f: &str) -> Result<Term, ArithError> {
        if let Some(t) = self.cache.get(f) {
            return Ok(t.clone());
        }
        let def = self
            .sig
            .get(f)
            .ok_or_else(|| ArithError::UnknownSymbol(f.into()))?
            .clone();
        let t = match (def.kind, f) {
            (SymbolKind::Constructor, "s") => Term::inst("s"),
            (SymbolKind::Constructor, _) => {
                let u = fresh_name("u");
                Term::lam(&u, Term::app(Term::var(&u), Term::num(0u32)))
            }
            _ => self.defined(f, def.arity, &def.equations, def.rec_pos)?,
        };
        self.cache.insert(f.to_string(), t.clone());
        Ok(t)
    }

    fn defined(
        &mut self,
        f: &str,
        arity: usize,
        eqs: &[Equation],
        rec_pos: Option<usize>,
    ) -> Result<Term, ArithError> {
        let xs: Vec<String> = (0..arity).map(|_| fresh_name("x")).collect();
        let u = fresh_name("u");
        let mut binders = xs.clone();
        binders.push(u.clone());
        let Some(r) = rec_pos else {
            let cols = xs
                .iter()
                .map(|x| Col {
                    full: Some(Term::var(x)),
                    shape: Shape::Unknown,
                })
                .collect();
            let body = self.dispatch(eqs, cols, None, &Term::var(&u))?;
            return Ok(Term::lams(&binders, body));
        };
        // rec U0 U1 x_r others u
        let others: Vec<String> = (0..arity - 1).map(|_| fresh_name("y")).collect();
        let k = fresh_name("u");
        let cols_with = |shape: Shape, full: Option<Term>| -> Vec<Col> {
            let mut cols: Vec<Col> = others
                .iter()
                .map(|y| Col {
                    full: Some(Term::var(y)),
                    shape: Shape::Unknown,
                })
                .collect();
            cols.insert(r, Col { full, shape });
            cols
        };
        let mut lam_others = others.clone();
        lam_others.push(k.clone());

        let zero = self.dispatch(
            eqs,
            cols_with(Shape::Zero, Some(Term::num(0u32))),
            None,
            &Term::var(&k),
        )?;
        let u0 = Term::lams(&lam_others, zero);

        let p = fresh_name("p");
        let rv = fresh_name("r");
        let call = SelfCall {
            name: f,
            rec_pos: r,
            recur: Term::var(&rv),
        };
        let succ = self.dispatch(
            eqs,
            cols_with(Shape::Succ(Term::var(&p)), None),
            Some(&call),
            &Term::var(&k),
        )?;
        let mut lam_succ = vec![p, rv];
        lam_succ.extend(lam_others);
        let u1 = Term::lams(&lam_succ, succ);

        let mut args = vec![u0, u1, Term::var(&xs[r])];
        args.extend(
            xs.iter()
                .enumerate()
                .filter(|(i, _)| *i != r)
                .map(|(_, x)| Term::var(x)),
        );
        args.push(Term::var(&u));
        Ok(Term::lams(&binders, Term::apps(Term::inst("rec"), args)))
    }

    /// First-match dispatch over the defining equations.
    fn dispatch(
        &mut self,
        eqs: &[Equation],
        cols: Vec<Col>,
        me: Option<&SelfCall>,
        k: &Term,
    ) -> Result<Term, ArithError> {
        let compatible = |eq: &Equation| {
            eq.lhs.iter().zip(&cols).all(|(p, c)| {
                !matches!(
                    (p, &c.shape),
                    (Pattern::Zero, Shape::Succ(_)) | (Pattern::Succ(_), Shape::Zero)
                )
            })
        };
        let Some(eq) = eqs.iter().find(|eq| compatible(eq)) else {
            return Err(ArithError::Malformed("no equation matches".into()));
        };
        let split =
            eq.lhs.iter().zip(&cols).position(|(p, c)| {
                !matches!(p, Pattern::Var(_)) && matches!(c.shape, Shape::Unknown)
            });
        if let Some(i) = split {
            let scrutinee = cols[i].full.clone().expect("unknown column has a variable");
            let mut zero_cols = cols.clone();
            zero_cols[i].shape = Shape::Zero;
            let zero = self.dispatch(eqs, zero_cols, me, k)?;
            let p = fresh_name("p");
            let mut succ_cols = cols;
            succ_cols[i].shape = Shape::Succ(Term::var(&p));
            let succ = self.dispatch(eqs, succ_cols, me, k)?;
            let succ = Term::lams(&[p, fresh_name("_")], succ);
            return Ok(Term::apps(Term::inst("rec"), [zero, succ, scrutinee]));
        }
        let mut env = HashMap::new();
        let mut rebuild = Vec::new();
        for (pat, col) in eq.lhs.iter().zip(&cols) {
            match (pat, &col.shape) {
                (Pattern::Var(x), _) => match (&col.full, &col.shape) {
                    (Some(t), _) => {
                        env.insert(x.clone(), t.clone());
                    }
                    (None, Shape::Succ(p)) => {
                        let v = fresh_name(x);
                        rebuild.push((p.clone(), v.clone()));
                        env.insert(x.clone(), Term::var(&v));
                    }
                    (None, _) => return Err(ArithError::Malformed("column without value".into())),
                },
                (Pattern::Succ(x), Shape::Succ(p)) => {
                    env.insert(x.clone(), p.clone());
                }
                _ => {}
            }
        }
        let mut body = self.expr(&eq.rhs, &env, me, k.clone())?;
        for (p, v) in rebuild.into_iter().rev() {
            body = Term::apps(Term::inst("s"), [p, Term::lam(&v, body)]);
        }
        Ok(body)
    }

    /// CPS compilation of an expression: the result feeds `k`.
    fn expr(
        &mut self,
        e: &ArithExpr,
        env: &HashMap<String, Term>,
        me: Option<&SelfCall>,
        k: Term,
    ) -> Result<Term, ArithError> {
        match e {
            ArithExpr::Var(x) => {
                let v = env
                    .get(x)
                    .cloned()
                    .ok_or_else(|| ArithError::UnboundVariable(x.clone()))?;
                Ok(Term::app(k, v))
            }
            ArithExpr::Num(n) => Ok(Term::app(k, Term::num(n.clone()))),
            ArithExpr::App(g, args) => {
                let (head, args): (Term, Vec<&ArithExpr>) = match me {
                    Some(call) if call.name == g => {
                        let rest = args
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| *i != call.rec_pos)
                            .map(|(_, a)| a);
                        (call.recur.clone(), rest.collect())
                    }
                    _ => (self.symbol(g)?, args.iter().collect()),
                };
                self.sequence(head, &args, Vec::new(), env, me, k)
            }
        }
    }

    fn sequence(
        &mut self,
        head: Term,
        args: &[&ArithExpr],
        mut done: Vec<Term>,
        env: &HashMap<String, Term>,
        me: Option<&SelfCall>,
        k: Term,
    ) -> Result<Term, ArithError> {
        let Some((first, rest)) = args.split_first() else {
            done.push(k);
            return Ok(Term::apps(head, done));
        };
        match first {
            ArithExpr::Var(x) => {
                done.push(
                    env.get(x)
                        .cloned()
                        .ok_or_else(|| ArithError::UnboundVariable(x.clone()))?,
                );
                self.sequence(head, rest, done, env, me, k)
            }
            ArithExpr::Num(n) => {
                done.push(Term::num(n.clone()));
                self.sequence(head, rest, done, env, me, k)
            }
            _ => {
                let v = fresh_name("v");
                done.push(Term::var(&v));
                let inner = self.sequence(head, rest, done, env, me, k)?;
                self.expr(first, env, me, Term::lam(&v, inner))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_expr, Valuation};
    use crate::kam::{run, Halt, MachineConfig};
    use crate::syntax::{Process, Stack};
    use num_bigint::BigUint;

    fn apply(t: &Term, args: &[u32]) -> Option<BigUint> {
        let stop = Term::inst("stop");
        let items = args.iter().map(|&n| Term::num(n)).chain([stop]);
        let out = run(
            &Process::new(t.clone(), Stack::from_terms(items, Stack::bottom())),
            &MachineConfig::new(),
        );
        match out.halt {
            Halt::FinalStop(n) => Some(n),
            _ => None,
        }
    }

    #[test]
    fn builtins_match_eval() {
        let sig = Signature::new();
        for f in ["+", "*", "pred", "neg", "minus", "s"] {
            let t = compile_primrec(&sig, f).unwrap();
            assert!(t.is_closed() && t.is_proof_like(), "{f}");
            let arity = sig.arity(f).unwrap();
            for a in 0..7u32 {
                for b in 0..7u32 {
                    let args = &[a, b][..arity];
                    let want = sig.apply_by_equations(
                        f,
                        &args.iter().map(|&n| BigUint::from(n)).collect::<Vec<_>>(),
                    );
                    assert_eq!(apply(&t, args), want.ok(), "{f}{args:?}");
                }
            }
        }
    }

    #[test]
    fn pred_example() {
        let t = compile_primrec(&Signature::new(), "pred").unwrap();
        assert_eq!(apply(&t, &[5]), Some(BigUint::from(4u32)));
    }

    #[test]
    fn user_symbols_and_expressions() {
        let mut sig = Signature::new();
        sig.define_explicit(
            "dist",
            &["x".into()],
            parse_expr("minus(x, 10) + minus(10, x)").unwrap(),
        )
        .unwrap();
        let t = compile_primrec(&sig, "dist").unwrap();
        assert_eq!(apply(&t, &[3]), Some(BigUint::from(7u32)));
        assert_eq!(apply(&t, &[15]), Some(BigUint::from(5u32)));
        let e = parse_expr("s(x * x) + y").unwrap();
        let t = compile_expr(&sig, &["x".into(), "y".into()], &e).unwrap();
        let rho = Valuation::new().with("x", 3u32).with("y", 4u32);
        assert_eq!(apply(&t, &[3, 4]), sig.eval(&e, &rho).ok());
    }

    #[test]
    fn unknown_symbol() {
        assert_eq!(
            compile_primrec(&Signature::new(), "h"),
            Err(ArithError::UnknownSymbol("h".into()))
        );
    }
}
