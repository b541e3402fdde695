use super::NegError;
use crate::ha2::HTerm;
use crate::syntax::{fresh_name, Process, Stack, Term, TermView};

fn v(x: &str) -> HTerm {
    HTerm::var(x)
}

/// `let ⟨x,y⟩ = u in t ≡ (λx y. t)(fst u)(snd u)`.
fn let_pair(x: &str, y: &str, u: HTerm, t: HTerm) -> HTerm {
    HTerm::apps(
        HTerm::lams(&[x, y], t),
        [HTerm::fst(u.clone()), HTerm::snd(u)],
    )
}

fn names<const N: usize>(hints: [&str; N]) -> [String; N] {
    hints.map(fresh_name)
}

/// `λk. let⟨x,k'⟩=k in x ⟨λk''. let⟨y,_⟩=k'' in y k'; k'⟩`.
fn cc_star() -> HTerm {
    let [k, x, k1, k2, y, w] = names(["k", "x", "k'", "k''", "y", "w"]);
    let kont = HTerm::lam(&k2, let_pair(&y, &w, v(&k2), HTerm::app(v(&y), v(&k1))));
    HTerm::lam(
        &k,
        let_pair(&x, &k1, v(&k), HTerm::app(v(&x), HTerm::pair(kont, v(&k1)))),
    )
}

/// `λk. let⟨x,k'⟩=k in let⟨y,k''⟩=k' in y ⟨s x; k''⟩`.
fn succ_star() -> HTerm {
    let [k, x, k1, y, k2] = names(["k", "x", "k'", "y", "k''"]);
    let body = HTerm::app(v(&y), HTerm::pair(HTerm::succ(v(&x)), v(&k2)));
    HTerm::lam(
        &k,
        let_pair(&x, &k1, v(&k), let_pair(&y, &k2, v(&k1), body)),
    )
}

/// `λk. let⟨z₀,k'⟩=k in let⟨z₁,k''⟩=k' in let⟨x,k'''⟩=k'' in
/// rec z₀ (λx' y k₀. z₁ ⟨x'; ⟨λk₁. y k₁; k₀⟩⟩) x k'''`.
fn rec_star() -> HTerm {
    let [k, z0, k1, z1, k2, x, k3, x1, y, k0, k4] = names([
        "k", "z0", "k'", "z1", "k''", "x", "k'''", "x'", "y", "k0", "k1",
    ]);
    let eta = HTerm::lam(&k4, HTerm::app(v(&y), v(&k4)));
    let step = HTerm::lams(
        &[&x1, &y, &k0],
        HTerm::app(v(&z1), HTerm::pair(v(&x1), HTerm::pair(eta, v(&k0)))),
    );
    let body = HTerm::apps(
        HTerm::konst(crate::ha2::HConst::Rec),
        [v(&z0), step, v(&x), v(&k3)],
    );
    HTerm::lam(
        &k,
        let_pair(
            &z0,
            &k1,
            v(&k),
            let_pair(&z1, &k2, v(&k1), let_pair(&x, &k3, v(&k2), body)),
        ),
    )
}

/// `t*`, for terms over `cc`, `s`, `rec`, `stop`, numerals and
/// continuation constants.
pub fn cps_term(t: &Term) -> Result<HTerm, NegError> {
    Ok(match t.view() {
        TermView::Var(x) => v(x),
        TermView::App(f, a) => {
            let k = fresh_name("k");
            HTerm::lam(
                &k,
                HTerm::app(cps_term(f)?, HTerm::pair(cps_term(a)?, v(&k))),
            )
        }
        TermView::Lam(x, body) => {
            let [k, k1] = names(["k", "k'"]);
            HTerm::lam(
                &k,
                let_pair(&x, &k1, v(&k), HTerm::app(cps_term(&body)?, v(&k1))),
            )
        }
        TermView::Numeral(n) => HTerm::numeral(n),
        TermView::Kont(pi) => {
            let [k, x, w] = names(["k", "x", "w"]);
            HTerm::lam(
                &k,
                let_pair(&x, &w, v(&k), HTerm::app(v(&x), cps_stack(pi)?)),
            )
        }
        TermView::Inst(name) => match name {
            "cc" => cc_star(),
            "s" => succ_star(),
            "rec" => rec_star(),
            "stop" => {
                let z = fresh_name("z");
                HTerm::lam(&z, v(&z))
            }
            "print" => return Err(NegError::Print),
            other => return Err(NegError::Instruction(other.to_string())),
        },
    })
}

/// `⋄* ≡ 0` and `(t·π)* ≡ ⟨t*; π*⟩`.
pub fn cps_stack(pi: &Stack) -> Result<HTerm, NegError> {
    let items: Vec<HTerm> = pi.iter().map(cps_term).collect::<Result<_, _>>()?;
    Ok(items
        .into_iter()
        .rev()
        .fold(HTerm::zero(), |acc, t| HTerm::pair(t, acc)))
}

/// `(t ⋆ π)* ≡ t* π*`.
pub fn cps_process(p: &Process) -> Result<HTerm, NegError> {
    Ok(HTerm::app(cps_term(&p.head)?, cps_stack(&p.stack)?))
}
