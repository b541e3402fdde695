use super::term::{Kind, Process, Stack, Term};
use crate::util::prime_until;
use std::collections::BTreeSet;
use std::fmt::{self, Write};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
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
    fn for_term(t: &Term) -> Printer {
        let mut avoid = t.free_vars();
        avoid.extend(t.instructions());
        Printer {
            avoid,
            ctx: Vec::new(),
        }
    }

    fn term(&mut self, t: &Term, prec: Prec, out: &mut String) {
        match t.kind() {
            Kind::Var(x) => out.push_str(x),
            Kind::Bound(i) => {
                let name = self
                    .ctx
                    .len()
                    .checked_sub(*i as usize + 1)
                    .map(|k| self.ctx[k].clone());
                out.push_str(name.as_deref().unwrap_or("?"));
            }
            Kind::Inst(n) => out.push_str(n),
            Kind::Numeral(n) => {
                let _ = write!(out, "#{n}");
            }
            Kind::Kont(s) => {
                out.push_str("k[");
                stack(s, out);
                out.push(']');
            }
            Kind::App(..) => {
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
            Kind::Lam(..) => {
                if prec != Prec::Top {
                    out.push('(');
                }
                out.push('\\');
                let mark = self.ctx.len();
                let mut body = t;
                let mut first = true;
                while let Kind::Lam(hint, b) = body.kind() {
                    let name = prime_until(hint, |n| {
                        self.avoid.contains(n) || self.ctx.iter().any(|c| c == n)
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

fn stack(s: &Stack, out: &mut String) {
    for t in s.iter() {
        Printer::for_term(t).term(t, Prec::Arg, out);
        out.push_str(" . ");
    }
    out.push('$');
}

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    Printer::for_term(t).term(t, Prec::Top, &mut out);
    out
}

pub fn print_stack(s: &Stack) -> String {
    let mut out = String::new();
    stack(s, &mut out);
    out
}

pub fn print_process(p: &Process) -> String {
    let mut out = String::new();
    Printer::for_term(&p.head).term(&p.head, Prec::Fun, &mut out);
    out.push_str(" * ");
    stack(&p.stack, &mut out);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_stack(self))
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_process(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_examples() {
        assert_eq!(Term::lam("x", Term::var("x")).to_string(), "\\x.x");
        let t = Term::apps(Term::inst("s"), [Term::num(3u32), Term::inst("stop")]);
        assert_eq!(t.to_string(), "s #3 stop");
        assert_eq!(
            Term::kont(Stack::bottom().push(Term::inst("stop"))).to_string(),
            "k[stop . $]"
        );
    }

    #[test]
    fn nested_binders_get_primes() {
        let t = Term::lam(
            "x",
            Term::lam("x", Term::app(Term::var("x"), Term::bound(1))),
        );
        assert_eq!(t.to_string(), "\\x x'.x' x");
    }

    #[test]
    fn lambda_argument_is_parenthesized() {
        let t = Term::app(
            Term::lam("x", Term::var("x")),
            Term::lam("y", Term::var("y")),
        );
        assert_eq!(t.to_string(), "(\\x.x) (\\y.y)");
    }
}
