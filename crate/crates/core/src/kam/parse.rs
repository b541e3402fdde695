use super::rule::{Guard, InstructionRule, Relation, SlotPattern, Template};
use crate::arith::parse_expr_at;
use crate::lex::{Cursor, ParseError, Tok};
use crate::syntax::{fresh_name, ParseEnv, Term, TermParser};

/// Parses `name slot* [if e rel e (, e rel e)*] => head [* t . … . t]`.
///
/// Slots are `x`, `#x` or `#k`; the right-hand side may contain `#[e]`.
pub fn parse_rule_at(c: &mut Cursor, env: &ParseEnv) -> Result<InstructionRule, ParseError> {
    let head = c.ident()?;
    let mut patterns = Vec::new();
    loop {
        match c.peek().clone() {
            Tok::Ident(x) if x != "if" => {
                c.bump();
                patterns.push(SlotPattern::Term(x));
            }
            Tok::Hash => {
                c.bump();
                match c.peek().clone() {
                    Tok::Nat(n) => {
                        c.bump();
                        patterns.push(SlotPattern::Literal(n));
                    }
                    _ => patterns.push(SlotPattern::Numeral(c.ident()?)),
                }
            }
            _ => break,
        }
    }
    let mut guards = Vec::new();
    if c.eat_keyword("if") {
        loop {
            let lhs = parse_expr_at(c)?;
            let rel = match c.bump() {
                Tok::Le => Relation::Le,
                Tok::Lt => Relation::Lt,
                Tok::Eq => Relation::Eq,
                _ => {
                    return Err(ParseError::new(
                        c.pos(),
                        "expected `<=`, `<` or `=` in a guard",
                    ))
                }
            };
            let rhs = parse_expr_at(c)?;
            guards.push(Guard { lhs, rel, rhs });
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
    }
    c.expect(&Tok::FatArrow)?;
    let binders: Vec<String> = patterns
        .iter()
        .filter_map(|p| p.binder().map(str::to_string))
        .collect();
    let mut computed = Vec::new();
    let mut hook = |c: &mut Cursor| -> Result<Term, ParseError> {
        let e = parse_expr_at(c)?;
        let hole = fresh_name("h");
        computed.push((hole.clone(), e));
        Ok(Term::var(hole))
    };
    let (rhs_head, pushed) = {
        let mut p = TermParser::new(env)
            .with_locals(binders)
            .with_hash_bracket(&mut hook);
        let rhs_head = p.term(c)?;
        let mut pushed = Vec::new();
        if c.eat(&Tok::Star) {
            loop {
                pushed.push(p.atom(c)?);
                if !c.eat(&Tok::Dot) {
                    break;
                }
            }
        }
        (rhs_head, pushed)
    };
    Ok(InstructionRule {
        head,
        patterns,
        guards,
        rhs: Template {
            head: rhs_head,
            pushed,
            computed,
        },
    })
}

pub fn parse_rule(text: &str, env: &ParseEnv) -> Result<InstructionRule, ParseError> {
    let mut c = Cursor::new(text)?;
    let r = parse_rule_at(&mut c, env)?;
    c.finish()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_expr;

    #[test]
    fn parses_guarded_rule() {
        let r = parse_rule("test_le #n #m u v if n <= m => u", &ParseEnv::default()).unwrap();
        assert_eq!(r.patterns.len(), 4);
        assert_eq!(r.guards[0].rel, Relation::Le);
        assert_eq!(r.rhs.head, Term::var("u"));
    }

    #[test]
    fn computed_holes_and_pushed_items() {
        let r = parse_rule("f #n k => k #[minus(n, 3)] * k . #0", &ParseEnv::default()).unwrap();
        assert_eq!(r.rhs.computed.len(), 1);
        assert_eq!(r.rhs.computed[0].1, parse_expr("minus(n, 3)").unwrap());
        assert_eq!(r.rhs.pushed, vec![Term::var("k"), Term::num(0u32)]);
    }

    #[test]
    fn literal_slot() {
        let r = parse_rule("z #0 k => k", &ParseEnv::default()).unwrap();
        assert_eq!(r.patterns[0], SlotPattern::Literal(0u32.into()));
    }
}
