use super::term::{Process, Stack, Term};
use crate::lex::{Cursor, ParseError, Tok};
use std::collections::BTreeSet;

/// Instructions that exist in every machine configuration.
pub const BUILTIN_INSTRUCTIONS: [&str; 5] = ["cc", "s", "rec", "stop", "print"];

/// Name resolution for the term parser.
///
/// λ-bound names become variables, names in `instructions` become
/// instruction constants, anything else is a free variable unless
/// `strict` is set.
#[derive(Debug, Clone)]
pub struct ParseEnv {
    pub instructions: BTreeSet<String>,
    pub strict: bool,
    pub stop_words: BTreeSet<String>,
}

impl Default for ParseEnv {
    fn default() -> Self {
        ParseEnv {
            instructions: BUILTIN_INSTRUCTIONS.iter().map(|s| s.to_string()).collect(),
            strict: false,
            stop_words: BTreeSet::new(),
        }
    }
}

impl ParseEnv {
    pub fn strict() -> Self {
        ParseEnv {
            strict: true,
            ..ParseEnv::default()
        }
    }

    pub fn with_instructions<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.instructions.extend(names.into_iter().map(Into::into));
        self
    }
}

type Hook<'h> = dyn FnMut(&mut Cursor) -> Result<Term, ParseError> + 'h;

/// Recursive-descent parser for λc terms, stacks and processes.
pub struct TermParser<'e, 'h> {
    env: &'e ParseEnv,
    scope: Vec<String>,
    hash_bracket: Option<&'h mut Hook<'h>>,
}

impl<'e, 'h> TermParser<'e, 'h> {
    pub fn new(env: &'e ParseEnv) -> Self {
        TermParser {
            env,
            scope: Vec::new(),
            hash_bracket: None,
        }
    }

    /// Names treated as bound variables everywhere (rule pattern variables).
    pub fn with_locals(mut self, locals: impl IntoIterator<Item = String>) -> Self {
        self.scope.extend(locals);
        self
    }

    /// Handler for `#[ … ]` forms, called with the cursor just past `[`.
    pub fn with_hash_bracket(mut self, hook: &'h mut Hook<'h>) -> Self {
        self.hash_bracket = Some(hook);
        self
    }

    fn starts_atom(&self, c: &Cursor) -> bool {
        match c.peek() {
            Tok::Ident(s) => !self.env.stop_words.contains(s),
            Tok::Hash | Tok::LParen | Tok::Backslash => true,
            _ => false,
        }
    }

    pub fn term(&mut self, c: &mut Cursor) -> Result<Term, ParseError> {
        if c.eat(&Tok::Backslash) {
            let mut binders = vec![c.ident()?];
            while let Tok::Ident(_) = c.peek() {
                binders.push(c.ident()?);
            }
            c.expect(&Tok::Dot)?;
            let mark = self.scope.len();
            self.scope.extend(binders.iter().cloned());
            let body = self.term(c);
            self.scope.truncate(mark);
            return Ok(Term::lams(&binders, body?));
        }
        let mut t = self.atom(c)?;
        while self.starts_atom(c) {
            let a = if *c.peek() == Tok::Backslash {
                self.term(c)?
            } else {
                self.atom(c)?
            };
            t = Term::app(t, a);
        }
        Ok(t)
    }

    pub fn atom(&mut self, c: &mut Cursor) -> Result<Term, ParseError> {
        let pos = c.pos();
        match c.peek().clone() {
            Tok::Ident(name) => {
                c.bump();
                if self.scope.contains(&name) {
                    Ok(Term::var(name))
                } else if self.env.instructions.contains(&name) {
                    Ok(Term::inst(name))
                } else if self.env.strict {
                    Err(ParseError::new(pos, format!("unbound name `{name}`")))
                } else {
                    Ok(Term::var(name))
                }
            }
            Tok::Hash => {
                c.bump();
                if *c.peek() == Tok::LBracket {
                    c.bump();
                    let Some(hook) = self.hash_bracket.as_mut() else {
                        return Err(ParseError::new(
                            pos,
                            "`#[...]` is only allowed in rule templates",
                        ));
                    };
                    let t = hook(c)?;
                    c.expect(&Tok::RBracket)?;
                    Ok(t)
                } else {
                    Ok(Term::num(c.nat()?))
                }
            }
            Tok::LParen => {
                c.bump();
                let t = self.term(c)?;
                c.expect(&Tok::RParen)?;
                Ok(t)
            }
            _ => Err(c.unexpected("a term")),
        }
    }

    pub fn stack(&mut self, c: &mut Cursor) -> Result<Stack, ParseError> {
        let mut items = Vec::new();
        while !c.eat(&Tok::Dollar) {
            items.push(self.atom(c)?);
            c.expect(&Tok::Dot)?;
        }
        Ok(Stack::from_terms(items, Stack::bottom()))
    }

    pub fn process(&mut self, c: &mut Cursor) -> Result<Process, ParseError> {
        let head = self.term(c)?;
        c.expect(&Tok::Star)?;
        let stack = self.stack(c)?;
        Ok(Process::new(head, stack))
    }
}

pub fn parse_term_with(text: &str, env: &ParseEnv) -> Result<Term, ParseError> {
    let mut c = Cursor::new(text)?;
    let t = TermParser::new(env).term(&mut c)?;
    c.finish()?;
    Ok(t)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_term_with(text, &ParseEnv::default())
}

pub fn parse_stack_with(text: &str, env: &ParseEnv) -> Result<Stack, ParseError> {
    let mut c = Cursor::new(text)?;
    let s = TermParser::new(env).stack(&mut c)?;
    c.finish()?;
    Ok(s)
}

pub fn parse_stack(text: &str) -> Result<Stack, ParseError> {
    parse_stack_with(text, &ParseEnv::default())
}

pub fn parse_process_with(text: &str, env: &ParseEnv) -> Result<Process, ParseError> {
    let mut c = Cursor::new(text)?;
    let p = TermParser::new(env).process(&mut c)?;
    c.finish()?;
    Ok(p)
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    parse_process_with(text, &ParseEnv::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_term("\\x.x").unwrap(), Term::lam("x", Term::var("x")));
        assert_eq!(parse_term("cc").unwrap(), Term::inst("cc"));
        assert_eq!(parse_term("#7").unwrap(), Term::num(7u32));
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f a b").unwrap();
        let want = Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"));
        assert_eq!(t, want);
    }

    #[test]
    fn multi_binder_sugar() {
        assert_eq!(
            parse_term("\\x y.y x").unwrap(),
            parse_term("\\x.\\y.y x").unwrap()
        );
    }

    #[test]
    fn trailing_lambda_argument() {
        assert_eq!(
            parse_term("f \\x.x").unwrap(),
            parse_term("f (\\x.x)").unwrap()
        );
    }

    #[test]
    fn strict_mode_rejects_unbound() {
        let err = parse_term_with("\\x. y", &ParseEnv::strict()).unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
    }

    #[test]
    fn binder_shadows_instruction() {
        let t = parse_term("\\s. s").unwrap();
        assert_eq!(t, Term::lam("x", Term::var("x")));
    }

    #[test]
    fn process_syntax() {
        let p = parse_process("stop * #5 . $").unwrap();
        assert_eq!(p.head, Term::inst("stop"));
        assert_eq!(p.stack, Stack::bottom().push(Term::num(5u32)));
        assert_eq!(p.to_string(), "stop * #5 . $");
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_term("(\\x.x").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("expected"));
    }
}
