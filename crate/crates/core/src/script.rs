//! The `.lc` script language: definitions, primitive symbols, machine runs,
//! extractions, translations and simulation checks.

use crate::arith::{
    parse_expr_at, parse_formula_at, ArithError, Equation, Formula, HFormula, Pattern,
};
use crate::extract::{
    extract_decidable, extract_kamikaze, extract_naive, extract_sigma01, make_decider_sigma01,
    nullity_oracle, ExtractError, ExtractionReport, Mode,
};
use crate::ha2::{simulate_run, SimError, SimVerdict};
use crate::kam::{parse_rule_at, run, Halt, InstructionRule, KamError, MachineConfig, Stats};
use crate::lex::{Cursor, ParseError, Pos, Tok};
use crate::negtrans::{
    formula_nn, translate_process, translate_term, Inliner, NegError, ReturnFormula,
};
use crate::stdlib::{lookup, sigma01_refuter};
use crate::syntax::{ParseEnv, Process, Stack, Term, TermParser};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone)]
pub enum Statement {
    /// Consecutive `Define`s, registered together.
    Define(Vec<(String, Vec<InstructionRule>)>),
    Prim {
        name: String,
        arity: usize,
        equations: Vec<Equation>,
    },
    Use(String),
    Eval {
        process: Process,
        fuel: Option<u64>,
        trace: bool,
    },
    Extract(ExtractSpec),
    Translate(Subject),
    Simulate {
        process: Process,
        fuel: u64,
    },
}

#[derive(Debug, Clone)]
pub struct ExtractSpec {
    pub mode: Mode,
    pub realizer: Term,
    pub symbol: Option<String>,
    pub decider: Option<Term>,
    pub refuter: Option<Term>,
    pub stack: Stack,
    pub trace: bool,
    pub fuel: Option<u64>,
}

#[derive(Debug, Clone)]
pub enum Subject {
    Term(Term),
    Process(Process),
    /// The formula and, when given, the symbol `f` of the pole `∃x f(x)=0`.
    Formula(Formula, Option<String>),
}

#[derive(Debug, Clone)]
pub struct Located {
    pub pos: Pos,
    pub statement: Statement,
}

#[derive(Debug, Clone, Default)]
pub struct Script {
    pub statements: Vec<Located>,
}

pub const DEFAULT_SIMULATE_FUEL: u64 = 1000;

fn keyword_at(c: &Cursor, k: usize, kw: &str) -> bool {
    matches!(c.peek_at(k), Tok::Ident(s) if s == kw)
}

/// Every name introduced by a `Define` or `use` anywhere in the script.
fn declared_names(text: &str) -> Result<BTreeSet<String>, ParseError> {
    let c = Cursor::new(text)?;
    let mut names = BTreeSet::new();
    let mut k = 0;
    let mut at_start = true;
    loop {
        match c.peek_at(k) {
            Tok::Eof => break,
            Tok::Semi => at_start = true,
            Tok::Ident(s) if at_start && (s == "Define" || s == "use") => {
                if let Tok::Ident(name) = c.peek_at(k + 1) {
                    names.insert(name.clone());
                }
                at_start = false;
            }
            _ => at_start = false,
        }
        k += 1;
    }
    Ok(names)
}

fn nat_u64(c: &mut Cursor) -> Result<u64, ParseError> {
    let pos = c.pos();
    let n = c.nat()?;
    u64::try_from(n).map_err(|_| ParseError::new(pos, "number too large"))
}

fn pattern(c: &mut Cursor) -> Result<Pattern, ParseError> {
    match c.peek().clone() {
        Tok::Nat(n) if n == 0u32.into() => {
            c.bump();
            Ok(Pattern::Zero)
        }
        Tok::Ident(s) if s == "s" && *c.peek_at(1) == Tok::LParen => {
            c.bump();
            c.bump();
            let x = c.ident()?;
            c.expect(&Tok::RParen)?;
            Ok(Pattern::Succ(x))
        }
        Tok::Ident(_) => Ok(Pattern::Var(c.ident()?)),
        _ => Err(c.unexpected("a pattern `x`, `0` or `s(x)`")),
    }
}

struct Parser {
    env: ParseEnv,
}

impl Parser {
    fn term(&self, c: &mut Cursor) -> Result<Term, ParseError> {
        TermParser::new(&self.env).term(c)
    }

    fn atom(&self, c: &mut Cursor) -> Result<Term, ParseError> {
        TermParser::new(&self.env).atom(c)
    }

    fn process(&self, c: &mut Cursor) -> Result<Process, ParseError> {
        TermParser::new(&self.env).process(c)
    }

    fn define(&self, c: &mut Cursor) -> Result<InstructionRule, ParseError> {
        if *c.peek_at(1) == Tok::Eq {
            let name = c.ident()?;
            c.expect(&Tok::Eq)?;
            return Ok(InstructionRule::macro_rule(name, self.term(c)?));
        }
        parse_rule_at(c, &self.env)
    }

    fn prim(&self, c: &mut Cursor) -> Result<(String, Equation), ParseError> {
        let name = c.ident()?;
        let mut lhs = Vec::new();
        if c.eat(&Tok::LParen) && !c.eat(&Tok::RParen) {
            loop {
                lhs.push(pattern(c)?);
                if c.eat(&Tok::RParen) {
                    break;
                }
                c.expect(&Tok::Comma)?;
            }
        }
        c.expect(&Tok::Eq)?;
        let rhs = parse_expr_at(c)?;
        Ok((name, Equation { lhs, rhs }))
    }

    fn extract(&self, c: &mut Cursor) -> Result<ExtractSpec, ParseError> {
        let pos = c.pos();
        let mode: Mode = c
            .ident()?
            .parse()
            .map_err(|e: String| ParseError::new(pos, e))?;
        let realizer = self.atom(c)?;
        let mut spec = ExtractSpec {
            mode,
            realizer,
            symbol: None,
            decider: None,
            refuter: None,
            stack: Stack::bottom(),
            trace: false,
            fuel: None,
        };
        while *c.peek() != Tok::Semi {
            if c.eat_keyword("for") {
                spec.symbol = Some(c.ident()?);
            } else if c.eat_keyword("decider") {
                spec.decider = Some(self.atom(c)?);
            } else if c.eat_keyword("refuter") {
                spec.refuter = Some(self.atom(c)?);
            } else if c.eat_keyword("stack") {
                c.expect(&Tok::LBracket)?;
                spec.stack = TermParser::new(&self.env).stack(c)?;
                c.expect(&Tok::RBracket)?;
            } else if c.eat_keyword("trace") {
                spec.trace = true;
            } else if c.eat_keyword("fuel") {
                spec.fuel = Some(nat_u64(c)?);
            } else {
                return Err(
                    c.unexpected("`for`, `decider`, `refuter`, `stack`, `trace`, `fuel` or `;`")
                );
            }
        }
        Ok(spec)
    }

    fn statement(
        &mut self,
        c: &mut Cursor,
        pending: &mut Vec<(String, Vec<InstructionRule>)>,
    ) -> Result<Option<Statement>, ParseError> {
        let pos = c.pos();
        let kw = match c.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return Err(c.unexpected("a statement")),
        };
        c.bump();
        let st = match kw.as_str() {
            "Define" => {
                let rule = self.define(c)?;
                match pending.iter_mut().find(|(n, _)| *n == rule.head) {
                    Some((_, rules)) => rules.push(rule),
                    None => pending.push((rule.head.clone(), vec![rule])),
                }
                None
            }
            "Prim" => {
                let (name, eq) = self.prim(c)?;
                Some(Statement::Prim {
                    name,
                    arity: eq.lhs.len(),
                    equations: vec![eq],
                })
            }
            "use" => Some(Statement::Use(c.ident()?)),
            "Eval" => {
                let (mut fuel, mut trace) = (None, false);
                loop {
                    if keyword_at(c, 0, "fuel") && matches!(c.peek_at(1), Tok::Nat(_)) {
                        c.bump();
                        fuel = Some(nat_u64(c)?);
                    } else if keyword_at(c, 0, "trace") && *c.peek_at(1) != Tok::Star {
                        c.bump();
                        trace = true;
                    } else {
                        break;
                    }
                }
                Some(Statement::Eval {
                    process: self.process(c)?,
                    fuel,
                    trace,
                })
            }
            "Extract" => Some(Statement::Extract(self.extract(c)?)),
            "Translate" => {
                let pos = c.pos();
                let subject = match c.ident()?.as_str() {
                    "term" => Subject::Term(self.term(c)?),
                    "process" => Subject::Process(self.process(c)?),
                    "formula" => {
                        let pole = if c.eat_keyword("for") {
                            Some(c.ident()?)
                        } else {
                            None
                        };
                        Subject::Formula(parse_formula_at::<Formula>(c)?, pole)
                    }
                    other => {
                        return Err(ParseError::new(pos, format!("cannot translate `{other}`")))
                    }
                };
                Some(Statement::Translate(subject))
            }
            "Simulate" => {
                let mut fuel = DEFAULT_SIMULATE_FUEL;
                if keyword_at(c, 0, "fuel") && matches!(c.peek_at(1), Tok::Nat(_)) {
                    c.bump();
                    fuel = nat_u64(c)?;
                }
                Some(Statement::Simulate {
                    process: self.process(c)?,
                    fuel,
                })
            }
            other => return Err(ParseError::new(pos, format!("unknown statement `{other}`"))),
        };
        c.expect(&Tok::Semi)?;
        Ok(st)
    }
}

/// Parses a whole script. Names introduced by `Define` and `use` are
/// instructions everywhere in the script.
pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let names = declared_names(text)?;
    let mut p = Parser {
        env: ParseEnv::default().with_instructions(names),
    };
    let mut c = Cursor::new(text)?;
    let mut statements: Vec<Located> = Vec::new();
    let mut pending = Vec::new();
    let mut pending_pos = c.pos();
    while !c.at_eof() {
        let pos = c.pos();
        let is_define = keyword_at(&c, 0, "Define");
        if is_define && pending.is_empty() {
            pending_pos = pos;
        }
        if !is_define && !pending.is_empty() {
            statements.push(Located {
                pos: pending_pos,
                statement: Statement::Define(std::mem::take(&mut pending)),
            });
        }
        let Some(st) = p.statement(&mut c, &mut pending)? else {
            continue;
        };
        if let (
            Statement::Prim {
                name,
                arity,
                equations,
            },
            Some(Located {
                statement:
                    Statement::Prim {
                        name: prev,
                        arity: pa,
                        equations: eqs,
                    },
                ..
            }),
        ) = (&st, statements.last_mut())
        {
            if prev == name && pa == arity {
                eqs.extend(equations.iter().cloned());
                continue;
            }
        }
        statements.push(Located { pos, statement: st });
    }
    if !pending.is_empty() {
        statements.push(Located {
            pos: pending_pos,
            statement: Statement::Define(pending),
        });
    }
    Ok(Script { statements })
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("line {line}: {source}")]
    Kam { line: usize, source: KamError },
    #[error("line {line}: {source}")]
    Arith { line: usize, source: ArithError },
    #[error("line {line}: {source}")]
    Extract { line: usize, source: ExtractError },
    #[error("line {line}: {source}")]
    Translate { line: usize, source: NegError },
    #[error("line {line}: {source}")]
    Simulate { line: usize, source: SimError },
    #[error("line {line}: no library term named `{name}`")]
    UnknownLibraryTerm { line: usize, name: String },
    #[error("line {line}: {mode} extraction needs `for <symbol>`")]
    MissingSymbol { line: usize, mode: Mode },
}

/// Worst event of a script run, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum Status {
    #[default]
    Ok,
    /// An extraction produced no verified witness, or a simulation failed.
    Unverified,
    /// Some run ran out of fuel.
    FuelExhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Unverified => 2,
            Status::FuelExhausted => 3,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScriptReport {
    pub output: String,
    pub status: Status,
    pub evals: Vec<crate::kam::RunOutcome>,
    pub extractions: Vec<ExtractionReport>,
}

/// Two-column table of counts, largest first.
pub fn stats_table(stats: &Stats) -> String {
    let rows = stats.rows();
    let half = rows.len().div_ceil(2);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let cell = |(k, v): &(&str, u64)| format!("{k:<width$} {v:>7}");
    let mut out = String::new();
    for i in 0..half {
        let right = rows
            .get(i + half)
            .map(|r| format!("  |  {}", cell(r)))
            .unwrap_or_default();
        let _ = writeln!(out, "  {}{}", cell(&rows[i]), right.trim_end());
    }
    out
}

fn join_numbers(ns: &[num_bigint::BigUint]) -> String {
    ns.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Default)]
pub struct Runner {
    pub cfg: MachineConfig,
}

impl Runner {
    pub fn new(cfg: MachineConfig) -> Self {
        Runner { cfg }
    }

    pub fn run(&mut self, script: &Script) -> Result<ScriptReport, ScriptError> {
        let mut report = ScriptReport::default();
        for st in &script.statements {
            self.statement(st, &mut report)?;
        }
        Ok(report)
    }

    fn statement(&mut self, st: &Located, report: &mut ScriptReport) -> Result<(), ScriptError> {
        let line = st.pos.line;
        let out = &mut report.output;
        match &st.statement {
            Statement::Define(batch) => {
                self.cfg = self
                    .cfg
                    .clone()
                    .register_batch(batch.clone())
                    .map_err(|source| ScriptError::Kam { line, source })?;
            }
            Statement::Prim {
                name,
                arity,
                equations,
            } => {
                let mut sig = self.cfg.signature().clone();
                sig.define(name, *arity, equations.clone())
                    .map_err(|source| ScriptError::Arith { line, source })?;
                self.cfg = self.cfg.clone().with_signature(sig);
            }
            Statement::Use(name) => {
                let entry = lookup(name).ok_or_else(|| ScriptError::UnknownLibraryTerm {
                    line,
                    name: name.clone(),
                })?;
                let rule = InstructionRule::macro_rule(name.clone(), entry.term);
                self.cfg = self
                    .cfg
                    .clone()
                    .register_instruction(name, vec![rule])
                    .map_err(|source| ScriptError::Kam { line, source })?;
            }
            Statement::Eval {
                process,
                fuel,
                trace,
            } => {
                let mut cfg = self.cfg.clone().with_trace(*trace);
                if let Some(f) = fuel {
                    cfg = cfg.with_fuel(*f);
                }
                let o = run(process, &cfg);
                let _ = writeln!(out, "> {process}");
                for l in &o.trace {
                    let _ = writeln!(out, "{l}");
                }
                for n in &o.printed {
                    let _ = writeln!(out, "{n}");
                }
                let _ = writeln!(out, "{}", o.final_process);
                let _ = writeln!(out, "halt: {} after {} steps", o.halt, o.steps);
                out.push_str(&stats_table(&o.stats));
                if o.halt == Halt::FuelExhausted {
                    report.status = report.status.max(Status::FuelExhausted);
                }
                report.evals.push(o);
            }
            Statement::Extract(spec) => {
                let r = self.extract(spec, line)?;
                let _ = writeln!(out, "> extract {} {}", spec.mode, spec.realizer);
                if !r.guesses.is_empty() {
                    let _ = writeln!(out, "guesses: {}", join_numbers(&r.guesses));
                }
                let witness = r
                    .witness
                    .as_ref()
                    .map_or("none".to_string(), ToString::to_string);
                let verified = match r.verified {
                    Some(true) => "verified",
                    Some(false) => "NOT verified",
                    None => "unchecked",
                };
                let _ = writeln!(
                    out,
                    "witness: {witness} ({verified}), {} after {} steps",
                    r.outcome.halt, r.outcome.steps
                );
                let status = match (&r.outcome.halt, r.verified) {
                    (Halt::FuelExhausted, _) => Status::FuelExhausted,
                    (_, Some(true)) => Status::Ok,
                    _ if r.witness.is_none() || r.verified == Some(false) => Status::Unverified,
                    _ => Status::Ok,
                };
                report.status = report.status.max(status);
                report.extractions.push(r);
            }
            Statement::Translate(subject) => {
                let tr = |source| ScriptError::Translate { line, source };
                match subject {
                    Subject::Term(t) => {
                        let _ = writeln!(
                            out,
                            "> translate {t}\n{}",
                            translate_term(t, &self.cfg).map_err(tr)?
                        );
                    }
                    Subject::Process(p) => {
                        let _ = writeln!(
                            out,
                            "> translate {p}\n{}",
                            translate_process(p, &self.cfg).map_err(tr)?
                        );
                    }
                    Subject::Formula(a, pole) => {
                        let r = match pole {
                            Some(f) => ReturnFormula::sigma01(f),
                            None => ReturnFormula(HFormula::pred("R", vec![])),
                        };
                        let _ = writeln!(out, "> translate {a}\n{}", formula_nn(a, &r));
                    }
                }
            }
            Statement::Simulate { process, fuel } => {
                let inlined = Inliner::new(&self.cfg)
                    .process(process)
                    .map_err(|source| ScriptError::Translate { line, source })?;
                let r = simulate_run(&inlined, &self.cfg, *fuel)
                    .map_err(|source| ScriptError::Simulate { line, source })?;
                let _ = writeln!(out, "> simulate {process}");
                for (i, s) in r.steps.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "step {}: {} {} ({} weak steps)",
                        i + 1,
                        s.rule,
                        s.verdict,
                        s.weak_steps
                    );
                }
                let failed = r.count(SimVerdict::Failed);
                let open = r.count(SimVerdict::Inconclusive);
                let _ = writeln!(
                    out,
                    "simulated {} steps: {} failed, {} inconclusive",
                    r.steps.len(),
                    failed,
                    open
                );
                if failed > 0 {
                    report.status = report.status.max(Status::Unverified);
                }
            }
        }
        Ok(())
    }

    fn extract(&self, spec: &ExtractSpec, line: usize) -> Result<ExtractionReport, ScriptError> {
        let mut cfg = self.cfg.clone();
        if let Some(f) = spec.fuel {
            cfg = cfg.with_fuel(f);
        }
        let ex = |source| ScriptError::Extract { line, source };
        let need = || {
            spec.symbol.clone().ok_or(ScriptError::MissingSymbol {
                line,
                mode: spec.mode,
            })
        };
        let sig = cfg.signature().clone();
        match spec.mode {
            Mode::Naive => match &spec.symbol {
                Some(f) => {
                    let oracle = nullity_oracle(&sig, f).map_err(ex)?;
                    extract_naive(&spec.realizer, &cfg, &spec.stack, Some(&oracle)).map_err(ex)
                }
                None => extract_naive(&spec.realizer, &cfg, &spec.stack, None).map_err(ex),
            },
            Mode::Sigma01 => {
                extract_sigma01(&spec.realizer, &need()?, &cfg, &spec.stack, spec.trace).map_err(ex)
            }
            Mode::Decidable => {
                let f = need()?;
                let oracle = nullity_oracle(&sig, &f).map_err(ex)?;
                let d = match &spec.decider {
                    Some(d) => d.clone(),
                    None => make_decider_sigma01(&sig, &f).map_err(ex)?,
                };
                let r = spec.refuter.clone().unwrap_or_else(sigma01_refuter);
                extract_decidable(&spec.realizer, &d, &r, &oracle, &cfg, &spec.stack).map_err(ex)
            }
            Mode::Kamikaze => {
                let f = need()?;
                let oracle = nullity_oracle(&sig, &f).map_err(ex)?;
                let r = spec.refuter.clone().unwrap_or_else(sigma01_refuter);
                extract_kamikaze(&spec.realizer, &r, Some(&oracle), &cfg, &spec.stack).map_err(ex)
            }
        }
    }
}

/// Parses and runs a script from a fresh machine configuration.
pub fn run_script(text: &str) -> Result<ScriptReport, ScriptError> {
    let script = parse_script(text)?;
    Runner::default().run(&script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stdlib::{demo_script, Build};
    use num_bigint::BigUint;

    #[test]
    fn only_stop() {
        let r = run_script("Eval stop * #5 . $;").unwrap();
        let o = &r.evals[0];
        assert_eq!(o.halt, Halt::FinalStop(BigUint::from(5u32)));
        assert_eq!(o.steps, 0);
        assert_eq!(r.status, Status::Ok);
    }

    #[test]
    fn demo_guesses() {
        for build in [Build::Instructions, Build::Fixpoint] {
            let r = run_script(&demo_script(1000, build)).unwrap();
            let want: Vec<BigUint> = [0u32, 1, 3, 7, 15, 31, 63, 127, 255, 511, 1023]
                .map(BigUint::from)
                .to_vec();
            assert_eq!(r.evals[0].printed, want);
            assert_eq!(r.evals[0].final_process.to_string(), "stop * #1023 . $");
            assert_eq!(r.extractions[0].witness, Some(BigUint::from(1023u32)));
            assert_eq!(r.status, Status::Ok, "{}", r.output);
        }
    }

    #[test]
    fn prim_equations_group() {
        let text = "Prim dbl(0) = 0;\nPrim dbl(s(x)) = s(s(dbl(x)));\nDefine d #n k => k #[dbl(n)];\nEval d #4 stop * $;";
        let r = run_script(text).unwrap();
        assert_eq!(r.evals[0].halt, Halt::FinalStop(BigUint::from(8u32)));
    }

    #[test]
    fn mutual_definitions_in_one_batch() {
        let text = "Define ev #0 => stop #1;\nDefine ev #n => od #[pred(n)];\n\
                    Define od #0 => stop #0;\nDefine od #n => ev #[pred(n)];\nEval ev #7 * $;";
        let r = run_script(text).unwrap();
        assert_eq!(r.evals[0].halt, Halt::FinalStop(BigUint::from(0u32)));
    }

    #[test]
    fn forward_reference_across_batches_fails() {
        let text = "Define a = b;\nEval stop * #0 . $;\nDefine b = stop;";
        assert!(matches!(
            run_script(text),
            Err(ScriptError::Kam { line: 1, .. })
        ));
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = parse_script("Eval stop * #5 . $\nEval x;").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_script("Frobnicate;").is_err());
    }

    #[test]
    fn translate_and_simulate() {
        let text = "Translate term \\x.x;\nTranslate formula for goal forall x. null(x);\nSimulate (\\x.x) y * $;";
        let r = run_script(text).unwrap();
        assert!(
            r.output.contains("simulated 2 steps: 0 failed"),
            "{}",
            r.output
        );
        assert_eq!(r.status, Status::Ok);
    }

    #[test]
    fn unverified_and_fuel_status() {
        let r =
            run_script("Prim z(x) = s(x);\nExtract sigma01 (\\k. k #3 (\\w.w)) for z;").unwrap();
        assert_eq!(r.status, Status::Unverified);
        let r = run_script("Eval fuel 10 (\\x. x x) (\\x. x x) * $;").unwrap();
        assert_eq!(r.status, Status::FuelExhausted);
    }

    #[test]
    fn library_terms() {
        let r = run_script("use plus;\nEval plus #2 #3 stop * $;").unwrap();
        assert_eq!(r.evals[0].halt, Halt::FinalStop(BigUint::from(5u32)));
        assert!(matches!(
            run_script("use nothing;"),
            Err(ScriptError::UnknownLibraryTerm { .. })
        ));
    }
}
