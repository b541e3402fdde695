use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use krivine::arith::{parse_formula, HFormula};
use krivine::extract::{ExtractionReport, Mode};
use krivine::ha2::{read_witness, simulate_run, RunReport, SimVerdict};
use krivine::kam::{Halt, MachineConfig, RunOutcome, Stats, DEFAULT_FUEL};
use krivine::lex::Pos;
use krivine::negtrans::{
    formula_bot, formula_nn, translate_process, translate_term, Inliner, ReturnFormula,
};
use krivine::script::{
    parse_script, stats_table, ExtractSpec, Located, Runner, Script, ScriptReport, Statement,
    Status, DEFAULT_SIMULATE_FUEL,
};
use krivine::syntax::{parse_process_with, parse_stack_with, parse_term_with};
use krivine::Stack;
use num_bigint::BigUint;
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "krivine",
    version,
    about = "Krivine machine scripts, witness extraction and CPS checks"
)]
struct Cli {
    /// Print a JSON document instead of text.
    #[arg(long = "json-like", global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a script and print its session.
    Run { script: PathBuf },
    /// Extract a witness from a realizer.
    Extract(ExtractArgs),
    /// Translate a term, process or formula.
    Translate(TranslateArgs),
    /// Check the CPS simulation along a machine run.
    Simulate(SimulateArgs),
    /// Print the statistics of every Eval, optionally against a second script.
    Stats {
        script: PathBuf,
        /// Second script whose Evals are compared pairwise.
        #[arg(long)]
        against: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExtractArgs {
    /// One of naive, sigma01, decidable, kamikaze.
    #[arg(long)]
    mode: Mode,
    /// File holding the realizer term.
    #[arg(long)]
    realizer: PathBuf,
    /// Unary symbol of the formula `∃x f(x) = 0`.
    #[arg(long = "f")]
    symbol: Option<String>,
    /// Script whose definitions are loaded first.
    #[arg(long)]
    defs: Option<PathBuf>,
    /// Decider term; built from `--f` when omitted.
    #[arg(long)]
    decider: Option<String>,
    /// Refuter term for kamikaze extraction.
    #[arg(long)]
    refuter: Option<String>,
    /// Record every guess the realizer tries.
    #[arg(long)]
    trace_guesses: bool,
    #[arg(long)]
    fuel: Option<u64>,
    /// Initial stack below the wrapper, e.g. `#3 . $`.
    #[arg(long)]
    stack: Option<String>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("subject").required(true).args(["term", "process", "formula"])))]
struct TranslateArgs {
    #[arg(long)]
    term: Option<String>,
    #[arg(long)]
    process: Option<String>,
    /// Print `A^⊥` and `A^¬¬` for a PA2 formula.
    #[arg(long)]
    formula: Option<String>,
    /// Return formula; defaults to the predicate `R`.
    #[arg(long = "R")]
    pole: Option<String>,
    /// Weak-reduce the translated process and read the witness pair.
    #[arg(long, requires = "process")]
    read_witness: bool,
    /// Script whose definitions are loaded first.
    #[arg(long)]
    defs: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Process to run, e.g. `cc (\k. k #1) * $`.
    #[arg(long)]
    process: String,
    #[arg(long, default_value_t = DEFAULT_SIMULATE_FUEL)]
    fuel: u64,
    #[arg(long)]
    defs: Option<PathBuf>,
}

/// Command result: text or JSON, and the exit code.
struct Done {
    text: String,
    json: Value,
    code: u8,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_script(path: &Path) -> Result<Script> {
    parse_script(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Machine configuration after the Define, Prim and use statements of `defs`.
fn load_defs(defs: Option<&PathBuf>) -> Result<MachineConfig> {
    let Some(path) = defs else {
        return Ok(MachineConfig::new());
    };
    let mut script = load_script(path)?;
    script.statements.retain(|s| {
        matches!(
            s.statement,
            Statement::Define(_) | Statement::Prim { .. } | Statement::Use(_)
        )
    });
    let mut runner = Runner::default();
    runner
        .run(&script)
        .with_context(|| format!("in {}", path.display()))?;
    Ok(runner.cfg)
}

fn number(n: &BigUint) -> Value {
    match u64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

fn numbers(ns: &[BigUint]) -> Value {
    Value::Array(ns.iter().map(number).collect())
}

fn stats_json(stats: &Stats) -> Value {
    Value::Object(
        stats
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect::<Map<_, _>>(),
    )
}

fn outcome_json(o: &RunOutcome) -> Value {
    json!({
        "final": o.final_process.to_string(),
        "halt": o.halt.to_string(),
        "stop_value": o.stop_value().map(number),
        "steps": o.steps,
        "printed": numbers(&o.printed),
        "stats": stats_json(&o.stats),
    })
}

fn extraction_json(r: &ExtractionReport) -> Value {
    json!({
        "mode": r.mode.name(),
        "witness": r.witness.as_ref().map(number),
        "verified": r.verified,
        "guesses": numbers(&r.guesses),
        "halt": r.outcome.halt.to_string(),
        "steps": r.outcome.steps,
        "stats": stats_json(&r.outcome.stats),
    })
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Unverified => "unverified",
        Status::FuelExhausted => "fuel-exhausted",
    }
}

fn eval_processes(script: &Script) -> Vec<String> {
    script
        .statements
        .iter()
        .filter_map(|s| match &s.statement {
            Statement::Eval { process, .. } => Some(process.to_string()),
            _ => None,
        })
        .collect()
}

fn run_file(path: &Path) -> Result<(Script, ScriptReport)> {
    let script = load_script(path)?;
    let report = Runner::default()
        .run(&script)
        .with_context(|| format!("in {}", path.display()))?;
    Ok((script, report))
}

fn cmd_run(path: &Path) -> Result<Done> {
    let (script, report) = run_file(path)?;
    let evals: Vec<Value> = eval_processes(&script)
        .into_iter()
        .zip(&report.evals)
        .map(|(p, o)| {
            let mut v = outcome_json(o);
            v["process"] = json!(p);
            v
        })
        .collect();
    let json = json!({
        "command": "run",
        "status": status_name(report.status),
        "exit_code": report.status.exit_code(),
        "evals": evals,
        "extractions": report.extractions.iter().map(extraction_json).collect::<Vec<_>>(),
        "output": report.output,
    });
    Ok(Done {
        text: report.output,
        json,
        code: report.status.exit_code() as u8,
    })
}

fn extraction_code(r: &ExtractionReport) -> u8 {
    match (&r.outcome.halt, r.verified) {
        (Halt::FuelExhausted, _) => Status::FuelExhausted.exit_code() as u8,
        (_, Some(true)) => 0,
        (_, None) if r.witness.is_some() => 0,
        _ => Status::Unverified.exit_code() as u8,
    }
}

fn cmd_extract(a: &ExtractArgs) -> Result<Done> {
    let cfg = load_defs(a.defs.as_ref())?;
    let env = cfg.parse_env();
    let term = |text: &str, what: &str| {
        parse_term_with(text.trim(), &env).with_context(|| format!("parsing the {what}"))
    };
    let realizer = term(&read(&a.realizer)?, "realizer")?;
    let stack = match &a.stack {
        Some(s) => parse_stack_with(s, &env).context("parsing --stack")?,
        None => Stack::bottom(),
    };
    let spec = ExtractSpec {
        mode: a.mode,
        realizer,
        symbol: a.symbol.clone(),
        decider: a
            .decider
            .as_deref()
            .map(|d| term(d, "decider"))
            .transpose()?,
        refuter: a
            .refuter
            .as_deref()
            .map(|r| term(r, "refuter"))
            .transpose()?,
        stack,
        trace: a.trace_guesses,
        fuel: a.fuel,
    };
    let script = Script {
        statements: vec![Located {
            pos: Pos { line: 1, col: 1 },
            statement: Statement::Extract(spec),
        }],
    };
    let report = Runner::new(cfg).run(&script)?;
    let r = report
        .extractions
        .first()
        .context("extraction produced no report")?;
    let mut json = extraction_json(r);
    json["command"] = json!("extract");
    Ok(Done {
        text: report.output,
        json,
        code: extraction_code(r),
    })
}

fn cmd_translate(a: &TranslateArgs) -> Result<Done> {
    let cfg = load_defs(a.defs.as_ref())?;
    let env = cfg.parse_env();
    let mut text = String::new();
    let mut json = json!({ "command": "translate" });
    if let Some(t) = &a.term {
        let t = parse_term_with(t, &env).context("parsing --term")?;
        let h = translate_term(&t, &cfg)?;
        writeln!(text, "{h}")?;
        json["input"] = json!(t.to_string());
        json["translation"] = json!(h.to_string());
    } else if let Some(p) = &a.process {
        let p = parse_process_with(p, &env).context("parsing --process")?;
        let h = translate_process(&p, &cfg)?;
        writeln!(text, "{h}")?;
        json["input"] = json!(p.to_string());
        json["translation"] = json!(h.to_string());
        if a.read_witness {
            let (n, _) = read_witness(&h, DEFAULT_FUEL)?;
            writeln!(text, "witness: {n}")?;
            json["witness"] = number(&n);
        }
    } else if let Some(f) = &a.formula {
        let f = parse_formula(f).context("parsing --formula")?;
        let r = match &a.pole {
            Some(r) => ReturnFormula::parse(r).context("parsing --R")?,
            None => ReturnFormula(HFormula::pred("R", vec![])),
        };
        let (bot, nn) = (formula_bot(&f, &r), formula_nn(&f, &r));
        writeln!(text, "bot: {bot}\nnn:  {nn}")?;
        json["input"] = json!(f.to_string());
        json["pole"] = json!(r.0.to_string());
        json["bot"] = json!(bot.to_string());
        json["nn"] = json!(nn.to_string());
    }
    Ok(Done {
        text,
        json,
        code: 0,
    })
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Done> {
    let cfg = load_defs(a.defs.as_ref())?;
    let p = parse_process_with(&a.process, &cfg.parse_env()).context("parsing --process")?;
    let p = Inliner::new(&cfg).process(&p)?;
    let r: RunReport = simulate_run(&p, &cfg, a.fuel)?;
    let mut text = String::new();
    for (i, s) in r.steps.iter().enumerate() {
        writeln!(
            text,
            "step {}: {} {} ({} weak steps)",
            i + 1,
            s.rule,
            s.verdict,
            s.weak_steps
        )?;
    }
    let count = |v| r.count(v);
    let (failed, open) = (count(SimVerdict::Failed), count(SimVerdict::Inconclusive));
    writeln!(
        text,
        "simulated {} steps: {} failed, {} inconclusive",
        r.steps.len(),
        failed,
        open
    )?;
    let json = json!({
        "command": "simulate",
        "steps": r.steps.iter().map(|s| json!({
            "rule": s.rule,
            "verdict": s.verdict.to_string(),
            "weak_steps": s.weak_steps,
        })).collect::<Vec<_>>(),
        "syntactic": count(SimVerdict::Syntactic),
        "inner": count(SimVerdict::Inner),
        "inconclusive": open,
        "failed": failed,
        "final": r.final_process.to_string(),
    });
    let code = if failed > 0 {
        Status::Unverified.exit_code() as u8
    } else {
        0
    };
    Ok(Done { text, json, code })
}

fn delta_table(a: &Stats, b: &Stats) -> String {
    let delta = a.delta(b);
    let width = delta.keys().map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    for (k, d) in &delta {
        let _ = writeln!(out, "  {k:<width$} {:>9} {:>9} {d:>+9}", a.get(k), b.get(k));
    }
    out
}

fn cmd_stats(script: &Path, against: Option<&PathBuf>) -> Result<Done> {
    let (s1, r1) = run_file(script)?;
    let procs = eval_processes(&s1);
    let mut text = String::new();
    let mut evals = Vec::new();
    let Some(other) = against else {
        for (p, o) in procs.iter().zip(&r1.evals) {
            writeln!(text, "> {p}\n{}", stats_table(&o.stats))?;
            evals.push(json!({ "process": p, "steps": o.steps, "stats": stats_json(&o.stats) }));
        }
        return Ok(Done {
            text,
            json: json!({ "command": "stats", "evals": evals }),
            code: 0,
        });
    };
    let (s2, r2) = run_file(other)?;
    if r1.evals.len() != r2.evals.len() {
        bail!(
            "{} has {} Eval statements, {} has {}",
            script.display(),
            r1.evals.len(),
            other.display(),
            r2.evals.len()
        );
    }
    let mut same_output = true;
    for ((p, q), (a, b)) in procs
        .iter()
        .zip(eval_processes(&s2))
        .zip(r1.evals.iter().zip(&r2.evals))
    {
        let identical = a.printed == b.printed && a.halt == b.halt;
        same_output &= identical;
        writeln!(text, "> {p}\n> {q}")?;
        writeln!(
            text,
            "printed: {}",
            if identical { "identical" } else { "DIFFERENT" }
        )?;
        text.push_str(&delta_table(&a.stats, &b.stats));
        evals.push(json!({
            "left": { "process": p, "steps": a.steps, "printed": numbers(&a.printed), "stats": stats_json(&a.stats) },
            "right": { "process": q, "steps": b.steps, "printed": numbers(&b.printed), "stats": stats_json(&b.stats) },
            "identical_output": identical,
            "delta": a.stats.delta(&b.stats),
        }));
    }
    let json = json!({ "command": "stats", "evals": evals, "identical_output": same_output });
    Ok(Done {
        text,
        json,
        code: 0,
    })
}

fn dispatch(cli: &Cli) -> Result<Done> {
    match &cli.command {
        Command::Run { script } => cmd_run(script),
        Command::Extract(a) => cmd_extract(a),
        Command::Translate(a) => cmd_translate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Stats { script, against } => cmd_stats(script, against.as_ref()),
    }
}

const WORKER_STACK: usize = 1 << 30;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    // Translated terms are deep; reduction recurses on them.
    let worker = std::thread::Builder::new()
        .stack_size(WORKER_STACK)
        .spawn(move || {
            let r = dispatch(&cli);
            (cli, r)
        });
    let (cli, result) = match worker.map(|h| h.join()) {
        Ok(Ok(pair)) => pair,
        _ => {
            eprintln!("error: worker thread failed");
            return ExitCode::from(1);
        }
    };
    match result {
        Ok(done) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&done.json).expect("serializable")
                );
            } else {
                print!("{}", done.text);
            }
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
