//! Command-line entry point. Exit codes: 0 success, 1 a negative or empty
//! answer to a decision task, 2 usage or evaluation errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamic::{build_transition_system_with_stats, eval_dyn};
use crate::error::{Error, Result};
use crate::flat::eval_flat_with_stats;
use crate::frontend::export::{dot_string, format_stats, json_string};
use crate::frontend::parser::{
    parse_flat_in, parse_proc_in, parse_relation, parse_spec, parse_state_in, structure_from_literals, SpecFile,
};
use crate::lmumu::{eval_state_with_stats, translate_two_sorted};
use crate::module::Valuation;
use crate::structure::{RelationValue, Structure, Universe, DEFAULT_CAP};
use crate::tasks::{self, equiv, TaskInstance};

#[derive(Parser, Debug)]
#[command(name = "modalg", version, about = "Evaluate and reason about modular systems over finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Declarations file (`.mod`).
    file: PathBuf,
    /// Expression text; names of definitions in the file are expanded.
    #[arg(short = 'e', long = "expr", allow_hyphen_values = true)]
    expr: String,
    /// Universe size cap, in bits per structure.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the structures in the extension of a flat expression.
    EvalFlat(Common),
    /// Print the edges of a process expression as index pairs.
    EvalDyn(Common),
    /// Print the structures satisfying a state formula.
    EvalState(Common),
    /// Run a reasoning task.
    Task(TaskArgs),
    /// Print the process form of a state formula.
    Translate(Common),
    /// Write the transition system of a process expression.
    ExportDot {
        #[command(flatten)]
        common: Common,
        /// Output path; standard output if absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        /// Write JSON instead of DOT.
        #[arg(long)]
        json: bool,
    },
    /// Print evaluation statistics.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Sort::Dyn)]
        sort: Sort,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Sort {
    Flat,
    Dyn,
    State,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Mc,
    Mx,
    Ev,
    Sat,
    TempMc,
    Reach,
    TempSat,
    Equiv,
}

#[derive(Args, Debug)]
struct TaskArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Start from a structure declared in the file.
    #[arg(long)]
    input: Option<String>,
    /// Set a relational variable of the input structure, e.g. `P='{(a)}'`.
    #[arg(long = "bind", value_name = "VAR=REL")]
    binds: Vec<String>,
    /// Input variables, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<String>,
    /// Required output value, e.g. `Y='{(a,b)}'`.
    #[arg(long = "out", value_name = "VAR=REL")]
    outputs: Vec<String>,
    /// Goal value for reach, e.g. `P='{(a),(b)}'`.
    #[arg(long = "goal", value_name = "VAR=REL")]
    goals: Vec<String>,
    /// Largest domain tried by sat.
    #[arg(long, default_value_t = 3)]
    domain_cap: usize,
}

enum Outcome {
    Yes,
    No,
}

fn load(common: &Common) -> Result<(SpecFile, Valuation)> {
    let text = std::fs::read_to_string(&common.file)?;
    let spec = parse_spec(&text)?;
    let val = spec.valuation()?;
    Ok((spec, val))
}

fn universe(val: &Valuation, cap: usize) -> Result<Universe> {
    Universe::new(val.sig().clone(), cap)
}

fn assignment(text: &str, val: &Valuation) -> Result<(String, RelationValue)> {
    let (var, rel) = text
        .split_once('=')
        .ok_or_else(|| Error::IllFormed(format!("expected VAR=REL, got `{text}`")))?;
    let var = var.trim().to_string();
    let sym = val.symbol_of(&var)?;
    let rel = parse_relation(rel.trim())?.resolve(val.sig().domain(), val.sig().vocab().arity(sym))?;
    Ok((var, rel))
}

fn assignments(texts: &[String], val: &Valuation) -> Result<BTreeMap<String, RelationValue>> {
    texts.iter().map(|t| assignment(t, val)).collect()
}

fn input_structure(args: &TaskArgs, spec: &SpecFile, val: &Valuation) -> Result<Structure> {
    let mut a = match &args.input {
        Some(name) => spec.structure(name)?,
        None => structure_from_literals(val.sig(), std::iter::empty())?,
    };
    for (var, rel) in assignments(&args.binds, val)? {
        let sym = val.sig().vocab().name(val.symbol_of(&var)?).to_string();
        a = a.with_relation(&sym, &rel)?;
    }
    Ok(a)
}

fn list_structures(out: &mut dyn Write, u: &Universe, indices: impl Iterator<Item = usize>) -> Result<usize> {
    let mut n = 0;
    for i in indices {
        writeln!(out, "{i}: {}", u.sig().describe(u.bits_at(i)))?;
        n += 1;
    }
    Ok(n)
}

fn verdict(out: &mut dyn Write, yes: bool) -> Result<Outcome> {
    writeln!(out, "{}", if yes { "yes" } else { "no" })?;
    Ok(if yes { Outcome::Yes } else { Outcome::No })
}

fn run_task(args: &TaskArgs, out: &mut dyn Write) -> Result<Outcome> {
    let (spec, val) = load(&args.common)?;
    let expr = &args.common.expr;
    let sigma: BTreeSet<String> = args.sigma.iter().cloned().collect();
    match args.kind {
        Kind::Mc => {
            let e = parse_flat_in(expr, &spec)?;
            verdict(out, tasks::mc(&e, &input_structure(args, &spec, &val)?, &val)?)
        }
        Kind::Mx => {
            let e = parse_flat_in(expr, &spec)?;
            let found = tasks::mx(&e, &sigma, &input_structure(args, &spec, &val)?, &val)?;
            for b in &found {
                writeln!(out, "{b}")?;
            }
            Ok(if found.is_empty() { Outcome::No } else { Outcome::Yes })
        }
        Kind::Ev => {
            let e = parse_flat_in(expr, &spec)?;
            let a = input_structure(args, &spec, &val)?;
            match tasks::ev(&e, &sigma, &a, &assignments(&args.outputs, &val)?, &val)? {
                Some(b) => {
                    writeln!(out, "{b}")?;
                    Ok(Outcome::Yes)
                }
                None => {
                    writeln!(out, "none")?;
                    Ok(Outcome::No)
                }
            }
        }
        Kind::Sat => {
            let e = parse_flat_in(expr, &spec)?;
            match tasks::sat_bounded(&e, &val, args.domain_cap)? {
                Some(b) => {
                    writeln!(out, "domain {{{}}}: {b}", b.sig().domain().elements().join(", "))?;
                    Ok(Outcome::Yes)
                }
                None => {
                    writeln!(out, "none")?;
                    Ok(Outcome::No)
                }
            }
        }
        Kind::TempMc => {
            let phi = parse_state_in(expr, &spec)?;
            let u = universe(&val, args.common.cap)?;
            verdict(out, tasks::temp_mc(&phi, &input_structure(args, &spec, &val)?, &val, &u)?)
        }
        Kind::Reach => {
            let a = parse_proc_in(expr, &spec)?;
            let u = universe(&val, args.common.cap)?;
            let start = input_structure(args, &spec, &val)?;
            verdict(out, tasks::reach(&a, &start, &assignments(&args.goals, &val)?, &val, &u)?)
        }
        Kind::TempSat => {
            let phi = parse_state_in(expr, &spec)?;
            match tasks::temp_sat_prop(&phi, &val)? {
                Some(b) => {
                    writeln!(out, "domain {{{}}}: {b}", b.sig().domain().elements().join(", "))?;
                    Ok(Outcome::Yes)
                }
                None => {
                    writeln!(out, "none")?;
                    Ok(Outcome::No)
                }
            }
        }
        Kind::Equiv => {
            let inst = TaskInstance {
                formula: parse_flat_in(expr, &spec)?,
                sigma,
                input: input_structure(args, &spec, &val)?,
                outputs: assignments(&args.outputs, &val)?,
                valuation: val,
            };
            let report = equiv::equivalence_check(&inst)?;
            for o in &report.outcomes {
                writeln!(
                    out,
                    "temp-mc={} reach={} ev={} route={:?} process={}",
                    o.temp_mc, o.reach, o.ev, o.route, o.process
                )?;
            }
            writeln!(out, "{}", if report.pass { "pass" } else { "fail" })?;
            Ok(if report.pass { Outcome::Yes } else { Outcome::No })
        }
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::EvalFlat(c) => {
            let (spec, val) = load(&c)?;
            let e = parse_flat_in(&c.expr, &spec)?;
            let u = universe(&val, c.cap)?;
            let (set, _) = eval_flat_with_stats(&e, &val, &u)?;
            list_structures(out, &u, set.iter())?;
        }
        Command::EvalState(c) => {
            let (spec, val) = load(&c)?;
            let phi = parse_state_in(&c.expr, &spec)?;
            let u = universe(&val, c.cap)?;
            let (set, _) = eval_state_with_stats(&phi, &val, &u)?;
            list_structures(out, &u, set.iter())?;
        }
        Command::EvalDyn(c) => {
            let (spec, val) = load(&c)?;
            let a = parse_proc_in(&c.expr, &spec)?;
            let u = universe(&val, c.cap)?;
            for (i, j) in eval_dyn(&a, &val, &u)?.iter() {
                writeln!(out, "{i} -> {j}")?;
            }
        }
        Command::Translate(c) => {
            let text = std::fs::read_to_string(&c.file)?;
            let spec = parse_spec(&text)?;
            let phi = parse_state_in(&c.expr, &spec)?;
            writeln!(out, "{}", translate_two_sorted(&phi))?;
        }
        Command::ExportDot { common, output, json } => {
            let (spec, val) = load(&common)?;
            let a = parse_proc_in(&common.expr, &spec)?;
            let u = universe(&val, common.cap)?;
            let (ts, _) = build_transition_system_with_stats(&a, &val, &u)?;
            let text = if json { json_string(&ts)? } else { dot_string(&ts) };
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Stats { common, sort } => {
            let (spec, val) = load(&common)?;
            let u = universe(&val, common.cap)?;
            let stats = match sort {
                Sort::Flat => eval_flat_with_stats(&parse_flat_in(&common.expr, &spec)?, &val, &u)?.1,
                Sort::Dyn => build_transition_system_with_stats(&parse_proc_in(&common.expr, &spec)?, &val, &u)?.1,
                Sort::State => eval_state_with_stats(&parse_state_in(&common.expr, &spec)?, &val, &u)?.1,
            };
            write!(out, "{}", format_stats(&stats))?;
        }
        Command::Task(args) => return run_task(&args, out),
    }
    Ok(Outcome::Yes)
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match run(cli, out) {
        Ok(Outcome::Yes) => 0,
        Ok(Outcome::No) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
