//! Cross-checks witness existence on a flat expression against model
//! checking and reachability on a process derived from it, for every
//! choice of directions on the internal variables.
//!
//! The derived process starts by guessing all output variables, then runs
//! the expression: atoms become actions writing their outputs, an
//! intersection runs its conjuncts in sequence and then re-tests every
//! atomic conjunct, a selection is followed by a test of its condition on
//! the reached state, and union and projection carry over.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamic::eval::select_cases;
use crate::dynamic::{Dir, ImageEvaluator, ProcExpr};
use crate::error::{Error, Result};
use crate::flat::ast::{free_relational_vars, ConstRelation, FlatExpr, Operand};
use crate::lmumu::StateExpr;
use crate::module::{AtomicModule, Builtin, Valuation};
use crate::structure::{Universe, DEFAULT_CAP};
use crate::tasks::temporal::{reach, temp_mc};
use crate::tasks::{check_outputs, check_signature, ev, mask_of_vars, TaskInstance};

/// Name of the synthetic module that accepts every structure.
pub const GUESS_MODULE: &str = "__guess";
/// Most internal-variable occurrences considered (2^this assignments).
const MAX_CHOICES: usize = 12;
/// Budget for the explicit route: assignments times squared universe size.
const EXPLICIT_BUDGET: usize = 10_000_000;

/// Direction of each internal variable, per atom occurrence in pre-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoAssignment {
    pub choices: Vec<BTreeMap<String, Dir>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Full evaluation on the slice of structures agreeing with the input on frozen symbols.
    Explicit,
    /// Successor cubes of the input structure only.
    Image,
}

#[derive(Debug, Clone)]
pub struct AssignmentOutcome {
    pub assignment: IoAssignment,
    pub process: ProcExpr,
    pub temp_mc: bool,
    pub reach: bool,
    pub ev: bool,
    pub route: Route,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub outcomes: Vec<AssignmentOutcome>,
    /// All three answers agree for every assignment.
    pub pass: bool,
}

fn atoms(e: &FlatExpr) -> Vec<&Vec<String>> {
    e.subexpressions()
        .into_iter()
        .filter_map(|s| match s {
            FlatExpr::Atom { args, .. } => Some(args),
            _ => None,
        })
        .collect()
}

fn internal_args<'a>(
    args: &'a [String],
    sigma: &'a BTreeSet<String>,
    outputs: &'a BTreeSet<String>,
) -> impl Iterator<Item = &'a String> {
    let mut seen = BTreeSet::new();
    args.iter().filter(move |a| !sigma.contains(*a) && !outputs.contains(*a) && seen.insert(a.as_str()))
}

/// Every direction choice for the internal variables.
pub fn io_assignments(
    e: &FlatExpr,
    sigma: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
) -> Result<Vec<IoAssignment>> {
    let slots: Vec<(usize, String)> = atoms(e)
        .into_iter()
        .enumerate()
        .flat_map(|(i, args)| internal_args(args, sigma, outputs).map(move |a| (i, a.clone())).collect::<Vec<_>>())
        .collect();
    if slots.len() > MAX_CHOICES {
        return Err(Error::CapExceeded { bits: slots.len(), cap: MAX_CHOICES });
    }
    let occurrences = atoms(e).len();
    Ok((0..1usize << slots.len())
        .map(|code| {
            let mut choices = vec![BTreeMap::new(); occurrences];
            for (k, (i, var)) in slots.iter().enumerate() {
                let dir = if code >> (slots.len() - 1 - k) & 1 == 1 { Dir::Out } else { Dir::In };
                choices[*i].insert(var.clone(), dir);
            }
            IoAssignment { choices }
        })
        .collect())
}

struct Deriver<'a> {
    sigma: &'a BTreeSet<String>,
    outputs: &'a BTreeSet<String>,
    io: &'a IoAssignment,
    next: usize,
}

impl Deriver<'_> {
    fn atom(&mut self, module: &str, args: &[String]) -> Result<ProcExpr> {
        let choice = self
            .io
            .choices
            .get(self.next)
            .ok_or_else(|| Error::IllFormed("assignment has too few occurrences".into()))?;
        self.next += 1;
        let dirs = args
            .iter()
            .map(|a| {
                if self.sigma.contains(a) {
                    Ok(Dir::In)
                } else if self.outputs.contains(a) {
                    Ok(Dir::Out)
                } else {
                    choice.get(a).copied().ok_or_else(|| Error::IllFormed(format!("no direction for `{a}`")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if dirs.iter().all(|d| *d == Dir::In) {
            return Ok(ProcExpr::test(module, args.iter().cloned()));
        }
        Ok(ProcExpr::action(module, args.iter().cloned().zip(dirs)))
    }

    fn derive(&mut self, e: &FlatExpr) -> Result<ProcExpr> {
        if e.as_intersection().is_some() {
            let mut conjuncts = Vec::new();
            flatten_conjuncts(e, &mut conjuncts);
            let mut parts = Vec::new();
            let mut rechecks = Vec::new();
            for c in &conjuncts {
                parts.push(self.derive(c)?);
                if let FlatExpr::Atom { module, args } = c {
                    rechecks.push(ProcExpr::test(module, args.iter().cloned()));
                }
            }
            // A compound conjunct is not re-tested, so nothing after it may
            // overwrite what it wrote.
            for (i, (c, p)) in conjuncts.iter().zip(&parts).enumerate() {
                if matches!(c, FlatExpr::Atom { .. }) {
                    continue;
                }
                let written = p.io_vocab().1;
                for later in &parts[i + 1..] {
                    if later.io_vocab().1.intersection(&written).next().is_some() {
                        return Err(Error::Unsupported(format!("conjunct {c} is overwritten later")));
                    }
                }
            }
            parts.extend(rechecks);
            return Ok(ProcExpr::compose_all(parts));
        }
        match e {
            FlatExpr::Bottom => Ok(ProcExpr::Bottom),
            FlatExpr::Atom { module, args } => self.atom(module, args),
            FlatExpr::Union(a, b) => Ok(ProcExpr::union(self.derive(a)?, self.derive(b)?)),
            FlatExpr::Project { keep, inner } => {
                Ok(ProcExpr::Project { keep: keep.clone(), inner: Box::new(self.derive(inner)?) })
            }
            FlatExpr::Select { lhs, rhs, inner } => {
                let inner = self.derive(inner)?;
                // The trailing test alone decides the condition when the inner
                // process neither reads nor writes the compared variables.
                let first = if select_cases(lhs, rhs, &inner).is_ok() {
                    ProcExpr::select(lhs.clone(), rhs.clone(), inner)
                } else {
                    inner
                };
                Ok(ProcExpr::compose(first, condition_test(lhs, rhs)))
            }
            FlatExpr::Complement(_) | FlatExpr::Var(_) | FlatExpr::Lfp { .. } => {
                Err(Error::Unsupported(format!("no process for {e}")))
            }
        }
    }
}

fn same_module(x: &str, y: &str) -> String {
    format!("__same_{x}_{y}")
}

/// Diagonal on the states where `lhs` and `rhs` are equal.
fn condition_test(lhs: &Operand, rhs: &Operand) -> ProcExpr {
    match (lhs, rhs) {
        (Operand::Var(x), Operand::Var(y)) if x == y => ProcExpr::Diag,
        (Operand::Var(x), Operand::Var(y)) => {
            ProcExpr::select(lhs.clone(), rhs.clone(), ProcExpr::test(&same_module(x, y), [x, y]))
        }
        (Operand::Var(x), Operand::Const(c)) | (Operand::Const(c), Operand::Var(x)) => {
            ProcExpr::ConstTest { var: x.clone(), value: c.clone(), positive: true }
        }
        // Two constants: the selection itself already decided.
        (Operand::Const(_), Operand::Const(_)) => ProcExpr::Diag,
    }
}

fn flatten_conjuncts<'a>(e: &'a FlatExpr, out: &mut Vec<&'a FlatExpr>) {
    match e.as_intersection() {
        Some((a, b)) => {
            flatten_conjuncts(a, out);
            flatten_conjuncts(b, out);
        }
        None => out.push(e),
    }
}

/// Process for `e` under a direction assignment, prefixed by a guess of all
/// outputs. The helper modules it uses come from [`with_helper_modules`].
pub fn derive_process(
    e: &FlatExpr,
    sigma: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
    io: &IoAssignment,
) -> Result<ProcExpr> {
    let mut d = Deriver { sigma, outputs, io, next: 0 };
    let body = d.derive(e)?;
    if outputs.is_empty() {
        return Ok(body);
    }
    let guess = ProcExpr::action(GUESS_MODULE, outputs.iter().map(|o| (o.clone(), Dir::Out)));
    Ok(ProcExpr::compose(guess, body))
}

/// Adds the accept-everything modules used by derived processes: the guess
/// over `outputs` and one per variable pair compared in a selection of `e`.
pub fn with_helper_modules(e: &FlatExpr, val: &Valuation, outputs: &BTreeSet<String>) -> Result<Valuation> {
    let arity = |v: &str| Ok::<_, Error>(val.sig().vocab().arity(val.symbol_of(v)?));
    let vvoc = outputs.iter().map(|o| Ok((o.clone(), arity(o)?))).collect::<Result<Vec<_>>>()?;
    let mut out = val.clone().with_module(AtomicModule::builtin(GUESS_MODULE, vvoc, Builtin::Any)?);
    for s in e.subexpressions() {
        if let FlatExpr::Select { lhs: Operand::Var(x), rhs: Operand::Var(y), .. } = s {
            if x == y {
                continue;
            }
            let vvoc = vec![(x.clone(), arity(x)?), (y.clone(), arity(y)?)];
            out.add_module(AtomicModule::builtin(&same_module(x, y), vvoc, Builtin::Any)?);
        }
    }
    Ok(out)
}

/// Conjunction of `⟨X = R?⟩⊤` over the goal values.
pub fn goal_formula(goal: &BTreeMap<String, crate::structure::RelationValue>, val: &Valuation) -> StateExpr {
    let domain = val.sig().domain();
    StateExpr::and_all(goal.iter().map(|(var, rel)| {
        StateExpr::diamond(
            ProcExpr::ConstTest {
                var: var.clone(),
                value: ConstRelation::from_relation(rel, domain),
                positive: true,
            },
            StateExpr::top(),
        )
    }))
}

fn hides_input(e: &FlatExpr, sigma: &BTreeSet<String>) -> Option<String> {
    e.subexpressions().into_iter().find_map(|s| match s {
        FlatExpr::Project { keep, inner } => {
            inner.occurring_vars().into_iter().find(|v| sigma.contains(v) && !keep.contains(v))
        }
        _ => None,
    })
}

pub fn equivalence_check(inst: &TaskInstance) -> Result<EquivalenceReport> {
    let TaskInstance { formula: e, sigma, input: a, outputs, valuation: val } = inst;
    check_signature(a, val)?;
    check_outputs(e, sigma, outputs, val)?;
    if let Some(v) = hides_input(e, sigma) {
        return Err(Error::Unsupported(format!("input `{v}` is hidden by a projection")));
    }
    let output_vars: BTreeSet<String> = outputs.keys().cloned().collect();
    let ev_answer = ev(e, sigma, a, outputs, val)?.is_some();
    let val2 = with_helper_modules(e, val, &output_vars)?;
    let sig = val.sig();
    let mentioned = mask_of_vars(val, e.occurring_vars().iter())?;
    let frozen = mask_of_vars(val, sigma.iter().filter(|v| free_relational_vars(e).contains(*v)))?
        | (sig.all_mask() & !mentioned);
    let assignments = io_assignments(e, sigma, &output_vars)?;
    let slice = Universe::slice(sig.clone(), a.bits(), frozen, DEFAULT_CAP).ok();
    let route = match &slice {
        Some(u) if u.size().saturating_mul(u.size()).saturating_mul(assignments.len()) <= EXPLICIT_BUDGET => {
            Route::Explicit
        }
        _ => Route::Image,
    };
    let goal = goal_formula(outputs, val);
    let n = sig.domain().len();
    let wanted = outputs
        .iter()
        .map(|(v, rel)| {
            let sym = val.symbol_of(v)?;
            Ok((sig.mask(sym), sig.set_field(0, sym, rel.to_field(n))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::new();
    for io in assignments {
        let process = derive_process(e, sigma, &output_vars, &io)?;
        let (temp, reached) = match (route, &slice) {
            (Route::Explicit, Some(u)) => {
                let phi = StateExpr::diamond(process.clone(), goal.clone());
                (temp_mc(&phi, a, &val2, u)?, reach(&process, a, outputs, &val2, u)?)
            }
            _ => {
                let cubes = ImageEvaluator::new(&val2, frozen).successors(&process, a.bits())?;
                let hit = cubes.iter().any(|c| wanted.iter().all(|&(m, v)| c.may_match(m, v)));
                (hit, hit)
            }
        };
        outcomes.push(AssignmentOutcome {
            assignment: io,
            process,
            temp_mc: temp,
            reach: reached,
            ev: ev_answer,
            route,
        });
    }
    let pass = outcomes.iter().all(|o| o.temp_mc == o.ev && o.reach == o.ev);
    Ok(EquivalenceReport { outcomes, pass })
}
