use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::module::Valuation;
use crate::structure::{Domain, RelationValue};

/// A constant relation written with element names, resolved against a
/// domain at evaluation time. The empty constant fits any arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstRelation {
    tuples: BTreeSet<Vec<String>>,
}

impl ConstRelation {
    pub fn new<I, T, S>(tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ConstRelation {
            tuples: tuples.into_iter().map(|t| t.into_iter().map(Into::into).collect()).collect(),
        }
    }

    pub fn from_relation(rel: &RelationValue, domain: &Domain) -> Self {
        ConstRelation {
            tuples: rel
                .tuples()
                .map(|t| t.iter().map(|&e| domain.name(e).to_string()).collect())
                .collect(),
        }
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<String>> {
        self.tuples.iter()
    }

    pub fn arity(&self) -> Option<usize> {
        self.tuples.iter().next().map(Vec::len)
    }

    pub fn resolve(&self, domain: &Domain, arity: usize) -> Result<RelationValue> {
        let tuples = self
            .tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|e| domain.index_of(e).ok_or_else(|| Error::UnknownElement(e.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        RelationValue::from_tuples(arity, tuples)
    }
}

impl fmt::Display for ConstRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("'{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({})", t.join(","))?;
        }
        f.write_str("}'")
    }
}

/// Operand of a selection condition `L1 ≡ L2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(String),
    Const(ConstRelation),
}

impl Operand {
    pub fn var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FlatExpr {
    Bottom,
    Atom { module: String, args: Vec<String> },
    Var(String),
    Union(Box<FlatExpr>, Box<FlatExpr>),
    Complement(Box<FlatExpr>),
    Project { keep: BTreeSet<String>, inner: Box<FlatExpr> },
    Select { lhs: Operand, rhs: Operand, inner: Box<FlatExpr> },
    Lfp { var: String, body: Box<FlatExpr> },
}

impl FlatExpr {
    pub fn atom<S: Into<String>>(module: &str, args: impl IntoIterator<Item = S>) -> Self {
        FlatExpr::Atom { module: module.to_string(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn var(name: &str) -> Self {
        FlatExpr::Var(name.to_string())
    }

    pub fn union(a: FlatExpr, b: FlatExpr) -> Self {
        FlatExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn complement(a: FlatExpr) -> Self {
        FlatExpr::Complement(Box::new(a))
    }

    /// `a ∩ b := −(−a ∪ −b)`
    pub fn intersection(a: FlatExpr, b: FlatExpr) -> Self {
        Self::complement(Self::union(Self::complement(a), Self::complement(b)))
    }

    /// `a − b := −(−a ∪ b)`
    pub fn difference(a: FlatExpr, b: FlatExpr) -> Self {
        Self::complement(Self::union(Self::complement(a), b))
    }

    pub fn top() -> Self {
        Self::complement(FlatExpr::Bottom)
    }

    pub fn project<S: Into<String>>(keep: impl IntoIterator<Item = S>, inner: FlatExpr) -> Self {
        FlatExpr::Project { keep: keep.into_iter().map(Into::into).collect(), inner: Box::new(inner) }
    }

    pub fn select(lhs: Operand, rhs: Operand, inner: FlatExpr) -> Self {
        FlatExpr::Select { lhs, rhs, inner: Box::new(inner) }
    }

    pub fn lfp(var: &str, body: FlatExpr) -> Self {
        FlatExpr::Lfp { var: var.to_string(), body: Box::new(body) }
    }

    /// Recognizes the `−(−a ∪ −b)` shape produced by [`FlatExpr::intersection`].
    pub fn as_intersection(&self) -> Option<(&FlatExpr, &FlatExpr)> {
        if let FlatExpr::Complement(inner) = self {
            if let FlatExpr::Union(a, b) = inner.as_ref() {
                if let (FlatExpr::Complement(a), FlatExpr::Complement(b)) = (a.as_ref(), b.as_ref()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Every relational variable occurring anywhere in the expression.
    pub fn occurring_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            FlatExpr::Bottom | FlatExpr::Var(_) => {}
            FlatExpr::Atom { args, .. } => out.extend(args.iter().cloned()),
            FlatExpr::Union(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            FlatExpr::Complement(a) | FlatExpr::Project { inner: a, .. } => a.collect_vars(out),
            FlatExpr::Select { lhs, rhs, inner } => {
                out.extend(lhs.var().into_iter().chain(rhs.var()).map(str::to_string));
                inner.collect_vars(out);
            }
            FlatExpr::Lfp { body, .. } => body.collect_vars(out),
        }
    }

    /// Subexpressions in pre-order.
    pub fn subexpressions(&self) -> Vec<&FlatExpr> {
        let mut out = vec![self];
        match self {
            FlatExpr::Bottom | FlatExpr::Atom { .. } | FlatExpr::Var(_) => {}
            FlatExpr::Union(a, b) => {
                out.extend(a.subexpressions());
                out.extend(b.subexpressions());
            }
            FlatExpr::Complement(a)
            | FlatExpr::Project { inner: a, .. }
            | FlatExpr::Select { inner: a, .. }
            | FlatExpr::Lfp { body: a, .. } => out.extend(a.subexpressions()),
        }
        out
    }
}

/// Relational variables not hidden by an enclosing projection: an occurrence
/// is free when every enclosing projection keeps it.
pub fn free_relational_vars(e: &FlatExpr) -> BTreeSet<String> {
    match e {
        FlatExpr::Bottom | FlatExpr::Var(_) => BTreeSet::new(),
        FlatExpr::Atom { args, .. } => args.iter().cloned().collect(),
        FlatExpr::Union(a, b) => {
            let mut s = free_relational_vars(a);
            s.extend(free_relational_vars(b));
            s
        }
        FlatExpr::Complement(a) | FlatExpr::Lfp { body: a, .. } => free_relational_vars(a),
        FlatExpr::Project { keep, inner } => {
            free_relational_vars(inner).intersection(keep).cloned().collect()
        }
        FlatExpr::Select { lhs, rhs, inner } => {
            let mut s = free_relational_vars(inner);
            s.extend(lhs.var().into_iter().chain(rhs.var()).map(str::to_string));
            s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// A fixpoint variable occurs under an odd number of complements.
    NotPositive(String),
    /// A projected variable does not occur in the projected expression.
    UnscopedProjection(String),
    /// Argument count, arity or unknown name problems.
    Arity(String),
    /// Two relational variables map to the same symbol.
    NonInjective(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Printed offending subexpression.
    pub at: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::NotPositive(z) => write!(f, "`{z}` occurs negatively in {}", self.at),
            ViolationKind::UnscopedProjection(x) => {
                write!(f, "projected variable `{x}` does not occur in {}", self.at)
            }
            ViolationKind::Arity(m) => write!(f, "{m} in {}", self.at),
            ViolationKind::NonInjective(a, b) => {
                write!(f, "`{a}` and `{b}` map to the same symbol in {}", self.at)
            }
        }
    }
}

/// Checks positivity, projection scoping and, when a valuation is given,
/// arities and injectivity of the variable mapping.
pub fn check_wellformed(e: &FlatExpr, val: Option<&Valuation>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut binders = Vec::new();
    walk(e, 0, &mut binders, val, &mut out);
    if let Some(val) = val {
        check_injective(&e.occurring_vars(), val, &e.to_string(), &mut out);
    }
    out
}

pub(crate) fn check_injective(
    vars: &BTreeSet<String>,
    val: &Valuation,
    at: &str,
    out: &mut Vec<Violation>,
) {
    let mut seen: BTreeMap<usize, &String> = BTreeMap::new();
    for v in vars {
        if let Ok(sym) = val.symbol_of(v) {
            if let Some(prev) = seen.insert(sym, v) {
                out.push(Violation {
                    kind: ViolationKind::NonInjective(prev.clone(), v.clone()),
                    at: at.to_string(),
                });
            }
        }
    }
}

fn walk(
    e: &FlatExpr,
    negations: usize,
    binders: &mut Vec<(String, usize)>,
    val: Option<&Valuation>,
    out: &mut Vec<Violation>,
) {
    match e {
        FlatExpr::Bottom => {}
        FlatExpr::Var(z) => {
            if let Some((_, at)) = binders.iter().rev().find(|(b, _)| b == z) {
                if (negations - at) % 2 == 1 {
                    out.push(Violation {
                        kind: ViolationKind::NotPositive(z.clone()),
                        at: e.to_string(),
                    });
                }
            }
        }
        FlatExpr::Atom { module, args } => {
            if let Some(val) = val {
                if let Err(err) = val.resolve_atom(module, args) {
                    out.push(Violation { kind: ViolationKind::Arity(err.to_string()), at: e.to_string() });
                }
            }
        }
        FlatExpr::Union(a, b) => {
            walk(a, negations, binders, val, out);
            walk(b, negations, binders, val, out);
        }
        FlatExpr::Complement(a) => walk(a, negations + 1, binders, val, out),
        FlatExpr::Project { keep, inner } => {
            let occurring = inner.occurring_vars();
            for x in keep.difference(&occurring) {
                out.push(Violation {
                    kind: ViolationKind::UnscopedProjection(x.clone()),
                    at: e.to_string(),
                });
            }
            walk(inner, negations, binders, val, out);
        }
        FlatExpr::Select { lhs, rhs, inner } => {
            if let Some(val) = val {
                if let Err(err) = operand_arities(lhs, rhs, val) {
                    out.push(Violation { kind: ViolationKind::Arity(err.to_string()), at: e.to_string() });
                }
            }
            walk(inner, negations, binders, val, out);
        }
        FlatExpr::Lfp { var, body } => {
            binders.push((var.clone(), negations));
            walk(body, negations, binders, val, out);
            binders.pop();
        }
    }
}

/// Common arity of two selection operands.
pub(crate) fn operand_arities(lhs: &Operand, rhs: &Operand, val: &Valuation) -> Result<usize> {
    let arity = |o: &Operand| -> Result<Option<usize>> {
        match o {
            Operand::Var(v) => Ok(Some(val.sig().vocab().arity(val.symbol_of(v)?))),
            Operand::Const(c) => Ok(c.arity()),
        }
    };
    match (arity(lhs)?, arity(rhs)?) {
        (Some(a), Some(b)) if a != b => {
            Err(Error::ArityMismatch(format!("selection compares arity {a} with arity {b}")))
        }
        (Some(a), _) | (None, Some(a)) => Ok(a),
        (None, None) => Ok(1),
    }
}
