use std::collections::BTreeSet;

use crate::flat::ast::{ConstRelation, Operand};
use crate::lmumu::StateExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn flipped(self) -> Dir {
        match self {
            Dir::In => Dir::Out,
            Dir::Out => Dir::In,
        }
    }
}

/// Expressions denoting binary relations on structures.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcExpr {
    Bottom,
    /// `M?`: the diagonal on the module's structures.
    Test { module: String, args: Vec<String> },
    /// `M(ε)`: change the output variables, keep everything else.
    Action { module: String, args: Vec<(String, Dir)> },
    Var(String),
    Union(Box<ProcExpr>, Box<ProcExpr>),
    Complement(Box<ProcExpr>),
    Project { keep: BTreeSet<String>, inner: Box<ProcExpr> },
    Select { lhs: Operand, rhs: Operand, inner: Box<ProcExpr> },
    Lfp { var: String, body: Box<ProcExpr> },
    /// States with an outgoing edge, as a diagonal.
    Down(Box<ProcExpr>),
    /// States with an incoming edge, as a diagonal.
    Up(Box<ProcExpr>),
    /// States with no outgoing edge, as a diagonal.
    Neg(Box<ProcExpr>),
    Diag,
    Compose(Box<ProcExpr>, Box<ProcExpr>),
    /// Union of the powers `min..=max`; the zeroth power is the diagonal.
    Count { inner: Box<ProcExpr>, min: usize, max: usize },
    /// Every action with inputs and outputs swapped.
    Reverse(Box<ProcExpr>),
    /// Loops of the inner relation.
    TestEq(Box<ProcExpr>),
    /// Non-loop edges of the inner relation.
    TestNeq(Box<ProcExpr>),
    /// Diagonal on states where `var` equals (or differs from) a constant.
    ConstTest { var: String, value: ConstRelation, positive: bool },
    /// Diagonal on the states satisfying a state formula.
    StateTest(Box<StateExpr>),
}

impl ProcExpr {
    pub fn test<S: Into<String>>(module: &str, args: impl IntoIterator<Item = S>) -> Self {
        ProcExpr::Test { module: module.to_string(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn action<S: Into<String>>(module: &str, args: impl IntoIterator<Item = (S, Dir)>) -> Self {
        ProcExpr::Action {
            module: module.to_string(),
            args: args.into_iter().map(|(a, d)| (a.into(), d)).collect(),
        }
    }

    pub fn var(name: &str) -> Self {
        ProcExpr::Var(name.to_string())
    }

    pub fn union(a: ProcExpr, b: ProcExpr) -> Self {
        ProcExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn complement(a: ProcExpr) -> Self {
        ProcExpr::Complement(Box::new(a))
    }

    pub fn intersection(a: ProcExpr, b: ProcExpr) -> Self {
        Self::complement(Self::union(Self::complement(a), Self::complement(b)))
    }

    pub fn compose(a: ProcExpr, b: ProcExpr) -> Self {
        ProcExpr::Compose(Box::new(a), Box::new(b))
    }

    /// Left-nested composition of a non-empty sequence; the diagonal if empty.
    pub fn compose_all(parts: impl IntoIterator<Item = ProcExpr>) -> Self {
        parts.into_iter().reduce(Self::compose).unwrap_or(ProcExpr::Diag)
    }

    pub fn project<S: Into<String>>(keep: impl IntoIterator<Item = S>, inner: ProcExpr) -> Self {
        ProcExpr::Project { keep: keep.into_iter().map(Into::into).collect(), inner: Box::new(inner) }
    }

    pub fn select(lhs: Operand, rhs: Operand, inner: ProcExpr) -> Self {
        ProcExpr::Select { lhs, rhs, inner: Box::new(inner) }
    }

    pub fn lfp(var: &str, body: ProcExpr) -> Self {
        ProcExpr::Lfp { var: var.to_string(), body: Box::new(body) }
    }

    pub fn down(a: ProcExpr) -> Self {
        ProcExpr::Down(Box::new(a))
    }

    pub fn up(a: ProcExpr) -> Self {
        ProcExpr::Up(Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: ProcExpr) -> Self {
        ProcExpr::Neg(Box::new(a))
    }

    pub fn count(a: ProcExpr, min: usize, max: usize) -> Self {
        ProcExpr::Count { inner: Box::new(a), min, max }
    }

    pub fn reverse(a: ProcExpr) -> Self {
        ProcExpr::Reverse(Box::new(a))
    }

    pub fn state_test(phi: StateExpr) -> Self {
        ProcExpr::StateTest(Box::new(phi))
    }

    /// `μZ.(D ∪ Z ; a)` with `Z` fresh for `a`.
    pub fn kleene_star(a: ProcExpr) -> Self {
        let used = a.bound_and_free_names();
        let var = std::iter::once("Z".to_string())
            .chain((0..).map(|i| format!("Z{i}")))
            .find(|z| !used.contains(z))
            .expect("infinite supply");
        let body = Self::union(ProcExpr::Diag, Self::compose(ProcExpr::Var(var.clone()), a));
        ProcExpr::Lfp { var, body: Box::new(body) }
    }

    /// Recognizes the shape built by [`ProcExpr::kleene_star`].
    pub fn as_kleene_star(&self) -> Option<&ProcExpr> {
        if let ProcExpr::Lfp { var, body } = self {
            if let ProcExpr::Union(d, c) = body.as_ref() {
                if let (ProcExpr::Diag, ProcExpr::Compose(z, a)) = (d.as_ref(), c.as_ref()) {
                    // Only the exact shape `kleene_star` builds, so printing as `a*` round-trips.
                    if **z == ProcExpr::Var(var.clone()) && *self == Self::kleene_star(a.as_ref().clone()) {
                        return Some(a);
                    }
                }
            }
        }
        None
    }

    fn bound_and_free_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            ProcExpr::Var(v) | ProcExpr::Lfp { var: v, .. } => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Direct process-valued children.
    pub fn children(&self) -> Vec<&ProcExpr> {
        match self {
            ProcExpr::Bottom
            | ProcExpr::Test { .. }
            | ProcExpr::Action { .. }
            | ProcExpr::Var(_)
            | ProcExpr::Diag
            | ProcExpr::ConstTest { .. }
            | ProcExpr::StateTest(_) => vec![],
            ProcExpr::Union(a, b) | ProcExpr::Compose(a, b) => vec![a, b],
            ProcExpr::Complement(a)
            | ProcExpr::Project { inner: a, .. }
            | ProcExpr::Select { inner: a, .. }
            | ProcExpr::Lfp { body: a, .. }
            | ProcExpr::Down(a)
            | ProcExpr::Up(a)
            | ProcExpr::Neg(a)
            | ProcExpr::Count { inner: a, .. }
            | ProcExpr::Reverse(a)
            | ProcExpr::TestEq(a)
            | ProcExpr::TestNeq(a) => vec![a],
        }
    }

    /// Pre-order walk over process nodes (not entering state tests).
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a ProcExpr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Free module and set variables, including those of state tests.
    pub fn free_module_vars(&self) -> BTreeSet<String> {
        match self {
            ProcExpr::Var(v) => BTreeSet::from([v.clone()]),
            ProcExpr::StateTest(phi) => phi.free_vars(),
            ProcExpr::Lfp { var, body } => {
                let mut s = body.free_module_vars();
                s.remove(var);
                s
            }
            _ => self.children().into_iter().flat_map(|c| c.free_module_vars()).collect(),
        }
    }

    /// Every relational variable in the expression, including state tests.
    pub fn occurring_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            ProcExpr::Test { args, .. } => out.extend(args.iter().cloned()),
            ProcExpr::Action { args, .. } => out.extend(args.iter().map(|(a, _)| a.clone())),
            ProcExpr::Select { lhs, rhs, .. } => {
                out.extend(lhs.var().into_iter().chain(rhs.var()).map(str::to_string))
            }
            ProcExpr::ConstTest { var, .. } => {
                out.insert(var.clone());
            }
            ProcExpr::StateTest(phi) => out.extend(phi.occurring_vars()),
            _ => {}
        });
        out
    }

    /// Input and output variables `(σ, ε)` of the expression.
    pub fn io_vocab(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let none = || (BTreeSet::new(), BTreeSet::new());
        match self {
            ProcExpr::Bottom | ProcExpr::Var(_) | ProcExpr::Diag | ProcExpr::StateTest(_) => none(),
            ProcExpr::Test { args, .. } => (args.iter().cloned().collect(), BTreeSet::new()),
            ProcExpr::Action { args, .. } => {
                let pick = |d: Dir| args.iter().filter(|(_, x)| *x == d).map(|(a, _)| a.clone()).collect();
                (pick(Dir::In), pick(Dir::Out))
            }
            ProcExpr::ConstTest { var, .. } => (BTreeSet::from([var.clone()]), BTreeSet::new()),
            ProcExpr::Union(a, b) | ProcExpr::Compose(a, b) => {
                let (mut s, mut e) = a.io_vocab();
                let (s2, e2) = b.io_vocab();
                s.extend(s2);
                e.extend(e2);
                (s, e)
            }
            ProcExpr::Complement(a)
            | ProcExpr::Select { inner: a, .. }
            | ProcExpr::Lfp { body: a, .. }
            | ProcExpr::Count { inner: a, .. }
            | ProcExpr::TestEq(a)
            | ProcExpr::TestNeq(a) => a.io_vocab(),
            ProcExpr::Project { keep, inner } => {
                let (s, e) = inner.io_vocab();
                (s.intersection(keep).cloned().collect(), e.intersection(keep).cloned().collect())
            }
            ProcExpr::Down(a) | ProcExpr::Neg(a) => {
                let (s, e) = a.io_vocab();
                let e = e.intersection(&s).cloned().collect();
                (s, e)
            }
            ProcExpr::Up(a) => {
                let (s, e) = a.io_vocab();
                (s.intersection(&e).cloned().collect(), e)
            }
            ProcExpr::Reverse(a) => {
                let (s, e) = a.io_vocab();
                (e, s)
            }
        }
    }

    /// The expression with inputs and outputs swapped on every action.
    /// State tests are left alone.
    pub fn flipped(&self) -> ProcExpr {
        let b = |x: &ProcExpr| Box::new(x.flipped());
        match self {
            ProcExpr::Action { module, args } => ProcExpr::Action {
                module: module.clone(),
                args: args.iter().map(|(a, d)| (a.clone(), d.flipped())).collect(),
            },
            ProcExpr::Reverse(a) => a.as_ref().clone(),
            ProcExpr::Bottom
            | ProcExpr::Test { .. }
            | ProcExpr::Var(_)
            | ProcExpr::Diag
            | ProcExpr::ConstTest { .. }
            | ProcExpr::StateTest(_) => self.clone(),
            ProcExpr::Union(x, y) => ProcExpr::Union(b(x), b(y)),
            ProcExpr::Compose(x, y) => ProcExpr::Compose(b(x), b(y)),
            ProcExpr::Complement(x) => ProcExpr::Complement(b(x)),
            ProcExpr::Project { keep, inner } => ProcExpr::Project { keep: keep.clone(), inner: b(inner) },
            ProcExpr::Select { lhs, rhs, inner } => {
                ProcExpr::Select { lhs: lhs.clone(), rhs: rhs.clone(), inner: b(inner) }
            }
            ProcExpr::Lfp { var, body } => ProcExpr::Lfp { var: var.clone(), body: b(body) },
            ProcExpr::Down(x) => ProcExpr::Down(b(x)),
            ProcExpr::Up(x) => ProcExpr::Up(b(x)),
            ProcExpr::Neg(x) => ProcExpr::Neg(b(x)),
            ProcExpr::Count { inner, min, max } => ProcExpr::Count { inner: b(inner), min: *min, max: *max },
            ProcExpr::TestEq(x) => ProcExpr::TestEq(b(x)),
            ProcExpr::TestNeq(x) => ProcExpr::TestNeq(b(x)),
        }
    }
}
