use std::collections::BTreeSet;

use crate::dynamic::ProcExpr;

/// State formulas of the two-sorted modal fixpoint logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateExpr {
    /// Holds where the module accepts the structure.
    Prop { module: String, args: Vec<String> },
    SetVar(String),
    Or(Box<StateExpr>, Box<StateExpr>),
    Not(Box<StateExpr>),
    Diamond(Box<ProcExpr>, Box<StateExpr>),
    /// `[α]φ`, sugar for `¬⟨α⟩¬φ`.
    Necessity(Box<ProcExpr>, Box<StateExpr>),
    Lfp { var: String, body: Box<StateExpr> },
    /// Sugar for `¬(¬a ∨ ¬b)`.
    And(Box<StateExpr>, Box<StateExpr>),
}

impl StateExpr {
    pub fn prop<S: Into<String>>(module: &str, args: impl IntoIterator<Item = S>) -> Self {
        StateExpr::Prop { module: module.to_string(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn set_var(name: &str) -> Self {
        StateExpr::SetVar(name.to_string())
    }

    pub fn or(a: StateExpr, b: StateExpr) -> Self {
        StateExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: StateExpr, b: StateExpr) -> Self {
        StateExpr::And(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: StateExpr) -> Self {
        StateExpr::Not(Box::new(a))
    }

    /// `a → b`, written `¬a ∨ b`.
    pub fn implies(a: StateExpr, b: StateExpr) -> Self {
        Self::or(Self::not(a), b)
    }

    pub fn diamond(a: ProcExpr, phi: StateExpr) -> Self {
        StateExpr::Diamond(Box::new(a), Box::new(phi))
    }

    pub fn necessity(a: ProcExpr, phi: StateExpr) -> Self {
        StateExpr::Necessity(Box::new(a), Box::new(phi))
    }

    pub fn lfp(var: &str, body: StateExpr) -> Self {
        StateExpr::Lfp { var: var.to_string(), body: Box::new(body) }
    }

    /// `¬⟨⊥⟩(μX.X)`: true everywhere, without reference to any module.
    pub fn top() -> Self {
        Self::not(Self::diamond(ProcExpr::Bottom, Self::lfp("X", Self::set_var("X"))))
    }

    pub fn is_top(&self) -> bool {
        *self == Self::top()
    }

    /// Left-nested conjunction; `⊤` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = StateExpr>) -> Self {
        parts.into_iter().reduce(Self::and).unwrap_or_else(Self::top)
    }

    /// Free set and module variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            StateExpr::Prop { .. } => BTreeSet::new(),
            StateExpr::SetVar(x) => BTreeSet::from([x.clone()]),
            StateExpr::Or(a, b) | StateExpr::And(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            StateExpr::Not(a) => a.free_vars(),
            StateExpr::Lfp { var, body } => {
                let mut s = body.free_vars();
                s.remove(var);
                s
            }
            StateExpr::Diamond(p, a) | StateExpr::Necessity(p, a) => {
                let mut s = p.free_module_vars();
                s.extend(a.free_vars());
                s
            }
        }
    }

    /// Every relational variable in the formula.
    pub fn occurring_vars(&self) -> BTreeSet<String> {
        match self {
            StateExpr::Prop { args, .. } => args.iter().cloned().collect(),
            StateExpr::SetVar(_) => BTreeSet::new(),
            StateExpr::Or(a, b) | StateExpr::And(a, b) => {
                let mut s = a.occurring_vars();
                s.extend(b.occurring_vars());
                s
            }
            StateExpr::Not(a) | StateExpr::Lfp { body: a, .. } => a.occurring_vars(),
            StateExpr::Diamond(p, a) | StateExpr::Necessity(p, a) => {
                let mut s = p.occurring_vars();
                s.extend(a.occurring_vars());
                s
            }
        }
    }

    /// Modules referenced anywhere, including inside processes.
    pub fn modules(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_modules(&mut out);
        out
    }

    fn collect_modules(&self, out: &mut BTreeSet<String>) {
        match self {
            StateExpr::Prop { module, .. } => {
                out.insert(module.clone());
            }
            StateExpr::SetVar(_) => {}
            StateExpr::Or(a, b) | StateExpr::And(a, b) => {
                a.collect_modules(out);
                b.collect_modules(out);
            }
            StateExpr::Not(a) | StateExpr::Lfp { body: a, .. } => a.collect_modules(out),
            StateExpr::Diamond(p, a) | StateExpr::Necessity(p, a) => {
                proc_modules(p, out);
                a.collect_modules(out);
            }
        }
    }
}

pub(crate) fn proc_modules(p: &ProcExpr, out: &mut BTreeSet<String>) {
    p.visit(&mut |e| match e {
        ProcExpr::Test { module, .. } | ProcExpr::Action { module, .. } => {
            out.insert(module.clone());
        }
        ProcExpr::StateTest(phi) => phi.collect_modules(out),
        _ => {}
    });
}
