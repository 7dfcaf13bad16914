//! Translation of state formulas into single-sorted process expressions.
//!
//! A formula `φ` becomes a process `φ̂` whose domain is `⟦φ⟧`; the states
//! satisfying `φ` are those looping under `↓φ̂`.

use crate::dynamic::ProcExpr;
use crate::lmumu::ast::StateExpr;

/// `φ̂`. Conjunction and box are expanded first.
pub fn translate_two_sorted(phi: &StateExpr) -> ProcExpr {
    let t = |x: &StateExpr| translate_two_sorted(x);
    match phi {
        StateExpr::Prop { module, args } => ProcExpr::Test { module: module.clone(), args: args.clone() },
        StateExpr::SetVar(x) => ProcExpr::Var(x.clone()),
        StateExpr::Or(a, b) => ProcExpr::union(t(a), t(b)),
        StateExpr::Not(a) => ProcExpr::neg(t(a)),
        StateExpr::And(a, b) => {
            ProcExpr::neg(ProcExpr::union(ProcExpr::neg(t(a)), ProcExpr::neg(t(b))))
        }
        StateExpr::Diamond(p, a) => ProcExpr::compose(translate_proc(p), t(a)),
        StateExpr::Necessity(p, a) => {
            ProcExpr::neg(ProcExpr::compose(translate_proc(p), ProcExpr::neg(t(a))))
        }
        StateExpr::Lfp { var, body } => ProcExpr::lfp(var, ProcExpr::down(t(body))),
    }
}

/// Replaces every state test `φ?` inside a process by `↓φ̂`.
pub fn translate_proc(a: &ProcExpr) -> ProcExpr {
    let b = |x: &ProcExpr| Box::new(translate_proc(x));
    match a {
        ProcExpr::StateTest(phi) => ProcExpr::down(translate_two_sorted(phi)),
        ProcExpr::Bottom
        | ProcExpr::Test { .. }
        | ProcExpr::Action { .. }
        | ProcExpr::Var(_)
        | ProcExpr::Diag
        | ProcExpr::ConstTest { .. } => a.clone(),
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
        ProcExpr::Reverse(x) => ProcExpr::Reverse(b(x)),
        ProcExpr::TestEq(x) => ProcExpr::TestEq(b(x)),
        ProcExpr::TestNeq(x) => ProcExpr::TestNeq(b(x)),
    }
}
