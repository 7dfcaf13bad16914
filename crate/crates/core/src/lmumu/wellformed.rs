//! Positivity of fixpoint variables in process expressions and state formulas.

use crate::dynamic::ProcExpr;
use crate::flat::ast::{Violation, ViolationKind};
use crate::lmumu::ast::StateExpr;

#[derive(Default)]
struct Walker {
    binders: Vec<(String, usize)>,
    out: Vec<Violation>,
}

impl Walker {
    fn var(&mut self, z: &str, negations: usize, at: String) {
        if let Some((_, b)) = self.binders.iter().rev().find(|(v, _)| v == z) {
            if (negations - b) % 2 == 1 {
                self.out.push(Violation { kind: ViolationKind::NotPositive(z.to_string()), at });
            }
        }
    }

    fn proc(&mut self, a: &ProcExpr, neg: usize) {
        match a {
            ProcExpr::Var(z) => self.var(z, neg, a.to_string()),
            ProcExpr::Lfp { var, body } => {
                self.binders.push((var.clone(), neg));
                self.proc(body, neg);
                self.binders.pop();
            }
            ProcExpr::Complement(x) | ProcExpr::Neg(x) => self.proc(x, neg + 1),
            ProcExpr::StateTest(phi) => self.state(phi, neg),
            _ => {
                for c in a.children() {
                    self.proc(c, neg);
                }
            }
        }
    }

    fn state(&mut self, phi: &StateExpr, neg: usize) {
        match phi {
            StateExpr::Prop { .. } => {}
            StateExpr::SetVar(x) => self.var(x, neg, phi.to_string()),
            StateExpr::Or(a, b) | StateExpr::And(a, b) => {
                self.state(a, neg);
                self.state(b, neg);
            }
            StateExpr::Not(a) => self.state(a, neg + 1),
            StateExpr::Diamond(p, a) => {
                self.proc(p, neg);
                self.state(a, neg);
            }
            // [α]φ = ¬⟨α⟩¬φ: α sits under one negation, φ under two.
            StateExpr::Necessity(p, a) => {
                self.proc(p, neg + 1);
                self.state(a, neg);
            }
            StateExpr::Lfp { var, body } => {
                self.binders.push((var.clone(), neg));
                self.state(body, neg);
                self.binders.pop();
            }
        }
    }
}

pub fn check_positive_proc(a: &ProcExpr) -> Vec<Violation> {
    let mut w = Walker::default();
    w.proc(a, 0);
    w.out
}

pub fn check_positive_state(phi: &StateExpr) -> Vec<Violation> {
    let mut w = Walker::default();
    w.state(phi, 0);
    w.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_negative_occurrences() {
        let ok = StateExpr::lfp("X", StateExpr::or(StateExpr::prop("M", ["P"]), StateExpr::set_var("X")));
        assert!(check_positive_state(&ok).is_empty());
        let bad = StateExpr::lfp("X", StateExpr::not(StateExpr::set_var("X")));
        assert_eq!(check_positive_state(&bad).len(), 1);
        let boxed = StateExpr::lfp("X", StateExpr::necessity(ProcExpr::Diag, StateExpr::set_var("X")));
        assert!(check_positive_state(&boxed).is_empty());
        let neg = ProcExpr::lfp("Z", ProcExpr::neg(ProcExpr::var("Z")));
        assert_eq!(check_positive_proc(&neg).len(), 1);
        assert!(check_positive_proc(&ProcExpr::kleene_star(ProcExpr::Diag)).is_empty());
        assert!(check_positive_state(&StateExpr::top()).is_empty());
    }
}
