use crate::dynamic::{EdgeSet, ProcExpr};
use crate::error::{Error, Result};
use crate::eval::{least_fixpoint, EvalStats, Evaluator};
use crate::lmumu::ast::StateExpr;
use crate::module::{Binding, Valuation};
use crate::structure::{StateSet, Universe};

/// `⟦φ⟧` as a subset of `u`.
pub fn eval_state(phi: &StateExpr, val: &Valuation, u: &Universe) -> Result<StateSet> {
    Evaluator::new(val, u)?.state(phi)
}

pub fn eval_state_with_stats(
    phi: &StateExpr,
    val: &Valuation,
    u: &Universe,
) -> Result<(StateSet, EvalStats)> {
    let start = std::time::Instant::now();
    let mut ev = Evaluator::new(val, u)?;
    let set = ev.state(phi)?;
    let mut stats = ev.into_stats();
    stats.wall_time = start.elapsed();
    Ok((set, stats))
}

/// States from which `α1` and `α2` share a successor: `⟨α1 ∩ α2⟩⊤`.
pub fn eval_equality_test(a1: &ProcExpr, a2: &ProcExpr, val: &Valuation, u: &Universe) -> Result<StateSet> {
    eval_state(&equality_test(a1.clone(), a2.clone()), val, u)
}

pub fn equality_test(a1: ProcExpr, a2: ProcExpr) -> StateExpr {
    StateExpr::diamond(ProcExpr::intersection(a1, a2), StateExpr::top())
}

/// States with a successor in `target`.
fn preimage(edges: &EdgeSet, target: &StateSet) -> StateSet {
    let n = edges.universe_len();
    StateSet::from_indices(
        n,
        (0..n).filter(|&i| edges.successors(i).iter().any(|&j| target.contains(j as usize))),
    )
}

impl Evaluator<'_> {
    pub fn state(&mut self, phi: &StateExpr) -> Result<StateSet> {
        let u = self.universe;
        let sig = u.sig().clone();
        match phi {
            StateExpr::Prop { module, args } => {
                let syms = self.val.resolve_atom(module, args)?;
                let m = self.val.module(module)?;
                Ok(StateSet::from_indices(
                    u.size(),
                    (0..u.size()).filter(|&i| m.contains_bits(&sig, &syms, u.bits_at(i))),
                ))
            }
            StateExpr::SetVar(x) => match self.lookup(x) {
                Some(Binding::States(s)) if s.universe_len() == u.size() => Ok(s.clone()),
                Some(_) => Err(Error::ShapeMismatch(x.clone())),
                None => Err(Error::UnboundSetVar(x.clone())),
            },
            StateExpr::Or(a, b) => Ok(self.state(a)?.union(&self.state(b)?)),
            StateExpr::And(a, b) => Ok(self.state(a)?.intersection(&self.state(b)?)),
            StateExpr::Not(a) => Ok(self.state(a)?.complement()),
            StateExpr::Diamond(p, a) => {
                let edges = self.proc(p)?;
                Ok(preimage(&edges, &self.state(a)?))
            }
            StateExpr::Necessity(p, a) => {
                let edges = self.proc(p)?;
                Ok(preimage(&edges, &self.state(a)?.complement()).complement())
            }
            StateExpr::Lfp { var, body } => {
                let (set, steps) = least_fixpoint(u.empty_set(), |approx| {
                    self.with_binding(var, Binding::States(approx.clone()), |ev| ev.state(body))
                })?;
                self.record_iterations(phi.to_string(), steps);
                Ok(set)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::Dir;
    use crate::lmumu::translate_two_sorted;
    use crate::testutil::{full_p, pq, set_p};
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let (val, u) = pq();
        let ev = |phi: &StateExpr| eval_state(phi, &val, &u).unwrap();
        assert_eq!(ev(&StateExpr::or(full_p(), StateExpr::not(full_p()))).len(), 16);
        assert_eq!(ev(&StateExpr::diamond(set_p(), full_p())).len(), 16);
        assert!(ev(&StateExpr::lfp("X", StateExpr::set_var("X"))).is_empty());
        assert_eq!(ev(&StateExpr::top()).len(), 16);
        assert!(ev(&StateExpr::diamond(ProcExpr::Bottom, StateExpr::top())).is_empty());
        assert_eq!(ev(&full_p()).len(), 4);
    }

    #[test]
    fn equality_examples() {
        let (val, u) = pq();
        let eq = |a: ProcExpr, b: ProcExpr| eval_equality_test(&a, &b, &val, &u).unwrap();
        assert_eq!(eq(set_p(), set_p()).len(), 16);
        assert!(eq(set_p(), ProcExpr::Bottom).is_empty());
        assert_eq!(eq(set_p(), ProcExpr::Diag), eval_state(&full_p(), &val, &u).unwrap());
    }

    #[test]
    fn unbound_set_variable() {
        let (val, u) = pq();
        assert_eq!(eval_state(&StateExpr::set_var("Y"), &val, &u), Err(Error::UnboundSetVar("Y".into())));
    }

    /// Closed formulas of depth at most 3 over the fixture modules.
    fn arb_state() -> impl Strategy<Value = StateExpr> {
        let var = || prop::sample::select(vec!["P", "Q"]);
        let proc_leaf = prop_oneof![
            Just(set_p()),
            Just(ProcExpr::Diag),
            Just(ProcExpr::Bottom),
            (var(), prop::sample::select(vec![Dir::In, Dir::Out])).prop_map(|(v, d)| ProcExpr::action("Any", [(v, d)])),
        ];
        let leaf = prop_oneof![var().prop_map(|v| StateExpr::prop("Full", [v])), Just(StateExpr::top())];
        leaf.prop_recursive(3, 16, 2, move |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| StateExpr::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| StateExpr::and(a, b)),
                inner.clone().prop_map(StateExpr::not),
                (proc_leaf.clone(), inner.clone()).prop_map(|(p, a)| StateExpr::diamond(p, a)),
                (proc_leaf.clone(), inner.clone()).prop_map(|(p, a)| StateExpr::necessity(p, a)),
                (proc_leaf.clone(), inner.clone())
                    .prop_map(|(p, a)| StateExpr::diamond(ProcExpr::state_test(a), StateExpr::diamond(p, StateExpr::top()))),
                (proc_leaf.clone(), inner)
                    .prop_map(|(p, a)| StateExpr::lfp("X", StateExpr::or(a, StateExpr::diamond(p, StateExpr::set_var("X"))))),
            ]
        })
    }

    proptest! {
        #[test]
        fn box_is_dual_of_diamond(phi in arb_state()) {
            let (val, u) = pq();
            let boxed = StateExpr::necessity(set_p(), phi.clone());
            let dual = StateExpr::not(StateExpr::diamond(set_p(), StateExpr::not(phi)));
            prop_assert_eq!(eval_state(&boxed, &val, &u).unwrap(), eval_state(&dual, &val, &u).unwrap());
        }

        #[test]
        fn translation_preserves_meaning(phi in arb_state()) {
            let (val, u) = pq();
            let states = eval_state(&phi, &val, &u).unwrap();
            let loops = crate::dynamic::eval_dyn(&ProcExpr::down(translate_two_sorted(&phi)), &val, &u).unwrap();
            let looping = StateSet::from_indices(16, (0..16).filter(|&i| loops.contains(i, i)));
            prop_assert_eq!(states, looping);
        }
    }
}
