//! Datalog± programs with at most binary predicates: translation into state
//! formulas and a bounded restricted chase for certain answers.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamic::{Dir, ProcExpr};
use crate::error::{Error, Result};
use crate::lmumu::ast::StateExpr;
use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DlAtom {
    pub pred: String,
    pub args: Vec<String>,
}

impl DlAtom {
    pub fn new<S: Into<String>>(pred: &str, args: impl IntoIterator<Item = S>) -> Self {
        DlAtom { pred: pred.to_string(), args: args.into_iter().map(Into::into).collect() }
    }
}

/// `body → ∃(head vars not in body). head`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub body: Vec<DlAtom>,
    pub head: Vec<DlAtom>,
}

impl Rule {
    pub fn new(body: Vec<DlAtom>, head: Vec<DlAtom>) -> Self {
        Rule { body, head }
    }

    fn body_vars(&self) -> BTreeSet<&str> {
        self.body.iter().flat_map(|a| a.args.iter().map(String::as_str)).collect()
    }

    /// Head variables not bound by the body, in order of first occurrence.
    pub fn existentials(&self) -> Vec<String> {
        let body = self.body_vars();
        let mut out: Vec<String> = Vec::new();
        for v in self.head.iter().flat_map(|a| &a.args) {
            if !body.contains(v.as_str()) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        if self.body.is_empty() || self.head.is_empty() {
            return Err(Error::UnsafeRule("rules need a body and a head".into()));
        }
        for a in self.body.iter().chain(&self.head) {
            if a.args.is_empty() || a.args.len() > 2 {
                return Err(Error::UnsafeRule(format!("{} has arity {}", a.pred, a.args.len())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatalogProgram {
    pub rules: Vec<Rule>,
}

impl DatalogProgram {
    pub fn new(rules: Vec<Rule>) -> Self {
        DatalogProgram { rules }
    }
}

fn conj(atoms: &[DlAtom]) -> StateExpr {
    StateExpr::and_all(atoms.iter().map(|a| StateExpr::prop(&a.pred, a.args.clone())))
}

/// One state formula per rule, conjoined left to right.
pub fn datalog_translate(p: &DatalogProgram) -> Result<StateExpr> {
    let mut parts = Vec::new();
    for rule in &p.rules {
        rule.check()?;
        parts.push(translate_rule(rule)?);
    }
    if parts.is_empty() {
        return Ok(StateExpr::top());
    }
    Ok(StateExpr::and_all(parts))
}

fn translate_rule(rule: &Rule) -> Result<StateExpr> {
    let exist = rule.existentials();
    if !exist.is_empty() {
        // The head atom introducing the existentials becomes an action that
        // writes them; the rest of the head must hold afterwards.
        let pos = rule
            .head
            .iter()
            .position(|a| a.args.iter().any(|v| exist.contains(v)))
            .expect("some head atom mentions an existential");
        let witness = &rule.head[pos];
        if exist.iter().any(|v| !witness.args.contains(v)) {
            return Err(Error::UnsafeRule(format!(
                "existentials {exist:?} must all appear in `{}`",
                witness.pred
            )));
        }
        let action = ProcExpr::action(
            &witness.pred,
            witness.args.iter().map(|v| (v.clone(), if exist.contains(v) { Dir::Out } else { Dir::In })),
        );
        let rest: Vec<DlAtom> =
            rule.head.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, a)| a.clone()).collect();
        return Ok(StateExpr::implies(conj(&rule.body), StateExpr::diamond(action, conj(&rest))));
    }
    if let ([b], [h]) = (rule.body.as_slice(), rule.head.as_slice()) {
        if b.args.len() == 2 && h.args.len() == 1 && b.args.contains(&h.args[0]) && b.args[0] != b.args[1] {
            // Every way of choosing the head variable along the body relation
            // lands in the head predicate.
            let action = ProcExpr::action(
                &b.pred,
                b.args.iter().map(|v| (v.clone(), if *v == h.args[0] { Dir::Out } else { Dir::In })),
            );
            return Ok(StateExpr::necessity(action, conj(&rule.head)));
        }
    }
    Ok(StateExpr::implies(conj(&rule.body), conj(&rule.head)))
}

/// Outcome of a bounded certain-answer computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    True,
    False,
    /// The chase needed more labelled nulls than allowed.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
}

/// Query atom; variables are existentially quantified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub pred: String,
    pub terms: Vec<Term>,
}

pub type Fact = (String, Vec<String>);

/// Facts of a structure, with element names as constants.
pub fn facts_of(db: &Structure) -> BTreeSet<Fact> {
    let sig = db.sig();
    let mut out = BTreeSet::new();
    for (sym, (name, _)) in sig.vocab().symbols().iter().enumerate() {
        for t in sig.relation(db.bits(), sym).tuples() {
            out.insert((name.clone(), t.iter().map(|&e| sig.domain().name(e).to_string()).collect()));
        }
    }
    out
}

/// All extensions of `partial` mapping `atoms` into `facts`.
fn matches(
    atoms: &[DlAtom],
    facts: &BTreeSet<Fact>,
    partial: BTreeMap<String, String>,
    out: &mut Vec<BTreeMap<String, String>>,
) {
    let Some((first, rest)) = atoms.split_first() else {
        out.push(partial);
        return;
    };
    for (pred, args) in facts {
        if *pred != first.pred || args.len() != first.args.len() {
            continue;
        }
        let mut h = partial.clone();
        let ok = first.args.iter().zip(args).all(|(v, c)| match h.get(v) {
            Some(bound) => bound == c,
            None => {
                h.insert(v.clone(), c.clone());
                true
            }
        });
        if ok {
            matches(rest, facts, h, out);
        }
    }
}

/// Runs the restricted chase with at most `null_budget` fresh nulls
/// (`_n1`, `_n2`, ...), then matches the query.
pub fn datalog_certain_bounded(
    p: &DatalogProgram,
    db: &Structure,
    query: &Query,
    null_budget: usize,
) -> Result<Certainty> {
    for rule in &p.rules {
        rule.check()?;
    }
    let mut facts = facts_of(db);
    let mut nulls = 0usize;
    loop {
        let mut changed = false;
        for rule in &p.rules {
            let mut homs = Vec::new();
            matches(&rule.body, &facts, BTreeMap::new(), &mut homs);
            for h in homs {
                let mut sat = Vec::new();
                matches(&rule.head, &facts, h.clone(), &mut sat);
                if !sat.is_empty() {
                    continue;
                }
                let exist = rule.existentials();
                if nulls + exist.len() > null_budget {
                    return Ok(Certainty::Unknown);
                }
                let mut h = h;
                for v in exist {
                    nulls += 1;
                    h.insert(v, format!("_n{nulls}"));
                }
                for a in &rule.head {
                    facts.insert((a.pred.clone(), a.args.iter().map(|v| h[v].clone()).collect()));
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(if query_holds(query, &facts) { Certainty::True } else { Certainty::False })
}

pub fn query_holds(query: &Query, facts: &BTreeSet<Fact>) -> bool {
    facts.iter().any(|(pred, args)| {
        if *pred != query.pred || args.len() != query.terms.len() {
            return false;
        }
        let mut h: BTreeMap<&str, &str> = BTreeMap::new();
        query.terms.iter().zip(args).all(|(t, c)| match t {
            Term::Const(k) => k == c,
            Term::Var(v) => *h.entry(v.as_str()).or_insert(c.as_str()) == c.as_str(),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Domain, RelationValue, Signature, Vocabulary};

    pub(crate) fn family_program() -> DatalogProgram {
        DatalogProgram::new(vec![
            Rule::new(
                vec![DlAtom::new("emp", ["X"])],
                vec![DlAtom::new("hasMgr", ["X", "Y"]), DlAtom::new("emp", ["Y"])],
            ),
            Rule::new(vec![DlAtom::new("person", ["P"])], vec![DlAtom::new("fatherOf", ["F", "P"])]),
            Rule::new(vec![DlAtom::new("fatherOf", ["F", "P"])], vec![DlAtom::new("person", ["F"])]),
        ])
    }

    #[test]
    fn translation_shapes() {
        let phi = datalog_translate(&family_program()).unwrap();
        let r1 = StateExpr::implies(
            StateExpr::prop("emp", ["X"]),
            StateExpr::diamond(
                ProcExpr::action("hasMgr", [("X", Dir::In), ("Y", Dir::Out)]),
                StateExpr::prop("emp", ["Y"]),
            ),
        );
        let r2 = StateExpr::implies(
            StateExpr::prop("person", ["P"]),
            StateExpr::diamond(
                ProcExpr::action("fatherOf", [("F", Dir::Out), ("P", Dir::In)]),
                StateExpr::top(),
            ),
        );
        let r3 = StateExpr::necessity(
            ProcExpr::action("fatherOf", [("F", Dir::Out), ("P", Dir::In)]),
            StateExpr::prop("person", ["F"]),
        );
        assert_eq!(phi, StateExpr::and(StateExpr::and(r1, r2), r3));
    }

    #[test]
    fn unsafe_rules() {
        let ternary = DatalogProgram::new(vec![Rule::new(
            vec![DlAtom::new("r", ["X", "Y", "Z"])],
            vec![DlAtom::new("p", ["X"])],
        )]);
        assert!(matches!(datalog_translate(&ternary), Err(Error::UnsafeRule(_))));
        let headless = DatalogProgram::new(vec![Rule::new(vec![DlAtom::new("p", ["X"])], vec![])]);
        assert!(matches!(datalog_translate(&headless), Err(Error::UnsafeRule(_))));
    }

    #[test]
    fn chase_with_budget() {
        let sig = Signature::new(
            Domain::new(["alice", "bob"]).unwrap(),
            Vocabulary::new([("person", 1), ("fatherOf", 2), ("emp", 1), ("hasMgr", 2)]).unwrap(),
        )
        .unwrap();
        let db = Structure::empty(sig)
            .with_relation("person", &RelationValue::from_tuples(1, [vec![0]]).unwrap())
            .unwrap();
        let father_of_alice = Query {
            pred: "fatherOf".into(),
            terms: vec![Term::Var("F".into()), Term::Const("alice".into())],
        };
        // person(alice) needs a father, who is a person and needs a father...
        let p = family_program();
        assert_eq!(datalog_certain_bounded(&p, &db, &father_of_alice, 3).unwrap(), Certainty::Unknown);
        let finite = DatalogProgram::new(vec![p.rules[1].clone()]);
        assert_eq!(datalog_certain_bounded(&finite, &db, &father_of_alice, 1).unwrap(), Certainty::True);
        let bob = Query { pred: "person".into(), terms: vec![Term::Const("bob".into())] };
        assert_eq!(datalog_certain_bounded(&finite, &db, &bob, 1).unwrap(), Certainty::False);
    }
}
