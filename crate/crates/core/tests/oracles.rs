//! Task answers against independent brute-force evaluation.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{pq, rng, set_p, Gen};
use modalg::tasks::{qe_answers, qe_encode, reach, temp_mc, temp_mc_search, FoFormula};
use modalg::{eval_state, Domain, ProcExpr, RelationValue, Signature, Structure, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;

fn fo_holds(phi: &FoFormula, db: &Structure, env: &mut BTreeMap<String, u32>) -> bool {
    let n = db.sig().domain().len() as u32;
    match phi {
        FoFormula::Rel(r, xs) => db.relation(r).unwrap().contains(&xs.iter().map(|x| env[x]).collect::<Vec<_>>()),
        FoFormula::Eq(x, y) => env[x] == env[y],
        FoFormula::Not(a) => !fo_holds(a, db, env),
        FoFormula::And(a, b) => fo_holds(a, db, env) && fo_holds(b, db, env),
        FoFormula::Or(a, b) => fo_holds(a, db, env) || fo_holds(b, db, env),
        FoFormula::Exists(x, a) => {
            let saved = env.get(x).copied();
            let found = (0..n).any(|e| {
                env.insert(x.clone(), e);
                fo_holds(a, db, env)
            });
            match saved {
                Some(v) => env.insert(x.clone(), v),
                None => env.remove(x),
            };
            found
        }
    }
}

fn fo_answers(phi: &FoFormula, db: &Structure) -> Vec<Vec<u32>> {
    let free: Vec<String> = phi.free_vars().into_iter().collect();
    let n = db.sig().domain().len() as u32;
    let mut out = Vec::new();
    for code in 0..n.pow(free.len() as u32) {
        let tuple: Vec<u32> = (0..free.len()).map(|i| code / n.pow(i as u32) % n).collect();
        let mut env: BTreeMap<String, u32> = free.iter().cloned().zip(tuple.iter().copied()).collect();
        if fo_holds(phi, db, &mut env) {
            out.push(tuple);
        }
    }
    out.sort();
    out
}

fn random_fo(r: &mut common::TestRng, depth: usize) -> FoFormula {
    let vars = ["x", "y", "z"];
    let v = |r: &mut common::TestRng| *vars.choose(r).unwrap();
    if depth == 0 || r.gen_bool(0.25) {
        return match r.gen_range(0..3) {
            0 => FoFormula::rel("E", [v(r), v(r)]),
            1 => FoFormula::rel("U", [v(r)]),
            _ => FoFormula::eq(v(r), v(r)),
        };
    }
    match r.gen_range(0..4) {
        0 => FoFormula::not(random_fo(r, depth - 1)),
        1 => FoFormula::and(random_fo(r, depth - 1), random_fo(r, depth - 1)),
        2 => FoFormula::or(random_fo(r, depth - 1), random_fo(r, depth - 1)),
        _ => FoFormula::exists(v(r), random_fo(r, depth - 1)),
    }
}

fn graph(r: &mut common::TestRng) -> Structure {
    let sig = Signature::new(Domain::new(["a", "b", "c"]).unwrap(), Vocabulary::new([("E", 2), ("U", 1)]).unwrap())
        .unwrap();
    let edges: Vec<Vec<u32>> =
        (0..3).flat_map(|i| (0..3).map(move |j| vec![i, j])).filter(|_| r.gen_bool(0.3)).collect();
    let marked: Vec<Vec<u32>> = (0..3).map(|i| vec![i]).filter(|_| r.gen_bool(0.5)).collect();
    Structure::from_relations(
        sig,
        [("E", &RelationValue::from_tuples(2, edges).unwrap()), ("U", &RelationValue::from_tuples(1, marked).unwrap())],
    )
    .unwrap()
}

#[test]
fn query_answers_match_first_order_semantics() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 40 {
        let phi = random_fo(&mut r, 3);
        if phi.free_vars().len() > 2 {
            continue;
        }
        let db = graph(&mut r);
        let inst = qe_encode(&phi, &db).unwrap();
        assert_eq!(qe_answers(&inst).unwrap(), fo_answers(&phi, &db), "{phi:?}");
        checked += 1;
    }
}

#[test]
fn query_examples() {
    let mut r = rng(1);
    let db = graph(&mut r);
    let sig = db.sig().clone();
    let one_edge =
        db.with_relation("E", &RelationValue::from_tuples(2, [vec![0, 1]]).unwrap()).unwrap();
    let answers = |phi: FoFormula, s: &Structure| qe_answers(&qe_encode(&phi, s).unwrap()).unwrap();
    assert_eq!(answers(FoFormula::eq("x", "x"), &one_edge).len(), 3);
    assert_eq!(answers(FoFormula::rel("E", ["x", "y"]), &one_edge), vec![vec![0, 1]]);
    assert!(answers(FoFormula::rel("E", ["x", "x"]), &one_edge).is_empty());
    assert!(qe_encode(&FoFormula::rel("F", ["x"]), &Structure::empty(sig)).is_err());
}

#[test]
fn temporal_tasks_match_direct_evaluation() {
    let (val, u) = pq();
    let mut r = rng(12);
    for _ in 0..50 {
        let depth = r.gen_range(1..=3);
        let phi = Gen::new(&mut r, &["P", "Q"], &["a", "b"]).state(depth);
        let set = eval_state(&phi, &val, &u).unwrap();
        let found = temp_mc_search(&phi, &val, &u).unwrap();
        assert_eq!(found.len(), set.len());
        for i in 0..u.size() {
            assert_eq!(temp_mc(&phi, &u.structure_at(i), &val, &u).unwrap(), set.contains(i));
        }
    }
}

#[test]
fn reachability_examples() {
    let (val, u) = pq();
    let empty = u.structure_at(0);
    let p = |elems: &[u32]| {
        BTreeMap::from([("P".to_string(), RelationValue::from_tuples(1, elems.iter().map(|&e| vec![e])).unwrap())])
    };
    assert!(reach(&set_p(), &empty, &p(&[0, 1]), &val, &u).unwrap());
    assert!(!reach(&set_p(), &empty, &p(&[0]), &val, &u).unwrap());
    assert!(!reach(&ProcExpr::Bottom, &empty, &p(&[]), &val, &u).unwrap());
    assert!(reach(&ProcExpr::Diag, &empty, &BTreeMap::new(), &val, &u).unwrap());
    let no_goals: BTreeSet<usize> = (0..u.size()).filter(|&i| reach(&set_p(), &u.structure_at(i), &BTreeMap::new(), &val, &u).unwrap()).collect();
    assert_eq!(no_goals.len(), 16);
}
