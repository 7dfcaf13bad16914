//! Fixtures, random expression generators and brute-force helpers shared by
//! the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use modalg::dynamic::Dir;
use modalg::flat::ConstRelation;
use modalg::{
    AtomicModule, Builtin, Domain, FlatExpr, Operand, ProcExpr, Signature, StateExpr, Universe, Valuation,
    Vocabulary,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub const UNARY_MODULES: [&str; 4] = ["Full", "NonFull", "Empty", "Any"];

/// Valuation over the given domain and unary symbols, with the unary
/// modules above and the binary `Any2`.
pub fn unary_valuation(elements: &[&str], symbols: &[&str]) -> (Valuation, Universe) {
    let sig = Signature::new(
        Domain::new(elements.iter().copied()).unwrap(),
        Vocabulary::new(symbols.iter().map(|s| (*s, 1))).unwrap(),
    )
    .unwrap();
    let x = || vec![("X".to_string(), 1)];
    let val = Valuation::new(sig.clone())
        .with_module(AtomicModule::builtin("Full", x(), Builtin::Full).unwrap())
        .with_module(AtomicModule::builtin("NonFull", x(), Builtin::NonFull).unwrap())
        .with_module(AtomicModule::builtin("Empty", x(), Builtin::Empty).unwrap())
        .with_module(AtomicModule::builtin("Any", x(), Builtin::Any).unwrap())
        .with_module(AtomicModule::builtin("Any2", vec![("X".into(), 1), ("Y".into(), 1)], Builtin::Any).unwrap());
    let u = Universe::new(sig, 20).unwrap();
    (val, u)
}

/// Domain `{a,b}` with unary `P` and `Q`: 16 structures.
pub fn pq() -> (Valuation, Universe) {
    unary_valuation(&["a", "b"], &["P", "Q"])
}

/// Makes `P` full, keeps `Q`.
pub fn set_p() -> ProcExpr {
    ProcExpr::action("Full", [("P", Dir::Out)])
}

/// Random expressions over unary symbols and the modules of [`unary_valuation`].
pub struct Gen<'a> {
    pub rng: &'a mut TestRng,
    pub symbols: Vec<String>,
    pub elements: Vec<String>,
    fresh: usize,
}

impl<'a> Gen<'a> {
    pub fn new(rng: &'a mut TestRng, symbols: &[&str], elements: &[&str]) -> Self {
        Gen {
            rng,
            symbols: symbols.iter().map(|s| s.to_string()).collect(),
            elements: elements.iter().map(|s| s.to_string()).collect(),
            fresh: 0,
        }
    }

    fn symbol(&mut self) -> String {
        self.symbols.choose(self.rng).unwrap().clone()
    }

    fn two_symbols(&mut self) -> (String, String) {
        let mut s = self.symbols.clone();
        s.shuffle(self.rng);
        (s[0].clone(), s[1 % s.len()].clone())
    }

    fn module(&mut self) -> &'static str {
        UNARY_MODULES.choose(self.rng).unwrap()
    }

    fn dir(&mut self) -> Dir {
        if self.rng.gen_bool(0.5) {
            Dir::In
        } else {
            Dir::Out
        }
    }

    fn fresh_var(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    pub fn const_relation(&mut self) -> ConstRelation {
        let chosen: Vec<Vec<String>> =
            self.elements.clone().into_iter().filter(|_| self.rng.gen_bool(0.5)).map(|e| vec![e]).collect();
        ConstRelation::new(chosen)
    }

    fn keep(&mut self) -> BTreeSet<String> {
        self.symbols.clone().into_iter().filter(|_| self.rng.gen_bool(0.6)).collect()
    }

    /// Closed flat expression; bound variables occur positively.
    pub fn flat(&mut self, depth: usize) -> FlatExpr {
        self.flat_in(depth, &mut Vec::new(), true)
    }

    /// Flat expression in which `var` may occur free, positively.
    pub fn flat_body(&mut self, depth: usize, var: &str) -> FlatExpr {
        self.flat_in(depth, &mut vec![var.to_string()], true)
    }

    fn flat_leaf(&mut self, bound: &[String], positive: bool) -> FlatExpr {
        match self.rng.gen_range(0..8) {
            0 => FlatExpr::Bottom,
            1 | 2 if positive && !bound.is_empty() => FlatExpr::var(bound.choose(self.rng).unwrap()),
            3 => {
                let (x, y) = self.two_symbols();
                FlatExpr::atom("Any2", [x, y])
            }
            _ => {
                let m = self.module();
                FlatExpr::atom(m, [self.symbol()])
            }
        }
    }

    fn flat_in(&mut self, depth: usize, bound: &mut Vec<String>, positive: bool) -> FlatExpr {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.flat_leaf(bound, positive);
        }
        match self.rng.gen_range(0..7) {
            0 => FlatExpr::union(self.flat_in(depth - 1, bound, positive), self.flat_in(depth - 1, bound, positive)),
            1 => FlatExpr::intersection(
                self.flat_in(depth - 1, bound, positive),
                self.flat_in(depth - 1, bound, positive),
            ),
            2 => FlatExpr::complement(self.flat_in(depth - 1, bound, !positive)),
            3 => {
                let keep = self.keep();
                FlatExpr::project(keep, self.flat_in(depth - 1, bound, positive))
            }
            4 => {
                let (x, y) = self.two_symbols();
                let rhs = if self.rng.gen_bool(0.5) { Operand::Var(y) } else { Operand::Const(self.const_relation()) };
                FlatExpr::select(Operand::Var(x), rhs, self.flat_in(depth - 1, bound, positive))
            }
            5 if positive => {
                let z = self.fresh_var("Z");
                bound.push(z.clone());
                let body = self.flat_in(depth - 1, bound, true);
                bound.pop();
                FlatExpr::lfp(&z, body)
            }
            _ => self.flat_leaf(bound, positive),
        }
    }

    /// Leaf process without variables.
    pub fn proc_leaf(&mut self) -> ProcExpr {
        match self.rng.gen_range(0..9) {
            0 => ProcExpr::Bottom,
            1 => ProcExpr::Diag,
            2 => {
                let m = self.module();
                ProcExpr::test(m, [self.symbol()])
            }
            3 | 4 => {
                let m = self.module();
                ProcExpr::action(m, [(self.symbol(), Dir::Out)])
            }
            5 | 6 => {
                let (x, y) = self.two_symbols();
                let (dx, dy) = (self.dir(), self.dir());
                if x == y {
                    ProcExpr::action("Any2", [(x.clone(), Dir::Out), (y, Dir::Out)])
                } else if dx == Dir::In && dy == Dir::In {
                    ProcExpr::test("Any2", [x, y])
                } else {
                    ProcExpr::action("Any2", [(x, dx), (y, dy)])
                }
            }
            7 => ProcExpr::ConstTest { var: self.symbol(), value: self.const_relation(), positive: self.rng.gen_bool(0.5) },
            _ => {
                // Selections only over actions mentioning both operands are always legal.
                let (x, y) = self.two_symbols();
                let inner = ProcExpr::action("Any2", [(x.clone(), self.dir()), (y.clone(), Dir::Out)]);
                let rhs = if self.rng.gen_bool(0.7) { Operand::Var(y) } else { Operand::Const(self.const_relation()) };
                ProcExpr::select(Operand::Var(x), rhs, inner)
            }
        }
    }

    /// Closed process expression.
    pub fn proc(&mut self, depth: usize) -> ProcExpr {
        self.proc_in(depth, &mut Vec::new(), true)
    }

    fn proc_in(&mut self, depth: usize, bound: &mut Vec<String>, positive: bool) -> ProcExpr {
        if depth == 0 || self.rng.gen_bool(0.2) {
            if positive && !bound.is_empty() && self.rng.gen_bool(0.3) {
                return ProcExpr::var(bound.choose(self.rng).unwrap());
            }
            return self.proc_leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..14) {
            0 => ProcExpr::union(self.proc_in(d, bound, positive), self.proc_in(d, bound, positive)),
            1 | 2 => ProcExpr::compose(self.proc_in(d, bound, positive), self.proc_in(d, bound, positive)),
            3 => ProcExpr::intersection(self.proc_in(d, bound, positive), self.proc_in(d, bound, positive)),
            4 => ProcExpr::complement(self.proc_in(d, bound, !positive)),
            5 => ProcExpr::down(self.proc_in(d, bound, positive)),
            6 => ProcExpr::up(self.proc_in(d, bound, positive)),
            7 => ProcExpr::neg(self.proc_in(d, bound, !positive)),
            8 => {
                let (min, max) = *[(0, 1), (1, 2), (2, 3)].choose(self.rng).unwrap();
                ProcExpr::count(self.proc_in(d, bound, positive), min, max)
            }
            9 => ProcExpr::reverse(self.proc(d)),
            10 => {
                let keep = self.keep();
                ProcExpr::project(keep, self.proc_in(d, bound, positive))
            }
            11 => {
                let inner = self.proc_in(d, bound, positive);
                if self.rng.gen_bool(0.5) {
                    ProcExpr::TestEq(Box::new(inner))
                } else {
                    ProcExpr::TestNeq(Box::new(inner))
                }
            }
            12 if positive => {
                let z = self.fresh_var("W");
                bound.push(z.clone());
                let body = self.proc_in(d, bound, true);
                bound.pop();
                ProcExpr::lfp(&z, body)
            }
            _ => ProcExpr::kleene_star(self.proc_in(d, bound, positive)),
        }
    }

    /// Closed state formula of the given depth; processes inside modalities
    /// have depth at most 2.
    pub fn state(&mut self, depth: usize) -> StateExpr {
        self.state_in(depth, &mut Vec::new(), true)
    }

    /// State formula in which `var` may occur free, positively.
    pub fn state_body(&mut self, depth: usize, var: &str) -> StateExpr {
        self.state_in(depth, &mut vec![var.to_string()], true)
    }

    fn state_leaf(&mut self, bound: &[String], positive: bool) -> StateExpr {
        match self.rng.gen_range(0..6) {
            0 => StateExpr::top(),
            1 | 2 if positive && !bound.is_empty() => StateExpr::set_var(bound.choose(self.rng).unwrap()),
            _ => {
                let m = self.module();
                StateExpr::prop(m, [self.symbol()])
            }
        }
    }

    fn state_in(&mut self, depth: usize, bound: &mut Vec<String>, positive: bool) -> StateExpr {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return self.state_leaf(bound, positive);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => StateExpr::or(self.state_in(d, bound, positive), self.state_in(d, bound, positive)),
            1 => StateExpr::and(self.state_in(d, bound, positive), self.state_in(d, bound, positive)),
            2 => StateExpr::not(self.state_in(d, bound, !positive)),
            3 | 4 => {
                let p = self.proc(d.min(2));
                StateExpr::diamond(p, self.state_in(d, bound, positive))
            }
            5 => {
                let p = self.proc(d.min(2));
                StateExpr::necessity(p, self.state_in(d, bound, positive))
            }
            6 if positive => {
                let x = self.fresh_var("X");
                bound.push(x.clone());
                let body = self.state_in(d, bound, true);
                bound.pop();
                StateExpr::lfp(&x, body)
            }
            _ => {
                let inner = self.state(d.min(2));
                StateExpr::diamond(ProcExpr::state_test(inner), self.state_in(d, bound, positive))
            }
        }
    }

    /// Propositional formula: fullness tests, boolean connectives and
    /// modalities over fullness-only actions.
    pub fn propositional(&mut self, depth: usize) -> StateExpr {
        if depth == 0 || self.rng.gen_bool(0.2) {
            let m = *["Full", "NonFull", "Any"].choose(self.rng).unwrap();
            return if self.rng.gen_bool(0.1) { StateExpr::top() } else { StateExpr::prop(m, [self.symbol()]) };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => StateExpr::or(self.propositional(d), self.propositional(d)),
            1 => StateExpr::and(self.propositional(d), self.propositional(d)),
            2 => StateExpr::not(self.propositional(d)),
            3 | 4 => {
                let p = self.propositional_proc(2);
                StateExpr::diamond(p, self.propositional(d))
            }
            _ => {
                let p = self.propositional_proc(2);
                StateExpr::necessity(p, self.propositional(d))
            }
        }
    }

    fn propositional_proc(&mut self, depth: usize) -> ProcExpr {
        let m = *["Full", "NonFull", "Any"].choose(self.rng).unwrap();
        if depth == 0 || self.rng.gen_bool(0.4) {
            return if self.rng.gen_bool(0.5) {
                ProcExpr::action(m, [(self.symbol(), Dir::Out)])
            } else {
                ProcExpr::test(m, [self.symbol()])
            };
        }
        match self.rng.gen_range(0..3) {
            0 => ProcExpr::union(self.propositional_proc(depth - 1), self.propositional_proc(depth - 1)),
            1 => ProcExpr::compose(self.propositional_proc(depth - 1), self.propositional_proc(depth - 1)),
            _ => ProcExpr::kleene_star(self.propositional_proc(depth - 1)),
        }
    }
}
