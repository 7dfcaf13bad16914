//! Atomic modules (extensional tables and built-in oracles) and valuations.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::dynamic::EdgeSet;
use crate::error::{Error, Result};
use crate::structure::{RelationValue, Signature, StateSet, Structure, SymbolId, Universe};

/// Built-in oracle predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// `(V/1, X/2, Y/2)`: Y ⊆ X is a directed cycle through every element of V once.
    HamiltonianCircuit,
    /// `(V/1, X/2, Z/1, T/1)`: Z, T partition V and no X-edge stays inside a colour.
    TwoCol,
    /// Every argument holds all tuples.
    Full,
    /// Some argument misses a tuple.
    NonFull,
    /// Every argument is empty.
    Empty,
    /// Some argument is non-empty.
    NonEmpty,
    /// `(X/k)`: exactly one tuple.
    Singleton,
    /// `(R/k, x1/1, ..., xk/1)`: each xi is a singleton and the tuple of their elements is in R.
    Member,
    /// Accepts every structure.
    Any,
}

impl Builtin {
    pub const ALL: [Builtin; 9] = [
        Builtin::HamiltonianCircuit,
        Builtin::TwoCol,
        Builtin::Full,
        Builtin::NonFull,
        Builtin::Empty,
        Builtin::NonEmpty,
        Builtin::Singleton,
        Builtin::Member,
        Builtin::Any,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::HamiltonianCircuit => "hamiltonian_circuit",
            Builtin::TwoCol => "two_col",
            Builtin::Full => "full",
            Builtin::NonFull => "nonfull",
            Builtin::Empty => "empty",
            Builtin::NonEmpty => "nonempty",
            Builtin::Singleton => "singleton",
            Builtin::Member => "member",
            Builtin::Any => "any",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownBuiltin(name.to_string()))
    }

    /// Whether membership depends only on which arguments are full.
    pub fn is_propositional(self) -> bool {
        matches!(self, Builtin::Full | Builtin::NonFull | Builtin::Any)
    }

    fn check_vvoc(self, vvoc: &[(String, usize)]) -> Result<()> {
        let arities: Vec<usize> = vvoc.iter().map(|(_, a)| *a).collect();
        let ok = match self {
            Builtin::HamiltonianCircuit => arities == [1, 2, 2],
            Builtin::TwoCol => arities == [1, 2, 1, 1],
            Builtin::Singleton => arities.len() == 1,
            Builtin::Member => {
                !arities.is_empty()
                    && arities.len() == arities[0] + 1
                    && arities[1..].iter().all(|&a| a == 1)
            }
            Builtin::Full | Builtin::NonFull | Builtin::Empty | Builtin::NonEmpty => {
                !arities.is_empty()
            }
            Builtin::Any => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ArityMismatch(format!(
                "builtin {} does not accept parameters {:?}",
                self.name(),
                arities
            )))
        }
    }

    /// Evaluates the oracle on packed fields over a domain of size `n`.
    pub fn holds(self, n: usize, fields: &[(usize, u128)]) -> bool {
        let full = |arity: usize| -> u128 { low_ones(n.pow(arity as u32)) };
        match self {
            Builtin::HamiltonianCircuit => hamiltonian(n, fields[0].1, fields[1].1, fields[2].1),
            Builtin::TwoCol => two_col(n, fields[0].1, fields[1].1, fields[2].1, fields[3].1),
            Builtin::Full => fields.iter().all(|&(a, f)| f == full(a)),
            Builtin::NonFull => fields.iter().any(|&(a, f)| f != full(a)),
            Builtin::Empty => fields.iter().all(|&(_, f)| f == 0),
            Builtin::NonEmpty => fields.iter().any(|&(_, f)| f != 0),
            Builtin::Singleton => fields[0].1.count_ones() == 1,
            Builtin::Member => {
                let (arity, rel) = fields[0];
                let mut r = 0usize;
                for &(_, x) in &fields[1..] {
                    if x.count_ones() != 1 {
                        return false;
                    }
                    let elem = n - 1 - x.trailing_zeros() as usize;
                    r = r * n + elem;
                }
                let len = n.pow(arity as u32);
                rel >> (len - 1 - r) & 1 == 1
            }
            Builtin::Any => true,
        }
    }
}

fn low_ones(len: usize) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

fn has1(field: u128, n: usize, i: usize) -> bool {
    field >> (n - 1 - i) & 1 == 1
}

fn has2(field: u128, n: usize, i: usize, j: usize) -> bool {
    field >> (n * n - 1 - (i * n + j)) & 1 == 1
}

fn hamiltonian(n: usize, v: u128, x: u128, y: u128) -> bool {
    if y & !x != 0 {
        return false;
    }
    let verts: Vec<usize> = (0..n).filter(|&i| has1(v, n, i)).collect();
    if verts.is_empty() || y.count_ones() as usize != verts.len() {
        return false;
    }
    let mut succ = vec![usize::MAX; n];
    for (i, next) in succ.iter_mut().enumerate() {
        for j in 0..n {
            if has2(y, n, i, j) {
                if !has1(v, n, i) || !has1(v, n, j) || *next != usize::MAX {
                    return false;
                }
                *next = j;
            }
        }
    }
    let start = verts[0];
    let mut seen = vec![false; n];
    let mut cur = start;
    for _ in 0..verts.len() {
        if cur == usize::MAX || seen[cur] {
            return false;
        }
        seen[cur] = true;
        cur = succ[cur];
    }
    cur == start
}

fn two_col(n: usize, v: u128, x: u128, z: u128, t: u128) -> bool {
    if z | t != v || z & t != 0 {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if has2(x, n, i, j)
                && ((has1(z, n, i) && has1(z, n, j)) || (has1(t, n, i) && has1(t, n, j)))
            {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleKind {
    /// Explicit set of vvoc-structures, each listing relations in vvoc order.
    Extensional(Vec<Vec<RelationValue>>),
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicModule {
    name: String,
    vvoc: Vec<(String, usize)>,
    kind: ModuleKind,
    /// Packed rows of an extensional table, keyed by domain size.
    table: Option<(usize, HashSet<Vec<u128>>)>,
}

impl AtomicModule {
    pub fn builtin(name: &str, vvoc: Vec<(String, usize)>, builtin: Builtin) -> Result<Self> {
        builtin.check_vvoc(&vvoc)?;
        Ok(AtomicModule {
            name: name.to_string(),
            vvoc,
            kind: ModuleKind::Builtin(builtin),
            table: None,
        })
    }

    /// Extensional module over a domain of size `n`.
    pub fn extensional(
        name: &str,
        vvoc: Vec<(String, usize)>,
        rows: Vec<Vec<RelationValue>>,
        n: usize,
    ) -> Result<Self> {
        let mut packed = HashSet::new();
        for row in &rows {
            if row.len() != vvoc.len() {
                return Err(Error::ArityMismatch(format!(
                    "module {name}: row has {} relations, expected {}",
                    row.len(),
                    vvoc.len()
                )));
            }
            for (rel, (var, arity)) in row.iter().zip(&vvoc) {
                if rel.arity() != *arity {
                    return Err(Error::ArityMismatch(format!(
                        "module {name}: `{var}` has arity {arity}"
                    )));
                }
                rel.check_domain(n)?;
            }
            packed.insert(row.iter().map(|r| r.to_field(n)).collect());
        }
        Ok(AtomicModule {
            name: name.to_string(),
            vvoc,
            kind: ModuleKind::Extensional(rows),
            table: Some((n, packed)),
        })
    }

    /// Same module over a domain of size `n`. Extensional rows mentioning
    /// elements outside the domain are dropped.
    pub fn resized(&self, n: usize) -> Self {
        let mut m = self.clone();
        if let ModuleKind::Extensional(rows) = &self.kind {
            let packed = rows
                .iter()
                .filter(|row| row.iter().all(|r| r.check_domain(n).is_ok()))
                .map(|row| row.iter().map(|r| r.to_field(n)).collect())
                .collect();
            m.table = Some((n, packed));
        }
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vvoc(&self) -> &[(String, usize)] {
        &self.vvoc
    }

    pub fn kind(&self) -> &ModuleKind {
        &self.kind
    }

    /// Membership of a packed structure; reads only the fields of `syms`.
    pub fn contains_bits(&self, sig: &Signature, syms: &[SymbolId], bits: u128) -> bool {
        let n = sig.domain().len();
        match &self.kind {
            ModuleKind::Builtin(b) => {
                let fields: Vec<(usize, u128)> =
                    syms.iter().map(|&s| (sig.vocab().arity(s), sig.field(bits, s))).collect();
                b.holds(n, &fields)
            }
            ModuleKind::Extensional(_) => match &self.table {
                Some((tn, table)) if *tn == n => {
                    let row: Vec<u128> = syms.iter().map(|&s| sig.field(bits, s)).collect();
                    table.contains(&row)
                }
                _ => false,
            },
        }
    }

    /// Checks that `syms` can serve as this module's arguments.
    pub fn check_args(&self, sig: &Signature, syms: &[SymbolId]) -> Result<()> {
        if syms.len() != self.vvoc.len() {
            return Err(Error::ArityMismatch(format!(
                "module {} takes {} arguments, got {}",
                self.name,
                self.vvoc.len(),
                syms.len()
            )));
        }
        for (&s, (var, arity)) in syms.iter().zip(&self.vvoc) {
            if sig.vocab().arity(s) != *arity {
                return Err(Error::ArityMismatch(format!(
                    "module {}: parameter `{var}`/{arity} bound to `{}`/{}",
                    self.name,
                    sig.vocab().name(s),
                    sig.vocab().arity(s)
                )));
            }
        }
        if let ModuleKind::Extensional(_) = self.kind {
            if let Some((tn, _)) = &self.table {
                if *tn != sig.domain().len() {
                    return Err(Error::ArityMismatch(format!(
                        "module {} was declared over a domain of size {tn}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Checks `s ∈ 𝒱(v, m)` where `v` maps the module's vvoc names to symbols.
pub fn module_membership(
    m: &AtomicModule,
    v: &BTreeMap<String, String>,
    s: &Structure,
) -> Result<bool> {
    let sig = s.sig();
    let syms = m
        .vvoc()
        .iter()
        .map(|(var, _)| {
            let sym_name = v.get(var).map(String::as_str).unwrap_or(var);
            sig.vocab()
                .index_of(sym_name)
                .ok_or_else(|| Error::UnmappedVariable(var.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    m.check_args(sig, &syms)?;
    Ok(m.contains_bits(sig, &syms, s.bits()))
}

/// Value bound to a module or set variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    States(StateSet),
    Edges(EdgeSet),
}

/// Variable-to-symbol map plus domain, vocabulary and module interpretations.
#[derive(Debug, Clone)]
pub struct Valuation {
    sig: Arc<Signature>,
    var_map: BTreeMap<String, String>,
    modules: BTreeMap<String, AtomicModule>,
    module_vars: BTreeMap<String, Binding>,
}

impl Valuation {
    pub fn new(sig: Arc<Signature>) -> Self {
        Valuation {
            sig,
            var_map: BTreeMap::new(),
            modules: BTreeMap::new(),
            module_vars: BTreeMap::new(),
        }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn with_module(mut self, m: AtomicModule) -> Self {
        self.add_module(m);
        self
    }

    pub fn add_module(&mut self, m: AtomicModule) {
        self.modules.insert(m.name.clone(), m);
    }

    /// Maps relational variable `var` to vocabulary symbol `symbol`.
    pub fn map_var(&mut self, var: &str, symbol: &str) -> Result<()> {
        if self.sig.vocab().index_of(symbol).is_none() {
            return Err(Error::UnknownSymbol(symbol.to_string()));
        }
        self.var_map.insert(var.to_string(), symbol.to_string());
        Ok(())
    }

    pub fn bind(&mut self, var: &str, value: Binding) {
        self.module_vars.insert(var.to_string(), value);
    }

    pub fn var_map(&self) -> &BTreeMap<String, String> {
        &self.var_map
    }

    pub fn modules(&self) -> &BTreeMap<String, AtomicModule> {
        &self.modules
    }

    pub fn module_vars(&self) -> &BTreeMap<String, Binding> {
        &self.module_vars
    }

    pub fn module(&self, name: &str) -> Result<&AtomicModule> {
        self.modules.get(name).ok_or_else(|| Error::UnknownModule(name.to_string()))
    }

    /// Symbol for a relational variable: the explicit mapping, else the
    /// symbol of the same name.
    pub fn symbol_of(&self, var: &str) -> Result<SymbolId> {
        let name = self.var_map.get(var).map(String::as_str).unwrap_or(var);
        self.sig
            .vocab()
            .index_of(name)
            .ok_or_else(|| Error::UnmappedVariable(var.to_string()))
    }

    /// Argument symbols of an atom `module(args)`.
    pub fn resolve_atom(&self, module: &str, args: &[String]) -> Result<Vec<SymbolId>> {
        let m = self.module(module)?;
        let syms = args.iter().map(|a| self.symbol_of(a)).collect::<Result<Vec<_>>>()?;
        m.check_args(&self.sig, &syms)?;
        Ok(syms)
    }

    /// Same valuation over another signature (used when the domain varies).
    pub fn with_sig(&self, sig: Arc<Signature>) -> Self {
        let n = sig.domain().len();
        let modules = self.modules.iter().map(|(k, m)| (k.clone(), m.resized(n))).collect();
        Valuation { sig, modules, ..self.clone() }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `{ s ∈ u : s ∈ 𝒱(v, m) }`, reading the module's own vvoc names through `v`.
pub fn extension_of(m: &AtomicModule, val: &Valuation, u: &Universe) -> Result<StateSet> {
    let args: Vec<String> = m.vvoc().iter().map(|(v, _)| v.clone()).collect();
    let syms = args.iter().map(|a| val.symbol_of(a)).collect::<Result<Vec<_>>>()?;
    m.check_args(u.sig(), &syms)?;
    let sig = u.sig();
    Ok(StateSet::from_indices(
        u.size(),
        (0..u.size()).filter(|&i| m.contains_bits(sig, &syms, u.bits_at(i))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_universe, Domain, Vocabulary, DEFAULT_CAP};

    fn graph_sig(n: usize) -> Arc<Signature> {
        Signature::new(
            Domain::numbered(n).unwrap(),
            Vocabulary::new([("V", 1), ("X", 2), ("Y", 2), ("Z", 1), ("T", 1)]).unwrap(),
        )
        .unwrap()
    }

    fn rel1(xs: &[u32]) -> RelationValue {
        RelationValue::from_tuples(1, xs.iter().map(|&x| vec![x])).unwrap()
    }

    fn rel2(xs: &[(u32, u32)]) -> RelationValue {
        RelationValue::from_tuples(2, xs.iter().map(|&(a, b)| vec![a, b])).unwrap()
    }

    fn sym_cycle(n: u32) -> RelationValue {
        let mut e = vec![];
        for i in 0..n {
            e.push((i, (i + 1) % n));
            e.push(((i + 1) % n, i));
        }
        rel2(&e)
    }

    fn two_col_module() -> AtomicModule {
        let vvoc = [("V", 1), ("X", 2), ("Z", 1), ("T", 1)]
            .iter()
            .map(|(s, a)| (s.to_string(), *a))
            .collect();
        AtomicModule::builtin("TwoCol", vvoc, Builtin::TwoCol).unwrap()
    }

    fn hc_module() -> AtomicModule {
        let vvoc = [("V", 1), ("X", 2), ("Y", 2)].iter().map(|(s, a)| (s.to_string(), *a)).collect();
        AtomicModule::builtin("HC", vvoc, Builtin::HamiltonianCircuit).unwrap()
    }

    #[test]
    fn two_col_on_c4() {
        let sig = graph_sig(4);
        let s = Structure::from_relations(
            sig,
            [
                ("V", &rel1(&[0, 1, 2, 3])),
                ("X", &sym_cycle(4)),
                ("Z", &rel1(&[0, 2])),
                ("T", &rel1(&[1, 3])),
            ],
        )
        .unwrap();
        assert!(module_membership(&two_col_module(), &BTreeMap::new(), &s).unwrap());
    }

    #[test]
    fn two_col_on_k3_never_holds() {
        let sig = graph_sig(3);
        for mask in 0u32..8 {
            let z: Vec<u32> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
            let t: Vec<u32> = (0..3).filter(|i| mask >> i & 1 == 0).collect();
            let s = Structure::from_relations(
                sig.clone(),
                [("V", &rel1(&[0, 1, 2])), ("X", &sym_cycle(3)), ("Z", &rel1(&z)), ("T", &rel1(&t))],
            )
            .unwrap();
            assert!(!module_membership(&two_col_module(), &BTreeMap::new(), &s).unwrap());
        }
    }

    #[test]
    fn hamiltonian_empty_cycle_fails() {
        let sig = graph_sig(1);
        let s = Structure::from_relations(sig, [("V", &rel1(&[0])), ("X", &rel2(&[(0, 0)]))])
            .unwrap();
        assert!(!module_membership(&hc_module(), &BTreeMap::new(), &s).unwrap());
        let s = s.with_relation("Y", &rel2(&[(0, 0)])).unwrap();
        assert!(module_membership(&hc_module(), &BTreeMap::new(), &s).unwrap());
    }

    #[test]
    fn hamiltonian_on_triangle() {
        let sig = graph_sig(3);
        let base = Structure::from_relations(
            sig,
            [("V", &rel1(&[0, 1, 2])), ("X", &sym_cycle(3))],
        )
        .unwrap();
        let good = base.with_relation("Y", &rel2(&[(0, 1), (1, 2), (2, 0)])).unwrap();
        let bad = base.with_relation("Y", &rel2(&[(0, 1), (1, 0), (2, 0)])).unwrap();
        let short = base.with_relation("Y", &rel2(&[(0, 1), (1, 0)])).unwrap();
        let m = hc_module();
        assert!(module_membership(&m, &BTreeMap::new(), &good).unwrap());
        assert!(!module_membership(&m, &BTreeMap::new(), &bad).unwrap());
        assert!(!module_membership(&m, &BTreeMap::new(), &short).unwrap());
        // Brute force: exactly the two orientations.
        let count = (0u128..512)
            .filter(|&y| {
                let s = Structure::from_bits(base.sig().clone(), base.sig().set_field(base.bits(), 2, y));
                module_membership(&m, &BTreeMap::new(), &s).unwrap()
            })
            .count();
        assert_eq!(count, 2);
    }

    #[test]
    fn arity_and_builtin_errors() {
        assert!(matches!(Builtin::from_name("three_col"), Err(Error::UnknownBuiltin(_))));
        let bad = vec![("X".to_string(), 2)];
        assert!(matches!(
            AtomicModule::builtin("H", bad, Builtin::HamiltonianCircuit),
            Err(Error::ArityMismatch(_))
        ));
        let sig = graph_sig(2);
        let mut v = BTreeMap::new();
        v.insert("X".to_string(), "V".to_string());
        let m = AtomicModule::builtin("F", vec![("X".into(), 2)], Builtin::Full).unwrap();
        assert!(matches!(
            module_membership(&m, &v, &Structure::empty(sig)),
            Err(Error::ArityMismatch(_))
        ));
    }

    #[test]
    fn extension_filters_universe() {
        let u = build_universe(
            Domain::new(["a", "b"]).unwrap(),
            Vocabulary::new([("P", 1), ("Q", 1)]).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap();
        let full_p = AtomicModule::builtin("FullP", vec![("P".into(), 1)], Builtin::Full).unwrap();
        let val = Valuation::new(u.sig().clone()).with_module(full_p.clone());
        let ext = extension_of(&full_p, &val, &u).unwrap();
        assert_eq!(ext.len(), 4);
        for s in u.structures(&ext) {
            assert_eq!(s.relation("P").unwrap().len(), 2);
        }
        let none = AtomicModule::extensional("None", vec![("P".into(), 1)], vec![], 2).unwrap();
        assert!(extension_of(&none, &val, &u).unwrap().is_empty());
    }

    #[test]
    fn extensional_membership() {
        let u = build_universe(
            Domain::new(["a", "b"]).unwrap(),
            Vocabulary::new([("P", 1), ("Q", 1)]).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap();
        let m = AtomicModule::extensional(
            "M",
            vec![("X".into(), 1)],
            vec![vec![rel1(&[0])]],
            2,
        )
        .unwrap();
        let mut val = Valuation::new(u.sig().clone()).with_module(m.clone());
        val.map_var("X", "Q").unwrap();
        let ext = extension_of(&m, &val, &u).unwrap();
        assert_eq!(ext.len(), 4);
        for s in u.structures(&ext) {
            assert_eq!(s.relation("Q").unwrap(), rel1(&[0]));
        }
    }

    #[test]
    fn locality_exhaustive() {
        // Membership only depends on the argument symbols.
        let u = build_universe(
            Domain::new(["a", "b"]).unwrap(),
            Vocabulary::new([("P", 1), ("Q", 1), ("E", 2)]).unwrap(),
            DEFAULT_CAP,
        )
        .unwrap();
        let sig = u.sig();
        let modules = [
            AtomicModule::builtin("F", vec![("P".into(), 1)], Builtin::Full).unwrap(),
            AtomicModule::builtin("S", vec![("E".into(), 2)], Builtin::Singleton).unwrap(),
            AtomicModule::builtin(
                "Mem",
                vec![("E".into(), 2), ("P".into(), 1), ("Q".into(), 1)],
                Builtin::Member,
            )
            .unwrap(),
        ];
        for m in &modules {
            let syms: Vec<SymbolId> =
                m.vvoc().iter().map(|(v, _)| sig.vocab().index_of(v).unwrap()).collect();
            let mask = sig.mask_of(syms.iter().copied());
            let mut by_key = std::collections::HashMap::new();
            for bits in u.iter_bits() {
                let r = m.contains_bits(sig, &syms, bits);
                assert_eq!(*by_key.entry(bits & mask).or_insert(r), r);
            }
        }
    }
}
