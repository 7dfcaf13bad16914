//! Domains, vocabularies, relations, structures and the enumerable universe
//! of all structures over a fixed domain.
//!
//! A structure is stored as a bit-vector with one slot per possible tuple of
//! every symbol: symbols in declaration order, tuples in lexicographic element
//! order. Slot 0 is the most significant bit, so numeric order on the packed
//! word is lexicographic order on the bit-vector. At most 128 slots fit.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

pub type ElemId = u32;
pub type SymbolId = usize;

/// Upper bound on the number of tuple slots in one structure.
pub const MAX_SLOTS: usize = 128;
/// Default bit budget for explicit universes (at most 2^20 structures).
pub const DEFAULT_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    elements: Vec<String>,
}

impl Domain {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let elements: Vec<String> = names.into_iter().map(Into::into).collect();
        if elements.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for e in &elements {
            if !seen.insert(e.as_str()) {
                return Err(Error::DuplicateName(e.clone()));
            }
        }
        Ok(Domain { elements })
    }

    /// Domain `e1, ..., en`.
    pub fn numbered(n: usize) -> Result<Self> {
        Domain::new((1..=n).map(|i| format!("e{i}")))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, name: &str) -> Option<ElemId> {
        self.elements.iter().position(|e| e == name).map(|i| i as ElemId)
    }

    pub fn name(&self, id: ElemId) -> &str {
        &self.elements[id as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    symbols: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let symbols: Vec<(String, usize)> =
            symbols.into_iter().map(|(s, a)| (s.into(), a)).collect();
        let mut seen = BTreeSet::new();
        for (name, arity) in &symbols {
            if *arity == 0 {
                return Err(Error::ZeroArity(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Vocabulary { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn index_of(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|(s, _)| s == name)
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id].0
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbols[id].1
    }
}

/// A set of tuples of domain elements (by element index).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationValue {
    arity: usize,
    tuples: BTreeSet<Vec<ElemId>>,
}

impl RelationValue {
    pub fn empty(arity: usize) -> Self {
        RelationValue { arity, tuples: BTreeSet::new() }
    }

    pub fn from_tuples<I>(arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<ElemId>>,
    {
        let mut rel = RelationValue::empty(arity);
        for t in tuples {
            rel.insert(t)?;
        }
        Ok(rel)
    }

    /// All `n^arity` tuples.
    pub fn full(arity: usize, n: usize) -> Self {
        let size = n.pow(arity as u32);
        let tuples = (0..size).map(|r| unrank(r, arity, n)).collect();
        RelationValue { arity, tuples }
    }

    pub fn insert(&mut self, tuple: Vec<ElemId>) -> Result<()> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch(format!(
                "tuple of length {} in relation of arity {}",
                tuple.len(),
                self.arity
            )));
        }
        self.tuples.insert(tuple);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[ElemId]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<ElemId>> {
        self.tuples.iter()
    }

    /// Checks every component against a domain of size `n`.
    pub fn check_domain(&self, n: usize) -> Result<()> {
        match self.tuples.iter().flatten().find(|&&e| e as usize >= n) {
            Some(e) => Err(Error::UnknownElement(format!("#{e}"))),
            None => Ok(()),
        }
    }

    /// Packs the relation into a field of `n^arity` bits, first tuple most significant.
    pub fn to_field(&self, n: usize) -> u128 {
        let len = n.pow(self.arity as u32);
        self.tuples
            .iter()
            .fold(0u128, |acc, t| acc | (1u128 << (len - 1 - rank(t, n))))
    }

    pub fn from_field(arity: usize, n: usize, field: u128) -> Self {
        let len = n.pow(arity as u32);
        let tuples = (0..len)
            .filter(|r| field >> (len - 1 - r) & 1 == 1)
            .map(|r| unrank(r, arity, n))
            .collect();
        RelationValue { arity, tuples }
    }

    pub fn display<'a>(&'a self, domain: &'a Domain) -> impl fmt::Display + 'a {
        RelationDisplay { rel: self, domain }
    }
}

struct RelationDisplay<'a> {
    rel: &'a RelationValue,
    domain: &'a Domain,
}

impl fmt::Display for RelationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.rel.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            for (j, e) in t.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                f.write_str(self.domain.name(*e))?;
            }
            f.write_str(")")?;
        }
        f.write_str("}")
    }
}

/// Lexicographic rank of a tuple among all tuples of its length.
pub fn rank(tuple: &[ElemId], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + e as usize)
}

pub fn unrank(mut r: usize, arity: usize, n: usize) -> Vec<ElemId> {
    let mut t = vec![0; arity];
    for slot in t.iter_mut().rev() {
        *slot = (r % n) as ElemId;
        r /= n;
    }
    t
}

/// Domain plus vocabulary, with the slot layout of packed structures.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    domain: Domain,
    vocab: Vocabulary,
    offsets: Vec<usize>,
    lens: Vec<usize>,
    total: usize,
}

impl Signature {
    pub fn new(domain: Domain, vocab: Vocabulary) -> Result<Arc<Self>> {
        let n = domain.len();
        let mut offsets = Vec::with_capacity(vocab.len());
        let mut lens = Vec::with_capacity(vocab.len());
        let mut total = 0usize;
        for (_, arity) in vocab.symbols() {
            let len = n
                .checked_pow(*arity as u32)
                .filter(|l| *l <= MAX_SLOTS)
                .ok_or(Error::CapExceeded { bits: usize::MAX, cap: MAX_SLOTS })?;
            offsets.push(total);
            lens.push(len);
            total += len;
        }
        if total > MAX_SLOTS {
            return Err(Error::CapExceeded { bits: total, cap: MAX_SLOTS });
        }
        Ok(Arc::new(Signature { domain, vocab, offsets, lens, total }))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Total number of tuple slots.
    pub fn slots(&self) -> usize {
        self.total
    }

    pub fn symbol_slots(&self, sym: SymbolId) -> usize {
        self.lens[sym]
    }

    fn shift(&self, sym: SymbolId) -> usize {
        self.total - self.offsets[sym] - self.lens[sym]
    }

    fn low_mask(len: usize) -> u128 {
        if len >= 128 {
            u128::MAX
        } else {
            (1u128 << len) - 1
        }
    }

    pub fn mask(&self, sym: SymbolId) -> u128 {
        Self::low_mask(self.lens[sym]) << self.shift(sym)
    }

    pub fn mask_of<I: IntoIterator<Item = SymbolId>>(&self, syms: I) -> u128 {
        syms.into_iter().fold(0, |m, s| m | self.mask(s))
    }

    pub fn all_mask(&self) -> u128 {
        Self::low_mask(self.total)
    }

    pub fn field(&self, bits: u128, sym: SymbolId) -> u128 {
        (bits >> self.shift(sym)) & Self::low_mask(self.lens[sym])
    }

    pub fn set_field(&self, bits: u128, sym: SymbolId, field: u128) -> u128 {
        (bits & !self.mask(sym)) | ((field & Self::low_mask(self.lens[sym])) << self.shift(sym))
    }

    pub fn relation(&self, bits: u128, sym: SymbolId) -> RelationValue {
        RelationValue::from_field(self.vocab.arity(sym), self.domain.len(), self.field(bits, sym))
    }

    /// Symbols whose slots intersect `mask`.
    pub fn symbols_in(&self, mask: u128) -> Vec<SymbolId> {
        (0..self.vocab.len()).filter(|&s| self.mask(s) & mask != 0).collect()
    }

    /// Compact interpretation string, e.g. `P:{(a)} E:{}`.
    pub fn describe(&self, bits: u128) -> String {
        let mut out = String::new();
        for sym in 0..self.vocab.len() {
            if sym > 0 {
                out.push(' ');
            }
            out.push_str(self.vocab.name(sym));
            out.push(':');
            out.push_str(&self.relation(bits, sym).display(&self.domain).to_string());
        }
        out
    }
}

/// A total interpretation of a signature's vocabulary.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    sig: Arc<Signature>,
    bits: u128,
}

impl Structure {
    pub fn empty(sig: Arc<Signature>) -> Self {
        Structure { sig, bits: 0 }
    }

    pub fn from_bits(sig: Arc<Signature>, bits: u128) -> Self {
        let bits = bits & sig.all_mask();
        Structure { sig, bits }
    }

    /// Builds a structure from named relations; symbols not listed are empty.
    pub fn from_relations<'a, I>(sig: Arc<Signature>, relations: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a RelationValue)>,
    {
        let mut s = Structure::empty(sig);
        for (name, rel) in relations {
            s = s.with_relation(name, rel)?;
        }
        Ok(s)
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn relation(&self, name: &str) -> Result<RelationValue> {
        let sym = self
            .sig
            .vocab()
            .index_of(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        Ok(self.sig.relation(self.bits, sym))
    }

    pub fn with_relation(&self, name: &str, rel: &RelationValue) -> Result<Self> {
        let sym = self
            .sig
            .vocab()
            .index_of(name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        if self.sig.vocab().arity(sym) != rel.arity() {
            return Err(Error::ArityMismatch(format!(
                "symbol `{name}` has arity {}, relation has arity {}",
                self.sig.vocab().arity(sym),
                rel.arity()
            )));
        }
        let n = self.sig.domain().len();
        rel.check_domain(n)?;
        let bits = self.sig.set_field(self.bits, sym, rel.to_field(n));
        Ok(Structure { sig: self.sig.clone(), bits })
    }

    pub fn agrees_on(&self, other: &Structure, mask: u128) -> bool {
        (self.bits ^ other.bits) & mask == 0
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure({})", self.sig.describe(self.bits))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sig.describe(self.bits))
    }
}

/// All structures over a signature that agree with `base` on the frozen
/// slots. The plain universe freezes nothing.
#[derive(Debug, Clone)]
pub struct Universe {
    sig: Arc<Signature>,
    base: u128,
    frozen: u128,
    /// Free slot bit positions, most significant first.
    free: Vec<u32>,
    size: usize,
}

pub fn build_universe(domain: Domain, vocab: Vocabulary, cap: usize) -> Result<Universe> {
    Universe::new(Signature::new(domain, vocab)?, cap)
}

impl Universe {
    pub fn new(sig: Arc<Signature>, cap: usize) -> Result<Self> {
        Universe::slice(sig, 0, 0, cap)
    }

    /// Sub-universe of structures agreeing with `base` on `frozen` slots.
    pub fn slice(sig: Arc<Signature>, base: u128, frozen: u128, cap: usize) -> Result<Self> {
        let all = sig.all_mask();
        let frozen = frozen & all;
        let free: Vec<u32> =
            (0..sig.slots() as u32).rev().filter(|p| (all & !frozen) >> p & 1 == 1).collect();
        if free.len() > cap || free.len() >= usize::BITS as usize - 1 {
            return Err(Error::CapExceeded { bits: free.len(), cap });
        }
        Ok(Universe { size: 1usize << free.len(), base: base & frozen, frozen, free, sig })
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_full(&self) -> bool {
        self.frozen == 0
    }

    pub fn frozen_mask(&self) -> u128 {
        self.frozen
    }

    pub fn bits_at(&self, index: usize) -> u128 {
        if self.frozen == 0 {
            return index as u128;
        }
        let k = self.free.len();
        self.free.iter().enumerate().fold(self.base, |acc, (j, &p)| {
            acc | (((index >> (k - 1 - j)) & 1) as u128) << p
        })
    }

    pub fn structure_at(&self, index: usize) -> Structure {
        Structure { sig: self.sig.clone(), bits: self.bits_at(index) }
    }

    pub fn index_of_bits(&self, bits: u128) -> Option<usize> {
        if bits & !self.sig.all_mask() != 0 || bits & self.frozen != self.base {
            return None;
        }
        if self.frozen == 0 {
            return Some(bits as usize);
        }
        let k = self.free.len();
        Some(self.free.iter().enumerate().fold(0usize, |acc, (j, &p)| {
            acc | (((bits >> p) & 1) as usize) << (k - 1 - j)
        }))
    }

    pub fn index_of(&self, s: &Structure) -> Option<usize> {
        if *s.sig != *self.sig {
            return None;
        }
        self.index_of_bits(s.bits)
    }

    pub fn iter_bits(&self) -> impl Iterator<Item = u128> + '_ {
        (0..self.size).map(move |i| self.bits_at(i))
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.size)
    }

    pub fn full_set(&self) -> StateSet {
        StateSet::full(self.size)
    }

    /// Structures of `set` in canonical order.
    pub fn structures(&self, set: &StateSet) -> Vec<Structure> {
        set.iter().map(|i| self.structure_at(i)).collect()
    }
}

/// A subset of a universe, by canonical index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet(FixedBitSet);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet(FixedBitSet::with_capacity(n))
    }

    pub fn full(n: usize) -> Self {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        StateSet(b)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = StateSet::empty(n);
        for i in it {
            s.insert(i);
        }
        s
    }

    pub fn universe_len(&self) -> usize {
        self.0.len()
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        StateSet(b)
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        StateSet(b)
    }

    pub fn difference(&self, other: &StateSet) -> StateSet {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        StateSet(b)
    }

    pub fn complement(&self) -> StateSet {
        let mut b = self.0.clone();
        b.toggle_range(..);
        StateSet(b)
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
