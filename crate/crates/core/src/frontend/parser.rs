//! Lexer and recursive-descent parser for `.mod` files and for single
//! expressions of each sort.
//!
//! Precedence, tightest first: prefix operators (postfix binds tighter
//! still in process expressions), then `&` and `;`, then `|`. A `mu`
//! body extends as far right as possible.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::dynamic::{Dir, ProcExpr};
use crate::error::{Error, Result};
use crate::flat::ast::{ConstRelation, FlatExpr, Operand};
use crate::lmumu::ast::proc_modules;
use crate::lmumu::StateExpr;
use crate::module::{AtomicModule, Builtin, Valuation};
use crate::structure::{Domain, Signature, Structure, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 23] = [
    "==", "!=", "->", "{", "}", "(", ")", "[", "]", ",", ";", ":", "/", ".", "|", "&", "-", "!", "<", ">", "?",
    "*", "^",
];

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), line, column });
            column += i - start;
            continue;
        }
        // `'` and `=` only occur as parts of longer tokens or on their own.
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let sym = SYMBOLS
            .iter()
            .find(|s| rest.starts_with(**s))
            .copied()
            .or(match c {
                '\'' => Some("'"),
                '=' => Some("="),
                _ => None,
            })
            .ok_or_else(|| Error::Syntax { line, column, message: format!("unexpected character `{c}`") })?;
        out.push(Token { tok: Tok::Sym(sym), line, column });
        i += sym.len();
        column += sym.len();
    }
    Ok(out)
}

const KEYWORDS: [&str; 23] = [
    "bot", "diag", "pi", "sel", "mu", "dn", "up", "neg", "rev", "test", "prop", "true", "in", "out", "builtin",
    "domain", "vocab", "map", "module", "structure", "flat", "dyn", "state",
];

/// Words that start a declaration. A `;` followed by one of these (or by
/// the end of input) ends the declaration instead of composing.
const DECL_KEYWORDS: [&str; 8] = ["domain", "vocab", "map", "module", "structure", "flat", "dyn", "state"];

/// A parsed relation literal: element names per tuple.
pub type RelationLit = ConstRelation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleBody {
    /// Rows mapping parameters to relations; unlisted parameters are empty.
    Structures(Vec<BTreeMap<String, RelationLit>>),
    Builtin(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Domain(Vec<String>),
    Vocab(Vec<(String, usize)>),
    /// Relational variable to vocabulary symbol.
    Map(String, String),
    Module { name: String, params: Vec<(String, usize)>, body: ModuleBody },
    Structure(String, BTreeMap<String, RelationLit>),
    Flat(String, FlatExpr),
    Dyn(String, ProcExpr),
    State(String, StateExpr),
}

/// A `.mod` file: declarations in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub decls: Vec<Decl>,
}

impl SpecFile {
    pub fn signature(&self) -> Result<Arc<Signature>> {
        let mut domain = None;
        let mut vocab = None;
        for d in &self.decls {
            match d {
                Decl::Domain(names) => domain = Some(Domain::new(names.clone())?),
                Decl::Vocab(syms) => vocab = Some(Vocabulary::new(syms.clone())?),
                _ => {}
            }
        }
        let missing = |what: &str| Error::Syntax { line: 0, column: 0, message: format!("missing `{what}` declaration") };
        Signature::new(domain.ok_or_else(|| missing("domain"))?, vocab.ok_or_else(|| missing("vocab"))?)
    }

    pub fn valuation(&self) -> Result<Valuation> {
        let sig = self.signature()?;
        let mut val = Valuation::new(sig.clone());
        for d in &self.decls {
            match d {
                Decl::Map(var, sym) => val.map_var(var, sym)?,
                Decl::Module { name, params, body } => {
                    let m = match body {
                        ModuleBody::Builtin(b) => AtomicModule::builtin(name, params.clone(), Builtin::from_name(b)?)?,
                        ModuleBody::Structures(rows) => {
                            let rows = rows
                                .iter()
                                .map(|row| {
                                    if let Some(k) = row.keys().find(|k| !params.iter().any(|(p, _)| p == *k)) {
                                        return Err(Error::UnknownSymbol(k.clone()));
                                    }
                                    params
                                        .iter()
                                        .map(|(p, arity)| match row.get(p) {
                                            Some(rel) => rel.resolve(sig.domain(), *arity),
                                            None => Ok(crate::structure::RelationValue::empty(*arity)),
                                        })
                                        .collect::<Result<Vec<_>>>()
                                })
                                .collect::<Result<Vec<_>>>()?;
                            AtomicModule::extensional(name, params.clone(), rows, sig.domain().len())?
                        }
                    };
                    val.add_module(m);
                }
                _ => {}
            }
        }
        Ok(val)
    }

    /// A declared structure; symbols it does not mention are empty.
    pub fn structure(&self, name: &str) -> Result<Structure> {
        let sig = self.signature()?;
        let rels = self
            .decls
            .iter()
            .find_map(|d| match d {
                Decl::Structure(n, rels) if n == name => Some(rels),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
        structure_from_literals(&sig, rels.iter().map(|(k, v)| (k.as_str(), v)))
    }

    pub fn flat(&self, name: &str) -> Option<&FlatExpr> {
        self.decls.iter().find_map(|d| match d {
            Decl::Flat(n, e) if n == name => Some(e),
            _ => None,
        })
    }

    pub fn dyn_expr(&self, name: &str) -> Option<&ProcExpr> {
        self.decls.iter().find_map(|d| match d {
            Decl::Dyn(n, e) if n == name => Some(e),
            _ => None,
        })
    }

    pub fn state(&self, name: &str) -> Option<&StateExpr> {
        self.decls.iter().find_map(|d| match d {
            Decl::State(n, e) if n == name => Some(e),
            _ => None,
        })
    }
}

/// Structure over `sig` from symbol-to-literal pairs; other symbols are empty.
pub fn structure_from_literals<'a>(
    sig: &Arc<Signature>,
    rels: impl IntoIterator<Item = (&'a str, &'a RelationLit)>,
) -> Result<Structure> {
    let mut s = Structure::empty(sig.clone());
    for (sym, lit) in rels {
        let id = sig.vocab().index_of(sym).ok_or_else(|| Error::UnknownSymbol(sym.to_string()))?;
        s = s.with_relation(sym, &lit.resolve(sig.domain(), sig.vocab().arity(id))?)?;
    }
    Ok(s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Earlier definitions per sort, inlined when referenced by name.
    flat_defs: BTreeMap<String, FlatExpr>,
    dyn_defs: BTreeMap<String, ProcExpr>,
    state_defs: BTreeMap<String, StateExpr>,
    /// Fixpoint variables in scope; these shadow definitions.
    bound: Vec<String>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            flat_defs: BTreeMap::new(),
            dyn_defs: BTreeMap::new(),
            state_defs: BTreeMap::new(),
            bound: Vec::new(),
        })
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) if self.pos < self.toks.len() => (t.line, t.column),
            Some(t) => (t.line, t.column + 1),
            None => (1, 1),
        };
        Err(Error::Syntax { line, column, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.error(format!("expected `{w}`"))
        }
    }

    /// Any word, including numerals (used for element names).
    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error("expected a name"),
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) && !w.starts_with(|c: char| c.is_ascii_digit()) => {
                self.word()
            }
            _ => self.error("expected an identifier"),
        }
    }

    fn number(&mut self) -> Result<usize> {
        match self.peek() {
            Some(Tok::Word(w)) => match w.parse() {
                Ok(n) => {
                    self.pos += 1;
                    Ok(n)
                }
                Err(_) => self.error("expected a number"),
            },
            _ => self.error("expected a number"),
        }
    }

    fn list<T>(&mut self, close: &str, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn ident_list(&mut self, close: &str) -> Result<Vec<String>> {
        self.list(close, Self::ident)
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            return self.error("unexpected trailing input");
        }
        Ok(())
    }

    // Relation literals: `{(a,b),(c,d)}`; a bare element is a 1-tuple.
    fn relation(&mut self) -> Result<RelationLit> {
        self.expect_sym("{")?;
        let tuples = self.list("}", |p| {
            if p.eat_sym("(") {
                p.list(")", Self::word)
            } else {
                Ok(vec![p.word()?])
            }
        })?;
        if let Some(first) = tuples.first() {
            if tuples.iter().any(|t| t.len() != first.len()) {
                return self.error("tuples of different lengths");
            }
        }
        Ok(ConstRelation::new(tuples))
    }

    fn quoted_relation(&mut self) -> Result<RelationLit> {
        self.expect_sym("'")?;
        let r = self.relation()?;
        self.expect_sym("'")?;
        Ok(r)
    }

    fn operand(&mut self) -> Result<Operand> {
        if self.at_sym("'") {
            Ok(Operand::Const(self.quoted_relation()?))
        } else {
            Ok(Operand::Var(self.ident()?))
        }
    }

    fn selection(&mut self) -> Result<(Operand, Operand)> {
        self.expect_sym("[")?;
        let lhs = self.operand()?;
        self.expect_sym("==")?;
        let rhs = self.operand()?;
        self.expect_sym("]")?;
        Ok((lhs, rhs))
    }

    fn keep(&mut self) -> Result<BTreeSet<String>> {
        self.expect_sym("{")?;
        Ok(self.ident_list("}")?.into_iter().collect())
    }

    fn binder<T>(&mut self, body: impl FnOnce(&mut Self) -> Result<T>) -> Result<(String, T)> {
        let var = self.ident()?;
        self.expect_sym(".")?;
        self.bound.push(var.clone());
        let b = body(self);
        self.bound.pop();
        Ok((var, b?))
    }

    fn is_bound(&self, name: &str) -> bool {
        self.bound.iter().any(|b| b == name)
    }

    // ---- flat ----

    fn flat(&mut self) -> Result<FlatExpr> {
        let mut e = self.flat_conj()?;
        while self.eat_sym("|") {
            e = FlatExpr::union(e, self.flat_conj()?);
        }
        Ok(e)
    }

    fn flat_conj(&mut self) -> Result<FlatExpr> {
        let mut e = self.flat_unary()?;
        loop {
            if self.eat_sym("&") {
                e = FlatExpr::intersection(e, self.flat_unary()?);
            } else if self.eat_sym("/") {
                e = FlatExpr::difference(e, self.flat_unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn flat_unary(&mut self) -> Result<FlatExpr> {
        if self.eat_sym("-") {
            return Ok(FlatExpr::complement(self.flat_unary()?));
        }
        if self.eat_word("pi") {
            let keep = self.keep()?;
            return Ok(FlatExpr::Project { keep, inner: Box::new(self.flat_unary()?) });
        }
        if self.eat_word("sel") {
            let (lhs, rhs) = self.selection()?;
            return Ok(FlatExpr::select(lhs, rhs, self.flat_unary()?));
        }
        self.flat_primary()
    }

    fn flat_primary(&mut self) -> Result<FlatExpr> {
        if self.eat_word("bot") {
            return Ok(FlatExpr::Bottom);
        }
        if self.eat_word("mu") {
            let (var, body) = self.binder(Self::flat)?;
            return Ok(FlatExpr::lfp(&var, body));
        }
        if self.eat_sym("(") {
            let e = self.flat()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        let name = self.ident()?;
        if self.eat_sym("(") {
            return Ok(FlatExpr::Atom { module: name, args: self.ident_list(")")? });
        }
        if !self.is_bound(&name) {
            if let Some(e) = self.flat_defs.get(&name) {
                return Ok(e.clone());
            }
        }
        Ok(FlatExpr::Var(name))
    }

    // ---- processes ----

    fn proc(&mut self) -> Result<ProcExpr> {
        let mut e = self.proc_seq()?;
        while self.eat_sym("|") {
            e = ProcExpr::union(e, self.proc_seq()?);
        }
        Ok(e)
    }

    fn proc_seq(&mut self) -> Result<ProcExpr> {
        let mut e = self.proc_unary()?;
        loop {
            if self.at_composition() {
                self.pos += 1;
                e = ProcExpr::compose(e, self.proc_unary()?);
            } else if self.eat_sym("&") {
                e = ProcExpr::intersection(e, self.proc_unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn at_composition(&self) -> bool {
        self.at_sym(";")
            && match self.peek_at(1) {
                None => false,
                Some(Tok::Word(w)) => !DECL_KEYWORDS.contains(&w.as_str()),
                Some(_) => true,
            }
    }

    fn proc_unary(&mut self) -> Result<ProcExpr> {
        if self.eat_sym("-") {
            return Ok(ProcExpr::complement(self.proc_unary()?));
        }
        for (kw, build) in [
            ("dn", ProcExpr::down as fn(ProcExpr) -> ProcExpr),
            ("up", ProcExpr::up),
            ("neg", ProcExpr::neg),
            ("rev", ProcExpr::reverse),
        ] {
            if self.eat_word(kw) {
                return Ok(build(self.proc_unary()?));
            }
        }
        if self.eat_word("pi") {
            let keep = self.keep()?;
            return Ok(ProcExpr::Project { keep, inner: Box::new(self.proc_unary()?) });
        }
        if self.eat_word("sel") {
            let (lhs, rhs) = self.selection()?;
            return Ok(ProcExpr::select(lhs, rhs, self.proc_unary()?));
        }
        let mut e = self.proc_primary()?;
        loop {
            if self.eat_sym("*") {
                e = ProcExpr::kleene_star(e);
            } else if self.eat_sym("^") {
                self.expect_sym("{")?;
                let min = self.number()?;
                self.expect_sym(",")?;
                let max = self.number()?;
                self.expect_sym("}")?;
                if min > max {
                    return self.error("counting bounds out of order");
                }
                e = ProcExpr::count(e, min, max);
            } else if self.at_sym("=") && self.peek_at(1) == Some(&Tok::Sym("?")) {
                self.pos += 2;
                e = ProcExpr::TestEq(Box::new(e));
            } else if self.at_sym("!=") && self.peek_at(1) == Some(&Tok::Sym("?")) {
                self.pos += 2;
                e = ProcExpr::TestNeq(Box::new(e));
            } else {
                return Ok(e);
            }
        }
    }

    fn proc_primary(&mut self) -> Result<ProcExpr> {
        if self.eat_word("bot") {
            return Ok(ProcExpr::Bottom);
        }
        if self.eat_word("diag") {
            return Ok(ProcExpr::Diag);
        }
        if self.eat_word("mu") {
            let (var, body) = self.binder(Self::proc)?;
            return Ok(ProcExpr::lfp(&var, body));
        }
        if self.eat_word("test") {
            self.expect_sym("[")?;
            let var = self.ident()?;
            let positive = if self.eat_sym("==") {
                true
            } else if self.eat_sym("!=") {
                false
            } else {
                return self.error("expected `==` or `!=`");
            };
            let value = self.quoted_relation()?;
            self.expect_sym("]")?;
            return Ok(ProcExpr::ConstTest { var, value, positive });
        }
        if self.eat_sym("{") {
            let phi = self.state()?;
            self.expect_sym("}")?;
            self.expect_sym("?")?;
            return Ok(ProcExpr::state_test(phi));
        }
        if self.eat_sym("(") {
            let e = self.proc()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        let name = self.ident()?;
        if self.eat_sym("(") {
            return self.proc_atom(name);
        }
        if !self.is_bound(&name) {
            if let Some(e) = self.dyn_defs.get(&name) {
                return Ok(e.clone());
            }
        }
        Ok(ProcExpr::Var(name))
    }

    /// After `M(`: either `M(X,Y)?` or an action whose arguments carry
    /// `in`/`out`. A direction keyword applies until the next one, and
    /// `;` separates groups like `,` does.
    fn proc_atom(&mut self, module: String) -> Result<ProcExpr> {
        let mut args = Vec::new();
        let mut dir: Option<Dir> = None;
        let mut directed = false;
        if !self.eat_sym(")") {
            loop {
                if self.eat_word("in") {
                    dir = Some(Dir::In);
                    directed = true;
                } else if self.eat_word("out") {
                    dir = Some(Dir::Out);
                    directed = true;
                }
                let arg = self.ident()?;
                if directed != dir.is_some() {
                    return self.error("every argument of an action needs a direction");
                }
                args.push((arg, dir));
                if self.eat_sym(")") {
                    break;
                }
                if !self.eat_sym(",") && !self.eat_sym(";") {
                    return self.error("expected `,`, `;` or `)`");
                }
            }
        }
        if directed {
            if args.iter().any(|(_, d)| d.is_none()) {
                return self.error("every argument of an action needs a direction");
            }
            return Ok(ProcExpr::action(&module, args.into_iter().map(|(a, d)| (a, d.expect("checked")))));
        }
        if !self.eat_sym("?") {
            return self.error(format!("`{module}(..)` needs `?` for a test or `in`/`out` for an action"));
        }
        Ok(ProcExpr::test(&module, args.into_iter().map(|(a, _)| a)))
    }

    // ---- state formulas ----

    fn state(&mut self) -> Result<StateExpr> {
        let mut e = self.state_conj()?;
        while self.eat_sym("|") {
            e = StateExpr::or(e, self.state_conj()?);
        }
        Ok(e)
    }

    fn state_conj(&mut self) -> Result<StateExpr> {
        let mut e = self.state_unary()?;
        while self.eat_sym("&") {
            e = StateExpr::and(e, self.state_unary()?);
        }
        Ok(e)
    }

    fn state_unary(&mut self) -> Result<StateExpr> {
        if self.eat_sym("!") {
            return Ok(StateExpr::not(self.state_unary()?));
        }
        if self.eat_sym("<") {
            let a = self.proc()?;
            self.expect_sym(">")?;
            return Ok(StateExpr::diamond(a, self.state_unary()?));
        }
        if self.eat_sym("[") {
            let a = self.proc()?;
            self.expect_sym("]")?;
            return Ok(StateExpr::necessity(a, self.state_unary()?));
        }
        self.state_primary()
    }

    fn state_primary(&mut self) -> Result<StateExpr> {
        if self.eat_word("true") {
            return Ok(StateExpr::top());
        }
        if self.eat_word("prop") {
            let module = self.ident()?;
            self.expect_sym("(")?;
            return Ok(StateExpr::Prop { module, args: self.ident_list(")")? });
        }
        if self.eat_word("mu") {
            let (var, body) = self.binder(Self::state)?;
            return Ok(StateExpr::lfp(&var, body));
        }
        if self.eat_sym("(") {
            let e = self.state()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        let name = self.ident()?;
        if !self.is_bound(&name) {
            if let Some(e) = self.state_defs.get(&name) {
                return Ok(e.clone());
            }
        }
        Ok(StateExpr::SetVar(name))
    }

    // ---- files ----

    fn params(&mut self) -> Result<Vec<(String, usize)>> {
        self.expect_sym("(")?;
        self.list(")", |p| {
            let name = p.ident()?;
            p.expect_sym("/")?;
            Ok((name, p.number()?))
        })
    }

    fn binding_map(&mut self) -> Result<BTreeMap<String, RelationLit>> {
        self.expect_sym("{")?;
        let pairs = self.list("}", |p| {
            let name = p.ident()?;
            p.expect_sym(":")?;
            Ok((name, p.relation()?))
        })?;
        let mut out = BTreeMap::new();
        for (k, v) in pairs {
            if out.insert(k.clone(), v).is_some() {
                return Err(Error::DuplicateName(k));
            }
        }
        Ok(out)
    }

    fn decl(&mut self, file: &FileState) -> Result<Decl> {
        let kw = self.word()?;
        let d = match kw.as_str() {
            "domain" => {
                self.expect_sym("{")?;
                Decl::Domain(self.list("}", Self::word)?)
            }
            "vocab" => {
                self.expect_sym("{")?;
                Decl::Vocab(self.list("}", |p| {
                    let name = p.ident()?;
                    p.expect_sym("/")?;
                    Ok((name, p.number()?))
                })?)
            }
            "map" => {
                let var = self.ident()?;
                self.expect_sym("->")?;
                Decl::Map(var, self.ident()?)
            }
            "module" => {
                let name = self.ident()?;
                let params = self.params()?;
                self.expect_sym("=")?;
                let body = if self.eat_word("builtin") {
                    ModuleBody::Builtin(self.word()?)
                } else {
                    self.expect_word("structures")?;
                    self.expect_sym("{")?;
                    ModuleBody::Structures(self.list("}", Self::binding_map)?)
                };
                Decl::Module { name, params, body }
            }
            "structure" => {
                let name = self.ident()?;
                self.expect_sym("=")?;
                Decl::Structure(name, self.binding_map()?)
            }
            "flat" | "dyn" | "state" => {
                let name = self.ident()?;
                self.expect_sym("=")?;
                let start = self.pos;
                let d = match kw.as_str() {
                    "flat" => Decl::Flat(name, self.flat()?),
                    "dyn" => Decl::Dyn(name, self.proc()?),
                    _ => Decl::State(name, self.state()?),
                };
                let mut used = BTreeSet::new();
                match &d {
                    Decl::Flat(_, e) => e.subexpressions().into_iter().for_each(|s| {
                        if let FlatExpr::Atom { module, .. } = s {
                            used.insert(module.clone());
                        }
                    }),
                    Decl::Dyn(_, e) => proc_modules(e, &mut used),
                    Decl::State(_, e) => used = e.modules(),
                    _ => unreachable!(),
                }
                if let Some(m) = used.iter().find(|m| !file.modules.contains(*m)) {
                    self.pos = start;
                    return self.error(format!("module `{m}` used before it is declared"));
                }
                d
            }
            other => {
                self.pos -= 1;
                return self.error(format!("unknown declaration `{other}`"));
            }
        };
        self.expect_sym(";")?;
        Ok(d)
    }
}

#[derive(Default)]
struct FileState {
    modules: BTreeSet<String>,
    names: BTreeSet<String>,
    has_domain: bool,
    has_vocab: bool,
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let mut p = Parser::new(text)?;
    let mut file = FileState::default();
    let mut decls = Vec::new();
    while p.pos < p.toks.len() {
        let start = p.pos;
        let d = p.decl(&file)?;
        let here = p.toks[start].clone();
        let fail = |message: String| Err(Error::Syntax { line: here.line, column: here.column, message });
        match &d {
            Decl::Domain(_) if file.has_domain => return fail("second domain declaration".into()),
            Decl::Vocab(_) if file.has_vocab => return fail("second vocab declaration".into()),
            Decl::Domain(_) => file.has_domain = true,
            Decl::Vocab(_) => file.has_vocab = true,
            _ if !(file.has_domain && file.has_vocab) => {
                return fail("domain and vocab must be declared first".into());
            }
            _ => {}
        }
        let named = match &d {
            Decl::Module { name, .. } => {
                file.modules.insert(name.clone());
                Some(name)
            }
            Decl::Structure(name, _) => Some(name),
            Decl::Flat(name, e) => {
                p.flat_defs.insert(name.clone(), e.clone());
                Some(name)
            }
            Decl::Dyn(name, e) => {
                p.dyn_defs.insert(name.clone(), e.clone());
                Some(name)
            }
            Decl::State(name, e) => {
                p.state_defs.insert(name.clone(), e.clone());
                Some(name)
            }
            _ => None,
        };
        if let Some(name) = named {
            if !file.names.insert(name.clone()) {
                return fail(format!("`{name}` is declared twice"));
            }
        }
        decls.push(d);
    }
    Ok(SpecFile { decls })
}

fn parse_with<T>(text: &str, spec: Option<&SpecFile>, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(text)?;
    if let Some(spec) = spec {
        for d in &spec.decls {
            match d {
                Decl::Flat(n, e) => {
                    p.flat_defs.insert(n.clone(), e.clone());
                }
                Decl::Dyn(n, e) => {
                    p.dyn_defs.insert(n.clone(), e.clone());
                }
                Decl::State(n, e) => {
                    p.state_defs.insert(n.clone(), e.clone());
                }
                _ => {}
            }
        }
    }
    let e = f(&mut p)?;
    p.done()?;
    Ok(e)
}

pub fn parse_flat(text: &str) -> Result<FlatExpr> {
    parse_with(text, None, Parser::flat)
}

pub fn parse_proc(text: &str) -> Result<ProcExpr> {
    parse_with(text, None, Parser::proc)
}

pub fn parse_state(text: &str) -> Result<StateExpr> {
    parse_with(text, None, Parser::state)
}

/// Like [`parse_flat`], with the file's definitions available by name.
pub fn parse_flat_in(text: &str, spec: &SpecFile) -> Result<FlatExpr> {
    parse_with(text, Some(spec), Parser::flat)
}

pub fn parse_proc_in(text: &str, spec: &SpecFile) -> Result<ProcExpr> {
    parse_with(text, Some(spec), Parser::proc)
}

pub fn parse_state_in(text: &str, spec: &SpecFile) -> Result<StateExpr> {
    parse_with(text, Some(spec), Parser::state)
}

/// A relation literal, with or without surrounding quotes.
pub fn parse_relation(text: &str) -> Result<RelationLit> {
    parse_with(text, None, |p| if p.at_sym("'") { p.quoted_relation() } else { p.relation() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(parse_flat("bot").unwrap(), FlatExpr::Bottom);
        let hc = parse_flat("pi{V,X,Z,T} (HC(V,X,Y) & TwoCol(V,Y,Z,T))").unwrap();
        assert_eq!(
            hc,
            FlatExpr::project(
                ["V", "X", "Z", "T"],
                FlatExpr::intersection(
                    FlatExpr::atom("HC", ["V", "X", "Y"]),
                    FlatExpr::atom("TwoCol", ["V", "Y", "Z", "T"])
                )
            )
        );
        let star = parse_proc("mu Z . (diag | Z ; A(out P))").unwrap();
        assert_eq!(star, ProcExpr::kleene_star(ProcExpr::action("A", [("P", Dir::Out)])));
        assert_eq!(parse_proc("A(out P)*").unwrap(), star);
    }

    #[test]
    fn precedence() {
        let e = parse_proc("a ; b | c & d").unwrap();
        let (a, b, c, d) = (ProcExpr::var("a"), ProcExpr::var("b"), ProcExpr::var("c"), ProcExpr::var("d"));
        assert_eq!(e, ProcExpr::union(ProcExpr::compose(a.clone(), b), ProcExpr::intersection(c, d)));
        assert_eq!(parse_proc("dn a*").unwrap(), ProcExpr::down(ProcExpr::kleene_star(a.clone())));
        assert_eq!(parse_flat("-a | b").unwrap(), FlatExpr::union(FlatExpr::complement(FlatExpr::var("a")), FlatExpr::var("b")));
        let phi = parse_state("<M(in X; out Y)> !prop P(X) & true").unwrap();
        assert_eq!(
            phi,
            StateExpr::and(
                StateExpr::diamond(
                    ProcExpr::action("M", [("X", Dir::In), ("Y", Dir::Out)]),
                    StateExpr::not(StateExpr::prop("P", ["X"]))
                ),
                StateExpr::top()
            )
        );
    }

    #[test]
    fn action_groups() {
        let a = parse_proc("M(in X, Y; out Z)").unwrap();
        assert_eq!(a, ProcExpr::action("M", [("X", Dir::In), ("Y", Dir::In), ("Z", Dir::Out)]));
        assert!(matches!(parse_proc("M(X, out Y)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_proc("M(X)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_flat("pi{X}\n  (M(X) | )") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("{other:?}"),
        }
        assert!(parse_flat("bot bot").is_err());
    }

    #[test]
    fn spec_file() {
        let text = "
            domain {a, b};
            vocab {P/1, Q/1};
            map X -> P;
            module Full(X/1) = builtin full;
            module Tab(X/1, Y/1) = structures { {X:{(a)}}, {X:{a}, Y:{(b)}} };
            structure A = {P:{(a)}};
            dyn SetP = Full(out X);
            state Goal = <SetP> prop Full(X);
        ";
        let spec = parse_spec(text).unwrap();
        let val = spec.valuation().unwrap();
        assert_eq!(val.modules().len(), 2);
        assert_eq!(spec.state("Goal").unwrap(), &StateExpr::diamond(
            ProcExpr::action("Full", [("X", Dir::Out)]),
            StateExpr::prop("Full", ["X"])
        ));
        let a = spec.structure("A").unwrap();
        assert_eq!(a.relation("P").unwrap().len(), 1);
        assert!(parse_spec("domain {a}; vocab {P/1}; flat E = M(P);").is_err());
        assert!(parse_spec("vocab {P/1}; module M(X/1) = builtin full;").is_err());
        assert!(parse_spec("domain {a}; domain {b};").is_err());
    }

    #[test]
    fn definitions_are_inlined_unless_bound() {
        let spec = parse_spec("domain {a}; vocab {P/1}; module F(X/1) = builtin full; dyn S = F(out P);").unwrap();
        let e = parse_proc_in("S ; (mu S . S)", &spec).unwrap();
        let s = ProcExpr::action("F", [("P", Dir::Out)]);
        assert_eq!(e, ProcExpr::compose(s, ProcExpr::lfp("S", ProcExpr::var("S"))));
    }
}
