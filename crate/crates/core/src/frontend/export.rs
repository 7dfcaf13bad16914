//! DOT and JSON renderings of transition systems, and a plain-text
//! statistics report.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dynamic::TransitionSystem;
use crate::error::Result;
use crate::eval::EvalStats;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT digraph: one node per universe index, one edge per pair and label.
pub fn dot_string(ts: &TransitionSystem) -> String {
    let u = &ts.universe;
    let mut out = String::from("digraph ts {\n");
    for i in 0..u.size() {
        let label = u.sig().describe(u.bits_at(i));
        writeln!(out, "  {i} [label=\"{}\"];", escape(&label)).expect("write to string");
    }
    for (label, edges) in &ts.edges {
        for (i, j) in edges.iter() {
            writeln!(out, "  {i} -> {j} [label=\"{}\"];", escape(label)).expect("write to string");
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(ts: &TransitionSystem, path: &Path) -> Result<()> {
    std::fs::write(path, dot_string(ts))?;
    Ok(())
}

#[derive(Serialize)]
struct SymbolJson<'a> {
    name: &'a str,
    arity: usize,
}

#[derive(Serialize)]
struct TsJson<'a> {
    domain: &'a [String],
    vocab: Vec<SymbolJson<'a>>,
    /// Per structure, per symbol: tuples of element names.
    structures: Vec<std::collections::BTreeMap<&'a str, Vec<Vec<&'a str>>>>,
    edges: std::collections::BTreeMap<&'a str, Vec<[usize; 2]>>,
}

pub fn json_string(ts: &TransitionSystem) -> Result<String> {
    let u = &ts.universe;
    let sig = u.sig();
    let domain = sig.domain();
    let structures = (0..u.size())
        .map(|i| {
            let bits = u.bits_at(i);
            (0..sig.vocab().len())
                .map(|s| {
                    let rel = sig.relation(bits, s);
                    let names = rel.tuples().map(|t| t.iter().map(|&e| domain.name(e)).collect()).collect();
                    (sig.vocab().name(s), names)
                })
                .collect()
        })
        .collect();
    let doc = TsJson {
        domain: domain.elements(),
        vocab: sig.vocab().symbols().iter().map(|(n, a)| SymbolJson { name: n, arity: *a }).collect(),
        structures,
        edges: ts
            .edges
            .iter()
            .map(|(l, e)| (l.as_str(), e.iter().map(|(i, j)| [i, j]).collect()))
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc).map_err(|e| crate::error::Error::Io(e.to_string()))? + "\n")
}

pub fn export_json(ts: &TransitionSystem, path: &Path) -> Result<()> {
    std::fs::write(path, json_string(ts)?)?;
    Ok(())
}

pub fn format_stats(stats: &EvalStats) -> String {
    let mut out = format!("universe size: {}\n", stats.universe_size);
    for (label, n) in &stats.edge_counts {
        writeln!(out, "edges {n}: {label}").expect("write to string");
    }
    for (label, n) in &stats.iteration_counts {
        writeln!(out, "iterations {n}: {label}").expect("write to string");
    }
    writeln!(out, "wall time: {:.3} ms", stats.wall_time.as_secs_f64() * 1e3).expect("write to string");
    out
}
