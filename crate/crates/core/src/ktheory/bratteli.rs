use std::fmt::Write;

use super::maps::iota;
use crate::cantor::IntFunction;
use crate::error::{Error, Result};
use crate::rokhlin::TowerDecomposition;

/// One edge of the diagram. `multiplicities` lists the distinct visit counts
/// over the lower base; it has one entry when the count is constant there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BratteliEdge {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub multiplicities: Vec<i64>,
}

/// Edges between consecutive stages: how often the base orbit of each tower
/// of stage `n+1` passes through each tower of stage `n`.
pub fn bratteli_edges(decomps: &[TowerDecomposition]) -> Result<Vec<BratteliEdge>> {
    let mut edges = Vec::new();
    for n in 0..decomps.len().saturating_sub(1) {
        let (lo, hi) = (&decomps[n], &decomps[n + 1]);
        if !lo.inner_slice().same(hi.outer_slice())? {
            return Err(Error::Invalid(format!(
                "stages {n} and {} are not consecutive",
                n + 1
            )));
        }
        for (j, t) in lo.towers().iter().enumerate() {
            let counts = iota(hi, &IntFunction::indicator(hi.outer_slice(), t.base())?)?;
            for (i, u) in hi.towers().iter().enumerate() {
                let mut vals: Vec<i64> = Vec::new();
                for (v, set) in counts.restrict(u.base())?.level_sets()? {
                    if !set.is_empty() && !vals.contains(&v) {
                        vals.push(v);
                    }
                }
                if vals.is_empty() {
                    // the restriction has no nonzero level sets
                    vals.push(0);
                }
                vals.sort_unstable();
                if vals != [0] {
                    edges.push(BratteliEdge {
                        from: (n, j),
                        to: (n + 1, i),
                        multiplicities: vals,
                    });
                }
            }
        }
    }
    Ok(edges)
}

/// Graphviz source for the diagram.
pub fn bratteli_dot(decomps: &[TowerDecomposition]) -> Result<String> {
    if decomps.is_empty() {
        return Err(Error::Invalid(
            "a Bratteli diagram needs at least one stage".into(),
        ));
    }
    let edges = bratteli_edges(decomps)?;
    let mut out = String::from("digraph bratteli {\n  rankdir=TB;\n  node [shape=circle];\n");
    for (n, td) in decomps.iter().enumerate() {
        let _ = writeln!(out, "  subgraph stage{n} {{\n    rank=same;");
        for (j, t) in td.towers().iter().enumerate() {
            let _ = writeln!(out, "    s{n}t{j} [label=\"{}\"];", t.height + 1);
        }
        out.push_str("  }\n");
    }
    for e in &edges {
        let label: Vec<String> = e.multiplicities.iter().map(|m| m.to_string()).collect();
        let style = if e.multiplicities.len() > 1 {
            ", style=dashed"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  s{}t{} -> s{}t{} [label=\"{}\"{style}];",
            e.from.0,
            e.from.1,
            e.to.0,
            e.to.1,
            label.join("|")
        );
    }
    out.push_str("}\n");
    Ok(out)
}
