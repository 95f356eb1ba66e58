//! Shared helpers for integration tests: slow reference implementations that
//! mirror definitions literally, used to cross-check the production
//! algorithms.

#![allow(dead_code)]

use claro::identification::{SearchConfig, SearchCtx, TargetEdge};
use claro::robustness::{self, Assumption, AssumptionSet, Query};
use claro::{CausalGraph, Edge, EdgeKind, Result, VarId, VarSet};

/// Rebuild a graph from per-pair edge masks (bit `j*(j-1)/2 + i` covers the
/// ordered pair `i < j`), mirroring the catalogue layout.
pub fn graph_from_masks(names: &[&str], directed: u64, bidirected: u64) -> Result<CausalGraph> {
    let n = names.len();
    let mut g = CausalGraph::build(names, &[], &[])?;
    for j in 0..n {
        for i in 0..j {
            let bit = 1u64 << (j * (j - 1) / 2 + i);
            if directed & bit != 0 {
                g = g.with_edge(Edge::directed(VarId(i), VarId(j)))?;
            }
            if bidirected & bit != 0 {
                g = g.with_edge(Edge::bidirected(VarId(i), VarId(j)))?;
            }
        }
    }
    Ok(g)
}

/// All edges joining `u` and `v`, regardless of orientation. A pair can be
/// joined by both a directed and a bidirected edge; paths treat them as
/// distinct steps.
fn joining_edges(g: &CausalGraph, u: VarId, v: VarId) -> Vec<Edge> {
    let (lo, hi) = if u.0 < v.0 { (u, v) } else { (v, u) };
    let mut out = Vec::new();
    if g.has_directed(lo, hi) {
        out.push(Edge::directed(lo, hi));
    }
    if g.has_bidirected(lo, hi) {
        out.push(Edge::bidirected(lo, hi));
    }
    out
}

/// Whether edge `e` carries an arrowhead at `v`.
fn head_at(e: Edge, v: VarId) -> bool {
    match e.kind {
        EdgeKind::Directed => e.b == v,
        EdgeKind::Bidirected => true,
    }
}

/// Reference separation check by explicit path enumeration: depth-first
/// search over node-simple paths, pruning a prefix as soon as its newest
/// junction is blocked. A junction at `v` between consecutive edges is a
/// collider when both carry arrowheads at `v`; colliders pass only when a
/// descendant of `v` is conditioned on, non-colliders only when `v` itself
/// is not.
pub fn naive_d_separated(g: &CausalGraph, a: VarId, b: VarId, z: VarSet) -> Result<bool> {
    fn active_extension(g: &CausalGraph, v: VarId, arrival: Edge, depart: Edge, z: VarSet) -> bool {
        let collider = head_at(arrival, v) && head_at(depart, v);
        if collider {
            g.descendants(v).map(|d| d.intersects(z)).unwrap_or(false)
        } else {
            !z.contains(v)
        }
    }

    fn search(
        g: &CausalGraph,
        at: VarId,
        arrival: Option<Edge>,
        b: VarId,
        z: VarSet,
        on_path: VarSet,
    ) -> bool {
        for next in g.vars() {
            if on_path.contains(next) {
                continue;
            }
            for e in joining_edges(g, at, next) {
                if let Some(prev) = arrival {
                    if !active_extension(g, at, prev, e, z) {
                        continue;
                    }
                }
                if next == b {
                    return true;
                }
                if search(g, next, Some(e), b, z, on_path.with(next)) {
                    return true;
                }
            }
        }
        false
    }

    // Match the production query preconditions.
    let _ = g.d_separated(a, b, z)?;
    Ok(!search(g, a, None, b, z, VarSet::single(a)))
}

/// An assumption is relevant per the literal definition when some assumption
/// set identifies the claim and stops identifying it once the assumption is
/// dropped. Brute-forces every subset of the universe.
pub fn literally_relevant(g: &CausalGraph, query: &Query, assumption: &Assumption) -> Result<bool> {
    let universe = robustness::assumption_universe(g);
    let pos = universe
        .iter()
        .position(|a| a == assumption)
        .expect("assumption must belong to the universe");
    let u = universe.len();
    let identified = |mask: u64| -> Result<bool> {
        let members = (0..u).filter(|&i| mask >> i & 1 == 1).map(|i| universe[i]).collect();
        let set = AssumptionSet::from_members(g, members)?;
        robustness::identified_in(&set, query, &SearchCtx::default())
    };
    for mask in 0..1u64 << u {
        if mask >> pos & 1 == 0 {
            continue;
        }
        if identified(mask)? && !identified(mask & !(1 << pos))? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fresh search context with the default budget.
pub fn ctx() -> SearchCtx {
    SearchCtx::new(SearchConfig::default())
}

/// The three-variable chain model used across the test suite.
pub fn chain() -> CausalGraph {
    CausalGraph::build(&["x", "y", "z"], &[("x", "y"), ("y", "z")], &[]).unwrap()
}

pub fn edge_query(tail: usize, head: usize) -> Query {
    Query::Edge(TargetEdge { tail: VarId(tail), head: VarId(head) })
}

pub fn te_query(cause: usize, outcome: usize) -> Query {
    Query::TotalEffect { cause: VarId(cause), outcome: VarId(outcome) }
}

/// Mixed absolute/relative closeness: `|a-b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
