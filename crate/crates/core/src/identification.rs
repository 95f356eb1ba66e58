//! Instrument-based identification of a single path coefficient, and the
//! supergraph lattice searches built on it.
//!
//! A pair `(w, given)` identifies the coefficient on `tail -> head` when,
//! writing `g_c` for the graph with that edge removed:
//!
//! 1. every conditioning variable is a nondescendant of `head`,
//! 2. `given` d-separates `w` from `head` in `g_c`, and
//! 3. `w` is the tail itself, or d-connected to it given `given` in `g_c`.
//!
//! The robustness of such a pair is probed by *filling*: adding edges while
//! the conditions survive. Under a fixed conditioning set, separation can
//! only be destroyed by new edges and connection only created, so conditions
//! 1 and 2 are antitone along the supergraph lattice while condition 3 is
//! monotone. The ascent in [`maximally_filled`] therefore explores exactly
//! the states satisfying conditions 1 and 2; maximality of a pair then
//! demands some filled graph none of whose strict supergraphs admits *any*
//! valid pair for the target. That last quantifier ranges over whole pairs,
//! and because condition 3 is monotone a pair absent in one graph can appear
//! in a supergraph; single-edge checks alone would be unsound, so the scan is
//! exhaustive over the (small) residual lattice, guarded by a node budget.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::estimand::Estimand;
use crate::exec;
use crate::graph::{CausalGraph, VarId, VarSet};

/// Default cap on lattice nodes visited per analysis.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// The directed edge whose coefficient is under analysis.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TargetEdge {
    pub tail: VarId,
    pub head: VarId,
}

/// An instrument `w` with a conditioning set, for a specific target edge.
/// Well-formedness (no overlap among target, instrument, and conditioning
/// set) is enforced at construction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IvPair {
    pub target: TargetEdge,
    pub instrument: VarId,
    pub given: VarSet,
}

impl IvPair {
    pub fn new(target: TargetEdge, instrument: VarId, given: VarSet) -> Result<Self> {
        if instrument == target.head {
            return Err(Error::InvalidIvPair("instrument equals the target head".into()));
        }
        if given.contains(target.tail) || given.contains(target.head) || given.contains(instrument)
        {
            return Err(Error::InvalidIvPair(
                "conditioning set overlaps the target or instrument".into(),
            ));
        }
        Ok(IvPair { target, instrument, given })
    }

    /// The estimand this pair induces for the target coefficient.
    pub fn estimand(&self) -> Estimand {
        Estimand::iv_ratio(self.target.tail, self.target.head, self.instrument, self.given)
    }

    /// Search-order key: fewer conditioning variables first, then instrument
    /// index, then conditioning set.
    pub(crate) fn order_key(&self) -> (usize, VarId, VarSet) {
        (self.given.len(), self.instrument, self.given)
    }
}

/// Tuning for lattice searches.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Lattice nodes (graphs visited) allowed per analysis.
    pub budget: u64,
    /// Optional cap on conditioning-set size in pair enumeration.
    pub max_z: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: DEFAULT_BUDGET, max_z: None }
    }
}

/// Shared search state: configuration plus the budget counter. One context
/// should span one user-level analysis so the budget covers all of it.
#[derive(Debug)]
pub struct SearchCtx {
    cfg: SearchConfig,
    used: AtomicU64,
}

impl SearchCtx {
    pub fn new(cfg: SearchConfig) -> Self {
        SearchCtx { cfg, used: AtomicU64::new(0) }
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    /// Lattice nodes visited so far.
    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    /// Budget still available; saturates at zero once exceeded.
    pub(crate) fn remaining_budget(&self) -> u64 {
        self.cfg.budget.saturating_sub(self.used())
    }

    pub(crate) fn charge(&self) -> Result<()> {
        let prev = self.used.fetch_add(1, Ordering::Relaxed);
        if prev >= self.cfg.budget {
            Err(Error::BudgetExceeded(self.cfg.budget))
        } else {
            Ok(())
        }
    }
}

impl Default for SearchCtx {
    fn default() -> Self {
        SearchCtx::new(SearchConfig::default())
    }
}

fn validate_target(g: &CausalGraph, target: &TargetEdge) -> Result<()> {
    if !g.has_directed(target.tail, target.head) {
        return Err(Error::InvalidQuery(format!(
            "no directed edge {} in the model",
            g.edge_label(crate::graph::Edge::directed(target.tail, target.head))
        )));
    }
    Ok(())
}

/// Decides the three instrument conditions for `pair` in `g`.
pub fn is_iv_pair(g: &CausalGraph, pair: &IvPair) -> Result<bool> {
    validate_target(g, &pair.target)?;
    if pair.instrument.0 >= g.var_count() {
        return Err(Error::UnknownVariable(pair.instrument.0));
    }
    let TargetEdge { tail, head } = pair.target;
    // Condition 1. Descendants of the head are the same with or without the
    // target edge, which leaves the head itself.
    if g.descendants(head)?.intersects(pair.given) {
        return Ok(false);
    }
    let cut = g.without_directed(tail, head)?;
    // Condition 2.
    if !cut.d_separated(pair.instrument, head, pair.given)? {
        return Ok(false);
    }
    // Condition 3.
    Ok(pair.instrument == tail || cut.d_connected_given(pair.instrument, tail, pair.given)?)
}

/// All subsets of `candidates` (as sets), in binary-counter order; the cap
/// `max_len` prunes larger subsets.
fn subsets(candidates: &[VarId], max_len: Option<usize>) -> Vec<VarSet> {
    let k = candidates.len();
    let mut out = Vec::with_capacity(1 << k);
    for bits in 0u32..1 << k {
        if let Some(cap) = max_len {
            if bits.count_ones() as usize > cap {
                continue;
            }
        }
        out.push(
            (0..k).filter(|&i| bits >> i & 1 == 1).map(|i| candidates[i]).collect::<VarSet>(),
        );
    }
    out
}

fn candidate_pairs(g: &CausalGraph, target: &TargetEdge, max_z: Option<usize>) -> Vec<IvPair> {
    let mut out = Vec::new();
    for w in g.vars().filter(|&w| w != target.head) {
        let cands: Vec<VarId> = g
            .vars()
            .filter(|&v| v != target.tail && v != target.head && v != w)
            .collect();
        for given in subsets(&cands, max_z) {
            out.push(IvPair { target: *target, instrument: w, given });
        }
    }
    out
}

/// Every valid pair for the target, instruments in causal order and
/// conditioning sets in binary-counter order per instrument.
pub fn enumerate_iv_pairs(
    g: &CausalGraph,
    target: &TargetEdge,
    ctx: &SearchCtx,
) -> Result<Vec<IvPair>> {
    validate_target(g, target)?;
    let mut out = Vec::new();
    for pair in candidate_pairs(g, target, ctx.config().max_z) {
        if is_iv_pair(g, &pair)? {
            out.push(pair);
        }
    }
    Ok(out)
}

/// Short-circuiting form of [`enumerate_iv_pairs`] for lattice inner loops.
pub(crate) fn has_any_iv_pair(
    g: &CausalGraph,
    target: &TargetEdge,
    ctx: &SearchCtx,
) -> Result<bool> {
    validate_target(g, target)?;
    for pair in candidate_pairs(g, target, ctx.config().max_z) {
        if is_iv_pair(g, &pair)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The pair a report quotes when several identify the same edge: smallest
/// conditioning set, ties broken by variable order.
pub(crate) fn select_iv_pair(
    g: &CausalGraph,
    target: &TargetEdge,
    ctx: &SearchCtx,
) -> Result<Option<IvPair>> {
    let pairs = enumerate_iv_pairs(g, target, ctx)?;
    Ok(pairs.into_iter().min_by_key(|p| p.order_key()))
}

fn pair_conditions_hold(g: &CausalGraph, pair: &IvPair) -> Result<bool> {
    is_iv_pair(g, pair)
}

/// Edge-maximal supergraphs of `g` in which `pair` still satisfies all three
/// instrument conditions. Requires the pair to hold in `g` itself.
///
/// Conditions 1 and 2 are antitone under edge addition and condition 3, true
/// at the root, is monotone; so the set of satisfying supergraphs is closed
/// downward toward `g` and a depth-first ascent visiting only satisfying
/// states finds every local maximum. Results are sorted by edge masks.
pub fn maximally_filled(
    g: &CausalGraph,
    pair: &IvPair,
    ctx: &SearchCtx,
) -> Result<Vec<CausalGraph>> {
    if !is_iv_pair(g, pair)? {
        return Err(Error::InvalidIvPair(
            "pair does not satisfy the instrument conditions in the base graph".into(),
        ));
    }
    let mut visited: HashSet<(u64, u64)> = HashSet::new();
    let mut maxima: Vec<CausalGraph> = Vec::new();
    let mut stack = vec![g.clone()];
    visited.insert(g.masks());
    while let Some(state) = stack.pop() {
        ctx.charge()?;
        let mut extendable = false;
        for edge in state.missing_edges() {
            let bigger = state.with_edge(edge)?;
            if pair_conditions_hold(&bigger, pair)? {
                extendable = true;
                if visited.insert(bigger.masks()) {
                    stack.push(bigger);
                }
            }
        }
        if !extendable {
            maxima.push(state);
        }
    }
    maxima.sort_by_key(CausalGraph::masks);
    Ok(maxima)
}

/// Whether every strict supergraph of `filled` fails to admit any valid pair
/// for the target.
fn no_supergraph_admits_pair(
    filled: &CausalGraph,
    target: &TargetEdge,
    ctx: &SearchCtx,
) -> Result<bool> {
    let missing = filled.missing_edges();
    for bits in 1u64..1 << missing.len() {
        ctx.charge()?;
        let mut candidate = filled.clone();
        for (i, edge) in missing.iter().enumerate() {
            if bits >> i & 1 == 1 {
                candidate = candidate.with_edge(*edge)?;
            }
        }
        if has_any_iv_pair(&candidate, target, ctx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `pair` is maximal: some maximally filled supergraph for it admits
/// no valid pair (for the same target) in any strict supergraph. Pairs that
/// fail the instrument conditions in `g` are not maximal.
pub fn is_maximal_iv_pair(g: &CausalGraph, pair: &IvPair, ctx: &SearchCtx) -> Result<bool> {
    if !is_iv_pair(g, pair)? {
        return Ok(false);
    }
    for filled in maximally_filled(g, pair, ctx)? {
        if no_supergraph_admits_pair(&filled, &pair.target, ctx)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All maximal pairs for the target, each with its estimand, in enumeration
/// order. Candidates are checked in parallel when the `parallel` feature is
/// on; the output order does not depend on the execution mode.
pub fn maximal_iv_pairs(
    g: &CausalGraph,
    target: &TargetEdge,
    ctx: &SearchCtx,
) -> Result<Vec<(IvPair, Estimand)>> {
    let pairs = enumerate_iv_pairs(g, target, ctx)?;
    let verdicts = exec::map_collect(pairs, |pair| {
        is_maximal_iv_pair(g, &pair, ctx).map(|keep| (pair, keep))
    });
    let mut out = Vec::new();
    for v in verdicts {
        let (pair, keep) = v?;
        if keep {
            let est = pair.estimand();
            out.push((pair, est));
        }
    }
    Ok(out)
}
