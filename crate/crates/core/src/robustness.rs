//! Robustness of a causal claim: minimal sufficient assumption sets, degrees
//! of corroboration and identification, induced constraints, and relevance.
//!
//! Every missing edge of a model is one assumption. A subset of assumptions
//! *identifies* the claim when the claim is identified in the graph that
//! keeps exactly those edges missing and frees all others (the complete
//! order-respecting graph minus the subset). The msas are the identifying
//! subsets none of whose proper subsets identify; they form an antichain and
//! are found by a size-ascending sweep with superset pruning.
//!
//! Identification is *not* monotone along the assumption lattice: an
//! instrument is only usable while the edge linking it to the target's tail
//! is free, so asserting one more absence can destroy an otherwise valid
//! strategy (see `assuming_more_can_lose_identification`). The sweep
//! therefore never skips a layer on the grounds that a superset failed; its
//! only prunes are the unconditionally sound ones (supersets of an already
//! found msa cannot be minimal).
//!
//! From the msas everything else follows: `m` counts them, `k` counts
//! extensionally distinct estimands among them, `df = k - 1` is the number of
//! independent equality constraints the claim imposes on the observed
//! covariance matrix, an assumption is relevant exactly when it sits in some
//! msa, and the relevant submodel keeps the union of the msas.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimand::{self, Estimand};
use crate::exec;
use crate::graph::{CausalGraph, Edge, EdgeKind, VarId, VarSet};
use crate::identification::{
    self, IvPair, SearchConfig, SearchCtx, TargetEdge, DEFAULT_BUDGET,
};
use crate::sem::{self, IdentTarget, Instantiation, DEFAULT_ORACLE_TRIALS};

/// A single modeling assumption: one absent edge.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Assumption {
    /// The directed edge `tail -> head` is absent: its coefficient is zero.
    ZeroCoefficient { tail: VarId, head: VarId },
    /// The bidirected edge `a <-> b` is absent: the error covariance of the
    /// two variables is zero. Stored with the lower index first.
    ZeroErrorCovariance { a: VarId, b: VarId },
}

impl Assumption {
    pub fn from_edge(e: Edge) -> Self {
        match e.kind {
            EdgeKind::Directed => Assumption::ZeroCoefficient { tail: e.a, head: e.b },
            EdgeKind::Bidirected => Assumption::ZeroErrorCovariance { a: e.a, b: e.b },
        }
    }

    /// The edge this assumption removes.
    pub fn edge(&self) -> Edge {
        match *self {
            Assumption::ZeroCoefficient { tail, head } => Edge::directed(tail, head),
            Assumption::ZeroErrorCovariance { a, b } => Edge::bidirected(a, b),
        }
    }

    pub fn render(&self, g: &CausalGraph) -> String {
        match *self {
            Assumption::ZeroCoefficient { tail, head } => {
                format!("coeff({}->{}) = 0", g.name(tail), g.name(head))
            }
            Assumption::ZeroErrorCovariance { a, b } => {
                format!("cov(e_{},e_{}) = 0", g.name(a), g.name(b))
            }
        }
    }
}

/// All assumptions the model makes, one per missing edge, zero-coefficient
/// assumptions first, each group in ascending pair order.
pub fn assumption_universe(g: &CausalGraph) -> Vec<Assumption> {
    g.missing_edges().into_iter().map(Assumption::from_edge).collect()
}

/// A subset of a model's assumptions together with the graph it induces: the
/// complete order-respecting graph minus exactly the members' edges.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionSet {
    members: Vec<Assumption>,
    induced: CausalGraph,
}

impl AssumptionSet {
    /// Members must be assumptions of `g`, i.e. edges missing from it.
    pub fn from_members(g: &CausalGraph, members: Vec<Assumption>) -> Result<Self> {
        let mut members = members;
        members.sort();
        members.dedup();
        let mut induced = g.completion();
        for a in &members {
            let e = a.edge();
            if g.contains_edge(e) {
                return Err(Error::InvalidQuery(format!(
                    "{} is not an assumption of the model: the edge is present",
                    a.render(g)
                )));
            }
            induced = match e.kind {
                EdgeKind::Directed => induced.without_directed(e.a, e.b)?,
                EdgeKind::Bidirected => {
                    // Rebuild without the bidirected edge by re-adding the rest.
                    let mut h = induced.clone();
                    h = strip_bidirected(&h, e.a, e.b)?;
                    h
                }
            };
        }
        Ok(AssumptionSet { members, induced })
    }

    /// The model's own assumption set: every missing edge.
    pub fn full(g: &CausalGraph) -> Self {
        AssumptionSet { members: assumption_universe(g), induced: g.clone() }
    }

    pub fn members(&self) -> &[Assumption] {
        &self.members
    }

    pub fn induced_graph(&self) -> &CausalGraph {
        &self.induced
    }

    pub fn contains(&self, a: &Assumption) -> bool {
        self.members.binary_search(a).is_ok()
    }
}

fn strip_bidirected(g: &CausalGraph, a: VarId, b: VarId) -> Result<CausalGraph> {
    // The graph type only removes directed edges directly; removing a
    // bidirected edge means rebuilding the bidirected relation without it.
    let mut out = CausalGraph::new(g.names().to_vec())?;
    for (t, h) in g.directed_edges() {
        out = out.with_edge(Edge::directed(t, h))?;
    }
    for (p, q) in g.bidirected_edges() {
        if (p, q) != (a, b) {
            out = out.with_edge(Edge::bidirected(p, q))?;
        }
    }
    Ok(out)
}

/// A claim under analysis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Query {
    /// The path coefficient on one directed edge of the model.
    Edge(TargetEdge),
    /// The total effect of `cause` on `outcome`.
    TotalEffect { cause: VarId, outcome: VarId },
}

impl Query {
    pub fn render(&self, g: &CausalGraph) -> String {
        match *self {
            Query::Edge(t) => format!("edge {}->{}", g.name(t.tail), g.name(t.head)),
            Query::TotalEffect { cause, outcome } => {
                format!("te {}->{}", g.name(cause), g.name(outcome))
            }
        }
    }

    fn oracle_target(&self) -> IdentTarget {
        match *self {
            Query::Edge(t) => IdentTarget::Coefficient { tail: t.tail, head: t.head },
            Query::TotalEffect { cause, outcome } => IdentTarget::TotalEffect { cause, outcome },
        }
    }
}

fn validate_query(g: &CausalGraph, query: &Query) -> Result<()> {
    match *query {
        Query::Edge(t) => {
            if !g.has_directed(t.tail, t.head) {
                return Err(Error::InvalidQuery(format!(
                    "no directed edge {} in the model",
                    g.edge_label(Edge::directed(t.tail, t.head))
                )));
            }
        }
        Query::TotalEffect { cause, outcome } => {
            if cause.0 >= g.var_count() || outcome.0 >= g.var_count() {
                return Err(Error::UnknownVariable(cause.0.max(outcome.0)));
            }
            if cause.0 >= outcome.0 {
                return Err(Error::InvalidQuery(
                    "total-effect cause must precede the outcome in the causal order".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Whether the claim is identified under `set`, i.e. in its induced graph.
pub fn identified_in(set: &AssumptionSet, query: &Query, ctx: &SearchCtx) -> Result<bool> {
    match *query {
        Query::Edge(t) => {
            validate_query(set.induced_graph(), &Query::Edge(t))?;
            identification::has_any_iv_pair(set.induced_graph(), &t, ctx)
        }
        Query::TotalEffect { cause, outcome } => {
            Ok(identify_total_effect(set, cause, outcome, ctx)?.is_some())
        }
    }
}

/// The estimand the analysis quotes for an identifying assumption set.
pub fn identifying_estimand(
    set: &AssumptionSet,
    query: &Query,
    ctx: &SearchCtx,
) -> Result<Option<Estimand>> {
    match *query {
        Query::Edge(t) => {
            validate_query(set.induced_graph(), &Query::Edge(t))?;
            Ok(identification::select_iv_pair(set.induced_graph(), &t, ctx)?
                .map(|p| p.estimand()))
        }
        Query::TotalEffect { cause, outcome } => {
            identify_total_effect(set, cause, outcome, ctx)
        }
    }
}

/// All directed paths from `from` to `to`, as edge lists, in depth-first
/// order with children visited in causal order.
fn directed_paths(g: &CausalGraph, from: VarId, to: VarId) -> Vec<Vec<(VarId, VarId)>> {
    let mut paths = Vec::new();
    let mut trail: Vec<(VarId, VarId)> = Vec::new();
    fn walk(
        g: &CausalGraph,
        at: VarId,
        to: VarId,
        trail: &mut Vec<(VarId, VarId)>,
        paths: &mut Vec<Vec<(VarId, VarId)>>,
    ) {
        if at == to {
            paths.push(trail.clone());
            return;
        }
        for c in g.children(at) {
            trail.push((at, c));
            walk(g, c, to, trail, paths);
            trail.pop();
        }
    }
    walk(g, from, to, &mut trail, &mut paths);
    paths
}

/// Subsets of `candidates` by ascending size, lexicographic within a size.
fn subsets_by_size(candidates: &[VarId]) -> Vec<VarSet> {
    let mut out: Vec<VarSet> = Vec::with_capacity(1 << candidates.len());
    for bits in 0u32..1 << candidates.len() {
        out.push(
            (0..candidates.len())
                .filter(|&i| bits >> i & 1 == 1)
                .map(|i| candidates[i])
                .collect(),
        );
    }
    out.sort_by_key(|s| (s.len(), *s));
    out
}

/// Identifies the total effect of `cause` on `outcome` under `set`, or
/// reports that neither implemented strategy applies.
///
/// With no directed path in the induced graph the effect is constantly zero.
/// Otherwise strategy one searches for an adjustment set: nondescendants of
/// the cause that separate it from the outcome once the cause's outgoing
/// edges are cut, yielding a conditional regression ratio. Strategy two
/// identifies every edge on every directed path separately and sums the
/// per-path products.
pub fn identify_total_effect(
    set: &AssumptionSet,
    cause: VarId,
    outcome: VarId,
    ctx: &SearchCtx,
) -> Result<Option<Estimand>> {
    let g = set.induced_graph();
    validate_query(g, &Query::TotalEffect { cause, outcome })?;
    let paths = directed_paths(g, cause, outcome);
    if paths.is_empty() {
        return Ok(Some(Estimand::Constant(0.0)));
    }

    // Strategy one: covariate adjustment.
    let cut = g.without_outgoing(cause)?;
    let descendants = g.descendants(cause)?;
    let candidates: Vec<VarId> =
        g.vars().filter(|&v| !descendants.contains(v) && v != outcome).collect();
    for given in subsets_by_size(&candidates) {
        if cut.d_separated(cause, outcome, given)? {
            return Ok(Some(Estimand::ratio(
                Estimand::cond_cov(outcome, cause, given),
                Estimand::cond_cov(cause, cause, given),
            )));
        }
    }

    // Strategy two: edge-wise composition along directed paths.
    let mut edges: Vec<(VarId, VarId)> = paths.iter().flatten().copied().collect();
    edges.sort();
    edges.dedup();
    let mut per_edge: Vec<((VarId, VarId), Estimand)> = Vec::with_capacity(edges.len());
    for (tail, head) in edges {
        match identification::select_iv_pair(g, &TargetEdge { tail, head }, ctx)? {
            Some(p) => per_edge.push(((tail, head), p.estimand())),
            None => return Ok(None),
        }
    }
    let estimand_for = |e: &(VarId, VarId)| -> Estimand {
        per_edge.iter().find(|(k, _)| k == e).map(|(_, v)| v.clone()).expect("edge covered")
    };
    let terms: Vec<Estimand> = paths
        .iter()
        .map(|p| Estimand::product(p.iter().map(&estimand_for).collect()))
        .collect();
    Ok(Some(Estimand::sum(terms)))
}

/// The total effect implied by an instantiation: the sum over directed paths
/// of the product of path coefficients.
pub fn true_total_effect(inst: &Instantiation, cause: VarId, outcome: VarId) -> Result<f64> {
    validate_query(inst.graph(), &Query::TotalEffect { cause, outcome })?;
    Ok(sem::forward_effects(inst.graph(), inst.coeffs(), cause)[outcome.0])
}

/// A minimal sufficient assumption set with the estimand it licenses.
#[derive(Clone, Debug, PartialEq)]
pub struct Msa {
    pub assumptions: Vec<Assumption>,
    pub estimand: Estimand,
}

/// Lexicographic combinations of `0..n` of the given size.
struct Combinations {
    n: usize,
    indices: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, size: usize) -> Self {
        Combinations { n, indices: (0..size).collect(), done: size > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.indices.clone();
        let k = self.indices.len();
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.indices[i] < self.n - (k - i) {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}

/// Every minimal sufficient assumption set for the claim, by ascending size,
/// lexicographic within a size. Empty exactly when no subset of the model's
/// assumptions identifies the claim.
///
/// The sweep inspects the whole subset lattice (pruned of msa supersets,
/// which cannot be minimal); a failing set says nothing about its subsets
/// because identification is not monotone.
pub fn enumerate_msas(g: &CausalGraph, query: &Query, ctx: &SearchCtx) -> Result<Vec<Msa>> {
    validate_query(g, query)?;
    let universe = assumption_universe(g);
    let u = universe.len();

    let set_for = |mask: u128| -> Result<AssumptionSet> {
        let members: Vec<Assumption> =
            (0..u).filter(|&i| mask >> i & 1 == 1).map(|i| universe[i]).collect();
        AssumptionSet::from_members(g, members)
    };

    let mut found: Vec<u128> = Vec::new();
    for size in 0..=u {
        // Candidates of this size not containing an already-minimal set.
        let mut layer: Vec<u128> = Vec::new();
        for combo in Combinations::new(u, size) {
            let mask = combo.iter().fold(0u128, |m, &i| m | 1 << i);
            if found.iter().any(|&msa| msa & !mask == 0) {
                continue;
            }
            if (layer.len() + 1) as u64 > ctx.remaining_budget() {
                return Err(Error::BudgetExceeded(ctx.config().budget));
            }
            layer.push(mask);
        }
        if layer.is_empty() && size > 0 {
            // Every subset of this size extends an msa; larger ones will too.
            break;
        }
        let verdicts = exec::map_collect(layer, |mask| {
            ctx.charge()?;
            identified_in(&set_for(mask)?, query, ctx).map(|ok| (mask, ok))
        });
        for v in verdicts {
            let (mask, ok) = v?;
            if ok {
                found.push(mask);
            }
        }
    }

    let mut msas = Vec::with_capacity(found.len());
    for mask in found {
        let set = set_for(mask)?;
        let estimand = identifying_estimand(&set, query, ctx)?.ok_or_else(|| {
            Error::NumericalFailure("identifying set produced no estimand".into())
        })?;
        msas.push(Msa { assumptions: set.members().to_vec(), estimand });
    }
    Ok(msas)
}

/// Corroboration and identification counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Degrees {
    /// Number of msas.
    pub m: usize,
    /// Number of extensionally distinct estimands among the msas.
    pub k: usize,
    /// Independent testable constraints: `k - 1`.
    pub df: usize,
}

/// Class index per msa, in first-occurrence order, decided by numeric
/// probing. Deterministic in `(dim, probes, seed)`.
fn estimand_classes(
    msas: &[Msa],
    dim: usize,
    probes: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Estimand>)> {
    let mut reps: Vec<Estimand> = Vec::new();
    let mut classes = Vec::with_capacity(msas.len());
    for msa in msas {
        let mut class = None;
        for (i, rep) in reps.iter().enumerate() {
            if !estimand::distinct(&msa.estimand, rep, dim, probes, seed)? {
                class = Some(i);
                break;
            }
        }
        let class = class.unwrap_or_else(|| {
            reps.push(msa.estimand.clone());
            reps.len() - 1
        });
        classes.push(class);
    }
    Ok((classes, reps))
}

/// `m`, `k`, and `df` for an msa list; `None` when there are no msas.
pub fn degrees(msas: &[Msa], dim: usize, probes: usize, seed: u64) -> Result<Option<Degrees>> {
    if msas.is_empty() {
        return Ok(None);
    }
    let (_, reps) = estimand_classes(msas, dim, probes, seed)?;
    Ok(Some(Degrees { m: msas.len(), k: reps.len(), df: reps.len() - 1 }))
}

/// The `k - 1` equality constraints induced by an over-identified claim:
/// consecutive pairs of class representatives. Both sides estimate the claim,
/// so on-model they agree; off-model their difference is a test statistic.
pub fn induced_constraints(
    msas: &[Msa],
    dim: usize,
    probes: usize,
    seed: u64,
) -> Result<Vec<(Estimand, Estimand)>> {
    if msas.is_empty() {
        return Ok(Vec::new());
    }
    let (_, reps) = estimand_classes(msas, dim, probes, seed)?;
    Ok(reps.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
}

/// An assumption is relevant to the claim iff it belongs to some msa.
pub fn is_relevant(
    g: &CausalGraph,
    query: &Query,
    assumption: &Assumption,
    ctx: &SearchCtx,
) -> Result<bool> {
    if g.contains_edge(assumption.edge()) {
        return Err(Error::InvalidQuery(format!(
            "{} is not an assumption of the model: the edge is present",
            assumption.render(g)
        )));
    }
    let msas = enumerate_msas(g, query, ctx)?;
    Ok(msas.iter().any(|m| m.assumptions.contains(assumption)))
}

/// The submodel the claim actually leans on: assumptions in some msa are
/// retained, all others dropped (their edges restored). `None` when the claim
/// is not identified.
pub fn relevant_submodel(
    g: &CausalGraph,
    query: &Query,
    ctx: &SearchCtx,
) -> Result<Option<(CausalGraph, Vec<Assumption>)>> {
    let msas = enumerate_msas(g, query, ctx)?;
    Ok(submodel_of(g, &msas)?)
}

fn submodel_of(g: &CausalGraph, msas: &[Msa]) -> Result<Option<(CausalGraph, Vec<Assumption>)>> {
    if msas.is_empty() {
        return Ok(None);
    }
    let mut retained: Vec<Assumption> = msas.iter().flat_map(|m| m.assumptions.clone()).collect();
    retained.sort();
    retained.dedup();
    let set = AssumptionSet::from_members(g, retained.clone())?;
    Ok(Some((set.induced_graph().clone(), retained)))
}

/// Knobs for [`analyze`]. Defaults: seed 0, full budget, no conditioning cap,
/// no oracle cross-check.
#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub budget: u64,
    pub max_z: Option<usize>,
    /// Cross-check graphical verdicts against the numeric oracle and record
    /// disagreements as caveats.
    pub oracle_check: bool,
    pub oracle_trials: usize,
    pub probes: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            seed: 0,
            budget: DEFAULT_BUDGET,
            max_z: None,
            oracle_check: false,
            oracle_trials: DEFAULT_ORACLE_TRIALS,
            probes: estimand::DEFAULT_PROBES,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Identified,
    /// No implemented strategy identifies the claim; this is a verdict about
    /// the implemented criteria, not a proof of non-identifiability.
    NotIdentified,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Identified => write!(f, "identified"),
            Status::NotIdentified => write!(f, "not identified by implemented criteria"),
        }
    }
}

/// The retained part of the model once irrelevant assumptions are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Submodel {
    pub graph: CausalGraph,
    pub retained: Vec<Assumption>,
}

/// Everything [`analyze`] establishes about one claim.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessReport {
    pub graph: CausalGraph,
    pub query: Query,
    pub status: Status,
    pub msas: Vec<Msa>,
    /// Maximal instrument pairs with their estimands; empty for total-effect
    /// claims, which have no instrument-pair machinery.
    pub maximal_pairs: Vec<(IvPair, Estimand)>,
    pub degrees: Option<Degrees>,
    pub constraints: Vec<(Estimand, Estimand)>,
    /// One verdict per assumption in the universe, in universe order.
    pub relevance: Vec<(Assumption, bool)>,
    pub submodel: Option<Submodel>,
    pub caveats: Vec<String>,
}

pub const CAVEAT_JOINT_PAIRS: &str = "instrument pairs are judged one at a time; \
identification achievable only through several pairs acting jointly is not searched, \
so the reported estimand classes are a lower bound";

pub const CAVEAT_TE_STRATEGIES: &str = "total-effect search covers covariate adjustment \
and edge-wise path composition; effects identifiable only by other strategies are \
reported as not identified";

/// Full robustness analysis of one claim. Deterministic in
/// `(g, query, options)`; identical reports come back for identical inputs
/// whether or not the `parallel` feature is enabled.
pub fn analyze(g: &CausalGraph, query: &Query, options: &AnalysisOptions) -> Result<RobustnessReport> {
    validate_query(g, query)?;
    let ctx = SearchCtx::new(SearchConfig { budget: options.budget, max_z: options.max_z });
    let dim = g.var_count();

    let msas = enumerate_msas(g, query, &ctx)?;
    let maximal_pairs = match query {
        Query::Edge(t) => identification::maximal_iv_pairs(g, t, &ctx)?,
        Query::TotalEffect { .. } => Vec::new(),
    };
    let (classes, reps) = estimand_classes(&msas, dim, options.probes, options.seed)?;
    let _ = classes;
    let degrees = if msas.is_empty() {
        None
    } else {
        Some(Degrees { m: msas.len(), k: reps.len(), df: reps.len() - 1 })
    };
    let constraints: Vec<(Estimand, Estimand)> =
        reps.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let universe = assumption_universe(g);
    let relevance: Vec<(Assumption, bool)> = universe
        .iter()
        .map(|a| (*a, msas.iter().any(|m| m.assumptions.contains(a))))
        .collect();
    let submodel = submodel_of(g, &msas)?.map(|(graph, retained)| Submodel { graph, retained });

    let mut caveats = Vec::new();
    match query {
        Query::Edge(_) => caveats.push(CAVEAT_JOINT_PAIRS.to_string()),
        Query::TotalEffect { .. } => caveats.push(CAVEAT_TE_STRATEGIES.to_string()),
    }
    if let (Query::Edge(_), Some(d)) = (query, degrees) {
        if !maximal_pairs.is_empty() {
            let pair_list: Vec<Msa> = maximal_pairs
                .iter()
                .map(|(_, e)| Msa { assumptions: Vec::new(), estimand: e.clone() })
                .collect();
            let (_, pair_reps) = estimand_classes(&pair_list, dim, options.probes, options.seed)?;
            if pair_reps.len() != d.k {
                caveats.push(format!(
                    "maximal instrument pairs yield {} distinct estimand class(es) while msa \
                     analysis yields {}; the msa-based count is authoritative",
                    pair_reps.len(),
                    d.k
                ));
            }
        }
    }
    if options.oracle_check {
        oracle_caveats(g, query, &msas, options, &mut caveats)?;
    }

    Ok(RobustnessReport {
        graph: g.clone(),
        query: *query,
        status: if msas.is_empty() { Status::NotIdentified } else { Status::Identified },
        msas,
        maximal_pairs,
        degrees,
        constraints,
        relevance,
        submodel,
        caveats,
    })
}

fn oracle_caveats(
    g: &CausalGraph,
    query: &Query,
    msas: &[Msa],
    options: &AnalysisOptions,
    caveats: &mut Vec<String>,
) -> Result<()> {
    let target = query.oracle_target();
    let graphical = !msas.is_empty();
    let oracle = sem::locally_identified(g, &target, options.oracle_trials, options.seed)?;
    if oracle && !graphical {
        caveats.push(
            "numeric oracle: the claim is locally identified in the full model although no \
             implemented graphical strategy applies; graphical criteria are sufficient, \
             not complete"
                .to_string(),
        );
    }
    if !oracle && graphical {
        caveats.push(
            "numeric oracle disagrees with the graphical verdict on the full model; \
             inspect the model numerically"
                .to_string(),
        );
    }
    for (i, msa) in msas.iter().enumerate() {
        let set = AssumptionSet::from_members(g, msa.assumptions.clone())?;
        let ok = sem::locally_identified(
            set.induced_graph(),
            &target,
            options.oracle_trials,
            options.seed,
        )?;
        if !ok {
            caveats.push(format!(
                "numeric oracle disagrees with the graphical verdict on msa #{}",
                i + 1
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VarId {
        VarId(i)
    }

    fn chain() -> CausalGraph {
        CausalGraph::build(&["x", "y", "z"], &[("x", "y"), ("y", "z")], &[]).unwrap()
    }

    fn zc(t: usize, h: usize) -> Assumption {
        Assumption::ZeroCoefficient { tail: v(t), head: v(h) }
    }

    fn zec(a: usize, b: usize) -> Assumption {
        Assumption::ZeroErrorCovariance { a: v(a), b: v(b) }
    }

    fn names(msa: &Msa, g: &CausalGraph) -> Vec<String> {
        msa.assumptions.iter().map(|a| a.render(g)).collect()
    }

    #[test]
    fn chain_universe_lists_each_missing_edge_once() {
        assert_eq!(
            assumption_universe(&chain()),
            vec![zc(0, 2), zec(0, 1), zec(0, 2), zec(1, 2)]
        );
    }

    #[test]
    fn assumption_set_induces_complete_graph_minus_members() {
        let g = chain();
        let set = AssumptionSet::from_members(&g, vec![zec(0, 2), zc(0, 2)]).unwrap();
        let h = set.induced_graph();
        assert!(!h.has_directed(v(0), v(2)));
        assert!(!h.has_bidirected(v(0), v(2)));
        assert!(h.has_directed(v(0), v(1)));
        assert!(h.has_bidirected(v(0), v(1)));
        assert!(h.has_bidirected(v(1), v(2)));
        // Members of the model's own edge set are not assumptions.
        assert!(AssumptionSet::from_members(&g, vec![zc(0, 1)]).is_err());
    }

    #[test]
    fn full_set_induces_the_model_itself() {
        let g = chain();
        assert_eq!(AssumptionSet::full(&g).induced_graph(), &g);
    }

    #[test]
    fn second_edge_has_three_msas_in_two_classes() {
        let g = chain();
        let ctx = SearchCtx::default();
        let query = Query::Edge(TargetEdge { tail: v(1), head: v(2) });
        let msas = enumerate_msas(&g, &query, &ctx).unwrap();
        let sets: Vec<Vec<Assumption>> = msas.iter().map(|m| m.assumptions.clone()).collect();
        assert_eq!(
            sets,
            vec![
                vec![zc(0, 2), zec(0, 2)],
                vec![zec(0, 1), zec(1, 2)],
                vec![zec(0, 2), zec(1, 2)],
            ]
        );
        assert_eq!(msas[0].estimand.render(&g), "cov(z,x)/cov(y,x)");
        assert_eq!(msas[1].estimand.render(&g), "cov(z,y|x)/cov(y,y|x)");
        assert_eq!(msas[2].estimand.render(&g), "cov(z,y|x)/cov(y,y|x)");
        let d = degrees(&msas, 3, estimand::DEFAULT_PROBES, 0).unwrap().unwrap();
        assert_eq!(d, Degrees { m: 3, k: 2, df: 1 });
        let constraints = induced_constraints(&msas, 3, estimand::DEFAULT_PROBES, 0).unwrap();
        assert_eq!(constraints.len(), 1);
        let (lhs, rhs) = &constraints[0];
        assert_eq!(lhs.render(&g), "cov(z,x)/cov(y,x)");
        assert_eq!(rhs.render(&g), "cov(z,y|x)/cov(y,y|x)");
    }

    #[test]
    fn first_edge_is_just_identified_by_one_assumption() {
        let g = chain();
        let ctx = SearchCtx::default();
        let query = Query::Edge(TargetEdge { tail: v(0), head: v(1) });
        let msas = enumerate_msas(&g, &query, &ctx).unwrap();
        assert_eq!(msas.len(), 1);
        assert_eq!(msas[0].assumptions, vec![zec(0, 1)]);
        assert_eq!(msas[0].estimand.render(&g), "cov(y,x)/cov(x,x)");
        let d = degrees(&msas, 3, estimand::DEFAULT_PROBES, 0).unwrap().unwrap();
        assert_eq!(d, Degrees { m: 1, k: 1, df: 0 });
        assert!(induced_constraints(&msas, 3, estimand::DEFAULT_PROBES, 0).unwrap().is_empty());
    }

    #[test]
    fn relaxing_both_exogeneity_assumptions_loses_the_second_edge() {
        // Keeping only "no y<->z" and "no x->z" frees both x<->y and x<->z;
        // no instrument survives.
        let g = chain();
        let ctx = SearchCtx::default();
        let set = AssumptionSet::from_members(&g, vec![zc(0, 2), zec(1, 2)]).unwrap();
        let query = Query::Edge(TargetEdge { tail: v(1), head: v(2) });
        assert!(!identified_in(&set, &query, &ctx).unwrap());
    }

    #[test]
    fn total_effect_msas_split_into_adjustment_and_composition() {
        let g = chain();
        let ctx = SearchCtx::default();
        let query = Query::TotalEffect { cause: v(0), outcome: v(2) };
        let msas = enumerate_msas(&g, &query, &ctx).unwrap();
        let sets: Vec<Vec<Assumption>> = msas.iter().map(|m| m.assumptions.clone()).collect();
        assert_eq!(
            sets,
            vec![
                vec![zec(0, 1), zec(0, 2)],
                vec![zc(0, 2), zec(0, 1), zec(1, 2)],
            ]
        );
        assert_eq!(msas[0].estimand.render(&g), "cov(z,x)/cov(x,x)");
        assert_eq!(
            msas[1].estimand.render(&g),
            "(cov(y,x)/cov(x,x)) * (cov(z,y|x)/cov(y,y|x))"
        );
        let d = degrees(&msas, 3, estimand::DEFAULT_PROBES, 0).unwrap().unwrap();
        assert_eq!(d, Degrees { m: 2, k: 2, df: 1 });
        // The union of the two msas is the whole universe: nothing is spare.
        let (sub, retained) = relevant_submodel(&g, &query, &SearchCtx::default()).unwrap().unwrap();
        assert_eq!(sub, g);
        assert_eq!(retained.len(), 4);
    }

    #[test]
    fn adjustment_needs_an_unconfounded_cause() {
        // With x <-> z free the marginal regression is biased and no
        // adjustment set exists, but composition still works when both edges
        // on the path are identified.
        let g = chain();
        let ctx = SearchCtx::default();
        let set = AssumptionSet::from_members(&g, vec![zc(0, 2), zec(0, 1), zec(1, 2)]).unwrap();
        let est = identify_total_effect(&set, v(0), v(2), &ctx).unwrap().unwrap();
        assert_eq!(est.render(&g), "(cov(y,x)/cov(x,x)) * (cov(z,y|x)/cov(y,y|x))");
    }

    #[test]
    fn null_effect_is_constant_zero() {
        let g = CausalGraph::build(&["x", "y"], &[], &[("x", "y")]).unwrap();
        let ctx = SearchCtx::default();
        let set = AssumptionSet::from_members(&g, vec![zc(0, 1)]).unwrap();
        let est = identify_total_effect(&set, v(0), v(1), &ctx).unwrap().unwrap();
        assert_eq!(est, Estimand::Constant(0.0));
    }

    #[test]
    fn true_total_effect_sums_path_products() {
        let g = CausalGraph::build(
            &["x", "y", "z"],
            &[("x", "y"), ("x", "z"), ("y", "z")],
            &[],
        )
        .unwrap();
        let inst =
            Instantiation::new(g, vec![0.5, 0.3, 0.4], vec![1.0, 1.0, 1.0], vec![]).unwrap();
        let te = true_total_effect(&inst, v(0), v(2)).unwrap();
        assert!((te - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relevance_follows_msa_membership() {
        let g = chain();
        let query = Query::Edge(TargetEdge { tail: v(0), head: v(1) });
        assert!(is_relevant(&g, &query, &zec(0, 1), &SearchCtx::default()).unwrap());
        assert!(!is_relevant(&g, &query, &zec(1, 2), &SearchCtx::default()).unwrap());
        assert!(!is_relevant(&g, &query, &zc(0, 2), &SearchCtx::default()).unwrap());
        // Present edges are not assumptions at all.
        assert!(is_relevant(&g, &query, &zc(0, 1), &SearchCtx::default()).is_err());
    }

    #[test]
    fn first_edge_submodel_restores_the_irrelevant_edges() {
        let g = chain();
        let query = Query::Edge(TargetEdge { tail: v(0), head: v(1) });
        let (sub, retained) = relevant_submodel(&g, &query, &SearchCtx::default()).unwrap().unwrap();
        assert_eq!(retained, vec![zec(0, 1)]);
        assert!(sub.has_directed(v(0), v(1)));
        assert!(sub.has_directed(v(0), v(2)));
        assert!(sub.has_directed(v(1), v(2)));
        assert!(!sub.has_bidirected(v(0), v(1)));
        assert!(sub.has_bidirected(v(0), v(2)));
        assert!(sub.has_bidirected(v(1), v(2)));
    }

    #[test]
    fn assuming_more_can_lose_identification() {
        // x -> y confounded by x <-> y, plus a variable w the model keeps
        // fully disconnected. Under the model's own assumption set the
        // coefficient is hopeless. But maintaining only "w causes nothing
        // and shares no error with y" leaves x <-> w free, and that channel
        // makes w an instrument for x -> y. Asserting the fourth absence
        // (x <-> w) destroys the instrument again: identification is not
        // monotone in the assumption set, which is why the msa sweep may
        // not skip subsets of failing sets.
        let g = CausalGraph::build(&["x", "y", "w"], &[("x", "y")], &[("x", "y")]).unwrap();
        let ctx = SearchCtx::default();
        let query = Query::Edge(TargetEdge { tail: v(0), head: v(1) });
        let keep_x_w_free = vec![zc(0, 2), zc(1, 2), zec(1, 2)];
        let small = AssumptionSet::from_members(&g, keep_x_w_free.clone()).unwrap();
        assert!(identified_in(&small, &query, &ctx).unwrap());
        assert!(!identified_in(&AssumptionSet::full(&g), &query, &ctx).unwrap());
        let msas = enumerate_msas(&g, &query, &ctx).unwrap();
        assert_eq!(msas.len(), 1);
        assert_eq!(msas[0].assumptions, keep_x_w_free);
        assert_eq!(msas[0].estimand.render(&g), "cov(y,w)/cov(x,w)");
        // Membership and the literal relevance definition agree here too:
        // the three members are relevant, the instrument channel is not.
        for a in &keep_x_w_free {
            assert!(is_relevant(&g, &query, a, &SearchCtx::default()).unwrap());
        }
        assert!(!is_relevant(&g, &query, &zec(0, 2), &SearchCtx::default()).unwrap());
    }

    #[test]
    fn saturated_bow_is_not_identified() {
        let g = CausalGraph::build(&["x", "y"], &[("x", "y")], &[("x", "y")]).unwrap();
        let report = analyze(
            &g,
            &Query::Edge(TargetEdge { tail: v(0), head: v(1) }),
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert_eq!(report.status, Status::NotIdentified);
        assert!(report.msas.is_empty());
        assert_eq!(report.degrees, None);
        assert!(report.submodel.is_none());
    }

    #[test]
    fn analyze_is_deterministic_and_carries_the_fixed_caveat() {
        let g = chain();
        let query = Query::Edge(TargetEdge { tail: v(1), head: v(2) });
        let a = analyze(&g, &query, &AnalysisOptions::default()).unwrap();
        let b = analyze(&g, &query, &AnalysisOptions::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.caveats.iter().any(|c| c == CAVEAT_JOINT_PAIRS));
        assert_eq!(a.maximal_pairs.len(), 2);
        let te = analyze(
            &g,
            &Query::TotalEffect { cause: v(0), outcome: v(2) },
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert!(te.caveats.iter().any(|c| c == CAVEAT_TE_STRATEGIES));
        assert!(te.maximal_pairs.is_empty());
    }

    #[test]
    fn oracle_check_confirms_the_chain_analysis_without_caveats() {
        let g = chain();
        let query = Query::Edge(TargetEdge { tail: v(1), head: v(2) });
        let opts = AnalysisOptions { oracle_check: true, ..AnalysisOptions::default() };
        let report = analyze(&g, &query, &opts).unwrap();
        // Only the fixed caveat: oracle and graphical verdicts agree on the
        // model and on every msa.
        assert_eq!(report.caveats, vec![CAVEAT_JOINT_PAIRS.to_string()]);
    }

    #[test]
    fn names_render_for_reports() {
        let g = chain();
        let ctx = SearchCtx::default();
        let query = Query::Edge(TargetEdge { tail: v(0), head: v(1) });
        let msas = enumerate_msas(&g, &query, &ctx).unwrap();
        assert_eq!(names(&msas[0], &g), vec!["cov(e_x,e_y) = 0".to_string()]);
    }
}
