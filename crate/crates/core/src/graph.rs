//! Mixed acyclic graphs over an ordered variable set, with separation queries.
//!
//! Variables carry a fixed causal order. Directed edges must point from a
//! lower to a higher order index, so the directed part is acyclic by
//! construction. A bidirected edge stands for a latent common cause of its
//! endpoints and behaves as if it carried an arrowhead at both ends in
//! separation queries. Graphs are immutable values: edge edits return a new
//! graph and never touch the receiver.
//!
//! Both edge relations are stored as bitmasks over unordered variable pairs,
//! which keeps supergraph lattices cheap to walk and graphs cheap to hash.
//! The mask width caps models at [`MAX_VARIABLES`] variables.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap on the variable count, fixed by the 64-bit edge masks.
pub const MAX_VARIABLES: usize = 11;

/// Lattice searches are exponential in the number of missing edges; models
/// larger than this stay legal but can get slow, so front ends should warn.
pub const SOFT_VARIABLE_LIMIT: usize = 7;

/// A variable, identified by its position in the causal order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A set of variables, stored as a bitmask over order indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarSet(u16);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn single(v: VarId) -> Self {
        VarSet(1 << v.0)
    }

    pub fn contains(self, v: VarId) -> bool {
        self.0 >> v.0 & 1 == 1
    }

    #[must_use]
    pub fn with(self, v: VarId) -> Self {
        VarSet(self.0 | 1 << v.0)
    }

    #[must_use]
    pub fn without(self, v: VarId) -> Self {
        VarSet(self.0 & !(1 << v.0))
    }

    #[must_use]
    pub fn union(self, other: VarSet) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = VarId> {
        let bits = self.0;
        (0..16).filter_map(move |i| (bits >> i & 1 == 1).then_some(VarId(i)))
    }
}

impl FromIterator<VarId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        iter.into_iter().fold(VarSet::EMPTY, VarSet::with)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeKind {
    Directed,
    Bidirected,
}

/// An edge between two distinct variables. Directed edges run `a -> b`;
/// bidirected edges are stored with the lower order index first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    pub kind: EdgeKind,
    pub a: VarId,
    pub b: VarId,
}

impl Edge {
    pub fn directed(tail: VarId, head: VarId) -> Self {
        Edge { kind: EdgeKind::Directed, a: tail, b: head }
    }

    pub fn bidirected(a: VarId, b: VarId) -> Self {
        let (lo, hi) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        Edge { kind: EdgeKind::Bidirected, a: lo, b: hi }
    }
}

/// Bit position of the unordered pair `{i, j}` with `i < j`.
fn pair_bit(i: usize, j: usize) -> u64 {
    debug_assert!(i < j);
    1 << (j * (j - 1) / 2 + i)
}

/// A mixed acyclic graph: ordered variables, directed and bidirected edges.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CausalGraph {
    names: Arc<[String]>,
    directed: u64,
    bidirected: u64,
}

impl CausalGraph {
    /// A graph with the given variables (in causal order) and no edges.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_VARIABLES {
            return Err(Error::TooManyVariables { got: names.len(), limit: MAX_VARIABLES });
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::BadVariableName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(Error::BadVariableName(name.clone()));
            }
        }
        Ok(CausalGraph { names: names.into(), directed: 0, bidirected: 0 })
    }

    /// Convenience constructor from name pairs.
    pub fn build<S: AsRef<str>>(
        names: &[S],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Self> {
        let mut g = CausalGraph::new(names.iter().map(|s| s.as_ref().to_string()))?;
        for &(t, h) in directed {
            let (t, h) = (g.var(t)?, g.var(h)?);
            g = g.with_edge(Edge::directed(t, h))?;
        }
        for &(a, b) in bidirected {
            let (a, b) = (g.var(a)?, g.var(b)?);
            g = g.with_edge(Edge::bidirected(a, b))?;
        }
        Ok(g)
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len()).map(VarId)
    }

    /// All variables as a set.
    pub fn all_vars(&self) -> VarSet {
        self.vars().collect()
    }

    pub fn var(&self, name: &str) -> Result<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(VarId)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn check_var(&self, v: VarId) -> Result<()> {
        if v.0 < self.names.len() {
            Ok(())
        } else {
            Err(Error::UnknownVariable(v.0))
        }
    }

    fn check_set(&self, s: VarSet) -> Result<()> {
        match s.iter().last() {
            Some(v) => self.check_var(v),
            None => Ok(()),
        }
    }

    pub fn edge_label(&self, e: Edge) -> String {
        let arrow = match e.kind {
            EdgeKind::Directed => "->",
            EdgeKind::Bidirected => "<->",
        };
        format!("{} {} {}", self.name(e.a), arrow, self.name(e.b))
    }

    pub fn has_directed(&self, tail: VarId, head: VarId) -> bool {
        tail.0 < head.0 && self.directed & pair_bit(tail.0, head.0) != 0
    }

    pub fn has_bidirected(&self, a: VarId, b: VarId) -> bool {
        let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        lo != hi && self.bidirected & pair_bit(lo, hi) != 0
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        match e.kind {
            EdgeKind::Directed => self.has_directed(e.a, e.b),
            EdgeKind::Bidirected => self.has_bidirected(e.a, e.b),
        }
    }

    /// Directed edges `(tail, head)` in ascending `(tail, head)` order.
    pub fn directed_edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for i in 0..self.var_count() {
            for j in i + 1..self.var_count() {
                if self.directed & pair_bit(i, j) != 0 {
                    out.push((VarId(i), VarId(j)));
                }
            }
        }
        out
    }

    /// Bidirected edges `(a, b)` with `a < b`, in ascending order.
    pub fn bidirected_edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for i in 0..self.var_count() {
            for j in i + 1..self.var_count() {
                if self.bidirected & pair_bit(i, j) != 0 {
                    out.push((VarId(i), VarId(j)));
                }
            }
        }
        out
    }

    pub fn directed_edge_count(&self) -> usize {
        self.directed.count_ones() as usize
    }

    pub fn bidirected_edge_count(&self) -> usize {
        self.bidirected.count_ones() as usize
    }

    /// Adds one edge, returning the extended graph. The receiver is unchanged.
    pub fn with_edge(&self, e: Edge) -> Result<Self> {
        self.check_var(e.a)?;
        self.check_var(e.b)?;
        if e.a == e.b {
            return Err(Error::SelfEdge(self.name(e.a).to_string()));
        }
        if self.contains_edge(e) {
            return Err(Error::DuplicateEdge(self.edge_label(e)));
        }
        let mut g = self.clone();
        match e.kind {
            EdgeKind::Directed => {
                if e.a.0 > e.b.0 {
                    return Err(Error::OrderViolation {
                        tail: self.name(e.a).to_string(),
                        head: self.name(e.b).to_string(),
                    });
                }
                g.directed |= pair_bit(e.a.0, e.b.0);
            }
            EdgeKind::Bidirected => {
                g.bidirected |= pair_bit(e.a.0, e.b.0);
            }
        }
        Ok(g)
    }

    /// Removes one directed edge, returning the reduced graph.
    pub fn without_directed(&self, tail: VarId, head: VarId) -> Result<Self> {
        self.check_var(tail)?;
        self.check_var(head)?;
        if !self.has_directed(tail, head) {
            return Err(Error::MissingEdge(self.edge_label(Edge::directed(tail, head))));
        }
        let mut g = self.clone();
        g.directed &= !pair_bit(tail.0, head.0);
        Ok(g)
    }

    /// Removes every directed edge leaving `v`.
    pub fn without_outgoing(&self, v: VarId) -> Result<Self> {
        self.check_var(v)?;
        let mut g = self.clone();
        for j in v.0 + 1..self.var_count() {
            g.directed &= !pair_bit(v.0, j);
        }
        Ok(g)
    }

    /// The complete order-respecting graph on the same variables: every
    /// directed edge `i -> j` with `i < j` and every bidirected edge present.
    pub fn completion(&self) -> Self {
        let n = self.var_count();
        let full = if n < 2 { 0 } else { (1u64 << (n * (n - 1) / 2)) - 1 };
        CausalGraph { names: self.names.clone(), directed: full, bidirected: full }
    }

    /// Edges absent from this graph, directed first, each group in ascending
    /// pair order. Every missing edge is one substantive modeling assumption.
    pub fn missing_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.var_count() {
            for j in i + 1..self.var_count() {
                if self.directed & pair_bit(i, j) == 0 {
                    out.push(Edge::directed(VarId(i), VarId(j)));
                }
            }
        }
        for i in 0..self.var_count() {
            for j in i + 1..self.var_count() {
                if self.bidirected & pair_bit(i, j) == 0 {
                    out.push(Edge::bidirected(VarId(i), VarId(j)));
                }
            }
        }
        out
    }

    /// Edge masks, used as cheap canonical keys in lattice searches.
    pub(crate) fn masks(&self) -> (u64, u64) {
        (self.directed, self.bidirected)
    }

    /// True if `self` has the same variables and at least the edges of `other`.
    pub fn is_supergraph_of(&self, other: &CausalGraph) -> bool {
        self.names == other.names
            && other.directed & !self.directed == 0
            && other.bidirected & !self.bidirected == 0
    }

    /// Parents of `v`: tails of directed edges into `v`.
    pub fn parents(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        (0..v.0).filter(move |&i| self.directed & pair_bit(i, v.0) != 0).map(VarId)
    }

    /// Children of `v`: heads of directed edges out of `v`.
    pub fn children(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        (v.0 + 1..self.var_count())
            .filter(move |&j| self.directed & pair_bit(v.0, j) != 0)
            .map(VarId)
    }

    /// Variables joined to `v` by a bidirected edge.
    pub fn spouses(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        (0..self.var_count()).filter(move |&u| self.has_bidirected(v, VarId(u))).map(VarId)
    }

    /// `v` together with everything reachable from `v` along directed edges.
    pub fn descendants(&self, v: VarId) -> Result<VarSet> {
        self.check_var(v)?;
        Ok(self.descendant_set(v))
    }

    fn descendant_set(&self, v: VarId) -> VarSet {
        let mut seen = VarSet::single(v);
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for c in self.children(u) {
                if !seen.contains(c) {
                    seen = seen.with(c);
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// Whether `z` d-separates `a` from `b`.
    ///
    /// A path is blocked iff it passes a non-collider in `z`, or a collider
    /// none of whose descendants (itself included) is in `z`. Bidirected
    /// edges contribute arrowheads at both endpoints. Implemented as a
    /// reachability walk over (variable, arrival-mark) states rather than
    /// path enumeration.
    pub fn d_separated(&self, a: VarId, b: VarId, z: VarSet) -> Result<bool> {
        self.check_var(a)?;
        self.check_var(b)?;
        self.check_set(z)?;
        if a == b || z.contains(a) || z.contains(b) {
            return Err(Error::OverlappingQuery);
        }

        // collider_open[v]: some descendant of v (possibly v) is conditioned on
        let collider_open: Vec<bool> =
            self.vars().map(|v| self.descendant_set(v).intersects(z)).collect();

        // States: (variable, mark of the edge end we arrived through).
        // Head = arrowhead at the variable, Tail = tail at the variable.
        const TAIL: usize = 0;
        const HEAD: usize = 1;
        let n = self.var_count();
        let mut visited = vec![[false; 2]; n];
        let mut stack: Vec<(VarId, usize)> = Vec::new();

        for w in self.children(a) {
            stack.push((w, HEAD));
        }
        for u in self.parents(a) {
            stack.push((u, TAIL));
        }
        for s in self.spouses(a) {
            stack.push((s, HEAD));
        }

        while let Some((v, mark)) = stack.pop() {
            if v == b {
                return Ok(false);
            }
            if visited[v.0][mark] {
                continue;
            }
            visited[v.0][mark] = true;

            let non_collider_open = !z.contains(v);
            // Departing through a tail at v can never close a collider.
            if non_collider_open {
                for w in self.children(v) {
                    stack.push((w, HEAD));
                }
            }
            // Departing through a head at v forms a collider iff we also
            // arrived through a head.
            let head_departure_open =
                if mark == HEAD { collider_open[v.0] } else { non_collider_open };
            if head_departure_open {
                for u in self.parents(v) {
                    stack.push((u, TAIL));
                }
                for s in self.spouses(v) {
                    stack.push((s, HEAD));
                }
            }
        }
        Ok(true)
    }

    /// Negation of [`CausalGraph::d_separated`], for call sites that read
    /// better in terms of connection.
    pub fn d_connected_given(&self, a: VarId, b: VarId, z: VarSet) -> Result<bool> {
        self.d_separated(a, b, z).map(|sep| !sep)
    }
}

impl fmt::Debug for CausalGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let directed: Vec<String> = self
            .directed_edges()
            .into_iter()
            .map(|(t, h)| self.edge_label(Edge::directed(t, h)))
            .collect();
        let bidirected: Vec<String> = self
            .bidirected_edges()
            .into_iter()
            .map(|(a, b)| self.edge_label(Edge::bidirected(a, b)))
            .collect();
        f.debug_struct("CausalGraph")
            .field("vars", &self.names)
            .field("directed", &directed)
            .field("bidirected", &bidirected)
            .finish()
    }
}
