//! Graph catalogues for sweeps: every mixed acyclic graph over a fixed
//! causal order, or a seeded random sample of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{CausalGraph, Edge, VarId};

fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

fn from_masks(names: &[&str], directed: u64, bidirected: u64) -> Result<CausalGraph> {
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

/// Every graph over the given variables in their causal order: all
/// `4^(n(n-1)/2)` combinations of absent / directed / bidirected / both per
/// ordered pair. Deterministic enumeration order (directed mask outer,
/// bidirected mask inner).
pub fn all_graphs(names: &[&str]) -> Result<Vec<CausalGraph>> {
    let bits = pair_count(names.len());
    assert!(bits <= 12, "exhaustive catalogue is exponential; keep it small");
    let m = 1u64 << bits;
    let mut out = Vec::with_capacity((m * m) as usize);
    for directed in 0..m {
        for bidirected in 0..m {
            out.push(from_masks(names, directed, bidirected)?);
        }
    }
    Ok(out)
}

/// `count` graphs over the given variables with uniformly random edge masks.
/// Deterministic in `(names, count, seed)`.
pub fn random_graphs(names: &[&str], count: usize, seed: u64) -> Result<Vec<CausalGraph>> {
    let bits = pair_count(names.len());
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let directed = rng.gen::<u64>() & mask;
        let bidirected = rng.gen::<u64>() & mask;
        out.push(from_masks(names, directed, bidirected)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_variable_catalogue_has_sixty_four_graphs_and_no_duplicates() {
        let all = all_graphs(&["a", "b", "c"]).unwrap();
        assert_eq!(all.len(), 64);
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn catalogue_contains_empty_and_complete_graphs() {
        let all = all_graphs(&["a", "b"]).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().any(|g| g.directed_edge_count() == 0 && g.bidirected_edge_count() == 0));
        assert!(all.iter().any(|g| g.directed_edge_count() == 1 && g.bidirected_edge_count() == 1));
    }

    #[test]
    fn random_graphs_are_seed_deterministic() {
        let a = random_graphs(&["a", "b", "c", "d"], 50, 7).unwrap();
        let b = random_graphs(&["a", "b", "c", "d"], 50, 7).unwrap();
        assert_eq!(a, b);
        let c = random_graphs(&["a", "b", "c", "d"], 50, 8).unwrap();
        assert_ne!(a, c);
    }
}
