//! Model files: one JSON document naming the variables in causal order and
//! listing the edges present in the model.

use claro::{CausalGraph, Edge};
use serde::Deserialize;

/// On-disk model description.
///
/// ```json
/// {
///   "variables": ["x", "y", "z"],
///   "directed": [["x", "y"], ["y", "z"]],
///   "bidirected": []
/// }
/// ```
///
/// `variables` fixes the causal order; every directed edge must point from
/// an earlier name to a later one. Unknown keys are rejected.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variables: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[String; 2]>,
    #[serde(default)]
    pub bidirected: Vec<[String; 2]>,
}

impl ModelSpec {
    /// Strict parse; syntax errors carry serde's line/column location.
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("model: {e}"))
    }

    /// Validates the spec into a graph; errors name the offending entry.
    pub fn to_graph(&self) -> Result<CausalGraph, String> {
        if self.variables.is_empty() {
            return Err("variables: the list is empty".into());
        }
        let mut g = CausalGraph::new(self.variables.clone())
            .map_err(|e| format!("variables: {e}"))?;
        for (i, [tail, head]) in self.directed.iter().enumerate() {
            g = add_directed(&g, tail, head).map_err(|e| format!("directed[{i}]: {e}"))?;
        }
        for (i, [a, b]) in self.bidirected.iter().enumerate() {
            g = add_bidirected(&g, a, b).map_err(|e| format!("bidirected[{i}]: {e}"))?;
        }
        Ok(g)
    }
}

fn add_directed(g: &CausalGraph, tail: &str, head: &str) -> claro::Result<CausalGraph> {
    let (t, h) = (g.var(tail)?, g.var(head)?);
    g.with_edge(Edge::directed(t, h))
}

fn add_bidirected(g: &CausalGraph, a: &str, b: &str) -> claro::Result<CausalGraph> {
    let (a, b) = (g.var(a)?, g.var(b)?);
    g.with_edge(Edge::bidirected(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_file_round_trips() {
        let spec = ModelSpec::parse(
            r#"{"variables": ["x", "y", "z"], "directed": [["x", "y"], ["y", "z"]]}"#,
        )
        .unwrap();
        let g = spec.to_graph().unwrap();
        assert_eq!(g.var_count(), 3);
        assert_eq!(g.directed_edge_count(), 2);
        assert_eq!(g.bidirected_edge_count(), 0);
    }

    #[test]
    fn order_violation_is_positioned() {
        let spec = ModelSpec::parse(
            r#"{"variables": ["x", "y", "z"], "directed": [["x", "y"], ["z", "y"]]}"#,
        )
        .unwrap();
        let err = spec.to_graph().unwrap_err();
        assert!(err.starts_with("directed[1]:"), "{err}");
        assert!(err.contains("causal order"), "{err}");
    }

    #[test]
    fn unknown_name_is_positioned() {
        let spec =
            ModelSpec::parse(r#"{"variables": ["x", "y"], "bidirected": [["x", "q"]]}"#).unwrap();
        let err = spec.to_graph().unwrap_err();
        assert!(err.starts_with("bidirected[0]:"), "{err}");
        assert!(err.contains("unknown variable `q`"), "{err}");
    }

    #[test]
    fn empty_variable_list_is_rejected() {
        let spec = ModelSpec::parse(r#"{"variables": []}"#).unwrap();
        assert!(spec.to_graph().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ModelSpec::parse(r#"{"variables": ["x"], "undirected": []}"#).is_err());
    }
}
