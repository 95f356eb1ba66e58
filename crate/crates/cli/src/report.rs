//! Report rendering. The human-readable form is a fixed sequence of
//! sections; the machine-readable form is versioned JSON carrying the same
//! content (every number shown to a human is present in the JSON).

use claro::estimand::Estimand;
use claro::identification::IvPair;
use claro::robustness::{Assumption, Query, RobustnessReport, Status};
use claro::{CausalGraph, VarSet};
use serde_json::{json, Value};

/// Bumped whenever the JSON layout changes shape.
const REPORT_VERSION: u64 = 1;

pub fn human(r: &RobustnessReport) -> String {
    let g = &r.graph;
    let mut out = String::new();

    out.push_str("STATUS\n");
    out.push_str(&format!("  {}: {}\n", r.query.render(g), r.status));

    out.push_str("\nMSAS\n");
    if r.msas.is_empty() {
        out.push_str("  (none)\n");
    }
    for m in &r.msas {
        let members: Vec<String> = m.assumptions.iter().map(|a| a.render(g)).collect();
        out.push_str(&format!(
            "  - {{{}}}  =>  {}\n",
            members.join(", "),
            m.estimand.render(g)
        ));
    }

    out.push_str("\nMAXIMAL IV-PAIRS\n");
    if r.maximal_pairs.is_empty() {
        out.push_str("  (none)\n");
    }
    for (pair, estimand) in &r.maximal_pairs {
        out.push_str(&format!(
            "  - instrument {}, given {}  =>  {}\n",
            g.name(pair.instrument),
            render_set(pair.given, g),
            estimand.render(g)
        ));
    }

    out.push_str("\nDEGREES\n");
    match r.degrees {
        None => out.push_str("  (none)\n"),
        Some(d) => {
            out.push_str(&format!("  m  = {}  minimal identifying assumption sets\n", d.m));
            out.push_str(&format!("  k  = {}  distinct estimand classes\n", d.k));
            out.push_str(&format!("  df = {}  independent testable constraints\n", d.df));
        }
    }

    out.push_str("\nCONSTRAINTS\n");
    if r.constraints.is_empty() {
        out.push_str("  (none)\n");
    }
    for (lhs, rhs) in &r.constraints {
        out.push_str(&format!("  - {} == {}\n", lhs.render(g), rhs.render(g)));
    }

    out.push_str("\nRELEVANCE\n");
    if r.relevance.is_empty() {
        out.push_str("  (none)\n");
    }
    for (a, relevant) in &r.relevance {
        let verdict = if *relevant { "relevant  " } else { "irrelevant" };
        out.push_str(&format!("  {} {}\n", verdict, a.render(g)));
    }

    out.push_str("\nRELEVANT SUBMODEL\n");
    match &r.submodel {
        None => out.push_str("  (none)\n"),
        Some(s) => {
            out.push_str(&format!("  variables: {}\n", s.graph.names().join(", ")));
            out.push_str(&format!("  directed: {}\n", render_edges(s.graph.directed_edges(), "->", &s.graph)));
            out.push_str(&format!("  bidirected: {}\n", render_edges(s.graph.bidirected_edges(), "<->", &s.graph)));
            let retained: Vec<String> = s.retained.iter().map(|a| a.render(g)).collect();
            if retained.is_empty() {
                out.push_str("  retained: (none)\n");
            } else {
                out.push_str(&format!("  retained: {}\n", retained.join(", ")));
            }
        }
    }

    out.push_str("\nCAVEATS\n");
    if r.caveats.is_empty() {
        out.push_str("  (none)\n");
    }
    for c in &r.caveats {
        out.push_str(&format!("  - {c}\n"));
    }

    out
}

fn render_set(set: VarSet, g: &CausalGraph) -> String {
    let names: Vec<&str> = set.iter().map(|v| g.name(v)).collect();
    format!("{{{}}}", names.join(", "))
}

fn render_edges(edges: Vec<(claro::VarId, claro::VarId)>, arrow: &str, g: &CausalGraph) -> String {
    if edges.is_empty() {
        return "(none)".into();
    }
    let parts: Vec<String> =
        edges.iter().map(|&(a, b)| format!("{}{}{}", g.name(a), arrow, g.name(b))).collect();
    parts.join(", ")
}

/// The versioned JSON report. Serialization uses sorted object keys, so the
/// byte output is a pure function of the analysis result.
pub fn machine(r: &RobustnessReport) -> Value {
    let g = &r.graph;
    json!({
        "report_version": REPORT_VERSION,
        "model": graph_json(g),
        "query": query_json(&r.query, g),
        "status": match r.status {
            Status::Identified => "identified",
            Status::NotIdentified => "not_identified",
        },
        "status_text": r.status.to_string(),
        "msas": r.msas.iter().map(|m| json!({
            "assumptions": m.assumptions.iter().map(|a| assumption_json(a, g)).collect::<Vec<_>>(),
            "estimand": estimand_json(&m.estimand, g),
        })).collect::<Vec<_>>(),
        "maximal_iv_pairs": r.maximal_pairs.iter().map(|(p, e)| pair_json(p, e, g)).collect::<Vec<_>>(),
        "degrees": r.degrees.map(|d| json!({"m": d.m, "k": d.k, "df": d.df})),
        "constraints": r.constraints.iter().map(|(lhs, rhs)| json!({
            "lhs": estimand_json(lhs, g),
            "rhs": estimand_json(rhs, g),
        })).collect::<Vec<_>>(),
        "relevance": r.relevance.iter().map(|(a, relevant)| json!({
            "assumption": assumption_json(a, g),
            "relevant": relevant,
        })).collect::<Vec<_>>(),
        "relevant_submodel": r.submodel.as_ref().map(|s| json!({
            "graph": graph_json(&s.graph),
            "retained": s.retained.iter().map(|a| assumption_json(a, g)).collect::<Vec<_>>(),
        })),
        "caveats": r.caveats,
    })
}

/// `machine` rendered to bytes: pretty-printed, trailing newline.
pub fn machine_bytes(r: &RobustnessReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&machine(r)).expect("report serialization");
    bytes.push(b'\n');
    bytes
}

fn graph_json(g: &CausalGraph) -> Value {
    json!({
        "variables": g.names(),
        "directed": g.directed_edges().iter()
            .map(|&(t, h)| json!([g.name(t), g.name(h)])).collect::<Vec<_>>(),
        "bidirected": g.bidirected_edges().iter()
            .map(|&(a, b)| json!([g.name(a), g.name(b)])).collect::<Vec<_>>(),
    })
}

fn query_json(q: &Query, g: &CausalGraph) -> Value {
    match *q {
        Query::Edge(t) => json!({
            "kind": "edge",
            "tail": g.name(t.tail),
            "head": g.name(t.head),
            "text": q.render(g),
        }),
        Query::TotalEffect { cause, outcome } => json!({
            "kind": "total_effect",
            "cause": g.name(cause),
            "outcome": g.name(outcome),
            "text": q.render(g),
        }),
    }
}

fn assumption_json(a: &Assumption, g: &CausalGraph) -> Value {
    match *a {
        Assumption::ZeroCoefficient { tail, head } => json!({
            "kind": "zero_coefficient",
            "tail": g.name(tail),
            "head": g.name(head),
            "text": a.render(g),
        }),
        Assumption::ZeroErrorCovariance { a: x, b: y } => json!({
            "kind": "zero_error_covariance",
            "a": g.name(x),
            "b": g.name(y),
            "text": a.render(g),
        }),
    }
}

fn pair_json(p: &IvPair, e: &Estimand, g: &CausalGraph) -> Value {
    json!({
        "instrument": g.name(p.instrument),
        "given": p.given.iter().map(|v| g.name(v)).collect::<Vec<_>>(),
        "estimand": estimand_json(e, g),
    })
}

fn estimand_json(e: &Estimand, g: &CausalGraph) -> Value {
    json!({
        "text": e.render(g),
        "tree": estimand_tree(e, g),
    })
}

fn estimand_tree(e: &Estimand, g: &CausalGraph) -> Value {
    match e {
        Estimand::Constant(c) => json!({"op": "constant", "value": c}),
        Estimand::CondCov { a, b, given } => json!({
            "op": "cond_cov",
            "a": g.name(*a),
            "b": g.name(*b),
            "given": given.iter().map(|v| g.name(v)).collect::<Vec<_>>(),
        }),
        Estimand::Ratio { num, den } => json!({
            "op": "ratio",
            "num": estimand_tree(num, g),
            "den": estimand_tree(den, g),
        }),
        Estimand::Product(factors) => json!({
            "op": "product",
            "factors": factors.iter().map(|f| estimand_tree(f, g)).collect::<Vec<_>>(),
        }),
        Estimand::Sum(terms) => json!({
            "op": "sum",
            "terms": terms.iter().map(|t| estimand_tree(t, g)).collect::<Vec<_>>(),
        }),
    }
}
