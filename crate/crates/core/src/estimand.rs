//! Closed-form estimands over an observed covariance matrix.
//!
//! An estimand is a small expression tree whose leaves are conditional
//! covariances (or constants) and whose interior nodes are ratios, products,
//! and sums. Structural equality is derived; *extensional* equality (same
//! function of the covariance matrix) is decided numerically by evaluating
//! both sides on random positive definite probe matrices.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, VarId, VarSet};
use crate::sem::Covariance;

/// Ratio denominators smaller than this in absolute value are degenerate.
pub const DEGENERACY_EPS: f64 = 1e-10;
/// Two evaluations differing by more than this, relative, witness
/// distinctness.
pub const DISTINCTNESS_REL: f64 = 1e-6;
/// Default number of well-conditioned probes required to declare two
/// estimands extensionally equal.
pub const DEFAULT_PROBES: usize = 8;
/// Total probe draws allowed before distinctness checking gives up.
const PROBE_DRAW_BUDGET: usize = 64;

/// An estimand: a function of the observed covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimand {
    Constant(f64),
    /// `cov(a, b | given)`; empty `given` is the plain covariance.
    CondCov { a: VarId, b: VarId, given: VarSet },
    Ratio { num: Box<Estimand>, den: Box<Estimand> },
    Product(Vec<Estimand>),
    Sum(Vec<Estimand>),
}

impl Estimand {
    pub fn cond_cov(a: VarId, b: VarId, given: VarSet) -> Self {
        Estimand::CondCov { a, b, given }
    }

    pub fn ratio(num: Estimand, den: Estimand) -> Self {
        Estimand::Ratio { num: Box::new(num), den: Box::new(den) }
    }

    /// Product of factors; empty is 1, a single factor collapses to itself.
    pub fn product(mut factors: Vec<Estimand>) -> Self {
        match factors.len() {
            0 => Estimand::Constant(1.0),
            1 => factors.pop().unwrap(),
            _ => Estimand::Product(factors),
        }
    }

    /// Sum of terms; empty is 0, a single term collapses to itself.
    pub fn sum(mut terms: Vec<Estimand>) -> Self {
        match terms.len() {
            0 => Estimand::Constant(0.0),
            1 => terms.pop().unwrap(),
            _ => Estimand::Sum(terms),
        }
    }

    /// The instrumental-variable estimand for the coefficient on
    /// `x -> y` using instrument `w` and conditioning set `z`:
    /// `cov(y, w | z) / cov(x, w | z)`.
    pub fn iv_ratio(x: VarId, y: VarId, w: VarId, z: VarSet) -> Self {
        Estimand::ratio(Estimand::cond_cov(y, w, z), Estimand::cond_cov(x, w, z))
    }

    /// Evaluates against a covariance matrix. Near-zero ratio denominators
    /// (below [`DEGENERACY_EPS`]) are reported as degenerate rather than
    /// silently amplified.
    pub fn evaluate(&self, cov: &Covariance) -> Result<f64> {
        match self {
            Estimand::Constant(c) => Ok(*c),
            Estimand::CondCov { a, b, given } => cov.conditional(*a, *b, *given),
            Estimand::Ratio { num, den } => {
                let d = den.evaluate(cov)?;
                if d.abs() < DEGENERACY_EPS {
                    return Err(Error::DegenerateEvaluation(DEGENERACY_EPS));
                }
                Ok(num.evaluate(cov)? / d)
            }
            Estimand::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.evaluate(cov)?;
                }
                Ok(acc)
            }
            Estimand::Sum(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.evaluate(cov)?;
                }
                Ok(acc)
            }
        }
    }

    /// Canonical text form, e.g. `cov(z,y|x)/cov(y,y|x)`. Conditioning
    /// variables print in causal order; sums and products print as
    /// parenthesized infix in construction order.
    pub fn render(&self, g: &CausalGraph) -> String {
        match self {
            Estimand::Constant(c) => {
                if *c == c.trunc() && c.abs() < 1e15 {
                    format!("{}", *c as i64)
                } else {
                    format!("{c}")
                }
            }
            Estimand::CondCov { a, b, given } => {
                let mut s = format!("cov({},{}", g.name(*a), g.name(*b));
                if !given.is_empty() {
                    s.push('|');
                    let names: Vec<&str> = given.iter().map(|v| g.name(v)).collect();
                    s.push_str(&names.join(","));
                }
                s.push(')');
                s
            }
            Estimand::Ratio { num, den } => {
                format!("{}/{}", render_tight(num, g), render_tight(den, g))
            }
            Estimand::Product(factors) => {
                let parts: Vec<String> = factors.iter().map(|f| render_factor(f, g)).collect();
                parts.join(" * ")
            }
            Estimand::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|t| render_factor(t, g)).collect();
                parts.join(" + ")
            }
        }
    }
}

/// Operand of a ratio: anything compound gets parentheses.
fn render_tight(e: &Estimand, g: &CausalGraph) -> String {
    match e {
        Estimand::Constant(_) | Estimand::CondCov { .. } => e.render(g),
        _ => format!("({})", e.render(g)),
    }
}

/// Operand of a product or sum term: keep ratios and nested sums readable.
fn render_factor(e: &Estimand, g: &CausalGraph) -> String {
    match e {
        Estimand::Constant(_) | Estimand::CondCov { .. } => e.render(g),
        _ => format!("({})", e.render(g)),
    }
}

/// Random positive definite probe: `A A^T + 0.1 I` with standard normal `A`.
fn probe(dim: usize, rng: &mut ChaCha8Rng) -> Result<Covariance> {
    let a: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    Covariance::new(&a * a.transpose() + DMatrix::identity(dim, dim) * 0.1)
}

/// Whether two estimands are extensionally distinct over `dim`-dimensional
/// covariance matrices.
///
/// Draws random positive definite probes; a relative difference above
/// [`DISTINCTNESS_REL`] on any probe proves distinctness. Degenerate probes
/// (near-zero denominators) are redrawn; equality is declared only after
/// `probes` well-conditioned draws agree. If the draw budget runs out first,
/// the comparison is inconclusive and reported as an error, never coerced to
/// a boolean. Deterministic in `(dim, probes, seed)`.
pub fn distinct(
    a: &Estimand,
    b: &Estimand,
    dim: usize,
    probes: usize,
    seed: u64,
) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0usize;
    let mut draws = 0usize;
    while valid < probes {
        if draws >= PROBE_DRAW_BUDGET {
            return Err(Error::InconclusiveDistinctness(draws));
        }
        draws += 1;
        let cov = probe(dim, &mut rng)?;
        let (va, vb) = match (a.evaluate(&cov), b.evaluate(&cov)) {
            (Ok(va), Ok(vb)) => (va, vb),
            (Err(Error::DegenerateEvaluation(_)), _) | (_, Err(Error::DegenerateEvaluation(_))) => {
                continue;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let scale = va.abs().max(vb.abs()).max(1e-12);
        if (va - vb).abs() > DISTINCTNESS_REL * scale {
            return Ok(true);
        }
        valid += 1;
    }
    Ok(false)
}
