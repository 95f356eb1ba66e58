//! Numeric semantics of a graph: linear-model instantiations, implied and
//! conditional covariances, and a local-identifiability oracle.
//!
//! An instantiation assigns a path coefficient to every directed edge and an
//! error covariance matrix whose off-diagonal support is exactly the
//! bidirected edge set. The implied observed covariance is
//! `(I - B)^-1 Omega (I - B)^-T` with `B` strictly lower triangular in the
//! causal order.
//!
//! [`locally_identified`] decides whether a scalar target (one coefficient or
//! a total effect) is locally pinned down by the observed covariance. It
//! knows nothing about graphical criteria: it differentiates the parameter ->
//! covariance map numerically and tests the target's gradient against the
//! null space of that Jacobian. The graphical machinery elsewhere in the
//! crate is validated against this oracle, never the other way round.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{CausalGraph, VarId, VarSet};

/// Sampled coefficient magnitudes stay in this range (sign is random), so
/// random instantiations are bounded away from degeneracy.
pub const COEFF_MAGNITUDE: (f64, f64) = (0.2, 1.5);
/// Relative step for central finite differences.
pub const FD_STEP_REL: f64 = 1e-5;
/// Two-step agreement required of the finite-difference Jacobian, relative.
pub const FD_AGREEMENT_REL: f64 = 1e-5;
/// Absolute floor below which two Jacobian entries count as agreeing.
pub const FD_AGREEMENT_ABS: f64 = 1e-9;
/// Redraws allowed when the finite-difference stencil disagrees with itself.
const FD_MAX_REDRAWS: usize = 5;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_CUTOFF_REL: f64 = 1e-8;
/// A gradient component on the Jacobian null space below this threshold
/// counts as zero, i.e. the target does not vary along the fiber.
pub const NULL_SPACE_TOL: f64 = 1e-6;
/// Default number of random trials per identifiability decision.
pub const DEFAULT_ORACLE_TRIALS: usize = 3;

/// A validated observed covariance matrix over the ambient variable order.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariance {
    m: DMatrix<f64>,
}

impl Covariance {
    /// Validates symmetry (to 1e-12, scaled) and positive definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInstantiation("covariance matrix not square".into()));
        }
        for i in 0..m.nrows() {
            for j in i + 1..m.ncols() {
                let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInstantiation(
                        "covariance matrix not symmetric".into(),
                    ));
                }
            }
        }
        let eigen = m.clone().symmetric_eigen();
        if eigen.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::InvalidInstantiation(
                "covariance matrix not positive definite".into(),
            ));
        }
        Ok(Covariance { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn entry(&self, a: VarId, b: VarId) -> f64 {
        self.m[(a.0, b.0)]
    }

    /// Covariance of `a` and `b` after conditioning on `given`, via the Schur
    /// complement `S_ab - S_az S_zz^-1 S_zb`. Empty `given` returns the plain
    /// entry. `a == b` yields a conditional variance.
    pub fn conditional(&self, a: VarId, b: VarId, given: VarSet) -> Result<f64> {
        let n = self.dim();
        for v in given.iter().chain([a, b]) {
            if v.0 >= n {
                return Err(Error::UnknownVariable(v.0));
            }
        }
        if given.contains(a) || given.contains(b) {
            return Err(Error::OverlappingQuery);
        }
        if given.is_empty() {
            return Ok(self.entry(a, b));
        }
        let zs: Vec<usize> = given.iter().map(|v| v.0).collect();
        let k = zs.len();
        let szz = DMatrix::from_fn(k, k, |i, j| self.m[(zs[i], zs[j])]);
        let szb = DVector::from_fn(k, |i, _| self.m[(zs[i], b.0)]);
        let saz = DVector::from_fn(k, |i, _| self.m[(zs[i], a.0)]);
        let chol = szz.cholesky().ok_or(Error::DegenerateConditioning)?;
        let w = chol.solve(&szb);
        Ok(self.entry(a, b) - saz.dot(&w))
    }
}

/// A graph plus numeric parameters: one coefficient per directed edge, one
/// error variance per variable, one error covariance per bidirected edge.
/// Parameter vectors are aligned with the graph's canonical edge orders.
#[derive(Clone, Debug, PartialEq)]
pub struct Instantiation {
    graph: CausalGraph,
    coeffs: Vec<f64>,
    error_vars: Vec<f64>,
    error_covs: Vec<f64>,
}

impl Instantiation {
    /// Validates counts, positive error variances, and a positive definite
    /// error covariance matrix.
    pub fn new(
        graph: CausalGraph,
        coeffs: Vec<f64>,
        error_vars: Vec<f64>,
        error_covs: Vec<f64>,
    ) -> Result<Self> {
        if coeffs.len() != graph.directed_edge_count() {
            return Err(Error::InvalidInstantiation(format!(
                "expected {} coefficients, got {}",
                graph.directed_edge_count(),
                coeffs.len()
            )));
        }
        if error_vars.len() != graph.var_count() {
            return Err(Error::InvalidInstantiation(format!(
                "expected {} error variances, got {}",
                graph.var_count(),
                error_vars.len()
            )));
        }
        if error_covs.len() != graph.bidirected_edge_count() {
            return Err(Error::InvalidInstantiation(format!(
                "expected {} error covariances, got {}",
                graph.bidirected_edge_count(),
                error_covs.len()
            )));
        }
        if error_vars.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            return Err(Error::InvalidInstantiation("error variances must be positive".into()));
        }
        let inst = Instantiation { graph, coeffs, error_vars, error_covs };
        let eigen = inst.omega().symmetric_eigen();
        if eigen.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return Err(Error::InvalidInstantiation(
                "error covariance matrix not positive definite".into(),
            ));
        }
        Ok(inst)
    }

    /// Deterministic random instantiation: coefficient and error-covariance
    /// magnitudes uniform in [`COEFF_MAGNITUDE`] with random sign, error
    /// variances made diagonally dominant over the sampled covariances so the
    /// error matrix is positive definite by construction. The same
    /// `(graph, seed)` always yields the same instantiation.
    pub fn random(graph: &CausalGraph, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| {
            let mag = rng.gen_range(COEFF_MAGNITUDE.0..=COEFF_MAGNITUDE.1);
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        };
        let coeffs: Vec<f64> =
            (0..graph.directed_edge_count()).map(|_| draw(&mut rng)).collect();
        let error_covs: Vec<f64> =
            (0..graph.bidirected_edge_count()).map(|_| draw(&mut rng)).collect();
        let n = graph.var_count();
        let mut dominance = vec![0.0f64; n];
        for (idx, (a, b)) in graph.bidirected_edges().into_iter().enumerate() {
            dominance[a.0] += error_covs[idx].abs();
            dominance[b.0] += error_covs[idx].abs();
        }
        let error_vars: Vec<f64> =
            (0..n).map(|i| 1.0 + dominance[i] + rng.gen_range(0.0..0.5)).collect();
        Instantiation { graph: graph.clone(), coeffs, error_vars, error_covs }
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, tail: VarId, head: VarId) -> Result<f64> {
        let pos = self
            .graph
            .directed_edges()
            .into_iter()
            .position(|e| e == (tail, head))
            .ok_or_else(|| {
                Error::MissingEdge(self.graph.edge_label(crate::graph::Edge::directed(tail, head)))
            })?;
        Ok(self.coeffs[pos])
    }

    /// The error covariance matrix `Omega`.
    pub fn omega(&self) -> DMatrix<f64> {
        let n = self.graph.var_count();
        let mut omega = DMatrix::zeros(n, n);
        for (i, &v) in self.error_vars.iter().enumerate() {
            omega[(i, i)] = v;
        }
        for (idx, (a, b)) in self.graph.bidirected_edges().into_iter().enumerate() {
            omega[(a.0, b.0)] = self.error_covs[idx];
            omega[(b.0, a.0)] = self.error_covs[idx];
        }
        omega
    }

    /// Flat parameter vector: coefficients, then error variances, then error
    /// covariances, each block in canonical order.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.coeffs.clone();
        p.extend_from_slice(&self.error_vars);
        p.extend_from_slice(&self.error_covs);
        p
    }
}

/// Observed covariance implied by an instantiation.
pub fn implied_covariance(inst: &Instantiation) -> Result<Covariance> {
    Covariance::new(implied_matrix(inst.graph(), &inst.params())?)
}

/// Shorthand for [`Covariance::conditional`] on an implied covariance.
pub fn conditional_cov(inst: &Instantiation, a: VarId, b: VarId, given: VarSet) -> Result<f64> {
    implied_covariance(inst)?.conditional(a, b, given)
}

/// Raw implied covariance from a flat parameter vector; shared by the public
/// constructor and the finite-difference loop, which must evaluate perturbed
/// parameter vectors without re-validation.
fn implied_matrix(g: &CausalGraph, params: &[f64]) -> Result<DMatrix<f64>> {
    let n = g.var_count();
    let edges = g.directed_edges();
    let spouses = g.bidirected_edges();
    let mut b = DMatrix::zeros(n, n);
    for (idx, (tail, head)) in edges.iter().enumerate() {
        b[(head.0, tail.0)] = params[idx];
    }
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..n {
        omega[(i, i)] = params[edges.len() + i];
    }
    for (idx, (a2, b2)) in spouses.iter().enumerate() {
        let w = params[edges.len() + n + idx];
        omega[(a2.0, b2.0)] = w;
        omega[(b2.0, a2.0)] = w;
    }
    let m = DMatrix::identity(n, n) - b;
    let lu = m.lu();
    let x = lu
        .solve(&omega)
        .ok_or_else(|| Error::NumericalFailure("coefficient matrix not invertible".into()))?;
    let sigma = lu
        .solve(&x.transpose())
        .ok_or_else(|| Error::NumericalFailure("coefficient matrix not invertible".into()))?;
    Ok(0.5 * (&sigma + sigma.transpose()))
}

/// Half-vectorization in row-major upper-triangle order: (0,0), (0,1), ...,
/// (0,n-1), (1,1), ...
fn vech(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(m[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

/// Central-difference Jacobian of `params -> vech(Sigma)`, with per-parameter
/// step `step_rel * max(1, |theta_k|)`.
fn jacobian(g: &CausalGraph, params: &[f64], step_rel: f64) -> Result<DMatrix<f64>> {
    let p = params.len();
    let n = g.var_count();
    let rows = n * (n + 1) / 2;
    let mut j = DMatrix::zeros(rows, p);
    let mut work = params.to_vec();
    for k in 0..p {
        let h = step_rel * params[k].abs().max(1.0);
        work[k] = params[k] + h;
        let up = vech(&implied_matrix(g, &work)?);
        work[k] = params[k] - h;
        let down = vech(&implied_matrix(g, &work)?);
        work[k] = params[k];
        let col = (up - down) / (2.0 * h);
        if col.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite Jacobian entry".into()));
        }
        j.set_column(k, &col);
    }
    Ok(j)
}

fn jacobians_agree(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(&x, &y)| {
        let d = (x - y).abs();
        d <= FD_AGREEMENT_ABS || d <= FD_AGREEMENT_REL * x.abs().max(y.abs())
    })
}

/// Orthonormal basis of the (numerical) null space of `j`, taken from the
/// right singular vectors whose singular values fall below
/// [`RANK_CUTOFF_REL`] times the largest. Wide matrices are padded with zero
/// rows so the full right factor is available.
fn null_space_basis(j: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let p = j.ncols();
    let square = if j.nrows() >= p {
        j.clone()
    } else {
        let mut s = DMatrix::zeros(p, p);
        s.view_mut((0, 0), (j.nrows(), p)).copy_from(j);
        s
    };
    let svd = square.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD did not produce right factor".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if !smax.is_finite() {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    let cut = RANK_CUTOFF_REL * smax;
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut {
            basis.push(vt.row(i).transpose());
        }
    }
    Ok(basis)
}

/// A scalar target for the identifiability oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentTarget {
    /// The path coefficient on one directed edge.
    Coefficient { tail: VarId, head: VarId },
    /// The total effect of `cause` on `outcome`: the sum over directed paths
    /// of the product of coefficients along each path.
    TotalEffect { cause: VarId, outcome: VarId },
}

/// Total effects of `from` on every variable, by dynamic programming along
/// the causal order. Entry `v` sums coefficient products over all directed
/// paths `from -> ... -> v`; entry `from` is 1.
pub(crate) fn forward_effects(g: &CausalGraph, coeffs: &[f64], from: VarId) -> Vec<f64> {
    let n = g.var_count();
    let edges = g.directed_edges();
    let mut eff = vec![0.0; n];
    eff[from.0] = 1.0;
    for j in from.0 + 1..n {
        let mut acc = 0.0;
        for (idx, (t, h)) in edges.iter().enumerate() {
            if h.0 == j {
                acc += coeffs[idx] * eff[t.0];
            }
        }
        eff[j] = acc;
    }
    eff
}

/// Gradient of the target with respect to the flat parameter vector. Total
/// effects depend on coefficients only; the derivative along edge `u -> v` is
/// (effect of `cause` on `u`) times (effect of `v` on `outcome`).
fn target_gradient(g: &CausalGraph, params: &[f64], target: &IdentTarget) -> DVector<f64> {
    let edges = g.directed_edges();
    let mut grad = DVector::zeros(params.len());
    match *target {
        IdentTarget::Coefficient { tail, head } => {
            let pos = edges.iter().position(|&e| e == (tail, head)).expect("validated edge");
            grad[pos] = 1.0;
        }
        IdentTarget::TotalEffect { cause, outcome } => {
            let coeffs = &params[..edges.len()];
            let from_cause = forward_effects(g, coeffs, cause);
            for (idx, &(u, v)) in edges.iter().enumerate() {
                if from_cause[u.0] != 0.0 {
                    let from_v = forward_effects(g, coeffs, v);
                    grad[idx] = from_cause[u.0] * from_v[outcome.0];
                }
            }
        }
    }
    grad
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_seed(seed: u64, trial: usize, attempt: usize) -> u64 {
    splitmix(seed ^ splitmix(trial as u64 ^ splitmix(attempt as u64)))
}

fn validate_target(g: &CausalGraph, target: &IdentTarget) -> Result<()> {
    match *target {
        IdentTarget::Coefficient { tail, head } => {
            if !g.has_directed(tail, head) {
                return Err(Error::InvalidQuery(format!(
                    "no directed edge {} in the model",
                    g.edge_label(crate::graph::Edge::directed(tail, head))
                )));
            }
        }
        IdentTarget::TotalEffect { cause, outcome } => {
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

/// Numeric local-identifiability oracle.
///
/// For each trial: draw a random instantiation, differentiate the
/// parameter -> covariance map by central differences (re-drawing up to a few
/// times if a half-step recomputation disagrees beyond tolerance), extract
/// the Jacobian's numerical null space, and require the target's gradient to
/// be orthogonal to every null direction within [`NULL_SPACE_TOL`]. Returns
/// true only if every trial agrees. Deterministic in `(g, target, trials,
/// seed)`; trials run in parallel when the `parallel` feature is on.
pub fn locally_identified(
    g: &CausalGraph,
    target: &IdentTarget,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    validate_target(g, target)?;
    let verdicts = exec::map_collect((0..trials.max(1)).collect(), |trial| {
        run_trial(g, target, seed, trial)
    });
    let mut all = true;
    for v in verdicts {
        all &= v?;
    }
    Ok(all)
}

fn run_trial(g: &CausalGraph, target: &IdentTarget, seed: u64, trial: usize) -> Result<bool> {
    for attempt in 0..FD_MAX_REDRAWS {
        let inst = Instantiation::random(g, trial_seed(seed, trial, attempt));
        let params = inst.params();
        let coarse = jacobian(g, &params, FD_STEP_REL)?;
        let fine = jacobian(g, &params, FD_STEP_REL / 2.0)?;
        if !jacobians_agree(&coarse, &fine) {
            continue;
        }
        let basis = null_space_basis(&fine)?;
        let grad = target_gradient(g, &params, target);
        let norm = grad.norm();
        if norm == 0.0 {
            return Ok(true);
        }
        let unit = grad / norm;
        return Ok(basis.iter().all(|v| unit.dot(v).abs() <= NULL_SPACE_TOL));
    }
    Err(Error::NumericalFailure(format!(
        "finite-difference stencil unstable after {FD_MAX_REDRAWS} redraws"
    )))
}
