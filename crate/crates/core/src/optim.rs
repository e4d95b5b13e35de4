//! Iterative solvers: Landweber iteration for linear equations `Kf = g`, and
//! nonlinear conjugate gradients with Armijo backtracking.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::spectral::{svd_decompose, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("Landweber step omega = {omega} must satisfy omega < 1/||K||^2 = {limit}; larger steps may diverge")]
    StepTooLarge { omega: f64, limit: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite cost or gradient at iteration {iteration}")]
    NonFinite { iteration: usize, trace: Box<IterTrace> },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A linear operator together with its adjoint and a bound on its norm.
pub trait LinearOperator {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;
    fn apply(&self, f: &[f64]) -> Vec<f64>;
    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64>;
    /// Upper estimate of the operator norm.
    fn norm_bound(&self) -> f64;
}

/// Dense matrix operator with the Euclidean inner products.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    norm: f64,
}

impl DenseOperator {
    /// Wraps `matrix`; the norm bound is its largest singular value.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, OptimError> {
        let norm = svd_decompose(&matrix)?.sigmas()[0];
        Ok(Self { matrix, norm })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn domain_len(&self) -> usize {
        self.matrix.ncols()
    }
    fn range_len(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(f)).iter().copied().collect()
    }
    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        (self.matrix.tr_mul(&DVector::from_column_slice(g))).iter().copied().collect()
    }
    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Landweber iterate and the residual norms `‖Kf^k − g‖` for `k = 0..=m`.
#[derive(Debug, Clone)]
pub struct LandweberRun {
    pub solution: Vec<f64>,
    pub residual_norms: Vec<f64>,
}

/// `m` steps of `f^k = f^{k−1} − ωK*(Kf^{k−1} − g)` from `f0`.
///
/// Refuses to run unless `0 < ω < 1/‖K‖²`, the range in which the iteration
/// is a contraction on the error.
pub fn landweber<O: LinearOperator + ?Sized>(
    op: &O,
    g: &[f64],
    omega: f64,
    m: usize,
    f0: &[f64],
) -> Result<Vec<f64>, OptimError> {
    landweber_run(op, g, omega, m, f0).map(|r| r.solution)
}

/// As [`landweber`], also recording the residual history.
pub fn landweber_run<O: LinearOperator + ?Sized>(
    op: &O,
    g: &[f64],
    omega: f64,
    m: usize,
    f0: &[f64],
) -> Result<LandweberRun, OptimError> {
    if m == 0 {
        return Err(OptimError::InvalidParameter("landweber needs m >= 1".into()));
    }
    if !(omega > 0.0) {
        return Err(OptimError::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    let nb = op.norm_bound();
    let limit = 1.0 / (nb * nb);
    if !(omega < limit) {
        return Err(OptimError::StepTooLarge { omega, limit });
    }
    if g.len() != op.range_len() {
        return Err(OptimError::DimensionMismatch { expected: op.range_len(), got: g.len() });
    }
    if f0.len() != op.domain_len() {
        return Err(OptimError::DimensionMismatch { expected: op.domain_len(), got: f0.len() });
    }
    let mut f = f0.to_vec();
    let mut residual_norms = Vec::with_capacity(m + 1);
    let mut r: Vec<f64> = op.apply(&f).iter().zip(g).map(|(a, b)| a - b).collect();
    residual_norms.push(norm2(&r));
    for _ in 0..m {
        let step = op.apply_adjoint(&r);
        for (fi, si) in f.iter_mut().zip(&step) {
            *fi -= omega * si;
        }
        r = op.apply(&f).iter().zip(g).map(|(a, b)| a - b).collect();
        residual_norms.push(norm2(&r));
    }
    Ok(LandweberRun { solution: f, residual_norms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    /// Polak–Ribière–Polyak.
    Prp,
    /// Fletcher–Reeves.
    Fr,
    /// Hestenes–Stiefel.
    Hs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub beta_rule: BetaRule,
    /// Armijo slope factor in (0, 1).
    pub gamma: f64,
    /// Backtracking shrink factor in (0, 1).
    pub kappa: f64,
    /// Initial trial step.
    pub ell0: f64,
    pub j_max: usize,
    pub k_max: usize,
    /// Optional early stop on `‖∇Φ‖`; off by default.
    pub grad_tol: Option<f64>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { beta_rule: BetaRule::Prp, gamma: 0.1, kappa: 0.5, ell0: 1.0, j_max: 40, k_max: 10_000, grad_tol: None }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |msg: String| Err(OptimError::InvalidParameter(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0,1), got {}", self.gamma));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad(format!("kappa must lie in (0,1), got {}", self.kappa));
        }
        if !(self.ell0 > 0.0 && self.ell0.is_finite()) {
            return bad(format!("ell0 must be positive, got {}", self.ell0));
        }
        if self.j_max == 0 || self.k_max == 0 {
            return bad("j_max and k_max must be at least 1".into());
        }
        Ok(())
    }
}

/// Outcome of one backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub step: f64,
    /// `true` if the Armijo condition held, `false` for the `j_max` fallback.
    pub armijo: bool,
}

/// First `ℓ ∈ {ℓ0, κℓ0, …, κ^{j_max−1}ℓ0}` with
/// `Φ(x + ℓd) < Φ(x) + γℓ ∇Φ(x)·d`; otherwise `ℓ0 κ^{j_max}`.
pub fn backtracking_line_search<F: Fn(&[f64]) -> f64>(
    cost: F,
    grad_at_point: &[f64],
    point: &[f64],
    direction: &[f64],
    cfg: &CgConfig,
) -> LineSearchResult {
    let phi0 = cost(point);
    let slope = dot(grad_at_point, direction);
    let mut trial = vec![0.0; point.len()];
    let mut ell = cfg.ell0;
    for _ in 0..cfg.j_max {
        for ((t, x), d) in trial.iter_mut().zip(point).zip(direction) {
            *t = x + ell * d;
        }
        if cost(&trial) < phi0 + cfg.gamma * ell * slope {
            return LineSearchResult { step: ell, armijo: true };
        }
        ell *= cfg.kappa;
    }
    LineSearchResult { step: ell, armijo: false }
}

/// Conjugacy parameter `β^k` from the new gradient, the previous gradient and
/// the previous direction. Returns 0 when the denominator vanishes.
pub fn beta(rule: BetaRule, grad_new: &[f64], grad_old: &[f64], dir_old: &[f64]) -> f64 {
    let y: Vec<f64> = grad_new.iter().zip(grad_old).map(|(a, b)| a - b).collect();
    let (num, den) = match rule {
        BetaRule::Prp => (dot(&y, grad_new), dot(grad_old, grad_old)),
        BetaRule::Fr => (dot(grad_new, grad_new), dot(grad_old, grad_old)),
        BetaRule::Hs => (dot(&y, grad_new), dot(&y, dir_old)),
    };
    if den.abs() < 1e-300 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iterate: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    /// Step that produced this iterate (0 for the starting point).
    pub step: f64,
    /// Whether that step satisfied the Armijo condition.
    pub armijo: bool,
}

/// Iteration history; entry 0 is the starting point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterTrace {
    pub records: Vec<IterRecord>,
}

impl IterTrace {
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("trace holds at least the starting point")
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Nonlinear conjugate gradients: `d⁰ = −∇Φ(x⁰)`; each step line-searches
/// along `d^{k−1}`, updates `x^k`, and sets `d^k = −∇Φ(x^k) + β^k d^{k−1}`.
/// Runs exactly `k_max` steps unless `grad_tol` is set.
pub fn nonlinear_cg<F, G>(cost: F, grad: G, x0: &[f64], cfg: &CgConfig) -> Result<IterTrace, OptimError>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut g = grad(&x);
    if g.len() != x.len() {
        return Err(OptimError::DimensionMismatch { expected: x.len(), got: g.len() });
    }
    let mut trace = IterTrace::default();
    let c0 = cost(&x);
    trace.records.push(IterRecord { iterate: x.clone(), cost: c0, grad_norm: norm2(&g), step: 0.0, armijo: true });
    if !c0.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(OptimError::NonFinite { iteration: 0, trace: Box::new(trace) });
    }
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    for k in 1..=cfg.k_max {
        if let Some(tol) = cfg.grad_tol {
            if trace.last().grad_norm <= tol {
                break;
            }
        }
        let ls = backtracking_line_search(&cost, &g, &x, &d, cfg);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += ls.step * di;
        }
        let g_new = grad(&x);
        let c = cost(&x);
        trace.records.push(IterRecord {
            iterate: x.clone(),
            cost: c,
            grad_norm: norm2(&g_new),
            step: ls.step,
            armijo: ls.armijo,
        });
        if !c.is_finite() || g_new.iter().any(|v| !v.is_finite()) {
            return Err(OptimError::NonFinite { iteration: k, trace: Box::new(trace) });
        }
        let b = beta(cfg.beta_rule, &g_new, &g, &d);
        for (di, gi) in d.iter_mut().zip(&g_new) {
            *di = -gi + b * *di;
        }
        g = g_new;
    }
    Ok(trace)
}
