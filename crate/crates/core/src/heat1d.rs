//! Backward heat conduction on `(0, π)` with Dirichlet ends.
//!
//! The forward map sends an initial temperature `f` to `u(·, T)`. Its
//! singular system is `σ_n = e^{−n²T}`, `φ_n = ψ_n = √(2/π) sin nx`, so
//! recovering `f` amplifies mode `n` by `e^{n²T}`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::optim::LinearOperator;
use crate::specfun::RngState;
use crate::spectral::{SpectralError, SpectralFilter, SpectralSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid size mismatch: expected {expected}, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("mode {mode}: amplification e^(n^2 T) is not representable and the filter keeps it")]
    DivergentMode { mode: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Samples at the interior points `x_i = iπ/(n_x+1)`, `i = 1..n_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatGrid {
    values: Vec<f64>,
}

impl HeatGrid {
    pub fn from_values(values: Vec<f64>) -> Result<Self, HeatError> {
        if values.len() < 2 {
            return Err(HeatError::InvalidParameter(format!("need n_x >= 2, got {}", values.len())));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n_x: usize, f: impl Fn(f64) -> f64) -> Result<Self, HeatError> {
        let h = PI / (n_x as f64 + 1.0);
        Self::from_values((1..=n_x).map(|i| f(i as f64 * h)).collect())
    }

    pub fn zeros(n_x: usize) -> Result<Self, HeatError> {
        Self::from_values(vec![0.0; n_x])
    }

    pub fn n_x(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        PI / (self.n_x() as f64 + 1.0)
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..=self.n_x()).map(|i| i as f64 * h).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid `L²(0, π)` norm (the zero endpoints contribute nothing).
    pub fn l2_norm(&self) -> f64 {
        (self.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

/// Observation time `T` and number of retained modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatProblem {
    t: f64,
    n_modes: usize,
}

impl HeatProblem {
    pub fn new(t: f64, n_modes: usize) -> Result<Self, HeatError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(HeatError::InvalidParameter(format!("T must be positive, got {t}")));
        }
        if n_modes == 0 {
            return Err(HeatError::InvalidParameter("n_modes must be at least 1".into()));
        }
        Ok(Self { t, n_modes })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }
}

impl Default for HeatProblem {
    fn default() -> Self {
        Self { t: 1.0, n_modes: 64 }
    }
}

/// Analytic singular system of the heat forward map; modes are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSingularSystem {
    problem: HeatProblem,
}

impl HeatSingularSystem {
    pub fn sigma(&self, n: usize) -> f64 {
        (-((n * n) as f64) * self.problem.t).exp()
    }

    pub fn phi(&self, n: usize, x: f64) -> f64 {
        (2.0 / PI).sqrt() * (n as f64 * x).sin()
    }

    pub fn n_modes(&self) -> usize {
        self.problem.n_modes
    }

    /// The system sampled on an `n_x`-point grid. Requires `n_modes <= n_x`
    /// so that the sampled modes stay orthonormal.
    pub fn on_grid(&self, n_x: usize) -> Result<HeatGridSystem, HeatError> {
        if n_x < 2 {
            return Err(HeatError::InvalidParameter(format!("need n_x >= 2, got {n_x}")));
        }
        if self.problem.n_modes > n_x {
            return Err(HeatError::InvalidParameter(format!(
                "n_modes = {} exceeds n_x = {n_x}; sampled modes would alias",
                self.problem.n_modes
            )));
        }
        let h = PI / (n_x as f64 + 1.0);
        let sigmas = (1..=self.problem.n_modes).map(|n| self.sigma(n)).collect();
        let basis =
            (1..=self.problem.n_modes).map(|n| (1..=n_x).map(|i| self.phi(n, i as f64 * h)).collect()).collect();
        Ok(HeatGridSystem { sigmas, basis, h, n_x })
    }
}

/// The heat singular system on a grid, with trapezoid inner products.
#[derive(Debug, Clone)]
pub struct HeatGridSystem {
    sigmas: Vec<f64>,
    basis: Vec<Vec<f64>>,
    h: f64,
    n_x: usize,
}

impl HeatGridSystem {
    /// Sampled `φ_n` for the 0-based mode index.
    pub fn mode(&self, index: usize) -> &[f64] {
        &self.basis[index]
    }
}

impl SpectralSystem for HeatGridSystem {
    fn rank(&self) -> usize {
        self.sigmas.len()
    }
    fn sigma(&self, n: usize) -> f64 {
        self.sigmas[n]
    }
    fn data_len(&self) -> usize {
        self.n_x
    }
    fn solution_len(&self) -> usize {
        self.n_x
    }
    fn left_coefficient(&self, n: usize, g: &[f64]) -> f64 {
        self.h * self.basis[n].iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }
    fn add_right(&self, n: usize, scale: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(&self.basis[n]) {
            *o += scale * v;
        }
    }
    fn data_norm(&self, g: &[f64]) -> f64 {
        (self.h * g.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }
}

impl LinearOperator for HeatGridSystem {
    fn domain_len(&self) -> usize {
        self.n_x
    }
    fn range_len(&self) -> usize {
        self.n_x
    }
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_x];
        for n in 0..self.sigmas.len() {
            let c = self.left_coefficient(n, f);
            self.add_right(n, self.sigmas[n] * c, &mut out);
        }
        out
    }
    // Symmetric in the Euclidean inner product as well as the trapezoid one.
    fn apply_adjoint(&self, g: &[f64]) -> Vec<f64> {
        self.apply(g)
    }
    fn norm_bound(&self) -> f64 {
        self.sigmas[0]
    }
}

pub fn heat_singular_system(prob: &HeatProblem) -> HeatSingularSystem {
    HeatSingularSystem { problem: *prob }
}

/// `u(·, T) = Σ_n e^{−n²T} ⟨f, φ_n⟩ φ_n` on the grid of `f`.
pub fn heat_forward(f: &HeatGrid, prob: &HeatProblem) -> Result<HeatGrid, HeatError> {
    let sys = heat_singular_system(prob).on_grid(f.n_x())?;
    HeatGrid::from_values(sys.apply(f.values()))
}

/// Largest `M` with `exp(−(2M−1)²) ≥ √α`, i.e. `⌊(√(−½ ln α) + 1)/2⌋`:
/// the number of odd modes a truncated SVD keeps at `T = 1`.
pub fn heat_truncation_index(alpha: f64) -> Result<usize, HeatError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HeatError::InvalidParameter(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok((0.5 * ((-0.5 * alpha.ln()).sqrt() + 1.0)).floor() as usize)
}

/// Filtered inversion `Σ_n w(σ_n)/σ_n ⟨g, φ_n⟩ φ_n`.
///
/// Fails if the filter keeps a mode whose amplification overflows.
pub fn heat_invert(g: &HeatGrid, prob: &HeatProblem, filter: &SpectralFilter) -> Result<HeatGrid, HeatError> {
    filter.validate()?;
    let sys = heat_singular_system(prob).on_grid(g.n_x())?;
    let mut out = vec![0.0; g.n_x()];
    for n in 0..sys.rank() {
        let factor = filter.inverse_factor(sys.sigma(n)).ok_or(HeatError::DivergentMode { mode: n + 1 })?;
        if factor != 0.0 {
            let c = sys.left_coefficient(n, g.values());
            sys.add_right(n, factor * c, &mut out);
        }
    }
    HeatGrid::from_values(out)
}

/// `g^δ(x_i) = g(x_i)(1 + X_i)` with independent `X_i ~ N(0, level²)`.
pub fn multiplicative_noise(g: &HeatGrid, level: f64, mut state: RngState) -> Result<(HeatGrid, RngState), HeatError> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(HeatError::InvalidParameter(format!("noise level must be nonnegative, got {level}")));
    }
    let values = g.values().iter().map(|v| v * (1.0 + state.normal(0.0, level))).collect();
    Ok((HeatGrid::from_values(values)?, state))
}
