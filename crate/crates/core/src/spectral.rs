//! Singular systems and spectral regularization.
//!
//! A regularized inverse has the form `Σ w(σ_n)/σ_n ⟨g, ψ_n⟩ φ_n` where the
//! filter `w` decides how strongly each singular component is trusted.
//! Dense matrices are decomposed with one-sided Jacobi; analytic systems
//! (such as the heat equation) implement [`SpectralSystem`] directly.

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_TOL: f64 = 1e-14;
const NEGLIGIBLE_COLUMN: f64 = 1e-250;
// Components with |⟨g, ψ_n⟩| below this fraction of ‖g‖ count as absent
// when deciding whether a zero singular value makes the problem unsolvable.
const NULL_COMPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },
    #[error("invalid filter parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component {index} has zero singular value but nonzero data; no unregularized solution exists")]
    UnsolvableComponent { index: usize },
    #[error("linear solve failed (input contains NaN or is not positive definite)")]
    SolveFailed,
}

/// Rule mapping a singular value to a weight in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFilter {
    None,
    /// Keep components with `σ² ≥ α`.
    Truncated {
        alpha: f64,
    },
    /// `σ²/(α + σ²)`.
    Tikhonov {
        alpha: f64,
    },
    /// `1 − (1 − ωσ²)^m`, the filter realized by `m` Landweber steps from zero.
    Landweber {
        omega: f64,
        m: u32,
    },
}

impl SpectralFilter {
    pub fn validate(&self) -> Result<(), SpectralError> {
        match *self {
            SpectralFilter::None => Ok(()),
            SpectralFilter::Truncated { alpha } | SpectralFilter::Tikhonov { alpha } => {
                if alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(SpectralError::InvalidParameter(format!("alpha must be positive, got {alpha}")))
                }
            }
            SpectralFilter::Landweber { omega, m } => {
                if !(omega > 0.0 && omega.is_finite()) {
                    Err(SpectralError::InvalidParameter(format!("omega must be positive, got {omega}")))
                } else if m == 0 {
                    Err(SpectralError::InvalidParameter("landweber needs m >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn weight(&self, sigma: f64) -> f64 {
        match *self {
            SpectralFilter::None => 1.0,
            SpectralFilter::Truncated { alpha } => {
                if sigma * sigma >= alpha {
                    1.0
                } else {
                    0.0
                }
            }
            SpectralFilter::Tikhonov { alpha } => tikhonov_weight(alpha, sigma),
            SpectralFilter::Landweber { omega, m } => landweber_weight(omega, m, sigma),
        }
    }

    /// `w(σ)/σ`, or `None` when `w(σ) > 0` but `1/σ` is not representable.
    pub fn inverse_factor(&self, sigma: f64) -> Option<f64> {
        match *self {
            SpectralFilter::Tikhonov { alpha } => Some(sigma / (alpha + sigma * sigma)),
            SpectralFilter::Landweber { omega, m } if sigma > 0.0 => Some(landweber_weight(omega, m, sigma) / sigma),
            _ => {
                let w = self.weight(sigma);
                if w == 0.0 {
                    Some(0.0)
                } else if sigma > 0.0 && (1.0 / sigma).is_finite() {
                    Some(w / sigma)
                } else {
                    None
                }
            }
        }
    }
}

fn tikhonov_weight(alpha: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    s2 / (alpha + s2)
}

fn landweber_weight(omega: f64, m: u32, sigma: f64) -> f64 {
    let t = omega * sigma * sigma;
    if t < 1.0 {
        // 1 − (1 − t)^m without cancellation for small t
        -(f64::from(m) * (-t).ln_1p()).exp_m1()
    } else {
        1.0 - (1.0 - t).powi(m as i32)
    }
}

/// Tikhonov filter `q(α, μ) = μ²/(α + μ²)`.
pub fn tikhonov_filter(alpha: f64, mu: f64) -> Result<f64, SpectralError> {
    SpectralFilter::Tikhonov { alpha }.validate()?;
    Ok(tikhonov_weight(alpha, mu))
}

/// A singular system viewed through its action on data.
pub trait SpectralSystem {
    /// Number of singular triples.
    fn rank(&self) -> usize;
    /// `σ_n` for `n` in `0..rank()`, nonincreasing.
    fn sigma(&self, n: usize) -> f64;
    fn data_len(&self) -> usize;
    fn solution_len(&self) -> usize;
    /// `⟨g, ψ_n⟩` in the data-space inner product.
    fn left_coefficient(&self, n: usize, g: &[f64]) -> f64;
    /// `out += scale · φ_n`.
    fn add_right(&self, n: usize, scale: f64, out: &mut [f64]);
    /// Data-space norm used for the null-component test.
    fn data_norm(&self, g: &[f64]) -> f64 {
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Dense singular system `A = U diag(σ) Vᵀ` (thin form, `p = min(m, n)` triples).
#[derive(Debug, Clone)]
pub struct SingularSystem {
    sigmas: Vec<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

impl SingularSystem {
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Columns are the left singular vectors `ψ_n`.
    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// Columns are the right singular vectors `φ_n`.
    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.left.clone();
        for (j, s) in self.sigmas.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.right.transpose()
    }
}

impl SpectralSystem for SingularSystem {
    fn rank(&self) -> usize {
        self.sigmas.len()
    }
    fn sigma(&self, n: usize) -> f64 {
        self.sigmas[n]
    }
    fn data_len(&self) -> usize {
        self.left.nrows()
    }
    fn solution_len(&self) -> usize {
        self.right.nrows()
    }
    fn left_coefficient(&self, n: usize, g: &[f64]) -> f64 {
        self.left.column(n).iter().zip(g).map(|(a, b)| a * b).sum()
    }
    fn add_right(&self, n: usize, scale: f64, out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(self.right.column(n).iter()) {
            *o += scale * v;
        }
    }
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
///
/// Singular values are returned in descending order; the first nonzero
/// component of every right vector is positive.
pub fn svd_decompose(a: &DMatrix<f64>) -> Result<SingularSystem, SpectralError> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(SpectralError::Empty);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let (sigmas, mut left, mut right) = if m >= n {
        jacobi_tall(a)?
    } else {
        let (s, u, v) = jacobi_tall(&a.transpose())?;
        (s, v, u)
    };
    for j in 0..sigmas.len() {
        let col = right.column(j);
        let scale = col.amax();
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-12 * scale) {
            if *first < 0.0 {
                right.column_mut(j).neg_mut();
                left.column_mut(j).neg_mut();
            }
        }
    }
    Ok(SingularSystem { sigmas, left, right })
}

type Triplet = (Vec<f64>, DMatrix<f64>, DMatrix<f64>);

// Jacobi on an m×n matrix with m ≥ n. Returns (σ, U m×n, V n×n).
fn jacobi_tall(a: &DMatrix<f64>) -> Result<Triplet, SpectralError> {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j).iter().copied().collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    // Columns whose squared norm falls below this are exact zeros for all
    // practical purposes; rotating them only churns denormals.
    let floor = a.norm_squared() * NEGLIGIBLE_COLUMN;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&w[p], &w[q]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for i in 0..m {
                        al += wp[i] * wp[i];
                        be += wq[i] * wq[i];
                        ga += wp[i] * wq[i];
                    }
                    (al, be, ga)
                };
                if alpha <= floor || beta <= floor || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                if !zeta.is_finite() {
                    continue;
                }
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotated = true;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpectralError::NotConverged { sweeps: JACOBI_MAX_SWEEPS });
    }

    let norms: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(m, n);
    let mut vv = DMatrix::zeros(n, n);
    let mut sigmas = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigmas.push(s);
        for i in 0..n {
            vv[(i, dst)] = v[src][i];
        }
        if s * s > floor {
            for i in 0..m {
                u[(i, dst)] = w[src][i] / s;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut u, &missing);
    Ok((sigmas, u, vv))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

// Fills the listed columns with unit vectors orthogonal to all other columns.
fn complete_orthonormal(u: &mut DMatrix<f64>, missing: &[usize]) {
    let m = u.nrows();
    for &col in missing {
        for e in 0..m {
            let mut cand = DVector::zeros(m);
            cand[e] = 1.0;
            for _ in 0..2 {
                for j in 0..u.ncols() {
                    if j == col {
                        continue;
                    }
                    let d = u.column(j).dot(&cand);
                    cand.axpy(-d, &u.column(j).into_owned(), 1.0);
                }
            }
            let nrm = cand.norm();
            if nrm > 0.5 {
                u.set_column(col, &(cand / nrm));
                break;
            }
        }
    }
}

/// `Σ_n w(σ_n)/σ_n ⟨g, ψ_n⟩ φ_n`.
pub fn apply_filtered_inverse<S: SpectralSystem + ?Sized>(
    system: &S,
    filter: &SpectralFilter,
    g: &[f64],
) -> Result<Vec<f64>, SpectralError> {
    filter.validate()?;
    if g.len() != system.data_len() {
        return Err(SpectralError::DimensionMismatch { expected: system.data_len(), got: g.len() });
    }
    let g_norm = system.data_norm(g);
    let mut out = vec![0.0; system.solution_len()];
    for n in 0..system.rank() {
        let sigma = system.sigma(n);
        let factor = match filter.inverse_factor(sigma) {
            Some(f) => f,
            None => {
                let c = system.left_coefficient(n, g);
                if c.abs() > NULL_COMPONENT_TOL * g_norm {
                    return Err(SpectralError::UnsolvableComponent { index: n });
                }
                continue;
            }
        };
        if factor == 0.0 {
            continue;
        }
        let c = system.left_coefficient(n, g);
        system.add_right(n, factor * c, &mut out);
    }
    Ok(out)
}

/// `x^α = (αE + AᵀA)⁻¹ Aᵀ b` by Cholesky factorization.
pub fn tikhonov_solve_matrix(a: &DMatrix<f64>, b: &[f64], alpha: f64) -> Result<Vec<f64>, SpectralError> {
    SpectralFilter::Tikhonov { alpha }.validate()?;
    if b.len() != a.nrows() {
        return Err(SpectralError::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    let at = a.transpose();
    let mut normal = &at * a;
    for i in 0..normal.nrows() {
        normal[(i, i)] += alpha;
    }
    let rhs = at * DVector::from_column_slice(b);
    let chol = Cholesky::new(normal).ok_or(SpectralError::SolveFailed)?;
    let x = chol.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::SolveFailed);
    }
    Ok(x.iter().copied().collect())
}
