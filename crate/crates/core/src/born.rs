//! Inverse Born and inverse Rytov series for radial diffuse optical
//! tomography on a disk.
//!
//! The absorption is `α = k²(1 + η(r))` on a disk of radius `R` with the
//! Robin condition `u + ℓ∂_r u = 0`. Source mode `l` is `e^{ilθ}δ(r − R)/r`
//! and the field is read at `(R, θ = 0)`, so every datum is real. The
//! forward series `φ = Σ K_n η^{⊗n}` is inverted term by term with a
//! truncated pseudoinverse of the discrete `K₁`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use thiserror::Error;

use crate::specfun::{bessel_derivatives, bessel_i, bessel_k, RngState, SpecFunError};
use crate::spectral::{svd_decompose, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BornError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interface system for mode {mode} is singular")]
    Singular { mode: usize },
    #[error("reference field vanishes for mode {mode}")]
    ZeroReference { mode: usize },
    #[error("non-finite value in mode {mode}")]
    NonFinite { mode: usize },
    #[error(transparent)]
    Bessel(#[from] SpecFunError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Geometry, optical parameters and discretization of the radial problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialDotConfig {
    /// Background wavenumber, `α₀ = k²`.
    pub k: f64,
    /// Robin length `ℓ`.
    pub ell: f64,
    /// Disk radius `R`.
    pub radius: f64,
    /// Target radius `R_a`.
    pub target_radius: f64,
    /// Target contrast `η_a`.
    pub eta_a: f64,
    /// Radial samples; nodes are `r_i = iR/N_r`, `i = 1..N_r`.
    pub n_r: usize,
    /// Source modes `l = 1..M_S`.
    pub m_s: usize,
    /// Highest Bessel order used.
    pub n_max: usize,
}

impl Default for RadialDotConfig {
    fn default() -> Self {
        Self { k: 1.0, ell: 1.0, radius: 1.0, target_radius: 0.5, eta_a: 0.2, n_r: 128, m_s: 23, n_max: 23 }
    }
}

impl RadialDotConfig {
    pub fn validate(&self) -> Result<(), BornError> {
        let bad = |m: String| Err(BornError::InvalidConfig(m));
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("k must be positive, got {}", self.k));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return bad(format!("ell must be positive, got {}", self.ell));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("R must be positive, got {}", self.radius));
        }
        if !(self.target_radius > 0.0 && self.target_radius < self.radius) {
            return bad(format!("need 0 < R_a < R, got R_a = {}", self.target_radius));
        }
        if !(self.eta_a >= -1.0 && self.eta_a.is_finite()) {
            return bad(format!("eta_a must be >= -1, got {}", self.eta_a));
        }
        if self.n_r < 2 {
            return bad(format!("N_r must be at least 2, got {}", self.n_r));
        }
        if self.m_s == 0 {
            return bad("M_S must be at least 1".into());
        }
        if self.n_max < self.m_s {
            return bad(format!("n_max = {} cannot resolve M_S = {} modes", self.n_max, self.m_s));
        }
        Ok(())
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.n_r as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dr = self.dr();
        (1..=self.n_r).map(|i| i as f64 * dr).collect()
    }

    /// Interior wavenumber `k√(1 + η_a)`.
    pub fn k_a(&self) -> f64 {
        self.k * (1.0 + self.eta_a).sqrt()
    }

    /// Number of nodes with `r_i ≤ R_a`.
    pub fn target_nodes(&self) -> usize {
        let dr = self.dr();
        (1..=self.n_r).take_while(|&i| i as f64 * dr <= self.target_radius * (1.0 + 1e-12)).count()
    }

    /// The true piecewise-constant contrast sampled on the nodes.
    pub fn target_profile(&self) -> Vec<f64> {
        let m = self.target_nodes();
        (0..self.n_r).map(|i| if i < m { self.eta_a } else { 0.0 }).collect()
    }
}

/// Coefficients of scalar series reversion: if `y = Σ a_k x^k` then
/// `x = Σ A_k y^k + O(y^{N+1})`. Missing `a_k` are zero.
pub fn series_reversion(a: &[f64], n: usize) -> Result<Vec<f64>, BornError> {
    let a1 = a.first().copied().unwrap_or(0.0);
    if a1 == 0.0 || !a1.is_finite() {
        return Err(BornError::InvalidArgument("a_1 must be nonzero".into()));
    }
    let coef = |i: usize| a.get(i - 1).copied().unwrap_or(0.0);
    let mut out = vec![1.0 / a1];
    for order in 2..=n {
        let mut acc = 0.0;
        for (m, group) in compositions(order).iter().enumerate() {
            let inner: f64 = group.iter().map(|c| c.iter().map(|&i| coef(i)).product::<f64>()).sum();
            acc += out[m] * inner;
        }
        out.push(-acc * out[0].powi(order as i32));
    }
    out.truncate(n);
    Ok(out)
}

/// Ordered compositions of `n` into `m` positive parts, lexicographic.
pub fn compositions_into(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=n - (m - 1) {
            prefix.push(first);
            rec(n - first, m - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m >= 1 && m <= n {
        rec(n, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// Compositions of `n` grouped by part count `m = 1..n−1`; the all-ones
/// composition is excluded. Empty for `n < 2`.
pub fn compositions(n: usize) -> Vec<Vec<Vec<usize>>> {
    (1..n).map(|m| compositions_into(n, m)).collect()
}

/// Bessel data for one angular order.
#[derive(Debug, Clone, Copy)]
struct ModeConstants {
    order: i32,
    /// `(K_n(kR) + kℓK′_n(kR)) / (I_n(kR) + kℓI′_n(kR))`
    d_tilde: f64,
    /// `K_n(kR) − d̃ I_n(kR)` in Wronskian form, `ℓ / (R (I_n + kℓI′_n))`.
    h_boundary: f64,
}

fn mode_constants(order: i32, cfg: &RadialDotConfig) -> Result<ModeConstants, BornError> {
    let kr = cfg.k * cfg.radius;
    let (ip, kp) = bessel_derivatives(order, kr)?;
    let di = bessel_i(order, kr)? + cfg.k * cfg.ell * ip;
    let dk = bessel_k(order, kr)? + cfg.k * cfg.ell * kp;
    Ok(ModeConstants { order, d_tilde: dk / di, h_boundary: cfg.ell / (cfg.radius * di) })
}

impl ModeConstants {
    /// `K_n(kρ) − d̃ I_n(kρ)`, the solution satisfying the Robin condition.
    fn h(&self, rho: f64, cfg: &RadialDotConfig) -> Result<f64, BornError> {
        if rho == cfg.radius {
            return Ok(self.h_boundary);
        }
        Ok(bessel_k(self.order, cfg.k * rho)? - self.d_tilde * bessel_i(self.order, cfg.k * rho)?)
    }
}

/// Radial Green's function
/// `g_n(r1, r2) = K_n(k max)I_n(k min) − d̃_n I_n(kr1)I_n(kr2)`,
/// evaluated as `I_n(k min)(K_n(k max) − d̃_n I_n(k max))`.
pub fn greens_radial(n: i32, r1: f64, r2: f64, cfg: &RadialDotConfig) -> Result<f64, BornError> {
    if !(r1 > 0.0 && r2 > 0.0 && r1 <= cfg.radius && r2 <= cfg.radius) {
        return Err(BornError::InvalidArgument(format!("radii must lie in (0, R], got {r1}, {r2}")));
    }
    let mc = mode_constants(n, cfg)?;
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Ok(bessel_i(n, cfg.k * lo)? * mc.h(hi, cfg)?)
}

/// `∂g_n/∂r1` for `r1 > r2`.
pub fn greens_radial_dr1(n: i32, r1: f64, r2: f64, cfg: &RadialDotConfig) -> Result<f64, BornError> {
    if !(r2 > 0.0 && r1 > r2 && r1 <= cfg.radius) {
        return Err(BornError::InvalidArgument(format!("need 0 < r2 < r1 <= R, got {r1}, {r2}")));
    }
    let mc = mode_constants(n, cfg)?;
    let (ip, kp) = bessel_derivatives(n, cfg.k * r1)?;
    Ok(bessel_i(n, cfg.k * r2)? * cfg.k * (kp - mc.d_tilde * ip))
}

/// Interior and exterior coefficients of the field with a homogeneous
/// target: `a I_n(k_a r)` inside `R_a`, and `I_n(kr)K_n(kR) + bK_n(kr) + cI_n(kr)` outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `c + d` with `d = d̃ I_n(kR)`; equals 0 without a target.
    pub c_shift: f64,
}

fn interface_matrix(n: i32, cfg: &RadialDotConfig) -> Result<(Matrix3<f64>, [f64; 4]), BornError> {
    let (k, ka, ra, r) = (cfg.k, cfg.k_a(), cfg.target_radius, cfg.radius);
    let (ia, ka_) = (bessel_i(n, ka * ra)?, bessel_i(n, k * ra)?);
    let kra = bessel_k(n, k * ra)?;
    let (iap, _) = if ka > 0.0 { bessel_derivatives(n, ka * ra)? } else { (0.0, 0.0) };
    let (ip_a, kp_a) = bessel_derivatives(n, k * ra)?;
    let (ip_r, kp_r) = bessel_derivatives(n, k * r)?;
    let (i_r, k_r) = (bessel_i(n, k * r)?, bessel_k(n, k * r)?);
    let m = Matrix3::new(
        ia,
        -kra,
        -ka_,
        ka * iap,
        -k * kp_a,
        -k * ip_a,
        0.0,
        k_r + k * cfg.ell * kp_r,
        i_r + k * cfg.ell * ip_r,
    );
    Ok((m, [i_r, k_r, ka_, ip_a]))
}

/// Solves the interface/boundary system for angular order `n`.
///
/// The unknowns are `(a, b, c + d)`; in those variables the right-hand side
/// is `(I_n(kR_a), kI′_n(kR_a), 0)·(K_n(kR) − d)`, and `K_n(kR) − d` has the
/// cancellation-free form `ℓ/(R(I_n(kR) + kℓI′_n(kR)))`. Columns are
/// equilibrated before elimination because `I_n` and `K_n` differ by many
/// orders of magnitude at high order.
pub fn appendix_coefficients(n: i32, cfg: &RadialDotConfig) -> Result<AppendixCoefficients, BornError> {
    cfg.validate()?;
    let mc = mode_constants(n, cfg)?;
    let (m, [i_r, _, i_ka, ip_ka]) = interface_matrix(n, cfg)?;
    let s = mc.h_boundary;
    let rhs = Vector3::new(i_ka * s, cfg.k * ip_ka * s, 0.0);
    let mut scale = [0.0; 3];
    let mut scaled = m;
    for (j, sj) in scale.iter_mut().enumerate() {
        let c = m.column(j).amax();
        *sj = if c > 0.0 { c } else { 1.0 };
        scaled.column_mut(j).scale_mut(1.0 / *sj);
    }
    let sol = scaled.lu().solve(&rhs).ok_or(BornError::Singular { mode: n as usize })?;
    let (a, b, c_shift) = (sol[0] / scale[0], sol[1] / scale[1], sol[2] / scale[2]);
    if !(a.is_finite() && b.is_finite() && c_shift.is_finite()) {
        return Err(BornError::NonFinite { mode: n as usize });
    }
    let d = mc.d_tilde * i_r;
    Ok(AppendixCoefficients { a, b, c: c_shift - d, c_shift })
}

/// Residual of the original interface system at the returned coefficients,
/// relative to `‖M‖‖x‖ + ‖rhs‖`. The third right-hand entry is
/// `−(kℓI_n(kR)K′_n(kR) + I_n(kR)K_n(kR))`, the sign for which the
/// target-free field equals the incident one.
pub fn appendix_residual(n: i32, coef: &AppendixCoefficients, cfg: &RadialDotConfig) -> Result<f64, BornError> {
    let (m, [i_r, k_r, i_ka, ip_ka]) = interface_matrix(n, cfg)?;
    let (_, kp_r) = bessel_derivatives(n, cfg.k * cfg.radius)?;
    let rhs = Vector3::new(i_ka * k_r, cfg.k * ip_ka * k_r, -(cfg.k * cfg.ell * i_r * kp_r + i_r * k_r));
    let x = Vector3::new(coef.a, coef.b, coef.c);
    Ok((m * x - rhs).norm() / (m.norm() * x.norm() + rhs.norm()))
}

/// Boundary data `φ_l = u₀ − u` at `(R, 0)` for `l = 1..M_S`, i.e.
/// `−((d_l + c_l)I_l(kR) + b_l K_l(kR))`.
pub fn forward_phi(cfg: &RadialDotConfig) -> Result<Vec<f64>, BornError> {
    cfg.validate()?;
    (1..=cfg.m_s as i32)
        .map(|l| {
            let coef = appendix_coefficients(l, cfg)?;
            let kr = cfg.k * cfg.radius;
            Ok(-(coef.c_shift * bessel_i(l, kr)? + coef.b * bessel_k(l, kr)?))
        })
        .collect()
}

/// Incident field at the detector, `u₀ = g_l(R, R)`, per mode.
pub fn boundary_u0(cfg: &RadialDotConfig) -> Result<Vec<f64>, BornError> {
    cfg.validate()?;
    (1..=cfg.m_s as i32)
        .map(|l| {
            let mc = mode_constants(l, cfg)?;
            Ok(bessel_i(l, cfg.k * cfg.radius)? * mc.h_boundary)
        })
        .collect()
}

/// A multilinear forward map `(a¹, …, aⁿ) ↦ data` of any order `n ≥ 1`.
pub trait MultilinearForward {
    fn data_len(&self) -> usize;
    fn profile_len(&self) -> usize;
    /// Order is `profiles.len()`.
    fn term(&self, profiles: &[&[f64]]) -> Vec<f64>;
}

/// Discrete Born operators on the radial grid.
///
/// `K₁(a)_i = k²Δr Σ_n g(r_i, r_n) r_n u₀(r_n) a_n` and
/// `K_n(a¹…aⁿ)_i = −k²Δr Σ_j g(r_i, r_j) r_j aⁿ_j K_{n−1}(a¹…a^{n−1})_j`;
/// the datum is the value at `r = R`.
#[derive(Debug, Clone)]
pub struct DiscreteBorn {
    cfg: RadialDotConfig,
    nodes: Vec<f64>,
    /// `I_l(k r_i)` per mode.
    i_vals: Vec<Vec<f64>>,
    /// `K_l(k r_i) − d̃_l I_l(k r_i)` per mode.
    h_vals: Vec<Vec<f64>>,
    /// Incident field `g_l(r_i, R)` per mode.
    u0: Vec<Vec<f64>>,
}

impl DiscreteBorn {
    pub fn new(cfg: &RadialDotConfig) -> Result<Self, BornError> {
        cfg.validate()?;
        let nodes = cfg.nodes();
        let mut i_vals = Vec::with_capacity(cfg.m_s);
        let mut h_vals = Vec::with_capacity(cfg.m_s);
        let mut u0 = Vec::with_capacity(cfg.m_s);
        for l in 1..=cfg.m_s as i32 {
            let mc = mode_constants(l, cfg)?;
            let iv: Vec<f64> = nodes.iter().map(|&r| bessel_i(l, cfg.k * r)).collect::<Result<_, _>>()?;
            let mut hv: Vec<f64> = nodes[..cfg.n_r - 1].iter().map(|&r| mc.h(r, cfg)).collect::<Result<_, _>>()?;
            hv.push(mc.h_boundary);
            let uv: Vec<f64> = iv.iter().map(|v| v * mc.h_boundary).collect();
            if iv.iter().chain(&hv).any(|v| !v.is_finite()) {
                return Err(BornError::NonFinite { mode: l as usize });
            }
            i_vals.push(iv);
            h_vals.push(hv);
            u0.push(uv);
        }
        Ok(Self { cfg: *cfg, nodes, i_vals, h_vals, u0 })
    }

    pub fn config(&self) -> &RadialDotConfig {
        &self.cfg
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Incident field on the nodes for mode index `l − 1`.
    pub fn u0_nodes(&self, mode: usize) -> &[f64] {
        &self.u0[mode]
    }

    /// `u₀` at the detector per mode.
    pub fn u0_boundary(&self) -> Vec<f64> {
        self.u0.iter().map(|u| u[self.cfg.n_r - 1]).collect()
    }

    /// `g_l(r_i, r_j)` for 0-based node and mode indices.
    pub fn green(&self, mode: usize, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.i_vals[mode][lo] * self.h_vals[mode][hi]
    }

    /// `Σ_j g(r_i, r_j) r_j c_j` for all `i`, by split prefix sums.
    fn green_apply(&self, mode: usize, c: &[f64]) -> Vec<f64> {
        let (iv, hv) = (&self.i_vals[mode], &self.h_vals[mode]);
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        let mut lower = 0.0;
        for i in 0..n {
            lower += iv[i] * self.nodes[i] * c[i];
            out[i] = hv[i] * lower;
        }
        let mut upper = 0.0;
        for i in (0..n).rev() {
            out[i] += iv[i] * upper;
            upper += hv[i] * self.nodes[i] * c[i];
        }
        out
    }

    /// Interior fields `K_n(a¹…aⁿ)` on all nodes, per mode.
    pub fn field(&self, profiles: &[&[f64]]) -> Vec<Vec<f64>> {
        assert!(!profiles.is_empty(), "need at least one profile");
        assert!(profiles.iter().all(|p| p.len() == self.cfg.n_r), "profile length must equal N_r");
        let w = self.cfg.k * self.cfg.k * self.cfg.dr();
        (0..self.cfg.m_s)
            .map(|mode| {
                let c: Vec<f64> = self.u0[mode].iter().zip(profiles[0]).map(|(u, a)| u * a).collect();
                let mut v: Vec<f64> = self.green_apply(mode, &c).into_iter().map(|x| w * x).collect();
                for a in &profiles[1..] {
                    let c: Vec<f64> = v.iter().zip(*a).map(|(x, y)| x * y).collect();
                    v = self.green_apply(mode, &c).into_iter().map(|x| -w * x).collect();
                }
                v
            })
            .collect()
    }

    /// The dense `M_S × N_r` matrix of `K₁` at the detector.
    pub fn k1_matrix(&self) -> DMatrix<f64> {
        let w = self.cfg.k * self.cfg.k * self.cfg.dr();
        DMatrix::from_fn(self.cfg.m_s, self.cfg.n_r, |l, j| w * self.nodes[j] * self.u0[l][j] * self.u0[l][j])
    }
}

impl MultilinearForward for DiscreteBorn {
    fn data_len(&self) -> usize {
        self.cfg.m_s
    }
    fn profile_len(&self) -> usize {
        self.cfg.n_r
    }
    fn term(&self, profiles: &[&[f64]]) -> Vec<f64> {
        self.field(profiles).into_iter().map(|v| v[self.cfg.n_r - 1]).collect()
    }
}

/// Order-`n` Born datum `K(n, a¹, …, aⁿ)` with `n = profiles.len()`.
pub fn born_forward_term(profiles: &[&[f64]], cfg: &RadialDotConfig) -> Result<Vec<f64>, BornError> {
    if profiles.is_empty() || profiles.iter().any(|p| p.len() != cfg.n_r) {
        return Err(BornError::InvalidArgument(format!("need at least one profile of length N_r = {}", cfg.n_r)));
    }
    Ok(DiscreteBorn::new(cfg)?.term(profiles))
}

/// Rytov forward terms `J_n(a¹…aⁿ) = Σ_m (1/m) Σ_{i₁+…+i_m=n} Π_b K_{i_b}(block_b)/u₀`,
/// with the arguments split into contiguous blocks.
#[derive(Debug, Clone)]
pub struct RytovForward<'a> {
    born: &'a DiscreteBorn,
    u0: Vec<f64>,
}

impl<'a> RytovForward<'a> {
    pub fn new(born: &'a DiscreteBorn) -> Result<Self, BornError> {
        let u0 = born.u0_boundary();
        if let Some(mode) = u0.iter().position(|&u| u == 0.0) {
            return Err(BornError::ZeroReference { mode: mode + 1 });
        }
        Ok(Self { born, u0 })
    }

    /// `J₁` as a dense matrix: rows of `K₁` divided by `u₀`.
    pub fn j1_matrix(&self) -> DMatrix<f64> {
        let mut m = self.born.k1_matrix();
        for (l, u) in self.u0.iter().enumerate() {
            m.row_mut(l).scale_mut(1.0 / u);
        }
        m
    }
}

impl MultilinearForward for RytovForward<'_> {
    fn data_len(&self) -> usize {
        self.u0.len()
    }
    fn profile_len(&self) -> usize {
        self.born.profile_len()
    }
    fn term(&self, profiles: &[&[f64]]) -> Vec<f64> {
        let n = profiles.len();
        let mut out = vec![0.0; self.u0.len()];
        for m in 1..=n {
            for comp in compositions_into(n, m) {
                let mut prod = vec![1.0 / m as f64; self.u0.len()];
                let mut pos = 0;
                for &len in &comp {
                    let k = self.born.term(&profiles[pos..pos + len]);
                    for ((p, kv), u) in prod.iter_mut().zip(k).zip(&self.u0) {
                        *p *= kv / u;
                    }
                    pos += len;
                }
                for (o, p) in out.iter_mut().zip(prod) {
                    *o += p;
                }
            }
        }
        out
    }
}

/// Truncated-SVD pseudoinverse keeping the `rank` largest singular values.
#[derive(Debug, Clone)]
pub struct TruncatedPseudoinverse {
    matrix: DMatrix<f64>,
    sigmas: Vec<f64>,
}

impl TruncatedPseudoinverse {
    pub fn new(a: &DMatrix<f64>, rank: usize) -> Result<Self, BornError> {
        let max_rank = a.nrows().min(a.ncols());
        if rank == 0 || rank > max_rank {
            return Err(BornError::InvalidArgument(format!("rank must lie in 1..={max_rank}, got {rank}")));
        }
        let svd = svd_decompose(a)?;
        let sigmas = svd.sigmas().to_vec();
        if sigmas[rank - 1] <= 0.0 {
            return Err(BornError::InvalidArgument(format!("rank {rank} exceeds the numerical rank")));
        }
        let (u, v) = (svd.left_vectors(), svd.right_vectors());
        let mut matrix = DMatrix::zeros(a.ncols(), a.nrows());
        for (n, s) in sigmas.iter().take(rank).enumerate() {
            matrix += (v.column(n) / *s) * u.column(n).transpose();
        }
        Ok(Self { matrix, sigmas })
    }

    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.matrix.ncols(), "data length mismatch");
        (&self.matrix * nalgebra::DVector::from_column_slice(b)).as_slice().to_vec()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// All singular values of the factored matrix, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigmas
    }

    /// Induced `∞`-norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

pub fn regularized_k1_pseudoinverse(born: &DiscreteBorn, rank: usize) -> Result<TruncatedPseudoinverse, BornError> {
    TruncatedPseudoinverse::new(&born.k1_matrix(), rank)
}

/// Inverse-series term `𝒦(n, b¹, …, bⁿ)` with `n = data.len()`.
///
/// `𝒦(1, b) = 𝒦₁b`; for `n ≥ 2`, with `η^(j) = 𝒦₁b^j`,
/// `𝒦(n, …) = −Σ_{m<n} Σ_{i₁+…+i_m=n} 𝒦(m, K(i₁, η^(1)…η^(i₁)), …, K(i_m, …, η^(n)))`.
pub fn inverse_series_term<F: MultilinearForward + ?Sized>(
    fwd: &F,
    pinv: &TruncatedPseudoinverse,
    data: &[&[f64]],
) -> Vec<f64> {
    let n = data.len();
    assert!(n >= 1, "need at least one data vector");
    if n == 1 {
        return pinv.apply(data[0]);
    }
    let etas: Vec<Vec<f64>> = data.iter().map(|b| pinv.apply(b)).collect();
    let mut total = vec![0.0; fwd.profile_len()];
    for (mi, group) in compositions(n).iter().enumerate() {
        let m = mi + 1;
        for comp in group {
            let mut pos = 0;
            let args: Vec<Vec<f64>> = comp
                .iter()
                .map(|&len| {
                    let block: Vec<&[f64]> = etas[pos..pos + len].iter().map(|v| v.as_slice()).collect();
                    pos += len;
                    fwd.term(&block)
                })
                .collect();
            let refs: Vec<&[f64]> = args.iter().map(|v| v.as_slice()).collect();
            debug_assert_eq!(refs.len(), m);
            for (t, v) in total.iter_mut().zip(inverse_series_term(fwd, pinv, &refs)) {
                *t -= v;
            }
        }
    }
    total
}

/// A reconstruction and its individual series terms.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseSeries {
    pub profile: Vec<f64>,
    pub terms: Vec<Vec<f64>>,
}

/// `Σ_{n=1}^N 𝒦(n, d, …, d)`.
pub fn inverse_series_reconstruct<F: MultilinearForward + ?Sized>(
    fwd: &F,
    pinv: &TruncatedPseudoinverse,
    data: &[f64],
    n_terms: usize,
) -> Result<InverseSeries, BornError> {
    if n_terms == 0 {
        return Err(BornError::InvalidArgument("need at least one term".into()));
    }
    if data.len() != fwd.data_len() {
        return Err(BornError::InvalidArgument(format!("expected {} data values, got {}", fwd.data_len(), data.len())));
    }
    let mut profile = vec![0.0; fwd.profile_len()];
    let mut terms = Vec::with_capacity(n_terms);
    for n in 1..=n_terms {
        let args = vec![data; n];
        let t = inverse_series_term(fwd, pinv, &args);
        for (p, v) in profile.iter_mut().zip(&t) {
            *p += v;
        }
        terms.push(t);
    }
    Ok(InverseSeries { profile, terms })
}

pub fn inverse_born_reconstruct(
    phi: &[f64],
    n_terms: usize,
    cfg: &RadialDotConfig,
    rank: usize,
) -> Result<InverseSeries, BornError> {
    let born = DiscreteBorn::new(cfg)?;
    let pinv = regularized_k1_pseudoinverse(&born, rank)?;
    inverse_series_reconstruct(&born, &pinv, phi, n_terms)
}

/// Rytov terms `ψ_n = Σ_m ((−1)^m/(m u₀^m)) Σ_{i₁+…+i_m=n} u_{i₁}⋯u_{i_m}`
/// per mode, from Born field terms `u_n` at the detector.
pub fn rytov_forward_terms(u_terms: &[Vec<f64>], u0: &[f64]) -> Result<Vec<Vec<f64>>, BornError> {
    if let Some(mode) = u0.iter().position(|&u| u == 0.0) {
        return Err(BornError::ZeroReference { mode: mode + 1 });
    }
    if u_terms.iter().any(|t| t.len() != u0.len()) {
        return Err(BornError::InvalidArgument("every term needs one value per mode".into()));
    }
    let n_max = u_terms.len();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut psi = vec![0.0; u0.len()];
        for m in 1..=n {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            for comp in compositions_into(n, m) {
                for (l, p) in psi.iter_mut().enumerate() {
                    let prod: f64 = comp.iter().map(|&i| u_terms[i - 1][l] / u0[l]).product();
                    *p += sign / m as f64 * prod;
                }
            }
        }
        out.push(psi);
    }
    Ok(out)
}

/// Log-ratio data `ψ = −ln(u/u₀) = −ln(1 − φ/u₀)` per mode.
pub fn rytov_data(phi: &[f64], u0: &[f64]) -> Result<Vec<f64>, BornError> {
    phi.iter()
        .zip(u0)
        .enumerate()
        .map(|(l, (p, u))| {
            if *u == 0.0 {
                return Err(BornError::ZeroReference { mode: l + 1 });
            }
            let v = -(-p / u).ln_1p();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(BornError::NonFinite { mode: l + 1 })
            }
        })
        .collect()
}

pub fn inverse_rytov_reconstruct(
    psi: &[f64],
    n_terms: usize,
    cfg: &RadialDotConfig,
    rank: usize,
) -> Result<InverseSeries, BornError> {
    let born = DiscreteBorn::new(cfg)?;
    let rytov = RytovForward::new(&born)?;
    let pinv = TruncatedPseudoinverse::new(&rytov.j1_matrix(), rank)?;
    inverse_series_reconstruct(&rytov, &pinv, psi, n_terms)
}

/// Discrete `L^∞(B_a)` bounds and measured operator norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDiagnostics {
    /// `k² max_i Σ_j |g(r_i, r_j)| r_j Δr` over target nodes, maximized over modes.
    pub mu_inf: f64,
    /// `k² (Σ_j r_j Δr) max_j g(R, r_j)²` over target nodes, maximized over modes.
    pub nu_inf: f64,
    /// Largest detector value of `K_n` over probes with `‖a‖_∞ ≤ 1` on `B_a`, `n = 1..orders`.
    pub k_norms: Vec<f64>,
}

/// Estimates `μ_∞`, `ν_∞` and `‖K_n‖` for `n = 1..=orders`. Probes are the
/// constant, alternating and `n_random` random-sign profiles on the target.
pub fn norm_diagnostics(
    cfg: &RadialDotConfig,
    orders: usize,
    n_random: usize,
    seed: u64,
) -> Result<NormDiagnostics, BornError> {
    let born = DiscreteBorn::new(cfg)?;
    let m = cfg.target_nodes();
    if m == 0 {
        return Err(BornError::InvalidConfig("no nodes inside the target".into()));
    }
    let dr = cfg.dr();
    let k2 = cfg.k * cfg.k;
    let nodes = born.nodes();
    let area: f64 = nodes[..m].iter().map(|r| r * dr).sum();
    let mut mu_inf: f64 = 0.0;
    let mut nu_inf: f64 = 0.0;
    for mode in 0..cfg.m_s {
        let mu = (0..m)
            .map(|i| (0..m).map(|j| born.green(mode, i, j).abs() * nodes[j] * dr).sum::<f64>())
            .fold(0.0, f64::max);
        let gmax = born.u0_nodes(mode)[..m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        mu_inf = mu_inf.max(k2 * mu);
        nu_inf = nu_inf.max(k2 * area * gmax * gmax);
    }

    let embed = |vals: &[f64]| {
        let mut p = vec![0.0; cfg.n_r];
        p[..m].copy_from_slice(vals);
        p
    };
    let mut probes =
        vec![embed(&vec![1.0; m]), embed(&(0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>())];
    let mut rng = RngState::new(seed);
    for _ in 0..n_random {
        let vals: Vec<f64> = (0..m).map(|_| if rng.normal(0.0, 1.0) >= 0.0 { 1.0 } else { -1.0 }).collect();
        probes.push(embed(&vals));
    }
    let mut k_norms = Vec::with_capacity(orders);
    for n in 1..=orders {
        let mut best: f64 = 0.0;
        for p in &probes {
            let args = vec![p.as_slice(); n];
            best = born.term(&args).iter().fold(best, |a, v| a.max(v.abs()));
        }
        k_norms.push(best);
    }
    Ok(NormDiagnostics { mu_inf, nu_inf, k_norms })
}
