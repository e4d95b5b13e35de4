//! Contaminated water tank: two noisy readings, two unknowns.
//!
//! A tank of volume `V` with initial concentration `a₀` is flushed at rate
//! `v` by water of concentration `b`. The normalized contrast is
//! `A(t) = (1 − e^{−yt})x` with `x = (b − a₀)/a₀` and `y = v/V`.

use thiserror::Error;

use crate::optim::{nonlinear_cg, CgConfig, IterTrace, OptimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TankError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate observation: {0}")]
    Degenerate(String),
    #[error("observation component {index} is zero")]
    ZeroObservation { index: usize },
    #[error(transparent)]
    Optim(#[from] OptimError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankParams {
    x: f64,
    y: f64,
}

impl TankParams {
    pub fn new(x: f64, y: f64) -> Result<Self, TankError> {
        if !x.is_finite() || !(y > 0.0 && y.is_finite()) {
            return Err(TankError::InvalidParameter(format!("need finite x and y > 0, got ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Readings `A(1)` and `A(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankObservation {
    pub a1: f64,
    pub a2: f64,
}

impl TankObservation {
    pub fn new(a1: f64, a2: f64) -> Self {
        Self { a1, a2 }
    }
}

fn forward_xy(x: f64, y: f64) -> (f64, f64) {
    (-x * (-y).exp_m1(), -x * (-2.0 * y).exp_m1())
}

pub fn tank_forward(p: TankParams) -> TankObservation {
    let (a1, a2) = forward_xy(p.x, p.y);
    TankObservation { a1, a2 }
}

/// `x = A1²/(2A1 − A2)`, `y = ln(A1/(A2 − A1))`.
pub fn tank_invert_closed_form(obs: TankObservation) -> Result<TankParams, TankError> {
    let TankObservation { a1, a2 } = obs;
    if !(a1.is_finite() && a2.is_finite()) {
        return Err(TankError::InvalidParameter("non-finite observation".into()));
    }
    let den = 2.0 * a1 - a2;
    if den.abs() < 1e-14 * a1.abs() || den == 0.0 {
        return Err(TankError::Degenerate(format!("2A1 - A2 = {den:e} vanishes")));
    }
    if !(a1 > 0.0 && a2 > a1) {
        return Err(TankError::Degenerate(format!("need A2 > A1 > 0, got A1 = {a1}, A2 = {a2}")));
    }
    let y = (a1 / (a2 - a1)).ln();
    TankParams::new(a1 * a1 / den, y).map_err(|_| TankError::Degenerate(format!("recovered y = {y} is not positive")))
}

fn cost_xy(x: f64, y: f64, obs: &TankObservation, alpha: f64) -> f64 {
    let (a1, a2) = forward_xy(x, y);
    let (r1, r2) = (a1 - obs.a1, a2 - obs.a2);
    0.5 * (r1 * r1 + r2 * r2) + alpha * (x * x + y * y)
}

fn gradient_xy(x: f64, y: f64, obs: &TankObservation, alpha: f64) -> [f64; 2] {
    let (a1, a2) = forward_xy(x, y);
    let (r1, r2) = (a1 - obs.a1, a2 - obs.a2);
    let (e1, e2) = ((-y).exp(), (-2.0 * y).exp());
    [
        r1 * -(-y).exp_m1() + r2 * -(-2.0 * y).exp_m1() + 2.0 * alpha * x,
        r1 * x * e1 + r2 * 2.0 * x * e2 + 2.0 * alpha * y,
    ]
}

/// `½|A(p) − A^obs|² + α(x² + y²)`.
pub fn tank_cost(p: TankParams, obs: TankObservation, alpha: f64) -> f64 {
    cost_xy(p.x, p.y, &obs, alpha)
}

pub fn tank_cost_gradient(p: TankParams, obs: TankObservation, alpha: f64) -> [f64; 2] {
    gradient_xy(p.x, p.y, &obs, alpha)
}

/// Minimizes [`tank_cost`] by nonlinear CG from `p0`. Iterates are not
/// projected onto `y > 0`.
pub fn tank_solve_cg(obs: TankObservation, alpha: f64, p0: TankParams, cfg: &CgConfig) -> Result<IterTrace, TankError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(TankError::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let trace = nonlinear_cg(
        |p| cost_xy(p[0], p[1], &obs, alpha),
        |p| gradient_xy(p[0], p[1], &obs, alpha).to_vec(),
        &[p0.x, p0.y],
        cfg,
    )?;
    Ok(trace)
}

fn relative_misfit(a: TankObservation, reference: TankObservation) -> Result<f64, TankError> {
    if reference.a1 == 0.0 {
        return Err(TankError::ZeroObservation { index: 1 });
    }
    if reference.a2 == 0.0 {
        return Err(TankError::ZeroObservation { index: 2 });
    }
    Ok((((a.a1 - reference.a1) / reference.a1).powi(2) + ((a.a2 - reference.a2) / reference.a2).powi(2)).sqrt())
}

/// `(ε^est, ε^obs)`: relative misfit of the fitted readings against the
/// observations, and of the observations against the true readings.
pub fn tank_error_metrics(
    p_est: TankParams,
    obs: TankObservation,
    truth: Option<TankObservation>,
) -> Result<(f64, Option<f64>), TankError> {
    let eps_est = relative_misfit(tank_forward(p_est), obs)?;
    let eps_obs = truth.map(|t| relative_misfit(obs, t)).transpose()?;
    Ok((eps_est, eps_obs))
}
