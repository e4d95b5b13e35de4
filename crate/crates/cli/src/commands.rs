use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;

use invlab::born::{
    boundary_u0, forward_phi, inverse_series_reconstruct, regularized_k1_pseudoinverse, rytov_data, DiscreteBorn,
    InverseSeries, RadialDotConfig, RytovForward, TruncatedPseudoinverse,
};
use invlab::heat1d::{
    heat_forward, heat_invert, heat_singular_system, heat_truncation_index, multiplicative_noise, HeatGrid, HeatProblem,
};
use invlab::optim::{landweber_run, BetaRule, CgConfig, LinearOperator};
use invlab::radon::{
    annulus_phantom, annulus_sinogram_analytic, fbp_reconstruct, radon_transform, sinogram_noise, RadonGeometry,
    RingHoleStats,
};
use invlab::specfun::RngState;
use invlab::spectral::SpectralFilter;
use invlab::tank::{tank_error_metrics, tank_invert_closed_form, tank_solve_cg, TankObservation, TankParams};

use crate::args::{Beta, Command, Count, DataSource, Method, Pair};
use crate::config::Resolver;
use crate::{svdcheck, CliError, Outputs};

/// A subcommand with every parameter resolved.
pub enum Plan {
    Tank { obs: TankObservation, alpha: f64, init: TankParams, cfg: CgConfig },
    Heat { prob: HeatProblem, n_x: usize, alpha: f64, noise: f64, method: Method },
    Landweber { prob: HeatProblem, n_x: usize, omega_scale: f64, iterations: usize, noise: f64 },
    Series { rytov: bool, cfg: RadialDotConfig, rank: usize, terms: usize },
    Radon { geometry: RadonGeometry, n_l: usize, tau_max: f64, sigma: f64, data: DataSource },
    Svdcheck { trials: usize },
}

pub fn plan(command: &Command, r: &mut Resolver) -> Result<Plan, CliError> {
    Ok(match command {
        Command::Tank(a) => {
            let obs = r.take("obs", a.obs, Pair(0.0791, 0.158))?;
            let alpha = r.take("alpha", a.alpha, 8e-9)?;
            let init = r.take("init", a.init, Pair(3.0, 0.01))?;
            let defaults = CgConfig::default();
            let cfg = CgConfig {
                k_max: r.take("kmax", a.kmax, Count(defaults.k_max))?.0,
                beta_rule: match r.take("beta", a.beta, Beta::Prp)? {
                    Beta::Prp => BetaRule::Prp,
                    Beta::Fr => BetaRule::Fr,
                    Beta::Hs => BetaRule::Hs,
                },
                gamma: r.take("gamma", a.gamma, defaults.gamma)?,
                kappa: r.take("kappa", a.kappa, defaults.kappa)?,
                ell0: r.take("ell0", a.ell0, defaults.ell0)?,
                j_max: r.take("jmax", a.jmax, Count(defaults.j_max))?.0,
                grad_tol: None,
            };
            cfg.validate()?;
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(CliError::Usage(format!("alpha must be nonnegative, got {alpha}")));
            }
            Plan::Tank { obs: TankObservation::new(obs.0, obs.1), alpha, init: TankParams::new(init.0, init.1)?, cfg }
        }
        Command::Heat(a) => {
            let prob = HeatProblem::new(r.take("t", a.t, 1.0)?, r.take("modes", a.modes, Count(64))?.0)?;
            Plan::Heat {
                prob,
                n_x: r.take("nx", a.nx, Count(512))?.0,
                alpha: r.take("alpha", a.alpha, 1e-4)?,
                noise: r.take("noise", a.noise, 0.0)?,
                method: r.take("method", a.method, Method::Tikhonov)?,
            }
        }
        Command::Landweber(a) => {
            let prob = HeatProblem::new(r.take("t", a.t, 1.0)?, r.take("modes", a.modes, Count(64))?.0)?;
            Plan::Landweber {
                prob,
                n_x: r.take("nx", a.nx, Count(512))?.0,
                omega_scale: r.take("omega-scale", a.omega_scale, 0.9)?,
                iterations: r.take("iterations", a.iterations, Count(200))?.0,
                noise: r.take("noise", a.noise, 0.0)?,
            }
        }
        Command::Born(a) | Command::Rytov(a) => {
            let d = RadialDotConfig::default();
            let cfg = RadialDotConfig {
                k: r.take("k", a.k, d.k)?,
                ell: r.take("ell", a.ell, d.ell)?,
                radius: r.take("radius", a.radius, d.radius)?,
                target_radius: r.take("target-radius", a.target_radius, d.target_radius)?,
                eta_a: r.take("eta", a.eta, d.eta_a)?,
                n_r: r.take("nr", a.nr, Count(d.n_r))?.0,
                m_s: r.take("ms", a.ms, Count(d.m_s))?.0,
                n_max: r.take("nmax", a.nmax, Count(d.n_max))?.0,
            };
            cfg.validate()?;
            Plan::Series {
                rytov: matches!(command, Command::Rytov(_)),
                cfg,
                rank: r.take("rank", a.rank, Count(23))?.0,
                terms: r.take("terms", a.terms, Count(3))?.0,
            }
        }
        Command::Radon(a) => {
            let d = RadonGeometry::default();
            let geometry = RadonGeometry::new(
                r.take("nphi", a.nphi, Count(d.n_phi))?.0,
                r.take("ns", a.ns, Count(d.n_s))?.0,
                r.take("smax", a.smax, FRAC_1_SQRT_2)?,
            )?;
            Plan::Radon {
                geometry,
                n_l: r.take("nl", a.nl, Count(128))?.0,
                tau_max: r.take("taumax", a.taumax, 100.0)?,
                sigma: r.take("sigma", a.sigma, 0.0)?,
                data: r.take("data", a.data, DataSource::Analytic)?,
            }
        }
        Command::Svdcheck(a) => Plan::Svdcheck { trials: r.take("trials", a.trials, Count(50))?.0 },
    })
}

impl Plan {
    pub fn run(&self, seed: u64, out: &mut Outputs) -> Result<(), CliError> {
        match self {
            Plan::Tank { obs, alpha, init, cfg } => run_tank(*obs, *alpha, *init, cfg, out),
            Plan::Heat { prob, n_x, alpha, noise, method } => run_heat(prob, *n_x, *alpha, *noise, *method, seed, out),
            Plan::Landweber { prob, n_x, omega_scale, iterations, noise } => {
                run_landweber(prob, *n_x, *omega_scale, *iterations, *noise, seed, out)
            }
            Plan::Series { rytov, cfg, rank, terms } => run_series(*rytov, cfg, *rank, *terms, out),
            Plan::Radon { geometry, n_l, tau_max, sigma, data } => {
                run_radon(*geometry, *n_l, *tau_max, *sigma, *data, seed, out)
            }
            Plan::Svdcheck { trials } => svdcheck::run(*trials, seed, out),
        }
    }
}

fn run_tank(
    obs: TankObservation,
    alpha: f64,
    init: TankParams,
    cfg: &CgConfig,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let closed = match tank_invert_closed_form(obs) {
        Ok(p) => (p.x(), p.y()),
        Err(e) => {
            eprintln!("invlab: closed form unavailable: {e}");
            (f64::NAN, f64::NAN)
        }
    };
    let trace = tank_solve_cg(obs, alpha, init, cfg)?;
    let records = &trace.records;
    let col = |f: &dyn Fn(&invlab::optim::IterRecord) -> f64| records.iter().map(f).collect::<Vec<f64>>();
    let iteration: Vec<f64> = (0..records.len()).map(|i| i as f64).collect();
    out.csv(
        "tank_trace.csv",
        &[
            ("iteration", &iteration),
            ("x", &col(&|r| r.iterate[0])),
            ("y", &col(&|r| r.iterate[1])),
            ("cost", &col(&|r| r.cost)),
            ("grad_norm", &col(&|r| r.grad_norm)),
            ("step", &col(&|r| r.step)),
            ("armijo", &col(&|r| f64::from(u8::from(r.armijo)))),
        ],
    )?;
    let last = trace.last();
    let fit = TankParams::new(last.iterate[0], last.iterate[1])
        .map_err(|e| CliError::Numerical(format!("final iterate is not admissible: {e}")))?;
    let (eps_est, _) = tank_error_metrics(fit, obs, None)?;
    out.csv(
        "tank_summary.csv",
        &[
            ("closed_x", &[closed.0]),
            ("closed_y", &[closed.1]),
            ("cg_x", &[fit.x()]),
            ("cg_y", &[fit.y()]),
            ("cost", &[last.cost]),
            ("eps_est", &[eps_est]),
        ],
    )?;
    println!(
        "tank: closed form ({:.6}, {:.6}), CG ({:.6}, {:.6}) after {} iterations",
        closed.0,
        closed.1,
        fit.x(),
        fit.y(),
        records.len() - 1
    );
    Ok(())
}

fn parabola(n_x: usize) -> Result<HeatGrid, CliError> {
    Ok(HeatGrid::from_fn(n_x, |x| x * (PI - x))?)
}

fn run_heat(
    prob: &HeatProblem,
    n_x: usize,
    alpha: f64,
    noise: f64,
    method: Method,
    seed: u64,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let f = parabola(n_x)?;
    let g = heat_forward(&f, prob)?;
    let (data, _) = multiplicative_noise(&g, noise, RngState::new(seed))?;
    let filter = match method {
        Method::Tikhonov => SpectralFilter::Tikhonov { alpha },
        Method::Truncated => SpectralFilter::Truncated { alpha },
    };
    let rec = heat_invert(&data, prob, &filter)?;
    out.csv(
        "heat_reconstruction.csv",
        &[
            ("x", &f.points()),
            ("f_true", f.values()),
            ("g", g.values()),
            ("g_data", data.values()),
            ("f_rec", rec.values()),
        ],
    )?;
    let err = rec.values().iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let m = heat_truncation_index(alpha).map_or(f64::NAN, |m| m as f64);
    out.csv(
        "heat_summary.csv",
        &[("alpha", &[alpha]), ("sup_error", &[err]), ("rec_sup_norm", &[rec.sup_norm()]), ("truncation_index", &[m])],
    )?;
    println!("heat: {method} alpha = {alpha:e}, sup error {err:.6e}, reconstruction sup {:.6e}", rec.sup_norm());
    Ok(())
}

fn run_landweber(
    prob: &HeatProblem,
    n_x: usize,
    omega_scale: f64,
    iterations: usize,
    noise: f64,
    seed: u64,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let f = parabola(n_x)?;
    let g = heat_forward(&f, prob)?;
    let (data, _) = multiplicative_noise(&g, noise, RngState::new(seed))?;
    let op = heat_singular_system(prob).on_grid(n_x)?;
    let omega = omega_scale / op.norm_bound().powi(2);
    let run = landweber_run(&op, data.values(), omega, iterations, &vec![0.0; n_x])?;
    let steps: Vec<f64> = (0..run.residual_norms.len()).map(|i| i as f64).collect();
    out.csv("landweber_residuals.csv", &[("iteration", &steps), ("residual_norm", &run.residual_norms)])?;
    out.csv("landweber_solution.csv", &[("x", &f.points()), ("f_true", f.values()), ("f_rec", &run.solution)])?;
    let err = run.solution.iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("landweber: omega = {omega:.6e}, {iterations} steps, sup error {err:.6e}");
    Ok(())
}

fn run_series(
    rytov: bool,
    cfg: &RadialDotConfig,
    rank: usize,
    terms: usize,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let born = DiscreteBorn::new(cfg)?;
    let phi = forward_phi(cfg)?;
    let u0 = boundary_u0(cfg)?;
    let eta = cfg.target_profile();
    let eta_vec = DVector::from_column_slice(&eta);
    let (name, data, series, projection) = if rytov {
        let fwd = RytovForward::new(&born)?;
        let j1 = fwd.j1_matrix();
        let pinv = TruncatedPseudoinverse::new(&j1, rank)?;
        let psi = rytov_data(&phi, &u0)?;
        let series = inverse_series_reconstruct(&fwd, &pinv, &psi, terms)?;
        let proj = pinv.apply((j1 * &eta_vec).as_slice());
        ("rytov", psi, series, proj)
    } else {
        let k1 = born.k1_matrix();
        let pinv = regularized_k1_pseudoinverse(&born, rank)?;
        let series = inverse_series_reconstruct(&born, &pinv, &phi, terms)?;
        let proj = pinv.apply((k1 * &eta_vec).as_slice());
        ("born", phi.clone(), series, proj)
    };
    let InverseSeries { profile, terms: parts } = series;
    let term_names: Vec<String> = (1..=parts.len()).map(|n| format!("term_{n}")).collect();
    let mut columns: Vec<(&str, &[f64])> =
        vec![("r", born.nodes()), ("eta_true", &eta), ("projection", &projection), ("reconstruction", &profile)];
    columns.extend(term_names.iter().map(String::as_str).zip(parts.iter().map(Vec::as_slice)));
    out.csv(&format!("{name}_profile.csv"), &columns)?;

    let dr = cfg.dr();
    let norm = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() * dr).sqrt();
    let orders: Vec<f64> = (1..=parts.len()).map(|n| n as f64).collect();
    let l2: Vec<f64> = parts.iter().map(|t| norm(t)).collect();
    let sup: Vec<f64> = parts.iter().map(|t| t.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    out.csv(&format!("{name}_terms.csv"), &[("order", &orders), ("l2_norm", &l2), ("sup_norm", &sup)])?;
    let modes: Vec<f64> = (1..=data.len()).map(|l| l as f64).collect();
    out.csv(&format!("{name}_data.csv"), &[("mode", &modes), ("data", &data), ("u0", &u0)])?;

    let diff: Vec<f64> = profile.iter().zip(&projection).map(|(a, b)| a - b).collect();
    println!(
        "{name}: {} terms, term norms {:?}, relative distance to first-order projection {:.4e}",
        parts.len(),
        l2.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
        norm(&diff) / norm(&projection)
    );
    Ok(())
}

fn run_radon(
    geometry: RadonGeometry,
    n_l: usize,
    tau_max: f64,
    sigma: f64,
    data: DataSource,
    seed: u64,
    out: &mut Outputs,
) -> Result<(), CliError> {
    let clean = match data {
        DataSource::Analytic => annulus_sinogram_analytic(geometry)?,
        DataSource::Numeric => radon_transform(&annulus_phantom(n_l)?, geometry)?,
    };
    let (sino, _) = sinogram_noise(&clean, sigma, RngState::new(seed))?;
    let img = fbp_reconstruct(&sino, tau_max, n_l)?;

    let (angles, offsets) = (geometry.angles(), geometry.offsets());
    let phi: Vec<f64> = angles.iter().flat_map(|&a| offsets.iter().map(move |_| a)).collect();
    let s: Vec<f64> = angles.iter().flat_map(|_| offsets.iter().copied()).collect();
    out.csv("radon_sinogram.csv", &[("phi", &phi), ("s", &s), ("value", sino.values())])?;

    let (x1, x2): (Vec<f64>, Vec<f64>) = (0..img.values().len()).map(|i| img.coords(i)).unzip();
    out.csv("radon_reconstruction.csv", &[("x1", &x1), ("x2", &x2), ("mu", img.values())])?;
    out.pgm("radon_reconstruction.pgm", &img)?;

    let st = RingHoleStats::measure(&img);
    out.csv(
        "radon_summary.csv",
        &[
            ("ring_mean", &[st.ring_mean]),
            ("hole_mean", &[st.hole_mean]),
            ("ring_std", &[st.ring_std]),
            ("hole_std", &[st.hole_std]),
            ("contrast", &[st.contrast()]),
            ("cnr", &[st.cnr()]),
        ],
    )?;
    println!(
        "radon: tau_max = {tau_max}, sigma = {sigma}, ring mean {:.4}, hole mean {:.4}, contrast {:.4}, CNR {:.2}",
        st.ring_mean,
        st.hole_mean,
        st.contrast(),
        st.cnr()
    );
    Ok(())
}
