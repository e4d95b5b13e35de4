use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use invlab::optim::{backtracking_line_search, landweber, nonlinear_cg, BetaRule, CgConfig, DenseOperator, OptimError};
use invlab::spectral::{apply_filtered_inverse, svd_decompose, tikhonov_solve_matrix, SpectralFilter};

use crate::{CliError, Outputs};

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn random_matrix(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = rng.random_range(2..=8);
    let n = rng.random_range(2..=8);
    DMatrix::from_fn(m, n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(1e-300)
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn checks(trials: usize, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut svd_err = 0.0f64;
    let mut tik_err = 0.0f64;
    let mut bound_excess = f64::NEG_INFINITY;
    let mut lw_err = 0.0f64;
    let mut refusals = 0usize;
    for _ in 0..trials {
        let a = random_matrix(&mut rng);
        let sys = svd_decompose(&a).map_err(numerical)?;
        svd_err = svd_err.max((sys.reconstruct() - &a).amax() / a.amax());

        let g = random_vec(&mut rng, a.nrows());
        let alpha = 10f64.powf(rng.random_range(-3.0..1.0));
        let direct = tikhonov_solve_matrix(&a, &g, alpha).map_err(numerical)?;
        let filtered = apply_filtered_inverse(&sys, &SpectralFilter::Tikhonov { alpha }, &g).map_err(numerical)?;
        tik_err = tik_err.max(rel_diff(&direct, &filtered));
        bound_excess = bound_excess.max(norm(&filtered) / norm(&g) - 1.0 / (2.0 * alpha.sqrt()));

        let op = DenseOperator::new(a.clone()).map_err(numerical)?;
        let s1 = sys.sigmas()[0];
        let omega = 0.9 / (s1 * s1);
        let m = rng.random_range(1..=50);
        let it = landweber(&op, &g, omega, m, &vec![0.0; a.ncols()]).map_err(numerical)?;
        let lw =
            apply_filtered_inverse(&sys, &SpectralFilter::Landweber { omega, m: m as u32 }, &g).map_err(numerical)?;
        lw_err = lw_err.max(rel_diff(&it, &lw));
        if matches!(landweber(&op, &g, 1.0 / (s1 * s1), 1, &vec![0.0; a.ncols()]), Err(OptimError::StepTooLarge { .. }))
        {
            refusals += 1;
        }
    }

    let cfg = CgConfig { gamma: 0.5, kappa: 0.5, ell0: 1.0, ..CgConfig::default() };
    let step = backtracking_line_search(|x| x[0] * x[0], &[2.0], &[1.0], &[-4.0], &cfg).step;

    let n = 6;
    let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let spd = b.transpose() * &b + DMatrix::identity(n, n);
    let rhs = random_vec(&mut rng, n);
    let cost = |x: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(x);
        0.5 * v.dot(&(&spd * &v)) - v.iter().zip(&rhs).map(|(p, q)| p * q).sum::<f64>()
    };
    let grad = |x: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(x);
        (&spd * v).iter().zip(&rhs).map(|(p, q)| p - q).collect::<Vec<f64>>()
    };
    // Armijo on cost values stalls near sqrt(eps) relative distance to the minimizer.
    let cg_cfg = CgConfig { beta_rule: BetaRule::Hs, k_max: 5000, grad_tol: Some(1e-10), ..CgConfig::default() };
    let trace = nonlinear_cg(cost, grad, &vec![0.0; n], &cg_cfg).map_err(numerical)?;
    let exact = spd
        .clone()
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(&rhs))
        .ok_or_else(|| numerical("singular test matrix"))?;
    let cg_err = rel_diff(&trace.last().iterate, exact.as_slice());

    Ok(vec![
        Check { name: "svd_reconstruction", measured: svd_err, tolerance: 1e-12 },
        Check { name: "tikhonov_cholesky_vs_svd", measured: tik_err, tolerance: 1e-10 },
        Check { name: "tikhonov_norm_bound", measured: bound_excess, tolerance: 1e-9 },
        Check { name: "landweber_vs_filter", measured: lw_err, tolerance: 1e-10 },
        Check { name: "landweber_refuses_large_step", measured: (trials - refusals) as f64, tolerance: 0.0 },
        Check { name: "armijo_first_step", measured: (step - 0.125).abs(), tolerance: 0.0 },
        Check { name: "cg_quadratic_minimizer", measured: cg_err, tolerance: 1e-6 },
    ])
}

pub fn run(trials: usize, seed: u64, out: &mut Outputs) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let results = checks(trials, seed)?;
    println!("{:<30} {:<6} {:>12} {:>10}", "check", "result", "measured", "tolerance");
    for c in &results {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{:<30} {:<6} {:>12.3e} {:>10.1e}", c.name, verdict, c.measured, c.tolerance);
    }
    let index: Vec<f64> = (1..=results.len()).map(|i| i as f64).collect();
    let passed: Vec<f64> = results.iter().map(|c| f64::from(u8::from(c.passed()))).collect();
    let measured: Vec<f64> = results.iter().map(|c| c.measured).collect();
    let tolerance: Vec<f64> = results.iter().map(|c| c.tolerance).collect();
    out.csv(
        "svdcheck.csv",
        &[("check", &index), ("passed", &passed), ("measured", &measured), ("tolerance", &tolerance)],
    )?;
    let failed = results.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}
