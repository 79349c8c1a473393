//! Noiseless Gaussian-process regression over the mixed domain.
//!
//! Targets are standardized to zero mean / unit variance before fitting and
//! predictions are destandardized on the way out. The kernel matrix is
//! factorized once per fit with an escalating numerical jitter; hyperparameters
//! are adjusted by maximizing the log marginal likelihood with a multi-start
//! derivative-free local search in log-theta space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, k_mixed, KernelHyperparams};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// A fitted Gaussian-process surrogate.
#[derive(Debug, Clone)]
pub struct GpModel {
    train_points: Vec<Point>,
    targets_std: DVector<f64>,
    target_mean: f64,
    target_std: f64,
    hp: KernelHyperparams,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

impl GpModel {
    pub fn train_points(&self) -> &[Point] {
        &self.train_points
    }

    /// Standardized training targets, in training-point order.
    pub fn standardized_targets(&self) -> &DVector<f64> {
        &self.targets_std
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    pub fn hyperparams(&self) -> &KernelHyperparams {
        &self.hp
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower-triangular Cholesky factor of `K + jitter I`.
    pub fn chol_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// Predictive mean and (clamped, destandardized) variance at `x`.
    pub fn predict(&self, x: &Point) -> (f64, f64) {
        let p = self.train_points.len();
        let kvec = DVector::from_fn(p, |i, _| k_mixed(x, &self.train_points[i], &self.hp));
        let mean_std = kvec.dot(&self.alpha);
        let w = self.chol.solve(&kvec);
        let raw_var = 1.0 - kvec.dot(&w);
        debug_assert!(raw_var > -1e-6, "variance {raw_var} below the clamping tolerance");
        let var_std = raw_var.max(0.0);
        (
            self.target_mean + self.target_std * mean_std,
            var_std * self.target_std * self.target_std,
        )
    }

    /// Log marginal likelihood of the standardized targets,
    /// `-1/2 y^T K^-1 y - 1/2 log det K - p/2 log 2 pi`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let p = self.train_points.len() as f64;
        let quad = self.targets_std.dot(&self.alpha);
        let log_det_half: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * quad - log_det_half - 0.5 * p * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Fits a noiseless GP to the points whose targets are finite.
///
/// Duplicate points (by canonical encoding) keep their first target. Fails
/// with fewer than two finite-target points, or if the Cholesky factorization
/// still fails at the maximum jitter.
pub fn fit(points: &[Point], targets: &[f64], hp: &KernelHyperparams) -> Result<GpModel> {
    assert_eq!(points.len(), targets.len(), "points/targets length mismatch");
    let mut seen = std::collections::HashSet::new();
    let mut train_points = Vec::new();
    let mut raw = Vec::new();
    for (pt, &t) in points.iter().zip(targets) {
        if !t.is_finite() {
            continue;
        }
        if seen.insert(pt.encode()) {
            train_points.push(pt.clone());
            raw.push(t);
        }
    }
    if train_points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "GP fit needs at least 2 finite-target points, got {}",
            train_points.len()
        )));
    }

    let p = train_points.len();
    let mean = raw.iter().sum::<f64>() / p as f64;
    let var = raw.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / p as f64;
    let std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let targets_std = DVector::from_iterator(p, raw.iter().map(|t| (t - mean) / std));

    let k = kernel_matrix(&train_points, hp);
    let mut jitter = JITTER_START;
    loop {
        let mut kj = k.clone();
        for i in 0..p {
            kj[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(kj.clone()) {
            // iterative refinement: near-singular kernel matrices pass the
            // factorization but leave large residuals in the plain solve
            let mut alpha = chol.solve(&targets_std);
            for _ in 0..3 {
                let residual = &targets_std - &kj * &alpha;
                if residual.amax() < 1e-14 {
                    break;
                }
                alpha += chol.solve(&residual);
            }
            return Ok(GpModel {
                train_points,
                targets_std,
                target_mean: mean,
                target_std: std,
                hp: hp.clone(),
                chol,
                alpha,
                jitter,
            });
        }
        if jitter >= JITTER_MAX {
            return Err(Error::Numerical(format!(
                "Cholesky failed for {p} points even with jitter {jitter:.1e}"
            )));
        }
        jitter *= 10.0;
    }
}

/// Multi-start settings for the likelihood search.
#[derive(Debug, Clone)]
pub struct HyperoptConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for HyperoptConfig {
    fn default() -> Self {
        HyperoptConfig { n_starts: 5, max_iters: 200, seed: 0 }
    }
}

/// Maximizes the log marginal likelihood over the kernel hyperparameters.
///
/// Runs `n_starts` Nelder-Mead searches in log-theta space (the all-ones
/// vector plus log-uniform draws in `[1e-2, 1e2]`) and returns the best
/// hyperparameters found; falls back to all-ones if every start fails.
pub fn optimize_hyperparams(
    domain: &Domain,
    points: &[Point],
    targets: &[f64],
    config: &HyperoptConfig,
) -> Result<KernelHyperparams> {
    optimize_hyperparams_from(domain, points, targets, None, config)
}

/// Same as [`optimize_hyperparams`] but with an optional warm start that
/// replaces the all-ones first start.
pub fn optimize_hyperparams_from(
    domain: &Domain,
    points: &[Point],
    targets: &[f64],
    init: Option<&KernelHyperparams>,
    config: &HyperoptConfig,
) -> Result<KernelHyperparams> {
    let shape = KernelHyperparams::ones(domain);
    let dim = shape.len();
    if dim == 0 {
        return Ok(shape);
    }
    let objective = |log_theta: &[f64]| -> f64 {
        let theta: Vec<f64> = log_theta.iter().map(|t| t.exp()).collect();
        let hp = shape.unflatten_like(&theta);
        match fit(points, targets, &hp) {
            Ok(model) => -model.log_marginal_likelihood(),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.n_starts.max(1));
    let first = match init {
        Some(hp) => hp.flatten().iter().map(|t| t.ln()).collect(),
        None => vec![0.0; dim],
    };
    starts.push(first);
    let (lo, hi) = ((1e-2f64).ln(), (1e2f64).ln());
    while starts.len() < config.n_starts.max(1) {
        starts.push((0..dim).map(|_| rng.gen_range(lo..hi)).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, fx) = nelder_mead(&objective, &start, 0.7, config.max_iters);
        if fx.is_finite() && best.as_ref().map_or(true, |(_, bf)| fx < *bf) {
            best = Some((x, fx));
        }
    }
    match best {
        Some((log_theta, _)) => {
            let theta: Vec<f64> = log_theta.iter().map(|t| t.exp()).collect();
            Ok(shape.unflatten_like(&theta))
        }
        None => Ok(shape),
    }
}

/// Classic Nelder-Mead simplex minimizer.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < 1e-10 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let at = |coef: f64| -> Vec<f64> {
            (0..n).map(|i| centroid[i] + coef * (centroid[i] - worst.0[i])).collect()
        };

        let xr = at(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = at(2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = at(0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = at(-0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..n {
                        v.0[i] = best[i] + 0.5 * (v.0[i] - best[i]);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}
