//! Kernel-induced categorical distances.
//!
//! The objective distance is defined from the fitted categorical kernel,
//! `d_f(u, v) = k(u,u) + k(v,v) - 2 k(u,v) = 2 - 2 k_cat(u,v)`, a squared
//! Hilbert-space distance. The constraint pseudo-distance maps each component
//! to a relaxed-and-normalized violation vector `g_plus` in `[0,1]^|J|` and
//! takes the p-norm of differences; it evaluates to zero whenever both
//! components are predicted feasible after relaxation.
//!
//! In the mixed-variable setting every quantity here is evaluated at a fixed
//! quantitative component (the incumbent's), so comparisons only concern the
//! categorical variables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::kernels::k_cat;
use crate::surrogate::GpModel;

/// Normalization used inside `g_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    MinMax,
}

/// Settings of the constraint violation map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMapConfig {
    /// Uncertainty relaxation: a component is treated as feasible when
    /// `ghat_j - lambda * sigma_j <= 0`.
    pub lambda: f64,
    /// Norm order of the pseudo-distance, `p >= 1`.
    pub p: f64,
    pub normalization: Normalization,
}

impl Default for ConstraintMapConfig {
    fn default() -> Self {
        ConstraintMapConfig { lambda: 1.0, p: 2.0, normalization: Normalization::MinMax }
    }
}

impl ConstraintMapConfig {
    pub fn check(&self) -> Result<()> {
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::Config("norm order p must be at least 1".into()));
        }
        Ok(())
    }
}

/// Objective categorical distance `d_f(u, v) = 2 - 2 k_cat(u, v)`.
///
/// `theta_cat` is read from the objective GP's fitted kernel.
pub fn d_f(u: &[usize], v: &[usize], theta_cat: &[Vec<f64>]) -> f64 {
    2.0 - 2.0 * k_cat(u, v, theta_cat)
}

/// Prediction-difference fallback when no kernel is available:
/// `|fhat(u) - fhat(v)|`. A pseudo-distance, not a metric.
pub fn d_f_fallback<F: Fn(&[usize]) -> f64>(u: &[usize], v: &[usize], objective_mean: F) -> f64 {
    (objective_mean(u) - objective_mean(v)).abs()
}

/// Precomputed `g_plus` images of a candidate component set at a fixed
/// quantitative component.
#[derive(Debug, Clone)]
pub struct ConstraintMap {
    index: HashMap<Vec<usize>, usize>,
    g_plus: Vec<Vec<f64>>,
    p: f64,
}

impl ConstraintMap {
    /// Builds the map by predicting every constraint surrogate at
    /// `(candidate, template.qnt)` and normalizing per constraint.
    pub fn build(
        candidates: &[Vec<usize>],
        template: &Point,
        constraint_models: &[GpModel],
        cfg: &ConstraintMapConfig,
    ) -> Result<Self> {
        cfg.check()?;
        let mut ghat = Vec::with_capacity(constraint_models.len());
        let mut sigma = Vec::with_capacity(constraint_models.len());
        for model in constraint_models {
            let mut means = Vec::with_capacity(candidates.len());
            let mut stds = Vec::with_capacity(candidates.len());
            for cand in candidates {
                let (mean, var) = model.predict(&template.with_cat(cand.clone()));
                means.push(mean);
                stds.push(var.max(0.0).sqrt());
            }
            ghat.push(means);
            sigma.push(stds);
        }
        Ok(Self::from_predictions(candidates, &ghat, &sigma, cfg))
    }

    /// Builds the map from explicit per-constraint predictions
    /// (`ghat[j][c]`, `sigma[j][c]` over the candidate set).
    pub fn from_predictions(
        candidates: &[Vec<usize>],
        ghat: &[Vec<f64>],
        sigma: &[Vec<f64>],
        cfg: &ConstraintMapConfig,
    ) -> Self {
        let n = candidates.len();
        let mut g_plus = vec![vec![0.0; ghat.len()]; n];
        for (j, (means, stds)) in ghat.iter().zip(sigma).enumerate() {
            assert_eq!(means.len(), n, "prediction/candidate length mismatch");
            // min-max constants over components with positive relaxed prediction
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for c in 0..n {
                if means[c] - cfg.lambda * stds[c] > 0.0 {
                    lo = lo.min(means[c]);
                    hi = hi.max(means[c]);
                }
            }
            let span = hi - lo;
            for c in 0..n {
                if means[c] - cfg.lambda * stds[c] <= 0.0 {
                    g_plus[c][j] = 0.0;
                } else if span > 0.0 && span.is_finite() {
                    g_plus[c][j] = ((means[c] - lo) / span).clamp(0.0, 1.0);
                } else {
                    // degenerate normalization: single value or zero spread
                    g_plus[c][j] = 1.0;
                }
            }
        }
        let index = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        ConstraintMap { index, g_plus, p: cfg.p }
    }

    /// The `g_plus` image of `u`; `u` must belong to the candidate set.
    pub fn g_plus(&self, u: &[usize]) -> &[f64] {
        let idx = self
            .index
            .get(u)
            .unwrap_or_else(|| panic!("component {u:?} not in the candidate set"));
        &self.g_plus[*idx]
    }

    /// Constraint pseudo-distance `d_g(u, v) = ||g_plus(u) - g_plus(v)||_p`.
    pub fn d_g(&self, u: &[usize], v: &[usize]) -> f64 {
        p_norm_diff(self.g_plus(u), self.g_plus(v), self.p)
    }
}

/// One-shot `g_plus` image of `u` over a candidate set.
///
/// Normalization constants are computed over `candidates`; prefer
/// [`ConstraintMap::build`] when several lookups share the same context.
pub fn g_plus(
    u: &[usize],
    template: &Point,
    constraint_models: &[GpModel],
    cfg: &ConstraintMapConfig,
    candidates: &[Vec<usize>],
) -> Result<Vec<f64>> {
    let map = ConstraintMap::build(candidates, template, constraint_models, cfg)?;
    Ok(map.g_plus(u).to_vec())
}

pub(crate) fn p_norm_diff(a: &[f64], b: &[f64], p: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "vector length mismatch");
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn objective_distance_examples() {
        let theta = vec![vec![1.0, 1.0, 1.0]];
        assert_eq!(d_f(&[1], &[1], &theta), 0.0);
        let v = d_f(&[0], &[1], &theta);
        assert!((v - (2.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-12);
        assert!((v - 1.72933).abs() < 1e-5);
    }

    #[test]
    fn objective_distance_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let theta = vec![vec![0.3, 2.0, 1.5], vec![5.0, 0.1]];
        for _ in 0..100 {
            let u = vec![rng.gen_range(0..3), rng.gen_range(0..2)];
            let v = vec![rng.gen_range(0..3), rng.gen_range(0..2)];
            assert_eq!(d_f(&u, &v, &theta).to_bits(), d_f(&v, &u, &theta).to_bits());
            assert!(d_f(&u, &v, &theta) >= 0.0);
        }
    }

    #[test]
    fn sqrt_of_objective_distance_satisfies_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let theta = vec![
                (0..4).map(|_| rng.gen_range(0.01..5.0)).collect::<Vec<f64>>(),
                (0..3).map(|_| rng.gen_range(0.01..5.0)).collect::<Vec<f64>>(),
            ];
            let mut comp = || vec![rng.gen_range(0..4), rng.gen_range(0..3)];
            let (u, v, w) = (comp(), comp(), comp());
            let duw = d_f(&u, &w, &theta).sqrt();
            let duv = d_f(&u, &v, &theta).sqrt();
            let dvw = d_f(&v, &w, &theta).sqrt();
            assert!(duw <= duv + dvw + 1e-12);
        }
    }

    #[test]
    fn fallback_distance_is_prediction_difference() {
        let values = |u: &[usize]| match u[0] {
            0 => 3.0,
            1 => 5.5,
            _ => 3.0,
        };
        assert_eq!(d_f_fallback(&[0], &[0], values), 0.0);
        assert_eq!(d_f_fallback(&[0], &[1], values), 2.5);
        // non-injective predictions: distinct components at distance zero
        assert_eq!(d_f_fallback(&[0], &[2], values), 0.0);
    }

    fn three_candidates() -> Vec<Vec<usize>> {
        vec![vec![0], vec![1], vec![2]]
    }

    #[test]
    fn g_plus_min_max_arithmetic() {
        let cfg = ConstraintMapConfig { lambda: 0.0, ..Default::default() };
        let ghat = vec![vec![0.2, 0.6, 1.0]];
        let sigma = vec![vec![0.0, 0.0, 0.0]];
        let map = ConstraintMap::from_predictions(&three_candidates(), &ghat, &sigma, &cfg);
        assert_eq!(map.g_plus(&[0]), &[0.0]);
        assert!((map.g_plus(&[1])[0] - 0.5).abs() < 1e-12);
        assert_eq!(map.g_plus(&[2]), &[1.0]);
    }

    #[test]
    fn g_plus_zero_when_predicted_feasible_after_relaxation() {
        let cfg = ConstraintMapConfig::default(); // lambda = 1
        let ghat = vec![vec![0.5, 0.3, -1.0]];
        let sigma = vec![vec![1.0, 0.1, 0.0]];
        let map = ConstraintMap::from_predictions(&three_candidates(), &ghat, &sigma, &cfg);
        // 0.5 - 1*1.0 <= 0 -> relaxed feasible
        assert_eq!(map.g_plus(&[0]), &[0.0]);
        // 0.3 - 0.1 > 0 -> positive, and the only positive one -> degenerate 1.0
        assert_eq!(map.g_plus(&[1]), &[1.0]);
        assert_eq!(map.g_plus(&[2]), &[0.0]);
    }

    #[test]
    fn g_plus_degenerate_normalization_maps_to_one() {
        let cfg = ConstraintMapConfig { lambda: 0.0, ..Default::default() };
        let ghat = vec![vec![0.7, 0.7, 0.7]];
        let sigma = vec![vec![0.0; 3]];
        let map = ConstraintMap::from_predictions(&three_candidates(), &ghat, &sigma, &cfg);
        for c in three_candidates() {
            assert_eq!(map.g_plus(&c), &[1.0]);
        }
    }

    #[test]
    fn lambda_zero_reduces_to_plain_feasibility_test() {
        let cfg = ConstraintMapConfig { lambda: 0.0, ..Default::default() };
        let ghat = vec![vec![-1e-12, 1e-12, 0.0]];
        let sigma = vec![vec![100.0; 3]];
        let map = ConstraintMap::from_predictions(&three_candidates(), &ghat, &sigma, &cfg);
        assert_eq!(map.g_plus(&[0]), &[0.0]);
        assert_eq!(map.g_plus(&[1]), &[1.0]);
        assert_eq!(map.g_plus(&[2]), &[0.0]);
    }

    #[test]
    fn pseudo_distance_examples() {
        assert_eq!(p_norm_diff(&[0.0, 0.5], &[0.0, 0.0], 2.0), 0.5);
        assert_eq!(p_norm_diff(&[0.0, 0.0], &[0.0, 0.0], 2.0), 0.0);
        let v = p_norm_diff(&[1.0, 1.0], &[0.0, 0.0], 1.0);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pseudo_distance_is_zero_between_relaxed_feasible_components() {
        let cfg = ConstraintMapConfig::default();
        let ghat = vec![vec![-0.5, 0.1, 3.0], vec![0.0, -2.0, 1.0]];
        let sigma = vec![vec![0.2; 3], vec![0.5; 3]];
        let map = ConstraintMap::from_predictions(&three_candidates(), &ghat, &sigma, &cfg);
        // components 0 and 1 are relaxed-feasible on both constraints
        assert_eq!(map.d_g(&[0], &[1]), 0.0);
        assert!(map.d_g(&[0], &[2]) > 0.0);
    }

    #[test]
    fn pseudo_distance_satisfies_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = rng.gen_range(1.0..4.0);
            let dim = rng.gen_range(1..5);
            let mut vec3 = || (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<f64>>();
            let (a, b, c) = (vec3(), vec3(), vec3());
            let dac = p_norm_diff(&a, &c, p);
            let dab = p_norm_diff(&a, &b, p);
            let dbc = p_norm_diff(&b, &c, p);
            assert!(dac <= dab + dbc + 1e-12);
        }
    }
}
