//! Opportunistic surrogate search step.
//!
//! Scores mesh-snapped random candidates by expected improvement over the
//! feasible incumbent's objective, weighted by the product of predicted
//! per-constraint feasibility probabilities, and proposes the best candidate
//! that has not been evaluated yet.

use rand::Rng;
use statrs::function::erf::erfc;

use crate::domain::{Domain, Point};
use crate::surrogate::GpModel;

use super::mesh::MeshState;

/// Standard normal CDF.
fn phi_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn phi_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement below `f_best`; zero at zero predictive deviation.
pub fn expected_improvement(mean: f64, std: f64, f_best: f64) -> f64 {
    if std.is_nan() || std <= 1e-12 {
        return 0.0;
    }
    let z = (f_best - mean) / std;
    ((f_best - mean) * phi_cdf(z) + std * phi_pdf(z)).max(0.0)
}

/// Probability that all constraints are satisfied under the GP predictions.
fn feasibility_probability(models: &[GpModel], x: &Point) -> f64 {
    let mut prob = 1.0;
    for model in models {
        let (mean, var) = model.predict(x);
        let std = var.max(0.0).sqrt();
        let p = if std > 1e-12 {
            phi_cdf(-mean / std)
        } else if mean <= 0.0 {
            1.0
        } else {
            0.0
        };
        prob *= p;
    }
    prob
}

/// Proposes the best unevaluated mesh-snapped candidate, if any.
///
/// `f_best` anchors the expected improvement: the feasible incumbent's
/// objective, or the minimal observed finite objective when no feasible
/// point exists yet. `is_cached` filters out already-evaluated points.
#[allow(clippy::too_many_arguments)]
pub fn search_step_bo<R: Rng, C: Fn(&Point) -> bool>(
    domain: &Domain,
    objective: &GpModel,
    constraints: &[GpModel],
    anchor: &Point,
    f_best: f64,
    mesh: &MeshState,
    rng: &mut R,
    n_candidates: usize,
    is_cached: C,
) -> Option<Point> {
    let bounds = domain.qnt_bounds();
    let n_int = domain.n_int();
    let anchor_qnt = anchor.qnt();
    let mut best: Option<(Point, f64)> = None;
    for _ in 0..n_candidates {
        let cat: Vec<usize> = domain
            .cat_levels()
            .iter()
            .map(|&l| rng.gen_range(0..l))
            .collect();
        let mut int = Vec::with_capacity(n_int);
        let mut con = Vec::with_capacity(domain.n_con());
        for (i, &(lb, ub)) in bounds.iter().enumerate() {
            let w = ub - lb;
            let value = if w == 0.0 {
                lb
            } else {
                // snap a uniform draw to the mesh lattice anchored at the incumbent
                let step = mesh.delta() * w;
                let u = rng.gen_range(lb..=ub);
                (anchor_qnt[i] + step * ((u - anchor_qnt[i]) / step).round()).clamp(lb, ub)
            };
            if i < n_int {
                int.push((value.round() as i64).clamp(lb as i64, ub as i64));
            } else {
                con.push(value);
            }
        }
        let candidate = Point::new(cat, int, con);
        if is_cached(&candidate) {
            continue;
        }
        let (mean, var) = objective.predict(&candidate);
        let score = expected_improvement(mean, var.max(0.0).sqrt(), f_best)
            * feasibility_probability(constraints, &candidate);
        match &best {
            Some((_, best_score)) if *best_score >= score => {}
            _ => best = Some((candidate, score)),
        }
    }
    best.map(|(p, _)| p)
}
