//! Parametric synthetic problem suite.
//!
//! Each problem is a categorical-shifted ellipsoid (or Rosenbrock-style
//! valley): every categorical component selects a shift, rotation, axis
//! weights, scale and offset of the continuous landscape, plus the target of
//! an optional integer term. Half the problems add constraints (a ball, a
//! halfplane, sometimes an inner exclusion ball) whose centers and radii
//! also depend on the categorical component, so the active set changes with
//! the component.
//!
//! Every problem records a reference optimum at construction: analytic for
//! the unconstrained members (the smallest per-component offset), and a
//! dense grid restricted to each component for the constrained ones
//! (1e-3 resolution over the continuous box, exact constraint checks).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Domain, Evaluation, Point, VariableSpec};

use super::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Style {
    Ellipsoid,
    Rosenbrock,
}

#[derive(Debug, Clone)]
struct CompParams {
    shift: Vec<f64>,
    angle: f64,
    weights: Vec<f64>,
    scale: f64,
    offset: f64,
    int_target: i64,
    /// Ball constraint `||z - center||^2 <= radius^2`.
    ball: Option<(Vec<f64>, f64)>,
    /// Halfplane constraint `a . (z - center) <= slack`.
    halfplane: Option<(Vec<f64>, f64)>,
    /// Inner exclusion ball `||z - center|| >= inner_radius`.
    inner_radius: Option<f64>,
}

#[derive(Debug, Clone)]
struct Blueprint {
    cat_levels: Vec<usize>,
    n_int: usize,
    n_con: usize,
    style: Style,
    n_constraints: usize,
    con_bound: f64,
}

fn blueprints() -> Vec<Blueprint> {
    let bp = |cat_levels: Vec<usize>, n_int, n_con, style, n_constraints, con_bound| Blueprint {
        cat_levels,
        n_int,
        n_con,
        style,
        n_constraints,
        con_bound,
    };
    vec![
        bp(vec![4], 0, 2, Style::Ellipsoid, 0, 2.0),
        bp(vec![3], 0, 2, Style::Rosenbrock, 0, 2.0),
        bp(vec![3], 1, 2, Style::Ellipsoid, 0, 2.0),
        bp(vec![2, 3], 0, 2, Style::Ellipsoid, 0, 2.0),
        bp(vec![5], 0, 3, Style::Ellipsoid, 0, 2.0),
        bp(vec![4], 0, 2, Style::Ellipsoid, 1, 1.0),
        bp(vec![3], 0, 2, Style::Ellipsoid, 2, 1.0),
        bp(vec![2, 2], 0, 2, Style::Ellipsoid, 2, 1.0),
        bp(vec![6], 0, 2, Style::Ellipsoid, 2, 1.0),
        bp(vec![2, 2, 2], 0, 2, Style::Ellipsoid, 3, 1.0),
    ]
}

fn component_index(cat: &[usize], levels: &[usize]) -> usize {
    let mut idx = 0;
    for (c, l) in cat.iter().zip(levels) {
        idx = idx * l + c;
    }
    idx
}

fn draw_params(bp: &Blueprint, rng: &mut ChaCha8Rng) -> Vec<CompParams> {
    let total: usize = bp.cat_levels.iter().product();
    let b = bp.con_bound;
    let constrained = bp.n_constraints > 0;
    (0..total)
        .map(|_| {
            let shift_bound = if bp.style == Style::Rosenbrock {
                // keep the rotated valley bottom (shift plus up to sqrt(2)) inside
                0.55
            } else {
                0.55 * b
            };
            let shift: Vec<f64> =
                (0..bp.n_con).map(|_| rng.gen_range(-shift_bound..shift_bound)).collect();
            let angle = rng.gen_range(0.0..std::f64::consts::PI);
            let weights: Vec<f64> = (0..bp.n_con).map(|_| rng.gen_range(1.0..3.0)).collect();
            let scale = rng.gen_range(0.5..1.5);
            let offset = rng.gen_range(0.0..10.0);
            let int_target = if bp.n_int > 0 { rng.gen_range(0..=4) } else { 0 };
            let (ball, halfplane, inner_radius) = if constrained {
                let center: Vec<f64> =
                    (0..bp.n_con).map(|_| rng.gen_range(-0.5 * b..0.5 * b)).collect();
                let radius = rng.gen_range(0.4..0.8);
                let dir = rng.gen_range(0.0..std::f64::consts::TAU);
                let normal = vec![dir.cos(), dir.sin()];
                let slack = rng.gen_range(0.1..0.8);
                let inner = if bp.n_constraints >= 3 {
                    Some(radius * rng.gen_range(0.1..0.3))
                } else {
                    None
                };
                let halfplane =
                    if bp.n_constraints >= 2 { Some((normal, slack)) } else { None };
                (Some((center, radius)), halfplane, inner)
            } else {
                (None, None, None)
            };
            CompParams {
                shift,
                angle,
                weights,
                scale,
                offset,
                int_target,
                ball,
                halfplane,
                inner_radius,
            }
        })
        .collect()
}

fn objective(params: &CompParams, style: Style, z: &[f64], x_int: Option<i64>) -> f64 {
    let mut y: Vec<f64> = z.iter().zip(&params.shift).map(|(a, b)| a - b).collect();
    let (c, s) = (params.angle.cos(), params.angle.sin());
    let (y0, y1) = (y[0], y[1]);
    y[0] = c * y0 - s * y1;
    y[1] = s * y0 + c * y1;
    let q = match style {
        Style::Ellipsoid => y.iter().zip(&params.weights).map(|(v, w)| w * v * v).sum::<f64>(),
        Style::Rosenbrock => {
            // shifted valley with minimum at y = (1, 1)
            let (a, b) = (y[0], y[1]);
            100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a)
        }
    };
    let int_term = match x_int {
        Some(v) => {
            let d = (v - params.int_target) as f64;
            0.7 * d * d
        }
        None => 0.0,
    };
    params.offset + params.scale * q + int_term
}

fn constraints(params: &CompParams, z: &[f64]) -> Vec<f64> {
    let mut g = Vec::new();
    if let Some((center, radius)) = &params.ball {
        let d2: f64 = z.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        g.push(d2 - radius * radius);
        if let Some((normal, slack)) = &params.halfplane {
            let dot: f64 = z.iter().zip(center).zip(normal).map(|((a, b), n)| (a - b) * n).sum();
            g.push(dot - slack);
        }
        if let Some(inner) = params.inner_radius {
            g.push(inner * inner - d2);
        }
    }
    g
}

/// Best feasible value of one component on the dense grid, with the argmin.
fn grid_restriction_optimum(
    params: &CompParams,
    style: Style,
    bound: f64,
    step: f64,
) -> Option<(f64, Vec<f64>)> {
    let cells = (2.0 * bound / step).round() as usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..=cells {
        let z0 = -bound + step * i as f64;
        for j in 0..=cells {
            let z1 = -bound + step * j as f64;
            let z = [z0, z1];
            if constraints(params, &z).iter().any(|&gj| gj > 0.0) {
                continue;
            }
            let f = objective(params, style, &z, None);
            if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
                best = Some((f, z.to_vec()));
            }
        }
    }
    best
}

/// Generates the deterministic ten-problem suite for `seed`.
pub fn synthetic_suite(seed: u64) -> Vec<Problem> {
    blueprints()
        .into_iter()
        .enumerate()
        .map(|(k, bp)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(k as u64));
            let params = draw_params(&bp, &mut rng);

            let mut variables: Vec<VariableSpec> = bp
                .cat_levels
                .iter()
                .map(|&l| VariableSpec::Categorical { levels: l, labels: None })
                .collect();
            for _ in 0..bp.n_int {
                variables.push(VariableSpec::Integer { lb: 0, ub: 4 });
            }
            for _ in 0..bp.n_con {
                variables.push(VariableSpec::Continuous { lb: -bp.con_bound, ub: bp.con_bound });
            }
            let domain = Domain::new(variables).unwrap();

            // reference optimum by component enumeration
            let mut best: Option<(f64, Point)> = None;
            for (idx, p) in params.iter().enumerate() {
                let cat = unrank(idx, &bp.cat_levels);
                let candidate = if bp.n_constraints == 0 {
                    let z = match bp.style {
                        Style::Ellipsoid => p.shift.clone(),
                        Style::Rosenbrock => {
                            // rotate y = (1,1) back and add the shift
                            let (c, s) = (p.angle.cos(), p.angle.sin());
                            vec![p.shift[0] + c * 1.0 + s * 1.0, p.shift[1] - s * 1.0 + c * 1.0]
                        }
                    };
                    Some((p.offset, z))
                } else {
                    grid_restriction_optimum(p, bp.style, bp.con_bound, 1e-3)
                };
                if let Some((f, z)) = candidate {
                    if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
                        let int = if bp.n_int > 0 { vec![p.int_target] } else { vec![] };
                        best = Some((f, Point::new(cat, int, z)));
                    }
                }
            }

            let levels = bp.cat_levels.clone();
            let style = bp.style;
            let has_int = bp.n_int > 0;
            let name = format!("synthetic-{k}");
            let params_for_eval = params;
            let mut problem = Problem::new(
                &name,
                domain,
                bp.n_constraints,
                best.as_ref().map(|(f, _)| *f),
                move |point: &Point| {
                    let p = &params_for_eval[component_index(&point.cat, &levels)];
                    let x_int = if has_int { Some(point.int[0]) } else { None };
                    let f = objective(p, style, &point.con, x_int);
                    Evaluation::new(f, constraints(p, &point.con))
                },
            );
            problem.known_best_point = best.map(|(_, p)| p);
            problem
        })
        .collect()
}

fn unrank(mut idx: usize, levels: &[usize]) -> Vec<usize> {
    let mut cat = vec![0usize; levels.len()];
    for i in (0..levels.len()).rev() {
        cat[i] = idx % levels[i];
        idx /= levels[i];
    }
    cat
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_ten_problems_with_expected_constraint_split() {
        let suite = synthetic_suite(0);
        assert_eq!(suite.len(), 10);
        let unconstrained = suite.iter().filter(|p| p.n_constraints == 0).count();
        assert_eq!(unconstrained, 5);
        for p in &suite {
            assert!(p.known_best.is_some(), "{} lacks a reference optimum", p.name);
        }
    }

    #[test]
    fn reference_optima_are_feasible_and_attained() {
        for problem in synthetic_suite(7) {
            let best_point = problem.known_best_point.as_ref().unwrap();
            assert!(problem.domain.validate(best_point), "{}", problem.name);
            let eval = problem.evaluate(best_point);
            assert!(eval.is_feasible(), "{}: reference point infeasible", problem.name);
            assert!(
                (eval.f - problem.known_best.unwrap()).abs() <= 1e-9,
                "{}: reference value mismatch ({} vs {:?})",
                problem.name,
                eval.f,
                problem.known_best
            );
        }
    }

    #[test]
    fn no_feasible_grid_value_beats_the_constrained_reference() {
        // independent coarse sweep below the recorded optimum would reveal
        // an oracle error
        let suite = synthetic_suite(3);
        for problem in suite.iter().filter(|p| p.n_constraints > 0) {
            let best = problem.known_best.unwrap();
            let (lb, ub) = problem.domain.con_bounds()[0];
            let steps = 160;
            let components = problem
                .domain
                .cat_levels()
                .iter()
                .product::<usize>();
            for idx in 0..components {
                let cat = unrank(idx, problem.domain.cat_levels());
                for i in 0..=steps {
                    for j in 0..=steps {
                        let z0 = lb + (ub - lb) * i as f64 / steps as f64;
                        let z1 = lb + (ub - lb) * j as f64 / steps as f64;
                        let p = Point::new(cat.clone(), vec![], vec![z0, z1]);
                        let e = problem.evaluate(&p);
                        if e.is_feasible() {
                            assert!(
                                e.f >= best - 1e-9,
                                "{}: grid point beats reference ({} < {})",
                                problem.name,
                                e.f,
                                best
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_suite() {
        let a = synthetic_suite(11);
        let b = synthetic_suite(11);
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.known_best, pb.known_best);
            assert_eq!(pa.known_best_point, pb.known_best_point);
            let probe = pa.known_best_point.clone().unwrap();
            assert_eq!(pa.evaluate(&probe), pb.evaluate(&probe));
        }
        let c = synthetic_suite(12);
        assert!(a
            .iter()
            .zip(&c)
            .any(|(pa, pc)| pa.known_best != pc.known_best));
    }
}
