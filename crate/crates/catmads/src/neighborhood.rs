//! Surrogate-based categorical neighborhoods.
//!
//! At an incumbent, every candidate categorical component gets a pair of
//! ranking images `(p, s)`: for a feasible incumbent the primary ranking is
//! the constraint pseudo-distance and the secondary the objective distance,
//! and the roles swap at an infeasible incumbent. The partial order induced
//! by these images is totalized in tiers mirroring the three-step procedure
//! for constrained problems: the incumbent itself, then the nondominated
//! components ascending by `(p, s)`, then dominated components with `p = 0`
//! ascending by `s`, then everything else ascending by `(p, s)`. Remaining
//! exact ties break on the lexicographic component index so the result is
//! deterministic.
//!
//! The neighborhood of size `m` is the first `m` entries of that order; its
//! first element is always the incumbent's own component.

use std::cmp::Ordering;
use std::fmt;

use crate::distances::{d_f, ConstraintMap, ConstraintMapConfig};
use crate::domain::{Domain, Point};
use crate::error::{Error, Result};
use crate::surrogate::GpModel;

/// Position of a component in the tiered ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    Incumbent,
    Pareto,
    ZeroPrimary,
    Rest,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tier::Incumbent => "incumbent",
            Tier::Pareto => "pareto",
            Tier::ZeroPrimary => "zero_primary",
            Tier::Rest => "rest",
        };
        f.write_str(s)
    }
}

/// A categorical component with its ranking images and tier.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedComponent {
    pub component: Vec<usize>,
    pub p: f64,
    pub s: f64,
    pub tier: Tier,
}

/// True iff `a` dominates `b`: no worse in both images, better in one.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Ranking-function evaluator at a fixed incumbent.
///
/// Maps a candidate component to its `(p, s)` pair. For unconstrained
/// problems the constraint pseudo-distance is zero by convention and only
/// the objective distance orders the components.
pub struct RankingEvaluator {
    theta_cat: Vec<Vec<f64>>,
    incumbent_cat: Vec<usize>,
    constraint_map: Option<ConstraintMap>,
    incumbent_feasible: bool,
}

impl RankingEvaluator {
    pub fn eval(&self, v: &[usize]) -> (f64, f64) {
        let df = d_f(&self.incumbent_cat, v, &self.theta_cat);
        let dg = match &self.constraint_map {
            Some(map) => map.d_g(&self.incumbent_cat, v),
            None => 0.0,
        };
        if self.incumbent_feasible {
            (dg, df)
        } else {
            (df, dg)
        }
    }
}

/// Builds the ranking functions at `x`.
///
/// Feasibility of `x` comes from its true evaluation (`h = 0`), not a
/// surrogate prediction. Constraint predictions and normalization constants
/// are computed once over `candidates` at `x`'s quantitative component; the
/// categorical kernel weights are read from the objective model.
pub fn ranking_functions(
    x: &Point,
    x_is_feasible: bool,
    objective: &GpModel,
    constraints: &[GpModel],
    cfg: &ConstraintMapConfig,
    candidates: &[Vec<usize>],
) -> Result<RankingEvaluator> {
    let constraint_map = if constraints.is_empty() {
        None
    } else {
        Some(ConstraintMap::build(candidates, x, constraints, cfg)?)
    };
    Ok(RankingEvaluator {
        theta_cat: objective.hyperparams().theta_cat.clone(),
        incumbent_cat: x.cat.clone(),
        constraint_map,
        incumbent_feasible: x_is_feasible,
    })
}

fn by_p_s(a: &RankedComponent, b: &RankedComponent) -> Ordering {
    a.p.total_cmp(&b.p)
        .then(a.s.total_cmp(&b.s))
        .then_with(|| a.component.cmp(&b.component))
}

fn by_s(a: &RankedComponent, b: &RankedComponent) -> Ordering {
    a.s.total_cmp(&b.s)
        .then(a.p.total_cmp(&b.p))
        .then_with(|| a.component.cmp(&b.component))
}

/// Orders `candidates` around `u` into the deterministic tiered total order.
///
/// `u` must belong to `candidates`; the returned list is a permutation of it.
pub fn order_components<F: Fn(&[usize]) -> (f64, f64)>(
    u: &[usize],
    candidates: &[Vec<usize>],
    eval: F,
) -> Vec<RankedComponent> {
    let mut incumbent = None;
    let mut others: Vec<RankedComponent> = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let (p, s) = eval(cand);
        let rc = RankedComponent { component: cand.clone(), p, s, tier: Tier::Rest };
        if cand.as_slice() == u && incumbent.is_none() {
            incumbent = Some(RankedComponent { tier: Tier::Incumbent, ..rc });
        } else {
            others.push(rc);
        }
    }
    let incumbent = incumbent.expect("incumbent component must be a candidate");

    let images: Vec<(f64, f64)> = others.iter().map(|rc| (rc.p, rc.s)).collect();
    let mut pareto = Vec::new();
    let mut zero_primary = Vec::new();
    let mut rest = Vec::new();
    for (i, mut rc) in others.into_iter().enumerate() {
        let dominated = images
            .iter()
            .enumerate()
            .any(|(j, &img)| j != i && dominates(img, (rc.p, rc.s)));
        if !dominated {
            rc.tier = Tier::Pareto;
            pareto.push(rc);
        } else if rc.p == 0.0 {
            rc.tier = Tier::ZeroPrimary;
            zero_primary.push(rc);
        } else {
            rc.tier = Tier::Rest;
            rest.push(rc);
        }
    }
    pareto.sort_by(by_p_s);
    zero_primary.sort_by(by_s);
    rest.sort_by(by_p_s);

    let mut out = Vec::with_capacity(candidates.len());
    out.push(incumbent);
    out.extend(pareto);
    out.extend(zero_primary);
    out.extend(rest);
    out
}

/// The surrogate-based neighborhood `N(x; m)`.
///
/// Returns `m` categorical components of lowest ordering; the first is
/// always `x.cat` and all are distinct.
pub fn build_neighborhood(
    x: &Point,
    x_is_feasible: bool,
    m: usize,
    objective: &GpModel,
    constraints: &[GpModel],
    cfg: &ConstraintMapConfig,
    candidates: &[Vec<usize>],
) -> Result<Vec<Vec<usize>>> {
    if m < 1 {
        return Err(Error::Config("neighborhood size m must be at least 1".into()));
    }
    if m > candidates.len() {
        return Err(Error::Config(format!(
            "neighborhood size {m} exceeds the {} candidate components",
            candidates.len()
        )));
    }
    let evaluator = ranking_functions(x, x_is_feasible, objective, constraints, cfg, candidates)?;
    let ranked = order_components(&x.cat, candidates, |v| evaluator.eval(v));
    Ok(ranked.into_iter().take(m).map(|rc| rc.component).collect())
}

/// Default neighborhood size `max(3, ceil(sqrt(|X^cat|)))`, capped at the
/// number of categorical components.
pub fn default_m(domain: &Domain) -> usize {
    let total = domain.cat_component_count();
    let root = (total as f64).sqrt().ceil() as u128;
    root.max(3).min(total) as usize
}

/// Structured text dump of a ranked candidate list, one component per line.
pub fn dump_ranked(ranked: &[RankedComponent]) -> String {
    let mut out = String::from("# rank\tp\ts\ttier\tcomponent\n");
    for (i, rc) in ranked.iter().enumerate() {
        let comp = rc
            .component
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{}\t{:.16e}\t{:.16e}\t{}\t{}\n", i, rc.p, rc.s, rc.tier, comp));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dominance_truth_table() {
        assert!(dominates((0.0, 1.0), (1.0, 2.0)));
        assert!(!dominates((0.0, 2.0), (1.0, 1.0)));
        assert!(!dominates((1.0, 1.0), (1.0, 1.0)));
        assert!(dominates((1.0, 1.0), (1.0, 2.0)));
    }

    fn single_var_candidates(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|i| vec![i]).collect()
    }

    /// Pairwise oracle: at least one ordering-relation condition must hold
    /// for every ordered pair of the output.
    fn check_pairwise_conditions(u: &[usize], ranked: &[RankedComponent]) {
        let non_incumbent: Vec<&RankedComponent> =
            ranked.iter().filter(|rc| rc.component != u).collect();
        let dominated = |rc: &RankedComponent| {
            non_incumbent
                .iter()
                .any(|o| o.component != rc.component && dominates((o.p, o.s), (rc.p, rc.s)))
        };
        for i in 0..ranked.len() {
            for j in (i + 1)..ranked.len() {
                let (v, w) = (&ranked[i], &ranked[j]);
                if v.component == u {
                    continue; // the incumbent is ordered first by definition
                }
                let c1 = v.p == 0.0 && w.p == 0.0 && v.s <= w.s;
                let c2 = v.p > 0.0 && w.p > 0.0 && v.p <= w.p;
                let c3 = !dominated(v) && dominated(w);
                let c4 = v.p <= w.p;
                assert!(
                    c1 || c2 || c3 || c4,
                    "no ordering condition holds for {:?} before {:?}",
                    (v.p, v.s),
                    (w.p, w.s)
                );
            }
        }
    }

    #[test]
    fn ordering_reproduces_the_three_step_schematic() {
        // 11 non-incumbent points in (p, s) image space: four Pareto points,
        // two dominated points with p = 0, five remaining points
        let images = [
            (0.0, 2.0),
            (1.0, 1.5),
            (2.0, 1.0),
            (3.0, 0.5),
            (0.0, 4.0),
            (0.0, 5.0),
            (1.9, 2.55),
            (2.7, 3.65),
            (3.3, 3.2),
            (4.0, 2.25),
            (5.0, 3.45),
        ];
        let candidates = single_var_candidates(12);
        let u = vec![11usize];
        let eval = |v: &[usize]| {
            if v[0] == 11 {
                (0.0, 0.0)
            } else {
                images[v[0]]
            }
        };
        let ranked = order_components(&u, &candidates, eval);
        assert_eq!(ranked[0].component, u);
        assert_eq!(ranked[0].tier, Tier::Incumbent);
        // ranks 1-4: Pareto ascending by p
        let want_pareto = [(0.0, 2.0), (1.0, 1.5), (2.0, 1.0), (3.0, 0.5)];
        for (k, want) in want_pareto.iter().enumerate() {
            assert_eq!(ranked[1 + k].tier, Tier::Pareto);
            assert_eq!((ranked[1 + k].p, ranked[1 + k].s), *want);
        }
        // ranks 5-6: dominated zero-p points by s
        assert_eq!((ranked[5].p, ranked[5].s), (0.0, 4.0));
        assert_eq!((ranked[6].p, ranked[6].s), (0.0, 5.0));
        assert_eq!(ranked[5].tier, Tier::ZeroPrimary);
        // ranks 7-11: the rest ascending by p
        let want_rest = [1.9, 2.7, 3.3, 4.0, 5.0];
        for (k, want) in want_rest.iter().enumerate() {
            assert_eq!(ranked[7 + k].tier, Tier::Rest);
            assert_eq!(ranked[7 + k].p, *want);
        }
        check_pairwise_conditions(&u, &ranked);
    }

    #[test]
    fn unconstrained_ordering_is_ascending_secondary() {
        let candidates = single_var_candidates(6);
        let u = vec![0usize];
        let s_values = [0.0, 1.0, 2.5, 4.0, 4.75, 5.75];
        let eval = |v: &[usize]| (0.0, s_values[v[0]]);
        let ranked = order_components(&u, &candidates, eval);
        let got: Vec<f64> = ranked.iter().map(|rc| rc.s).collect();
        assert_eq!(got, s_values.to_vec());
    }

    #[test]
    fn ordering_is_a_permutation_and_satisfies_the_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(2..=12);
            let candidates = single_var_candidates(n);
            let u = vec![rng.gen_range(0..n)];
            let images: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    let p = if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..3.0) };
                    // duplicate-prone grid to exercise ties
                    let s = (rng.gen_range(0.0..3.0f64) * 4.0).round() / 4.0;
                    (p, s)
                })
                .collect();
            let eval = |v: &[usize]| if v == u.as_slice() { (0.0, 0.0) } else { images[v[0]] };
            let ranked = order_components(&u, &candidates, eval);
            assert_eq!(ranked.len(), n);
            let mut comps: Vec<_> = ranked.iter().map(|rc| rc.component.clone()).collect();
            comps.sort();
            comps.dedup();
            assert_eq!(comps.len(), n, "output must be a permutation");
            assert_eq!(ranked[0].component, u);
            check_pairwise_conditions(&u, &ranked);
        }
    }

    #[test]
    fn infeasible_incumbent_swaps_the_ranking_roles() {
        use crate::domain::VariableSpec;
        use crate::kernels::KernelHyperparams;
        use crate::surrogate::fit;
        let domain = Domain::new(vec![
            VariableSpec::Categorical { levels: 3, labels: None },
            VariableSpec::Continuous { lb: 0.0, ub: 1.0 },
        ])
        .unwrap();
        let train: Vec<Point> = (0..6)
            .map(|i| Point::new(vec![i % 3], vec![], vec![i as f64 / 5.0]))
            .collect();
        assert!(train.iter().all(|p| domain.validate(p)));
        let targets = [0.0, 1.0, 2.0, 1.5, 0.5, 2.5];
        let hp = KernelHyperparams::new(vec![4.0], vec![vec![0.7, 1.3, 2.0]]);
        let objective = fit(&train, &targets, &hp).unwrap();
        let g_model = fit(&train, &[0.5, 0.4, 0.3, 0.2, 0.6, 0.1], &hp).unwrap();

        let candidates = vec![vec![0], vec![1], vec![2]];
        let x = Point::new(vec![0], vec![], vec![0.4]);
        let cfg = ConstraintMapConfig::default();
        let models = [g_model];
        let feasible =
            ranking_functions(&x, true, &objective, &models, &cfg, &candidates).unwrap();
        let infeasible =
            ranking_functions(&x, false, &objective, &models, &cfg, &candidates).unwrap();
        let theta = &objective.hyperparams().theta_cat;
        for v in &candidates {
            let df = d_f(&x.cat, v, theta);
            // infeasible incumbent: primary ranking is the objective distance
            assert_eq!(infeasible.eval(v).0, df);
            assert_eq!(feasible.eval(v).1, df);
            // the two cases swap the same pair of values
            assert_eq!(feasible.eval(v).0, infeasible.eval(v).1);
        }
    }

    #[test]
    fn constrained_fixture_recovers_truly_feasible_components() {
        use crate::domain::VariableSpec;
        use crate::surrogate::{fit, optimize_hyperparams, HyperoptConfig};
        // 12 components; only {0, 3, 7, 9} admit feasible points (x >= 0.2)
        let feasible_comps = [0usize, 3, 7, 9];
        let g_true = |c: usize, x: f64| {
            if feasible_comps.contains(&c) {
                0.2 - x
            } else {
                1.0 - 0.1 * x
            }
        };
        let bases =
            [3.0, 6.0, 8.0, 3.5, 9.0, 7.0, 6.5, 4.0, 8.5, 4.5, 7.5, 9.5];
        let f_true = |c: usize, x: f64| bases[c] + (x - 0.5) * (x - 0.5);

        let domain = Domain::new(vec![
            VariableSpec::Categorical { levels: 12, labels: None },
            VariableSpec::Continuous { lb: 0.0, ub: 1.0 },
        ])
        .unwrap();
        // ground truth by a dense grid over the continuous variable
        for c in 0..12 {
            let any_feasible = (0..=1000).any(|i| g_true(c, i as f64 / 1000.0) <= 0.0);
            assert_eq!(any_feasible, feasible_comps.contains(&c));
        }

        let mut train = Vec::new();
        let mut f_targets = Vec::new();
        let mut g_targets = Vec::new();
        for c in 0..12 {
            for x in [0.1, 0.35, 0.6, 0.85] {
                train.push(Point::new(vec![c], vec![], vec![x]));
                f_targets.push(f_true(c, x));
                g_targets.push(g_true(c, x));
            }
        }
        let hopt = HyperoptConfig { n_starts: 2, max_iters: 80, seed: 0 };
        let hp_f = optimize_hyperparams(&domain, &train, &f_targets, &hopt).unwrap();
        let objective = fit(&train, &f_targets, &hp_f).unwrap();
        let hp_g = optimize_hyperparams(&domain, &train, &g_targets, &hopt).unwrap();
        let constraint = fit(&train, &g_targets, &hp_g).unwrap();

        let x = Point::new(vec![0], vec![], vec![0.6]);
        assert!(g_true(0, 0.6) <= 0.0);
        let candidates: Vec<Vec<usize>> = (0..12).map(|c| vec![c]).collect();
        let cfg = ConstraintMapConfig::default();
        let neighborhood =
            build_neighborhood(&x, true, 6, &objective, &[constraint], &cfg, &candidates)
                .unwrap();
        assert_eq!(neighborhood[0], vec![0]);
        let hits = neighborhood
            .iter()
            .filter(|comp| feasible_comps.contains(&comp[0]))
            .count();
        assert!(hits >= 3, "only {hits} of the truly feasible components recovered");

        // a single-component neighborhood is the incumbent alone
        let lone =
            build_neighborhood(&x, true, 1, &objective, &[], &cfg, &candidates).unwrap();
        assert_eq!(lone, vec![vec![0]]);
    }

    #[test]
    fn first_ranked_component_has_zero_primary_when_one_exists() {
        let candidates = single_var_candidates(5);
        let u = vec![0usize];
        let images = [(0.0, 0.0), (2.0, 0.1), (0.0, 3.0), (1.0, 0.5), (0.5, 2.0)];
        let ranked = order_components(&u, &candidates, |v| images[v[0]]);
        assert_eq!(ranked[1].p, 0.0);
    }

    #[test]
    fn default_m_examples() {
        use crate::domain::VariableSpec;
        let domain = |levels: &[usize]| {
            Domain::new(
                levels
                    .iter()
                    .map(|&l| VariableSpec::Categorical { levels: l, labels: None })
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(default_m(&domain(&[2, 4, 3])), 5); // ceil(sqrt(24)) = 5
        assert_eq!(default_m(&domain(&[2, 2])), 3);
        assert_eq!(default_m(&domain(&[2])), 2); // capped at |X^cat|
    }

    #[test]
    fn dump_is_one_line_per_component() {
        let ranked = vec![
            RankedComponent { component: vec![0, 1], p: 0.0, s: 0.0, tier: Tier::Incumbent },
            RankedComponent { component: vec![1, 1], p: 0.5, s: 1.0, tier: Tier::Pareto },
        ];
        let text = dump_ranked(&ranked);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with('#'));
        assert!(lines[1].contains("incumbent"));
        assert!(lines[2].contains("pareto"));
        assert!(lines[2].contains("1 1"));
    }
}
