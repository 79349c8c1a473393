//! Latin hypercube design of experiments on the mixed-variable domain.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Domain, Point, VariableSpec};

/// Draws `count` points: quantitative coordinates follow a Latin hypercube
/// (one sample per stratum, randomly permuted across points), categorical
/// coordinates cycle through the categories in a random order and are then
/// shuffled, so each category appears either `floor` or `ceil` of
/// `count / levels` times.
pub fn lhs_doe<R: Rng>(domain: &Domain, count: usize, rng: &mut R) -> Vec<Point> {
    assert!(count >= 1, "DoE needs at least one point");
    let n_cat = domain.n_cat();
    let n_int = domain.n_int();
    let n_con = domain.n_con();
    let mut cat = vec![vec![0usize; n_cat]; count];
    let mut int = vec![vec![0i64; n_int]; count];
    let mut con = vec![vec![0f64; n_con]; count];

    let (mut kc, mut ki, mut kr) = (0, 0, 0);
    for var in domain.variables() {
        match var {
            VariableSpec::Categorical { levels, .. } => {
                let mut order: Vec<usize> = (0..*levels).collect();
                order.shuffle(rng);
                let mut assignment: Vec<usize> =
                    (0..count).map(|i| order[i % levels]).collect();
                assignment.shuffle(rng);
                for (i, c) in assignment.into_iter().enumerate() {
                    cat[i][kc] = c;
                }
                kc += 1;
            }
            VariableSpec::Integer { lb, ub } => {
                let cells = (*ub - *lb + 1) as f64;
                for (i, u) in stratified_uniforms(count, rng).into_iter().enumerate() {
                    int[i][ki] = (*lb + (u * cells).floor() as i64).clamp(*lb, *ub);
                }
                ki += 1;
            }
            VariableSpec::Continuous { lb, ub } => {
                for (i, u) in stratified_uniforms(count, rng).into_iter().enumerate() {
                    con[i][kr] = lb + u * (ub - lb);
                }
                kr += 1;
            }
        }
    }

    (0..count)
        .map(|i| Point::new(cat[i].clone(), int[i].clone(), con[i].clone()))
        .collect()
}

/// One uniform draw per stratum of `[0,1)`, in shuffled stratum order.
fn stratified_uniforms<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    let mut strata: Vec<usize> = (0..count).collect();
    strata.shuffle(rng);
    strata
        .into_iter()
        .map(|s| (s as f64 + rng.gen_range(0.0..1.0)) / count as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn continuous_strata_each_get_one_sample() {
        let domain = Domain::new(vec![VariableSpec::Continuous { lb: 0.0, ub: 1.0 }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = lhs_doe(&domain, 4, &mut rng);
        let mut hit = [false; 4];
        for p in &pts {
            let stratum = (p.con[0] * 4.0).floor().min(3.0) as usize;
            assert!(!hit[stratum], "two samples in one stratum");
            hit[stratum] = true;
        }
        assert!(hit.iter().all(|&b| b));
    }

    #[test]
    fn categories_are_balanced() {
        let domain =
            Domain::new(vec![VariableSpec::Categorical { levels: 3, labels: None }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = lhs_doe(&domain, 6, &mut rng);
        let mut counts = [0usize; 3];
        for p in &pts {
            counts[p.cat[0]] += 1;
        }
        assert_eq!(counts, [2, 2, 2]);
    }

    #[test]
    fn integer_samples_respect_bounds_and_spread() {
        let domain = Domain::new(vec![VariableSpec::Integer { lb: -2, ub: 2 }]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = lhs_doe(&domain, 5, &mut rng);
        let mut values: Vec<i64> = pts.iter().map(|p| p.int[0]).collect();
        values.sort_unstable();
        assert_eq!(values, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn same_seed_gives_identical_designs() {
        let domain = Domain::new(vec![
            VariableSpec::Categorical { levels: 4, labels: None },
            VariableSpec::Integer { lb: 0, ub: 9 },
            VariableSpec::Continuous { lb: -1.0, ub: 1.0 },
        ])
        .unwrap();
        let a = lhs_doe(&domain, 10, &mut ChaCha8Rng::seed_from_u64(123));
        let b = lhs_doe(&domain, 10, &mut ChaCha8Rng::seed_from_u64(123));
        assert_eq!(a, b);
        let c = lhs_doe(&domain, 10, &mut ChaCha8Rng::seed_from_u64(124));
        assert_ne!(a, c);
    }
}
