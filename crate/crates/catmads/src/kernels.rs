//! Mixed-variable positive semi-definite kernels.
//!
//! Quantitative variables use a product of one-dimensional Gaussian kernels,
//!
//! ```text
//! k_qnt(x, y) = prod_i exp(-theta_i (x_i - y_i)^2).
//! ```
//!
//! Categorical variables use Gaussian kernels on their one-hot encoding with
//! one hyperparameter per category,
//!
//! ```text
//! k_cat(u, v) = prod_i exp(-||E_i(u_i) - E_i(v_i)||^2_{theta_i}),
//! ```
//!
//! where the weighted squared norm reduces, for `u_i != v_i`, to
//! `theta_i[u_i] + theta_i[v_i]` because exactly two one-hot coordinates
//! differ. The mixed kernel is the product of the two factors; factors are
//! multiplied in declaration order (categorical first) so results are
//! bitwise deterministic.

use nalgebra::DMatrix;

use crate::domain::{Domain, Point};

/// Hyperparameter bounds; values outside are clamped at construction.
pub const THETA_MIN: f64 = 1e-6;
pub const THETA_MAX: f64 = 1e6;

/// Strictly positive kernel hyperparameters for a mixed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelHyperparams {
    /// One weight per quantitative variable (integers first).
    pub theta_qnt: Vec<f64>,
    /// One weight vector per categorical variable, of length `levels`.
    pub theta_cat: Vec<Vec<f64>>,
}

impl KernelHyperparams {
    /// Builds hyperparameters from raw values, clamping into
    /// `[THETA_MIN, THETA_MAX]`.
    pub fn new(theta_qnt: Vec<f64>, theta_cat: Vec<Vec<f64>>) -> Self {
        let clamp = |t: f64| {
            if t.is_nan() {
                1.0
            } else {
                t.clamp(THETA_MIN, THETA_MAX)
            }
        };
        KernelHyperparams {
            theta_qnt: theta_qnt.into_iter().map(clamp).collect(),
            theta_cat: theta_cat
                .into_iter()
                .map(|v| v.into_iter().map(clamp).collect())
                .collect(),
        }
    }

    /// All-ones hyperparameters shaped for `domain`.
    pub fn ones(domain: &Domain) -> Self {
        KernelHyperparams {
            theta_qnt: vec![1.0; domain.n_qnt()],
            theta_cat: domain.cat_levels().iter().map(|&l| vec![1.0; l]).collect(),
        }
    }

    /// Total number of scalar hyperparameters.
    pub fn len(&self) -> usize {
        self.theta_qnt.len() + self.theta_cat.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattens to a single vector (quantitative first, then categorical).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.theta_qnt.clone();
        for v in &self.theta_cat {
            out.extend_from_slice(v);
        }
        out
    }

    /// Rebuilds from a flat vector with the same shape as `self`.
    pub fn unflatten_like(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.len(), "hyperparameter length mismatch");
        let mut it = flat.iter().copied();
        let theta_qnt: Vec<f64> = (0..self.theta_qnt.len()).map(|_| it.next().unwrap()).collect();
        let theta_cat: Vec<Vec<f64>> = self
            .theta_cat
            .iter()
            .map(|v| (0..v.len()).map(|_| it.next().unwrap()).collect())
            .collect();
        KernelHyperparams::new(theta_qnt, theta_cat)
    }
}

/// Product of one-dimensional Gaussian kernels on the quantitative component.
pub fn k_qnt(x_qnt: &[f64], y_qnt: &[f64], theta_qnt: &[f64]) -> f64 {
    assert_eq!(x_qnt.len(), y_qnt.len(), "quantitative component length mismatch");
    assert_eq!(x_qnt.len(), theta_qnt.len(), "hyperparameter length mismatch");
    let mut exponent = 0.0;
    for i in 0..x_qnt.len() {
        let d = x_qnt[i] - y_qnt[i];
        exponent += theta_qnt[i] * d * d;
    }
    (-exponent).exp()
}

/// One-hot Gaussian kernel on a categorical component.
pub fn k_cat(u: &[usize], v: &[usize], theta_cat: &[Vec<f64>]) -> f64 {
    assert_eq!(u.len(), v.len(), "categorical component length mismatch");
    assert_eq!(u.len(), theta_cat.len(), "hyperparameter length mismatch");
    let mut exponent = 0.0;
    for i in 0..u.len() {
        let theta = &theta_cat[i];
        assert!(u[i] < theta.len() && v[i] < theta.len(), "category index out of range");
        if u[i] != v[i] {
            exponent += theta[u[i]] + theta[v[i]];
        }
    }
    (-exponent).exp()
}

/// Mixed kernel: categorical factor times quantitative factor.
pub fn k_mixed(x: &Point, y: &Point, hp: &KernelHyperparams) -> f64 {
    k_cat(&x.cat, &y.cat, &hp.theta_cat) * k_qnt(&x.qnt(), &y.qnt(), &hp.theta_qnt)
}

/// Symmetric kernel matrix `K[i][j] = k_mixed(p_i, p_j)`, unit diagonal.
pub fn kernel_matrix(points: &[Point], hp: &KernelHyperparams) -> DMatrix<f64> {
    let p = points.len();
    assert!(p > 0, "kernel matrix needs at least one point");
    let mut k = DMatrix::zeros(p, p);
    for i in 0..p {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = k_mixed(&points[i], &points[j], hp);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}
