//! Mesh and frame management plus quantitative poll directions.
//!
//! Quantitative variables are handled on a normalized `[0,1]` scale per
//! variable. The mesh size `delta` and frame size `Delta` obey the usual
//! coupling `delta = min(Delta, Delta^2)`: the mesh refines quadratically
//! once the frame drops below one, which lets poll directions grow denser
//! as the frame shrinks.

use rand::Rng;

use crate::domain::{Domain, Point};

/// Initial frame size on the normalized scale.
pub const FRAME_INIT: f64 = 0.25;
/// The frame never grows beyond `FRAME_INIT * 2^10`.
pub const FRAME_GROWTH_CAP: f64 = 1024.0;

/// Mesh size, frame size and per-variable scaling.
#[derive(Debug, Clone)]
pub struct MeshState {
    delta: f64,
    frame: f64,
    /// Width of each quantitative variable (integers first); zero-width
    /// variables never move.
    scale: Vec<f64>,
}

impl MeshState {
    pub fn new(domain: &Domain) -> Self {
        let scale = domain.qnt_bounds().iter().map(|&(lb, ub)| ub - lb).collect();
        let mut state = MeshState { delta: 0.0, frame: FRAME_INIT, scale };
        state.update_delta();
        state
    }

    /// Mesh size parameter.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Frame size parameter.
    pub fn frame(&self) -> f64 {
        self.frame
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn on_success(&mut self) {
        self.frame = (self.frame * 2.0).min(FRAME_INIT * FRAME_GROWTH_CAP);
        self.update_delta();
    }

    pub fn on_failure(&mut self) {
        self.frame /= 2.0;
        self.update_delta();
    }

    fn update_delta(&mut self) {
        self.delta = self.frame.min(self.frame * self.frame);
    }
}

/// Normalized coordinates of the quantitative component of `point`.
fn normalized_qnt(point: &Point, domain: &Domain) -> Vec<f64> {
    let bounds = domain.qnt_bounds();
    point
        .qnt()
        .iter()
        .zip(&bounds)
        .map(|(&x, &(lb, ub))| if ub > lb { (x - lb) / (ub - lb) } else { 0.0 })
        .collect()
}

/// Generates up to `2 n_qnt` trial points around `incumbent`.
///
/// A random dense direction seeds a Householder orthogonal basis; each basis
/// vector is scaled to the frame, snapped to the mesh, mirrored and
/// bounds-clipped. Integer coordinates are rounded, with an effective step of
/// at least one while the frame is coarse. The categorical component is
/// copied unchanged. Trials identical to the incumbent are dropped.
pub fn quant_poll<R: Rng>(
    incumbent: &Point,
    domain: &Domain,
    mesh: &MeshState,
    rng: &mut R,
) -> Vec<Point> {
    let n = domain.n_qnt();
    if n == 0 {
        return Vec::new();
    }
    let v = random_unit_vector(n, rng);
    let ratio = (mesh.frame() / mesh.delta()).max(1.0);
    let z_inc = normalized_qnt(incumbent, domain);
    let bounds = domain.qnt_bounds();
    let n_int = domain.n_int();

    let mut trials = Vec::with_capacity(2 * n);
    let mut seen = std::collections::HashSet::new();
    for sign in [1.0, -1.0] {
        for j in 0..n {
            // j-th column of the Householder matrix I - 2 v v^T
            let mut steps = vec![0.0; n];
            let mut max_abs = 0.0f64;
            for i in 0..n {
                let h = if i == j { 1.0 - 2.0 * v[i] * v[j] } else { -2.0 * v[i] * v[j] };
                steps[i] = h;
                max_abs = max_abs.max(h.abs());
            }
            if max_abs == 0.0 {
                continue;
            }
            // infinity-normalize, scale to the frame, snap to integer mesh steps
            for s in steps.iter_mut() {
                *s = (sign * *s / max_abs * ratio).trunc();
            }

            let mut int = incumbent.int.clone();
            let mut con = incumbent.con.clone();
            for i in 0..n {
                if mesh.scale()[i] == 0.0 || steps[i] == 0.0 {
                    continue;
                }
                let raw = mesh.delta() * steps[i] * mesh.scale()[i];
                if i < n_int {
                    let mut step = raw.round() as i64;
                    if step == 0 && mesh.frame() >= 1.0 {
                        step = raw.signum() as i64;
                    }
                    let (lb, ub) = domain.int_bounds()[i];
                    int[i] = (int[i] + step).clamp(lb, ub);
                } else {
                    let k = i - n_int;
                    let (lb, ub) = (bounds[i].0, bounds[i].1);
                    let z = z_inc[i] + mesh.delta() * steps[i];
                    con[k] = (lb + z * mesh.scale()[i]).clamp(lb, ub);
                }
            }
            let trial = Point { cat: incumbent.cat.clone(), int, con };
            if trial != *incumbent && seen.insert(trial.encode()) {
                trials.push(trial);
            }
        }
    }
    trials
}

/// Random point on the unit sphere via Box-Muller normals.
fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            return v;
        }
    }
}
