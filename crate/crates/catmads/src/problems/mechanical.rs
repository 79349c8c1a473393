//! A fully analytic mechanical-part design problem.
//!
//! A structural piece is chosen by supplier, material and cross-section
//! shape, with a length `l` in `[5, 10]` and a recycled-material ratio `r`
//! in `[0, 1]`. The objective is a strain measure to minimize under a budget
//! constraint `g1` and an ecological-score constraint `g2`.
//!
//! The feasible region of `g1` in the continuous subspace is a disc whose
//! radius depends strongly on the categorical component: only six of the 24
//! components admit any feasible point, with feasible-area fractions
//! spanning roughly 0.01% to 10%, and the best feasible objective sits in
//! one of the rarely-feasible components rather than the easiest one. All
//! discs overlap around a common anchor, so components that are feasible
//! somewhere are also feasible at a well-chosen fixed quantitative
//! component.

use crate::domain::{Domain, Evaluation, Point, VariableSpec};

use super::Problem;

const SUPPLIERS: [&str; 2] = ["A", "B"];
const MATERIALS: [&str; 4] = ["ALUM", "STEEL", "COMP", "WOOD"];
const SHAPES: [&str; 3] = ["SQUARE", "CIRCLE", "ELLIPSE"];

/// Normalized anchor shared by all feasible discs: `l = 6.5`, `r = 0.7`.
pub const ANCHOR: (f64, f64) = (0.3, 0.7);

/// Infeasible components get this (negative) feasibility margin.
const INFEASIBLE_MARGIN: f64 = -0.5;

/// Per-component data: disc center (normalized), squared disc radius
/// (negative when the component is infeasible anywhere) and base strain.
struct ComponentData {
    center: (f64, f64),
    margin: f64,
    base: f64,
}

/// The six components that admit feasible points, with their disc radius
/// squared and best attainable strain.
const FEASIBLE: [((usize, usize, usize), (f64, f64), f64, f64); 6] = [
    // (supplier, material, shape), center offset, radius^2, base strain
    ((1, 3, 1), (0.05, -0.03), 0.0289, 28.28),  // B WOOD CIRCLE, ~9.1% feasible
    ((0, 3, 2), (-0.045, 0.025), 0.0250, 24.09), // A WOOD ELLIPSE, ~7.9%
    ((1, 1, 0), (0.01, 0.005), 0.00084, 9.98),  // B STEEL SQUARE, ~0.26%
    ((0, 0, 1), (-0.01, 0.01), 0.00078, 18.26), // A ALUM CIRCLE, ~0.25%
    ((0, 2, 0), (0.005, -0.01), 0.00068, 8.79), // A COMP SQUARE, ~0.21%, global best
    ((1, 0, 0), (0.0, 0.0), 0.00003, 13.95),    // B ALUM SQUARE, ~0.009%
];

fn component_data(u: usize, a: usize, s: usize) -> ComponentData {
    for &((fu, fa, fs), offset, margin, base) in &FEASIBLE {
        if (fu, fa, fs) == (u, a, s) {
            return ComponentData {
                center: (ANCHOR.0 + offset.0, ANCHOR.1 + offset.1),
                margin,
                base,
            };
        }
    }
    // infeasible everywhere; several of these carry low base strains
    let spread = ((u * 13 + a * 7 + s * 3) % 19) as f64;
    ComponentData { center: ANCHOR, margin: INFEASIBLE_MARGIN, base: 5.0 + spread }
}

fn eco_slack(u: usize, a: usize, s: usize) -> f64 {
    0.03 + 0.27 * (((u * 5 + a * 3 + s * 2) % 7) as f64) / 6.0
}

/// Raw objective and constraints at `(component, l, r)`.
fn evaluate_parts(u: usize, a: usize, s: usize, l: f64, r: f64) -> (f64, f64, f64) {
    let data = component_data(u, a, s);
    let ln = (l - 5.0) / 5.0;
    let dx = ln - data.center.0;
    let dy = r - data.center.1;
    let dist2 = dx * dx + dy * dy;
    let strain = data.base + 8.0 * dist2;
    let g1 = dist2 - data.margin;
    let g2 = 0.5 - r - eco_slack(u, a, s);
    (strain, g1, g2)
}

/// Builds the mechanical-part analog problem (24 categorical components,
/// two continuous variables, two constraints).
pub fn mechanical_analog() -> Problem {
    let domain = Domain::new(vec![
        VariableSpec::Categorical {
            levels: 2,
            labels: Some(SUPPLIERS.iter().map(|s| s.to_string()).collect()),
        },
        VariableSpec::Categorical {
            levels: 4,
            labels: Some(MATERIALS.iter().map(|s| s.to_string()).collect()),
        },
        VariableSpec::Categorical {
            levels: 3,
            labels: Some(SHAPES.iter().map(|s| s.to_string()).collect()),
        },
        VariableSpec::Continuous { lb: 5.0, ub: 10.0 },
        VariableSpec::Continuous { lb: 0.0, ub: 1.0 },
    ])
    .unwrap();

    let mut problem = Problem::new("mech-analog", domain, 2, Some(8.79), |p: &Point| {
        let (f, g1, g2) = evaluate_parts(p.cat[0], p.cat[1], p.cat[2], p.con[0], p.con[1]);
        Evaluation::new(f, vec![g1, g2])
    });
    // the global optimum sits at the disc center of (A, COMP, SQUARE)
    let center = component_data(0, 2, 0).center;
    problem.known_best_point = Some(Point::new(
        vec![0, 2, 0],
        vec![],
        vec![5.0 + 5.0 * center.0, center.1],
    ));
    problem
}

/// The grid-verified components that contain at least one feasible point.
pub fn feasible_components() -> Vec<Vec<usize>> {
    FEASIBLE.iter().map(|&((u, a, s), ..)| vec![u, a, s]).collect()
}

/// A feasible point in the most-feasible component, usable as a test
/// incumbent.
pub fn anchor_point() -> Point {
    Point::new(vec![1, 3, 1], vec![], vec![5.0 + 5.0 * ANCHOR.0, ANCHOR.1])
}
