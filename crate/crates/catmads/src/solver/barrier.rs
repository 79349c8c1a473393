//! Progressive-barrier constraint handling.
//!
//! Two incumbents are maintained: a feasible one (`h = 0`, improved by
//! strictly smaller objective values) and an infeasible one (improved
//! lexicographically in `(h, f)` among points whose violation does not
//! exceed the barrier threshold `h_max`). The threshold only ever decreases,
//! forcing the infeasible incumbent toward feasibility.

use crate::domain::{Evaluation, Point};

/// Outcome of offering one evaluation to the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PbOutcome {
    Unsuccessful,
    Improving,
    Dominating,
}

/// Which incumbent an update touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncumbentKind {
    Feasible,
    Infeasible,
}

/// Barrier threshold and the two incumbents.
#[derive(Debug, Clone, Default)]
pub struct BarrierState {
    h_max: f64,
    feasible: Option<(Point, Evaluation)>,
    infeasible: Option<(Point, Evaluation)>,
}

impl BarrierState {
    pub fn new() -> Self {
        BarrierState { h_max: f64::INFINITY, feasible: None, infeasible: None }
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn feasible(&self) -> Option<&(Point, Evaluation)> {
        self.feasible.as_ref()
    }

    pub fn infeasible(&self) -> Option<&(Point, Evaluation)> {
        self.infeasible.as_ref()
    }

    pub fn incumbent(&self, kind: IncumbentKind) -> Option<&(Point, Evaluation)> {
        match kind {
            IncumbentKind::Feasible => self.feasible(),
            IncumbentKind::Infeasible => self.infeasible(),
        }
    }

    /// Offers a new evaluation to the barrier.
    ///
    /// A feasible point with strictly smaller objective replaces the feasible
    /// incumbent (dominating). An infeasible point with `h <= h_max` that
    /// improves the infeasible incumbent lexicographically in `(h, f)`
    /// replaces it; the update is dominating when it is no worse in both `h`
    /// and `f`, improving otherwise. `h_max` decreases to the new incumbent's
    /// violation whenever that is strictly below the previous threshold.
    pub fn update(&mut self, point: &Point, eval: &Evaluation) -> (PbOutcome, Option<IncumbentKind>) {
        if eval.is_feasible() {
            let better = match &self.feasible {
                None => true,
                Some((_, inc)) => eval.f < inc.f,
            };
            if better {
                self.feasible = Some((point.clone(), eval.clone()));
                return (PbOutcome::Dominating, Some(IncumbentKind::Feasible));
            }
            return (PbOutcome::Unsuccessful, None);
        }

        if !eval.h.is_finite() || eval.h > self.h_max {
            return (PbOutcome::Unsuccessful, None);
        }
        let (accept, dominating) = match &self.infeasible {
            None => (true, false),
            Some((_, inc)) => {
                let lex_better = eval.h < inc.h || (eval.h == inc.h && eval.f < inc.f);
                let dom = eval.h <= inc.h
                    && eval.f <= inc.f
                    && (eval.h < inc.h || eval.f < inc.f);
                (lex_better, dom)
            }
        };
        if !accept {
            return (PbOutcome::Unsuccessful, None);
        }
        if eval.h < self.h_max {
            self.h_max = eval.h;
        }
        self.infeasible = Some((point.clone(), eval.clone()));
        let outcome = if dominating { PbOutcome::Dominating } else { PbOutcome::Improving };
        (outcome, Some(IncumbentKind::Infeasible))
    }
}
