//! Direct-search solver for constrained mixed-variable blackboxes.
//!
//! One run executes a Latin-hypercube design of experiments, fits GP
//! surrogates of the objective and every constraint, then iterates: an
//! opportunistic surrogate search step, quantitative and categorical polls
//! around the feasible and infeasible incumbents, and an extended poll
//! around near-miss categorical trials when everything else failed. The
//! progressive barrier arbitrates incumbent updates; the mesh grows on
//! dominating iterations and shrinks on unsuccessful ones. Surrogates are
//! refit each iteration until the evaluation count reaches the surrogate
//! cutoff and are frozen afterwards.
//!
//! Every blackbox evaluation is cached by the canonical point encoding, so
//! no point is ever evaluated twice; the history holds exactly one record
//! per true blackbox call.

mod barrier;
mod doe;
mod mesh;
mod search;

pub use barrier::{BarrierState, IncumbentKind, PbOutcome};
pub use doe::lhs_doe;
pub use mesh::{quant_poll, MeshState};
pub use search::{expected_improvement, search_step_bo};

pub use crate::domain::aggregate_violation;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distances::ConstraintMapConfig;
use crate::domain::{Domain, Evaluation, Point};
use crate::error::{Error, Result};
use crate::kernels::KernelHyperparams;
use crate::neighborhood::{build_neighborhood, default_m};
use crate::problems::Problem;
use crate::surrogate::{fit, optimize_hyperparams_from, GpModel, HyperoptConfig};

/// Which step generated an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Doe,
    Search,
    QPoll,
    CPoll,
    XPoll,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Doe => "doe",
            StepKind::Search => "search",
            StepKind::QPoll => "qpoll",
            StepKind::CPoll => "cpoll",
            StepKind::XPoll => "xpoll",
        }
    }

    pub fn parse(s: &str) -> Option<StepKind> {
        match s {
            "doe" => Some(StepKind::Doe),
            "search" => Some(StepKind::Search),
            "qpoll" => Some(StepKind::QPoll),
            "cpoll" => Some(StepKind::CPoll),
            "xpoll" => Some(StepKind::XPoll),
            _ => None,
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One blackbox evaluation, in evaluation order.
#[derive(Debug, Clone)]
pub struct HistoryRecord {
    /// 1-based index of the blackbox call.
    pub eval_index: usize,
    pub point: Point,
    pub f: f64,
    pub g: Vec<f64>,
    pub h: f64,
    /// Incumbent updated by this evaluation, if any.
    pub incumbent: Option<IncumbentKind>,
    pub step: StepKind,
}

/// Solver settings; unset budget and neighborhood size take the
/// domain-dependent defaults `250 n` and `max(3, ceil(sqrt(|X^cat|)))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub budget: Option<usize>,
    pub doe_fraction: f64,
    pub m: Option<usize>,
    /// Constraint-map uncertainty relaxation.
    pub lambda: f64,
    /// Constraint pseudo-distance norm order.
    pub p_norm: f64,
    /// Extended-poll trigger fraction.
    pub xi: f64,
    pub use_search: bool,
    pub seed: u64,
    /// Stop once the frame size drops below this.
    pub delta_min: f64,
    /// Categorical enumeration cap.
    pub enum_cap: usize,
    /// Run the categorical poll before the quantitative one.
    pub cat_poll_first: bool,
    /// Candidates scored per search step.
    pub n_search_candidates: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: None,
            doe_fraction: 0.20,
            m: None,
            lambda: 1.0,
            p_norm: 2.0,
            xi: 0.05,
            use_search: true,
            seed: 0,
            delta_min: 1e-6,
            enum_cap: 4096,
            cat_poll_first: false,
            n_search_candidates: 200,
        }
    }
}

impl SolverConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("solver config: {e}")))
    }

    pub fn effective_budget(&self, domain: &Domain) -> usize {
        self.budget.unwrap_or(250 * domain.n())
    }

    /// Search step and GP updates stop at
    /// `min(500, ceil(0.33 * budget))` evaluations.
    pub fn surrogate_cutoff(budget: usize) -> usize {
        500.min((0.33 * budget as f64).ceil() as usize)
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let budget = self.effective_budget(domain);
        if budget < domain.n() + 2 {
            return Err(Error::Config(format!(
                "budget {budget} is below n + 2 = {}",
                domain.n() + 2
            )));
        }
        if !(self.doe_fraction > 0.0 && self.doe_fraction < 1.0) {
            return Err(Error::Config("doe_fraction must lie in (0, 1)".into()));
        }
        if let Some(m) = self.m {
            if m < 1 {
                return Err(Error::Config("neighborhood size m must be at least 1".into()));
            }
        }
        if self.xi.is_nan() || self.xi < 0.0 {
            return Err(Error::Config("xi must be nonnegative".into()));
        }
        if self.delta_min.is_nan() || self.delta_min <= 0.0 {
            return Err(Error::Config("delta_min must be positive".into()));
        }
        if self.enum_cap < 1 {
            return Err(Error::Config("enum_cap must be at least 1".into()));
        }
        if self.n_search_candidates < 1 {
            return Err(Error::Config("n_search_candidates must be at least 1".into()));
        }
        self.constraint_cfg().check()
    }

    pub fn constraint_cfg(&self) -> ConstraintMapConfig {
        ConstraintMapConfig { lambda: self.lambda, p: self.p_norm, ..Default::default() }
    }

    /// All defaults materialized for `domain`, as reproducible `key=value`
    /// lines.
    pub fn effective_lines(&self, domain: &Domain) -> Vec<String> {
        let m = self
            .m
            .unwrap_or_else(|| if domain.n_cat() > 0 { default_m(domain) } else { 0 });
        vec![
            format!("budget={}", self.effective_budget(domain)),
            format!("doe_fraction={}", self.doe_fraction),
            format!("m={m}"),
            format!("lambda={}", self.lambda),
            format!("p_norm={}", self.p_norm),
            format!("xi={}", self.xi),
            format!("use_search={}", self.use_search),
            format!("seed={}", self.seed),
            format!("delta_min={}", self.delta_min),
            format!("enum_cap={}", self.enum_cap),
            format!("cat_poll_first={}", self.cat_poll_first),
            format!("n_search_candidates={}", self.n_search_candidates),
        ]
    }
}

/// Outcome of a full solver run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_feasible: Option<(Point, Evaluation)>,
    pub best_infeasible: Option<(Point, Evaluation)>,
    pub history: Vec<HistoryRecord>,
    pub iterations: usize,
}

struct Models {
    objective: GpModel,
    constraints: Vec<GpModel>,
    /// Training-set size at the last hyperparameter optimization.
    tuned_at: usize,
    hp_objective: KernelHyperparams,
    hp_constraints: Vec<KernelHyperparams>,
}

struct Solver<'a> {
    problem: &'a Problem,
    budget: usize,
    cache: HashMap<String, Evaluation>,
    history: Vec<HistoryRecord>,
    barrier: BarrierState,
}

impl<'a> Solver<'a> {
    /// Evaluates `point` unless cached or out of budget.
    ///
    /// Cache hits are unsuccessful and produce no record; `None` means the
    /// budget is exhausted.
    fn evaluate(&mut self, point: &Point, step: StepKind) -> Option<(Evaluation, PbOutcome)> {
        let key = point.encode();
        if let Some(hit) = self.cache.get(&key) {
            return Some((hit.clone(), PbOutcome::Unsuccessful));
        }
        if self.history.len() >= self.budget {
            return None;
        }
        let eval = self.problem.evaluate(point);
        self.cache.insert(key, eval.clone());
        let (outcome, updated) = self.barrier.update(point, &eval);
        self.history.push(HistoryRecord {
            eval_index: self.history.len() + 1,
            point: point.clone(),
            f: eval.f,
            g: eval.g.clone(),
            h: eval.h,
            incumbent: updated,
            step,
        });
        Some((eval, outcome))
    }

    fn evals(&self) -> usize {
        self.history.len()
    }

    fn budget_left(&self) -> usize {
        self.budget - self.history.len()
    }
}

/// Runs the solver on `problem`.
pub fn run(problem: &Problem, config: &SolverConfig) -> Result<RunResult> {
    let domain = &problem.domain;
    config.validate(domain)?;
    let budget = config.effective_budget(domain);
    let cutoff = SolverConfig::surrogate_cutoff(budget);
    let cfg = config.constraint_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut solver = Solver {
        problem,
        budget,
        cache: HashMap::new(),
        history: Vec::new(),
        barrier: BarrierState::new(),
    };

    // Step 0: design of experiments
    let doe_count = ((config.doe_fraction * budget as f64).floor() as usize).clamp(2, budget);
    for point in lhs_doe(domain, doe_count, &mut rng) {
        if solver.evaluate(&point, StepKind::Doe).is_none() {
            break;
        }
    }

    let mut models = fit_models(domain, &solver.history, None, config, 0);
    let mut mesh = MeshState::new(domain);
    // under the cap the candidate set does not depend on the incumbent
    let full_components =
        if domain.n_cat() > 0 && domain.cat_component_count() <= config.enum_cap as u128 {
            Some(domain.enumerate_components(config.enum_cap, &vec![0; domain.n_cat()], &mut rng)?)
        } else {
            None
        };

    let mut iterations = 0usize;
    'outer: while solver.evals() < budget && mesh.frame() >= config.delta_min {
        iterations += 1;
        let mut iteration_outcome = PbOutcome::Unsuccessful;

        // Step 1: opportunistic surrogate search
        if config.use_search && solver.evals() < cutoff {
            if let Some(m) = &models {
                let anchor = solver
                    .barrier
                    .feasible()
                    .or_else(|| solver.barrier.infeasible())
                    .map(|(p, _)| p.clone());
                if let Some(anchor) = anchor {
                    let f_best = match solver.barrier.feasible() {
                        Some((_, e)) => e.f,
                        None => solver
                            .history
                            .iter()
                            .map(|r| r.f)
                            .filter(|f| f.is_finite())
                            .fold(f64::INFINITY, f64::min),
                    };
                    let cache = &solver.cache;
                    let candidate = search_step_bo(
                        domain,
                        &m.objective,
                        &m.constraints,
                        &anchor,
                        f_best,
                        &mesh,
                        &mut rng,
                        config.n_search_candidates,
                        |p| cache.contains_key(&p.encode()),
                    );
                    if let Some(candidate) = candidate {
                        match solver.evaluate(&candidate, StepKind::Search) {
                            Some((_, outcome)) => {
                                iteration_outcome = iteration_outcome.max(outcome)
                            }
                            None => break 'outer,
                        }
                    }
                }
            }
        }

        // Step 2: feasible and infeasible polls, opportunistic across both
        let mut cat_trials: Vec<(f64, Vec<(Point, Evaluation)>)> = Vec::new();
        if iteration_outcome == PbOutcome::Unsuccessful {
            'polls: for kind in [IncumbentKind::Feasible, IncumbentKind::Infeasible] {
                let Some((incumbent, inc_eval)) = solver.barrier.incumbent(kind).cloned() else {
                    continue;
                };
                cat_trials.push((inc_eval.f, Vec::new()));
                let polls: [StepKind; 2] = if config.cat_poll_first {
                    [StepKind::CPoll, StepKind::QPoll]
                } else {
                    [StepKind::QPoll, StepKind::CPoll]
                };
                for poll in polls {
                    let trials = match poll {
                        StepKind::QPoll => quant_poll(&incumbent, domain, &mesh, &mut rng),
                        StepKind::CPoll => cat_poll(
                            domain,
                            &incumbent,
                            &inc_eval,
                            models.as_ref(),
                            &cfg,
                            config,
                            full_components.as_deref(),
                            &mut rng,
                        )?,
                        _ => unreachable!(),
                    };
                    for trial in trials {
                        let Some((eval, outcome)) = solver.evaluate(&trial, poll) else {
                            break 'outer;
                        };
                        if poll == StepKind::CPoll {
                            cat_trials.last_mut().unwrap().1.push((trial, eval));
                        }
                        if outcome != PbOutcome::Unsuccessful {
                            iteration_outcome = iteration_outcome.max(outcome);
                            break 'polls;
                        }
                    }
                }
            }
        }

        // Step 3: extended poll around near-miss categorical trials
        if iteration_outcome == PbOutcome::Unsuccessful {
            let mut trials = Vec::new();
            for (inc_f, group) in &cat_trials {
                let left = solver.budget_left().saturating_sub(trials.len());
                trials.extend(extended_poll(group, *inc_f, config.xi, domain, &mesh, left, &mut rng));
            }
            for trial in trials {
                let Some((_, outcome)) = solver.evaluate(&trial, StepKind::XPoll) else {
                    break 'outer;
                };
                if outcome != PbOutcome::Unsuccessful {
                    iteration_outcome = iteration_outcome.max(outcome);
                    break;
                }
            }
        }

        // Step 4: mesh update and surrogate refresh
        match iteration_outcome {
            PbOutcome::Dominating => mesh.on_success(),
            PbOutcome::Improving => {}
            PbOutcome::Unsuccessful => mesh.on_failure(),
        }
        if solver.evals() < cutoff {
            models = fit_models(domain, &solver.history, models, config, iterations);
        }
    }

    Ok(RunResult {
        best_feasible: solver.barrier.feasible().cloned(),
        best_infeasible: solver.barrier.infeasible().cloned(),
        history: solver.history,
        iterations,
    })
}

/// Extended-poll trial points.
///
/// Every categorical-poll point whose objective came within
/// `xi * max(1, |incumbent_f|)` of the incumbent value gets one quantitative
/// poll around it; the combined trial list is capped at `budget_left`.
pub fn extended_poll<R: Rng>(
    cat_poll_results: &[(Point, Evaluation)],
    incumbent_f: f64,
    xi: f64,
    domain: &Domain,
    mesh: &MeshState,
    budget_left: usize,
    rng: &mut R,
) -> Vec<Point> {
    let threshold = incumbent_f + xi * incumbent_f.abs().max(1.0);
    let mut trials = Vec::new();
    for (point, eval) in cat_poll_results {
        if trials.len() >= budget_left {
            break;
        }
        if eval.f < threshold {
            trials.extend(quant_poll(point, domain, mesh, rng));
        }
    }
    trials.truncate(budget_left);
    trials
}

/// Categorical poll: neighborhood components at the incumbent's
/// quantitative component, excluding the incumbent's own component.
#[allow(clippy::too_many_arguments)]
fn cat_poll<R: Rng>(
    domain: &Domain,
    incumbent: &Point,
    inc_eval: &Evaluation,
    models: Option<&Models>,
    cfg: &ConstraintMapConfig,
    config: &SolverConfig,
    full_components: Option<&[Vec<usize>]>,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if domain.n_cat() == 0 {
        return Ok(Vec::new());
    }
    let Some(models) = models else {
        return Ok(Vec::new());
    };
    let owned;
    let candidates: &[Vec<usize>] = match full_components {
        Some(c) => c,
        None => {
            owned = domain.enumerate_components(config.enum_cap, &incumbent.cat, rng)?;
            &owned
        }
    };
    let m = config
        .m
        .unwrap_or_else(|| default_m(domain))
        .clamp(1, candidates.len());
    let neighborhood = build_neighborhood(
        incumbent,
        inc_eval.is_feasible(),
        m,
        &models.objective,
        &models.constraints,
        cfg,
        candidates,
    )?;
    Ok(neighborhood
        .into_iter()
        .filter(|comp| comp != &incumbent.cat)
        .map(|comp| incumbent.with_cat(comp))
        .collect())
}

/// Fits (or refits) the objective and constraint GPs on the history.
///
/// Hyperparameters are re-optimized once the training set has grown by half
/// since the last optimization, otherwise the previous ones are reused.
fn fit_models(
    domain: &Domain,
    history: &[HistoryRecord],
    previous: Option<Models>,
    config: &SolverConfig,
    iteration: usize,
) -> Option<Models> {
    let points: Vec<Point> = history.iter().map(|r| r.point.clone()).collect();
    let f_targets: Vec<f64> = history.iter().map(|r| r.f).collect();
    let n_finite = f_targets.iter().filter(|f| f.is_finite()).count();
    if n_finite < 2 {
        return None;
    }
    let n_constraints = history.first().map_or(0, |r| r.g.len());

    let retune = match &previous {
        None => true,
        Some(m) => n_finite >= m.tuned_at + (m.tuned_at + 1) / 2,
    };
    let (hp_objective, hp_constraints, tuned_at) = match (&previous, retune) {
        (Some(m), false) => (m.hp_objective.clone(), m.hp_constraints.clone(), m.tuned_at),
        _ => {
            let warm = previous.as_ref().map(|m| &m.hp_objective);
            let hopt = HyperoptConfig {
                n_starts: if previous.is_none() { 3 } else { 1 },
                max_iters: if previous.is_none() { 100 } else { 60 },
                seed: config.seed ^ (iteration as u64).wrapping_mul(0x9e3779b97f4a7c15),
            };
            let hp_f = optimize_hyperparams_from(domain, &points, &f_targets, warm, &hopt)
                .unwrap_or_else(|_| KernelHyperparams::ones(domain));
            let mut hp_g = Vec::with_capacity(n_constraints);
            for j in 0..n_constraints {
                let targets: Vec<f64> = history.iter().map(|r| r.g[j]).collect();
                let warm_g = previous.as_ref().map(|m| &m.hp_constraints[j]);
                hp_g.push(
                    optimize_hyperparams_from(domain, &points, &targets, warm_g, &hopt)
                        .unwrap_or_else(|_| KernelHyperparams::ones(domain)),
                );
            }
            (hp_f, hp_g, n_finite)
        }
    };

    let objective = fit(&points, &f_targets, &hp_objective).ok()?;
    let mut constraints = Vec::with_capacity(n_constraints);
    for j in 0..n_constraints {
        let targets: Vec<f64> = history.iter().map(|r| r.g[j]).collect();
        constraints.push(fit(&points, &targets, &hp_constraints[j]).ok()?);
    }
    Some(Models { objective, constraints, tuned_at, hp_objective, hp_constraints })
}

/// Writes the history in the CSV interchange format:
/// `eval,step,point,f,g1..gJ,h,incumbent`.
pub fn write_history_csv<W: Write>(
    out: &mut W,
    history: &[HistoryRecord],
    n_constraints: usize,
) -> std::io::Result<()> {
    write!(out, "eval,step,point,f")?;
    for j in 1..=n_constraints {
        write!(out, ",g{j}")?;
    }
    writeln!(out, ",h,incumbent")?;
    for rec in history {
        write!(out, "{},{},{},{}", rec.eval_index, rec.step, rec.point.encode(), rec.f)?;
        for gj in &rec.g {
            write!(out, ",{gj}")?;
        }
        let incumbent = match rec.incumbent {
            Some(IncumbentKind::Feasible) => "feasible",
            Some(IncumbentKind::Infeasible) => "infeasible",
            None => "none",
        };
        writeln!(out, ",{},{}", rec.h, incumbent)?;
    }
    Ok(())
}
