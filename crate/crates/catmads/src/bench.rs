//! Benchmarking: instances, tau-convergence tests and data profiles.
//!
//! An instance is a problem paired with a seed. A solver tau-solves an
//! instance once its running-best feasible objective `f` satisfies
//! `f0 - f >= (1 - tau) (f0 - f_star)`, where `f0` is the baseline value
//! (least objective in the common DoE for unconstrained problems, smallest
//! first-feasible value across solvers for constrained ones) and `f_star`
//! is the best feasible value any solver reached on the instance. The data
//! profile of a solver is the fraction of instances tau-solved within
//! `kappa (n_p + 1)` evaluations.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::solver::StepKind;

/// Feasibility declaration threshold on the violation aggregate.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// A problem paired with a seed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Instance {
    pub problem_id: String,
    pub seed: u64,
    /// Number of variables of the problem.
    pub n: usize,
    pub budget: usize,
    pub n_constraints: usize,
}

/// One evaluation of a run log.
#[derive(Debug, Clone)]
pub struct LogRecord {
    pub eval: usize,
    pub f: f64,
    pub h: f64,
    pub step: StepKind,
}

/// The evaluation history of one solver on one instance.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub instance: Instance,
    pub solver_id: String,
    pub records: Vec<LogRecord>,
}

impl RunLog {
    /// Parses the solver history CSV format
    /// (`eval,step,point,f,g1..gJ,h,incumbent`).
    pub fn from_csv(text: &str, instance: Instance, solver_id: &str) -> Result<RunLog> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty history".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 6 || columns[0] != "eval" {
            return Err(Error::Parse(format!("unexpected history header '{header}'")));
        }
        let n_g = columns.iter().filter(|c| c.starts_with('g') && c.len() > 1).count();
        let h_col = 4 + n_g;
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(Error::Parse(format!(
                    "history line {} has {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    columns.len()
                )));
            }
            let parse_f64 = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            records.push(LogRecord {
                eval: fields[0]
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
                step: StepKind::parse(fields[1])
                    .ok_or_else(|| Error::Parse(format!("unknown step '{}'", fields[1])))?,
                f: parse_f64(fields[3])?,
                h: parse_f64(fields[h_col])?,
            });
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.eval != i + 1 {
                return Err(Error::Parse(format!(
                    "evaluation indices must be dense from 1, found {} at row {}",
                    rec.eval,
                    i + 1
                )));
            }
        }
        Ok(RunLog { instance, solver_id: solver_id.to_owned(), records })
    }

    fn is_feasible(rec: &LogRecord) -> bool {
        rec.h <= FEASIBILITY_TOL && rec.f.is_finite()
    }

    /// Best feasible objective over the whole run.
    pub fn final_best_feasible(&self) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| Self::is_feasible(r))
            .map(|r| r.f)
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.min(f))))
    }

    /// Objective of the first feasible record.
    pub fn first_feasible(&self) -> Option<f64> {
        self.records.iter().find(|r| Self::is_feasible(r)).map(|r| r.f)
    }
}

/// Baseline value `f0` of an instance.
///
/// Unconstrained: least objective in the (shared) DoE records. Constrained:
/// smallest objective among the solvers' first feasible records; `None`
/// marks the instance unsolvable (no solver reached feasibility).
pub fn f0(logs: &[&RunLog], constrained: bool) -> Option<f64> {
    if constrained {
        logs.iter()
            .filter_map(|log| log.first_feasible())
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.min(f))))
    } else {
        logs.iter()
            .flat_map(|log| log.records.iter())
            .filter(|r| r.step == StepKind::Doe && r.f.is_finite())
            .map(|r| r.f)
            .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.min(f))))
    }
}

/// Best feasible value over all solvers of an instance.
pub fn f_star(logs: &[&RunLog]) -> Option<f64> {
    logs.iter()
        .filter_map(|log| log.final_best_feasible())
        .fold(None, |acc, f| Some(acc.map_or(f, |a: f64| a.min(f))))
}

/// Smallest evaluation count after which the running-best feasible value
/// passes the tau-convergence test, if it ever does.
pub fn tau_solved(log: &RunLog, f0: f64, f_star: f64, tau: f64) -> Option<usize> {
    assert!((0.0..=1.0).contains(&tau), "tau must lie in [0, 1]");
    let target = (1.0 - tau) * (f0 - f_star);
    let mut best = f64::INFINITY;
    for rec in &log.records {
        if RunLog::is_feasible(rec) {
            best = best.min(rec.f);
            if f0 - best >= target {
                return Some(rec.eval);
            }
        }
    }
    None
}

/// One solver's data-profile curve.
#[derive(Debug, Clone)]
pub struct SolverCurve {
    pub solver_id: String,
    pub points: Vec<(f64, f64)>,
}

/// Curves plus the instances excluded as unsolvable.
#[derive(Debug, Clone)]
pub struct ProfileResult {
    pub curves: Vec<SolverCurve>,
    pub excluded: Vec<String>,
    pub n_instances: usize,
}

/// Default budget axis: multiples of `n_p + 1` evaluations from 0 to 300 in
/// steps of 0.5.
pub fn default_kappa_grid() -> Vec<f64> {
    (0..=600).map(|i| i as f64 * 0.5).collect()
}

/// Default tolerances.
pub fn default_taus() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

/// Computes per-solver data profiles over all `(instance, solver)` logs.
pub fn data_profile(logs: &[RunLog], tau: f64, kappa_grid: &[f64]) -> ProfileResult {
    let mut by_instance: BTreeMap<Instance, Vec<&RunLog>> = BTreeMap::new();
    let mut solver_ids: Vec<String> = Vec::new();
    for log in logs {
        by_instance.entry(log.instance.clone()).or_default().push(log);
        if !solver_ids.contains(&log.solver_id) {
            solver_ids.push(log.solver_id.clone());
        }
    }

    let mut excluded = Vec::new();
    // ratio k / (n_p + 1) per solver per solved instance
    let mut ratios: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for id in &solver_ids {
        ratios.insert(id, Vec::new());
    }
    let mut n_instances = 0usize;
    for (instance, inst_logs) in &by_instance {
        let constrained = instance.n_constraints > 0;
        let (Some(f0_val), Some(f_star_val)) = (f0(inst_logs, constrained), f_star(inst_logs))
        else {
            excluded.push(format!("{}#{}", instance.problem_id, instance.seed));
            continue;
        };
        n_instances += 1;
        for id in &solver_ids {
            let k = inst_logs
                .iter()
                .find(|log| &log.solver_id == id)
                .and_then(|log| tau_solved(log, f0_val, f_star_val, tau));
            ratios.get_mut(id.as_str()).unwrap().push(
                k.map(|k| k as f64 / (instance.n + 1) as f64),
            );
        }
    }

    let curves = solver_ids
        .iter()
        .map(|id| {
            let rs = &ratios[id.as_str()];
            let points = kappa_grid
                .iter()
                .map(|&kappa| {
                    let solved = rs
                        .iter()
                        .filter(|r| r.map_or(false, |ratio| ratio <= kappa))
                        .count();
                    let fraction = if n_instances == 0 {
                        0.0
                    } else {
                        solved as f64 / n_instances as f64
                    };
                    (kappa, fraction)
                })
                .collect();
            SolverCurve { solver_id: id.clone(), points }
        })
        .collect();
    ProfileResult { curves, excluded, n_instances }
}

/// Writes `solver,tau,kappa,fraction` rows for several tolerances.
pub fn write_profile_csv<W: Write>(
    out: &mut W,
    profiles: &[(f64, ProfileResult)],
) -> std::io::Result<()> {
    writeln!(out, "solver,tau,kappa,fraction")?;
    for (tau, result) in profiles {
        for curve in &result.curves {
            for &(kappa, fraction) in &curve.points {
                writeln!(out, "{},{},{},{}", curve.solver_id, tau, kappa, fraction)?;
            }
        }
    }
    Ok(())
}

/// Writes a gnuplot-friendly data file: one indexed block per
/// `(solver, tau)` pair with `kappa fraction` columns.
pub fn write_profile_gnuplot<W: Write>(
    out: &mut W,
    profiles: &[(f64, ProfileResult)],
) -> std::io::Result<()> {
    for (tau, result) in profiles {
        for curve in &result.curves {
            writeln!(out, "# solver={} tau={}", curve.solver_id, tau)?;
            for &(kappa, fraction) in &curve.points {
                writeln!(out, "{kappa} {fraction}")?;
            }
            writeln!(out)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(constrained: bool) -> Instance {
        Instance {
            problem_id: "toy".into(),
            seed: 0,
            n: 2,
            budget: 30,
            n_constraints: if constrained { 1 } else { 0 },
        }
    }

    fn log_from(records: Vec<(usize, f64, f64, StepKind)>, solver: &str, constrained: bool) -> RunLog {
        RunLog {
            instance: instance(constrained),
            solver_id: solver.into(),
            records: records
                .into_iter()
                .map(|(eval, f, h, step)| LogRecord { eval, f, h, step })
                .collect(),
        }
    }

    #[test]
    fn f0_unconstrained_takes_the_doe_minimum() {
        let log = log_from(
            vec![
                (1, 3.0, 0.0, StepKind::Doe),
                (2, 1.0, 0.0, StepKind::Doe),
                (3, 7.0, 0.0, StepKind::Doe),
                (4, 0.5, 0.0, StepKind::QPoll),
            ],
            "s",
            false,
        );
        assert_eq!(f0(&[&log], false), Some(1.0));
    }

    #[test]
    fn f0_constrained_takes_first_feasible_values() {
        let a = log_from(
            vec![(1, 9.0, 1.0, StepKind::Doe), (2, 5.0, 0.0, StepKind::QPoll)],
            "a",
            true,
        );
        let b = log_from(
            vec![(1, 4.2, 0.0, StepKind::Doe), (2, 1.0, 0.0, StepKind::QPoll)],
            "b",
            true,
        );
        let c = log_from(vec![(1, 0.1, 2.0, StepKind::Doe)], "c", true);
        assert_eq!(f0(&[&a, &b, &c], true), Some(4.2));
        // nobody feasible: unsolvable
        assert_eq!(f0(&[&c], true), None);
    }

    #[test]
    fn feasibility_threshold_is_strict() {
        let at_tol = log_from(vec![(1, 1.0, 1e-8, StepKind::Doe)], "a", true);
        let above = log_from(vec![(1, 1.0, 2e-8, StepKind::Doe)], "b", true);
        assert_eq!(at_tol.first_feasible(), Some(1.0));
        assert_eq!(above.first_feasible(), None);
    }

    #[test]
    fn tau_solved_examples() {
        // running-best feasible values 8, 3, 0.5 at evals 4, 9, 20
        let log = log_from(
            vec![
                (1, 10.0, 0.0, StepKind::Doe),
                (2, 11.0, 0.0, StepKind::Doe),
                (3, 9.5, 1.0, StepKind::Doe),
                (4, 8.0, 0.0, StepKind::QPoll),
                (5, 8.5, 0.0, StepKind::QPoll),
                (6, 8.2, 0.0, StepKind::QPoll),
                (7, 8.2, 0.0, StepKind::CPoll),
                (8, 9.0, 0.0, StepKind::QPoll),
                (9, 3.0, 0.0, StepKind::CPoll),
                (10, 3.5, 0.0, StepKind::QPoll),
                (20, 0.5, 0.0, StepKind::QPoll),
            ],
            "s",
            false,
        );
        // NOTE: eval indices must be dense for CSV logs, but tau_solved only
        // reads the stored indices
        assert_eq!(tau_solved(&log, 10.0, 0.0, 0.1), Some(20));
        // tau = 1: first feasible record with f <= f0
        assert_eq!(tau_solved(&log, 10.0, 0.0, 1.0), Some(1));
        // tau = 0: must reach f_star exactly
        assert_eq!(tau_solved(&log, 10.0, 0.5, 0.0), Some(20));
        assert_eq!(tau_solved(&log, 10.0, 0.0, 0.0), None);
    }

    fn ratio_logs() -> Vec<RunLog> {
        // 4 instances, solver "s" with k/(n+1) ratios {2, 5, inf, 10} at
        // n = 2; a second solver pins f_star = 0 on the unsolved instance
        let mk = |seed: u64, solver: &str, k: Option<usize>| {
            let last = k.unwrap_or(2);
            let records = (1..=last)
                .map(|eval| LogRecord {
                    eval,
                    f: if Some(eval) == k { 0.0 } else { 10.0 },
                    h: 0.0,
                    step: if eval <= 2 { StepKind::Doe } else { StepKind::QPoll },
                })
                .collect();
            RunLog {
                instance: Instance {
                    problem_id: format!("p{seed}"),
                    seed,
                    n: 2,
                    budget: 40,
                    n_constraints: 0,
                },
                solver_id: solver.into(),
                records,
            }
        };
        vec![
            mk(0, "s", Some(6)),
            mk(1, "s", Some(15)),
            mk(2, "s", None),
            mk(2, "t", Some(4)),
            mk(3, "s", Some(30)),
        ]
    }

    #[test]
    fn data_profile_counts_solved_fractions() {
        let logs = ratio_logs();
        let grid = [0.0, 1.0, 2.0, 6.0, 10.0, 100.0];
        let result = data_profile(&logs, 0.5, &grid);
        assert_eq!(result.n_instances, 4);
        let curve = &result.curves[0];
        let at = |kappa: f64| {
            curve
                .points
                .iter()
                .find(|(k, _)| *k == kappa)
                .map(|(_, frac)| *frac)
                .unwrap()
        };
        assert_eq!(at(6.0), 0.5);
        assert_eq!(at(2.0), 0.25);
        assert_eq!(at(100.0), 0.75);
        // monotone nondecreasing and bounded
        let mut last = -1.0;
        for &(_, frac) in &curve.points {
            assert!((0.0..=1.0).contains(&frac));
            assert!(frac >= last);
            last = frac;
        }
    }

    #[test]
    fn dominating_solver_curve_is_pointwise_above() {
        // solver "fast" tau-solves every instance strictly earlier than "slow"
        let mk = |problem: &str, solver: &str, k: usize| {
            let records = (1..=k)
                .map(|eval| LogRecord {
                    eval,
                    f: if eval == k { 0.0 } else { 10.0 },
                    h: 0.0,
                    step: if eval <= 2 { StepKind::Doe } else { StepKind::QPoll },
                })
                .collect();
            RunLog {
                instance: Instance {
                    problem_id: problem.into(),
                    seed: 0,
                    n: 2,
                    budget: 60,
                    n_constraints: 0,
                },
                solver_id: solver.into(),
                records,
            }
        };
        let logs = vec![
            mk("p0", "fast", 4),
            mk("p0", "slow", 12),
            mk("p1", "fast", 6),
            mk("p1", "slow", 30),
            mk("p2", "fast", 9),
            mk("p2", "slow", 27),
        ];
        let grid = default_kappa_grid();
        let result = data_profile(&logs, 0.1, &grid);
        let curve = |id: &str| {
            result
                .curves
                .iter()
                .find(|c| c.solver_id == id)
                .unwrap()
                .points
                .clone()
        };
        for (f, s) in curve("fast").iter().zip(curve("slow").iter()) {
            assert!(f.1 >= s.1, "dominating solver dips below at kappa {}", f.0);
        }
        assert!(curve("fast").iter().zip(curve("slow")).any(|(f, s)| f.1 > s.1));
    }

    #[test]
    fn shrinking_tau_never_raises_the_curve() {
        let logs = ratio_logs();
        let grid = default_kappa_grid();
        let loose = data_profile(&logs, 0.5, &grid);
        let tight = data_profile(&logs, 0.01, &grid);
        for (a, b) in loose.curves[0].points.iter().zip(&tight.curves[0].points) {
            assert!(b.1 <= a.1 + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_and_dense_index_check() {
        let text = "eval,step,point,f,g1,h,incumbent\n\
                    1,doe,0 1 5.0e0,3.5,-1,0,none\n\
                    2,qpoll,0 1 6.0e0,inf,inf,inf,none\n";
        let log = RunLog::from_csv(text, instance(true), "s").unwrap();
        assert_eq!(log.records.len(), 2);
        assert_eq!(log.records[0].f, 3.5);
        assert!(log.records[1].f.is_infinite());
        assert_eq!(log.records[0].step, StepKind::Doe);

        let gap = "eval,step,point,f,h,incumbent\n3,doe,0,1.0,0,none\n";
        assert!(RunLog::from_csv(gap, instance(false), "s").is_err());
    }

    #[test]
    fn profile_csv_and_gnuplot_emission() {
        let logs = ratio_logs();
        let grid = [1.0, 6.0];
        let profiles =
            vec![(0.1, data_profile(&logs, 0.1, &grid)), (0.01, data_profile(&logs, 0.01, &grid))];
        let mut csv = Vec::new();
        write_profile_csv(&mut csv, &profiles).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("solver,tau,kappa,fraction\n"));
        // header + 2 taus x 2 solvers x 2 grid values
        assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);

        let mut dat = Vec::new();
        write_profile_gnuplot(&mut dat, &profiles).unwrap();
        let text = String::from_utf8(dat).unwrap();
        assert!(text.contains("# solver=s tau=0.1"));
    }
}
