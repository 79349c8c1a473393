//! Command-line interface: solve problems, run benchmark campaigns, emit
//! data profiles and dump neighborhood diagnostics.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use catmads::bench::{self, Instance, RunLog};
use catmads::distances::ConstraintMapConfig;
use catmads::domain::Point;
use catmads::neighborhood::{default_m, dump_ranked, order_components, ranking_functions};
use catmads::problems::{self, Problem};
use catmads::solver::{self, lhs_doe, write_history_csv, SolverConfig};
use catmads::surrogate::{fit, optimize_hyperparams, GpModel, HyperoptConfig};

/// Default output directory, overridable with `CATMADS_OUT_DIR`.
fn default_out_dir() -> PathBuf {
    std::env::var_os("CATMADS_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Parser)]
#[command(name = "catmads", version, about = "Constrained mixed-variable blackbox optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single problem and write its evaluation history.
    Solve(SolveArgs),
    /// Run a benchmark campaign over a problem suite.
    Bench(BenchArgs),
    /// Compute data profiles from a benchmark log directory.
    Profile(ProfileArgs),
    /// Dump the ranked categorical components around a point.
    Neighbors(NeighborsArgs),
}

#[derive(Args, Clone)]
struct ConfigOverrides {
    /// Solver configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    doe_fraction: Option<f64>,
    /// Neighborhood size.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p_norm: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    /// Disable the surrogate search step.
    #[arg(long, conflicts_with = "search")]
    no_search: bool,
    /// Force-enable the surrogate search step.
    #[arg(long)]
    search: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Candidates scored per search step.
    #[arg(long)]
    n_search_candidates: Option<usize>,
    #[arg(long)]
    delta_min: Option<f64>,
    #[arg(long)]
    enum_cap: Option<usize>,
    /// Run the categorical poll before the quantitative one.
    #[arg(long)]
    cat_poll_first: bool,
}

impl ConfigOverrides {
    fn build(&self) -> Result<SolverConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                SolverConfig::from_toml_str(&text)?
            }
            None => SolverConfig::default(),
        };
        if let Some(v) = self.budget {
            cfg.budget = Some(v);
        }
        if let Some(v) = self.doe_fraction {
            cfg.doe_fraction = v;
        }
        if let Some(v) = self.m {
            cfg.m = Some(v);
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.p_norm {
            cfg.p_norm = v;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if self.no_search {
            cfg.use_search = false;
        }
        if self.search {
            cfg.use_search = true;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n_search_candidates {
            cfg.n_search_candidates = v;
        }
        if let Some(v) = self.delta_min {
            cfg.delta_min = v;
        }
        if let Some(v) = self.enum_cap {
            cfg.enum_cap = v;
        }
        if self.cat_poll_first {
            cfg.cat_poll_first = true;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in name (`mech-analog`, `synthetic-<i>`) or a problem file.
    problem: String,
    /// Seed for `synthetic-<i>` suite generation.
    #[arg(long, default_value_t = 0)]
    suite_seed: u64,
    /// History CSV path (default `<out-dir>/<problem>_s<seed>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite to run: `synthetic` or `mech-analog`.
    #[arg(default_value = "synthetic")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    suite_seed: u64,
    /// Instance seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2])]
    seeds: Vec<u64>,
    /// Output directory for history files and the manifest.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Solver configuration files; each becomes one solver id (file stem).
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Directory holding `manifest.csv` and the history files.
    #[arg(long)]
    log_dir: Option<PathBuf>,
    /// Convergence tolerances.
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
    /// Profile CSV path (default `<log-dir>/profiles.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NeighborsArgs {
    /// Built-in name (`mech-analog`, `synthetic-<i>`) or a problem file.
    problem: String,
    /// Point in canonical encoding (categorical indices, integers, reals).
    #[arg(long)]
    point: String,
    /// Neighborhood size (default `max(3, ceil(sqrt(|X^cat|)))`).
    #[arg(long)]
    m: Option<usize>,
    /// DoE evaluations used to fit the surrogates.
    #[arg(long, default_value_t = 40)]
    doe: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    suite_seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve_command(args),
        Command::Bench(args) => bench_command(args),
        Command::Profile(args) => profile_command(args),
        Command::Neighbors(args) => neighbors_command(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn print_effective_config(problem: &Problem, config: &SolverConfig) {
    println!("# problem={}", problem.name);
    println!("# n={} n_constraints={}", problem.domain.n(), problem.n_constraints);
    for line in config.effective_lines(&problem.domain) {
        println!("# {line}");
    }
}

fn solve_command(args: SolveArgs) -> Result<ExitCode> {
    let problem = problems::resolve(&args.problem, args.suite_seed)?;
    let config = args.overrides.build()?;
    config.validate(&problem.domain)?;
    print_effective_config(&problem, &config);

    let result = solver::run(&problem, &config)?;
    let out = args.out.unwrap_or_else(|| {
        default_out_dir().join(format!("{}_s{}.csv", problem.name, config.seed))
    });
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut file = fs::File::create(&out)
        .with_context(|| format!("creating history file {}", out.display()))?;
    write_history_csv(&mut file, &result.history, problem.n_constraints)?;
    println!("# history={}", out.display());

    match &result.best_feasible {
        Some((point, eval)) => {
            println!(
                "best_feasible f={} h={} evals={} point={}",
                eval.f,
                eval.h,
                result.history.len(),
                point.encode()
            );
        }
        None => {
            let best_h = result
                .best_infeasible
                .as_ref()
                .map(|(_, e)| e.h)
                .unwrap_or(f64::INFINITY);
            println!(
                "no feasible point found (best h={} over {} evals)",
                best_h,
                result.history.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_command(args: BenchArgs) -> Result<ExitCode> {
    let suite: Vec<Problem> = match args.suite.as_str() {
        "synthetic" => problems::synthetic_suite(args.suite_seed),
        "mech-analog" => vec![problems::mechanical_analog()],
        other => bail!("unknown suite '{other}' (expected 'synthetic' or 'mech-analog')"),
    };
    let mut configs: Vec<(String, SolverConfig)> = Vec::new();
    if args.configs.is_empty() {
        configs.push(("catmads-gp".into(), SolverConfig::default()));
    }
    for path in &args.configs {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config = SolverConfig::from_toml_str(&text)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "config".into());
        configs.push((id, config));
    }

    let out_dir = args.out_dir.unwrap_or_else(default_out_dir);
    fs::create_dir_all(&out_dir)?;
    let mut manifest = String::from("problem,seed,n,budget,n_constraints,solver,file\n");
    let mut completed = 0usize;
    for problem in &suite {
        for &seed in &args.seeds {
            for (solver_id, base) in &configs {
                let mut config = base.clone();
                config.seed = seed;
                if let Some(budget) = args.budget {
                    config.budget = Some(budget);
                }
                let budget = config.effective_budget(&problem.domain);
                let file_name = format!("{}__s{}__{}.csv", problem.name, seed, solver_id);
                match solver::run(problem, &config) {
                    Ok(result) => {
                        let path = out_dir.join(&file_name);
                        let mut file = fs::File::create(&path)?;
                        write_history_csv(&mut file, &result.history, problem.n_constraints)?;
                        manifest.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            problem.name,
                            seed,
                            problem.domain.n(),
                            budget,
                            problem.n_constraints,
                            solver_id,
                            file_name
                        ));
                        completed += 1;
                        eprintln!("done: {} seed {} [{}]", problem.name, seed, solver_id);
                    }
                    Err(err) => {
                        eprintln!("skipped {} seed {} [{}]: {err}", problem.name, seed, solver_id);
                    }
                }
            }
        }
    }
    fs::write(out_dir.join("manifest.csv"), manifest)?;
    if completed == 0 {
        bail!("no instance completed");
    }
    println!("completed {completed} runs into {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn read_manifest(log_dir: &Path) -> Result<Vec<(Instance, String, PathBuf)>> {
    let manifest_path = log_dir.join("manifest.csv");
    let text = fs::read_to_string(&manifest_path)
        .with_context(|| format!("missing manifest {}", manifest_path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            bail!("manifest line {} malformed", i + 1);
        }
        let instance = Instance {
            problem_id: fields[0].to_string(),
            seed: fields[1].parse().context("manifest seed")?,
            n: fields[2].parse().context("manifest n")?,
            budget: fields[3].parse().context("manifest budget")?,
            n_constraints: fields[4].parse().context("manifest n_constraints")?,
        };
        rows.push((instance, fields[5].to_string(), log_dir.join(fields[6])));
    }
    Ok(rows)
}

fn profile_command(args: ProfileArgs) -> Result<ExitCode> {
    let log_dir = args.log_dir.unwrap_or_else(default_out_dir);
    let rows = read_manifest(&log_dir)?;
    let mut logs = Vec::new();
    for (instance, solver_id, path) in rows {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading history {}", path.display()))?;
        logs.push(RunLog::from_csv(&text, instance, &solver_id)?);
    }
    let taus = if args.taus.is_empty() { bench::default_taus() } else { args.taus.clone() };
    let grid = bench::default_kappa_grid();
    let mut profiles = Vec::new();
    for &tau in &taus {
        let result = bench::data_profile(&logs, tau, &grid);
        for name in &result.excluded {
            eprintln!("warning: instance {name} excluded (no solver reached feasibility)");
        }
        // emit-time property re-check
        for curve in &result.curves {
            let mut last = -1.0;
            for &(_, fraction) in &curve.points {
                if !(0.0..=1.0).contains(&fraction) || fraction < last {
                    bail!("curve for {} is not monotone in [0,1]", curve.solver_id);
                }
                last = fraction;
            }
        }
        profiles.push((tau, result));
    }

    let out = args.out.unwrap_or_else(|| log_dir.join("profiles.csv"));
    let mut csv = fs::File::create(&out)
        .with_context(|| format!("creating profile file {}", out.display()))?;
    bench::write_profile_csv(&mut csv, &profiles)?;
    let dat_path = out.with_extension("dat");
    let mut dat = fs::File::create(&dat_path)?;
    bench::write_profile_gnuplot(&mut dat, &profiles)?;
    println!("profiles written to {} and {}", out.display(), dat_path.display());
    Ok(ExitCode::SUCCESS)
}

fn neighbors_command(args: NeighborsArgs) -> Result<ExitCode> {
    let problem = problems::resolve(&args.problem, args.suite_seed)?;
    let domain = &problem.domain;
    if domain.n_cat() == 0 {
        bail!("problem '{}' has no categorical variables", problem.name);
    }
    let point = Point::decode(domain, &args.point)
        .map_err(|e| anyhow!("parsing --point: {e}"))?;
    if !domain.validate(&point) {
        bail!("point '{}' violates the domain bounds", args.point);
    }

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let mut points = lhs_doe(domain, args.doe.max(2), &mut rng);
    points.push(point.clone());
    let evals: Vec<_> = points.iter().map(|p| problem.evaluate(p)).collect();
    let point_eval = evals.last().unwrap().clone();

    let f_targets: Vec<f64> = evals.iter().map(|e| e.f).collect();
    let hopt = HyperoptConfig { n_starts: 3, max_iters: 100, seed: args.seed };
    let hp = optimize_hyperparams(domain, &points, &f_targets, &hopt)?;
    let objective = fit(&points, &f_targets, &hp)?;
    let mut constraints: Vec<GpModel> = Vec::new();
    for j in 0..problem.n_constraints {
        let targets: Vec<f64> = evals.iter().map(|e| e.g[j]).collect();
        let hp = optimize_hyperparams(domain, &points, &targets, &hopt)?;
        constraints.push(fit(&points, &targets, &hp)?);
    }

    let candidates = domain.enumerate_components(4096, &point.cat, &mut rng)?;
    let m = args.m.unwrap_or_else(|| default_m(domain)).clamp(1, candidates.len());
    let cfg = ConstraintMapConfig::default();
    let evaluator = ranking_functions(
        &point,
        point_eval.is_feasible(),
        &objective,
        &constraints,
        &cfg,
        &candidates,
    )?;
    let ranked = order_components(&point.cat, &candidates, |v| evaluator.eval(v));
    println!("# problem={} doe={} seed={} m={}", problem.name, args.doe, args.seed, m);
    println!(
        "# incumbent={} feasible={}",
        point.encode(),
        point_eval.is_feasible()
    );
    print!("{}", dump_ranked(&ranked));
    Ok(ExitCode::SUCCESS)
}
