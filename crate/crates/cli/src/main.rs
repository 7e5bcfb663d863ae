use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use drstack::config::{self, GenConfig, SolveConfig, SolveMethod};
use drstack::experiment::{
    emit_results, preset, run_sweep, summarize, svg_plot, write_summary, ExperimentConfig, Method, OutputFormat,
    RecordStatus, PRESETS,
};
use drstack::finite::{solve_by_enumeration, solve_by_mip};
use drstack::games::Family;
use drstack::solver::BackendKind;
use drstack::wasserstein::{
    default_oracle, run_algorithm1, write_iteration_csv, BoxFrobeniusOracle, FiniteOracle, InspectionOracle,
    SeparationOracle,
};
use drstack::{baselines, AmbiguitySpec, DrsssSolution, ExecMode, FollowerUniverse, RunOptions};

#[derive(Parser)]
#[command(name = "drstack", version, about = "Distributionally robust Stackelberg solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game instance and its nominal distribution.
    Gen(GenArgs),
    /// Solve a finite-support problem (polytope set or finite Wasserstein ball).
    Solve(SolveArgs),
    /// Run Algorithm 1 on a Wasserstein ball.
    Wasserstein(WassersteinArgs),
    /// Run an experiment sweep.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (`family`, `params`, `seed`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Family parameter, e.g. `--param s=4`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    /// Game JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nominal distribution JSON output.
    #[arg(long)]
    nominal: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Inspection,
    Cournot,
    Synthetic,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Inspection => Family::Inspection,
            FamilyArg::Cournot => Family::Cournot,
            FamilyArg::Synthetic => Family::Synthetic,
        }
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Args)]
struct RunFlags {
    /// Wall-clock limit in seconds for the whole run.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Write every LP/MIP/QP to this directory in LP format.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BackendArg::Microlp)]
    backend: BackendArg,
    /// Disable the rayon data-parallel paths.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Microlp,
    Dense,
}

impl RunFlags {
    fn options(&self) -> Result<RunOptions> {
        let time_limit = match self.time_limit {
            Some(s) if s.is_nan() || s <= 0.0 => bail!("--time-limit must be positive"),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(RunOptions {
            backend: match self.backend {
                BackendArg::Microlp => BackendKind::Microlp,
                BackendArg::Dense => BackendKind::Dense,
            },
            exec: if self.sequential { ExecMode::Sequential } else { ExecMode::Parallel },
            time_limit,
            dump_lp: self.dump_lp.clone(),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Solution JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct WassersteinArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Iteration log CSV.
    #[arg(long)]
    dump_iters: Option<PathBuf>,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config; mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in desk-scale sweep, e.g. fig2c.
    #[arg(long)]
    preset: Option<String>,
    /// Records output (CSV or JSON).
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the extension of --out, else csv.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Per-solve time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// First instance seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Replace the configured methods; repeatable.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Per-cell mean/std CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Runtime plot (SVG) with standard-deviation error bars.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Wasserstein(a) => wasserstein(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            let written = out.write_all(text.as_bytes()).and_then(|_| {
                if text.ends_with('\n') {
                    Ok(())
                } else {
                    out.write_all(b"\n")
                }
            });
            match written {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut cfg = match (&a.config, a.family) {
        (Some(path), _) => config::load::<GenConfig>(path)?,
        (None, Some(f)) => GenConfig {
            family: f.into(),
            params: Default::default(),
            seed: 0,
        },
        (None, None) => bail!("either --config or --family is required"),
    };
    if let Some(f) = a.family {
        cfg.family = f.into();
    }
    cfg.params.extend(a.params);
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let inst = cfg.generate()?;
    write_output(a.out.as_deref(), &inst.game.to_json()?)?;
    if let Some(path) = &a.nominal {
        let doc = serde_json::json!({
            "weights": inst.nominal.weights,
            "support": inst.nominal.support,
        });
        fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    eprintln!(
        "{} game: n = {}, m = {}, k = {}, universe = {}",
        cfg.family,
        inst.game.n,
        inst.game.m,
        inst.nominal.len(),
        inst.game.follower.kind()
    );
    Ok(())
}

fn report(sol: &DrsssSolution, out: Option<&Path>) -> Result<()> {
    eprintln!(
        "value {:.9}  status {:?}  time {:.3}s",
        sol.value, sol.diagnostics.status, sol.solver_time_s
    );
    write_output(out, &sol.to_json()?)
}

fn solve(a: SolveArgs) -> Result<()> {
    let problem = SolveConfig::load_problem(&a.config)?;
    let opts = a.run.options()?;
    let cfg = problem.config.big_m_config();
    let g = &problem.game;
    let sol = match (problem.config.method, &problem.ambiguity) {
        (SolveMethod::Mip, amb) => solve_by_mip(g, amb, &cfg, &opts)?,
        (SolveMethod::Enumeration, amb) => solve_by_enumeration(g, amb, &opts)?,
        (SolveMethod::EnumLp, AmbiguitySpec::Wasserstein(ball)) => {
            baselines::enumeration_lp_baseline(g, ball, &cfg, &opts)?
        }
        (SolveMethod::Bayesian, AmbiguitySpec::Wasserstein(ball)) => {
            baselines::bayesian_mip(g, &ball.nominal, &cfg, &opts)?
        }
        (m, _) => bail!("method {m:?} needs a Wasserstein ambiguity set"),
    };
    report(&sol, a.out.as_deref())
}

fn pick_oracle(name: &str, universe: &FollowerUniverse) -> Result<Box<dyn SeparationOracle>> {
    Ok(match name {
        "auto" => default_oracle(universe),
        "box" => Box::new(BoxFrobeniusOracle::default()),
        "inspection" => Box::new(InspectionOracle),
        "box-inspection" => match universe {
            FollowerUniverse::Inspection(f) => Box::new(BoxFrobeniusOracle::restricted_to(f)),
            _ => bail!("oracle box-inspection needs an inspection universe"),
        },
        "finite" => Box::new(FiniteOracle),
        other => bail!("unknown oracle `{other}`"),
    })
}

fn wasserstein(a: WassersteinArgs) -> Result<()> {
    let problem = SolveConfig::load_problem(&a.config)?;
    let AmbiguitySpec::Wasserstein(ball) = &problem.ambiguity else {
        bail!("the wasserstein command needs a Wasserstein ambiguity set");
    };
    let oracle = pick_oracle(&problem.config.oracle, &problem.game.follower)?;
    let opts = a.run.options()?;
    let sol = run_algorithm1(&problem.game, ball, oracle.as_ref(), &problem.config.algorithm1_config(), &opts)?;
    for r in &sol.diagnostics.iterations {
        eprintln!(
            "tau {:>3}  objective {:>12.9}  lambda {:>10.6}  |E| {:>4}  Gamma {:>12.4e}",
            r.tau, r.master_objective, r.lambda, r.generated, r.gamma
        );
    }
    if let Some(path) = &a.dump_iters {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_iteration_csv(&sol.diagnostics.iterations, file)?;
    }
    report(&sol, a.out.as_deref())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => preset(name)
            .with_context(|| format!("unknown preset `{name}`; available: {}", PRESETS.join(", ")))?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(t) = a.time_limit {
        cfg.time_limit_s = t;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
        cfg.seeds = None;
    }
    if let Some(reps) = a.reps {
        cfg.reps = reps;
        cfg.seeds = None;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if !a.methods.is_empty() {
        cfg.method = a.methods.iter().map(|m| m.parse::<Method>()).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    let format = match a.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None if a.out.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        None => OutputFormat::Csv,
    };
    let records = run_sweep(&cfg)?;
    for r in records.iter().filter(|r| r.status == RecordStatus::Error) {
        eprintln!(
            "{} {}={} seed {}: {}",
            r.method,
            r.sweep_var,
            r.sweep_value,
            r.seed,
            r.message.as_deref().unwrap_or("error")
        );
    }
    emit_results(&records, format, &a.out)?;
    let rows = summarize(&records);
    println!("{:<14} {:>10} {:>5} {:>5} {:>12} {:>12}", "method", cfg.sweep.var, "runs", "ok", "mean_s", "std_s");
    for r in &rows {
        println!(
            "{:<14} {:>10} {:>5} {:>5} {:>12.4} {:>12.4}",
            r.method.as_str(),
            r.sweep_value,
            r.runs,
            r.ok,
            r.mean_wall_time_s,
            r.std_wall_time_s
        );
    }
    if let Some(path) = &a.summary {
        write_summary(&rows, fs::File::create(path)?)?;
    }
    if let Some(path) = &a.plot {
        let title = format!("{} runtime vs {}", cfg.family, cfg.sweep.var);
        fs::write(path, svg_plot(&rows, &title, &cfg.sweep.var))?;
    }
    Ok(())
}
