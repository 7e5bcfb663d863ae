//! Experiment sweeps: configuration, per-run records, summaries and output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Deserializer, Serialize};

use crate::ambiguity::{GroundMetric, WassersteinBall};
use crate::baselines::{bayesian_mip, enumeration_lp_baseline};
use crate::error::{Error, Result};
use crate::finite::solve_wasserstein_finite_mip;
use crate::game::FollowerUniverse;
use crate::games::{
    gen_cournot_instance, gen_inspection_instance, gen_synthetic_instance, CournotParams, Family, Instance,
    InspectionParams, SyntheticParams,
};
use crate::par::{map_range_workers, ExecMode};
use crate::solution::{BigMConfig, DrsssSolution, RunOptions, RunStatus};
use crate::wasserstein::{default_oracle, run_algorithm1, Algorithm1Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Single finite-support Wasserstein MIP.
    DrMipFinite,
    /// Incremental MIP generation with a separation oracle.
    DrAlgorithm1,
    /// One LP per best-response mapping.
    EnumLp,
    /// Bayesian Stackelberg MIP under the nominal distribution.
    Bayesian,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DrMipFinite, Method::DrAlgorithm1, Method::EnumLp, Method::Bayesian];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DrMipFinite => "dr_mip_finite",
            Method::DrAlgorithm1 => "dr_algorithm1",
            Method::EnumLp => "enum_lp",
            Method::Bayesian => "bayesian",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// A family parameter name or `theta`.
    pub var: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    /// One method or a list; every method runs on the same instances.
    #[serde(deserialize_with = "one_or_many")]
    pub method: Vec<Method>,
    /// Fixed family parameters; missing ones take the family defaults.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub sweep: Sweep,
    #[serde(default = "defaults::theta")]
    pub theta: f64,
    #[serde(default = "defaults::t")]
    pub t: f64,
    #[serde(default = "defaults::big_m", rename = "M")]
    pub big_m: f64,
    #[serde(default = "defaults::epsilon_strict")]
    pub epsilon_strict: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default = "defaults::time_limit_s")]
    pub time_limit_s: f64,
    #[serde(default = "defaults::reps")]
    pub reps: usize,
    /// Instance seeds; when absent, `seed, seed + 1, …, seed + reps − 1`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::workers")]
    pub workers: usize,
}

mod defaults {
    pub fn theta() -> f64 {
        0.1
    }
    pub fn t() -> f64 {
        2.0
    }
    pub fn big_m() -> f64 {
        2.0
    }
    pub fn epsilon_strict() -> f64 {
        1e-6
    }
    pub fn max_iter() -> usize {
        200
    }
    pub fn time_limit_s() -> f64 {
        1000.0
    }
    pub fn reps() -> usize {
        10
    }
    pub fn workers() -> usize {
        1
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Method>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Method),
        Many(Vec<Method>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(m) => vec![m],
        OneOrMany::Many(ms) => ms,
    })
}

/// Parameter names and defaults per family.
pub fn family_defaults(family: Family) -> &'static [(&'static str, f64)] {
    match family {
        Family::Inspection => &[("s", 3.0), ("p", 1.0), ("q", 1.0), ("k", 2.0)],
        Family::Cournot => &[("n", 4.0), ("k", 4.0)],
        Family::Synthetic => &[("n", 4.0), ("m", 4.0), ("k", 4.0)],
    }
}

impl ExperimentConfig {
    /// Reads TOML or JSON, chosen by extension (`.json` is JSON, anything
    /// else TOML).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidInput(msg));
        if self.method.is_empty() {
            return invalid("at least one method is required".into());
        }
        if self.sweep.values.is_empty() {
            return invalid("sweep values must be non-empty".into());
        }
        if !(self.time_limit_s > 0.0) {
            return invalid(format!("time limit must be positive, got {}", self.time_limit_s));
        }
        if self.seeds.as_ref().map_or(self.reps == 0, Vec::is_empty) {
            return invalid("at least one repetition is required".into());
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1".into());
        }
        if !(self.theta >= 0.0) || !(self.t >= 1.0) {
            return invalid(format!("need theta >= 0 and t >= 1, got {} and {}", self.theta, self.t));
        }
        BigMConfig {
            big_m: self.big_m,
            epsilon_strict: self.epsilon_strict,
        }
        .validate()?;
        let names = family_defaults(self.family);
        for key in self.params.keys() {
            if !names.iter().any(|(n, _)| n == key) {
                return invalid(format!("unknown {} parameter `{key}`", self.family));
            }
        }
        if self.sweep.var == "theta" {
            if self.sweep.values.iter().any(|&v| !(v >= 0.0)) {
                return invalid("theta values must be non-negative".into());
            }
        } else if !names.iter().any(|(n, _)| *n == self.sweep.var) {
            return invalid(format!("cannot sweep `{}` for {}", self.sweep.var, self.family));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.reps as u64).map(|r| self.seed + r).collect(),
        }
    }

    /// Family parameters with `sweep_value` substituted.
    pub fn params_at(&self, sweep_value: f64) -> BTreeMap<String, f64> {
        let mut params: BTreeMap<String, f64> = family_defaults(self.family)
            .iter()
            .map(|&(n, v)| (n.to_string(), v))
            .collect();
        params.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
        if self.sweep.var != "theta" {
            params.insert(self.sweep.var.clone(), sweep_value);
        }
        params
    }

    pub fn theta_at(&self, sweep_value: f64) -> f64 {
        if self.sweep.var == "theta" {
            sweep_value
        } else {
            self.theta
        }
    }
}

fn count(params: &BTreeMap<String, f64>, name: &str) -> Result<usize> {
    let v = params[name];
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::InvalidInput(format!("parameter {name} must be a non-negative integer, got {v}")));
    }
    Ok(v as usize)
}

/// Generates the instance for one run.
pub fn build_instance(family: Family, params: &BTreeMap<String, f64>, seed: u64) -> Result<Instance> {
    match family {
        Family::Inspection => gen_inspection_instance(&InspectionParams {
            s: count(params, "s")?,
            p: count(params, "p")?,
            q: count(params, "q")?,
            k: count(params, "k")?,
            seed,
        }),
        Family::Cournot => gen_cournot_instance(&CournotParams::new(count(params, "n")?, count(params, "k")?, seed)),
        Family::Synthetic => gen_synthetic_instance(&SyntheticParams {
            n: count(params, "n")?,
            m: count(params, "m")?,
            k: count(params, "k")?,
            seed,
        }),
    }
}

/// Solves one instance with one method.
///
/// Finite-support methods on an infinite universe run on the universe made
/// of the nominal support points.
pub fn solve_instance(
    inst: &Instance,
    method: Method,
    theta: f64,
    t: f64,
    cfg: &Algorithm1Config,
    opts: &RunOptions,
) -> Result<DrsssSolution> {
    let big_m = BigMConfig {
        big_m: cfg.big_m,
        epsilon_strict: cfg.epsilon_strict,
    };
    let mut game = inst.game.clone();
    if method != Method::DrAlgorithm1 && game.follower.finite().is_none() {
        game.follower = FollowerUniverse::Finite {
            utilities: inst.nominal.support.clone(),
        };
    }
    let ball = || WassersteinBall::new(inst.nominal.clone(), theta, t, GroundMetric::Frobenius);
    match method {
        Method::DrMipFinite => solve_wasserstein_finite_mip(&game, &ball()?, &big_m, opts),
        Method::EnumLp => enumeration_lp_baseline(&game, &ball()?, &big_m, opts),
        Method::Bayesian => bayesian_mip(&game, &inst.nominal, &big_m, opts),
        Method::DrAlgorithm1 => {
            let oracle = default_oracle(&game.follower);
            run_algorithm1(&game, &ball()?, oracle.as_ref(), cfg, opts)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    Timeout,
    Unconverged,
    Error,
}

/// One run of one method on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub family: Family,
    pub method: Method,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub seed: u64,
    pub status: RecordStatus,
    pub objective: Option<f64>,
    pub wall_time_s: f64,
    /// Master solves for Algorithm 1, zero for single-shot methods.
    pub iterations: usize,
    /// Error text for failed runs; not written to result files.
    #[serde(skip)]
    pub message: Option<String>,
}

/// Runs every (sweep value, method, seed) combination in that nesting order.
/// Failures are recorded, never propagated.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let seeds = cfg.seed_list();
    let mut jobs = Vec::new();
    for &value in &cfg.sweep.values {
        for &method in &cfg.method {
            for &seed in &seeds {
                jobs.push((value, method, seed));
            }
        }
    }
    Ok(map_range_workers(cfg.workers, jobs.len(), |i| {
        let (value, method, seed) = jobs[i];
        run_one(cfg, value, method, seed)
    }))
}

fn run_one(cfg: &ExperimentConfig, value: f64, method: Method, seed: u64) -> ExperimentRecord {
    let mut record = ExperimentRecord {
        family: cfg.family,
        method,
        sweep_var: cfg.sweep.var.clone(),
        sweep_value: value,
        seed,
        status: RecordStatus::Error,
        objective: None,
        wall_time_s: 0.0,
        iterations: 0,
        message: None,
    };
    let inst = match build_instance(cfg.family, &cfg.params_at(value), seed) {
        Ok(inst) => inst,
        Err(e) => {
            record.message = Some(e.to_string());
            return record;
        }
    };
    let a1 = Algorithm1Config {
        big_m: cfg.big_m,
        epsilon_strict: cfg.epsilon_strict,
        max_iter: cfg.max_iter,
        ..Algorithm1Config::default()
    };
    let opts = RunOptions {
        exec: ExecMode::Sequential,
        time_limit: Some(Duration::from_secs_f64(cfg.time_limit_s)),
        ..RunOptions::default()
    };
    let start = Instant::now();
    let result = solve_instance(&inst, method, cfg.theta_at(value), cfg.t, &a1, &opts);
    record.wall_time_s = start.elapsed().as_secs_f64();
    match result {
        Ok(sol) => {
            record.objective = Some(sol.value);
            record.iterations = sol.iterations();
            record.status = match sol.diagnostics.status {
                RunStatus::Converged => RecordStatus::Ok,
                RunStatus::Unconverged | RunStatus::Stalled => RecordStatus::Unconverged,
            };
        }
        Err(Error::TimeLimit) => record.status = RecordStatus::Timeout,
        Err(e) => record.message = Some(e.to_string()),
    }
    record
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!("unknown format `{other}`"))),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// CSV with columns `family,method,sweep_var,sweep_value,seed,status,
/// objective,wall_time_s,iterations`, or a JSON array of records.
pub fn write_records<W: std::io::Write>(records: &[ExperimentRecord], format: OutputFormat, out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to write".into()));
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => serde_json::to_writer_pretty(out, records)?,
    }
    Ok(())
}

pub fn emit_results(records: &[ExperimentRecord], format: OutputFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_records(records, format, std::io::BufWriter::new(file))
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<Vec<ExperimentRecord>> {
    let file = std::fs::File::open(path)?;
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error),
        OutputFormat::Json => Ok(serde_json::from_reader(std::io::BufReader::new(file))?),
    }
}

/// Mean and sample standard deviation of one (method, sweep value) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub sweep_value: f64,
    pub runs: usize,
    pub ok: usize,
    /// Over all runs; a timed-out run counts at its capped time.
    pub mean_wall_time_s: f64,
    pub std_wall_time_s: f64,
    /// Over runs that returned a value.
    pub mean_objective: Option<f64>,
    pub std_objective: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per (method, sweep value), in first-seen order.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(m, v)| m == r.method && v == r.sweep_value) {
            keys.push((r.method, r.sweep_value));
        }
    }
    keys.into_iter()
        .map(|(method, value)| {
            let cell: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| r.method == method && r.sweep_value == value)
                .collect();
            let times: Vec<f64> = cell.iter().map(|r| r.wall_time_s).collect();
            let objs: Vec<f64> = cell.iter().filter_map(|r| r.objective).collect();
            let (mean_t, std_t) = mean_std(&times);
            let obj = (!objs.is_empty()).then(|| mean_std(&objs));
            SummaryRow {
                method,
                sweep_value: value,
                runs: cell.len(),
                ok: cell.iter().filter(|r| r.status == RecordStatus::Ok).count(),
                mean_wall_time_s: mean_t,
                std_wall_time_s: std_t,
                mean_objective: obj.map(|o| o.0),
                std_objective: obj.map(|o| o.1),
            }
        })
        .collect()
}

pub fn write_summary<W: std::io::Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean runtime against the sweep value, one polyline per method, with
/// ±1 standard deviation error bars.
pub fn svg_plot(rows: &[SummaryRow], title: &str, x_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let xs = rows.iter().map(|r| r.sweep_value);
    let x_lo = xs.clone().fold(f64::INFINITY, f64::min);
    let x_hi = xs.fold(f64::NEG_INFINITY, f64::max);
    let y_hi = rows
        .iter()
        .map(|r| r.mean_wall_time_s + r.std_wall_time_s)
        .fold(0.0, f64::max)
        .max(1e-9);
    let x_span = if x_hi > x_lo { x_hi - x_lo } else { 1.0 };
    let px = |x: f64| PAD + (x - x_lo) / x_span * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - y / y_hi * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<line x1="{PAD}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{0}" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 20.0, escape(x_label));
    let _ = writeln!(svg, r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">wall time (s)</text>"#, H / 2.0, H / 2.0);
    for i in 0..=4 {
        let y = y_hi * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{y:.3}</text>"#, PAD - 6.0, py(y) + 4.0);
        let x = x_lo + x_span * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(x), H - PAD + 16.0, trim(x));
    }
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    for (i, method) in methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts: Vec<&SummaryRow> = rows.iter().filter(|r| r.method == *method).collect();
        pts.sort_by(|a, b| a.sweep_value.total_cmp(&b.sweep_value));
        let path: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.sweep_value), py(r.mean_wall_time_s)))
            .collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for r in pts {
            let (x, lo, hi) = (
                px(r.sweep_value),
                py((r.mean_wall_time_s - r.std_wall_time_s).max(0.0)),
                py(r.mean_wall_time_s + r.std_wall_time_s),
            );
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                py(r.mean_wall_time_s)
            );
        }
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{method}</text>"#,
            W - PAD - 110.0,
            ly - 9.0,
            W - PAD - 95.0,
            ly
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn trim(x: f64) -> String {
    let s = format!("{x:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub const PRESETS: [&str; 11] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "figA1a", "figA1b", "figA1c", "figA2a", "figA2b", "figA2c", "figA2d",
];

type PresetRow = (Family, Vec<Method>, &'static [(&'static str, f64)], &'static str, Vec<f64>);

/// Desk-scale sweep presets: the swept quantity with smaller
/// fixed sizes, 3 repetitions and a 60 s limit per solve.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let finite = vec![Method::DrMipFinite, Method::EnumLp, Method::Bayesian];
    let thetas = vec![0.0, 0.5, 1.0, 1.5, 2.0];
    let (family, method, params, var, values): PresetRow = match name {
        "fig2a" => (Family::Inspection, vec![Method::DrAlgorithm1], &[("s", 5.0), ("q", 1.0), ("k", 2.0)], "p", vec![1.0, 2.0, 3.0]),
        "fig2b" => (Family::Inspection, vec![Method::DrAlgorithm1], &[("s", 5.0), ("p", 2.0), ("k", 2.0)], "q", vec![1.0, 2.0, 3.0]),
        "fig2c" => (Family::Inspection, vec![Method::DrAlgorithm1], &[("s", 5.0), ("p", 1.0), ("q", 1.0)], "k", vec![1.0, 2.0, 3.0, 4.0]),
        "fig2d" => (Family::Inspection, vec![Method::DrAlgorithm1], &[("s", 5.0), ("p", 1.0), ("q", 1.0), ("k", 2.0)], "theta", thetas),
        "figA1a" => (Family::Cournot, finite, &[("k", 4.0)], "n", vec![2.0, 4.0, 6.0, 8.0]),
        "figA1b" => (Family::Cournot, finite, &[("n", 4.0)], "k", vec![1.0, 2.0, 3.0, 4.0, 5.0]),
        "figA1c" => (Family::Cournot, finite, &[("n", 5.0), ("k", 4.0)], "theta", thetas),
        "figA2a" => (Family::Synthetic, finite, &[("m", 4.0), ("k", 3.0)], "n", vec![5.0, 10.0, 20.0, 40.0]),
        "figA2b" => (Family::Synthetic, finite, &[("n", 10.0), ("k", 3.0)], "m", vec![2.0, 3.0, 4.0, 5.0]),
        "figA2c" => (Family::Synthetic, finite, &[("n", 5.0), ("m", 3.0)], "k", vec![1.0, 2.0, 3.0, 4.0, 5.0]),
        "figA2d" => (Family::Synthetic, finite, &[("n", 4.0), ("m", 4.0), ("k", 4.0)], "theta", thetas),
        _ => return None,
    };
    Some(ExperimentConfig {
        family,
        method,
        params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
        sweep: Sweep {
            var: var.into(),
            values,
        },
        theta: defaults::theta(),
        t: defaults::t(),
        big_m: defaults::big_m(),
        epsilon_strict: defaults::epsilon_strict(),
        max_iter: defaults::max_iter(),
        time_limit_s: 60.0,
        reps: 3,
        seeds: None,
        seed: 0,
        workers: 1,
    })
}
