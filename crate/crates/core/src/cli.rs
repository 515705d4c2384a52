//! Command-line front end.
//!
//! Every run is described by a [`RunConfig`]; JSON artifacts embed it under
//! `config` so that `subdiff --config <file>` replays the run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{amplification_sweep, max_error, sigma_grid, stability_report};
use crate::error::{Error, Result};
use crate::fracweights::{combined_weights, WeightTable};
use crate::harness::{
    cell_count, emit_profile, resolve_problem, run_spatial_study, run_temporal_study, write_study_csv,
    Environment, Profile, ProfileMode, StudyConfig, StudyKind, StudyReport,
};
use crate::problem::{ProblemFile, MANUFACTURED};
use crate::solver::{solve_with_ghosts, GhostPolicy, RunMetadata, SchemeKind};

/// Environment variable sizing the worker pool.
pub const THREADS_VAR: &str = "SUBDIFF_THREADS";

/// Parses a decimal or an exact fraction such as `1/1000`.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            n / d
        }
        None => s.parse().map_err(|_| format!("not a number: `{s}`"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: `{s}`"))
    }
}

/// Parses `alpha,beta`.
pub fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `alpha,beta`, got `{s}`"))?;
    Ok((parse_real(a)?, parse_real(b)?))
}

#[derive(Debug, Parser)]
#[command(name = "subdiff", version, about = "Compact schemes for two-term time-fractional subdiffusion")]
pub struct Cli {
    /// Replay a run from a JSON config or any emitted JSON artifact.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: timestamped directory under the cwd).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Allow writing into a non-empty output directory.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Option<RunConfig>,
}

/// A complete, replayable description of one invocation.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Solve one problem and write the solution history.
    Solve(SolveArgs),
    /// Temporal refinement study at fixed h.
    ConvergeTime(ConvergeTimeArgs),
    /// Spatial refinement study at fixed tau.
    ConvergeSpace(ConvergeSpaceArgs),
    /// Stability condition, amplification sweep and eigenvalue check.
    StabilityCheck(StabilityArgs),
    /// Amplification symbols on a sigma grid as CSV.
    SymbolSweep(StabilityArgs),
    /// Raw and shifted weights as CSV.
    WeightsDump(WeightsArgs),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Solve(_) => "solve",
            RunConfig::ConvergeTime(_) => "converge-time",
            RunConfig::ConvergeSpace(_) => "converge-space",
            RunConfig::StabilityCheck(_) => "stability-check",
            RunConfig::SymbolSweep(_) => "symbol-sweep",
            RunConfig::WeightsDump(_) => "weights-dump",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// `paper-example` or a path to a JSON problem file.
    #[arg(long, default_value = MANUFACTURED)]
    pub problem: String,
    #[arg(long, default_value = "compact6")]
    pub scheme: SchemeKind,
    #[arg(long, default_value = "extrapolate")]
    #[serde(default)]
    pub ghosts: GhostPolicy,
    #[arg(long, value_parser = parse_real)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub tau: Option<f64>,
    /// Number of time steps N.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_parser = parse_real)]
    pub h: Option<f64>,
    /// Number of spatial intervals M.
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Write one `x,value` file per level instead of the long `x,t,value` file.
    #[arg(long)]
    #[serde(default)]
    pub per_level: bool,
    /// Also write the time series at this x to profile.csv.
    #[arg(long, value_parser = parse_real, conflicts_with = "profile_t")]
    #[serde(default)]
    pub profile_x: Option<f64>,
    /// Also write the spatial profile at this t to profile.csv.
    #[arg(long, value_parser = parse_real)]
    #[serde(default)]
    pub profile_t: Option<f64>,
    /// Omit wall-clock times so repeated runs give identical bytes.
    #[arg(long)]
    #[serde(default)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[arg(long, default_value = MANUFACTURED)]
    pub problem: String,
    #[arg(long, default_value = "compact6")]
    pub scheme: SchemeKind,
    #[arg(long, default_value = "extrapolate")]
    #[serde(default)]
    pub ghosts: GhostPolicy,
    /// `alpha,beta`; repeat for several pairs.
    #[arg(long = "pair", value_parser = parse_pair, required = true)]
    pub pairs: Vec<(f64, f64)>,
    #[arg(long)]
    #[serde(default)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergeTimeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[arg(long, value_parser = parse_real)]
    pub h: f64,
    /// Comma-separated tau ladder, e.g. `1/4,1/8,1/16`.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', required = true)]
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvergeSpaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[arg(long, value_parser = parse_real)]
    pub tau: f64,
    /// Comma-separated h ladder, e.g. `1/12,1/14,1/16`.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', required = true)]
    pub hs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StabilityArgs {
    #[arg(long, default_value = "compact6")]
    pub scheme: SchemeKind,
    #[arg(long, value_parser = parse_real)]
    pub alpha: f64,
    #[arg(long, value_parser = parse_real)]
    pub beta: f64,
    /// Coefficient of the alpha term.
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub a: f64,
    /// Coefficient of the beta term.
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub b: f64,
    #[arg(long, value_parser = parse_real)]
    pub tau: f64,
    #[arg(long, value_parser = parse_real)]
    pub h: f64,
    /// Number of sigma samples in [0, 1].
    #[arg(long, default_value_t = crate::analysis::DEFAULT_SWEEP_POINTS)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WeightsArgs {
    #[arg(long, value_parser = parse_real)]
    pub order: f64,
    /// Highest weight index.
    #[arg(long)]
    pub n: usize,
}

/// A JSON artifact: the payload with the generating config alongside.
#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    payload: T,
}

#[derive(Debug, Serialize)]
struct SolveOutput {
    metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<ProfileInfo>,
}

#[derive(Debug, Serialize)]
struct ProfileInfo {
    mode: ProfileMode,
    snapped: f64,
    snap_distance: f64,
}

/// Where artifacts go.
struct Output {
    dir: Option<PathBuf>,
    force: bool,
    prepared: bool,
}

impl Output {
    fn prepare(&mut self) -> Result<&Path> {
        let dir = self.dir.as_ref().expect("directory chosen before writing");
        if !self.prepared {
            if dir.exists() {
                let busy = fs::read_dir(dir)?.next().is_some();
                if busy && !self.force {
                    return Err(Error::Io(format!(
                        "output directory {} is not empty (use --force)",
                        dir.display()
                    )));
                }
            }
            fs::create_dir_all(dir)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
            self.prepared = true;
        }
        Ok(dir)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.prepare()?.join(name);
        fs::write(&path, bytes).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

fn default_dir(command: &str) -> PathBuf {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    PathBuf::from(format!("subdiff-{command}-{secs}"))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("artifact serializes");
    v.push(b'\n');
    v
}

/// Reads a config, accepting either a bare [`RunConfig`] or an artifact embedding one.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::arg("config", format!("invalid JSON: {e}")))?;
    let inner = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| Error::arg("config", e.to_string()))
}

fn steps_from(extent: f64, step: Option<f64>, count: Option<usize>, names: (&'static str, &'static str)) -> Result<usize> {
    match (step, count) {
        (None, None) => Err(Error::arg(names.0, format!("give --{} or --{}", names.0, names.1))),
        (Some(s), None) => cell_count(extent, s, names.0),
        (None, Some(n)) => Ok(n),
        (Some(s), Some(n)) => {
            let derived = cell_count(extent, s, names.0)?;
            if derived == n {
                Ok(n)
            } else {
                Err(Error::arg(
                    names.0,
                    format!("--{} {s} implies {derived} but --{} is {n}", names.0, names.1),
                ))
            }
        }
    }
}

fn run_solve(config: &RunConfig, args: &SolveArgs, out: &mut Output) -> Result<()> {
    let spec = if args.problem == MANUFACTURED {
        let alpha = args.alpha.ok_or_else(|| Error::arg("alpha", "required for the built-in problem"))?;
        let beta = args.beta.ok_or_else(|| Error::arg("beta", "required for the built-in problem"))?;
        resolve_problem(MANUFACTURED, alpha, beta)?
    } else {
        let mut file = ProblemFile::load(Path::new(&args.problem))?;
        if let Some(a) = args.alpha {
            file.alpha = a;
        }
        if let Some(b) = args.beta {
            file.beta = b;
        }
        file.compile()?
    };
    let n = steps_from(spec.horizon, args.tau, args.steps, ("tau", "steps"))?;
    let m = steps_from(spec.length, args.h, args.intervals, ("h", "intervals"))?;
    let history = solve_with_ghosts(&spec, args.scheme, args.ghosts, m, n)?;
    let e_inf = spec.exact.as_ref().map(|e| max_error(&history, &**e));
    let profile: Option<Profile> = match (args.profile_x, args.profile_t) {
        (Some(x), _) => Some(emit_profile(&history, ProfileMode::FixedX(x))?),
        (None, Some(t)) => Some(emit_profile(&history, ProfileMode::FixedT(t))?),
        _ => None,
    };
    if args.per_level {
        for k in 0..history.levels.len() {
            let mut buf = Vec::new();
            history.write_level_csv(k, &mut buf)?;
            out.write(&format!("level_{k:06}.csv"), &buf)?;
        }
    } else {
        let mut buf = Vec::new();
        history.write_long_csv(&mut buf)?;
        out.write("solution.csv", &buf)?;
    }
    if let Some(p) = &profile {
        let mut buf = Vec::new();
        p.write_csv(&mut buf)?;
        out.write("profile.csv", &buf)?;
    }
    let metadata = RunMetadata {
        problem: spec.name.clone(),
        scheme: args.scheme,
        ghosts: args.ghosts,
        alpha: spec.alpha,
        beta: spec.beta,
        tau: history.tau,
        h: history.h,
        intervals: m,
        steps: n,
        e_inf,
        wall_seconds: if args.deterministic { 0.0 } else { history.wall_seconds },
    };
    let summary = serde_json::json!({ "e_inf": e_inf, "intervals": m, "steps": n });
    let payload = SolveOutput {
        metadata,
        profile: profile.map(|p| ProfileInfo {
            mode: p.mode,
            snapped: p.snapped,
            snap_distance: p.snap_distance,
        }),
    };
    out.write("metadata.json", &to_json(&Envelope { config, payload }))?;
    println!("{summary}");
    Ok(())
}

fn run_study_command(
    config: &RunConfig,
    study: &StudyArgs,
    kind: StudyKind,
    fixed: f64,
    varied: &[f64],
    out: &mut Output,
) -> Result<bool> {
    let cfg = StudyConfig {
        scheme: study.scheme,
        ghosts: study.ghosts,
        problem: study.problem.clone(),
        pairs: study.pairs.clone(),
        fixed,
        varied: varied.to_vec(),
    };
    let mut rows = match kind {
        StudyKind::Temporal => run_temporal_study(&cfg)?,
        StudyKind::Spatial => run_spatial_study(&cfg)?,
    };
    if study.deterministic {
        for r in &mut rows {
            r.wall_seconds = 0.0;
        }
    }
    let mut csv = Vec::new();
    write_study_csv(&rows, study.deterministic, &mut csv)?;
    out.write("study.csv", &csv)?;
    let mut environment = Environment::current();
    if study.deterministic {
        environment.threads = 0;
    }
    let all_ok = rows.iter().all(|r| r.error.is_none());
    let report = StudyReport {
        kind,
        config: cfg,
        rows,
        environment,
    };
    out.write("study.json", &to_json(&Envelope { config, payload: &report }))?;
    std::io::stdout().write_all(&csv)?;
    Ok(all_ok)
}

/// Emits a single artifact to `name` under `--out`, or to stdout without it.
fn emit_single(out: &mut Output, name: &str, bytes: &[u8]) -> Result<()> {
    if out.dir.is_some() {
        out.write(name, bytes)?;
    } else {
        std::io::stdout().write_all(bytes)?;
    }
    Ok(())
}

/// Executes a config. `Ok(false)` means artifacts were written but some cell failed.
pub fn execute(config: &RunConfig, out_dir: Option<PathBuf>, force: bool) -> Result<bool> {
    let single = matches!(
        config,
        RunConfig::StabilityCheck(_) | RunConfig::SymbolSweep(_) | RunConfig::WeightsDump(_)
    );
    let dir = match out_dir {
        Some(d) => Some(d),
        None if single => None,
        None => Some(default_dir(config.name())),
    };
    let mut out = Output {
        dir,
        force,
        prepared: false,
    };
    match config {
        RunConfig::Solve(args) => run_solve(config, args, &mut out).map(|_| true),
        RunConfig::ConvergeTime(a) => {
            run_study_command(config, &a.study, StudyKind::Temporal, a.h, &a.taus, &mut out)
        }
        RunConfig::ConvergeSpace(a) => {
            run_study_command(config, &a.study, StudyKind::Spatial, a.tau, &a.hs, &mut out)
        }
        RunConfig::StabilityCheck(a) => {
            let report = stability_report(a.scheme, a.alpha, a.beta, a.a, a.b, a.tau, a.h, a.samples)?;
            emit_single(&mut out, "stability.json", &to_json(&Envelope { config, payload: &report }))?;
            Ok(true)
        }
        RunConfig::SymbolSweep(a) => {
            let w = combined_weights(a.alpha, a.beta, a.a, a.b, a.tau, a.h, 1)?;
            let sweep = amplification_sweep(a.scheme, w.g0(), w.g1(), &sigma_grid(a.samples))?;
            let mut buf = Vec::new();
            writeln!(buf, "sigma,Q,P,ratio")?;
            for s in &sweep.samples {
                writeln!(buf, "{},{},{},{}", s.sigma, s.q, s.p, s.ratio())?;
            }
            emit_single(&mut out, "sweep.csv", &buf)?;
            Ok(true)
        }
        RunConfig::WeightsDump(a) => {
            let table = WeightTable::new(a.order, a.n)?;
            let mut buf = Vec::new();
            writeln!(buf, "ell,raw,shifted")?;
            for (l, (r, s)) in table.raw.iter().zip(&table.shifted).enumerate() {
                writeln!(buf, "{l},{r},{s}")?;
            }
            emit_single(&mut out, "weights.csv", &buf)?;
            Ok(true)
        }
    }
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::arg("SUBDIFF_THREADS", format!("not a count: `{v}`")))?;
        // A pool may already exist when embedded; the variable is advisory.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `argv`, runs, and returns the process exit status.
///
/// Status 0: success. 1: runtime failure or failed study cells. 2: usage error.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", &e.to_string()));
            return 2;
        }
    };
    let config = match (&cli.command, &cli.config) {
        (Some(_), Some(_)) => {
            eprintln!("{}", error_json("usage", "give a subcommand or --config, not both"));
            return 2;
        }
        (None, None) => {
            eprintln!("{}", error_json("usage", "no subcommand given"));
            return 2;
        }
        (Some(c), None) => Ok(c.clone()),
        (None, Some(path)) => load_config(path),
    };
    let result = configure_threads()
        .and(config)
        .and_then(|c| execute(&c, cli.out.clone(), cli.force));
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{}", error_json("study", "one or more study cells failed; see study.json"));
            1
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            1
        }
    }
}
