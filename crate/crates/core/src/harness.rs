//! Refinement studies and profile extraction.
//!
//! A study solves one problem for every `(α, β)` pair and every step size in a
//! ladder, measures `e∞` against the exact solution and derives observed
//! orders between consecutive rungs. Cells are independent and run on the
//! rayon pool; rows are emitted in config order.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{max_error, max_magnitude, spatial_order, temporal_order};
use crate::error::{Error, Result};
use crate::problem::{ProblemFile, ProblemSpec, MANUFACTURED};
use crate::solver::{solve_with_ghosts, GhostPolicy, SchemeKind, SolutionHistory};

/// Rows with `e∞ < ROUNDOFF_FACTOR · ε · max|U|` are flagged as roundoff limited.
pub const ROUNDOFF_FACTOR: f64 = 100.0;

/// Which step size the ladder varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    /// Fixed `h`, varied `τ`.
    Temporal,
    /// Fixed `τ`, varied `h`.
    Spatial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scheme: SchemeKind,
    #[serde(default)]
    pub ghosts: GhostPolicy,
    /// `paper-example` or a path to a JSON problem file.
    pub problem: String,
    pub pairs: Vec<(f64, f64)>,
    /// `h` for a temporal study, `τ` for a spatial one.
    pub fixed: f64,
    /// The ladder of `τ` (temporal) or `h` (spatial) values.
    pub varied: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub h: f64,
    pub e_inf: Option<f64>,
    pub order: Option<f64>,
    pub wall_seconds: f64,
    /// `e∞` is within the roundoff floor of the solution magnitude.
    pub roundoff_limited: bool,
    pub error: Option<String>,
}

/// Builds the problem for one `(α, β)` pair.
pub fn resolve_problem(problem: &str, alpha: f64, beta: f64) -> Result<ProblemSpec> {
    if problem == MANUFACTURED {
        return Ok(ProblemSpec::manufactured(alpha, beta));
    }
    let mut file = ProblemFile::load(Path::new(problem))?;
    file.alpha = alpha;
    file.beta = beta;
    file.compile()
}

/// Number of cells of size `step` in `extent`, rejecting non-integral ratios.
pub fn cell_count(extent: f64, step: f64, name: &'static str) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::arg(name, format!("must be positive, got {step}")));
    }
    let n = (extent / step).round();
    if n < 1.0 || ((n * step - extent) / extent).abs() > 1e-9 {
        return Err(Error::arg(
            name,
            format!("{step} does not divide the extent {extent}"),
        ));
    }
    Ok(n as usize)
}

fn check_config(config: &StudyConfig) -> Result<()> {
    if config.pairs.is_empty() {
        return Err(Error::arg("pairs", "at least one (alpha, beta) pair is required"));
    }
    if config.varied.is_empty() {
        return Err(Error::arg("varied", "at least one step size is required"));
    }
    let inc = config.varied.windows(2).all(|w| w[0] < w[1]);
    let dec = config.varied.windows(2).all(|w| w[0] > w[1]);
    if !(inc || dec) {
        return Err(Error::arg("varied", "steps must be strictly monotone"));
    }
    Ok(())
}

fn run_cell(config: &StudyConfig, alpha: f64, beta: f64, tau: f64, h: f64) -> StudyRow {
    let mut row = StudyRow {
        alpha,
        beta,
        tau,
        h,
        e_inf: None,
        order: None,
        wall_seconds: 0.0,
        roundoff_limited: false,
        error: None,
    };
    let outcome = (|| -> Result<(f64, SolutionHistory)> {
        let spec = resolve_problem(&config.problem, alpha, beta)?;
        let exact = spec.exact.clone().ok_or(Error::MissingExact)?;
        let m = cell_count(spec.length, h, "h")?;
        let n = cell_count(spec.horizon, tau, "tau")?;
        let history = solve_with_ghosts(&spec, config.scheme, config.ghosts, m, n)?;
        Ok((max_error(&history, &*exact), history))
    })();
    match outcome {
        Ok((e, history)) => {
            row.e_inf = Some(e);
            row.wall_seconds = history.wall_seconds;
            row.roundoff_limited = e < ROUNDOFF_FACTOR * f64::EPSILON * max_magnitude(&history);
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row
}

fn run_study(config: &StudyConfig, kind: StudyKind) -> Result<Vec<StudyRow>> {
    check_config(config)?;
    let cells: Vec<(f64, f64, f64)> = config
        .pairs
        .iter()
        .flat_map(|&(a, b)| config.varied.iter().map(move |&v| (a, b, v)))
        .collect();
    let mut rows: Vec<StudyRow> = cells
        .par_iter()
        .map(|&(a, b, v)| match kind {
            StudyKind::Temporal => run_cell(config, a, b, v, config.fixed),
            StudyKind::Spatial => run_cell(config, a, b, config.fixed, v),
        })
        .collect();
    for group in rows.chunks_mut(config.varied.len()) {
        for i in 1..group.len() {
            let (prev, cur) = (&group[i - 1], &group[i]);
            if let (Some(e1), Some(e2)) = (prev.e_inf, cur.e_inf) {
                let order = match kind {
                    StudyKind::Temporal if prev.tau == 2.0 * cur.tau => temporal_order(e1, e2),
                    StudyKind::Temporal => spatial_order(e1, prev.tau, e2, cur.tau),
                    StudyKind::Spatial => spatial_order(e1, prev.h, e2, cur.h),
                };
                group[i].order = order.ok();
            }
        }
    }
    Ok(rows)
}

/// One solve per (pair, τ) at fixed `h`.
pub fn run_temporal_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    run_study(config, StudyKind::Temporal)
}

/// One solve per (pair, h) at fixed `τ`.
pub fn run_spatial_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    run_study(config, StudyKind::Spatial)
}

/// Writes `alpha,beta,tau,h,e_inf,order,wall_seconds`; with `mask_wall` the
/// timing column is left empty so identical configs give identical bytes.
pub fn write_study_csv<W: Write>(rows: &[StudyRow], mask_wall: bool, mut w: W) -> std::io::Result<()> {
    writeln!(w, "alpha,beta,tau,h,e_inf,order,wall_seconds")?;
    for r in rows {
        let e = r.e_inf.map(|e| format!("{e:.4e}")).unwrap_or_default();
        let o = r.order.map(|o| format!("{o:.4}")).unwrap_or_default();
        let wall = if mask_wall {
            String::new()
        } else {
            format!("{:.6}", r.wall_seconds)
        };
        writeln!(w, "{},{},{},{},{e},{o},{wall}", r.alpha, r.beta, r.tau, r.h)?;
    }
    Ok(())
}

/// Host facts recorded alongside a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
        }
    }
}

/// Contents of `study.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    pub environment: Environment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "coordinate")]
pub enum ProfileMode {
    /// Time series at the node nearest to `x`.
    FixedX(f64),
    /// Spatial profile at the level nearest to `t`.
    FixedT(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub mode: ProfileMode,
    /// Grid coordinate actually used.
    pub snapped: f64,
    pub snap_distance: f64,
    /// `(t, value)` for fixed x, `(x, value)` for fixed t.
    pub rows: Vec<(f64, f64)>,
}

impl Profile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let head = match self.mode {
            ProfileMode::FixedX(_) => "t",
            ProfileMode::FixedT(_) => "x",
        };
        writeln!(w, "{head},value")?;
        for (c, v) in &self.rows {
            writeln!(w, "{c},{v}")?;
        }
        Ok(())
    }
}

/// Extracts a profile, snapping the coordinate to the nearest grid line.
pub fn emit_profile(history: &SolutionHistory, mode: ProfileMode) -> Result<Profile> {
    let eps = 1e-12;
    match mode {
        ProfileMode::FixedX(x) => {
            let length = history.h * history.intervals as f64;
            if !(x >= -eps && x <= length + eps) {
                return Err(Error::arg("x", format!("{x} lies outside [0, {length}]")));
            }
            let j = ((x / history.h).round() as usize).min(history.intervals);
            let rows = history
                .levels
                .iter()
                .enumerate()
                .map(|(k, l)| (history.t(k), l[j]))
                .collect();
            Ok(Profile {
                mode,
                snapped: history.x(j),
                snap_distance: (history.x(j) - x).abs(),
                rows,
            })
        }
        ProfileMode::FixedT(t) => {
            let horizon = history.tau * history.k() as f64;
            if !(t >= -eps && t <= horizon + eps) {
                return Err(Error::arg("t", format!("{t} lies outside [0, {horizon}]")));
            }
            let k = if history.tau > 0.0 {
                ((t / history.tau).round() as usize).min(history.k())
            } else {
                0
            };
            let rows = history.levels[k]
                .iter()
                .enumerate()
                .map(|(j, &v)| (history.x(j), v))
                .collect();
            Ok(Profile {
                mode,
                snapped: history.t(k),
                snap_distance: (history.t(k) - t).abs(),
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve;

    fn config(varied: Vec<f64>) -> StudyConfig {
        StudyConfig {
            scheme: SchemeKind::Compact6,
            ghosts: GhostPolicy::Extrapolate,
            problem: MANUFACTURED.into(),
            pairs: vec![(0.25, 0.15)],
            fixed: 1.0 / 40.0,
            varied,
        }
    }

    #[test]
    fn cell_counts() {
        assert_eq!(cell_count(1.0, 0.001, "h").unwrap(), 1000);
        assert_eq!(cell_count(1.0, 1.0 / 3.0, "h").unwrap(), 3);
        assert!(cell_count(1.0, 0.3, "h").is_err());
        assert!(cell_count(1.0, 0.0, "h").is_err());
    }

    #[test]
    fn single_step_has_no_order() {
        let rows = run_temporal_study(&config(vec![0.25])).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].e_inf.is_some());
        assert_eq!(rows[0].order, None);
    }

    #[test]
    fn non_monotone_ladder_rejected() {
        assert!(run_temporal_study(&config(vec![0.25, 0.5, 0.125])).is_err());
    }

    #[test]
    fn failing_cells_are_recorded() {
        let mut c = config(vec![0.5, 0.25]);
        c.fixed = 0.3;
        let rows = run_temporal_study(&c).unwrap();
        assert!(rows.iter().all(|r| r.error.is_some() && r.e_inf.is_none()));
    }

    #[test]
    fn profile_modes() {
        let spec = ProblemSpec::manufactured(0.3, 0.4);
        let h = solve(&spec, SchemeKind::Compact6, 20, 8).unwrap();
        let p = emit_profile(&h, ProfileMode::FixedX(0.0)).unwrap();
        assert!(p.rows.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(p.rows.len(), 9);
        let p = emit_profile(&h, ProfileMode::FixedT(0.0)).unwrap();
        assert!(p.rows.iter().all(|&(_, v)| v == 0.0));
        let p = emit_profile(&h, ProfileMode::FixedX(0.52)).unwrap();
        assert!((p.snapped - 0.5).abs() < 1e-15);
        assert!((p.snap_distance - 0.02).abs() < 1e-12);
        assert!(emit_profile(&h, ProfileMode::FixedX(1.5)).is_err());
        assert!(emit_profile(&h, ProfileMode::FixedT(-0.1)).is_err());
    }

    #[test]
    fn csv_is_deterministic_when_masked() {
        let c = config(vec![0.5, 0.25]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_study_csv(&run_temporal_study(&c).unwrap(), true, &mut a).unwrap();
        write_study_csv(&run_temporal_study(&c).unwrap(), true, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("alpha,beta,tau,h,e_inf,order,wall_seconds\n"));
    }
}
