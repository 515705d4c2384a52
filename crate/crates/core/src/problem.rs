//! Initial-boundary-value problems for
//! `u_t = (A·D^{1-α} + B·D^{1-β}) u_xx + f` on `(0, L) × (0, T]`
//! with Dirichlet data, plus the built-in manufactured benchmark.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::expr::Expr;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reserved name of the built-in manufactured problem.
pub const MANUFACTURED: &str = "paper-example";

/// Corner compatibility tolerance between initial and boundary data.
pub const CORNER_TOL: f64 = 1e-12;

/// A fully specified problem.
///
/// `source` must be evaluable on a margin of three grid cells outside
/// `[0, length]`: the wide stencils read it at ghost abscissae.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub alpha: f64,
    pub beta: f64,
    pub diff_a: f64,
    pub diff_b: f64,
    pub length: f64,
    pub horizon: f64,
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
    pub boundary_left: SpaceFn,
    pub boundary_right: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("diff_a", &self.diff_a)
            .field("diff_b", &self.diff_b)
            .field("length", &self.length)
            .field("horizon", &self.horizon)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// `u(x, t) = t^{α+β+2} x¹² (1-x)¹² sin(πx)`.
pub fn example_exact(x: f64, t: f64, alpha: f64, beta: f64) -> f64 {
    let q = x * (1.0 - x);
    t.powf(alpha + beta + 2.0) * q.powi(12) * (PI * x).sin()
}

/// Source term that makes [`example_exact`] solve the equation with `A = B = 1`.
pub fn example_source(x: f64, t: f64, alpha: f64, beta: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let q = x * (1.0 - x);
    let s = (PI * x).sin();
    let c = (PI * x).cos();
    let p = alpha + beta;
    let time_part = (p + 2.0) * t.powf(p + 1.0) * q.powi(12) * s;
    let neg_xx = q.powi(10)
        * (s * (PI * PI * x * x * (1.0 - x).powi(2) - 552.0 * x * x + 552.0 * x - 132.0)
            - 24.0 * PI * x * c * (2.0 * x * x - 3.0 * x + 1.0));
    let g = gamma(p + 3.0);
    let memory = g / gamma(2.0 * alpha + beta + 2.0) * t.powf(2.0 * alpha + beta + 1.0)
        + g / gamma(2.0 * beta + alpha + 2.0) * t.powf(2.0 * beta + alpha + 1.0);
    time_part + neg_xx * memory
}

impl ProblemSpec {
    /// The manufactured benchmark on `[0, 1] × [0, 1]` with `A = B = 1`.
    pub fn manufactured(alpha: f64, beta: f64) -> Self {
        Self {
            name: MANUFACTURED.to_string(),
            alpha,
            beta,
            diff_a: 1.0,
            diff_b: 1.0,
            length: 1.0,
            horizon: 1.0,
            source: Arc::new(move |x, t| example_source(x, t, alpha, beta)),
            initial: Arc::new(|_| 0.0),
            boundary_left: Arc::new(|_| 0.0),
            boundary_right: Arc::new(|_| 0.0),
            exact: Some(Arc::new(move |x, t| example_exact(x, t, alpha, beta))),
        }
    }

    /// All-zero data; the discrete solution must vanish identically.
    pub fn homogeneous(alpha: f64, beta: f64) -> Self {
        Self {
            name: "homogeneous".to_string(),
            alpha,
            beta,
            diff_a: 1.0,
            diff_b: 1.0,
            length: 1.0,
            horizon: 1.0,
            source: Arc::new(|_, _| 0.0),
            initial: Arc::new(|_| 0.0),
            boundary_left: Arc::new(|_| 0.0),
            boundary_right: Arc::new(|_| 0.0),
            exact: Some(Arc::new(|_, _| 0.0)),
        }
    }

    /// Violated invariants, empty when the problem is well formed.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                out.push(format!("{name} = {v} is outside (0, 1)"));
            }
        }
        for (name, v) in [
            ("diff_a", self.diff_a),
            ("diff_b", self.diff_b),
            ("length", self.length),
            ("horizon", self.horizon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} = {v} must be positive"));
            }
        }
        if self.length > 0.0 && self.length.is_finite() {
            let left = ((self.initial)(0.0), (self.boundary_left)(0.0));
            if !((left.0 - left.1).abs() <= CORNER_TOL) {
                out.push(format!(
                    "corner mismatch at x = 0: initial = {}, boundary_left = {}",
                    left.0, left.1
                ));
            }
            let right = ((self.initial)(self.length), (self.boundary_right)(0.0));
            if !((right.0 - right.1).abs() <= CORNER_TOL) {
                out.push(format!(
                    "corner mismatch at x = L: initial = {}, boundary_right = {}",
                    right.0, right.1
                ));
            }
        }
        out
    }
}

/// Checks every invariant of `spec`, returning it unchanged when all hold.
pub fn validate(spec: ProblemSpec) -> Result<ProblemSpec> {
    let v = spec.violations();
    if v.is_empty() {
        Ok(spec)
    } else {
        Err(Error::Invalid(v))
    }
}

/// On-disk JSON description of a user problem.
///
/// Expressions may use `x`, `t`, `pi`, `alpha`, `beta` and any entry of
/// `constants`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub diff_a: f64,
    #[serde(default = "one")]
    pub diff_b: f64,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    pub source: String,
    pub initial: String,
    pub boundary_left: String,
    pub boundary_right: String,
    #[serde(default)]
    pub exact: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Expression(format!("problem JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Compiles the expressions into a [`ProblemSpec`] (not yet validated).
    pub fn compile(&self) -> Result<ProblemSpec> {
        let mut consts = self.constants.clone();
        consts.entry("alpha".into()).or_insert(self.alpha);
        consts.entry("beta".into()).or_insert(self.beta);
        let source = Expr::parse(&self.source, &consts)?;
        let initial = Expr::parse(&self.initial, &consts)?;
        let left = Expr::parse(&self.boundary_left, &consts)?;
        let right = Expr::parse(&self.boundary_right, &consts)?;
        if !initial.is_time_free() {
            return Err(Error::Expression("initial data may not depend on t".into()));
        }
        if !left.is_space_free() || !right.is_space_free() {
            return Err(Error::Expression("boundary data may not depend on x".into()));
        }
        let exact = self
            .exact
            .as_deref()
            .map(|s| Expr::parse(s, &consts))
            .transpose()?;
        Ok(ProblemSpec {
            name: self.name.clone().unwrap_or_else(|| "user".into()),
            alpha: self.alpha,
            beta: self.beta,
            diff_a: self.diff_a,
            diff_b: self.diff_b,
            length: self.length,
            horizon: self.horizon,
            source: Arc::new(move |x, t| source.eval(x, t)),
            initial: Arc::new(move |x| initial.eval(x, 0.0)),
            boundary_left: Arc::new(move |t| left.eval(0.0, t)),
            boundary_right: Arc::new(move |t| right.eval(0.0, t)),
            exact: exact.map(|e| Arc::new(move |x, t| e.eval(x, t)) as SpaceTimeFn),
        })
    }
}
