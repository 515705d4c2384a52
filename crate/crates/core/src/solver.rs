//! Compact Crank-Nicolson time stepping with a full-memory fractional sum.
//!
//! Every step solves
//!
//! ```text
//! (A - g0 B) U^{k+1} = (A + g1 B) U^k + Σ_{ℓ=2}^{k+1} g_ℓ B U^{k+1-ℓ} + τ A F^k + boundary terms
//! ```
//!
//! with `(A, B)` replaced by `(Ã, B̃)` for the eighth-order scheme. Stencil
//! entries that fall outside `[0, L]` read ghost values. By default these come
//! from polynomial extrapolation of the boundary value and the first interior
//! nodes; at the new level the extrapolation is substituted into the matrix,
//! so the boundary rows are wider than the interior Toeplitz rows, and at
//! stored levels it is evaluated explicitly. Problems with a closed-form
//! solution may instead take ghost values from it ([`GhostPolicy::Exact`]).

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::banded::{BandedLu, BandedMatrix};
use crate::error::{Error, Result};
use crate::fracweights::{combined_weights, CombinedWeights};
use crate::operators::{CompactPair, CompactStencil};
use crate::problem::{validate, ProblemSpec, SpaceTimeFn};

/// Smallest number of intervals accepted by the solver.
pub const MIN_INTERVALS: usize = 12;

/// Uniform half-bandwidth of the stored system matrix.
pub const STORED_BANDWIDTH: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// `O(τ² + h⁶)`, stencils `(A, B)`, one ghost per side.
    Compact6,
    /// `O(τ² + h⁸)`, stencils `(Ã, B̃)`, two ghosts per side.
    Compact8,
}

impl SchemeKind {
    pub fn pair(self) -> CompactPair {
        match self {
            SchemeKind::Compact6 => CompactPair::Sixth,
            SchemeKind::Compact8 => CompactPair::Eighth,
        }
    }

    pub fn stencils(self) -> (CompactStencil, CompactStencil) {
        self.pair().stencils()
    }

    /// Ghost nodes needed on each side.
    pub fn ghosts(self) -> usize {
        match self {
            SchemeKind::Compact6 => 1,
            SchemeKind::Compact8 => 2,
        }
    }

    /// Grid nodes (boundary included) used by the ghost extrapolation.
    pub fn extrapolation_nodes(self) -> usize {
        match self {
            SchemeKind::Compact6 => 6,
            SchemeKind::Compact8 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Compact6 => "compact6",
            SchemeKind::Compact8 => "compact8",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compact6" => Ok(SchemeKind::Compact6),
            "compact8" => Ok(SchemeKind::Compact8),
            _ => Err(Error::arg("scheme", format!("expected compact6 or compact8, got `{s}`"))),
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Lagrange weights extrapolating nodes `0..nodes` to the point `-distance`.
pub fn ghost_coefficients(nodes: usize, distance: usize) -> Vec<f64> {
    let target = -(distance as i128);
    (0..nodes as i128)
        .map(|m| {
            let (mut num, mut den) = (1i128, 1i128);
            for i in 0..nodes as i128 {
                if i != m {
                    num *= target - i;
                    den *= m - i;
                }
            }
            (num / den) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Ghost values beyond one end of a grid level, nearest ghost first.
pub fn ghost_extrapolate(level: &[f64], side: Side, scheme: SchemeKind) -> Result<Vec<f64>> {
    let nodes = scheme.extrapolation_nodes();
    if level.len() < 8 {
        return Err(Error::TooShort {
            needed: 8,
            got: level.len(),
        });
    }
    let last = level.len() - 1;
    Ok((1..=scheme.ghosts())
        .map(|d| {
            ghost_coefficients(nodes, d)
                .iter()
                .enumerate()
                .map(|(node, c)| {
                    let idx = match side {
                        Side::Left => node,
                        Side::Right => last - node,
                    };
                    c * level[idx]
                })
                .sum()
        })
        .collect())
}

/// How stencil entries outside `[0, L]` are supplied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GhostPolicy {
    /// Polynomial extrapolation from the boundary value and the first interior
    /// nodes, eliminated implicitly at the new level.
    #[default]
    Extrapolate,
    /// Values of the problem's exact solution at the ghost abscissae, treated
    /// as known data. Only available for problems with a closed-form solution.
    Exact,
    /// Zero extension: ghost values and the source at ghost abscissae are
    /// taken as 0. Consistent only when the solution and source vanish to
    /// high order at both ends.
    Zero,
}

impl GhostPolicy {
    pub fn name(self) -> &'static str {
        match self {
            GhostPolicy::Extrapolate => "extrapolate",
            GhostPolicy::Exact => "exact",
            GhostPolicy::Zero => "zero",
        }
    }
}

impl std::str::FromStr for GhostPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extrapolate" => Ok(GhostPolicy::Extrapolate),
            "exact" => Ok(GhostPolicy::Exact),
            "zero" => Ok(GhostPolicy::Zero),
            _ => Err(Error::arg(
                "ghosts",
                format!("expected extrapolate, exact or zero, got `{s}`"),
            )),
        }
    }
}

impl std::fmt::Display for GhostPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One stencil row on grid nodes `0..=m`, plus the ghost entries left over
/// (as `(grid index, coefficient)`) when ghosts are not eliminated.
type ExpandedRow = (Vec<(usize, f64)>, Vec<(isize, f64)>);

fn expand_row(
    scheme: SchemeKind,
    ghosts: GhostPolicy,
    m: usize,
    j: usize,
    stencil: &CompactStencil,
) -> ExpandedRow {
    let nodes = scheme.extrapolation_nodes();
    let mut out: Vec<(usize, f64)> = Vec::new();
    let mut outside = Vec::new();
    let mut push = |col: usize, c: f64| match out.iter_mut().find(|(k, _)| *k == col) {
        Some((_, v)) => *v += c,
        None => out.push((col, c)),
    };
    for (s, c) in stencil.offsets() {
        let i = j as isize + s;
        if i >= 0 && i as usize <= m {
            push(i as usize, c);
            continue;
        }
        if ghosts != GhostPolicy::Extrapolate {
            outside.push((i, c));
            continue;
        }
        let (d, left) = if i < 0 { ((-i) as usize, true) } else { (i as usize - m, false) };
        for (node, w) in ghost_coefficients(nodes, d).into_iter().enumerate() {
            push(if left { node } else { m - node }, c * w);
        }
    }
    out.sort_by_key(|&(k, _)| k);
    (out, outside)
}

/// The factored, time-independent left-hand side.
#[derive(Debug, Clone)]
pub struct BandedSystem {
    /// `M - 1` interior unknowns.
    pub dimension: usize,
    /// Widest actual row reach after ghost elimination.
    pub half_bandwidth_effective: usize,
    pub matrix: BandedMatrix,
    pub factorization: BandedLu,
    /// Coefficient of `u_0^{k+1}` in each row (moved to the right-hand side).
    pub left_coupling: Vec<f64>,
    /// Coefficient of `u_M^{k+1}` in each row.
    pub right_coupling: Vec<f64>,
}

/// Builds and factors `A - g0 B` (or `Ã - g0 B̃`) for `m` intervals with extrapolated ghosts.
pub fn assemble_lhs(scheme: SchemeKind, m: usize, g0: f64) -> Result<BandedSystem> {
    assemble_lhs_with(scheme, GhostPolicy::Extrapolate, m, g0)
}

/// As [`assemble_lhs`] with an explicit ghost policy.
pub fn assemble_lhs_with(scheme: SchemeKind, ghosts: GhostPolicy, m: usize, g0: f64) -> Result<BandedSystem> {
    if m < MIN_INTERVALS {
        return Err(Error::GridTooCoarse {
            m,
            min: MIN_INTERVALS,
        });
    }
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::arg("g0", format!("must be positive, got {g0}")));
    }
    let (a, b) = scheme.stencils();
    let n = m - 1;
    let mut matrix = BandedMatrix::zeros(n, STORED_BANDWIDTH, STORED_BANDWIDTH);
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    let mut reach = 0usize;
    for j in 1..m {
        let row = j - 1;
        let mut entries = expand_row(scheme, ghosts, m, j, &a).0;
        for (col, c) in expand_row(scheme, ghosts, m, j, &b).0 {
            match entries.iter_mut().find(|(k, _)| *k == col) {
                Some((_, v)) => *v -= g0 * c,
                None => entries.push((col, -g0 * c)),
            }
        }
        for (col, c) in entries {
            if col == 0 {
                left[row] += c;
            } else if col == m {
                right[row] += c;
            } else {
                reach = reach.max(col.abs_diff(j));
                matrix.add(row, col - 1, c);
            }
        }
    }
    let factorization = matrix.clone().factor()?;
    Ok(BandedSystem {
        dimension: n,
        half_bandwidth_effective: reach,
        matrix,
        factorization,
        left_coupling: left,
        right_coupling: right,
    })
}

/// All computed time levels, boundary values included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHistory {
    pub scheme: SchemeKind,
    pub ghosts: GhostPolicy,
    pub tau: f64,
    pub h: f64,
    /// Number of spatial intervals `M`; each level holds `M + 1` values.
    pub intervals: usize,
    pub levels: Vec<Vec<f64>>,
    pub wall_seconds: f64,
}

impl SolutionHistory {
    /// Index of the newest level.
    pub fn k(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// Long-format CSV with header `x,t,value`.
    pub fn write_long_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,t,value")?;
        for (k, level) in self.levels.iter().enumerate() {
            let t = self.t(k);
            for (j, v) in level.iter().enumerate() {
                writeln!(w, "{},{},{}", self.x(j), t, v)?;
            }
        }
        Ok(())
    }

    /// One level as CSV with header `x,value`.
    pub fn write_level_csv<W: Write>(&self, k: usize, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,value")?;
        for (j, v) in self.levels[k].iter().enumerate() {
            writeln!(w, "{},{}", self.x(j), v)?;
        }
        Ok(())
    }
}

/// Per-row stencil expansions shared by every step.
#[derive(Clone)]
struct RowOperators {
    a_rows: Vec<Vec<(usize, f64)>>,
    b_rows: Vec<Vec<(usize, f64)>>,
    /// Per row: `(ghost abscissa, A coefficient, B coefficient)` for exact ghosts.
    ghost_terms: Vec<Vec<(f64, f64, f64)>>,
    ghost_values: Option<SpaceTimeFn>,
    /// Whether the source is sampled at ghost abscissae (false for zero extension).
    source_outside: bool,
    a_raw: CompactStencil,
}

impl std::fmt::Debug for RowOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RowOperators")
            .field("rows", &self.a_rows.len())
            .field("exact_ghosts", &self.ghost_values.is_some())
            .finish()
    }
}

impl RowOperators {
    fn new(scheme: SchemeKind, ghosts: GhostPolicy, spec: &ProblemSpec, m: usize, h: f64) -> Result<Self> {
        let ghost_values = match ghosts {
            GhostPolicy::Extrapolate => None,
            GhostPolicy::Exact => Some(spec.exact.clone().ok_or(Error::MissingExact)?),
            GhostPolicy::Zero => None,
        };
        let (a, b) = scheme.stencils();
        let mut a_rows = Vec::with_capacity(m - 1);
        let mut b_rows = Vec::with_capacity(m - 1);
        let mut ghost_terms = Vec::with_capacity(m - 1);
        for j in 1..m {
            let (ra, ga) = expand_row(scheme, ghosts, m, j, &a);
            let (rb, gb) = expand_row(scheme, ghosts, m, j, &b);
            a_rows.push(ra);
            b_rows.push(rb);
            ghost_terms.push(
                ga.iter()
                    .zip(&gb)
                    .map(|(&(i, ca), &(_, cb))| (i as f64 * h, ca, cb))
                    .collect(),
            );
        }
        Ok(Self {
            a_rows,
            b_rows,
            ghost_terms,
            ghost_values,
            source_outside: ghosts != GhostPolicy::Zero,
            a_raw: a,
        })
    }

    fn apply(rows: &[Vec<(usize, f64)>], level: &[f64]) -> Vec<f64> {
        rows.iter()
            .map(|row| row.iter().map(|&(i, c)| c * level[i]).sum())
            .collect()
    }

    /// `B·U` on the interior rows, exact ghost values at time `t` included.
    fn b_level(&self, level: &[f64], t: f64) -> Vec<f64> {
        let mut out = Self::apply(&self.b_rows, level);
        if let Some(g) = &self.ghost_values {
            for (v, terms) in out.iter_mut().zip(&self.ghost_terms) {
                for &(x, _, cb) in terms {
                    *v += cb * g(x, t);
                }
            }
        }
        out
    }

    fn a_level(&self, level: &[f64], t: f64) -> Vec<f64> {
        let mut out = Self::apply(&self.a_rows, level);
        if let Some(g) = &self.ghost_values {
            for (v, terms) in out.iter_mut().zip(&self.ghost_terms) {
                for &(x, ca, _) in terms {
                    *v += ca * g(x, t);
                }
            }
        }
        out
    }
}

/// Right-hand side from precomputed pieces. `b_levels[i]` is `B·U^i` on the interior rows.
#[allow(clippy::too_many_arguments)]
fn rhs_from_parts(
    ops: &RowOperators,
    system: &BandedSystem,
    b_levels: &[Vec<f64>],
    current: &[f64],
    weights: &CombinedWeights,
    spec: &ProblemSpec,
    tau: f64,
    h: f64,
    k: usize,
) -> Vec<f64> {
    let n = ops.a_rows.len();
    let t_half = (k as f64 + 0.5) * tau;
    let t_new = (k + 1) as f64 * tau;
    let mut rhs = ops.a_level(current, k as f64 * tau);
    for ell in 1..=k + 1 {
        let g = weights.values[ell];
        for (r, bu) in rhs.iter_mut().zip(&b_levels[k + 1 - ell]) {
            *r += g * bu;
        }
    }
    let r = ops.a_raw.half_bandwidth as isize;
    // f on the whole stencil footprint, ghost abscissae included.
    let last = n as isize + 1;
    let f_vals: Vec<f64> = (-r..=last + r)
        .map(|i| {
            if ops.source_outside || (0..=last).contains(&i) {
                (spec.source)(i as f64 * h, t_half)
            } else {
                0.0
            }
        })
        .collect();
    let phi_left = (spec.boundary_left)(t_new);
    let phi_right = (spec.boundary_right)(t_new);
    let g0 = weights.g0();
    for (row, value) in rhs.iter_mut().enumerate() {
        let j = row as isize + 1;
        let mut af = 0.0;
        for (s, c) in ops.a_raw.offsets() {
            af += c * f_vals[(j + s + r) as usize];
        }
        *value += tau * af;
        *value -= system.left_coupling[row] * phi_left + system.right_coupling[row] * phi_right;
        if let Some(g) = &ops.ghost_values {
            for &(x, ca, cb) in &ops.ghost_terms[row] {
                *value -= (ca - g0 * cb) * g(x, t_new);
            }
        }
    }
    rhs
}

/// Assembles the right-hand side for the step `k -> k + 1` directly from a history.
pub fn assemble_rhs(
    scheme: SchemeKind,
    history: &SolutionHistory,
    weights: &CombinedWeights,
    spec: &ProblemSpec,
    k: usize,
) -> Result<Vec<f64>> {
    if weights.len() < k + 2 {
        return Err(Error::WeightsTooShort {
            needed: k + 2,
            got: weights.len(),
        });
    }
    if history.levels.len() < k + 1 {
        return Err(Error::TooShort {
            needed: k + 1,
            got: history.levels.len(),
        });
    }
    let m = history.intervals;
    let system = assemble_lhs_with(scheme, history.ghosts, m, weights.g0())?;
    let ops = RowOperators::new(scheme, history.ghosts, spec, m, history.h)?;
    let b_levels: Vec<Vec<f64>> = history.levels[..=k]
        .iter()
        .enumerate()
        .map(|(i, l)| ops.b_level(l, history.t(i)))
        .collect();
    Ok(rhs_from_parts(
        &ops,
        &system,
        &b_levels,
        &history.levels[k],
        weights,
        spec,
        history.tau,
        history.h,
        k,
    ))
}

/// Time stepper holding the factored system and the memory cache.
#[derive(Debug)]
pub struct Solver {
    spec: ProblemSpec,
    scheme: SchemeKind,
    steps: usize,
    weights: CombinedWeights,
    system: BandedSystem,
    ops: RowOperators,
    b_levels: Vec<Vec<f64>>,
    history: SolutionHistory,
}

impl Solver {
    /// Validates the problem, samples the initial level and factors the system.
    pub fn new(spec: ProblemSpec, scheme: SchemeKind, m: usize, n: usize) -> Result<Self> {
        Self::with_ghosts(spec, scheme, GhostPolicy::Extrapolate, m, n)
    }

    pub fn with_ghosts(spec: ProblemSpec, scheme: SchemeKind, ghosts: GhostPolicy, m: usize, n: usize) -> Result<Self> {
        let spec = validate(spec)?;
        if m < MIN_INTERVALS {
            return Err(Error::GridTooCoarse {
                m,
                min: MIN_INTERVALS,
            });
        }
        if n == 0 {
            return Err(Error::arg("N", "at least one time step is required"));
        }
        let h = spec.length / m as f64;
        let tau = spec.horizon / n as f64;
        let weights = combined_weights(spec.alpha, spec.beta, spec.diff_a, spec.diff_b, tau, h, n + 1)?;
        let system = assemble_lhs_with(scheme, ghosts, m, weights.g0())?;
        let ops = RowOperators::new(scheme, ghosts, &spec, m, h)?;
        let initial = initial_level(&spec, m, h);
        let b0 = ops.b_level(&initial, 0.0);
        Ok(Self {
            history: SolutionHistory {
                scheme,
                ghosts,
                tau,
                h,
                intervals: m,
                levels: vec![initial],
                wall_seconds: 0.0,
            },
            spec,
            scheme,
            steps: n,
            weights,
            system,
            ops,
            b_levels: vec![b0],
        })
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn weights(&self) -> &CombinedWeights {
        &self.weights
    }

    pub fn system(&self) -> &BandedSystem {
        &self.system
    }

    pub fn history(&self) -> &SolutionHistory {
        &self.history
    }

    pub fn is_finished(&self) -> bool {
        self.history.k() >= self.steps
    }

    /// Right-hand side of the next step, from the cached memory terms.
    pub fn next_rhs(&self) -> Result<Vec<f64>> {
        let k = self.history.k();
        if self.weights.len() < k + 2 {
            return Err(Error::WeightsTooShort {
                needed: k + 2,
                got: self.weights.len(),
            });
        }
        Ok(rhs_from_parts(
            &self.ops,
            &self.system,
            &self.b_levels,
            &self.history.levels[k],
            &self.weights,
            &self.spec,
            self.history.tau,
            self.history.h,
            k,
        ))
    }

    /// Advances one level.
    pub fn step(&mut self) -> Result<()> {
        let k = self.history.k();
        let mut rhs = self.next_rhs()?;
        self.system.factorization.solve_in_place(&mut rhs);
        let t_new = (k + 1) as f64 * self.history.tau;
        let mut level = Vec::with_capacity(rhs.len() + 2);
        level.push((self.spec.boundary_left)(t_new));
        // Adding +0.0 clears signed zeros left by negative pivots.
        level.extend(rhs.iter().map(|v| v + 0.0));
        level.push((self.spec.boundary_right)(t_new));
        self.b_levels.push(self.ops.b_level(&level, t_new));
        self.history.levels.push(level);
        Ok(())
    }

    /// Runs the remaining steps and returns the history.
    pub fn run(mut self) -> Result<SolutionHistory> {
        let start = Instant::now();
        while !self.is_finished() {
            self.step()?;
        }
        self.history.wall_seconds += start.elapsed().as_secs_f64();
        Ok(self.history)
    }
}

fn initial_level(spec: &ProblemSpec, m: usize, h: f64) -> Vec<f64> {
    let mut level: Vec<f64> = (0..=m).map(|j| (spec.initial)(j as f64 * h)).collect();
    level[0] = (spec.boundary_left)(0.0);
    level[m] = (spec.boundary_right)(0.0);
    level
}

/// Solves with `m` spatial intervals and `n` time steps; `n = 0` returns the initial level.
pub fn solve(spec: &ProblemSpec, scheme: SchemeKind, m: usize, n: usize) -> Result<SolutionHistory> {
    solve_with_ghosts(spec, scheme, GhostPolicy::Extrapolate, m, n)
}

/// As [`solve`] with an explicit ghost policy.
pub fn solve_with_ghosts(
    spec: &ProblemSpec,
    scheme: SchemeKind,
    ghosts: GhostPolicy,
    m: usize,
    n: usize,
) -> Result<SolutionHistory> {
    let start = Instant::now();
    if n == 0 {
        let spec = validate(spec.clone())?;
        if m < MIN_INTERVALS {
            return Err(Error::GridTooCoarse {
                m,
                min: MIN_INTERVALS,
            });
        }
        if ghosts == GhostPolicy::Exact && spec.exact.is_none() {
            return Err(Error::MissingExact);
        }
        let h = spec.length / m as f64;
        return Ok(SolutionHistory {
            scheme,
            ghosts,
            tau: 0.0,
            h,
            intervals: m,
            levels: vec![initial_level(&spec, m, h)],
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    let mut history = Solver::with_ghosts(spec.clone(), scheme, ghosts, m, n)?.run()?;
    history.wall_seconds = start.elapsed().as_secs_f64();
    Ok(history)
}

/// JSON sidecar describing a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub problem: String,
    pub scheme: SchemeKind,
    pub ghosts: GhostPolicy,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub h: f64,
    pub intervals: usize,
    pub steps: usize,
    pub e_inf: Option<f64>,
    pub wall_seconds: f64,
}
