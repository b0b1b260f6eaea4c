//! Dykstra's iteration specialised to half-spaces, the MAP baseline, and the
//! shared run loop that records a per-iteration [`Trace`].
//!
//! The auxiliary vector of half-space `i` is always a non-negative multiple of
//! its unit normal, so the state stores one scalar `k_i` per half-space
//! instead of a vector.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polyhedron, Vector};

/// Which case of the polyhedral update a visit took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `x + k·a` already satisfies the half-space; the correction is released.
    Inactive,
    /// `x + k·a` violates the half-space; `x` is projected and `k` grows.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dykstra,
    DykstraFf,
    Map,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Dykstra => "dykstra",
            Mode::DykstraFf => "dykstra-ff",
            Mode::Map => "map",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dykstra" => Ok(Mode::Dykstra),
            "dykstra-ff" | "dykstra_ff" | "ff" => Ok(Mode::DykstraFf),
            "map" => Ok(Mode::Map),
            other => Err(Error::InvalidOptions(format!("unknown mode `{other}`"))),
        }
    }
}

/// Solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Hard cap on executed iterations.
    pub max_iter: u64,
    /// Stall-detection tolerance, relative: the absolute threshold is
    /// `eps_stall · (1 + ‖x0‖)`.
    pub eps_stall: f64,
    pub tol_feas: f64,
    pub tol_conv: f64,
    pub mode: Mode,
    /// Optional `x⋆` used to fill `error_sq` in the trace.
    pub reference: Option<Vector>,
    /// Stop once the iterate is feasible and stationary over a full cycle.
    /// Disable to run exactly `max_iter` iterations.
    pub early_stop: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            eps_stall: 1e-10,
            tol_feas: 1e-9,
            tol_conv: 1e-12,
            mode: Mode::Dykstra,
            reference: None,
            early_stop: true,
        }
    }
}

impl RunOptions {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn reference(mut self, x_star: Vector) -> Self {
        self.reference = Some(x_star);
        self
    }

    pub fn max_iter(mut self, max_iter: u64) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self, poly: &Polyhedron) -> Result<()> {
        let positive = [
            ("eps_stall", self.eps_stall),
            ("tol_feas", self.tol_feas),
            ("tol_conv", self.tol_conv),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOptions(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter < poly.len() as u64 {
            return Err(Error::InvalidOptions(format!(
                "max_iter ({}) must be at least the number of half-spaces ({})",
                self.max_iter,
                poly.len()
            )));
        }
        if let Some(r) = &self.reference {
            poly.check_point(r)?;
        }
        Ok(())
    }

    /// Absolute stall tolerance for a given starting point.
    pub fn eps_stall_abs(&self, x0: &Vector) -> f64 {
        self.eps_stall * (1.0 + x0.norm())
    }
}

/// Iteration state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Schedule index: the number of plain iterations this state represents.
    /// Differs from `work` once stalled cycles have been skipped.
    pub(crate) m: u64,
    /// Iterations actually executed.
    pub(crate) work: u64,
    pub(crate) x: Vector,
    pub(crate) k: Vec<f64>,
    pub(crate) last_branch: Vec<Option<Branch>>,
    pub(crate) prev_branch: Vec<Option<Branch>>,
    /// `x_{m-2n+1}, …, x_m`, oldest first.
    pub(crate) window: VecDeque<Vector>,
    pub(crate) n: usize,
}

impl SolverState {
    pub fn new(x0: Vector, n: usize) -> Self {
        let mut window = VecDeque::with_capacity(2 * n + 1);
        window.push_back(x0.clone());
        Self {
            m: 0,
            work: 0,
            x: x0,
            k: vec![0.0; n],
            last_branch: vec![None; n],
            prev_branch: vec![None; n],
            window,
            n,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// Auxiliary scalars `k_i`, one per half-space.
    pub fn aux(&self) -> &[f64] {
        &self.k
    }

    /// Overwrites an auxiliary scalar. Intended for experiments and tests that
    /// perturb the state; the solver never needs it.
    pub fn set_aux(&mut self, slot: usize, k: f64) {
        self.k[slot] = k;
    }

    pub fn last_branch(&self, slot: usize) -> Option<Branch> {
        self.last_branch[slot]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Half-space visited by the next step.
    pub fn next_halfspace(&self) -> usize {
        (self.m % self.n as u64) as usize
    }

    pub fn window(&self) -> &VecDeque<Vector> {
        &self.window
    }

    /// `x_{m-back}` if it is still held in the window.
    pub fn iterate_back(&self, back: usize) -> Option<&Vector> {
        let len = self.window.len();
        (back < len).then(|| &self.window[len - 1 - back])
    }

    fn push_iterate(&mut self) {
        self.window.push_back(self.x.clone());
        while self.window.len() > 2 * self.n {
            self.window.pop_front();
        }
    }

    fn record_branch(&mut self, slot: usize, branch: Branch) {
        self.prev_branch[slot] = self.last_branch[slot];
        self.last_branch[slot] = Some(branch);
    }
}

/// Fast-forward event attached to the iteration at which it fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfEvent {
    pub n_stall: u64,
    pub i_stall: usize,
    /// Whole cycles removed from the schedule.
    pub skipped_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Executed-iteration index.
    pub m: u64,
    pub cycle: u64,
    pub halfspace: usize,
    pub branch: Branch,
    pub x_after: Vector,
    pub k_after: f64,
    pub stalled: bool,
    pub ff_event: Option<FfEvent>,
    pub error_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub mode: Mode,
    pub n: usize,
    pub x0: Vector,
    pub records: Vec<TraceRecord>,
    pub final_x: Vector,
    pub converged: bool,
    /// Schedule index reached, i.e. executed iterations plus skipped ones.
    pub schedule_iterations: u64,
}

impl Trace {
    pub fn iterations(&self) -> u64 {
        self.records.len() as u64
    }

    /// Number of fully executed cycles.
    pub fn completed_cycles(&self) -> u64 {
        self.iterations() / self.n as u64
    }

    pub fn ff_events(&self) -> impl Iterator<Item = (u64, FfEvent)> + '_ {
        self.records.iter().filter_map(|r| r.ff_event.map(|e| (r.m, e)))
    }

    pub fn skipped_cycles(&self) -> u64 {
        self.ff_events().map(|(_, e)| e.skipped_cycles).sum()
    }

    /// Index of every record in the plain (unskipped) schedule.
    pub fn schedule_indices(&self) -> Vec<u64> {
        let mut offset = 0;
        self.records
            .iter()
            .map(|r| {
                let idx = r.m + offset;
                if let Some(ev) = r.ff_event {
                    offset += ev.skipped_cycles * self.n as u64;
                }
                idx
            })
            .collect()
    }

    /// Iterate sequence `x_0, x_1, …` of executed iterations.
    pub fn iterates(&self) -> impl Iterator<Item = &Vector> + '_ {
        std::iter::once(&self.x0).chain(self.records.iter().map(|r| &r.x_after))
    }

    /// First executed iteration after which `‖x − reference‖ ≤ tol`, if any.
    pub fn first_within(&self, reference: &Vector, tol: f64) -> Option<u64> {
        self.records
            .iter()
            .position(|r| (&r.x_after - reference).norm() <= tol)
            .map(|p| p as u64 + 1)
    }
}

/// Squared Euclidean distance `‖x − x⋆‖²`.
pub fn error_metric(x: &Vector, x_star: &Vector) -> Result<f64> {
    if x.len() != x_star.len() {
        return Err(Error::DimensionMismatch {
            expected: x_star.len(),
            found: x.len(),
        });
    }
    Ok((x - x_star).norm_squared())
}

/// Result of one update, before it is wrapped into a [`TraceRecord`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub halfspace: usize,
    pub branch: Branch,
    pub k_after: f64,
}

/// One Dykstra update on half-space `[m]`.
pub fn dykstra_step(state: &mut SolverState, poly: &Polyhedron) -> Result<StepOutcome> {
    let i = state.next_halfspace();
    let h = poly.get(i);
    let k_prev = state.k[i];
    let r = h.residual(&state.x);
    // Unit normal: aᵀ(x + k·a) − b = r + k. Testing the scalar keeps the branch
    // and the sign of the stored k consistent to the last bit.
    let (branch, k_new) = if r + k_prev <= 0.0 {
        state.x += h.normal() * k_prev;
        (Branch::Inactive, 0.0)
    } else {
        state.x -= h.normal() * r;
        (Branch::Projected, k_prev + r)
    };
    finish_step(state, i, branch, k_new)
}

/// One MAP update: plain projection onto half-space `[m]`, no auxiliaries.
pub fn map_step(state: &mut SolverState, poly: &Polyhedron) -> Result<StepOutcome> {
    let i = state.next_halfspace();
    let h = poly.get(i);
    let r = h.residual(&state.x);
    let branch = if r <= 0.0 {
        Branch::Inactive
    } else {
        state.x -= h.normal() * r;
        Branch::Projected
    };
    finish_step(state, i, branch, 0.0)
}

fn finish_step(state: &mut SolverState, i: usize, branch: Branch, k_new: f64) -> Result<StepOutcome> {
    if !state.x.iter().all(|v| v.is_finite()) || !k_new.is_finite() {
        return Err(Error::NumericalFailure { iteration: state.work });
    }
    state.k[i] = k_new;
    state.record_branch(i, branch);
    state.m += 1;
    state.work += 1;
    state.push_iterate();
    Ok(StepOutcome {
        halfspace: i,
        branch,
        k_after: k_new,
    })
}

/// Feasible and stationary over the last full cycle: every iterate of the
/// cycle is within `tol_conv` of the current one.
pub(crate) fn has_converged(state: &SolverState, poly: &Polyhedron, opts: &RunOptions) -> bool {
    let n = state.n;
    if state.window.len() < n + 1 {
        return false;
    }
    if poly.max_violation(&state.x) > opts.tol_feas {
        return false;
    }
    (1..=n).all(|j| {
        state
            .iterate_back(j)
            .is_some_and(|prev| (&state.x - prev).norm() <= opts.tol_conv)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StepKind {
    Dykstra,
    Map,
}

/// Shared run loop. `after_step` may modify the state (the fast-forward hook)
/// and the record; it runs after the record is built and before the
/// convergence check.
pub(crate) fn drive<F>(poly: &Polyhedron, x0: &Vector, opts: &RunOptions, kind: StepKind, mut after_step: F) -> Result<Trace>
where
    F: FnMut(&mut SolverState, &mut TraceRecord) -> Result<()>,
{
    opts.validate(poly)?;
    poly.check_point(x0)?;
    let n = poly.len();
    let mut state = SolverState::new(x0.clone(), n);
    let mut records = Vec::with_capacity(opts.max_iter.min(1 << 16) as usize);
    let mut converged = false;

    while state.work < opts.max_iter {
        let executed = state.work;
        let out = match kind {
            StepKind::Dykstra => dykstra_step(&mut state, poly)?,
            StepKind::Map => map_step(&mut state, poly)?,
        };
        let error_sq = opts.reference.as_ref().map(|r| (&state.x - r).norm_squared());
        let mut record = TraceRecord {
            m: executed,
            cycle: executed / n as u64,
            halfspace: out.halfspace,
            branch: out.branch,
            x_after: state.x.clone(),
            k_after: out.k_after,
            stalled: false,
            ff_event: None,
            error_sq,
        };
        after_step(&mut state, &mut record)?;
        records.push(record);
        if opts.early_stop && has_converged(&state, poly, opts) {
            converged = true;
            break;
        }
    }

    Ok(Trace {
        mode: opts.mode,
        n,
        x0: x0.clone(),
        final_x: state.x.clone(),
        records,
        converged,
        schedule_iterations: state.m,
    })
}

/// Plain Dykstra. Stall detection only annotates the trace; nothing is skipped.
pub fn run(poly: &Polyhedron, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
    let eps = opts.eps_stall_abs(x0);
    let mut trace = drive(poly, x0, opts, StepKind::Dykstra, |state, rec| {
        rec.stalled = crate::stall::detect_stall(state, eps);
        Ok(())
    })?;
    trace.mode = Mode::Dykstra;
    Ok(trace)
}

/// Method of alternating projections (Dykstra with all auxiliaries pinned to zero).
pub fn run_map(poly: &Polyhedron, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
    let mut trace = drive(poly, x0, opts, StepKind::Map, |_, _| Ok(()))?;
    trace.mode = Mode::Map;
    Ok(trace)
}

/// Dispatches on `opts.mode`.
pub fn solve(poly: &Polyhedron, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
    match opts.mode {
        Mode::Dykstra => run(poly, x0, opts),
        Mode::DykstraFf => crate::stall::run_ff(poly, x0, opts),
        Mode::Map => run_map(poly, x0, opts),
    }
}
