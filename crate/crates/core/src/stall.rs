//! Stall detection, closed-form stall length, and the fast-forward jump.
//!
//! During a stall the primal iterate repeats every cycle and each active
//! half-space `i` only changes its auxiliary scalar, by the constant residual
//! `r_i = a_iᵀx − b_i` of the (fixed) iterate it sees. A half-space with
//! `r_i < 0` leaves the active set at the first visit `N_i` with
//! `k_i + N_i·r_i ≤ 0`, which ends the stall. The earliest such exit is known
//! as soon as the stall is detected, so every cycle before it can be applied
//! in one update of the auxiliaries.
//!
//! The jump always removes whole cycles. When `k_i + N_i·r_i` is exactly zero
//! the exiting visit leaves the iterate where it is and the iterate sequence
//! only departs from the stall one cycle later, so `N_stall` cycles are
//! skipped; otherwise the exiting visit moves the iterate and `N_stall − 1`
//! cycles are skipped. In both cases the following iterates are the ones
//! plain Dykstra produces.

use log::debug;

use crate::dykstra::{drive, Branch, FfEvent, Mode, RunOptions, SolverState, StepKind, Trace};
use crate::error::{Error, Result};
use crate::geometry::{Polyhedron, Vector};

/// Relative tolerance deciding that `k + N·r` sits on the boundary.
pub const BOUNDARY_REL_TOL: f64 = 1e-12;

/// Absolute boundary tolerance for a half-space whose stalled iterate is
/// `x` and whose auxiliary scalar is `k`.
pub fn boundary_tol(x: &Vector, k: f64) -> f64 {
    BOUNDARY_REL_TOL * (1.0 + x.norm() + k.abs())
}

/// Stall-length data for one detected stall.
#[derive(Debug, Clone, PartialEq)]
pub struct StallInfo {
    /// Schedule index at detection.
    pub detected_at: u64,
    /// Candidate half-spaces `S` (active, strictly interior iterate), ascending.
    pub candidates: Vec<usize>,
    /// `(index, N_i)` for each candidate.
    pub per_candidate: Vec<(usize, u64)>,
    pub n_stall: u64,
    pub i_stall: usize,
    /// Whole cycles the stall can be skipped by (`n_stall` or `n_stall − 1`).
    pub skip_cycles: u64,
    /// Per-cycle increment of `k` for every active half-space, `None` for
    /// inactive ones.
    pub increments: Vec<Option<f64>>,
    /// Candidates whose `k` reaches exactly zero at the exiting visit.
    pub exact_exit: Vec<usize>,
}

/// Which auxiliary update the fast-forward applies. `OffByOne` exists to
/// check that the verification suites catch a mis-indexed jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SkipRule {
    #[default]
    Exact,
    OffByOne,
}

/// True when the last `n` iterates each repeat the iterate one cycle earlier
/// to within `eps`. Needs a full window of `2n` iterates.
pub fn detect_stall(state: &SolverState, eps: f64) -> bool {
    let n = state.n();
    let win = state.window();
    if state.m() < n as u64 || win.len() < 2 * n {
        return false;
    }
    let len = win.len();
    (0..n).all(|l| (&win[len - 1 - l] - &win[len - 1 - l - n]).norm() < eps)
}

/// Schedule index of the most recent visit to `slot`, and how far back its
/// pre-visit iterate sits in the window.
fn last_visit(state: &SolverState, slot: usize) -> (u64, usize) {
    let n = state.n() as u64;
    let last = state.m() - 1;
    let j = last - (last + n - slot as u64) % n;
    (j, (state.m() - j) as usize)
}

/// Pre-visit iterate and branch of every half-space's last visit.
pub(crate) fn stalled_view(state: &SolverState) -> Result<Vec<(Vector, Branch)>> {
    let n = state.n();
    if state.m() < n as u64 || state.window().len() < n + 1 {
        return Err(Error::InconsistentStall("window not yet full"));
    }
    (0..n)
        .map(|slot| {
            let (_, back) = last_visit(state, slot);
            let x = state.iterate_back(back).ok_or(Error::InconsistentStall("window not yet full"))?;
            let branch = state.last_branch(slot).ok_or(Error::InconsistentStall("unvisited half-space"))?;
            Ok((x.clone(), branch))
        })
        .collect()
}

/// Computes `N_stall` and `i_stall` for a state at which a stall was detected.
pub fn compute_stall_length(state: &SolverState, poly: &Polyhedron) -> Result<StallInfo> {
    let n = state.n();
    let view = stalled_view(state)?;
    if (0..n).any(|s| state.prev_branch[s] != state.last_branch[s]) {
        return Err(Error::InconsistentStall("a half-space changed branch within the last cycle"));
    }

    let mut increments = vec![None; n];
    let mut per_candidate = Vec::new();
    let mut exact_exit = Vec::new();
    // (n_i, exit step, departure step, index)
    let mut exits: Vec<(u64, u64, u64, usize)> = Vec::new();

    for (slot, (x, branch)) in view.iter().enumerate() {
        if *branch != Branch::Projected {
            continue;
        }
        let h = poly.get(slot);
        let r = h.residual(x);
        let k = state.aux()[slot];
        increments[slot] = Some(r);
        let tol = boundary_tol(x, k);
        if !(r < -4.0 * tol) || !(k > 0.0) {
            continue;
        }
        let q = k / -r;
        let nearest = q.round().max(1.0);
        let (n_i, exact) = if (k + nearest * r).abs() <= tol {
            (nearest, true)
        } else {
            (q.ceil().max(1.0), false)
        };
        if !n_i.is_finite() || n_i >= u64::MAX as f64 {
            return Err(Error::InconsistentStall("stall length overflows"));
        }
        let n_i = n_i as u64;
        let (j, _) = last_visit(state, slot);
        let exit = j + n_i * n as u64;
        let departure = if exact { exit + n as u64 } else { exit };
        per_candidate.push((slot, n_i));
        if exact {
            exact_exit.push(slot);
        }
        exits.push((n_i, exit, departure, slot));
    }

    let &(n_stall, _, _, i_stall) = exits
        .iter()
        .min_by_key(|&&(n_i, exit, _, _)| (n_i, exit))
        .ok_or(Error::InconsistentStall("no half-space can leave the active set"))?;
    let departure = exits.iter().map(|e| e.2).min().unwrap_or(state.m());
    let skip_cycles = departure.saturating_sub(state.m()) / n as u64;

    Ok(StallInfo {
        detected_at: state.m(),
        candidates: per_candidate.iter().map(|&(s, _)| s).collect(),
        per_candidate,
        n_stall,
        i_stall,
        skip_cycles,
        increments,
        exact_exit,
    })
}

/// Largest change of an iterate over one cycle within the last cycle.
pub fn stall_drift(state: &SolverState) -> f64 {
    let n = state.n();
    let win = state.window();
    if win.len() < 2 * n {
        return f64::INFINITY;
    }
    let len = win.len();
    (0..n).map(|l| (&win[len - 1 - l] - &win[len - 1 - l - n]).norm()).fold(0.0, f64::max)
}

/// [`compute_stall_length`] plus a drift check: a stall is only accepted if
/// the observed per-cycle drift, carried over the skipped cycles, stays below
/// `eps`. Slowly converging iterates repeat to within `eps` without stalling;
/// their predicted lengths are huge and fail this check.
pub fn checked_stall_length(state: &SolverState, poly: &Polyhedron, eps: f64) -> Result<StallInfo> {
    let info = compute_stall_length(state, poly)?;
    if stall_drift(state) * info.skip_cycles as f64 > eps {
        return Err(Error::InconsistentStall("iterate drifts too much for the predicted stall length"));
    }
    Ok(info)
}

/// Applies `info.skip_cycles` stalled cycles to the auxiliaries in one update
/// and advances the schedule index. The iterate is left untouched.
pub fn fast_forward(state: &mut SolverState, info: &StallInfo, poly: &Polyhedron) -> Result<()> {
    fast_forward_with(state, info, poly, SkipRule::Exact)
}

pub fn fast_forward_with(state: &mut SolverState, info: &StallInfo, poly: &Polyhedron, rule: SkipRule) -> Result<()> {
    if info.detected_at != state.m() || info.increments.len() != state.n() || poly.len() != state.n() {
        return Err(Error::InconsistentStall("stall info does not belong to this state"));
    }
    match rule {
        SkipRule::Exact => apply_exact(state, info),
        SkipRule::OffByOne => {
            apply_off_by_one(state, info);
            Ok(())
        }
    }
}

fn apply_exact(state: &mut SolverState, info: &StallInfo) -> Result<()> {
    let cycles = info.skip_cycles;
    if cycles == 0 {
        return Ok(());
    }
    let view = stalled_view(state)?;
    let mut next_k = state.k.clone();
    let mut exited = Vec::new();
    for (slot, inc) in info.increments.iter().enumerate() {
        let Some(r) = *inc else { continue };
        let k = state.k[slot] + cycles as f64 * r;
        let n_i = info.per_candidate.iter().find(|c| c.0 == slot).map(|c| c.1);
        if info.exact_exit.contains(&slot) && n_i.is_some_and(|n_i| cycles >= n_i) {
            // The exiting visit lies inside the skipped cycles and released k.
            if k.abs() > boundary_tol(&view[slot].0, state.k[slot]) {
                return Err(Error::FastForwardConsistency { slot, k });
            }
            next_k[slot] = 0.0;
            exited.push(slot);
        } else if k > 0.0 {
            next_k[slot] = k;
        } else {
            return Err(Error::FastForwardConsistency { slot, k });
        }
    }
    state.k = next_k;
    for slot in exited {
        state.prev_branch[slot] = Some(Branch::Projected);
        state.last_branch[slot] = Some(Branch::Inactive);
    }
    state.m += cycles * state.n() as u64;
    Ok(())
}

/// Mutation: one cycle too few on every auxiliary, with the schedule
/// advanced as if the jump were exact.
fn apply_off_by_one(state: &mut SolverState, info: &StallInfo) {
    let cycles = info.skip_cycles.saturating_sub(1);
    for (slot, inc) in info.increments.iter().enumerate() {
        if let Some(r) = *inc {
            state.k[slot] += cycles as f64 * r;
        }
    }
    state.m += info.skip_cycles * state.n() as u64;
}

/// Dykstra with fast-forwarding of stalls.
pub fn run_ff(poly: &Polyhedron, x0: &Vector, opts: &RunOptions) -> Result<Trace> {
    run_ff_with(poly, x0, opts, SkipRule::Exact, |_, _, _| {})
}

/// [`run_ff`] with a configurable skip rule and an observer that sees the
/// state and stall data at every successful stall computation, before the
/// jump is applied.
pub fn run_ff_with<F>(poly: &Polyhedron, x0: &Vector, opts: &RunOptions, rule: SkipRule, mut observer: F) -> Result<Trace>
where
    F: FnMut(&SolverState, &Polyhedron, &StallInfo),
{
    let eps = opts.eps_stall_abs(x0);
    let mut trace = drive(poly, x0, opts, StepKind::Dykstra, |state, rec| {
        if !detect_stall(state, eps) {
            return Ok(());
        }
        rec.stalled = true;
        let info = match checked_stall_length(state, poly, eps) {
            Ok(info) => info,
            Err(Error::InconsistentStall(why)) => {
                debug!("iteration {}: stall not fast-forwarded ({why})", rec.m);
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        observer(state, poly, &info);
        fast_forward_with(state, &info, poly, rule)?;
        if info.skip_cycles > 0 {
            rec.ff_event = Some(FfEvent {
                n_stall: info.n_stall,
                i_stall: info.i_stall,
                skipped_cycles: info.skip_cycles,
            });
        }
        Ok(())
    })?;
    trace.mode = Mode::DykstraFf;
    Ok(trace)
}
