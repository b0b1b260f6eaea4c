use crate::dykstra::{dykstra_step, Branch, SolverState};
use crate::error::{Error, Result};
use crate::geometry::Polyhedron;
use crate::stall::{boundary_tol, stalled_view};

/// Outcome of replaying a stall step by step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceStall {
    /// Visits the exiting half-space needed, counting the exiting one.
    pub cycles: u64,
    pub halfspace: usize,
}

/// Replays plain Dykstra from a stalled state until the first active
/// half-space is released (`r + k ≤ 0` at its visit, up to the boundary
/// tolerance) and reports how many visits that took.
///
/// `eps` is the stall tolerance: if the iterate departs from the stalled
/// cycle before any release, the state was not a genuine stall.
pub fn brute_force_stall(state: &SolverState, poly: &Polyhedron, eps: f64, max_cycles: u64) -> Result<BruteForceStall> {
    if max_cycles == 0 {
        return Err(Error::InvalidOptions("max_cycles must be positive".into()));
    }
    let n = state.n();
    let view = stalled_view(state)?;
    let tols: Vec<f64> = view
        .iter()
        .enumerate()
        .map(|(s, (x, _))| boundary_tol(x, state.aux()[s]))
        .collect();
    let active: Vec<bool> = view.iter().map(|(_, b)| *b == Branch::Projected).collect();

    let mut st = state.clone();
    let mut visits = vec![0u64; n];
    loop {
        let slot = st.next_halfspace();
        visits[slot] += 1;
        if visits[slot] > max_cycles {
            return Err(Error::StallBudgetExceeded { max_cycles });
        }
        let h = poly.get(slot);
        if active[slot] && h.residual(st.x()) + st.aux()[slot] <= tols[slot] {
            return Ok(BruteForceStall {
                cycles: visits[slot],
                halfspace: slot,
            });
        }
        dykstra_step(&mut st, poly)?;
        let prev = st.iterate_back(n).expect("window holds a full cycle");
        if (st.x() - prev).norm() >= eps {
            return Err(Error::InconsistentStall("iterate left the stall before any release"));
        }
    }
}

/// Number of stalled cycles measured by replay; see [`brute_force_stall`].
pub fn brute_force_stall_count(state: &SolverState, poly: &Polyhedron, eps: f64, max_cycles: u64) -> Result<u64> {
    brute_force_stall(state, poly, eps, max_cycles).map(|b| b.cycles)
}
