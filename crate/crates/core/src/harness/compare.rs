use crate::dykstra::{run, FfEvent, Mode, RunOptions, Trace};
use crate::geometry::{Polyhedron, Vector};
use crate::harness::output::{summary_rows, SummaryRow};
use crate::harness::HarnessError;
use crate::oracle::brute_force_stall;
use crate::stall::{run_ff_with, SkipRule};

/// Largest per-coordinate gap between the fast-forward iterates and the plain
/// iterates at the same schedule position, with the number of records compared.
pub fn excised_deviation(plain: &Trace, ff: &Trace) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (rec, j) in ff.records.iter().zip(ff.schedule_indices()) {
        let Some(other) = plain.records.get(j as usize) else {
            break;
        };
        worst = worst.max((&rec.x_after - &other.x_after).amax());
        compared += 1;
    }
    (worst, compared)
}

/// Number of maximal runs of stall-flagged records.
pub fn stall_count(trace: &Trace) -> usize {
    let mut count = 0;
    let mut inside = false;
    for r in &trace.records {
        if r.stalled && !inside {
            count += 1;
        }
        inside = r.stalled;
    }
    count
}

/// Stall-length check against brute-force replay at one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StallCheck {
    pub detected_at: u64,
    pub n_stall: u64,
    pub i_stall: usize,
    /// `None` when the replay failed.
    pub brute: Option<(u64, usize)>,
}

impl StallCheck {
    pub fn agrees(&self) -> bool {
        self.brute == Some((self.n_stall, self.i_stall))
    }
}

/// Fast-forward run that replays every computed stall by brute force.
pub fn run_ff_checked(poly: &Polyhedron, x0: &Vector, opts: &RunOptions, rule: SkipRule) -> Result<(Trace, Vec<StallCheck>), HarnessError> {
    let eps = opts.eps_stall_abs(x0);
    let budget = 10 * opts.max_iter.max(1);
    let mut checks = Vec::new();
    let trace = run_ff_with(poly, x0, opts, rule, |state, poly, info| {
        let brute = brute_force_stall(state, poly, eps, budget).ok().map(|b| (b.cycles, b.halfspace));
        checks.push(StallCheck {
            detected_at: state.m(),
            n_stall: info.n_stall,
            i_stall: info.i_stall,
            brute,
        });
    })?;
    Ok((trace, checks))
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub plain: Trace,
    pub ff: Trace,
    pub reference: Vector,
    pub watch: usize,
    /// Stalls flagged in the plain run.
    pub stalls_detected: usize,
    pub ff_events: Vec<(u64, FfEvent)>,
    pub cycles_saved: u64,
    pub max_deviation: f64,
    pub compared: usize,
    pub stall_checks: Vec<StallCheck>,
}

impl CompareReport {
    pub fn plain_summary(&self) -> Vec<SummaryRow> {
        summary_rows(&self.plain, &self.reference, self.watch)
    }

    pub fn ff_summary(&self) -> Vec<SummaryRow> {
        summary_rows(&self.ff, &self.reference, self.watch)
    }

    pub fn brute_agreement(&self) -> (usize, usize) {
        let ok = self.stall_checks.iter().filter(|c| c.agrees()).count();
        (ok, self.stall_checks.len())
    }

    pub fn render(&self) -> String {
        let (ok, total) = self.brute_agreement();
        let mut s = String::new();
        s += &format!("plain:        {} iterations, converged = {}\n", self.plain.iterations(), self.plain.converged);
        s += &format!("fast-forward: {} iterations, converged = {}\n", self.ff.iterations(), self.ff.converged);
        s += &format!("stalls detected (plain): {}\n", self.stalls_detected);
        for (m, ev) in &self.ff_events {
            s += &format!(
                "ff event at iteration {m}: n_stall = {}, i_stall = {}, skipped cycles = {}\n",
                ev.n_stall, ev.i_stall, ev.skipped_cycles
            );
        }
        s += &format!("cycles saved: {}\n", self.cycles_saved);
        s += &format!("stall length vs brute force: {ok}/{total} agree\n");
        s += &format!(
            "trace agreement after excision: max deviation {:e} over {} iterations\n",
            self.max_deviation, self.compared
        );
        s
    }
}

/// Runs plain Dykstra and Dykstra with fast-forwarding side by side.
///
/// `watch` selects the half-space whose activity goes into the summaries;
/// by default it is the half-space ending the first fast-forwarded stall.
pub fn compare(poly: &Polyhedron, x0: &Vector, opts: &RunOptions, reference: &Vector, watch: Option<usize>) -> Result<CompareReport, HarnessError> {
    let opts = opts.clone().reference(reference.clone());
    let plain = run(poly, x0, &RunOptions { mode: Mode::Dykstra, ..opts.clone() })?;
    let (ff, stall_checks) = run_ff_checked(poly, x0, &RunOptions { mode: Mode::DykstraFf, ..opts }, SkipRule::Exact)?;
    let ff_events: Vec<_> = ff.ff_events().collect();
    let watch = watch.unwrap_or_else(|| ff_events.first().map_or(0, |(_, e)| e.i_stall));
    if watch >= poly.len() {
        return Err(HarnessError::Parse(format!(
            "watched half-space {watch} out of range (n = {})",
            poly.len()
        )));
    }
    let (max_deviation, compared) = excised_deviation(&plain, &ff);
    Ok(CompareReport {
        stalls_detected: stall_count(&plain),
        cycles_saved: ff.skipped_cycles(),
        ff_events,
        max_deviation,
        compared,
        stall_checks,
        watch,
        reference: reference.clone(),
        plain,
        ff,
    })
}
