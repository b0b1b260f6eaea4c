//! Randomized property suites behind `verify`.

use std::ops::Range;

use crate::dykstra::{dykstra_step, run, run_map, Branch, RunOptions, SolverState};
use crate::geometry::{Polyhedron, Vector};
use crate::harness::compare::{excised_deviation, run_ff_checked};
use crate::oracle::generate::{random_instance, stall_inducing_instance, InstanceSpec};
use crate::oracle::oracle_project;
use crate::stall::{run_ff_with, SkipRule};

pub const TRACE_TOL: f64 = 1e-7;
pub const ORACLE_TOL: f64 = 1e-4;
pub const KKT_TOL: f64 = 1e-9;
pub const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    /// `(seed, reason)` of every failure.
    pub failures: Vec<(u64, String)>,
}

impl SuiteResult {
    fn record(&mut self, seed: u64, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.passed += 1,
            Err(why) => self.failures.push((seed, why)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failures.is_empty())
    }

    pub fn total(&self) -> usize {
        self.suites.iter().map(|s| s.passed + s.failures.len()).sum()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            s += &format!("{:<20} pass {:>5}  fail {:>5}\n", suite.name, suite.passed, suite.failures.len());
            for (seed, why) in &suite.failures {
                s += &format!("  seed {seed}: {why}\n");
            }
        }
        s
    }
}

/// Random instance used by the generic suites for `seed`.
pub fn generic_spec(seed: u64) -> InstanceSpec {
    InstanceSpec::new(seed, 2 + (seed % 4) as usize, 3 + (seed % 6) as usize)
}

fn check_k_sign(poly: &Polyhedron, x0: &Vector, rule: SkipRule) -> Result<(), String> {
    let opts = RunOptions::default().max_iter(2000);
    let mut bad = None;
    let trace = run_ff_with(poly, x0, &opts, rule, |state, _, _| {
        if let Some(slot) = state.aux().iter().position(|&k| k < 0.0) {
            bad.get_or_insert(slot);
        }
    })
    .map_err(|e| e.to_string())?;
    if let Some(slot) = bad {
        return Err(format!("negative auxiliary on half-space {slot}"));
    }
    for r in &trace.records {
        let ok = match r.branch {
            Branch::Projected => r.k_after > 0.0,
            Branch::Inactive => r.k_after == 0.0,
        };
        if !ok {
            return Err(format!("iteration {}: k = {} after {:?}", r.m, r.k_after, r.branch));
        }
    }
    Ok(())
}

/// Scalar auxiliaries against the vector recursion `x⁺ = P(x + e)`, `e⁺ = x + e − x⁺`.
fn check_parallel(poly: &Polyhedron, x0: &Vector, iters: usize) -> Result<(), String> {
    let n = poly.len();
    let mut x = x0.clone();
    let mut e = vec![Vector::zeros(poly.dim()); n];
    let mut st = SolverState::new(x0.clone(), n);
    for m in 0..iters {
        let i = m % n;
        let y = &x + &e[i];
        x = poly.get(i).project(&y);
        e[i] = &y - &x;
        dykstra_step(&mut st, poly).map_err(|e| e.to_string())?;
        let scale = 1.0 + x.norm();
        if (st.x() - &x).amax() > PARALLEL_TOL * scale {
            return Err(format!("iterate differs at iteration {m}"));
        }
        let implied = poly.get(i).normal() * st.aux()[i];
        if (&implied - &e[i]).amax() > PARALLEL_TOL * scale {
            return Err(format!("auxiliary of half-space {i} not parallel at iteration {m}"));
        }
        if poly.get(i).residual(st.x()) > PARALLEL_TOL * scale {
            return Err(format!("half-space {i} violated right after its visit at iteration {m}"));
        }
    }
    Ok(())
}

fn check_map_reduction(poly: &Polyhedron, x0: &Vector) -> Result<(), String> {
    let opts = RunOptions {
        early_stop: false,
        ..RunOptions::default().max_iter(40 * poly.len() as u64)
    };
    let map = run_map(poly, x0, &opts).map_err(|e| e.to_string())?;
    let mut st = SolverState::new(x0.clone(), poly.len());
    for rec in &map.records {
        let slot = st.next_halfspace();
        st.set_aux(slot, 0.0);
        dykstra_step(&mut st, poly).map_err(|e| e.to_string())?;
        if st.x() != &rec.x_after {
            return Err(format!("zeroed Dykstra differs from MAP at iteration {}", rec.m));
        }
    }
    Ok(())
}

fn check_stall_length(poly: &Polyhedron, x0: &Vector) -> Result<usize, String> {
    let (_, checks) = run_ff_checked(poly, x0, &RunOptions::default(), SkipRule::Exact).map_err(|e| e.to_string())?;
    for c in &checks {
        if !c.agrees() {
            return Err(format!(
                "iteration {}: formula gives N = {} (half-space {}), replay gives {:?}",
                c.detected_at, c.n_stall, c.i_stall, c.brute
            ));
        }
    }
    Ok(checks.len())
}

/// Trace equivalence of the fast-forward run against plain Dykstra.
pub fn check_trace(poly: &Polyhedron, x0: &Vector, rule: SkipRule, tol: f64) -> Result<u64, String> {
    let opts = RunOptions::default();
    let ff = run_ff_with(poly, x0, &opts, rule, |_, _, _| {}).map_err(|e| e.to_string())?;
    let plain_opts = RunOptions {
        early_stop: false,
        ..RunOptions::default().max_iter(ff.schedule_iterations.max(1))
    };
    let plain = run(poly, x0, &plain_opts).map_err(|e| e.to_string())?;
    let (dev, compared) = excised_deviation(&plain, &ff);
    if compared != ff.records.len() {
        return Err(format!("only {compared} of {} iterations comparable", ff.records.len()));
    }
    if !(dev <= tol) {
        return Err(format!("max deviation {dev:e} after excision"));
    }
    Ok(ff.skipped_cycles())
}

fn check_oracle(poly: &Polyhedron, x0: &Vector) -> Result<(), String> {
    let sol = oracle_project(poly, x0).map_err(|e| e.to_string())?;
    let kkt = sol.kkt_residuals(poly, x0).max();
    if kkt > KKT_TOL {
        return Err(format!("oracle KKT residual {kkt:e}"));
    }
    let opts = RunOptions::default();
    for (name, trace) in [("dykstra", run(poly, x0, &opts)), ("dykstra-ff", crate::stall::run_ff(poly, x0, &opts))] {
        let trace = trace.map_err(|e| e.to_string())?;
        let gap = (&trace.final_x - &sol.x_star).norm();
        if gap > ORACLE_TOL {
            return Err(format!("{name} ends {gap:e} from the oracle projection"));
        }
    }
    Ok(())
}

/// Runs every suite over `seeds`. Generic suites use [`generic_spec`];
/// stall suites use [`stall_inducing_instance`].
pub fn verify(seeds: Range<u64>, rule: SkipRule) -> VerifyReport {
    let mut k_sign = SuiteResult { name: "k-sign", ..Default::default() };
    let mut parallel = SuiteResult { name: "parallel-auxiliary", ..Default::default() };
    let mut map = SuiteResult { name: "map-reduction", ..Default::default() };
    let mut stall_length = SuiteResult { name: "stall-length", ..Default::default() };
    let mut trace = SuiteResult { name: "trace-equivalence", ..Default::default() };
    let mut oracle = SuiteResult { name: "oracle-convergence", ..Default::default() };

    for seed in seeds {
        let (poly, x0) = random_instance(&generic_spec(seed));
        k_sign.record(seed, check_k_sign(&poly, &x0, rule));
        parallel.record(seed, check_parallel(&poly, &x0, 50 * poly.len()));
        map.record(seed, check_map_reduction(&poly, &x0));
        oracle.record(seed, check_oracle(&poly, &x0));

        match stall_inducing_instance(seed) {
            Ok((poly, x0)) => {
                k_sign.record(seed, check_k_sign(&poly, &x0, rule));
                stall_length.record(seed, check_stall_length(&poly, &x0).map(|_| ()));
                trace.record(seed, check_trace(&poly, &x0, rule, TRACE_TOL).map(|_| ()));
            }
            Err(e) => stall_length.record(seed, Err(e.to_string())),
        }
    }
    VerifyReport {
        suites: vec![k_sign, parallel, map, stall_length, trace, oracle],
    }
}
