//! Problem files, CSV output, and the `solve` / `compare` / `verify` / `gen`
//! commands behind the `dykstra` binary.

pub mod compare;
pub mod output;
pub mod problem;
pub mod verify;

use std::path::{Path, PathBuf};

pub use compare::{compare, excised_deviation, CompareReport};
pub use problem::{ConstraintSpec, OptionsBlock, ProblemFile};
pub use verify::{verify, VerifyReport};

use crate::dykstra::{solve, Mode, RunOptions, Trace};
use crate::error::Error;
use crate::geometry::{Polyhedron, Vector};
use crate::oracle::generate::{box_line_instance, instance, InstanceSpec};
use crate::oracle::oracle_project;
use crate::stall::SkipRule;

/// Process exit codes.
pub mod exit {
    pub const CONVERGED: i32 = 0;
    pub const BUDGET_EXHAUSTED: i32 = 1;
    pub const PARSE_ERROR: i32 = 2;
    pub const NUMERICAL_FAILURE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solver(Error::NumericalFailure { .. } | Error::NonFinite(_)) => exit::NUMERICAL_FAILURE,
            HarnessError::Solver(Error::FastForwardConsistency { .. }) => exit::NUMERICAL_FAILURE,
            _ => exit::PARSE_ERROR,
        }
    }
}

/// Where the reference point used for errors comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    File,
    Oracle,
    /// No reference available: errors are measured to the plain run's final iterate.
    FinalIterate,
}

/// Picks the reference point: the file's `x_star`, else the oracle if
/// enabled, else `None`.
pub fn resolve_reference(problem: &ProblemFile, poly: &Polyhedron, x0: &Vector, use_oracle: bool) -> Result<Option<(Vector, ReferenceSource)>, HarnessError> {
    if let Some(x) = problem.reference()? {
        return Ok(Some((x, ReferenceSource::File)));
    }
    if use_oracle {
        let sol = oracle_project(poly, x0)?;
        return Ok(Some((sol.x_star, ReferenceSource::Oracle)));
    }
    Ok(None)
}

#[derive(Debug, Clone, Default)]
pub struct SolveArgs {
    pub problem: PathBuf,
    /// Applied on top of the problem file's options.
    pub overrides: OptionsBlock,
    pub trace_out: Option<PathBuf>,
    pub summary_out: Option<PathBuf>,
    pub iterates_out: Option<PathBuf>,
    pub oracle: bool,
    pub watch: Option<usize>,
}

fn load(path: &Path, overrides: &OptionsBlock) -> Result<(ProblemFile, Polyhedron, Vector, RunOptions), HarnessError> {
    let problem = ProblemFile::load(path)?;
    let (poly, x0) = problem.instance()?;
    let opts = overrides.apply(problem.run_options());
    opts.validate(&poly)?;
    Ok((problem, poly, x0, opts))
}

fn first_stall_halfspace(trace: &Trace) -> usize {
    trace.ff_events().next().map_or(0, |(_, e)| e.i_stall)
}

/// `solve`: returns the exit code and the printed report.
pub fn cmd_solve(args: &SolveArgs) -> Result<(i32, String), HarnessError> {
    let (problem, poly, x0, opts) = load(&args.problem, &args.overrides)?;
    let reference = resolve_reference(&problem, &poly, &x0, args.oracle)?;
    let opts = match &reference {
        Some((x, _)) => opts.reference(x.clone()),
        None => opts,
    };
    let trace = solve(&poly, &x0, &opts)?;

    if let Some(path) = &args.trace_out {
        output::to_file(path, |w| output::write_trace(w, &trace))?;
    }
    if let Some(path) = &args.summary_out {
        let watch = args.watch.unwrap_or_else(|| first_stall_halfspace(&trace));
        let reference = reference.as_ref().map_or(&trace.final_x, |(x, _)| x);
        let rows = output::summary_rows(&trace, reference, watch);
        output::to_file(path, |w| output::write_summary(w, &rows))?;
    }
    if let Some(path) = &args.iterates_out {
        output::to_file(path, |w| output::write_iterates(w, &trace))?;
    }

    let mut report = String::new();
    report += &format!("mode: {}\n", trace.mode);
    report += &format!(
        "final iterate: [{}]\n",
        trace.final_x.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
    );
    report += &format!(
        "iterations: {} (schedule position {}), converged: {}\n",
        trace.iterations(),
        trace.schedule_iterations,
        trace.converged
    );
    report += &format!("stalled iterations: {}\n", trace.records.iter().filter(|r| r.stalled).count());
    for (m, ev) in trace.ff_events() {
        report += &format!(
            "ff event at iteration {m}: n_stall = {}, i_stall = {}, skipped cycles = {}\n",
            ev.n_stall, ev.i_stall, ev.skipped_cycles
        );
    }
    if let Some((x, source)) = &reference {
        report += &format!("final error ({source:?}): {:e}\n", (&trace.final_x - x).norm());
    }
    let code = if trace.converged { exit::CONVERGED } else { exit::BUDGET_EXHAUSTED };
    Ok((code, report))
}

#[derive(Debug, Clone, Default)]
pub struct CompareArgs {
    pub problem: PathBuf,
    pub overrides: OptionsBlock,
    /// Directory receiving both per-cycle summaries.
    pub summary_dir: Option<PathBuf>,
    pub oracle: bool,
    pub watch: Option<usize>,
}

pub const PLAIN_SUMMARY: &str = "data_dykstra_original.csv";
pub const FF_SUMMARY: &str = "data_dykstra_ff.csv";

/// `compare`: exit 0 when both runs converge and the traces agree.
pub fn cmd_compare(args: &CompareArgs) -> Result<(i32, CompareReport), HarnessError> {
    let (problem, poly, x0, opts) = load(&args.problem, &args.overrides)?;
    let reference = match resolve_reference(&problem, &poly, &x0, args.oracle)? {
        Some((x, _)) => x,
        None => solve(&poly, &x0, &RunOptions { mode: Mode::Dykstra, ..opts.clone() })?.final_x,
    };
    let report = compare(&poly, &x0, &opts, &reference, args.watch)?;
    if let Some(dir) = &args.summary_dir {
        std::fs::create_dir_all(dir)?;
        let plain = report.plain_summary();
        let ff = report.ff_summary();
        output::to_file(&dir.join(PLAIN_SUMMARY), |w| output::write_summary(w, &plain))?;
        output::to_file(&dir.join(FF_SUMMARY), |w| output::write_summary(w, &ff))?;
    }
    let converged = report.plain.converged && report.ff.converged;
    let (ok, total) = report.brute_agreement();
    let code = if converged && ok == total && report.max_deviation <= verify::TRACE_TOL {
        exit::CONVERGED
    } else {
        exit::BUDGET_EXHAUSTED
    };
    Ok((code, report))
}

/// `verify`: exit 0 iff every suite passes. An empty range only warns.
pub fn cmd_verify(seeds: std::ops::Range<u64>, mutate: bool) -> (i32, String) {
    let rule = if mutate { SkipRule::OffByOne } else { SkipRule::Exact };
    if seeds.is_empty() {
        log::warn!("empty seed range; nothing to verify");
        return (exit::CONVERGED, "no seeds given: 0 tests run\n".to_string());
    }
    let report = verify(seeds, rule);
    let code = if report.all_passed() { exit::CONVERGED } else { exit::BUDGET_EXHAUSTED };
    (code, report.render())
}

#[derive(Debug, Clone, Default)]
pub struct GenArgs {
    pub paper: bool,
    pub seed: u64,
    pub stall: bool,
    pub dim: usize,
    pub count: usize,
}

/// `gen`: the problem file as JSON text. Stall instances carry the oracle
/// projection as `x_star`.
pub fn cmd_gen(args: &GenArgs) -> Result<String, HarnessError> {
    let (poly, x0) = if args.paper {
        box_line_instance()
    } else {
        let spec = InstanceSpec {
            stall_inducing: args.stall,
            ..InstanceSpec::new(args.seed, args.dim, args.count)
        };
        instance(&spec)?
    };
    let mut file = ProblemFile::from_instance(&poly, &x0);
    if poly.len() <= crate::oracle::MAX_ENUMERATION {
        file = file.with_reference(&oracle_project(&poly, &x0)?.x_star);
    }
    Ok(file.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_is_deterministic_and_loads() {
        let args = GenArgs {
            seed: 7,
            stall: true,
            dim: 2,
            count: 6,
            ..Default::default()
        };
        let a = cmd_gen(&args).unwrap();
        assert_eq!(a, cmd_gen(&args).unwrap());
        let (poly, x0) = ProblemFile::from_json(&a).unwrap().instance().unwrap();
        assert!(crate::oracle::generate::longest_stall(&poly, &x0).unwrap() >= 2);
    }

    #[test]
    fn gen_box_line_file() {
        let text = cmd_gen(&GenArgs { paper: true, ..Default::default() }).unwrap();
        let file = ProblemFile::from_json(&text).unwrap();
        assert_eq!(file.x0, vec![-4.0, 1.4]);
        assert_eq!(file.halfspaces.len(), 6);
        let x_star = file.x_star.unwrap();
        assert!(x_star[0].abs() <= 1e-12 && (x_star[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(HarnessError::Parse("x".into()).exit_code(), exit::PARSE_ERROR);
        assert_eq!(
            HarnessError::Solver(Error::NumericalFailure { iteration: 3 }).exit_code(),
            exit::NUMERICAL_FAILURE
        );
        assert_eq!(HarnessError::Solver(Error::Infeasible).exit_code(), exit::PARSE_ERROR);
    }
}
