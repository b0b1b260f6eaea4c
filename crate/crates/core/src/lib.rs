//! Dykstra's alternating projection onto polyhedra, with detection and
//! closed-form skipping of stalling periods.
//!
//! ```
//! use dykstra_ff::{oracle::box_line_instance, run_ff, RunOptions};
//!
//! let (poly, x0) = box_line_instance();
//! let trace = run_ff(&poly, &x0, &RunOptions::default()).unwrap();
//! assert_eq!(trace.skipped_cycles(), 14);
//! assert!((trace.final_x[0]).abs() < 1e-6 && (trace.final_x[1] - 1.0).abs() < 1e-6);
//! ```

pub mod dykstra;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod stall;

pub use dykstra::{
    dykstra_step, error_metric, map_step, run, run_map, solve, Branch, FfEvent, Mode, RunOptions, SolverState,
    StepOutcome, Trace, TraceRecord,
};
pub use error::{Error, Result};
pub use geometry::{
    classify_activity, equality_to_halfspaces, make_halfspace, project_halfspace, violation, Activity,
    ActivityReport, HalfSpace, Polyhedron, Vector,
};
pub use stall::{checked_stall_length, compute_stall_length, detect_stall, fast_forward, run_ff, SkipRule, StallInfo};
