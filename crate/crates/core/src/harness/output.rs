//! CSV emission. All files use `,` separators, `.` decimals, shortest
//! round-trip floats and LF line endings.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dykstra::{Branch, Trace};
use crate::geometry::Vector;
use crate::harness::HarnessError;

/// One row of the per-cycle summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    /// Executed cycle index, from 0.
    pub iteration: u64,
    /// Squared distance to the reference at the end of the cycle.
    pub error: f64,
    /// 1 when the watched half-space took the projected branch in the cycle.
    pub halfspace: u8,
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One row per completed cycle of `trace`.
pub fn summary_rows(trace: &Trace, reference: &Vector, watch: usize) -> Vec<SummaryRow> {
    trace
        .records
        .chunks_exact(trace.n)
        .enumerate()
        .map(|(c, cycle)| {
            let last = cycle.last().expect("chunks are non-empty");
            let active = cycle.iter().any(|r| r.halfspace == watch && r.branch == Branch::Projected);
            SummaryRow {
                iteration: c as u64,
                error: (&last.x_after - reference).norm_squared(),
                halfspace: active as u8,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut w = writer(out);
    if rows.is_empty() {
        w.write_record(["iteration", "error", "halfspace"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut buf = Vec::new();
    write_summary(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Per-iteration trace: indices, branch, auxiliary, stall flags, the
/// fast-forward event if any, squared error if a reference was set, and
/// the iterate coordinates `x0 … x{p−1}`.
pub fn write_trace<W: Write>(out: W, trace: &Trace) -> Result<(), HarnessError> {
    let mut w = writer(out);
    let p = trace.x0.len();
    let mut header: Vec<String> = [
        "m",
        "schedule_m",
        "cycle",
        "halfspace",
        "branch",
        "k",
        "stalled",
        "ff_n_stall",
        "ff_i_stall",
        "ff_skipped_cycles",
        "error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..p).map(|j| format!("x{j}")));
    w.write_record(&header)?;

    let schedule = trace.schedule_indices();
    let opt = |v: Option<String>| v.unwrap_or_default();
    for (rec, sched) in trace.records.iter().zip(schedule) {
        let mut row = vec![
            rec.m.to_string(),
            sched.to_string(),
            rec.cycle.to_string(),
            rec.halfspace.to_string(),
            match rec.branch {
                Branch::Inactive => "inactive".to_string(),
                Branch::Projected => "projected".to_string(),
            },
            rec.k_after.to_string(),
            (rec.stalled as u8).to_string(),
            opt(rec.ff_event.map(|e| e.n_stall.to_string())),
            opt(rec.ff_event.map(|e| e.i_stall.to_string())),
            opt(rec.ff_event.map(|e| e.skipped_cycles.to_string())),
            opt(rec.error_sq.map(|e| e.to_string())),
        ];
        row.extend(rec.x_after.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Planar iterates `x_0, x_1, …` as `x,y` rows.
pub fn write_iterates<W: Write>(out: W, trace: &Trace) -> Result<(), HarnessError> {
    if trace.x0.len() != 2 {
        return Err(HarnessError::Parse(format!(
            "iterates CSV needs dimension 2, problem has {}",
            trace.x0.len()
        )));
    }
    let mut w = writer(out);
    w.write_record(["x", "y"])?;
    for x in trace.iterates() {
        w.write_record([x[0].to_string(), x[1].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_file<F>(path: &Path, emit: F) -> Result<(), HarnessError>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<(), HarnessError>,
{
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit(&mut file)?;
    file.flush()?;
    Ok(())
}
