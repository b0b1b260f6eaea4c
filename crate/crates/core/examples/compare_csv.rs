//! Plain and fast-forward runs side by side, with per-cycle summary CSVs.

use dykstra_ff::harness::{compare, output};
use dykstra_ff::oracle::box_line_instance;
use dykstra_ff::{RunOptions, Vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (poly, x0) = box_line_instance();
    let x_star = Vector::from_column_slice(&[0.0, 1.0]);
    let report = compare(&poly, &x0, &RunOptions::default(), &x_star, None)?;
    print!("{}", report.render());

    let dir = std::env::temp_dir().join("dykstra-compare");
    std::fs::create_dir_all(&dir)?;
    for (name, rows) in [("original.csv", report.plain_summary()), ("ff.csv", report.ff_summary())] {
        let path = dir.join(name);
        output::to_file(&path, |w| output::write_summary(w, &rows))?;
        println!("wrote {} ({} cycles)", path.display(), rows.len());
    }
    print!("{}", output::summary_csv(&report.ff_summary()[..4]));
    Ok(())
}
