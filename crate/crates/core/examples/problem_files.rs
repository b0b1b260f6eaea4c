//! Generated instances written to and read back from JSON problem files.

use dykstra_ff::harness::ProblemFile;
use dykstra_ff::oracle::{oracle_project, stall_inducing_instance};
use dykstra_ff::run_ff;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (poly, x0) = stall_inducing_instance(3)?;
    let x_star = oracle_project(&poly, &x0)?.x_star;
    let text = ProblemFile::from_instance(&poly, &x0).with_reference(&x_star).to_json();
    println!("{text}");

    let file = ProblemFile::from_json(&text)?;
    let (poly, x0) = file.instance()?;
    let trace = run_ff(&poly, &x0, &file.run_options())?;
    println!("{} cycles skipped, final {:?}", trace.skipped_cycles(), trace.final_x.as_slice());
    Ok(())
}
