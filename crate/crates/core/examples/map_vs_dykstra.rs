//! Alternating projections reach a feasible point; Dykstra reaches the projection.

use dykstra_ff::oracle::{oracle_project, random_instance, InstanceSpec};
use dykstra_ff::{run, run_map, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (poly, x0) = random_instance(&InstanceSpec::new(42, 3, 8));
    let x_star = oracle_project(&poly, &x0)?.x_star;
    let opts = RunOptions::default();
    for trace in [run_map(&poly, &x0, &opts)?, run(&poly, &x0, &opts)?] {
        println!(
            "{:<8} x = {:?}\n         distance from x0 {:.6}, from the projection {:e}, max violation {:e}",
            trace.mode.as_str(),
            trace.final_x.as_slice(),
            (&trace.final_x - &x0).norm(),
            (&trace.final_x - &x_star).norm(),
            poly.max_violation(&trace.final_x)
        );
    }
    Ok(())
}
