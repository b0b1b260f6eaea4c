//! Plain Dykstra on the box-and-line instance.

use dykstra_ff::oracle::box_line_instance;
use dykstra_ff::{run, RunOptions, Vector};

fn main() -> dykstra_ff::Result<()> {
    let (poly, x0) = box_line_instance();
    let x_star = Vector::from_column_slice(&[0.0, 1.0]);
    let trace = run(&poly, &x0, &RunOptions::default().reference(x_star.clone()))?;

    println!("start      {:?}", x0.as_slice());
    println!("final      {:?}", trace.final_x.as_slice());
    println!("iterations {} ({} cycles), converged {}", trace.iterations(), trace.completed_cycles(), trace.converged);
    println!("error      {:e}", (&trace.final_x - &x_star).norm());
    for (c, cycle) in trace.records.chunks_exact(trace.n).take(18).enumerate() {
        let x = &cycle[trace.n - 1].x_after;
        println!("cycle {c:>2}  x = ({:+.6}, {:+.6})", x[0], x[1]);
    }
    Ok(())
}
