//! Exact projection by active-set enumeration, checked against both solvers.

use dykstra_ff::oracle::{oracle_project, random_instance, InstanceSpec};
use dykstra_ff::{run, run_ff, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (poly, x0) = random_instance(&InstanceSpec::new(42, 3, 8));
    let sol = oracle_project(&poly, &x0)?;
    let kkt = sol.kkt_residuals(&poly, &x0);
    println!("x0        {:?}", x0.as_slice());
    println!("x_star    {:?}", sol.x_star.as_slice());
    println!("active    {:?}", sol.active_set);
    println!("mult.     {:?}", sol.multipliers);
    println!("KKT       {kkt:?}");

    let opts = RunOptions::default();
    for trace in [run(&poly, &x0, &opts)?, run_ff(&poly, &x0, &opts)?] {
        println!(
            "{:<10} {} iterations, distance to oracle {:e}",
            trace.mode.as_str(),
            trace.iterations(),
            (&trace.final_x - &sol.x_star).norm()
        );
    }
    Ok(())
}
