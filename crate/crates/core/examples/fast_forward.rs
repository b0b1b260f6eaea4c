//! Stall detection, the closed-form stall length, and the jump.

use dykstra_ff::oracle::{box_line_instance, brute_force_stall};
use dykstra_ff::{compute_stall_length, detect_stall, dykstra_step, run, run_ff, RunOptions, SolverState};

fn main() -> dykstra_ff::Result<()> {
    let (poly, x0) = box_line_instance();
    let opts = RunOptions::default();
    let eps = opts.eps_stall_abs(&x0);

    let mut state = SolverState::new(x0.clone(), poly.len());
    while !detect_stall(&state, eps) {
        dykstra_step(&mut state, &poly)?;
    }
    let info = compute_stall_length(&state, &poly)?;
    let brute = brute_force_stall(&state, &poly, eps, 1000)?;
    println!("stall detected after {} iterations at x = {:?}", state.m(), state.x().as_slice());
    println!("auxiliaries {:?}", state.aux());
    println!("candidates {:?}", info.per_candidate);
    println!("formula: n_stall = {}, i_stall = {}", info.n_stall, info.i_stall);
    println!("replay:  {} cycles, released by half-space {}", brute.cycles, brute.halfspace);

    let plain = run(&poly, &x0, &opts)?;
    let ff = run_ff(&poly, &x0, &opts)?;
    for (m, ev) in ff.ff_events() {
        println!("jump at iteration {m}: skipped {} cycles", ev.skipped_cycles);
    }
    println!("plain {} iterations, fast-forward {}", plain.iterations(), ff.iterations());
    println!("final iterates {:?} / {:?}", plain.final_x.as_slice(), ff.final_x.as_slice());
    Ok(())
}
