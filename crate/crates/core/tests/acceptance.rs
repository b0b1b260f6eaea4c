//! Acceptance criteria A1–A8. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use dykstra_ff::harness::{cmd_compare, CompareArgs, FF_SUMMARY, PLAIN_SUMMARY};
use dykstra_ff::oracle::{brute_force_stall, generate, oracle_project};
use dykstra_ff::stall::{checked_stall_length, run_ff_with, SkipRule};
use dykstra_ff::{
    compute_stall_length, detect_stall, dykstra_step, run, run_ff, run_map, Branch, Polyhedron, RunOptions, SolverState,
    Trace, Vector,
};

type Outcome = Result<String, String>;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn stall_seeds() -> impl Iterator<Item = u64> {
    1..=200
}

fn random_spec(seed: u64) -> generate::InstanceSpec {
    generate::InstanceSpec::new(seed, 2 + (seed % 4) as usize, 3 + ((seed / 4) % 6) as usize)
}

fn long_opts(max_iter: u64) -> RunOptions {
    RunOptions {
        early_stop: false,
        ..RunOptions::default().max_iter(max_iter)
    }
}

/// Plain Dykstra iterates with the skipped cycles removed, compared
/// position by position with the fast-forward iterates.
fn excision_gap(poly: &Polyhedron, x0: &Vector, ff: &Trace) -> Result<f64, String> {
    let n = poly.len() as u64;
    let plain = run(poly, x0, &long_opts(ff.schedule_iterations.max(1))).map_err(|e| e.to_string())?;
    let mut shift = 0;
    let mut worst = 0.0f64;
    for rec in &ff.records {
        let j = (rec.m + shift) as usize;
        let other = plain.records.get(j).ok_or_else(|| format!("plain run too short at {j}"))?;
        worst = worst.max((&rec.x_after - &other.x_after).amax());
        if let Some(ev) = rec.ff_event {
            shift += ev.skipped_cycles * n;
        }
    }
    Ok(worst)
}

fn first_detection(poly: &Polyhedron, x0: &Vector) -> SolverState {
    let eps = RunOptions::default().eps_stall_abs(x0);
    let mut st = SolverState::new(x0.clone(), poly.len());
    while !detect_stall(&st, eps) {
        dykstra_step(&mut st, poly).expect("finite run");
    }
    st
}

fn a1() -> Outcome {
    let start = Instant::now();
    let (poly, x0) = generate::box_line_instance();
    let trace = run(&poly, &x0, &long_opts(6 * 40)).map_err(|e| e.to_string())?;
    let first = trace.records.iter().position(|r| r.stalled).ok_or("no stall flagged")?;
    ensure(first / 6 == 2, || format!("stall flagged in cycle {}", first / 6))?;

    let st = first_detection(&poly, &x0);
    let info = compute_stall_length(&st, &poly).map_err(|e| e.to_string())?;
    let eps = RunOptions::default().eps_stall_abs(&x0);
    let brute = brute_force_stall(&st, &poly, eps, 1000).map_err(|e| e.to_string())?;
    ensure(info.n_stall == 14 && brute.cycles == 14, || {
        format!("n_stall = {}, brute force = {}", info.n_stall, brute.cycles)
    })?;

    let end = |c: usize| &trace.records[6 * c + 5].x_after;
    for c in 3..=15 {
        ensure((end(c) - end(2)).amax() <= eps, || format!("iterate moved in cycle {c}"))?;
    }
    ensure((end(16) - end(2)).amax() > 1e-3, || "iterate still stalled in cycle 16".into())?;
    let took = within(start, Duration::from_secs(1))?;
    Ok(format!(
        "stall detected in cycle 2, n_stall = 14 = brute force, stalled through cycle 15, moves in cycle 16 ({took:.0?})"
    ))
}

fn a2() -> Outcome {
    let start = Instant::now();
    let (poly, x0) = generate::box_line_instance();
    let ff = run_ff(&poly, &x0, &RunOptions::default()).map_err(|e| e.to_string())?;
    let canonical = excision_gap(&poly, &x0, &ff)?;
    ensure(canonical <= 1e-9 && ff.skipped_cycles() == 14, || {
        format!("canonical: gap {canonical:e}, skipped {}", ff.skipped_cycles())
    })?;

    let (poly, x0) = generate::multi_stall_instance();
    let ff = run_ff(&poly, &x0, &RunOptions::default()).map_err(|e| e.to_string())?;
    let jumps = ff.ff_events().filter(|(_, e)| e.skipped_cycles > 0).count();
    let gap = excision_gap(&poly, &x0, &ff)?;
    ensure(jumps >= 2 && gap <= 1e-9, || format!("multi-stall: {jumps} jumps, gap {gap:e}"))?;

    let mut worst = 0.0f64;
    let mut count = 0;
    for seed in stall_seeds() {
        let (poly, x0) = generate::stall_inducing_instance(seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let ff = run_ff(&poly, &x0, &RunOptions::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(ff.skipped_cycles() > 0, || format!("seed {seed}: nothing fast-forwarded"))?;
        let gap = excision_gap(&poly, &x0, &ff)?;
        ensure(gap <= 1e-7, || format!("seed {seed}: gap {gap:e}"))?;
        worst = worst.max(gap);
        count += 1;
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!(
        "canonical gap {canonical:.1e}; multi-stall {jumps} jumps, gap {gap:.1e}; {count} seeded instances, worst gap {worst:.1e} ({took:.1?})"
    ))
}

fn a3() -> Outcome {
    let (poly, x0) = generate::box_line_instance();
    let x_star = v(&[0.0, 1.0]);
    let opts = RunOptions::default().reference(x_star.clone());
    let plain = run(&poly, &x0, &opts).map_err(|e| e.to_string())?;
    let ff = run_ff(&poly, &x0, &opts).map_err(|e| e.to_string())?;
    let cycles = |t: &Trace| t.first_within(&x_star, 1e-6).map(|it| it.div_ceil(6));
    let (p, f) = (cycles(&plain).ok_or("plain never within 1e-6")?, cycles(&ff).ok_or("ff never within 1e-6")?);
    ensure(p <= 200 && f <= 200, || format!("plain {p} cycles, ff {f} cycles"))?;
    ensure(p - f == 14 && ff.skipped_cycles() == 14, || format!("difference {} cycles", p as i64 - f as i64))?;
    Ok(format!("within 1e-6 of (0, 1) after {p} (plain) and {f} (fast-forward) cycles"))
}

fn a4() -> Outcome {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let seeds = 0..120u64;
    let count = seeds.end - seeds.start;
    for seed in seeds {
        let (poly, x0) = generate::random_instance(&random_spec(seed));
        let sol = oracle_project(&poly, &x0).map_err(|e| format!("seed {seed}: {e}"))?;
        let kkt = sol.kkt_residuals(&poly, &x0).max();
        ensure(kkt <= 1e-9, || format!("seed {seed}: KKT residual {kkt:e}"))?;
        worst_kkt = worst_kkt.max(kkt);
        let opts = RunOptions::default();
        for trace in [run(&poly, &x0, &opts), run_ff(&poly, &x0, &opts)] {
            let trace = trace.map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(trace.iterations() <= 10_000, || format!("seed {seed}: budget exceeded"))?;
            let gap = (&trace.final_x - &sol.x_star).norm();
            ensure(gap <= 1e-4, || format!("seed {seed}: {} ends {gap:e} away", trace.mode))?;
            worst_gap = worst_gap.max(gap);
        }
    }
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{count} instances, worst distance {worst_gap:.1e}, worst KKT residual {worst_kkt:.1e} ({took:.1?})"
    ))
}

fn a5() -> Outcome {
    let mut checked = 0;
    let mut check = |poly: &Polyhedron, x0: &Vector, label: String| -> Result<(), String> {
        let eps = RunOptions::default().eps_stall_abs(x0);
        // Every stall the fast-forward run acts on.
        let mut failures = Vec::new();
        run_ff_with(poly, x0, &RunOptions::default(), SkipRule::Exact, |st, poly, info| {
            match brute_force_stall(st, poly, eps, 1_000_000) {
                Ok(b) if (b.cycles, b.halfspace) == (info.n_stall, info.i_stall) => {}
                other => failures.push(format!("{label} m {}: formula {} / replay {other:?}", st.m(), info.n_stall)),
            }
            checked += 1;
        })
        .map_err(|e| format!("{label}: {e}"))?;
        // The first accepted detection of every stall in the plain run.
        let mut st = SolverState::new(x0.clone(), poly.len());
        let mut inside = false;
        for _ in 0..10_000 {
            dykstra_step(&mut st, poly).map_err(|e| e.to_string())?;
            let stalled = detect_stall(&st, eps);
            if stalled && !inside {
                if let Ok(info) = checked_stall_length(&st, poly, eps) {
                    match brute_force_stall(&st, poly, eps, 1_000_000) {
                        Ok(b) if (b.cycles, b.halfspace) == (info.n_stall, info.i_stall) => {}
                        other => failures.push(format!("{label} plain m {}: formula {} / replay {other:?}", st.m(), info.n_stall)),
                    }
                    checked += 1;
                }
            }
            inside = stalled;
        }
        failures.first().map_or(Ok(()), |f| Err(f.clone()))
    };

    let mut tie = generate::tie_instance();
    check(&tie.0, &tie.1, "tie".into())?;
    tie = generate::box_line_instance();
    check(&tie.0, &tie.1, "canonical".into())?;
    tie = generate::multi_stall_instance();
    check(&tie.0, &tie.1, "multi-stall".into())?;
    for seed in stall_seeds() {
        let (poly, x0) = generate::stall_inducing_instance(seed).map_err(|e| e.to_string())?;
        check(&poly, &x0, format!("stall seed {seed}"))?;
    }
    for seed in 0..120 {
        let (poly, x0) = generate::random_instance(&random_spec(seed));
        check(&poly, &x0, format!("random seed {seed}"))?;
    }
    ensure(checked > 0, || "no stalls checked".into())?;
    Ok(format!("{checked} stalls, formula = brute force on all"))
}

/// Vector-form Dykstra `x⁺ = P(x + e)`, `e⁺ = x + e − x⁺` next to the scalar
/// implementation.
fn a6_parallel(poly: &Polyhedron, x0: &Vector, iters: usize) -> Result<(), String> {
    let n = poly.len();
    let mut x = x0.clone();
    let mut e = vec![Vector::zeros(poly.dim()); n];
    let mut st = SolverState::new(x0.clone(), n);
    for m in 0..iters {
        let i = m % n;
        let y = &x + &e[i];
        x = poly.get(i).project(&y);
        e[i] = &y - &x;
        let out = dykstra_step(&mut st, poly).map_err(|e| e.to_string())?;
        let scale = 1.0 + x.norm();
        ensure((st.x() - &x).amax() <= 1e-12 * scale, || format!("iterate differs at {m}"))?;
        ensure((poly.get(i).normal() * st.aux()[i] - &e[i]).amax() <= 1e-12 * scale, || {
            format!("auxiliary {i} not parallel at {m}")
        })?;
        ensure(st.aux().iter().all(|&k| k >= 0.0), || format!("negative auxiliary at {m}"))?;
        ensure(poly.get(i).residual(st.x()) <= 1e-12 * scale, || format!("half-space {i} violated at {m}"))?;
        let consistent = match out.branch {
            Branch::Projected => out.k_after > 0.0,
            Branch::Inactive => out.k_after == 0.0,
        };
        ensure(consistent, || format!("branch and k disagree at {m}"))?;
    }
    Ok(())
}

fn a6() -> Outcome {
    let mut instances = 0;
    for seed in 0..100u64 {
        let (poly, x0) = generate::random_instance(&random_spec(seed));
        a6_parallel(&poly, &x0, 200 * poly.len()).map_err(|e| format!("seed {seed}: {e}"))?;

        let map = run_map(&poly, &x0, &long_opts(50 * poly.len() as u64)).map_err(|e| e.to_string())?;
        let mut st = SolverState::new(x0.clone(), poly.len());
        for rec in &map.records {
            let slot = st.next_halfspace();
            st.set_aux(slot, 0.0);
            dykstra_step(&mut st, &poly).map_err(|e| e.to_string())?;
            ensure(st.x() == &rec.x_after, || format!("seed {seed}: MAP differs at {}", rec.m))?;
        }
        instances += 1;
    }
    // k ≥ 0 also across fast-forward jumps.
    for seed in stall_seeds() {
        let (poly, x0) = generate::stall_inducing_instance(seed).map_err(|e| e.to_string())?;
        let mut jumped = Vec::new();
        let trace = run_ff_with(&poly, &x0, &RunOptions::default(), SkipRule::Exact, |st, _, info| {
            for (slot, inc) in info.increments.iter().enumerate() {
                if let Some(r) = inc {
                    jumped.push(st.aux()[slot] + info.skip_cycles as f64 * r);
                }
            }
        })
        .map_err(|e| e.to_string())?;
        let tol = 1e-12 * (1.0 + x0.norm());
        ensure(jumped.iter().all(|&k| k >= -tol), || format!("stall seed {seed}: negative k after a jump"))?;
        ensure(trace.records.iter().all(|r| r.k_after >= 0.0), || format!("stall seed {seed}: negative k"))?;
        instances += 1;
    }
    Ok(format!(
        "{instances} instances: k >= 0, vector form agrees to 1e-12, visited half-space satisfied, MAP bitwise"
    ))
}

fn a7() -> Outcome {
    let (poly, x0) = generate::tie_instance();
    let eps = RunOptions::default().eps_stall_abs(&x0);
    let mut st = first_detection(&poly, &x0);
    // Advance through the stall until half-spaces 1 and 3 both need the same N.
    let info = loop {
        let info = compute_stall_length(&st, &poly).map_err(|e| e.to_string())?;
        let n_of = |slot| info.per_candidate.iter().find(|c| c.0 == slot).map(|c| c.1);
        if n_of(1).is_some() && n_of(1) == n_of(3) {
            break info;
        }
        dykstra_step(&mut st, &poly).map_err(|e| e.to_string())?;
        ensure(detect_stall(&st, eps), || format!("stall ended without a tie: {:?}", info.per_candidate))?;
    };
    ensure(info.i_stall == 1, || format!("i_stall = {}", info.i_stall))?;
    let brute = brute_force_stall(&st, &poly, eps, 1000).map_err(|e| e.to_string())?;
    ensure((brute.cycles, brute.halfspace) == (info.n_stall, 1), || format!("replay {brute:?}"))?;

    let ff = run_ff(&poly, &x0, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure(ff.skipped_cycles() > 0, || "nothing fast-forwarded".into())?;
    let gap = excision_gap(&poly, &x0, &ff)?;
    ensure(gap <= 1e-9, || format!("trace gap {gap:e}"))?;
    Ok(format!(
        "at iteration {}: half-spaces 1 and 3 both need N = {}, i_stall = 1, trace gap {gap:.1e}",
        st.m(),
        info.n_stall
    ))
}

fn a8() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, report) = cmd_compare(&CompareArgs {
        problem: dir.join("data/box_line.json"),
        summary_dir: Some(out.path().to_path_buf()),
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    ensure(code == 0 && report.cycles_saved == 14, || format!("exit {code}, saved {}", report.cycles_saved))?;
    for name in [PLAIN_SUMMARY, FF_SUMMARY] {
        let got = std::fs::read(out.path().join(name)).map_err(|e| e.to_string())?;
        let want = std::fs::read(dir.join("golden").join(name)).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{name} differs from the golden file"))?;
        ensure(got.starts_with(b"iteration,error,halfspace\n"), || format!("{name}: header"))?;
    }
    Ok("both per-cycle summaries match the golden files byte for byte".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(msg) => println!("{id} PASS  {msg}"),
            Err(msg) => {
                println!("{id} FAIL  {msg}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
