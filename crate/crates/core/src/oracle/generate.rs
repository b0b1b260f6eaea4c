//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dykstra::{dykstra_step, RunOptions, SolverState};
use crate::error::{Error, Result};
use crate::geometry::{HalfSpace, Polyhedron, Vector};
use crate::oracle::brute::brute_force_stall_count;
use crate::stall::detect_stall;

const STALL_RETRIES: u32 = 16;
/// Cycles a candidate stall instance is simulated for before it is rejected.
const STALL_SEARCH_CYCLES: u64 = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub seed: u64,
    pub p: usize,
    pub n: usize,
    /// Offsets sit `U(slack.0, slack.1)` beyond the anchor point.
    pub slack: (f64, f64),
    /// Use the box-and-hyperplane family instead of a generic polyhedron.
    pub stall_inducing: bool,
}

impl InstanceSpec {
    pub fn new(seed: u64, p: usize, n: usize) -> Self {
        InstanceSpec {
            seed,
            p,
            n,
            slack: (0.1, 1.0),
            stall_inducing: false,
        }
    }

    pub fn stall(seed: u64) -> Self {
        InstanceSpec {
            stall_inducing: true,
            ..InstanceSpec::new(seed, 2, 6)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::InvalidOptions("p and n must be positive".into()));
        }
        let (lo, hi) = self.slack;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidOptions("slack must satisfy 0 < lo <= hi".into()));
        }
        if self.stall_inducing && (self.p != 2 || self.n != 6) {
            return Err(Error::InvalidOptions("stall-inducing instances have p = 2, n = 6".into()));
        }
        Ok(())
    }
}

fn unit_normal(rng: &mut ChaCha8Rng, p: usize) -> Vector {
    loop {
        let v = Vector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

fn hs(a: Vector, b: f64) -> HalfSpace {
    HalfSpace::new(a, b).expect("generated normals are nonzero")
}

/// Random polyhedron around a sampled anchor `z`, with `x0` outside it.
///
/// Panics if `spec` is invalid; see [`InstanceSpec::validate`].
pub fn random_instance(spec: &InstanceSpec) -> (Polyhedron, Vector) {
    random_instance_with_anchor(spec).0
}

pub(crate) fn random_instance_with_anchor(spec: &InstanceSpec) -> ((Polyhedron, Vector), Vector) {
    spec.validate().expect("invalid instance spec");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z = Vector::from_fn(spec.p, |_, _| rng.random_range(-1.0..1.0));
    let halfspaces: Vec<HalfSpace> = (0..spec.n)
        .map(|_| {
            let a = unit_normal(&mut rng, spec.p);
            let slack = rng.random_range(spec.slack.0..=spec.slack.1);
            let b = a.dot(&z) + slack;
            hs(a, b)
        })
        .collect();
    let poly = Polyhedron::new(halfspaces).expect("anchor lies inside");

    let mut radius: f64 = rng.random_range(2.0..6.0);
    let x0 = loop {
        let d = unit_normal(&mut rng, spec.p);
        let x0 = &z + d * radius;
        if poly.max_violation(&x0) > 0.0 {
            break x0;
        }
        radius *= 1.5;
    };
    ((poly, x0), z)
}

/// Box `[−1,1]²` (faces `x≤1, −x≤1, y≤1, −y≤1`) intersected with the line
/// through `(0,1)` and `(2,0)` written as `≤`/`≥` halfspaces, start
/// `(−4, 1.4)`.
pub fn box_line_instance() -> (Polyhedron, Vector) {
    let poly = Polyhedron::new(vec![
        HalfSpace::from_slice(&[1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[-1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, 1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, -1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[1.0, 2.0], 2.0).unwrap(),
        HalfSpace::from_slice(&[-1.0, -2.0], -2.0).unwrap(),
    ])
    .unwrap();
    (poly, Vector::from_column_slice(&[-4.0, 1.4]))
}

/// Box `[−1,1]²` with the line `x + y = 1` and start `(−20, −20)`.
///
/// Half-spaces 1 (`−x ≤ 1`) and 3 (`−y ≤ 1`) carry the same auxiliary and
/// residual when the stall is detected, so both predict the same stall
/// length.
pub fn tie_instance() -> (Polyhedron, Vector) {
    let poly = Polyhedron::new(vec![
        HalfSpace::from_slice(&[1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[-1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, 1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, -1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[1.0, 1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[-1.0, -1.0], -1.0).unwrap(),
    ])
    .unwrap();
    (poly, Vector::from_column_slice(&[-20.0, -20.0]))
}

/// Box `[−1,1]²` with the line `x + y/2 = 1/2` and start `(−17, −3)`.
///
/// Stalls twice: first on the bottom face (half-space 3), then on the left
/// face (half-space 1).
pub fn multi_stall_instance() -> (Polyhedron, Vector) {
    let poly = Polyhedron::new(vec![
        HalfSpace::from_slice(&[1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[-1.0, 0.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, 1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[0.0, -1.0], 1.0).unwrap(),
        HalfSpace::from_slice(&[1.0, 0.5], 0.5).unwrap(),
        HalfSpace::from_slice(&[-1.0, -0.5], -0.5).unwrap(),
    ])
    .unwrap();
    (poly, Vector::from_column_slice(&[-17.0, -3.0]))
}

/// Applies `x ↦ s·R(θ)x + t` to a planar instance, keeping the ordering.
pub fn transform_planar(poly: &Polyhedron, x0: &Vector, scale: f64, theta: f64, shift: [f64; 2]) -> (Polyhedron, Vector) {
    let (s, c) = theta.sin_cos();
    let rot = |v: &Vector| Vector::from_column_slice(&[c * v[0] - s * v[1], s * v[0] + c * v[1]]);
    let t = Vector::from_column_slice(&shift);
    let halfspaces = poly
        .iter()
        .map(|h| {
            let a = rot(h.normal());
            let b = scale * h.offset() + a.dot(&t);
            hs(a, b)
        })
        .collect();
    let x = rot(x0) * scale + &t;
    (Polyhedron::new(halfspaces).unwrap(), x)
}

/// Longest brute-force stall length seen by plain Dykstra within the search
/// budget, `None` when no stall is detected.
pub fn longest_stall(poly: &Polyhedron, x0: &Vector) -> Option<u64> {
    let eps = RunOptions::default().eps_stall_abs(x0);
    let mut st = SolverState::new(x0.clone(), poly.len());
    let mut best = None;
    let budget = STALL_SEARCH_CYCLES * poly.len() as u64;
    while st.m() < budget {
        if detect_stall(&st, eps) {
            if let Ok(count) = brute_force_stall_count(&st, poly, eps, STALL_SEARCH_CYCLES) {
                best = best.max(Some(count));
            }
        }
        dykstra_step(&mut st, poly).ok()?;
    }
    best
}

/// Member of the box-and-line family that stalls for at least two cycles.
/// Seed 0 is [`box_line_instance`]; other seeds rotate, scale, and translate
/// it and move the start along the left face direction.
pub fn stall_inducing_instance(seed: u64) -> Result<(Polyhedron, Vector)> {
    if seed == 0 {
        return Ok(box_line_instance());
    }
    let (base, _) = box_line_instance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..STALL_RETRIES {
        let start = Vector::from_column_slice(&[rng.random_range(-30.0..-2.0), rng.random_range(1.05..1.9)]);
        let scale = 10f64.powf(rng.random_range(-1.0..1.0));
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let shift = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let (poly, x0) = transform_planar(&base, &start, scale, theta, shift);
        if longest_stall(&poly, &x0).is_some_and(|len| len >= 2) {
            return Ok((poly, x0));
        }
    }
    Err(Error::GeneratorExhausted {
        attempts: STALL_RETRIES,
    })
}

/// Dispatches on `spec.stall_inducing`.
pub fn instance(spec: &InstanceSpec) -> Result<(Polyhedron, Vector)> {
    spec.validate()?;
    if spec.stall_inducing {
        stall_inducing_instance(spec.seed)
    } else {
        Ok(random_instance(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let spec = InstanceSpec::new(11, 4, 7);
        assert_eq!(random_instance(&spec), random_instance(&spec));
        assert_ne!(random_instance(&spec), random_instance(&InstanceSpec::new(12, 4, 7)));
        assert_eq!(stall_inducing_instance(9).unwrap(), stall_inducing_instance(9).unwrap());
    }

    #[test]
    fn anchor_is_strictly_inside_and_start_outside() {
        for seed in 0..100 {
            let spec = InstanceSpec::new(seed, 1 + seed as usize % 5, 1 + seed as usize % 8);
            let ((poly, x0), z) = random_instance_with_anchor(&spec);
            for h in poly.iter() {
                assert!(h.residual(&z) <= -spec.slack.0 + 1e-12);
            }
            assert!(poly.max_violation(&x0) > 0.0);
        }
    }

    #[test]
    fn multi_stall_instance_jumps_twice() {
        use crate::harness::compare::run_ff_checked;
        use crate::stall::SkipRule;
        let (poly, x0) = multi_stall_instance();
        let (trace, checks) = run_ff_checked(&poly, &x0, &crate::RunOptions::default(), SkipRule::Exact).unwrap();
        let events: Vec<_> = trace.ff_events().map(|(_, e)| (e.n_stall, e.i_stall)).collect();
        assert_eq!(events, vec![(2, 3), (8, 1)]);
        assert!(checks.len() >= 2 && checks.iter().all(|c| c.agrees()), "{checks:?}");
    }

    #[test]
    fn canonical_seed_is_the_box_line_instance() {
        let (poly, x0) = stall_inducing_instance(0).unwrap();
        assert_eq!(x0, Vector::from_column_slice(&[-4.0, 1.4]));
        assert_eq!(poly.len(), 6);
        assert_eq!(longest_stall(&poly, &x0), Some(14));
    }

    #[test]
    fn stall_length_is_scale_invariant() {
        let (poly, x0) = box_line_instance();
        let (scaled, x0_scaled) = transform_planar(&poly, &x0, 10.0, 0.0, [0.0, 0.0]);
        assert_eq!(longest_stall(&scaled, &x0_scaled), Some(14));
    }

    #[test]
    fn translated_variant_still_stalls() {
        let (poly, x0) = box_line_instance();
        let (moved, x0_moved) = transform_planar(&poly, &x0, 1.0, 0.0, [2.5, -1.5]);
        assert!(longest_stall(&moved, &x0_moved).unwrap() >= 2);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(InstanceSpec::new(0, 0, 3).validate().is_err());
        let mut spec = InstanceSpec::new(0, 2, 3);
        spec.slack = (0.0, 1.0);
        assert!(spec.validate().is_err());
        assert!(instance(&InstanceSpec::stall(3)).is_ok());
    }
}
