//! Ground truth that shares no code path with the iterative solvers.
//!
//! [`oracle_project`] solves the least-distance problem exactly by
//! enumerating candidate active sets and solving each KKT system;
//! [`brute_force_stall_count`] replays plain Dykstra to measure a stall.

mod brute;
pub mod generate;

pub use brute::{brute_force_stall, brute_force_stall_count, BruteForceStall};
pub use generate::{
    box_line_instance, multi_stall_instance, random_instance, stall_inducing_instance, tie_instance, InstanceSpec,
};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Polyhedron, Vector};

/// Largest half-space count accepted by the enumeration (2ⁿ subsets).
pub const MAX_ENUMERATION: usize = 12;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x_star: Vector,
    /// Half-spaces treated as equalities in the winning KKT system.
    pub active_set: Vec<usize>,
    /// Multipliers matching `active_set`.
    pub multipliers: Vec<f64>,
}

/// Post-hoc KKT certificate of an [`OracleSolution`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// Largest positive constraint residual.
    pub primal: f64,
    /// `‖x° − x⋆ − Σ λ_i a_i‖`.
    pub stationarity: f64,
    /// Largest negative multiplier magnitude.
    pub dual: f64,
    /// Largest `|a_iᵀx⋆ − b_i|` over the active set.
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.stationarity).max(self.dual).max(self.complementarity)
    }
}

impl OracleSolution {
    /// Recomputes the KKT residuals from scratch.
    pub fn kkt_residuals(&self, poly: &Polyhedron, x0: &Vector) -> KktResiduals {
        let primal = poly.max_violation(&self.x_star).max(0.0);
        let mut grad = x0 - &self.x_star;
        for (&i, &lam) in self.active_set.iter().zip(&self.multipliers) {
            grad -= poly.get(i).normal() * lam;
        }
        let dual = self.multipliers.iter().fold(0.0f64, |acc, &l| acc.max(-l));
        let complementarity = self
            .active_set
            .iter()
            .map(|&i| poly.get(i).residual(&self.x_star).abs())
            .fold(0.0, f64::max);
        KktResiduals {
            primal,
            stationarity: grad.norm(),
            dual,
            complementarity,
        }
    }
}

/// Solves `min ½‖x − x°‖²` with `x_i` active for every `i ∈ subset`.
/// Returns `None` when the normals of the subset are linearly dependent.
fn solve_equality_subset(poly: &Polyhedron, x0: &Vector, subset: &[usize]) -> Option<(Vector, Vec<f64>)> {
    if subset.is_empty() {
        return Some((x0.clone(), Vec::new()));
    }
    let p = poly.dim();
    if subset.len() > p {
        return None;
    }
    let at = DMatrix::from_fn(p, subset.len(), |row, col| poly.get(subset[col]).normal()[row]);
    let r = at.clone().qr().r();
    let diag_max = (0..subset.len()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..subset.len()).any(|i| r[(i, i)].abs() <= RANK_TOL * diag_max.max(1.0)) {
        return None;
    }
    let gram = at.transpose() * &at;
    let rhs = Vector::from_iterator(subset.len(), subset.iter().map(|&i| poly.get(i).residual(x0)));
    let lambda = gram.cholesky()?.solve(&rhs);
    let x = x0 - &at * &lambda;
    Some((x, lambda.iter().copied().collect()))
}

/// Exact Euclidean projection of `x0` onto the polyhedron by active-set
/// enumeration.
pub fn oracle_project(poly: &Polyhedron, x0: &Vector) -> Result<OracleSolution> {
    let n = poly.len();
    if n > MAX_ENUMERATION {
        return Err(Error::EnumerationGuard {
            n,
            max: MAX_ENUMERATION,
        });
    }
    poly.check_point(x0)?;

    let mut best: Option<(f64, OracleSolution)> = None;
    for mask in 0u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some((x, lambda)) = solve_equality_subset(poly, x0, &subset) else {
            continue;
        };
        if lambda.iter().any(|&l| l < -DUAL_TOL) || poly.max_violation(&x) > PRIMAL_TOL {
            continue;
        }
        let dist = (&x - x0).norm_squared();
        let better = match &best {
            None => true,
            Some((d, sol)) => dist < *d || (dist == *d && subset.len() < sol.active_set.len()),
        };
        if better {
            best = Some((
                dist,
                OracleSolution {
                    x_star: x,
                    active_set: subset,
                    multipliers: lambda,
                },
            ));
        }
    }
    best.map(|(_, sol)| sol).ok_or(Error::Infeasible)
}
