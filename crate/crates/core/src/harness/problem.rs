use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dykstra::{Mode, RunOptions};
use crate::geometry::{equality_to_halfspaces, HalfSpace, Polyhedron, Vector};
use crate::harness::HarnessError;

/// One constraint `aᵀx ≤ b` (or `aᵀx = b` in `equalities`), as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Optional overrides of [`RunOptions`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_stall: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_feas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_conv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop: Option<bool>,
}

impl OptionsBlock {
    /// Fields set here replace the ones in `base`.
    pub fn apply(&self, mut base: RunOptions) -> RunOptions {
        if let Some(v) = self.max_iter {
            base.max_iter = v;
        }
        if let Some(v) = self.eps_stall {
            base.eps_stall = v;
        }
        if let Some(v) = self.tol_feas {
            base.tol_feas = v;
        }
        if let Some(v) = self.tol_conv {
            base.tol_conv = v;
        }
        if let Some(v) = self.mode {
            base.mode = v;
        }
        if let Some(v) = self.early_stop {
            base.early_stop = v;
        }
        base
    }
}

/// On-disk problem description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub halfspaces: Vec<ConstraintSpec>,
    /// Each equality becomes a `≤`/`≥` pair, appended after `halfspaces`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equalities: Vec<ConstraintSpec>,
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsBlock>,
}

fn parse_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Parse(msg.into())
}

impl ProblemFile {
    pub fn from_instance(poly: &Polyhedron, x0: &Vector) -> Self {
        ProblemFile {
            dim: poly.dim(),
            halfspaces: poly
                .iter()
                .map(|h| ConstraintSpec {
                    a: h.normal().iter().copied().collect(),
                    b: h.offset(),
                })
                .collect(),
            equalities: Vec::new(),
            x0: x0.iter().copied().collect(),
            x_star: None,
            options: None,
        }
    }

    pub fn with_reference(mut self, x_star: &Vector) -> Self {
        self.x_star = Some(x_star.iter().copied().collect());
        self
    }

    fn check_len(&self, what: &str, len: usize) -> Result<(), HarnessError> {
        if len != self.dim {
            return Err(parse_err(format!("{what} has length {len}, expected dim = {}", self.dim)));
        }
        Ok(())
    }

    /// Builds the polyhedron and start point, validating every length.
    pub fn instance(&self) -> Result<(Polyhedron, Vector), HarnessError> {
        if self.dim == 0 {
            return Err(parse_err("dim must be positive"));
        }
        let mut hs = Vec::with_capacity(self.halfspaces.len() + 2 * self.equalities.len());
        for (i, c) in self.halfspaces.iter().enumerate() {
            self.check_len(&format!("halfspaces[{i}].a"), c.a.len())?;
            hs.push(HalfSpace::from_slice(&c.a, c.b).map_err(|e| parse_err(format!("halfspaces[{i}]: {e}")))?);
        }
        for (i, c) in self.equalities.iter().enumerate() {
            self.check_len(&format!("equalities[{i}].a"), c.a.len())?;
            let (le, ge) = equality_to_halfspaces(&c.a, c.b).map_err(|e| parse_err(format!("equalities[{i}]: {e}")))?;
            hs.push(le);
            hs.push(ge);
        }
        if hs.is_empty() {
            return Err(parse_err("at least one constraint is required"));
        }
        self.check_len("x0", self.x0.len())?;
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(parse_err("x0 must be finite"));
        }
        let poly = Polyhedron::new(hs).map_err(|e| parse_err(e.to_string()))?;
        Ok((poly, Vector::from_column_slice(&self.x0)))
    }

    pub fn reference(&self) -> Result<Option<Vector>, HarnessError> {
        match &self.x_star {
            None => Ok(None),
            Some(xs) => {
                self.check_len("x_star", xs.len())?;
                Ok(Some(Vector::from_column_slice(xs)))
            }
        }
    }

    /// Defaults overlaid with the file's options block.
    pub fn run_options(&self) -> RunOptions {
        match &self.options {
            Some(block) => block.apply(RunOptions::default()),
            None => RunOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
    }

    /// Pretty JSON with a trailing newline; numbers round-trip exactly.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files always serialize");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
