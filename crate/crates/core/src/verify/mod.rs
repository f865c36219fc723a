//! Verification suite: the structural identities of the orthogonal spaces
//! checked numerically over a grid of dimensions, weights and degrees, the
//! one-dimensional Jacobi cross-checks and the Markov constant sweep.

mod jacobi;
mod markov;
mod suite;

use serde::Serialize;

pub use jacobi::{jacobi_basis_crosscheck, jacobi_identity_checks, jacobi_reference};
pub use markov::{
    markov_constant, markov_sweep, radial_bits, radial_markov_constant, radial_markov_constants, radial_markov_sweep,
    seminorm_constant, MarkovSweep,
};
pub use suite::{
    negative_control_basis, ops_checks, precision_scaling, run_identity_suite, ScalingReport, SuiteConfig, SuiteOutcome,
};

/// Tolerance for identities (relative).
pub const EQUALITY_TOLERANCE: f64 = 1e-9;
/// Absolute slack for inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// Doubling the precision must shrink a residual by at least this factor.
pub const SCALING_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// An identity, exact up to rounding.
    Equality,
    /// An upper bound.
    Inequality,
    /// Holds by construction; residual is zero or a hard failure.
    Structural,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub check: String,
    pub kind: CheckKind,
    pub d: usize,
    pub alpha: f64,
    pub degree: i64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub precision_bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerifyReport {
    pub fn new(check: &str, kind: CheckKind, d: usize, alpha: f64, degree: i64, residual: f64, bits: u32) -> Self {
        let tolerance = match kind {
            CheckKind::Equality | CheckKind::Structural => EQUALITY_TOLERANCE,
            CheckKind::Inequality => INEQUALITY_SLACK,
        };
        Self {
            check: check.to_string(),
            kind,
            d,
            alpha,
            degree,
            residual,
            tolerance,
            pass: residual <= tolerance,
            precision_bits: bits,
            note: None,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.residual <= tolerance;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// A grid point that could not be evaluated at all.
    pub fn failure(check: &str, d: usize, alpha: f64, degree: i64, message: String) -> Self {
        Self {
            check: check.to_string(),
            kind: CheckKind::Structural,
            d,
            alpha,
            degree,
            residual: f64::INFINITY,
            tolerance: EQUALITY_TOLERANCE,
            pass: false,
            precision_bits: 0,
            note: Some(message),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_follows_tolerance() {
        let ok = VerifyReport::new("x", CheckKind::Equality, 1, 0.0, 2, 1e-10, 64);
        let bad = VerifyReport::new("x", CheckKind::Inequality, 1, 0.0, 2, 1e-10, 64);
        assert!(ok.pass && !bad.pass);
        let line = ok.to_json_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["check"], "x");
        assert_eq!(v["kind"], "equality");
        assert!(v.get("note").is_none());
    }
}
