//! Machine-readable reports.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use teamlmi::model::TraceEntry;

use crate::files::Rows;

/// A float that may be infinite. Finite values are JSON numbers; `±∞` and
/// NaN are written as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub f64);

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            v if v.is_nan() => f.write_str("nan"),
            v if v == f64::INFINITY => f.write_str("inf"),
            v if v == f64::NEG_INFINITY => f.write_str("-inf"),
            v => write!(f, "{v:?}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Scalar(v)),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(Scalar(f64::INFINITY)),
                "-inf" => Ok(Scalar(f64::NEG_INFINITY)),
                "nan" => Ok(Scalar(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub gamma: f64,
    pub feasible: bool,
    pub margin: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&TraceEntry> for TraceRecord {
    fn from(t: &TraceEntry) -> Self {
        Self {
            gamma: t.gamma,
            feasible: t.feasible,
            margin: t.margin,
            iterations: t.iterations,
            converged: t.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub seed: u64,
    pub gamma_tol: f64,
    pub feas_tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
    pub inner_iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReportFile {
    pub command: String,
    pub problem_kind: String,
    pub gamma_star: f64,
    pub gamma_bar: Scalar,
    pub gain: Vec<Rows>,
    pub gain_norm: f64,
    pub lmi_margin: f64,
    pub feas_threshold: f64,
    pub oracle_gamma: Scalar,
    /// `null` for γ-form input, which has no measurement loop to close.
    pub well_posed: Option<bool>,
    pub bisection_trace: Vec<TraceRecord>,
    pub solver: SolverMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    /// `(w, y)` point of the γ-form.
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Original-coordinate disturbance, when the problem has them.
    pub w: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub ratio: f64,
    pub w_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReportFile {
    pub command: String,
    pub problem_kind: String,
    pub gain: Vec<Rows>,
    pub oracle_gamma: Scalar,
    pub gamma_bar: Scalar,
    pub well_posed: Option<bool>,
    /// `null` when the ratio is unbounded.
    pub witness: Option<WitnessRecord>,
    /// LMI margin at γ = oracle_gamma; `null` unless that γ is below `γ̄`.
    pub lmi_margin: Option<f64>,
    pub feas_threshold: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_round_trip() {
        for v in [0.1, -3.5e-300, 1.0 / 3.0, f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&Scalar(v)).unwrap();
            assert_eq!(serde_json::from_str::<Scalar>(&s).unwrap(), Scalar(v));
        }
        assert_eq!(serde_json::to_string(&Scalar(f64::INFINITY)).unwrap(), "\"inf\"");
        assert!(serde_json::from_str::<Scalar>("\"big\"").is_err());
    }
}
