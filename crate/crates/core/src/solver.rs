//! Fixed-γ feasibility and the bisection over γ.
//!
//! At fixed γ a gain exists iff `min_K λ_max(LMI(K)) ≤ ε`, where `LMI(K)` is
//! the affine Schur-complement matrix from [`crate::lmi`]. Since `R ⪰ 0`, a
//! gain feasible at γ₁ stays feasible at every γ₂ ∈ (γ₁, γ̄), so the smallest
//! feasible γ can be bracketed by bisection.

use thiserror::Error;

use crate::lmi::{self, LmiError};
use crate::model::{BlockGain, GainError, GammaFormProblem, ModelError, SolveReport, TraceEntry};
use crate::oracle;
use crate::sdp::{self, IpmOptions};

/// The default upper bracket sits this far (relatively) below `γ̄`.
pub const CEILING_BACKOFF: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lmi(#[from] LmiError),
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error("gamma = {gamma} is not below gamma_bar = {gamma_bar}")]
    AboveCeiling { gamma: f64, gamma_bar: f64 },
    #[error("no finite upper bracket: gamma_bar is infinite and the zero gain has unbounded ratio; supply gamma_hi")]
    NoUpperBracket,
    #[error(
        "ceiling assumption may fail: gamma* appears to exceed gamma_bar \
         (no feasible gain at gamma_hi = {gamma_hi}, margin {margin:.3e} > {threshold:.3e})"
    )]
    BracketInfeasible { gamma_hi: f64, margin: f64, threshold: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop bisecting once the bracket is at most this wide.
    pub gamma_tol: f64,
    /// Relative feasibility slack, scaled by `max(1, ‖M0‖)`.
    pub feas_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Relative duality-gap tolerance of the eigenvalue minimization.
    pub inner_tol: f64,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
    /// Recorded for reproducibility; the interior-point method itself is
    /// deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma_tol: 1e-4,
            feas_tol: lmi::FEAS_RTOL,
            max_outer: 60,
            max_inner: 5000,
            inner_tol: 1e-9,
            gamma_lo: None,
            gamma_hi: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        for (name, v) in [
            ("gamma_tol", self.gamma_tol),
            ("feas_tol", self.feas_tol),
            ("inner_tol", self.inner_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolveError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_inner == 0 {
            return Err(SolveError::Config("max_inner must be positive".into()));
        }
        for v in [self.gamma_lo, self.gamma_hi].into_iter().flatten() {
            if !v.is_finite() {
                return Err(SolveError::Config(format!("bracket bounds must be finite, got {v}")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.gamma_lo, self.gamma_hi) {
            if lo >= hi {
                return Err(SolveError::Config(format!("gamma_lo = {lo} must be below gamma_hi = {hi}")));
            }
        }
        Ok(())
    }
}

/// Outcome of one fixed-γ solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub gain: BlockGain,
    /// `λ_max` of the Schur LMI at `gain`, recomputed from scratch.
    pub margin: f64,
    /// Absolute threshold `margin` was compared against.
    pub threshold: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn feasibility_solve(prob: &GammaFormProblem, gamma: f64, cfg: &SolverConfig) -> Result<Feasibility, SolveError> {
    feasibility_solve_from(prob, gamma, cfg, None)
}

/// [`feasibility_solve`] with an optional warm-start gain.
pub fn feasibility_solve_from(
    prob: &GammaFormProblem,
    gamma: f64,
    cfg: &SolverConfig,
    start: Option<&BlockGain>,
) -> Result<Feasibility, SolveError> {
    let gamma_bar = prob.gamma_bar()?;
    if !(gamma < gamma_bar) {
        return Err(SolveError::AboveCeiling { gamma, gamma_bar });
    }
    let affine = lmi::affine_basis(prob, gamma)?;
    let threshold = affine.threshold(cfg.feas_tol);

    let start_entries = match start {
        Some(k) => {
            k.check(&prob.partition)?;
            k.entries()
        }
        None => vec![0.0; prob.partition.gain_entries()],
    };
    let ipm = sdp::minimize_max_eigenvalue(
        &affine,
        &start_entries,
        IpmOptions {
            max_iter: cfg.max_inner,
            tol: cfg.inner_tol,
        },
    );
    if !ipm.converged {
        log::warn!(
            "eigenvalue minimization at gamma = {gamma} stopped after {} iterations without converging",
            ipm.iterations
        );
    }

    let mut gain = BlockGain::from_entries(&prob.partition, &ipm.entries)?;
    let mut margin = lmi::feasibility_margin(prob, &gain, gamma)?;
    if let Some(k) = start {
        let start_margin = lmi::feasibility_margin(prob, k, gamma)?;
        if start_margin < margin {
            gain = k.clone();
            margin = start_margin;
        }
    }
    log::debug!("gamma = {gamma:.10}: margin {margin:.3e}, threshold {threshold:.3e}");
    Ok(Feasibility {
        feasible: margin <= threshold,
        gain,
        margin,
        threshold,
        iterations: ipm.iterations,
        converged: ipm.converged,
    })
}

/// Bisect on γ for the smallest feasible value and its gain.
///
/// The default bracket is `[0, min(γ̄·(1 − 1e-6), ratio of K = 0)]`. The
/// upper end must be feasible; otherwise the ceiling assumption is
/// considered violated and no claim is made.
pub fn bisect_gamma(prob: &GammaFormProblem, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let gamma_bar = prob.gamma_bar()?;
    let zero = BlockGain::zeros(&prob.partition);

    let ceiling = gamma_bar * (1.0 - CEILING_BACKOFF);
    let mut hi = match cfg.gamma_hi {
        Some(h) => {
            if !(h < gamma_bar) {
                return Err(SolveError::AboveCeiling { gamma: h, gamma_bar });
            }
            h
        }
        None => {
            let open_loop = oracle::achieved_gamma(prob, &zero)?;
            let h = ceiling.min(open_loop);
            if !h.is_finite() {
                return Err(SolveError::NoUpperBracket);
            }
            h
        }
    };
    let mut lo = cfg.gamma_lo.unwrap_or(0.0).min(hi);

    let mut trace = Vec::new();
    let mut inner_iterations = 0;
    let mut all_converged = true;
    let mut record = |gamma: f64, f: &Feasibility, trace: &mut Vec<TraceEntry>| {
        inner_iterations += f.iterations;
        all_converged &= f.converged;
        trace.push(TraceEntry {
            gamma,
            feasible: f.feasible,
            margin: f.margin,
            iterations: f.iterations,
            converged: f.converged,
        });
    };

    let top = feasibility_solve_from(prob, hi, cfg, Some(&zero))?;
    record(hi, &top, &mut trace);
    if !top.feasible {
        return Err(SolveError::BracketInfeasible {
            gamma_hi: hi,
            margin: top.margin,
            threshold: top.threshold,
        });
    }
    let mut best = top;

    if lo < hi {
        let bottom = feasibility_solve_from(prob, lo, cfg, Some(&best.gain))?;
        record(lo, &bottom, &mut trace);
        if bottom.feasible {
            hi = lo;
            best = bottom;
        }
    }

    let mut outer = 0;
    while hi - lo > cfg.gamma_tol && outer < cfg.max_outer {
        outer += 1;
        let mid = 0.5 * (lo + hi);
        let probe = feasibility_solve_from(prob, mid, cfg, Some(&best.gain))?;
        record(mid, &probe, &mut trace);
        if probe.feasible {
            hi = mid;
            best = probe;
        } else {
            lo = mid;
        }
    }

    let oracle_gamma = oracle::achieved_gamma(prob, &best.gain)?;
    Ok(SolveReport {
        gamma_star: hi,
        gain_norm: best.gain.norm(),
        gain: best.gain,
        lmi_margin: best.margin,
        feas_threshold: best.threshold,
        oracle_gamma,
        gamma_bar,
        bisection_trace: trace,
        inner_iterations,
        converged: all_converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { gamma_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            gamma_lo: Some(1.0),
            gamma_hi: Some(0.5),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn witsenhausen_feasibility_either_side_of_optimum() {
        let prob = corpus::witsenhausen(0.1).unwrap();
        let cfg = SolverConfig::default();
        let f = feasibility_solve(&prob, 0.095, &cfg).unwrap();
        assert!(f.feasible, "margin {}", f.margin);
        assert!(oracle::achieved_gamma(&prob, &f.gain).unwrap() <= 0.095 + 1e-6);
        let f = feasibility_solve(&prob, 0.05, &cfg).unwrap();
        assert!(!f.feasible, "margin {}", f.margin);
    }

    #[test]
    fn gamma_at_or_above_ceiling_is_rejected() {
        let prob = corpus::witsenhausen(0.1).unwrap();
        let cfg = SolverConfig::default();
        let gbar = prob.gamma_bar().unwrap();
        for g in [gbar, 2.0 * gbar] {
            assert!(matches!(
                feasibility_solve(&prob, g, &cfg),
                Err(SolveError::AboveCeiling { .. })
            ));
        }
    }

    #[test]
    fn zero_cost_problem_is_feasible_with_zero_gain() {
        let prob = corpus::decoupled(&[0.0], 2).unwrap().to_gamma_form();
        let f = feasibility_solve(&prob, 0.5, &SolverConfig::default()).unwrap();
        assert!(f.feasible);
        assert!(f.gain.norm() < 1e-6, "{:?}", f.gain);
    }

    #[test]
    fn zero_cost_bisection_returns_zero() {
        let prob = corpus::decoupled(&[0.0], 2).unwrap().to_gamma_form();
        let rep = bisect_gamma(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(rep.gamma_star, 0.0);
        assert_eq!(rep.oracle_gamma, 0.0);
    }

    #[test]
    fn infeasible_user_bracket_is_reported() {
        let prob = corpus::witsenhausen(0.1).unwrap();
        let cfg = SolverConfig {
            gamma_lo: Some(0.0),
            gamma_hi: Some(0.05),
            ..Default::default()
        };
        assert!(matches!(bisect_gamma(&prob, &cfg), Err(SolveError::BracketInfeasible { .. })));
    }
}
