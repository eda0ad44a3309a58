//! The γ-parameterized quadratic form and its Schur-complement LMI.
//!
//! For fixed γ write `Q − γR` in blocks on `(x, u)`:
//!
//! ```text
//!   [[Qxx(γ), Qxu(γ)], [Qux(γ), Quu(γ)]] = Q − γR
//! ```
//!
//! A gain `K` achieves γ iff `[I; KC]ᵀ (Q − γR) [I; KC] ⪯ 0`. When
//! `Quu(γ) ≻ 0` this is equivalent, by a Schur complement, to
//!
//! ```text
//!   [[Qxx + Qxu·KC + (KC)ᵀ·Qux,  (KC)ᵀ       ],
//!    [KC,                        −Quu(γ)⁻¹   ]]  ⪯ 0
//! ```
//!
//! which is affine in the entries of `K`.

use thiserror::Error;

use crate::linalg::{self, Mat};
use crate::model::{BlockGain, GainError, GammaFormProblem};

/// Relative feasibility slack: a margin `≤ FEAS_RTOL · max(1, ‖M0‖)` counts as `⪯ 0`.
pub const FEAS_RTOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LmiError {
    #[error("gamma must be finite, got {0}")]
    NonFiniteGamma(f64),
    #[error("Quu(gamma) is not positive definite at gamma = {gamma} (gamma >= gamma_bar or invalid problem)")]
    QuuNotPd { gamma: f64 },
    #[error(transparent)]
    Gain(#[from] GainError),
}

/// `Q − γR` split into `(x, u)` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix {
    pub qxx: Mat,
    pub qxu: Mat,
    pub quu: Mat,
    pub gamma: f64,
    /// Whether `Quu(γ) ≻ 0`, i.e. the Schur form is available.
    pub quu_pd: bool,
}

impl GammaMatrix {
    /// Reassemble the full symmetric matrix.
    pub fn full(&self) -> Mat {
        let (n, m) = (self.qxx.nrows(), self.quu.nrows());
        let mut out = Mat::zeros(n + m, n + m);
        linalg::put_block(&mut out, 0, 0, &self.qxx);
        linalg::put_block(&mut out, 0, n, &self.qxu);
        linalg::put_block(&mut out, n, 0, &self.qxu.transpose());
        linalg::put_block(&mut out, n, n, &self.quu);
        out
    }
}

pub fn assemble_gamma_matrix(prob: &GammaFormProblem, gamma: f64) -> GammaMatrix {
    let (n, m) = (prob.n(), prob.m());
    let g = linalg::symmetrize(&(&prob.q_form - &prob.r_form * gamma));
    let quu = linalg::block(&g, n, n, m, m);
    GammaMatrix {
        qxx: linalg::block(&g, 0, 0, n, n),
        qxu: linalg::block(&g, 0, n, n, m),
        quu_pd: linalg::is_pd(&quu),
        quu,
        gamma,
    }
}

fn schur_parts(prob: &GammaFormProblem, gamma: f64) -> Result<(GammaMatrix, Mat), LmiError> {
    if !gamma.is_finite() {
        return Err(LmiError::NonFiniteGamma(gamma));
    }
    let gm = assemble_gamma_matrix(prob, gamma);
    let (inv, _) = linalg::spd_inverse(&gm.quu).ok_or(LmiError::QuuNotPd { gamma })?;
    Ok((gm, inv))
}

/// The Schur-complement LMI matrix at gain `K`, size `(n+m)×(n+m)`.
pub fn schur_lmi(prob: &GammaFormProblem, gain: &BlockGain, gamma: f64) -> Result<Mat, LmiError> {
    gain.check(&prob.partition)?;
    let (gm, quu_inv) = schur_parts(prob, gamma)?;
    let (n, m) = (prob.n(), prob.m());
    let kc = gain.assemble() * prob.c();
    let coupling = &gm.qxu * &kc;
    let top = &gm.qxx + &coupling + coupling.transpose();

    let mut out = Mat::zeros(n + m, n + m);
    linalg::put_block(&mut out, 0, 0, &top);
    linalg::put_block(&mut out, 0, n, &kc.transpose());
    linalg::put_block(&mut out, n, 0, &kc);
    linalg::put_block(&mut out, n, n, &(-quu_inv));
    Ok(linalg::symmetrize(&out))
}

/// `LMI(K) = M0 + Σ_j k_j M_j`, with `k_j` the gain entries in
/// [`BlockGain::entries`] order (player-major, row-major per block).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLmi {
    pub m0: Mat,
    pub basis: Vec<Mat>,
}

impl AffineLmi {
    pub fn dim(&self) -> usize {
        self.m0.nrows()
    }

    pub fn evaluate(&self, entries: &[f64]) -> Mat {
        assert_eq!(entries.len(), self.basis.len(), "gain entry count");
        let mut out = self.m0.clone();
        for (k, mj) in entries.iter().zip(&self.basis) {
            if *k != 0.0 {
                out += mj * *k;
            }
        }
        out
    }

    /// Absolute feasibility threshold `rel · max(1, ‖M0‖)`.
    pub fn threshold(&self, rel: f64) -> f64 {
        rel * linalg::sym_norm(&self.m0).max(1.0)
    }
}

pub fn affine_basis(prob: &GammaFormProblem, gamma: f64) -> Result<AffineLmi, LmiError> {
    let (gm, quu_inv) = schur_parts(prob, gamma)?;
    let (n, m, q) = (prob.n(), prob.m(), prob.q);
    let s = n + m;

    let mut m0 = Mat::zeros(s, s);
    linalg::put_block(&mut m0, 0, 0, &gm.qxx);
    linalg::put_block(&mut m0, n, n, &(-quu_inv));
    let m0 = linalg::symmetrize(&m0);

    let mut basis = Vec::with_capacity(prob.partition.gain_entries());
    let part = &prob.partition;
    for ((&mi, &pi), (u_off, y_off)) in part.m_sizes().iter().zip(part.p_sizes()).zip(part.offsets()) {
        for a in 0..mi {
            for b in 0..pi {
                let (ua, xb) = (u_off + a, q + y_off + b);
                // K = e_ua e_ybᵀ gives KC = e_ua e_xbᵀ
                let mut mj = Mat::zeros(s, s);
                for r in 0..n {
                    mj[(r, xb)] += gm.qxu[(r, ua)];
                    mj[(xb, r)] += gm.qxu[(r, ua)];
                }
                mj[(xb, n + ua)] = 1.0;
                mj[(n + ua, xb)] = 1.0;
                basis.push(mj);
            }
        }
    }
    Ok(AffineLmi { m0, basis })
}

/// `λ_max` of the Schur LMI; `K` is feasible at γ iff this is at most
/// [`feasibility_threshold`].
pub fn feasibility_margin(prob: &GammaFormProblem, gain: &BlockGain, gamma: f64) -> Result<f64, LmiError> {
    Ok(linalg::lambda_max(&schur_lmi(prob, gain, gamma)?))
}

/// `FEAS_RTOL · max(1, ‖M0‖)` at γ.
pub fn feasibility_threshold(prob: &GammaFormProblem, gamma: f64, rel: f64) -> Result<f64, LmiError> {
    let (gm, quu_inv) = schur_parts(prob, gamma)?;
    let norm = linalg::sym_norm(&gm.qxx).max(linalg::sym_norm(&quu_inv));
    Ok(rel * norm.max(1.0))
}
