//! Independent evaluation of a fixed linear strategy.
//!
//! For `u = KCx` the game ratio becomes a generalized Rayleigh quotient of
//! the closed-loop pencil `(GJ, GF) = ([I; KC]ᵀ Q [I; KC], [I; KC]ᵀ R [I; KC])`.
//! Its largest generalized eigenvalue is the exact worst-case ratio, and the
//! eigenvector is an adversarial witness. None of this goes through the
//! Schur-complement LMI, so it can certify what the solver returns.

use thiserror::Error;

use crate::linalg::{self, Mat, PencilMax, Vector};
use crate::model::{stack, to_gamma_form, BlockGain, GainError, GammaFormProblem, TeamProblem};

/// Relative threshold for `σ_min(I − DK)` in [`well_posed`].
pub const WELL_POSED_RTOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error("ill-posed interconnection: I - DK is singular")]
    IllPosed,
    #[error("disturbance (w, v) must be nonzero")]
    ZeroDisturbance,
    #[error("worst-case ratio is unbounded")]
    Unbounded,
    #[error("disturbance has wrong length: {0}")]
    Length(String),
}

/// `(GJ, GF)` for a fixed gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopPencil {
    pub gj: Mat,
    pub gf: Mat,
}

impl ClosedLoopPencil {
    pub fn new(prob: &GammaFormProblem, gain: &BlockGain) -> Result<Self, GainError> {
        gain.check(&prob.partition)?;
        let (n, m) = (prob.n(), prob.m());
        let mut t = Mat::zeros(n + m, n);
        linalg::put_block(&mut t, 0, 0, &Mat::identity(n, n));
        linalg::put_block(&mut t, n, 0, &(gain.assemble() * prob.c()));
        let tt = t.transpose();
        Ok(Self {
            gj: linalg::symmetrize(&(&tt * &prob.q_form * &t)),
            gf: linalg::symmetrize(&(&tt * &prob.r_form * &t)),
        })
    }

    pub fn max_ratio(&self) -> PencilMax {
        linalg::pencil_max(&self.gj, &self.gf)
    }
}

/// Worst-case ratio `sup_x xᵀGJx / xᵀGFx` achieved by `gain`; `+∞` if unbounded.
pub fn achieved_gamma(prob: &GammaFormProblem, gain: &BlockGain) -> Result<f64, GainError> {
    Ok(ClosedLoopPencil::new(prob, gain)?.max_ratio().value())
}

/// A maximizing point in `(x, u)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointWitness {
    /// `x = (w, y)`, unit norm.
    pub x: Vector,
    pub u: Vector,
    pub ratio: f64,
    /// The `w` part is negligible (`‖w‖ < 1e-8·‖x‖`), i.e. the sup is
    /// approached along directions the `w ≠ 0` restriction would exclude.
    pub w_degenerate: bool,
}

pub fn worst_case_point(prob: &GammaFormProblem, gain: &BlockGain) -> Result<PointWitness, OracleError> {
    let pencil = ClosedLoopPencil::new(prob, gain)?;
    let n = prob.n();
    match pencil.max_ratio() {
        PencilMax::Unbounded => Err(OracleError::Unbounded),
        PencilMax::Degenerate => Ok(PointWitness {
            x: Vector::zeros(n),
            u: Vector::zeros(prob.m()),
            ratio: 0.0,
            w_degenerate: true,
        }),
        PencilMax::Finite { value, vector } => {
            let u = gain.assemble() * prob.c() * &vector;
            let w_norm = vector.rows(0, prob.q).norm();
            Ok(PointWitness {
                w_degenerate: w_norm < 1e-8 * vector.norm(),
                x: vector,
                u,
                ratio: value,
            })
        }
    }
}

/// `J/F` at an arbitrary `x` under `u = KCx`.
pub fn point_ratio(prob: &GammaFormProblem, gain: &BlockGain, x: &Vector) -> Result<f64, GainError> {
    gain.check(&prob.partition)?;
    let u = gain.assemble() * prob.c() * x;
    let xu = stack(x, &u);
    Ok(linalg::quad_form(&prob.q_form, &xu) / linalg::quad_form(&prob.r_form, &xu))
}

/// Adversarial disturbance in the original `(w, v)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub w: Vector,
    pub v: Vector,
    pub ratio: f64,
    pub w_degenerate: bool,
}

/// Worst-case `(w, v)` for a team problem, with `v = y − DKy − Ew`.
pub fn worst_case_witness(prob: &TeamProblem, gain: &BlockGain) -> Result<Witness, OracleError> {
    let gform = to_gamma_form(prob);
    let pt = worst_case_point(&gform, gain)?;
    let q = prob.q();
    let w = pt.x.rows(0, q).into_owned();
    let y = pt.x.rows(q, prob.p()).into_owned();
    let v = &y - &prob.d * gain.assemble() * &y - &prob.e * &w;
    Ok(Witness {
        w,
        v,
        ratio: pt.ratio,
        w_degenerate: pt.w_degenerate,
    })
}

/// `I − DK`.
fn loop_matrix(prob: &TeamProblem, gain: &BlockGain) -> Mat {
    let p = prob.p();
    Mat::identity(p, p) - &prob.d * gain.assemble()
}

/// `σ_min(I − DK) > 1e-10 · σ_max(I − DK)`.
pub fn well_posed(prob: &TeamProblem, gain: &BlockGain) -> bool {
    if gain.check(&prob.partition).is_err() {
        return false;
    }
    let sv = loop_matrix(prob, gain).singular_values();
    let hi = sv.max();
    let lo = sv.min();
    hi > 0.0 && lo > WELL_POSED_RTOL * hi
}

/// Close the measurement loop `y = DKy + Ew + v` and return
/// `(L(w, Ky), ‖w‖² + ‖v‖²)`.
pub fn closed_loop_terms(
    prob: &TeamProblem,
    gain: &BlockGain,
    w: &Vector,
    v: &Vector,
) -> Result<(f64, f64), OracleError> {
    gain.check(&prob.partition)?;
    if w.len() != prob.q() || v.len() != prob.p() {
        return Err(OracleError::Length(format!(
            "w has {} entries (expected {}), v has {} (expected {})",
            w.len(),
            prob.q(),
            v.len(),
            prob.p()
        )));
    }
    if !well_posed(prob, gain) {
        return Err(OracleError::IllPosed);
    }
    let rhs = &prob.e * w + v;
    let y = loop_matrix(prob, gain).lu().solve(&rhs).ok_or(OracleError::IllPosed)?;
    let u = gain.assemble() * y;
    Ok((prob.cost(w, &u), w.norm_squared() + v.norm_squared()))
}

/// `L(w, u) / (‖w‖² + ‖v‖²)` for a sampled disturbance.
pub fn sample_ratio(prob: &TeamProblem, gain: &BlockGain, w: &Vector, v: &Vector) -> Result<f64, OracleError> {
    let (num, den) = closed_loop_terms(prob, gain, w, v)?;
    if den == 0.0 {
        return Err(OracleError::ZeroDisturbance);
    }
    Ok(num / den)
}
