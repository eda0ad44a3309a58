//! Built-in benchmark problems with known answers.
//!
//! * [`witsenhausen`]: the deterministic two-stage Witsenhausen problem,
//!   supplied directly in γ-form since the first measurement is noise free.
//! * [`multistage`]: an `m`-stage relay where each stage forwards a noisy
//!   copy of the previous decision and the last one should reproduce `x0`.
//! * [`decoupled`]: no signaling and no cross cost, so `K = 0` is optimal
//!   and the value is `λ_max(Qww)`.

use thiserror::Error;

use crate::lift::DynamicProblem;
use crate::linalg::{Mat, Vector};
use crate::model::{BlockGain, GammaFormProblem, ModelError, Partition, TeamProblem};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("k2 must be positive and finite, got {0}")]
    K2(f64),
    #[error("multistage needs m >= 2, got {0}")]
    Stages(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Deterministic Witsenhausen problem with control weight `k2`.
///
/// Coordinates are `(y1, y2, u1, u2)` with `y1 = x0` and
/// `y2 = x0 + u1 + w`; the game ratio is
/// `(k2·u1² + (y1 + u1 − u2)²) / (y1² + (y1 + u1 − y2)²)`, so that `Q − γR`
/// is
///
/// ```text
///   [[1−2γ,  γ,   1−γ,      −1],
///    [γ,    −γ,   γ,         0],
///    [1−γ,   γ,   1+k2−γ,   −1],
///    [−1,    0,   −1,        1]]
/// ```
pub fn witsenhausen(k2: f64) -> Result<GammaFormProblem, CorpusError> {
    if !(k2.is_finite() && k2 > 0.0) {
        return Err(CorpusError::K2(k2));
    }
    #[rustfmt::skip]
    let q = Mat::from_row_slice(4, 4, &[
         1.0, 0.0,  1.0,      -1.0,
         0.0, 0.0,  0.0,       0.0,
         1.0, 0.0,  1.0 + k2, -1.0,
        -1.0, 0.0, -1.0,       1.0,
    ]);
    #[rustfmt::skip]
    let r = Mat::from_row_slice(4, 4, &[
         2.0, -1.0,  1.0, 0.0,
        -1.0,  1.0, -1.0, 0.0,
         1.0, -1.0,  1.0, 0.0,
         0.0,  0.0,  0.0, 0.0,
    ]);
    Ok(GammaFormProblem::new(q, r, 0, Partition::scalar(2)?)?)
}

/// Run the Witsenhausen recursion from nature `(x0, w)` with scalar gains.
///
/// Returns `(k2·u1² + (x1 − u2)², x0² + w²)`.
pub fn witsenhausen_simulate(k2: f64, gain: &BlockGain, x0: f64, w: f64) -> (f64, f64) {
    let (k1, k2_gain) = scalar_pair(gain);
    let y1 = x0;
    let u1 = k1 * y1;
    let x1 = x0 + u1;
    let y2 = x1 + w;
    let u2 = k2_gain * y2;
    (k2 * u1 * u1 + (x1 - u2).powi(2), x0 * x0 + w * w)
}

/// Recover nature `(x0, w)` from measurements `(y1, y2)` under `gain`.
pub fn witsenhausen_nature(gain: &BlockGain, y: &Vector) -> (f64, f64) {
    let (k1, _) = scalar_pair(gain);
    let x0 = y[0];
    (x0, y[1] - x0 - k1 * x0)
}

fn scalar_pair(gain: &BlockGain) -> (f64, f64) {
    let b = gain.blocks();
    assert!(b.len() == 2 && b.iter().all(|k| k.shape() == (1, 1)), "two scalar gains expected");
    (b[0][(0, 0)], b[1][(0, 0)])
}

/// The `m`-stage relay as a static team problem.
///
/// Nature is `x0` plus the measurement noise `v_0 … v_{m−1}`; stage `k`
/// measures `y_k = x_k + v_k` with `x_{k+1} = u_k`, and the cost is
/// `(u_{m−1} − x0)² + Σ_{k ≤ m−2} u_k²`.
pub fn multistage(m: usize) -> Result<TeamProblem, CorpusError> {
    if m < 2 {
        return Err(CorpusError::Stages(m));
    }
    let qww = Mat::from_element(1, 1, 1.0);
    let mut qwu = Mat::zeros(1, m);
    qwu[(0, m - 1)] = -1.0;
    let quu = Mat::identity(m, m);
    let mut d = Mat::zeros(m, m);
    for k in 1..m {
        d[(k, k - 1)] = 1.0;
    }
    let mut e = Mat::zeros(m, 1);
    e[(0, 0)] = 1.0;
    Ok(TeamProblem::new(qww, qwu, quu, d, e, Partition::scalar(m)?)?)
}

/// Time-domain run of the relay: returns `(cost, x0² + Σ v_k²)`.
pub fn multistage_simulate(gain: &BlockGain, x0: f64, v: &[f64]) -> (f64, f64) {
    let m = v.len();
    let gains: Vec<f64> = gain.blocks().iter().map(|b| b[(0, 0)]).collect();
    assert_eq!(gains.len(), m, "one gain per stage");
    let mut x = x0;
    let mut cost = 0.0;
    for k in 0..m {
        let u = gains[k] * (x + v[k]);
        if k + 2 <= m {
            cost += u * u;
        }
        x = u;
    }
    cost += (x - x0).powi(2);
    (cost, x0 * x0 + v.iter().map(|v| v * v).sum::<f64>())
}

/// Dynamic form of the relay's signaling structure: `x(k+1) = u(k) + w(k)`,
/// `y(k) = x(k) + v(k)`, stage cost `u(k)²`, with `x(1)` drawn by nature.
///
/// Lifting it reproduces the relay's `D` and `Quu = I`; the terminal
/// tracking term of [`multistage`] has no stage-cost equivalent.
pub fn multistage_dynamic(m: usize) -> Result<DynamicProblem, CorpusError> {
    if m < 2 {
        return Err(CorpusError::Stages(m));
    }
    let one = Mat::from_element(1, 1, 1.0);
    DynamicProblem::new(
        Mat::zeros(1, 1),
        one.clone(),
        vec![one],
        vec![1],
        Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        m,
        true,
    )
    .map_err(|e| match e {
        crate::lift::LiftError::Model(m) => CorpusError::Model(m),
        other => unreachable!("static data: {other}"),
    })
}

/// `Qww = diag(qww_diag)`, `Qwu = 0`, `D = 0`, `E = 0`, `Quu = I`, with
/// `players` scalar decision makers.
pub fn decoupled(qww_diag: &[f64], players: usize) -> Result<TeamProblem, CorpusError> {
    let q = qww_diag.len();
    Ok(TeamProblem::new(
        Mat::from_diagonal(&Vector::from_column_slice(qww_diag)),
        Mat::zeros(q, players),
        Mat::identity(players, players),
        Mat::zeros(players, players),
        Mat::zeros(players, q),
        Partition::scalar(players)?,
    )?)
}
