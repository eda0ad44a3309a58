//! Finite-horizon dynamic problems lifted to static team form.
//!
//! The dynamic game runs for stages `k = 1 … M`:
//!
//! ```text
//!   x(k+1) = A x(k) + B u(k) + w(k)
//!   y_i(k) = C_i x(k) + v_i(k)
//!   u_i(k) = μ_{i,k}(y_i(k))
//! ```
//!
//! with cost `Σ_k [x(k); u(k)]ᵀ S [x(k); u(k)]` over `Σ_k ‖w(k)‖² + ‖v(k)‖²`.
//! Every (player, stage) pair becomes one static team member. States are
//! expanded by the causal convolution
//! `x(t) = A^{t−1} x(1) + Σ_{k<t} A^{t−1−k} (B u(k) + w(k))`, so decisions
//! only reach measurements of later stages.
//!
//! Layouts used throughout:
//! * nature: `[w(0)] w(1) … w(M)`, where `w(0) = x(1)` is present only with
//!   `include_initial_state`; otherwise `x(1) = 0`;
//! * decisions and measurements: stage-major, players in order inside a stage.

use thiserror::Error;

use crate::linalg::{self, Mat, Vector};
use crate::model::{BlockGain, ModelError, Partition, TeamProblem};

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("stage cost: {0}")]
    StageCost(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Finite-horizon LQ team problem with memoryless per-stage information.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicProblem {
    pub a: Mat,
    pub b: Mat,
    /// Per-player measurement matrices `C_i`.
    pub c: Vec<Mat>,
    /// Per-player input sizes; player `i` drives the `i`-th column group of `B`.
    pub input_sizes: Vec<usize>,
    /// `[[Qxx, Qxu], [Qux, Quu]]` on `(x(k), u(k))`.
    pub stage_cost: Mat,
    pub horizon: usize,
    pub include_initial_state: bool,
}

impl DynamicProblem {
    pub fn new(
        a: Mat,
        b: Mat,
        c: Vec<Mat>,
        input_sizes: Vec<usize>,
        stage_cost: Mat,
        horizon: usize,
        include_initial_state: bool,
    ) -> Result<Self, LiftError> {
        let prob = Self {
            a,
            b,
            c,
            input_sizes,
            stage_cost: linalg::symmetrize(&stage_cost),
            horizon,
            include_initial_state,
        };
        if !linalg::is_symmetric(&stage_cost) {
            return Err(LiftError::StageCost("not symmetric".into()));
        }
        prob.check()?;
        Ok(prob)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn players(&self) -> usize {
        self.c.len()
    }

    fn check(&self) -> Result<(), LiftError> {
        if self.horizon < 1 {
            return Err(LiftError::Horizon);
        }
        let nx = self.a.nrows();
        if !self.a.is_square() {
            return Err(LiftError::Dimension(format!("A is {}x{}", self.a.nrows(), self.a.ncols())));
        }
        if self.b.nrows() != nx {
            return Err(LiftError::Dimension(format!("B has {} rows, A has {nx}", self.b.nrows())));
        }
        if self.c.is_empty() {
            return Err(LiftError::Dimension("at least one measurement matrix is required".into()));
        }
        if self.c.len() != self.input_sizes.len() {
            return Err(LiftError::Dimension(format!(
                "{} measurement matrices but {} input groups",
                self.c.len(),
                self.input_sizes.len()
            )));
        }
        if self.input_sizes.iter().sum::<usize>() != self.b.ncols() {
            return Err(LiftError::Dimension(format!(
                "input sizes sum to {}, B has {} columns",
                self.input_sizes.iter().sum::<usize>(),
                self.b.ncols()
            )));
        }
        for (i, ci) in self.c.iter().enumerate() {
            if ci.ncols() != nx || ci.nrows() == 0 {
                return Err(LiftError::Dimension(format!(
                    "C[{i}] is {}x{}, expected p_i x {nx} with p_i >= 1",
                    ci.nrows(),
                    ci.ncols()
                )));
            }
        }
        let s = nx + self.b.ncols();
        if self.stage_cost.shape() != (s, s) {
            return Err(LiftError::Dimension(format!(
                "stage cost is {}x{}, expected {s}x{s}",
                self.stage_cost.nrows(),
                self.stage_cost.ncols()
            )));
        }
        if self.stage_cost.iter().any(|v| !v.is_finite())
            || self.a.iter().chain(self.b.iter()).any(|v| !v.is_finite())
            || self.c.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite())
        {
            return Err(LiftError::Dimension("non-finite entries".into()));
        }
        if !linalg::is_psd(&self.stage_cost) {
            return Err(LiftError::StageCost("not PSD".into()));
        }
        let mu = self.b.ncols();
        if !linalg::is_pd(&linalg::block(&self.stage_cost, nx, nx, mu, mu)) {
            return Err(LiftError::StageCost("Quu block not positive definite".into()));
        }
        Ok(())
    }

    /// Nature dimension of the lifted problem.
    pub fn nature_dim(&self) -> usize {
        self.state_dim() * (self.horizon + usize::from(self.include_initial_state))
    }

    /// Offset of `w(k)` in the lifted nature vector.
    fn w_offset(&self, k: usize) -> usize {
        let nx = self.state_dim();
        if self.include_initial_state {
            nx * k
        } else {
            nx * (k - 1)
        }
    }

    fn p_sizes(&self) -> Vec<usize> {
        self.c.iter().map(|c| c.nrows()).collect()
    }
}

/// Stack the horizon into a static team problem.
pub fn lift_dynamic(dynp: &DynamicProblem) -> Result<TeamProblem, LiftError> {
    dynp.check()?;
    let (nx, mu, big_m) = (dynp.state_dim(), dynp.input_dim(), dynp.horizon);
    let q = dynp.nature_dim();
    let p_sizes = dynp.p_sizes();
    let p_stage: usize = p_sizes.iter().sum();
    let (mtot, ptot) = (mu * big_m, p_stage * big_m);

    // x(t) = phi·w + gamma·u, starting at t = 1
    let mut phi = Mat::zeros(nx, q);
    if dynp.include_initial_state {
        linalg::put_block(&mut phi, 0, 0, &Mat::identity(nx, nx));
    }
    let mut gamma = Mat::zeros(nx, mtot);

    let mut d = Mat::zeros(ptot, mtot);
    let mut e = Mat::zeros(ptot, q);
    let mut full = Mat::zeros(q + mtot, q + mtot);

    for t in 1..=big_m {
        let mut row = p_stage * (t - 1);
        for ci in &dynp.c {
            linalg::put_block(&mut d, row, 0, &(ci * &gamma));
            linalg::put_block(&mut e, row, 0, &(ci * &phi));
            row += ci.nrows();
        }

        // (x(t), u(t)) as a linear map of (w, u)
        let mut map = Mat::zeros(nx + mu, q + mtot);
        linalg::put_block(&mut map, 0, 0, &phi);
        linalg::put_block(&mut map, 0, q, &gamma);
        linalg::put_block(&mut map, nx, q + mu * (t - 1), &Mat::identity(mu, mu));
        full += map.transpose() * &dynp.stage_cost * &map;

        let mut next_phi = &dynp.a * &phi;
        let wo = dynp.w_offset(t);
        for r in 0..nx {
            next_phi[(r, wo + r)] += 1.0;
        }
        let mut next_gamma = &dynp.a * &gamma;
        let bu = linalg::block(&next_gamma, 0, mu * (t - 1), nx, mu) + &dynp.b;
        linalg::put_block(&mut next_gamma, 0, mu * (t - 1), &bu);
        phi = next_phi;
        gamma = next_gamma;
    }

    let m_sizes: Vec<usize> = (0..big_m).flat_map(|_| dynp.input_sizes.iter().copied()).collect();
    let p_all: Vec<usize> = (0..big_m).flat_map(|_| p_sizes.iter().copied()).collect();
    let partition = Partition::new(m_sizes, p_all)?;
    Ok(TeamProblem::new(
        linalg::block(&full, 0, 0, q, q),
        linalg::block(&full, 0, q, q, mtot),
        linalg::block(&full, q, q, mtot, mtot),
        d,
        e,
        partition,
    )?)
}

/// Simulate the dynamic game in the time domain under a lifted block gain.
///
/// `w` uses the lifted nature layout and `v` the stage-major measurement
/// layout. Returns `(cost, Σ‖w‖² + Σ‖v‖²)`.
pub fn simulate(dynp: &DynamicProblem, gain: &BlockGain, w: &Vector, v: &Vector) -> (f64, f64) {
    let (nx, big_m, n_players) = (dynp.state_dim(), dynp.horizon, dynp.players());
    assert_eq!(w.len(), dynp.nature_dim(), "nature length");
    assert_eq!(gain.blocks().len(), big_m * n_players, "one block per (stage, player)");

    let mut x = if dynp.include_initial_state {
        w.rows(0, nx).into_owned()
    } else {
        Vector::zeros(nx)
    };
    let mut cost = 0.0;
    let mut v_off = 0;
    for t in 1..=big_m {
        let mut u = Vec::with_capacity(dynp.input_dim());
        for (i, ci) in dynp.c.iter().enumerate() {
            let pi = ci.nrows();
            let y = ci * &x + v.rows(v_off, pi);
            v_off += pi;
            let ui = &gain.blocks()[(t - 1) * n_players + i] * y;
            u.extend(ui.iter().copied());
        }
        let u = Vector::from_vec(u);
        let xu = Vector::from_iterator(nx + u.len(), x.iter().chain(u.iter()).copied());
        cost += linalg::quad_form(&dynp.stage_cost, &xu);
        x = &dynp.a * &x + &dynp.b * &u + w.rows(dynp.w_offset(t), nx);
    }
    assert_eq!(v_off, v.len(), "noise length");
    (cost, w.norm_squared() + v.norm_squared())
}
