//! Problem data: the static team game, its γ-form, and block-diagonal gains.
//!
//! A [`TeamProblem`] describes the game
//!
//! ```text
//!   inf_μ  sup_{w ≠ 0, v}  L(w, u) / (‖w‖² + ‖v‖²)
//!   y_i = Σ_j D_ij u_j + E_i w + v_i,   u_i = μ_i(y_i)
//! ```
//!
//! with `L(w, u) = [w; u]ᵀ [[Qww, Qwu], [Qwuᵀ, Quu]] [w; u]`. Eliminating
//! `v = y − Du − Ew` turns the ratio into `J(x, u) / F(x, u)` on the
//! coordinates `x = (w, y)`, which is what [`GammaFormProblem`] stores.

use std::fmt;

use nalgebra::Cholesky;
use thiserror::Error;

use crate::linalg::{self, Mat, SymEigen, Vector};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid problem: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Quu not positive definite; gamma_bar is undefined")]
    QuuNotPd,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A failed standing assumption. Reported as data by the validators.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite { name: &'static str },
    Dimension { detail: String },
    NotSymmetric { name: &'static str, asymmetry: f64 },
    QuuNotPd { lambda_min: f64 },
    CostNotPsd { lambda_min: f64 },
    FormNotPsd { name: &'static str, lambda_min: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { name } => write!(f, "{name} has non-finite entries"),
            Violation::Dimension { detail } => write!(f, "dimension mismatch: {detail}"),
            Violation::NotSymmetric { name, asymmetry } => {
                write!(f, "{name} not symmetric (relative asymmetry {asymmetry:.3e})")
            }
            Violation::QuuNotPd { lambda_min } => {
                write!(f, "Quu not positive definite (lambda_min = {lambda_min:.6e})")
            }
            Violation::CostNotPsd { lambda_min } => {
                write!(f, "full cost matrix not PSD (lambda_min = {lambda_min:.6e})")
            }
            Violation::FormNotPsd { name, lambda_min } => {
                write!(f, "{name} not PSD (lambda_min = {lambda_min:.6e})")
            }
        }
    }
}

/// Decision sizes `m_i` and measurement sizes `p_i`, one pair per player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    m_sizes: Vec<usize>,
    p_sizes: Vec<usize>,
}

impl Partition {
    pub fn new(m_sizes: Vec<usize>, p_sizes: Vec<usize>) -> Result<Self, ModelError> {
        if m_sizes.is_empty() {
            return Err(ModelError::Partition("at least one player is required".into()));
        }
        if m_sizes.len() != p_sizes.len() {
            return Err(ModelError::Partition(format!(
                "{} decision sizes but {} measurement sizes",
                m_sizes.len(),
                p_sizes.len()
            )));
        }
        if m_sizes.iter().chain(&p_sizes).any(|&s| s == 0) {
            return Err(ModelError::Partition("block sizes must be positive".into()));
        }
        Ok(Self { m_sizes, p_sizes })
    }

    /// `n` players with scalar decisions and scalar measurements.
    pub fn scalar(n: usize) -> Result<Self, ModelError> {
        Self::new(vec![1; n], vec![1; n])
    }

    pub fn players(&self) -> usize {
        self.m_sizes.len()
    }

    pub fn m_sizes(&self) -> &[usize] {
        &self.m_sizes
    }

    pub fn p_sizes(&self) -> &[usize] {
        &self.p_sizes
    }

    /// Total decision dimension.
    pub fn m(&self) -> usize {
        self.m_sizes.iter().sum()
    }

    /// Total measurement dimension.
    pub fn p(&self) -> usize {
        self.p_sizes.iter().sum()
    }

    /// Number of free scalar entries in a block-diagonal gain.
    pub fn gain_entries(&self) -> usize {
        self.m_sizes.iter().zip(&self.p_sizes).map(|(m, p)| m * p).sum()
    }

    /// `(row offset, column offset)` of each player's block inside `K`.
    pub fn offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.players());
        let (mut r, mut c) = (0, 0);
        for (m, p) in self.m_sizes.iter().zip(&self.p_sizes) {
            out.push((r, c));
            r += m;
            c += p;
        }
        out
    }
}

/// Static minimax team problem with signaling.
///
/// Fields are public so that raw (possibly invalid) data can be inspected by
/// [`validate_problem`]; use [`TeamProblem::new`] to get a checked and
/// symmetrized instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamProblem {
    pub qww: Mat,
    pub qwu: Mat,
    pub quu: Mat,
    pub d: Mat,
    pub e: Mat,
    pub partition: Partition,
}

impl TeamProblem {
    pub fn new(
        qww: Mat,
        qwu: Mat,
        quu: Mat,
        d: Mat,
        e: Mat,
        partition: Partition,
    ) -> Result<Self, ModelError> {
        let raw = Self { qww, qwu, quu, d, e, partition };
        let violations = validate_problem(&raw);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        Ok(Self {
            qww: linalg::symmetrize(&raw.qww),
            quu: linalg::symmetrize(&raw.quu),
            ..raw
        })
    }

    /// Nature dimension.
    pub fn q(&self) -> usize {
        self.qww.nrows()
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    pub fn p(&self) -> usize {
        self.partition.p()
    }

    /// `[[Qww, Qwu], [Qwuᵀ, Quu]]`.
    pub fn cost_matrix(&self) -> Mat {
        let (q, m) = (self.q(), self.quu.nrows());
        let mut full = Mat::zeros(q + m, q + m);
        linalg::put_block(&mut full, 0, 0, &self.qww);
        linalg::put_block(&mut full, 0, q, &self.qwu);
        linalg::put_block(&mut full, q, 0, &self.qwu.transpose());
        linalg::put_block(&mut full, q, q, &self.quu);
        full
    }

    /// `L(w, u)`.
    pub fn cost(&self, w: &Vector, u: &Vector) -> f64 {
        let wu = Vector::from_iterator(w.len() + u.len(), w.iter().chain(u.iter()).copied());
        linalg::quad_form(&self.cost_matrix(), &wu)
    }

    pub fn gamma_bar(&self) -> Result<f64, ModelError> {
        gamma_bar(self)
    }

    pub fn to_gamma_form(&self) -> GammaFormProblem {
        to_gamma_form(self)
    }
}

fn check_finite(name: &'static str, a: &Mat, out: &mut Vec<Violation>) -> bool {
    if a.iter().all(|v| v.is_finite()) {
        true
    } else {
        out.push(Violation::NonFinite { name });
        false
    }
}

fn check_shape(name: &str, a: &Mat, rows: usize, cols: usize, out: &mut Vec<Violation>) -> bool {
    if a.shape() == (rows, cols) {
        true
    } else {
        out.push(Violation::Dimension {
            detail: format!("{name} is {}x{}, expected {rows}x{cols}", a.nrows(), a.ncols()),
        });
        false
    }
}

fn check_symmetric(name: &'static str, a: &Mat, out: &mut Vec<Violation>) {
    let asym = linalg::relative_asymmetry(a);
    if asym > linalg::SYMMETRY_RTOL {
        out.push(Violation::NotSymmetric { name, asymmetry: asym });
    }
}

/// Check every standing assumption on a team problem.
///
/// Returns an empty list iff the problem is usable: shapes agree with the
/// partition, `Qww` and `Quu` are symmetric up to `1e-10` relative
/// asymmetry, `Quu ≻ 0` and the full cost matrix is PSD. Definiteness is
/// judged on the symmetrized matrices.
pub fn validate_problem(prob: &TeamProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let names: [(&'static str, &Mat); 5] = [
        ("Qww", &prob.qww),
        ("Qwu", &prob.qwu),
        ("Quu", &prob.quu),
        ("D", &prob.d),
        ("E", &prob.e),
    ];
    let mut finite = true;
    for (name, a) in names {
        finite &= check_finite(name, a, &mut out);
    }
    if !finite {
        return out;
    }

    let (m, p) = (prob.partition.m(), prob.partition.p());
    let q = prob.qww.nrows();
    let mut shapes_ok = check_shape("Qww", &prob.qww, q, q, &mut out);
    shapes_ok &= check_shape("Qwu", &prob.qwu, q, m, &mut out);
    shapes_ok &= check_shape("Quu", &prob.quu, m, m, &mut out);
    shapes_ok &= check_shape("D", &prob.d, p, m, &mut out);
    shapes_ok &= check_shape("E", &prob.e, p, q, &mut out);
    if !shapes_ok {
        return out;
    }

    check_symmetric("Qww", &prob.qww, &mut out);
    check_symmetric("Quu", &prob.quu, &mut out);
    if !out.is_empty() {
        return out;
    }

    let quu = SymEigen::new(&linalg::symmetrize(&prob.quu));
    if quu.min() <= linalg::PD_RTOL * quu.norm().max(1.0) {
        out.push(Violation::QuuNotPd { lambda_min: quu.min() });
    }
    let full = SymEigen::new(&linalg::symmetrize(&prob.cost_matrix()));
    if full.min() <= -linalg::PSD_RTOL * full.norm().max(1.0) {
        out.push(Violation::CostNotPsd { lambda_min: full.min() });
    }
    out
}

/// `1 / λ_max(DᵀD, Quu)` via the whitened matrix `L⁻¹ DᵀD L⁻ᵀ`, `Quu = LLᵀ`.
///
/// This is the infimum of `uᵀQuu u / uᵀDᵀDu` over `Du ≠ 0`, and `+∞` when
/// `D = 0`.
pub fn gamma_bar(prob: &TeamProblem) -> Result<f64, ModelError> {
    whitened_ceiling(&prob.quu, &(prob.d.transpose() * &prob.d))
}

/// `1 / λ_max(signal, weight)` for `weight ≻ 0`, `signal ⪰ 0`.
pub(crate) fn whitened_ceiling(weight: &Mat, signal: &Mat) -> Result<f64, ModelError> {
    if !linalg::is_pd(weight) {
        return Err(ModelError::QuuNotPd);
    }
    if weight.nrows() == 0 || signal.iter().all(|&v| v == 0.0) {
        return Ok(f64::INFINITY);
    }
    let chol = Cholesky::new(linalg::symmetrize(weight)).ok_or(ModelError::QuuNotPd)?;
    let l = chol.l();
    // Y = L⁻¹ S L⁻ᵀ, two triangular solves
    let left = l
        .solve_lower_triangular(signal)
        .ok_or(ModelError::QuuNotPd)?;
    let both = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(ModelError::QuuNotPd)?;
    let top = linalg::lambda_max(&linalg::symmetrize(&both));
    if top <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / top)
    }
}

/// The ratio `J(x,u) / F(x,u)` on `x = (w, y)`, `u`, with `y = Cx`.
///
/// `q_form` and `r_form` are `(n+m)×(n+m)` with `n = q + p`; coordinates are
/// ordered `(w, y, u)`. `C = [0 I]` selects `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaFormProblem {
    pub q_form: Mat,
    pub r_form: Mat,
    pub q: usize,
    pub partition: Partition,
}

impl GammaFormProblem {
    pub fn new(q_form: Mat, r_form: Mat, q: usize, partition: Partition) -> Result<Self, ModelError> {
        let raw = Self { q_form, r_form, q, partition };
        let violations = raw.validate();
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        Ok(Self {
            q_form: linalg::symmetrize(&raw.q_form),
            r_form: linalg::symmetrize(&raw.r_form),
            ..raw
        })
    }

    pub fn p(&self) -> usize {
        self.partition.p()
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    /// Dimension of `x = (w, y)`.
    pub fn n(&self) -> usize {
        self.q + self.p()
    }

    /// The selector `C` with `y = Cx`.
    pub fn c(&self) -> Mat {
        let (p, n) = (self.p(), self.n());
        let mut c = Mat::zeros(p, n);
        for i in 0..p {
            c[(i, self.q + i)] = 1.0;
        }
        c
    }

    pub fn q_uu(&self) -> Mat {
        let (n, m) = (self.n(), self.m());
        linalg::block(&self.q_form, n, n, m, m)
    }

    pub fn r_uu(&self) -> Mat {
        let (n, m) = (self.n(), self.m());
        linalg::block(&self.r_form, n, n, m, m)
    }

    /// `1 / λ_max(R_uu, Q_uu)`; reduces to the team definition on
    /// problems built by [`to_gamma_form`].
    pub fn gamma_bar(&self) -> Result<f64, ModelError> {
        whitened_ceiling(&self.q_uu(), &self.r_uu())
    }

    /// `[x; u]ᵀ Q [x; u]`.
    pub fn numerator(&self, x: &Vector, u: &Vector) -> f64 {
        linalg::quad_form(&self.q_form, &stack(x, u))
    }

    /// `[x; u]ᵀ R [x; u]`.
    pub fn denominator(&self, x: &Vector, u: &Vector) -> f64 {
        linalg::quad_form(&self.r_form, &stack(x, u))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut finite = check_finite("Q", &self.q_form, &mut out);
        finite &= check_finite("R", &self.r_form, &mut out);
        if !finite {
            return out;
        }
        let s = self.n() + self.m();
        let mut shapes_ok = check_shape("Q", &self.q_form, s, s, &mut out);
        shapes_ok &= check_shape("R", &self.r_form, s, s, &mut out);
        if !shapes_ok {
            return out;
        }
        check_symmetric("Q", &self.q_form, &mut out);
        check_symmetric("R", &self.r_form, &mut out);
        if !out.is_empty() {
            return out;
        }
        let q_eig = SymEigen::new(&linalg::symmetrize(&self.q_form));
        if q_eig.min() <= -linalg::PSD_RTOL * q_eig.norm().max(1.0) {
            out.push(Violation::FormNotPsd { name: "Q", lambda_min: q_eig.min() });
        }
        let r_eig = SymEigen::new(&linalg::symmetrize(&self.r_form));
        if r_eig.min() <= -linalg::PSD_RTOL * r_eig.norm().max(1.0) {
            out.push(Violation::FormNotPsd { name: "R", lambda_min: r_eig.min() });
        }
        let quu = SymEigen::new(&linalg::symmetrize(&self.q_uu()));
        if quu.min() <= linalg::PD_RTOL * quu.norm().max(1.0) {
            out.push(Violation::QuuNotPd { lambda_min: quu.min() });
        }
        out
    }
}

pub(crate) fn stack(x: &Vector, u: &Vector) -> Vector {
    Vector::from_iterator(x.len() + u.len(), x.iter().chain(u.iter()).copied())
}

/// Rewrite a team problem on `(w, y, u)` coordinates.
///
/// `Q` carries the cost on the `(w, u)` positions with zero `y` rows and
/// columns. `R` is the Gram matrix of the residual map `[−E, I, −D]` plus
/// the identity on the `w` block, so that
/// `[x; u]ᵀ R [x; u] = ‖y − Du − Ew‖² + ‖w‖²` holds exactly.
pub fn to_gamma_form(prob: &TeamProblem) -> GammaFormProblem {
    let (q, p, m) = (prob.q(), prob.p(), prob.m());
    let n = q + p;
    let s = n + m;

    let mut qf = Mat::zeros(s, s);
    linalg::put_block(&mut qf, 0, 0, &prob.qww);
    linalg::put_block(&mut qf, 0, n, &prob.qwu);
    linalg::put_block(&mut qf, n, 0, &prob.qwu.transpose());
    linalg::put_block(&mut qf, n, n, &prob.quu);

    let mut residual = Mat::zeros(p, s);
    linalg::put_block(&mut residual, 0, 0, &(-&prob.e));
    linalg::put_block(&mut residual, 0, q, &Mat::identity(p, p));
    linalg::put_block(&mut residual, 0, n, &(-&prob.d));
    let mut rf = residual.transpose() * residual;
    for i in 0..q {
        rf[(i, i)] += 1.0;
    }

    GammaFormProblem {
        q_form: linalg::symmetrize(&qf),
        r_form: linalg::symmetrize(&rf),
        q,
        partition: prob.partition.clone(),
    }
}

#[derive(Debug, Error)]
pub enum GainError {
    #[error("gain has {got} blocks, partition has {expected} players")]
    BlockCount { got: usize, expected: usize },
    #[error("gain block {player} is {rows}x{cols}, expected {m}x{p}")]
    BlockShape { player: usize, rows: usize, cols: usize, m: usize, p: usize },
    #[error("expected {expected} gain entries, got {got}")]
    EntryCount { got: usize, expected: usize },
}

/// Block-diagonal decision gain `K = diag(K_1, …, K_N)`, `K_i ∈ R^{m_i×p_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGain {
    blocks: Vec<Mat>,
}

impl BlockGain {
    pub fn new(blocks: Vec<Mat>, partition: &Partition) -> Result<Self, GainError> {
        let gain = Self { blocks };
        gain.check(partition)?;
        Ok(gain)
    }

    pub fn zeros(partition: &Partition) -> Self {
        Self {
            blocks: partition
                .m_sizes()
                .iter()
                .zip(partition.p_sizes())
                .map(|(&m, &p)| Mat::zeros(m, p))
                .collect(),
        }
    }

    /// One scalar gain per player.
    pub fn scalar(values: &[f64]) -> Self {
        Self {
            blocks: values.iter().map(|&v| Mat::from_element(1, 1, v)).collect(),
        }
    }

    /// Build from the flat entry vector: player-major, row-major inside a block.
    pub fn from_entries(partition: &Partition, entries: &[f64]) -> Result<Self, GainError> {
        let expected = partition.gain_entries();
        if entries.len() != expected {
            return Err(GainError::EntryCount { got: entries.len(), expected });
        }
        let mut it = entries.iter().copied();
        let blocks = partition
            .m_sizes()
            .iter()
            .zip(partition.p_sizes())
            .map(|(&m, &p)| Mat::from_row_iterator(m, p, it.by_ref().take(m * p)))
            .collect();
        Ok(Self { blocks })
    }

    /// Flat entries in the same order as [`BlockGain::from_entries`].
    pub fn entries(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for i in 0..b.nrows() {
                out.extend(b.row(i).iter().copied());
            }
        }
        out
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn check(&self, partition: &Partition) -> Result<(), GainError> {
        if self.blocks.len() != partition.players() {
            return Err(GainError::BlockCount {
                got: self.blocks.len(),
                expected: partition.players(),
            });
        }
        for (player, (b, (&m, &p))) in self
            .blocks
            .iter()
            .zip(partition.m_sizes().iter().zip(partition.p_sizes()))
            .enumerate()
        {
            if b.shape() != (m, p) {
                return Err(GainError::BlockShape {
                    player,
                    rows: b.nrows(),
                    cols: b.ncols(),
                    m,
                    p,
                });
            }
        }
        Ok(())
    }

    /// The full `m×p` block-diagonal matrix.
    pub fn assemble(&self) -> Mat {
        linalg::block_diag(&self.blocks)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }
}

/// One probe of the γ bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub gamma: f64,
    pub feasible: bool,
    /// `λ_max` of the Schur LMI at the probe's minimizing gain.
    pub margin: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Outcome of a full γ search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Smallest γ found feasible; an upper bound on the game value within the
    /// bisection tolerance.
    pub gamma_star: f64,
    pub gain: BlockGain,
    /// `λ_max` of the Schur LMI at `gamma_star` and `gain`.
    pub lmi_margin: f64,
    /// Absolute feasibility threshold that `lmi_margin` was compared against.
    pub feas_threshold: f64,
    /// Worst-case ratio of `gain`, computed independently of the LMI.
    pub oracle_gamma: f64,
    pub gamma_bar: f64,
    pub gain_norm: f64,
    pub bisection_trace: Vec<TraceEntry>,
    pub inner_iterations: usize,
    /// False if any probe hit the interior-point iteration cap.
    pub converged: bool,
}
