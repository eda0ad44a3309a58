//! Dense symmetric linear algebra on top of `nalgebra`.
//!
//! Everything here works on small, dense, real symmetric matrices. Empty
//! (0×0) inputs are legal throughout: a problem without nature variables has
//! an empty `Qww`, and the helpers treat the empty spectrum as vacuous.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative asymmetry accepted before symmetrization.
pub const SYMMETRY_RTOL: f64 = 1e-10;
/// `A ≻ 0` iff `λ_min > PD_RTOL · max(1, ‖A‖)`.
pub const PD_RTOL: f64 = 1e-12;
/// `A ⪰ 0` iff `λ_min > −PSD_RTOL · max(1, ‖A‖)`.
pub const PSD_RTOL: f64 = 1e-10;
/// Condition number above which a symmetric inverse logs a warning.
pub const COND_WARN: f64 = 1e12;

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `max |A_ij − A_ji|`, relative to the largest entry of `A`.
///
/// Returns 0 for the zero matrix and `+∞` for a non-square input.
pub fn relative_asymmetry(a: &Mat) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst == 0.0 {
        0.0
    } else {
        worst / max_abs(a)
    }
}

pub fn is_symmetric(a: &Mat) -> bool {
    relative_asymmetry(a) <= SYMMETRY_RTOL
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
///
/// Only the lower triangle is trusted; pass symmetric input.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vector,
    pub vectors: Mat,
}

impl SymEigen {
    pub fn new(a: &Mat) -> Self {
        let n = a.nrows();
        if n == 0 {
            return Self {
                values: Vector::zeros(0),
                vectors: Mat::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(symmetrize(a));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = Mat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Largest eigenvalue, `−∞` when empty.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest eigenvalue, `+∞` when empty.
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Spectral norm (largest absolute eigenvalue).
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Unit eigenvector of the largest eigenvalue.
    pub fn top_vector(&self) -> Option<Vector> {
        let n = self.dim();
        (n > 0).then(|| self.vectors.column(n - 1).into_owned())
    }
}

pub fn lambda_max(a: &Mat) -> f64 {
    SymEigen::new(a).max()
}

pub fn lambda_min(a: &Mat) -> f64 {
    SymEigen::new(a).min()
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm(a: &Mat) -> f64 {
    SymEigen::new(a).norm()
}

/// Scale-aware positive definiteness test.
pub fn is_pd(a: &Mat) -> bool {
    let eig = SymEigen::new(a);
    eig.min() > PD_RTOL * eig.norm().max(1.0)
}

/// Scale-aware positive semidefiniteness test.
pub fn is_psd(a: &Mat) -> bool {
    let eig = SymEigen::new(a);
    eig.min() > -PSD_RTOL * eig.norm().max(1.0)
}

/// Inverse of a symmetric positive definite matrix through its
/// eigen-decomposition, together with its condition number.
///
/// Returns `None` when the matrix is not PD in the sense of [`is_pd`].
pub fn spd_inverse(a: &Mat) -> Option<(Mat, f64)> {
    let eig = SymEigen::new(a);
    let n = eig.dim();
    if n == 0 {
        return Some((Mat::zeros(0, 0), 1.0));
    }
    let lo = eig.min();
    if lo <= PD_RTOL * eig.norm().max(1.0) {
        return None;
    }
    let cond = eig.max() / lo;
    if cond > COND_WARN {
        log::warn!("inverting an ill-conditioned matrix (cond = {cond:.3e})");
    }
    let v = &eig.vectors;
    let inv_diag = Mat::from_diagonal(&eig.values.map(|l| 1.0 / l));
    Some((symmetrize(&(v * inv_diag * v.transpose())), cond))
}

/// Copy `block` into `dst` with its top-left corner at `(r, c)`.
pub fn put_block(dst: &mut Mat, r: usize, c: usize, block: &Mat) {
    if block.nrows() == 0 || block.ncols() == 0 {
        return;
    }
    dst.view_mut((r, c), block.shape()).copy_from(block);
}

pub fn block(a: &Mat, r: usize, c: usize, rows: usize, cols: usize) -> Mat {
    a.view((r, c), (rows, cols)).into_owned()
}

/// Block-diagonal assembly.
pub fn block_diag(blocks: &[Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        put_block(&mut out, r, c, b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `xᵀ A x`.
pub fn quad_form(a: &Mat, x: &Vector) -> f64 {
    x.dot(&(a * x))
}

/// Result of maximizing the generalized Rayleigh quotient `xᵀAx / xᵀBx`.
#[derive(Debug, Clone)]
pub enum PencilMax {
    /// Finite supremum, attained at `vector`.
    Finite { value: f64, vector: Vector },
    /// Some direction has `xᵀBx = 0` while the numerator can be made
    /// positive, so the quotient is unbounded.
    Unbounded,
    /// `B = 0`: no direction has a positive denominator.
    Degenerate,
}

impl PencilMax {
    pub fn value(&self) -> f64 {
        match self {
            PencilMax::Finite { value, .. } => *value,
            PencilMax::Unbounded => f64::INFINITY,
            PencilMax::Degenerate => 0.0,
        }
    }
}

/// Supremum of `xᵀAx / xᵀBx` over `xᵀBx > 0` for symmetric `A` and PSD `B`.
///
/// The null space of `B` (eigenvalues at or below `1e-12·‖B‖`) is deflated
/// first. On the deflated space the numerator must be negative semidefinite
/// and must not couple to the range of `B` through its zero-curvature
/// directions, otherwise the quotient is unbounded. Negative-curvature null
/// directions are eliminated by a Schur complement, which is also how the
/// maximizing vector is lifted back.
pub fn pencil_max(a: &Mat, b: &Mat) -> PencilMax {
    let n = a.nrows();
    let eb = SymEigen::new(b);
    let b_scale = eb.norm();
    let b_thresh = 1e-12 * b_scale;
    let a_thresh = 1e-10 * sym_norm(a);

    let range: Vec<usize> = (0..n).filter(|&i| eb.values[i] > b_thresh).collect();
    let null: Vec<usize> = (0..n).filter(|&i| eb.values[i] <= b_thresh).collect();

    let vr = eb.vectors.select_columns(range.iter());
    let lam_r = Vector::from_iterator(range.len(), range.iter().map(|&i| eb.values[i]));
    let grr = vr.transpose() * a * &vr;

    // Schur complement over the negative-curvature part of the null space.
    let mut geff = grr;
    let mut lift: Option<Mat> = None;
    if !null.is_empty() {
        let v0 = eb.vectors.select_columns(null.iter());
        let g00 = v0.transpose() * a * &v0;
        let g0r = v0.transpose() * a * &vr;
        let e0 = SymEigen::new(&g00);
        if e0.max() > a_thresh {
            return PencilMax::Unbounded;
        }
        let neg: Vec<usize> = (0..e0.dim()).filter(|&i| e0.values[i] < -a_thresh).collect();
        let flat: Vec<usize> = (0..e0.dim()).filter(|&i| e0.values[i] >= -a_thresh).collect();
        if !range.is_empty() && !flat.is_empty() {
            let wz = e0.vectors.select_columns(flat.iter());
            let cross = wz.transpose() * &g0r;
            if max_abs(&cross) > a_thresh.max(f64::MIN_POSITIVE) {
                return PencilMax::Unbounded;
            }
        }
        if !neg.is_empty() && !range.is_empty() {
            let wn = e0.vectors.select_columns(neg.iter());
            let inv_mu = Mat::from_diagonal(&Vector::from_iterator(
                neg.len(),
                neg.iter().map(|&i| 1.0 / e0.values[i]),
            ));
            let gnr = wn.transpose() * &g0r;
            geff -= gnr.transpose() * &inv_mu * &gnr;
            // null-space coefficients that maximize the numerator for a given range part
            lift = Some(-(&v0 * &wn) * inv_mu * gnr);
        }
    }

    if range.is_empty() {
        return PencilMax::Degenerate;
    }

    let scale = Mat::from_diagonal(&lam_r.map(|l| 1.0 / l.sqrt()));
    let whitened = &scale * geff * &scale;
    let ew = SymEigen::new(&whitened);
    let value = ew.max();
    let c = ew.top_vector().expect("non-empty range");
    let cr = &scale * c;
    let mut x = &vr * &cr;
    if let Some(lift) = lift {
        x += lift * &cr;
    }
    let nrm = x.norm();
    if nrm > 0.0 {
        x /= nrm;
    }
    PencilMax::Finite { value, vector: x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalues_sorted_ascending() {
        let a = Mat::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        let e = SymEigen::new(&a);
        assert_eq!(e.values.as_slice(), &[-1.0, 2.0, 5.0]);
        assert_relative_eq!(e.top_vector().unwrap()[2].abs(), 1.0);
    }

    #[test]
    fn empty_spectrum_is_vacuous() {
        let e = Mat::zeros(0, 0);
        assert!(is_pd(&e));
        assert!(is_psd(&e));
        assert_eq!(lambda_max(&e), f64::NEG_INFINITY);
    }

    #[test]
    fn asymmetry_is_relative() {
        let mut a = Mat::from_row_slice(2, 2, &[1e6, 1.0, 1.0, 1e6]);
        a[(0, 1)] += 1e-5;
        assert!(is_symmetric(&a));
        a[(0, 1)] += 1e-2;
        assert!(!is_symmetric(&a));
        assert!(!is_symmetric(&Mat::zeros(2, 3)));
    }

    #[test]
    fn pd_thresholds() {
        assert!(!is_pd(&Mat::zeros(1, 1)));
        assert!(is_psd(&Mat::zeros(1, 1)));
        assert!(!is_psd(&Mat::from_row_slice(1, 1, &[-1e-6])));
    }

    #[test]
    fn spd_inverse_roundtrip() {
        let a = Mat::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let (inv, cond) = spd_inverse(&a).unwrap();
        assert_relative_eq!(&a * &inv, Mat::identity(2, 2), epsilon = 1e-12);
        assert!(cond > 1.0);
        assert!(spd_inverse(&Mat::from_row_slice(1, 1, &[0.0])).is_none());
    }

    #[test]
    fn pencil_with_definite_denominator() {
        let a = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        match pencil_max(&a, &b) {
            PencilMax::Finite { value, vector } => {
                assert_relative_eq!(value, 2.0, epsilon = 1e-12);
                assert_relative_eq!(quad_form(&a, &vector) / quad_form(&b, &vector), 2.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pencil_unbounded_when_numerator_positive_on_null_space() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(pencil_max(&a, &b), PencilMax::Unbounded));
        // zero curvature on the null space but coupled to the range
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(pencil_max(&a, &b), PencilMax::Unbounded));
    }

    #[test]
    fn pencil_schur_complement_over_negative_null_directions() {
        // sup over (r, z) of (r² + 2rz − z²) / r² = 1 + sup_z (2z − z²) = 2 at z = 1
        let a = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        match pencil_max(&a, &b) {
            PencilMax::Finite { value, vector } => {
                assert_relative_eq!(value, 2.0, epsilon = 1e-12);
                assert_relative_eq!(vector[1] / vector[0], 1.0, epsilon = 1e-10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pencil_degenerate_denominator() {
        let a = Mat::from_row_slice(1, 1, &[-1.0]);
        let b = Mat::zeros(1, 1);
        assert!(matches!(pencil_max(&a, &b), PencilMax::Degenerate));
    }
}
