//! Minimization of the largest eigenvalue of an affine symmetric matrix.
//!
//! Solves `min t  s.t.  t·I − M0 − Σ_j k_j M_j ⪰ 0` with a primal–dual
//! path-following method (HKM search direction, Mehrotra predictor–corrector).
//! In standard dual form the variables are `y = (k, t)`, the constraint
//! matrices are `A_j = −M_j` and `A_t = I`, and `C = M0`; the primal is
//!
//! ```text
//!   max tr(M0 X)  s.t.  tr(X) = 1,  tr(M_j X) = 0,  X ⪰ 0
//! ```
//!
//! The dual iterate is kept exactly feasible (`Z` is recomputed from `y`),
//! so `t` is always a valid upper bound on `λ_max(M(k))`. The primal starts
//! infeasible at `X = I/s`.

use nalgebra::{Cholesky, LU};

use crate::linalg::{self, Mat, SymEigen, Vector};
use crate::lmi::AffineLmi;

#[derive(Debug, Clone, Copy)]
pub struct IpmOptions {
    pub max_iter: usize,
    /// Relative tolerance on the duality gap and primal residual.
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    /// Minimizing gain entries.
    pub entries: Vec<f64>,
    /// Final dual value, an upper bound on `λ_max(M(entries))`.
    pub upper: f64,
    /// `tr(M0 X)` at the final primal iterate; a lower bound on the optimum
    /// once the primal residual vanishes.
    pub lower: f64,
    pub iterations: usize,
    pub converged: bool,
}

const STEP_FRACTION: f64 = 0.98;

struct Iterate {
    x: Mat,
    y: Vector,
    z: Mat,
}

/// Longest step `α ≤ 1` keeping `base + α·dir` positive definite, damped.
fn step_length(base: &Mat, dir: &Mat) -> f64 {
    let Some(chol) = Cholesky::new(base.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(left) = l.solve_lower_triangular(dir) else {
        return 0.0;
    };
    let Some(both) = l.solve_lower_triangular(&left.transpose()) else {
        return 0.0;
    };
    let lo = linalg::lambda_min(&linalg::symmetrize(&both));
    if lo >= 0.0 {
        1.0
    } else {
        (STEP_FRACTION * (-1.0 / lo)).min(1.0)
    }
}

fn solve_spd(h: &Mat, rhs: &Vector) -> Option<Vector> {
    if let Some(ch) = Cholesky::new(h.clone()) {
        return Some(ch.solve(rhs));
    }
    LU::new(h.clone()).solve(rhs)
}

struct Problem<'a> {
    lmi: &'a AffineLmi,
    s: usize,
}

impl Problem<'_> {
    /// `Σ y_i A_i`.
    fn a_adj(&self, y: &Vector) -> Mat {
        let d = self.lmi.basis.len();
        let mut out = Mat::identity(self.s, self.s) * y[d];
        for (j, mj) in self.lmi.basis.iter().enumerate() {
            if y[j] != 0.0 {
                out -= mj * y[j];
            }
        }
        out
    }

    /// `(tr(A_i W))_i`.
    fn a_op(&self, w: &Mat) -> Vector {
        let d = self.lmi.basis.len();
        let mut out = Vector::zeros(d + 1);
        for (j, mj) in self.lmi.basis.iter().enumerate() {
            out[j] = -mj.component_mul(&w.transpose()).sum();
        }
        out[d] = w.trace();
        out
    }

    fn z_of(&self, y: &Vector) -> Mat {
        linalg::symmetrize(&(self.a_adj(y) - &self.lmi.m0))
    }

    fn b(&self) -> Vector {
        let d = self.lmi.basis.len();
        let mut b = Vector::zeros(d + 1);
        b[d] = 1.0;
        b
    }
}

pub fn minimize_max_eigenvalue(lmi: &AffineLmi, start: &[f64], opts: IpmOptions) -> IpmResult {
    let s = lmi.dim();
    let d = lmi.basis.len();
    assert_eq!(start.len(), d, "start has wrong length");
    let prob = Problem { lmi, s };
    let b = prob.b();
    let scale = linalg::sym_norm(&lmi.m0).max(1.0);

    let m_start = lmi.evaluate(start);
    let eig = SymEigen::new(&m_start);
    let mut y = Vector::zeros(d + 1);
    y.rows_mut(0, d).copy_from_slice(start);
    y[d] = eig.max() + eig.norm().max(1.0);
    let mut it = Iterate {
        x: Mat::identity(s, s) / s as f64,
        z: prob.z_of(&y),
        y,
    };

    let mut best = (it.y.rows(0, d).iter().copied().collect::<Vec<_>>(), it.y[d]);
    let mut lower = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let gap = (&it.x * &it.z).trace();
        let rp = &b - prob.a_op(&it.x);
        lower = lmi.m0.component_mul(&it.x).sum();
        if gap <= opts.tol * scale && rp.amax() <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let Some(zchol) = Cholesky::new(it.z.clone()) else {
            break;
        };
        let zinv = linalg::symmetrize(&zchol.inverse());
        let mu = gap / s as f64;

        // H_ij = tr(A_i X A_j Z⁻¹)
        let mut h = Mat::zeros(d + 1, d + 1);
        let mut cols: Vec<Mat> = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let aj = if j < d { -&lmi.basis[j] } else { Mat::identity(s, s) };
            cols.push(&it.x * aj * &zinv);
        }
        for j in 0..=d {
            let col = prob.a_op(&cols[j]);
            h.set_column(j, &col);
        }
        let h = linalg::symmetrize(&h);

        let direction = |sigma_mu: f64, corr: Option<&Mat>| -> Option<(Mat, Vector, Mat)> {
            let mut target = &zinv * sigma_mu;
            if let Some(c) = corr {
                target -= c;
            }
            let rhs = prob.a_op(&target) - &b;
            let dy = solve_spd(&h, &rhs)?;
            let dz = prob.a_adj(&dy);
            let mut dx = &zinv * sigma_mu - &it.x - &it.x * &dz * &zinv;
            if let Some(c) = corr {
                dx -= c;
            }
            Some((linalg::symmetrize(&dx), dy, dz))
        };

        // predictor
        let Some((dx_a, _, dz_a)) = direction(0.0, None) else {
            break;
        };
        let ap = step_length(&it.x, &dx_a);
        let ad = step_length(&it.z, &dz_a);
        let mu_aff = ((&it.x + &dx_a * ap) * (&it.z + &dz_a * ad)).trace() / s as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // corrector
        let corr = &dx_a * &dz_a * &zinv;
        let Some((dx, dy, dz)) = direction(sigma * mu, Some(&corr)) else {
            break;
        };
        let ap = step_length(&it.x, &dx);
        let ad = step_length(&it.z, &dz);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }

        let x_new = linalg::symmetrize(&(&it.x + &dx * ap));
        let y_new = &it.y + &dy * ad;
        let z_new = prob.z_of(&y_new);
        if Cholesky::new(z_new.clone()).is_none() || Cholesky::new(x_new.clone()).is_none() {
            break;
        }
        it = Iterate { x: x_new, y: y_new, z: z_new };
        if it.y[d] < best.1 {
            best = (it.y.rows(0, d).iter().copied().collect(), it.y[d]);
        }
    }

    IpmResult {
        entries: best.0,
        upper: best.1,
        lower,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> IpmOptions {
        IpmOptions { max_iter: 200, tol: 1e-10 }
    }

    #[test]
    fn constant_matrix() {
        let m0 = Mat::from_diagonal(&Vector::from_vec(vec![1.0, -2.0, 0.5]));
        let lmi = AffineLmi { m0, basis: vec![] };
        let r = minimize_max_eigenvalue(&lmi, &[], opts());
        assert!(r.converged);
        assert_relative_eq!(r.upper, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn off_diagonal_coupling() {
        // λ_max([[1, k], [k, −1]]) = sqrt(1 + k²), minimized at k = 0
        let m0 = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let m1 = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let lmi = AffineLmi { m0, basis: vec![m1] };
        let r = minimize_max_eigenvalue(&lmi, &[3.0], opts());
        assert!(r.converged);
        assert_relative_eq!(r.upper, 1.0, epsilon = 1e-8);
        assert!(r.entries[0].abs() < 1e-4);
        assert!(r.lower <= r.upper + 1e-9);
    }

    #[test]
    fn diagonal_tradeoff() {
        // λ_max(diag(k, 2 − k)) is minimized at k = 1 with value 1
        let m0 = Mat::from_diagonal(&Vector::from_vec(vec![0.0, 2.0]));
        let m1 = Mat::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        let lmi = AffineLmi { m0, basis: vec![m1] };
        let r = minimize_max_eigenvalue(&lmi, &[0.0], opts());
        assert!(r.converged);
        assert_relative_eq!(r.upper, 1.0, epsilon = 1e-8);
        assert_relative_eq!(r.entries[0], 1.0, epsilon = 1e-6);
    }
}
