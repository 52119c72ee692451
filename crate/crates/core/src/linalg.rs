//! Dense SVD by one-sided Jacobi rotations and the least-squares solver built on it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
/// Pairs with `|a_p . a_q| <= TOL * |a_p| |a_q|` count as orthogonal.
const ORTHOGONALITY_TOL: f64 = 1e-15;

/// Thin SVD `A = U diag(s) V^T`, singular values non-increasing.
///
/// `v` is always the full `n x n` orthogonal matrix; `u` has a column per
/// singular value, zero where the singular value is zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn rank(&self, tol: f64) -> usize {
        self.singular_values.iter().filter(|&&s| s > tol).count()
    }

    /// Default rank cutoff: `max(m, n) * eps * s_max`.
    pub fn default_tolerance(&self) -> f64 {
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        dim * f64::EPSILON * self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// Hestenes one-sided Jacobi: rotate column pairs of `A` until all are
/// mutually orthogonal, accumulating the rotations in `V`.
pub fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("SVD input contains non-finite values".into()));
    }
    let mut b = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob2: f64 = a.iter().map(|x| x * x).sum();
    let negligible = frob2 * 1e-30;

    let mut converged = n < 2 || frob2 == 0.0;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        sweep += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                {
                    let (cp, cq) = (b.column(p), b.column(q));
                    for i in 0..m {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                }
                if alpha <= negligible || beta <= negligible || gamma.abs() <= ORTHOGONALITY_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut b, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")));
    }

    let norms: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let k = m.min(n);
    let mut u = DMatrix::zeros(m, k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let s = norms[src];
        singular_values.push(s);
        if s > 0.0 {
            u.set_column(dst, &(b.column(src) / s));
        }
    }
    let v_sorted = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Svd {
        u,
        singular_values,
        v: v_sorted,
    })
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (xp, xq) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * xp - s * xq;
        m[(i, q)] = s * xp + c * xq;
    }
}

/// Minimum-norm solution of `min |A x - y|` through the SVD of `A`.
pub fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != y.len() {
        return Err(Error::Dimension(format!("design has {} rows, target has {}", a.nrows(), y.len())));
    }
    let dec = svd(a)?;
    let tol = dec.default_tolerance();
    let mut x = DVector::zeros(a.ncols());
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s > tol {
            let coef = dec.u.column(j).dot(y) / s;
            x += dec.v.column(j) * coef;
        }
    }
    Ok(x)
}
