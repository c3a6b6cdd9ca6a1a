//! Modified Gram-Schmidt least squares with a unit-diagonal `R`.
//!
//! `Ψ = Q·R` where the columns of `Q` are mutually orthogonal but not
//! normalized. The orthogonal coefficients are then a diagonal solve,
//! `μ_k = ⟨q_k, y⟩ / ⟨q_k, q_k⟩`, and `R·ŵ = μ` is solved by back
//! substitution.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Columns whose orthogonal remainder falls below this fraction of the
/// largest column norm are dropped.
pub const DROP_TOLERANCE: f64 = 1e-12;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // ⟨a, b⟩ = aᴴ b
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    /// Orthogonal columns; dropped columns are all zero.
    pub q: Vec<Vec<Complex64>>,
    /// Upper triangle stored by row: `r[i][j]` for `j >= i`, with
    /// `r[i][i] = 1`.
    pub r: Vec<Vec<Complex64>>,
    /// Squared norms `⟨q_k, q_k⟩`.
    pub q_norm_sqr: Vec<f64>,
    /// Euclidean norms of the input columns.
    pub column_norms: Vec<f64>,
    pub dropped: Vec<usize>,
}

impl QrFactors {
    pub fn width(&self) -> usize {
        self.q.len()
    }

    pub fn r_at(&self, i: usize, j: usize) -> Complex64 {
        if j < i {
            Complex64::new(0.0, 0.0)
        } else {
            self.r[i][j - i]
        }
    }
}

pub fn mgs(columns: &[Vec<Complex64>]) -> QrFactors {
    let w = columns.len();
    let column_norms: Vec<f64> = columns.iter().map(|c| norm_sqr(c).sqrt()).collect();
    let max_norm = column_norms.iter().copied().fold(0.0, f64::max);
    let threshold = DROP_TOLERANCE * max_norm;

    let mut v: Vec<Vec<Complex64>> = columns.to_vec();
    let mut r: Vec<Vec<Complex64>> = Vec::with_capacity(w);
    let mut q_norm_sqr = Vec::with_capacity(w);
    let mut dropped = Vec::new();
    for k in 0..w {
        let mut row = vec![Complex64::new(0.0, 0.0); w - k];
        row[0] = Complex64::new(1.0, 0.0);
        let nk = norm_sqr(&v[k]);
        if nk.sqrt() <= threshold || nk == 0.0 {
            dropped.push(k);
            v[k].iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            q_norm_sqr.push(0.0);
            r.push(row);
            continue;
        }
        let (head, tail) = v.split_at_mut(k + 1);
        let qk = &head[k];
        for (j, vj) in tail.iter_mut().enumerate() {
            let rkj = dot(qk, vj) / nk;
            row[j + 1] = rkj;
            for (a, &b) in vj.iter_mut().zip(qk) {
                *a -= rkj * b;
            }
        }
        q_norm_sqr.push(nk);
        r.push(row);
    }
    QrFactors {
        q: v,
        r,
        q_norm_sqr,
        column_norms,
        dropped,
    }
}

/// Solution of `min ‖y − Ψw‖²` from its QR factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub w: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    /// `y − Ψŵ` on the fitted rows.
    pub residual: Vec<Complex64>,
}

pub fn solve(f: &QrFactors, y: &[Complex64]) -> Result<LeastSquares> {
    let w = f.width();
    if let Some(c) = f.q.first() {
        if c.len() != y.len() {
            return Err(Error::LengthMismatch {
                what: "design matrix rows and observations",
                left: c.len(),
                right: y.len(),
            });
        }
    }
    // Projecting the running residual rather than y keeps the modified
    // Gram-Schmidt stability for the right-hand side too.
    let mut res = y.to_vec();
    let mut mu = vec![Complex64::new(0.0, 0.0); w];
    for k in 0..w {
        if f.q_norm_sqr[k] == 0.0 {
            continue;
        }
        let m = dot(&f.q[k], &res) / f.q_norm_sqr[k];
        for (a, &b) in res.iter_mut().zip(&f.q[k]) {
            *a -= m * b;
        }
        mu[k] = m;
    }
    let mut coef = vec![Complex64::new(0.0, 0.0); w];
    for k in (0..w).rev() {
        if f.q_norm_sqr[k] == 0.0 {
            continue;
        }
        let mut acc = mu[k];
        for j in k + 1..w {
            acc -= f.r_at(k, j) * coef[j];
        }
        coef[k] = acc;
    }
    Ok(LeastSquares {
        w: coef,
        mu,
        residual: res,
    })
}
