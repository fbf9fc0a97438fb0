//! Eigendecomposition of a general complex matrix via its Schur form.

use nalgebra::DMatrix;

use crate::C64;

/// `M = V Λ V⁻¹` with unit-norm eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<C64>,
    pub vectors: DMatrix<C64>,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl Eigensystem {
    /// Returns `None` when the Schur iteration does not converge or the
    /// eigenvector matrix is singular to working precision.
    pub fn compute(m: &DMatrix<C64>) -> Option<Self> {
        let n = m.nrows();
        let schur = m.clone().try_schur(f64::EPSILON, 10_000)?;
        let (q, t) = schur.unpack();
        let scale = crate::max_modulus(t.iter()).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;

        // Eigenvectors of the triangular factor by back substitution.
        let mut y = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = C64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    acc += t[(i, j)] * y[(j, k)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < tiny {
                    denom = C64::new(tiny, 0.0);
                }
                y[(i, k)] = -acc / denom;
            }
        }
        let mut vectors = q * y;
        for mut col in vectors.column_iter_mut() {
            let norm = col.norm();
            if !norm.is_finite() || norm <= 0.0 {
                return None;
            }
            col /= C64::new(norm, 0.0);
        }
        let sv = vectors.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        let values = (0..n).map(|k| t[(k, k)]).collect();
        Some(Self {
            values,
            vectors,
            condition,
        })
    }

    /// Largest entry of `M V − V Λ`, relative to the largest entry of `M`.
    pub fn residual(&self, m: &DMatrix<C64>) -> f64 {
        let mut lv = self.vectors.clone();
        for (k, mut col) in lv.column_iter_mut().enumerate() {
            col *= self.values[k];
        }
        let scale = crate::max_modulus(m.iter()).max(1.0);
        crate::max_modulus((m * &self.vectors - lv).iter()) / scale
    }
}
