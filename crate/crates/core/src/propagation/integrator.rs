//! Adaptive fourth-order Runge–Kutta with step-doubling error control for
//! `dψ/dt = −i M ψ`. Used when the generator is too close to defective for
//! the spectral path.

use nalgebra::{DMatrix, DVector};

use crate::error::PropagationError;
use crate::C64;

/// Relative tolerance on the local error, measured in the max norm.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

const MAX_STEPS_PER_INTERVAL: usize = 1_000_000;

fn rhs(m: &DMatrix<C64>, psi: &DVector<C64>) -> DVector<C64> {
    (m * psi) * C64::new(0.0, -1.0)
}

/// One classical RK4 step of size `h`.
pub fn rk4_step(m: &DMatrix<C64>, psi: &DVector<C64>, h: f64) -> DVector<C64> {
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = rhs(m, psi);
    let k2 = rhs(m, &(psi + &k1 * half));
    let k3 = rhs(m, &(psi + &k2 * half));
    let k4 = rhs(m, &(psi + &k3 * full));
    psi + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Fixed-step RK4 over `[0, t]` in `steps` equal steps.
pub fn rk4_fixed(m: &DMatrix<C64>, psi0: &DVector<C64>, t: f64, steps: usize) -> DVector<C64> {
    let h = t / steps as f64;
    let mut psi = psi0.clone();
    for _ in 0..steps {
        psi = rk4_step(m, &psi, h);
    }
    psi
}

/// Stateful adaptive integrator that carries its step size across calls.
#[derive(Debug, Clone)]
pub struct StepDoubling<'a> {
    m: &'a DMatrix<C64>,
    h: f64,
}

impl<'a> StepDoubling<'a> {
    pub fn new(m: &'a DMatrix<C64>) -> Self {
        let scale = crate::max_modulus(m.iter()).max(1e-3);
        Self { m, h: 0.05 / scale }
    }

    /// Advances `psi` from `t0` to `t1`, landing on `t1` exactly.
    pub fn advance(
        &mut self,
        psi: &mut DVector<C64>,
        t0: f64,
        t1: f64,
    ) -> Result<(), PropagationError> {
        let mut t = t0;
        let mut steps = 0;
        while t < t1 {
            if steps >= MAX_STEPS_PER_INTERVAL {
                return Err(PropagationError::NonConvergence { t, step: self.h });
            }
            steps += 1;
            let remaining = t1 - t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };

            let coarse = rk4_step(self.m, psi, h);
            let mid = rk4_step(self.m, psi, 0.5 * h);
            let fine = rk4_step(self.m, &mid, 0.5 * h);
            let diff = &fine - &coarse;
            let err = crate::max_modulus(diff.iter()) / 15.0;
            let size = crate::max_modulus(psi.iter())
                .max(crate::max_modulus(fine.iter()))
                .max(f64::MIN_POSITIVE);
            let tol = RELATIVE_TOLERANCE * size;

            if err <= tol {
                *psi = fine + diff * C64::new(1.0 / 15.0, 0.0);
                t = if last { t1 } else { t + h };
            }
            let factor = if err > 0.0 {
                (0.9 * (tol / err).powf(0.2)).clamp(0.1, 4.0)
            } else {
                4.0
            };
            // A shortened final step says nothing about the natural step size.
            if !(last && err <= tol) {
                self.h = h * factor;
            }
            if self.h < 1e-14 * (1.0 + t.abs()) {
                return Err(PropagationError::NonConvergence { t, step: self.h });
            }
        }
        Ok(())
    }
}
