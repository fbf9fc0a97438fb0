//! Exact propagation of the single-excitation amplitudes on a uniform grid.
//!
//! The primary path diagonalizes the generator once and evaluates
//! `ψ(t) = V e^{−iΛt} V⁻¹ ψ(0)` at every grid point. Generators whose
//! eigenvector matrix is too ill-conditioned go through the adaptive
//! Runge–Kutta integrator instead.

mod closed_form;
pub mod integrator;
pub mod spectral;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::PropagationError;
use crate::model::{Generator, ModelParams};
use crate::C64;

pub use closed_form::{g_closed_form, ClosedForm, ClosedFormValue, DEGENERATE_ROOT_GAP};
use integrator::StepDoubling;
use spectral::Eigensystem;

/// Default output step, in units of 1/Ω₀.
pub const DEFAULT_DT: f64 = 1e-3;
/// Largest accepted number of grid intervals.
pub const MAX_GRID_STEPS: f64 = 1e7;
/// Eigenvector condition numbers at or above this use the integrator.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;
/// Allowed growth of the physical norm before propagation is declared broken.
pub const NORM_GROWTH_TOLERANCE: f64 = 1e-6;

/// Uniform grid `t_k = k·dt`, `k = 0..=steps`, whose last point is the first
/// grid point at or beyond `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_end: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, dt: f64) -> Result<Self, PropagationError> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(PropagationError::InvalidGrid(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PropagationError::InvalidGrid(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let ratio = t_end / dt;
        if ratio > MAX_GRID_STEPS {
            return Err(PropagationError::InvalidGrid(format!(
                "t_end/dt = {ratio:e} exceeds {MAX_GRID_STEPS:e}"
            )));
        }
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.ceil()
        };
        Ok(Self {
            t_end,
            dt,
            steps: (steps as usize).max(1),
        })
    }

    pub fn with_default_dt(t_end: f64) -> Result<Self, PropagationError> {
        Self::new(t_end, DEFAULT_DT)
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points (intervals + 1).
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Time of the last grid point, `≥ t_end`.
    pub fn last_time(&self) -> f64 {
        self.time(self.steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }
}

/// Which propagation route produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Integrator,
}

/// Route selection for [`propagate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Spectral when well conditioned, integrator otherwise.
    #[default]
    Auto,
    Force(Method),
}

/// Survival amplitude and auxiliary amplitudes on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub grid: TimeGrid,
    pub g: Vec<C64>,
    /// Exact time derivative of `g`, taken from the generator.
    pub g_dot: Vec<C64>,
    pub c0: Vec<C64>,
    pub csum: Vec<C64>,
    /// Norm of the full physical state at each grid point.
    pub norm: Vec<f64>,
    pub method: Method,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.time(k)
    }

    /// Piecewise cubic Hermite interpolant of `g` and its derivative.
    /// `t` is clamped to the grid span.
    pub fn interpolate(&self, t: f64) -> (C64, C64) {
        let dt = self.grid.dt();
        let last = self.len() - 1;
        let t = t.clamp(0.0, self.grid.time(last));
        let k = ((t / dt).floor() as usize).min(last.saturating_sub(1));
        self.interpolate_in(k, t)
    }

    /// Hermite interpolant on interval `[t_k, t_{k+1}]`.
    pub(crate) fn interpolate_in(&self, k: usize, t: f64) -> (C64, C64) {
        let dt = self.grid.dt();
        if k + 1 >= self.len() {
            return (self.g[k], self.g_dot[k]);
        }
        let s = (t - self.grid.time(k)) / dt;
        let (y0, y1) = (self.g[k], self.g[k + 1]);
        let (d0, d1) = (self.g_dot[k] * dt, self.g_dot[k + 1] * dt);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let value = y0 * h00 + d0 * h10 + y1 * h01 + d1 * h11;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        let deriv = (y0 * dh00 + d0 * dh10 + y1 * dh01 + d1 * dh11) / dt;
        (value, deriv)
    }
}

/// Unit vector with the excitation on the qubit.
pub fn excited_initial(dimension: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dimension);
    v[0] = C64::new(1.0, 0.0);
    v
}

/// Propagates `initial` under `generator`, choosing the route automatically.
pub fn propagate(
    generator: &Generator,
    grid: &TimeGrid,
    initial: &DVector<C64>,
) -> Result<AmplitudeTrajectory, PropagationError> {
    propagate_with(generator, grid, initial, MethodChoice::Auto)
}

pub fn propagate_with(
    generator: &Generator,
    grid: &TimeGrid,
    initial: &DVector<C64>,
    choice: MethodChoice,
) -> Result<AmplitudeTrajectory, PropagationError> {
    let dim = generator.dimension();
    if initial.len() != dim {
        return Err(PropagationError::InitialDimension {
            expected: dim,
            found: initial.len(),
        });
    }
    let norm0 = generator.physical_norm(initial.as_slice());
    if (norm0 - 1.0).abs() > 1e-9 {
        return Err(PropagationError::InitialNorm(norm0));
    }

    let m = generator.entries();
    let eigen = match choice {
        MethodChoice::Force(Method::Integrator) => None,
        _ => Eigensystem::compute(m).filter(|es| {
            choice == MethodChoice::Force(Method::Spectral)
                || (es.condition < MAX_EIGENVECTOR_CONDITION && es.residual(m) < 1e-10)
        }),
    };

    let mut states: Vec<DVector<C64>> = Vec::with_capacity(grid.len());
    let method = match eigen {
        Some(es) => {
            let coeffs = es
                .vectors
                .clone()
                .lu()
                .solve(initial)
                .ok_or(PropagationError::NonConvergence { t: 0.0, step: 0.0 })?;
            for t in grid.times() {
                let phased = DVector::from_iterator(
                    dim,
                    es.values
                        .iter()
                        .zip(coeffs.iter())
                        .map(|(l, c)| c * (C64::new(0.0, -t) * l).exp()),
                );
                states.push(&es.vectors * phased);
            }
            // The first point is the initial condition by definition.
            states[0] = initial.clone();
            Method::Spectral
        }
        None => {
            let mut psi = initial.clone();
            let mut stepper = StepDoubling::new(m);
            states.push(psi.clone());
            for k in 1..grid.len() {
                stepper.advance(&mut psi, grid.time(k - 1), grid.time(k))?;
                states.push(psi.clone());
            }
            Method::Integrator
        }
    };

    let n = states.len();
    let mut g = Vec::with_capacity(n);
    let mut g_dot = Vec::with_capacity(n);
    let mut c0 = Vec::with_capacity(n);
    let mut csum = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let row0 = m.row(0);
    for (k, psi) in states.iter().enumerate() {
        let norm = generator.physical_norm(psi.as_slice());
        if norm.is_nan() || norm > 1.0 + NORM_GROWTH_TOLERANCE {
            return Err(PropagationError::NormGrowth {
                t: grid.time(k),
                norm,
            });
        }
        let (gk, ck, sk) = generator.observables(psi.as_slice());
        g.push(gk);
        g_dot.push(C64::new(0.0, -1.0) * (row0 * psi)[0]);
        c0.push(ck);
        csum.push(sk);
        norms.push(norm);
    }
    Ok(AmplitudeTrajectory {
        grid: *grid,
        g,
        g_dot,
        c0,
        csum,
        norm: norms,
        method,
    })
}

/// Builds the generator for `params` and propagates the excited qubit.
pub fn simulate(
    params: &ModelParams,
    grid: &TimeGrid,
) -> Result<AmplitudeTrajectory, PropagationError> {
    let generator = Generator::for_params(params)?;
    let initial = excited_initial(generator.dimension());
    propagate(&generator, grid, &initial)
}

/// `|g(t_k)|²` at every grid point.
pub fn survival_probability(traj: &AmplitudeTrajectory) -> Vec<f64> {
    traj.g.iter().map(|g| g.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reduced_generator, Layout, Topology};
    use nalgebra::DMatrix;

    fn grid3() -> TimeGrid {
        TimeGrid::with_default_dt(3.0).unwrap()
    }

    #[test]
    fn grid_points_are_exact_multiples() {
        let g = grid3();
        assert_eq!(g.len(), 3001);
        assert_eq!(g.time(1500), 1500.0 * 1e-3);
        let odd = TimeGrid::new(1.05, 0.1).unwrap();
        assert_eq!(odd.len(), 12);
        assert!(odd.last_time() >= 1.05);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(TimeGrid::new(0.0, 1e-3).is_err());
        assert!(TimeGrid::new(3.0, 0.0).is_err());
        assert!(TimeGrid::new(3.0, -1e-3).is_err());
        assert!(TimeGrid::new(1e5, 1e-3).is_err());
        assert!(TimeGrid::new(f64::NAN, 1e-3).is_err());
    }

    #[test]
    fn decoupled_qubit_stays_excited() {
        let p = ModelParams {
            omega0: 0.0,
            ..ModelParams::new(1.0, 2.0, 1.0, 1.0, 3).unwrap()
        };
        let traj = simulate(&p, &grid3()).unwrap();
        assert!(traj.g.iter().all(|g| *g == C64::new(1.0, 0.0)));
        assert!(survival_probability(&traj).iter().all(|&p| p == 1.0));
    }

    #[test]
    fn strong_baseline_survival_at_three() {
        let traj = simulate(&ModelParams::baseline(0.2), &grid3()).unwrap();
        let g3 = *traj.g.last().unwrap();
        assert!((g3.re + 0.845).abs() < 0.005, "g(3) = {g3}");
        assert!(g3.im.abs() < 1e-12);
        assert!((g3.norm_sqr() - 0.714).abs() < 0.01);
    }

    #[test]
    fn initial_conditions_hold() {
        let p = ModelParams::new(5.0, 5.0, 1.0, 5.0, 4).unwrap();
        let traj = simulate(&p, &grid3()).unwrap();
        assert_eq!(traj.g[0], C64::new(1.0, 0.0));
        assert_eq!(traj.c0[0], C64::new(0.0, 0.0));
        assert_eq!(traj.csum[0], C64::new(0.0, 0.0));
        assert_eq!(traj.method, Method::Spectral);
    }

    #[test]
    fn ring_topology_runs_through_simulate() {
        let p = ModelParams::new(5.0, 5.0, 1.0, 5.0, 4)
            .unwrap()
            .with_topology(Topology::RingExplicit);
        let traj = simulate(&p, &grid3()).unwrap();
        assert_eq!(traj.len(), 3001);
    }

    #[test]
    fn critical_damping_uses_integrator() {
        // Γ₀ = 4Ω₀ makes the baseline generator a Jordan block.
        let p = ModelParams::baseline(4.0);
        let traj = simulate(&p, &grid3()).unwrap();
        assert_eq!(traj.method, Method::Integrator);
        // g = (1 + t) e^{−t} for the critically damped baseline.
        for k in (0..traj.len()).step_by(250) {
            let t = traj.time(k);
            let exact = (1.0 + t) * (-t).exp();
            assert!((traj.g[k].re - exact).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn forced_routes_agree() {
        let p = ModelParams::new(0.7, 1.3, 0.4, 2.2, 5).unwrap();
        let gen = reduced_generator(&p);
        let init = excited_initial(3);
        let grid = TimeGrid::new(4.0, 1e-2).unwrap();
        let a = propagate_with(&gen, &grid, &init, MethodChoice::Force(Method::Spectral)).unwrap();
        let b =
            propagate_with(&gen, &grid, &init, MethodChoice::Force(Method::Integrator)).unwrap();
        for (x, y) in a.g.iter().zip(&b.g) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn initial_vector_checked() {
        let gen = reduced_generator(&ModelParams::baseline(1.0));
        let grid = grid3();
        let bad = DVector::from_element(3, C64::new(1.0, 0.0));
        assert!(matches!(
            propagate(&gen, &grid, &bad),
            Err(PropagationError::InitialNorm(_))
        ));
        let short = DVector::from_element(2, C64::new(1.0, 0.0));
        assert!(matches!(
            propagate(&gen, &grid, &short),
            Err(PropagationError::InitialDimension { .. })
        ));
    }

    #[test]
    fn gain_is_reported_as_norm_growth() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let m =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.5), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let gen = Generator::from_matrix(m, Layout::Lattice { n: 0 }).unwrap();
        let err = propagate(&gen, &grid3(), &excited_initial(2));
        assert!(matches!(err, Err(PropagationError::NormGrowth { .. })));
    }

    #[test]
    fn hermite_interpolant_matches_nodes_and_midpoints() {
        let p = ModelParams::new(0.2, 0.2, 1.0, 0.2, 3).unwrap();
        let coarse = simulate(&p, &TimeGrid::new(3.0, 2e-3).unwrap()).unwrap();
        let fine = simulate(&p, &TimeGrid::new(3.0, 1e-3).unwrap()).unwrap();
        for k in (1..3000).step_by(2) {
            let (g, _) = coarse.interpolate(fine.time(k));
            assert!((g - fine.g[k]).norm() < 1e-10);
        }
        let (g, d) = coarse.interpolate(coarse.time(10));
        assert_eq!(g, coarse.g[10]);
        assert!((d - coarse.g_dot[10]).norm() < 1e-12);
    }
}
