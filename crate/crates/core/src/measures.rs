//! BLP non-Markovianity and quantum-speed-limit ratio of a trajectory.
//!
//! Both measures work on the cubic Hermite interpolant of `g(t)` built from
//! the grid values and their exact derivatives. The horizon `[0, τ]` is cut
//! at every sign change of `dP/dt` (located by bisection), so on each piece
//! `P = |g|²` is monotone and smooth.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::MeasureError;
use crate::model::{evolve_qubit_state, hermitian_eigenvalues, QubitState};
use crate::propagation::AmplitudeTrajectory;
use crate::C64;

/// Non-Markovianity above this value counts as non-Markovian.
pub const ONSET_THRESHOLD: f64 = 1e-6;

/// Width to which sign changes of `dP/dt` are bracketed.
pub const CROSSING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub nonmarkovianity: f64,
    pub qsl_ratio_direct: f64,
    pub qsl_ratio_relation: f64,
    pub survival_at_tau: f64,
    pub consistency_residual: f64,
    /// Set when nothing evolved (`P(τ) = 1` with zero speed) and the ratios
    /// were defined as 1.
    pub stationary: bool,
}

impl MeasureReport {
    pub fn from_trajectory(traj: &AmplitudeTrajectory, tau: f64) -> Result<Self, MeasureError> {
        let pieces = monotone_pieces(traj, tau)?;
        let nonmarkovianity = positive_variation(&pieces);
        let survival_at_tau = pieces.last().map_or(1.0, |p| p.pb);
        let direct = qsl_from_pieces(traj, &pieces);
        let relation = qsl_ratio_relation(nonmarkovianity, survival_at_tau);
        let (qsl_ratio_relation, stationary) = match relation {
            Some(r) => (r, direct.stationary),
            None => (1.0, true),
        };
        Ok(Self {
            nonmarkovianity,
            qsl_ratio_direct: direct.ratio,
            qsl_ratio_relation,
            survival_at_tau,
            consistency_residual: (direct.ratio - qsl_ratio_relation).abs(),
            stationary,
        })
    }

    pub fn is_non_markovian(&self) -> bool {
        self.nonmarkovianity > ONSET_THRESHOLD
    }
}

/// QSL ratio `τ_QSL/τ` together with the no-evolution flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QslRatio {
    pub ratio: f64,
    /// `P(τ) = 1` and the state never moved; `ratio` is set to 1.
    pub stationary: bool,
}

/// `∫₀^τ (dP/dt)₊ dt` with `P = |g|²`.
pub fn nonmarkovianity(traj: &AmplitudeTrajectory, tau: f64) -> Result<f64, MeasureError> {
    Ok(positive_variation(&monotone_pieces(traj, tau)?))
}

/// Half the trace norm of `ρ₁ − ρ₂`.
pub fn trace_distance(rho1: &QubitState, rho2: &QubitState) -> f64 {
    let diff = rho1.matrix() - rho2.matrix();
    let (lo, hi) = hermitian_eigenvalues(&diff);
    0.5 * (lo.abs() + hi.abs())
}

/// `τ_QSL/τ` from the Bures angle between `|1⟩⟨1|` and `ρ(τ)` and the time
/// average of `‖ρ̇‖∞`, integrated by Gauss–Legendre quadrature on the
/// monotone pieces of `P`.
pub fn qsl_ratio_direct(traj: &AmplitudeTrajectory, tau: f64) -> Result<QslRatio, MeasureError> {
    let pieces = monotone_pieces(traj, tau)?;
    Ok(qsl_from_pieces(traj, &pieces))
}

/// `(1 − P)/(2N + 1 − P)`; `None` when `N = 0` and `P = 1` (no evolution).
pub fn qsl_ratio_relation(nonmark: f64, survival_at_tau: f64) -> Option<f64> {
    let lost = 1.0 - survival_at_tau;
    let denom = 2.0 * nonmark + lost;
    if denom <= 0.0 {
        return None;
    }
    Some(lost / denom)
}

/// `dρ/dt` of the amplitude-damping channel at amplitude `g` with derivative
/// `g_dot`, for initial state `rho0`.
pub fn state_rate(rho0: &QubitState, g: C64, g_dot: C64) -> Matrix2<C64> {
    let r = rho0.matrix();
    let dp = 2.0 * (g.conj() * g_dot).re;
    Matrix2::new(
        r[(0, 0)] * dp,
        r[(0, 1)] * g_dot,
        r[(1, 0)] * g_dot.conj(),
        -r[(0, 0)] * dp,
    )
}

/// Largest singular value of a Hermitian 2×2 matrix.
fn operator_norm(m: &Matrix2<C64>) -> f64 {
    let (lo, hi) = hermitian_eigenvalues(m);
    lo.abs().max(hi.abs())
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    /// Grid interval whose interpolant covers the piece.
    segment: usize,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
    rising: bool,
}

fn positive_variation(pieces: &[Piece]) -> f64 {
    pieces
        .iter()
        .filter(|p| p.rising)
        .map(|p| (p.pb - p.pa).max(0.0))
        .fold(0.0, |acc, x| acc + x)
}

fn qsl_from_pieces(traj: &AmplitudeTrajectory, pieces: &[Piece]) -> QslRatio {
    // On each piece |ρ̇| = |dP/dt| is a degree-5 polynomial, which
    // three-point Gauss–Legendre integrates exactly.
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let initial = QubitState::excited();
    let mut speed_integral = 0.0;
    for piece in pieces {
        let half = 0.5 * (piece.b - piece.a);
        let mid = 0.5 * (piece.a + piece.b);
        let mut acc = 0.0;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let (g, g_dot) = traj.interpolate_in(piece.segment, mid + half * x);
            acc += w * operator_norm(&state_rate(&initial, g, g_dot));
        }
        speed_integral += half * acc;
    }

    let (g_tau, _) = match pieces.last() {
        Some(p) => traj.interpolate_in(p.segment, p.b),
        None => (traj.g[0], traj.g_dot[0]),
    };
    // |g| can exceed 1 by rounding; the channel tolerates that.
    let g_tau = if g_tau.norm() > 1.0 {
        g_tau / g_tau.norm()
    } else {
        g_tau
    };
    let final_state = evolve_qubit_state(&initial, g_tau).expect("amplitude normalized above");
    let fidelity = final_state.rho11().clamp(0.0, 1.0);
    let bures = fidelity.sqrt().acos();
    let sin2 = bures.sin().powi(2);

    if speed_integral <= 0.0 {
        return QslRatio {
            ratio: 1.0,
            stationary: true,
        };
    }
    let mut ratio = sin2 / speed_integral;
    if ratio > 1.0 && ratio < 1.0 + 1e-9 {
        ratio = 1.0;
    }
    QslRatio {
        ratio,
        stationary: false,
    }
}

fn node_rate(traj: &AmplitudeTrajectory, k: usize) -> f64 {
    2.0 * (traj.g[k].conj() * traj.g_dot[k]).re
}

fn rate_in(traj: &AmplitudeTrajectory, segment: usize, t: f64) -> f64 {
    let (g, d) = traj.interpolate_in(segment, t);
    2.0 * (g.conj() * d).re
}

fn survival_in(traj: &AmplitudeTrajectory, segment: usize, t: f64) -> f64 {
    traj.interpolate_in(segment, t).0.norm_sqr()
}

/// Bisects `[a, b]` for the point where `dP/dt > 0` switches.
fn locate_switch(traj: &AmplitudeTrajectory, segment: usize, mut a: f64, mut b: f64) -> f64 {
    let rising_a = rate_in(traj, segment, a) > 0.0;
    while b - a > CROSSING_TOLERANCE {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (rate_in(traj, segment, m) > 0.0) == rising_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn monotone_pieces(traj: &AmplitudeTrajectory, tau: f64) -> Result<Vec<Piece>, MeasureError> {
    let last = traj.len() - 1;
    let span = traj.time(last);
    if !(tau.is_finite() && tau > 0.0 && tau <= span + 1e-12 * span.max(1.0)) {
        return Err(MeasureError::HorizonOutOfRange { tau, t_end: span });
    }
    let dt = traj.grid.dt();

    // Last node at or before τ, snapping τ onto a node when it sits on one.
    let ratio = tau / dt;
    let nearest = ratio.round();
    let (full_segments, tail) = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        ((nearest as usize).min(last), None)
    } else {
        let k = (ratio.floor() as usize).min(last);
        (k, Some(tau))
    };

    let mut pieces = Vec::with_capacity(full_segments + 4);
    let mut push_segment = |segment: usize, a: f64, b: f64, pa: f64, pb: f64, ra: f64, rb: f64| {
        let mid = 0.5 * (a + b);
        let rm = rate_in(traj, segment, mid);
        let mut cuts = vec![(a, pa)];
        if (ra > 0.0) != (rm > 0.0) {
            let t = locate_switch(traj, segment, a, mid);
            cuts.push((t, survival_in(traj, segment, t)));
        }
        if (rm > 0.0) != (rb > 0.0) {
            let t = locate_switch(traj, segment, mid, b);
            cuts.push((t, survival_in(traj, segment, t)));
        }
        cuts.push((b, pb));
        for w in cuts.windows(2) {
            let ((start, p_start), (end, p_end)) = (w[0], w[1]);
            pieces.push(Piece {
                segment,
                a: start,
                b: end,
                pa: p_start,
                pb: p_end,
                rising: rate_in(traj, segment, 0.5 * (start + end)) > 0.0,
            });
        }
    };

    for k in 0..full_segments {
        let (a, b) = (traj.time(k), traj.time(k + 1));
        push_segment(
            k,
            a,
            b,
            traj.g[k].norm_sqr(),
            traj.g[k + 1].norm_sqr(),
            node_rate(traj, k),
            node_rate(traj, k + 1),
        );
    }
    if let Some(tau) = tail {
        let k = full_segments;
        let a = traj.time(k);
        if tau > a && k < last {
            push_segment(
                k,
                a,
                tau,
                traj.g[k].norm_sqr(),
                survival_in(traj, k, tau),
                node_rate(traj, k),
                rate_in(traj, k, tau),
            );
        }
    }
    Ok(pieces)
}
