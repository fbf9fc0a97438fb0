//! Parameter space of the qubit + two-layer cavity environment, the linear
//! generators of its single-excitation dynamics, and the induced qubit channel.
//!
//! Every rate is expressed in units of the qubit–m₀ coupling, and the resonant
//! rotating frame removes all bare frequencies. The amplitude vector obeys
//! `i dψ/dt = M ψ` where `M` is the non-Hermitian generator built here.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::C64;

/// How the second-layer cavities are represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Collapse the N-cavity ring onto its uniform mode: three amplitudes
    /// `(g, c₀, Σcₙ)`.
    #[default]
    ReducedSymmetric,
    /// Keep every cavity of the ring explicitly: `N + 2` amplitudes.
    RingExplicit,
}

/// Qubit–m₀ coupling regime of the bare (no second layer) model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `Γ₀ > 4Ω₀`: overdamped, Markovian baseline.
    Weak,
    /// `Γ₀ < 4Ω₀`: oscillatory, non-Markovian baseline.
    Strong,
    /// `Γ₀ = 4Ω₀` exactly.
    Critical,
}

/// Physical rates and couplings, all in units of Ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Qubit–m₀ coupling Ω₀.
    pub omega0: f64,
    /// Loss rate Γ₀ of m₀.
    pub gamma0: f64,
    /// Coupling κ between m₀ and each second-layer cavity.
    pub kappa: f64,
    /// Nearest-neighbour coupling Ω inside the second layer.
    pub omega: f64,
    /// Loss rate Γ shared by all second-layer cavities.
    pub gamma: f64,
    /// Number N of second-layer cavities.
    pub n_cavities: usize,
    pub topology: Topology,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            gamma0: 0.0,
            kappa: 0.0,
            omega: 0.0,
            gamma: 0.0,
            n_cavities: 0,
            topology: Topology::ReducedSymmetric,
        }
    }
}

impl ModelParams {
    /// Validated constructor with Ω₀ = 1 and the reduced topology.
    pub fn new(
        gamma0: f64,
        kappa: f64,
        omega: f64,
        gamma: f64,
        n_cavities: usize,
    ) -> Result<Self, ModelError> {
        let p = Self {
            gamma0,
            kappa,
            omega,
            gamma,
            n_cavities,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    /// Damped Jaynes–Cummings model with no second layer.
    pub fn baseline(gamma0: f64) -> Self {
        Self {
            gamma0,
            ..Self::default()
        }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    pub fn with_n(self, n_cavities: usize) -> Self {
        Self { n_cavities, ..self }
    }

    pub fn with_topology(self, topology: Topology) -> Self {
        Self { topology, ..self }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let rates = [
            ("omega0", self.omega0),
            ("gamma0", self.gamma0),
            ("kappa", self.kappa),
            ("omega", self.omega),
            ("gamma", self.gamma),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::InvalidRate { name, value });
            }
        }
        Ok(())
    }

    /// True when the second layer is absent or decoupled, i.e. the model is
    /// the plain damped Jaynes–Cummings model.
    pub fn is_baseline(&self) -> bool {
        self.n_cavities == 0 || self.kappa == 0.0
    }

    pub fn regime(&self) -> Regime {
        let threshold = 4.0 * self.omega0;
        if self.gamma0 > threshold {
            Regime::Weak
        } else if self.gamma0 < threshold {
            Regime::Strong
        } else {
            Regime::Critical
        }
    }
}

/// Basis in which a [`Generator`] acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `(g, c₀, C)` with `C = Σₙ cₙ` over `n` cavities.
    Reduced { n: usize },
    /// `(g, c₀, c₁, …, c_N)`.
    Lattice { n: usize },
}

/// Dense matrix `M` of `i dψ/dt = M ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    entries: DMatrix<C64>,
    layout: Layout,
}

impl Generator {
    /// Wraps a hand-built matrix. Its size must match `layout`.
    pub fn from_matrix(entries: DMatrix<C64>, layout: Layout) -> Result<Self, ModelError> {
        let expected = match layout {
            Layout::Reduced { .. } => 3,
            Layout::Lattice { n } => n + 2,
        };
        if !entries.is_square() || entries.nrows() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                found: entries.nrows(),
            });
        }
        Ok(Self { entries, layout })
    }

    /// Generator selected by `params.topology`.
    pub fn for_params(params: &ModelParams) -> Result<Self, ModelError> {
        params.validate()?;
        match params.topology {
            Topology::ReducedSymmetric => Ok(reduced_generator(params)),
            Topology::RingExplicit => full_generator(params),
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Extracts `(g, c₀, Σcₙ)` from a state vector in this generator's basis.
    pub fn observables(&self, psi: &[C64]) -> (C64, C64, C64) {
        match self.layout {
            Layout::Reduced { .. } => (psi[0], psi[1], psi[2]),
            Layout::Lattice { .. } => (psi[0], psi[1], psi[2..].iter().sum()),
        }
    }

    /// Norm of the physical state represented by `psi`.
    ///
    /// In the reduced layout the collective amplitude `C` stands for N equal
    /// cavity amplitudes `C/N`, so it contributes `|C|²/N`.
    pub fn physical_norm(&self, psi: &[C64]) -> f64 {
        match self.layout {
            Layout::Reduced { n } => {
                let mut sq = psi[0].norm_sqr() + psi[1].norm_sqr();
                if n > 0 {
                    sq += psi[2].norm_sqr() / n as f64;
                }
                sq.sqrt()
            }
            Layout::Lattice { .. } => psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// The generator expressed in an orthonormal basis of the physical
    /// single-excitation space. For the reduced layout this rescales the
    /// collective amplitude to the normalized uniform mode `C/√N`.
    pub fn orthonormal(&self) -> DMatrix<C64> {
        match self.layout {
            Layout::Lattice { .. } => self.entries.clone(),
            Layout::Reduced { n } => {
                let mut m = self.entries.clone();
                let coupling = if n > 0 {
                    (m[(1, 2)] * m[(2, 1)]).sqrt()
                } else {
                    C64::new(0.0, 0.0)
                };
                m[(1, 2)] = coupling;
                m[(2, 1)] = coupling;
                m
            }
        }
    }

    /// Eigenvalues of the anti-Hermitian part `(M − M†)/(2i)` taken in the
    /// orthonormal basis. All of them are ≤ 0 for a purely lossy system.
    pub fn dissipation_spectrum(&self) -> Vec<f64> {
        let m = self.orthonormal();
        let anti = (&m - m.adjoint()) / C64::new(0.0, 2.0);
        let mut ev: Vec<f64> = anti.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Three-amplitude generator acting on `(g, c₀, Σcₙ)`.
pub fn reduced_generator(params: &ModelParams) -> Generator {
    let zero = C64::new(0.0, 0.0);
    let real = |x: f64| C64::new(x, 0.0);
    let n = params.n_cavities;
    let mut m = DMatrix::from_element(3, 3, zero);
    m[(0, 1)] = real(params.omega0);
    m[(1, 0)] = real(params.omega0);
    m[(1, 1)] = C64::new(0.0, -0.5 * params.gamma0);
    m[(1, 2)] = real(params.kappa);
    m[(2, 1)] = real(params.kappa * n as f64);
    m[(2, 2)] = C64::new(2.0 * params.omega, -0.5 * params.gamma);
    Generator {
        entries: m,
        layout: Layout::Reduced { n },
    }
}

/// Explicit `(N + 2)`-amplitude generator with the second layer arranged on
/// a ring.
///
/// For `N = 2` both ring bonds join the same pair of cavities, so the pair is
/// coupled by `2Ω`; this keeps the uniform-mode shift at `2Ω` for every N.
pub fn full_generator(params: &ModelParams) -> Result<Generator, ModelError> {
    let n = params.n_cavities;
    if n < 2 {
        return Err(ModelError::RingTooSmall(n));
    }
    let zero = C64::new(0.0, 0.0);
    let dim = n + 2;
    let mut m = DMatrix::from_element(dim, dim, zero);
    m[(0, 1)] = C64::new(params.omega0, 0.0);
    m[(1, 0)] = C64::new(params.omega0, 0.0);
    m[(1, 1)] = C64::new(0.0, -0.5 * params.gamma0);
    for k in 0..n {
        let site = 2 + k;
        m[(1, site)] = C64::new(params.kappa, 0.0);
        m[(site, 1)] = C64::new(params.kappa, 0.0);
        m[(site, site)] = C64::new(0.0, -0.5 * params.gamma);
    }
    for k in 0..n {
        let a = 2 + k;
        let b = 2 + (k + 1) % n;
        m[(a, b)] += C64::new(params.omega, 0.0);
        m[(b, a)] += C64::new(params.omega, 0.0);
    }
    Ok(Generator {
        entries: m,
        layout: Layout::Lattice { n },
    })
}

const STATE_TOL: f64 = 1e-12;

/// Qubit density matrix in the basis `{|1⟩, |0⟩}`: index 0 is the excited
/// state, index 1 the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Matrix2<C64>);

impl QubitState {
    pub fn new(matrix: Matrix2<C64>) -> Result<Self, ModelError> {
        let herm_err = crate::max_modulus((matrix - matrix.adjoint()).iter());
        if herm_err > STATE_TOL {
            return Err(ModelError::InvalidState("not Hermitian"));
        }
        let trace = matrix.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(ModelError::InvalidState("trace differs from 1"));
        }
        let (lo, _) = hermitian_eigenvalues(&matrix);
        if lo < -STATE_TOL {
            return Err(ModelError::InvalidState("negative eigenvalue"));
        }
        Ok(Self(matrix))
    }

    /// Pure state `α|1⟩ + β|0⟩`, normalized on construction.
    pub fn pure(alpha: C64, beta: C64) -> Result<Self, ModelError> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(ModelError::InvalidState("zero state vector"));
        }
        let (a, b) = (alpha / norm, beta / norm);
        Ok(Self(Matrix2::new(
            a * a.conj(),
            a * b.conj(),
            b * a.conj(),
            b * b.conj(),
        )))
    }

    pub fn excited() -> Self {
        Self::basis(0)
    }

    pub fn ground() -> Self {
        Self::basis(1)
    }

    /// `(|0⟩ + |1⟩)/√2`
    pub fn plus() -> Self {
        Self::pure(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap()
    }

    /// `(|0⟩ − |1⟩)/√2`
    pub fn minus() -> Self {
        Self::pure(C64::new(-1.0, 0.0), C64::new(1.0, 0.0)).unwrap()
    }

    fn basis(k: usize) -> Self {
        let mut m = Matrix2::zeros();
        m[(k, k)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    /// Excited-state population ρ₁₁.
    pub fn rho11(&self) -> f64 {
        self.0[(0, 0)].re
    }

    /// Coherence ⟨1|ρ|0⟩.
    pub fn rho10(&self) -> C64 {
        self.0[(0, 1)]
    }

    /// Coherence ⟨0|ρ|1⟩.
    pub fn rho01(&self) -> C64 {
        self.0[(1, 0)]
    }

    /// Ground-state population ρ₀₀.
    pub fn rho00(&self) -> f64 {
        self.0[(1, 1)].re
    }
}

/// Ascending eigenvalues of a Hermitian 2×2 matrix.
pub(crate) fn hermitian_eigenvalues(m: &Matrix2<C64>) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - half_gap, mean + half_gap)
}

/// Applies the amplitude-damping channel parametrized by the survival
/// amplitude `g` to a qubit state.
pub fn evolve_qubit_state(rho0: &QubitState, g: C64) -> Result<QubitState, ModelError> {
    let modulus = g.norm();
    if modulus.is_nan() || modulus > 1.0 + 1e-9 {
        return Err(ModelError::AmplitudeOutOfRange(modulus));
    }
    let p = g.norm_sqr();
    let r = rho0.matrix();
    let excited = r[(0, 0)] * p;
    let ground = r[(1, 1)] + r[(0, 0)] * (1.0 - p);
    Ok(QubitState(Matrix2::new(
        excited,
        r[(0, 1)] * g,
        r[(1, 0)] * g.conj(),
        ground,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn weak(omega: f64, n: usize) -> ModelParams {
        ModelParams::new(5.0, 5.0, omega, 5.0, n).unwrap()
    }

    #[test]
    fn reduced_entries_follow_amplitude_equations() {
        let m = reduced_generator(&weak(1.0, 4));
        let e = m.entries();
        assert_eq!(e[(1, 2)], C64::new(5.0, 0.0));
        assert_eq!(e[(2, 1)], C64::new(20.0, 0.0));
        assert_eq!(e[(2, 2)], C64::new(2.0, -2.5));
        assert_eq!(e[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(e[(1, 1)], C64::new(0.0, -2.5));
        assert_eq!(e[(0, 2)], C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_kappa_decouples_collective_mode() {
        let p = weak(1.0, 4).with_kappa(0.0);
        let e = reduced_generator(&p).entries().clone();
        assert_eq!(e[(1, 2)].norm(), 0.0);
        assert_eq!(e[(2, 1)].norm(), 0.0);
        assert_eq!(e[(0, 2)].norm(), 0.0);
        assert!(p.is_baseline());
    }

    #[test]
    fn empty_second_layer_has_no_feedback() {
        let e = reduced_generator(&weak(1.0, 0)).entries().clone();
        assert_eq!(e[(2, 1)].norm(), 0.0);
    }

    #[test]
    fn ring_rows_have_two_neighbours() {
        let g = full_generator(&weak(1.0, 3)).unwrap();
        let e = g.entries();
        for site in 2..5 {
            let neighbours = (2..5)
                .filter(|&j| j != site && e[(site, j)] == C64::new(1.0, 0.0))
                .count();
            assert_eq!(neighbours, 2);
        }
    }

    #[test]
    fn two_site_ring_uses_doubled_bond() {
        let g = full_generator(&weak(1.5, 2)).unwrap();
        assert_eq!(g.entries()[(2, 3)], C64::new(3.0, 0.0));
        assert_eq!(g.entries()[(3, 2)], C64::new(3.0, 0.0));
    }

    #[test]
    fn ring_rejects_fewer_than_two_sites() {
        for n in 0..2 {
            let p = weak(1.0, n).with_topology(Topology::RingExplicit);
            assert!(matches!(
                Generator::for_params(&p),
                Err(ModelError::RingTooSmall(_))
            ));
        }
    }

    #[test]
    fn zero_omega_is_a_star() {
        let g = full_generator(&weak(0.0, 5)).unwrap();
        let e = g.entries();
        for a in 2..7 {
            for b in 2..7 {
                if a != b {
                    assert_eq!(e[(a, b)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(matches!(
            ModelParams::new(-1.0, 0.0, 0.0, 0.0, 0),
            Err(ModelError::InvalidRate { name: "gamma0", .. })
        ));
        assert!(ModelParams::new(1.0, f64::NAN, 0.0, 0.0, 0).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(ModelParams::baseline(5.0).regime(), Regime::Weak);
        assert_eq!(ModelParams::baseline(0.2).regime(), Regime::Strong);
        assert_eq!(ModelParams::baseline(4.0).regime(), Regime::Critical);
    }

    #[test]
    fn identity_and_complete_decay() {
        let one = C64::new(1.0, 0.0);
        let e = evolve_qubit_state(&QubitState::excited(), one).unwrap();
        assert_eq!(e, QubitState::excited());
        let d = evolve_qubit_state(&QubitState::excited(), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(d, QubitState::ground());
    }

    #[test]
    fn plus_state_half_amplitude() {
        let s = evolve_qubit_state(&QubitState::plus(), C64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(s.rho11(), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho10().re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho10().im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.rho00(), 0.875, epsilon = 1e-15);
        QubitState::new(*s.matrix()).unwrap();
    }

    #[test]
    fn amplitude_above_one_rejected() {
        let err = evolve_qubit_state(&QubitState::plus(), C64::new(1.0 + 1e-6, 0.0));
        assert!(matches!(err, Err(ModelError::AmplitudeOutOfRange(_))));
        assert!(evolve_qubit_state(&QubitState::plus(), C64::new(1.0 + 1e-10, 0.0)).is_ok());
    }

    #[test]
    fn invalid_states_rejected() {
        let c = |x: f64| C64::new(x, 0.0);
        assert!(QubitState::new(Matrix2::new(c(0.5), c(0.1), c(0.2), c(0.5))).is_err());
        assert!(QubitState::new(Matrix2::new(c(0.6), c(0.0), c(0.0), c(0.6))).is_err());
        assert!(QubitState::new(Matrix2::new(c(1.2), c(0.0), c(0.0), c(-0.2))).is_err());
        assert!(QubitState::new(Matrix2::new(c(0.5), c(0.5), c(0.5), c(0.5))).is_ok());
    }

    #[test]
    fn collective_mode_normalization() {
        let g = reduced_generator(&weak(1.0, 4));
        let o = g.orthonormal();
        assert_abs_diff_eq!(o[(1, 2)].re, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o[(2, 1)].re, 10.0, epsilon = 1e-12);
        let psi = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)];
        assert_abs_diff_eq!(g.physical_norm(&psi), 1.0, epsilon = 1e-15);
    }
}
