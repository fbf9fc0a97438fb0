//! Survival amplitude of the reduced model from the roots of its
//! characteristic cubic and the partial-fraction residues of
//! `[(z − M)⁻¹]₁₁`.
//!
//! With `β = −iΓ₀/2`, `d = 2Ω − iΓ/2`:
//!
//! ```text
//! p(z) = z³ − (β + d) z² + (βd − κ²N − Ω₀²) z + Ω₀² d
//! q(z) = (z − β)(z − d) − κ²N
//! g(t) = Σⱼ q(λⱼ)/p′(λⱼ) · e^{−iλⱼt}
//! ```

use crate::error::PropagationError;
use crate::model::{ModelParams, Topology};
use crate::propagation::{excited_initial, propagate, TimeGrid};
use crate::C64;

/// Roots closer than this, relative to `max(1, |λ|max)`, are treated as a
/// repeated eigenvalue. Rounding splits an exact double root by about √ε, so
/// the threshold sits well above that.
pub const DEGENERATE_ROOT_GAP: f64 = 1e-5;

/// Roots and residues of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub roots: [C64; 3],
    pub residues: [C64; 3],
    /// Smallest pairwise root distance.
    pub min_gap: f64,
}

/// Value of `g(t)` and whether the propagation fallback produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormValue {
    pub g: C64,
    pub degenerate: bool,
}

impl ClosedForm {
    pub fn new(params: &ModelParams) -> Self {
        let a2 = C64::new(params.omega0 * params.omega0, 0.0);
        let beta = C64::new(0.0, -0.5 * params.gamma0);
        let d = C64::new(2.0 * params.omega, -0.5 * params.gamma);
        let k2n = C64::new(params.kappa * params.kappa * params.n_cavities as f64, 0.0);

        // Monic coefficients z³ + c2 z² + c1 z + c0.
        let c2 = -(beta + d);
        let c1 = beta * d - k2n - a2;
        let c0 = a2 * d;
        let roots = solve_cubic(c2, c1, c0);

        let q = |z: C64| (z - beta) * (z - d) - k2n;
        let mut residues = [C64::new(0.0, 0.0); 3];
        for j in 0..3 {
            let mut dp = C64::new(1.0, 0.0);
            for i in 0..3 {
                if i != j {
                    dp *= roots[j] - roots[i];
                }
            }
            residues[j] = q(roots[j]) / dp;
        }
        let min_gap = (roots[0] - roots[1])
            .norm()
            .min((roots[0] - roots[2]).norm())
            .min((roots[1] - roots[2]).norm());
        Self {
            roots,
            residues,
            min_gap,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        let scale = self.roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        !self.min_gap.is_finite() || self.min_gap < DEGENERATE_ROOT_GAP * scale
    }

    /// Evaluates the residue sum. Meaningless when [`Self::is_degenerate`].
    pub fn eval(&self, t: f64) -> C64 {
        self.roots
            .iter()
            .zip(&self.residues)
            .map(|(l, r)| r * (C64::new(0.0, -t) * l).exp())
            .sum()
    }
}

/// `g(t)` of the reduced model in closed form, or through [`propagate`] when
/// two roots nearly coincide.
pub fn g_closed_form(params: &ModelParams, t: f64) -> Result<ClosedFormValue, PropagationError> {
    params.validate()?;
    let params = params.with_topology(Topology::ReducedSymmetric);
    let cf = ClosedForm::new(&params);
    if !cf.is_degenerate() {
        return Ok(ClosedFormValue {
            g: cf.eval(t),
            degenerate: false,
        });
    }
    if t == 0.0 {
        return Ok(ClosedFormValue {
            g: C64::new(1.0, 0.0),
            degenerate: true,
        });
    }
    let grid = TimeGrid::new(t, t)?;
    let generator = crate::model::reduced_generator(&params);
    let traj = propagate(&generator, &grid, &excited_initial(3))?;
    Ok(ClosedFormValue {
        g: *traj.g.last().expect("grid has two points"),
        degenerate: true,
    })
}

/// Roots of `z³ + a z² + b z + c` by Cardano's formula, polished with Newton.
pub(crate) fn solve_cubic(a: C64, b: C64, c: C64) -> [C64; 3] {
    let third = 1.0 / 3.0;
    let shift = a * third;
    // Depressed cubic w³ + p w + q with z = w − a/3.
    let p = b - a * a * third;
    let q = a * a * a * (2.0 / 27.0) - a * b * third + c;
    let disc = (q * q * 0.25 + p * p * p / 27.0).sqrt();
    let u3 = {
        let plus = -q * 0.5 + disc;
        let minus = -q * 0.5 - disc;
        if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        }
    };
    let omega = C64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [C64::new(0.0, 0.0); 3];
    if u3.norm() == 0.0 {
        // p = q = 0: triple root.
        roots = [-shift; 3];
    } else {
        let u = u3.powf(third);
        let mut rot = C64::new(1.0, 0.0);
        for root in &mut roots {
            let uk = u * rot;
            *root = uk - p / (uk * 3.0) - shift;
            rot *= omega;
        }
    }
    let poly = |z: C64| ((z + a) * z + b) * z + c;
    let deriv = |z: C64| (z * 3.0 + a * 2.0) * z + b;
    for root in &mut roots {
        for _ in 0..3 {
            let dp = deriv(*root);
            if dp.norm() == 0.0 {
                break;
            }
            let step = poly(*root) / dp;
            if !step.is_finite() {
                break;
            }
            *root -= step;
            if step.norm() <= f64::EPSILON * root.norm() {
                break;
            }
        }
    }
    roots
}
