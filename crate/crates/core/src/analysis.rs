//! Critical crossover parameters and Ω–N phase-diagram sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::measures::{MeasureReport, ONSET_THRESHOLD};
use crate::model::ModelParams;
use crate::propagation::{simulate, TimeGrid, DEFAULT_DT};

/// Coarse scan step for critical-point searches, in units of Ω₀.
pub const SCAN_STEP: f64 = 0.05;
/// Final bracket width of the bisection.
pub const BISECTION_WIDTH: f64 = 1e-3;

/// Evolution horizon `τ` and output step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub tau: f64,
    pub dt: f64,
}

impl Horizon {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            dt: DEFAULT_DT,
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }
}

/// Propagates `params` up to `horizon.tau` and evaluates every measure there.
pub fn evaluate(params: &ModelParams, horizon: &Horizon) -> Result<MeasureReport, AnalysisError> {
    let grid = TimeGrid::new(horizon.tau, horizon.dt)?;
    let traj = simulate(params, &grid)?;
    Ok(MeasureReport::from_trajectory(&traj, horizon.tau)?)
}

fn is_non_markovian(params: &ModelParams, horizon: &Horizon) -> Result<bool, AnalysisError> {
    Ok(evaluate(params, horizon)?.nonmarkovianity > ONSET_THRESHOLD)
}

/// Continuous parameter scanned by [`critical_parameter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    Omega,
    Kappa,
}

impl ScanParameter {
    fn apply(self, template: &ModelParams, value: f64) -> ModelParams {
        match self {
            Self::Omega => template.with_omega(value),
            Self::Kappa => template.with_kappa(value),
        }
    }
}

/// A located Markovian ↔ non-Markovian switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub value: f64,
    /// More than one switch was seen in the bracket; `value` is the lowest.
    pub multiple: bool,
}

/// Scans `parameter` over `bracket` in steps of [`SCAN_STEP`], then bisects
/// the lowest switch of `nonmarkovianity > ε` down to [`BISECTION_WIDTH`].
pub fn critical_parameter(
    template: &ModelParams,
    parameter: ScanParameter,
    horizon: &Horizon,
    bracket: (f64, f64),
) -> Result<Option<Crossing>, AnalysisError> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
        return Err(AnalysisError::InvalidBracket { lo, hi });
    }
    let classify = |x: f64| is_non_markovian(&parameter.apply(template, x), horizon);

    let steps = ((hi - lo) / SCAN_STEP - 1e-9).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=steps)
        .map(|k| (lo + k as f64 * SCAN_STEP).min(hi))
        .collect();
    let classes = xs
        .iter()
        .map(|&x| classify(x))
        .collect::<Result<Vec<_>, _>>()?;

    let switches: Vec<usize> = (0..xs.len() - 1)
        .filter(|&k| classes[k] != classes[k + 1])
        .collect();
    let Some(&first) = switches.first() else {
        return Ok(None);
    };

    let (mut a, mut b) = (xs[first], xs[first + 1]);
    let class_a = classes[first];
    while b - a >= BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        if classify(m)? == class_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(Crossing {
        value: 0.5 * (a + b),
        multiple: switches.len() > 1,
    }))
}

/// Critical neighbour coupling Ω at fixed N.
pub fn critical_omega(
    template: &ModelParams,
    n: usize,
    horizon: &Horizon,
    bracket: (f64, f64),
) -> Result<Option<Crossing>, AnalysisError> {
    critical_parameter(&template.with_n(n), ScanParameter::Omega, horizon, bracket)
}

/// Critical layer coupling κ at the template's Ω and N.
pub fn critical_kappa(
    template: &ModelParams,
    horizon: &Horizon,
    bracket: (f64, f64),
) -> Result<Option<Crossing>, AnalysisError> {
    critical_parameter(template, ScanParameter::Kappa, horizon, bracket)
}

/// Smallest N in `[2, n_max]` whose dynamics is non-Markovian.
pub fn critical_n(
    template: &ModelParams,
    omega: f64,
    horizon: &Horizon,
    n_max: usize,
) -> Result<Option<usize>, AnalysisError> {
    if n_max < 2 {
        return Err(AnalysisError::InvalidSpec(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let base = template.with_omega(omega);
    for n in 2..=n_max {
        if is_non_markovian(&base.with_n(n), horizon)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Rectangular Ω × N grid evaluated by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// `(start, stop, step)`, inclusive of `stop` up to rounding.
    pub omega_range: (f64, f64, f64),
    /// `(min, max)`, inclusive.
    pub n_range: (usize, usize),
    /// Supplies Ω₀, Γ₀, κ, Γ and the topology.
    pub template: ModelParams,
    pub horizon: Horizon,
    pub workers: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let (start, stop, step) = self.omega_range;
        let bad = |msg: String| Err(AnalysisError::InvalidSpec(msg));
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return bad("omega range must be finite".into());
        }
        if step.is_nan() || step <= 0.0 {
            return bad(format!("omega step must be positive, got {step}"));
        }
        if start < 0.0 || stop < start {
            return bad(format!("empty omega range [{start}, {stop}]"));
        }
        if self.n_range.1 < self.n_range.0 {
            return bad(format!(
                "empty N range [{}, {}]",
                self.n_range.0, self.n_range.1
            ));
        }
        if !(self.horizon.tau.is_finite() && self.horizon.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.horizon.tau));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if (stop - start) / step > 1e6 {
            return bad("omega grid too large".into());
        }
        self.template.validate()?;
        Ok(())
    }

    pub fn omega_values(&self) -> Vec<f64> {
        let (start, stop, step) = self.omega_range;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|k| start + k as f64 * step).collect()
    }

    pub fn n_values(&self) -> impl Iterator<Item = usize> {
        self.n_range.0..=self.n_range.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

/// One grid point of a sweep. Failed points carry NaN measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega: f64,
    pub n: usize,
    pub nonmarkovianity: f64,
    pub qsl_ratio: f64,
    pub survival_at_tau: f64,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    pub fn is_non_markovian(&self) -> bool {
        self.nonmarkovianity > ONSET_THRESHOLD
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Sorted by `(n, omega)`.
    pub rows: Vec<SweepRow>,
    pub version: String,
}

fn sweep_point(template: &ModelParams, horizon: &Horizon, omega: f64, n: usize) -> SweepRow {
    let params = template.with_omega(omega).with_n(n);
    match evaluate(&params, horizon) {
        Ok(r) => SweepRow {
            omega,
            n,
            nonmarkovianity: r.nonmarkovianity,
            qsl_ratio: r.qsl_ratio_direct,
            survival_at_tau: r.survival_at_tau,
            status: RowStatus::Ok,
        },
        Err(e) => SweepRow {
            omega,
            n,
            nonmarkovianity: f64::NAN,
            qsl_ratio: f64::NAN,
            survival_at_tau: f64::NAN,
            status: RowStatus::Failed(e.to_string()),
        },
    }
}

/// Evaluates every `(Ω, N)` point on a pool of `spec.workers` threads.
/// Each point is independent, so the rows do not depend on the worker count.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult, AnalysisError> {
    spec.validate()?;
    let omegas = spec.omega_values();
    let points: Vec<(usize, f64)> = spec
        .n_values()
        .flat_map(|n| omegas.iter().map(move |&w| (n, w)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| AnalysisError::WorkerPool(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|&(n, omega)| sweep_point(&spec.template, &spec.horizon, omega, n))
            .collect()
    });

    Ok(SweepResult {
        spec: *spec,
        rows,
        version: crate::VERSION.to_string(),
    })
}

/// Upper edge of the low-Ω non-Markovian region for one N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub n: usize,
    /// Midpoint between the last non-Markovian and first Markovian Ω;
    /// `None` if the row never switches.
    pub omega: Option<f64>,
}

/// Locates, for every N in `rows`, the first switch of the non-Markovian
/// flag along increasing Ω. `rows` must be sorted by `(n, omega)`.
pub fn phase_boundary(rows: &[SweepRow]) -> Vec<BoundaryPoint> {
    let mut out = Vec::new();
    for chunk in rows.chunk_by(|a, b| a.n == b.n) {
        let ok: Vec<&SweepRow> = chunk.iter().filter(|r| r.is_ok()).collect();
        let omega = ok
            .windows(2)
            .find(|w| w[0].is_non_markovian() != w[1].is_non_markovian())
            .map(|w| 0.5 * (w[0].omega + w[1].omega));
        out.push(BoundaryPoint {
            n: chunk[0].n,
            omega,
        });
    }
    out
}
