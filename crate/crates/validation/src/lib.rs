//! Acceptance criteria for the simulator. Each check returns a one-line
//! report, `Ok` when the criterion holds.

use std::time::Instant;

use hiersim::analysis::{critical_n, critical_omega, evaluate, sweep, Horizon, SweepSpec};
use hiersim::measures::MeasureReport;
use hiersim::model::{full_generator, reduced_generator, ModelParams};
use hiersim::propagation::{
    excited_initial, g_closed_form, propagate, simulate, ClosedForm, TimeGrid,
};
use hiersim_cli::table::{to_csv, SweepCsvRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Verdict = Result<String, String>;

pub type Criterion = (&'static str, fn() -> Verdict);

fn horizon() -> Horizon {
    Horizon::new(3.0)
}

fn weak() -> ModelParams {
    ModelParams::new(5.0, 5.0, 0.0, 5.0, 2).unwrap()
}

fn strong() -> ModelParams {
    ModelParams::new(0.2, 0.2, 0.0, 0.2, 2).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
        rng.random_range(0.0..10.0),
        rng.random_range(0..=12),
    )
    .unwrap()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

pub fn strong_baseline() -> Verdict {
    let r = evaluate(&ModelParams::baseline(0.2), &horizon()).map_err(|e| e.to_string())?;
    let msg = format!("N(Φ) = {:.6}, expected 0.714 ± 0.010", r.nonmarkovianity);
    if within(r.nonmarkovianity, 0.714, 0.010) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn strong_baseline_qsl() -> Verdict {
    let r = evaluate(&ModelParams::baseline(0.2), &horizon()).map_err(|e| e.to_string())?;
    let msg = format!(
        "direct = {:.6}, relation = {:.6}, |Δ| = {:.1e}, expected 0.166 ± 0.005 and |Δ| < 1e-6",
        r.qsl_ratio_direct, r.qsl_ratio_relation, r.consistency_residual
    );
    let ok = within(r.qsl_ratio_direct, 0.166, 0.005)
        && within(r.qsl_ratio_relation, 0.166, 0.005)
        && (r.qsl_ratio_direct - r.qsl_ratio_relation).abs() < 1e-6;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn weak_critical_couplings() -> Verdict {
    let find = |n| critical_omega(&weak(), n, &horizon(), (0.0, 5.0)).map_err(|e| e.to_string());
    let c6 = find(6)?.map(|c| c.value);
    let c8 = find(8)?.map(|c| c.value);
    let c2 = find(2)?.map(|c| c.value);
    let msg = format!("Ω_c(6) = {c6:?}, Ω_c(8) = {c8:?}, Ω_c(2) = {c2:?}; expected 2.39 ± 0.05, 3.25 ± 0.05, none");
    let ok = c6.is_some_and(|w| within(w, 2.39, 0.05))
        && c8.is_some_and(|w| within(w, 3.25, 0.05))
        && c2.is_none();
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn integer_crossover() -> Verdict {
    let mut found = Vec::new();
    let mut ok = true;
    for (omega, expected) in [(1.5, 4), (0.0, 3), (0.5, 3), (1.0, 3)] {
        let n = critical_n(&weak(), omega, &horizon(), 12).map_err(|e| e.to_string())?;
        ok &= n == Some(expected);
        found.push(format!("Ω={omega}: N_c={n:?} (expected {expected})"));
    }
    let msg = found.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn strong_regime_bounds() -> Verdict {
    let baseline = evaluate(&ModelParams::baseline(0.2), &horizon()).map_err(|e| e.to_string())?;
    let spec = SweepSpec {
        omega_range: (0.0, 5.0, 0.05),
        n_range: (2, 10),
        template: strong(),
        horizon: horizon(),
        workers: 1,
    };
    let rows = sweep(&spec).map_err(|e| e.to_string())?.rows;
    let max_nm = rows
        .iter()
        .map(|r| r.nonmarkovianity)
        .fold(f64::MIN, f64::max);
    let min_ratio = rows.iter().map(|r| r.qsl_ratio).fold(f64::MAX, f64::min);
    let above_rounded = rows.iter().filter(|r| r.nonmarkovianity >= 0.714).count();
    let msg = format!(
        "{} points: max N(Φ) = {max_nm:.6} (baseline {:.6}; {above_rounded} points at or above the rounded 0.714), min τ_QSL/τ = {min_ratio:.6} (baseline {:.6}, bound 0.166)",
        rows.len(),
        baseline.nonmarkovianity,
        baseline.qsl_ratio_direct
    );
    let ok = rows.iter().all(|r| {
        r.is_ok()
            && r.nonmarkovianity < baseline.nonmarkovianity
            && r.qsl_ratio > baseline.qsl_ratio_direct
            && r.qsl_ratio > 0.166
    });
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn oracle_equivalence() -> Verdict {
    let grid = TimeGrid::new(10.0, 1e-2).map_err(|e| e.to_string())?;
    let mut ring_err: f64 = 0.0;
    for n in 2..=12 {
        let p = ModelParams::new(0.7, 1.3, 0.9, 0.4, n).unwrap();
        let ring = full_generator(&p).map_err(|e| e.to_string())?;
        let a = propagate(&ring, &grid, &excited_initial(n + 2)).map_err(|e| e.to_string())?;
        let b = propagate(&reduced_generator(&p), &grid, &excited_initial(3))
            .map_err(|e| e.to_string())?;
        for (x, y) in a.g.iter().zip(&b.g) {
            ring_err = ring_err.max((x - y).norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut cf_err: f64 = 0.0;
    let mut degenerate = 0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let t: f64 = rng.random_range(1e-6..5.0);
        if ClosedForm::new(&p).is_degenerate() {
            degenerate += 1;
            continue;
        }
        let traj = simulate(&p, &TimeGrid::new(t, t).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let g = g_closed_form(&p, t).map_err(|e| e.to_string())?.g;
        cf_err = cf_err.max((g - traj.g[1]).norm());
    }
    let msg = format!(
        "ring vs reduced max |Δg| = {ring_err:.1e} (< 1e-8); closed form vs propagation max |Δg| = {cf_err:.1e} (< 1e-9), {degenerate} degenerate draws"
    );
    if ring_err < 1e-8 && cf_err < 1e-9 && degenerate < 5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn relation_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e1a);
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let traj = simulate(&p, &TimeGrid::new(3.0, 1e-3).unwrap()).map_err(|e| e.to_string())?;
        let r = MeasureReport::from_trajectory(&traj, 3.0).map_err(|e| e.to_string())?;
        worst = worst.max((r.qsl_ratio_direct - r.qsl_ratio_relation).abs());
        if (r.nonmarkovianity == 0.0) != ((r.qsl_ratio_direct - 1.0).abs() <= 1e-9) {
            mismatches += 1;
        }
    }
    let msg = format!(
        "max |direct − relation| = {worst:.1e} (< 1e-6); N(Φ)=0 ⟺ ratio=1 violations: {mismatches}"
    );
    if worst < 1e-6 && mismatches == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn weak_baseline() -> Verdict {
    let r = evaluate(&ModelParams::baseline(5.0), &horizon()).map_err(|e| e.to_string())?;
    let msg = format!(
        "N(Φ) = {:e} (< 1e-10), τ_QSL/τ = {} (1 ± 1e-6)",
        r.nonmarkovianity, r.qsl_ratio_direct
    );
    if r.nonmarkovianity < 1e-10 && within(r.qsl_ratio_direct, 1.0, 1e-6) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sweep_csv(workers: usize) -> Result<(String, f64), String> {
    let spec = SweepSpec {
        omega_range: (0.0, 5.0, 0.05),
        n_range: (2, 8),
        template: weak(),
        horizon: horizon(),
        workers,
    };
    let start = Instant::now();
    let result = sweep(&spec).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let rows: Vec<SweepCsvRow> = result.rows.iter().map(SweepCsvRow::from).collect();
    Ok((to_csv(&rows).map_err(|e| e.to_string())?, elapsed))
}

pub fn determinism() -> Verdict {
    let (one, _) = sweep_csv(1)?;
    let (eight, _) = sweep_csv(8)?;
    let (_, four_secs) = sweep_csv(4)?;
    let rows = one.lines().count() - 1;
    let msg = format!(
        "{rows} rows, workers 1 vs 8 identical: {}, 4-worker sweep {four_secs:.2} s (< 60 s)",
        one == eight
    );
    if one == eight && four_secs < 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Every criterion, in order, with a short name.
pub const CRITERIA: [Criterion; 9] = [
    ("strong-coupling baseline non-Markovianity", strong_baseline),
    ("strong-coupling baseline QSL ratio", strong_baseline_qsl),
    ("weak-regime critical couplings", weak_critical_couplings),
    ("integer crossover in N", integer_crossover),
    ("strong-regime bounds", strong_regime_bounds),
    ("oracle equivalence", oracle_equivalence),
    ("relation identity", relation_identity),
    ("weak-coupling Markovian baseline", weak_baseline),
    ("sweep determinism and runtime", determinism),
];
