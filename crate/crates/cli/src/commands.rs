use std::path::{Path, PathBuf};

use anyhow::Context;
use hiersim::analysis::{
    critical_kappa, critical_n, critical_omega, evaluate, phase_boundary, sweep, Crossing, Horizon,
    SweepRow, SweepSpec,
};
use hiersim::model::ModelParams;
use hiersim::propagation::simulate;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CriticalArgs, MetricArg, ReproArgs, RunArgs, ScanArg, SweepArgs};
use crate::config::{default_workers, resolve_run, resolve_sweep, usage, RunConfig};
use crate::svg;
use crate::table::{self, DynamicsRow, MeasureRow, SweepCsvRow};

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub csv: String,
    pub summary: Value,
    pub svg: Option<String>,
}

fn summary(command: &str, run: &RunConfig, result: Value) -> Value {
    json!({
        "command": command,
        "version": hiersim::VERSION,
        "params": run.params,
        "grid": { "tau": run.tau, "dt": run.dt },
        "result": result,
    })
}

pub fn dynamics(args: &RunArgs) -> anyhow::Result<OutputBundle> {
    let run = resolve_run(&args.model)?;
    let traj = simulate(&run.params, &run.grid()?)?;
    let csv = table::to_csv(&table::dynamics_rows(&traj))?;

    let svg = if args.svg.is_some() {
        let rows: Vec<DynamicsRow> = table::from_csv(&csv)?;
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.survival)).collect();
        Some(svg::line_plot(
            &points,
            "Excited-state population",
            "t Ω₀",
            "P(t)",
        ))
    } else {
        None
    };

    let last = traj.len() - 1;
    let result = json!({
        "points": traj.len(),
        "method": format!("{:?}", traj.method).to_lowercase(),
        "t_end": traj.time(last),
        "survival_at_end": traj.g[last].norm_sqr(),
    });
    Ok(OutputBundle {
        csv,
        summary: summary("dynamics", &run, result),
        svg,
    })
}

pub fn measure(args: &RunArgs) -> anyhow::Result<OutputBundle> {
    let run = resolve_run(&args.model)?;
    let report = evaluate(&run.params, &run.horizon())?;
    let row = MeasureRow::from(&report);
    let mut result = serde_json::to_value(row)?;
    result["stationary"] = json!(report.stationary);
    result["non_markovian"] = json!(report.is_non_markovian());
    Ok(OutputBundle {
        csv: table::to_csv(&[row])?,
        summary: summary("measure", &run, result),
        svg: None,
    })
}

#[derive(Debug, Serialize)]
struct CriticalRow {
    scan: &'static str,
    value: String,
    multiple: bool,
}

pub fn critical(args: &CriticalArgs) -> anyhow::Result<OutputBundle> {
    let run = resolve_run(&args.model)?;
    let horizon = run.horizon();
    let bracket = |default_hi: f64| (args.lo.unwrap_or(0.0), args.hi.unwrap_or(default_hi));
    let check = |b: (f64, f64)| {
        if b.0.is_finite() && b.1.is_finite() && 0.0 <= b.0 && b.0 < b.1 {
            Ok(b)
        } else {
            Err(usage(format!("invalid bracket [{}, {}]", b.0, b.1)))
        }
    };

    let (scan, value, multiple): (&'static str, Option<f64>, bool) = match args.scan {
        ScanArg::Omega => {
            let n = run.params.n_cavities;
            if n == 0 {
                return Err(usage("--scan omega needs --n-cavities"));
            }
            let c = critical_omega(&run.params, n, &horizon, check(bracket(5.0))?)?;
            (
                "omega",
                c.map(|c| c.value),
                c.is_some_and(|c: Crossing| c.multiple),
            )
        }
        ScanArg::Kappa => {
            let c = critical_kappa(&run.params, &horizon, check(bracket(10.0))?)?;
            (
                "kappa",
                c.map(|c| c.value),
                c.is_some_and(|c: Crossing| c.multiple),
            )
        }
        ScanArg::N => {
            if args.n_max < 2 {
                return Err(usage("--n-max must be at least 2"));
            }
            let n = critical_n(&run.params, run.params.omega, &horizon, args.n_max)?;
            ("n", n.map(|n| n as f64), false)
        }
    };

    let row = CriticalRow {
        scan,
        value: value.map_or_else(|| "none".to_string(), |v| v.to_string()),
        multiple,
    };
    let result = json!({
        "scan": scan,
        "found": value.is_some(),
        "value": value,
        "multiple": multiple,
        "report": if value.is_some() { "found" } else { "none" },
    });
    Ok(OutputBundle {
        csv: table::to_csv(&[row])?,
        summary: summary("critical", &run, result),
        svg: None,
    })
}

fn sweep_bundle(spec: &SweepSpec, metric: MetricArg, title: &str) -> anyhow::Result<OutputBundle> {
    let result = sweep(spec)?;
    let rows: Vec<SweepCsvRow> = result.rows.iter().map(SweepCsvRow::from).collect();
    let csv = table::to_csv(&rows)?;

    // The plot is drawn from the serialized table, not the in-memory rows.
    let parsed: Vec<SweepCsvRow> = table::from_csv(&csv)?;
    let as_rows: Vec<SweepRow> = parsed.iter().map(SweepRow::from).collect();
    let boundary = phase_boundary(&as_rows);
    let svg = match metric {
        MetricArg::QslRatio => {
            svg::heat_map(&parsed, &boundary, title, "τ_QSL/τ", |r| r.qsl_ratio)
        }
        MetricArg::Nonmarkovianity => {
            svg::heat_map(&parsed, &boundary, title, "N(Φ)", |r| r.nonmarkovianity)
        }
    };

    let failed = result.rows.iter().filter(|r| !r.is_ok()).count();
    let summary = json!({
        "command": "sweep",
        "version": result.version,
        "params": spec.template,
        "grid": { "tau": spec.horizon.tau, "dt": spec.horizon.dt },
        "sweep": {
            "omega_range": spec.omega_range,
            "n_range": spec.n_range,
            "workers": spec.workers,
        },
        "result": {
            "rows": result.rows.len(),
            "failed_rows": failed,
            "boundary": boundary,
        },
    });
    Ok(OutputBundle {
        csv,
        summary,
        svg: Some(svg),
    })
}

pub fn sweep_command(args: &SweepArgs) -> anyhow::Result<OutputBundle> {
    let spec = resolve_sweep(&args.model, &args.range)?;
    let title = match args.metric {
        MetricArg::QslRatio => "Speed-limit ratio over the Ω–N plane",
        MetricArg::Nonmarkovianity => "Non-Markovianity over the Ω–N plane",
    };
    sweep_bundle(&spec, args.metric, title)
}

/// Files produced by a figure reproduction, keyed by file name.
#[derive(Debug, Clone)]
pub struct Repro {
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

fn weak_template() -> ModelParams {
    ModelParams::new(5.0, 5.0, 0.0, 5.0, 2).expect("valid rates")
}

fn strong_template() -> ModelParams {
    ModelParams::new(0.2, 0.2, 0.0, 0.2, 2).expect("valid rates")
}

fn plane(args: &ReproArgs, template: ModelParams, n_max: usize) -> anyhow::Result<SweepSpec> {
    let spec = SweepSpec {
        omega_range: (0.0, 5.0, args.omega_step),
        n_range: (2, n_max),
        template,
        horizon: Horizon::new(3.0),
        workers: args.workers.unwrap_or_else(default_workers),
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct KappaRow {
    kappa: f64,
    omega: f64,
    n: usize,
    nonmarkovianity: f64,
}

fn kappa_curves() -> anyhow::Result<Vec<KappaRow>> {
    let horizon = Horizon::new(3.0);
    let cases = [(1.0, 2), (1.0, 3), (1.0, 4), (1.0, 5), (1.0, 6)]
        .into_iter()
        .chain([0.0, 0.5, 1.5].map(|w| (w, 4)));
    let mut rows = Vec::new();
    for (omega, n) in cases {
        for k in 0..=100 {
            let kappa = 0.1 * k as f64;
            let params = weak_template()
                .with_omega(omega)
                .with_n(n)
                .with_kappa(kappa);
            rows.push(KappaRow {
                kappa,
                omega,
                n,
                nonmarkovianity: evaluate(&params, &horizon)?.nonmarkovianity,
            });
        }
    }
    Ok(rows)
}

fn plane_files(
    stem: &str,
    spec: &SweepSpec,
    metric: MetricArg,
    title: &str,
) -> anyhow::Result<(Vec<(String, String)>, Value)> {
    let bundle = sweep_bundle(spec, metric, title)?;
    let files = vec![
        (format!("{stem}.csv"), bundle.csv),
        (format!("{stem}.svg"), bundle.svg.unwrap_or_default()),
    ];
    Ok((files, bundle.summary["result"].clone()))
}

pub fn repro(figure: u8, args: &ReproArgs) -> anyhow::Result<Repro> {
    let baseline = |gamma0| evaluate(&ModelParams::baseline(gamma0), &Horizon::new(3.0));
    let (files, result) = match figure {
        2 => {
            let spec = plane(args, weak_template(), 8)?;
            let (mut files, plane) = plane_files(
                "fig2_plane",
                &spec,
                MetricArg::Nonmarkovianity,
                "Non-Markovianity, Γ₀ = κ = Γ = 5",
            )?;
            files.insert(
                0,
                ("fig2_kappa.csv".into(), table::to_csv(&kappa_curves()?)?),
            );
            (files, json!({ "plane": plane }))
        }
        3 => {
            let spec = plane(args, strong_template(), 10)?;
            let (files, plane) = plane_files(
                "fig3_plane",
                &spec,
                MetricArg::Nonmarkovianity,
                "Non-Markovianity, Γ₀ = κ = Γ = 0.2",
            )?;
            let b = baseline(0.2)?;
            (
                files,
                json!({ "plane": plane, "baseline_nonmarkovianity": b.nonmarkovianity }),
            )
        }
        4 => {
            let spec = plane(args, weak_template(), 8)?;
            let (files, plane) = plane_files(
                "fig4_plane",
                &spec,
                MetricArg::QslRatio,
                "Speed-limit ratio, Γ₀ = κ = Γ = 5",
            )?;
            (files, json!({ "plane": plane }))
        }
        5 => {
            let spec = plane(args, strong_template(), 10)?;
            let (files, plane) = plane_files(
                "fig5_plane",
                &spec,
                MetricArg::QslRatio,
                "Speed-limit ratio, Γ₀ = κ = Γ = 0.2",
            )?;
            let b = baseline(0.2)?;
            (
                files,
                json!({ "plane": plane, "baseline_qsl_ratio": b.qsl_ratio_direct }),
            )
        }
        _ => return Err(usage(format!("no reproduction for figure {figure}"))),
    };
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    let summary = json!({
        "command": format!("repro-fig{figure}"),
        "version": hiersim::VERSION,
        "files": names,
        "result": result,
    });
    Ok(Repro { files, summary })
}

/// Writes the bundle. The CSV goes to `out`, or to stdout when `out` is
/// absent and `table_on_stdout` is set; the summary then goes to stderr.
pub fn deliver(
    bundle: &OutputBundle,
    out: Option<&Path>,
    svg_path: Option<&Path>,
    table_on_stdout: bool,
) -> anyhow::Result<()> {
    if let (Some(path), Some(svg)) = (svg_path, &bundle.svg) {
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    let line = serde_json::to_string(&bundle.summary)?;
    match out {
        Some(path) => {
            std::fs::write(path, &bundle.csv)
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{line}");
        }
        None if table_on_stdout => {
            print!("{}", bundle.csv);
            eprintln!("{line}");
        }
        None => println!("{line}"),
    }
    Ok(())
}

pub fn deliver_repro(repro: &Repro, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, content) in &repro.files {
        let path: PathBuf = dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{}", serde_json::to_string(&repro.summary)?);
    Ok(())
}
