use std::path::Path;
use std::process::{Command, Output};

use hiersim::analysis::{critical_n, Horizon};
use hiersim::model::ModelParams;
use hiersim_cli::table::{from_csv, DynamicsRow, SweepCsvRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const WEAK: &[&str] = &[
    "--gamma0", "5", "--kappa", "5", "--gamma", "5", "--tau", "3",
];

fn hiersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiersim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = hiersim(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn summary(bytes: &[u8]) -> Value {
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run_owned(args: &[String]) -> Output {
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dynamics_baseline_csv() {
    let out = ok(&["dynamics", "--gamma0", "0.2", "--kappa", "0", "--tau", "3"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t,re_g,im_g,survival,re_c0,im_c0,re_csum,im_csum\n"));
    assert!(!csv.contains('\r'));
    let rows: Vec<DynamicsRow> = from_csv(&csv).unwrap();
    assert_eq!(rows.len(), 3001);
    let last = rows.last().unwrap();
    assert_eq!(last.t, 3.0);
    assert!((last.survival - 0.714).abs() < 0.01);
    assert_eq!(last.survival, last.re_g * last.re_g + last.im_g * last.im_g);
    assert_eq!(summary(&out.stderr)["command"], "dynamics");
}

#[test]
fn dynamics_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = [
        "dynamics", "--gamma0", "0.7", "--kappa", "1.3", "--omega", "0.9",
    ];
    for p in [&a, &b] {
        let mut v = args.to_vec();
        v.extend([
            "--gamma",
            "0.4",
            "--n-cavities",
            "5",
            "--tau",
            "4",
            "--out",
            path(p),
        ]);
        ok(&v);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn dynamics_svg_is_valid_xml() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let csv = dir.path().join("p.csv");
    ok(&[
        "dynamics",
        "--gamma0",
        "0.2",
        "--tau",
        "3",
        "--out",
        path(&csv),
        "--svg",
        path(&svg),
    ]);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        vec!["dynamics", "--gamma0", "0.2", "--tau", "0"],
        vec!["dynamics", "--tau", "3"],
        vec!["measure", "--gamma0", "-1", "--tau", "3"],
        vec![
            "dynamics",
            "--gamma0",
            "0.2",
            "--tau",
            "3",
            "--topology",
            "ring",
        ],
        vec!["critical", "--scan", "omega", "--gamma0", "5", "--tau", "3"],
        vec![
            "sweep",
            "--gamma0",
            "5",
            "--tau",
            "3",
            "--omega-min",
            "2",
            "--omega-max",
            "1",
            "--n-max",
            "4",
        ],
        vec![
            "sweep",
            "--gamma0",
            "5",
            "--tau",
            "3",
            "--omega-max",
            "1",
            "--omega-step",
            "0",
            "--n-max",
            "4",
        ],
        vec![
            "sweep",
            "--gamma0",
            "5",
            "--tau",
            "3",
            "--omega-max",
            "1",
            "--n-min",
            "5",
            "--n-max",
            "4",
        ],
        vec!["sweep", "--gamma0", "5", "--tau", "3", "--n-max", "4"],
        vec!["measure", "--gamma0", "0.2", "--tau", "3", "--no-such-flag"],
    ] {
        let out = hiersim(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn measure_strong_baseline() {
    let out = ok(&["measure", "--gamma0", "0.2", "--kappa", "0", "--tau", "3"]);
    let s = summary(&out.stdout);
    let r = &s["result"];
    let get = |k: &str| r[k].as_f64().unwrap();
    assert!((get("nonmarkovianity") - 0.714).abs() < 0.01);
    assert!((get("qsl_ratio_direct") - 0.166).abs() < 0.005);
    assert!((get("qsl_ratio_relation") - 0.166).abs() < 0.005);
    assert!((get("survival_at_tau") - 0.714).abs() < 0.01);
    assert!(get("consistency_residual") < 1e-6);
    assert_eq!(s["version"], hiersim::VERSION);
    assert_eq!(s["params"]["gamma0"], 0.2);
    assert_eq!(s["grid"]["tau"], 3.0);
}

#[test]
fn measure_weak_baseline_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let out = ok(&[
        "measure",
        "--gamma0",
        "5",
        "--kappa",
        "0",
        "--tau",
        "3",
        "--out",
        path(&csv),
    ]);
    let r = summary(&out.stdout)["result"].clone();
    assert_eq!(r["nonmarkovianity"], 0.0);
    assert!((r["qsl_ratio_direct"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r["qsl_ratio_relation"], 1.0);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "nonmarkovianity,qsl_ratio_direct,qsl_ratio_relation,survival_at_tau,consistency_residual"
    );
    let fields: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(fields[0], 0.0);
    assert_eq!(fields[3], r["survival_at_tau"].as_f64().unwrap());
}

#[test]
fn measure_consistency_on_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let vals: Vec<String> = (0..4)
            .map(|_| rng.random_range(0.0..10.0f64).to_string())
            .collect();
        let n = rng.random_range(0..=12usize).to_string();
        let out = ok(&[
            "measure",
            "--gamma0",
            &vals[0],
            "--kappa",
            &vals[1],
            "--omega",
            &vals[2],
            "--gamma",
            &vals[3],
            "--n-cavities",
            &n,
            "--tau",
            "3",
        ]);
        let residual = summary(&out.stdout)["result"]["consistency_residual"]
            .as_f64()
            .unwrap();
        assert!(residual < 1e-6, "{vals:?} N={n}: {residual}");
    }
}

#[test]
fn critical_omega_and_none() {
    let s = summary(
        &run_owned(&with(
            &["critical", "--scan", "omega", "--n-cavities", "6"],
            WEAK,
        ))
        .stdout,
    );
    assert!((s["result"]["value"].as_f64().unwrap() - 2.39).abs() <= 0.05);

    let s = summary(
        &run_owned(&with(
            &["critical", "--scan", "omega", "--n-cavities", "2"],
            WEAK,
        ))
        .stdout,
    );
    assert_eq!(s["result"]["report"], "none");
    assert!(s["result"]["value"].is_null());
}

#[test]
fn critical_n_matches_library() {
    let template = ModelParams::new(5.0, 5.0, 0.0, 5.0, 2).unwrap();
    for omega in ["0.5", "1.5"] {
        let s =
            summary(&run_owned(&with(&["critical", "--scan", "n", "--omega", omega], WEAK)).stdout);
        let expected =
            critical_n(&template, omega.parse().unwrap(), &Horizon::new(3.0), 12).unwrap();
        assert_eq!(s["result"]["value"].as_f64().map(|v| v as usize), expected);
    }
}

#[test]
fn critical_kappa_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    ok(&[
        "critical",
        "--scan",
        "kappa",
        "--gamma0",
        "5",
        "--omega",
        "1",
        "--gamma",
        "5",
        "--n-cavities",
        "2",
        "--tau",
        "3",
        "--hi",
        "6",
        "--out",
        path(&csv),
    ]);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "scan,value,multiple\nkappa,none,false\n"
    );
}

#[test]
fn sweep_boundary_passes_through_critical_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let mut args = with(
        &[
            "sweep",
            "--omega-max",
            "5",
            "--omega-step",
            "0.05",
            "--n-max",
            "8",
            "--workers",
            "4",
        ],
        WEAK,
    );
    args.extend(["--out", path(&csv), "--svg", path(&svg)].map(String::from));
    let out = run_owned(&args);
    let s = summary(&out.stdout);
    assert_eq!(s["result"]["rows"], 101 * 7);
    assert_eq!(s["result"]["failed_rows"], 0);
    let boundary = s["result"]["boundary"].as_array().unwrap();
    let at = |n: u64| boundary.iter().find(|b| b["n"] == n).unwrap()["omega"].as_f64();
    assert!((at(6).unwrap() - 2.39).abs() <= 0.05 + 0.025);
    assert!((at(8).unwrap() - 3.25).abs() <= 0.05 + 0.025);
    assert_eq!(at(2), None);

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("omega,n,nonmarkovianity,qsl_ratio,survival_at_tau,status\n"));
    let rows: Vec<SweepCsvRow> = from_csv(&text).unwrap();
    let keys: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.omega)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    assert_eq!(keys, sorted);

    // One heat-map cell per CSV row, plus the colour bar.
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&svg_text).unwrap();
    let cells = doc
        .descendants()
        .filter(|n| n.has_tag_name("rect") && n.parent().is_some_and(|p| p.has_tag_name("g")))
        .count();
    assert_eq!(cells, rows.len());
    assert!(doc.descendants().any(|n| n.has_tag_name("polyline")));
}

#[test]
fn sweep_bytes_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "8"] {
        let p = dir.path().join(format!("w{workers}.csv"));
        ok(&[
            "sweep",
            "--gamma0",
            "5",
            "--kappa",
            "5",
            "--gamma",
            "5",
            "--tau",
            "3",
            "--omega-max",
            "5",
            "--omega-step",
            "0.25",
            "--n-max",
            "8",
            "--workers",
            workers,
            "--out",
            path(&p),
        ]);
        files.push(std::fs::read(&p).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(
        &cfg,
        "[model]\ngamma0 = 5\nkappa = 5\ngamma = 5\nn_cavities = 6\n\n[grid]\ntau = 3\n\n[sweep]\nomega_max = 1\nomega_step = 0.5\nn_max = 3\n",
    )
    .unwrap();
    let s = summary(&ok(&["measure", "--config", path(&cfg)]).stdout);
    assert_eq!(s["params"]["n_cavities"], 6);
    let s = summary(&ok(&["measure", "--config", path(&cfg), "--n-cavities", "2"]).stdout);
    assert_eq!(s["params"]["n_cavities"], 2);
    assert_eq!(s["params"]["kappa"], 5.0);

    let out = ok(&["sweep", "--config", path(&cfg)]);
    let rows: Vec<SweepCsvRow> = from_csv(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 3 * 2);

    std::fs::write(&cfg, "[model]\ngamma0 = 5\nbogus = 1\n").unwrap();
    let out = hiersim(&["measure", "--config", path(&cfg), "--tau", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repro_fig4_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "repro-fig4",
        "--out",
        path(dir.path()),
        "--omega-step",
        "0.25",
    ]);
    let s = summary(&out.stdout);
    assert_eq!(
        s["files"],
        serde_json::json!(["fig4_plane.csv", "fig4_plane.svg"])
    );
    let rows: Vec<SweepCsvRow> =
        from_csv(&std::fs::read_to_string(dir.path().join("fig4_plane.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 21 * 7);
    let svg = std::fs::read_to_string(dir.path().join("fig4_plane.svg")).unwrap();
    roxmltree::Document::parse(&svg).unwrap();
}

#[test]
fn repro_fig3_reports_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "repro-fig3",
        "--out",
        path(dir.path()),
        "--omega-step",
        "0.5",
    ]);
    let b = summary(&out.stdout)["result"]["baseline_nonmarkovianity"]
        .as_f64()
        .unwrap();
    assert!((b - 0.714).abs() < 0.01);
}
