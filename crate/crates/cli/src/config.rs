//! Merging of config-file values and command-line flags into a run.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use hiersim::analysis::{Horizon, SweepSpec};
use hiersim::model::{ModelParams, Topology};
use hiersim::propagation::{TimeGrid, DEFAULT_DT};
use ini::Ini;
use serde::Serialize;

use crate::args::{ModelArgs, SweepRangeArgs, TopologyArg};

/// Bad flags or config values. Reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const MODEL_KEYS: &[&str] = &[
    "gamma0",
    "kappa",
    "omega",
    "gamma",
    "n_cavities",
    "omega0",
    "topology",
];
const GRID_KEYS: &[&str] = &["tau", "dt"];
const SWEEP_KEYS: &[&str] = &[
    "omega_min",
    "omega_max",
    "omega_step",
    "n_min",
    "n_max",
    "workers",
];

/// Values read from a config file, all optional.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub model: ModelArgs,
    pub range: SweepRangeArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        for (section, props) in ini.iter() {
            let allowed = match section {
                Some("model") => MODEL_KEYS,
                Some("grid") => GRID_KEYS,
                Some("sweep") => SWEEP_KEYS,
                Some(other) => return Err(usage(format!("config: unknown section [{other}]"))),
                None if props.is_empty() => continue,
                None => return Err(usage("config: keys must sit inside a section")),
            };
            if let Some((key, _)) = props.iter().find(|(k, _)| !allowed.contains(k)) {
                return Err(usage(format!(
                    "config: unknown key `{key}` in [{}]",
                    section.unwrap_or_default()
                )));
            }
        }

        let get = |section: &str, key: &str| ini.get_from(Some(section), key);
        let model = ModelArgs {
            config: None,
            gamma0: value(get("model", "gamma0"), "gamma0")?,
            kappa: value(get("model", "kappa"), "kappa")?,
            omega: value(get("model", "omega"), "omega")?,
            gamma: value(get("model", "gamma"), "gamma")?,
            n_cavities: value(get("model", "n_cavities"), "n_cavities")?,
            omega0: value(get("model", "omega0"), "omega0")?,
            topology: get("model", "topology").map(parse_topology).transpose()?,
            tau: value(get("grid", "tau"), "tau")?,
            dt: value(get("grid", "dt"), "dt")?,
        };
        let range = SweepRangeArgs {
            omega_min: value(get("sweep", "omega_min"), "omega_min")?,
            omega_max: value(get("sweep", "omega_max"), "omega_max")?,
            omega_step: value(get("sweep", "omega_step"), "omega_step")?,
            n_min: value(get("sweep", "n_min"), "n_min")?,
            n_max: value(get("sweep", "n_max"), "n_max")?,
            workers: value(get("sweep", "workers"), "workers")?,
        };
        Ok(Self { model, range })
    }
}

fn value<T: FromStr>(raw: Option<&str>, key: &str) -> anyhow::Result<Option<T>> {
    raw.map(|s| {
        s.trim()
            .parse()
            .map_err(|_| usage(format!("config: `{key}` has invalid value `{s}`")))
    })
    .transpose()
}

fn parse_topology(s: &str) -> anyhow::Result<TopologyArg> {
    match s.trim() {
        "reduced" | "reduced_symmetric" => Ok(TopologyArg::Reduced),
        "ring" | "ring_explicit" => Ok(TopologyArg::Ring),
        other => Err(usage(format!("config: unknown topology `{other}`"))),
    }
}

/// Model and grid after merging; flags win over the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub tau: f64,
    pub dt: f64,
}

impl RunConfig {
    pub fn grid(&self) -> anyhow::Result<TimeGrid> {
        TimeGrid::new(self.tau, self.dt).map_err(|e| usage(e.to_string()))
    }

    pub fn horizon(&self) -> Horizon {
        Horizon::new(self.tau).with_dt(self.dt)
    }
}

fn load_file(flags: &ModelArgs) -> anyhow::Result<FileConfig> {
    match &flags.config {
        Some(path) => FileConfig::load(path),
        None => Ok(FileConfig::default()),
    }
}

fn overlay_model(file: ModelArgs, flags: &ModelArgs) -> ModelArgs {
    ModelArgs {
        config: None,
        gamma0: flags.gamma0.or(file.gamma0),
        kappa: flags.kappa.or(file.kappa),
        omega: flags.omega.or(file.omega),
        gamma: flags.gamma.or(file.gamma),
        n_cavities: flags.n_cavities.or(file.n_cavities),
        omega0: flags.omega0.or(file.omega0),
        topology: flags.topology.or(file.topology),
        tau: flags.tau.or(file.tau),
        dt: flags.dt.or(file.dt),
    }
}

fn build_run(m: &ModelArgs) -> anyhow::Result<RunConfig> {
    let gamma0 = m.gamma0.ok_or_else(|| usage("missing --gamma0"))?;
    let tau = m.tau.ok_or_else(|| usage("missing --tau"))?;
    let params = ModelParams {
        omega0: m.omega0.unwrap_or(1.0),
        gamma0,
        kappa: m.kappa.unwrap_or(0.0),
        omega: m.omega.unwrap_or(0.0),
        gamma: m.gamma.unwrap_or(0.0),
        n_cavities: m.n_cavities.unwrap_or(0),
        topology: match m.topology {
            Some(TopologyArg::Ring) => Topology::RingExplicit,
            _ => Topology::ReducedSymmetric,
        },
    };
    params.validate().map_err(|e| usage(e.to_string()))?;
    if params.topology == Topology::RingExplicit && params.n_cavities < 2 {
        return Err(usage("ring topology needs --n-cavities of at least 2"));
    }
    let run = RunConfig {
        params,
        tau,
        dt: m.dt.unwrap_or(DEFAULT_DT),
    };
    run.grid()?;
    Ok(run)
}

/// Resolves a run from flags and the optional config file.
pub fn resolve_run(flags: &ModelArgs) -> anyhow::Result<RunConfig> {
    let file = load_file(flags)?;
    build_run(&overlay_model(file.model, flags))
}

/// Resolves a sweep; the Ω range and `n_max` are required.
pub fn resolve_sweep(flags: &ModelArgs, range: &SweepRangeArgs) -> anyhow::Result<SweepSpec> {
    let file = load_file(flags)?;
    let run = build_run(&overlay_model(file.model, flags))?;
    let r = &file.range;
    let omega_max = range
        .omega_max
        .or(r.omega_max)
        .ok_or_else(|| usage("missing --omega-max"))?;
    let n_max = range
        .n_max
        .or(r.n_max)
        .ok_or_else(|| usage("missing --n-max"))?;
    let spec = SweepSpec {
        omega_range: (
            range.omega_min.or(r.omega_min).unwrap_or(0.0),
            omega_max,
            range.omega_step.or(r.omega_step).unwrap_or(0.05),
        ),
        n_range: (range.n_min.or(r.n_min).unwrap_or(2), n_max),
        template: run.params,
        horizon: run.horizon(),
        workers: range.workers.or(r.workers).unwrap_or_else(default_workers),
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    Ok(spec)
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = FileConfig::parse(
            "[model]\ngamma0 = 5\nkappa=5\ntopology = ring\n[grid]\ntau = 3\n[sweep]\nn_max = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.model.gamma0, Some(5.0));
        assert_eq!(cfg.model.kappa, Some(5.0));
        assert_eq!(cfg.model.topology, Some(TopologyArg::Ring));
        assert_eq!(cfg.model.tau, Some(3.0));
        assert_eq!(cfg.range.n_max, Some(8));
        assert_eq!(cfg.model.omega, None);
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(FileConfig::parse("[model]\ngama0 = 5\n").is_err());
        assert!(FileConfig::parse("[plot]\nx = 1\n").is_err());
        assert!(FileConfig::parse("gamma0 = 5\n").is_err());
        assert!(FileConfig::parse("[model]\ngamma0 = five\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse("[model]\ngamma0 = 5\nkappa = 1\n[grid]\ntau = 3\n").unwrap();
        let flags = ModelArgs {
            kappa: Some(2.0),
            ..ModelArgs::default()
        };
        let run = build_run(&overlay_model(file.model, &flags)).unwrap();
        assert_eq!(run.params.kappa, 2.0);
        assert_eq!(run.params.gamma0, 5.0);
        assert_eq!(run.dt, DEFAULT_DT);
    }

    #[test]
    fn missing_or_invalid_values_are_usage_errors() {
        let err = build_run(&ModelArgs::default()).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        let zero_tau = ModelArgs {
            gamma0: Some(0.2),
            tau: Some(0.0),
            ..ModelArgs::default()
        };
        assert!(build_run(&zero_tau).unwrap_err().is::<UsageError>());
        let negative = ModelArgs {
            gamma0: Some(-1.0),
            tau: Some(3.0),
            ..ModelArgs::default()
        };
        assert!(build_run(&negative).unwrap_err().is::<UsageError>());
    }
}
