//! CSV tables. Floats use the shortest representation that parses back
//! to the same value.

use hiersim::analysis::{RowStatus, SweepRow};
use hiersim::measures::MeasureReport;
use hiersim::propagation::AmplitudeTrajectory;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRow {
    pub t: f64,
    pub re_g: f64,
    pub im_g: f64,
    pub survival: f64,
    pub re_c0: f64,
    pub im_c0: f64,
    pub re_csum: f64,
    pub im_csum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub nonmarkovianity: f64,
    pub qsl_ratio_direct: f64,
    pub qsl_ratio_relation: f64,
    pub survival_at_tau: f64,
    pub consistency_residual: f64,
}

impl From<&MeasureReport> for MeasureRow {
    fn from(r: &MeasureReport) -> Self {
        Self {
            nonmarkovianity: r.nonmarkovianity,
            qsl_ratio_direct: r.qsl_ratio_direct,
            qsl_ratio_relation: r.qsl_ratio_relation,
            survival_at_tau: r.survival_at_tau,
            consistency_residual: r.consistency_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub omega: f64,
    pub n: usize,
    pub nonmarkovianity: f64,
    pub qsl_ratio: f64,
    pub survival_at_tau: f64,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            omega: r.omega,
            n: r.n,
            nonmarkovianity: r.nonmarkovianity,
            qsl_ratio: r.qsl_ratio,
            survival_at_tau: r.survival_at_tau,
            status: match &r.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Failed(msg) => format!("failed: {msg}"),
            },
        }
    }
}

impl From<&SweepCsvRow> for SweepRow {
    fn from(r: &SweepCsvRow) -> Self {
        Self {
            omega: r.omega,
            n: r.n,
            nonmarkovianity: r.nonmarkovianity,
            qsl_ratio: r.qsl_ratio,
            survival_at_tau: r.survival_at_tau,
            status: match r.status.strip_prefix("failed: ") {
                Some(msg) => RowStatus::Failed(msg.to_string()),
                None => RowStatus::Ok,
            },
        }
    }
}

pub fn dynamics_rows(traj: &AmplitudeTrajectory) -> Vec<DynamicsRow> {
    (0..traj.len())
        .map(|k| DynamicsRow {
            t: traj.time(k),
            re_g: traj.g[k].re,
            im_g: traj.g[k].im,
            survival: traj.g[k].norm_sqr(),
            re_c0: traj.c0[k].re,
            im_c0: traj.c0[k].im,
            re_csum: traj.csum[k].re,
            im_csum: traj.csum[k].im,
        })
        .collect()
}

/// Serializes rows with a header and LF line endings.
pub fn to_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> anyhow::Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}
