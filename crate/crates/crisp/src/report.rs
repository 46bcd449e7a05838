//! `eval` outputs: the JSON metric report and the per-frame reward CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crisp_core::evaluation::EvaluationReport;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "crisp-report";

/// Metric columns under their table names; `null` where inputs were missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "CD")]
    pub cd: Option<f64>,
    #[serde(rename = "CD_one(Recon->GT)")]
    pub cd_recon_to_gt: Option<f64>,
    #[serde(rename = "CD_one(GT->Recon)")]
    pub cd_gt_to_recon: Option<f64>,
    #[serde(rename = "Non-Pene")]
    pub non_pene: Option<f64>,
    #[serde(rename = "WA-MPJPE100")]
    pub wa_mpjpe100: Option<f64>,
    #[serde(rename = "W-MPJPE100")]
    pub w_mpjpe100: Option<f64>,
    #[serde(rename = "RTE")]
    pub rte: Option<f64>,
    #[serde(rename = "Jitter")]
    pub jitter: Option<f64>,
    #[serde(rename = "Accel")]
    pub accel: Option<f64>,
    #[serde(rename = "Reward(mean)")]
    pub reward_mean: Option<f64>,
}

impl From<&EvaluationReport> for Metrics {
    fn from(r: &EvaluationReport) -> Self {
        Metrics {
            cd: r.cd_bi,
            cd_recon_to_gt: r.cd_one_recon_to_gt,
            cd_gt_to_recon: r.cd_one_gt_to_recon,
            non_pene: r.non_pene,
            wa_mpjpe100: r.wa_mpjpe100,
            w_mpjpe100: r.w_mpjpe100,
            rte: r.rte,
            jitter: r.jitter,
            accel: r.accel,
            reward_mean: r
                .reward
                .as_ref()
                .filter(|t| !t.is_empty())
                .map(|t| t.iter().sum::<f64>() / t.len() as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub version: u32,
    /// Hash of the config used for evaluation.
    pub config_hash: String,
    /// Hash recorded in the evaluated primitive file, if any.
    pub primitives_config_hash: Option<String>,
    pub units: BTreeMap<String, String>,
    pub metrics: Metrics,
}

fn units() -> BTreeMap<String, String> {
    [
        ("CD", "m, mean of both one-way terms"),
        ("CD_one(Recon->GT)", "m, mean nearest-neighbor distance"),
        ("CD_one(GT->Recon)", "m, mean nearest-neighbor distance"),
        ("Non-Pene", "fraction of joint samples not inside any primitive"),
        ("WA-MPJPE100", "mm, 100-frame segments, full-segment rigid alignment"),
        ("W-MPJPE100", "mm, 100-frame segments, first-two-frame rigid alignment"),
        ("RTE", "%, final root drift over ground-truth root path length"),
        ("Jitter", "10 m/s^3, mean third-difference magnitude of predicted joints"),
        ("Accel", "mm/frame^2, mean second-difference error"),
        ("Reward(mean)", "mean per-frame tracking reward"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl ReportFile {
    pub fn new(report: &EvaluationReport, config_hash: String, primitives_config_hash: Option<String>) -> Self {
        ReportFile {
            format: REPORT_FORMAT.into(),
            version: 1,
            config_hash,
            primitives_config_hash,
            units: units(),
            metrics: report.into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `frame,reward` rows.
pub fn write_reward_csv(trace: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let mut write = || -> csv::Result<()> {
        w.write_record(["frame", "reward"])?;
        for (t, r) in trace.iter().enumerate() {
            w.write_record([t.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| Error::io(path, e.into()))
}

pub fn read_reward_csv(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::parse(path, e))?;
            rec.get(1)
                .ok_or_else(|| Error::parse(path, "missing reward column"))?
                .parse::<f64>()
                .map_err(|e| Error::parse(path, e))
        })
        .collect()
}

pub fn write_report(report: &ReportFile, path: &Path) -> Result<()> {
    fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))
}
