//! File formats: CSV tables and JSON reports. All writers are
//! deterministic; identical values produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::cluster::cut::{ClusterAssignment, ElbowCurve};
use crate::cluster::gower::DissimilarityMatrix;
use crate::cluster::linkage::{Dendrogram, Node};
use crate::effects::attenuation::AttenuationProfile;
use crate::effects::brightspots::BrightSpotScore;
use crate::effects::counterfactual::TrajectoryPoint;
use crate::effects::relative::EffectEstimate;
use crate::error::{Error, Result};
use crate::glm::fit::FitResult;
use crate::ingest::outcomes::{CovariateRecord, OutcomeRecord};
use crate::ingest::panel::PanelObservation;
use crate::ingest::policy::PolicyRecord;

fn open(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

macro_rules! emit {
    ($w:expr, $path:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|e| Error::io($path.display().to_string(), e))?
    };
}

/// Serialize a value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = open(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Data(format!("serializing {}: {e}", path.display())))?;
    emit!(w, path, "");
    finish(w, path)
}

pub fn write_policy_csv(path: &Path, records: &[PolicyRecord]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "state,policy_id,effective_date,valid_through");
    for r in records {
        let through = r.valid_through.map(|d| d.to_string()).unwrap_or_default();
        emit!(w, path, "{},{},{},{}", r.state, r.policy_id, r.effective_date, through);
    }
    finish(w, path)
}

pub fn write_outcome_csv(path: &Path, records: &[OutcomeRecord]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "state,year,gender,deaths,population");
    for r in records {
        emit!(
            w,
            path,
            "{},{},{},{},{}",
            r.state,
            r.year,
            r.gender.as_str(),
            r.deaths,
            r.population
        );
    }
    finish(w, path)
}

pub fn write_covariate_csv(path: &Path, records: &[CovariateRecord]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "state,year,prescribing_rate,gini,income");
    for r in records {
        emit!(
            w,
            path,
            "{},{},{},{},{}",
            r.state,
            r.year,
            r.prescribing_rate,
            r.gini,
            r.income
        );
    }
    finish(w, path)
}

/// Panel export: fixed base columns, then one column per configured lag,
/// in ascending lag order.
pub fn write_panel_csv(
    path: &Path,
    panel: &[PanelObservation],
    deaths_lags: &[u32],
    cluster_lags: &[u32],
) -> Result<()> {
    let mut w = open(path)?;
    let mut header =
        "state,year,gender,deaths,population,prescribing_rate,gini,income".to_string();
    for lag in deaths_lags {
        header.push_str(&format!(",deaths_lag{lag}"));
    }
    for lag in cluster_lags {
        header.push_str(&format!(",cluster_lag{lag}"));
    }
    header.push_str(",complete");
    emit!(w, path, "{header}");
    for r in panel {
        let mut line = format!(
            "{},{},{},{},{},{},{},{}",
            r.state,
            r.year,
            r.gender.as_str(),
            r.deaths,
            r.population,
            r.prescribing_rate,
            r.gini,
            r.income
        );
        for lag in deaths_lags {
            match r.deaths_lag.get(lag) {
                Some(v) => line.push_str(&format!(",{v}")),
                None => line.push(','),
            }
        }
        for lag in cluster_lags {
            match r.cluster_lag.get(lag) {
                Some(v) => line.push_str(&format!(",{v}")),
                None => line.push(','),
            }
        }
        line.push_str(if r.complete { ",true" } else { ",false" });
        emit!(w, path, "{line}");
    }
    finish(w, path)
}

/// Row-key header, then the dense lower triangle: row i holds the i
/// dissimilarities to earlier rows.
pub fn write_distance_csv(path: &Path, d: &DissimilarityMatrix) -> Result<()> {
    let mut w = open(path)?;
    let keys: Vec<String> = d
        .keys
        .iter()
        .map(|(s, y)| format!("{s}:{y}"))
        .collect();
    emit!(w, path, "{}", keys.join(","));
    for i in 1..d.len() {
        let row: Vec<String> = (0..i).map(|j| d.get(i, j).to_string()).collect();
        emit!(w, path, "{}", row.join(","));
    }
    finish(w, path)
}

/// Merge list with the usual statistical-tool convention: leaf i appears
/// as -(i + 1), merge step m as m + 1.
pub fn write_dendrogram_csv(path: &Path, dendrogram: &Dendrogram) -> Result<()> {
    let encode = |node: Node| -> i64 {
        match node {
            Node::Leaf(i) => -(i as i64 + 1),
            Node::Internal(m) => m as i64 + 1,
        }
    };
    let mut w = open(path)?;
    emit!(w, path, "step,left,right,height");
    for (step, m) in dendrogram.merges.iter().enumerate() {
        emit!(
            w,
            path,
            "{},{},{},{}",
            step + 1,
            encode(m.left),
            encode(m.right),
            m.height
        );
    }
    finish(w, path)
}

pub fn write_clusters_csv(path: &Path, assignment: &ClusterAssignment) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "state,year,cluster");
    for ((state, year), label) in assignment.keys.iter().zip(&assignment.leaf_labels) {
        emit!(w, path, "{state},{year},{label}");
    }
    finish(w, path)
}

pub fn write_elbow_csv(path: &Path, curve: &ElbowCurve) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "k,w,explainability,second_difference,suggested");
    for p in &curve.points {
        let second = p
            .second_difference
            .map(|s| s.to_string())
            .unwrap_or_default();
        emit!(
            w,
            path,
            "{},{},{},{},{}",
            p.k,
            p.w,
            p.explainability,
            second,
            curve.suggested_k == Some(p.k)
        );
    }
    finish(w, path)
}

/// Coefficient table mirroring the JSON fit report.
pub fn write_fit_csv(path: &Path, fit: &FitResult) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "term,estimate,se,z");
    for (i, name) in fit.columns.iter().enumerate() {
        let est = fit.coefficients[i];
        let se = fit.covariance[i][i].max(0.0).sqrt();
        let z = if se > 0.0 { est / se } else { f64::NAN };
        emit!(w, path, "{name},{est},{se},{z}");
    }
    for name in &fit.aliased {
        emit!(w, path, "{name},NA,NA,NA");
    }
    finish(w, path)
}

pub fn write_effects_csv(path: &Path, effects: &[EffectEstimate]) -> Result<()> {
    let mut w = open(path)?;
    emit!(
        w,
        path,
        "cluster,predicted_deaths,linear_se,rate_ratio,band_low,band_high"
    );
    for e in effects {
        emit!(
            w,
            path,
            "{},{},{},{},{},{}",
            e.cluster,
            e.predicted_deaths,
            e.linear_se,
            e.rate_ratio,
            e.band_low,
            e.band_high
        );
    }
    finish(w, path)
}

pub fn write_trajectory_csv(path: &Path, points: &[TrajectoryPoint]) -> Result<()> {
    let mut w = open(path)?;
    emit!(
        w,
        path,
        "year,gender,observed_deaths,baseline_deaths,counterfactual_deaths"
    );
    for p in points {
        emit!(
            w,
            path,
            "{},{},{},{},{}",
            p.year,
            p.gender.as_str(),
            p.observed_deaths,
            p.baseline_deaths,
            p.counterfactual_deaths
        );
    }
    finish(w, path)
}

pub fn write_attenuation_csv(path: &Path, profiles: &[AttenuationProfile]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "cluster,lag,coefficient,se,lower,upper");
    for profile in profiles {
        for p in &profile.points {
            emit!(
                w,
                path,
                "{},{},{},{},{},{}",
                profile.cluster,
                p.lag,
                p.coefficient,
                p.se,
                p.lower,
                p.upper
            );
        }
    }
    finish(w, path)
}

pub fn write_brightspots_csv(path: &Path, scores: &[BrightSpotScore]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "rank,state,mean_residual,n_rows,flag");
    for s in scores {
        let flag = match s.flag {
            crate::effects::brightspots::SpotFlag::Bright => "bright",
            crate::effects::brightspots::SpotFlag::Trouble => "trouble",
            crate::effects::brightspots::SpotFlag::None => "",
        };
        emit!(
            w,
            path,
            "{},{},{},{},{}",
            s.rank,
            s.state,
            s.mean_residual,
            s.n_rows,
            flag
        );
    }
    finish(w, path)
}
