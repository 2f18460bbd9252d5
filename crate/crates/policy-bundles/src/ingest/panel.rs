//! Assembly of the lagged analysis panel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::outcomes::{CovariateRecord, OutcomeRecord};
use crate::states::{Gender, StateCode};

/// One state-year-gender analysis row with its lag structure resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub state: StateCode,
    pub year: i32,
    pub gender: Gender,
    pub deaths: u64,
    pub population: u64,
    pub prescribing_rate: f64,
    pub gini: f64,
    pub income: f64,
    /// Lag -> death count of the same (state, gender) series at year - lag.
    pub deaths_lag: BTreeMap<u32, u64>,
    /// Lag -> cluster label of the state at year - lag.
    pub cluster_lag: BTreeMap<u32, u32>,
    /// All configured lags resolved.
    pub complete: bool,
}

/// Lag configuration for panel assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelLags {
    pub cluster_lags: Vec<u32>,
    pub deaths_lags: Vec<u32>,
}

impl Default for PanelLags {
    fn default() -> Self {
        PanelLags {
            cluster_lags: vec![1],
            deaths_lags: vec![1],
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct JoinReport {
    pub rows: usize,
    pub complete_rows: usize,
    pub incomplete_rows: usize,
    pub missing_deaths_lags: usize,
    pub missing_cluster_lags: usize,
}

/// Build one row per (state, year, gender) within the window. Lags are
/// resolved against the full outcome history and cluster assignment,
/// including years before the window. Rows with unresolved lags are
/// flagged incomplete, not dropped.
pub fn assemble_panel(
    outcomes: &[OutcomeRecord],
    covariates: &[CovariateRecord],
    cluster_assignment: &BTreeMap<(StateCode, i32), u32>,
    window: std::ops::RangeInclusive<i32>,
    lags: &PanelLags,
) -> Result<(Vec<PanelObservation>, JoinReport)> {
    let deaths_by_key: BTreeMap<(StateCode, i32, Gender), u64> = outcomes
        .iter()
        .map(|o| ((o.state, o.year, o.gender), o.deaths))
        .collect();
    let covariate_by_key: BTreeMap<(StateCode, i32), &CovariateRecord> =
        covariates.iter().map(|c| ((c.state, c.year), c)).collect();

    let mut in_window: Vec<&OutcomeRecord> = outcomes
        .iter()
        .filter(|o| window.contains(&o.year))
        .collect();
    in_window.sort_by_key(|o| (o.state, o.year, o.gender));

    let mut report = JoinReport::default();
    let mut panel = Vec::with_capacity(in_window.len());
    for o in in_window {
        let cov = covariate_by_key
            .get(&(o.state, o.year))
            .ok_or_else(|| Error::MissingCovariate {
                state: o.state.to_string(),
                year: o.year,
            })?;
        let mut complete = true;
        let mut deaths_lag = BTreeMap::new();
        for &lag in &lags.deaths_lags {
            match deaths_by_key.get(&(o.state, o.year - lag as i32, o.gender)) {
                Some(&d) => {
                    deaths_lag.insert(lag, d);
                }
                None => {
                    complete = false;
                    report.missing_deaths_lags += 1;
                }
            }
        }
        let mut cluster_lag = BTreeMap::new();
        for &lag in &lags.cluster_lags {
            match cluster_assignment.get(&(o.state, o.year - lag as i32)) {
                Some(&c) => {
                    cluster_lag.insert(lag, c);
                }
                None => {
                    complete = false;
                    report.missing_cluster_lags += 1;
                }
            }
        }
        report.rows += 1;
        if complete {
            report.complete_rows += 1;
        } else {
            report.incomplete_rows += 1;
        }
        panel.push(PanelObservation {
            state: o.state,
            year: o.year,
            gender: o.gender,
            deaths: o.deaths,
            population: o.population,
            prescribing_rate: cov.prescribing_rate,
            gini: cov.gini,
            income: cov.income,
            deaths_lag,
            cluster_lag,
            complete,
        });
    }
    Ok((panel, report))
}
