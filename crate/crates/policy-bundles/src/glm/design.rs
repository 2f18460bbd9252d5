//! Design-matrix construction with drop-first dummy coding and aliased
//! column removal.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::spec::{ColumnDef, ModelSpec};
use crate::ingest::panel::PanelObservation;
use crate::states::{Gender, StateCode};

/// Everything needed to encode a panel row into a design row, kept with
/// the fit so later stages can rebuild rows for prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignInfo {
    pub spec: ModelSpec,
    pub full_columns: Vec<ColumnDef>,
    /// False for columns removed as aliased.
    pub kept: Vec<bool>,
    pub reference_state: StateCode,
    pub reference_year: i32,
    pub state_levels: Vec<StateCode>,
    pub year_levels: Vec<i32>,
    /// Observed cluster levels per lag.
    pub cluster_levels: BTreeMap<u32, Vec<u32>>,
}

impl DesignInfo {
    pub fn column_names(&self) -> Vec<String> {
        self.full_columns
            .iter()
            .zip(&self.kept)
            .filter(|(_, &kept)| kept)
            .map(|(c, _)| c.name())
            .collect()
    }

    pub fn aliased_names(&self) -> Vec<String> {
        self.full_columns
            .iter()
            .zip(&self.kept)
            .filter(|(_, &kept)| !kept)
            .map(|(c, _)| c.name())
            .collect()
    }

    pub fn n_kept(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    /// Iterate the column definitions that survived the alias sweep, in
    /// design order.
    pub fn kept_columns(&self) -> impl Iterator<Item = &ColumnDef> {
        self.full_columns
            .iter()
            .zip(&self.kept)
            .filter(|(_, &kept)| kept)
            .map(|(c, _)| c)
    }

    pub fn encode_column(&self, def: &ColumnDef, obs: &PanelObservation) -> Result<f64> {
        let value = match def {
            ColumnDef::Intercept => 1.0,
            ColumnDef::StateDummy(s) => {
                if obs.state != self.reference_state && !self.state_levels.contains(&obs.state) {
                    return Err(Error::Data(format!(
                        "state {} not seen at fit time",
                        obs.state
                    )));
                }
                (obs.state == *s) as u8 as f64
            }
            ColumnDef::YearDummy(y) => {
                if obs.year != self.reference_year && !self.year_levels.contains(&obs.year) {
                    return Err(Error::Data(format!(
                        "year {} not seen at fit time",
                        obs.year
                    )));
                }
                (obs.year == *y) as u8 as f64
            }
            ColumnDef::YearLinear => (obs.year - self.reference_year) as f64,
            ColumnDef::GenderMale => (obs.gender == Gender::Male) as u8 as f64,
            ColumnDef::PrescribingRate => obs.prescribing_rate,
            ColumnDef::Gini => obs.gini,
            ColumnDef::Income => obs.income,
            ColumnDef::DeathsLag(l) => *obs.deaths_lag.get(l).ok_or_else(|| {
                Error::Data(format!("row {} {} missing deaths lag {l}", obs.state, obs.year))
            })? as f64,
            ColumnDef::ClusterDummy { lag, level } => {
                let observed = *obs.cluster_lag.get(lag).ok_or_else(|| {
                    Error::Data(format!("row {} {} missing cluster lag {lag}", obs.state, obs.year))
                })?;
                let known = self.cluster_levels.get(lag).map_or(false, |levels| {
                    levels.contains(&observed) || observed == self.spec.reference_cluster
                });
                if !known {
                    return Err(Error::Data(format!(
                        "cluster level {observed} at lag {lag} not seen at fit time"
                    )));
                }
                (observed == *level) as u8 as f64
            }
        };
        Ok(value)
    }

    /// Encode one observation into the kept design columns.
    pub fn encode(&self, obs: &PanelObservation) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.n_kept());
        for (def, &kept) in self.full_columns.iter().zip(&self.kept) {
            if kept {
                row.push(self.encode_column(def, obs)?);
            } else {
                // Aliased columns still validate factor levels.
                self.encode_column(def, obs)?;
            }
        }
        Ok(row)
    }

    pub fn offset(&self, obs: &PanelObservation) -> f64 {
        (obs.population as f64).ln()
    }

    /// True when the observation resolves every configured lag.
    pub fn row_complete(&self, obs: &PanelObservation) -> bool {
        self.spec.deaths_lags.iter().all(|l| obs.deaths_lag.contains_key(l))
            && self.spec.cluster_lags.iter().all(|l| obs.cluster_lag.contains_key(l))
    }
}

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub info: DesignInfo,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub offset: DVector<f64>,
    pub keys: Vec<(StateCode, i32, Gender)>,
    /// Incomplete panel rows excluded before fitting.
    pub n_dropped_rows: usize,
}

fn distinct_sorted<T: Ord + Copy>(values: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}

const ALIAS_TOL: f64 = 1e-8;

/// Detect aliased columns with a sequential orthogonalization sweep:
/// a column whose residual against the span of earlier kept columns is
/// negligible is dropped.
fn aliased_columns(x: &DMatrix<f64>) -> Vec<bool> {
    let n = x.nrows();
    let p = x.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = vec![true; p];
    for j in 0..p {
        let col = DVector::from_column_slice(x.column(j).as_slice());
        let norm0 = col.norm();
        if norm0 == 0.0 {
            kept[j] = false;
            continue;
        }
        let mut r = col;
        for q in &basis {
            let proj = q.dot(&r);
            r.axpy(-proj, q, 1.0);
        }
        // second pass for numerical safety
        for q in &basis {
            let proj = q.dot(&r);
            r.axpy(-proj, q, 1.0);
        }
        let norm = r.norm();
        if norm <= ALIAS_TOL * norm0 * (n as f64).sqrt() {
            kept[j] = false;
        } else {
            basis.push(r / norm);
        }
    }
    kept
}

/// Build the design from the panel and model settings: intercept, drop-first
/// dummies for state, year, and each cluster-lag factor, continuous
/// covariates, offset = log population. Incomplete rows are excluded and
/// counted; aliased columns are removed with a report.
pub fn build_design_matrix(panel: &[PanelObservation], spec: &ModelSpec) -> Result<DesignMatrix> {
    let used: Vec<&PanelObservation> = panel
        .iter()
        .filter(|obs| {
            spec.deaths_lags.iter().all(|l| obs.deaths_lag.contains_key(l))
                && spec.cluster_lags.iter().all(|l| obs.cluster_lag.contains_key(l))
        })
        .collect();
    let n_dropped_rows = panel.len() - used.len();
    if used.len() < 2 {
        return Err(Error::Data(format!(
            "design needs at least two complete rows, found {}",
            used.len()
        )));
    }

    let state_levels = distinct_sorted(used.iter().map(|o| o.state));
    let year_levels = distinct_sorted(used.iter().map(|o| o.year));
    let gender_levels = distinct_sorted(used.iter().map(|o| o.gender));
    if state_levels.len() < 2 {
        return Err(Error::Data("state factor has a single observed level".into()));
    }
    if spec.year_as_factor && year_levels.len() < 2 {
        return Err(Error::Data("year factor has a single observed level".into()));
    }
    if gender_levels.len() < 2 {
        return Err(Error::Data("gender factor has a single observed level".into()));
    }

    let reference_state = match spec.reference_state {
        Some(s) => {
            if !state_levels.contains(&s) {
                return Err(Error::Data(format!("reference state {s} not observed")));
            }
            s
        }
        None => state_levels[0],
    };
    let reference_year = match spec.reference_year {
        Some(y) => {
            if !year_levels.contains(&y) {
                return Err(Error::Data(format!("reference year {y} not observed")));
            }
            y
        }
        None => year_levels[0],
    };

    let mut cluster_levels = BTreeMap::new();
    for &lag in &spec.cluster_lags {
        let levels = distinct_sorted(used.iter().map(|o| o.cluster_lag[&lag]));
        if levels.len() < 2 {
            return Err(Error::Data(format!(
                "cluster factor at lag {lag} has a single observed level"
            )));
        }
        if !levels.contains(&spec.reference_cluster) {
            return Err(Error::Data(format!(
                "reference cluster {} not observed at lag {lag}",
                spec.reference_cluster
            )));
        }
        cluster_levels.insert(lag, levels);
    }

    let mut full_columns = vec![ColumnDef::Intercept];
    for &s in &state_levels {
        if s != reference_state {
            full_columns.push(ColumnDef::StateDummy(s));
        }
    }
    if spec.year_as_factor {
        for &y in &year_levels {
            if y != reference_year {
                full_columns.push(ColumnDef::YearDummy(y));
            }
        }
    } else {
        full_columns.push(ColumnDef::YearLinear);
    }
    full_columns.push(ColumnDef::GenderMale);
    full_columns.push(ColumnDef::PrescribingRate);
    full_columns.push(ColumnDef::Gini);
    full_columns.push(ColumnDef::Income);
    for &lag in &spec.deaths_lags {
        full_columns.push(ColumnDef::DeathsLag(lag));
    }
    for &lag in &spec.cluster_lags {
        for &level in &cluster_levels[&lag] {
            if level != spec.reference_cluster {
                full_columns.push(ColumnDef::ClusterDummy { lag, level });
            }
        }
    }

    let mut info = DesignInfo {
        spec: spec.clone(),
        kept: vec![true; full_columns.len()],
        full_columns,
        reference_state,
        reference_year,
        state_levels,
        year_levels,
        cluster_levels,
    };

    let n = used.len();
    let p = info.full_columns.len();
    let mut full = DMatrix::zeros(n, p);
    for (i, obs) in used.iter().enumerate() {
        for (j, def) in info.full_columns.iter().enumerate() {
            full[(i, j)] = info.encode_column(def, obs)?;
        }
    }

    info.kept = aliased_columns(&full);
    if !info.aliased_names().is_empty() {
        log::warn!("aliased columns removed: {:?}", info.aliased_names());
    }

    let kept_indices: Vec<usize> = (0..p).filter(|&j| info.kept[j]).collect();
    let mut x = DMatrix::zeros(n, kept_indices.len());
    for (jj, &j) in kept_indices.iter().enumerate() {
        x.set_column(jj, &full.column(j));
    }
    let y = DVector::from_iterator(n, used.iter().map(|o| o.deaths as f64));
    let offset = DVector::from_iterator(n, used.iter().map(|o| info.offset(o)));
    let keys = used.iter().map(|o| (o.state, o.year, o.gender)).collect();

    Ok(DesignMatrix {
        info,
        x,
        y,
        offset,
        keys,
        n_dropped_rows,
    })
}
