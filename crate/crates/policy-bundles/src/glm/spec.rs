//! Declarative model settings for the panel regression.

use serde::{Deserialize, Serialize};

use crate::states::StateCode;

/// Which terms enter the design. The response is the death count, with
/// log(population) as a fixed-coefficient offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Lags at which the cluster label enters as a categorical term.
    /// Empty for the covariates-only model.
    pub cluster_lags: Vec<u32>,
    /// Lags of the dependent variable entering as continuous covariates.
    pub deaths_lags: Vec<u32>,
    /// Year as dummies (default) or as a single linear trend.
    pub year_as_factor: bool,
    pub reference_cluster: u32,
    /// Default: first state in sort order.
    pub reference_state: Option<StateCode>,
    /// Default: first observed year.
    pub reference_year: Option<i32>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            cluster_lags: vec![1],
            deaths_lags: vec![1],
            year_as_factor: true,
            reference_cluster: 1,
            reference_state: None,
            reference_year: None,
        }
    }
}

impl ModelSpec {
    pub fn base() -> Self {
        ModelSpec {
            cluster_lags: Vec::new(),
            ..Default::default()
        }
    }

    pub fn with_cluster_lags(lags: Vec<u32>) -> Self {
        ModelSpec {
            cluster_lags: lags,
            ..Default::default()
        }
    }
}

/// One column of the (pre-drop) design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnDef {
    Intercept,
    StateDummy(StateCode),
    YearDummy(i32),
    YearLinear,
    GenderMale,
    PrescribingRate,
    Gini,
    Income,
    DeathsLag(u32),
    ClusterDummy { lag: u32, level: u32 },
}

impl ColumnDef {
    pub fn name(&self) -> String {
        match self {
            ColumnDef::Intercept => "(Intercept)".to_string(),
            ColumnDef::StateDummy(s) => format!("State{s}"),
            ColumnDef::YearDummy(y) => format!("Year{y}"),
            ColumnDef::YearLinear => "Year".to_string(),
            ColumnDef::GenderMale => "GenderMale".to_string(),
            ColumnDef::PrescribingRate => "Prescribing.Rate".to_string(),
            ColumnDef::Gini => "Gini".to_string(),
            ColumnDef::Income => "Income".to_string(),
            ColumnDef::DeathsLag(l) => format!("Deaths.lag{l}"),
            ColumnDef::ClusterDummy { lag, level } => format!("factor(cluster.lag{lag}){level}"),
        }
    }
}
