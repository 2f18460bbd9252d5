//! Relative cluster effects at a fixed reference configuration.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::fit::FitResult;
use crate::glm::spec::ColumnDef;
use crate::ingest::panel::PanelObservation;
use crate::states::StateCode;

/// Where to pin the non-cluster inputs when comparing cluster levels.
/// Unset fields fall back to the median-effect state, the midpoint year,
/// and panel means for continuous inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub state: Option<StateCode>,
    pub year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub cluster: u32,
    /// Expected deaths at the reference configuration.
    pub predicted_deaths: f64,
    /// Standard error of the linear predictor at that configuration.
    pub linear_se: f64,
    /// exp of the summed cluster coefficients; exactly 1 for the reference.
    pub rate_ratio: f64,
    /// exp(linear predictor +/- 2 SE), on the death-count scale.
    pub band_low: f64,
    pub band_high: f64,
}

struct PanelMeans {
    prescribing_rate: f64,
    gini: f64,
    income: f64,
    population: f64,
    deaths_lag: std::collections::BTreeMap<u32, f64>,
}

fn panel_means(fit: &FitResult, panel: &[PanelObservation]) -> Result<PanelMeans> {
    let rows: Vec<&PanelObservation> = panel
        .iter()
        .filter(|o| fit.info.row_complete(o))
        .collect();
    if rows.is_empty() {
        return Err(Error::Data("no complete panel rows for reference means".into()));
    }
    let n = rows.len() as f64;
    let mut deaths_lag = std::collections::BTreeMap::new();
    for &lag in &fit.info.spec.deaths_lags {
        let sum: f64 = rows.iter().map(|o| o.deaths_lag[&lag] as f64).sum();
        deaths_lag.insert(lag, sum / n);
    }
    Ok(PanelMeans {
        prescribing_rate: rows.iter().map(|o| o.prescribing_rate).sum::<f64>() / n,
        gini: rows.iter().map(|o| o.gini).sum::<f64>() / n,
        income: rows.iter().map(|o| o.income).sum::<f64>() / n,
        population: rows.iter().map(|o| o.population as f64).sum::<f64>() / n,
        deaths_lag,
    })
}

/// The state whose fixed-effect estimate is the median across all states,
/// counting the reference state as zero.
fn median_effect_state(fit: &FitResult) -> StateCode {
    let mut effects: Vec<(f64, StateCode)> = fit
        .info
        .state_levels
        .iter()
        .map(|&s| {
            let coef = if s == fit.info.reference_state {
                0.0
            } else {
                fit.coefficient(&ColumnDef::StateDummy(s).name()).unwrap_or(0.0)
            };
            (coef, s)
        })
        .collect();
    effects.sort_by(|a, b| a.partial_cmp(b).unwrap());
    effects[(effects.len() - 1) / 2].1
}

fn reference_row(
    fit: &FitResult,
    means: &PanelMeans,
    state: StateCode,
    year: i32,
    cluster: u32,
) -> DVector<f64> {
    let values: Vec<f64> = fit
        .info
        .kept_columns()
        .map(|def| match def {
            ColumnDef::Intercept => 1.0,
            ColumnDef::StateDummy(s) => (*s == state) as u8 as f64,
            ColumnDef::YearDummy(y) => (*y == year) as u8 as f64,
            ColumnDef::YearLinear => (year - fit.info.reference_year) as f64,
            // Averaged over both levels.
            ColumnDef::GenderMale => 0.5,
            ColumnDef::PrescribingRate => means.prescribing_rate,
            ColumnDef::Gini => means.gini,
            ColumnDef::Income => means.income,
            ColumnDef::DeathsLag(l) => means.deaths_lag[l],
            ColumnDef::ClusterDummy { level, .. } => (*level == cluster) as u8 as f64,
        })
        .collect();
    DVector::from_vec(values)
}

/// Sum of the cluster's coefficients over every modeled lag; zero for the
/// reference level.
pub fn cluster_log_ratio(fit: &FitResult, cluster: u32) -> f64 {
    fit.info
        .spec
        .cluster_lags
        .iter()
        .filter_map(|&lag| {
            fit.coefficient(&ColumnDef::ClusterDummy { lag, level: cluster }.name())
        })
        .sum()
}

/// Predicted deaths and rate ratios per cluster level, everything else
/// held at the reference configuration.
pub fn relative_effects(
    fit: &FitResult,
    panel: &[PanelObservation],
    config: &ReferenceConfig,
) -> Result<Vec<EffectEstimate>> {
    if fit.info.spec.cluster_lags.is_empty() {
        return Err(Error::Config("fit has no cluster terms to compare".into()));
    }
    if let Some(s) = config.state {
        if !fit.info.state_levels.contains(&s) {
            return Err(Error::Data(format!("reference state {s} not in fit")));
        }
    }
    if let Some(y) = config.year {
        if !fit.info.year_levels.contains(&y) {
            return Err(Error::Data(format!("reference year {y} not in fit")));
        }
    }
    let state = config.state.unwrap_or_else(|| median_effect_state(fit));
    let year = config
        .year
        .unwrap_or_else(|| fit.info.year_levels[(fit.info.year_levels.len() - 1) / 2]);
    let means = panel_means(fit, panel)?;
    let sigma = fit.covariance_matrix();
    let beta = DVector::from_column_slice(&fit.coefficients);

    let first_lag = fit.info.spec.cluster_lags[0];
    let mut levels = fit.info.cluster_levels[&first_lag].clone();
    if !levels.contains(&fit.info.spec.reference_cluster) {
        levels.push(fit.info.spec.reference_cluster);
        levels.sort_unstable();
    }

    let mut estimates = Vec::with_capacity(levels.len());
    for cluster in levels {
        let x = reference_row(fit, &means, state, year, cluster);
        let eta = x.dot(&beta) + means.population.ln();
        let var = (&sigma * &x).dot(&x);
        if var < 0.0 {
            return Err(Error::Numerical("negative linear-predictor variance".into()));
        }
        let se = var.sqrt();
        estimates.push(EffectEstimate {
            cluster,
            predicted_deaths: eta.exp(),
            linear_se: se,
            rate_ratio: cluster_log_ratio(fit, cluster).exp(),
            band_low: (eta - 2.0 * se).exp(),
            band_high: (eta + 2.0 * se).exp(),
        });
    }
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::design::build_design_matrix;
    use crate::glm::fit::fit_poisson_irls;
    use crate::glm::spec::ModelSpec;

    fn fitted() -> (FitResult, Vec<PanelObservation>) {
        let panel = crate::glm::design::tests::synthetic_panel(6, 2008..=2015, 3);
        let design = build_design_matrix(&panel, &ModelSpec::default()).unwrap();
        (fit_poisson_irls(&design).unwrap(), panel)
    }

    #[test]
    fn reference_cluster_ratio_is_one() {
        let (fit, panel) = fitted();
        let effects = relative_effects(&fit, &panel, &ReferenceConfig::default()).unwrap();
        let reference = effects
            .iter()
            .find(|e| e.cluster == fit.info.spec.reference_cluster)
            .unwrap();
        assert_eq!(reference.rate_ratio, 1.0);
    }

    #[test]
    fn ratios_do_not_depend_on_reference_configuration() {
        let (fit, panel) = fitted();
        let a = relative_effects(&fit, &panel, &ReferenceConfig::default()).unwrap();
        let b = relative_effects(
            &fit,
            &panel,
            &ReferenceConfig {
                state: Some(fit.info.state_levels[2]),
                year: Some(fit.info.year_levels[0]),
            },
        )
        .unwrap();
        for (ea, eb) in a.iter().zip(&b) {
            assert_eq!(ea.cluster, eb.cluster);
            assert!((ea.rate_ratio - eb.rate_ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_is_exp_of_coefficient() {
        let (fit, panel) = fitted();
        let effects = relative_effects(&fit, &panel, &ReferenceConfig::default()).unwrap();
        for e in &effects {
            if e.cluster == fit.info.spec.reference_cluster {
                continue;
            }
            let name = ColumnDef::ClusterDummy { lag: 1, level: e.cluster }.name();
            let beta = fit.coefficient(&name).unwrap();
            assert!((e.rate_ratio - beta.exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn bands_bracket_the_point_estimate() {
        let (fit, panel) = fitted();
        let effects = relative_effects(&fit, &panel, &ReferenceConfig::default()).unwrap();
        for e in &effects {
            assert!(e.band_low <= e.predicted_deaths);
            assert!(e.predicted_deaths <= e.band_high);
            assert!(e.linear_se >= 0.0);
        }
    }

    #[test]
    fn unknown_reference_state_is_rejected() {
        let (fit, panel) = fitted();
        let unused = StateCode::all().nth(40).unwrap();
        let config = ReferenceConfig { state: Some(unused), year: None };
        assert!(relative_effects(&fit, &panel, &config).is_err());
    }
}
