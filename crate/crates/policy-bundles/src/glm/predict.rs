//! Prediction from a fitted model onto panel observations.

use crate::error::{Error, Result};
use crate::glm::fit::FitResult;
use crate::ingest::panel::PanelObservation;

/// Expected death count for one observation: exp(x'beta + log population).
/// The observation must carry every lag the fitted design references.
pub fn predict_mean(fit: &FitResult, obs: &PanelObservation) -> Result<f64> {
    let mut eta = fit.info.offset(obs);
    for (def, coef) in fit.info.kept_columns().zip(fit.coefficients.iter()) {
        eta += coef * fit.info.encode_column(def, obs)?;
    }
    if !eta.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite linear predictor for {} {} {}",
            obs.state.as_str(),
            obs.year,
            obs.gender.as_str()
        )));
    }
    Ok(eta.exp())
}

/// Predicted means for a slice of observations, in order.
pub fn predict_means(fit: &FitResult, panel: &[PanelObservation]) -> Result<Vec<f64>> {
    panel.iter().map(|obs| predict_mean(fit, obs)).collect()
}

/// Pearson residual (y - mu) / sqrt(mu) of one observation.
pub fn pearson_residual(fit: &FitResult, obs: &PanelObservation) -> Result<f64> {
    let mu = predict_mean(fit, obs)?;
    if mu <= 0.0 {
        return Err(Error::Numerical("nonpositive predicted mean".into()));
    }
    Ok((obs.deaths as f64 - mu) / mu.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glm::design::build_design_matrix;
    use crate::glm::fit::fit_poisson_irls;
    use crate::glm::spec::ModelSpec;

    #[test]
    fn in_sample_predictions_match_fitted_means() {
        let panel = crate::glm::design::tests::synthetic_panel(5, 2008..=2015, 3);
        let design = build_design_matrix(&panel, &ModelSpec::default()).unwrap();
        let fit = fit_poisson_irls(&design).unwrap();
        // Fitted means satisfy the score equation: totals match exactly for
        // the intercept column.
        let used: Vec<_> = panel
            .iter()
            .filter(|o| design.keys.contains(&(o.state, o.year, o.gender)))
            .collect();
        let total_pred: f64 = used
            .iter()
            .map(|o| predict_mean(&fit, o).unwrap())
            .sum();
        let total_obs: f64 = used.iter().map(|o| o.deaths as f64).sum();
        assert!((total_pred - total_obs).abs() < 1e-6 * total_obs.max(1.0));
    }

    #[test]
    fn population_scales_prediction_linearly() {
        let panel = crate::glm::design::tests::synthetic_panel(5, 2008..=2015, 3);
        let design = build_design_matrix(&panel, &ModelSpec::default()).unwrap();
        let fit = fit_poisson_irls(&design).unwrap();
        let mut obs = panel[0].clone();
        let base = predict_mean(&fit, &obs).unwrap();
        obs.population *= 3;
        let scaled = predict_mean(&fit, &obs).unwrap();
        assert!((scaled / base - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unseen_factor_level_is_rejected() {
        let panel = crate::glm::design::tests::synthetic_panel(5, 2008..=2015, 3);
        let design = build_design_matrix(&panel, &ModelSpec::default()).unwrap();
        let fit = fit_poisson_irls(&design).unwrap();
        let mut obs = panel[0].clone();
        obs.cluster_lag.insert(1, 99);
        assert!(predict_mean(&fit, &obs).is_err());
    }

    #[test]
    fn zero_residual_when_observation_equals_mean() {
        let panel = crate::glm::design::tests::synthetic_panel(5, 2008..=2015, 3);
        let design = build_design_matrix(&panel, &ModelSpec::default()).unwrap();
        let fit = fit_poisson_irls(&design).unwrap();
        let mut obs = panel[0].clone();
        let mu = predict_mean(&fit, &obs).unwrap();
        obs.deaths = mu.round() as u64;
        let resid = pearson_residual(&fit, &obs).unwrap();
        assert!(resid.abs() <= 0.5 / mu.sqrt() + 1e-12);
    }
}
