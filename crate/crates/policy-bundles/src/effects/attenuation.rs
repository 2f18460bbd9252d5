//! How a cluster's estimated effect decays across modeled lags.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::fit::FitResult;
use crate::glm::spec::ColumnDef;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationPoint {
    pub lag: u32,
    pub coefficient: f64,
    pub se: f64,
    /// coefficient +/- 2 SE.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationProfile {
    pub cluster: u32,
    pub is_reference: bool,
    pub points: Vec<AttenuationPoint>,
}

/// The per-lag coefficient path of one cluster level with 2 SE bands.
/// The reference level yields an identically zero profile by construction.
pub fn attenuation_profile(fit: &FitResult, cluster: u32) -> Result<AttenuationProfile> {
    let lags = &fit.info.spec.cluster_lags;
    if lags.is_empty() {
        return Err(Error::Config("fit has no cluster-lag terms".into()));
    }
    if cluster == fit.info.spec.reference_cluster {
        return Ok(AttenuationProfile {
            cluster,
            is_reference: true,
            points: lags
                .iter()
                .map(|&lag| AttenuationPoint { lag, coefficient: 0.0, se: 0.0, lower: 0.0, upper: 0.0 })
                .collect(),
        });
    }
    let known = lags
        .iter()
        .all(|lag| fit.info.cluster_levels[lag].contains(&cluster));
    if !known {
        return Err(Error::Data(format!(
            "cluster {cluster} not observed at every modeled lag"
        )));
    }
    let mut points = Vec::with_capacity(lags.len());
    for &lag in lags {
        let name = ColumnDef::ClusterDummy { lag, level: cluster }.name();
        let idx = fit
            .columns
            .iter()
            .position(|c| c == &name)
            .ok_or_else(|| Error::Data(format!("term {name} removed as aliased")))?;
        let coefficient = fit.coefficients[idx];
        let var = fit.covariance[idx][idx];
        if var < 0.0 {
            return Err(Error::Numerical(format!("negative variance for {name}")));
        }
        let se = var.sqrt();
        points.push(AttenuationPoint {
            lag,
            coefficient,
            se,
            lower: coefficient - 2.0 * se,
            upper: coefficient + 2.0 * se,
        });
    }
    Ok(AttenuationProfile { cluster, is_reference: false, points })
}
