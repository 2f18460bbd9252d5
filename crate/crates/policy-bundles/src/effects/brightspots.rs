//! Bright-spot ranking: which states run below their model predictions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::glm::fit::FitResult;
use crate::glm::predict::pearson_residual;
use crate::ingest::panel::PanelObservation;
use crate::states::StateCode;

pub const DEFAULT_FLAG_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpotFlag {
    /// Among the m most negative mean residuals: outperforming.
    Bright,
    /// Among the m most positive: underperforming.
    Trouble,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrightSpotScore {
    pub state: StateCode,
    pub mean_residual: f64,
    pub n_rows: usize,
    /// 1-based rank, ascending by mean residual.
    pub rank: usize,
    pub flag: SpotFlag,
}

/// Mean Pearson residual per state, ranked ascending (most outperforming
/// first). Ties rank by state code, so the ordering is deterministic.
pub fn bright_spots(
    fit: &FitResult,
    panel: &[PanelObservation],
    flag_count: usize,
) -> Result<Vec<BrightSpotScore>> {
    let mut sums: std::collections::BTreeMap<StateCode, (f64, usize)> =
        std::collections::BTreeMap::new();
    for obs in panel.iter().filter(|o| fit.info.row_complete(o)) {
        let r = pearson_residual(fit, obs)?;
        let entry = sums.entry(obs.state).or_insert((0.0, 0));
        entry.0 += r;
        entry.1 += 1;
    }
    let mut scores: Vec<BrightSpotScore> = sums
        .into_iter()
        .map(|(state, (sum, n))| BrightSpotScore {
            state,
            mean_residual: sum / n as f64,
            n_rows: n,
            rank: 0,
            flag: SpotFlag::None,
        })
        .collect();
    scores.sort_by(|a, b| {
        a.mean_residual
            .partial_cmp(&b.mean_residual)
            .unwrap()
            .then(a.state.cmp(&b.state))
    });
    let total = scores.len();
    for (i, score) in scores.iter_mut().enumerate() {
        score.rank = i + 1;
        // Bright wins when the two windows overlap on a short list.
        score.flag = if i < flag_count {
            SpotFlag::Bright
        } else if i >= total.saturating_sub(flag_count) {
            SpotFlag::Trouble
        } else {
            SpotFlag::None
        };
    }
    Ok(scores)
}
