//! Synthetic dataset generation with known ground truth, used as the
//! end-to-end recovery oracle for the pipeline.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::outcomes::{CovariateRecord, OutcomeRecord};
use crate::ingest::policy::PolicyRecord;
use crate::states::{Gender, StateCode};

/// Per-state adoption plan: the bundle held at the start of the simulated
/// history, and an optional mid-stream switch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatePlan {
    pub initial_bundle: usize,
    /// (calendar year, target bundle); the switch takes effect January 1.
    pub switch: Option<(i32, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_states: usize,
    pub start_year: i32,
    pub end_year: i32,
    /// Extra simulated years before `start_year` so lags resolve.
    pub history_years: u32,
    /// Policy-id signature of each bundle.
    pub bundles: Vec<Vec<String>>,
    /// One plan per state, in state-code order.
    pub plans: Vec<StatePlan>,
    /// Per bundle: lag -> log rate ratio relative to bundle 0.
    pub bundle_effects: Vec<BTreeMap<u32, f64>>,
    /// Log deaths-per-capita baseline.
    pub baseline_log_rate: f64,
    pub gender_male_effect: f64,
    pub deaths_lag_coef: f64,
    pub prescribing_coef: f64,
    pub gini_coef: f64,
    pub income_coef: f64,
    pub population_range: (u64, u64),
    /// Policies in force everywhere for the whole history; exercised by
    /// the zero-variance filter downstream.
    pub n_constant_policies: usize,
}

/// Ground truth emitted next to the generated files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthTruth {
    /// (state, year, bundle label) triples; labels are 1-based.
    pub labels: Vec<(StateCode, i32, u32)>,
    pub bundle_effects: Vec<BTreeMap<u32, f64>>,
    pub gender_male_effect: f64,
    pub deaths_lag_coef: f64,
    pub prescribing_coef: f64,
    pub gini_coef: f64,
    pub income_coef: f64,
    pub baseline_log_rate: f64,
}

impl SynthTruth {
    pub fn label_map(&self) -> BTreeMap<(StateCode, i32), u32> {
        self.labels.iter().map(|&(s, y, l)| ((s, y), l)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub policies: Vec<PolicyRecord>,
    pub outcomes: Vec<OutcomeRecord>,
    pub covariates: Vec<CovariateRecord>,
    pub truth: SynthTruth,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_states == 0 {
            return Err(Error::Config("synthetic config needs at least one state".into()));
        }
        if self.n_states > crate::states::STATE_CODES.len() {
            return Err(Error::Config(format!(
                "at most {} states available",
                crate::states::STATE_CODES.len()
            )));
        }
        if self.start_year > self.end_year {
            return Err(Error::Config("empty year range".into()));
        }
        if self.bundles.is_empty() {
            return Err(Error::Config("at least one bundle required".into()));
        }
        if self.plans.len() != self.n_states {
            return Err(Error::Config(format!(
                "expected {} state plans, found {}",
                self.n_states,
                self.plans.len()
            )));
        }
        if self.bundle_effects.len() != self.bundles.len() {
            return Err(Error::Config("one effect map per bundle required".into()));
        }
        for plan in &self.plans {
            let targets = std::iter::once(plan.initial_bundle)
                .chain(plan.switch.map(|(_, b)| b));
            for b in targets {
                if b >= self.bundles.len() {
                    return Err(Error::Config(format!("bundle index {b} out of range")));
                }
            }
        }
        if self.population_range.0 == 0 || self.population_range.0 > self.population_range.1 {
            return Err(Error::Config("invalid population range".into()));
        }
        Ok(())
    }

    fn first_year(&self) -> i32 {
        self.start_year - self.history_years as i32
    }

    fn bundle_at(&self, state_idx: usize, year: i32) -> usize {
        let plan = &self.plans[state_idx];
        match plan.switch {
            Some((switch_year, target)) if year >= switch_year => target,
            _ => plan.initial_bundle,
        }
    }
}

/// Build a three-bundle configuration with well-separated signatures and
/// staggered switchers; suitable defaults for the `synth` command.
pub fn default_config(n_states: usize, start_year: i32, end_year: i32) -> SynthConfig {
    let ids = |range: std::ops::Range<usize>| -> Vec<String> {
        range.map(|i| format!("law.{i:03}")).collect()
    };
    // Signatures overlap so inter-bundle distances are unequal and the
    // elbow lands on three groups.
    let bundles = vec![ids(0..10), ids(5..15), ids(20..32)];
    let mut plans = Vec::with_capacity(n_states);
    let mid = (start_year + end_year) / 2;
    for i in 0..n_states {
        let plan = match i % 10 {
            0..=3 => StatePlan { initial_bundle: 0, switch: None },
            4 | 5 => StatePlan {
                initial_bundle: 0,
                switch: Some((mid + (i % 3) as i32 - 1, 1)),
            },
            6 | 7 => StatePlan { initial_bundle: 1, switch: None },
            8 => StatePlan {
                initial_bundle: 0,
                switch: Some((mid + (i % 2) as i32, 2)),
            },
            _ => StatePlan { initial_bundle: 2, switch: None },
        };
        plans.push(plan);
    }
    let mut effects: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); 3];
    effects[1].insert(1, (0.85f64).ln());
    effects[2].insert(1, (0.70f64).ln());
    SynthConfig {
        n_states,
        start_year,
        end_year,
        history_years: 2,
        bundles,
        plans,
        bundle_effects: effects,
        baseline_log_rate: (1.2e-4f64).ln(),
        gender_male_effect: 0.67,
        deaths_lag_coef: 5.0e-5,
        prescribing_coef: 0.002,
        gini_coef: -2.0,
        income_coef: -0.003,
        population_range: (500_000, 4_000_000),
        n_constant_policies: 2,
    }
}

/// Generate a complete synthetic dataset. Deaths are drawn from a Poisson
/// law whose log-mean has the fitted model's structure with the configured
/// truth; the same seed always reproduces the same dataset.
pub fn generate_synthetic_panel(config: &SynthConfig, seed: u64) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<StateCode> = StateCode::all().take(config.n_states).collect();
    let first_year = config.first_year();
    let years: Vec<i32> = (first_year..=config.end_year).collect();

    // Policy records: one run of records per constant-bundle stretch.
    let mut policies = Vec::new();
    for (idx, &state) in states.iter().enumerate() {
        let mut run_start = first_year;
        let mut run_bundle = config.bundle_at(idx, first_year);
        let flush = |policies: &mut Vec<PolicyRecord>, bundle: usize, from: i32, to: Option<i32>| {
            for policy_id in &config.bundles[bundle] {
                policies.push(PolicyRecord {
                    state,
                    policy_id: policy_id.clone(),
                    effective_date: NaiveDate::from_ymd_opt(from, 1, 1).unwrap(),
                    valid_through: to.map(|y| NaiveDate::from_ymd_opt(y, 12, 31).unwrap()),
                });
            }
        };
        for &year in &years[1..] {
            let b = config.bundle_at(idx, year);
            if b != run_bundle {
                flush(&mut policies, run_bundle, run_start, Some(year - 1));
                run_start = year;
                run_bundle = b;
            }
        }
        flush(&mut policies, run_bundle, run_start, None);
        for i in 0..config.n_constant_policies {
            policies.push(PolicyRecord {
                state,
                policy_id: format!("always.{i:02}"),
                effective_date: NaiveDate::from_ymd_opt(first_year, 1, 1).unwrap(),
                valid_through: None,
            });
        }
    }

    // Covariates and per-state populations, drawn in fixed order.
    let populations: Vec<u64> = states
        .iter()
        .map(|_| rng.gen_range(config.population_range.0..=config.population_range.1))
        .collect();
    let mut covariates = Vec::new();
    for (idx, &state) in states.iter().enumerate() {
        let _ = idx;
        for &year in &years {
            covariates.push(CovariateRecord {
                state,
                year,
                prescribing_rate: 60.0 + 40.0 * rng.gen::<f64>(),
                gini: 0.40 + 0.10 * rng.gen::<f64>(),
                income: 45.0 + 15.0 * rng.gen::<f64>(),
            });
        }
    }
    let cov_by_key: BTreeMap<(StateCode, i32), &CovariateRecord> =
        covariates.iter().map(|c| ((c.state, c.year), c)).collect();

    // Outcomes: sequential simulation feeding the lagged dependent variable.
    let lag_set: Vec<u32> = {
        let mut lags: Vec<u32> = config
            .bundle_effects
            .iter()
            .flat_map(|m| m.keys().copied())
            .collect();
        lags.sort_unstable();
        lags.dedup();
        lags
    };
    let mut outcomes = Vec::new();
    for (idx, &state) in states.iter().enumerate() {
        for gender in Gender::both() {
            let mut prev_deaths = 0u64;
            for (step, &year) in years.iter().enumerate() {
                let cov = cov_by_key[&(state, year)];
                let mut eta = (populations[idx] as f64).ln()
                    + config.baseline_log_rate
                    + config.prescribing_coef * cov.prescribing_rate
                    + config.gini_coef * cov.gini
                    + config.income_coef * cov.income;
                if gender == Gender::Male {
                    eta += config.gender_male_effect;
                }
                if step > 0 {
                    eta += config.deaths_lag_coef * prev_deaths as f64;
                }
                for &lag in &lag_set {
                    let bundle = config.bundle_at(idx, year - lag as i32);
                    if let Some(effect) = config.bundle_effects[bundle].get(&lag) {
                        eta += effect;
                    }
                }
                let mu = eta.exp();
                let deaths = Poisson::new(mu)
                    .map_err(|e| Error::Numerical(format!("invalid Poisson mean {mu}: {e}")))?
                    .sample(&mut rng) as u64;
                outcomes.push(OutcomeRecord {
                    state,
                    year,
                    gender,
                    deaths,
                    population: populations[idx],
                });
                prev_deaths = deaths;
            }
        }
    }

    let mut labels = Vec::new();
    for (idx, &state) in states.iter().enumerate() {
        for &year in &years {
            labels.push((state, year, config.bundle_at(idx, year) as u32 + 1));
        }
    }

    Ok(SynthData {
        policies,
        outcomes,
        covariates,
        truth: SynthTruth {
            labels,
            bundle_effects: config.bundle_effects.clone(),
            gender_male_effect: config.gender_male_effect,
            deaths_lag_coef: config.deaths_lag_coef,
            prescribing_coef: config.prescribing_coef,
            gini_coef: config.gini_coef,
            income_coef: config.income_coef,
            baseline_log_rate: config.baseline_log_rate,
        },
    })
}
