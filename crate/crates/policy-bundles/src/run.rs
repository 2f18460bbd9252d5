//! Pipeline orchestration: configuration, stages, and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::cut::{cut_tree, elbow_curve, ClusterAssignment, ElbowCurve};
use crate::cluster::gower::{gower_dissimilarity, BinaryMode, DissimilarityMatrix};
use crate::cluster::linkage::{agglomerate_complete_linkage, Dendrogram};
use crate::effects::attenuation::{attenuation_profile, AttenuationProfile};
use crate::effects::brightspots::bright_spots;
use crate::effects::counterfactual::counterfactual_trajectory;
use crate::effects::relative::{relative_effects, ReferenceConfig};
use crate::error::{Error, Result};
use crate::glm::design::build_design_matrix;
use crate::glm::fit::{fit_poisson_irls, FitResult};
use crate::glm::spec::ModelSpec;
use crate::ingest::outcomes::{
    parse_covariate_records, parse_outcome_records, CovariateRecord, OutcomeRecord,
    DEFAULT_SUPPRESSION_FILL,
};
use crate::ingest::panel::{assemble_panel, PanelLags, PanelObservation};
use crate::ingest::policy::{
    derive_in_force_years, filter_policy_variables, parse_policy_records, PolicyRecord,
};
use crate::ingest::synth::{default_config, generate_synthetic_panel};
use crate::io;
use crate::states::StateCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Synth,
    Ingest,
    Cluster,
    Fit,
    Effects,
    Simulate,
    Brightspots,
    Pipeline,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        match s {
            "synth" => Some(Command::Synth),
            "ingest" => Some(Command::Ingest),
            "cluster" => Some(Command::Cluster),
            "fit" => Some(Command::Fit),
            "effects" => Some(Command::Effects),
            "simulate" => Some(Command::Simulate),
            "brightspots" => Some(Command::Brightspots),
            "pipeline" => Some(Command::Pipeline),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Cluster => "cluster",
            Command::Fit => "fit",
            Command::Effects => "effects",
            Command::Simulate => "simulate",
            Command::Brightspots => "brightspots",
            Command::Pipeline => "pipeline",
        }
    }
}

fn default_start_year() -> i32 {
    2006
}
fn default_end_year() -> i32 {
    2016
}
fn default_k() -> usize {
    10
}
fn default_k_grid() -> (usize, usize) {
    (4, 20)
}
fn default_lags() -> Vec<u32> {
    vec![1]
}
fn default_fill() -> u64 {
    DEFAULT_SUPPRESSION_FILL
}
fn default_reference_cluster() -> u32 {
    1
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_synth_states() -> usize {
    20
}
fn default_flag_count() -> usize {
    5
}
fn default_parallel() -> bool {
    true
}

/// Everything a run needs, loadable from a JSON file; every field has a
/// default reproducing the primary analysis setup.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub policies: Option<PathBuf>,
    pub outcomes: Option<PathBuf>,
    pub covariates: Option<PathBuf>,
    /// CSV `policy_id,group`; defaults to the id prefix before the first dot.
    pub policy_groups: Option<PathBuf>,
    /// Plain text, one policy id per line; `#` starts a comment.
    pub exclusions: Option<PathBuf>,
    pub start_year: i32,
    pub end_year: i32,
    pub k: usize,
    /// Inclusive k range for the elbow curve.
    pub k_grid: (usize, usize),
    pub binary_mode: BinaryMode,
    pub cluster_lags: Vec<u32>,
    pub deaths_lags: Vec<u32>,
    pub suppression_fill: u64,
    pub reference_cluster: u32,
    pub reference_state: Option<String>,
    pub reference_year: Option<i32>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub synth_states: usize,
    /// Simulation target; defaults: first panel state, window midpoint,
    /// reference cluster.
    pub simulate_state: Option<String>,
    pub change_year: Option<i32>,
    pub target_cluster: Option<u32>,
    pub flag_count: usize,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            policies: None,
            outcomes: None,
            covariates: None,
            policy_groups: None,
            exclusions: None,
            start_year: default_start_year(),
            end_year: default_end_year(),
            k: default_k(),
            k_grid: default_k_grid(),
            binary_mode: BinaryMode::default(),
            cluster_lags: default_lags(),
            deaths_lags: default_lags(),
            suppression_fill: default_fill(),
            reference_cluster: default_reference_cluster(),
            reference_state: None,
            reference_year: None,
            out_dir: default_out_dir(),
            seed: 0,
            synth_states: default_synth_states(),
            simulate_state: None,
            change_year: None,
            target_cluster: None,
            flag_count: default_flag_count(),
            parallel: default_parallel(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let config: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.start_year > self.end_year {
            return Err(Error::Config(format!(
                "empty analysis window {}..={}",
                self.start_year, self.end_year
            )));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k_grid.0 < 1 || self.k_grid.0 > self.k_grid.1 {
            return Err(Error::Config(format!(
                "invalid k grid {:?}",
                self.k_grid
            )));
        }
        if self.cluster_lags.is_empty() || self.deaths_lags.is_empty() {
            return Err(Error::Config("lag sets must be nonempty".into()));
        }
        if self.cluster_lags.iter().chain(&self.deaths_lags).any(|&l| l == 0) {
            return Err(Error::Config("lags must be positive".into()));
        }
        Ok(())
    }

    fn window(&self) -> std::ops::RangeInclusive<i32> {
        self.start_year..=self.end_year
    }

    /// Clustering spans extra years before the window so every lag resolves.
    fn cluster_span(&self) -> std::ops::RangeInclusive<i32> {
        let max_lag = *self.cluster_lags.iter().max().unwrap() as i32;
        (self.start_year - max_lag)..=self.end_year
    }

    fn reference_state_code(&self) -> Result<Option<StateCode>> {
        self.reference_state
            .as_deref()
            .map(|s| {
                StateCode::parse(s)
                    .ok_or_else(|| Error::Config(format!("unknown reference state `{s}`")))
            })
            .transpose()
    }

    fn model_spec(&self) -> Result<ModelSpec> {
        Ok(ModelSpec {
            cluster_lags: self.cluster_lags.clone(),
            deaths_lags: self.deaths_lags.clone(),
            year_as_factor: true,
            reference_cluster: self.reference_cluster,
            reference_state: self.reference_state_code()?,
            reference_year: self.reference_year,
        })
    }

    fn fit_name(&self) -> String {
        let lags: Vec<String> = self.cluster_lags.iter().map(|l| l.to_string()).collect();
        format!("lag{}", lags.join("_"))
    }
}

/// Tracks every file read and written so the manifest can prove an exact
/// rerun.
struct Tracker {
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

impl Tracker {
    fn new() -> Tracker {
        Tracker {
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    fn wrote(&mut self, path: &Path) -> Result<()> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.insert(name, hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    /// Input path -> SHA-256 of its bytes.
    inputs: &'a BTreeMap<String, String>,
    /// Output file name -> SHA-256 of its bytes.
    outputs: &'a BTreeMap<String, String>,
}

fn require<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("config field `{field}` is required")))
}

struct Inputs {
    policies: Vec<PolicyRecord>,
    outcomes: Vec<OutcomeRecord>,
    suppressed_count: usize,
    covariates: Vec<CovariateRecord>,
}

fn load_policies(config: &RunConfig, tracker: &mut Tracker) -> Result<Vec<PolicyRecord>> {
    let bytes = tracker.read(require(&config.policies, "policies")?)?;
    parse_policy_records(bytes.as_slice())
}

fn load_inputs(config: &RunConfig, tracker: &mut Tracker) -> Result<Inputs> {
    let policies = load_policies(config, tracker)?;
    let outcome_bytes = tracker.read(require(&config.outcomes, "outcomes")?)?;
    let parsed = parse_outcome_records(outcome_bytes.as_slice(), config.suppression_fill)?;
    let covariate_bytes = tracker.read(require(&config.covariates, "covariates")?)?;
    let covariates = parse_covariate_records(covariate_bytes.as_slice())?;
    Ok(Inputs {
        policies,
        outcomes: parsed.records,
        suppressed_count: parsed.suppressed_count,
        covariates,
    })
}

fn load_exclusions(config: &RunConfig, tracker: &mut Tracker) -> Result<Vec<String>> {
    let Some(path) = config.exclusions.as_deref() else {
        return Ok(Vec::new());
    };
    let bytes = tracker.read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Data(format!("{}: not UTF-8: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn load_policy_groups(
    config: &RunConfig,
    tracker: &mut Tracker,
    policy_ids: &[String],
) -> Result<BTreeMap<String, String>> {
    match config.policy_groups.as_deref() {
        Some(path) => {
            let bytes = tracker.read(path)?;
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(bytes.as_slice());
            let mut map = BTreeMap::new();
            for (i, record) in reader.records().enumerate() {
                let record = record.map_err(|e| {
                    Error::Data(format!("{} line {}: {e}", path.display(), i + 2))
                })?;
                if record.len() != 2 {
                    return Err(Error::Data(format!(
                        "{} line {}: expected `policy_id,group`",
                        path.display(),
                        i + 2
                    )));
                }
                map.insert(record[0].to_string(), record[1].to_string());
            }
            Ok(map)
        }
        // Default grouping: the id prefix before the first dot.
        None => Ok(policy_ids
            .iter()
            .map(|id| {
                let group = id.split('.').next().unwrap_or(id).to_string();
                (id.clone(), group)
            })
            .collect()),
    }
}

pub struct ClusterStage {
    pub matrix: crate::ingest::policy::StateYearPolicyMatrix,
    pub dissimilarity: DissimilarityMatrix,
    pub dendrogram: Dendrogram,
    pub assignment: ClusterAssignment,
    pub elbow: ElbowCurve,
}

fn cluster_stage(
    config: &RunConfig,
    policies: &[PolicyRecord],
    exclusions: &[String],
) -> Result<ClusterStage> {
    let mut states: Vec<StateCode> = policies.iter().map(|p| p.state).collect();
    states.sort_unstable();
    states.dedup();
    if states.is_empty() {
        return Err(Error::Data("no policy records to cluster".into()));
    }
    let matrix = derive_in_force_years(policies, &states, config.cluster_span());
    let (filtered, report) = filter_policy_variables(&matrix, exclusions);
    for (id, cause) in &report.dropped {
        log::info!("dropped policy `{id}` ({})", cause.as_str());
    }
    let dissimilarity = gower_dissimilarity(&filtered, config.binary_mode, config.parallel)?;
    let dendrogram = agglomerate_complete_linkage(&dissimilarity);
    let n = dendrogram.n_leaves();
    if config.k > n {
        return Err(Error::Config(format!("k = {} exceeds {n} leaves", config.k)));
    }
    let assignment = cut_tree(&dendrogram, config.k)?;
    let (lo, hi) = config.k_grid;
    let elbow = elbow_curve(&dendrogram, &dissimilarity, lo.min(n)..=hi.min(n))?;
    Ok(ClusterStage {
        matrix: filtered,
        dissimilarity,
        dendrogram,
        assignment,
        elbow,
    })
}

fn panel_stage(
    config: &RunConfig,
    inputs: &Inputs,
    exclusions: &[String],
) -> Result<(Vec<PanelObservation>, ClusterStage)> {
    let stage = cluster_stage(config, &inputs.policies, exclusions)?;
    let labels = stage.assignment.label_map();
    let lags = PanelLags {
        cluster_lags: config.cluster_lags.clone(),
        deaths_lags: config.deaths_lags.clone(),
    };
    let (panel, report) = assemble_panel(
        &inputs.outcomes,
        &inputs.covariates,
        &labels,
        config.window(),
        &lags,
    )?;
    log::info!(
        "panel: {} rows, {} complete, {} suppressed outcome rows filled with {}",
        report.rows,
        report.complete_rows,
        inputs.suppressed_count,
        config.suppression_fill
    );
    Ok((panel, stage))
}

fn fit_stage(config: &RunConfig, panel: &[PanelObservation]) -> Result<FitResult> {
    let spec = config.model_spec()?;
    let design = build_design_matrix(panel, &spec)?;
    fit_poisson_irls(&design)
}

fn simulate_defaults(
    config: &RunConfig,
    panel: &[PanelObservation],
) -> Result<(StateCode, i32, u32)> {
    let state = match config.simulate_state.as_deref() {
        Some(s) => StateCode::parse(s)
            .ok_or_else(|| Error::Config(format!("unknown simulation state `{s}`")))?,
        None => {
            panel
                .first()
                .ok_or_else(|| Error::Data("empty panel".into()))?
                .state
        }
    };
    let change_year = config
        .change_year
        .unwrap_or((config.start_year + config.end_year) / 2);
    let target = config.target_cluster.unwrap_or(config.reference_cluster);
    Ok((state, change_year, target))
}

/// Run one command. Returns the list of files written (manifest last).
pub fn run_command(command: Command, config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(config.out_dir.display().to_string(), e))?;
    let mut tracker = Tracker::new();
    let mut written: Vec<PathBuf> = Vec::new();
    let out = |name: &str| config.out_dir.join(name);

    let record = |tracker: &mut Tracker, written: &mut Vec<PathBuf>, path: PathBuf| -> Result<()> {
        tracker.wrote(&path)?;
        written.push(path);
        Ok(())
    };

    match command {
        Command::Synth => {
            let synth_config =
                default_config(config.synth_states, config.start_year, config.end_year);
            let data = generate_synthetic_panel(&synth_config, config.seed)?;
            let p = out("policies.csv");
            io::write_policy_csv(&p, &data.policies)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("outcomes.csv");
            io::write_outcome_csv(&p, &data.outcomes)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("covariates.csv");
            io::write_covariate_csv(&p, &data.covariates)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("truth.json");
            io::write_json(&p, &data.truth)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Ingest => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, _) = panel_stage(config, &inputs, &exclusions)?;
            let p = out("panel.csv");
            io::write_panel_csv(&p, &panel, &config.deaths_lags, &config.cluster_lags)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Cluster => {
            let policies = load_policies(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let stage = cluster_stage(config, &policies, &exclusions)?;
            let p = out("distance.csv");
            io::write_distance_csv(&p, &stage.dissimilarity)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("dendrogram.csv");
            io::write_dendrogram_csv(&p, &stage.dendrogram)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("clusters.csv");
            io::write_clusters_csv(&p, &stage.assignment)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("elbow.csv");
            io::write_elbow_csv(&p, &stage.elbow)?;
            record(&mut tracker, &mut written, p)?;
            let groups = load_policy_groups(config, &mut tracker, &stage.matrix.col_keys)?;
            let summary =
                crate::cluster::profile::summarize_clusters(&stage.assignment, &stage.matrix, &groups)?;
            let p = out("profiles.json");
            io::write_json(&p, &summary)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Fit => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, _) = panel_stage(config, &inputs, &exclusions)?;
            let fit = fit_stage(config, &panel)?;
            let name = config.fit_name();
            let p = out(&format!("fit_{name}.json"));
            io::write_json(&p, &fit)?;
            record(&mut tracker, &mut written, p)?;
            let p = out(&format!("fit_{name}.csv"));
            io::write_fit_csv(&p, &fit)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Effects => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, _) = panel_stage(config, &inputs, &exclusions)?;
            let fit = fit_stage(config, &panel)?;
            let reference = ReferenceConfig {
                state: config.reference_state_code()?,
                year: config.reference_year,
            };
            let effects = relative_effects(&fit, &panel, &reference)?;
            let p = out("effects.json");
            io::write_json(&p, &effects)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("effects.csv");
            io::write_effects_csv(&p, &effects)?;
            record(&mut tracker, &mut written, p)?;
            let profiles: Vec<AttenuationProfile> = effects
                .iter()
                .filter(|e| e.cluster != fit.info.spec.reference_cluster)
                .map(|e| attenuation_profile(&fit, e.cluster))
                .collect::<Result<_>>()?;
            let p = out("attenuation.json");
            io::write_json(&p, &profiles)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("attenuation.csv");
            io::write_attenuation_csv(&p, &profiles)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Simulate => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, _) = panel_stage(config, &inputs, &exclusions)?;
            let fit = fit_stage(config, &panel)?;
            let (state, change_year, target) = simulate_defaults(config, &panel)?;
            let points = counterfactual_trajectory(&fit, &panel, state, change_year, target)?;
            let p = out("trajectory.json");
            io::write_json(&p, &points)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("trajectory.csv");
            io::write_trajectory_csv(&p, &points)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Brightspots => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, _) = panel_stage(config, &inputs, &exclusions)?;
            let fit = fit_stage(config, &panel)?;
            let scores = bright_spots(&fit, &panel, config.flag_count)?;
            let p = out("brightspots.json");
            io::write_json(&p, &scores)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("brightspots.csv");
            io::write_brightspots_csv(&p, &scores)?;
            record(&mut tracker, &mut written, p)?;
        }
        Command::Pipeline => {
            let inputs = load_inputs(config, &mut tracker)?;
            let exclusions = load_exclusions(config, &mut tracker)?;
            let (panel, stage) = panel_stage(config, &inputs, &exclusions)?;
            let p = out("panel.csv");
            io::write_panel_csv(&p, &panel, &config.deaths_lags, &config.cluster_lags)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("distance.csv");
            io::write_distance_csv(&p, &stage.dissimilarity)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("dendrogram.csv");
            io::write_dendrogram_csv(&p, &stage.dendrogram)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("clusters.csv");
            io::write_clusters_csv(&p, &stage.assignment)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("elbow.csv");
            io::write_elbow_csv(&p, &stage.elbow)?;
            record(&mut tracker, &mut written, p)?;
            let groups = load_policy_groups(config, &mut tracker, &stage.matrix.col_keys)?;
            let summary =
                crate::cluster::profile::summarize_clusters(&stage.assignment, &stage.matrix, &groups)?;
            let p = out("profiles.json");
            io::write_json(&p, &summary)?;
            record(&mut tracker, &mut written, p)?;
            let fit = fit_stage(config, &panel)?;
            let name = config.fit_name();
            let p = out(&format!("fit_{name}.json"));
            io::write_json(&p, &fit)?;
            record(&mut tracker, &mut written, p)?;
            let p = out(&format!("fit_{name}.csv"));
            io::write_fit_csv(&p, &fit)?;
            record(&mut tracker, &mut written, p)?;
            let reference = ReferenceConfig {
                state: config.reference_state_code()?,
                year: config.reference_year,
            };
            let effects = relative_effects(&fit, &panel, &reference)?;
            let p = out("effects.json");
            io::write_json(&p, &effects)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("effects.csv");
            io::write_effects_csv(&p, &effects)?;
            record(&mut tracker, &mut written, p)?;
            let profiles: Vec<AttenuationProfile> = effects
                .iter()
                .filter(|e| e.cluster != fit.info.spec.reference_cluster)
                .map(|e| attenuation_profile(&fit, e.cluster))
                .collect::<Result<_>>()?;
            let p = out("attenuation.json");
            io::write_json(&p, &profiles)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("attenuation.csv");
            io::write_attenuation_csv(&p, &profiles)?;
            record(&mut tracker, &mut written, p)?;
            let (state, change_year, target) = simulate_defaults(config, &panel)?;
            let points = counterfactual_trajectory(&fit, &panel, state, change_year, target)?;
            let p = out("trajectory.json");
            io::write_json(&p, &points)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("trajectory.csv");
            io::write_trajectory_csv(&p, &points)?;
            record(&mut tracker, &mut written, p)?;
            let scores = bright_spots(&fit, &panel, config.flag_count)?;
            let p = out("brightspots.json");
            io::write_json(&p, &scores)?;
            record(&mut tracker, &mut written, p)?;
            let p = out("brightspots.csv");
            io::write_brightspots_csv(&p, &scores)?;
            record(&mut tracker, &mut written, p)?;
        }
    }

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command: command.as_str(),
        config,
        inputs: &tracker.inputs,
        outputs: &tracker.outputs,
    };
    let manifest_path = out("manifest.json");
    io::write_json(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}
