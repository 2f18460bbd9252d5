//! Parsing, cleaning rules, and panel assembly.

pub mod outcomes;
pub mod panel;
pub mod policy;
pub mod synth;

pub use outcomes::{
    parse_covariate_records, parse_outcome_records, CovariateRecord, OutcomeRecord,
    ParsedOutcomes, DEFAULT_SUPPRESSION_FILL,
};
pub use panel::{assemble_panel, JoinReport, PanelLags, PanelObservation};
pub use policy::{
    derive_in_force_years, filter_policy_variables, parse_policy_records, DropCause, FilterReport,
    PolicyRecord, StateYearPolicyMatrix,
};
pub use synth::{default_config, generate_synthetic_panel, SynthConfig, SynthData, SynthTruth};
