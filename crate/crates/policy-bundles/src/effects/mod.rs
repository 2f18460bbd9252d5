//! Decision outputs from fitted models: effect rankings, counterfactual
//! trajectories, lag attenuation, and bright-spot residual rankings.

pub mod attenuation;
pub mod brightspots;
pub mod counterfactual;
pub mod relative;

pub use attenuation::{attenuation_profile, AttenuationPoint, AttenuationProfile};
pub use brightspots::{bright_spots, BrightSpotScore, SpotFlag, DEFAULT_FLAG_COUNT};
pub use counterfactual::{counterfactual_trajectory, TrajectoryPoint};
pub use relative::{relative_effects, EffectEstimate, ReferenceConfig};
