//! Poisson panel regression: design construction, IRLS fitting, prediction.

pub mod design;
pub mod fit;
pub mod predict;
pub mod spec;

pub use design::{build_design_matrix, DesignInfo, DesignMatrix};
pub use fit::{fit_poisson_irls, log_likelihood_and_aic, standard_errors, FitResult};
pub use predict::{pearson_residual, predict_mean, predict_means};
pub use spec::{ColumnDef, ModelSpec};
