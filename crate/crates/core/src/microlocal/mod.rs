//! Finite-`h` stand-ins for the limit objects: covering split, the `σ_Λ` proxy,
//! the `ν_Λ` trace formula, propagation-law tables, marginals and their
//! extrapolation.

pub mod covering;
pub mod marginal;
pub mod propagation;
pub mod sigma;
pub mod table;

pub use covering::{covering_split, covering_split_for, lift_isometry_check, CoveringSplit, IsometryReport, SplitMode};
pub use marginal::{check_boxes, conditional_density, histogram_distance, marginal_variation, marginal_xi, XiBox, MASS_THRESHOLD};
pub use propagation::{propagation_law_test, ObservableTables, PropagationConfig, PropagationReport};
pub use sigma::{nu_lambda, nu_lambda_series, sigma_proxy, SigmaProxy};
pub use table::{limit_extrapolate, log_log_slope, richardson, ExtrapolationSummary, LimitTable, RowSummary, Verdict};
