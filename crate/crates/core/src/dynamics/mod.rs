//! Schrödinger propagation on `T^d` and on the sub-tori `T_Λ`.

pub mod density;
pub mod plan;
pub mod potential;
pub mod spectral;

pub use density::{panel_count, simpson_rule, time_averaged_density, Density, DEFAULT_PANELS_PER_UNIT};
pub use plan::{averaged_propagator, free_propagate, propagate, PropagatorPlan, Scheme, DEFAULT_DT};
pub use potential::{ModeEntry, Modulation, Potential, PotentialSpec};
pub use spectral::{spectral_cutoff, SpectralProfile};
