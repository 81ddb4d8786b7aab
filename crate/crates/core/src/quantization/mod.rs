//! Weyl quantization on the torus, Wigner pairings and two-microlocal filters.

pub mod cutoff;
pub mod sqrt;
pub mod state;
pub mod symbol;
pub mod twomicro;
pub mod weyl;

pub use cutoff::{bump, smooth_step, Cutoff, Side};
pub use sqrt::{sqrt_symbol_defect, SqrtDefectConfig};
pub use state::FourierState;
pub use symbol::{EtaProfile, Polynomial, Symbol, SymbolTerm, XiFactor};
pub use twomicro::{check_chain, lifted_pair, nested_twomicro_pair, twomicro_pair};
pub use weyl::{
    apply, average_symbol, commutator_defect, matrix_element, operator_matrix, wigner_pair,
    CommutatorReport, Midpoint,
};
