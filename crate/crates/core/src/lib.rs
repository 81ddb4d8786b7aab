pub mod decimal;
pub mod dynamics;
pub mod error;
pub mod families;
pub mod fft;
pub mod harness;
pub mod lattice;
pub mod linalg;
pub mod microlocal;
pub mod mode;
pub mod observability;
pub mod quantization;

pub use error::{Error, Result};
pub use mode::{Mode, ModeBox};
