//! Reconstruction of two-particle reduced density matrices from classical
//! shadows under D, Q and G positivity conditions.

pub mod error;
pub mod experiments;
pub mod fci;
pub mod hamiltonians;
pub mod numerics;
pub mod rdm;
pub mod sdp;
pub mod shadows;
pub mod v2rdm;

pub use error::{Error, Result};
