//! Physics and inverse design for a chain of ions held one per microtrap in
//! a magnetic field gradient.
//!
//! The crate computes the chain equilibrium, its axial normal modes and the
//! gradient-induced qubit-qubit coupling matrix, then chooses trap positions
//! and strengths that give uniform ion spacing and uniform nearest-neighbour
//! couplings. Reports on top of that (frequency plan, coupling comparisons,
//! strength profiles, scaling fits, Monte-Carlo tolerancing) live in
//! [`report`].
//!
//! Everything is SI internally. Presentation units appear only in
//! [`config`] and [`report`].

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atomic;
pub mod chain;
pub mod config;
pub mod constants;
pub mod coupling;
pub mod design;
pub mod error;
pub mod report;
pub mod robustness;
pub mod scaling;
pub mod species;

pub use atomic::MagneticField;
pub use chain::{ChainConfiguration, ChainSolution, CoulombModel, MicrotrapArray};
pub use coupling::{CouplingMatrix, FrequencyConvention};
pub use design::{DesignSpec, TrapDesign};
pub use error::{Error, Result};
pub use species::IonSpecies;
