//! Simulation and analysis toolkit for matter waves bouncing at normal
//! incidence on a vibrating evanescent-wave mirror.
//!
//! The crate covers the full chain from drive parameters to synthetic
//! detector images:
//!
//! * [`params`]: mirror potential, drive depth, vibration amplitude
//! * [`kinematics`]: drop-bounce-detect ladder of sideband velocities
//! * [`diffraction`]: sideband weights from the phase-modulation model
//! * [`oracle`]: direct 1D Schroedinger integration to audit the model
//! * [`imaging`]: ensemble sampling, synthetic images, weight recovery
//! * [`config`]: INI-style run configuration and named presets

pub mod config;
pub mod constants;
pub mod diffraction;
pub mod error;
pub mod imaging;
pub mod kinematics;
pub mod oracle;
pub mod output;
pub mod params;

pub use error::{Error, Result};
