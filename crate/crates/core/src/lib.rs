// SPDX-License-Identifier: Apache-2.0

//! First-photon waiting-time statistics of a single two-level emitter driven
//! by a resonant laser and a radio-frequency field that modulates its
//! transition.
//!
//! All computations use units in which the rf angular frequency is 1.
//! Physical inputs are converted with [`scale_to_rf_units`].

pub mod bessel;
pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod figures;
pub mod fit;
pub mod ode;
pub mod parallel;
pub mod params;
pub mod resonance;
pub mod rg;
pub mod roots;
pub mod series;
pub mod sweep;
pub mod table;
pub mod validation;

pub use error::{Error, Result};
pub use params::{classify_regime, scale_to_rf_units, PhysicalParams, Regime, ScaledParams};
