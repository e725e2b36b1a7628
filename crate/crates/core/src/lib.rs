//! Symplectic transformations, phase functions and membrane areas on
//! chart-described symplectic manifolds.
//!
//! The crate is organised bottom-up: [`geometry`] holds the chart linear
//! algebra and numerics, [`ether`] the Ether Hamiltonians and reflections,
//! [`phase_maps`] the map/phase correspondence, [`phase_product`] the
//! product of phases, [`groupoid`] the phase-space groupoid, chords and
//! extensions, and [`torsion`] the non-involutive generalization.

pub mod cli;
pub mod compute;
pub mod config;
pub mod describe;
pub mod error;
pub mod ether;
pub mod geometry;
pub mod groupoid;
pub mod phase_maps;
pub mod phase_product;
pub mod torsion;
pub mod verify;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{EtherError, Result};
