//! Two-photon vacuum-Rabi dynamics of two atoms coupled to one or two
//! cavity modes, in units of the first atom's coupling strength.
//!
//! * [`basis`] and [`hamiltonian`] build the truncated two-excitation models.
//! * [`unitary`] integrates the Schrödinger equation and provides an exact
//!   eigendecomposition oracle.
//! * [`effective`] holds the reduced two-level description, the closed-form
//!   dispersive estimates and the resonance-condition solver.
//! * [`lindblad`] integrates the master equation with cavity photon loss.
//! * [`experiments`] runs parameter sweeps and comparison studies.

pub mod basis;
pub mod effective;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod lindblad;
pub mod params;
pub mod unitary;

pub use basis::{enumerate_basis, Atom, Basis, BasisState};
pub use error::{Error, Result};
pub use params::{ModelParams, Sector, SystemKind};
