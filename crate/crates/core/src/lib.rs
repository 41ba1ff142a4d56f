//! Paraxial orbital-angular-momentum modes, generalized orbital Poincare
//! spheres, and their closed-form Wigner functions.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix the common `f64` and `f32` forms.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod angmom;
pub mod cli;
pub mod error;
pub mod fieldsynth;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod phasespace;
pub mod poincare;
pub mod scalar;
pub mod special;
pub mod verify;

pub use angmom::{AmplitudeKind, AmplitudeSet, Helicity};
pub use error::{Error, Result};
pub use fieldsynth::{amplitudes_to_lg, dispersion_k0, polarization, LgProjection, ParaxialRay, WaveVector};
pub use modes::{lg_momentum, lg_position, BeamFrame, ComplexField2D, GridSpec, ModeIndex};
pub use phasespace::{
    overlap, transfer_matrix, wigner_closed, wigner_oracle, PhaseSpacePoint, PhaseSpaceQuadrature, SymplecticT,
};
pub use poincare::{build_generators, rotate, synthesize_field, GeneratorMatrices, SphereState};
pub use scalar::Scalar;

pub type BeamFrame64 = BeamFrame<f64>;
pub type BeamFrame32 = BeamFrame<f32>;
pub type SphereState64 = SphereState<f64>;
pub type SphereState32 = SphereState<f32>;
pub type PhaseSpacePoint64 = PhaseSpacePoint<f64>;
pub type PhaseSpacePoint32 = PhaseSpacePoint<f32>;
pub type SymplecticT64 = SymplecticT<f64>;
pub type SymplecticT32 = SymplecticT<f32>;
pub type GeneratorMatrices64 = GeneratorMatrices<f64>;
pub type GeneratorMatrices32 = GeneratorMatrices<f32>;
pub type ComplexField2D64 = ComplexField2D<f64>;
pub type ComplexField2D32 = ComplexField2D<f32>;
pub type AmplitudeSet64 = AmplitudeSet<f64>;
pub type AmplitudeSet32 = AmplitudeSet<f32>;
