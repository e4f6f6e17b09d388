//! Nonholonomic rolling bodies of revolution and the nonholonomic particle.
//!
//! The crate builds the nonholonomic and gauge-transformed brackets on the
//! partially reduced phase space `(γ, M)`, solves the linear ODE whose
//! solutions give the two horizontal gauge momenta `J₁`, `J₂`, integrates the
//! equations of motion, and provides the numerical certificates (Jacobiators,
//! Casimir residuals, rate laws) that the reduced gauged bracket is Poisson
//! while the plain nonholonomic one is not.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! `*64` aliases below are the instantiations used by the CLI and the tests.

pub mod brackets;
pub mod dynamics;
pub mod error;
pub mod geomforms;
pub mod momenta;
pub mod particle;
pub mod phase;
pub mod profile;
pub mod sampling;
pub mod scalar;
pub mod smallalg;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3f64 = smallalg::Vec3<f64>;
pub type Mat3f64 = smallalg::Mat3<f64>;
pub type SmallMatrix64 = smallalg::SmallMatrix<f64>;
pub type BodyParams64 = phase::BodyParams<f64>;
pub type ProfileSpec64 = profile::ProfileSpec<f64>;
pub type Solid64 = phase::Solid<f64>;
pub type State64 = phase::StateGM<f64>;
pub type InvariantPoint64 = phase::InvariantPoint<f64>;
pub type MomentaSolution64 = momenta::MomentaSolution<f64>;
pub type RouthClosedForm64 = momenta::RouthClosedForm<f64>;
pub type TrajectorySample64 = dynamics::TrajectorySample<f64>;
pub type ParticleState64 = particle::ParticleState<f64>;

pub type Vec3f32 = smallalg::Vec3<f32>;
pub type Solid32 = phase::Solid<f32>;
pub type State32 = phase::StateGM<f32>;
