//! Periodic dnoidal traveling waves of the modified Kawahara equation
//! `u_t + u²u_x + γu_xxx − u_xxxxx = 0`.
//!
//! The crate builds the explicit wave family, checks the spectral picture of
//! the linearized operator around each wave, evaluates the stability index
//! `⟨ℒΦ, Φ⟩` along the curve and integrates the PDE itself to watch the orbit
//! distance of perturbed waves.

pub mod error;
pub mod evolution;
pub mod index;
pub mod io;
pub mod special;
pub mod spectral;
pub mod spectrum;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use wave::{Gamma, WaveParams, WaveProfile};
