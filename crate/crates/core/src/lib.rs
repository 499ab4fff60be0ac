//! Compositional optimization over undirected wiring diagrams.
//!
//! Problems (objectives, saddle functions, flow networks) and dynamical
//! systems are payloads of finset algebras. Wiring diagrams compose them via
//! [`opensys::oapply`], and solution methods such as gradient descent are
//! maps between algebras that commute with composition, so a composite
//! problem can be solved by composing the solvers of its parts.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod finset;
pub mod flownet;
pub mod freevect;
pub mod opensys;
pub mod morphisms;
pub mod problems;
pub mod random;
pub mod suite;
pub mod uwd;

pub use error::{Error, Result};
pub use finset::{pushout, Cospan, FinFunction, PushoutResult};
pub use opensys::{oapply, FinsetAlgebra, OpenObject};
pub use uwd::{Curvature, Uwd};

/// Derives an independent child seed for component `index`.
///
/// Splitmix64 finalizer applied to `seed + φ·(index + 1)`.
pub fn mix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
