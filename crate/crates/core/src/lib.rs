//! Semitoric family `F_t = (J, H_t)` on the compact toric 4-manifold whose
//! momentum polygon is the octagon with vertices `(0,1), (1,0), (2,0), (3,1),
//! (3,2), (2,3), (1,3), (0,2)`.
//!
//! The manifold is modelled as the zero set of six quadrics in C^8 modulo a
//! 6-torus. `J = |z_1|^2 / 2`, `H = |z_3|^2 / 2`, and
//! `H_t = (1 - 2t) H + t gamma Re(conj(z2 z3 z4) z6 z7 z8)`.

pub mod critical;
pub mod delzant;
pub mod error;
pub mod fibre;
pub mod manifold;
pub mod momentum;
pub mod numerics;

pub use error::{Error, Result};
