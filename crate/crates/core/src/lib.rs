//! Dynamical invariants, Fock states and Grassmann coherent states of the
//! nonstationary fermionic forced oscillator
//!
//! ```text
//! H(t) = ω(t) b†b + f(t) b† + f*(t) b + g(t)
//! ```
//!
//! Every analytic construction (the ν-system, the ε-linearization, the
//! dynamic vacuum and coherent states, the Lewis–Riesenfeld phases) is
//! paired with a brute-force propagator so the two can be compared.

pub mod algebra;
pub mod epsilon;
pub mod error;
pub mod grassmann;
pub mod nusystem;
pub mod ode;
pub mod profile;
pub mod propagator;
pub mod states;

pub use algebra::{Mat2, Vec2, C64};
pub use error::{Error, Result};
pub use nusystem::{NuState, NuTrajectory};
pub use profile::{Expr, ProfileSet};
pub use propagator::UTrajectory;
