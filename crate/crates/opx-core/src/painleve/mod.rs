//! Discrete Painlevé structure of recurrence coefficients.
//!
//! The positive d-PI solution for e^{-x⁴+tx²}, Verblunsky coefficients of
//! e^{t cos θ} and d-PII, Toda / Langmuir / Ablowitz-Ladik flows, residuals
//! of the continuous Painlevé equations and of the discrete systems of
//! several semiclassical families, singularity confinement and Wronskian
//! formulas.

mod dp1;
mod family;
mod lattice;
mod ode;
mod opuc;
mod probe;
mod system;
mod wronskian;

pub use dp1::*;
pub use family::*;
pub use lattice::*;
pub use ode::*;
pub use opuc::*;
pub use probe::*;
pub use system::*;
pub use wronskian::*;
