//! Shape-morphing reduced-order models for nonlinear Schrödinger-type equations.
//!
//! This crate evolves low-dimensional wave-packet ansätze û(x, q(t)) as
//! reduced-order models (ROMs) of the cubic NLS equation and the modified
//! NLS (Dysthe) equation, and validates them against full pseudospectral
//! direct numerical simulation (DNS). Two reduction principles are built in
//! and connected:
//!
//! * **RONS** — evolve the parameters q(t) by minimizing the instantaneous
//!   L² residual ‖û_t − F(û)‖, an orthogonal projection of the PDE vector
//!   field onto the tangent space of the ansatz manifold ([`rons`]).
//! * **Reduced Lagrangian** — substitute the ansatz into the PDE's
//!   Lagrangian, integrate out space, and take Euler–Lagrange equations.
//!
//! Both are faces of a single complex master equation M q̇ = ξ + η whose
//! real part is RONS and whose imaginary part is the reduced-Lagrangian
//! system ([`master`]). For polynomial-exponent ansätze the two faces
//! coincide; for translating wave packets the imaginary part is rank
//! deficient and fails to produce an equation for the wave speed, which
//! this crate detects and reports.
//!
//! Module map:
//!
//! * [`grid`] — periodic grid, FFT pair, spectral derivatives, quadrature.
//! * [`ansatz`] — Gaussian / sech / polynomial-exponent wave-packet
//!   families with analytic parameter and spatial derivatives.
//! * [`pde`] — right-hand sides of NLS (stationary and co-moving frames)
//!   and MNLS, on grid fields and on ansätze.
//! * [`rons`] — metric tensor and vector-field assembly, the RONS solve,
//!   and the conservation-constrained variant.
//! * [`master`] — the complex master equation, its real/imaginary solves,
//!   and rank-deficiency reports.
//! * [`closed_form`] — the closed-form parameter ODE systems for the
//!   Gaussian families, used as fast ROMs and as oracles.
//! * [`integrate`] — Dormand–Prince 4(5) / RK4 for parameter ODEs and
//!   ETDRK4 for the stiff spectral DNS.
//! * [`diagnostics`] — observables (mass, energy, peak, wave center),
//!   group-velocity fits, and ROM-vs-DNS comparison reports.

pub mod ansatz;
pub mod closed_form;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrate;
pub mod master;
pub mod pde;
pub mod rons;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

pub use ansatz::{AnsatzFamily, ParameterState};
pub use error::CoreError;
pub use grid::{ComplexField, PeriodicGrid};
pub use pde::PdeKind;
