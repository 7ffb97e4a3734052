//! Numerical machinery for fifth-order dispersive equations on the half-line.
//!
//! The crate provides, bottom up:
//!
//! * [`special`] — gamma function and the smooth compactly supported profiles
//!   used for cutoffs and dyadic partitions;
//! * [`quad`] — small deterministic quadrature helpers (Gauss–Legendre panels);
//! * [`spectral`] — uniform grids, continuum-normalized discrete transforms,
//!   and Littlewood–Paley / modulation projections;
//! * [`kernel`] — the oscillatory kernel `B(x) = (2π)⁻¹ ∫ e^{ixξ} e^{iξ⁵} dξ`,
//!   its derivatives, half-line integrals and Mellin transforms;
//! * [`fracint`] — Riemann–Liouville fractional integrals of causal signals;
//! * [`propagator`] — the fifth-order group `e^{t∂ₓ⁵}`, Duhamel integration,
//!   time cutoffs, and the half-line energy identity;
//! * [`forcing`] — Duhamel boundary forcing operators built from the kernel,
//!   their traces at `x = 0`, and the 2×2 boundary matching system;
//! * [`nonlinear`] — the two nonlinearities, resonance polynomials, and the
//!   scaling map;
//! * [`norms`] — weighted space-time norms (dispersive-weight, time-weight,
//!   low-frequency variants) and Sobolev norms of fields and signals;
//! * [`probe`] — brute-force block functionals on sheared modulation
//!   coordinates and ratio probes for the multilinear estimates;
//! * [`solver`] — the half-line initial-boundary-value Picard solver and a
//!   whole-line reference integrator;
//! * [`verify`] — the acceptance suite shared by the CLI and the test target.

pub mod error;
pub mod special;
pub mod quad;
pub mod spectral;
pub mod kernel;
pub mod fracint;
pub mod propagator;
pub mod forcing;
pub mod nonlinear;
pub mod norms;
pub mod probe;
pub mod solver;
pub mod verify;
