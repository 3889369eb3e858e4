//! Numerical engine for the three-dimensional Schrödinger operator with N
//! point interactions (zero-range potentials).
//!
//! The operator `H` is parametrized by centers `y_1..y_N` in R^3 and strengths
//! `alpha_1..alpha_N`; its resolvent is a rank-N correction of the free
//! resolvent with coupling matrix `Gamma(z)` (Krein's formula). Everything the
//! crate computes flows from that structure:
//!
//! * [`gamma`] — the coupling matrix, its inverse coefficients and their
//!   closed-form derivative;
//! * [`resolvent`] — free and perturbed resolvent kernels, resolvent action on
//!   Gaussian data, boundary-condition verification;
//! * [`spectrum`] — negative eigenvalues from `det Gamma(i kappa) = 0`,
//!   eigenfunctions and bound-state projections;
//! * [`propagator`] — the unitary evolution `U(t) = e^{-itH}`: explicit N=1
//!   kernels for all strength regimes and the cutoff-regularized spectral
//!   integral for several centers;
//! * [`dispersive`] — the weight `w(x)`, weighted sup-norms on deterministic
//!   grids and time-decay regression;
//! * [`specialfn`] — the Faddeeva function and the modified Bessel function
//!   K0 used by the closed forms;
//! * [`config`] — JSON run configurations for the `deltasolve` binary.
//!
//! Convention used throughout: `U(t) = e^{-itH}`, so a bound state with
//! energy `E = -kappa^2` evolves with phase `e^{-itE} = e^{+it kappa^2}`, the
//! free kernel is `S(x;t) = e^{i|x|^2/4t} / (4 pi i t)^{3/2}` on the principal
//! branch, and the absolutely continuous part of the evolution is
//! `(1/pi) \int_0^inf e^{-it lambda} Im R(lambda + i0) d lambda`.

pub mod config;
pub mod dispersive;
pub mod error;
pub mod gamma;
pub mod geom;
pub mod propagator;
pub mod quad;
pub mod resolvent;
pub mod spectrum;
pub mod specialfn;

pub use error::EngineError;
pub use gamma::{CoeffDerivative, CoeffMatrix, GammaMatrix, InteractionConfig};
pub use resolvent::{GaussianSum, GaussianTerm};
pub use spectrum::Eigenpair;
pub use propagator::{CutoffSpec, EvolveOptions};
pub use dispersive::{DecayRecord, GridSpec};

/// Complex scalar used across the crate.
pub type Complex64 = num_complex::Complex<f64>;
