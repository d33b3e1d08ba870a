//! Spectral distributions of sample autocovariance matrices.
//!
//! This crate simulates finite-order moving-average processes, builds the
//! usual family of autocovariance matrix estimators (plain, banded, tapered,
//! full-window), computes their empirical spectra, and evaluates the
//! combinatorial limit-moment calculus that describes the large-dimension
//! behaviour of those spectra. A bounded-Lipschitz metric module ties the
//! empirical and limiting descriptions together.
//!
//! Modules:
//! - [`process`]: MA(d) processes, innovations, theoretical autocovariances,
//!   spectral densities, and draws of `f_X(U)`.
//! - [`estimators`]: dense symmetric matrices and every autocovariance-matrix
//!   builder (sample, full-window, banded type I/II, tapered, theoretical).
//! - [`spectra`]: symmetric eigensolver, empirical spectral distributions,
//!   trace moments, kernel density grids.
//! - [`momentcalc`]: pair partitions, offset words, generating-vertex linear
//!   forms, Monte Carlo word weights, limit moments, and an exact small-n
//!   enumeration oracle.
//! - [`metrics`]: bounded-Lipschitz distance (exact, with witness),
//!   trace/Gram perturbation bounds, Kolmogorov-Smirnov distance.
//!
//! All randomized entry points take explicit 64-bit seeds and are
//! deterministic given (inputs, seed); nothing in the crate keeps shared
//! mutable state, so everything can be called concurrently.

pub mod estimators;
pub mod metrics;
pub mod momentcalc;
pub mod process;
pub mod spectra;
