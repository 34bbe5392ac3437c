//! Private classical information of a lossy bosonic memory channel.
//!
//! Two (or `n`) bosonic signal modes couple to a correlated two-mode-squeezed
//! environment through beam splitters of transmissivity `eta`; the eavesdropper
//! holds the environment output. This crate computes the Holevo quantities of
//! receiver and eavesdropper and the per-use private information
//! `I_p = (chi_out - chi_eve) / n`, three independent ways:
//!
//! - a generic Gaussian pipeline (covariance congruence + symplectic
//!   spectra), valid for any number of uses: [`channel`], [`privacy`];
//! - closed forms for the two-use channel, kept as cross-check oracles:
//!   [`channel::closed_form_covariances`], [`channel::closed_form_spectra`];
//! - a brute-force truncated Fock-space simulator: [`fock`].
//!
//! Conventions, fixed globally: quadrature ordering `(q_1..q_n, p_1..p_n)`,
//! dimensionless quadratures with vacuum variance 1/2 per quadrature (so the
//! symplectic form is `[[0, I], [-I, 0]]` and a pure mode has symplectic
//! eigenvalue 1/2). Entropies are in bits.

pub mod channel;
pub mod fock;
pub mod gauss;
pub mod privacy;
pub mod verify;

use thiserror::Error;

/// Errors across the Gaussian pipeline and the Fock oracle.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("covariance dimension must be even (2 per mode), got {dim}")]
    OddDimension { dim: usize },
    #[error("matrix asymmetry {max_asymmetry:.3e} exceeds 1e-12")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("covariance is not positive definite: eigenvalue {eigenvalue:.6e}")]
    NotPositiveDefinite { eigenvalue: f64 },
    #[error("symplectic eigenvalue {nu} below the uncertainty bound 1/2")]
    BelowUncertainty { nu: f64 },
    #[error("entropy argument {x} below -1e-12; covariance violates the uncertainty bound")]
    EntropyDomain { x: f64 },
    #[error("squeeze exponent matrix is singular")]
    SingularExponent,
    #[error("need at least {min} modes, got {n}")]
    ModeCount { n: usize, min: usize },
    #[error("transmissivity must lie in [0, 1], got {eta}")]
    EtaRange { eta: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("photon budget exceeded: N_eff = {n_eff} but sinh^2(r) = {sinh2_r} at r = {r}; require N >= 0")]
    PhotonBudget { n_eff: f64, r: f64, sinh2_r: f64 },
    #[error("closed forms are defined for the 2-use channel only, got n_uses = {n_uses}")]
    ClosedFormUnsupported { n_uses: usize },
    #[error("outside the oracle regime: {limit}")]
    OracleRegime { limit: String },
    #[error("Fock cutoff D = {d} too small, need at least {min}")]
    CutoffDim { d: usize, min: usize },
    #[error("Fock cutoff too small: norm deficit {deficit:.3e} exceeds {tol:.1e}")]
    CutoffTooSmall { deficit: f64, tol: f64 },
    #[error("quadrature weight deficit {deficit:.3e} exceeds 1e-8")]
    QuadratureWeightDeficit { deficit: f64 },
    #[error("sweep grid axis '{axis}' is empty or invalid")]
    EmptyGrid { axis: &'static str },
    #[error("numerical health check failed: {what} = {value:.3e}")]
    NumericalHealth { what: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
