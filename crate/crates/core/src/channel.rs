//! The lossy memory channel at the covariance level.
//!
//! Assembles the joint input (x) environment Gaussian state, applies the
//! beam-splitter coupling as a covariance congruence, and extracts the
//! receiver / eavesdropper marginals and ensemble-averaged covariances.
//!
//! Wigner functions are never materialized: the beam splitter's variable
//! substitution `gamma -> B gamma` turns a Wigner exponent `A` into
//! `B^T A B`, hence the covariance `V = A^{-1}/2` into `B^{-1} V B^{-T}`;
//! `B` is orthogonal, so `B^{-1} = B^T` and means map as `mean -> B^T mean`.
//!
//! The two-use channel admits closed forms (`V_out = [eta A_r^{-1} +
//! (1-eta) A_s^{-1}]/2` and friends, plus four symplectic-eigenvalue
//! expressions); they are provided as independent cross-checks of the
//! generic pipeline.

use nalgebra::{DMatrix, DVector};

use crate::gauss::{
    build_squeeze_exponent, symmetric_multimode_squeeze_symplectic, CovMatrix, SymplecticSpectrum,
};
use crate::{Error, Result};

/// Which marginal of the propagated joint state to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Receiver,
    Eavesdropper,
}

impl Party {
    /// Fraction of the ensemble displacement variance this party receives:
    /// `eta` for the receiver, `1 - eta` for the eavesdropper.
    pub fn transmitted_fraction(&self, eta: f64) -> f64 {
        match self {
            Party::Receiver => eta,
            Party::Eavesdropper => 1.0 - eta,
        }
    }
}

/// Channel parameters: transmissivity, memory, and number of uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    eta: f64,
    s: f64,
    n_uses: usize,
}

impl ChannelParams {
    pub fn new(eta: f64, s: f64, n_uses: usize) -> Result<Self> {
        if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
            return Err(Error::EtaRange { eta });
        }
        if !s.is_finite() {
            return Err(Error::NonFinite { name: "memory parameter s", value: s });
        }
        if n_uses < 2 {
            return Err(Error::ModeCount { n: n_uses, min: 2 });
        }
        Ok(Self { eta, s, n_uses })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n_uses(&self) -> usize {
        self.n_uses
    }
}

/// Input encoding policy: entanglement parameter `r` and the fixed effective
/// photon budget `N_eff = N + sinh^2 r` per use.
///
/// Feasibility (`N >= 0`) is enforced at construction, so every held policy
/// satisfies the budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputPolicy {
    r: f64,
    n_eff: f64,
    n: f64,
}

impl InputPolicy {
    pub fn new(r: f64, n_eff: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::NonFinite { name: "entanglement parameter r", value: r });
        }
        if !n_eff.is_finite() || n_eff < 0.0 {
            return Err(Error::NonFinite { name: "photon budget N_eff", value: n_eff });
        }
        let sinh2_r = r.sinh().powi(2);
        let n = n_eff - sinh2_r;
        // |r| = asinh(sqrt(N_eff)) is a legal boundary; absorb its rounding
        if n < -1e-12 {
            return Err(Error::PhotonBudget { n_eff, r, sinh2_r });
        }
        Ok(Self { r, n_eff, n: n.max(0.0) })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_eff(&self) -> f64 {
        self.n_eff
    }

    /// Displacement photon number `N = N_eff - sinh^2 r`.
    pub fn n(&self) -> f64 {
        self.n
    }
}

/// A Gaussian state: quadrature means plus covariance, in the global
/// `(q_1..q_n, p_1..p_n)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: CovMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: CovMatrix) -> Result<Self> {
        if mean.len() != cov.matrix().nrows() {
            return Err(Error::DimensionMismatch {
                expected: cov.matrix().nrows(),
                got: mean.len(),
            });
        }
        Ok(Self { mean, cov })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &CovMatrix {
        &self.cov
    }

    pub fn n_modes(&self) -> usize {
        self.cov.n_modes()
    }
}

/// Quadrature indices belonging to the given party inside a joint state of
/// `n_uses` signal modes followed by `n_uses` environment modes.
fn party_indices(party: Party, n_uses: usize) -> Vec<usize> {
    let n_tot = 2 * n_uses;
    let offset = match party {
        Party::Receiver => 0,
        Party::Eavesdropper => n_uses,
    };
    (0..n_uses)
        .map(|k| offset + k)
        .chain((0..n_uses).map(|k| n_tot + offset + k))
        .collect()
}

/// The beam-splitter matrix coupling `n_uses` signal modes to `n_uses`
/// environment modes: on each quadrature sector it is
/// `[[sqrt(eta) I, sqrt(1-eta) I], [-sqrt(1-eta) I, sqrt(eta) I]]`.
///
/// Orthogonal by construction; both endpoints `eta = 0, 1` are exact.
pub fn beam_splitter_matrix(eta: f64, n_uses: usize) -> Result<DMatrix<f64>> {
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(Error::EtaRange { eta });
    }
    if n_uses == 0 {
        return Err(Error::ModeCount { n: 0, min: 1 });
    }
    let t = eta.sqrt();
    let l = (1.0 - eta).sqrt();
    let n_tot = 2 * n_uses;
    let mut b = DMatrix::zeros(2 * n_tot, 2 * n_tot);
    for sector in [0, n_tot] {
        for k in 0..n_uses {
            b[(sector + k, sector + k)] = t;
            b[(sector + k, sector + n_uses + k)] = l;
            b[(sector + n_uses + k, sector + k)] = -l;
            b[(sector + n_uses + k, sector + n_uses + k)] = t;
        }
    }
    Ok(b)
}

/// Builds the joint input (x) environment state before the coupling.
///
/// The input block is the `n_uses`-mode symmetric squeezed vacuum with
/// parameter `r`, displaced by `mu` (length `2 * n_uses`, the Wigner-center
/// convention); the environment block is the same construction with the
/// memory parameter `s` and zero mean. For two uses both blocks reduce to
/// `A_{-x}/2`.
pub fn joint_state(
    policy: &InputPolicy,
    params: &ChannelParams,
    mu: &DVector<f64>,
) -> Result<GaussianState> {
    let n = params.n_uses();
    if mu.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: mu.len() });
    }
    let half_vac = DMatrix::<f64>::identity(2 * n, 2 * n) * 0.5;
    let m_in = symmetric_multimode_squeeze_symplectic(policy.r(), n)?;
    let m_env = symmetric_multimode_squeeze_symplectic(params.s(), n)?;
    let v_in = &m_in * &half_vac * m_in.transpose();
    let v_env = &m_env * &half_vac * m_env.transpose();

    let n_tot = 2 * n;
    let mut cov = DMatrix::zeros(2 * n_tot, 2 * n_tot);
    for (block, party) in [(&v_in, Party::Receiver), (&v_env, Party::Eavesdropper)] {
        let idx = party_indices(party, n);
        for (bi, &gi) in idx.iter().enumerate() {
            for (bj, &gj) in idx.iter().enumerate() {
                cov[(gi, gj)] = block[(bi, bj)];
            }
        }
    }
    let mut mean = DVector::zeros(2 * n_tot);
    for (bi, &gi) in party_indices(Party::Receiver, n).iter().enumerate() {
        mean[gi] = mu[bi];
    }
    GaussianState::new(mean, CovMatrix::new(cov)?)
}

/// Applies the beam-splitter coupling: `mean -> B^T mean`,
/// `cov -> B^T cov B` (with `B^{-1} = B^T`).
pub fn propagate(joint: &GaussianState, params: &ChannelParams) -> Result<GaussianState> {
    let n = params.n_uses();
    if joint.n_modes() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 4 * n, got: 2 * joint.n_modes() });
    }
    let b = beam_splitter_matrix(params.eta(), n)?;
    let mean = b.transpose() * joint.mean();
    let cov = b.transpose() * joint.cov().matrix() * &b;
    GaussianState::new(mean, CovMatrix::new(cov)?)
}

/// Gaussian partial trace: keeps the party's mean entries and covariance
/// rows/columns.
pub fn marginal(joint_out: &GaussianState, party: Party) -> Result<GaussianState> {
    let n_modes = joint_out.n_modes();
    if !n_modes.is_multiple_of(2) {
        return Err(Error::OddDimension { dim: n_modes });
    }
    let n_uses = n_modes / 2;
    let idx = party_indices(party, n_uses);
    let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| joint_out.mean()[i]));
    let mut cov = DMatrix::zeros(idx.len(), idx.len());
    for (bi, &gi) in idx.iter().enumerate() {
        for (bj, &gj) in idx.iter().enumerate() {
            cov[(bi, bj)] = joint_out.cov().matrix()[(gi, gj)];
        }
    }
    GaussianState::new(mean, CovMatrix::new(cov)?)
}

/// Ensemble-averaged covariance over the Gaussian displacement distribution:
/// adds `eta N I / 2` for the receiver and `(1-eta) N I / 2` for the
/// eavesdropper.
pub fn averaged_cov(
    conditional: &CovMatrix,
    policy: &InputPolicy,
    params: &ChannelParams,
    party: Party,
) -> Result<CovMatrix> {
    let dim = conditional.matrix().nrows();
    let frac = party.transmitted_fraction(params.eta());
    let shift = DMatrix::<f64>::identity(dim, dim) * (0.5 * frac * policy.n());
    CovMatrix::new(conditional.matrix() + shift)
}

/// The four closed-form covariance matrices of the two-use channel.
#[derive(Debug, Clone)]
pub struct ClosedFormCovariances {
    pub v_out: CovMatrix,
    pub v_eve: CovMatrix,
    pub v_out_avg: CovMatrix,
    pub v_eve_avg: CovMatrix,
}

/// Direct evaluation of the two-use closed forms,
/// `V_out = [eta A_r^{-1} + (1-eta) A_s^{-1}]/2` and
/// `V_eve = [(1-eta) A_r^{-1} + eta A_s^{-1}]/2`, plus their ensemble
/// averages. Unsupported for `n_uses != 2`.
pub fn closed_form_covariances(
    policy: &InputPolicy,
    params: &ChannelParams,
) -> Result<ClosedFormCovariances> {
    if params.n_uses() != 2 {
        return Err(Error::ClosedFormUnsupported { n_uses: params.n_uses() });
    }
    let eta = params.eta();
    let a_r_inv = build_squeeze_exponent(policy.r())?.inverse();
    let a_s_inv = build_squeeze_exponent(params.s())?.inverse();
    let to_dyn = |m: &nalgebra::Matrix4<f64>| DMatrix::from_iterator(4, 4, m.iter().copied());
    let v_out =
        CovMatrix::new((to_dyn(a_r_inv.matrix()) * eta + to_dyn(a_s_inv.matrix()) * (1.0 - eta)) * 0.5)?;
    let v_eve =
        CovMatrix::new((to_dyn(a_r_inv.matrix()) * (1.0 - eta) + to_dyn(a_s_inv.matrix()) * eta) * 0.5)?;
    let v_out_avg = averaged_cov(&v_out, policy, params, Party::Receiver)?;
    let v_eve_avg = averaged_cov(&v_eve, policy, params, Party::Eavesdropper)?;
    Ok(ClosedFormCovariances { v_out, v_eve, v_out_avg, v_eve_avg })
}

/// The four closed-form symplectic spectra of the two-use channel.
#[derive(Debug, Clone)]
pub struct ClosedFormSpectra {
    pub lambda_out: SymplecticSpectrum,
    pub lambda_eve: SymplecticSpectrum,
    pub lambda_out_avg: SymplecticSpectrum,
    pub lambda_eve_avg: SymplecticSpectrum,
}

/// Evaluates the four closed-form eigenvalue expressions of the
/// two-use channel; each spectrum is doubly degenerate.
pub fn closed_form_spectra(policy: &InputPolicy, params: &ChannelParams) -> Result<ClosedFormSpectra> {
    if params.n_uses() != 2 {
        return Err(Error::ClosedFormUnsupported { n_uses: params.n_uses() });
    }
    let eta = params.eta();
    let (r, s, n) = (policy.r(), params.s(), policy.n());
    let mix = 2.0 * eta * (1.0 - eta);
    let cond = 0.5 * (1.0 - mix + mix * (2.0 * (r - s)).cosh()).sqrt();
    let avg_common = mix * ((2.0 * (r - s)).cosh() + n * (2.0 * s).cosh() - 1.0);
    let disp = n * n + 2.0 * n * (2.0 * r).cosh();
    let out_avg = 0.5 * (1.0 + eta * eta * disp + avg_common).sqrt();
    let eve_avg = 0.5 * (1.0 + (1.0 - eta) * (1.0 - eta) * disp + avg_common).sqrt();
    let pair = |nu: f64| SymplecticSpectrum::from_sorted(vec![nu, nu]);
    Ok(ClosedFormSpectra {
        lambda_out: pair(cond),
        lambda_eve: pair(cond),
        lambda_out_avg: pair(out_avg),
        lambda_eve_avg: pair(eve_avg),
    })
}
