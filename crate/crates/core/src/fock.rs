//! Brute-force verification of the Gaussian pipeline in a truncated Fock
//! basis.
//!
//! The two-use channel is simulated exactly (up to the cutoff) as pure-state
//! evolution of signal (x) environment: displacements act on the vacuum,
//! then the two-mode input squeezer, then one beam-splitter unitary per use
//! pair. Reduced density matrices of the two kept modes are formed only at
//! measurement time and entropies come from dense Hermitian diagonalization,
//! entirely independent of the symplectic machinery this module checks.
//!
//! Truncation is measured, not assumed: every constructed state carries its
//! norm deficit, and the ensemble average refuses nodes whose weighted
//! deficit could leak into the Holevo quantities.
//!
//! Operator conventions match the covariance pipeline: the beam splitter
//! realizes the Heisenberg map `a -> sqrt(eta) a - sqrt(1-eta) b`,
//! `b -> sqrt(1-eta) a + sqrt(eta) b`, so marginal means come out as
//! `sqrt(eta) mu` (receiver) and `+sqrt(1-eta) mu` (eavesdropper), exactly
//! as in the marginal Wigner forms. The squeezers carry the generator
//! coefficient that reproduces the `cosh 2r` covariance blocks; the ensemble
//! driver maps a Wigner-center displacement `mu` to the physical amplitudes
//! `beta = S(-r) mu / sqrt(2)` before building the input, and the
//! moment-matching tests pin both conventions against the covariance
//! pipeline.

use nalgebra::{Complex, DMatrix, DVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{ChannelParams, InputPolicy, Party};
use crate::gauss::symmetric_multimode_squeeze_symplectic;
use crate::{Error, Result};

type C64 = Complex<f64>;

/// Declared oracle regime: outside these limits `ensemble_chi` refuses
/// rather than returning unconverged numbers.
pub const ORACLE_MAX_N_EFF: f64 = 0.75;
pub const ORACLE_MAX_SQUEEZE: f64 = 0.5;
pub const ORACLE_CUTOFF_RANGE: (usize, usize) = (10, 16);

/// Default norm-deficit gate for directly built states.
pub const DEFAULT_TRUNC_TOL: f64 = 1e-6;

/// Quadrature nodes lighter than this are pruned.
const WEIGHT_PRUNE: f64 = 1e-12;
/// Total pruned quadrature mass must stay below this.
const WEIGHT_DEFICIT_TOL: f64 = 1e-8;
/// Per-node gate on weight x deficit, bounding truncation leakage into chi.
const NODE_LEAK_TOL: f64 = 1e-8;
/// Reduced-density eigenvalues may undershoot zero by at most this.
const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Quadrature-weighted mu-variation allowed in the conditional entropies.
const MU_INDEPENDENCE_TOL: f64 = 1e-4;

/// Dense amplitude vector over a truncated multimode number basis.
///
/// Index order is row-major over `(a_1, a_2)` for two modes and
/// `(a_1, a_2, b_1, b_2)` for four. Amplitudes are normalized; the norm lost
/// to the cutoff during construction is tracked in `norm_deficit`.
#[derive(Debug, Clone)]
pub struct FockState {
    amps: DVector<C64>,
    n_modes: usize,
    cutoff: usize,
    norm_deficit: f64,
}

impl FockState {
    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `1 - <psi|psi>` accumulated against the untruncated construction.
    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }
}

/// Hermitian reduced density matrix of two modes (`D^2 x D^2`).
#[derive(Debug, Clone)]
pub struct DensityBlock {
    m: DMatrix<C64>,
    trace_deficit: f64,
}

impl DensityBlock {
    fn new(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        let mut max_dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if max_dev > 1e-12 {
            return Err(Error::NotSymmetric { max_asymmetry: max_dev });
        }
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        Ok(Self { m, trace_deficit: 1.0 - trace })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Eigenvalues of the density matrix, health-checked against
    /// significantly negative values.
    ///
    /// Signed eigenvalues are recovered from the singular value
    /// decomposition (`lambda_j = sigma_j * sign(u_j^H v_j)` for a Hermitian
    /// matrix); nalgebra's Hermitian eigensolvers return non-finite values
    /// on the highly rank-deficient densities this oracle produces, while
    /// the bidiagonalization route stays stable.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.m.nrows();
        let svd = self.m.clone().svd(true, true);
        let u = svd.u.as_ref().expect("svd computed with vectors");
        let v_t = svd.v_t.as_ref().expect("svd computed with vectors");
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let sign: C64 = u.column(j).dotc(&v_t.row(j).adjoint());
            let p = svd.singular_values[j] * sign.re.signum();
            if p < EIGENVALUE_FLOOR {
                return Err(Error::NumericalHealth { what: "density-matrix eigenvalue", value: p });
            }
            out.push(p.max(0.0));
        }
        Ok(out)
    }

    /// Von Neumann entropy `-sum p log2 p` in bits, with `0 log 0 = 0`.
    pub fn entropy_bits(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum())
    }
}

/// Coherent-state amplitudes `e^{-|b|^2/2} b^n / sqrt(n!)` by recurrence.
fn coherent_column(d: usize, beta: C64) -> DVector<C64> {
    let mut amps = DVector::zeros(d);
    let mut a = C64::new((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..d {
        amps[n] = a;
        a *= beta / C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    amps
}

/// Generator of the two-mode squeezer `xi (a^+ b^+ - a b)` in the truncated
/// pair basis (real antisymmetric).
fn two_mode_squeeze_generator(d: usize, xi: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(d * d, d * d);
    for n1 in 0..d - 1 {
        for n2 in 0..d - 1 {
            let amp = xi * (((n1 + 1) * (n2 + 1)) as f64).sqrt();
            g[((n1 + 1) * d + n2 + 1, n1 * d + n2)] += amp;
            g[(n1 * d + n2, (n1 + 1) * d + n2 + 1)] -= amp;
        }
    }
    g
}

/// Generator of the beam splitter `theta (a^+ b - a b^+)` in the truncated
/// pair basis (real antisymmetric, photon-number conserving).
fn beam_splitter_generator(d: usize, theta: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(d * d, d * d);
    for n1 in 0..d - 1 {
        for n2 in 1..d {
            let amp = theta * (((n1 + 1) * n2) as f64).sqrt();
            g[((n1 + 1) * d + n2 - 1, n1 * d + n2)] += amp;
            g[(n1 * d + n2, (n1 + 1) * d + n2 - 1)] -= amp;
        }
    }
    g
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Two-mode input amplitudes; the displacements act on the vacuum first,
/// then the squeezer. Returns the (normalized)
/// vector and the measured norm deficit.
fn input_vector(s_in: &DMatrix<C64>, d: usize, mu1: C64, mu2: C64) -> (DVector<C64>, f64) {
    let c1 = coherent_column(d, mu1);
    let c2 = coherent_column(d, mu2);
    let mut product = DVector::zeros(d * d);
    for n1 in 0..d {
        for n2 in 0..d {
            product[n1 * d + n2] = c1[n1] * c2[n2];
        }
    }
    let mut psi = s_in * product;
    let deficit = 1.0 - psi.norm_squared();
    let norm = psi.norm();
    if norm > 0.0 {
        psi /= C64::new(norm, 0.0);
    }
    (psi, deficit)
}

/// Builds the two-mode input state `S(r) D(mu2) D(mu1) |00>` at cutoff `d`,
/// rejecting it when the measured norm deficit exceeds `trunc_tol`
/// (pass [`DEFAULT_TRUNC_TOL`] for the standard gate).
pub fn build_input(mu1: C64, mu2: C64, r: f64, d: usize, trunc_tol: f64) -> Result<FockState> {
    if d < 2 {
        return Err(Error::CutoffDim { d, min: 2 });
    }
    if !r.is_finite() {
        return Err(Error::NonFinite { name: "entanglement parameter r", value: r });
    }
    let s_in = to_complex(&two_mode_squeeze_generator(d, r).exp());
    let (amps, deficit) = input_vector(&s_in, d, mu1, mu2);
    if deficit > trunc_tol {
        return Err(Error::CutoffTooSmall { deficit, tol: trunc_tol });
    }
    Ok(FockState { amps, n_modes: 2, cutoff: d, norm_deficit: deficit })
}

/// Precomputed channel operators for a fixed `(s, eta, d)`.
struct ChannelOps {
    d: usize,
    /// Beam splitter on one (signal, environment) pair.
    u_bs: DMatrix<C64>,
    /// Environment amplitudes `S(s)|00>`, normalized.
    env: DVector<C64>,
    env_deficit: f64,
}

impl ChannelOps {
    fn new(s: f64, eta: f64, d: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
            return Err(Error::EtaRange { eta });
        }
        if !s.is_finite() {
            return Err(Error::NonFinite { name: "memory parameter s", value: s });
        }
        // U^+ a U = cos(theta) a + sin(theta) b with theta = -acos(sqrt(eta))
        // realizes a -> sqrt(eta) a - sqrt(1-eta) b.
        let theta = -eta.sqrt().clamp(-1.0, 1.0).acos();
        let u_bs = to_complex(&beam_splitter_generator(d, theta).exp());
        let s_env = two_mode_squeeze_generator(d, s).exp();
        let mut env: DVector<C64> = DVector::zeros(d * d);
        for (i, v) in s_env.column(0).iter().enumerate() {
            env[i] = C64::new(*v, 0.0);
        }
        let env_deficit = 1.0 - env.norm_squared();
        let norm = env.norm();
        env /= C64::new(norm, 0.0);
        Ok(Self { d, u_bs, env, env_deficit })
    }

    /// Tensors a two-mode input with the environment and applies the two
    /// beam splitters, returning the output as the `(a_1 a_2) x (b_1 b_2)`
    /// matrix whose singular values are the Schmidt spectrum of the
    /// receiver/eavesdropper bipartition.
    ///
    /// Internally the state is held as a `(a_1 b_1) x (a_2 b_2)` matrix so
    /// both pair unitaries are plain matrix products.
    fn apply_to_matrix(&self, input: &DVector<C64>) -> DMatrix<C64> {
        let d = self.d;
        let mut psi = DMatrix::<C64>::zeros(d * d, d * d);
        for na1 in 0..d {
            for na2 in 0..d {
                let in_amp = input[na1 * d + na2];
                if in_amp == C64::new(0.0, 0.0) {
                    continue;
                }
                for nb1 in 0..d {
                    for nb2 in 0..d {
                        let env_amp = self.env[nb1 * d + nb2];
                        if env_amp != C64::new(0.0, 0.0) {
                            psi[(na1 * d + nb1, na2 * d + nb2)] = in_amp * env_amp;
                        }
                    }
                }
            }
        }
        let psi = &self.u_bs * psi * self.u_bs.transpose();
        let mut m = DMatrix::zeros(d * d, d * d);
        for na1 in 0..d {
            for nb1 in 0..d {
                for na2 in 0..d {
                    for nb2 in 0..d {
                        m[(na1 * d + na2, nb1 * d + nb2)] = psi[(na1 * d + nb1, na2 * d + nb2)];
                    }
                }
            }
        }
        m
    }

    /// As [`Self::apply_to_matrix`], flattened into canonical
    /// `(a_1, a_2, b_1, b_2)` amplitude order.
    fn apply(&self, input: &DVector<C64>) -> DVector<C64> {
        let d = self.d;
        let m = self.apply_to_matrix(input);
        let mut amps = DVector::zeros(d * d * d * d);
        for row in 0..d * d {
            for col in 0..d * d {
                amps[row * d * d + col] = m[(row, col)];
            }
        }
        amps
    }
}

/// Tensors the input with the squeezed environment `S(s)|00>` and applies
/// the beam-splitter coupling of transmissivity `eta` on each use pair.
pub fn apply_channel(input: &FockState, s: f64, eta: f64, d: usize) -> Result<FockState> {
    if input.n_modes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: input.n_modes });
    }
    if input.cutoff != d {
        return Err(Error::DimensionMismatch { expected: d, got: input.cutoff });
    }
    let ops = ChannelOps::new(s, eta, d)?;
    let amps = ops.apply(&input.amps);
    // the beam splitter conserves photon number, so no new deficit appears
    let deficit = 1.0 - (1.0 - input.norm_deficit) * (1.0 - ops.env_deficit);
    Ok(FockState { amps, n_modes: 4, cutoff: d, norm_deficit: deficit })
}

/// Reduced two-mode density matrix of one party of a four-mode state.
pub fn reduced_density(state: &FockState, party: Party) -> Result<DensityBlock> {
    if state.n_modes != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: state.n_modes });
    }
    let d = state.cutoff;
    // canonical order makes the (a_1 a_2) x (b_1 b_2) reshape a plain copy
    let m = DMatrix::from_fn(d * d, d * d, |row, col| state.amps[row * d * d + col]);
    let rho = match party {
        Party::Receiver => &m * m.adjoint(),
        Party::Eavesdropper => m.adjoint() * &m,
    };
    DensityBlock::new(rho)
}

/// Entropy in bits of the party's reduced state.
pub fn reduced_entropy(state: &FockState, party: Party) -> Result<f64> {
    reduced_density(state, party)?.entropy_bits()
}

/// Applies the annihilation operator of `mode` (0-based, canonical order).
fn annihilate(state: &FockState, mode: usize) -> DVector<C64> {
    let d = state.cutoff;
    let n_modes = state.n_modes;
    let stride = d.pow((n_modes - 1 - mode) as u32);
    let mut out = DVector::zeros(state.amps.len());
    for idx in 0..state.amps.len() {
        let n = (idx / stride) % d;
        if n > 0 {
            out[idx - stride] += C64::new((n as f64).sqrt(), 0.0) * state.amps[idx];
        }
    }
    out
}

/// First and symmetrized second quadrature moments of a Fock state, in the
/// `(q_1..q_n, p_1..p_n)` ordering of the covariance pipeline.
pub fn quadrature_moments(state: &FockState) -> (DVector<f64>, DMatrix<f64>) {
    let n = state.n_modes;
    let lowered: Vec<DVector<C64>> = (0..n).map(|m| annihilate(state, m)).collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut mean = DVector::zeros(2 * n);
    for m in 0..n {
        let a_exp = state.amps.dotc(&lowered[m]);
        mean[m] = sqrt2 * a_exp.re;
        mean[n + m] = sqrt2 * a_exp.im;
    }
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // z = <a_i a_j>, w = <a_i^+ a_j>
            let z = state.amps.dotc(&annihilate(
                &FockState {
                    amps: lowered[j].clone(),
                    n_modes: n,
                    cutoff: state.cutoff,
                    norm_deficit: 0.0,
                },
                i,
            ));
            let w = lowered[i].dotc(&lowered[j]);
            let delta = if i == j { 0.5 } else { 0.0 };
            let qq = z.re + w.re + delta - mean[i] * mean[j];
            let pp = -z.re + w.re + delta - mean[n + i] * mean[n + j];
            let qp = z.im + w.im - mean[i] * mean[n + j];
            cov[(i, j)] = qq;
            cov[(n + i, n + j)] = pp;
            cov[(i, n + j)] = qp;
            cov[(n + j, i)] = qp;
        }
    }
    // symmetrize the qp block pairs accumulated from both orders
    let sym = (&cov + cov.transpose()) * 0.5;
    (mean, sym)
}

/// Tensor-product Gauss-Hermite rule over the four real displacement
/// components, already rescaled to the `N/2`-variance Gaussian weight of the
/// ensemble. Produced by Golub-Welsch on the Hermite Jacobi matrix.
fn hermite_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(order, order);
    for k in 0..order - 1 {
        let off = ((k + 1) as f64 / 2.0).sqrt();
        jac[(k, k + 1)] = off;
        jac[(k + 1, k)] = off;
    }
    let eig = jac.symmetric_eigen();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            // physicists' weight: sqrt(pi) times the squared first
            // eigenvector component
            (eig.eigenvalues[i], sqrt_pi * eig.eigenvectors[(0, i)].powi(2))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut w: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    // enforce the exact +/- symmetry of the rule (the eigensolver leaves
    // ~1e-16 asymmetries; the parity pairing of the ensemble relies on it)
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let node = 0.5 * (x[j] - x[i]);
        x[i] = -node;
        x[j] = node;
        let weight = 0.5 * (w[i] + w[j]);
        w[i] = weight;
        w[j] = weight;
    }
    if order % 2 == 1 {
        x[order / 2] = 0.0;
    }
    (x, w)
}

/// Convergence and health diagnostics of one ensemble evaluation.
#[derive(Debug, Clone)]
pub struct OracleDiagnostics {
    /// Quadrature nodes kept after pruning.
    pub nodes_kept: usize,
    /// Nodes actually evolved (the parity pairing halves the work).
    pub nodes_evolved: usize,
    pub nodes_pruned: usize,
    /// Kept quadrature mass; its deficit from 1 is gated at 1e-8.
    pub weight_sum: f64,
    pub max_norm_deficit: f64,
    pub weighted_norm_deficit: f64,
    /// Raw min-to-max spread of the conditional entropies over nodes.
    pub cond_entropy_spread: f64,
    /// Quadrature-weighted deviation of the conditional entropies from the
    /// central node; this is the mu-dependence that could leak into chi.
    pub cond_entropy_weighted_dev: f64,
    /// Largest per-node deviation of the Schmidt-spectrum mass from 1.
    pub max_trace_gap: f64,
}

/// Holevo quantities from the Fock-basis ensemble average.
#[derive(Debug, Clone)]
pub struct EnsembleChi {
    pub chi_out: f64,
    pub chi_eve: f64,
    /// `(chi_out - chi_eve) / 2` for the two-use oracle.
    pub i_p: f64,
    pub diagnostics: OracleDiagnostics,
}

fn check_oracle_regime(policy: &InputPolicy, params: &ChannelParams, d: usize, quad_order: usize) -> Result<()> {
    let refuse = |limit: String| Err(Error::OracleRegime { limit });
    if params.n_uses() != 2 {
        return refuse(format!("oracle supports 2 uses, got n_uses = {}", params.n_uses()));
    }
    if policy.n_eff() > ORACLE_MAX_N_EFF {
        return refuse(format!("N_eff = {} exceeds {ORACLE_MAX_N_EFF}", policy.n_eff()));
    }
    if policy.r().abs() > ORACLE_MAX_SQUEEZE {
        return refuse(format!("|r| = {} exceeds {ORACLE_MAX_SQUEEZE}", policy.r().abs()));
    }
    if params.s().abs() > ORACLE_MAX_SQUEEZE {
        return refuse(format!("|s| = {} exceeds {ORACLE_MAX_SQUEEZE}", params.s().abs()));
    }
    let (lo, hi) = ORACLE_CUTOFF_RANGE;
    if d < lo || d > hi {
        return refuse(format!("cutoff D = {d} outside [{lo}, {hi}]"));
    }
    if quad_order < 5 || quad_order.is_multiple_of(2) {
        return refuse(format!("quadrature order {quad_order} must be odd and >= 5"));
    }
    Ok(())
}

/// One evolved node (or parity pair) of the ensemble.
struct NodeAccum {
    rho_out: DMatrix<C64>,
    rho_eve: DMatrix<C64>,
    s_cond_weighted: f64,
    weight: f64,
    s_cond: f64,
    deficit: f64,
    trace_gap: f64,
}

/// Approximates the ensemble Holevo quantities by tensor Gauss-Hermite
/// quadrature over the displacement distribution (variance `N/2` per real
/// component) and dense diagonalization of the averaged reduced states.
///
/// Nodes come in `+/-mu` pairs related by a parity unitary, so each pair is
/// evolved once and mirrored; the reduction over nodes is performed in a
/// fixed order, independent of any concurrent evaluation.
pub fn ensemble_chi(
    policy: &InputPolicy,
    params: &ChannelParams,
    d: usize,
    quad_order: usize,
) -> Result<EnsembleChi> {
    check_oracle_regime(policy, params, d, quad_order)?;
    let ops = ChannelOps::new(params.s(), params.eta(), d)?;
    let s_in = to_complex(&two_mode_squeeze_generator(d, policy.r()).exp());
    // Wigner-center label mu -> physical displacement beta = S(-r) mu / sqrt(2)
    let s_inv = symmetric_multimode_squeeze_symplectic(-policy.r(), 2)?;

    let n = policy.n();
    // (mu components, weight, self-paired); the center node is listed first
    let mut pairs: Vec<([f64; 4], f64, bool)> = Vec::new();
    let mut pruned = 0usize;
    let mut kept = 0usize;
    let mut weight_sum = 0.0;
    if n <= 0.0 {
        pairs.push(([0.0; 4], 1.0, true));
        kept = 1;
        weight_sum = 1.0;
    } else {
        let (x, w) = hermite_rule(quad_order);
        let scale = n.sqrt();
        let norm = std::f64::consts::PI.sqrt();
        let q = quad_order;
        for c0 in 0..q {
            for c1 in 0..q {
                for c2 in 0..q {
                    for c3 in 0..q {
                        let weight =
                            (w[c0] / norm) * (w[c1] / norm) * (w[c2] / norm) * (w[c3] / norm);
                        if weight < WEIGHT_PRUNE {
                            pruned += 1;
                            continue;
                        }
                        kept += 1;
                        weight_sum += weight;
                        // keep one representative per +/- pair
                        let c = [c0, c1, c2, c3];
                        let mirror = [q - 1 - c0, q - 1 - c1, q - 1 - c2, q - 1 - c3];
                        if c > mirror {
                            continue;
                        }
                        let mu = [scale * x[c0], scale * x[c1], scale * x[c2], scale * x[c3]];
                        pairs.push((mu, weight, c == mirror));
                    }
                }
            }
        }
        let deficit = (1.0 - weight_sum).abs();
        if deficit > WEIGHT_DEFICIT_TOL {
            return Err(Error::QuadratureWeightDeficit { deficit });
        }
        // center node first for the reference conditional entropy
        pairs.sort_by(|a, b| {
            let ra: f64 = a.0.iter().map(|v| v * v).sum();
            let rb: f64 = b.0.iter().map(|v| v * v).sum();
            ra.total_cmp(&rb)
        });
    }

    let dd = d * d;
    let parity: Vec<f64> = (0..dd).map(|row| if (row / d + row % d).is_multiple_of(2) { 1.0 } else { -1.0 }).collect();
    let evolve = |&(mu, weight, self_paired): &([f64; 4], f64, bool)| -> Result<NodeAccum> {
        let mu_vec = DVector::from_row_slice(&mu);
        let beta = (&s_inv * mu_vec) / std::f64::consts::SQRT_2;
        let b1 = C64::new(beta[0], beta[2]);
        let b2 = C64::new(beta[1], beta[3]);
        let (input, deficit) = input_vector(&s_in, d, b1, b2);
        let pair_weight = if self_paired { weight } else { 2.0 * weight };
        if pair_weight * deficit > NODE_LEAK_TOL {
            return Err(Error::CutoffTooSmall { deficit, tol: NODE_LEAK_TOL / pair_weight });
        }
        let m = ops.apply_to_matrix(&input);
        // the joint state is pure by construction, so receiver and
        // eavesdropper share the Schmidt spectrum sigma^2; the independent
        // two-sided diagonalization check lives in `reduced_entropy` tests
        let sv = m.clone().singular_values();
        let mut trace = 0.0;
        let mut s_cond = 0.0;
        for sigma in sv.iter() {
            let p = sigma * sigma;
            trace += p;
            if p > 0.0 {
                s_cond -= p * p.log2();
            }
        }
        let mut out_m = &m * m.adjoint();
        let mut eve_m = m.adjoint() * &m;
        if !self_paired {
            // rho(-mu) = P rho(mu) P with P the two-mode parity
            let mirror = |m: &DMatrix<C64>| {
                DMatrix::from_fn(dd, dd, |i, j| m[(i, j)] * parity[i] * parity[j])
            };
            out_m = &out_m + mirror(&out_m);
            eve_m = &eve_m + mirror(&eve_m);
            out_m *= C64::new(0.5, 0.0);
            eve_m *= C64::new(0.5, 0.0);
        }
        Ok(NodeAccum {
            rho_out: out_m * C64::new(pair_weight, 0.0),
            rho_eve: eve_m * C64::new(pair_weight, 0.0),
            s_cond_weighted: pair_weight * s_cond,
            weight: pair_weight,
            s_cond,
            deficit,
            trace_gap: (trace - 1.0).abs(),
        })
    };

    // evolve in parallel chunks but reduce in a fixed order
    #[cfg(feature = "parallel")]
    let node_results: Result<Vec<Vec<NodeAccum>>> = pairs
        .chunks(16)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|chunk| chunk.iter().map(evolve).collect::<Result<Vec<_>>>())
        .collect();
    #[cfg(not(feature = "parallel"))]
    let node_results: Result<Vec<Vec<NodeAccum>>> =
        pairs.chunks(16).map(|chunk| chunk.iter().map(evolve).collect()).collect();

    let mut rho_out_avg = DMatrix::<C64>::zeros(dd, dd);
    let mut rho_eve_avg = DMatrix::<C64>::zeros(dd, dd);
    let mut s_cond_avg = 0.0;
    let mut s_ref = None;
    let mut spread = (f64::INFINITY, f64::NEG_INFINITY);
    let mut weighted_dev = 0.0;
    let mut max_deficit = 0.0f64;
    let mut weighted_deficit = 0.0;
    let mut max_trace_gap = 0.0f64;
    let mut evolved = 0usize;
    for node in node_results?.into_iter().flatten() {
        rho_out_avg += node.rho_out;
        rho_eve_avg += node.rho_eve;
        s_cond_avg += node.s_cond_weighted;
        let reference = *s_ref.get_or_insert(node.s_cond);
        spread = (spread.0.min(node.s_cond), spread.1.max(node.s_cond));
        weighted_dev += node.weight * (node.s_cond - reference).abs();
        max_deficit = max_deficit.max(node.deficit);
        weighted_deficit += node.weight * node.deficit;
        max_trace_gap = max_trace_gap.max(node.trace_gap);
        evolved += 1;
    }
    if weighted_dev > MU_INDEPENDENCE_TOL {
        return Err(Error::NumericalHealth {
            what: "mu-dependence of conditional entropy (weighted)",
            value: weighted_dev,
        });
    }

    let inv = C64::new(1.0 / weight_sum, 0.0);
    let s_bar_out = DensityBlock::new(rho_out_avg * inv)?.entropy_bits()?;
    let s_bar_eve = DensityBlock::new(rho_eve_avg * inv)?.entropy_bits()?;
    let chi_out = s_bar_out - s_cond_avg / weight_sum;
    let chi_eve = s_bar_eve - s_cond_avg / weight_sum;
    Ok(EnsembleChi {
        chi_out,
        chi_eve,
        i_p: 0.5 * (chi_out - chi_eve),
        diagnostics: OracleDiagnostics {
            nodes_kept: kept,
            nodes_evolved: evolved,
            nodes_pruned: pruned,
            weight_sum,
            max_norm_deficit: max_deficit,
            weighted_norm_deficit: weighted_deficit,
            cond_entropy_spread: spread.1 - spread.0,
            cond_entropy_weighted_dev: weighted_dev,
            max_trace_gap,
        },
    })
}

/// Side-by-side Gaussian-pipeline vs Fock-oracle values; disagreements are
/// data, not exceptions.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub gaussian_chi_out: f64,
    pub gaussian_chi_eve: f64,
    pub gaussian_i_p: f64,
    pub oracle: EnsembleChi,
    pub delta_chi_out: f64,
    pub delta_chi_eve: f64,
    pub delta_i_p: f64,
}

/// Runs both pipelines at the same parameters and reports the differences
/// together with the oracle's truncation diagnostics.
pub fn compare_report(
    policy: &InputPolicy,
    params: &ChannelParams,
    d: usize,
    quad_order: usize,
) -> Result<CompareReport> {
    let gauss = crate::privacy::private_information(policy, params)?;
    let oracle = ensemble_chi(policy, params, d, quad_order)?;
    Ok(CompareReport {
        gaussian_chi_out: gauss.chi_out,
        gaussian_chi_eve: gauss.chi_eve,
        gaussian_i_p: gauss.i_p,
        delta_chi_out: (gauss.chi_out - oracle.chi_out).abs(),
        delta_chi_eve: (gauss.chi_eve - oracle.chi_eve).abs(),
        delta_i_p: (gauss.i_p - oracle.i_p).abs(),
        oracle,
    })
}
