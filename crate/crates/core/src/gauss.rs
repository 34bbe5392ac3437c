//! Symplectic linear algebra and Gaussian-state entropy primitives.
//!
//! Everything here is expressed in the `(q_1..q_n, p_1..p_n)` quadrature
//! ordering with vacuum variance 1/2 per quadrature. In this ordering the
//! symplectic form is `Omega = [[0, I_n], [-I_n, 0]]`, and a Wigner exponent
//! `exp[-u A u^T]` corresponds to the covariance `V = A^{-1} / 2`.

use nalgebra::{DMatrix, Matrix4};

use crate::{Error, Result};

/// Rounding slack below the uncertainty bound `nu >= 1/2` that still counts
/// as physical; anything lower is an error, not noise.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Maximum asymmetry accepted (and symmetrized away) when building a
/// covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Clamp window for `g_entropy` arguments that are negative by rounding only.
pub const G_CLAMP_TOL: f64 = 1e-12;

/// Quadrature bookkeeping for an `n`-mode system in the fixed
/// `(q_1..q_n, p_1..p_n)` ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadOrder {
    n_modes: usize,
}

impl QuadOrder {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::ModeCount { n: 0, min: 1 });
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Length of a quadrature vector: `2 * n_modes`.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    /// Index of `q_k` (0-based mode index).
    pub fn q_index(&self, mode: usize) -> usize {
        debug_assert!(mode < self.n_modes);
        mode
    }

    /// Index of `p_k` (0-based mode index).
    pub fn p_index(&self, mode: usize) -> usize {
        debug_assert!(mode < self.n_modes);
        self.n_modes + mode
    }

    /// The symplectic form `Omega = [[0, I], [-I, 0]]` in this ordering.
    pub fn symplectic_form(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            omega[(k, n + k)] = 1.0;
            omega[(n + k, k)] = -1.0;
        }
        omega
    }
}

/// Real symmetric covariance matrix of an `n`-mode Gaussian state,
/// symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

impl CovMatrix {
    /// Builds from a square, even-dimensional matrix that is symmetric to
    /// within [`SYMMETRY_TOL`]; the stored matrix is `(M + M^T) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::OddDimension { dim: m.nrows() });
        }
        let mut max_asym = 0.0f64;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                max_asym = max_asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { max_asymmetry: max_asym });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn n_modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn order(&self) -> QuadOrder {
        QuadOrder { n_modes: self.n_modes() }
    }

    /// Checks the uncertainty bound `nu_j >= 1/2 - UNCERTAINTY_TOL` on every
    /// symplectic eigenvalue, returning the spectrum on success.
    pub fn assert_physical(&self) -> Result<SymplecticSpectrum> {
        let spec = symplectic_eigenvalues(self)?;
        for &nu in spec.values() {
            if nu < 0.5 - UNCERTAINTY_TOL {
                return Err(Error::BelowUncertainty { nu });
            }
        }
        Ok(spec)
    }
}

/// The 4x4 squeeze exponent matrix of a two-mode squeezed pair: q-block
/// `[[cosh 2r, -sinh 2r], [-sinh 2r, cosh 2r]]`, p-block with `+sinh 2r`,
/// zero off-blocks. The same structure serves the input (parameter `r`) and
/// the environment (parameter `s`).
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeMatrix {
    param: f64,
    m: Matrix4<f64>,
}

impl SqueezeMatrix {
    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    /// Closed-form inverse: `A_r^{-1} = A_{-r}` (from `cosh^2 - sinh^2 = 1`).
    pub fn inverse(&self) -> SqueezeMatrix {
        build_squeeze_exponent(-self.param).expect("negated finite param is finite")
    }
}

/// Builds the squeeze exponent matrix `A_param`.
pub fn build_squeeze_exponent(param: f64) -> Result<SqueezeMatrix> {
    if !param.is_finite() {
        return Err(Error::NonFinite { name: "squeeze parameter", value: param });
    }
    let c = (2.0 * param).cosh();
    let s = (2.0 * param).sinh();
    #[rustfmt::skip]
    let m = Matrix4::new(
         c, -s, 0.0, 0.0,
        -s,  c, 0.0, 0.0,
        0.0, 0.0, c,  s,
        0.0, 0.0, s,  c,
    );
    Ok(SqueezeMatrix { param, m })
}

/// Converts a Wigner exponent matrix to a covariance: `V = A^{-1} / 2`.
///
/// Uses the closed-form inverse `A_{-r}` (exact for every finite parameter,
/// where `det A_r = 1` rules out singularity); a generic linear solver
/// serves as the independent check in tests. The closed form matters
/// numerically: the generic 4x4 inverse loses ~7 digits by `|r| = 3`.
pub fn cov_from_exponent(a: &SqueezeMatrix) -> Result<CovMatrix> {
    if !a.param.is_finite() {
        return Err(Error::SingularExponent);
    }
    let inv = a.inverse();
    CovMatrix::new(DMatrix::from_iterator(4, 4, (inv.m * 0.5).iter().copied()))
}

/// Symplectic eigenvalues of a covariance matrix, one per mode, sorted
/// descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    /// Wraps precomputed eigenvalues, sorting them descending.
    pub fn from_sorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computes the symplectic spectrum of `v`: the moduli of the eigenvalues
/// of `Omega * V`, which occur in +/- pairs; one representative per pair,
/// sorted descending.
///
/// This is the generic route, valid for any mode count; the two-use
/// closed forms are kept in the channel module as cross-checks. The moduli
/// are extracted through the similar antisymmetric matrix
/// `K = V^{1/2} Omega V^{1/2}` (eigenvalues of `K^T K` are the squared
/// moduli, doubled), which keeps every eigenproblem symmetric. The direct
/// Schur factorization of `Omega V` loses ~7 digits on the doubly
/// degenerate spectra this channel produces.
pub fn symplectic_eigenvalues(v: &CovMatrix) -> Result<SymplecticSpectrum> {
    let eig = v.m.clone().symmetric_eigen();
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { eigenvalue: min });
        }
    }
    let root_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l: f64| l.sqrt()));
    let root = &eig.eigenvectors * root_diag * eig.eigenvectors.transpose();
    let omega = v.order().symplectic_form();
    let k = &root * omega * &root;
    let mut squared: Vec<f64> = (k.transpose() * &k).symmetric_eigenvalues().iter().copied().collect();
    squared.sort_by(|a, b| b.total_cmp(a));
    // singular values of the antisymmetric K come doubled
    let values = squared
        .chunks_exact(2)
        .map(|p| (0.5 * (p[0].max(0.0) + p[1].max(0.0))).sqrt())
        .collect();
    Ok(SymplecticSpectrum { values })
}

/// The bosonic entropy function `g(x) = (x+1) log2(x+1) - x log2 x` in bits,
/// the entropy of a thermal mode with mean occupation `x`.
///
/// Arguments in `[-1e-12, 0)` are clamped to 0 (rounding); below that the
/// covariance violated the uncertainty bound and this is an error.
pub fn g_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { name: "g argument", value: x });
    }
    if x < -G_CLAMP_TOL {
        return Err(Error::EntropyDomain { x });
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    // log1p form avoids cancellation for small x.
    Ok(((x + 1.0) * x.ln_1p() - x * x.ln()) / std::f64::consts::LN_2)
}

/// Von Neumann entropy in bits from a physical symplectic spectrum:
/// `S = sum_j g(nu_j - 1/2)`.
pub fn spectrum_entropy(spec: &SymplecticSpectrum) -> Result<f64> {
    let mut total = 0.0;
    for &nu in spec.values() {
        if nu < 0.5 - UNCERTAINTY_TOL {
            return Err(Error::BelowUncertainty { nu });
        }
        // physical gate allows nu down to 1/2 - 1e-9; clamp that slack
        total += g_entropy((nu - 0.5).max(0.0))?;
    }
    Ok(total)
}

/// Von Neumann entropy of a Gaussian state in bits:
/// `S = sum_j g(nu_j - 1/2)` over the symplectic spectrum.
pub fn gaussian_entropy(v: &CovMatrix) -> Result<f64> {
    spectrum_entropy(&v.assert_physical()?)
}

/// Symplectic matrix of the symmetric multimode squeezer
/// `exp[(s/2) * sum_{k != k'} (b_k^dag b_k'^dag - b_k b_k')]` on `n` modes.
///
/// The quadratic generator in the quadrature picture is
/// `K = [[C, 0], [0, -C]]` with `C = ones(n) - I`, so the result is
/// `M = [[exp(sC), 0], [0, exp(-sC)]]`, computed through the symmetric
/// eigendecomposition of `C`. For `n = 2` the induced vacuum covariance
/// equals `A_{-s} / 2`, the two-mode environment state.
pub fn symmetric_multimode_squeeze_symplectic(s: f64, n: usize) -> Result<DMatrix<f64>> {
    if !s.is_finite() {
        return Err(Error::NonFinite { name: "squeeze parameter", value: s });
    }
    if n < 2 {
        return Err(Error::ModeCount { n, min: 2 });
    }
    let mut c = DMatrix::from_element(n, n, 1.0);
    c.fill_diagonal(0.0);
    let eig = c.symmetric_eigen();
    let exp_of = |scale: f64| -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l: f64| (scale * l).exp()));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    };
    let e_plus = exp_of(s);
    let e_minus = exp_of(-s);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&e_plus);
    m.view_mut((n, n), (n, n)).copy_from(&e_minus);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // High-precision reference values, frozen from a 30-digit evaluation.
    const COSH_2: f64 = 3.762195691083631;
    const SINH_2: f64 = 3.626860407847019;
    const G_08: f64 = 1.7839369077088;

    #[test]
    fn squeeze_exponent_at_zero_is_identity() {
        let a = build_squeeze_exponent(0.0).unwrap();
        assert_eq!(a.matrix(), &Matrix4::identity());
    }

    #[test]
    fn squeeze_exponent_structure_at_one() {
        let a = build_squeeze_exponent(1.0).unwrap();
        let m = a.matrix();
        assert_abs_diff_eq!(m[(0, 0)], COSH_2, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(0, 1)], -SINH_2, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(2, 3)], SINH_2, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(3, 3)], COSH_2, epsilon = 1e-12);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(1, 3)], 0.0);
    }

    #[test]
    fn squeeze_exponent_rejects_non_finite() {
        assert!(build_squeeze_exponent(f64::NAN).is_err());
        assert!(build_squeeze_exponent(f64::INFINITY).is_err());
    }

    #[test]
    fn squeeze_inverse_identity_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r: f64 = rng.random_range(-3.0..3.0);
            let a = build_squeeze_exponent(r).unwrap();
            let prod = a.matrix() * a.inverse().matrix();
            let dev = (prod - Matrix4::identity()).abs().max();
            // cosh^2 - sinh^2 evaluates with rounding ~ eps * cosh^2, which
            // exceeds 1e-12 past |r| ~ 2.6; bound by the rounding model
            let c = (2.0 * r).cosh();
            let tol = 1e-12f64.max(4.0 * f64::EPSILON * (1.0 + c * c));
            assert!(dev < tol, "A_r * A_-r deviates by {dev:.3e} at r = {r}");
            let det_tol = 1e-12f64.max(8.0 * f64::EPSILON * (1.0 + c * c * c * c));
            assert!((a.matrix().determinant() - 1.0).abs() < det_tol);
        }
    }

    #[test]
    fn cov_from_exponent_vacuum() {
        let a = build_squeeze_exponent(0.0).unwrap();
        let v = cov_from_exponent(&a).unwrap();
        assert_eq!(v.matrix(), &(DMatrix::identity(4, 4) * 0.5));
    }

    #[test]
    fn cov_from_exponent_matches_independent_solver() {
        // closed-form route vs a generic numerical inverse
        let a = build_squeeze_exponent(1.0).unwrap();
        let v = cov_from_exponent(&a).unwrap();
        let solved = a.matrix().try_inverse().unwrap() * 0.5;
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!(v.matrix()[(i, j)], solved[(i, j)], epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(v.matrix()[(0, 0)], 0.5 * COSH_2, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(0, 0)], 1.881097845541816, epsilon = 1e-12);
    }

    #[test]
    fn cov_matrix_rejects_asymmetry() {
        let mut m = DMatrix::identity(4, 4);
        m[(0, 1)] = 1e-6;
        assert!(matches!(CovMatrix::new(m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn symplectic_eigenvalues_vacuum() {
        let v = CovMatrix::new(DMatrix::identity(4, 4) * 0.5).unwrap();
        let spec = symplectic_eigenvalues(&v).unwrap();
        assert_eq!(spec.len(), 2);
        for &nu in spec.values() {
            assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_mode_squeezed_vacuum_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let r: f64 = rng.random_range(-3.0..3.0);
            let a = build_squeeze_exponent(r).unwrap();
            let v = cov_from_exponent(&a).unwrap();
            let spec = symplectic_eigenvalues(&v).unwrap();
            for &nu in spec.values() {
                assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn symplectic_eigenvalues_reject_non_positive_definite() {
        let mut m = DMatrix::identity(4, 4) * 0.5;
        m[(3, 3)] = -0.25;
        let v = CovMatrix::new(m).unwrap();
        match symplectic_eigenvalues(&v) {
            Err(Error::NotPositiveDefinite { eigenvalue }) => {
                assert!(eigenvalue < 0.0);
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_invariant_under_symplectic_congruence() {
        // random symplectic M from multimode squeezers and beam splitters
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let r: f64 = rng.random_range(-1.5..1.5);
            let s: f64 = rng.random_range(-1.5..1.5);
            let eta: f64 = rng.random_range(0.0..1.0);
            let v0 = {
                let a = build_squeeze_exponent(r).unwrap();
                let mut m = cov_from_exponent(&a).unwrap().matrix().clone();
                m[(0, 0)] += 0.3; // classical noise on mode 1, stays physical
                m[(2, 2)] += 0.3;
                CovMatrix::new(m).unwrap()
            };
            let sq = symmetric_multimode_squeeze_symplectic(s, 2).unwrap();
            let bs = crate::channel::beam_splitter_matrix(eta, 1).unwrap();
            let m = sq * bs;
            let transformed = CovMatrix::new(&m * v0.matrix() * m.transpose()).unwrap();
            let s0 = symplectic_eigenvalues(&v0).unwrap();
            let s1 = symplectic_eigenvalues(&transformed).unwrap();
            for (a, b) in s0.values().iter().zip(s1.values()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn g_entropy_reference_values() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(g_entropy(1.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g_entropy(0.8).unwrap(), G_08, epsilon = 1e-12);
    }

    #[test]
    fn g_entropy_clamp_and_domain() {
        assert_eq!(g_entropy(-1e-13).unwrap(), 0.0);
        assert!(matches!(g_entropy(-1e-6), Err(Error::EntropyDomain { .. })));
    }

    #[test]
    fn g_entropy_monotone_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..500 {
            let x: f64 = rng.random_range(1e-6..100.0);
            let y: f64 = rng.random_range(1e-6..100.0);
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            if lo < hi {
                assert!(g_entropy(lo).unwrap() < g_entropy(hi).unwrap());
            }
        }
    }

    #[test]
    fn gaussian_entropy_pure_and_thermal() {
        let vac = CovMatrix::new(DMatrix::identity(4, 4) * 0.5).unwrap();
        assert_abs_diff_eq!(gaussian_entropy(&vac).unwrap(), 0.0, epsilon = 1e-10);
        // V with spectrum (1.3, 1.3): exactly 2 g(0.8)
        let v = CovMatrix::new(DMatrix::identity(4, 4) * 1.3).unwrap();
        assert_abs_diff_eq!(gaussian_entropy(&v).unwrap(), 2.0 * G_08, epsilon = 1e-10);
        assert_abs_diff_eq!(gaussian_entropy(&v).unwrap(), 3.5678738154176, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_entropy_pure_squeezed_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let r: f64 = rng.random_range(-2.0..2.0);
            let v = cov_from_exponent(&build_squeeze_exponent(r).unwrap()).unwrap();
            assert_abs_diff_eq!(gaussian_entropy(&v).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn multimode_squeeze_identity_at_zero() {
        for n in 2..5 {
            let m = symmetric_multimode_squeeze_symplectic(0.0, n).unwrap();
            let dev = (&m - DMatrix::identity(2 * n, 2 * n)).abs().max();
            assert!(dev < 1e-14);
        }
    }

    #[test]
    fn multimode_squeeze_rejects_single_mode() {
        assert!(matches!(
            symmetric_multimode_squeeze_symplectic(0.5, 1),
            Err(Error::ModeCount { n: 1, min: 2 })
        ));
    }

    #[test]
    fn multimode_squeeze_two_modes_matches_exponent_form() {
        // vacuum covariance M (I/2) M^T must equal cov_from_exponent(A_{0.7})
        let m = symmetric_multimode_squeeze_symplectic(0.7, 2).unwrap();
        let v = &m * DMatrix::identity(4, 4) * 0.5 * m.transpose();
        let expected = cov_from_exponent(&build_squeeze_exponent(0.7).unwrap()).unwrap();
        let dev = (&v - expected.matrix()).abs().max();
        assert!(dev < 1e-12, "deviation {dev:.3e}");
    }

    #[test]
    fn multimode_squeeze_is_symplectic() {
        for (s, n) in [(0.3, 3), (0.7, 2), (-0.9, 4), (1.2, 5)] {
            let m = symmetric_multimode_squeeze_symplectic(s, n).unwrap();
            let omega = QuadOrder::new(n).unwrap().symplectic_form();
            let dev = (&m * &omega * m.transpose() - &omega).abs().max();
            assert!(dev < 1e-10, "M Omega M^T deviates by {dev:.3e} at s={s}, n={n}");
        }
    }

    #[test]
    fn quad_order_indexing() {
        let ord = QuadOrder::new(3).unwrap();
        assert_eq!(ord.dim(), 6);
        assert_eq!(ord.q_index(2), 2);
        assert_eq!(ord.p_index(0), 3);
        let omega = ord.symplectic_form();
        assert_eq!(omega[(0, 3)], 1.0);
        assert_eq!(omega[(3, 0)], -1.0);
    }
}
