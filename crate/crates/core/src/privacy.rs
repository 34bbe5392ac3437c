//! Holevo quantities, per-use private information, the photon budget, the
//! capacity optimizer over `r`, and parameter sweeps.
//!
//! Because the conditional entropies do not depend on the displacement, the
//! Holevo quantity of each party reduces to `S(V_avg) - S(V_cond)`; no
//! integration over displacements is performed. Everything is computed from
//! the generic pipeline (one code path for all `n_uses`), with the two-use
//! closed forms asserted against it in tests.

use nalgebra::DVector;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::channel::{
    averaged_cov, joint_state, marginal, propagate, ChannelParams, InputPolicy, Party,
};
use crate::gauss::{spectrum_entropy, symplectic_eigenvalues, SymplecticSpectrum};
use crate::{Error, Result};

/// The four symplectic spectra behind a privacy evaluation.
#[derive(Debug, Clone)]
pub struct FourSpectra {
    pub out_cond: SymplecticSpectrum,
    pub eve_cond: SymplecticSpectrum,
    pub out_avg: SymplecticSpectrum,
    pub eve_avg: SymplecticSpectrum,
}

/// Holevo quantities, per-use private information, and the spectra that
/// produced them.
#[derive(Debug, Clone)]
pub struct PrivacyReport {
    pub chi_out: f64,
    pub chi_eve: f64,
    /// `(chi_out - chi_eve) / n_uses`, in bits per use.
    pub i_p: f64,
    pub spectra: FourSpectra,
    pub policy: InputPolicy,
    pub params: ChannelParams,
}

/// Displacement photon number `N = N_eff - sinh^2 r`; errors when the budget
/// is exceeded.
pub fn photon_budget(n_eff: f64, r: f64) -> Result<f64> {
    Ok(InputPolicy::new(r, n_eff)?.n())
}

/// Largest entanglement parameter the budget allows: `asinh(sqrt(N_eff))`.
pub fn r_max(n_eff: f64) -> f64 {
    n_eff.max(0.0).sqrt().asinh()
}

fn chi_from_entropies(s_avg: f64, s_cond: f64) -> Result<f64> {
    let chi = s_avg - s_cond;
    // V_avg differs from V_cond by a PSD shift, so chi >= 0 up to rounding
    if chi < -1e-9 {
        return Err(Error::NumericalHealth { what: "negative Holevo quantity", value: chi });
    }
    Ok(chi.max(0.0))
}

fn pipeline_spectra(policy: &InputPolicy, params: &ChannelParams) -> Result<FourSpectra> {
    let mu = DVector::zeros(2 * params.n_uses());
    let out = propagate(&joint_state(policy, params, &mu)?, params)?;
    let recv = marginal(&out, Party::Receiver)?;
    let eve = marginal(&out, Party::Eavesdropper)?;
    let out_avg = averaged_cov(recv.cov(), policy, params, Party::Receiver)?;
    let eve_avg = averaged_cov(eve.cov(), policy, params, Party::Eavesdropper)?;
    Ok(FourSpectra {
        out_cond: symplectic_eigenvalues(recv.cov())?,
        eve_cond: symplectic_eigenvalues(eve.cov())?,
        out_avg: symplectic_eigenvalues(&out_avg)?,
        eve_avg: symplectic_eigenvalues(&eve_avg)?,
    })
}

/// Holevo information of one party in bits (per `n_uses` uses):
/// `S(V_avg) - S(V_cond)`.
pub fn holevo(policy: &InputPolicy, params: &ChannelParams, party: Party) -> Result<f64> {
    let spectra = pipeline_spectra(policy, params)?;
    let (avg, cond) = match party {
        Party::Receiver => (&spectra.out_avg, &spectra.out_cond),
        Party::Eavesdropper => (&spectra.eve_avg, &spectra.eve_cond),
    };
    chi_from_entropies(spectrum_entropy(avg)?, spectrum_entropy(cond)?)
}

/// Full privacy evaluation at one parameter point.
pub fn private_information(policy: &InputPolicy, params: &ChannelParams) -> Result<PrivacyReport> {
    let spectra = pipeline_spectra(policy, params)?;
    let chi_out = chi_from_entropies(
        spectrum_entropy(&spectra.out_avg)?,
        spectrum_entropy(&spectra.out_cond)?,
    )?;
    let chi_eve = chi_from_entropies(
        spectrum_entropy(&spectra.eve_avg)?,
        spectrum_entropy(&spectra.eve_cond)?,
    )?;
    let i_p = (chi_out - chi_eve) / params.n_uses() as f64;
    Ok(PrivacyReport { chi_out, chi_eve, i_p, spectra, policy: *policy, params: *params })
}

/// One `I_p` evaluation made by the maximizer, in evaluation order.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub stage: OptStage,
    pub r: f64,
    pub i_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStage {
    Coarse,
    Golden,
}

/// Maximizes `I_p` over `r` in `[-r_max, r_max]` by a 201-point coarse grid
/// followed by golden-section refinement to `|dr| <= 1e-6`.
///
/// The coarse stage guards against the multimodality of `I_p(r)` for
/// `s != 0` (the curve families are asymmetric with two local maxima),
/// where a pure local search could latch onto the wrong lobe.
pub fn maximize_over_r(params: &ChannelParams, n_eff: f64) -> Result<(f64, PrivacyReport)> {
    let (r_star, report, _) = maximize_over_r_traced(params, n_eff)?;
    Ok((r_star, report))
}

/// As [`maximize_over_r`], also returning every evaluation it made.
pub fn maximize_over_r_traced(
    params: &ChannelParams,
    n_eff: f64,
) -> Result<(f64, PrivacyReport, Vec<TracePoint>)> {
    const COARSE_POINTS: usize = 201;
    const R_TOL: f64 = 1e-6;
    if !n_eff.is_finite() || n_eff < 0.0 {
        return Err(Error::NonFinite { name: "photon budget N_eff", value: n_eff });
    }
    let lim = r_max(n_eff);
    let mut trace = Vec::new();
    let eval = |r: f64, stage: OptStage, trace: &mut Vec<TracePoint>| -> Result<f64> {
        let i_p = private_information(&InputPolicy::new(r, n_eff)?, params)?.i_p;
        trace.push(TracePoint { stage, r, i_p });
        Ok(i_p)
    };
    if lim == 0.0 {
        let report = private_information(&InputPolicy::new(0.0, n_eff)?, params)?;
        trace.push(TracePoint { stage: OptStage::Coarse, r: 0.0, i_p: report.i_p });
        return Ok((0.0, report, trace));
    }

    let step = 2.0 * lim / (COARSE_POINTS - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut values = Vec::with_capacity(COARSE_POINTS);
    for k in 0..COARSE_POINTS {
        let r = (-lim + k as f64 * step).clamp(-lim, lim);
        let v = eval(r, OptStage::Coarse, &mut trace)?;
        if v > best.1 {
            best = (k, v);
        }
        values.push((r, v));
    }

    // golden-section maximization on the bracket around the best coarse point
    let (mut a, _) = values[best.0.saturating_sub(1)];
    let (mut b, _) = values[(best.0 + 1).min(COARSE_POINTS - 1)];
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1, OptStage::Golden, &mut trace)?;
    let mut f2 = eval(x2, OptStage::Golden, &mut trace)?;
    while b - a > R_TOL {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1, OptStage::Golden, &mut trace)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2, OptStage::Golden, &mut trace)?;
        }
    }
    let mut r_star = if f1 > f2 { x1 } else { x2 };
    // the coarse winner still stands if refinement gained nothing
    if best.1 > f1.max(f2) {
        r_star = values[best.0].0;
    }
    let report = private_information(&InputPolicy::new(r_star, n_eff)?, params)?;
    Ok((r_star, report, trace))
}

/// A rectangular sweep domain. Axes are sorted and deduplicated so the
/// output ordering is the lexicographic `(eta, s, n_eff, r)` key order.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    eta: Vec<f64>,
    s: Vec<f64>,
    n_eff: Vec<f64>,
    r_min: f64,
    r_max: f64,
    r_steps: usize,
}

impl SweepGrid {
    pub fn new(
        eta: Vec<f64>,
        s: Vec<f64>,
        n_eff: Vec<f64>,
        r_min: f64,
        r_max: f64,
        r_steps: usize,
    ) -> Result<Self> {
        let sorted_unique = |mut v: Vec<f64>, axis: &'static str| -> Result<Vec<f64>> {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::EmptyGrid { axis });
            }
            v.sort_by(f64::total_cmp);
            v.dedup();
            Ok(v)
        };
        let eta = sorted_unique(eta, "eta")?;
        if let Some(&bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::EtaRange { eta: bad });
        }
        let s = sorted_unique(s, "s")?;
        let n_eff = sorted_unique(n_eff, "n_eff")?;
        if n_eff[0] < 0.0 {
            return Err(Error::EmptyGrid { axis: "n_eff" });
        }
        if r_steps == 0 || !r_min.is_finite() || !r_max.is_finite() || r_min > r_max {
            return Err(Error::EmptyGrid { axis: "r" });
        }
        Ok(Self { eta, s, n_eff, r_min, r_max, r_steps })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn n_eff(&self) -> &[f64] {
        &self.n_eff
    }

    /// Inclusive linear grid over `r`.
    pub fn r_values(&self) -> Vec<f64> {
        if self.r_steps == 1 {
            return vec![self.r_min];
        }
        let step = (self.r_max - self.r_min) / (self.r_steps - 1) as f64;
        (0..self.r_steps).map(|k| self.r_min + k as f64 * step).collect()
    }

    pub fn len(&self) -> usize {
        self.eta.len() * self.s.len() * self.n_eff.len() * self.r_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Entropic results of one feasible sweep point.
#[derive(Debug, Clone, Copy)]
pub struct SweepValues {
    pub chi_out: f64,
    pub chi_eve: f64,
    pub i_p: f64,
}

/// One sweep row. `values` is `None` when the point violates the photon
/// budget; infeasible points are reported, never silently dropped, so
/// consumers see the full rectangle.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eta: f64,
    pub s: f64,
    pub n_eff: f64,
    pub r: f64,
    /// `N = N_eff - sinh^2 r`; negative exactly when infeasible.
    pub n: f64,
    pub values: Option<SweepValues>,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        self.values.is_some()
    }
}

/// Evaluates the full grid in deterministic `(eta, s, n_eff, r)` order.
/// Grid points are independent; with the `parallel` feature they are
/// evaluated concurrently and collected back in key order.
pub fn sweep(grid: &SweepGrid, base: &ChannelParams) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid { axis: "grid" });
    }
    let r_values = grid.r_values();
    let mut points = Vec::with_capacity(grid.len());
    for &eta in grid.eta() {
        for &s in grid.s() {
            for &n_eff in grid.n_eff() {
                for &r in &r_values {
                    points.push((eta, s, n_eff, r));
                }
            }
        }
    }
    let n_uses = base.n_uses();
    let eval_point = |&(eta, s, n_eff, r): &(f64, f64, f64, f64)| -> Result<SweepRow> {
        let params = ChannelParams::new(eta, s, n_uses)?;
        let mut n = n_eff - r.sinh().powi(2);
        let values = match InputPolicy::new(r, n_eff) {
            Ok(policy) => {
                n = policy.n();
                let rep = private_information(&policy, &params)?;
                Some(SweepValues { chi_out: rep.chi_out, chi_eve: rep.chi_eve, i_p: rep.i_p })
            }
            Err(Error::PhotonBudget { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(SweepRow { eta, s, n_eff, r, n, values })
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<SweepRow>> = points.par_iter().map(eval_point).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<SweepRow>> = points.iter().map(eval_point).collect();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const G_08: f64 = 1.7839369077088;
    const G_02: f64 = 0.780026905978025;
    const IP_SPOT: f64 = 1.003910001730775;

    #[test]
    fn photon_budget_examples() {
        assert_abs_diff_eq!(photon_budget(2.0, 0.0).unwrap(), 2.0);
        let boundary = r_max(2.0);
        assert_abs_diff_eq!(boundary, 1.146215834780589, epsilon = 1e-12);
        assert_abs_diff_eq!(photon_budget(2.0, boundary).unwrap(), 0.0, epsilon = 1e-12);
        assert!(matches!(photon_budget(2.0, 1.5), Err(Error::PhotonBudget { .. })));
    }

    #[test]
    fn holevo_lossless_receiver() {
        // eta = 1, r = s = 0, N = 2: lambda_avg = (1+N)/2 = 1.5, chi = 2 g(1) = 4
        let policy = InputPolicy::new(0.0, 2.0).unwrap();
        let params = ChannelParams::new(1.0, 0.0, 2).unwrap();
        assert_abs_diff_eq!(
            holevo(&policy, &params, Party::Receiver).unwrap(),
            4.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            holevo(&policy, &params, Party::Eavesdropper).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn holevo_reference_point() {
        let policy = InputPolicy::new(0.0, 2.0).unwrap();
        let params = ChannelParams::new(0.8, 0.0, 2).unwrap();
        assert_abs_diff_eq!(
            holevo(&policy, &params, Party::Receiver).unwrap(),
            2.0 * G_08,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            holevo(&policy, &params, Party::Eavesdropper).unwrap(),
            2.0 * G_02,
            epsilon = 1e-10
        );
    }

    #[test]
    fn private_information_spot_value() {
        let policy = InputPolicy::new(0.0, 2.0).unwrap();
        let params = ChannelParams::new(0.8, 0.0, 2).unwrap();
        let rep = private_information(&policy, &params).unwrap();
        assert_abs_diff_eq!(rep.i_p, IP_SPOT, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.i_p, (rep.chi_out - rep.chi_eve) / 2.0, epsilon = 1e-12);
        assert!(rep.chi_out >= 0.0 && rep.chi_eve >= 0.0);
    }

    #[test]
    fn null_point_at_balanced_splitter() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let n_eff: f64 = rng.random_range(0.0..5.0);
            let r: f64 = rng.random_range(-1.0..1.0) * r_max(n_eff);
            let s: f64 = rng.random_range(-3.0..3.0);
            let policy = InputPolicy::new(r, n_eff).unwrap();
            let params = ChannelParams::new(0.5, s, 2).unwrap();
            let rep = private_information(&policy, &params).unwrap();
            assert!(rep.i_p.abs() < 1e-12, "I_p = {} at eta = 1/2", rep.i_p);
        }
    }

    #[test]
    fn mirror_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..30 {
            let n_eff: f64 = rng.random_range(0.1..4.0);
            let r: f64 = rng.random_range(-1.0..1.0) * r_max(n_eff).min(1.5);
            let s: f64 = rng.random_range(-2.0..2.0);
            let eta: f64 = rng.random_range(0.0..=1.0);
            let ip = |eta: f64, r: f64, s: f64| {
                private_information(
                    &InputPolicy::new(r, n_eff).unwrap(),
                    &ChannelParams::new(eta, s, 2).unwrap(),
                )
                .unwrap()
                .i_p
            };
            // eta -> 1 - eta flips the sign
            assert_abs_diff_eq!(ip(eta, r, s), -ip(1.0 - eta, r, s), epsilon = 1e-12);
            // joint sign flip of (r, s) is a symmetry
            assert_abs_diff_eq!(ip(eta, r, s), ip(eta, -r, -s), epsilon = 1e-12);
            // memoryless case is even in r
            assert_abs_diff_eq!(ip(eta, r, 0.0), ip(eta, -r, 0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn memory_degrades_privacy_at_product_inputs() {
        let policy = InputPolicy::new(0.0, 2.0).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=12 {
            let s = k as f64 * 0.25;
            let params = ChannelParams::new(0.8, s, 2).unwrap();
            let ip = private_information(&policy, &params).unwrap().i_p;
            assert!(ip <= last + 1e-12, "I_p increased from {last} to {ip} at s = {s}");
            last = ip;
        }
    }

    #[test]
    fn maximize_memoryless_peaks_at_zero() {
        let params = ChannelParams::new(0.8, 0.0, 2).unwrap();
        let (r_star, rep) = maximize_over_r(&params, 2.0).unwrap();
        assert!(r_star.abs() < 1e-4, "r* = {r_star}");
        assert_abs_diff_eq!(rep.i_p, IP_SPOT, epsilon = 1e-8);
    }

    #[test]
    fn maximize_with_memory_prefers_entangled_inputs() {
        let params = ChannelParams::new(0.8, 1.0, 2).unwrap();
        let (r_star, rep) = maximize_over_r(&params, 2.0).unwrap();
        let at_zero = private_information(&InputPolicy::new(0.0, 2.0).unwrap(), &params)
            .unwrap()
            .i_p;
        assert!(r_star > 0.0, "r* = {r_star}");
        assert!(rep.i_p > at_zero + 1e-6);
        // but never above the memoryless maximum
        let memoryless = ChannelParams::new(0.8, 0.0, 2).unwrap();
        let (_, best0) = maximize_over_r(&memoryless, 2.0).unwrap();
        assert!(rep.i_p < best0.i_p);
    }

    #[test]
    fn maximize_degenerate_budget() {
        let params = ChannelParams::new(0.8, 1.0, 2).unwrap();
        let (r_star, rep) = maximize_over_r(&params, 0.0).unwrap();
        assert_eq!(r_star, 0.0);
        assert_abs_diff_eq!(rep.i_p, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_single_point_equals_private_information() {
        let grid = SweepGrid::new(vec![0.8], vec![1.0], vec![2.0], 0.3, 0.3, 1).unwrap();
        let base = ChannelParams::new(0.8, 1.0, 2).unwrap();
        let rows = sweep(&grid, &base).unwrap();
        assert_eq!(rows.len(), 1);
        let rep = private_information(
            &InputPolicy::new(0.3, 2.0).unwrap(),
            &ChannelParams::new(0.8, 1.0, 2).unwrap(),
        )
        .unwrap();
        let vals = rows[0].values.as_ref().unwrap();
        assert_abs_diff_eq!(vals.i_p, rep.i_p, epsilon = 1e-14);
        assert_abs_diff_eq!(vals.chi_out, rep.chi_out, epsilon = 1e-14);
    }

    #[test]
    fn sweep_reports_infeasible_points() {
        let grid = SweepGrid::new(vec![0.8], vec![0.0], vec![0.5], -1.5, 1.5, 7).unwrap();
        let base = ChannelParams::new(0.8, 0.0, 2).unwrap();
        let rows = sweep(&grid, &base).unwrap();
        assert_eq!(rows.len(), 7);
        assert!(!rows[0].feasible() && rows[0].n < 0.0);
        assert!(rows[3].feasible());
        assert!(!rows[6].feasible());
    }

    #[test]
    fn sweep_fig1_ordering_near_product_inputs() {
        // eta = 0.8: curves at r = 0 ordered top to bottom by increasing s
        let grid =
            SweepGrid::new(vec![0.8], vec![0.0, 1.0, 2.0, 3.0], vec![2.0], 0.0, 0.0, 1).unwrap();
        let base = ChannelParams::new(0.8, 0.0, 2).unwrap();
        let rows = sweep(&grid, &base).unwrap();
        let ips: Vec<f64> = rows.iter().map(|r| r.values.as_ref().unwrap().i_p).collect();
        assert!(ips.windows(2).all(|w| w[0] > w[1]), "not decreasing in s: {ips:?}");
    }

    #[test]
    fn sweep_fig2_all_nonpositive() {
        // eta = 0.2: I_p <= 0, and at r = 0 it increases (toward 0) with s
        let grid =
            SweepGrid::new(vec![0.2], vec![0.0, 1.0, 2.0, 3.0], vec![2.0], -1.0, 1.0, 21).unwrap();
        let base = ChannelParams::new(0.2, 0.0, 2).unwrap();
        let rows = sweep(&grid, &base).unwrap();
        for row in rows.iter().filter(|r| r.feasible()) {
            assert!(row.values.as_ref().unwrap().i_p <= 1e-12);
        }
        let at_zero: Vec<f64> = rows
            .iter()
            .filter(|row| row.r == 0.0)
            .map(|row| row.values.as_ref().unwrap().i_p)
            .collect();
        assert_eq!(at_zero.len(), 4);
        assert!(at_zero.windows(2).all(|w| w[0] < w[1]), "not increasing in s: {at_zero:?}");
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        assert!(SweepGrid::new(vec![], vec![0.0], vec![1.0], 0.0, 1.0, 2).is_err());
        assert!(SweepGrid::new(vec![0.5], vec![0.0], vec![1.0], 1.0, 0.0, 2).is_err());
        assert!(SweepGrid::new(vec![0.5], vec![0.0], vec![1.0], 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn sweep_axes_are_sorted_for_key_order() {
        let grid = SweepGrid::new(vec![0.8, 0.2], vec![1.0, 0.0], vec![2.0], 0.0, 0.0, 1).unwrap();
        let base = ChannelParams::new(0.5, 0.0, 2).unwrap();
        let rows = sweep(&grid, &base).unwrap();
        let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.eta, r.s)).collect();
        assert_eq!(keys, vec![(0.2, 0.0), (0.2, 1.0), (0.8, 0.0), (0.8, 1.0)]);
    }
}
