//! Browser bindings for exploring the private information of the lossy
//! bosonic memory channel.
//!
//! Three operations back the static demo page in `www/`: curve families
//! `I_p(r)` for a set of memory strengths, the capacity maximization over
//! the entanglement parameter, and a full single-point report. Everything
//! returns JSON strings so the page needs no framework or generated
//! bindings beyond the wasm-bindgen glue; errors come back as
//! `{"error": "..."}` objects rather than exceptions.

use bpriv_core::channel::{ChannelParams, InputPolicy};
use bpriv_core::privacy::{maximize_over_r, private_information, r_max, sweep, SweepGrid};
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

fn err_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// `I_p(r)` curves at fixed `eta` and `N_eff`, one per entry of the
/// comma-separated `s_list`, over an inclusive `r_steps`-point grid
/// spanning the feasible range. Infeasible points come back as JSON null.
#[wasm_bindgen]
pub fn sweep_curves(eta: f64, n_eff: f64, r_steps: u32, s_list: &str) -> String {
    let s_values: Result<Vec<f64>, _> =
        s_list.split(',').map(|tok| tok.trim().parse::<f64>()).collect();
    let s_values = match s_values {
        Ok(v) if !v.is_empty() => v,
        _ => return err_json(format!("invalid s list '{s_list}'")),
    };
    let lim = r_max(n_eff);
    let grid = match SweepGrid::new(
        vec![eta],
        s_values.clone(),
        vec![n_eff],
        -lim,
        lim,
        r_steps.max(2) as usize,
    ) {
        Ok(g) => g,
        Err(e) => return err_json(e),
    };
    let base = match ChannelParams::new(eta, s_values[0], 2) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let rows = match sweep(&grid, &base) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let r_axis = grid.r_values();
    let curves: Vec<serde_json::Value> = grid
        .s()
        .iter()
        .map(|&s| {
            let i_p: Vec<serde_json::Value> = rows
                .iter()
                .filter(|row| row.s == s)
                .map(|row| match &row.values {
                    Some(v) => json!(v.i_p),
                    None => serde_json::Value::Null,
                })
                .collect();
            json!({ "s": s, "i_p": i_p })
        })
        .collect();
    json!({ "eta": eta, "n_eff": n_eff, "r": r_axis, "curves": curves }).to_string()
}

/// Maximizes `I_p` over the feasible entanglement range at fixed `eta`,
/// `s`, `N_eff` (two channel uses).
#[wasm_bindgen]
pub fn optimize_r(eta: f64, s: f64, n_eff: f64) -> String {
    let params = match ChannelParams::new(eta, s, 2) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    match maximize_over_r(&params, n_eff) {
        Ok((r_star, report)) => json!({
            "r_star": r_star,
            "i_p": report.i_p,
            "chi_out": report.chi_out,
            "chi_eve": report.chi_eve,
            "n": report.policy.n(),
            "i_p_at_zero": private_information(
                &InputPolicy::new(0.0, n_eff).expect("r = 0 always feasible"),
                &params,
            )
            .map(|rep| rep.i_p)
            .unwrap_or(f64::NAN),
        })
        .to_string(),
        Err(e) => err_json(e),
    }
}

/// Full report at one parameter point: Holevo quantities, per-use private
/// information, and the four symplectic spectra.
#[wasm_bindgen]
pub fn spot_report(eta: f64, s: f64, r: f64, n_eff: f64) -> String {
    let params = match ChannelParams::new(eta, s, 2) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let policy = match InputPolicy::new(r, n_eff) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    match private_information(&policy, &params) {
        Ok(report) => json!({
            "eta": eta, "s": s, "r": r, "n_eff": n_eff,
            "n": report.policy.n(),
            "chi_out": report.chi_out,
            "chi_eve": report.chi_eve,
            "i_p": report.i_p,
            "spectra": {
                "lambda_out": report.spectra.out_cond.values(),
                "lambda_eve": report.spectra.eve_cond.values(),
                "lambda_out_avg": report.spectra.out_avg.values(),
                "lambda_eve_avg": report.spectra.eve_avg.values(),
            },
        })
        .to_string(),
        Err(e) => err_json(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sweep_curves_structure() {
        let raw = sweep_curves(0.8, 2.0, 21, "0, 1, 2, 3");
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert!(v.get("error").is_none(), "{raw}");
        assert_eq!(v["curves"].as_array().unwrap().len(), 4);
        assert_eq!(v["r"].as_array().unwrap().len(), 21);
        let first = &v["curves"][0];
        assert_eq!(first["s"], 0.0);
        assert_eq!(first["i_p"].as_array().unwrap().len(), 21);
        // center point of the s = 0 curve is the known spot value
        let ip_center = first["i_p"][10].as_f64().unwrap();
        assert_abs_diff_eq!(ip_center, 1.003910001730775, epsilon = 1e-9);
    }

    #[test]
    fn sweep_curves_rejects_bad_input() {
        let raw = sweep_curves(0.8, 2.0, 11, "0,abc");
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert!(v["error"].as_str().unwrap().contains("invalid s list"));
        let raw = sweep_curves(1.4, 2.0, 11, "0");
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert!(v.get("error").is_some());
    }

    #[test]
    fn optimize_prefers_entanglement_under_memory() {
        let v: serde_json::Value = serde_json::from_str(&optimize_r(0.8, 1.0, 2.0)).unwrap();
        assert!(v["r_star"].as_f64().unwrap() > 0.0);
        assert!(v["i_p"].as_f64().unwrap() > v["i_p_at_zero"].as_f64().unwrap());
    }

    #[test]
    fn spot_report_reference_point() {
        let v: serde_json::Value = serde_json::from_str(&spot_report(0.8, 0.0, 0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(v["i_p"].as_f64().unwrap(), 1.003910001730775, epsilon = 1e-9);
        assert_abs_diff_eq!(
            v["spectra"]["lambda_out_avg"][0].as_f64().unwrap(),
            1.3,
            epsilon = 1e-12
        );
        let infeasible: serde_json::Value =
            serde_json::from_str(&spot_report(0.8, 0.0, 1.5, 2.0)).unwrap();
        assert!(infeasible.get("error").is_some());
    }
}
