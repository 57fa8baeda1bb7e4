//! Joint uplink/downlink association probabilities.
//!
//! Closed forms use `H^{1,1}_{1,1}[z | (0, ½); (0, β)]` with β = α_M/(2α_S);
//! the quadrature forms integrate the nearest-small-cell distance law directly.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{AssociationCase, NetworkConfig};
use crate::quadrature::{integrate_semi_infinite_with, QuadOptions};
use crate::specfun::{fox_h, FoxHParams};

const RANGE_SLACK: f64 = 1e-9;

fn checked(case: AssociationCase, p: f64) -> Result<f64> {
    if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&p) {
        return Err(Error::ProbabilityRange { case, value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// β·H(z₁) and β·H(z₂).
fn kernel_terms(cfg: &NetworkConfig) -> Result<(f64, f64)> {
    let d = cfg.derive()?;
    let beta = cfg.alpha_m / (2.0 * cfg.alpha_s);
    let params = FoxHParams::association(beta)?;
    let h1 = beta * fox_h(&params, d.z1)?;
    let h2 = if d.z1 == d.z2 { h1 } else { beta * fox_h(&params, d.z2)? };
    Ok((h1, h2))
}

pub fn prob_case_closed(cfg: &NetworkConfig, case: AssociationCase) -> Result<f64> {
    if case == AssociationCase::Case3 {
        cfg.validate()?;
        return Ok(0.0);
    }
    let (h1, h2) = kernel_terms(cfg)?;
    let p = match case {
        AssociationCase::Case1 => 1.0 - h1,
        AssociationCase::Case2 => h1 - h2,
        AssociationCase::Case4 => h2,
        AssociationCase::Case3 => unreachable!(),
    };
    checked(case, p)
}

/// Pr(Case1), Pr(Case2), Pr(Case3), Pr(Case4) from one pair of H evaluations.
pub fn case_probabilities(cfg: &NetworkConfig) -> Result<[f64; 4]> {
    let (h1, h2) = kernel_terms(cfg)?;
    Ok([
        checked(AssociationCase::Case1, 1.0 - h1)?,
        checked(AssociationCase::Case2, h1 - h2)?,
        0.0,
        checked(AssociationCase::Case4, h2)?,
    ])
}

/// Probability that the small cell wins a comparison with power ratio
/// `ratio` = (macro power)/(small-cell power):
/// 2πλ_S ∫ x e^{−πλ_S x²} exp(−πλ_M ratio^{2/α_M} x^{2α_S/α_M}) dx.
fn small_cell_wins(cfg: &NetworkConfig, ratio: f64, rel_tol: f64) -> Result<f64> {
    small_cell_window(cfg, ratio, f64::INFINITY, rel_tol)
}

// ∫ f_{X_S}(x) [exp(−c_lo x^p) − exp(−c_hi x^p)] dx with c = πλ_M·ratio^{2/α_M};
// `ratio_hi = ∞` drops the second exponential.
fn small_cell_window(cfg: &NetworkConfig, ratio_lo: f64, ratio_hi: f64, rel_tol: f64) -> Result<f64> {
    let ls = cfg.lambda_s;
    let power = 2.0 * cfg.alpha_s / cfg.alpha_m;
    let c_lo = PI * cfg.lambda_m * ratio_lo.powf(2.0 / cfg.alpha_m);
    let c_hi = if ratio_hi.is_finite() { PI * cfg.lambda_m * ratio_hi.powf(2.0 / cfg.alpha_m) } else { f64::INFINITY };
    let f = |x: f64| {
        let base = 2.0 * PI * ls * x * (-PI * ls * x * x).exp();
        if base == 0.0 {
            return 0.0;
        }
        let xp = x.powf(power);
        let a = (-c_lo * xp).exp();
        let b = if c_hi.is_finite() { (-c_hi * xp).exp() } else { 0.0 };
        base * (a - b)
    };
    let opts = QuadOptions::with_rel_tol(rel_tol).abs_tol(1e-15).scale(1.0 / (PI * ls).sqrt());
    Ok(integrate_semi_infinite_with(f, 0.0, &opts)?.value)
}

/// Direct quadrature over the nearest small-cell distance; independent of the H-function code.
pub fn prob_case_quadrature(cfg: &NetworkConfig, case: AssociationCase) -> Result<f64> {
    prob_case_quadrature_with(cfg, case, 1e-10)
}

pub fn prob_case_quadrature_with(cfg: &NetworkConfig, case: AssociationCase, rel_tol: f64) -> Result<f64> {
    cfg.validate()?;
    let ul_ratio = cfg.q_bar_m() / cfg.q_bar_s();
    let dl_ratio = cfg.p_bar_m() / cfg.p_bar_s();
    let p = match case {
        AssociationCase::Case1 => 1.0 - small_cell_wins(cfg, ul_ratio, rel_tol)?,
        AssociationCase::Case2 => small_cell_window(cfg, ul_ratio, dl_ratio, rel_tol)?,
        AssociationCase::Case3 => 0.0,
        AssociationCase::Case4 => small_cell_wins(cfg, dl_ratio, rel_tol)?,
    };
    checked(case, p)
}

/// Downlink (coupled-mode) macro association probability, 1 − β·H(z₂).
pub fn prob_mcell_coupled(cfg: &NetworkConfig) -> Result<f64> {
    let d = cfg.derive()?;
    let beta = cfg.alpha_m / (2.0 * cfg.alpha_s);
    let params = FoxHParams::association(beta)?;
    let p = 1.0 - beta * fox_h(&params, d.z2)?;
    checked(AssociationCase::Case1, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AssociationCase::*;

    fn equal_exponent(alpha: f64, ratio: f64) -> NetworkConfig {
        NetworkConfig { alpha_m: alpha, alpha_s: alpha, ..NetworkConfig::table_nlos() }.with_density_ratio(ratio)
    }

    #[test]
    fn case3_is_zero() {
        assert_eq!(prob_case_closed(&NetworkConfig::table_nlos(), Case3).unwrap(), 0.0);
        assert_eq!(prob_case_quadrature(&NetworkConfig::table_los(), Case3).unwrap(), 0.0);
    }

    #[test]
    fn equal_exponents_reduce_to_biased_nearest() {
        for &ratio in &[0.5, 3.0, 40.0] {
            let cfg = equal_exponent(3.0, ratio);
            let k = (cfg.q_bar_m() / cfg.q_bar_s()).powf(2.0 / 3.0);
            let want = cfg.lambda_m * k / (cfg.lambda_s + cfg.lambda_m * k);
            let got = prob_case_closed(&cfg, Case1).unwrap();
            assert!((got - want).abs() < 1e-10, "{ratio}: {got} vs {want}");
            let kp = (cfg.p_bar_m() / cfg.p_bar_s()).powf(2.0 / 3.0);
            let want_m = cfg.lambda_m * kp / (cfg.lambda_s + cfg.lambda_m * kp);
            assert!((prob_mcell_coupled(&cfg).unwrap() - want_m).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_matches_quadrature_table() {
        for cfg in [NetworkConfig::table_nlos(), NetworkConfig::table_los()] {
            for &ratio in &[1.0, 10.0, 50.0] {
                let c = cfg.with_density_ratio(ratio);
                for case in [Case1, Case2, Case4] {
                    let a = prob_case_closed(&c, case).unwrap();
                    let b = prob_case_quadrature(&c, case).unwrap();
                    assert!((a - b).abs() < 1e-9, "{case} {ratio}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn macro_dominance_limits() {
        let cfg = NetworkConfig { q_m_dbm: 170.0, p_m_dbm: 200.0, ..NetworkConfig::table_nlos() };
        assert!(prob_case_quadrature(&cfg, Case1).unwrap() > 1.0 - 1e-6);
        let sparse = NetworkConfig::table_nlos().with_density_ratio(1e-8);
        assert!(prob_case_quadrature(&sparse, Case1).unwrap() > 1.0 - 1e-6);
        assert!(prob_case_quadrature(&sparse, Case4).unwrap() < 1e-6);
        let dense = NetworkConfig::table_nlos().with_density_ratio(1e8);
        assert!(prob_mcell_coupled(&dense).unwrap() < 1e-3);
    }

    #[test]
    fn coupled_macro_is_case1_plus_case2() {
        let cfg = NetworkConfig::table_nlos().with_density_ratio(7.0);
        let m = prob_mcell_coupled(&cfg).unwrap();
        let s = prob_case_closed(&cfg, Case1).unwrap() + prob_case_closed(&cfg, Case2).unwrap();
        assert!((m - s).abs() < 1e-12);
    }
}
