//! Average user rates and spectral efficiencies.
//!
//! A rate is `τ = W·m/Pr`, where the rate mass
//! `m = ∫_0^∞ Pr(SINR > e^t − 1, event) dt` is computed either from the
//! bivariate H-function (closed form) or as a double integral of elementary
//! functions (quadrature). The two paths share no special-function code.

use std::f64::consts::PI;

use serde::Serialize;

use crate::association::{prob_case_closed, prob_case_quadrature, prob_mcell_coupled};
use crate::distances::{mcell_downlink_window, window, Window};
use crate::error::{Error, Result};
use crate::model::{derive, xi_threshold, AssociationCase, DerivedParams, LinkDirection, NetworkConfig, Tier};
use crate::quadrature::{integrate_semi_infinite_with, QuadOptions};
use crate::specfun::{fox_h_bivariate_with, gauss_2f1, BivariateHParams, BivariateOptions, ScaledValue, SpecError};

// Beyond this the integrands are below e^{-2t/α} ≈ e^{-280}.
const T_CUTOFF: f64 = 700.0;
const MIN_PROBABILITY: f64 = 1e-12;

/// G(t) = δT/(1 − δ)·₂F₁(1, 1 − δ; 2 − δ; −T) with δ = 2/α_M and T = e^t − 1.
pub fn big_g_alpha(alpha_m: f64, t: f64) -> std::result::Result<f64, SpecError> {
    if !(alpha_m > 2.0) {
        return Err(SpecError::InvalidInput(format!("alpha_m = {alpha_m} must exceed 2")));
    }
    if !(t >= 0.0) {
        return Err(SpecError::InvalidInput(format!("threshold t = {t} must be non-negative")));
    }
    if t > T_CUTOFF {
        return Ok(f64::INFINITY);
    }
    let big_t = t.exp_m1();
    if big_t == 0.0 {
        return Ok(0.0);
    }
    let d = 2.0 / alpha_m;
    Ok(d * big_t / (1.0 - d) * gauss_2f1(1.0, 1.0 - d, 2.0 - d, -big_t)?)
}

pub fn big_g(cfg: &NetworkConfig, t: f64) -> Result<f64> {
    Ok(big_g_alpha(cfg.alpha_m, t)?)
}

/// G(t) = T^δ·δ·∫_{1/T}^∞ u^{δ−1}/(1 + u) du by direct quadrature.
pub fn big_g_integral(alpha_m: f64, t: f64) -> Result<f64> {
    if !(alpha_m > 2.0) {
        return Err(Error::InvalidArgument(format!("alpha_m = {alpha_m} must exceed 2")));
    }
    let big_t = t.exp_m1();
    if big_t == 0.0 {
        return Ok(0.0);
    }
    if !big_t.is_finite() {
        return Ok(f64::INFINITY);
    }
    let d = 2.0 / alpha_m;
    let lower = 1.0 / big_t;
    let opts = QuadOptions::with_rel_tol(1e-13).scale(1.0 + lower);
    let r = integrate_semi_infinite_with(|u| u.powf(d - 1.0) / (1.0 + u), lower, &opts)?;
    Ok(big_t.powf(d) * d * r.value)
}

/// exp(−π·λ_int·x²·G(t)): Laplace functional of the co-tier interference
/// seen by a macro link of length `x`.
pub fn interference_guard(cfg: &NetworkConfig, dir: LinkDirection, x: f64, t: f64) -> Result<f64> {
    let lambda = cfg.lambda_int(dir);
    if lambda == 0.0 || x == 0.0 {
        return Ok(1.0);
    }
    Ok((-PI * lambda * x * x * big_g(cfg, t)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RateMode {
    Case1,
    Case2,
    Case4,
    /// Coupled access, UE served by the macro tier in both directions.
    CoupledMcell,
    /// Coupled access, small cell in both directions; identical to Case4.
    CoupledScell,
}

impl RateMode {
    pub const ALL: [RateMode; 5] =
        [RateMode::Case1, RateMode::Case2, RateMode::Case4, RateMode::CoupledMcell, RateMode::CoupledScell];

    pub fn serving_tier(self, dir: LinkDirection) -> Tier {
        match self {
            RateMode::Case1 => AssociationCase::Case1.serving_tier(dir),
            RateMode::Case2 => AssociationCase::Case2.serving_tier(dir),
            RateMode::Case4 | RateMode::CoupledScell => Tier::Scell,
            RateMode::CoupledMcell => Tier::Mcell,
        }
    }

    fn case(self) -> AssociationCase {
        match self {
            RateMode::Case1 | RateMode::CoupledMcell => AssociationCase::Case1,
            RateMode::Case2 => AssociationCase::Case2,
            RateMode::Case4 | RateMode::CoupledScell => AssociationCase::Case4,
        }
    }
}

impl std::fmt::Display for RateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RateMode::Case1 => "case1",
            RateMode::Case2 => "case2",
            RateMode::Case4 => "case4",
            RateMode::CoupledMcell => "coupled_mcell",
            RateMode::CoupledScell => "coupled_scell",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RateQuery {
    pub mode: RateMode,
    pub direction: LinkDirection,
}

impl RateQuery {
    pub fn new(mode: RateMode, direction: LinkDirection) -> Self {
        RateQuery { mode, direction }
    }

    /// The eight queries: Case1, Case2, Case4 and CoupledMcell in both directions.
    pub fn all() -> Vec<RateQuery> {
        let mut v = Vec::new();
        for mode in [RateMode::Case1, RateMode::Case2, RateMode::Case4, RateMode::CoupledMcell] {
            for dir in [LinkDirection::Ul, LinkDirection::Dl] {
                v.push(RateQuery::new(mode, dir));
            }
        }
        v
    }

    pub fn serving_tier(&self) -> Tier {
        self.mode.serving_tier(self.direction)
    }
}

impl std::fmt::Display for RateQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}_{}", self.mode, self.direction)
    }
}

/// Probability of the event a query conditions on, closed form.
pub fn query_probability(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    match q.mode {
        RateMode::CoupledMcell => prob_mcell_coupled(cfg),
        m => prob_case_closed(cfg, m.case()),
    }
}

fn query_probability_quadrature(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    match q.mode {
        RateMode::CoupledMcell => {
            Ok(prob_case_quadrature(cfg, AssociationCase::Case1)? + prob_case_quadrature(cfg, AssociationCase::Case2)?)
        }
        m => prob_case_quadrature(cfg, m.case()),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RateOptions {
    /// Relative tolerance of the outer t-integral.
    pub rel_tol: f64,
    pub bivariate: BivariateOptions,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions { rel_tol: 1e-8, bivariate: BivariateOptions::default() }
    }
}

fn outer_options(rel_tol: f64, pr: f64) -> QuadOptions {
    // the t-integrand is a probability bounded by Pr(event)
    QuadOptions::with_rel_tol(rel_tol).bound(pr).abs_tol(pr * 1e-16)
}

// 2πλ·β_kβ_{k+1}β_{k+2}·ξ_c^{-2}·Σ sign·Ĥ(k; ξ_a/ξ_c, ξ_b/ξ_c), assembled in log space.
fn closed_integrand(
    params: &BivariateHParams,
    lambda: f64,
    ln_xi_c: f64,
    terms: &[(f64, f64, f64)],
    opts: &BivariateOptions,
) -> Result<f64> {
    let xi_c = ln_xi_c.exp();
    let mut parts: Vec<(f64, ScaledValue)> = Vec::with_capacity(terms.len());
    for &(sign, xa, xb) in terms {
        let (x, y) = if xi_c > 0.0 && xi_c.is_finite() {
            (xa / xi_c, xb / xi_c)
        } else {
            ((xa.ln() - ln_xi_c).exp(), (xb.ln() - ln_xi_c).exp())
        };
        if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
            return Err(Error::InvalidArgument(format!("H arguments out of range at ln ξ = {ln_xi_c}")));
        }
        parts.push((sign, fox_h_bivariate_with(params, x, y, opts)?));
    }
    let pref = (2.0 * PI * lambda * params.product()).ln() - 2.0 * ln_xi_c;
    let top = parts.iter().map(|(_, v)| v.log_scale.to_f64()).fold(f64::MIN, f64::max);
    let mut sum = 0.0;
    for (sign, v) in &parts {
        sum += sign * v.mantissa * ((v.log_scale - top).to_f64()).exp();
    }
    Ok(sum * (pref + top).exp())
}

/// Rate mass `m = τ·Pr/W` from the bivariate H-function.
pub fn rate_mass_closed(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    rate_mass_closed_with(cfg, q, &RateOptions::default())
}

pub fn rate_mass_closed_with(cfg: &NetworkConfig, q: RateQuery, opts: &RateOptions) -> Result<f64> {
    let d = derive(cfg)?;
    let pr = query_probability(cfg, q)?;
    if pr < MIN_PROBABILITY {
        return Ok(0.0);
    }
    let dir = q.direction;
    let tier = q.serving_tier();
    let k = match tier {
        Tier::Mcell => 1,
        Tier::Scell => 4,
    };
    let params = BivariateHParams::from_exponents(k, cfg.alpha_m, cfg.alpha_s)?;
    let lambda = cfg.density(tier);
    let ln_noise_over_power = cfg.noise(tier).ln() - cfg.link_power(tier, dir).ln();
    let alpha = cfg.alpha(tier);
    let mut failure: Option<Error> = None;
    let integrand = |t: f64| -> f64 {
        if failure.is_some() || t > T_CUTOFF {
            return 0.0;
        }
        let ln_xi = (t.exp_m1().ln() + ln_noise_over_power) / alpha;
        let r = terms_for(&d, q, t).and_then(|terms| closed_integrand(&params, lambda, ln_xi, &terms, &opts.bivariate));
        match r {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let res = integrate_semi_infinite_with(integrand, 0.0, &outer_options(opts.rel_tol, pr));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(res?.value)
}

// (sign, ξ_a, ξ_b) for each H term of a query.
fn terms_for(d: &DerivedParams, q: RateQuery, t: f64) -> Result<Vec<(f64, f64, f64)>> {
    let dir = q.direction;
    let v = match (q.mode, q.serving_tier()) {
        (RateMode::Case1, Tier::Mcell) => vec![(1.0, d.xi6, d.xi5(t, dir)?)],
        (RateMode::Case2, Tier::Mcell) => {
            let x5 = d.xi5(t, dir)?;
            vec![(1.0, d.xi4, x5), (-1.0, d.xi6, x5)]
        }
        (RateMode::CoupledMcell, _) => vec![(1.0, d.xi4, d.xi5(t, dir)?)],
        (RateMode::Case2, Tier::Scell) => vec![(1.0, d.xi1, d.xi2), (-1.0, d.xi3, d.xi2)],
        (RateMode::Case4 | RateMode::CoupledScell, _) => vec![(1.0, d.xi3, d.xi2)],
        (m, t) => return Err(Error::InvalidArgument(format!("no rate expression for {m} served by {t}"))),
    };
    Ok(v)
}

/// Average rate `τ` (nats/s) from the closed form.
pub fn avg_rate_closed(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    let pr = query_probability(cfg, q)?;
    if pr < MIN_PROBABILITY {
        return Err(Error::ZeroProbabilityCase { case: q.mode.case() });
    }
    Ok(cfg.bandwidth(q.serving_tier()) * rate_mass_closed(cfg, q)? / pr)
}

fn query_window(cfg: &NetworkConfig, q: RateQuery) -> Result<Window> {
    match q.mode {
        RateMode::CoupledMcell => Ok(mcell_downlink_window(cfg)),
        m => window(cfg, m.case(), q.serving_tier()),
    }
}

/// Rate mass as `∫_t ∫_x f_{X_k}(x)·window(x)·exp(−(e^t−1)σ²x^α/P)·L_I(x, t) dx dt`,
/// with G(t) from its integral representation.
pub fn rate_mass_quadrature(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    rate_mass_quadrature_with(cfg, q, 1e-9)
}

pub fn rate_mass_quadrature_with(cfg: &NetworkConfig, q: RateQuery, rel_tol: f64) -> Result<f64> {
    cfg.validate()?;
    let pr = query_probability_quadrature(cfg, q)?;
    if pr < MIN_PROBABILITY {
        return Ok(0.0);
    }
    let tier = q.serving_tier();
    let w = query_window(cfg, q)?;
    let alpha = cfg.alpha(tier);
    let noise_over_power = cfg.noise(tier) / cfg.link_power(tier, q.direction);
    let lambda_int = if tier == Tier::Mcell { cfg.lambda_int(q.direction) } else { 0.0 };
    let inner = QuadOptions::with_rel_tol(rel_tol * 0.1).abs_tol(pr * 1e-18).scale(1.0 / (PI * w.lambda).sqrt());
    let mut failure: Option<Error> = None;
    let outer = |t: f64| -> f64 {
        if failure.is_some() || t > T_CUTOFF {
            return 0.0;
        }
        let big_t = t.exp_m1();
        let g = if lambda_int > 0.0 {
            match big_g_integral(cfg.alpha_m, t) {
                Ok(g) => g,
                Err(e) => {
                    failure = Some(e);
                    return 0.0;
                }
            }
        } else {
            0.0
        };
        let f = |x: f64| {
            let j = w.joint(x);
            if j == 0.0 {
                return 0.0;
            }
            j * (-big_t * noise_over_power * x.powf(alpha) - PI * lambda_int * x * x * g).exp()
        };
        match integrate_semi_infinite_with(f, 0.0, &inner) {
            Ok(r) => r.value,
            Err(crate::quadrature::QuadError::NonConvergence { best }) => best.value.re,
            Err(e) => {
                failure = Some(e.into());
                0.0
            }
        }
    };
    let res = integrate_semi_infinite_with(outer, 0.0, &outer_options(rel_tol, pr));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(res?.value)
}

/// Average rate `τ` from the elementary double integral.
pub fn avg_rate_quadrature(cfg: &NetworkConfig, q: RateQuery) -> Result<f64> {
    let pr = query_probability_quadrature(cfg, q)?;
    if pr < MIN_PROBABILITY {
        return Err(Error::ZeroProbabilityCase { case: q.mode.case() });
    }
    Ok(cfg.bandwidth(q.serving_tier()) * rate_mass_quadrature(cfg, q)? / pr)
}

/// ξ for the serving link of a query at threshold t.
pub fn serving_threshold(cfg: &NetworkConfig, q: RateQuery, t: f64) -> f64 {
    xi_threshold(cfg, q.serving_tier(), q.direction, t)
}

/// Spectral efficiencies (nats/s/Hz) of both access modes and their components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEfficiencyReport {
    pub se_ul_decoupled: f64,
    pub se_dl_decoupled: f64,
    pub se_ul_coupled: f64,
    pub se_dl_coupled: f64,
    /// Pr(Case1..Case4).
    pub prob: [f64; 4],
    pub prob_mcell: f64,
    /// τ/W per case (index = case − 1); `None` for empty cases.
    pub rate_ul: [Option<f64>; 4],
    pub rate_dl: [Option<f64>; 4],
    /// τ/W of the coupled macro mode.
    pub coupled_mcell_ul: Option<f64>,
    pub coupled_mcell_dl: Option<f64>,
}

impl SpectralEfficiencyReport {
    pub fn uplink_gain(&self) -> f64 {
        self.se_ul_decoupled - self.se_ul_coupled
    }
}

pub fn spectral_efficiency(cfg: &NetworkConfig) -> Result<SpectralEfficiencyReport> {
    spectral_efficiency_with(cfg, &RateOptions::default())
}

pub fn spectral_efficiency_with(cfg: &NetworkConfig, opts: &RateOptions) -> Result<SpectralEfficiencyReport> {
    use LinkDirection::{Dl, Ul};
    cfg.validate()?;
    let prob = crate::association::case_probabilities(cfg)?;
    let prob_mcell = prob_mcell_coupled(cfg)?;
    let queries = [
        RateQuery::new(RateMode::Case1, Ul),
        RateQuery::new(RateMode::Case2, Ul),
        RateQuery::new(RateMode::Case4, Ul),
        RateQuery::new(RateMode::Case1, Dl),
        RateQuery::new(RateMode::Case2, Dl),
        RateQuery::new(RateMode::Case4, Dl),
        RateQuery::new(RateMode::CoupledMcell, Ul),
        RateQuery::new(RateMode::CoupledMcell, Dl),
    ];
    let masses = crate::par_map(&queries, |q| rate_mass_closed_with(cfg, *q, opts));
    let m: Vec<f64> = masses.into_iter().collect::<Result<_>>()?;
    let per = |mass: f64, p: f64| if p >= MIN_PROBABILITY { Some(mass / p) } else { None };
    Ok(SpectralEfficiencyReport {
        se_ul_decoupled: m[0] + m[1] + m[2],
        se_dl_decoupled: m[3] + m[4] + m[5],
        se_ul_coupled: m[6] + m[2],
        se_dl_coupled: m[7] + m[5],
        prob,
        prob_mcell,
        rate_ul: [per(m[0], prob[0]), per(m[1], prob[1]), None, per(m[2], prob[3])],
        rate_dl: [per(m[3], prob[0]), per(m[4], prob[1]), None, per(m[5], prob[3])],
        coupled_mcell_ul: per(m[6], prob_mcell),
        coupled_mcell_dl: per(m[7], prob_mcell),
    })
}
