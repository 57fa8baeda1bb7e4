//! Serving-distance laws conditioned on the association case.

use std::f64::consts::PI;

use rand::Rng;

use crate::association::{prob_case_closed, prob_case_quadrature};
use crate::error::{Error, Result};
use crate::model::{AssociationCase, NetworkConfig, Tier};
use crate::quadrature::{integrate_interval, integrate_semi_infinite_with, QuadOptions};

const TAIL_MASS: f64 = 1e-12;
const PANELS: usize = 1024;

/// Nearest-BS distance density of a PPP with density `lambda`, 2πλx·exp(−πλx²).
pub fn nearest_pdf(lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda * x * (-PI * lambda * x * x).exp()
}

/// Supported (case, tier) pairs.
pub const SUPPORTED: [(AssociationCase, Tier); 4] = [
    (AssociationCase::Case1, Tier::Mcell),
    (AssociationCase::Case2, Tier::Mcell),
    (AssociationCase::Case2, Tier::Scell),
    (AssociationCase::Case4, Tier::Scell),
];

/// Event that the other tier loses (or wins) the comparison, given the
/// serving-tier distance. Expressed as `exp(−c_lo x^p) − exp(−c_hi x^p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Window {
    pub lambda: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub power: f64,
}

impl Window {
    pub fn eval(&self, x: f64) -> f64 {
        let xp = x.powf(self.power);
        let a = (-self.c_lo * xp).exp();
        let b = if self.c_hi.is_finite() { (-self.c_hi * xp).exp() } else { 0.0 };
        (a - b).max(0.0)
    }

    /// f_{X_k}(x) times the window.
    pub fn joint(&self, x: f64) -> f64 {
        let base = nearest_pdf(self.lambda, x);
        if base == 0.0 {
            return 0.0;
        }
        base * self.eval(x)
    }
}

// exp(−πλ_other (power_other/power_serving)^{2/α_other} x^{2α_serving/α_other})
fn guard_coeff(cfg: &NetworkConfig, serving: Tier, ratio: f64) -> (f64, f64) {
    let other = match serving {
        Tier::Mcell => Tier::Scell,
        Tier::Scell => Tier::Mcell,
    };
    let a_o = cfg.alpha(other);
    let c = PI * cfg.density(other) * ratio.powf(2.0 / a_o);
    (c, 2.0 * cfg.alpha(serving) / a_o)
}

/// Window for the serving tier being the downlink macro tier (Case1 ∪ Case2).
pub(crate) fn mcell_downlink_window(cfg: &NetworkConfig) -> Window {
    let (c, p) = guard_coeff(cfg, Tier::Mcell, cfg.p_bar_s() / cfg.p_bar_m());
    Window { lambda: cfg.lambda_m, c_lo: c, c_hi: f64::INFINITY, power: p }
}

pub(crate) fn window(cfg: &NetworkConfig, case: AssociationCase, tier: Tier) -> Result<Window> {
    let unsupported = Error::UnsupportedPair { case, tier };
    let w = match (case, tier) {
        (AssociationCase::Case1, Tier::Mcell) => {
            let (c, p) = guard_coeff(cfg, Tier::Mcell, cfg.q_bar_s() / cfg.q_bar_m());
            Window { lambda: cfg.lambda_m, c_lo: c, c_hi: f64::INFINITY, power: p }
        }
        (AssociationCase::Case2, Tier::Mcell) => {
            let (c_p, p) = guard_coeff(cfg, Tier::Mcell, cfg.p_bar_s() / cfg.p_bar_m());
            let (c_q, _) = guard_coeff(cfg, Tier::Mcell, cfg.q_bar_s() / cfg.q_bar_m());
            Window { lambda: cfg.lambda_m, c_lo: c_p, c_hi: c_q, power: p }
        }
        (AssociationCase::Case2, Tier::Scell) => {
            let (c_q, p) = guard_coeff(cfg, Tier::Scell, cfg.q_bar_m() / cfg.q_bar_s());
            let (c_p, _) = guard_coeff(cfg, Tier::Scell, cfg.p_bar_m() / cfg.p_bar_s());
            Window { lambda: cfg.lambda_s, c_lo: c_q, c_hi: c_p, power: p }
        }
        (AssociationCase::Case4, Tier::Scell) => {
            let (c, p) = guard_coeff(cfg, Tier::Scell, cfg.p_bar_m() / cfg.p_bar_s());
            Window { lambda: cfg.lambda_s, c_lo: c, c_hi: f64::INFINITY, power: p }
        }
        _ => return Err(unsupported),
    };
    Ok(w)
}

/// Conditional serving-distance law with a tabulated CDF.
#[derive(Debug, Clone)]
pub struct ServingDistancePdf {
    pub case: AssociationCase,
    pub tier: Tier,
    pub normalization: f64,
    window: Window,
    x_max: f64,
    edges: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ServingDistancePdf {
    pub fn new(cfg: &NetworkConfig, case: AssociationCase, tier: Tier) -> Result<Self> {
        let window = window(cfg, case, tier)?;
        let normalization = prob_case_closed(cfg, case)?;
        let check = prob_case_quadrature(cfg, case)?;
        if (normalization - check).abs() > 1e-6 {
            return Err(Error::Mismatch { what: format!("Pr({case})"), closed: normalization, quadrature: check });
        }
        if normalization <= 0.0 {
            return Err(Error::ZeroProbabilityCase { case });
        }
        let x_max = (-TAIL_MASS.ln() / (PI * window.lambda)).sqrt();
        let opts = QuadOptions::with_rel_tol(1e-12).abs_tol(normalization * 1e-17);
        let mut edges = Vec::with_capacity(PANELS + 1);
        let mut cumulative = Vec::with_capacity(PANELS + 1);
        let mut acc = 0.0;
        edges.push(0.0);
        cumulative.push(0.0);
        for i in 1..=PANELS {
            // panels quadratic in i: finer near the origin where the window may switch on quickly
            let x = x_max * (i as f64 / PANELS as f64).powi(2);
            let a = *edges.last().unwrap();
            acc += integrate_interval(|s: f64| window.joint(s), a, x, &opts)?.value / normalization;
            edges.push(x);
            cumulative.push(acc);
        }
        Ok(ServingDistancePdf { case, tier, normalization, window, x_max, edges, cumulative })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.window.joint(x) / self.normalization
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.x_max {
            return (*self.cumulative.last().unwrap()).min(1.0);
        }
        let k = self.edges.partition_point(|&e| e <= x) - 1;
        let opts = QuadOptions::with_rel_tol(1e-12).abs_tol(1e-17);
        let part = integrate_interval(|s: f64| self.pdf(s), self.edges[k], x, &opts).map(|r| r.value).unwrap_or(0.0);
        (self.cumulative[k] + part).min(1.0)
    }

    /// Smallest x with cdf(x) ≥ p, by bisection inside the bracketing panel.
    pub fn quantile(&self, p: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let p = p.clamp(0.0, 1.0) * total;
        let k = self.cumulative.partition_point(|&c| c < p).clamp(1, PANELS);
        let (mut lo, mut hi) = (self.edges[k - 1], self.edges[k]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// ∫ x·pdf(x) dx.
    pub fn mean(&self) -> Result<f64> {
        let opts = QuadOptions::with_rel_tol(1e-10).scale(1.0 / (PI * self.window.lambda).sqrt());
        Ok(integrate_semi_infinite_with(|x| x * self.pdf(x), 0.0, &opts)?.value)
    }

    /// ∫ pdf(x) dx over [0, ∞), computed independently of the CDF table.
    pub fn total_mass(&self) -> Result<f64> {
        let opts = QuadOptions::with_rel_tol(1e-10).scale(1.0 / (PI * self.window.lambda).sqrt());
        Ok(integrate_semi_infinite_with(|x| self.pdf(x), 0.0, &opts)?.value)
    }

    /// Location of the maximum of the density, by golden-section search.
    pub fn mode(&self) -> f64 {
        // coarse scan first: the density can be steep near the origin
        let n = 400;
        let mut best = 0;
        let mut best_v = f64::MIN;
        for i in 1..n {
            let v = self.pdf(self.x_max * i as f64 / n as f64);
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        let (mut a, mut b) = (self.x_max * (best - 1) as f64 / n as f64, self.x_max * (best + 1) as f64 / n as f64);
        for _ in 0..100 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if self.pdf(m1) < self.pdf(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        0.5 * (a + b)
    }
}

pub fn pdf(cfg: &NetworkConfig, case: AssociationCase, tier: Tier, x: f64) -> Result<f64> {
    let w = window(cfg, case, tier)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let norm = prob_case_closed(cfg, case)?;
    if norm <= 0.0 {
        return Err(Error::ZeroProbabilityCase { case });
    }
    Ok(w.joint(x) / norm)
}

pub fn cdf(cfg: &NetworkConfig, case: AssociationCase, tier: Tier, x: f64) -> Result<f64> {
    Ok(ServingDistancePdf::new(cfg, case, tier)?.cdf(x))
}

pub fn sample<R: Rng + ?Sized>(cfg: &NetworkConfig, case: AssociationCase, tier: Tier, rng: &mut R) -> Result<f64> {
    Ok(ServingDistancePdf::new(cfg, case, tier)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use AssociationCase::*;

    #[test]
    fn unsupported_pairs() {
        let cfg = NetworkConfig::table_nlos();
        for (c, t) in [(Case1, Tier::Scell), (Case4, Tier::Mcell), (Case3, Tier::Mcell), (Case3, Tier::Scell)] {
            assert!(matches!(pdf(&cfg, c, t, 10.0), Err(Error::UnsupportedPair { .. })));
        }
    }

    #[test]
    fn normalised_and_zero_at_origin() {
        for cfg in [NetworkConfig::table_nlos(), NetworkConfig::table_los().with_density_ratio(5.0)] {
            for (c, t) in SUPPORTED {
                let d = ServingDistancePdf::new(&cfg, c, t).unwrap();
                assert_eq!(d.pdf(0.0), 0.0);
                assert!((d.total_mass().unwrap() - 1.0).abs() < 1e-6, "{c} {t}");
                assert!((d.cdf(1e9) - 1.0).abs() < 1e-6);
                assert_eq!(d.cdf(0.0), 0.0);
            }
        }
    }

    #[test]
    fn single_tier_limit() {
        let cfg = NetworkConfig::table_nlos().with_density_ratio(1e-9);
        for &x in &[50.0, 300.0, 900.0] {
            let got = pdf(&cfg, Case1, Tier::Mcell, x).unwrap();
            let want = nearest_pdf(cfg.lambda_m, x);
            assert!(((got - want) / want).abs() < 1e-6);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = ServingDistancePdf::new(&NetworkConfig::table_nlos(), Case2, Tier::Scell).unwrap();
        for &p in &[0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = d.quantile(p);
            assert!((d.cdf(x) - p).abs() < 1e-9, "{p}");
        }
        let m = d.mode();
        let c = d.cdf(m);
        assert!(c > 0.0 && c < 1.0);
    }
}
