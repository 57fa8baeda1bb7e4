//! Bivariate H-function
//!
//! Ĥ(k; x, y) = (2πi)⁻² ∫∫ Γ(β_{k+1}s) Γ(β_{k+2}w) Γ(2β_k − β_k s − β_k w) x^{−s} y^{−w} ds dw
//!
//! on contours Re s = c₁ > 0, Re w = c₂ > 0, c₁ + c₂ < 2. It satisfies
//!
//! ∫₀^∞ x e^{−(ξ_c x)^{1/β_k}} e^{−(ξ_a x)^{1/β_{k+1}}} e^{−(ξ_b x)^{1/β_{k+2}}} dx
//!     = β_k β_{k+1} β_{k+2} ξ_c^{−2} Ĥ(k; ξ_a/ξ_c, ξ_b/ξ_c).
//!
//! Evaluated with the trapezoid rule on a square grid in (Im s, Im w); the
//! integrand factorises as A(u)·B(v)·C(u+v), so a grid of N² points costs
//! only O(N) gamma evaluations.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::dd::DoubleDouble;
use super::foxh::ScaledValue;
use super::{ln_gamma, ln_gamma_vertical, SpecError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateHParams {
    pub k_index: u8,
    pub beta_k: f64,
    pub beta_k1: f64,
    pub beta_k2: f64,
}

impl BivariateHParams {
    pub fn new(k_index: u8, beta_k: f64, beta_k1: f64, beta_k2: f64) -> Result<Self, SpecError> {
        if k_index != 1 && k_index != 4 {
            return Err(SpecError::InvalidInput(format!("k_index must be 1 or 4, got {k_index}")));
        }
        for b in [beta_k, beta_k1, beta_k2] {
            if !(b > 0.0 && b < 2.0) {
                return Err(SpecError::InvalidInput(format!("exponent ratio {b} outside (0, 2)")));
            }
        }
        Ok(BivariateHParams { k_index, beta_k, beta_k1, beta_k2 })
    }

    /// The (β₁, β₂, β₃) or (β₄, β₅, β₆) triple for pathloss exponents `alpha_m`, `alpha_s`.
    pub fn from_exponents(k_index: u8, alpha_m: f64, alpha_s: f64) -> Result<Self, SpecError> {
        match k_index {
            1 => Self::new(1, 1.0 / alpha_m, alpha_s / (2.0 * alpha_m), 0.5),
            4 => Self::new(4, 1.0 / alpha_s, alpha_m / (2.0 * alpha_s), 0.5),
            _ => Err(SpecError::InvalidInput(format!("k_index must be 1 or 4, got {k_index}"))),
        }
    }

    pub fn product(&self) -> f64 {
        self.beta_k * self.beta_k1 * self.beta_k2
    }

    fn phi(&self, c1: f64, c2: f64, lx: f64, ly: f64) -> f64 {
        ln_gamma(self.beta_k1 * c1) + ln_gamma(self.beta_k2 * c2) + ln_gamma(self.beta_k * (2.0 - c1 - c2))
            - c1 * lx
            - c2 * ly
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BivariateOptions {
    /// Target error relative to the largest integrand value on the contour.
    pub tol: f64,
    /// Minimum distance of the contour from any pole family.
    pub margin: f64,
}

impl Default for BivariateOptions {
    fn default() -> Self {
        BivariateOptions { tol: 1e-12, margin: 0.3 }
    }
}

fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - R * (b - a);
    let mut x2 = a + R * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - R * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + R * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

// Normalised factor exp(lnΓ(a + i·slope·t) − lnΓ(a) − i·t·ln_arg) on t = k·h, k ≥ 0,
// extended until its modulus drops below `cut`.
fn factor_table(a: f64, slope: f64, ln_arg: f64, h: f64, cut: f64, max_len: usize) -> Result<Vec<Complex64>, SpecError> {
    let mut out = Vec::new();
    for k in 0..max_len {
        let t = k as f64 * h;
        let v = (ln_gamma_vertical(a, slope * t)? - Complex64::new(0.0, t * ln_arg)).exp();
        out.push(v);
        if v.norm() < cut && k > 0 {
            return Ok(out);
        }
    }
    Err(SpecError::Contour(format!("integrand decays too slowly (a = {a}, slope = {slope})")))
}

/// `Ĥ(k; x, y)` with default options.
pub fn fox_h_bivariate(params: &BivariateHParams, x: f64, y: f64) -> Result<f64, SpecError> {
    Ok(fox_h_bivariate_with(params, x, y, &BivariateOptions::default())?.value())
}

/// `Ĥ(k; x, y)` as a scaled value.
pub fn fox_h_bivariate_with(
    params: &BivariateHParams,
    x: f64,
    y: f64,
    opts: &BivariateOptions,
) -> Result<ScaledValue, SpecError> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(SpecError::InvalidInput(format!("arguments must be positive and finite, got ({x}, {y})")));
    }
    if !(opts.tol > 0.0 && opts.tol < 1e-2) || !(opts.margin > 0.0 && opts.margin < 2.0 / 3.0) {
        return Err(SpecError::InvalidInput("bad bivariate options".into()));
    }
    let lx = x.ln();
    let ly = y.ln();
    let mg = opts.margin;

    // contour at the minimum of the real log-integrand over the shrunken triangle
    let inner = |c1: f64| golden_min(|c2| params.phi(c1, c2, lx, ly), mg, 2.0 - mg - c1, 60);
    let c1 = golden_min(|c1| params.phi(c1, inner(c1), lx, ly), mg, 2.0 - 2.0 * mg, 60);
    let c2 = inner(c1);
    let phi0 = params.phi(c1, c2, lx, ly);

    let gap = 2.0 - c1 - c2;
    let d = 0.85 * c1.min(c2).min(gap);
    let eps = -opts.tol.ln() + 2.0;
    let h = 2.0 * PI * d / (eps + d * (lx.abs() + ly.abs()));
    let cut = opts.tol * 0.1;
    let max_len = 4_000_000;

    let a_tab = factor_table(params.beta_k1 * c1, params.beta_k1, lx, h, cut, max_len)?;
    let b_tab = factor_table(params.beta_k2 * c2, params.beta_k2, ly, h, cut, max_len)?;
    let c_tab = factor_table(params.beta_k * gap, -params.beta_k, 0.0, h, cut, max_len)?;

    // two-sided tables: index j + nb for b, k + nc for c
    let nb = b_tab.len() - 1;
    let nc = c_tab.len() - 1;
    let two_sided = |tab: &[Complex64]| -> Vec<Complex64> {
        tab.iter().rev().map(|z| z.conj()).chain(tab.iter().skip(1).copied()).collect()
    };
    let b_full = two_sided(&b_tab);
    let c_full = two_sided(&c_tab);

    // (u, v) -> (-u, -v) conjugates the integrand: sum rows u ≥ 0 with weight 2
    let mut total = 0.0;
    for (i, a) in a_tab.iter().enumerate() {
        // j ranges over [-nb, nb] ∩ [-i - nc, nc - i]
        let j_lo = (-(nb as i64)).max(-(i as i64) - nc as i64);
        let j_hi = (nb as i64).min(nc as i64 - i as i64);
        if j_lo > j_hi {
            continue;
        }
        let len = (j_hi - j_lo + 1) as usize;
        let b_start = (j_lo + nb as i64) as usize;
        let c_start = (i as i64 + j_lo + nc as i64) as usize;
        let bs = &b_full[b_start..b_start + len];
        let cs = &c_full[c_start..c_start + len];
        let (mut re, mut im) = (0.0, 0.0);
        for (b, c) in bs.iter().zip(cs) {
            re += b.re * c.re - b.im * c.im;
            im += b.re * c.im + b.im * c.re;
        }
        let w = if i == 0 { 1.0 } else { 2.0 };
        total += w * (a.re * re - a.im * im);
    }
    let mantissa = total * h * h / (4.0 * PI * PI);
    Ok(ScaledValue { mantissa, log_scale: DoubleDouble::new(phi0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_semi_infinite_with, QuadOptions};

    // ξ_c = 1: (β_k β_{k+1} β_{k+2})⁻¹ ∫ x e^{-x^{1/β_k}} e^{-(a x)^{1/β_{k+1}}} e^{-(b x)^{1/β_{k+2}}} dx
    fn product_oracle(p: &BivariateHParams, a: f64, b: f64) -> f64 {
        let f = |t: f64| {
            t * (-(t.powf(1.0 / p.beta_k)) - (a * t).powf(1.0 / p.beta_k1) - (b * t).powf(1.0 / p.beta_k2)).exp()
        };
        let r = integrate_semi_infinite_with(f, 0.0, &QuadOptions::with_rel_tol(1e-12).scale(0.5)).unwrap();
        r.value / p.product()
    }

    #[test]
    fn matches_product_integral() {
        let p = BivariateHParams::from_exponents(4, 3.0, 4.0).unwrap();
        let got = fox_h_bivariate(&p, 0.7, 0.3).unwrap();
        let want = product_oracle(&p, 0.7, 0.3);
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
        let p1 = BivariateHParams::from_exponents(1, 3.0, 2.0).unwrap();
        for &(a, b) in &[(0.1, 10.0), (5.0, 0.2), (1.0, 1.0), (30.0, 40.0)] {
            let got = fox_h_bivariate(&p1, a, b).unwrap();
            let want = product_oracle(&p1, a, b);
            assert!(((got - want) / want).abs() < 1e-8, "({a},{b}): {got} vs {want}");
        }
    }

    #[test]
    fn small_first_argument_limit() {
        let p = BivariateHParams::from_exponents(1, 3.0, 4.0).unwrap();
        let got = fox_h_bivariate(&p, 1e-7, 0.8).unwrap();
        let f = |t: f64| t * (-(t.powf(1.0 / p.beta_k)) - (0.8 * t).powf(1.0 / p.beta_k2)).exp();
        let two = integrate_semi_infinite_with(f, 0.0, &QuadOptions::with_rel_tol(1e-12)).unwrap().value / p.product();
        assert!(((got - two) / two).abs() < 1e-5, "{got} vs {two}");
    }

    #[test]
    fn relabelling_symmetry() {
        let p = BivariateHParams::from_exponents(1, 3.0, 4.0).unwrap();
        let q = BivariateHParams::new(1, p.beta_k, p.beta_k2, p.beta_k1).unwrap();
        let a = fox_h_bivariate(&p, 0.6, 2.5).unwrap();
        let b = fox_h_bivariate(&q, 2.5, 0.6).unwrap();
        assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let p = BivariateHParams::from_exponents(4, 3.0, 4.0).unwrap();
        assert!(fox_h_bivariate(&p, 0.0, 1.0).is_err());
        assert!(fox_h_bivariate(&p, 1.0, -1.0).is_err());
        assert!(BivariateHParams::new(2, 0.5, 0.5, 0.5).is_err());
        assert!(BivariateHParams::new(1, 0.0, 0.5, 0.5).is_err());
    }
}
