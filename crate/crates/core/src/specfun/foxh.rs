use num_complex::Complex64;

use super::dd::DoubleDouble;
use super::{digamma, gamma_sign, ln_gamma, ln_gamma_dd, ln_gamma_vertical, trigamma, SpecError};
use crate::quadrature::{integrate_vertical_line_with, LineOptions};

/// Parameters of `H^{m,n}_{p,q}[z | (a_i, A_i); (b_j, B_j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoxHParams {
    m: usize,
    n: usize,
    upper: Vec<(f64, f64)>,
    lower: Vec<(f64, f64)>,
}

/// `mantissa · exp(log_scale)`; keeps values far outside the f64 range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub log_scale: DoubleDouble,
}

impl ScaledValue {
    pub fn from_log(log_value: DoubleDouble) -> Self {
        ScaledValue { mantissa: 1.0, log_scale: log_value }
    }

    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.to_f64().exp()
    }

    /// `ln |value|`.
    pub fn ln_abs(&self) -> DoubleDouble {
        self.log_scale + self.mantissa.abs().ln()
    }

    /// `|self/other − 1|`.
    pub fn rel_diff(&self, other: &ScaledValue) -> f64 {
        let shift = (self.log_scale - other.log_scale).to_f64();
        (self.mantissa / other.mantissa * shift.exp() - 1.0).abs()
    }
}

impl FoxHParams {
    pub fn new(m: usize, n: usize, upper: Vec<(f64, f64)>, lower: Vec<(f64, f64)>) -> Result<Self, SpecError> {
        if n > upper.len() || m > lower.len() {
            return Err(SpecError::InvalidInput(format!("need n ≤ p and m ≤ q (m={m}, n={n})")));
        }
        if m + n == 0 {
            return Err(SpecError::InvalidInput("m + n must be positive".into()));
        }
        for &(a, big) in upper.iter().chain(lower.iter()) {
            if !(big > 0.0 && big.is_finite() && a.is_finite()) {
                return Err(SpecError::InvalidInput(format!("bad parameter pair ({a}, {big})")));
            }
        }
        let params = FoxHParams { m, n, upper, lower };
        let (lo, hi) = params.strip();
        if !(lo < hi) {
            return Err(SpecError::Contour(format!("pole families overlap: strip ({lo}, {hi}) is empty")));
        }
        if params.decay_rate() <= 0.0 {
            return Err(SpecError::Contour("integrand does not decay along vertical lines".into()));
        }
        Ok(params)
    }

    /// `H^{1,0}_{0,1}[z | ; (0, c)] = e^{-z^{1/c}} / c`.
    pub fn exponential(c: f64) -> Result<Self, SpecError> {
        Self::new(1, 0, vec![], vec![(0.0, c)])
    }

    /// `H^{1,1}_{1,1}[z | (0, ½); (0, β)]`.
    pub fn association(beta: f64) -> Result<Self, SpecError> {
        Self::new(1, 1, vec![(0.0, 0.5)], vec![(0.0, beta)])
    }

    /// Open interval of admissible contour abscissae.
    pub fn strip(&self) -> (f64, f64) {
        let lo = self.lower[..self.m].iter().map(|&(b, bb)| -b / bb).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.upper[..self.n].iter().map(|&(a, aa)| (1.0 - a) / aa).fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    fn decay_rate(&self) -> f64 {
        let num: f64 = self.lower[..self.m].iter().chain(self.upper[..self.n].iter()).map(|p| p.1).sum();
        let den: f64 = self.lower[self.m..].iter().chain(self.upper[self.n..].iter()).map(|p| p.1).sum();
        num - den
    }

    // Re ln of the integrand on the real axis, and its first two derivatives.
    fn phi(&self, sigma: f64, ln_z: f64) -> (f64, f64, f64) {
        let mut v = -sigma * ln_z;
        let mut d1 = -ln_z;
        let mut d2 = 0.0;
        for &(b, bb) in &self.lower[..self.m] {
            let x = b + bb * sigma;
            v += ln_gamma(x);
            d1 += bb * digamma(x);
            d2 += bb * bb * trigamma(x);
        }
        for &(a, aa) in &self.upper[..self.n] {
            let x = 1.0 - a - aa * sigma;
            v += ln_gamma(x);
            d1 -= aa * digamma(x);
            d2 += aa * aa * trigamma(x);
        }
        for &(b, bb) in &self.lower[self.m..] {
            let x = 1.0 - b - bb * sigma;
            v -= ln_gamma(x);
            d1 += bb * digamma(x);
            d2 -= bb * bb * trigamma(x);
        }
        for &(a, aa) in &self.upper[self.n..] {
            let x = a + aa * sigma;
            v -= ln_gamma(x);
            d1 -= aa * digamma(x);
            d2 -= aa * aa * trigamma(x);
        }
        (v, d1, d2)
    }

    /// Contour abscissa: the minimiser of the real log-integrand inside the
    /// strip, kept a tenth of a pole spacing away from either pole family.
    fn contour(&self, ln_z: f64) -> f64 {
        let (lo, hi) = self.strip();
        let spacing = self.lower[..self.m]
            .iter()
            .chain(self.upper[..self.n].iter())
            .map(|p| 1.0 / p.1)
            .fold(f64::INFINITY, f64::min);
        let width = hi - lo;
        let margin = 0.1 * if width.is_finite() { width.min(spacing) } else { spacing };
        let mut left = lo + margin;
        let mut right = hi - margin;
        let d1 = |s: f64| self.phi(s, ln_z).1;
        if !left.is_finite() {
            let mut step = 1.0;
            left = right - step;
            while d1(left) > 0.0 && left.is_finite() {
                step *= 2.0;
                left = right - step;
            }
        }
        if !right.is_finite() {
            let mut step = 1.0;
            right = left + step;
            while d1(right) < 0.0 && right.is_finite() {
                step *= 2.0;
                right = left + step;
            }
        }
        if d1(left) >= 0.0 {
            return left;
        }
        if d1(right) <= 0.0 {
            return right;
        }
        for _ in 0..200 {
            let mid = 0.5 * (left + right);
            if mid <= left || mid >= right {
                break;
            }
            if d1(mid) < 0.0 {
                left = mid;
            } else {
                right = mid;
            }
        }
        0.5 * (left + right)
    }
}

/// `H^{m,n}_{p,q}[z]` as a scaled value (no overflow or underflow).
pub fn fox_h_scaled(params: &FoxHParams, z: f64) -> Result<ScaledValue, SpecError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(SpecError::InvalidInput(format!("z = {z} must be positive and finite")));
    }
    let ln_z_dd = DoubleDouble::new(z).ln();
    let ln_z = ln_z_dd.to_f64();
    let sigma = params.contour(ln_z);
    let m = params.m;
    let n = params.n;

    // factors as (real part of argument at y = 0, imaginary slope, sign of exponent)
    let mut factors: Vec<(DoubleDouble, f64, f64)> = Vec::new();
    for &(b, bb) in &params.lower[..m] {
        factors.push((DoubleDouble::prod(bb, sigma) + b, bb, 1.0));
    }
    for &(a, aa) in &params.upper[..n] {
        factors.push((DoubleDouble::sum(1.0, -a) - DoubleDouble::prod(aa, sigma), -aa, 1.0));
    }
    for &(b, bb) in &params.lower[m..] {
        factors.push((DoubleDouble::sum(1.0, -b) - DoubleDouble::prod(bb, sigma), -bb, -1.0));
    }
    for &(a, aa) in &params.upper[n..] {
        factors.push((DoubleDouble::prod(aa, sigma) + a, aa, -1.0));
    }

    let mut log_scale = -(ln_z_dd * sigma);
    let mut sign = 1.0;
    for &(arg, _, e) in &factors {
        let x = arg.to_f64();
        let lg = if x > 0.0 { ln_gamma_dd(arg) } else { DoubleDouble::new(ln_gamma(x)) };
        sign *= gamma_sign(x);
        log_scale = if e > 0.0 { log_scale + lg } else { log_scale - lg };
    }

    let curvature = params.phi(sigma, ln_z).2.abs();
    let width = if curvature > 0.0 { 1.0 / curvature.sqrt() } else { 0.0 };
    let half_height = (12.0 * width).max(40.0);

    let args: Vec<(f64, f64, f64)> = factors.iter().map(|&(a, s, e)| (a.to_f64(), s, e)).collect();
    let mut failure = None;
    let integrand = |s: Complex64| -> Complex64 {
        let y = s.im;
        let mut acc = Complex64::new(0.0, -y * ln_z);
        for &(a, slope, e) in &args {
            match ln_gamma_vertical(a, slope * y) {
                Ok(d) => acc += d * e,
                Err(err) => {
                    failure = Some(err);
                    return Complex64::new(0.0, 0.0);
                }
            }
        }
        acc.exp()
    };
    let opts = LineOptions { rel_tol: 1e-12, abs_tol: 1e-16, max_doublings: 4, conj_symmetric: true };
    let res = integrate_vertical_line_with(integrand, sigma, half_height, &opts);
    if let Some(err) = failure {
        return Err(err);
    }
    let res = res?;
    Ok(ScaledValue { mantissa: sign * res.value.re, log_scale })
}

/// `H^{m,n}_{p,q}[z]` by a Mellin–Barnes integral along a vertical line.
pub fn fox_h(params: &FoxHParams, z: f64) -> Result<f64, SpecError> {
    Ok(fox_h_scaled(params, z)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_kernel() {
        let p = FoxHParams::exponential(1.0).unwrap();
        let v = fox_h(&p, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12, "{v}");
        let p = FoxHParams::exponential(0.5).unwrap();
        let v = fox_h(&p, 2.0).unwrap();
        assert!((v - 2.0 * (-4.0f64).exp()).abs() < 1e-12, "{v}");
    }

    #[test]
    fn equal_exponent_association_kernel() {
        let p = FoxHParams::association(0.5).unwrap();
        for &z in &[0.05, 0.5, 1.0, 3.0, 40.0] {
            let v = fox_h(&p, z).unwrap();
            let want = 2.0 / (1.0 + z * z);
            assert!(((v - want) / want).abs() < 1e-10, "{z}: {v} vs {want}");
        }
    }

    #[test]
    fn kernel_identity_across_scales() {
        for &c in &[1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0] {
            let p = FoxHParams::exponential(c).unwrap();
            for k in 0..30 {
                let z = 10f64.powf(-3.0 + 6.0 * k as f64 / 29.0);
                let h = fox_h_scaled(&p, z).unwrap();
                let inv_c = DoubleDouble::new(1.0) / c;
                let log_ref = inv_c.ln() - (DoubleDouble::new(z).ln() * inv_c).exp();
                let rel = h.rel_diff(&ScaledValue::from_log(log_ref));
                assert!(rel < 1e-8, "c={c} z={z}: rel {rel}");
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(FoxHParams::new(1, 0, vec![], vec![(0.0, -1.0)]), Err(SpecError::InvalidInput(_))));
        assert!(matches!(FoxHParams::new(2, 0, vec![], vec![(0.0, 1.0)]), Err(SpecError::InvalidInput(_))));
        // Γ(s)Γ(-s): poles of both families meet at 0
        assert!(matches!(
            FoxHParams::new(1, 1, vec![(1.0, 1.0)], vec![(0.0, 1.0)]),
            Err(SpecError::Contour(_))
        ));
        let p = FoxHParams::exponential(1.0).unwrap();
        assert!(fox_h(&p, 0.0).is_err());
    }

    #[test]
    fn contour_stays_inside_strip() {
        let p = FoxHParams::association(0.375).unwrap();
        for &z in &[1e-6f64, 1e-2, 1.0, 1e2, 1e6] {
            let s = p.contour(z.ln());
            assert!(s > 0.0 && s < 2.0, "{z}: {s}");
        }
    }
}
