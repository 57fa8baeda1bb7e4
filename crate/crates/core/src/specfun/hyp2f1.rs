use super::{gamma_sign, ln_gamma, recip_gamma, SpecError};

const MAX_TERMS: usize = 200_000;

fn series(a: f64, b: f64, c: f64, x: f64) -> Result<f64, SpecError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 || (term.abs() <= 1e-17 * sum.abs() && n > 2) {
            return Ok(sum);
        }
    }
    Err(SpecError::Series(format!("2F1({a},{b};{c};{x}) after {MAX_TERMS} terms")))
}

// Γ(p)Γ(q)/(Γ(r)Γ(s)) with signs, zero if r or s is a pole.
fn gamma_ratio(p: f64, q: f64, r: f64, s: f64) -> f64 {
    let rr = recip_gamma(r) * recip_gamma(s);
    if rr == 0.0 {
        return 0.0;
    }
    gamma_sign(p) * gamma_sign(q) * gamma_sign(r) * gamma_sign(s) * (ln_gamma(p) + ln_gamma(q) - ln_gamma(r) - ln_gamma(s)).exp()
}

/// Gauss hypergeometric function `₂F₁(a, b; c; x)` for `x ≤ 0`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64, SpecError> {
    if c <= 0.0 && c == c.round() {
        return Err(SpecError::InvalidInput(format!("c = {c} is a non-positive integer")));
    }
    if !(x <= 0.0) {
        return Err(SpecError::InvalidInput(format!("x = {x} must be non-positive")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x >= -0.5 {
        return series(a, b, c, x);
    }
    let ab = a - b;
    if x < -9.0 && ab != ab.round() {
        // z -> 1/z connection formula
        let w = 1.0 / x;
        let t1 = gamma_ratio(c, b - a, b, c - a) * (-x).powf(-a) * series(a, a - c + 1.0, a - b + 1.0, w)?;
        let t2 = gamma_ratio(c, a - b, a, c - b) * (-x).powf(-b) * series(b, b - c + 1.0, b - a + 1.0, w)?;
        return Ok(t1 + t2);
    }
    // Pfaff: (1-x)^{-a} 2F1(a, c-b; c; x/(x-1))
    let w = x / (x - 1.0);
    Ok((1.0 - x).powf(-a) * series(a, c - b, c, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_interval, QuadOptions};

    #[test]
    fn zero_argument() {
        assert_eq!(gauss_2f1(1.0, 0.5, 1.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(gauss_2f1(1.0, 0.5, -2.0, -0.3), Err(SpecError::InvalidInput(_))));
        assert!(matches!(gauss_2f1(1.0, 0.5, 1.5, 0.3), Err(SpecError::InvalidInput(_))));
    }

    #[test]
    fn elementary_closed_forms() {
        // 2F1(1,1;2;x) = -ln(1-x)/x
        for &x in &[-0.2f64, -0.5, -0.9, -3.0, -20.0, -300.0] {
            let want = -(1.0 - x).ln() / x;
            let got = gauss_2f1(1.0, 1.0, 2.0, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "{x}: {got} vs {want}");
        }
        // 2F1(1/2,1;3/2;-x²) = atan(x)/x
        for &x in &[0.5f64, 2.0, 10.0, 300.0] {
            let want = x.atan() / x;
            let got = gauss_2f1(0.5, 1.0, 1.5, -x * x).unwrap();
            assert!(((got - want) / want).abs() < 1e-13, "{x}: {got} vs {want}");
        }
    }

    #[test]
    fn euler_integral_representation() {
        // 2F1(1, 1/3; 4/3; -1) = (1/3) ∫_0^1 t^{-2/3}/(1+t) dt = ∫_0^1 du/(1+u³)
        let want = integrate_interval(|u: f64| 1.0 / (1.0 + u * u * u), 0.0, 1.0, &QuadOptions::with_rel_tol(1e-14)).unwrap();
        let got = gauss_2f1(1.0, 1.0 / 3.0, 4.0 / 3.0, -1.0).unwrap();
        assert!((got - want.value).abs() < 1e-12, "{got} vs {}", want.value);
    }

    #[test]
    fn truncated_series_at_minus_half() {
        for &(b, c) in &[(1.0 / 3.0, 4.0 / 3.0), (0.5, 1.5), (0.2, 2.7), (1.5, 0.6)] {
            let mut term = 1.0;
            let mut sum = 1.0;
            for n in 0..200 {
                let nf = n as f64;
                term *= (1.0 + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * -0.5;
                sum += term;
            }
            let got = gauss_2f1(1.0, b, c, -0.5).unwrap();
            assert!((got - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn branches_agree_near_switch_points() {
        // continuity across x = -0.5 and x = -9
        for &(b, c) in &[(1.0 / 3.0, 4.0 / 3.0), (0.5, 1.5), (0.2, 1.2)] {
            for &x in &[-0.5, -9.0] {
                let lo = gauss_2f1(1.0, b, c, x - 1e-9).unwrap();
                let hi = gauss_2f1(1.0, b, c, x + 1e-9).unwrap();
                assert!((lo - hi).abs() < 1e-8 * lo.abs());
            }
        }
    }

    #[test]
    fn integral_form_on_long_range() {
        // ∫_0^T s^{-δ}/(1+s) ds = T^{1-δ}/(1-δ) · 2F1(1, 1-δ; 2-δ; -T)
        for &delta in &[0.8, 2.0 / 3.0, 0.5] {
            for &t in &[0.3f64, 5.0, 40.0, 2e4] {
                let f = |u: f64| {
                    let s = u.powf(1.0 / (1.0 - delta));
                    1.0 / ((1.0 - delta) * (1.0 + s))
                };
                let upper = t.powf(1.0 - delta);
                let direct = integrate_interval(f, 0.0, upper, &QuadOptions::with_rel_tol(1e-13)).unwrap().value;
                let via = t.powf(1.0 - delta) / (1.0 - delta) * gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -t).unwrap();
                assert!(((via - direct) / direct).abs() < 1e-10, "{delta} {t}: {via} vs {direct}");
            }
        }
    }
}
