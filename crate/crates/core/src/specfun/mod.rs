//! Special functions: log-gamma, digamma, Gauss ₂F₁ on the negative axis,
//! univariate Fox H and the bivariate H used by the rate expressions.

mod bivariate;
pub mod dd;
mod foxh;
mod hyp2f1;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::QuadError;

pub use bivariate::{fox_h_bivariate, fox_h_bivariate_with, BivariateHParams, BivariateOptions};
pub use dd::DoubleDouble;
pub use foxh::{fox_h, fox_h_scaled, FoxHParams, ScaledValue};
pub use hyp2f1::gauss_2f1;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecError {
    #[error("gamma pole at {0}")]
    Pole(Complex64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no valid contour: {0}")]
    Contour(String),
    #[error("series did not converge: {0}")]
    Series(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

const LANCZOS_G_HALF: f64 = 5.242_187_5; // 607/128 + 1/2
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// Bernoulli terms B_{2k} / (2k(2k-1)) of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_tail(z: Complex64) -> Complex64 {
    let w = z.inv();
    let w2 = w * w;
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        acc = acc * w2 + c;
    }
    acc * w
}

fn stirling_tail_real(x: f64) -> f64 {
    let w = 1.0 / x;
    let w2 = w * w;
    let mut acc = 0.0;
    for &c in STIRLING.iter().rev() {
        acc = acc * w2 + c;
    }
    acc * w
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn ln_gamma_right(z: Complex64) -> Complex64 {
    if z.norm() >= 15.0 {
        (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_tail(z)
    } else {
        let tmp = z + LANCZOS_G_HALF;
        let mut ser = Complex64::new(LANCZOS_C0, 0.0);
        let mut y = z;
        for &c in LANCZOS.iter() {
            y += 1.0;
            ser += c / y;
        }
        (z + 0.5) * tmp.ln() - tmp + (ser * SQRT_2PI).ln() - z.ln()
    }
}

// ln sin(πz) without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if z.im > 20.0 {
        // sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz})
        -i * PI * z + Complex64::new(0.5f64.ln(), PI / 2.0) + (-(2.0 * i * PI * z).exp()).ln_1p()
    } else if z.im < -20.0 {
        ln_sin_pi(z.conj()).conj()
    } else {
        (z * PI).sin().ln()
    }
}

trait Ln1p {
    fn ln_1p(self) -> Self;
}

impl Ln1p for Complex64 {
    fn ln_1p(self) -> Self {
        if self.norm() < 1e-4 {
            self - self * self / 2.0 + self * self * self / 3.0
        } else {
            (self + 1.0).ln()
        }
    }
}

/// Principal-branch `ln Γ(z)`.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64, SpecError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecError::InvalidInput(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && is_nonpositive_integer(z.re) {
        return Err(SpecError::Pole(z));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        let one_minus = Complex64::new(1.0, 0.0) - z;
        let v = Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(one_minus);
        // keep the imaginary part continuous with the principal branch
        Ok(fix_branch(v, z))
    }
}

// Reflection gives ln Γ only modulo 2πi; pick the representative that
// matches the asymptotic imaginary part Im[(z-½)ln z - z].
fn fix_branch(v: Complex64, z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(v.re, 0.0);
    }
    let target = if z.norm() > 1.0 {
        ((z - 0.5) * z.ln() - z).im
    } else {
        -(z.ln()).im - 0.5772156649015329 * z.im
    };
    let k = ((target - v.im) / (2.0 * PI)).round();
    Complex64::new(v.re, v.im + 2.0 * PI * k)
}

/// `ln Γ(a + iv) − ln Γ(a)` for real `a`, accurate even when `ln Γ(a)` is large.
pub fn ln_gamma_vertical(a: f64, v: f64) -> Result<Complex64, SpecError> {
    if v == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if a >= 12.0 {
        let r = v / a;
        let l1 = Complex64::new(0.5 * (r * r).ln_1p(), r.atan());
        let iv = Complex64::new(0.0, v);
        let ds = stirling_tail(Complex64::new(a, v)) - stirling_tail_real(a);
        Ok(l1 * (a - 0.5) + iv * (a.ln() + l1) - iv + ds)
    } else {
        Ok(ln_gamma_complex(Complex64::new(a, v))? - ln_gamma_complex(Complex64::new(a, 0.0))?)
    }
}

/// `ln |Γ(x)|` for real `x`.
pub fn ln_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x >= 0.5 {
        if x >= 15.0 {
            (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_tail_real(x)
        } else {
            let tmp = x + LANCZOS_G_HALF;
            let mut ser = LANCZOS_C0;
            let mut y = x;
            for &c in LANCZOS.iter() {
                y += 1.0;
                ser += c / y;
            }
            (x + 0.5) * tmp.ln() - tmp + (SQRT_2PI * ser / x).ln()
        }
    } else {
        PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x)
    }
}

/// Sign of `Γ(x)` for real non-pole `x`.
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || is_nonpositive_integer(x) || (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    gamma_sign(x) * ln_gamma(x).exp()
}

/// `1/Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        gamma_sign(x) * (-ln_gamma(x)).exp()
    }
}

/// `ln Γ(x)` in double-double for `x > 0`.
pub fn ln_gamma_dd(x: DoubleDouble) -> DoubleDouble {
    let xf = x.to_f64();
    if xf >= 15.0 {
        (x - 0.5) * x.ln() - x + dd::HALF_LN_2PI + stirling_tail_real(xf)
    } else {
        DoubleDouble::new(ln_gamma(x.hi)) + digamma(x.hi) * x.lo
    }
}

/// Digamma for real `x` (not a pole).
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        if x == x.round() {
            return f64::NAN;
        }
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 16.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let w = 1.0 / (y * y);
    let series = w * (1.0 / 12.0 - w * (1.0 / 120.0 - w * (1.0 / 252.0 - w * (1.0 / 240.0 - w / 132.0))));
    acc + y.ln() - 0.5 / y - series
}

/// Trigamma for real `x` (not a pole).
pub fn trigamma(x: f64) -> f64 {
    if x <= 0.0 {
        if x == x.round() {
            return f64::NAN;
        }
        let s = (PI * x).sin();
        return -trigamma(1.0 - x) + PI * PI / (s * s);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 16.0 {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let w = 1.0 / y;
    let w2 = w * w;
    let series = w + 0.5 * w2 + w * w2 * (1.0 / 6.0 - w2 * (1.0 / 30.0 - w2 * (1.0 / 42.0 - w2 * (1.0 / 30.0 - w2 * 5.0 / 66.0))));
    acc + series
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ln_gamma_known_points() {
        assert!(ln_gamma_complex(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = ln_gamma_complex(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-14);
        assert!(matches!(ln_gamma_complex(c(-3.0, 0.0)), Err(SpecError::Pole(_))));
        assert!(matches!(ln_gamma_complex(c(0.0, 0.0)), Err(SpecError::Pole(_))));
    }

    #[test]
    fn ln_gamma_recurrence() {
        let z = c(2.0, 3.0);
        let lhs = ln_gamma_complex(z + 1.0).unwrap();
        let rhs = ln_gamma_complex(z).unwrap() + z.ln();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn ln_gamma_matches_reference_values() {
        // loggamma reference values (50-digit arithmetic)
        let cases = [
            (c(2.0, 3.0), c(-2.092_851_753_092_733_5, 2.302_396_543_466_868)),
            (c(0.3, -7.5), c(-11.264_889_713_443_322, -7.300_504_415_025_125)),
            (c(-2.5, 1.0), c(-2.344_190_652_465_592_4, -8.304_127_986_657_926)),
            (c(40.0, 150.0), c(-36.333_162_801_113_87, 658.499_675_722_558_3)),
            (c(-30.5, -0.25), c(-75.506_577_404_650_37, 96.530_861_913_638_2)),
        ];
        for (z, want) in cases {
            let got = ln_gamma_complex(z).unwrap();
            let tol = 1e-13 * want.norm().max(1.0);
            assert!((got - want).norm() < tol, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn vertical_difference_consistent() {
        for &(a, v) in &[(0.7, 3.0), (11.0, -5.0), (12.5, 40.0), (300.0, 1e3), (2e6, 3e3)] {
            let d = ln_gamma_vertical(a, v).unwrap();
            let direct = ln_gamma_complex(c(a, v)).unwrap() - ln_gamma_complex(c(a, 0.0)).unwrap();
            let tol = 1e-13 * (ln_gamma(a).abs() + direct.norm()).max(1.0);
            assert!((d - direct).norm() < tol, "{a},{v}: {d} vs {direct}");
        }
    }

    #[test]
    fn real_gamma_and_sign() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert_eq!(recip_gamma(-2.0), 0.0);
        assert!((gamma(-1.5) - 4.0 / 3.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn digamma_trigamma_values() {
        assert!((digamma(1.0) + 0.577_215_664_901_532_9).abs() < 1e-14);
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((digamma(-0.5) - 0.036_489_973_978_576_52).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_dd_large_argument() {
        let v = ln_gamma_dd(DoubleDouble::new(1e9));
        let want = DoubleDouble { hi: 19_723_265_827.503_716, lo: 1.255_840_004_839_192e-6 };
        assert!((v - want).to_f64().abs() < 1e-12, "{:?}", v - want);
        let small = ln_gamma_dd(DoubleDouble::new(3.0));
        assert!((small.to_f64() - 2f64.ln()).abs() < 1e-15);
    }
}
