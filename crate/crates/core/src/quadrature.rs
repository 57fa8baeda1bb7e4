//! Numerical integration: double-exponential (exp-sinh) rules for `[a, ∞)`,
//! adaptive Gauss–Kronrod on finite and mapped ranges, and vertical-line
//! contour integrals for Mellin–Barnes representations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Values an integrator can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn into_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn into_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn into_complex(self) -> Complex64 {
        self
    }
}

/// An integral estimate with its error bound and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T = f64> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature input: {0}")]
    InvalidInput(&'static str),
    /// Tolerance not met; `best` carries the last estimate (real results have `im == 0`).
    #[error("quadrature did not converge (estimate {:e}, error {:e})", best.value.re, best.abs_error_estimate)]
    NonConvergence { best: QuadResult<Complex64> },
    #[error("integrand returned a non-finite value at {0}")]
    NonFinite(f64),
}

impl QuadError {
    fn non_convergence<T: QuadValue>(r: QuadResult<T>) -> Self {
        QuadError::NonConvergence {
            best: QuadResult {
                value: r.value.into_complex(),
                abs_error_estimate: r.abs_error_estimate,
                evaluations: r.evaluations,
            },
        }
    }
}

pub type QuadOutcome<T = f64> = Result<QuadResult<T>, QuadError>;

/// Tolerances and limits shared by the integrators.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Characteristic length of the integrand; nodes of the semi-infinite rules
    /// are laid out around `lower + scale`.
    pub scale: f64,
    /// Known bound on `|f|`. Nodes whose weight times this bound is negligible are skipped.
    pub bound: Option<f64>,
    pub max_level: usize,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            scale: 1.0,
            bound: None,
            max_level: 9,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(QuadError::InvalidInput("rel_tol must lie in (0, 1)"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(QuadError::InvalidInput("abs_tol must be non-negative"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(QuadError::InvalidInput("scale must be positive and finite"));
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

// |sinh(t)| * pi/2 <= ~460 keeps exp(±pi/2 sinh t) inside [1e-200, 1e200].
const DE_T_MAX: f64 = 6.37;

/// `∫_lower^∞ f(x) dx` by the exp-sinh substitution `x = lower + exp(π/2·sinh τ)`.
pub fn integrate_semi_infinite<F>(f: F, lower: f64, rel_tol: f64) -> QuadOutcome
where
    F: FnMut(f64) -> f64,
{
    integrate_semi_infinite_with(f, lower, &QuadOptions::with_rel_tol(rel_tol))
}

pub fn integrate_semi_infinite_with<F>(mut f: F, lower: f64, opts: &QuadOptions) -> QuadOutcome
where
    F: FnMut(f64) -> f64,
{
    opts.validate()?;
    if !lower.is_finite() {
        return Err(QuadError::InvalidInput("lower limit must be finite"));
    }
    let scale = opts.scale;
    let mut evaluations = 0usize;
    // contribution of the node at tau; None when skipped
    let mut node = |tau: f64, evaluations: &mut usize| -> Result<f64, QuadError> {
        let u = FRAC_PI_2 * tau.sinh();
        let offset = scale * u.exp();
        let jac = FRAC_PI_2 * tau.cosh() * offset;
        if jac == 0.0 || !offset.is_finite() {
            return Ok(0.0);
        }
        if let Some(b) = opts.bound {
            if jac * b < opts.abs_tol * 1e-3 {
                return Ok(0.0);
            }
        }
        let x = lower + offset;
        let fx = f(x);
        *evaluations += 1;
        if fx.is_nan() {
            return Err(QuadError::NonFinite(x));
        }
        let term = fx * jac;
        if !term.is_finite() {
            return Err(QuadError::NonFinite(x));
        }
        Ok(term)
    };

    let h0 = 0.5;
    let n0 = (DE_T_MAX / h0).floor() as i64;
    let mut sum = 0.0;
    for k in -n0..=n0 {
        sum += node(k as f64 * h0, &mut evaluations)?;
    }
    let mut h = h0;
    let mut estimate = sum * h;
    let mut last_err = f64::INFINITY;
    for level in 1..=opts.max_level {
        h *= 0.5;
        let n = (DE_T_MAX / h).floor() as i64;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        // odd multiples of the new step only
        if k % 2 == 0 {
            k += 1;
        }
        while k <= n {
            sum += node(k as f64 * h, &mut evaluations)?;
            k += 2;
        }
        let next = sum * h;
        last_err = (next - estimate).abs();
        estimate = next;
        let floor = 8.0 * f64::EPSILON * estimate.abs();
        if level >= 3 && last_err <= opts.tolerance(estimate).max(floor) {
            return Ok(QuadResult {
                value: estimate,
                abs_error_estimate: last_err.max(floor),
                evaluations,
            });
        }
    }
    Err(QuadError::non_convergence(QuadResult {
        value: estimate,
        abs_error_estimate: last_err,
        evaluations,
    }))
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T, F>(f: &mut F, a: f64, b: f64) -> Result<(T, f64), QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite_value() {
        return Err(QuadError::NonFinite(center));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite_value() {
            return Err(QuadError::NonFinite(center - dx));
        }
        if !f2.is_finite_value() {
            return Err(QuadError::NonFinite(center + dx));
        }
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).magnitude();
    Ok((value, err))
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive Gauss–Kronrod on a finite interval (globally adaptive bisection).
pub fn integrate_interval<T, F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadOutcome<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    opts.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::InvalidInput("interval limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult { value: T::zero(), abs_error_estimate: 0.0, evaluations: 1 });
    }
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = v;
    let mut total_err = e;
    heap.push(Segment { a, b, value: v, err: e });
    let mut subdivisions = 1;
    loop {
        let floor = 50.0 * f64::EPSILON * total.magnitude();
        if total_err <= opts.tolerance(total.magnitude()).max(floor) {
            return Ok(QuadResult { value: total, abs_error_estimate: total_err, evaluations });
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(QuadError::non_convergence(QuadResult {
                value: total,
                abs_error_estimate: total_err,
                evaluations,
            }));
        }
        let worst = heap.pop().expect("non-empty segment heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(QuadError::non_convergence(QuadResult {
                value: total,
                abs_error_estimate: total_err,
                evaluations,
            }));
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.err + e1 + e2;
        if total_err < 0.0 {
            total_err = heap.iter().map(|s: &Segment<T>| s.err).sum::<f64>() + e1 + e2;
        }
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
}

/// `∫_lower^∞ f` by adaptive Gauss–Kronrod after the map `x = lower + s·u/(1−u)`.
///
/// Independent of [`integrate_semi_infinite`]; used to cross-check it.
pub fn integrate_semi_infinite_gk<F>(mut f: F, lower: f64, opts: &QuadOptions) -> QuadOutcome
where
    F: FnMut(f64) -> f64,
{
    opts.validate()?;
    let s = opts.scale;
    integrate_interval(
        |u: f64| {
            let one_minus = 1.0 - u;
            let x = lower + s * u / one_minus;
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * s / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// `∫_0^∞∫_0^∞ f(t, x) dx dt`, nested exp-sinh rules with the inner tolerance
/// one decade tighter than the outer one.
pub fn integrate_2d<F>(f: F, rel_tol: f64) -> QuadOutcome
where
    F: FnMut(f64, f64) -> f64,
{
    let opts = QuadOptions::with_rel_tol(rel_tol);
    integrate_2d_with(f, &opts, &QuadOptions::with_rel_tol(rel_tol * 0.1))
}

pub fn integrate_2d_with<F>(mut f: F, outer: &QuadOptions, inner: &QuadOptions) -> QuadOutcome
where
    F: FnMut(f64, f64) -> f64,
{
    outer.validate()?;
    inner.validate()?;
    let mut evaluations = 0usize;
    let mut inner_err = 0.0f64;
    let mut failure: Option<QuadError> = None;
    let res = integrate_semi_infinite_with(
        |t| {
            if failure.is_some() {
                return 0.0;
            }
            match integrate_semi_infinite_with(|x| f(t, x), 0.0, inner) {
                Ok(r) => {
                    evaluations += r.evaluations;
                    inner_err = inner_err.max(r.abs_error_estimate);
                    r.value
                }
                // judged below by its error contribution to the outer sum
                Err(QuadError::NonConvergence { best }) => {
                    evaluations += best.evaluations;
                    inner_err = inner_err.max(best.abs_error_estimate);
                    best.value.re
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        outer,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let r = res?;
    let out = QuadResult {
        value: r.value,
        abs_error_estimate: r.abs_error_estimate + inner_err,
        evaluations: evaluations.max(1),
    };
    if out.abs_error_estimate > outer.tolerance(out.value) {
        return Err(QuadError::non_convergence(out));
    }
    Ok(out)
}

/// Options for [`integrate_vertical_line_with`].
#[derive(Debug, Clone, Copy)]
pub struct LineOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of times the half-height may double before giving up.
    pub max_doublings: usize,
    /// `g(conj s) = conj g(s)`: integrate the upper half only.
    pub conj_symmetric: bool,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_doublings: 4, conj_symmetric: false }
    }
}

/// `(1/2πi) ∫_{c−i∞}^{c+i∞} g(s) ds`, truncated at `±H` with `H` doubled until
/// the added tail is below tolerance.
pub fn integrate_vertical_line<G>(g: G, real_part: f64, half_height: f64, rel_tol: f64) -> QuadOutcome<Complex64>
where
    G: FnMut(Complex64) -> Complex64,
{
    let opts = LineOptions { rel_tol, ..LineOptions::default() };
    integrate_vertical_line_with(g, real_part, half_height, &opts)
}

pub fn integrate_vertical_line_with<G>(
    mut g: G,
    real_part: f64,
    half_height: f64,
    opts: &LineOptions,
) -> QuadOutcome<Complex64>
where
    G: FnMut(Complex64) -> Complex64,
{
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(QuadError::InvalidInput("rel_tol must lie in (0, 1)"));
    }
    if !(half_height > 0.0 && half_height.is_finite() && real_part.is_finite()) {
        return Err(QuadError::InvalidInput("contour must be finite with positive half-height"));
    }
    let qopts = QuadOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_subdivisions: 20_000,
        ..QuadOptions::default()
    };
    let symmetric = opts.conj_symmetric;
    // (1/2πi) ds = dy / 2π
    let mut piece = |lo: f64, hi: f64| -> QuadOutcome<Complex64> {
        if symmetric {
            let r = integrate_interval(|y: f64| g(Complex64::new(real_part, y)).re / PI, lo, hi, &qopts)?;
            Ok(QuadResult {
                value: Complex64::new(r.value, 0.0),
                abs_error_estimate: r.abs_error_estimate,
                evaluations: r.evaluations,
            })
        } else {
            let r = integrate_interval(|y: f64| g(Complex64::new(real_part, y)) / (2.0 * PI), -hi, -lo, &qopts)?;
            let r2 = integrate_interval(|y: f64| g(Complex64::new(real_part, y)) / (2.0 * PI), lo, hi, &qopts)?;
            Ok(QuadResult {
                value: r.value + r2.value,
                abs_error_estimate: r.abs_error_estimate + r2.abs_error_estimate,
                evaluations: r.evaluations + r2.evaluations,
            })
        }
    };
    let mut h = half_height;
    let mut total = piece(0.0, h)?;
    for _ in 0..opts.max_doublings {
        let tail = piece(h, 2.0 * h)?;
        total.value += tail.value;
        total.abs_error_estimate += tail.abs_error_estimate;
        total.evaluations += tail.evaluations;
        h *= 2.0;
        let tol = (opts.rel_tol * total.value.norm()).max(opts.abs_tol);
        if tail.value.norm() <= tol {
            total.abs_error_estimate += tail.value.norm();
            return Ok(total);
        }
    }
    Err(QuadError::non_convergence(total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_integral_is_one() {
        let r = integrate_semi_infinite(|x| (-x).exp(), 0.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
        assert!(r.abs_error_estimate >= 0.0 && r.evaluations >= 1);
    }

    #[test]
    fn nearest_neighbour_pdf_normalises() {
        let lambda = 1e-4;
        let f = |x: f64| 2.0 * PI * lambda * x * (-PI * lambda * x * x).exp();
        let r = integrate_semi_infinite(f, 0.0, 1e-8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
        let scaled = integrate_semi_infinite_with(f, 0.0, &QuadOptions::with_rel_tol(1e-10).scale(56.0)).unwrap();
        assert!((scaled.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_integrators_agree_on_mixed_powers() {
        let f = |x: f64| x * (-x * x).exp() * (-x * x * x).exp();
        let de = integrate_semi_infinite(f, 0.0, 1e-12).unwrap();
        let gk = integrate_semi_infinite_gk(f, 0.0, &QuadOptions::with_rel_tol(1e-12)).unwrap();
        assert!((de.value - gk.value).abs() < 1e-8, "{} vs {}", de.value, gk.value);
        // frozen from both rules at 1e-12
        assert!((de.value - 0.263_595_212_236_354_2).abs() < 1e-10, "{}", de.value);
    }

    #[test]
    fn algebraic_tail_converges() {
        // ∫_1^∞ x^{-4/3} dx = 3
        let r = integrate_semi_infinite(|u| u.powf(-4.0 / 3.0), 1.0, 1e-10).unwrap();
        assert!((r.value - 3.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(matches!(
            integrate_semi_infinite(|x| (-x).exp(), 0.0, 0.0),
            Err(QuadError::InvalidInput(_))
        ));
        assert!(matches!(
            integrate_semi_infinite(|x| (-x).exp(), 0.0, 1.5),
            Err(QuadError::InvalidInput(_))
        ));
    }

    #[test]
    fn nan_integrand_is_reported() {
        assert!(matches!(
            integrate_semi_infinite(|_| f64::NAN, 0.0, 1e-6),
            Err(QuadError::NonFinite(_))
        ));
    }

    #[test]
    fn divergent_integral_does_not_converge() {
        let r = integrate_semi_infinite(|x| 1.0 / (1.0 + x), 0.0, 1e-8);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. })));
    }

    #[test]
    fn finite_interval_polynomial_exact() {
        let r = integrate_interval(|x: f64| 3.0 * x * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn gamma_line_integral_gives_exp_minus_one() {
        // (1/2πi)∫ Γ(s) 1^{-s} ds = e^{-1}
        let g = |s: Complex64| crate::specfun::ln_gamma_complex(s).unwrap().exp();
        let r = integrate_vertical_line(g, 0.5, 40.0, 1e-10).unwrap();
        assert!((r.value.re - (-1.0f64).exp()).abs() < 1e-9, "{}", r.value);
        assert!(r.value.im.abs() < 1e-9);
    }

    #[test]
    fn beta_kernel_line_integral() {
        // (1/2πi)∫ Γ(s)Γ(1-s) x^{-s} ds = 1/(1+x)
        let x: f64 = 1.0;
        let g = |s: Complex64| {
            (crate::specfun::ln_gamma_complex(s).unwrap() + crate::specfun::ln_gamma_complex(1.0 - s).unwrap()
                - s * x.ln())
            .exp()
        };
        let r = integrate_vertical_line(g, 0.5, 40.0, 1e-10).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-8, "{}", r.value);
        let sym = integrate_vertical_line_with(
            g,
            0.5,
            40.0,
            &LineOptions { conj_symmetric: true, ..LineOptions::default() },
        )
        .unwrap();
        assert!((sym.value.re - 0.5).abs() < 1e-8);
    }

    #[test]
    fn zero_integrands() {
        let r = integrate_vertical_line_with(|_| Complex64::new(0.0, 0.0), 0.5, 40.0, &LineOptions {
            abs_tol: 1e-300,
            ..LineOptions::default()
        })
        .unwrap();
        assert_eq!(r.value, Complex64::new(0.0, 0.0));
        let r2 = integrate_2d(|_, _| 0.0, 1e-6).unwrap();
        assert_eq!(r2.value, 0.0);
    }

    #[test]
    fn line_integral_without_decay_fails() {
        let r = integrate_vertical_line(|_| Complex64::new(1.0, 0.0), 0.5, 40.0, 1e-8);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. })));
    }

    #[test]
    fn separable_2d() {
        let r = integrate_2d(|t, x| (-t).exp() * (-x).exp(), 1e-8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_dimensional_with_analytic_inner() {
        // inner ∫ x e^{-x²(1+t)} dx = 1/(2(1+t)); outer ∫ 1/(2(1+t)^2) dt = 1/2
        let r = integrate_2d(|t, x| x * (-x * x * (1.0 + t)).exp() / (1.0 + t), 1e-8).unwrap();
        assert!((r.value - 0.5).abs() < 1e-8, "{}", r.value);
        let inner = integrate_semi_infinite(|x| x * (-x * x * 3.0).exp(), 0.0, 1e-10).unwrap();
        assert!((inner.value - 1.0 / 6.0).abs() < 1e-10);
    }
}
