//! Monte Carlo validation: PPP deployments around a typical UE at the origin,
//! power-based association, and SINR/SNR-based rates.
//!
//! Every realization draws from its own ChaCha8 stream keyed by
//! (seed, realization index), and all sums are kept in fixed point, so the
//! result does not depend on how realizations are split across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal, Poisson};
use serde::Serialize;

use crate::distances::SUPPORTED;
use crate::error::{Error, Result};
use crate::model::{AssociationCase, LinkDirection, NetworkConfig, Tier};

const CHUNK: u64 = 1024;
const MAX_RESAMPLES: u32 = 1000;

/// Exact, order-independent accumulator: value·2⁶⁴ rounded into an i128.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FixedSum(i128);

impl FixedSum {
    const SCALE: f64 = 18_446_744_073_709_551_616.0;

    pub fn add(&mut self, x: f64) {
        self.0 += (x * Self::SCALE).round() as i128;
    }

    pub fn merge(&mut self, other: FixedSum) {
        self.0 += other.0;
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / Self::SCALE
    }
}

/// Count, sum and sum of squares of a sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Moments {
    pub count: u64,
    pub sum: FixedSum,
    pub sum_sq: FixedSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum.merge(o.sum);
        self.sum_sq.merge(o.sum_sq);
    }

    /// Mean over the pushed samples (NaN when empty).
    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Standard error of [`Self::mean`].
    pub fn std_error(&self) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        let var = ((self.sum_sq.value() / n - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    /// Mean over `n` realizations, counting absent ones as zero.
    pub fn mean_over(&self, n: u64) -> f64 {
        self.sum.value() / n as f64
    }

    pub fn std_error_over(&self, n: u64) -> f64 {
        let nf = n as f64;
        let m = self.mean_over(n);
        let var = ((self.sum_sq.value() / nf - m * m) * nf / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McOptions {
    pub shadowing: bool,
    pub collect_distances: bool,
}


#[derive(Debug, Clone, Default, PartialEq)]
pub struct McResult {
    pub n_realizations: u64,
    /// Deployments redrawn because a tier had no BS inside the disk.
    pub resampled: u64,
    pub case_counts: [u64; 4],
    /// ln(1 + SINR) of the decoupled links, per case (index = case − 1).
    pub ul_rate: [Moments; 4],
    pub dl_rate: [Moments; 4],
    /// Coupled uplink ln(1 + SINR), indexed by the downlink tier (0 = Mcell, 1 = Scell).
    pub coupled_ul: [Moments; 2],
    /// Per-realization ln(1 + SINR)/W of each mode.
    pub se_ul_decoupled: Moments,
    pub se_ul_coupled: Moments,
    pub se_dl: Moments,
    /// Paired difference of the two uplink spectral efficiencies.
    pub ul_gain: Moments,
    /// Serving distances per supported (case, tier), in realization order.
    pub distances: [Vec<f64>; 4],
}

impl McResult {
    pub fn merge(&mut self, o: &McResult) {
        self.n_realizations += o.n_realizations;
        self.resampled += o.resampled;
        for i in 0..4 {
            self.case_counts[i] += o.case_counts[i];
            self.ul_rate[i].merge(&o.ul_rate[i]);
            self.dl_rate[i].merge(&o.dl_rate[i]);
            self.distances[i].extend_from_slice(&o.distances[i]);
        }
        for i in 0..2 {
            self.coupled_ul[i].merge(&o.coupled_ul[i]);
        }
        self.se_ul_decoupled.merge(&o.se_ul_decoupled);
        self.se_ul_coupled.merge(&o.se_ul_coupled);
        self.se_dl.merge(&o.se_dl);
        self.ul_gain.merge(&o.ul_gain);
    }

    pub fn frequency(&self, case: AssociationCase) -> f64 {
        self.case_counts[case.index()] as f64 / self.n_realizations as f64
    }

    /// Binomial standard error of [`Self::frequency`].
    pub fn frequency_std_error(&self, case: AssociationCase) -> f64 {
        let p = self.frequency(case);
        (p * (1.0 - p) / self.n_realizations as f64).sqrt()
    }

    /// Moments of ln(1 + SINR) for a case and direction.
    pub fn rate(&self, case: AssociationCase, dir: LinkDirection) -> &Moments {
        match dir {
            LinkDirection::Ul => &self.ul_rate[case.index()],
            LinkDirection::Dl => &self.dl_rate[case.index()],
        }
    }

    /// Moments of ln(1 + SINR) for the coupled macro mode.
    pub fn coupled_mcell(&self, dir: LinkDirection) -> Moments {
        match dir {
            LinkDirection::Ul => self.coupled_ul[0],
            LinkDirection::Dl => {
                let mut m = self.dl_rate[0];
                m.merge(&self.dl_rate[1]);
                m
            }
        }
    }

    pub fn distance_samples(&self, case: AssociationCase, tier: Tier) -> &[f64] {
        match SUPPORTED.iter().position(|&p| p == (case, tier)) {
            Some(i) => &self.distances[i],
            None => &[],
        }
    }

    pub fn summary(&self) -> McSummary {
        let n = self.n_realizations;
        McSummary {
            n_realizations: n,
            resampled: self.resampled,
            case_counts: self.case_counts,
            se_ul_decoupled: self.se_ul_decoupled.mean_over(n),
            se_ul_coupled: self.se_ul_coupled.mean_over(n),
            se_dl_decoupled: self.se_dl.mean_over(n),
            se_dl_coupled: self.se_dl.mean_over(n),
            ul_gain: self.ul_gain.mean_over(n),
            ul_gain_std_error: self.ul_gain.std_error_over(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub n_realizations: u64,
    pub resampled: u64,
    pub case_counts: [u64; 4],
    pub se_ul_decoupled: f64,
    pub se_ul_coupled: f64,
    pub se_dl_decoupled: f64,
    pub se_dl_coupled: f64,
    pub ul_gain: f64,
    pub ul_gain_std_error: f64,
}

/// Generator for realization `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Homogeneous PPP on the disk of radius `radius` centred at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    if !(density > 0.0 && radius > 0.0 && density.is_finite() && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("density {density} and radius {radius} must be positive")));
    }
    let n = poisson(density * PI * radius * radius, rng);
    Ok((0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let th = 2.0 * PI * rng.random::<f64>();
            [r * th.cos(), r * th.sin()]
        })
        .collect())
}

/// Distances of PPP points in the annulus `inner < r ≤ outer`.
fn annulus_radii<R: Rng + ?Sized>(density: f64, inner: f64, outer: f64, rng: &mut R) -> Vec<f64> {
    if outer <= inner {
        return Vec::new();
    }
    let (a, b) = (inner * inner, outer * outer);
    let n = poisson(density * PI * (b - a), rng);
    (0..n).map(|_| (a + (b - a) * rng.random::<f64>()).sqrt()).collect()
}

/// One deployment seen from the typical UE. Only distances matter: the macro
/// tier is kept in full (it interferes), the small-cell tier only through its
/// strongest point (it is noise-limited).
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Distances of all macro BSs in the disk.
    pub mcell_radii: Vec<f64>,
    /// Linear shadowing factor of each macro link (empty without shadowing).
    pub mcell_shadow: Vec<f64>,
    /// Distance and shadowing factor of the strongest small cell.
    pub scell_nearest: f64,
    pub scell_shadow: f64,
    pub resampled: u32,
}

impl Realization {
    pub fn draw<R: Rng + ?Sized>(cfg: &NetworkConfig, shadowing: bool, rng: &mut R) -> Result<Self> {
        let mu = cfg.mu();
        let sigma = if shadowing { cfg.shadow_sigma_db } else { 0.0 };
        let mut resampled = 0;
        loop {
            let mcell_radii = annulus_radii(cfg.lambda_m, 0.0, mu, rng);
            let (scell_nearest, scell_shadow) = if sigma > 0.0 {
                strongest_shadowed(cfg.lambda_s, cfg.alpha_s, sigma, rng)
            } else {
                // nearest point of PPP(λ_S): P(X > r) = exp(−πλ_S r²)
                ((exp1(rng) / (PI * cfg.lambda_s)).sqrt(), 1.0)
            };
            if mcell_radii.is_empty() || scell_nearest > mu {
                resampled += 1;
                if resampled > MAX_RESAMPLES {
                    return Err(Error::InvalidArgument(format!("disk radius {mu} m too small: a tier stays empty")));
                }
                continue;
            }
            let mcell_shadow = if sigma > 0.0 {
                let n = Normal::new(0.0, sigma).expect("sigma validated");
                mcell_radii.iter().map(|_| db_to_linear(n.sample(rng))).collect()
            } else {
                Vec::new()
            };
            return Ok(Realization { mcell_radii, mcell_shadow, scell_nearest, scell_shadow, resampled });
        }
    }

    pub fn mcell_shadow(&self, i: usize) -> f64 {
        self.mcell_shadow.get(i).copied().unwrap_or(1.0)
    }

    /// Macro BS with the largest shadowed path gain: (index, distance, shadow).
    pub fn serving_mcell(&self, alpha_m: f64) -> (usize, f64, f64) {
        let mut best = (0, f64::INFINITY, 1.0);
        let mut best_gain = 0.0;
        for (i, &r) in self.mcell_radii.iter().enumerate() {
            let s = self.mcell_shadow(i);
            let g = s * r.powf(-alpha_m);
            if g > best_gain {
                best_gain = g;
                best = (i, r, s);
            }
        }
        best
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Strongest point of a PPP(λ) whose points carry i.i.d. lognormal marks S,
/// ranked by S·x^{−α}. In effective distance x·S^{−1/α} the marked process is
/// a PPP of density λ·E[S^{2/α}], and the mark of its nearest point is the
/// lognormal tilted by s^{2/α}.
fn strongest_shadowed<R: Rng + ?Sized>(lambda: f64, alpha: f64, sigma_db: f64, rng: &mut R) -> (f64, f64) {
    let sl = sigma_db * std::f64::consts::LN_10 / 10.0;
    let k = 2.0 / alpha;
    let eff_density = lambda * (0.5 * k * k * sl * sl).exp();
    let r_eff = (exp1(rng) / (PI * eff_density)).sqrt();
    let ln_s = Normal::new(k * sl * sl, sl).expect("sigma validated").sample(rng);
    let s = ln_s.exp();
    (r_eff * s.powf(1.0 / alpha), s)
}

/// Tier choice by biased received power; ties go to the macro tier.
pub fn associate(cfg: &NetworkConfig, xm: f64, xs: f64, shadow_m: f64, shadow_s: f64) -> AssociationCase {
    let pick = |pm: f64, ps: f64| {
        let rm = pm * shadow_m * xm.powf(-cfg.alpha_m);
        let rs = ps * shadow_s * xs.powf(-cfg.alpha_s);
        if rs > rm {
            Tier::Scell
        } else {
            Tier::Mcell
        }
    };
    let ul = pick(cfg.q_bar_m(), cfg.q_bar_s());
    let dl = pick(cfg.p_bar_m(), cfg.p_bar_s());
    AssociationCase::from_tiers(ul, dl)
}

struct LinkRates {
    ul_m: f64,
    ul_s: f64,
    dl_m: f64,
    dl_s: f64,
}

fn link_rates<R: Rng + ?Sized>(cfg: &NetworkConfig, real: &Realization, shadow: Option<&Normal<f64>>, rng: &mut R) -> LinkRates {
    let (serving, xm, sm) = real.serving_mcell(cfg.alpha_m);
    let xs = real.scell_nearest;
    let am = cfg.alpha_m;
    let (nm, ns) = (cfg.noise_m(), cfg.noise_s());

    // downlink macro: every other macro BS interferes
    let mut i_dl = 0.0;
    for (i, &r) in real.mcell_radii.iter().enumerate() {
        if i != serving {
            i_dl += cfg.p_bar_m() * real.mcell_shadow(i) * exp1(rng) * r.powf(-am);
        }
    }
    let dl_m = cfg.p_bar_m() * sm * exp1(rng) * xm.powf(-am) / (nm + i_dl);

    // uplink macro: interfering UEs outside the serving distance around the BS
    let mut i_ul = 0.0;
    for r in annulus_radii(cfg.lambda_iu(), xm, cfg.mu(), rng) {
        let s = shadow.map_or(1.0, |n| db_to_linear(n.sample(rng)));
        i_ul += cfg.q_bar_m() * s * exp1(rng) * r.powf(-am);
    }
    let ul_m = cfg.q_bar_m() * sm * exp1(rng) * xm.powf(-am) / (nm + i_ul);

    let gain_s = real.scell_shadow * xs.powf(-cfg.alpha_s) / ns;
    let ul_s = cfg.q_bar_s() * exp1(rng) * gain_s;
    let dl_s = cfg.p_bar_s() * exp1(rng) * gain_s;
    LinkRates { ul_m: ul_m.ln_1p(), ul_s: ul_s.ln_1p(), dl_m: dl_m.ln_1p(), dl_s: dl_s.ln_1p() }
}

fn run_range(cfg: &NetworkConfig, seed: u64, range: std::ops::Range<u64>, opts: &McOptions) -> Result<McResult> {
    let mut out = McResult::default();
    let shadow = if opts.shadowing && cfg.shadow_sigma_db > 0.0 { Normal::new(0.0, cfg.shadow_sigma_db).ok() } else { None };
    for index in range {
        let mut rng = stream_rng(seed, index);
        let real = Realization::draw(cfg, opts.shadowing, &mut rng)?;
        let (_, xm, sm) = real.serving_mcell(cfg.alpha_m);
        let xs = real.scell_nearest;
        let case = associate(cfg, xm, xs, sm, real.scell_shadow);
        let rates = link_rates(cfg, &real, shadow.as_ref(), &mut rng);
        let ci = case.index();
        out.n_realizations += 1;
        out.resampled += real.resampled as u64;
        out.case_counts[ci] += 1;

        let ul_tier = case.serving_tier(LinkDirection::Ul);
        let dl_tier = case.serving_tier(LinkDirection::Dl);
        let (ul, ul_se) = match ul_tier {
            Tier::Mcell => (rates.ul_m, rates.ul_m / cfg.w_m),
            Tier::Scell => (rates.ul_s, rates.ul_s / cfg.w_s),
        };
        let (dl, dl_se) = match dl_tier {
            Tier::Mcell => (rates.dl_m, rates.dl_m / cfg.w_m),
            Tier::Scell => (rates.dl_s, rates.dl_s / cfg.w_s),
        };
        let (cul, cul_se, slot) = match dl_tier {
            Tier::Mcell => (rates.ul_m, rates.ul_m / cfg.w_m, 0),
            Tier::Scell => (rates.ul_s, rates.ul_s / cfg.w_s, 1),
        };
        out.ul_rate[ci].push(ul);
        out.dl_rate[ci].push(dl);
        out.coupled_ul[slot].push(cul);
        out.se_ul_decoupled.push(ul_se);
        out.se_ul_coupled.push(cul_se);
        out.se_dl.push(dl_se);
        out.ul_gain.push(ul_se - cul_se);

        if opts.collect_distances {
            for (k, &(c, t)) in SUPPORTED.iter().enumerate() {
                if c == case {
                    out.distances[k].push(if t == Tier::Mcell { xm } else { xs });
                }
            }
        }
    }
    Ok(out)
}

/// Runs realizations `0..n` under `seed`.
pub fn simulate(cfg: &NetworkConfig, n: u64, seed: u64, opts: &McOptions) -> Result<McResult> {
    simulate_range(cfg, 0..n, seed, opts)
}

/// Runs the realizations with indices in `range`; disjoint ranges merge exactly.
pub fn simulate_range(cfg: &NetworkConfig, range: std::ops::Range<u64>, seed: u64, opts: &McOptions) -> Result<McResult> {
    cfg.validate()?;
    if range.is_empty() {
        return Err(Error::InvalidArgument("at least one realization is required".into()));
    }
    let mut chunks = Vec::new();
    let mut start = range.start;
    while start < range.end {
        let end = (start - start % CHUNK + CHUNK).min(range.end);
        chunks.push(start..end);
        start = end;
    }
    let parts = crate::par_map(&chunks, |r| run_range(cfg, seed, r.clone(), opts));
    let mut out = McResult::default();
    for p in parts {
        out.merge(&p?);
    }
    Ok(out)
}

/// Empirical `E[exp(−s·I)]` for the interference seen by a macro link of
/// length `x` at threshold `t`: interferers of density λ_int(dir) on the
/// annulus `x < r ≤ radius` with unit-mean exponential fading, s = (e^t − 1)x^α/P.
/// Returns (mean, standard error).
pub fn laplace_interference_mc(
    cfg: &NetworkConfig,
    dir: LinkDirection,
    x: f64,
    t: f64,
    n: u64,
    radius: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(x > 0.0 && t > 0.0 && radius > x && n > 1) {
        return Err(Error::InvalidArgument("need x > 0, t > 0, radius > x and n > 1".into()));
    }
    let lambda = cfg.lambda_int(dir);
    let big_t = t.exp_m1();
    let am = cfg.alpha_m;
    let idx: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
    let parts = crate::par_map(&idx, |&c| {
        let mut m = Moments::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let mut rng = stream_rng(seed, i);
            let mut si = 0.0;
            for r in annulus_radii(lambda, x, radius, &mut rng) {
                si += big_t * exp1(&mut rng) * (x / r).powf(am);
            }
            m.push((-si).exp());
        }
        m
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok((total.mean(), total.std_error()))
}
