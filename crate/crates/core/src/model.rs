//! Network configuration, unit conversion and the derived constants shared by
//! the association, distance and rate expressions.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },
    #[error("macro downlink power P̄_M = {p_m} mW must exceed small-cell P̄_S = {p_s} mW")]
    PowerOrdering { p_m: f64, p_s: f64 },
    #[error("uplink ratio Q̄_S/Q̄_M = {uplink} is below the downlink ratio P̄_S/P̄_M = {downlink}")]
    RatioOrdering { uplink: f64, downlink: f64 },
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssociationCase {
    /// UL and DL to the macro cell.
    Case1,
    /// UL to the small cell, DL to the macro cell.
    Case2,
    /// UL to the macro cell, DL to the small cell (empty under the power ordering).
    Case3,
    /// UL and DL to the small cell.
    Case4,
}

impl AssociationCase {
    pub const ALL: [AssociationCase; 4] =
        [AssociationCase::Case1, AssociationCase::Case2, AssociationCase::Case3, AssociationCase::Case4];

    pub fn from_tiers(ul: Tier, dl: Tier) -> Self {
        match (ul, dl) {
            (Tier::Mcell, Tier::Mcell) => AssociationCase::Case1,
            (Tier::Scell, Tier::Mcell) => AssociationCase::Case2,
            (Tier::Mcell, Tier::Scell) => AssociationCase::Case3,
            (Tier::Scell, Tier::Scell) => AssociationCase::Case4,
        }
    }

    pub fn serving_tier(self, dir: LinkDirection) -> Tier {
        match (self, dir) {
            (AssociationCase::Case1, _) => Tier::Mcell,
            (AssociationCase::Case4, _) => Tier::Scell,
            (AssociationCase::Case2, LinkDirection::Ul) | (AssociationCase::Case3, LinkDirection::Dl) => Tier::Scell,
            (AssociationCase::Case2, LinkDirection::Dl) | (AssociationCase::Case3, LinkDirection::Ul) => Tier::Mcell,
        }
    }

    pub fn index(self) -> usize {
        match self {
            AssociationCase::Case1 => 0,
            AssociationCase::Case2 => 1,
            AssociationCase::Case3 => 2,
            AssociationCase::Case4 => 3,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for AssociationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    Mcell,
    Scell,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Mcell => "mcell",
            Tier::Scell => "scell",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkDirection {
    Ul,
    Dl,
}

impl fmt::Display for LinkDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkDirection::Ul => "ul",
            LinkDirection::Dl => "dl",
        })
    }
}

/// Deployment and radio parameters. Powers in dBm, gains in dBi, densities in
/// points per m², distances in metres, bandwidths in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub p_m_dbm: f64,
    pub p_s_dbm: f64,
    pub q_m_dbm: f64,
    pub q_s_dbm: f64,
    pub g_m_dbi: f64,
    pub g_s_dbi: f64,
    pub alpha_m: f64,
    pub alpha_s: f64,
    pub lambda_m: f64,
    pub lambda_s: f64,
    /// Density of interfering uplink UEs; `None` means `lambda_m`.
    pub lambda_iu: Option<f64>,
    /// UE density. Carried for completeness; no expression depends on it.
    pub lambda_u: Option<f64>,
    pub noise_m_dbm: f64,
    pub noise_s_dbm: f64,
    pub w_m: f64,
    pub w_s: f64,
    /// Simulation disk radius; `None` means `10/√(πλ_M)`.
    pub mu: Option<f64>,
    pub shadow_sigma_db: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig::table_nlos()
    }
}

impl NetworkConfig {
    /// System-parameter table with the NLOS small-cell exponent (α_S = 4).
    pub fn table_nlos() -> Self {
        NetworkConfig {
            p_m_dbm: 46.0,
            p_s_dbm: 20.0,
            q_m_dbm: 20.0,
            q_s_dbm: 20.0,
            g_m_dbi: 0.0,
            g_s_dbi: 18.0,
            alpha_m: 3.0,
            alpha_s: 4.0,
            lambda_m: 1e-6,
            lambda_s: 1e-5,
            lambda_iu: None,
            lambda_u: None,
            noise_m_dbm: 0.0,
            noise_s_dbm: 0.0,
            w_m: 1.0,
            w_s: 1.0,
            mu: None,
            shadow_sigma_db: 0.0,
        }
    }

    /// Same table with the LOS small-cell exponent (α_S = 2).
    pub fn table_los() -> Self {
        NetworkConfig { alpha_s: 2.0, ..NetworkConfig::table_nlos() }
    }

    pub fn with_density_ratio(&self, ratio: f64) -> Self {
        NetworkConfig { lambda_s: self.lambda_m * ratio, ..self.clone() }
    }

    pub fn density_ratio(&self) -> f64 {
        self.lambda_s / self.lambda_m
    }

    /// P̄_M = P_M·G_M in mW.
    pub fn p_bar_m(&self) -> f64 {
        db_to_linear(self.p_m_dbm + self.g_m_dbi)
    }

    pub fn p_bar_s(&self) -> f64 {
        db_to_linear(self.p_s_dbm + self.g_s_dbi)
    }

    pub fn q_bar_m(&self) -> f64 {
        db_to_linear(self.q_m_dbm + self.g_m_dbi)
    }

    pub fn q_bar_s(&self) -> f64 {
        db_to_linear(self.q_s_dbm + self.g_s_dbi)
    }

    pub fn noise_m(&self) -> f64 {
        db_to_linear(self.noise_m_dbm)
    }

    pub fn noise_s(&self) -> f64 {
        db_to_linear(self.noise_s_dbm)
    }

    pub fn lambda_iu(&self) -> f64 {
        self.lambda_iu.unwrap_or(self.lambda_m)
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or_else(|| 10.0 / (PI * self.lambda_m).sqrt())
    }

    pub fn density(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Mcell => self.lambda_m,
            Tier::Scell => self.lambda_s,
        }
    }

    pub fn alpha(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Mcell => self.alpha_m,
            Tier::Scell => self.alpha_s,
        }
    }

    pub fn bandwidth(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Mcell => self.w_m,
            Tier::Scell => self.w_s,
        }
    }

    pub fn noise(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Mcell => self.noise_m(),
            Tier::Scell => self.noise_s(),
        }
    }

    /// Effective transmit power (mW) of the link served by `tier` in direction `dir`.
    pub fn link_power(&self, tier: Tier, dir: LinkDirection) -> f64 {
        match (tier, dir) {
            (Tier::Mcell, LinkDirection::Ul) => self.q_bar_m(),
            (Tier::Scell, LinkDirection::Ul) => self.q_bar_s(),
            (Tier::Mcell, LinkDirection::Dl) => self.p_bar_m(),
            (Tier::Scell, LinkDirection::Dl) => self.p_bar_s(),
        }
    }

    /// Density of the co-channel interferers seen by a macro link.
    pub fn lambda_int(&self, dir: LinkDirection) -> f64 {
        match dir {
            LinkDirection::Ul => self.lambda_iu(),
            LinkDirection::Dl => self.lambda_m,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn finite(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::InvalidValue { field, reason: format!("{v} is not finite") })
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::InvalidValue { field, reason: format!("{v} must be positive") })
            }
        }
        for (field, v) in [
            ("p_m_dbm", self.p_m_dbm),
            ("p_s_dbm", self.p_s_dbm),
            ("q_m_dbm", self.q_m_dbm),
            ("q_s_dbm", self.q_s_dbm),
            ("g_m_dbi", self.g_m_dbi),
            ("g_s_dbi", self.g_s_dbi),
            ("noise_m_dbm", self.noise_m_dbm),
            ("noise_s_dbm", self.noise_s_dbm),
        ] {
            finite(field, v)?;
        }
        positive("lambda_m", self.lambda_m)?;
        positive("lambda_s", self.lambda_s)?;
        positive("w_m", self.w_m)?;
        positive("w_s", self.w_s)?;
        if let Some(l) = self.lambda_iu {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(ConfigError::InvalidValue { field: "lambda_iu", reason: format!("{l} must be non-negative") });
            }
        }
        if let Some(l) = self.lambda_u {
            positive("lambda_u", l)?;
        }
        if let Some(m) = self.mu {
            positive("mu", m)?;
        }
        if !(self.alpha_m > 2.0 && self.alpha_m.is_finite()) {
            return Err(ConfigError::InvalidValue { field: "alpha_m", reason: format!("{} must exceed 2", self.alpha_m) });
        }
        if !(self.alpha_s >= 2.0 && self.alpha_s.is_finite()) {
            return Err(ConfigError::InvalidValue { field: "alpha_s", reason: format!("{} must be at least 2", self.alpha_s) });
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return Err(ConfigError::InvalidValue {
                field: "shadow_sigma_db",
                reason: format!("{} must be non-negative", self.shadow_sigma_db),
            });
        }
        let (pm, ps) = (self.p_bar_m(), self.p_bar_s());
        if !(pm > ps) {
            return Err(ConfigError::PowerOrdering { p_m: pm, p_s: ps });
        }
        let uplink = self.q_bar_s() / self.q_bar_m();
        let downlink = ps / pm;
        if uplink < downlink * (1.0 - 1e-12) {
            return Err(ConfigError::RatioOrdering { uplink, downlink });
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedParams, ConfigError> {
        derive(self)
    }
}

/// Constants of the closed-form expressions, precomputed from a valid config.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub z1: f64,
    pub z2: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi4: f64,
    pub xi6: f64,
    /// β₁ … β₆ stored at indices 0 … 5.
    pub betas: [f64; 6],
    alpha_m: f64,
    lambda_m: f64,
    lambda_iu: f64,
}

impl DerivedParams {
    pub fn beta(&self, i: usize) -> f64 {
        self.betas[i - 1]
    }

    /// ξ₅(t) = √(π(λ_M + λ_int·G(t))).
    pub fn xi5(&self, t: f64, dir: LinkDirection) -> Result<f64, crate::specfun::SpecError> {
        let lambda_int = match dir {
            LinkDirection::Ul => self.lambda_iu,
            LinkDirection::Dl => self.lambda_m,
        };
        let g = if lambda_int > 0.0 { crate::rates::big_g_alpha(self.alpha_m, t)? } else { 0.0 };
        Ok((PI * (self.lambda_m + lambda_int * g)).sqrt())
    }
}

/// ξ_{dir,tier}(t) = ((e^t − 1)·σ²/power)^{1/α}.
pub fn xi_threshold(cfg: &NetworkConfig, tier: Tier, dir: LinkDirection, t: f64) -> f64 {
    (t.exp_m1() * cfg.noise(tier) / cfg.link_power(tier, dir)).powf(1.0 / cfg.alpha(tier))
}

pub fn derive(cfg: &NetworkConfig) -> Result<DerivedParams, ConfigError> {
    cfg.validate()?;
    let (am, as_) = (cfg.alpha_m, cfg.alpha_s);
    let root_m = (PI * cfg.lambda_m).sqrt();
    let root_s = (PI * cfg.lambda_s).sqrt();
    let (pm, ps, qm, qs) = (cfg.p_bar_m(), cfg.p_bar_s(), cfg.q_bar_m(), cfg.q_bar_s());
    let xi1 = root_m.powf(am / as_) * (qm / qs).powf(1.0 / as_);
    let xi3 = root_m.powf(am / as_) * (pm / ps).powf(1.0 / as_);
    let xi4 = root_s.powf(as_ / am) * (ps / pm).powf(1.0 / am);
    let xi6 = root_s.powf(as_ / am) * (qs / qm).powf(1.0 / am);
    Ok(DerivedParams {
        z1: xi1 / root_s,
        z2: xi3 / root_s,
        xi1,
        xi2: root_s,
        xi3,
        xi4,
        xi6,
        betas: [1.0 / am, as_ / (2.0 * am), 0.5, 1.0 / as_, am / (2.0 * as_), 0.5],
        alpha_m: am,
        lambda_m: cfg.lambda_m,
        lambda_iu: cfg.lambda_iu(),
    })
}
