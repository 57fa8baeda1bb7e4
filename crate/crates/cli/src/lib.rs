//! Scenario files, sweep execution and CSV/JSON output for the `hetnet` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hetnet_core::distances::{ServingDistancePdf, SUPPORTED};
use hetnet_core::montecarlo::{simulate, McOptions, McResult};
use hetnet_core::rates::{spectral_efficiency_with, RateOptions, SpectralEfficiencyReport};
use hetnet_core::specfun::BivariateOptions;
use hetnet_core::{association, AssociationCase, NetworkConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const THREADS_ENV: &str = "HETNET_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("scenario: {0}")]
    ConfigParse(String),
    #[error("i/o on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("computation failed: {0}")]
    Compute(#[from] hetnet_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ConfigParse(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Compute(_) => 5,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Nlos,
    Los,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    AssocProbs,
    DistancePdf,
    SpectralEfficiency,
}

impl OutputKind {
    pub fn file_name(self) -> &'static str {
        match self {
            OutputKind::AssocProbs => "assoc_probs.csv",
            OutputKind::DistancePdf => "distance_pdf.csv",
            OutputKind::SpectralEfficiency => "spectral_efficiency.csv",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub density_ratio: Option<Vec<f64>>,
    pub alpha_s: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    pub enabled: bool,
    pub n: u64,
    pub seed: u64,
    pub shadowing: bool,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec { enabled: false, n: 100_000, seed: 1, shadowing: false }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceSpec {
    /// Histogram bins per (case, tier); the pdf is tabulated at the bin centres.
    pub bins: usize,
    /// Upper end of the tabulated range, as a quantile of each law.
    pub upper_quantile: f64,
}

impl Default for DistanceSpec {
    fn default() -> Self {
        DistanceSpec { bins: 40, upper_quantile: 0.999 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    pub rate_rel_tol: f64,
    pub bivariate_tol: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec { rate_rel_tol: 1e-8, bivariate_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub base: toml::Table,
    #[serde(default)]
    pub sweep: SweepSpec,
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub distance: DistanceSpec,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mc_n: Option<u64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub profile: Option<Profile>,
}

/// One sweep point: λ_S/λ_M and the full configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub config: NetworkConfig,
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::ConfigParse(format!("sweep.{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::ConfigParse(format!("sweep.{name} must be finite and strictly increasing")));
    }
    Ok(())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        if s.outputs.is_empty() {
            return Err(CliError::ConfigParse("no outputs requested".into()));
        }
        match (&s.sweep.density_ratio, &s.sweep.alpha_s) {
            (Some(_), Some(_)) => {
                return Err(CliError::ConfigParse("sweep over density_ratio and alpha_s at once".into()));
            }
            (Some(v), None) => strictly_increasing("density_ratio", v)?,
            (None, Some(v)) => strictly_increasing("alpha_s", v)?,
            (None, None) => {}
        }
        if s.mc.n == 0 {
            return Err(CliError::ConfigParse("mc.n must be at least 1".into()));
        }
        if s.distance.bins == 0 || !(s.distance.upper_quantile > 0.0 && s.distance.upper_quantile < 1.0) {
            return Err(CliError::ConfigParse("distance.bins must be positive and upper_quantile in (0, 1)".into()));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Base configuration after the profile and overrides.
    pub fn base_config(&self, profile_override: Option<Profile>) -> Result<NetworkConfig, CliError> {
        let mut cfg: NetworkConfig =
            self.base.clone().try_into().map_err(|e: toml::de::Error| CliError::ConfigParse(e.to_string()))?;
        let profile = profile_override.unwrap_or(self.profile);
        if profile_override.is_some() || !self.base.contains_key("alpha_s") {
            cfg.alpha_s = match profile {
                Profile::Nlos => 4.0,
                Profile::Los => 2.0,
            };
        }
        Ok(cfg)
    }

    pub fn points(&self, profile_override: Option<Profile>) -> Result<Vec<SweepPoint>, CliError> {
        let base = self.base_config(profile_override)?;
        let pts: Vec<SweepPoint> = if let Some(v) = &self.sweep.density_ratio {
            v.iter().map(|&r| SweepPoint { ratio: r, config: base.with_density_ratio(r) }).collect()
        } else if let Some(v) = &self.sweep.alpha_s {
            v.iter()
                .map(|&a| SweepPoint { ratio: base.density_ratio(), config: NetworkConfig { alpha_s: a, ..base.clone() } })
                .collect()
        } else {
            vec![SweepPoint { ratio: base.density_ratio(), config: base }]
        };
        for p in &pts {
            p.config.validate().map_err(|e| CliError::ConfigParse(e.to_string()))?;
        }
        Ok(pts)
    }
}

/// Seed of sweep point `index`, derived from the run seed.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fmt(x: f64) -> String {
    format!("{x:.9e}")
}

struct PointResult {
    probs: [f64; 4],
    se: Option<SpectralEfficiencyReport>,
    mc: Option<McResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario_file: String,
    pub scenario: Option<Scenario>,
    pub points: Vec<SweepPoint>,
    pub seed: Option<u64>,
    pub mc_n: Option<u64>,
    pub threads: Option<usize>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub status: String,
    pub error: Option<String>,
    pub exit_code: i32,
}

/// Runs a scenario and writes the CSVs; the manifest is written by [`run_with_manifest`].
pub fn run(scenario: &Scenario, out_dir: &Path, ov: &Overrides, manifest: &mut Manifest) -> Result<(), CliError> {
    let points = scenario.points(ov.profile)?;
    manifest.points = points.clone();
    let mut mc = scenario.mc.clone();
    if let Some(n) = ov.mc_n {
        if n == 0 {
            return Err(CliError::Usage("--mc-n must be at least 1".into()));
        }
        mc.enabled = true;
        mc.n = n;
    }
    if let Some(s) = ov.seed {
        mc.seed = s;
    }
    manifest.seed = Some(mc.seed);
    manifest.mc_n = mc.enabled.then_some(mc.n);
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let want = |k: OutputKind| scenario.outputs.contains(&k);
    let rate_opts = RateOptions {
        rel_tol: scenario.tolerance.rate_rel_tol,
        bivariate: BivariateOptions { tol: scenario.tolerance.bivariate_tol, ..BivariateOptions::default() },
    };
    let need_se = want(OutputKind::SpectralEfficiency);
    let need_mc = mc.enabled && (want(OutputKind::AssocProbs) || need_se);
    let mc_opts = McOptions { shadowing: mc.shadowing, collect_distances: false };
    let indexed: Vec<(usize, &SweepPoint)> = points.iter().enumerate().collect();
    let results = hetnet_core::par_map(&indexed, |&(i, p)| -> Result<PointResult, hetnet_core::Error> {
        let probs = association::case_probabilities(&p.config)?;
        let se = if need_se { Some(spectral_efficiency_with(&p.config, &rate_opts)?) } else { None };
        let mc = if need_mc { Some(simulate(&p.config, mc.n, point_seed(mc.seed, i as u64), &mc_opts)?) } else { None };
        Ok(PointResult { probs, se, mc })
    });
    let results: Vec<PointResult> = results.into_iter().collect::<Result<_, _>>()?;
    for (p, r) in points.iter().zip(&results) {
        if let Some(m) = &r.mc {
            if m.resampled > 0 {
                manifest.warnings.push(format!("ratio {}: {} empty-tier deployments redrawn", p.ratio, m.resampled));
            }
        }
    }

    for kind in &scenario.outputs {
        let body = match kind {
            OutputKind::AssocProbs => assoc_csv(&points, &results),
            OutputKind::SpectralEfficiency => se_csv(&points, &results),
            OutputKind::DistancePdf => distance_csv(&points[0].config, scenario, &mc, manifest)?,
        };
        let path = out_dir.join(kind.file_name());
        fs::write(&path, body).map_err(io_err(&path))?;
        manifest.outputs.push(kind.file_name().to_string());
    }
    Ok(())
}

fn assoc_csv(points: &[SweepPoint], results: &[PointResult]) -> String {
    let with_mc = results.iter().any(|r| r.mc.is_some());
    let mut s = String::from("ratio,alpha_s,case1,case2,case4");
    if with_mc {
        s.push_str(",case1_mc,case1_ci,case2_mc,case2_ci,case4_mc,case4_ci,case3_mc");
    }
    s.push('\n');
    for (p, r) in points.iter().zip(results) {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            fmt(p.ratio),
            fmt(p.config.alpha_s),
            fmt(r.probs[0]),
            fmt(r.probs[1]),
            fmt(r.probs[3])
        );
        if let Some(m) = &r.mc {
            for c in [AssociationCase::Case1, AssociationCase::Case2, AssociationCase::Case4] {
                let _ = write!(s, ",{},{}", fmt(m.frequency(c)), fmt(3.0 * m.frequency_std_error(c)));
            }
            let _ = write!(s, ",{}", fmt(m.frequency(AssociationCase::Case3)));
        }
        s.push('\n');
    }
    s
}

fn se_csv(points: &[SweepPoint], results: &[PointResult]) -> String {
    let with_mc = results.iter().any(|r| r.mc.is_some());
    let mut s = String::from("ratio,se_ul_decoupled,se_dl_decoupled,se_ul_coupled,se_dl_coupled,alpha_s");
    if with_mc {
        s.push_str(",se_ul_decoupled_mc,se_ul_decoupled_ci,se_dl_decoupled_mc,se_dl_decoupled_ci,se_ul_coupled_mc,se_ul_coupled_ci,ul_gain_mc,ul_gain_ci");
    }
    s.push('\n');
    for (p, r) in points.iter().zip(results) {
        let se = r.se.as_ref().expect("computed when requested");
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            fmt(p.ratio),
            fmt(se.se_ul_decoupled),
            fmt(se.se_dl_decoupled),
            fmt(se.se_ul_coupled),
            fmt(se.se_dl_coupled),
            fmt(p.config.alpha_s)
        );
        if let Some(m) = &r.mc {
            let n = m.n_realizations;
            for mom in [&m.se_ul_decoupled, &m.se_dl, &m.se_ul_coupled, &m.ul_gain] {
                let _ = write!(s, ",{},{}", fmt(mom.mean_over(n)), fmt(3.0 * mom.std_error_over(n)));
            }
        }
        s.push('\n');
    }
    s
}

fn distance_csv(cfg: &NetworkConfig, scenario: &Scenario, mc: &McSpec, manifest: &mut Manifest) -> Result<String, CliError> {
    let sim = if mc.enabled {
        let opts = McOptions { shadowing: false, collect_distances: true };
        Some(simulate(cfg, mc.n, point_seed(mc.seed, u64::MAX), &opts)?)
    } else {
        None
    };
    let bins = scenario.distance.bins;
    let mut s = String::from("case,tier,x_m,pdf,mc_density\n");
    for (case, tier) in SUPPORTED {
        let law = match ServingDistancePdf::new(cfg, case, tier) {
            Ok(l) => l,
            Err(hetnet_core::Error::ZeroProbabilityCase { .. }) => {
                manifest.warnings.push(format!("{case} has zero probability; no {tier} distance law"));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let upper = law.quantile(scenario.distance.upper_quantile);
        let width = upper / bins as f64;
        let samples = sim.as_ref().map(|m| m.distance_samples(case, tier));
        let mut counts = vec![0u64; bins];
        if let Some(xs) = samples {
            for &x in xs {
                let k = (x / width) as usize;
                if k < bins {
                    counts[k] += 1;
                }
            }
        }
        for (k, &count) in counts.iter().enumerate() {
            let x = (k as f64 + 0.5) * width;
            let mc_density = match samples {
                Some(xs) if !xs.is_empty() => fmt(count as f64 / (xs.len() as f64 * width)),
                _ => String::new(),
            };
            let _ = writeln!(s, "{case},{tier},{},{},{}", fmt(x), fmt(law.pdf(x)), mc_density);
        }
    }
    Ok(s)
}

/// Thread count from the flag, else from `HETNET_THREADS`.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(t) = flag {
        return if t > 0 { Ok(flag) } else { Err(CliError::Usage("--threads must be positive".into())) };
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={v} is not a positive integer"))),
        _ => Ok(None),
    }
}

/// Loads the scenario, runs it on a dedicated pool and always writes
/// `manifest.json` into `out_dir`. Returns the process exit code.
pub fn run_with_manifest(scenario_path: &Path, out_dir: &Path, ov: &Overrides) -> (i32, Manifest) {
    let start = Instant::now();
    let mut manifest = Manifest {
        tool: "hetnet".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario_file: scenario_path.display().to_string(),
        scenario: None,
        points: Vec::new(),
        seed: None,
        mc_n: None,
        threads: None,
        wall_time_s: 0.0,
        outputs: Vec::new(),
        warnings: Vec::new(),
        status: "ok".into(),
        error: None,
        exit_code: 0,
    };
    let result = (|| -> Result<(), CliError> {
        let threads = resolve_threads(ov.threads)?;
        manifest.threads = threads;
        let scenario = Scenario::load(scenario_path)?;
        manifest.scenario = Some(scenario.clone());
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| run(&scenario, out_dir, ov, &mut manifest))
    })();
    if let Err(e) = &result {
        manifest.status = "error".into();
        manifest.error = Some(e.to_string());
        manifest.exit_code = e.exit_code();
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let _ = fs::create_dir_all(out_dir);
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).unwrap_or_else(|_| "{}".into());
    if let Err(e) = fs::write(&path, json + "\n") {
        if manifest.exit_code == 0 {
            eprintln!("error: i/o on {}: {e}", path.display());
            return (4, manifest);
        }
    }
    (manifest.exit_code, manifest)
}
