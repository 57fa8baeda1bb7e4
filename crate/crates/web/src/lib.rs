//! Browser bindings: three operations behind the static page in `www/`.

use hetnet_core::association::case_probabilities;
use hetnet_core::distances::ServingDistancePdf;
use hetnet_core::montecarlo::{simulate, McOptions};
use hetnet_core::{AssociationCase, NetworkConfig, Tier};
use wasm_bindgen::prelude::*;

fn config(alpha_s: f64, ratio: f64) -> NetworkConfig {
    NetworkConfig { alpha_s, ..NetworkConfig::table_nlos() }.with_density_ratio(ratio)
}

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// Rows of `[ratio, case1, case2, case4]` for `points` log-spaced ratios.
#[wasm_bindgen]
pub fn association_sweep(alpha_s: f64, ratio_min: f64, ratio_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    if !(ratio_min > 0.0 && ratio_max > ratio_min && points >= 2) {
        return Err(JsError::new("need 0 < ratio_min < ratio_max and at least 2 points"));
    }
    let mut out = Vec::with_capacity(points * 4);
    for i in 0..points {
        let r = ratio_min * (ratio_max / ratio_min).powf(i as f64 / (points - 1) as f64);
        let p = case_probabilities(&config(alpha_s, r)).map_err(js)?;
        out.extend([r, p[0], p[1], p[3]]);
    }
    Ok(out)
}

/// Rows of `[x, pdf]` for the serving distance of `tier` ("mcell"/"scell")
/// conditioned on association case `case` (1, 2 or 4).
#[wasm_bindgen]
pub fn distance_pdf(alpha_s: f64, ratio: f64, case: u8, tier: &str, bins: usize) -> Result<Vec<f64>, JsError> {
    let case = match case {
        1 => AssociationCase::Case1,
        2 => AssociationCase::Case2,
        4 => AssociationCase::Case4,
        _ => return Err(JsError::new("case must be 1, 2 or 4")),
    };
    let tier = match tier {
        "mcell" => Tier::Mcell,
        "scell" => Tier::Scell,
        _ => return Err(JsError::new("tier must be mcell or scell")),
    };
    let law = ServingDistancePdf::new(&config(alpha_s, ratio), case, tier).map_err(js)?;
    let top = law.quantile(0.999);
    let bins = bins.max(2);
    Ok((0..=bins)
        .flat_map(|i| {
            let x = top * i as f64 / bins as f64;
            [x, law.pdf(x)]
        })
        .collect())
}

/// Monte Carlo association frequencies `[case1, case2, case3, case4, se1, se2, se4]`.
#[wasm_bindgen]
pub fn monte_carlo_association(alpha_s: f64, ratio: f64, n: u32, seed: u32, shadow_db: f64) -> Result<Vec<f64>, JsError> {
    let cfg = NetworkConfig { shadow_sigma_db: shadow_db.max(0.0), ..config(alpha_s, ratio) };
    let opts = McOptions { shadowing: shadow_db > 0.0, collect_distances: false };
    let mc = simulate(&cfg, n.max(1) as u64, seed as u64, &opts).map_err(js)?;
    let cases = [AssociationCase::Case1, AssociationCase::Case2, AssociationCase::Case3, AssociationCase::Case4];
    let mut out: Vec<f64> = cases.iter().map(|&c| mc.frequency(c)).collect();
    out.extend([AssociationCase::Case1, AssociationCase::Case2, AssociationCase::Case4].map(|c| mc.frequency_std_error(c)));
    Ok(out)
}
