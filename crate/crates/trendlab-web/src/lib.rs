//! Browser bindings. Each export takes plain strings/numbers and returns a
//! JSON document; errors come back as `{"error": ...}` so the page never has
//! to catch exceptions.

use serde_json::{json, Value};
use trendlab::pipeline::{find_fit, AnalysisOptions, Study, TrendView};
use trendlab::spam::DetectionMethod;
use trendlab::stats::{fit_lognormal, fit_powerlaw, RatioClass, XMinMode};
use trendlab::synth::{apply_moderation, generate, GenConfig, ModerationPolicy};
use trendlab::trends::duration_distribution;
use trendlab::Corpus;
use wasm_bindgen::prelude::*;

/// Largest world the page will simulate; keeps a tab responsive.
pub const MAX_USERS: u32 = 5_000;
const SHOWN_HOURS: usize = 24;
const SHOWN_ENTRIES: usize = 10;

fn config(text: &str, seed: u64) -> Result<GenConfig, String> {
    let mut cfg = if text.trim().is_empty() {
        GenConfig::small(seed)
    } else {
        GenConfig::from_kv_str(text).map_err(|e| e.to_string())?
    };
    cfg.seed = seed;
    if cfg.n_users > MAX_USERS {
        return Err(format!("n_users is capped at {MAX_USERS} in the browser"));
    }
    Ok(cfg)
}

fn world(text: &str, seed: u64) -> Result<Corpus, String> {
    let cfg = config(text, seed)?;
    let corpus = generate(&cfg).map_err(|e| e.to_string())?;
    Ok(apply_moderation(&corpus, &ModerationPolicy::default(), seed))
}

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

/// Corpus summary, the first day of trending lists and the duration histogram.
/// An empty config means the small demo world.
pub fn simulate_json(config_text: &str, seed: u64) -> String {
    respond((|| {
        let corpus = world(config_text, seed)?;
        let view = TrendView::new(&corpus);
        let hours: Vec<Value> = view
            .snapshots
            .iter()
            .take(SHOWN_HOURS)
            .map(|s| {
                let top: Vec<Value> =
                    s.entries.iter().take(SHOWN_ENTRIES).map(|e| json!([e.keyword.as_str(), e.count])).collect();
                json!({ "hour": s.hour, "top": top })
            })
            .collect();
        Ok(json!({
            "summary": corpus.summary(),
            "trending_keywords": view.lifelines.len(),
            "hours": hours,
            "durations": duration_distribution(&view.lifelines).unwrap_or_default(),
        }))
    })())
}

/// Detect, purge and compare growth-ratio fits before and after.
pub fn study_json(config_text: &str, seed: u64, method: &str, n_bootstrap: usize) -> String {
    respond((|| {
        let method: DetectionMethod = method.parse()?;
        let corpus = world(config_text, seed)?;
        let opts = AnalysisOptions {
            n_bootstrap: n_bootstrap.max(1),
            seed,
            ..AnalysisOptions::default()
        };
        let study = Study::run(&corpus, method, &opts).map_err(|e| e.to_string())?;
        let mut fits = Vec::new();
        for &frame in &opts.frames {
            for class in [RatioClass::All, RatioClass::Originals, RatioClass::Retweets] {
                let p = |recs| find_fit(recs, class, frame).and_then(|r| r.fit.as_ref()).map(|f| f.p_value);
                fits.push(json!({
                    "frame": frame,
                    "class": class.as_str(),
                    "p_before": p(&study.ratio_fits),
                    "p_after": p(&study.cleaned_ratio_fits),
                }));
            }
        }
        Ok(json!({ "headline": study.headline(), "removal": study.removal, "fits": fits }))
    })())
}

/// Fits pasted numbers (whitespace or comma separated) to `lognormal` or
/// `powerlaw`.
pub fn fit_json(samples_text: &str, model: &str, alpha: f64, n_bootstrap: usize, seed: u64) -> String {
    respond((|| {
        let samples = samples_text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        let b = n_bootstrap.max(1);
        let fit = match model {
            "lognormal" => serde_json::to_value(fit_lognormal(&samples, alpha, b, seed).map_err(|e| e.to_string())?),
            "powerlaw" => {
                serde_json::to_value(fit_powerlaw(&samples, XMinMode::Scan, alpha, b, seed).map_err(|e| e.to_string())?)
            }
            _ => return Err(format!("unknown model `{model}`")),
        };
        Ok(json!({ "model": model, "fit": fit.map_err(|e| e.to_string())? }))
    })())
}

#[wasm_bindgen]
pub fn simulate(config_text: &str, seed: u32) -> String {
    simulate_json(config_text, seed.into())
}

#[wasm_bindgen]
pub fn study(config_text: &str, seed: u32, method: &str, n_bootstrap: u32) -> String {
    study_json(config_text, seed.into(), method, n_bootstrap as usize)
}

#[wasm_bindgen]
pub fn fit(samples_text: &str, model: &str, alpha: f64, n_bootstrap: u32, seed: u32) -> String {
    fit_json(samples_text, model, alpha, n_bootstrap as usize, seed.into())
}
