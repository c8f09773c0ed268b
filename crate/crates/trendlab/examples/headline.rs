//! Headline numbers of one desk-scale run.
//! Usage: headline [seed] [key=value ...]

use std::collections::BTreeMap;
use std::time::Instant;

use trendlab::pipeline::{AnalysisOptions, Study};
use trendlab::spam::DetectionMethod;
use trendlab::synth::{apply_moderation, generate, GenConfig, ModerationPolicy};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    // later assignments win
    let mut kv = BTreeMap::new();
    for a in args.get(2..).unwrap_or_default() {
        let (k, v) = a.split_once('=').expect("key=value");
        kv.insert(k.to_string(), v.to_string());
    }
    let overrides: String = kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    let mut cfg = GenConfig::from_kv_str(&overrides).expect("config");
    cfg.seed = seed;

    let t = Instant::now();
    let corpus = apply_moderation(&generate(&cfg).expect("generate"), &ModerationPolicy::default(), seed);
    let generated = t.elapsed();
    let opts = AnalysisOptions { seed, ..AnalysisOptions::default() };
    let study = Study::run(&corpus, DetectionMethod::DeletionOracle, &opts).expect("study");
    eprintln!("generated in {generated:.1?}, total {:.1?}", t.elapsed());

    println!("{}", serde_json::to_string_pretty(&study.headline()).unwrap());
    for (tag, recs) in [("before", &study.ratio_fits), ("after", &study.cleaned_ratio_fits)] {
        for r in recs.iter() {
            match &r.fit {
                Some(f) => println!(
                    "{tag:6} {:9} {:?} n={:5} p={:.3} mu={:.3} sigma={:.3}",
                    r.class.as_str(), r.frame, r.n, f.p_value, f.mu, f.sigma
                ),
                None => println!("{tag:6} {:9} {:?} n={:5} unfit", r.class.as_str(), r.frame, r.n),
            }
        }
    }
}
