//! Report bundles: every table and figure input of a study as CSV/JSON files,
//! plus a manifest of SHA-256 digests.
//!
//! Bundles are assembled in memory first so identical studies always produce
//! identical bytes, whatever the destination.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::pipeline::{AnalysisOptions, Headline, RatioFitRecord, Study, TrendStats, TrendView};
use crate::spam::{write_bucket_table_csv, write_ratio_table_csv, write_trend_setter_csv, DetectionMethod};
use crate::stats::{histogram, write_histogram_csv, Binning};
use crate::synth::GenConfig;
use crate::trends::{duration_distribution, reappearance_distribution, write_lifelines_csv, write_snapshots_csv};

pub const MANIFEST_FILE: &str = "manifest.json";
/// Ratio histograms use four bins per doubling.
pub const RATIO_BINNING: Binning = Binning::Log { base: 1.189_207_115_002_721 };

/// One emitted file, relative to the bundle root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleFile {
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub method: String,
    pub alpha: f64,
    pub frames: Vec<(usize, usize)>,
    pub n_bootstrap: usize,
    pub config: Option<GenConfig>,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn method_label(method: DetectionMethod) -> String {
    match method {
        DetectionMethod::DeletionOracle => "oracle".to_string(),
        DetectionMethod::RatioThreshold { theta } => format!("threshold:{theta}"),
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    headline: &'a Headline,
    summary: &'a crate::corpus::Summary,
    cleaned_summary: crate::corpus::Summary,
    n_suspects: usize,
}

#[derive(Serialize)]
struct FitsFile<'a> {
    before_removal: &'a [RatioFitRecord],
    after_removal: Option<&'a [RatioFitRecord]>,
}

fn json<T: Serialize>(path: &str, value: &T) -> BundleFile {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report values serialize");
    bytes.push(b'\n');
    BundleFile {
        path: path.to_string(),
        bytes,
    }
}

fn csv(path: &str, write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> BundleFile {
    let mut bytes = Vec::new();
    write(&mut bytes).expect("writing to memory");
    BundleFile {
        path: path.to_string(),
        bytes,
    }
}

fn counts_csv(path: &str, header: &str, rows: impl IntoIterator<Item = (u64, u64)>) -> BundleFile {
    csv(path, |w| {
        writeln!(w, "{header},count")?;
        for (k, n) in rows {
            writeln!(w, "{k},{n}")?;
        }
        Ok(())
    })
}

/// Snapshot, lifeline, histogram and rank-band files of one trend view.
pub fn trend_files(view: &TrendView, stats: &TrendStats) -> Vec<BundleFile> {
    vec![
        csv("trends/snapshots.csv", |w| write_snapshots_csv(w, &view.snapshots)),
        csv("trends/lifelines.csv", |w| write_lifelines_csv(w, &view.lifelines)),
        counts_csv(
            "trends/duration_histogram.csv",
            "trending_hours",
            duration_distribution(&view.lifelines)
                .unwrap_or_default()
                .into_iter()
                .map(|(k, n)| (k as u64, n)),
        ),
        counts_csv(
            "trends/reappearance_histogram.csv",
            "reappearances",
            reappearance_distribution(&view.lifelines)
                .unwrap_or_default()
                .into_iter()
                .map(|(k, n)| (k as u64, n)),
        ),
        csv("trends/rank_bands.csv", |w| {
            writeln!(w, "duration,keywords,trending_hours,bottom_hours,pct_bottom")?;
            for r in &stats.rank_bands {
                writeln!(w, "{},{},{},{},{:.4}", r.duration, r.keywords, r.trending_hours, r.bottom_hours, r.pct_bottom)?;
            }
            Ok(())
        }),
        json("trends/trend_stats.json", stats),
    ]
}

/// `fits.json` plus one histogram per fitted sample set. `after` is absent
/// when no removal has happened.
pub fn ratio_files(before: &[RatioFitRecord], after: Option<&[RatioFitRecord]>) -> Vec<BundleFile> {
    let mut files = vec![json(
        "ratios/fits.json",
        &FitsFile {
            before_removal: before,
            after_removal: after,
        },
    )];
    let sets = std::iter::once(("before", before)).chain(after.map(|a| ("after", a)));
    for (tag, records) in sets {
        for r in records {
            if let Ok(rows) = histogram(&r.samples, RATIO_BINNING) {
                let path = format!("ratios/{tag}_{}_{}_{}.csv", r.class.as_str(), r.frame.0, r.frame.1);
                files.push(csv(&path, |w| write_histogram_csv(w, &rows)));
            }
        }
    }
    files
}

/// Every bundle file except the manifest, in a fixed order.
pub fn bundle_files(study: &Study) -> Vec<BundleFile> {
    let mut files = vec![json(
        "summary.json",
        &SummaryFile {
            headline: &study.headline(),
            summary: &study.summary,
            cleaned_summary: study.cleaned.summary(),
            n_suspects: study.suspects.len(),
        },
    )];
    files.extend(trend_files(&study.trends, &study.trend_stats));
    files.extend(ratio_files(&study.ratio_fits, Some(&study.cleaned_ratio_fits)));
    files.extend([
        csv("spam/table1_ur_ratio.csv", |w| write_ratio_table_csv(w, &study.ratio_table)),
        csv("spam/table2_buckets.csv", |w| write_bucket_table_csv(w, &study.bucket_table)),
        csv("spam/table3_trend_setters.csv", |w| write_trend_setter_csv(w, &study.trend_setters.top_k)),
        counts_csv(
            "spam/times_retweeted_histogram.csv",
            "times_retweeted",
            study.trend_setters.retweeted_count_histogram.iter().map(|(&k, &n)| (k, n)),
        ),
        json("spam/trend_setters.json", &study.trend_setters),
        json("spam/removal.json", &study.removal),
        json("spam/detection_quality.json", &study.quality),
        json(
            "spam/powerlaw_fits.json",
            &[
                &study.retweets_per_original_fit,
                &study.retweeted_users_fit,
                &study.user_retweets_fit,
                &study.user_topics_fit,
            ],
        ),
    ]);
    files
}

/// Writes `files` under `dir`, creating subdirectories.
pub fn write_files(dir: &Path, files: &[BundleFile]) -> io::Result<()> {
    for f in files {
        let path = dir.join(&f.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &f.bytes)?;
    }
    Ok(())
}

pub fn manifest_for(
    files: &[BundleFile],
    opts: &AnalysisOptions,
    method: DetectionMethod,
    config: Option<&GenConfig>,
) -> Manifest {
    Manifest {
        seed: opts.seed,
        method: method_label(method),
        alpha: opts.alpha,
        frames: opts.frames.clone(),
        n_bootstrap: opts.n_bootstrap,
        config: config.cloned(),
        files: files
            .iter()
            .map(|f| ManifestEntry {
                path: f.path.clone(),
                bytes: f.bytes.len() as u64,
                sha256: sha256_hex(&f.bytes),
            })
            .collect(),
    }
}

/// Writes the bundle under `dir` and returns its manifest.
pub fn write_bundle(
    dir: &Path,
    study: &Study,
    opts: &AnalysisOptions,
    method: DetectionMethod,
    config: Option<&GenConfig>,
) -> io::Result<Manifest> {
    let files = bundle_files(study);
    let manifest = manifest_for(&files, opts, method, config);
    write_files(dir, &files)?;
    fs::write(dir.join(MANIFEST_FILE), manifest.to_json())?;
    Ok(manifest)
}

/// Files whose digest no longer matches the manifest (missing files included).
pub fn check_bundle(dir: &Path) -> io::Result<Vec<String>> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(io::Error::other)?;
    let mut bad = Vec::new();
    for entry in value["files"].as_array().into_iter().flatten() {
        let path = entry["path"].as_str().unwrap_or_default();
        let ok = fs::read(dir.join(path)).is_ok_and(|b| Some(sha256_hex(&b).as_str()) == entry["sha256"].as_str());
        if !ok {
            bad.push(path.to_string());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_reference() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn method_labels() {
        assert_eq!(method_label(DetectionMethod::DeletionOracle), "oracle");
        assert_eq!(method_label(DetectionMethod::RatioThreshold { theta: 30.0 }), "threshold:30");
    }
}
