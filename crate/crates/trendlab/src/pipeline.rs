//! End-to-end analysis stages shared by the command line and the tests:
//! trending statistics, ratio fits, detection and removal, and the headline
//! numbers of a full run.

use serde::Serialize;

use crate::corpus::{Corpus, Summary, Timestamp};
use crate::spam::{
    active_percentage_by_bucket, detection_quality, identify_suspects, remove_spam, retweet_profiles,
    top_ratio_table, trend_setter_report, BucketRow, DetectionMethod, DetectionQuality, RatioBucket,
    RemovalReport, RetweetProfile, SpamError, SuspectSet, TrendSetterReport,
};
use crate::stats::{
    build_window_timeline, fit_count_ratio_lognormal, fit_powerlaw, ratio_samples, LogNormalFit, PowerLawFit, RatioClass,
    StatsError, TopicTimeline, XMinMode,
};
use crate::synth::{ground_truth_report, GroundTruthReport};
use crate::trends::{
    compute_snapshots, lifelines, mean_duration, rank_band_analysis, KeywordIndex, RankBandRow, TopicLifeline,
    TrendingSnapshot,
};

pub const DEFAULT_FRAMES: [(usize, usize); 2] = [(10, 2), (8, 3)];
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Knobs of the statistical stages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisOptions {
    pub frames: Vec<(usize, usize)>,
    pub alpha: f64,
    pub n_bootstrap: usize,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            frames: DEFAULT_FRAMES.to_vec(),
            alpha: DEFAULT_ALPHA,
            n_bootstrap: crate::stats::DEFAULT_BOOTSTRAP,
            seed: 0,
        }
    }
}

/// Checks that every frame has `i > j >= 1`.
pub fn validate_frames(frames: &[(usize, usize)]) -> Result<(), StatsError> {
    for &(i, j) in frames {
        if i <= j || j < 1 {
            return Err(StatsError::BadFrame { i, j });
        }
    }
    Ok(())
}

/// Snapshots and everything derived from them.
#[derive(Debug, Clone)]
pub struct TrendView {
    pub snapshots: Vec<TrendingSnapshot>,
    pub lifelines: Vec<TopicLifeline>,
}

impl TrendView {
    pub fn new(corpus: &Corpus) -> Self {
        let snapshots = compute_snapshots(corpus);
        let lifelines = lifelines(&snapshots);
        TrendView { snapshots, lifelines }
    }

    /// One window timeline per trending keyword, in lifeline order.
    pub fn timelines(&self, corpus: &Corpus) -> Vec<TopicTimeline> {
        let index = KeywordIndex::new(corpus);
        self.lifelines
            .iter()
            .map(|l| {
                let (start, end) = l.window();
                build_window_timeline(index.window(l).iter().copied(), Timestamp(start), Timestamp(end))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawRecord {
    pub quantity: &'static str,
    pub n: usize,
    pub fit: Option<PowerLawFit>,
    pub error: Option<String>,
}

fn powerlaw_record(quantity: &'static str, samples: &[f64], mode: XMinMode, opts: &AnalysisOptions, salt: u64) -> PowerLawRecord {
    match fit_powerlaw(samples, mode, opts.alpha, opts.n_bootstrap, opts.seed ^ salt) {
        Ok(fit) => PowerLawRecord {
            quantity,
            n: samples.len(),
            fit: Some(fit),
            error: None,
        },
        Err(e) => PowerLawRecord {
            quantity,
            n: samples.len(),
            fit: None,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendStats {
    pub n_trending_keywords: usize,
    pub mean_duration_hours: f64,
    pub duration_fit: PowerLawRecord,
    pub reappearance_fit: PowerLawRecord,
    pub rank_bands: Vec<RankBandRow>,
}

impl TrendStats {
    /// Bottom-band share of one-hour keywords minus that of the longest
    /// duration bucket.
    pub fn short_minus_long_bottom_share(&self) -> Option<f64> {
        let first = self.rank_bands.iter().find(|r| r.duration == 1)?;
        let last = self.rank_bands.last()?;
        Some(first.pct_bottom - last.pct_bottom)
    }
}

/// Duration and reappearance power laws (cutoff scanned) plus the rank bands.
/// Reappearance fits use keywords that reappeared at least once.
pub fn trend_stats(view: &TrendView, opts: &AnalysisOptions) -> TrendStats {
    let durations: Vec<f64> = view.lifelines.iter().map(|l| l.total_hours as f64).collect();
    let reappear: Vec<f64> = view
        .lifelines
        .iter()
        .filter(|l| l.reappearances > 0)
        .map(|l| l.reappearances as f64)
        .collect();
    TrendStats {
        n_trending_keywords: view.lifelines.len(),
        mean_duration_hours: mean_duration(&view.lifelines),
        duration_fit: powerlaw_record("trending_hours", &durations, XMinMode::Scan, opts, 0x11),
        reappearance_fit: powerlaw_record("reappearances", &reappear, XMinMode::Scan, opts, 0x12),
        rank_bands: rank_band_analysis(&view.lifelines, &view.snapshots).unwrap_or_default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioFitRecord {
    pub class: RatioClass,
    pub frame: (usize, usize),
    pub n: usize,
    pub skipped_zero: usize,
    pub skipped_short: usize,
    pub fit: Option<LogNormalFit>,
    pub error: Option<String>,
    #[serde(skip)]
    pub samples: Vec<f64>,
    /// `(N(t_i), N(t_j))` behind each sample.
    #[serde(skip)]
    pub counts: Vec<(u64, u64)>,
}

impl RatioFitRecord {
    pub fn accepted(&self) -> Option<bool> {
        self.fit.as_ref().map(|f| f.accepted)
    }
}

/// Log-normal fits of `C(t_i, t_j)` for every frame and class.
pub fn ratio_fits(timelines: &[TopicTimeline], opts: &AnalysisOptions) -> Result<Vec<RatioFitRecord>, StatsError> {
    validate_frames(&opts.frames)?;
    let mut out = Vec::new();
    for (fi, &(i, j)) in opts.frames.iter().enumerate() {
        for (ci, class) in RatioClass::ALL.into_iter().enumerate() {
            let set = ratio_samples(timelines, i, j, class)?;
            let salt = ((fi as u64) << 8) | ci as u64;
            let (num, den): (Vec<u64>, Vec<u64>) = set.counts.iter().copied().unzip();
            let (fit, error) = match fit_count_ratio_lognormal(&num, &den, opts.alpha, opts.n_bootstrap, opts.seed ^ salt) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(RatioFitRecord {
                class,
                frame: (i, j),
                n: set.samples.len(),
                skipped_zero: set.skipped_zero,
                skipped_short: set.skipped_short,
                fit,
                error,
                samples: set.samples,
                counts: set.counts,
            });
        }
    }
    Ok(out)
}

pub fn find_fit(records: &[RatioFitRecord], class: RatioClass, frame: (usize, usize)) -> Option<&RatioFitRecord> {
    records.iter().find(|r| r.class == class && r.frame == frame)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Buckets entering the ratio-vs-deletion correlation.
pub const CORRELATION_BUCKETS: [RatioBucket; 6] = [
    RatioBucket::Exact(1),
    RatioBucket::Exact(2),
    RatioBucket::Exact(3),
    RatioBucket::Exact(4),
    RatioBucket::Exact(5),
    RatioBucket::AtLeast30,
];

/// Rank correlation between bucket ratio and inactive share over the
/// non-empty correlation buckets.
pub fn bucket_correlation(rows: &[BucketRow]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = CORRELATION_BUCKETS
        .iter()
        .filter_map(|b| rows.iter().find(|r| r.bucket == *b))
        .filter_map(|r| Some((r.bucket.lower_bound(), r.pct_inactive?)))
        .unzip();
    (xs.len() >= 3).then(|| spearman(&xs, &ys))
}

/// Everything computed by a full detect-and-clean pass over one corpus.
#[derive(Debug, Clone)]
pub struct Study {
    pub summary: Summary,
    pub truth: GroundTruthReport,
    pub trends: TrendView,
    pub trend_stats: TrendStats,
    pub ratio_fits: Vec<RatioFitRecord>,
    pub profiles: Vec<RetweetProfile>,
    pub ratio_table: Vec<RetweetProfile>,
    pub bucket_table: Vec<BucketRow>,
    pub suspects: SuspectSet,
    pub removal: RemovalReport,
    pub quality: Option<DetectionQuality>,
    pub trend_setters: TrendSetterReport,
    pub cleaned: Corpus,
    pub cleaned_trends: TrendView,
    pub cleaned_ratio_fits: Vec<RatioFitRecord>,
    pub retweets_per_original_fit: PowerLawRecord,
    pub retweeted_users_fit: PowerLawRecord,
    pub user_retweets_fit: PowerLawRecord,
    pub user_topics_fit: PowerLawRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Headline {
    pub n_tweets: usize,
    pub n_users: usize,
    pub retweet_fraction: f64,
    pub spam_user_fraction: f64,
    pub spam_retweet_fraction: f64,
    pub spam_tweet_fraction: f64,
    pub suspect_share_of_users: f64,
    pub suspect_share_of_retweeters: f64,
    pub removed_pct_of_retweets: f64,
    pub removed_pct_of_tweets: f64,
    pub n_trending_keywords: usize,
    pub mean_trending_hours: f64,
    pub duration_powerlaw_accepted: Option<bool>,
    pub reappearance_powerlaw_accepted: Option<bool>,
    pub rank_band_short_minus_long: Option<f64>,
    pub retweet_ratio_accepted_before: Option<bool>,
    pub retweet_ratio_accepted_after: Option<bool>,
    pub original_ratio_accepted_before: Option<bool>,
    pub original_ratio_accepted_after: Option<bool>,
    pub top_bucket_pct_active: Option<f64>,
    pub bucket_rank_correlation: Option<f64>,
    pub pct_trend_setters_touched: f64,
    pub pct_trending_keywords_spam_retweeted: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub retweet_volume_recall: Option<f64>,
}

impl Study {
    /// Runs detection with `method`, removal, and the before/after analyses.
    /// Post-removal ratios use trending windows recomputed on the cleaned
    /// corpus.
    pub fn run(corpus: &Corpus, method: DetectionMethod, opts: &AnalysisOptions) -> Result<Study, PipelineError> {
        let summary = corpus.summary();
        let truth = ground_truth_report(corpus);
        let trends = TrendView::new(corpus);
        let trend_stats = trend_stats(&trends, opts);
        let ratio_fits = self::ratio_fits(&trends.timelines(corpus), opts)?;
        let profiles = retweet_profiles(corpus, &trends.snapshots);
        let ratio_table = top_ratio_table(&profiles, 10);
        let bucket_table = active_percentage_by_bucket(corpus, &profiles, &RatioBucket::table_order());
        let suspects = identify_suspects(corpus, method)?;
        let (cleaned, removal) = remove_spam(corpus, &suspects)?;
        let quality = detection_quality(&suspects, corpus).ok();
        let trend_setters = trend_setter_report(corpus, &suspects, &trends.snapshots, 10);
        let cleaned_trends = TrendView::new(&cleaned);
        let cleaned_ratio_fits = self::ratio_fits(&cleaned_trends.timelines(&cleaned), opts)?;

        let user_retweets: Vec<f64> = profiles.iter().map(|p| p.n_retweets as f64).collect();
        let user_topics: Vec<f64> = profiles
            .iter()
            .filter(|p| p.topics_trended > 0)
            .map(|p| p.topics_trended as f64)
            .collect();
        let per_original = crate::spam::retweets_per_original(corpus);
        Ok(Study {
            summary,
            truth,
            trend_stats,
            ratio_fits,
            retweets_per_original_fit: powerlaw_record("retweets_per_original", &per_original, XMinMode::Scan, opts, 0x21),
            retweeted_users_fit: powerlaw_record(
                "times_user_retweeted",
                &trend_setters.retweeted_counts(),
                XMinMode::Scan,
                opts,
                0x22,
            ),
            user_retweets_fit: powerlaw_record("retweets_per_user", &user_retweets, XMinMode::Scan, opts, 0x23),
            user_topics_fit: powerlaw_record("trending_topics_per_user", &user_topics, XMinMode::Scan, opts, 0x24),
            trends,
            profiles,
            ratio_table,
            bucket_table,
            suspects,
            removal,
            quality,
            trend_setters,
            cleaned,
            cleaned_trends,
            cleaned_ratio_fits,
        })
    }

    pub fn headline(&self) -> Headline {
        let frame = self.headline_frame();
        let acc = |records: &[RatioFitRecord], class| find_fit(records, class, frame).and_then(|r| r.accepted());
        let top = self
            .bucket_table
            .iter()
            .find(|r| r.bucket == RatioBucket::AtLeast30)
            .and_then(|r| r.pct_active);
        Headline {
            n_tweets: self.summary.n_tweets,
            n_users: self.summary.n_users,
            retweet_fraction: self.summary.retweet_fraction(),
            spam_user_fraction: self.truth.spam_user_fraction,
            spam_retweet_fraction: self.truth.spam_retweet_fraction,
            spam_tweet_fraction: self.truth.spam_tweet_fraction,
            suspect_share_of_users: self.removal.pct_suspect_users_of_all,
            suspect_share_of_retweeters: self.removal.pct_suspect_users_of_retweeters,
            removed_pct_of_retweets: self.removal.pct_of_total_retweets,
            removed_pct_of_tweets: self.removal.pct_of_total_tweets,
            n_trending_keywords: self.trend_stats.n_trending_keywords,
            mean_trending_hours: self.trend_stats.mean_duration_hours,
            duration_powerlaw_accepted: self.trend_stats.duration_fit.fit.as_ref().map(|f| f.accepted),
            reappearance_powerlaw_accepted: self.trend_stats.reappearance_fit.fit.as_ref().map(|f| f.accepted),
            rank_band_short_minus_long: self.trend_stats.short_minus_long_bottom_share(),
            retweet_ratio_accepted_before: acc(&self.ratio_fits, RatioClass::Retweets),
            retweet_ratio_accepted_after: acc(&self.cleaned_ratio_fits, RatioClass::Retweets),
            original_ratio_accepted_before: acc(&self.ratio_fits, RatioClass::Originals),
            original_ratio_accepted_after: acc(&self.cleaned_ratio_fits, RatioClass::Originals),
            top_bucket_pct_active: top,
            bucket_rank_correlation: bucket_correlation(&self.bucket_table),
            pct_trend_setters_touched: self.trend_setters.pct_trend_setters_touched_by_suspects,
            pct_trending_keywords_spam_retweeted: self.trend_setters.pct_trending_keywords_in_suspect_retweeted_posts,
            precision: self.quality.as_ref().map(|q| q.precision),
            recall: self.quality.as_ref().map(|q| q.recall),
            retweet_volume_recall: self.quality.as_ref().map(|q| q.retweet_volume_recall),
        }
    }

    /// First configured frame; the before/after comparison is reported there.
    fn headline_frame(&self) -> (usize, usize) {
        self.ratio_fits.first().map_or(DEFAULT_FRAMES[0], |r| r.frame)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Spam(#[from] SpamError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_reference_values() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // ranks x = 1..5, y = (2, 1, 3, 4, 5): 1 - 6·2 / (5·24) = 0.9
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 3.0, 4.0, 5.0]) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn frames_are_validated() {
        assert!(validate_frames(&[(10, 2), (8, 3)]).is_ok());
        assert_eq!(validate_frames(&[(2, 10)]), Err(StatsError::BadFrame { i: 2, j: 10 }));
        assert!(validate_frames(&[(4, 0)]).is_err());
    }
}
