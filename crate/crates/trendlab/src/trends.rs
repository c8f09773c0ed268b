//! Hourly top-k trending lists, per-keyword trending lifelines, and the
//! per-topic tweet windows used for growth-ratio analysis.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, Keyword, Tweet, HOUR_MINUTES};

/// Length of the hourly trending list.
pub const TOP_K: usize = 50;
/// Ranks above this value form the bottom band of a full list.
pub const TOP_BAND: u32 = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrendError {
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrendEntry {
    pub keyword: Keyword,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrendingSnapshot {
    pub hour: u32,
    /// Rank `i + 1` lives at index `i`.
    pub entries: Vec<TrendEntry>,
}

impl TrendingSnapshot {
    /// Ranks and truncates raw counts: descending count, ties by keyword.
    pub fn from_counts(hour: u32, counts: impl IntoIterator<Item = (Keyword, u64)>, cap: usize) -> Self {
        let mut entries: Vec<TrendEntry> = counts
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(keyword, count)| TrendEntry { keyword, count })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.keyword.cmp(&b.keyword)));
        entries.truncate(cap);
        TrendingSnapshot { hour, entries }
    }
}

/// One snapshot per hour from the epoch through the last tweet.
pub fn compute_snapshots(corpus: &Corpus) -> Vec<TrendingSnapshot> {
    compute_snapshots_capped(corpus, TOP_K)
}

pub fn compute_snapshots_capped(corpus: &Corpus, cap: usize) -> Vec<TrendingSnapshot> {
    let tweets = corpus.tweets();
    let mut out = Vec::with_capacity(corpus.span_hours() as usize);
    let mut start = 0;
    for hour in 0..corpus.span_hours() {
        let mut counts: HashMap<&Keyword, u64> = HashMap::new();
        let mut end = start;
        while end < tweets.len() && tweets[end].at.hour() == hour {
            *counts.entry(&tweets[end].keyword).or_default() += 1;
            end += 1;
        }
        start = end;
        out.push(TrendingSnapshot::from_counts(
            hour,
            counts.into_iter().map(|(k, c)| (k.clone(), c)),
            cap,
        ));
    }
    out
}

/// Inclusive range of consecutive trending hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Run {
    pub first: u32,
    pub last: u32,
}

impl Run {
    pub fn hours(&self) -> u32 {
        self.last - self.first + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopicLifeline {
    pub keyword: Keyword,
    pub runs: Vec<Run>,
    pub total_hours: u32,
    pub reappearances: u32,
    /// `(hour, rank)` for every trending hour, in hour order.
    pub rank_history: Vec<(u32, u32)>,
}

impl TopicLifeline {
    fn from_history(keyword: Keyword, rank_history: Vec<(u32, u32)>) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        for &(hour, _) in &rank_history {
            match runs.last_mut() {
                Some(run) if run.last + 1 == hour => run.last = hour,
                _ => runs.push(Run { first: hour, last: hour }),
            }
        }
        let total_hours = runs.iter().map(Run::hours).sum();
        let reappearances = runs.len().saturating_sub(1) as u32;
        TopicLifeline {
            keyword,
            runs,
            total_hours,
            reappearances,
            rank_history,
        }
    }

    /// Minutes `[start, end)` from the first trending hour through the end of
    /// the last one.
    pub fn window(&self) -> (u32, u32) {
        let first = self.runs.first().map_or(0, |r| r.first);
        let last = self.runs.last().map_or(0, |r| r.last);
        (first * HOUR_MINUTES, (last + 1) * HOUR_MINUTES)
    }
}

/// Lifelines sorted by keyword.
pub fn lifelines(snapshots: &[TrendingSnapshot]) -> Vec<TopicLifeline> {
    let mut history: BTreeMap<&Keyword, Vec<(u32, u32)>> = BTreeMap::new();
    for snap in snapshots {
        for (i, e) in snap.entries.iter().enumerate() {
            history.entry(&e.keyword).or_default().push((snap.hour, i as u32 + 1));
        }
    }
    history
        .into_iter()
        .map(|(k, mut h)| {
            h.sort_unstable();
            TopicLifeline::from_history(k.clone(), h)
        })
        .collect()
}

/// Frequency table `value -> number of keywords`.
pub type Histogram = BTreeMap<u32, u64>;

pub fn duration_distribution(lifelines: &[TopicLifeline]) -> Result<Histogram, TrendError> {
    tally(lifelines, |l| l.total_hours)
}

pub fn reappearance_distribution(lifelines: &[TopicLifeline]) -> Result<Histogram, TrendError> {
    tally(lifelines, |l| l.reappearances)
}

fn tally(lifelines: &[TopicLifeline], f: impl Fn(&TopicLifeline) -> u32) -> Result<Histogram, TrendError> {
    if lifelines.is_empty() {
        return Err(TrendError::EmptyInput);
    }
    let mut h = Histogram::new();
    for l in lifelines {
        *h.entry(f(l)).or_default() += 1;
    }
    Ok(h)
}

pub fn mean_duration(lifelines: &[TopicLifeline]) -> f64 {
    if lifelines.is_empty() {
        return 0.0;
    }
    lifelines.iter().map(|l| l.total_hours as f64).sum::<f64>() / lifelines.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankBandRow {
    pub duration: u32,
    pub keywords: usize,
    pub trending_hours: u64,
    pub bottom_hours: u64,
    pub pct_bottom: f64,
}

/// Share of trending hours spent below rank 25, pooled per total duration.
pub fn rank_band_analysis(
    lifelines: &[TopicLifeline],
    snapshots: &[TrendingSnapshot],
) -> Result<Vec<RankBandRow>, TrendError> {
    if lifelines.is_empty() || snapshots.is_empty() {
        return Err(TrendError::EmptyInput);
    }
    let mut rows: BTreeMap<u32, RankBandRow> = BTreeMap::new();
    for l in lifelines {
        let row = rows.entry(l.total_hours).or_insert(RankBandRow {
            duration: l.total_hours,
            keywords: 0,
            trending_hours: 0,
            bottom_hours: 0,
            pct_bottom: 0.0,
        });
        row.keywords += 1;
        row.trending_hours += l.rank_history.len() as u64;
        row.bottom_hours += l.rank_history.iter().filter(|(_, r)| *r > TOP_BAND).count() as u64;
    }
    Ok(rows
        .into_values()
        .map(|mut r| {
            r.pct_bottom = 100.0 * r.bottom_hours as f64 / r.trending_hours as f64;
            r
        })
        .collect())
}

/// Tweets on the lifeline's keyword inside its enclosing trending window,
/// gaps between runs included.
pub fn topic_window_tweets<'a>(corpus: &'a Corpus, lifeline: &TopicLifeline) -> Vec<&'a Tweet> {
    let (start, end) = lifeline.window();
    let tweets = corpus.tweets();
    let lo = tweets.partition_point(|t| t.at.minutes() < start);
    tweets[lo..]
        .iter()
        .take_while(|t| t.at.minutes() < end)
        .filter(|t| t.keyword == lifeline.keyword)
        .collect()
}

/// Keyword index for pulling many topic windows out of one corpus.
pub struct KeywordIndex<'a> {
    by_keyword: HashMap<&'a Keyword, Vec<&'a Tweet>>,
}

impl<'a> KeywordIndex<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        let mut by_keyword: HashMap<&Keyword, Vec<&Tweet>> = HashMap::new();
        for t in corpus.tweets() {
            by_keyword.entry(&t.keyword).or_default().push(t);
        }
        KeywordIndex { by_keyword }
    }

    pub fn tweets(&self, keyword: &Keyword) -> &[&'a Tweet] {
        self.by_keyword.get(keyword).map_or(&[], |v| v.as_slice())
    }

    /// Same result as [`topic_window_tweets`].
    pub fn window(&self, lifeline: &TopicLifeline) -> &[&'a Tweet] {
        let (start, end) = lifeline.window();
        let all = self.tweets(&lifeline.keyword);
        let lo = all.partition_point(|t| t.at.minutes() < start);
        let hi = all.partition_point(|t| t.at.minutes() < end);
        &all[lo..hi]
    }
}

pub fn write_snapshots_csv<W: Write>(w: &mut W, snapshots: &[TrendingSnapshot]) -> std::io::Result<()> {
    writeln!(w, "hour,rank,keyword,count")?;
    for s in snapshots {
        for (i, e) in s.entries.iter().enumerate() {
            writeln!(w, "{},{},{},{}", s.hour, i + 1, e.keyword, e.count)?;
        }
    }
    Ok(())
}

pub fn write_lifelines_csv<W: Write>(w: &mut W, lifelines: &[TopicLifeline]) -> std::io::Result<()> {
    writeln!(w, "keyword,total_hours,reappearances,runs")?;
    for l in lifelines {
        let runs: Vec<String> = l.runs.iter().map(|r| format!("{}-{}", r.first, r.last)).collect();
        writeln!(w, "{},{},{},{}", l.keyword, l.total_hours, l.reappearances, runs.join(";"))?;
    }
    Ok(())
}
