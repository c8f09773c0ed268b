use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::corpus::{Keyword, Timestamp, Tweet, TICK_MINUTES};

/// Which tweets a cumulative series counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioClass {
    All,
    Originals,
    Retweets,
}

impl RatioClass {
    pub const ALL: [RatioClass; 3] = [RatioClass::All, RatioClass::Originals, RatioClass::Retweets];

    pub fn as_str(self) -> &'static str {
        match self {
            RatioClass::All => "all",
            RatioClass::Originals => "originals",
            RatioClass::Retweets => "retweets",
        }
    }
}

/// Per-tick counts for one topic, tick 1 starting at `start`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TopicTimeline {
    pub keyword: Option<Keyword>,
    pub start: Timestamp,
    pub originals: Vec<u64>,
    pub retweets: Vec<u64>,
    pub cum_all: Vec<u64>,
    pub cum_originals: Vec<u64>,
    pub cum_retweets: Vec<u64>,
}

impl TopicTimeline {
    /// Number of ticks covered.
    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn counts(&self, tick: usize) -> Option<u64> {
        let i = tick.checked_sub(1)?;
        Some(*self.originals.get(i)? + *self.retweets.get(i)?)
    }

    /// `N(t_tick)` for the class; `None` past the covered ticks or at tick 0.
    pub fn cumulative(&self, class: RatioClass, tick: usize) -> Option<u64> {
        let series = match class {
            RatioClass::All => &self.cum_all,
            RatioClass::Originals => &self.cum_originals,
            RatioClass::Retweets => &self.cum_retweets,
        };
        series.get(tick.checked_sub(1)?).copied()
    }

    /// `N(t_i) / N(t_j)`, or `None` when a tick is uncovered or the
    /// denominator is zero.
    pub fn ratio(&self, class: RatioClass, i: usize, j: usize) -> Option<f64> {
        let num = self.cumulative(class, i)?;
        let den = self.cumulative(class, j)?;
        (den > 0).then(|| num as f64 / den as f64)
    }
}

/// Buckets tweets into ticks from `window_start`, covering through the tick of
/// the last tweet.
pub fn build_timeline<'a, I>(tweets: I, window_start: Timestamp) -> TopicTimeline
where
    I: IntoIterator<Item = &'a Tweet>,
{
    build(tweets, window_start, 0)
}

/// Like [`build_timeline`] but always covering `[window_start, window_end)`.
pub fn build_window_timeline<'a, I>(tweets: I, window_start: Timestamp, window_end: Timestamp) -> TopicTimeline
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let minutes = window_end.0.saturating_sub(window_start.0);
    build(tweets, window_start, minutes.div_ceil(TICK_MINUTES) as usize)
}

fn build<'a, I>(tweets: I, start: Timestamp, min_len: usize) -> TopicTimeline
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut tl = TopicTimeline {
        start,
        originals: vec![0; min_len],
        retweets: vec![0; min_len],
        ..TopicTimeline::default()
    };
    for t in tweets {
        debug_assert!(t.at >= start, "tweet before window start");
        if tl.keyword.is_none() {
            tl.keyword = Some(t.keyword.clone());
        }
        let idx = (t.at.0.saturating_sub(start.0) / TICK_MINUTES) as usize;
        if idx >= tl.originals.len() {
            tl.originals.resize(idx + 1, 0);
            tl.retweets.resize(idx + 1, 0);
        }
        if t.is_retweet() {
            tl.retweets[idx] += 1;
        } else {
            tl.originals[idx] += 1;
        }
    }
    let prefix = |xs: &[u64]| -> Vec<u64> {
        xs.iter()
            .scan(0u64, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    };
    tl.cum_originals = prefix(&tl.originals);
    tl.cum_retweets = prefix(&tl.retweets);
    tl.cum_all = tl
        .cum_originals
        .iter()
        .zip(&tl.cum_retweets)
        .map(|(o, r)| o + r)
        .collect();
    tl
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSampleSet {
    pub frame: (usize, usize),
    pub class: RatioClass,
    pub samples: Vec<f64>,
    /// `(N(t_i), N(t_j))` behind each sample.
    pub counts: Vec<(u64, u64)>,
    /// Timelines with `N(t_j) = 0` in the class.
    pub skipped_zero: usize,
    /// Timelines too short to cover tick `i`.
    pub skipped_short: usize,
}

impl RatioSampleSet {
    pub fn skipped(&self) -> usize {
        self.skipped_zero + self.skipped_short
    }
}

/// One `C(t_i, t_j)` sample per qualifying timeline.
pub fn ratio_samples(
    timelines: &[TopicTimeline],
    i: usize,
    j: usize,
    class: RatioClass,
) -> Result<RatioSampleSet, StatsError> {
    if i <= j || j < 1 {
        return Err(StatsError::BadFrame { i, j });
    }
    let mut set = RatioSampleSet {
        frame: (i, j),
        class,
        samples: Vec::new(),
        counts: Vec::new(),
        skipped_zero: 0,
        skipped_short: 0,
    };
    for tl in timelines {
        if tl.len() < i {
            set.skipped_short += 1;
            continue;
        }
        let (Some(num), Some(den)) = (tl.cumulative(class, i), tl.cumulative(class, j)) else {
            unreachable!("length checked above");
        };
        if den == 0 {
            set.skipped_zero += 1;
        } else {
            set.samples.push(num as f64 / den as f64);
            set.counts.push((num, den));
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;

    #[test]
    fn tick_boundaries() {
        let tweets = vec![
            Tweet::original(1, 0, 100, "a"),
            Tweet::original(2, 0, 109, "a"),
            Tweet::original(3, 0, 110, "a"),
        ];
        let tl = build_timeline(&tweets, Timestamp(100));
        let counts: Vec<u64> = (1..=tl.len()).map(|t| tl.counts(t).unwrap()).collect();
        assert_eq!(counts, vec![2, 1]);
        assert_eq!(tl.cum_all, vec![2, 3]);
    }

    #[test]
    fn empty_timeline() {
        let tl = build_timeline(std::iter::empty(), Timestamp(0));
        assert!(tl.is_empty());
        assert!(tl.cum_all.iter().all(|&c| c == 0));
        let padded = build_window_timeline(std::iter::empty(), Timestamp(0), Timestamp(60));
        assert_eq!(padded.cum_all, vec![0; 6]);
    }

    #[test]
    fn class_split() {
        let tweets = vec![
            Tweet::original(1, 0, 0, "a"),
            Tweet::retweet(2, 1, 12, "a", 1, 0),
            Tweet::retweet(3, 2, 15, "a", 1, 0),
        ];
        let tl = build_timeline(&tweets, Timestamp(0));
        assert_eq!(tl.cum_all, vec![1, 3]);
        assert_eq!(tl.cum_retweets, vec![0, 2]);
        assert_eq!(tl.cum_originals, vec![1, 1]);
    }

    fn from_cumulative(cum: &[u64]) -> TopicTimeline {
        let mut tweets = Vec::new();
        let mut prev = 0;
        let mut id = 0;
        for (tick, &c) in cum.iter().enumerate() {
            for _ in prev..c {
                tweets.push(Tweet::original(id, 0, tick as u32 * 10, "a"));
                id += 1;
            }
            prev = c;
        }
        build_window_timeline(&tweets, Timestamp(0), Timestamp(cum.len() as u32 * 10))
    }

    #[test]
    fn ratio_division() {
        let tl = from_cumulative(&[2, 3, 4, 5, 6, 7, 8, 9, 10, 12]);
        let set = ratio_samples(&[tl], 10, 2, RatioClass::All).unwrap();
        assert_eq!(set.samples, vec![4.0]);
        let tl = from_cumulative(&[1, 2, 3, 3, 3, 4, 4, 5, 5, 12]);
        let set = ratio_samples(&[tl], 10, 2, RatioClass::All).unwrap();
        assert_eq!(set.samples, vec![6.0]);
    }

    #[test]
    fn degenerate_and_reversed_frames() {
        assert_eq!(
            ratio_samples(&[], 3, 3, RatioClass::All),
            Err(StatsError::BadFrame { i: 3, j: 3 })
        );
        assert!(ratio_samples(&[], 2, 10, RatioClass::All).is_err());
        assert!(ratio_samples(&[], 2, 0, RatioClass::All).is_err());
    }

    #[test]
    fn zero_denominator_is_skipped() {
        let tl = from_cumulative(&[3, 3, 3, 3, 3, 3, 3, 3, 3, 3]);
        let set = ratio_samples(&[tl.clone(), tl], 10, 2, RatioClass::Retweets).unwrap();
        assert!(set.samples.is_empty());
        assert_eq!(set.skipped_zero, 2);
        let short = from_cumulative(&[1, 2, 3]);
        let set = ratio_samples(&[short], 10, 2, RatioClass::All).unwrap();
        assert_eq!(set.skipped_short, 1);
    }
}
