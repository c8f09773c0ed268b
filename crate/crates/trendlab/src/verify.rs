//! Brute-force recomputation of the fast paths, for small corpora.
//!
//! Each check recomputes one derived structure with the most direct algorithm
//! available (full scans, no indexes) and compares it record by record with
//! the production code path.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, Keyword, Summary, UserId, HOUR_MINUTES, TICK_MINUTES};
use crate::pipeline::TrendView;
use crate::spam::{retweet_profiles, RetweetProfile};
use crate::stats::RatioClass;
use crate::trends::{TrendingSnapshot, TOP_K};

/// Largest corpus the oracles accept.
pub const MAX_VERIFY_TWEETS: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("corpus has {got} tweets; verify is limited to {max}")]
    TooLarge { got: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub passed: bool,
    /// Records compared.
    pub compared: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub n_tweets: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn mismatches(&self) -> usize {
        self.checks.iter().map(|c| c.mismatches).sum()
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

#[derive(Default)]
struct Tally {
    compared: usize,
    mismatches: usize,
    first: Option<String>,
}

impl Tally {
    fn cmp<T: PartialEq + std::fmt::Debug>(&mut self, what: impl FnOnce() -> String, fast: &T, slow: &T) {
        self.compared += 1;
        if fast != slow {
            self.mismatches += 1;
            if self.first.is_none() {
                self.first = Some(format!("{}: fast {:?} != oracle {:?}", what(), fast, slow));
            }
        }
    }

    fn finish(self, check: &'static str) -> CheckResult {
        CheckResult {
            check,
            passed: self.mismatches == 0,
            compared: self.compared,
            mismatches: self.mismatches,
            first_mismatch: self.first,
        }
    }
}

/// Runs every oracle check against `corpus`.
pub fn verify_corpus(corpus: &Corpus) -> Result<VerifyReport, VerifyError> {
    let n = corpus.tweets().len();
    if n > MAX_VERIFY_TWEETS {
        return Err(VerifyError::TooLarge { got: n, max: MAX_VERIFY_TWEETS });
    }
    let view = TrendView::new(corpus);
    let slow_snapshots = oracle_snapshots(corpus);
    Ok(VerifyReport {
        n_tweets: n,
        checks: vec![
            check_summary(corpus),
            check_snapshots(&view.snapshots, &slow_snapshots),
            check_timelines(corpus, &view),
            check_profiles(corpus, &view.snapshots, &slow_snapshots),
        ],
    })
}

fn oracle_summary(corpus: &Corpus) -> Summary {
    let mut s = Summary {
        n_users: corpus.users().count(),
        ..Summary::default()
    };
    let mut retweeting = Vec::new();
    let mut retweeted = Vec::new();
    for t in corpus.tweets() {
        s.n_tweets += 1;
        match t.retweeted_author() {
            Some(a) => {
                s.n_retweets += 1;
                retweeting.push(t.author);
                retweeted.push(a);
            }
            None => s.n_originals += 1,
        }
    }
    for v in [&mut retweeting, &mut retweeted] {
        v.sort_unstable();
        v.dedup();
    }
    s.n_retweeting_users = retweeting.len();
    s.n_retweeted_users = retweeted.len();
    s
}

fn check_summary(corpus: &Corpus) -> CheckResult {
    let mut t = Tally::default();
    let fast = corpus.summary();
    let slow = oracle_summary(corpus);
    t.cmp(|| "summary".into(), &fast, &slow);
    let c = corpus.counters();
    t.cmp(|| "counters.tweets".into(), &c.tweets, &slow.n_tweets);
    t.cmp(|| "counters.retweets".into(), &c.retweets, &slow.n_retweets);
    t.cmp(|| "counters.users".into(), &c.users, &slow.n_users);
    t.finish("summary_counters")
}

/// Counts every keyword by scanning the whole corpus once per hour, then picks
/// the top of the list one entry at a time.
fn oracle_snapshots(corpus: &Corpus) -> Vec<TrendingSnapshot> {
    let hours = corpus.tweets().iter().map(|t| t.at.minutes() / HOUR_MINUTES + 1).max().unwrap_or(0);
    (0..hours)
        .map(|hour| {
            let mut counts: Vec<(Keyword, u64)> = Vec::new();
            for t in corpus.tweets() {
                if t.at.minutes() / HOUR_MINUTES != hour {
                    continue;
                }
                match counts.iter_mut().find(|(k, _)| *k == t.keyword) {
                    Some(e) => e.1 += 1,
                    None => counts.push((t.keyword.clone(), 1)),
                }
            }
            let mut entries = Vec::new();
            while entries.len() < TOP_K && !counts.is_empty() {
                let mut best = 0;
                for i in 1..counts.len() {
                    let (k, c) = &counts[i];
                    if *c > counts[best].1 || (*c == counts[best].1 && *k < counts[best].0) {
                        best = i;
                    }
                }
                let (keyword, count) = counts.swap_remove(best);
                entries.push(crate::trends::TrendEntry { keyword, count });
            }
            TrendingSnapshot { hour, entries }
        })
        .collect()
}

fn check_snapshots(fast: &[TrendingSnapshot], slow: &[TrendingSnapshot]) -> CheckResult {
    let mut t = Tally::default();
    t.cmp(|| "snapshot hours".into(), &fast.len(), &slow.len());
    for (f, s) in fast.iter().zip(slow) {
        t.cmp(|| format!("snapshot hour {}", s.hour), f, s);
    }
    t.finish("hourly_snapshots")
}

/// Cumulative counts `N(t)` for every trending window, recounted tick by tick.
fn check_timelines(corpus: &Corpus, view: &TrendView) -> CheckResult {
    let mut t = Tally::default();
    let timelines = view.timelines(corpus);
    t.cmp(|| "timeline count".into(), &timelines.len(), &view.lifelines.len());
    for (l, tl) in view.lifelines.iter().zip(&timelines) {
        let (start, end) = l.window();
        let mine: Vec<_> = corpus.tweets().iter().filter(|x| x.keyword == l.keyword).collect();
        let ticks = (end - start).div_ceil(TICK_MINUTES) as usize;
        t.cmp(|| format!("{} ticks", l.keyword), &tl.len(), &ticks);
        for tick in 1..=ticks {
            let upto = start + tick as u32 * TICK_MINUTES;
            let (mut o, mut r) = (0u64, 0u64);
            for x in &mine {
                let m = x.at.minutes();
                if m >= start && m < upto {
                    if x.is_retweet() {
                        r += 1;
                    } else {
                        o += 1;
                    }
                }
            }
            let fast = (
                tl.cumulative(RatioClass::All, tick),
                tl.cumulative(RatioClass::Originals, tick),
                tl.cumulative(RatioClass::Retweets, tick),
            );
            t.cmp(|| format!("{} N({tick})", l.keyword), &fast, &(Some(o + r), Some(o), Some(r)));
        }
    }
    t.finish("cumulative_sums")
}

fn check_profiles(corpus: &Corpus, fast_snapshots: &[TrendingSnapshot], slow_snapshots: &[TrendingSnapshot]) -> CheckResult {
    let mut t = Tally::default();
    let fast = retweet_profiles(corpus, fast_snapshots);
    let trending: BTreeSet<&Keyword> = slow_snapshots.iter().flat_map(|s| s.entries.iter().map(|e| &e.keyword)).collect();
    let mut rows: Vec<(UserId, UserId, &Keyword)> = corpus
        .tweets()
        .iter()
        .filter_map(|x| x.retweeted_author().map(|a| (x.author, a, &x.keyword)))
        .collect();
    rows.sort_by_key(|r| r.0);
    let mut slow = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let user = rows[i].0;
        let j = i + rows[i..].iter().take_while(|r| r.0 == user).count();
        let group = &rows[i..j];
        let mut targets: Vec<UserId> = group.iter().map(|r| r.1).collect();
        targets.sort_unstable();
        targets.dedup();
        let mut topics: Vec<&Keyword> = group.iter().map(|r| r.2).filter(|k| trending.contains(k)).collect();
        topics.sort_unstable();
        topics.dedup();
        let n = group.len() as u64;
        slow.push(RetweetProfile {
            user,
            n_retweets: n,
            n_targets: targets.len() as u64,
            ur_ratio: n as f64 / targets.len() as f64,
            topics_trended: topics.len() as u64,
        });
        i = j;
    }
    t.cmp(|| "profile count".into(), &fast.len(), &slow.len());
    for (f, s) in fast.iter().zip(&slow) {
        t.cmp(|| format!("profile of user {}", s.user.0), f, s);
    }
    t.finish("retweet_profiles")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Tweet, UserRecord};
    use crate::synth::{generate, GenConfig};

    #[test]
    fn generated_corpus_verifies() {
        let corpus = generate(&GenConfig::small(5)).unwrap();
        let report = verify_corpus(&corpus).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.checks.iter().all(|c| c.compared > 0));
    }

    #[test]
    fn oracle_catches_a_wrong_snapshot() {
        let users = (0..3).map(UserRecord::organic).collect();
        let tweets = vec![
            Tweet::original(0, 0, 5, "a"),
            Tweet::original(1, 1, 6, "b"),
            Tweet::retweet(2, 2, 7, "b", 1, 1),
        ];
        let corpus = Corpus::from_parts(users, tweets).unwrap();
        let mut fast = TrendView::new(&corpus).snapshots;
        let slow = oracle_snapshots(&corpus);
        assert!(check_snapshots(&fast, &slow).passed);
        fast[0].entries.swap(0, 1);
        let bad = check_snapshots(&fast, &slow);
        assert!(!bad.passed);
        assert!(bad.first_mismatch.unwrap().contains("hour 0"));
    }

    #[test]
    fn size_limit() {
        let users = vec![UserRecord::organic(0)];
        let tweets = (0..=MAX_VERIFY_TWEETS as u64).map(|i| Tweet::original(i, 0, 0, "k")).collect();
        let corpus = Corpus::from_parts(users, tweets).unwrap();
        assert!(matches!(verify_corpus(&corpus), Err(VerifyError::TooLarge { .. })));
    }
}
