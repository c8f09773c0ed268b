//! User-retweet ratios, deletion-based suspect identification, spam removal,
//! and the trend-setter reports built on top of them.
//!
//! Detection code reads tweets and account statuses only. Ground-truth labels
//! are consulted exclusively by [`detection_quality`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AccountStatus, AccountType, Corpus, CorpusError, Keyword, Timestamp, UserId, HOUR_MINUTES};
use crate::trends::TrendingSnapshot;

#[derive(Debug, Error, PartialEq)]
pub enum SpamError {
    #[error("no account carries a deletion status; run moderation first")]
    ModerationNotApplied,
    #[error("corpus has no spam-ring labels to evaluate against")]
    NoGroundTruth,
    #[error("ratio threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error(transparent)]
    Integrity(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetweetProfile {
    pub user: UserId,
    pub n_retweets: u64,
    pub n_targets: u64,
    pub ur_ratio: f64,
    /// Distinct trending keywords among the user's retweets.
    pub topics_trended: u64,
}

fn trending_keywords(snapshots: &[TrendingSnapshot]) -> HashSet<&Keyword> {
    snapshots.iter().flat_map(|s| s.entries.iter().map(|e| &e.keyword)).collect()
}

/// One profile per user with at least one retweet, ordered by user id.
pub fn retweet_profiles(corpus: &Corpus, snapshots: &[TrendingSnapshot]) -> Vec<RetweetProfile> {
    let trending = trending_keywords(snapshots);
    #[derive(Default)]
    struct Acc<'a> {
        n: u64,
        targets: HashSet<UserId>,
        topics: HashSet<&'a Keyword>,
    }
    let mut acc: BTreeMap<UserId, Acc> = BTreeMap::new();
    for t in corpus.tweets() {
        if let Some(target) = t.retweeted_author() {
            let a = acc.entry(t.author).or_default();
            a.n += 1;
            a.targets.insert(target);
            if trending.contains(&t.keyword) {
                a.topics.insert(&t.keyword);
            }
        }
    }
    acc.into_iter()
        .map(|(user, a)| RetweetProfile {
            user,
            n_retweets: a.n,
            n_targets: a.targets.len() as u64,
            ur_ratio: a.n as f64 / a.targets.len() as f64,
            topics_trended: a.topics.len() as u64,
        })
        .collect()
}

/// The ten highest user-retweet ratios; ties go to more retweets, then lower id.
pub fn top_ratio_table(profiles: &[RetweetProfile], k: usize) -> Vec<RetweetProfile> {
    let mut v = profiles.to_vec();
    v.sort_by(|a, b| {
        b.ur_ratio
            .total_cmp(&a.ur_ratio)
            .then(b.n_retweets.cmp(&a.n_retweets))
            .then(a.user.cmp(&b.user))
    });
    v.truncate(k);
    v
}

/// Row of the active-account table. Non-integer ratios fall to their floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RatioBucket {
    /// Exactly this integer ratio, 1 through 10.
    Exact(u8),
    From11To19,
    From20To29,
    AtLeast30,
}

impl RatioBucket {
    /// Table order, highest ratios first.
    pub fn table_order() -> Vec<RatioBucket> {
        let mut v = vec![RatioBucket::AtLeast30, RatioBucket::From20To29, RatioBucket::From11To19];
        v.extend((1..=10).rev().map(RatioBucket::Exact));
        v
    }

    pub fn of(ratio: f64) -> RatioBucket {
        let r = ratio.floor().max(1.0);
        if r >= 30.0 {
            RatioBucket::AtLeast30
        } else if r >= 20.0 {
            RatioBucket::From20To29
        } else if r >= 11.0 {
            RatioBucket::From11To19
        } else {
            RatioBucket::Exact(r as u8)
        }
    }

    /// Representative ratio used when ranking buckets.
    pub fn lower_bound(self) -> f64 {
        match self {
            RatioBucket::Exact(k) => k as f64,
            RatioBucket::From11To19 => 11.0,
            RatioBucket::From20To29 => 20.0,
            RatioBucket::AtLeast30 => 30.0,
        }
    }
}

impl fmt::Display for RatioBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioBucket::Exact(k) => write!(f, "{k}"),
            RatioBucket::From11To19 => f.write_str("11-19"),
            RatioBucket::From20To29 => f.write_str("20-29"),
            RatioBucket::AtLeast30 => f.write_str(">=30"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketRow {
    pub bucket: RatioBucket,
    pub accounts: u64,
    pub active: u64,
    pub deleted: u64,
    /// `None` when the bucket is empty.
    pub pct_active: Option<f64>,
    pub pct_inactive: Option<f64>,
}

impl BucketRow {
    pub fn is_empty(&self) -> bool {
        self.accounts == 0
    }
}

/// Share of still-active accounts per ratio bucket, in `buckets` order.
pub fn active_percentage_by_bucket(
    corpus: &Corpus,
    profiles: &[RetweetProfile],
    buckets: &[RatioBucket],
) -> Vec<BucketRow> {
    let mut tally: HashMap<RatioBucket, (u64, u64)> = HashMap::new();
    for p in profiles {
        let deleted = corpus.user(p.user).is_some_and(|u| u.status.is_deleted());
        let e = tally.entry(RatioBucket::of(p.ur_ratio)).or_default();
        e.0 += 1;
        if deleted {
            e.1 += 1;
        }
    }
    buckets
        .iter()
        .map(|&bucket| {
            let (accounts, deleted) = tally.get(&bucket).copied().unwrap_or_default();
            let pct = |k: u64| (accounts > 0).then(|| 100.0 * k as f64 / accounts as f64);
            BucketRow {
                bucket,
                accounts,
                active: accounts - deleted,
                deleted,
                pct_active: pct(accounts - deleted),
                pct_inactive: pct(deleted),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionMethod {
    /// Accounts removed by the platform are suspects.
    DeletionOracle,
    /// Accounts whose user-retweet ratio is at least `theta`.
    RatioThreshold { theta: f64 },
}

impl FromStr for DetectionMethod {
    type Err = String;

    /// `oracle` or `threshold:<theta>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "oracle" {
            return Ok(DetectionMethod::DeletionOracle);
        }
        match s.strip_prefix("threshold:") {
            Some(v) => v
                .parse()
                .map(|theta| DetectionMethod::RatioThreshold { theta })
                .map_err(|_| format!("bad threshold `{v}`")),
            None => Err(format!("unknown method `{s}` (expected oracle or threshold:<theta>)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectSet {
    pub method: DetectionMethod,
    pub users: BTreeSet<UserId>,
    /// When the statuses were read.
    pub cooldown: Timestamp,
}

impl SuspectSet {
    pub fn empty() -> Self {
        SuspectSet {
            method: DetectionMethod::DeletionOracle,
            users: BTreeSet::new(),
            cooldown: Timestamp(0),
        }
    }

    pub fn contains(&self, user: UserId) -> bool {
        self.users.contains(&user)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

pub fn identify_suspects(corpus: &Corpus, method: DetectionMethod) -> Result<SuspectSet, SpamError> {
    match method {
        DetectionMethod::DeletionOracle => {
            let mut users = BTreeSet::new();
            let mut cooldown = None;
            for u in corpus.users() {
                if let AccountStatus::Deleted { at } = u.status {
                    users.insert(u.id);
                    cooldown = cooldown.max(Some(at));
                }
            }
            let cooldown = cooldown.ok_or(SpamError::ModerationNotApplied)?;
            Ok(SuspectSet { method, users, cooldown })
        }
        DetectionMethod::RatioThreshold { theta } => {
            if !(theta > 0.0) {
                return Err(SpamError::BadThreshold(theta));
            }
            let users = retweet_profiles(corpus, &[])
                .into_iter()
                .filter(|p| p.ur_ratio >= theta)
                .map(|p| p.user)
                .collect();
            Ok(SuspectSet {
                method,
                users,
                cooldown: Timestamp(corpus.span_hours() * HOUR_MINUTES),
            })
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RemovalReport {
    pub n_removed_retweets: u64,
    pub n_removed_originals: u64,
    pub pct_of_total_retweets: f64,
    pub pct_of_total_tweets: f64,
    pub pct_suspect_users_of_all: f64,
    pub pct_suspect_users_of_retweeters: f64,
}

fn pct(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Drops every tweet authored by a suspect and every retweet of a
/// suspect-authored original, whoever the retweeter is.
pub fn remove_spam(corpus: &Corpus, suspects: &SuspectSet) -> Result<(Corpus, RemovalReport), SpamError> {
    let before = corpus.summary();
    let mut removed_rt = 0u64;
    let mut removed_orig = 0u64;
    let cleaned = corpus.filter_tweets(|t| {
        let drop = suspects.contains(t.author) || t.retweeted_author().is_some_and(|a| suspects.contains(a));
        if drop {
            if t.is_retweet() {
                removed_rt += 1;
            } else {
                removed_orig += 1;
            }
        }
        !drop
    })?;
    let retweeters: HashSet<UserId> = corpus
        .tweets()
        .iter()
        .filter(|t| t.is_retweet())
        .map(|t| t.author)
        .collect();
    let suspect_retweeters = suspects.users.iter().filter(|u| retweeters.contains(u)).count() as u64;
    let report = RemovalReport {
        n_removed_retweets: removed_rt,
        n_removed_originals: removed_orig,
        pct_of_total_retweets: pct(removed_rt, before.n_retweets as u64),
        pct_of_total_tweets: pct(removed_rt + removed_orig, before.n_tweets as u64),
        pct_suspect_users_of_all: pct(suspects.len() as u64, before.n_users as u64),
        pct_suspect_users_of_retweeters: pct(suspect_retweeters, retweeters.len() as u64),
    };
    Ok((cleaned, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionQuality {
    /// Zero when the suspect set is empty.
    pub precision: f64,
    pub recall: f64,
    /// Share of spam-authored retweets that removal would drop.
    pub retweet_volume_recall: f64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

/// Scores a suspect set against generator ground truth.
pub fn detection_quality(suspects: &SuspectSet, corpus: &Corpus) -> Result<DetectionQuality, SpamError> {
    let spam: HashSet<UserId> = corpus.users().filter(|u| u.truth.is_spam()).map(|u| u.id).collect();
    if spam.is_empty() {
        return Err(SpamError::NoGroundTruth);
    }
    let tp = suspects.users.iter().filter(|u| spam.contains(u)).count() as u64;
    let fp = suspects.len() as u64 - tp;
    let fn_ = spam.len() as u64 - tp;
    let mut spam_rt = 0u64;
    let mut spam_rt_removed = 0u64;
    for t in corpus.tweets() {
        if let Some(target) = t.retweeted_author() {
            if spam.contains(&t.author) {
                spam_rt += 1;
                if suspects.contains(t.author) || suspects.contains(target) {
                    spam_rt_removed += 1;
                }
            }
        }
    }
    Ok(DetectionQuality {
        precision: if suspects.is_empty() { 0.0 } else { tp as f64 / suspects.len() as f64 },
        recall: tp as f64 / spam.len() as f64,
        retweet_volume_recall: if spam_rt == 0 { 0.0 } else { spam_rt_removed as f64 / spam_rt as f64 },
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSetterRow {
    pub user: UserId,
    pub times_retweeted: u64,
    pub account_type: AccountType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSetterReport {
    pub n_trend_setters: u64,
    pub n_touched: u64,
    /// `times retweeted -> number of trend-setters`
    pub retweeted_count_histogram: BTreeMap<u64, u64>,
    pub pct_trend_setters_touched_by_suspects: f64,
    pub n_trending_keywords: u64,
    pub pct_trending_keywords_in_suspect_retweeted_posts: f64,
    /// Percentages of touched trend-setters per account type.
    pub account_type_breakdown: BTreeMap<AccountType, f64>,
    pub top_k: Vec<TrendSetterRow>,
}

impl TrendSetterReport {
    /// Times-retweeted value of every trend-setter, for distribution fits.
    pub fn retweeted_counts(&self) -> Vec<f64> {
        self.retweeted_count_histogram
            .iter()
            .flat_map(|(&v, &n)| std::iter::repeat_n(v as f64, n as usize))
            .collect()
    }
}

pub fn trend_setter_report(
    corpus: &Corpus,
    suspects: &SuspectSet,
    snapshots: &[TrendingSnapshot],
    k: usize,
) -> TrendSetterReport {
    let mut times: BTreeMap<UserId, u64> = BTreeMap::new();
    let mut touched: BTreeSet<UserId> = BTreeSet::new();
    let mut suspect_keywords: HashSet<&Keyword> = HashSet::new();
    for t in corpus.tweets() {
        if let Some(target) = t.retweeted_author() {
            *times.entry(target).or_default() += 1;
            if suspects.contains(t.author) {
                touched.insert(target);
                suspect_keywords.insert(&t.keyword);
            }
        }
    }
    let trending = trending_keywords(snapshots);
    let hits = trending.iter().filter(|k| suspect_keywords.contains(*k)).count() as u64;

    let mut histogram = BTreeMap::new();
    for &n in times.values() {
        *histogram.entry(n).or_default() += 1;
    }
    let mut types: BTreeMap<AccountType, u64> = BTreeMap::new();
    for u in &touched {
        if let Some(rec) = corpus.user(*u) {
            *types.entry(rec.account_type).or_default() += 1;
        }
    }
    let account_type_breakdown = types
        .into_iter()
        .map(|(t, n)| (t, pct(n, touched.len() as u64)))
        .collect();
    let mut ranked: Vec<(UserId, u64)> = times.iter().map(|(&u, &n)| (u, n)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let top_k = ranked
        .into_iter()
        .take(k)
        .map(|(user, times_retweeted)| TrendSetterRow {
            user,
            times_retweeted,
            account_type: corpus.user(user).map_or(AccountType::Regular, |u| u.account_type),
        })
        .collect();
    TrendSetterReport {
        n_trend_setters: times.len() as u64,
        n_touched: touched.len() as u64,
        retweeted_count_histogram: histogram,
        pct_trend_setters_touched_by_suspects: pct(touched.len() as u64, times.len() as u64),
        n_trending_keywords: trending.len() as u64,
        pct_trending_keywords_in_suspect_retweeted_posts: pct(hits, trending.len() as u64),
        account_type_breakdown,
        top_k,
    }
}

/// Times-retweeted of every original that was retweeted at least once.
pub fn retweets_per_original(corpus: &Corpus) -> Vec<f64> {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for t in corpus.tweets() {
        if let crate::corpus::TweetKind::Retweet { original_tweet, .. } = t.kind {
            *counts.entry(original_tweet.0).or_default() += 1;
        }
    }
    let mut v: Vec<(u64, u64)> = counts.into_iter().collect();
    v.sort_unstable();
    v.into_iter().map(|(_, n)| n as f64).collect()
}

pub fn write_ratio_table_csv<W: Write>(w: &mut W, rows: &[RetweetProfile]) -> std::io::Result<()> {
    writeln!(w, "user,n_retweets,n_targets,ur_ratio")?;
    for p in rows {
        writeln!(w, "{},{},{},{}", p.user, p.n_retweets, p.n_targets, p.ur_ratio)?;
    }
    Ok(())
}

pub fn write_bucket_table_csv<W: Write>(w: &mut W, rows: &[BucketRow]) -> std::io::Result<()> {
    writeln!(w, "bucket,pct_active,pct_inactive")?;
    let fmt = |x: Option<f64>| x.map_or_else(|| "empty".to_string(), |v| format!("{v:.2}"));
    for r in rows {
        writeln!(w, "{},{},{}", r.bucket, fmt(r.pct_active), fmt(r.pct_inactive))?;
    }
    Ok(())
}

pub fn write_trend_setter_csv<W: Write>(w: &mut W, rows: &[TrendSetterRow]) -> std::io::Result<()> {
    writeln!(w, "user,times_retweeted,account_type")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.user, r.times_retweeted, r.account_type.as_str())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{GroundTruth, Tweet, UserRecord};
    use crate::trends::compute_snapshots;

    /// Users 0..6; 0 and 1 post originals, the rest retweet.
    fn corpus_with(retweets: &[(u32, u64)], statuses: &[(u32, u32)]) -> Corpus {
        let mut users: Vec<UserRecord> = (0..6).map(UserRecord::organic).collect();
        for &(u, at) in statuses {
            users[u as usize].status = AccountStatus::Deleted { at: Timestamp(at) };
        }
        let mut tweets = vec![
            Tweet::original(1, 0, 0, "a"),
            Tweet::original(2, 1, 0, "b"),
            Tweet::original(3, 5, 0, "c"),
        ];
        let mut id = 10;
        for &(user, of) in retweets {
            let (author, kw) = match of {
                1 => (0, "a"),
                2 => (1, "b"),
                _ => (5, "c"),
            };
            tweets.push(Tweet::retweet(id, user, 5, kw, of, author));
            id += 1;
        }
        Corpus::from_parts(users, tweets).unwrap()
    }

    #[test]
    fn single_target_ratio_equals_count() {
        let rts = vec![(2u32, 1u64); 134];
        let c = corpus_with(&rts, &[]);
        let p = retweet_profiles(&c, &compute_snapshots(&c));
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].n_retweets, p[0].n_targets, p[0].ur_ratio), (134, 1, 134.0));
        assert_eq!(p[0].topics_trended, 1);
    }

    #[test]
    fn ratio_is_retweets_over_targets() {
        let c = corpus_with(&[(3, 1), (3, 1), (3, 2), (3, 2), (3, 3), (3, 3)], &[]);
        let p = retweet_profiles(&c, &[]);
        assert_eq!(p[0].ur_ratio, 2.0);
        assert_eq!(p[0].n_targets, 3);
        assert!(p.iter().all(|p| p.user != UserId(4)));
    }

    #[test]
    fn buckets_floor_non_integers() {
        assert_eq!(RatioBucket::of(2.5), RatioBucket::Exact(2));
        assert_eq!(RatioBucket::of(10.99), RatioBucket::Exact(10));
        assert_eq!(RatioBucket::of(19.5), RatioBucket::From11To19);
        assert_eq!(RatioBucket::of(29.9), RatioBucket::From20To29);
        assert_eq!(RatioBucket::of(30.0), RatioBucket::AtLeast30);
        assert_eq!(RatioBucket::table_order().len(), 13);
        assert_eq!(RatioBucket::AtLeast30.to_string(), ">=30");
    }

    #[test]
    fn bucket_table_marks_empty_rows() {
        let c = corpus_with(&[(2, 1), (3, 1), (3, 2)], &[(2, 100)]);
        let p = retweet_profiles(&c, &[]);
        let rows = active_percentage_by_bucket(&c, &p, &RatioBucket::table_order());
        let one = rows.iter().find(|r| r.bucket == RatioBucket::Exact(1)).unwrap();
        assert_eq!((one.accounts, one.deleted), (2, 1));
        assert_eq!(one.pct_active, Some(50.0));
        let top = rows.iter().find(|r| r.bucket == RatioBucket::AtLeast30).unwrap();
        assert!(top.is_empty());
        assert_eq!(top.pct_active, None);
    }

    #[test]
    fn nothing_deleted_means_all_active() {
        let c = corpus_with(&[(2, 1), (3, 1), (3, 1), (4, 2)], &[]);
        let p = retweet_profiles(&c, &[]);
        let rows = active_percentage_by_bucket(&c, &p, &RatioBucket::table_order());
        assert!(rows.iter().filter(|r| !r.is_empty()).all(|r| r.pct_active == Some(100.0)));
    }

    #[test]
    fn oracle_suspects_are_the_deleted() {
        let c = corpus_with(&[(2, 1)], &[(2, 700), (3, 720), (4, 720)]);
        let s = identify_suspects(&c, DetectionMethod::DeletionOracle).unwrap();
        assert_eq!(s.users, BTreeSet::from([UserId(2), UserId(3), UserId(4)]));
        assert_eq!(s.cooldown, Timestamp(720));
        let clean = corpus_with(&[(2, 1)], &[]);
        assert_eq!(
            identify_suspects(&clean, DetectionMethod::DeletionOracle),
            Err(SpamError::ModerationNotApplied)
        );
    }

    #[test]
    fn threshold_suspects() {
        let mut rts = vec![(2u32, 1u64); 30];
        rts.extend(vec![(3, 1); 29]);
        rts.push((4, 1));
        let c = corpus_with(&rts, &[]);
        let s = identify_suspects(&c, DetectionMethod::RatioThreshold { theta: 30.0 }).unwrap();
        assert_eq!(s.users, BTreeSet::from([UserId(2)]));
        assert!(identify_suspects(&c, DetectionMethod::RatioThreshold { theta: 0.0 }).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("oracle".parse(), Ok(DetectionMethod::DeletionOracle));
        assert_eq!("threshold:30".parse(), Ok(DetectionMethod::RatioThreshold { theta: 30.0 }));
        assert!("threshold:x".parse::<DetectionMethod>().is_err());
        assert!("magic".parse::<DetectionMethod>().is_err());
    }

    #[test]
    fn empty_suspects_remove_nothing() {
        let c = corpus_with(&[(2, 1), (3, 2)], &[]);
        let (clean, report) = remove_spam(&c, &SuspectSet::empty()).unwrap();
        assert_eq!(clean, c);
        assert_eq!(report, RemovalReport::default());
    }

    #[test]
    fn removing_suspect_original_drops_organic_retweets_of_it() {
        // user 5 is the suspect; organic 2 retweeted its post 3
        let c = corpus_with(&[(2, 3), (2, 1), (5, 1)], &[]);
        let mut s = SuspectSet::empty();
        s.users.insert(UserId(5));
        let (clean, report) = remove_spam(&c, &s).unwrap();
        assert!(clean.tweet(crate::corpus::TweetId(3)).is_none());
        assert_eq!(report.n_removed_originals, 1);
        assert_eq!(report.n_removed_retweets, 2);
        assert_eq!(clean.counters().retweets, 1);
        assert!((report.pct_of_total_retweets - 200.0 / 3.0).abs() < 1e-9);
        assert!((report.pct_of_total_tweets - 50.0).abs() < 1e-9);
        assert!((report.pct_suspect_users_of_retweeters - 50.0).abs() < 1e-9);
        let (again, _) = remove_spam(&clean, &s).unwrap();
        assert_eq!(again, clean);
    }

    fn labelled(spam: &[u32]) -> Corpus {
        let base = corpus_with(&[(2, 1), (2, 1), (3, 1), (4, 2)], &[]);
        let users: Vec<UserRecord> = base
            .users()
            .map(|u| {
                let mut u = u.clone();
                if spam.contains(&u.id.0) {
                    u.truth = GroundTruth::SpamRing { seed: UserId(0) };
                }
                u
            })
            .collect();
        Corpus::from_parts(users, base.tweets().to_vec()).unwrap()
    }

    #[test]
    fn quality_perfect_and_empty() {
        let c = labelled(&[2, 3]);
        let s = SuspectSet {
            users: BTreeSet::from([UserId(2), UserId(3)]),
            ..SuspectSet::empty()
        };
        let q = detection_quality(&s, &c).unwrap();
        assert_eq!((q.precision, q.recall, q.retweet_volume_recall), (1.0, 1.0, 1.0));
        let q = detection_quality(&SuspectSet::empty(), &c).unwrap();
        assert_eq!(q.recall, 0.0);
        assert_eq!(q.retweet_volume_recall, 0.0);
        assert_eq!(
            detection_quality(&s, &labelled(&[])),
            Err(SpamError::NoGroundTruth)
        );
    }

    #[test]
    fn trend_setters_without_suspects() {
        let c = corpus_with(&[(2, 1), (3, 1), (4, 2)], &[]);
        let snaps = compute_snapshots(&c);
        let r = trend_setter_report(&c, &SuspectSet::empty(), &snaps, 10);
        assert_eq!(r.n_trend_setters, 2);
        assert_eq!(r.pct_trend_setters_touched_by_suspects, 0.0);
        assert_eq!(r.pct_trending_keywords_in_suspect_retweeted_posts, 0.0);
        assert_eq!(r.top_k[0].user, UserId(0));
        assert_eq!(r.top_k[0].times_retweeted, 2);
        assert_eq!(r.retweeted_counts(), vec![1.0, 2.0]);
    }

    #[test]
    fn trend_setters_with_a_suspect() {
        let c = corpus_with(&[(2, 1), (3, 1), (4, 2)], &[]);
        let snaps = compute_snapshots(&c);
        let s = SuspectSet {
            users: BTreeSet::from([UserId(4)]),
            ..SuspectSet::empty()
        };
        let r = trend_setter_report(&c, &s, &snaps, 10);
        assert_eq!(r.n_touched, 1);
        assert!((r.pct_trend_setters_touched_by_suspects - 50.0).abs() < 1e-12);
        // trending keywords a, b, c; only b has a suspect retweet
        assert!((r.pct_trending_keywords_in_suspect_retweeted_posts - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.account_type_breakdown.get(&AccountType::Regular), Some(&100.0));
    }

    #[test]
    fn csv_layouts() {
        let c = corpus_with(&[(2, 1), (2, 1)], &[]);
        let p = retweet_profiles(&c, &[]);
        let mut buf = Vec::new();
        write_ratio_table_csv(&mut buf, &top_ratio_table(&p, 10)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "user,n_retweets,n_targets,ur_ratio\n2,2,1,2\n");
        let rows = active_percentage_by_bucket(&c, &p, &[RatioBucket::Exact(2), RatioBucket::Exact(1)]);
        let mut buf = Vec::new();
        write_bucket_table_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bucket,pct_active,pct_inactive\n2,100.00,0.00\n1,empty,empty\n"
        );
    }
}
