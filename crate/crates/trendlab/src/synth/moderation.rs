use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{AccountStatus, Corpus, Timestamp, UserId, HOUR_MINUTES};
use crate::rng::{streams, substream};
use crate::spam::{retweet_profiles, RatioBucket};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppliesTo {
    /// Bucket probabilities for ring members, `organic_deletion` for everyone else.
    SpamOnly,
    /// Bucket probabilities for every account that retweeted.
    AllAccounts,
}

/// Simulated platform moderation: who is gone when accounts are revisited.
#[derive(Debug, Clone, PartialEq)]
pub struct ModerationPolicy {
    pub bucket_deletion_prob: BTreeMap<RatioBucket, f64>,
    pub applies_to: AppliesTo,
    /// Deletion probability for accounts outside the bucket rule.
    pub organic_deletion: f64,
}

/// Inactive shares of the active-account table, per ratio bucket.
const TABLE_INACTIVE: [(RatioBucket, f64); 13] = [
    (RatioBucket::AtLeast30, 0.88),
    (RatioBucket::From20To29, 0.63),
    (RatioBucket::From11To19, 0.84),
    (RatioBucket::Exact(10), 0.78),
    (RatioBucket::Exact(9), 0.88),
    (RatioBucket::Exact(8), 0.84),
    (RatioBucket::Exact(7), 0.85),
    (RatioBucket::Exact(6), 0.79),
    (RatioBucket::Exact(5), 0.70),
    (RatioBucket::Exact(4), 0.42),
    (RatioBucket::Exact(3), 0.20),
    (RatioBucket::Exact(2), 0.04),
    (RatioBucket::Exact(1), 0.08),
];

impl Default for ModerationPolicy {
    fn default() -> Self {
        ModerationPolicy {
            bucket_deletion_prob: TABLE_INACTIVE.into_iter().collect(),
            applies_to: AppliesTo::SpamOnly,
            organic_deletion: 0.002,
        }
    }
}

impl ModerationPolicy {
    pub fn uniform(p: f64) -> Self {
        ModerationPolicy {
            bucket_deletion_prob: TABLE_INACTIVE.into_iter().map(|(b, _)| (b, p)).collect(),
            applies_to: AppliesTo::SpamOnly,
            organic_deletion: p,
        }
    }

    fn bucket_prob(&self, ratio: Option<f64>) -> f64 {
        let bucket = RatioBucket::of(ratio.unwrap_or(1.0));
        self.bucket_deletion_prob.get(&bucket).copied().unwrap_or(0.0)
    }
}

/// Revisits every account at the end of the corpus span and deletes it with
/// the policy's probability. Tweets and ground truth are unchanged.
pub fn apply_moderation(corpus: &Corpus, policy: &ModerationPolicy, seed: u64) -> Corpus {
    let ratios: HashMap<UserId, f64> = retweet_profiles(corpus, &[])
        .into_iter()
        .map(|p| (p.user, p.ur_ratio))
        .collect();
    let at = Timestamp(corpus.span_hours() * HOUR_MINUTES);
    let mut rng = substream(seed, streams::MODERATION);
    corpus.with_statuses(|u| {
        let ratio = ratios.get(&u.id).copied();
        let p = match policy.applies_to {
            AppliesTo::SpamOnly if u.truth.is_spam() => policy.bucket_prob(ratio),
            AppliesTo::SpamOnly => policy.organic_deletion,
            AppliesTo::AllAccounts if ratio.is_some() => policy.bucket_prob(ratio),
            AppliesTo::AllAccounts => policy.organic_deletion,
        };
        // one draw per account regardless of p keeps the stream aligned
        let draw: f64 = rng.random();
        if draw < p {
            AccountStatus::Deleted { at }
        } else {
            AccountStatus::Active
        }
    })
}
