//! Seeded synthetic microblog generator.
//!
//! Organic traffic: topics are born at Poisson times and grow tick by tick as
//! `n(t) ~ Poisson(N(t-1) · a · g_t · exp(-t / tau))`, where `N` is the
//! topic's cumulative organic count, `a` its attractiveness and `g_t` a
//! unit-median log-normal shock. Each organic tweet is a retweet with
//! probability `p_retweet`, aimed at an earlier rebroadcastable original of
//! the same topic with weight `1 + times already retweeted`.
//!
//! Spam: rings of fake accounts each serve one seed account. Every post by a
//! seed is retweeted by its ring (and by camouflage members of other rings)
//! over the following ticks. Ring retweets do not feed organic growth.

mod config;
mod moderation;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Geometric, Normal, Poisson};
use serde::Serialize;

use crate::corpus::{
    AccountStatus, AccountType, Corpus, GroundTruth, Keyword, Timestamp, Tweet, TweetId, TweetKind, UserId,
    UserRecord, HOUR_MINUTES, TICK_MINUTES,
};
use crate::rng::{streams, substream, Rng};

pub use config::{ConfigError, GenConfig};
pub use moderation::{apply_moderation, AppliesTo, ModerationPolicy};

/// A seed account together with everyone who boosts its posts.
#[derive(Debug, Clone)]
struct Seed {
    user: u32,
    /// `(booster, expected retweets per post)`
    boosters: Vec<(u32, f64)>,
}

struct World {
    users: Vec<UserRecord>,
    /// Organic accounts that are not seeds.
    organic: Vec<u32>,
    broadcasters: Vec<u32>,
    seeds: Vec<Seed>,
    seed_pick: Option<WeightedIndex<f64>>,
}

fn build_world(cfg: &GenConfig) -> World {
    let mut rng = substream(cfg.seed, streams::USERS);
    let n = cfg.n_users;
    let mut ids: Vec<u32> = (0..n).collect();
    ids.shuffle(&mut rng);

    let n_spam = ((cfg.spam_fraction * n as f64).round() as usize).min(n as usize / 2);
    let (spam, rest) = ids.split_at(n_spam);

    let mut rings: Vec<Vec<u32>> = Vec::new();
    if n_spam > 0 {
        let extra = Geometric::new(1.0 / cfg.ring_size).expect("ring_size >= 1");
        let mut i = 0;
        while i < n_spam {
            let size = (1 + extra.sample(&mut rng) as usize).min(n_spam - i);
            rings.push(spam[i..i + size].to_vec());
            i += size;
        }
    }
    let (seed_ids, organic) = rest.split_at(rings.len().min(rest.len()));

    let type_pick = WeightedIndex::new(cfg.organic_type_weights).expect("validated weights");
    let types = [AccountType::Regular, AccountType::Verified, AccountType::Expert];
    let mut users: Vec<UserRecord> = (0..n)
        .map(|id| UserRecord {
            id: UserId(id),
            account_type: AccountType::Regular,
            truth: GroundTruth::Organic,
            status: AccountStatus::Active,
        })
        .collect();
    // account types drawn in id order keeps them independent of role draws
    for u in users.iter_mut() {
        u.account_type = types[type_pick.sample(&mut rng)];
    }
    for &s in seed_ids {
        let r: f64 = rng.random();
        users[s as usize].account_type = if r < cfg.verified_fraction_seeds {
            AccountType::Verified
        } else if r < cfg.verified_fraction_seeds + cfg.expert_fraction_seeds {
            AccountType::Expert
        } else {
            AccountType::Regular
        };
    }

    let cadence = Normal::new(0.0, cfg.cadence_sigma).expect("validated sigma");
    let mut seeds: Vec<Seed> = Vec::with_capacity(rings.len());
    let mut ring_cadence = Vec::with_capacity(rings.len());
    for (ring, &seed) in rings.iter().zip(seed_ids) {
        let c = cfg.spam_intensity * (cadence.sample(&mut rng) - 0.5 * cfg.cadence_sigma.powi(2)).exp();
        ring_cadence.push(c);
        for &m in ring {
            users[m as usize].truth = GroundTruth::SpamRing { seed: UserId(seed) };
            users[m as usize].account_type = AccountType::Regular;
        }
        seeds.push(Seed {
            user: seed,
            boosters: ring.iter().map(|&m| (m, c)).collect(),
        });
    }
    if seeds.len() > 1 {
        for (r, ring) in rings.iter().enumerate() {
            for &m in ring {
                if !rng.random_bool(cfg.camouflage_fraction) {
                    continue;
                }
                let k = (cfg.camouflage_targets as usize).min(seeds.len() - 1);
                let mut others: Vec<usize> = (0..seeds.len()).filter(|&s| s != r).collect();
                others.shuffle(&mut rng);
                for &s in &others[..k] {
                    seeds[s].boosters.push((m, ring_cadence[r]));
                }
            }
        }
    }

    let mut broadcasters: Vec<u32> = organic
        .iter()
        .copied()
        .filter(|_| rng.random_bool(cfg.broadcaster_fraction))
        .collect();
    // looked up by binary search
    broadcasters.sort_unstable();
    let seed_pick = if seeds.is_empty() {
        None
    } else {
        // Pareto(shape) activity weights
        let weights: Vec<f64> = seeds
            .iter()
            .map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / cfg.seed_activity_shape))
            .collect();
        Some(WeightedIndex::new(weights).expect("positive weights"))
    };
    let mut organic = organic.to_vec();
    organic.sort_unstable();
    World {
        users,
        organic,
        broadcasters,
        seeds,
        seed_pick,
    }
}

/// One tweet before global ids are assigned.
#[derive(Debug, Clone, Copy)]
struct Draft {
    minute: u32,
    topic: u32,
    seq: u32,
    author: u32,
    /// `(seq of the original, its author)` for retweets.
    target: Option<(u32, u32)>,
}

struct TopicSim<'w> {
    cfg: &'w GenConfig,
    world: &'w World,
    topic: u32,
    rng: Rng,
    end_minute: u32,
    drafts: Vec<Draft>,
    /// One entry per rebroadcastable original plus one per retweet it got.
    tickets: Vec<(u32, u32)>,
}

impl TopicSim<'_> {
    fn push(&mut self, minute: u32, author: u32, target: Option<(u32, u32)>) -> u32 {
        let seq = self.drafts.len() as u32;
        self.drafts.push(Draft {
            minute,
            topic: self.topic,
            seq,
            author,
            target,
        });
        seq
    }

    fn original(&mut self, minute: u32) {
        let cfg = self.cfg;
        let u: f64 = self.rng.random();
        let (author, seed) = match &self.world.seed_pick {
            Some(pick) if u < cfg.seed_post_share => {
                let s = pick.sample(&mut self.rng);
                (self.world.seeds[s].user, Some(s))
            }
            _ if u < cfg.seed_post_share + cfg.broadcaster_post_share && !self.world.broadcasters.is_empty() => {
                let b = self.world.broadcasters[self.rng.random_range(0..self.world.broadcasters.len())];
                (b, None)
            }
            _ => (self.world.organic[self.rng.random_range(0..self.world.organic.len())], None),
        };
        let seq = self.push(minute, author, None);
        let audience = seed.is_some() || self.world.broadcasters.binary_search(&author).is_ok();
        if audience {
            self.tickets.push((seq, author));
        }
        if let Some(s) = seed {
            self.boost(s, seq, minute);
        }
    }

    /// Schedules the ring retweets of one seed post.
    fn boost(&mut self, seed: usize, post: u32, minute: u32) {
        let delay = Geometric::new(self.cfg.spam_delay_p).expect("validated probability");
        let author = self.world.seeds[seed].user;
        let post_tick = minute / TICK_MINUTES;
        for bi in 0..self.world.seeds[seed].boosters.len() {
            let (booster, rate) = self.world.seeds[seed].boosters[bi];
            let k = Poisson::new(rate).map_or(0, |p| p.sample(&mut self.rng) as u64);
            for _ in 0..k {
                let d = delay.sample(&mut self.rng) as u32;
                let tick = post_tick.saturating_add(d);
                let lo = if d == 0 { minute } else { tick * TICK_MINUTES };
                let hi = (tick + 1) * TICK_MINUTES;
                let m = self.rng.random_range(lo..hi);
                if m < self.end_minute {
                    self.push(m, booster, Some((post, author)));
                }
            }
        }
    }

    fn organic_retweet(&mut self, minute: u32) {
        let (post, author) = self.tickets[self.rng.random_range(0..self.tickets.len())];
        let mut who = author;
        for _ in 0..8 {
            who = self.world.organic[self.rng.random_range(0..self.world.organic.len())];
            if who != author {
                break;
            }
        }
        if who == author {
            return self.original(minute);
        }
        self.push(minute, who, Some((post, author)));
        self.tickets.push((post, author));
    }

    fn run(mut self, birth_minute: u32, attractiveness: f64) -> Vec<Draft> {
        let cfg = self.cfg;
        let growth = Normal::new(0.0, cfg.growth_sigma).expect("validated sigma");
        let mean_shock = (0.5 * cfg.growth_sigma * cfg.growth_sigma).exp();
        self.original(birth_minute);
        let mut total = 1.0f64;
        let birth_tick = birth_minute / TICK_MINUTES;
        let mut minutes = Vec::new();
        for t in 1u32.. {
            let tick = birth_tick + t;
            let start = tick * TICK_MINUTES;
            if start >= self.end_minute {
                break;
            }
            let novelty = (-(t as f64) / cfg.novelty_tau).exp();
            // expected organic tweets still to come
            if total * attractiveness * novelty * cfg.novelty_tau * mean_shock < 0.02 {
                break;
            }
            let shock = growth.sample(&mut self.rng).exp();
            let rate = total * attractiveness * shock * novelty;
            let n = Poisson::new(rate).map_or(0, |p| p.sample(&mut self.rng) as usize);
            minutes.clear();
            minutes.extend((0..n).map(|_| start + self.rng.random_range(0..TICK_MINUTES)));
            minutes.sort_unstable();
            for &m in &minutes {
                if m >= self.end_minute {
                    break;
                }
                if !self.tickets.is_empty() && self.rng.random_bool(cfg.p_retweet) {
                    self.organic_retweet(m);
                } else {
                    self.original(m);
                }
            }
            total += n as f64;
        }
        self.drafts
    }
}

/// Keyword used for the `index`-th topic born.
pub fn topic_keyword(index: u32) -> String {
    format!("topic{index:05}")
}

/// Generates a corpus with ground-truth labels; every account is active.
pub fn generate(cfg: &GenConfig) -> Result<Corpus, ConfigError> {
    cfg.validate()?;
    let world = build_world(cfg);
    let end_minute = cfg.sim_hours * HOUR_MINUTES;

    let mut topic_rng = substream(cfg.seed, streams::TOPICS);
    let births = Poisson::new(cfg.topic_birth_rate).expect("validated rate");
    let (lo, hi) = (cfg.attractiveness_min.ln(), cfg.attractiveness_max.ln());
    let mut drafts: Vec<Draft> = Vec::new();
    let mut keywords: Vec<Keyword> = Vec::new();
    for hour in 0..cfg.sim_hours {
        let k = births.sample(&mut topic_rng) as u32;
        for _ in 0..k {
            let birth = hour * HOUR_MINUTES + topic_rng.random_range(0..HOUR_MINUTES);
            let a = if hi > lo { topic_rng.random_range(lo..=hi) } else { lo }.exp();
            let topic = keywords.len() as u32;
            keywords.push(Keyword::new(&topic_keyword(topic)));
            let sim = TopicSim {
                cfg,
                world: &world,
                topic,
                rng: substream(cfg.seed, streams::TOPIC_BASE + topic as u64),
                end_minute,
                drafts: Vec::new(),
                tickets: Vec::new(),
            };
            drafts.extend(sim.run(birth, a));
        }
    }

    drafts.sort_unstable_by_key(|d| (d.minute, d.topic, d.seq));
    let mut offsets = vec![0usize; keywords.len() + 1];
    for d in &drafts {
        offsets[d.topic as usize + 1] += 1;
    }
    for i in 1..offsets.len() {
        offsets[i] += offsets[i - 1];
    }
    let mut ids = vec![0u64; drafts.len()];
    for (i, d) in drafts.iter().enumerate() {
        ids[offsets[d.topic as usize] + d.seq as usize] = i as u64;
    }
    let tweets: Vec<Tweet> = drafts
        .iter()
        .enumerate()
        .map(|(i, d)| Tweet {
            id: TweetId(i as u64),
            author: UserId(d.author),
            at: Timestamp(d.minute),
            keyword: keywords[d.topic as usize].clone(),
            kind: match d.target {
                None => TweetKind::Original,
                Some((seq, author)) => TweetKind::Retweet {
                    original_tweet: TweetId(ids[offsets[d.topic as usize] + seq as usize]),
                    original_author: UserId(author),
                },
            },
        })
        .collect();
    Ok(Corpus::from_parts(world.users, tweets).expect("generator output is consistent"))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GroundTruthReport {
    pub spam_user_fraction: f64,
    pub spam_retweet_fraction: f64,
    pub spam_tweet_fraction: f64,
}

/// Spam shares by generator labels. Evaluation only.
pub fn ground_truth_report(corpus: &Corpus) -> GroundTruthReport {
    let n_users = corpus.counters().users;
    let spam_users = corpus.users().filter(|u| u.truth.is_spam()).count();
    let is_spam = |u: UserId| corpus.user(u).is_some_and(|r| r.truth.is_spam());
    let (mut spam_rt, mut spam_tw) = (0usize, 0usize);
    for t in corpus.tweets() {
        if is_spam(t.author) {
            spam_tw += 1;
            if t.is_retweet() {
                spam_rt += 1;
            }
        }
    }
    let c = corpus.counters();
    let frac = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    GroundTruthReport {
        spam_user_fraction: frac(spam_users, n_users),
        spam_retweet_fraction: frac(spam_rt, c.retweets),
        spam_tweet_fraction: frac(spam_tw, c.tweets),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GenConfig {
        GenConfig {
            n_users: 2000,
            sim_hours: 48,
            ..GenConfig::small(seed)
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate(&small(5)).unwrap();
        let b = generate(&small(5)).unwrap();
        let c = generate(&small(6)).unwrap();
        let text = |c: &Corpus| {
            let mut buf = Vec::new();
            c.write_text(&mut buf).unwrap();
            buf
        };
        assert_eq!(text(&a), text(&b));
        assert_ne!(text(&a), text(&c));
    }

    #[test]
    fn no_spam_when_disabled() {
        let cfg = GenConfig {
            spam_fraction: 0.0,
            ..small(2)
        };
        let c = generate(&cfg).unwrap();
        assert!(!c.is_empty());
        assert!(c.users().all(|u| !u.truth.is_spam()));
        assert_eq!(ground_truth_report(&c), GroundTruthReport::default());
    }

    #[test]
    fn rings_retweet_only_their_seed_unless_camouflaged() {
        let cfg = GenConfig {
            camouflage_fraction: 0.0,
            ..small(3)
        };
        let c = generate(&cfg).unwrap();
        let mut spam_retweets = 0;
        for t in c.tweets() {
            let user = c.user(t.author).unwrap();
            if let GroundTruth::SpamRing { seed } = user.truth {
                assert_eq!(t.retweeted_author(), Some(seed));
                spam_retweets += 1;
            }
        }
        assert!(spam_retweets > 0);
    }

    #[test]
    fn seeds_are_mostly_verified() {
        let cfg = GenConfig {
            n_users: 20_000,
            spam_fraction: 0.05,
            ring_size: 1.0,
            ..small(4)
        };
        let c = generate(&cfg).unwrap();
        let seeds: std::collections::HashSet<UserId> = c
            .users()
            .filter_map(|u| match u.truth {
                GroundTruth::SpamRing { seed } => Some(seed),
                GroundTruth::Organic => None,
            })
            .collect();
        let verified = seeds
            .iter()
            .filter(|s| c.user(**s).unwrap().account_type == AccountType::Verified)
            .count();
        let frac = verified as f64 / seeds.len() as f64;
        assert!((frac - 0.79).abs() < 0.05, "{frac}");
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = GenConfig {
            novelty_tau: -1.0,
            ..GenConfig::default()
        };
        assert!(generate(&cfg).is_err());
    }
}
