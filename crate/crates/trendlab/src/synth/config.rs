use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("`{field}` = {value} is out of range: {expected}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("config file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Generator knobs. Field names double as keys of the `key = value` config
/// file; omitted keys keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_users: u32,
    /// Fraction of users enrolled in spam rings.
    pub spam_fraction: f64,
    /// Mean ring size (geometric, at least one member).
    pub ring_size: f64,
    pub sim_hours: u32,
    /// Expected topic births per hour (Poisson).
    pub topic_birth_rate: f64,
    /// Per-topic attractiveness is log-uniform on `[min, max]`.
    pub attractiveness_min: f64,
    pub attractiveness_max: f64,
    /// Novelty decay constant, in ticks.
    pub novelty_tau: f64,
    /// Log-sd of the per-tick multiplicative growth factor.
    pub growth_sigma: f64,
    /// Probability that an organic tweet is a retweet.
    pub p_retweet: f64,
    /// Expected retweets per ring member per seed post.
    pub spam_intensity: f64,
    /// Log-sd of the per-ring cadence around `spam_intensity`.
    pub cadence_sigma: f64,
    /// Per-tick probability that a scheduled ring retweet fires.
    pub spam_delay_p: f64,
    /// Fraction of spam accounts that also boost other rings' seeds.
    pub camouflage_fraction: f64,
    /// Extra seeds each camouflage account boosts.
    pub camouflage_targets: u32,
    pub verified_fraction_seeds: f64,
    pub expert_fraction_seeds: f64,
    /// Organic account-type weights (regular, verified, expert).
    pub organic_type_weights: [f64; 3],
    /// Fraction of organic accounts with an audience; only their and the
    /// seeds' originals get rebroadcast.
    pub broadcaster_fraction: f64,
    /// Probability that an organic original comes from a broadcaster.
    pub broadcaster_post_share: f64,
    /// Probability that an organic original comes from a ring seed.
    pub seed_post_share: f64,
    /// Pareto shape of per-seed posting activity.
    pub seed_activity_shape: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            n_users: 50_000,
            spam_fraction: 0.0108,
            ring_size: 2.0,
            sim_hours: 720,
            topic_birth_rate: 10.8,
            attractiveness_min: 0.245,
            attractiveness_max: 0.319,
            novelty_tau: 12.0,
            growth_sigma: 0.76,
            p_retweet: 0.47,
            spam_intensity: 0.85,
            cadence_sigma: 1.5,
            spam_delay_p: 0.3,
            camouflage_fraction: 0.10,
            camouflage_targets: 3,
            verified_fraction_seeds: 0.79,
            expert_fraction_seeds: 0.05,
            organic_type_weights: [0.93, 0.05, 0.02],
            broadcaster_fraction: 0.005,
            broadcaster_post_share: 0.3,
            seed_post_share: 0.56,
            seed_activity_shape: 1.5,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn fraction(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    field,
                    value: v,
                    expected: "a fraction in [0, 1]",
                })
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    field,
                    value: v,
                    expected: "a positive number",
                })
            }
        }
        fraction("spam_fraction", self.spam_fraction)?;
        fraction("p_retweet", self.p_retweet)?;
        fraction("camouflage_fraction", self.camouflage_fraction)?;
        fraction("verified_fraction_seeds", self.verified_fraction_seeds)?;
        fraction("expert_fraction_seeds", self.expert_fraction_seeds)?;
        fraction(
            "verified_fraction_seeds + expert_fraction_seeds",
            self.verified_fraction_seeds + self.expert_fraction_seeds,
        )?;
        fraction("broadcaster_fraction", self.broadcaster_fraction)?;
        fraction("broadcaster_post_share", self.broadcaster_post_share)?;
        fraction("seed_post_share", self.seed_post_share)?;
        fraction(
            "broadcaster_post_share + seed_post_share",
            self.broadcaster_post_share + self.seed_post_share,
        )?;
        positive("n_users", self.n_users as f64)?;
        positive("sim_hours", self.sim_hours as f64)?;
        positive("ring_size", self.ring_size)?;
        if self.ring_size < 1.0 {
            return Err(ConfigError::OutOfRange {
                field: "ring_size",
                value: self.ring_size,
                expected: "at least 1",
            });
        }
        positive("topic_birth_rate", self.topic_birth_rate)?;
        positive("attractiveness_min", self.attractiveness_min)?;
        positive("attractiveness_max", self.attractiveness_max)?;
        if self.attractiveness_max < self.attractiveness_min {
            return Err(ConfigError::OutOfRange {
                field: "attractiveness_max",
                value: self.attractiveness_max,
                expected: "at least attractiveness_min",
            });
        }
        positive("novelty_tau", self.novelty_tau)?;
        positive("growth_sigma", self.growth_sigma)?;
        positive("spam_intensity", self.spam_intensity)?;
        positive("seed_activity_shape", self.seed_activity_shape)?;
        if !(self.cadence_sigma >= 0.0) {
            return Err(ConfigError::OutOfRange {
                field: "cadence_sigma",
                value: self.cadence_sigma,
                expected: "non-negative",
            });
        }
        if !(self.spam_delay_p > 0.0 && self.spam_delay_p <= 1.0) {
            return Err(ConfigError::OutOfRange {
                field: "spam_delay_p",
                value: self.spam_delay_p,
                expected: "a probability in (0, 1]",
            });
        }
        if self.organic_type_weights.iter().any(|w| !(*w >= 0.0)) || self.organic_type_weights.iter().sum::<f64>() <= 0.0 {
            return Err(ConfigError::OutOfRange {
                field: "organic_type_weights",
                value: self.organic_type_weights.iter().sum(),
                expected: "non-negative weights with a positive sum",
            });
        }
        Ok(())
    }

    /// Parses flat `key = value` text; unknown keys are errors.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: GenConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_kv_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Small world used by the oracle checks: about a thousand tweets.
    pub fn small(seed: u64) -> Self {
        GenConfig {
            seed,
            n_users: 600,
            sim_hours: 24,
            topic_birth_rate: 6.0,
            attractiveness_min: 0.1,
            attractiveness_max: 0.2,
            novelty_tau: 9.0,
            spam_fraction: 0.02,
            spam_intensity: 3.0,
            seed_post_share: 0.2,
            ..GenConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GenConfig::default().validate().unwrap();
        GenConfig::small(3).validate().unwrap();
    }

    #[test]
    fn out_of_range_fields() {
        let cfg = GenConfig {
            spam_fraction: 1.5,
            ..GenConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::OutOfRange { field: "spam_fraction", .. })));
        let cfg = GenConfig {
            novelty_tau: 0.0,
            ..GenConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = GenConfig {
            growth_sigma: -1.0,
            ..GenConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kv_round_trip_and_overrides() {
        let cfg = GenConfig::from_kv_str("seed = 9\nn_users = 1000\nspam_fraction = 0.0\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n_users, 1000);
        assert_eq!(cfg.novelty_tau, GenConfig::default().novelty_tau);
        let back = GenConfig::from_kv_str(&cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);
        assert!(GenConfig::from_kv_str("bogus = 1").is_err());
        assert!(GenConfig::from_kv_str("p_retweet = 2.0").is_err());
    }
}
