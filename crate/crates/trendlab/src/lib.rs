//! Trend inflation lab: synthetic microblog streams with retweet spam rings,
//! hourly trending lists, growth-ratio statistics and ratio-based spam
//! detection and removal.

pub mod corpus;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod spam;
pub mod synth;
pub mod stats;
pub mod trends;
pub mod verify;

pub use corpus::{
    AccountStatus, AccountType, Corpus, CorpusError, GroundTruth, Keyword, LoadError, Summary, Timestamp, Tweet,
    TweetId, TweetKind, UserId, UserRecord,
};
