//! In-memory corpus of users and tweets, with the line-delimited text format
//! used to hand corpora between pipeline stages.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minutes per counting tick.
pub const TICK_MINUTES: u32 = 10;
/// Minutes per trending hour.
pub const HOUR_MINUTES: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TweetId(pub u64);

/// Whole minutes since the simulation epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u32);

impl Timestamp {
    pub fn minutes(self) -> u32 {
        self.0
    }

    pub fn tick(self) -> u32 {
        self.0 / TICK_MINUTES
    }

    pub fn hour(self) -> u32 {
        self.0 / HOUR_MINUTES
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for TweetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Opaque topic tag. Cloning is cheap; equal keywords compare by content.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Keyword(Arc<str>);

impl Keyword {
    pub fn new(s: &str) -> Self {
        Keyword(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Keyword {
    fn from(s: &str) -> Self {
        Keyword::new(s)
    }
}

impl Serialize for Keyword {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Keyword {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Keyword::new(&s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TweetKind {
    Original,
    Retweet {
        original_tweet: TweetId,
        original_author: UserId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: TweetId,
    pub author: UserId,
    pub at: Timestamp,
    pub keyword: Keyword,
    pub kind: TweetKind,
}

impl Tweet {
    pub fn original(id: u64, author: u32, minutes: u32, keyword: &str) -> Self {
        Tweet {
            id: TweetId(id),
            author: UserId(author),
            at: Timestamp(minutes),
            keyword: Keyword::new(keyword),
            kind: TweetKind::Original,
        }
    }

    pub fn retweet(id: u64, author: u32, minutes: u32, keyword: &str, of: u64, of_author: u32) -> Self {
        Tweet {
            id: TweetId(id),
            author: UserId(author),
            at: Timestamp(minutes),
            keyword: Keyword::new(keyword),
            kind: TweetKind::Retweet {
                original_tweet: TweetId(of),
                original_author: UserId(of_author),
            },
        }
    }

    pub fn is_retweet(&self) -> bool {
        matches!(self.kind, TweetKind::Retweet { .. })
    }

    /// Author of the rebroadcast original, if this is a retweet.
    pub fn retweeted_author(&self) -> Option<UserId> {
        match self.kind {
            TweetKind::Retweet { original_author, .. } => Some(original_author),
            TweetKind::Original => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountType {
    Regular,
    Verified,
    Expert,
}

impl AccountType {
    pub fn as_str(self) -> &'static str {
        match self {
            AccountType::Regular => "regular",
            AccountType::Verified => "verified",
            AccountType::Expert => "expert",
        }
    }
}

impl FromStr for AccountType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regular" => Ok(AccountType::Regular),
            "verified" => Ok(AccountType::Verified),
            "expert" => Ok(AccountType::Expert),
            other => Err(format!("unknown account type `{other}`")),
        }
    }
}

/// Generator ground truth. Only evaluation code may look at this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum GroundTruth {
    Organic,
    SpamRing { seed: UserId },
}

impl GroundTruth {
    pub fn is_spam(self) -> bool {
        matches!(self, GroundTruth::SpamRing { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum AccountStatus {
    Active,
    Deleted { at: Timestamp },
}

impl AccountStatus {
    pub fn is_deleted(self) -> bool {
        matches!(self, AccountStatus::Deleted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub id: UserId,
    pub account_type: AccountType,
    pub truth: GroundTruth,
    pub status: AccountStatus,
}

impl UserRecord {
    pub fn organic(id: u32) -> Self {
        UserRecord {
            id: UserId(id),
            account_type: AccountType::Regular,
            truth: GroundTruth::Organic,
            status: AccountStatus::Active,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub tweets: usize,
    pub retweets: usize,
    pub users: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub n_tweets: usize,
    pub n_retweets: usize,
    pub n_originals: usize,
    pub n_users: usize,
    pub n_retweeting_users: usize,
    pub n_retweeted_users: usize,
}

impl Summary {
    pub fn retweet_fraction(&self) -> f64 {
        if self.n_tweets == 0 {
            0.0
        } else {
            self.n_retweets as f64 / self.n_tweets as f64
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("retweet {tweet} points at unknown original {original}")]
    UnknownOriginal { tweet: TweetId, original: TweetId },
    #[error("retweet {tweet} points at {original}, which is itself a retweet")]
    RetweetOfRetweet { tweet: TweetId, original: TweetId },
    #[error("retweet {tweet} disagrees with its original {original} on {field}")]
    InconsistentRetweet {
        tweet: TweetId,
        original: TweetId,
        field: &'static str,
    },
    #[error("duplicate tweet id {0}")]
    DuplicateId(TweetId),
    #[error("duplicate user id {0}")]
    DuplicateUser(UserId),
    #[error("user {user} belongs to a ring with invalid seed {seed}")]
    BadSeed { user: UserId, seed: UserId },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("integrity: {0}")]
    Integrity(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Users plus tweets kept in `(at, id)` order, with referential integrity.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    users: BTreeMap<UserId, UserRecord>,
    tweets: Vec<Tweet>,
    positions: HashMap<TweetId, usize>,
    counters: Counters,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users && self.tweets == other.tweets
    }
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a corpus from unordered parts, checking integrity only once
    /// everything is present.
    pub fn from_parts(users: Vec<UserRecord>, mut tweets: Vec<Tweet>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for u in users {
            let id = u.id;
            if map.insert(id, u).is_some() {
                return Err(CorpusError::DuplicateUser(id));
            }
        }
        for u in map.values() {
            if let GroundTruth::SpamRing { seed } = u.truth {
                if seed == u.id || !map.contains_key(&seed) {
                    return Err(CorpusError::BadSeed { user: u.id, seed });
                }
            }
        }
        tweets.sort_by_key(|t| (t.at, t.id));
        let mut positions = HashMap::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if positions.insert(t.id, i).is_some() {
                return Err(CorpusError::DuplicateId(t.id));
            }
        }
        let mut corpus = Corpus {
            users: map,
            tweets,
            positions,
            counters: Counters::default(),
        };
        for t in &corpus.tweets {
            corpus.check_tweet(t)?;
        }
        corpus.counters = corpus.recount();
        Ok(corpus)
    }

    pub fn add_user(&mut self, user: UserRecord) -> Result<(), CorpusError> {
        if self.users.contains_key(&user.id) {
            return Err(CorpusError::DuplicateUser(user.id));
        }
        if let GroundTruth::SpamRing { seed } = user.truth {
            if seed == user.id || !self.users.contains_key(&seed) {
                return Err(CorpusError::BadSeed { user: user.id, seed });
            }
        }
        self.users.insert(user.id, user);
        self.counters.users += 1;
        Ok(())
    }

    pub fn append_tweet(&mut self, tweet: Tweet) -> Result<(), CorpusError> {
        if self.positions.contains_key(&tweet.id) {
            return Err(CorpusError::DuplicateId(tweet.id));
        }
        self.check_tweet(&tweet)?;
        let key = (tweet.at, tweet.id);
        let is_rt = tweet.is_retweet();
        match self.tweets.last() {
            Some(last) if (last.at, last.id) > key => {
                let pos = self.tweets.partition_point(|t| (t.at, t.id) < key);
                self.tweets.insert(pos, tweet);
                for (i, t) in self.tweets.iter().enumerate().skip(pos) {
                    self.positions.insert(t.id, i);
                }
            }
            _ => {
                self.positions.insert(tweet.id, self.tweets.len());
                self.tweets.push(tweet);
            }
        }
        self.counters.tweets += 1;
        if is_rt {
            self.counters.retweets += 1;
        }
        Ok(())
    }

    fn check_tweet(&self, tweet: &Tweet) -> Result<(), CorpusError> {
        if !self.users.contains_key(&tweet.author) {
            return Err(CorpusError::UnknownUser(tweet.author));
        }
        if let TweetKind::Retweet {
            original_tweet,
            original_author,
        } = tweet.kind
        {
            let original = self
                .tweet(original_tweet)
                .ok_or(CorpusError::UnknownOriginal {
                    tweet: tweet.id,
                    original: original_tweet,
                })?;
            if original.is_retweet() {
                return Err(CorpusError::RetweetOfRetweet {
                    tweet: tweet.id,
                    original: original_tweet,
                });
            }
            if !self.users.contains_key(&original_author) {
                return Err(CorpusError::UnknownUser(original_author));
            }
            if original.author != original_author {
                return Err(CorpusError::InconsistentRetweet {
                    tweet: tweet.id,
                    original: original_tweet,
                    field: "author",
                });
            }
            if original.keyword != tweet.keyword {
                return Err(CorpusError::InconsistentRetweet {
                    tweet: tweet.id,
                    original: original_tweet,
                    field: "keyword",
                });
            }
        }
        Ok(())
    }

    fn recount(&self) -> Counters {
        Counters {
            tweets: self.tweets.len(),
            retweets: self.tweets.iter().filter(|t| t.is_retweet()).count(),
            users: self.users.len(),
        }
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn users(&self) -> impl ExactSizeIterator<Item = &UserRecord> + '_ {
        self.users.values()
    }

    pub fn user(&self, id: UserId) -> Option<&UserRecord> {
        self.users.get(&id)
    }

    /// Tweets in nondecreasing timestamp order.
    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn tweet(&self, id: TweetId) -> Option<&Tweet> {
        self.positions.get(&id).map(|&i| &self.tweets[i])
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Hour index one past the last tweet, i.e. the number of hourly windows
    /// the corpus spans from the epoch.
    pub fn span_hours(&self) -> u32 {
        self.tweets.last().map_or(0, |t| t.at.hour() + 1)
    }

    /// Replaces account statuses; tweets and ground truth are untouched.
    pub fn with_statuses<F>(&self, mut status: F) -> Corpus
    where
        F: FnMut(&UserRecord) -> AccountStatus,
    {
        let mut out = self.clone();
        for u in out.users.values_mut() {
            u.status = status(u);
        }
        out
    }

    /// New corpus keeping only the tweets accepted by `keep`. The caller must
    /// not drop an original while keeping its retweets.
    pub fn filter_tweets<F>(&self, mut keep: F) -> Result<Corpus, CorpusError>
    where
        F: FnMut(&Tweet) -> bool,
    {
        let tweets: Vec<Tweet> = self.tweets.iter().filter(|t| keep(t)).cloned().collect();
        let users = self.users.values().cloned().collect();
        Corpus::from_parts(users, tweets)
    }

    pub fn summary(&self) -> Summary {
        let mut retweeting = HashSet::new();
        let mut retweeted = HashSet::new();
        for t in &self.tweets {
            if let Some(author) = t.retweeted_author() {
                retweeting.insert(t.author);
                retweeted.insert(author);
            }
        }
        let c = self.counters;
        Summary {
            n_tweets: c.tweets,
            n_retweets: c.retweets,
            n_originals: c.tweets - c.retweets,
            n_users: c.users,
            n_retweeting_users: retweeting.len(),
            n_retweeted_users: retweeted.len(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush()
    }

    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for u in self.users.values() {
            writeln!(w, "{}", format_user(u))?;
        }
        for t in &self.tweets {
            writeln!(w, "{}", format_tweet(t))?;
        }
        Ok(())
    }

    /// JSON-lines rendering with the same fields as the text format.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        #[derive(Serialize)]
        #[serde(tag = "record", rename_all = "snake_case")]
        enum Line<'a> {
            User(&'a UserRecord),
            Tweet(&'a Tweet),
        }
        for u in self.users.values() {
            serde_json::to_writer(&mut *w, &Line::User(u))?;
            w.write_all(b"\n")?;
        }
        for t in &self.tweets {
            serde_json::to_writer(&mut *w, &Line::Tweet(t))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus, LoadError> {
        let file = fs::File::open(path)?;
        Self::read_text(BufReader::new(file))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Corpus, LoadError> {
        let mut users = Vec::new();
        let mut tweets = Vec::new();
        let mut interned: HashMap<String, Keyword> = HashMap::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let err = |message: String| LoadError::Parse {
                line: lineno,
                message,
            };
            match parse_line(trimmed, &mut interned).map_err(err)? {
                Record::User(u) => users.push(u),
                Record::Tweet(t) => tweets.push(t),
            }
        }
        Ok(Corpus::from_parts(users, tweets)?)
    }
}

enum Record {
    User(UserRecord),
    Tweet(Tweet),
}

fn format_user(u: &UserRecord) -> String {
    let truth = match u.truth {
        GroundTruth::Organic => "organic".to_string(),
        GroundTruth::SpamRing { seed } => format!("spam:{seed}"),
    };
    let status = match u.status {
        AccountStatus::Active => "active".to_string(),
        AccountStatus::Deleted { at } => format!("deleted:{}", at.0),
    };
    format!("U {} {} {} {}", u.id, u.account_type.as_str(), truth, status)
}

fn format_tweet(t: &Tweet) -> String {
    match t.kind {
        TweetKind::Original => format!("T {} {} {} {} O", t.id, t.author, t.at.0, t.keyword),
        TweetKind::Retweet {
            original_tweet,
            original_author,
        } => format!(
            "T {} {} {} {} R {} {}",
            t.id, t.author, t.at.0, t.keyword, original_tweet, original_author
        ),
    }
}

fn num<T: FromStr>(field: &str, what: &str) -> Result<T, String> {
    field
        .parse()
        .map_err(|_| format!("bad {what} `{field}`"))
}

fn parse_line(line: &str, interned: &mut HashMap<String, Keyword>) -> Result<Record, String> {
    let fields: Vec<&str> = line.split(' ').collect();
    match fields.first().copied() {
        Some("U") => {
            if fields.len() != 5 {
                return Err(format!("user record needs 5 fields, got {}", fields.len()));
            }
            let id = UserId(num(fields[1], "user id")?);
            let account_type = fields[2].parse()?;
            let truth = match fields[3] {
                "organic" => GroundTruth::Organic,
                s => match s.strip_prefix("spam:") {
                    Some(seed) => GroundTruth::SpamRing {
                        seed: UserId(num(seed, "ring seed")?),
                    },
                    None => return Err(format!("bad truth label `{s}`")),
                },
            };
            let status = match fields[4] {
                "active" => AccountStatus::Active,
                s => match s.strip_prefix("deleted:") {
                    Some(at) => AccountStatus::Deleted {
                        at: Timestamp(num(at, "deletion time")?),
                    },
                    None => return Err(format!("bad status `{s}`")),
                },
            };
            Ok(Record::User(UserRecord {
                id,
                account_type,
                truth,
                status,
            }))
        }
        Some("T") => {
            if fields.len() < 6 {
                return Err(format!("tweet record needs at least 6 fields, got {}", fields.len()));
            }
            let id = TweetId(num(fields[1], "tweet id")?);
            let author = UserId(num(fields[2], "author")?);
            let at = Timestamp(num(fields[3], "minutes")?);
            let keyword = match interned.get(fields[4]) {
                Some(k) => k.clone(),
                None => {
                    let k = Keyword::new(fields[4]);
                    interned.insert(fields[4].to_string(), k.clone());
                    k
                }
            };
            let kind = match (fields[5], fields.len()) {
                ("O", 6) => TweetKind::Original,
                ("R", 8) => TweetKind::Retweet {
                    original_tweet: TweetId(num(fields[6], "original tweet")?),
                    original_author: UserId(num(fields[7], "original author")?),
                },
                (k, n) => return Err(format!("bad tweet kind `{k}` with {n} fields")),
            };
            Ok(Record::Tweet(Tweet {
                id,
                author,
                at,
                keyword,
                kind,
            }))
        }
        _ => Err("record must start with `U` or `T`".to_string()),
    }
}
