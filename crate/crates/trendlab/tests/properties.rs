use std::collections::BTreeSet;

use proptest::prelude::*;
use trendlab::corpus::{AccountStatus, GroundTruth, Timestamp, Tweet, UserId, UserRecord};
use trendlab::pipeline::TrendView;
use trendlab::spam::{identify_suspects, remove_spam, retweet_profiles, DetectionMethod, SuspectSet};
use trendlab::stats::RatioClass;
use trendlab::verify::verify_corpus;
use trendlab::Corpus;

const KEYWORDS: [&str; 6] = ["ale", "bock", "cider", "dubbel", "ipa", "lager"];

#[derive(Debug, Clone)]
struct Draft {
    author: u32,
    minute: u32,
    keyword: usize,
    /// Retweet the n-th earlier original (mod their number), if any.
    retweet: Option<usize>,
}

fn draft(n_users: u32) -> impl Strategy<Value = Draft> {
    (0..n_users, 0u32..600, 0..KEYWORDS.len(), prop::option::weighted(0.6, any::<usize>()))
        .prop_map(|(author, minute, keyword, retweet)| Draft { author, minute, keyword, retweet })
}

fn build(n_users: u32, mut drafts: Vec<Draft>, deleted: &[bool]) -> Corpus {
    drafts.sort_by_key(|d| d.minute);
    let users = (0..n_users)
        .map(|i| UserRecord {
            status: if deleted[i as usize] {
                AccountStatus::Deleted { at: Timestamp(700) }
            } else {
                AccountStatus::Active
            },
            ..UserRecord::organic(i)
        })
        .collect();
    let mut originals: Vec<(u64, u32, usize)> = Vec::new();
    let mut tweets = Vec::new();
    for (id, d) in drafts.into_iter().enumerate() {
        let id = id as u64;
        match d.retweet.filter(|_| !originals.is_empty()) {
            Some(k) => {
                let (of, of_author, kw) = originals[k % originals.len()];
                tweets.push(Tweet::retweet(id, d.author, d.minute, KEYWORDS[kw], of, of_author));
            }
            None => {
                originals.push((id, d.author, d.keyword));
                tweets.push(Tweet::original(id, d.author, d.minute, KEYWORDS[d.keyword]));
            }
        }
    }
    Corpus::from_parts(users, tweets).expect("drafts are consistent")
}

fn corpus() -> impl Strategy<Value = Corpus> {
    (2u32..12)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(draft(n), 0..300), prop::collection::vec(any::<bool>(), n as usize)))
        .prop_map(|(n, drafts, deleted)| build(n, drafts, &deleted))
}

fn suspects_of(corpus: &Corpus, picks: &[bool]) -> SuspectSet {
    SuspectSet {
        users: corpus.users().map(|u| u.id).filter(|id| picks[id.0 as usize % picks.len()]).collect(),
        ..SuspectSet::empty()
    }
}

fn text(corpus: &Corpus) -> Vec<u8> {
    let mut buf = Vec::new();
    corpus.write_text(&mut buf).unwrap();
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // counters, snapshots, cumulative sums and profiles all agree with the
    // brute-force recomputation
    #[test]
    fn fast_paths_match_oracles(c in corpus()) {
        let report = verify_corpus(&c).unwrap();
        prop_assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn text_round_trip(c in corpus()) {
        let bytes = text(&c);
        let back = Corpus::read_text(&bytes[..]).unwrap();
        prop_assert_eq!(back.summary(), c.summary());
        prop_assert_eq!(text(&back), bytes);
    }

    #[test]
    fn growth_ratios_chain_and_never_shrink(c in corpus()) {
        let view = TrendView::new(&c);
        for tl in view.timelines(&c) {
            let n = tl.len();
            for class in [RatioClass::All, RatioClass::Originals, RatioClass::Retweets] {
                for i in 1..=n {
                    for j in 1..i {
                        if let Some(r) = tl.ratio(class, i, j) {
                            prop_assert!(r >= 1.0);
                            for k in 1..j {
                                if let Some(rjk) = tl.ratio(class, j, k) {
                                    let rik = tl.ratio(class, i, k).unwrap();
                                    prop_assert!((rik - r * rjk).abs() <= 1e-12 * rik);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lifeline_hours_are_snapshot_appearances(c in corpus()) {
        let view = TrendView::new(&c);
        for l in &view.lifelines {
            let appearances = view
                .snapshots
                .iter()
                .filter(|s| s.entries.iter().any(|e| e.keyword == l.keyword))
                .count();
            prop_assert_eq!(l.total_hours as usize, appearances);
            prop_assert_eq!(l.rank_history.len(), appearances);
        }
    }

    #[test]
    fn removal_is_sound_complete_and_idempotent(c in corpus(), picks in prop::collection::vec(any::<bool>(), 1..8)) {
        let suspects = suspects_of(&c, &picks);
        let (clean, report) = remove_spam(&c, &suspects).unwrap();
        let authored: BTreeSet<_> =
            c.tweets().iter().filter(|t| suspects.contains(t.author)).map(|t| t.id).collect();
        for t in clean.tweets() {
            prop_assert!(!suspects.contains(t.author));
            prop_assert!(t.retweeted_author().is_none_or(|a| !suspects.contains(a)));
        }
        // nothing else goes: every surviving-eligible tweet is still there
        let kept = c
            .tweets()
            .iter()
            .filter(|t| !authored.contains(&t.id) && t.retweeted_author().is_none_or(|a| !suspects.contains(a)))
            .count();
        prop_assert_eq!(clean.tweets().len(), kept);
        prop_assert_eq!(
            (c.tweets().len() - kept) as u64,
            report.n_removed_originals + report.n_removed_retweets
        );
        let (again, second) = remove_spam(&clean, &suspects).unwrap();
        prop_assert_eq!(second.n_removed_originals + second.n_removed_retweets, 0);
        prop_assert_eq!(text(&again), text(&clean));
    }

    // detection and analysis never read generator labels
    #[test]
    fn ground_truth_is_firewalled(c in corpus(), theta in 1.0f64..4.0) {
        let users: Vec<UserRecord> = c.users().cloned().collect();
        let first = users[0].id;
        let relabeled: Vec<UserRecord> = users
            .iter()
            .map(|u| UserRecord {
                truth: if u.id == first { GroundTruth::Organic } else { GroundTruth::SpamRing { seed: first } },
                ..*u
            })
            .collect();
        let other = Corpus::from_parts(relabeled, c.tweets().to_vec()).unwrap();
        let (a, b) = (TrendView::new(&c), TrendView::new(&other));
        prop_assert_eq!(&a.snapshots, &b.snapshots);
        prop_assert_eq!(retweet_profiles(&c, &a.snapshots), retweet_profiles(&other, &b.snapshots));
        for method in [DetectionMethod::RatioThreshold { theta }, DetectionMethod::DeletionOracle] {
            let (sa, sb) = (identify_suspects(&c, method), identify_suspects(&other, method));
            prop_assert_eq!(&sa, &sb);
            if let Ok(s) = sa {
                let (ca, _) = remove_spam(&c, &s).unwrap();
                let (cb, _) = remove_spam(&other, &s).unwrap();
                prop_assert_eq!(ca.tweets(), cb.tweets());
            }
        }
    }
}

#[test]
fn suspects_outside_the_corpus_are_harmless() {
    let c = build(3, vec![Draft { author: 0, minute: 1, keyword: 0, retweet: None }], &[false; 3]);
    let s = SuspectSet {
        users: [UserId(99)].into(),
        ..SuspectSet::empty()
    };
    let (clean, _) = remove_spam(&c, &s).unwrap();
    assert_eq!(clean.tweets().len(), 1);
}
