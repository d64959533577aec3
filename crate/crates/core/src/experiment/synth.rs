//! Seeded planted-topic corpus generator.
//!
//! Every message has a primary topic and, with probability
//! `multi_topic_rate`, a second one. Its text mixes words from its topics'
//! vocabularies with background words shared by all topics; hashtags, URLs,
//! authors, mentions and retweeters come from per-topic pools (or from global
//! pools when the corresponding signal is switched off). The follower graph
//! is dense inside each topic's user community and sparse across them.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::followers::FollowerGraph;
use crate::evaluation::GroundTruth;
use crate::ingest::TweetRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub topics: usize,
    pub tweets: usize,
    pub multi_topic_rate: f64,
    pub seed: u64,
    pub topic_vocabulary: usize,
    pub background_vocabulary: usize,
    /// Inclusive range of topic words per message.
    pub topic_words: (usize, usize),
    pub background_words: (usize, usize),
    pub hashtags_per_topic: usize,
    pub hashtag_rate: f64,
    pub urls_per_topic: usize,
    pub url_rate: f64,
    pub users_per_topic: usize,
    pub mention_rate: f64,
    pub max_retweeters: usize,
    /// Draw hashtags and URLs from the message's topic (else from a global pool).
    pub topical_entities: bool,
    /// Draw authors, mentions and retweeters from the topic's community.
    pub topical_users: bool,
    pub follows_per_user: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            topics: 10,
            tweets: 1000,
            multi_topic_rate: 0.08,
            seed: 42,
            topic_vocabulary: 40,
            background_vocabulary: 300,
            topic_words: (1, 3),
            background_words: (2, 4),
            hashtags_per_topic: 3,
            hashtag_rate: 0.6,
            urls_per_topic: 6,
            url_rate: 0.3,
            users_per_topic: 25,
            mention_rate: 0.3,
            max_retweeters: 2,
            topical_entities: true,
            topical_users: true,
            follows_per_user: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<TweetRecord>,
    pub truth: GroundTruth,
    pub followers: FollowerGraph,
}

const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 4] = ["a", "i", "o", "u"];

/// Distinct pronounceable words of three syllables.
fn vocabulary(rng: &mut ChaCha8Rng, n: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w: String = (0..3)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String], range: (usize, usize)) -> Vec<&'a str> {
    let k = rng.gen_range(range.0..=range.1).min(pool.len());
    pool.choose_multiple(rng, k).map(String::as_str).collect()
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topics = cfg.topics.max(1);
    let mut taken = BTreeSet::new();
    let topic_vocab: Vec<Vec<String>> = (0..topics)
        .map(|_| vocabulary(&mut rng, cfg.topic_vocabulary, &mut taken))
        .collect();
    let background = vocabulary(&mut rng, cfg.background_vocabulary, &mut taken);
    let hashtags: Vec<Vec<String>> = (0..topics)
        .map(|t| (0..cfg.hashtags_per_topic).map(|j| format!("tag{t}x{j}")).collect())
        .collect();
    let urls: Vec<Vec<String>> = (0..topics)
        .map(|t| (0..cfg.urls_per_topic).map(|j| format!("http://ex.co/{t}/{j}")).collect())
        .collect();
    let users: Vec<Vec<String>> = (0..topics)
        .map(|t| (0..cfg.users_per_topic).map(|j| format!("user{t}x{j}")).collect())
        .collect();
    let all_tags: Vec<String> = hashtags.concat();
    let all_urls: Vec<String> = urls.concat();
    let all_users: Vec<String> = users.concat();

    let mut records = Vec::with_capacity(cfg.tweets);
    let mut rows = Vec::with_capacity(cfg.tweets);
    for i in 0..cfg.tweets {
        let primary = i % topics;
        let mut own = vec![primary];
        if topics > 1 && rng.gen_bool(cfg.multi_topic_rate) {
            let other = (primary + rng.gen_range(1..topics)) % topics;
            own.push(other);
        }
        let mut words: Vec<&str> = Vec::new();
        for &t in &own {
            words.extend(pick(&mut rng, &topic_vocab[t], cfg.topic_words));
        }
        words.extend(pick(&mut rng, &background, cfg.background_words));
        words.shuffle(&mut rng);
        let mut text = words.join(" ");

        let tag_pool = |t: usize| if cfg.topical_entities { &hashtags[t] } else { &all_tags };
        let url_pool = |t: usize| if cfg.topical_entities { &urls[t] } else { &all_urls };
        let user_pool = |t: usize| if cfg.topical_users { &users[t] } else { &all_users };
        for &t in &own {
            if rng.gen_bool(cfg.hashtag_rate) {
                if let Some(tag) = tag_pool(t).choose(&mut rng) {
                    text.push_str(&format!(" #{tag}"));
                }
            }
        }
        if rng.gen_bool(cfg.url_rate) {
            if let Some(url) = url_pool(primary).choose(&mut rng) {
                text.push_str(&format!(" {url}"));
            }
        }
        let author = user_pool(primary).choose(&mut rng).cloned().unwrap_or_default();
        if rng.gen_bool(cfg.mention_rate) {
            if let Some(m) = user_pool(primary).choose(&mut rng) {
                text = format!("@{m} {text}");
            }
        }
        let mut record = TweetRecord::from_text(format!("s{i:05}"), author, text, i as i64 * 10);
        let n_rt = rng.gen_range(0..=cfg.max_retweeters);
        let mut rts: Vec<String> = user_pool(primary).choose_multiple(&mut rng, n_rt).cloned().collect();
        rts.sort();
        record.retweeter_ids = rts;
        rows.push((
            record.tweet_id.clone(),
            own.iter().map(|t| format!("topic{t}")).collect::<Vec<_>>(),
        ));
        records.push(record);
    }

    let mut followers = FollowerGraph::default();
    for (t, community) in users.iter().enumerate() {
        for u in community {
            let mut fs: BTreeSet<String> = community
                .choose_multiple(&mut rng, cfg.follows_per_user.min(community.len()))
                .filter(|f| *f != u)
                .cloned()
                .collect();
            if topics > 1 {
                let other = (t + rng.gen_range(1..topics)) % topics;
                if let Some(f) = users[other].choose(&mut rng) {
                    fs.insert(f.clone());
                }
            }
            followers.followers.insert(u.clone(), fs);
        }
    }

    SynthCorpus {
        records,
        truth: GroundTruth::from_assignments(rows),
        followers,
    }
}
