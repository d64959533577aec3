//! Protomemes: the sets of messages sharing one entity.
//!
//! Every message contributes to one protomeme per distinct entity it carries,
//! so protomemes overlap. Each protomeme keeps the projections its similarity
//! measures need: the message set, per-user frequencies, TF-IDF content, and
//! the diffusion set (authors, mentioned users, retweeters).

pub mod entities;
pub mod porter;
pub mod stopwords;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

pub use entities::{EntityKey, EntityKind};
pub use stopwords::Stopwords;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::TweetRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protomeme {
    pub key: EntityKey,
    pub tweet_ids: BTreeSet<String>,
    /// Number of the protomeme's messages posted by each user.
    pub user_freq: BTreeMap<String, u32>,
    pub term_weights: BTreeMap<String, f64>,
    /// Authors, mentioned users, and retweeters.
    pub diffusion_set: BTreeSet<String>,
    /// Raw counts of the concatenated phrase tokens; not exported.
    #[serde(skip)]
    pub term_counts: BTreeMap<String, u32>,
}

impl Protomeme {
    pub fn new(key: EntityKey) -> Self {
        Protomeme {
            key,
            tweet_ids: BTreeSet::new(),
            user_freq: BTreeMap::new(),
            term_weights: BTreeMap::new(),
            diffusion_set: BTreeSet::new(),
            term_counts: BTreeMap::new(),
        }
    }

    /// Adds one message with its already-normalized phrase tokens.
    pub fn add_tweet(&mut self, tweet: &TweetRecord, tokens: &[String]) {
        if !self.tweet_ids.insert(tweet.tweet_id.clone()) {
            return;
        }
        *self.user_freq.entry(tweet.author_id.clone()).or_insert(0) += 1;
        self.diffusion_set.insert(tweet.author_id.clone());
        self.diffusion_set
            .extend(tweet.mentions.iter().map(|m| entities::normalize_mention(m)));
        self.diffusion_set.extend(tweet.retweeter_ids.iter().cloned());
        for t in tokens {
            *self.term_counts.entry(t.clone()).or_insert(0) += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.tweet_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweet_ids.is_empty()
    }
}

/// Entities of one message plus the phrase tokens feeding its content vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetEntities {
    pub keys: Vec<EntityKey>,
    pub phrase_tokens: Vec<String>,
}

pub fn analyze_tweet(tweet: &TweetRecord, stopwords: &Stopwords) -> TweetEntities {
    let mut keys: Vec<EntityKey> = Vec::new();
    let mut push = |k: EntityKey| {
        if !k.value.is_empty() && !keys.contains(&k) {
            keys.push(k);
        }
    };
    tweet.hashtags.iter().for_each(|h| push(EntityKey::hashtag(h)));
    tweet.mentions.iter().for_each(|m| push(EntityKey::mention(m)));
    tweet.urls.iter().for_each(|u| push(EntityKey::url(u)));
    let phrase_tokens = entities::phrase_tokens(&tweet.text, stopwords);
    if !phrase_tokens.is_empty() {
        push(EntityKey::phrase(&phrase_tokens.join(" ")));
    }
    TweetEntities {
        keys,
        phrase_tokens,
    }
}

/// Entity keys of one message: each distinct hashtag, mention and URL, plus
/// one phrase if any token survives normalization.
pub fn extract_entities(tweet: &TweetRecord, stopwords: &Stopwords) -> Vec<EntityKey> {
    analyze_tweet(tweet, stopwords).keys
}

/// Builds one protomeme per distinct entity in `records`, ordered by key,
/// with TF-IDF weights computed over this protomeme set.
pub fn build_protomemes(records: &[TweetRecord], stopwords: &Stopwords) -> Vec<Protomeme> {
    build_protomemes_with(records, stopwords, Execution::default())
}

pub fn build_protomemes_with(
    records: &[TweetRecord],
    stopwords: &Stopwords,
    exec: Execution,
) -> Vec<Protomeme> {
    let analyzed = exec.map_slice(records, |t| analyze_tweet(t, stopwords));
    let mut by_key: BTreeMap<EntityKey, Protomeme> = BTreeMap::new();
    for (tweet, found) in records.iter().zip(&analyzed) {
        for key in &found.keys {
            by_key
                .entry(key.clone())
                .or_insert_with(|| Protomeme::new(key.clone()))
                .add_tweet(tweet, &found.phrase_tokens);
        }
    }
    let mut protomemes: Vec<Protomeme> = by_key.into_values().collect();
    if !protomemes.is_empty() {
        compute_tfidf(&mut protomemes).expect("non-empty protomeme set");
    }
    protomemes
}

/// Fills `term_weights` with `tf * ln(N / df)` where the documents are the
/// protomemes themselves: `tf` is the raw count in the protomeme, `N` the
/// number of protomemes, and `df` the number of protomemes containing the term.
pub fn compute_tfidf(protomemes: &mut [Protomeme]) -> Result<()> {
    if protomemes.is_empty() {
        return Err(Error::Empty("protomeme set"));
    }
    let docs = protomemes.iter().map(|p| &p.term_counts);
    let idf = inverse_document_frequency(docs, protomemes.len());
    for p in protomemes.iter_mut() {
        p.term_weights = tfidf_weights(&p.term_counts, &idf);
    }
    Ok(())
}

/// `ln(N / df)` for each term of the corpus.
pub fn inverse_document_frequency<'a>(
    docs: impl IntoIterator<Item = &'a BTreeMap<String, u32>>,
    n_docs: usize,
) -> BTreeMap<String, f64> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        for term in doc.keys() {
            *df.entry(term.clone()).or_insert(0) += 1;
        }
    }
    df.into_iter()
        .map(|(t, d)| (t, (n_docs as f64 / d as f64).ln()))
        .collect()
}

pub fn tfidf_weights(
    counts: &BTreeMap<String, u32>,
    idf: &BTreeMap<String, f64>,
) -> BTreeMap<String, f64> {
    counts
        .iter()
        .map(|(t, &c)| (t.clone(), c as f64 * idf.get(t).copied().unwrap_or(0.0)))
        .collect()
}

/// Raw token counts of a token sequence.
pub fn term_counts<S: AsRef<str>>(tokens: &[S]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref().to_string()).or_insert(0) += 1;
    }
    counts
}

/// Occurrence counts from an extraction run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub tweets: usize,
    /// Messages carrying each entity, summed over distinct entities per message.
    pub hashtags: usize,
    pub mentions: usize,
    pub urls: usize,
    pub phrases: usize,
    pub distinct_hashtags: usize,
    pub distinct_mentions: usize,
    pub distinct_urls: usize,
    pub distinct_phrases: usize,
    pub protomemes: usize,
}

impl ExtractionStats {
    pub fn collect(records: &[TweetRecord], protomemes: &[Protomeme], stopwords: &Stopwords) -> Self {
        let mut stats = ExtractionStats {
            tweets: records.len(),
            protomemes: protomemes.len(),
            ..Default::default()
        };
        for r in records {
            for k in extract_entities(r, stopwords) {
                match k.kind {
                    EntityKind::Hashtag => stats.hashtags += 1,
                    EntityKind::Mention => stats.mentions += 1,
                    EntityKind::Url => stats.urls += 1,
                    EntityKind::Phrase => stats.phrases += 1,
                }
            }
        }
        for p in protomemes {
            match p.key.kind {
                EntityKind::Hashtag => stats.distinct_hashtags += 1,
                EntityKind::Mention => stats.distinct_mentions += 1,
                EntityKind::Url => stats.distinct_urls += 1,
                EntityKind::Phrase => stats.distinct_phrases += 1,
            }
        }
        stats
    }
}

pub fn write_protomemes_jsonl<W: Write>(protomemes: &[Protomeme], mut out: W) -> Result<()> {
    for p in protomemes {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_protomemes_jsonl<R: BufRead>(input: R) -> Result<Vec<Protomeme>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Protomeme = serde_json::from_str(&line)
            .map_err(|e| Error::invalid(format!("protomeme line {}: {e}", i + 1)))?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str =
        "@All_4Given Gingrich: Romney Most Likely Nominee http://t.co/CectDLni #All4Given";

    fn tweet(id: &str, user: &str, text: &str) -> TweetRecord {
        TweetRecord::from_text(id, user, text, 0)
    }

    #[test]
    fn worked_example_has_four_entities() {
        let keys = extract_entities(&tweet("1", "u", EXAMPLE), &Stopwords::english());
        assert_eq!(
            keys,
            vec![
                EntityKey::hashtag("all4given"),
                EntityKey::mention("All_4Given"),
                EntityKey::url("http://t.co/CectDLni"),
                EntityKey::phrase("gingrich romnei most like nomine"),
            ]
        );
        let protos = build_protomemes(&[tweet("1", "u", EXAMPLE)], &Stopwords::english());
        assert_eq!(protos.len(), 4);
        assert!(protos.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn stopword_text_yields_no_phrase() {
        let keys = extract_entities(&tweet("1", "u", "the and of!"), &Stopwords::english());
        assert!(keys.is_empty());
    }

    #[test]
    fn repeated_hashtag_is_one_entity() {
        let keys = extract_entities(&tweet("1", "u", "#A #A hello"), &Stopwords::english());
        assert_eq!(keys, vec![EntityKey::hashtag("a"), EntityKey::phrase("hello")]);
    }

    #[test]
    fn shared_hashtag_across_authors() {
        let protos = build_protomemes(
            &[tweet("1", "a", "#x one"), tweet("2", "b", "#x two")],
            &Stopwords::english(),
        );
        let x = protos.iter().find(|p| p.key == EntityKey::hashtag("x")).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.user_freq.len(), 2);
    }

    #[test]
    fn diffusion_set_joins_authors_mentions_retweeters() {
        let mut t = tweet("1", "u1", "hi @u2 #topic");
        t.retweeter_ids = vec!["u3".into()];
        let protos = build_protomemes(&[t], &Stopwords::english());
        let expected: BTreeSet<String> = ["u1", "u2", "u3"].iter().map(|s| s.to_string()).collect();
        for p in &protos {
            assert_eq!(p.diffusion_set, expected, "{}", p.key);
        }
    }

    #[test]
    fn single_protomeme_corpus_has_zero_weights() {
        let mut protos = vec![Protomeme::new(EntityKey::hashtag("x"))];
        protos[0].term_counts = term_counts(&["a", "b", "a"]);
        compute_tfidf(&mut protos).unwrap();
        assert!(protos[0].term_weights.values().all(|&w| w == 0.0));
    }

    #[test]
    fn idf_hand_computation() {
        let mut protos = vec![
            Protomeme::new(EntityKey::hashtag("x")),
            Protomeme::new(EntityKey::hashtag("y")),
        ];
        protos[0].term_counts = term_counts(&["shared", "only", "only"]);
        protos[1].term_counts = term_counts(&["shared"]);
        compute_tfidf(&mut protos).unwrap();
        assert_eq!(protos[0].term_weights["shared"], 0.0);
        assert_eq!(protos[1].term_weights["shared"], 0.0);
        assert_eq!(protos[0].term_weights["only"], 2.0 * 2f64.ln());
    }

    #[test]
    fn tfidf_on_empty_set_errors() {
        assert!(matches!(compute_tfidf(&mut []), Err(Error::Empty(_))));
    }

    #[test]
    fn jsonl_round_trip_keeps_exported_fields() {
        let protos = build_protomemes(&[tweet("1", "a", EXAMPLE)], &Stopwords::english());
        let mut buf = Vec::new();
        write_protomemes_jsonl(&protos, &mut buf).unwrap();
        let back = read_protomemes_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.len(), protos.len());
        for (a, b) in protos.iter().zip(&back) {
            assert_eq!(a.key, b.key);
            assert_eq!(a.tweet_ids, b.tweet_ids);
            assert_eq!(a.term_weights, b.term_weights);
            assert!(b.term_counts.is_empty());
        }
        let first = String::from_utf8(buf).unwrap();
        assert!(first.starts_with(r#"{"key":{"kind":"hashtag","value":"all4given"},"tweet_ids":["1"]"#));
    }

    #[test]
    fn stats_for_worked_example() {
        let recs = [tweet("1", "a", EXAMPLE)];
        let sw = Stopwords::english();
        let protos = build_protomemes(&recs, &sw);
        let s = ExtractionStats::collect(&recs, &protos, &sw);
        assert_eq!((s.tweets, s.hashtags, s.mentions, s.urls, s.phrases), (1, 1, 1, 1, 1));
    }

    fn arb_tweets() -> impl Strategy<Value = Vec<TweetRecord>> {
        let word = prop::sample::select(vec![
            "#alpha", "#beta", "@carol", "@dave", "http://t.co/x1", "http://t.co/y2",
            "running", "votes", "the", "campaign", "news", "of", "primary",
        ]);
        prop::collection::vec(
            (prop::collection::vec(word, 0..8), 0usize..5),
            1..25,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (words, user))| {
                    let mut t = tweet(&format!("t{i}"), &format!("u{user}"), &words.join(" "));
                    if i % 3 == 0 {
                        t.retweeter_ids = vec![format!("r{}", i % 4)];
                    }
                    t
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn protomeme_invariants(tweets in arb_tweets()) {
            let sw = Stopwords::english();
            let protos = build_protomemes(&tweets, &sw);
            let entity_total: usize = tweets.iter().map(|t| extract_entities(t, &sw).len()).sum();
            prop_assert_eq!(protos.iter().map(Protomeme::len).sum::<usize>(), entity_total);
            for t in &tweets {
                let k = extract_entities(t, &sw).len();
                let member_of = protos.iter().filter(|p| p.tweet_ids.contains(&t.tweet_id)).count();
                prop_assert_eq!(member_of, k);
            }
            let n = protos.len();
            for p in &protos {
                prop_assert!(p.user_freq.len() <= p.len());
                prop_assert_eq!(p.user_freq.values().map(|&c| c as usize).sum::<usize>(), p.len());
                prop_assert!(p.user_freq.keys().all(|u| p.diffusion_set.contains(u)));
                prop_assert!(p.term_weights.values().all(|&w| w >= 0.0));
                for (term, &w) in &p.term_weights {
                    let df = protos.iter().filter(|q| q.term_counts.contains_key(term)).count();
                    if df == n { prop_assert_eq!(w, 0.0); }
                }
            }
        }
    }
}
