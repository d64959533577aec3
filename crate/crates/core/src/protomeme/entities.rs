//! Matching rules for hashtags, mentions, URLs, and phrases.

use std::collections::HashSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::porter;
use super::stopwords::Stopwords;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bhttps?://\S+").unwrap());
// sigil must not follow a word character, so e-mail addresses are not mentions
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(^|[^\w])([#@])(\w+)").unwrap());

const URL_TRAILING: &[char] = &[
    '.', ',', ';', ':', '!', '?', ')', ']', '}', '"', '\'', '…', '>',
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Hashtag,
    Mention,
    Url,
    Phrase,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Hashtag => "hashtag",
            EntityKind::Mention => "mention",
            EntityKind::Url => "url",
            EntityKind::Phrase => "phrase",
        })
    }
}

/// Normalized entity identifying a protomeme.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityKey {
    pub kind: EntityKind,
    pub value: String,
}

impl EntityKey {
    pub fn hashtag(tag: &str) -> Self {
        EntityKey {
            kind: EntityKind::Hashtag,
            value: normalize_hashtag(tag),
        }
    }

    pub fn mention(user: &str) -> Self {
        EntityKey {
            kind: EntityKind::Mention,
            value: normalize_mention(user),
        }
    }

    pub fn url(url: &str) -> Self {
        EntityKey {
            kind: EntityKind::Url,
            value: normalize_url(url),
        }
    }

    /// Phrase key from already-normalized text or tokens.
    pub fn phrase(text: &str) -> Self {
        EntityKey {
            kind: EntityKind::Phrase,
            value: canonical_phrase(text),
        }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.value)
    }
}

pub fn normalize_hashtag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

pub fn normalize_mention(user: &str) -> String {
    user.trim().trim_start_matches('@').to_string()
}

/// Byte-exact URL after trimming trailing punctuation.
pub fn normalize_url(url: &str) -> String {
    url.trim().trim_end_matches(URL_TRAILING).to_string()
}

/// Lowercase with single-space separation.
pub fn canonical_phrase(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextEntities {
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub urls: Vec<String>,
}

fn push_unique(seen: &mut HashSet<String>, out: &mut Vec<String>, value: String) {
    if !value.is_empty() && seen.insert(value.clone()) {
        out.push(value);
    }
}

/// Entities recoverable from raw text, in order of first appearance.
pub fn text_entities(text: &str) -> TextEntities {
    let mut found = TextEntities::default();
    let mut seen_urls = HashSet::new();
    for m in URL.find_iter(text) {
        push_unique(&mut seen_urls, &mut found.urls, normalize_url(m.as_str()));
    }
    let without_urls = URL.replace_all(text, " ");
    let (mut seen_tags, mut seen_users) = (HashSet::new(), HashSet::new());
    for cap in TAG.captures_iter(&without_urls) {
        let body = &cap[3];
        if &cap[2] == "#" {
            push_unique(&mut seen_tags, &mut found.hashtags, normalize_hashtag(body));
        } else {
            push_unique(&mut seen_users, &mut found.mentions, normalize_mention(body));
        }
    }
    found
}

/// Residual text with URLs, hashtags, and mentions removed.
pub fn strip_entities(text: &str) -> String {
    let without_urls = URL.replace_all(text, " ");
    TAG.replace_all(&without_urls, "$1 ").into_owned()
}

/// Lowercase, punctuation-free, stopword-filtered, stemmed tokens of the
/// residual text, in original order.
pub fn phrase_tokens(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let residual = strip_entities(text).to_lowercase().replace(['\'', '’'], "");
    residual
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .map(porter::stem)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str =
        "@All_4Given Gingrich: Romney Most Likely Nominee http://t.co/CectDLni #All4Given";

    #[test]
    fn example_text_entities() {
        let e = text_entities(EXAMPLE);
        assert_eq!(e.hashtags, vec!["all4given"]);
        assert_eq!(e.mentions, vec!["All_4Given"]);
        assert_eq!(e.urls, vec!["http://t.co/CectDLni"]);
    }

    #[test]
    fn example_phrase() {
        let tokens = phrase_tokens(EXAMPLE, &Stopwords::english());
        assert_eq!(tokens.join(" "), "gingrich romnei most like nomine");
    }

    #[test]
    fn url_trailing_punctuation_and_email() {
        let e = text_entities("see (http://x.org/a?b=1). mail me@host.com");
        assert_eq!(e.urls, vec!["http://x.org/a?b=1"]);
        assert!(e.mentions.is_empty());
    }

    #[test]
    fn repeated_hashtags_collapse() {
        let e = text_entities("#A #a hello #A");
        assert_eq!(e.hashtags, vec!["a"]);
    }

    #[test]
    fn stopword_only_text_has_no_tokens() {
        assert!(phrase_tokens("The, and... of it!!", &Stopwords::english()).is_empty());
    }

    #[test]
    fn canonical_phrase_is_idempotent() {
        let once = canonical_phrase("  Gingrich   ROMNEI\tmost ");
        assert_eq!(once, "gingrich romnei most");
        assert_eq!(canonical_phrase(&once), once);
    }

    #[test]
    fn keys_order_by_kind_then_value() {
        let mut keys = [
            EntityKey::phrase("b"),
            EntityKey::url("http://a"),
            EntityKey::hashtag("#Z"),
            EntityKey::mention("@m"),
            EntityKey::hashtag("a"),
        ];
        keys.sort();
        let shown: Vec<String> = keys.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["hashtag:a", "hashtag:z", "mention:m", "url:http://a", "phrase:b"]);
    }
}
