//! Parsing, deduplication, and windowing of raw message records.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kv::KvConfig;
use crate::protomeme::entities;

/// Longest message text accepted by the parser, in bytes.
pub const MAX_TEXT_BYTES: usize = 560;

/// One normalized message.
///
/// Serializes with a stable key order; this is the canonical JSON Lines form
/// written by [`write_jsonl`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    /// UTC seconds.
    pub timestamp: i64,
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub urls: Vec<String>,
    /// Users who retweeted this post.
    pub retweeter_ids: Vec<String>,
    /// Id of the original post when this record is itself a retweet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
}

impl TweetRecord {
    /// Builds a record whose entities are recovered from `text`.
    pub fn from_text(
        tweet_id: impl Into<String>,
        author_id: impl Into<String>,
        text: impl Into<String>,
        timestamp: i64,
    ) -> Self {
        let text = text.into();
        let found = entities::text_entities(&text);
        TweetRecord {
            tweet_id: tweet_id.into(),
            author_id: author_id.into(),
            text,
            timestamp,
            hashtags: found.hashtags,
            mentions: found.mentions,
            urls: found.urls,
            retweeter_ids: Vec::new(),
            retweet_of: None,
        }
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

/// Where each record field lives in an input JSON object.
///
/// A path is a dot-separated list of object keys; a segment suffixed with `[]`
/// maps the rest of the path over an array. Alternatives are separated by `|`
/// and tried left to right, e.g. `tweet_id|id_str|id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMapping {
    pub tweet_id: String,
    pub author_id: String,
    pub text: String,
    pub timestamp: String,
    pub hashtags: String,
    pub mentions: String,
    pub urls: String,
    pub retweeter_ids: String,
    pub retweet_of: String,
}

impl Default for FieldMapping {
    /// Accepts both the canonical form and common tweet-export field names.
    fn default() -> Self {
        FieldMapping {
            tweet_id: "tweet_id|id_str|id".into(),
            author_id: "author_id|user.screen_name|user.id_str|user_id".into(),
            text: "text|full_text".into(),
            timestamp: "timestamp|created_at|timestamp_ms".into(),
            hashtags: "hashtags|entities.hashtags[].text".into(),
            mentions: "mentions|entities.user_mentions[].screen_name".into(),
            urls: "urls|entities.urls[].expanded_url|entities.urls[].url".into(),
            retweeter_ids: "retweeter_ids".into(),
            retweet_of: "retweet_of|retweeted_status.id_str".into(),
        }
    }
}

impl FieldMapping {
    /// Overrides defaults with the entries of a key-value mapping file.
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let mut mapping = FieldMapping::default();
        for (key, value) in cfg.iter() {
            let slot = match key {
                "tweet_id" => &mut mapping.tweet_id,
                "author_id" => &mut mapping.author_id,
                "text" => &mut mapping.text,
                "timestamp" => &mut mapping.timestamp,
                "hashtags" => &mut mapping.hashtags,
                "mentions" => &mut mapping.mentions,
                "urls" => &mut mapping.urls,
                "retweeter_ids" => &mut mapping.retweeter_ids,
                "retweet_of" => &mut mapping.retweet_of,
                other => {
                    return Err(Error::config(format!("unknown field mapping key `{other}`")))
                }
            };
            if value.is_empty() {
                return Err(Error::config(format!("empty path for `{key}`")));
            }
            *slot = value.to_string();
        }
        Ok(mapping)
    }
}

fn lookup<'a>(value: &'a Value, path: &str, out: &mut Vec<&'a Value>) {
    let (head, rest) = match path.split_once('.') {
        Some((h, r)) => (h, Some(r)),
        None => (path, None),
    };
    let (key, spread) = match head.strip_suffix("[]") {
        Some(k) => (k, true),
        None => (head, false),
    };
    let Some(next) = value.get(key) else { return };
    if next.is_null() {
        return;
    }
    let targets: Vec<&Value> = if spread {
        match next.as_array() {
            Some(items) => items.iter().collect(),
            None => return,
        }
    } else {
        vec![next]
    };
    for target in targets {
        match rest {
            Some(r) => lookup(target, r, out),
            None => out.push(target),
        }
    }
}

/// Resolves the first alternative that is present. A spread path over an
/// empty array still counts as present.
fn resolve<'a>(value: &'a Value, alternatives: &str) -> Option<Vec<&'a Value>> {
    for path in alternatives.split('|').map(str::trim) {
        let mut out = Vec::new();
        lookup(value, path, &mut out);
        if !out.is_empty() {
            return Some(out);
        }
        if path.contains("[]") {
            let container = path.split("[]").next().unwrap_or_default();
            let mut arr = Vec::new();
            lookup(value, container, &mut arr);
            if arr.iter().any(|v| v.is_array()) {
                return Some(out);
            }
        }
    }
    None
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn string_list(values: &[&Value]) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    for v in values {
        match v {
            Value::Array(items) => {
                for item in items {
                    out.push(
                        scalar_string(item).ok_or_else(|| format!("non-scalar list item {item}"))?,
                    );
                }
            }
            other => out.push(scalar_string(other).ok_or_else(|| format!("bad list value {other}"))?),
        }
    }
    Ok(out)
}

/// Parses a timestamp into UTC seconds. Values without a timezone are UTC.
pub fn parse_timestamp(v: &Value) -> std::result::Result<i64, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().map(|f| f.floor() as i64))
            .ok_or_else(|| format!("bad timestamp {n}")),
        Value::String(s) => parse_timestamp_str(s.trim()),
        other => Err(format!("bad timestamp {other}")),
    }
}

fn parse_timestamp_str(s: &str) -> std::result::Result<i64, String> {
    if let Ok(secs) = s.parse::<i64>() {
        return Ok(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    if let Ok(dt) = DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y") {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc().timestamp());
        }
    }
    Err(format!("unrecognized timestamp `{s}`"))
}

fn dedup_in_order(items: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = HashSet::new();
    items
        .into_iter()
        .filter(|s| !s.is_empty() && seen.insert(s.clone()))
        .collect()
}

/// Parses one JSON line into a record; the error string explains the rejection.
pub fn parse_record(line: &str, mapping: &FieldMapping) -> std::result::Result<TweetRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if !value.is_object() {
        return Err("record is not a JSON object".into());
    }
    let required = |alts: &str, name: &str| -> std::result::Result<Value, String> {
        resolve(&value, alts)
            .and_then(|vs| vs.first().map(|v| (*v).clone()))
            .ok_or_else(|| format!("missing field `{name}`"))
    };
    let tweet_id = scalar_string(&required(&mapping.tweet_id, "tweet_id")?)
        .ok_or("tweet_id is not a scalar")?;
    let author_id = scalar_string(&required(&mapping.author_id, "author_id")?)
        .ok_or("author_id is not a scalar")?;
    let text = match required(&mapping.text, "text")? {
        Value::String(s) => s,
        _ => return Err("text is not a string".into()),
    };
    if text.len() > MAX_TEXT_BYTES {
        return Err(format!("text is {} bytes, above {MAX_TEXT_BYTES}", text.len()));
    }
    let timestamp = parse_timestamp(&required(&mapping.timestamp, "timestamp")?)?;

    let from_text = entities::text_entities(&text);
    let hashtags = match resolve(&value, &mapping.hashtags) {
        Some(vs) => string_list(&vs)?
            .iter()
            .map(|h| entities::normalize_hashtag(h))
            .collect(),
        None => from_text.hashtags,
    };
    let mentions = match resolve(&value, &mapping.mentions) {
        Some(vs) => string_list(&vs)?
            .iter()
            .map(|m| entities::normalize_mention(m))
            .collect(),
        None => from_text.mentions,
    };
    let urls = match resolve(&value, &mapping.urls) {
        Some(vs) => string_list(&vs)?
            .iter()
            .map(|u| entities::normalize_url(u))
            .collect(),
        None => from_text.urls,
    };
    let retweeter_ids = match resolve(&value, &mapping.retweeter_ids) {
        Some(vs) => string_list(&vs)?,
        None => Vec::new(),
    };
    let retweet_of = resolve(&value, &mapping.retweet_of)
        .and_then(|vs| vs.first().and_then(|v| scalar_string(v)));

    Ok(TweetRecord {
        tweet_id,
        author_id,
        text,
        timestamp,
        hashtags: dedup_in_order(hashtags),
        mentions: dedup_in_order(mentions),
        urls: dedup_in_order(urls),
        retweeter_ids: dedup_in_order(retweeter_ids),
        retweet_of,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<TweetRecord>,
    pub skipped: Vec<LineError>,
}

impl ParseOutcome {
    pub fn skip_count(&self) -> usize {
        self.skipped.len()
    }
}

/// Parses a JSON Lines stream. Blank lines are ignored; malformed lines are
/// logged, counted, and skipped. A read failure is fatal.
pub fn parse_stream<R: BufRead>(source: R, mapping: &FieldMapping) -> Result<ParseOutcome> {
    parse_stream_with(source, mapping, Execution::default())
}

pub fn parse_stream_with<R: BufRead>(
    source: R,
    mapping: &FieldMapping,
    exec: Execution,
) -> Result<ParseOutcome> {
    let lines: Vec<String> = source.lines().collect::<std::io::Result<_>>()?;
    let parsed = exec.map_range(lines.len(), |i| {
        let line = lines[i].trim();
        if line.is_empty() {
            None
        } else {
            Some(parse_record(line, mapping))
        }
    });
    let mut outcome = ParseOutcome::default();
    for (i, result) in parsed.into_iter().enumerate() {
        match result {
            None => {}
            Some(Ok(rec)) => outcome.records.push(rec),
            Some(Err(reason)) => {
                log::warn!("line {}: skipped malformed record: {reason}", i + 1);
                outcome.skipped.push(LineError { line: i + 1, reason });
            }
        }
    }
    Ok(outcome)
}

/// Writes records as canonical JSON Lines.
pub fn write_jsonl<W: Write>(records: &[TweetRecord], mut out: W) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupMode {
    ExactText,
    #[default]
    None,
}

impl std::str::FromStr for DedupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-text" | "exact" => Ok(DedupMode::ExactText),
            "none" => Ok(DedupMode::None),
            other => Err(Error::config(format!("unknown dedup mode `{other}`"))),
        }
    }
}

/// Text key used to detect duplicates: a leading `RT @user:` marker is dropped,
/// then the text is lowercased with whitespace collapsed.
pub fn normalized_text(text: &str) -> String {
    let mut rest = text.trim_start();
    loop {
        let lower = rest.get(..3).map(str::to_ascii_lowercase);
        if lower.as_deref() != Some("rt ") {
            break;
        }
        let after = rest[3..].trim_start();
        match after.strip_prefix('@') {
            Some(handle) => {
                let end = handle
                    .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                    .unwrap_or(handle.len());
                rest = handle[end..].trim_start_matches(':').trim_start();
            }
            None => break,
        }
    }
    rest.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Drops repeated texts, keeping the first occurrence. Retweet copies fold
/// their author and retweeters into the surviving record's `retweeter_ids`.
pub fn deduplicate(records: Vec<TweetRecord>, mode: DedupMode) -> Vec<TweetRecord> {
    if mode == DedupMode::None {
        return records;
    }
    let mut kept: Vec<TweetRecord> = Vec::with_capacity(records.len());
    let mut by_text: HashMap<String, usize> = HashMap::new();
    for rec in records {
        let key = normalized_text(&rec.text);
        match by_text.get(&key) {
            Some(&idx) => {
                if rec.is_retweet() {
                    let survivor = &mut kept[idx];
                    let mut folded = std::mem::take(&mut survivor.retweeter_ids);
                    folded.push(rec.author_id);
                    folded.extend(rec.retweeter_ids);
                    survivor.retweeter_ids = dedup_in_order(folded);
                }
            }
            None => {
                by_text.insert(key, kept.len());
                kept.push(rec);
            }
        }
    }
    kept
}

/// A time slice `[start, end)` of records sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
    pub records: Vec<TweetRecord>,
}

impl Window {
    /// Builds a window, keeping records inside `[start, end)`, sorting them
    /// stably by timestamp and dropping repeated tweet ids.
    pub fn new(start: i64, end: i64, records: impl IntoIterator<Item = TweetRecord>) -> Self {
        let mut seen = HashSet::new();
        let mut recs: Vec<TweetRecord> = records
            .into_iter()
            .filter(|r| r.timestamp >= start && r.timestamp < end)
            .filter(|r| {
                let fresh = seen.insert(r.tweet_id.clone());
                if !fresh {
                    log::warn!("dropping repeated tweet id {}", r.tweet_id);
                }
                fresh
            })
            .collect();
        recs.sort_by_key(|r| r.timestamp);
        Window {
            start,
            end,
            records: recs,
        }
    }

    /// Single window spanning every record.
    pub fn batch(records: Vec<TweetRecord>) -> Self {
        let start = records.iter().map(|r| r.timestamp).min().unwrap_or(0);
        let end = records
            .iter()
            .map(|r| r.timestamp)
            .max()
            .map_or(0, |t| t + 1);
        Window::new(start, end, records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tweet_ids(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.tweet_id.clone()).collect()
    }
}

/// Splits records into epoch-aligned windows of `width` seconds starting every
/// `stride` seconds. `stride == width` gives tumbling windows. Windows holding
/// no record are omitted.
pub fn window(records: &[TweetRecord], width: i64, stride: i64) -> Result<Vec<Window>> {
    if width <= 0 || stride <= 0 {
        return Err(Error::config("window width and stride must be positive"));
    }
    if stride > width {
        return Err(Error::config("window stride must not exceed width"));
    }
    let Some(min_ts) = records.iter().map(|r| r.timestamp).min() else {
        return Ok(Vec::new());
    };
    let max_ts = records.iter().map(|r| r.timestamp).max().unwrap_or(min_ts);

    // First aligned start whose window still reaches `min_ts`.
    let mut start = (min_ts - width).div_euclid(stride) * stride + stride;
    while start + width <= min_ts {
        start += stride;
    }
    let mut windows = Vec::new();
    while start <= max_ts {
        let end = start + width;
        let w = Window::new(start, end, records.iter().cloned());
        if !w.is_empty() {
            windows.push(w);
        }
        start += stride;
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: &str, user: &str, text: &str, ts: i64) -> TweetRecord {
        TweetRecord::from_text(id, user, text, ts)
    }

    #[test]
    fn parses_identity_mapping() {
        let line = r#"{"tweet_id":"1","author_id":"u1","text":"hello #World @Bob","timestamp":42}"#;
        let out = parse_stream(line.as_bytes(), &FieldMapping::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.tweet_id, "1");
        assert_eq!(r.author_id, "u1");
        assert_eq!(r.timestamp, 42);
        assert_eq!(r.hashtags, vec!["world"]);
        assert_eq!(r.mentions, vec!["Bob"]);
    }

    #[test]
    fn empty_input_yields_nothing() {
        let out = parse_stream("".as_bytes(), &FieldMapping::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.skip_count(), 0);
    }

    #[test]
    fn truncated_line_is_skipped_and_counted() {
        let input = concat!(
            r#"{"tweet_id":"1","author_id":"a","text":"one","timestamp":1}"#, "\n",
            r#"{"tweet_id":"2","author_id":"b","text":"two","timestamp":2}"#, "\n",
            r#"{"tweet_id":"3","author_id":"c","text":"thr"#, "\n",
            r#"{"tweet_id":"4","author_id":"d","text":"four","timestamp":4}"#, "\n",
        );
        let out = parse_stream(input.as_bytes(), &FieldMapping::default()).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.skip_count(), 1);
        assert_eq!(out.skipped[0].line, 3);
        let ids: Vec<_> = out.records.iter().map(|r| r.tweet_id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "4"]);
    }

    #[test]
    fn twitter_export_fields_are_understood() {
        let line = r#"{"id_str":"99","user":{"screen_name":"alice","id_str":"7"},
            "text":"RT this http://t.co/x","created_at":"Wed Apr 11 18:00:00 +0000 2012",
            "entities":{"hashtags":[{"text":"GOP"}],"user_mentions":[],"urls":[{"expanded_url":"http://example.com/a"}]},
            "retweeted_status":{"id_str":"98"}}"#
            .replace('\n', " ");
        let r = parse_record(&line, &FieldMapping::default()).unwrap();
        assert_eq!(r.tweet_id, "99");
        assert_eq!(r.author_id, "alice");
        assert_eq!(r.timestamp, 1334167200);
        assert_eq!(r.hashtags, vec!["gop"]);
        // explicit empty array wins over text extraction
        assert!(r.mentions.is_empty());
        assert_eq!(r.urls, vec!["http://example.com/a"]);
        assert_eq!(r.retweet_of.as_deref(), Some("98"));
    }

    #[test]
    fn custom_mapping_from_config() {
        let cfg = KvConfig::parse("tweet_id = post.key\nauthor_id = who\ntext = body\ntimestamp = at").unwrap();
        let mapping = FieldMapping::from_config(&cfg).unwrap();
        let r = parse_record(
            r#"{"post":{"key":5},"who":"z","body":"x","at":"2012-04-01 00:00:00"}"#,
            &mapping,
        )
        .unwrap();
        assert_eq!(r.tweet_id, "5");
        assert_eq!(r.timestamp, 1333238400);
        assert!(FieldMapping::from_config(&KvConfig::parse("bogus = x").unwrap()).is_err());
    }

    #[test]
    fn oversized_text_is_malformed() {
        let text = "a".repeat(MAX_TEXT_BYTES + 1);
        let line = serde_json::json!({"tweet_id":"1","author_id":"a","text":text,"timestamp":0});
        assert!(parse_record(&line.to_string(), &FieldMapping::default()).is_err());
    }

    #[test]
    fn dedup_identical_text() {
        let out = deduplicate(
            vec![rec("1", "a", "Same text", 0), rec("2", "b", "same  TEXT", 1)],
            DedupMode::ExactText,
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].tweet_id, "1");
    }

    #[test]
    fn dedup_none_is_identity() {
        let input = vec![rec("1", "a", "x", 0), rec("2", "b", "x", 1)];
        assert_eq!(deduplicate(input.clone(), DedupMode::None), input);
    }

    #[test]
    fn retweets_fold_into_original() {
        let original = rec("1", "a", "big news today", 0);
        let mut rt1 = rec("2", "b", "RT @a: big news today", 5);
        rt1.retweet_of = Some("1".into());
        let mut rt2 = rec("3", "c", "big news today", 9);
        rt2.retweet_of = Some("1".into());
        let out = deduplicate(vec![original, rt1, rt2], DedupMode::ExactText);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].retweeter_ids, vec!["b", "c"]);
    }

    #[test]
    fn tumbling_windows_split_two_hours() {
        let recs: Vec<_> = (0..10)
            .map(|i| rec(&i.to_string(), "u", "t", i * 700))
            .collect();
        let ws = window(&recs, 3600, 3600).unwrap();
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[0].len() + ws[1].len(), 10);
        assert_eq!((ws[0].start, ws[0].end), (0, 3600));
    }

    #[test]
    fn sliding_windows_share_middle_records() {
        // records at 0:30, 1:30 over a two hour span
        let recs = vec![rec("a", "u", "t", 1800), rec("b", "u", "t", 5400)];
        let ws = window(&recs, 7200, 3600).unwrap();
        let spans: Vec<_> = ws.iter().map(|w| (w.start, w.end)).collect();
        assert_eq!(spans, vec![(-3600, 3600), (0, 7200), (3600, 10800)]);
        let ids: Vec<Vec<&str>> = ws
            .iter()
            .map(|w| w.records.iter().map(|r| r.tweet_id.as_str()).collect())
            .collect();
        assert_eq!(ids, vec![vec!["a"], vec!["a", "b"], vec!["b"]]);
    }

    #[test]
    fn window_rejects_bad_config_and_handles_empty() {
        assert!(window(&[], 0, 1).is_err());
        assert!(window(&[], 10, 0).is_err());
        assert!(window(&[], 10, 20).is_err());
        assert!(window(&[], 10, 5).unwrap().is_empty());
    }

    #[test]
    fn window_sorts_and_drops_repeated_ids() {
        let w = Window::batch(vec![
            rec("2", "u", "b", 20),
            rec("1", "u", "a", 10),
            rec("2", "u", "c", 30),
        ]);
        let ids: Vec<_> = w.records.iter().map(|r| r.tweet_id.as_str()).collect();
        assert_eq!(ids, ["1", "2"]);
        assert_eq!((w.start, w.end), (10, 31));
    }

    fn arb_record() -> impl Strategy<Value = TweetRecord> {
        (
            "[a-z0-9]{1,8}",
            "[A-Za-z_]{1,8}",
            "[ -~]{0,60}",
            -1_000_000i64..2_000_000_000,
            prop::collection::vec("[a-z]{1,5}", 0..3),
            prop::collection::vec("[a-z]{1,5}", 0..3),
            prop::option::of("[0-9]{1,4}"),
        )
            .prop_map(|(id, user, text, ts, tags, rts, rt_of)| {
                let mut r = TweetRecord::from_text(id, user, text, ts);
                r.hashtags.extend(tags);
                r.retweeter_ids = rts;
                r.retweet_of = rt_of;
                r
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(r in arb_record()) {
            let mapping = FieldMapping::default();
            let first = parse_record(&serde_json::to_string(&r).unwrap(), &mapping).unwrap();
            let line = serde_json::to_string(&first).unwrap();
            let second = parse_record(&line, &mapping).unwrap();
            prop_assert_eq!(&first, &second);
            prop_assert_eq!(line, serde_json::to_string(&second).unwrap());
        }

        #[test]
        fn dedup_is_idempotent(texts in prop::collection::vec("(a|b|c)( a| b)?", 0..20),
                               flags in prop::collection::vec(any::<bool>(), 20)) {
            let recs: Vec<_> = texts.iter().enumerate().map(|(i, t)| {
                let mut r = rec(&i.to_string(), &format!("u{i}"), t, i as i64);
                if flags[i] { r.retweet_of = Some("0".into()); }
                r
            }).collect();
            let once = deduplicate(recs, DedupMode::ExactText);
            let twice = deduplicate(once.clone(), DedupMode::ExactText);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tumbling_windows_partition(ts in prop::collection::vec(-50_000i64..50_000, 0..60),
                                      width in 1i64..5000) {
            let recs: Vec<_> = ts.iter().enumerate()
                .map(|(i, &t)| rec(&i.to_string(), "u", "x", t)).collect();
            let ws = window(&recs, width, width).unwrap();
            let mut seen: Vec<String> = ws.iter()
                .flat_map(|w| w.records.iter().map(|r| r.tweet_id.clone())).collect();
            seen.sort();
            let mut expected: Vec<String> = recs.iter().map(|r| r.tweet_id.clone()).collect();
            expected.sort();
            prop_assert_eq!(seen, expected);
            for w in &ws {
                prop_assert!(w.records.windows(2).all(|p| p[0].timestamp <= p[1].timestamp));
                prop_assert!(w.records.iter().all(|r| r.timestamp >= w.start && r.timestamp < w.end));
            }
        }

        #[test]
        fn sliding_windows_cover_each_record_width_over_stride_times(
            ts in prop::collection::vec(0i64..20_000, 1..30), k in 1i64..4, stride in 1i64..700) {
            let width = stride * k;
            let recs: Vec<_> = ts.iter().enumerate()
                .map(|(i, &t)| rec(&i.to_string(), "u", "x", t)).collect();
            let ws = window(&recs, width, stride).unwrap();
            for r in &recs {
                let hits = ws.iter().filter(|w| w.records.iter().any(|x| x.tweet_id == r.tweet_id)).count();
                prop_assert_eq!(hits as i64, k);
            }
        }
    }
}
