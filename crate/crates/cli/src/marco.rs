//! Where-question extraction from MS MARCO dumps.
//!
//! Accepts either the column-oriented JSON of the v2.1 release
//! (`{"query": {"0": ...}, "query_type": {...}, "answers": {...}, ...}`) or
//! one JSON object per line with the same keys.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use geotemplate::gazetteer::GazetteerIndex;
use serde::Serialize;
use serde_json::Value;

use crate::commands::CorpusRecord;
use crate::config::Marco;
use crate::DataError;

const NO_ANSWER: &str = "No Answer Present.";

#[derive(Debug, Clone, PartialEq)]
pub struct MarcoRow {
    pub query_id: String,
    pub query: String,
    pub query_type: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Default, Serialize, PartialEq)]
pub struct MarcoCounts {
    pub total: usize,
    pub type_matched: usize,
    pub where_matched: usize,
    pub answered: usize,
    pub written: usize,
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn answers(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::Array(a)) => a.iter().map(text).collect(),
        Some(Value::String(s)) => vec![s.clone()],
        _ => Vec::new(),
    }
}

fn row(obj: &serde_json::Map<String, Value>, fallback_id: String) -> MarcoRow {
    MarcoRow {
        query_id: obj.get("query_id").map(text).unwrap_or(fallback_id),
        query: obj.get("query").map(text).unwrap_or_default(),
        query_type: obj.get("query_type").map(text).unwrap_or_default(),
        answers: answers(obj.get("answers")),
    }
}

pub fn parse(input: &str) -> Result<Vec<MarcoRow>> {
    if let Ok(Value::Object(top)) = serde_json::from_str::<Value>(input) {
        if let Some(Value::Object(queries)) = top.get("query") {
            let column = |name: &str, key: &str| top.get(name).and_then(|c| c.get(key));
            let mut keys: Vec<&String> = queries.keys().collect();
            keys.sort_by_key(|k| (k.parse::<u64>().unwrap_or(u64::MAX), k.to_string()));
            return Ok(keys
                .into_iter()
                .map(|k| MarcoRow {
                    query_id: column("query_id", k).map(text).unwrap_or_else(|| k.clone()),
                    query: text(&queries[k]),
                    query_type: column("query_type", k).map(text).unwrap_or_default(),
                    answers: answers(column("answers", k)),
                })
                .collect());
        }
        return Ok(vec![row(&top, "0".into())]);
    }
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| match serde_json::from_str::<Value>(l) {
            Ok(Value::Object(o)) => Ok(row(&o, i.to_string())),
            Ok(_) => Err(DataError(format!("line {}: not a JSON object", i + 1)).into()),
            Err(e) => Err(DataError(format!("line {}: {e}", i + 1)).into()),
        })
        .collect()
}

/// First word of `question`, lowercased with typographic apostrophes
/// straightened and surrounding punctuation removed.
pub fn first_token(question: &str) -> Option<String> {
    let w = question.split_whitespace().next()?;
    let w = w.replace(['\u{2019}', '\u{2018}'], "'").to_lowercase();
    let w = w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'').trim_matches('\'');
    (!w.is_empty()).then(|| w.to_string())
}

pub fn is_where_question(question: &str, tokens: &[String]) -> bool {
    first_token(question).is_some_and(|t| tokens.iter().any(|w| w.eq_ignore_ascii_case(&t)))
}

pub fn extract(rows: &[MarcoRow], cfg: &Marco, gazetteer: Option<&GazetteerIndex>) -> (Vec<CorpusRecord>, MarcoCounts) {
    let mut counts = MarcoCounts {
        total: rows.len(),
        ..Default::default()
    };
    let mut out = Vec::new();
    for r in rows {
        if !r.query_type.eq_ignore_ascii_case(&cfg.query_type) {
            continue;
        }
        counts.type_matched += 1;
        if !is_where_question(&r.query, &cfg.where_tokens) {
            continue;
        }
        counts.where_matched += 1;
        let Some(answer) = r.answers.iter().find(|a| !a.trim().is_empty() && a.trim() != NO_ANSWER) else {
            continue;
        };
        counts.answered += 1;
        // sentence-final periods stay attached to the last token
        let spans = |t: &str| -> Vec<String> {
            gazetteer
                .map(|g| g.match_phrases(t))
                .unwrap_or_default()
                .into_iter()
                .map(|s| s.trim_end_matches('.').to_string())
                .collect()
        };
        out.push(CorpusRecord {
            id: format!("marco-{}", r.query_id),
            question: r.query.clone(),
            answer: answer.clone(),
            q_spans: spans(&r.query),
            a_spans: spans(answer),
            q_geonames_ids: None,
            a_geonames_ids: None,
        });
    }
    counts.written = out.len();
    (out, counts)
}

pub fn read(path: &Path) -> Result<Vec<MarcoRow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text)
}

pub fn counts_by_type(rows: &[MarcoRow]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in rows {
        *m.entry(r.query_type.clone()).or_insert(0) += 1;
    }
    m
}
