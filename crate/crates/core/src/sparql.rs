//! SPARQL queries that look up specific places for a predicted answer
//! type sequence, and a small client to run them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};
use crate::model::{PlaceTypeCode, TypeSchema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Dialect {
    Dbpedia,
    Geonames,
}

impl Dialect {
    pub fn name(self) -> &'static str {
        match self {
            Dialect::Dbpedia => "DBPEDIA",
            Dialect::Geonames => "GEONAMES",
        }
    }

    pub fn prefix(self) -> (&'static str, &'static str) {
        match self {
            Dialect::Dbpedia => ("dbo", "http://dbpedia.org/ontology/"),
            Dialect::Geonames => ("gn", "http://www.geonames.org/ontology#"),
        }
    }

    /// Predicate relating a place to its class term.
    fn type_predicate(self) -> &'static str {
        match self {
            Dialect::Dbpedia => "a",
            Dialect::Geonames => "gn:featureCode",
        }
    }

    /// Resource URI of a place in this knowledge base.
    pub fn resource_uri(self, key: &str) -> String {
        match self {
            Dialect::Dbpedia => format!("http://dbpedia.org/resource/{}", key.replace(' ', "_")),
            Dialect::Geonames => format!("http://sws.geonames.org/{key}/"),
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dialect {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DBPEDIA" => Ok(Dialect::Dbpedia),
            "GEONAMES" => Ok(Dialect::Geonames),
            _ => Err(Error::InvalidPlan(format!("unknown dialect {s:?}"))),
        }
    }
}

/// Default way of relating an answer to a question place.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RelationStyle {
    Directed,
    #[default]
    Union,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// `?q ?r ?a`
    QToA,
    /// `?a ?r ?q`
    AToQ,
    /// `{?a ?r ?q} UNION {?q ?r ?a}`
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    /// 0-based index into the question URIs.
    pub question: usize,
    /// Falls back to the plan's relation style when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSlot {
    #[serde(rename = "type")]
    pub ptype: PlaceTypeCode,
    pub links: Vec<Link>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub dialect: Dialect,
    pub question_uris: Vec<String>,
    pub answers: Vec<AnswerSlot>,
    #[serde(default)]
    pub relation_style: RelationStyle,
}

impl QueryPlan {
    /// Every answer related to the first question place in the given style.
    pub fn new(dialect: Dialect, question_uris: Vec<String>, answer_types: Vec<PlaceTypeCode>, style: RelationStyle) -> Self {
        let answers = answer_types
            .into_iter()
            .map(|ptype| AnswerSlot {
                ptype,
                links: vec![Link {
                    question: 0,
                    direction: None,
                }],
            })
            .collect();
        QueryPlan {
            dialect,
            question_uris,
            answers,
            relation_style: style,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.question_uris.is_empty() {
            return Err(Error::InvalidPlan("no question URIs".into()));
        }
        if self.answers.is_empty() {
            return Err(Error::InvalidPlan("no answer types".into()));
        }
        for uri in &self.question_uris {
            if uri.is_empty() || uri.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}')) {
                return Err(Error::InvalidPlan(format!("bad URI {uri:?}")));
            }
        }
        for (j, a) in self.answers.iter().enumerate() {
            if a.links.is_empty() {
                return Err(Error::InvalidPlan(format!("answer {} has no links", j + 1)));
            }
            if let Some(l) = a.links.iter().find(|l| l.question >= self.question_uris.len()) {
                return Err(Error::InvalidPlan(format!(
                    "answer {} links to question {} of {}",
                    j + 1,
                    l.question + 1,
                    self.question_uris.len()
                )));
            }
        }
        Ok(())
    }
}

/// Ontology class term for each (dialect, type code).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassMap {
    terms: BTreeMap<(Dialect, String), String>,
}

impl ClassMap {
    /// Parses TSV rows `dialect<TAB>code<TAB>term`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ClassMap::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::ClassMapLine { line: i + 1, message };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [dialect, code, term] = cols[..] else {
                return Err(err(format!("expected 3 tab-separated columns, got {}", cols.len())));
            };
            let dialect: Dialect = dialect.parse().map_err(|e: Error| err(e.to_string()))?;
            if code.is_empty() || term.is_empty() {
                return Err(err("empty code or term".into()));
            }
            if map.terms.insert((dialect, code.to_string()), term.to_string()).is_some() {
                return Err(err(format!("duplicate row for {dialect} {code}")));
            }
        }
        Ok(map)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_file(path.as_ref())?)
    }

    /// Adds a GEONAMES row `gn:<class>.<code>` for every schema code that has none.
    pub fn with_geonames_schema(mut self, types: &TypeSchema) -> Self {
        for c in types.codes() {
            self.terms
                .entry((Dialect::Geonames, c.code().to_string()))
                .or_insert_with(|| format!("gn:{}.{}", c.class(), c.code()));
        }
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, dialect: Dialect, code: &str) -> Option<&str> {
        self.terms.get(&(dialect, code.to_string())).map(String::as_str)
    }
}

/// The SPARQL text for `plan`, already in canonical layout.
pub fn build_query(plan: &QueryPlan, map: &ClassMap) -> Result<String> {
    plan.validate()?;
    let (prefix, iri) = plan.dialect.prefix();
    let mut terms = Vec::with_capacity(plan.answers.len());
    for a in &plan.answers {
        let term = map.term(plan.dialect, a.ptype.code()).ok_or_else(|| Error::UnmappedType {
            code: a.ptype.code().to_string(),
            dialect: plan.dialect.name().to_string(),
        })?;
        let declared = term.starts_with('<') || term.split_once(':').is_some_and(|(p, _)| p == prefix);
        if !declared {
            return Err(Error::InvalidPlan(format!("class term {term:?} does not use prefix {prefix}:")));
        }
        terms.push(term);
    }

    let mut out = String::new();
    out.push_str(&format!("PREFIX {prefix}: <{iri}>\n\n"));
    let q_vars: Vec<String> = (1..=plan.question_uris.len()).map(|i| format!("?q{i}")).collect();
    let a_vars: Vec<String> = (1..=plan.answers.len()).map(|j| format!("?a{j}")).collect();
    out.push_str(&format!("SELECT distinct {} {} WHERE {{\n", q_vars.join(" "), a_vars.join(" ")));
    for (v, uri) in q_vars.iter().zip(&plan.question_uris) {
        out.push_str(&format!("  VALUES {v} {{<{uri}>}}\n"));
    }
    let mut r = 0;
    for ((a, var), term) in plan.answers.iter().zip(&a_vars).zip(terms) {
        out.push('\n');
        out.push_str(&format!("  {var} {} {term} .\n", plan.dialect.type_predicate()));
        for link in &a.links {
            r += 1;
            let q = &q_vars[link.question];
            let dir = link.direction.unwrap_or(match plan.relation_style {
                RelationStyle::Directed => Direction::QToA,
                RelationStyle::Union => Direction::Both,
            });
            let line = match dir {
                Direction::QToA => format!("{q} ?r{r} {var} ."),
                Direction::AToQ => format!("{var} ?r{r} {q} ."),
                Direction::Both => format!("{{{var} ?r{r} {q}}} UNION {{{q} ?r{r} {var}}} ."),
            };
            out.push_str(&format!("  {line}\n"));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn relation_var() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\?r\d*\b").unwrap())
}

fn variable() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\?[A-Za-z_]\w*").unwrap())
}

fn iri() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[^<>\s]*>").unwrap())
}

/// Rewrites query text into the layout `build_query` emits: comment lines
/// dropped, trimmed lines
/// with single spaces, the WHERE clause on the SELECT line, relation
/// variables renumbered `?r1..` by first appearance, no dot after VALUES,
/// a trailing ` .` on every triple pattern, two-space indent per brace
/// level, single blank lines between blocks, LF line ends and a final newline.
pub fn canonicalize(text: &str) -> String {
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();

    // WHERE on its own line joins the SELECT line
    let mut joined: Vec<String> = Vec::with_capacity(lines.len());
    for line in lines.drain(..) {
        if line.starts_with("WHERE") {
            while joined.last().is_some_and(|l| l.is_empty()) {
                joined.pop();
            }
            if let Some(prev) = joined.last_mut() {
                prev.push(' ');
                prev.push_str(&line);
                continue;
            }
        }
        joined.push(line);
    }

    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let renamed: Vec<String> = joined
        .iter()
        .map(|l| {
            relation_var()
                .replace_all(l, |c: &regex::Captures| {
                    let n = names.len() + 1;
                    names.entry(c[0].to_string()).or_insert_with(|| format!("?r{n}")).clone()
                })
                .into_owned()
        })
        .collect();

    let dotted: Vec<String> = renamed
        .into_iter()
        .map(|l| {
            let is_pattern = !(l.is_empty()
                || l.starts_with("PREFIX")
                || l.starts_with("SELECT")
                || l.starts_with('}')
                || l.ends_with('{'));
            if !is_pattern {
                return l;
            }
            let body = l.trim_end_matches('.').trim_end();
            if l.starts_with("VALUES") {
                body.to_string()
            } else {
                format!("{body} .")
            }
        })
        .collect();

    let mut out: Vec<String> = Vec::new();
    let mut depth: i64 = 0;
    for l in dotted {
        if l.is_empty() {
            let after_open = out.last().is_some_and(|p| p.ends_with('{'));
            if !out.is_empty() && !after_open && out.last().is_some_and(|p| !p.is_empty()) {
                out.push(String::new());
            }
            continue;
        }
        let net = l.matches('{').count() as i64 - l.matches('}').count() as i64;
        let level = if l.starts_with('}') { depth - 1 } else { depth }.max(0);
        if l.starts_with('}') {
            while out.last().is_some_and(|p| p.is_empty()) {
                out.pop();
            }
        }
        out.push(format!("{}{l}", "  ".repeat(level as usize)));
        depth += net;
    }
    while out.last().is_some_and(|p| p.is_empty()) {
        out.pop();
    }
    let mut s = out.join("\n");
    s.push('\n');
    s
}

/// Structural checks: balanced braces, PREFIX declarations matching the
/// prefixes in use, and every projected variable present in the body.
pub fn validate_query(text: &str) -> Result<()> {
    let bad = |m: String| Err(Error::MalformedQuery(m));
    let text: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let text = text.as_str();
    let stripped = iri().replace_all(text, "<>");

    let mut depth = 0i64;
    for c in stripped.chars() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return bad("unbalanced '}'".into());
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return bad("unclosed '{'".into());
    }

    let prefix_decl = Regex::new(r"(?m)^\s*PREFIX\s+([A-Za-z][\w-]*)?:\s*<[^>]*>").unwrap();
    let declared: BTreeSet<String> = prefix_decl
        .captures_iter(text)
        .map(|c| c.get(1).map_or(String::new(), |m| m.as_str().to_string()))
        .collect();
    let body_text = prefix_decl.replace_all(&stripped, "");
    let used_re = Regex::new(r"(?:^|[\s{(.;,])([A-Za-z][\w-]*):[A-Za-z_]").unwrap();
    let used: BTreeSet<String> = used_re.captures_iter(&body_text).map(|c| c[1].to_string()).collect();
    if let Some(p) = used.difference(&declared).next() {
        return bad(format!("prefix {p}: used but not declared"));
    }
    if let Some(p) = declared.difference(&used).next() {
        return bad(format!("prefix {p}: declared but not used"));
    }

    let Some(select) = body_text.find("SELECT") else {
        return bad("no SELECT".into());
    };
    let Some(where_at) = body_text[select..].find('{').map(|i| i + select) else {
        return bad("no WHERE block".into());
    };
    let head = &body_text[select..where_at];
    let body = &body_text[where_at..];
    let projected: Vec<&str> = variable().find_iter(head).map(|m| m.as_str()).collect();
    if projected.is_empty() && !head.contains('*') {
        return bad("SELECT projects nothing".into());
    }
    let bound: BTreeSet<&str> = variable().find_iter(body).map(|m| m.as_str()).collect();
    if let Some(v) = projected.iter().find(|v| !bound.contains(*v)) {
        return bad(format!("projected variable {v} does not occur in the body"));
    }
    Ok(())
}

/// One RDF term of a result binding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResults {
    pub vars: Vec<String>,
    pub rows: Vec<BTreeMap<String, Term>>,
}

impl QueryResults {
    /// Parses the SPARQL 1.1 JSON results format.
    pub fn parse(body: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Head {
            #[serde(default)]
            vars: Vec<String>,
        }
        #[derive(Deserialize)]
        struct Bindings {
            bindings: Vec<BTreeMap<String, Term>>,
        }
        #[derive(Deserialize)]
        struct Raw {
            head: Head,
            results: Bindings,
        }
        let raw: Raw = serde_json::from_str(body).map_err(|e| Error::MalformedResults(e.to_string()))?;
        Ok(QueryResults {
            vars: raw.head.vars,
            rows: raw.results.bindings,
        })
    }

    /// Values bound to `var` across rows, in row order.
    pub fn values(&self, var: &str) -> Vec<&str> {
        self.rows
            .iter()
            .filter_map(|r| r.get(var).map(|t| t.value.as_str()))
            .collect()
    }
}

/// Sends a query and returns the raw response body.
pub trait Transport: Send + Sync {
    fn send(&self, query: &str) -> Result<String>;
}

/// SPARQL protocol over HTTP POST.
pub struct HttpTransport {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpTransport {
            endpoint: endpoint.into(),
            client,
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, query: &str) -> Result<String> {
        let resp = self
            .client
            .post(&self.endpoint)
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .form(&[("query", query)])
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    Error::Timeout
                } else {
                    Error::Transport(e.to_string())
                }
            })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Http { status: status.as_u16() });
        }
        resp.text().map_err(|e| Error::Transport(e.to_string()))
    }
}

#[derive(Deserialize)]
struct FixtureEntry {
    query: String,
    response: serde_json::Value,
}

/// Replays recorded responses, keyed by canonicalized query text.
#[derive(Clone, Debug, Default)]
pub struct FixtureTransport {
    responses: BTreeMap<String, String>,
}

impl FixtureTransport {
    pub fn insert(&mut self, query: &str, response: impl Into<String>) {
        self.responses.insert(canonicalize(query), response.into());
    }

    /// Loads a JSON array of `{"query": ..., "response": {...}}` records.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let entries: Vec<FixtureEntry> = serde_json::from_str(&read_file(path)?)?;
        let mut t = FixtureTransport::default();
        for e in entries {
            t.insert(&e.query, e.response.to_string());
        }
        Ok(t)
    }
}

impl Transport for FixtureTransport {
    fn send(&self, query: &str) -> Result<String> {
        self.responses.get(&canonicalize(query)).cloned().ok_or(Error::FixtureMissing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff_ms: 250,
        }
    }
}

fn retryable(e: &Error) -> bool {
    match e {
        Error::Timeout | Error::Transport(_) => true,
        Error::Http { status } => *status == 429 || *status >= 500,
        _ => false,
    }
}

/// Runs `query` through `transport`, retrying transient failures with
/// exponential backoff.
pub fn execute_query(transport: &dyn Transport, query: &str, retry: &RetryPolicy) -> Result<QueryResults> {
    let attempts = retry.max_attempts.max(1);
    let mut delay = Duration::from_millis(retry.initial_backoff_ms);
    let mut attempt = 1;
    loop {
        match transport.send(query) {
            Ok(body) => return QueryResults::parse(&body),
            Err(e) if attempt < attempts && retryable(&e) => {
                log::warn!("query attempt {attempt} failed: {e}; retrying in {delay:?}");
                std::thread::sleep(delay);
                delay *= 2;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Runs `query` against an HTTP endpoint.
pub fn execute_query_at(endpoint: &str, query: &str, timeout: Duration, retry: &RetryPolicy) -> Result<QueryResults> {
    let t = HttpTransport::new(endpoint, timeout)?;
    execute_query(&t, query, retry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureClass;
    use std::sync::atomic::{AtomicU32, Ordering};

    fn code(class: FeatureClass, c: &str) -> PlaceTypeCode {
        PlaceTypeCode::new(class, c).unwrap()
    }

    fn map() -> ClassMap {
        ClassMap::parse(
            "# dialect\tcode\tterm\n\
             DBPEDIA\tPCLI\tdbo:Country\n\
             GEONAMES\tPCLI\tgn:A.PCLI\n\
             GEONAMES\tADM2\tgn:A.ADM2\n\
             GEONAMES\tSTM\tgn:H.STM\n",
        )
        .unwrap()
    }

    #[test]
    fn class_map_rows() {
        let m = map();
        assert_eq!(m.len(), 4);
        assert_eq!(m.term(Dialect::Dbpedia, "PCLI"), Some("dbo:Country"));
        assert_eq!(m.term(Dialect::Dbpedia, "STM"), None);
        assert!(ClassMap::parse("GEONAMES\tSTM\tgn:H.STM\nGEONAMES\tSTM\tgn:H.STMX\n").is_err());
        assert!(ClassMap::parse("WIKIDATA\tSTM\twd:Q4022\n").is_err());
        assert!(ClassMap::parse("GEONAMES STM gn:H.STM\n").is_err());
    }

    #[test]
    fn geonames_terms_from_schema() {
        let types = TypeSchema::parse("H STM\nT MTS\n").unwrap();
        let m = ClassMap::default().with_geonames_schema(&types);
        assert_eq!(m.term(Dialect::Geonames, "MTS"), Some("gn:T.MTS"));
        assert_eq!(m.term(Dialect::Dbpedia, "MTS"), None);
    }

    #[test]
    fn directed_single_answer() {
        let plan = QueryPlan::new(
            Dialect::Geonames,
            vec![Dialect::Geonames.resource_uri("1856156")],
            vec![code(FeatureClass::A, "PCLI")],
            RelationStyle::Directed,
        );
        let q = build_query(&plan, &map()).unwrap();
        assert!(q.contains("  ?q1 ?r1 ?a1 .\n"));
        assert!(q.contains("VALUES ?q1 {<http://sws.geonames.org/1856156/>}\n"));
        validate_query(&q).unwrap();
        assert_eq!(canonicalize(&q), q);
    }

    #[test]
    fn plan_errors() {
        let mut plan = QueryPlan::new(
            Dialect::Dbpedia,
            vec![Dialect::Dbpedia.resource_uri("Putney Bridge")],
            vec![],
            RelationStyle::Union,
        );
        assert!(matches!(build_query(&plan, &map()), Err(Error::InvalidPlan(_))));
        plan.answers = QueryPlan::new(Dialect::Dbpedia, vec![], vec![code(FeatureClass::H, "STM")], RelationStyle::Union).answers;
        match build_query(&plan, &map()) {
            Err(Error::UnmappedType { code, dialect }) => assert_eq!((code.as_str(), dialect.as_str()), ("STM", "DBPEDIA")),
            other => panic!("{other:?}"),
        }
        plan.answers[0].links[0].question = 3;
        assert!(matches!(build_query(&plan, &map()), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn canonical_rules() {
        let raw = "# generated\n  PREFIX gn: <http://www.geonames.org/ontology#>\n\n  SELECT distinct ?q1 ?a1\n  WHERE  {\n    VALUES ?q1 {<http://sws.geonames.org/1/>} . \n\n\n    ?a1 gn:featureCode gn:A.PCLI .\n    ?q1 ?r ?a1 \n\n  }\n\n";
        assert_eq!(
            canonicalize(raw),
            "PREFIX gn: <http://www.geonames.org/ontology#>\n\nSELECT distinct ?q1 ?a1 WHERE {\n  VALUES ?q1 {<http://sws.geonames.org/1/>}\n\n  ?a1 gn:featureCode gn:A.PCLI .\n  ?q1 ?r1 ?a1 .\n}\n"
        );
    }

    #[test]
    fn relation_variables_renumbered_by_first_use() {
        let raw = "SELECT ?a WHERE {\n?q ?r2 ?a .\n?a ?r ?q .\n?q ?r2 ?b .\n}";
        let c = canonicalize(raw);
        assert!(c.contains("?q ?r1 ?a .\n  ?a ?r2 ?q .\n  ?q ?r1 ?b ."));
    }

    #[test]
    fn validator_catches_problems() {
        let ok = "PREFIX dbo: <http://dbpedia.org/ontology/>\nSELECT distinct ?a1 WHERE {\n  ?a1 a dbo:Country .\n}\n";
        validate_query(ok).unwrap();
        assert!(validate_query(&ok.replace("}\n", "")).is_err());
        assert!(validate_query(&ok.replace("dbo:Country", "gn:A.PCLI")).is_err());
        assert!(validate_query(&ok.replace("?a1 a dbo:Country .", "?a1 a <http://x/y> .")).is_err());
        assert!(validate_query(&ok.replace("SELECT distinct ?a1", "SELECT distinct ?a1 ?a2")).is_err());
    }

    #[test]
    fn results_parsing() {
        let body = r#"{"head":{"vars":["a1"]},"results":{"bindings":[{"a1":{"type":"uri","value":"http://x/London"}}]}}"#;
        let r = QueryResults::parse(body).unwrap();
        assert_eq!(r.values("a1"), vec!["http://x/London"]);
        let empty = QueryResults::parse(r#"{"head":{"vars":["a1"]},"results":{"bindings":[]}}"#).unwrap();
        assert!(empty.rows.is_empty());
        assert!(matches!(QueryResults::parse("<html>"), Err(Error::MalformedResults(_))));
    }

    struct Flaky {
        failures: AtomicU32,
        error: fn() -> Error,
    }

    impl Transport for Flaky {
        fn send(&self, _: &str) -> Result<String> {
            if self.failures.load(Ordering::SeqCst) > 0 {
                self.failures.fetch_sub(1, Ordering::SeqCst);
                return Err((self.error)());
            }
            Ok(r#"{"head":{"vars":[]},"results":{"bindings":[]}}"#.into())
        }
    }

    #[test]
    fn retries_transient_errors_only() {
        let fast = RetryPolicy {
            max_attempts: 3,
            initial_backoff_ms: 1,
        };
        let t = Flaky {
            failures: AtomicU32::new(2),
            error: || Error::Http { status: 503 },
        };
        assert!(execute_query(&t, "q", &fast).is_ok());
        let t = Flaky {
            failures: AtomicU32::new(3),
            error: || Error::Timeout,
        };
        assert!(matches!(execute_query(&t, "q", &fast), Err(Error::Timeout)));
        let t = Flaky {
            failures: AtomicU32::new(1),
            error: || Error::Http { status: 400 },
        };
        assert!(matches!(execute_query(&t, "q", &fast), Err(Error::Http { status: 400 })));
    }

    #[test]
    fn fixtures_match_canonical_text() {
        let mut f = FixtureTransport::default();
        f.insert("SELECT ?a WHERE {\n?a ?r ?b\n}", r#"{"head":{"vars":["a"]},"results":{"bindings":[]}}"#);
        let r = execute_query(&f, "SELECT ?a   WHERE {\n   ?a ?r1 ?b .\n}\n", &RetryPolicy::default()).unwrap();
        assert_eq!(r.vars, vec!["a"]);
        assert!(matches!(f.send("SELECT ?b WHERE {}"), Err(Error::FixtureMissing)));
    }
}
