//! Gazetteer snapshot loading, compound-first phrase lookup and
//! minimum-spatial-context disambiguation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{BBox, FeatureClass, GazetteerEntry, Point, TypeSchema};

pub const TSV_COLUMNS: [&str; 12] = [
    "name",
    "geonames_id",
    "feature_class",
    "feature_code",
    "min_lat",
    "min_lon",
    "max_lat",
    "max_lon",
    "lat",
    "lon",
    "place_rank",
    "importance",
];

/// Default cap on the number of candidate combinations `disambiguate` will
/// enumerate.
pub const DEFAULT_COMBINATION_CAP: usize = 10_000;

/// Case-folds, drops periods and collapses whitespace so "St. Clair" and
/// "st clair" share a key.
pub fn fold_name(name: &str) -> String {
    name.split_whitespace()
        .map(|t| t.replace('.', "").to_lowercase())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Name-keyed, read-only index over gazetteer rows.
#[derive(Clone, Debug, Default)]
pub struct GazetteerIndex {
    entries: Vec<GazetteerEntry>,
    by_name: HashMap<String, Vec<usize>>,
    by_id: HashMap<u64, usize>,
    max_name_tokens: usize,
}

impl GazetteerIndex {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Self {
        let mut index = GazetteerIndex::default();
        for e in entries {
            index.push(e);
        }
        index
    }

    fn push(&mut self, e: GazetteerEntry) {
        let idx = self.entries.len();
        let key = fold_name(&e.name);
        self.max_name_tokens = self.max_name_tokens.max(key.split(' ').count());
        self.by_name.entry(key).or_default().push(idx);
        self.by_id.entry(e.geonames_id).or_insert(idx);
        self.entries.push(e);
    }

    pub fn load(path: impl AsRef<Path>, schema: &TypeSchema) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read(file, schema)
    }

    /// Reads the tab-separated snapshot format (see [`TSV_COLUMNS`]). Rows
    /// failing validation are rejected with their line number.
    pub fn read<R: Read>(reader: R, schema: &TypeSchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .quoting(false)
            .has_headers(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let found: Vec<&str> = header.iter().map(str::trim).collect();
        if found != TSV_COLUMNS {
            return Err(Error::GazetteerRow {
                line: 1,
                message: format!("expected header {:?}, found {:?}", TSV_COLUMNS, found),
            });
        }
        let mut index = GazetteerIndex::default();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let entry = parse_row(&row, schema).map_err(|e| Error::GazetteerRow {
                line,
                message: e.to_string(),
            })?;
            index.push(entry);
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn by_geonames_id(&self, id: u64) -> Option<&GazetteerEntry> {
        self.by_id.get(&id).map(|&i| &self.entries[i])
    }

    /// Exact (case-folded) name match.
    pub fn lookup(&self, name: &str) -> Vec<&GazetteerEntry> {
        self.by_name
            .get(&fold_name(name))
            .map(|ids| ids.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    /// Compound-first lookup: the whole phrase is tried first; only on a
    /// miss are its constituent words tried, in order. Returns the first
    /// nonempty hit.
    pub fn lookup_phrase(&self, phrase: &str) -> Option<CandidateSet> {
        let whole = phrase.trim();
        if whole.is_empty() {
            return None;
        }
        let mut attempts = vec![whole.to_string()];
        let tokens = tokenize(whole);
        if tokens.len() > 1 {
            attempts.extend(tokens);
        }
        attempts.into_iter().find_map(|attempt| {
            let hits = self.lookup(&attempt);
            (!hits.is_empty()).then(|| CandidateSet {
                phrase: attempt,
                candidates: hits.into_iter().cloned().collect(),
            })
        })
    }

    /// Dictionary matching over free text: greedy longest-first n-gram match
    /// against gazetteer names, left to right, non-overlapping.
    pub fn match_phrases(&self, text: &str) -> Vec<String> {
        let tokens = tokenize(text);
        let mut found = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (1..=self.max_name_tokens.min(tokens.len() - i))
                .rev()
                .find(|&n| self.by_name.contains_key(&fold_name(&tokens[i..i + n].join(" "))));
            match longest {
                Some(n) => {
                    found.push(tokens[i..i + n].join(" "));
                    i += n;
                }
                None => i += 1,
            }
        }
        found
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric() && c != '.'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_row(row: &csv::StringRecord, schema: &TypeSchema) -> Result<GazetteerEntry> {
    let field = |i: usize| row.get(i).map(str::trim).unwrap_or("");
    if row.len() != TSV_COLUMNS.len() {
        return Err(Error::Validation(format!(
            "expected {} columns, found {}",
            TSV_COLUMNS.len(),
            row.len()
        )));
    }
    let num = |i: usize| -> Result<f64> {
        field(i)
            .parse::<f64>()
            .map_err(|_| Error::Validation(format!("{}: not a number: {:?}", TSV_COLUMNS[i], field(i))))
    };
    let name = field(0);
    if name.is_empty() {
        return Err(Error::Validation("empty name".into()));
    }
    let geonames_id = field(1)
        .parse::<u64>()
        .map_err(|_| Error::Validation(format!("bad geonames_id {:?}", field(1))))?;
    let class: FeatureClass = field(2).parse()?;
    let feature_code = schema
        .get(field(3))
        .ok_or_else(|| Error::InvalidCode(format!("{} not in type schema", field(3))))?;
    if feature_code.class() != class {
        return Err(Error::InvalidCode(format!(
            "{} has class {} in the schema, row says {}",
            field(3),
            feature_code.class(),
            class
        )));
    }
    let place_rank = match field(10) {
        "" => None,
        s => Some(
            s.parse::<u8>()
                .map_err(|_| Error::Validation(format!("bad place_rank {s:?}")))?,
        ),
    };
    let importance = match field(11) {
        "" => None,
        _ => Some(num(11)?),
    };
    let entry = GazetteerEntry {
        name: name.to_string(),
        geonames_id,
        feature_code,
        bbox: BBox::new(num(4)?, num(5)?, num(6)?, num(7)?),
        point: Point {
            lat: num(8)?,
            lon: num(9)?,
        },
        place_rank,
        importance,
    };
    entry.validate()?;
    Ok(entry)
}

/// True iff the names match case-insensitively and the Geonames point lies
/// inside the OSM bounding box (edges inclusive).
pub fn records_agree(osm_like: &GazetteerEntry, geonames_like: &GazetteerEntry) -> bool {
    fold_name(&osm_like.name) == fold_name(&geonames_like.name)
        && osm_like.bbox.contains(&geonames_like.point)
}

/// Gazetteer candidates for one location phrase.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub phrase: String,
    pub candidates: Vec<GazetteerEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedCombination {
    pub choices: Vec<GazetteerEntry>,
    /// Area of the union bounding box of all choices, in squared degrees.
    pub bbox_area: f64,
}

/// Ranking key of one combination; smaller is better.
struct ComboKey {
    area: f64,
    admin: usize,
    populated: usize,
    importance: f64,
    ids: Vec<u64>,
}

impl ComboKey {
    fn of(choices: &[&GazetteerEntry]) -> Self {
        let bbox = choices
            .iter()
            .skip(1)
            .fold(choices[0].bbox, |acc, e| acc.union(&e.bbox));
        ComboKey {
            area: bbox.area(),
            admin: choices
                .iter()
                .filter(|e| e.feature_code.is_administrative())
                .count(),
            populated: choices
                .iter()
                .filter(|e| e.feature_code.is_populated_place())
                .count(),
            importance: choices.iter().map(|e| e.importance.unwrap_or(0.0)).sum(),
            ids: choices.iter().map(|e| e.geonames_id).collect(),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.area
            .total_cmp(&other.area)
            .then(other.admin.cmp(&self.admin))
            .then(self.populated.cmp(&other.populated))
            .then(other.importance.total_cmp(&self.importance))
            .then(self.ids.cmp(&other.ids))
    }
}

/// Picks one candidate per set so that the union bounding box is smallest.
/// Ties go to the combination with more administrative divisions (and fewer
/// populated places), then higher summed importance, then the
/// lexicographically smallest geonames id list.
pub fn disambiguate(sets: &[CandidateSet], cap: usize) -> Result<ResolvedCombination> {
    if sets.is_empty() || sets.iter().any(|s| s.candidates.is_empty()) {
        return Err(Error::NoCandidates);
    }
    let product = sets
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.candidates.len() as u128))
        .unwrap_or(u128::MAX);
    if product > cap as u128 {
        return Err(Error::CandidateCap { product, cap });
    }

    let mut odometer = vec![0usize; sets.len()];
    let mut best: Option<(ComboKey, Vec<usize>)> = None;
    loop {
        let choice: Vec<&GazetteerEntry> = odometer
            .iter()
            .zip(sets)
            .map(|(&i, s)| &s.candidates[i])
            .collect();
        let key = ComboKey::of(&choice);
        if best.as_ref().map_or(true, |(b, _)| key.cmp(b) == Ordering::Less) {
            best = Some((key, odometer.clone()));
        }
        // advance the odometer, last set fastest
        let mut pos = sets.len();
        loop {
            if pos == 0 {
                let (key, picks) = best.expect("at least one combination");
                return Ok(ResolvedCombination {
                    choices: picks
                        .iter()
                        .zip(sets)
                        .map(|(&i, s)| s.candidates[i].clone())
                        .collect(),
                    bbox_area: key.area,
                });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < sets[pos].candidates.len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}
