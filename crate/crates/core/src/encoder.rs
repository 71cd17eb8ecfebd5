//! Translation of resolved toponyms into generic symbols.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::breaks::ProminenceBreaks;
use crate::error::{Error, Result};
use crate::model::{
    GazetteerEntry, GenericClass, GenericSequence, PlaceTypeCode, ProminenceLevel, QARecord,
    ScaleLevel, TspItem, TypeSchema,
};

/// Maps an OSM `place_rank` (0..=30) onto the 8-level scale schema.
pub fn map_scale(place_rank: u8) -> Result<ScaleLevel> {
    let level = match place_rank {
        27..=30 => 1,
        22..=26 => 2,
        18..=21 => 3,
        16..=17 => 4,
        12..=15 => 5,
        8..=11 => 6,
        4..=7 => 7,
        0..=3 => 8,
        _ => {
            return Err(Error::OutOfRange {
                what: "place_rank",
                value: place_rank.to_string(),
            })
        }
    };
    ScaleLevel::new(level)
}

/// Maps an OSM importance value onto a prominence level using breaks fitted
/// with seven classes.
pub fn map_prominence(importance: f64, breaks: &ProminenceBreaks) -> Result<ProminenceLevel> {
    if !(0.0..=1.0).contains(&importance) {
        return Err(Error::OutOfRange {
            what: "importance",
            value: importance.to_string(),
        });
    }
    if breaks.classes != ProminenceLevel::MAX as usize {
        return Err(Error::Fit(format!(
            "prominence needs {} classes, breaks have {}",
            ProminenceLevel::MAX,
            breaks.classes
        )));
    }
    ProminenceLevel::new(breaks.classify(importance) as u8)
}

pub fn tsp_item(entry: &GazetteerEntry, breaks: &ProminenceBreaks) -> Result<Option<TspItem>> {
    let (Some(rank), Some(imp)) = (entry.place_rank, entry.importance) else {
        return Ok(None);
    };
    Ok(Some(TspItem {
        ptype: entry.feature_code.clone(),
        scale: map_scale(rank)?,
        prominence: map_prominence(imp, breaks)?,
    }))
}

fn symbol(entry: &GazetteerEntry, class: GenericClass, breaks: &ProminenceBreaks) -> Result<Option<String>> {
    Ok(match class {
        GenericClass::Type => Some(entry.feature_code.code().to_string()),
        GenericClass::Scale => entry
            .place_rank
            .map(map_scale)
            .transpose()?
            .map(|s| s.get().to_string()),
        GenericClass::Prominence => entry
            .importance
            .map(|v| map_prominence(v, breaks))
            .transpose()?
            .map(|p| p.get().to_string()),
        GenericClass::TspCombined => {
            return Err(Error::Validation(
                "combined codes need a codebook; use encode_tsp".into(),
            ))
        }
    })
}

fn side(entries: &[GazetteerEntry], class: GenericClass, breaks: &ProminenceBreaks) -> Result<Option<GenericSequence>> {
    let mut items = Vec::with_capacity(entries.len());
    for e in entries {
        match symbol(e, class, breaks)? {
            Some(s) => items.push(s),
            None => return Ok(None),
        }
    }
    GenericSequence::new(class, items).map(Some)
}

/// Encodes both sides of a record in one generic class, preserving order.
/// Returns `None` when any toponym lacks the attribute the class needs.
pub fn encode_record(
    record: &QARecord,
    breaks: &ProminenceBreaks,
    class: GenericClass,
) -> Result<Option<(GenericSequence, GenericSequence)>> {
    let Some(q) = side(&record.q_toponyms, class, breaks)? else {
        return Ok(None);
    };
    let Some(a) = side(&record.a_toponyms, class, breaks)? else {
        return Ok(None);
    };
    Ok(Some((q, a)))
}

/// Full triples for both sides, or `None` if any toponym is incomplete.
pub fn encode_tsp(record: &QARecord, breaks: &ProminenceBreaks) -> Result<Option<(Vec<TspItem>, Vec<TspItem>)>> {
    let collect = |entries: &[GazetteerEntry]| -> Result<Option<Vec<TspItem>>> {
        entries.iter().map(|e| tsp_item(e, breaks)).collect::<Result<Option<Vec<_>>>>()
    };
    match (collect(&record.q_toponyms)?, collect(&record.a_toponyms)?) {
        (Some(q), Some(a)) => Ok(Some((q, a))),
        _ => Ok(None),
    }
}

/// Bijection between distinct (type, scale, prominence) triples and integer
/// codes. Codes follow the sorted order of the triples, starting at 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CombinedCodebook {
    by_triple: BTreeMap<TspItem, u32>,
    by_code: Vec<TspItem>,
}

#[derive(Serialize, Deserialize)]
struct CodebookRow {
    code: u32,
    #[serde(rename = "type")]
    ptype: PlaceTypeCode,
    scale: ScaleLevel,
    prominence: ProminenceLevel,
}

impl CombinedCodebook {
    pub fn build<'a>(triples: impl IntoIterator<Item = &'a TspItem>) -> Self {
        let distinct: std::collections::BTreeSet<&TspItem> = triples.into_iter().collect();
        let by_code: Vec<TspItem> = distinct.into_iter().cloned().collect();
        let by_triple = by_code
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        CombinedCodebook { by_triple, by_code }
    }

    pub fn len(&self) -> usize {
        self.by_code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_code.is_empty()
    }

    pub fn encode(&self, triple: &TspItem) -> Option<u32> {
        self.by_triple.get(triple).copied()
    }

    pub fn decode(&self, code: u32) -> Option<&TspItem> {
        self.by_code.get(code as usize)
    }

    /// All codes as symbols, the vocabulary of combined sequences.
    pub fn symbols(&self) -> Vec<String> {
        (0..self.by_code.len()).map(|c| c.to_string()).collect()
    }

    pub fn encode_sequence(&self, triples: &[TspItem]) -> Result<GenericSequence> {
        let items = triples
            .iter()
            .map(|t| {
                self.encode(t)
                    .map(|c| c.to_string())
                    .ok_or_else(|| Error::UnknownTriple(t.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        GenericSequence::new(GenericClass::TspCombined, items)
    }

    /// Decodes combined symbols and projects them onto `target`.
    pub fn decode_sequence(&self, seq: &GenericSequence, target: GenericClass) -> Result<GenericSequence> {
        if seq.class != GenericClass::TspCombined {
            return Err(Error::ClassMismatch(seq.class, GenericClass::TspCombined));
        }
        if target == GenericClass::TspCombined {
            return Ok(seq.clone());
        }
        let items = seq
            .items
            .iter()
            .map(|s| {
                let code: u32 = s.parse().map_err(|_| Error::InvalidSymbol {
                    class: GenericClass::TspCombined,
                    symbol: s.clone(),
                })?;
                let triple = self.decode(code).ok_or(Error::UnknownCode(code))?;
                Ok(triple.project(target).expect("single class"))
            })
            .collect::<Result<Vec<_>>>()?;
        GenericSequence::new(target, items)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<CodebookRow> = self
            .by_code
            .iter()
            .enumerate()
            .map(|(i, t)| CodebookRow {
                code: i as u32,
                ptype: t.ptype.clone(),
                scale: t.scale,
                prominence: t.prominence,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("codebook serializes")
    }

    pub fn from_json(text: &str, types: &TypeSchema) -> Result<Self> {
        let mut rows: Vec<CodebookRow> = serde_json::from_str(text)?;
        rows.sort_by_key(|r| r.code);
        let mut book = CombinedCodebook::default();
        for (i, row) in rows.into_iter().enumerate() {
            if row.code as usize != i {
                return Err(Error::ModelFormat(format!("codebook codes not contiguous at {}", row.code)));
            }
            types.check(&row.ptype)?;
            let t = TspItem {
                ptype: row.ptype,
                scale: row.scale,
                prominence: row.prominence,
            };
            if book.by_triple.insert(t.clone(), row.code).is_some() {
                return Err(Error::ModelFormat(format!("duplicate triple {t}")));
            }
            book.by_code.push(t);
        }
        Ok(book)
    }
}
