//! Domain types shared by every stage of the pipeline: place type codes and
//! the type schema, the scale and prominence ordinals, generic sequences and
//! resolved question/answer records.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};

/// Geonames feature class letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureClass {
    A,
    H,
    L,
    P,
    R,
    S,
    T,
    U,
    V,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 9] = [
        FeatureClass::A,
        FeatureClass::H,
        FeatureClass::L,
        FeatureClass::P,
        FeatureClass::R,
        FeatureClass::S,
        FeatureClass::T,
        FeatureClass::U,
        FeatureClass::V,
    ];

    pub fn letter(self) -> char {
        match self {
            FeatureClass::A => 'A',
            FeatureClass::H => 'H',
            FeatureClass::L => 'L',
            FeatureClass::P => 'P',
            FeatureClass::R => 'R',
            FeatureClass::S => 'S',
            FeatureClass::T => 'T',
            FeatureClass::U => 'U',
            FeatureClass::V => 'V',
        }
    }
}

impl FromStr for FeatureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureClass::ALL
            .into_iter()
            .find(|c| s.len() == 1 && s.starts_with(c.letter()))
            .ok_or_else(|| Error::InvalidCode(format!("feature class {s:?}")))
    }
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A Geonames feature code together with its class letter, e.g. `A.ADM1`.
///
/// Ordering and equality are by code first; codes are unique within the
/// schema so the class only matters for rendering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PlaceTypeCode {
    code: String,
    class: FeatureClass,
}

impl PlaceTypeCode {
    pub fn new(class: FeatureClass, code: &str) -> Result<Self> {
        let well_formed = !code.is_empty()
            && code.len() <= 6
            && code
                .chars()
                .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit());
        if !well_formed {
            return Err(Error::InvalidCode(code.to_string()));
        }
        Ok(PlaceTypeCode {
            code: code.to_string(),
            class,
        })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn class(&self) -> FeatureClass {
        self.class
    }

    /// Administrative divisions (`ADM1`, `PCLI`, ...) carry class letter A.
    pub fn is_administrative(&self) -> bool {
        self.class == FeatureClass::A
    }

    pub fn is_populated_place(&self) -> bool {
        self.class == FeatureClass::P
    }
}

impl fmt::Display for PlaceTypeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.code)
    }
}

impl TryFrom<String> for PlaceTypeCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        let (class, code) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidCode(s.clone()))?;
        PlaceTypeCode::new(class.parse()?, code)
    }
}

impl From<PlaceTypeCode> for String {
    fn from(c: PlaceTypeCode) -> String {
        c.to_string()
    }
}

/// The closed set of place type codes every TYPE symbol must belong to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeSchema {
    codes: BTreeMap<String, FeatureClass>,
}

impl TypeSchema {
    /// Parses the two-column `<class letter> <code>` format. Blank lines and
    /// `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut codes = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [class, code] = fields[..] else {
                return Err(Error::SchemaLine {
                    line,
                    message: format!("expected 2 columns, found {}", fields.len()),
                });
            };
            let class: FeatureClass = class.parse().map_err(|e: Error| Error::SchemaLine {
                line,
                message: e.to_string(),
            })?;
            let ptype = PlaceTypeCode::new(class, code).map_err(|e| Error::SchemaLine {
                line,
                message: e.to_string(),
            })?;
            if codes.insert(ptype.code, class).is_some() {
                return Err(Error::SchemaLine {
                    line,
                    message: format!("duplicate code {code}"),
                });
            }
        }
        if codes.is_empty() {
            return Err(Error::EmptySchema);
        }
        Ok(TypeSchema { codes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.codes.contains_key(code)
    }

    pub fn get(&self, code: &str) -> Option<PlaceTypeCode> {
        self.codes.get(code).map(|&class| PlaceTypeCode {
            code: code.to_string(),
            class,
        })
    }

    /// Checks that `ptype` is in the schema under the same class letter.
    pub fn check(&self, ptype: &PlaceTypeCode) -> Result<()> {
        match self.codes.get(ptype.code()) {
            Some(&class) if class == ptype.class() => Ok(()),
            Some(&class) => Err(Error::InvalidCode(format!(
                "{ptype} (schema class is {class})"
            ))),
            None => Err(Error::InvalidCode(format!("{ptype} not in type schema"))),
        }
    }

    pub fn codes(&self) -> impl Iterator<Item = PlaceTypeCode> + '_ {
        self.codes.iter().map(|(code, &class)| PlaceTypeCode {
            code: code.clone(),
            class,
        })
    }
}

/// Scale ordinal, 1 (buildings) to 8 (oceans, seas and continents).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ScaleLevel(u8);

impl ScaleLevel {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 8;

    pub fn new(level: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&level) {
            Ok(ScaleLevel(level))
        } else {
            Err(Error::OutOfRange {
                what: "scale level",
                value: level.to_string(),
            })
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for ScaleLevel {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        ScaleLevel::new(v)
    }
}

impl From<ScaleLevel> for u8 {
    fn from(v: ScaleLevel) -> u8 {
        v.0
    }
}

/// Prominence ordinal, 1 to 7 (most prominent).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ProminenceLevel(u8);

impl ProminenceLevel {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 7;

    pub fn new(level: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&level) {
            Ok(ProminenceLevel(level))
        } else {
            Err(Error::OutOfRange {
                what: "prominence level",
                value: level.to_string(),
            })
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for ProminenceLevel {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        ProminenceLevel::new(v)
    }
}

impl From<ProminenceLevel> for u8 {
    fn from(v: ProminenceLevel) -> u8 {
        v.0
    }
}

/// Type, scale and prominence of one toponym.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TspItem {
    #[serde(rename = "type")]
    pub ptype: PlaceTypeCode,
    pub scale: ScaleLevel,
    pub prominence: ProminenceLevel,
}

impl TspItem {
    /// Symbol of this triple projected onto a single generic class.
    pub fn project(&self, class: GenericClass) -> Option<String> {
        match class {
            GenericClass::Type => Some(self.ptype.code().to_string()),
            GenericClass::Scale => Some(self.scale.get().to_string()),
            GenericClass::Prominence => Some(self.prominence.get().to_string()),
            GenericClass::TspCombined => None,
        }
    }
}

impl fmt::Display for TspItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.ptype.code(),
            self.scale.get(),
            self.prominence.get()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GenericClass {
    Type,
    Scale,
    Prominence,
    TspCombined,
}

impl GenericClass {
    pub const SINGLE: [GenericClass; 3] = [
        GenericClass::Type,
        GenericClass::Scale,
        GenericClass::Prominence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenericClass::Type => "TYPE",
            GenericClass::Scale => "SCALE",
            GenericClass::Prominence => "PROMINENCE",
            GenericClass::TspCombined => "TSP_COMBINED",
        }
    }

    /// Checks a symbol against this class's schema. TSP codes are only
    /// checked for shape; membership is the codebook's business.
    pub fn check_symbol(self, symbol: &str, types: &TypeSchema) -> Result<()> {
        let ok = match self {
            GenericClass::Type => types.contains(symbol),
            GenericClass::Scale => symbol
                .parse::<u8>()
                .map(|v| ScaleLevel::new(v).is_ok())
                .unwrap_or(false),
            GenericClass::Prominence => symbol
                .parse::<u8>()
                .map(|v| ProminenceLevel::new(v).is_ok())
                .unwrap_or(false),
            GenericClass::TspCombined => symbol.parse::<u32>().is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSymbol {
                class: self,
                symbol: symbol.to_string(),
            })
        }
    }

    /// Every symbol of the class schema. Not defined for combined codes,
    /// whose vocabulary is the codebook.
    pub fn vocabulary(self, types: &TypeSchema) -> Vec<String> {
        match self {
            GenericClass::Type => types.codes().map(|c| c.code().to_string()).collect(),
            GenericClass::Scale => (ScaleLevel::MIN..=ScaleLevel::MAX)
                .map(|v| v.to_string())
                .collect(),
            GenericClass::Prominence => (ProminenceLevel::MIN..=ProminenceLevel::MAX)
                .map(|v| v.to_string())
                .collect(),
            GenericClass::TspCombined => Vec::new(),
        }
    }
}

impl fmt::Display for GenericClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenericClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TYPE" => Ok(GenericClass::Type),
            "SCALE" => Ok(GenericClass::Scale),
            "PROMINENCE" | "PROM" => Ok(GenericClass::Prominence),
            "TSP" | "TSP_COMBINED" => Ok(GenericClass::TspCombined),
            _ => Err(Error::Validation(format!("unknown generic class {s:?}"))),
        }
    }
}

/// An ordered, nonempty list of generic symbols of one class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenericSequence {
    pub class: GenericClass,
    pub items: Vec<String>,
}

impl GenericSequence {
    pub fn new<S: Into<String>>(
        class: GenericClass,
        items: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let items: Vec<String> = items.into_iter().map(Into::into).collect();
        if items.is_empty() {
            return Err(Error::Validation(format!("empty {class} sequence")));
        }
        Ok(GenericSequence { class, items })
    }

    /// Like [`GenericSequence::new`], also checking every symbol against the
    /// class schema. Out-of-range scale symbols such as `9` are rejected here.
    pub fn parse<S: Into<String>>(
        class: GenericClass,
        items: impl IntoIterator<Item = S>,
        types: &TypeSchema,
    ) -> Result<Self> {
        let seq = Self::new(class, items)?;
        for s in &seq.items {
            class.check_symbol(s, types)?;
        }
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl fmt::Display for GenericSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.items.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionClass {
    #[serde(rename = "SWQ")]
    Simple,
    #[serde(rename = "DWQ")]
    Detailed,
}

impl QuestionClass {
    pub fn from_toponym_count(n: usize) -> Option<Self> {
        match n {
            0 => None,
            1 => Some(QuestionClass::Simple),
            _ => Some(QuestionClass::Detailed),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuestionClass::Simple => "SWQ",
            QuestionClass::Detailed => "DWQ",
        }
    }
}

impl fmt::Display for QuestionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Self {
        BBox {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        }
    }

    /// Area in squared degrees, no spherical correction.
    pub fn area(&self) -> f64 {
        (self.max_lat - self.min_lat) * (self.max_lon - self.min_lon)
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min_lat: self.min_lat.min(other.min_lat),
            min_lon: self.min_lon.min(other.min_lon),
            max_lat: self.max_lat.max(other.max_lat),
            max_lon: self.max_lon.max(other.max_lon),
        }
    }

    /// Inclusive on every edge.
    pub fn contains(&self, p: &Point) -> bool {
        self.min_lat <= p.lat && p.lat <= self.max_lat && self.min_lon <= p.lon && p.lon <= self.max_lon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub lat: f64,
    pub lon: f64,
}

/// One resolved place: Geonames identity and type, OSM extent, rank and
/// importance. `place_rank` and `importance` may be missing in the source
/// data; such entries still resolve but cannot be scale/prominence encoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    pub geonames_id: u64,
    pub feature_code: PlaceTypeCode,
    pub bbox: BBox,
    pub point: Point,
    pub place_rank: Option<u8>,
    pub importance: Option<f64>,
}

impl GazetteerEntry {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bbox;
        let coords = [b.min_lat, b.min_lon, b.max_lat, b.max_lon, self.point.lat, self.point.lon];
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite coordinate".into()));
        }
        if !(-90.0..=90.0).contains(&b.min_lat) || !(-90.0..=90.0).contains(&b.max_lat) {
            return Err(Error::Validation("latitude outside [-90, 90]".into()));
        }
        if !(-180.0..=180.0).contains(&b.min_lon) || !(-180.0..=180.0).contains(&b.max_lon) {
            return Err(Error::Validation("longitude outside [-180, 180]".into()));
        }
        if b.min_lat > b.max_lat {
            return Err(Error::Validation(format!(
                "min_lat {} > max_lat {}",
                b.min_lat, b.max_lat
            )));
        }
        // A min_lon east of max_lon is an antimeridian-crossing box.
        if b.min_lon > b.max_lon {
            return Err(Error::Validation(format!(
                "min_lon {} > max_lon {} (antimeridian-crossing boxes are not supported)",
                b.min_lon, b.max_lon
            )));
        }
        if !b.contains(&self.point) {
            return Err(Error::Validation(format!(
                "point ({}, {}) outside bounding box",
                self.point.lat, self.point.lon
            )));
        }
        if let Some(rank) = self.place_rank {
            if rank > 30 {
                return Err(Error::OutOfRange {
                    what: "place_rank",
                    value: rank.to_string(),
                });
            }
        }
        if let Some(imp) = self.importance {
            if !(0.0..=1.0).contains(&imp) {
                return Err(Error::OutOfRange {
                    what: "importance",
                    value: imp.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// A where-question and its answer as ordered toponym sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QARecord {
    pub id: String,
    pub q_toponyms: Vec<GazetteerEntry>,
    pub a_toponyms: Vec<GazetteerEntry>,
    pub q_class: QuestionClass,
}

impl QARecord {
    pub fn new(
        id: impl Into<String>,
        q_toponyms: Vec<GazetteerEntry>,
        a_toponyms: Vec<GazetteerEntry>,
    ) -> Result<Self> {
        let q_class = QuestionClass::from_toponym_count(q_toponyms.len())
            .ok_or_else(|| Error::Validation("question has no toponyms".into()))?;
        QARecord {
            id: id.into(),
            q_toponyms,
            a_toponyms,
            q_class,
        }
        .validate()
    }

    /// Recomputes `q_class` from the question toponym count and rejects
    /// records with an empty side or invalid entries.
    pub fn validate(mut self) -> Result<Self> {
        if self.id.is_empty() {
            return Err(Error::Validation("empty record id".into()));
        }
        self.q_class = QuestionClass::from_toponym_count(self.q_toponyms.len())
            .ok_or_else(|| Error::Validation(format!("{}: question has no toponyms", self.id)))?;
        if self.a_toponyms.is_empty() {
            return Err(Error::Validation(format!("{}: answer has no toponyms", self.id)));
        }
        for e in self.q_toponyms.iter().chain(&self.a_toponyms) {
            e.validate()
                .map_err(|err| Error::Validation(format!("{}: {}: {err}", self.id, e.name)))?;
        }
        Ok(self)
    }
}
