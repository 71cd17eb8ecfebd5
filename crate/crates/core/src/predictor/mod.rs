//! Sequence prediction of answer templates from question templates.
//!
//! Every method is trained on `question ++ [SEP] ++ answer ++ [END]` and
//! exposes next-symbol weights for a context. A shared beam search turns
//! those into ranked answer sequences.

mod baseline;
mod cpt;
mod dg;
mod lz78;
mod markov;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

pub use baseline::FrequentAnswers;
pub use cpt::Cpt;
pub use dg::DependencyGraph;
pub use lz78::Lz78;
pub use markov::{ContextModel, Mark1};

use crate::encoder::CombinedCodebook;
use crate::error::{Error, Result};
use crate::model::{GenericClass, GenericSequence, TspItem, TypeSchema};

pub const SEP: u32 = 0;
pub const END: u32 = 1;
const FIRST_SYMBOL: u32 = 2;

pub const FORMAT_VERSION: u32 = 1;

pub(crate) type Counts = BTreeMap<u32, u32>;

/// Serializes maps with non-string keys as lists of `[key, value]` pairs.
pub(crate) mod entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K: Serialize, V: Serialize, S: Serializer>(
        map: &BTreeMap<K, V>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Ok(Vec::<(K, V)>::deserialize(d)?.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "LZ78")]
    Lz78,
    #[serde(rename = "MARK1")]
    Mark1,
    #[serde(rename = "TDAG")]
    Tdag,
    #[serde(rename = "DG")]
    Dg,
    #[serde(rename = "AKOM")]
    Akom,
    #[serde(rename = "CPT")]
    Cpt,
    #[serde(rename = "CPTPLUS")]
    CptPlus,
    #[serde(rename = "RANDOM")]
    Random,
    #[serde(rename = "FREQUENT")]
    Frequent,
}

impl Method {
    /// The sequence prediction methods, without the two baselines.
    pub const SEQUENCE: [Method; 7] = [
        Method::Lz78,
        Method::Mark1,
        Method::Tdag,
        Method::Dg,
        Method::Akom,
        Method::Cpt,
        Method::CptPlus,
    ];

    pub const ALL: [Method; 9] = [
        Method::Lz78,
        Method::Mark1,
        Method::Tdag,
        Method::Dg,
        Method::Akom,
        Method::Cpt,
        Method::CptPlus,
        Method::Random,
        Method::Frequent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lz78 => "LZ78",
            Method::Mark1 => "MARK1",
            Method::Tdag => "TDAG",
            Method::Dg => "DG",
            Method::Akom => "AKOM",
            Method::Cpt => "CPT",
            Method::CptPlus => "CPTPLUS",
            Method::Random => "RANDOM",
            Method::Frequent => "FREQUENT",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Method::Random | Method::Frequent)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        if up == "CPT+" {
            return Ok(Method::CptPlus);
        }
        Method::ALL
            .into_iter()
            .find(|m| m.name() == up)
            .ok_or_else(|| Error::Training(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictorParams {
    pub max_answer_len: usize,
    /// Start offsets parsed per sequence; `None` parses from every offset.
    pub lz78_shifts: Option<usize>,
    pub akom_order: usize,
    pub tdag_depth: usize,
    pub tdag_threshold: u32,
    pub dg_window: usize,
    pub cpt_query_len: usize,
    pub cptplus_min_support: usize,
    pub cptplus_max_len: usize,
}

impl Default for PredictorParams {
    fn default() -> Self {
        PredictorParams {
            max_answer_len: 5,
            lz78_shifts: None,
            akom_order: 5,
            tdag_depth: 6,
            tdag_threshold: 1,
            dg_window: 4,
            cpt_query_len: 3,
            cptplus_min_support: 2,
            cptplus_max_len: 4,
        }
    }
}

impl PredictorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_answer_len", self.max_answer_len),
            ("akom_order", self.akom_order),
            ("tdag_depth", self.tdag_depth),
            ("dg_window", self.dg_window),
            ("cpt_query_len", self.cpt_query_len),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Training(format!("{name} must be positive")));
            }
        }
        if self.lz78_shifts == Some(0) {
            return Err(Error::Training("lz78_shifts must be positive".into()));
        }
        if self.cptplus_max_len < 2 {
            return Err(Error::Training("cptplus_max_len must be at least 2".into()));
        }
        Ok(())
    }
}

/// Symbols of one generic class. SEP and END take ids 0 and 1; schema
/// symbols follow in lexicographic order, so id order is symbol order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    class: GenericClass,
    symbols: Vec<String>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    class: GenericClass,
    symbols: Vec<String>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::new(r.class, r.symbols)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            class: v.class,
            symbols: v.symbols,
        }
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class && self.symbols == other.symbols
    }
}

impl Vocabulary {
    pub fn new(class: GenericClass, symbols: impl IntoIterator<Item = String>) -> Self {
        let mut symbols: Vec<String> = symbols.into_iter().collect();
        symbols.sort();
        symbols.dedup();
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), FIRST_SYMBOL + i as u32))
            .collect();
        Vocabulary {
            class,
            symbols,
            index,
        }
    }

    /// The full schema of a single generic class.
    pub fn for_class(class: GenericClass, types: &TypeSchema) -> Result<Self> {
        if class == GenericClass::TspCombined {
            return Err(Error::Training("combined vocabulary comes from a codebook".into()));
        }
        Ok(Vocabulary::new(class, class.vocabulary(types)))
    }

    pub fn for_codebook(book: &CombinedCodebook) -> Self {
        Vocabulary::new(GenericClass::TspCombined, book.symbols())
    }

    pub fn class(&self) -> GenericClass {
        self.class
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn id(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> Option<&str> {
        id.checked_sub(FIRST_SYMBOL)
            .and_then(|i| self.symbols.get(i as usize))
            .map(String::as_str)
    }

    fn ids(&self, seq: &GenericSequence) -> Result<Vec<u32>> {
        if seq.class != self.class {
            return Err(Error::ClassMismatch(seq.class, self.class));
        }
        seq.items
            .iter()
            .map(|s| {
                self.id(s).ok_or_else(|| Error::InvalidSymbol {
                    class: self.class,
                    symbol: s.clone(),
                })
            })
            .collect()
    }

    fn decode(&self, ids: &[u32]) -> GenericSequence {
        let items = ids.iter().map(|&i| self.symbol(i).expect("id from this vocabulary").to_string());
        GenericSequence::new(self.class, items).expect("answers are nonempty")
    }

    /// `question ++ [SEP] ++ answer ++ [END]` as symbol ids.
    pub fn training_sequence(&self, question: &GenericSequence, answer: &GenericSequence) -> Result<Vec<u32>> {
        let mut seq = self.ids(question)?;
        seq.push(SEP);
        seq.extend(self.ids(answer)?);
        seq.push(END);
        Ok(seq)
    }
}

/// Ranked answer candidates, best first, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub candidates: Vec<GenericSequence>,
    /// Set when the method could not score a first answer symbol and the
    /// most frequent training answers were returned instead.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data")]
enum State {
    Lz78(Lz78),
    Mark1(Mark1),
    Tdag(ContextModel),
    Dg(DependencyGraph),
    Akom(ContextModel),
    Cpt(Cpt),
    CptPlus(Cpt),
    Random,
    Frequent,
}

// Read through an untyped value so `data` may precede `kind`; serde's
// buffered path for adjacently tagged enums rejects integer map keys.
impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            kind: String,
            #[serde(default)]
            data: serde_json::Value,
        }
        fn data<T: serde::de::DeserializeOwned, E: serde::de::Error>(v: serde_json::Value) -> std::result::Result<T, E> {
            serde_json::from_value(v).map_err(E::custom)
        }
        let raw = Raw::deserialize(d)?;
        Ok(match raw.kind.as_str() {
            "Lz78" => State::Lz78(data(raw.data)?),
            "Mark1" => State::Mark1(data(raw.data)?),
            "Tdag" => State::Tdag(data(raw.data)?),
            "Dg" => State::Dg(data(raw.data)?),
            "Akom" => State::Akom(data(raw.data)?),
            "Cpt" => State::Cpt(data(raw.data)?),
            "CptPlus" => State::CptPlus(data(raw.data)?),
            "Random" => State::Random,
            "Frequent" => State::Frequent,
            other => return Err(serde::de::Error::unknown_variant(other, STATE_KINDS)),
        })
    }
}

const STATE_KINDS: &[&str] = &["Lz78", "Mark1", "Tdag", "Dg", "Akom", "Cpt", "CptPlus", "Random", "Frequent"];

#[derive(Clone, Debug, PartialEq)]
pub struct PredictorModel {
    method: Method,
    params: PredictorParams,
    vocab: Vocabulary,
    seed: u64,
    state: State,
    answers: FrequentAnswers,
}

#[derive(Serialize, Deserialize)]
struct StateEnvelope {
    model: State,
    frequent_answers: FrequentAnswers,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    version: u32,
    method: Method,
    params: PredictorParams,
    schema: Vocabulary,
    seed: u64,
    state: StateEnvelope,
}

#[derive(Debug)]
struct Hyp {
    items: Vec<u32>,
    logp: f64,
    done: bool,
}

fn order_hyps(a: &Hyp, b: &Hyp) -> std::cmp::Ordering {
    b.logp
        .total_cmp(&a.logp)
        .then_with(|| a.items.cmp(&b.items))
        .then_with(|| b.done.cmp(&a.done))
}

fn counts_to_weights(c: &Counts) -> Vec<(u32, f64)> {
    c.iter().map(|(&s, &n)| (s, n as f64)).collect()
}

/// Trains `method` on encoded question/answer pairs.
pub fn train(
    method: Method,
    vocab: Vocabulary,
    pairs: &[(GenericSequence, GenericSequence)],
    params: PredictorParams,
    seed: u64,
) -> Result<PredictorModel> {
    params.validate()?;
    if pairs.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if vocab.is_empty() {
        return Err(Error::Training("empty vocabulary".into()));
    }
    let seqs = pairs
        .iter()
        .map(|(q, a)| vocab.training_sequence(q, a))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Training(e.to_string()))?;
    let answers = FrequentAnswers::train(seqs.iter().map(|s| {
        let sep = s.iter().position(|&x| x == SEP).expect("training sequence has SEP");
        &s[sep + 1..s.len() - 1]
    }));
    let composite_base = FIRST_SYMBOL + vocab.len() as u32;
    let state = match method {
        Method::Lz78 => State::Lz78(Lz78::train(&seqs, params.lz78_shifts)),
        Method::Mark1 => State::Mark1(Mark1::train(&seqs)),
        Method::Tdag => State::Tdag(ContextModel::train(&seqs, 0, params.tdag_depth, params.tdag_threshold)),
        Method::Dg => State::Dg(DependencyGraph::train(&seqs, params.dg_window)),
        Method::Akom => State::Akom(ContextModel::train(&seqs, 1, params.akom_order, 1)),
        Method::Cpt => State::Cpt(Cpt::train(&seqs, composite_base, params.cpt_query_len)),
        Method::CptPlus => State::CptPlus(Cpt::train_plus(
            &seqs,
            composite_base,
            params.cpt_query_len,
            params.cptplus_min_support,
            params.cptplus_max_len,
        )),
        Method::Random => State::Random,
        Method::Frequent => State::Frequent,
    };
    Ok(PredictorModel {
        method,
        params,
        vocab,
        seed,
        state,
        answers,
    })
}

impl PredictorModel {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn params(&self) -> &PredictorParams {
        &self.params
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mark1(&self) -> Option<&Mark1> {
        match &self.state {
            State::Mark1(m) => Some(m),
            _ => None,
        }
    }

    pub fn cpt(&self) -> Option<&Cpt> {
        match &self.state {
            State::Cpt(c) | State::CptPlus(c) => Some(c),
            _ => None,
        }
    }

    pub fn frequent_answers(&self) -> &FrequentAnswers {
        &self.answers
    }

    fn weights(&self, ctx: &[u32]) -> Vec<(u32, f64)> {
        match &self.state {
            State::Lz78(m) => counts_to_weights(&m.next(ctx)),
            State::Mark1(m) => m.next(ctx).map(counts_to_weights).unwrap_or_default(),
            State::Tdag(m) | State::Akom(m) => m.next(ctx).map(counts_to_weights).unwrap_or_default(),
            State::Dg(m) => m.next(ctx),
            State::Cpt(m) | State::CptPlus(m) => counts_to_weights(&m.next(ctx)),
            State::Random | State::Frequent => Vec::new(),
        }
    }

    /// Beam search over answer continuations. `None` when no first answer
    /// symbol can be scored.
    fn beam(&self, question: &[u32], k: usize) -> Option<Vec<Vec<u32>>> {
        let max_len = self.params.max_answer_len;
        let mut beams = vec![Hyp {
            items: Vec::new(),
            logp: 0.0,
            done: false,
        }];
        let mut ctx = question.to_vec();
        ctx.push(SEP);
        let base = ctx.len();
        for step in 0..max_len {
            if beams.iter().all(|h| h.done) {
                break;
            }
            let mut next = Vec::new();
            for h in beams {
                if h.done {
                    next.push(h);
                    continue;
                }
                ctx.truncate(base);
                ctx.extend(&h.items);
                let dist: Vec<(u32, f64)> = self
                    .weights(&ctx)
                    .into_iter()
                    .filter(|&(s, w)| w > 0.0 && s != SEP && !(step == 0 && s == END))
                    .collect();
                if dist.is_empty() {
                    if step == 0 {
                        return None;
                    }
                    next.push(Hyp { done: true, ..h });
                    continue;
                }
                let total: f64 = dist.iter().map(|d| d.1).sum();
                for (s, w) in dist {
                    let logp = h.logp + (w / total).ln();
                    let mut items = h.items.clone();
                    if s != END {
                        items.push(s);
                    }
                    let done = s == END || items.len() == max_len;
                    next.push(Hyp { items, logp, done });
                }
            }
            next.sort_by(order_hyps);
            next.truncate(k);
            beams = next;
        }
        let mut out: Vec<Vec<u32>> = Vec::new();
        for h in beams {
            if !out.contains(&h.items) {
                out.push(h.items);
            }
        }
        Some(out)
    }

    /// Up to `k` distinct answer sequences for `question`, best first.
    pub fn predict_topk(&self, question: &GenericSequence, k: usize) -> Result<PredictionSet> {
        let q = self.vocab.ids(question)?;
        if k == 0 {
            return Ok(PredictionSet {
                candidates: Vec::new(),
                fallback: false,
            });
        }
        let (ids, fallback) = match self.method {
            Method::Frequent => (self.answers.top_k(k), false),
            Method::Random => {
                let mut rng = baseline::question_rng(self.seed, &question.items);
                let n = self.vocab.len() as u32;
                (
                    baseline::random_answers(&mut rng, FIRST_SYMBOL, n, self.params.max_answer_len, k),
                    false,
                )
            }
            _ => match self.beam(&q, k) {
                Some(found) => (found, false),
                None => (self.answers.top_k(k), true),
            },
        };
        Ok(PredictionSet {
            candidates: ids.iter().map(|s| self.vocab.decode(s)).collect(),
            fallback,
        })
    }

    pub fn to_json(&self) -> String {
        let env = Envelope {
            version: FORMAT_VERSION,
            method: self.method,
            params: self.params.clone(),
            schema: self.vocab.clone(),
            seed: self.seed,
            state: StateEnvelope {
                model: self.state.clone(),
                frequent_answers: self.answers.clone(),
            },
        };
        serde_json::to_string(&env).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if env.version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", env.version)));
        }
        let kind_matches = matches!(
            (env.method, &env.state.model),
            (Method::Lz78, State::Lz78(_))
                | (Method::Mark1, State::Mark1(_))
                | (Method::Tdag, State::Tdag(_))
                | (Method::Dg, State::Dg(_))
                | (Method::Akom, State::Akom(_))
                | (Method::Cpt, State::Cpt(_))
                | (Method::CptPlus, State::CptPlus(_))
                | (Method::Random, State::Random)
                | (Method::Frequent, State::Frequent)
        );
        if !kind_matches {
            return Err(Error::ModelFormat(format!("state does not belong to method {}", env.method)));
        }
        env.params.validate()?;
        Ok(PredictorModel {
            method: env.method,
            params: env.params,
            vocab: env.schema,
            seed: env.seed,
            state: env.state.model,
            answers: env.state.frequent_answers,
        })
    }
}

/// Most frequent full answers of a training set, for any class.
pub fn baseline_frequent(pairs: &[(GenericSequence, GenericSequence)], k: usize) -> Result<Vec<GenericSequence>> {
    if pairs.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut counts: BTreeMap<&GenericSequence, usize> = BTreeMap::new();
    for (_, a) in pairs {
        *counts.entry(a).or_default() += 1;
    }
    let mut all: Vec<(&GenericSequence, usize)> = counts.into_iter().collect();
    all.sort_by(|a, b| b.1.cmp(&a.1));
    Ok(all.into_iter().take(k).map(|(a, _)| a.clone()).collect())
}

/// Decodes combined-code candidates into `target`, keeping the first
/// occurrence of each decoded sequence.
pub fn decode_combined(book: &CombinedCodebook, raw: &PredictionSet, target: GenericClass) -> Result<PredictionSet> {
    let mut candidates: Vec<GenericSequence> = Vec::new();
    for c in &raw.candidates {
        let decoded = book.decode_sequence(c, target)?;
        if !candidates.contains(&decoded) {
            candidates.push(decoded);
        }
    }
    Ok(PredictionSet {
        candidates,
        fallback: raw.fallback,
    })
}

/// Predicts combined codes for a question given as triples, decodes each
/// candidate into `target` and drops decoded duplicates.
pub fn predict_tsp_combined(
    model: &PredictorModel,
    book: &CombinedCodebook,
    question: &[TspItem],
    target: GenericClass,
    k: usize,
) -> Result<PredictionSet> {
    if model.vocab.class() != GenericClass::TspCombined {
        return Err(Error::ClassMismatch(model.vocab.class(), GenericClass::TspCombined));
    }
    let q = book.encode_sequence(question)?;
    decode_combined(book, &model.predict_topk(&q, k)?, target)
}
