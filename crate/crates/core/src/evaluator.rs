//! Cross-validated accuracy of answer-template prediction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::breaks::ProminenceBreaks;
use crate::encoder::{encode_record, encode_tsp, CombinedCodebook};
use crate::error::{Error, Result};
use crate::model::{GenericClass, GenericSequence, QARecord, QuestionClass, TspItem, TypeSchema};
use crate::predictor::{decode_combined, train, Method, PredictionSet, PredictorParams, Vocabulary};

pub type Pair = (GenericSequence, GenericSequence);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    TypeToType,
    ScaleToScale,
    PromToProm,
    TspToType,
    TspToScale,
    TspToProm,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::TypeToType,
        Scenario::ScaleToScale,
        Scenario::PromToProm,
        Scenario::TspToType,
        Scenario::TspToScale,
        Scenario::TspToProm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TypeToType => "TYPE->TYPE",
            Scenario::ScaleToScale => "SCALE->SCALE",
            Scenario::PromToProm => "PROM->PROM",
            Scenario::TspToType => "TSP->TYPE",
            Scenario::TspToScale => "TSP->SCALE",
            Scenario::TspToProm => "TSP->PROM",
        }
    }

    /// Input class; combined codes for the TSP scenarios.
    pub fn input(self) -> GenericClass {
        match self {
            Scenario::TypeToType => GenericClass::Type,
            Scenario::ScaleToScale => GenericClass::Scale,
            Scenario::PromToProm => GenericClass::Prominence,
            _ => GenericClass::TspCombined,
        }
    }

    pub fn target(self) -> GenericClass {
        match self {
            Scenario::TypeToType | Scenario::TspToType => GenericClass::Type,
            Scenario::ScaleToScale | Scenario::TspToScale => GenericClass::Scale,
            Scenario::PromToProm | Scenario::TspToProm => GenericClass::Prominence,
        }
    }

    pub fn same_class(target: GenericClass) -> Option<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.target() == target && s.input() == target)
    }

    pub fn from_tsp(target: GenericClass) -> Option<Scenario> {
        Scenario::ALL
            .into_iter()
            .find(|s| s.target() == target && s.input() == GenericClass::TspCombined)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase().replace("PROMINENCE", "PROM");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == up)
            .ok_or_else(|| Error::Eval(format!("unknown scenario {s:?}")))
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    Content,
    ContentAndStyle,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Content, Metric::ContentAndStyle];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Content => "CONTENT",
            Metric::ContentAndStyle => "CONTENT_AND_STYLE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionFilter {
    #[serde(rename = "ALL")]
    All,
    #[serde(rename = "SWQ")]
    Swq,
    #[serde(rename = "DWQ")]
    Dwq,
}

impl QuestionFilter {
    pub const ALL: [QuestionFilter; 3] = [QuestionFilter::All, QuestionFilter::Swq, QuestionFilter::Dwq];

    pub fn name(self) -> &'static str {
        match self {
            QuestionFilter::All => "ALL",
            QuestionFilter::Swq => "SWQ",
            QuestionFilter::Dwq => "DWQ",
        }
    }

    fn admits(self, q: QuestionClass) -> bool {
        match self {
            QuestionFilter::All => true,
            QuestionFilter::Swq => q == QuestionClass::Simple,
            QuestionFilter::Dwq => q == QuestionClass::Detailed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RmseGroup {
    Type,
    Scale,
    Prominence,
    Content,
    ContentAndStyle,
}

impl RmseGroup {
    pub const ALL: [RmseGroup; 5] = [
        RmseGroup::Type,
        RmseGroup::Scale,
        RmseGroup::Prominence,
        RmseGroup::Content,
        RmseGroup::ContentAndStyle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RmseGroup::Type => "TYPE",
            RmseGroup::Scale => "SCALE",
            RmseGroup::Prominence => "PROMINENCE",
            RmseGroup::Content => "CONTENT",
            RmseGroup::ContentAndStyle => "CONTENT_AND_STYLE",
        }
    }

    fn contains(self, scenario: Scenario, metric: Metric) -> bool {
        match self {
            RmseGroup::Type => scenario.target() == GenericClass::Type,
            RmseGroup::Scale => scenario.target() == GenericClass::Scale,
            RmseGroup::Prominence => scenario.target() == GenericClass::Prominence,
            RmseGroup::Content => metric == Metric::Content,
            RmseGroup::ContentAndStyle => metric == Metric::ContentAndStyle,
        }
    }
}

/// Content match: equal as multisets of symbols.
pub fn score_content(predicted: &GenericSequence, truth: &GenericSequence) -> Result<bool> {
    if predicted.class != truth.class {
        return Err(Error::ClassMismatch(predicted.class, truth.class));
    }
    if predicted.len() != truth.len() {
        return Ok(false);
    }
    let mut a: Vec<&String> = predicted.items.iter().collect();
    let mut b: Vec<&String> = truth.items.iter().collect();
    a.sort();
    b.sort();
    Ok(a == b)
}

/// Content-and-style match: identical sequences.
pub fn score_style(predicted: &GenericSequence, truth: &GenericSequence) -> Result<bool> {
    if predicted.class != truth.class {
        return Err(Error::ClassMismatch(predicted.class, truth.class));
    }
    Ok(predicted.items == truth.items)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Sorts the ids, shuffles them with a seeded generator and deals them
/// round-robin into `k` folds.
pub fn make_folds(ids: &[String], k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 {
        return Err(Error::Eval("fold count must be positive".into()));
    }
    if ids.len() < k {
        return Err(Error::Eval(format!("{} records cannot fill {k} folds", ids.len())));
    }
    let mut sorted: Vec<&String> = ids.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Eval(format!("duplicate record id {:?}", w[0])));
    }
    sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let assignment = sorted.into_iter().enumerate().map(|(i, id)| (id.clone(), i % k)).collect();
    Ok(FoldPlan { k, seed, assignment })
}

/// One question/answer pair in every encoding that could be derived.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub id: String,
    pub q_class: QuestionClass,
    pub type_pair: Option<Pair>,
    pub scale_pair: Option<Pair>,
    pub prominence_pair: Option<Pair>,
    pub tsp: Option<(Vec<TspItem>, Vec<TspItem>)>,
}

impl EvalRecord {
    pub fn from_record(record: &QARecord, breaks: &ProminenceBreaks) -> Result<Self> {
        Ok(EvalRecord {
            id: record.id.clone(),
            q_class: record.q_class,
            type_pair: encode_record(record, breaks, GenericClass::Type)?,
            scale_pair: encode_record(record, breaks, GenericClass::Scale)?,
            prominence_pair: encode_record(record, breaks, GenericClass::Prominence)?,
            tsp: encode_tsp(record, breaks)?,
        })
    }

    /// A record known only in one single class.
    pub fn single(id: impl Into<String>, class: GenericClass, pair: Pair) -> Self {
        let q_class = QuestionClass::from_toponym_count(pair.0.len()).expect("nonempty question");
        let mut r = EvalRecord {
            id: id.into(),
            q_class,
            type_pair: None,
            scale_pair: None,
            prominence_pair: None,
            tsp: None,
        };
        match class {
            GenericClass::Type => r.type_pair = Some(pair),
            GenericClass::Scale => r.scale_pair = Some(pair),
            GenericClass::Prominence => r.prominence_pair = Some(pair),
            GenericClass::TspCombined => panic!("combined pairs come from triples"),
        }
        r
    }

    fn pair(&self, class: GenericClass) -> Option<&Pair> {
        match class {
            GenericClass::Type => self.type_pair.as_ref(),
            GenericClass::Scale => self.scale_pair.as_ref(),
            GenericClass::Prominence => self.prominence_pair.as_ref(),
            GenericClass::TspCombined => None,
        }
    }

    fn usable(&self, input: GenericClass) -> bool {
        match input {
            GenericClass::TspCombined => self.tsp.is_some(),
            c => self.pair(c).is_some(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub methods: Vec<Method>,
    pub scenarios: Vec<Scenario>,
    pub k_folds: usize,
    pub seed: u64,
    pub k_max: usize,
    pub params: PredictorParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            methods: Method::ALL.to_vec(),
            scenarios: Scenario::ALL.to_vec(),
            k_folds: 10,
            seed: 0,
            k_max: 5,
            params: PredictorParams::default(),
        }
    }
}

/// One accuracy cell with its raw counts. `accuracy` is `None` when no
/// held-out question fell in the cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub scenario: Scenario,
    pub question_class: QuestionFilter,
    pub method: Method,
    pub k: usize,
    pub metric: Metric,
    pub hits: usize,
    pub total: usize,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FallbackCount {
    pub scenario: String,
    pub method: Method,
    pub questions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub method: Method,
    pub group: RmseGroup,
    pub cells: usize,
    pub rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    /// Scenario name, or `OVERALL` for the mean over scenarios.
    pub scenario: String,
    pub metric: Metric,
    pub best_method: Option<Method>,
    pub best: Option<f64>,
    pub random: Option<f64>,
    pub frequent: Option<f64>,
    pub delta_random: Option<f64>,
    pub delta_frequent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k_folds: usize,
    pub seed: u64,
    pub k_max: usize,
    pub methods: Vec<Method>,
    pub scenarios: Vec<Scenario>,
    /// Usable records per scenario after skip-filtering.
    pub corpus_sizes: BTreeMap<String, usize>,
    pub cells: Vec<Cell>,
    pub fallbacks: Vec<FallbackCount>,
    pub rmse: Vec<RmseRow>,
    pub baseline_delta: Vec<DeltaRow>,
}

type CellKey = (Scenario, QuestionFilter, Method, usize, Metric);

impl EvalReport {
    pub fn cell(&self, scenario: Scenario, q: QuestionFilter, method: Method, k: usize, metric: Metric) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.scenario == scenario && c.question_class == q && c.method == method && c.k == k && c.metric == metric
        })
    }

    pub fn accuracy(&self, scenario: Scenario, q: QuestionFilter, method: Method, k: usize, metric: Metric) -> Option<f64> {
        self.cell(scenario, q, method, k, metric).and_then(|c| c.accuracy)
    }

    fn index(&self) -> BTreeMap<CellKey, Option<f64>> {
        self.cells
            .iter()
            .map(|c| ((c.scenario, c.question_class, c.method, c.k, c.metric), c.accuracy))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Hits per k (1-based prefix of the candidate list) for one target.
fn hits(candidates: &[GenericSequence], truth: &GenericSequence, k_max: usize) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut content = vec![false; k_max];
    let mut style = vec![false; k_max];
    let (mut c_hit, mut s_hit) = (false, false);
    for k in 0..k_max {
        if let Some(p) = candidates.get(k) {
            c_hit |= score_content(p, truth)?;
            s_hit |= score_style(p, truth)?;
        }
        content[k] = c_hit;
        style[k] = s_hit;
    }
    Ok((content, style))
}

#[derive(Default)]
struct UnitResult {
    // (scenario, question class, content hits per k, style hits per k)
    rows: Vec<(Scenario, QuestionClass, Vec<bool>, Vec<bool>)>,
    fallbacks: usize,
}

struct Group<'a> {
    input: GenericClass,
    scenarios: Vec<Scenario>,
    records: Vec<&'a EvalRecord>,
    plan: Option<FoldPlan>,
    codebook: Option<CombinedCodebook>,
}

fn run_unit(
    group: &Group<'_>,
    method: Method,
    fold: usize,
    types: &TypeSchema,
    config: &EvalConfig,
) -> Result<UnitResult> {
    let plan = group.plan.as_ref().expect("unit groups have plans");
    let (test, train_set): (Vec<&EvalRecord>, Vec<&EvalRecord>) =
        group.records.iter().partition(|r| plan.fold_of(&r.id) == Some(fold));
    let mut out = UnitResult::default();
    match &group.codebook {
        None => {
            let class = group.input;
            let pairs: Vec<Pair> = train_set.iter().map(|r| r.pair(class).unwrap().clone()).collect();
            let model = train(method, Vocabulary::for_class(class, types)?, &pairs, config.params.clone(), config.seed)?;
            for r in test {
                let (q, a) = r.pair(class).unwrap();
                let p = model.predict_topk(q, config.k_max)?;
                out.fallbacks += p.fallback as usize;
                let (c, s) = hits(&p.candidates, a, config.k_max)?;
                out.rows.push((group.scenarios[0], r.q_class, c, s));
            }
        }
        Some(book) => {
            let encode = |r: &EvalRecord| -> Result<Pair> {
                let (q, a) = r.tsp.as_ref().unwrap();
                Ok((book.encode_sequence(q)?, book.encode_sequence(a)?))
            };
            let pairs = train_set.iter().map(|r| encode(r)).collect::<Result<Vec<_>>>()?;
            let model = train(method, Vocabulary::for_codebook(book), &pairs, config.params.clone(), config.seed)?;
            for r in test {
                let (q, a) = encode(r)?;
                let raw: PredictionSet = model.predict_topk(&q, config.k_max)?;
                out.fallbacks += raw.fallback as usize;
                for &sc in &group.scenarios {
                    let decoded = decode_combined(book, &raw, sc.target())?;
                    let truth = book.decode_sequence(&a, sc.target())?;
                    let (c, s) = hits(&decoded.candidates, &truth, config.k_max)?;
                    out.rows.push((sc, r.q_class, c, s));
                }
            }
        }
    }
    Ok(out)
}

/// Cross-validates every configured method on every configured scenario.
pub fn evaluate(records: &[EvalRecord], types: &TypeSchema, config: &EvalConfig) -> Result<EvalReport> {
    if config.k_folds < 2 {
        return Err(Error::Eval("need at least 2 folds".into()));
    }
    if config.k_max == 0 {
        return Err(Error::Eval("k_max must be positive".into()));
    }
    if config.methods.is_empty() || config.scenarios.is_empty() {
        return Err(Error::Eval("no methods or scenarios to evaluate".into()));
    }
    let methods: Vec<Method> = config.methods.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let scenarios: Vec<Scenario> = config.scenarios.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();

    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut groups: Vec<Group> = Vec::new();
    let mut corpus_sizes = BTreeMap::new();
    for input in [GenericClass::Type, GenericClass::Scale, GenericClass::Prominence, GenericClass::TspCombined] {
        let wanted: Vec<Scenario> = scenarios.iter().copied().filter(|s| s.input() == input).collect();
        if wanted.is_empty() {
            continue;
        }
        let usable: Vec<&EvalRecord> = sorted.iter().copied().filter(|r| r.usable(input)).collect();
        for s in &wanted {
            corpus_sizes.insert(s.name().to_string(), usable.len());
        }
        let plan = if usable.is_empty() {
            None
        } else {
            let ids: Vec<String> = usable.iter().map(|r| r.id.clone()).collect();
            Some(make_folds(&ids, config.k_folds, config.seed)?)
        };
        let codebook = (input == GenericClass::TspCombined).then(|| {
            CombinedCodebook::build(usable.iter().flat_map(|r| {
                let (q, a) = r.tsp.as_ref().unwrap();
                q.iter().chain(a.iter())
            }))
        });
        groups.push(Group {
            input,
            scenarios: wanted,
            records: usable,
            plan,
            codebook,
        });
    }

    let units: Vec<(usize, Method, usize)> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.plan.is_some())
        .flat_map(|(gi, _)| {
            methods
                .iter()
                .flat_map(move |&m| (0..config.k_folds).map(move |f| (gi, m, f)))
        })
        .collect();
    let results: Vec<UnitResult> = units
        .par_iter()
        .map(|&(gi, m, f)| run_unit(&groups[gi], m, f, types, config))
        .collect::<Result<Vec<_>>>()?;

    let mut counts: BTreeMap<CellKey, (usize, usize)> = BTreeMap::new();
    for &sc in &scenarios {
        for q in QuestionFilter::ALL {
            for &m in &methods {
                for k in 1..=config.k_max {
                    for metric in Metric::ALL {
                        counts.insert((sc, q, m, k, metric), (0, 0));
                    }
                }
            }
        }
    }
    let mut fallback_counts: BTreeMap<(String, Method), usize> = BTreeMap::new();
    for (&(gi, m, _), res) in units.iter().zip(&results) {
        let label = groups[gi].scenarios.iter().map(|s| s.name()).collect::<Vec<_>>().join(",");
        *fallback_counts.entry((label, m)).or_default() += res.fallbacks;
        for (sc, qc, content, style) in &res.rows {
            for q in QuestionFilter::ALL.into_iter().filter(|q| q.admits(*qc)) {
                for k in 1..=config.k_max {
                    for (metric, hit) in [(Metric::Content, content[k - 1]), (Metric::ContentAndStyle, style[k - 1])] {
                        let e = counts.get_mut(&(*sc, q, m, k, metric)).expect("cell preallocated");
                        e.0 += hit as usize;
                        e.1 += 1;
                    }
                }
            }
        }
    }
    let cells = counts
        .into_iter()
        .map(|((scenario, question_class, method, k, metric), (hits, total))| Cell {
            scenario,
            question_class,
            method,
            k,
            metric,
            hits,
            total,
            accuracy: (total > 0).then(|| hits as f64 / total as f64),
        })
        .collect();
    let fallbacks = fallback_counts
        .into_iter()
        .map(|((scenario, method), questions)| FallbackCount {
            scenario,
            method,
            questions,
        })
        .collect();

    let mut report = EvalReport {
        k_folds: config.k_folds,
        seed: config.seed,
        k_max: config.k_max,
        methods,
        scenarios,
        corpus_sizes,
        cells,
        fallbacks,
        rmse: Vec::new(),
        baseline_delta: Vec::new(),
    };
    report.rmse = rmse_table(&report)?;
    report.baseline_delta = baseline_delta(&report);
    Ok(report)
}

fn sequence_methods(report: &EvalReport) -> Vec<Method> {
    report
        .methods
        .iter()
        .copied()
        .filter(|m| Method::SEQUENCE.contains(m))
        .collect()
}

/// Root-mean-square distance of each sequence method from the per-cell best
/// over all sequence methods, per group of cells.
pub fn rmse_table(report: &EvalReport) -> Result<Vec<RmseRow>> {
    let methods = sequence_methods(report);
    let index = report.index();
    // cells keyed without the method
    let mut cells: BTreeMap<(Scenario, QuestionFilter, usize, Metric), Vec<(Method, Option<f64>)>> = BTreeMap::new();
    for (&(sc, q, m, k, metric), &acc) in &index {
        if methods.contains(&m) {
            cells.entry((sc, q, k, metric)).or_default().push((m, acc));
        }
    }
    let mut missing = Vec::new();
    let mut complete: Vec<((Scenario, Metric), BTreeMap<Method, f64>, f64)> = Vec::new();
    for ((sc, q, k, metric), accs) in &cells {
        let present: BTreeMap<Method, f64> = accs.iter().filter_map(|&(m, a)| a.map(|a| (m, a))).collect();
        if present.is_empty() {
            continue;
        }
        for m in &methods {
            if !present.contains_key(m) {
                missing.push(format!("{sc}/{}/{m}/k={k}/{}", q.name(), metric.name()));
            }
        }
        let best = present.values().copied().fold(f64::NEG_INFINITY, f64::max);
        complete.push(((*sc, *metric), present, best));
    }
    if !missing.is_empty() {
        return Err(Error::MissingCells(missing));
    }
    let mut rows = Vec::new();
    for &m in &methods {
        for group in RmseGroup::ALL {
            let diffs: Vec<f64> = complete
                .iter()
                .filter(|((sc, metric), _, _)| group.contains(*sc, *metric))
                .map(|(_, accs, best)| best - accs[&m])
                .collect();
            if diffs.is_empty() {
                continue;
            }
            let mse = diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64;
            rows.push(RmseRow {
                method: m,
                group,
                cells: diffs.len(),
                rmse: mse.sqrt(),
            });
        }
    }
    Ok(rows)
}

/// Best sequence method minus each baseline at k=1 over all questions.
pub fn baseline_delta(report: &EvalReport) -> Vec<DeltaRow> {
    let methods = sequence_methods(report);
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        let mut per_scenario = Vec::new();
        for &sc in &report.scenarios {
            let acc = |m: Method| report.accuracy(sc, QuestionFilter::All, m, 1, metric);
            let best = methods
                .iter()
                .filter_map(|&m| acc(m).map(|a| (m, a)))
                // first method wins ties
                .fold(None, |b: Option<(Method, f64)>, (m, a)| match b {
                    Some((_, ba)) if ba >= a => b,
                    _ => Some((m, a)),
                });
            let random = acc(Method::Random);
            let frequent = acc(Method::Frequent);
            let row = DeltaRow {
                scenario: sc.name().to_string(),
                metric,
                best_method: best.map(|b| b.0),
                best: best.map(|b| b.1),
                random,
                frequent,
                delta_random: best.zip(random).map(|(b, r)| b.1 - r),
                delta_frequent: best.zip(frequent).map(|(b, f)| b.1 - f),
            };
            per_scenario.push(row);
        }
        let mean = |f: fn(&DeltaRow) -> Option<f64>| {
            let v: Vec<f64> = per_scenario.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let overall = DeltaRow {
            scenario: "OVERALL".into(),
            metric,
            best_method: None,
            best: mean(|r| r.best),
            random: mean(|r| r.random),
            frequent: mean(|r| r.frequent),
            delta_random: mean(|r| r.delta_random),
            delta_frequent: mean(|r| r.delta_frequent),
        };
        rows.extend(per_scenario);
        rows.push(overall);
    }
    rows
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Accuracy table for one target class: same-class input next to TSP input.
pub fn write_accuracy_csv<W: Write>(out: W, report: &EvalReport, target: GenericClass) -> Result<()> {
    let same = Scenario::same_class(target).ok_or_else(|| Error::Eval(format!("no scenario targets {target}")))?;
    let tsp = Scenario::from_tsp(target).expect("every single class has a TSP scenario");
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "question_class",
        "k",
        "same_class_content",
        "same_class_content_and_style",
        "tsp_content",
        "tsp_content_and_style",
    ])?;
    for &m in &report.methods {
        for q in QuestionFilter::ALL {
            for k in 1..=report.k_max {
                let a = |sc, metric| fmt_opt(report.accuracy(sc, q, m, k, metric));
                w.write_record([
                    m.name().to_string(),
                    q.name().to_string(),
                    k.to_string(),
                    a(same, Metric::Content),
                    a(same, Metric::ContentAndStyle),
                    a(tsp, Metric::Content),
                    a(tsp, Metric::ContentAndStyle),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Methods as rows, cell groups as columns.
pub fn write_rmse_csv<W: Write>(out: W, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["method".to_string()];
    header.extend(RmseGroup::ALL.iter().map(|g| g.name().to_string()));
    w.write_record(&header)?;
    for m in sequence_methods(report) {
        let mut row = vec![m.name().to_string()];
        for g in RmseGroup::ALL {
            let v = report.rmse.iter().find(|r| r.method == m && r.group == g).map(|r| r.rmse);
            row.push(fmt_opt(v));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_baseline_csv<W: Write>(out: W, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "metric",
        "best_method",
        "best",
        "random",
        "frequent",
        "delta_random",
        "delta_frequent",
    ])?;
    for r in &report.baseline_delta {
        w.write_record([
            r.scenario.clone(),
            r.metric.name().to_string(),
            r.best_method.map(|m| m.name().to_string()).unwrap_or_default(),
            fmt_opt(r.best),
            fmt_opt(r.random),
            fmt_opt(r.frequent),
            fmt_opt(r.delta_random),
            fmt_opt(r.delta_frequent),
        ])?;
    }
    w.flush()?;
    Ok(())
}
