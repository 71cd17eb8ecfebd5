use std::collections::{BTreeMap, HashSet};
use std::time::Duration;

use anyhow::{Context, Result};
use geotemplate::breaks::{fit_prominence_breaks, ProminenceBreaks};
use geotemplate::encoder::{encode_record, encode_tsp, CombinedCodebook};
use geotemplate::evaluator::{
    evaluate, write_accuracy_csv, write_baseline_csv, write_rmse_csv, EvalConfig, EvalRecord, Scenario,
};
use geotemplate::gazetteer::{disambiguate, CandidateSet, GazetteerIndex, DEFAULT_COMBINATION_CAP};
use geotemplate::miner::{build_transactions, mine_rules, rank_rules, split_by_question_class, write_rules_csv};
use geotemplate::model::{GenericClass, GenericSequence, QARecord, QuestionClass, TypeSchema};
use geotemplate::predictor::{train, Method, PredictorModel, Vocabulary};
use geotemplate::sparql::{
    build_query, execute_query, validate_query, ClassMap, FixtureTransport, HttpTransport, QueryPlan, Transport,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::PipelineConfig;
use crate::output::{read_json, read_jsonl, Artifacts, Meta};
use crate::DataError;

pub const PROMINENCE_CLASSES: usize = 7;
const SINGLE: [GenericClass; 3] = GenericClass::SINGLE;

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub hash: String,
    pub out: Artifacts,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig) -> Self {
        Ctx {
            hash: cfg.hash(),
            out: Artifacts::new(cfg.paths.out.clone()),
            cfg,
        }
    }

    fn meta(&self, stage: &str) -> Meta {
        Meta {
            config_hash: self.hash.clone(),
            seed: self.cfg.seed,
            stage: stage.into(),
        }
    }

    fn types(&self) -> Result<TypeSchema> {
        self.cfg.require_inputs(&[&self.cfg.paths.type_schema])?;
        Ok(TypeSchema::load(&self.cfg.paths.type_schema)?)
    }

    fn resolved(&self) -> Result<Vec<QARecord>> {
        let p = self.out.upstream("resolved.jsonl", "ingest")?;
        let rows: Vec<QARecord> = read_jsonl(&p)?;
        rows.into_iter()
            .map(|r| r.validate().map_err(anyhow::Error::from))
            .collect()
    }

    fn breaks(&self) -> Result<ProminenceBreaks> {
        let v: Value = read_json(&self.out.upstream("breaks.json", "encode")?, "breaks")?;
        Ok(ProminenceBreaks::from_json(&v.to_string())?)
    }
}

/// One line of the ingest corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub q_spans: Vec<String>,
    pub a_spans: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_geonames_ids: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_geonames_ids: Option<Vec<u64>>,
}

#[derive(Debug, Serialize)]
struct Skip {
    line: usize,
    id: Option<String>,
    reason: String,
}

#[derive(Debug, Serialize)]
struct IngestReport {
    input_records: usize,
    resolved: usize,
    skipped: usize,
    by_question_class: BTreeMap<QuestionClass, usize>,
    skips: Vec<Skip>,
}

fn candidate_sets(index: &GazetteerIndex, spans: &[String], ids: Option<&Vec<u64>>) -> std::result::Result<Vec<CandidateSet>, String> {
    if let Some(ids) = ids {
        if ids.len() != spans.len() {
            return Err(format!("{} spans but {} geonames ids", spans.len(), ids.len()));
        }
        return spans
            .iter()
            .zip(ids)
            .map(|(s, id)| {
                let e = index
                    .by_geonames_id(*id)
                    .ok_or_else(|| format!("geonames id {id} not in gazetteer"))?;
                Ok(CandidateSet {
                    phrase: s.clone(),
                    candidates: vec![e.clone()],
                })
            })
            .collect();
    }
    spans
        .iter()
        .map(|s| index.lookup_phrase(s).ok_or_else(|| format!("no gazetteer match for {s:?}")))
        .collect()
}

fn resolve(index: &GazetteerIndex, rec: &CorpusRecord) -> std::result::Result<QARecord, String> {
    let mut sets = candidate_sets(index, &rec.q_spans, rec.q_geonames_ids.as_ref())?;
    let nq = sets.len();
    sets.extend(candidate_sets(index, &rec.a_spans, rec.a_geonames_ids.as_ref())?);
    if nq == 0 || sets.len() == nq {
        return Err("question and answer both need at least one span".into());
    }
    let combo = disambiguate(&sets, DEFAULT_COMBINATION_CAP).map_err(|e| e.to_string())?;
    let mut choices = combo.choices;
    let answer = choices.split_off(nq);
    QARecord::new(rec.id.clone(), choices, answer).map_err(|e| e.to_string())
}

pub fn ingest(ctx: &Ctx) -> Result<()> {
    let paths = &ctx.cfg.paths;
    ctx.cfg.require_inputs(&[&paths.corpus, &paths.gazetteer])?;
    let types = ctx.types()?;
    let index = GazetteerIndex::load(&paths.gazetteer, &types)?;
    let text = std::fs::read_to_string(&paths.corpus)
        .with_context(|| format!("cannot read {}", paths.corpus.display()))?;

    let mut seen = HashSet::new();
    let mut resolved = Vec::new();
    let mut skips = Vec::new();
    let mut input_records = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        input_records += 1;
        let mut skip = |id: Option<String>, reason: String| {
            log::warn!("corpus line {}: skipped: {reason}", i + 1);
            skips.push(Skip { line: i + 1, id, reason });
        };
        let rec: CorpusRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                skip(None, format!("unparsable record: {e}"));
                continue;
            }
        };
        if !seen.insert(rec.id.clone()) {
            skip(Some(rec.id.clone()), "duplicate id".into());
            continue;
        }
        match resolve(&index, &rec) {
            Ok(r) => resolved.push(r),
            Err(reason) => skip(Some(rec.id.clone()), reason),
        }
    }

    let mut by_question_class = BTreeMap::new();
    for r in &resolved {
        *by_question_class.entry(r.q_class).or_insert(0) += 1;
    }
    let report = IngestReport {
        input_records,
        resolved: resolved.len(),
        skipped: skips.len(),
        by_question_class,
        skips,
    };
    let meta = ctx.meta("ingest");
    ctx.out.write_jsonl("resolved.jsonl", &meta, &resolved)?;
    ctx.out.write_json("ingest_report.json", &meta, "report", &report)?;
    println!("ingest: {} resolved, {} skipped", report.resolved, report.skipped);
    Ok(())
}

/// One encoded question/answer pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodedRow {
    pub id: String,
    pub q_class: QuestionClass,
    pub question: Vec<String>,
    pub answer: Vec<String>,
}

impl EncodedRow {
    fn pair(&self, class: GenericClass) -> Result<(GenericSequence, GenericSequence)> {
        Ok((
            GenericSequence::new(class, self.question.clone())?,
            GenericSequence::new(class, self.answer.clone())?,
        ))
    }
}

fn class_file(class: GenericClass) -> &'static str {
    match class {
        GenericClass::Type => "type",
        GenericClass::Scale => "scale",
        GenericClass::Prominence => "prominence",
        GenericClass::TspCombined => "tsp",
    }
}

pub fn encode(ctx: &Ctx) -> Result<()> {
    let records = ctx.resolved()?;
    let mut seen = HashSet::new();
    let importances: Vec<f64> = records
        .iter()
        .flat_map(|r| r.q_toponyms.iter().chain(&r.a_toponyms))
        .filter(|e| seen.insert(e.geonames_id))
        .filter_map(|e| e.importance)
        .collect();
    let breaks = fit_prominence_breaks(&importances, PROMINENCE_CLASSES)
        .map_err(|e| DataError(format!("cannot fit prominence breaks over {} places: {e}", importances.len())))?;
    let meta = ctx.meta("encode");
    ctx.out.write_json("breaks.json", &meta, "breaks", &breaks)?;

    let mut counts = BTreeMap::new();
    for class in SINGLE {
        let mut rows = Vec::new();
        for r in &records {
            if let Some((q, a)) = encode_record(r, &breaks, class)? {
                rows.push(EncodedRow {
                    id: r.id.clone(),
                    q_class: r.q_class,
                    question: q.items,
                    answer: a.items,
                });
            }
        }
        counts.insert(class_file(class), rows.len());
        ctx.out.write_jsonl(&format!("encoded/{}.jsonl", class_file(class)), &meta, &rows)?;
    }

    let triples: Vec<(&QARecord, _)> = records
        .iter()
        .map(|r| Ok((r, encode_tsp(r, &breaks)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter_map(|(r, t)| t.map(|t| (r, t)))
        .collect();
    let book = CombinedCodebook::build(triples.iter().flat_map(|(_, (q, a))| q.iter().chain(a)));
    let rows = triples
        .iter()
        .map(|(r, (q, a))| {
            Ok(EncodedRow {
                id: r.id.clone(),
                q_class: r.q_class,
                question: book.encode_sequence(q)?.items,
                answer: book.encode_sequence(a)?.items,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    counts.insert("tsp", rows.len());
    let book_json: Value = serde_json::from_str(&book.to_json())?;
    ctx.out.write_json("encoded/tsp_codebook.json", &meta, "codebook", &book_json)?;
    ctx.out.write_jsonl("encoded/tsp.jsonl", &meta, &rows)?;
    ctx.out.write_json("encoded/summary.json", &meta, "records", &counts)?;
    println!(
        "encode: {} records; type {}, scale {}, prominence {}, tsp {} ({} codes)",
        records.len(),
        counts["type"],
        counts["scale"],
        counts["prominence"],
        counts["tsp"],
        book.len()
    );
    Ok(())
}

fn encoded(ctx: &Ctx, class: GenericClass) -> Result<Vec<(GenericSequence, GenericSequence)>> {
    let p = ctx.out.upstream(&format!("encoded/{}.jsonl", class_file(class)), "encode")?;
    read_jsonl::<EncodedRow>(&p)?.iter().map(|r| r.pair(class)).collect()
}

pub fn mine(ctx: &Ctx) -> Result<()> {
    let m = &ctx.cfg.mining;
    let meta = ctx.meta("mine");
    let mut total = 0;
    for class in SINGLE {
        let pairs = encoded(ctx, class)?;
        let (swq, dwq) = split_by_question_class(&pairs);
        for (label, subset) in [("all", &pairs), ("swq", &swq), ("dwq", &dwq)] {
            let rules = if subset.is_empty() {
                Vec::new()
            } else {
                let tx = build_transactions(subset, class)?;
                let mined: Vec<_> = mine_rules(&tx, m.min_support, m.min_confidence, m.max_items)?
                    .into_iter()
                    .filter(|r| m.view.keeps(r))
                    .collect();
                rank_rules(&mined, m.rank_by, m.top_n.unwrap_or(mined.len()))
            };
            total += rules.len();
            let mut body = Vec::new();
            write_rules_csv(&mut body, &rules)?;
            ctx.out.write_csv(&format!("rules/{}_{label}.csv", class_file(class)), &meta, body)?;
        }
    }
    println!("mine: {total} rules written");
    Ok(())
}

fn model_file(class: GenericClass, method: Method) -> String {
    format!("models/{}_{}.json", class_file(class), method.name().to_ascii_lowercase())
}

fn codebook(ctx: &Ctx, types: &TypeSchema) -> Result<CombinedCodebook> {
    let v: Value = read_json(&ctx.out.upstream("encoded/tsp_codebook.json", "encode")?, "codebook")?;
    Ok(CombinedCodebook::from_json(&v.to_string(), types)?)
}

pub fn train_models(ctx: &Ctx) -> Result<()> {
    let types = ctx.types()?;
    let meta = ctx.meta("train");
    let params = &ctx.cfg.predictor.params;
    let mut written = 0;
    let mut jobs: Vec<(GenericClass, Vocabulary)> = SINGLE
        .iter()
        .map(|&c| Ok((c, Vocabulary::for_class(c, &types)?)))
        .collect::<Result<_>>()?;
    jobs.push((GenericClass::TspCombined, Vocabulary::for_codebook(&codebook(ctx, &types)?)));
    for (class, vocab) in jobs {
        let pairs = encoded(ctx, class)?;
        if pairs.is_empty() {
            log::warn!("no {class} pairs; skipping its models");
            continue;
        }
        for &method in &ctx.cfg.predictor.methods {
            let model = train(method, vocab.clone(), &pairs, params.clone(), ctx.cfg.seed)?;
            let v: Value = serde_json::from_str(&model.to_json())?;
            ctx.out.write_json(&model_file(class, method), &meta, "model", &v)?;
            written += 1;
        }
    }
    println!("train: {written} models written");
    Ok(())
}

pub fn eval(ctx: &Ctx) -> Result<()> {
    let types = ctx.types()?;
    let breaks = ctx.breaks()?;
    let records = ctx
        .resolved()?
        .iter()
        .map(|r| EvalRecord::from_record(r, &breaks))
        .collect::<geotemplate::Result<Vec<_>>>()?;
    let config = EvalConfig {
        methods: ctx.cfg.predictor.methods.clone(),
        scenarios: Scenario::ALL.to_vec(),
        k_folds: ctx.cfg.k_folds,
        seed: ctx.cfg.seed,
        k_max: ctx.cfg.k_max,
        params: ctx.cfg.predictor.params.clone(),
    };
    let report = evaluate(&records, &types, &config)?;
    let meta = ctx.meta("eval");
    let v: Value = serde_json::from_str(&report.to_json())?;
    ctx.out.write_json("eval/report.json", &meta, "report", &v)?;
    for class in SINGLE {
        let mut body = Vec::new();
        write_accuracy_csv(&mut body, &report, class)?;
        ctx.out.write_csv(&format!("eval/accuracy_{}.csv", class_file(class)), &meta, body)?;
    }
    let mut body = Vec::new();
    write_rmse_csv(&mut body, &report)?;
    ctx.out.write_csv("eval/rmse.csv", &meta, body)?;
    let mut body = Vec::new();
    write_baseline_csv(&mut body, &report)?;
    ctx.out.write_csv("eval/baseline.csv", &meta, body)?;
    println!(
        "eval: {} records, {} folds, {} cells",
        records.len(),
        report.k_folds,
        report.cells.len()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct SparqlEntry {
    id: String,
    dialect: String,
    answer_types: Vec<String>,
    query: Option<String>,
    status: String,
    rows: Option<usize>,
}

pub fn sparql(ctx: &Ctx, execute: bool) -> Result<()> {
    let types = ctx.types()?;
    ctx.cfg.require_inputs(&[&ctx.cfg.paths.class_map])?;
    let map = ClassMap::load(&ctx.cfg.paths.class_map)?.with_geonames_schema(&types);
    let s = &ctx.cfg.sparql;
    let model_path = ctx.out.upstream(&model_file(GenericClass::Type, s.method), "train")?;
    let v: Value = read_json(&model_path, "model")?;
    let model = PredictorModel::from_json(&v.to_string())?;
    let records = ctx.resolved()?;
    let meta = ctx.meta("sparql");

    let transports: BTreeMap<_, Box<dyn Transport>> = if !execute {
        BTreeMap::new()
    } else if let Some(f) = &ctx.cfg.endpoint.fixtures {
        let t = FixtureTransport::load(f)?;
        s.dialects.iter().map(|&d| (d, Box::new(t.clone()) as Box<dyn Transport>)).collect()
    } else {
        let timeout = Duration::from_secs(ctx.cfg.endpoint.timeout_secs);
        s.dialects
            .iter()
            .filter_map(|&d| ctx.cfg.endpoint.url(d).map(|u| (d, u)))
            .map(|(d, u)| Ok((d, Box::new(HttpTransport::new(u, timeout)?) as Box<dyn Transport>)))
            .collect::<Result<_>>()?
    };

    let mut entries = Vec::new();
    for r in &records {
        let question = GenericSequence::new(GenericClass::Type, r.q_toponyms.iter().map(|e| e.feature_code.code().to_string()))?;
        let prediction = model.predict_topk(&question, 1)?;
        let Some(best) = prediction.candidates.first() else {
            continue;
        };
        let answer_types = best
            .items
            .iter()
            .map(|c| types.get(c).ok_or_else(|| DataError(format!("predicted unknown type {c}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for &dialect in &s.dialects {
            let uris = r
                .q_toponyms
                .iter()
                .map(|e| match dialect {
                    geotemplate::sparql::Dialect::Dbpedia => dialect.resource_uri(&e.name),
                    geotemplate::sparql::Dialect::Geonames => dialect.resource_uri(&e.geonames_id.to_string()),
                })
                .collect();
            let plan = QueryPlan::new(dialect, uris, answer_types.clone(), s.style);
            let mut entry = SparqlEntry {
                id: r.id.clone(),
                dialect: dialect.name().into(),
                answer_types: best.items.clone(),
                query: None,
                status: "built".into(),
                rows: None,
            };
            let q = match build_query(&plan, &map) {
                Ok(q) => q,
                Err(e @ geotemplate::Error::UnmappedType { .. }) => {
                    entry.status = format!("skipped: {e}");
                    entries.push(entry);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            validate_query(&q)?;
            let stem = format!("sparql/{}_{}", r.id, dialect.name().to_ascii_lowercase());
            let mut text = meta.comment();
            text.push_str(&q);
            ctx.out.write_text(&format!("{stem}.rq"), &text)?;
            entry.query = Some(format!("{stem}.rq"));
            if let Some(t) = transports.get(&dialect) {
                match execute_query(t.as_ref(), &q, &ctx.cfg.endpoint.retry) {
                    Ok(results) => {
                        entry.status = "executed".into();
                        entry.rows = Some(results.rows.len());
                        ctx.out.write_json(&format!("{stem}.json"), &meta, "results", &results)?;
                    }
                    Err(geotemplate::Error::FixtureMissing) => {
                        log::info!("{} {}: no recorded response", r.id, dialect);
                        entry.status = "no fixture".into();
                    }
                    Err(e) => {
                        log::warn!("{} {}: {e}", r.id, dialect);
                        entry.status = format!("failed: {e}");
                    }
                }
            }
            entries.push(entry);
        }
    }
    ctx.out.write_json("sparql/index.json", &meta, "queries", &entries)?;
    let built = entries.iter().filter(|e| e.query.is_some()).count();
    println!("sparql: {built} queries written, {} skipped", entries.len() - built);
    Ok(())
}

/// Builds the query for one plan file and prints it.
pub fn sparql_plan(cfg: Option<&PipelineConfig>, plan_path: &std::path::Path, class_map: Option<&std::path::Path>) -> Result<()> {
    let text = std::fs::read_to_string(plan_path).with_context(|| format!("cannot read {}", plan_path.display()))?;
    let plan: QueryPlan = serde_json::from_str(&text).map_err(|e| DataError(format!("{}: {e}", plan_path.display())))?;
    let map_path = class_map
        .map(|p| p.to_path_buf())
        .or_else(|| cfg.map(|c| c.paths.class_map.clone()))
        .ok_or_else(|| crate::UsageError("--plan needs --class-map or a config".into()))?;
    let mut map = ClassMap::load(&map_path)?;
    if let Some(c) = cfg {
        map = map.with_geonames_schema(&TypeSchema::load(&c.paths.type_schema)?);
    }
    let q = build_query(&plan, &map)?;
    validate_query(&q)?;
    print!("{q}");
    Ok(())
}
