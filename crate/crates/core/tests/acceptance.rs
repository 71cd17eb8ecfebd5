//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use geotemplate::breaks::{fit_breaks, fit_prominence_breaks};
use geotemplate::encoder::{encode_record, encode_tsp, map_scale, CombinedCodebook};
use geotemplate::evaluator::{
    evaluate, rmse_table, score_content, score_style, write_accuracy_csv, write_baseline_csv, write_rmse_csv, Cell,
    EvalConfig, EvalRecord, EvalReport, Metric, QuestionFilter, RmseGroup, Scenario,
};
use geotemplate::miner::{build_transactions, mine_rules, write_rules_csv, Transaction, RULE_CSV_HEADER};
use geotemplate::model::{GenericClass, GenericSequence, QARecord};
use geotemplate::predictor::{decode_combined, predict_tsp_combined, train, Method, PredictorParams, Vocabulary};
use geotemplate::sparql::{build_query, canonicalize, execute_query, validate_query, FixtureTransport, RetryPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_scale_table() -> Outcome {
    // (first rank, last rank, level), coarse side inclusive
    const TABLE: [(u8, u8, u8); 8] = [(0, 3, 8), (4, 7, 7), (8, 11, 6), (12, 15, 5), (16, 17, 4), (18, 21, 3), (22, 26, 2), (27, 30, 1)];
    let start = Instant::now();
    let mut got = Vec::with_capacity(31);
    for rank in 0..=30u8 {
        got.push(map_scale(rank).map_err(|e| format!("rank {rank}: {e}"))?.get());
    }
    let elapsed = start.elapsed();
    for (rank, level) in got.iter().enumerate() {
        let want = TABLE.iter().find(|(lo, hi, _)| (*lo..=*hi).contains(&(rank as u8))).unwrap().2;
        ensure(*level == want, || format!("rank {rank}: got {level}, want {want}"))?;
    }
    ensure(map_scale(31).is_err(), || "rank 31 accepted".into())?;
    ensure(elapsed < Duration::from_millis(1), || format!("31 lookups took {elapsed:?}"))?;
    Ok(format!("31 ranks in {elapsed:?}"))
}

fn c2_jenks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 200 {
        let classes = rng.gen_range(2..=4);
        let len = rng.gen_range(classes..=12);
        // a coarse grid makes repeated values common
        let grid = if rng.gen_bool(0.5) { 10 } else { 1000 };
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(0..=grid) as f64 / grid as f64).collect();
        let Some(best) = common::jenks_min_ssq(&values, classes) else {
            ensure(fit_breaks(&values, classes).is_err(), || format!("{values:?}: fit with too few distinct values"))?;
            continue;
        };
        let fitted = fit_breaks(&values, classes).map_err(|e| format!("{values:?}/{classes}: {e}"))?;
        ensure(fitted.classes == classes, || format!("{values:?}: {} classes", fitted.classes))?;
        let got = common::ssq_under_boundaries(&values, &fitted.boundaries);
        worst = worst.max((got - best).abs());
        ensure((got - best).abs() <= 1e-9, || format!("{values:?}/{classes}: ssq {got} vs optimum {best}"))?;
        done += 1;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("200 arrays, max |diff| {worst:.1e}, {:?}", start.elapsed()))
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<BTreeSet<String>> {
    let n = rng.gen_range(1..=12);
    let universe = rng.gen_range(1..=8);
    (0..n)
        .map(|_| {
            let mut t: BTreeSet<String> = (0..universe).filter(|_| rng.gen_bool(0.45)).map(|i| format!("i{i}")).collect();
            if t.is_empty() {
                t.insert(format!("i{}", rng.gen_range(0..universe)));
            }
            t
        })
        .collect()
}

fn c3_apriori() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total_rules = 0;
    for round in 0..100 {
        let corpus = random_corpus(&mut rng);
        let min_support = rng.gen_range(0.05..0.5);
        let min_confidence = rng.gen_range(0.1..0.9);
        let max_items = rng.gen_range(2..=8);
        let tx: Vec<Transaction> = corpus.iter().map(|items| Transaction { items: items.clone() }).collect();
        let mined = mine_rules(&tx, min_support, min_confidence, max_items).map_err(|e| format!("round {round}: {e}"))?;
        let oracle = common::brute_rules(&corpus, min_support, min_confidence, max_items);
        let got: BTreeMap<(Vec<String>, Vec<String>), common::OracleRule> = mined
            .iter()
            .map(|r| {
                (
                    (r.antecedent.clone(), r.consequent.clone()),
                    common::OracleRule {
                        frequency: r.frequency,
                        support: r.support,
                        confidence: r.confidence,
                        lift: r.lift,
                    },
                )
            })
            .collect();
        ensure(got.len() == mined.len(), || format!("round {round}: duplicate rules"))?;
        ensure(got == oracle, || {
            let extra: Vec<_> = got.keys().filter(|k| !oracle.contains_key(*k)).collect();
            let missing: Vec<_> = oracle.keys().filter(|k| !got.contains_key(*k)).collect();
            format!("round {round}: extra {extra:?}, missing {missing:?}")
        })?;
        total_rules += mined.len();
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("100 corpora, {total_rules} rules, {:?}", start.elapsed()))
}

fn c4_lift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut corpora: Vec<Vec<BTreeSet<String>>> = (0..100).map(|_| random_corpus(&mut rng)).collect();
    // and the type encoding of the synthetic corpus
    let records = common::synthetic_records(300, 41, 0.3, 2);
    let breaks = synth_breaks(&records)?;
    let pairs: Vec<_> = records.iter().filter_map(|r| encode_record(r, &breaks, GenericClass::Type).unwrap()).collect();
    let tx = build_transactions(&pairs, GenericClass::Type).map_err(|e| e.to_string())?;
    corpora.push(tx.into_iter().map(|t| t.items).collect());

    let mut checked = 0;
    for (ci, corpus) in corpora.iter().enumerate() {
        let tx: Vec<Transaction> = corpus.iter().map(|items| Transaction { items: items.clone() }).collect();
        let rules = mine_rules(&tx, 0.02, 0.05, 4).map_err(|e| e.to_string())?;
        let n = corpus.len();
        let count = |set: &[String]| corpus.iter().filter(|t| set.iter().all(|i| t.contains(i))).count();
        for r in &rules {
            let joint = count(&[r.antecedent.clone(), r.consequent.clone()].concat());
            let (ca, cc) = (count(&r.antecedent), count(&r.consequent));
            let cons_support = cc as f64 / n as f64;
            ensure((r.lift - r.confidence / cons_support).abs() <= 1e-9, || {
                format!("corpus {ci}: {r}: lift {} vs confidence/support {}", r.lift, r.confidence / cons_support)
            })?;
            // joint support vs independence product, in integers
            let (lhs, rhs) = (joint * n, ca * cc);
            let ok = match lhs.cmp(&rhs) {
                std::cmp::Ordering::Greater => r.lift > 1.0 + 1e-9,
                std::cmp::Ordering::Less => r.lift < 1.0 - 1e-9,
                std::cmp::Ordering::Equal => (r.lift - 1.0).abs() <= 1e-9,
            };
            ensure(ok, || format!("corpus {ci}: {r}: lift {} but joint*n={lhs}, product={rhs}", r.lift))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} rules over {} corpora", corpora.len()))
}

fn synth_breaks(records: &[QARecord]) -> Result<geotemplate::breaks::ProminenceBreaks, String> {
    let imps: Vec<f64> = records
        .iter()
        .flat_map(|r| r.q_toponyms.iter().chain(&r.a_toponyms))
        .filter_map(|e| e.importance)
        .collect();
    fit_prominence_breaks(&imps, 7).map_err(|e| e.to_string())
}

fn eval_records(records: &[QARecord]) -> Result<Vec<EvalRecord>, String> {
    let breaks = synth_breaks(records)?;
    records.iter().map(|r| EvalRecord::from_record(r, &breaks).map_err(|e| e.to_string())).collect()
}

fn recovery_report(rule: &[Vec<usize>], max_extra: usize) -> Result<EvalReport, String> {
    let types = common::synth_schema();
    ensure(types.len() >= 10, || format!("schema has {} symbols", types.len()))?;
    let records = eval_records(&common::synthetic_records_with(rule, 1000, 5, 0.0, max_extra))?;
    let config = EvalConfig {
        methods: Method::ALL.to_vec(),
        scenarios: vec![Scenario::TypeToType],
        k_folds: 10,
        seed: 5,
        k_max: 1,
        params: PredictorParams::default(),
    };
    evaluate(&records, &types, &config).map_err(|e| e.to_string())
}

fn recovery_accuracy(report: &EvalReport, m: Method) -> f64 {
    report
        .accuracy(Scenario::TypeToType, QuestionFilter::All, m, 1, Metric::ContentAndStyle)
        .unwrap_or(f64::NAN)
}

fn c5_recovery() -> Outcome {
    let start = Instant::now();
    // one-toponym questions and answer templates over disjoint symbols
    let report = recovery_report(&common::disjoint_rule(), 0)?;
    let acc = |m| recovery_accuracy(&report, m);
    for m in Method::SEQUENCE {
        ensure(acc(m) == 1.0, || format!("{m} scored {:.4}", acc(m)))?;
    }
    let random = acc(Method::Random);
    ensure(random <= 0.05, || format!("RANDOM scored {random:.4}"))?;
    println!(
        "info criterion 5: FREQUENT baseline {:.1}% (answer-independent, excluded from the 100% check)",
        100.0 * acc(Method::Frequent)
    );
    within(start, Duration::from_secs(60))?;
    Ok(format!("7 sequence methods 100%, RANDOM {:.1}%, {:?}", 100.0 * random, start.elapsed()))
}

/// Harder variants that first-order and fixed-context methods cannot solve
/// in general; reported, not asserted.
fn c5_variant_info() {
    let variants = [
        ("answers sharing symbols", common::overlapping_rule(5), 0),
        ("random trailing toponyms", common::disjoint_rule(), 2),
    ];
    for (label, rule, extra) in variants {
        match recovery_report(&rule, extra) {
            Ok(report) => {
                let parts: Vec<String> = Method::ALL
                    .iter()
                    .map(|&m| format!("{m} {:.1}%", 100.0 * recovery_accuracy(&report, m)))
                    .collect();
                println!("info criterion 5, {label}: {}", parts.join(", "));
            }
            Err(e) => println!("info criterion 5, {label}: evaluation failed: {e}"),
        }
    }
}

fn noisy_report() -> Result<EvalReport, String> {
    let types = common::synth_schema();
    let records = eval_records(&common::synthetic_records(300, 6, 0.35, 2))?;
    let config = EvalConfig {
        seed: 6,
        ..EvalConfig::default()
    };
    let report = evaluate(&records, &types, &config).map_err(|e| e.to_string())?;
    Ok(report)
}

fn c6_scoring(report: &EvalReport) -> Outcome {
    let seq = |items: &[&str]| GenericSequence::new(GenericClass::Type, items.iter().copied()).unwrap();
    let (city_river, river_city) = (seq(&["PPL", "STM"]), seq(&["STM", "PPL"]));
    ensure(matches!(score_content(&city_river, &river_city), Ok(true)), || "content of swapped pair not a hit".into())?;
    ensure(matches!(score_style(&city_river, &river_city), Ok(false)), || "style of swapped pair is a hit".into())?;

    let mut by_key: BTreeMap<(Scenario, QuestionFilter, Method, usize), BTreeMap<Metric, &Cell>> = BTreeMap::new();
    for c in &report.cells {
        by_key.entry((c.scenario, c.question_class, c.method, c.k)).or_default().insert(c.metric, c);
    }
    let mut checked = 0;
    for (key, cells) in &by_key {
        let (content, style) = (cells[&Metric::Content], cells[&Metric::ContentAndStyle]);
        ensure(content.hits >= style.hits && content.total == style.total, || format!("{key:?}: content below style"))?;
        checked += 1;
    }
    for c in &report.cells {
        if c.k == 1 {
            continue;
        }
        let prev = report.cell(c.scenario, c.question_class, c.method, c.k - 1, c.metric).unwrap();
        ensure(c.hits >= prev.hits, || format!("{c:?}: fewer hits than at k-1"))?;
    }
    ensure(checked > 0, || "empty report".into())?;
    Ok(format!("{} cells, {checked} content/style pairs", report.cells.len()))
}

fn c7_round_trip() -> Outcome {
    let records = common::synthetic_records(1000, 5, 0.0, 2);
    let breaks = synth_breaks(&records)?;
    let tsp: Vec<_> = records.iter().filter_map(|r| encode_tsp(r, &breaks).unwrap()).collect();
    ensure(tsp.len() == records.len(), || "synthetic records not fully encodable".into())?;
    let book = CombinedCodebook::build(tsp.iter().flat_map(|(q, a)| q.iter().chain(a)));
    let mut answers = 0;
    for (r, (_, a)) in records.iter().zip(&tsp) {
        let codes = book.encode_sequence(a).map_err(|e| e.to_string())?;
        for class in [GenericClass::Type, GenericClass::Scale, GenericClass::Prominence] {
            let want = encode_record(r, &breaks, class).unwrap().unwrap().1;
            let got = book.decode_sequence(&codes, class).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("{}: {class} decoded {got}, encoded {want}", r.id))?;
        }
        answers += 1;
    }

    // a noisy corpus where many codes collapse onto one projection
    let noisy = common::synthetic_records(400, 7, 0.5, 2);
    let nb = synth_breaks(&noisy)?;
    let ntsp: Vec<_> = noisy.iter().filter_map(|r| encode_tsp(r, &nb).unwrap()).collect();
    let nbook = CombinedCodebook::build(ntsp.iter().flat_map(|(q, a)| q.iter().chain(a)));
    let pairs: Vec<_> = ntsp
        .iter()
        .map(|(q, a)| (nbook.encode_sequence(q).unwrap(), nbook.encode_sequence(a).unwrap()))
        .collect();
    let mut collapsed = 0;
    for method in [Method::Akom, Method::Cpt] {
        let model = train(method, Vocabulary::for_codebook(&nbook), &pairs, PredictorParams::default(), 7).map_err(|e| e.to_string())?;
        for (q, _) in ntsp.iter().take(60) {
            let raw = model.predict_topk(&nbook.encode_sequence(q).unwrap(), 5).map_err(|e| e.to_string())?;
            for target in [GenericClass::Type, GenericClass::Scale, GenericClass::Prominence] {
                let decoded = decode_combined(&nbook, &raw, target).map_err(|e| e.to_string())?;
                let distinct: BTreeSet<GenericSequence> = raw
                    .candidates
                    .iter()
                    .map(|c| nbook.decode_sequence(c, target).unwrap())
                    .collect();
                ensure(decoded.candidates.len() == distinct.len(), || {
                    format!("{method}/{target}: {} candidates, {} distinct", decoded.candidates.len(), distinct.len())
                })?;
                ensure(decoded.candidates.len() <= 5, || "more than k candidates".into())?;
                let direct = predict_tsp_combined(&model, &nbook, q, target, 5).map_err(|e| e.to_string())?;
                ensure(direct == decoded, || format!("{method}/{target}: combined prediction differs"))?;
                collapsed += raw.candidates.len() - decoded.candidates.len();
            }
        }
    }
    ensure(collapsed > 0, || "no duplicate decodings were exercised".into())?;
    Ok(format!("{answers} answers round-trip, {collapsed} duplicate decodings collapsed"))
}

fn cell(method: Method, hits: usize, total: usize) -> Cell {
    Cell {
        scenario: Scenario::TypeToType,
        question_class: QuestionFilter::All,
        method,
        k: 1,
        metric: Metric::Content,
        hits,
        total,
        accuracy: Some(hits as f64 / total as f64),
    }
}

fn c8_rmse(report: &EvalReport) -> Outcome {
    // hand case: one cell, LZ78 at 0.8 and MARK1 at 0.5
    let hand = EvalReport {
        k_folds: 2,
        seed: 0,
        k_max: 1,
        methods: vec![Method::Lz78, Method::Mark1],
        scenarios: vec![Scenario::TypeToType],
        corpus_sizes: BTreeMap::new(),
        cells: vec![cell(Method::Lz78, 4, 5), cell(Method::Mark1, 1, 2)],
        fallbacks: Vec::new(),
        rmse: Vec::new(),
        baseline_delta: Vec::new(),
    };
    let rows = rmse_table(&hand).map_err(|e| e.to_string())?;
    let get = |m, g| rows.iter().find(|r| r.method == m && r.group == g).map(|r| r.rmse);
    for g in [RmseGroup::Type, RmseGroup::Content] {
        ensure(get(Method::Lz78, g) == Some(0.0), || format!("LZ78 {g:?}: {:?}", get(Method::Lz78, g)))?;
        let m = get(Method::Mark1, g).ok_or("MARK1 row missing")?;
        ensure((m - 0.3).abs() <= 1e-12, || format!("MARK1 {g:?}: {m}"))?;
    }
    ensure(rows.len() == 4, || format!("{} rows, want 4", rows.len()))?;

    // lift LZ78 to the per-cell best everywhere
    let mut top = report.clone();
    let mut best: BTreeMap<(Scenario, QuestionFilter, usize, Metric), (usize, usize)> = BTreeMap::new();
    for c in top.cells.iter().filter(|c| Method::SEQUENCE.contains(&c.method) && c.total > 0) {
        let e = best.entry((c.scenario, c.question_class, c.k, c.metric)).or_insert((c.hits, c.total));
        if c.hits * e.1 > e.0 * c.total {
            *e = (c.hits, c.total);
        }
    }
    for c in top.cells.iter_mut().filter(|c| c.method == Method::Lz78 && c.total > 0) {
        let (h, t) = best[&(c.scenario, c.question_class, c.k, c.metric)];
        c.hits = h;
        c.total = t;
        c.accuracy = Some(h as f64 / t as f64);
    }
    let rows = rmse_table(&top).map_err(|e| e.to_string())?;
    for g in RmseGroup::ALL {
        let v = rows.iter().find(|r| r.method == Method::Lz78 && r.group == g).map(|r| r.rmse);
        ensure(v == Some(0.0), || format!("best-everywhere LZ78 {g:?}: {v:?}"))?;
    }
    Ok("hand case 0.3 to 1e-12; best-everywhere RMSE 0 in all 5 groups".into())
}

fn c9_sparql() -> Outcome {
    let map = common::listings::class_map();
    let mut n = 0;
    for (name, plan) in common::listings::plans() {
        let q = build_query(&plan, &map).map_err(|e| format!("{name}: {e}"))?;
        let golden = common::listings::read(&format!("sparql/golden/{name}.rq"));
        ensure(q == golden, || format!("{name}: built query differs from golden"))?;
        validate_query(&q).map_err(|e| format!("{name}: {e}"))?;
        let listing = canonicalize(&common::listings::read(&format!("sparql/listings/{name}.rq")));
        let differing: Vec<(&str, &str)> = listing.lines().zip(q.lines()).filter(|(a, b)| a != b).collect();
        let ok = if name == "ex4_geonames" {
            // the printed listing leaves ?a3 out of the projection
            differing == [("SELECT distinct ?q1 ?a1 ?a2 WHERE {", "SELECT distinct ?q1 ?a1 ?a2 ?a3 WHERE {")]
        } else {
            listing == q
        };
        ensure(ok, || format!("{name}: canonical listing differs: {differing:?}"))?;
        n += 1;
    }
    let transport = FixtureTransport::load(common::listings::data("sparql/fixtures/putney_dbpedia.json")).map_err(|e| e.to_string())?;
    let (_, putney) = common::listings::plans().into_iter().next().unwrap();
    let results = execute_query(&transport, &build_query(&putney, &map).unwrap(), &RetryPolicy::default()).map_err(|e| e.to_string())?;
    let all: Vec<String> = results.rows.iter().flat_map(|r| r.values().map(|t| t.value.clone())).collect();
    for want in ["http://dbpedia.org/resource/London", "http://dbpedia.org/resource/River_Thames"] {
        ensure(all.iter().any(|v| v == want), || format!("fixture bindings lack {want}"))?;
    }
    Ok(format!("{n} listings, fixture bindings contain London and River_Thames"))
}

fn header(csv: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(csv).lines().next().unwrap_or("").split(',').map(str::to_string).collect()
}

fn c10_report_shapes(report: &EvalReport) -> Outcome {
    println!(
        "info criterion 10: reference accuracy and rule tables need MS MARCO, full gazetteer snapshots and an NER \
         stack; they are not reproduced here. Reports below are checked for shape only."
    );
    for target in [GenericClass::Type, GenericClass::Scale, GenericClass::Prominence] {
        let mut buf = Vec::new();
        write_accuracy_csv(&mut buf, report, target).map_err(|e| e.to_string())?;
        let h = header(&buf);
        ensure(
            h == ["method", "question_class", "k", "same_class_content", "same_class_content_and_style", "tsp_content", "tsp_content_and_style"],
            || format!("{target} accuracy header {h:?}"),
        )?;
        let rows = String::from_utf8_lossy(&buf).lines().count() - 1;
        let want = report.methods.len() * QuestionFilter::ALL.len() * report.k_max;
        ensure(rows == want, || format!("{target}: {rows} rows, want {want}"))?;
    }
    let mut buf = Vec::new();
    write_rmse_csv(&mut buf, report).map_err(|e| e.to_string())?;
    ensure(header(&buf) == ["method", "TYPE", "SCALE", "PROMINENCE", "CONTENT", "CONTENT_AND_STYLE"], || format!("rmse header {:?}", header(&buf)))?;
    ensure(String::from_utf8_lossy(&buf).lines().count() == 8, || "rmse table needs 7 method rows".into())?;
    let mut buf = Vec::new();
    write_baseline_csv(&mut buf, report).map_err(|e| e.to_string())?;
    ensure(header(&buf)[0] == "scenario", || "baseline header".into())?;
    ensure(String::from_utf8_lossy(&buf).lines().count() == 1 + 2 * (Scenario::ALL.len() + 1), || "baseline rows".into())?;

    let records = common::synthetic_records(300, 6, 0.35, 2);
    let breaks = synth_breaks(&records)?;
    let pairs: Vec<_> = records.iter().filter_map(|r| encode_record(r, &breaks, GenericClass::Type).unwrap()).collect();
    let rules = mine_rules(&build_transactions(&pairs, GenericClass::Type).unwrap(), 0.04, 0.5, 4).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_rules_csv(&mut buf, &rules).map_err(|e| e.to_string())?;
    ensure(header(&buf) == RULE_CSV_HEADER, || "rules header".into())?;
    ensure(!rules.is_empty(), || "no rules mined".into())?;
    Ok("accuracy, RMSE, baseline and rule tables have the expected layouts".into())
}

fn main() {
    let mut failed = 0;
    let mut report_line = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS criterion {n:>2} {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL criterion {n:>2} {name}: {why}")
        }
    };
    report_line(1, "scale lookup", c1_scale_table());
    report_line(2, "jenks oracle", c2_jenks());
    report_line(3, "apriori oracle", c3_apriori());
    report_line(4, "lift identity", c4_lift());
    report_line(5, "predictor recovery", c5_recovery());
    c5_variant_info();
    match noisy_report() {
        Ok(report) => {
            report_line(6, "scoring semantics", c6_scoring(&report));
            report_line(7, "combined round-trip", c7_round_trip());
            report_line(8, "rmse semantics", c8_rmse(&report));
            report_line(9, "sparql goldens", c9_sparql());
            report_line(10, "report shapes", c10_report_shapes(&report));
        }
        Err(e) => {
            for (n, name) in [(6, "scoring semantics"), (8, "rmse semantics"), (10, "report shapes")] {
                report_line(n, name, Err(format!("evaluation failed: {e}")));
            }
            report_line(7, "combined round-trip", c7_round_trip());
            report_line(9, "sparql goldens", c9_sparql());
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
