//! Brute-force oracles and corpus generators shared by the property and
//! acceptance tests. Nothing here calls into the code under test except
//! plain data constructors.
#![allow(dead_code)]

pub mod listings;

use std::collections::{BTreeMap, BTreeSet};

use geotemplate::model::{BBox, FeatureClass, GazetteerEntry, PlaceTypeCode, Point, QARecord, TypeSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---- Jenks ----

fn ssq(group: &[f64]) -> f64 {
    if group.is_empty() {
        return 0.0;
    }
    let mean = group.iter().sum::<f64>() / group.len() as f64;
    group.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Smallest within-class SSQ over every split of the sorted distinct values
/// into `classes` contiguous nonempty runs. Equal values always share a class.
pub fn jenks_min_ssq(values: &[f64], classes: usize) -> Option<f64> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let d = distinct.len();
    if d < classes {
        return None;
    }
    let mut best = f64::INFINITY;
    // cuts[i] = index of the first distinct value of run i+1
    let mut cuts: Vec<usize> = (1..classes).collect();
    loop {
        let mut bounds = vec![0];
        bounds.extend(&cuts);
        bounds.push(d);
        let total: f64 = bounds
            .windows(2)
            .map(|w| {
                let (lo, hi) = (distinct[w[0]], distinct[w[1] - 1]);
                let g: Vec<f64> = values.iter().copied().filter(|&v| v >= lo && v <= hi).collect();
                ssq(&g)
            })
            .sum();
        best = best.min(total);
        // next combination of classes-1 cut points out of 1..d
        let m = cuts.len();
        let mut i = m;
        loop {
            if i == 0 {
                return Some(best);
            }
            i -= 1;
            if cuts[i] < d - (m - i) {
                cuts[i] += 1;
                for j in i + 1..m {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
        if m == 0 {
            return Some(best);
        }
    }
}

/// SSQ of `values` grouped by explicit upper-exclusive boundaries.
pub fn ssq_under_boundaries(values: &[f64], boundaries: &[f64]) -> f64 {
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); boundaries.len() + 1];
    for &v in values {
        let c = boundaries.iter().filter(|&&b| b <= v).count();
        groups[c].push(v);
    }
    groups.iter().map(|g| ssq(g)).sum()
}

// ---- Apriori ----

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRule {
    pub frequency: usize,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
}

const EPS: f64 = 1e-12;

/// Every rule over every subset of the item universe, by direct counting.
pub fn brute_rules(
    transactions: &[BTreeSet<String>],
    min_support: f64,
    min_confidence: f64,
    max_items: usize,
) -> BTreeMap<(Vec<String>, Vec<String>), OracleRule> {
    let universe: Vec<String> = transactions.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = transactions.len() as f64;
    let count = |set: &[String]| transactions.iter().filter(|t| set.iter().all(|i| t.contains(i))).count();
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << universe.len()) {
        let set: Vec<String> = (0..universe.len()).filter(|&i| mask & (1 << i) != 0).map(|i| universe[i].clone()).collect();
        if set.len() < 2 || set.len() > max_items {
            continue;
        }
        let c = count(&set);
        if (c as f64) / n + EPS < min_support {
            continue;
        }
        for sub in 1u32..(1 << set.len()) - 1 {
            let (mut ante, mut cons) = (Vec::new(), Vec::new());
            for (j, item) in set.iter().enumerate() {
                if sub & (1 << j) != 0 {
                    ante.push(item.clone());
                } else {
                    cons.push(item.clone());
                }
            }
            let confidence = c as f64 / count(&ante) as f64;
            if confidence + EPS < min_confidence {
                continue;
            }
            let cons_support = count(&cons) as f64 / n;
            out.insert(
                (ante, cons),
                OracleRule {
                    frequency: c,
                    support: c as f64 / n,
                    confidence,
                    lift: confidence / cons_support,
                },
            );
        }
    }
    out
}

// ---- disambiguation ----

fn union_area(choice: &[&GazetteerEntry]) -> f64 {
    let min_lat = choice.iter().map(|e| e.bbox.min_lat).fold(f64::INFINITY, f64::min);
    let min_lon = choice.iter().map(|e| e.bbox.min_lon).fold(f64::INFINITY, f64::min);
    let max_lat = choice.iter().map(|e| e.bbox.max_lat).fold(f64::NEG_INFINITY, f64::max);
    let max_lon = choice.iter().map(|e| e.bbox.max_lon).fold(f64::NEG_INFINITY, f64::max);
    (max_lat - min_lat) * (max_lon - min_lon)
}

/// Geonames ids of the best combination in the full Cartesian product,
/// sorted by (area, -admin, populated, -importance, ids).
pub fn brute_disambiguate(sets: &[Vec<GazetteerEntry>]) -> Vec<u64> {
    let mut combos: Vec<Vec<&GazetteerEntry>> = vec![Vec::new()];
    for s in sets {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                s.iter().map(move |e| {
                    let mut c = c.clone();
                    c.push(e);
                    c
                })
            })
            .collect();
    }
    combos.sort_by(|a, b| {
        let admin = |c: &[&GazetteerEntry]| c.iter().filter(|e| e.feature_code.class() == FeatureClass::A).count();
        let ppl = |c: &[&GazetteerEntry]| c.iter().filter(|e| e.feature_code.class() == FeatureClass::P).count();
        let imp = |c: &[&GazetteerEntry]| c.iter().map(|e| e.importance.unwrap_or(0.0)).sum::<f64>();
        let ids = |c: &[&GazetteerEntry]| c.iter().map(|e| e.geonames_id).collect::<Vec<_>>();
        union_area(a)
            .total_cmp(&union_area(b))
            .then(admin(b).cmp(&admin(a)))
            .then(ppl(a).cmp(&ppl(b)))
            .then(imp(b).total_cmp(&imp(a)))
            .then(ids(a).cmp(&ids(b)))
    });
    combos[0].iter().map(|e| e.geonames_id).collect()
}

// ---- data builders ----

pub fn entry(id: u64, class: FeatureClass, code: &str, bbox: BBox, rank: Option<u8>, importance: Option<f64>) -> GazetteerEntry {
    GazetteerEntry {
        name: format!("place-{id}"),
        geonames_id: id,
        feature_code: PlaceTypeCode::new(class, code).unwrap(),
        point: Point {
            lat: (bbox.min_lat + bbox.max_lat) / 2.0,
            lon: (bbox.min_lon + bbox.max_lon) / 2.0,
        },
        bbox,
        place_rank: rank,
        importance,
    }
}

/// Twelve codes over six feature classes.
pub const SYNTH_SCHEMA: &str = "\
A ADM1
A ADM2
A PCLI
P PPL
P PPLC
H STM
H SEA
H LK
T MTS
T MT
S BDG
L PRK
";

pub fn synth_schema() -> TypeSchema {
    TypeSchema::parse(SYNTH_SCHEMA).unwrap()
}

fn synth_codes() -> Vec<(FeatureClass, String)> {
    SYNTH_SCHEMA
        .lines()
        .map(|l| {
            let (c, code) = l.split_once(' ').unwrap();
            (c.parse().unwrap(), code.to_string())
        })
        .collect()
}

/// Each code is one fixed place, so its scale and prominence are functions
/// of the type.
fn synth_place(i: usize) -> GazetteerEntry {
    let (class, code) = &synth_codes()[i];
    let rank = [8, 12, 4, 16, 16, 19, 2, 22, 10, 20, 30, 24][i];
    let lat = -60.0 + 10.0 * i as f64;
    entry(
        100 + i as u64,
        *class,
        code,
        BBox::new(lat, lat, lat + 1.0 + i as f64 / 10.0, lat + 1.0),
        Some(rank),
        Some(0.03 + 0.08 * i as f64),
    )
}

/// A random answer rule: each code maps to one to three codes, drawn with
/// repetition, so answers of different codes share symbols.
pub fn overlapping_rule(seed: u64) -> Vec<Vec<usize>> {
    let codes = synth_codes().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..codes)
        .map(|_| {
            let len = rng.gen_range(1..=3);
            (0..len).map(|_| rng.gen_range(0..codes)).collect()
        })
        .collect()
}

/// Answer templates over pairwise disjoint symbols, so every symbol has a
/// single successor inside any answer.
pub fn disjoint_rule() -> Vec<Vec<usize>> {
    let templates: [&[usize]; 8] = [&[0], &[1, 2], &[3], &[4, 5, 6], &[7], &[8, 9], &[10], &[11]];
    (0..synth_codes().len()).map(|i| templates[i % templates.len()].to_vec()).collect()
}

/// `n` records whose answer is a fixed function of the first question
/// toponym's type. Questions carry up to `max_extra` further random
/// toponyms; with probability `noise` the answer is replaced by a random one.
pub fn synthetic_records(n: usize, seed: u64, noise: f64, max_extra: usize) -> Vec<QARecord> {
    synthetic_records_with(&overlapping_rule(seed), n, seed, noise, max_extra)
}

pub fn synthetic_records_with(rule: &[Vec<usize>], n: usize, seed: u64, noise: f64, max_extra: usize) -> Vec<QARecord> {
    let codes = synth_codes().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let first = rng.gen_range(0..codes);
            let extra = rng.gen_range(0..=max_extra);
            let q: Vec<usize> = std::iter::once(first).chain((0..extra).map(|_| rng.gen_range(0..codes))).collect();
            let a: Vec<usize> = if rng.gen_bool(noise) {
                (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..codes)).collect()
            } else {
                rule[first].clone()
            };
            QARecord::new(
                format!("r{i:05}"),
                q.into_iter().map(synth_place).collect(),
                a.into_iter().map(synth_place).collect(),
            )
            .unwrap()
        })
        .collect()
}
