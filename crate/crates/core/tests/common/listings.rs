//! Query plans for the bundled SPARQL listings, plus data-file helpers.

use std::path::PathBuf;

use geotemplate::model::TypeSchema;
use geotemplate::sparql::{ClassMap, Dialect, Direction, Link, QueryPlan, RelationStyle};

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data(rel)).unwrap()
}

pub fn schema() -> TypeSchema {
    TypeSchema::load(data("feature_codes.txt")).unwrap()
}

pub fn class_map() -> ClassMap {
    ClassMap::load(data("class_map.tsv")).unwrap()
}

pub fn plan(dialect: Dialect, keys: &[&str], types: &[&str], style: RelationStyle) -> QueryPlan {
    let s = schema();
    QueryPlan::new(
        dialect,
        keys.iter().map(|k| dialect.resource_uri(k)).collect(),
        types.iter().map(|t| s.get(t).unwrap()).collect(),
        style,
    )
}

fn link(question: usize, direction: Direction) -> Link {
    Link {
        question,
        direction: Some(direction),
    }
}

pub fn plans() -> Vec<(&'static str, QueryPlan)> {
    use Dialect::*;
    use RelationStyle::*;

    let ex2 = |d: Dialect, keys: &[&str]| {
        let mut p = plan(d, keys, &["ADM2", "PCLI"], Directed);
        p.answers[0].links = vec![link(0, Direction::QToA), link(1, Direction::AToQ)];
        p.answers[1].links = vec![link(1, Direction::QToA)];
        p
    };
    let mut ex3_dbp = plan(Dbpedia, &["Danube"], &["PCLI", "MTS", "SEA"], Directed);
    ex3_dbp.answers[2].links = vec![link(0, Direction::AToQ)];

    vec![
        ("putney_dbpedia", plan(Dbpedia, &["Putney Bridge"], &["ADM2", "STM"], Union)),
        ("putney_geonames", plan(Geonames, &["6619925"], &["ADM2", "STM"], Union)),
        ("ex1_dbpedia", plan(Dbpedia, &["Nagasaki"], &["PCLI"], Directed)),
        ("ex1_geonames", plan(Geonames, &["1856156"], &["PCLI"], Directed)),
        ("ex2_dbpedia", ex2(Dbpedia, &["Cahokia", "Illinois"])),
        ("ex2_geonames", ex2(Geonames, &["4234969", "4896861"])),
        ("ex3_dbpedia", ex3_dbp),
        ("ex3_geonames", plan(Geonames, &["791630"], &["PCLI", "MTS", "SEA"], Directed)),
        ("ex4_dbpedia", plan(Dbpedia, &["Golden Gate Bridge"], &["ADM2", "ADM2", "ADM1"], Union)),
        ("ex4_geonames", plan(Geonames, &["5352844"], &["ADM2", "ADM2", "ADM1"], Union)),
    ]
}
