//! Association rules between question and answer symbols (Apriori).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GenericClass, GenericSequence, QuestionClass};

pub const DEFAULT_MIN_SUPPORT: f64 = 0.04;
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;
pub const DEFAULT_MAX_ITEMS: usize = 4;

const EPS: f64 = 1e-12;

/// Prefixed symbols of one question/answer pair, with set semantics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub items: BTreeSet<String>,
}

impl Transaction {
    pub fn from_pair(question: &GenericSequence, answer: &GenericSequence) -> Self {
        let items = question
            .items
            .iter()
            .map(|s| format!("Q-{s}"))
            .chain(answer.items.iter().map(|s| format!("A-{s}")))
            .collect();
        Transaction { items }
    }
}

pub fn build_transactions(
    pairs: &[(GenericSequence, GenericSequence)],
    class: GenericClass,
) -> Result<Vec<Transaction>> {
    pairs
        .iter()
        .map(|(q, a)| {
            for s in [q, a] {
                if s.class != class {
                    return Err(Error::ClassMismatch(s.class, class));
                }
            }
            Ok(Transaction::from_pair(q, a))
        })
        .collect()
}

/// Splits encoded pairs by question class (one question toponym or more).
pub fn split_by_question_class(
    pairs: &[(GenericSequence, GenericSequence)],
) -> (Vec<(GenericSequence, GenericSequence)>, Vec<(GenericSequence, GenericSequence)>) {
    pairs
        .iter()
        .cloned()
        .partition(|(q, _)| QuestionClass::from_toponym_count(q.len()) == Some(QuestionClass::Simple))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationRule {
    pub antecedent: Vec<String>,
    pub consequent: Vec<String>,
    pub support: f64,
    pub confidence: f64,
    pub lift: f64,
    pub frequency: usize,
}

fn render_set(items: &[String]) -> String {
    format!("{{{}}}", items.join(","))
}

impl AssociationRule {
    pub fn antecedent_str(&self) -> String {
        render_set(&self.antecedent)
    }

    pub fn consequent_str(&self) -> String {
        render_set(&self.consequent)
    }

    /// Questions-to-answers view: only Q- items on the left, only A- on the right.
    pub fn is_question_to_answer(&self) -> bool {
        self.antecedent.iter().all(|i| i.starts_with("Q-"))
            && self.consequent.iter().all(|i| i.starts_with("A-"))
    }
}

impl fmt::Display for AssociationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.antecedent_str(), self.consequent_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKey {
    Frequency,
    Support,
    Confidence,
    Lift,
}

impl FromStr for RankKey {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frequency" => Ok(RankKey::Frequency),
            "support" => Ok(RankKey::Support),
            "confidence" => Ok(RankKey::Confidence),
            "lift" => Ok(RankKey::Lift),
            _ => Err(Error::Mining(format!("unknown rank key {s:?}"))),
        }
    }
}

/// Which rules a report keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleView {
    #[default]
    All,
    QuestionToAnswer,
}

impl RuleView {
    pub fn keeps(self, rule: &AssociationRule) -> bool {
        match self {
            RuleView::All => true,
            RuleView::QuestionToAnswer => rule.is_question_to_answer(),
        }
    }
}

/// Vertical layout: for each item, the bitset of transactions containing it.
struct TidSets {
    n: usize,
    words: usize,
    items: Vec<String>,
    bits: Vec<Vec<u64>>,
}

impl TidSets {
    fn new(transactions: &[Transaction]) -> Self {
        let items: Vec<String> = transactions
            .iter()
            .flat_map(|t| t.items.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = items.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let n = transactions.len();
        let words = n.div_ceil(64);
        let mut bits = vec![vec![0u64; words]; items.len()];
        for (t, tx) in transactions.iter().enumerate() {
            for it in &tx.items {
                bits[index[it.as_str()]][t / 64] |= 1 << (t % 64);
            }
        }
        TidSets { n, words, items, bits }
    }

    fn count(&self, set: &[usize]) -> usize {
        let mut total = 0;
        for w in 0..self.words {
            let mut acc = u64::MAX;
            for &i in set {
                acc &= self.bits[i][w];
            }
            total += acc.count_ones() as usize;
        }
        total
    }
}

fn frequent(count: usize, n: usize, min_support: f64) -> bool {
    count as f64 / n as f64 + EPS >= min_support
}

/// Frequent itemsets (as sorted item indices) with their counts, level by level.
fn frequent_itemsets(tids: &TidSets, min_support: f64, max_items: usize) -> HashMap<Vec<usize>, usize> {
    let mut all = HashMap::new();
    let mut level: Vec<Vec<usize>> = Vec::new();
    for i in 0..tids.items.len() {
        let c = tids.count(&[i]);
        if frequent(c, tids.n, min_support) {
            all.insert(vec![i], c);
            level.push(vec![i]);
        }
    }
    let mut k = 1;
    while !level.is_empty() && k < max_items {
        let known: HashSet<&Vec<usize>> = level.iter().collect();
        let mut next = Vec::new();
        // level is sorted lexicographically; join pairs sharing a (k-1)-prefix
        for a in 0..level.len() {
            for b in a + 1..level.len() {
                let (x, y) = (&level[a], &level[b]);
                if x[..k - 1] != y[..k - 1] {
                    break;
                }
                let mut cand = x.clone();
                cand.push(y[k - 1]);
                let closed = (0..cand.len()).all(|drop| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    known.contains(&sub)
                });
                if !closed {
                    continue;
                }
                let c = tids.count(&cand);
                if frequent(c, tids.n, min_support) {
                    all.insert(cand.clone(), c);
                    next.push(cand);
                }
            }
        }
        level = next;
        k += 1;
    }
    all
}

/// Every rule `X => Y` where `X ∪ Y` is a frequent itemset of at most
/// `max_items` items and the confidence reaches `min_confidence`. Output is
/// sorted by rendered rule.
pub fn mine_rules(
    transactions: &[Transaction],
    min_support: f64,
    min_confidence: f64,
    max_items: usize,
) -> Result<Vec<AssociationRule>> {
    if transactions.is_empty() {
        return Err(Error::Mining("no transactions".into()));
    }
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(Error::Mining(format!("min_support {min_support} not in (0, 1]")));
    }
    if !(min_confidence > 0.0 && min_confidence <= 1.0) {
        return Err(Error::Mining(format!("min_confidence {min_confidence} not in (0, 1]")));
    }
    if max_items < 2 {
        return Err(Error::Mining(format!("max_items {max_items} must be at least 2")));
    }
    if transactions.iter().any(|t| t.items.is_empty()) {
        return Err(Error::Mining("empty transaction".into()));
    }
    let tids = TidSets::new(transactions);
    let sets = frequent_itemsets(&tids, min_support, max_items);
    let n = tids.n as f64;
    let names = |idx: &[usize]| idx.iter().map(|&i| tids.items[i].clone()).collect::<Vec<_>>();

    let mut rules = Vec::new();
    for (set, &count) in &sets {
        if set.len() < 2 {
            continue;
        }
        let size = set.len();
        for mask in 1..(1u32 << size) - 1 {
            let (ante, cons): (Vec<usize>, Vec<usize>) = {
                let mut a = Vec::new();
                let mut c = Vec::new();
                for (j, &v) in set.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        a.push(v)
                    } else {
                        c.push(v)
                    }
                }
                (a, c)
            };
            let ante_count = sets[&ante];
            let confidence = count as f64 / ante_count as f64;
            if confidence + EPS < min_confidence {
                continue;
            }
            let cons_support = sets[&cons] as f64 / n;
            rules.push(AssociationRule {
                antecedent: names(&ante),
                consequent: names(&cons),
                support: count as f64 / n,
                confidence,
                lift: confidence / cons_support,
                frequency: count,
            });
        }
    }
    rules.sort_by_cached_key(|r| r.to_string());
    Ok(rules)
}

/// Top `n` rules by `key`, descending; ties ordered by rendered rule.
pub fn rank_rules(rules: &[AssociationRule], key: RankKey, n: usize) -> Vec<AssociationRule> {
    let value = |r: &AssociationRule| match key {
        RankKey::Frequency => r.frequency as f64,
        RankKey::Support => r.support,
        RankKey::Confidence => r.confidence,
        RankKey::Lift => r.lift,
    };
    let mut keyed: Vec<(f64, String, &AssociationRule)> =
        rules.iter().map(|r| (value(r), r.to_string(), r)).collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    keyed.into_iter().take(n).map(|(_, _, r)| r.clone()).collect()
}

pub const RULE_CSV_HEADER: [&str; 7] = [
    "rank",
    "antecedent",
    "consequent",
    "support",
    "confidence",
    "lift",
    "frequency",
];

/// Writes a ranked rule table. The header is written even for no rules.
pub fn write_rules_csv<W: Write>(out: W, rules: &[AssociationRule]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RULE_CSV_HEADER)?;
    for (i, r) in rules.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.antecedent_str(),
            r.consequent_str(),
            format!("{:.4}", r.support),
            format!("{:.4}", r.confidence),
            format!("{:.4}", r.lift),
            r.frequency.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
