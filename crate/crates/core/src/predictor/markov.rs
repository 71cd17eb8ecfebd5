//! Fixed-order context models: MARK1, AKOM and TDAG.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{entries, Counts, SEP};

/// First-order transitions. The symbol before SEP also gets a direct
/// transition to the first answer symbol (`bridge`), so the question is not
/// forgotten at the separator; the plain SEP row is the backoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mark1 {
    pub(crate) transitions: BTreeMap<u32, Counts>,
    pub(crate) bridge: BTreeMap<u32, Counts>,
}

impl Mark1 {
    pub fn train(seqs: &[Vec<u32>]) -> Self {
        let mut transitions: BTreeMap<u32, Counts> = BTreeMap::new();
        let mut bridge: BTreeMap<u32, Counts> = BTreeMap::new();
        for seq in seqs {
            for w in seq.windows(2) {
                *transitions.entry(w[0]).or_default().entry(w[1]).or_default() += 1;
            }
            if let Some(p) = seq.iter().position(|&s| s == SEP) {
                if p > 0 && p + 1 < seq.len() {
                    *bridge.entry(seq[p - 1]).or_default().entry(seq[p + 1]).or_default() += 1;
                }
            }
        }
        Mark1 { transitions, bridge }
    }

    pub fn probability(&self, from: u32, to: u32) -> f64 {
        self.transitions.get(&from).map_or(0.0, |row| {
            let total: u32 = row.values().sum();
            row.get(&to).copied().unwrap_or(0) as f64 / total as f64
        })
    }

    pub(crate) fn next(&self, ctx: &[u32]) -> Option<&Counts> {
        let &last = ctx.last()?;
        if last == SEP && ctx.len() >= 2 {
            if let Some(row) = self.bridge.get(&ctx[ctx.len() - 2]) {
                return Some(row);
            }
        }
        self.transitions.get(&last)
    }
}

/// Next-symbol counts for every context of length `min_order..=max_order`.
/// AKOM uses orders 1..K; TDAG adds the empty context as a last resort and
/// drops contexts seen fewer than `threshold` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextModel {
    pub(crate) min_order: usize,
    pub(crate) max_order: usize,
    #[serde(with = "entries")]
    pub(crate) table: BTreeMap<Vec<u32>, Counts>,
}

impl ContextModel {
    pub fn train(seqs: &[Vec<u32>], min_order: usize, max_order: usize, threshold: u32) -> Self {
        let mut table: BTreeMap<Vec<u32>, Counts> = BTreeMap::new();
        for seq in seqs {
            for j in 0..seq.len() {
                for o in min_order..=max_order.min(j) {
                    *table
                        .entry(seq[j - o..j].to_vec())
                        .or_default()
                        .entry(seq[j])
                        .or_default() += 1;
                }
            }
        }
        if threshold > 1 {
            table.retain(|ctx, counts| ctx.is_empty() || counts.values().sum::<u32>() >= threshold);
        }
        ContextModel {
            min_order,
            max_order,
            table,
        }
    }

    pub fn contexts(&self) -> usize {
        self.table.len()
    }

    pub(crate) fn next(&self, ctx: &[u32]) -> Option<&Counts> {
        (self.min_order..=self.max_order.min(ctx.len()))
            .rev()
            .filter_map(|o| self.table.get(&ctx[ctx.len() - o..]))
            // answers never contain SEP, so a row offering only SEP is no match
            .find(|row| row.keys().any(|&s| s != SEP))
    }
}
