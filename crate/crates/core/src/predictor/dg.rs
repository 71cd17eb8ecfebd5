//! Dependency graph over question-side and answer-side symbols.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SEP;

fn q_node(s: u32) -> u32 {
    s * 2
}

fn a_node(s: u32) -> u32 {
    s * 2 + 1
}

/// Nodes are symbols tagged with their side of the separator, so `Q-ADM1`
/// and `A-ADM1` are distinct. An arc u -> v counts how often v followed u
/// at each distance up to the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub(crate) window: usize,
    pub(crate) occurrences: BTreeMap<u32, u32>,
    pub(crate) arcs: BTreeMap<u32, BTreeMap<u32, Vec<u32>>>,
}

impl DependencyGraph {
    pub fn train(seqs: &[Vec<u32>], window: usize) -> Self {
        let mut occurrences: BTreeMap<u32, u32> = BTreeMap::new();
        let mut arcs: BTreeMap<u32, BTreeMap<u32, Vec<u32>>> = BTreeMap::new();
        for seq in seqs {
            let sep = seq.iter().position(|&s| s == SEP).unwrap_or(seq.len());
            let nodes: Vec<u32> = seq[..sep]
                .iter()
                .map(|&s| q_node(s))
                .chain(seq.iter().skip(sep + 1).map(|&s| a_node(s)))
                .collect();
            for (i, &u) in nodes.iter().enumerate() {
                *occurrences.entry(u).or_default() += 1;
                for d in 1..=window {
                    let Some(&v) = nodes.get(i + d) else { break };
                    let slots = arcs.entry(u).or_default().entry(v).or_insert_with(|| vec![0; window]);
                    slots[d - 1] += 1;
                }
            }
        }
        DependencyGraph {
            window,
            occurrences,
            arcs,
        }
    }

    /// Proximity-weighted confidence of `v` following `u`: each co-occurrence
    /// at distance d contributes 1/d.
    fn confidence(&self, u: u32, slots: &[u32]) -> f64 {
        let weighted: f64 = slots
            .iter()
            .enumerate()
            .map(|(d, &c)| c as f64 / (d + 1) as f64)
            .sum();
        weighted / self.occurrences[&u] as f64
    }

    pub(crate) fn next(&self, ctx: &[u32]) -> Vec<(u32, f64)> {
        let from = match ctx {
            [.., q, last] if *last == SEP => q_node(*q),
            [.., last] if *last != SEP => a_node(*last),
            _ => return Vec::new(),
        };
        let Some(out) = self.arcs.get(&from) else {
            return Vec::new();
        };
        out.iter()
            .filter(|(&v, _)| v % 2 == 1)
            .map(|(&v, slots)| (v / 2, self.confidence(from, slots)))
            .collect()
    }
}
