//! Compact prediction tree (CPT) and its compressed variant (CPT+).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{Counts, SEP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub(crate) struct TreeNode {
    symbol: u32,
    parent: u32,
    children: BTreeMap<u32, u32>,
}

/// Training sequences stored in a prefix tree, a lookup table from sequence
/// id to its last node, and an inverted index from symbol to the bitset of
/// sequences containing it.
///
/// CPT+ replaces frequent substrings by composite symbols before insertion;
/// sequences are expanded again when read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub(crate) nodes: Vec<TreeNode>,
    pub(crate) lookup: Vec<u32>,
    pub(crate) inverted: BTreeMap<u32, Vec<u64>>,
    pub(crate) composite_base: u32,
    pub(crate) composites: Vec<Vec<u32>>,
    pub(crate) query_len: usize,
    pub(crate) shrink_query: bool,
}

fn set_bit(bits: &mut Vec<u64>, i: usize, words: usize) {
    if bits.is_empty() {
        bits.resize(words, 0);
    }
    bits[i / 64] |= 1 << (i % 64);
}

/// Frequent contiguous substrings of length 2..=max_len present in at least
/// `min_support` sequences, longest first.
fn frequent_substrings(seqs: &[Vec<u32>], min_support: usize, max_len: usize) -> Vec<Vec<u32>> {
    let mut support: HashMap<&[u32], usize> = HashMap::new();
    for seq in seqs {
        let mut seen: BTreeSet<&[u32]> = BTreeSet::new();
        for len in 2..=max_len.min(seq.len()) {
            for w in seq.windows(len) {
                seen.insert(w);
            }
        }
        for w in seen {
            *support.entry(w).or_default() += 1;
        }
    }
    let mut found: Vec<(&[u32], usize)> = support.into_iter().filter(|&(_, c)| c >= min_support).collect();
    found.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(b.1.cmp(&a.1)).then(a.0.cmp(b.0)));
    found.into_iter().map(|(w, _)| w.to_vec()).collect()
}

impl Cpt {
    fn empty(composite_base: u32, query_len: usize, shrink_query: bool) -> Self {
        Cpt {
            nodes: vec![TreeNode {
                symbol: u32::MAX,
                parent: 0,
                children: BTreeMap::new(),
            }],
            lookup: Vec::new(),
            inverted: BTreeMap::new(),
            composite_base,
            composites: Vec::new(),
            query_len,
            shrink_query,
        }
    }

    fn insert(&mut self, stored: &[u32]) {
        let mut cur = 0u32;
        for &s in stored {
            cur = match self.nodes[cur as usize].children.get(&s) {
                Some(&c) => c,
                None => {
                    let n = self.nodes.len() as u32;
                    self.nodes.push(TreeNode {
                        symbol: s,
                        parent: cur,
                        children: BTreeMap::new(),
                    });
                    self.nodes[cur as usize].children.insert(s, n);
                    n
                }
            };
        }
        self.lookup.push(cur);
    }

    fn index(&mut self, seqs: &[Vec<u32>]) {
        let words = seqs.len().div_ceil(64);
        for (i, seq) in seqs.iter().enumerate() {
            for &s in seq {
                set_bit(self.inverted.entry(s).or_default(), i, words);
            }
        }
    }

    /// `composite_base` must exceed every symbol id in `seqs`.
    pub fn train(seqs: &[Vec<u32>], composite_base: u32, query_len: usize) -> Self {
        let mut cpt = Cpt::empty(composite_base, query_len, false);
        for seq in seqs {
            cpt.insert(seq);
        }
        cpt.index(seqs);
        cpt
    }

    pub fn train_plus(
        seqs: &[Vec<u32>],
        composite_base: u32,
        query_len: usize,
        min_support: usize,
        max_len: usize,
    ) -> Self {
        let mut cpt = Cpt::empty(composite_base, query_len, true);
        let composites = frequent_substrings(seqs, min_support.max(1), max_len);
        let codes: HashMap<&[u32], u32> = composites
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), composite_base + i as u32))
            .collect();
        for seq in seqs {
            let mut stored = Vec::with_capacity(seq.len());
            let mut i = 0;
            while i < seq.len() {
                let hit = (2..=max_len.min(seq.len() - i))
                    .rev()
                    .find_map(|len| codes.get(&seq[i..i + len]).map(|&c| (c, len)));
                match hit {
                    Some((c, len)) => {
                        stored.push(c);
                        i += len;
                    }
                    None => {
                        stored.push(seq[i]);
                        i += 1;
                    }
                }
            }
            cpt.insert(&stored);
        }
        cpt.index(seqs);
        cpt.composites = composites;
        cpt
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().skip(1).filter(|n| n.children.is_empty()).count()
    }

    /// Number of sequences in which `symbol` occurs.
    pub fn index_support(&self, symbol: u32) -> usize {
        self.inverted
            .get(&symbol)
            .map_or(0, |b| b.iter().map(|w| w.count_ones() as usize).sum())
    }

    pub fn sequence_count(&self) -> usize {
        self.lookup.len()
    }

    /// Training sequence `id`, read back from the tree and decompressed.
    pub fn sequence(&self, id: usize) -> Vec<u32> {
        let mut stored = Vec::new();
        let mut cur = self.lookup[id];
        while cur != 0 {
            let node = &self.nodes[cur as usize];
            stored.push(node.symbol);
            cur = node.parent;
        }
        stored.reverse();
        let mut out = Vec::with_capacity(stored.len());
        for s in stored {
            if s >= self.composite_base {
                out.extend(&self.composites[(s - self.composite_base) as usize]);
            } else {
                out.push(s);
            }
        }
        out
    }

    /// Sequences containing every symbol of `query`.
    fn candidates(&self, query: &[u32]) -> Vec<usize> {
        let mut acc: Option<Vec<u64>> = None;
        for s in query {
            let Some(bits) = self.inverted.get(s) else {
                return Vec::new();
            };
            acc = Some(match acc {
                None => bits.clone(),
                Some(a) => a.iter().zip(bits).map(|(x, y)| x & y).collect(),
            });
        }
        let Some(bits) = acc else { return Vec::new() };
        let mut out = Vec::new();
        for (w, &word) in bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                out.push(w * 64 + b);
                word &= word - 1;
            }
        }
        out
    }

    /// Tally of the symbol right after the earliest point at which `query`
    /// completes as an ordered subsequence, over all similar sequences.
    fn tally(&self, query: &[u32]) -> Counts {
        let mut counts = Counts::new();
        for id in self.candidates(query) {
            let seq = self.sequence(id);
            let mut q = 0;
            let mut end = None;
            for (i, &s) in seq.iter().enumerate() {
                if s == query[q] {
                    q += 1;
                    if q == query.len() {
                        end = Some(i);
                        break;
                    }
                }
            }
            if let Some(&next) = end.and_then(|i| seq.get(i + 1)) {
                if next != SEP {
                    *counts.entry(next).or_default() += 1;
                }
            }
        }
        counts
    }

    pub(crate) fn next(&self, ctx: &[u32]) -> Counts {
        let len = self.query_len.min(ctx.len());
        let mut query = &ctx[ctx.len() - len..];
        loop {
            let counts = self.tally(query);
            if !counts.is_empty() || !self.shrink_query || query.len() <= 1 {
                return counts;
            }
            query = &query[1..];
        }
    }
}
