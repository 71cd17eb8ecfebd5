//! LZ78 phrase dictionary with visit counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Counts, SEP};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct PhraseNode {
    count: u32,
    children: BTreeMap<u32, u32>,
}

fn parse(nodes: &mut Vec<PhraseNode>, seq: &[u32]) {
    let mut cur = 0usize;
    for &s in seq {
        match nodes[cur].children.get(&s) {
            Some(&child) => {
                cur = child as usize;
                nodes[cur].count += 1;
            }
            None => {
                let id = nodes.len() as u32;
                nodes.push(PhraseNode {
                    count: 1,
                    children: BTreeMap::new(),
                });
                nodes[cur].children.insert(s, id);
                cur = 0;
            }
        }
    }
}

/// Each training sequence is parsed into phrases, each the shortest string
/// not yet in the dictionary. Parsing is repeated from the first `shifts`
/// start offsets of the sequence (multi-shift parsing), so phrases can begin
/// anywhere, not only where the previous phrase ended. Node counts record how
/// often a phrase prefix was traversed while parsing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lz78 {
    pub(crate) nodes: Vec<PhraseNode>,
}

impl Lz78 {
    pub fn train(seqs: &[Vec<u32>], shifts: Option<usize>) -> Self {
        let mut nodes = vec![PhraseNode::default()];
        for seq in seqs {
            for offset in 0..shifts.unwrap_or(seq.len()).min(seq.len()) {
                parse(&mut nodes, &seq[offset..]);
            }
        }
        Lz78 { nodes }
    }

    /// Number of dictionary phrases.
    pub fn phrases(&self) -> usize {
        self.nodes.len() - 1
    }

    fn walk(&self, path: &[u32]) -> Option<usize> {
        let mut cur = 0usize;
        for s in path {
            cur = *self.nodes[cur].children.get(s)? as usize;
        }
        Some(cur)
    }

    fn continuation(&self, node: usize) -> Counts {
        self.nodes[node]
            .children
            .iter()
            .filter(|(&s, _)| s != SEP)
            .map(|(&s, &child)| (s, self.nodes[child as usize].count))
            .collect()
    }

    /// Counts of symbols following the longest suffix of `ctx` that is a
    /// phrase with continuations; the root's children otherwise.
    pub(crate) fn next(&self, ctx: &[u32]) -> Counts {
        for start in 0..ctx.len() {
            if let Some(node) = self.walk(&ctx[start..]) {
                let c = self.continuation(node);
                if !c.is_empty() {
                    return c;
                }
            }
        }
        self.continuation(0)
    }
}
