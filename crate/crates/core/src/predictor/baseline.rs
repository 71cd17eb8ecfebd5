//! Baselines that ignore the question.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::entries;

/// Full answer sequences and how often each occurred in training.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequentAnswers {
    #[serde(with = "entries")]
    pub(crate) counts: BTreeMap<Vec<u32>, u32>,
}

impl FrequentAnswers {
    pub fn train<'a>(answers: impl IntoIterator<Item = &'a [u32]>) -> Self {
        let mut counts: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        for a in answers {
            *counts.entry(a.to_vec()).or_default() += 1;
        }
        FrequentAnswers { counts }
    }

    /// The `k` most frequent answers, ties in symbol order.
    pub fn top_k(&self, k: usize) -> Vec<Vec<u32>> {
        let mut all: Vec<(&Vec<u32>, u32)> = self.counts.iter().map(|(a, &c)| (a, c)).collect();
        // BTreeMap order is already lexicographic; the stable sort keeps it for ties
        all.sort_by(|a, b| b.1.cmp(&a.1));
        all.into_iter().take(k).map(|(a, _)| a.clone()).collect()
    }
}

/// Generator for one question: the stream depends on the model seed and
/// the question symbols only.
pub(crate) fn question_rng(seed: u64, question: &[String]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for s in question {
        h.update(s.as_bytes());
        h.update([0x1f]);
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Up to `k` distinct sequences of uniformly drawn symbols `first..first+n`,
/// each with a length uniform in `1..=max_len`.
pub(crate) fn random_answers(rng: &mut ChaCha8Rng, first: u32, n: u32, max_len: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    if n == 0 {
        return out;
    }
    let mut attempts = 0;
    while out.len() < k && attempts < 1000 * k {
        attempts += 1;
        let len = rng.gen_range(1..=max_len);
        let seq: Vec<u32> = (0..len).map(|_| first + rng.gen_range(0..n)).collect();
        if !out.contains(&seq) {
            out.push(seq);
        }
    }
    out
}
