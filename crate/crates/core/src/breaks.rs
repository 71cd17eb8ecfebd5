//! Jenks natural breaks: an exact optimal 1-D partition minimizing the
//! total within-class sum of squared deviations.
//!
//! The optimum is computed by dynamic programming over the sorted distinct
//! values (Fisher's exact method). Each layer of the table is filled with a
//! divide-and-conquer pass, which is exact because the optimal split point
//! is monotone in the right endpoint for this cost. Class boundaries are
//! placed halfway between the largest value of one class and the smallest
//! value of the next.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cut points between consecutive classes. A value `v` falls in class
/// `1 + #{b : b <= v}`, so a value equal to a boundary goes to the upper class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProminenceBreaks {
    pub classes: usize,
    pub boundaries: Vec<f64>,
}

impl ProminenceBreaks {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::Fit("non-finite boundary".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Fit("boundaries must be strictly increasing".into()));
        }
        Ok(ProminenceBreaks {
            classes: boundaries.len() + 1,
            boundaries,
        })
    }

    /// 1-based class of `v`.
    pub fn classify(&self, v: f64) -> usize {
        1 + self.boundaries.partition_point(|&b| b <= v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("breaks serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProminenceBreaks = serde_json::from_str(text)?;
        let checked = ProminenceBreaks::new(raw.boundaries)?;
        if checked.classes != raw.classes {
            return Err(Error::Fit(format!(
                "classes {} does not match {} boundaries",
                raw.classes,
                checked.boundaries.len()
            )));
        }
        Ok(checked)
    }
}

/// Distinct sorted values with multiplicities and weighted prefix sums.
struct Weighted {
    values: Vec<f64>,
    w: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl Weighted {
    fn new(data: &[f64]) -> Self {
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for v in sorted {
            match values.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1.0,
                _ => {
                    values.push(v);
                    counts.push(1.0);
                }
            }
        }
        let mut w = vec![0.0; values.len() + 1];
        let mut s1 = vec![0.0; values.len() + 1];
        let mut s2 = vec![0.0; values.len() + 1];
        for (i, (&v, &c)) in values.iter().zip(&counts).enumerate() {
            w[i + 1] = w[i] + c;
            s1[i + 1] = s1[i] + c * v;
            s2[i + 1] = s2[i] + c * v * v;
        }
        Weighted { values, w, s1, s2 }
    }

    /// Sum of squared deviations of distinct values `lo..hi` (exclusive).
    fn ssq(&self, lo: usize, hi: usize) -> f64 {
        let w = self.w[hi] - self.w[lo];
        let s1 = self.s1[hi] - self.s1[lo];
        let s2 = self.s2[hi] - self.s2[lo];
        (s2 - s1 * s1 / w).max(0.0)
    }
}

/// Optimal partition of the sorted distinct values into `classes` runs,
/// returned as the start index of every class after the first.
fn optimal_splits(data: &Weighted, classes: usize) -> Vec<usize> {
    let m = data.values.len();
    // cost[j] = best cost of the first j values using the current number of classes
    let mut cost: Vec<f64> = (0..=m).map(|j| if j == 0 { 0.0 } else { data.ssq(0, j) }).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(classes);
    back.push(vec![0; m + 1]);
    for c in 2..=classes {
        let mut next = vec![f64::INFINITY; m + 1];
        let mut arg = vec![0usize; m + 1];
        // j ranges over c..=m; split point s in (c-1)..j
        fill_layer(data, &cost, &mut next, &mut arg, c, m, c - 1, m - 1);
        cost = next;
        back.push(arg);
    }
    let mut splits = Vec::with_capacity(classes - 1);
    let mut j = m;
    for c in (2..=classes).rev() {
        let s = back[c - 1][j];
        splits.push(s);
        j = s;
    }
    splits.reverse();
    splits
}

#[allow(clippy::too_many_arguments)]
fn fill_layer(
    data: &Weighted,
    prev: &[f64],
    next: &mut [f64],
    arg: &mut [usize],
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    let mut best = f64::INFINITY;
    let mut best_s = opt_lo;
    for s in opt_lo..=opt_hi.min(mid - 1) {
        let v = prev[s] + data.ssq(s, mid);
        if v < best {
            best = v;
            best_s = s;
        }
    }
    next[mid] = best;
    arg[mid] = best_s;
    if mid > lo {
        fill_layer(data, prev, next, arg, lo, mid - 1, opt_lo, best_s);
    }
    fill_layer(data, prev, next, arg, mid + 1, hi, best_s, opt_hi);
}

/// Fits `classes` natural-breaks classes to `values`.
pub fn fit_breaks(values: &[f64], classes: usize) -> Result<ProminenceBreaks> {
    if classes < 2 {
        return Err(Error::Fit("need at least 2 classes".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite value".into()));
    }
    if values.len() < classes {
        return Err(Error::Fit(format!(
            "{} values cannot fill {classes} classes",
            values.len()
        )));
    }
    let data = Weighted::new(values);
    if data.values.len() < classes {
        return Err(Error::Fit(format!(
            "{} distinct values cannot fill {classes} classes",
            data.values.len()
        )));
    }
    let boundaries = optimal_splits(&data, classes)
        .into_iter()
        .map(|s| {
            let (lower, upper) = (data.values[s - 1], data.values[s]);
            let mid = lower + (upper - lower) / 2.0;
            // adjacent floats: the midpoint may round onto the lower value
            if mid > lower {
                mid
            } else {
                upper
            }
        })
        .collect();
    ProminenceBreaks::new(boundaries)
}

/// Fits breaks for OSM importance values, which must lie in `[0, 1]`.
pub fn fit_prominence_breaks(importances: &[f64], classes: usize) -> Result<ProminenceBreaks> {
    if let Some(v) = importances.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange {
            what: "importance",
            value: v.to_string(),
        });
    }
    fit_breaks(importances, classes)
}

/// Total within-class sum of squared deviations of `values` when classed
/// by `breaks`. Computed directly from class means.
pub fn within_class_ssq(values: &[f64], breaks: &ProminenceBreaks) -> f64 {
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); breaks.classes];
    for &v in values {
        groups[breaks.classify(v) - 1].push(v);
    }
    groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_clusters_split_between() {
        let b = fit_breaks(&[0.1, 0.1, 0.1, 0.9, 0.9, 0.9], 2).unwrap();
        assert_eq!(b.boundaries.len(), 1);
        assert!(b.boundaries[0] > 0.1 && b.boundaries[0] < 0.9);
    }

    #[test]
    fn forced_partition_separates_each_distinct_value() {
        let vals = [0.3, 0.1, 0.7, 0.1, 0.5, 0.3];
        let b = fit_breaks(&vals, 4).unwrap();
        let classes: Vec<usize> = [0.1, 0.3, 0.5, 0.7].iter().map(|&v| b.classify(v)).collect();
        assert_eq!(classes, vec![1, 2, 3, 4]);
        assert_eq!(within_class_ssq(&vals, &b), 0.0);
    }

    #[test]
    fn too_few_distinct_values() {
        assert!(fit_breaks(&[0.2, 0.2, 0.2, 0.4], 3).is_err());
        assert!(fit_breaks(&[0.2, 0.4], 3).is_err());
        assert!(fit_prominence_breaks(&[0.2, 1.4, 0.5], 2).is_err());
    }

    #[test]
    fn boundary_values_assign_upward() {
        let b = ProminenceBreaks::new(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert_eq!(b.classify(0.05), 1);
        assert_eq!(b.classify(0.3), 4);
        assert_eq!(b.classify(0.95), 7);
        assert_eq!(b.classify(0.6), 7);
    }

    #[test]
    fn unordered_boundaries_rejected() {
        assert!(ProminenceBreaks::new(vec![0.2, 0.2]).is_err());
        assert!(ProminenceBreaks::new(vec![0.3, 0.2]).is_err());
    }

    #[test]
    fn json_shape() {
        let b = ProminenceBreaks::new(vec![0.25, 0.5]).unwrap();
        assert_eq!(b.to_json(), r#"{"classes":3,"boundaries":[0.25,0.5]}"#);
        assert_eq!(ProminenceBreaks::from_json(&b.to_json()).unwrap(), b);
        assert!(ProminenceBreaks::from_json(r#"{"classes":7,"boundaries":[0.25,0.5]}"#).is_err());
    }

    #[test]
    fn fit_is_deterministic() {
        let vals: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        assert_eq!(fit_breaks(&vals, 7).unwrap(), fit_breaks(&vals, 7).unwrap());
    }
}
