//! Dendrogram cuts and elbow-based cluster-count suggestion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::gower::DissimilarityMatrix;
use crate::cluster::linkage::{Dendrogram, Node};
use crate::error::{Error, Result};
use crate::states::StateCode;

/// A flat partition obtained from a dendrogram cut. Labels are 1..=k,
/// assigned by first occurrence in leaf input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: u32,
    /// Label per leaf, in leaf input order.
    pub leaf_labels: Vec<u32>,
    pub keys: Vec<(StateCode, i32)>,
}

impl ClusterAssignment {
    pub fn label_map(&self) -> BTreeMap<(StateCode, i32), u32> {
        self.keys
            .iter()
            .zip(&self.leaf_labels)
            .map(|(&key, &label)| (key, label))
            .collect()
    }

    pub fn member_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.k as usize];
        for &label in &self.leaf_labels {
            counts[(label - 1) as usize] += 1;
        }
        counts
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

fn leaves_under(dendrogram: &Dendrogram, node: Node, out: &mut Vec<usize>) {
    match node {
        Node::Leaf(i) => out.push(i),
        Node::Internal(m) => {
            leaves_under(dendrogram, dendrogram.merges[m].left, out);
            leaves_under(dendrogram, dendrogram.merges[m].right, out);
        }
    }
}

/// Undo the last `k - 1` merges and label the remaining groups by first
/// occurrence in leaf input order.
pub fn cut_tree(dendrogram: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dendrogram.n_leaves();
    if k < 1 || k > n {
        return Err(Error::Config(format!(
            "cluster count k={k} out of range 1..={n}"
        )));
    }
    let mut uf = UnionFind::new(n);
    for merge in &dendrogram.merges[..n - k] {
        let mut left = Vec::new();
        let mut right = Vec::new();
        leaves_under(dendrogram, merge.left, &mut left);
        leaves_under(dendrogram, merge.right, &mut right);
        uf.union(left[0], right[0]);
    }
    let mut label_of_root: BTreeMap<usize, u32> = BTreeMap::new();
    let mut leaf_labels = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = uf.find(leaf);
        let next = label_of_root.len() as u32 + 1;
        let label = *label_of_root.entry(root).or_insert(next);
        leaf_labels.push(label);
    }
    debug_assert_eq!(label_of_root.len(), k);
    Ok(ClusterAssignment {
        k: k as u32,
        leaf_labels,
        keys: dendrogram.leaf_keys.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    /// Total within-cluster pairwise dissimilarity.
    pub w: f64,
    /// 1 - W(k) / W(1).
    pub explainability: f64,
    /// W(k-1) - 2 W(k) + W(k+1), for interior k only.
    pub second_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve {
    pub points: Vec<ElbowPoint>,
    /// Advisory only; the full curve is emitted so a human can override.
    pub suggested_k: Option<usize>,
}

fn within_cluster_total(assignment: &ClusterAssignment, d: &DissimilarityMatrix) -> f64 {
    let n = assignment.leaf_labels.len();
    let mut total = 0.0;
    for i in 1..n {
        for j in 0..i {
            if assignment.leaf_labels[i] == assignment.leaf_labels[j] {
                total += d.get(i, j);
            }
        }
    }
    total
}

/// Compute W(k) over the requested range and suggest the k maximizing the
/// second difference of W. Ranges too small for a second difference yield
/// the curve without a suggestion.
pub fn elbow_curve(
    dendrogram: &Dendrogram,
    d: &DissimilarityMatrix,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<ElbowCurve> {
    let n = dendrogram.n_leaves();
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 1 || hi > n || lo > hi {
        return Err(Error::Config(format!(
            "elbow range {lo}..={hi} out of bounds for {n} leaves"
        )));
    }
    let total_pairwise: f64 = d.condensed.iter().sum();
    let w: Vec<f64> = (lo..=hi)
        .map(|k| cut_tree(dendrogram, k).map(|a| within_cluster_total(&a, d)))
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(w.len());
    for (offset, &wk) in w.iter().enumerate() {
        let k = lo + offset;
        let explainability = if total_pairwise > 0.0 {
            1.0 - wk / total_pairwise
        } else if k == 1 {
            0.0
        } else {
            1.0
        };
        let second_difference = if offset > 0 && offset + 1 < w.len() {
            Some(w[offset - 1] - 2.0 * wk + w[offset + 1])
        } else {
            None
        };
        points.push(ElbowPoint {
            k,
            w: wk,
            explainability,
            second_difference,
        });
    }
    let suggested_k = points
        .iter()
        .filter_map(|p| p.second_difference.map(|s| (p.k, s)))
        .fold(None, |best: Option<(usize, f64)>, (k, s)| match best {
            Some((_, bs)) if s <= bs => best,
            _ => Some((k, s)),
        })
        .map(|(k, _)| k);
    Ok(ElbowCurve {
        points,
        suggested_k,
    })
}
