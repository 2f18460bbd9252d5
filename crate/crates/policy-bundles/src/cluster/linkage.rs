//! Agglomerative clustering with complete linkage.

use serde::{Deserialize, Serialize};

use crate::cluster::gower::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::states::StateCode;

/// Linkage rule. Only complete linkage is implemented; the other variants
/// exist so configuration errors surface with a clear message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Complete,
    Single,
    Average,
    Ward,
}

impl Linkage {
    pub fn require_complete(self) -> Result<()> {
        match self {
            Linkage::Complete => Ok(()),
            other => Err(Error::Config(format!(
                "linkage {other:?} is not supported; only complete linkage is implemented"
            ))),
        }
    }
}

/// A node reference inside a dendrogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Leaf(usize),
    /// Index into the merge list.
    Internal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: Node,
    pub right: Node,
    pub height: f64,
}

/// Stepwise dendrogram: exactly `n - 1` merges for `n` leaves, heights
/// nondecreasing in merge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_keys: Vec<(StateCode, i32)>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaf_keys.len()
    }
}

/// Merge candidates are ordered by distance, then by the smallest and
/// second-smallest minimal original leaf index of the two clusters.
fn better_pair(
    best: Option<(f64, usize, usize)>,
    dist: f64,
    key_a: usize,
    key_b: usize,
) -> bool {
    match best {
        None => true,
        Some((bd, ba, bb)) => {
            let cand = (key_a.min(key_b), key_a.max(key_b));
            let cur = (ba.min(bb), ba.max(bb));
            dist < bd || (dist == bd && cand < cur)
        }
    }
}

/// Complete-linkage agglomeration. At every step the pair of active
/// clusters at minimal distance is merged, with the inter-cluster distance
/// maintained by the Lance-Williams maximum update.
pub fn agglomerate_complete_linkage(d: &DissimilarityMatrix) -> Dendrogram {
    let n = d.len();
    let mut work = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            work[i * n + j] = d.get(i, j);
        }
    }
    let mut active: Vec<bool> = vec![true; n];
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut node: Vec<Node> = (0..n).map(Node::Leaf).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        let mut best_pair = (0usize, 0usize);
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !active[b] {
                    continue;
                }
                let dist = work[a * n + b];
                if better_pair(best, dist, min_leaf[a], min_leaf[b]) {
                    best = Some((dist, min_leaf[a], min_leaf[b]));
                    best_pair = (a, b);
                }
            }
        }
        let (height, _, _) = best.expect("at least two active clusters");
        let (a, b) = best_pair;

        merges.push(Merge {
            left: node[a],
            right: node[b],
            height,
        });
        for c in 0..n {
            if active[c] && c != a && c != b {
                let updated = work[a * n + c].max(work[b * n + c]);
                work[a * n + c] = updated;
                work[c * n + a] = updated;
            }
        }
        active[b] = false;
        min_leaf[a] = min_leaf[a].min(min_leaf[b]);
        node[a] = Node::Internal(step);
    }

    Dendrogram {
        leaf_keys: d.keys.clone(),
        merges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn matrix_from_condensed(n: usize, condensed: Vec<f64>) -> DissimilarityMatrix {
        DissimilarityMatrix {
            keys: (0..n)
                .map(|i| (StateCode::all().nth(i % 51).unwrap(), 2000 + (i / 51) as i32))
                .collect(),
            condensed,
            empty_denominator_pairs: Vec::new(),
        }
    }

    #[test]
    fn two_leaves_merge_at_their_distance() {
        let d = matrix_from_condensed(2, vec![0.4]);
        let dend = agglomerate_complete_linkage(&d);
        assert_eq!(dend.merges.len(), 1);
        assert_eq!(dend.merges[0].height, 0.4);
        assert_eq!(dend.merges[0].left, Node::Leaf(0));
        assert_eq!(dend.merges[0].right, Node::Leaf(1));
    }

    #[test]
    fn three_leaf_complete_linkage_takes_the_max() {
        // d(a,b)=0.1, d(a,c)=0.5, d(b,c)=0.9
        // condensed order: (1,0), (2,0), (2,1)
        let d = matrix_from_condensed(3, vec![0.1, 0.5, 0.9]);
        let dend = agglomerate_complete_linkage(&d);
        assert_eq!(dend.merges[0].height, 0.1);
        assert_eq!(dend.merges[0].left, Node::Leaf(0));
        assert_eq!(dend.merges[0].right, Node::Leaf(1));
        assert_eq!(dend.merges[1].height, 0.9);
        assert_eq!(dend.merges[1].left, Node::Internal(0));
        assert_eq!(dend.merges[1].right, Node::Leaf(2));
    }

    #[test]
    fn equal_distances_merge_by_leaf_index() {
        let d = matrix_from_condensed(4, vec![0.5; 6]);
        let dend = agglomerate_complete_linkage(&d);
        // (0,1) first; the leaf-index rule then prefers pairs containing
        // leaf 0, so the merged cluster absorbs 2, then 3.
        assert_eq!(dend.merges[0].left, Node::Leaf(0));
        assert_eq!(dend.merges[0].right, Node::Leaf(1));
        assert_eq!(dend.merges[1].left, Node::Internal(0));
        assert_eq!(dend.merges[1].right, Node::Leaf(2));
        assert_eq!(dend.merges[2].left, Node::Internal(1));
        assert_eq!(dend.merges[2].right, Node::Leaf(3));
        assert!(dend.merges.iter().all(|m| (m.height - 0.5).abs() < 1e-12));
    }

    #[test]
    fn heights_are_nondecreasing() {
        let condensed: Vec<f64> = (0..15).map(|i| ((i * 7919) % 97) as f64 / 97.0).collect();
        let d = matrix_from_condensed(6, condensed);
        let dend = agglomerate_complete_linkage(&d);
        for pair in dend.merges.windows(2) {
            assert!(pair[0].height <= pair[1].height);
        }
    }

    #[test]
    fn only_complete_linkage_accepted() {
        assert!(Linkage::Complete.require_complete().is_ok());
        assert!(Linkage::Single.require_complete().is_err());
        assert!(Linkage::Average.require_complete().is_err());
        assert!(Linkage::Ward.require_complete().is_err());
    }
}
