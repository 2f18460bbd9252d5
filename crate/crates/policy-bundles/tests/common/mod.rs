//! Shared oracles for the integration suites: an independent naive
//! complete-linkage implementation, an adjusted Rand index, and small
//! fixture helpers.

// Each integration target compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use std::collections::BTreeSet;

use policy_bundles::cluster::gower::DissimilarityMatrix;
use policy_bundles::cluster::linkage::{Dendrogram, Node};
use policy_bundles::states::StateCode;

/// Wrap a condensed lower triangle in a DissimilarityMatrix with synthetic
/// state-year keys.
pub fn matrix_from_condensed(n: usize, condensed: Vec<f64>) -> DissimilarityMatrix {
    assert_eq!(condensed.len(), n * (n - 1) / 2);
    DissimilarityMatrix {
        keys: (0..n)
            .map(|i| (StateCode::all().nth(i % 51).unwrap(), 2000 + (i / 51) as i32))
            .collect(),
        condensed,
        empty_denominator_pairs: Vec::new(),
    }
}

/// One merge of the naive reference: the two clusters (as original leaf
/// sets) and the complete-linkage height.
pub struct NaiveMerge {
    pub a: BTreeSet<usize>,
    pub b: BTreeSet<usize>,
    pub height: f64,
}

/// Textbook agglomeration: at every step recompute each candidate pair's
/// distance as the maximum over original leaf pairs, and apply the same
/// tie rule as the production path (smallest, then second-smallest,
/// minimal leaf index). No Lance-Williams updates.
pub fn naive_complete_linkage(n: usize, d: &dyn Fn(usize, usize) -> f64) -> Vec<NaiveMerge> {
    let mut clusters: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in (x + 1)..clusters.len() {
                let mut dist = f64::NEG_INFINITY;
                for &i in &clusters[x] {
                    for &j in &clusters[y] {
                        let v = if i > j { d(i, j) } else { d(j, i) };
                        if v > dist {
                            dist = v;
                        }
                    }
                }
                let min_x = *clusters[x].iter().next().unwrap();
                let min_y = *clusters[y].iter().next().unwrap();
                let (lo, hi) = if min_x < min_y { (min_x, min_y) } else { (min_y, min_x) };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => {
                        dist < bd || (dist == bd && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some((dist, lo, hi, x, y));
                }
            }
        }
        let (height, _, _, x, y) = best.unwrap();
        let b = clusters.remove(y);
        let a = clusters.remove(x);
        let mut merged = a.clone();
        merged.extend(b.iter().copied());
        merges.push(NaiveMerge { a, b, height });
        clusters.push(merged);
    }
    merges
}

/// Original leaf indices below a dendrogram node.
pub fn leaves_under(dendrogram: &Dendrogram, node: Node) -> BTreeSet<usize> {
    match node {
        Node::Leaf(i) => BTreeSet::from([i]),
        Node::Internal(m) => {
            let merge = &dendrogram.merges[m];
            let mut set = leaves_under(dendrogram, merge.left);
            set.extend(leaves_under(dendrogram, merge.right));
            set
        }
    }
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[u32], b: &[u32]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut table: std::collections::BTreeMap<(u32, u32), u64> = std::collections::BTreeMap::new();
    let mut rows: std::collections::BTreeMap<u32, u64> = std::collections::BTreeMap::new();
    let mut cols: std::collections::BTreeMap<u32, u64> = std::collections::BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let choose2 = |m: u64| (m * m.saturating_sub(1)) as f64 / 2.0;
    let sum_ij: f64 = table.values().map(|&m| choose2(m)).sum();
    let sum_a: f64 = rows.values().map(|&m| choose2(m)).sum();
    let sum_b: f64 = cols.values().map(|&m| choose2(m)).sum();
    let total = choose2(n as u64);
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (sum_ij - expected) / (max - expected)
}

/// Deterministic pseudo-random stream for oracle inputs, independent of
/// the crate's RNG choices.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

use std::collections::BTreeMap;

use policy_bundles::ingest::panel::PanelObservation;
use policy_bundles::states::Gender;

/// A complete panel with hash-mixed cluster levels, covariates that are
/// not additive in state and year, and all factor levels observed.
pub fn test_panel(
    n_states: usize,
    years: std::ops::RangeInclusive<i32>,
    n_clusters: u32,
) -> Vec<PanelObservation> {
    let states: Vec<StateCode> = StateCode::all().take(n_states).collect();
    let mut panel = Vec::new();
    for (si, &state) in states.iter().enumerate() {
        for year in years.clone() {
            for gender in [Gender::Female, Gender::Male] {
                let mut h = (si as u64 * 131 + year as u64) ^ 0x9E3779B97F4A7C15;
                h = h.wrapping_mul(0xBF58476D1CE4E5B9);
                h ^= h >> 31;
                let mut deaths_lag = BTreeMap::new();
                deaths_lag.insert(1, 40 + (si as u64 * 3 + year as u64) % 17);
                let mut cluster_lag = BTreeMap::new();
                cluster_lag.insert(1, (h % n_clusters as u64) as u32 + 1);
                panel.push(PanelObservation {
                    state,
                    year,
                    gender,
                    deaths: 50 + (si as u64 * 7 + year as u64 % 13),
                    population: 1_000_000 + si as u64 * 10_000,
                    prescribing_rate: 70.0 + si as f64 * (1.0 + 0.1 * (year % 5) as f64),
                    gini: 0.42 + 0.001 * si as f64 * (1.0 + 0.2 * (year % 7) as f64),
                    income: 50.0 + si as f64 * 0.3 * (1.0 + 0.1 * (year % 3) as f64),
                    deaths_lag,
                    cluster_lag,
                    complete: true,
                });
            }
        }
    }
    panel
}
