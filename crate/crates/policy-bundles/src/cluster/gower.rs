//! Pairwise dissimilarities over binary state-year policy vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::policy::StateYearPolicyMatrix;
use crate::states::StateCode;

/// Treatment of 0-0 agreements in binary dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryMode {
    /// 0-0 counts as agreement; dissimilarity = mismatches / columns.
    Symmetric,
    /// 0-0 pairs are excluded from numerator and denominator.
    Asymmetric,
}

impl Default for BinaryMode {
    fn default() -> Self {
        BinaryMode::Symmetric
    }
}

impl std::str::FromStr for BinaryMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(BinaryMode::Symmetric),
            "asymmetric" => Ok(BinaryMode::Asymmetric),
            other => Err(format!("unknown binary mode `{other}`")),
        }
    }
}

/// Symmetric matrix of dissimilarities in [0, 1], zero diagonal, stored as
/// a condensed lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    pub keys: Vec<(StateCode, i32)>,
    /// Entry for pair (i, j), i > j, at `i * (i - 1) / 2 + j`.
    pub condensed: Vec<f64>,
    /// Row pairs with no informative column in asymmetric mode; their
    /// dissimilarity was defined as 0.
    pub empty_denominator_pairs: Vec<(usize, usize)>,
}

impl DissimilarityMatrix {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            self.condensed[hi * (hi - 1) / 2 + lo]
        }
    }
}

/// Invert the condensed index: the pair (i, j), i > j, lives at
/// `i * (i - 1) / 2 + j`.
fn pair_to_indices(pair_index: usize) -> (usize, usize) {
    let mut i = ((1.0 + (1.0 + 8.0 * pair_index as f64).sqrt()) / 2.0).floor() as usize;
    while i > 0 && i * (i - 1) / 2 > pair_index {
        i -= 1;
    }
    while (i + 1) * i / 2 <= pair_index {
        i += 1;
    }
    (i, pair_index - i * (i - 1) / 2)
}

fn pair_dissimilarity(a: &[u8], b: &[u8], mode: BinaryMode) -> (f64, bool) {
    match mode {
        BinaryMode::Symmetric => {
            let mismatches = a.iter().zip(b).filter(|(x, y)| x != y).count();
            (mismatches as f64 / a.len() as f64, false)
        }
        BinaryMode::Asymmetric => {
            let mut mismatches = 0usize;
            let mut informative = 0usize;
            for (x, y) in a.iter().zip(b) {
                if *x == 0 && *y == 0 {
                    continue;
                }
                informative += 1;
                if x != y {
                    mismatches += 1;
                }
            }
            if informative == 0 {
                (0.0, true)
            } else {
                (mismatches as f64 / informative as f64, false)
            }
        }
    }
}

/// Compute the Gower dissimilarity of every row pair. With `parallel` the
/// pairs are evaluated concurrently; every cell is computed independently
/// so the result is identical to the sequential path.
pub fn gower_dissimilarity(
    matrix: &StateYearPolicyMatrix,
    mode: BinaryMode,
    parallel: bool,
) -> Result<DissimilarityMatrix> {
    let n = matrix.n_rows();
    if n < 2 {
        return Err(Error::Data(format!(
            "dissimilarity needs at least two rows, found {n}"
        )));
    }
    if matrix.n_cols() == 0 {
        return Err(Error::Data("dissimilarity needs at least one column".into()));
    }

    let cell = |pair_index: usize| -> (f64, bool) {
        let (i, j) = pair_to_indices(pair_index);
        pair_dissimilarity(matrix.row(i), matrix.row(j), mode)
    };

    let n_pairs = n * (n - 1) / 2;
    let cells: Vec<(f64, bool)> = if parallel {
        (0..n_pairs).into_par_iter().map(cell).collect()
    } else {
        (0..n_pairs).map(cell).collect()
    };

    let mut condensed = Vec::with_capacity(n_pairs);
    let mut empty_pairs = Vec::new();
    for (idx, (d, empty)) in cells.into_iter().enumerate() {
        condensed.push(d);
        if empty {
            let (i, j) = pair_to_indices(idx);
            log::warn!(
                "no informative column for rows {:?} and {:?}; dissimilarity set to 0",
                matrix.row_keys[i],
                matrix.row_keys[j]
            );
            empty_pairs.push((i, j));
        }
    }
    Ok(DissimilarityMatrix {
        keys: matrix.row_keys.clone(),
        condensed,
        empty_denominator_pairs: empty_pairs,
    })
}
