//! Policy-record parsing and conversion to yearly in-force indicators.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::StateCode;

/// One law in one state, with its effective interval. An absent
/// `valid_through` means the law is still in force.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub state: StateCode,
    pub policy_id: String,
    pub effective_date: NaiveDate,
    pub valid_through: Option<NaiveDate>,
}

/// Binary in-force matrix: rows are (state, year), columns are policy ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateYearPolicyMatrix {
    pub row_keys: Vec<(StateCode, i32)>,
    pub col_keys: Vec<String>,
    /// Row-major cells, `rows.len() * cols.len()` entries of 0/1.
    pub cells: Vec<u8>,
}

impl StateYearPolicyMatrix {
    pub fn n_rows(&self) -> usize {
        self.row_keys.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_keys.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.col_keys.len() + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        let p = self.col_keys.len();
        &self.cells[row * p..(row + 1) * p]
    }

    pub fn row_index(&self, state: StateCode, year: i32) -> Option<usize> {
        self.row_keys.binary_search(&(state, year)).ok()
    }
}

fn parse_date(field: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d").map_err(|_| Error::MalformedDate {
        line,
        value: field.to_string(),
    })
}

/// Parse `state,policy_id,effective_date,valid_through` rows. The header
/// line is required; dates are ISO-8601 and `valid_through` may be empty.
pub fn parse_policy_records<R: Read>(reader: R) -> Result<Vec<PolicyRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Data(format!("policy file: {e}")))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 4 {
            return Err(Error::MalformedRecord {
                line,
                message: format!("expected 4 fields, found {}", row.len()),
            });
        }
        let state = StateCode::parse_at_line(&row[0], line)?;
        let policy_id = row[1].trim().to_string();
        if policy_id.is_empty() {
            return Err(Error::MalformedRecord {
                line,
                message: "empty policy_id".into(),
            });
        }
        let effective_date = parse_date(&row[2], line)?;
        let valid_through = match row[3].trim() {
            "" => None,
            s => Some(parse_date(s, line)?),
        };
        if let Some(vt) = valid_through {
            if effective_date > vt {
                return Err(Error::InvertedInterval {
                    line,
                    effective: effective_date,
                    valid_through: vt,
                });
            }
        }
        records.push(PolicyRecord {
            state,
            policy_id,
            effective_date,
            valid_through,
        });
    }
    Ok(records)
}

fn days_in_year(year: i32) -> i64 {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(year + 1, 1, 1).unwrap();
    (end - start).num_days()
}

/// Days of `year` covered by the closed interval `[eff, vt]`
/// (open-ended when `vt` is `None`).
fn covered_days(eff: NaiveDate, vt: Option<NaiveDate>, year: i32) -> i64 {
    let year_start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
    let year_end = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
    let start = eff.max(year_start);
    let end = vt.map_or(year_end, |d| d.min(year_end));
    if start > end {
        0
    } else {
        (end - start).num_days() + 1
    }
}

/// Merge a set of closed date intervals into a disjoint union. Adjacent
/// intervals are joined so day counting over the result equals counting
/// over the set union.
fn merge_intervals(mut intervals: Vec<(NaiveDate, Option<NaiveDate>)>) -> Vec<(NaiveDate, Option<NaiveDate>)> {
    intervals.sort_by_key(|(s, e)| (*s, e.is_none(), *e));
    let mut merged: Vec<(NaiveDate, Option<NaiveDate>)> = Vec::new();
    for (start, end) in intervals {
        match merged.last_mut() {
            Some((_, cur_end)) => {
                let extendable = match cur_end {
                    None => true,
                    Some(ce) => start <= ce.succ_opt().unwrap_or(*ce),
                };
                if extendable {
                    *cur_end = match (*cur_end, end) {
                        (None, _) | (_, None) => None,
                        (Some(a), Some(b)) => Some(a.max(b)),
                    };
                } else {
                    merged.push((start, end));
                }
            }
            None => merged.push((start, end)),
        }
    }
    merged
}

/// Build the binary state-year matrix from validated records. A cell is 1
/// when the union of the law's intervals covers a strict majority of the
/// days of that calendar year. Rows are emitted for every state in
/// `states`, so jurisdictions with no records contribute all-zero rows.
pub fn derive_in_force_years(
    records: &[PolicyRecord],
    states: &[StateCode],
    years: std::ops::RangeInclusive<i32>,
) -> StateYearPolicyMatrix {
    let mut by_key: BTreeMap<(StateCode, &str), Vec<(NaiveDate, Option<NaiveDate>)>> =
        BTreeMap::new();
    let mut policy_ids: BTreeSet<&str> = BTreeSet::new();
    for r in records {
        policy_ids.insert(&r.policy_id);
        by_key
            .entry((r.state, &r.policy_id))
            .or_default()
            .push((r.effective_date, r.valid_through));
    }

    let col_keys: Vec<String> = policy_ids.iter().map(|s| s.to_string()).collect();
    let col_index: BTreeMap<&str, usize> = policy_ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();

    let mut sorted_states = states.to_vec();
    sorted_states.sort_unstable();
    sorted_states.dedup();

    let mut row_keys = Vec::new();
    for state in &sorted_states {
        for year in years.clone() {
            row_keys.push((*state, year));
        }
    }
    let row_index: BTreeMap<(StateCode, i32), usize> =
        row_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();

    let p = col_keys.len();
    let mut cells = vec![0u8; row_keys.len() * p];
    for ((state, policy), intervals) in by_key {
        let col = col_index[policy];
        let merged = merge_intervals(intervals);
        for year in years.clone() {
            let covered: i64 = merged
                .iter()
                .map(|(s, e)| covered_days(*s, *e, year))
                .sum();
            if covered * 2 > days_in_year(year) {
                if let Some(&row) = row_index.get(&(state, year)) {
                    cells[row * p + col] = 1;
                }
            }
        }
    }

    StateYearPolicyMatrix {
        row_keys,
        col_keys,
        cells,
    }
}

/// Why a column was removed from the clustering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropCause {
    /// Named on the exclusion list.
    Excluded,
    /// No variation over the analysis rows.
    Fixed,
}

impl DropCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            DropCause::Excluded => "excluded",
            DropCause::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FilterReport {
    pub dropped: Vec<(String, DropCause)>,
    /// Exclusion-list entries that were not present in the matrix.
    pub warnings: Vec<String>,
}

/// Remove excluded columns and columns without variation, reporting each
/// dropped column with its cause.
pub fn filter_policy_variables(
    matrix: &StateYearPolicyMatrix,
    excluded_ids: &[String],
) -> (StateYearPolicyMatrix, FilterReport) {
    let excluded: BTreeSet<&str> = excluded_ids.iter().map(|s| s.as_str()).collect();
    let mut report = FilterReport::default();
    for id in &excluded {
        if !matrix.col_keys.iter().any(|c| c == id) {
            report.warnings.push(format!("excluded policy `{id}` not present in matrix"));
        }
    }

    let n = matrix.n_rows();
    let mut keep = Vec::new();
    for (j, id) in matrix.col_keys.iter().enumerate() {
        if excluded.contains(id.as_str()) {
            report.dropped.push((id.clone(), DropCause::Excluded));
            continue;
        }
        let ones: usize = (0..n).map(|i| matrix.cell(i, j) as usize).sum();
        if n > 0 && (ones == 0 || ones == n) {
            report.dropped.push((id.clone(), DropCause::Fixed));
            continue;
        }
        keep.push(j);
    }

    let col_keys: Vec<String> = keep.iter().map(|&j| matrix.col_keys[j].clone()).collect();
    let mut cells = Vec::with_capacity(n * keep.len());
    for i in 0..n {
        for &j in &keep {
            cells.push(matrix.cell(i, j));
        }
    }
    (
        StateYearPolicyMatrix {
            row_keys: matrix.row_keys.clone(),
            col_keys,
            cells,
        },
        report,
    )
}
