//! Mortality and covariate file parsing.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{Gender, StateCode};

/// One death-count row from the mortality extract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub state: StateCode,
    pub year: i32,
    pub gender: Gender,
    pub deaths: u64,
    pub population: u64,
}

/// One state-year covariate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateRecord {
    pub state: StateCode,
    pub year: i32,
    /// Prescriptions per 100 persons.
    pub prescribing_rate: f64,
    pub gini: f64,
    /// Median household income, thousands.
    pub income: f64,
}

#[derive(Debug, Clone)]
pub struct ParsedOutcomes {
    pub records: Vec<OutcomeRecord>,
    /// Rows whose raw deaths token was the suppression literal.
    pub suppressed_count: usize,
}

/// Small-count suppression marker used by the mortality source.
pub const SUPPRESSED_TOKEN: &str = "Suppressed";

/// Default fill for suppressed cells: the median of the censored 0-10 range.
pub const DEFAULT_SUPPRESSION_FILL: u64 = 5;

fn parse_year(field: &str, line: u64) -> Result<i32> {
    field.trim().parse().map_err(|_| Error::MalformedRecord {
        line,
        message: format!("invalid year `{field}`"),
    })
}

/// Parse `state,year,gender,deaths,population` rows. The deaths field is a
/// nonnegative integer or the literal `Suppressed`, which is replaced by
/// `suppression_fill`.
pub fn parse_outcome_records<R: Read>(reader: R, suppression_fill: u64) -> Result<ParsedOutcomes> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut records = Vec::new();
    let mut suppressed_count = 0;
    let mut seen = std::collections::BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Data(format!("outcome file: {e}")))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 5 {
            return Err(Error::MalformedRecord {
                line,
                message: format!("expected 5 fields, found {}", row.len()),
            });
        }
        let state = StateCode::parse_at_line(&row[0], line)?;
        let year = parse_year(&row[1], line)?;
        let gender = Gender::parse(row[2].trim()).ok_or_else(|| Error::MalformedRecord {
            line,
            message: format!("invalid gender `{}`", &row[2]),
        })?;
        let deaths = match row[3].trim() {
            SUPPRESSED_TOKEN => {
                suppressed_count += 1;
                suppression_fill
            }
            s => s.parse::<i64>().ok().filter(|&d| d >= 0).map(|d| d as u64).ok_or_else(|| {
                Error::MalformedRecord {
                    line,
                    message: format!("invalid deaths count `{s}`"),
                }
            })?,
        };
        let population = row[4]
            .trim()
            .parse::<i64>()
            .ok()
            .filter(|&p| p > 0)
            .map(|p| p as u64)
            .ok_or_else(|| Error::MalformedRecord {
                line,
                message: format!("population must be a positive integer, found `{}`", &row[4]),
            })?;
        if !seen.insert((state, year, gender)) {
            return Err(Error::MalformedRecord {
                line,
                message: format!("duplicate outcome row for {state} {year} {gender}"),
            });
        }
        records.push(OutcomeRecord {
            state,
            year,
            gender,
            deaths,
            population,
        });
    }
    Ok(ParsedOutcomes {
        records,
        suppressed_count,
    })
}

/// Parse `state,year,prescribing_rate,gini,income` rows.
pub fn parse_covariate_records<R: Read>(reader: R) -> Result<Vec<CovariateRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut records = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Data(format!("covariate file: {e}")))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 5 {
            return Err(Error::MalformedRecord {
                line,
                message: format!("expected 5 fields, found {}", row.len()),
            });
        }
        let state = StateCode::parse_at_line(&row[0], line)?;
        let year = parse_year(&row[1], line)?;
        let field = |idx: usize, name: &str| -> Result<f64> {
            row[idx].trim().parse().map_err(|_| Error::MalformedRecord {
                line,
                message: format!("invalid {name} `{}`", &row[idx]),
            })
        };
        let prescribing_rate = field(2, "prescribing_rate")?;
        let gini = field(3, "gini")?;
        let income = field(4, "income")?;
        if prescribing_rate < 0.0 {
            return Err(Error::MalformedRecord {
                line,
                message: format!("prescribing_rate must be nonnegative, found {prescribing_rate}"),
            });
        }
        if !(0.0 < gini && gini < 1.0) {
            return Err(Error::MalformedRecord {
                line,
                message: format!("gini must lie in (0,1), found {gini}"),
            });
        }
        if !seen.insert((state, year)) {
            return Err(Error::MalformedRecord {
                line,
                message: format!("duplicate covariate row for {state} {year}"),
            });
        }
        records.push(CovariateRecord {
            state,
            year,
            prescribing_rate,
            gini,
            income,
        });
    }
    Ok(records)
}
