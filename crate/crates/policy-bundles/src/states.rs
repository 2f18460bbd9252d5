use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The 50 states plus DC, in alphabetical code order.
pub const STATE_CODES: [&str; 51] = [
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA", "HI", "IA", "ID", "IL",
    "IN", "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE",
    "NH", "NJ", "NM", "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT",
    "VA", "VT", "WA", "WI", "WV", "WY",
];

/// A jurisdiction code, stored as an index into [`STATE_CODES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateCode(u8);

impl StateCode {
    pub fn parse(code: &str) -> Option<StateCode> {
        STATE_CODES
            .binary_search(&code)
            .ok()
            .map(|i| StateCode(i as u8))
    }

    pub fn parse_at_line(code: &str, line: u64) -> Result<StateCode> {
        StateCode::parse(code).ok_or_else(|| Error::UnknownJurisdiction {
            line,
            value: code.to_string(),
        })
    }

    pub fn as_str(&self) -> &'static str {
        STATE_CODES[self.0 as usize]
    }

    pub fn index(&self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = StateCode> {
        (0..STATE_CODES.len() as u8).map(StateCode)
    }
}

impl fmt::Display for StateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for StateCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for StateCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        StateCode::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown jurisdiction `{s}`")))
    }
}

/// Gender level from the mortality extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "Female" | "F" => Some(Gender::Female),
            "Male" | "M" => Some(Gender::Male),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Female => "Female",
            Gender::Male => "Male",
        }
    }

    pub fn both() -> [Gender; 2] {
        [Gender::Female, Gender::Male]
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
