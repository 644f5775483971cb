//! Binary class label shared across ingestion, classification, and reporting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    NonSeizure,
    Seizure,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::NonSeizure, ClassLabel::Seizure];

    pub fn index(self) -> usize {
        match self {
            ClassLabel::NonSeizure => 0,
            ClassLabel::Seizure => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<ClassLabel> {
        match i {
            0 => Some(ClassLabel::NonSeizure),
            1 => Some(ClassLabel::Seizure),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::NonSeizure => write!(f, "NonSeizure"),
            ClassLabel::Seizure => write!(f, "Seizure"),
        }
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NonSeizure" => Ok(ClassLabel::NonSeizure),
            "Seizure" => Ok(ClassLabel::Seizure),
            other => Err(Error::CsvSchema(format!("unknown class label {other:?}"))),
        }
    }
}
