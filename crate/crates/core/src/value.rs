//! Scalar property values and the data types used by the schema DDL.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// A tagged property value.
///
/// Equality and ordering are exact: values with different tags never compare
/// equal, so `Int(1)` and `Str("1")` are distinct members of a value set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Date(NaiveDate),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    /// Parses `YYYY-MM-DD`.
    pub fn date(s: &str) -> Option<Self> {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().map(Value::Date)
    }

    pub fn tag(&self) -> ValueTag {
        match self {
            Value::Int(_) => ValueTag::Int,
            Value::Bool(_) => ValueTag::Bool,
            Value::Str(_) => ValueTag::Str,
            Value::Date(_) => ValueTag::Date,
        }
    }

    /// The data type this value stands for, if it is a reserved type token.
    pub fn as_type_token(&self) -> Option<DataType> {
        match self {
            Value::Str(s) => DataType::from_token_str(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueTag {
    Int,
    Bool,
    Str,
    Date,
}

/// Data types of the DDL.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DataType {
    String,
    Integer,
    Timestamp,
    Date,
    Boolean,
}

impl DataType {
    pub const ALL: [DataType; 5] = [
        DataType::String,
        DataType::Integer,
        DataType::Timestamp,
        DataType::Date,
        DataType::Boolean,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            DataType::String => "STRING",
            DataType::Integer => "INTEGER",
            DataType::Timestamp => "TIMESTAMP",
            DataType::Date => "DATE",
            DataType::Boolean => "BOOLEAN",
        }
    }

    /// The reserved string value that stands for "any value of this type" in
    /// symbolic schemas, e.g. `$STRING$`.
    pub fn token(self) -> Value {
        Value::Str(format!("${}$", self.keyword()))
    }

    fn from_token_str(s: &str) -> Option<DataType> {
        let inner = s.strip_prefix('$')?.strip_suffix('$')?;
        inner.parse().ok()
    }

    /// Whether a concrete (non-token) value inhabits this type.
    pub fn accepts(self, value: &Value) -> bool {
        if value.as_type_token().is_some() {
            return false;
        }
        matches!(
            (self, value),
            (DataType::String, Value::Str(_))
                | (DataType::Integer, Value::Int(_))
                | (DataType::Boolean, Value::Bool(_))
                | (DataType::Date, Value::Date(_))
                | (DataType::Timestamp, Value::Date(_))
        )
    }

    /// The narrowest data type for a value tag.
    pub fn for_tag(tag: ValueTag) -> DataType {
        match tag {
            ValueTag::Int => DataType::Integer,
            ValueTag::Bool => DataType::Boolean,
            ValueTag::Str => DataType::String,
            ValueTag::Date => DataType::Date,
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for DataType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataType::ALL
            .into_iter()
            .find(|t| t.keyword() == s)
            .ok_or(())
    }
}
