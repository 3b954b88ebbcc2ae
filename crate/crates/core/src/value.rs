//! Column types and typed scalar values shared by the catalog, the ETL and the cube.
//!
//! DECIMAL values are carried as scaled 64-bit integers so that every aggregation
//! path stays exact.

use std::cmp::Ordering;
use std::fmt;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

/// Largest DECIMAL precision representable in a scaled `i64`.
pub const MAX_DECIMAL_PRECISION: u8 = 18;

/// A column type from the supported DDL subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DataType {
    Integer,
    BigInt,
    Decimal { precision: u8, scale: u8 },
    Varchar(u32),
    Date,
    Timestamp,
    Boolean,
}

impl DataType {
    pub fn is_numeric(&self) -> bool {
        matches!(self, DataType::Integer | DataType::BigInt | DataType::Decimal { .. })
    }

    /// Scale used when a value of this type is stored as a scaled integer.
    pub fn scale(&self) -> u8 {
        match self {
            DataType::Decimal { scale, .. } => *scale,
            _ => 0,
        }
    }

    /// Parses a type name such as `INTEGER`, `decimal(10, 2)` or `VARCHAR(40)`.
    pub fn parse(text: &str) -> Result<DataType, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let upper = compact.to_ascii_uppercase();
        let (name, args) = match upper.find('(') {
            Some(open) if upper.ends_with(')') => {
                let inner = &upper[open + 1..upper.len() - 1];
                let args = inner
                    .split(',')
                    .map(|a| a.parse::<u64>().map_err(|_| format!("invalid type argument in `{text}`")))
                    .collect::<Result<Vec<_>, _>>()?;
                (&upper[..open], args)
            }
            Some(_) => return Err(format!("malformed type `{text}`")),
            None => (upper.as_str(), Vec::new()),
        };
        DataType::from_parts(name, &args).map_err(|e| format!("{e} (in `{text}`)"))
    }

    /// Builds a type from an upper-case name and its numeric arguments.
    pub(crate) fn from_parts(name: &str, args: &[u64]) -> Result<DataType, String> {
        let no_args = |t: DataType| {
            if args.is_empty() {
                Ok(t)
            } else {
                Err(format!("{name} takes no arguments"))
            }
        };
        match name {
            "INTEGER" => no_args(DataType::Integer),
            "BIGINT" => no_args(DataType::BigInt),
            "DATE" => no_args(DataType::Date),
            "TIMESTAMP" => no_args(DataType::Timestamp),
            "BOOLEAN" => no_args(DataType::Boolean),
            "VARCHAR" => match args {
                [n] if *n >= 1 && *n <= u32::MAX as u64 => Ok(DataType::Varchar(*n as u32)),
                [_] => Err("VARCHAR length out of range".to_string()),
                _ => Err("VARCHAR requires a length".to_string()),
            },
            "DECIMAL" => match args {
                [p, s] => {
                    if *p == 0 || *p > MAX_DECIMAL_PRECISION as u64 {
                        Err(format!("DECIMAL precision must be 1..={MAX_DECIMAL_PRECISION}"))
                    } else if s > p {
                        Err("DECIMAL scale exceeds precision".to_string())
                    } else {
                        Ok(DataType::Decimal { precision: *p as u8, scale: *s as u8 })
                    }
                }
                _ => Err("DECIMAL requires (precision, scale)".to_string()),
            },
            other => Err(format!("unsupported type {other}")),
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Integer => f.write_str("INTEGER"),
            DataType::BigInt => f.write_str("BIGINT"),
            DataType::Decimal { precision, scale } => write!(f, "DECIMAL({precision},{scale})"),
            DataType::Varchar(n) => write!(f, "VARCHAR({n})"),
            DataType::Date => f.write_str("DATE"),
            DataType::Timestamp => f.write_str("TIMESTAMP"),
            DataType::Boolean => f.write_str("BOOLEAN"),
        }
    }
}

impl From<DataType> for String {
    fn from(t: DataType) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for DataType {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        DataType::parse(&s)
    }
}

/// An exact decimal: `units / 10^scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    pub units: i64,
    pub scale: u8,
}

impl Decimal {
    pub fn new(units: i64, scale: u8) -> Self {
        Decimal { units, scale }
    }

    /// Parses plain decimal notation (`-12.5`, `3`, `.75`) into exactly `scale` fractional digits.
    /// Inputs with more fractional digits than `scale` are rejected rather than rounded.
    pub fn parse(text: &str, scale: u8) -> Result<Decimal, String> {
        let (negative, body) = match text.as_bytes().first() {
            Some(b'-') => (true, &text[1..]),
            Some(b'+') => (false, &text[1..]),
            _ => (false, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("`{text}` is not a number"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("`{text}` is not a number"));
        }
        if frac_part.len() > scale as usize {
            return Err(format!("`{text}` has more than {scale} fractional digits"));
        }
        let mut units: i64 = 0;
        let overflow = || format!("`{text}` is out of range");
        for b in int_part.bytes().chain(frac_part.bytes()) {
            units = units.checked_mul(10).and_then(|u| u.checked_add((b - b'0') as i64)).ok_or_else(overflow)?;
        }
        for _ in frac_part.len()..scale as usize {
            units = units.checked_mul(10).ok_or_else(overflow)?;
        }
        Ok(Decimal { units: if negative { -units } else { units }, scale })
    }

    /// Number of significant digits, ignoring sign.
    pub fn digits(&self) -> u32 {
        let mut n = self.units.unsigned_abs();
        let mut d = 1;
        while n >= 10 {
            n /= 10;
            d += 1;
        }
        d
    }

    fn cmp_value(&self, other: &Decimal) -> Ordering {
        let common = self.scale.max(other.scale);
        let lhs = self.units as i128 * 10i128.pow((common - self.scale) as u32);
        let rhs = other.units as i128 * 10i128.pow((common - other.scale) as u32);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.units);
        }
        let pow = 10u64.pow(self.scale as u32);
        let abs = self.units.unsigned_abs();
        let sign = if self.units < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:0width$}", abs / pow, abs % pow, width = self.scale as usize)
    }
}

/// A typed cell value. `Null` sorts after every other value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Null,
    Int(i64),
    Decimal(Decimal),
    Text(String),
    Date(NaiveDate),
    Timestamp(NaiveDateTime),
    Bool(bool),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Parses `text` as a non-null value of type `ty`.
    pub fn parse(text: &str, ty: &DataType) -> Result<Value, String> {
        match ty {
            DataType::Integer => {
                text.parse::<i32>().map(|v| Value::Int(v as i64)).map_err(|_| format!("`{text}` is not an INTEGER"))
            }
            DataType::BigInt => text.parse::<i64>().map(Value::Int).map_err(|_| format!("`{text}` is not a BIGINT")),
            DataType::Decimal { precision, scale } => {
                let d = Decimal::parse(text, *scale)?;
                if d.digits() > *precision as u32 {
                    return Err(format!("`{text}` exceeds DECIMAL({precision},{scale})"));
                }
                Ok(Value::Decimal(d))
            }
            DataType::Varchar(n) => {
                if text.chars().count() > *n as usize {
                    Err(format!("value longer than VARCHAR({n})"))
                } else {
                    Ok(Value::Text(text.to_string()))
                }
            }
            DataType::Date => parse_date(text).map(Value::Date),
            DataType::Timestamp => {
                if text.len() != 19 {
                    return Err(format!("`{text}` is not a TIMESTAMP (YYYY-MM-DDTHH:MM:SS)"));
                }
                NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S")
                    .map(Value::Timestamp)
                    .map_err(|_| format!("`{text}` is not a TIMESTAMP (YYYY-MM-DDTHH:MM:SS)"))
            }
            DataType::Boolean => match text.to_ascii_lowercase().as_str() {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(format!("`{text}` is not a BOOLEAN")),
            },
        }
    }

    /// Scaled-integer view used by the aggregation paths.
    pub fn as_scaled(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Decimal(d) => Some(d.units),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) | Value::Decimal(_) => 1,
            Value::Date(_) => 2,
            Value::Timestamp(_) => 3,
            Value::Text(_) => 4,
            Value::Null => 5,
        }
    }
}

pub(crate) fn parse_date(text: &str) -> Result<NaiveDate, String> {
    if text.len() != 10 {
        return Err(format!("`{text}` is not a DATE (YYYY-MM-DD)"));
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| format!("`{text}` is not a DATE (YYYY-MM-DD)"))
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Int(a), Value::Decimal(b)) => Decimal::new(*a, 0).cmp_value(b),
            (Value::Decimal(a), Value::Int(b)) => a.cmp_value(&Decimal::new(*b, 0)),
            (Value::Decimal(a), Value::Decimal(b)) => a.cmp_value(b).then(a.scale.cmp(&b.scale)),
            (Value::Text(a), Value::Text(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Timestamp(a), Value::Timestamp(b)) => a.cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Renders values the way they appear in CSV files and API responses. `Null` renders empty.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(v) => write!(f, "{v}"),
            Value::Decimal(d) => write!(f, "{d}"),
            Value::Text(s) => f.write_str(s),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::Timestamp(t) => write!(f, "{}", t.format("%Y-%m-%dT%H:%M:%S")),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<NaiveDate> for Value {
    fn from(d: NaiveDate) -> Self {
        Value::Date(d)
    }
}
