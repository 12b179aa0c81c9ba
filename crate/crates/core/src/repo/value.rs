//! Typed property values.
//!
//! A property value is either a single scalar or a homogeneous list of
//! scalars. The eight data kinds are the ones a repository type system can
//! declare; nothing else is representable.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value as Json;

use super::error::RepoError;

/// Data kind of a property definition or value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    String,
    Boolean,
    Integer,
    Decimal,
    #[serde(rename = "datetime")]
    DateTime,
    Uri,
    Id,
    Html,
}

impl DataKind {
    pub const ALL: [DataKind; 8] = [
        DataKind::String,
        DataKind::Boolean,
        DataKind::Integer,
        DataKind::Decimal,
        DataKind::DateTime,
        DataKind::Uri,
        DataKind::Id,
        DataKind::Html,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataKind::String => "string",
            DataKind::Boolean => "boolean",
            DataKind::Integer => "integer",
            DataKind::Decimal => "decimal",
            DataKind::DateTime => "datetime",
            DataKind::Uri => "uri",
            DataKind::Id => "id",
            DataKind::Html => "html",
        }
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataKind {
    type Err = RepoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RepoError::InvalidArgument(format!("unknown data kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    Single,
    Multi,
}

/// An exact decimal number kept in its textual form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal(String);

impl Decimal {
    pub fn parse(s: &str) -> Result<Self, RepoError> {
        let body = s.strip_prefix('-').unwrap_or(s);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        if digits(int) && frac.is_none_or(digits) {
            Ok(Decimal(s.to_string()))
        } else {
            Err(RepoError::InvalidArgument(format!("`{s}` is not a decimal number")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Truncates a timestamp to millisecond precision.
pub fn to_millis(t: DateTime<Utc>) -> DateTime<Utc> {
    Utc.timestamp_millis_opt(t.timestamp_millis())
        .single()
        .expect("millisecond timestamp in range")
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    String(String),
    Boolean(bool),
    Integer(BigInt),
    Decimal(Decimal),
    DateTime(DateTime<Utc>),
    Uri(String),
    Id(String),
    Html(String),
}

impl Scalar {
    pub fn kind(&self) -> DataKind {
        match self {
            Scalar::String(_) => DataKind::String,
            Scalar::Boolean(_) => DataKind::Boolean,
            Scalar::Integer(_) => DataKind::Integer,
            Scalar::Decimal(_) => DataKind::Decimal,
            Scalar::DateTime(_) => DataKind::DateTime,
            Scalar::Uri(_) => DataKind::Uri,
            Scalar::Id(_) => DataKind::Id,
            Scalar::Html(_) => DataKind::Html,
        }
    }

    /// Parses the textual form of a value of `kind`, as typed on a command line.
    pub fn parse(kind: DataKind, text: &str) -> Result<Scalar, RepoError> {
        let bad = || RepoError::InvalidArgument(format!("`{text}` is not a valid {kind} value"));
        Ok(match kind {
            DataKind::String => Scalar::String(text.to_string()),
            DataKind::Boolean => Scalar::Boolean(text.parse().map_err(|_| bad())?),
            DataKind::Integer => Scalar::Integer(text.parse().map_err(|_| bad())?),
            DataKind::Decimal => Scalar::Decimal(Decimal::parse(text)?),
            DataKind::DateTime => Scalar::DateTime(to_millis(
                DateTime::parse_from_rfc3339(text)
                    .map_err(|_| bad())?
                    .with_timezone(&Utc),
            )),
            DataKind::Uri => Scalar::Uri(text.to_string()),
            DataKind::Id => Scalar::Id(text.to_string()),
            DataKind::Html => Scalar::Html(text.to_string()),
        })
    }

    fn to_json(&self) -> Json {
        match self {
            Scalar::String(s) | Scalar::Uri(s) | Scalar::Id(s) | Scalar::Html(s) => Json::String(s.clone()),
            Scalar::Boolean(b) => Json::Bool(*b),
            Scalar::Integer(i) => match i64::try_from(i) {
                Ok(small) => Json::from(small),
                Err(_) => Json::String(i.to_string()),
            },
            Scalar::Decimal(d) => Json::String(d.0.clone()),
            Scalar::DateTime(t) => Json::String(format_timestamp(t)),
        }
    }

    fn from_json(kind: DataKind, json: &Json) -> Result<Scalar, String> {
        let text = || {
            json.as_str()
                .ok_or_else(|| format!("expected a {kind} string, got {json}"))
        };
        Ok(match kind {
            DataKind::Boolean => Scalar::Boolean(
                json.as_bool()
                    .ok_or_else(|| format!("expected a boolean, got {json}"))?,
            ),
            DataKind::Integer => match json {
                Json::Number(n) if n.is_i64() || n.is_u64() => {
                    Scalar::Integer(n.to_string().parse().map_err(|_| "bad integer".to_string())?)
                }
                Json::String(s) => Scalar::Integer(s.parse().map_err(|_| format!("`{s}` is not an integer"))?),
                other => return Err(format!("expected an integer, got {other}")),
            },
            other => Scalar::parse(other, text()?).map_err(|e| e.to_string())?,
        })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::String(s) | Scalar::Uri(s) | Scalar::Id(s) | Scalar::Html(s) => f.write_str(s),
            Scalar::Boolean(b) => write!(f, "{b}"),
            Scalar::Integer(i) => write!(f, "{i}"),
            Scalar::Decimal(d) => write!(f, "{d}"),
            Scalar::DateTime(t) => f.write_str(&format_timestamp(t)),
        }
    }
}

/// The value of one property: a scalar, or a homogeneous list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyValue {
    Single(Scalar),
    Multi { kind: DataKind, values: Vec<Scalar> },
}

impl PropertyValue {
    pub fn string(s: impl Into<String>) -> Self {
        PropertyValue::Single(Scalar::String(s.into()))
    }

    pub fn boolean(b: bool) -> Self {
        PropertyValue::Single(Scalar::Boolean(b))
    }

    pub fn integer(i: impl Into<BigInt>) -> Self {
        PropertyValue::Single(Scalar::Integer(i.into()))
    }

    pub fn decimal(s: &str) -> Result<Self, RepoError> {
        Ok(PropertyValue::Single(Scalar::Decimal(Decimal::parse(s)?)))
    }

    pub fn datetime(t: DateTime<Utc>) -> Self {
        PropertyValue::Single(Scalar::DateTime(to_millis(t)))
    }

    pub fn id(s: impl Into<String>) -> Self {
        PropertyValue::Single(Scalar::Id(s.into()))
    }

    pub fn uri(s: impl Into<String>) -> Self {
        PropertyValue::Single(Scalar::Uri(s.into()))
    }

    pub fn html(s: impl Into<String>) -> Self {
        PropertyValue::Single(Scalar::Html(s.into()))
    }

    /// Builds a list value, rejecting mixed kinds.
    pub fn multi(kind: DataKind, values: Vec<Scalar>) -> Result<Self, RepoError> {
        if let Some(bad) = values.iter().find(|v| v.kind() != kind) {
            return Err(RepoError::InvalidArgument(format!(
                "list of {kind} contains a {} value",
                bad.kind()
            )));
        }
        Ok(PropertyValue::Multi { kind, values })
    }

    pub fn kind(&self) -> DataKind {
        match self {
            PropertyValue::Single(s) => s.kind(),
            PropertyValue::Multi { kind, .. } => *kind,
        }
    }

    pub fn cardinality(&self) -> Cardinality {
        match self {
            PropertyValue::Single(_) => Cardinality::Single,
            PropertyValue::Multi { .. } => Cardinality::Multi,
        }
    }

    pub fn as_single(&self) -> Option<&Scalar> {
        match self {
            PropertyValue::Single(s) => Some(s),
            PropertyValue::Multi { .. } => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self.as_single()? {
            Scalar::String(s) | Scalar::Uri(s) | Scalar::Id(s) | Scalar::Html(s) => Some(s),
            _ => None,
        }
    }

    /// All scalars, whether single or multi.
    pub fn scalars(&self) -> &[Scalar] {
        match self {
            PropertyValue::Single(s) => std::slice::from_ref(s),
            PropertyValue::Multi { values, .. } => values,
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Single(s) => write!(f, "{s}"),
            PropertyValue::Multi { values, .. } => {
                f.write_str("[")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

// Wire form: {"kind": "<kind>", "value": <scalar or array>}.
impl Serialize for PropertyValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let value = match self {
            PropertyValue::Single(s) => s.to_json(),
            PropertyValue::Multi { values, .. } => Json::Array(values.iter().map(Scalar::to_json).collect()),
        };
        let mut st = serializer.serialize_struct("PropertyValue", 2)?;
        st.serialize_field("kind", &self.kind())?;
        st.serialize_field("value", &value)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PropertyValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: DataKind,
            value: Json,
        }
        let raw = Raw::deserialize(deserializer)?;
        match &raw.value {
            Json::Array(items) => {
                let values = items
                    .iter()
                    .map(|j| Scalar::from_json(raw.kind, j))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(D::Error::custom)?;
                Ok(PropertyValue::Multi { kind: raw.kind, values })
            }
            single => Scalar::from_json(raw.kind, single)
                .map(PropertyValue::Single)
                .map_err(D::Error::custom),
        }
    }
}
