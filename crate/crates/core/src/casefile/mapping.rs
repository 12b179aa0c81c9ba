//! Lookup tables between the CMMN information model and the repository
//! model: classes, case-file-item definition types and property types.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::repo::{BaseType, DataKind};

const DEFINITION_TYPE_PREFIX: &str = "http://www.omg.org/spec/CMMN/DefinitionType/";
const PROPERTY_TYPE_PREFIX: &str = "http://www.omg.org/spec/CMMN/PropertyType/";

/// CMMN information-model classes and the repository class realizing each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmmnClass {
    CaseFile,
    CaseFileItem,
    CaseFileItemDefinition,
    Property,
}

impl CmmnClass {
    pub const ALL: [CmmnClass; 4] = [
        CmmnClass::CaseFile,
        CmmnClass::CaseFileItem,
        CmmnClass::CaseFileItemDefinition,
        CmmnClass::Property,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CmmnClass::CaseFile => "CaseFile",
            CmmnClass::CaseFileItem => "CaseFileItem",
            CmmnClass::CaseFileItemDefinition => "CaseFileItemDefinition",
            CmmnClass::Property => "Property",
        }
    }

    pub fn cmis_class(self) -> &'static str {
        match self {
            CmmnClass::CaseFile => "cmis:folder",
            CmmnClass::CaseFileItem => "cmis:object",
            CmmnClass::CaseFileItemDefinition => "cmis:object Type",
            CmmnClass::Property => "cmis:property Type",
        }
    }

    pub fn from_cmis_class(class: &str) -> Option<CmmnClass> {
        CmmnClass::ALL.into_iter().find(|c| c.cmis_class() == class)
    }
}

/// Values of a case-file-item definition's `definitionType`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DefinitionType {
    CmisFolder,
    CmisDocument,
    CmisRelationship,
    XsdElement,
    XsdComplexType,
    XsdSimpleType,
    Unknown,
    Unspecified,
    CmisPolicy,
    CmisItem,
    CmisSecondary,
}

impl DefinitionType {
    pub const ALL: [DefinitionType; 11] = [
        DefinitionType::CmisFolder,
        DefinitionType::CmisDocument,
        DefinitionType::CmisRelationship,
        DefinitionType::XsdElement,
        DefinitionType::XsdComplexType,
        DefinitionType::XsdSimpleType,
        DefinitionType::Unknown,
        DefinitionType::Unspecified,
        DefinitionType::CmisPolicy,
        DefinitionType::CmisItem,
        DefinitionType::CmisSecondary,
    ];

    /// The last URI segment.
    pub fn local_name(self) -> &'static str {
        match self {
            DefinitionType::CmisFolder => "CMISFolder",
            DefinitionType::CmisDocument => "CMISDocument",
            DefinitionType::CmisRelationship => "CMISRelationship",
            DefinitionType::XsdElement => "XSDElement",
            DefinitionType::XsdComplexType => "XSDComplexType",
            DefinitionType::XsdSimpleType => "XSDSimpleType",
            DefinitionType::Unknown => "Unknown",
            DefinitionType::Unspecified => "Unspecified",
            DefinitionType::CmisPolicy => "CMISPolicy",
            DefinitionType::CmisItem => "CMISItem",
            DefinitionType::CmisSecondary => "CMISSecondary",
        }
    }

    pub fn uri(self) -> String {
        format!("{DEFINITION_TYPE_PREFIX}{}", self.local_name())
    }

    pub fn from_uri(uri: &str) -> Option<DefinitionType> {
        let local = uri.strip_prefix(DEFINITION_TYPE_PREFIX)?;
        DefinitionType::ALL.into_iter().find(|d| d.local_name() == local)
    }

    /// CMMN's own name for the definition type; `None` for the three
    /// repository extensions, which CMMN does not define.
    pub fn cmmn_name(self) -> Option<&'static str> {
        Some(match self {
            DefinitionType::CmisFolder => "CMIS Folder",
            DefinitionType::CmisDocument => "CMIS Document",
            DefinitionType::CmisRelationship => "CMIS Relationship",
            DefinitionType::XsdElement => "XML-Schema Element",
            DefinitionType::XsdComplexType => "XML Schema Complex Type",
            DefinitionType::XsdSimpleType => "XML Schema Simple Type",
            DefinitionType::Unknown => "Unknown",
            DefinitionType::Unspecified => "Unspecified",
            DefinitionType::CmisPolicy | DefinitionType::CmisItem | DefinitionType::CmisSecondary => return None,
        })
    }

    /// Whether this URI extends the CMMN 1.0 enumeration.
    pub fn is_extension(self) -> bool {
        matches!(
            self,
            DefinitionType::CmisPolicy | DefinitionType::CmisItem | DefinitionType::CmisSecondary
        )
    }

    /// The repository object type backing this definition type, if any.
    pub fn base_type(self) -> Option<BaseType> {
        match self {
            DefinitionType::CmisFolder => Some(BaseType::Folder),
            DefinitionType::CmisDocument => Some(BaseType::Document),
            DefinitionType::CmisRelationship => Some(BaseType::Relationship),
            DefinitionType::CmisPolicy => Some(BaseType::Policy),
            DefinitionType::CmisItem => Some(BaseType::Item),
            DefinitionType::CmisSecondary => Some(BaseType::Secondary),
            _ => None,
        }
    }

    pub fn from_base(base: BaseType) -> DefinitionType {
        match base {
            BaseType::Folder => DefinitionType::CmisFolder,
            BaseType::Document => DefinitionType::CmisDocument,
            BaseType::Relationship => DefinitionType::CmisRelationship,
            BaseType::Policy => DefinitionType::CmisPolicy,
            BaseType::Item => DefinitionType::CmisItem,
            BaseType::Secondary => DefinitionType::CmisSecondary,
        }
    }

    /// Definition types a plain `cmis:object` may be declared as: one per
    /// base type.
    pub fn for_cmis_object() -> [DefinitionType; 6] {
        BaseType::ALL.map(DefinitionType::from_base)
    }

    /// Counterpart in a CMMN 1.0 model.
    pub fn compat10(self) -> DefinitionType {
        if self.is_extension() {
            DefinitionType::Unknown
        } else {
            self
        }
    }
}

impl fmt::Display for DefinitionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.uri())
    }
}

/// Values of a CMMN `Property`'s `type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyType {
    String,
    Boolean,
    Integer,
    Float,
    Double,
    Duration,
    DateTime,
    Time,
    Date,
    GYearMonth,
    GYear,
    GMonthDay,
    GDay,
    GMonth,
    HexBinary,
    Base64Binary,
    AnyUri,
    QName,
    Decimal,
    Id,
    Html,
}

impl PropertyType {
    pub const ALL: [PropertyType; 21] = [
        PropertyType::String,
        PropertyType::Boolean,
        PropertyType::Integer,
        PropertyType::Float,
        PropertyType::Double,
        PropertyType::Duration,
        PropertyType::DateTime,
        PropertyType::Time,
        PropertyType::Date,
        PropertyType::GYearMonth,
        PropertyType::GYear,
        PropertyType::GMonthDay,
        PropertyType::GDay,
        PropertyType::GMonth,
        PropertyType::HexBinary,
        PropertyType::Base64Binary,
        PropertyType::AnyUri,
        PropertyType::QName,
        PropertyType::Decimal,
        PropertyType::Id,
        PropertyType::Html,
    ];

    pub fn local_name(self) -> &'static str {
        match self {
            PropertyType::String => "string",
            PropertyType::Boolean => "boolean",
            PropertyType::Integer => "integer",
            PropertyType::Float => "float",
            PropertyType::Double => "double",
            PropertyType::Duration => "duration",
            PropertyType::DateTime => "dateTime",
            PropertyType::Time => "time",
            PropertyType::Date => "date",
            PropertyType::GYearMonth => "gYearMonth",
            PropertyType::GYear => "gYear",
            PropertyType::GMonthDay => "gMonthDay",
            PropertyType::GDay => "gDay",
            PropertyType::GMonth => "gMonth",
            PropertyType::HexBinary => "hexBinary",
            PropertyType::Base64Binary => "base64Binary",
            PropertyType::AnyUri => "anyURI",
            PropertyType::QName => "QName",
            PropertyType::Decimal => "decimal",
            PropertyType::Id => "Id",
            PropertyType::Html => "HTML",
        }
    }

    pub fn uri(self) -> String {
        format!("{PROPERTY_TYPE_PREFIX}{}", self.local_name())
    }

    pub fn from_uri(uri: &str) -> Option<PropertyType> {
        let local = uri.strip_prefix(PROPERTY_TYPE_PREFIX)?;
        PropertyType::ALL.into_iter().find(|p| p.local_name() == local)
    }

    pub fn is_extension(self) -> bool {
        matches!(self, PropertyType::Decimal | PropertyType::Id | PropertyType::Html)
    }

    /// Name of the repository property type this maps to, if any.
    pub fn cmis_type(self) -> Option<&'static str> {
        match self {
            PropertyType::String => Some("xsd:string"),
            PropertyType::Boolean => Some("xsd:boolean"),
            PropertyType::Integer => Some("xsd:integer"),
            PropertyType::DateTime => Some("xsd:dateTime"),
            PropertyType::AnyUri => Some("xsd:anyURI"),
            PropertyType::Decimal => Some("xsd:decimal"),
            PropertyType::Id => Some("Id"),
            PropertyType::Html => Some("HTML"),
            _ => None,
        }
    }

    pub fn data_kind(self) -> Option<DataKind> {
        match self {
            PropertyType::String => Some(DataKind::String),
            PropertyType::Boolean => Some(DataKind::Boolean),
            PropertyType::Integer => Some(DataKind::Integer),
            PropertyType::DateTime => Some(DataKind::DateTime),
            PropertyType::AnyUri => Some(DataKind::Uri),
            PropertyType::Decimal => Some(DataKind::Decimal),
            PropertyType::Id => Some(DataKind::Id),
            PropertyType::Html => Some(DataKind::Html),
            _ => None,
        }
    }

    pub fn from_kind(kind: DataKind) -> PropertyType {
        match kind {
            DataKind::String => PropertyType::String,
            DataKind::Boolean => PropertyType::Boolean,
            DataKind::Integer => PropertyType::Integer,
            DataKind::Decimal => PropertyType::Decimal,
            DataKind::DateTime => PropertyType::DateTime,
            DataKind::Uri => PropertyType::AnyUri,
            DataKind::Id => PropertyType::Id,
            DataKind::Html => PropertyType::Html,
        }
    }

    /// Counterpart in a CMMN 1.0 model.
    pub fn compat10(self) -> PropertyType {
        match self {
            PropertyType::Decimal => PropertyType::Double,
            PropertyType::Id | PropertyType::Html => PropertyType::String,
            other => other,
        }
    }
}

impl fmt::Display for PropertyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.uri())
    }
}

/// Error for a URI outside both enumerations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown URI `{0}`")]
pub struct UnknownUri(pub String);

impl FromStr for DefinitionType {
    type Err = UnknownUri;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DefinitionType::from_uri(s).ok_or_else(|| UnknownUri(s.to_string()))
    }
}

impl FromStr for PropertyType {
    type Err = UnknownUri;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropertyType::from_uri(s).ok_or_else(|| UnknownUri(s.to_string()))
    }
}

macro_rules! uri_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.uri())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

uri_serde!(DefinitionType);
uri_serde!(PropertyType);
