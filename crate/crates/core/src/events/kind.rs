use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::repo::ObjectId;

/// Case-file-item lifecycle transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventKind {
    Create,
    Update,
    Replace,
    AddChild,
    RemoveChild,
    AddReference,
    RemoveReference,
    Delete,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::Create,
        EventKind::Update,
        EventKind::Replace,
        EventKind::AddChild,
        EventKind::RemoveChild,
        EventKind::AddReference,
        EventKind::RemoveReference,
        EventKind::Delete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Create => "create",
            EventKind::Update => "update",
            EventKind::Replace => "replace",
            EventKind::AddChild => "addChild",
            EventKind::RemoveChild => "removeChild",
            EventKind::AddReference => "addReference",
            EventKind::RemoveReference => "removeReference",
            EventKind::Delete => "delete",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseFileItemEvent {
    pub kind: EventKind,
    /// Root folder of the case the item belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_id: Option<ObjectId>,
    pub item_object_id: ObjectId,
    #[serde(default)]
    pub item_name: String,
    /// The child for addChild/removeChild, the relationship for
    /// addReference/removeReference, the replaced version for replace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub related_object_id: Option<ObjectId>,
    /// Highest change-log token the event was derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_token: Option<u64>,
}

impl fmt::Display for CaseFileItemEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ({})", self.kind, self.item_object_id, self.item_name)?;
        if let Some(r) = &self.related_object_id {
            write!(f, " related={r}")?;
        }
        if let Some(c) = &self.case_id {
            write!(f, " case={c}")?;
        }
        if let Some(t) = self.source_token {
            write!(f, " token={t}")?;
        }
        Ok(())
    }
}
