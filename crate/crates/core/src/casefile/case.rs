use std::collections::BTreeMap;

use super::item::{CaseFileError, CaseFileHandle, CaseFileItemRef, Element, ItemState};
use super::mapping::PropertyType;
use crate::repo::{
    BaseType, ContentStream, DataKind, NewObject, ObjectId, ObjectRecord, ObjectService, PropertyDefinition,
    PropertyValue, RepoError, CASE_FILE_TYPE, SECONDARY_TYPE_IDS,
};

pub type Result<T, E = CaseFileError> = std::result::Result<T, E>;

/// Pseudo-property exposing an item's multiplicity index.
pub const INDEX_PROPERTY: &str = "index";

/// Case-file operations over any [`ObjectService`].
#[derive(Debug, Clone)]
pub struct CaseFiles<S> {
    service: S,
}

impl<S: ObjectService> CaseFiles<S> {
    pub fn new(service: S) -> Self {
        CaseFiles { service }
    }

    pub fn service(&self) -> &S {
        &self.service
    }

    // --- cases -----------------------------------------------------------

    pub fn create_case_file(
        &self,
        case_name: &str,
        properties: BTreeMap<String, PropertyValue>,
    ) -> Result<CaseFileHandle> {
        self.create_case_file_of_type(BaseType::Folder.type_id(), case_name, properties)
    }

    /// Creates a case whose root folder has the given folder type.
    pub fn create_case_file_of_type(
        &self,
        type_id: &str,
        case_name: &str,
        mut properties: BTreeMap<String, PropertyValue>,
    ) -> Result<CaseFileHandle> {
        if case_name.trim().is_empty() {
            return Err(CaseFileError::EmptyCaseName);
        }
        let mut markers: Vec<_> = properties
            .remove(SECONDARY_TYPE_IDS)
            .map(|v| v.scalars().to_vec())
            .unwrap_or_default();
        let marker = crate::repo::Scalar::Id(CASE_FILE_TYPE.into());
        if !markers.contains(&marker) {
            markers.push(marker);
        }
        properties.insert(SECONDARY_TYPE_IDS.into(), PropertyValue::multi(DataKind::Id, markers)?);
        let new = NewObject {
            properties,
            ..NewObject::new(type_id, case_name)
        };
        let record = self.service.create_object(new)?;
        handle_of(&record)
    }

    pub fn cases(&self) -> Result<Vec<CaseFileHandle>> {
        self.service.case_roots()?.iter().map(handle_of).collect()
    }

    /// Finds a case by case id, root folder id, or (unique) name.
    pub fn open_case(&self, selector: &str) -> Result<CaseFileHandle> {
        let cases = self.cases()?;
        if let Some(c) = cases.iter().find(|c| c.case_id.as_str() == selector) {
            return Ok(c.clone());
        }
        let mut named = cases.into_iter().filter(|c| c.case_name == selector);
        match (named.next(), named.next()) {
            (Some(c), None) => Ok(c),
            (Some(_), Some(_)) => Err(CaseFileError::AmbiguousCase(selector.to_string())),
            _ => Err(CaseFileError::UnknownCase(selector.to_string())),
        }
    }

    /// Every item filed in the case, breadth first.
    pub fn items(&self, case: &CaseFileHandle) -> Result<Vec<ObjectRecord>> {
        Ok(self.service.descendants(&case.root_folder_object_id)?)
    }

    /// Whether `record` lies inside the case: filed below its root through
    /// some parent, or (for relationships) anchored at a source in the case.
    pub fn contains(&self, case: &CaseFileHandle, record: &ObjectRecord) -> Result<bool> {
        if record.object_id == case.root_folder_object_id {
            return Ok(true);
        }
        if record.is_relationship() {
            let Some(source) = &record.source_id else {
                return Ok(false);
            };
            return match self.service.get_latest(source) {
                Ok(s) if !s.is_relationship() => self.contains(case, &s),
                Ok(_) | Err(RepoError::NotFound(_)) => Ok(false),
                Err(e) => Err(e.into()),
            };
        }
        for p in &record.parent_ids {
            if self.folder_in_case(case, p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn folder_in_case(&self, case: &CaseFileHandle, folder: &ObjectId) -> Result<bool> {
        let mut cur = folder.clone();
        loop {
            if cur == case.root_folder_object_id {
                return Ok(true);
            }
            match self.service.get_object(&cur)?.parent_ids.first() {
                Some(p) => cur = p.clone(),
                None => return Ok(false),
            }
        }
    }

    /// The live, latest record behind a reference.
    pub fn record(&self, item: &CaseFileItemRef) -> Result<ObjectRecord> {
        if item.empty {
            return Err(CaseFileError::EmptyItem);
        }
        let id = item.object_id.clone().ok_or(CaseFileError::EmptyItem)?;
        if item.state == ItemState::Discarded {
            return Err(CaseFileError::Discarded(id));
        }
        match self.service.get_latest(&id) {
            Ok(r) => Ok(r),
            Err(RepoError::NotFound(_)) => Err(CaseFileError::Discarded(id)),
            Err(e) => Err(e.into()),
        }
    }

    /// Reference for an object id, marked Discarded when it no longer exists.
    pub fn item(&self, id: &ObjectId) -> Result<CaseFileItemRef> {
        match self.service.get_latest(id) {
            Ok(r) => Ok(CaseFileItemRef::of(&r)),
            Err(RepoError::NotFound(_)) => Ok(CaseFileItemRef {
                empty: false,
                object_id: Some(id.clone()),
                state: ItemState::Discarded,
                ..CaseFileItemRef::empty()
            }),
            Err(e) => Err(e.into()),
        }
    }

    // --- navigation ------------------------------------------------------

    /// Item named `item_name`; the lowest index wins among duplicates.
    pub fn resolve_item(&self, case: &CaseFileHandle, item_name: &str) -> Result<CaseFileItemRef> {
        let found = self
            .items(case)?
            .into_iter()
            .filter(|r| r.name == item_name)
            .min_by(|a, b| (a.case_index, &a.object_id).cmp(&(b.case_index, &b.object_id)));
        Ok(found.map_or_else(CaseFileItemRef::empty, |r| CaseFileItemRef::of(&r)))
    }

    /// Item with the given name and index. A document multi-filed from
    /// another case keeps its home-case index and may collide; the earliest
    /// created one wins.
    pub fn resolve_item_at(&self, case: &CaseFileHandle, item_name: &str, index: u64) -> Result<CaseFileItemRef> {
        let found = self
            .items(case)?
            .into_iter()
            .filter(|r| r.name == item_name && r.case_index == index)
            .min_by(|a, b| a.object_id.cmp(&b.object_id));
        Ok(found.map_or_else(CaseFileItemRef::empty, |r| CaseFileItemRef::of(&r)))
    }

    pub fn item_property(&self, item: &CaseFileItemRef, property_name: &str) -> Result<Element> {
        let record = self.record(item)?;
        if let Some(v) = record.properties.get(property_name) {
            return Ok(Element::of(v.clone()));
        }
        if let Some((kind, value)) = system_property(&record, property_name) {
            return Ok(value.map_or_else(|| Element::empty(Some(PropertyType::from_kind(kind))), Element::of));
        }
        let def = self.property_definition(&record, property_name)?;
        Ok(Element::empty(def.map(|d| PropertyType::from_kind(d.data_kind))))
    }

    fn property_definition(&self, record: &ObjectRecord, property: &str) -> Result<Option<PropertyDefinition>> {
        let mut types = vec![record.type_id.clone()];
        types.extend(record.secondary_type_ids().map(str::to_string));
        for start in types {
            let mut cur = Some(start);
            while let Some(t) = cur {
                let def = self.service.get_type(&t)?;
                if let Some(p) = def.property_defs.iter().find(|p| p.property_id == property) {
                    return Ok(Some(p.clone()));
                }
                cur = def.parent_type_id;
            }
        }
        Ok(None)
    }

    /// Child of a folder item by name; lowest index wins among duplicates.
    pub fn item_child(&self, item: &CaseFileItemRef, child_name: &str) -> Result<CaseFileItemRef> {
        let record = self.record(item)?;
        if !record.is_folder() {
            return Err(CaseFileError::NotAFolder(record.object_id));
        }
        let found = self
            .service
            .get_children(&record.object_id)?
            .into_iter()
            .filter(|r| r.name == child_name)
            .min_by(|a, b| (a.case_index, &a.object_id).cmp(&(b.case_index, &b.object_id)));
        Ok(found.map_or_else(CaseFileItemRef::empty, |r| CaseFileItemRef::of(&r)))
    }

    /// First parent (in filing order) that lies inside the case. The case
    /// root itself has no parent.
    pub fn item_parent(&self, case: &CaseFileHandle, item: &CaseFileItemRef) -> Result<CaseFileItemRef> {
        let record = self.record(item)?;
        if record.object_id == case.root_folder_object_id {
            return Ok(CaseFileItemRef::empty());
        }
        for p in &record.parent_ids {
            if self.folder_in_case(case, p)? {
                return Ok(CaseFileItemRef::of(&self.service.get_object(p)?));
            }
        }
        Ok(CaseFileItemRef::empty())
    }

    /// Source of the earliest relationship targeting the item whose source
    /// lies in the case.
    pub fn item_source(&self, case: &CaseFileHandle, item: &CaseFileItemRef) -> Result<CaseFileItemRef> {
        let record = self.record(item)?;
        for rel in self.relationships_sorted(&record)? {
            let (Some(s), Some(t)) = (&rel.source_id, &rel.target_id) else {
                continue;
            };
            if self.service.get_latest(t)?.object_id != record.object_id {
                continue;
            }
            let source = self.service.get_latest(s)?;
            if self.contains(case, &source)? {
                return Ok(CaseFileItemRef::of(&source));
            }
        }
        Ok(CaseFileItemRef::empty())
    }

    /// Target named `target_name` of the earliest matching relationship
    /// leaving the item.
    pub fn item_target(
        &self,
        case: &CaseFileHandle,
        item: &CaseFileItemRef,
        target_name: &str,
    ) -> Result<CaseFileItemRef> {
        let record = self.record(item)?;
        for rel in self.relationships_sorted(&record)? {
            let (Some(s), Some(t)) = (&rel.source_id, &rel.target_id) else {
                continue;
            };
            if self.service.get_latest(s)?.object_id != record.object_id {
                continue;
            }
            let target = self.service.get_latest(t)?;
            if target.name == target_name && self.contains(case, &target)? {
                return Ok(CaseFileItemRef::of(&target));
            }
        }
        Ok(CaseFileItemRef::empty())
    }

    fn relationships_sorted(&self, record: &ObjectRecord) -> Result<Vec<ObjectRecord>> {
        let mut rels = self.service.get_relationships(&record.object_id)?;
        rels.sort_by(|a, b| a.object_id.cmp(&b.object_id));
        Ok(rels)
    }

    // --- modification ----------------------------------------------------

    fn parent_folder(&self, case: &CaseFileHandle, parent: Option<&CaseFileItemRef>) -> Result<ObjectId> {
        let Some(parent) = parent else {
            return Ok(case.root_folder_object_id.clone());
        };
        let record = self.record(parent)?;
        if !record.is_folder() {
            return Err(CaseFileError::NotAFolder(record.object_id));
        }
        if !self.contains(case, &record)? {
            return Err(CaseFileError::OutsideCase(record.object_id, case.case_id.clone()));
        }
        Ok(record.object_id)
    }

    pub fn create_document_item(
        &self,
        case: &CaseFileHandle,
        name: &str,
        type_id: &str,
        properties: BTreeMap<String, PropertyValue>,
        parent: Option<&CaseFileItemRef>,
        content: Option<ContentStream>,
    ) -> Result<CaseFileItemRef> {
        let parent_id = self.parent_folder(case, parent)?;
        let new = NewObject {
            properties,
            parent_id: Some(parent_id),
            content,
            ..NewObject::new(type_id, name)
        };
        Ok(CaseFileItemRef::of(&self.service.create_object(new)?))
    }

    pub fn create_folder_item(
        &self,
        case: &CaseFileHandle,
        name: &str,
        type_id: &str,
        properties: BTreeMap<String, PropertyValue>,
        parent: Option<&CaseFileItemRef>,
    ) -> Result<CaseFileItemRef> {
        let parent_id = self.parent_folder(case, parent)?;
        let new = NewObject {
            properties,
            parent_id: Some(parent_id),
            ..NewObject::new(type_id, name)
        };
        Ok(CaseFileItemRef::of(&self.service.create_object(new)?))
    }

    pub fn create_relationship_item(
        &self,
        case: &CaseFileHandle,
        name: &str,
        source: &CaseFileItemRef,
        target: &CaseFileItemRef,
    ) -> Result<CaseFileItemRef> {
        let mut ends = Vec::with_capacity(2);
        for end in [source, target] {
            let record = self.record(end)?;
            if !self.contains(case, &record)? {
                return Err(CaseFileError::OutsideCase(record.object_id, case.case_id.clone()));
            }
            ends.push(record.object_id);
        }
        let target_id = ends.pop().expect("two endpoints");
        let source_id = ends.pop().expect("two endpoints");
        let new = NewObject::relationship(name, source_id, target_id);
        Ok(CaseFileItemRef::of(&self.service.create_object(new)?))
    }
}

fn handle_of(record: &ObjectRecord) -> Result<CaseFileHandle> {
    if !record.is_case_root() {
        return Err(CaseFileError::NotACase(record.object_id.clone()));
    }
    Ok(CaseFileHandle {
        case_id: record.object_id.clone(),
        root_folder_object_id: record.object_id.clone(),
        case_name: record.name.clone(),
    })
}

/// Read-only system properties: the kind, and the value if set.
fn system_property(r: &ObjectRecord, name: &str) -> Option<(DataKind, Option<PropertyValue>)> {
    let id = |v: &ObjectId| PropertyValue::id(v.as_str());
    Some(match name {
        "cmis:objectId" => (DataKind::Id, Some(id(&r.object_id))),
        "cmis:name" => (DataKind::String, Some(PropertyValue::string(&r.name))),
        "cmis:objectTypeId" => (DataKind::Id, Some(PropertyValue::id(&r.type_id))),
        "cmis:baseTypeId" => (DataKind::Id, Some(PropertyValue::id(r.base_type.type_id()))),
        "cmis:createdBy" => (DataKind::String, Some(PropertyValue::string(&r.created_by))),
        "cmis:lastModifiedBy" => (DataKind::String, Some(PropertyValue::string(&r.last_modified_by))),
        "cmis:creationDate" => (DataKind::DateTime, Some(PropertyValue::datetime(r.creation_date))),
        "cmis:lastModificationDate" => (
            DataKind::DateTime,
            Some(PropertyValue::datetime(r.last_modification_date)),
        ),
        "cmis:versionLabel" => (DataKind::String, Some(PropertyValue::string(&r.version_label))),
        "cmis:versionSeriesId" => (DataKind::Id, Some(id(&r.version_series_id))),
        "cmis:isLatestVersion" => (DataKind::Boolean, Some(PropertyValue::boolean(r.is_latest_version))),
        "cmis:contentStreamLength" if r.base_type == BaseType::Document => (
            DataKind::Integer,
            r.content.as_ref().map(|c| PropertyValue::integer(c.length)),
        ),
        "cmis:contentStreamMimeType" if r.base_type == BaseType::Document => (
            DataKind::String,
            r.content.as_ref().map(|c| PropertyValue::string(&c.mime_type)),
        ),
        "cmis:sourceId" if r.is_relationship() => (DataKind::Id, r.source_id.as_ref().map(id)),
        "cmis:targetId" if r.is_relationship() => (DataKind::Id, r.target_id.as_ref().map(id)),
        INDEX_PROPERTY => (DataKind::Integer, Some(PropertyValue::integer(r.case_index))),
        _ => return None,
    })
}
