//! The object-service surface shared by the embedded store and remote clients.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::Arc;

use super::error::Result;
use super::object::{Ace, ChangePage, ContentStream, NewObject, ObjectId, ObjectRecord, RepositoryInfo};
use super::store::Repository;
use super::types::TypeDefinition;
use super::value::PropertyValue;

/// Repository operations as seen by one principal.
///
/// Implemented in-process by [`LocalSession`] and over the wire binding by
/// the HTTP client, so the case-file layer and the CLI work in both modes.
pub trait ObjectService: Send + Sync {
    fn info(&self) -> Result<RepositoryInfo>;

    fn create_type(&self, def: TypeDefinition) -> Result<String>;

    fn get_type(&self, type_id: &str) -> Result<TypeDefinition>;

    fn get_object(&self, id: &ObjectId) -> Result<ObjectRecord>;

    /// Latest version of the series `id` belongs to.
    fn get_latest(&self, id: &ObjectId) -> Result<ObjectRecord>;

    fn get_children(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>>;

    /// Live relationships with either endpoint in `id`'s version series.
    fn get_relationships(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>>;

    fn get_content(&self, id: &ObjectId) -> Result<Option<ContentStream>>;

    fn create_object(&self, new: NewObject) -> Result<ObjectRecord>;

    fn update_properties(&self, id: &ObjectId, patch: BTreeMap<String, PropertyValue>) -> Result<ObjectRecord>;

    fn file_in(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord>;

    fn unfile(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord>;

    fn set_content(&self, id: &ObjectId, content: ContentStream) -> Result<ObjectRecord>;

    fn delete_object(&self, id: &ObjectId) -> Result<()>;

    fn checkin(
        &self,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord>;

    fn apply_acl(&self, id: &ObjectId, acl: Vec<Ace>) -> Result<ObjectRecord>;

    fn get_content_changes(&self, from_token: u64, max: usize) -> Result<ChangePage>;

    /// Root folders of all cases, oldest first.
    fn case_roots(&self) -> Result<Vec<ObjectRecord>>;

    /// Everything filed below `folder_id`, breadth first, each object once.
    fn descendants(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([folder_id.clone()]);
        while let Some(f) = queue.pop_front() {
            for child in self.get_children(&f)? {
                if seen.insert(child.object_id.clone()) {
                    if child.is_folder() {
                        queue.push_back(child.object_id.clone());
                    }
                    out.push(child);
                }
            }
        }
        Ok(out)
    }
}

/// In-process access to a [`Repository`] on behalf of a principal.
#[derive(Debug, Clone)]
pub struct LocalSession {
    repo: Arc<Repository>,
    principal: String,
    follow: bool,
}

impl LocalSession {
    pub fn new(repo: Arc<Repository>, principal: impl Into<String>) -> Self {
        LocalSession {
            repo,
            principal: principal.into(),
            follow: false,
        }
    }

    /// Picks up journal records written by other processes before every
    /// change-log read, for long-running consumers of a shared file.
    pub fn following(mut self) -> Self {
        self.follow = true;
        self
    }

    pub fn repository(&self) -> &Arc<Repository> {
        &self.repo
    }

    pub fn principal(&self) -> &str {
        &self.principal
    }
}

impl ObjectService for LocalSession {
    fn info(&self) -> Result<RepositoryInfo> {
        Ok(self.repo.info())
    }

    fn create_type(&self, def: TypeDefinition) -> Result<String> {
        self.repo.create_type(def)
    }

    fn get_type(&self, type_id: &str) -> Result<TypeDefinition> {
        self.repo.get_type(type_id)
    }

    fn get_object(&self, id: &ObjectId) -> Result<ObjectRecord> {
        self.repo.get_object(id)
    }

    fn get_latest(&self, id: &ObjectId) -> Result<ObjectRecord> {
        self.repo.get_latest(id)
    }

    fn get_children(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.repo.get_children(folder_id)
    }

    fn get_relationships(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.repo.get_relationships(id)
    }

    fn get_content(&self, id: &ObjectId) -> Result<Option<ContentStream>> {
        self.repo.get_content(id)
    }

    fn create_object(&self, new: NewObject) -> Result<ObjectRecord> {
        self.repo.create_object(&self.principal, new)
    }

    fn update_properties(&self, id: &ObjectId, patch: BTreeMap<String, PropertyValue>) -> Result<ObjectRecord> {
        self.repo.update_properties(&self.principal, id, patch)
    }

    fn file_in(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.repo.file_in(&self.principal, id, folder_id)
    }

    fn unfile(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.repo.unfile(&self.principal, id, folder_id)
    }

    fn set_content(&self, id: &ObjectId, content: ContentStream) -> Result<ObjectRecord> {
        self.repo.set_content(&self.principal, id, content)
    }

    fn delete_object(&self, id: &ObjectId) -> Result<()> {
        self.repo.delete_object(&self.principal, id)
    }

    fn checkin(
        &self,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord> {
        self.repo.checkin(&self.principal, id, content, patch)
    }

    fn apply_acl(&self, id: &ObjectId, acl: Vec<Ace>) -> Result<ObjectRecord> {
        self.repo.apply_acl(&self.principal, id, acl)
    }

    fn get_content_changes(&self, from_token: u64, max: usize) -> Result<ChangePage> {
        if self.follow {
            self.repo.refresh()?;
        }
        self.repo.get_content_changes(from_token, max)
    }

    fn case_roots(&self) -> Result<Vec<ObjectRecord>> {
        Ok(self.repo.case_roots())
    }

    fn descendants(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        self.repo.descendants(folder_id)
    }
}

impl<T: ObjectService + ?Sized> ObjectService for Box<T> {
    fn info(&self) -> Result<RepositoryInfo> {
        (**self).info()
    }

    fn create_type(&self, def: TypeDefinition) -> Result<String> {
        (**self).create_type(def)
    }

    fn get_type(&self, type_id: &str) -> Result<TypeDefinition> {
        (**self).get_type(type_id)
    }

    fn get_object(&self, id: &ObjectId) -> Result<ObjectRecord> {
        (**self).get_object(id)
    }

    fn get_latest(&self, id: &ObjectId) -> Result<ObjectRecord> {
        (**self).get_latest(id)
    }

    fn get_children(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        (**self).get_children(folder_id)
    }

    fn get_relationships(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        (**self).get_relationships(id)
    }

    fn get_content(&self, id: &ObjectId) -> Result<Option<ContentStream>> {
        (**self).get_content(id)
    }

    fn create_object(&self, new: NewObject) -> Result<ObjectRecord> {
        (**self).create_object(new)
    }

    fn update_properties(&self, id: &ObjectId, patch: BTreeMap<String, PropertyValue>) -> Result<ObjectRecord> {
        (**self).update_properties(id, patch)
    }

    fn file_in(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        (**self).file_in(id, folder_id)
    }

    fn unfile(&self, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        (**self).unfile(id, folder_id)
    }

    fn set_content(&self, id: &ObjectId, content: ContentStream) -> Result<ObjectRecord> {
        (**self).set_content(id, content)
    }

    fn delete_object(&self, id: &ObjectId) -> Result<()> {
        (**self).delete_object(id)
    }

    fn checkin(
        &self,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord> {
        (**self).checkin(id, content, patch)
    }

    fn apply_acl(&self, id: &ObjectId, acl: Vec<Ace>) -> Result<ObjectRecord> {
        (**self).apply_acl(id, acl)
    }

    fn get_content_changes(&self, from_token: u64, max: usize) -> Result<ChangePage> {
        (**self).get_content_changes(from_token, max)
    }

    fn case_roots(&self) -> Result<Vec<ObjectRecord>> {
        (**self).case_roots()
    }

    fn descendants(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        (**self).descendants(folder_id)
    }
}
