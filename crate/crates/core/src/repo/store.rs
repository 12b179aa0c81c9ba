//! The embedded object store.
//!
//! Every mutation is planned against the current state as a list of
//! journal records, written to the journal file (if any) and then applied
//! through [`State::apply`], the same routine that replays a journal on
//! open. All of it happens under one write lock, so the change log is
//! always consistent with the object set.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::RwLock;

use super::error::{RepoError, Result};
use super::journal::{decode_content, encode_content, JournalFile, JournalRecord};
use super::object::{
    Ace, ChangeEvent, ChangePage, ChangeType, ContentStream, NewObject, ObjectId, ObjectRecord, RepositoryInfo,
};
use super::observer::{ItemContext, Mutation, MutationKind, MutationObserver};

type Context = BTreeMap<ObjectId, ItemContext>;
use super::types::{BaseType, PropertyDefinition, TypeDefinition, SECONDARY_TYPE_IDS};
use super::value::{to_millis, PropertyValue, Scalar};

/// Pseudo-property used in update patches to rename an object.
pub const NAME_PROPERTY: &str = "cmis:name";

const ID_PREFIX: &str = "obj-";

fn format_id(n: u64) -> ObjectId {
    ObjectId::new(format!("{ID_PREFIX}{n:010}"))
}

fn id_number(id: &ObjectId) -> Option<u64> {
    id.as_str().strip_prefix(ID_PREFIX)?.parse().ok()
}

pub struct Repository {
    state: RwLock<State>,
    observers: RwLock<Vec<Arc<dyn MutationObserver>>>,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let st = self.state.read();
        f.debug_struct("Repository")
            .field("repository_id", &st.repository_id)
            .field("objects", &st.objects.len())
            .field("changes", &st.log.len())
            .finish()
    }
}

impl Repository {
    /// A fresh repository holding only its root folder.
    pub fn in_memory() -> Repository {
        let mut state = State::empty();
        state.apply(genesis()).expect("genesis record applies");
        Repository::with_state(state)
    }

    /// Opens a journal-backed repository, replaying the journal. An empty
    /// or missing file starts a fresh repository.
    pub fn open(path: impl AsRef<Path>) -> Result<Repository> {
        let (mut file, records) = JournalFile::open(path.as_ref())?;
        let mut state = State::empty();
        if records.is_empty() {
            let header = genesis();
            file.append(std::slice::from_ref(&header))?;
            state.apply(header)?;
        } else {
            state.replay(records)?;
        }
        state.journal_file = Some(file);
        Ok(Repository::with_state(state))
    }

    /// Rebuilds a repository by replaying journal records into an empty store.
    pub fn from_records(records: impl IntoIterator<Item = JournalRecord>) -> Result<Repository> {
        let mut state = State::empty();
        state.replay(records.into_iter().collect())?;
        Ok(Repository::with_state(state))
    }

    fn with_state(state: State) -> Repository {
        Repository {
            state: RwLock::new(state),
            observers: RwLock::new(Vec::new()),
        }
    }

    /// Registers an observer notified of every committed mutation.
    pub fn add_observer(&self, observer: Arc<dyn MutationObserver>) {
        self.observers.write().push(observer);
    }

    /// Applies records another process appended to the journal file.
    pub fn refresh(&self) -> Result<usize> {
        let mut st = self.state.write();
        st.refresh()
    }

    pub fn info(&self) -> RepositoryInfo {
        let st = self.state.read();
        RepositoryInfo {
            repository_id: st.repository_id.clone(),
            latest_change_log_token: st.log.last().map_or(0, |e| e.token),
            root_folder_id: st.root_id.clone(),
        }
    }

    pub fn root_folder_id(&self) -> ObjectId {
        self.state.read().root_id.clone()
    }

    // --- types -----------------------------------------------------------

    pub fn create_type(&self, def: TypeDefinition) -> Result<String> {
        let id = def.type_id.clone();
        self.mutate(|st| {
            st.check_type(&def)?;
            Ok(vec![JournalRecord::Type { definition: def }])
        })?;
        Ok(id)
    }

    pub fn get_type(&self, type_id: &str) -> Result<TypeDefinition> {
        self.state.read().type_def(type_id).cloned()
    }

    pub fn types(&self) -> Vec<TypeDefinition> {
        self.state.read().types.values().cloned().collect()
    }

    /// Own plus inherited property definitions, root-most first.
    pub fn effective_properties(&self, type_id: &str) -> Result<Vec<PropertyDefinition>> {
        Ok(self.state.read().inherited_defs(type_id)?.into_values().collect())
    }

    // --- reads -----------------------------------------------------------

    pub fn get_object(&self, id: &ObjectId) -> Result<ObjectRecord> {
        self.state.read().live(id).cloned()
    }

    /// Latest version of the series `id` belongs to.
    pub fn get_latest(&self, id: &ObjectId) -> Result<ObjectRecord> {
        let st = self.state.read();
        st.latest_for(id).cloned()
    }

    pub fn get_children(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        let st = self.state.read();
        st.folder(folder_id)?;
        Ok(st.children_of(folder_id).cloned().collect())
    }

    /// Live relationships having any version of `id`'s series as an endpoint,
    /// in creation order.
    pub fn get_relationships(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        let st = self.state.read();
        let series = st.live(id)?.version_series_id.clone();
        Ok(st
            .relationships_of(&series)
            .filter_map(|r| st.objects.get(r).cloned())
            .collect())
    }

    /// Every object filed (transitively) below `folder_id`, breadth first,
    /// each reported once.
    pub fn descendants(&self, folder_id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        let st = self.state.read();
        st.folder(folder_id)?;
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([folder_id.clone()]);
        while let Some(f) = queue.pop_front() {
            for child in st.children_of(&f) {
                if seen.insert(child.object_id.clone()) {
                    if child.is_folder() {
                        queue.push_back(child.object_id.clone());
                    }
                    out.push(child.clone());
                }
            }
        }
        Ok(out)
    }

    /// All versions of the series `id` belongs to, oldest first.
    pub fn versions(&self, id: &ObjectId) -> Result<Vec<ObjectRecord>> {
        let st = self.state.read();
        let series = &st.live(id)?.version_series_id;
        Ok(st.series[series].iter().map(|v| st.objects[v].clone()).collect())
    }

    pub fn get_content(&self, id: &ObjectId) -> Result<Option<ContentStream>> {
        let st = self.state.read();
        let rec = st.live(id)?;
        Ok(rec.content.as_ref().map(|info| ContentStream {
            mime_type: info.mime_type.clone(),
            bytes: st.contents.get(id).map(|b| b.as_ref().clone()).unwrap_or_default(),
        }))
    }

    /// Changes with token greater than `from_token`, at most `max` of them.
    pub fn get_content_changes(&self, from_token: u64, max: usize) -> Result<ChangePage> {
        if max == 0 {
            return Err(RepoError::InvalidArgument("max must be positive".into()));
        }
        let st = self.state.read();
        let start = st.log.partition_point(|e| e.token <= from_token);
        let changes: Vec<ChangeEvent> = st.log[start..].iter().take(max).cloned().collect();
        let next_token = changes.last().map_or(from_token, |e| e.token);
        Ok(ChangePage { changes, next_token })
    }

    pub fn change_log(&self) -> Vec<ChangeEvent> {
        self.state.read().log.clone()
    }

    pub fn journal(&self) -> Vec<JournalRecord> {
        self.state.read().journal.clone()
    }

    /// Latest versions of all live objects, including the root folder.
    pub fn latest_objects(&self) -> BTreeMap<ObjectId, ObjectRecord> {
        self.state
            .read()
            .objects
            .values()
            .filter(|o| o.is_latest_version)
            .map(|o| (o.object_id.clone(), o.clone()))
            .collect()
    }

    /// Every live object record, old versions included.
    pub fn all_objects(&self) -> Vec<ObjectRecord> {
        let st = self.state.read();
        let mut all: Vec<_> = st.objects.values().cloned().collect();
        all.sort_by(|a, b| a.object_id.cmp(&b.object_id));
        all
    }

    /// Whether `id` was deleted (as opposed to never existing).
    pub fn is_deleted(&self, id: &ObjectId) -> bool {
        self.state.read().tombstones.contains(id)
    }

    pub fn case_roots(&self) -> Vec<ObjectRecord> {
        let st = self.state.read();
        let mut roots: Vec<_> = st.objects.values().filter(|o| o.is_case_root()).cloned().collect();
        roots.sort_by(|a, b| a.object_id.cmp(&b.object_id));
        roots
    }

    /// Case root folder that `id` is filed under, if any.
    pub fn case_of(&self, id: &ObjectId) -> Result<Option<ObjectId>> {
        let st = self.state.read();
        let rec = st.live(id)?;
        Ok(st.case_of_record(rec))
    }

    // --- mutations -------------------------------------------------------

    pub fn create_object(&self, principal: &str, new: NewObject) -> Result<ObjectRecord> {
        let id = self.mutate(|st| st.plan_create(principal, new))?;
        self.created_id(&id)
    }

    pub fn update_properties(
        &self,
        principal: &str,
        id: &ObjectId,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord> {
        self.mutate(|st| st.plan_update(principal, id, patch))?;
        self.get_object(id)
    }

    pub fn file_in(&self, principal: &str, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.mutate(|st| st.plan_file_in(principal, id, folder_id))?;
        self.get_object(id)
    }

    pub fn unfile(&self, principal: &str, id: &ObjectId, folder_id: &ObjectId) -> Result<ObjectRecord> {
        self.mutate(|st| st.plan_unfile(principal, id, folder_id))?;
        self.get_object(id)
    }

    pub fn set_content(&self, principal: &str, id: &ObjectId, content: ContentStream) -> Result<ObjectRecord> {
        self.mutate(|st| st.plan_set_content(principal, id, content))?;
        self.get_object(id)
    }

    /// Deletes an object (all versions of a document). Relationships that
    /// point at it are deleted first, each with its own change entry.
    pub fn delete_object(&self, principal: &str, id: &ObjectId) -> Result<()> {
        self.mutate(|st| st.plan_delete(principal, id))?;
        Ok(())
    }

    /// Creates the next major version of a document.
    pub fn checkin(
        &self,
        principal: &str,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<ObjectRecord> {
        let new_id = self.mutate(|st| st.plan_checkin(principal, id, content, patch))?;
        self.created_id(&new_id)
    }

    pub fn apply_acl(&self, principal: &str, id: &ObjectId, acl: Vec<Ace>) -> Result<ObjectRecord> {
        self.mutate(|st| st.plan_acl(principal, id, acl))?;
        self.get_object(id)
    }

    fn created_id(&self, records_first_created: &[JournalRecord]) -> Result<ObjectRecord> {
        let id = records_first_created
            .iter()
            .rev()
            .find_map(|r| match r {
                JournalRecord::Change { event, .. } if event.change_type == ChangeType::Created => {
                    Some(event.object_id.clone())
                }
                _ => None,
            })
            .expect("creation plan contains a CREATED record");
        self.get_object(&id)
    }

    /// Plans, journals and applies a mutation, then notifies observers.
    fn mutate<F>(&self, plan: F) -> Result<Vec<JournalRecord>>
    where
        F: FnOnce(&mut State) -> Result<Vec<JournalRecord>>,
    {
        let observers = self.observers.read().clone();
        {
            let mut st = self.state.write();
            st.refresh()?;
            let records = plan(&mut st)?;
            if let Some(file) = st.journal_file.as_mut() {
                file.append(&records)?;
            }
            let mutations = st.commit(records.clone())?;
            if !mutations.is_empty() {
                for o in &observers {
                    o.on_commit(&mutations, &st.root_id);
                }
            }
            drop(st);
            for o in &observers {
                o.after_commit();
            }
            Ok(records)
        }
    }
}

fn genesis() -> JournalRecord {
    let now = to_millis(Utc::now());
    let root_id = format_id(0);
    JournalRecord::Repository {
        repository_id: uuid::Uuid::new_v4().to_string(),
        root_folder: ObjectRecord {
            object_id: root_id.clone(),
            type_id: BaseType::Folder.type_id().into(),
            base_type: BaseType::Folder,
            name: "root".into(),
            properties: BTreeMap::new(),
            parent_ids: Vec::new(),
            source_id: None,
            target_id: None,
            content: None,
            version_series_id: root_id,
            version_label: "1.0".into(),
            is_latest_version: true,
            case_index: 0,
            acl: Vec::new(),
            created_by: "system".into(),
            last_modified_by: "system".into(),
            creation_date: now,
            last_modification_date: now,
        },
    }
}

pub(crate) struct State {
    repository_id: String,
    root_id: ObjectId,
    types: BTreeMap<String, TypeDefinition>,
    /// Live records, old versions included.
    objects: HashMap<ObjectId, ObjectRecord>,
    contents: HashMap<ObjectId, Arc<Vec<u8>>>,
    /// Folder id to the version series filed in it, in filing order.
    children: HashMap<ObjectId, Vec<ObjectId>>,
    /// Version series id to its versions, oldest first.
    series: HashMap<ObjectId, Vec<ObjectId>>,
    /// Endpoint version series to live relationship ids.
    relationships: HashMap<ObjectId, BTreeSet<ObjectId>>,
    tombstones: HashSet<ObjectId>,
    /// Next multiplicity index per (case root, name); never decreases.
    case_counters: HashMap<(ObjectId, String), u64>,
    log: Vec<ChangeEvent>,
    journal: Vec<JournalRecord>,
    next_id: u64,
    last_time: DateTime<Utc>,
    journal_file: Option<JournalFile>,
}

impl State {
    fn empty() -> State {
        State {
            repository_id: String::new(),
            root_id: format_id(0),
            types: TypeDefinition::builtins()
                .into_iter()
                .map(|t| (t.type_id.clone(), t))
                .collect(),
            objects: HashMap::new(),
            contents: HashMap::new(),
            children: HashMap::new(),
            series: HashMap::new(),
            relationships: HashMap::new(),
            tombstones: HashSet::new(),
            case_counters: HashMap::new(),
            log: Vec::new(),
            journal: Vec::new(),
            next_id: 1,
            last_time: DateTime::<Utc>::MIN_UTC,
            journal_file: None,
        }
    }

    fn replay(&mut self, records: Vec<JournalRecord>) -> Result<()> {
        if !matches!(records.first(), Some(JournalRecord::Repository { .. })) {
            return Err(RepoError::Journal(
                "journal does not start with a repository record".into(),
            ));
        }
        for r in records {
            self.apply(r)?;
        }
        Ok(())
    }

    fn refresh(&mut self) -> Result<usize> {
        let Some(file) = self.journal_file.as_mut() else {
            return Ok(0);
        };
        let records = file.read_new()?;
        let n = records.len();
        for r in records {
            self.apply(r)?;
        }
        Ok(n)
    }

    fn now(&mut self) -> DateTime<Utc> {
        let t = to_millis(Utc::now()).max(self.last_time);
        self.last_time = t;
        t
    }

    // --- lookups ---------------------------------------------------------

    fn type_def(&self, type_id: &str) -> Result<&TypeDefinition> {
        self.types
            .get(type_id)
            .ok_or_else(|| RepoError::TypeNotFound(type_id.to_string()))
    }

    fn live(&self, id: &ObjectId) -> Result<&ObjectRecord> {
        self.objects.get(id).ok_or_else(|| RepoError::NotFound(id.clone()))
    }

    fn live_latest(&self, id: &ObjectId) -> Result<&ObjectRecord> {
        let rec = self.live(id)?;
        if !rec.is_latest_version {
            return Err(RepoError::NotLatestVersion(id.clone()));
        }
        Ok(rec)
    }

    fn latest_for(&self, id: &ObjectId) -> Result<&ObjectRecord> {
        let series = &self.live(id)?.version_series_id;
        self.latest_of_series(series)
            .ok_or_else(|| RepoError::NotFound(id.clone()))
    }

    fn latest_of_series(&self, series: &ObjectId) -> Option<&ObjectRecord> {
        self.series.get(series)?.last().and_then(|v| self.objects.get(v))
    }

    fn folder(&self, id: &ObjectId) -> Result<&ObjectRecord> {
        let rec = self.live(id)?;
        if !rec.is_folder() {
            return Err(RepoError::NotAFolder(id.clone()));
        }
        Ok(rec)
    }

    fn children_of<'a>(&'a self, folder: &ObjectId) -> impl Iterator<Item = &'a ObjectRecord> + 'a {
        self.children
            .get(folder)
            .into_iter()
            .flatten()
            .filter_map(|s| self.latest_of_series(s))
    }

    fn relationships_of<'a>(&'a self, series: &ObjectId) -> impl Iterator<Item = &'a ObjectId> + 'a {
        self.relationships.get(series).into_iter().flatten()
    }

    /// Case root above `folder` (the folder itself if it is one).
    fn case_of_folder(&self, folder: &ObjectId) -> Option<ObjectId> {
        let mut cur = self.objects.get(folder)?;
        loop {
            if cur.is_case_root() {
                return Some(cur.object_id.clone());
            }
            cur = self.objects.get(cur.parent_ids.first()?)?;
        }
    }

    fn case_of_parents(&self, parents: &[ObjectId]) -> Option<ObjectId> {
        parents.iter().find_map(|p| self.case_of_folder(p))
    }

    /// The case an object belongs to: itself for case roots, the source
    /// endpoint's case for relationships, else that of its first filed parent.
    fn case_of_record(&self, rec: &ObjectRecord) -> Option<ObjectId> {
        if rec.is_case_root() {
            return Some(rec.object_id.clone());
        }
        if rec.is_relationship() {
            return [&rec.source_id, &rec.target_id].into_iter().flatten().find_map(|e| {
                let end = self.latest_for(e).ok()?;
                (!end.is_relationship()).then(|| self.case_of_record(end)).flatten()
            });
        }
        self.case_of_parents(&rec.parent_ids)
    }

    fn next_case_index(&self, case: &ObjectId, name: &str) -> u64 {
        self.case_counters
            .get(&(case.clone(), name.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Index an object named `name` gets when filed under `parents`.
    fn index_for(&self, name: &str, parents: &[ObjectId]) -> u64 {
        self.case_of_parents(parents)
            .map_or(0, |case| self.next_case_index(&case, name))
    }

    fn check_unique_name(&self, folder: &ObjectId, name: &str, index: u64, series: Option<&ObjectId>) -> Result<()> {
        let clash = self
            .children_of(folder)
            .any(|c| c.name == name && c.case_index == index && Some(&c.version_series_id) != series);
        if clash {
            return Err(RepoError::DuplicateName {
                folder: folder.clone(),
                name: name.to_string(),
            });
        }
        Ok(())
    }

    // --- type system -----------------------------------------------------

    /// Property definitions of `type_id` and its ancestors.
    fn inherited_defs(&self, type_id: &str) -> Result<BTreeMap<String, PropertyDefinition>> {
        let mut chain = Vec::new();
        let mut cur = Some(type_id.to_string());
        while let Some(t) = cur {
            let def = self.type_def(&t)?;
            chain.push(def);
            cur = def.parent_type_id.clone();
        }
        let mut defs = BTreeMap::new();
        for def in chain.into_iter().rev() {
            for p in &def.property_defs {
                defs.insert(p.property_id.clone(), p.clone());
            }
        }
        Ok(defs)
    }

    fn check_type(&self, def: &TypeDefinition) -> Result<()> {
        if def.type_id.trim().is_empty() {
            return Err(RepoError::InvalidArgument("type id must not be empty".into()));
        }
        if self.types.contains_key(&def.type_id) {
            return Err(RepoError::DuplicateType(def.type_id.clone()));
        }
        let parent_id = def
            .parent_type_id
            .as_deref()
            .ok_or_else(|| RepoError::InvalidArgument("only the built-in base types may omit a parent".into()))?;
        let parent = self
            .types
            .get(parent_id)
            .ok_or_else(|| RepoError::UnknownParentType(parent_id.to_string()))?;
        if parent.base_type != def.base_type {
            return Err(RepoError::BaseMismatch {
                type_id: def.type_id.clone(),
                base: def.base_type.to_string(),
                parent: parent_id.to_string(),
                parent_base: parent.base_type.to_string(),
            });
        }
        let inherited = self.inherited_defs(parent_id)?;
        let mut own = HashSet::new();
        for p in &def.property_defs {
            if p.property_id == NAME_PROPERTY || inherited.contains_key(&p.property_id) || !own.insert(&p.property_id) {
                return Err(RepoError::DuplicateProperty(p.property_id.clone()));
            }
            if let Some(d) = &p.default_value {
                p.check(d)?;
            }
        }
        Ok(())
    }

    /// Definitions applicable to an object of `type_id` carrying the
    /// secondary types listed in `props`.
    fn applicable_defs(
        &self,
        type_id: &str,
        props: &BTreeMap<String, PropertyValue>,
    ) -> Result<BTreeMap<String, PropertyDefinition>> {
        let mut defs = self.inherited_defs(type_id)?;
        if let Some(v) = props.get(SECONDARY_TYPE_IDS) {
            if let Some(d) = defs.get(SECONDARY_TYPE_IDS) {
                d.check(v)?;
            }
            for s in v.scalars() {
                let Scalar::Id(sid) = s else { continue };
                let sec = self.type_def(sid)?;
                if sec.base_type != BaseType::Secondary {
                    return Err(RepoError::InvalidArgument(format!("`{sid}` is not a secondary type")));
                }
                for (k, d) in self.inherited_defs(sid)? {
                    defs.entry(k).or_insert(d);
                }
            }
        }
        Ok(defs)
    }

    fn check_properties(
        &self,
        type_id: &str,
        props: &BTreeMap<String, PropertyValue>,
    ) -> Result<BTreeMap<String, PropertyDefinition>> {
        let defs = self.applicable_defs(type_id, props)?;
        for (k, v) in props {
            let def = defs.get(k).ok_or_else(|| RepoError::UnknownProperty {
                type_id: type_id.to_string(),
                property: k.clone(),
            })?;
            def.check(v)?;
        }
        Ok(defs)
    }

    // --- planning --------------------------------------------------------

    fn next_token(&self, offset: u64) -> u64 {
        self.log.last().map_or(0, |e| e.token) + 1 + offset
    }

    fn change(&self, offset: u64, kind: ChangeType, record: ObjectRecord, at: DateTime<Utc>) -> JournalRecord {
        JournalRecord::Change {
            event: ChangeEvent::of(self.next_token(offset), kind, &record, at),
            object: record,
            content: None,
        }
    }

    fn plan_create(&mut self, principal: &str, new: NewObject) -> Result<Vec<JournalRecord>> {
        let def = self.type_def(&new.type_id)?.clone();
        if def.base_type == BaseType::Secondary {
            return Err(RepoError::NotCreatable(def.type_id));
        }
        if new.name.trim().is_empty() {
            return Err(RepoError::InvalidArgument("name must not be empty".into()));
        }
        let mut props = new.properties;
        let defs = self.check_properties(&def.type_id, &props)?;
        for d in defs.values() {
            if !props.contains_key(&d.property_id) {
                if let Some(v) = &d.default_value {
                    props.insert(d.property_id.clone(), v.clone());
                } else if d.required {
                    return Err(RepoError::MissingProperty(d.property_id.clone()));
                }
            }
        }

        let mut parents = Vec::new();
        let (mut source_id, mut target_id) = (None, None);
        if def.base_type == BaseType::Relationship {
            if new.parent_id.is_some() {
                return Err(RepoError::InvalidArgument("relationships cannot be filed".into()));
            }
            let endpoint = |e: Option<ObjectId>, which: &str| -> Result<ObjectId> {
                let e = e.ok_or_else(|| RepoError::InvalidArgument(format!("relationship needs a {which}")))?;
                let rec = self
                    .objects
                    .get(&e)
                    .ok_or_else(|| RepoError::DanglingEndpoint(e.clone()))?;
                if rec.is_relationship() {
                    return Err(RepoError::InvalidArgument(format!(
                        "relationship {which} `{e}` is itself a relationship"
                    )));
                }
                Ok(e)
            };
            source_id = Some(endpoint(new.source_id, "source")?);
            target_id = Some(endpoint(new.target_id, "target")?);
        } else {
            if new.source_id.is_some() || new.target_id.is_some() {
                return Err(RepoError::InvalidArgument("only relationships have endpoints".into()));
            }
            match new.parent_id {
                Some(p) => {
                    self.folder(&p)?;
                    parents.push(p);
                }
                None if def.base_type == BaseType::Folder => {
                    let marker = props.get(SECONDARY_TYPE_IDS).is_some_and(|v| {
                        v.scalars()
                            .iter()
                            .any(|s| matches!(s, Scalar::Id(t) if t == super::types::CASE_FILE_TYPE))
                    });
                    if !marker {
                        parents.push(self.root_id.clone());
                    }
                }
                None => {}
            }
        }
        if new.content.is_some() && def.base_type != BaseType::Document {
            return Err(RepoError::NotADocument(ObjectId::new(new.name)));
        }

        let id = format_id(self.next_id);
        let is_case_root = def.base_type == BaseType::Folder
            && props
                .get(SECONDARY_TYPE_IDS)
                .is_some_and(|v| v.scalars().contains(&Scalar::Id(super::types::CASE_FILE_TYPE.into())));
        let case_index = if is_case_root || def.base_type == BaseType::Relationship {
            0
        } else {
            self.index_for(&new.name, &parents)
        };
        for p in &parents {
            self.check_unique_name(p, &new.name, case_index, None)?;
        }
        let now = self.now();
        let record = ObjectRecord {
            object_id: id.clone(),
            type_id: def.type_id.clone(),
            base_type: def.base_type,
            name: new.name,
            properties: props,
            parent_ids: parents,
            source_id,
            target_id,
            content: new.content.as_ref().map(ContentStream::info),
            version_series_id: id,
            version_label: "1.0".into(),
            is_latest_version: true,
            case_index,
            acl: Vec::new(),
            created_by: principal.to_string(),
            last_modified_by: principal.to_string(),
            creation_date: now,
            last_modification_date: now,
        };
        let mut rec = self.change(0, ChangeType::Created, record, now);
        if let (JournalRecord::Change { content, .. }, Some(c)) = (&mut rec, &new.content) {
            *content = Some(encode_content(&c.bytes));
        }
        Ok(vec![rec])
    }

    fn plan_update(
        &mut self,
        principal: &str,
        id: &ObjectId,
        mut patch: BTreeMap<String, PropertyValue>,
    ) -> Result<Vec<JournalRecord>> {
        let mut rec = self.live_latest(id)?.clone();
        if *id == self.root_id {
            return Err(RepoError::RootFolder);
        }
        if let Some(name) = patch.remove(NAME_PROPERTY) {
            let name = name
                .as_str()
                .filter(|_| name.kind() == super::value::DataKind::String)
                .ok_or_else(|| RepoError::KindMismatch {
                    property: NAME_PROPERTY.into(),
                    expected: super::value::DataKind::String,
                    found: name.kind(),
                })?
                .to_string();
            if name.trim().is_empty() {
                return Err(RepoError::InvalidArgument("name must not be empty".into()));
            }
            if name != rec.name {
                if !rec.is_case_root() && !rec.is_relationship() {
                    rec.case_index = self.index_for(&name, &rec.parent_ids);
                }
                for p in &rec.parent_ids {
                    self.check_unique_name(p, &name, rec.case_index, Some(&rec.version_series_id))?;
                }
                rec.name = name;
            }
        }
        let mut merged = rec.properties.clone();
        merged.extend(patch);
        self.check_properties(&rec.type_id, &merged)?;
        rec.properties = merged;
        rec.last_modified_by = principal.to_string();
        rec.last_modification_date = self.now();
        let at = rec.last_modification_date;
        Ok(vec![self.change(0, ChangeType::Updated, rec, at)])
    }

    fn plan_file_in(&mut self, principal: &str, id: &ObjectId, folder_id: &ObjectId) -> Result<Vec<JournalRecord>> {
        let mut rec = self.live_latest(id)?.clone();
        self.folder(folder_id)?;
        if rec.is_folder() {
            return Err(RepoError::FolderMultiFiling(id.clone()));
        }
        if rec.is_relationship() {
            return Err(RepoError::RelationshipFiling(id.clone()));
        }
        if rec.parent_ids.contains(folder_id) {
            return Err(RepoError::AlreadyFiled {
                object: id.clone(),
                folder: folder_id.clone(),
            });
        }
        if self.case_of_parents(&rec.parent_ids).is_none() {
            if let Some(case) = self.case_of_folder(folder_id) {
                rec.case_index = self.next_case_index(&case, &rec.name);
            }
        }
        self.check_unique_name(folder_id, &rec.name, rec.case_index, Some(&rec.version_series_id))?;
        rec.parent_ids.push(folder_id.clone());
        rec.last_modified_by = principal.to_string();
        rec.last_modification_date = self.now();
        let at = rec.last_modification_date;
        Ok(vec![self.change(0, ChangeType::Updated, rec, at)])
    }

    fn plan_unfile(&mut self, principal: &str, id: &ObjectId, folder_id: &ObjectId) -> Result<Vec<JournalRecord>> {
        let mut rec = self.live_latest(id)?.clone();
        if rec.is_folder() {
            return Err(RepoError::FolderMultiFiling(id.clone()));
        }
        let Some(pos) = rec.parent_ids.iter().position(|p| p == folder_id) else {
            return Err(RepoError::NotAParent {
                object: id.clone(),
                folder: folder_id.clone(),
            });
        };
        rec.parent_ids.remove(pos);
        rec.last_modified_by = principal.to_string();
        rec.last_modification_date = self.now();
        let at = rec.last_modification_date;
        Ok(vec![self.change(0, ChangeType::Updated, rec, at)])
    }

    fn plan_set_content(
        &mut self,
        principal: &str,
        id: &ObjectId,
        content: ContentStream,
    ) -> Result<Vec<JournalRecord>> {
        let mut rec = self.live_latest(id)?.clone();
        if rec.base_type != BaseType::Document {
            return Err(RepoError::NotADocument(id.clone()));
        }
        rec.content = Some(content.info());
        rec.last_modified_by = principal.to_string();
        rec.last_modification_date = self.now();
        let at = rec.last_modification_date;
        let mut change = self.change(0, ChangeType::Updated, rec, at);
        if let JournalRecord::Change { content: c, .. } = &mut change {
            *c = Some(encode_content(&content.bytes));
        }
        Ok(vec![change])
    }

    fn plan_delete(&mut self, _principal: &str, id: &ObjectId) -> Result<Vec<JournalRecord>> {
        let rec = self.live_latest(id)?.clone();
        if *id == self.root_id {
            return Err(RepoError::RootFolder);
        }
        if rec.is_folder() && self.children.get(id).is_some_and(|c| !c.is_empty()) {
            return Err(RepoError::FolderNotEmpty(id.clone()));
        }
        let now = self.now();
        let mut out = Vec::new();
        if !rec.is_relationship() {
            for rel in self
                .relationships_of(&rec.version_series_id)
                .cloned()
                .collect::<Vec<_>>()
            {
                let r = self.objects[&rel].clone();
                out.push(self.change(out.len() as u64, ChangeType::Deleted, r, now));
            }
        }
        out.push(self.change(out.len() as u64, ChangeType::Deleted, rec, now));
        Ok(out)
    }

    fn plan_checkin(
        &mut self,
        principal: &str,
        id: &ObjectId,
        content: Option<ContentStream>,
        patch: BTreeMap<String, PropertyValue>,
    ) -> Result<Vec<JournalRecord>> {
        let old = self.live_latest(id)?.clone();
        if old.base_type != BaseType::Document {
            return Err(RepoError::NotADocument(id.clone()));
        }
        if patch.contains_key(NAME_PROPERTY) {
            return Err(RepoError::InvalidArgument(
                "a checkin cannot rename the document".into(),
            ));
        }
        let mut props = old.properties.clone();
        props.extend(patch);
        self.check_properties(&old.type_id, &props)?;

        let now = self.now();
        let new_id = format_id(self.next_id);
        let payload = match &content {
            Some(c) => Some(c.bytes.clone()),
            None => self.contents.get(id).map(|b| b.as_ref().clone()),
        };
        let new = ObjectRecord {
            object_id: new_id,
            properties: props,
            content: content
                .as_ref()
                .map(ContentStream::info)
                .or_else(|| old.content.clone()),
            version_label: format!("{}.0", old.major_version() + 1),
            created_by: principal.to_string(),
            last_modified_by: principal.to_string(),
            creation_date: now,
            last_modification_date: now,
            ..old.clone()
        };
        let archived = ObjectRecord {
            is_latest_version: false,
            parent_ids: Vec::new(),
            ..old.clone()
        };
        let deleted = JournalRecord::Change {
            event: ChangeEvent::of(self.next_token(0), ChangeType::Deleted, &old, now),
            object: archived,
            content: None,
        };
        let mut created = self.change(1, ChangeType::Created, new, now);
        if let (JournalRecord::Change { content: c, .. }, Some(bytes)) = (&mut created, payload) {
            *c = Some(encode_content(&bytes));
        }
        Ok(vec![deleted, created])
    }

    fn plan_acl(&mut self, principal: &str, id: &ObjectId, acl: Vec<Ace>) -> Result<Vec<JournalRecord>> {
        let mut rec = self.live(id)?.clone();
        if let Some(ace) = acl.iter().find(|a| a.permissions.is_empty()) {
            return Err(RepoError::EmptyPermissions(ace.principal.clone()));
        }
        rec.acl = acl;
        rec.last_modified_by = principal.to_string();
        rec.last_modification_date = self.now();
        let at = rec.last_modification_date;
        Ok(vec![self.change(0, ChangeType::Security, rec, at)])
    }

    // --- applying --------------------------------------------------------

    /// Applies planned records and describes them for observers.
    fn commit(&mut self, records: Vec<JournalRecord>) -> Result<Vec<Mutation>> {
        let mut out: Vec<Mutation> = Vec::new();
        let mut pending_checkin: Option<(u64, ObjectRecord, Context)> = None;
        for record in records {
            let JournalRecord::Change { event, object, .. } = &record else {
                self.apply(record)?;
                continue;
            };
            let token = event.token;
            let kind = event.change_type;
            let archive = kind == ChangeType::Deleted && !object.is_latest_version;
            let before = self.objects.get(&event.object_id).cloned();
            let after = object.clone();
            let mut context = Context::new();
            if let Some(b) = &before {
                self.describe(b, &mut context);
            }
            self.apply(record)?;
            self.describe(&after, &mut context);
            let before = before.unwrap_or_else(|| after.clone());
            let (tokens, kind) = match kind {
                ChangeType::Created => match pending_checkin.take() {
                    Some((deleted_token, previous, prev_context)) => {
                        for (id, c) in prev_context {
                            context.entry(id).or_insert(c);
                        }
                        (
                            vec![deleted_token, token],
                            MutationKind::CheckedIn {
                                previous,
                                current: after,
                            },
                        )
                    }
                    None => (vec![token], MutationKind::Created(after)),
                },
                ChangeType::Deleted if archive => {
                    pending_checkin = Some((token, before, context));
                    continue;
                }
                ChangeType::Deleted => (vec![token], MutationKind::Deleted(before)),
                ChangeType::Updated => (vec![token], MutationKind::Updated { before, after }),
                ChangeType::Security => (vec![token], MutationKind::Security(after)),
            };
            out.push(Mutation { tokens, kind, context });
        }
        Ok(out)
    }

    /// Records name and case of `rec`, its parents and endpoints. A known
    /// case is never overwritten by "no case".
    fn describe(&self, rec: &ObjectRecord, context: &mut Context) {
        let mut note = |id: &ObjectId, name: &str, case: Option<ObjectId>| {
            let entry = context.entry(id.clone()).or_insert_with(|| ItemContext {
                name: name.to_string(),
                case_root: None,
            });
            entry.name = name.to_string();
            if case.is_some() {
                entry.case_root = case;
            }
        };
        note(&rec.object_id, &rec.name, self.case_of_record(rec));
        for p in &rec.parent_ids {
            if let Some(folder) = self.objects.get(p) {
                note(p, &folder.name, self.case_of_folder(p));
            }
        }
        for e in [&rec.source_id, &rec.target_id].into_iter().flatten() {
            if let Some(end) = self.objects.get(e) {
                let case = self.latest_for(e).ok().and_then(|l| self.case_of_record(l));
                note(e, &end.name, case);
            }
        }
    }

    fn bump_id(&mut self, id: &ObjectId) {
        if let Some(n) = id_number(id) {
            self.next_id = self.next_id.max(n + 1);
        }
    }

    fn note_index(&mut self, rec: &ObjectRecord) {
        if rec.is_case_root() || rec.is_relationship() {
            return;
        }
        if let Some(case) = self.case_of_parents(&rec.parent_ids) {
            let next = self.case_counters.entry((case, rec.name.clone())).or_insert(0);
            *next = (*next).max(rec.case_index + 1);
        }
    }

    fn apply(&mut self, record: JournalRecord) -> Result<()> {
        match &record {
            JournalRecord::Repository {
                repository_id,
                root_folder,
            } => {
                self.repository_id = repository_id.clone();
                self.root_id = root_folder.object_id.clone();
                self.bump_id(&root_folder.object_id);
                self.series
                    .insert(root_folder.object_id.clone(), vec![root_folder.object_id.clone()]);
                self.children.entry(root_folder.object_id.clone()).or_default();
                self.objects.insert(root_folder.object_id.clone(), root_folder.clone());
            }
            JournalRecord::Type { definition } => {
                self.types.insert(definition.type_id.clone(), definition.clone());
            }
            JournalRecord::Change { event, object, content } => {
                let id = object.object_id.clone();
                let series = object.version_series_id.clone();
                self.last_time = self.last_time.max(event.timestamp);
                match event.change_type {
                    ChangeType::Created => {
                        self.bump_id(&id);
                        self.series.entry(series.clone()).or_default().push(id.clone());
                        for p in &object.parent_ids {
                            let kids = self.children.entry(p.clone()).or_default();
                            if !kids.contains(&series) {
                                kids.push(series.clone());
                            }
                        }
                        if object.is_folder() {
                            self.children.entry(id.clone()).or_default();
                        }
                        if object.is_relationship() {
                            for e in [&object.source_id, &object.target_id].into_iter().flatten() {
                                let end_series = self
                                    .objects
                                    .get(e)
                                    .map_or_else(|| e.clone(), |r| r.version_series_id.clone());
                                self.relationships.entry(end_series).or_default().insert(id.clone());
                            }
                        }
                        self.objects.insert(id.clone(), object.clone());
                        self.note_index(object);
                    }
                    ChangeType::Updated | ChangeType::Security => {
                        let before = self.live(&id)?.clone();
                        for p in before.parent_ids.iter().filter(|p| !object.parent_ids.contains(p)) {
                            if let Some(kids) = self.children.get_mut(p) {
                                kids.retain(|s| *s != series);
                            }
                        }
                        for p in object.parent_ids.iter().filter(|p| !before.parent_ids.contains(p)) {
                            let kids = self.children.entry(p.clone()).or_default();
                            if !kids.contains(&series) {
                                kids.push(series.clone());
                            }
                        }
                        if object.content.is_none() {
                            self.contents.remove(&id);
                        }
                        self.objects.insert(id.clone(), object.clone());
                        self.note_index(object);
                    }
                    ChangeType::Deleted if !object.is_latest_version => {
                        self.objects.insert(id.clone(), object.clone());
                    }
                    ChangeType::Deleted => {
                        let before = self.live(&id)?.clone();
                        for p in &before.parent_ids {
                            if let Some(kids) = self.children.get_mut(p) {
                                kids.retain(|s| *s != series);
                            }
                        }
                        if before.is_relationship() {
                            for set in self.relationships.values_mut() {
                                set.remove(&id);
                            }
                        }
                        self.relationships.remove(&series);
                        self.children.remove(&id);
                        for v in self.series.remove(&series).unwrap_or_default() {
                            self.objects.remove(&v);
                            self.contents.remove(&v);
                            self.tombstones.insert(v);
                        }
                    }
                }
                if let Some(text) = content {
                    self.contents.insert(id, Arc::new(decode_content(text)?));
                }
                self.log.push(event.clone());
            }
        }
        self.journal.push(record);
        Ok(())
    }
}
