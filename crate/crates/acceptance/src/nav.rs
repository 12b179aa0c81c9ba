//! Random case files and a full-scan navigation oracle.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use casefs_core::casefile::{CaseFileError, CaseFileHandle, CaseFileItemRef, CaseFiles};
use casefs_core::repo::{
    LocalSession, NewObject, ObjectId, ObjectRecord, ObjectService, PropertyValue, Repository, DESCRIPTION,
    NAME_PROPERTY,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::tables;

pub const MAX_OBJECTS: usize = 50;
pub const MAX_DEPTH: usize = 8;

/// Names drawn for items, so that duplicates are common.
pub const NAMES: [&str; 6] = ["report", "Data A", "picture", "memo", "x", "Incoming documents"];

pub type Files = CaseFiles<LocalSession>;

pub struct World {
    pub repo: Arc<Repository>,
    pub files: Files,
    pub cases: Vec<CaseFileHandle>,
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> Option<&'a T> {
    (!items.is_empty()).then(|| &items[rng.random_range(0..items.len())])
}

fn name(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.8) {
        NAMES[rng.random_range(0..NAMES.len())].to_string()
    } else {
        format!("n{}", rng.random_range(0..1000))
    }
}

/// Depth of a folder below its case root, following first parents.
fn depth(repo: &Repository, root: &ObjectId, folder: &ObjectId) -> usize {
    let mut d = 0;
    let mut cur = folder.clone();
    while &cur != root {
        match repo.get_object(&cur).ok().and_then(|r| r.parent_ids.first().cloned()) {
            Some(p) => cur = p,
            None => break,
        }
        d += 1;
    }
    d
}

/// `cases` cases sharing one repository. Items are mostly filed inside their
/// own case, with some multi-filing and relationships across cases, some
/// renames and some deletions. Every case gets at least two items named
/// "report" in different folders.
pub fn build_world(rng: &mut ChaCha8Rng, cases: usize) -> World {
    let repo = Arc::new(Repository::in_memory());
    let files = CaseFiles::new(LocalSession::new(repo.clone(), "generator"));
    let mut handles = Vec::new();
    for c in 0..cases {
        let case = files
            .create_case_file(&format!("case {}", c % 3), BTreeMap::new())
            .expect("case");
        let root = case.root_folder_object_id.clone();
        let mut folders = vec![root.clone()];
        let mut items: Vec<CaseFileItemRef> = Vec::new();
        let budget = rng.random_range(8..=MAX_OBJECTS);
        let mut created = 1;

        // Forced duplicates: one "report" at the root, one in a sub-folder.
        let sub = files
            .create_folder_item(&case, "sub", "cmis:folder", BTreeMap::new(), None)
            .unwrap();
        folders.push(sub.object_id.clone().unwrap());
        for parent in [None, Some(&sub)] {
            items.push(
                files
                    .create_document_item(&case, "report", "cmis:document", BTreeMap::new(), parent, None)
                    .unwrap(),
            );
        }
        items.push(sub);
        created += 3;

        while created < budget {
            let roll = rng.random_range(0..100);
            let parent_id = pick(rng, &folders).unwrap().clone();
            let parent_depth = depth(&repo, &root, &parent_id);
            let parent = files.item(&parent_id).unwrap();
            let parent_arg = (parent_id != root).then_some(&parent);
            let made = match roll {
                0..=44 if parent_depth < MAX_DEPTH => {
                    let mut props = BTreeMap::new();
                    if rng.random_bool(0.3) {
                        props.insert(DESCRIPTION.to_string(), PropertyValue::string(format!("d{created}")));
                    }
                    files
                        .create_document_item(&case, &name(rng), "cmis:document", props, parent_arg, None)
                        .ok()
                }
                45..=69 if parent_depth < MAX_DEPTH => {
                    let f = files
                        .create_folder_item(&case, &name(rng), "cmis:folder", BTreeMap::new(), parent_arg)
                        .ok();
                    if let Some(f) = &f {
                        folders.push(f.object_id.clone().unwrap());
                    }
                    f
                }
                70..=84 => {
                    let mut ends: Vec<CaseFileItemRef> = items
                        .iter()
                        .filter(|i| !i.definition_type_uri.ends_with("Relationship"))
                        .cloned()
                        .collect();
                    ends.push(files.item(&root).unwrap());
                    let s = pick(rng, &ends).cloned();
                    let t = pick(rng, &ends).cloned();
                    match (s, t) {
                        (Some(s), Some(t)) => files.create_relationship_item(&case, &name(rng), &s, &t).ok(),
                        _ => None,
                    }
                }
                85..=89 => {
                    // Relationship with one end in an earlier case.
                    let foreign = handles
                        .last()
                        .and_then(|h: &CaseFileHandle| files.items(h).ok())
                        .unwrap_or_default();
                    let own: Vec<_> = items.iter().filter_map(|i| i.object_id.clone()).collect();
                    match (pick(rng, &foreign), pick(rng, &own)) {
                        (Some(f), Some(o)) if !f.is_relationship() => {
                            let (s, t) = if rng.random_bool(0.5) {
                                (f.object_id.clone(), o.clone())
                            } else {
                                (o.clone(), f.object_id.clone())
                            };
                            repo.create_object("generator", NewObject::relationship(name(rng), s, t))
                                .ok()
                                .map(|r| CaseFileItemRef::of(&r))
                        }
                        _ => None,
                    }
                }
                90..=93 => {
                    // Multi-file a document, possibly into another case.
                    let docs: Vec<_> = items
                        .iter()
                        .filter(|i| i.definition_type_uri.ends_with("Document"))
                        .filter_map(|i| i.object_id.clone())
                        .collect();
                    let mut targets = folders.clone();
                    if let Some(h) = handles.last() {
                        targets.push(h.root_folder_object_id.clone());
                    }
                    if let (Some(d), Some(f)) = (pick(rng, &docs), pick(rng, &targets)) {
                        let _ = repo.file_in("generator", d, f);
                    }
                    None
                }
                94..=96 => {
                    let live: Vec<_> = items
                        .iter()
                        .filter(|i| !i.definition_type_uri.ends_with("Folder"))
                        .filter_map(|i| i.object_id.clone())
                        .collect();
                    if let Some(id) = pick(rng, &live) {
                        let _ = repo.update_properties(
                            "generator",
                            id,
                            BTreeMap::from([(NAME_PROPERTY.to_string(), PropertyValue::string(name(rng)))]),
                        );
                    }
                    None
                }
                _ => {
                    let live: Vec<_> = items
                        .iter()
                        .filter(|i| !i.definition_type_uri.ends_with("Folder"))
                        .filter_map(|i| i.object_id.clone())
                        .collect();
                    if let Some(id) = pick(rng, &live) {
                        let _ = repo.delete_object("generator", id);
                    }
                    None
                }
            };
            if let Some(m) = made {
                items.push(m);
            }
            created += 1;
        }
        handles.push(case);
    }
    World {
        repo,
        files,
        cases: handles,
    }
}

/// Full-scan view of one repository snapshot.
pub struct Oracle {
    latest: BTreeMap<ObjectId, ObjectRecord>,
    series_of: HashMap<ObjectId, ObjectId>,
    latest_of_series: HashMap<ObjectId, ObjectId>,
    any: HashMap<ObjectId, ObjectRecord>,
}

/// What a navigation call returned, reduced to comparable form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Item(Option<ObjectId>),
    Value(Option<PropertyValue>),
    NotAFolder,
}

impl Oracle {
    pub fn new(repo: &Repository) -> Self {
        let all = repo.all_objects();
        let latest = repo.latest_objects();
        Oracle {
            series_of: all
                .iter()
                .map(|r| (r.object_id.clone(), r.version_series_id.clone()))
                .collect(),
            latest_of_series: latest
                .values()
                .map(|r| (r.version_series_id.clone(), r.object_id.clone()))
                .collect(),
            any: all.into_iter().map(|r| (r.object_id.clone(), r)).collect(),
            latest,
        }
    }

    fn latest_id(&self, id: &ObjectId) -> Option<&ObjectId> {
        self.latest_of_series.get(self.series_of.get(id)?)
    }

    fn folder_in_case(&self, case: &CaseFileHandle, folder: &ObjectId) -> bool {
        let mut cur = folder;
        loop {
            if cur == &case.root_folder_object_id {
                return true;
            }
            match self.any.get(cur).and_then(|r| r.parent_ids.first()) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    pub fn contains(&self, case: &CaseFileHandle, r: &ObjectRecord) -> bool {
        if r.object_id == case.root_folder_object_id {
            return true;
        }
        if r.is_relationship() {
            return r
                .source_id
                .as_ref()
                .and_then(|s| self.latest_id(s))
                .and_then(|s| self.latest.get(s))
                .is_some_and(|s| !s.is_relationship() && self.contains(case, s));
        }
        r.parent_ids.iter().any(|p| self.folder_in_case(case, p))
    }

    /// Items filed anywhere below the case root.
    pub fn members(&self, case: &CaseFileHandle) -> Vec<&ObjectRecord> {
        self.latest
            .values()
            .filter(|r| !r.is_relationship() && r.object_id != case.root_folder_object_id)
            .filter(|r| r.parent_ids.iter().any(|p| self.folder_in_case(case, p)))
            .collect()
    }

    /// Relationships anchored in the case.
    pub fn relationships(&self, case: &CaseFileHandle) -> Vec<&ObjectRecord> {
        self.latest
            .values()
            .filter(|r| r.is_relationship() && self.contains(case, r))
            .collect()
    }

    fn lowest<'a>(found: impl Iterator<Item = &'a ObjectRecord>) -> Answer {
        Answer::Item(
            found
                .min_by(|a, b| (a.case_index, &a.object_id).cmp(&(b.case_index, &b.object_id)))
                .map(|r| r.object_id.clone()),
        )
    }

    pub fn resolve(&self, case: &CaseFileHandle, name: &str) -> Answer {
        Self::lowest(self.members(case).into_iter().filter(|r| r.name == name))
    }

    pub fn resolve_at(&self, case: &CaseFileHandle, name: &str, index: u64) -> Answer {
        Answer::Item(
            self.members(case)
                .into_iter()
                .find(|r| r.name == name && r.case_index == index)
                .map(|r| r.object_id.clone()),
        )
    }

    pub fn child(&self, item: &ObjectId, name: &str) -> Answer {
        if !self.latest[item].is_folder() {
            return Answer::NotAFolder;
        }
        Self::lowest(
            self.latest
                .values()
                .filter(|r| r.parent_ids.contains(item) && r.name == name),
        )
    }

    pub fn parent(&self, case: &CaseFileHandle, item: &ObjectId) -> Answer {
        if item == &case.root_folder_object_id {
            return Answer::Item(None);
        }
        Answer::Item(
            self.latest[item]
                .parent_ids
                .iter()
                .find(|p| self.folder_in_case(case, p))
                .cloned(),
        )
    }

    fn relationships_by_age(&self) -> Vec<&ObjectRecord> {
        let mut rels: Vec<_> = self.latest.values().filter(|r| r.is_relationship()).collect();
        rels.sort_by(|a, b| a.object_id.cmp(&b.object_id));
        rels
    }

    pub fn source(&self, case: &CaseFileHandle, item: &ObjectId) -> Answer {
        for rel in self.relationships_by_age() {
            let (Some(s), Some(t)) = (&rel.source_id, &rel.target_id) else {
                continue;
            };
            if self.latest_id(t) != Some(item) {
                continue;
            }
            let source = &self.latest[self.latest_id(s).unwrap()];
            if self.contains(case, source) {
                return Answer::Item(Some(source.object_id.clone()));
            }
        }
        Answer::Item(None)
    }

    pub fn target(&self, case: &CaseFileHandle, item: &ObjectId, name: &str) -> Answer {
        for rel in self.relationships_by_age() {
            let (Some(s), Some(t)) = (&rel.source_id, &rel.target_id) else {
                continue;
            };
            if self.latest_id(s) != Some(item) {
                continue;
            }
            let target = &self.latest[self.latest_id(t).unwrap()];
            if target.name == name && self.contains(case, target) {
                return Answer::Item(Some(target.object_id.clone()));
            }
        }
        Answer::Item(None)
    }

    pub fn property(&self, item: &ObjectId, property: &str) -> Answer {
        let r = &self.latest[item];
        Answer::Value(match property {
            "cmis:name" => Some(PropertyValue::string(&r.name)),
            "index" => Some(PropertyValue::integer(r.case_index as i64)),
            other => r.properties.get(other).cloned(),
        })
    }

    pub fn record(&self, id: &ObjectId) -> &ObjectRecord {
        &self.latest[id]
    }
}

fn item_answer(r: Result<CaseFileItemRef, CaseFileError>) -> Result<Answer, String> {
    match r {
        Ok(i) if i.empty => Ok(Answer::Item(None)),
        Ok(i) => Ok(Answer::Item(i.object_id)),
        Err(CaseFileError::NotAFolder(_)) => Ok(Answer::NotAFolder),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs `queries` random navigation calls on one case and compares each with
/// the oracle. Returns the number of agreeing answers.
pub fn check_case(
    rng: &mut ChaCha8Rng,
    world: &World,
    oracle: &Oracle,
    case: &CaseFileHandle,
    queries: usize,
) -> Result<usize, String> {
    let files = &world.files;
    let mut pool: Vec<ObjectId> = oracle.members(case).iter().map(|r| r.object_id.clone()).collect();
    pool.extend(oracle.relationships(case).iter().map(|r| r.object_id.clone()));
    pool.push(case.root_folder_object_id.clone());
    let everything: Vec<ObjectId> = oracle.latest.keys().cloned().collect();
    let mut names: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    names.extend(oracle.members(case).iter().map(|r| r.name.clone()));
    names.push("nope".into());
    let properties = ["cmis:name", DESCRIPTION, "index", "nope"];

    let mut agreed = 0;
    for q in 0..queries {
        let id = if rng.random_bool(0.9) {
            pick(rng, &pool).unwrap().clone()
        } else {
            pick(rng, &everything).unwrap().clone()
        };
        let item = files.item(&id).map_err(|e| e.to_string())?;
        let expected_uri = tables::definition_uri_for(oracle.record(&id).base_type.type_id());
        if Some(item.definition_type_uri.as_str()) != expected_uri {
            return Err(format!("{id}: definition type {}", item.definition_type_uri));
        }
        let name = pick(rng, &names).unwrap().clone();
        let (what, got, want) = match rng.random_range(0..7) {
            0 => (
                "resolveItem",
                item_answer(files.resolve_item(case, &name))?,
                oracle.resolve(case, &name),
            ),
            1 => {
                let index = rng.random_range(0..5);
                (
                    "resolveItemAt",
                    item_answer(files.resolve_item_at(case, &name, index))?,
                    oracle.resolve_at(case, &name, index),
                )
            }
            2 => (
                "itemChild",
                item_answer(files.item_child(&item, &name))?,
                oracle.child(&id, &name),
            ),
            3 => (
                "itemParent",
                item_answer(files.item_parent(case, &item))?,
                oracle.parent(case, &id),
            ),
            4 => (
                "itemSource",
                item_answer(files.item_source(case, &item))?,
                oracle.source(case, &id),
            ),
            5 => (
                "itemTarget",
                item_answer(files.item_target(case, &item, &name))?,
                oracle.target(case, &id, &name),
            ),
            _ => {
                let p = properties[rng.random_range(0..properties.len())];
                let el = files.item_property(&item, p).map_err(|e| e.to_string())?;
                ("itemProperty", Answer::Value(el.value), oracle.property(&id, p))
            }
        };
        if got != want {
            let show = |a: &Answer| match a {
                Answer::Item(Some(i)) => {
                    let r = oracle.record(i);
                    format!("{i} {:?}#{} in {:?}", r.name, r.case_index, r.parent_ids)
                }
                other => format!("{other:?}"),
            };
            return Err(format!(
                "query {q} {what}({id}, {name:?}) in {}: got {}, oracle {}",
                case.case_id,
                show(&got),
                show(&want)
            ));
        }
        agreed += 1;
    }
    Ok(agreed)
}

/// Builds the example case and checks its structure and navigation.
pub fn check_figure() -> Result<(), String> {
    let repo = Arc::new(Repository::in_memory());
    let files = CaseFiles::new(LocalSession::new(repo.clone(), "worker"));
    let err = |e: CaseFileError| e.to_string();
    let none = BTreeMap::new;
    let case = files.create_case_file("project XX", none()).map_err(err)?;
    let data_a = files
        .create_document_item(&case, "Data A", "cmis:document", none(), None, None)
        .map_err(err)?;
    let incoming = files
        .create_folder_item(&case, "Incoming documents", "cmis:folder", none(), None)
        .map_err(err)?;
    let content = |m: &str| Some(casefs_core::repo::ContentStream::new(m, vec![1, 2, 3]));
    let b = files
        .create_document_item(
            &case,
            "picture B",
            "cmis:document",
            none(),
            Some(&incoming),
            content("image/png"),
        )
        .map_err(err)?;
    let c = files
        .create_document_item(
            &case,
            "document C",
            "cmis:document",
            none(),
            Some(&incoming),
            content("application/pdf"),
        )
        .map_err(err)?;
    files.create_relationship_item(&case, "relates", &c, &b).map_err(err)?;

    let id = |i: &CaseFileItemRef| i.object_id.clone();
    let want = |what: &str, got: Option<ObjectId>, expected: Option<ObjectId>| {
        if got == expected {
            Ok(())
        } else {
            Err(format!("{what}: got {got:?}, expected {expected:?}"))
        }
    };
    let root = files.item(&case.root_folder_object_id).map_err(err)?;
    let children = |f: &ObjectId| -> Result<Vec<String>, String> {
        let mut v: Vec<String> = repo
            .get_children(f)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|r| r.name)
            .collect();
        v.sort();
        Ok(v)
    };
    if children(&case.root_folder_object_id)? != ["Data A", "Incoming documents"] {
        return Err("case root children".into());
    }
    if children(incoming.object_id.as_ref().unwrap())? != ["document C", "picture B"] {
        return Err("Incoming documents children".into());
    }
    want(
        "itemChild(root, Data A)",
        id(&files.item_child(&root, "Data A").map_err(err)?),
        id(&data_a),
    )?;
    want(
        "itemChild(root, Incoming documents)",
        id(&files.item_child(&root, "Incoming documents").map_err(err)?),
        id(&incoming),
    )?;
    want(
        "itemChild(Incoming, picture B)",
        id(&files.item_child(&incoming, "picture B").map_err(err)?),
        id(&b),
    )?;
    want(
        "itemChild(Incoming, document C)",
        id(&files.item_child(&incoming, "document C").map_err(err)?),
        id(&c),
    )?;
    for (label, item, parent) in [
        ("Data A", &data_a, id(&root)),
        ("Incoming documents", &incoming, id(&root)),
        ("picture B", &b, id(&incoming)),
        ("document C", &c, id(&incoming)),
    ] {
        want(
            &format!("itemParent({label})"),
            id(&files.item_parent(&case, item).map_err(err)?),
            parent,
        )?;
    }
    let parent_of_root = files.item_parent(&case, &root).map_err(err)?;
    want(
        "itemParent(root)",
        id(&parent_of_root).filter(|_| !parent_of_root.empty),
        None,
    )?;
    want(
        "itemSource(picture B)",
        id(&files.item_source(&case, &b).map_err(err)?),
        id(&c),
    )?;
    want(
        "itemTarget(document C, picture B)",
        id(&files.item_target(&case, &c, "picture B").map_err(err)?),
        id(&b),
    )?;
    for (label, item) in [
        ("Data A", &data_a),
        ("Incoming documents", &incoming),
        ("document C", &c),
    ] {
        let s = files.item_source(&case, item).map_err(err)?;
        if !s.empty {
            return Err(format!("itemSource({label}) should be empty"));
        }
    }
    for (label, item) in [
        ("Data A", &data_a),
        ("picture B", &b),
        ("Incoming documents", &incoming),
    ] {
        for n in ["picture B", "document C", "Data A"] {
            if !files.item_target(&case, item, n).map_err(err)?.empty {
                return Err(format!("itemTarget({label}, {n}) should be empty"));
            }
        }
    }
    if repo
        .get_content(data_a.object_id.as_ref().unwrap())
        .map_err(|e| e.to_string())?
        .is_some()
    {
        return Err("Data A has a content stream".into());
    }
    if repo
        .get_content(b.object_id.as_ref().unwrap())
        .map_err(|e| e.to_string())?
        .is_none()
    {
        return Err("picture B lost its content".into());
    }
    Ok(())
}

/// Index law for one `n`: filing `n` same-named items yields 0..n-1, misses
/// are empty, and indices are never reused after deletion. The expected
/// index is kept by counting every filing of the name.
pub fn check_index_law(rng: &mut ChaCha8Rng, n: u64) -> Result<(), String> {
    let repo = Arc::new(Repository::in_memory());
    let files = CaseFiles::new(LocalSession::new(repo.clone(), "worker"));
    let err = |e: CaseFileError| e.to_string();
    let case = files.create_case_file("c", BTreeMap::new()).map_err(err)?;
    // Enough folders that same-named siblings never collide.
    let mut folders = vec![None];
    for i in 0..12 {
        let f = files
            .create_folder_item(&case, &format!("f{i}"), "cmis:folder", BTreeMap::new(), None)
            .map_err(err)?;
        folders.push(Some(f));
    }
    // Noise under other names must not disturb the count.
    for i in 0..rng.random_range(0..4) {
        files
            .create_document_item(
                &case,
                &format!("other{i}"),
                "cmis:document",
                BTreeMap::new(),
                None,
                None,
            )
            .map_err(err)?;
    }

    let mut filed = 0u64;
    let mut live: Vec<(u64, ObjectId, usize)> = Vec::new();
    let file = |slot: usize| {
        files
            .create_document_item(
                &case,
                "same",
                "cmis:document",
                BTreeMap::new(),
                folders[slot].as_ref(),
                None,
            )
            .map_err(err)
    };
    let mut free: Vec<usize> = (0..folders.len()).collect();
    for _ in 0..n {
        let slot = free.swap_remove(rng.random_range(0..free.len()));
        let item = file(slot)?;
        if item.index != filed {
            return Err(format!("filing {filed} got index {}", item.index));
        }
        live.push((filed, item.object_id.unwrap(), slot));
        filed += 1;
    }
    let at = |i: u64| files.resolve_item_at(&case, "same", i).map_err(err);
    for (i, id, _) in &live {
        if at(*i)?.object_id.as_ref() != Some(id) {
            return Err(format!("resolveItemAt({i})"));
        }
    }
    for k in 0..3 {
        if !at(n + k)?.empty {
            return Err(format!("resolveItemAt({}) out of range is not empty", n + k));
        }
    }
    if files.resolve_item(&case, "same").map_err(err)?.object_id.as_ref() != Some(&live[0].1) {
        return Err("resolveItem does not return index 0".into());
    }

    let deletions = rng.random_range(1..=n as usize);
    let mut gone = Vec::new();
    for _ in 0..deletions {
        let (i, id, slot) = live.swap_remove(rng.random_range(0..live.len()));
        repo.delete_object("worker", &id).map_err(|e| e.to_string())?;
        free.push(slot);
        gone.push(i);
    }
    for _ in 0..rng.random_range(1..=3) {
        let slot = free.swap_remove(rng.random_range(0..free.len()));
        let item = file(slot)?;
        if item.index != filed {
            return Err(format!("after deletion, filing {filed} got index {}", item.index));
        }
        live.push((filed, item.object_id.unwrap(), slot));
        filed += 1;
    }
    // Renaming into the name counts as filing it.
    let other = files
        .create_document_item(
            &case,
            "renamed",
            "cmis:document",
            BTreeMap::new(),
            folders[0].as_ref(),
            None,
        )
        .map_err(err)?;
    if !live.iter().any(|(_, _, s)| *s == 0) {
        let r = files
            .service()
            .update_properties(
                other.object_id.as_ref().unwrap(),
                BTreeMap::from([(NAME_PROPERTY.to_string(), PropertyValue::string("same"))]),
            )
            .map_err(|e| e.to_string())?;
        if r.case_index != filed {
            return Err(format!("rename got index {}, expected {filed}", r.case_index));
        }
        live.push((filed, r.object_id, 0));
    }
    for i in gone {
        if !at(i)?.empty {
            return Err(format!("deleted index {i} still resolves"));
        }
    }
    let lowest = live.iter().min_by_key(|(i, _, _)| *i).unwrap();
    if files.resolve_item(&case, "same").map_err(err)?.object_id.as_ref() != Some(&lowest.1) {
        return Err("resolveItem does not return the lowest live index".into());
    }
    Ok(())
}
