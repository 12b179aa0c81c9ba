//! Random mutation scripts run twice: against an embedded repository with
//! pushed events, and against a served repository through the HTTP client
//! with events derived by a restarting poller.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use casefs_core::events::{
    apply_transition, map_mutation, CaseFileItemEvent, Deriver, Dispatcher, EmbeddedEvents, EventKind, LifecycleState,
};
use casefs_core::repo::{
    Ace, ContentStream, DataKind, LocalSession, Mutation, MutationObserver, NewObject, ObjectId, ObjectRecord,
    ObjectService, Permission, PropertyValue, Repository, Scalar, CASE_FILE_TYPE, DESCRIPTION, NAME_PROPERTY,
    SECONDARY_TYPE_IDS,
};
use casefs_wire::{FileCheckpoint, HttpClient, Poller, PollerConfig, Server};
use parking_lot::Mutex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PRINCIPAL: &str = "script";

#[derive(Debug, Clone, Copy)]
pub struct Op {
    pub code: u8,
    pub a: u32,
    pub b: u32,
}

pub fn random_script(rng: &mut ChaCha8Rng, len: usize) -> Vec<Op> {
    (0..len)
        .map(|_| Op {
            code: rng.random_range(0..14),
            a: rng.random(),
            b: rng.random(),
        })
        .collect()
}

fn pick<T>(items: &[T], n: u32) -> Option<&T> {
    (!items.is_empty()).then(|| &items[n as usize % items.len()])
}

fn case_marker() -> PropertyValue {
    PropertyValue::multi(DataKind::Id, vec![Scalar::Id(CASE_FILE_TYPE.into())]).expect("marker")
}

/// Applies `op` through `svc`, choosing targets from `view`, the repository
/// `svc` writes to. Returns whether the repository accepted the operation.
pub fn apply(svc: &dyn ObjectService, view: &Repository, op: Op) -> bool {
    let live: Vec<ObjectRecord> = view
        .latest_objects()
        .into_values()
        .filter(|r| r.object_id != view.root_folder_id())
        .collect();
    let folders: Vec<&ObjectRecord> = live.iter().filter(|r| r.is_folder()).collect();
    let docs: Vec<&ObjectRecord> = live
        .iter()
        .filter(|r| r.base_type.type_id() == "cmis:document")
        .collect();
    let filed: Vec<&ObjectRecord> = live.iter().filter(|r| !r.is_relationship()).collect();
    let names = ["a", "b", "report", "Data A"];
    let name = names[op.b as usize % names.len()];
    let (a, b) = (op.a, op.b);
    let ok = |r: Result<ObjectRecord, _>| r.is_ok();
    match op.code {
        0 => ok(svc.create_object(
            NewObject::folder(format!("case {}", a % 4)).with_property(SECONDARY_TYPE_IDS, case_marker()),
        )),
        1 | 2 => match pick(&folders, a) {
            Some(f) => {
                let mut new = NewObject::document(name).in_folder(f.object_id.clone());
                if b % 3 == 0 {
                    new = new.with_content(ContentStream::new("text/plain", format!("{a}").into_bytes()));
                }
                ok(svc.create_object(new))
            }
            None => false,
        },
        3 => match pick(&folders, a) {
            Some(f) => ok(svc.create_object(NewObject::folder(format!("f{}", b % 5)).in_folder(f.object_id.clone()))),
            None => false,
        },
        4 => match (pick(&filed, a), pick(&filed, b)) {
            (Some(s), Some(t)) => {
                ok(svc.create_object(NewObject::relationship("rel", s.object_id.clone(), t.object_id.clone())))
            }
            _ => false,
        },
        5 => match pick(&live, a) {
            Some(o) => ok(svc.update_properties(
                &o.object_id,
                BTreeMap::from([(DESCRIPTION.to_string(), PropertyValue::string(format!("d{b}")))]),
            )),
            None => false,
        },
        6 => match pick(&filed, a) {
            Some(o) => ok(svc.update_properties(
                &o.object_id,
                BTreeMap::from([(NAME_PROPERTY.to_string(), PropertyValue::string(name))]),
            )),
            None => false,
        },
        7 => match (pick(&docs, a), pick(&folders, b)) {
            (Some(d), Some(f)) => ok(svc.file_in(&d.object_id, &f.object_id)),
            _ => false,
        },
        8 => match pick(&docs, a) {
            Some(d) => match pick(&d.parent_ids, b) {
                Some(p) => ok(svc.unfile(&d.object_id, p)),
                None => false,
            },
            None => false,
        },
        9 => match pick(&docs, a) {
            Some(d) => ok(svc.checkin(
                &d.object_id,
                (b % 2 == 0).then(|| ContentStream::new("text/plain", vec![b as u8])),
                BTreeMap::from([(DESCRIPTION.to_string(), PropertyValue::string(format!("v{b}")))]),
            )),
            None => false,
        },
        10 => match pick(&docs, a) {
            Some(d) => ok(svc.set_content(&d.object_id, ContentStream::new("text/plain", vec![b as u8]))),
            None => false,
        },
        11 | 12 => match pick(&live, a) {
            Some(o) => svc.delete_object(&o.object_id).is_ok(),
            None => false,
        },
        _ => match pick(&live, a) {
            Some(o) => ok(svc.apply_acl(&o.object_id, vec![Ace::new(format!("p{}", b % 3), [Permission::Read])])),
            None => false,
        },
    }
}

/// Pushed events, straight from the commit hook.
#[derive(Default)]
pub struct Recorder(pub Mutex<Vec<CaseFileItemEvent>>);

impl MutationObserver for Recorder {
    fn on_commit(&self, mutations: &[Mutation], root: &ObjectId) {
        let mut out = self.0.lock();
        for m in mutations {
            out.extend(map_mutation(m, root));
        }
    }
}

/// Everything one script run leaves behind for the checks.
pub struct Run {
    pub ops: usize,
    pub embedded: Arc<Repository>,
    pub served: Arc<Repository>,
    pub pushed: Vec<CaseFileItemEvent>,
    pub delivered: Vec<CaseFileItemEvent>,
    pub dispatcher: Arc<Dispatcher>,
    pub restarts: usize,
    pub paged_remote: Vec<Vec<u8>>,
    pub unbounded_remote: Vec<Vec<u8>>,
}

/// Events derived from the whole change log in one pass.
pub fn derive_all(repo: &Repository) -> Vec<CaseFileItemEvent> {
    let mut d = Deriver::new(repo.root_folder_id());
    let mut out = d.derive(&repo.change_log());
    out.extend(d.flush());
    out
}

fn poller(client: &HttpClient, batch: usize, cp: &std::path::Path) -> Result<Poller<HttpClient>, String> {
    let config = PollerConfig {
        batch_size: batch,
        ..PollerConfig::default()
    };
    Poller::new(client.clone(), config, Box::new(FileCheckpoint::new(cp))).map_err(|e| e.to_string())
}

fn encode_all(pages: impl IntoIterator<Item = casefs_core::repo::ChangeEvent>) -> Vec<Vec<u8>> {
    pages
        .into_iter()
        .map(|e| serde_json::to_vec(&e).expect("change events serialize"))
        .collect()
}

/// Runs `script` in both modes. The integration poller is stopped and
/// restarted from its checkpoint file at random points mid-script.
pub fn run_both(rng: &mut ChaCha8Rng, script: &[Op]) -> Result<Run, String> {
    let embedded = Arc::new(Repository::in_memory());
    let recorder = Arc::new(Recorder::default());
    embedded.add_observer(recorder.clone());
    let dispatcher = Arc::new(Dispatcher::new());
    EmbeddedEvents::attach(&embedded, dispatcher.clone());
    let local = LocalSession::new(embedded.clone(), PRINCIPAL);

    let served = Arc::new(Repository::in_memory());
    let server = Server::start(served.clone(), "127.0.0.1:0").map_err(|e| e.to_string())?;
    let client = HttpClient::new(server.url(), PRINCIPAL).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cp = dir.path().join("checkpoint.json");
    let batch = rng.random_range(1..=8);

    let mut restart_at: Vec<usize> = (0..rng.random_range(1..=3))
        .map(|_| rng.random_range(1..script.len()))
        .collect();
    restart_at.sort_unstable();
    let mut delivered = Vec::new();
    let mut current = poller(&client, batch, &cp)?;
    let mut restarts = 0;
    for (i, op) in script.iter().enumerate() {
        let a = apply(&local, &embedded, *op);
        let b = apply(&client, &served, *op);
        if a != b {
            return Err(format!("op {i} {op:?}: embedded accepted={a}, remote accepted={b}"));
        }
        for _ in restart_at.iter().filter(|r| **r == i) {
            // Consume a few pages, then stop and resume from the file.
            for _ in 0..rng.random_range(1..=4) {
                current
                    .poll_once(&mut |e: &CaseFileItemEvent| {
                        delivered.push(e.clone());
                        Ok(())
                    })
                    .map_err(|e| e.to_string())?;
            }
            drop(current);
            current = poller(&client, batch, &cp)?;
            restarts += 1;
        }
    }
    loop {
        let out = current
            .poll_once(&mut |e: &CaseFileItemEvent| {
                delivered.push(e.clone());
                Ok(())
            })
            .map_err(|e| e.to_string())?;
        if out.changes == 0 && out.events == 0 {
            break;
        }
    }
    if !current.dead_letters().is_empty() {
        return Err("dead letters with an infallible handler".into());
    }

    let mut paged = Vec::new();
    let mut token = 0;
    loop {
        let page = client.get_content_changes(token, 1).map_err(|e| e.to_string())?;
        if page.changes.is_empty() {
            break;
        }
        if page.changes.len() != 1 || page.next_token <= token {
            return Err(format!("bad page after token {token}"));
        }
        token = page.next_token;
        paged.extend(page.changes);
    }
    let unbounded = client.get_content_changes(0, usize::MAX).map_err(|e| e.to_string())?;
    server.shutdown().map_err(|e| e.to_string())?;

    let pushed = recorder.0.lock().clone();
    Ok(Run {
        ops: script.len(),
        embedded,
        served,
        pushed,
        delivered,
        dispatcher,
        restarts,
        paged_remote: encode_all(paged),
        unbounded_remote: encode_all(unbounded.changes),
    })
}

pub type Multisets = BTreeMap<ObjectId, BTreeMap<EventKind, usize>>;

/// Per-object event-kind counts. A deletion of one version followed by the
/// creation of a later version of the same series counts as one replace of
/// the new version, with the filing events of that pair dropped.
pub fn normalized(events: &[CaseFileItemEvent], view: &Repository) -> Multisets {
    let series = |id: &ObjectId| view.get_object(id).ok().map(|r| r.version_series_id);
    let mut skip = HashSet::new();
    let mut replaced: Vec<(ObjectId, ObjectId)> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        if e.kind != EventKind::Delete || skip.contains(&i) {
            continue;
        }
        let Some(s) = series(&e.item_object_id) else {
            continue;
        };
        let pair = events.iter().enumerate().skip(i + 1).find(|(j, c)| {
            c.kind == EventKind::Create && !skip.contains(j) && series(&c.item_object_id).as_ref() == Some(&s)
        });
        if let Some((j, c)) = pair {
            skip.insert(i);
            skip.insert(j);
            replaced.push((e.item_object_id.clone(), c.item_object_id.clone()));
        }
    }
    // Filing events that belong to a collapsed pair.
    let paired: HashSet<(ObjectId, Option<u64>)> = skip
        .iter()
        .map(|i| (events[*i].item_object_id.clone(), events[*i].source_token))
        .collect();
    let mut out = Multisets::new();
    for (_, new) in &replaced {
        *out.entry(new.clone())
            .or_default()
            .entry(EventKind::Replace)
            .or_default() += 1;
    }
    for (i, e) in events.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if matches!(e.kind, EventKind::AddChild | EventKind::RemoveChild) {
            if let Some(r) = &e.related_object_id {
                if paired.contains(&(r.clone(), e.source_token)) {
                    continue;
                }
            }
        }
        *out.entry(e.item_object_id.clone())
            .or_default()
            .entry(e.kind)
            .or_default() += 1;
    }
    out
}

/// Folds every item's events through the transition function, following
/// replaced versions to the item they replace. Returns the violations.
pub fn fold_lifecycles(events: &[CaseFileItemEvent]) -> Vec<String> {
    let mut states: HashMap<ObjectId, LifecycleState> = HashMap::new();
    let mut alias: HashMap<ObjectId, ObjectId> = HashMap::new();
    let mut bad = Vec::new();
    for e in events {
        let subject = match (e.kind, &e.related_object_id) {
            (EventKind::Replace, Some(old)) => {
                let root = alias.get(old).cloned().unwrap_or_else(|| old.clone());
                alias.insert(e.item_object_id.clone(), root.clone());
                root
            }
            _ => alias
                .get(&e.item_object_id)
                .cloned()
                .unwrap_or_else(|| e.item_object_id.clone()),
        };
        match apply_transition(states.get(&subject).copied(), e.kind) {
            Ok(s) => {
                states.insert(subject, s);
            }
            Err(err) => bad.push(format!("{e}: {err}")),
        }
    }
    bad
}
