//! Command execution. Every command is a thin adapter over library calls.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Stdio};
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::Duration;

use casefs_core::casefile::{
    CaseFileError, CaseFileHandle, CaseFileItemRef, CaseFiles, DefinitionType, Element, ItemState,
};
use casefs_core::events::{CaseFileItemEvent, DeriverState};
use casefs_core::models::{
    export_compat10, load_model, parse_model, serialize_model, store_model, stored_models, ModelError, ModelStoreError,
};
use casefs_core::repo::{
    Cardinality, ContentStream, ErrorKind, LocalSession, ObjectId, ObjectService, PropertyDefinition, PropertyValue,
    RepoError, Repository, Scalar,
};
use casefs_wire::{CheckpointStore, DeadLetter, FileCheckpoint, HttpClient, PollError, Poller, PollerConfig, Server};
use serde_json::json;
use thiserror::Error;

use crate::args::{CaseCommand, Cli, Command, DeadletterCommand, ItemCommand, Mode, ModelCommand, WatchArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    CaseFile(#[from] CaseFileError),
    #[error(transparent)]
    Repo(#[from] RepoError),
    #[error(transparent)]
    ModelStore(#[from] ModelStoreError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Poll(#[from] PollError),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    /// 1 for mistakes the user can fix, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        let user = match self {
            CliError::Usage(_) | CliError::Model(_) | CliError::File { .. } => true,
            CliError::CaseFile(e) => e.is_user_error(),
            CliError::Repo(e) => repo_user_error(e),
            CliError::ModelStore(ModelStoreError::Repo(e)) => repo_user_error(e),
            CliError::ModelStore(_) => true,
            CliError::Poll(PollError::Repo(e)) => repo_user_error(e),
            CliError::Poll(_) | CliError::Internal(_) => false,
        };
        if user {
            1
        } else {
            2
        }
    }
}

fn repo_user_error(e: &RepoError) -> bool {
    e.kind() != ErrorKind::Internal
}

fn file_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::File {
        path: path.to_path_buf(),
        source,
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Line-oriented or JSON output.
struct Out {
    json: bool,
    stdout: io::Stdout,
}

impl Out {
    fn line(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.stdout.lock(), "{}", text.as_ref()).map_err(|e| CliError::Internal(e.to_string()))
    }

    /// `text` in text mode, `value` as one JSON document otherwise.
    fn emit(&mut self, text: impl AsRef<str>, value: serde_json::Value) -> Result<()> {
        if self.json {
            self.line(value.to_string())
        } else {
            self.line(text)
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}

fn item_text(r: &CaseFileItemRef) -> String {
    let def = r.definition_type().map_or("?", DefinitionType::local_name);
    let id = r.object_id.as_ref().map_or("-", ObjectId::as_str);
    format!("{id}\t{}\t#{}\t{def}", r.name, r.index)
}

fn element_text(e: &Element) -> String {
    match &e.value {
        Some(v) => v.to_string(),
        None => "(empty)".into(),
    }
}

fn service(cli: &Cli) -> Result<Box<dyn ObjectService>> {
    match cli.mode {
        Mode::Embedded => {
            let repo = Repository::open(&cli.repo)?;
            Ok(Box::new(
                LocalSession::new(Arc::new(repo), cli.principal.clone()).following(),
            ))
        }
        Mode::Integration => {
            let url = cli
                .url
                .as_deref()
                .ok_or_else(|| CliError::Usage("--mode integration needs --url".into()))?;
            Ok(Box::new(HttpClient::new(url, cli.principal.clone())?))
        }
    }
}

fn sibling(repo: &Path, suffix: &str) -> PathBuf {
    let mut p = repo.as_os_str().to_owned();
    p.push(suffix);
    PathBuf::from(p)
}

pub fn dead_letter_path(repo: &Path) -> PathBuf {
    sibling(repo, ".deadletter.jsonl")
}

pub fn checkpoint_path(repo: &Path) -> PathBuf {
    sibling(repo, ".checkpoint.json")
}

pub fn run(cli: Cli) -> Result<()> {
    let mut out = Out {
        json: cli.json,
        stdout: io::stdout(),
    };
    match &cli.command {
        Command::Serve { addr } => serve(&cli, addr, &mut out),
        Command::Case(cmd) => case(&cli, cmd, &mut out),
        Command::Item(cmd) => item(&cli, cmd, &mut out),
        Command::Watch(args) => watch(&cli, args, &mut out),
        Command::Changes => changes(&cli, &mut out),
        Command::Model(cmd) => model(&cli, cmd, &mut out),
        Command::Deadletter(cmd) => deadletter(&cli, cmd, &mut out),
    }
}

fn serve(cli: &Cli, addr: &str, out: &mut Out) -> Result<()> {
    if cli.mode == Mode::Integration {
        return Err(CliError::Usage(
            "serve works on a journal file; drop --mode integration".into(),
        ));
    }
    let repo = Arc::new(Repository::open(&cli.repo)?);
    let server = Server::start(repo, addr).map_err(|e| CliError::Usage(format!("cannot listen on {addr}: {e}")))?;
    out.emit(
        format!("listening on {}", server.url()),
        json!({"url": server.url(), "repo": cli.repo}),
    )?;
    server.wait().map_err(|e| CliError::Internal(e.to_string()))
}

/// Collects the effective property definitions of `type_id`, including
/// those of its ancestors.
fn property_defs(svc: &dyn ObjectService, type_id: &str) -> Result<Vec<PropertyDefinition>> {
    let mut defs = Vec::new();
    let mut cur = Some(type_id.to_string());
    while let Some(t) = cur {
        let def = svc.get_type(&t)?;
        defs.extend(def.property_defs);
        cur = def.parent_type_id;
    }
    Ok(defs)
}

/// Parses `NAME=VALUE` arguments against the type's property definitions.
/// Repeating a multi-valued property appends to it.
fn typed_properties(
    svc: &dyn ObjectService,
    type_id: &str,
    args: &[String],
) -> Result<BTreeMap<String, PropertyValue>> {
    if args.is_empty() {
        return Ok(BTreeMap::new());
    }
    let defs = property_defs(svc, type_id)?;
    let mut values: BTreeMap<String, (PropertyDefinition, Vec<Scalar>)> = BTreeMap::new();
    for arg in args {
        let (name, text) = arg
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("property `{arg}` is not NAME=VALUE")))?;
        let def = defs
            .iter()
            .find(|d| d.property_id == name)
            .ok_or_else(|| CliError::Usage(format!("type `{type_id}` has no property `{name}`")))?;
        let scalar = Scalar::parse(def.data_kind, text)?;
        let entry = values
            .entry(name.to_string())
            .or_insert_with(|| (def.clone(), Vec::new()));
        if def.cardinality == Cardinality::Single && !entry.1.is_empty() {
            return Err(CliError::Usage(format!("property `{name}` takes a single value")));
        }
        entry.1.push(scalar);
    }
    values
        .into_iter()
        .map(|(name, (def, mut scalars))| {
            let value = if def.cardinality == Cardinality::Multi {
                PropertyValue::multi(def.data_kind, scalars)?
            } else {
                PropertyValue::Single(scalars.remove(0))
            };
            Ok((name, value))
        })
        .collect()
}

fn case(cli: &Cli, cmd: &CaseCommand, out: &mut Out) -> Result<()> {
    let cases = CaseFiles::new(service(cli)?);
    match cmd {
        CaseCommand::Create { name, props, type_id } => {
            let props = typed_properties(cases.service().as_ref(), type_id, props)?;
            let handle = cases.create_case_file_of_type(type_id, name, props)?;
            out.emit(handle.case_id.as_str(), to_json(&handle))
        }
        CaseCommand::List => {
            let all = cases.cases()?;
            if out.json {
                return out.line(to_json(&all).to_string());
            }
            for c in all {
                out.line(format!("{}\t{}", c.case_id, c.case_name))?;
            }
            Ok(())
        }
    }
}

/// Error for a navigation call that returned the empty item.
fn empty_result(what: String, case: &CaseFileHandle) -> CliError {
    CliError::Usage(format!(
        "{what} in case `{}` ({}): navigation returned the empty case file item",
        case.case_name, case.case_id
    ))
}

/// Resolves an item selector: an object id, `NAME`, or `NAME#INDEX`.
fn select<S: ObjectService>(cases: &CaseFiles<S>, case: &CaseFileHandle, sel: &str) -> Result<CaseFileItemRef> {
    let id = ObjectId::new(sel);
    if sel.starts_with("obj-") {
        let item = cases.item(&id)?;
        if item.state == ItemState::Discarded {
            return Err(CliError::Usage(format!(
                "object `{sel}` does not exist (never created, or discarded)"
            )));
        }
        let record = cases.record(&item)?;
        if !cases.contains(case, &record)? {
            return Err(CaseFileError::OutsideCase(id, case.case_id.clone()).into());
        }
        return Ok(item);
    }
    let found = match sel.rsplit_once('#') {
        Some((name, index)) if !name.is_empty() && index.parse::<u64>().is_ok() => {
            cases.resolve_item_at(case, name, index.parse().expect("checked"))?
        }
        _ => cases.resolve_item(case, sel)?,
    };
    if found.is_empty() {
        return Err(empty_result(format!("no item `{sel}`"), case));
    }
    Ok(found)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(file_error(path))
}

fn item(cli: &Cli, cmd: &ItemCommand, out: &mut Out) -> Result<()> {
    let cases = CaseFiles::new(service(cli)?);
    let svc = cases.service().as_ref();
    let emit_item = |out: &mut Out, r: &CaseFileItemRef| out.emit(item_text(r), to_json(r));
    match cmd {
        ItemCommand::AddDoc {
            case,
            name,
            parent,
            type_id,
            props,
            content,
            mime,
        } => {
            let case = cases.open_case(&case.case)?;
            let parent = parent.as_deref().map(|p| select(&cases, &case, p)).transpose()?;
            let props = typed_properties(svc, type_id, props)?;
            let content = match content {
                Some(path) => Some(ContentStream::new(mime.clone(), read_file(path)?)),
                None => None,
            };
            let r = cases.create_document_item(&case, name, type_id, props, parent.as_ref(), content)?;
            emit_item(out, &r)
        }
        ItemCommand::AddFolder {
            case,
            name,
            parent,
            type_id,
            props,
        } => {
            let case = cases.open_case(&case.case)?;
            let parent = parent.as_deref().map(|p| select(&cases, &case, p)).transpose()?;
            let props = typed_properties(svc, type_id, props)?;
            let r = cases.create_folder_item(&case, name, type_id, props, parent.as_ref())?;
            emit_item(out, &r)
        }
        ItemCommand::AddRel {
            case,
            name,
            source,
            target,
        } => {
            let case = cases.open_case(&case.case)?;
            let s = select(&cases, &case, source)?;
            let t = select(&cases, &case, target)?;
            let r = cases.create_relationship_item(&case, name, &s, &t)?;
            emit_item(out, &r)
        }
        ItemCommand::Get { case, item } => {
            let case = cases.open_case(&case.case)?;
            let r = select(&cases, &case, item)?;
            emit_item(out, &r)
        }
        ItemCommand::Child { case, parent, name } => {
            let case = cases.open_case(&case.case)?;
            let p = select(&cases, &case, parent)?;
            let r = cases.item_child(&p, name)?;
            if r.is_empty() {
                return Err(empty_result(format!("`{parent}` has no child `{name}`"), &case));
            }
            emit_item(out, &r)
        }
        ItemCommand::Parent { case, item } => {
            let case = cases.open_case(&case.case)?;
            let i = select(&cases, &case, item)?;
            let r = cases.item_parent(&case, &i)?;
            if r.is_empty() {
                return Err(empty_result(format!("`{item}` has no parent"), &case));
            }
            emit_item(out, &r)
        }
        ItemCommand::Source { case, item } => {
            let case = cases.open_case(&case.case)?;
            let i = select(&cases, &case, item)?;
            let r = cases.item_source(&case, &i)?;
            if r.is_empty() {
                return Err(empty_result(format!("no relationship points at `{item}`"), &case));
            }
            emit_item(out, &r)
        }
        ItemCommand::Target { case, item, name } => {
            let case = cases.open_case(&case.case)?;
            let i = select(&cases, &case, item)?;
            let r = cases.item_target(&case, &i, name)?;
            if r.is_empty() {
                return Err(empty_result(format!("`{item}` has no relationship to `{name}`"), &case));
            }
            emit_item(out, &r)
        }
        ItemCommand::Prop { case, item, property } => {
            let case = cases.open_case(&case.case)?;
            let i = select(&cases, &case, item)?;
            let e = cases.item_property(&i, property)?;
            out.emit(element_text(&e), to_json(&e))
        }
    }
}

fn changes(cli: &Cli, out: &mut Out) -> Result<()> {
    let svc = service(cli)?;
    let page = svc.get_content_changes(cli.token.unwrap_or(0), cli.max)?;
    if out.json {
        return out.line(to_json(&page).to_string());
    }
    for c in &page.changes {
        out.line(format!(
            "{}\t{}\t{}\t{}",
            c.token, c.change_type, c.object_id, c.name_snapshot
        ))?;
    }
    out.line(format!("next\t{}", page.next_token))
}

/// Appends dead letters to the file `deadletter list/drain` reads.
fn persist_dead_letters(path: &Path, letters: &[DeadLetter]) -> Result<()> {
    if letters.is_empty() {
        return Ok(());
    }
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(file_error(path))?;
    for d in letters {
        writeln!(f, "{}", to_json(d)).map_err(file_error(path))?;
    }
    Ok(())
}

fn report_dead_letters(path: &Path, letters: &[DeadLetter]) -> Result<()> {
    persist_dead_letters(path, letters)?;
    if !letters.is_empty() {
        eprintln!(
            "casefs: {} event(s) dead-lettered; see `casefs deadletter list`",
            letters.len()
        );
    }
    Ok(())
}

fn read_dead_letters(path: &Path) -> Result<Vec<DeadLetter>> {
    let f = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(file_error(path)(e)),
    };
    io::BufReader::new(f)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| {
            let l = l.map_err(file_error(path))?;
            serde_json::from_str(&l).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn run_hook(cmd: &str, event: &CaseFileItemEvent) -> std::result::Result<(), String> {
    let mut child = Process::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .spawn()
        .map_err(|e| format!("cannot run `{cmd}`: {e}"))?;
    if let Some(mut stdin) = child.stdin.take() {
        let _ = writeln!(stdin, "{}", to_json(event));
    }
    let status = child.wait().map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("`{cmd}` exited with {status}"))
    }
}

fn watch(cli: &Cli, args: &WatchArgs, out: &mut Out) -> Result<()> {
    let svc = service(cli)?;
    let cp_path = args.checkpoint.clone().unwrap_or_else(|| checkpoint_path(&cli.repo));
    let checkpoint = FileCheckpoint::new(&cp_path);
    if let (Some(token), None) = (cli.token, checkpoint.load().map_err(PollError::from)?) {
        checkpoint
            .save(&DeriverState {
                high_water: token,
                ..Default::default()
            })
            .map_err(PollError::from)?;
    }
    let config = PollerConfig {
        poll_interval: Duration::from_millis(cli.poll_ms),
        batch_size: cli.max,
        ..Default::default()
    };
    let mut poller = Poller::new(svc, config, Box::new(checkpoint))?;
    let dead_path = dead_letter_path(&cli.repo);
    let json = out.json;
    let exec = args.exec.clone();
    let mut handler = |e: &CaseFileItemEvent| {
        if let Some(cmd) = &exec {
            run_hook(cmd, e)?;
        }
        let text = if json { to_json(e).to_string() } else { e.to_string() };
        writeln!(io::stdout().lock(), "{text}").map_err(|e| e.to_string())
    };
    if args.once {
        loop {
            let outcome = poller.poll_once(&mut handler)?;
            report_dead_letters(&dead_path, &poller.drain_dead_letters())?;
            if outcome.changes == 0 && outcome.events == 0 {
                return Ok(());
            }
        }
    }
    let stop = AtomicBool::new(false);
    loop {
        poller.run(
            |e: &CaseFileItemEvent| {
                let r = handler(e);
                if r.is_err() {
                    // Leave run() so the dead letter reaches the file promptly.
                    stop.store(true, std::sync::atomic::Ordering::Release);
                }
                r
            },
            &stop,
        );
        report_dead_letters(&dead_path, &poller.drain_dead_letters())?;
        stop.store(false, std::sync::atomic::Ordering::Release);
    }
}

/// A stored model by object id or name.
fn find_model(svc: &dyn ObjectService, sel: Option<&str>) -> Result<ObjectId> {
    let models = stored_models(svc)?;
    let hit: Vec<_> = match sel {
        Some(s) => models
            .iter()
            .filter(|m| m.object_id.as_str() == s || m.version_series_id.as_str() == s || m.name == s)
            .collect(),
        None => models.iter().collect(),
    };
    match hit.as_slice() {
        [one] => Ok(one.object_id.clone()),
        [] => Err(CliError::Usage(match sel {
            Some(s) => format!("no stored model `{s}`"),
            None => "no stored models".into(),
        })),
        _ => Err(CliError::Usage(match sel {
            Some(s) => format!("`{s}` matches {} models; use the object id", hit.len()),
            None => format!("{} models are stored; pick one with --model", hit.len()),
        })),
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == "-" {
        let mut stdout = io::stdout().lock();
        stdout
            .write_all(bytes)
            .and_then(|_| stdout.write_all(b"\n"))
            .map_err(|e| CliError::Internal(e.to_string()))
    } else {
        fs::write(path, bytes).map_err(file_error(path))
    }
}

fn model(cli: &Cli, cmd: &ModelCommand, out: &mut Out) -> Result<()> {
    match cmd {
        ModelCommand::Store { file } => {
            let svc = service(cli)?;
            let m = parse_model(&read_file(file)?)?;
            let r = store_model(svc.as_ref(), &m)?;
            out.emit(format!("{}\t{}\t{}", r.object_id, r.name, r.version_label), to_json(&r))
        }
        ModelCommand::Load { model, out: path } => {
            let svc = service(cli)?;
            let id = find_model(svc.as_ref(), Some(model))?;
            let bytes = serialize_model(&load_model(svc.as_ref(), &id)?);
            write_output(path.as_deref().unwrap_or(Path::new("-")), &bytes)
        }
        ModelCommand::Export {
            out: path,
            cmmn10,
            model,
            input,
        } => {
            let m = match input {
                Some(file) => parse_model(&read_file(file)?)?,
                None => {
                    let svc = service(cli)?;
                    let id = find_model(svc.as_ref(), model.as_deref())?;
                    load_model(svc.as_ref(), &id)?
                }
            };
            let m = if *cmmn10 { export_compat10(&m) } else { m };
            write_output(path, &serialize_model(&m))
        }
        ModelCommand::List => {
            let svc = service(cli)?;
            let models = stored_models(svc.as_ref())?;
            if out.json {
                return out.line(to_json(&models).to_string());
            }
            for m in models {
                out.line(format!("{}\t{}\t{}", m.object_id, m.name, m.version_label))?;
            }
            Ok(())
        }
    }
}

fn deadletter(cli: &Cli, cmd: &DeadletterCommand, out: &mut Out) -> Result<()> {
    let path = dead_letter_path(&cli.repo);
    let letters = read_dead_letters(&path)?;
    if out.json {
        out.line(to_json(&letters).to_string())?;
    } else {
        for d in &letters {
            let token = d.token.map_or("-".to_string(), |t| t.to_string());
            out.line(format!("{token}\t{}\t{}", d.event, d.error))?;
        }
    }
    if matches!(cmd, DeadletterCommand::Drain) && path.exists() {
        fs::remove_file(&path).map_err(file_error(&path))?;
    }
    Ok(())
}
