use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Open the journal file directly.
    Embedded,
    /// Talk to a running `casefs serve` over HTTP.
    Integration,
}

/// Case files kept in a content repository.
#[derive(Debug, Parser)]
#[command(name = "casefs", version, about)]
pub struct Cli {
    /// Journal file of the repository (embedded mode). Watch state files
    /// are kept next to it in both modes.
    #[arg(long, global = true, env = "CASEFS_REPO", default_value = "casefs.jsonl")]
    pub repo: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Mode::Embedded)]
    pub mode: Mode,

    /// Server URL, required in integration mode.
    #[arg(long, global = true, env = "CASEFS_URL")]
    pub url: Option<String>,

    #[arg(long, global = true, env = "CASEFS_PRINCIPAL", default_value = "casefs")]
    pub principal: String,

    /// One JSON document per result instead of text lines.
    #[arg(long, global = true)]
    pub json: bool,

    /// Poll interval of `watch`, in milliseconds.
    #[arg(long, global = true, default_value_t = 500)]
    pub poll_ms: u64,

    /// Change-log token to start after (`changes`, first `watch`).
    #[arg(long, global = true)]
    pub token: Option<u64>,

    /// Page size for `changes` and `watch`.
    #[arg(long, global = true, default_value_t = 100)]
    pub max: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the repository over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
    #[command(subcommand)]
    Case(CaseCommand),
    #[command(subcommand)]
    Item(ItemCommand),
    /// Print case-file-item events as the change log grows.
    Watch(WatchArgs),
    /// Print one page of the change log.
    Changes,
    #[command(subcommand)]
    Model(ModelCommand),
    /// Events the watch handler failed on.
    #[command(subcommand)]
    Deadletter(DeadletterCommand),
}

#[derive(Debug, Subcommand)]
pub enum CaseCommand {
    /// Create a case; prints its id.
    Create {
        name: String,
        /// Property as NAME=VALUE, typed by the property definition.
        #[arg(long = "prop", value_name = "NAME=VALUE")]
        props: Vec<String>,
        /// Folder type of the case root.
        #[arg(long = "type", default_value = "cmis:folder")]
        type_id: String,
    },
    List,
}

#[derive(Debug, Args)]
pub struct CaseArg {
    /// Case id or case name.
    #[arg(long)]
    pub case: String,
}

/// Items are selected by object id, by name (lowest index), or by
/// `NAME#INDEX`.
#[derive(Debug, Subcommand)]
pub enum ItemCommand {
    /// File a document in the case.
    AddDoc {
        #[command(flatten)]
        case: CaseArg,
        name: String,
        /// Folder item to file into; the case root when absent.
        #[arg(long)]
        parent: Option<String>,
        #[arg(long = "type", default_value = "cmis:document")]
        type_id: String,
        #[arg(long = "prop", value_name = "NAME=VALUE")]
        props: Vec<String>,
        /// File whose bytes become the content stream.
        #[arg(long)]
        content: Option<PathBuf>,
        #[arg(long, default_value = "application/octet-stream")]
        mime: String,
    },
    /// Create a folder in the case.
    AddFolder {
        #[command(flatten)]
        case: CaseArg,
        name: String,
        #[arg(long)]
        parent: Option<String>,
        #[arg(long = "type", default_value = "cmis:folder")]
        type_id: String,
        #[arg(long = "prop", value_name = "NAME=VALUE")]
        props: Vec<String>,
    },
    /// Relate two items of the case.
    AddRel {
        #[command(flatten)]
        case: CaseArg,
        name: String,
        source: String,
        target: String,
    },
    Get {
        #[command(flatten)]
        case: CaseArg,
        item: String,
    },
    /// Child of a folder item by name.
    Child {
        #[command(flatten)]
        case: CaseArg,
        parent: String,
        name: String,
    },
    Parent {
        #[command(flatten)]
        case: CaseArg,
        item: String,
    },
    /// Source of the earliest relationship pointing at the item.
    Source {
        #[command(flatten)]
        case: CaseArg,
        item: String,
    },
    /// Target with the given name of a relationship leaving the item.
    Target {
        #[command(flatten)]
        case: CaseArg,
        item: String,
        name: String,
    },
    Prop {
        #[command(flatten)]
        case: CaseArg,
        item: String,
        property: String,
    },
}

#[derive(Debug, Args)]
pub struct WatchArgs {
    /// Stop once the change log is drained.
    #[arg(long)]
    pub once: bool,
    /// Shell command run per event with the event JSON on stdin; a
    /// non-zero exit counts as a handler failure.
    #[arg(long)]
    pub exec: Option<String>,
    /// Checkpoint file (default: next to the journal).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Store a model file as a repository document (a new version if a
    /// model with the same name exists).
    Store { file: PathBuf },
    /// Write a stored model to a file or stdout.
    Load {
        /// Object id or model name.
        model: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Export a model, optionally downgraded to plain CMMN 1.0.
    Export {
        /// Output file, `-` for stdout.
        out: PathBuf,
        #[arg(long)]
        cmmn10: bool,
        /// Stored model (object id or name); defaults to the only one.
        #[arg(long, conflicts_with = "input")]
        model: Option<String>,
        /// Model file to convert instead of a stored model.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// List stored models.
    List,
}

#[derive(Debug, Subcommand)]
pub enum DeadletterCommand {
    List,
    /// Print and remove all dead letters.
    Drain,
}
