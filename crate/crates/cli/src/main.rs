mod error;
mod project;
mod table;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use unprov_core::bridge::{content_hash, FileRegistration};
use unprov_core::data_model::{parse_row, AttributeType, ProvenanceId, Schema, Snapshot, Value};
use unprov_core::query::{evaluate, output_columns, parse_query, why_not, AlgebraExpr, Expectation};
use unprov_core::questions::{answer_json, ask, Context, Question, QuestionError, QuestionKind, Scope, Subject};
use unprov_core::workflow::{Granularity, ProvGraph};

use error::CliError;
use project::{Project, State};

#[derive(Parser)]
#[command(name = "unprov", version, about = "Data and workflow provenance for research data")]
struct Cli {
    /// Project directory.
    #[arg(long, short = 'C', global = true, default_value = ".")]
    project: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty project.
    Init { dir: PathBuf },
    /// Load a CSV file (with header row) into a relation.
    LoadCsv {
        #[arg(long)]
        relation: String,
        /// e.g. "sample_id:int,intensity_1:decimal(6,3)"
        #[arg(long)]
        schema: String,
        file: PathBuf,
    },
    /// Store a new version of a tuple.
    Update {
        #[arg(long)]
        relation: String,
        #[arg(long)]
        id: String,
        #[arg(long)]
        values: String,
    },
    /// Record which tuples a file holds.
    RegisterFile {
        #[arg(long)]
        relation: String,
        /// Comma-separated; a bare id covers all its versions.
        #[arg(long)]
        ids: String,
        #[arg(long)]
        entity: Option<String>,
        #[arg(long)]
        file_id: Option<String>,
        file: PathBuf,
    },
    /// Import or export the workflow graph.
    Prov {
        #[command(subcommand)]
        action: ProvAction,
    },
    /// Run a query with provenance.
    Query {
        #[arg(long)]
        sql: String,
        #[command(flatten)]
        time: AtTime,
        #[arg(long, value_enum)]
        provenance: Option<ProvenanceKind>,
        #[arg(long, value_enum, default_value = "fine")]
        granularity: GranularityArg,
    },
    /// Explain why an expected row is missing.
    WhyNot {
        #[arg(long)]
        sql: String,
        /// e.g. "voltage_2=1.3"
        #[arg(long)]
        expect: String,
        #[command(flatten)]
        time: AtTime,
    },
    /// Ask a provenance question.
    Ask(AskArgs),
}

#[derive(Subcommand)]
enum ProvAction {
    Import { file: PathBuf },
    /// Write the graph document; "-" for standard output.
    Export { file: PathBuf },
}

#[derive(Args)]
struct AtTime {
    /// Database version to read; defaults to the latest.
    #[arg(long)]
    at_time: Option<u64>,
}

#[derive(Args)]
struct AskArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    scope: String,
    #[arg(long)]
    sql: Option<String>,
    /// 1-based result row.
    #[arg(long)]
    row: Option<usize>,
    #[arg(long)]
    attribute: Option<String>,
    #[arg(long)]
    entity: Option<String>,
    #[arg(long)]
    expect: Option<String>,
    #[arg(long, value_enum, default_value = "fine")]
    granularity: GranularityArg,
    #[command(flatten)]
    time: AtTime,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProvenanceKind {
    How,
    Why,
    Where,
    What,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Fine,
    Coarse,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Fine => Granularity::Fine,
            GranularityArg::Coarse => Granularity::Coarse,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let root = cli.project;
    match cli.command {
        Command::Init { dir } => {
            Project::init(&dir)?;
            Ok(format!("initialized project in {}\n", dir.display()))
        }
        Command::LoadCsv { relation, schema, file } => mutate(&root, |s| load_csv(s, &relation, &schema, &file)),
        Command::Update { relation, id, values } => mutate(&root, |s| update(s, &relation, &id, &values)),
        Command::RegisterFile { relation, ids, entity, file_id, file } => {
            mutate(&root, |s| register_file(s, &relation, &ids, entity, file_id, &file))
        }
        Command::Prov { action: ProvAction::Import { file } } => mutate(&root, |s| {
            let text = read_text(&file)?;
            s.graph = ProvGraph::deserialize(&text)?;
            Ok(format!(
                "imported graph: {} nodes, {} edges, {} notes\n",
                s.graph.nodes().count(),
                s.graph.edges().count(),
                s.graph.notes().len()
            ))
        }),
        Command::Prov { action: ProvAction::Export { file } } => {
            let state = Project::open(&root)?.load()?;
            let doc = state.graph.serialize();
            if file.as_os_str() == "-" {
                return Ok(doc);
            }
            fs::write(&file, doc).map_err(|e| CliError::user(format!("cannot write {}: {e}", file.display())))?;
            Ok(format!("exported graph to {}\n", file.display()))
        }
        Command::Query { sql, time, provenance, granularity } => {
            let state = Project::open(&root)?.load()?;
            query(&state, &sql, time.at_time, provenance, granularity.into())
        }
        Command::WhyNot { sql, expect, time } => {
            let state = Project::open(&root)?.load()?;
            let snap = snapshot(&state, time.at_time)?;
            let expr = parse_query(&sql)?;
            let expectation = parse_expectation(&expr, &snap, &expect)?;
            let explanation = why_not(&expr, &snap, &expectation)?;
            Ok(format!("{explanation}\n"))
        }
        Command::Ask(args) => ask_command(&root, args),
    }
}

/// Loads the project, applies `f` under the lock and commits the result.
fn mutate(root: &Path, f: impl FnOnce(&mut State) -> Result<String, CliError>) -> Result<String, CliError> {
    let mut project = Project::open(root)?;
    let _lock = project.lock()?;
    let mut state = project.load()?;
    let out = f(&mut state)?;
    project.commit(&state)?;
    Ok(out)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))
}

fn load_csv(state: &mut State, relation: &str, schema: &str, file: &Path) -> Result<String, CliError> {
    let schema = Schema::parse(relation, schema)?;
    match state.db.schema(relation) {
        Some(existing) if existing != &schema => {
            return Err(CliError::user(format!("relation {relation} already exists with schema ({existing})")));
        }
        Some(_) => {}
        None => state.db.define_relation(schema.clone())?,
    }
    let text = read_text(file)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let expected: Vec<&str> = schema.attributes.iter().map(|a| a.name.as_str()).collect();
    if header != expected {
        return Err(CliError::Data(format!("csv header {} does not match schema {}", header.join(","), expected.join(","))));
    }
    let mut ids = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        let values = parse_row(&schema, &fields).map_err(|e| CliError::Data(format!("row {}: {e}", line + 1)))?;
        ids.push(state.db.insert_tuple(relation, values)?.to_string());
    }
    Ok(format!("loaded {} tuples into {relation}: {}\n", ids.len(), ids.join(", ")))
}

fn update(state: &mut State, relation: &str, id: &str, values: &str) -> Result<String, CliError> {
    let schema = state.db.schema(relation).cloned().ok_or_else(|| CliError::user(format!("unknown relation {relation}")))?;
    let base = id.parse::<ProvenanceId>()?.base().to_string();
    let fields: Vec<&str> = values.split(',').map(str::trim).collect();
    let new_id = state.db.update_tuple(relation, &base, parse_row(&schema, &fields)?)?;
    state.ids.sync_versions(&state.db);
    Ok(format!("{new_id} (version {})\n", state.db.current_version()))
}

fn register_file(
    state: &mut State,
    relation: &str,
    ids: &str,
    entity: Option<String>,
    file_id: Option<String>,
    file: &Path,
) -> Result<String, CliError> {
    let bytes = fs::read(file).map_err(|e| CliError::user(format!("cannot read {}: {e}", file.display())))?;
    let mut tuple_ids = BTreeSet::new();
    for token in ids.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let id: ProvenanceId = token.parse()?;
        if id.version().is_none() {
            tuple_ids.extend(state.db.versions_of(relation, id.base())?);
        } else if state.db.contains_id(relation, &id) {
            tuple_ids.insert(id);
        } else {
            return Err(CliError::user(format!("{id} is not a tuple of {relation}")));
        }
    }
    let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let record = state.ids.register_file(FileRegistration {
        file_id,
        name,
        path: file.display().to_string(),
        content_hash: content_hash(&bytes),
        relation: relation.to_string(),
        tuple_ids,
        workflow_entity: entity,
    })?;
    let covered: Vec<String> = record.tuple_ids.iter().map(ToString::to_string).collect();
    Ok(format!("registered {}: {} covers {}\n", record.file_id, record.name, covered.join(", ")))
}

fn snapshot(state: &State, at: Option<u64>) -> Result<Snapshot, CliError> {
    Ok(match at {
        Some(t) => state.db.snapshot_at(t)?,
        None => state.db.live(),
    })
}

fn query(
    state: &State,
    sql: &str,
    at: Option<u64>,
    provenance: Option<ProvenanceKind>,
    granularity: Granularity,
) -> Result<String, CliError> {
    let snap = snapshot(state, at)?;
    let result = evaluate(&parse_query(sql)?, &snap)?;
    let coarse = granularity == Granularity::Coarse;
    let mut header: Vec<String> = vec!["#".into()];
    header.extend(result.columns.iter().map(|c| c.name.clone()));
    match provenance {
        Some(ProvenanceKind::How) => header.push("how".into()),
        Some(ProvenanceKind::Why) => header.push("why".into()),
        Some(ProvenanceKind::Where) => header.extend(result.columns.iter().map(|c| format!("where({})", c.name))),
        _ => {}
    }
    let mut rows = Vec::with_capacity(result.rows.len());
    for (i, row) in result.rows.iter().enumerate() {
        let mut cells: Vec<String> = vec![(i + 1).to_string()];
        cells.extend(row.values.iter().map(ToString::to_string));
        match provenance {
            Some(ProvenanceKind::How) if coarse => cells.push(state.ids.lift(&row.polynomial)?.to_string()),
            Some(ProvenanceKind::How) => cells.push(row.polynomial.to_string()),
            Some(ProvenanceKind::Why) => {
                let basis = row.polynomial.to_witness_basis();
                let basis = if coarse { state.ids.lift_basis(&basis)? } else { basis };
                cells.push(basis.to_string());
            }
            Some(ProvenanceKind::Where) => {
                for c in &row.where_cells {
                    cells.push(c.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
                }
            }
            _ => {}
        }
        rows.push(cells);
    }
    let mut out = table::render(&header, &rows);
    if let Some(ProvenanceKind::What) = provenance {
        out.push_str("\nattribute types:\n");
        for c in result.what_provenance() {
            let sources: Vec<&str> = c.sources.iter().map(String::as_str).collect();
            out.push_str(&format!("  {}: {} from {{{}}}\n", c.name, c.ty, sources.join(",")));
        }
    }
    Ok(out)
}

fn expected_value(text: &str, ty: &AttributeType) -> Option<Value> {
    let text = text.trim();
    match ty {
        AttributeType::Decimal { .. } => Value::decimal_literal(text),
        AttributeType::Text => Some(Value::Text(text.trim_matches('\'').to_string())),
        _ => Value::parse(text, ty).ok(),
    }
}

/// Parses "a=1,b=2" against the output columns of `expr`.
fn parse_expectation(expr: &AlgebraExpr, snap: &Snapshot, text: &str) -> Result<Expectation, CliError> {
    let columns = output_columns(expr, snap)?;
    let mut out = Expectation::new();
    for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (attr, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::user(format!("expected attribute=value, got {pair:?}")))?;
        let attr = attr.trim();
        let col = columns
            .iter()
            .find(|c| c.name == attr)
            .ok_or_else(|| CliError::user(format!("{attr} is not an output attribute of the query")))?;
        let v = expected_value(value, &col.ty)
            .ok_or_else(|| CliError::Data(format!("cannot read {:?} as {}", value.trim(), col.ty)))?;
        out.insert(attr.to_string(), v);
    }
    if out.is_empty() {
        return Err(CliError::user("empty expectation"));
    }
    Ok(out)
}

fn ask_command(root: &Path, args: AskArgs) -> Result<String, CliError> {
    let kind: QuestionKind = args.kind.parse().map_err(CliError::User)?;
    let scope: Scope = args.scope.parse().map_err(CliError::User)?;
    if scope == Scope::Data && kind.workflow_only() {
        return Err(QuestionError::UnsupportedScope(kind).into());
    }
    let state = Project::open(root)?.load()?;
    let snap = snapshot(&state, args.time.at_time)?;
    let subject = match (&args.sql, args.row, &args.entity, &args.expect) {
        (Some(sql), None, None, Some(expect)) => {
            let query = parse_query(sql)?;
            let expectation = parse_expectation(&query, &snap, expect)?;
            Subject::Expectation { query, expectation }
        }
        (Some(sql), Some(row), None, None) => {
            if row == 0 {
                return Err(CliError::user("--row is 1-based"));
            }
            Subject::Row { query: parse_query(sql)?, row: row - 1, attribute: args.attribute.clone() }
        }
        (None, None, Some(entity), None) => Subject::Entity(entity.clone()),
        _ => {
            return Err(CliError::user(
                "give exactly one subject: --sql with --row, --sql with --expect, or --entity",
            ))
        }
    };
    let mut question = Question::new(kind, scope, subject);
    question.granularity = args.granularity.into();
    let ctx = Context { snapshot: Some(&snap), graph: Some(&state.graph), ids: Some(&state.ids) };
    let answer = ask(&question, &ctx)?;
    Ok(if args.json { answer_json(&question, &answer) + "\n" } else { answer.to_string() })
}
