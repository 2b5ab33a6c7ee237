//! On-disk project state.
//!
//! ```text
//! <root>/manifest.json       {"format": "unprov", "version": 1, "state": "state-000003"}
//! <root>/state-000003/database.json
//! <root>/state-000003/ids.json
//! <root>/state-000003/graph.json
//! ```
//!
//! A mutation writes a complete new state directory and then atomically
//! replaces the manifest, so readers see either the old or the new state.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use unprov_core::bridge::IdDatabase;
use unprov_core::data_model::VersionedDatabase;
use unprov_core::workflow::ProvGraph;

use crate::error::CliError;

const FORMAT: &str = "unprov";
const FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";
const LOCK: &str = ".lock";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    version: u32,
    state: String,
}

pub struct State {
    pub db: VersionedDatabase,
    pub ids: IdDatabase,
    pub graph: ProvGraph,
}

pub struct Project {
    root: PathBuf,
    generation: u64,
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::user(format!("cannot {what} {}: {e}", path.display()))
}

fn state_dir_name(generation: u64) -> String {
    format!("state-{generation:06}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| io_err("create", path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| io_err("write", path, e))?;
    f.sync_all().map_err(|e| io_err("sync", path, e))
}

impl Project {
    /// Creates an empty project in `root`, creating the directory if needed.
    pub fn init(root: &Path) -> Result<Project, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err("create", root, e))?;
        if root.join(MANIFEST).exists() {
            return Err(CliError::user(format!("{} already holds a project", root.display())));
        }
        let mut project = Project { root: root.to_path_buf(), generation: 0 };
        let _lock = project.lock()?;
        let empty = State { db: VersionedDatabase::new(), ids: IdDatabase::new(), graph: ProvGraph::new() };
        project.commit(&empty)?;
        Ok(project)
    }

    pub fn open(root: &Path) -> Result<Project, CliError> {
        let path = root.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .map_err(|_| CliError::user(format!("no project at {} (run `unprov init`)", root.display())))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::user(format!("corrupt manifest: {e}")))?;
        if manifest.format != FORMAT || manifest.version != FORMAT_VERSION {
            return Err(CliError::user(format!(
                "unsupported project format {} version {}",
                manifest.format, manifest.version
            )));
        }
        let generation = manifest
            .state
            .strip_prefix("state-")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| CliError::user(format!("corrupt manifest state {:?}", manifest.state)))?;
        Ok(Project { root: root.to_path_buf(), generation })
    }

    fn state_dir(&self) -> PathBuf {
        self.root.join(state_dir_name(self.generation))
    }

    pub fn load(&self) -> Result<State, CliError> {
        let dir = self.state_dir();
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| io_err("read", &p, e))
        };
        let db: VersionedDatabase = serde_json::from_str(&read("database.json")?)
            .map_err(|e| CliError::Data(format!("corrupt database.json: {e}")))?;
        db.validate()?;
        let ids = IdDatabase::from_json(&read("ids.json")?)?;
        let graph = ProvGraph::deserialize(&read("graph.json")?)?;
        Ok(State { db, ids, graph })
    }

    /// Takes the project lock for the lifetime of the returned guard.
    pub fn lock(&self) -> Result<LockGuard, CliError> {
        let path = self.root.join(LOCK);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(LockGuard { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::user(format!(
                "project is locked by another invocation (remove {} if stale)",
                path.display()
            ))),
            Err(e) => Err(io_err("create", &path, e)),
        }
    }

    /// Writes `state` as the next generation and switches the manifest to it.
    pub fn commit(&mut self, state: &State) -> Result<(), CliError> {
        let next = self.generation + 1;
        let dir = self.root.join(state_dir_name(next));
        if dir.exists() {
            // Leftover from an interrupted commit; never referenced by the manifest.
            fs::remove_dir_all(&dir).map_err(|e| io_err("remove", &dir, e))?;
        }
        fs::create_dir(&dir).map_err(|e| io_err("create", &dir, e))?;
        let db = serde_json::to_string_pretty(&state.db).expect("databases always serialize") + "\n";
        write_file(&dir.join("database.json"), &db)?;
        write_file(&dir.join("ids.json"), &state.ids.to_json())?;
        write_file(&dir.join("graph.json"), &state.graph.serialize())?;

        let manifest = Manifest { format: FORMAT.into(), version: FORMAT_VERSION, state: state_dir_name(next) };
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(|e| io_err("create temp file in", &self.root, e))?;
        let text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize") + "\n";
        tmp.write_all(text.as_bytes()).map_err(|e| io_err("write", tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| io_err("sync", tmp.path(), e))?;
        let target = self.root.join(MANIFEST);
        tmp.persist(&target).map_err(|e| io_err("replace", &target, e.error))?;

        let old = self.state_dir();
        self.generation = next;
        if old.exists() {
            let _ = fs::remove_dir_all(old);
        }
        Ok(())
    }
}

pub struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
