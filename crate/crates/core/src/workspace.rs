//! A workspace directory: a catalog, a set of findings files and a config.
//!
//! Layout:
//!
//! ```text
//! <root>/workspace.toml
//! <root>/findings/*.toml      (written by ingest)
//! ```
//!
//! `catalog_file` and `ledger_files` are resolved against the root. Without
//! `catalog_file` the bundled catalog is used.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessor::{AssessOptions, TemplateSet, PASSWORD_MIN_LENGTH};
use crate::catalog::{load_catalog, Catalog, CatalogError};
use crate::decision::GraphOptions;
use crate::findings::{load_ledger, Ledger, LedgerError};
use crate::ranking::{RankOptions, ScenarioStatistics, ScoreBasis};

pub const WORKSPACE_FILE: &str = "workspace.toml";
pub const FINDINGS_DIR: &str = "findings";
pub const WORKSPACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    /// Average the printed one-digit scores.
    #[default]
    Printed,
    /// Average the unrounded formula output.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioStatisticsMode {
    #[default]
    Global,
    Restricted,
}

fn default_threshold() -> usize {
    crate::assessor::DEFAULT_PASSWORD_LONG_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    #[serde(default)]
    pub rounding_mode: RoundingMode,
    #[serde(default)]
    pub scenario_statistics: ScenarioStatisticsMode,
    #[serde(default = "default_threshold")]
    pub password_long_threshold: usize,
    /// Replaces the catalog's shell-yield scenarios when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell_yield_scenarios: Option<Vec<u8>>,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        WorkspaceConfig {
            rounding_mode: RoundingMode::default(),
            scenario_statistics: ScenarioStatisticsMode::default(),
            password_long_threshold: default_threshold(),
            shell_yield_scenarios: None,
        }
    }
}

pub const MAX_PASSWORD_LONG_THRESHOLD: usize = 256;

impl WorkspaceConfig {
    pub fn validate(&self, catalog: &Catalog) -> Result<(), WorkspaceError> {
        if !(PASSWORD_MIN_LENGTH..=MAX_PASSWORD_LONG_THRESHOLD)
            .contains(&self.password_long_threshold)
        {
            return Err(WorkspaceError::Config(format!(
                "password_long_threshold must be in {PASSWORD_MIN_LENGTH}..={MAX_PASSWORD_LONG_THRESHOLD}, got {}",
                self.password_long_threshold
            )));
        }
        for n in self.shell_yield_scenarios.iter().flatten() {
            if catalog.scenario(*n).is_none() {
                return Err(WorkspaceError::Config(format!(
                    "shell_yield_scenarios: unknown scenario {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn rank_options(&self) -> RankOptions {
        RankOptions {
            basis: match self.rounding_mode {
                RoundingMode::Printed => ScoreBasis::Printed,
                RoundingMode::Raw => ScoreBasis::Raw,
            },
            scenario_statistics: match self.scenario_statistics {
                ScenarioStatisticsMode::Global => ScenarioStatistics::Global,
                ScenarioStatisticsMode::Restricted => ScenarioStatistics::Restricted,
            },
        }
    }

    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            rank: self.rank_options(),
            shell_yield_scenarios: self.shell_yield_scenarios.clone(),
        }
    }

    pub fn assess_options(&self) -> AssessOptions {
        AssessOptions {
            password_long_threshold: self.password_long_threshold,
            templates: TemplateSet::bundled(),
            information_gathering: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_file: Option<String>,
    #[serde(default)]
    pub ledger_files: Vec<String>,
    #[serde(default)]
    pub config: WorkspaceConfig,
}

impl Default for WorkspaceDocument {
    fn default() -> Self {
        WorkspaceDocument {
            schema_version: WORKSPACE_SCHEMA_VERSION,
            catalog_file: None,
            ledger_files: Vec::new(),
            config: WorkspaceConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", .path.display())]
    Schema { path: PathBuf, message: String },
    #[error("workspace config: {0}")]
    Config(String),
    #[error("catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("{}: {source}", .path.display())]
    Ledger {
        path: PathBuf,
        #[source]
        source: LedgerError,
    },
    #[error("ledger {0:?} is already part of the workspace")]
    AlreadyIngested(String),
}

fn read(path: &Path) -> Result<String, WorkspaceError> {
    fs::read_to_string(path).map_err(|source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), WorkspaceError> {
    fs::write(path, contents).map_err(|source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone)]
pub struct Workspace {
    /// `None` for the bundled workspace.
    pub root: Option<PathBuf>,
    pub document: WorkspaceDocument,
    pub catalog: Catalog,
    pub ledger: Ledger,
}

impl Workspace {
    /// Bundled catalog and the reference findings ledger.
    pub fn bundled() -> Workspace {
        let catalog = crate::bundled_catalog();
        let ledger = crate::bundled_ledger(&catalog);
        Workspace {
            root: None,
            document: WorkspaceDocument::default(),
            catalog,
            ledger,
        }
    }

    pub fn open(root: &Path) -> Result<Workspace, WorkspaceError> {
        let path = root.join(WORKSPACE_FILE);
        let document: WorkspaceDocument =
            toml::from_str(&read(&path)?).map_err(|e| WorkspaceError::Schema {
                path: path.clone(),
                message: e.to_string(),
            })?;
        Self::from_document(root, document)
    }

    fn from_document(
        root: &Path,
        document: WorkspaceDocument,
    ) -> Result<Workspace, WorkspaceError> {
        if document.schema_version != WORKSPACE_SCHEMA_VERSION {
            return Err(WorkspaceError::Schema {
                path: root.join(WORKSPACE_FILE),
                message: format!("unsupported schema_version {}", document.schema_version),
            });
        }
        let catalog = match &document.catalog_file {
            Some(f) => load_catalog(&read(&root.join(f))?)?,
            None => crate::bundled_catalog(),
        };
        document.config.validate(&catalog)?;
        let mut ledger = Ledger::empty();
        for f in &document.ledger_files {
            let path = root.join(f);
            let part =
                load_ledger(&read(&path)?, &catalog).map_err(|source| WorkspaceError::Ledger {
                    path: path.clone(),
                    source,
                })?;
            ledger = ledger
                .merge(&part, &catalog)
                .map_err(|source| WorkspaceError::Ledger { path, source })?;
        }
        Ok(Workspace {
            root: Some(root.to_path_buf()),
            document,
            catalog,
            ledger,
        })
    }

    pub fn config(&self) -> &WorkspaceConfig {
        &self.document.config
    }

    /// Validates `source` against the workspace and stores it under
    /// `<root>/findings/<name>.toml`. Creates `workspace.toml` if missing.
    /// Returns the stored path relative to the root.
    pub fn ingest(root: &Path, name: &str, source: &str) -> Result<String, WorkspaceError> {
        let ws = if root.join(WORKSPACE_FILE).exists() {
            Workspace::open(root)?
        } else {
            Workspace::from_document(root, WorkspaceDocument::default())?
        };
        let stem: String = name
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    c
                } else {
                    '-'
                }
            })
            .collect();
        let rel = format!("{FINDINGS_DIR}/{stem}.toml");
        if ws.document.ledger_files.contains(&rel) {
            return Err(WorkspaceError::AlreadyIngested(rel));
        }
        let input_path = PathBuf::from(name);
        let part = load_ledger(source, &ws.catalog).map_err(|source| WorkspaceError::Ledger {
            path: input_path.clone(),
            source,
        })?;
        ws.ledger
            .merge(&part, &ws.catalog)
            .map_err(|source| WorkspaceError::Ledger {
                path: input_path,
                source,
            })?;

        let dir = root.join(FINDINGS_DIR);
        fs::create_dir_all(&dir).map_err(|source| WorkspaceError::Io { path: dir, source })?;
        write(&root.join(&rel), source)?;
        let mut doc = ws.document;
        doc.ledger_files.push(rel.clone());
        write(
            &root.join(WORKSPACE_FILE),
            &toml::to_string(&doc).expect("workspace documents always serialize"),
        )?;
        Ok(rel)
    }
}
