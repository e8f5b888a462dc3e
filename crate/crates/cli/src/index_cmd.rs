use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use intent_lattice::index::{compile, IndexStats, IntentLibrary};

/// Settings of `build-index`.
#[derive(Debug, Clone)]
pub struct IndexConfig {
    pub library: PathBuf,
    /// JSON object of entity name to phrase list; replaces the library's
    /// phrases for those entities.
    pub entities: Option<PathBuf>,
    /// Overrides the library's default blank quota.
    pub default_quota: Option<usize>,
    pub out: PathBuf,
}

/// Reads a library file, applying the default quota and entity overrides.
pub fn load_library(config: &IndexConfig) -> anyhow::Result<IntentLibrary> {
    let text = fs::read_to_string(&config.library)
        .with_context(|| format!("reading {}", config.library.display()))?;
    let text = match config.default_quota {
        Some(q) => {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.library.display()))?;
            if let Some(obj) = value.as_object_mut() {
                let defaults = obj.entry("defaults").or_insert_with(|| serde_json::json!({}));
                if let Some(d) = defaults.as_object_mut() {
                    d.insert("blank_quota".into(), q.into());
                }
            }
            value.to_string()
        }
        None => text,
    };
    let mut library =
        IntentLibrary::from_json(&text).with_context(|| format!("loading {}", config.library.display()))?;
    if let Some(path) = &config.entities {
        let overrides = read_entities(path)?;
        for (name, phrases) in overrides {
            library.add_entity(&name, &phrases);
        }
        library
            .validate()
            .with_context(|| format!("applying {}", path.display()))?;
    }
    Ok(library)
}

fn read_entities(path: &Path) -> anyhow::Result<BTreeMap<String, Vec<String>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Compiles the library and writes the index artifact.
pub fn build_index_cmd(config: &IndexConfig) -> anyhow::Result<IndexStats> {
    let library = load_library(config)?;
    let index = compile(&library).context("compiling index")?;
    fs::write(&config.out, index.to_artifact()).with_context(|| format!("writing {}", config.out.display()))?;
    Ok(index.stats())
}
