use std::path::{Path, PathBuf};
use std::sync::Arc;

use interact_core::lang::lint_source;
use interact_core::Scenario;

use crate::wire::CatalogEntry;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("unknown scenario `{0}`")]
    NotFound(String),
    #[error("scenario `{id}` is invalid: {first}")]
    Invalid { id: String, first: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ids are file stems, restricted so they cannot leave the directory.
fn is_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn first_error(path: &Path, text: &str) -> Result<Scenario, String> {
    let (scenario, diags) = lint_source(text);
    let file = path.display().to_string();
    match (scenario, diags.iter().find(|d| d.is_error())) {
        (Some(s), None) => Ok(s),
        (_, Some(d)) => Err(d.render(&file)),
        (None, None) => Err(format!("{file}: does not parse")),
    }
}

/// Every `.itx` file in `dir`, sorted by id.
pub fn list(dir: &Path) -> std::io::Result<Vec<CatalogEntry>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "itx") && p.is_file())
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).filter(|s| is_id(s)) else {
            continue;
        };
        let text = std::fs::read_to_string(&path)?;
        out.push(match first_error(&path, &text) {
            Ok(s) => CatalogEntry {
                id: id.to_string(),
                valid: true,
                name: Some(s.name.clone()),
                step_count: s.steps.len(),
                difficulties: s.difficulties.iter().map(|d| d.id.clone()).collect(),
                error: None,
            },
            Err(e) => CatalogEntry {
                id: id.to_string(),
                valid: false,
                name: None,
                step_count: 0,
                difficulties: Vec::new(),
                error: Some(e),
            },
        });
    }
    Ok(out)
}

pub fn load(dir: &Path, id: &str) -> Result<Arc<Scenario>, LoadError> {
    if !is_id(id) {
        return Err(LoadError::NotFound(id.to_string()));
    }
    let path = dir.join(format!("{id}.itx"));
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(LoadError::NotFound(id.to_string())),
        Err(e) => return Err(e.into()),
    };
    first_error(&path, &text).map(Arc::new).map_err(|first| LoadError::Invalid {
        id: id.to_string(),
        first,
    })
}
