//! Shared template set with atomic replacement.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use airdraw_core::{Letter, Result, SessionTraceMatrix, TemplateSet};

/// Readers take a cheap snapshot; a commit builds a new set and swaps it in
/// under the write lock, writing it to disk first when a path is configured.
#[derive(Debug)]
pub struct TemplateStore {
    current: RwLock<Arc<TemplateSet<f64>>>,
    path: Option<PathBuf>,
}

impl TemplateStore {
    pub fn new(templates: TemplateSet<f64>) -> Self {
        Self {
            current: RwLock::new(Arc::new(templates)),
            path: None,
        }
    }

    /// Persists every commit to `path` by writing a sibling file and renaming it.
    pub fn persistent(templates: TemplateSet<f64>, path: impl Into<PathBuf>) -> Self {
        Self {
            current: RwLock::new(Arc::new(templates)),
            path: Some(path.into()),
        }
    }

    pub fn snapshot(&self) -> Arc<TemplateSet<f64>> {
        self.current
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    /// Adds or replaces one template and returns the committed set.
    pub fn commit(
        &self,
        letter: Letter,
        trace: SessionTraceMatrix<f64>,
    ) -> Result<Arc<TemplateSet<f64>>> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        let next = Arc::new(guard.train(letter, trace)?);
        if let Some(path) = &self.path {
            write_atomic(path, &next)?;
        }
        *guard = next.clone();
        Ok(next)
    }
}

/// Writes `templates` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, templates: &TemplateSet<f64>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = std::fs::File::create(&tmp)?;
    let mut writer = std::io::BufWriter::new(file);
    templates.write_json(&mut writer)?;
    let file = writer.into_inner().map_err(|e| e.into_error())?;
    file.sync_all()?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
