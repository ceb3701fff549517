//! Sandboxed output directories.
//!
//! Every file the harness emits goes through an [`OutputDir`], which only
//! resolves plain relative paths beneath its root — no absolute paths, no
//! parent components — so a run can never write outside the directory the
//! user configured.

use crate::{LabError, Result};
use std::fs;
use std::path::{Component, Path, PathBuf};

/// A directory the harness is allowed to write into.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    /// Creates (if necessary) and wraps the root output directory.
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
        })
    }

    /// Root path of this directory.
    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Validates a relative path: every component must be a normal name.
    fn resolve(&self, rel: &str) -> Result<PathBuf> {
        let rel_path = Path::new(rel);
        if rel.is_empty()
            || rel_path.is_absolute()
            || rel_path
                .components()
                .any(|c| !matches!(c, Component::Normal(_)))
        {
            return Err(LabError::Io(format!(
                "refusing path {rel:?}: only plain relative paths below the output root are allowed"
            )));
        }
        Ok(self.root.join(rel_path))
    }

    /// A child directory, created on demand.
    pub fn subdir(&self, name: &str) -> Result<OutputDir> {
        let path = self.resolve(name)?;
        fs::create_dir_all(&path)?;
        Ok(OutputDir { root: path })
    }

    /// Writes a file under the root, creating parent directories.
    pub fn write_bytes(&self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.resolve(rel)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        Ok(path)
    }

    /// Atomic write: the content lands under its final name only when
    /// complete (temp file in the same directory, then rename).
    pub fn write_atomic(&self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.resolve(rel)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_escaping_paths() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        assert!(out.write_bytes("../escape.txt", b"x").is_err());
        assert!(out.write_bytes("/etc/escape.txt", b"x").is_err());
        assert!(out.write_bytes("a/../../escape.txt", b"x").is_err());
        assert!(out.write_bytes("", b"x").is_err());
        assert!(out.subdir("..").is_err());
    }

    #[test]
    fn writes_nested_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        let p = out.write_bytes("a/b/c.csv", b"x,y\n").unwrap();
        assert!(p.starts_with(dir.path()));
        assert_eq!(std::fs::read(p).unwrap(), b"x,y\n");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(dir.path()).unwrap();
        out.write_atomic("m.json", b"{\"v\":1}").unwrap();
        out.write_atomic("m.json", b"{\"v\":2}").unwrap();
        let body = std::fs::read_to_string(dir.path().join("m.json")).unwrap();
        assert_eq!(body, "{\"v\":2}");
        assert!(!dir.path().join("m.tmp").exists());
    }
}
