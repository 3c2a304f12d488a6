use std::fs;
use std::path::{Component, Path, PathBuf};

use super::PipelineError;

/// Every artifact write goes through this guard, which refuses paths that
/// would land outside the output directory.
#[derive(Debug, Clone)]
pub struct OutputTree {
    root: PathBuf,
}

impl OutputTree {
    pub fn create(root: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(root).map_err(|e| PipelineError::io(root, e))?;
        let root = root.canonicalize().map_err(|e| PipelineError::io(root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Absolute path for `rel`, if `rel` stays inside the tree.
    pub fn path(&self, rel: &Path) -> Result<PathBuf, PipelineError> {
        let ok = !rel.as_os_str().is_empty() && rel.components().all(|c| matches!(c, Component::Normal(_)));
        if !ok {
            return Err(PipelineError::OutsideOutput(rel.to_path_buf()));
        }
        Ok(self.root.join(rel))
    }

    pub fn write(&self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.path(rel.as_ref())?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
            let real = parent.canonicalize().map_err(|e| PipelineError::io(parent, e))?;
            if !real.starts_with(&self.root) {
                return Err(PipelineError::OutsideOutput(rel.as_ref().to_path_buf()));
            }
        }
        fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))
    }

    pub fn read(&self, rel: impl AsRef<Path>) -> Result<Vec<u8>, PipelineError> {
        let path = self.path(rel.as_ref())?;
        fs::read(&path).map_err(|e| PipelineError::io(&path, e))
    }

    pub fn exists(&self, rel: impl AsRef<Path>) -> bool {
        self.path(rel.as_ref()).map(|p| p.exists()).unwrap_or(false)
    }

    /// Removes a file or directory inside the tree; missing targets are fine.
    pub fn remove(&self, rel: impl AsRef<Path>) -> Result<(), PipelineError> {
        let path = self.path(rel.as_ref())?;
        let res = if path.is_dir() {
            fs::remove_dir_all(&path)
        } else if path.exists() {
            fs::remove_file(&path)
        } else {
            Ok(())
        };
        res.map_err(|e| PipelineError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_escaping_paths() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputTree::create(&dir.path().join("out")).unwrap();
        out.write("a/b.txt", b"x").unwrap();
        assert_eq!(out.read("a/b.txt").unwrap(), b"x");
        for bad in ["../x", "/etc/passwd", "a/../../x", ""] {
            assert!(matches!(out.write(bad, b"x"), Err(PipelineError::OutsideOutput(_))), "{bad}");
        }
        assert!(!dir.path().join("x").exists());
    }

    #[cfg(unix)]
    #[test]
    fn rejects_symlinked_escape() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputTree::create(&dir.path().join("out")).unwrap();
        std::os::unix::fs::symlink(dir.path(), out.root().join("link")).unwrap();
        assert!(matches!(out.write("link/x.txt", b"x"), Err(PipelineError::OutsideOutput(_))));
        assert!(!dir.path().join("x.txt").exists());
    }
}
