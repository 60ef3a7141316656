//! Removal of partial outputs when a command fails.

use std::path::{Path, PathBuf};

/// Tracks files (and directories) created by a command. Unless
/// [`OutputGuard::commit`] is called, everything recorded is removed on drop.
#[derive(Debug, Default)]
pub struct OutputGuard {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates `dir` (and parents) and records every directory that did not
    /// exist before.
    pub fn create_dir_all(&mut self, dir: &Path) -> std::io::Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        std::fs::create_dir_all(dir)?;
        // Deepest first, so removal can go in recorded order.
        self.dirs.extend(missing);
        Ok(())
    }

    /// Records a file about to be written.
    pub fn track_file(&mut self, path: &Path) {
        self.files.push(path.to_path_buf());
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            if f.exists() {
                log::debug!("removing partial output {}", f.display());
                let _ = std::fs::remove_file(f);
            }
        }
        for d in &self.dirs {
            // Only succeeds if empty, leaving foreign files alone.
            let _ = std::fs::remove_dir(d);
        }
    }
}
