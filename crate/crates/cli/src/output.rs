//! Artifact emission. Every command computes all of its outputs first and
//! then writes each file through a temporary sibling and a rename, so a
//! failed run leaves no partial files behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bilinear_core::Result;
use serde::Serialize;

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add_text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add_text(name, text);
        Ok(())
    }

    /// Writes every staged file; returns the final paths.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let target = self.dir.join(name);
            let tmp = self.dir.join(format!(".{name}.tmp-{}", std::process::id()));
            let result = (|| {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
                fs::rename(&tmp, &target)
            })();
            if let Err(e) = result {
                let _ = fs::remove_file(&tmp);
                return Err(e.into());
            }
            written.push(target);
        }
        Ok(written)
    }
}

/// CSV table with a header row; floats use the shortest round-trip form.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            width: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[f64]) {
        debug_assert_eq!(cells.len(), self.width);
        let line: Vec<String> = cells.iter().map(|v| format!("{v:?}")).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_round_trip_floats() {
        let mut csv = Csv::new(&["a".into(), "b".into()]);
        csv.row(&[0.1, 1.0]);
        assert_eq!(csv.finish(), "a,b\n0.1,1.0\n");
    }

    #[test]
    fn commit_writes_all_files_without_leftovers() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(&dir.path().join("out"));
        a.add_text("x.csv", "1\n".into());
        a.add_json("y.json", &[1, 2]).unwrap();
        let paths = a.commit().unwrap();
        assert_eq!(paths.len(), 2);
        let names: Vec<_> = fs::read_dir(dir.path().join("out"))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        assert!(names.iter().all(|n| !n.starts_with('.')));
        assert_eq!(fs::read_to_string(dir.path().join("out/x.csv")).unwrap(), "1\n");
    }
}
