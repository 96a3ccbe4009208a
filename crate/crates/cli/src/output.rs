//! Artifact writing: atomic file replacement, seed headers and the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use biblio_core::table::Table;
use sha2::{Digest, Sha256};

/// Writes into an output root, remembering every file for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    seed: u64,
    written: Vec<PathBuf>,
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>, seed: u64) -> Self {
        Self {
            root: root.into(),
            seed,
            written: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Raw write relative to the root, without a seed header.
    pub fn write_raw(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        write_atomic(&path, bytes)?;
        if !self.written.contains(&path) {
            self.written.push(path.clone());
        }
        Ok(path)
    }

    pub fn write_csv(&mut self, rel: &str, table: &Table) -> Result<PathBuf> {
        let body = format!("# seed: {}\n{}", self.seed, table.to_csv());
        self.write_raw(rel, body.as_bytes())
    }

    pub fn write_markdown(&mut self, rel: &str, title: &str, table: &Table) -> Result<PathBuf> {
        let body = format!(
            "<!-- seed: {} -->\n# {title}\n\n{}",
            self.seed,
            table.to_markdown()
        );
        self.write_raw(rel, body.as_bytes())
    }

    /// `<stem>.csv` and `<stem>.md` from the same table.
    pub fn write_both(&mut self, stem: &str, title: &str, table: &Table) -> Result<()> {
        self.write_csv(&format!("{stem}.csv"), table)?;
        self.write_markdown(&format!("{stem}.md"), title, table)?;
        Ok(())
    }

    /// `manifest.csv` listing every file under the root except itself, with
    /// SHA-256 and size, sorted by relative path.
    pub fn write_manifest(&mut self) -> Result<PathBuf> {
        let mut files = Vec::new();
        collect_files(&self.root, &mut files)?;
        let mut rows: Vec<(String, PathBuf)> = files
            .into_iter()
            .filter_map(|p| {
                let rel = p
                    .strip_prefix(&self.root)
                    .ok()?
                    .to_string_lossy()
                    .replace('\\', "/");
                (rel != "manifest.csv").then_some((rel, p))
            })
            .collect();
        rows.sort();
        let mut table = Table::new(["path", "sha256", "bytes"]);
        for (rel, path) in rows {
            let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            table.push([
                rel,
                hex::encode(Sha256::digest(&bytes)),
                bytes.len().to_string(),
            ]);
        }
        self.write_raw("manifest.csv", table.to_csv().as_bytes())
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if hidden {
            continue;
        }
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Parses a manifest back into `(path, sha256, bytes)` rows.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, String, u64)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push((rec[0].to_string(), rec[1].to_string(), rec[2].parse()?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_matches_content() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::new(dir.path(), 9);
        let mut t = Table::new(["a"]);
        t.push(["1"]);
        out.write_both("x/t", "T", &t).unwrap();
        let m = out.write_manifest().unwrap();
        let rows = read_manifest(&m).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.0.as_str()).collect::<Vec<_>>(),
            vec!["x/t.csv", "x/t.md"]
        );
        let csv = fs::read(dir.path().join("x/t.csv")).unwrap();
        assert!(csv.starts_with(b"# seed: 9\n"));
        assert_eq!(rows[0].1, hex::encode(Sha256::digest(&csv)));
        assert_eq!(rows[0].2, csv.len() as u64);
    }
}
