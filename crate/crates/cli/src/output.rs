use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub task: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TaskStatus {
    pub fn ok(task: impl Into<String>) -> Self {
        TaskStatus { task: task.into(), ok: true, error: None }
    }

    pub fn failed(task: impl Into<String>, error: impl ToString) -> Self {
        TaskStatus { task: task.into(), ok: false, error: Some(error.to_string()) }
    }
}

/// Record of one run. Lists every file written except itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub jobs: usize,
    pub started: String,
    pub finished: String,
    pub config: RunConfig,
    pub tasks: Vec<TaskStatus>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn failed_tasks(&self) -> usize {
        self.tasks.iter().filter(|t| !t.ok).count()
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(dir.join(MANIFEST)).with_context(|| format!("reading manifest in {}", dir.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Re-hash every listed file and compare.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let (bytes, sha) = digest(&dir.join(&f.path))?;
            if bytes != f.bytes || sha != f.sha256 {
                bail!("{} does not match its manifest entry", f.path);
            }
        }
        Ok(())
    }
}

fn digest(path: &Path) -> Result<(u64, String)> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        bytes += n as u64;
        hasher.update(&buf[..n]);
    }
    Ok((bytes, format!("{:x}", hasher.finalize())))
}

/// Output directory that remembers what it wrote.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    /// Create `root`, first removing the files of a previous run recorded in
    /// its manifest. Any other content is an error.
    pub fn prepare(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        if root.join(MANIFEST).is_file() {
            let old = RunManifest::load(root)?;
            for f in &old.files {
                let p = root.join(&f.path);
                if p.is_file() {
                    fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
                }
            }
            fs::remove_file(root.join(MANIFEST))?;
        }
        if let Some(entry) = fs::read_dir(root)?.next() {
            bail!(
                "output directory {} holds files not written by a previous run (e.g. {}); choose an empty directory",
                root.display(),
                entry?.file_name().to_string_lossy()
            );
        }
        Ok(OutDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        if name == MANIFEST || self.files.iter().any(|f| f == name) {
            bail!("{name} written twice");
        }
        let path = self.root.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(name, |w| writeln!(w, "{text}"))
    }

    /// Hash the inventory and write the manifest.
    pub fn finish(self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.files = self
            .files
            .iter()
            .map(|name| {
                let (bytes, sha256) = digest(&self.root.join(name))?;
                Ok(FileEntry { path: name.clone(), bytes, sha256 })
            })
            .collect::<Result<_>>()?;
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.root.join(MANIFEST), text + "\n")?;
        Ok(manifest)
    }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}
