//! Run directory bookkeeping: CSV outputs, input digests and the manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects what a run wrote and read so the manifest can list digests.
#[derive(Debug)]
pub struct RunDir {
    dir: PathBuf,
    outputs: Map<String, Json>,
    inputs: Map<String, Json>,
}

impl RunDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Map::new(),
            inputs: Map::new(),
        })
    }

    pub fn write(&mut self, name: &str, text: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.outputs.insert(name.to_string(), Json::from(sha256_hex(text.as_bytes())));
        Ok(())
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> io::Result<String> {
        let bytes = fs::read(path)?;
        self.inputs.insert(path.display().to_string(), Json::from(sha256_hex(&bytes)));
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Written last, through a temporary file and a rename, so a manifest on
    /// disk always describes a finished run.
    pub fn finish(self, command: &str, config: Json, seed: u64, wall_time: f64) -> io::Result<PathBuf> {
        let manifest = json!({
            "tool": "mockq",
            "version": env!("CARGO_PKG_VERSION"),
            "git_describe": env!("MOCKQ_GIT_DESCRIBE"),
            "command": command,
            "seed": seed,
            "config": config,
            "wall_time_s": wall_time,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)? + "\n";
        let tmp = self.dir.join(format!(".{MANIFEST}.tmp"));
        fs::write(&tmp, text)?;
        let target = self.dir.join(MANIFEST);
        fs::rename(&tmp, &target)?;
        Ok(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn manifest_lists_written_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut run = RunDir::create(tmp.path()).unwrap();
        run.write("a.csv", "x\n1\n").unwrap();
        let path = run.finish("test", json!({}), 7, 0.5).unwrap();
        let m: Json = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m["seed"], 7);
        assert_eq!(m["outputs"]["a.csv"], sha256_hex(b"x\n1\n"));
        assert!(!tmp.path().join(".manifest.json.tmp").exists());
    }
}
