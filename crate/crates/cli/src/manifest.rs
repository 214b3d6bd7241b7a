use std::path::{Path, PathBuf};

use priorint::ProblemConfig;
use serde::Serialize;
use sha1::{Digest, Sha1};

use crate::output::{write_file, CliError};

/// Hash git would assign to a blob with these contents.
pub fn git_blob_sha1(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub git_blob_sha1: String,
}

/// Written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: ProblemConfig,
    pub inputs: Vec<InputFile>,
    pub output: PathBuf,
    pub output_git_blob_sha1: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ProblemConfig) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            inputs: Vec::new(),
            output: PathBuf::new(),
            output_git_blob_sha1: String::new(),
            seed: None,
            summary: None,
        }
    }

    pub fn with_input(mut self, path: &Path, bytes: &[u8]) -> Self {
        self.inputs.push(InputFile { path: path.to_path_buf(), git_blob_sha1: git_blob_sha1(bytes) });
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    /// Write `contents` to `out` and this manifest beside it.
    pub fn write_with(mut self, out: &Path, contents: &[u8]) -> Result<(), CliError> {
        write_file(out, contents)?;
        self.output = out.to_path_buf();
        self.output_git_blob_sha1 = git_blob_sha1(contents);
        let mut text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        text.push('\n');
        write_file(&Self::sidecar_path(out), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_git_hash_object() {
        assert_eq!(git_blob_sha1(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
        assert_eq!(git_blob_sha1(b""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            RunManifest::sidecar_path(Path::new("out/b.json")),
            PathBuf::from("out/b.json.manifest.json")
        );
    }
}
