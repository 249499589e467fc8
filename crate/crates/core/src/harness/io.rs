use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes through a sibling temp file and renames it into place.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp-{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_string(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ErrorDocument {
    pub command: String,
    pub kind: String,
    pub message: String,
    /// Messages of the error and each underlying cause, outermost first.
    pub chain: Vec<String>,
}

impl ErrorDocument {
    pub fn new(command: &str, err: &Error) -> Self {
        let mut chain = vec![err.to_string()];
        let mut cur: Option<&dyn std::error::Error> = std::error::Error::source(err);
        while let Some(e) = cur {
            chain.push(e.to_string());
            cur = e.source();
        }
        ErrorDocument {
            command: command.into(),
            kind: err.kind().into(),
            message: err.to_string(),
            chain,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_creates_parents_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b/c.txt");
        atomic_write(&p, b"hi").unwrap();
        atomic_write(&p, b"there").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"there");
        let names: Vec<_> = std::fs::read_dir(p.parent().unwrap()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn error_document_chain() {
        let e = Error::Layer {
            layer: 1,
            source: Box::new(Error::Training {
                epoch: 3,
                message: "boom".into(),
            }),
        };
        let d = ErrorDocument::new("train", &e);
        assert_eq!(d.kind, "training");
        assert_eq!(d.chain.len(), 2);
        assert!(d.chain[1].contains("epoch 3"));
    }
}
