//! Artifacts are rendered in memory and written only once the whole run has
//! succeeded: every file goes to a temporary name first, then all are
//! renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dustflow::serde_float::format as fmt_float;
use serde::Serialize;

use crate::error::CliError;

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, CliError> {
        let mut contents =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Run(format!("serializing {name}: {e}")))?;
        contents.push('\n');
        Ok(Self { name: name.into(), contents })
    }

    pub fn text(name: &str, contents: String) -> Self {
        Self { name: name.into(), contents }
    }
}

/// CSV table with a fixed header.
pub struct Table {
    out: String,
    width: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { out: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn into_artifact(self, name: &str) -> Artifact {
        Artifact::text(name, self.out)
    }
}

pub fn num(x: f64) -> String {
    fmt_float(x)
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::Run(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for a in artifacts {
        let target = dir.join(&a.name);
        let tmp = dir.join(format!(".{}.tmp{}", a.name, std::process::id()));
        let res = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(a.contents.as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = res {
            let _ = fs::remove_file(&tmp);
            cleanup(&staged);
            return Err(io("cannot write", &tmp, e));
        }
        staged.push((tmp, target));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (i, (tmp, target)) in staged.iter().enumerate() {
        if let Err(e) = fs::rename(tmp, target) {
            cleanup(&staged[i..]);
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(io("cannot rename into", target, e));
        }
        written.push(target.clone());
    }
    Ok(written)
}
