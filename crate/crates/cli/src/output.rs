use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qglab::energy::ConstantSet;
use serde::Serialize;

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Status {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Status {
    pub fn new(name: impl Into<String>, ok: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { "pass" } else { "fail" }.into(),
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub constants: Vec<ConstantSet>,
    pub wall_clock_seconds: f64,
    pub statuses: Vec<Status>,
    pub outputs: Vec<String>,
    pub float_environment: String,
}

/// Output directory; files are written one at a time from the calling thread.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let mut body = body.to_string();
        if !body.ends_with('\n') {
            body.push('\n');
        }
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.text(name, &s)
    }

    pub fn finish(
        mut self,
        command: &str,
        config: BTreeMap<String, String>,
        constants: Vec<ConstantSet>,
        statuses: Vec<Status>,
    ) -> Result<(), CliError> {
        let m = Manifest {
            tool: "qglab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            constants,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            statuses,
            outputs: self.written.clone(),
            float_environment: format!(
                "IEEE-754 binary64 on {}-{}; eigenvalues depend on the eigensolver build, sums are order-fixed",
                std::env::consts::ARCH,
                std::env::consts::OS
            ),
        };
        let s = serde_json::to_string_pretty(&m).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.text(MANIFEST, &s)
    }
}

/// `{:.16e}` rendering: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
