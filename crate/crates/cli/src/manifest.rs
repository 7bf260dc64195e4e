use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{self, CliError};
use crate::Run;

/// Record of one run: enough to reproduce its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Full parameter set, defaults resolved.
    pub run: Run,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

fn absolutize(run: &mut Run) {
    match run {
        Run::Acvf(a) => a.model = absolute(&a.model),
        Run::Weights(a) => a.model = absolute(&a.model),
        Run::Compose(a) => {
            a.gw = absolute(&a.gw);
            a.gx = absolute(&a.gx);
        }
        Run::Check(a) => a.acvf = absolute(&a.acvf),
        Run::Theorem(a) => {
            a.model = absolute(&a.model);
            a.filter = absolute(&a.filter);
        }
        Run::Simulate(a) => a.model = absolute(&a.model),
    }
    let common = run.common_mut();
    common.output = absolute(&common.output);
}

fn command_name(run: &Run) -> &'static str {
    match run {
        Run::Acvf(_) => "acvf",
        Run::Weights(_) => "weights",
        Run::Compose(_) => "compose",
        Run::Check(_) => "check",
        Run::Theorem(_) => "theorem",
        Run::Simulate(_) => "simulate",
    }
}

/// Runs a command, writes its outputs and manifest. `Ok(false)` means a
/// strict-mode verdict failure.
pub fn execute(mut run: Run) -> Result<bool, CliError> {
    absolutize(&mut run);
    let outcome = commands::run(&run)?;
    for (path, contents) in &outcome.files {
        write_atomic(path, contents)?;
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command_name(&run).to_string(),
        inputs: outcome.inputs,
        outputs: outcome.files.into_iter().map(|(p, _)| p).collect(),
        run: run.clone(),
    };
    let text = lincov::io::to_json(&manifest)?;
    write_atomic(&manifest_path(&run.common().output), &text)?;
    Ok(!(run.common().strict && outcome.verdict_failed))
}

pub fn replay(path: &Path, output: Option<PathBuf>) -> Result<bool, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| lincov::Error::Parse(format!("manifest {}: {e}", path.display())))?;
    let mut run = manifest.run;
    if let Some(out) = output {
        run.common_mut().output = out;
    }
    execute(run)
}
