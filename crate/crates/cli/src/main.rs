mod args;
mod run;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use args::{Cli, Command};

/// Everything needed to reproduce a run. Output location and thread count
/// are deliberately absent: neither changes the data.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    seed: u64,
    command: Command,
    outputs: Vec<String>,
    summary: Map<String, Value>,
}

const MANIFEST_FILE: &str = "manifest.json";

fn load_manifest(path: &Path) -> Result<Manifest, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid manifest {}: {e}", path.display()))
}

/// Writes all files into a staging directory first, then moves them into
/// place; on any failure nothing new is left behind.
fn commit(out_dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let stage = tempfile::Builder::new().prefix(".pointproc-").tempdir_in(out_dir)?;
    for (name, data) in files {
        fs::write(stage.path().join(name), data)?;
    }
    let mut moved: Vec<&str> = Vec::new();
    for (name, _) in files {
        if let Err(e) = fs::rename(stage.path().join(name), out_dir.join(name)) {
            for m in moved {
                let _ = fs::remove_file(out_dir.join(m));
            }
            return Err(e);
        }
        moved.push(name);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), String> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("cannot start {n} threads: {e}"))?;
    }
    let (command, seed) = match (&cli.manifest, cli.command) {
        (Some(path), None) => {
            let m = load_manifest(path)?;
            (m.command, m.seed)
        }
        (None, Some(cmd)) => (cmd, cli.seed),
        (Some(_), Some(_)) => {
            Cli::command()
                .error(
                    clap::error::ErrorKind::ArgumentConflict,
                    "--manifest replays a recorded command; do not give another",
                )
                .exit();
        }
        (None, None) => {
            Cli::command()
                .error(
                    clap::error::ErrorKind::MissingSubcommand,
                    "a command (simulate, analyze, detect) or --manifest is required",
                )
                .exit();
        }
    };

    let outputs = run::execute(&command, seed).map_err(|e| e.to_string())?;
    for w in &outputs.warnings {
        eprintln!("warning: {w}");
    }

    let mut files = outputs.files;
    let manifest = Manifest {
        tool: "pointproc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        command,
        outputs: files.iter().map(|(n, _)| n.clone()).collect(),
        summary: outputs.summary,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
    text.push('\n');
    files.push((MANIFEST_FILE.into(), text.into_bytes()));
    commit(&cli.out, &files).map_err(|e| format!("cannot write outputs to {}: {e}", cli.out.display()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
