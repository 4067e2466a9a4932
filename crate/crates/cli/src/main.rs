//! `oam-lens`: runs a JSON-described experiment and writes tables, images
//! and a `report.json` manifest.

mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use oam_lens::constants::PhysicalConstants;
use serde_json::json;
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(name = "oam-lens", version, about = "OAM-dependent magnetic lens experiments")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, required_unless_present = "print_schema")]
    config: Option<PathBuf>,

    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads for per-order propagation. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,

    /// Run twice and fail with exit code 3 unless every output file is
    /// byte-identical.
    #[arg(long)]
    seed_check: bool,

    /// Validate the config, build the column and source, and exit.
    #[arg(long)]
    dry_run: bool,

    /// Print the config JSON schema and exit.
    #[arg(long)]
    print_schema: bool,
}

/// Config problems (exit 2) as opposed to numerical failures (exit 3).
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<oam_lens::Error>() {
            return match e {
                oam_lens::Error::Domain(_) | oam_lens::Error::Config(_) => 2,
                _ => 3,
            };
        }
    }
    if err.chain().any(|c| c.is::<UsageError>()) || err.to_string().starts_with("config field") {
        2
    } else {
        3
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn run_once(cfg: &config::ExperimentConfig, base: &Path, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = run::Output::new(dir)?;
    let results = run::execute(cfg, base, &mut out)?;

    let mut manifest = Vec::new();
    for f in out.files() {
        let bytes = std::fs::read(out.dir().join(f))
            .with_context(|| format!("cannot read back {}", f.display()))?;
        manifest.push(json!({
            "path": f.to_string_lossy(),
            "bytes": bytes.len(),
            "sha256": sha256_hex(&bytes),
        }));
    }
    let constants = PhysicalConstants::CODATA_2018;
    let bits: Vec<u8> = constants
        .bit_patterns()
        .iter()
        .flat_map(|b| b.to_le_bytes())
        .collect();
    let report = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "run": cfg.run.kind(),
        "constants": constants,
        "constants_sha256": sha256_hex(&bits),
        "config": cfg,
        "results": results,
        "files": manifest,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(dir.join("report.json"), text).context("cannot write report.json")?;
    let mut files = out.files().to_vec();
    files.push(PathBuf::from("report.json"));
    Ok(files)
}

fn seed_check(cfg: &config::ExperimentConfig, base: &Path, out: &Path, files: &[PathBuf]) -> anyhow::Result<()> {
    let second = out.join(".seed_check");
    let again = run_once(cfg, base, &second)?;
    let result = (|| {
        if again != files {
            anyhow::bail!("seed check: the second run wrote a different file list");
        }
        for f in files {
            if std::fs::read(out.join(f))? != std::fs::read(second.join(f))? {
                anyhow::bail!("seed check: {} differs between runs", f.display());
            }
        }
        Ok(())
    })();
    std::fs::remove_dir_all(&second).ok();
    result
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    if cli.print_schema {
        println!("{}", serde_json::to_string_pretty(&config::schema())?);
        return Ok(());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let path = cli.config.expect("clap enforces --config");
    let cfg = config::load(&path).map_err(|e| UsageError(format!("{e:#}")))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if cli.dry_run {
        cfg.beam()?;
        cfg.column(&base)?;
        if cfg.source.is_some() {
            cfg.modes()?;
        }
        eprintln!("config ok: {} run", cfg.run.kind());
        return Ok(());
    }

    let files = run_once(&cfg, &base, &cli.out)?;
    if cli.seed_check {
        seed_check(&cfg, &base, &cli.out, &files)?;
        eprintln!("seed check passed: {} files identical", files.len());
    }
    println!("{}", cli.out.join("report.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
