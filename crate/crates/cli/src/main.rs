use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use stiffsde::experiments::{
    emit_plot_data, preset_description, resolve_preset, run_experiment, ExperimentConfig,
    RunManifest, SeriesStatus, PRESET_NAMES,
};

/// Stiff protein kinetic SDE simulations.
#[derive(Parser)]
#[command(name = "stiffsde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset, a configuration file, or rerun a manifest.
    Run {
        /// Preset name, path to a `key = value` config, or a manifest.txt.
        target: String,
        /// Override the seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: `out/<preset>`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// `key=value` override, repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the available presets.
    ListPresets,
    /// Print long-format plot data for a finished run.
    EmitPlotData {
        /// Path to a manifest.txt.
        manifest: PathBuf,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_target(target: &str) -> Result<ExperimentConfig> {
    if PRESET_NAMES.contains(&target) {
        return Ok(resolve_preset(target)?);
    }
    let path = Path::new(target);
    if !path.is_file() {
        bail!("`{target}` is neither a preset ({}) nor a file", PRESET_NAMES.join(", "));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_manifest = text
        .lines()
        .any(|l| l.trim_start().starts_with("software_version"));
    let config = if is_manifest {
        RunManifest::parse(&text)?.config
    } else {
        ExperimentConfig::parse(&text)?
    };
    Ok(config)
}

fn run(target: &str, seed: Option<u64>, out_dir: Option<PathBuf>, overrides: &[String]) -> Result<bool> {
    let mut config = load_target(target)?;
    for o in overrides {
        config.apply_override(o)?;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate()?;
    let out_dir = out_dir.unwrap_or_else(|| Path::new("out").join(config.preset_name()));
    let manifest = run_experiment(&config, &out_dir)?;

    let mut stdout = io::stdout().lock();
    for s in &manifest.series {
        match &s.status {
            SeriesStatus::Ok => {
                let sup = s.sup_error.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
                writeln!(stdout, "{:<34} ok      sup_error={sup}", s.name)?;
            }
            SeriesStatus::Failed(msg) => writeln!(stdout, "{:<34} FAILED  {msg}", s.name)?,
        }
    }
    writeln!(stdout, "manifest: {}", out_dir.join("manifest.txt").display())?;
    Ok(!manifest.any_failed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            target,
            seed,
            out_dir,
            overrides,
        } => run(&target, seed, out_dir, &overrides),
        Command::ListPresets => {
            for name in PRESET_NAMES {
                println!("{name:<6}  {}", preset_description(name).unwrap_or(""));
            }
            Ok(true)
        }
        Command::EmitPlotData { manifest, out } => plot(&manifest, out.as_deref()).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn plot(manifest_path: &Path, out: Option<&Path>) -> Result<()> {
    let manifest = RunManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    match out {
        Some(path) => {
            let mut file = io::BufWriter::new(
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            emit_plot_data(&manifest, base, &mut file)?;
            file.flush()?;
        }
        None => emit_plot_data(&manifest, base, &mut io::stdout().lock())?,
    }
    Ok(())
}
