mod store;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use flypath_core::formats::{emit_geometry_file, emit_trajectory_kml};
use flypath_core::playback::{format_dump, parse_script, run_playback, DEFAULT_FPS};
use flypath_core::trajectory::{
    ingest_flight, list_config_files, read_config_file, DEFAULT_SAMPLES_PER_SEGMENT,
};
use flypath_core::ConfigRecord;
use log::info;

use store::FlightStore;

const DEFAULT_FLIGHT_FILE: &str = "flight.json";

/// Recreate and replay an aerial flight from per-photograph records.
#[derive(Debug, Parser)]
#[command(name = "flypath", version)]
struct Cli {
    /// Playback frame rate.
    #[arg(long, global = true, default_value_t = DEFAULT_FPS, value_parser = clap::value_parser!(u32).range(1..))]
    fps: u32,

    /// Interpolated samples inserted between consecutive inputs.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES_PER_SEGMENT)]
    samples_per_segment: usize,

    /// Output file. Defaults to flight.json for ingest and to stdout
    /// otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Read a directory of configuration files, write the flight file and a
    /// geometry sidecar next to each photograph.
    Ingest { dir: PathBuf },
    /// Write the KML trajectory marks of a flight file.
    ExportKml { flight: PathBuf },
    /// Replay a flight under an event script and write the frame dump.
    Playback { flight: PathBuf, script: PathBuf },
    /// Check every configuration file in a directory without writing anything.
    Validate { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Cmd::Ingest { dir } => {
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_FLIGHT_FILE));
            ingest(dir, &out, cli.samples_per_segment)?;
        }
        Cmd::ExportKml { flight } => {
            let store = FlightStore::load(flight)?;
            let kml = emit_trajectory_kml(&store.points(), &store.interpolated());
            write_output(cli.out.as_deref(), &kml)?;
        }
        Cmd::Playback { flight, script } => {
            let store = FlightStore::load(flight)?;
            let text = fs::read_to_string(script)
                .with_context(|| format!("cannot read script {}", script.display()))?;
            let events = parse_script(&text)
                .with_context(|| format!("invalid script {}", script.display()))?;
            let records = run_playback(&store.animation_path()?, &events, cli.fps)?;
            info!("{} frames", records.len());
            write_output(cli.out.as_deref(), &format_dump(&records))?;
        }
        Cmd::Validate { dir } => return validate(dir),
    }
    Ok(ExitCode::SUCCESS)
}

fn config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let files = list_config_files(dir)?;
    if files.is_empty() {
        bail!("no configuration files in {}", dir.display());
    }
    Ok(files)
}

fn ingest(dir: &Path, out: &Path, samples_per_segment: usize) -> Result<()> {
    let mut parsed = Vec::new();
    for path in config_files(dir)? {
        parsed.push((path.display().to_string(), read_config_file(&path)?));
    }
    let store = FlightStore::build(ingest_flight(parsed)?, samples_per_segment)?;
    for r in &store.records {
        let sidecar = dir.join(&r.photo.image_file).with_extension("geom");
        let text = emit_geometry_file(&r.photo, &r.point.geodetic())?;
        fs::write(&sidecar, text).with_context(|| format!("cannot write {}", sidecar.display()))?;
    }
    store.save(out)?;
    info!(
        "{} records, {} samples written to {}",
        store.records.len(),
        store.samples.len(),
        out.display()
    );
    Ok(())
}

fn validate(dir: &Path) -> Result<ExitCode> {
    let mut parsed: Vec<(String, ConfigRecord)> = Vec::new();
    let mut failed = false;
    let mut stdout = io::stdout().lock();
    for path in config_files(dir)? {
        let name = path.display().to_string();
        match read_config_file(&path) {
            Ok(record) => {
                writeln!(stdout, "OK {name}")?;
                parsed.push((name, record));
            }
            Err(e) => {
                failed = true;
                writeln!(stdout, "FAIL {e}")?;
            }
        }
    }
    if !failed {
        if let Err(e) = ingest_flight(parsed) {
            failed = true;
            writeln!(stdout, "FAIL flight: {e}")?;
        }
    }
    Ok(if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
