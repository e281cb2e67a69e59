use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roadwork::config::SessionConfig;
use roadwork::detector::{Detector, ProcessDetector};
use roadwork::error::{AppError, ConfigError, InputError};
use roadwork::outputs::read_site_documents;
use roadwork::replay::{load_inputs, replay_to_dir};
use roadwork::simulator::{evaluate, generate_streams, GroundTruth, Scenario};

#[derive(Parser)]
#[command(name = "roadwork", version, about = "Camera and LiDAR roadwork detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over recorded streams.
    Replay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Directory with odometry.jsonl, lidar_objects.jsonl and
        /// detections.jsonl; overrides the config.
        #[arg(long)]
        input_dir: Option<PathBuf>,
        /// Also write latency.json with per-cycle timing.
        #[arg(long)]
        latency_report: bool,
    },
    /// Generate streams and ground truth from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare site records with ground truth.
    Evaluate {
        /// Directory of site_*.json documents.
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
    },
}

fn replay(
    config: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    input_dir: Option<PathBuf>,
    latency_report: bool,
) -> Result<(), AppError> {
    let cfg = match &config {
        Some(p) => SessionConfig::load(p)?,
        None => SessionConfig::default(),
    };
    let input_dir = input_dir
        .or_else(|| cfg.session.input_dir.clone())
        .ok_or_else(|| ConfigError::Invalid {
            path: config.clone().unwrap_or_default(),
            field: "session.input_dir".into(),
            message: "no input directory given".into(),
        })?;
    let out_dir = out_dir
        .or_else(|| cfg.session.out_dir.clone())
        .ok_or_else(|| ConfigError::Invalid {
            path: config.clone().unwrap_or_default(),
            field: "session.out_dir".into(),
            message: "no output directory given".into(),
        })?;
    if !input_dir.is_dir() {
        return Err(InputError {
            path: input_dir,
            line: 0,
            message: "input directory does not exist".into(),
        }
        .into());
    }
    let mut external = cfg.session.detector_command.as_deref().map(ProcessDetector::spawn).transpose()?;
    let events = load_inputs(&input_dir, external.is_some())?;
    let detector = external.as_mut().map(|d| d as &mut dyn Detector);
    let stats = replay_to_dir(&cfg.engine_config(), &events, detector, &out_dir, latency_report)?;
    if !stats.latency.skipped_frames.is_empty() {
        eprintln!(
            "warning: {} LiDAR frames had no odometry within 100 ms and were skipped",
            stats.latency.skipped_frames.len()
        );
    }
    println!("{}", stats.summary.to_text());
    if latency_report {
        println!(
            "{} cycles, max {:.3} ms, mean {:.3} ms",
            stats.latency.cycles, stats.latency.max_ms, stats.latency.mean_ms
        );
    }
    Ok(())
}

fn simulate(scenario: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), AppError> {
    let text = std::fs::read_to_string(scenario).map_err(|e| ConfigError::Parse {
        path: scenario.to_path_buf(),
        message: e.to_string(),
    })?;
    let invalid = |e: roadwork::simulator::ScenarioError| ConfigError::Invalid {
        path: scenario.to_path_buf(),
        field: e.field.clone(),
        message: e.message,
    };
    let mut sc = Scenario::from_toml(&text).map_err(invalid)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let streams = generate_streams(&sc).map_err(invalid)?;
    streams.write_dir(out_dir)?;
    println!(
        "{} odometry, {} camera, {} lidar records; {} ground-truth sites",
        streams.odometry.len(),
        streams.detections.len(),
        streams.lidar.len(),
        streams.ground_truth.sites.len()
    );
    Ok(())
}

fn run_evaluate(records: &Path, ground_truth: &Path) -> Result<(), AppError> {
    let docs = read_site_documents(records)?;
    let text = std::fs::read_to_string(ground_truth).map_err(|e| AppError::io(ground_truth.display().to_string(), e))?;
    let gt: GroundTruth = serde_json::from_str(&text).map_err(|e| InputError {
        path: ground_truth.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let eval = evaluate(&docs, &gt).map_err(|e| AppError::Other(e.to_string()))?;
    print!("{}", eval.to_table());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Replay {
            config,
            out_dir,
            input_dir,
            latency_report,
        } => replay(config, out_dir, input_dir, latency_report),
        Command::Simulate { scenario, out_dir, seed } => simulate(&scenario, &out_dir, seed),
        Command::Evaluate { records, ground_truth } => run_evaluate(&records, &ground_truth),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
