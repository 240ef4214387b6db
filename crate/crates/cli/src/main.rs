//! Command-line driver for the street-scene pipeline.

mod config;
mod manifest;
mod stages;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use morphoscan::pointcloud::{write_to, Format};
use morphoscan::synth::{analytic_truth, generate, random_corridor, CorridorSpec, SceneSpec};
use serde_json::Value;

use config::ConfigArgs;
use stages::{Context, Input};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Input(String),
    #[error("missing {path}: run `morphoscan {stage}` first")]
    Missing { path: String, stage: String },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) | CliError::Missing { .. } => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<morphoscan::Error> for CliError {
    fn from(e: morphoscan::Error) -> Self {
        match e {
            morphoscan::Error::InvalidConfig(p) => CliError::Config(p),
            morphoscan::Error::Degenerate(m) => CliError::Degenerate(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "morphoscan", version, about = "Street and facade planes and urban-morphology metrics from LiDAR scans")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load a cloud (PLY or XYZ, `-` for stdin), voxel-downsample it and estimate missing normals.
    Downsample {
        input: String,
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Detect planar fragments and fit plane entities.
    Detect {
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Filter noise and group entities into street scenes.
    Scenes {
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Per-scene metrics with normalized profiles.
    Global {
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Per-band metrics along each street.
    Local {
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Morphological maps (SVG, layer metadata, GeoJSON) from the band metrics.
    Map {
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
        /// Scan label; defaults to the input file name.
        #[arg(long)]
        scan: Option<String>,
    },
    /// Generate a labeled synthetic cloud from a scene or corridor spec (JSON).
    Synth {
        /// Spec file, `-` for stdin. Omit with --random.
        spec: Option<String>,
        /// Use a random corridor drawn from this seed instead of a spec file.
        #[arg(long, conflicts_with = "spec")]
        random: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = CloudFormat::PlyBinary)]
        format: CloudFormat,
        /// Also write the analytic ground truth (JSON) here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run every stage from a cloud file (`-` for stdin).
    All {
        input: String,
        #[arg(env = "MORPHOSCAN_OUT", default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        scan: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CloudFormat {
    PlyBinary,
    PlyAscii,
    Xyz,
}

impl From<CloudFormat> for Format {
    fn from(f: CloudFormat) -> Format {
        match f {
            CloudFormat::PlyBinary => Format::PlyBinaryLe,
            CloudFormat::PlyAscii => Format::PlyAscii,
            CloudFormat::Xyz => Format::XyzText,
        }
    }
}

fn read_spec(arg: &str, seed: Option<u64>) -> Result<SceneSpec, CliError> {
    let bytes = match arg {
        "-" => {
            let mut buf = Vec::new();
            std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
            buf
        }
        path => std::fs::read(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?,
    };
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{arg}: {e}")))?;
    let mut spec = if value.get("planes").is_some() {
        serde_json::from_value::<SceneSpec>(value).map_err(|e| CliError::Input(format!("{arg}: scene spec: {e}")))?
    } else {
        let corridor: CorridorSpec =
            serde_json::from_value(value).map_err(|e| CliError::Input(format!("{arg}: corridor spec: {e}")))?;
        corridor.build()
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn synth(args: &ConfigArgs, spec: Option<&str>, random: Option<u64>, output: Option<&Path>, format: CloudFormat, truth: Option<&Path>) -> Result<(), CliError> {
    let config = config::resolve(args)?;
    let spec = match (spec, random) {
        (_, Some(seed)) => random_corridor(seed).build(),
        (Some(arg), None) => read_spec(arg, args.seed)?,
        (None, None) => return Err(CliError::Config(vec!["synth needs a spec file or --random SEED".into()])),
    };
    let cloud = generate(&spec)?;
    let mut buf = Vec::new();
    write_to(&cloud, &mut buf, format.into())?;
    match output {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&buf)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))?;
        }
    }
    if let Some(path) = truth {
        let scenes = analytic_truth(&spec, config.scene.adjacency_radius);
        morphoscan::export::save_json(&scenes, path)?;
    }
    tracing::info!(points = cloud.len(), planes = spec.planes.len(), "synthetic cloud written");
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Command::Synth {
        spec,
        random,
        output,
        format,
        truth,
    } = &cli.command
    {
        return synth(&cli.config, spec.as_deref(), *random, output.as_deref(), *format, truth.as_deref());
    }
    let config = config::resolve(&cli.config)?;
    let out = match &cli.command {
        Command::Downsample { out, .. }
        | Command::Detect { out }
        | Command::Scenes { out }
        | Command::Global { out }
        | Command::Local { out }
        | Command::Map { out, .. }
        | Command::All { out, .. } => out.clone(),
        Command::Synth { .. } => unreachable!(),
    };
    let ctx = Context {
        out: &out,
        config: &config,
        threads: cli.config.threads,
    };
    match &cli.command {
        Command::Downsample { input, .. } => stages::downsample_stage(&ctx, &Input::parse(input)).map(drop),
        Command::Detect { .. } => stages::detect_stage(&ctx).map(drop),
        Command::Scenes { .. } => stages::scenes_stage(&ctx).map(drop),
        Command::Global { .. } => stages::global_stage(&ctx).map(drop),
        Command::Local { .. } => stages::local_stage(&ctx).map(drop),
        Command::Map { scan, .. } => {
            let scan = scan
                .clone()
                .or_else(|| stages::recorded_scan_name(&out))
                .unwrap_or_else(|| "scan".to_string());
            stages::map_stage(&ctx, &scan).map(drop)
        }
        Command::All { input, scan, .. } => {
            let input = Input::parse(input);
            let scan = scan.clone().unwrap_or_else(|| input.scan_name());
            stages::all_stages(&ctx, &input, &scan).map(drop)
        }
        Command::Synth { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("MORPHOSCAN_LOG").unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.config.threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Config(vec![format!("--threads {n}: {e}")])),
        },
        _ => execute(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
