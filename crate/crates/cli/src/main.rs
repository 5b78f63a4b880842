use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcc::circuit::{from_text, to_text};
use qcc::device::{resolve_device, DeviceError};
use qcc::experiment::{
    compile_circuit, default_out, run_experiment, run_train, verify_bundle, CompileReport, ExperimentConfig,
    ExperimentError, Pipeline,
};
use qcc::fom::{FigureOfMeritSpec, FomKind};
use qcc::search::{PassAction, Preset};

#[derive(Parser)]
#[command(name = "qcc", version, about = "Quantum circuit compilation and pass-sequence search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit file for a device.
    Compile {
        /// Circuit in the text format.
        circuit: PathBuf,
        /// Mock device name or device file.
        #[arg(long, default_value = "quito")]
        device: String,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for compiled.qc and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the QCBM on one compiled ansatz.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Override training.epochs.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Baseline runs vs pass-sequence search, written as a result bundle.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
        /// Search reward (two_qubit_count, depth, expected_fidelity, histogram_intersection, app_kl).
        #[arg(long)]
        fom: Option<String>,
        /// Override baseline.preset.
        #[arg(long)]
        preset: Option<Preset>,
    },
    /// Check a written bundle for header, monotonicity and manifest consistency.
    Verify { dir: PathBuf },
    /// Device utilities.
    Device {
        #[command(subcommand)]
        command: DeviceCommand,
    },
}

#[derive(Subcommand)]
enum DeviceCommand {
    /// Print a device as JSON.
    Show { name_or_path: String },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config; absent fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, conflicts_with = "passes")]
    preset: Option<Preset>,
    /// `;`-separated pass list, e.g. "translate;merge_rz;layout_fixed=3,2,4,1;route".
    #[arg(long)]
    passes: Option<String>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match &e {
            ExperimentError::Device(DeviceError::Io { .. } | DeviceError::Parse(_)) => Failure::Validation(format!("ParseError: {e}")),
            ExperimentError::ConfigParse(_) => Failure::Validation(format!("ParseError: {e}")),
            ExperimentError::Circuit(_) => Failure::Validation(format!("ParseError: {e}")),
            _ if e.is_validation() => Failure::Validation(format!("ValidationError: {e}")),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<DeviceError> for Failure {
    fn from(e: DeviceError) -> Self {
        ExperimentError::from(e).into()
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn pipeline(args: &PipelineArgs, fallback: Preset) -> Result<Pipeline, Failure> {
    match (&args.passes, args.preset) {
        (Some(list), _) => PassAction::parse_list(list)
            .map(Pipeline::Passes)
            .map_err(|e| Failure::Validation(format!("ValidationError: {e}"))),
        (None, Some(p)) => Ok(Pipeline::Preset(p)),
        (None, None) => Ok(Pipeline::Preset(fallback)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { circuit, device, pipeline: p, seed, out } => {
            let device = resolve_device(&device)?;
            let text = std::fs::read_to_string(&circuit)
                .map_err(|e| Failure::Validation(format!("ParseError: cannot read {}: {e}", circuit.display())))?;
            let circuit = from_text(&text).map_err(ExperimentError::from)?;
            let state = compile_circuit(&circuit, &device, &pipeline(&p, Preset::O3Like)?, seed)?;
            let report = json(&CompileReport::new(&state));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
                write_file(&dir.join("compiled.qc"), &to_text(&state.circuit))?;
                write_file(&dir.join("report.json"), &report)?;
            }
            print!("{report}");
        }
        Command::Train { common, pipeline: p, epochs } => {
            let mut cfg = load_config(&common)?;
            if let Some(e) = epochs {
                cfg.training.epochs = e;
            }
            let out = common.out.clone().unwrap_or_else(|| default_out(&cfg));
            let summary = run_train(&cfg, &pipeline(&p, cfg.baseline.preset)?, &out)?;
            print!("{}", json(&summary));
        }
        Command::Experiment { common, fom, preset } => {
            let mut cfg = load_config(&common)?;
            if let Some(name) = fom {
                let kind = FomKind::from_name(&name)
                    .ok_or_else(|| Failure::Validation(format!("ValidationError: unknown figure of merit `{name}`")))?;
                cfg.fom = FigureOfMeritSpec::new(kind);
            }
            if let Some(p) = preset {
                cfg.baseline.preset = p;
            }
            let out = common.out.clone().unwrap_or_else(|| default_out(&cfg));
            let summary = run_experiment(&cfg, &out)?;
            print!("{}", json(&summary));
        }
        Command::Verify { dir } => {
            let m = verify_bundle(&dir)?;
            println!("ok: {} files, {} curves", m.files.len(), m.curves.len());
        }
        Command::Device { command: DeviceCommand::Show { name_or_path } } => {
            print!("{}", resolve_device(&name_or_path)?.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
