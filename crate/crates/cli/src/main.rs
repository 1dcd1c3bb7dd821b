use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod files;

use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "fuelburn",
    version,
    about = "Interval fuel estimation and instantaneous fuel flow from flight tracks",
    args_override_self = true
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file with global keys and per-subcommand sections mirroring the flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic tracks and/or a labelled dataset.
    Synth(SynthArgs),
    /// Turn tracks into spectral feature records.
    Featurize(FeaturizeArgs),
    /// Train a model on a labelled dataset.
    Train(TrainArgs),
    /// Predict fuel burned over an interval of a track.
    Predict(PredictArgs),
    /// Cumulative fuel and instantaneous flow along a track.
    Curve(CurveArgs),
    /// Score a model on a labelled dataset.
    Eval(EvalArgs),
    /// Build a gridded CO2 inventory from many tracks.
    Grid(GridArgs),
    /// Error of models trained on growing datasets, per truncation radius.
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrackFileFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimizerArg {
    /// SGD with heavy-ball momentum.
    Sgd,
    /// Adam; --momentum sets beta1.
    Adam,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ActivationArg {
    Relu,
    Linear,
}

/// Aircraft metadata for tracks that do not carry their own.
#[derive(Args, Debug, Clone, Default)]
struct MetaArgs {
    #[arg(long, requires_all = ["age", "wingspan"])]
    aircraft_type: Option<String>,
    #[arg(long, requires = "aircraft_type")]
    age: Option<f64>,
    #[arg(long, requires = "aircraft_type")]
    wingspan: Option<f64>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SynthArgs {
    /// Directory to write synthetic tracks into.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of tracks to write.
    #[arg(long, default_value_t = 0)]
    flights: usize,
    #[arg(long, value_enum, default_value_t = TrackFileFormat::Jsonl)]
    format: TrackFileFormat,
    /// Labelled dataset (JSONL) to write.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Truncation radius used for both altitude and speed.
    #[arg(long, default_value_t = 50)]
    radius: usize,
    /// JSON file overriding the aircraft classes, laws and profile ranges.
    #[arg(long)]
    synth_config: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct FeaturizeArgs {
    /// Track files or directories of tracks.
    #[arg(long, num_args = 1.., required = true)]
    tracks: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    radius: usize,
    #[arg(long = "t-max", default_value_t = 7200.0)]
    t_max: f64,
    #[command(flatten)]
    meta: MetaArgs,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "256,128,64")]
    hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    activation: ActivationArg,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    /// Cosine-decay the learning rate to this fraction by the last epoch.
    #[arg(long, default_value_t = 1.0)]
    final_lr_fraction: f64,
    #[arg(long, default_value_t = 0.9)]
    momentum: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Sgd)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    /// Keep the dataset order instead of the seeded shuffle.
    #[arg(long)]
    no_shuffle: bool,
    /// Also write the per-epoch loss history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    track: PathBuf,
    /// Interval start (track time, s); default track start.
    #[arg(long)]
    from: Option<f64>,
    /// Interval end (track time, s); default track end.
    #[arg(long)]
    to: Option<f64>,
    #[command(flatten)]
    meta: MetaArgs,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct CurveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    track: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spacing of the cumulative predictions the curve is built from, s.
    #[arg(long, default_value_t = 200.0)]
    step: f64,
    /// Output grid spacing, s.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[command(flatten)]
    meta: MetaArgs,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct GridArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    tracks: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.33)]
    cell_deg: f64,
    #[arg(long, default_value_t = 1000.0)]
    layer_m: f64,
    /// kg CO2 per kg fuel.
    #[arg(long, default_value_t = 3.16)]
    emission_factor: f64,
    #[arg(long, default_value_t = 200.0)]
    step: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ConvergenceArgs {
    /// Training set sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Truncation radii, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    #[arg(long, value_delimiter = ',', default_value = "256,128,64")]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    final_lr_fraction: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Sgd)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long)]
    synth_config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("code={} {err}", err.code());
    ExitCode::from(err.exit_code())
}

fn run(argv: Vec<OsString>) -> CliResult<()> {
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    // Only fails if a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    let seed = cli.seed;
    match cli.command {
        Command::Synth(a) => commands::synth(a, seed),
        Command::Featurize(a) => commands::featurize(a),
        Command::Train(a) => commands::train(a, seed),
        Command::Predict(a) => commands::predict(a),
        Command::Curve(a) => commands::curve(a),
        Command::Eval(a) => commands::eval(a),
        Command::Grid(a) => commands::grid(a),
        Command::Convergence(a) => commands::convergence(a, seed),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
