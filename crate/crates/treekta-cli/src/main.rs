//! `treekta`: simulate benchmark datasets, run replicated kernel experiments,
//! and compute alignment spectra from exported kernels.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treekta::alignment::alignment_spectrum;
use treekta::dataio::save_csv;
use treekta::error::Error;
use treekta::harness::{emit_outputs, replot, run_experiment, ExperimentConfig};
use treekta::kernel::KernelMatrix;
use treekta::landmark::{landmark_alignment, select_landmarks, LandmarkDesign};
use treekta::linalg::sym_eig_auto;
use treekta::rng::{ChaCha8Rng, SeedableRng};
use treekta::seed::derive_seed;
use treekta::simgen::{generate, ScenarioFamily, ScenarioSpec};

#[derive(Parser)]
#[command(name = "treekta", version, about = "Tree-ensemble kernels and kernel-target alignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a simulation benchmark dataset and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a replicated experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Alignment spectrum of an exported kernel matrix.
    Align(AlignArgs),
    /// Landmark alignment spectra at one or more prototype counts.
    Landmark(LandmarkArgs),
    /// Re-render the SVG plots of a report directory from its CSV files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// friedman | checkerboard | van_der_laan | meier1 | meier2
    #[arg(long)]
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the family's default noise standard deviation.
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file mirroring the experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Reduced scale: 20 replicates, 200 forest trees.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// Headerless square CSV of kernel values.
    #[arg(long)]
    kernel: PathBuf,
    /// Target values, one per line.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 30)]
    components: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LandmarkArgs {
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Comma-separated prototype counts, e.g. 100,200,300.
    #[arg(long)]
    nproto: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    components: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Report directory containing report.csv and spectra.csv.
    #[arg(long)]
    report: PathBuf,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => 1,
        CliError::Lib(err) => match err {
            Error::NotSymmetric
            | Error::NotPositiveDefinite
            | Error::KernelUnusable
            | Error::DegenerateDesign => 3,
            _ => 2,
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through the same path
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {}", msg),
                CliError::Lib(err) => eprintln!("error: {}", err),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Experiment(args) => experiment(args),
        Command::Align(args) => align(args),
        Command::Landmark(args) => landmark(args),
        Command::Plot(args) => {
            let written = replot(&args.report)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let family = ScenarioFamily::parse(&args.family)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut spec = ScenarioSpec::new(family, args.n, args.p, args.seed);
    if let Some(sd) = args.noise_sd {
        spec = spec.with_noise_sd(sd);
    }
    let data = generate(&spec)?;
    save_csv(&data, &args.out)?;
    println!(
        "wrote {} ({} rows, {} features + target)",
        args.out.display(),
        data.n(),
        data.p()
    );
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let mut config = ExperimentConfig::from_json_file(&args.config)?;
    match args.preset.as_deref() {
        None => {}
        Some("desk") => config = config.desk_preset(),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown preset '{}' (expected: desk)",
                other
            )))
        }
    }
    if let Some(out) = args.out {
        config.output_dir = out;
    }
    let report = run_experiment(&config)?;
    let dir = config.output_dir.clone();
    emit_outputs(&report, &dir)?;
    println!("report written to {}", dir.display());
    for agg in &report.aggregates {
        let align = agg
            .align_top5
            .map(|s| format!("  align_top5 {:.3} ({:.3})", s.mean, s.sd))
            .unwrap_or_default();
        println!(
            "  {:<11} cc {:.3} ({:.3})  mse {:.4} ({:.4}){}",
            agg.model.name(),
            agg.test_cc.mean,
            agg.test_cc.sd,
            agg.test_mse.mean,
            agg.test_mse.sd,
            align
        );
    }
    Ok(())
}

fn read_target(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Lib(Error::CsvParse {
                row: i + 1,
                col: 1,
                message: format!("cannot parse '{}' as a number", line),
            })
        })?;
        out.push(v);
    }
    Ok(out)
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(Error::from)?;
            println!("wrote {}", p.display());
        }
        None => print!("{}", content),
    }
    Ok(())
}

fn align(args: AlignArgs) -> Result<(), CliError> {
    let kernel = KernelMatrix::read_csv(&args.kernel, 0)?;
    let target = read_target(&args.target)?;
    let eig = sym_eig_auto(kernel.values())?;
    let spectrum = alignment_spectrum(
        &eig.eigenvectors,
        &eig.eigenvalues,
        &target,
        args.components,
    )?;
    write_or_print(args.out.as_deref(), &spectrum.to_csv())
}

fn landmark(args: LandmarkArgs) -> Result<(), CliError> {
    let counts: Vec<usize> = args
        .nproto
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad prototype count '{}'", s)))
        })
        .collect::<Result<_, _>>()?;
    if counts.is_empty() {
        return Err(CliError::Usage("nproto list is empty".into()));
    }
    let kernel = KernelMatrix::read_csv(&args.kernel, 0)?;
    let target = read_target(&args.target)?;
    if target.len() != kernel.n() {
        return Err(CliError::Lib(Error::DimensionMismatch(format!(
            "kernel is {}x{} but target has length {}",
            kernel.n(),
            kernel.n(),
            target.len()
        ))));
    }

    let mut out = String::from("n_landmarks,component,value,alignment\n");
    for &n_l in &counts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, n_l as u64));
        let indices = select_landmarks(kernel.n(), n_l, &mut rng)?;
        let design = LandmarkDesign::from_kernel(&kernel, &indices)?;
        let spectrum = landmark_alignment(&design, &target, args.components.min(n_l))?;
        for c in &spectrum.components {
            out.push_str(&format!(
                "{},{},{},{}\n",
                n_l, c.index, c.value, c.alignment
            ));
        }
    }
    write_or_print(args.out.as_deref(), &out)
}
