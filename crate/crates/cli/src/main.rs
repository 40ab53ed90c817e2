use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand};
use sigprop::calibration::{BoundingSpec, GridMode, DEFAULT_ALPHA, DEFAULT_REPS};
use sigprop::csvio::{read_matrix, read_vector};
use sigprop::dependence::{load_correlation, save_correlation};
use sigprop::harness::{
    coverage, emit_coverage, emit_results, emit_variance, reproduce, run_table_experiment,
    run_variance_check, ExperimentConfig, Scale, StructureSource, Target,
};
use sigprop::{
    bounding_sequences, estimate_report, inverse_normal_transform, load_null_replicates, mac,
    marginal_z_scores, permutation_null_replicates, simulate_null_replicates_parametric,
    BaselineOptions, BoundingSequence, CorrelationMatrix, Error, Matrix, NullDistribution,
    NullReplicates, StructureSpec, ZScores,
};

#[derive(Parser)]
#[command(
    name = "sigprop",
    version,
    about = "Estimate the proportion of signals among correlated test statistics"
)]
struct Cli {
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the mean absolute correlation of a structure.
    Mac(MacArgs),
    /// Write a generated correlation matrix as CSV.
    Structure(StructureArgs),
    /// Calibrate bounding sequences from a null source.
    Calibrate(CalibrateArgs),
    /// Estimate the signal proportion of a vector of statistics.
    Estimate(EstimateArgs),
    /// Regenerate the data behind a table or figure.
    Reproduce(ReproduceArgs),
    /// Run an experiment described by a JSON or TOML file.
    Run(RunArgs),
    /// Monte-Carlo variance of the null exceedance proportion.
    Variance(VarianceArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["sigma", "structure"])))]
struct MacArgs {
    /// Correlation matrix CSV.
    #[arg(long, value_name = "PATH")]
    sigma: Option<PathBuf>,
    /// Generated structure, e.g. ar:p=2000,r=0.9.
    #[arg(long, value_name = "SPEC")]
    structure: Option<StructureSpec>,
}

#[derive(Args)]
struct StructureArgs {
    #[arg(long, value_name = "SPEC")]
    structure: StructureSpec,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

/// Where null replicates come from.
#[derive(Args)]
struct NullArgs {
    /// Correlation matrix CSV for parametric replicates.
    #[arg(long, value_name = "PATH")]
    sigma: Option<PathBuf>,
    /// Generated structure for parametric replicates.
    #[arg(long, value_name = "SPEC")]
    structure: Option<StructureSpec>,
    /// CSV of precomputed replicates, one per row.
    #[arg(long, value_name = "PATH")]
    null_reps: Option<PathBuf>,
    /// Design matrix CSV (rows are samples); replicates by permuting the response.
    #[arg(long, value_name = "PATH", requires = "response")]
    data: Option<PathBuf>,
    /// Response vector, one value per line.
    #[arg(long, value_name = "PATH", requires = "data")]
    response: Option<PathBuf>,
    /// Number of simulated or permuted replicates.
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = GridMode::Observed)]
    grid: GridMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
#[command(group(ArgGroup::new("null").required(true).args(["sigma", "structure", "null_reps", "data"])))]
struct CalibrateArgs {
    #[command(flatten)]
    null: NullArgs,
    /// Exponents of the bounding function.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
    theta: Vec<f64>,
    /// Output directory (one JSON per θ); prints a JSON array when omitted.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["z", "data"])))]
struct EstimateArgs {
    /// Statistics, one per line.
    #[arg(long, value_name = "PATH")]
    z: Option<PathBuf>,
    /// Null law of the statistics in --z: identity, normal:mu=..,sigma=.. or t:df=..
    #[arg(long, value_name = "SPEC", default_value = "identity")]
    f0: NullDistribution,
    /// Calibrated c_{p,1/2} JSON.
    #[arg(long, value_name = "PATH", requires = "c_one")]
    c_half: Option<PathBuf>,
    /// Calibrated c_{p,1} JSON.
    #[arg(long, value_name = "PATH", requires = "c_half")]
    c_one: Option<PathBuf>,
    #[command(flatten)]
    null: NullArgs,
    #[arg(long, default_value_t = sigprop::baselines::DEFAULT_GW_ALPHA)]
    gw_alpha: f64,
    #[arg(long, default_value_t = sigprop::baselines::DEFAULT_JC_GAMMA)]
    jc_gamma: f64,
    /// Report path; printed when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).args(["table", "figure"])))]
struct ReproduceArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    table: Option<u8>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=7))]
    figure: Option<u8>,
    #[arg(long, default_value = "desk")]
    scale: Scale,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correlation matrix CSV, required by figures 6 and 7.
    #[arg(long, value_name = "PATH")]
    sigma: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Also write coverage.csv (fraction of replicates with estimate >= π).
    #[arg(long)]
    coverage: bool,
}

#[derive(Args)]
struct VarianceArgs {
    /// Structures (generated specs or file:PATH).
    #[arg(long = "structure", value_name = "SPEC", required = true)]
    structures: Vec<StructureSource>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
    t: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// Invalid combination of otherwise well-formed arguments.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// `x` with six significant digits.
fn six_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.5}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
            }
            fs::write(path, format!("{text}\n")).with_context(|| path.display().to_string())?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load_sigma(path: &Path) -> sigprop::Result<CorrelationMatrix<f64>> {
    load_correlation(path)
}

fn load_design(path: &Path) -> sigprop::Result<Matrix<f64>> {
    Matrix::from_rows(&read_matrix(path)?)
}

fn load_response(path: &Path) -> sigprop::Result<Vec<f64>> {
    read_vector(path)
}

impl NullArgs {
    fn parametric_sources(&self) -> usize {
        [
            self.sigma.is_some(),
            self.structure.is_some(),
            self.null_reps.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count()
    }

    fn replicates(&self) -> anyhow::Result<NullReplicates> {
        let reps = if let Some(path) = &self.sigma {
            simulate_null_replicates_parametric(&load_sigma(path)?, self.reps, self.seed)?
        } else if let Some(spec) = &self.structure {
            simulate_null_replicates_parametric(&spec.build::<f64>()?, self.reps, self.seed)?
        } else if let Some(path) = &self.null_reps {
            load_null_replicates(path)?
        } else if let (Some(x), Some(y)) = (&self.data, &self.response) {
            permutation_null_replicates(&load_design(x)?, &load_response(y)?, self.reps, self.seed)?
        } else {
            return Err(usage(
                "a null source is required: --sigma, --structure, --null-reps or --data/--response",
            ));
        };
        Ok(reps)
    }

    fn sequences(&self, thetas: &[f64]) -> anyhow::Result<Vec<BoundingSequence>> {
        let specs = thetas
            .iter()
            .map(|&t| BoundingSpec::new(t, self.alpha, self.grid))
            .collect::<sigprop::Result<Vec<_>>>()?;
        Ok(bounding_sequences(&self.replicates()?, &specs)?)
    }
}

fn cmd_mac(args: MacArgs) -> anyhow::Result<()> {
    let sigma = match (&args.sigma, &args.structure) {
        (Some(path), _) => load_sigma(path)?,
        (None, Some(spec)) => spec.build::<f64>()?,
        (None, None) => unreachable!("clap requires a source"),
    };
    println!("{}", six_significant(mac(&sigma).value()));
    Ok(())
}

fn cmd_structure(args: StructureArgs) -> anyhow::Result<()> {
    save_correlation(&args.out, &args.structure.build::<f64>()?)?;
    Ok(())
}

fn theta_file_name(theta: f64) -> String {
    if theta == 0.5 {
        "c_half.json".into()
    } else if theta == 1.0 {
        "c_one.json".into()
    } else {
        format!("c_theta_{theta}.json")
    }
}

fn cmd_calibrate(args: CalibrateArgs) -> anyhow::Result<()> {
    let cs = args.null.sequences(&args.theta)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
            for c in &cs {
                let path = dir.join(theta_file_name(c.theta));
                write_or_print(Some(&path), &serde_json::to_string_pretty(c)?)?;
                println!("{}", path.display());
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&cs)?),
    }
    Ok(())
}

fn read_sequence(path: &Path) -> anyhow::Result<BoundingSequence> {
    let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    let c: BoundingSequence = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| path.display().to_string())?;
    c.spec().validate()?;
    Ok(c)
}

fn cmd_estimate(args: EstimateArgs) -> anyhow::Result<()> {
    let sources = args.null.parametric_sources();
    if sources > 1 {
        return Err(usage(
            "give at most one of --sigma, --structure and --null-reps",
        ));
    }
    if args.c_half.is_some() && sources > 0 {
        return Err(usage(
            "--c-half/--c-one conflict with inline calibration sources",
        ));
    }
    let z = match (&args.z, &args.null.data) {
        (Some(path), _) => inverse_normal_transform(&read_vector(path)?, args.f0)?,
        (None, Some(x)) => {
            if args.f0 != NullDistribution::Identity {
                return Err(usage("--f0 applies to --z input only"));
            }
            let y = args
                .null
                .response
                .as_ref()
                .ok_or_else(|| usage("--data needs --response"))?;
            ZScores::new(marginal_z_scores(&load_design(x)?, &load_response(y)?)?)?
        }
        (None, None) => unreachable!("clap requires an input"),
    };
    let (half, one) = match (&args.c_half, &args.c_one) {
        (Some(h), Some(o)) => (read_sequence(h)?, read_sequence(o)?),
        _ => {
            let mut cs = args.null.sequences(&[0.5, 1.0])?.into_iter();
            (
                cs.next().expect("two sequences"),
                cs.next().expect("two sequences"),
            )
        }
    };
    if half.theta != 0.5 || one.theta != 1.0 {
        return Err(usage(format!(
            "--c-half and --c-one must have theta 0.5 and 1 (found {} and {})",
            half.theta, one.theta
        )));
    }
    let baselines = BaselineOptions {
        gw_alpha: args.gw_alpha,
        jc_gamma: args.jc_gamma,
    };
    let report = estimate_report(&z, &half, &one, &baselines)?;
    write_or_print(args.out.as_deref(), &report.to_json()?)
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn cmd_reproduce(args: ReproduceArgs) -> anyhow::Result<()> {
    let target = match (args.table, args.figure) {
        (Some(t), _) => Target::table(t)?,
        (None, Some(f)) => Target::figure(f)?,
        (None, None) => unreachable!("clap requires a target"),
    };
    if target.needs_sigma() && args.sigma.is_none() {
        return Err(usage(format!("{target} needs --sigma")));
    }
    let paths = reproduce(
        target,
        args.scale,
        args.seed,
        args.sigma.as_deref(),
        &args.out,
    )?;
    print_paths(&paths);
    Ok(())
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let res = run_table_experiment(&cfg)?;
    let mut paths = emit_results(&res, &args.out)?;
    if args.coverage {
        paths.push(emit_coverage(&coverage(&res), &args.out)?);
    }
    print_paths(&paths);
    Ok(())
}

fn cmd_variance(args: VarianceArgs) -> anyhow::Result<()> {
    let rows = run_variance_check(&args.structures, &args.t, args.reps, args.seed)?;
    print_paths(&[emit_variance(&rows, &args.out)?]);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Spec { .. } | Error::Config(_)) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Mac(a) => cmd_mac(a),
        Command::Structure(a) => cmd_structure(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Reproduce(a) => cmd_reproduce(a),
        Command::Run(a) => cmd_run(a),
        Command::Variance(a) => cmd_variance(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
