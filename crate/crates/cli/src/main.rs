use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use privmeasure::bench::{
    audit_regularity, cube_accuracy, interval_accuracy, synth_accuracy, walk_boundedness, BenchReport,
};
use privmeasure::interval::{interval_net_size, private_measure_interval};
use privmeasure::io::{
    ingest, read_measure, write_json, write_measure_csv, write_synthetic_csv, write_table_csv, Format, InputKind,
    SCHEMA_VERSION,
};
use privmeasure::metric::{
    accuracy_bound, choose_delta, cube_net, private_measure_metric, private_measure_on_net, Diagnostics, SpaceKind,
};
use privmeasure::synth::dp_synthetic_data;
use privmeasure::{Domain, MechanismConfig, Metric, RandomStream};

const EXIT_VALIDATION: u8 = 2;
const EXIT_AUDIT: u8 = 3;

#[derive(Parser)]
#[command(name = "privmeasure", version, about = "Private measures and synthetic data on metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Differentially private synthetic copy of a dataset.
    Synth(SynthArgs),
    /// Metric-private release of a weighted point set.
    Privatize(PrivatizeArgs),
    /// Accuracy sweep over a dyadic grid of privacy levels or dataset sizes.
    BenchAccuracy(BenchAccuracyArgs),
    /// Running maximum of the superregular walk against an i.i.d. baseline.
    BenchWalk(BenchWalkArgs),
    /// Random-pair check of the potential-gap bound.
    AuditRegularity(AuditArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Interval,
    Cube,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Chebyshev,
    Euclidean,
    Manhattan,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Chebyshev => Metric::Chebyshev,
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Manhattan => Metric::Manhattan,
        }
    }
}

#[derive(Args)]
struct SpaceArgs {
    /// Input file; `.json` is read as JSON, anything else as CSV.
    #[arg(long, short)]
    input: PathBuf,
    /// Output CSV.
    #[arg(long, short)]
    output: PathBuf,
    /// Provenance JSON (defaults to the output path with a `.json` extension).
    #[arg(long)]
    provenance: Option<PathBuf>,
    /// Net construction; defaults to interval for one coordinate, cube otherwise.
    #[arg(long, value_enum)]
    domain: Option<DomainArg>,
    /// Expected number of coordinates per row.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum, default_value = "chebyshev")]
    metric: MetricArg,
    /// Net resolution; chosen from the privacy level when omitted.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Rows of the input are a distance matrix instead of coordinates.
    #[arg(long)]
    distance_matrix: bool,
}

#[derive(Args)]
struct PrivatizeArgs {
    /// Rows are `x_1, ..., x_d, weight`.
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct BenchAccuracyArgs {
    /// 1 sweeps the interval mechanism, larger values the cube mechanism.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Sweep the dataset size of the synthetic-data pipeline instead of alpha.
    #[arg(long)]
    synth: bool,
    /// Privacy of the synthetic-data sweep.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Inclusive range of base-2 exponents, e.g. `4:10`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid cells per side of the ground space for cube and synth sweeps.
    #[arg(long, default_value_t = 16)]
    ground: usize,
    /// Atoms of the random input measures of the interval sweep.
    #[arg(long, default_value_t = 32)]
    atoms: usize,
    /// Report rows as CSV.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Full report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchWalkArgs {
    /// Inclusive range of walk depths, e.g. `6:14`.
    #[arg(long, default_value = "6:14")]
    grid: String,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Inclusive range of walk depths.
    #[arg(long, default_value = "1:12")]
    grid: String,
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    slack: f64,
    /// Multiplies every computed gap; a value above 1 simulates a broken potential.
    #[arg(long, default_value_t = 1.0, hide = true)]
    fault_scale: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    privmeasure::Error::Argument(msg.into()).into()
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<u32>> {
    let bounds = text
        .split_once(':')
        .and_then(|(lo, hi)| Some((lo.trim().parse::<u32>().ok()?, hi.trim().parse::<u32>().ok()?)));
    match bounds {
        Some((lo, hi)) if lo <= hi && hi <= 24 => Ok((lo..=hi).collect()),
        _ => Err(invalid(format!("grid must be LO:HI with LO <= HI <= 24, got {text:?}"))),
    }
}

fn provenance_path(space: &SpaceArgs) -> PathBuf {
    space.provenance.clone().unwrap_or_else(|| space.output.with_extension("json"))
}

fn resolve_domain(arg: Option<DomainArg>, dim: usize) -> Domain {
    match arg {
        Some(DomainArg::Interval) => Domain::Interval,
        Some(DomainArg::Cube) => Domain::Cube { dim },
        Some(DomainArg::Generic) => Domain::Generic,
        None if dim == 1 => Domain::Interval,
        None => Domain::Cube { dim },
    }
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let s = &args.space;
    let format = Format::from_path(&s.input);
    let kind = if args.distance_matrix {
        InputKind::DistanceMatrix
    } else {
        InputKind::Coordinates
    };
    let data = ingest(&s.input, format, kind, s.dim, s.metric.into())?;
    let domain = match data.space.dim() {
        Some(dim) => resolve_domain(s.domain, dim),
        None => Domain::Generic,
    };
    let config = MechanismConfig {
        domain,
        alpha: None,
        epsilon: Some(args.epsilon),
        delta: s.delta,
        seed: s.seed,
        trials: 1,
    };
    config.validate()?;
    let mut rng = RandomStream::new(s.seed);
    let out = dp_synthetic_data(&data, domain, args.epsilon, s.delta, &mut rng)?;
    write_synthetic_csv(&s.output, &out)?;
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "synth",
        "seed": s.seed,
        "domain": domain,
        "input": s.input,
        "output": s.output,
        "provenance": out.provenance,
    });
    write_json(&provenance_path(s), &record)?;
    let p = out.provenance.as_ref().expect("pipeline records provenance");
    println!(
        "wrote {} synthetic points (alpha {}, delta {:.6}, net size {}, tour length {:.6})",
        p.m, p.alpha, p.delta, p.net_size, p.tour_length
    );
    Ok(())
}

fn privatize(args: PrivatizeArgs) -> anyhow::Result<()> {
    let s = &args.space;
    let mu = read_measure(&s.input, Format::from_path(&s.input), s.metric.into())?;
    let dim = mu.space().dim().expect("measures are read with coordinates");
    if let Some(d) = s.dim {
        if d != dim {
            return Err(privmeasure::Error::Input {
                row: Some(1),
                message: format!("expected {d} coordinates, found {dim}"),
            }
            .into());
        }
    }
    let domain = resolve_domain(s.domain, dim);
    let config = MechanismConfig {
        domain,
        alpha: Some(args.alpha),
        epsilon: None,
        delta: s.delta,
        seed: s.seed,
        trials: 1,
    };
    config.validate()?;
    let alpha = args.alpha;
    let mut rng = RandomStream::new(s.seed);
    let (output, diagnostics) = match (domain, s.delta) {
        (Domain::Interval, None) => {
            if dim != 1 {
                return Err(invalid("the interval domain needs one coordinate"));
            }
            let r = private_measure_interval(&mu, alpha, &mut rng)?;
            let n = interval_net_size(alpha);
            let tour = (n - 1) as f64 / n as f64;
            let radius = r.net.radius();
            let diagnostics = Diagnostics {
                alpha,
                delta: radius,
                net_size: n,
                mst_length: tour,
                tour_length: tour,
                accuracy_bound: accuracy_bound(alpha, radius, n, tour),
            };
            (r.output, diagnostics)
        }
        (Domain::Interval | Domain::Cube { .. }, delta) => {
            let kind = if dim == 1 { SpaceKind::Interval } else { SpaceKind::Cube { dim } };
            let delta = match delta {
                Some(d) => d,
                None => choose_delta(kind, alpha)?,
            };
            let net = cube_net(mu.space(), delta)?;
            let mu = mu.rebase(Arc::clone(net.space()))?;
            let r = private_measure_on_net(&mu, alpha, &net, &mut rng)?;
            (r.output, r.diagnostics)
        }
        (Domain::Generic, delta) => {
            let delta = match delta {
                Some(d) => d,
                None => choose_delta(SpaceKind::Generic(mu.space()), alpha)?,
            };
            let r = private_measure_metric(&mu, alpha, delta, &mut rng)?;
            (r.output, r.diagnostics)
        }
    };
    let output = output.compact();
    write_measure_csv(&s.output, &output)?;
    let record = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "privatize",
        "seed": s.seed,
        "domain": domain,
        "input": s.input,
        "output": s.output,
        "atoms": output.len(),
        "diagnostics": diagnostics,
    });
    write_json(&provenance_path(s), &record)?;
    println!(
        "wrote {} atoms (alpha {}, delta {:.6}, net size {}, tour length {:.6})",
        output.len(),
        alpha,
        diagnostics.delta,
        diagnostics.net_size,
        diagnostics.tour_length
    );
    Ok(())
}

fn print_accuracy(report: &BenchReport, param: &str) {
    println!(
        "{} sweep, dim {}, {} trials, seed {}",
        report.experiment, report.dim, report.trials, report.seed
    );
    println!("{param:>10} {:>12} {:>12} {:>12} {:>12} {:>12}", "mean_w1", "std_err", "bound", "mean/bound", "reference");
    for (row, c) in report.rows.iter().zip(report.fitted_constants()) {
        println!(
            "{:>10} {:>12.6} {:>12.6} {:>12.6} {:>12.4} {:>12.6}",
            row.param, row.mean, row.std_err, row.bound, c, row.reference
        );
    }
    println!("log-log slope: {:.4}", report.slope);
    println!("means above reference curve: {}", report.above_reference());
}

fn bench_accuracy(args: BenchAccuracyArgs) -> anyhow::Result<()> {
    if args.dim == 0 {
        return Err(invalid("dim must be at least 1"));
    }
    let (default_grid, default_trials) = match (args.synth, args.dim) {
        (true, _) => ("8:14", 50),
        (false, 1) => ("4:10", 200),
        (false, _) => ("6:12", 100),
    };
    let grid = parse_grid(args.grid.as_deref().unwrap_or(default_grid))?;
    let trials = args.trials.unwrap_or(default_trials);
    let points: Vec<f64> = grid.iter().map(|&e| 2f64.powi(e as i32)).collect();
    if points.len() < 2 {
        return Err(invalid("a slope needs at least two grid points"));
    }
    let (report, param) = if args.synth {
        let ns: Vec<usize> = grid.iter().map(|&e| 1usize << e).collect();
        let r = synth_accuracy(args.dim, &ns, args.epsilon, trials, args.seed, args.ground)?;
        (r, "n")
    } else if args.dim == 1 {
        (interval_accuracy(&points, trials, args.seed, args.atoms)?, "alpha")
    } else {
        (cube_accuracy(args.dim, &points, trials, args.seed, args.ground)?, "alpha")
    };
    print_accuracy(&report, param);
    if let Some(path) = &args.output {
        write_table_csv(path, &report.rows)?;
    }
    if let Some(path) = &args.report {
        write_json(path, &json!({ "schema_version": SCHEMA_VERSION, "report": report }))?;
    }
    Ok(())
}

fn bench_walk(args: BenchWalkArgs) -> anyhow::Result<()> {
    let depths = parse_grid(&args.grid)?;
    let rows = walk_boundedness(&depths, args.trials, args.seed)?;
    println!("walk boundedness, {} trials, seed {}", args.trials, args.seed);
    println!(
        "{:>8} {:>12} {:>10} {:>12} {:>12} {:>10} {:>12} {:>10}",
        "n", "max_sum", "std_err", "/log^2 n", "iid_max", "std_err", "iid/sqrt n", "floor"
    );
    for r in &rows {
        println!(
            "{:>8} {:>12.4} {:>10.4} {:>12.4} {:>12.4} {:>10.4} {:>12.4} {:>10.4}",
            r.n, r.mean_max, r.std_err, r.per_log2, r.iid_mean_max, r.iid_std_err, r.iid_per_sqrt, r.floor
        );
    }
    if let Some(path) = &args.output {
        write_table_csv(path, &rows)?;
    }
    if let Some(path) = &args.report {
        write_json(
            path,
            &json!({ "schema_version": SCHEMA_VERSION, "seed": args.seed, "trials": args.trials, "rows": rows }),
        )?;
    }
    Ok(())
}

fn audit(args: AuditArgs) -> anyhow::Result<bool> {
    let depths = parse_grid(&args.grid)?;
    let report = audit_regularity(&depths, args.pairs, args.seed, args.slack, args.fault_scale)?;
    if let Some(path) = &args.report {
        write_json(path, &json!({ "schema_version": SCHEMA_VERSION, "report": report }))?;
    }
    if report.passed() {
        println!(
            "PASS: {} pairs over depths {}, max excess {:.3e}",
            report.checked, args.grid, report.max_excess
        );
        return Ok(true);
    }
    println!("FAIL: potential gap exceeds the l1 distance (max excess {:.3e})", report.max_excess);
    if let Some(w) = &report.witness {
        println!("{}", serde_json::to_string(w)?);
    }
    Ok(false)
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<privmeasure::Error>() {
        Some(privmeasure::Error::Argument(_) | privmeasure::Error::Input { .. }) => EXIT_VALIDATION,
        Some(_) => 1,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a).map(|_| true),
        Command::Privatize(a) => privatize(a).map(|_| true),
        Command::BenchAccuracy(a) => bench_accuracy(a).map(|_| true),
        Command::BenchWalk(a) => bench_walk(a).map(|_| true),
        Command::AuditRegularity(a) => audit(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_AUDIT),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
