//! `cmlab`: run concentration experiments, audit gaps and evaluate bounds.

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmlab_core::cmbounds::{
    asep_lis_curve, asep_midpoint_curve, generic_tail_bound, kac_esd_curve, mgf_product_constant,
    thermostat_esd_curve, GapProvenance, GapValue, Sidedness, TailBoundCurve, TripleNormBound,
};
use cmlab_core::harness::{
    render_csv, run_experiment, simulate, ExperimentKind, ExperimentSpec, RunOptions,
};
use cmlab_core::{asep, kacwalk, stats, thermo, Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cmlab",
    version,
    about = "Concentration-of-measure laboratory for Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write its CSV and JSON reports.
    Run(RunArgs),
    /// Exact spectral gap of the ASEP with m particles on n sites.
    GapAudit {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        /// Particle count (default n/2).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Evaluate a tail-bound curve on a grid of deviations.
    Bounds(BoundsArgs),
    /// Fast internal consistency checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment spec.
    spec: PathBuf,
    /// Overrides masterSeed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides outputPath; the JSON summary goes next to it.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    pilot_replicas: Option<usize>,
    #[arg(long)]
    burn_in: Option<u64>,
    /// Comma-separated deviations, e.g. `0,0.1,0.2`.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    KacEsd,
    ThermoEsd,
    AsepMidpoint,
    AsepLis,
    Generic,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    kind: BoundKind,
    /// Comma-separated deviations.
    #[arg(long = "r", value_delimiter = ',', required = true)]
    r: Vec<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Spectral gap for the generic bound.
    #[arg(long)]
    gap: Option<f64>,
    /// Triple-norm bound for the generic bound.
    #[arg(long)]
    delta: Option<f64>,
    /// Generic bound with the two-sided prefactor.
    #[arg(long)]
    two_sided: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::GapAudit { n, q, m } => cmd_gap_audit(n, q, m),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Selftest => cmd_selftest(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let mut spec = ExperimentSpec::from_path(&args.spec)?;
    macro_rules! set {
        ($($field:ident),*) => { $( if args.$field.is_some() { spec.$field = args.$field; } )* };
    }
    set!(
        n,
        k,
        q,
        c,
        alpha,
        beta,
        mu,
        replicas,
        pilot_replicas,
        burn_in,
        r_grid
    );
    if args.seed.is_some() {
        spec.master_seed = args.seed;
    }
    let options = RunOptions {
        workers: args.workers,
        output_path: args.output,
    };
    let report = run_experiment(&spec, &options)?;
    println!("csv: {}", report.csv_path.display());
    println!("summary: {}", report.json_path.display());
    for v in &report.summary.violations {
        println!("VIOLATION {v}");
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(report.passed())
}

fn cmd_gap_audit(n: usize, q: f64, m: Option<usize>) -> Result<bool> {
    let spec = ExperimentSpec {
        n: Some(n),
        q: Some(q),
        particles: m,
        ..ExperimentSpec::new(ExperimentKind::AsepGap)
    };
    let outcome = simulate(&spec.resolve()?, &RunOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&outcome.details)?);
    for v in &outcome.violations {
        println!("VIOLATION {v}");
    }
    Ok(outcome.passed())
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(vec![format!("--{flag}: required for this bound")]))
}

fn cmd_bounds(args: BoundsArgs) -> Result<bool> {
    let curve: TailBoundCurve = match args.kind {
        BoundKind::KacEsd => kac_esd_curve(need(args.k, "k")?)?,
        BoundKind::ThermoEsd => thermostat_esd_curve(need(args.k, "k")?, need(args.mu, "mu")?)?,
        BoundKind::AsepMidpoint => asep_midpoint_curve(
            need(args.n, "n")?,
            args.c.unwrap_or(1.0),
            args.alpha.unwrap_or(0.5),
        )?,
        BoundKind::AsepLis => asep_lis_curve(
            need(args.n, "n")?,
            args.c.unwrap_or(1.0),
            args.alpha.unwrap_or(0.5),
        )?,
        BoundKind::Generic => {
            let gap = GapValue::new(need(args.gap, "gap")?, GapProvenance::Formula)?;
            let delta = TripleNormBound::analytic(need(args.delta, "delta")?)?;
            let side = if args.two_sided {
                Sidedness::TwoSided
            } else {
                Sidedness::OneSided
            };
            generic_tail_bound(&gap, &delta, side)?
        }
    };
    if let Some(bad) = args.r.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::Config(vec![format!(
            "--r: deviations must be >= 0, got {bad}"
        )]));
    }
    println!("r,bound,clamped");
    for r in args.r {
        println!("{r},{},{}", curve.evaluate(r), curve.evaluate_clamped(r));
    }
    Ok(true)
}

fn cmd_selftest() -> Result<bool> {
    let mut all = true;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        all &= ok;
    };
    check(
        "kac gap n=4 is 1/4",
        kacwalk::kac_gap_formula(4)?.lambda1 == 0.25,
    );
    check(
        "thermostat gap n=10 mu=1 is 1/20",
        thermo::thermostat_gap_formula(10, 1.0)?.lambda1 == 0.05,
    );
    check(
        "asep gap n=2 formula is 1",
        (asep::asep_gap_formula(2, 0.4)?.lambda1 - 1.0).abs() < 1e-12,
    );
    let mgf = mgf_product_constant(30)?;
    check(
        "MGF product constant below 3",
        mgf.value < 3.0 && mgf.remainder_bound < 1e-9,
    );
    let exact = asep::exact_gap(2, 1, 0.3)?;
    check(
        "exact two-site ASEP gap is 1",
        (exact.gap.lambda1 - 1.0).abs() < 1e-12,
    );
    let (lo, hi) = stats::wilson_interval(10, 100, stats::Z95);
    check(
        "Wilson interval reference",
        (lo - 0.05522).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4,
    );

    let spec = ExperimentSpec {
        n: Some(12),
        k: Some(6),
        replicas: Some(64),
        pilot_replicas: Some(100),
        master_seed: Some(7),
        ..ExperimentSpec::new(ExperimentKind::KacEsd)
    }
    .resolve()?;
    let one = render_csv(&simulate(
        &spec,
        &RunOptions {
            workers: Some(1),
            output_path: None,
        },
    )?)?;
    let two = render_csv(&simulate(
        &spec,
        &RunOptions {
            workers: Some(3),
            output_path: None,
        },
    )?)?;
    check("CSV independent of worker count", one == two);
    Ok(all)
}
