use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use dcov_hetero::competitors::run_competitor;
use dcov_hetero::mean_models::{MeanFamily, MeanModelSpec, DEFAULT_BANDWIDTH_C};
use dcov_hetero::report::{
    power_table_csv, power_table_markdown, sweep_csv, write_competitor_bundle, write_test_bundle,
};
use dcov_hetero::simlab::{bandwidth_sweep, monte_carlo, Mode, Model, PowerTable, SimulationScenario, TestKind};
use dcov_hetero::{load_dataset, run_test, Error, Result, TestConfig, VarianceFamily};

/// Distance-covariance test for a parametric conditional-variance model.
#[derive(Parser)]
#[command(name = "dcov-hetero", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Cap on worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Leave out the timestamp header line in text outputs.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Test a variance family on a CSV dataset.
    Test(TestArgs),
    /// Monte Carlo size/power of the tests on a simulation model.
    Simulate(SimulateArgs),
    /// Nonparametric-mode size/power across bandwidth multipliers.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanArg {
    Linear,
    Affine,
    Nw,
}

#[derive(Args)]
struct Calibration {
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 500)]
    b: usize,

    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Master seed for every random stream.
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct TestArgs {
    /// Headed CSV file.
    #[arg(long)]
    input: PathBuf,

    /// Response column.
    #[arg(long)]
    y: String,

    /// Covariate columns, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<String>,

    /// Mean model.
    #[arg(long, value_enum, default_value = "linear")]
    mean: MeanArg,

    /// Variance family: abs-linear, quad, sin-abs, constant, power-of-mean.
    #[arg(long)]
    variance: String,

    /// Starting variance parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta_init: Option<Vec<f64>>,

    /// Bandwidth multiplier c in h = c n^(-1/(p+4)).
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH_C)]
    c: f64,

    /// dcov, cvm, wz or all (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "dcov")]
    test: Vec<String>,

    #[command(flatten)]
    calibration: Calibration,

    /// Output directory.
    #[arg(long, default_value = "dcov-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// H11, H12, H21 or H22.
    #[arg(long)]
    model: Model,

    /// nonlinear or nonparametric.
    #[arg(long, default_value = "nonlinear")]
    mode: Mode,

    #[arg(long, default_value_t = 2)]
    p: usize,

    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50,100")]
    n: Vec<usize>,

    /// Alternative amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    a: Vec<f64>,

    /// Monte Carlo replications.
    #[arg(long, default_value_t = 300)]
    reps: usize,

    /// Bandwidth multiplier for nonparametric mode and the competitors.
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH_C)]
    c: f64,

    /// dcov, cvm, wz or all (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "dcov")]
    test: Vec<String>,

    #[command(flatten)]
    calibration: Calibration,

    #[arg(long, default_value = "dcov-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: Model,

    #[arg(long, default_value_t = 2)]
    p: usize,

    #[arg(long, default_value_t = 50)]
    n: usize,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,

    #[arg(long, default_value_t = 300)]
    reps: usize,

    /// Bandwidth multipliers, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0.6,0.8,1.0,1.2,1.4"
    )]
    grid: Vec<f64>,

    #[command(flatten)]
    calibration: Calibration,

    #[arg(long, default_value = "dcov-out")]
    out: PathBuf,
}

fn parse_tests(names: &[String]) -> Result<Vec<TestKind>> {
    let mut tests = Vec::new();
    for name in names {
        let expanded: Vec<TestKind> = if name == "all" {
            TestKind::ALL.to_vec()
        } else {
            vec![name.parse()?]
        };
        for t in expanded {
            if !tests.contains(&t) {
                tests.push(t);
            }
        }
    }
    Ok(tests)
}

fn header(suppress: bool) -> Option<String> {
    if suppress {
        return None;
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Some(format!("generated at unix time {secs}"))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)?;
    Ok(())
}

fn cmd_test(args: TestArgs, header: Option<String>) -> Result<()> {
    let mean_spec = match args.mean {
        MeanArg::Linear => MeanModelSpec::parametric(MeanFamily::Linear),
        MeanArg::Affine => MeanModelSpec::parametric(MeanFamily::Affine),
        MeanArg::Nw => MeanModelSpec::nonparametric(args.c),
    };
    let mut cfg = TestConfig::new(
        mean_spec,
        VarianceFamily::from_id(&args.variance)?,
        args.calibration.seed,
    )
    .with_bootstrap(args.calibration.b)
    .with_alpha(args.calibration.alpha);
    cfg.bandwidth_c = args.c;
    cfg.theta_init = args.theta_init;
    cfg.validate()?;
    let tests = parse_tests(&args.test)?;

    let xs: Vec<&str> = args.x.iter().map(String::as_str).collect();
    let ds = load_dataset(&args.input, &args.y, &xs)?;
    let header = header.as_deref();
    for test in tests {
        match test {
            TestKind::Dcov => {
                let report = run_test(&ds, &cfg)?;
                write_test_bundle(&args.out, &ds, &report, header)?;
                println!(
                    "dcov: statistic={} p_value={} reject={}",
                    report.statistic, report.p_value, report.reject
                );
            }
            TestKind::Competitor(c) => {
                let report = run_competitor(&ds, &cfg, c)?;
                write_competitor_bundle(&args.out, &report, header)?;
                println!(
                    "{c}: statistic={} p_value={} reject={}",
                    report.statistic, report.p_value, report.reject
                );
            }
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, header: Option<String>) -> Result<()> {
    let tests = parse_tests(&args.test)?;
    let mut scenarios = Vec::new();
    for &n in &args.n {
        for &a in &args.a {
            let mut scn = SimulationScenario::new(args.model, n, args.p, a, args.calibration.seed);
            scn.mode = args.mode;
            scn.reps = args.reps;
            scn.bootstrap_b = args.calibration.b;
            scn.alpha = args.calibration.alpha;
            scn.bandwidth_c = args.c;
            scn.tests = tests.clone();
            scn.validate()?;
            scenarios.push(scn);
        }
    }
    let mut table = PowerTable::default();
    for scn in &scenarios {
        table.extend(monte_carlo(scn)?);
    }
    let csv = power_table_csv(&table);
    let mut md = power_table_markdown(&table);
    if let Some(h) = header {
        md = format!("<!-- {h} -->\n{md}");
    }
    write(&args.out, "power.csv", &csv)?;
    write(&args.out, "power.md", &md)?;
    print!("{csv}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs, header: Option<String>) -> Result<()> {
    if let Some(c) = args.grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::Config(format!("--grid values must be positive, got {c}")));
    }
    let mut base = SimulationScenario::new(args.model, args.n, args.p, args.a, args.calibration.seed);
    base.mode = Mode::Nonparametric;
    base.reps = args.reps;
    base.bootstrap_b = args.calibration.b;
    base.alpha = args.calibration.alpha;
    base.validate()?;
    let points = bandwidth_sweep(&base, &args.grid)?;
    let csv = sweep_csv(&points);
    write(&args.out, "sweep.csv", &csv)?;
    let mut info = format!(
        "model={}\np={}\nn={}\na={}\nreps={}\nB={}\nalpha={}\nseed={}\n",
        args.model,
        args.p,
        args.n,
        args.a,
        args.reps,
        args.calibration.b,
        args.calibration.alpha,
        args.calibration.seed
    );
    if let Some(h) = header {
        info = format!("# {h}\n{info}");
    }
    write(&args.out, "sweep.txt", &info)?;
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let header = header(cli.no_timestamp);
    let result = match cli.command {
        Command::Test(a) => cmd_test(a, header),
        Command::Simulate(a) => cmd_simulate(a, header),
        Command::Sweep(a) => cmd_sweep(a, header),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
