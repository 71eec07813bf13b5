//! `tiers`: two-sample equality tests for high-dimensional regressions,
//! plus the simulation harness that reproduces the rejection-rate tables.
//!
//! Subcommands: `test` (run a test on CSV data), `experiment` (rejection
//! study from a TOML config), `naive-demo` (size curve of the naive
//! de-biased test), `oracle-power` (likelihood-ratio benchmark),
//! `fixtures` (dump/replay synthetic datasets). `TIERS_THREADS` bounds
//! the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2};
use serde::Serialize;
use tiers_core::baselines::{lr_oracle_power, naive_size_curve, NaiveDemoConfig};
use tiers_core::datagen::{scenario_from_name, SCENARIO_NAMES};
use tiers_core::harness::{
    read_matrix_csv, read_vector_csv, run_experiment, write_matrix_csv, write_vector_csv,
    ExperimentSpec,
};
use tiers_core::model::TwoSampleData;
use tiers_core::testing::{run_test, TestConfig, Variant};
use tiers_core::{Error, Result};

#[derive(Parser)]
#[command(name = "tiers", version, about = "Two-sample tests of equality of regression coefficients in high-dimensional linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the test on user-supplied CSV data; decision JSON on stdout.
    Test(TestArgs),
    /// Run a rejection-rate experiment described by a TOML config file.
    Experiment(ExperimentArgs),
    /// Size curve of the naive de-biased two-sample test on a dense null.
    NaiveDemo(NaiveDemoArgs),
    /// Power of the oracle likelihood-ratio benchmark.
    OraclePower(OraclePowerArgs),
    /// Dump or replay seeded synthetic datasets.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Tiers,
    TiersPlus,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Tiers => Variant::Tiers,
            VariantArg::TiersPlus => Variant::TiersPlus,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    /// Design matrix of sample A (rows = observations).
    #[arg(long)]
    xa: PathBuf,
    /// Response vector of sample A.
    #[arg(long)]
    ya: PathBuf,
    /// Design matrix of sample B.
    #[arg(long)]
    xb: PathBuf,
    /// Response vector of sample B.
    #[arg(long)]
    yb: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "tiers")]
    variant: VariantArg,
    /// Monte Carlo draws for the critical value.
    #[arg(long, default_value_t = 2000)]
    draws: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tuning override; defaults to the adaptive rule.
    #[arg(long)]
    eta: Option<f64>,
    /// Multiplier on the residual sup-norm rate (tiers-plus).
    #[arg(long, default_value_t = 1.0)]
    mu_scale: f64,
    /// Weight simulation draws by studentized residuals.
    #[arg(long)]
    weighted_qhat: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML file mirroring the experiment spec fields.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json / report.csv / run_meta.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Scale override: desk (n=100, p=150, 200 reps) or paper (n=200,
    /// p=500, 100 reps).
    #[arg(long)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Args)]
struct NaiveDemoArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 300)]
    p: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Comma-separated coefficient magnitudes.
    #[arg(long, default_value = "0,0.002,0.25,0.5,1,2")]
    c_grid: String,
    #[arg(long, default_value_t = 100)]
    outer_reps: usize,
    #[arg(long, default_value_t = 4000)]
    inner_draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV output path for the (c, rejection) pairs.
    #[arg(long, default_value = "figure1.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct OraclePowerArgs {
    /// Comma-separated coefficient deviation vector.
    #[arg(long)]
    gamma: String,
    /// Covariance CSV, or "identity".
    #[arg(long, default_value = "identity")]
    sigma_b: String,
    /// Noise standard deviation of sample B.
    #[arg(long, default_value_t = 1.0)]
    sigma_u: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Generate a dataset and write xa/ya/xb/yb CSVs plus spec and truth.
    Dump(FixturesDumpArgs),
    /// Regenerate from an echoed spec and verify the CSVs byte-for-byte.
    Replay {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct FixturesDumpArgs {
    /// Scenario name: sl, sh, dl, dh, ggm-sb-so, ggm-db-so, ggm-sb-do, ggm-db-do.
    #[arg(long)]
    regime: String,
    /// Variance ratio for regression regimes.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Deviation from the null.
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Serialize, serde::Deserialize)]
struct FixtureSpec {
    regime: String,
    c: f64,
    h: f64,
    n: usize,
    p: usize,
    seed: u64,
}

#[derive(Serialize)]
struct FixtureTruth {
    beta_a: Vec<f64>,
    beta_b: Vec<f64>,
    theta_star: Vec<f64>,
    gamma_star: Vec<f64>,
    sigma_star_proxy: f64,
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("not a number in grid: '{s}'")))
        })
        .collect()
}

fn init_thread_pool() {
    if let Ok(text) = std::env::var("TIERS_THREADS") {
        if let Ok(threads) = text.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let x_a = read_matrix_csv(&args.xa)?;
    let y_a = read_vector_csv(&args.ya)?;
    let x_b = read_matrix_csv(&args.xb)?;
    let y_b = read_vector_csv(&args.yb)?;
    let data = TwoSampleData::new(x_a, y_a, x_b, y_b).map_err(|e| {
        Error::InvalidArgument(format!(
            "inconsistent dimensions across {}, {}, {}, {}: {e}",
            args.xa.display(),
            args.ya.display(),
            args.xb.display(),
            args.yb.display()
        ))
    })?;
    let cfg = TestConfig {
        draws: args.draws,
        seed: args.seed,
        eta: args.eta,
        mu_scale: args.mu_scale,
        weighted_qhat: args.weighted_qhat,
    };
    let result = run_test(&data, args.alpha, &cfg, args.variant.into())?;
    println!("{}", serde_json::to_string_pretty(&result).expect("result serializes"));
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io { path: args.config.display().to_string(), source: e })?;
    let mut spec: ExperimentSpec = toml::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("bad config {}: {e}", args.config.display())))?;
    match args.preset {
        Some(Preset::Desk) => spec.apply_desk_preset(),
        Some(Preset::Paper) => spec.apply_paper_preset(),
        None => {}
    }
    let (report, meta) = run_experiment(&spec)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Io { path: args.out_dir.display().to_string(), source: e })?;
    let json_path = args.out_dir.join("report.json");
    let csv_path = args.out_dir.join("report.csv");
    let meta_path = args.out_dir.join("run_meta.json");
    std::fs::write(&json_path, report.to_json())
        .map_err(|e| Error::Io { path: json_path.display().to_string(), source: e })?;
    std::fs::write(&csv_path, report.to_csv())
        .map_err(|e| Error::Io { path: csv_path.display().to_string(), source: e })?;
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes"))
        .map_err(|e| Error::Io { path: meta_path.display().to_string(), source: e })?;
    for row in &report.rows {
        println!(
            "h={:<8} rate={:.3} se={:.3} rejections={} failures={}",
            row.h, row.rate, row.se, row.rejections, row.failures
        );
    }
    eprintln!("report written to {}", json_path.display());
    Ok(())
}

fn cmd_naive_demo(args: &NaiveDemoArgs) -> Result<()> {
    let grid = parse_grid(&args.c_grid)?;
    let cfg = NaiveDemoConfig::new(
        args.n,
        args.p,
        grid,
        args.alpha,
        args.outer_reps,
        args.inner_draws,
        args.seed,
    )?;
    let curve = naive_size_curve(&cfg)?;
    let mut out = String::from("c,m_hat\n");
    for (c, m) in &curve {
        out.push_str(&format!("{c},{m}\n"));
        println!("c={c:<10} rejection={m:.4}");
    }
    std::fs::write(&args.out, out)
        .map_err(|e| Error::Io { path: args.out.display().to_string(), source: e })?;
    Ok(())
}

fn cmd_oracle_power(args: &OraclePowerArgs) -> Result<()> {
    let gamma = Array1::from_vec(parse_grid(&args.gamma)?);
    let sigma_b: Array2<f64> = if args.sigma_b == "identity" {
        Array2::eye(gamma.len())
    } else {
        read_matrix_csv(&PathBuf::from(&args.sigma_b))?
    };
    let power = lr_oracle_power(&gamma, &sigma_b, args.sigma_u, args.n, args.alpha)?;
    #[derive(Serialize)]
    struct Out {
        power: f64,
        alpha: f64,
        n: usize,
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&Out { power, alpha: args.alpha, n: args.n })
            .expect("output serializes")
    );
    Ok(())
}

fn fixture_paths(dir: &std::path::Path) -> [PathBuf; 4] {
    [dir.join("xa.csv"), dir.join("ya.csv"), dir.join("xb.csv"), dir.join("yb.csv")]
}

fn cmd_fixtures_dump(args: &FixturesDumpArgs) -> Result<()> {
    if !SCENARIO_NAMES.contains(&args.regime.as_str()) {
        return Err(Error::InvalidArgument(format!(
            "unknown regime '{}'; expected one of {}",
            args.regime,
            SCENARIO_NAMES.join(", ")
        )));
    }
    let scenario = scenario_from_name(&args.regime, args.c)?;
    let (data, truth) = scenario.generate(args.n, args.p, args.h, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Io { path: args.out_dir.display().to_string(), source: e })?;
    let [xa, ya, xb, yb] = fixture_paths(&args.out_dir);
    write_matrix_csv(&xa, &data.x_a)?;
    write_vector_csv(&ya, &data.y_a)?;
    write_matrix_csv(&xb, &data.x_b)?;
    write_vector_csv(&yb, &data.y_b)?;
    let spec = FixtureSpec {
        regime: args.regime.clone(),
        c: args.c,
        h: args.h,
        n: args.n,
        p: args.p,
        seed: args.seed,
    };
    let spec_path = args.out_dir.join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string_pretty(&spec).expect("spec serializes"))
        .map_err(|e| Error::Io { path: spec_path.display().to_string(), source: e })?;
    let truth_out = FixtureTruth {
        beta_a: truth.beta_a.to_vec(),
        beta_b: truth.beta_b.to_vec(),
        theta_star: truth.theta_star.to_vec(),
        gamma_star: truth.gamma_star.to_vec(),
        sigma_star_proxy: truth.sigma_star_proxy,
    };
    let truth_path = args.out_dir.join("truth.json");
    std::fs::write(
        &truth_path,
        serde_json::to_string_pretty(&truth_out).expect("truth serializes"),
    )
    .map_err(|e| Error::Io { path: truth_path.display().to_string(), source: e })?;
    eprintln!("fixture written to {}", args.out_dir.display());
    Ok(())
}

fn cmd_fixtures_replay(dir: &PathBuf) -> Result<()> {
    let spec_path = dir.join("spec.json");
    let text = std::fs::read_to_string(&spec_path)
        .map_err(|e| Error::Io { path: spec_path.display().to_string(), source: e })?;
    let spec: FixtureSpec = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("bad spec.json: {e}")))?;
    let scenario = scenario_from_name(&spec.regime, spec.c)?;
    let (data, _) = scenario.generate(spec.n, spec.p, spec.h, spec.seed)?;

    let tmp = tempdir_in(dir)?;
    let [xa, ya, xb, yb] = fixture_paths(tmp.as_path());
    write_matrix_csv(&xa, &data.x_a)?;
    write_vector_csv(&ya, &data.y_a)?;
    write_matrix_csv(&xb, &data.x_b)?;
    write_vector_csv(&yb, &data.y_b)?;

    let mut ok = true;
    for (fresh, stored) in fixture_paths(tmp.as_path()).iter().zip(fixture_paths(dir).iter()) {
        let a = std::fs::read(fresh)
            .map_err(|e| Error::Io { path: fresh.display().to_string(), source: e })?;
        let b = std::fs::read(stored)
            .map_err(|e| Error::Io { path: stored.display().to_string(), source: e })?;
        if a != b {
            ok = false;
            eprintln!("mismatch: {}", stored.display());
        }
    }
    let _ = std::fs::remove_dir_all(tmp.as_path());
    if ok {
        println!("replay ok: fixture reproduces byte-for-byte");
        Ok(())
    } else {
        Err(Error::InvalidArgument("replay mismatch".into()))
    }
}

/// Minimal scratch dir (avoids a tempfile dependency in the binary).
struct ScratchDir(PathBuf);

impl ScratchDir {
    fn as_path(&self) -> &std::path::Path {
        &self.0
    }
}

fn tempdir_in(base: &std::path::Path) -> Result<ScratchDir> {
    let path = base.join(format!(".replay-{}", std::process::id()));
    std::fs::create_dir_all(&path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    Ok(ScratchDir(path))
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::NaiveDemo(args) => cmd_naive_demo(args),
        Command::OraclePower(args) => cmd_oracle_power(args),
        Command::Fixtures { command } => match command {
            FixturesCommand::Dump(args) => cmd_fixtures_dump(args),
            FixturesCommand::Replay { dir } => cmd_fixtures_replay(dir),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
