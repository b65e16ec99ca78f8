use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jab_core::harness::settings::{
    AggregationChoice, BModeChoice, RegressorChoice, SamplingChoice, SyntheticChoice,
};
use jab_core::harness::verify::{run_verify, VerifyOptions};
use jab_core::harness::{
    coverage, emit_report, load_csv, load_test_csv, predict_intervals, run_experiment, MethodKind,
    Settings,
};
use jab_core::methods::{stability_delta, theorem_s2_level, theorem_s3_level};
use jab_core::{keep_probability, PredictionInterval};

/// Jackknife+-after-bootstrap prediction intervals.
#[derive(Parser)]
#[command(name = "jab", version)]
struct Cli {
    /// TOML settings file; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit on a training CSV and write intervals for every test row.
    Predict {
        #[arg(long, value_enum, default_value = "jab")]
        method: Method,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Run methods over repeated train/test splits and write a report.
    Experiment {
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Randomized checks: tournament bound, coupling identity, quantile oracle.
    Verify {
        #[arg(long, default_value_t = 100_000)]
        tournaments: usize,
        #[arg(long, default_value_t = 200)]
        coupling_runs: usize,
        #[arg(long, default_value_t = 10_000)]
        quantile_instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Ensemble-stability delta and the fixed-B coverage levels.
    Stability {
        #[command(flatten)]
        settings: SettingsArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Jab,
    #[value(name = "jplus_ensemble")]
    JplusEnsemble,
    #[value(name = "jplus_base")]
    JplusBase,
    Jackknife,
    #[value(name = "jmm_ab")]
    JmmAb,
}

impl From<Method> for MethodKind {
    fn from(m: Method) -> Self {
        match m {
            Method::Jab => MethodKind::Jab,
            Method::JplusEnsemble => MethodKind::JplusEnsemble,
            Method::JplusBase => MethodKind::JplusBase,
            Method::Jackknife => MethodKind::Jackknife,
            Method::JmmAb => MethodKind::JmmAb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    With,
    Without,
}

#[derive(Clone, Copy, ValueEnum)]
enum BModeArg {
    Fixed,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegressorArg {
    Ridge,
    Knn,
    Tree,
    Forest,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Mean,
    Median,
    TrimmedMean,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntheticArg {
    Linear,
    Friedman,
}

/// Flags mirroring the settings file keys.
#[derive(Args, Default)]
struct SettingsArgs {
    /// Miscoverage level in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Resample size; defaults to the training size.
    #[arg(long)]
    m: Option<usize>,
    /// Ensemble size (fixed mode) or its target mean (random mode).
    #[arg(long)]
    b: Option<usize>,
    /// Binomial trial count in random mode.
    #[arg(long)]
    b_tilde: Option<usize>,
    #[arg(long, value_enum)]
    sampling: Option<Sampling>,
    #[arg(long, value_enum)]
    b_mode: Option<BModeArg>,
    #[arg(long, value_enum)]
    regressor: Option<RegressorArg>,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    /// Proportion cut at each end for trimmed-mean aggregation.
    #[arg(long)]
    trim: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda_factor: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    feature_subsample: Option<f64>,
    /// Disable the thread pool.
    #[arg(long)]
    sequential: bool,

    #[arg(long)]
    train_csv: Option<PathBuf>,
    #[arg(long)]
    test_csv: Option<PathBuf>,
    /// Response column: header name or 0-based index. Default: last column.
    #[arg(long)]
    response_col: Option<String>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long, value_enum)]
    synthetic: Option<SyntheticArg>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    coef_scale: Option<f64>,
    #[arg(long)]
    data_seed: Option<u64>,

    #[arg(long)]
    splits: Option<usize>,
    /// Comma-separated list of methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    out_dir: Option<PathBuf>,

    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon_star: Option<f64>,
    #[arg(long)]
    delta_star: Option<f64>,
    /// Keep-probability; derived from n_train, m and sampling when absent.
    #[arg(long)]
    theta: Option<f64>,
    /// Lower end of the learner's output range.
    #[arg(long)]
    lower: Option<f64>,
    /// Upper end of the learner's output range.
    #[arg(long)]
    upper: Option<f64>,
}

impl SettingsArgs {
    fn into_settings(self) -> Settings {
        let mut s = Settings::default();
        let m = &mut s.method;
        m.alpha = self.alpha;
        m.m = self.m;
        m.b = self.b;
        m.b_tilde = self.b_tilde;
        m.sampling = self.sampling.map(|v| match v {
            Sampling::With => SamplingChoice::With,
            Sampling::Without => SamplingChoice::Without,
        });
        m.b_mode = self.b_mode.map(|v| match v {
            BModeArg::Fixed => BModeChoice::Fixed,
            BModeArg::Random => BModeChoice::Random,
        });
        m.regressor = self.regressor.map(|v| match v {
            RegressorArg::Ridge => RegressorChoice::Ridge,
            RegressorArg::Knn => RegressorChoice::Knn,
            RegressorArg::Tree => RegressorChoice::Tree,
            RegressorArg::Forest => RegressorChoice::Forest,
        });
        m.aggregation = self.aggregation.map(|v| match v {
            AggregationArg::Mean => AggregationChoice::Mean,
            AggregationArg::Median => AggregationChoice::Median,
            AggregationArg::TrimmedMean => AggregationChoice::TrimmedMean,
        });
        m.trim = self.trim;
        m.seed = self.seed;
        m.lambda_factor = self.lambda_factor;
        m.k = self.k;
        m.max_depth = self.max_depth;
        m.min_leaf = self.min_leaf;
        m.n_trees = self.n_trees;
        m.feature_subsample = self.feature_subsample;
        m.sequential = self.sequential.then_some(true);

        let d = &mut s.data;
        d.train_csv = self.train_csv;
        d.test_csv = self.test_csv;
        d.response_col = self.response_col;
        d.n_train = self.n_train;
        d.n_test = self.n_test;
        d.synthetic = self.synthetic.map(|v| match v {
            SyntheticArg::Linear => SyntheticChoice::Linear,
            SyntheticArg::Friedman => SyntheticChoice::Friedman,
        });
        d.p = self.p;
        d.noise_sd = self.noise_sd;
        d.coef_scale = self.coef_scale;
        d.data_seed = self.data_seed;

        let e = &mut s.experiment;
        e.splits = self.splits;
        e.methods = self
            .methods
            .map(|v| v.into_iter().map(MethodKind::from).collect());
        e.out_dir = self.out_dir;

        let st = &mut s.stability;
        st.epsilon = self.epsilon;
        st.delta = self.delta;
        st.epsilon_star = self.epsilon_star;
        st.delta_star = self.delta_star;
        st.theta = self.theta;
        st.lower = self.lower;
        st.upper = self.upper;
        s
    }
}

fn load_settings(config: Option<&PathBuf>, args: SettingsArgs) -> Result<Settings> {
    let base = match config {
        Some(path) => {
            Settings::from_file(path).with_context(|| format!("reading {}", path.display()))?
        }
        None => Settings::default(),
    };
    Ok(base.overridden_by(args.into_settings()))
}

fn predict(settings: Settings, method: MethodKind) -> Result<()> {
    let (Some(train_path), Some(test_path)) = (&settings.data.train_csv, &settings.data.test_csv)
    else {
        bail!("predict needs --train-csv and --test-csv");
    };
    let selector = settings.response_selector();
    let train = load_csv(train_path, &selector)
        .with_context(|| format!("loading {}", train_path.display()))?;
    let (rows, truths) = load_test_csv(test_path, &selector, train.n_features())
        .with_context(|| format!("loading {}", test_path.display()))?;
    let config = settings.config_for(method, train.len())?;
    let (intervals, counters) = predict_intervals(method, &train, &rows, &config)?;

    let mut out: Box<dyn Write> = match &settings.experiment.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Box::new(File::create(dir.join("intervals.csv"))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    write_intervals(&mut out, &intervals, truths.as_deref())?;
    eprintln!(
        "{}: {} intervals, r_calls = {}, evals = {}, phi_calls = {}",
        method.name(),
        intervals.len(),
        counters.r_calls,
        counters.evals,
        counters.phi_calls
    );
    if let Some(ys) = truths {
        eprintln!("coverage = {:.4}", coverage(&intervals, &ys)?);
    }
    Ok(())
}

fn write_intervals(
    out: &mut dyn Write,
    intervals: &[PredictionInterval],
    truths: Option<&[f64]>,
) -> io::Result<()> {
    match truths {
        Some(ys) => {
            writeln!(out, "lower,upper,y,covered")?;
            for (iv, y) in intervals.iter().zip(ys) {
                writeln!(out, "{},{},{y},{}", iv.lower, iv.upper, iv.contains(*y))?;
            }
        }
        None => {
            writeln!(out, "lower,upper")?;
            for iv in intervals {
                writeln!(out, "{},{}", iv.lower, iv.upper)?;
            }
        }
    }
    out.flush()
}

fn experiment(settings: Settings) -> Result<()> {
    let plan = settings.experiment_plan()?;
    let report = run_experiment(&plan)?;
    let out_dir = settings
        .experiment
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    emit_report(&report, &out_dir)?;
    println!("method\tcoverage\tmean_width\tfailed_splits");
    for r in &report.results {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
        println!(
            "{}\t{}\t{}\t{}",
            r.method,
            fmt(r.mean_coverage()),
            fmt(r.mean_width()),
            r.failures()
        );
    }
    if let Some(floor) = report.annotations.floor_1_minus_2alpha {
        println!("1 - 2 alpha = {floor:.4}");
    }
    eprintln!("report written to {}", out_dir.display());
    Ok(())
}

fn stability(settings: Settings) -> Result<()> {
    let s = &settings.stability;
    let alpha = settings.alpha();
    let b = settings
        .method
        .b
        .unwrap_or(jab_core::harness::settings::DEFAULT_B);
    let theta = match s.theta {
        Some(t) => t,
        None => {
            let n = settings.n_train();
            keep_probability(n, settings.method.m.unwrap_or(n), settings.sampling())?
        }
    };
    let delta = match (s.delta, s.epsilon, s.lower, s.upper) {
        (Some(d), ..) => d,
        (None, Some(eps), Some(lo), Some(hi)) => stability_delta(b, theta, eps, lo, hi)?,
        _ => bail!("stability needs --delta, or --epsilon with --lower and --upper"),
    };
    println!("B = {b}, theta = {theta}");
    println!("delta = {delta}");
    if delta >= 1.0 {
        println!("the bound is vacuous (delta >= 1)");
    }
    let eps = s
        .epsilon
        .map_or("2 epsilon".to_string(), |e| format!("{}", 2.0 * e));
    println!(
        "coverage level with {eps} inflation = {}",
        theorem_s2_level(alpha, delta)
    );
    if let Some(delta_star) = s.delta_star {
        let eps = match (s.epsilon, s.epsilon_star) {
            (Some(e), Some(es)) => format!("{}", 2.0 * (e + es)),
            _ => "2 epsilon + 2 epsilon*".to_string(),
        };
        println!(
            "coverage level with {eps} inflation (out-of-sample stable) = {}",
            theorem_s3_level(alpha, delta, delta_star)
        );
    }
    Ok(())
}

fn verify(options: VerifyOptions) -> bool {
    let mut ok = true;
    for check in run_verify(&options) {
        let status = if check.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {}: {} violations in {} trials",
            check.name, check.violations, check.trials
        );
        for d in &check.details {
            println!("    {d}");
        }
        ok &= check.passed();
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.command {
        Command::Verify { .. } => "error",
        _ => "warn",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Predict { method, settings } => {
            load_settings(cli.config.as_ref(), settings).and_then(|s| predict(s, method.into()))
        }
        Command::Experiment { settings } => {
            load_settings(cli.config.as_ref(), settings).and_then(experiment)
        }
        Command::Stability { settings } => {
            load_settings(cli.config.as_ref(), settings).and_then(stability)
        }
        Command::Verify {
            tournaments,
            coupling_runs,
            quantile_instances,
            seed,
        } => {
            let opts = VerifyOptions {
                tournaments,
                coupling_runs,
                quantile_instances,
                seed,
            };
            return if verify(opts) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
