//! `ginicorr` — categorical Gini correlation from the command line.
//!
//! Subcommands: `estimate` (point estimates), `ci` (confidence intervals),
//! `oracle` (population values, analytic or Monte Carlo), and `simulate`
//! (coverage studies from a TOML config).
//!
//! Exit codes: 0 success, 2 usage or input/config parse error, 3 numerical
//! failure (degenerate data, failed interval inversion, or an aborted study).

mod dataset;
mod report;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use ginicorr::{
    confidence_intervals, rho_exponential, rho_monte_carlo, rho_normal_location,
    rho_normal_scale, scenario_from_toml_str, GmdSummary, Method, StudyConfig,
};

use dataset::{load, ColumnSpec, LoadedDataset};
use report::{
    any_failed, coverage_tsv, render_coverage, render_intervals, to_json, CiReport, ClassReport,
    EstimateReport, OracleReport, SimulateReport, SCHEMA_VERSION,
};

/// Bundled study configurations, usable as `--config <name>` anywhere.
const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    ("normal_location_k2", include_str!("../configs/normal_location_k2.toml")),
    ("normal_mixture_k3", include_str!("../configs/normal_mixture_k3.toml")),
    ("normal_5d_k2", include_str!("../configs/normal_5d_k2.toml")),
];

#[derive(Parser)]
#[command(
    name = "ginicorr",
    version,
    about = "Categorical Gini correlation: estimation, confidence intervals, population oracles, and coverage studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point estimates and Gini mean differences for a dataset
    Estimate(EstimateArgs),
    /// Confidence intervals for the correlation
    Ci(CiArgs),
    /// Population correlation values (closed forms or Monte Carlo)
    Oracle {
        #[command(subcommand)]
        family: OracleCommand,
    },
    /// Coverage study driven by a TOML configuration
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset: a CSV path, or `iris` for the bundled iris data
    #[arg(long)]
    data: String,
    /// Label column (name, or 0-based index without a header); default: last column
    #[arg(long)]
    label: Option<String>,
    /// Feature columns, comma-separated names or 0-based indices; default: all non-label columns
    #[arg(long)]
    features: Option<String>,
    /// CSV field delimiter
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Treat the first CSV row as data (select columns by index)
    #[arg(long)]
    no_header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<LoadedDataset, CliError> {
        load(
            &self.data,
            &ColumnSpec {
                label: self.label.as_deref(),
                features: self.features.as_deref(),
                delimiter: self.delimiter,
                no_header: self.no_header,
            },
        )
        .map_err(CliError::Usage)
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Emit the structured JSON document instead of aligned text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CiArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Interval method: jel, ajel, wjel, jv, a comma-separated subset, or all
    #[arg(long, default_value = "all")]
    method: String,
    /// Nominal coverage level
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Emit the structured JSON document instead of aligned text
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Two exponential classes: class 1 has mean theta, class 2 mean beta
    Exponential {
        /// Probability of the first class
        #[arg(long)]
        p: f64,
        /// Mean of the first class
        #[arg(long)]
        theta: f64,
        /// Mean of the second class
        #[arg(long)]
        beta: f64,
        /// Emit JSON
        #[arg(long)]
        json: bool,
    },
    /// Two unit-variance normal classes whose means differ by a shift
    NormalLocation {
        /// Probability of the first class
        #[arg(long)]
        p: f64,
        /// Mean shift between the classes
        #[arg(long)]
        a: f64,
        /// Emit JSON
        #[arg(long)]
        json: bool,
    },
    /// Two centered normal classes whose standard deviations differ by a ratio
    NormalScale {
        /// Probability of the first class
        #[arg(long)]
        p: f64,
        /// Standard-deviation ratio of the second class to the first
        #[arg(long)]
        r: f64,
        /// Emit JSON
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo estimate for a mixture scenario from a config file
    MonteCarlo {
        /// Scenario file (TOML; a full study config also works), or a bundled config name
        #[arg(long)]
        config: String,
        /// Total sample size (split into 10 blocks for the standard error)
        #[arg(long, default_value_t = 1_000_000)]
        n_total: usize,
        /// RNG seed (required: unseeded runs are not reproducible)
        #[arg(long)]
        seed: u64,
        /// Emit JSON
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Study configuration file (TOML), or a bundled config name
    #[arg(long)]
    config: String,
    /// Override the config's master seed (required if the config has none)
    #[arg(long)]
    seed: Option<u64>,
    /// Override replications per batch
    #[arg(long)]
    replications: Option<usize>,
    /// Override the number of batches
    #[arg(long)]
    batches: Option<usize>,
    /// Override the nominal level
    #[arg(long)]
    level: Option<f64>,
    /// Run a subset of methods, comma-separated (e.g. jel,jv)
    #[arg(long, alias = "method")]
    methods: Option<String>,
    /// Directory for the TSV and JSON report files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Print the JSON document to stdout instead of the aligned summary
    #[arg(long)]
    json: bool,
}

/// Error classified by exit code.
enum CliError {
    /// Bad input: flags, file contents, config schema. Exit 2.
    Usage(anyhow::Error),
    /// The computation itself could not produce a result. Exit 3.
    Numerical(anyhow::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            CliError::Usage(e) | CliError::Numerical(e) => e,
        }
    }
}

/// Library errors split into "your input is invalid" and "the numbers gave
/// out"; the latter class maps to exit code 3.
fn classify(err: ginicorr::Error) -> CliError {
    use ginicorr::Error;
    match err {
        Error::DegenerateSample
        | Error::DegenerateDeletion { .. }
        | Error::AllocationFailed { .. }
        | Error::ExcessiveFailures { .. } => CliError::Numerical(err.into()),
        _ => CliError::Usage(err.into()),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and exit 0; real parse
            // errors go to stderr with the usage exit code.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {:#}", err.message());
            std::process::exit(err.code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Ci(args) => cmd_ci(args),
        Command::Oracle { family } => cmd_oracle(family),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn parse_methods(spec: &str) -> Result<Vec<Method>, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut methods = Vec::new();
    for part in spec.split(',') {
        let method: Method = part.trim().parse().map_err(classify)?;
        if !methods.contains(&method) {
            methods.push(method);
        }
    }
    Ok(methods)
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let ds = args.data.load()?;
    let summary = GmdSummary::compute(&ds.sample);
    let rho_g = summary.rho_v().map_err(classify)?;
    let rho_u = summary.rho_u().map_err(classify)?;

    let counts = ds.sample.class_counts();
    let classes: Vec<ClassReport> = ds
        .class_names
        .iter()
        .enumerate()
        .map(|(k, name)| ClassReport {
            name: name.clone(),
            count: counts[k],
            proportion: summary.p_hat[k],
            gmd: summary.v_class[k],
        })
        .collect();

    let doc = EstimateReport {
        schema_version: SCHEMA_VERSION,
        command: "estimate",
        source: ds.source.clone(),
        n: ds.sample.n(),
        dim: ds.sample.dim(),
        features: ds.feature_names.clone(),
        label: ds.label_name.clone(),
        rho_g,
        rho_u,
        gcov: summary.gcov_v(),
        gmd_pooled: summary.v_pooled,
        classes,
    };

    if args.json {
        print!("{}", to_json(&doc));
        return Ok(());
    }

    println!("dataset   {}", doc.source);
    println!("features  {}", doc.features.join(", "));
    println!("label     {}", doc.label);
    println!();
    println!("{:<10} {}", "n", doc.n);
    println!("{:<10} {:.6}   (V-statistic point estimate)", "rho_g", doc.rho_g);
    println!("{:<10} {:.6}   (U-statistic anchor)", "rho_u", doc.rho_u);
    println!("{:<10} {:.6}   (between-class Gini covariance)", "gcov", doc.gcov);
    println!("{:<10} {:.6}   (pooled Gini mean difference)", "delta", doc.gmd_pooled);
    println!();
    println!("{:<14} {:>5} {:>8} {:>10}", "class", "n_k", "p_hat", "delta_k");
    for c in &doc.classes {
        println!("{:<14} {:>5} {:>8.4} {:>10.6}", c.name, c.count, c.proportion, c.gmd);
    }
    Ok(())
}

fn cmd_ci(args: CiArgs) -> Result<(), CliError> {
    let methods = parse_methods(&args.method)?;
    let ds = args.data.load()?;
    let intervals = confidence_intervals(&ds.sample, args.level, &methods).map_err(classify)?;

    let doc = CiReport {
        schema_version: SCHEMA_VERSION,
        command: "ci",
        source: ds.source.clone(),
        n: ds.sample.n(),
        level: args.level,
        intervals,
    };

    if args.json {
        print!("{}", to_json(&doc));
    } else {
        println!("dataset   {}", doc.source);
        if let Some(first) = doc.intervals.first() {
            println!("point     {:.6}   (rho_g, V-statistic)", first.point);
        }
        println!();
        print!("{}", render_intervals(&doc.intervals));
    }

    if any_failed(&doc.intervals) {
        return Err(CliError::Numerical(anyhow!(
            "no confidence set found within [0, 1] for at least one method \
             (the statistic exceeds the threshold everywhere)"
        )));
    }
    Ok(())
}

fn oracle_doc(family: &str, params: serde_json::Value, rho: f64) -> OracleReport {
    OracleReport {
        schema_version: SCHEMA_VERSION,
        command: "oracle",
        family: family.into(),
        params,
        rho,
        standard_error: None,
        block_estimates: None,
        n_total: None,
        seed: None,
    }
}

fn emit_oracle(doc: &OracleReport, json: bool) {
    if json {
        print!("{}", to_json(doc));
        return;
    }
    println!("rho       {:.10}", doc.rho);
    if let Some(se) = doc.standard_error {
        println!("se        {:.3e}", se);
    }
}

fn cmd_oracle(family: OracleCommand) -> Result<(), CliError> {
    match family {
        OracleCommand::Exponential { p, theta, beta, json } => {
            let rho = rho_exponential(p, theta, beta).map_err(classify)?;
            let doc = oracle_doc(
                "exponential",
                serde_json::json!({"p": p, "theta": theta, "beta": beta}),
                rho,
            );
            emit_oracle(&doc, json);
        }
        OracleCommand::NormalLocation { p, a, json } => {
            let rho = rho_normal_location(p, a).map_err(classify)?;
            let doc = oracle_doc("normal-location", serde_json::json!({"p": p, "a": a}), rho);
            emit_oracle(&doc, json);
        }
        OracleCommand::NormalScale { p, r, json } => {
            let rho = rho_normal_scale(p, r).map_err(classify)?;
            let doc = oracle_doc("normal-scale", serde_json::json!({"p": p, "r": r}), rho);
            emit_oracle(&doc, json);
        }
        OracleCommand::MonteCarlo { config, n_total, seed, json } => {
            let (text, name) = read_config(&config)?;
            let scenario = scenario_from_toml_str(&text).map_err(classify)?;
            let mc = rho_monte_carlo(&scenario, n_total, seed).map_err(classify)?;
            let mut doc = oracle_doc(
                "monte-carlo",
                serde_json::json!({"config": name, "scenario": scenario.id}),
                mc.estimate,
            );
            doc.standard_error = Some(mc.standard_error);
            doc.block_estimates = Some(mc.block_estimates);
            doc.n_total = Some(n_total);
            doc.seed = Some(seed);
            emit_oracle(&doc, json);
        }
    }
    Ok(())
}

/// Resolves `--config`: an existing file path wins; otherwise a bundled
/// config name (with or without `.toml`) is looked up.
fn read_config(selector: &str) -> Result<(String, String), CliError> {
    let path = Path::new(selector);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(CliError::Usage)?;
        return Ok((text, path.display().to_string()));
    }
    let stem = selector.strip_suffix(".toml").unwrap_or(selector);
    if let Some((name, text)) = BUNDLED_CONFIGS.iter().find(|(name, _)| *name == stem) {
        return Ok((text.to_string(), format!("{name} (bundled)")));
    }
    Err(CliError::Usage(anyhow!(
        "'{selector}' is neither a config file nor a bundled config (bundled: {})",
        BUNDLED_CONFIGS
            .iter()
            .map(|(name, _)| *name)
            .collect::<Vec<_>>()
            .join(", ")
    )))
}

fn sanitize_id(id: &str) -> String {
    let cleaned: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '-' })
        .collect();
    if cleaned.is_empty() {
        "study".into()
    } else {
        cleaned
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (text, name) = read_config(&args.config)?;
    let mut config = StudyConfig::from_toml_str(&text).map_err(classify)?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(replications) = args.replications {
        config.replications = replications;
    }
    if let Some(batches) = args.batches {
        config.batches = batches;
    }
    if let Some(level) = args.level {
        config.level = level;
    }
    if let Some(methods) = &args.methods {
        config.methods = parse_methods(methods)?;
    }
    let design = config.into_design().map_err(classify)?;
    let reports = ginicorr::coverage_study(&design).map_err(classify)?;

    let doc = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        config: name,
        reports,
    };

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))
        .map_err(CliError::Usage)?;
    let base = sanitize_id(&design.scenario.id);
    let tsv_path = args.out_dir.join(format!("{base}.tsv"));
    let json_path = args.out_dir.join(format!("{base}.json"));
    std::fs::write(&tsv_path, coverage_tsv(&doc.reports))
        .with_context(|| format!("cannot write {}", tsv_path.display()))
        .map_err(CliError::Usage)?;
    std::fs::write(&json_path, to_json(&doc))
        .with_context(|| format!("cannot write {}", json_path.display()))
        .map_err(CliError::Usage)?;

    if args.json {
        print!("{}", to_json(&doc));
    } else {
        print!("{}", render_coverage(&doc.reports));
        println!();
        println!("wrote {}", tsv_path.display());
        println!("wrote {}", json_path.display());
    }
    Ok(())
}
