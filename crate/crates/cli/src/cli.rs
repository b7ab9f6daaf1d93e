// SPDX-License-Identifier: MIT OR Apache-2.0

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use softed_core::analysis::{summarize_corpus, EvaluationOptions, SeriesEvaluation};
use softed_core::detectors::{
    classify_anomalies, classify_change_points, classify_events, generate_synthetic,
    DetectorConfig, Estimator,
};
use softed_core::nab::ApplicationProfile;
use softed_core::scenarios::scenario_suite;
use softed_core::softed::ConsumptionRule;
use softed_core::{DuplicateWarning, ToleranceConfig};

use crate::config::{load_synthetic_spec, ConfigFile, ProfileSetting};
use crate::error::{CliError, CliResult};
use crate::files::{self, InstanceSources, LoadedInstance};
use crate::plot::{self, Table};
use crate::report::{self, CorpusDocument, EvaluationDocument, ScenarioSection, ScenariosDocument};

/// Tolerance values swept when `sweep` gets no `--k`.
pub const DEFAULT_SWEEP_K: [f64; 4] = [15.0, 30.0, 45.0, 60.0];
/// Ranking rows compared by `batch`.
pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_NEIGHBORHOOD: usize = 5;

#[derive(Debug, Parser)]
#[command(
    name = "softed",
    version,
    about = "Hard, soft and NAB-style evaluation of time series event detections",
    after_help = "Time indices in every input and output file are 1-based."
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Tolerance k (default 15); a comma-separated list for `sweep`.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Vec<f64>,
    /// F-beta weight (default 1).
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// NAB application profile: standard, low-fp or low-fn.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Fallback rule for contested representatives.
    #[arg(long, global = true)]
    rule: Option<ConsumptionRule>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for synthetic generation.
    #[arg(long, global = true, env = "SOFTED_SEED")]
    seed: Option<u64>,
    /// TOML configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Also write long-format plot tables into this directory.
    #[arg(long, global = true)]
    plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every method of one instance.
    Eval(InstanceArgs),
    /// Evaluate one instance and tabulate soft-minus-hard deltas across k.
    Sweep(InstanceArgs),
    /// Evaluate a directory of instance directories and summarize the corpus.
    Batch(BatchArgs),
    /// Run a baseline detector on a series and emit a detections CSV.
    Detect(DetectArgs),
    /// Generate a synthetic series and its ground truth.
    Synth(SynthArgs),
    /// Evaluate the built-in comparison scenarios.
    Scenarios(ScenarioArgs),
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Ground-truth events (header `time`).
    #[arg(long)]
    events: PathBuf,
    /// Detections (header `time` or `time,method`); repeatable.
    #[arg(long, required = true)]
    detections: Vec<PathBuf>,
    /// Series (header `time,value`); sets the timeline length.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Timeline length when no series is given.
    #[arg(long)]
    length: Option<usize>,
    /// Series name used in reports.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Directory whose subdirectories each hold `events.csv`,
    /// `detections*.csv` and `series.csv` or `instance.toml`.
    dir: PathBuf,
    /// Ranking rows compared between hard and soft F1.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DetectKind {
    Events,
    Anomalies,
    ChangePoints,
}

impl DetectKind {
    fn label(self) -> &'static str {
        match self {
            DetectKind::Events => "events",
            DetectKind::Anomalies => "anomalies",
            DetectKind::ChangePoints => "change-points",
        }
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long, value_enum, default_value_t = DetectKind::Events)]
    kind: DetectKind,
    /// Observations on each side used for the expected value.
    #[arg(long)]
    neighborhood: Option<usize>,
    /// Deviation threshold.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    estimator: Option<Estimator>,
    /// Method name written to the detections file (default: the kind).
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Recipe (TOML, or JSON by extension); defaults to the config's `[synth]`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Receives `series.csv` and `events.csv`.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Also write each scenario as an instance directory here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 on success, 1 for invalid input, 2 for I/O errors.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let text = e.render().to_string();
                    let text = text.strip_prefix("error: ").unwrap_or(&text);
                    let _ = write!(err, "error[usage]: {text}");
                    1
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.tag());
            e.exit_code()
        }
    }
}

/// Flags merged with the optional config file.
struct Settings {
    options: EvaluationOptions,
    sweep_k: Vec<f64>,
    depth: usize,
    config: ConfigFile,
    format: Format,
    jobs: Option<usize>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    plot_dir: Option<PathBuf>,
}

fn settings(global: GlobalArgs, sweep: bool) -> CliResult<Settings> {
    let config = match &global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let (k, sweep_k) = if sweep {
        let list = if !global.k.is_empty() {
            global.k.clone()
        } else {
            config
                .sweep_k
                .clone()
                .unwrap_or_else(|| DEFAULT_SWEEP_K.to_vec())
        };
        (config.k.unwrap_or(ToleranceConfig::DEFAULT_K), list)
    } else {
        let k = match global.k.as_slice() {
            [] => config.k.unwrap_or(ToleranceConfig::DEFAULT_K),
            [k] => *k,
            _ => return Err(CliError::validation("--k takes a list only with `sweep`")),
        };
        (k, Vec::new())
    };
    let beta = global.beta.or(config.beta).unwrap_or(1.0);
    let profile = match (&global.profile, &config.profile) {
        (Some(name), _) => ApplicationProfile::by_name(name)?,
        (None, Some(setting)) => setting.resolve()?,
        (None, None) => ProfileSetting::Named("standard".into()).resolve()?,
    };
    if global.jobs == Some(0) {
        return Err(CliError::validation("--jobs must be at least 1"));
    }
    Ok(Settings {
        options: EvaluationOptions {
            tolerance: ToleranceConfig::new(k, beta)?,
            profile,
            rule: global.rule.or(config.rule).unwrap_or_default(),
        },
        sweep_k,
        depth: config.depth.unwrap_or(DEFAULT_DEPTH),
        config,
        format: global.format,
        jobs: global.jobs,
        seed: global.seed,
        output: global.output,
        plot_dir: global.plot_dir,
    })
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let sweep = matches!(cli.command, Command::Sweep(_));
    let s = settings(cli.global, sweep)?;
    match cli.command {
        Command::Eval(args) | Command::Sweep(args) => eval(&s, args, sweep, out, err),
        Command::Batch(args) => batch(&s, args, out, err),
        Command::Detect(args) => detect(&s, args, out),
        Command::Synth(args) => synth(&s, args),
        Command::Scenarios(args) => scenarios(&s, args, out),
    }
}

fn emit(s: &Settings, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &s.output {
        Some(path) => files::write_text(path, text),
        None => out.write_all(text.as_bytes()).map_err(CliError::Output),
    }
}

fn write_tables(s: &Settings, tables: &[(&str, Table)]) -> CliResult<()> {
    if let Some(dir) = &s.plot_dir {
        for (file, table) in tables {
            files::write_text(&dir.join(file), &table.to_csv())?;
        }
    }
    Ok(())
}

fn warn(err: &mut dyn Write, name: &str, warnings: &[DuplicateWarning]) {
    for w in warnings {
        let _ = writeln!(
            err,
            "warning[duplicate]: {name}: {} time {} repeated; kept once",
            w.source, w.time
        );
    }
}

fn eval(
    s: &Settings,
    args: InstanceArgs,
    sweep: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let loaded = files::load_instance(&InstanceSources {
        name: args.name,
        events: args.events,
        detections: args.detections,
        series: args.series,
        length: args.length,
        methods: Vec::new(),
    })?;
    warn(err, &loaded.name, &loaded.warnings);
    let sweep_k = sweep.then_some(s.sweep_k.as_slice());
    let (report, _) = report::instance_report(&loaded, &s.options, sweep_k)?;

    let labelled = [(loaded.name.as_str(), &report)];
    let mut tables = vec![
        ("metrics.csv", plot::metrics_table(labelled)),
        ("rankings.csv", plot::rankings_table(labelled)),
    ];
    if sweep {
        tables.push(("sweep.csv", plot::sweep_table(&report)));
    }
    write_tables(s, &tables)?;

    let text = match s.format {
        Format::Json => report::to_json(&EvaluationDocument::new(report)),
        Format::Csv if sweep => plot::sweep_table(&report).to_csv(),
        Format::Csv => plot::metrics_table(labelled).to_csv(),
        Format::Md => report::instance_markdown(&report),
    };
    emit(s, &text, out)
}

/// Runs `f` over `items` on `jobs` threads, keeping input order.
fn parallel_map<T: Sync, R: Send>(
    jobs: Option<usize>,
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> CliResult<Vec<R>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::validation(format!("cannot start {jobs:?} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn batch(s: &Settings, args: BatchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let depth = args.depth.unwrap_or(s.depth);
    let dirs: Vec<PathBuf> = files::list_dir(&args.dir)?
        .into_iter()
        .filter(|p| p.is_dir())
        .collect();
    if dirs.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no instance directories",
            args.dir.display()
        )));
    }
    let results = parallel_map(s.jobs, &dirs, |dir: &PathBuf| {
        let loaded = files::load_instance_dir(dir)?;
        let (report, metrics) = report::instance_report(&loaded, &s.options, None)?;
        Ok::<_, CliError>((loaded, report, metrics))
    })?;

    let mut reports = Vec::with_capacity(results.len());
    let mut corpus = Vec::with_capacity(results.len());
    for r in results {
        let (loaded, report, metrics): (LoadedInstance, _, _) = r?;
        warn(err, &loaded.name, &loaded.warnings);
        corpus.push(SeriesEvaluation {
            series: loaded.name,
            reports: metrics,
        });
        reports.push(report);
    }
    let summary = summarize_corpus(&corpus, depth);
    let doc = CorpusDocument::new(&s.options, depth, summary, reports);

    let labelled: Vec<(&str, &report::InstanceReport)> = doc
        .series
        .iter()
        .map(|r| (r.instance.series.as_str(), r))
        .collect();
    write_tables(
        s,
        &[
            ("metrics.csv", plot::metrics_table(labelled.iter().copied())),
            (
                "rankings.csv",
                plot::rankings_table(labelled.iter().copied()),
            ),
            ("categories.csv", plot::category_table(&doc.series, false)),
            (
                "nab_categories.csv",
                plot::category_table(&doc.series, true),
            ),
            (
                "rank_changes.csv",
                plot::rank_change_table(&doc.summary.rank_changes),
            ),
        ],
    )?;

    let text = match s.format {
        Format::Json => report::to_json(&doc),
        Format::Csv => plot::category_table(&doc.series, false).to_csv(),
        Format::Md => report::corpus_markdown(&doc),
    };
    emit(s, &text, out)
}

fn detect(s: &Settings, args: DetectArgs, out: &mut dyn Write) -> CliResult<()> {
    let series = files::read_series(&args.series)?;
    let section = &s.config.detector;
    let sigma = args
        .sigma
        .or(section.sigma)
        .ok_or_else(|| CliError::validation("detector threshold unspecified: pass --sigma"))?;
    let config = DetectorConfig::new(
        args.neighborhood
            .or(section.neighborhood)
            .unwrap_or(DEFAULT_NEIGHBORHOOD),
        sigma,
        args.estimator.or(section.estimator).unwrap_or_default(),
    )?;
    let found = match args.kind {
        DetectKind::Events => classify_events(&series, &config)?,
        DetectKind::Anomalies => classify_anomalies(&series, &config)?,
        DetectKind::ChangePoints => classify_change_points(&series, &config)?,
    };
    let method = args.method.unwrap_or_else(|| args.kind.label().to_string());
    emit(s, &files::detections_csv(&[(&method, found.times())]), out)
}

fn synth(s: &Settings, args: SynthArgs) -> CliResult<()> {
    let mut spec = match (&args.spec, &s.config.synth) {
        (Some(path), _) => load_synthetic_spec(path)?,
        (None, Some(spec)) => spec.clone(),
        (None, None) => {
            return Err(CliError::validation(
                "no synthetic spec: pass --spec or a config with [synth]",
            ))
        }
    };
    if let Some(seed) = s.seed {
        spec.seed = seed;
    }
    let (series, events) = generate_synthetic(&spec)?;
    let dir: &Path = &args.out_dir;
    files::write_text(&dir.join(files::SERIES_FILE), &files::series_csv(&series))?;
    files::write_text(&dir.join(files::EVENTS_FILE), &files::events_csv(&events))
}

fn scenarios(s: &Settings, args: ScenarioArgs, out: &mut dyn Write) -> CliResult<()> {
    let suite = scenario_suite();
    let sections = parallel_map(s.jobs, &suite, |sc| {
        let loaded = LoadedInstance {
            name: sc.name.to_string(),
            instance: sc.instance.clone(),
            warnings: Vec::new(),
        };
        report::instance_report(&loaded, &s.options, None).map(|(report, _)| ScenarioSection {
            number: sc.number,
            name: sc.name.to_string(),
            description: sc.description.to_string(),
            report,
        })
    })?
    .into_iter()
    .collect::<CliResult<Vec<_>>>()?;

    if let Some(dir) = &args.out_dir {
        for sc in &suite {
            files::write_instance_dir(&dir.join(sc.name), sc.name, &sc.instance)?;
        }
    }
    let doc = ScenariosDocument::new(sections);
    let labelled: Vec<(&str, &report::InstanceReport)> = doc
        .scenarios
        .iter()
        .map(|sc| (sc.name.as_str(), &sc.report))
        .collect();
    write_tables(
        s,
        &[
            ("metrics.csv", plot::metrics_table(labelled.iter().copied())),
            (
                "rankings.csv",
                plot::rankings_table(labelled.iter().copied()),
            ),
        ],
    )?;
    let text = match s.format {
        Format::Json => report::to_json(&doc),
        Format::Csv => plot::metrics_table(labelled.iter().copied()).to_csv(),
        Format::Md => report::scenarios_markdown(&doc),
    };
    emit(s, &text, out)
}
