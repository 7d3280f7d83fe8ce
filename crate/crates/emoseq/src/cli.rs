//! Command-line front end: each analysis pipeline is a subcommand emitting
//! plot-ready TSV with a `#` comment header carrying the parameters and the
//! effective seed, so every output is reproducible from its header alone.
//!
//! Data goes to `--output` (or stdout); diagnostics go to stderr, and the
//! exit code is nonzero exactly when an error occurred.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::correlations::{
    correlation_ratio, mi_report, pair_counts, pmi_matrix, three_step, ThreeStepConfig,
    DEFAULT_BOOTSTRAP_REPLICATES,
};
use crate::error::{Error, Result};
use crate::estimators::{cluster_curve, histogram, thread_means, threshold_grid};
use crate::ingest::{read_dataset, write_dataset, Format};
use crate::model::{BinSpec, Dataset, Field};
use crate::nullmodel::{global_shuffle, iid_resample, thread_shuffle, Seed};
use crate::synth::{SynthSpec, SynthTarget};

#[derive(Debug, Parser)]
#[command(
    name = "emoseq",
    version,
    about = "Order-sensitive statistics for sentiment-annotated discussion threads"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Histogram of p_pos or p_sub over all comments
    Hist(HistArgs),
    /// Per-thread mean distribution with an IID-resample baseline
    Means(MeansArgs),
    /// Mean subjective cluster size vs threshold, with shuffle baselines
    Clusters(ClustersArgs),
    /// PMI matrix of consecutive-pair correlation ratios
    Pmi(PmiArgs),
    /// Mutual information of consecutive pairs vs shuffle baselines
    Mi(MiArgs),
    /// Three-step correlations after two strongly positive/negative comments
    Threestep(ThreestepArgs),
    /// Generate a synthetic dataset from a TOML model file
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(arg: FormatArg) -> Format {
        match arg {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        }
    }
}

impl std::fmt::Display for FormatArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatArg::Jsonl => write!(f, "jsonl"),
            FormatArg::Csv => write!(f, "csv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Pos,
    Sub,
}

impl From<FieldArg> for Field {
    fn from(arg: FieldArg) -> Field {
        match arg {
            FieldArg::Pos => Field::Pos,
            FieldArg::Sub => Field::Sub,
        }
    }
}

impl std::fmt::Display for FieldArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldArg::Pos => write!(f, "pos"),
            FieldArg::Sub => write!(f, "sub"),
        }
    }
}

#[derive(Debug, Args)]
struct IoArgs {
    /// Input dataset file
    #[arg(long)]
    input: PathBuf,
    /// Input file format
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Write the TSV here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HistArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Which probability to histogram
    #[arg(long, value_enum, default_value_t = FieldArg::Pos)]
    field: FieldArg,
    /// Bin width for [0,1]
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
}

#[derive(Debug, Args)]
struct MeansArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Bin width for the per-thread means
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
    /// Keep only comments with p_sub >= this cut ("none" disables)
    #[arg(long, default_value = "0.5")]
    sub_cut: String,
    /// Seed for the IID-resample baseline (default: system entropy)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ClustersArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Threshold grid: "start:stop:step" or a comma-separated list
    #[arg(long, default_value = "0:1:0.05")]
    thresholds: String,
    /// Seed for the shuffle baselines (default: system entropy)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PmiArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Which probability to correlate
    #[arg(long, value_enum, default_value_t = FieldArg::Sub)]
    field: FieldArg,
    /// Bin width for [0,1]
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
    /// Mask entries whose row or column total is below this
    #[arg(long, default_value_t = 10)]
    min_count: u64,
}

#[derive(Debug, Args)]
struct MiArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Which probability to correlate
    #[arg(long, value_enum, default_value_t = FieldArg::Pos)]
    field: FieldArg,
    /// Bin width for [0,1]
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
    /// Seed for shuffles and bootstrap (default: system entropy)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ThreestepArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Bin width for [0,1]
    #[arg(long, default_value_t = 0.1)]
    bin_width: f64,
    /// Mask bins whose marginal count is below this
    #[arg(long, default_value_t = 10)]
    min_count: u64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// TOML file describing the model and thread shape
    #[arg(long)]
    model: PathBuf,
    /// Where to write the generated dataset
    #[arg(long)]
    output: PathBuf,
    /// Output file format
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Overrides the seed from the model file (default: file, then entropy)
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses arguments from the process environment and runs the command.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Hist(args) => emit(&args.io.output.clone(), cmd_hist(args)?),
        Command::Means(args) => emit(&args.io.output.clone(), cmd_means(args)?),
        Command::Clusters(args) => emit(&args.io.output.clone(), cmd_clusters(args)?),
        Command::Pmi(args) => emit(&args.io.output.clone(), cmd_pmi(args)?),
        Command::Mi(args) => emit(&args.io.output.clone(), cmd_mi(args)?),
        Command::Threestep(args) => emit(&args.io.output.clone(), cmd_threestep(args)?),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn emit(output: &Option<PathBuf>, text: String) -> Result<()> {
    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut writer = BufWriter::new(file);
            writer
                .write_all(text.as_bytes())
                .and_then(|()| writer.flush())
                .map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load(io: &IoArgs) -> Result<Dataset> {
    read_dataset(&io.input, io.format.into())
}

fn effective_seed(flag: Option<u64>) -> Seed {
    flag.map(Seed).unwrap_or_else(Seed::from_entropy)
}

/// Formats a float with 12 significant digits: deterministic and
/// plot-friendly, without artifacts like 0.15000000000000002.
fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("rounded float reparses");
    format!("{rounded}")
}

/// NaN-aware float cell: masked or undefined values print as "NA".
fn cell(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        num(v)
    }
}

fn parse_sub_cut(text: &str) -> Result<Option<f64>> {
    if text.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    let cut: f64 = text
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad sub-cut {text:?}")))?;
    if !(0.0..=1.0).contains(&cut) {
        return Err(Error::domain_at(cut, "--sub-cut"));
    }
    Ok(Some(cut))
}

fn parse_thresholds(text: &str) -> Result<Vec<f64>> {
    let bad = |t: &str| Error::InvalidArgument(format!("bad threshold grid {t:?}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(text));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad(text))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad(text))?;
        let step: f64 = parts[2].parse().map_err(|_| bad(text))?;
        threshold_grid(start, stop, step)
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad(text)))
            .collect()
    }
}

fn cmd_hist(args: HistArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let spec = BinSpec::new(args.bin_width)?;
    let hist = histogram(&dataset, args.field.into(), spec)?;
    let freqs = hist.frequencies();

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq hist input={} format={} field={} bin_width={}\n",
        args.io.input.display(),
        args.io.format,
        args.field,
        args.bin_width
    ));
    out.push_str(&format!(
        "# threads={} comments={}\n",
        dataset.thread_count(),
        dataset.comment_count()
    ));
    out.push_str("bin_lo\tbin_hi\tbin_center\tcount\tfrequency\n");
    for b in 0..spec.bins() {
        let (lo, hi) = spec.bounds(b);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            num(lo),
            num(hi),
            num(spec.center(b)),
            hist.counts()[b],
            num(freqs[b])
        ));
    }
    Ok(out)
}

fn cmd_means(args: MeansArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let spec = BinSpec::new(args.bin_width)?;
    let sub_cut = parse_sub_cut(&args.sub_cut)?;
    let seed = effective_seed(args.seed);

    let data = thread_means(&dataset, Field::Pos, sub_cut, spec)?;
    let baseline_dataset = iid_resample(&dataset, Field::Pos, seed);
    let baseline = thread_means(&baseline_dataset, Field::Pos, sub_cut, spec)?;
    let data_freq = data.histogram.frequencies();
    let base_freq = baseline.histogram.frequencies();

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq means input={} format={} bin_width={} sub_cut={} seed={}\n",
        args.io.input.display(),
        args.io.format,
        args.bin_width,
        args.sub_cut,
        seed
    ));
    out.push_str(&format!(
        "# threads={} excluded={} baseline_excluded={}\n",
        dataset.thread_count(),
        data.excluded_threads,
        baseline.excluded_threads
    ));
    out.push_str("bin_center\tcount\tfrequency\tbaseline_count\tbaseline_frequency\n");
    for b in 0..spec.bins() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            num(spec.center(b)),
            data.histogram.counts()[b],
            num(data_freq[b]),
            baseline.histogram.counts()[b],
            num(base_freq[b])
        ));
    }
    Ok(out)
}

fn cmd_clusters(args: ClustersArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let thresholds = parse_thresholds(&args.thresholds)?;
    let seed = effective_seed(args.seed);

    let data = cluster_curve(&dataset, &thresholds)?;
    let thread_shuffled = cluster_curve(&thread_shuffle(&dataset, seed.derive(1)), &thresholds)?;
    let global_shuffled = cluster_curve(&global_shuffle(&dataset, seed.derive(2)), &thresholds)?;

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq clusters input={} format={} thresholds={} seed={}\n",
        args.io.input.display(),
        args.io.format,
        args.thresholds,
        seed
    ));
    out.push_str("# mean subjective cluster size; NA where no clusters\n");
    out.push_str("T\tdata\tthread_shuffle\tglobal_shuffle\n");
    for (k, &t) in thresholds.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            num(t),
            cell(data.mean_sizes[k]),
            cell(thread_shuffled.mean_sizes[k]),
            cell(global_shuffled.mean_sizes[k])
        ));
    }
    Ok(out)
}

fn cmd_pmi(args: PmiArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let spec = BinSpec::new(args.bin_width)?;
    let pairs = pair_counts(&dataset, args.field.into(), spec)?;
    let c = correlation_ratio(&pairs, args.min_count)?;
    let pmi = pmi_matrix(&c);

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq pmi input={} format={} field={} bin_width={} min_count={}\n",
        args.io.input.display(),
        args.io.format,
        args.field,
        args.bin_width,
        args.min_count
    ));
    out.push_str(&format!(
        "# total_pairs={} defined_cells={} log_base=e\n",
        pairs.total_pairs(),
        pmi.defined_count()
    ));
    out.push_str("x_prev\\x_next");
    for b in 0..spec.bins() {
        out.push_str(&format!("\t{}", num(spec.center(b))));
    }
    out.push('\n');
    for i in 0..spec.bins() {
        out.push_str(&num(spec.center(i)));
        for j in 0..spec.bins() {
            out.push_str(&format!("\t{}", cell(pmi.get(i, j).unwrap_or(f64::NAN))));
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_mi(args: MiArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let spec = BinSpec::new(args.bin_width)?;
    let seed = effective_seed(args.seed);
    let report = mi_report(
        &dataset,
        args.field.into(),
        spec,
        seed,
        DEFAULT_BOOTSTRAP_REPLICATES,
    )?;

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq mi input={} format={} field={} bin_width={} seed={} bootstrap={}\n",
        args.io.input.display(),
        args.io.format,
        args.field,
        args.bin_width,
        seed,
        report.bootstrap_replicates
    ));
    out.push_str("# mutual information of consecutive pairs, nats\n");
    out.push_str("variant\tmi_plugin\tmi_corrected\tbootstrap_se\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            row.label.replace(' ', "_"),
            num(row.plugin),
            num(row.corrected),
            num(row.bootstrap_se)
        ));
    }
    Ok(out)
}

fn cmd_threestep(args: ThreestepArgs) -> Result<String> {
    let dataset = load(&args.io)?;
    let spec = BinSpec::new(args.bin_width)?;
    let config = ThreeStepConfig {
        min_count: args.min_count,
        ..ThreeStepConfig::default()
    };
    let curve = three_step(&dataset, Field::Pos, spec, config)?;

    let mut out = String::new();
    out.push_str(&format!(
        "# emoseq threestep input={} format={} bin_width={} min_count={}\n",
        args.io.input.display(),
        args.io.format,
        args.bin_width,
        args.min_count
    ));
    out.push_str(&format!(
        "# conditioning: both predecessors >= {} (plus) or <= {} (minus)\n",
        config.upper, config.lower
    ));
    out.push_str(&format!(
        "# triples={} plus_events={} minus_events={}\n",
        curve.triples, curve.plus_events, curve.minus_events
    ));
    out.push_str("# no-correlation reference level: C = 1\n");
    out.push_str("bin_center\tc_plus\tc_minus\tplus_count\tminus_count\tmarginal_count\n");
    for b in 0..spec.bins() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            num(spec.center(b)),
            cell(curve.c_plus[b]),
            cell(curve.c_minus[b]),
            curve.plus_counts[b],
            curve.minus_counts[b],
            curve.marginal_counts[b]
        ));
    }
    Ok(out)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.model).map_err(|e| Error::io(&args.model, e))?;
    let spec = SynthSpec::from_toml_str(&text)?;
    let seed = args
        .seed
        .or(spec.file_seed)
        .map(Seed)
        .unwrap_or_else(Seed::from_entropy);
    let dataset = spec.generate(seed)?;
    write_dataset(&dataset, &args.output, args.format.into())?;

    let mut summary = String::new();
    summary.push_str(&format!(
        "# emoseq synth model={} output={} format={} seed={}\n",
        args.model.display(),
        args.output.display(),
        args.format,
        seed
    ));
    summary.push_str(&format!(
        "# threads={} comments={}\n",
        dataset.thread_count(),
        dataset.comment_count()
    ));
    match &spec.target {
        SynthTarget::Iid(_) => {
            summary.push_str("# mi_oracle_nats=0 (independent draws)\n");
            summary.push_str("# three_step_targets: c_plus=1 c_minus=1 on every defined bin\n");
        }
        SynthTarget::Markov(model) => {
            match model.mi_oracle() {
                Ok(mi) => summary.push_str(&format!("# mi_oracle_nats={}\n", num(mi))),
                Err(e) => summary.push_str(&format!("# mi_oracle_nats=NA ({e})\n")),
            }
            let top = model.states_at_least(0.9);
            let bottom = model.states_at_most(0.1);
            if !top.is_empty() && !bottom.is_empty() {
                match model.three_step_oracle(&top, &bottom) {
                    Ok(oracle) => {
                        for (k, &state) in model.states().iter().enumerate() {
                            summary.push_str(&format!(
                                "# three_step_target state={state} c_plus={} c_minus={}\n",
                                cell(oracle.c_plus[k]),
                                cell(oracle.c_minus[k])
                            ));
                        }
                    }
                    Err(e) => summary.push_str(&format!("# three_step_targets=NA ({e})\n")),
                }
            } else {
                summary.push_str(
                    "# three_step_targets=NA (no states beyond the 0.9/0.1 cuts)\n",
                );
            }
        }
    }
    emit(&None, summary)
}
