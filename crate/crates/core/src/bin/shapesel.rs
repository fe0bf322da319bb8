use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use shapesel::dataset::{
    load_ucr, resample_dataset, write_metadata, write_ucr_tsv, Delimiter, LabeledDataset,
};
use shapesel::distance::{dba_dtw_distance, shapelet_distance, Measure};
use shapesel::leep::{leep, LeepReport, PredictionMatrix};
use shapesel::matrix_profile::{cross_class_profiles_with, ConcatenatedClassSeries, Metric};
use shapesel::pipeline::{
    build_super_dataset_with, rank_sources_with, OversampleMode, RankConfig, SourceRanking,
    SuperConfig, DEFAULT_NUM_SOURCES,
};
use shapesel::shapelet::{discover_with, DiscoveryConfig, DEFAULT_TOP_K, DEFAULT_WINDOW};

#[derive(Parser)]
#[command(name = "shapesel", version, about = "Shapelet-based source selection for time series transfer learning")]
struct Cli {
    /// Input files are whitespace-separated instead of tab-separated.
    #[arg(long, global = true)]
    whitespace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover per-class shapelets and print them as JSON.
    Shapelets {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        discovery: DiscoveryArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between one source and one target dataset.
    Distance {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value = "min-shapelet")]
        measure: String,
        #[command(flatten)]
        discovery: DiscoveryArgs,
    },
    /// Rank a corpus of candidate sources against a target.
    Rank {
        #[arg(long)]
        target: PathBuf,
        /// Candidate files, or directories scanned for *.tsv.
        #[arg(long, num_args = 1.., required = true)]
        candidates: Vec<PathBuf>,
        #[arg(long, default_value = "min-shapelet")]
        measure: String,
        #[command(flatten)]
        discovery: DiscoveryArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge sources into a balanced super dataset.
    BuildSuper {
        #[arg(long)]
        target: PathBuf,
        /// Source files in label-offset order.
        #[arg(long, num_args = 1.., conflicts_with = "ranking")]
        sources: Vec<PathBuf>,
        /// Ranking JSON from `rank`; the top --num-sources entries are used.
        #[arg(long, requires = "candidates")]
        ranking: Option<PathBuf>,
        /// Where to find the ranked datasets (files or directories).
        #[arg(long, num_args = 1..)]
        candidates: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NUM_SOURCES)]
        num_sources: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Oversample::Cycle)]
        oversample: Oversample,
        #[arg(long)]
        out: PathBuf,
    },
    /// LEEP score from a prediction CSV (label,p0,p1,...).
    Leep {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the own-class or other-class profile of one class.
    Mp {
        #[arg(long)]
        dataset: PathBuf,
        /// Class id (0-based, after label remapping).
        #[arg(long)]
        class: usize,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, value_enum, default_value_t = Profile::Other)]
        profile: Profile,
        #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
        metric: MetricArg,
    },
    /// Resize a dataset with Gaussian smoothing and linear interpolation.
    Resample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        length: usize,
        /// Output TSV; metadata goes next to it with a .json extension.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct DiscoveryArgs {
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Shapelet candidates kept per class.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
}

impl DiscoveryArgs {
    fn config(self) -> DiscoveryConfig {
        DiscoveryConfig {
            window: self.window,
            k: self.top_k,
            metric: self.metric.into(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oversample {
    Cycle,
    Seeded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Own,
    Other,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Znorm,
    Manhattan,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Znorm => Metric::ZNormEuclidean,
            MetricArg::Manhattan => Metric::Manhattan,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .downcast_ref::<shapesel::Error>()
                .map_or("error", shapesel::Error::kind);
            let line = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{line}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let delim = if cli.whitespace {
        Delimiter::Whitespace
    } else {
        Delimiter::Tab
    };
    let load = |p: &Path| -> Result<LabeledDataset> { Ok(load_ucr(p, delim)?) };

    match cli.command {
        Command::Shapelets {
            dataset,
            discovery,
            out,
        } => {
            let ds = load(&dataset)?;
            let set = discover_with(&ds, &discovery.config())?;
            emit(out.as_deref(), &set.to_json()?)
        }
        Command::Distance {
            source,
            target,
            measure,
            discovery,
        } => {
            let measure: Measure = measure.parse()?;
            let (src, tgt) = (load(&source)?, load(&target)?);
            let dist = if measure.uses_shapelets() {
                let cfg = discovery.config();
                shapelet_distance(measure, &discover_with(&src, &cfg)?, &discover_with(&tgt, &cfg)?)?
            } else {
                dba_dtw_distance(&resample_dataset(&src, tgt.length())?, &tgt)?
            };
            emit(None, &serde_json::to_string_pretty(&dist)?)
        }
        Command::Rank {
            target,
            candidates,
            measure,
            discovery,
            format,
            out,
        } => {
            let measure: Measure = measure.parse()?;
            let tgt = load(&target)?;
            let pool = collect_files(&candidates)?
                .iter()
                .map(|p| load(p))
                .collect::<Result<Vec<_>>>()?;
            let config = RankConfig {
                discovery: discovery.config(),
                ..RankConfig::new(measure, discovery.window, discovery.top_k)
            };
            let ranking = rank_sources_with(&tgt, &pool, &config)?;
            let text = match format {
                Format::Json => ranking.to_json()?,
                Format::Csv => ranking.to_csv(),
            };
            emit(out.as_deref(), &text)
        }
        Command::BuildSuper {
            target,
            sources,
            ranking,
            candidates,
            num_sources,
            seed,
            oversample,
            out,
        } => {
            let tgt = load(&target)?;
            let selected = match ranking {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let ranking: SourceRanking = serde_json::from_str(&text)?;
                    let by_name = collect_files(&candidates)?
                        .iter()
                        .map(|p| load(p))
                        .collect::<Result<Vec<_>>>()?;
                    ranking
                        .top(num_sources)
                        .into_iter()
                        .map(|name| {
                            by_name
                                .iter()
                                .find(|d| d.name() == name)
                                .cloned()
                                .with_context(|| format!("ranked source {name:?} not found"))
                        })
                        .collect::<Result<Vec<_>>>()?
                }
                None if sources.is_empty() => bail!("give --sources or --ranking"),
                None => sources.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?,
            };
            let config = SuperConfig {
                seed,
                mode: match oversample {
                    Oversample::Cycle => OversampleMode::Cycle,
                    Oversample::Seeded => OversampleMode::Seeded,
                },
            };
            let sup = build_super_dataset_with(&tgt, &selected, &config)?;
            sup.write(&out)?;
            emit(None, &sup.manifest_json()?)
        }
        Command::Leep { predictions, out } => {
            let preds = PredictionMatrix::load_csv(&predictions)?;
            let score = leep(&preds);
            for c in &score.empty_source_classes {
                eprintln!("warning: source class {c} has zero marginal; using a uniform conditional");
            }
            let report = LeepReport::new(&score, &preds);
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::Mp {
            dataset,
            class,
            window,
            profile,
            metric,
        } => {
            let ds = load(&dataset)?;
            let per_class = ConcatenatedClassSeries::per_class(&ds, window)?;
            let (own, other) = cross_class_profiles_with(&per_class, class, metric.into())?;
            let mp = match profile {
                Profile::Own => own,
                Profile::Other => other,
            };
            emit(None, &serde_json::to_string(&mp)?)
        }
        Command::Resample { input, length, out } => {
            let ds = resample_dataset(&load(&input)?, length)?;
            write_ucr_tsv(&ds, &out)?;
            write_metadata(&ds, out.with_extension("json"))?;
            Ok(())
        }
    }
}

/// Expands directories into their `*.tsv` files, sorted by path.
fn collect_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == "tsv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no candidate files found");
    }
    Ok(files)
}

/// Writes `text` to `out` or stdout, newline-terminated.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    let text = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    match out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
