use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blindprint::classify::{
    default_grid, evaluate_holdout, kfold_cv_seeded, load_model, save_model, train, ClassifierKind, DEFAULT_CV_SEED,
};
use blindprint::dataset::{generate_dataset, load_dataset, load_manifest, write_dataset, Dataset, Scale};
use blindprint::harness::{
    matrix_seed, measure_ids, misclass_report, privacy_audit, run_experiment, split_seed, to_holdout, to_labeled,
    word_of, write_tables, AuditConfig, AuditSample, CvSummary, ExperimentConfig, Split, DEFAULT_AUDIT_M,
    DEFAULT_AUDIT_THRESHOLD_DB, DEFAULT_SEED, SPLIT_FILE,
};
use blindprint::recovery::SolverConfig;
use blindprint::seed;
use blindprint::sensing::{Domain, MeasurementSet, SensingMatrix};
use blindprint::wavelet::{Dwt2, DEFAULT_LEVELS};
use blindprint::{Error, Result};

#[derive(Parser)]
#[command(name = "blindprint", version, about = "Print-error detection from compressive measurements")]
struct Cli {
    /// Use the full word list (17576 words, 15000/2576 split).
    #[arg(long, global = true)]
    full: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// `full`, `words:N` or a fraction such as `0.1`.
    #[arg(long, default_value = "words:2500")]
    scale: Scale,
}

#[derive(Subcommand)]
enum Command {
    /// Render the good/bad image corpus.
    Generate {
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure every image of a corpus, one archive per M.
    Compress {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [200, 100, 50, 20, 10])]
        m: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "wavelet")]
        domain: Domain,
        #[arg(long, default_value_t = DEFAULT_LEVELS)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate and fit classifiers on the training words of one archive.
    Train {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = ClassifierKind::ROSTER)]
        classifiers: Vec<ClassifierKind>,
        /// Existing `word,set` file; drawn from `--seed` when absent.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score saved models on the test words and write the report tables.
    Evaluate {
        #[arg(long)]
        measurements: PathBuf,
        /// Directory of `{classifier}_m{M}.json` files.
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// Corpus directory, for the per-error breakdown.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct images with the key and report PSNR per M.
    Audit {
        /// Image ids such as `bad-FOX`; an empty list writes an empty report.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_AUDIT_M)]
        m: Vec<usize>,
        /// Corpus directory; generated from `--seed`/`--scale` when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long, default_value = "wavelet")]
        domain: Domain,
        #[arg(long, default_value_t = DEFAULT_AUDIT_THRESHOLD_DB)]
        threshold_db: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the whole sweep described by a config file.
    RunAll {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scale_of(full: bool, s: Scale) -> Scale {
    if full {
        Scale::Full
    } else {
        s
    }
}

fn words_in(set: &MeasurementSet) -> Vec<String> {
    let mut words: Vec<String> = set.records.iter().map(|r| word_of(&r.image_id).to_string()).collect();
    words.sort_unstable();
    words.dedup();
    words
}

fn select(set: &MeasurementSet, ids: &[String]) -> Result<Vec<blindprint::sensing::MeasurementRecord>> {
    let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
    let records: Vec<_> = set.records.iter().filter(|r| wanted.contains(r.image_id.as_str())).cloned().collect();
    if records.len() != wanted.len() {
        return Err(Error::InvalidArgument(format!(
            "archive holds {} of the {} split images",
            records.len(),
            wanted.len()
        )));
    }
    Ok(records)
}

fn generate(full: bool, args: ScaleArgs, out: &Path) -> Result<()> {
    let ds = generate_dataset(args.seed, scale_of(full, args.scale)).map_err(|e| e.in_stage("generate"))?;
    write_dataset(&ds, out).map_err(|e| e.in_stage("generate"))?;
    println!("wrote {} images to {}", ds.len(), out.display());
    Ok(())
}

fn compress(data: &Path, ms: &[usize], seed: u64, domain: Domain, levels: usize, out: &Path) -> Result<()> {
    let run = || -> Result<()> {
        let ds = load_dataset(data)?;
        let ids: Vec<String> = ds.manifest.entries.iter().map(|e| e.image_id.clone()).collect();
        let dwt = Dwt2::new(levels);
        fs::create_dir_all(out)?;
        for &m in ms {
            let mseed = matrix_seed(seed, m);
            let matrix = SensingMatrix::generate(m, domain.signal_len(), mseed, domain)?;
            let records = measure_ids(&matrix, &dwt, &ds, &ids)?;
            let path = out.join(format!("m{m}.csv"));
            MeasurementSet { m, seed: mseed, domain, records }.write_csv(&path)?;
            println!("M={m}: {}", path.display());
        }
        Ok(())
    };
    run().map_err(|e| e.in_stage("compress"))
}

fn train_cmd(
    full: bool,
    measurements: &Path,
    kinds: &[ClassifierKind],
    split: Option<&Path>,
    global_seed: u64,
    folds: usize,
    out: &Path,
) -> Result<()> {
    let run = || -> Result<()> {
        let set = MeasurementSet::read_csv(measurements)?;
        let split = match split {
            Some(p) => Split::read_csv(p)?,
            None => {
                let words = words_in(&set);
                let scale = if full { Scale::Full } else { Scale::Words(words.len()) };
                let (tr, te) = ExperimentConfig { scale, ..ExperimentConfig::default() }.split_sizes()?;
                Split::new(&words, tr, te, split_seed(global_seed))?
            }
        };
        fs::create_dir_all(out.join("models"))?;
        split.write_csv(&out.join(SPLIT_FILE))?;
        let data = to_labeled(&select(&set, &split.train_ids())?)?;
        let cv_seed = seed::derive(global_seed, DEFAULT_CV_SEED);
        for &kind in kinds {
            let cv = kfold_cv_seeded(kind, &data, folds, &default_grid(kind, set.m), cv_seed)?;
            let model = train(kind, &data, &cv.best)?;
            let path = out.join(format!("models/{kind}_m{}.json", set.m));
            save_model(&model, &path)?;
            println!("{kind} M={}: cv {:.2}% with {} -> {}", set.m, cv.best_accuracy, cv.best, path.display());
        }
        Ok(())
    };
    run().map_err(|e| e.in_stage("train"))
}

fn evaluate(measurements: &Path, models: &Path, split: &Path, data: &Path, out: &Path) -> Result<()> {
    let run = || -> Result<()> {
        let set = MeasurementSet::read_csv(measurements)?;
        let split = Split::read_csv(split)?;
        let manifest = load_manifest(data)?;
        let test = to_holdout(&select(&set, &split.test_ids())?)?;
        let train_ids = split.train_ids();
        let mut reports = Vec::new();
        let mut roster = Vec::new();
        for kind in ClassifierKind::ALL {
            let path = models.join(format!("{kind}_m{}.json", set.m));
            if !path.exists() {
                continue;
            }
            let model = load_model(&path)?;
            let report = evaluate_holdout(&model, set.m, &train_ids, &test)?;
            println!(
                "{kind} M={}: {:.2}% (bad->good {}, good->bad {})",
                set.m,
                report.accuracy,
                report.confusion.bad_as_good(),
                report.confusion.good_as_bad()
            );
            roster.push(kind);
            reports.push(report);
        }
        if reports.is_empty() {
            return Err(Error::InvalidArgument(format!("no models for M={} in {}", set.m, models.display())));
        }
        let misclass: Vec<_> = reports.iter().map(|r| misclass_report(r, &manifest)).collect();
        write_tables(out, &[set.m], &roster, &[] as &[CvSummary], &reports, &misclass)?;
        Ok(())
    };
    run().map_err(|e| e.in_stage("evaluate"))
}

#[allow(clippy::too_many_arguments)]
fn audit(
    full: bool,
    ids: &[String],
    ms: &[usize],
    data: Option<&Path>,
    scale: ScaleArgs,
    domain: Domain,
    threshold_db: f64,
    out: &Path,
) -> Result<()> {
    let run = || -> Result<()> {
        let ids: Vec<String> = ids.iter().filter(|s| !s.is_empty()).cloned().collect();
        let samples = if ids.is_empty() {
            Vec::new()
        } else {
            let ds: Dataset = match data {
                Some(d) => load_dataset(d)?,
                None => generate_dataset(scale.seed, scale_of(full, scale.scale))?,
            };
            AuditSample::from_dataset(&ds, &ids)?
        };
        let cfg = AuditConfig {
            global_seed: scale.seed,
            m_list: ms.to_vec(),
            domain,
            levels: DEFAULT_LEVELS,
            solver: SolverConfig::default(),
            threshold_db,
        };
        let report = privacy_audit(&cfg, &samples, Some(out))?;
        for (m, psnr) in &report.mean_psnr {
            let (illegible, total) = report.illegible_at(*m);
            println!("M={m:>4}: mean PSNR {psnr:6.2} dB, illegible {illegible}/{total}");
        }
        println!("audit {}", if report.pass { "PASS" } else { "FAIL" });
        Ok(())
    };
    run().map_err(|e| e.in_stage("audit"))
}

fn run_all(full: bool, config: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config).map_err(|e| e.in_stage("config"))?;
    if full {
        cfg.scale = Scale::Full;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    let record = run_experiment(&cfg)?;
    for r in &record.reports {
        println!("{} M={}: {:.2}%", r.classifier, r.m, r.accuracy);
    }
    for f in &record.failures {
        eprintln!("failed: {} M={}: {}", f.classifier, f.m, f.error);
    }
    println!("tables in {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let full = cli.full;
    let result = match cli.command {
        Command::Generate { scale, out } => generate(full, scale, &out),
        Command::Compress { data, m, seed, domain, levels, out } => compress(&data, &m, seed, domain, levels, &out),
        Command::Train { measurements, classifiers, split, seed, folds, out } => {
            train_cmd(full, &measurements, &classifiers, split.as_deref(), seed, folds, &out)
        }
        Command::Evaluate { measurements, models, split, data, out } => {
            evaluate(&measurements, &models, &split, &data, &out)
        }
        Command::Audit { ids, m, data, scale, domain, threshold_db, out } => {
            audit(full, &ids, &m, data.as_deref(), scale, domain, threshold_db, &out)
        }
        Command::RunAll { config, out } => run_all(full, &config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
