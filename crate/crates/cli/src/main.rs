//! `itgaze`: corpus checks, agreement, feature dumps, cross-validated
//! experiments, the gaze ablation and significance tests from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use itgaze::evaluation::{read_report_csv, render_table, DEFAULT_RESAMPLES};
use itgaze::experiments::{
    agreement_report, compare_predictions, config_features, feature_dump, render_experiment,
    run_ablation, run_experiment, train_final, write_artifacts, Dataset, ExperimentConfig, TagSource,
};
use itgaze::{Error, Label, Result};

#[derive(Debug, Parser)]
#[command(name = "itgaze", version, about = "Classify \"it\" from gaze and linguistic features")]
struct Cli {
    /// Experiment config (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed [default: 20].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Root directory for experiment artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the number of cross-validation folds [default: 10].
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the corpus and annotations and print a summary.
    Ingest,
    /// Cohen's κ, raw agreement and class distributions.
    Agreement {
        /// Annotation file; defaults to the config's `annotations`.
        annotations: Option<PathBuf>,
    },
    /// Write the feature dump for every retained instance.
    Features,
    /// Select features by cross-validation, then fit on all instances and
    /// save the model.
    Train,
    /// Cross-validate one or more configs and write their artifacts.
    Evaluate {
        /// More configs, run after `--config`.
        configs: Vec<PathBuf>,
    },
    /// Baseline plus each gaze group × region block.
    Ablate,
    /// Paired bootstrap between two `predictions.csv` files.
    Significance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
        resamples: usize,
    },
    /// Render `report.csv` files as one table.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    fs::write(path, content).map_err(|e| Error::Io { path: path.into(), source: e })
}

impl Cli {
    fn load(&self, path: &Path) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.train.seed = seed;
        }
        if let Some(k) = self.folds {
            cfg.folds = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn config(&self) -> Result<ExperimentConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| invalid("this command needs --config"))?;
        self.load(path)
    }

    fn run(&self) -> Result<String> {
        match &self.command {
            Command::Ingest => self.ingest(),
            Command::Agreement { annotations } => {
                let path = match annotations {
                    Some(p) => p.clone(),
                    None => self
                        .config()?
                        .paths
                        .annotations
                        .ok_or_else(|| invalid("no annotation file given and the config has none"))?,
                };
                let (_, table) = agreement_report(&path)?;
                Ok(table)
            }
            Command::Features => {
                let cfg = self.config()?;
                let data = Dataset::load(&cfg.paths, cfg.train.seed)?;
                let table = config_features(&cfg, &data)?;
                let path = cfg.output_dir(&self.out).join("features.csv");
                write_file(&path, &feature_dump(&data.uids(), &data.labels(), &table)?)?;
                Ok(format!(
                    "{} instances × {} features → {}\n",
                    table.rows.len(),
                    table.all_names().count(),
                    path.display()
                ))
            }
            Command::Train => {
                let cfg = self.config()?;
                let data = Dataset::load(&cfg.paths, cfg.train.seed)?;
                let outcome = run_experiment(&cfg, &data)?;
                let model = train_final(&cfg, &data, &outcome)?;
                let dir = write_artifacts(&cfg, &outcome, &self.out)?;
                let path = dir.join("model.txt");
                model.save(&path)?;
                Ok(format!(
                    "{}model: {} columns → {}\n",
                    render_experiment(&cfg, &outcome),
                    model.params.n_columns(),
                    path.display()
                ))
            }
            Command::Evaluate { configs } => self.evaluate(configs),
            Command::Ablate => {
                let cfg = self.config()?;
                let data = Dataset::load(&cfg.paths, cfg.train.seed)?;
                let grid = run_ablation(&cfg, &data)?;
                let dir = cfg.output_dir(&self.out);
                write_file(&dir.join("ablation.csv"), &grid.to_csv())?;
                let text = grid.render();
                write_file(&dir.join("ablation.txt"), &text)?;
                Ok(text)
            }
            Command::Significance { a, b, resamples } => {
                let s = compare_predictions(a, b, *resamples, self.seed.unwrap_or(20))?;
                Ok(format!(
                    "delta weighted F1\t{:.3}\np\t{:.4}\n95% CI\t({:.3}; {:.3})\nresamples\t{}\n",
                    s.delta, s.p_value, s.ci_low, s.ci_high, s.resamples
                ))
            }
            Command::Report { reports } => {
                let mut rows = Vec::new();
                for p in reports {
                    rows.extend(read_report_csv(p)?);
                }
                Ok(render_table(&rows))
            }
        }
    }

    fn ingest(&self) -> Result<String> {
        let cfg = self.config()?;
        let data = Dataset::load(&cfg.paths, cfg.train.seed)?;
        let s = &data.summary;
        let mut out = String::new();
        let _ = writeln!(out, "tokens\t{}", s.tokens);
        let _ = writeln!(out, "types\t{}", s.types);
        let _ = writeln!(out, "participants\t{}", s.participants);
        let _ = writeln!(out, "trials\t{}", s.trials);
        let _ = writeln!(out, "sentences\t{}", s.sentences);
        let _ = writeln!(out, "paragraphs\t{}", s.paragraphs);
        let _ = writeln!(out, "instances of \"it\"\t{}", s.instances);
        let _ = writeln!(out, "annotated\t{}", data.annotations.len());
        let _ = writeln!(out, "retained\t{}", data.retained.len());
        let labels = data.labels();
        for l in Label::ALL {
            let _ = writeln!(out, "  {l}\t{}", labels.iter().filter(|x| **x == l).count());
        }
        let tags = match data.tag_source {
            TagSource::File => "tagged file".to_string(),
            TagSource::Trained { sentences } => format!("tagger trained on {sentences} sentences"),
            TagSource::Fallback => "built-in fallback tagger".to_string(),
        };
        let _ = writeln!(out, "POS tags\t{tags}");
        Ok(out)
    }

    fn evaluate(&self, extra: &[PathBuf]) -> Result<String> {
        let paths: Vec<&PathBuf> = self.config.iter().chain(extra).collect();
        if paths.is_empty() {
            return Err(invalid("evaluate needs --config or config paths"));
        }
        let mut out = String::new();
        let mut rows = Vec::new();
        let mut cached: Option<(ExperimentConfig, Dataset)> = None;
        for p in paths {
            let cfg = self.load(p)?;
            // Consecutive configs usually share their inputs.
            let reuse = cached
                .as_ref()
                .is_some_and(|(c, _)| c.paths == cfg.paths && c.train.seed == cfg.train.seed);
            if !reuse {
                cached = Some((cfg.clone(), Dataset::load(&cfg.paths, cfg.train.seed)?));
            }
            let data = &cached.as_ref().expect("dataset loaded above").1;
            let outcome = run_experiment(&cfg, data)?;
            let dir = write_artifacts(&cfg, &outcome, &self.out)?;
            let _ = writeln!(out, "{}\n{}", dir.display(), render_experiment(&cfg, &outcome));
            rows.push(outcome.row(&cfg));
        }
        if rows.len() > 1 {
            out += &render_table(&rows);
        }
        Ok(out)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.run() {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
