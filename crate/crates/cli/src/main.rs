use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use histctx::encoder::{import_external_embeddings, write_encoded};
use histctx::experiment::{
    render_table, run_designed, run_matrix, train_one, DesignedConfig, EncodedCorpus,
    ExperimentConfig, ResultMatrix, SplitBy, TableFormat,
};
use histctx::fixture::{synth_fixture, FixtureSpec};
use histctx::learning::TrainConfig;
use histctx::mining::{corpus_stats, load_labeled_pairs, mine_repository, GitRepo, LabelRule};
use histctx::model::{load_corpus, save_corpus};
use histctx::{AggregationScheme, ContextSelection, Task};

#[derive(Parser)]
#[command(
    name = "histctx",
    version,
    about = "Version-history context for method representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine method histories and call contexts from a git repository.
    Mine {
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Project name; defaults to the repository directory name.
        #[arg(long)]
        project: Option<String>,
    },
    /// Per-project corpus statistics.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Build a synthetic git repository from a fixture spec.
    Fixture {
        /// JSON fixture spec; a random one is generated from the seed if absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a corpus into its five vectors per method.
    Encode {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 128)]
        dim: usize,
        #[arg(long, default_value_t = 512)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Import these embeddings instead of fitting the built-in encoder.
        #[arg(long)]
        external: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and test one head.
    Train {
        #[arg(long)]
        task: Task,
        /// concat, maxpool, diff_concat or baseline.
        #[arg(long, default_value = "concat")]
        scenario: String,
        /// Context set such as `vh`, `ch`, `vh+ch+days` or `none`.
        #[arg(long, default_value = "vh")]
        contexts: ContextSelection,
        #[arg(long)]
        enc: PathBuf,
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value = "pair")]
        split_by: SplitBy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full experiment matrix described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        split_by: Option<SplitBy>,
    },
    /// Render a stored result matrix.
    Report {
        /// Output directory of `run`, or the matrix file itself.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "text")]
        format: TableFormat,
    },
    /// Designed synthetic experiment: baseline against version-history concatenation.
    Demo {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// 1 makes histories fully informative, 0 random.
        #[arg(long, default_value_t = 1.0)]
        informativeness: f64,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Mine { repo, out, project } => mine(&repo, &out, project),
        Command::Stats { corpus } => {
            let corpus = load_corpus(&corpus)?;
            print!("{}", corpus_stats(&corpus)?.render());
            Ok(())
        }
        Command::Fixture { spec, seed, out } => {
            let spec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<FixtureSpec>(&text)
                        .with_context(|| format!("parsing {}", path.display()))?
                }
                None => FixtureSpec::random(seed),
            };
            let fx = synth_fixture(&spec, seed, &out)?;
            println!("{} commits in {}", fx.commits.len(), fx.path.display());
            Ok(())
        }
        Command::Encode {
            corpus,
            dim,
            budget,
            seed,
            external,
            out,
        } => {
            let corpus = load_corpus(&corpus)?;
            let mut enc = EncodedCorpus::encode(&corpus, dim, budget, seed)?;
            if let Some(path) = external {
                let mut found = import_external_embeddings(&path, &enc.ids, dim)?;
                let mut methods = Vec::with_capacity(enc.ids.len());
                for id in &enc.ids {
                    match found.remove(id) {
                        Some(m) => methods.push(m),
                        None => bail!(
                            "{} has no embedding for {}",
                            path.display(),
                            id.qualified_name
                        ),
                    }
                }
                enc = EncodedCorpus::new(enc.ids, methods);
            }
            let items: Vec<_> = enc
                .ids
                .iter()
                .cloned()
                .zip(enc.methods.iter().cloned())
                .collect();
            write_encoded(BufWriter::new(create(&out)?), &items)?;
            println!("encoded {} methods at D = {dim}", items.len());
            Ok(())
        }
        Command::Train {
            task,
            scenario,
            contexts,
            enc,
            pairs,
            seed,
            lr,
            epochs,
            batch_size,
            split_by,
            out,
        } => {
            let enc = EncodedCorpus::load(&enc)?;
            let pairs = match (task, pairs) {
                (Task::Clone, Some(p)) => load_labeled_pairs(&p, &enc.ids, &LabelRule::default())?,
                (Task::Clone, None) => bail!("clone training needs --pairs"),
                (Task::Classify, _) => Vec::new(),
            };
            let agg = match scenario.as_str() {
                "baseline" => None,
                s => Some(s.parse::<AggregationScheme>()?),
            };
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                batch_size,
                seed,
                ..TrainConfig::default()
            };
            let model = train_one(&enc, &pairs, task, contexts, agg, split_by, &cfg)?;
            model.save(&out)?;
            let t = model.test;
            println!(
                "best epoch {}; test P {:.3} R {:.3} F1 {:.3} Acc {:.3}",
                model.best_epoch, t.precision, t.recall, t.f1, t.accuracy
            );
            Ok(())
        }
        Command::Run { config, split_by } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = split_by {
                cfg.split_by = s;
            }
            let run = run_matrix(&cfg)?;
            print!("{}", render_table(&run.matrix, TableFormat::Text)?);
            eprintln!(
                "{} cells trained, {} reused; results in {}",
                run.cells_trained,
                run.cells_reused,
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Report { matrix, format } => {
            let m = ResultMatrix::load(&matrix)?;
            print!("{}", render_table(&m, format)?);
            Ok(())
        }
        Command::Demo {
            seed,
            informativeness,
        } => {
            if !(0.0..=1.0).contains(&informativeness) {
                bail!("informativeness must lie in [0, 1]");
            }
            let out = run_designed(&DesignedConfig::new(seed, informativeness))?;
            print!("{}", render_table(&out.matrix, TableFormat::Text)?);
            println!(
                "median F1 over {} seeds: baseline {:.3}, version history {:.3}, delta {:+.3}",
                out.config.runs,
                out.baseline_median,
                out.history_median,
                out.delta()
            );
            Ok(())
        }
    }
}

fn mine(repo: &Path, out: &Path, project: Option<String>) -> Result<()> {
    let git = GitRepo::open(repo)?;
    let project = match project {
        Some(p) => p,
        None => repo
            .canonicalize()?
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "project".into()),
    };
    let corpus = mine_repository(&git, &project)?;
    save_corpus(out, &corpus)?;
    println!("{} methods mined from {project}", corpus.len());
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}
