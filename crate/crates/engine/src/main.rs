use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cogspeech::batch::{score_corpus, write_outputs};
use cogspeech::config::EngineConfig;
use cogspeech::corpus::read_manifest;
use cogspeech::features_csv::{read_features, to_score_table, write_features_file};
use cogspeech::model_io::{save_classifier, save_grammar};
use cogspeech::replay::{replay_manifest, ReplayOptions};
use cogspeech::report::{coefficient_table, compare_markdown, corpus_markdown, metrics_table, severity_markdown};
use cogspeech::resources::load_resources;
use cogspeech::synth::{generate_corpus, topic_embeddings, write_corpus, SynthConfig, EMBEDDING_SEED};
use cogspeech::train::{
    chunk_dataset, grammar_coefficients, grammar_dataset, load_labelled_audio, load_labelled_transcripts,
    train_acoustic, train_grammar, DEFAULT_FOLDS, DEFAULT_SELECT_K,
};
use cogspeech_core::analysis::severity_analysis;
use cogspeech_core::models::ForestHyper;

#[derive(Parser)]
#[command(name = "cogspeech", version, about = "Speech biomarker scoring for cognitive health")]
struct Cli {
    /// Engine config file (TOML); environment overrides apply on top.
    #[arg(long, global = true, env = "COGSPEECH_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupBy {
    Severity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coefficients {
    Published,
    Fitted,
}

#[derive(Subcommand)]
enum Command {
    /// Score every manifest sample; writes features.csv and summary.csv.
    Score {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Markdown report over a features.csv.
    Analyze {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grouped statistics and pairwise t-tests.
    Stats {
        #[arg(long, value_enum, default_value = "severity")]
        group_by: GroupBy,
        #[arg(long)]
        scores: PathBuf,
    },
    /// Side-by-side summary of two features.csv files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "A")]
        a_name: String,
        #[arg(long, default_value = "B")]
        b_name: String,
    },
    /// Run the WebSocket server.
    Serve,
    /// Write a synthetic corpus.
    Synth {
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 30.0)]
        duration_s: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the topic embeddings used by the bundled lexicon.
        #[arg(long)]
        embeddings_out: Option<PathBuf>,
    },
    /// Train the prosody and pronunciation forests on manifest audio.
    TrainAcoustic {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SELECT_K)]
        select_k: usize,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit the grammar standardization and compare classifiers.
    TrainGrammar {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "published")]
        coefficients: Coefficients,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stream manifest samples through a running server.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "ws://127.0.0.1:8765/ws")]
        url: String,
        #[arg(long)]
        out: PathBuf,
        /// Recording-clock speed-up; 0 sends as fast as possible.
        #[arg(long, default_value_t = 0.0)]
        speed: f64,
    },
    /// Print the effective config as TOML.
    Config,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = EngineConfig::load_with_env(cli.config.as_deref())?;
    match cli.command {
        Command::Score { manifest, out } => {
            let rows = read_manifest(&manifest)?;
            let res = load_resources(&cfg)?;
            let scores = score_corpus(&rows, &res, &cfg.batch, &cfg.analysis.cutoffs)?;
            write_outputs(&out, &scores)?;
            for s in &scores.skipped {
                eprintln!("skipped {}: {}", s.sample_id, s.reason);
            }
            println!("scored {} of {} samples into {}", scores.rows.len(), rows.len(), out.display());
            return Ok(if scores.skipped.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Analyze { scores, out } => {
            let table = to_score_table(&read_features(&scores)?);
            let a = &cfg.analysis;
            let labelled = table.rows.iter().any(|r| r.mmse.is_some());
            let severity =
                if labelled { Some(severity_analysis(&table, &a.cutoffs, a.alpha, a.ttest)?) } else { None };
            write_or_print(out.as_deref(), &corpus_markdown(&table, severity.as_ref()))?;
        }
        Command::Stats { group_by: GroupBy::Severity, scores } => {
            let table = to_score_table(&read_features(&scores)?);
            let a = &cfg.analysis;
            print!("{}", severity_markdown(&severity_analysis(&table, &a.cutoffs, a.alpha, a.ttest)?));
        }
        Command::Compare { a, b, a_name, b_name } => {
            let ta = to_score_table(&read_features(&a)?);
            let tb = to_score_table(&read_features(&b)?);
            print!("{}", compare_markdown(&a_name, &ta, &b_name, &tb));
        }
        Command::Serve => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(cogspeech::server::run(cfg))?;
        }
        Command::Synth { samples, seed, duration_s, out, embeddings_out } => {
            let corpus = generate_corpus(&SynthConfig { samples, seed, duration_s, ..SynthConfig::default() })?;
            let manifest = write_corpus(&out, &corpus)?;
            println!("wrote {} samples to {}", corpus.len(), manifest.display());
            if let Some(p) = embeddings_out {
                std::fs::write(&p, topic_embeddings(EMBEDDING_SEED)).with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Command::TrainAcoustic { manifest, out_dir, select_k, folds, trees, seed } => {
            let recs = load_labelled_audio(&read_manifest(&manifest)?)?;
            let res = load_resources(&cfg)?;
            let chunks = chunk_dataset(&res.acoustic, &recs)?;
            let split = res.acoustic.registry().split()?;
            let hyper = ForestHyper { n_trees: trees, seed, ..ForestHyper::default() };
            let t = train_acoustic(&chunks, &split, select_k, hyper, folds)?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            save_classifier(&out_dir.join("prosody.json"), &t.prosody)?;
            save_classifier(&out_dir.join("pronunciation.json"), &t.pronunciation)?;
            println!("{} chunks from {} recordings\n", chunks.len(), recs.len());
            print!(
                "{}",
                metrics_table(&[
                    ("Prosody (random forest)".into(), t.prosody_cv),
                    ("Pronunciation (random forest)".into(), t.pronunciation_cv),
                ])
            );
            println!("\nSelected pronunciation features: {}", t.selected.join(", "));
        }
        Command::TrainGrammar { manifest, out, coefficients, folds, seed } => {
            let samples = load_labelled_transcripts(&read_manifest(&manifest)?)?;
            let res = load_resources(&cfg)?;
            let raw = grammar_dataset(&samples, &res.tagger)?;
            let t = train_grammar(&raw, folds, seed)?;
            let model = match coefficients {
                Coefficients::Published => &t.published,
                Coefficients::Fitted => &t.fitted,
            };
            save_grammar(&out, model)?;
            print!("{}\n{}", metrics_table(&t.comparison), coefficient_table(&grammar_coefficients(&t.fitted)));
        }
        Command::Replay { manifest, url, out, speed } => {
            if speed < 0.0 {
                bail!("--speed must not be negative");
            }
            let rows = read_manifest(&manifest)?;
            let opts = ReplayOptions { speed, ..ReplayOptions::default() };
            let rt = tokio::runtime::Runtime::new()?;
            let features = rt.block_on(replay_manifest(&url, &rows, &cfg.live, &cfg.analysis.cutoffs, &opts))?;
            write_features_file(&out, &features)?;
            println!("replayed {} samples into {}", features.len(), out.display());
        }
        Command::Config => print!("{}", cfg.to_toml()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
