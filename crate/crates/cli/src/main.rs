use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use incbm_cli::{cmd_entropy, cmd_reconstruct, cmd_synth, cmd_topics, cmd_train, ExperimentConfig};

/// Self-growing Boltzmann machines over streams of labeled scenes.
#[derive(Parser)]
#[command(name = "incbm", version, args_override_self = true)]
struct Cli {
    /// `key = value` config file; flags override its entries.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it with its growth curve.
    Train,
    /// Entropy curve of a model over a test corpus.
    Entropy,
    /// Corruption/reconstruction scores of a model, both modes.
    Reconstruct,
    /// Strongest visible labels of each hidden unit.
    Topics,
    /// Write a synthetic planted-context corpus.
    Synth,
}

/// One flag per config key, same names.
#[derive(Args)]
struct Overrides {
    #[arg(long = "variant", value_name = "VALUE", global = true)]
    variant: Option<String>,
    #[arg(long = "corpus", value_name = "VALUE", global = true)]
    corpus: Option<String>,
    #[arg(long = "contexts", value_name = "VALUE", global = true)]
    contexts: Option<String>,
    #[arg(long = "scenes_per_context", value_name = "VALUE", global = true)]
    scenes_per_context: Option<String>,
    #[arg(long = "vocab_per_context", value_name = "VALUE", global = true)]
    vocab_per_context: Option<String>,
    #[arg(long = "shared_vocab", value_name = "VALUE", global = true)]
    shared_vocab: Option<String>,
    #[arg(long = "objects_min", value_name = "VALUE", global = true)]
    objects_min: Option<String>,
    #[arg(long = "objects_max", value_name = "VALUE", global = true)]
    objects_max: Option<String>,
    #[arg(long = "noise_label_prob", value_name = "VALUE", global = true)]
    noise_label_prob: Option<String>,
    #[arg(long = "epochs", value_name = "VALUE", global = true)]
    epochs: Option<String>,
    #[arg(long = "mode", value_name = "VALUE", global = true)]
    mode: Option<String>,
    #[arg(long = "learning_rate", value_name = "VALUE", global = true)]
    learning_rate: Option<String>,
    #[arg(long = "patience_neuron", value_name = "VALUE", global = true)]
    patience_neuron: Option<String>,
    #[arg(long = "patience_layer", value_name = "VALUE", global = true)]
    patience_layer: Option<String>,
    #[arg(long = "neuron_init_cap", value_name = "VALUE", global = true)]
    neuron_init_cap: Option<String>,
    #[arg(long = "confidence_rule", value_name = "VALUE", global = true)]
    confidence_rule: Option<String>,
    #[arg(long = "sample_hidden", value_name = "VALUE", global = true)]
    sample_hidden: Option<String>,
    #[arg(long = "hidden_sizes", value_name = "VALUE", global = true)]
    hidden_sizes: Option<String>,
    #[arg(long = "sizes_from", value_name = "VALUE", global = true)]
    sizes_from: Option<String>,
    #[arg(long = "train_fraction", value_name = "VALUE", global = true)]
    train_fraction: Option<String>,
    #[arg(long = "alpha", value_name = "VALUE", global = true)]
    alpha: Option<String>,
    #[arg(long = "gibbs_steps", value_name = "VALUE", global = true)]
    gibbs_steps: Option<String>,
    #[arg(long = "rho", value_name = "VALUE", global = true)]
    rho: Option<String>,
    #[arg(long = "seed", value_name = "VALUE", global = true)]
    seed: Option<String>,
    #[arg(long = "output", value_name = "VALUE", global = true)]
    output: Option<String>,
    #[arg(long = "model", value_name = "VALUE", global = true)]
    model: Option<String>,
    #[arg(long = "test", value_name = "VALUE", global = true)]
    test: Option<String>,
    #[arg(long = "checkpoint", value_name = "VALUE", global = true)]
    checkpoint: Option<String>,
    #[arg(long = "k", value_name = "VALUE", global = true)]
    k: Option<String>,
    #[arg(long = "layer", value_name = "VALUE", global = true)]
    layer: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        let pairs: [(&str, &Option<String>); 30] = [
            ("variant", &self.variant),
            ("corpus", &self.corpus),
            ("contexts", &self.contexts),
            ("scenes_per_context", &self.scenes_per_context),
            ("vocab_per_context", &self.vocab_per_context),
            ("shared_vocab", &self.shared_vocab),
            ("objects_min", &self.objects_min),
            ("objects_max", &self.objects_max),
            ("noise_label_prob", &self.noise_label_prob),
            ("epochs", &self.epochs),
            ("mode", &self.mode),
            ("learning_rate", &self.learning_rate),
            ("patience_neuron", &self.patience_neuron),
            ("patience_layer", &self.patience_layer),
            ("neuron_init_cap", &self.neuron_init_cap),
            ("confidence_rule", &self.confidence_rule),
            ("sample_hidden", &self.sample_hidden),
            ("hidden_sizes", &self.hidden_sizes),
            ("sizes_from", &self.sizes_from),
            ("train_fraction", &self.train_fraction),
            ("alpha", &self.alpha),
            ("gibbs_steps", &self.gibbs_steps),
            ("rho", &self.rho),
            ("seed", &self.seed),
            ("output", &self.output),
            ("model", &self.model),
            ("test", &self.test),
            ("checkpoint", &self.checkpoint),
            ("k", &self.k),
            ("layer", &self.layer),
        ];
        for (key, value) in pairs {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cli.overrides.apply(&mut config)?;
    config.validate()?;
    match cli.command {
        Command::Train => {
            for path in cmd_train(&config)? {
                println!("{}", path.display());
            }
        }
        Command::Entropy => println!("{}", cmd_entropy(&config)?.display()),
        Command::Reconstruct => println!("{}", cmd_reconstruct(&config)?.display()),
        Command::Topics => print!("{}", cmd_topics(&config)?),
        Command::Synth => println!("{}", cmd_synth(&config)?.display()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
