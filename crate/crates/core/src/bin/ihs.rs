use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ihs_lab::runner::{self, ExperimentConfig, Format, OpSpec, Params, Scenario};

#[derive(Parser)]
#[command(name = "ihs", version, about = "Exact weak-closure and rank experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scenario when no config is given, or to override it.
    #[arg(long, global = true)]
    scenario: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    branching: Option<usize>,
    #[arg(long, global = true)]
    m_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    split_width: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Describe the structure and its Hilbert space.
    Build,
    /// Run one check.
    Check {
        #[arg(value_enum)]
        which: CheckKind,
    },
    /// Compute a rank table.
    Rank {
        #[arg(value_enum)]
        which: RankKind,
    },
    /// List the weak-closure elements.
    Closure,
    /// Growth table over the config's grid.
    Sweep,
    /// Run every op listed in the config.
    Run,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    OneBased,
    AsymFree,
    Commute,
    Psd,
    CanonicalBase,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankKind {
    Foundation,
    V,
    Shelah,
}

fn config(cli: &Cli) -> ihs_lab::Result<ExperimentConfig> {
    let mut cfg = match (&cli.config, &cli.scenario) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(s)) => {
            let scenario: Scenario = serde_json::from_value(serde_json::Value::String(s.clone()))?;
            ExperimentConfig::new(scenario, Params::default())
        }
        (None, None) => {
            return Err(ihs_lab::Error::InvalidArgument("give --config or --scenario".into()))
        }
    };
    if let (Some(_), Some(s)) = (&cli.config, &cli.scenario) {
        cfg.scenario = serde_json::from_value(serde_json::Value::String(s.clone()))?;
    }
    if cli.depth.is_some() {
        cfg.params.depth = cli.depth;
    }
    if cli.branching.is_some() {
        cfg.params.branching = cli.branching;
    }
    if cli.m_max.is_some() {
        cfg.params.m_max = cli.m_max;
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        };
    }
    if cli.out.is_some() {
        cfg.output.path = cli.out.clone();
    }
    cfg.seed = cli.seed.or(cfg.seed);
    cfg.max_iter = cli.max_iter.or(cfg.max_iter);
    cfg.split_width = cli.split_width.or(cfg.split_width);
    let op = match &cli.command {
        Command::Build => Some("build"),
        Command::Closure => Some("closure"),
        Command::Check { which } => Some(match which {
            CheckKind::OneBased => "one-based-check",
            CheckKind::AsymFree => "asym-free-check",
            CheckKind::Commute => "commute-check",
            CheckKind::Psd => "psd-check",
            CheckKind::CanonicalBase => "canonical-base-check",
        }),
        Command::Rank { which } => Some(match which {
            RankKind::Foundation => "foundation-rank",
            RankKind::V => "v-rank",
            RankKind::Shelah => "shelah-rank",
        }),
        Command::Sweep | Command::Run => None,
    };
    if let Some(op) = op {
        // Keep arguments given for the same op in the config.
        let kept = cfg
            .ops
            .iter()
            .find(|s| runner::Op::parse(&s.op).ok() == runner::Op::parse(op).ok())
            .cloned();
        cfg.ops = vec![kept.unwrap_or_else(|| OpSpec::named(op))];
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| match cli.command {
        Command::Sweep => runner::sweep(&cfg),
        _ => runner::run(&cfg),
    });
    match result {
        Ok(outcome) => {
            if cli.out.is_none() {
                print!("{}", outcome.rendered);
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("ihs: {e}");
            ExitCode::from(2)
        }
    }
}
