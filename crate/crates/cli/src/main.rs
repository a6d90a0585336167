use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rgreedi_cli::config::parse_k_range;
use rgreedi_cli::suite::{self, Scale};
use rgreedi_cli::{emit_csv, emit_plot, run_experiment, CliError, ExperimentConfig, Result};
use rgreedi_core::instances::{
    gen_diverse_relevant, gen_diversity, gen_exemplar, gen_matroid_coverage, gen_random_coverage,
    gen_tight_instance, load_fimi,
};
use rgreedi_core::Instance;

#[derive(Parser)]
#[command(
    name = "rgreedi",
    version,
    about = "Randomized distributed greedy experiments and bound checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write `<out>/<experiment>.csv` (and `.svg`).
    Run(RunArgs),
    /// Generate an instance and write it as JSON.
    Gen(GenArgs),
    /// Run the bound suites; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// `key = value` config file; flags override it.
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    k_range: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any config key, e.g. `--set n=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Coverage,
    Exemplar,
    Diversity,
    DiverseRelevant,
    Ellipse,
    Tight,
    Fimi,
}

#[derive(clap::Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    universe: usize,
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[arg(long, default_value_t = 3)]
    l: usize,
    #[arg(long, default_value_t = 16)]
    facilities: usize,
    #[arg(long, default_value_t = 4)]
    modes: usize,
    #[arg(long, default_value_t = 30)]
    grid: usize,
    /// Transaction file for `fimi`.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Criteria to run, e.g. `1,4,10`. Default: all.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<u8>,
    /// Reduced Monte Carlo sample sizes; time limits are not enforced.
    #[arg(long)]
    quick: bool,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = &args.experiment {
        cfg.experiment = e.parse()?;
    }
    if let Some(k) = &args.k_range {
        cfg.k_range = parse_k_range(k)?;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    for kv in &args.sets {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::config(kv, "expected KEY=VALUE"))?;
        cfg.set(key, value)?;
    }
    cfg.validate()?;

    let rows = run_experiment(&cfg)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let csv = cfg.output_dir.join(format!("{}.csv", cfg.experiment));
    emit_csv(&rows, &csv)?;
    println!("wrote {} rows to {}", rows.len(), csv.display());
    if cfg.plot {
        let svg = cfg.output_dir.join(format!("{}.svg", cfg.experiment));
        emit_plot(&rows, &svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

fn generate(args: &GenArgs) -> Result<Instance> {
    let inst = match args.kind {
        GenKind::Coverage => {
            gen_random_coverage(args.n, args.universe, args.density, args.k, args.seed)?
        }
        GenKind::Exemplar => gen_exemplar(args.n, args.dim, args.k, args.seed)?,
        GenKind::Diversity => gen_diversity(args.n, args.lambda, args.k, args.seed)?,
        GenKind::DiverseRelevant => gen_diverse_relevant(args.n, args.k, args.seed)?,
        GenKind::Ellipse => {
            gen_matroid_coverage(args.facilities, args.modes, args.grid, args.k, args.seed)?
        }
        GenKind::Tight => gen_tight_instance(args.l)?,
        GenKind::Fimi => {
            let input = args
                .input
                .as_ref()
                .ok_or_else(|| CliError::config("input", "fimi needs --input FILE"))?;
            load_fimi(input, args.k)?
        }
    };
    Ok(inst)
}

fn gen(args: GenArgs) -> Result<()> {
    let inst = generate(&args)?;
    let json = serde_json::to_string_pretty(&inst).expect("instances serialize");
    std::fs::write(&args.out, json + "\n").map_err(|e| CliError::io(&args.out, e))?;
    println!(
        "wrote {} ({} elements) to {}",
        inst.name,
        inst.n(),
        args.out.display()
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let ids = if args.suite.is_empty() {
        suite::CRITERIA.to_vec()
    } else {
        args.suite
    };
    let scale = if args.quick {
        Scale::Quick
    } else {
        Scale::Full
    };
    let mut all = true;
    for id in ids {
        let outcome = suite::run(id, scale)?;
        println!("{outcome}");
        all &= outcome.passed;
    }
    Ok(all)
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RGREEDI_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::config(
            "RGREEDI_THREADS",
            format!("expected a positive integer, got {raw:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("RGREEDI_THREADS", e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Run(a) => run(a).map(|()| true),
        Command::Gen(a) => gen(a).map(|()| true),
        Command::Verify(a) => verify(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rgreedi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
