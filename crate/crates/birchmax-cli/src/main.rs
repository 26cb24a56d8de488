//! Experiment driver for partial-sum maxima of complete exponential sums:
//! builds cached sum tables, runs the independent random model, evaluates
//! the analytic constants, and cross-checks arithmetic statistics against
//! model predictions. Outputs are static CSV/JSON artifacts.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use birchmax::{par, Result};
use commands::Common;
use config::FileConfig;

#[derive(Parser)]
#[command(name = "birchmax", version, about = "partial-sum maxima experiments over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonFlags {
    /// trace family: birch | kloosterman | oddpoly:<c0,c1,...>
    #[arg(long)]
    family: Option<String>,
    /// RNG seed recorded in every artifact
    #[arg(long)]
    seed: Option<u64>,
    /// worker thread cap (0 = library default)
    #[arg(long)]
    workers: Option<usize>,
    /// cache directory (flag > config > CACHE_DIR > ./cache)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache complete-sum tables and checkpoint matrices, export CSV
    Sums {
        #[command(flatten)]
        common: CommonFlags,
        /// single prime
        #[arg(long)]
        p: Option<u64>,
        /// prime ladder a..b (all primes in the range)
        #[arg(long)]
        primes: Option<String>,
        /// checkpoint count (default: rounded p^{1/8}, floored at 8)
        #[arg(long, short = 'L')]
        l: Option<u32>,
    },
    /// Tail distributions: arithmetic profile CCDF against the model CCDF
    Dist {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, short = 'L')]
        l: Option<u32>,
        /// series truncation for the model run
        #[arg(long = "model-H")]
        model_h: Option<u32>,
        #[arg(long)]
        alpha_grid: Option<u32>,
        #[arg(long)]
        trials: Option<u32>,
        /// rows in the shared V grid
        #[arg(long)]
        v_points: Option<u32>,
        /// write a plotting-tool script next to the CSV
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Simulate the random model and export the sorted maxima
    Model {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long, short = 'H')]
        h: Option<u32>,
        #[arg(long)]
        alpha_grid: Option<u32>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Evaluate the analytic constants and their residual identities
    Constants {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Scan the alpha-sweep maxima against the sandwich and lemma bounds
    Gh {
        #[command(flatten)]
        common: CommonFlags,
        /// comma-separated truncation list, e.g. 16,64,256
        #[arg(long, short = 'H')]
        h: Option<String>,
        #[arg(long)]
        alpha_grid: Option<u32>,
        /// literal grid oracle instead of the kink sweep
        #[arg(long)]
        theta_grid: Option<u32>,
    },
    /// Cross-check shifted-moment statistics against the model
    Verify {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        p: Option<u64>,
        /// number of random shift tuples
        #[arg(long)]
        tuples: Option<u32>,
    },
    /// Rank residues by half-interval sum modulus
    Search {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Arithmetic Laplace transform against the model prediction
    Laplace {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        p: Option<u64>,
        /// comma-separated s values
        #[arg(long)]
        s: Option<String>,
    },
}

fn resolve_common(flags: &CommonFlags) -> Result<(Common, FileConfig)> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let family_str = flags
        .family
        .clone()
        .or_else(|| file.get_raw("family").map(str::to_string))
        .unwrap_or_else(|| "birch".to_string());
    let common = Common {
        family: config::parse_family(&family_str)?,
        seed: config::resolve(flags.seed, &file, "seed", 1)?,
        workers: config::resolve(flags.workers, &file, "workers", 0)?,
        cache_dir: config::resolve_cache_dir(flags.cache_dir.clone(), &file),
        out_dir: flags
            .out
            .clone()
            .or_else(|| file.get_raw("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    Ok((common, file))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sums { common, p, primes, l } => {
            let (common, file) = resolve_common(&common)?;
            let primes = match (p, primes.or_else(|| file.get_raw("primes").map(str::to_string))) {
                (Some(p), _) => vec![p],
                (None, Some(range)) => config::parse_prime_range(&range)?,
                (None, None) => vec![config::resolve(None, &file, "p", 1009u64)?],
            };
            let l = config::resolve_opt(l, &file, "L")?;
            par::with_workers(common.workers, || commands::cmd_sums(&common, primes, l))
        }
        Command::Dist {
            common,
            p,
            l,
            model_h,
            alpha_grid,
            trials,
            v_points,
            plot_script,
        } => {
            let (common, file) = resolve_common(&common)?;
            let params = commands::DistParams {
                p: config::resolve(p, &file, "p", 10007)?,
                l: config::resolve_opt(l, &file, "L")?,
                model_h: config::resolve(model_h, &file, "model_H", 1000)?,
                alpha_grid: config::resolve_opt(alpha_grid, &file, "alpha_grid")?,
                trials: config::resolve(trials, &file, "trials", 10_000)?,
                v_points: config::resolve(v_points, &file, "v_points", 64)?,
                plot_script,
            };
            par::with_workers(common.workers, || commands::cmd_dist(&common, params))
        }
        Command::Model {
            common,
            h,
            alpha_grid,
            trials,
        } => {
            let (common, file) = resolve_common(&common)?;
            let h = config::resolve(h, &file, "H", 1000)?;
            let alpha_grid = config::resolve_opt(alpha_grid, &file, "alpha_grid")?;
            let trials = config::resolve(trials, &file, "trials", 10_000)?;
            par::with_workers(common.workers, || {
                commands::cmd_model(&common, h, alpha_grid, trials)
            })
        }
        Command::Constants { common } => {
            let (common, _) = resolve_common(&common)?;
            commands::cmd_constants(&common)
        }
        Command::Gh {
            common,
            h,
            alpha_grid,
            theta_grid,
        } => {
            let (common, file) = resolve_common(&common)?;
            let list = h
                .or_else(|| file.get_raw("H").map(str::to_string))
                .unwrap_or_else(|| "16,64".to_string());
            let h_list = config::parse_u32_list(&list)?;
            let alpha_grid = config::resolve_opt(alpha_grid, &file, "alpha_grid")?;
            par::with_workers(common.workers, || {
                commands::cmd_gh(&common, h_list, alpha_grid, theta_grid)
            })
        }
        Command::Verify { common, p, tuples } => {
            let (common, file) = resolve_common(&common)?;
            let p = config::resolve(p, &file, "p", 10007)?;
            let tuples = config::resolve(tuples, &file, "tuples", 20)?;
            par::with_workers(common.workers, || commands::cmd_verify(&common, p, tuples))
        }
        Command::Search { common, p, top } => {
            let (common, file) = resolve_common(&common)?;
            let p = config::resolve(p, &file, "p", 10007)?;
            let top = config::resolve(top, &file, "top", 10)?;
            par::with_workers(common.workers, || commands::cmd_search(&common, p, top))
        }
        Command::Laplace { common, p, s } => {
            let (common, file) = resolve_common(&common)?;
            let p = config::resolve(p, &file, "p", 10007)?;
            let list = s
                .or_else(|| file.get_raw("s").map(str::to_string))
                .unwrap_or_else(|| "2,3,4".to_string());
            let s_values = config::parse_f64_list(&list)?;
            par::with_workers(common.workers, || commands::cmd_laplace(&common, p, s_values))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::error!("one or more assertions failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}
