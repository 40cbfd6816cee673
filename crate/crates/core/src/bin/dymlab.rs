use clap::{Parser, Subcommand};
use dymlab::cli::{emit_plot_data_from_file, run_command, RunConfig, EXIT_ERROR};
use dymlab::DymError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dymlab", version, about = "Harry Dym scattering, solitons and long-time asymptotics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    Scatter(RunArgs),
    Spectrum(RunArgs),
    Soliton(RunArgs),
    Asymptote(RunArgs),
    Evolve(RunArgs),
    Compare(RunArgs),
    Signature(RunArgs),
    /// Re-emit the CSV of an artifact.json
    Emit {
        artifact: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the config hash
    Hash {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, DymError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| DymError::InvalidInput(e.to_string()))?;
    }
    let (name, args) = match cli.cmd {
        Cmd::Emit { artifact, out } => {
            let p = emit_plot_data_from_file(&artifact, &out)?;
            println!("{}", p.display());
            return Ok(0);
        }
        Cmd::Hash { config } => {
            println!("{}", RunConfig::load(&config)?.config_hash());
            return Ok(0);
        }
        Cmd::Scatter(a) => ("scatter", a),
        Cmd::Spectrum(a) => ("spectrum", a),
        Cmd::Soliton(a) => ("soliton", a),
        Cmd::Asymptote(a) => ("asymptote", a),
        Cmd::Evolve(a) => ("evolve", a),
        Cmd::Compare(a) => ("compare", a),
        Cmd::Signature(a) => ("signature", a),
    };
    let cfg = RunConfig::load(&args.config)?;
    if cfg.command.name() != name {
        return Err(DymError::ConfigInvalid { field: "command.name".into(), msg: format!("config is for `{}`, not `{name}`", cfg.command.name()) });
    }
    let out = args.out.or_else(|| cfg.out_dir.clone()).ok_or_else(|| DymError::ConfigInvalid { field: "out_dir".into(), msg: "no --out and no out_dir".into() })?;
    let res = run_command(&cfg, &out, cli.seed)?;
    for inv in &res.manifest.invariants {
        println!("{:<28} {:>12.4e}  tol {:>10.3e}  {}", inv.name, inv.value, inv.tolerance, if inv.pass { "PASS" } else { "FAIL" });
    }
    println!("wrote {}", out.display());
    Ok(res.manifest.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
