use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use torus_micro::harness::{output_dir, run, summary_text, verify_identities, ExperimentSpec, Kind};
use torus_micro::{Error, Result};

#[derive(Parser)]
#[command(name = "torus-micro", version, about = "Two-microlocal experiments on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; defaults to the spec's `output`, then `out/<kind>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "TORUS_MICRO_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Snaps frequencies to rationals and classifies their resonance module.
    Classify(RunArgs),
    /// Propagates a family and records norms and boundary mass.
    Evolve(RunArgs),
    /// Wigner pairings of a family against symbols over the h grid.
    Wigner(RunArgs),
    /// Inner and outer two-microlocal pairings over the (h, R) grid.
    Twomicro(RunArgs),
    /// Compares resonant pairings with the trace formula and extrapolates.
    SigmaPropagation(RunArgs),
    /// Time variation of the frequency histogram.
    Marginal(RunArgs),
    /// Time-averaged densities, total and per frequency box.
    Disintegration(RunArgs),
    /// Observation Gram spectra over truncation radii.
    Observability(RunArgs),
    /// Runs the exact-identity suite.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, env = "TORUS_MICRO_THREADS")]
        threads: Option<usize>,
    },
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run_kind(kind: Kind, args: &RunArgs) -> Result<()> {
    init_threads(args.threads);
    let text = std::fs::read_to_string(&args.spec)?;
    let spec = ExperimentSpec::from_json(&text)?;
    if spec.kind != kind {
        return Err(Error::validation(
            "kind",
            format!("spec has kind {} but subcommand {} was used", spec.kind.name(), kind.name()),
        ));
    }
    let dir = output_dir(&spec, args.out.as_deref());
    let record = run(&spec, &dir)?;
    print!("{}", summary_text(&record));
    println!("wrote {} files to {}", record.outputs.len() + 1, dir.display());
    Ok(())
}

fn verify(seed: u64, threads: Option<usize>) -> Result<()> {
    init_threads(threads);
    let checks = verify_identities(seed)?;
    let mut failed = 0;
    for c in &checks {
        println!(
            "{:<18} {} cases={} worst={:e} tol={:e}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.cases,
            c.worst,
            c.tolerance
        );
        failed += (!c.passed) as usize;
    }
    if failed > 0 {
        return Err(Error::Invariant(format!("{failed} identity check(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify(a) => run_kind(Kind::Classify, a),
        Command::Evolve(a) => run_kind(Kind::Evolve, a),
        Command::Wigner(a) => run_kind(Kind::Wigner, a),
        Command::Twomicro(a) => run_kind(Kind::Twomicro, a),
        Command::SigmaPropagation(a) => run_kind(Kind::SigmaPropagation, a),
        Command::Marginal(a) => run_kind(Kind::Marginal, a),
        Command::Disintegration(a) => run_kind(Kind::Disintegration, a),
        Command::Observability(a) => run_kind(Kind::Observability, a),
        Command::Verify { seed, threads } => verify(*seed, *threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
