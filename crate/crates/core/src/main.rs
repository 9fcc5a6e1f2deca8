use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracmk::experiment::{
    output_root, run_dependence, run_directory, run_localize, run_oracle, run_solve, run_sweep_eps, run_verify,
    RunConfig, VerifyConfig, OUTPUT_ROOT_ENV,
};

/// Fractional-gradient-constrained transport problems.
#[derive(Parser)]
#[command(name = "fracmk", version)]
struct Cli {
    /// Run config, TOML or JSON (a run manifest also works).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps and quadrature (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run directory; defaults to `<output root>/<name>-<command>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuation solve; writes fields, kkt.csv and profile.csv.
    Solve,
    /// Continuation solve with field dumps for every eps stage.
    SweepEps,
    /// Solve along s_list (ending at 1) and compare with s = 1.
    Localize,
    /// Continuous-dependence ratios for source and threshold perturbations.
    Depend,
    /// Kernel identity suite and oracle triangle; exits nonzero on failure.
    VerifyKernels {
        /// Run only these checks (repeatable).
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Run no checks at all.
        #[arg(long)]
        none: bool,
    },
    /// Penalty solution against PDHG, the dual QP and closed forms.
    Oracle,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::SweepEps => "sweep-eps",
            Command::Localize => "localize",
            Command::Depend => "depend",
            Command::VerifyKernels { .. } => "verify-kernels",
            Command::Oracle => "oracle",
        }
    }
}

fn load(cli: &Cli) -> fracmk::Result<RunConfig> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::torsion_1d(256)?,
    };
    Ok(match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn run(cli: &Cli) -> fracmk::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| fracmk::Error::Config(e.to_string()))?;
    }
    let mut cfg = load(cli)?;
    let name = cli.command.name();
    let dir = cli.out.clone().unwrap_or_else(|| run_directory(&output_root(), &cfg, name));
    let out = Some(dir.as_path());
    match &cli.command {
        Command::Solve | Command::SweepEps => {
            let res = if name == "solve" { run_solve(&cfg, out)? } else { run_sweep_eps(&cfg, out)? };
            println!("s = {}", res.s);
            println!("{:>8} {:>6} {:>12} {:>12} {:>12} {:>10}", "eps", "iters", "violation", "complement", "residual", "|lambda|_1");
            for r in res.rows() {
                println!(
                    "{:>8.0e} {:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>10.4}",
                    r.eps, r.iterations, r.kkt.violation_sup, r.kkt.complementarity, r.kkt.penalized_residual, r.kkt.k_l1
                );
            }
        }
        Command::Localize => {
            if cfg.s_list.is_empty() {
                cfg.s_list = vec![0.7, 0.8, 0.9, 0.95, 0.99, 1.0];
            }
            let rep = run_localize(&cfg, out)?;
            println!("{:>6} {:>12} {:>12} {:>12}", "s", "sup", "H^sigma", "weak lambda");
            for r in &rep.rows {
                println!("{:>6} {:>12.4e} {:>12.4e} {:>12.4e}", r.s, r.sup_error, r.hsigma_error, r.weak_lambda_error);
            }
        }
        Command::Depend => {
            let rep = run_dependence(&cfg, out)?;
            println!("delta = {}  C_* = {}  C_0(inf) = {}", rep.coercivity.delta, rep.coercivity.c_star, rep.c_zero_inf);
            for r in &rep.rows {
                println!("{:<10} {:<12} measured {:.4e} bound {:.4e} ratio {:.4}", r.kind, r.label, r.measured, r.bound, r.ratio);
            }
            return Ok(rep.rows.iter().all(|r| r.ratio <= 1.0));
        }
        Command::VerifyKernels { checks, none } => {
            let mut vcfg: VerifyConfig = cfg.verify.clone();
            if *none {
                vcfg.checks = Some(Vec::new());
            } else if !checks.is_empty() {
                vcfg.checks = Some(checks.clone());
            }
            let rep = run_verify(&vcfg, cfg.seed, out)?;
            for r in &rep.rows {
                println!("{} {:<16} {:<48} {:.3e} <= {:.3e}", if r.pass { "PASS" } else { "FAIL" }, r.check, r.params, r.measured, r.bound);
            }
            println!("{} rows, {} failures", rep.rows.len(), rep.failures().count());
            report_dir(&dir);
            return Ok(rep.all_pass());
        }
        Command::Oracle => {
            let rep = run_oracle(&cfg, out)?;
            if let Some(b) = &rep.benchmark {
                println!("benchmark: {b}");
            }
            println!("pdhg: {} iterations, gap {:.3e}, converged {}", rep.pdhg_iterations, rep.pdhg_gap, rep.pdhg_converged);
            for r in &rep.rows {
                println!("{:<18} rel L2 {:.4e}  sup {:.4e}", r.pair, r.rel_l2, r.sup);
            }
        }
    }
    report_dir(&dir);
    Ok(true)
}

fn report_dir(dir: &Path) {
    println!("wrote {}", dir.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, fracmk::Error::Io(_)) {
                eprintln!("(run directories are created under ${OUTPUT_ROOT_ENV} or ./runs)");
            }
            ExitCode::from(2)
        }
    }
}
