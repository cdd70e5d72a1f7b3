//! `quiltframe`: build quilted Gabor systems, reproduce the reference
//! experiments, and verify the library's invariants.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quiltframe_cli::config::ExperimentConfig;
use quiltframe_cli::experiments::{
    self, precondition_csv, replacement_csv, run_precondition, run_replacement_experiment,
    run_tables, tables_csv, WINDOW_ASSUMPTION,
};
use quiltframe_cli::verify;
use quiltframe_core::reconstruct::frame_algorithm;
use quiltframe_core::signal::random_signal;
use quiltframe_core::QuiltError;

#[derive(Parser)]
#[command(
    name = "quiltframe",
    about = "Quilted Gabor frames: assembly, certification and reconstruction experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for the random test signals.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Stopping tolerance of the frame algorithm.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Worker threads (all kernels are sequential and deterministic; the
    /// flag is accepted for interface stability).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Export the 256-point quilted lattice (16 tiles, two frames).
    Figure1,
    /// Condition numbers of the four reference quilted systems.
    Table1,
    /// Frame-algorithm iteration counts of the same four systems.
    Table2,
    /// Diagonal preconditioning on the low-redundancy overlap quilt.
    Precondition,
    /// Atom replacement: high-redundancy pair plus low-redundancy sweep.
    Example2,
    /// Run the invariant and oracle suite at L in {12, 48, 144}.
    Verify,
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("configuration error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    match dispatch(&cli) {
        Ok(failed) => {
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("{err}");
            let code = match err.downcast_ref::<QuiltError>() {
                Some(QuiltError::Config(_))
                | Some(QuiltError::Domain(_))
                | Some(QuiltError::DimensionMismatch { .. }) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Figure1 => cmd_figure1(&cli.out),
        Command::Table1 => cmd_table1(&cli.out, cli.seed, cli.tol),
        Command::Table2 => cmd_table2(&cli.out, cli.seed, cli.tol),
        Command::Precondition => cmd_precondition(&cli.out, cli.seed),
        Command::Example2 => cmd_example2(&cli.out, cli.seed, cli.tol),
        Command::Verify => cmd_verify(cli.seed),
        Command::Run { config } => cmd_run(config, &cli.out),
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn cmd_figure1(out: &Path) -> Result<bool, Box<dyn std::error::Error>> {
    let quilt = experiments::figure1_quilt()?;
    let csv = quilt.lattice_csv();
    let path = write_output(out, "figure1_lattice.csv", &csv)?;
    println!("quilted lattice: L = 256, 16 tiles of 64x64, two alternating lattices");
    println!("atoms: {}", quilt.atoms().len());
    println!("wrote {}", path.display());
    Ok(false)
}

fn cmd_table1(out: &Path, seed: u64, tol: f64) -> Result<bool, Box<dyn std::error::Error>> {
    let rows = run_tables(144, seed, tol)?;
    println!("{WINDOW_ASSUMPTION}");
    println!("# condition numbers of four quilted systems (seed {seed})");
    println!(
        "{:<12} {:<9} {:>6} {:>10} {:>10} {:>12} {:>13} {:>10}",
        "redundancy", "overlap", "delta", "A", "B", "cond B/A", "cond sqrt", "reference"
    );
    for r in &rows {
        println!(
            "{:<12} {:<9} {:>6} {:>10.4} {:>10.4} {:>12.4} {:>13.4} {:>10}",
            r.redundancy,
            r.overlap,
            r.delta,
            r.bounds.lower,
            r.bounds.upper,
            r.bounds.condition,
            r.bounds.analysis_condition(),
            r.reference_condition
        );
    }
    let path = write_output(out, "table1.csv", &tables_csv(&rows))?;
    println!("wrote {}", path.display());
    Ok(false)
}

fn cmd_table2(out: &Path, seed: u64, tol: f64) -> Result<bool, Box<dyn std::error::Error>> {
    let rows = run_tables(144, seed, tol)?;
    println!("{WINDOW_ASSUMPTION}");
    println!("# frame-algorithm iterations to relative error {tol:e} (seed {seed})");
    println!(
        "{:<12} {:<9} {:>6} {:>11} {:>10} {:>10}",
        "redundancy", "overlap", "delta", "iterations", "reference", "converged"
    );
    let mut failed = false;
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{:<12} {:<9} {:>6} {:>11} {:>10} {:>10}",
            r.redundancy, r.overlap, r.delta, r.iterations, r.reference_iterations, r.converged
        );
        failed |= !r.converged;
        let name = format!(
            "table2_convergence_{}_{}.csv",
            r.redundancy,
            if r.overlap { "overlap" } else { "none" }
        );
        let _ = i;
        write_output(out, &name, &r.history_csv)?;
    }
    let path = write_output(out, "table2.csv", &tables_csv(&rows))?;
    println!("wrote {}", path.display());
    Ok(failed)
}

fn cmd_precondition(out: &Path, seed: u64) -> Result<bool, Box<dyn std::error::Error>> {
    let outcome = run_precondition(seed)?;
    println!("{WINDOW_ASSUMPTION}");
    println!(
        "# quilt: redundancy-1.125 frames on two stripes, overlap enlargement 16 (seed {seed})"
    );
    println!(
        "uncorrected  eps = {:.4}   (reference {:.4})",
        outcome.report.eps_plain, outcome.reference_plain
    );
    println!(
        "corrected    eps = {:.4}   (reference {:.4})",
        outcome.report.eps_corrected, outcome.reference_corrected
    );
    let improved = outcome.report.eps_corrected < outcome.report.eps_plain;
    println!(
        "inverse-diagonal correction improved the reconstruction: {improved}"
    );
    let path = write_output(out, "precondition_signals.csv", &precondition_csv(&outcome))?;
    println!("wrote {}", path.display());
    Ok(!improved)
}

fn cmd_example2(out: &Path, seed: u64, tol: f64) -> Result<bool, Box<dyn std::error::Error>> {
    let (high, sweep) = run_replacement_experiment(144, seed, tol)?;
    println!("{WINDOW_ASSUMPTION}");
    println!("# atom replacement inside a centered 48x48 square (seed {seed})");
    let mut failed = false;
    for r in &high {
        println!(
            "{}: cond sqrt = {:.4} (reference {:.1}), iterations = {} (reference {}), \
defect C = {:.4}, certified = {}",
            r.label,
            r.bounds.analysis_condition(),
            r.reference_condition.unwrap(),
            r.report.iterations,
            r.reference_iterations.unwrap(),
            r.plan.defect,
            r.plan.certified
        );
        failed |= !r.report.converged;
        write_output(
            out,
            &format!("example2_high_delta{}.csv", r.delta),
            &r.report.history_csv(),
        )?;
    }
    println!("# low-redundancy overlap sweep");
    for r in &sweep {
        println!(
            "{}: cond sqrt = {:.4}, iterations = {}, defect C = {:.4}, certified = {}",
            r.label,
            r.bounds.analysis_condition(),
            r.report.iterations,
            r.plan.defect,
            r.plan.certified
        );
        failed |= !r.report.converged;
        write_output(
            out,
            &format!("example2_low_delta{}.csv", r.delta),
            &r.report.history_csv(),
        )?;
        write_output(
            out,
            &format!("example2_low_delta{}_plan.txt", r.delta),
            &r.plan.report(),
        )?;
    }
    let mut all = high;
    all.extend(sweep);
    let path = write_output(out, "example2.csv", &replacement_csv(&all))?;
    println!("wrote {}", path.display());
    Ok(failed)
}

fn cmd_verify(seed: u64) -> Result<bool, Box<dyn std::error::Error>> {
    let results = verify::run_all(seed);
    let mut failures = 0usize;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}::{} - {}", r.module, r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{} checks, {} failed (signal lengths {:?}, seed {seed})",
        results.len(),
        failures,
        verify::LENGTHS
    );
    Ok(failures > 0)
}

fn cmd_run(config_path: &Path, out: &Path) -> Result<bool, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        QuiltError::Config(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let config = ExperimentConfig::from_json(&text)?;
    let quilt = config.build_quilt()?;
    let bounds = quilt.frame_bounds();
    println!(
        "quilt: L = {}, {} atoms, A = {:.6}, B = {:.6}, cond B/A = {:.4}, cond sqrt = {:.4}",
        quilt.signal_len(),
        quilt.atoms().len(),
        bounds.lower,
        bounds.upper,
        bounds.condition,
        bounds.analysis_condition()
    );
    write_output(out, "run_lattice.csv", &quilt.lattice_csv())?;
    if !bounds.is_frame() {
        println!("the system is not a frame; skipping reconstruction");
        return Ok(true);
    }
    let truth = random_signal(config.l, config.seed)?;
    let coeffs = quilt.analysis(&truth)?;
    let solver = config.solver.to_config()?;
    let report = frame_algorithm(&quilt, &coeffs, &solver, Some(&truth))?;
    println!(
        "frame algorithm: {} iterations, converged = {}, final relative error = {:.4e}",
        report.iterations,
        report.converged,
        report.epsilon.unwrap_or(f64::NAN)
    );
    let path = write_output(out, "run_convergence.csv", &report.history_csv())?;
    println!("wrote {}", path.display());
    Ok(!report.converged)
}
