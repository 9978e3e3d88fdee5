//! Experiment runner CLI: configure runs, sweep epsilon/grid/dt, print
//! surface tensions and transition profiles, and execute the verification
//! recipes. The library is the primary interface; this binary is a thin
//! front-end over `mcfpf::experiment` and `mcfpf::verify`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mcfpf::config::ExperimentConfig;
use mcfpf::experiment::{run_experiment, run_sweep};
use mcfpf::geodesic::{surface_tension_matrix, GeodesicParams, ProfileParams};
use mcfpf::verify;

#[derive(Parser)]
#[command(name = "mcfpf", version, about = "Multi-phase Allen-Cahn simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: the config's output_dir or "out").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the cartesian (epsilon, n, dt) sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent runs (fallback: MCFPF_THREADS, then 1).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the surface-tension matrix as CSV; optionally dump the curves.
    Geodesics {
        #[arg(long)]
        config: PathBuf,
        /// Directory for per-pair curve dumps (CSV node lists).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the 1D optimal transition profile table between two wells.
    Profile {
        #[arg(long)]
        config: PathBuf,
        /// Well indices of the transition, e.g. --pair 0 1.
        #[arg(long, num_args = 2, default_values = ["0", "1"])]
        pair: Vec<usize>,
    },
    /// Run a named verification suite end to end.
    Verify {
        /// One of: dissipation, equipartition, circle, herring, volume,
        /// forced, weakidentity, geodesic.
        suite: String,
    },
}

fn threads_from(cli_value: Option<usize>) -> usize {
    cli_value
        .or_else(|| std::env::var("MCFPF_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> mcfpf::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out_dir = out
                .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let artifacts = run_experiment(&cfg, &out_dir)?;
            println!(
                "run complete: {} observations, outputs in {}",
                artifacts.output.trajectory.reports.len(),
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, out, threads, seed } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out_dir = out
                .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let summary = run_sweep(&cfg, &out_dir, threads_from(threads))?;
            println!("sweep aggregate: {}", summary.aggregate_csv.display());
            for row in &summary.rows {
                println!(
                    "  eps={} n={} dt={}: {}",
                    row.epsilon, row.n, row.dt, row.status
                );
            }
            Ok(if summary.any_failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Geodesics { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let pot = cfg.potential.build()?;
            let params = GeodesicParams::default();
            let matrix = surface_tension_matrix(pot.as_ref(), &params)?;
            // Sigma as CSV to stdout.
            let p = matrix.phases();
            print!("well");
            for j in 0..p {
                print!(",sigma_{j}");
            }
            println!();
            for i in 0..p {
                print!("{i}");
                for j in 0..p {
                    print!(",{}", matrix.get(i, j));
                }
                println!();
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)
                    .map_err(|e| mcfpf::Error::io(&dir, e))?;
                let wells = pot.wells().to_vec();
                for i in 0..p {
                    for j in i + 1..p {
                        let curve = mcfpf::geodesic::geodesic_distance(
                            pot.as_ref(),
                            &wells[i],
                            &wells[j],
                            &params,
                        )?;
                        let path = dir.join(format!("curve_{i}_{j}.csv"));
                        let mut text = String::new();
                        for c in 0..pot.dim() {
                            if c > 0 {
                                text.push(',');
                            }
                            text.push_str(&format!("u{c}"));
                        }
                        text.push('\n');
                        for node in &curve.nodes {
                            let row: Vec<String> =
                                node.iter().map(|x| x.to_string()).collect();
                            text.push_str(&row.join(","));
                            text.push('\n');
                        }
                        std::fs::write(&path, text).map_err(|e| mcfpf::Error::io(&path, e))?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile { config, pair } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let pot = cfg.potential.build()?;
            let params = ProfileParams {
                half_width: cfg.profile_half_width,
                samples: cfg.profile_samples.min(513),
                ..ProfileParams::default()
            };
            let profile = mcfpf::geodesic::optimal_profile(pot.as_ref(), pair[0], pair[1], &params)?;
            print!("s");
            for c in 0..pot.dim() {
                print!(",q{c}");
            }
            println!();
            for (k, s) in profile.s.iter().enumerate() {
                print!("{s}");
                for c in 0..pot.dim() {
                    print!(",{}", profile.values[c][k]);
                }
                println!();
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite } => {
            let report = verify::run_suite(&suite)?;
            report.print();
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
