use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use astrocyte_cpg::commands::{
    cmd_analyze, cmd_energy, cmd_run, cmd_train, cmd_train_sweep, resolve_config, CommandError, Overrides, TrainSummary,
};
use astrocyte_cpg::io::Checkpoint;
use astrocyte_cpg::physics::BackendKind;

#[derive(Parser)]
#[command(name = "astrocyte-cpg", version, about = "Train and inspect an astrocyte-regulated spiking CPG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the inter-limb weights over a series of sessions.
    Train {
        /// Config file, or `default`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one config key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long, conflicts_with_all = ["seeds", "resume"])]
        seed: Option<u64>,
        /// Comma-separated seeds trained in parallel, one directory each.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long, conflicts_with = "resume")]
        backend: Option<BackendKind>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint; its config is the base for overrides.
        #[arg(long, conflicts_with_all = ["config", "seeds"])]
        resume: Option<PathBuf>,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Replay a checkpoint with frozen weights; writes trajectory and raster.
    Run {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Rollout length (s).
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        /// Output directory; defaults to the checkpoint's run directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power estimate from a run's stored firing tallies.
    Energy {
        run_dir: Option<PathBuf>,
        /// Use the reference firing frequencies instead of a run.
        #[arg(long, conflicts_with = "run_dir")]
        reference: bool,
    },
    /// Sliding averages, weight heat data and gait metrics of a run.
    Analyze { run_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CommandError> {
    match cmd {
        Command::Train {
            config,
            sets,
            seed,
            seeds,
            sessions,
            backend,
            out,
            resume,
            quiet,
        } => {
            let o = Overrides {
                sets,
                seed,
                sessions,
                backend,
                out,
            };
            let cfg = match &resume {
                Some(p) => {
                    let mut c = Checkpoint::load(p)?.config;
                    for s in &o.sets {
                        c.apply_override(s)?;
                    }
                    if let Some(n) = o.sessions {
                        c.run.sessions = n;
                    }
                    if let Some(out) = &o.out {
                        c.run.out = out.to_string_lossy().into_owned();
                    }
                    c.validate()?;
                    c
                }
                None => resolve_config(config.as_deref(), &o)?,
            };
            if seeds.is_empty() {
                let s = cmd_train(&cfg, resume.as_deref(), !quiet)?;
                report_train(cfg.run.seed, &s);
                if s.diverged > 0 {
                    return Err(CommandError::Diverged(s.diverged));
                }
            } else {
                let mut diverged = 0;
                let mut first_err = None;
                for (seed, r) in cmd_train_sweep(&cfg, &seeds, !quiet) {
                    match r {
                        Ok(s) => {
                            report_train(seed, &s);
                            diverged += s.diverged;
                        }
                        Err(e) => {
                            eprintln!("seed {seed}: {e}");
                            first_err.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = first_err {
                    return Err(e);
                }
                if diverged > 0 {
                    return Err(CommandError::Diverged(diverged));
                }
            }
        }
        Command::Run {
            checkpoint,
            duration,
            out,
        } => {
            let out = out.unwrap_or_else(|| {
                checkpoint
                    .parent()
                    .and_then(|p| p.parent())
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            let s = cmd_run(&checkpoint, duration, &out)?;
            println!("length_s,{}", s.record.length_s);
            println!("final_x_m,{}", s.record.final_x_m);
            println!("mean_reward,{}", s.record.mean_reward);
            println!("raster_rows,{}", s.raster_rows);
            println!("trot_index,{:.4}", s.trot_index);
            for (l, a) in s.alternation.iter().enumerate() {
                println!(
                    "limb_{l}_thigh,coactivation={:.4},cycles={},bursts={}",
                    a.coactivation, a.cycles, a.bursts
                );
            }
        }
        Command::Energy { run_dir, reference } => {
            let report = cmd_energy(if reference { None } else { Some(run_dir.as_deref().unwrap_or(".".as_ref())) })?;
            print!("{}", report.to_text());
        }
        Command::Analyze { run_dir } => {
            let s = cmd_analyze(&run_dir)?;
            println!("sessions,{}", s.sessions);
            if let Some(t) = s.trot_last5 {
                println!("trot_index_last5,{t:.4}");
            }
            if let Some(r) = &s.raster {
                println!("raster_trot_index,{:.4}", r.trot_index);
                for (l, a) in r.alternation.iter().enumerate() {
                    println!("limb_{l}_thigh,coactivation={:.4},cycles={}", a.coactivation, a.cycles);
                }
            }
            println!("wrote {}", run_dir.join("analysis.csv").display());
        }
    }
    Ok(())
}

fn report_train(seed: u64, s: &TrainSummary) {
    let last = s.last.as_ref();
    println!(
        "seed {seed}: {} sessions in {}; last length {:.3} s; p_snn {:.4e} W; ratio {:.2}",
        s.sessions,
        s.out.display(),
        last.map_or(0.0, |r| r.length_s),
        s.energy.p_snn,
        s.energy.ratio
    );
}
