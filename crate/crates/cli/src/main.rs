use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use lanerl::checkpoint;
use lanerl::curriculum::AgentKind;
use lanerl::harness::{
    collect_frames_to, emit_plots, load_run, run_batch, run_eval, run_training, train_vae_from_frames,
    write_records, write_records_to, ExperimentConfig, Profile,
};

#[derive(Parser)]
#[command(name = "lanerl", version, about = "Train, evaluate and plot lane-following PPO agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent variant for one seed.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        variant: AgentKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "desk")]
        profile: Profile,
    },
    /// Train several variants and seeds in parallel, one directory per run.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "sca,onefold,curla")]
        variants: Vec<AgentKind>,
        /// Defaults to the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "desk")]
        profile: Profile,
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
    /// Deterministic evaluation of a saved policy.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long, default_value = "desk")]
        profile: Profile,
        /// Variant whose reward and final curriculum state score the episodes.
        #[arg(long, default_value = "curla")]
        variant: AgentKind,
        /// Write records here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render metric and reward-curve SVGs from run directories.
    Plot {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// EMA factor; defaults to the value recorded by the first run.
        #[arg(long)]
        smoothing: Option<f64>,
    },
    /// Train the raster VAE on a collected frame set.
    VaeTrain {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Drive the scripted controller and save raster frames.
    CollectFrames {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: &Path, profile: Profile, variant: AgentKind) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path, profile, variant).with_context(|| format!("loading config {}", path.display()))
}

/// Run directories given directly, or their immediate children that hold a
/// run.
fn expand_runs(dirs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for d in dirs {
        if d.join("summary.json").exists() {
            out.push(d.clone());
            continue;
        }
        let mut children: Vec<PathBuf> = std::fs::read_dir(d)
            .with_context(|| format!("reading {}", d.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("summary.json").exists())
            .collect();
        if children.is_empty() {
            bail!("{} contains no run (summary.json not found)", d.display());
        }
        children.sort();
        out.extend(children);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            variant,
            seed,
            out,
            profile,
        } => {
            let cfg = load_config(&config, profile, variant)?;
            let run = run_training(&cfg, seed, &out)?;
            println!(
                "{} seed {}: {} records, final train speed {:.2} km/h, final eval distance {:.2}%, checkpoint {}",
                variant,
                seed,
                run.records.len(),
                run.summary.final_train_avg_speed_kmh,
                run.summary.final_eval_distance_pct,
                run.final_checkpoint.display()
            );
        }
        Command::Batch {
            config,
            variants,
            seeds,
            out,
            profile,
            threads,
        } => {
            let cfg = load_config(&config, profile, variants.first().copied().unwrap_or(AgentKind::Sca))?;
            let seeds = if seeds.is_empty() { cfg.seeds.clone() } else { seeds };
            for run in run_batch(&cfg, &variants, &seeds, &out, threads)? {
                println!(
                    "{}: final train speed {:.2} km/h, final train distance {:.2}%",
                    run.dir.display(),
                    run.summary.final_train_avg_speed_kmh,
                    run.summary.final_train_distance_pct
                );
            }
        }
        Command::Eval {
            checkpoint: ckpt,
            config,
            episodes,
            profile,
            variant,
            out,
        } => {
            let cfg = load_config(&config, profile, variant)?;
            let model = checkpoint::load_actor_critic(&ckpt)
                .with_context(|| format!("loading checkpoint {}", ckpt.display()))?;
            let records = run_eval(&model, &cfg, episodes)?;
            match out {
                Some(path) => write_records(&path, &records)?,
                None => write_records_to(std::io::stdout().lock(), &records)?,
            }
        }
        Command::Plot { runs, out, smoothing } => {
            let dirs = expand_runs(&runs)?;
            let data = dirs
                .iter()
                .map(|d| load_run(d).with_context(|| format!("loading run {}", d.display())))
                .collect::<Result<Vec<_>>>()?;
            for p in emit_plots(&data, &out, smoothing)? {
                println!("{}", p.display());
            }
        }
        Command::VaeTrain {
            frames,
            out,
            epochs,
            config,
            seed,
        } => {
            let vae_cfg = match config {
                Some(path) => load_config(&path, Profile::Paper, AgentKind::Curla)?.vae,
                None => Default::default(),
            };
            let report = train_vae_from_frames(&frames, &out, epochs, &vae_cfg, seed)?;
            let last = report.history.last();
            println!(
                "validation bce {:.4} -> {:.4}, kl {:.4}, saved {}",
                report.initial.bce,
                last.map_or(report.initial.bce, |e| e.val_bce),
                last.map_or(report.initial.kl, |e| e.val_kl),
                out.display()
            );
        }
        Command::CollectFrames {
            config,
            count,
            out,
            seed,
        } => {
            let cfg = load_config(&config, Profile::Paper, AgentKind::Curla)?;
            let path = collect_frames_to(&cfg, count, seed, &out)?;
            println!("{count} frames -> {}", path.display());
        }
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
