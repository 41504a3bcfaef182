use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::record::{write_records, EpisodeRecord, Phase};
use crate::checkpoint;
use crate::curriculum::{AgentKind, AgentVariant};
use crate::error::{Error, Result};
use crate::observation::{rasterize, ObservationBuilder, ObservationMode, Vae, VaeConfig, VaeTrainReport};
use crate::rewards::RewardParams;
use crate::rl::{
    ppo_update, ActorCritic, PpoOptimizer, RolloutBuffer, Transition, UpdateStats, ACTION_STEER, ACTION_THROTTLE,
};
use crate::sim::{Action, Env, ScriptedDriver, StepOutcome, TerminationReason};
use crate::track::Track;

/// Evaluation layouts are drawn from a separate stream range so they never
/// coincide with a training episode's layout.
const EVAL_LAYOUT_BASE: u64 = 1 << 40;

const STREAM_INIT: u64 = 0;
const STREAM_ROLLOUT: u64 = 1;
const STREAM_UPDATE: u64 = 2;
const STREAM_EVAL: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-step reward for `episode`'s schedule. The terminal off-center step
/// has `d > d_max`; it is scored at `d_max`.
pub fn score_step(variant: &AgentVariant, episode: usize, out: &StepOutcome, params: &RewardParams) -> Result<f64> {
    let ri = out.reward_inputs;
    variant.reward_for_step(episode, ri.alpha, ri.d.min(params.d_max), ri.v, ri.collision_intensity, params)
}

/// Builds the environment for `config`, using `seed` for traffic layouts.
pub fn make_env(config: &ExperimentConfig, seed: u64) -> Result<Env> {
    let mut env_cfg = config.env;
    env_cfg.rng_seed = seed;
    Env::new(env_cfg, Track::build(&config.track)?)
}

pub fn make_observer(config: &ExperimentConfig) -> Result<ObservationBuilder> {
    match config.observation.mode {
        ObservationMode::Bypass => Ok(ObservationBuilder::bypass(config.rewards)),
        ObservationMode::Vae => {
            let path = config
                .observation
                .vae_checkpoint
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("vae observations need observation.vae_checkpoint".into()))?;
            let vae = checkpoint::load_vae(path)?;
            ObservationBuilder::with_vae(
                Arc::new(vae),
                config.observation.raster,
                config.observation.latent,
                config.rewards,
            )
        }
    }
}

struct EpisodeTally {
    reward: f64,
    collisions: u32,
    reason: TerminationReason,
}

fn finish_record(episode: usize, phase: Phase, env: &Env, traffic: usize, tally: EpisodeTally) -> EpisodeRecord {
    let dist = env.agent().cumulative_distance;
    let time = env.episode_time();
    EpisodeRecord {
        episode,
        phase,
        distance_pct: dist / env.track().total_length() * 100.0,
        avg_speed_kmh: if time > 0.0 { dist / time * crate::sim::KMH_PER_MS } else { 0.0 },
        episodic_reward: tally.reward,
        collision_count: tally.collisions,
        termination_reason: tally.reason,
        traffic_count: traffic,
        steps: env.steps(),
    }
}

/// Runs one deterministic-action episode (`tanh` of the policy mean).
#[allow(clippy::too_many_arguments)]
pub fn evaluate_episode(
    model: &ActorCritic,
    env: &mut Env,
    observer: &ObservationBuilder,
    variant: &AgentVariant,
    schedule_episode: usize,
    layout_index: u64,
    params: &RewardParams,
    max_steps: u64,
    rng: &mut impl Rng,
) -> Result<EpisodeRecord> {
    let traffic = variant.traffic_count_for_episode(schedule_episode)?;
    env.reset(layout_index, traffic)?;
    let mut tally = EpisodeTally {
        reward: 0.0,
        collisions: 0,
        reason: TerminationReason::None,
    };
    loop {
        let obs = observer.build(env, rng)?;
        let a = model.policy.mean_action(&obs)?;
        let out = env.step(Action::new(a[ACTION_THROTTLE], a[ACTION_STEER]))?;
        tally.reward += score_step(variant, schedule_episode, &out, params)?;
        tally.collisions += u32::from(out.reward_inputs.collision_intensity > 0.0);
        if out.terminated {
            tally.reason = out.termination_reason;
            break;
        }
        if max_steps > 0 && env.steps() >= max_steps {
            tally.reason = TerminationReason::Truncated;
            break;
        }
    }
    Ok(finish_record(schedule_episode, Phase::Eval, env, traffic, tally))
}

/// Averages numeric fields of several evaluation episodes into one record.
/// The termination reason is taken from the first episode.
fn average_records(mut records: Vec<EpisodeRecord>) -> EpisodeRecord {
    let n = records.len() as f64;
    if records.len() == 1 {
        return records.pop().expect("one record");
    }
    let mut out = records[0].clone();
    out.distance_pct = records.iter().map(|r| r.distance_pct).sum::<f64>() / n;
    out.avg_speed_kmh = records.iter().map(|r| r.avg_speed_kmh).sum::<f64>() / n;
    out.episodic_reward = records.iter().map(|r| r.episodic_reward).sum::<f64>() / n;
    out.collision_count = (records.iter().map(|r| r.collision_count as f64).sum::<f64>() / n).round() as u32;
    out.steps = (records.iter().map(|r| r.steps as f64).sum::<f64>() / n).round() as u64;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateRow {
    pub update: usize,
    pub episode: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
    pub minibatches: usize,
}

/// One seeded training run held in memory. [`run_training`] drives it and
/// writes the artifacts.
pub struct Trainer {
    config: ExperimentConfig,
    variant: AgentVariant,
    seed: u64,
    env: Env,
    observer: ObservationBuilder,
    model: ActorCritic,
    optimizer: PpoOptimizer,
    buffer: RolloutBuffer,
    rollout_rng: ChaCha8Rng,
    update_rng: ChaCha8Rng,
    eval_rng: ChaCha8Rng,
    updates: Vec<UpdateRow>,
}

impl Trainer {
    pub fn new(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let env = make_env(config, seed)?;
        let observer = make_observer(config)?;
        let mut init_rng = stream(seed, STREAM_INIT);
        let model = ActorCritic::new(observer.dim(), &config.ppo, &mut init_rng)?;
        let optimizer = PpoOptimizer::new(&model.policy, &model.value_fn);
        Ok(Trainer {
            variant: config.agent_variant(),
            config: config.clone(),
            seed,
            env,
            observer,
            model,
            optimizer,
            buffer: RolloutBuffer::new(config.ppo.horizon),
            rollout_rng: stream(seed, STREAM_ROLLOUT),
            update_rng: stream(seed, STREAM_UPDATE),
            eval_rng: stream(seed, STREAM_EVAL),
            updates: Vec::new(),
        })
    }

    pub fn model(&self) -> &ActorCritic {
        &self.model
    }

    pub fn updates(&self) -> &[UpdateRow] {
        &self.updates
    }

    /// Collects one stochastic episode, updating whenever the buffer fills.
    pub fn train_episode(&mut self, episode: usize) -> Result<EpisodeRecord> {
        let traffic = self.variant.traffic_count_for_episode(episode)?;
        self.env.reset(episode as u64, traffic)?;
        let params = self.config.rewards;
        let max_steps = self.config.max_episode_steps;
        let mut tally = EpisodeTally {
            reward: 0.0,
            collisions: 0,
            reason: TerminationReason::None,
        };
        let mut obs = self.observer.build(&self.env, &mut self.rollout_rng)?;
        loop {
            let sample = self.model.policy.sample(&obs, &mut self.rollout_rng)?;
            let value = self.model.value_fn.value(&obs)?;
            let out = self.env.step(Action::new(
                sample.action[ACTION_THROTTLE],
                sample.action[ACTION_STEER],
            ))?;
            let reward = score_step(&self.variant, episode, &out, &params)?;
            tally.reward += reward;
            tally.collisions += u32::from(out.reward_inputs.collision_intensity > 0.0);
            let truncated = !out.terminated && max_steps > 0 && self.env.steps() >= max_steps;
            let done = out.terminated || truncated;
            self.buffer.push(Transition {
                observation: obs,
                pre_squash: sample.pre_squash,
                log_prob: sample.log_prob,
                reward,
                value,
                done,
            })?;
            obs = if done {
                Vec::new()
            } else {
                self.observer.build(&self.env, &mut self.rollout_rng)?
            };
            if self.buffer.is_full() {
                let bootstrap = if done { 0.0 } else { self.model.value_fn.value(&obs)? };
                let stats = ppo_update(
                    &mut self.model.policy,
                    &mut self.model.value_fn,
                    &self.buffer,
                    bootstrap,
                    &self.config.ppo,
                    &mut self.optimizer,
                    &mut self.update_rng,
                )?;
                self.push_update(episode, stats);
                self.buffer.clear();
            }
            if done {
                tally.reason = if truncated {
                    TerminationReason::Truncated
                } else {
                    out.termination_reason
                };
                break;
            }
        }
        Ok(finish_record(episode, Phase::Train, &self.env, traffic, tally))
    }

    fn push_update(&mut self, episode: usize, s: UpdateStats) {
        self.updates.push(UpdateRow {
            update: self.updates.len(),
            episode,
            policy_loss: s.policy_loss,
            value_loss: s.value_loss,
            entropy: s.entropy,
            mean_ratio: s.mean_ratio,
            clip_fraction: s.clip_fraction,
            minibatches: s.minibatches,
        });
    }

    /// Deterministic evaluation under the schedule of `episode`.
    pub fn eval_point(&mut self, episode: usize) -> Result<EpisodeRecord> {
        let per_point = self.config.eval_episodes_per_point.max(1);
        let mut records = Vec::with_capacity(per_point);
        for j in 0..per_point {
            let layout = EVAL_LAYOUT_BASE + (episode * per_point + j) as u64;
            records.push(evaluate_episode(
                &self.model,
                &mut self.env,
                &self.observer,
                &self.variant,
                episode,
                layout,
                &self.config.rewards,
                self.config.max_episode_steps,
                &mut self.eval_rng,
            )?);
        }
        Ok(average_records(records))
    }

    pub fn is_eval_episode(&self, episode: usize) -> bool {
        episode.is_multiple_of(self.config.eval_every)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: AgentKind,
    pub seed: u64,
    pub total_episodes: usize,
    pub eval_points: usize,
    pub updates: usize,
    pub smoothing: f64,
    pub track_length_m: f64,
    pub observation_dim: usize,
    /// Means over the last `min(100, total)` training episodes.
    pub final_train_avg_speed_kmh: f64,
    pub final_train_distance_pct: f64,
    pub final_eval_distance_pct: f64,
    pub final_eval_avg_speed_kmh: f64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub records: Vec<EpisodeRecord>,
    pub summary: RunSummary,
    pub final_checkpoint: PathBuf,
}

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const UPDATES_FILE: &str = "ppo_stats.csv";
pub const FINAL_CHECKPOINT: &str = "final.bin";

fn tail_mean(records: &[EpisodeRecord], phase: Phase, take: usize, f: impl Fn(&EpisodeRecord) -> f64) -> f64 {
    let vals: Vec<f64> = records.iter().filter(|r| r.phase == phase).map(f).collect();
    let tail = &vals[vals.len().saturating_sub(take)..];
    if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

fn write_updates(path: &Path, rows: &[UpdateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::format("ppo stats", e.to_string()))?;
    if rows.is_empty() {
        w.write_record([
            "update",
            "episode",
            "policy_loss",
            "value_loss",
            "entropy",
            "mean_ratio",
            "clip_fraction",
            "minibatches",
        ])
        .map_err(|e| Error::format("ppo stats", e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::format("ppo stats", e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Full training protocol for one seed. Writes `records.csv`,
/// `ppo_stats.csv`, `summary.json`, the resolved `config.toml` and
/// checkpoints under `out_dir/checkpoints/`.
pub fn run_training(config: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<RunArtifacts> {
    fs::create_dir_all(out_dir.join("checkpoints"))?;
    let mut trainer = Trainer::new(config, seed)?;
    fs::write(out_dir.join(CONFIG_FILE), config.to_toml_string()?)?;
    let mut records = Vec::with_capacity(config.total_episodes + config.eval_points());
    for episode in 0..config.total_episodes {
        records.push(trainer.train_episode(episode)?);
        if trainer.is_eval_episode(episode) {
            records.push(trainer.eval_point(episode)?);
        }
        if config.checkpoint_every > 0 && (episode + 1) % config.checkpoint_every == 0 {
            let name = format!("episode_{:06}.bin", episode + 1);
            checkpoint::save_actor_critic(&out_dir.join("checkpoints").join(name), trainer.model())?;
            write_records(&out_dir.join(RECORDS_FILE), &records)?;
        }
    }
    let final_checkpoint = out_dir.join("checkpoints").join(FINAL_CHECKPOINT);
    checkpoint::save_actor_critic(&final_checkpoint, trainer.model())?;
    write_records(&out_dir.join(RECORDS_FILE), &records)?;
    write_updates(&out_dir.join(UPDATES_FILE), trainer.updates())?;

    let summary = RunSummary {
        variant: config.variant,
        seed,
        total_episodes: config.total_episodes,
        eval_points: records.iter().filter(|r| r.phase == Phase::Eval).count(),
        updates: trainer.updates().len(),
        smoothing: config.smoothing,
        track_length_m: trainer.env.track().total_length(),
        observation_dim: trainer.observer.dim(),
        final_train_avg_speed_kmh: tail_mean(&records, Phase::Train, 100, |r| r.avg_speed_kmh),
        final_train_distance_pct: tail_mean(&records, Phase::Train, 100, |r| r.distance_pct),
        final_eval_distance_pct: tail_mean(&records, Phase::Eval, 10, |r| r.distance_pct),
        final_eval_avg_speed_kmh: tail_mean(&records, Phase::Eval, 10, |r| r.avg_speed_kmh),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::format("summary", e.to_string()))?;
    fs::write(out_dir.join(SUMMARY_FILE), json + "\n")?;
    Ok(RunArtifacts {
        dir: out_dir.to_path_buf(),
        records,
        summary,
        final_checkpoint,
    })
}

/// Directory name used by [`run_batch`] for one run.
pub fn run_dir_name(variant: AgentKind, seed: u64) -> String {
    format!("{variant}_seed{seed}")
}

/// Independent runs for every `(variant, seed)` pair, executed on up to
/// `threads` worker threads. Each run is sequential and seeded, so results
/// do not depend on the thread count.
pub fn run_batch(
    config: &ExperimentConfig,
    variants: &[AgentKind],
    seeds: &[u64],
    out_root: &Path,
    threads: usize,
) -> Result<Vec<RunArtifacts>> {
    let jobs: Vec<(AgentKind, u64)> = variants
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<Result<RunArtifacts>>> = (0..jobs.len()).map(|_| None).collect();
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(&(variant, seed)) = jobs.get(i) else { break };
                let mut cfg = config.clone();
                cfg.variant = variant;
                let r = run_training(&cfg, seed, &out_root.join(run_dir_name(variant, seed)));
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });
    results.into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Deterministic evaluation of `model` for `episodes` episodes under the
/// final curriculum state of `config`.
pub fn run_eval(model: &ActorCritic, config: &ExperimentConfig, episodes: usize) -> Result<Vec<EpisodeRecord>> {
    let observer = make_observer(config)?;
    if observer.dim() != model.obs_dim() {
        return Err(Error::ShapeMismatch {
            context: "checkpoint input vs observation size",
            expected: observer.dim(),
            got: model.obs_dim(),
        });
    }
    let mut env = make_env(config, config.env.rng_seed)?;
    let variant = config.agent_variant();
    let last = config.total_episodes - 1;
    let mut rng = stream(config.env.rng_seed, STREAM_EVAL);
    (0..episodes)
        .map(|i| {
            let mut r = evaluate_episode(
                model,
                &mut env,
                &observer,
                &variant,
                last,
                EVAL_LAYOUT_BASE + i as u64,
                &config.rewards,
                config.max_episode_steps,
                &mut rng,
            )?;
            r.episode = i;
            Ok(r)
        })
        .collect()
}

pub const FRAMES_FILE: &str = "frames.bin";

/// Drives the scripted pure-pursuit driver and rasterizes every `stride`-th
/// step until `count` frames are collected. Each episode draws a traffic
/// count uniformly from `0..=traffic_max`.
pub fn collect_frames(config: &ExperimentConfig, count: usize, seed: u64, stride: usize) -> Result<Array2<f64>> {
    if count == 0 {
        return Err(Error::Empty("frame request"));
    }
    let mut env = make_env(config, seed)?;
    let mut driver = ScriptedDriver::new(seed);
    let mut rng = stream(seed, STREAM_INIT);
    let raster = config.observation.raster;
    let stride = stride.max(1) as u64;
    let mut data = Vec::with_capacity(count * raster.pixels());
    let mut episode = 0u64;
    while data.len() < count * raster.pixels() {
        let traffic = rng.random_range(0..=config.curriculum.traffic_max);
        env.reset(episode, traffic)?;
        driver.new_episode();
        while data.len() < count * raster.pixels() {
            let out = env.step(driver.act(&env))?;
            if env.steps() % stride == 0 {
                data.extend(rasterize(&env, &raster).values);
            }
            if out.terminated || env.steps() >= 4000 {
                break;
            }
        }
        episode += 1;
    }
    Array2::from_shape_vec((count, raster.pixels()), data).map_err(|e| Error::format("frame set", e.to_string()))
}

/// Collects frames and writes them to `out_dir/frames.bin`.
pub fn collect_frames_to(config: &ExperimentConfig, count: usize, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let frames = collect_frames(config, count, seed, 4)?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(FRAMES_FILE);
    let r = config.observation.raster;
    checkpoint::save_frames(&path, r.width, r.height, &frames)?;
    Ok(path)
}

/// Loads `frames.bin` from `frames` (a directory or the file itself), trains
/// a fresh VAE and saves it to `out`. A JSON loss history is written next to
/// the checkpoint.
pub fn train_vae_from_frames(
    frames: &Path,
    out: &Path,
    epochs: usize,
    config: &VaeConfig,
    seed: u64,
) -> Result<VaeTrainReport> {
    let file = if frames.is_dir() { frames.join(FRAMES_FILE) } else { frames.to_path_buf() };
    let (_, _, data) = checkpoint::load_frames(&file)?;
    let mut rng = stream(seed, STREAM_INIT);
    let mut vae = Vae::new(data.ncols(), config, &mut rng)?;
    let report = crate::observation::vae_train(&mut vae, &data, epochs, config, &mut rng)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    checkpoint::save_vae(out, &vae)?;
    let history = serde_json::json!({
        "initial_val_bce": report.initial.bce,
        "initial_val_kl": report.initial.kl,
        "epochs": report.history,
    });
    fs::write(out.with_extension("json"), serde_json::to_string_pretty(&history).expect("json") + "\n")?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Profile;

    fn tiny(variant: AgentKind, episodes: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::profile(Profile::Desk, variant);
        c.total_episodes = episodes;
        c.curriculum.switch_episode = 2;
        c.curriculum.traffic_ramp_episodes = 2;
        c.curriculum.traffic_max = 2;
        c.max_episode_steps = 400;
        c.ppo.horizon = 32;
        c.ppo.minibatch_size = 8;
        c
    }

    #[test]
    fn one_episode_smoke() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(AgentKind::Sca, 1);
        c.curriculum.traffic_max = 0;
        let run = run_training(&c, 0, dir.path()).unwrap();
        assert_eq!(run.records.len(), 2);
        assert_eq!(run.records[0].phase, Phase::Train);
        assert_eq!(run.records[1].phase, Phase::Eval);
        assert!(run.final_checkpoint.exists());
        for f in [RECORDS_FILE, SUMMARY_FILE, CONFIG_FILE, UPDATES_FILE] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn distance_matches_lap_fraction_and_rewards_are_bounded() {
        let dir = tempfile::tempdir().unwrap();
        let c = tiny(AgentKind::Curla, 6);
        let run = run_training(&c, 3, dir.path()).unwrap();
        for r in &run.records {
            assert!(r.distance_pct >= 0.0 && r.avg_speed_kmh >= 0.0);
            assert!(r.episodic_reward.abs() <= r.steps as f64);
            if r.phase == Phase::Train && r.episode < 2 {
                assert_eq!(r.traffic_count, 0);
            }
        }
        let sca = run_training(&tiny(AgentKind::Sca, 4), 3, &dir.path().join("sca")).unwrap();
        assert!(sca.records.iter().all(|r| r.episodic_reward >= 0.0));
    }

    #[test]
    fn eval_is_repeatable_and_survives_checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(AgentKind::OneFoldCl, 3);
        let run = run_training(&c, 1, dir.path()).unwrap();
        c.env.rng_seed = 9;
        let model = checkpoint::load_actor_critic(&run.final_checkpoint).unwrap();
        let a = run_eval(&model, &c, 3).unwrap();
        let b = run_eval(&model, &c, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|r| r.phase == Phase::Eval && r.steps > 0));
    }

    #[test]
    fn eval_rejects_mismatched_checkpoint() {
        let c = tiny(AgentKind::Sca, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = ActorCritic::new(5, &c.ppo, &mut rng).unwrap();
        assert!(matches!(run_eval(&model, &c, 1), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn missing_vae_checkpoint_is_an_error() {
        let mut c = tiny(AgentKind::Sca, 3);
        c.observation.mode = ObservationMode::Vae;
        c.observation.vae_checkpoint = Some(PathBuf::from("/nonexistent/vae.bin"));
        assert!(matches!(Trainer::new(&c, 0), Err(Error::MissingFile(_))));
    }

    #[test]
    fn frames_are_deterministic_and_in_range() {
        let c = tiny(AgentKind::Sca, 3);
        let a = collect_frames(&c, 6, 5, 4).unwrap();
        let b = collect_frames(&c, 6, 5, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dim(), (6, c.observation.raster.pixels()));
        assert!(a.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
}
