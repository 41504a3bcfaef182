//! Experiment driver: configuration profiles, the train/eval loop, CSV
//! records, EMA smoothing and SVG plots.

mod config;
mod plot;
mod record;
mod train;

pub use config::{CurriculumConfig, ExperimentConfig, ObservationConfig, Profile};
pub use plot::{
    emit_plots, load_run, metric_chart, reward_chart, variant_series, Chart, Metric, RunData, Series, PLOT_FILES,
};
pub use record::{median, read_records, smooth, write_records, write_records_to, EpisodeRecord, Phase, CSV_HEADER};
pub use train::{
    collect_frames, collect_frames_to, evaluate_episode, make_env, make_observer, run_batch, run_dir_name, run_eval,
    run_training, score_step, train_vae_from_frames, RunArtifacts, RunSummary, Trainer, UpdateRow, CONFIG_FILE,
    FINAL_CHECKPOINT, FRAMES_FILE, RECORDS_FILE, SUMMARY_FILE, UPDATES_FILE,
};
