//! Writes a noisy synthetic benchmark and sweeps the action threshold and
//! memory length over it, printing the CSV the `sweep` subcommand emits.

use oztal::commands::{self, SweepGrid, SweepOptions};
use oztal::eval::THUMOS14_TIOU;
use oztal::synth::SynthConfig;
use oztal::LocalizerConfig;

fn main() -> oztal::Result<()> {
    let dir = std::env::temp_dir().join("oztal_threshold_sweep");
    let paths = commands::synthesize(
        &SynthConfig {
            noise: 1.2,
            videos: 8,
            ..SynthConfig::default()
        },
        &dir,
    )?;
    let config = LocalizerConfig::default();
    let grid = SweepGrid::parse("tau=5:20:2.5;lq=0,20", &config)?;
    let rows = commands::sweep(&SweepOptions {
        features: paths.features_dir,
        textbank: paths.textbank_prefix,
        gt: paths.ground_truth,
        grid,
        config,
        tiou: THUMOS14_TIOU.to_vec(),
        jobs: 1,
    })?;
    print!("{}", commands::sweep_csv(&THUMOS14_TIOU, &rows));
    let best = rows
        .iter()
        .max_by(|a, b| a.average.total_cmp(&b.average))
        .expect("non-empty grid");
    eprintln!(
        "best: tau={} lq={} avg={:.2}",
        best.tau,
        best.memory_len,
        best.average * 100.0
    );
    Ok(())
}
