//! Round-trips every on-disk format: feature manifest and binaries, text
//! bank, ground truth and the prediction log.

use oztal::io::{
    load_annotations, load_textbank, read_features, read_predictions, textbank_paths,
    write_predictions, FeatureManifest,
};
use oztal::synth::{generate, SynthConfig};
use oztal::{run_stream, LocalizerConfig};

fn main() -> oztal::Result<()> {
    let dir = std::env::temp_dir().join("oztal_file_formats");
    let data = generate(&SynthConfig {
        videos: 2,
        noise: 0.3,
        ..SynthConfig::default()
    })?;
    let paths = data.write(&dir)?;

    let manifest = FeatureManifest::load(&paths.features_dir)?;
    println!(
        "{}",
        std::fs::read_to_string(paths.features_dir.join("manifest.json")).unwrap_or_default()
    );
    let (json, bin) = textbank_paths(&paths.textbank_prefix);
    let text = load_textbank(&json, &bin)?;
    println!(
        "text bank: {} classes, dim {}",
        text.num_classes(),
        text.dim()
    );
    let gt = load_annotations(&paths.ground_truth)?;
    println!(
        "ground truth: {} segments over {} videos",
        gt.num_segments(),
        gt.videos().len()
    );

    let cfg = LocalizerConfig::default();
    let mut detections = Vec::new();
    for entry in &manifest.videos {
        let features = read_features(&paths.features_dir, entry)?;
        let reference = &data
            .videos
            .iter()
            .find(|v| v.video_id == entry.video_id)
            .expect("same ids")
            .features;
        assert_eq!(
            &features, reference,
            "f32 storage is lossless for generated data"
        );
        let instances = run_stream(&features, &text, &cfg)?;
        detections.extend(oztal::io::detections_from_instances(
            &entry.video_id,
            &instances,
            &text,
            cfg.time_base(),
        ));
    }
    let preds = dir.join("predictions.jsonl");
    write_predictions(&preds, &detections)?;
    let back = read_predictions(&preds)?;
    println!(
        "predictions: wrote {}, read {}",
        detections.len(),
        back.len()
    );
    if let Some(line) = std::fs::read_to_string(&preds)
        .unwrap_or_default()
        .lines()
        .next()
    {
        println!("  {line}");
    }
    Ok(())
}
