//! Memory bank updates and similarity-gated fusion on a toy 3-d space.

use oztal::memory::{cosine, enhance_feature, MemoryBank};
use oztal::{FrameFeature, LocalizerConfig};

fn main() -> oztal::Result<()> {
    let foreground = [1.0, 0.0, 0.0];
    let background = [0.0, 1.0, 0.0];
    let cfg = LocalizerConfig {
        memory_capacity: 3,
        ..LocalizerConfig::default()
    };
    let mut bank = MemoryBank::new(cfg.memory_capacity)?;

    let stream = [
        [0.9, 0.1, 0.4],
        [0.8, 0.2, 0.5],
        [0.1, 0.9, 0.1], // background-like, skipped
        [0.9, 0.0, 0.45],
        [0.7, 0.1, 0.7],
        [0.2, 0.1, 0.95], // foreground, but far from the memory mean
    ];
    println!(" t  append  fill  cos(x,mean)  lambda  fused");
    for (t, v) in stream.iter().enumerate() {
        let x = FrameFeature::new(t, v.to_vec())?;
        let appended = bank.update(&x, &foreground, &background)?;
        let sim = cosine(x.values(), &bank.mean()?)?;
        let out = enhance_feature(&bank, &x, &cfg)?;
        let fused: Vec<String> = out.fused.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "{t:>2}  {:<6}  {:>4}  {sim:>11.3}  {:>6.3}  [{}]",
            appended,
            bank.len(),
            out.lambda,
            fused.join(", ")
        );
    }

    println!("\nrecency weights for a full bank of 5:");
    for (name, normalized) in [("literal", false), ("normalized", true)] {
        let w = MemoryBank::recency_weights(5, normalized);
        let shown: Vec<String> = w.iter().map(|v| format!("{v:.4}")).collect();
        println!(
            "  {name:<10} [{}]  sum {:.4}",
            shown.join(", "),
            w.iter().sum::<f64>()
        );
    }
    Ok(())
}
