//! Feeds a synthetic video to a live session one timestep at a time and
//! prints each action the moment it is emitted.
//!
//!     cargo run --example localize_stream -- 1.0

use oztal::synth::{generate, SynthConfig};
use oztal::{LocalizerConfig, StreamSession};

fn main() -> oztal::Result<()> {
    let noise = std::env::args()
        .nth(1)
        .map_or(Ok(0.5), |s| s.parse())
        .expect("noise must be a number");
    let data = generate(&SynthConfig {
        videos: 1,
        noise,
        ..SynthConfig::default()
    })?;
    let video = &data.videos[0];
    let names = data.text.class_names();

    println!("planted:");
    for s in &video.segments {
        println!(
            "  {:<9} t={:>3}..={:<3}",
            names[s.class_index], s.start_t, s.end_t
        );
    }

    let mut session = StreamSession::new(&video.video_id, LocalizerConfig::default(), &data.text)?;
    println!("emitted:");
    for x in &video.features {
        for a in session.process_timestep(x)? {
            println!(
                "  t={:>3}  {:<9} t={:>3}..={:<3} ({:.2}s-{:.2}s)  p={:.1}",
                a.emit_t,
                names[a.class_index],
                a.start_t,
                a.end_t,
                a.start_sec,
                a.end_sec,
                a.confidence
            );
        }
    }
    for a in session.flush() {
        println!(
            "  flush  {:<9} t={:>3}..={:<3}  p={:.1}",
            names[a.class_index], a.start_t, a.end_t, a.confidence
        );
    }
    println!(
        "memory bank holds {} features",
        session.memory().map_or(0, |m| m.len())
    );
    Ok(())
}
