//! Training-free online zero-shot temporal action localization.
//!
//! `oztal` consumes pre-extracted vision-language embeddings (one visual
//! feature per timestep, plus text embeddings for each class and for generic
//! foreground and background prompts) and localizes actions as the stream
//! arrives:
//!
//! 1. [`memory`]: foreground-gated FIFO memory bank and similarity-gated
//!    fusion of the current feature with a recency-weighted memory summary.
//! 2. [`classify`]: scaled cosine scores per class, penalized by the
//!    background score.
//! 3. [`span`]: a per-class binary state machine that emits an action the
//!    moment its run of above-threshold scores ends.
//! 4. [`stream`]: the per-timestep orchestration of the above.
//!
//! [`eval`] computes mAP at temporal IoU thresholds, [`io`] holds the file
//! formats, [`synth`] generates seeded benchmarks and [`commands`] wires it
//! all into the `oztal` binary.
//!
//! ```
//! use oztal::{run_stream, FrameFeature, LocalizerConfig, TextBank};
//!
//! // classes on axes 0 and 1, foreground axis 2, background axis 3
//! let text = TextBank::new(
//!     vec!["Jump".into(), "Throw".into()],
//!     vec![String::new(), String::new()],
//!     vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
//!     vec![0.0, 0.0, 1.0, 0.0],
//!     vec![0.0, 0.0, 0.0, 1.0],
//! )?;
//! let stream: Vec<FrameFeature> = (0..10)
//!     .map(|t| {
//!         let v = if (3..7).contains(&t) { vec![1.0, 0.0, 0.5, 0.0] } else { vec![0.0, 0.0, 0.0, 1.0] };
//!         FrameFeature::new(t, v)
//!     })
//!     .collect::<Result<_, _>>()?;
//! let found = run_stream(&stream, &text, &LocalizerConfig::default())?;
//! assert_eq!(found.len(), 1);
//! assert_eq!((found[0].start_t, found[0].end_t, found[0].emit_t), (3, 6, 7));
//! # Ok::<(), oztal::Error>(())
//! ```

pub mod classify;
pub mod commands;
pub mod error;
pub mod eval;
pub mod io;
pub mod memory;
pub mod model;
pub mod span;
pub mod stream;
pub mod synth;

pub use classify::{background_score, class_scores, refine_scores, ScoreVector};
pub use error::{Error, Result};
pub use eval::{
    average_precision, mean_ap, tiou, Detection, DetectionSet, GroundTruthSet, MapReport,
};
pub use memory::{cosine, enhance_feature, MemoryBank};
pub use model::{ActionInstance, FrameFeature, LocalizerConfig, TextBank, TimeBase};
pub use span::{segment_confidence, SpanStateMachine};
pub use stream::{run_stream, run_stream_with, StreamSession};
