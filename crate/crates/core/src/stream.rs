//! Per-timestep orchestration of the localizer over one feature stream.
//!
//! Each step runs, in order: memory update, feature enhancement, class and
//! background scoring, background-aware refinement, and the span state
//! machine. A session only ever sees the feature it is handed, so every
//! emitted instance depends on the current and past features alone.

use serde::Serialize;

use crate::classify::{background_score, class_scores, refine_scores, ScoreVector};
use crate::error::{Error, Result};
use crate::memory::{check_dim, enhance_feature, Enhanced, MemoryBank};
use crate::model::{ActionInstance, FrameFeature, LocalizerConfig, TextBank};
use crate::span::SpanStateMachine;

/// Diagnostics for one processed timestep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    pub t: usize,
    /// Whether the feature entered the memory bank this step.
    pub appended: bool,
    /// Bank fill after the update.
    pub bank_fill: usize,
    pub lambda: f64,
    pub background: f64,
    pub max_refined: f64,
}

/// Stages up to refinement: everything that does not depend on the action
/// threshold.
#[derive(Debug, Clone)]
pub struct FeatureScorer<'a> {
    config: LocalizerConfig,
    text: &'a TextBank,
    memory: Option<MemoryBank>,
}

impl<'a> FeatureScorer<'a> {
    pub fn new(config: LocalizerConfig, text: &'a TextBank) -> Result<Self> {
        let config = config.validate()?;
        let memory = if config.memory_enhancement {
            Some(MemoryBank::new(config.memory_capacity)?)
        } else {
            None
        };
        Ok(Self {
            config,
            text,
            memory,
        })
    }

    pub fn config(&self) -> &LocalizerConfig {
        &self.config
    }

    pub fn memory(&self) -> Option<&MemoryBank> {
        self.memory.as_ref()
    }

    /// Refined per-class scores for `x`, plus diagnostics.
    pub fn score(&mut self, x: &FrameFeature) -> Result<(ScoreVector, StepTrace)> {
        check_dim(self.text.dim(), x.dim())?;
        let t = x.t();
        let scale = self.config.logit_scale;

        let (appended, enhanced) = match self.memory.as_mut() {
            Some(bank) => {
                let appended = bank.update(x, self.text.foreground(), self.text.background())?;
                (appended, enhance_feature(bank, x, &self.config)?)
            }
            None => (
                false,
                Enhanced {
                    fused: x.values().to_vec(),
                    lambda: 0.0,
                },
            ),
        };

        let k = class_scores(t, &enhanced.fused, self.text, scale)?;
        let r = background_score(&enhanced.fused, self.text, scale)?;
        let y = if self.config.background_refinement {
            refine_scores(&k, r)?
        } else {
            k
        };
        let trace = StepTrace {
            t,
            appended,
            bank_fill: self.memory.as_ref().map_or(0, MemoryBank::len),
            lambda: enhanced.lambda,
            background: r,
            max_refined: y.max(),
        };
        Ok((y, trace))
    }
}

/// Live localization state for one video.
#[derive(Debug, Clone)]
pub struct StreamSession<'a> {
    video_id: String,
    scorer: FeatureScorer<'a>,
    machine: SpanStateMachine,
    next_t: usize,
    trace: Option<Vec<StepTrace>>,
}

impl<'a> StreamSession<'a> {
    pub fn new(
        video_id: impl Into<String>,
        config: LocalizerConfig,
        text: &'a TextBank,
    ) -> Result<Self> {
        let scorer = FeatureScorer::new(config, text)?;
        let machine = SpanStateMachine::new(
            text.num_classes(),
            scorer.config.action_threshold,
            scorer.config.time_base(),
        )?;
        Ok(Self {
            video_id: video_id.into(),
            scorer,
            machine,
            next_t: 0,
            trace: None,
        })
    }

    /// Keep per-step diagnostics. Retention grows with the stream.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn config(&self) -> &LocalizerConfig {
        self.scorer.config()
    }

    pub fn next_timestep(&self) -> usize {
        self.next_t
    }

    pub fn memory(&self) -> Option<&MemoryBank> {
        self.scorer.memory()
    }

    pub fn machine(&self) -> &SpanStateMachine {
        &self.machine
    }

    pub fn trace(&self) -> Option<&[StepTrace]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<StepTrace>> {
        self.trace.as_mut().map(std::mem::take)
    }

    /// Runs the full pipeline on the next feature and returns the instances
    /// completed at this step.
    pub fn process_timestep(&mut self, x: &FrameFeature) -> Result<Vec<ActionInstance>> {
        if x.t() != self.next_t {
            return Err(Error::OutOfOrder {
                expected: self.next_t,
                actual: x.t(),
            });
        }
        let (y, step) = self.scorer.score(x)?;
        let emitted = self.machine.step(x.t(), &y)?;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(step);
        }
        self.next_t += 1;
        Ok(emitted)
    }

    /// End-of-stream: emits every still-open segment at the last processed
    /// timestep.
    pub fn flush(&mut self) -> Vec<ActionInstance> {
        match self.next_t.checked_sub(1) {
            Some(last) => self.machine.flush(last),
            None => Vec::new(),
        }
    }
}

/// Result of localizing a whole stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutput {
    /// Ordered by emission timestep.
    pub instances: Vec<ActionInstance>,
    pub trace: Option<Vec<StepTrace>>,
}

/// Localizes a complete stream, flushing open segments at the end.
pub fn run_stream(
    features: &[FrameFeature],
    text: &TextBank,
    config: &LocalizerConfig,
) -> Result<Vec<ActionInstance>> {
    Ok(run_stream_with(features, text, config, false)?.instances)
}

pub fn run_stream_with(
    features: &[FrameFeature],
    text: &TextBank,
    config: &LocalizerConfig,
    trace: bool,
) -> Result<StreamOutput> {
    if features.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut session = StreamSession::new("", config.clone(), text)?;
    if trace {
        session = session.with_trace();
    }
    let mut instances = Vec::new();
    for x in features {
        instances.extend(session.process_timestep(x)?);
    }
    instances.extend(session.flush());
    Ok(StreamOutput {
        instances,
        trace: session.take_trace(),
    })
}

/// Replays the state machine over cached refined scores.
pub fn spans_from_scores(
    scores: &[ScoreVector],
    num_classes: usize,
    config: &LocalizerConfig,
) -> Result<Vec<ActionInstance>> {
    let mut machine =
        SpanStateMachine::new(num_classes, config.action_threshold, config.time_base())?;
    let mut instances = Vec::new();
    for y in scores {
        instances.extend(machine.step(y.t, y)?);
    }
    if let Some(last) = scores.last() {
        instances.extend(machine.flush(last.t));
    }
    Ok(instances)
}

/// Refined scores for every timestep of a stream.
pub fn score_stream(
    features: &[FrameFeature],
    text: &TextBank,
    config: &LocalizerConfig,
) -> Result<Vec<ScoreVector>> {
    let mut scorer = FeatureScorer::new(config.clone(), text)?;
    let mut expected = 0;
    features
        .iter()
        .map(|x| {
            if x.t() != expected {
                return Err(Error::OutOfOrder {
                    expected,
                    actual: x.t(),
                });
            }
            expected += 1;
            scorer.score(x).map(|(y, _)| y)
        })
        .collect()
}
