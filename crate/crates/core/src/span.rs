//! Online action span prediction.
//!
//! One binary state per class. A class opens a segment on the first step its
//! refined score exceeds the action threshold and emits it on the first step
//! it does not; the instance is available at that step with no lookahead.

use crate::classify::ScoreVector;
use crate::error::{Error, Result};
use crate::model::{ActionInstance, TimeBase};

/// Sublinear segment confidence: `sum / sqrt(len)`.
pub fn segment_confidence(sum: f64, start_t: usize, end_t: usize) -> f64 {
    debug_assert!(end_t >= start_t);
    sum / ((end_t - start_t + 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OpenSegment {
    start_t: usize,
    sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanStateMachine {
    threshold: f64,
    open: Vec<Option<OpenSegment>>,
    last_t: Option<usize>,
    time_base: TimeBase,
}

impl SpanStateMachine {
    pub fn new(num_classes: usize, threshold: f64, time_base: TimeBase) -> Result<Self> {
        if num_classes < 1 {
            return Err(Error::InvalidConfig(
                "state machine needs at least one class".into(),
            ));
        }
        if !threshold.is_finite() {
            return Err(Error::InvalidConfig(
                "action_threshold must be finite".into(),
            ));
        }
        Ok(Self {
            threshold,
            open: vec![None; num_classes],
            last_t: None,
            time_base,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.open.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Current binary state for every class.
    pub fn states(&self) -> Vec<bool> {
        self.open.iter().map(Option::is_some).collect()
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().flatten().count()
    }

    pub fn last_t(&self) -> Option<usize> {
        self.last_t
    }

    /// Advances every class by one timestep and returns the instances that
    /// completed at `t`, in class order.
    pub fn step(&mut self, t: usize, scores: &ScoreVector) -> Result<Vec<ActionInstance>> {
        if let Some(last) = self.last_t {
            if t <= last {
                return Err(Error::OutOfOrder {
                    expected: last + 1,
                    actual: t,
                });
            }
        }
        if scores.len() != self.open.len() {
            return Err(Error::ClassCountMismatch {
                expected: self.open.len(),
                actual: scores.len(),
            });
        }
        if let Some(bad) = scores.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("refined score {bad} at t={t}")));
        }
        self.last_t = Some(t);

        let mut emitted = Vec::new();
        for (class, (slot, &y)) in self.open.iter_mut().zip(&scores.values).enumerate() {
            let active = y > self.threshold;
            match (slot.as_mut(), active) {
                (None, true) => *slot = Some(OpenSegment { start_t: t, sum: y }),
                (Some(seg), true) => seg.sum += y,
                (Some(seg), false) => {
                    let end_t = t - 1;
                    emitted.push(ActionInstance::new(
                        seg.start_t,
                        end_t,
                        class,
                        segment_confidence(seg.sum, seg.start_t, end_t),
                        t,
                        self.time_base,
                    ));
                    *slot = None;
                }
                (None, false) => {}
            }
        }
        Ok(emitted)
    }

    /// Closes every open segment at `t_last` and resets to the all-zero state.
    pub fn flush(&mut self, t_last: usize) -> Vec<ActionInstance> {
        let mut emitted = Vec::new();
        for (class, slot) in self.open.iter_mut().enumerate() {
            if let Some(seg) = slot.take() {
                let end_t = t_last.max(seg.start_t);
                emitted.push(ActionInstance::new(
                    seg.start_t,
                    end_t,
                    class,
                    segment_confidence(seg.sum, seg.start_t, end_t),
                    end_t,
                    self.time_base,
                ));
            }
        }
        emitted
    }
}
