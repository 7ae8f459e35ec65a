//! Streaming 2-path estimator: `P2 = F2/2 − m` where `F2 = Σ_v d_v²`.
//!
//! Every edge event becomes two item updates, one per endpoint, in the
//! frequency-moment sketch; the live edge count is tracked exactly. The
//! relative-error guarantee assumes the final graph has no isolated edges
//! (then `F2 ≥ 3m`); this is not checked at runtime.

use crate::f2_sketch::{F2Sketch, SketchError, SketchShape};
use crate::stream::EdgeEvent;

#[derive(Debug, Clone)]
pub struct TwoPathEstimator {
    sketch: F2Sketch,
    m_net: i64,
}

impl TwoPathEstimator {
    pub fn new(shape: SketchShape, seed: u64) -> Result<Self, SketchError> {
        Ok(Self {
            sketch: F2Sketch::new(shape, seed)?,
            m_net: 0,
        })
    }

    /// Sized for a `(1 ± epsilon)` approximation of `P2` with probability
    /// at least `1 − delta/2`.
    pub fn with_accuracy(epsilon: f64, delta: f64, seed: u64) -> Result<Self, SketchError> {
        Self::new(SketchShape::for_accuracy(epsilon, delta)?, seed)
    }

    pub fn update(&mut self, e: &EdgeEvent) -> Result<(), SketchError> {
        let w = e.sign().weight();
        self.sketch.update(e.u().get() as u64, w)?;
        self.sketch.update(e.v().get() as u64, w)?;
        self.m_net += w;
        Ok(())
    }

    /// `F2_hat / 2 − m`; may be negative when the sketch underestimates.
    pub fn estimate(&self) -> f64 {
        self.sketch.estimate() / 2.0 - self.m_net as f64
    }

    pub fn m_net(&self) -> i64 {
        self.m_net
    }

    pub fn sketch(&self) -> &F2Sketch {
        &self.sketch
    }

    /// Combines estimators fed with disjoint parts of one stream.
    pub fn merge(&mut self, other: &TwoPathEstimator) -> Result<(), SketchError> {
        self.sketch.merge(&other.sketch)?;
        self.m_net += other.m_net;
        Ok(())
    }
}
