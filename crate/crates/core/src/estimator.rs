//! End-to-end triangle estimator.
//!
//! One pass feeds the 2-path estimator and `K` independently colored
//! sparsified graphs. Afterwards every copy holding at least `s` pairwise
//! independent 2-paths contributes one uniformly sampled 2-path; the
//! fraction of closed samples estimates the transitivity `α`, and
//! `T3 ≈ α·P2/3`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ceil_tol;
use crate::f2_sketch::SketchError;
use crate::hashing::mix;
use crate::indep_paths::{greedy_independent_count, TwoPath};
use crate::sparsifier::{ColoringFunction, SparsifiedGraph, SparsifyError};
use crate::stream::{EdgeEvent, StreamError};
use crate::two_path::TwoPathEstimator;

pub const DEFAULT_ALPHA_MIN: f64 = 0.05;

const SKETCH_TAG: u64 = 0x5eed_f2f2_f2f2_f2f2;
const SAMPLE_TAG: u64 = 0x5a3b_1e00_0000_0001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("parameter out of range: {0}")]
    InvalidRange(String),
    #[error("no sparsified copy reached the threshold of {threshold} independent 2-paths (K = {k})")]
    NoQualifiedCopies { k: usize, threshold: usize },
    #[error("event {index}: {source}")]
    Turnstile {
        index: usize,
        #[source]
        source: StreamError,
    },
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

/// User-facing inputs of [`derive_config`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorParams {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha_min: f64,
    pub n: u32,
    pub m_max: usize,
    pub seed: u64,
    pub k_override: Option<usize>,
    pub s_override: Option<usize>,
    pub colors_override: Option<u32>,
}

impl EstimatorParams {
    pub fn new(epsilon: f64, delta: f64, n: u32, m_max: usize, seed: u64) -> Self {
        Self {
            epsilon,
            delta,
            alpha_min: DEFAULT_ALPHA_MIN,
            n,
            m_max,
            seed,
            k_override: None,
            s_override: None,
            colors_override: None,
        }
    }

    pub fn alpha_min(mut self, alpha_min: f64) -> Self {
        self.alpha_min = alpha_min;
        self
    }

    pub fn k_override(mut self, k: usize) -> Self {
        self.k_override = Some(k);
        self
    }

    pub fn s_override(mut self, s: usize) -> Self {
        self.s_override = Some(s);
        self
    }

    pub fn colors_override(mut self, colors: u32) -> Self {
        self.colors_override = Some(colors);
        self
    }
}

/// Derived constants of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub alpha_min: f64,
    pub n: u32,
    pub m_max: usize,
    pub seed: u64,
    /// `⌊m_max/18⌋`.
    pub b: usize,
    /// `min(1, 5/(ε·√b))`, or `1/colors` under a color override.
    pub p: f64,
    pub colors: u32,
    /// `⌈18/ε²⌉`.
    pub s: usize,
    /// `⌈36/(ε²·α_min)·ln(2/δ)⌉`.
    #[serde(rename = "K")]
    pub k: usize,
    /// Independent 2-paths a copy needs to qualify.
    pub threshold: usize,
    /// `b = 0`: the stream is too short to sparsify.
    pub degenerate: bool,
}

pub fn derive_config(params: &EstimatorParams) -> Result<EstimatorConfig, EstimatorError> {
    let EstimatorParams {
        epsilon,
        delta,
        alpha_min,
        n,
        m_max,
        seed,
        ..
    } = *params;
    let bad = |what: String| Err(EstimatorError::InvalidRange(what));
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return bad(format!("epsilon = {epsilon} not in (0, 1]"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return bad(format!("delta = {delta} not in (0, 1)"));
    }
    if !(alpha_min > 0.0 && alpha_min <= 1.0) {
        return bad(format!("alpha_min = {alpha_min} not in (0, 1]"));
    }
    if n < 2 {
        return bad(format!("n = {n} must be at least 2"));
    }
    if m_max < 1 {
        return bad("m_max must be at least 1".into());
    }
    if params.k_override == Some(0) || params.s_override == Some(0) || params.colors_override == Some(0) {
        return bad("overrides must be positive".into());
    }

    let b = m_max / 18;
    let degenerate = b == 0;
    let mut p = if degenerate {
        1.0
    } else {
        (5.0 / (epsilon * (b as f64).sqrt())).min(1.0)
    };
    let mut colors = ((1.0 / p).round() as u32).max(1);
    let mut s = ceil_tol(18.0 / (epsilon * epsilon));
    let mut k = ceil_tol(36.0 / (epsilon * epsilon * alpha_min) * (2.0 / delta).ln());

    if let Some(c) = params.colors_override {
        colors = c;
        p = 1.0 / c as f64;
    }
    if let Some(v) = params.s_override {
        s = v;
    }
    if let Some(v) = params.k_override {
        k = v;
    }
    // Without sparsification every copy samples uniformly from all 2-paths
    // of the final graph, so independence certification is not needed.
    let threshold = if colors == 1 && params.s_override.is_none() { 1 } else { s };

    Ok(EstimatorConfig {
        epsilon,
        delta,
        alpha_min,
        n,
        m_max,
        seed,
        b,
        p,
        colors,
        s,
        k,
        threshold,
        degenerate,
    })
}

impl EstimatorConfig {
    pub fn copy_seed(&self, copy: usize) -> u64 {
        mix(self.seed, copy as u64)
    }

    pub fn coloring(&self, copy: usize) -> ColoringFunction {
        ColoringFunction::new(self.copy_seed(copy), self.colors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopyDiagnostic {
    pub copy: usize,
    pub m_prime: usize,
    pub p2_total: u64,
    pub qualified: bool,
    /// Whether the sampled 2-path is closed; `None` for unqualified copies.
    pub indicator: Option<u8>,
    pub sample: Option<TwoPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub p2_hat: f64,
    pub alpha_hat: f64,
    pub t3_hat: f64,
    pub ell: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub s: usize,
    pub threshold: usize,
    pub p: f64,
    pub colors: u32,
    /// Unclamped 2-path estimate.
    pub p2_raw: f64,
    pub diagnostics: Vec<CopyDiagnostic>,
    pub warnings: Vec<String>,
}

impl Report {
    /// Indicators of the qualified copies, in copy order.
    pub fn indicators(&self) -> impl Iterator<Item = u8> + '_ {
        self.diagnostics.iter().filter_map(|d| d.indicator)
    }

    /// Sampled 2-paths whose indicator fired.
    pub fn closed_samples(&self) -> impl Iterator<Item = TwoPath> + '_ {
        self.diagnostics
            .iter()
            .filter(|d| d.indicator == Some(1))
            .filter_map(|d| d.sample)
    }
}

/// Streaming state of a run.
#[derive(Debug, Clone)]
pub struct TriangleEstimator {
    cfg: EstimatorConfig,
    two_paths: TwoPathEstimator,
    copies: Vec<SparsifiedGraph>,
    events: usize,
    live: i64,
}

fn turnstile(index: usize, e: &SparsifyError) -> EstimatorError {
    let source = match *e {
        SparsifyError::DuplicateInsert(u, v) => StreamError::DuplicateInsert(u, v),
        SparsifyError::InconsistentDelete(u, v) => StreamError::DeleteAbsent(u, v),
    };
    EstimatorError::Turnstile { index, source }
}

impl TriangleEstimator {
    pub fn new(cfg: EstimatorConfig) -> Result<Self, EstimatorError> {
        let two_paths = TwoPathEstimator::with_accuracy(cfg.epsilon, cfg.delta, mix(cfg.seed ^ SKETCH_TAG, 0))?;
        let copies = (0..cfg.k)
            .map(|i| SparsifiedGraph::new(cfg.n, cfg.coloring(i)))
            .collect();
        Ok(Self {
            cfg,
            two_paths,
            copies,
            events: 0,
            live: 0,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn copies(&self) -> &[SparsifiedGraph] {
        &self.copies
    }

    fn check_counts(&mut self, index: usize, e: &EdgeEvent) -> Result<(), EstimatorError> {
        let live = self.live + e.sign().weight();
        if live < 0 {
            return Err(EstimatorError::Turnstile {
                index,
                source: StreamError::DeleteAbsent(e.u(), e.v()),
            });
        }
        if live as usize > self.cfg.m_max {
            return Err(EstimatorError::Turnstile {
                index,
                source: StreamError::OverCapacity(self.cfg.m_max),
            });
        }
        self.live = live;
        Ok(())
    }

    /// Processes one event in every component.
    pub fn update(&mut self, e: &EdgeEvent) -> Result<(), EstimatorError> {
        let index = self.events;
        self.check_counts(index, e)?;
        self.two_paths.update(e)?;
        for copy in &mut self.copies {
            copy.update(e).map_err(|err| turnstile(index, &err))?;
        }
        self.events += 1;
        Ok(())
    }

    /// Processes a batch, copy by copy.
    pub fn ingest(&mut self, events: &[EdgeEvent]) -> Result<(), EstimatorError> {
        let base = self.events;
        for (i, e) in events.iter().enumerate() {
            self.check_counts(base + i, e)?;
            self.two_paths.update(e)?;
        }
        let mut first_error: Option<(usize, SparsifyError)> = None;
        for copy in &mut self.copies {
            for (i, e) in events.iter().enumerate() {
                if first_error.as_ref().is_some_and(|(j, _)| *j <= i) {
                    break;
                }
                if let Err(err) = copy.update(e) {
                    first_error = Some((i, err));
                    break;
                }
            }
        }
        if let Some((i, err)) = first_error {
            return Err(turnstile(base + i, &err));
        }
        self.events += events.len();
        Ok(())
    }

    /// Certifies, samples and aggregates.
    pub fn finish(self) -> Result<Report, EstimatorError> {
        let Self {
            cfg,
            two_paths,
            copies,
            ..
        } = self;
        let threshold = cfg.threshold;
        let mut diagnostics = Vec::with_capacity(copies.len());
        let mut hits = 0usize;
        let mut ell = 0usize;
        for (i, mut copy) in copies.into_iter().enumerate() {
            copy.canonicalize();
            let qualified = copy.p2_total() > 0 && greedy_independent_count(&copy, threshold) >= threshold;
            let mut diag = CopyDiagnostic {
                copy: i,
                m_prime: copy.m_prime(),
                p2_total: copy.p2_total(),
                qualified,
                indicator: None,
                sample: None,
            };
            if qualified {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.copy_seed(i), SAMPLE_TAG));
                let path = copy.sample_two_path(&mut rng).expect("copy has 2-paths");
                let closed = copy.has_edge(path.u, path.w);
                diag.indicator = Some(closed as u8);
                diag.sample = Some(path);
                hits += closed as usize;
                ell += 1;
            }
            diagnostics.push(diag);
        }
        if ell == 0 {
            return Err(EstimatorError::NoQualifiedCopies { k: cfg.k, threshold });
        }

        let alpha_hat = hits as f64 / ell as f64;
        let p2_raw = two_paths.estimate();
        let p2_hat = p2_raw.max(0.0);
        let t3_hat = alpha_hat * p2_hat / 3.0;

        let mut warnings = Vec::new();
        if cfg.degenerate {
            warnings.push(format!(
                "degenerate stream: m_max = {} gives b = 0, no sparsification",
                cfg.m_max
            ));
        }
        if threshold < cfg.s {
            warnings.push(format!(
                "single color: qualification threshold lowered from {} to {threshold}",
                cfg.s
            ));
        }
        if 2 * ell < cfg.k {
            warnings.push(format!("low confidence: only {ell} of {} copies qualified", cfg.k));
        }
        if p2_hat == 0.0 && hits > 0 {
            warnings.push(format!(
                "inconsistent: 2-path estimate {p2_raw} clamped to 0 while {hits} sampled 2-paths are closed"
            ));
        }

        Ok(Report {
            p2_hat,
            alpha_hat,
            t3_hat,
            ell,
            k: cfg.k,
            s: cfg.s,
            threshold,
            p: cfg.p,
            colors: cfg.colors,
            p2_raw,
            diagnostics,
            warnings,
        })
    }
}

/// Single-pass run over an in-memory stream.
pub fn run(stream: &[EdgeEvent], cfg: &EstimatorConfig) -> Result<Report, EstimatorError> {
    let mut est = TriangleEstimator::new(cfg.clone())?;
    est.ingest(stream)?;
    est.finish()
}

/// Same as [`run`]; deletions need no special handling because every
/// component depends only on the final edge set.
pub fn run_with_deletions(stream: &[EdgeEvent], cfg: &EstimatorConfig) -> Result<Report, EstimatorError> {
    run(stream, cfg)
}
