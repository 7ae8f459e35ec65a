//! Tug-of-war sketch of the second frequency moment.
//!
//! Counter `(i, j)` accumulates `Σ weight · s_ij(item)` for a 4-wise
//! independent sign function `s_ij`. The estimate is the median over rows of
//! the mean over columns of the squared counters.
//!
//! Sign functions are bit-sliced: one degree-3 polynomial over GF(2^61 - 1)
//! serves a block of [`POLY_BITS`] consecutive columns of a row, column `j`
//! reading bit `j mod 61` of the polynomial value. Distinct blocks and rows
//! use independently drawn polynomials.

use thiserror::Error;

use crate::ceil_tol;
use crate::hashing::{mix, PolyHash, SplitMix64, POLY_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SketchError {
    #[error("cannot merge sketches built from different seeds")]
    SeedMismatch,
    #[error("cannot merge sketches of shapes {0:?} and {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("update would overflow 64-bit counters")]
    CounterOverflow,
    #[error("invalid sketch parameter: {0}")]
    InvalidParameter(String),
}

/// Number of rows (median) and columns (mean).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchShape {
    pub rows: usize,
    pub cols: usize,
}

impl SketchShape {
    /// Shape giving relative error `epsilon / 6` with probability at least
    /// `1 - delta / 2`: `cols = ⌈216/ε²⌉`, `rows = ⌈48·ln(2/δ)⌉`.
    pub fn for_accuracy(epsilon: f64, delta: f64) -> Result<Self, SketchError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(SketchError::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(SketchError::InvalidParameter(format!("delta = {delta}")));
        }
        Ok(Self {
            rows: ceil_tol(48.0 * (2.0 / delta).ln()),
            cols: ceil_tol(216.0 / (epsilon * epsilon)),
        })
    }

    pub fn counters(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone)]
pub struct F2Sketch {
    shape: SketchShape,
    seed: u64,
    blocks_per_row: usize,
    hashes: Vec<PolyHash>,
    counters: Vec<i64>,
    mass: u64,
}

impl F2Sketch {
    pub fn new(shape: SketchShape, seed: u64) -> Result<Self, SketchError> {
        if shape.rows == 0 || shape.cols == 0 {
            return Err(SketchError::InvalidParameter(format!("shape {shape:?}")));
        }
        let blocks_per_row = shape.cols.div_ceil(POLY_BITS);
        let mut rng = SplitMix64::new(mix(seed, 0xF2));
        let hashes = (0..shape.rows * blocks_per_row)
            .map(|_| PolyHash::draw(&mut rng))
            .collect();
        Ok(Self {
            shape,
            seed,
            blocks_per_row,
            hashes,
            counters: vec![0; shape.counters()],
            mass: 0,
        })
    }

    pub fn with_accuracy(epsilon: f64, delta: f64, seed: u64) -> Result<Self, SketchError> {
        Self::new(SketchShape::for_accuracy(epsilon, delta)?, seed)
    }

    pub fn shape(&self) -> SketchShape {
        self.shape
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major counters.
    pub fn counters(&self) -> &[i64] {
        &self.counters
    }

    /// Sign applied to `item` by counter `(row, col)`.
    pub fn sign(&self, row: usize, col: usize, item: u64) -> i64 {
        let h = &self.hashes[row * self.blocks_per_row + col / POLY_BITS];
        h.sign(item, col % POLY_BITS)
    }

    /// Adds `weight · s_ij(item)` to every counter.
    pub fn update(&mut self, item: u64, weight: i64) -> Result<(), SketchError> {
        let mass = self
            .mass
            .checked_add(weight.unsigned_abs())
            .filter(|&m| m <= i64::MAX as u64)
            .ok_or(SketchError::CounterOverflow)?;
        self.mass = mass;

        let cols = self.shape.cols;
        let twice = weight.wrapping_mul(2);
        for (row, hashes) in self.hashes.chunks_exact(self.blocks_per_row).enumerate() {
            let row_counters = &mut self.counters[row * cols..(row + 1) * cols];
            for (block, chunk) in row_counters.chunks_mut(POLY_BITS).enumerate() {
                let h = hashes[block].eval(item);
                for (k, c) in chunk.iter_mut().enumerate() {
                    let bit = ((h >> k) & 1) as i64;
                    *c += weight - twice * bit;
                }
            }
        }
        Ok(())
    }

    /// Median over rows of the mean squared counter.
    pub fn estimate(&self) -> f64 {
        let cols = self.shape.cols;
        let mut row_means: Vec<f64> = self
            .counters
            .chunks_exact(cols)
            .map(|row| {
                let sum: f64 = row.iter().map(|&c| (c as f64) * (c as f64)).sum();
                sum / cols as f64
            })
            .collect();
        median(&mut row_means)
    }

    /// Entrywise sum; both sketches must share shape and seed.
    pub fn merge(&mut self, other: &F2Sketch) -> Result<(), SketchError> {
        if self.shape != other.shape {
            return Err(SketchError::ShapeMismatch(
                (self.shape.rows, self.shape.cols),
                (other.shape.rows, other.shape.cols),
            ));
        }
        if self.seed != other.seed {
            return Err(SketchError::SeedMismatch);
        }
        self.mass = self
            .mass
            .checked_add(other.mass)
            .filter(|&m| m <= i64::MAX as u64)
            .ok_or(SketchError::CounterOverflow)?;
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += b;
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.counters.iter().all(|&c| c == 0)
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
