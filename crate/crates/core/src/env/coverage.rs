//! State-coverage tracking.
//!
//! Per-cell visitation counts, clipped at 10k and mapped to [1, 100]
//! for heatmap rendering.

use super::EnvError;

/// Visit count above which coverage saturates.
pub const COVERAGE_CLIP: u64 = 10_000;

/// Monotone per-cell visit counts for one experiment.
#[derive(Debug, Clone)]
pub struct CoverageMap {
    width: usize,
    height: usize,
    counts: Vec<u64>,
}

impl CoverageMap {
    pub fn new(width: usize, height: usize) -> Self {
        CoverageMap { width, height, counts: vec![0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn record(&mut self, pos: (usize, usize)) -> Result<(), EnvError> {
        let (x, y) = pos;
        if x >= self.width || y >= self.height {
            return Err(EnvError::OutOfBounds { x, y });
        }
        self.counts[y * self.width + x] += 1;
        Ok(())
    }

    /// Sum another map's counts into this one (same dimensions).
    pub fn merge(&mut self, other: &CoverageMap) {
        assert_eq!(self.width, other.width);
        assert_eq!(self.height, other.height);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Heatmap value per cell: `1 + 99 * min(count, 10^4) / 10^4`.
    pub fn heatmap(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| heatmap_value(c)).collect()
    }
}

/// Normalization of a single visit count into [1, 100].
pub fn heatmap_value(count: u64) -> f64 {
    1.0 + 99.0 * (count.min(COVERAGE_CLIP) as f64) / COVERAGE_CLIP as f64
}
