//! Regular rectangular grids used for contouring, rasterizing regions and quadrature.

use crate::error::{invalid, Result};

pub const MIN_RESOLUTION: usize = 16;

/// Where on a grid a field is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridPoints {
    /// `resolution + 1` corner nodes per axis.
    Nodes,
    /// `resolution` cell centers per axis.
    Centers,
}

/// Axis-aligned box split into `resolution[j]` cells along axis `j`.
///
/// Flattened arrays put axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(invalid("grid bounds and resolution must share one nonzero dimension"));
        }
        for j in 0..lower.len() {
            if !(lower[j].is_finite() && upper[j].is_finite() && lower[j] < upper[j]) {
                return Err(invalid(format!("grid axis {j}: need finite lower < upper")));
            }
            if resolution[j] < MIN_RESOLUTION {
                return Err(invalid(format!(
                    "grid axis {j}: resolution {} below {MIN_RESOLUTION}",
                    resolution[j]
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            resolution,
        })
    }

    /// Square grid with the same bounds and resolution on every axis.
    pub fn uniform(dim: usize, lower: f64, upper: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim], vec![resolution; dim])
    }

    pub fn with_resolution(&self, resolution: usize) -> Result<Self> {
        Self::new(self.lower.clone(), self.upper.clone(), vec![resolution; self.dim()])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.cell_size(j)).product()
    }

    pub fn count(&self, axis: usize, at: GridPoints) -> usize {
        match at {
            GridPoints::Nodes => self.resolution[axis] + 1,
            GridPoints::Centers => self.resolution[axis],
        }
    }

    pub fn len(&self, at: GridPoints) -> usize {
        (0..self.dim()).map(|j| self.count(j, at)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the `i`-th node or center along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize, at: GridPoints) -> f64 {
        let dx = self.cell_size(axis);
        match at {
            GridPoints::Nodes => self.lower[axis] + i as f64 * dx,
            GridPoints::Centers => self.lower[axis] + (i as f64 + 0.5) * dx,
        }
    }

    pub fn axis(&self, axis: usize, at: GridPoints) -> Vec<f64> {
        (0..self.count(axis, at)).map(|i| self.coord(axis, i, at)).collect()
    }

    /// Writes the point with flat index `flat` into `out`.
    pub fn point(&self, flat: usize, at: GridPoints, out: &mut [f64]) {
        let mut rest = flat;
        for (j, o) in out.iter_mut().enumerate().take(self.dim()) {
            let n = self.count(j, at);
            *o = self.coord(j, rest % n, at);
            rest /= n;
        }
    }

    /// Cell-center flat indices that sit on the outer ring of the grid.
    pub fn is_boundary_cell(&self, flat: usize) -> bool {
        let mut rest = flat;
        for j in 0..self.dim() {
            let n = self.resolution[j];
            let i = rest % n;
            if i == 0 || i + 1 == n {
                return true;
            }
            rest /= n;
        }
        false
    }

    /// Bounding box of `points` (row-major, `dim` columns) padded by `pad[j]`.
    pub fn covering(points: &[f64], dim: usize, pad: &[f64], resolution: usize) -> Result<Self> {
        if points.is_empty() || !points.len().is_multiple_of(dim) || pad.len() != dim {
            return Err(invalid("cannot build a covering grid from empty or ragged input"));
        }
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for row in points.chunks_exact(dim) {
            for j in 0..dim {
                lower[j] = lower[j].min(row[j]);
                upper[j] = upper[j].max(row[j]);
            }
        }
        for j in 0..dim {
            lower[j] -= pad[j];
            upper[j] += pad[j];
        }
        Self::new(lower, upper, vec![resolution; dim])
    }
}
