use super::Grid;
use crate::error::{Error, Result};
use serde::Serialize;

/// Cell-centred values on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialField {
    #[serde(skip)]
    grid: Grid,
    values: Vec<f64>,
    label: String,
}

impl SpatialField {
    pub fn new(grid: Grid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if values.len() != grid.cell_count() {
            return Err(Error::FieldMismatch(format!(
                "field `{label}` has {} values for {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { cell });
        }
        Ok(SpatialField { grid, values, label })
    }

    pub fn constant(grid: Grid, value: f64, label: impl Into<String>) -> Self {
        SpatialField { grid, values: vec![value; grid.cell_count()], label: label.into() }
    }

    pub fn from_fn(grid: Grid, label: impl Into<String>, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|c| f(grid.cell_center(c))).collect();
        Self::new(grid, values, label)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), label)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Errors unless every value is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| v <= 0.0) {
            Some(cell) => Err(Error::NonPositiveWeight {
                field: self.label.clone(),
                cell,
                value: self.values[cell],
            }),
            None => Ok(()),
        }
    }

    pub fn require_same_grid(&self, other: &SpatialField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::FieldMismatch(format!(
                "fields `{}` and `{}` live on different grids",
                self.label, other.label
            )));
        }
        Ok(())
    }
}

/// Values on the boundary faces of a grid, optionally sampled in time.
///
/// Face order follows [`Grid::boundary_faces`]. Between time samples the
/// values are interpolated linearly; outside the sampled window they are held
/// constant.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    grid: Grid,
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

impl BoundaryField {
    pub fn steady(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::sampled(grid, vec![0.0], vec![values])
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        BoundaryField { grid, times: vec![0.0], samples: vec![vec![value; grid.boundary_face_count()]] }
    }

    pub fn sampled(grid: Grid, times: Vec<f64>, samples: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != samples.len() {
            return Err(Error::FieldMismatch(format!(
                "{} sample times for {} boundary samples",
                times.len(),
                samples.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("boundary sample times must increase strictly".into()));
        }
        let nf = grid.boundary_face_count();
        for s in &samples {
            if s.len() != nf {
                return Err(Error::FieldMismatch(format!(
                    "boundary sample has {} values for {nf} faces",
                    s.len()
                )));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite boundary value".into()));
            }
        }
        Ok(BoundaryField { grid, times, samples })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn is_steady(&self) -> bool {
        self.times.len() == 1
    }

    /// Face values at time `t`.
    pub fn at_time(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.samples[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.samples[n - 1].clone();
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.samples[k]
            .iter()
            .zip(&self.samples[k + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A scalar history sampled at strictly increasing times.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::InvalidInput(format!("time {t} does not follow {last}")));
            }
        }
        self.times.push(t);
        self.values.push(v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Piecewise-linear value, held constant outside the sampled window.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 0 {
            return f64::NAN;
        }
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    /// Exact integral over `[0, t]` of the piecewise-linear interpolant.
    pub fn integral_to(&self, t: f64) -> f64 {
        if self.times.is_empty() || t <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut a = 0.0;
        let mut fa = self.interpolate(0.0);
        for &s in self.times.iter().filter(|&&s| s > 0.0 && s < t) {
            let fs = self.interpolate(s);
            acc += 0.5 * (fa + fs) * (s - a);
            a = s;
            fa = fs;
        }
        acc + 0.5 * (fa + self.interpolate(t)) * (t - a)
    }
}

/// One scalar per face, grouped by face axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceField {
    pub grid: Grid,
    pub per_axis: Vec<Vec<f64>>,
}

impl FaceField {
    pub fn zeros(grid: Grid) -> Self {
        FaceField { grid, per_axis: (0..grid.dim()).map(|k| vec![0.0; grid.face_count(k)]).collect() }
    }
}

/// Full gradient vectors at every face, grouped by face axis.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceGradients {
    pub grid: Grid,
    pub per_axis: Vec<Vec<[f64; 3]>>,
}
