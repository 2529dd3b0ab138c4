use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};

/// One constant piece of a piecewise potential on `[start, end)`.
///
/// `start = -inf` and `end = +inf` mark semi-infinite leads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64, value: f64) -> Self {
        Self { start, end, value }
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// Scalar potential `V(x)`; the gauge variant reads the same values as `A0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Constant(f64),
    /// `V = spring/2 (x - center)^2`
    Harmonic { spring: f64, center: f64 },
    /// Contiguous segments in increasing order.
    Piecewise(Vec<Segment>),
    /// One value per grid point; evaluated between points by linear interpolation.
    Sampled { grid: Grid1D, values: Vec<f64> },
}

impl Potential {
    pub fn harmonic(spring: f64, center: f64) -> Self {
        Potential::Harmonic { spring, center }
    }

    /// Checks ordering and contiguity; reports the first offending segment.
    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        validate_segments(&segments).map_err(Error::InvalidPotential)?;
        Ok(Potential::Piecewise(segments))
    }

    /// Two semi-infinite leads meeting at `x0`.
    pub fn step(x0: f64, left: f64, right: f64) -> Self {
        Potential::Piecewise(vec![
            Segment::new(f64::NEG_INFINITY, x0, left),
            Segment::new(x0, f64::INFINITY, right),
        ])
    }

    /// Leads at `outside` with a finite block `[x0, x1)` at `inside`.
    pub fn barrier(x0: f64, x1: f64, outside: f64, inside: f64) -> Self {
        Potential::Piecewise(vec![
            Segment::new(f64::NEG_INFINITY, x0, outside),
            Segment::new(x0, x1, inside),
            Segment::new(x1, f64::INFINITY, outside),
        ])
    }

    pub fn sampled(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidPotential(format!(
                "sampled potential has {} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("sampled values must be finite".into()));
        }
        Ok(Potential::Sampled {
            grid: *grid,
            values,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Constant(v) => *v,
            Potential::Harmonic { spring, center } => 0.5 * spring * (x - center).powi(2),
            Potential::Piecewise(segs) => {
                // right-continuous at the breaks
                let idx = segs.partition_point(|s| s.start <= x);
                segs[idx.saturating_sub(1)].value
            }
            Potential::Sampled { grid, values } => {
                let t = ((x - grid.x_min()) / grid.h()).clamp(0.0, (grid.n() - 1) as f64);
                let i = (t.floor() as usize).min(grid.n() - 2);
                let f = t - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// `dV/dx`; zero inside pieces of a piecewise potential, piecewise constant for samples.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Constant(_) | Potential::Piecewise(_) => 0.0,
            Potential::Harmonic { spring, center } => spring * (x - center),
            Potential::Sampled { grid, values } => {
                let t = ((x - grid.x_min()) / grid.h()).clamp(0.0, (grid.n() - 1) as f64);
                let i = (t.floor() as usize).min(grid.n() - 2);
                (values[i + 1] - values[i]) / grid.h()
            }
        }
    }

    /// Values at the grid points. Sampled potentials must live on the same grid.
    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        if let Potential::Sampled { grid: g, values } = self {
            if g != grid {
                return Err(Error::GridMismatch);
            }
            return Ok(values.clone());
        }
        if let Potential::Piecewise(segs) = self {
            let (lo, hi) = (segs[0].start, segs[segs.len() - 1].end);
            if lo > grid.x_min() || hi < grid.x_max() {
                return Err(Error::InvalidPotential(format!(
                    "segments cover [{lo}, {hi}) but the grid spans [{}, {}]",
                    grid.x_min(),
                    grid.x_max()
                )));
            }
        }
        Ok(grid.points().into_iter().map(|x| self.value(x)).collect())
    }

    /// Values at the edge midpoints `x_i + h/2`: `n - 1` edges on Dirichlet grids,
    /// `n` on periodic ones (the last edge wraps to the first point).
    pub fn sample_midpoints(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let edges = match grid.boundary() {
            Boundary::Dirichlet => grid.n() - 1,
            Boundary::Periodic => grid.n(),
        };
        match self {
            Potential::Sampled { grid: g, values } => {
                if g != grid {
                    return Err(Error::GridMismatch);
                }
                let n = values.len();
                Ok((0..edges).map(|e| 0.5 * (values[e] + values[(e + 1) % n])).collect())
            }
            _ => {
                self.sample(grid)?;
                let h = grid.h();
                Ok((0..edges).map(|e| self.value(grid.x(e) + 0.5 * h)).collect())
            }
        }
    }

    /// Locations where the potential jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            Potential::Piecewise(segs) => segs
                .windows(2)
                .filter(|w| w[0].value != w[1].value)
                .map(|w| w[0].end)
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn segments(&self) -> Option<&[Segment]> {
        match self {
            Potential::Piecewise(segs) => Some(segs),
            _ => None,
        }
    }
}

pub(crate) fn validate_segments(segs: &[Segment]) -> std::result::Result<(), String> {
    if segs.is_empty() {
        return Err("piecewise potential needs at least one segment".into());
    }
    for (j, s) in segs.iter().enumerate() {
        if s.start.is_nan() || s.end.is_nan() || !s.value.is_finite() {
            return Err(format!("segment {j} has non-finite data"));
        }
        if s.start >= s.end {
            return Err(format!("segment {j} is empty: [{}, {})", s.start, s.end));
        }
        if j > 0 {
            let prev = segs[j - 1].end;
            if s.start < prev {
                return Err(format!(
                    "segment {j} starts at {} inside segment {} which ends at {prev}",
                    s.start,
                    j - 1
                ));
            }
            if s.start > prev {
                return Err(format!("gap between segment {} and {j}: ({prev}, {})", j - 1, s.start));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_rejects_overlap_and_gap() {
        let overlap = vec![Segment::new(0.0, 2.0, 1.0), Segment::new(1.0, 3.0, 0.0)];
        assert!(Potential::piecewise(overlap).is_err());
        let gap = vec![Segment::new(0.0, 1.0, 1.0), Segment::new(2.0, 3.0, 0.0)];
        assert!(Potential::piecewise(gap).is_err());
        let ok = vec![Segment::new(0.0, 1.0, 1.0), Segment::new(1.0, 3.0, 0.0)];
        assert!(Potential::piecewise(ok).is_ok());
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let v = Potential::step(0.0, 1.0, 2.0);
        assert_eq!(v.value(-1e-9), 1.0);
        assert_eq!(v.value(0.0), 2.0);
        assert_eq!(v.discontinuities(), vec![0.0]);
    }

    #[test]
    fn sampled_interpolates_linearly() {
        let g = Grid1D::dirichlet(0.0, 1.0, 11).unwrap();
        let v = Potential::sampled(&g, g.points().iter().map(|x| 3.0 * x - 1.0).collect()).unwrap();
        assert!((v.value(0.33) - (3.0 * 0.33 - 1.0)).abs() < 1e-12);
        assert!((v.derivative(0.57) - 3.0).abs() < 1e-12);
        assert!(Potential::sampled(&g, vec![0.0; 5]).is_err());
    }

    #[test]
    fn piecewise_must_cover_grid() {
        let g = Grid1D::dirichlet(-1.0, 1.0, 11).unwrap();
        let v = Potential::piecewise(vec![Segment::new(0.0, 5.0, 1.0)]).unwrap();
        assert!(v.sample(&g).is_err());
    }
}
