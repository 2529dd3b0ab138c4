use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Energy(f64),
    Time(f64),
}

/// Complex samples of `psi(x)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    values: Vec<Complex64>,
    label: Option<Label>,
}

impl WaveFunction {
    /// Checks the length and, on Dirichlet grids, that both end samples vanish.
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidWaveFunction(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if grid.boundary() == Boundary::Dirichlet
            && (values[0] != Complex64::ZERO || values[grid.n() - 1] != Complex64::ZERO)
        {
            return Err(Error::InvalidWaveFunction(
                "dirichlet field must vanish at both walls".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            label: None,
        })
    }

    /// Samples `f` at the grid points; Dirichlet wall samples are set to zero.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let mut values: Vec<Complex64> = grid.points().into_iter().map(f).collect();
        if grid.boundary() == Boundary::Dirichlet {
            values[0] = Complex64::ZERO;
            let last = values.len() - 1;
            values[last] = Complex64::ZERO;
        }
        Self {
            grid,
            values,
            label: None,
        }
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Builds a field from the `n - 2` interior unknowns of a Dirichlet grid.
    pub(crate) fn from_interior(grid: Grid1D, interior: &[Complex64]) -> Self {
        debug_assert_eq!(interior.len() + 2, grid.n());
        let mut values = Vec::with_capacity(grid.n());
        values.push(Complex64::ZERO);
        values.extend_from_slice(interior);
        values.push(Complex64::ZERO);
        Self {
            grid,
            values,
            label: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
            label: self.label,
        }
    }

    /// `int |psi|^2 dx` with the grid's trapezoid weights.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.quadrature_weight(i) * v.norm_sqr())
            .sum()
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// Normalised Gaussian packet `exp(-(x-x0)^2/(4 sigma^2) + i k0 x)` (unit L2 norm on the real line).
pub fn gaussian_packet(grid: Grid1D, x0: f64, sigma: f64, k0: f64) -> WaveFunction {
    let c = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    WaveFunction::from_fn(grid, |x| {
        let g = c * (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
        Complex64::from_polar(g, k0 * x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_walls_enforced() {
        let g = Grid1D::dirichlet(0.0, 1.0, 5).unwrap();
        let bad = vec![Complex64::ONE; 5];
        assert!(WaveFunction::new(g, bad).is_err());
        let w = WaveFunction::from_fn(g, |_| Complex64::ONE);
        assert_eq!(w.values()[0], Complex64::ZERO);
        assert_eq!(w.values()[4], Complex64::ZERO);
        assert_eq!(w.values()[2], Complex64::ONE);
    }

    #[test]
    fn length_checked() {
        let g = Grid1D::periodic(0.0, 1.0, 5).unwrap();
        assert!(WaveFunction::new(g, vec![Complex64::ONE; 4]).is_err());
    }

    #[test]
    fn gaussian_has_unit_norm() {
        let g = Grid1D::dirichlet(-20.0, 20.0, 4001).unwrap();
        let w = gaussian_packet(g, 1.0, 1.3, 2.0);
        assert!((w.l2_norm_sqr() - 1.0).abs() < 1e-12);
    }
}
