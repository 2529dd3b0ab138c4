use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Field vanishes on the first and last sample; ghost values beyond them are zero.
    Dirichlet,
    /// Sample `n - 1` neighbours sample `0`; the period is `n * h`.
    Periodic,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
        }
    }
}

/// Uniform 1-D lattice `x_i = x_min + i h`, `i = 0..n`, with `h = (x_max - x_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need n >= 3 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max = {x_max} must exceed x_min = {x_min}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            boundary,
        })
    }

    pub fn dirichlet(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, n, Boundary::Dirichlet)
    }

    pub fn periodic(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, n, Boundary::Periodic)
    }

    #[inline]
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    #[inline]
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Length covered by the quadrature: `x_max - x_min` for Dirichlet, the period `n h` otherwise.
    pub fn length(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.x_max - self.x_min,
            Boundary::Periodic => self.n as f64 * self.h(),
        }
    }

    /// Trapezoid weights. Periodic grids use the rectangle rule over one period.
    pub fn quadrature_weight(&self, i: usize) -> f64 {
        let h = self.h();
        match self.boundary {
            Boundary::Dirichlet if i == 0 || i == self.n - 1 => 0.5 * h,
            _ => h,
        }
    }

    /// Lattice wavenumber `2 pi j / (n h)` that is exactly periodic on this grid.
    pub fn lattice_wavenumber(&self, j: i64) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.length_periodic()
    }

    fn length_periodic(&self) -> f64 {
        self.n as f64 * self.h()
    }

    /// Grid with the same bounds and boundary and `(n - 1) * factor + 1` points.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n: (self.n - 1) * factor + 1,
            ..*self
        }
    }

    /// Index of the grid point closest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.x_min) / self.h()).round();
        t.clamp(0.0, (self.n - 1) as f64) as usize
    }
}
