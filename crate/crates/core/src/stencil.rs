//! Finite-difference stencils shared by every solver.
//!
//! The same three-point Laplacian builds the norm operator, the Hamiltonian
//! and the propagator, so discrete conservation holds to round-off.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::grid::{Boundary, Grid1D};
use crate::wavefunction::WaveFunction;

pub trait Field: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    const ZERO: Self;
}

impl Field for f64 {
    const ZERO: Self = 0.0;
}

impl Field for Complex64 {
    const ZERO: Self = Complex64::ZERO;
}

/// Second-order central `d^2/dx^2`. Dirichlet grids see zero ghosts beyond both ends.
pub fn laplacian_of<T: Field>(values: &[T], grid: &Grid1D) -> Vec<T> {
    let n = values.len();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let at = |i: isize| -> T {
        if i < 0 || i >= n as isize {
            match grid.boundary() {
                Boundary::Dirichlet => T::ZERO,
                Boundary::Periodic => values[i.rem_euclid(n as isize) as usize],
            }
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|i| (at(i - 1) + at(i + 1) - at(i) * 2.0) * inv_h2)
        .collect()
}

pub fn laplacian(psi: &WaveFunction) -> Vec<Complex64> {
    laplacian_of(psi.values(), psi.grid())
}

/// Central first derivative; second-order one-sided at Dirichlet ends.
pub fn gradient_of<T: Field>(values: &[T], grid: &Grid1D) -> Vec<T> {
    let n = values.len();
    let h = grid.h();
    let mut out = vec![T::ZERO; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * (0.5 / h);
    }
    match grid.boundary() {
        Boundary::Dirichlet => {
            out[0] = (values[1] * 4.0 - values[0] * 3.0 - values[2]) * (0.5 / h);
            out[n - 1] = (values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * (0.5 / h);
        }
        Boundary::Periodic => {
            out[0] = (values[1] - values[n - 1]) * (0.5 / h);
            out[n - 1] = (values[0] - values[n - 2]) * (0.5 / h);
        }
    }
    out
}

/// Forward differences on the edges: `n - 1` of them on Dirichlet grids, `n` (wrapping) on periodic ones.
pub fn edge_differences<T: Field>(values: &[T], grid: &Grid1D) -> Vec<T> {
    let n = values.len();
    let inv_h = 1.0 / grid.h();
    let edges = match grid.boundary() {
        Boundary::Dirichlet => n - 1,
        Boundary::Periodic => n,
    };
    (0..edges)
        .map(|e| (values[(e + 1) % n] - values[e]) * inv_h)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_annihilated_on_periodic_grid() {
        let g = Grid1D::periodic(0.0, 1.0, 17).unwrap();
        let lap = laplacian_of(&vec![Complex64::new(2.5, -1.0); 17], &g);
        assert!(lap.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn lattice_plane_wave_eigenvalue() {
        let g = Grid1D::periodic(0.0, 5.0, 64).unwrap();
        let k = g.lattice_wavenumber(3);
        let h = g.h();
        let psi = WaveFunction::from_fn(g, |x| Complex64::from_polar(1.0, k * x));
        let khat2 = (2.0 - 2.0 * (k * h).cos()) / (h * h);
        for (l, v) in laplacian(&psi).iter().zip(psi.values()) {
            assert!((l + v * khat2).norm() < 1e-10);
        }
    }

    #[test]
    fn quadratic_is_exact_in_the_interior() {
        let g = Grid1D::dirichlet(-1.0, 2.0, 31).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|x| x * x).collect();
        let lap = laplacian_of(&vals, &g);
        for v in &lap[1..30] {
            assert!((v - 2.0).abs() < 1e-9);
        }
        // ghost zeros act at the ends
        assert!((lap[0] - 2.0).abs() > 1.0);
    }

    #[test]
    fn gradient_exact_on_quadratics() {
        let g = Grid1D::dirichlet(0.0, 1.0, 11).unwrap();
        let vals: Vec<f64> = g.points().iter().map(|x| 3.0 * x * x - x).collect();
        let d = gradient_of(&vals, &g);
        for (x, v) in g.points().iter().zip(&d) {
            assert!((v - (6.0 * x - 1.0)).abs() < 1e-10);
        }
    }
}
