//! The gradient-corrected inner product and the presence density derived from it.
//!
//! On the lattice the norm is `h psi^dagger (1 - a D2) psi`, written as a
//! trapezoid sum of `|psi|^2` plus `a` times the sum of squared forward
//! differences. The pointwise density splits each edge term evenly between
//! its two end points, so its trapezoid integral reproduces the norm exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::model::ModelParams;
use crate::stencil::{edge_differences, laplacian_of};
use crate::wavefunction::WaveFunction;

/// `int (psi* phi + a psi*' phi') dx` on the lattice.
pub fn sobolev_inner(psi: &WaveFunction, phi: &WaveFunction, params: &ModelParams) -> Result<Complex64> {
    psi.same_grid(phi)?;
    Ok(sobolev_inner_raw(psi.values(), phi.values(), psi.grid(), params.a()))
}

pub(crate) fn sobolev_inner_raw(psi: &[Complex64], phi: &[Complex64], grid: &Grid1D, a: f64) -> Complex64 {
    let mut acc: Complex64 = psi
        .iter()
        .zip(phi)
        .enumerate()
        .map(|(i, (p, q))| p.conj() * q * grid.quadrature_weight(i))
        .sum();
    if a != 0.0 {
        let dp = edge_differences(psi, grid);
        let dq = edge_differences(phi, grid);
        let grad: Complex64 = dp.iter().zip(&dq).map(|(p, q)| p.conj() * q).sum();
        acc += grad * (a * grid.h());
    }
    acc
}

/// Squared edge gradient attributed to each point (mean of the adjacent edges).
pub(crate) fn point_gradient_sqr(values: &[Complex64], grid: &Grid1D) -> Vec<f64> {
    let n = values.len();
    let d2: Vec<f64> = edge_differences(values, grid).iter().map(|d| d.norm_sqr()).collect();
    match grid.boundary() {
        Boundary::Dirichlet => (0..n)
            .map(|i| match i {
                0 => d2[0],
                i if i == n - 1 => d2[n - 2],
                i => 0.5 * (d2[i - 1] + d2[i]),
            })
            .collect(),
        Boundary::Periodic => (0..n).map(|i| 0.5 * (d2[(i + n - 1) % n] + d2[i])).collect(),
    }
}

pub(crate) fn presence_density_raw(values: &[Complex64], grid: &Grid1D, a: f64) -> Vec<f64> {
    if a == 0.0 {
        return values.iter().map(|v| v.norm_sqr()).collect();
    }
    point_gradient_sqr(values, grid)
        .into_iter()
        .zip(values)
        .map(|(g, v)| v.norm_sqr() + a * g)
        .collect()
}

/// `rho = |psi|^2 + a |psi'|^2`, non-negative pointwise.
pub fn presence_density(psi: &WaveFunction, params: &ModelParams) -> Vec<f64> {
    presence_density_raw(psi.values(), psi.grid(), params.a())
}

/// Trapezoid integral of a real profile.
pub fn integrate(values: &[f64], grid: &Grid1D) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.quadrature_weight(i))
        .sum()
}

/// Rescales `psi` so that `int rho dx = 1`.
pub fn normalize(psi: &WaveFunction, params: &ModelParams) -> Result<WaveFunction> {
    let norm = sobolev_inner(psi, psi, params)?.re;
    if !(norm > f64::MIN_POSITIVE) || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(psi.scaled(norm.sqrt().recip()))
}

/// The dual vector `(1 - a d^2/dx^2) psi*`.
pub fn bra_map(psi: &WaveFunction, params: &ModelParams) -> Vec<Complex64> {
    let conj: Vec<Complex64> = psi.values().iter().map(|v| v.conj()).collect();
    if params.a() == 0.0 {
        return conj;
    }
    let lap = laplacian_of(&conj, psi.grid());
    conj.iter().zip(lap).map(|(c, l)| c - l * params.a()).collect()
}

/// `int bra(x) phi(x) dx` with trapezoid weights.
pub fn pair(bra: &[Complex64], phi: &WaveFunction) -> Complex64 {
    bra.iter()
        .zip(phi.values())
        .enumerate()
        .map(|(i, (b, p))| b * p * phi.grid().quadrature_weight(i))
        .sum()
}
