//! Lattice operators of the stationary problem `A psi = E B psi`.
//!
//! * gradient: `A = V - D2/2m`
//! * gauge:    `A = V - D2/2m + a D^T diag(V_mid) D`, the flux form of `-a (V psi')'`
//! * both:     `B = 1 - a D2`
//!
//! `D2` is the three-point Laplacian and `D` the forward difference, so
//! `D^T D = -D2` and every matrix here is symmetric.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::model::ModelParams;
use crate::potential::Potential;
use crate::tridiag::Tridiagonal;
use crate::wavefunction::WaveFunction;

/// `A` and `B` restricted to the `n - 2` interior unknowns of a Dirichlet grid.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub a: Tridiagonal<f64>,
    pub b: Tridiagonal<f64>,
    pub grid: Grid1D,
    pub params: ModelParams,
}

pub fn build_operators(potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<OperatorPair> {
    if grid.boundary() != Boundary::Dirichlet {
        return Err(Error::UnsupportedBoundary(grid.boundary().name()));
    }
    if params.a() < 0.0 {
        return Err(Error::NegativeCoupling(params.a()));
    }
    let lattice = LatticeHamiltonian::new(potential, grid, params)?;
    let n = grid.n();
    let interior = n - 2;
    let a_mat = Tridiagonal::new(
        (1..interior).map(|i| lattice.offdiag(i)).collect(),
        (1..=interior).map(|i| lattice.diag(i)).collect(),
        (1..interior).map(|i| lattice.offdiag(i)).collect(),
    );
    Ok(OperatorPair {
        a: a_mat,
        b: norm_matrix(grid, params.a(), interior),
        grid: *grid,
        params: *params,
    })
}

fn norm_matrix(grid: &Grid1D, a: f64, size: usize) -> Tridiagonal<f64> {
    let c = a / (grid.h() * grid.h());
    Tridiagonal::new(vec![-c; size - 1], vec![1.0 + 2.0 * c; size], vec![-c; size - 1])
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `psi^T A psi / psi^T B psi` over the interior unknowns.
    pub fn rayleigh_quotient(&self, interior: &[f64]) -> f64 {
        let num: f64 = self.a.matvec(interior).iter().zip(interior).map(|(p, q)| p * q).sum();
        let den: f64 = self.b.matvec(interior).iter().zip(interior).map(|(p, q)| p * q).sum();
        num / den
    }
}

/// Coefficients of the lattice Hamiltonian at every grid point, for either boundary.
pub(crate) struct LatticeHamiltonian {
    grid: Grid1D,
    v: Vec<f64>,
    /// Gauge weights `a V` on the edges; empty for the gradient variant.
    w: Vec<f64>,
    kin: f64,
}

impl LatticeHamiltonian {
    pub(crate) fn new(potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Self> {
        let v = potential.sample(grid)?;
        let h2 = grid.h() * grid.h();
        let w = if params.is_gauge() && params.a() != 0.0 {
            potential
                .sample_midpoints(grid)?
                .into_iter()
                .map(|vm| params.a() * vm / h2)
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            grid: *grid,
            v,
            w,
            kin: 1.0 / (2.0 * params.m() * h2),
        })
    }

    fn edge_weight(&self, e: usize) -> f64 {
        if self.w.is_empty() {
            0.0
        } else {
            self.w[e]
        }
    }

    /// Diagonal entry at grid point `i` (interior rows on Dirichlet grids).
    fn diag(&self, i: usize) -> f64 {
        let n = self.grid.n();
        let (left, right) = match self.grid.boundary() {
            Boundary::Dirichlet => (i.saturating_sub(1), i.min(n - 2)),
            Boundary::Periodic => ((i + n - 1) % n, i),
        };
        self.v[i] + 2.0 * self.kin + self.edge_weight(left) + self.edge_weight(right)
    }

    /// Coupling between grid points `i` and `i + 1` (edge `i`).
    fn offdiag(&self, i: usize) -> f64 {
        -self.kin - self.edge_weight(i)
    }

    /// `A psi` on a full field; Dirichlet wall rows are zero.
    pub(crate) fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        match self.grid.boundary() {
            Boundary::Dirichlet => (0..n)
                .map(|i| {
                    if i == 0 || i == n - 1 {
                        return Complex64::ZERO;
                    }
                    psi[i] * self.diag(i) + psi[i - 1] * self.offdiag(i - 1) + psi[i + 1] * self.offdiag(i)
                })
                .collect(),
            Boundary::Periodic => (0..n)
                .map(|i| {
                    let l = (i + n - 1) % n;
                    let r = (i + 1) % n;
                    psi[i] * self.diag(i) + psi[l] * self.offdiag(l) + psi[r] * self.offdiag(i)
                })
                .collect(),
        }
    }
}

/// Solves `(1 - a D2) x = rhs` on a full field. Dirichlet walls stay zero.
pub(crate) fn solve_norm(rhs: &[Complex64], grid: &Grid1D, a: f64) -> Result<Vec<Complex64>> {
    if a == 0.0 {
        let mut out = rhs.to_vec();
        if grid.boundary() == Boundary::Dirichlet {
            let n = out.len();
            out[0] = Complex64::ZERO;
            out[n - 1] = Complex64::ZERO;
        }
        return Ok(out);
    }
    let n = grid.n();
    let c = a / (grid.h() * grid.h());
    match grid.boundary() {
        Boundary::Dirichlet => {
            let b = norm_matrix(grid, a, n - 2);
            let mut x = vec![Complex64::ZERO; n];
            let lu = b.factor()?;
            let mut inner: Vec<Complex64> = rhs[1..n - 1].to_vec();
            solve_real_lu(&lu, &mut inner);
            x[1..n - 1].copy_from_slice(&inner);
            Ok(x)
        }
        Boundary::Periodic => {
            let b = Tridiagonal::new(
                vec![Complex64::new(-c, 0.0); n - 1],
                vec![Complex64::new(1.0 + 2.0 * c, 0.0); n],
                vec![Complex64::new(-c, 0.0); n - 1],
            );
            let corner = Complex64::new(-c, 0.0);
            b.solve_cyclic(corner, corner, rhs)
        }
    }
}

fn solve_real_lu(lu: &crate::tridiag::TridiagonalLu<f64>, rhs: &mut [Complex64]) {
    let mut re: Vec<f64> = rhs.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = rhs.iter().map(|v| v.im).collect();
    lu.solve_in_place(&mut re);
    lu.solve_in_place(&mut im);
    for ((v, r), i) in rhs.iter_mut().zip(re).zip(im) {
        *v = Complex64::new(r, i);
    }
}

/// `d psi/dt = -i B^{-1} A psi` from the equation of motion.
pub fn time_derivative(psi: &WaveFunction, potential: &Potential, params: &ModelParams) -> Result<Vec<Complex64>> {
    let lattice = LatticeHamiltonian::new(potential, psi.grid(), params)?;
    time_derivative_raw(psi.values(), &lattice, psi.grid(), params.a())
}

pub(crate) fn time_derivative_raw(
    psi: &[Complex64],
    lattice: &LatticeHamiltonian,
    grid: &Grid1D,
    a: f64,
) -> Result<Vec<Complex64>> {
    let hpsi = lattice.apply(psi);
    let x = solve_norm(&hpsi, grid, a)?;
    Ok(x.into_iter().map(|v| v * Complex64::new(0.0, -1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;

    #[test]
    fn zero_coupling_gives_identity_norm() {
        let g = Grid1D::dirichlet(0.0, 1.0, 12).unwrap();
        let ops = build_operators(&Potential::Constant(0.3), &g, &ModelParams::standard(1.0).unwrap()).unwrap();
        assert!(ops.b.diag.iter().all(|d| *d == 1.0));
        assert!(ops.b.sub.iter().all(|d| *d == 0.0));
        let h2 = g.h() * g.h();
        assert!((ops.a.diag[3] - (0.3 + 1.0 / h2)).abs() < 1e-9);
        assert!((ops.a.sub[3] + 0.5 / h2).abs() < 1e-9);
    }

    #[test]
    fn periodic_rejected() {
        let g = Grid1D::periodic(0.0, 1.0, 12).unwrap();
        let p = ModelParams::gradient(1.0, 0.1).unwrap();
        assert_eq!(
            build_operators(&Potential::Constant(0.0), &g, &p).unwrap_err(),
            Error::UnsupportedBoundary("periodic")
        );
    }

    #[test]
    fn matrices_are_symmetric() {
        let g = Grid1D::dirichlet(-2.0, 2.0, 41).unwrap();
        let p = ModelParams::gauge(1.0, 0.3).unwrap();
        let ops = build_operators(&Potential::harmonic(2.0, 0.1), &g, &p).unwrap();
        assert_eq!(ops.a.sub, ops.a.sup);
        assert_eq!(ops.b.sub, ops.b.sup);
    }

    /// Rayleigh quotient of a lattice plane wave under constant V, using the periodic action.
    fn plane_wave_energy(variant: Variant, a: f64, v0: f64) -> (f64, f64) {
        let g = Grid1D::periodic(0.0, 6.0, 90).unwrap();
        let p = ModelParams::new(1.3, a, variant).unwrap();
        let k = g.lattice_wavenumber(7);
        let psi: Vec<Complex64> = g.points().iter().map(|x| Complex64::from_polar(1.0, k * x)).collect();
        let lat = LatticeHamiltonian::new(&Potential::Constant(v0), &g, &p).unwrap();
        let hpsi = lat.apply(&psi);
        let lap = crate::stencil::laplacian_of(&psi, &g);
        let bpsi: Vec<Complex64> = psi.iter().zip(&lap).map(|(v, l)| v - l * a).collect();
        let num: Complex64 = psi.iter().zip(&hpsi).map(|(p, q)| p.conj() * q).sum();
        let den: Complex64 = psi.iter().zip(&bpsi).map(|(p, q)| p.conj() * q).sum();
        let h = g.h();
        let khat2 = (2.0 - 2.0 * (k * h).cos()) / (h * h);
        ((num / den).re, khat2)
    }

    #[test]
    fn gauge_plane_wave_reproduces_local_energy() {
        let (m, a, v0) = (1.3, 0.4, 0.8);
        let (e, khat2) = plane_wave_energy(Variant::Gauge, a, v0);
        let want = v0 + (khat2 / (2.0 * m)) / (1.0 + a * khat2);
        assert!((e - want).abs() < 1e-12);
    }

    #[test]
    fn gradient_plane_wave_reproduces_effective_mass_relation() {
        let (m, a, v0) = (1.3, 0.4, 0.8);
        let (e, khat2) = plane_wave_energy(Variant::Gradient, a, v0);
        // E (1 + a k^2) = V + k^2 / 2m
        assert!((e * (1.0 + a * khat2) - (v0 + khat2 / (2.0 * m))).abs() < 1e-11);
    }
}
