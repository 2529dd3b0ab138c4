//! Semiclassical waves of the gauge variant for slowly varying potentials.
//!
//! With `eps = E - V(x)` inside the pass band `(0, 1/(2ma))`:
//!
//! ```text
//! k^2 = 2 m eps / (1 - 2 m a eps)
//! 0   = (1 + aV)(k' A + 2k A') + a k V' A     =>  A ~ [k (1 + aV)]^(-1/2)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{ModelParams, Variant};
use crate::output::{Cell, Table};
use crate::potential::Potential;
use crate::wavefunction::WaveFunction;

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

/// RK4 sub-steps per grid interval for the amplitude equation.
const AMPLITUDE_SUBSTEPS: usize = 8;

fn check_variant(params: &ModelParams) -> Result<()> {
    if params.variant() == Variant::Gradient && params.a() != 0.0 {
        return Err(Error::WrongVariant {
            expected: "gauge",
            got: params.variant().name(),
        });
    }
    Ok(())
}

fn in_band(eps: f64, params: &ModelParams) -> bool {
    eps > 0.0 && 2.0 * params.m() * params.a() * eps < 1.0
}

/// `k` as a function of the local kinetic energy; `None` outside the band.
fn k_of_eps(eps: f64, params: &ModelParams) -> Option<f64> {
    let gap = 1.0 - 2.0 * params.m() * params.a() * eps;
    in_band(eps, params).then(|| (2.0 * params.m() * eps / gap).sqrt())
}

/// Maximal runs of grid points where `flag` holds, as `(x_first, x_last)`.
fn runs(grid: &Grid1D, flag: impl Fn(usize) -> bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 0..grid.n() {
        match (flag(i), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((grid.x(s), grid.x(i - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((grid.x(s), grid.x(grid.n() - 1)));
    }
    out
}

fn local_energies(e: f64, potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Vec<f64>> {
    check_variant(params)?;
    let eps: Vec<f64> = grid.points().iter().map(|&x| e - potential.value(x)).collect();
    let bad = runs(grid, |i| !in_band(eps[i], params));
    if !bad.is_empty() {
        return Err(Error::OutOfBand(bad));
    }
    Ok(eps)
}

pub fn wkb_wavenumber(e: f64, potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Vec<f64>> {
    let eps = local_energies(e, potential, grid, params)?;
    Ok(eps.iter().map(|&x| k_of_eps(x, params).unwrap_or(f64::NAN)).collect())
}

/// `[k (1 + aV)]^(-1/2)`.
pub fn wkb_amplitude_closed_form(e: f64, potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Vec<f64>> {
    let k = wkb_wavenumber(e, potential, grid, params)?;
    let a = params.a();
    Ok(grid
        .points()
        .iter()
        .zip(&k)
        .map(|(&x, k)| (k * (1.0 + a * potential.value(x))).abs().sqrt().recip())
        .collect())
}

/// Integrates `d ln A/dx = -k'/(2k) - a V'/(2(1 + aV))` with RK4 from the left end,
/// starting from the closed-form value there.
pub fn wkb_amplitude(e: f64, potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Vec<f64>> {
    let k = wkb_wavenumber(e, potential, grid, params)?;
    let (m, a) = (params.m(), params.a());
    let rhs = |x: f64| -> f64 {
        let v = potential.value(x);
        let dv = potential.derivative(x);
        let eps = e - v;
        let gap = 1.0 - 2.0 * m * a * eps;
        let kx = (2.0 * m * eps / gap).sqrt();
        // dk/dx = (dk/d eps)(d eps/dx)
        let dk = -dv * m / (kx * gap * gap);
        -dk / (2.0 * kx) - a * dv / (2.0 * (1.0 + a * v))
    };
    let mut ln_a = -0.5 * (k[0] * (1.0 + a * potential.value(grid.x(0)))).abs().ln();
    let mut out = Vec::with_capacity(grid.n());
    out.push(ln_a.exp());
    let sub = grid.h() / AMPLITUDE_SUBSTEPS as f64;
    for i in 0..grid.n() - 1 {
        let x0 = grid.x(i);
        for s in 0..AMPLITUDE_SUBSTEPS {
            let x = x0 + s as f64 * sub;
            // the right-hand side does not depend on ln A
            let (k1, k2, k4) = (rhs(x), rhs(x + 0.5 * sub), rhs(x + sub));
            ln_a += sub * (k1 + 4.0 * k2 + k4) / 6.0;
        }
        out.push(ln_a.exp());
    }
    Ok(out)
}

/// `|V'| / (m^(1/2) (2 eps)^(3/2) (1 - 2 m a eps)^(1/2))`, equal to `|k'/k^2|`;
/// `+inf` wherever `eps` leaves the band.
pub fn wkb_validity(e: f64, potential: &Potential, grid: &Grid1D, params: &ModelParams) -> Result<Vec<f64>> {
    check_variant(params)?;
    let (m, a) = (params.m(), params.a());
    Ok(grid
        .points()
        .iter()
        .map(|&x| {
            let eps = e - potential.value(x);
            if !in_band(eps, params) {
                return f64::INFINITY;
            }
            let den = m.sqrt() * (2.0 * eps).powf(1.5) * (1.0 - 2.0 * m * a * eps).sqrt();
            potential.derivative(x).abs() / den
        })
        .collect())
}

/// Intervals where the validity metric exceeds `threshold`.
pub fn danger_zones(validity: &[f64], grid: &Grid1D, threshold: f64) -> Vec<(f64, f64)> {
    runs(grid, |i| !(validity[i] <= threshold))
}

/// Cumulative trapezoid integral of `k`, shifted to vanish at `reference`.
fn phase_from(k: &[f64], grid: &Grid1D, reference: f64) -> Vec<f64> {
    let h = grid.h();
    let mut phase = Vec::with_capacity(k.len());
    let mut acc = 0.0;
    phase.push(0.0);
    for w in k.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        phase.push(acc);
    }
    let t = ((reference - grid.x_min()) / h).clamp(0.0, (grid.n() - 1) as f64);
    let i = (t.floor() as usize).min(grid.n() - 2);
    let f = t - i as f64;
    // integrate the linear interpolant of k up to the reference point
    let k_ref = k[i] * (1.0 - f) + k[i + 1] * f;
    let at_ref = phase[i] + 0.5 * f * h * (k[i] + k_ref);
    phase.iter().map(|p| p - at_ref).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkbSolution {
    pub grid: Grid1D,
    pub k: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub validity: Vec<f64>,
    pub danger_zones: Vec<(f64, f64)>,
    /// `A e^{i phase}` at every grid point, walls included.
    pub psi: Vec<Complex64>,
}

impl WkbSolution {
    pub fn solve(
        e: f64,
        potential: &Potential,
        grid: &Grid1D,
        params: &ModelParams,
        reference: f64,
        threshold: f64,
    ) -> Result<Self> {
        let k = wkb_wavenumber(e, potential, grid, params)?;
        let amplitude = wkb_amplitude(e, potential, grid, params)?;
        let validity = wkb_validity(e, potential, grid, params)?;
        let phase = phase_from(&k, grid, reference);
        let psi = amplitude.iter().zip(&phase).map(|(a, p)| Complex64::from_polar(*a, *p)).collect();
        Ok(Self {
            grid: *grid,
            danger_zones: danger_zones(&validity, grid, threshold),
            k,
            amplitude,
            phase,
            validity,
            psi,
        })
    }

    /// Columns `x, k, A, validity, re, im`.
    pub fn table(&self) -> Table {
        let mut t = Table::new(["x", "k", "A", "validity", "re", "im"]);
        for i in 0..self.grid.n() {
            t.push(vec![
                Cell::Float(self.grid.x(i)),
                self.k[i].into(),
                self.amplitude[i].into(),
                self.validity[i].into(),
                self.psi[i].re.into(),
                self.psi[i].im.into(),
            ]);
        }
        t
    }
}

/// `A(x) exp(i int_ref^x k)`; on Dirichlet grids the wall samples are zeroed.
pub fn wkb_wavefunction(
    e: f64,
    potential: &Potential,
    grid: &Grid1D,
    params: &ModelParams,
    reference: f64,
) -> Result<WaveFunction> {
    let sol = WkbSolution::solve(e, potential, grid, params, reference, DEFAULT_VALIDITY_THRESHOLD)?;
    Ok(WaveFunction::from_fn(*grid, |x| sol.psi[grid.nearest_index(x)]))
}
