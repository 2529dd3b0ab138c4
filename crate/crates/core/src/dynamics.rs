//! Crank-Nicolson time evolution and the local conservation laws.
//!
//! Both variants evolve by `(B + i dt/2 A) psi+ = (B - i dt/2 A) psi`, which
//! preserves `psi^dagger B psi` exactly for symmetric `A` and `B`.
//!
//! Balance laws checked on a trajectory:
//!
//! ```text
//! d_t rho + d_x j             = 0
//! d_t eps + d_x j_eps         = 0
//! d_t pi  + d_x stress + src  = 0,   src = 2 rho_eff dV/dx
//! ```
//!
//! with `rho_eff = |psi|^2` (gradient) or `|psi|^2 + a |psi'|^2` (gauge).
//! `stress` is the momentum flux with the sign that makes the law read as above.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::model::ModelParams;
use crate::norm::{integrate, presence_density_raw, sobolev_inner_raw};
use crate::operators::{build_operators, time_derivative_raw, LatticeHamiltonian};
use crate::output::format_float;
use crate::par::{self, Execution};
use crate::potential::Potential;
use crate::stencil::{gradient_of, laplacian_of};
use crate::tridiag::{Tridiagonal, TridiagonalLu};
use crate::wavefunction::{Label, WaveFunction};

/// Pre-factored Crank-Nicolson stepper on the interior of a Dirichlet grid.
pub struct Propagator {
    grid: Grid1D,
    dt: f64,
    explicit: Tridiagonal<Complex64>,
    implicit: TridiagonalLu<Complex64>,
}

impl Propagator {
    pub fn new(grid: &Grid1D, potential: &Potential, params: &ModelParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let ops = build_operators(potential, grid, params)?;
        let tau = 0.5 * dt;
        let lift = |m: &Tridiagonal<f64>, s: Complex64| -> Tridiagonal<Complex64> {
            let f = |v: &[f64]| v.iter().map(|x| s * x).collect::<Vec<_>>();
            Tridiagonal::new(f(&m.sub), f(&m.diag), f(&m.sup))
        };
        let one = Complex64::ONE;
        let b = lift(&ops.b, one);
        let a_plus = lift(&ops.a, Complex64::new(0.0, tau));
        let a_minus = lift(&ops.a, Complex64::new(0.0, -tau));
        let implicit = b.combine(one, &a_plus, one).factor()?;
        let explicit = b.combine(one, &a_minus, one);
        Ok(Self {
            grid: *grid,
            dt,
            explicit,
            implicit,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Advances the full field (walls included) by one step.
    pub fn step(&self, psi: &mut [Complex64]) {
        let n = psi.len();
        let mut rhs = self.explicit.matvec(&psi[1..n - 1]);
        self.implicit.solve_in_place(&mut rhs);
        psi[1..n - 1].copy_from_slice(&rhs);
    }

    pub fn advance(&self, psi: &mut [Complex64], steps: usize) {
        for _ in 0..steps {
            self.step(psi);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Frame `k` sits at `t0 + k * stride * dt`.
    pub frames: Vec<WaveFunction>,
    pub t0: f64,
    pub dt: f64,
    pub stride: usize,
    pub params: ModelParams,
    pub potential: Potential,
}

impl Trajectory {
    pub fn frame_dt(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.frame_dt()
    }

    pub fn grid(&self) -> &Grid1D {
        self.frames[0].grid()
    }

    /// `int rho dx` per frame.
    pub fn norms(&self) -> Vec<f64> {
        let a = self.params.a();
        self.frames
            .iter()
            .map(|f| sobolev_inner_raw(f.values(), f.values(), f.grid(), a).re)
            .collect()
    }

    /// `int |psi|^2 dx` per frame.
    pub fn l2_norms(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.l2_norm_sqr()).collect()
    }

    /// `int x rho dx / int rho dx` per frame.
    pub fn centroids(&self) -> Vec<f64> {
        self.frames.iter().map(|f| centroid(f, &self.params)).collect()
    }

    /// Writes `frame,t,x,re,im,rho` rows for every frame.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "frame,t,x,re,im,rho")?;
        for (k, f) in self.frames.iter().enumerate() {
            let rho = presence_density_raw(f.values(), f.grid(), self.params.a());
            let t = format_float(self.time(k));
            for (i, (v, r)) in f.values().iter().zip(&rho).enumerate() {
                writeln!(
                    w,
                    "{k},{t},{},{},{},{}",
                    format_float(f.grid().x(i)),
                    format_float(v.re),
                    format_float(v.im),
                    format_float(*r)
                )?;
            }
        }
        Ok(())
    }
}

pub fn centroid(psi: &WaveFunction, params: &ModelParams) -> f64 {
    let rho = presence_density_raw(psi.values(), psi.grid(), params.a());
    let g = psi.grid();
    let xr: Vec<f64> = rho.iter().enumerate().map(|(i, r)| g.x(i) * r).collect();
    integrate(&xr, g) / integrate(&rho, g)
}

pub fn evolve(psi0: &WaveFunction, potential: &Potential, params: &ModelParams, dt: f64, steps: usize) -> Result<Trajectory> {
    evolve_strided(psi0, potential, params, dt, steps, 1)
}

/// Keeps every `stride`-th frame; `steps` need not be a multiple of `stride`.
pub fn evolve_strided(
    psi0: &WaveFunction,
    potential: &Potential,
    params: &ModelParams,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::InvalidArgument("frame stride must be at least 1".into()));
    }
    let prop = Propagator::new(psi0.grid(), potential, params, dt)?;
    let t0 = match psi0.label() {
        Some(Label::Time(t)) => t,
        _ => 0.0,
    };
    let grid = *psi0.grid();
    let mut psi = psi0.values().to_vec();
    let mut frames = Vec::with_capacity(steps / stride + 1);
    frames.push(WaveFunction::new(grid, psi.clone())?.with_label(Label::Time(t0)));
    for s in 1..=steps {
        prop.step(&mut psi);
        if s % stride == 0 {
            let t = t0 + s as f64 * dt;
            frames.push(WaveFunction::new(grid, psi.clone())?.with_label(Label::Time(t)));
        }
    }
    Ok(Trajectory {
        frames,
        t0,
        dt,
        stride,
        params: *params,
        potential: potential.clone(),
    })
}

/// Local densities and fluxes of the three balance laws at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFields {
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    pub eps: Vec<f64>,
    pub j_eps: Vec<f64>,
    /// On a plane wave `2k(1 + ak^2)|psi|^2`, twice `plane_wave_momentum` per unit `|psi|^2`.
    pub pi: Vec<f64>,
    pub stress: Vec<f64>,
    /// `2 rho_eff dV/dx`
    pub source: Vec<f64>,
}

pub fn compute_fields(psi: &WaveFunction, potential: &Potential, params: &ModelParams) -> Result<DensityFields> {
    let lattice = LatticeHamiltonian::new(potential, psi.grid(), params)?;
    let v = potential.sample(psi.grid())?;
    let dv: Vec<f64> = psi.grid().points().iter().map(|&x| potential.derivative(x)).collect();
    fields_raw(psi.values(), psi.grid(), &lattice, &v, &dv, params)
}

fn fields_raw(
    psi: &[Complex64],
    grid: &Grid1D,
    lattice: &LatticeHamiltonian,
    v: &[f64],
    dv: &[f64],
    params: &ModelParams,
) -> Result<DensityFields> {
    let (m, a) = (params.m(), params.a());
    let gauge = params.is_gauge();
    let chi = time_derivative_raw(psi, lattice, grid, a)?;
    let px = gradient_of(psi, grid);
    let pxx = laplacian_of(psi, grid);
    let cx = gradient_of(&chi, grid);
    let cxx = laplacian_of(&chi, grid);
    let i = Complex64::I;
    let n = psi.len();

    let rho = presence_density_raw(psi, grid, a);
    let mut j = vec![0.0; n];
    let mut eps = vec![0.0; n];
    let mut j_eps = vec![0.0; n];
    let mut pi = vec![0.0; n];
    let mut stress = vec![0.0; n];
    let mut source = vec![0.0; n];

    // (V psi')' for the gauge momentum flux
    let vpx: Vec<Complex64> = px.iter().zip(v).map(|(p, vv)| p * vv).collect();
    let d_vpx = if gauge { gradient_of(&vpx, grid) } else { Vec::new() };

    for k in 0..n {
        let (p, p1, p2) = (psi[k], px[k], pxx[k]);
        let (c, c1, c2) = (chi[k], cx[k], cxx[k]);
        let (pc, p1c, p2c, cc, c1c, c2c) = (p.conj(), p1.conj(), p2.conj(), c.conj(), c1.conj(), c2.conj());
        let abs_p = p.norm_sqr();
        let abs_p1 = p1.norm_sqr();

        let mut jk = (i / (2.0 * m)) * (p * p1c - pc * p1) - a * (p * c1c + pc * c1);
        let mut ek = v[k] * abs_p + abs_p1 / (2.0 * m);
        let mut jek = i * a * (cc * c1 - c1c * c) - (cc * p1 + p1c * c) / (2.0 * m);
        let pik = i * (p * p1c - pc * p1 - a * (p1c * p2 - p1 * p2c));
        let mut tk = (pc * p2 - p1 * p1c + p * p2c - p1c * p1) / (2.0 * m)
            + i * a * (p1c * c1 - p1 * c1c + p * c2c - pc * c2);
        let mut rho_eff = abs_p;

        if gauge {
            jk += i * a * v[k] * (p * p1c - pc * p1);
            ek += a * v[k] * abs_p1;
            jek -= a * v[k] * (p1 * cc + p1c * c);
            tk += a * (pc * d_vpx[k] - vpx[k] * p1c + p * d_vpx[k].conj() - vpx[k].conj() * p1);
            rho_eff += a * abs_p1;
        }

        j[k] = jk.re;
        eps[k] = ek;
        j_eps[k] = jek.re;
        pi[k] = pik.re;
        stress[k] = -tk.re;
        source[k] = 2.0 * rho_eff * dv[k];
    }
    Ok(DensityFields {
        rho,
        j,
        eps,
        j_eps,
        pi,
        stress,
        source,
    })
}

/// Normalized maxima of the three balance-law residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub charge: f64,
    pub energy: f64,
    pub momentum: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.charge.max(self.energy).max(self.momentum)
    }
}

/// Cells excluded next to walls and potential jumps by [`continuity_residuals`].
pub const DEFAULT_MARGIN_CELLS: usize = 4;

pub fn continuity_residuals(traj: &Trajectory) -> Result<Residuals> {
    let margin = DEFAULT_MARGIN_CELLS as f64 * traj.grid().h();
    continuity_residuals_masked(traj, margin, Execution::default())
}

/// Residual maxima over interior frames and over points farther than `margin`
/// from Dirichlet walls and from jumps of the potential. Each maximum is
/// divided by the largest magnitude of its density over the same points.
pub fn continuity_residuals_masked(traj: &Trajectory, margin: f64, exec: Execution) -> Result<Residuals> {
    let count = traj.frames.len();
    if count < 3 {
        return Err(Error::TooFewFrames { needed: 3, got: count });
    }
    let grid = *traj.grid();
    let h = grid.h();
    let margin = margin.max(DEFAULT_MARGIN_CELLS as f64 * h);
    let jumps = traj.potential.discontinuities();
    let mask: Vec<bool> = (0..grid.n())
        .map(|i| {
            let x = grid.x(i);
            let near_wall =
                grid.boundary() == Boundary::Dirichlet && (x - grid.x_min() < margin || grid.x_max() - x < margin);
            !near_wall && jumps.iter().all(|d| (x - d).abs() >= margin)
        })
        .collect();

    let lattice = LatticeHamiltonian::new(&traj.potential, &grid, &traj.params)?;
    let v = traj.potential.sample(&grid)?;
    let dv: Vec<f64> = grid.points().iter().map(|&x| traj.potential.derivative(x)).collect();
    let fields = par::map(exec, &traj.frames, |f| fields_raw(f.values(), &grid, &lattice, &v, &dv, &traj.params));
    let fields: Vec<DensityFields> = fields.into_iter().collect::<Result<_>>()?;

    let tau = 2.0 * traj.frame_dt();
    let per_frame = par::map_range(exec, count - 2, |s| {
        let k = s + 1;
        let (prev, cur, next) = (&fields[k - 1], &fields[k], &fields[k + 1]);
        let dj = gradient_of(&cur.j, &grid);
        let dje = gradient_of(&cur.j_eps, &grid);
        let dst = gradient_of(&cur.stress, &grid);
        let mut r = [0.0_f64; 3];
        for i in (0..grid.n()).filter(|&i| mask[i]) {
            let c = (next.rho[i] - prev.rho[i]) / tau + dj[i];
            let e = (next.eps[i] - prev.eps[i]) / tau + dje[i];
            let p = (next.pi[i] - prev.pi[i]) / tau + dst[i] + cur.source[i];
            r[0] = r[0].max(c.abs());
            r[1] = r[1].max(e.abs());
            r[2] = r[2].max(p.abs());
        }
        r
    });
    let mut scale = [0.0_f64; 3];
    for f in &fields[1..count - 1] {
        for i in (0..grid.n()).filter(|&i| mask[i]) {
            scale[0] = scale[0].max(f.rho[i].abs());
            scale[1] = scale[1].max(f.eps[i].abs());
            scale[2] = scale[2].max(f.pi[i].abs());
        }
    }
    let worst = per_frame.iter().fold([0.0_f64; 3], |acc, r| [acc[0].max(r[0]), acc[1].max(r[1]), acc[2].max(r[2])]);
    let norm = |r: f64, s: f64| if s > 0.0 { r / s } else { r };
    Ok(Residuals {
        charge: norm(worst[0], scale[0]),
        energy: norm(worst[1], scale[1]),
        momentum: norm(worst[2], scale[2]),
    })
}

/// `int eps dx` for one frame.
pub fn total_energy(psi: &WaveFunction, potential: &Potential, params: &ModelParams) -> Result<f64> {
    let f = compute_fields(psi, potential, params)?;
    Ok(integrate(&f.eps, psi.grid()))
}
