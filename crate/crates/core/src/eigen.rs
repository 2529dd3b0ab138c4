//! Lowest eigenpairs of the symmetric-definite pencil `A psi = E B psi`.
//!
//! Eigenvalues come from bisection on the Sturm count of `A - lambda B`
//! (the inertia of the pencil, since `B` is positive definite), eigenvectors
//! from shifted inverse iteration followed by a Rayleigh-quotient update.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Variant};
use crate::norm::presence_density;
use crate::operators::OperatorPair;
use crate::par::{self, Execution};
use crate::tridiag::Tridiagonal;
use crate::wavefunction::{Label, WaveFunction};

/// Residual contract relative to `||A||_inf`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Relative distance to the spectral bound that triggers a flag.
pub const BOUND_FLAG_TOL: f64 = 1e-6;

const MAX_INVERSE_ITERATIONS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFlagKind {
    NearBound,
    AboveBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundFlag {
    pub index: usize,
    pub energy: f64,
    pub kind: BoundFlagKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Inverse-iteration sweeps per eigenpair.
    pub iterations: Vec<usize>,
    pub bisection_steps: Vec<usize>,
    /// `1/(2am)` for the gradient variant with `a > 0`.
    pub bound: Option<f64>,
    pub flags: Vec<BoundFlag>,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    /// Normalized so that `int rho dx = 1`.
    pub states: Vec<WaveFunction>,
    /// `max |A x - E B x|` for the interior vector scaled to `x^T B x = 1`.
    pub residuals: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

pub fn solve_spectrum(ops: &OperatorPair, count: usize) -> Result<EigenResult> {
    solve_spectrum_with(ops, count, Execution::default())
}

/// Same as [`solve_spectrum`]; bisection and inverse iteration for distinct
/// eigenpairs run through `exec`.
pub fn solve_spectrum_with(ops: &OperatorPair, count: usize, exec: Execution) -> Result<EigenResult> {
    let dim = ops.dim();
    if count > dim {
        return Err(Error::TooManyStates {
            requested: count,
            available: dim,
        });
    }
    let norm_a = ops.a.norm_inf();
    // B >= I, so every eigenvalue lies in [-||A||, ||A||]
    let span = norm_a.max(f64::MIN_POSITIVE);
    let bisected = par::map_range(exec, count, |k| bisect(ops, k, -span, span));
    let energies0: Vec<f64> = bisected.iter().map(|b| b.0).collect();

    let vectors = par::map_range(exec, count, |k| inverse_iteration(ops, energies0[k], k, norm_a));
    let mut vecs = Vec::with_capacity(count);
    let mut iterations = Vec::with_capacity(count);
    for v in vectors {
        let (x, it) = v?;
        vecs.push(x);
        iterations.push(it);
    }

    // rounding tilts eigenvectors of close pairs by eps ||A|| / gap, so
    // reorthogonalize within clusters in ascending order
    let cluster = 1e-3 * span;
    for k in 1..count {
        let mut j = k;
        while j > 0 && energies0[k] - energies0[j - 1] < cluster {
            j -= 1;
        }
        if j < k {
            let (done, rest) = vecs.split_at_mut(k);
            let x = &mut rest[0];
            for y in &done[j..k] {
                let c = b_dot(&ops.b, y, x);
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi -= c * yi;
                }
            }
            b_normalize(&ops.b, x);
        }
    }

    let tol = RESIDUAL_TOL * span;
    let mut energies = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for (k, x) in vecs.iter_mut().enumerate() {
        fix_sign(x);
        let e = ops.rayleigh_quotient(x);
        let r = residual(ops, x, e);
        if !(r <= tol) {
            return Err(Error::ConvergenceFailure {
                index: k,
                iterations: iterations[k],
                residual: r,
                tolerance: tol,
            });
        }
        energies.push(e);
        residuals.push(r);
    }

    let bound = match ops.params.variant() {
        Variant::Gradient if ops.params.a() > 0.0 => Some(1.0 / (2.0 * ops.params.a() * ops.params.m())),
        _ => None,
    };
    let flags = bound.map_or_else(Vec::new, |b| bound_flags(&energies, b));

    // interior vectors have x^T B x = 1; the lattice norm carries an extra h
    let scale = ops.grid.h().sqrt().recip();
    let states = vecs
        .iter()
        .zip(&energies)
        .map(|(x, e)| {
            let inner: Vec<Complex64> = x.iter().map(|v| Complex64::new(v * scale, 0.0)).collect();
            WaveFunction::from_interior(ops.grid, &inner).with_label(Label::Energy(*e))
        })
        .collect();

    Ok(EigenResult {
        energies,
        states,
        residuals,
        diagnostics: Diagnostics {
            iterations,
            bisection_steps: bisected.iter().map(|b| b.1).collect(),
            bound,
            flags,
        },
    })
}

fn bound_flags(energies: &[f64], bound: f64) -> Vec<BoundFlag> {
    energies
        .iter()
        .enumerate()
        .filter_map(|(index, &energy)| {
            let kind = if energy >= bound {
                BoundFlagKind::AboveBound
            } else if (bound - energy) <= BOUND_FLAG_TOL * bound.abs() {
                BoundFlagKind::NearBound
            } else {
                return None;
            };
            Some(BoundFlag { index, energy, kind })
        })
        .collect()
}

/// Number of eigenvalues of the pencil strictly below `lambda`.
pub fn sturm_count(ops: &OperatorPair, lambda: f64) -> usize {
    let (a, b) = (&ops.a, &ops.b);
    let n = a.len();
    let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + a.norm_inf());
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..n {
        let t = a.diag[i] - lambda * b.diag[i];
        d = if i == 0 {
            t
        } else {
            let off = a.sub[i - 1] - lambda * b.sub[i - 1];
            t - off * off / d
        };
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th eigenvalue (0-based) by bisection; returns the midpoint and the step count.
fn bisect(ops: &OperatorPair, k: usize, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let mut steps = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || steps >= 200 {
            return (mid, steps);
        }
        if sturm_count(ops, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
}

fn inverse_iteration(ops: &OperatorPair, lambda: f64, k: usize, norm_a: f64) -> Result<(Vec<f64>, usize)> {
    let n = ops.dim();
    let scale = norm_a.max(f64::MIN_POSITIVE);
    let tol = 0.1 * RESIDUAL_TOL * scale;
    // a shift exactly on the eigenvalue may leave an exact zero pivot
    let mut shift = lambda;
    let mut lu = None;
    for attempt in 0..8 {
        let m = ops.a.combine(1.0, &ops.b, -shift);
        match m.factor() {
            Ok(f) => {
                lu = Some(f);
                break;
            }
            Err(_) => shift = lambda + scale * f64::EPSILON * 4f64.powi(attempt + 1),
        }
    }
    let lu = lu.ok_or(Error::ConvergenceFailure {
        index: k,
        iterations: 0,
        residual: f64::INFINITY,
        tolerance: tol,
    })?;

    // deterministic, non-symmetric start so no eigenvector is orthogonal to it
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect();
    b_normalize(&ops.b, &mut x);
    let mut last = f64::INFINITY;
    for it in 1..=MAX_INVERSE_ITERATIONS {
        let mut y = ops.b.matvec(&x);
        lu.solve_in_place(&mut y);
        if y.iter().any(|v| !v.is_finite()) {
            break;
        }
        b_normalize(&ops.b, &mut y);
        x = y;
        let e = ops.rayleigh_quotient(&x);
        last = residual(ops, &x, e);
        if last <= tol && it >= 2 {
            return Ok((x, it));
        }
    }
    if last <= RESIDUAL_TOL * scale {
        return Ok((x, MAX_INVERSE_ITERATIONS));
    }
    Err(Error::ConvergenceFailure {
        index: k,
        iterations: MAX_INVERSE_ITERATIONS,
        residual: last,
        tolerance: tol,
    })
}

fn b_dot(b: &Tridiagonal<f64>, x: &[f64], y: &[f64]) -> f64 {
    b.matvec(y).iter().zip(x).map(|(p, q)| p * q).sum()
}

fn b_normalize(b: &Tridiagonal<f64>, x: &mut [f64]) {
    let s = b_dot(b, x, x).sqrt();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

fn residual(ops: &OperatorPair, x: &[f64], e: f64) -> f64 {
    let ax = ops.a.matvec(x);
    let bx = ops.b.matvec(x);
    ax.iter().zip(&bx).map(|(p, q)| (p - e * q).abs()).fold(0.0, f64::max)
}

/// Makes the leftmost sample above a thousandth of the peak positive.
fn fix_sign(x: &mut [f64]) {
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Presence density of state `index`, integrating to one.
pub fn stationary_density(result: &EigenResult, index: usize, params: &ModelParams) -> Result<Vec<f64>> {
    let psi = result.states.get(index).ok_or(Error::IndexRange {
        index,
        count: result.len(),
    })?;
    Ok(presence_density(psi, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ho_energy, well_energy};
    use crate::grid::Grid1D;
    use crate::norm::{integrate, sobolev_inner};
    use crate::operators::build_operators;
    use crate::potential::Potential;

    fn well(n: usize, a: f64) -> (OperatorPair, ModelParams) {
        let g = Grid1D::dirichlet(0.0, 3.0, n).unwrap();
        let p = ModelParams::new(1.0, a, if a == 0.0 { Variant::Standard } else { Variant::Gradient }).unwrap();
        (build_operators(&Potential::Constant(0.0), &g, &p).unwrap(), p)
    }

    #[test]
    fn sturm_count_brackets_lattice_eigenvalues() {
        let (ops, _) = well(50, 0.2);
        let h = ops.grid.h();
        // exact lattice eigenvalues of the free well
        let lam = |j: usize| {
            let s = (2.0 - 2.0 * (j as f64 * std::f64::consts::PI / 49.0).cos()) / (h * h);
            (s / 2.0) / (1.0 + 0.2 * s)
        };
        for j in 1..48 {
            assert_eq!(sturm_count(&ops, lam(j) - 1e-9), j - 1);
            assert_eq!(sturm_count(&ops, lam(j) + 1e-9), j);
        }
    }

    #[test]
    fn well_levels() {
        let (ops, _) = well(1201, 0.0);
        let r = solve_spectrum(&ops, 3).unwrap();
        assert!((r.energies[0] - 0.548311).abs() < 1e-5);
        let (ops, _) = well(1201, 0.5);
        let r = solve_spectrum(&ops, 3).unwrap();
        assert!((r.energies[0] - 0.354135).abs() < 1e-5);
        assert!(r.energies.iter().all(|e| *e < 1.0));
    }

    #[test]
    fn well_converges_at_second_order() {
        let errs: Vec<f64> = [101, 201, 401, 801]
            .iter()
            .map(|&n| {
                let (ops, _) = well(n, 0.5);
                let e = solve_spectrum(&ops, 1).unwrap().energies[0];
                (e - well_energy(1, 1.0, 3.0, 0.5)).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn oscillator_matches_closed_form() {
        let g = Grid1D::dirichlet(-10.0, 10.0, 2000).unwrap();
        let p = ModelParams::gradient(1.0, 0.1).unwrap();
        let ops = build_operators(&Potential::harmonic(1.0, 0.0), &g, &p).unwrap();
        let r = solve_spectrum(&ops, 6).unwrap();
        for (n, e) in r.energies.iter().enumerate() {
            let want = ho_energy(n, 1.0, 1.0, 0.1);
            assert!(((e - want) / want).abs() < 1e-3);
        }
        assert!(r.residuals.iter().all(|res| *res < 1e-9 * ops.a.norm_inf()));
        assert!(r.diagnostics.flags.is_empty());
    }

    #[test]
    fn states_are_b_orthonormal() {
        let g = Grid1D::dirichlet(-6.0, 6.0, 400).unwrap();
        let p = ModelParams::gauge(1.0, 0.3).unwrap();
        let ops = build_operators(&Potential::harmonic(2.0, 0.5), &g, &p).unwrap();
        let r = solve_spectrum(&ops, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let s = sobolev_inner(&r.states[i], &r.states[j], &p).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).norm() < 1e-8, "({i},{j}) {s}");
            }
        }
        assert!(r.energies.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn near_degenerate_double_well() {
        let g = Grid1D::dirichlet(-8.0, 8.0, 800).unwrap();
        let p = ModelParams::gradient(1.0, 0.05).unwrap();
        let v = Potential::piecewise(vec![
            crate::potential::Segment::new(-8.0, -0.5, 0.0),
            crate::potential::Segment::new(-0.5, 0.5, 40.0),
            crate::potential::Segment::new(0.5, 8.0, 0.0),
        ])
        .unwrap();
        let ops = build_operators(&v, &g, &p).unwrap();
        let r = solve_spectrum(&ops, 4).unwrap();
        let s = sobolev_inner(&r.states[0], &r.states[1], &p).unwrap();
        assert!(s.norm() < 1e-8);
        assert!(r.energies[1] - r.energies[0] < 1e-3);
    }

    #[test]
    fn gradient_problem_is_standard_problem_with_effective_mass() {
        let g = Grid1D::dirichlet(-10.0, 10.0, 1200).unwrap();
        let p = ModelParams::gradient(1.0, 0.1).unwrap();
        let v = Potential::harmonic(1.0, 0.0);
        let r = solve_spectrum(&build_operators(&v, &g, &p).unwrap(), 4).unwrap();
        for (k, &e) in r.energies.iter().enumerate() {
            let m_eff = crate::analytic::effective_mass(e, &p).unwrap();
            let std = ModelParams::standard(m_eff).unwrap();
            let rs = solve_spectrum(&build_operators(&v, &g, &std).unwrap(), k + 1).unwrap();
            assert!((rs.energies[k] - e).abs() < 1e-12 * (1.0 + e), "{k}: {} vs {e}", rs.energies[k]);
            // same shape up to normalization
            let x: Vec<f64> = r.states[k].values().iter().map(|c| c.re).collect();
            let y: Vec<f64> = rs.states[k].values().iter().map(|c| c.re).collect();
            let c = x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>()
                / (x.iter().map(|p| p * p).sum::<f64>() * y.iter().map(|q| q * q).sum::<f64>()).sqrt();
            assert!((c - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn too_many_states() {
        let (ops, _) = well(10, 0.1);
        assert!(matches!(solve_spectrum(&ops, 9), Err(Error::TooManyStates { .. })));
        assert_eq!(solve_spectrum(&ops, 8).unwrap().len(), 8);
    }

    #[test]
    fn densities() {
        let g = Grid1D::dirichlet(-10.0, 10.0, 1000).unwrap();
        let p0 = ModelParams::standard(1.0).unwrap();
        let r = solve_spectrum(&build_operators(&Potential::harmonic(1.0, 0.0), &g, &p0).unwrap(), 1).unwrap();
        let rho = stationary_density(&r, 0, &p0).unwrap();
        assert!((integrate(&rho, &g) - 1.0).abs() < 1e-12);
        assert!(matches!(stationary_density(&r, 1, &p0), Err(Error::IndexRange { index: 1, count: 1 })));

        let p = ModelParams::gradient(1.0, 0.5).unwrap();
        let r = solve_spectrum(&build_operators(&Potential::harmonic(1.0, 0.0), &g, &p).unwrap(), 6).unwrap();
        let rho = stationary_density(&r, 5, &p).unwrap();
        assert!((integrate(&rho, &g) - 1.0).abs() < 1e-12);
        let psi: Vec<f64> = r.states[5].values().iter().map(|c| c.re).collect();
        let nodes: Vec<usize> = (300..700).filter(|&i| psi[i] * psi[i + 1] < 0.0).collect();
        assert_eq!(nodes.len(), 5);
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        for i in nodes {
            assert!(rho[i] > 1e-3 * peak && rho[i + 1] > 1e-3 * peak);
        }

        let (ops, pw) = well(301, 0.5);
        let r = solve_spectrum(&ops, 2).unwrap();
        let rho = stationary_density(&r, 0, &pw).unwrap();
        assert!(rho[0] > 0.0 && rho[300] > 0.0);
    }

    #[test]
    fn flags_near_and_above_bound() {
        let flags = bound_flags(&[0.5, 5.0 - 1e-7, 5.2], 5.0);
        assert_eq!(flags.len(), 2);
        assert_eq!(flags[0].kind, BoundFlagKind::NearBound);
        assert_eq!(flags[1].kind, BoundFlagKind::AboveBound);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let (ops, _) = well(300, 0.3);
        let a = solve_spectrum_with(&ops, 10, Execution::Sequential).unwrap();
        let b = solve_spectrum_with(&ops, 10, Execution::Parallel).unwrap();
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.states, b.states);
    }
}
