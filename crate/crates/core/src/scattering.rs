//! Transfer-matrix scattering on piecewise-constant potentials.
//!
//! Inside a segment the stationary equation of either variant reads
//! `(mu psi')' = (V - E) psi` with the stiffness
//!
//! * gradient: `mu = 1/2m - aE`
//! * gauge:    `mu = 1/2m + a(V - E)`
//!
//! so `psi = F e^{ik(x - x_ref)} + G e^{-ik(x - x_ref)}` with `k^2 = (E - V)/mu`,
//! and `psi`, `mu psi'` are continuous across interfaces. A wave `F e^{ikx}`
//! carries the flux `2 mu k |F|^2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::output::{Cell, Table};
use crate::par::{self, Execution};
use crate::potential::{Potential, Segment};

/// Half-width of the band-edge window on `|1 - 2ma(E-V)|` or `|1 - 2amE|`.
pub const BAND_EDGE_TOL: f64 = 1e-10;

pub type Matrix2 = [[Complex64; 2]; 2];

/// `mu` for energy `e` over potential `v`.
pub fn stiffness(e: f64, v: f64, params: &ModelParams) -> f64 {
    let (m, a) = (params.m(), params.a());
    if params.is_gauge() {
        1.0 / (2.0 * m) + a * (v - e)
    } else {
        1.0 / (2.0 * m) - a * e
    }
}

fn check_band_edge(e: f64, v: f64, params: &ModelParams) -> Result<()> {
    let (m, a) = (params.m(), params.a());
    let gap = if params.is_gauge() {
        1.0 - 2.0 * m * a * (e - v)
    } else {
        1.0 - 2.0 * a * m * e
    };
    // E = V gives k = 0, where e^{+ikx} and e^{-ikx} coincide
    let at_bottom = (e - v).abs() <= 1e-14 * e.abs().max(v.abs()).max(1.0);
    if gap.abs() < BAND_EDGE_TOL || at_bottom {
        return Err(Error::BandEdge { energy: e, potential: v });
    }
    Ok(())
}

/// `sqrt((E - V)/mu)` as a real `k >= 0` when propagating and `+i|k|` when evanescent.
pub fn local_wavenumber(e: f64, v: f64, params: &ModelParams) -> Result<Complex64> {
    check_band_edge(e, v, params)?;
    let k2 = (e - v) / stiffness(e, v, params);
    Ok(if k2 >= 0.0 {
        Complex64::new(k2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-k2).sqrt())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSolution {
    pub start: f64,
    pub end: f64,
    pub v: f64,
    /// Oriented so that the forward wave carries flux to the right (`mu k > 0`),
    /// or decays to the right when evanescent.
    pub k: Complex64,
    pub mu: f64,
    /// `(forward, backward)` at the reference point.
    pub amplitudes: (Complex64, Complex64),
    /// Phase origin of the plane waves: the right end for a left lead, the left end otherwise.
    pub x_ref: f64,
}

impl SegmentSolution {
    pub fn new(segment: &Segment, e: f64, params: &ModelParams) -> Result<Self> {
        let k = local_wavenumber(e, segment.value, params)?;
        let mu = stiffness(e, segment.value, params);
        let k = if k.im == 0.0 && mu < 0.0 { -k } else { k };
        let x_ref = if segment.start.is_finite() { segment.start } else { segment.end };
        Ok(Self {
            start: segment.start,
            end: segment.end,
            v: segment.value,
            k,
            mu,
            amplitudes: (Complex64::ZERO, Complex64::ZERO),
            x_ref,
        })
    }

    pub fn is_propagating(&self) -> bool {
        self.k.im == 0.0
    }

    /// Flux `2 mu k` per unit `|F|^2`; zero when evanescent.
    pub fn flux_per_amplitude(&self) -> f64 {
        if self.is_propagating() {
            2.0 * self.mu * self.k.re
        } else {
            0.0
        }
    }

    pub fn psi(&self, x: f64) -> Complex64 {
        let (f, g) = self.amplitudes;
        let ph = Complex64::I * self.k * (x - self.x_ref);
        f * ph.exp() + g * (-ph).exp()
    }

    /// Width over which amplitudes are carried to the right end.
    fn span(&self) -> f64 {
        if self.start.is_finite() && self.end.is_finite() {
            self.end - self.start
        } else {
            0.0
        }
    }
}

/// Interface matrix taking `(F, G)` just left of the interface to `(F, G)` just right of it.
pub fn transfer_step(left: &SegmentSolution, right: &SegmentSolution) -> Matrix2 {
    let rho = (left.k * left.mu) / (right.k * right.mu);
    let one = Complex64::ONE;
    [
        [(one + rho) * 0.5, (one - rho) * 0.5],
        [(one - rho) * 0.5, (one + rho) * 0.5],
    ]
}

fn propagation(seg: &SegmentSolution) -> Matrix2 {
    let ph = Complex64::I * seg.k * seg.span();
    [[ph.exp(), Complex64::ZERO], [Complex64::ZERO, (-ph).exp()]]
}

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut c = [[Complex64::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn apply(m: &Matrix2, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
    (m[0][0] * v.0 + m[0][1] * v.1, m[1][0] * v.0 + m[1][1] * v.1)
}

pub fn det(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    pub energy: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub reflection: f64,
    pub transmission: f64,
    /// Left to right in the frame of the incident wave (mirrored for right incidence).
    pub segments: Vec<SegmentSolution>,
}

impl ScatterResult {
    /// Whether both leads carry flux.
    pub fn both_propagating(&self) -> bool {
        self.segments[0].is_propagating() && self.segments[self.segments.len() - 1].is_propagating()
    }

    /// Stationary wave at `x` (in the incident frame).
    pub fn psi(&self, x: f64) -> Complex64 {
        let idx = self.segments.partition_point(|s| s.start <= x).saturating_sub(1);
        self.segments[idx].psi(x)
    }
}

fn check_leads(segs: &[Segment]) -> Result<()> {
    if !segs[0].start.is_infinite() || !segs[segs.len() - 1].end.is_infinite() {
        return Err(Error::InvalidPotential(
            "scattering needs semi-infinite first and last segments".into(),
        ));
    }
    Ok(())
}

pub fn scatter(e: f64, potential: &Potential, params: &ModelParams) -> Result<ScatterResult> {
    scatter_from(e, potential, params, Incidence::Left)
}

pub fn scatter_from(e: f64, potential: &Potential, params: &ModelParams, side: Incidence) -> Result<ScatterResult> {
    let segs = potential
        .segments()
        .ok_or_else(|| Error::InvalidPotential("scattering needs a piecewise potential".into()))?;
    check_leads(segs)?;
    match side {
        Incidence::Left => scatter_segments(e, segs, params),
        Incidence::Right => {
            let mirrored: Vec<Segment> = segs.iter().rev().map(|s| Segment::new(-s.end, -s.start, s.value)).collect();
            scatter_segments(e, &mirrored, params)
        }
    }
}

fn scatter_segments(e: f64, segs: &[Segment], params: &ModelParams) -> Result<ScatterResult> {
    let mut sol: Vec<SegmentSolution> = segs
        .iter()
        .map(|s| SegmentSolution::new(s, e, params))
        .collect::<Result<_>>()?;
    if !sol[0].is_propagating() {
        return Err(Error::NoIncidentChannel {
            energy: e,
            potential: sol[0].v,
        });
    }
    let mut total = [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]];
    for w in sol.windows(2) {
        total = mul(&mul(&transfer_step(&w[0], &w[1]), &propagation(&w[0])), &total);
    }
    let r = -total[1][0] / total[1][1];
    let t = det(&total) / total[1][1];

    let last = sol.len() - 1;
    let (reflection, transmission) = if sol[last].is_propagating() {
        (r.norm_sqr(), sol[last].flux_per_amplitude() / sol[0].flux_per_amplitude() * t.norm_sqr())
    } else {
        (r.norm_sqr(), 0.0)
    };

    let mut amp = (Complex64::ONE, r);
    sol[0].amplitudes = amp;
    for j in 0..last {
        amp = apply(&mul(&transfer_step(&sol[j], &sol[j + 1]), &propagation(&sol[j])), amp);
        sol[j + 1].amplitudes = amp;
    }
    // the outgoing lead carries no incoming wave by construction
    sol[last].amplitudes.1 = Complex64::ZERO;

    Ok(ScatterResult {
        energy: e,
        r,
        t,
        reflection,
        transmission,
        segments: sol,
    })
}

/// One scattering problem per energy, in input order.
pub fn sweep(
    energies: &[f64],
    potential: &Potential,
    params: &ModelParams,
    side: Incidence,
    exec: Execution,
) -> Vec<Result<ScatterResult>> {
    par::map(exec, energies, |&e| scatter_from(e, potential, params, side))
}

/// Columns `E, R, T` then `k<j>_re, k<j>_im` for every segment.
pub fn sweep_table(results: &[ScatterResult]) -> Table {
    let nseg = results.first().map_or(0, |r| r.segments.len());
    let mut header = vec!["E".to_string(), "R".into(), "T".into()];
    for j in 0..nseg {
        header.push(format!("k{j}_re"));
        header.push(format!("k{j}_im"));
    }
    let mut table = Table::new(header);
    for res in results {
        let mut row: Vec<Cell> = vec![res.energy.into(), res.reflection.into(), res.transmission.into()];
        for s in &res.segments {
            row.push(s.k.re.into());
            row.push(s.k.im.into());
        }
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauge(a: f64) -> ModelParams {
        ModelParams::gauge(1.0, a).unwrap()
    }

    #[test]
    fn wavenumber_examples() {
        let std = ModelParams::standard(2.0).unwrap();
        assert!((local_wavenumber(3.0, 1.0, &std).unwrap() - Complex64::new(8f64.sqrt(), 0.0)).norm() < 1e-15);
        let g = ModelParams::gradient(1.0, 0.1).unwrap();
        let k = local_wavenumber(6.0, 8.0, &g).unwrap();
        assert!((k.re - 20f64.sqrt()).abs() < 1e-12 && k.im == 0.0);
        assert!(matches!(local_wavenumber(5.0, 0.0, &g), Err(Error::BandEdge { .. })));
        let ga = gauge(0.5);
        let near = local_wavenumber(1.0 - 1e-7, 0.0, &ga).unwrap();
        assert!(near.re > 1e3);
        assert!(matches!(local_wavenumber(1.0, 0.0, &ga), Err(Error::BandEdge { .. })));
        assert!(local_wavenumber(-0.5, 0.0, &ga).unwrap().re == 0.0);
    }

    #[test]
    fn negative_mass_segment_is_oriented_by_flux() {
        let g = ModelParams::gradient(1.0, 0.1).unwrap();
        let s = SegmentSolution::new(&Segment::new(0.0, 1.0, 8.0), 6.0, &g).unwrap();
        assert!(s.mu < 0.0 && s.k.re < 0.0 && s.flux_per_amplitude() > 0.0);
    }

    #[test]
    fn identical_segments_give_identity() {
        let p = gauge(0.3);
        let s = SegmentSolution::new(&Segment::new(0.0, 1.0, 0.2), 0.9, &p).unwrap();
        let m = transfer_step(&s, &s);
        assert_eq!(m, [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]]);
    }

    #[test]
    fn standard_step_matches_textbook() {
        let p = ModelParams::standard(1.0).unwrap();
        let (e, v) = (2.0, 1.0);
        let res = scatter(e, &Potential::step(0.0, 0.0, v), &p).unwrap();
        let (k1, k2) = ((2.0 * e).sqrt(), (2.0 * (e - v)).sqrt());
        assert!((res.r.re - (k1 - k2) / (k1 + k2)).abs() < 1e-14);
        assert!((res.t.re - 2.0 * k1 / (k1 + k2)).abs() < 1e-14);
    }

    #[test]
    fn standard_barrier_matches_textbook() {
        let p = ModelParams::standard(1.0).unwrap();
        let (v0, d) = (1.0, 1.5);
        let pot = Potential::barrier(0.0, d, 0.0, v0);
        for e in [0.1, 0.4, 0.8, 0.99, 1.2, 2.0, 5.0] {
            let res = scatter(e, &pot, &p).unwrap();
            let want = if e < v0 {
                let kap = (2.0 * (v0 - e)).sqrt();
                1.0 / (1.0 + v0 * v0 * (kap * d).sinh().powi(2) / (4.0 * e * (v0 - e)))
            } else {
                let q = (2.0 * (e - v0)).sqrt();
                1.0 / (1.0 + v0 * v0 * (q * d).sin().powi(2) / (4.0 * e * (e - v0)))
            };
            assert!((res.transmission - want).abs() < 1e-10, "E={e}");
            assert!((res.reflection + res.transmission - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn total_reflection_between_disjoint_bands() {
        let p = gauge(0.5);
        let pot = Potential::step(0.0, 0.0, 1.5);
        for i in 0..200 {
            let e = 1e-3 + i as f64 * (1.0 - 2e-3) / 199.0;
            let res = scatter(e, &pot, &p).unwrap();
            assert_eq!(res.transmission, 0.0);
            assert!((res.reflection - 1.0).abs() < 1e-12);
        }
        assert!(matches!(scatter(1.2, &pot, &p), Err(Error::NoIncidentChannel { .. })));
        let right = scatter_from(1.7, &pot, &p, Incidence::Right).unwrap();
        assert_eq!(right.transmission, 0.0);
    }

    #[test]
    fn localization_by_energy() {
        let p = gauge(0.5);
        let pot = Potential::piecewise(vec![
            Segment::new(f64::NEG_INFINITY, 0.0, 0.0),
            Segment::new(0.0, 10.0, 2.0),
            Segment::new(10.0, f64::INFINITY, 0.0),
        ])
        .unwrap();
        for e in [0.1, 0.5, 0.9] {
            assert!(scatter(e, &pot, &p).unwrap().transmission < 1e-8);
        }
    }

    #[test]
    fn stationary_wave_is_continuous_with_continuous_flux() {
        let p = ModelParams::gradient(1.0, 0.2).unwrap();
        let pot = Potential::barrier(-0.5, 0.7, 0.3, 1.4);
        let res = scatter(1.0, &pot, &p).unwrap();
        for x0 in [-0.5, 0.7] {
            let (l, r) = (res.psi(x0 - 1e-9), res.psi(x0 + 1e-9));
            assert!((l - r).norm() < 1e-7);
        }
    }

    #[test]
    fn sweep_modes_agree() {
        let p = gauge(0.2);
        let pot = Potential::barrier(0.0, 1.0, 0.0, 0.7);
        let es: Vec<f64> = (1..50).map(|i| i as f64 * 0.05).collect();
        let a = sweep(&es, &pot, &p, Incidence::Left, Execution::Sequential);
        let b = sweep(&es, &pot, &p, Incidence::Left, Execution::Parallel);
        assert_eq!(a, b);
        let ok: Vec<ScatterResult> = a.into_iter().filter_map(|r| r.ok()).collect();
        let t = sweep_table(&ok);
        assert_eq!(t.len(), ok.len());
        assert!(t.to_csv().starts_with("E,R,T,k0_re,k0_im,k1_re"));
    }

    fn random_potential(vals: &[f64], widths: &[f64]) -> Potential {
        let mut segs = Vec::new();
        let mut x = 0.0;
        segs.push(Segment::new(f64::NEG_INFINITY, 0.0, vals[0]));
        for (v, w) in vals[1..vals.len() - 1].iter().zip(widths) {
            segs.push(Segment::new(x, x + w, *v));
            x += w;
        }
        segs.push(Segment::new(x, f64::INFINITY, vals[vals.len() - 1]));
        Potential::piecewise(segs).unwrap()
    }

    proptest! {
        #[test]
        fn unitarity_and_reciprocity(
            vals in prop::collection::vec(-1.0f64..1.0, 4),
            widths in prop::collection::vec(0.1f64..1.5, 2),
            e in -0.5f64..3.0,
            a in 0.0f64..0.6,
            m in 0.5f64..2.0,
            gauge_variant in any::<bool>(),
        ) {
            let p = if gauge_variant { ModelParams::gauge(m, a).unwrap() } else { ModelParams::gradient(m, a).unwrap() };
            let pot = random_potential(&vals, &widths);
            let (Ok(l), Ok(r)) = (scatter(e, &pot, &p), scatter_from(e, &pot, &p, Incidence::Right)) else {
                return Ok(());
            };
            if l.both_propagating() {
                prop_assert!((l.reflection + l.transmission - 1.0).abs() < 1e-10);
                prop_assert!((l.transmission - r.transmission).abs() < 1e-10);
            }
        }

        #[test]
        fn interface_determinant_is_flux_ratio(
            v in prop::collection::vec(-1.0f64..1.0, 2),
            e in 0.0f64..2.0,
            a in 0.0f64..0.4,
        ) {
            let p = ModelParams::gauge(1.0, a).unwrap();
            let (Ok(l), Ok(r)) = (
                SegmentSolution::new(&Segment::new(0.0, 1.0, v[0]), e, &p),
                SegmentSolution::new(&Segment::new(1.0, 2.0, v[1]), e, &p),
            ) else { return Ok(()); };
            let d = det(&transfer_step(&l, &r));
            let want = (l.k * l.mu) / (r.k * r.mu);
            prop_assert!((d - want).norm() < 1e-12 * (1.0 + want.norm()));
        }
    }
}
