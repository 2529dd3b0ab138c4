//! Closed-form results: effective mass, oscillator and well spectra, the
//! spectral bound, free dispersion and the gauge-variant pass band.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Variant};
use crate::par::{self, Execution};

/// Threshold on `|1 - 2amE|` below which the effective mass is reported singular.
pub const SINGULAR_MASS_TOL: f64 = 1e-12;

/// `m / (1 - 2amE)`; negative above the spectral bound.
pub fn effective_mass(energy: f64, params: &ModelParams) -> Result<f64> {
    if params.variant() == Variant::Gauge {
        return Err(Error::WrongVariant {
            expected: "gradient",
            got: params.variant().name(),
        });
    }
    let gap = 1.0 - 2.0 * params.a() * params.m() * energy;
    if gap.abs() < SINGULAR_MASS_TOL {
        return Err(Error::SingularMass { energy, gap });
    }
    Ok(params.m() / gap)
}

/// Oscillator level `n` for spring constant `spring`.
///
/// Solves `E = (n + 1/2) sqrt(spring (1 - 2amE) / m)`. Of the two roots of the
/// quadratic, the positive one reduces to `(n + 1/2) sqrt(spring/m)` at `a = 0`;
/// it is evaluated as `eps / (sqrt(1 + x^2) + x)` with `x = eps a m`, which equals
/// `eps (sqrt(1 + x^2) - x)` without the cancellation at large `n`.
pub fn ho_energy(n: usize, m: f64, spring: f64, a: f64) -> f64 {
    let eps = (n as f64 + 0.5) * (spring / m).sqrt();
    let x = eps * a * m;
    eps / ((1.0 + x * x).sqrt() + x)
}

/// Infinite-well level `n >= 1` for width `length`: `eps / (1 + 2am eps)`.
pub fn well_energy(n: usize, m: f64, length: f64, a: f64) -> f64 {
    let eps = (n as f64 * PI / length).powi(2) / (2.0 * m);
    eps / (1.0 + 2.0 * a * m * eps)
}

/// `1 / (2am)`, the energy the discrete spectrum accumulates at.
pub fn spectral_bound(params: &ModelParams) -> Result<f64> {
    if params.a() == 0.0 {
        return Err(Error::Unbounded);
    }
    Ok(1.0 / (2.0 * params.a() * params.m()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAnalytic {
    pub levels: Vec<(usize, f64)>,
    pub bound: Option<f64>,
}

impl SpectrumAnalytic {
    pub fn oscillator(count: usize, m: f64, spring: f64, a: f64) -> Self {
        Self {
            levels: (0..count).map(|n| (n, ho_energy(n, m, spring, a))).collect(),
            bound: (a > 0.0).then(|| 1.0 / (2.0 * a * m)),
        }
    }

    pub fn well(count: usize, m: f64, length: f64, a: f64) -> Self {
        Self {
            levels: (1..=count).map(|n| (n, well_energy(n, m, length, a))).collect(),
            bound: (a > 0.0).then(|| 1.0 / (2.0 * a * m)),
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.1).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub omega: f64,
    pub v_phase: f64,
    pub v_group: f64,
}

/// Free-particle `omega (1 + a k^2) = k^2 / 2m` with its phase and group velocities.
pub fn dispersion(k: f64, params: &ModelParams) -> Dispersion {
    let (m, a) = (params.m(), params.a());
    let s = 1.0 + a * k * k;
    Dispersion {
        omega: k * k / (2.0 * m * s),
        v_phase: k / (2.0 * m * s),
        v_group: (k / m) / (s * s),
    }
}

/// Momentum carried by `exp(i(kx - omega t))`: `k (1 + a k^2)`.
pub fn plane_wave_momentum(k: f64, params: &ModelParams) -> f64 {
    k * (1.0 + params.a() * k * k)
}

/// Energy of a gauge-variant plane wave in constant `V`: `V + (k^2/2m) / (1 + a k^2)`.
pub fn gauge_plane_wave_energy(k: f64, v: f64, params: &ModelParams) -> f64 {
    let k2 = k * k;
    v + (k2 / (2.0 * params.m())) / (1.0 + params.a() * k2)
}

/// Half-open energy window `[lower, upper)` with real-`k` propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassBand {
    pub lower: f64,
    pub upper: f64,
}

impl PassBand {
    pub fn contains(&self, e: f64) -> bool {
        e >= self.lower && e < self.upper
    }

    pub fn overlaps(&self, other: &PassBand) -> bool {
        self.lower < other.upper && other.lower < self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Gauge-variant pass band `[V, V + 1/(2ma))` over constant potential `V`.
pub fn pass_band(v: f64, params: &ModelParams) -> Result<PassBand> {
    if params.variant() != Variant::Gauge {
        return Err(Error::WrongVariant {
            expected: "gauge",
            got: params.variant().name(),
        });
    }
    if params.a() == 0.0 {
        return Err(Error::Unbounded);
    }
    Ok(PassBand {
        lower: v,
        upper: v + 1.0 / (2.0 * params.m() * params.a()),
    })
}

/// Location and value of a numerically found maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub k: f64,
    pub value: f64,
}

/// Maximum of the phase velocity over `k > 0`, located by a grid scan and golden-section refinement.
pub fn phase_velocity_peak(params: &ModelParams, exec: Execution) -> Result<Peak> {
    velocity_peak(params, exec, |k, p| dispersion(k, p).v_phase)
}

/// Maximum of the group velocity over `k > 0`.
pub fn group_velocity_peak(params: &ModelParams, exec: Execution) -> Result<Peak> {
    velocity_peak(params, exec, |k, p| dispersion(k, p).v_group)
}

fn velocity_peak(params: &ModelParams, exec: Execution, f: impl Fn(f64, &ModelParams) -> f64 + Sync + Send) -> Result<Peak> {
    if params.a() == 0.0 {
        // both velocities grow without bound
        return Err(Error::Unbounded);
    }
    let k_max = 20.0 / params.a().sqrt();
    let samples = 4096;
    let dk = k_max / samples as f64;
    let values = par::map_range(exec, samples + 1, |i| f(i as f64 * dk, params));
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = best.saturating_sub(1) as f64 * dk;
    let hi = (best + 1) as f64 * dk;
    let k = golden_section_max(|k| f(k, params), lo, hi, 1e-13 * k_max);
    Ok(Peak { k, value: f(k, params) })
}

pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grad(m: f64, a: f64) -> ModelParams {
        ModelParams::gradient(m, a).unwrap()
    }

    #[test]
    fn effective_mass_values() {
        assert_eq!(effective_mass(3.7, &grad(1.4, 0.0)).unwrap(), 1.4);
        assert!((effective_mass(2.0, &grad(1.0, 0.1)).unwrap() - 5.0 / 3.0).abs() < 1e-14);
        assert!((effective_mass(6.0, &grad(1.0, 0.1)).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn effective_mass_singular_at_band_edge() {
        assert!(matches!(effective_mass(5.0, &grad(1.0, 0.1)), Err(Error::SingularMass { .. })));
        assert!(matches!(
            effective_mass(1.0, &ModelParams::gauge(1.0, 0.1).unwrap()),
            Err(Error::WrongVariant { .. })
        ));
    }

    #[test]
    fn oscillator_values() {
        assert!((ho_energy(3, 1.0, 4.0, 0.0) - 7.0).abs() < 1e-14);
        // independent evaluation of eps (sqrt(1 + (eps a m)^2) - eps a m)
        let direct = |n: f64| {
            let e = n + 0.5;
            e * ((1.0 + (e * 0.1_f64).powi(2)).sqrt() - e * 0.1)
        };
        assert!((ho_energy(0, 1.0, 1.0, 0.1) - direct(0.0)).abs() < 1e-15);
        assert!((ho_energy(0, 1.0, 1.0, 0.1) - 0.4756246).abs() < 5e-8);
        assert!((ho_energy(5, 1.0, 1.0, 0.1) - 3.2519917).abs() < 5e-8);
        assert!((ho_energy(5, 1.0, 1.0, 0.1) - direct(5.0)).abs() < 1e-14);
    }

    #[test]
    fn well_values() {
        assert!((well_energy(1, 1.0, 3.0, 0.0) - PI * PI / 18.0).abs() < 1e-15);
        assert!((well_energy(1, 1.0, 3.0, 0.5) - 0.354135).abs() < 5e-7);
        let far = well_energy(10_000, 1.0, 3.0, 0.5);
        assert!(far < 1.0 && far > 1.0 - 1e-6);
    }

    #[test]
    fn bound_values() {
        assert_eq!(spectral_bound(&grad(1.0, 0.1)).unwrap(), 5.0);
        assert_eq!(spectral_bound(&grad(1.0, 0.5)).unwrap(), 1.0);
        assert_eq!(spectral_bound(&grad(2.0, 0.25)).unwrap(), 1.0);
        assert_eq!(spectral_bound(&grad(2.0, 0.0)), Err(Error::Unbounded));
    }

    #[test]
    fn fixed_point_residuals() {
        for &a in &[0.0, 0.1, 0.5, 3.0] {
            for n in 0..40 {
                let e = ho_energy(n, 1.3, 0.7, a);
                let rhs = (n as f64 + 0.5) * (0.7 * (1.0 - 2.0 * a * 1.3 * e) / 1.3).sqrt();
                assert!((e - rhs).abs() < 1e-12 * e.max(1.0));
                let w = well_energy(n + 1, 1.3, 2.0, a);
                let eps = ((n + 1) as f64 * PI / 2.0).powi(2) / 2.6;
                assert!((w - eps * (1.0 - 2.0 * a * 1.3 * w)).abs() < 1e-12 * w.max(1.0));
            }
        }
    }

    #[test]
    fn spectra_monotone_and_bounded() {
        for spec in [SpectrumAnalytic::oscillator(200, 1.0, 1.0, 0.1), SpectrumAnalytic::well(200, 1.0, 3.0, 0.5)] {
            let e = spec.energies();
            assert!(e.windows(2).all(|w| w[1] > w[0]));
            let b = spec.bound.unwrap();
            assert!(e.iter().all(|x| *x < b));
        }
    }

    #[test]
    fn dispersion_reduces_at_zero_coupling() {
        let d = dispersion(1.7, &grad(0.8, 0.0));
        assert!((d.omega - 1.7 * 1.7 / 1.6).abs() < 1e-14);
        assert!((d.v_group - 1.7 / 0.8).abs() < 1e-14);
    }

    #[test]
    fn momentum_values() {
        assert_eq!(plane_wave_momentum(2.0, &grad(1.0, 0.5)), 6.0);
        assert_eq!(plane_wave_momentum(0.0, &grad(1.0, 0.5)), 0.0);
        assert_eq!(plane_wave_momentum(-1.5, &grad(1.0, 0.0)), -1.5);
    }

    #[test]
    fn pass_band_values() {
        let p = ModelParams::gauge(1.0, 0.5).unwrap();
        let b = pass_band(0.0, &p).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
        assert!(!pass_band(-0.75, &p).unwrap().overlaps(&pass_band(0.75, &p).unwrap()));
        assert!(pass_band(-0.25, &p).unwrap().overlaps(&pass_band(0.25, &p).unwrap()));
        assert_eq!(pass_band(0.0, &ModelParams::gauge(1.0, 0.0).unwrap()), Err(Error::Unbounded));
        // mid-band: E - V = 1/(4ma) inverts to k^2 = 1/a
        let k = (1.0 / 0.5_f64).sqrt();
        assert!((gauge_plane_wave_energy(k, 0.0, &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn peaks_match_calculus() {
        for &(m, a) in &[(1.0, 1.0), (1.0, 0.1), (2.5, 0.3)] {
            let p = grad(m, a);
            let ph = phase_velocity_peak(&p, Execution::Sequential).unwrap();
            let gr = group_velocity_peak(&p, Execution::Parallel).unwrap();
            assert!((ph.k - 1.0 / a.sqrt()).abs() < 1e-6);
            assert!((ph.value - 1.0 / (4.0 * m * a.sqrt())).abs() < 1e-12);
            assert!((gr.k - 1.0 / (3.0 * a).sqrt()).abs() < 1e-6);
            assert!((gr.value - 3.0 * 3f64.sqrt() / (16.0 * m * a.sqrt())).abs() < 1e-12);
        }
        let gr = group_velocity_peak(&grad(1.0, 1.0), Execution::Sequential).unwrap();
        assert!((gr.value - 0.324759).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn group_velocity_is_derivative_of_omega(k in -5.0f64..5.0, a in 0.0f64..2.0, m in 0.2f64..3.0) {
            let p = grad(m, a);
            let dk = 1e-4;
            let fd = (dispersion(k + dk, &p).omega - dispersion(k - dk, &p).omega) / (2.0 * dk);
            let v = dispersion(k, &p).v_group;
            prop_assert!((fd - v).abs() < 1e-6 * (1.0 + v.abs()) / m.min(1.0));
        }

        #[test]
        fn gauge_dispersion_fills_pass_band(k in 0.0f64..1e4, a in 0.01f64..2.0, v in -3.0f64..3.0) {
            let p = ModelParams::gauge(1.0, a).unwrap();
            let e = gauge_plane_wave_energy(k, v, &p);
            prop_assert!(pass_band(v, &p).unwrap().contains(e));
        }
    }
}
