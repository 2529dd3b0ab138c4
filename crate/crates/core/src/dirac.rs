//! One-dimensional Dirac checks: the gradient-corrected density as the
//! non-relativistic reduction of the Dirac density, and the Klein step.
//!
//! Convention: `H = sigma_x p + sigma_z m + V`, spinor `(phi, eta)`, so a plane
//! wave of momentum `p` in constant `V` has `eta = p phi / (E - V + m)` and
//! current `j = 2 Re(phi* eta)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::norm::presence_density_raw;
use crate::output::{Cell, Table};
use crate::wavefunction::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor1D {
    pub phi: Complex64,
    pub eta: Complex64,
    pub m: f64,
    /// Total energy, rest mass included.
    pub e: f64,
}

impl Spinor1D {
    /// Positive-energy free wave with unit upper component.
    pub fn free_plane_wave(k: f64, m: f64) -> Self {
        let e = (k * k + m * m).sqrt();
        Self::plane_wave(Complex64::new(k, 0.0), m, e, 0.0)
    }

    /// Unit-`phi` solution with momentum `p` (possibly complex) at energy `e` over `v`.
    pub fn plane_wave(p: Complex64, m: f64, e: f64, v: f64) -> Self {
        Self {
            phi: Complex64::ONE,
            eta: p / (e - v + m),
            m,
            e,
        }
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Self {
            phi: self.phi * c,
            eta: self.eta * c,
            ..self
        }
    }

    pub fn density(&self) -> f64 {
        self.phi.norm_sqr() + self.eta.norm_sqr()
    }

    pub fn current(&self) -> f64 {
        2.0 * (self.phi.conj() * self.eta).re
    }
}

/// `|phi|^2 + |phi'|^2 / (4 m^2)`: the presence density at `a = 1/(4m^2)`.
pub fn reduce_density(phi: &WaveFunction, m: f64) -> Vec<f64> {
    presence_density_raw(phi.values(), phi.grid(), 1.0 / (4.0 * m * m))
}

/// `1 + k^2/(4m^2)` per unit `|phi|^2` for a plane wave.
pub fn reduced_plane_wave_density(k: f64, m: f64) -> f64 {
    1.0 + k * k / (4.0 * m * m)
}

/// Exact `1 + |eta/phi|^2 = 1 + k^2 / (sqrt(k^2 + m^2) + m)^2` for a free wave.
pub fn exact_free_density(k: f64, m: f64) -> f64 {
    let s = (k * k + m * m).sqrt() + m;
    1.0 + k * k / (s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityComparison {
    pub k: f64,
    pub exact: f64,
    pub reduced: f64,
    /// `reduced - exact`
    pub difference: f64,
}

pub fn density_comparison(ks: &[f64], m: f64) -> Vec<DensityComparison> {
    ks.iter()
        .map(|&k| {
            let exact = exact_free_density(k, m);
            let reduced = reduced_plane_wave_density(k, m);
            DensityComparison {
                k,
                exact,
                reduced,
                difference: reduced - exact,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumComparison {
    pub k: f64,
    /// `sqrt(k^2 + m^2) - m`
    pub exact: f64,
    /// `(k^2/2m) / (1 + k^2/(4m^2))`
    pub modified: f64,
    /// `|modified - exact| / exact`; zero at `k = 0`.
    pub relative_difference: f64,
}

pub fn dirac_vs_modified_spectrum(ks: &[f64], m: f64) -> Vec<SpectrumComparison> {
    ks.iter()
        .map(|&k| {
            let k2 = k * k;
            // k^2 / (sqrt(k^2 + m^2) + m) avoids the cancellation at small k
            let exact = k2 / ((k2 + m * m).sqrt() + m);
            let modified = (k2 / (2.0 * m)) / (1.0 + k2 / (4.0 * m * m));
            let relative_difference = if exact == 0.0 { 0.0 } else { (modified - exact).abs() / exact };
            SpectrumComparison {
                k,
                exact,
                modified,
                relative_difference,
            }
        })
        .collect()
}

pub fn density_table(rows: &[DensityComparison]) -> Table {
    let mut t = Table::new(["k", "exact", "reduced", "difference"]);
    for r in rows {
        t.push(vec![r.k.into(), r.exact.into(), r.reduced.into(), r.difference.into()]);
    }
    t
}

pub fn spectrum_table(rows: &[SpectrumComparison]) -> Table {
    let mut t = Table::new(["k", "exact", "modified", "relative_difference"]);
    for r in rows {
        t.push(vec![r.k.into(), r.exact.into(), r.modified.into(), r.relative_difference.into()]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Transmitted momentum always positive.
    Naive,
    /// Transmitted momentum negative below `V0 - m`, so the current flows right.
    KleinPauli,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Naive => "naive",
            Branch::KleinPauli => "klein-pauli",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `E - V0 > m`
    Subcritical,
    /// `E - V0 < -m`
    Supercritical,
    /// `|E - V0| < m`: no propagating wave beyond the step.
    Evanescent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KleinResult {
    pub r: Complex64,
    pub t: Complex64,
    pub reflection: f64,
    pub transmission: f64,
    pub branch: Branch,
    pub regime: Regime,
}

/// Step of height `v0` at `x = 0`, wave of total energy `e > m` incident from the left.
///
/// Continuity of both spinor components is solved as a 2x2 linear system; `R`
/// and `T` are ratios of the spinor currents.
pub fn klein_step(e: f64, v0: f64, m: f64, branch: Branch) -> Result<KleinResult> {
    if !(m > 0.0) {
        return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
    }
    if !(e > m) {
        return Err(Error::NoIncidentChannel { energy: e, potential: 0.0 });
    }
    let w = e - v0;
    let q2 = w * w - m * m;
    let regime = if q2 < 0.0 {
        Regime::Evanescent
    } else if w > 0.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    let q = match regime {
        Regime::Evanescent => Complex64::new(0.0, (-q2).sqrt()),
        Regime::Supercritical if branch == Branch::KleinPauli => Complex64::new(-q2.sqrt(), 0.0),
        _ => Complex64::new(q2.sqrt(), 0.0),
    };
    let k = Complex64::new((e * e - m * m).sqrt(), 0.0);
    let inc = Spinor1D::plane_wave(k, m, e, 0.0);
    let refl = Spinor1D::plane_wave(-k, m, e, 0.0);
    let tran = Spinor1D::plane_wave(q, m, e, v0);

    // inc + r refl = t tran, component by component
    let (a11, a12) = (refl.phi, -tran.phi);
    let (a21, a22) = (refl.eta, -tran.eta);
    let (b1, b2) = (-inc.phi, -inc.eta);
    let det = a11 * a22 - a12 * a21;
    let r = (b1 * a22 - a12 * b2) / det;
    let t = (a11 * b2 - b1 * a21) / det;

    let j_in = inc.current();
    let reflection = -refl.scaled(r).current() / j_in;
    let transmission = tran.scaled(t).current() / j_in;
    Ok(KleinResult {
        r,
        t,
        reflection,
        transmission,
        branch,
        regime,
    })
}

pub fn klein_table(rows: &[(f64, KleinResult)]) -> Table {
    let mut t = Table::new(["V0", "R", "T", "branch"]);
    for (v0, res) in rows {
        t.push(vec![(*v0).into(), res.reflection.into(), res.transmission.into(), Cell::Text(res.branch.name().into())]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_slope;
    use crate::grid::Grid1D;
    use crate::model::ModelParams;
    use crate::norm::presence_density;
    use proptest::prelude::*;

    fn log_ks() -> Vec<f64> {
        (0..=20).map(|i| 0.01 * 10f64.powf(i as f64 / 20.0)).collect()
    }

    #[test]
    fn reduce_density_is_presence_density() {
        let g = Grid1D::dirichlet(-3.0, 3.0, 301).unwrap();
        let phi = WaveFunction::from_fn(g, |x| Complex64::new(x * (-x * x).exp(), 0.3 * x));
        let m = 0.7;
        let p = ModelParams::gauge(1.0, 1.0 / (4.0 * m * m)).unwrap();
        assert_eq!(reduce_density(&phi, m), presence_density(&phi, &p));
        // odd field: node at x = 0 stays positive
        let odd = WaveFunction::from_fn(g, |x| Complex64::new(x * (-x * x).exp(), 0.0));
        assert!(reduce_density(&odd, m)[150] > 0.1);
        let heavy = reduce_density(&odd, 1e6);
        assert!(heavy.iter().zip(odd.values()).all(|(r, v)| (r - v.norm_sqr()).abs() < 1e-11));
    }

    #[test]
    fn density_values() {
        assert_eq!(exact_free_density(0.0, 1.0), 1.0);
        assert!((reduced_plane_wave_density(0.1, 1.0) - 1.0025).abs() < 1e-15);
        let d = density_comparison(&[0.1], 1.0)[0];
        assert!((d.exact - 1.0025).abs() < 2e-5);
        assert!(d.difference > 0.0 && d.difference < 1.3e-5);
        let s = Spinor1D::free_plane_wave(0.1, 1.0);
        assert!((s.density() - d.exact).abs() < 1e-15);
        assert!(s.eta.norm() < 1.0);
    }

    #[test]
    fn density_difference_is_fourth_order() {
        let ks = log_ks();
        let rows = density_comparison(&ks, 1.0);
        let slope = loglog_slope(&ks, &rows.iter().map(|r| r.difference).collect::<Vec<_>>());
        assert!((slope - 4.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn spectrum_values_and_order() {
        let r = dirac_vs_modified_spectrum(&[0.0, 0.1], 1.0);
        assert_eq!(r[0].exact, 0.0);
        assert_eq!(r[0].modified, 0.0);
        assert!((r[1].exact - 0.0049876).abs() < 1e-7);
        assert!((r[1].modified - 0.0049876).abs() < 1e-7);
        assert!(r[1].relative_difference < 2e-5);
        let ks = log_ks();
        let rows = dirac_vs_modified_spectrum(&ks, 1.0);
        let slope = loglog_slope(&ks, &rows.iter().map(|r| r.relative_difference).collect::<Vec<_>>());
        assert!((slope - 4.0).abs() < 0.1, "{slope}");
    }

    fn closed_form(e: f64, v0: f64, m: f64, branch: Branch) -> (f64, f64) {
        let k = (e * e - m * m).sqrt();
        let w = e - v0;
        let mut q = (w * w - m * m).sqrt();
        if w < -m && branch == Branch::KleinPauli {
            q = -q;
        }
        let kappa = (q / (w + m)) / (k / (e + m));
        ((1.0 - kappa).powi(2) / (1.0 + kappa).powi(2), 4.0 * kappa / (1.0 + kappa).powi(2))
    }

    #[test]
    fn no_step_transmits() {
        let r = klein_step(2.0, 0.0, 1.0, Branch::Naive).unwrap();
        assert!(r.reflection.abs() < 1e-15 && (r.transmission - 1.0).abs() < 1e-15);
    }

    #[test]
    fn naive_pathology_and_klein_pauli_fix() {
        for &(e, v0) in &[(2.0, 5.0), (1.5, 3.0), (3.0, 100.0), (1.1, 2.2)] {
            let n = klein_step(e, v0, 1.0, Branch::Naive).unwrap();
            assert_eq!(n.regime, Regime::Supercritical);
            assert!(n.reflection > 1.0 && n.transmission < 0.0);
            assert!((n.reflection + n.transmission - 1.0).abs() < 1e-12);
            let kp = klein_step(e, v0, 1.0, Branch::KleinPauli).unwrap();
            assert!(kp.transmission > 0.0 && kp.reflection >= 0.0);
            assert!((kp.reflection + kp.transmission - 1.0).abs() < 1e-12);
            for b in [Branch::Naive, Branch::KleinPauli] {
                let (rc, tc) = closed_form(e, v0, 1.0, b);
                let res = klein_step(e, v0, 1.0, b).unwrap();
                assert!((res.reflection - rc).abs() < 1e-12 && (res.transmission - tc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evanescent_far_side_reflects_totally() {
        let r = klein_step(2.0, 2.5, 1.0, Branch::KleinPauli).unwrap();
        assert_eq!(r.regime, Regime::Evanescent);
        assert!((r.reflection - 1.0).abs() < 1e-14);
        assert!(r.transmission.abs() < 1e-14);
        assert!(matches!(klein_step(0.5, 0.0, 1.0, Branch::Naive), Err(Error::NoIncidentChannel { .. })));
    }

    #[test]
    fn klein_tunneling_plateau() {
        let (e, m) = (10.0, 1.0);
        let ts: Vec<f64> = (0..=16)
            .map(|i| klein_step(e, 10f64.powf(2.0 + i as f64 / 4.0) * m, m, Branch::KleinPauli).unwrap().transmission)
            .collect();
        let (lo, hi) = ts.iter().fold((f64::MAX, f64::MIN), |(a, b), t| (a.min(*t), b.max(*t)));
        assert!(hi - lo < 1e-3, "{lo} {hi}");
        // limit: Gamma_R -> 1, kappa -> (E + m)/k
        let kappa = (e + m) / (e * e - m * m).sqrt();
        let limit = 4.0 * kappa / (1.0 + kappa).powi(2);
        assert!((ts[16] - limit).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn klein_pauli_unitary(e in 1.001f64..20.0, v0 in -50.0f64..200.0, m in 0.1f64..5.0) {
            let e = e * m;
            let res = klein_step(e, v0, m, Branch::KleinPauli).unwrap();
            prop_assert!((res.reflection + res.transmission - 1.0).abs() < 1e-12);
            prop_assert!(res.reflection >= -1e-15 && res.transmission >= -1e-15);
        }
    }
}
