//! Tridiagonal matrices and an LU factorisation with partial pivoting.

use std::fmt::Debug;
use std::ops::{Div, Mul, Neg};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stencil::Field;

pub trait Scalar:
    Field + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> + PartialEq + Debug + Send + Sync
{
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>) -> Self {
        assert_eq!(sub.len() + 1, diag.len());
        assert_eq!(sup.len() + 1, diag.len());
        Self { sub, diag, sup }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec<U>(&self, x: &[U]) -> Vec<U>
    where
        U: Field + Mul<T, Output = U>,
    {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = x[i] * self.diag[i];
                if i > 0 {
                    acc = acc + x[i - 1] * self.sub[i - 1];
                }
                if i + 1 < n {
                    acc = acc + x[i + 1] * self.sup[i];
                }
                acc
            })
            .collect()
    }

    /// `alpha * self + beta * other`
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        let lin = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| alpha * p + beta * q).collect();
        Self {
            sub: lin(&self.sub, &other.sub),
            diag: lin(&self.diag, &other.diag),
            sup: lin(&self.sup, &other.sup),
        }
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].modulus();
                if i > 0 {
                    s += self.sub[i - 1].modulus();
                }
                if i + 1 < n {
                    s += self.sup[i].modulus();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn factor(&self) -> Result<TridiagonalLu<T>> {
        TridiagonalLu::new(self)
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let mut x = rhs.to_vec();
        self.factor()?.solve_in_place(&mut x);
        Ok(x)
    }

    /// Solves the periodic system whose extra corner entries are `top_right = M[0][n-1]`
    /// and `bottom_left = M[n-1][0]` (Sherman-Morrison on top of the banded solve).
    pub fn solve_cyclic(&self, top_right: T, bottom_left: T, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        let gamma = -self.diag[0];
        let mut reduced = self.clone();
        reduced.diag[0] = self.diag[0] - gamma;
        reduced.diag[n - 1] = self.diag[n - 1] - top_right * bottom_left / gamma;
        let lu = reduced.factor()?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x);
        let mut z = vec![T::ZERO; n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        lu.solve_in_place(&mut z);
        let num = x[0] + top_right * x[n - 1] / gamma;
        let den = T::from_real(1.0) + z[0] + top_right * z[n - 1] / gamma;
        let f = num / den;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = *xi - *zi * f;
        }
        Ok(x)
    }
}

/// LU factors with row interchanges; `U` carries a second superdiagonal.
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T> {
    multipliers: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Scalar> TridiagonalLu<T> {
    fn new(m: &Tridiagonal<T>) -> Result<Self> {
        let n = m.len();
        let mut dl = m.sub.clone();
        let mut d = m.diag.clone();
        let mut du = m.sup.clone();
        let mut du2 = vec![T::ZERO; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].modulus() >= dl[i].modulus() {
                if d[i].modulus() == 0.0 {
                    return Err(Error::SolveFailure(i));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] = d[i + 1] - fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(i) = d.iter().position(|v| v.modulus() == 0.0 || !v.modulus().is_finite()) {
            return Err(Error::SolveFailure(i));
        }
        Ok(Self {
            multipliers: dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.multipliers[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.multipliers[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual<T: Scalar>(m: &Tridiagonal<T>, x: &[T], b: &[T]) -> f64
    where
        T: Mul<T, Output = T>,
    {
        m.matvec(x)
            .iter()
            .zip(b)
            .map(|(p, q)| (*p - *q).modulus())
            .fold(0.0, f64::max)
    }

    #[test]
    fn needs_pivoting() {
        // zero leading diagonal forces a row swap
        let m = Tridiagonal::new(vec![1.0, 2.0], vec![0.0, 1.0, 3.0], vec![2.0, -1.0]);
        let b = vec![1.0, 2.0, 3.0];
        let x = m.solve(&b).unwrap();
        assert!(residual(&m, &x, &b) < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let m = Tridiagonal::new(vec![0.0], vec![0.0, 1.0], vec![0.0]);
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::SolveFailure(_))));
    }

    #[test]
    fn cyclic_matches_dense() {
        let n = 7;
        let m = Tridiagonal::new(vec![-1.0; n - 1], vec![4.0; n], vec![-1.5; n - 1]);
        let (tr, bl) = (-0.5, -2.0);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let x = m.solve_cyclic(tr, bl, &b).unwrap();
        let mut mx = m.matvec(&x);
        mx[0] += tr * x[n - 1];
        mx[n - 1] += bl * x[0];
        for (p, q) in mx.iter().zip(&b) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn complex_solve_residual(
            entries in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3 * 12),
        ) {
            let n = 12;
            let c: Vec<Complex64> = entries.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let m = Tridiagonal::new(c[..n - 1].to_vec(), c[n..2 * n].to_vec(), c[2 * n..3 * n - 1].to_vec());
            let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
            if let Ok(x) = m.solve(&b) {
                let scale = m.norm_inf() * x.iter().map(|v| v.norm()).fold(0.0, f64::max);
                prop_assert!(residual(&m, &x, &b) <= 1e-11 * (1.0 + scale));
            }
        }
    }
}
