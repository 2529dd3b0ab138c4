use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which modified Lagrangian drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Plain Schrödinger dynamics; `a` is pinned to zero.
    Standard,
    /// `a`-term built from bare time derivatives; the scalar `V` stays outside it.
    Gradient,
    /// `a`-term built from the covariant derivative `D_t = d_t - i A0`.
    Gauge,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Gradient => "gradient",
            Variant::Gauge => "gauge",
        }
    }
}

/// Mass `m`, kinetic coupling `a` and the variant. Units have `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    m: f64,
    a: f64,
    variant: Variant,
}

impl ModelParams {
    pub fn new(m: f64, a: f64, variant: Variant) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParams(format!("mass must be positive, got {m}")));
        }
        if !a.is_finite() {
            return Err(Error::InvalidParams(format!("coupling must be finite, got {a}")));
        }
        if a < 0.0 {
            return Err(Error::NegativeCoupling(a));
        }
        if variant == Variant::Standard && a != 0.0 {
            return Err(Error::InvalidParams(format!(
                "the standard variant has a = 0, got a = {a}"
            )));
        }
        Ok(Self { m, a, variant })
    }

    pub fn standard(m: f64) -> Result<Self> {
        Self::new(m, 0.0, Variant::Standard)
    }

    pub fn gradient(m: f64, a: f64) -> Result<Self> {
        Self::new(m, a, Variant::Gradient)
    }

    pub fn gauge(m: f64, a: f64) -> Result<Self> {
        Self::new(m, a, Variant::Gauge)
    }

    #[inline]
    pub fn m(&self) -> f64 {
        self.m
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Same variant and mass with another coupling. `a = 0` on the standard variant only.
    pub fn with_a(&self, a: f64) -> Result<Self> {
        Self::new(self.m, a, self.variant)
    }

    pub(crate) fn is_gauge(&self) -> bool {
        self.variant == Variant::Gauge
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_coupling() {
        assert_eq!(
            ModelParams::gradient(1.0, -0.1).unwrap_err(),
            Error::NegativeCoupling(-0.1)
        );
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(ModelParams::gradient(0.0, 0.1).is_err());
        assert!(ModelParams::gauge(-1.0, 0.1).is_err());
    }

    #[test]
    fn standard_means_zero_coupling() {
        assert!(ModelParams::new(1.0, 0.1, Variant::Standard).is_err());
        let p = ModelParams::standard(2.0).unwrap();
        assert_eq!(p.a(), 0.0);
    }
}
