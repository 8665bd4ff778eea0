use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Physical knobs of one protocol run.
///
/// `alpha` is Alice's probe amplitude, `theta` the memory-probe interaction
/// strength in radians, `l` the node separation and `l0` the fiber
/// attenuation length (both km). The fiber transmittance is derived, never
/// stored, so every module sees the same value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams<T> {
    pub alpha: T,
    pub theta: T,
    pub l: T,
    pub l0: T,
}

impl<T: Real> ProtocolParams<T> {
    pub fn new(alpha: T, theta: T, l: T, l0: T) -> Result<Self> {
        let bad = |name, v: T| Error::OutOfRange {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
        };
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(bad("alpha", alpha));
        }
        if !theta.is_finite() {
            return Err(bad("theta", theta));
        }
        if !l.is_finite() || l < T::zero() {
            return Err(bad("l", l));
        }
        if !l0.is_finite() || l0 <= T::zero() {
            return Err(bad("l0", l0));
        }
        Ok(Self {
            alpha,
            theta,
            l,
            l0,
        })
    }

    /// Builds parameters that realise transmittance `t` for attenuation length `l0`.
    pub fn from_transmittance(alpha: T, theta: T, t: T, l0: T) -> Result<Self> {
        if !(t > T::zero() && t <= T::one()) {
            return Err(Error::OutOfRange {
                name: "T",
                value: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        Self::new(alpha, theta, -l0 * t.ln(), l0)
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(alpha, self.theta, self.l, self.l0)
    }

    /// `T = exp(-l / l0)`.
    pub fn transmittance(&self) -> T {
        (-self.l / self.l0).exp()
    }

    /// Phase offset fixed by the transmitted part of the probe, `T alpha^2 sin(theta) / 2`.
    pub fn zeta(&self) -> T {
        lit::<T>(0.5) * self.transmittance() * self.alpha * self.alpha * self.theta.sin()
    }

    /// Phase offset fixed by the lost part of the probe, `(1 - T) alpha^2 sin(theta) / 2`.
    pub fn xi(&self) -> T {
        lit::<T>(0.5)
            * (T::one() - self.transmittance())
            * self.alpha
            * self.alpha
            * self.theta.sin()
    }

    /// `alpha^2 sin^2(theta / 2)`, the recurring exponent scale.
    pub fn interaction_scale(&self) -> T {
        let s = (self.theta * lit(0.5)).sin();
        self.alpha * self.alpha * s * s
    }
}
