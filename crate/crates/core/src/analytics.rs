//! Closed-form performance of the two-probe protocol, the optimality
//! boundary and the overlap bounds it is derived from.
//!
//! With `x = alpha^2 sin^2(theta/2)` and transmittance `T`:
//!
//! * success probability `P_s = 1 - exp(-2 T x)`,
//! * fidelity `F = (1 + exp(-2 (1 - T) x)) / 2`,
//! * ideal threshold detectors give `F = (1 + exp(-2 x)) / 2`,
//! * any one-error-type protocol obeys `P_s <= 1 - |<u1|u0>|` and
//!   `F <= (1 + |<v1|v0>|) / 2`, with `(1 - T) ln|<u1|u0>| = T ln|<v1|v0>|`.

use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::scalar::{lit, Real};

/// A `(P_s, F)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformancePoint<T> {
    pub ps: T,
    pub f: T,
}

/// Magnitudes of the received-probe overlap `|<u1|u0>|` and the environment
/// overlap `|<v1|v0>|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPair<T> {
    pub u_overlap: T,
    pub v_overlap: T,
}

impl<T: Real> OverlapPair<T> {
    /// `(1 - T) ln u - T ln v`; zero for overlaps produced by a lossy channel.
    pub fn loss_constraint_residual(&self, transmittance: T) -> T {
        (T::one() - transmittance) * self.u_overlap.ln() - transmittance * self.v_overlap.ln()
    }
}

pub fn ps_closed<T: Real>(p: &ProtocolParams<T>) -> T {
    -(lit::<T>(-2.0) * p.transmittance() * p.interaction_scale()).exp_m1()
}

pub fn f_closed<T: Real>(p: &ProtocolParams<T>) -> T {
    let e = (lit::<T>(-2.0) * (T::one() - p.transmittance()) * p.interaction_scale()).exp();
    (T::one() + e) * lit(0.5)
}

/// Fidelity with ideal click/no-click detectors.
pub fn f_td_ideal<T: Real>(p: &ProtocolParams<T>) -> T {
    let e = (lit::<T>(-2.0) * p.interaction_scale()).exp();
    (T::one() + e) * lit(0.5)
}

pub fn overlaps_from_params<T: Real>(p: &ProtocolParams<T>) -> OverlapPair<T> {
    let x = p.interaction_scale();
    let t = p.transmittance();
    OverlapPair {
        u_overlap: (lit::<T>(-2.0) * t * x).exp(),
        v_overlap: (lit::<T>(-2.0) * (T::one() - t) * x).exp(),
    }
}

/// Largest success probability compatible with unambiguous discrimination
/// of the two received probe states.
pub fn usd_bound<T: Real>(u_overlap: T) -> T {
    T::one() - u_overlap
}

/// Largest fidelity reachable once the environment holds overlap `v_overlap`.
pub fn fidelity_bound<T: Real>(v_overlap: T) -> T {
    (T::one() + v_overlap) * lit(0.5)
}

/// Point `(1 - s, (1 + s^((1 - T)/T)) / 2)` of the optimal frontier.
pub fn boundary<T: Real>(transmittance: T, s: T) -> Result<PerformancePoint<T>> {
    if !(transmittance > T::zero() && transmittance < T::one()) {
        return Err(Error::OutOfRange {
            name: "T",
            value: transmittance.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    let expo = (T::one() - transmittance) / transmittance;
    Ok(PerformancePoint {
        ps: T::one() - s,
        f: (T::one() + s.powf(expo)) * lit(0.5),
    })
}

/// Frontier fidelity at success probability `ps`. Rounding overshoot of
/// `ps` past 0 or 1 up to `1e-12` is clamped.
pub fn boundary_fidelity_at<T: Real>(transmittance: T, ps: T) -> Result<T> {
    let slack = lit::<T>(1e-12);
    let s = T::one() - ps;
    let s = if s < T::zero() && s > -slack {
        T::zero()
    } else if s > T::one() && s < T::one() + slack {
        T::one()
    } else {
        s
    };
    Ok(boundary(transmittance, s)?.f)
}

/// Amplitude placing the protocol at frontier parameter `s = exp(-2 T alpha^2 sin^2(theta/2))`.
pub fn alpha_for_s<T: Real>(s: T, theta: T, transmittance: T) -> T {
    let h = (theta * lit(0.5)).sin();
    (-s.ln() / (lit::<T>(2.0) * transmittance * h * h)).sqrt()
}

/// Log-uniform grid of `count` values between `lo` and `hi`, inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * lit::<T>(i as f64) / lit::<T>((count - 1) as f64)).exp())
                .collect()
        }
    }
}

/// Closed forms of the single-probe displaced-counting comparator with an
/// ideal counter: `P_s = (1 - exp(-4 T x)) / 2`, same fidelity as [`f_closed`].
pub fn comparator_ii_ps_closed<T: Real>(p: &ProtocolParams<T>) -> T {
    -(lit::<T>(-4.0) * p.transmittance() * p.interaction_scale()).exp_m1() * lit(0.5)
}

/// Estimated weight of dark-count-induced errors, `nu (1/P_s - 1)`.
pub fn dark_count_error_estimate<T: Real>(nu: T, ps: T) -> Result<T> {
    if !(ps > T::zero() && ps <= T::one()) {
        return Err(Error::OutOfRange {
            name: "ps",
            value: ps.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(nu >= T::zero()) {
        return Err(Error::OutOfRange {
            name: "nu",
            value: nu.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(nu * (T::one() / ps - T::one()))
}
