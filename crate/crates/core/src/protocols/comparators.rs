//! Single-probe comparator protocols.
//!
//! Both share Alice's preparation and the lossy fiber. Bob couples the
//! received probe to his memory with the same controlled rotation, so the
//! probe amplitude is `sqrt(T) alpha e^{+i theta}` for memory bits 00,
//! `sqrt(T) alpha e^{-i theta}` for 11 and `sqrt(T) alpha` for 01 and 10.
//!
//! * Displaced counting: displace by `-sqrt(T) alpha`, sending the 01/10
//!   branches to the vacuum; any nonzero count heralds a Phi-type state.
//! * Homodyne: measure the quadrature along `a_00 - a_11`, accept outcomes in
//!   a window centred on the 01/10 branch; accepted states are Psi-type.
//!
//! Every heralded state gets the correction that rotates its dominant Bell
//! block onto Phi+ with a real coherence ([`LocalCorrection::aligning`]).

use num_complex::Complex;

use crate::density::LocalCorrection;
use crate::detectors::{
    measure_weight, pnr_enumeration_cutoff, DetectorModel, ModeMeasurement, Outcome,
};
use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::protocols::two_probe::{alice_state, ENV_MODE};
use crate::protocols::{assemble, ProtocolResult, RawOutcome};
use crate::scalar::{lit, Real};
use crate::states::BranchState;

type C<T> = Complex<T>;

/// Sub-windows used for outcome-dependent correction inside the acceptance window.
pub const HOMODYNE_BINS: usize = 16;

const PROBE: &str = "b1";

fn bob_coupled_state<T: Real>(p: &ProtocolParams<T>) -> Result<BranchState<T>> {
    alice_state(p)?
        .tensor(&BranchState::prepare_memory("B", p.zeta())?)?
        .apply_controlled_rotation("B", PROBE, p.theta)
}

fn outcome_raw<T: Real>(
    state: &BranchState<T>,
    model: DetectorModel<T>,
    o: Outcome<T>,
    success: bool,
) -> Result<RawOutcome<T>> {
    let weight = measure_weight(state, &[ModeMeasurement::new(PROBE, model, o)], &[ENV_MODE])?;
    let correction = if success && weight.trace() > T::zero() {
        Some(LocalCorrection::aligning(&weight))
    } else if success {
        Some(LocalCorrection::identity())
    } else {
        None
    };
    Ok(RawOutcome {
        outcomes: vec![("D".to_string(), o)],
        weight,
        success,
        correction,
    })
}

/// Displaced photon counting on the single received probe.
pub fn run_protocol_ii<T: Real>(
    p: &ProtocolParams<T>,
    detector: &DetectorModel<T>,
) -> Result<ProtocolResult<T>> {
    let shift = C::new(-p.transmittance().sqrt() * p.alpha, T::zero());
    let state = bob_coupled_state(p)?.apply_displacement(PROBE, shift)?;
    let mut raw = Vec::new();
    match detector {
        DetectorModel::Pnr => {
            let k = state.mode_index(PROBE)?;
            let mean = state
                .branches()
                .iter()
                .map(|b| b.amplitudes[k].norm_sqr())
                .fold(T::zero(), T::max);
            let n = pnr_enumeration_cutoff(mean).max(1);
            for k in 1..=n {
                raw.push(outcome_raw(&state, *detector, Outcome::Count(k), true)?);
            }
            raw.push(outcome_raw(&state, *detector, Outcome::Above(n), true)?);
            raw.push(outcome_raw(&state, *detector, Outcome::Count(0), false)?);
        }
        DetectorModel::Threshold { .. } => {
            raw.push(outcome_raw(&state, *detector, Outcome::Click, true)?);
            raw.push(outcome_raw(&state, *detector, Outcome::NoClick, false)?);
        }
        DetectorModel::Homodyne { .. } => {
            return Err(Error::UnsupportedDetector(detector.to_string()))
        }
    }
    Ok(assemble(raw, state.norm_sqr()))
}

/// Homodyne detection with a central acceptance window of half-width `window_halfwidth`
/// (quadrature units where the vacuum variance is 1/2).
pub fn run_protocol_i<T: Real>(
    p: &ProtocolParams<T>,
    window_halfwidth: T,
) -> Result<ProtocolResult<T>> {
    if !(window_halfwidth > T::zero()) || !window_halfwidth.is_finite() {
        return Err(Error::OutOfRange {
            name: "window",
            value: window_halfwidth.to_f64().unwrap_or(f64::NAN),
        });
    }
    let state = bob_coupled_state(p)?;
    let k = state.mode_index(PROBE)?;
    let amp = |bits: [bool; 2]| {
        state
            .branches()
            .iter()
            .find(|b| b.bits == bits)
            .map(|b| b.amplitudes[k])
            .expect("all four memory branches present")
    };
    let split = amp([false, false]) - amp([true, true]);
    let angle = if split.norm() > T::zero() {
        split.arg()
    } else {
        T::zero()
    };
    let model = DetectorModel::Homodyne { angle };
    let center = T::SQRT_2() * (amp([false, true]) * C::from_polar(T::one(), -angle)).re;
    let (lo, hi) = (center - window_halfwidth, center + window_halfwidth);

    let mut raw = Vec::with_capacity(HOMODYNE_BINS + 1);
    let width = (hi - lo) / lit(HOMODYNE_BINS as f64);
    for i in 0..HOMODYNE_BINS {
        let a = lo + width * lit(i as f64);
        let b = if i + 1 == HOMODYNE_BINS {
            hi
        } else {
            a + width
        };
        raw.push(outcome_raw(
            &state,
            model,
            Outcome::Window { lo: a, hi: b },
            true,
        )?);
    }
    raw.push(outcome_raw(
        &state,
        model,
        Outcome::Outside { lo, hi },
        false,
    )?);
    Ok(assemble(raw, state.norm_sqr()))
}
