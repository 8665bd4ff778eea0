//! End-to-end protocol runs and their outcome bookkeeping.
//!
//! Every run produces an exhaustive [`OutcomeEntry`] table (successes and
//! failures), applies a local correction to each heralded state and reports
//! success-averaged figures of merit.

mod comparators;
mod two_probe;

pub use comparators::{run_protocol_i, run_protocol_ii, HOMODYNE_BINS};
pub use two_probe::{
    alice_state, correction_for, ideal_lossless_state, run_new_protocol, run_new_protocol_with,
    run_two_detector, two_probe_state, BranchDetection, JointDetector, DETECTOR_1_MODE,
    DETECTOR_2_MODE, ENV_MODE,
};

use crate::density::{bell_weights_unchecked, BellWeights, LocalCorrection, QubitPairDensity};
use crate::detectors::Outcome;
use crate::scalar::{lit, Real};

/// Bell components below this weight do not count as an error type.
pub const ERROR_TYPE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeEntry<T> {
    pub outcomes: Vec<(String, Outcome<T>)>,
    pub probability: T,
    pub success: bool,
    pub correction: Option<LocalCorrection<T>>,
    /// Normalised memory state before correction; `None` for zero-weight outcomes.
    pub conditional_state: Option<QubitPairDensity<T>>,
    /// Phi+ weight after correction, for successful outcomes.
    pub fidelity: Option<T>,
}

impl<T: Real> OutcomeEntry<T> {
    /// Post-correction normalised state of a successful outcome.
    pub fn corrected_state(&self) -> Option<QubitPairDensity<T>> {
        Some(self.correction?.apply(self.conditional_state.as_ref()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult<T> {
    pub outcomes: Vec<OutcomeEntry<T>>,
    pub success_probability: T,
    /// Success-averaged fidelity to Phi+ after correction. NaN when no
    /// outcome heralds success with nonzero probability.
    pub fidelity: T,
    /// Success-averaged post-correction Bell weights (NaN when undefined).
    pub bell_weights: BellWeights<T>,
    /// Bell-error components with weight above [`ERROR_TYPE_THRESHOLD`].
    pub error_types: usize,
}

impl<T: Real> ProtocolResult<T> {
    pub fn total_probability(&self) -> T {
        self.outcomes
            .iter()
            .fold(T::zero(), |acc, o| acc + o.probability)
    }

    pub fn successes(&self) -> impl Iterator<Item = &OutcomeEntry<T>> {
        self.outcomes.iter().filter(|o| o.success)
    }
}

/// Raw (unnormalised) outcome before bookkeeping.
pub(crate) struct RawOutcome<T> {
    pub outcomes: Vec<(String, Outcome<T>)>,
    pub weight: QubitPairDensity<T>,
    pub success: bool,
    pub correction: Option<LocalCorrection<T>>,
}

fn nan_weights<T: Real>() -> BellWeights<T> {
    BellWeights {
        phi_plus: T::nan(),
        phi_minus: T::nan(),
        psi_plus: T::nan(),
        psi_minus: T::nan(),
        max_off_diagonal: T::nan(),
    }
}

pub(crate) fn assemble<T: Real>(raw: Vec<RawOutcome<T>>, norm_sqr: T) -> ProtocolResult<T> {
    let mut entries = Vec::with_capacity(raw.len());
    let mut heralded = QubitPairDensity::zero();
    let mut ps = T::zero();
    for r in raw {
        let w = r.weight.trace();
        let probability = w / norm_sqr;
        let conditional_state = if w > T::zero() {
            r.weight.normalized().ok()
        } else {
            None
        };
        let mut fidelity = None;
        if r.success {
            ps += probability;
            if let (Some(c), Some(rho)) = (r.correction, conditional_state.as_ref()) {
                heralded = heralded + c.apply(&r.weight);
                fidelity = Some(bell_weights_unchecked(&c.apply(rho)).phi_plus);
            }
        }
        entries.push(OutcomeEntry {
            outcomes: r.outcomes,
            probability,
            success: r.success,
            correction: r.correction,
            conditional_state,
            fidelity,
        });
    }
    let (fidelity, bell_weights, error_types) = match heralded.normalized() {
        Ok(avg) => {
            let bw = bell_weights_unchecked(&avg);
            (bw.phi_plus, bw, bw.error_types(lit(ERROR_TYPE_THRESHOLD)))
        }
        Err(_) => (T::nan(), nan_weights(), 0),
    };
    ProtocolResult {
        outcomes: entries,
        success_probability: ps,
        fidelity,
        bell_weights,
        error_types,
    }
}
