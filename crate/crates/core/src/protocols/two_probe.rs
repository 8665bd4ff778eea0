//! The two-probe protocol: Alice's probe meets a locally prepared second
//! probe on a balanced beam splitter, the sum port is displaced back to the
//! vacuum, and a single detector click heralds one of the four Bell states.

use num_complex::Complex;

use crate::density::{LocalCorrection, QubitPairDensity};
use crate::detectors::{
    measure_weight, pnr_enumeration_cutoff, DetectorModel, ModeMeasurement, Outcome,
};
use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::protocols::{assemble, ProtocolResult, RawOutcome};
use crate::scalar::{lit, Real};
use crate::states::{gram_overlap, BranchState, DisplacementPhase};

type C<T> = Complex<T>;

/// Mode watched by detector D1 (beam-splitter difference port).
pub const DETECTOR_1_MODE: &str = "b3";
/// Mode watched by detector D2 (displaced sum port).
pub const DETECTOR_2_MODE: &str = "b5";
/// Fiber environment.
pub const ENV_MODE: &str = "E";

/// `|psi>_{A b1 E}`: Alice's memory and probe after the interaction and the fiber.
pub fn alice_state<T: Real>(p: &ProtocolParams<T>) -> Result<BranchState<T>> {
    let alpha = C::new(p.alpha, T::zero());
    BranchState::prepare_memory("A", p.xi() + p.zeta())?
        .attach_coherent_mode("b1", alpha)?
        .apply_controlled_rotation("A", "b1", p.theta)?
        .apply_loss("b1", ENV_MODE, p.transmittance())
}

/// Lossless reference `sum_j e^{i (-1)^j phi} |j>_A |u_j>_{b1} / sqrt2` with
/// `2 phi = arg <v1|v0>`.
pub fn ideal_lossless_state<T: Real>(p: &ProtocolParams<T>) -> Result<BranchState<T>> {
    let (v0, v1) = environment_states(p);
    let phi = (v1.0.conj() * v0.0 * gram_overlap(v1.1, v0.1)).arg() * lit(0.5);
    let amp = C::new(p.transmittance().sqrt() * p.alpha, T::zero());
    BranchState::prepare_memory("A", p.zeta() - phi)?
        .attach_coherent_mode("b1", amp)?
        .apply_controlled_rotation("A", "b1", p.theta)
}

/// Unit phase and coherent amplitude of one environment state.
type PhasedCoherent<T> = (C<T>, C<T>);

/// `|v_0>` and `|v_1>`.
fn environment_states<T: Real>(p: &ProtocolParams<T>) -> (PhasedCoherent<T>, PhasedCoherent<T>) {
    let amp = (T::one() - p.transmittance()).sqrt() * p.alpha;
    let half = p.theta * lit(0.5);
    let v = |sign: T| {
        (
            C::from_polar(T::one(), -sign * p.xi()),
            C::from_polar(amp, sign * half),
        )
    };
    (v(T::one()), v(-T::one()))
}

/// Total state `|chi>` over memories A, B and modes b3 (D1), b5 (D2), E.
pub fn two_probe_state<T: Real>(
    p: &ProtocolParams<T>,
    convention: DisplacementPhase,
) -> Result<BranchState<T>> {
    let t = p.transmittance();
    let probe = C::new(t.sqrt() * p.alpha, T::zero());
    let bob = BranchState::prepare_memory("B", p.zeta())?
        .attach_coherent_mode("b2", probe)?
        .apply_controlled_rotation("B", "b2", p.theta)?;
    let shift = C::new(
        -(lit::<T>(2.0) * t).sqrt() * p.alpha * (p.theta * lit(0.5)).cos(),
        T::zero(),
    );
    alice_state(p)?
        .tensor(&bob)?
        .apply_beamsplitter_5050("b1", "b2")?
        .rename_mode("b1", DETECTOR_1_MODE)?
        .apply_displacement_with("b2", shift, convention)?
        .rename_mode("b2", DETECTOR_2_MODE)
}

/// Which detector fired in a successful outcome.
fn fired<T: Real>(o: &Outcome<T>) -> bool {
    !matches!(o, Outcome::Count(0) | Outcome::NoClick)
}

/// Local correction for a heralding outcome `(d1, d2)`.
///
/// With photon counting the parity selects the heralded Bell state: D1 odd
/// heralds Psi-, D1 even Psi+, D2 odd Phi-, D2 even Phi+. Outcomes without
/// parity information (clicks, counts above the enumeration cutoff) get the
/// odd-parity correction of the detector that fired.
pub fn correction_for<T: Real>(d1: &Outcome<T>, d2: &Outcome<T>) -> Result<LocalCorrection<T>> {
    let odd = |o: &Outcome<T>| match o {
        Outcome::Count(n) => Ok(n % 2 == 1),
        Outcome::Click | Outcome::Above(_) => Ok(true),
        _ => Err(Error::FailedOutcome),
    };
    match (fired(d1), fired(d2)) {
        (true, false) => Ok(LocalCorrection::pauli(odd(d1)?, true)),
        (false, true) => Ok(LocalCorrection::pauli(odd(d2)?, false)),
        _ => Err(Error::FailedOutcome),
    }
}

/// Joint two-detector statistics of the total state, independent of how it is represented.
pub trait JointDetector<T: Real> {
    fn models(&self) -> (DetectorModel<T>, DetectorModel<T>);
    /// Unnormalised memory state for outcome `o1` at D1 and `o2` at D2.
    fn joint_weight(&self, o1: &Outcome<T>, o2: &Outcome<T>) -> Result<QubitPairDensity<T>>;
    /// Photon numbers worth enumerating at detector `index` (0 = D1, 1 = D2).
    fn photon_cutoff(&self, index: usize) -> usize;
    fn norm_sqr(&self) -> T;
}

/// [`JointDetector`] over the exact branch representation.
pub struct BranchDetection<T> {
    state: BranchState<T>,
    models: (DetectorModel<T>, DetectorModel<T>),
}

impl<T: Real> BranchDetection<T> {
    pub fn new(state: BranchState<T>, d1: DetectorModel<T>, d2: DetectorModel<T>) -> Self {
        Self {
            state,
            models: (d1, d2),
        }
    }

    pub fn state(&self) -> &BranchState<T> {
        &self.state
    }
}

impl<T: Real> JointDetector<T> for BranchDetection<T> {
    fn models(&self) -> (DetectorModel<T>, DetectorModel<T>) {
        self.models
    }

    fn joint_weight(&self, o1: &Outcome<T>, o2: &Outcome<T>) -> Result<QubitPairDensity<T>> {
        measure_weight(
            &self.state,
            &[
                ModeMeasurement::new(DETECTOR_1_MODE, self.models.0, *o1),
                ModeMeasurement::new(DETECTOR_2_MODE, self.models.1, *o2),
            ],
            &[ENV_MODE],
        )
    }

    fn photon_cutoff(&self, index: usize) -> usize {
        let mode = [DETECTOR_1_MODE, DETECTOR_2_MODE][index];
        let k = self.state.mode_index(mode).expect("detector mode present");
        let mean = self
            .state
            .branches()
            .iter()
            .map(|b| b.amplitudes[k].norm_sqr())
            .fold(T::zero(), T::max);
        pnr_enumeration_cutoff(mean)
    }

    fn norm_sqr(&self) -> T {
        self.state.norm_sqr()
    }
}

/// Outcomes of one detector that report light, in enumeration order.
fn firing_outcomes<T: Real>(model: &DetectorModel<T>, cutoff: usize) -> Result<Vec<Outcome<T>>> {
    match model {
        DetectorModel::Pnr => {
            let n = cutoff.max(1);
            let mut v: Vec<_> = (1..=n).map(Outcome::Count).collect();
            v.push(Outcome::Above(n));
            Ok(v)
        }
        DetectorModel::Threshold { .. } => Ok(vec![Outcome::Click]),
        DetectorModel::Homodyne { .. } => Err(Error::UnsupportedDetector(model.to_string())),
    }
}

/// Enumerates the exhaustive outcome table of a two-detector herald and aggregates it.
pub fn run_two_detector<T: Real>(backend: &impl JointDetector<T>) -> Result<ProtocolResult<T>> {
    let (m1, m2) = backend.models();
    let fire1 = firing_outcomes(&m1, backend.photon_cutoff(0))?;
    let fire2 = firing_outcomes(&m2, backend.photon_cutoff(1))?;
    let (silent1, silent2) = (
        m1.silent().expect("counting detector"),
        m2.silent().expect("counting detector"),
    );
    let (any1, any2) = (
        m1.fired().expect("counting detector"),
        m2.fired().expect("counting detector"),
    );

    let label =
        |o1: Outcome<T>, o2: Outcome<T>| vec![("D1".to_string(), o1), ("D2".to_string(), o2)];
    let mut raw = Vec::new();
    let mut push = |o1: Outcome<T>, o2: Outcome<T>, success: bool| -> Result<()> {
        let weight = backend.joint_weight(&o1, &o2)?;
        let correction = if success {
            Some(correction_for(&o1, &o2)?)
        } else {
            None
        };
        raw.push(RawOutcome {
            outcomes: label(o1, o2),
            weight,
            success,
            correction,
        });
        Ok(())
    };
    for o1 in &fire1 {
        push(*o1, silent2, true)?;
    }
    for o2 in &fire2 {
        push(silent1, *o2, true)?;
    }
    push(silent1, silent2, false)?;
    push(any1, any2, false)?;
    Ok(assemble(raw, backend.norm_sqr()))
}

/// Runs the two-probe protocol with detectors `d1` on the difference port
/// and `d2` on the displaced sum port.
pub fn run_new_protocol<T: Real>(
    p: &ProtocolParams<T>,
    d1: &DetectorModel<T>,
    d2: &DetectorModel<T>,
) -> Result<ProtocolResult<T>> {
    run_new_protocol_with(p, d1, d2, DisplacementPhase::Standard)
}

pub fn run_new_protocol_with<T: Real>(
    p: &ProtocolParams<T>,
    d1: &DetectorModel<T>,
    d2: &DetectorModel<T>,
    convention: DisplacementPhase,
) -> Result<ProtocolResult<T>> {
    for d in [d1, d2] {
        if matches!(d, DetectorModel::Homodyne { .. }) {
            return Err(Error::UnsupportedDetector(d.to_string()));
        }
    }
    let chi = two_probe_state(p, convention)?;
    run_two_detector(&BranchDetection::new(chi, *d1, *d2))
}
