//! Detector POVMs and conditioning of branch states on measurement outcomes.
//!
//! Every POVM element is evaluated in closed form between two coherent
//! states, `<a1|E|a2>`, so measuring a mode amounts to swapping its Gram
//! factor for the matching element.

use std::fmt;

use num_complex::Complex;

use crate::density::QubitPairDensity;
use crate::error::{Error, Result};
use crate::scalar::{expm1_c, flush, lit, ln_factorial, Real};
use crate::states::{gram_overlap, BranchState};

type C<T> = Complex<T>;

/// Default truncation target for photon-number enumeration.
pub const PNR_TAIL_TOLERANCE: f64 = 1e-12;

/// Relative tolerance of homodyne window integration.
pub const HOMODYNE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorModel<T> {
    /// Ideal photon-number-resolving counter.
    Pnr,
    /// Click/no-click detector with efficiency `eta` and mean dark count `nu`.
    Threshold { eta: T, nu: T },
    /// Ideal homodyne detector on the quadrature at `angle`.
    Homodyne { angle: T },
}

impl<T: Real> DetectorModel<T> {
    pub fn threshold(eta: T, nu: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::OutOfRange {
                name: "eta",
                value: eta.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(nu >= T::zero()) || !nu.is_finite() {
            return Err(Error::OutOfRange {
                name: "nu",
                value: nu.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self::Threshold { eta, nu })
    }

    /// Outcome reported when the detector registers nothing.
    pub fn silent(&self) -> Option<Outcome<T>> {
        match self {
            Self::Pnr => Some(Outcome::Count(0)),
            Self::Threshold { .. } => Some(Outcome::NoClick),
            Self::Homodyne { .. } => None,
        }
    }

    /// Coarse-grained "anything registered" outcome.
    pub fn fired(&self) -> Option<Outcome<T>> {
        match self {
            Self::Pnr => Some(Outcome::Above(0)),
            Self::Threshold { .. } => Some(Outcome::Click),
            Self::Homodyne { .. } => None,
        }
    }
}

impl<T: Real> fmt::Display for DetectorModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pnr => write!(f, "pnr"),
            Self::Threshold { eta, nu } => write!(f, "td(eta={eta},nu={nu})"),
            Self::Homodyne { angle } => write!(f, "homodyne(angle={angle})"),
        }
    }
}

/// One POVM element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    /// Exactly `n` photons.
    Count(usize),
    /// More than `n` photons; `Above(0)` is "any nonzero count".
    Above(usize),
    Click,
    NoClick,
    /// Quadrature value `x`, reported as density times the bin width `dx`.
    Bin {
        x: T,
        dx: T,
    },
    /// Quadrature inside `[lo, hi]`.
    Window {
        lo: T,
        hi: T,
    },
    /// Quadrature outside `[lo, hi]`.
    Outside {
        lo: T,
        hi: T,
    },
}

impl<T: Real> fmt::Display for Outcome<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Count(n) => write!(f, "n={n}"),
            Self::Above(n) => write!(f, "n>{n}"),
            Self::Click => write!(f, "click"),
            Self::NoClick => write!(f, "no-click"),
            Self::Bin { x, dx } => write!(f, "x={x}(dx={dx})"),
            Self::Window { lo, hi } => write!(f, "x in [{lo},{hi}]"),
            Self::Outside { lo, hi } => write!(f, "x outside [{lo},{hi}]"),
        }
    }
}

fn invalid<T: Real>(model: &DetectorModel<T>, outcome: &Outcome<T>) -> Error {
    Error::InvalidOutcome {
        detector: model.to_string(),
        outcome: outcome.to_string(),
    }
}

/// `<a1|n><n|a2>` for a number state.
fn count_element<T: Real>(n: usize, a1: C<T>, a2: C<T>) -> C<T> {
    let z = a1.conj() * a2;
    let base = -(a1.norm_sqr() + a2.norm_sqr()) * lit(0.5);
    if z.norm() == T::zero() {
        return if n == 0 {
            C::new(base.exp(), T::zero())
        } else {
            C::new(T::zero(), T::zero())
        };
    }
    let nn = lit::<T>(n as f64);
    let expo = C::new(base - ln_factorial::<T>(n), T::zero()) + z.ln() * nn;
    flush(expo.exp())
}

/// Exponent `w` with `<a1|E_nc|a2> = <a1|a2> exp(w)`.
fn no_click_exponent<T: Real>(eta: T, nu: T, a1: C<T>, a2: C<T>) -> C<T> {
    C::new(-nu, T::zero()) - a1.conj() * a2 * eta
}

/// Complex log of the Gram overlap (before flushing).
fn ln_gram<T: Real>(a1: C<T>, a2: C<T>) -> C<T> {
    let d = a1 - a2;
    C::new(-d.norm_sqr() * lit(0.5), (a1.conj() * a2).im)
}

/// Conjugated position-space product `conj(psi_a1(x)) psi_a2(x)` split into
/// a constant prefactor and a Gaussian `exp(-(x - m)^2 + i k x)`.
struct QuadratureProduct<T> {
    prefactor: C<T>,
    center: T,
    wavenumber: T,
}

impl<T: Real> QuadratureProduct<T> {
    fn new(angle: T, a1: C<T>, a2: C<T>) -> Self {
        let rot = C::from_polar(T::one(), -angle);
        let (b1, b2) = (a1 * rot, a2 * rot);
        let s2 = T::SQRT_2();
        let (mu1, mu2) = (s2 * b1.re, s2 * b2.re);
        let quarter = lit::<T>(0.25);
        let ln_pref = C::new(
            -(mu1 - mu2) * (mu1 - mu2) * quarter - lit::<T>(0.5) * T::PI().ln(),
            -(b2.re * b2.im - b1.re * b1.im),
        );
        Self {
            prefactor: ln_pref.exp(),
            center: (mu1 + mu2) * lit(0.5),
            wavenumber: s2 * (b2.im - b1.im),
        }
    }

    fn shape(&self, x: T) -> C<T> {
        let d = x - self.center;
        C::new(-d * d, self.wavenumber * x).exp()
    }

    fn density(&self, x: T) -> C<T> {
        self.prefactor * self.shape(x)
    }

    fn window(&self, lo: T, hi: T) -> C<T> {
        // Beyond 40 widths the Gaussian is below 1e-690.
        let reach = lit::<T>(40.0);
        let a = lo.max(self.center - reach);
        let b = hi.min(self.center + reach);
        if !(a < b) {
            return C::new(T::zero(), T::zero());
        }
        let pieces = ((b - a).to_f64().unwrap_or(1.0).ceil() as usize).clamp(1, 256);
        let h = (b - a) / lit(pieces as f64);
        let mut acc = C::new(T::zero(), T::zero());
        for i in 0..pieces {
            let x0 = a + h * lit(i as f64);
            let x1 = if i + 1 == pieces { b } else { x0 + h };
            acc += integrate_adaptive(&|x| self.shape(x), x0, x1, lit(HOMODYNE_REL_TOL));
        }
        self.prefactor * acc
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate_adaptive<T: Real>(f: &dyn Fn(T) -> C<T>, a: T, b: T, rel_tol: T) -> C<T> {
    let two = lit::<T>(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    // Absolute floor keeps the recursion finite on vanishing integrands.
    let tol = (whole.norm() * rel_tol).max(lit::<T>(1e-18) * (b - a).abs());
    adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson<T: Real>(a: T, b: T, fa: C<T>, fm: C<T>, fb: C<T>) -> C<T> {
    (fa + fm * lit::<T>(4.0) + fb) * ((b - a) / lit(6.0))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<T: Real>(
    f: &dyn Fn(T) -> C<T>,
    a: T,
    b: T,
    fa: C<T>,
    fm: C<T>,
    fb: C<T>,
    whole: C<T>,
    tol: T,
    depth: u32,
) -> C<T> {
    let two = lit::<T>(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= lit::<T>(15.0) * tol {
        return left + right + delta / lit::<T>(15.0);
    }
    adaptive_step(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + adaptive_step(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// `<a1|E|a2>` for the POVM element `outcome` of `model`.
pub fn povm_matrix_element<T: Real>(
    model: &DetectorModel<T>,
    outcome: &Outcome<T>,
    a1: C<T>,
    a2: C<T>,
) -> Result<C<T>> {
    match (model, outcome) {
        (DetectorModel::Pnr, Outcome::Count(n)) => Ok(count_element(*n, a1, a2)),
        (DetectorModel::Pnr, Outcome::Above(n)) => Ok(above_element(*n, a1, a2)),
        (DetectorModel::Threshold { eta, nu }, Outcome::NoClick) => {
            let w = ln_gram(a1, a2) + no_click_exponent(*eta, *nu, a1, a2);
            Ok(flush(w.exp()))
        }
        (DetectorModel::Threshold { eta, nu }, Outcome::Click) => {
            let w = no_click_exponent(*eta, *nu, a1, a2);
            let lg = ln_gram(a1, a2);
            let v = if w.norm() < T::one() {
                -(lg.exp() * expm1_c(w))
            } else {
                lg.exp() - (lg + w).exp()
            };
            Ok(flush(v))
        }
        (DetectorModel::Homodyne { angle }, Outcome::Bin { x, dx }) => Ok(flush(
            QuadratureProduct::new(*angle, a1, a2).density(*x) * *dx,
        )),
        (DetectorModel::Homodyne { angle }, Outcome::Window { lo, hi }) => {
            if !(lo <= hi) {
                return Err(invalid(model, outcome));
            }
            Ok(flush(
                QuadratureProduct::new(*angle, a1, a2).window(*lo, *hi),
            ))
        }
        (DetectorModel::Homodyne { angle }, Outcome::Outside { lo, hi }) => {
            if !(lo <= hi) {
                return Err(invalid(model, outcome));
            }
            let inside = QuadratureProduct::new(*angle, a1, a2).window(*lo, *hi);
            Ok(flush(gram_overlap(a1, a2) - inside))
        }
        _ => Err(invalid(model, outcome)),
    }
}

/// `sum_{k > n} <a1|k><k|a2>`. Summed term by term once the terms decrease,
/// so tiny tails keep their relative precision.
fn above_element<T: Real>(n: usize, a1: C<T>, a2: C<T>) -> C<T> {
    let z = a1.conj() * a2;
    if z.norm() >= lit::<T>((n + 1) as f64) {
        let mut acc = gram_overlap(a1, a2);
        for k in 0..=n {
            acc -= count_element(k, a1, a2);
        }
        return acc;
    }
    let mut term = count_element(n + 1, a1, a2);
    let mut acc = term;
    let mut k = n + 1;
    while term.norm() > acc.norm() * lit(1e-18) {
        k += 1;
        term = term * z / lit::<T>(k as f64);
        acc += term;
    }
    acc
}

/// Enumeration cutoff for counting outcomes at mean photon number `mean`.
///
/// The lumped tail above the cutoff is kept below `PNR_TAIL_TOLERANCE * min(1, mean)`,
/// i.e. negligible relative to the probability of any click.
pub fn pnr_enumeration_cutoff<T: Real>(mean: T) -> usize {
    pnr_cutoff(mean, lit::<T>(PNR_TAIL_TOLERANCE) * mean.min(T::one()))
}

/// Smallest `n` such that the Poisson tail `P(N > n)` for mean `mean` is below `tol`.
///
/// Uses the bound `P(N > n) <= p(n+1) / (1 - mean/(n+2))` once `n + 2 > mean`.
pub fn pnr_cutoff<T: Real>(mean: T, tol: T) -> usize {
    if mean <= T::zero() {
        return 0;
    }
    let ln_mean = mean.ln();
    let mut n = 0usize;
    loop {
        let k = n + 1;
        let ln_p = -mean + ln_mean * lit(k as f64) - ln_factorial::<T>(k);
        let ratio = mean / lit((n + 2) as f64);
        if ratio < T::one() {
            let bound = ln_p.exp() / (T::one() - ratio);
            if bound < tol {
                return n;
            }
        }
        n += 1;
    }
}

/// One measured mode: which detector and which outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMeasurement<T> {
    pub mode: String,
    pub model: DetectorModel<T>,
    pub outcome: Outcome<T>,
}

impl<T: Real> ModeMeasurement<T> {
    pub fn new(mode: &str, model: DetectorModel<T>, outcome: Outcome<T>) -> Self {
        Self {
            mode: mode.to_string(),
            model,
            outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord<T> {
    pub outcomes: Vec<(String, Outcome<T>)>,
    /// Outcome probability; equals `raw_weight` for a normalised input state.
    pub probability: T,
    pub raw_weight: T,
    pub conditional_state: QubitPairDensity<T>,
}

/// Unnormalised post-measurement memory state `Tr_modes[(E (x) 1) |psi><psi|]`.
pub fn measure_weight<T: Real>(
    state: &BranchState<T>,
    assignments: &[ModeMeasurement<T>],
    traced: &[&str],
) -> Result<QubitPairDensity<T>> {
    let mut factor: Vec<Option<&ModeMeasurement<T>>> = vec![None; state.modes().len()];
    let mut covered = vec![false; state.modes().len()];
    for a in assignments {
        let k = state.mode_index(&a.mode)?;
        factor[k] = Some(a);
        covered[k] = true;
    }
    for t in traced {
        covered[state.mode_index(t)?] = true;
    }
    if let Some(k) = covered.iter().position(|c| !c) {
        return Err(Error::IncompleteCoverage(state.modes()[k].clone()));
    }
    state.pair_density_with(|k, aj, ai| match factor[k] {
        Some(m) => povm_matrix_element(&m.model, &m.outcome, aj, ai),
        None => Ok(gram_overlap(aj, ai)),
    })
}

/// Conditions `state` on the given outcomes, tracing the remaining modes.
pub fn measure_modes<T: Real>(
    state: &BranchState<T>,
    assignments: &[ModeMeasurement<T>],
    traced: &[&str],
) -> Result<OutcomeRecord<T>> {
    let raw = measure_weight(state, assignments, traced)?;
    let raw_weight = raw.trace();
    let norm = state.norm_sqr();
    if !(raw_weight > T::zero()) {
        return Err(Error::ZeroProbability);
    }
    Ok(OutcomeRecord {
        outcomes: assignments
            .iter()
            .map(|a| (a.mode.clone(), a.outcome))
            .collect(),
        probability: raw_weight / norm,
        raw_weight,
        conditional_state: raw.normalized()?,
    })
}
