//! Truncated Fock-space simulation of the two-probe protocol.
//!
//! Shares nothing with the branch representation: states are dense
//! amplitude tensors over `(memory A, memory B) x n_probe x n_env x n_bob`,
//! optical elements are matrix exponentials of their generators, and
//! detectors are diagonal number-basis POVMs. It is slow and only valid for
//! small amplitudes, which is exactly what an oracle needs to be.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::density::QubitPairDensity;
use crate::detectors::{DetectorModel, Outcome};
use crate::error::{Error, Result};
use crate::params::ProtocolParams;
use crate::protocols::{JointDetector, ProtocolResult};

/// Largest acceptable norm deficit of the truncated joint state.
pub const DEFICIT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub n_max: usize,
    pub amplitudes: Vec<C64>,
}

impl FockVector {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `e^{-|alpha|^2/2} alpha^n / sqrt(n!)` for `n = 0..=n_max`.
pub fn coherent_to_fock(alpha: C64, n_max: usize) -> Result<FockVector> {
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    if a.re == 0.0 && alpha.norm_sqr() > 0.0 {
        return Err(Error::NonFinite("coherent vacuum amplitude underflow"));
    }
    amplitudes.push(a);
    for n in 1..=n_max {
        a = a * alpha / (n as f64).sqrt();
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite("coherent amplitude overflow"));
        }
        amplitudes.push(a);
    }
    Ok(FockVector { n_max, amplitudes })
}

/// Poisson probability `P(N > n_max)` for mean `mean`, summed term by term.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let mut p = (-mean).exp();
    for k in 1..=n_max + 1 {
        p *= mean / k as f64;
    }
    let mut tail = 0.0;
    let mut k = n_max + 1;
    while p > tail * 1e-18 && p > 0.0 {
        tail += p;
        k += 1;
        p *= mean / k as f64;
    }
    tail
}

/// Number-basis weights `w_m` of a diagonal POVM element.
pub fn diagonal_povm(
    model: &DetectorModel<f64>,
    outcome: &Outcome<f64>,
    n_max: usize,
) -> Result<Vec<f64>> {
    let w: Vec<f64> = match (model, outcome) {
        (DetectorModel::Pnr, Outcome::Count(n)) => (0..=n_max)
            .map(|m| if m == *n { 1.0 } else { 0.0 })
            .collect(),
        (DetectorModel::Pnr, Outcome::Above(n)) => (0..=n_max)
            .map(|m| if m > *n { 1.0 } else { 0.0 })
            .collect(),
        (DetectorModel::Threshold { eta, nu }, Outcome::NoClick) => (0..=n_max)
            .map(|m| (-nu).exp() * (1.0 - eta).powi(m as i32))
            .collect(),
        (DetectorModel::Threshold { eta, nu }, Outcome::Click) => (0..=n_max)
            .map(|m| 1.0 - (-nu).exp() * (1.0 - eta).powi(m as i32))
            .collect(),
        _ => {
            return Err(Error::InvalidOutcome {
                detector: model.to_string(),
                outcome: outcome.to_string(),
            })
        }
    };
    Ok(w)
}

/// `<a1|E|a2>` by explicit summation over number states.
pub fn povm_element_series(
    model: &DetectorModel<f64>,
    outcome: &Outcome<f64>,
    a1: C64,
    a2: C64,
    n_max: usize,
) -> Result<C64> {
    let w = diagonal_povm(model, outcome, n_max)?;
    let f1 = coherent_to_fock(a1, n_max)?;
    let f2 = coherent_to_fock(a2, n_max)?;
    Ok(f1
        .amplitudes
        .iter()
        .zip(&f2.amplitudes)
        .zip(&w)
        .map(|((x, y), w)| x.conj() * y * *w)
        .sum())
}

/// Dense state over two memories and three optical modes.
#[derive(Debug, Clone)]
pub struct FockState {
    dim: usize,
    data: Vec<C64>,
}

impl FockState {
    fn index(&self, q: usize, n: [usize; 3]) -> usize {
        ((q * self.dim + n[0]) * self.dim + n[1]) * self.dim + n[2]
    }

    /// Product of a two-memory vector and three single-mode vectors.
    pub fn product(memories: [C64; 4], modes: [&FockVector; 3]) -> Self {
        let dim = modes[0].n_max + 1;
        assert!(modes.iter().all(|m| m.n_max + 1 == dim));
        let mut data = vec![C64::new(0.0, 0.0); 4 * dim * dim * dim];
        let mut i = 0;
        for q in memories {
            for a in &modes[0].amplitudes {
                for b in &modes[1].amplitudes {
                    for c in &modes[2].amplitudes {
                        data[i] = q * a * b * c;
                        i += 1;
                    }
                }
            }
        }
        Self { dim, data }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    fn for_each_index(&self, mut f: impl FnMut(usize, [usize; 3], usize)) {
        for q in 0..4 {
            for n0 in 0..self.dim {
                for n1 in 0..self.dim {
                    for n2 in 0..self.dim {
                        let n = [n0, n1, n2];
                        f(q, n, self.index(q, n));
                    }
                }
            }
        }
    }

    /// `exp(+/- i theta n/2)` on `mode`, sign set by the bit of `memory` (0 = A, 1 = B).
    pub fn controlled_rotation(&mut self, memory: usize, mode: usize, theta: f64) {
        let mut out = self.data.clone();
        self.for_each_index(|q, n, i| {
            let bit = if memory == 0 { q >> 1 } else { q & 1 };
            let s = if bit == 0 { 1.0 } else { -1.0 };
            out[i] = self.data[i] * C64::from_polar(1.0, s * theta * n[mode] as f64 / 2.0);
        });
        self.data = out;
    }

    /// `exp(i pi n)` on `mode`.
    pub fn parity_phase(&mut self, mode: usize) {
        let mut out = self.data.clone();
        self.for_each_index(|_, n, i| {
            if n[mode] % 2 == 1 {
                out[i] = -self.data[i];
            }
        });
        self.data = out;
    }

    /// Applies `U` to `mode` along its number index.
    fn single_mode(&mut self, mode: usize, u: &DMatrix<C64>) {
        let mut out = vec![C64::new(0.0, 0.0); self.data.len()];
        self.for_each_index(|q, n, i| {
            let v = self.data[i];
            if v.norm_sqr() == 0.0 {
                return;
            }
            for m in 0..self.dim {
                let mut t = n;
                t[mode] = m;
                out[self.index(q, t)] += u[(m, n[mode])] * v;
            }
        });
        self.data = out;
    }

    /// `D(gamma) = exp(gamma a^dag - conj(gamma) a)` on `mode`.
    pub fn displace(&mut self, mode: usize, gamma: C64) {
        let d = self.dim;
        let mut g = DMatrix::<C64>::zeros(d, d);
        for n in 0..d - 1 {
            let s = ((n + 1) as f64).sqrt();
            g[(n + 1, n)] += gamma * s;
            g[(n, n + 1)] -= gamma.conj() * s;
        }
        self.single_mode(mode, &g.exp());
    }

    /// `exp(phi (a_i^dag a_j - a_i a_j^dag))`, mapping coherent inputs
    /// `(x, y) -> (x cos phi + y sin phi, y cos phi - x sin phi)`.
    ///
    /// Applied block by block in total photon number.
    pub fn beam_splitter(&mut self, mode_i: usize, mode_j: usize, phi: f64) {
        let d = self.dim;
        let other = 3 - mode_i - mode_j;
        let mut out = vec![C64::new(0.0, 0.0); self.data.len()];
        for total in 0..=2 * (d - 1) {
            let k_lo = total.saturating_sub(d - 1);
            let k_hi = total.min(d - 1);
            let size = k_hi - k_lo + 1;
            let mut g = DMatrix::<C64>::zeros(size, size);
            for (r, k) in (k_lo..=k_hi).enumerate() {
                let rest = total - k;
                if k < k_hi {
                    // a_i^dag a_j |k, rest> = sqrt(k+1) sqrt(rest) |k+1, rest-1>
                    g[(r + 1, r)] += C64::new(phi * (((k + 1) * rest) as f64).sqrt(), 0.0);
                }
                if k > k_lo {
                    // -a_i a_j^dag |k, rest> = -sqrt(k) sqrt(rest+1) |k-1, rest+1>
                    g[(r - 1, r)] -= C64::new(phi * ((k * (rest + 1)) as f64).sqrt(), 0.0);
                }
            }
            let u = g.exp();
            for q in 0..4 {
                for m in 0..d {
                    let at = |k: usize| {
                        let mut n = [0; 3];
                        n[mode_i] = k;
                        n[mode_j] = total - k;
                        n[other] = m;
                        n
                    };
                    let input: Vec<C64> = (k_lo..=k_hi)
                        .map(|k| self.data[self.index(q, at(k))])
                        .collect();
                    if input.iter().all(|v| v.norm_sqr() == 0.0) {
                        continue;
                    }
                    for (r, k) in (k_lo..=k_hi).enumerate() {
                        let mut acc = C64::new(0.0, 0.0);
                        for (c, v) in input.iter().enumerate() {
                            acc += u[(r, c)] * v;
                        }
                        let idx = self.index(q, at(k));
                        out[idx] += acc;
                    }
                }
            }
        }
        self.data = out;
    }

    /// `M[q][q'][n_i][n_j] = sum_{n_traced} psi[q, n] conj(psi[q', n])`.
    fn marginal(&self, mode_i: usize, mode_j: usize) -> Vec<C64> {
        let d = self.dim;
        let traced = 3 - mode_i - mode_j;
        let mut m = vec![C64::new(0.0, 0.0); 16 * d * d];
        for q in 0..4 {
            for qp in 0..4 {
                for ni in 0..d {
                    for nj in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for nt in 0..d {
                            let mut n = [0; 3];
                            n[mode_i] = ni;
                            n[mode_j] = nj;
                            n[traced] = nt;
                            acc +=
                                self.data[self.index(q, n)] * self.data[self.index(qp, n)].conj();
                        }
                        m[((q * 4 + qp) * d + ni) * d + nj] = acc;
                    }
                }
            }
        }
        m
    }
}

/// Mode slots of the dense protocol state.
const PROBE: usize = 0;
const ENV: usize = 1;
const BOB: usize = 2;

/// Builds the two-probe total state in Fock space.
pub fn two_probe_fock_state(p: &ProtocolParams<f64>, n_max: usize) -> Result<FockState> {
    let t = p.transmittance();
    let alice = coherent_to_fock(C64::new(p.alpha, 0.0), n_max)?;
    let vacuum = coherent_to_fock(C64::new(0.0, 0.0), n_max)?;
    let bob = coherent_to_fock(C64::new(t.sqrt() * p.alpha, 0.0), n_max)?;
    for (v, mean) in [(&alice, p.alpha * p.alpha), (&bob, t * p.alpha * p.alpha)] {
        let deficit = 1.0 - v.norm_sqr();
        if deficit > DEFICIT_TOLERANCE {
            return Err(Error::CutoffInadequate { n_max, deficit });
        }
        debug_assert!(deficit <= poisson_tail(mean, n_max) + 1e-14);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pa = p.xi() + p.zeta();
    let pb = p.zeta();
    let a = [C64::from_polar(h, -pa), C64::from_polar(h, pa)];
    let b = [C64::from_polar(h, -pb), C64::from_polar(h, pb)];
    let memories = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
    let mut s = FockState::product(memories, [&alice, &vacuum, &bob]);
    s.controlled_rotation(0, PROBE, p.theta);
    s.beam_splitter(PROBE, ENV, -t.sqrt().acos());
    s.controlled_rotation(1, BOB, p.theta);
    // D(g) on the sum port equals D(g/sqrt2) on both inputs ahead of the
    // beam splitter; displacing first keeps photon numbers far from n_max.
    let shift = C64::new(-t.sqrt() * p.alpha * (p.theta / 2.0).cos(), 0.0);
    s.displace(PROBE, shift);
    s.displace(BOB, shift);
    // (g1, g2) -> ((g1 - g2)/sqrt2, (g1 + g2)/sqrt2), then flip the sign of the first port.
    s.beam_splitter(PROBE, BOB, -std::f64::consts::FRAC_PI_4);
    s.parity_phase(PROBE);
    let deficit = 1.0 - s.norm_sqr();
    if deficit.abs() > DEFICIT_TOLERANCE {
        return Err(Error::CutoffInadequate { n_max, deficit });
    }
    Ok(s)
}

/// [`JointDetector`] backed by the dense Fock state.
pub struct FockDetection {
    n_max: usize,
    models: (DetectorModel<f64>, DetectorModel<f64>),
    marginal: Vec<C64>,
    norm: f64,
}

impl FockDetection {
    pub fn new(state: &FockState, d1: DetectorModel<f64>, d2: DetectorModel<f64>) -> Self {
        Self {
            n_max: state.dim - 1,
            models: (d1, d2),
            marginal: state.marginal(PROBE, BOB),
            norm: state.norm_sqr(),
        }
    }
}

impl JointDetector<f64> for FockDetection {
    fn models(&self) -> (DetectorModel<f64>, DetectorModel<f64>) {
        self.models
    }

    fn joint_weight(&self, o1: &Outcome<f64>, o2: &Outcome<f64>) -> Result<QubitPairDensity<f64>> {
        let d = self.n_max + 1;
        let w1 = diagonal_povm(&self.models.0, o1, self.n_max)?;
        let w2 = diagonal_povm(&self.models.1, o2, self.n_max)?;
        let mut rho = QubitPairDensity::zero();
        for q in 0..4 {
            for qp in 0..4 {
                let base = (q * 4 + qp) * d * d;
                let mut acc = C64::new(0.0, 0.0);
                for (ni, a) in w1.iter().enumerate() {
                    if *a == 0.0 {
                        continue;
                    }
                    for (nj, b) in w2.iter().enumerate() {
                        acc += self.marginal[base + ni * d + nj] * (a * b);
                    }
                }
                rho.m[q][qp] = acc;
            }
        }
        Ok(rho)
    }

    fn photon_cutoff(&self, _index: usize) -> usize {
        self.n_max - 1
    }

    fn norm_sqr(&self) -> f64 {
        self.norm
    }
}

/// Runs the two-probe protocol in truncated Fock space with the same
/// detector on both ports.
pub fn run_protocol_fock(
    p: &ProtocolParams<f64>,
    detector: &DetectorModel<f64>,
    n_max: usize,
) -> Result<ProtocolResult<f64>> {
    if matches!(detector, DetectorModel::Homodyne { .. }) {
        return Err(Error::UnsupportedDetector(detector.to_string()));
    }
    let state = two_probe_fock_state(p, n_max)?;
    crate::protocols::run_two_detector(&FockDetection::new(&state, *detector, *detector))
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 24;

    fn single(mode_amps: [C64; 3]) -> FockState {
        let v: Vec<FockVector> = mode_amps
            .iter()
            .map(|a| coherent_to_fock(*a, N).unwrap())
            .collect();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        FockState::product([one, zero, zero, zero], [&v[0], &v[1], &v[2]])
    }

    fn overlap(a: &FockState, b: &FockState) -> C64 {
        a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn vacuum_vector() {
        let v = coherent_to_fock(C64::new(0.0, 0.0), 5).unwrap();
        assert_eq!(v.amplitudes[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn unit_mean_normalised_at_thirty() {
        let v = coherent_to_fock(C64::new(0.6, 0.8), 30).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(poisson_tail(1.0, 30) < 1e-12);
    }

    #[test]
    fn opposite_amplitude_parity() {
        let b = C64::new(0.3, 1.4);
        let p = coherent_to_fock(b, 20).unwrap();
        let m = coherent_to_fock(-b, 20).unwrap();
        for (n, (x, y)) in p.amplitudes.iter().zip(&m.amplitudes).enumerate() {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x - y * s).norm() < 1e-15);
        }
    }

    #[test]
    fn extreme_amplitude_reported() {
        assert!(coherent_to_fock(C64::new(60.0, 0.0), 10).is_err());
    }

    #[test]
    fn beam_splitter_maps_coherent_inputs() {
        let (x, y) = (C64::new(0.7, 0.2), C64::new(-0.4, 0.5));
        let phi: f64 = 0.6;
        let mut s = single([x, C64::new(0.0, 0.0), y]);
        s.beam_splitter(PROBE, BOB, phi);
        let want = single([
            x * phi.cos() + y * phi.sin(),
            C64::new(0.0, 0.0),
            y * phi.cos() - x * phi.sin(),
        ]);
        assert!((overlap(&want, &s) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn loss_as_beam_splitter() {
        let a = C64::new(1.5, 0.0);
        let t: f64 = 0.7;
        let mut s = single([a, C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        s.beam_splitter(PROBE, ENV, -t.sqrt().acos());
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let want = single([a * t.sqrt(), a * (1.0 - t).sqrt(), C64::new(0.0, 0.0)]);
        assert!((overlap(&want, &s) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn displacement_phase_convention() {
        // D(g)|a> = exp(i Im(g conj a)) |a + g>
        let (a, g) = (C64::new(0.5, 0.4), C64::new(-0.3, 0.9));
        let mut s = single([C64::new(0.0, 0.0), C64::new(0.0, 0.0), a]);
        s.displace(BOB, g);
        let want = single([C64::new(0.0, 0.0), C64::new(0.0, 0.0), a + g]);
        let phase = C64::from_polar(1.0, (g * a.conj()).im);
        assert!((overlap(&want, &s) - phase).norm() < 1e-10);
    }

    #[test]
    fn series_matches_threshold_closed_form() {
        let m = DetectorModel::threshold(0.89, 1.4e-6).unwrap();
        let (a1, a2) = (C64::new(0.8, -0.3), C64::new(-0.2, 0.6));
        let s = povm_element_series(&m, &Outcome::Click, a1, a2, 40).unwrap();
        let c = crate::detectors::povm_matrix_element(&m, &Outcome::Click, a1, a2).unwrap();
        assert!((s - c).norm() < 1e-12);
    }

    #[test]
    fn zero_amplitude_fails_always() {
        let p = ProtocolParams::new(0.0, 1.0, 5.0, 25.0).unwrap();
        let r = run_protocol_fock(&p, &DetectorModel::Pnr, 12).unwrap();
        assert_eq!(r.success_probability, 0.0);
    }

    #[test]
    fn inadequate_cutoff_reported() {
        let p = ProtocolParams::new(4.0, 1.0, 5.0, 25.0).unwrap();
        assert!(matches!(
            run_protocol_fock(&p, &DetectorModel::Pnr, 8),
            Err(Error::CutoffInadequate { .. })
        ));
    }

    #[test]
    fn agrees_with_branch_simulation() {
        let p = ProtocolParams::new(1.8, 1.1, 6.0, 25.0).unwrap();
        for det in [
            DetectorModel::Pnr,
            DetectorModel::threshold(0.89, 1.4e-6).unwrap(),
        ] {
            let f = run_protocol_fock(&p, &det, 40).unwrap();
            let b = crate::protocols::run_new_protocol(&p, &det, &det).unwrap();
            assert!((f.success_probability - b.success_probability).abs() < 1e-9);
            assert!((f.fidelity - b.fidelity).abs() < 1e-9);
            let mut matched = 0;
            for e in &f.outcomes {
                if let Some(o) = b.outcomes.iter().find(|o| o.outcomes == e.outcomes) {
                    assert!(
                        (e.probability - o.probability).abs() < 1e-10,
                        "{:?}",
                        e.outcomes
                    );
                    if e.probability > 1e-6 {
                        let d = e
                            .conditional_state
                            .as_ref()
                            .unwrap()
                            .max_abs_diff(o.conditional_state.as_ref().unwrap());
                        assert!(d < 1e-8, "{:?}: {d}", e.outcomes);
                    }
                    matched += 1;
                }
            }
            assert!(matched >= 4);
        }
    }
}
