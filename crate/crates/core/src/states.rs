//! Exact joint states of qubit memories and coherent optical modes.
//!
//! A [`BranchState`] is a finite superposition
//! `sum_k c_k |bits_k> (x) |gamma_k1> (x) ... (x) |gamma_kM>`
//! of memory bitstrings tensored with products of coherent states. Every
//! operation the protocols need (controlled phase rotation, loss, balanced
//! beam splitter, displacement) maps coherent states to coherent states, so
//! the branch count never grows and no photon-number truncation is needed.
//! Overlaps between branches are evaluated with the coherent-state Gram rule
//! [`gram_overlap`].

use num_complex::Complex;

use crate::density::QubitPairDensity;
use crate::error::{Error, Result};
use crate::scalar::{flush, lit, Real};

type C<T> = Complex<T>;

/// `<a1|a2>` for coherent states, i.e. `exp(-|a1|^2/2 - |a2|^2/2 + conj(a1) a2)`.
///
/// Evaluated as `exp(-|a1 - a2|^2 / 2 + i Im(conj(a1) a2))`, which is the same
/// number without cancelling large exponents for bright pulses.
pub fn gram_overlap<T: Real>(a1: C<T>, a2: C<T>) -> C<T> {
    let d = a1 - a2;
    let im = (a1.conj() * a2).im;
    flush(C::new(-d.norm_sqr() * lit(0.5), im).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<T> {
    pub coefficient: C<T>,
    pub bits: Vec<bool>,
    pub amplitudes: Vec<C<T>>,
}

/// Phase convention for [`BranchState::apply_displacement_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplacementPhase {
    /// `D(g)|a> = exp(i Im(g conj(a))) |a + g>`.
    #[default]
    Standard,
    /// Opposite sign of the tracked phase. Only useful as a negative control.
    Conjugated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchState<T> {
    memories: Vec<String>,
    modes: Vec<String>,
    branches: Vec<Branch<T>>,
}

impl<T: Real> BranchState<T> {
    /// Single memory in `(e^{-i phase}|0> + e^{i phase}|1>)/sqrt2`, no optical modes.
    pub fn prepare_memory(label: &str, phase: T) -> Result<Self> {
        if !phase.is_finite() {
            return Err(Error::NonFinite("memory phase"));
        }
        let h = T::FRAC_1_SQRT_2();
        let branch = |bit: bool, p: T| Branch {
            coefficient: C::from_polar(h, p),
            bits: vec![bit],
            amplitudes: vec![],
        };
        Ok(Self {
            memories: vec![label.to_string()],
            modes: vec![],
            branches: vec![branch(false, -phase), branch(true, phase)],
        })
    }

    /// Single memory in a computational basis state.
    pub fn basis_memory(label: &str, bit: bool) -> Self {
        Self {
            memories: vec![label.to_string()],
            modes: vec![],
            branches: vec![Branch {
                coefficient: C::new(T::one(), T::zero()),
                bits: vec![bit],
                amplitudes: vec![],
            }],
        }
    }

    pub fn from_parts(
        memories: Vec<String>,
        modes: Vec<String>,
        branches: Vec<Branch<T>>,
    ) -> Result<Self> {
        for b in &branches {
            if b.bits.len() != memories.len() || b.amplitudes.len() != modes.len() {
                return Err(Error::OutOfRange {
                    name: "branch shape",
                    value: b.bits.len() as f64,
                });
            }
            if !(b.coefficient.re.is_finite() && b.coefficient.im.is_finite())
                || b.amplitudes
                    .iter()
                    .any(|a| !(a.re.is_finite() && a.im.is_finite()))
            {
                return Err(Error::NonFinite("branch"));
            }
        }
        let s = Self {
            memories,
            modes,
            branches,
        };
        s.check_unique_labels()?;
        Ok(s)
    }

    fn check_unique_labels(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for l in self.memories.iter().chain(&self.modes) {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(())
    }

    pub fn memories(&self) -> &[String] {
        &self.memories
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn branches(&self) -> &[Branch<T>] {
        &self.branches
    }

    pub fn memory_index(&self, label: &str) -> Result<usize> {
        self.memories
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn has_label(&self, label: &str) -> bool {
        self.memories.iter().chain(&self.modes).any(|l| l == label)
    }

    /// Squared norm, summing Gram overlaps over branch pairs with equal bits.
    pub fn norm_sqr(&self) -> T {
        let mut acc = C::new(T::zero(), T::zero());
        for bi in &self.branches {
            for bj in &self.branches {
                if bi.bits != bj.bits {
                    continue;
                }
                let mut g = bi.coefficient.conj() * bj.coefficient;
                for (a, b) in bi.amplitudes.iter().zip(&bj.amplitudes) {
                    g *= gram_overlap(*a, *b);
                }
                acc += g;
            }
        }
        acc.re
    }

    /// Tensor product; labels of the two factors must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in other.memories.iter().chain(&other.modes) {
            if self.has_label(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut branches = Vec::with_capacity(self.branches.len() * other.branches.len());
        for a in &self.branches {
            for b in &other.branches {
                branches.push(Branch {
                    coefficient: a.coefficient * b.coefficient,
                    bits: a.bits.iter().chain(&b.bits).copied().collect(),
                    amplitudes: a.amplitudes.iter().chain(&b.amplitudes).copied().collect(),
                });
            }
        }
        let memories = self
            .memories
            .iter()
            .chain(&other.memories)
            .cloned()
            .collect();
        let modes = self.modes.iter().chain(&other.modes).cloned().collect();
        Ok(Self {
            memories,
            modes,
            branches,
        })
    }

    /// Tensors a coherent state `|amplitude>` onto every branch.
    pub fn attach_coherent_mode(&self, label: &str, amplitude: C<T>) -> Result<Self> {
        if self.has_label(label) {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::NonFinite("coherent amplitude"));
        }
        let mut out = self.clone();
        out.modes.push(label.to_string());
        for b in &mut out.branches {
            b.amplitudes.push(amplitude);
        }
        Ok(out)
    }

    pub fn rename_mode(&self, old: &str, new: &str) -> Result<Self> {
        let idx = self.mode_index(old)?;
        if old != new && self.has_label(new) {
            return Err(Error::DuplicateLabel(new.to_string()));
        }
        let mut out = self.clone();
        out.modes[idx] = new.to_string();
        Ok(out)
    }

    /// Memory-controlled phase rotation: the mode amplitude picks up
    /// `e^{+i theta/2}` when the memory bit is 0 and `e^{-i theta/2}` when it is 1.
    pub fn apply_controlled_rotation(&self, memory: &str, mode: &str, theta: T) -> Result<Self> {
        let mi = self.memory_index(memory)?;
        let ki = self.mode_index(mode)?;
        let half = theta * lit(0.5);
        let plus = C::from_polar(T::one(), half);
        let minus = C::from_polar(T::one(), -half);
        let mut out = self.clone();
        for b in &mut out.branches {
            let r = if b.bits[mi] { minus } else { plus };
            b.amplitudes[ki] *= r;
        }
        Ok(out)
    }

    /// Lossy channel as an isometry: `|g> -> |sqrt(T) g> (x) |sqrt(1-T) g>_env`.
    pub fn apply_loss(&self, mode: &str, env_label: &str, transmittance: T) -> Result<Self> {
        if !(transmittance >= T::zero() && transmittance <= T::one()) {
            return Err(Error::OutOfRange {
                name: "T",
                value: transmittance.to_f64().unwrap_or(f64::NAN),
            });
        }
        let ki = self.mode_index(mode)?;
        if self.has_label(env_label) {
            return Err(Error::DuplicateLabel(env_label.to_string()));
        }
        let st = transmittance.sqrt();
        let sl = (T::one() - transmittance).sqrt();
        let mut out = self.clone();
        out.modes.push(env_label.to_string());
        for b in &mut out.branches {
            let g = b.amplitudes[ki];
            b.amplitudes[ki] = g * st;
            b.amplitudes.push(g * sl);
        }
        Ok(out)
    }

    /// Balanced beam splitter `(g1, g2) -> ((g2 - g1)/sqrt2, (g2 + g1)/sqrt2)`.
    ///
    /// The difference port replaces `mode1`, the sum port replaces `mode2`.
    pub fn apply_beamsplitter_5050(&self, mode1: &str, mode2: &str) -> Result<Self> {
        if mode1 == mode2 {
            return Err(Error::IdenticalModes(mode1.to_string()));
        }
        let i = self.mode_index(mode1)?;
        let j = self.mode_index(mode2)?;
        let h = T::FRAC_1_SQRT_2();
        let mut out = self.clone();
        for b in &mut out.branches {
            let (g1, g2) = (b.amplitudes[i], b.amplitudes[j]);
            b.amplitudes[i] = (g2 - g1) * h;
            b.amplitudes[j] = (g2 + g1) * h;
        }
        Ok(out)
    }

    pub fn apply_displacement(&self, mode: &str, gamma: C<T>) -> Result<Self> {
        self.apply_displacement_with(mode, gamma, DisplacementPhase::Standard)
    }

    /// Phase-space displacement `D(gamma)` with an explicit phase convention.
    pub fn apply_displacement_with(
        &self,
        mode: &str,
        gamma: C<T>,
        convention: DisplacementPhase,
    ) -> Result<Self> {
        let ki = self.mode_index(mode)?;
        let sign = match convention {
            DisplacementPhase::Standard => T::one(),
            DisplacementPhase::Conjugated => -T::one(),
        };
        let mut out = self.clone();
        for b in &mut out.branches {
            let a = b.amplitudes[ki];
            let phase = (gamma * a.conj()).im * sign;
            b.coefficient *= C::from_polar(T::one(), phase);
            b.amplitudes[ki] = a + gamma;
        }
        Ok(out)
    }

    /// Scales every branch coefficient by `phase(bit pattern)`; used to build
    /// reference states with chosen relative phases.
    pub fn map_coefficients(&self, f: impl Fn(&[bool], C<T>) -> C<T>) -> Self {
        let mut out = self.clone();
        for b in &mut out.branches {
            b.coefficient = f(&b.bits, b.coefficient);
        }
        out
    }

    /// Drops optical modes whose amplitude is identical on every branch.
    ///
    /// Such a factor is a common coherent state and carries no correlation.
    pub fn drop_product_mode(&self, mode: &str) -> Result<Self> {
        let ki = self.mode_index(mode)?;
        let first = self.branches.first().map(|b| b.amplitudes[ki]);
        if let Some(a0) = first {
            if self.branches.iter().any(|b| b.amplitudes[ki] != a0) {
                return Err(Error::OutOfRange {
                    name: "mode is entangled with memories",
                    value: ki as f64,
                });
            }
        }
        let mut out = self.clone();
        out.modes.remove(ki);
        for b in &mut out.branches {
            b.amplitudes.remove(ki);
        }
        Ok(out)
    }

    /// Two-memory density matrix where each mode contributes a factor
    /// `element(mode_index, a_j, a_i)` between branches `i` (ket) and `j` (bra).
    ///
    /// Tracing a mode corresponds to `element = gram_overlap(a_j, a_i)`.
    pub(crate) fn pair_density_with(
        &self,
        mut element: impl FnMut(usize, C<T>, C<T>) -> Result<C<T>>,
    ) -> Result<QubitPairDensity<T>> {
        if self.memories.len() != 2 {
            return Err(Error::MemoryCount(self.memories.len()));
        }
        let idx = |b: &Branch<T>| 2 * usize::from(b.bits[0]) + usize::from(b.bits[1]);
        let mut rho = QubitPairDensity::zero();
        for bi in &self.branches {
            for bj in &self.branches {
                let mut w = bi.coefficient * bj.coefficient.conj();
                for (k, (ai, aj)) in bi.amplitudes.iter().zip(&bj.amplitudes).enumerate() {
                    if w.norm() == T::zero() {
                        break;
                    }
                    w *= element(k, *aj, *ai)?;
                }
                let (r, c) = (idx(bi), idx(bj));
                rho.m[r][c] += w;
            }
        }
        Ok(rho)
    }

    /// Partial trace over all optical modes onto the two memories.
    ///
    /// `traced` must name every remaining mode. The result is not normalised;
    /// its trace is the squared norm of the state.
    pub fn reduce_to_qubits(&self, traced: &[&str]) -> Result<QubitPairDensity<T>> {
        for t in traced {
            self.mode_index(t)?;
        }
        if let Some(m) = self.modes.iter().find(|m| !traced.contains(&m.as_str())) {
            return Err(Error::IncompleteCoverage(m.clone()));
        }
        self.pair_density_with(|_, a, b| Ok(gram_overlap(a, b)))
    }

    /// Traces the listed modes and keeps the rest, returning the operator in the
    /// frame of the surviving branch vectors.
    pub fn reduced_operator(&self, traced: &[&str]) -> Result<ReducedOperator<T>> {
        let mut traced_idx = Vec::new();
        for t in traced {
            traced_idx.push(self.mode_index(t)?);
        }
        let kept: Vec<usize> = (0..self.modes.len())
            .filter(|k| !traced_idx.contains(k))
            .collect();
        let n = self.branches.len();
        let mut kernel = vec![vec![C::new(T::zero(), T::zero()); n]; n];
        for (i, bi) in self.branches.iter().enumerate() {
            for (j, bj) in self.branches.iter().enumerate() {
                let mut w = bi.coefficient * bj.coefficient.conj();
                for &k in &traced_idx {
                    w *= gram_overlap(bj.amplitudes[k], bi.amplitudes[k]);
                }
                kernel[i][j] = w;
            }
        }
        Ok(ReducedOperator {
            memories: self.memories.clone(),
            kept_modes: kept.iter().map(|&k| self.modes[k].clone()).collect(),
            vectors: self
                .branches
                .iter()
                .map(|b| {
                    (
                        b.bits.clone(),
                        kept.iter().map(|&k| b.amplitudes[k]).collect(),
                    )
                })
                .collect(),
            kernel,
        })
    }
}

/// Mixed operator `sum_ij K_ij |w_i><w_j|` over the surviving branch vectors
/// `|w_i> = |bits_i> (x) |kept amplitudes_i>`.
///
/// When the bitstrings are pairwise distinct the vectors are orthonormal and
/// `K` is the matrix of the operator in that basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOperator<T> {
    pub memories: Vec<String>,
    pub kept_modes: Vec<String>,
    pub vectors: Vec<(Vec<bool>, Vec<C<T>>)>,
    pub kernel: Vec<Vec<C<T>>>,
}

impl<T: Real> ReducedOperator<T> {
    pub fn has_orthonormal_frame(&self) -> bool {
        let n = self.vectors.len();
        (0..n).all(|i| ((i + 1)..n).all(|j| self.vectors[i].0 != self.vectors[j].0))
    }

    /// Phase-flip channel on the memory at `memory`.
    pub fn phase_flip(&self, memory: usize, q: T) -> Result<Self> {
        if !(q >= T::zero() && q <= T::one()) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut out = self.clone();
        for i in 0..self.vectors.len() {
            for j in 0..self.vectors.len() {
                let same = self.vectors[i].0[memory] == self.vectors[j].0[memory];
                let f = if same { T::one() } else { q + q - T::one() };
                out.kernel[i][j] = self.kernel[i][j] * f;
            }
        }
        Ok(out)
    }

    /// Largest entry-wise difference; both operators must share their frame.
    pub fn max_abs_diff(&self, other: &Self) -> Option<T> {
        if self.vectors.len() != other.vectors.len() {
            return None;
        }
        let tol = lit::<T>(1e-12);
        for ((ba, aa), (bb, ab)) in self.vectors.iter().zip(&other.vectors) {
            if ba != bb
                || aa
                    .iter()
                    .zip(ab)
                    .any(|(x, y)| (*x - *y).norm() > tol * (T::one() + x.norm()))
            {
                return None;
            }
        }
        let mut d = T::zero();
        for (ra, rb) in self.kernel.iter().zip(&other.kernel) {
            for (x, y) in ra.iter().zip(rb) {
                d = d.max((*x - *y).norm());
            }
        }
        Some(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn prepare_memory_coefficients() {
        let s = BranchState::<f64>::prepare_memory("A", 0.0).unwrap();
        for b in s.branches() {
            assert!((b.coefficient - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
        let s = BranchState::<f64>::prepare_memory("A", PI / 2.0).unwrap();
        assert!((s.branches()[0].coefficient - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.branches()[1].coefficient - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(BranchState::<f64>::prepare_memory("A", f64::NAN).is_err());
    }

    #[test]
    fn attach_vacuum_and_duplicates() {
        let s = BranchState::<f64>::prepare_memory("A", 0.3).unwrap();
        let t = s.attach_coherent_mode("a", c(0.0, 0.0)).unwrap();
        assert!(t
            .branches()
            .iter()
            .all(|b| b.amplitudes == vec![c(0.0, 0.0)]));
        assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(
            t.attach_coherent_mode("a", c(1.0, 0.0)),
            Err(Error::DuplicateLabel("a".into()))
        );
        assert_eq!(
            t.attach_coherent_mode("A", c(1.0, 0.0)),
            Err(Error::DuplicateLabel("A".into()))
        );
    }

    #[test]
    fn controlled_rotation_by_pi() {
        let s = BranchState::<f64>::basis_memory("A", false)
            .attach_coherent_mode("a", c(1.0, 0.0))
            .unwrap()
            .apply_controlled_rotation("A", "a", PI)
            .unwrap();
        assert!((s.branches()[0].amplitudes[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(s.apply_controlled_rotation("B", "a", 0.1).is_err());
        assert!(s.apply_controlled_rotation("A", "x", 0.1).is_err());
    }

    #[test]
    fn controlled_rotation_zero_is_identity() {
        let s = BranchState::<f64>::prepare_memory("A", 0.2)
            .unwrap()
            .attach_coherent_mode("a", c(1.3, -0.4))
            .unwrap();
        assert_eq!(s.apply_controlled_rotation("A", "a", 0.0).unwrap(), s);
    }

    #[test]
    fn loss_examples() {
        let s = BranchState::<f64>::basis_memory("A", false)
            .attach_coherent_mode("a", c(2.0, 0.0))
            .unwrap();
        let t = s.apply_loss("a", "E", 0.25).unwrap();
        assert!((t.branches()[0].amplitudes[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((t.branches()[0].amplitudes[1] - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
        let full = s.apply_loss("a", "E", 1.0).unwrap();
        assert_eq!(full.branches()[0].amplitudes[1], c(0.0, 0.0));
        let none = s.apply_loss("a", "E", 0.0).unwrap();
        assert_eq!(none.branches()[0].amplitudes[0], c(0.0, 0.0));
        assert!(s.apply_loss("a", "E", 1.5).is_err());
        assert!(s.apply_loss("a", "E", -0.1).is_err());
    }

    #[test]
    fn beamsplitter_ports() {
        let g = c(0.7, 0.2);
        let s = BranchState::<f64>::basis_memory("A", false)
            .attach_coherent_mode("x", g)
            .unwrap()
            .attach_coherent_mode("y", g)
            .unwrap();
        let t = s.apply_beamsplitter_5050("x", "y").unwrap();
        assert!(t.branches()[0].amplitudes[0].norm() < 1e-15);
        assert!((t.branches()[0].amplitudes[1] - g * 2f64.sqrt()).norm() < 1e-15);

        let s2 = BranchState::<f64>::basis_memory("A", false)
            .attach_coherent_mode("x", g)
            .unwrap()
            .attach_coherent_mode("y", -g)
            .unwrap();
        let t2 = s2.apply_beamsplitter_5050("x", "y").unwrap();
        assert!((t2.branches()[0].amplitudes[0] + g * 2f64.sqrt()).norm() < 1e-15);
        assert!(t2.branches()[0].amplitudes[1].norm() < 1e-15);
        assert_eq!(
            s.apply_beamsplitter_5050("x", "x"),
            Err(Error::IdenticalModes("x".into()))
        );
    }

    #[test]
    fn displacement_on_vacuum_and_back() {
        let g = c(0.4, -1.1);
        let s = BranchState::<f64>::basis_memory("A", false)
            .attach_coherent_mode("m", c(0.0, 0.0))
            .unwrap();
        let d = s.apply_displacement("m", g).unwrap();
        assert_eq!(d.branches()[0].amplitudes[0], g);
        assert!((d.branches()[0].coefficient - c(1.0, 0.0)).norm() < 1e-15);
        let back = d.apply_displacement("m", -g).unwrap();
        assert!(back.branches()[0].amplitudes[0].norm() < 1e-15);
        assert!((back.branches()[0].coefficient - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.apply_displacement("q", g).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = c(1.2, -0.3);
        assert!((gram_overlap(g, g) - c(1.0, 0.0)).norm() < 1e-15);
        let v = gram_overlap(c(0.0, 0.0), g);
        assert!((v - c((-g.norm_sqr() / 2.0).exp(), 0.0)).norm() < 1e-15);
        // Direct formula as an independent route.
        let a = c(0.3, 0.8);
        let direct = (c(-(a.norm_sqr() + g.norm_sqr()) / 2.0, 0.0) + a.conj() * g).exp();
        assert!((gram_overlap(a, g) - direct).norm() < 1e-14);
    }

    #[test]
    fn gram_underflow_flushes() {
        assert_eq!(gram_overlap(c(0.0, 0.0), c(40.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn reduce_product_state() {
        let s = BranchState::<f64>::basis_memory("A", false)
            .tensor(&BranchState::basis_memory("B", false))
            .unwrap()
            .attach_coherent_mode("m", c(0.9, 0.1))
            .unwrap();
        let rho = s.reduce_to_qubits(&["m"]).unwrap();
        assert!(rho.max_abs_diff(&QubitPairDensity::diagonal([1.0, 0.0, 0.0, 0.0])) < 1e-15);
        assert!(matches!(
            s.reduce_to_qubits(&[]),
            Err(Error::IncompleteCoverage(_))
        ));
        let one = BranchState::<f64>::basis_memory("A", false);
        assert_eq!(one.reduce_to_qubits(&[]), Err(Error::MemoryCount(1)));
    }

    #[test]
    fn tensor_rejects_shared_labels() {
        let a = BranchState::<f64>::basis_memory("A", false);
        assert!(a.tensor(&a).is_err());
    }

    #[test]
    fn drop_product_mode_requires_common_amplitude() {
        let s = BranchState::<f64>::prepare_memory("A", 0.0)
            .unwrap()
            .attach_coherent_mode("m", c(1.0, 0.0))
            .unwrap();
        assert_eq!(s.drop_product_mode("m").unwrap().modes().len(), 0);
        let r = s.apply_controlled_rotation("A", "m", 0.3).unwrap();
        assert!(r.drop_product_mode("m").is_err());
    }
}
