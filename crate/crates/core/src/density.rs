//! Two-qubit density matrices over the memories A and B, Bell-basis views
//! and the local corrections applied after heralding.
//!
//! Basis order is `|00>, |01>, |10>, |11>` with the first bit belonging to A.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

type C<T> = Complex<T>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairDensity<T> {
    pub m: [[C<T>; 4]; 4],
}

/// Bell states in the order Phi+, Phi-, Psi+, Psi-.
///
/// Phi(+/-) = (|00> +/- |11>)/sqrt2, Psi(+/-) = (|10> +/- |01>)/sqrt2.
pub fn bell_vectors<T: Real>() -> [[C<T>; 4]; 4] {
    let h = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let r = |x: T| C::new(x, z);
    [
        [r(h), r(z), r(z), r(h)],
        [r(h), r(z), r(z), r(-h)],
        [r(z), r(h), r(h), r(z)],
        [r(z), r(-h), r(h), r(z)],
    ]
}

impl<T: Real> QubitPairDensity<T> {
    pub fn zero() -> Self {
        Self {
            m: [[C::new(T::zero(), T::zero()); 4]; 4],
        }
    }

    /// `|v><v|` for an (unnormalised) vector.
    pub fn from_pure(v: &[C<T>; 4]) -> Self {
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.m[i][j] = v[i] * v[j].conj();
            }
        }
        out
    }

    pub fn diagonal(d: [T; 4]) -> Self {
        let mut out = Self::zero();
        for (i, x) in d.into_iter().enumerate() {
            out.m[i][i] = C::new(x, T::zero());
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..4).fold(T::zero(), |acc, i| acc + self.m[i][i].re)
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    /// Returns `rho / tr(rho)`; zero-trace input is an impossible outcome.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > T::zero()) {
            return Err(Error::ZeroProbability);
        }
        Ok(self.scaled(T::one() / t))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut d = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        d
    }

    pub fn hermiticity_defect(&self) -> T {
        let mut d = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                d = d.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        d
    }

    pub fn conjugate_by(&self, u: &[[C<T>; 4]; 4]) -> Self {
        let mut tmp = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = C::new(T::zero(), T::zero());
                for k in 0..4 {
                    acc += u[i][k] * self.m[k][j];
                }
                tmp.m[i][j] = acc;
            }
        }
        let mut out = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = C::new(T::zero(), T::zero());
                for k in 0..4 {
                    acc += tmp.m[i][k] * u[j][k].conj();
                }
                out.m[i][j] = acc;
            }
        }
        out
    }

    /// Matrix in the Bell basis (Phi+, Phi-, Psi+, Psi-).
    pub fn bell_matrix(&self) -> [[C<T>; 4]; 4] {
        let b = bell_vectors::<T>();
        let mut out = [[C::new(T::zero(), T::zero()); 4]; 4];
        for (p, bp) in b.iter().enumerate() {
            for (q, bq) in b.iter().enumerate() {
                let mut acc = C::new(T::zero(), T::zero());
                for i in 0..4 {
                    for j in 0..4 {
                        acc += bp[i].conj() * self.m[i][j] * bq[j];
                    }
                }
                out[p][q] = acc;
            }
        }
        out
    }

    /// `<v|rho|v>` for a normalised vector.
    pub fn expectation(&self, v: &[C<T>; 4]) -> T {
        let mut acc = C::new(T::zero(), T::zero());
        for i in 0..4 {
            for j in 0..4 {
                acc += v[i].conj() * self.m[i][j] * v[j];
            }
        }
        acc.re
    }

    /// Phase-flip channel on memory A: `q rho + (1 - q) Z_A rho Z_A`.
    pub fn phase_flip_channel(&self, q: T) -> Result<Self> {
        if !(q >= T::zero() && q <= T::one()) {
            return Err(Error::OutOfRange {
                name: "q",
                value: q.to_f64().unwrap_or(f64::NAN),
            });
        }
        let sign = |i: usize| if i < 2 { T::one() } else { -T::one() };
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                let f = q + (T::one() - q) * sign(i) * sign(j);
                out.m[i][j] = self.m[i][j] * f;
            }
        }
        Ok(out)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    ///
    /// The 4x4 complex matrix is embedded as the 8x8 real symmetric matrix
    /// `[[Re, -Im], [Im, Re]]` whose spectrum repeats each eigenvalue twice.
    pub fn eigenvalues(&self) -> [T; 4] {
        let mut a = [[T::zero(); 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                let h = (self.m[i][j] + self.m[j][i].conj()) * lit::<T>(0.5);
                a[i][j] = h.re;
                a[i + 4][j + 4] = h.re;
                a[i][j + 4] = -h.im;
                a[i + 4][j] = h.im;
            }
        }
        let mut ev = jacobi_eigenvalues(a).to_vec();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        [ev[0], ev[2], ev[4], ev[6]]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }
}

impl<T: Real> Add for QubitPairDensity<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Real> Mul<T> for QubitPairDensity<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scaled(rhs)
    }
}

fn jacobi_eigenvalues<T: Real>(mut a: [[T; 8]; 8]) -> [T; 8] {
    const N: usize = 8;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..N {
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off <= T::min_positive_value() {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (lit::<T>(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut out = [T::zero(); 8];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][i];
    }
    out
}

/// Diagonal of a two-qubit state in the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellWeights<T> {
    pub phi_plus: T,
    pub phi_minus: T,
    pub psi_plus: T,
    pub psi_minus: T,
    /// Largest off-diagonal magnitude in the Bell basis.
    pub max_off_diagonal: T,
}

impl<T: Real> BellWeights<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.phi_plus, self.phi_minus, self.psi_plus, self.psi_minus]
    }

    pub fn sum(&self) -> T {
        self.phi_plus + self.phi_minus + self.psi_plus + self.psi_minus
    }

    /// Number of components other than Phi+ with weight above `threshold`.
    pub fn error_types(&self, threshold: T) -> usize {
        [self.phi_minus, self.psi_plus, self.psi_minus]
            .iter()
            .filter(|w| **w > threshold)
            .count()
    }

    /// Largest Bell weight, i.e. the fidelity to the nearest Bell state.
    pub fn max_weight(&self) -> T {
        self.as_array().into_iter().fold(T::zero(), T::max)
    }
}

/// Bell-basis weights of a normalised state.
pub fn bell_weights<T: Real>(rho: &QubitPairDensity<T>) -> Result<BellWeights<T>> {
    let tr = rho.trace();
    if (tr - T::one()).abs() > lit(1e-8) {
        return Err(Error::NotNormalized(tr.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(bell_weights_unchecked(rho))
}

pub(crate) fn bell_weights_unchecked<T: Real>(rho: &QubitPairDensity<T>) -> BellWeights<T> {
    let b = rho.bell_matrix();
    let mut off = T::zero();
    for (p, row) in b.iter().enumerate() {
        for (q, z) in row.iter().enumerate() {
            if p != q {
                off = off.max(z.norm());
            }
        }
    }
    BellWeights {
        phi_plus: b[0][0].re,
        phi_minus: b[1][1].re,
        psi_plus: b[2][2].re,
        psi_minus: b[3][3].re,
        max_off_diagonal: off,
    }
}

/// Local unitary `Z_A^z (x) P_B(phase) X_B^x` applied after heralding,
/// with `P(phase) = diag(1, e^{i phase})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCorrection<T> {
    pub z_a: bool,
    pub x_b: bool,
    pub phase_b: T,
}

impl<T: Real> LocalCorrection<T> {
    pub fn identity() -> Self {
        Self {
            z_a: false,
            x_b: false,
            phase_b: T::zero(),
        }
    }

    pub fn pauli(z_a: bool, x_b: bool) -> Self {
        Self {
            z_a,
            x_b,
            phase_b: T::zero(),
        }
    }

    pub fn unitary(&self) -> [[C<T>; 4]; 4] {
        let o = C::new(T::one(), T::zero());
        let z = C::new(T::zero(), T::zero());
        let ua = if self.z_a {
            [[o, z], [z, -o]]
        } else {
            [[o, z], [z, o]]
        };
        let x = if self.x_b {
            [[z, o], [o, z]]
        } else {
            [[o, z], [z, o]]
        };
        let ph = C::from_polar(T::one(), self.phase_b);
        let ub = [[x[0][0], x[0][1]], [ph * x[1][0], ph * x[1][1]]];
        let mut u = [[z; 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        u[2 * a + b][2 * a2 + b2] = ua[a][a2] * ub[b][b2];
                    }
                }
            }
        }
        u
    }

    pub fn apply(&self, rho: &QubitPairDensity<T>) -> QubitPairDensity<T> {
        rho.conjugate_by(&self.unitary())
    }

    /// Correction steering the dominant two-dimensional Bell block of `rho`
    /// onto Phi+: flip B when the Psi block dominates, then rotate B's phase
    /// so the |00><11| coherence becomes real and non-negative.
    pub fn aligning(rho: &QubitPairDensity<T>) -> Self {
        let phi_pop = rho.m[0][0].re + rho.m[3][3].re;
        let psi_pop = rho.m[1][1].re + rho.m[2][2].re;
        let x_b = psi_pop > phi_pop;
        let coh = if x_b { rho.m[1][2] } else { rho.m[0][3] };
        let phase_b = if coh.norm() > T::zero() {
            coh.arg()
        } else {
            T::zero()
        };
        Self {
            z_a: false,
            x_b,
            phase_b,
        }
    }
}

impl<T: Real> fmt::Display for LocalCorrection<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.z_a {
            parts.push("Z_A".to_string());
        }
        if self.phase_b != T::zero() {
            parts.push(format!("P_B({})", self.phase_b));
        }
        if self.x_b {
            parts.push("X_B".to_string());
        }
        if parts.is_empty() {
            write!(f, "I")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(i: usize) -> QubitPairDensity<f64> {
        QubitPairDensity::from_pure(&bell_vectors::<f64>()[i])
    }

    #[test]
    fn phi_plus_weights() {
        let w = bell_weights(&bell(0)).unwrap();
        assert!((w.phi_plus - 1.0).abs() < 1e-15);
        assert!(w.phi_minus.abs() < 1e-15 && w.psi_plus.abs() < 1e-15 && w.psi_minus.abs() < 1e-15);
        assert!(w.max_off_diagonal < 1e-15);
    }

    #[test]
    fn maximally_mixed_weights() {
        let w = bell_weights(&QubitPairDensity::diagonal([0.25_f64; 4])).unwrap();
        for x in w.as_array() {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_rejected() {
        let rho = QubitPairDensity::diagonal([0.5_f64, 0.0, 0.0, 0.0]);
        assert!(matches!(bell_weights(&rho), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn pauli_corrections_map_bell_states() {
        // Psi- -> Phi+ needs Z_A X_B, Psi+ -> X_B, Phi- -> Z_A.
        let cases = [
            (3, LocalCorrection::pauli(true, true)),
            (2, LocalCorrection::pauli(false, true)),
            (1, LocalCorrection::pauli(true, false)),
        ];
        for (src, c) in cases {
            let w = bell_weights(&c.apply(&bell(src))).unwrap();
            assert!((w.phi_plus - 1.0).abs() < 1e-14, "{src}: {w:?}");
        }
    }

    #[test]
    fn aligning_recovers_phi_plus_from_phased_psi() {
        let phi = 0.7_f64;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [
            C::new(0.0, 0.0),
            C::from_polar(h, phi),
            C::new(h, 0.0),
            C::new(0.0, 0.0),
        ];
        let rho = QubitPairDensity::from_pure(&v);
        let c = LocalCorrection::aligning(&rho);
        assert!(c.x_b);
        let w = bell_weights(&c.apply(&rho)).unwrap();
        assert!((w.phi_plus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_bell_mixture() {
        let rho = bell(0) * 0.7 + bell(3) * 0.3;
        let ev = rho.eigenvalues();
        let want = [0.0, 0.0, 0.3, 0.7];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn phase_flip_full_dephasing_kills_a_coherences() {
        let rho = bell(0).phase_flip_channel(0.5).unwrap();
        assert!(rho.m[0][3].norm() < 1e-16);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert_eq!(bell(0).phase_flip_channel(1.0).unwrap(), bell(0));
        assert!(bell(0).phase_flip_channel(1.5).is_err());
    }

    #[test]
    fn display_labels() {
        assert_eq!(LocalCorrection::<f64>::identity().to_string(), "I");
        assert_eq!(
            LocalCorrection::<f64>::pauli(true, true).to_string(),
            "Z_A X_B"
        );
    }
}
