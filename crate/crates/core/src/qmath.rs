//! Complex linear algebra for single-qubit SU(2) moves and two-qubit states,
//! plus seeded Haar sampling on SU(2).
//!
//! The computational basis is `|C> = |0>`, `|D> = |1>`. Two-qubit amplitudes are
//! stored in the order `CC, CD, DC, DD`; the first letter is player A's qubit.

use std::fmt;
use std::ops::{Mul, Neg};

use num_complex::Complex64;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for structural invariants (SU(2) membership, normalization).
pub const STRUCT_TOL: f64 = 1e-9;
/// Tolerance for algebraic identities checked in tests.
pub const ALG_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A 2x2 special unitary matrix: one player's deterministic move.
///
/// Entries satisfy `u11 = conj(u22)`, `u12 = -conj(u21)` and `det = 1` within
/// [`STRUCT_TOL`]. The constructor enforces this, so every value in circulation
/// is a valid SU(2) element.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[Complex64; 2]; 2]", into = "[[Complex64; 2]; 2]")]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    /// Builds a matrix from row-major entries, validating SU(2) structure.
    pub fn new(u11: Complex64, u12: Complex64, u21: Complex64, u22: Complex64) -> Result<Self> {
        let m = [[u11, u12], [u21, u22]];
        if !m.iter().flatten().all(|z| finite(*z)) {
            return Err(Error::NonFinite("matrix entry"));
        }
        let conj_diag = (u11 - u22.conj()).norm();
        let conj_off = (u12 + u21.conj()).norm();
        if conj_diag > STRUCT_TOL || conj_off > STRUCT_TOL {
            return Err(Error::NotSpecialUnitary(format!(
                "entries violate u11 = conj(u22), u12 = -conj(u21) (residuals {conj_diag:e}, {conj_off:e})"
            )));
        }
        let det = u11 * u22 - u12 * u21;
        if (det - ONE).norm() > STRUCT_TOL {
            return Err(Error::NotSpecialUnitary(format!(
                "determinant {} + {}i",
                det.re, det.im
            )));
        }
        Ok(Unitary2 { m })
    }

    /// Completes a top row `(a, b)` with `|a|^2 + |b|^2 = 1` to `[[a, b], [-conj(b), conj(a)]]`.
    pub fn from_top_row(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(a, b, -b.conj(), a.conj())
    }

    /// Maps a unit quaternion `(w, x, y, z)` to `[[w + ix, y + iz], [-y + iz, w - ix]]`.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        Self::from_top_row(Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3]))
    }

    /// Inverse of [`Unitary2::from_quaternion`].
    pub fn quaternion(&self) -> [f64; 4] {
        [self.m[0][0].re, self.m[0][0].im, self.m[0][1].re, self.m[0][1].im]
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn dagger(&self) -> Unitary2 {
        let m = self.m;
        Unitary2 {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    /// Matrix product `self * rhs`.
    pub fn mat_mul(&self, rhs: &Unitary2) -> Unitary2 {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Unitary2 { m }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Equality up to the SU(2) sign `U ~ -U`.
    pub fn approx_eq_up_to_sign(&self, other: &Unitary2, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol || self.max_abs_diff(&-*other) <= tol
    }
}

impl Default for Unitary2 {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        self.mat_mul(&rhs)
    }
}

impl Neg for Unitary2 {
    type Output = Unitary2;

    fn neg(self) -> Unitary2 {
        let m = self.m;
        Unitary2 {
            m: [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]],
        }
    }
}

impl TryFrom<[[Complex64; 2]; 2]> for Unitary2 {
    type Error = Error;

    fn try_from(m: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Unitary2> for [[Complex64; 2]; 2] {
    fn from(u: Unitary2) -> Self {
        u.m
    }
}

impl fmt::Debug for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary2{:?}", self.m)
    }
}

/// Formats as the top-row literal `su2(re, im, re, im)`, which the strategy
/// parser reads back exactly.
impl fmt::Display for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.quaternion();
        write!(f, "su2({:?},{:?},{:?},{:?})", q[0], q[1], q[2], q[3])
    }
}

/// Four complex amplitudes over `CC, CD, DC, DD`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[Complex64; 4]", into = "[Complex64; 4]")]
pub struct TwoQubitState {
    amps: [Complex64; 4],
}

impl TwoQubitState {
    pub const CC: usize = 0;
    pub const CD: usize = 1;
    pub const DC: usize = 2;
    pub const DD: usize = 3;

    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        if !amps.iter().all(|z| finite(*z)) {
            return Err(Error::NonFinite("state amplitude"));
        }
        let n: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > STRUCT_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(TwoQubitState { amps })
    }

    /// The computational basis state with the given index.
    pub fn basis(index: usize) -> Self {
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        TwoQubitState { amps }
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &TwoQubitState) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> TwoQubitState {
        TwoQubitState {
            amps: self.amps.map(|a| a * c),
        }
    }

    pub(crate) fn from_raw(amps: [Complex64; 4]) -> Self {
        TwoQubitState { amps }
    }
}

impl TryFrom<[Complex64; 4]> for TwoQubitState {
    type Error = Error;

    fn try_from(amps: [Complex64; 4]) -> Result<Self> {
        Self::new(amps)
    }
}

impl From<TwoQubitState> for [Complex64; 4] {
    fn from(s: TwoQubitState) -> Self {
        s.amps
    }
}

/// Applies `a ⊗ b` to `s`, with `a` acting on the first (player A) qubit.
pub fn tensor_apply(a: &Unitary2, b: &Unitary2, s: &TwoQubitState) -> TwoQubitState {
    let (a, b, v) = (&a.m, &b.m, &s.amps);
    let mut out = [ZERO; 4];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                for l in 0..2 {
                    acc += a[i][k] * b[j][l] * v[2 * k + l];
                }
            }
            out[2 * i + j] = acc;
        }
    }
    TwoQubitState { amps: out }
}

/// `|<s|t>|`, equal to 1 exactly when the states agree up to a global phase.
pub fn state_fidelity(s: &TwoQubitState, t: &TwoQubitState) -> f64 {
    s.inner(t).norm().min(1.0)
}

/// Seeded random source. Identical `(seed, stream)` pairs replay identical
/// sample sequences.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent stream `stream` under `seed`. Parallel shards use the shard
    /// index as the stream so results do not depend on thread count.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Position within the stream, in 32-bit words.
    pub fn word_pos(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Draws a Haar-distributed element of SU(2).
    pub fn haar_sample(&mut self) -> Unitary2 {
        haar_sample(self)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Haar-random SU(2) element: a Gaussian 4-vector projected onto the unit
/// 3-sphere, read as a unit quaternion.
pub fn haar_sample(rng: &mut SeededRng) -> Unitary2 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.standard_normal());
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-6 {
            continue;
        }
        let q = q.map(|x| x / n);
        return Unitary2 {
            m: [
                [Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3])],
                [Complex64::new(-q[2], q[3]), Complex64::new(q[0], -q[1])],
            ],
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn d() -> Unitary2 {
        Unitary2::new(ZERO, ONE, -ONE, ZERO).unwrap()
    }

    fn q() -> Unitary2 {
        Unitary2::new(I, ZERO, ZERO, -I).unwrap()
    }

    #[test]
    fn identity_products() {
        let id = Unitary2::IDENTITY;
        assert_eq!(id * id, id);
    }

    #[test]
    fn q_times_d_is_i_sigma_x() {
        let isx = Unitary2::new(ZERO, I, I, ZERO).unwrap();
        assert!((q() * d()).max_abs_diff(&isx) < ALG_TOL);
    }

    #[test]
    fn d_squared_is_minus_identity() {
        assert!((d() * d()).max_abs_diff(&-Unitary2::IDENTITY) < ALG_TOL);
    }

    #[test]
    fn rejects_non_su2() {
        // U(2) but det = -1
        assert!(Unitary2::new(ONE, ZERO, ZERO, -ONE).is_err());
        // not unitary
        assert!(Unitary2::new(c(2.0, 0.0), ZERO, ZERO, c(0.5, 0.0)).is_err());
        assert!(Unitary2::new(c(f64::NAN, 0.0), ZERO, ZERO, ONE).is_err());
        assert!(Unitary2::from_top_row(c(0.9, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn deserialize_validates() {
        let ok: [[Complex64; 2]; 2] = d().into();
        assert!(Unitary2::try_from(ok).is_ok());
        let bad = [[ONE, ONE], [ONE, ONE]];
        assert!(Unitary2::try_from(bad).is_err());
    }

    #[test]
    fn tensor_identity_is_noop() {
        let s = TwoQubitState::new([c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)]).unwrap();
        let id = Unitary2::IDENTITY;
        assert_eq!(tensor_apply(&id, &id, &s), s);
    }

    #[test]
    fn defect_on_first_qubit() {
        let s = tensor_apply(&d(), &Unitary2::IDENTITY, &TwoQubitState::basis(TwoQubitState::CC));
        let want = TwoQubitState::basis(TwoQubitState::DC).scale(-ONE);
        for (x, y) in s.amplitudes().iter().zip(want.amplitudes()) {
            assert!((x - y).norm() < ALG_TOL);
        }
    }

    #[test]
    fn defect_on_both_of_entangled_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = TwoQubitState::new([c(h, 0.0), ZERO, ZERO, c(0.0, h)]).unwrap();
        let out = tensor_apply(&d(), &d(), &s);
        let want = [c(0.0, h), ZERO, ZERO, c(h, 0.0)];
        for (x, y) in out.amplitudes().iter().zip(want) {
            assert!((x - y).norm() < ALG_TOL);
        }
    }

    #[test]
    fn fidelity_cases() {
        let cd = TwoQubitState::basis(TwoQubitState::CD);
        assert!((state_fidelity(&cd, &cd) - 1.0).abs() < ALG_TOL);
        assert!((state_fidelity(&cd, &cd.scale(-ONE)) - 1.0).abs() < ALG_TOL);
        let cc = TwoQubitState::basis(TwoQubitState::CC);
        let dd = TwoQubitState::basis(TwoQubitState::DD);
        assert_eq!(state_fidelity(&cc, &dd), 0.0);
    }

    #[test]
    fn haar_samples_are_su2_and_reproducible() {
        let mut a = SeededRng::new(7);
        let mut b = SeededRng::new(7);
        for _ in 0..100 {
            let u = a.haar_sample();
            assert_eq!(u, b.haar_sample());
            assert!((u.det() - ONE).norm() < STRUCT_TOL);
            assert!(Unitary2::try_from(u.entries()).is_ok());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = SeededRng::with_stream(1, 0);
        let mut b = SeededRng::with_stream(1, 1);
        assert_ne!(a.haar_sample(), b.haar_sample());
    }

    #[test]
    fn unitarity_of_haar_samples() {
        let mut rng = SeededRng::new(3);
        for _ in 0..1000 {
            let x = rng.haar_sample();
            assert!((x * x.dagger()).max_abs_diff(&Unitary2::IDENTITY) < ALG_TOL);
        }
    }

    #[test]
    fn haar_character_and_marginals() {
        // Monte Carlo oracle: E|tr U|^2 = 1 for Haar U in SU(2); quaternion
        // components have zero mean.
        let n = 100_000;
        let mut rng = SeededRng::new(2024);
        let mut trace_sq = 0.0;
        let mut means = [0.0; 4];
        for _ in 0..n {
            let u = rng.haar_sample();
            trace_sq += u.trace().norm_sqr();
            for (m, x) in means.iter_mut().zip(u.quaternion()) {
                *m += x;
            }
        }
        assert!((trace_sq / n as f64 - 1.0).abs() < 0.02);
        for m in means {
            assert!((m / n as f64).abs() < 0.02);
        }
    }

    #[test]
    fn display_is_top_row_literal() {
        assert_eq!(d().to_string(), "su2(0.0,0.0,1.0,0.0)");
    }
}
