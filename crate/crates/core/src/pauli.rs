//! Exact algebra of n-qubit Pauli strings.
//!
//! A [`PauliString`] on `num_qubits ≤ 64` qubits is stored as two bit masks and
//! a phase exponent and represents the operator
//!
//! ```text
//!   P = i^phase · X^x · Z^z,     X^x = ⊗_q X_q^{x_q},   Z^z = ⊗_q Z_q^{z_q}
//! ```
//!
//! Bit `q` of either mask refers to qubit `q` (zero-based), which is also bit
//! `q` of a computational-basis index: `P|b⟩ = i^phase (−1)^{popcount(z∧b)} |b⊕x⟩`.
//! A `Y` on qubit `q` is therefore `x_q = z_q = 1` with one extra factor `i`
//! (`Y = iXZ`).
//!
//! Products, commutation tests and hermiticity checks are exact integer
//! arithmetic. Dense action on matrices and state vectors is a signed
//! permutation pass; the Pauli matrix itself is never materialized.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseOperator;

/// Largest number of qubits a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    /// Identity.
    I,
    /// Bit flip.
    X,
    /// `Y = iXZ`.
    Y,
    /// Phase flip.
    Z,
}

/// An n-qubit Pauli operator `i^phase · X^x · Z^z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    num_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase_exp: u8,
}

/// Which side of the target matrix an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `e^{iθP} · M`.
    Left,
    /// `M · e^{iθP}`.
    Right,
}

fn qubit_mask(num_qubits: usize) -> u64 {
    if num_qubits == MAX_QUBITS {
        u64::MAX
    } else {
        (1u64 << num_qubits) - 1
    }
}

#[inline]
fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// `i^k` for `k` taken mod 4.
#[inline]
pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliString {
    /// The identity on `num_qubits` qubits.
    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::from_masks(num_qubits, 0, 0, 0)
    }

    /// Builds `i^phase_exp · X^x_mask · Z^z_mask`.
    ///
    /// Fails if `num_qubits` is zero or exceeds [`MAX_QUBITS`], or if a mask has
    /// bits beyond `num_qubits`.
    pub fn from_masks(num_qubits: usize, x_mask: u64, z_mask: u64, phase_exp: u8) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::Validation(format!(
                "num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
            )));
        }
        let valid = qubit_mask(num_qubits);
        if x_mask & !valid != 0 || z_mask & !valid != 0 {
            return Err(Error::Validation(format!(
                "mask bits set beyond qubit {}",
                num_qubits - 1
            )));
        }
        Ok(Self {
            num_qubits,
            x_mask,
            z_mask,
            phase_exp: phase_exp & 3,
        })
    }

    /// A single-qubit Pauli `kind` on qubit `qubit` (zero-based), identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, kind: Pauli) -> Result<Self> {
        if qubit >= num_qubits {
            return Err(Error::Validation(format!(
                "qubit {qubit} out of range for {num_qubits} qubits"
            )));
        }
        let bit = 1u64 << qubit;
        match kind {
            Pauli::I => Self::from_masks(num_qubits, 0, 0, 0),
            Pauli::X => Self::from_masks(num_qubits, bit, 0, 0),
            Pauli::Z => Self::from_masks(num_qubits, 0, bit, 0),
            Pauli::Y => Self::from_masks(num_qubits, bit, bit, 1),
        }
    }

    /// Parses a label such as `"XIZY"`; character `q` acts on qubit `q`.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.chars().count();
        let mut p = Self::identity(n)?;
        for (q, c) in label.chars().enumerate() {
            let kind = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Validation(format!("bad Pauli label char {other:?}"))),
            };
            p = p.multiply(&Self::single(n, q, kind)?)?;
        }
        Ok(p)
    }

    /// Number of qubits.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// X-part bit mask.
    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    /// Z-part bit mask.
    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Phase exponent `k` of the global factor `i^k`.
    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Same masks with the phase exponent replaced.
    pub fn with_phase(&self, phase_exp: u8) -> Self {
        Self {
            phase_exp: phase_exp & 3,
            ..*self
        }
    }

    /// True when both masks are empty (a multiple of the identity).
    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// True iff the operator equals its conjugate transpose.
    ///
    /// `P† = (−i)^k (−1)^{x·z} X^x Z^z`, so `P` is Hermitian iff
    /// `k ≡ popcount(x∧z) (mod 2)`.
    pub fn is_hermitian(&self) -> bool {
        (self.phase_exp as u32 + (self.x_mask & self.z_mask).count_ones()) % 2 == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension(format!(
                "Pauli strings on {} and {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    /// Exact product `self · other`, including the accumulated phase.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Product without the size check, for hot loops over a validated set.
    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        // Z^{z1} X^{x2} = (−1)^{z1·x2} X^{x2} Z^{z1}
        let swap = if parity(self.z_mask & other.x_mask) {
            2
        } else {
            0
        };
        Self {
            num_qubits: self.num_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase_exp: (self.phase_exp + other.phase_exp + swap) & 3,
        }
    }

    /// True iff the two strings commute (even symplectic overlap).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        !parity((self.x_mask & other.z_mask) ^ (self.z_mask & other.x_mask))
    }

    /// Hilbert-space dimension `2^num_qubits`; fails above 30 qubits.
    pub fn dim(&self) -> Result<usize> {
        if self.num_qubits > 30 {
            return Err(Error::Resource(format!(
                "dense dimension 2^{} is not addressable",
                self.num_qubits
            )));
        }
        Ok(1usize << self.num_qubits)
    }

    /// Amplitude of `P|b⟩` on `|b⊕x⟩`: `i^k (−1)^{popcount(z∧b)}`.
    #[inline]
    pub fn column_coefficient(&self, b: usize) -> Complex64 {
        let c = i_pow(self.phase_exp);
        if parity(self.z_mask & b as u64) {
            -c
        } else {
            c
        }
    }

    /// Dense matrix of the operator.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let d = self.dim()?;
        let mut m = DenseOperator::zeros(d);
        let x = self.x_mask as usize;
        for b in 0..d {
            m.matrix_mut()[(b ^ x, b)] = self.column_coefficient(b);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Render in the Y-aware form: i^k X^x Z^z = i^{k − #Y} ⊗ (I|X|Y|Z).
        let ys = (self.x_mask & self.z_mask).count_ones() as u8;
        let phase = (self.phase_exp + 4 - (ys & 3)) & 3;
        let prefix = ["+", "+i", "-", "-i"][phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.num_qubits {
            let bit = 1u64 << q;
            let c = match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Precomputed data for one factor `e^{iθP}` of a product formula.
///
/// The factor is applied as `M + (cosθ − 1)·M + i sinθ·(P M)`, with
/// `cosθ − 1 = −2 sin²(θ/2)` evaluated without cancellation, so that long
/// products of near-identity rotations do not accumulate a coherent
/// non-unitary rounding drift.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rotation {
    x: usize,
    z: u64,
    c1: f64,
    w: Complex64,
}

impl Rotation {
    /// `p` must be Hermitian (checked by callers).
    pub(crate) fn new(theta: f64, p: &PauliString) -> Self {
        let half = (0.5 * theta).sin();
        let c1 = -2.0 * half * half;
        let s = theta.sin();
        // i·sinθ·i^k
        let w = i_pow(p.phase_exp + 1) * s;
        Self {
            x: p.x_mask as usize,
            z: p.z_mask,
            c1,
            w,
        }
    }

    /// `i sinθ · ⟨b⊕x|P|b⟩`.
    #[inline]
    fn coeff(&self, b: usize) -> Complex64 {
        if parity(self.z & b as u64) {
            -self.w
        } else {
            self.w
        }
    }

    /// `v ← e^{iθP} v` for a single vector of length `2^num_qubits`.
    pub(crate) fn apply_vector(&self, v: &mut [Complex64]) {
        let x = self.x;
        if x == 0 {
            for (a, va) in v.iter_mut().enumerate() {
                *va += *va * (self.coeff(a) + self.c1);
            }
            return;
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for a in 0..v.len() {
            if a & hi != 0 {
                continue;
            }
            let a2 = a ^ x;
            let (u, w) = (v[a], v[a2]);
            v[a] = u + u * self.c1 + self.coeff(a2) * w;
            v[a2] = w + w * self.c1 + self.coeff(a) * u;
        }
    }

    /// `M ← e^{iθP} M` on a column-major `d×d` buffer.
    pub(crate) fn apply_left(&self, data: &mut [Complex64], d: usize) {
        for col in data.chunks_exact_mut(d) {
            self.apply_vector(col);
        }
    }

    /// `M ← M e^{iθP}` on a column-major `d×d` buffer.
    ///
    /// Column `b` of `M P` is `⟨b⊕x|P|b⟩ · M[:, b⊕x]`.
    pub(crate) fn apply_right(&self, data: &mut [Complex64], d: usize) {
        let x = self.x;
        if x == 0 {
            for (b, col) in data.chunks_exact_mut(d).enumerate() {
                let f = self.coeff(b) + self.c1;
                for e in col.iter_mut() {
                    *e += *e * f;
                }
            }
            return;
        }
        let hi = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..d {
            if b & hi != 0 {
                continue;
            }
            let b2 = b ^ x;
            // b < b2 because b2 has the highest bit of x set and b does not.
            let (head, tail) = data.split_at_mut(b2 * d);
            let cb = &mut head[b * d..(b + 1) * d];
            let cb2 = &mut tail[..d];
            let (fb, fb2) = (self.coeff(b), self.coeff(b2));
            for (u, w) in cb.iter_mut().zip(cb2.iter_mut()) {
                let (uu, ww) = (*u, *w);
                *u = uu + uu * self.c1 + fb * ww;
                *w = ww + ww * self.c1 + fb2 * uu;
            }
        }
    }

    /// With `X = S − I` for a product `S`, updates `X ← (I + X) e^{iθP} − I`
    /// without ever adding the identity back, which keeps the relative
    /// precision of small deviations from the identity.
    pub(crate) fn accumulate_right_delta(&self, data: &mut [Complex64], d: usize) {
        self.apply_right(data, d);
        // + (e^{iθP} − I) = c1·I + i sinθ·P
        for b in 0..d {
            data[b * d + b] += self.c1;
            data[b * d + (b ^ self.x)] += self.coeff(b);
        }
    }
}

fn check_exponential_args(p: &PauliString, d: usize) -> Result<()> {
    if !p.is_hermitian() {
        return Err(Error::Precondition(format!(
            "Pauli string {p} is not Hermitian"
        )));
    }
    let pd = p.dim()?;
    if pd != d {
        return Err(Error::Dimension(format!(
            "Pauli string acts on dimension {pd}, target has dimension {d}"
        )));
    }
    Ok(())
}

/// Returns `e^{iθP}·target` (`Side::Left`) or `target·e^{iθP}` (`Side::Right`).
///
/// Computed as `cosθ·target + i sinθ·(P·target)` using `P² = I`; the dense
/// exponential is never formed.
pub fn apply_exponential(
    theta: f64,
    p: &PauliString,
    target: &DenseOperator,
    side: Side,
) -> Result<DenseOperator> {
    let mut out = target.clone();
    apply_exponential_in_place(theta, p, &mut out, side)?;
    Ok(out)
}

/// In-place variant of [`apply_exponential`].
pub fn apply_exponential_in_place(
    theta: f64,
    p: &PauliString,
    target: &mut DenseOperator,
    side: Side,
) -> Result<()> {
    let d = target.dim();
    check_exponential_args(p, d)?;
    let rot = Rotation::new(theta, p);
    let data = target.matrix_mut().as_mut_slice();
    match side {
        Side::Left => rot.apply_left(data, d),
        Side::Right => rot.apply_right(data, d),
    }
    Ok(())
}

/// `ψ ← e^{iθP} ψ` for a state vector of length `2^num_qubits`.
pub fn apply_exponential_to_state(
    theta: f64,
    p: &PauliString,
    state: &mut [Complex64],
) -> Result<()> {
    check_exponential_args(p, state.len())?;
    Rotation::new(theta, p).apply_vector(state);
    Ok(())
}
