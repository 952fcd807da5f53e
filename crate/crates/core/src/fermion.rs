//! Jordan–Wigner representation of Majorana operators and SYK term operators.
//!
//! With `n` Majoranas on `n/2` qubits (qubit `j−1` is the zero-based index of
//! mode `j`):
//!
//! ```text
//!   χ_{2j−1} = Z^{⊗(j−1)} X_j,      χ_{2j} = Z^{⊗(j−1)} Y_j
//! ```
//!
//! so that `{χ_a, χ_b} = 2δ_ab`. A k-local term on the hyperedge
//! `i₁ < … < i_k` is `K = i^{k(k−1)/2} χ_{i₁}⋯χ_{i_k}`, which is Hermitian
//! and squares to the identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, MAX_QUBITS};

/// A validated Majorana label `χ_index` among `n` Majoranas (1-based index).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajoranaIndex {
    index: usize,
    n: usize,
}

impl MajoranaIndex {
    /// Validates `n` even, `2 ≤ n ≤ 128`, and `1 ≤ index ≤ n`.
    pub fn new(index: usize, n: usize) -> Result<Self> {
        check_majorana_count(n)?;
        if index == 0 || index > n {
            return Err(Error::Validation(format!(
                "Majorana index {index} outside [1, {n}]"
            )));
        }
        Ok(Self { index, n })
    }

    /// The 1-based index.
    pub fn index(&self) -> usize {
        self.index
    }

    /// The number of Majoranas.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Checks that `n` is a supported (even, nonzero) Majorana count.
pub fn check_majorana_count(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Validation(format!(
            "number of Majoranas must be even and positive, got {n}"
        )));
    }
    if n / 2 > MAX_QUBITS {
        return Err(Error::Validation(format!(
            "at most {} Majoranas supported, got {n}",
            2 * MAX_QUBITS
        )));
    }
    Ok(())
}

/// Pauli string of `χ_index` under the Jordan–Wigner convention above.
pub fn jordan_wigner(chi: MajoranaIndex) -> PauliString {
    let qubits = chi.n / 2;
    let q = (chi.index - 1) / 2;
    let string = (1u64 << q) - 1;
    let bit = 1u64 << q;
    let result = if chi.index % 2 == 1 {
        PauliString::from_masks(qubits, bit, string, 0)
    } else {
        PauliString::from_masks(qubits, bit, string | bit, 1)
    };
    result.expect("masks are within range by construction")
}

/// Convenience wrapper validating `(index, n)` first.
pub fn majorana(index: usize, n: usize) -> Result<PauliString> {
    Ok(jordan_wigner(MajoranaIndex::new(index, n)?))
}

/// A local SYK term: a hyperedge and its Hermitian, involutory Pauli string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermOperator {
    /// Sorted 1-based Majorana indices.
    pub hyperedge: Vec<usize>,
    /// `i^{k(k−1)/2} χ_{i₁}⋯χ_{i_k}` on `n/2` qubits.
    pub pauli: PauliString,
}

/// Builds the term operator `i^{k(k−1)/2} χ_{i₁}⋯χ_{i_k}` for a sorted hyperedge.
pub fn term_operator(hyperedge: &[usize], n: usize) -> Result<TermOperator> {
    check_majorana_count(n)?;
    if hyperedge.is_empty() {
        return Err(Error::Validation("hyperedge must be nonempty".into()));
    }
    if hyperedge.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(format!(
            "hyperedge {hyperedge:?} must be strictly increasing (sorted, no duplicates)"
        )));
    }
    let mut pauli = PauliString::identity(n / 2)?;
    for &i in hyperedge {
        pauli = pauli.mul_unchecked(&majorana(i, n)?);
    }
    let k = hyperedge.len();
    let prefactor = ((k * (k - 1) / 2) % 4) as u8;
    let pauli = pauli.with_phase(pauli.phase_exp() + prefactor);
    debug_assert!(pauli.is_hermitian());
    Ok(TermOperator {
        hyperedge: hyperedge.to_vec(),
        pauli,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ordering_map;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn first_two_majoranas_are_x_and_y() {
        let chi1 = majorana(1, 4).unwrap();
        let chi2 = majorana(2, 4).unwrap();
        assert_eq!(chi1, PauliString::from_label("XI").unwrap());
        assert_eq!(chi2, PauliString::from_label("YI").unwrap());
        assert_eq!(
            majorana(3, 4).unwrap(),
            PauliString::from_label("ZX").unwrap()
        );
        assert_eq!(
            majorana(4, 4).unwrap(),
            PauliString::from_label("ZY").unwrap()
        );
    }

    #[test]
    fn invalid_indices_rejected() {
        assert!(majorana(1, 3).is_err());
        assert!(majorana(0, 4).is_err());
        assert!(majorana(5, 4).is_err());
        assert!(term_operator(&[2, 1], 4).is_err());
        assert!(term_operator(&[1, 1], 4).is_err());
        assert!(term_operator(&[1, 5], 4).is_err());
    }

    #[test]
    fn anticommutation_exact_for_all_n_up_to_twelve() {
        for n in (2..=12).step_by(2) {
            for i in 1..=n {
                for j in 1..=n {
                    let a = majorana(i, n).unwrap();
                    let b = majorana(j, n).unwrap();
                    let ab = a.multiply(&b).unwrap();
                    let ba = b.multiply(&a).unwrap();
                    if i == j {
                        assert!(ab.is_identity_up_to_phase() && ab.phase_exp() == 0);
                    } else {
                        // χ_iχ_j = −χ_jχ_i ⇔ same masks, phases differ by 2.
                        assert_eq!(ab.with_phase(0), ba.with_phase(0));
                        assert_eq!((ab.phase_exp() + 2) & 3, ba.phase_exp());
                    }
                }
            }
        }
    }

    #[test]
    fn anticommutator_dense_at_n_eight() {
        let n = 8;
        let d = 16;
        let dense: Vec<DMatrix<Complex64>> = (1..=n)
            .map(|i| majorana(i, n).unwrap().to_dense().unwrap().matrix().clone())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let anti = &dense[i] * &dense[j] + &dense[j] * &dense[i];
                let expected = if i == j {
                    DMatrix::identity(d, d) * Complex64::new(2.0, 0.0)
                } else {
                    DMatrix::zeros(d, d)
                };
                assert_eq!(anti, expected);
            }
        }
    }

    #[test]
    fn single_majorana_term_has_no_prefactor() {
        let t = term_operator(&[3], 6).unwrap();
        assert_eq!(t.pauli, majorana(3, 6).unwrap());
        assert_eq!(t.pauli.phase_exp(), majorana(3, 6).unwrap().phase_exp());
    }

    fn assert_hermitian_involution(t: &TermOperator) {
        let m = t.pauli.to_dense().unwrap().matrix().clone();
        let d = m.nrows();
        assert!((&m - m.adjoint()).norm() <= 1e-13);
        assert!((&m * &m - DMatrix::identity(d, d)).norm() <= 1e-13);
        let sv = m.singular_values();
        assert!((sv.max() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn pair_and_quartic_terms_are_hermitian_involutions() {
        assert_hermitian_involution(&term_operator(&[1, 2], 4).unwrap());
        assert_hermitian_involution(&term_operator(&[1, 2, 3, 4], 8).unwrap());
    }

    #[test]
    fn every_term_up_to_n_ten_is_hermitian_involution() {
        for n in (2..=10).step_by(2) {
            for k in 1..=n.min(5) {
                for edge in ordering_map(n, k).unwrap().edges() {
                    let t = term_operator(edge, n).unwrap();
                    assert!(t.pauli.is_hermitian());
                    assert!(t
                        .pauli
                        .multiply(&t.pauli)
                        .unwrap()
                        .is_identity_up_to_phase());
                    assert_eq!(t.pauli.multiply(&t.pauli).unwrap().phase_exp(), 0);
                    if n <= 8 || k == 4 {
                        assert_hermitian_involution(&t);
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_sign_law_at_n_eight() {
        let n = 8;
        for k in 2..=4 {
            let map = ordering_map(n, k).unwrap();
            let terms: Vec<TermOperator> = map
                .edges()
                .iter()
                .map(|e| term_operator(e, n).unwrap())
                .collect();
            for a in &terms {
                for b in &terms {
                    let m = a
                        .hyperedge
                        .iter()
                        .filter(|i| b.hyperedge.contains(i))
                        .count();
                    let ab = a.pauli.multiply(&b.pauli).unwrap();
                    let ba = b.pauli.multiply(&a.pauli).unwrap();
                    let sign = if (k + m) % 2 == 0 { 0 } else { 2 };
                    assert_eq!(ab, ba.with_phase(ba.phase_exp() + sign));
                }
            }
        }
    }
}
