//! Independent dense oracles shared by unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::pauli::PauliString;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// 2×2 matrix for a Pauli letter.
pub fn pauli_2x2(letter: char) -> DMatrix<Complex64> {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("bad letter"),
    }
}

/// Dense matrix of a label via Kronecker products; character `q` acts on
/// qubit `q`, the least significant bit of the basis index, so it is the
/// rightmost Kronecker factor.
pub fn dense_from_label(label: &str, scale: Complex64) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, scale);
    for letter in label.chars() {
        m = pauli_2x2(letter).kronecker(&m);
    }
    m
}

/// Matrix exponential by scaling and squaring with a long Taylor series.
pub fn expm_taylor(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = a.nrows();
    let norm = a.norm();
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let scaled = a / c(f64::powi(2.0, s), 0.0);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for j in 1..40 {
        term = &term * &scaled / c(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Complex matrix with independent uniform(−1,1) real and imaginary parts.
pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |_, _| {
        c(2.0 * uniform(rng) - 1.0, 2.0 * uniform(rng) - 1.0)
    })
}

/// Random Hermitian matrix `(M + M†)/2`.
pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    let m = random_matrix(rng, d);
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Random unitary from the QR factorization of a random matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    random_matrix(rng, d).qr().q()
}

/// Random Hermitian Pauli string (phase fixed to make it Hermitian).
pub fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let lim = 1u64 << n;
    let x = rng.next_u64() % lim;
    let z = rng.next_u64() % lim;
    let sign = if rng.next_u32() & 1 == 1 { 2 } else { 0 };
    let k = ((x & z).count_ones() as u8 + sign) & 3;
    PauliString::from_masks(n, x, z, k).unwrap()
}
