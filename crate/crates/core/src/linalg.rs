//! Dense complex linear algebra: Hamiltonian assembly, exact evolution,
//! Schatten norms, and Monte-Carlo norm expectations.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>` (column-major). The exact
//! propagator `e^{iHt}` is built from the Hermitian eigendecomposition of `H`
//! and can be reused across many evolution times.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermion::term_operator;
use crate::model::{ordering_map, SykInstance};

/// Default cap on the Hilbert-space dimension of dense operators (`n ≤ 20`).
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 10;

/// Relative Hermiticity tolerance `‖M − M†‖_F ≤ tol·‖M‖_F`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// A dense `D × D` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    m: DMatrix<Complex64>,
}

impl DenseOperator {
    /// The zero matrix.
    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    /// The identity matrix.
    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// Wraps a square matrix.
    ///
    /// # Panics
    /// Panics if the matrix is not square.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "dense operators are square");
        Self { m }
    }

    /// Dimension `D`.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Mutable access to the underlying matrix.
    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.m
    }

    /// Consumes the wrapper.
    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.m - self.m.adjoint()).norm()
    }

    /// True when `‖M − M†‖_F ≤ 1e−12·‖M‖_F`.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= HERMITIAN_TOLERANCE * self.m.norm()
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖M M† − I‖_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim();
        (&self.m * self.m.adjoint() - DMatrix::<Complex64>::identity(d, d)).norm()
    }
}

/// Assembles `H = Σ_i b_i J_i K_i` with the default dimension cap.
pub fn assemble(instance: &SykInstance) -> Result<DenseOperator> {
    assemble_with_cap(instance, DEFAULT_DIMENSION_CAP)
}

/// Assembles `H = Σ_i b_i J_i K_i`; fails if `2^{n/2}` exceeds `cap`.
pub fn assemble_with_cap(instance: &SykInstance, cap: usize) -> Result<DenseOperator> {
    instance.validate()?;
    let d = dimension(instance.n, cap)?;
    let map = ordering_map(instance.n, instance.k)?;
    let mut h = DenseOperator::zeros(d);
    for (edge, w) in map.edges().iter().zip(instance.weights()) {
        if w == 0.0 {
            continue;
        }
        let p = term_operator(edge, instance.n)?.pauli;
        let x = p.x_mask() as usize;
        for b in 0..d {
            h.m[(b ^ x, b)] += p.column_coefficient(b) * w;
        }
    }
    Ok(h)
}

/// Hilbert-space dimension `2^{n/2}`, checked against `cap`.
pub fn dimension(n: usize, cap: usize) -> Result<usize> {
    let qubits = n / 2;
    if qubits >= usize::BITS as usize - 1 || (1usize << qubits) > cap {
        return Err(Error::Resource(format!(
            "dimension 2^{qubits} exceeds the configured cap {cap}"
        )));
    }
    Ok(1usize << qubits)
}

/// `e^{iφ} − 1` without cancellation for small `φ`.
fn expm1_i(phi: f64) -> Complex64 {
    let half = (0.5 * phi).sin();
    Complex64::new(-2.0 * half * half, phi.sin())
}

/// Hermitian eigendecomposition `H = V Λ V†`, reusable for many times `t`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl Spectrum {
    /// Diagonalizes a Hermitian operator.
    pub fn new(h: &DenseOperator) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::Precondition(
                "operator has non-finite entries".into(),
            ));
        }
        if !h.is_hermitian() {
            return Err(Error::Precondition(format!(
                "operator is not Hermitian (residual {:.3e})",
                h.hermiticity_residual()
            )));
        }
        let eig = h.m.clone().symmetric_eigen();
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// Eigenvalues (unordered).
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    fn conjugate_diag(&self, f: impl Fn(f64) -> Complex64) -> DenseOperator {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[j]);
        }
        DenseOperator {
            m: scaled * self.vectors.adjoint(),
        }
    }

    /// `e^{iHt} = V diag(e^{iλ_j t}) V†`.
    pub fn evolution(&self, t: f64) -> DenseOperator {
        self.conjugate_diag(|l| Complex64::from_polar(1.0, l * t))
    }

    /// `e^{iHt} − I`, accurate even when the evolution is close to identity.
    pub fn evolution_minus_identity(&self, t: f64) -> DenseOperator {
        self.conjugate_diag(|l| expm1_i(l * t))
    }

    /// `e^{iHt}ψ` without forming the propagator, as `ψ + V(e^{iΛt} − I)V†ψ`
    /// so that short times lose no accuracy.
    pub fn evolve_state(&self, t: f64, state: &[Complex64]) -> Vec<Complex64> {
        let psi = DVector::from_column_slice(state);
        let mut coeffs = self.vectors.adjoint() * &psi;
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c *= expm1_i(self.eigenvalues[j] * t);
        }
        (psi + &self.vectors * coeffs).iter().copied().collect()
    }
}

/// `U = e^{iHt}` for Hermitian `H`.
pub fn exact_evolution(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(Spectrum::new(h)?.evolution(t))
}

fn check_order(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Validation(format!(
            "Schatten order must be ≥ 1, got {p}"
        )));
    }
    Ok(())
}

/// Schatten `p`-norm `(Σ σ_j^p)^{1/p}`; `p = ∞` gives the spectral norm and
/// `p = 2` the Frobenius norm (without an SVD).
pub fn schatten_norm(m: &DenseOperator, p: f64) -> Result<f64> {
    check_order(p)?;
    if !m.is_finite() {
        return Err(Error::Precondition(
            "operator has non-finite entries".into(),
        ));
    }
    if p == 2.0 {
        return Ok(m.m.norm());
    }
    let sv = m.m.singular_values();
    if p.is_infinite() {
        return Ok(sv.max());
    }
    // Scale by the largest singular value to avoid overflow of σ^p.
    let top = sv.max();
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = sv.iter().map(|s| (s / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Monte-Carlo estimate of `(E‖A‖_p^p)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    /// `(mean of ‖A_i‖_p^p)^{1/p}`.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub stderr: f64,
    /// Number of samples.
    pub num_samples: usize,
    /// Norm order.
    pub p: f64,
}

impl NormEstimate {
    /// Divides value and standard error by `‖I_D‖_p = D^{1/p}`.
    pub fn normalized(&self, dim: usize) -> Self {
        let scale = (dim as f64).powf(1.0 / self.p);
        Self {
            value: self.value / scale,
            stderr: self.stderr / scale,
            ..*self
        }
    }
}

/// Sum in a fixed pairwise tree, independent of how the terms were computed.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Builds a [`NormEstimate`] from per-sample norms `‖A_i‖_p`.
pub fn estimate_from_norms(norms: &[f64], p: f64) -> Result<NormEstimate> {
    check_order(p)?;
    if p.is_infinite() {
        return Err(Error::Validation(
            "expected norms need a finite order p".into(),
        ));
    }
    let n = norms.len();
    if n < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let powers: Vec<f64> = norms.iter().map(|x| x.powf(p)).collect();
    let mean = pairwise_sum(&powers) / n as f64;
    // Shifted by the first sample so that identical samples give exactly 0.
    let shifted: Vec<f64> = powers.iter().map(|x| x - powers[0]).collect();
    let squares: Vec<f64> = shifted.iter().map(|d| d * d).collect();
    let shift_sum = pairwise_sum(&shifted);
    let var =
        ((pairwise_sum(&squares) - shift_sum * shift_sum / n as f64) / (n - 1) as f64).max(0.0);
    let se_mean = (var / n as f64).sqrt();
    let value = mean.powf(1.0 / p);
    // d(m^{1/p})/dm = m^{1/p − 1}/p
    let stderr = if mean > 0.0 {
        value / (p * mean) * se_mean
    } else {
        0.0
    };
    Ok(NormEstimate {
        value,
        stderr,
        num_samples: n,
        p,
    })
}

/// Evaluates `f(i)` for `i ∈ [0, count)` on the current rayon pool and returns
/// the results in index order (the first error by index wins).
pub fn par_collect<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(f)
        .collect::<Vec<Result<T>>>()
        .into_iter()
        .collect()
}

/// Monte-Carlo expected Schatten norm given per-sample norms `norm_of(i)`.
///
/// Samples are evaluated in parallel on the current rayon pool and reduced
/// in a fixed order, so the estimate is independent of the worker count.
pub fn expected_norm_by<F>(num_samples: usize, p: f64, norm_of: F) -> Result<NormEstimate>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    if num_samples < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 samples, got {num_samples}"
        )));
    }
    let norms = par_collect(num_samples, norm_of)?;
    estimate_from_norms(&norms, p)
}

/// Monte-Carlo estimate of `(E‖A‖_p^p)^{1/p}` where `A = statistic(sampler(i))`.
pub fn expected_norm<I, S, F>(
    sampler: S,
    statistic: F,
    p: f64,
    num_samples: usize,
) -> Result<NormEstimate>
where
    S: Fn(usize) -> Result<I> + Sync + Send,
    F: Fn(&I) -> Result<DenseOperator> + Sync + Send,
{
    check_order(p)?;
    expected_norm_by(num_samples, p, |i| {
        schatten_norm(&statistic(&sampler(i)?)?, p)
    })
}
