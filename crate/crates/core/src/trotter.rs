//! Lie–Trotter–Suzuki schedules, Trotterized evolution and observed errors.
//!
//! A product formula of order `l` is flattened into a [`Schedule`]: an ordered
//! list of steps `(a_j, b_j)` such that
//!
//! ```text
//!   S_l(τ) = ∏_{j=1}^{J} e^{i a_j τ H_{b_j}}     (j = 1 leftmost),   J = Υ·Γ
//! ```
//!
//! * `l = 1`: one forward sweep, `a_j = 1`;
//! * `l = 2`: a reverse sweep then a forward sweep, both at `a_j = 1/2`;
//! * `l = 2p ≥ 4`: `S_{2p−2}(q τ)² S_{2p−2}((1−4q)τ) S_{2p−2}(q τ)²` with
//!   `q = 1/(4 − 4^{1/(2p−1)})`.
//!
//! The number of sweeps per round is the stage count `Υ = 1` for `l = 1` and
//! `Υ = 2·5^{l/2−1}` for even `l`.
//!
//! `S_l(t/r)^r` is evaluated in the deviation-from-identity representation
//! `S = I + X`: a single round is accumulated factor by factor directly in
//! `X`, then `X_r` with `I + X_r = (I + X)^r` follows by binary powering via
//! `(I + A)(I + B) − I = A + B + AB`. Rounding errors then scale with the
//! size of the deviation rather than with the identity, which keeps errors
//! as small as `10⁻¹¹` resolvable at `r = 10⁴–10⁵` rounds.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dimension, schatten_norm, DenseOperator, Spectrum, DEFAULT_DIMENSION_CAP};
use crate::model::{ordering_map, SykInstance, TermOrder};
use crate::pauli::{PauliString, Rotation};

/// One sweep over all Γ terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    /// True for the sweep `Γ, Γ−1, …, 1`.
    pub reverse: bool,
    /// Time scale of every factor in the sweep.
    pub scale: f64,
}

/// A flattened product formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    order: usize,
    gamma: usize,
    sweeps: Vec<Sweep>,
    steps: Vec<(f64, usize)>,
}

/// Stage count `Υ(l)`; fails for odd `l > 1` and for `l = 0`.
pub fn stage_count(l: usize) -> Result<usize> {
    check_order(l)?;
    Ok(if l == 1 {
        1
    } else {
        2 * 5usize.pow((l / 2 - 1) as u32)
    })
}

fn check_order(l: usize) -> Result<()> {
    if l == 1 || (l >= 2 && l % 2 == 0) {
        if l > 30 {
            return Err(Error::Resource(format!(
                "product formula order {l} is too large"
            )));
        }
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "product formula order must be 1 or even, got {l}"
        )))
    }
}

/// Suzuki recursion coefficient `q_p = 1/(4 − 4^{1/(2p−1)})`.
pub fn suzuki_q(p: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2 * p - 1) as f64))
}

fn sweeps_for(l: usize) -> Vec<Sweep> {
    match l {
        1 => vec![Sweep {
            reverse: false,
            scale: 1.0,
        }],
        2 => vec![
            Sweep {
                reverse: true,
                scale: 0.5,
            },
            Sweep {
                reverse: false,
                scale: 0.5,
            },
        ],
        _ => {
            let q = suzuki_q(l / 2);
            let inner = sweeps_for(l - 2);
            let mut out = Vec::with_capacity(5 * inner.len());
            for factor in [q, q, 1.0 - 4.0 * q, q, q] {
                out.extend(inner.iter().map(|s| Sweep {
                    reverse: s.reverse,
                    scale: s.scale * factor,
                }));
            }
            out
        }
    }
}

/// Builds the order-`l` schedule over `Γ = gamma` terms.
pub fn build_schedule(l: usize, gamma: usize) -> Result<Schedule> {
    check_order(l)?;
    if gamma == 0 {
        return Err(Error::Validation(
            "a schedule needs at least one term".into(),
        ));
    }
    let sweeps = sweeps_for(l);
    let mut steps = Vec::with_capacity(sweeps.len() * gamma);
    for s in &sweeps {
        if s.reverse {
            steps.extend((0..gamma).rev().map(|b| (s.scale, b)));
        } else {
            steps.extend((0..gamma).map(|b| (s.scale, b)));
        }
    }
    Ok(Schedule {
        order: l,
        gamma,
        sweeps,
        steps,
    })
}

impl Schedule {
    /// Order `l`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of terms Γ.
    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Stage count Υ (number of sweeps).
    pub fn stages(&self) -> usize {
        self.sweeps.len()
    }

    /// The sweeps of one round.
    pub fn sweeps(&self) -> &[Sweep] {
        &self.sweeps
    }

    /// Steps `(a_j, b_j)` with zero-based sweep positions `b_j ∈ [0, Γ)`.
    pub fn steps(&self) -> &[(f64, usize)] {
        &self.steps
    }

    /// Total coefficient accumulated by each sweep position.
    pub fn coefficient_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.gamma];
        for &(a, b) in &self.steps {
            sums[b] += a;
        }
        sums
    }
}

/// The Hamiltonian terms in sweep order, ready for Trotterization.
#[derive(Debug, Clone)]
pub struct TermSequence {
    num_qubits: usize,
    paulis: Vec<PauliString>,
    weights: Vec<f64>,
}

impl TermSequence {
    /// Terms of `instance` swept in the given `order`.
    pub fn new(instance: &SykInstance, order: TermOrder) -> Result<Self> {
        instance.validate()?;
        let map = ordering_map(instance.n, instance.k)?;
        let ops = map.term_operators()?;
        let weights = instance.weights();
        let perm = order.permutation(ops.len());
        Ok(Self {
            num_qubits: instance.n / 2,
            paulis: perm.iter().map(|&i| ops[i].pauli).collect(),
            weights: perm.iter().map(|&i| weights[i]).collect(),
        })
    }

    /// Number of terms Γ.
    pub fn gamma(&self) -> usize {
        self.paulis.len()
    }

    fn rotations(&self, schedule: &Schedule, tau: f64) -> Result<Vec<Rotation>> {
        if schedule.gamma() != self.gamma() {
            return Err(Error::Validation(format!(
                "schedule over {} terms applied to a Hamiltonian with {} terms",
                schedule.gamma(),
                self.gamma()
            )));
        }
        Ok(schedule
            .steps()
            .iter()
            .filter(|&&(_, b)| self.weights[b] != 0.0)
            .map(|&(a, b)| Rotation::new(a * self.weights[b] * tau, &self.paulis[b]))
            .collect())
    }

    fn dim(&self) -> Result<usize> {
        // State vectors stay affordable well beyond the dense-matrix cap.
        dimension(2 * self.num_qubits, 1 << 24)
    }

    fn matrix_dim(&self) -> Result<usize> {
        // Dense D×D products: hard limit n ≤ 24.
        dimension(2 * self.num_qubits, 1 << 12)
    }

    /// `S_l(τ) − I` for a single round.
    pub fn round_deviation(&self, schedule: &Schedule, tau: f64) -> Result<DMatrix<Complex64>> {
        let d = self.matrix_dim()?;
        let mut x = DMatrix::<Complex64>::zeros(d, d);
        for rot in self.rotations(schedule, tau)? {
            rot.accumulate_right_delta(x.as_mut_slice(), d);
        }
        Ok(x)
    }

    /// `S_l(t/r)^r − I` by binary powering in deviation form.
    pub fn product_deviation(
        &self,
        schedule: &Schedule,
        t: f64,
        r: u64,
    ) -> Result<DMatrix<Complex64>> {
        check_time(t, r)?;
        let mut base = self.round_deviation(schedule, t / r as f64)?;
        let mut acc: Option<DMatrix<Complex64>> = None;
        let mut e = r;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => combine(&a, &base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = combine(&base, &base);
        }
        Ok(acc.expect("r ≥ 1"))
    }

    /// `S_l(t/r)^r` by repeated squaring of the round operator.
    pub fn product(&self, schedule: &Schedule, t: f64, r: u64) -> Result<DenseOperator> {
        let mut m = self.product_deviation(schedule, t, r)?;
        for i in 0..m.nrows() {
            m[(i, i)] += 1.0;
        }
        Ok(DenseOperator::from_matrix(m))
    }

    /// `S_l(t/r)^r` by applying all `r·Υ·Γ` factors one after another.
    pub fn product_sequential(&self, schedule: &Schedule, t: f64, r: u64) -> Result<DenseOperator> {
        check_time(t, r)?;
        let d = self.matrix_dim()?;
        let rots = self.rotations(schedule, t / r as f64)?;
        let mut m = DenseOperator::identity(d);
        let data = m.matrix_mut().as_mut_slice();
        for _ in 0..r {
            for rot in &rots {
                rot.apply_right(data, d);
            }
        }
        Ok(m)
    }

    /// `S_l(t/r)^r ψ` by state-vector propagation, `O(D)` per factor.
    pub fn evolve_state(
        &self,
        schedule: &Schedule,
        t: f64,
        r: u64,
        state: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        check_time(t, r)?;
        let d = self.dim()?;
        if state.len() != d {
            return Err(Error::Dimension(format!(
                "state of length {} for dimension {d}",
                state.len()
            )));
        }
        let rots = self.rotations(schedule, t / r as f64)?;
        let mut psi = state.to_vec();
        for _ in 0..r {
            // The leftmost factor acts last.
            for rot in rots.iter().rev() {
                rot.apply_vector(&mut psi);
            }
        }
        Ok(psi)
    }
}

fn combine(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = a * b;
    out += a;
    out += b;
    out
}

fn check_time(t: f64, r: u64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::Validation(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    if r == 0 {
        return Err(Error::Validation("Trotter number r must be ≥ 1".into()));
    }
    Ok(())
}

/// `S_l(t/r)^r` for an instance in lexicographic term order.
pub fn trotterized(
    instance: &SykInstance,
    schedule: &Schedule,
    t: f64,
    r: u64,
) -> Result<DenseOperator> {
    trotterized_with_order(instance, schedule, TermOrder::Lexicographic, t, r)
}

/// `S_l(t/r)^r` for an instance swept in the given term order.
pub fn trotterized_with_order(
    instance: &SykInstance,
    schedule: &Schedule,
    order: TermOrder,
    t: f64,
    r: u64,
) -> Result<DenseOperator> {
    TermSequence::new(instance, order)?.product(schedule, t, r)
}

/// Reusable evaluator of Trotter errors for one instance.
///
/// Holds the eigendecomposition of `H` and the swept terms, so scans over
/// `t`, `r` and `l` share one diagonalization.
#[derive(Debug, Clone)]
pub struct ErrorEvaluator {
    spectrum: Spectrum,
    terms: TermSequence,
    dim: usize,
}

impl ErrorEvaluator {
    /// Prepares the evaluator (assembles and diagonalizes `H`).
    pub fn new(instance: &SykInstance, order: TermOrder, cap: usize) -> Result<Self> {
        let h = crate::linalg::assemble_with_cap(instance, cap)?;
        Ok(Self {
            spectrum: Spectrum::new(&h)?,
            terms: TermSequence::new(instance, order)?,
            dim: h.dim(),
        })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The swept terms.
    pub fn terms(&self) -> &TermSequence {
        &self.terms
    }

    /// The eigendecomposition of `H`.
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Unnormalized `‖e^{iHt} − S_l(t/r)^r‖_p`.
    pub fn error_norm(&self, schedule: &Schedule, t: f64, r: u64, p: f64) -> Result<f64> {
        let y = self.terms.product_deviation(schedule, t, r)?;
        let u = self.spectrum.evolution_minus_identity(t);
        schatten_norm(&DenseOperator::from_matrix(u.into_matrix() - y), p)
    }

    /// Normalized `‖e^{iHt} − S_l(t/r)^r‖_p / ‖I‖_p`.
    pub fn observed_error(&self, schedule: &Schedule, t: f64, r: u64, p: f64) -> Result<f64> {
        let norm = self.error_norm(schedule, t, r, p)?;
        Ok(if p.is_infinite() {
            norm
        } else {
            norm / (self.dim as f64).powf(1.0 / p)
        })
    }

    /// `‖(e^{iHt} − S_l(t/r)^r)ψ‖₂` by state-vector propagation.
    pub fn fixed_state_error(
        &self,
        schedule: &Schedule,
        t: f64,
        r: u64,
        state: &[Complex64],
    ) -> Result<f64> {
        check_unit_state(state, self.dim)?;
        let trotter = self.terms.evolve_state(schedule, t, r, state)?;
        let exact = self.spectrum.evolve_state(t, state);
        Ok(exact
            .iter()
            .zip(&trotter)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

fn check_unit_state(state: &[Complex64], dim: usize) -> Result<()> {
    if state.len() != dim {
        return Err(Error::Dimension(format!(
            "state of length {} for dimension {dim}",
            state.len()
        )));
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "state must be normalized, ‖ψ‖ = {norm}"
        )));
    }
    Ok(())
}

/// Normalized Trotter error `‖e^{iHt} − S_l(t/r)^r‖_p / D^{1/p}` of one instance.
pub fn observed_error(instance: &SykInstance, l: usize, t: f64, r: u64, p: f64) -> Result<f64> {
    let eval = ErrorEvaluator::new(instance, TermOrder::Lexicographic, DEFAULT_DIMENSION_CAP)?;
    eval.observed_error(&build_schedule(l, instance.gamma())?, t, r, p)
}

/// `‖(e^{iHt} − S_l(t/r)^r)ψ‖₂` for a normalized state `ψ`.
pub fn fixed_state_error(
    instance: &SykInstance,
    l: usize,
    t: f64,
    r: u64,
    state: &[Complex64],
) -> Result<f64> {
    let eval = ErrorEvaluator::new(instance, TermOrder::Lexicographic, DEFAULT_DIMENSION_CAP)?;
    eval.fixed_state_error(&build_schedule(l, instance.gamma())?, t, r, state)
}
