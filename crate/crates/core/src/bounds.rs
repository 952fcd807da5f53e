//! Closed-form Trotter-error bounds, Trotter-number solver, gate counts,
//! error ratios and log–log fits.
//!
//! Notation: `Γ = C(n,k)` terms, `Q = Q(n,k)` anticommuting partners per
//! term, coupling standard deviation `σ`, Schatten order `p`, time `t`,
//! Trotter number `r`, stage count `Υ(l)`.
//!
//! * First order:
//!   `Δ₁ = 4√2 p² σ² √(ΓQ) t² [1/(2r) + σ√Q t/(3r²)]`.
//! * Even order `l`, with `x = √p σ √Q t/r`:
//!   `Δ_l = 𝒞(l) √p σ t/√Q · (Γ x^l + Γ² x^{l+1})`,
//!   `𝒞(l) = 𝒜(l)/(l+1)`, `𝒜(l) = Υ^{l+3} (l+3)^{1/2} (l+2)^{3(l+2)−1}`.
//! * Sparse model, average error, with `β(l) = (l+3)^{5/2} (l+2)^{2(l+2)}
//!   Υ^{l+3} (l+2)^{3(l+2)/2}/(l+1)`:
//!   - if `p_B Q ≥ 1`, with `y = √p σ √(p_B Q) t/r`:
//!     `β(l) Γ √p σ √p_B t/√Q · (y^l + Γ y^{l+1})`;
//!   - if `p_B Q < 1`, with `z = √p σ t/r`:
//!     `β(l) Γ √p σ t/Q · (z^l + Γ z^{l+1})`.
//!
//! Each bound `Δ` has the form `p·λ(p, r)` required by the concentration
//! argument: choosing `r` with `λ(p★, r)/ε ≤ 1/(e p★)` guarantees
//! `Pr(‖e^{iHt} − S_l(t/r)^r‖ > ε) ≤ δ`, with `p★ = ln(e² 2^{n/2}/δ)` for the
//! operator norm and `p★ = ln(e²/δ)` for a fixed input state.
//!
//! The `l`-dependent constants grow like `(l+2)^{3(l+2)}`, so every
//! higher-order bound is evaluated in log space. With `PrefactorMode::Unit`
//! the constant (`𝒞(l)` or `β(l)`) is replaced by 1. When `Q = 0` all terms
//! commute, the product formula is exact and every bound is 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::NormEstimate;
use crate::math::{binomial, checked_binomial};
use crate::model::{coupling_variance, sparse_probability};
use crate::trotter::stage_count;

/// Number of terms anticommuting with a fixed term:
/// `Q(n,k) = Σ_s C(n−k, k−s) C(k, s)` over `s ∈ [max(0, 2k−n), k−1]` with
/// `s` odd for even `k` and `s` even for odd `k`.
pub fn q_of(n: usize, k: usize) -> u128 {
    let (n64, k64) = (n as u64, k as u64);
    if k == 0 || k > n {
        return 0;
    }
    let mu = (2 * k).saturating_sub(n) as u64;
    let wanted_parity = if k % 2 == 0 { 1 } else { 0 };
    (mu..k64)
        .filter(|s| s % 2 == wanted_parity)
        .map(|s| binomial(n64 - k64, k64 - s) * binomial(k64, s))
        .sum()
}

/// Validates `(n, k)` for bound evaluation. Bounds need no Hilbert space,
/// so `n` is limited only by exact arithmetic: `n` even and positive,
/// `1 ≤ k ≤ min(n, 35)` and `C(n, k)` representable.
pub fn check_bound_size(n: usize, k: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Validation(format!(
            "number of Majoranas must be even and positive, got {n}"
        )));
    }
    if k == 0 || k > n || k > 35 {
        return Err(Error::Validation(format!(
            "locality k = {k} must lie in [1, min(n = {n}, 35)]"
        )));
    }
    if checked_binomial(n as u64, k as u64).is_none() {
        return Err(Error::Resource(format!(
            "C({n},{k}) exceeds 128-bit arithmetic"
        )));
    }
    Ok(())
}

/// Whether the `l`-dependent constant is kept or replaced by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorMode {
    /// Keep `𝒞(l)` / `β(l)`.
    #[default]
    Full,
    /// Replace the constant by 1.
    Unit,
}

/// `ln Υ(l)`.
pub fn ln_stages(l: usize) -> Result<f64> {
    Ok((stage_count(l)? as f64).ln())
}

/// `ln 𝒜(l) = (l+3) ln Υ + ½ ln(l+3) + (3(l+2)−1) ln(l+2)`.
pub fn ln_cal_a(l: usize) -> Result<f64> {
    let lf = l as f64;
    Ok((lf + 3.0) * ln_stages(l)?
        + 0.5 * (lf + 3.0).ln()
        + (3.0 * (lf + 2.0) - 1.0) * (lf + 2.0).ln())
}

/// `ln 𝒞(l) = ln 𝒜(l) − ln(l+1)`.
pub fn ln_cal_c(l: usize) -> Result<f64> {
    Ok(ln_cal_a(l)? - (l as f64 + 1.0).ln())
}

/// `ln α(l)`, `α(l) = Υ^{l+3} (l+2)^{3(l+2)/2}/(l+1)`.
pub fn ln_alpha(l: usize) -> Result<f64> {
    let lf = l as f64;
    Ok((lf + 3.0) * ln_stages(l)? + 1.5 * (lf + 2.0) * (lf + 2.0).ln() - (lf + 1.0).ln())
}

/// `ln α′(l)`, `α′(l) = (l+2)^{2(l+2)} α(l)`.
pub fn ln_alpha_prime(l: usize) -> Result<f64> {
    let lf = l as f64;
    Ok(2.0 * (lf + 2.0) * (lf + 2.0).ln() + ln_alpha(l)?)
}

/// `ln β(l)`, `β(l) = (l+3)^{5/2} α′(l)`.
pub fn ln_beta(l: usize) -> Result<f64> {
    Ok(2.5 * (l as f64 + 3.0).ln() + ln_alpha_prime(l)?)
}

/// Term counts entering the bounds; `(Γ, Q_max)` for a general model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermCounts {
    /// Number of terms Γ.
    pub gamma: f64,
    /// Maximal number of anticommuting partners of a term.
    pub q: f64,
}

impl TermCounts {
    /// `(C(n,k), Q(n,k))` for the SYK model.
    pub fn syk(n: usize, k: usize) -> Self {
        Self {
            gamma: binomial(n as u64, k as u64) as f64,
            q: q_of(n, k) as f64,
        }
    }
}

/// Parameters of a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInput {
    /// Number of Majoranas.
    pub n: usize,
    /// Locality.
    pub k: usize,
    /// Product-formula order.
    pub l: usize,
    /// Schatten / moment order (`p ≥ 2` for the theorem; real to admit `p★`).
    pub p: f64,
    /// Evolution time.
    pub t: f64,
    /// Trotter number.
    pub r: u64,
    /// Energy constant 𝒥.
    pub energy_constant: f64,
    /// Coupling standard deviation.
    pub sigma: f64,
    /// Term-retention probability (sparse model only).
    pub p_b: Option<f64>,
    /// Prefactor handling for higher-order bounds.
    pub prefactor: PrefactorMode,
}

impl BoundInput {
    /// Dense-model input with `σ` derived from `(n, k, 𝒥)`.
    pub fn dense(
        n: usize,
        k: usize,
        l: usize,
        p: f64,
        t: f64,
        r: u64,
        energy_constant: f64,
    ) -> Result<Self> {
        check_bound_size(n, k)?;
        Ok(Self {
            n,
            k,
            l,
            p,
            t,
            r,
            energy_constant,
            sigma: coupling_variance(n, k, energy_constant).sqrt(),
            p_b: None,
            prefactor: PrefactorMode::Full,
        })
    }

    /// Sparse-model input with `p_B = min(1, κn/Γ)` and `σ² = σ²_dense/p_B`.
    #[allow(clippy::too_many_arguments)]
    pub fn sparse(
        n: usize,
        k: usize,
        l: usize,
        p: f64,
        t: f64,
        r: u64,
        energy_constant: f64,
        kappa: f64,
    ) -> Result<Self> {
        let mut input = Self::dense(n, k, l, p, t, r, energy_constant)?;
        let (p_b, _) = sparse_probability(n, k, kappa)?;
        if p_b > 0.0 {
            input.sigma /= p_b.sqrt();
        }
        input.p_b = Some(p_b);
        Ok(input)
    }

    /// Same input with a different prefactor mode.
    pub fn with_prefactor(self, prefactor: PrefactorMode) -> Self {
        Self { prefactor, ..self }
    }

    /// Same input with a different Trotter number.
    pub fn with_r(self, r: u64) -> Self {
        Self { r, ..self }
    }

    /// Same input with a different moment order.
    pub fn with_p(self, p: f64) -> Self {
        Self { p, ..self }
    }

    /// Same input with a different time.
    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    fn check(&self) -> Result<()> {
        check_bound_size(self.n, self.k)?;
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::Validation(format!(
                "moment order p must be finite and ≥ 1, got {}",
                self.p
            )));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Validation(format!(
                "time must be finite and ≥ 0, got {}",
                self.t
            )));
        }
        if self.r == 0 {
            return Err(Error::Validation("Trotter number r must be ≥ 1".into()));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::Validation(format!(
                "sigma must be finite and ≥ 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// First-order bound for a general model with term counts `(Γ, Q_max)`.
pub fn delta1_general(counts: TermCounts, sigma: f64, p: f64, t: f64, r: f64) -> f64 {
    let TermCounts { gamma, q } = counts;
    4.0 * std::f64::consts::SQRT_2
        * p
        * p
        * sigma
        * sigma
        * (gamma * q).sqrt()
        * t
        * t
        * (1.0 / (2.0 * r) + sigma * q.sqrt() * t / (3.0 * r * r))
}

/// Even-order bound for a general model with term counts `(Γ, Q_max)`.
pub fn delta_l_general(
    counts: TermCounts,
    l: usize,
    sigma: f64,
    p: f64,
    t: f64,
    r: f64,
    prefactor: PrefactorMode,
) -> Result<f64> {
    check_even(l)?;
    let TermCounts { gamma, q } = counts;
    if t == 0.0 || sigma == 0.0 || q == 0.0 || gamma == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = match prefactor {
        PrefactorMode::Full => ln_cal_c(l)?,
        PrefactorMode::Unit => 0.0,
    };
    let ln_x = 0.5 * p.ln() + sigma.ln() + 0.5 * q.ln() + t.ln() - r.ln();
    let ln_gamma = gamma.ln();
    let ln_front = ln_pref + 0.5 * p.ln() + sigma.ln() + t.ln() - 0.5 * q.ln();
    // Γ x^l + Γ² x^{l+1} = Γ x^l (1 + Γ x)
    let ln_value = ln_front + ln_gamma + l as f64 * ln_x + softplus(ln_gamma + ln_x);
    Ok(ln_value.exp())
}

/// Regime of the sparse average bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseRegime {
    /// `p_B·Q ≥ 1`.
    Dense,
    /// `p_B·Q < 1`.
    Dilute,
}

/// Regime selected by comparing `p_B·Q` with 1.
pub fn sparse_regime(p_b: f64, q: f64) -> SparseRegime {
    if p_b * q >= 1.0 {
        SparseRegime::Dense
    } else {
        SparseRegime::Dilute
    }
}

/// Sparse average bound in a prescribed regime (both formulas are exposed so
/// that they can be compared at the boundary).
#[allow(clippy::too_many_arguments)]
pub fn delta_sparse_in_regime(
    counts: TermCounts,
    l: usize,
    sigma: f64,
    p_b: f64,
    p: f64,
    t: f64,
    r: f64,
    prefactor: PrefactorMode,
    regime: SparseRegime,
) -> Result<f64> {
    check_even(l)?;
    let TermCounts { gamma, q } = counts;
    if t == 0.0 || sigma == 0.0 || q == 0.0 || gamma == 0.0 || p_b == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = match prefactor {
        PrefactorMode::Full => ln_beta(l)?,
        PrefactorMode::Unit => 0.0,
    };
    let ln_gamma = gamma.ln();
    let base = 0.5 * p.ln() + sigma.ln() + t.ln();
    let (ln_front, ln_y) = match regime {
        SparseRegime::Dense => (
            ln_pref + ln_gamma + base + 0.5 * p_b.ln() - 0.5 * q.ln(),
            base + 0.5 * (p_b * q).ln() - r.ln(),
        ),
        SparseRegime::Dilute => (ln_pref + ln_gamma + base - q.ln(), base - r.ln()),
    };
    // y^l + Γ y^{l+1} = y^l (1 + Γ y)
    Ok((ln_front + l as f64 * ln_y + softplus(ln_gamma + ln_y)).exp())
}

fn check_even(l: usize) -> Result<()> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::Validation(format!(
            "higher-order bounds need even l ≥ 2, got {l}"
        )));
    }
    stage_count(l).map(|_| ())
}

/// First-order dense bound `Δ₁`.
pub fn delta1_dense(input: &BoundInput) -> Result<f64> {
    input.check()?;
    if input.l != 1 {
        return Err(Error::Validation(format!(
            "first-order bound requested with l = {}",
            input.l
        )));
    }
    Ok(delta1_general(
        TermCounts::syk(input.n, input.k),
        input.sigma,
        input.p,
        input.t,
        input.r as f64,
    ))
}

/// Even-order dense bound `Δ_l`.
pub fn delta_l_dense(input: &BoundInput) -> Result<f64> {
    input.check()?;
    delta_l_general(
        TermCounts::syk(input.n, input.k),
        input.l,
        input.sigma,
        input.p,
        input.t,
        input.r as f64,
        input.prefactor,
    )
}

/// Even-order sparse average bound, regime chosen from `p_B·Q(n,k)`.
pub fn delta_l_sparse(input: &BoundInput) -> Result<f64> {
    input.check()?;
    let p_b = input
        .p_b
        .ok_or_else(|| Error::Validation("sparse bound requires p_B".into()))?;
    if !(0.0..=1.0).contains(&p_b) {
        return Err(Error::Validation(format!("p_B = {p_b} outside [0, 1]")));
    }
    let counts = TermCounts::syk(input.n, input.k);
    delta_sparse_in_regime(
        counts,
        input.l,
        input.sigma,
        p_b,
        input.p,
        input.t,
        input.r as f64,
        input.prefactor,
        sparse_regime(p_b, counts.q),
    )
}

/// Which bound a [`BoundInput`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    /// `Δ₁` (l = 1).
    FirstOrder,
    /// `Δ_l` for the dense model.
    HigherOrderDense,
    /// Sparse average bound.
    SparseAverage,
}

impl BoundFamily {
    /// Family implied by the order and the presence of `p_B`.
    pub fn of(input: &BoundInput) -> Result<Self> {
        match (input.l, input.p_b) {
            (1, None) => Ok(BoundFamily::FirstOrder),
            (1, Some(_)) => Err(Error::Validation(
                "no closed-form first-order bound for the sparse model; use the per-sample general bound".into(),
            )),
            (_, None) => Ok(BoundFamily::HigherOrderDense),
            (_, Some(_)) => Ok(BoundFamily::SparseAverage),
        }
    }
}

/// Evaluates the bound selected by [`BoundFamily::of`].
pub fn delta(input: &BoundInput) -> Result<f64> {
    match BoundFamily::of(input)? {
        BoundFamily::FirstOrder => delta1_dense(input),
        BoundFamily::HigherOrderDense => delta_l_dense(input),
        BoundFamily::SparseAverage => delta_l_sparse(input),
    }
}

/// `λ(p, r) = Δ(p, r)/p`.
pub fn lambda(input: &BoundInput, p: f64, r: u64) -> Result<f64> {
    Ok(delta(&input.with_p(p).with_r(r))? / p)
}

/// Norm in which the Trotter error is to be controlled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Operator (spectral) norm, `p★ = ln(e² 2^{n/2}/δ)`.
    OperatorNorm,
    /// Fixed input state, `p★ = ln(e²/δ)`.
    FixedState,
}

/// Inputs of the Trotter-number solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverInput {
    /// Target error ε.
    pub epsilon: f64,
    /// Failure probability δ.
    pub delta: f64,
    /// Norm mode.
    pub mode: SolverMode,
    /// Bound parameters (`p` and `r` are ignored).
    pub bound: BoundInput,
}

/// Result of the Trotter-number solver with its back-substitution check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOutput {
    /// Minimal Trotter number.
    pub r: u64,
    /// Moment order `p★` used.
    pub p_star: f64,
    /// `λ(p★, r)/ε`.
    pub lhs: f64,
    /// `λ(p★, r−1)/ε` (infinite when `r = 1`).
    pub lhs_previous: f64,
    /// `1/(e p★)`.
    pub rhs: f64,
}

impl SolverInput {
    /// `p★` for this mode.
    pub fn p_star(&self) -> f64 {
        let ln_d = match self.mode {
            SolverMode::OperatorNorm => (self.bound.n / 2) as f64 * std::f64::consts::LN_2,
            SolverMode::FixedState => 0.0,
        };
        2.0 + ln_d - self.delta.ln()
    }
}

/// Closed-form sufficient Trotter number for the first-order bound:
/// `e·4√2 p² σ² √(ΓQ) t²/(2ε) + (e·4√2 p² σ³ √Γ Q t³/(3ε))^{1/2}`.
pub fn first_order_seed(counts: TermCounts, sigma: f64, p: f64, t: f64, epsilon: f64) -> f64 {
    let e = std::f64::consts::E;
    let c = e * 4.0 * std::f64::consts::SQRT_2 * p * p;
    c * sigma * sigma * (counts.gamma * counts.q).sqrt() * t * t / (2.0 * epsilon)
        + (c * sigma.powi(3) * counts.gamma.sqrt() * counts.q * t.powi(3) / (3.0 * epsilon)).sqrt()
}

/// Minimal `r ≥ 1` with `λ(p★, r)/ε ≤ 1/(e p★)` for a positive, strictly
/// decreasing `λ(p★, ·)`, by exponential bracketing from `start` and
/// bisection. A detected increase of `λ` is a contract error.
pub fn solve_with<F>(lambda_at: F, p_star: f64, epsilon: f64, start: u64) -> Result<SolverOutput>
where
    F: Fn(u64) -> Result<f64>,
{
    let rhs = 1.0 / (std::f64::consts::E * p_star);
    let ratio = |r: u64| -> Result<f64> {
        let v = lambda_at(r)?;
        if !(v >= 0.0) {
            return Err(Error::Contract(format!(
                "λ(p★, {r}) = {v} is not a nonnegative number"
            )));
        }
        Ok(v / epsilon)
    };
    let feasible = |v: f64| v <= rhs;
    // Bracket [lo, hi] with lo infeasible (or 0) and hi feasible.
    let mut hi = start.max(1);
    let mut v_hi = ratio(hi)?;
    let mut lo = 0u64;
    while !feasible(v_hi) {
        lo = hi;
        let next = hi
            .checked_mul(2)
            .filter(|&x| x < (1u64 << 62))
            .ok_or_else(|| {
                Error::Contract(
                    "λ(p★, r) does not fall below the target for any representable r".into(),
                )
            })?;
        let v_next = ratio(next)?;
        if v_next > v_hi {
            return Err(Error::Contract(format!(
                "λ increases between r = {hi} and r = {next}"
            )));
        }
        hi = next;
        v_hi = v_next;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let v_mid = ratio(mid)?;
        if feasible(v_mid) {
            hi = mid;
            v_hi = v_mid;
        } else {
            lo = mid;
        }
    }
    let lhs_previous = if hi > 1 {
        ratio(hi - 1)?
    } else {
        f64::INFINITY
    };
    if !feasible(v_hi) || feasible(lhs_previous) {
        return Err(Error::Contract(format!(
            "λ is not monotone near r = {hi}: λ/ε = {v_hi}, previous {lhs_previous}, target {rhs}"
        )));
    }
    Ok(SolverOutput {
        r: hi,
        p_star,
        lhs: v_hi,
        lhs_previous,
        rhs,
    })
}

/// Minimal Trotter number for a bound family and concentration mode.
pub fn solve_trotter_number(input: &SolverInput) -> Result<SolverOutput> {
    if !(input.epsilon > 0.0) || !input.epsilon.is_finite() {
        return Err(Error::Validation(format!(
            "epsilon must be positive, got {}",
            input.epsilon
        )));
    }
    if !(input.delta > 0.0 && input.delta < 1.0) {
        return Err(Error::Validation(format!(
            "delta must lie in (0, 1), got {}",
            input.delta
        )));
    }
    let p_star = input.p_star();
    let bound = input.bound.with_p(p_star).with_r(1);
    let family = BoundFamily::of(&bound)?;
    bound.check()?;
    let start = match family {
        BoundFamily::FirstOrder => {
            let seed = first_order_seed(
                TermCounts::syk(bound.n, bound.k),
                bound.sigma,
                p_star,
                bound.t,
                input.epsilon,
            );
            if seed.is_finite() && seed < (1u64 << 61) as f64 {
                seed.ceil().max(1.0) as u64
            } else {
                1
            }
        }
        _ => 1,
    };
    solve_with(|r| lambda(&bound, p_star, r), p_star, input.epsilon, start)
}

/// Fermion-to-qubit mapping overhead applied to gate counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Overhead {
    /// No overhead (count local exponentials).
    #[default]
    None,
    /// `log₂ n` (ternary-tree style mappings).
    LogN,
    /// `n` (Jordan–Wigner strings).
    LinearN,
}

impl Overhead {
    /// All modes, in a fixed order.
    pub const ALL: [Overhead; 3] = [Overhead::None, Overhead::LogN, Overhead::LinearN];

    /// Multiplicative factor for `n` Majoranas.
    pub fn factor(&self, n: usize) -> f64 {
        match self {
            Overhead::None => 1.0,
            Overhead::LogN => (n as f64).log2(),
            Overhead::LinearN => n as f64,
        }
    }

    /// Short name.
    pub fn name(&self) -> &'static str {
        match self {
            Overhead::None => "none",
            Overhead::LogN => "log_n",
            Overhead::LinearN => "linear_n",
        }
    }
}

/// Gate count `Υ(l)·Γ·r` times the mapping overhead.
pub fn gate_count(l: usize, gamma: f64, r: f64, overhead: Overhead, n: usize) -> Result<f64> {
    Ok(stage_count(l)? as f64 * gamma * r * overhead.factor(n))
}

/// An error ratio `η = observed/bound` with its propagated standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRatio {
    /// `η`.
    pub value: f64,
    /// `stderr(observed)/bound`.
    pub stderr: f64,
}

/// `η = observed/bound`.
pub fn error_ratio(observed: &NormEstimate, bound: f64) -> Result<ErrorRatio> {
    if !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::Validation(format!(
            "bound must be finite and ≥ 0, got {bound}"
        )));
    }
    if bound == 0.0 {
        if observed.value == 0.0 {
            return Ok(ErrorRatio {
                value: 0.0,
                stderr: 0.0,
            });
        }
        return Err(Error::RatioUndefined(format!(
            "observed {} against a zero bound",
            observed.value
        )));
    }
    Ok(ErrorRatio {
        value: observed.value / bound,
        stderr: observed.stderr / bound,
    })
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    /// Fitted exponent.
    pub slope: f64,
    /// Fitted `ln` prefactor.
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
}

/// Fits `ln y = slope·ln x + intercept`; needs ≥ 3 positive points with
/// distinct `x`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::Validation(format!(
            "a log–log fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Validation(
            "log–log fit requires finite positive x and y".into(),
        ));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-24 * n {
        return Err(Error::Validation(
            "degenerate x values in log–log fit".into(),
        ));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LogLogFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::term_operator;
    use crate::model::ordering_map;

    fn q_bruteforce_all(n: usize, k: usize) -> Vec<usize> {
        let map = ordering_map(n, k).unwrap();
        let terms: Vec<_> = map
            .edges()
            .iter()
            .map(|e| term_operator(e, n).unwrap().pauli)
            .collect();
        terms
            .iter()
            .map(|a| terms.iter().filter(|b| !a.commutes(b).unwrap()).count())
            .collect()
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_of(2, 2), 0);
        assert_eq!(q_of(6, 4), 8);
        for n in (2..=20).step_by(2) {
            assert_eq!(q_of(n, 1), n as u128 - 1);
        }
    }

    #[test]
    fn q_matches_bruteforce_small() {
        for n in (2..=10).step_by(2) {
            for k in 1..=n.min(5) {
                let counts = q_bruteforce_all(n, k);
                assert!(
                    counts.iter().all(|&c| c as u128 == q_of(n, k)),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn prefactor_constants() {
        // 𝒞(2) = 2^5 · √5 · 4^{11} / 3
        let c2 = 32.0 * 5f64.sqrt() * 4f64.powi(11) / 3.0;
        assert!((ln_cal_c(2).unwrap().exp() / c2 - 1.0).abs() < 1e-12);
        // β(2) = 5^{5/2} · 4^8 · 2^5 · 4^6 / 3
        let b2 = 5f64.powf(2.5) * 4f64.powi(8) * 32.0 * 4f64.powi(6) / 3.0;
        assert!((ln_beta(2).unwrap().exp() / b2 - 1.0).abs() < 1e-12);
        // α(4) = 10^7 · 6^9 / 5
        let a4 = 1e7 * 6f64.powi(9) / 5.0;
        assert!((ln_alpha(4).unwrap().exp() / a4 - 1.0).abs() < 1e-12);
        assert!(ln_cal_c(3).is_err());
        // Huge orders stay finite in log space.
        assert!(ln_cal_c(20).unwrap().is_finite());
    }

    #[test]
    fn delta1_examples() {
        let input = BoundInput::dense(10, 4, 1, 2.0, 1.0, 100_000, 1.0).unwrap();
        let (p, t, r) = (2.0f64, 1.0f64, 1e5f64);
        let sigma2 = 6.0 / 4000.0;
        let (gamma, q) = (210.0f64, q_of(10, 4) as f64);
        let oracle = 4.0 * 2f64.sqrt() * p.powi(2) * sigma2 * (gamma * q).sqrt() * t.powi(2)
            / (2.0 * r)
            + 4.0 * 2f64.sqrt() * p.powi(2) * sigma2.powf(1.5) * gamma.sqrt() * q * t.powi(3)
                / (3.0 * r * r);
        let value = delta1_dense(&input).unwrap();
        assert!((value - oracle).abs() <= 1e-12 * oracle);
        assert_eq!(delta1_dense(&input.with_t(0.0)).unwrap(), 0.0);
        let half = delta1_dense(&input.with_r(200_000)).unwrap();
        assert!((value / half - 2.0).abs() < 0.02);
        assert!(delta1_dense(&input.with_r(0)).is_err());
        let mut l2 = input;
        l2.l = 2;
        assert!(delta1_dense(&l2).is_err());
    }

    #[test]
    fn delta_l_examples() {
        let base = BoundInput::dense(12, 4, 2, 2.0, 1.0, 100, 1.0).unwrap();
        assert_eq!(delta_l_dense(&base.with_t(0.0)).unwrap(), 0.0);
        let mut prev = f64::INFINITY;
        for r in [10u64, 100, 1000, 10_000, 100_000, 10_000_000] {
            let v = delta_l_dense(&base.with_r(r)).unwrap();
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        // Large r: the leading term decays as r^{−l}.
        let ratio = delta_l_dense(&base.with_r(10_000_000)).unwrap()
            / delta_l_dense(&base.with_r(100_000)).unwrap();
        assert!((ratio / 1e-4 - 1.0).abs() < 0.01, "{ratio}");
        assert!(
            delta_l_dense(&BoundInput::dense(500, 4, 2, 2.0, 1.0, 100, 1.0).unwrap()).unwrap()
                > 0.0
        );
        assert!(BoundInput::dense(1000, 500, 2, 2.0, 1.0, 100, 1.0).is_err());
        let mut odd = base;
        odd.l = 3;
        assert!(delta_l_dense(&odd).is_err());
        // Direct evaluation for a moderate case.
        let (p, s, t, r) = (2.0f64, base.sigma, 1.0f64, 100.0f64);
        let (g, q) = (binomial(12, 4) as f64, q_of(12, 4) as f64);
        let x = p.sqrt() * s * q.sqrt() * t / r;
        let direct = ln_cal_c(2).unwrap().exp() * p.sqrt() * s * t / q.sqrt()
            * (g * x.powi(2) + g * g * x.powi(3));
        assert!((delta_l_dense(&base).unwrap() / direct - 1.0).abs() < 1e-12);
        let unit = delta_l_dense(&base.with_prefactor(PrefactorMode::Unit)).unwrap();
        assert!((delta_l_dense(&base).unwrap() / unit - ln_cal_c(2).unwrap().exp()).abs() < 1e-3);
    }

    #[test]
    fn bounds_are_monotone() {
        for l in [1usize, 2, 4] {
            let base = BoundInput::dense(10, 4, l, 2.0, 1.0, 1000, 1.0).unwrap();
            let f = |b: &BoundInput| delta(b).unwrap();
            assert!(f(&base.with_t(2.0)) >= f(&base));
            assert!(f(&base.with_r(2000)) <= f(&base));
            assert!(f(&base.with_p(4.0)) >= f(&base));
        }
        for l in [2usize, 4] {
            let base = BoundInput::sparse(10, 4, l, 2.0, 1.0, 1000, 1.0, 4.0).unwrap();
            let f = |b: &BoundInput| delta(b).unwrap();
            assert!(f(&base.with_t(2.0)) >= f(&base));
            assert!(f(&base.with_r(2000)) <= f(&base));
            assert!(f(&base.with_p(4.0)) >= f(&base));
        }
    }

    #[test]
    fn sparse_examples() {
        let s = BoundInput::sparse(10, 4, 2, 2.0, 1.0, 1000, 1.0, 4.0).unwrap();
        assert_eq!(delta_l_sparse(&s.with_t(0.0)).unwrap(), 0.0);
        let mut missing = s;
        missing.p_b = None;
        assert!(delta_l_sparse(&missing).is_err());
        // p_B = 1: ratio to the dense bound is β(l)/𝒞(l) for every (n, t, r).
        let expected = (ln_beta(2).unwrap() - ln_cal_c(2).unwrap()).exp();
        for (n, t, r) in [(8usize, 1.0, 100u64), (10, 3.0, 1000), (14, 0.5, 50)] {
            let mut d = BoundInput::dense(n, 4, 2, 2.0, t, r, 1.0).unwrap();
            let dense = delta_l_dense(&d).unwrap();
            d.p_b = Some(1.0);
            let sparse = delta_l_sparse(&d).unwrap();
            assert!((sparse / dense / expected - 1.0).abs() < 1e-10);
        }
        // Continuity at p_B·Q = 1.
        let counts = TermCounts::syk(10, 4);
        let p_b = 1.0 / counts.q;
        let args = (counts, 2usize, 0.1f64, p_b, 2.0f64, 1.0f64, 100.0f64);
        let a = delta_sparse_in_regime(
            args.0,
            args.1,
            args.2,
            args.3,
            args.4,
            args.5,
            args.6,
            PrefactorMode::Unit,
            SparseRegime::Dense,
        )
        .unwrap();
        let b = delta_sparse_in_regime(
            args.0,
            args.1,
            args.2,
            args.3,
            args.4,
            args.5,
            args.6,
            PrefactorMode::Unit,
            SparseRegime::Dilute,
        )
        .unwrap();
        assert!((a / b - 1.0).abs() < 1e-12);
        assert_eq!(sparse_regime(p_b, counts.q), SparseRegime::Dense);
        assert_eq!(sparse_regime(0.5 * p_b, counts.q), SparseRegime::Dilute);
    }

    #[test]
    fn solver_inverts_simple_rational() {
        for (a, eps, p) in [(3.0, 0.1, 2.5), (0.01, 1e-3, 7.3), (120.0, 2.0, 3.0)] {
            let out = solve_with(|r| Ok(a / r as f64), p, eps, 1).unwrap();
            let expected = (std::f64::consts::E * p * a / eps).ceil() as u64;
            assert_eq!(out.r, expected);
        }
        assert!(matches!(
            solve_with(|r| Ok(r as f64), 3.0, 0.1, 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn solver_minimality_and_monotonicity() {
        for (n, l) in [(8usize, 1usize), (10, 2), (12, 4)] {
            let mut previous = u64::MAX;
            for eps in [1e-3, 1e-2, 1e-1] {
                let bound = BoundInput::dense(n, 4, l, 2.0, 1.0, 1, 1.0).unwrap();
                let out = solve_trotter_number(&SolverInput {
                    epsilon: eps,
                    delta: 0.05,
                    mode: SolverMode::OperatorNorm,
                    bound,
                })
                .unwrap();
                assert!(out.lhs <= out.rhs && out.lhs_previous > out.rhs);
                assert!(out.r <= previous);
                previous = out.r;
                let fixed = solve_trotter_number(&SolverInput {
                    epsilon: eps,
                    delta: 0.05,
                    mode: SolverMode::FixedState,
                    bound,
                })
                .unwrap();
                assert!(fixed.r <= out.r);
            }
        }
    }

    #[test]
    fn first_order_seed_is_sufficient() {
        let bound = BoundInput::dense(10, 4, 1, 2.0, 5.0, 1, 1.0).unwrap();
        let input = SolverInput {
            epsilon: 1e-2,
            delta: 0.1,
            mode: SolverMode::OperatorNorm,
            bound,
        };
        let p = input.p_star();
        let seed =
            first_order_seed(TermCounts::syk(10, 4), bound.sigma, p, 5.0, 1e-2).ceil() as u64;
        let out = solve_trotter_number(&input).unwrap();
        assert!(out.r <= seed);
        assert!(lambda(&bound, p, seed).unwrap() / 1e-2 <= out.rhs);
    }

    #[test]
    fn gate_count_examples() {
        assert_eq!(
            gate_count(2, 70.0, 100.0, Overhead::None, 8).unwrap(),
            14000.0
        );
        let none = gate_count(1, 70.0, 100.0, Overhead::None, 8).unwrap();
        let log = gate_count(1, 70.0, 100.0, Overhead::LogN, 8).unwrap();
        assert!((log / none - 3.0).abs() < 1e-15);
        assert_eq!(gate_count(4, 1.0, 1.0, Overhead::None, 8).unwrap(), 10.0);
        assert_eq!(gate_count(2, 1.0, 1.0, Overhead::LinearN, 8).unwrap(), 16.0);
    }

    #[test]
    fn error_ratio_examples() {
        let obs = |v: f64| NormEstimate {
            value: v,
            stderr: 0.1 * v,
            num_samples: 4,
            p: 2.0,
        };
        assert_eq!(error_ratio(&obs(0.0), 1.0).unwrap().value, 0.0);
        assert_eq!(error_ratio(&obs(0.3), 0.3).unwrap().value, 1.0);
        assert!(matches!(
            error_ratio(&obs(0.3), 0.0),
            Err(Error::RatioUndefined(_))
        ));
    }

    #[test]
    fn loglog_fit_examples() {
        let sq: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, (i * i) as f64)).collect();
        let fit = loglog_fit(&sq).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && fit.residual < 1e-12);
        let flat: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 3.5)).collect();
        assert!(loglog_fit(&flat).unwrap().slope.abs() < 1e-12);
        assert!(loglog_fit(&sq[..2]).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        let base = BoundInput::dense(8, 4, 1, 2.0, 1.0, 10_000, 1.0).unwrap();
        let pts: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let t = 10f64 * 100f64.powf(i as f64 / 7.0);
                (t, delta1_dense(&base.with_t(t)).unwrap())
            })
            .collect();
        let s = loglog_fit(&pts).unwrap().slope;
        assert!((2.0..=3.0).contains(&s), "{s}");
    }
}
