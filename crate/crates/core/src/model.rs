//! Hyperedge ordering and sampling of dense and sparse SYK instances.
//!
//! The SYK Hamiltonian on `n` Majoranas with locality `k` is
//! `H = Σ_i b_i J_{γ(i)} K_{γ(i)}`, where `γ` enumerates the `Γ = C(n,k)`
//! hyperedges lexicographically, the couplings are i.i.d. Gaussian with
//! variance `σ² = (k−1)! 𝒥² / (k n^{k−1})`, and `b_i ≡ 1` for the dense model.
//!
//! The sparse model keeps each term independently with probability
//! `p_B = min(1, κn/Γ)` and rescales the variance to `σ²/p_B`, so that
//! `p_B·E[J²]` equals the dense variance.
//!
//! Couplings are drawn from stream 0 and the Bernoulli mask from stream 1 of
//! the instance seed (see [`crate::rng`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{check_majorana_count, term_operator, TermOperator};
use crate::math::{binomial, factorial};
use crate::rng::StreamRng;

const COUPLING_STREAM: u64 = 0;
const MASK_STREAM: u64 = 1;
const ORDER_STREAM: u64 = 2;

/// Validates `(n, k)`: `n` even and positive, `1 ≤ k ≤ n`.
pub fn check_model_size(n: usize, k: usize) -> Result<()> {
    check_majorana_count(n)?;
    if k == 0 || k > n {
        return Err(Error::Validation(format!(
            "locality k = {k} must lie in [1, n = {n}]"
        )));
    }
    Ok(())
}

/// Number of terms `Γ = C(n, k)` as `usize`.
pub fn term_count(n: usize, k: usize) -> Result<usize> {
    let gamma = binomial(n as u64, k as u64);
    usize::try_from(gamma)
        .map_err(|_| Error::Resource(format!("C({n},{k}) = {gamma} terms cannot be enumerated")))
}

/// The lexicographic enumeration `γ` of all k-subsets of `{1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingMap {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
}

/// Enumerates the k-subsets of `{1, …, n}` in lexicographic order.
pub fn ordering_map(n: usize, k: usize) -> Result<OrderingMap> {
    check_model_size(n, k)?;
    let gamma = term_count(n, k)?;
    if gamma > 50_000_000 {
        return Err(Error::Resource(format!(
            "C({n},{k}) = {gamma} hyperedges is too many to enumerate"
        )));
    }
    let mut edges = Vec::with_capacity(gamma);
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        edges.push(current.clone());
        // Advance to the next k-subset in lexicographic order.
        let mut pos = k;
        while pos > 0 && current[pos - 1] == n - k + pos {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        current[pos - 1] += 1;
        for j in pos..k {
            current[j] = current[j - 1] + 1;
        }
    }
    debug_assert_eq!(edges.len(), gamma);
    Ok(OrderingMap { n, k, edges })
}

impl OrderingMap {
    /// Number of Majoranas.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Locality.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Period `Γ = C(n, k)`.
    pub fn period(&self) -> usize {
        self.edges.len()
    }

    /// All hyperedges, position `i−1` holding `γ(i)`.
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// `γ(i)` for any `i ≥ 1`, extended periodically: `γ(i + qΓ) = γ(i)`.
    pub fn gamma(&self, i: usize) -> Result<&[usize]> {
        if i == 0 {
            return Err(Error::Validation(
                "the ordering map is indexed from 1".into(),
            ));
        }
        Ok(&self.edges[(i - 1) % self.edges.len()])
    }

    /// Term operators in ordering-map order.
    pub fn term_operators(&self) -> Result<Vec<TermOperator>> {
        self.edges
            .iter()
            .map(|e| term_operator(e, self.n))
            .collect()
    }
}

/// Order in which the Γ terms are swept by a product formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TermOrder {
    /// The lexicographic ordering map itself.
    #[default]
    Lexicographic,
    /// Lexicographic order reversed.
    Reverse,
    /// A uniformly random permutation drawn from `seed`.
    Shuffled {
        /// Seed of the permutation.
        seed: u64,
    },
}

impl TermOrder {
    /// Permutation mapping sweep position to lexicographic term index.
    pub fn permutation(&self, gamma: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..gamma).collect();
        match *self {
            TermOrder::Lexicographic => {}
            TermOrder::Reverse => perm.reverse(),
            TermOrder::Shuffled { seed } => {
                let mut rng = StreamRng::new(seed, ORDER_STREAM);
                for i in (1..gamma).rev() {
                    let j = rng.below(i as u64 + 1) as usize;
                    perm.swap(i, j);
                }
            }
        }
        perm
    }
}

/// Per-term coupling variance of the dense model, `(k−1)! 𝒥² / (k n^{k−1})`.
pub fn coupling_variance(n: usize, k: usize, energy_constant: f64) -> f64 {
    let fact = factorial((k - 1) as u64) as f64;
    fact * energy_constant * energy_constant / (k as f64 * (n as f64).powi(k as i32 - 1))
}

/// Term-retention probability of the sparse model, `min(1, κn/Γ)`, and
/// whether the clamp at 1 was applied.
pub fn sparse_probability(n: usize, k: usize, kappa: f64) -> Result<(f64, bool)> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::Validation(format!(
            "kappa must be finite and ≥ 0, got {kappa}"
        )));
    }
    let gamma = binomial(n as u64, k as u64) as f64;
    let raw = kappa * n as f64 / gamma;
    Ok(if raw > 1.0 { (1.0, true) } else { (raw, false) })
}

/// A sampled SYK Hamiltonian.
///
/// `couplings[i]` belongs to the lexicographic hyperedge at position `i`.
/// For the sparse model `mask[i] ∈ {0, 1}` and `p_B` are present.
/// When `κ = 0` the sparse model has `p_B = 0`, an all-zero mask and the
/// unrenormalized dense `σ` (the Hamiltonian vanishes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SykInstance {
    /// Number of Majoranas (even).
    pub n: usize,
    /// Locality of each term.
    pub k: usize,
    /// Energy constant 𝒥.
    pub energy_constant: f64,
    /// Per-term coupling standard deviation.
    pub sigma: f64,
    /// Couplings in lexicographic hyperedge order.
    pub couplings: Vec<f64>,
    /// Bernoulli mask of the sparse model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<u8>>,
    /// Retention probability of the sparse model.
    #[serde(rename = "p_B", default, skip_serializing_if = "Option::is_none")]
    pub p_b: Option<f64>,
    /// Seed the instance was drawn from.
    pub seed: u64,
    /// Set when `κn > Γ` forced `p_B` to be clamped at 1.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub p_b_clamped: bool,
}

fn check_energy(energy_constant: f64) -> Result<()> {
    if !(energy_constant > 0.0) || !energy_constant.is_finite() {
        return Err(Error::Validation(format!(
            "energy constant must be positive, got {energy_constant}"
        )));
    }
    Ok(())
}

fn gaussian_couplings(gamma: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = StreamRng::new(seed, COUPLING_STREAM);
    (0..gamma).map(|_| sigma * rng.standard_normal()).collect()
}

/// Draws a Bernoulli(`p_b`) mask of length `gamma` from `seed`.
pub fn bernoulli_mask(gamma: usize, p_b: f64, seed: u64) -> Vec<u8> {
    let mut rng = StreamRng::new(seed, MASK_STREAM);
    (0..gamma).map(|_| u8::from(rng.bernoulli(p_b))).collect()
}

/// Samples a dense SYK instance.
pub fn sample_dense(n: usize, k: usize, energy_constant: f64, seed: u64) -> Result<SykInstance> {
    check_model_size(n, k)?;
    check_energy(energy_constant)?;
    let gamma = term_count(n, k)?;
    let sigma = coupling_variance(n, k, energy_constant).sqrt();
    Ok(SykInstance {
        n,
        k,
        energy_constant,
        sigma,
        couplings: gaussian_couplings(gamma, sigma, seed),
        mask: None,
        p_b: None,
        seed,
        p_b_clamped: false,
    })
}

/// Samples a sparse SYK instance with mask and couplings from one seed.
pub fn sample_sparse(
    n: usize,
    k: usize,
    energy_constant: f64,
    kappa: f64,
    seed: u64,
) -> Result<SykInstance> {
    sample_sparse_split(n, k, energy_constant, kappa, seed, seed)
}

/// Samples a sparse SYK instance whose mask and couplings come from
/// independent seeds, so that the Gaussian disorder can be resampled
/// under a fixed Bernoulli mask. The recorded `seed` is `coupling_seed`.
pub fn sample_sparse_split(
    n: usize,
    k: usize,
    energy_constant: f64,
    kappa: f64,
    mask_seed: u64,
    coupling_seed: u64,
) -> Result<SykInstance> {
    check_model_size(n, k)?;
    check_energy(energy_constant)?;
    let gamma = term_count(n, k)?;
    let (p_b, clamped) = sparse_probability(n, k, kappa)?;
    if clamped {
        log::warn!("sparse SYK n={n} k={k} kappa={kappa}: κn exceeds C(n,k), p_B clamped to 1");
    }
    let base = coupling_variance(n, k, energy_constant);
    let sigma = if p_b > 0.0 {
        (base / p_b).sqrt()
    } else {
        base.sqrt()
    };
    Ok(SykInstance {
        n,
        k,
        energy_constant,
        sigma,
        couplings: gaussian_couplings(gamma, sigma, coupling_seed),
        mask: Some(bernoulli_mask(gamma, p_b, mask_seed)),
        p_b: Some(p_b),
        seed: coupling_seed,
        p_b_clamped: clamped,
    })
}

impl SykInstance {
    /// Number of terms `Γ`.
    pub fn gamma(&self) -> usize {
        self.couplings.len()
    }

    /// True for the sparse model.
    pub fn is_sparse(&self) -> bool {
        self.mask.is_some()
    }

    /// Effective term weights `b_i J_i` in lexicographic order.
    pub fn weights(&self) -> Vec<f64> {
        match &self.mask {
            None => self.couplings.clone(),
            Some(mask) => self
                .couplings
                .iter()
                .zip(mask)
                .map(|(&j, &b)| if b == 0 { 0.0 } else { j })
                .collect(),
        }
    }

    /// Number of retained terms.
    pub fn active_terms(&self) -> usize {
        match &self.mask {
            None => self.gamma(),
            Some(mask) => mask.iter().filter(|&&b| b != 0).count(),
        }
    }

    /// Structural consistency checks, used after deserialization.
    pub fn validate(&self) -> Result<()> {
        check_model_size(self.n, self.k)?;
        check_energy(self.energy_constant)?;
        let gamma = term_count(self.n, self.k)?;
        if self.couplings.len() != gamma {
            return Err(Error::Validation(format!(
                "{} couplings for C({},{}) = {gamma} terms",
                self.couplings.len(),
                self.n,
                self.k
            )));
        }
        if self.couplings.iter().any(|c| !c.is_finite()) || !(self.sigma >= 0.0) {
            return Err(Error::Validation(
                "couplings and sigma must be finite".into(),
            ));
        }
        match (&self.mask, self.p_b) {
            (None, None) => {}
            (Some(mask), Some(p)) => {
                if mask.len() != gamma || mask.iter().any(|&b| b > 1) {
                    return Err(Error::Validation(
                        "mask must be a 0/1 vector of length Γ".into(),
                    ));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!("p_B = {p} outside [0, 1]")));
                }
            }
            _ => {
                return Err(Error::Validation(
                    "mask and p_B must be given together".into(),
                ))
            }
        }
        Ok(())
    }

    /// Serializes to a JSON document.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Parses and validates a JSON document produced by [`SykInstance::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: SykInstance = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("instance JSON: {e}")))?;
        inst.validate()?;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ordering_maps() {
        let m = ordering_map(4, 2).unwrap();
        assert_eq!(m.period(), 6);
        assert_eq!(m.gamma(1).unwrap(), &[1, 2]);
        assert_eq!(m.gamma(6).unwrap(), &[3, 4]);
        assert_eq!(m.gamma(7).unwrap(), m.gamma(1).unwrap());
        assert_eq!(m.gamma(6 * 5 + 4).unwrap(), m.gamma(4).unwrap());
        assert_eq!(ordering_map(8, 4).unwrap().period(), 70);
        assert!(ordering_map(5, 2).is_err());
        assert!(ordering_map(4, 0).is_err());
        assert!(ordering_map(4, 5).is_err());
        assert!(m.gamma(0).is_err());
    }

    #[test]
    fn ordering_is_strictly_lexicographic() {
        for (n, k) in [(6, 3), (10, 4), (8, 1), (8, 8)] {
            let m = ordering_map(n, k).unwrap();
            assert_eq!(m.period() as u128, binomial(n as u64, k as u64));
            for w in m.edges().windows(2) {
                assert!(w[0] < w[1]);
            }
            for e in m.edges() {
                assert!(e.windows(2).all(|p| p[0] < p[1]));
                assert!(e[0] >= 1 && *e.last().unwrap() <= n);
            }
        }
    }

    #[test]
    fn term_orders_are_permutations() {
        for order in [
            TermOrder::Lexicographic,
            TermOrder::Reverse,
            TermOrder::Shuffled { seed: 3 },
        ] {
            let mut p = order.permutation(50);
            p.sort();
            assert_eq!(p, (0..50).collect::<Vec<_>>());
        }
        assert_ne!(
            TermOrder::Shuffled { seed: 3 }.permutation(50),
            (0..50).collect::<Vec<_>>()
        );
    }

    #[test]
    fn dense_variance_value() {
        assert!((coupling_variance(10, 4, 1.0) - 0.0015).abs() < 1e-18);
        let inst = sample_dense(10, 4, 1.0, 1).unwrap();
        assert!((inst.sigma * inst.sigma - 0.0015).abs() < 1e-15);
        assert_eq!(inst.couplings.len(), 210);
    }

    #[test]
    fn sampling_is_reproducible() {
        assert_eq!(
            sample_dense(8, 4, 1.0, 99).unwrap(),
            sample_dense(8, 4, 1.0, 99).unwrap()
        );
        assert_ne!(
            sample_dense(8, 4, 1.0, 99).unwrap(),
            sample_dense(8, 4, 1.0, 98).unwrap()
        );
        assert_eq!(
            sample_sparse(8, 4, 1.0, 2.0, 5).unwrap(),
            sample_sparse(8, 4, 1.0, 2.0, 5).unwrap()
        );
    }

    #[test]
    fn coupling_moments_over_many_instances() {
        let n_inst = 100_000u64;
        let sigma2 = coupling_variance(10, 4, 1.0);
        let xs: Vec<f64> = (0..n_inst)
            .map(|s| {
                sample_dense(10, 4, 1.0, crate::rng::derive_seed(1, 0, s))
                    .unwrap()
                    .couplings[17]
            })
            .collect();
        let nf = n_inst as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        assert!(mean.abs() < 4.0 * (sigma2 / nf).sqrt());
        assert!((var - sigma2).abs() < 4.0 * sigma2 * (2.0 / (nf - 1.0)).sqrt());
    }

    #[test]
    fn sparse_probability_and_renormalization() {
        let (p, clamped) = sparse_probability(10, 4, 4.0).unwrap();
        assert!((p - 40.0 / 210.0).abs() < 1e-15);
        assert!(!clamped);
        let inst = sample_sparse(10, 4, 1.0, 4.0, 3).unwrap();
        let base = coupling_variance(10, 4, 1.0);
        assert!((inst.p_b.unwrap() * inst.sigma * inst.sigma - base).abs() < 1e-15);
        let (p, clamped) = sparse_probability(6, 4, 4.0).unwrap();
        assert_eq!((p, clamped), (1.0, true));
        assert!(sample_sparse(6, 4, 1.0, 4.0, 0).unwrap().p_b_clamped);
        assert!(sparse_probability(6, 4, -1.0).is_err());
    }

    #[test]
    fn zero_kappa_gives_empty_hamiltonian() {
        let inst = sample_sparse(8, 4, 1.0, 0.0, 3).unwrap();
        assert_eq!(inst.active_terms(), 0);
        assert!(inst.weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn mean_mask_size_is_kappa_n() {
        let samples = 10_000u64;
        let (n, k, kappa) = (10, 4, 4.0);
        let (p, _) = sparse_probability(n, k, kappa).unwrap();
        let sizes: Vec<f64> = (0..samples)
            .map(|s| {
                sample_sparse(n, k, 1.0, kappa, crate::rng::derive_seed(2, 0, s))
                    .unwrap()
                    .active_terms() as f64
            })
            .collect();
        let mean = sizes.iter().sum::<f64>() / samples as f64;
        let sd = (210.0 * p * (1.0 - p)).sqrt();
        assert!((mean - kappa * n as f64).abs() < 4.0 * sd / (samples as f64).sqrt());
    }

    #[test]
    fn json_round_trip_is_exact() {
        for inst in [
            sample_dense(8, 3, 1.3, 12).unwrap(),
            sample_sparse(10, 4, 0.7, 4.0, 8).unwrap(),
            sample_sparse(6, 4, 1.0, 4.0, 1).unwrap(),
        ] {
            let text = inst.to_json().unwrap();
            let back = SykInstance::from_json(&text).unwrap();
            assert_eq!(back, inst);
        }
        assert!(SykInstance::from_json("{\"n\":4}").is_err());
    }
}
