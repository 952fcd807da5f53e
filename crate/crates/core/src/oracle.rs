//! Brute-force combinatorics of nested commutator chains.
//!
//! For Hermitian Pauli-string terms `H_1, …, H_m` every pair commutes or
//! anticommutes, so a nested commutator `[H_{j_{g−1}}, …[H_{j_1}, H_{j_0}]…]`
//! is either zero or `2^{g−1}` times a Pauli string. The indicator `ind(j)` of
//! a chain is therefore computed exactly by tracking the accumulated product.
//!
//! `G_w` counts non-vanishing chains by support profile:
//!
//! ```text
//!   G_w = Σ_{|w⃗| = w} ( Σ_{π ∈ S_g} Σ_{|w⃗| + 2|v⃗| = g} ind(π[η(w⃗ + 2v⃗)]) )²
//! ```
//!
//! where `η(u⃗)` is the non-decreasing sequence containing term `i` exactly
//! `u_i` times and `π` runs over all `g!` position permutations. The
//! Bernoulli average `⟨G_w⟩` is computed by enumerating every mask.
//!
//! The module also builds the anti-commutation graph of a term set and
//! colors it greedily.

use itertools::Itertools;

use crate::bounds::q_of;
use crate::error::{Error, Result};
use crate::model::ordering_map;
use crate::pauli::PauliString;

/// Largest chain length accepted by the `G_w` enumerators.
pub const MAX_CHAIN_LENGTH: usize = 5;
/// Largest term count accepted by [`gw_bruteforce`].
pub const MAX_TERMS: usize = 6;
/// Largest term count accepted by [`avg_gw_exact`] (all `2^m` masks).
pub const MAX_AVERAGED_TERMS: usize = 5;

/// A set of Hermitian Pauli-string terms on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSet {
    terms: Vec<PauliString>,
}

impl TermSet {
    /// Validates that all terms act on the same qubits and are Hermitian.
    ///
    /// Pauli strings always either commute or anticommute, so no further
    /// pairwise check is needed.
    pub fn new(terms: Vec<PauliString>) -> Result<Self> {
        if let Some(first) = terms.first() {
            for t in &terms {
                if t.num_qubits() != first.num_qubits() {
                    return Err(Error::Dimension(
                        "terms act on different numbers of qubits".into(),
                    ));
                }
                if !t.is_hermitian() {
                    return Err(Error::Precondition(format!("term {t} is not Hermitian")));
                }
            }
        }
        Ok(Self { terms })
    }

    /// All `C(n,k)` SYK terms in lexicographic order.
    pub fn syk(n: usize, k: usize) -> Result<Self> {
        Self::new(
            ordering_map(n, k)?
                .term_operators()?
                .into_iter()
                .map(|t| t.pauli)
                .collect(),
        )
    }

    /// The subset of terms at the given positions.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let terms = indices
            .iter()
            .map(|&i| {
                self.terms
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::Validation(format!("term index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    /// Number of terms `m`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when the set is empty.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The terms.
    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    fn anticommute(&self, i: usize, j: usize) -> bool {
        !self.terms[i].commutes_unchecked(&self.terms[j])
    }
}

/// Indicator of a non-vanishing nested commutator
/// `L_{j_{g−1}}⋯L_{j_1}[H_{j_0}]` (`chain[0]` is innermost; zero-based
/// term indices).
pub fn indicator(chain: &[usize], terms: &TermSet) -> Result<u8> {
    if chain.is_empty() {
        return Err(Error::Validation(
            "a commutator chain needs at least one term".into(),
        ));
    }
    if let Some(&bad) = chain.iter().find(|&&j| j >= terms.len()) {
        return Err(Error::Validation(format!(
            "chain index {bad} outside the {}-term set",
            terms.len()
        )));
    }
    Ok(indicator_unchecked(chain, terms.terms()))
}

fn indicator_unchecked(chain: &[usize], terms: &[PauliString]) -> u8 {
    let mut acc = terms[chain[0]];
    for &j in &chain[1..] {
        // [H_j, A] = 2 H_j A if they anticommute, 0 otherwise.
        if terms[j].commutes_unchecked(&acc) {
            return 0;
        }
        acc = terms[j].mul_unchecked(&acc);
    }
    1
}

/// `Q_max = max_i |{j : H_i, H_j anticommute}|`.
pub fn q_max(terms: &TermSet) -> usize {
    (0..terms.len())
        .map(|i| {
            (0..terms.len())
                .filter(|&j| terms.anticommute(i, j))
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// All vectors of `m` nonnegative integers summing to `total`.
fn compositions(total: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(total - first, m - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, m, &mut Vec::new(), &mut out);
    out
}

fn check_gw_args(m: usize, g: usize, w: usize, max_terms: usize) -> Result<()> {
    if g == 0 {
        return Err(Error::Validation("chain length g must be ≥ 1".into()));
    }
    if w > g {
        return Err(Error::Validation(format!("w = {w} exceeds g = {g}")));
    }
    if g > MAX_CHAIN_LENGTH || m > max_terms {
        return Err(Error::Resource(format!(
            "G_w enumeration limited to g ≤ {MAX_CHAIN_LENGTH}, m ≤ {max_terms} (got g = {g}, m = {m})"
        )));
    }
    Ok(())
}

/// Exact `G_w` by enumeration over `w⃗`, `v⃗` and all `g!` permutations.
///
/// Returns 0 when `g − w` is odd.
pub fn gw_bruteforce(terms: &TermSet, g: usize, w: usize) -> Result<u64> {
    check_gw_args(terms.len(), g, w, MAX_TERMS)?;
    Ok(gw_unchecked(terms.terms(), g, w))
}

fn gw_unchecked(terms: &[PauliString], g: usize, w: usize) -> u64 {
    if (g - w) % 2 != 0 || terms.is_empty() {
        return 0;
    }
    let m = terms.len();
    let perms: Vec<Vec<usize>> = (0..g).permutations(g).collect();
    let vs = compositions((g - w) / 2, m);
    let mut chain = vec![0usize; g];
    let mut total = 0u64;
    for wv in compositions(w, m) {
        let mut inner = 0u64;
        for vv in &vs {
            // η(w⃗ + 2v⃗): term i repeated w_i + 2v_i times.
            let eta: Vec<usize> = (0..m)
                .flat_map(|i| std::iter::repeat_n(i, wv[i] + 2 * vv[i]))
                .collect();
            for perm in &perms {
                for (slot, &src) in chain.iter_mut().zip(perm) {
                    *slot = eta[src];
                }
                inner += u64::from(indicator_unchecked(&chain, terms));
            }
        }
        total += inner * inner;
    }
    total
}

/// Exact Bernoulli average `⟨G_w⟩ = Σ_b Pr(b) G_w(H(b))` over all `2^m`
/// masks, where `H(b)` keeps the terms with `b_i = 1`.
pub fn avg_gw_exact(terms: &TermSet, g: usize, w: usize, p_b: f64) -> Result<f64> {
    check_gw_args(terms.len(), g, w, MAX_AVERAGED_TERMS)?;
    if !(0.0..=1.0).contains(&p_b) {
        return Err(Error::Validation(format!("p_B = {p_b} outside [0, 1]")));
    }
    let m = terms.len();
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << m) {
        let kept: Vec<PauliString> = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| terms.terms()[i])
            .collect();
        let ones = kept.len() as i32;
        let prob = p_b.powi(ones) * (1.0 - p_b).powi(m as i32 - ones);
        if prob == 0.0 {
            continue;
        }
        sum += prob * gw_unchecked(&kept, g, w) as f64;
    }
    Ok(sum)
}

/// Upper bound `g^{3g−2} m² Q_max^{g−2}` on `G_w`
/// (`+∞` when `Q_max = 0` and `g < 2`).
pub fn gw_upper_bound(g: usize, m: usize, q_max: usize) -> f64 {
    let (gf, mf, qf) = (g as f64, m as f64, q_max as f64);
    if q_max == 0 && g < 2 {
        return f64::INFINITY;
    }
    gf.powi(3 * g as i32 - 2) * mf * mf * qf.powi(g as i32 - 2)
}

/// Upper bound on `⟨G_w⟩`:
/// `g^{4g} m² Q_max^{−2} Σ_{s=0}^{w} Σ_{q,q′=0}^{(g−w)/2} Σ_{c=0}^{min(q,q′)} (p_B Q_max)^{s+q+q′−c}`
/// (`+∞` when `Q_max = 0`).
pub fn avg_gw_upper_bound(g: usize, w: usize, m: usize, q_max: usize, p_b: f64) -> f64 {
    if q_max == 0 {
        return f64::INFINITY;
    }
    let x = p_b * q_max as f64;
    let half = (g - w.min(g)) / 2;
    let mut sum = 0.0;
    for s in 0..=w {
        for q in 0..=half {
            for q2 in 0..=half {
                for c in 0..=q.min(q2) {
                    sum += x.powi((s + q + q2 - c) as i32);
                }
            }
        }
    }
    (g as f64).powi(4 * g as i32) * (m * m) as f64 / (q_max as f64).powi(2) * sum
}

/// Undirected graph with an edge between every anticommuting pair of terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiCommutationGraph {
    adjacency: Vec<Vec<usize>>,
}

/// Builds the anti-commutation graph of a term set.
pub fn build_graph(terms: &TermSet) -> AntiCommutationGraph {
    let m = terms.len();
    let adjacency = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i && terms.anticommute(i, j))
                .collect()
        })
        .collect();
    AntiCommutationGraph { adjacency }
}

impl AntiCommutationGraph {
    /// Graph from explicit adjacency lists (must be symmetric, loop-free).
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        for (i, nbrs) in adjacency.iter().enumerate() {
            for &j in nbrs {
                if j == i || j >= adjacency.len() || !adjacency[j].contains(&i) {
                    return Err(Error::Validation(format!(
                        "adjacency is not simple and symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { adjacency })
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Neighbors of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Degree of every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Maximum degree.
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }
}

/// Vertex order used by the greedy coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColoringOrder {
    /// Vertices `0, 1, …, m−1`.
    #[default]
    Natural,
    /// Decreasing degree, ties by index.
    DegreeDescending,
}

/// A proper vertex coloring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    /// Color of every vertex.
    pub colors: Vec<usize>,
    /// Number of distinct colors.
    pub num_colors: usize,
}

/// Sequential greedy coloring: each vertex takes the smallest color not used
/// by an already colored neighbor.
pub fn greedy_coloring(graph: &AntiCommutationGraph, order: ColoringOrder) -> Coloring {
    let m = graph.num_vertices();
    let mut sequence: Vec<usize> = (0..m).collect();
    if order == ColoringOrder::DegreeDescending {
        let deg = graph.degrees();
        sequence.sort_by_key(|&v| (std::cmp::Reverse(deg[v]), v));
    }
    let mut colors = vec![usize::MAX; m];
    let mut used = Vec::new();
    let mut num_colors = 0;
    for v in sequence {
        used.clear();
        used.resize(graph.neighbors(v).len() + 1, false);
        for &u in graph.neighbors(v) {
            if colors[u] < used.len() {
                used[colors[u]] = true;
            }
        }
        let c = used
            .iter()
            .position(|&b| !b)
            .expect("a free color always exists");
        colors[v] = c;
        num_colors = num_colors.max(c + 1);
    }
    Coloring { colors, num_colors }
}

/// True iff no edge joins two vertices of the same color.
pub fn is_proper(graph: &AntiCommutationGraph, coloring: &Coloring) -> bool {
    (0..graph.num_vertices()).all(|v| {
        graph
            .neighbors(v)
            .iter()
            .all(|&u| coloring.colors[u] != coloring.colors[v])
    })
}

/// Checks that the full SYK anti-commutation graph is `Q(n,k)`-regular.
pub fn syk_graph_is_regular(n: usize, k: usize) -> Result<bool> {
    let graph = build_graph(&TermSet::syk(n, k)?);
    let q = q_of(n, k) as usize;
    Ok(graph.degrees().iter().all(|&d| d == q))
}
