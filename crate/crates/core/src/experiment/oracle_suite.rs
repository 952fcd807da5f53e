//! Verification suite over the exact algebra, the `G_w` counts and the
//! anti-commutation graph coloring. Failures are data: every check reports
//! pass/fail and, on failure, a concrete counterexample.

use std::fmt;

use itertools::Itertools;

use crate::bounds::q_of;
use crate::error::Result;
use crate::fermion::majorana;
use crate::model::ordering_map;
use crate::oracle::{
    avg_gw_exact, avg_gw_upper_bound, build_graph, greedy_coloring, gw_bruteforce, gw_upper_bound,
    is_proper, q_max, TermSet,
};
use crate::pauli::PauliString;

use super::config::{Command, ExperimentConfig};

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    /// Short identifier.
    pub name: String,
    /// Whether the invariant held everywhere.
    pub passed: bool,
    /// Summary of what was covered.
    pub detail: String,
    /// First counterexample, if any.
    pub witness: Option<String>,
}

impl CheckResult {
    fn new(name: &str, detail: String, witness: Option<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: witness.is_none(),
            detail,
            witness,
        }
    }
}

/// All check outcomes of one suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Checks in execution order.
    pub checks: Vec<CheckResult>,
}

impl OracleReport {
    /// True when every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The named check.
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
            if let Some(w) = &c.witness {
                writeln!(f, "  counterexample: {w}")?;
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// `{χ_i, χ_j} = 2δ_ij` in exact Pauli arithmetic for every even `n ≤ max_n`.
pub fn check_majorana_anticommutation(max_n: usize) -> Result<CheckResult> {
    let mut pairs = 0usize;
    for n in (2..=max_n).step_by(2) {
        let chis = (1..=n)
            .map(|i| majorana(i, n))
            .collect::<Result<Vec<PauliString>>>()?;
        let identity = PauliString::identity(n / 2)?;
        for (i, a) in chis.iter().enumerate() {
            for (j, b) in chis.iter().enumerate() {
                pairs += 1;
                let (ab, ba) = (a.multiply(b)?, b.multiply(a)?);
                let holds = if i == j {
                    ab == identity
                } else {
                    // χ_a χ_b = −χ_b χ_a: same masks, phases differing by i².
                    ab.with_phase((ab.phase_exp() + 2) % 4) == ba
                };
                if !holds {
                    let w = format!(
                        "n = {n}, i = {}, j = {}: χ_iχ_j = {ab}, χ_jχ_i = {ba}",
                        i + 1,
                        j + 1
                    );
                    return Ok(CheckResult::new(
                        "majorana_anticommutation",
                        format!("n ≤ {max_n}"),
                        Some(w),
                    ));
                }
            }
        }
    }
    Ok(CheckResult::new(
        "majorana_anticommutation",
        format!("{pairs} ordered pairs, even n ≤ {max_n}"),
        None,
    ))
}

/// `T_α T_β = (−1)^{k+m} T_β T_α` for all term pairs at `n` and each `k`,
/// where `m` is the hyperedge overlap. With `flip` the expected sign is
/// deliberately negated (mutation test of the suite itself).
pub fn check_overlap_sign_law(n: usize, ks: &[usize], flip: bool) -> Result<CheckResult> {
    let mut pairs = 0usize;
    for &k in ks {
        let map = ordering_map(n, k)?;
        let terms = map.term_operators()?;
        for (a, b) in terms.iter().tuple_combinations() {
            pairs += 1;
            let m = a
                .hyperedge
                .iter()
                .filter(|x| b.hyperedge.contains(x))
                .count();
            let expect_commute = ((k + m) % 2 == 0) != flip;
            let ab = a.pauli.multiply(&b.pauli)?;
            let ba = b.pauli.multiply(&a.pauli)?;
            let actual_commute = ab == ba;
            if actual_commute != expect_commute {
                let w =
                    format!(
                    "k = {k}, α = {:?}, β = {:?}, m = {m}: terms {} but the law predicts they {}",
                    a.hyperedge,
                    b.hyperedge,
                    if actual_commute { "commute" } else { "anticommute" },
                    if expect_commute { "commute" } else { "anticommute" }
                );
                return Ok(CheckResult::new(
                    "overlap_sign_law",
                    format!("n = {n}"),
                    Some(w),
                ));
            }
        }
    }
    Ok(CheckResult::new(
        "overlap_sign_law",
        format!("{pairs} term pairs at n = {n}, k ∈ {ks:?}"),
        None,
    ))
}

/// Closed-form `Q(n,k)` equals the brute-force maximal partner count.
pub fn check_q_formula(max_n: usize, max_k: usize) -> Result<CheckResult> {
    let mut cases = 0usize;
    for n in (2..=max_n).step_by(2) {
        for k in 1..=max_k.min(n) {
            cases += 1;
            let brute = q_max(&TermSet::syk(n, k)?) as u128;
            let formula = q_of(n, k);
            if brute != formula {
                let w = format!("n = {n}, k = {k}: formula {formula}, brute force {brute}");
                return Ok(CheckResult::new("q_formula", String::new(), Some(w)));
            }
        }
    }
    Ok(CheckResult::new(
        "q_formula",
        format!("{cases} (n, k) cases, even n ≤ {max_n}, k ≤ {max_k}"),
        None,
    ))
}

/// Term sets of up to `max_m` SYK terms used by the `G_w` checks:
/// strided windows through several `(n, k)` term lists.
pub fn gw_termsets(max_m: usize) -> Result<Vec<(String, TermSet)>> {
    let mut out = Vec::new();
    for (n, k) in [(6usize, 2usize), (6, 3), (6, 4), (8, 2), (8, 3), (8, 4)] {
        let full = TermSet::syk(n, k)?;
        let gamma = full.len();
        for m in 1..=max_m.min(gamma) {
            for (start, stride) in [(0, 1), (1, 3), (gamma / 3, 5), (gamma / 2, 7)] {
                let idx: Vec<usize> = (0..m)
                    .map(|i| (start + i * stride) % gamma)
                    .unique()
                    .collect();
                if idx.len() == m {
                    out.push((
                        format!("n = {n}, k = {k}, terms {idx:?}"),
                        full.subset(&idx)?,
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// `G_w ≤ g^{3g−2} m² Q_max^{g−2}` on every term set, `g ≤ max_g`, `w ≤ g`.
pub fn check_gw_bound(sets: &[(String, TermSet)], max_g: usize) -> Result<CheckResult> {
    let mut cases = 0usize;
    for (label, set) in sets {
        let q = q_max(set);
        for g in 1..=max_g {
            for w in 0..=g {
                cases += 1;
                let value = gw_bruteforce(set, g, w)?;
                let bound = gw_upper_bound(g, set.len(), q);
                if value as f64 > bound {
                    let w = format!("{label}, g = {g}, w = {w}: G_w = {value} > {bound}");
                    return Ok(CheckResult::new("gw_upper_bound", String::new(), Some(w)));
                }
            }
        }
    }
    Ok(CheckResult::new(
        "gw_upper_bound",
        format!("{cases} (set, g, w) cases"),
        None,
    ))
}

/// Two anticommuting terms with `g = w = 2` give exactly `G_w = 4`.
pub fn check_pinned_gw() -> Result<CheckResult> {
    let set = TermSet::new(vec![
        PauliString::from_label("X")?,
        PauliString::from_label("Z")?,
    ])?;
    let value = gw_bruteforce(&set, 2, 2)?;
    let witness = (value != 4).then(|| format!("G_2 = {value} for an anticommuting pair"));
    Ok(CheckResult::new(
        "gw_pinned_pair",
        "m = 2 anticommuting, g = w = 2 → 4".into(),
        witness,
    ))
}

/// Bernoulli-averaged `⟨G_w⟩` is below its bound for every `p_B`, and
/// equals the plain `G_w` at `p_B = 1`.
pub fn check_avg_gw_bound(
    sets: &[(String, TermSet)],
    max_g: usize,
    probabilities: &[f64],
) -> Result<CheckResult> {
    let mut cases = 0usize;
    for (label, set) in sets {
        let q = q_max(set);
        for g in 1..=max_g {
            for w in 0..=g {
                let plain = gw_bruteforce(set, g, w)?;
                for &p_b in probabilities {
                    cases += 1;
                    let avg = avg_gw_exact(set, g, w, p_b)?;
                    let bound = avg_gw_upper_bound(g, w, set.len(), q, p_b);
                    if avg > bound {
                        let w = format!(
                            "{label}, g = {g}, w = {w}, p_B = {p_b}: ⟨G_w⟩ = {avg} > {bound}"
                        );
                        return Ok(CheckResult::new(
                            "averaged_gw_bound",
                            String::new(),
                            Some(w),
                        ));
                    }
                    if p_b == 1.0 && avg != plain as f64 {
                        let w = format!(
                            "{label}, g = {g}, w = {w}: ⟨G_w⟩(p_B = 1) = {avg} ≠ G_w = {plain}"
                        );
                        return Ok(CheckResult::new(
                            "averaged_gw_bound",
                            String::new(),
                            Some(w),
                        ));
                    }
                }
            }
        }
    }
    Ok(CheckResult::new(
        "averaged_gw_bound",
        format!("{cases} (set, g, w, p_B) cases"),
        None,
    ))
}

/// Greedy coloring statistics at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColoringCase {
    /// Number of Majoranas.
    pub n: usize,
    /// Colors used by the greedy coloring.
    pub colors: usize,
    /// `Q(n,k)`.
    pub q: u128,
}

/// Greedy colorings of the `k`-local anti-commutation graph at each `n`.
pub fn coloring_cases(
    ns: &[usize],
    k: usize,
    order: crate::oracle::ColoringOrder,
) -> Result<Vec<(ColoringCase, bool)>> {
    ns.iter()
        .map(|&n| {
            let graph = build_graph(&TermSet::syk(n, k)?);
            let coloring = greedy_coloring(&graph, order);
            let proper = is_proper(&graph, &coloring);
            Ok((
                ColoringCase {
                    n,
                    colors: coloring.num_colors,
                    q: q_of(n, k),
                },
                proper,
            ))
        })
        .collect()
}

/// Proper greedy colorings with at most `Q + 1` colors everywhere, and at
/// most `Q` colors for at least one `n`.
pub fn check_coloring(
    ns: &[usize],
    order: crate::oracle::ColoringOrder,
) -> Result<Vec<CheckResult>> {
    let k = 4;
    let cases = coloring_cases(ns, k, order)?;
    let summary = cases
        .iter()
        .map(|(c, _)| format!("n={}: {} colors, Q={}", c.n, c.colors, c.q))
        .join("; ");
    let bad = cases
        .iter()
        .find(|(c, proper)| !proper || c.colors as u128 > c.q + 1);
    let upper = CheckResult::new(
        "coloring_upper_bound",
        format!("k = {k}: {summary}"),
        bad.map(|(c, proper)| {
            format!(
                "n = {}: {} colors (Q + 1 = {}), proper = {proper}",
                c.n,
                c.colors,
                c.q + 1
            )
        }),
    );
    let separated = cases.iter().any(|(c, _)| (c.colors as u128) <= c.q);
    let strict = CheckResult::new(
        "coloring_below_q",
        format!("k = {k}: some n uses at most Q colors"),
        (!separated).then(|| format!("every n in {ns:?} needs Q + 1 colors")),
    );
    Ok(vec![upper, strict])
}

/// Runs the whole suite with the configured coloring grid and mutation flag.
pub fn run_oracle_suite(config: &ExperimentConfig) -> Result<OracleReport> {
    config.validate(Command::Oracle)?;
    let sets = gw_termsets(5)?;
    let mut checks = vec![
        check_majorana_anticommutation(12)?,
        check_overlap_sign_law(8, &[2, 3, 4], config.inject_sign_flip)?,
        check_q_formula(14, 5)?,
        check_gw_bound(&sets, 4)?,
        check_pinned_gw()?,
        check_avg_gw_bound(&sets, 4, &[0.1, 0.5, 0.9, 1.0])?,
    ];
    checks.extend(check_coloring(&config.coloring_n, config.coloring_order)?);
    Ok(OracleReport { checks })
}
