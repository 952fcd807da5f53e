//! Experiment configuration: a declarative `key = value` file (TOML syntax)
//! plus `key=value` overrides, validated before any computation starts.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::bounds::{check_bound_size, Overhead, PrefactorMode};
use crate::error::{Error, Result};
use crate::model::{check_model_size, TermOrder};
use crate::oracle::ColoringOrder;
use crate::trotter::stage_count;

/// Dense or sparse SYK model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// All `C(n,k)` terms present.
    #[default]
    Dense,
    /// Bernoulli-sparsified terms with `p_B = min(1, κn/Γ)`.
    Sparse,
}

impl ModelKind {
    /// Lower-case name used in CSV rows.
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Dense => "dense",
            ModelKind::Sparse => "sparse",
        }
    }
}

/// Term sweep order selectable from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    /// Lexicographic hyperedge order.
    #[default]
    Lexicographic,
    /// Reversed lexicographic order.
    Reverse,
    /// Random permutation drawn from `order_seed`.
    Shuffled,
}

fn one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::<T>::deserialize(deserializer)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Resolved configuration of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Model family.
    pub model: ModelKind,
    /// Majorana counts.
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    /// Localities.
    #[serde(deserialize_with = "one_or_many")]
    pub k: Vec<usize>,
    /// Product-formula orders.
    #[serde(deserialize_with = "one_or_many")]
    pub l: Vec<usize>,
    /// Schatten / moment order.
    pub p: f64,
    /// Evolution times (scan-n, bounds, solve-r, evolve).
    #[serde(deserialize_with = "one_or_many")]
    pub t: Vec<f64>,
    /// Smallest time of the scan-t grid.
    pub t_min: f64,
    /// Largest time of the scan-t grid.
    pub t_max: f64,
    /// Number of log-spaced scan-t points.
    pub t_points: usize,
    /// Trotter number.
    pub r: u64,
    /// Sparsity parameter κ.
    pub kappa: f64,
    /// Energy constant 𝒥.
    pub energy_constant: f64,
    /// Gaussian disorder samples per point (per mask for the sparse model).
    pub n_disorder: usize,
    /// Bernoulli masks per point (sparse model).
    pub n_bernoulli: usize,
    /// Master seed from which all point seeds derive.
    pub master_seed: u64,
    /// Prefactor handling of higher-order bounds.
    pub prefactor: PrefactorMode,
    /// Mapping overhead for gate counts.
    pub overhead: Overhead,
    /// Target errors for the Trotter-number solver.
    #[serde(deserialize_with = "one_or_many")]
    pub epsilon: Vec<f64>,
    /// Failure probabilities for the Trotter-number solver.
    #[serde(deserialize_with = "one_or_many")]
    pub delta: Vec<f64>,
    /// Sweep order of the product formula.
    pub term_order: OrderKind,
    /// Seed of the shuffled sweep order.
    pub order_seed: u64,
    /// Vertex order of the greedy coloring.
    pub coloring_order: ColoringOrder,
    /// Majorana counts covered by the coloring check.
    #[serde(deserialize_with = "one_or_many")]
    pub coloring_n: Vec<usize>,
    /// Cap on the dense Hilbert-space dimension.
    pub dimension_cap: usize,
    /// Skip simulation and report bounds only (scan-t).
    pub delta_only: bool,
    /// Record wall-clock time per row (makes CSV output non-reproducible).
    pub record_timing: bool,
    /// Deliberately corrupt the overlap sign law in the oracle suite.
    pub inject_sign_flip: bool,
    /// Output path; standard output when absent.
    pub output: Option<String>,
    /// Instance JSON consumed by `evolve`.
    pub instance: Option<String>,
    /// Worker threads; the environment / machine default when absent.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Dense,
            n: vec![6, 8, 10],
            k: vec![4],
            l: vec![1],
            p: 2.0,
            t: vec![1.0],
            t_min: 10.0,
            t_max: 1000.0,
            t_points: 8,
            r: 10_000,
            kappa: 4.0,
            energy_constant: 1.0,
            n_disorder: 32,
            n_bernoulli: 32,
            master_seed: 0,
            prefactor: PrefactorMode::Full,
            overhead: Overhead::None,
            epsilon: vec![1e-3],
            delta: vec![0.01],
            term_order: OrderKind::Lexicographic,
            order_seed: 0,
            coloring_order: ColoringOrder::Natural,
            coloring_n: vec![6, 8, 10, 12, 14, 16],
            dimension_cap: crate::linalg::DEFAULT_DIMENSION_CAP,
            delta_only: false,
            record_timing: false,
            inject_sign_flip: false,
            output: None,
            instance: None,
            workers: None,
        }
    }
}

/// Commands whose preconditions [`ExperimentConfig::validate`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Error ratios across system sizes.
    ScanN,
    /// Error and bound versus time with log–log fits.
    ScanT,
    /// Minimal Trotter numbers.
    SolveR,
    /// Gate counts.
    GateCount,
    /// Bound values.
    Bounds,
    /// Combinatorial verification suite.
    Oracle,
    /// Sample and serialize an instance.
    Gen,
    /// One-off error evaluation.
    Evolve,
}

/// Parses one `key=value` override into a TOML value. Bare comma-separated
/// values become arrays and bare words become strings.
fn parse_override_value(raw: &str) -> Result<toml::Value> {
    let trimmed = raw.trim();
    let candidate = if trimmed.contains(',') && !trimmed.starts_with('[') {
        format!("[{trimmed}]")
    } else {
        trimmed.to_string()
    };
    match toml::from_str::<toml::Table>(&format!("v = {candidate}")) {
        Ok(mut table) => Ok(table.remove("v").expect("key present")),
        Err(_) => Ok(toml::Value::String(trimmed.to_string())),
    }
}

impl ExperimentConfig {
    /// Reads an optional configuration file and applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Io(format!("reading {}: {e}", p.display())))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::Validation(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("override {item:?} is not key=value")))?;
            table.insert(key.trim().to_string(), parse_override_value(value)?);
        }
        Self::from_table(table)
    }

    /// Parses a configuration document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table = toml::from_str::<toml::Table>(text)
            .map_err(|e| Error::Validation(format!("config: {e}")))?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Validation(format!("config: {e}")))
    }

    /// The resolved configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    /// The resolved configuration as a `#`-prefixed comment block.
    pub fn comment_block(&self) -> String {
        self.to_toml()
            .lines()
            .map(|line| format!("# {line}\n"))
            .collect()
    }

    /// Sweep order of the product formula.
    pub fn sweep_order(&self) -> TermOrder {
        match self.term_order {
            OrderKind::Lexicographic => TermOrder::Lexicographic,
            OrderKind::Reverse => TermOrder::Reverse,
            OrderKind::Shuffled => TermOrder::Shuffled {
                seed: self.order_seed,
            },
        }
    }

    /// The log-spaced scan-t grid.
    pub fn t_grid(&self) -> Vec<f64> {
        if self.t_points == 1 {
            return vec![self.t_min];
        }
        let ratio = self.t_max / self.t_min;
        (0..self.t_points)
            .map(|i| self.t_min * ratio.powf(i as f64 / (self.t_points - 1) as f64))
            .collect()
    }

    /// `(n, k)` grid points in row order (sorted by `n`, then `k`).
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut ns = self.n.clone();
        ns.sort_unstable();
        ns.dedup();
        let mut pts = Vec::new();
        for &n in &ns {
            for &k in &self.k {
                pts.push((n, k));
            }
        }
        pts
    }

    /// Checks every parameter the command will use.
    pub fn validate(&self, command: Command) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(msg));
        let uses_grid =
            command != Command::Oracle && !(command == Command::Evolve && self.instance.is_some());
        if uses_grid {
            if self.n.is_empty() || self.k.is_empty() {
                return bad("n and k lists must be nonempty".into());
            }
            let bound_only = matches!(
                command,
                Command::Bounds | Command::SolveR | Command::GateCount
            );
            for &n in &self.n {
                for &k in &self.k {
                    if bound_only {
                        check_bound_size(n, k)?;
                    } else {
                        check_model_size(n, k)?;
                    }
                }
            }
        }
        if self.l.is_empty() {
            return bad("l list must be nonempty".into());
        }
        for &l in &self.l {
            stage_count(l)?;
        }
        if !(self.p >= 1.0) {
            return bad(format!("p must be ≥ 1, got {}", self.p));
        }
        if !(self.energy_constant > 0.0) || !self.energy_constant.is_finite() {
            return bad(format!(
                "energy_constant must be positive, got {}",
                self.energy_constant
            ));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return bad(format!("kappa must be finite and ≥ 0, got {}", self.kappa));
        }
        if self.r == 0 {
            return bad("r must be ≥ 1".into());
        }
        if self.t.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return bad("times must be finite and ≥ 0".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be ≥ 1".into());
        }
        let simulates = matches!(command, Command::ScanN | Command::ScanT)
            && !(command == Command::ScanT && self.delta_only);
        if simulates {
            if !self.p.is_finite() {
                return bad("expected Schatten norms need a finite p".into());
            }
            if self.n_disorder < 2 {
                return bad(format!("n_disorder must be ≥ 2, got {}", self.n_disorder));
            }
            if self.model == ModelKind::Sparse && self.n_bernoulli < 1 {
                return bad("n_bernoulli must be ≥ 1".into());
            }
            for &n in &self.n {
                crate::linalg::dimension(n, self.dimension_cap)?;
            }
            if self.r >= 100_000 || self.n.iter().any(|&n| n > 12) {
                let samples = self.n_disorder
                    * if self.model == ModelKind::Sparse {
                        self.n_bernoulli
                    } else {
                        1
                    };
                log::warn!(
                    "large run (r = {}, n up to {}): {} disorder samples per point; expect long runtimes",
                    self.r,
                    self.n.iter().max().unwrap_or(&0),
                    samples
                );
            }
        }
        if command == Command::ScanT {
            if self.t_points < 3 {
                return bad(format!(
                    "a log–log fit needs at least 3 t points, got {}",
                    self.t_points
                ));
            }
            if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
                return bad(format!(
                    "scan-t needs 0 < t_min < t_max, got [{}, {}]",
                    self.t_min, self.t_max
                ));
            }
        }
        if command == Command::ScanN && self.t.is_empty() {
            return bad("t list must be nonempty".into());
        }
        if command == Command::SolveR {
            if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(*e > 0.0)) {
                return bad("epsilon values must be positive".into());
            }
            if self.delta.is_empty() || self.delta.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
                return bad("delta values must lie in (0, 1)".into());
            }
        }
        if command == Command::Oracle {
            for &n in &self.coloring_n {
                check_model_size(n, 4)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let c = ExperimentConfig::default();
        assert_eq!(
            (c.r, c.n_disorder, c.n_bernoulli, c.p),
            (10_000, 32, 32, 2.0)
        );
        c.validate(Command::ScanN).unwrap();
    }

    #[test]
    fn file_and_overrides_merge() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "model = \"sparse\"\nn = [6, 8]\nk = 3\nkappa = 2.5\n",
        )
        .unwrap();
        let c = ExperimentConfig::load(
            Some(&path),
            &["n=10,12".into(), "l = 2".into(), "prefactor=unit".into()],
        )
        .unwrap();
        assert_eq!(c.model, ModelKind::Sparse);
        assert_eq!(c.n, vec![10, 12]);
        assert_eq!(c.k, vec![3]);
        assert_eq!(c.l, vec![2]);
        assert_eq!(c.kappa, 2.5);
        assert_eq!(c.prefactor, PrefactorMode::Unit);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(ExperimentConfig::from_toml("nn = 3").is_err());
        assert!(ExperimentConfig::load(None, &["novalue".into()]).is_err());
        let c = ExperimentConfig {
            n: vec![7],
            ..ExperimentConfig::default()
        };
        assert!(c.validate(Command::ScanN).is_err());
        let c = ExperimentConfig {
            l: vec![3],
            ..ExperimentConfig::default()
        };
        assert!(c.validate(Command::Bounds).is_err());
        let c = ExperimentConfig {
            t_points: 1,
            ..ExperimentConfig::default()
        };
        assert!(c.validate(Command::ScanT).is_err());
        let c = ExperimentConfig {
            delta: vec![1.5],
            ..ExperimentConfig::default()
        };
        assert!(c.validate(Command::SolveR).is_err());
    }

    #[test]
    fn comment_block_round_trips() {
        let c = ExperimentConfig {
            t: vec![0.5, 2.0],
            output: Some("out.csv".into()),
            ..ExperimentConfig::default()
        };
        let block = c.comment_block();
        assert!(block.lines().all(|l| l.starts_with('#')));
        let stripped: String = block
            .lines()
            .map(|l| format!("{}\n", &l[2.min(l.len())..]))
            .collect();
        assert_eq!(ExperimentConfig::from_toml(&stripped).unwrap(), c);
    }

    #[test]
    fn t_grid_is_log_spaced() {
        let c = ExperimentConfig::default();
        let g = c.t_grid();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 10.0).abs() < 1e-12 && (g[7] - 1000.0).abs() < 1e-9);
        let r0 = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r0).abs() < 1e-12));
    }
}
