//! Scan drivers: error ratios across system sizes, time scans with log–log
//! fits, and one-off evaluations of a single instance.

use std::time::Instant;

use crate::bounds::{
    delta, delta1_general, error_ratio, loglog_fit, BoundInput, LogLogFit, TermCounts,
};
use crate::error::{Error, Result};
use crate::linalg::{estimate_from_norms, par_collect, NormEstimate};
use crate::model::{bernoulli_mask, sample_dense, sample_sparse_split, term_count, SykInstance};
use crate::oracle::{q_max, TermSet};
use crate::rng::derive_seed;
use crate::trotter::{build_schedule, ErrorEvaluator, Schedule};

use super::config::{Command, ExperimentConfig, ModelKind};
use super::table::{fmt_f64, result_table, ResultRow, Table};

/// Seed tag of scan-n grid points.
const SCAN_N_TAG: u64 = 1;
/// Seed tag of scan-t grid points.
const SCAN_T_TAG: u64 = 2;
/// Sub-stream of dense instance seeds (and sparse coupling seeds use 2).
const INSTANCE_SUBSTREAM: u64 = 0;
/// Sub-stream of sparse Bernoulli-mask seeds.
const MASK_SUBSTREAM: u64 = 1;
/// Sub-stream of sparse coupling seeds.
const COUPLING_SUBSTREAM: u64 = 2;

/// Seed of grid point `index` of a scan.
pub fn point_seed(master_seed: u64, tag: u64, index: usize) -> u64 {
    derive_seed(master_seed, tag, index as u64)
}

/// Seed of dense disorder sample `i` at a grid point.
pub fn dense_instance_seed(point_seed: u64, i: usize) -> u64 {
    derive_seed(point_seed, INSTANCE_SUBSTREAM, i as u64)
}

/// Seed of Bernoulli mask `b` at a grid point.
pub fn mask_seed(point_seed: u64, b: usize) -> u64 {
    derive_seed(point_seed, MASK_SUBSTREAM, b as u64)
}

/// Seed of disorder sample `i` under mask `b` at a grid point.
pub fn coupling_seed(point_seed: u64, b: usize, i: usize, n_disorder: usize) -> u64 {
    derive_seed(point_seed, COUPLING_SUBSTREAM, (b * n_disorder + i) as u64)
}

/// A log–log fit of observed errors and bounds versus time.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    /// Model name.
    pub model: String,
    /// Number of Majoranas.
    pub n: usize,
    /// Locality.
    pub k: usize,
    /// Product-formula order.
    pub l: usize,
    /// Fit of the observed error (absent in bound-only mode or on failure).
    pub observed: Option<LogLogFit>,
    /// Fit of the bound.
    pub bound: Option<LogLogFit>,
    /// Failure message.
    pub error: Option<String>,
}

impl FitSummary {
    /// `|slope(observed) − slope(bound)|` when both fits exist.
    pub fn slope_gap(&self) -> Option<f64> {
        Some((self.observed?.slope - self.bound?.slope).abs())
    }

    fn line(&self) -> String {
        let mut s = format!(
            "fit model={} n={} k={} l={}",
            self.model, self.n, self.k, self.l
        );
        if let Some(f) = self.observed {
            s += &format!(
                " slope_observed={} residual_observed={}",
                fmt_f64(f.slope),
                fmt_f64(f.residual)
            );
        }
        if let Some(f) = self.bound {
            s += &format!(
                " slope_bound={} residual_bound={}",
                fmt_f64(f.slope),
                fmt_f64(f.residual)
            );
        }
        if let Some(gap) = self.slope_gap() {
            s += &format!(" slope_gap={}", fmt_f64(gap));
        }
        if let Some(e) = &self.error {
            s += &format!(" error={e:?}");
        }
        s
    }
}

/// Rows (and fits, for time scans) produced by a scan.
#[derive(Debug, Clone)]
pub struct ScanReport {
    /// The resolved configuration.
    pub config: ExperimentConfig,
    /// Result rows in output order.
    pub rows: Vec<ResultRow>,
    /// Log–log fits (time scans only).
    pub fits: Vec<FitSummary>,
}

impl ScanReport {
    /// True when every row and fit succeeded.
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(ResultRow::is_ok) && self.fits.iter().all(|f| f.error.is_none())
    }

    /// The report as a table with the configuration block and fit trailer.
    pub fn table(&self) -> Table {
        let mut table = result_table(&self.rows);
        table.preamble = self.config.to_toml().lines().map(str::to_string).collect();
        table.trailer = self.fits.iter().map(FitSummary::line).collect();
        table
    }

    /// CSV text of [`ScanReport::table`].
    pub fn to_csv(&self) -> Result<String> {
        self.table().to_csv()
    }
}

/// Disorder- (and Bernoulli-) averaged normalized errors at one `(n, k)`
/// point, one estimate per requested `(l, t)` combination.
fn simulate_point(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    seed: u64,
    schedules: &[Schedule],
    combos: &[(usize, f64)],
) -> Result<Vec<NormEstimate>> {
    let n_d = config.n_disorder;
    let (p, r, j) = (config.p, config.r, config.energy_constant);
    let order = config.sweep_order();
    let evaluate = |instance: &SykInstance| -> Result<(usize, Vec<f64>)> {
        let eval = ErrorEvaluator::new(instance, order, config.dimension_cap)?;
        let norms = combos
            .iter()
            .map(|&(li, t)| eval.error_norm(&schedules[li], t, r, p))
            .collect::<Result<Vec<f64>>>()?;
        Ok((eval.dim(), norms))
    };
    let column = |samples: &[(usize, Vec<f64>)], c: usize| -> Result<NormEstimate> {
        let norms: Vec<f64> = samples.iter().map(|s| s.1[c]).collect();
        Ok(estimate_from_norms(&norms, p)?.normalized(samples[0].0))
    };
    match config.model {
        ModelKind::Dense => {
            let samples = par_collect(n_d, |i| {
                evaluate(&sample_dense(n, k, j, dense_instance_seed(seed, i))?)
            })?;
            (0..combos.len()).map(|c| column(&samples, c)).collect()
        }
        ModelKind::Sparse => {
            let n_b = config.n_bernoulli;
            let samples = par_collect(n_b * n_d, |flat| {
                let (b, i) = (flat / n_d, flat % n_d);
                let instance = sample_sparse_split(
                    n,
                    k,
                    j,
                    config.kappa,
                    mask_seed(seed, b),
                    coupling_seed(seed, b, i, n_d),
                )?;
                evaluate(&instance)
            })?;
            let per_mask: Vec<Vec<NormEstimate>> = samples
                .chunks(n_d)
                .map(|chunk| {
                    (0..combos.len())
                        .map(|c| column(chunk, c))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            Ok((0..combos.len())
                .map(|c| bernoulli_average(per_mask.iter().map(|m| m[c]).collect()))
                .collect())
        }
    }
}

/// Average of per-mask estimates; the standard error is the between-mask
/// standard error, or the single mask's own error when only one mask exists.
fn bernoulli_average(estimates: Vec<NormEstimate>) -> NormEstimate {
    let count = estimates.len();
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let mean = crate::linalg::pairwise_sum(&values) / count as f64;
    let stderr = if count == 1 {
        estimates[0].stderr
    } else {
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (crate::linalg::pairwise_sum(&dev) / (count - 1) as f64 / count as f64).sqrt()
    };
    NormEstimate {
        value: mean,
        stderr,
        num_samples: estimates.iter().map(|e| e.num_samples).sum(),
        p: estimates[0].p,
    }
}

/// `(Γ_b, Q_max(H(b)))` of the terms kept by a mask.
fn mask_counts(all_terms: &TermSet, mask: &[u8]) -> Result<TermCounts> {
    let kept: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m == 1)
        .map(|(i, _)| i)
        .collect();
    let q = q_max(&all_terms.subset(&kept)?);
    Ok(TermCounts {
        gamma: kept.len() as f64,
        q: q as f64,
    })
}

/// First-order bound of the sparse model: the generalized first-order bound
/// with each mask's own `(Γ_b, Q_max)`, averaged over the Bernoulli masks.
fn sparse_first_order_bound(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    t: f64,
    seed: u64,
) -> Result<f64> {
    let input = BoundInput::sparse(
        n,
        k,
        1,
        config.p,
        t,
        config.r,
        config.energy_constant,
        config.kappa,
    )?;
    let p_b = input.p_b.unwrap_or(0.0);
    let all_terms = TermSet::syk(n, k)?;
    let gamma = term_count(n, k)?;
    let values = (0..config.n_bernoulli.max(1))
        .map(|b| {
            let counts = mask_counts(&all_terms, &bernoulli_mask(gamma, p_b, mask_seed(seed, b)))?;
            Ok(delta1_general(
                counts,
                input.sigma,
                config.p,
                t,
                config.r as f64,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::linalg::pairwise_sum(&values) / values.len() as f64)
}

/// The bound matching a scan row.
pub fn scan_bound(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    l: usize,
    t: f64,
    seed: u64,
) -> Result<f64> {
    let (p, r, j) = (config.p, config.r, config.energy_constant);
    match config.model {
        ModelKind::Dense => {
            delta(&BoundInput::dense(n, k, l, p, t, r, j)?.with_prefactor(config.prefactor))
        }
        ModelKind::Sparse if l == 1 => sparse_first_order_bound(config, n, k, t, seed),
        ModelKind::Sparse => delta(
            &BoundInput::sparse(n, k, l, p, t, r, j, config.kappa)?
                .with_prefactor(config.prefactor),
        ),
    }
}

fn base_row(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    l: usize,
    t: f64,
    seed: u64,
) -> ResultRow {
    let sparse = config.model == ModelKind::Sparse;
    ResultRow {
        model: config.model.name().to_string(),
        n,
        k,
        l,
        p: config.p,
        t,
        r: config.r,
        kappa: sparse.then_some(config.kappa),
        seed,
        n_disorder: config.n_disorder,
        n_bernoulli: if sparse { config.n_bernoulli } else { 0 },
        observed: None,
        observed_stderr: None,
        bound: None,
        ratio: None,
        wall_time_s: None,
        error: None,
    }
}

/// Computes all rows of one `(n, k)` point for the given orders and times.
fn point_rows(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    seed: u64,
    times: &[f64],
    simulate: bool,
) -> Vec<ResultRow> {
    let start = Instant::now();
    let combos: Vec<(usize, f64)> = (0..config.l.len())
        .flat_map(|li| times.iter().map(move |&t| (li, t)))
        .collect();
    let mut rows: Vec<ResultRow> = combos
        .iter()
        .map(|&(li, t)| base_row(config, n, k, config.l[li], t, seed))
        .collect();
    for row in rows.iter_mut() {
        match scan_bound(config, n, k, row.l, row.t, seed) {
            Ok(b) => row.bound = Some(b),
            Err(e) => row.fail(format!("bound: {e}")),
        }
    }
    if simulate {
        let estimates = term_count(n, k).and_then(|gamma| {
            let schedules = config
                .l
                .iter()
                .map(|&l| build_schedule(l, gamma))
                .collect::<Result<Vec<Schedule>>>()?;
            simulate_point(config, n, k, seed, &schedules, &combos)
        });
        match estimates {
            Ok(estimates) => {
                for (row, est) in rows.iter_mut().zip(estimates) {
                    row.observed = Some(est.value);
                    row.observed_stderr = Some(est.stderr);
                    if let Some(bound) = row.bound {
                        match error_ratio(&est, bound) {
                            Ok(ratio) => row.ratio = Some(ratio.value),
                            Err(e) => row.fail(format!("ratio: {e}")),
                        }
                    }
                }
            }
            Err(e) => rows
                .iter_mut()
                .for_each(|row| row.fail(format!("simulation: {e}"))),
        }
    }
    if config.record_timing {
        let elapsed = start.elapsed().as_secs_f64();
        rows.iter_mut()
            .for_each(|row| row.wall_time_s = Some(elapsed));
    }
    for row in rows.iter_mut() {
        let fields = [row.observed, row.observed_stderr, row.bound, row.ratio];
        if fields.iter().flatten().any(|x| !x.is_finite()) {
            row.fail("non-finite result".into());
        }
    }
    rows
}

/// Error ratios `η = observed/Δ` over the `(n, k, l)` grid at each time in `t`.
///
/// Row failures are recorded in the `error` column and the scan continues.
pub fn scan_n(config: &ExperimentConfig) -> Result<ScanReport> {
    config.validate(Command::ScanN)?;
    let mut rows = Vec::new();
    for (index, (n, k)) in config.points().into_iter().enumerate() {
        let seed = point_seed(config.master_seed, SCAN_N_TAG, index);
        log::info!("scan-n: n={n} k={k} seed={seed}");
        rows.extend(point_rows(config, n, k, seed, &config.t, true));
    }
    Ok(ScanReport {
        config: config.clone(),
        rows,
        fits: Vec::new(),
    })
}

/// Observed errors and bounds on a log-spaced time grid, with log–log fits
/// per `(n, k, l)`. In bound-only mode no simulation is run.
pub fn scan_t(config: &ExperimentConfig) -> Result<ScanReport> {
    config.validate(Command::ScanT)?;
    let times = config.t_grid();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (index, (n, k)) in config.points().into_iter().enumerate() {
        let seed = point_seed(config.master_seed, SCAN_T_TAG, index);
        log::info!("scan-t: n={n} k={k} seed={seed}");
        let point = point_rows(config, n, k, seed, &times, !config.delta_only);
        for (li, &l) in config.l.iter().enumerate() {
            let block = &point[li * times.len()..(li + 1) * times.len()];
            fits.push(fit_block(config, n, k, l, block));
        }
        rows.extend(point);
    }
    Ok(ScanReport {
        config: config.clone(),
        rows,
        fits,
    })
}

fn fit_block(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    l: usize,
    block: &[ResultRow],
) -> FitSummary {
    let mut summary = FitSummary {
        model: config.model.name().to_string(),
        n,
        k,
        l,
        observed: None,
        bound: None,
        error: None,
    };
    let fit = |values: Vec<Option<f64>>| -> Result<LogLogFit> {
        let points = block
            .iter()
            .zip(values)
            .map(|(row, v)| {
                v.map(|v| (row.t, v))
                    .ok_or_else(|| Error::Validation("missing value".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        loglog_fit(&points)
    };
    match fit(block.iter().map(|r| r.bound).collect()) {
        Ok(f) => summary.bound = Some(f),
        Err(e) => summary.error = Some(format!("bound fit: {e}")),
    }
    if !config.delta_only {
        match fit(block.iter().map(|r| r.observed).collect()) {
            Ok(f) => summary.observed = Some(f),
            Err(e) => summary.error = summary.error.take().or(Some(format!("observed fit: {e}"))),
        }
    }
    summary
}

/// The instance used by `gen` and `evolve`: read from `config.instance` if
/// given, otherwise sampled at the first `(n, k)` from `master_seed`.
pub fn load_or_sample_instance(config: &ExperimentConfig) -> Result<SykInstance> {
    if let Some(path) = &config.instance {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Io(format!("reading {path}: {e}")))?;
        return SykInstance::from_json(&text);
    }
    let (n, k) = config.points()[0];
    match config.model {
        ModelKind::Dense => sample_dense(n, k, config.energy_constant, config.master_seed),
        ModelKind::Sparse => sample_sparse_split(
            n,
            k,
            config.energy_constant,
            config.kappa,
            config.master_seed,
            config.master_seed,
        ),
    }
}

/// The bound for a single instance's own parameters.
fn instance_bound(
    config: &ExperimentConfig,
    instance: &SykInstance,
    l: usize,
    t: f64,
) -> Result<f64> {
    let (n, k, p, r) = (instance.n, instance.k, config.p, config.r);
    match (instance.p_b, l) {
        (Some(_), 1) => {
            let counts = mask_counts(
                &TermSet::syk(n, k)?,
                instance.mask.as_deref().unwrap_or(&[]),
            )?;
            Ok(delta1_general(counts, instance.sigma, p, t, r as f64))
        }
        (p_b, _) => {
            let input = BoundInput {
                n,
                k,
                l,
                p,
                t,
                r,
                energy_constant: instance.energy_constant,
                sigma: instance.sigma,
                p_b,
                prefactor: config.prefactor,
            };
            delta(&input)
        }
    }
}

/// Normalized Trotter errors of one instance for each `l` and `t`.
pub fn evolve(config: &ExperimentConfig) -> Result<ScanReport> {
    config.validate(Command::Evolve)?;
    let instance = load_or_sample_instance(config)?;
    instance.validate()?;
    let eval = ErrorEvaluator::new(&instance, config.sweep_order(), config.dimension_cap)?;
    let mut rows = Vec::new();
    for &l in &config.l {
        let schedule = build_schedule(l, instance.gamma())?;
        for &t in &config.t {
            let start = Instant::now();
            let mut row = base_row(config, instance.n, instance.k, l, t, instance.seed);
            row.model = if instance.is_sparse() {
                "sparse"
            } else {
                "dense"
            }
            .to_string();
            row.kappa = instance
                .p_b
                .map(|p_b| p_b * instance.gamma() as f64 / instance.n as f64);
            row.n_disorder = 1;
            row.n_bernoulli = usize::from(instance.is_sparse());
            match eval.observed_error(&schedule, t, config.r, config.p) {
                Ok(v) => row.observed = Some(v),
                Err(e) => row.fail(format!("simulation: {e}")),
            }
            match instance_bound(config, &instance, l, t) {
                Ok(b) => {
                    row.bound = Some(b);
                    if let Some(obs) = row.observed {
                        let est = NormEstimate {
                            value: obs,
                            stderr: 0.0,
                            num_samples: 1,
                            p: config.p,
                        };
                        match error_ratio(&est, b) {
                            Ok(ratio) => row.ratio = Some(ratio.value),
                            Err(e) => row.fail(format!("ratio: {e}")),
                        }
                    }
                }
                Err(e) => row.fail(format!("bound: {e}")),
            }
            if config.record_timing {
                row.wall_time_s = Some(start.elapsed().as_secs_f64());
            }
            rows.push(row);
        }
    }
    Ok(ScanReport {
        config: config.clone(),
        rows,
        fits: Vec::new(),
    })
}
