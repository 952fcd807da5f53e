//! Tabular reports that need no simulation: Trotter numbers, gate counts,
//! bound values, and serialized instances.

use crate::bounds::{
    delta, gate_count, solve_trotter_number, BoundInput, Overhead, SolverInput, SolverMode,
};
use crate::error::Result;
use crate::model::term_count;
use crate::trotter::stage_count;

use super::config::{Command, ExperimentConfig, ModelKind};
use super::scans::load_or_sample_instance;
use super::table::{fmt_f64, Table};

fn bound_input(
    config: &ExperimentConfig,
    n: usize,
    k: usize,
    l: usize,
    t: f64,
) -> Result<BoundInput> {
    let (p, r, j) = (config.p, config.r, config.energy_constant);
    let input = match config.model {
        ModelKind::Dense => BoundInput::dense(n, k, l, p, t, r, j)?,
        ModelKind::Sparse => BoundInput::sparse(n, k, l, p, t, r, j, config.kappa)?,
    };
    Ok(input.with_prefactor(config.prefactor))
}

fn with_preamble(config: &ExperimentConfig, mut table: Table) -> Table {
    table.preamble = config.to_toml().lines().map(str::to_string).collect();
    table
}

/// A report table with its success flag.
#[derive(Debug, Clone)]
pub struct Report {
    /// The table.
    pub table: Table,
    /// True when every row succeeded.
    pub ok: bool,
}

/// Minimal Trotter numbers for each `(n, k, l, t, ε, δ)` in both norm
/// modes, with gate counts under every overhead and the back-substituted
/// inequality `λ(p★, r)/ε ≤ 1/(e p★)` at `r` and `r − 1`.
pub fn solve_r(config: &ExperimentConfig) -> Result<Report> {
    config.validate(Command::SolveR)?;
    let mut header = vec![
        "model",
        "n",
        "k",
        "l",
        "t",
        "epsilon",
        "delta",
        "mode",
        "p_star",
        "r",
        "lhs",
        "lhs_previous",
        "rhs",
    ];
    let gate_columns: Vec<String> = Overhead::ALL
        .iter()
        .map(|o| format!("gates_{}", o.name()))
        .collect();
    header.extend(gate_columns.iter().map(String::as_str));
    header.push("error");
    let mut table = Table::new(&header);
    let mut ok = true;
    for (n, k) in config.points() {
        for &l in &config.l {
            for &t in &config.t {
                for &epsilon in &config.epsilon {
                    for &delta in &config.delta {
                        for mode in [SolverMode::OperatorNorm, SolverMode::FixedState] {
                            let mode_name = match mode {
                                SolverMode::OperatorNorm => "operator_norm",
                                SolverMode::FixedState => "fixed_state",
                            };
                            let mut row = vec![
                                config.model.name().to_string(),
                                n.to_string(),
                                k.to_string(),
                                l.to_string(),
                                fmt_f64(t),
                                fmt_f64(epsilon),
                                fmt_f64(delta),
                                mode_name.to_string(),
                            ];
                            let solved = bound_input(config, n, k, l, t).and_then(|bound| {
                                let out = solve_trotter_number(&SolverInput {
                                    epsilon,
                                    delta,
                                    mode,
                                    bound,
                                })?;
                                let gamma = term_count(n, k)? as f64;
                                let gates = Overhead::ALL
                                    .iter()
                                    .map(|&o| gate_count(l, gamma, out.r as f64, o, n))
                                    .collect::<Result<Vec<f64>>>()?;
                                Ok((out, gates))
                            });
                            match solved {
                                Ok((out, gates)) => {
                                    row.extend([
                                        fmt_f64(out.p_star),
                                        out.r.to_string(),
                                        fmt_f64(out.lhs),
                                        fmt_f64(out.lhs_previous),
                                        fmt_f64(out.rhs),
                                    ]);
                                    row.extend(gates.into_iter().map(fmt_f64));
                                    row.push(String::new());
                                }
                                Err(e) => {
                                    ok = false;
                                    row.extend(std::iter::repeat_n(
                                        String::new(),
                                        5 + Overhead::ALL.len(),
                                    ));
                                    row.push(e.to_string());
                                }
                            }
                            table.push(row);
                        }
                    }
                }
            }
        }
    }
    Ok(Report {
        table: with_preamble(config, table),
        ok,
    })
}

/// Gate counts `Υ(l)·Γ·r·overhead` at the configured `r` and overhead.
pub fn gatecount(config: &ExperimentConfig) -> Result<Report> {
    config.validate(Command::GateCount)?;
    let mut table = Table::new(&["n", "k", "l", "r", "gamma", "stages", "overhead", "gates"]);
    for (n, k) in config.points() {
        let gamma = term_count(n, k)?;
        for &l in &config.l {
            let overhead = config.overhead;
            table.push(vec![
                n.to_string(),
                k.to_string(),
                l.to_string(),
                config.r.to_string(),
                gamma.to_string(),
                stage_count(l)?.to_string(),
                overhead.name().to_string(),
                fmt_f64(gate_count(l, gamma as f64, config.r as f64, overhead, n)?),
            ]);
        }
    }
    Ok(Report {
        table: with_preamble(config, table),
        ok: true,
    })
}

/// Bound values over the `(n, k, l, t)` grid (no simulation, no size cap).
///
/// The sparse first-order bound depends on sampled masks and is reported
/// by `scan-n` / `scan-t` instead; here it is an error row.
pub fn bounds(config: &ExperimentConfig) -> Result<Report> {
    config.validate(Command::Bounds)?;
    let mut table = Table::new(&[
        "model",
        "n",
        "k",
        "l",
        "p",
        "t",
        "r",
        "kappa",
        "prefactor",
        "bound",
        "error",
    ]);
    let mut ok = true;
    let prefactor = match config.prefactor {
        crate::bounds::PrefactorMode::Full => "full",
        crate::bounds::PrefactorMode::Unit => "unit",
    };
    for (n, k) in config.points() {
        for &l in &config.l {
            for &t in &config.t {
                let value = bound_input(config, n, k, l, t).and_then(|input| delta(&input));
                let (bound, error) = match value {
                    Ok(v) => (fmt_f64(v), String::new()),
                    Err(e) => {
                        ok = false;
                        (String::new(), e.to_string())
                    }
                };
                table.push(vec![
                    config.model.name().to_string(),
                    n.to_string(),
                    k.to_string(),
                    l.to_string(),
                    fmt_f64(config.p),
                    fmt_f64(t),
                    config.r.to_string(),
                    if config.model == ModelKind::Sparse {
                        fmt_f64(config.kappa)
                    } else {
                        String::new()
                    },
                    prefactor.to_string(),
                    bound,
                    error,
                ]);
            }
        }
    }
    Ok(Report {
        table: with_preamble(config, table),
        ok,
    })
}

/// JSON of the instance sampled from `master_seed` at the first `(n, k)`.
pub fn gen(config: &ExperimentConfig) -> Result<String> {
    config.validate(Command::Gen)?;
    let mut json = load_or_sample_instance(config)?.to_json()?;
    json.push('\n');
    Ok(json)
}
