//! Matched analytic/Monte-Carlo sweeps over (target, erasure) grids.
//!
//! A sweep evaluates the same `(gamma, e)` grid twice: once through the
//! spectral fixed point and once by sampling erasure patterns and solving
//! each realization exactly. Seeds for realization `r` at erasure-grid
//! index `j` derive injectively from a master seed, so a sweep is
//! reproducible bit for bit; aggregation runs in realization-index order,
//! making the output independent of how many worker threads execute it.

use rayon::prelude::*;

use crate::analytic::{mean_field_power, solve_beta, Branch};
use crate::erasure::{active_indices, mix64, sample_mask, ErasureMask};
use crate::error::{Error, Result};
use crate::lattice::{gain_profile, ChannelParams, GainProfile, LatticeSpec};
use crate::numeric::{
    build_matrix, max_feasible_gamma_sample, max_sinr_rel_err, solve_powers,
    solve_powers_regularized,
};
use crate::spectrum::{eigenvalues, pave_no_erasure};

/// Parameters of one sweep: lattice, channel constants, grids, and seeding.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: LatticeSpec,
    pub alpha: f64,
    pub noise: f64,
    /// SINR targets, strictly increasing.
    pub gamma_grid: Vec<f64>,
    /// Erasure probabilities, each in [0, 1].
    pub e_grid: Vec<f64>,
    /// Number of Monte Carlo realizations per grid point.
    pub realizations: usize,
    pub master_seed: u64,
    /// Optional regularization strength for per-point solver cross-checks.
    pub eps_check: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        ChannelParams::new(self.alpha, self.noise, 1.0)?;
        if self.gamma_grid.is_empty() {
            return Err(Error::InvalidSpec("gamma grid is empty".into()));
        }
        for g in &self.gamma_grid {
            if !(*g > 0.0) || !g.is_finite() {
                return Err(Error::InvalidSpec(format!("gamma {g} must be positive")));
            }
        }
        if self.gamma_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec(
                "gamma grid must be strictly increasing".into(),
            ));
        }
        if self.e_grid.is_empty() {
            return Err(Error::InvalidSpec("e grid is empty".into()));
        }
        if self.e_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidSpec(
                "erasure probabilities must lie in [0, 1]".into(),
            ));
        }
        if self.realizations == 0 {
            return Err(Error::InvalidSpec("at least one realization required".into()));
        }
        if let Some(eps) = self.eps_check {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "eps_check must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }

    fn params(&self, gamma: f64) -> Result<ChannelParams> {
        ChannelParams::new(self.alpha, self.noise, gamma)
    }
}

/// Seed for realization `realization` at erasure-grid index `e_index`.
///
/// Built from bijective mixing of the master seed with the packed pair, so
/// distinct `(e_index, realization)` pairs never collide within a run
/// (for `e_index < 2^24` and `realization < 2^40`).
pub fn derive_seed(master_seed: u64, e_index: usize, realization: usize) -> u64 {
    mix64(mix64(master_seed) ^ ((e_index as u64) << 40) ^ realization as u64)
}

/// One aggregated grid point; analytic and Monte Carlo fields are filled by
/// their respective sweeps and merged in output tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub gamma: f64,
    pub e: f64,
    pub beta_stable: Option<f64>,
    pub beta_unstable: Option<f64>,
    pub pave_analytic: Option<f64>,
    pub var_analytic: Option<f64>,
    pub pave_unstable: Option<f64>,
    pub pave_mc_mean: Option<f64>,
    pub pave_mc_stderr: Option<f64>,
    pub var_mc_mean: Option<f64>,
    /// Fraction of realizations that were feasible; `None` on analytic-only
    /// records.
    pub feasible_fraction: Option<f64>,
    pub pave_meanfield: Option<f64>,
}

impl SweepRecord {
    fn empty(gamma: f64, e: f64) -> Self {
        SweepRecord {
            gamma,
            e,
            beta_stable: None,
            beta_unstable: None,
            pave_analytic: None,
            var_analytic: None,
            pave_unstable: None,
            pave_mc_mean: None,
            pave_mc_stderr: None,
            var_mc_mean: None,
            feasible_fraction: None,
            pave_meanfield: None,
        }
    }
}

/// Outcome of a single Monte Carlo realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRow {
    pub gamma: f64,
    pub e: f64,
    pub realization: usize,
    pub seed: u64,
    pub feasible: bool,
    /// Mean power over active links; absent when infeasible.
    pub pave: Option<f64>,
    /// Power variance over active links; absent when infeasible.
    pub pvar: Option<f64>,
    /// Smallest eigenvalue of the restricted matrix; absent only when the
    /// pattern erased every link.
    pub min_eig: Option<f64>,
}

/// Full result of a Monte Carlo sweep: aggregates, per-realization rows,
/// and end-to-end solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct McOutput {
    pub records: Vec<SweepRecord>,
    pub rows: Vec<RealizationRow>,
    /// Largest relative SINR deviation over all feasible realizations: the
    /// apex property says every active constraint is tight, so this is the
    /// end-to-end accuracy of the linear solver.
    pub max_sinr_rel_err: f64,
    /// Largest per-link deviation between the restricted and regularized
    /// solvers, when `eps_check` is set (probed on the first realization of
    /// every grid point).
    pub max_eps_check_err: Option<f64>,
}

/// Analytic sweep: fixed point, mean/variance, and mean-field baseline at
/// every grid point. Targets past the critical point yield absent values
/// rather than errors.
pub fn run_analytic_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let profile = gain_profile(&config.spec, &config.params(config.gamma_grid[0])?);
    let mut records = Vec::with_capacity(config.e_grid.len() * config.gamma_grid.len());
    for &e in &config.e_grid {
        for &gamma in &config.gamma_grid {
            let params = config.params(gamma)?;
            let sp = eigenvalues(&profile, &params)?;
            let mut rec = SweepRecord::empty(gamma, e);
            rec.pave_meanfield = mean_field_power(&profile, &params, e).ok();
            if e == 0.0 {
                // No erasures: the fixed point sits at beta = 0 and the
                // closed-form circulant solution applies.
                if let Ok(p) = pave_no_erasure(&sp) {
                    rec.beta_stable = Some(0.0);
                    rec.pave_analytic = Some(p);
                    rec.var_analytic = Some(0.0);
                }
            } else if e < 1.0 {
                match solve_beta(e, &sp) {
                    Ok(roots) => {
                        if let Some(stable) =
                            roots.iter().rev().find(|r| r.branch == Branch::Stable)
                        {
                            rec.beta_stable = Some(stable.beta);
                            rec.pave_analytic = Some(stable.p_ave);
                            rec.var_analytic = Some(stable.variance);
                        }
                        if let Some(unstable) =
                            roots.iter().find(|r| r.branch == Branch::Unstable)
                        {
                            rec.beta_unstable = Some(unstable.beta);
                            rec.pave_unstable = Some(unstable.p_ave);
                        }
                    }
                    Err(Error::NoSolution) => {}
                    Err(other) => return Err(other),
                }
            }
            // e = 1: nothing remains but the interference-free mean field.
            records.push(rec);
        }
    }
    Ok(records)
}

struct RealizationOutcome {
    row: RealizationRow,
    sinr_rel_err: f64,
    eps_check_err: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn run_one_realization(
    m: &faer::Mat<f64>,
    profile: &GainProfile,
    params: &ChannelParams,
    mask: &ErasureMask,
    gamma: f64,
    e: f64,
    realization: usize,
    eps_check: Option<f64>,
) -> Result<RealizationOutcome> {
    let base = RealizationRow {
        gamma,
        e,
        realization,
        seed: mask.seed(),
        feasible: false,
        pave: None,
        pvar: None,
        min_eig: None,
    };
    match solve_powers(m, mask) {
        Ok(sol) => {
            let act = active_indices(mask);
            let sinr_rel_err = max_sinr_rel_err(profile, params, &act, &sol.powers);
            // Cross-check the restricted solve against the regularized
            // full-lattice solve on the first realization of the point.
            let eps_check_err = match (eps_check, realization) {
                (Some(eps), 0) => solve_powers_regularized(m, mask, eps)
                    .ok()
                    .filter(|reg| reg.feasible)
                    .map(|reg| {
                        sol.powers
                            .iter()
                            .zip(&reg.powers)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max)
                    }),
                _ => None,
            };
            Ok(RealizationOutcome {
                row: RealizationRow {
                    feasible: true,
                    pave: Some(sol.p_ave),
                    pvar: Some(sol.p_var),
                    min_eig: Some(sol.min_active_eigenvalue),
                    ..base
                },
                sinr_rel_err,
                eps_check_err,
            })
        }
        Err(Error::Infeasible {
            min_active_eigenvalue,
            ..
        }) => Ok(RealizationOutcome {
            row: RealizationRow {
                min_eig: Some(min_active_eigenvalue),
                ..base
            },
            sinr_rel_err: 0.0,
            eps_check_err: None,
        }),
        // A fully erased pattern has no power system; count it as an
        // infeasible draw in the aggregates.
        Err(Error::EmptyNetwork) => Ok(RealizationOutcome {
            row: base,
            sinr_rel_err: 0.0,
            eps_check_err: None,
        }),
        Err(other) => Err(other),
    }
}

/// Monte Carlo sweep: samples `realizations` erasure patterns per erasure
/// probability (shared across the whole gamma grid), solves each pattern
/// exactly, and aggregates over feasible realizations.
///
/// Realizations run in parallel; results are collected and aggregated in
/// realization-index order, so the output is identical at any thread count.
pub fn run_monte_carlo(config: &SweepConfig) -> Result<McOutput> {
    config.validate()?;
    let profile = gain_profile(&config.spec, &config.params(config.gamma_grid[0])?);
    let n = config.spec.n();
    let r_count = config.realizations;

    let mut records = Vec::new();
    let mut rows = Vec::with_capacity(config.e_grid.len() * config.gamma_grid.len() * r_count);
    let mut max_sinr = 0.0f64;
    let mut max_eps: Option<f64> = None;

    for (j, &e) in config.e_grid.iter().enumerate() {
        // Masks depend on (e, realization) only, so the same pattern is
        // reused at every target on the grid.
        let masks: Vec<ErasureMask> = (0..r_count)
            .map(|r| sample_mask(n, e, derive_seed(config.master_seed, j, r)))
            .collect();
        for &gamma in &config.gamma_grid {
            let params = config.params(gamma)?;
            let m = build_matrix(&profile, &params);
            let outcomes: Vec<RealizationOutcome> = masks
                .par_iter()
                .enumerate()
                .map(|(r, mask)| {
                    run_one_realization(
                        &m,
                        &profile,
                        &params,
                        mask,
                        gamma,
                        e,
                        r,
                        config.eps_check,
                    )
                })
                .collect::<Result<_>>()?;

            let feasible: Vec<&RealizationRow> =
                outcomes.iter().map(|o| &o.row).filter(|r| r.feasible).collect();
            let nf = feasible.len();
            let mut rec = SweepRecord::empty(gamma, e);
            rec.feasible_fraction = Some(nf as f64 / r_count as f64);
            if nf > 0 {
                let paves: Vec<f64> = feasible.iter().map(|r| r.pave.unwrap()).collect();
                let mean = paves.iter().sum::<f64>() / nf as f64;
                rec.pave_mc_mean = Some(mean);
                if nf > 1 {
                    let ss: f64 = paves.iter().map(|p| (p - mean) * (p - mean)).sum();
                    rec.pave_mc_stderr =
                        Some((ss / ((nf - 1) as f64 * nf as f64)).sqrt());
                }
                rec.var_mc_mean =
                    Some(feasible.iter().map(|r| r.pvar.unwrap()).sum::<f64>() / nf as f64);
            }
            records.push(rec);

            for o in outcomes {
                max_sinr = max_sinr.max(o.sinr_rel_err);
                if let Some(err) = o.eps_check_err {
                    max_eps = Some(max_eps.unwrap_or(0.0).max(err));
                }
                rows.push(o.row);
            }
        }
    }
    Ok(McOutput {
        records,
        rows,
        max_sinr_rel_err: max_sinr,
        max_eps_check_err: max_eps,
    })
}

/// Largest supportable target of one sampled erasure pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSample {
    pub realization: usize,
    pub seed: u64,
    pub max_feasible_gamma: f64,
}

/// Ensemble statistics of the per-sample critical targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSummary {
    pub e: f64,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Per-sample critical targets and their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRun {
    pub samples: Vec<CriticalSample>,
    pub summary: CriticalSummary,
}

/// Samples `realizations` erasure patterns at the configured single `e` and
/// locates each pattern's own feasibility boundary.
///
/// The maximum over realizations is the sample analogue of the analytic
/// critical target, which bounds it from above asymptotically.
pub fn run_sample_critical(config: &SweepConfig) -> Result<CriticalRun> {
    config.validate()?;
    if config.e_grid.len() != 1 {
        return Err(Error::InvalidSpec(format!(
            "critical sampling expects exactly one erasure probability, got {}",
            config.e_grid.len()
        )));
    }
    let e = config.e_grid[0];
    let profile = gain_profile(&config.spec, &config.params(config.gamma_grid[0])?);
    let n = config.spec.n();
    let samples: Vec<CriticalSample> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.master_seed, 0, r);
            let mask = sample_mask(n, e, seed);
            CriticalSample {
                realization: r,
                seed,
                max_feasible_gamma: max_feasible_gamma_sample(&profile, config.noise, &mask),
            }
        })
        .collect();
    let values: Vec<f64> = samples.iter().map(|s| s.max_feasible_gamma).collect();
    let summary = CriticalSummary {
        e,
        count: values.len(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: values.iter().sum::<f64>() / values.len() as f64,
    };
    Ok(CriticalRun { samples, summary })
}

/// Error metrics for one grid point of a matched analytic/Monte-Carlo pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub gamma: f64,
    pub e: f64,
    /// |MC mean - analytic| / |analytic|, when both present.
    pub pave_rel_err: Option<f64>,
    /// (MC mean - analytic) / stderr; zero when the difference is
    /// negligible relative to the value even at zero spread.
    pub pave_z: Option<f64>,
    pub var_rel_err: Option<f64>,
    pub var_z: Option<f64>,
}

/// Per-erasure endpoint comparison: where each pipeline loses feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointRow {
    pub e: f64,
    /// Largest target with an analytic mean.
    pub gamma_analytic_end: Option<f64>,
    /// Largest target with any feasible realization.
    pub gamma_mc_end: Option<f64>,
}

/// Full comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub endpoints: Vec<EndpointRow>,
    pub max_pave_rel_err: Option<f64>,
    pub max_abs_pave_z: Option<f64>,
    pub max_var_rel_err: Option<f64>,
}

fn z_score(diff: f64, stderr: Option<f64>, scale: f64) -> Option<f64> {
    match stderr {
        Some(s) if s > 0.0 => Some(diff / s),
        // Zero spread: identical draws. Call the score zero when the
        // difference itself is negligible against the value.
        Some(_) => Some(if diff.abs() <= 1e-12 * scale.abs() {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }),
        None => None,
    }
}

/// Matches an analytic sweep against a Monte Carlo sweep point by point.
///
/// Both inputs must cover the same `(gamma, e)` grid in the same order.
pub fn compare(analytic: &[SweepRecord], mc: &[SweepRecord]) -> Result<CompareTable> {
    if analytic.len() != mc.len() {
        return Err(Error::GridMismatch(format!(
            "{} analytic records vs {} Monte Carlo records",
            analytic.len(),
            mc.len()
        )));
    }
    let mut rows = Vec::with_capacity(analytic.len());
    for (a, m) in analytic.iter().zip(mc) {
        if a.gamma != m.gamma || a.e != m.e {
            return Err(Error::GridMismatch(format!(
                "grid point ({}, {}) vs ({}, {})",
                a.gamma, a.e, m.gamma, m.e
            )));
        }
        let mut row = CompareRow {
            gamma: a.gamma,
            e: a.e,
            pave_rel_err: None,
            pave_z: None,
            var_rel_err: None,
            var_z: None,
        };
        if let (Some(pa), Some(pm)) = (a.pave_analytic, m.pave_mc_mean) {
            if pa != 0.0 {
                row.pave_rel_err = Some((pm - pa).abs() / pa.abs());
            }
            row.pave_z = z_score(pm - pa, m.pave_mc_stderr, pa);
        }
        if let (Some(va), Some(vm)) = (a.var_analytic, m.var_mc_mean) {
            if va != 0.0 {
                row.var_rel_err = Some((vm - va).abs() / va.abs());
            }
        }
        rows.push(row);
    }

    let mut es: Vec<f64> = analytic.iter().map(|r| r.e).collect();
    es.sort_by(f64::total_cmp);
    es.dedup();
    let endpoints = es
        .into_iter()
        .map(|e| EndpointRow {
            e,
            gamma_analytic_end: analytic
                .iter()
                .filter(|r| r.e == e && r.pave_analytic.is_some())
                .map(|r| r.gamma)
                .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g)))),
            gamma_mc_end: mc
                .iter()
                .filter(|r| r.e == e && r.feasible_fraction.unwrap_or(0.0) > 0.0)
                .map(|r| r.gamma)
                .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g)))),
        })
        .collect();

    let fold_max = |it: &mut dyn Iterator<Item = f64>| -> Option<f64> {
        it.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    Ok(CompareTable {
        max_pave_rel_err: fold_max(&mut rows.iter().filter_map(|r| r.pave_rel_err)),
        max_abs_pave_z: fold_max(&mut rows.iter().filter_map(|r| r.pave_z.map(f64::abs))),
        max_var_rel_err: fold_max(&mut rows.iter().filter_map(|r| r.var_rel_err)),
        rows,
        endpoints,
    })
}
