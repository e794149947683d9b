//! Command-line front end: subcommands, table schemas, and manifests.
//!
//! Every command writes its tables into an output directory together with
//! a manifest. The manifest echoes the effective configuration in config
//! format, so passing it back through `--config` reproduces the run
//! exactly.
//!
//! Exit codes: 0 on success, 2 for configuration and usage problems,
//! 3 for input tables whose schema does not match.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::analytic::critical_gamma;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{run_analytic_sweep, run_monte_carlo, run_sample_critical};
use crate::lattice::{gain_profile, ChannelParams, GainProfile};
use crate::report::{fmt_f64, fmt_opt, parse_f64, parse_opt_f64, read_csv, write_csv, write_text};
use crate::spectrum::{eigenvalues, max_feasible_gamma_no_erasure};

pub const SPECTRUM_HEADER: &[&str] = &["k_index", "q_components", "lambda"];
pub const ANALYTIC_HEADER: &[&str] = &[
    "gamma",
    "e",
    "beta_stable",
    "beta_unstable",
    "pave_analytic",
    "pave_unstable",
    "var_analytic",
    "pave_meanfield",
    "critical_gamma",
];
pub const SIMULATE_HEADER: &[&str] = &[
    "gamma",
    "e",
    "beta_stable",
    "beta_unstable",
    "pave_analytic",
    "var_analytic",
    "pave_unstable",
    "pave_mc_mean",
    "pave_mc_stderr",
    "var_mc_mean",
    "feasible_fraction",
    "pave_meanfield",
];
pub const REALIZATIONS_HEADER: &[&str] = &[
    "gamma",
    "e",
    "realization",
    "seed",
    "feasible",
    "pave",
    "pvar",
    "min_eig",
];
pub const CRITICAL_HEADER: &[&str] = &["e", "realization", "seed", "max_feasible_gamma"];
pub const CRITICAL_SUMMARY_HEADER: &[&str] = &[
    "e",
    "count",
    "min",
    "max",
    "mean",
    "critical_gamma_analytic",
];
pub const PLOTDATA_HEADER: &[&str] = &["figure", "series", "e", "gamma", "value", "err"];

#[derive(Parser)]
#[command(name = "sinrgrid", version, about = "Minimum-power SINR solver on toroidal lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file (required by all commands except plotdata).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (defaults to the config's output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the configured master seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Override the configured realization count.
    #[arg(long, global = true, value_name = "N")]
    realizations: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the coupling-matrix eigenvalue spectrum at gamma_min.
    Spectrum,
    /// Sweep the analytic fixed point over the configured grid.
    Analytic,
    /// Run the Monte Carlo sweep over the configured grid.
    Simulate,
    /// Sample per-realization feasibility boundaries at a single e.
    Critical,
    /// Merge result tables into long-format plot data and a gnuplot script.
    Plotdata {
        /// Result tables produced by the other commands.
        #[arg(value_name = "CSV")]
        inputs: Vec<PathBuf>,
    },
}

/// Parses the process arguments, dispatches, and maps errors to exit codes.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if cli.quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or(default_level),
    )
    .format_timestamp(None)
    .try_init();
    match execute(&cli) {
        Ok(outputs) => {
            if !cli.quiet {
                for path in outputs {
                    println!("{}", path.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Schema(_) | Error::GridMismatch(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Command::Plotdata { inputs } = &cli.command {
        let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, &e))?;
        return cmd_plotdata(inputs, &out_dir);
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    let mut config = RunConfig::from_file(config_path)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(realizations) = cli.realizations {
        config.realizations = realizations;
    }
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    config.output_dir = out_dir.display().to_string();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, &e))?;
    match cli.command {
        Command::Spectrum => cmd_spectrum(&config, &out_dir),
        Command::Analytic => cmd_analytic(&config, &out_dir),
        Command::Simulate => cmd_simulate(&config, &out_dir),
        Command::Critical => cmd_critical(&config, &out_dir),
        Command::Plotdata { .. } => unreachable!("handled above"),
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn manifest_text(command: &str, config: &RunConfig, outputs: &[PathBuf]) -> String {
    let mut text = String::new();
    text.push_str(&format!("# sinrgrid {command} manifest\n"));
    text.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# created_unix: {}\n", unix_now()));
    for path in outputs {
        text.push_str(&format!("# output: {}\n", path.display()));
    }
    text.push_str(&format!(
        "# rerun with: sinrgrid {command} --config <this file>\n"
    ));
    text.push_str(&config.to_config_text());
    text
}

fn write_manifest(
    command: &str,
    config: &RunConfig,
    out_dir: &Path,
    outputs: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = out_dir.join(format!("{command}_manifest.txt"));
    write_text(&path, &manifest_text(command, config, outputs))?;
    outputs.push(path);
    Ok(())
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Analytic critical target for each erasure probability, absent when it
/// is unbounded (or when everything is erased).
fn critical_per_e(profile: &GainProfile, noise: f64, e_grid: &[f64]) -> Vec<Option<f64>> {
    e_grid
        .iter()
        .map(|&e| {
            if e == 0.0 {
                finite(max_feasible_gamma_no_erasure(profile))
            } else if e < 1.0 {
                finite(critical_gamma(profile, noise, e))
            } else {
                None
            }
        })
        .collect()
}

/// Writes the eigenvalue spectrum of the coupling matrix at `gamma_min`.
pub fn cmd_spectrum(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = config.lattice_spec()?;
    let params = ChannelParams::new(config.alpha, config.noise, config.gamma_min)?;
    let profile = gain_profile(&spec, &params);
    let sp = eigenvalues(&profile, &params)?;
    log::info!(
        "spectrum: n = {}, lambda0 = {}, min = {}, max = {}",
        sp.len(),
        sp.lambda0(),
        sp.lambda_min(),
        sp.lambda_max()
    );
    let rows: Vec<Vec<String>> = (0..sp.len())
        .map(|k| {
            vec![
                k.to_string(),
                sp.q_vector(k)
                    .iter()
                    .map(|q| fmt_f64(*q))
                    .collect::<Vec<_>>()
                    .join(";"),
                fmt_f64(sp.lambdas()[k]),
            ]
        })
        .collect();
    let csv = out_dir.join("spectrum.csv");
    write_csv(&csv, SPECTRUM_HEADER, &rows)?;
    let mut outputs = vec![csv];
    write_manifest("spectrum", config, out_dir, &mut outputs)?;
    Ok(outputs)
}

/// Sweeps the analytic fixed point and the per-e critical target.
pub fn cmd_analytic(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sweep = config.to_sweep_config()?;
    let records = run_analytic_sweep(&sweep)?;
    let params = ChannelParams::new(sweep.alpha, sweep.noise, sweep.gamma_grid[0])?;
    let profile = gain_profile(&sweep.spec, &params);
    let critical = critical_per_e(&profile, sweep.noise, &sweep.e_grid);
    let gamma_count = sweep.gamma_grid.len();
    let rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                fmt_f64(r.gamma),
                fmt_f64(r.e),
                fmt_opt(r.beta_stable),
                fmt_opt(r.beta_unstable),
                fmt_opt(r.pave_analytic),
                fmt_opt(r.pave_unstable),
                fmt_opt(r.var_analytic),
                fmt_opt(r.pave_meanfield),
                fmt_opt(critical[i / gamma_count]),
            ]
        })
        .collect();
    let csv = out_dir.join("analytic.csv");
    write_csv(&csv, ANALYTIC_HEADER, &rows)?;
    let mut outputs = vec![csv];
    write_manifest("analytic", config, out_dir, &mut outputs)?;
    Ok(outputs)
}

/// Runs the Monte Carlo sweep; writes the aggregate table and, unless
/// disabled, the per-realization table.
pub fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sweep = config.to_sweep_config()?;
    let out = run_monte_carlo(&sweep)?;
    log::info!(
        "simulate: {} grid points x {} realizations, max SINR deviation {:.3e}",
        sweep.gamma_grid.len() * sweep.e_grid.len(),
        sweep.realizations,
        out.max_sinr_rel_err
    );
    if let Some(err) = out.max_eps_check_err {
        log::info!("simulate: max regularized-solver deviation {err:.3e}");
    }
    let rows: Vec<Vec<String>> = out
        .records
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.gamma),
                fmt_f64(r.e),
                fmt_opt(r.beta_stable),
                fmt_opt(r.beta_unstable),
                fmt_opt(r.pave_analytic),
                fmt_opt(r.var_analytic),
                fmt_opt(r.pave_unstable),
                fmt_opt(r.pave_mc_mean),
                fmt_opt(r.pave_mc_stderr),
                fmt_opt(r.var_mc_mean),
                fmt_opt(r.feasible_fraction),
                fmt_opt(r.pave_meanfield),
            ]
        })
        .collect();
    let csv = out_dir.join("simulate.csv");
    write_csv(&csv, SIMULATE_HEADER, &rows)?;
    let mut outputs = vec![csv];
    if config.save_realizations {
        let rows: Vec<Vec<String>> = out
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.gamma),
                    fmt_f64(r.e),
                    r.realization.to_string(),
                    r.seed.to_string(),
                    if r.feasible { "1" } else { "0" }.to_string(),
                    fmt_opt(r.pave),
                    fmt_opt(r.pvar),
                    fmt_opt(r.min_eig),
                ]
            })
            .collect();
        let csv = out_dir.join("realizations.csv");
        write_csv(&csv, REALIZATIONS_HEADER, &rows)?;
        outputs.push(csv);
    }
    write_manifest("simulate", config, out_dir, &mut outputs)?;
    Ok(outputs)
}

/// Samples per-realization feasibility boundaries at the configured single
/// erasure probability.
pub fn cmd_critical(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sweep = config.to_sweep_config()?;
    let run = run_sample_critical(&sweep)?;
    let e = sweep.e_grid[0];
    let rows: Vec<Vec<String>> = run
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt_f64(e),
                s.realization.to_string(),
                s.seed.to_string(),
                fmt_f64(s.max_feasible_gamma),
            ]
        })
        .collect();
    let csv = out_dir.join("critical.csv");
    write_csv(&csv, CRITICAL_HEADER, &rows)?;

    let params = ChannelParams::new(sweep.alpha, sweep.noise, sweep.gamma_grid[0])?;
    let profile = gain_profile(&sweep.spec, &params);
    let analytic = critical_per_e(&profile, sweep.noise, &sweep.e_grid)[0];
    log::info!(
        "critical: e = {e}, sample max = {}, sample mean = {}, analytic = {:?}",
        run.summary.max,
        run.summary.mean,
        analytic
    );
    let summary_rows = vec![vec![
        fmt_f64(run.summary.e),
        run.summary.count.to_string(),
        fmt_f64(run.summary.min),
        fmt_f64(run.summary.max),
        fmt_f64(run.summary.mean),
        fmt_opt(analytic),
    ]];
    let summary_csv = out_dir.join("critical_summary.csv");
    write_csv(&summary_csv, CRITICAL_SUMMARY_HEADER, &summary_rows)?;
    let mut outputs = vec![csv, summary_csv];
    write_manifest("critical", config, out_dir, &mut outputs)?;
    Ok(outputs)
}

/// (gamma, e, mc_mean, mc_stderr, feasible_fraction)
type McPoint = (f64, f64, Option<f64>, Option<f64>, Option<f64>);

#[derive(Default)]
struct PlotInputs {
    /// (gamma, e, beta_stable, beta_unstable, pave, pave_unstable, var, meanfield)
    analytic: Vec<(f64, f64, [Option<f64>; 6])>,
    mc: Vec<McPoint>,
    /// (e, max_feasible_gamma) per sample
    samples: Vec<(f64, f64)>,
}

fn classify_input(path: &Path, inputs: &mut PlotInputs) -> Result<()> {
    let (header, rows) = read_csv(path)?;
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    if header == ANALYTIC_HEADER {
        for row in rows {
            inputs.analytic.push((
                parse_f64(&row[0])?,
                parse_f64(&row[1])?,
                [
                    parse_opt_f64(&row[2])?,
                    parse_opt_f64(&row[3])?,
                    parse_opt_f64(&row[4])?,
                    parse_opt_f64(&row[5])?,
                    parse_opt_f64(&row[6])?,
                    parse_opt_f64(&row[7])?,
                ],
            ));
        }
    } else if header == SIMULATE_HEADER {
        for row in rows {
            inputs.mc.push((
                parse_f64(&row[0])?,
                parse_f64(&row[1])?,
                parse_opt_f64(&row[7])?,
                parse_opt_f64(&row[8])?,
                parse_opt_f64(&row[10])?,
            ));
        }
    } else if header == CRITICAL_HEADER || header == CRITICAL_SUMMARY_HEADER {
        // Both tables expose (e, gamma) in columns 0 and 3: per-sample
        // boundaries in one, the ensemble maximum in the other.
        for row in rows {
            inputs.samples.push((parse_f64(&row[0])?, parse_f64(&row[3])?));
        }
    } else {
        return Err(Error::Schema(format!(
            "{}: unrecognized columns [{}]",
            path.display(),
            header.join(", ")
        )));
    }
    Ok(())
}

const PLOT_SCRIPT: &str = r#"# gnuplot script for the tables in plotdata.csv
# usage: gnuplot plot.gp   (run inside the output directory)
set datafile separator comma
set key outside
set grid
set term pngcairo size 1000,700
set xlabel 'gamma'

filter(f, s, col) = (strcol(1) eq f && strcol(2) eq s) ? column(col) : 1/0

set output 'branches.png'
set ylabel 'fixed point / variance'
set logscale y
plot 'plotdata.csv' using 4:(filter('branches','stable',5))   with points pt 7 title 'stable root', \
     ''             using 4:(filter('branches','unstable',5)) with points pt 6 title 'unstable root', \
     ''             using 4:(filter('branches','variance',5)) with points pt 4 title 'power variance'

set output 'power.png'
set ylabel 'mean power'
unset logscale y
plot 'plotdata.csv' using 4:(filter('power','stable',5))    with points pt 7 title 'analytic', \
     ''             using 4:(filter('power','unstable',5))  with points pt 6 title 'unstable branch', \
     ''             using 4:(filter('power','meanfield',5)) with points pt 4 title 'mean field', \
     ''             using 4:(filter('power','mc',5)):6      with yerrorbars pt 1 title 'Monte Carlo'
"#;

/// Merges result tables into one long-format table plus a gnuplot script.
///
/// An analytic table alone yields the fixed-point branch figure (series
/// `stable`, `unstable`, `variance`). Adding a Monte Carlo table yields the
/// power figure as well (series `stable`, `unstable`, `meanfield`, `mc`,
/// and `sample_max` when a critical table is given).
pub fn cmd_plotdata(paths: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if paths.is_empty() {
        return Err(Error::Schema("plotdata needs at least one input table".into()));
    }
    let mut inputs = PlotInputs::default();
    for path in paths {
        classify_input(path, &mut inputs)?;
    }

    if !inputs.analytic.is_empty() && !inputs.mc.is_empty() {
        let targets: std::collections::HashSet<u64> =
            inputs.analytic.iter().map(|r| r.0.to_bits()).collect();
        if !inputs.mc.iter().any(|r| targets.contains(&r.0.to_bits())) {
            return Err(Error::Schema(
                "analytic and Monte Carlo tables share no target value".into(),
            ));
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |figure: &str, series: &str, e: f64, gamma: f64, value: Option<f64>, err: Option<f64>| {
        if let Some(v) = value {
            rows.push(vec![
                figure.to_string(),
                series.to_string(),
                fmt_f64(e),
                fmt_f64(gamma),
                fmt_f64(v),
                fmt_opt(err),
            ]);
        }
    };

    for (gamma, e, values) in &inputs.analytic {
        let [beta_stable, beta_unstable, pave, pave_unstable, variance, meanfield] = *values;
        push("branches", "stable", *e, *gamma, beta_stable, None);
        push("branches", "unstable", *e, *gamma, beta_unstable, None);
        push("branches", "variance", *e, *gamma, variance, None);
        if !inputs.mc.is_empty() {
            push("power", "stable", *e, *gamma, pave, None);
            push("power", "unstable", *e, *gamma, pave_unstable, None);
            push("power", "meanfield", *e, *gamma, meanfield, None);
        }
    }
    for (gamma, e, mean, stderr, _fraction) in &inputs.mc {
        push("power", "mc", *e, *gamma, *mean, *stderr);
    }
    for (e, max_gamma) in &inputs.samples {
        // Vertical feasibility marker: the value carries the sample's own
        // boundary so the series is self-contained.
        push("power", "sample_max", *e, *max_gamma, Some(*max_gamma), None);
    }

    let csv = out_dir.join("plotdata.csv");
    write_csv(&csv, PLOTDATA_HEADER, &rows)?;
    let script = out_dir.join("plot.gp");
    write_text(&script, PLOT_SCRIPT)?;
    let manifest = out_dir.join("plotdata_manifest.txt");
    let mut text = String::new();
    text.push_str("# sinrgrid plotdata manifest\n");
    text.push_str(&format!("# version: {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# created_unix: {}\n", unix_now()));
    for path in paths {
        text.push_str(&format!("# input: {}\n", path.display()));
    }
    text.push_str(&format!(
        "# rerun with: sinrgrid plotdata {} --out {}\n",
        paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(" "),
        out_dir.display()
    ));
    write_text(&manifest, &text)?;
    Ok(vec![csv, script, manifest])
}
