//! Spectral fixed-point asymptotics for randomly erased networks.
//!
//! For erasure probability `e`, the large-N behavior of the minimum-power
//! solution is governed by a scalar `beta >= 0` solving
//!
//! ```text
//! e = (1/N) sum_q beta / (beta + lambda(q)),
//! ```
//!
//! with the full-lattice spectrum `lambda(q)`. The mean power is then
//! `1 / ((1-e) (beta + lambda0))` and the per-link power variance follows
//! from a second spectral mean. When `lambda0 < 0` (target beyond the
//! no-erasure boundary) the equation has either two roots or none: the
//! larger root is the physical, stable one, the smaller root carries a
//! negative formal variance, and the two merge at a critical target where
//! the variance diverges and feasibility is lost discontinuously. At the
//! merge the root sits at the edge of the asymptotic spectrum of the erased
//! coupling matrix, where `(1/N) sum_q lambda / (beta + lambda)^2 = 0`.

use crate::error::{Error, Result};
use crate::lattice::{interference_sum, ChannelParams, GainProfile};
use crate::spectrum::{eigenvalues_at, max_feasible_gamma_no_erasure, EigenSpectrum};

/// Number of log-spaced scan points used to bracket fixed-point roots.
const SCAN_POINTS: usize = 2048;
/// Relative width at which root bisections stop.
const ROOT_REL_TOL: f64 = 1e-12;
/// Residual magnitude below which a root counts as converged.
const CONVERGED_TOL: f64 = 1e-10;
/// Relative width at which the critical-target bisection stops; tight so
/// that the two roots at the returned target have effectively merged.
const GAMMA_REL_TOL: f64 = 1e-13;

/// Stability classification of a fixed-point root by the sign of the
/// variance denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Stable,
    Unstable,
}

/// One root of the fixed-point equation with its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    /// Root of the fixed-point equation; non-negative.
    pub beta: f64,
    /// Stable iff the variance denominator is positive.
    pub branch: Branch,
    /// Analytic mean power, `1 / ((1-e) (beta + lambda0))`.
    pub p_ave: f64,
    /// Analytic per-link power variance; negative on the unstable branch.
    pub variance: f64,
    /// Whether the residual at `beta` is below `1e-10`.
    pub converged: bool,
    /// Fixed-point residual at `beta`.
    pub residual: f64,
}

/// Compensated (Neumaier) mean of `f(lambda)` over the spectrum, so that
/// residuals stay trustworthy down to ~1e-15 even for large lattices.
fn spectral_mean(spectrum: &EigenSpectrum, f: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &l in spectrum.lambdas() {
        let x = f(l);
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / spectrum.len() as f64
}

fn residual_unchecked(beta: f64, e: f64, spectrum: &EigenSpectrum) -> f64 {
    e - spectral_mean(spectrum, |l| beta / (beta + l))
}

/// Variance denominator `(1/N) sum_q lambda / (beta + lambda)^2`; also the
/// negated derivative of the residual, so its sign classifies branches.
fn variance_denominator(beta: f64, spectrum: &EigenSpectrum) -> f64 {
    spectral_mean(spectrum, |l| {
        let d = beta + l;
        l / (d * d)
    })
}

fn variance_numerator(beta: f64, spectrum: &EigenSpectrum) -> f64 {
    spectral_mean(spectrum, |l| {
        let d = beta + l;
        beta / (d * d)
    })
}

/// Smallest admissible `beta`: just above the resolvent pole at
/// `-lambda_min`, or essentially zero when the spectrum is positive.
fn beta_lower_bound(spectrum: &EigenSpectrum) -> f64 {
    (-spectrum.lambda_min()).max(0.0) * (1.0 + 1e-12) + 1e-300
}

/// Fixed-point residual `e - (1/N) sum_q beta / (beta + lambda(q))`.
///
/// The mean is the discrete realization of the fundamental-cell integral;
/// it requires `beta + lambda(q) > 0` for every mode (or `beta = 0` with a
/// strictly positive spectrum, where the residual is exactly `e`).
pub fn beta_residual(beta: f64, e: f64, spectrum: &EigenSpectrum) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1]"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Domain(format!("beta must be finite and >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return if spectrum.lambda_min() > 0.0 {
            Ok(e)
        } else {
            Err(Error::Domain(
                "beta = 0 needs a strictly positive spectrum".into(),
            ))
        };
    }
    if beta + spectrum.lambda_min() <= 0.0 {
        return Err(Error::Domain(format!(
            "beta + lambda_min = {} <= 0",
            beta + spectrum.lambda_min()
        )));
    }
    Ok(residual_unchecked(beta, e, spectrum))
}

fn bisect_residual_root(
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    e: f64,
    spectrum: &EigenSpectrum,
) -> f64 {
    while b - a > ROOT_REL_TOL * b {
        let mid = 0.5 * (a + b);
        let fm = residual_unchecked(mid, e, spectrum);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Maximizes `f` on `[a, b]` by golden-section search; `f` is unimodal on
/// the bracket by construction (one interior zero of its derivative).
fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-14 * b.abs().max(1e-300) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Location of the asymptotic spectrum edge: the `beta` where the variance
/// denominator vanishes, i.e. where the resolvent mean is extremal.
///
/// Defined only when the spectrum has a negative mode; with a positive
/// spectrum the denominator never vanishes.
pub fn edge_beta(spectrum: &EigenSpectrum) -> Result<f64> {
    if spectrum.lambda_min() >= 0.0 {
        return Err(Error::Domain(
            "spectrum edge requires a negative eigenvalue".into(),
        ));
    }
    let lo = beta_lower_bound(spectrum);
    // Beyond beta_pos the denominator is provably positive: compare the
    // positive and negative spectral masses at their extreme weights.
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    for &l in spectrum.lambdas() {
        if l > 0.0 {
            pos += l;
        } else {
            neg -= l;
        }
    }
    if pos <= neg {
        return Err(Error::Domain(
            "spectrum has non-positive total mass".into(),
        ));
    }
    let w = (pos / neg).sqrt();
    let hi = ((spectrum.lambda_max() + w * (-spectrum.lambda_min())) / (w - 1.0))
        .max(2.0 * lo);
    let mean_term = |b: f64| -spectral_mean(spectrum, |l| b / (b + l));
    // Coarse scan for the argmax, then golden-section refinement between
    // the neighboring scan points.
    let ratio = (hi / lo).ln();
    let at = |i: usize| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp();
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..SCAN_POINTS {
        let v = mean_term(at(i));
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let a = at(best.saturating_sub(1));
    let b = at((best + 1).min(SCAN_POINTS - 1));
    Ok(golden_max(a, b, mean_term))
}

fn classify(beta: f64, e: f64, spectrum: &EigenSpectrum) -> FixedPointSolution {
    let residual = residual_unchecked(beta, e, spectrum);
    let den = variance_denominator(beta, spectrum);
    let num = variance_numerator(beta, spectrum);
    let branch = if den > 0.0 {
        Branch::Stable
    } else {
        Branch::Unstable
    };
    let bl0 = beta + spectrum.lambda0();
    let p_ave = if bl0 > 0.0 {
        1.0 / ((1.0 - e) * bl0)
    } else {
        f64::INFINITY
    };
    let variance = if den == 0.0 || bl0 <= 0.0 {
        f64::INFINITY
    } else {
        num / den / ((1.0 - e) * bl0 * bl0)
    };
    FixedPointSolution {
        beta,
        branch,
        p_ave,
        variance,
        converged: residual.abs() <= CONVERGED_TOL,
        residual,
    }
}

/// All roots of the fixed-point equation, sorted by `beta` and classified
/// stable/unstable.
///
/// The residual is scanned over a log-spaced grid on
/// `(max(0, -lambda_min), beta_hi)` with `beta_hi = (e/(1-e)) lambda_max`
/// widened until the residual turns negative; each sign change is refined
/// by bisection to `1e-12` relative. When the spectrum has a negative mode
/// the scan additionally includes the spectrum-edge point [`edge_beta`],
/// where the residual is maximal — so the pair of roots is still detected
/// arbitrarily close to their merge, beyond any fixed grid resolution.
///
/// With `lambda0 > 0` exactly one root exists; with `lambda0 < 0` there are
/// two roots before the merge and none after, in which case
/// [`Error::NoSolution`] is returned.
pub fn solve_beta(e: f64, spectrum: &EigenSpectrum) -> Result<Vec<FixedPointSolution>> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::Domain(format!(
            "erasure probability must lie strictly inside (0, 1), got {e}"
        )));
    }
    let lo = beta_lower_bound(spectrum);
    let mut hi = (e / (1.0 - e)) * spectrum.lambda_max();
    if !(hi > lo) {
        // The residual is strictly negative beyond lo, so no root exists.
        return Err(Error::NoSolution);
    }
    for _ in 0..64 {
        if residual_unchecked(hi, e, spectrum) < 0.0 {
            break;
        }
        hi *= 2.0;
    }

    let ratio = (hi / lo).ln();
    let mut betas: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    if spectrum.lambda_min() < 0.0 {
        if let Ok(edge) = edge_beta(spectrum) {
            if edge > lo && edge < hi {
                let pos = betas.partition_point(|&b| b < edge);
                betas.insert(pos, edge);
            }
        }
    }

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_b = betas[0];
    let mut prev_f = residual_unchecked(prev_b, e, spectrum);
    if prev_f == 0.0 {
        roots.push(prev_b);
    }
    for &b in &betas[1..] {
        let f = residual_unchecked(b, e, spectrum);
        if f == 0.0 {
            roots.push(b);
        } else if prev_f * f < 0.0 {
            roots.push(bisect_residual_root(prev_b, b, prev_f, e, spectrum));
        }
        prev_b = b;
        prev_f = f;
    }
    if roots.is_empty() {
        return Err(Error::NoSolution);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots
        .into_iter()
        .map(|b| classify(b, e, spectrum))
        .collect())
}

/// Analytic mean power for a converged fixed point,
/// `1 / ((1-e) (beta + lambda0))`.
pub fn pave_erased(fp: &FixedPointSolution, spectrum: &EigenSpectrum, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1)"
        )));
    }
    if !fp.converged {
        return Err(Error::Domain("fixed point has not converged".into()));
    }
    let bl0 = fp.beta + spectrum.lambda0();
    if bl0 <= 0.0 {
        return Err(Error::Divergence { value: bl0 });
    }
    Ok(1.0 / ((1.0 - e) * bl0))
}

/// Analytic per-link power variance for a converged fixed point.
///
/// The value is negative on the unstable branch and diverges as the
/// denominator `(1/N) sum_q lambda / (beta + lambda)^2` approaches zero at
/// the critical target.
pub fn variance_erased(
    fp: &FixedPointSolution,
    spectrum: &EigenSpectrum,
    e: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1)"
        )));
    }
    if !fp.converged {
        return Err(Error::Domain("fixed point has not converged".into()));
    }
    let den = variance_denominator(fp.beta, spectrum);
    if den.abs() < 1e-14 {
        return Err(Error::Edge { denominator: den });
    }
    let bl0 = fp.beta + spectrum.lambda0();
    if bl0 <= 0.0 {
        return Err(Error::Divergence { value: bl0 });
    }
    let num = variance_numerator(fp.beta, spectrum);
    Ok(num / den / ((1.0 - e) * bl0 * bl0))
}

/// Largest SINR target for which the fixed-point equation still has a
/// stable root, located by bisection between the no-erasure boundary
/// `1/interference_sum` and a doubled upper bound past the merge.
///
/// The bisection runs to `1e-13` relative width and returns the feasible
/// side, so at the returned target [`solve_beta`] still succeeds and its
/// two roots have effectively merged at the spectrum edge, where the
/// variance denominator vanishes.
///
/// Returns `f64::INFINITY` when no merge exists below `2^40` times the
/// no-erasure boundary; with interference present the merge always exists
/// (the edge grows like `1/sqrt(1 - e)` as `e -> 1`), so this is reachable
/// only for degenerate gain profiles.
pub fn critical_gamma(profile: &GainProfile, noise: f64, e: f64) -> f64 {
    assert!(
        e > 0.0 && e < 1.0,
        "erasure probability must lie strictly inside (0, 1), got {e}"
    );
    let gamma_star = max_feasible_gamma_no_erasure(profile);
    if !gamma_star.is_finite() {
        return f64::INFINITY;
    }
    let has_stable = |gamma: f64| -> bool {
        let sp = eigenvalues_at(profile, noise, gamma)
            .expect("gain profile must be reflection-symmetric");
        match solve_beta(e, &sp) {
            Ok(roots) => roots.iter().any(|r| r.branch == Branch::Stable),
            Err(_) => false,
        }
    };
    // Erasures strictly extend feasibility, so the no-erasure boundary is a
    // valid feasible bracket end.
    let mut lo = gamma_star;
    let mut hi = 2.0 * gamma_star;
    let cap = gamma_star * (1u64 << 40) as f64;
    while has_stable(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return f64::INFINITY;
        }
    }
    while hi - lo > GAMMA_REL_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if has_stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Reduced maximum SINR target under erasures.
///
/// Computed as the branch-merge point [`critical_gamma`]; the closed-form
/// reduction `gamma* / (1 + noise * beta * gamma*)` evaluated with the
/// fixed point at the no-erasure boundary `gamma*` is logged against it as
/// a cross-check rather than asserted, since the two agree only
/// approximately at finite N.
pub fn gamma_e(profile: &GainProfile, noise: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1)"
        )));
    }
    let gamma_star = max_feasible_gamma_no_erasure(profile);
    if e == 0.0 || !gamma_star.is_finite() {
        return Ok(gamma_star);
    }
    let gc = critical_gamma(profile, noise, e);
    if gc.is_finite() {
        let sp_star = eigenvalues_at(profile, noise, gamma_star)?;
        if let Ok(roots) = solve_beta(e, &sp_star) {
            if let Some(stable) = roots.iter().rev().find(|r| r.branch == Branch::Stable) {
                let closed = gamma_star / (1.0 + noise * stable.beta * gamma_star);
                log::debug!(
                    "reduced max target: closed form {closed:.6e} vs merge point {gc:.6e} \
                     (rel diff {:.2e})",
                    (closed - gc).abs() / gc
                );
            }
        }
    }
    Ok(gc)
}

/// Root of the finite-regularization fixed-point equation
/// `e / (1 - eps/beta) = (1/N) sum_q beta / (beta + lambda(q))`.
///
/// As `eps -> 0+` the root converges to the stable root of [`solve_beta`].
/// When several roots exist the largest (the stable analogue) is returned.
pub fn solve_beta_eps(e: f64, eps: f64, spectrum: &EigenSpectrum) -> Result<f64> {
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::Domain(format!(
            "erasure probability must lie strictly inside (0, 1), got {e}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!(
            "regularization eps must be positive and finite, got {eps}"
        )));
    }
    let lo = beta_lower_bound(spectrum).max(eps * (1.0 + 1e-12));
    // Flat-spectrum bound: beyond (e lambda_max + eps)/(1-e) the left side
    // drops below the right side for every mode.
    let hi = (e * spectrum.lambda_max() + eps) / (1.0 - e);
    if !(hi > lo) {
        return Err(Error::NoSolution);
    }
    let h = |b: f64| e / (1.0 - eps / b) - spectral_mean(spectrum, |l| b / (b + l));

    let ratio = (hi / lo).ln();
    let mut betas: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp())
        .collect();
    if spectrum.lambda_min() < 0.0 {
        if let Ok(edge) = edge_beta(spectrum) {
            if edge > lo && edge < hi {
                let pos = betas.partition_point(|&b| b < edge);
                betas.insert(pos, edge);
            }
        }
    }

    let mut last_root: Option<f64> = None;
    let mut prev_b = betas[0];
    let mut prev_f = h(prev_b);
    for &b in &betas[1..] {
        let f = h(b);
        if f == 0.0 {
            last_root = Some(b);
        } else if prev_f * f < 0.0 {
            let mut a = prev_b;
            let mut c = b;
            let mut fa = prev_f;
            while c - a > ROOT_REL_TOL * c {
                let mid = 0.5 * (a + c);
                let fm = h(mid);
                if fm == 0.0 {
                    a = mid;
                    c = mid;
                    break;
                }
                if fa * fm < 0.0 {
                    c = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            last_root = Some(0.5 * (a + c));
        }
        prev_b = b;
        prev_f = f;
    }
    last_root.ok_or(Error::NoSolution)
}

/// Mean-field power estimate: interference spread uniformly over the
/// lattice gives `p = noise * gamma0 / (1 - gamma0 (1-e) sum_{m!=0} g(m))`.
///
/// Exact at `e = 0` and `e = 1`; in between it is a lower estimate whose
/// singular target overshoots the true critical target.
pub fn mean_field_power(profile: &GainProfile, params: &ChannelParams, e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1]"
        )));
    }
    let denominator = 1.0 - params.gamma0 * (1.0 - e) * interference_sum(profile);
    if denominator <= 0.0 {
        return Err(Error::MeanFieldInfeasible { denominator });
    }
    Ok(params.noise * params.gamma0 / denominator)
}

/// Normalized residual of the spectrum-edge condition at `beta`:
/// `|(1/N) sum lambda/(lambda+beta)^2| / ((1/N) sum 1/(lambda+beta))`.
///
/// Near zero exactly when `beta` sits at the edge of the asymptotic
/// spectrum, i.e. at the branch merge.
pub fn edge_condition_residual(beta: f64, spectrum: &EigenSpectrum) -> f64 {
    let den = variance_denominator(beta, spectrum);
    let scale = spectral_mean(spectrum, |l| 1.0 / (beta + l));
    den.abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{gain_profile, ChannelParams, LatticeSpec};
    use crate::spectrum::eigenvalues;
    use proptest::prelude::*;

    fn profile_1d(side: usize) -> GainProfile {
        let spec = LatticeSpec::new(1, side, 0.5).unwrap();
        let params = ChannelParams::new(4.0, 1.0, 1.0).unwrap();
        gain_profile(&spec, &params)
    }

    fn spectrum_at(profile: &GainProfile, gamma: f64) -> EigenSpectrum {
        let params = ChannelParams::new(4.0, 1.0, gamma).unwrap();
        eigenvalues(profile, &params).unwrap()
    }

    fn flat_spectrum(lambda: f64, n: usize) -> EigenSpectrum {
        EigenSpectrum::from_lambdas(1, n, vec![lambda; n]).unwrap()
    }

    #[test]
    fn residual_at_zero_beta_is_e() {
        let sp = flat_spectrum(0.9, 8);
        assert_eq!(beta_residual(0.0, 0.37, &sp).unwrap(), 0.37);
    }

    #[test]
    fn residual_flat_spectrum_root() {
        let (lambda, e) = (0.9, 0.3);
        let beta = e * lambda / (1.0 - e);
        let r = beta_residual(beta, e, &flat_spectrum(lambda, 16)).unwrap();
        assert!(r.abs() < 1e-15, "residual {r}");
    }

    #[test]
    fn residual_domain_errors() {
        let sp = flat_spectrum(0.9, 4);
        assert!(matches!(
            beta_residual(-0.1, 0.3, &sp),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            beta_residual(0.1, 1.5, &sp),
            Err(Error::Domain(_))
        ));
        let neg = EigenSpectrum::from_lambdas(1, 2, vec![-0.5, 1.0]).unwrap();
        assert!(matches!(
            beta_residual(0.5, 0.3, &neg),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            beta_residual(0.0, 0.3, &neg),
            Err(Error::Domain(_))
        ));
        assert!(beta_residual(0.6, 0.3, &neg).is_ok());
    }

    #[test]
    fn solve_beta_flat_spectrum_closed_form() {
        let (lambda, e) = (0.9, 0.3);
        let roots = solve_beta(e, &flat_spectrum(lambda, 32)).unwrap();
        assert_eq!(roots.len(), 1);
        let fp = &roots[0];
        let expect = e * lambda / (1.0 - e);
        assert!((fp.beta - expect).abs() < 1e-11 * expect, "{}", fp.beta);
        assert_eq!(fp.branch, Branch::Stable);
        assert!(fp.converged);
        // Flat-spectrum cancellation: the mean power is 1/lambda for any e,
        // and the variance reduces to e / lambda^2.
        assert!((fp.p_ave - 1.0 / lambda).abs() < 1e-10 / lambda);
        assert!((fp.variance - e / (lambda * lambda)).abs() < 1e-9);
    }

    #[test]
    fn solve_beta_single_root_below_boundary() {
        // gamma = 2 is well below the no-erasure boundary ~11.98, so
        // lambda0 > 0 and exactly one converged stable root exists.
        let profile = profile_1d(500);
        let sp = spectrum_at(&profile, 2.0);
        let roots = solve_beta(0.5, &sp).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].branch, Branch::Stable);
        assert!(roots[0].converged);
        assert!(roots[0].residual.abs() < 1e-10);
        assert!(roots[0].variance > 0.0);
    }

    #[test]
    fn solve_beta_two_roots_above_boundary() {
        let profile = profile_1d(64);
        let gamma_star = crate::spectrum::max_feasible_gamma_no_erasure(&profile);
        let sp = spectrum_at(&profile, gamma_star * 1.05);
        assert!(sp.lambda0() < 0.0);
        let roots = solve_beta(0.5, &sp).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0].beta < roots[1].beta);
        assert_eq!(roots[0].branch, Branch::Unstable);
        assert_eq!(roots[1].branch, Branch::Stable);
        assert!(roots[0].variance < 0.0, "unstable variance {}", roots[0].variance);
        assert!(roots[1].variance > 0.0);
        for r in &roots {
            assert!(r.converged);
            assert!(r.beta + sp.lambda_min() > 0.0);
        }
    }

    #[test]
    fn solve_beta_rejects_degenerate_e() {
        let sp = flat_spectrum(1.0, 4);
        assert!(matches!(solve_beta(0.0, &sp), Err(Error::Domain(_))));
        assert!(matches!(solve_beta(1.0, &sp), Err(Error::Domain(_))));
    }

    #[test]
    fn critical_gamma_brackets_the_transition() {
        let profile = profile_1d(64);
        let gamma_star = crate::spectrum::max_feasible_gamma_no_erasure(&profile);
        let gc = critical_gamma(&profile, 1.0, 0.5);
        assert!(gc > gamma_star, "critical {gc} vs boundary {gamma_star}");
        // Two nearly merged roots on the feasible side, none past it.
        let sp_lo = spectrum_at(&profile, gc * 0.999);
        assert_eq!(solve_beta(0.5, &sp_lo).unwrap().len(), 2);
        let sp_hi = spectrum_at(&profile, gc * 1.01);
        assert!(matches!(solve_beta(0.5, &sp_hi), Err(Error::NoSolution)));
        // At the returned target itself the roots exist and have merged at
        // the spectrum edge.
        let sp_c = spectrum_at(&profile, gc);
        let roots = solve_beta(0.5, &sp_c).unwrap();
        let stable = roots.iter().find(|r| r.branch == Branch::Stable).unwrap();
        let res = edge_condition_residual(stable.beta, &sp_c);
        assert!(res < 1e-6, "edge-condition residual {res}");
    }

    #[test]
    fn critical_gamma_increases_with_erasure() {
        let profile = profile_1d(64);
        let g3 = critical_gamma(&profile, 1.0, 0.3);
        let g5 = critical_gamma(&profile, 1.0, 0.5);
        let g7 = critical_gamma(&profile, 1.0, 0.7);
        assert!(g3 < g5 && g5 < g7, "{g3}, {g5}, {g7}");
    }

    #[test]
    fn gamma_e_matches_critical_gamma() {
        let profile = profile_1d(64);
        let gc = critical_gamma(&profile, 1.0, 0.5);
        let ge = gamma_e(&profile, 1.0, 0.5).unwrap();
        assert!((ge - gc).abs() <= 1e-12 * gc);
        let gamma_star = crate::spectrum::max_feasible_gamma_no_erasure(&profile);
        assert_eq!(gamma_e(&profile, 1.0, 0.0).unwrap(), gamma_star);
    }

    #[test]
    fn gamma_e_diverges_as_erasure_saturates() {
        // The residual hump peaks near mean(lambda)^2 / (4 mean(lambda^2))
        // with mean(lambda) = 1/(n gamma), so the feasibility edge stays
        // finite for every e < 1 but grows like 1/sqrt(1 - e).
        let profile = profile_1d(16);
        let gamma_star = crate::spectrum::max_feasible_gamma_no_erasure(&profile);
        let ge5 = gamma_e(&profile, 1.0, 1.0 - 1e-5).unwrap();
        let ge9 = gamma_e(&profile, 1.0, 1.0 - 1e-9).unwrap();
        assert!(ge5.is_finite() && ge9.is_finite());
        assert!(ge5 > 100.0 * gamma_star, "{ge5}");
        let ratio = ge9 / ge5;
        assert!(
            (30.0..300.0).contains(&ratio),
            "square-root scaling violated: {ge5} -> {ge9} (ratio {ratio})"
        );
    }

    #[test]
    fn pave_erased_limits() {
        // e -> 0: recover the no-erasure power 1/lambda0.
        let profile = profile_1d(500);
        let sp = spectrum_at(&profile, 2.0);
        let roots = solve_beta(1e-9, &sp).unwrap();
        let p = pave_erased(&roots[0], &sp, 1e-9).unwrap();
        assert!((p - 1.0 / sp.lambda0()).abs() < 1e-6 / sp.lambda0());

        // e -> 1: interference vanishes and the power approaches
        // noise * gamma0 = 1.
        let profile = profile_1d(1000);
        let sp = spectrum_at(&profile, 1.0);
        let roots = solve_beta(0.999, &sp).unwrap();
        let stable = roots.iter().rev().find(|r| r.branch == Branch::Stable).unwrap();
        let p = pave_erased(stable, &sp, 0.999).unwrap();
        assert!((p - 1.0).abs() < 0.01, "near-total erasure power {p}");
    }

    #[test]
    fn variance_zero_at_zero_beta() {
        let sp = flat_spectrum(0.9, 8);
        let fp = FixedPointSolution {
            beta: 0.0,
            branch: Branch::Stable,
            p_ave: 1.0 / 0.9,
            variance: 0.0,
            converged: true,
            residual: 0.0,
        };
        assert_eq!(variance_erased(&fp, &sp, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn solve_beta_eps_flat_spectrum() {
        let (lambda, e, eps) = (0.9, 0.3, 0.01);
        let sp = flat_spectrum(lambda, 16);
        let beta = solve_beta_eps(e, eps, &sp).unwrap();
        let expect = (e * lambda + eps) / (1.0 - e);
        assert!((beta - expect).abs() < 1e-10 * expect, "{beta} vs {expect}");
    }

    #[test]
    fn solve_beta_eps_converges_to_stable_root() {
        let profile = profile_1d(32);
        let sp = spectrum_at(&profile, 3.0);
        let exact = solve_beta(0.3, &sp).unwrap()[0].beta;
        let mut prev = f64::INFINITY;
        for eps in [1e-3, 1e-5, 1e-7, 1e-9] {
            let b = solve_beta_eps(0.3, eps, &sp).unwrap();
            let err = (b - exact).abs();
            assert!(err < 10.0 * eps, "eps {eps}: {err}");
            assert!(err <= prev);
            prev = err;
        }
    }

    #[test]
    fn mean_field_limits() {
        let profile = profile_1d(100);
        let params = ChannelParams::new(4.0, 1.0, 2.0).unwrap();
        // e = 1: no interference.
        assert_eq!(
            mean_field_power(&profile, &params, 1.0).unwrap(),
            params.noise * params.gamma0
        );
        // e = 0: the closed-form no-erasure power, bit for bit.
        let s = interference_sum(&profile);
        let direct = params.noise * params.gamma0 / (1.0 - params.gamma0 * s);
        assert_eq!(mean_field_power(&profile, &params, 0.0).unwrap(), direct);
        // Past the singular point.
        let hot = ChannelParams::new(4.0, 1.0, 2.0 / s).unwrap();
        assert!(matches!(
            mean_field_power(&profile, &hot, 0.0),
            Err(Error::MeanFieldInfeasible { .. })
        ));
    }

    #[test]
    fn variance_diverges_toward_the_edge() {
        let profile = profile_1d(64);
        let gc = critical_gamma(&profile, 1.0, 0.5);
        let var_at = |gamma: f64| {
            let sp = spectrum_at(&profile, gamma);
            let roots = solve_beta(0.5, &sp).unwrap();
            let stable = roots.iter().rev().find(|r| r.branch == Branch::Stable).unwrap();
            variance_erased(stable, &sp, 0.5).unwrap()
        };
        let far = var_at(0.9 * gc);
        let near = var_at(0.9999 * gc);
        assert!(far > 0.0 && near > far, "variance {far} -> {near}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roots_satisfy_invariants(
            side in 8usize..64,
            e in 0.05f64..0.95,
            gamma in 0.2f64..10.0,
        ) {
            let profile = profile_1d(side);
            let sp = spectrum_at(&profile, gamma);
            match solve_beta(e, &sp) {
                Ok(roots) => {
                    prop_assert!(!roots.is_empty() && roots.len() <= 2);
                    for r in &roots {
                        prop_assert!(r.converged, "residual {}", r.residual);
                        prop_assert!(r.beta + sp.lambda_min() > 0.0);
                    }
                    if sp.lambda0() > 0.0 {
                        prop_assert_eq!(roots.len(), 1);
                        prop_assert_eq!(roots[0].branch, Branch::Stable);
                    }
                    if roots.len() == 2 {
                        prop_assert!(sp.lambda0() < 0.0);
                        prop_assert_eq!(roots[0].branch, Branch::Unstable);
                        prop_assert_eq!(roots[1].branch, Branch::Stable);
                    }
                }
                Err(Error::NoSolution) => prop_assert!(sp.lambda0() < 0.0),
                Err(other) => return Err(TestCaseError::fail(format!("{other:?}"))),
            }
        }

        #[test]
        fn mean_power_decreases_with_erasure(
            side in 16usize..64,
            gamma in 0.5f64..8.0,
        ) {
            // More erasures mean less interference, so the mean power can
            // only drop at a fixed feasible target.
            let profile = profile_1d(side);
            let sp = spectrum_at(&profile, gamma);
            let mut prev = f64::INFINITY;
            for e in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let roots = solve_beta(e, &sp).unwrap();
                let p = roots.last().unwrap().p_ave;
                prop_assert!(p <= prev * (1.0 + 1e-12));
                prev = p;
            }
        }
    }
}
