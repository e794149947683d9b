//! Exact minimum-power solutions for sampled erasure patterns.
//!
//! The coupling matrix of the full lattice is
//!
//! ```text
//! M[i][i] = 1 / (noise * gamma0),
//! M[i][j] = -g(j - i) / noise     (i != j),
//! ```
//!
//! and the minimum-power vector of an erasure pattern solves the restricted
//! system `M_a P = 1` on the active links. The target is feasible for the
//! pattern exactly when `M_a` is positive definite and the solution is
//! componentwise positive; at the solution every active link meets its SINR
//! constraint with equality.

use faer::prelude::*;
use faer::{Mat, Side};

use crate::erasure::{active_indices, ErasureMask};
use crate::error::{Error, Result};
use crate::lattice::{interference_sum, ChannelParams, GainProfile};

/// Minimum-power solution on the active sublattice of one erasure pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolution {
    /// Powers of the active links, in increasing link order.
    pub powers: Vec<f64>,
    /// Whether the restricted system is positive definite with a
    /// componentwise-positive solution.
    pub feasible: bool,
    /// Smallest eigenvalue of the restricted coupling matrix.
    pub min_active_eigenvalue: f64,
    /// Mean power over active links.
    pub p_ave: f64,
    /// Power variance taken across the whole lattice with erased links
    /// transmitting zero power, normalized per active link:
    /// `mean(p^2) - (na/N) * mean(p)^2` with means over the `na` active
    /// links. For a fully active lattice this is the ordinary population
    /// variance.
    pub p_var: f64,
}

fn mean_and_var(powers: &[f64], lattice_n: usize) -> (f64, f64) {
    if powers.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let na = powers.len() as f64;
    let mean = powers.iter().sum::<f64>() / na;
    // Centered within-active variance plus the erased-as-zero contribution;
    // this form avoids cancellation when the spread is small.
    let centered = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / na;
    let var = centered + (1.0 - na / lattice_n as f64) * mean * mean;
    (mean, var)
}

/// Dense coupling matrix of the full lattice for the given profile and
/// parameters.
pub fn build_matrix(profile: &GainProfile, params: &ChannelParams) -> Mat<f64> {
    let spec = *profile.spec();
    let n = spec.n();
    // Entry (i, j) depends only on the offset j - i, so tabulate one row.
    let mut row = Vec::with_capacity(n);
    row.push(1.0 / (params.noise * params.gamma0));
    for &g in &profile.values()[1..] {
        row.push(-g / params.noise);
    }
    Mat::from_fn(n, n, |i, j| row[spec.offset_index(i, j)])
}

/// Smallest eigenvalue of a positive definite matrix through inverse power
/// iteration on its Cholesky factorization.
///
/// The iteration starts from the all-ones direction, which has positive
/// overlap with the minimal eigenvector whenever the matrix has
/// non-positive off-diagonal entries (its inverse is then entrywise
/// non-negative), so convergence is guaranteed for coupling submatrices.
fn min_eig_from_llt(llt: &faer::linalg::solvers::Llt<f64>, n: usize) -> f64 {
    let mut v = Mat::from_fn(n, 1, |_, _| 1.0 / (n as f64).sqrt());
    let mut lam_prev = f64::INFINITY;
    for _ in 0..500 {
        let w = llt.solve(&v);
        let mut wv = 0.0;
        let mut ww = 0.0;
        for i in 0..n {
            wv += w[(i, 0)] * v[(i, 0)];
            ww += w[(i, 0)] * w[(i, 0)];
        }
        // With A w = v, the Rayleigh quotient of w is (w . v) / (w . w).
        let lam = wv / ww;
        let norm = ww.sqrt();
        for i in 0..n {
            v[(i, 0)] = w[(i, 0)] / norm;
        }
        if (lam - lam_prev).abs() <= 1e-13 * lam.abs() {
            return lam;
        }
        lam_prev = lam;
    }
    lam_prev
}

/// Smallest eigenvalue of a symmetric matrix, using the fast Cholesky path
/// when the matrix is positive definite and a full dense eigensolve
/// otherwise.
fn min_eig_symmetric(sub: &Mat<f64>) -> f64 {
    match sub.llt(Side::Lower) {
        Ok(llt) => min_eig_from_llt(&llt, sub.nrows()),
        Err(_) => sub
            .self_adjoint_eigenvalues(Side::Lower)
            .map(|evs| evs.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN),
    }
}

fn extract_submatrix(m: &Mat<f64>, act: &[usize]) -> Mat<f64> {
    Mat::from_fn(act.len(), act.len(), |r, c| m[(act[r], act[c])])
}

/// Solves the restricted system `M_a P = 1` for one erasure pattern.
///
/// Returns the componentwise-positive minimum-power solution when the
/// target is feasible. An infeasible pattern produces
/// [`Error::Infeasible`] carrying the smallest eigenvalue of the restricted
/// matrix and the number of non-positive entries of its algebraic solution;
/// a fully erased pattern produces [`Error::EmptyNetwork`].
pub fn solve_powers(m: &Mat<f64>, mask: &ErasureMask) -> Result<PowerSolution> {
    if mask.len() != m.nrows() {
        return Err(Error::InvalidSpec(format!(
            "mask of {} links for a {}-link matrix",
            mask.len(),
            m.nrows()
        )));
    }
    let act = active_indices(mask);
    let na = act.len();
    if na == 0 {
        return Err(Error::EmptyNetwork);
    }
    let sub = extract_submatrix(m, &act);

    match sub.llt(Side::Lower) {
        Ok(llt) => {
            let rhs = Mat::from_fn(na, 1, |_, _| 1.0);
            let x = llt.solve(&rhs);
            let powers: Vec<f64> = (0..na).map(|i| x[(i, 0)]).collect();
            let min_eig = min_eig_from_llt(&llt, na);
            let nonpositive = powers.iter().filter(|&&p| !(p > 0.0)).count();
            if nonpositive > 0 {
                return Err(Error::Infeasible {
                    min_active_eigenvalue: min_eig,
                    nonpositive_powers: nonpositive,
                });
            }
            let (p_ave, p_var) = mean_and_var(&powers, mask.len());
            Ok(PowerSolution {
                powers,
                feasible: true,
                min_active_eigenvalue: min_eig,
                p_ave,
                p_var,
            })
        }
        Err(_) => {
            // Indefinite restricted matrix: the target is infeasible for
            // this pattern. Report the true minimum eigenvalue and how far
            // the algebraic solution is from positivity.
            let min_eig = sub
                .self_adjoint_eigenvalues(Side::Lower)
                .map(|evs| evs.into_iter().fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::NAN);
            let lblt = sub.lblt(Side::Lower);
            let rhs = Mat::from_fn(na, 1, |_, _| 1.0);
            let x = lblt.solve(&rhs);
            let nonpositive = (0..na).filter(|&i| !(x[(i, 0)] > 0.0)).count();
            Err(Error::Infeasible {
                min_active_eigenvalue: min_eig,
                nonpositive_powers: nonpositive,
            })
        }
    }
}

/// Solves the regularized full-lattice system `(E M E + eps I) P = E 1`,
/// then restricts to the active links.
///
/// `E` zeroes erased rows and columns; the erased block decouples into
/// `eps I` with zero right-hand side, so erased coordinates solve to zero
/// exactly and the active block reproduces the restricted solution up to
/// an `O(eps)` shift. Unlike [`solve_powers`], an infeasible pattern is
/// reported in-band through the `feasible` flag, because the regularized
/// system stays solvable across the feasibility boundary.
pub fn solve_powers_regularized(
    m: &Mat<f64>,
    mask: &ErasureMask,
    eps: f64,
) -> Result<PowerSolution> {
    if mask.len() != m.nrows() {
        return Err(Error::InvalidSpec(format!(
            "mask of {} links for a {}-link matrix",
            mask.len(),
            m.nrows()
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "regularization eps must be positive and finite, got {eps}"
        )));
    }
    let n = m.nrows();
    let a = mask.active();
    let full = Mat::from_fn(n, n, |i, j| {
        let base = if a[i] && a[j] { m[(i, j)] } else { 0.0 };
        if i == j {
            base + eps
        } else {
            base
        }
    });
    let rhs = Mat::from_fn(n, 1, |i, _| if a[i] { 1.0 } else { 0.0 });
    let x = match full.llt(Side::Lower) {
        Ok(llt) => llt.solve(&rhs),
        Err(_) => full.lblt(Side::Lower).solve(&rhs),
    };
    if (0..n).any(|i| !x[(i, 0)].is_finite()) {
        return Err(Error::SingularSystem { eps });
    }

    let act = active_indices(mask);
    let powers: Vec<f64> = act.iter().map(|&i| x[(i, 0)]).collect();
    let min_eig = if act.is_empty() {
        f64::INFINITY
    } else {
        min_eig_symmetric(&extract_submatrix(m, &act))
    };
    let feasible = !act.is_empty() && min_eig > 0.0 && powers.iter().all(|&p| p > 0.0);
    let (p_ave, p_var) = mean_and_var(&powers, mask.len());
    Ok(PowerSolution {
        powers,
        feasible,
        min_active_eigenvalue: min_eig,
        p_ave,
        p_var,
    })
}

/// Largest relative SINR deviation over active links, recomputed directly
/// from the gain profile.
///
/// For the exact restricted solution every constraint is met with equality,
/// so this measures the accuracy of the linear solve end to end.
pub fn max_sinr_rel_err(
    profile: &GainProfile,
    params: &ChannelParams,
    act: &[usize],
    powers: &[f64],
) -> f64 {
    assert_eq!(act.len(), powers.len());
    let spec = profile.spec();
    let g = profile.values();
    let mut worst = 0.0f64;
    for (k, &i) in act.iter().enumerate() {
        let mut interference = 0.0;
        for (l, &j) in act.iter().enumerate() {
            if l != k {
                interference += g[spec.offset_index(j, i)] * powers[l];
            }
        }
        let sinr = powers[k] / (params.noise + interference);
        worst = worst.max((sinr - params.gamma0).abs() / params.gamma0);
    }
    worst
}

/// Largest SINR target the given erasure pattern can support, located by
/// bisection on the feasibility predicate of the restricted system.
///
/// Returns `f64::INFINITY` when the pattern has at most one active link or
/// when feasibility persists beyond a target of 10^6.
pub fn max_feasible_gamma_sample(
    profile: &GainProfile,
    noise: f64,
    mask: &ErasureMask,
) -> f64 {
    const GAMMA_CAP: f64 = 1e6;
    let act = active_indices(mask);
    let na = act.len();
    if na <= 1 {
        return f64::INFINITY;
    }
    let spec = *profile.spec();
    let g = profile.values();
    // Off-diagonal part is independent of gamma; only the diagonal moves.
    let offdiag = Mat::from_fn(na, na, |r, c| {
        if r == c {
            0.0
        } else {
            -g[spec.offset_index(act[r], act[c])] / noise
        }
    });
    let feasible = |gamma: f64| -> bool {
        let diag = 1.0 / (noise * gamma);
        let m = Mat::from_fn(na, na, |r, c| {
            if r == c {
                diag
            } else {
                offdiag[(r, c)]
            }
        });
        match m.llt(Side::Lower) {
            Ok(llt) => {
                let rhs = Mat::from_fn(na, 1, |_, _| 1.0);
                let x = llt.solve(&rhs);
                (0..na).all(|i| x[(i, 0)] > 0.0)
            }
            Err(_) => false,
        }
    };

    // The full-lattice mean-field value bounds the transition from below on
    // average; double from there until infeasible.
    let s: f64 = interference_sum(profile);
    let e = mask.e();
    let mut hi = if e < 1.0 && s > 0.0 {
        (1.0 / ((1.0 - e) * s)).min(GAMMA_CAP)
    } else {
        GAMMA_CAP
    };
    let mut lo = 0.0;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if hi >= GAMMA_CAP {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erasure::sample_mask;
    use crate::lattice::{gain_profile, LatticeSpec};
    use crate::spectrum::{eigenvalues, max_feasible_gamma_no_erasure};
    use proptest::prelude::*;

    fn setup(
        dim: usize,
        side: usize,
        gamma0: f64,
    ) -> (LatticeSpec, ChannelParams, GainProfile, Mat<f64>) {
        let spec = LatticeSpec::new(dim, side, 0.5).unwrap();
        let params = ChannelParams::new(4.0, 1.0, gamma0).unwrap();
        let profile = gain_profile(&spec, &params);
        let m = build_matrix(&profile, &params);
        (spec, params, profile, m)
    }

    fn full_mask(n: usize) -> ErasureMask {
        ErasureMask::from_active(vec![true; n], 0.0, 0)
    }

    #[test]
    fn full_mask_recovers_uniform_solution() {
        let (_, _, _, m) = setup(1, 4, 1.0);
        let sol = solve_powers(&m, &full_mask(4)).unwrap();
        assert!(sol.feasible);
        let expected = 1.0910601026880096;
        for &p in &sol.powers {
            assert!((p - expected).abs() < 1e-12 * expected);
        }
        assert!((sol.p_ave - expected).abs() < 1e-12 * expected);
        assert!(sol.p_var < 1e-20);
        // Minimum eigenvalue of the circulant equals the q = 0 mode.
        assert!((sol.min_active_eigenvalue - 0.9165397923875432).abs() < 1e-10);
    }

    #[test]
    fn infeasible_target_reports_diagnostics() {
        // gamma far beyond 1/S: the uniform mode has negative eigenvalue
        // and the algebraic solution turns negative.
        let (_, _, _, m) = setup(1, 8, 100.0);
        let err = solve_powers(&m, &full_mask(8)).unwrap_err();
        match err {
            Error::Infeasible {
                min_active_eigenvalue,
                nonpositive_powers,
            } => {
                assert!(min_active_eigenvalue < 0.0);
                assert!(nonpositive_powers > 0);
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        let (_, _, _, m) = setup(1, 4, 1.0);
        let mask = ErasureMask::from_active(vec![false; 4], 1.0, 0);
        assert!(matches!(solve_powers(&m, &mask), Err(Error::EmptyNetwork)));
    }

    #[test]
    fn single_active_link_needs_only_noise_power() {
        let (_, params, profile, m) = setup(1, 6, 3.0);
        let mut active = vec![false; 6];
        active[2] = true;
        let mask = ErasureMask::from_active(active, 0.8, 0);
        let sol = solve_powers(&m, &mask).unwrap();
        assert_eq!(sol.powers.len(), 1);
        // Without interferers the constraint is p / noise = gamma0.
        let expected = params.noise * params.gamma0;
        assert!((sol.powers[0] - expected).abs() < 1e-14 * expected);
        // One of six links transmits: the lattice-wide variance is
        // (1 - 1/6) p^2.
        let var = (1.0 - 1.0 / 6.0) * sol.powers[0] * sol.powers[0];
        assert!((sol.p_var - var).abs() < 1e-14 * var);
        // And the pattern supports any target.
        assert_eq!(
            max_feasible_gamma_sample(&profile, params.noise, &mask),
            f64::INFINITY
        );
    }

    #[test]
    fn fft_and_dense_eigenvalues_agree() {
        for (dim, side) in [(1usize, 16usize), (2, 4)] {
            let (_, params, profile, m) = setup(dim, side, 0.8);
            let sp = eigenvalues(&profile, &params).unwrap();
            let mut fft: Vec<f64> = sp.lambdas().to_vec();
            fft.sort_by(f64::total_cmp);
            let dense = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
            let mut dense: Vec<f64> = dense;
            dense.sort_by(f64::total_cmp);
            for (a, b) in fft.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10, "dim {dim}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn regularized_tracks_restricted_solution() {
        let (_, _, _, m) = setup(1, 16, 2.0);
        let mask = sample_mask(16, 0.3, 5);
        let exact = solve_powers(&m, &mask).unwrap();
        let mut prev_err = f64::INFINITY;
        for eps in [1e-3, 1e-6, 1e-9] {
            let reg = solve_powers_regularized(&m, &mask, eps).unwrap();
            assert!(reg.feasible);
            let err = exact
                .powers
                .iter()
                .zip(&reg.powers)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(err < 10.0 * eps, "eps {eps}: err {err}");
            assert!(err <= prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn regularized_handles_fully_erased_pattern() {
        let (_, _, _, m) = setup(1, 4, 1.0);
        let mask = ErasureMask::from_active(vec![false; 4], 1.0, 0);
        let sol = solve_powers_regularized(&m, &mask, 1e-6).unwrap();
        assert!(sol.powers.is_empty());
        assert!(!sol.feasible);
    }

    #[test]
    fn sinr_constraints_saturate_at_solution() {
        let (_, params, profile, m) = setup(1, 32, 3.0);
        let mask = sample_mask(32, 0.4, 11);
        let sol = solve_powers(&m, &mask).unwrap();
        let act = active_indices(&mask);
        let worst = max_sinr_rel_err(&profile, &params, &act, &sol.powers);
        assert!(worst < 1e-10, "worst SINR deviation {worst}");
    }

    #[test]
    fn sample_critical_gamma_matches_closed_form_for_full_mask() {
        let (_, params, profile, _) = setup(1, 16, 1.0);
        let mask = full_mask(16);
        let got = max_feasible_gamma_sample(&profile, params.noise, &mask);
        let want = max_feasible_gamma_no_erasure(&profile);
        assert!((got - want).abs() < 2e-6 * want, "{got} vs {want}");
        // The bracket endpoints behave as claimed.
        let m_lo = build_matrix(&profile, &params.with_gamma0(got * (1.0 - 1e-5)));
        assert!(solve_powers(&m_lo, &mask).is_ok());
        let m_hi = build_matrix(&profile, &params.with_gamma0(got * (1.0 + 1e-5)));
        assert!(solve_powers(&m_hi, &mask).is_err());
    }

    #[test]
    fn erasing_links_never_hurts_the_survivors() {
        // Interlacing: a principal submatrix has a larger smallest
        // eigenvalue, so any subset of a feasible pattern stays feasible
        // and supports a larger critical target.
        let (_, params, profile, m) = setup(1, 24, 4.0);
        let big = sample_mask(24, 0.2, 3);
        let mut smaller = big.active().to_vec();
        for i in (0..24).step_by(5) {
            smaller[i] = false;
        }
        let small = ErasureMask::from_active(smaller, 0.2, 3);
        if small.active_count() == 0 {
            return;
        }
        let g_big = max_feasible_gamma_sample(&profile, params.noise, &big);
        let g_small = max_feasible_gamma_sample(&profile, params.noise, &small);
        assert!(g_small >= g_big * (1.0 - 1e-5), "{g_small} < {g_big}");
        let _ = m;
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn solution_invariants(
            side in 2usize..24,
            gamma0 in 0.05f64..6.0,
            e in 0.0f64..0.9,
            seed in any::<u64>(),
        ) {
            let spec = LatticeSpec::new(1, side, 0.5).unwrap();
            let params = ChannelParams::new(4.0, 1.0, gamma0).unwrap();
            let profile = gain_profile(&spec, &params);
            let m = build_matrix(&profile, &params);
            let mask = sample_mask(side, e, seed);
            match solve_powers(&m, &mask) {
                Ok(sol) => {
                    prop_assert!(sol.feasible);
                    prop_assert!(sol.min_active_eigenvalue > 0.0);
                    prop_assert_eq!(sol.powers.len(), mask.active_count());
                    let (mean, var) = mean_and_var(&sol.powers, side);
                    prop_assert!((sol.p_ave - mean).abs() <= 1e-15 * mean.abs());
                    prop_assert!((sol.p_var - var).abs() <= 1e-15 * var.abs() + 1e-300);
                    for &p in &sol.powers {
                        prop_assert!(p > 0.0);
                    }
                }
                Err(Error::EmptyNetwork) => prop_assert_eq!(mask.active_count(), 0),
                Err(Error::Infeasible { .. }) => {}
                Err(other) => return Err(TestCaseError::fail(format!("{other:?}"))),
            }
        }

        #[test]
        fn regularized_agrees_with_restricted(
            side in 2usize..20,
            gamma0 in 0.05f64..4.0,
            e in 0.0f64..0.9,
            seed in any::<u64>(),
        ) {
            let spec = LatticeSpec::new(1, side, 0.5).unwrap();
            let params = ChannelParams::new(4.0, 1.0, gamma0).unwrap();
            let profile = gain_profile(&spec, &params);
            let m = build_matrix(&profile, &params);
            let mask = sample_mask(side, e, seed);
            if let Ok(exact) = solve_powers(&m, &mask) {
                let reg = solve_powers_regularized(&m, &mask, 1e-10).unwrap();
                prop_assert!(reg.feasible);
                let scale = exact.p_ave.max(1.0);
                for (a, b) in exact.powers.iter().zip(&reg.powers) {
                    prop_assert!((a - b).abs() <= 1e-6 * scale);
                }
            }
        }
    }
}
