//! Exact spectrum of the coupling matrix via the discrete Fourier transform.
//!
//! The coupling matrix of a translation-invariant network is circulant (block
//! circulant for d = 2), so its eigenvalues are the DFT of one row:
//!
//! ```text
//! lambda(q) = (1/noise) * (1/gamma0 - sum_{m != 0} g(m) cos(q . m)),
//! q_s = 2 pi k_s / side.
//! ```
//!
//! For strictly positive gains the q = 0 mode minimizes lambda, and the mean
//! power of the fully populated network is `1 / lambda(0)`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::{interference_sum, ChannelParams, GainProfile};

/// Relative bound on spurious imaginary parts before the profile is deemed
/// asymmetric.
const IMAG_TOL: f64 = 1e-9;

/// Real eigenvalue spectrum of the coupling matrix, in flat wavevector
/// order (k for d = 1, k1 * side + k2 for d = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    dim: usize,
    side: usize,
    lambdas: Vec<f64>,
    lambda0: f64,
    lambda_min: f64,
}

impl EigenSpectrum {
    /// Builds a spectrum from explicit eigenvalues (useful for synthetic
    /// spectra in tests and closed-form checks).
    pub fn from_lambdas(dim: usize, side: usize, lambdas: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidSpec(format!("dim must be 1 or 2, got {dim}")));
        }
        if lambdas.len() != side.pow(dim as u32) {
            return Err(Error::InvalidSpec(format!(
                "{} eigenvalues for side {side}, dim {dim}",
                lambdas.len()
            )));
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidSpec("eigenvalues must be finite".into()));
        }
        let lambda0 = lambdas[0];
        let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(EigenSpectrum {
            dim,
            side,
            lambdas,
            lambda0,
            lambda_min,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Eigenvalues in flat wavevector order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Eigenvalue of the uniform (q = 0) mode.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Smallest eigenvalue; equals `lambda0` whenever all cross gains are
    /// positive.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.lambdas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean eigenvalue, `(1/N) sum_q lambda(q)`; equals the diagonal
    /// coupling `1 / (noise * gamma0)` because the off-diagonal cosine terms
    /// sum to zero over a full period.
    pub fn mean_lambda(&self) -> f64 {
        self.lambdas.iter().sum::<f64>() / self.lambdas.len() as f64
    }

    /// Wavevector components of the k-th eigenvalue, each `2 pi k_s / side`.
    pub fn q_vector(&self, k: usize) -> Vec<f64> {
        let step = 2.0 * std::f64::consts::PI / self.side as f64;
        match self.dim {
            1 => vec![step * k as f64],
            _ => vec![step * (k / self.side) as f64, step * (k % self.side) as f64],
        }
    }
}

/// Diagonalizes the coupling matrix of the given profile by FFT.
///
/// `O(N log N)` and exact up to roundoff; the result is checked to be real,
/// and a residual imaginary part above `1e-9 * (1 + |lambda|)` reports the
/// profile as asymmetric.
pub fn eigenvalues(profile: &GainProfile, params: &ChannelParams) -> Result<EigenSpectrum> {
    eigenvalues_at(profile, params.noise, params.gamma0)
}

/// [`eigenvalues`] for an explicit noise power and SINR target; used by
/// sweeps that vary the target while holding the profile fixed.
pub(crate) fn eigenvalues_at(
    profile: &GainProfile,
    noise: f64,
    gamma0: f64,
) -> Result<EigenSpectrum> {
    let spec = profile.spec();
    let side = spec.side();
    let n = spec.n();
    let g = profile.values();

    // First row of the coupling matrix: the diagonal carries the normalized
    // own-link term, off-diagonal entries are negated interference gains.
    let mut data: Vec<Complex64> = Vec::with_capacity(n);
    data.push(Complex64::new(1.0 / (noise * gamma0), 0.0));
    for &gm in &g[1..] {
        data.push(Complex64::new(-gm / noise, 0.0));
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(side);
    match spec.dim() {
        1 => fft.process(&mut data),
        _ => {
            // Separable 2-D transform: all rows, then all columns.
            for row in data.chunks_exact_mut(side) {
                fft.process(row);
            }
            let mut col = vec![Complex64::default(); side];
            for c in 0..side {
                for r in 0..side {
                    col[r] = data[r * side + c];
                }
                fft.process(&mut col);
                for r in 0..side {
                    data[r * side + c] = col[r];
                }
            }
        }
    }

    let mut lambdas = Vec::with_capacity(n);
    let mut imag_max = 0.0f64;
    for v in &data {
        let scale = 1.0 + v.re.abs();
        if v.im.abs() > IMAG_TOL * scale {
            imag_max = imag_max.max(v.im.abs());
        }
        lambdas.push(v.re);
    }
    if imag_max > 0.0 {
        return Err(Error::Asymmetry { imag_max });
    }
    EigenSpectrum::from_lambdas(spec.dim(), side, lambdas)
}

/// Mean transmit power of the fully populated network, `1 / lambda0`.
///
/// Errors with [`Error::Divergence`] when `lambda0 <= 0`, i.e. when the
/// target SINR is already infeasible without erasures.
pub fn pave_no_erasure(spectrum: &EigenSpectrum) -> Result<f64> {
    if spectrum.lambda0() <= 0.0 {
        return Err(Error::Divergence {
            value: spectrum.lambda0(),
        });
    }
    Ok(1.0 / spectrum.lambda0())
}

/// Largest supportable SINR target of the fully populated network,
/// `1 / sum_{m != 0} g(m)`; infinite for an isolated link.
pub fn max_feasible_gamma_no_erasure(profile: &GainProfile) -> f64 {
    let s = interference_sum(profile);
    if s == 0.0 {
        f64::INFINITY
    } else {
        1.0 / s
    }
}
