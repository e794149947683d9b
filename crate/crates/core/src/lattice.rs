//! Toroidal lattice geometry, channel parameters, and path-gain profiles.
//!
//! Links sit on the sites of a d-dimensional torus (d = 1 or 2) with `side`
//! sites per dimension. Every pairwise coupling depends only on the offset
//! between the two sites, measured with the minimum-image convention, so a
//! profile of gains indexed by offset describes the whole network.

use crate::error::{Error, Result};

/// Geometry of the lattice: dimension, side length, and the ratio of the
/// transmitter-receiver separation to the lattice constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    dim: usize,
    side: usize,
    s: f64,
}

impl LatticeSpec {
    /// Validates and builds a lattice specification.
    ///
    /// `dim` must be 1 or 2, `side` at least 1, and `s` strictly positive
    /// and finite.
    pub fn new(dim: usize, side: usize, s: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidSpec(format!("dim must be 1 or 2, got {dim}")));
        }
        if side == 0 {
            return Err(Error::InvalidSpec("side must be at least 1".into()));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "separation ratio s must be positive and finite, got {s}"
            )));
        }
        Ok(LatticeSpec { dim, side, s })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Transmitter-receiver separation in units of the lattice constant.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Total number of links, `side^dim`.
    pub fn n(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Decodes a flat site index into per-dimension offsets.
    ///
    /// Row-major layout for d = 2: `idx = m1 * side + m2`.
    pub fn coords(&self, idx: usize) -> [usize; 2] {
        debug_assert!(idx < self.n());
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.side, idx % self.side],
        }
    }

    /// Flat index of the offset between two sites, componentwise modulo the
    /// side length.
    pub fn offset_index(&self, from: usize, to: usize) -> usize {
        let a = self.coords(from);
        let b = self.coords(to);
        let d0 = (b[0] + self.side - a[0]) % self.side;
        match self.dim {
            1 => d0,
            _ => {
                let d1 = (b[1] + self.side - a[1]) % self.side;
                d0 * self.side + d1
            }
        }
    }
}

/// Radio parameters shared by every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent; at least 2 so that interference sums converge.
    pub alpha: f64,
    /// Receiver noise power, strictly positive.
    pub noise: f64,
    /// Common SINR target, strictly positive.
    pub gamma0: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, noise: f64, gamma0: f64) -> Result<Self> {
        if !(alpha >= 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "path-loss exponent alpha must be >= 2, got {alpha}"
            )));
        }
        if !(noise > 0.0) || !noise.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "noise power must be positive and finite, got {noise}"
            )));
        }
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "SINR target gamma0 must be positive and finite, got {gamma0}"
            )));
        }
        Ok(ChannelParams {
            alpha,
            noise,
            gamma0,
        })
    }

    /// Same parameters with a different SINR target.
    pub fn with_gamma0(&self, gamma0: f64) -> Self {
        ChannelParams { gamma0, ..*self }
    }
}

/// Minimum-image Euclidean distance for an offset on the torus.
///
/// Each component `m` contributes `min(m, side - m)` to the squared
/// distance, so offsets and their reflections are equidistant.
pub fn torus_distance(offset: &[usize], side: usize) -> f64 {
    offset_r2(offset, side).sqrt()
}

fn offset_r2(offset: &[usize], side: usize) -> f64 {
    let mut r2 = 0.0;
    for &m in offset {
        let m = m % side;
        let w = m.min(side - m) as f64;
        r2 += w * w;
    }
    r2
}

/// Path gain between two links at the given offset.
///
/// Normalized so that the own-link gain (zero offset) is exactly 1; an
/// interferer at torus distance `r` contributes
/// `(s^2 / (r^2 + s^2))^(alpha/2)`, which decays like `r^-alpha`.
pub fn gain(offset: &[usize], spec: &LatticeSpec, params: &ChannelParams) -> f64 {
    let r2 = offset_r2(offset, spec.side);
    let s2 = spec.s * spec.s;
    (s2 / (r2 + s2)).powf(params.alpha / 2.0)
}

/// All gains indexed by flat offset.
#[derive(Debug, Clone)]
pub struct GainProfile {
    spec: LatticeSpec,
    g: Vec<f64>,
}

impl GainProfile {
    /// Builds a profile from explicit per-offset gains.
    ///
    /// Only the length and finiteness of the values are checked here;
    /// reflection symmetry is verified spectrally when eigenvalues are
    /// computed, so deliberately asymmetric profiles can be constructed for
    /// testing that check.
    pub fn from_values(spec: LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.n() {
            return Err(Error::InvalidSpec(format!(
                "profile has {} entries for a lattice of {} sites",
                values.len(),
                spec.n()
            )));
        }
        if values.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidSpec("profile entries must be finite".into()));
        }
        Ok(GainProfile { spec, g: values })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// Gains in flat offset order; entry 0 is the own-link gain 1.
    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// Tabulates the gain at every offset of the lattice.
pub fn gain_profile(spec: &LatticeSpec, params: &ChannelParams) -> GainProfile {
    let n = spec.n();
    let mut g = Vec::with_capacity(n);
    for idx in 0..n {
        let coords = spec.coords(idx);
        g.push(gain(&coords[..spec.dim()], spec, params));
    }
    GainProfile { spec: *spec, g }
}

/// Total interference gain seen by one link from all others,
/// `sum_{m != 0} g(m)`.
pub fn interference_sum(profile: &GainProfile) -> f64 {
    profile.g.iter().skip(1).sum()
}
