//! Input states: momentum-squeezed vacua and finitely squeezed GKP combs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadgrid::{ModeState, QuadratureGrid, Representation};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Minimum samples per amplitude standard deviation for a GKP spike.
pub const MIN_SPIKE_SAMPLES: f64 = 4.0;

/// Minimum samples per amplitude standard deviation for a squeezed Gaussian,
/// required in both representations.
pub const MIN_GAUSSIAN_SAMPLES: f64 = 1.0;

/// Largest admissible weight of the outermost kept comb peak.
pub const TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Parameters of a finitely squeezed GKP state: spike width `delta_spike`,
/// inverse envelope width `delta_envelope`, and the comb truncation `n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkpParams {
    pub delta_spike: f64,
    pub delta_envelope: f64,
    pub n_max: usize,
}

impl GkpParams {
    pub fn new(delta_spike: f64, delta_envelope: f64, n_max: usize) -> Result<Self> {
        for (name, v) in [("delta_spike", delta_spike), ("delta_envelope", delta_envelope)] {
            if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        let params = Self {
            delta_spike,
            delta_envelope,
            n_max,
        };
        let w = params.outer_peak_weight();
        if w >= TRUNCATION_TOLERANCE {
            return Err(Error::InadmissibleTruncation(format!(
                "outer peak weight {w:.3e} >= {TRUNCATION_TOLERANCE:e} at n_max = {n_max}, delta = {delta_envelope}"
            )));
        }
        Ok(params)
    }

    /// Smallest admissible truncation for the given widths.
    pub fn with_auto_truncation(delta_spike: f64, delta_envelope: f64) -> Result<Self> {
        if !(delta_envelope.is_finite() && delta_envelope > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_envelope = {delta_envelope} must be positive"
            )));
        }
        Self::new(delta_spike, delta_envelope, minimal_truncation(delta_envelope))
    }

    /// Equal spike and envelope widths.
    pub fn symmetric(delta: f64) -> Result<Self> {
        Self::with_auto_truncation(delta, delta)
    }

    /// `exp(-(2 n_max)^2 pi delta^2 / 2)`.
    pub fn outer_peak_weight(&self) -> f64 {
        let m = 2.0 * self.n_max as f64;
        (-m * m * PI * self.delta_envelope.powi(2) / 2.0).exp()
    }
}

/// Smallest `n_max` with `exp(-(2 n_max)^2 pi delta^2 / 2) < 1e-12`.
pub fn minimal_truncation(delta_envelope: f64) -> usize {
    let bound = (-2.0 * TRUNCATION_TOLERANCE.ln() / (PI * delta_envelope * delta_envelope)).sqrt() / 2.0;
    let mut n = bound.floor().max(0.0) as usize;
    while (-(2.0 * n as f64).powi(2) * PI * delta_envelope.powi(2) / 2.0).exp() >= TRUNCATION_TOLERANCE {
        n += 1;
    }
    n
}

fn check_gaussian_resolution(sigma: f64, grid: &QuadratureGrid) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    let momentum_samples = sigma / grid.momentum_spacing();
    let position_samples = (1.0 / sigma) / grid.spacing();
    if momentum_samples < MIN_GAUSSIAN_SAMPLES || position_samples < MIN_GAUSSIAN_SAMPLES {
        return Err(Error::Unresolvable(format!(
            "sigma = {sigma}: {momentum_samples:.2} momentum / {position_samples:.2} position samples per std"
        )));
    }
    Ok(())
}

/// `|sigma>_p`: momentum amplitudes proportional to `exp(-p^2 / (2 sigma^2))`.
pub fn squeezed_momentum(sigma: f64, grid: &QuadratureGrid) -> Result<ModeState> {
    check_gaussian_resolution(sigma, grid)?;
    ModeState::from_fn(*grid, Representation::Momentum, |p| {
        C64::new((-p * p / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}

/// Gaussian wavepacket centred at `(q0, p0)` with amplitude width `width` in
/// position. `width = 1` is the vacuum.
pub fn gaussian(grid: &QuadratureGrid, q0: f64, p0: f64, width: f64) -> Result<ModeState> {
    check_gaussian_resolution(1.0 / width, grid)?;
    ModeState::from_fn(*grid, Representation::Position, |q| {
        C64::from_polar((-(q - q0).powi(2) / (2.0 * width * width)).exp(), p0 * q)
    })
}

pub fn vacuum(grid: &QuadratureGrid) -> Result<ModeState> {
    gaussian(grid, 0.0, 0.0, 1.0)
}

fn check_spike(params: &GkpParams, grid: &QuadratureGrid) -> Result<()> {
    let samples = params.delta_spike / grid.spacing();
    if samples < MIN_SPIKE_SAMPLES {
        return Err(Error::Unresolvable(format!(
            "GKP spike width {} covers {samples:.2} samples, need {MIN_SPIKE_SAMPLES}",
            params.delta_spike
        )));
    }
    // Re-run the admissibility check in case the struct was built by hand.
    GkpParams::new(params.delta_spike, params.delta_envelope, params.n_max).map(|_| ())
}

/// Unnormalized comb over peak indices `m` (peak at `m sqrt(pi)`, weight
/// `exp(-m^2 pi delta^2 / 2)`).
fn comb(params: &GkpParams, grid: &QuadratureGrid, indices: impl Iterator<Item = i64> + Clone) -> Vec<C64> {
    let d2 = params.delta_spike * params.delta_spike;
    let e2 = params.delta_envelope * params.delta_envelope;
    grid.points()
        .into_iter()
        .map(|q| {
            let v: f64 = indices
                .clone()
                .map(|m| {
                    let mf = m as f64;
                    let centre = mf * SQRT_PI;
                    (-mf * mf * PI * e2 / 2.0 - (q - centre).powi(2) / (2.0 * d2)).exp()
                })
                .sum();
            C64::new(v, 0.0)
        })
        .collect()
}

/// `|0_L>`: peaks at even multiples of sqrt(pi), `n` in `[-n_max, n_max]`.
pub fn gkp_zero(params: &GkpParams, grid: &QuadratureGrid) -> Result<ModeState> {
    check_spike(params, grid)?;
    let n = params.n_max as i64;
    let amps = comb(params, grid, (-n..=n).map(|k| 2 * k));
    ModeState::normalized(*grid, Representation::Position, amps)
}

/// `|1_L>`: peaks at odd multiples of sqrt(pi). The range `n` in
/// `[-n_max - 1, n_max]` keeps the comb symmetric under `q -> -q`.
pub fn gkp_one(params: &GkpParams, grid: &QuadratureGrid) -> Result<ModeState> {
    check_spike(params, grid)?;
    let n = params.n_max as i64;
    let amps = comb(params, grid, (-n - 1..=n).map(|k| 2 * k + 1));
    ModeState::normalized(*grid, Representation::Position, amps)
}

fn combine(a: &ModeState, b: &ModeState, sign: f64) -> Result<ModeState> {
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x + y * sign) / 2f64.sqrt())
        .collect();
    ModeState::normalized(*a.grid(), a.rep(), amps)
}

/// `(|0_L> + |1_L>) / sqrt(2)`, renormalized.
pub fn gkp_plus(params: &GkpParams, grid: &QuadratureGrid) -> Result<ModeState> {
    combine(&gkp_zero(params, grid)?, &gkp_one(params, grid)?, 1.0)
}

/// `(|0_L> - |1_L>) / sqrt(2)`, renormalized.
pub fn gkp_minus(params: &GkpParams, grid: &QuadratureGrid) -> Result<ModeState> {
    combine(&gkp_zero(params, grid)?, &gkp_one(params, grid)?, -1.0)
}
