//! Discretized quadrature representation.
//!
//! Conventions: `[q, p] = i` (hbar = 1), `<p|psi> = (2 pi)^{-1/2} \int dq
//! e^{-ipq} psi(q)`. A grid of `n` points and extent `L` samples positions at
//! `q_j = -L/2 + j dq` with `dq = L / n`, and momenta at `p_m = (m - n/2) dp`
//! with `dp = 2 pi / L`, so that `n dq dp = 2 pi`.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform;

/// Tolerance on the norm of any state produced by a constructor or a unitary.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Edge amplitude above which a constructor emits a truncation warning.
pub const EDGE_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    n_points: usize,
    extent: f64,
}

impl QuadratureGrid {
    pub const DEFAULT_POINTS: usize = 4096;
    pub const DEFAULT_EXTENT: f64 = 40.0;

    pub fn new(n_points: usize, extent: f64) -> Result<Self> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points} is not a power of two >= 64"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent = {extent} must be positive")));
        }
        Ok(Self { n_points, extent })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Position spacing `dq`.
    pub fn spacing(&self) -> f64 {
        self.extent / self.n_points as f64
    }

    /// Momentum spacing `dp = 2 pi / L`.
    pub fn momentum_spacing(&self) -> f64 {
        2.0 * PI / self.extent
    }

    pub fn point(&self, j: usize) -> f64 {
        -0.5 * self.extent + j as f64 * self.spacing()
    }

    pub fn momentum_point(&self, m: usize) -> f64 {
        (m as f64 - (self.n_points / 2) as f64) * self.momentum_spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    pub fn momentum_points(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.momentum_point(m)).collect()
    }

    /// Sample spacing in the given representation.
    pub fn step(&self, rep: Representation) -> f64 {
        match rep {
            Representation::Position => self.spacing(),
            Representation::Momentum => self.momentum_spacing(),
        }
    }

    pub fn coordinate(&self, rep: Representation, idx: usize) -> f64 {
        match rep {
            Representation::Position => self.point(idx),
            Representation::Momentum => self.momentum_point(idx),
        }
    }

    /// Largest representable |position|.
    pub fn half_extent(&self) -> f64 {
        0.5 * self.extent
    }

    /// Largest representable |momentum| (Nyquist).
    pub fn momentum_half_extent(&self) -> f64 {
        PI / self.spacing()
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            n_points: Self::DEFAULT_POINTS,
            extent: Self::DEFAULT_EXTENT,
        }
    }
}

pub fn make_grid(n_points: usize, extent: f64) -> Result<QuadratureGrid> {
    QuadratureGrid::new(n_points, extent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    Position,
    Momentum,
}

fn sum_sq(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Wavefunction of one mode on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    grid: QuadratureGrid,
    rep: Representation,
    amplitudes: Vec<C64>,
}

impl ModeState {
    /// Build a state from raw samples and normalize it.
    pub fn normalized(grid: QuadratureGrid, rep: Representation, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                grid.n_points(),
                amplitudes.len()
            )));
        }
        let norm = (sum_sq(&amplitudes) * grid.step(rep)).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        let state = Self {
            grid,
            rep,
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        };
        state.check_edges();
        Ok(state)
    }

    /// Sample `f` at the grid coordinates of `rep` and normalize.
    pub fn from_fn(grid: QuadratureGrid, rep: Representation, f: impl Fn(f64) -> C64) -> Result<Self> {
        let amps = (0..grid.n_points()).map(|j| f(grid.coordinate(rep, j))).collect();
        Self::normalized(grid, rep, amps)
    }

    /// Wrap samples without normalizing. Unitary operations use this to keep
    /// whatever norm their input carried.
    pub(crate) fn from_raw(grid: QuadratureGrid, rep: Representation, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.n_points());
        Self { grid, rep, amplitudes }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Coordinates matching `amplitudes()`.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.grid.n_points()).map(|j| self.grid.coordinate(self.rep, j)).collect()
    }

    /// `sum |a_j|^2 * step`.
    pub fn norm_sq(&self) -> f64 {
        sum_sq(&self.amplitudes) * self.grid.step(self.rep)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Probability density `|a_j|^2` in the current representation.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiply all amplitudes by a complex scalar (does not renormalize).
    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_raw(self.grid, self.rep, self.amplitudes.iter().map(|a| a * factor).collect())
    }

    pub fn renormalized(&self) -> Result<Self> {
        Self::normalized(self.grid, self.rep, self.amplitudes.clone())
    }

    /// Largest amplitude among the two outermost samples.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.amplitudes.len();
        self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm())
    }

    fn check_edges(&self) {
        let edge = self.edge_amplitude();
        if edge > EDGE_WARNING {
            warn!(
                "{:?} amplitude {:.3e} at the grid boundary exceeds {:.0e}; state may be truncated",
                self.rep, edge, EDGE_WARNING
            );
        }
    }

    pub fn to_momentum(&self) -> Result<Self> {
        if self.rep != Representation::Position {
            return Err(Error::Representation {
                expected: Representation::Position,
                found: self.rep,
            });
        }
        Ok(Self::from_raw(
            self.grid,
            Representation::Momentum,
            transform::forward(&self.grid, &self.amplitudes),
        ))
    }

    pub fn to_position(&self) -> Result<Self> {
        if self.rep != Representation::Momentum {
            return Err(Error::Representation {
                expected: Representation::Momentum,
                found: self.rep,
            });
        }
        Ok(Self::from_raw(
            self.grid,
            Representation::Position,
            transform::inverse(&self.grid, &self.amplitudes),
        ))
    }

    /// The same state in the requested representation (clone when already there).
    pub fn in_rep(&self, rep: Representation) -> Self {
        match (self.rep, rep) {
            (a, b) if a == b => self.clone(),
            (Representation::Position, _) => self.to_momentum().expect("position state"),
            _ => self.to_position().expect("momentum state"),
        }
    }

    pub fn in_position(&self) -> Self {
        self.in_rep(Representation::Position)
    }

    pub fn in_momentum(&self) -> Self {
        self.in_rep(Representation::Momentum)
    }

    /// Momentum amplitudes on an arbitrary uniform lattice `p_start + k p_step`
    /// (band-limited evaluation of the grid Fourier sum).
    pub fn momentum_lattice(&self, p_start: f64, p_step: f64, count: usize) -> Vec<C64> {
        let pos = self.in_position();
        transform::momentum_on_lattice(&self.grid, &pos.amplitudes, p_start, p_step, count)
    }

    /// Expectation value of the coordinate of the current representation.
    pub fn mean_coordinate(&self) -> f64 {
        let step = self.grid.step(self.rep);
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a.norm_sqr() * self.grid.coordinate(self.rep, j))
            .sum::<f64>()
            * step
            / self.norm_sq()
    }

    /// Variance of the coordinate of the current representation.
    pub fn coordinate_variance(&self) -> f64 {
        let mean = self.mean_coordinate();
        let step = self.grid.step(self.rep);
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a.norm_sqr() * (self.grid.coordinate(self.rep, j) - mean).powi(2))
            .sum::<f64>()
            * step
            / self.norm_sq()
    }

    /// Index of the largest |amplitude|.
    pub fn argmax(&self) -> usize {
        self.amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(j, _)| j)
            .unwrap_or(0)
    }
}

/// Riemann-sum inner product `sum conj(a_j) b_j * step`.
pub fn inner_product(a: &ModeState, b: &ModeState) -> Result<C64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    if a.rep != b.rep {
        return Err(Error::Representation {
            expected: a.rep,
            found: b.rep,
        });
    }
    let s: C64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.step(a.rep))
}

/// `|<a|b>|^2` after normalizing both; representations may differ.
pub fn fidelity_pure(a: &ModeState, b: &ModeState) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let b = b.in_rep(a.rep);
    let overlap = inner_product(a, &b)?;
    let f = overlap.norm_sqr() / (a.norm_sq() * b.norm_sq());
    Ok(f.clamp(0.0, 1.0))
}

pub fn to_momentum(psi: &ModeState) -> Result<ModeState> {
    psi.to_momentum()
}

pub fn to_position(psi: &ModeState) -> Result<ModeState> {
    psi.to_position()
}

/// Amplitudes of two modes on a shared grid, row-major with mode 1 as the
/// slow index: `A[j * n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    grid: QuadratureGrid,
    reps: [Representation; 2],
    amplitudes: Vec<C64>,
}

/// Mode selector for two-mode operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::First => 0,
            Mode::Second => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Mode::First => Mode::Second,
            Mode::Second => Mode::First,
        }
    }
}

impl TwoModeState {
    pub(crate) fn from_raw(grid: QuadratureGrid, reps: [Representation; 2], amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.n_points() * grid.n_points());
        Self { grid, reps, amplitudes }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn reps(&self) -> [Representation; 2] {
        self.reps
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, j: usize, k: usize) -> C64 {
        self.amplitudes[j * self.grid.n_points() + k]
    }

    pub fn norm_sq(&self) -> f64 {
        sum_sq(&self.amplitudes) * self.grid.step(self.reps[0]) * self.grid.step(self.reps[1])
    }

    /// Convert one mode to the requested representation.
    pub fn with_rep(&self, mode: Mode, rep: Representation) -> Self {
        let axis = mode.index();
        if self.reps[axis] == rep {
            return self.clone();
        }
        let mut data = self.amplitudes.clone();
        transform::along_axis(&self.grid, &mut data, axis, rep == Representation::Momentum);
        let mut reps = self.reps;
        reps[axis] = rep;
        Self::from_raw(self.grid, reps, data)
    }

    /// Marginal density of `mode` in its current representation
    /// (the other mode integrated out).
    pub fn marginal(&self, mode: Mode) -> Vec<f64> {
        let n = self.grid.n_points();
        let other_step = self.grid.step(self.reps[mode.other().index()]);
        let mut out = vec![0.0; n];
        for j in 0..n {
            for k in 0..n {
                let w = self.amplitudes[j * n + k].norm_sqr();
                match mode {
                    Mode::First => out[j] += w,
                    Mode::Second => out[k] += w,
                }
            }
        }
        out.iter_mut().for_each(|v| *v *= other_step);
        out
    }

    /// Slice with `mode` fixed at sample `idx`, as a (non-normalized) state of
    /// the other mode.
    pub fn slice(&self, mode: Mode, idx: usize) -> ModeState {
        let n = self.grid.n_points();
        let other = mode.other();
        let amps: Vec<C64> = match mode {
            Mode::First => self.amplitudes[idx * n..(idx + 1) * n].to_vec(),
            Mode::Second => (0..n).map(|j| self.amplitudes[j * n + idx]).collect(),
        };
        ModeState::from_raw(self.grid, self.reps[other.index()], amps)
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }
}
