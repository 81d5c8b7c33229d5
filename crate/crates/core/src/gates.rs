//! q-diagonal gates, the Fourier gate, displacements and the two-mode CZ.
//!
//! Canonical representations: diagonal gates act on position amplitudes
//! (position input required), `apply_cz` converts both modes to position,
//! `apply_fourier` and the displacements accept either representation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadgrid::{Mode, ModeState, Representation, TwoModeState};
use crate::states::SQRT_PI;
use crate::transform;

fn require_position(psi: &ModeState) -> Result<()> {
    if psi.rep() != Representation::Position {
        return Err(Error::Representation {
            expected: Representation::Position,
            found: psi.rep(),
        });
    }
    Ok(())
}

/// `psi(q) -> e^{i f(q)} psi(q)`.
pub fn apply_phase_function(psi: &ModeState, f: impl Fn(f64) -> f64) -> Result<ModeState> {
    require_position(psi)?;
    let grid = *psi.grid();
    let amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| a * C64::from_polar(1.0, f(grid.point(j))))
        .collect();
    Ok(ModeState::from_raw(grid, Representation::Position, amps))
}

/// Exponent of the logical Z gate, `sqrt(pi) q`.
pub fn z_phase(q: f64) -> f64 {
    SQRT_PI * q
}

/// Exponent of the logical T gate, `(pi/4) [2 x^3 + x^2 - 2 x]` with `x = q / sqrt(pi)`.
pub fn t_phase(q: f64) -> f64 {
    let x = q / SQRT_PI;
    PI / 4.0 * (2.0 * x * x * x + x * x - 2.0 * x)
}

pub fn apply_z(psi: &ModeState) -> Result<ModeState> {
    apply_phase_function(psi, z_phase)
}

pub fn apply_t(psi: &ModeState) -> Result<ModeState> {
    apply_phase_function(psi, t_phase)
}

/// Product state `A[j, k] = a[j] b[k]`.
pub fn tensor(a: &ModeState, b: &ModeState) -> Result<TwoModeState> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let n = a.grid().n_points();
    let mut amps = Vec::with_capacity(n * n);
    for x in a.amplitudes() {
        amps.extend(b.amplitudes().iter().map(|y| x * y));
    }
    Ok(TwoModeState::from_raw(*a.grid(), [a.rep(), b.rep()], amps))
}

/// `e^{i s q1 q2}`; `s = 1` is the CZ gate, `s = -1` its inverse.
pub fn apply_cz_with_strength(state: &TwoModeState, strength: f64) -> TwoModeState {
    let mut out = state
        .with_rep(Mode::First, Representation::Position)
        .with_rep(Mode::Second, Representation::Position);
    let grid = *out.grid();
    let n = grid.n_points();
    let points = grid.points();
    for (j, row) in out.amplitudes_mut().chunks_mut(n).enumerate() {
        let q1 = points[j];
        for (k, a) in row.iter_mut().enumerate() {
            *a *= C64::from_polar(1.0, strength * q1 * points[k]);
        }
    }
    out
}

/// `C_Z = e^{i q1 q2}`.
pub fn apply_cz(state: &TwoModeState) -> TwoModeState {
    apply_cz_with_strength(state, 1.0)
}

/// `(F psi)(q) = (2 pi)^{-1/2} \int dq' e^{i q q'} psi(q')`, returned in
/// position representation. Equivalently `(F psi)(q) = phi(-q)` with `phi`
/// the momentum wavefunction.
pub fn apply_fourier(psi: &ModeState) -> ModeState {
    let pos = psi.in_position();
    let grid = *psi.grid();
    let n = grid.n_points();
    // -q_j = L/2 - j dq
    let amps = transform::momentum_on_lattice(&grid, pos.amplitudes(), grid.half_extent(), -grid.spacing(), n);
    ModeState::from_raw(grid, Representation::Position, amps)
}

/// `e^{-i u p}`: shifts the position wavefunction by `u`. Applied as a linear
/// phase in momentum space, so non-grid shifts are exact on the torus.
pub fn displace_q(psi: &ModeState, u: f64) -> Result<ModeState> {
    let grid = *psi.grid();
    let limit = grid.extent() / 4.0;
    if !(u.abs() < limit) {
        return Err(Error::ShiftOutOfRange { shift: u, limit });
    }
    if u == 0.0 {
        return Ok(psi.clone());
    }
    let mom = psi.in_momentum();
    let amps = mom
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(m, a)| a * C64::from_polar(1.0, -u * grid.momentum_point(m)))
        .collect();
    Ok(ModeState::from_raw(grid, Representation::Momentum, amps).in_rep(psi.rep()))
}

/// `e^{-i v q}`: multiplies the position wavefunction by `e^{-i v q}`, moving
/// momentum content to `p - v`.
pub fn displace_p(psi: &ModeState, v: f64) -> Result<ModeState> {
    let grid = *psi.grid();
    let limit = grid.momentum_half_extent() / 2.0;
    if !(v.abs() < limit) {
        return Err(Error::ShiftOutOfRange { shift: v, limit });
    }
    if v == 0.0 {
        return Ok(psi.clone());
    }
    let shifted = apply_phase_function(&psi.in_position(), |q| -v * q)?;
    Ok(shifted.in_rep(psi.rep()))
}
