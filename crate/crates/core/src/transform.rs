//! Grid Fourier transforms.
//!
//! All transforms implement the Riemann-sum discretization of
//! `phi(p) = (2 pi)^{-1/2} \int dq e^{-i p q} psi(q)` on the position grid
//! `q_j = -L/2 + j dq`. On the conjugate lattice `p_m = (m - n/2) dp` the sum
//! is a plain DFT (unitary on the grid); on any other uniform lattice it is
//! evaluated with Bluestein's chirp-z algorithm, which gives the band-limited
//! interpolant of the same sum at O(N log N) cost.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::quadgrid::QuadratureGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    })
}

/// Alternating sign `(-1)^j`. Grid sizes are powers of two >= 64, so every
/// half-extent phase reduces to such a sign exactly.
#[inline]
fn parity(j: usize) -> f64 {
    if j & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Position amplitudes -> momentum amplitudes on the conjugate lattice.
pub(crate) fn forward(grid: &QuadratureGrid, input: &[C64]) -> Vec<C64> {
    let n = grid.n_points();
    let fft = plan(n, false);
    let mut buf: Vec<C64> = input.iter().enumerate().map(|(j, a)| a * parity(j)).collect();
    fft.process(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    buf.iter_mut().enumerate().for_each(|(m, a)| *a *= scale * parity(m));
    buf
}

/// Momentum amplitudes -> position amplitudes (exact inverse of [`forward`]).
pub(crate) fn inverse(grid: &QuadratureGrid, input: &[C64]) -> Vec<C64> {
    let n = grid.n_points();
    let fft = plan(n, true);
    let mut buf: Vec<C64> = input.iter().enumerate().map(|(m, a)| a * parity(m)).collect();
    fft.process(&mut buf);
    let scale = grid.momentum_spacing() / (2.0 * PI).sqrt();
    buf.iter_mut().enumerate().for_each(|(j, a)| *a *= scale * parity(j));
    buf
}

/// Apply [`forward`] or [`inverse`] along one axis of a row-major `n x n` array.
pub(crate) fn along_axis(grid: &QuadratureGrid, data: &mut [C64], axis: usize, to_momentum: bool) {
    let n = grid.n_points();
    let mut column = vec![C64::new(0.0, 0.0); n];
    match axis {
        0 => {
            for k in 0..n {
                for j in 0..n {
                    column[j] = data[j * n + k];
                }
                let out = if to_momentum { forward(grid, &column) } else { inverse(grid, &column) };
                for j in 0..n {
                    data[j * n + k] = out[j];
                }
            }
        }
        _ => {
            for row in data.chunks_mut(n) {
                let out = if to_momentum { forward(grid, row) } else { inverse(grid, row) };
                row.copy_from_slice(&out);
            }
        }
    }
}

/// Evaluate `(2 pi)^{-1/2} sum_j dq e^{-i p_k q_j} psi_j` on the lattice
/// `p_k = p_start + k * p_step`, `k = 0..count`.
pub fn momentum_on_lattice(
    grid: &QuadratureGrid,
    psi: &[C64],
    p_start: f64,
    p_step: f64,
    count: usize,
) -> Vec<C64> {
    ChirpZ::new(grid, p_step, count).eval(psi, p_start)
}

/// Bluestein plan for a fixed lattice step and length; the lattice origin is
/// supplied per call, so repeated evaluations share the kernel transform.
pub struct ChirpZ {
    n: usize,
    count: usize,
    dq: f64,
    x0: f64,
    step: f64,
    len: usize,
    kernel: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ChirpZ {
    pub fn new(grid: &QuadratureGrid, p_step: f64, count: usize) -> Self {
        let n = grid.n_points();
        let dq = grid.spacing();
        let alpha = p_step * dq;
        let len = (n + count - 1).next_power_of_two();
        let fwd = plan(len, false);
        let inv = plan(len, true);
        let mut kernel = vec![C64::new(0.0, 0.0); len];
        for m in 0..count {
            let mf = m as f64;
            kernel[m] = C64::from_polar(1.0, 0.5 * alpha * mf * mf);
        }
        for m in 1..n {
            let mf = m as f64;
            kernel[len - m] = C64::from_polar(1.0, 0.5 * alpha * mf * mf);
        }
        fwd.process(&mut kernel);
        Self {
            n,
            count,
            dq,
            x0: grid.point(0),
            step: p_step,
            len,
            kernel,
            fwd,
            inv,
        }
    }

    pub fn eval(&self, psi: &[C64], p_start: f64) -> Vec<C64> {
        debug_assert_eq!(psi.len(), self.n);
        let (dq, x0, alpha) = (self.dq, self.x0, self.step * self.dq);
        // p_k q_j = p_start x0 + p_start dq j + p_step x0 k + alpha k j,
        // with k j = (k^2 + j^2 - (k - j)^2) / 2.
        let mut a = vec![C64::new(0.0, 0.0); self.len];
        for (j, &v) in psi.iter().enumerate() {
            let jf = j as f64;
            a[j] = v * C64::from_polar(1.0, -(p_start * dq * jf) - 0.5 * alpha * jf * jf);
        }
        self.fwd.process(&mut a);
        a.iter_mut().zip(&self.kernel).for_each(|(x, y)| *x *= y);
        self.inv.process(&mut a);

        let scale = dq / (2.0 * PI).sqrt() / self.len as f64;
        (0..self.count)
            .map(|k| {
                let kf = k as f64;
                let phase = -(p_start * x0) - self.step * x0 * kf - 0.5 * alpha * kf * kf;
                a[k] * C64::from_polar(scale, phase)
            })
            .collect()
    }
}

/// Direct O(n) evaluation at a single momentum value. Used by tests and for
/// isolated points.
pub fn momentum_at(grid: &QuadratureGrid, psi: &[C64], p: f64) -> C64 {
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    psi.iter()
        .enumerate()
        .map(|(j, &v)| v * C64::from_polar(1.0, -p * grid.point(j)))
        .sum::<C64>()
        * scale
}
