use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{displace_p, displace_q};
use crate::quadgrid::ModeState;

/// Gaussian displacement channel: position shifts `u ~ N(0, u_std^2)` and
/// momentum shifts `v ~ N(0, v_std^2)`. Fixed shifts override sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftNoise {
    pub u_std: f64,
    pub v_std: f64,
    pub fixed: Option<(f64, f64)>,
}

impl ShiftNoise {
    pub fn new(u_std: f64, v_std: f64) -> Result<Self> {
        for (name, s) in [("u_std", u_std), ("v_std", v_std)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {s} must be finite and >= 0")));
            }
        }
        Ok(Self { u_std, v_std, fixed: None })
    }

    pub fn none() -> Self {
        Self { u_std: 0.0, v_std: 0.0, fixed: None }
    }

    pub fn fixed(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("fixed shifts ({u}, {v}) must be finite")));
        }
        Ok(Self { u_std: 0.0, v_std: 0.0, fixed: Some((u, v)) })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        if let Some(f) = self.fixed {
            return f;
        }
        let gauss = |s: f64, rng: &mut ChaCha8Rng| {
            if s == 0.0 {
                0.0
            } else {
                Normal::new(0.0, s).expect("validated std").sample(rng)
            }
        };
        let u = gauss(self.u_std, rng);
        let v = gauss(self.v_std, rng);
        (u, v)
    }

    /// `count` shift pairs from one seeded stream.
    pub fn sample_shifts(&self, seed: u64, count: usize) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// Apply `e^{-i u p} e^{-i v q}` with `(u, v)` drawn from `noise` (or its
/// fixed values). Returns the shifts for ground-truth bookkeeping.
pub fn apply_shift_noise(psi: &ModeState, noise: &ShiftNoise, seed: u64) -> Result<(ModeState, (f64, f64))> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u, v) = noise.draw(&mut rng);
    let out = displace_q(&displace_p(psi, v)?, u)?;
    Ok((out, (u, v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadgrid::{fidelity_pure, make_grid};
    use crate::states::gaussian;

    #[test]
    fn zero_noise_is_identity() {
        let grid = make_grid(512, 30.0).unwrap();
        let psi = gaussian(&grid, 0.2, 0.1, 1.0).unwrap();
        let (out, shifts) = apply_shift_noise(&psi, &ShiftNoise::none(), 3).unwrap();
        assert_eq!(shifts, (0.0, 0.0));
        assert!(fidelity_pure(&out, &psi).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn fixed_shift_moves_the_peak() {
        let grid = make_grid(2048, 30.0).unwrap();
        let psi = gaussian(&grid, 0.0, 0.0, 0.5).unwrap();
        let noise = ShiftNoise { u_std: 5.0, ..ShiftNoise::fixed(0.3, 0.0).unwrap() };
        let (out, shifts) = apply_shift_noise(&psi, &noise, 1).unwrap();
        assert_eq!(shifts, (0.3, 0.0));
        assert!((grid.point(out.argmax()) - 0.3).abs() <= grid.spacing());
    }

    #[test]
    fn sampled_stds() {
        let noise = ShiftNoise::new(0.2, 0.05).unwrap();
        let draws = noise.sample_shifts(77, 10_000);
        let std = |f: &dyn Fn(&(f64, f64)) -> f64| {
            let m = draws.iter().map(f).sum::<f64>() / draws.len() as f64;
            (draws.iter().map(|d| (f(d) - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt()
        };
        assert!((std(&|d| d.0) / 0.2 - 1.0).abs() < 0.03);
        assert!((std(&|d| d.1) / 0.05 - 1.0).abs() < 0.03);
        assert_eq!(draws, noise.sample_shifts(77, 10_000));
        assert!(ShiftNoise::new(-1.0, 0.0).is_err());
    }
}
