//! Closed-form bounds and scaling laws for the post-selected CV circuits.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::states::SQRT_PI;

/// Overhead in the composed post-selection probability that is carried
/// symbolically rather than evaluated.
pub const POLY_OVERHEAD: &str = "eta^poly(n) * 2^-(n + poly(n) log n)";

const CROSS_CHECK: f64 = 1e-9;

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive")))
    }
}

/// Probability of assigning a GKP outcome to the wrong logical state,
/// `(2 delta / pi) e^{-pi / (4 delta^2)}`.
pub fn pe_bound(delta: f64) -> Result<f64> {
    positive("delta", delta)?;
    Ok(2.0 * delta / PI * (-PI / (4.0 * delta * delta)).exp())
}

/// Natural log of [`pe_bound`].
pub fn ln_pe_bound(delta: f64) -> Result<f64> {
    positive("delta", delta)?;
    Ok((2.0 * delta / PI).ln() - PI / (4.0 * delta * delta))
}

/// `-10 log10(2 delta^2)`: squeezing relative to the vacuum variance 1/2.
pub fn squeezing_db(delta_sq: f64) -> Result<f64> {
    positive("delta^2", delta_sq)?;
    Ok(-10.0 * (2.0 * delta_sq).log10())
}

pub fn delta_sq_from_db(db: f64) -> Result<f64> {
    if !db.is_finite() {
        return Err(Error::InvalidParameter(format!("squeezing {db} dB must be finite")));
    }
    Ok(0.5 * 10f64.powf(-db / 10.0))
}

/// Squeezing and energy needed for `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub n: u32,
    pub min_delta_sq: f64,
    pub min_squeezing_db: f64,
    pub mean_photon_lower: f64,
    pub pe_bound_at_min: f64,
}

/// Smallest squeezing for which the misidentification probability stays
/// below a tenth of the `2^-n` conditioning probability.
pub fn min_squeezing_db(n: u32) -> Result<ScalingReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = f64::from(n);
    // ln((pi/2)(1/10) 2^-n), kept in logs for large n
    let ln_target = (PI / 20.0).ln() - nf * LN_2;
    let min_delta_sq = -(PI / 4.0) / ln_target;
    let db = 10.0 * (nf * LN_2 - (PI / 20.0).ln()).log10() + 10.0 * (2.0 / PI).log10();
    let from_delta = squeezing_db(min_delta_sq)?;
    if ((db - from_delta) / db).abs() > CROSS_CHECK {
        return Err(Error::InvalidParameter(format!(
            "squeezing forms disagree at n = {n}: {db} vs {from_delta}"
        )));
    }
    Ok(ScalingReport {
        n,
        min_delta_sq,
        min_squeezing_db: db,
        mean_photon_lower: mean_photon_lower(n),
        pe_bound_at_min: pe_bound(min_delta_sq.sqrt())?,
    })
}

/// `(4/pi) ln(20/pi) + (4/pi) n ln 2`.
pub fn mean_photon_lower(n: u32) -> f64 {
    4.0 / PI * (20.0 / PI).ln() + 4.0 / PI * f64::from(n) * LN_2
}

/// Failure probability of one error-corrected Fourier gate with ancilla
/// squeezing `sigma`; the two corrections see effective widths
/// `sqrt(2) sigma` and `sqrt(7) sigma`.
pub fn fault_tolerant_fourier_error(sigma: f64) -> Result<f64> {
    positive("sigma", sigma)?;
    let a = erfc(SQRT_PI / (2.0 * 2f64.sqrt() * 2f64.sqrt() * sigma));
    let b = erfc(SQRT_PI / (2.0 * 2f64.sqrt() * 7f64.sqrt() * sigma));
    // 1 - (1 - a)(1 - b) without cancellation
    Ok(a + b - a * b)
}

/// Solve `fault_tolerant_fourier_error(sigma) = target` by bisection in
/// `ln sigma`.
pub fn solve_ft_sigma(target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("target error {target} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (1e-4f64.ln(), 1e2f64.ln());
    let f = |s: f64| fault_tolerant_fourier_error(s.exp()).map(|e| e - target);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::InvalidParameter(format!("target error {target} not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// `(1/c) p_true < p_sim < c p_true`.
pub fn check_multiplicative(p_true: f64, p_sim: f64, c: f64) -> Result<bool> {
    if !(p_true > 0.0 && p_true <= 1.0) {
        return Err(Error::InvalidParameter(format!("p_true = {p_true} outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&p_sim) {
        return Err(Error::InvalidParameter(format!("p_sim = {p_sim} outside [0, 1]")));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c = {c} must be >= 1")));
    }
    Ok(p_true / c < p_sim && p_sim < c * p_true)
}

/// Multiplicative factor inherited by a conditional probability when joint
/// and marginal are each within `c`.
pub fn conditional_factor(c: f64) -> f64 {
    c * c
}

/// `pe_bound(delta) < 2^-n / 10`.
pub fn pe_budget_check(delta: f64, n: u32) -> Result<bool> {
    Ok(ln_pe_bound(delta)? < (0.1f64).ln() - f64::from(n) * LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Postselection {
    pub probability: f64,
    pub ln_probability: f64,
}

/// Probability that `l` Fourier gadgets all succeed on top of the `2^-n`
/// conditioning event.
pub fn composed_postselection(n: u32, l: u32, eta: f64, sigma: f64) -> Result<Postselection> {
    positive("eta", eta)?;
    positive("sigma", sigma)?;
    let ln_p = f64::from(l) * (2.0 * eta * sigma / SQRT_PI).ln() - f64::from(n) * LN_2;
    Ok(Postselection {
        probability: ln_p.exp(),
        ln_probability: ln_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pe_bound_values() {
        assert_relative_eq!(pe_bound(0.5).unwrap(), (-PI).exp() / PI, max_relative = 1e-14);
        assert_relative_eq!(pe_bound(0.25).unwrap(), 0.5 / PI * (-4.0 * PI).exp(), max_relative = 1e-14);
        assert!((pe_bound(0.25).unwrap() / 5.54e-7 - 1.0).abs() < 2e-3);
        assert!(pe_bound(0.0).is_err() && pe_bound(-1.0).is_err());
        assert_relative_eq!(ln_pe_bound(0.3).unwrap().exp(), pe_bound(0.3).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn pe_bound_increases_with_delta() {
        // d/dD ln P = 1/D + pi/(2 D^3) > 0: no turning point
        let mut prev = 0.0;
        for i in 1..=850 {
            let p = pe_bound(i as f64 * 1e-3).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        assert!(pe_bound(1e-3).unwrap() < 1e-300);
    }

    #[test]
    fn decibels() {
        assert_eq!(squeezing_db(0.5).unwrap(), 0.0);
        assert_relative_eq!(squeezing_db(0.05).unwrap(), 10.0, max_relative = 1e-14);
        for db in [-3.0, 0.0, 2.5, 10.0, 20.5, 40.0] {
            assert!((squeezing_db(delta_sq_from_db(db).unwrap()).unwrap() - db).abs() < 1e-12);
        }
        assert!(squeezing_db(0.0).is_err());
    }

    #[test]
    fn scaling_law() {
        let r1 = min_squeezing_db(1).unwrap();
        assert!((r1.min_squeezing_db - 2.09).abs() < 0.01, "{}", r1.min_squeezing_db);
        let r100 = min_squeezing_db(100).unwrap();
        assert!((r100.min_squeezing_db - 16.56).abs() < 0.01, "{}", r100.min_squeezing_db);
        for n in [1, 7, 100, 10_000] {
            let r = min_squeezing_db(n).unwrap();
            assert!((r.min_squeezing_db - squeezing_db(r.min_delta_sq).unwrap()).abs() < 1e-9);
            assert!(r.pe_bound_at_min <= 0.1 * 2f64.powi(-(n as i32)));
        }
        let slope = mean_photon_lower(11) - mean_photon_lower(10);
        assert!((slope - 4.0 / PI * LN_2).abs() < 1e-12);
        assert!((slope - 0.8825).abs() < 1e-4);
        assert!(min_squeezing_db(0).is_err());
    }

    #[test]
    fn ft_error_solves_to_twenty_db() {
        let s = solve_ft_sigma(1e-6).unwrap();
        assert!((fault_tolerant_fourier_error(s).unwrap() / 1e-6 - 1.0).abs() < 1e-8);
        let db = squeezing_db(s * s).unwrap();
        assert!((20.0..=21.0).contains(&db), "{db}");
        let mut prev = 1.0;
        for s in [0.5, 0.3, 0.2, 0.1, 0.05] {
            let e = fault_tolerant_fourier_error(s).unwrap();
            assert!(e < prev);
            prev = e;
        }
        // the wider second correction dominates
        let a = erfc(SQRT_PI / (4.0 * 0.2));
        let b = erfc(SQRT_PI / (2.0 * 2f64.sqrt() * 7f64.sqrt() * 0.2));
        assert!(b > a && (1.184 - SQRT_PI / (2.0 * 2f64.sqrt() * 7f64.sqrt() * 0.2)).abs() < 1e-3);
    }

    #[test]
    fn multiplicative_checks() {
        assert!(check_multiplicative(0.5, 0.5, 1.0001).unwrap());
        // ratio 1.3 exceeds both 1.18 and 1.15
        assert!(!check_multiplicative(0.1, 0.13, 1.18).unwrap());
        assert!(!check_multiplicative(0.1, 0.13, 1.15).unwrap());
        assert!(check_multiplicative(0.1, 0.13, 1.31).unwrap());
        assert!(check_multiplicative(0.13, 0.1, 1.31).unwrap());
        assert!(check_multiplicative(0.1, 0.13, conditional_factor(1.15)).unwrap());
        assert_relative_eq!(conditional_factor(2f64.powf(0.25)), 2f64.sqrt(), max_relative = 1e-15);
        assert!(check_multiplicative(0.0, 0.1, 1.1).is_err());
        assert!(check_multiplicative(0.1, 0.1, 0.9).is_err());
    }

    #[test]
    fn budget() {
        assert!(pe_budget_check(0.25, 10).unwrap());
        assert!(!pe_budget_check(0.25, 30).unwrap());
        for n in [1, 5, 40] {
            let d = min_squeezing_db(n).unwrap().min_delta_sq.sqrt();
            assert!(pe_budget_check(d, n).unwrap());
            assert!(pe_budget_check(d * 0.999, n).unwrap());
        }
    }

    #[test]
    fn composed_probabilities() {
        let p = composed_postselection(7, 0, 0.01, 0.1).unwrap();
        assert_relative_eq!(p.probability, 2f64.powi(-7), max_relative = 1e-14);
        let p = composed_postselection(0, 1, 0.01, 0.1).unwrap();
        assert!((p.probability - 1.128e-3).abs() < 1e-6);
        let big = composed_postselection(1000, 1000, 0.01, 0.1).unwrap();
        assert!(big.ln_probability.is_finite() && big.probability == 0.0);
        let base = composed_postselection(5, 5, 0.01, 0.1).unwrap().ln_probability;
        assert!(composed_postselection(6, 5, 0.01, 0.1).unwrap().ln_probability < base);
        assert!(composed_postselection(5, 6, 0.01, 0.1).unwrap().ln_probability < base);
    }
}
