//! GKP error correction by a C_Z-coupled ancilla, and the error-corrected
//! Fourier pipeline.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::fourier::fourier_gadget;
use super::noise::{apply_shift_noise, ShiftNoise};
use super::GadgetReport;
use crate::error::{Error, Result};
use crate::gates::{apply_fourier, displace_q};
use crate::homodyne::{
    cz_bin_probabilities, cz_project_bin, ensemble_fidelity, sample_outcome, sample_outcomes, BinDistribution,
    ConditionalEnsemble, DetectorParams,
};
use crate::quadgrid::{ModeState, Representation};
use crate::states::{gkp_plus, gkp_zero, GkpParams, SQRT_PI};

/// Relative eigenvalue cut used when compressing gadget outputs.
pub const COMPRESS_TOLERANCE: f64 = 1e-10;
/// Relative amplitude-squared level defining the support of a state.
const SUPPORT_LEVEL: f64 = 1e-24;

/// Run control. A fixed outcome overrides sampling; `data_shift` is the
/// ground-truth position shift of the data, when known.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EcOptions {
    pub seed: u64,
    pub fixed_outcome: Option<i64>,
    pub data_shift: Option<f64>,
}

/// Representative of the bin centre `p_k` modulo `sqrt(pi)` in
/// `[-sqrt(pi)/2, sqrt(pi)/2)`, computed in integer units of `eta`.
pub fn centered_representative(k: i64, det: &DetectorParams) -> Result<f64> {
    let ratio = det.gkp_ratio()? as i64;
    let mut r = (2 * k).rem_euclid(ratio);
    if 2 * r >= ratio {
        r -= ratio;
    }
    Ok(r as f64 * SQRT_PI / ratio as f64)
}

fn support(values: &[f64], coords: impl Fn(usize) -> f64) -> (f64, f64) {
    let max = values.iter().cloned().fold(0.0, f64::max);
    let cut = max * SUPPORT_LEVEL;
    let first = values.iter().position(|&v| v > cut).unwrap_or(0);
    let last = values.iter().rposition(|&v| v > cut).unwrap_or(values.len() - 1);
    (coords(first), coords(last))
}

/// Syndrome bins that can carry mass: the ancilla momentum is shifted by the
/// data position.
pub fn syndrome_range(data: &ModeState, ancilla: &ModeState, det: &DetectorParams) -> RangeInclusive<i64> {
    let grid = *data.grid();
    let d = data.in_position().density();
    let a = ancilla.in_momentum().density();
    let (q_lo, q_hi) = support(&d, |j| grid.point(j));
    let (p_lo, p_hi) = support(&a, |m| grid.momentum_point(m));
    let full = det.covering_range(&grid);
    let lo = det.bin_index(q_lo + p_lo).max(*full.start());
    let hi = det.bin_index(q_hi + p_hi).min(*full.end());
    lo..=hi
}

/// Outcome distribution of the ancilla momentum measurement, for mixtures of
/// data and ancilla states.
pub fn syndrome_distribution(
    data: &ConditionalEnsemble,
    ancilla: &ConditionalEnsemble,
    det: &DetectorParams,
) -> Result<BinDistribution> {
    let ks = pair_range(data, ancilla, det);
    let (wd, wa) = (data.total_probability(), ancilla.total_probability());
    let mut probabilities: BTreeMap<i64, f64> = ks.clone().map(|k| (k, 0.0)).collect();
    let mut tail_mass = 0.0;
    for (w1, d) in data.components() {
        for (w2, a) in ancilla.components() {
            let f = w1 * w2 / (wd * wa);
            let dist = cz_bin_probabilities(a, d, det, ks.clone())?;
            for (k, p) in dist.probabilities {
                *probabilities.entry(k).or_insert(0.0) += f * p;
            }
            tail_mass += f * dist.tail_mass;
        }
    }
    Ok(BinDistribution {
        probabilities,
        tail_mass,
    })
}

fn pair_range(data: &ConditionalEnsemble, ancilla: &ConditionalEnsemble, det: &DetectorParams) -> RangeInclusive<i64> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (_, d) in data.components() {
        for (_, a) in ancilla.components() {
            let r = syndrome_range(d, a, det);
            lo = lo.min(*r.start());
            hi = hi.max(*r.end());
        }
    }
    lo..=hi
}

/// Data state after outcome `k` and the corrective shift `-rep(p_k)`.
/// Weights are joint probabilities of the mixture branch and the outcome.
pub fn corrected_branch(
    data: &ConditionalEnsemble,
    ancilla: &ConditionalEnsemble,
    det: &DetectorParams,
    k: i64,
) -> Result<(ConditionalEnsemble, f64)> {
    let correction = centered_representative(k, det)?;
    let (wd, wa) = (data.total_probability(), ancilla.total_probability());
    let mut parts = Vec::new();
    for (w1, d) in data.components() {
        for (w2, a) in ancilla.components() {
            match cz_project_bin(a, d, k, det) {
                Ok(e) => parts.push(e.weighted(w1 * w2 / (wd * wa))),
                Err(Error::EmptyBin { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let merged = ConditionalEnsemble::merge(parts).map_err(|_| Error::EmptyBin { k, probability: 0.0 })?;
    let shifted = merged.map(|s| displace_q(s, -correction))?;
    Ok((shifted, correction))
}

/// Prepare the ancilla `gkp_zero(params)` with its shift noise applied.
fn noisy_ancilla(data: &ModeState, params: &GkpParams, noise: &ShiftNoise, seed: u64) -> Result<(ModeState, (f64, f64))> {
    let anc = gkp_zero(params, data.grid())?;
    apply_shift_noise(&anc, noise, seed)
}

fn outcome_seed(seed: u64) -> u64 {
    seed ^ 0x5851_f42d_4c95_7f2d
}

/// Flag a logical error from ground-truth shifts: the net data shift after
/// correction must stay within `sqrt(pi)/2` of the ancilla's `v` shift.
pub fn is_logical_error(data_shift: f64, v2: f64, correction: f64) -> bool {
    (data_shift - correction - v2).abs() > SQRT_PI / 2.0
}

/// One round of q-error correction of `data` with a noisy `gkp_zero`
/// ancilla: C_Z, momentum measurement of the ancilla at resolution `det`,
/// corrective displacement by `-(p_k mod sqrt(pi))`.
pub fn gkp_error_correct(
    data: &ModeState,
    ancilla_params: &GkpParams,
    ancilla_noise: &ShiftNoise,
    det: &DetectorParams,
    opts: &EcOptions,
) -> Result<GadgetReport> {
    det.gkp_ratio()?;
    det.validate(data.grid())?;
    let (anc, (u2, v2)) = noisy_ancilla(data, ancilla_params, ancilla_noise, opts.seed)?;
    let d = ConditionalEnsemble::pure(data.clone())?;
    let a = ConditionalEnsemble::pure(anc)?;
    let dist = syndrome_distribution(&d, &a, det)?;
    let k = match opts.fixed_outcome {
        Some(k) => k,
        None => sample_outcome(&dist.probabilities, outcome_seed(opts.seed))?,
    };
    let (output, correction) = corrected_branch(&d, &a, det, k)?;

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("measured_p".to_string(), det.center(k));
    diagnostics.insert("correction".to_string(), correction);
    diagnostics.insert("ancilla_u".to_string(), u2);
    diagnostics.insert("ancilla_v".to_string(), v2);
    diagnostics.insert("tail_mass".to_string(), dist.tail_mass);
    if let Some(u1) = opts.data_shift {
        let threshold = SQRT_PI / 2.0 - det.eta();
        diagnostics.insert("threshold_held".to_string(), f64::from(u8::from((u1 - v2).abs() <= threshold)));
        diagnostics.insert("logical_error".to_string(), f64::from(u8::from(is_logical_error(u1, v2, correction))));
        diagnostics.insert("residual_offset".to_string(), u1 - correction);
    }
    Ok(GadgetReport {
        outcome_k: k,
        outcome_value: det.center(k),
        success_probability: output.total_probability(),
        output,
        diagnostics,
    })
}

/// Fraction of `trials` seeded rounds flagged as logical errors, given the
/// ground-truth data shift. The syndrome distribution is recomputed only
/// when the ancilla noise is random.
pub fn logical_error_rate(
    data: &ModeState,
    ancilla_params: &GkpParams,
    ancilla_noise: &ShiftNoise,
    det: &DetectorParams,
    data_shift: f64,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    det.gkp_ratio()?;
    let d = ConditionalEnsemble::pure(data.clone())?;
    let deterministic = ancilla_noise.fixed.is_some() || (ancilla_noise.u_std == 0.0 && ancilla_noise.v_std == 0.0);
    let mut errors = 0usize;
    if deterministic {
        let (anc, (_, v2)) = noisy_ancilla(data, ancilla_params, ancilla_noise, seed)?;
        let dist = syndrome_distribution(&d, &ConditionalEnsemble::pure(anc)?, det)?;
        for k in sample_outcomes(&dist.probabilities, outcome_seed(seed), trials)? {
            errors += usize::from(is_logical_error(data_shift, v2, centered_representative(k, det)?));
        }
    } else {
        for t in 0..trials as u64 {
            let s = seed.wrapping_add(t);
            let (anc, (_, v2)) = noisy_ancilla(data, ancilla_params, ancilla_noise, s)?;
            let dist = syndrome_distribution(&d, &ConditionalEnsemble::pure(anc)?, det)?;
            let k = sample_outcome(&dist.probabilities, outcome_seed(s))?;
            errors += usize::from(is_logical_error(data_shift, v2, centered_representative(k, det)?));
        }
    }
    Ok(errors as f64 / trials as f64)
}

/// Outcome-averaged fidelity of the corrected data with `target`, i.e. the
/// fidelity of the unconditional output state. Bins lighter than
/// `min_probability` are skipped.
pub fn averaged_fidelity(
    data: &ConditionalEnsemble,
    ancilla: &ConditionalEnsemble,
    det: &DetectorParams,
    target: &ModeState,
    min_probability: f64,
) -> Result<f64> {
    let dist = syndrome_distribution(data, ancilla, det)?;
    let mut acc = 0.0;
    let mut mass = 0.0;
    for (&k, &p) in &dist.probabilities {
        if p < min_probability {
            continue;
        }
        let (branch, _) = corrected_branch(data, ancilla, det, k)?;
        acc += branch.total_probability() * ensemble_fidelity(&branch, target)?;
        mass += branch.total_probability();
    }
    if !(mass > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok(acc / mass)
}

/// Position mass of an ensemble in `sqrt(pi)`-windows around even and odd
/// multiples of `sqrt(pi)` (logical 0 and 1), summed over grid samples.
pub fn logical_z_masses(e: &ConditionalEnsemble) -> (f64, f64) {
    let grid = *e.grid();
    let dq = grid.spacing();
    let (mut zero, mut one) = (0.0, 0.0);
    for (w, s) in e.components() {
        let pos = s.in_rep(Representation::Position);
        for (j, a) in pos.amplitudes().iter().enumerate() {
            let m = (grid.point(j) / SQRT_PI + 0.5).floor() as i64;
            let v = w * a.norm_sqr() * dq;
            if m.rem_euclid(2) == 0 {
                zero += v;
            } else {
                one += v;
            }
        }
    }
    let total = e.total_probability();
    (zero / total, one / total)
}

/// Classical fidelity of the logical Z statistics of `e` and `target`.
pub fn logical_fidelity(e: &ConditionalEnsemble, target: &ModeState) -> Result<f64> {
    let (e0, e1) = logical_z_masses(e);
    let (t0, t1) = logical_z_masses(&ConditionalEnsemble::pure(target.clone())?);
    Ok(((e0 * t0).sqrt() + (e1 * t1).sqrt()).powi(2))
}

/// Resources of the error-corrected Fourier pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcfResources {
    pub gkp: GkpParams,
    pub sigma: f64,
    pub fourier_det: DetectorParams,
    pub ec_det: DetectorParams,
}

/// Fourier gadget on `psi`, then q-error correction whose `gkp_zero`
/// ancilla is itself produced by a post-selected Fourier gadget acting on
/// `gkp_plus`.
pub fn error_corrected_fourier(psi: &ModeState, res: &EcfResources, opts: &EcOptions) -> Result<GadgetReport> {
    let grid = *psi.grid();
    res.ec_det.gkp_ratio()?;
    res.ec_det.validate(&grid)?;
    let fg = fourier_gadget(psi, res.sigma, &res.fourier_det, 0)?;
    let plus = gkp_plus(&res.gkp, &grid)?;
    let fg_anc = fourier_gadget(&plus, res.sigma, &res.fourier_det, 0)?;
    let data = fg.output.compress(COMPRESS_TOLERANCE)?;
    let anc = fg_anc.output.compress(COMPRESS_TOLERANCE)?;

    let dist = syndrome_distribution(&data, &anc, &res.ec_det)?;
    let k = match opts.fixed_outcome {
        Some(k) => k,
        None => sample_outcome(&dist.probabilities, outcome_seed(opts.seed))?,
    };
    let (branch, correction) = corrected_branch(&data, &anc, &res.ec_det, k)?;
    let outcome_probability = branch.total_probability();
    let output = branch.weighted(1.0 / outcome_probability);

    let target = apply_fourier(psi);
    let p_data = fg.success_probability;
    let p_anc = fg_anc.success_probability;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("fourier_probability".to_string(), p_data);
    diagnostics.insert("ancilla_probability".to_string(), p_anc);
    diagnostics.insert("ec_outcome_probability".to_string(), outcome_probability);
    diagnostics.insert("correction".to_string(), correction);
    diagnostics.insert("fidelity".to_string(), ensemble_fidelity(&output, &target)?);
    diagnostics.insert("fidelity_uncorrected".to_string(), ensemble_fidelity(&fg.output, &target)?);
    diagnostics.insert("logical_fidelity".to_string(), logical_fidelity(&output, &target)?);
    diagnostics.insert("logical_fidelity_uncorrected".to_string(), logical_fidelity(&fg.output, &target)?);
    diagnostics.insert("tail_mass".to_string(), dist.tail_mass);

    Ok(GadgetReport {
        outcome_k: k,
        outcome_value: res.ec_det.center(k),
        success_probability: p_data * p_anc,
        output,
        diagnostics,
    })
}
