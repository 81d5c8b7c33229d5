use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::GadgetReport;
use crate::error::{Error, Result};
use crate::gates::apply_fourier;
use crate::homodyne::{cz_project_bin, ensemble_fidelity, DetectorParams};
use crate::quadgrid::{ModeState, QuadratureGrid, Representation};
use crate::states::SQRT_PI;

/// `2 eta sigma / sqrt(pi)`.
pub fn leading_order_probability(eta: f64, sigma: f64) -> f64 {
    2.0 * eta * sigma / SQRT_PI
}

fn check_sigma(sigma: f64, grid: &QuadratureGrid) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    if 1.0 / sigma < grid.spacing() {
        return Err(Error::Unresolvable(format!(
            "sigma = {sigma}: position width {} below dq = {}",
            1.0 / sigma,
            grid.spacing()
        )));
    }
    Ok(())
}

/// Position amplitudes of `|sigma>_p` with the continuum normalization,
/// `(sigma^2 / pi)^{1/4} e^{-sigma^2 x^2 / 2}`. Mass outside the grid is
/// simply missing (see the `ancilla_tail` diagnostic).
pub fn squeezed_ancilla(sigma: f64, grid: &QuadratureGrid) -> Result<ModeState> {
    check_sigma(sigma, grid)?;
    let c = (sigma * sigma / PI).powf(0.25);
    let amps = grid
        .points()
        .into_iter()
        .map(|x| C64::new(c * (-sigma * sigma * x * x / 2.0).exp(), 0.0))
        .collect();
    Ok(ModeState::from_raw(*grid, Representation::Position, amps))
}

/// Normalized finite-squeezing output: momentum wavefunction equal to `psi`
/// (read as a function of momentum) convolved with `e^{-p^2 / 2 sigma^2}`;
/// in position this is the ancilla envelope times `F psi`.
pub fn finite_squeezing_target(psi: &ModeState, sigma: f64) -> Result<ModeState> {
    let grid = *psi.grid();
    let anc = squeezed_ancilla(sigma, &grid)?;
    let f = apply_fourier(psi);
    let amps = f.amplitudes().iter().zip(anc.amplitudes()).map(|(a, b)| a * b).collect();
    ModeState::normalized(grid, Representation::Position, amps)
}

/// Measurement-based Fourier gate: `C_Z (psi (x) |sigma>_p)`, momentum
/// measurement of mode 1 and post-selection on bin `k`.
pub fn fourier_gadget(psi: &ModeState, sigma: f64, det: &DetectorParams, k: i64) -> Result<GadgetReport> {
    let grid = *psi.grid();
    det.validate(&grid)?;
    let anc = squeezed_ancilla(sigma, &grid)?;
    let output = cz_project_bin(psi, &anc, k, det)?;
    let p = output.total_probability();
    let lead = leading_order_probability(det.eta(), sigma);

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("leading_order".to_string(), lead);
    diagnostics.insert("relative_deviation".to_string(), p / lead - 1.0);
    diagnostics.insert("fidelity_ideal".to_string(), ensemble_fidelity(&output, &apply_fourier(psi))?);
    diagnostics.insert(
        "fidelity_target".to_string(),
        ensemble_fidelity(&output, &finite_squeezing_target(psi, sigma)?)?,
    );
    diagnostics.insert("ancilla_tail".to_string(), 1.0 - anc.norm_sq());
    diagnostics.insert("components".to_string(), output.len() as f64);

    Ok(GadgetReport {
        outcome_k: k,
        outcome_value: det.center(k),
        success_probability: p,
        output,
        diagnostics,
    })
}
