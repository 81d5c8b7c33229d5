//! Composite procedures built from the single-mode primitives.

use std::collections::BTreeMap;

use crate::homodyne::ConditionalEnsemble;

pub mod correction;
pub mod dv;
pub mod fourier;
pub mod noise;

pub use correction::{error_corrected_fourier, gkp_error_correct, EcOptions, EcfResources};
pub use dv::{dv_hadamard_gadget, dv_iqp_circuit, QubitState};
pub use fourier::{finite_squeezing_target, fourier_gadget, leading_order_probability, squeezed_ancilla};
pub use noise::{apply_shift_noise, ShiftNoise};

/// Result of one gadget run, conditioned on the recorded outcome.
#[derive(Debug, Clone)]
pub struct GadgetReport {
    pub outcome_k: i64,
    pub outcome_value: f64,
    pub success_probability: f64,
    pub output: ConditionalEnsemble,
    pub diagnostics: BTreeMap<String, f64>,
}

impl GadgetReport {
    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }
}
