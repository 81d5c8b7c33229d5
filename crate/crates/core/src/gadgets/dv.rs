//! Dense state-vector reference for the qubit versions of the gadgets.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;
const NORM_TOLERANCE: f64 = 1e-12;

/// Qubit `j` is bit `j` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl QubitState {
    /// Normalizes the input.
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("{n_qubits} qubits outside 1..={MAX_QUBITS}")));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidParameter("zero or non-finite qubit state".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn single(alpha: C64, beta: C64) -> Result<Self> {
        Self::new(1, vec![alpha, beta])
    }

    /// `|0>, |1>, |+>, |->, |+i>, |-i>`.
    pub fn cardinal_states() -> Vec<(&'static str, QubitState)> {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        [("0", o, z), ("1", z, o), ("+", o, o), ("-", o, -o), ("+i", o, i), ("-i", o, -i)]
            .into_iter()
            .map(|(name, a, b)| (name, Self::single(a, b).expect("non-zero")))
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &QubitState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn hadamard(&self, qubit: usize) -> Self {
        let mut a = self.amplitudes.clone();
        let bit = 1 << qubit;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for idx in 0..a.len() {
            if idx & bit == 0 {
                let (x, y) = (a[idx], a[idx | bit]);
                a[idx] = (x + y) * s;
                a[idx | bit] = (x - y) * s;
            }
        }
        Self { n_qubits: self.n_qubits, amplitudes: a }
    }

    pub fn pauli_x(&self, qubit: usize) -> Self {
        let bit = 1 << qubit;
        let amplitudes = (0..self.amplitudes.len()).map(|idx| self.amplitudes[idx ^ bit]).collect();
        Self { n_qubits: self.n_qubits, amplitudes }
    }

    /// `exp(i theta prod_{j in subset} Z_j)`.
    pub fn z_phase(&self, subset: &[usize], theta: f64) -> Self {
        let mask = subset.iter().fold(0usize, |m, &j| m | (1 << j));
        let plus = C64::from_polar(1.0, theta);
        let minus = C64::from_polar(1.0, -theta);
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(idx, a)| a * if (idx & mask).count_ones() % 2 == 0 { plus } else { minus })
            .collect();
        Self { n_qubits: self.n_qubits, amplitudes }
    }

    pub fn cz(&self, a: usize, b: usize) -> Self {
        let mask = (1 << a) | (1 << b);
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(idx, &x)| if idx & mask == mask { -x } else { x })
            .collect();
        Self { n_qubits: self.n_qubits, amplitudes }
    }

    fn tensor(&self, other: &QubitState) -> Self {
        // self occupies the low bits
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for b in &other.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|a| a * b));
        }
        Self { n_qubits: self.n_qubits + other.n_qubits, amplitudes }
    }
}

/// One-qubit Hadamard gadget: `|psi>|+>`, CZ, X measurement of qubit 0.
/// Returns the state of qubit 1, the outcome bit `h` (1 for `-`) and its
/// probability. `postselect` forces the outcome.
pub fn dv_hadamard_gadget(psi: &QubitState, postselect: Option<bool>, seed: u64) -> Result<(QubitState, u8, f64)> {
    if psi.n_qubits() != 1 {
        return Err(Error::InvalidParameter("Hadamard gadget takes one qubit".into()));
    }
    let plus = QubitState::single(C64::new(1.0, 0.0), C64::new(1.0, 0.0))?;
    // measuring X on qubit 0 = H then Z measurement
    let joint = psi.tensor(&plus).cz(0, 1).hadamard(0);
    let branch = |h: usize| -> (Vec<C64>, f64) {
        let v: Vec<C64> = (0..2).map(|b| joint.amplitudes[h | (b << 1)]).collect();
        let p = v.iter().map(|a| a.norm_sqr()).sum();
        (v, p)
    };
    let h = match postselect {
        Some(minus) => usize::from(minus),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            usize::from(rng.random::<f64>() >= branch(0).1)
        }
    };
    let (v, p) = branch(h);
    if p < NORM_TOLERANCE {
        return Err(Error::ZeroProbability);
    }
    Ok((QubitState::new(1, v)?, h as u8, p))
}

/// IQP circuit on `n` qubits: `|+>^n`, diagonal gates
/// `exp(i theta prod_{j in z} Z_j)`, X-basis measurement. Outcome bit `j` set
/// means qubit `j` read `-`. With post-selection the distribution is
/// conditioned on the listed `(qubit, minus)` outcomes.
pub fn dv_iqp_circuit(n: usize, gates: &[(Vec<usize>, f64)], postselect: &[(usize, bool)]) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("{n} qubits outside 1..={MAX_QUBITS}")));
    }
    let qubits = gates.iter().flat_map(|(z, _)| z.iter().copied()).chain(postselect.iter().map(|&(j, _)| j));
    if let Some(q) = qubits.into_iter().find(|&j| j >= n) {
        return Err(Error::InvalidParameter(format!("qubit {q} out of range for {n} qubits")));
    }
    let dim = 1usize << n;
    let mut state = QubitState::new(n, vec![C64::new(1.0, 0.0); dim])?;
    for (z, theta) in gates {
        state = state.z_phase(z, *theta);
    }
    for j in 0..n {
        state = state.hadamard(j);
    }
    let mut probs: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    if !postselect.is_empty() {
        for (idx, p) in probs.iter_mut().enumerate() {
            if postselect.iter().any(|&(j, minus)| ((idx >> j) & 1 == 1) != minus) {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total < NORM_TOLERANCE {
            return Err(Error::ZeroProbability);
        }
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hadamard_gadget_on_cardinal_states() {
        for (name, psi) in QubitState::cardinal_states() {
            for minus in [false, true] {
                let (out, h, p) = dv_hadamard_gadget(&psi, Some(minus), 0).unwrap();
                assert!((p - 0.5).abs() < 1e-12, "{name}");
                let mut expected = psi.hadamard(0);
                if h == 1 {
                    expected = expected.pauli_x(0);
                }
                assert!((out.fidelity(&expected) - 1.0).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn hadamard_gadget_matrix_oracle() {
        // (|0> + i|1>)/sqrt(2), outcome -: X H psi = ((1 - i)|0> + (1 + i)|1>) / 2
        let psi = QubitState::single(C64::new(1.0, 0.0), C64::new(0.0, 1.0)).unwrap();
        let (out, h, _) = dv_hadamard_gadget(&psi, Some(true), 0).unwrap();
        assert_eq!(h, 1);
        let expected = QubitState::single(C64::new(0.5, -0.5), C64::new(0.5, 0.5)).unwrap();
        assert!((out.fidelity(&expected) - 1.0).abs() < 1e-12);
        let zero = QubitState::single(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let (out, _, p) = dv_hadamard_gadget(&zero, Some(false), 0).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((out.fidelity(&QubitState::cardinal_states()[2].1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_gadget_is_reproducible() {
        let psi = QubitState::cardinal_states()[3].1.clone();
        let a: Vec<u8> = (0..32).map(|s| dv_hadamard_gadget(&psi, None, s).unwrap().1).collect();
        let b: Vec<u8> = (0..32).map(|s| dv_hadamard_gadget(&psi, None, s).unwrap().1).collect();
        assert_eq!(a, b);
        assert!(a.contains(&0) && a.contains(&1));
    }

    #[test]
    fn iqp_without_gates_is_deterministic() {
        let d = dv_iqp_circuit(5, &[], &[]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iqp_reproduces_hadamard_gadget() {
        // CZ = exp(i pi/4 (1 - Z0 - Z1 + Z0 Z1))
        let gates = vec![(vec![0, 1], PI / 4.0), (vec![0], -PI / 4.0), (vec![1], -PI / 4.0)];
        let d = dv_iqp_circuit(2, &gates, &[]).unwrap();
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let plus = QubitState::cardinal_states()[2].1.clone();
        for minus in [false, true] {
            let marginal = d[usize::from(minus)] + d[usize::from(minus) | 2];
            assert!((marginal - 0.5).abs() < 1e-12);
            let cond = dv_iqp_circuit(2, &gates, &[(0, minus)]).unwrap();
            let (out, _, _) = dv_hadamard_gadget(&plus, Some(minus), 0).unwrap();
            let x = out.hadamard(0);
            let p_minus = x.amplitudes()[1].norm_sqr();
            assert!((cond[usize::from(minus) | 2] - p_minus).abs() < 1e-12);
        }
    }

    #[test]
    fn iqp_rejects_impossible_postselection() {
        assert!(matches!(dv_iqp_circuit(3, &[], &[(0, true)]), Err(Error::ZeroProbability)));
        assert!(dv_iqp_circuit(15, &[], &[]).is_err());
        assert!(dv_iqp_circuit(2, &[(vec![4], 0.1)], &[]).is_err());
    }
}
