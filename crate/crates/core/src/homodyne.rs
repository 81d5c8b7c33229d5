//! Finite-resolution homodyne detection.
//!
//! Bin `k` collects momentum outcomes in `[p_k - eta, p_k + eta)` with
//! `p_k = 2 eta k`. Two evaluation modes:
//!
//! * `Binning::Samples` partitions the native momentum samples exactly
//!   (needs `eta >= 2 dp`, i.e. at least four samples per bin).
//! * `Binning::Quadrature` integrates each bin with composite Gauss-Legendre
//!   rules, evaluating the momentum wavefunction off-grid with chirp-z.
//!   This reaches resolutions far below the grid spacing.

use std::collections::BTreeMap;
use std::ops::{Range, RangeInclusive};

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadgrid::{inner_product, Mode, ModeState, QuadratureGrid, Representation, TwoModeState};
use crate::states::SQRT_PI;
use crate::transform::{self, ChirpZ};

/// Bins lighter than this are reported as empty.
pub const EMPTY_BIN_THRESHOLD: f64 = 1e-15;
/// Tail mass above this triggers a diagnostic.
pub const TAIL_WARNING: f64 = 1e-8;
/// Smallest quadrature resolution accepted, as a fraction of `dp`.
pub const MIN_ETA_FRACTION: f64 = 1.0 / 1024.0;
/// Default Gauss-Legendre order per sub-interval.
pub const DEFAULT_NODES: usize = 8;
/// Tolerance on the integrality of `sqrt(pi) / eta`.
pub const GKP_RATIO_TOLERANCE: f64 = 1e-9;

// Quadrature sub-intervals are at most dp / SUBDIVISION wide.
const SUBDIVISION: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    Samples,
    Quadrature { nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    eta: f64,
    binning: Binning,
}

impl DetectorParams {
    /// Sample-partition detector.
    pub fn new(eta: f64) -> Result<Self> {
        Self::with_binning(eta, Binning::Samples)
    }

    pub fn with_binning(eta: f64, binning: Binning) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::Detector(format!("eta = {eta} must be positive")));
        }
        if let Binning::Quadrature { nodes } = binning {
            if nodes < 2 {
                return Err(Error::Detector(format!("{nodes} quadrature nodes, need at least 2")));
            }
        }
        Ok(Self { eta, binning })
    }

    /// Sample partition when the grid resolves the bins, quadrature otherwise.
    pub fn for_grid(eta: f64, grid: &QuadratureGrid) -> Result<Self> {
        let binning = if eta >= 2.0 * grid.momentum_spacing() {
            Binning::Samples
        } else {
            Binning::Quadrature { nodes: DEFAULT_NODES }
        };
        let det = Self::with_binning(eta, binning)?;
        det.validate(grid)?;
        Ok(det)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn binning(&self) -> Binning {
        self.binning
    }

    pub fn center(&self, k: i64) -> f64 {
        2.0 * self.eta * k as f64
    }

    /// Bin containing outcome `p` (half-open bins).
    pub fn bin_index(&self, p: f64) -> i64 {
        ((p + self.eta) / (2.0 * self.eta)).floor() as i64
    }

    pub fn validate(&self, grid: &QuadratureGrid) -> Result<()> {
        let dp = grid.momentum_spacing();
        match self.binning {
            Binning::Samples if self.eta < 2.0 * dp => Err(Error::Detector(format!(
                "eta = {} below grid resolution: sample binning needs eta >= 2 dp = {}",
                self.eta,
                2.0 * dp
            ))),
            Binning::Quadrature { .. } if self.eta < dp * MIN_ETA_FRACTION => Err(Error::Detector(format!(
                "eta = {} below grid resolution: quadrature binning needs eta >= dp / 1024 = {}",
                self.eta,
                dp * MIN_ETA_FRACTION
            ))),
            _ => Ok(()),
        }
    }

    /// `sqrt(pi) / eta` when it is a positive integer.
    pub fn gkp_ratio(&self) -> Result<u64> {
        let r = SQRT_PI / self.eta;
        let rounded = r.round();
        if rounded < 1.0 || (r - rounded).abs() > GKP_RATIO_TOLERANCE * r {
            return Err(Error::Detector(format!(
                "sqrt(pi) / eta = {r} is not a positive integer"
            )));
        }
        Ok(rounded as u64)
    }

    /// Bins that intersect the momentum grid.
    pub fn covering_range(&self, grid: &QuadratureGrid) -> RangeInclusive<i64> {
        let n = grid.n_points();
        self.bin_index(grid.momentum_point(0))..=self.bin_index(grid.momentum_point(n - 1))
    }

    /// Momentum sample indices belonging to bin `k`.
    pub fn bin_samples(&self, grid: &QuadratureGrid, k: i64) -> Range<usize> {
        let idx: Vec<usize> = (0..grid.n_points()).collect();
        let start = idx.partition_point(|&m| self.bin_index(grid.momentum_point(m)) < k);
        let end = idx.partition_point(|&m| self.bin_index(grid.momentum_point(m)) <= k);
        start..end
    }

    fn lattices(&self, grid: &QuadratureGrid, ks: &RangeInclusive<i64>) -> Result<Vec<Lattice>> {
        self.validate(grid)?;
        if ks.is_empty() {
            return Err(Error::Detector("empty bin range".into()));
        }
        match self.binning {
            Binning::Samples => {
                let start = self.bin_samples(grid, *ks.start()).start;
                let end = self.bin_samples(grid, *ks.end()).end;
                let bins = (start..end).map(|m| self.bin_index(grid.momentum_point(m))).collect();
                Ok(vec![Lattice {
                    start: grid.momentum_point(start),
                    step: grid.momentum_spacing(),
                    weight: grid.momentum_spacing(),
                    bins,
                    grid_offset: Some(start),
                }])
            }
            Binning::Quadrature { nodes } => {
                let width = 2.0 * self.eta;
                let sub = ((width * SUBDIVISION / grid.momentum_spacing()).ceil() as usize).max(1);
                let lo = self.center(*ks.start()) - self.eta;
                let count = (ks.end() - ks.start() + 1) as usize;
                composite_lattices(nodes, lo, width, sub, count, *ks.start())
            }
        }
    }
}

/// Uniform momentum lattice with a common quadrature weight. Each node
/// carries the bin it contributes to.
#[derive(Debug, Clone)]
struct Lattice {
    start: f64,
    step: f64,
    weight: f64,
    bins: Vec<i64>,
    grid_offset: Option<usize>,
}

impl Lattice {
    fn node(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

/// Composite Gauss-Legendre rule over `count` consecutive intervals of width
/// `width` starting at `lo`, each split into `sub` pieces. Node `g` of every
/// piece lies on one uniform lattice, so each lattice is one chirp-z call.
fn composite_lattices(nodes: usize, lo: f64, width: f64, sub: usize, count: usize, first: i64) -> Result<Vec<Lattice>> {
    let rule = GaussLegendre::new(nodes).map_err(|e| Error::Detector(format!("quadrature rule: {e}")))?;
    let h = width / sub as f64;
    Ok(rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| Lattice {
            start: lo + h * (x + 1.0) / 2.0,
            step: h,
            weight: h * w / 2.0,
            bins: (0..sub * count).map(|i| first + (i / sub) as i64).collect(),
            grid_offset: None,
        })
        .collect())
}

/// Momentum amplitudes of a position-space vector on a lattice.
fn lattice_amplitudes(grid: &QuadratureGrid, pos: &[C64], lat: &Lattice, fft: &mut Option<Vec<C64>>) -> Vec<C64> {
    match lat.grid_offset {
        Some(m0) => {
            let mom = fft.get_or_insert_with(|| transform::forward(grid, pos));
            mom[m0..m0 + lat.bins.len()].to_vec()
        }
        None => transform::momentum_on_lattice(grid, pos, lat.start, lat.step, lat.bins.len()),
    }
}

/// Outcome distribution over a range of bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinDistribution {
    pub probabilities: BTreeMap<i64, f64>,
    /// Norm not accounted for by the listed bins.
    pub tail_mass: f64,
}

impl BinDistribution {
    fn new(ks: &RangeInclusive<i64>, masses: &BTreeMap<i64, f64>, norm: f64) -> Self {
        let probabilities: BTreeMap<i64, f64> = ks.clone().map(|k| (k, masses.get(&k).copied().unwrap_or(0.0))).collect();
        let total: f64 = probabilities.values().sum();
        let tail_mass = norm - total;
        if tail_mass.abs() > TAIL_WARNING {
            log::warn!("bin range {ks:?} misses mass {tail_mass:.3e}");
        }
        Self {
            probabilities,
            tail_mass,
        }
    }

    pub fn get(&self, k: i64) -> f64 {
        self.probabilities.get(&k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Pure-state decomposition of a conditional (unnormalized) density matrix:
/// `rho = sum_i w_i |psi_i><psi_i|` with normalized `psi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEnsemble {
    components: Vec<(f64, ModeState)>,
    total_probability: f64,
}

impl ConditionalEnsemble {
    /// Build from unnormalized branches `(weight factor, state)`; each branch
    /// contributes `factor * |state|^2`.
    pub fn from_branches(branches: Vec<(f64, ModeState)>) -> Result<Self> {
        let mut components = Vec::with_capacity(branches.len());
        for (factor, state) in branches {
            let nsq = state.norm_sq();
            let w = factor * nsq;
            if w > 0.0 && nsq > 0.0 {
                let s = state.scaled(C64::new(1.0 / nsq.sqrt(), 0.0));
                components.push((w, s));
            }
        }
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let total_probability = components.iter().map(|(w, _)| w).sum();
        Ok(Self {
            components,
            total_probability,
        })
    }

    pub fn pure(state: ModeState) -> Result<Self> {
        Self::from_branches(vec![(1.0, state)])
    }

    pub fn components(&self) -> &[(f64, ModeState)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.total_probability
    }

    pub fn grid(&self) -> &QuadratureGrid {
        self.components[0].1.grid()
    }

    /// Heaviest component.
    pub fn dominant(&self) -> &(f64, ModeState) {
        self.components
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("ensembles are non-empty")
    }

    /// Apply a norm-preserving map to every component.
    pub fn map(&self, f: impl Fn(&ModeState) -> Result<ModeState>) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            components,
            total_probability: self.total_probability,
        })
    }

    /// Multiply every weight by `factor` (sequential conditioning).
    pub fn weighted(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|(w, s)| (w * factor, s.clone())).collect(),
            total_probability: self.total_probability * factor,
        }
    }

    /// Union of ensembles (a mixture of conditional branches).
    pub fn merge(parts: impl IntoIterator<Item = ConditionalEnsemble>) -> Result<Self> {
        let components: Vec<(f64, ModeState)> = parts.into_iter().flat_map(|e| e.components).collect();
        if components.is_empty() {
            return Err(Error::Empty);
        }
        let total_probability = components.iter().map(|(w, _)| w).sum();
        Ok(Self {
            components,
            total_probability,
        })
    }

    /// Eigen-decomposition of the density matrix through the Gram matrix of
    /// the weighted components; eigenvalues below `rel_tol * trace` are dropped.
    pub fn compress(&self, rel_tol: f64) -> Result<Self> {
        let r = self.components.len();
        if r <= 1 {
            return Ok(self.clone());
        }
        let rep = self.components[0].1.rep();
        let states: Vec<ModeState> = self.components.iter().map(|(_, s)| s.in_rep(rep)).collect();
        let sqrt_w: Vec<f64> = self.components.iter().map(|(w, _)| w.sqrt()).collect();
        let mut gram = DMatrix::<C64>::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                let g = inner_product(&states[i], &states[j])? * (sqrt_w[i] * sqrt_w[j]);
                gram[(i, j)] = g;
                gram[(j, i)] = g.conj();
            }
        }
        let eig = gram.symmetric_eigen();
        let trace = self.total_probability;
        let grid = *states[0].grid();
        let n = grid.n_points();
        let mut branches = Vec::new();
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= rel_tol * trace {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            let mut amps = vec![C64::new(0.0, 0.0); n];
            for (i, s) in states.iter().enumerate() {
                let c = v[i] * sqrt_w[i];
                amps.iter_mut().zip(s.amplitudes()).for_each(|(a, x)| *a += c * x);
            }
            // |B v|^2 = lambda, so the branch carries weight lambda with factor 1.
            branches.push((1.0, ModeState::from_raw(grid, rep, amps)));
        }
        Self::from_branches(branches)
    }
}

/// `<target| rho |target> / Tr rho` with `target` normalized first.
pub fn ensemble_fidelity(e: &ConditionalEnsemble, target: &ModeState) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::Empty);
    }
    let t = target.renormalized()?;
    let mut cached: Option<ModeState> = None;
    let mut acc = 0.0;
    for (w, s) in &e.components {
        let tr = match &cached {
            Some(c) if c.rep() == s.rep() => c.clone(),
            _ => {
                let c = t.in_rep(s.rep());
                cached = Some(c.clone());
                c
            }
        };
        acc += w * inner_product(&tr, s)?.norm_sqr();
    }
    Ok((acc / e.total_probability).clamp(0.0, 1.0))
}

/// Per-node amplitude vectors of the unmeasured mode, for one lattice.
fn dense_node_vectors(state: &TwoModeState, mode: Mode, lat: &Lattice) -> Vec<Vec<C64>> {
    let grid = *state.grid();
    let n = grid.n_points();
    let count = lat.bins.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; count];
    match lat.grid_offset {
        Some(m0) => {
            let mom = state.with_rep(mode, Representation::Momentum);
            for (i, v) in out.iter_mut().enumerate() {
                *v = mom.slice(mode, m0 + i).into_amplitudes();
            }
        }
        None => {
            let pos = state.with_rep(mode, Representation::Position);
            for col in 0..n {
                let line = pos.slice(mode.other(), col).into_amplitudes();
                let vals = transform::momentum_on_lattice(&grid, &line, lat.start, lat.step, count);
                for (i, v) in vals.into_iter().enumerate() {
                    out[i][col] = v;
                }
            }
        }
    }
    out
}

fn sum_sq(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// `Prob[k] = <Psi| P_k (x) I |Psi>` for every `k` in `ks`.
pub fn bin_probabilities(state: &TwoModeState, mode: Mode, det: &DetectorParams, ks: RangeInclusive<i64>) -> Result<BinDistribution> {
    let grid = *state.grid();
    let lattices = det.lattices(&grid, &ks)?;
    let other_step = grid.step(state.reps()[mode.other().index()]);
    let mut masses = BTreeMap::new();
    if det.binning == Binning::Samples {
        let marginal = state.with_rep(mode, Representation::Momentum).marginal(mode);
        let lat = &lattices[0];
        let m0 = lat.grid_offset.unwrap_or(0);
        for (i, &k) in lat.bins.iter().enumerate() {
            *masses.entry(k).or_insert(0.0) += marginal[m0 + i] * lat.weight;
        }
    } else {
        for lat in &lattices {
            for (i, v) in dense_node_vectors(state, mode, lat).iter().enumerate() {
                *masses.entry(lat.bins[i]).or_insert(0.0) += lat.weight * sum_sq(v) * other_step;
            }
        }
    }
    Ok(BinDistribution::new(&ks, &masses, state.norm_sq()))
}

/// Conditional state of the unmeasured mode given outcome bin `k`.
pub fn project_bin(state: &TwoModeState, mode: Mode, k: i64, det: &DetectorParams) -> Result<ConditionalEnsemble> {
    let grid = *state.grid();
    let kept_rep = state.reps()[mode.other().index()];
    let mut branches = Vec::new();
    for lat in det.lattices(&grid, &(k..=k))? {
        for v in dense_node_vectors(state, mode, &lat) {
            branches.push((lat.weight, ModeState::from_raw(grid, kept_rep, v)));
        }
    }
    finish_projection(branches, k)
}

fn finish_projection(branches: Vec<(f64, ModeState)>, k: i64) -> Result<ConditionalEnsemble> {
    let total: f64 = branches.iter().map(|(w, s)| w * s.norm_sq()).sum();
    if !(total >= EMPTY_BIN_THRESHOLD) {
        return Err(Error::EmptyBin { k, probability: total });
    }
    ConditionalEnsemble::from_branches(branches)
}

/// Single-mode outcome distribution.
pub fn bin_probabilities_single(psi: &ModeState, det: &DetectorParams, ks: RangeInclusive<i64>) -> Result<BinDistribution> {
    let grid = *psi.grid();
    let pos = psi.in_position();
    let mut fft = None;
    let mut masses = BTreeMap::new();
    for lat in det.lattices(&grid, &ks)? {
        let vals = lattice_amplitudes(&grid, pos.amplitudes(), &lat, &mut fft);
        for (i, v) in vals.iter().enumerate() {
            *masses.entry(lat.bins[i]).or_insert(0.0) += lat.weight * v.norm_sqr();
        }
    }
    Ok(BinDistribution::new(&ks, &masses, psi.norm_sq()))
}

/// Branch of `C_Z (measured (x) kept)` after the measured mode is found at
/// momentum `s`: `chi_s(x) = kept(x) phi(s - x)`, with `phi` the momentum
/// wavefunction of `measured`. Position representation.
fn cz_branch(measured_pos: &[C64], kept_pos: &[C64], grid: &QuadratureGrid, plan: &ChirpZ, s: f64) -> Vec<C64> {
    let phi = plan.eval(measured_pos, s - grid.point(0));
    kept_pos.iter().zip(phi).map(|(a, b)| a * b).collect()
}

/// Chirp-z plan for `phi(s - x_j)` over the position grid.
fn cz_plan(grid: &QuadratureGrid) -> ChirpZ {
    ChirpZ::new(grid, -grid.spacing(), grid.n_points())
}

/// Outcome distribution for measuring `measured` in momentum after
/// `C_Z (measured (x) kept)`, without forming the two-mode state.
pub fn cz_bin_probabilities(measured: &ModeState, kept: &ModeState, det: &DetectorParams, ks: RangeInclusive<i64>) -> Result<BinDistribution> {
    if measured.grid() != kept.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *measured.grid();
    let (mp, kp) = (measured.in_position(), kept.in_position());
    let plan = cz_plan(&grid);
    let dq = grid.spacing();
    let mut masses = BTreeMap::new();
    for lat in det.lattices(&grid, &ks)? {
        for (i, &k) in lat.bins.iter().enumerate() {
            let chi = cz_branch(mp.amplitudes(), kp.amplitudes(), &grid, &plan, lat.node(i));
            *masses.entry(k).or_insert(0.0) += lat.weight * sum_sq(&chi) * dq;
        }
    }
    Ok(BinDistribution::new(&ks, &masses, measured.norm_sq() * kept.norm_sq()))
}

/// Conditional ensemble of `kept` after `C_Z` and a momentum measurement of
/// `measured` in bin `k`. Identical to `project_bin` on the dense state.
pub fn cz_project_bin(measured: &ModeState, kept: &ModeState, k: i64, det: &DetectorParams) -> Result<ConditionalEnsemble> {
    if measured.grid() != kept.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *measured.grid();
    let (mp, kp) = (measured.in_position(), kept.in_position());
    let plan = cz_plan(&grid);
    let mut branches = Vec::new();
    for lat in det.lattices(&grid, &(k..=k))? {
        for i in 0..lat.bins.len() {
            let chi = cz_branch(mp.amplitudes(), kp.amplitudes(), &grid, &plan, lat.node(i));
            branches.push((lat.weight, ModeState::from_raw(grid, Representation::Position, chi)));
        }
    }
    finish_projection(branches, k)
}

fn validate_distribution(dist: &BTreeMap<i64, f64>) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::Empty);
    }
    if let Some((k, p)) = dist.iter().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidParameter(format!("probability of bin {k} is {p}")));
    }
    let total: f64 = dist.values().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!("distribution sums to {total} > 1")));
    }
    if !(total > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok(total)
}

fn draw(dist: &BTreeMap<i64, f64>, total: f64, rng: &mut ChaCha8Rng) -> i64 {
    // The out-of-range remainder is redistributed over the listed bins.
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (&k, &p) in dist {
        acc += p;
        if u < acc {
            return k;
        }
    }
    *dist.keys().next_back().expect("validated non-empty")
}

/// Inverse-CDF draw over sorted `k`, deterministic in `seed`.
pub fn sample_outcome(dist: &BTreeMap<i64, f64>, seed: u64) -> Result<i64> {
    let total = validate_distribution(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw(dist, total, &mut rng))
}

/// `count` independent draws from one seeded stream.
pub fn sample_outcomes(dist: &BTreeMap<i64, f64>, seed: u64, count: usize) -> Result<Vec<i64>> {
    let total = validate_distribution(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| draw(dist, total, &mut rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GkpReadout {
    /// Mass in windows centred at even multiples of sqrt(pi).
    pub p_plus: f64,
    /// Mass in windows centred at odd multiples of sqrt(pi).
    pub p_minus: f64,
    /// Mass outside the windows represented on the grid.
    pub out_of_range: f64,
    /// Misidentification mass: `min(p_plus, p_minus) + out_of_range`.
    pub error_mass: f64,
}

/// X-basis GKP readout: momentum mass over sqrt(pi)-windows centred at
/// integer multiples of sqrt(pi), integrated by composite quadrature on the
/// continuous momentum wavefunction.
pub fn gkp_readout(psi: &ModeState, det: &DetectorParams) -> Result<GkpReadout> {
    det.gkp_ratio()?;
    let pos = psi.in_position();
    comb_windows(psi.grid(), pos.amplitudes())
}

/// Z-basis counterpart of [`gkp_readout`]: position mass over the same
/// windows (`p_plus` collects even multiples, i.e. logical 0).
pub fn gkp_readout_position(psi: &ModeState) -> Result<GkpReadout> {
    let grid = psi.grid();
    // Position amplitudes are the transform of the momentum samples taken on
    // the dual grid; the windows are symmetric, so the sign flip is harmless.
    let dual = QuadratureGrid::new(grid.n_points(), grid.n_points() as f64 * grid.momentum_spacing())?;
    let mom = psi.in_momentum();
    comb_windows(&dual, mom.amplitudes())
}

fn comb_windows(grid: &QuadratureGrid, pos: &[C64]) -> Result<GkpReadout> {
    let half_period = grid.momentum_half_extent();
    let j_max = ((half_period - SQRT_PI / 2.0) / SQRT_PI).floor() as i64;
    if j_max < 1 {
        return Err(Error::Unresolvable("grid narrower than three sqrt(pi) windows".into()));
    }
    let sub = ((SQRT_PI * SUBDIVISION / grid.momentum_spacing()).ceil() as usize).max(1);
    let count = (2 * j_max + 1) as usize;
    let lo = -(j_max as f64 + 0.5) * SQRT_PI;
    let mut masses = vec![0.0; count];
    let mut fft = None;
    for lat in composite_lattices(DEFAULT_NODES, lo, SQRT_PI, sub, count, -j_max)? {
        let vals = lattice_amplitudes(grid, pos, &lat, &mut fft);
        for (i, v) in vals.iter().enumerate() {
            masses[(lat.bins[i] + j_max) as usize] += lat.weight * v.norm_sqr();
        }
    }
    let (mut p_plus, mut p_minus) = (0.0, 0.0);
    for (idx, m) in masses.iter().enumerate() {
        if (idx as i64 - j_max).rem_euclid(2) == 0 {
            p_plus += m;
        } else {
            p_minus += m;
        }
    }
    // Mass beyond the outermost full windows, from the exact grid samples.
    let edge = (j_max as f64 + 0.5) * SQRT_PI;
    let dp = grid.momentum_spacing();
    let out_of_range: f64 = transform::forward(grid, pos)
        .iter()
        .enumerate()
        .filter(|(m, _)| grid.momentum_point(*m).abs() >= edge)
        .map(|(_, a)| a.norm_sqr() * dp)
        .sum();
    Ok(GkpReadout {
        p_plus,
        p_minus,
        out_of_range,
        error_mass: p_plus.min(p_minus) + out_of_range,
    })
}
