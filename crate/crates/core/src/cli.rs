//! Command-line experiment driver. Every command renders its full result
//! into memory first, so a failing run never leaves a partial file behind.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    composed_postselection, fault_tolerant_fourier_error, min_squeezing_db, pe_bound, solve_ft_sigma, squeezing_db,
};
use crate::error::Error;
use crate::gadgets::correction::{averaged_fidelity, logical_error_rate};
use crate::gadgets::{dv_hadamard_gadget, fourier_gadget, gkp_error_correct, EcOptions, QubitState, ShiftNoise};
use crate::gates::displace_q;
use crate::homodyne::{gkp_readout, ConditionalEnsemble, DetectorParams};
use crate::quadgrid::{fidelity_pure, make_grid, QuadratureGrid};
use crate::states::{gkp_minus, gkp_plus, gkp_zero, vacuum, GkpParams, SQRT_PI};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cvriqp", version, about = "Finite-squeezing CV-IQP gadget laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    FourierGadget,
    ErrorCorrect,
    Scaling,
    Dv,
    Readout,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier gadget on the vacuum, one record per (sigma, eta).
    #[command(after_help = "CSV columns: sigma,eta,k,success_probability,leading_order,relative_deviation,fidelity_target,fidelity_ideal")]
    FourierGadget(ConfigArgs),
    /// q-error correction of a shifted GKP |+> with a noiseless GKP |0> ancilla.
    #[command(after_help = "CSV columns: eta,shift,outcome_k,correction,pre_fidelity,post_fidelity,logical_error_rate,trials")]
    ErrorCorrect(ConfigArgs),
    /// Squeezing and energy scaling table, or the fault-tolerance root find.
    #[command(after_help = "CSV columns: n,min_delta_sq,min_squeezing_db,mean_photon_lower,pe_bound_at_min,ln_composed_postselection\n\
        with --solve-ft-error: target,sigma,delta_sq,squeezing_db,p_err")]
    Scaling(ConfigArgs),
    /// Qubit Hadamard gadget sampled over seeds.
    #[command(after_help = "CSV columns: state,trials,frequency_minus,p_minus,min_fidelity")]
    Dv(ConfigArgs),
    /// X-basis GKP readout of |+> and |-> against the misidentification bound.
    #[command(after_help = "CSV columns: state,delta,delta_env,p_plus,p_minus,out_of_range,error_mass,pe_bound")]
    Readout(ConfigArgs),
}

/// Flags; any value given here overrides the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Ancilla squeezing; comma-separated list sweeps.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// GKP spike width; comma-separated list sweeps (readout).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    /// GKP envelope width (defaults to --delta).
    #[arg(long)]
    pub delta_env: Option<f64>,
    /// Homodyne bin half-width; comma-separated list sweeps.
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// Circuit sizes (scaling).
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// Number of Fourier gadgets (scaling).
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Result file; the CSV also goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the config fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target error per Fourier gate; comma-separated list allowed.
    #[arg(long, value_delimiter = ',')]
    pub solve_ft_error: Option<Vec<f64>>,
    /// Data position shift (error-correct).
    #[arg(long)]
    pub shift: Option<f64>,
    /// Monte Carlo repetitions (error-correct, dv).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Outcome bin to post-select (fourier-gadget).
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,
    /// Input state: a cardinal qubit state for dv (0, 1, +, -, +i, -i, all).
    #[arg(long)]
    pub state: Option<String>,
}

/// Resolved configuration, echoed as the JSON header of the result file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sigma: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub delta_env: Option<f64>,
    pub eta: Option<Vec<f64>>,
    pub n: Option<Vec<u32>>,
    pub l: Option<u32>,
    pub grid_points: Option<usize>,
    pub extent: Option<f64>,
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub solve_ft_error: Option<Vec<f64>>,
    pub shift: Option<f64>,
    pub trials: Option<usize>,
    pub k: Option<i64>,
    pub state: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Flags win over file values.
    pub fn overridden_by(mut self, a: &ConfigArgs) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if a.$f.is_some() { self.$f = a.$f.clone(); } )* };
        }
        take!(sigma, delta, delta_env, eta, n, l, grid_points, extent, seed, out, solve_ft_error, shift, trials, k, state);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Serialize)]
struct Header<'a> {
    command: CommandKind,
    config: &'a ExperimentConfig,
}

/// A rendered CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Header line plus CSV body, exactly as written to `--out`.
pub fn render(kind: CommandKind, cfg: &ExperimentConfig, table: &Table) -> CliResult<String> {
    let header = serde_json::to_string(&Header { command: kind, config: cfg }).map_err(|e| CliError::Io(e.to_string()))?;
    let mut s = String::new();
    writeln!(s, "# {header}").expect("string write");
    s.push_str(&table.to_csv());
    Ok(s)
}

fn grid(cfg: &ExperimentConfig, points: usize, extent: f64) -> CliResult<QuadratureGrid> {
    Ok(make_grid(cfg.grid_points.unwrap_or(points), cfg.extent.unwrap_or(extent))?)
}

fn require_seed(cfg: &ExperimentConfig) -> CliResult<u64> {
    cfg.seed.ok_or_else(|| invalid("--seed is required for randomized commands"))
}

fn positive_list(name: &str, v: &[f64]) -> CliResult<()> {
    if v.is_empty() {
        return Err(invalid(format!("--{name} needs at least one value")));
    }
    match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        Some(x) => Err(invalid(format!("--{name} = {x} must be positive"))),
        None => Ok(()),
    }
}

fn gkp_params(cfg: &ExperimentConfig, delta: f64) -> CliResult<GkpParams> {
    Ok(GkpParams::with_auto_truncation(delta, cfg.delta_env.unwrap_or(delta))?)
}

fn single_delta(cfg: &ExperimentConfig, default: f64) -> CliResult<f64> {
    match cfg.delta.as_deref() {
        None => Ok(default),
        Some([d]) => Ok(*d),
        Some(_) => Err(invalid("--delta takes a single value for this command")),
    }
}

fn cmd_fourier_gadget(cfg: &ExperimentConfig) -> CliResult<Table> {
    let g = grid(cfg, 4096, 80.0)?;
    let sigmas = cfg.sigma.clone().unwrap_or_else(|| vec![0.1]);
    let etas = cfg.eta.clone().unwrap_or_else(|| vec![0.01]);
    positive_list("sigma", &sigmas)?;
    positive_list("eta", &etas)?;
    let k = cfg.k.unwrap_or(0);
    let mut points = Vec::new();
    for &s in &sigmas {
        for &e in &etas {
            let det = DetectorParams::for_grid(e, &g)?;
            det.validate(&g)?;
            crate::gadgets::squeezed_ancilla(s, &g)?;
            points.push((s, det));
        }
    }
    let psi = vacuum(&g)?;
    let mut t = Table::new(&[
        "sigma",
        "eta",
        "k",
        "success_probability",
        "leading_order",
        "relative_deviation",
        "fidelity_target",
        "fidelity_ideal",
    ]);
    for (s, det) in points {
        let r = fourier_gadget(&psi, s, &det, k)?;
        let d = |key| r.diagnostic(key).unwrap_or(f64::NAN);
        t.push(vec![
            num(s),
            num(det.eta()),
            k.to_string(),
            num(r.success_probability),
            num(d("leading_order")),
            num(d("relative_deviation")),
            num(d("fidelity_target")),
            num(d("fidelity_ideal")),
        ]);
    }
    Ok(t)
}

fn cmd_error_correct(cfg: &ExperimentConfig) -> CliResult<Table> {
    let seed = require_seed(cfg)?;
    let g = grid(cfg, 4096, 60.0)?;
    let params = gkp_params(cfg, single_delta(cfg, 0.25)?)?;
    let etas = cfg.eta.clone().unwrap_or_else(|| vec![SQRT_PI / 8.0]);
    positive_list("eta", &etas)?;
    let shift = cfg.shift.unwrap_or(0.2);
    let trials = cfg.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(invalid("--trials must be positive"));
    }
    let dets = etas
        .iter()
        .map(|&e| {
            let det = DetectorParams::for_grid(e, &g)?;
            det.validate(&g)?;
            det.gkp_ratio()?;
            Ok(det)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let clean = gkp_plus(&params, &g)?;
    let data = displace_q(&clean, shift)?;
    let pre = fidelity_pure(&data, &clean)?;
    let d = ConditionalEnsemble::pure(data.clone())?;
    let a = ConditionalEnsemble::pure(gkp_zero(&params, &g)?)?;
    let mut t = Table::new(&[
        "eta",
        "shift",
        "outcome_k",
        "correction",
        "pre_fidelity",
        "post_fidelity",
        "logical_error_rate",
        "trials",
    ]);
    for det in dets {
        let opts = EcOptions { seed, fixed_outcome: None, data_shift: Some(shift) };
        let r = gkp_error_correct(&data, &params, &ShiftNoise::none(), &det, &opts)?;
        let post = averaged_fidelity(&d, &a, &det, &clean, 1e-12)?;
        let rate = logical_error_rate(&data, &params, &ShiftNoise::none(), &det, shift, seed, trials)?;
        t.push(vec![
            num(det.eta()),
            num(shift),
            r.outcome_k.to_string(),
            num(r.diagnostic("correction").unwrap_or(f64::NAN)),
            num(pre),
            num(post),
            num(rate),
            trials.to_string(),
        ]);
    }
    Ok(t)
}

fn cmd_scaling(cfg: &ExperimentConfig) -> CliResult<Table> {
    if let Some(targets) = &cfg.solve_ft_error {
        if targets.is_empty() || targets.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(invalid("--solve-ft-error targets must lie in (0, 1)"));
        }
        let mut t = Table::new(&["target", "sigma", "delta_sq", "squeezing_db", "p_err"]);
        for &target in targets {
            let s = solve_ft_sigma(target)?;
            t.push(vec![
                num(target),
                num(s),
                num(s * s),
                num(squeezing_db(s * s)?),
                num(fault_tolerant_fourier_error(s)?),
            ]);
        }
        return Ok(t);
    }
    let ns = cfg.n.clone().unwrap_or_else(|| vec![1, 10, 100]);
    if ns.is_empty() || ns.contains(&0) {
        return Err(invalid("--n values must be at least 1"));
    }
    let l = cfg.l.unwrap_or(0);
    let eta = single(&cfg.eta, 0.01, "eta")?;
    let sigma = single(&cfg.sigma, 0.1, "sigma")?;
    composed_postselection(1, l, eta, sigma)?;
    let mut t = Table::new(&[
        "n",
        "min_delta_sq",
        "min_squeezing_db",
        "mean_photon_lower",
        "pe_bound_at_min",
        "ln_composed_postselection",
    ]);
    for n in ns {
        let r = min_squeezing_db(n)?;
        t.push(vec![
            n.to_string(),
            num(r.min_delta_sq),
            num(r.min_squeezing_db),
            num(r.mean_photon_lower),
            num(r.pe_bound_at_min),
            num(composed_postselection(n, l, eta, sigma)?.ln_probability),
        ]);
    }
    Ok(t)
}

fn single(v: &Option<Vec<f64>>, default: f64, name: &str) -> CliResult<f64> {
    let x = match v.as_deref() {
        None => default,
        Some([x]) => *x,
        Some(_) => return Err(invalid(format!("--{name} takes a single value for this command"))),
    };
    positive_list(name, &[x])?;
    Ok(x)
}

fn cmd_dv(cfg: &ExperimentConfig) -> CliResult<Table> {
    let seed = require_seed(cfg)?;
    let trials = cfg.trials.unwrap_or(10_000);
    if trials == 0 {
        return Err(invalid("--trials must be positive"));
    }
    let wanted = cfg.state.clone().unwrap_or_else(|| "all".into());
    let states: Vec<_> = QubitState::cardinal_states()
        .into_iter()
        .filter(|(name, _)| wanted == "all" || wanted == *name)
        .collect();
    if states.is_empty() {
        return Err(invalid(format!("unknown qubit state {wanted:?}; use 0, 1, +, -, +i, -i or all")));
    }
    let mut t = Table::new(&["state", "trials", "frequency_minus", "p_minus", "min_fidelity"]);
    for (name, psi) in states {
        let mut minus = 0usize;
        let mut min_fid = f64::INFINITY;
        for s in 0..trials as u64 {
            let (out, h, _) = dv_hadamard_gadget(&psi, None, seed.wrapping_add(s))?;
            minus += usize::from(h);
            let mut expected = psi.hadamard(0);
            if h == 1 {
                expected = expected.pauli_x(0);
            }
            min_fid = min_fid.min(out.fidelity(&expected));
        }
        let (_, _, p_minus) = dv_hadamard_gadget(&psi, Some(true), seed)?;
        t.push(vec![
            name.to_string(),
            trials.to_string(),
            num(minus as f64 / trials as f64),
            num(p_minus),
            num(min_fid),
        ]);
    }
    Ok(t)
}

fn cmd_readout(cfg: &ExperimentConfig) -> CliResult<Table> {
    let g = grid(cfg, 4096, 128.0)?;
    let deltas = cfg.delta.clone().unwrap_or_else(|| vec![0.15, 0.2, 0.25]);
    positive_list("delta", &deltas)?;
    let det = DetectorParams::new(single(&cfg.eta, SQRT_PI / 8.0, "eta")?)?;
    det.gkp_ratio()?;
    let params = deltas.iter().map(|&d| gkp_params(cfg, d)).collect::<CliResult<Vec<_>>>()?;
    let mut t = Table::new(&["state", "delta", "delta_env", "p_plus", "p_minus", "out_of_range", "error_mass", "pe_bound"]);
    for p in params {
        for (name, psi) in [("+", gkp_plus(&p, &g)?), ("-", gkp_minus(&p, &g)?)] {
            let r = gkp_readout(&psi, &det)?;
            t.push(vec![
                name.to_string(),
                num(p.delta_spike),
                num(p.delta_envelope),
                num(r.p_plus),
                num(r.p_minus),
                num(r.out_of_range),
                num(r.error_mass),
                num(pe_bound(p.delta_spike)?),
            ]);
        }
    }
    Ok(t)
}

/// Run one command on a resolved config.
pub fn execute(kind: CommandKind, cfg: &ExperimentConfig) -> CliResult<Table> {
    match kind {
        CommandKind::FourierGadget => cmd_fourier_gadget(cfg),
        CommandKind::ErrorCorrect => cmd_error_correct(cfg),
        CommandKind::Scaling => cmd_scaling(cfg),
        CommandKind::Dv => cmd_dv(cfg),
        CommandKind::Readout => cmd_readout(cfg),
    }
}

/// Resolve config, execute, write `--out`; returns the rendered output.
pub fn run_command(kind: CommandKind, args: &ConfigArgs) -> CliResult<String> {
    let base = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.overridden_by(args);
    let table = execute(kind, &cfg)?;
    let text = render(kind, &cfg, &table)?;
    if let Some(path) = &cfg.out {
        fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let (kind, args) = match &cli.command {
        Command::FourierGadget(a) => (CommandKind::FourierGadget, a),
        Command::ErrorCorrect(a) => (CommandKind::ErrorCorrect, a),
        Command::Scaling(a) => (CommandKind::Scaling, a),
        Command::Dv(a) => (CommandKind::Dv, a),
        Command::Readout(a) => (CommandKind::Readout, a),
    };
    match run_command(kind, args) {
        Ok(text) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
