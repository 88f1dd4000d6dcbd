//! Seeded randomized audits and canned scenarios.
//!
//! Trial `i` of an audit draws from a ChaCha8 stream keyed by `(seed, i)`,
//! so results do not depend on thread scheduling. Degenerate draws are
//! retried up to [`MAX_ATTEMPTS`] times per trial.

pub mod random;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{BoundComparison, LinearFunctional};
use crate::error::{QsnError, Result};
use crate::fisher::{
    self, prop1_check, qcrb, qfim_mixed_network, qfim_pure_network, rotate_qfim, BoundReport, Qfim,
};
use crate::hilbert::{self, DensityOperator, Layout, PureState};
use crate::network::{Probe, SensorFamily, SensorNetwork, WeightMatrix};
use crate::states::{
    extremal_superposition_of, ghz_probe_signed, local_purification_probe, optimal_separable_probe,
    product_residual, purify, separable_surrogate,
};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Cross-sensor Schmidt rank one is certified to this level.
pub const PRODUCT_TOL: f64 = 1e-10;
pub const EQUALITY_TOL: f64 = 1e-10;
pub const MAX_ATTEMPTS: usize = 10;
/// Ridge added to random Wishart matrices in the block-inverse audit.
const SPD_RIDGE: f64 = 0.05;
const EQUALITY_CASE_PROBABILITY: f64 = 0.2;
const CUTOFF_WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Theorem1,
    Theorem2,
    Prop1,
    Gradient,
    Optical,
}

impl ScenarioId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::Prop1 => "prop1",
            Self::Gradient => "gradient",
            Self::Optical => "optical",
        }
    }
}

/// Declarative run description; unset fields take per-scenario defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub seed: u64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Inclusive range of sensor counts for random networks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<[usize; 2]>,
    /// Inclusive range of local dimensions for random networks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_dim: Option<[usize; 2]>,
    /// Largest matrix size in the block-inverse audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_params: Option<usize>,
    /// Particle budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of optical modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<u64>,
    /// Fock cutoff of the optical scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioId, seed: u64, trials: usize) -> Self {
        Self {
            scenario,
            seed,
            trials,
            tol: None,
            sensors: None,
            local_dim: None,
            max_params: None,
            n: None,
            d: None,
            mu: None,
            n_max: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn sensor_range(&self) -> [usize; 2] {
        self.sensors.unwrap_or(match self.scenario {
            ScenarioId::Theorem2 => [2, 3],
            _ => [2, 4],
        })
    }

    pub fn local_dim_range(&self) -> [usize; 2] {
        self.local_dim.unwrap_or(match self.scenario {
            ScenarioId::Theorem2 => [2, 3],
            _ => [2, 4],
        })
    }

    pub fn max_params(&self) -> usize {
        self.max_params.unwrap_or(12)
    }

    pub fn mu(&self) -> u64 {
        self.mu.unwrap_or(1)
    }

    pub fn modes(&self) -> usize {
        self.d.unwrap_or(2)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.unwrap_or(3)
    }

    pub fn particles(&self) -> usize {
        self.n.unwrap_or(match self.scenario {
            ScenarioId::Optical => self.modes() * self.n_max(),
            _ => 4,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QsnError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.tol().is_finite() && self.tol() > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol()));
        }
        if self.mu() == 0 {
            return bad("mu must be positive".into());
        }
        let [s0, s1] = self.sensor_range();
        let [q0, q1] = self.local_dim_range();
        if s0 == 0 || s0 > s1 {
            return bad(format!("invalid sensor range [{s0}, {s1}]"));
        }
        if q0 < 2 || q0 > q1 {
            return bad(format!("invalid local dimension range [{q0}, {q1}]"));
        }
        let limit = hilbert::max_dimension();
        let largest = (q1 as u128).checked_pow(s1 as u32).unwrap_or(u128::MAX);
        let needed = match self.scenario {
            ScenarioId::Theorem2 => largest.saturating_mul(largest),
            _ => largest,
        };
        if matches!(self.scenario, ScenarioId::Theorem1 | ScenarioId::Theorem2)
            && needed > limit as u128
        {
            return Err(QsnError::DimensionLimit {
                requested: usize::try_from(needed).unwrap_or(usize::MAX),
                limit,
            });
        }
        if self.max_params() < 1 {
            return bad("max_params must be positive".into());
        }
        match self.scenario {
            ScenarioId::Gradient
                if !self.particles().is_multiple_of(2) || self.particles() == 0 =>
            {
                bad(format!(
                    "gradient scenario needs an even positive N, got {}",
                    self.particles()
                ))
            }
            ScenarioId::Optical if self.modes() == 0 || self.n_max() == 0 => {
                bad("optical scenario needs d >= 1 and n_max >= 1".into())
            }
            ScenarioId::Optical => {
                let dim = (self.n_max() as u128 + 1)
                    .checked_pow(self.modes() as u32)
                    .unwrap_or(u128::MAX);
                if dim > limit as u128 {
                    return Err(QsnError::DimensionLimit {
                        requested: usize::try_from(dim).unwrap_or(usize::MAX),
                        limit,
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// One audited inequality. Positive `violation` means the inequality is
/// violated by that amount.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub violation: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &str, violation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            violation,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.violation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Value {
    pub name: String,
    pub value: f64,
}

fn value(name: &str, value: f64) -> Value {
    Value {
        name: name.into(),
        value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    /// Draws used, including regenerated degenerate ones.
    pub attempts: usize,
    /// No valid draw within [`MAX_ATTEMPTS`].
    pub exhausted: bool,
    pub input_hash: String,
    pub dims: Vec<usize>,
    pub values: Vec<Value>,
    pub checks: Vec<Check>,
}

impl TrialRecord {
    fn new(input_hash: String, dims: Vec<usize>, values: Vec<Value>, checks: Vec<Check>) -> Self {
        Self {
            index: 0,
            attempts: 1,
            exhausted: false,
            input_hash,
            dims,
            values,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditResult {
    pub scenario: String,
    pub config: ScenarioConfig,
    pub trials_run: usize,
    pub draws: usize,
    pub regenerated: usize,
    pub exhausted: usize,
    /// Largest signed violation over all checks and trials.
    pub max_violation: f64,
    /// Worst violation per check name.
    pub summary: Vec<Check>,
    pub passed: bool,
    pub records: Vec<TrialRecord>,
}

impl AuditResult {
    fn collect(config: &ScenarioConfig, records: Vec<TrialRecord>) -> Self {
        let mut summary: Vec<Check> = Vec::new();
        for c in records.iter().flat_map(|r| &r.checks) {
            match summary.iter_mut().find(|s| s.name == c.name) {
                Some(s) if c.violation > s.violation || c.violation.is_nan() => {
                    s.violation = c.violation;
                }
                Some(_) => {}
                None => summary.push(c.clone()),
            }
        }
        let draws = records.iter().map(|r| r.attempts).sum();
        let max_violation = summary
            .iter()
            .map(|c| c.violation)
            .fold(f64::NEG_INFINITY, f64::max);
        let exhausted = records.iter().filter(|r| r.exhausted).count();
        Self {
            scenario: config.scenario.name().into(),
            config: config.clone(),
            trials_run: records.len(),
            draws,
            regenerated: draws - records.iter().filter(|r| !r.exhausted).count(),
            exhausted,
            max_violation,
            // an exhausted trial was never checked
            passed: exhausted == 0 && summary.iter().all(Check::passed),
            summary,
            records,
        }
    }
}

/// Stream for trial `index`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_trials<F>(cfg: &ScenarioConfig, trial: F) -> Result<AuditResult>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<TrialRecord>> + Sync,
{
    cfg.validate()?;
    let records = (0..cfg.trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = trial_rng(cfg.seed, index);
            for attempt in 1..=MAX_ATTEMPTS {
                if let Some(mut record) = trial(&mut rng)? {
                    record.index = index;
                    record.attempts = attempt;
                    return Ok(record);
                }
            }
            Ok(TrialRecord {
                index,
                attempts: MAX_ATTEMPTS,
                exhausted: true,
                input_hash: String::new(),
                dims: Vec::new(),
                values: Vec::new(),
                checks: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditResult::collect(cfg, records))
}

fn hash_inputs(layout: &Layout, amplitudes: impl Iterator<Item = f64>, weights: &[f64]) -> String {
    let mut h = Sha256::new();
    for d in layout.dims() {
        h.update((*d as u64).to_le_bytes());
    }
    for x in amplitudes.chain(weights.iter().copied()) {
        h.update(x.to_le_bytes());
    }
    h.finalize()
        .iter()
        .take(16)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn pure_hash(psi: &PureState, w: &WeightMatrix) -> String {
    hash_inputs(
        psi.layout(),
        psi.amplitudes().iter().flat_map(|c| [c.re, c.im]),
        w.diagonal(),
    )
}

fn density_hash(rho: &DensityOperator, w: &WeightMatrix) -> String {
    hash_inputs(
        rho.layout(),
        rho.matrix().iter().flat_map(|c| [c.re, c.im]),
        w.diagonal(),
    )
}

/// `(a - b) / max(1, |b|)`.
fn relative_excess(a: f64, b: f64) -> f64 {
    (a - b) / b.abs().max(1.0)
}

/// Largest relative entry mismatch between corresponding diagonal blocks.
fn block_mismatch(a: &Qfim, b: &Qfim) -> Result<f64> {
    let blocks = a
        .partition()
        .ok_or_else(|| QsnError::InvalidConfig("QFIM carries no partition".into()))?
        .num_blocks();
    let mut worst = 0.0_f64;
    for k in 0..blocks {
        let (x, y) = (a.block(k)?, b.block(k)?);
        worst = worst.max((&x - &y).amax() / y.amax().max(1.0));
    }
    Ok(worst)
}

/// Surrogate checks for one probe with commuting generators. `None` when
/// the original QFIM is singular.
pub fn theorem1_trial(
    network: &SensorNetwork,
    psi: &PureState,
    w: &WeightMatrix,
    tol: f64,
) -> Result<Option<TrialRecord>> {
    let f = qfim_pure_network(network, psi)?;
    let original = qcrb(&f, w, 1)?;
    if original.singular {
        return Ok(None);
    }
    let surrogate = separable_surrogate(psi, network)?;
    let fs = qfim_pure_network(network, &surrogate)?;
    let separated = qcrb(&fs, w, 1)?;
    let (bo, bs) = (original.bound_or_infinity(), separated.bound_or_infinity());
    let (ro, rs) = (
        network.resource_count_pure(psi)?,
        network.resource_count_pure(&surrogate)?,
    );
    let mut checks = vec![
        Check::new("product", product_residual(&surrogate)?, PRODUCT_TOL),
        Check::new("diagonal_blocks", block_mismatch(&fs, &f)?, tol),
        Check::new("weighted_bound", relative_excess(bs, bo), tol),
    ];
    if network.validate()?.all_resources_conserved {
        checks.push(Check::new("resource", relative_excess(rs, ro), tol));
    }
    Ok(Some(TrialRecord::new(
        pure_hash(psi, w),
        network.layout().dims().to_vec(),
        vec![
            value("original_bound", bo),
            value("surrogate_bound", bs),
            value("original_resource", ro),
            value("surrogate_resource", rs),
        ],
        checks,
    )))
}

/// Local-purification checks for one mixed probe. `None` when the QFIM of
/// `ρ` or of its purification is singular.
pub fn theorem2_trial(
    network: &SensorNetwork,
    rho: &DensityOperator,
    w: &WeightMatrix,
    tol: f64,
) -> Result<Option<TrialRecord>> {
    let (f_mixed, _) = qfim_mixed_network(network, rho)?;
    let mixed = qcrb(&f_mixed, w, 1)?;
    let global = network.with_global_ancilla()?;
    let purified = purify(rho)?;
    let f = qfim_pure_network(&global, &purified)?;
    let joint = qcrb(&f, w, 1)?;
    if mixed.singular || joint.singular {
        return Ok(None);
    }
    let local = network.with_local_ancillas()?;
    let probe = local_purification_probe(rho, network)?;
    let fl = qfim_pure_network(&local, &probe)?;
    let split = qcrb(&fl, w, 1)?;
    let (bm, bj, bl) = (
        mixed.bound_or_infinity(),
        joint.bound_or_infinity(),
        split.bound_or_infinity(),
    );
    let r = network.resource_count_density(rho)?;
    let rl = local.resource_count_pure(&probe)?;
    Ok(Some(TrialRecord::new(
        density_hash(rho, w),
        network.layout().dims().to_vec(),
        vec![
            value("mixed_bound", bm),
            value("purified_bound", bj),
            value("local_purified_bound", bl),
            value("resource", r),
            value("local_purified_resource", rl),
        ],
        vec![
            Check::new("diagonal_blocks", block_mismatch(&fl, &f)?, tol),
            Check::new("trace_inequality", relative_excess(bl, bj), tol),
            Check::new("purification_gain", relative_excess(bj, bm), tol),
            Check::new("resource_doubling", relative_excess(rl, 2.0 * r), tol),
        ],
    )))
}

/// Block-inverse check on one positive definite matrix.
pub fn prop1_trial(
    matrix: DMatrix<f64>,
    partition: crate::network::Partition,
    tol: f64,
) -> Result<TrialRecord> {
    let d = matrix.nrows();
    let blocks = partition.sizes().to_vec();
    let f = Qfim::new(matrix, Some(partition))?;
    let residuals = prop1_check(&f)?;
    let min = residuals
        .iter()
        .map(|r| r.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let mut checks = vec![Check::new("block_residual", -min, tol)];
    let equality: Vec<f64> = residuals
        .iter()
        .filter(|r| r.equality_case)
        .map(|r| r.max_abs_difference)
        .collect();
    if !equality.is_empty() {
        checks.push(Check::new(
            "equality_case",
            equality.iter().copied().fold(0.0, f64::max),
            EQUALITY_TOL,
        ));
    }
    let mut h = Sha256::new();
    for x in f.matrix().iter() {
        h.update(x.to_le_bytes());
    }
    for b in &blocks {
        h.update((*b as u64).to_le_bytes());
    }
    let hash = h
        .finalize()
        .iter()
        .take(16)
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(TrialRecord::new(
        hash,
        blocks,
        vec![value("d", d as f64), value("min_residual", min)],
        checks,
    ))
}

fn range(r: [usize; 2]) -> std::ops::RangeInclusive<usize> {
    r[0]..=r[1]
}

/// Haar-random pure probes on random commuting-generator networks.
pub fn audit_theorem1(cfg: &ScenarioConfig) -> Result<AuditResult> {
    let (sensors, dims, tol) = (
        range(cfg.sensor_range()),
        range(cfg.local_dim_range()),
        cfg.tol(),
    );
    run_trials(cfg, |rng| {
        let network = random::random_commuting_network(rng, sensors.clone(), dims.clone())?;
        let psi = random::haar_state(rng, network.layout())?;
        let w = random::random_weights(rng, network.parameter_count());
        theorem1_trial(&network, &psi, &w, tol)
    })
}

/// Random mixed probes on networks with a non-commuting sensor.
pub fn audit_theorem2(cfg: &ScenarioConfig) -> Result<AuditResult> {
    let (sensors, dims, tol) = (
        range(cfg.sensor_range()),
        range(cfg.local_dim_range()),
        cfg.tol(),
    );
    run_trials(cfg, |rng| {
        let network = random::random_noncommuting_network(rng, sensors.clone(), dims.clone())?;
        let env = rng.random_range(2..=3);
        let rho = random::random_mixed(rng, network.layout(), env)?;
        let w = random::random_weights(rng, network.parameter_count());
        theorem2_trial(&network, &rho, &w, tol)
    })
}

/// Random Wishart matrices with random partitions; a fifth of the trials
/// have their off-diagonal blocks zeroed.
pub fn audit_prop1(cfg: &ScenarioConfig) -> Result<AuditResult> {
    let (max_d, tol) = (cfg.max_params(), cfg.tol());
    run_trials(cfg, |rng| {
        let d = rng.random_range(1..=max_d);
        let mut m = random::random_spd(rng, d, SPD_RIDGE);
        let partition = random::random_partition(rng, d);
        if rng.random_bool(EQUALITY_CASE_PROBABILITY) {
            for a in 0..partition.num_blocks() {
                for b in 0..partition.num_blocks() {
                    if a != b {
                        let (ra, rb) = (partition.range(a), partition.range(b));
                        m.view_mut((ra.start, rb.start), (ra.len(), rb.len()))
                            .fill(0.0);
                    }
                }
            }
        }
        prop1_trial(m, partition, tol).map(Some)
    })
}

/// Whole-network figures for one `(network, probe, W)` triple.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub dims: Vec<usize>,
    pub partition: Vec<usize>,
    pub qfim: Vec<Vec<f64>>,
    pub bound: BoundReport,
    pub resource_count: f64,
    pub block_diagonal: bool,
    pub all_commuting: bool,
    pub resources_conserved: bool,
    /// Largest `|Im⟨L_a L_b⟩|`; zero iff the multi-parameter bound is
    /// attainable by a joint measurement.
    pub incompatibility: f64,
    pub saturable: bool,
}

pub fn probe_report(
    network: &SensorNetwork,
    probe: &Probe,
    w: &WeightMatrix,
    mu: u64,
) -> Result<ProbeReport> {
    let (f, incompatibility) = match probe {
        Probe::Pure(psi) => {
            let f = qfim_pure_network(network, psi)?;
            let actions = network.generator_actions(psi)?;
            let mut worst = 0.0_f64;
            for a in &actions {
                for b in &actions {
                    worst = worst.max(4.0 * a.dotc(b).im.abs());
                }
            }
            (f, worst)
        }
        Probe::Mixed(rho) => {
            let (f, slds) = qfim_mixed_network(network, rho)?;
            let mut worst = 0.0_f64;
            for a in &slds.operators {
                for b in &slds.operators {
                    let t = (rho.matrix() * a.matrix() * b.matrix()).trace();
                    worst = worst.max(t.im.abs());
                }
            }
            (f, worst)
        }
    };
    let diagnostics = network.validate()?;
    Ok(ProbeReport {
        dims: network.layout().dims().to_vec(),
        partition: network.partition().sizes().to_vec(),
        qfim: f
            .matrix()
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        bound: qcrb(&f, w, mu)?,
        resource_count: network.resource_count(probe)?,
        block_diagonal: f.is_block_diagonal(fisher::BLOCK_EQUALITY_TOL)?,
        all_commuting: diagnostics.all_commuting,
        resources_conserved: diagnostics.all_resources_conserved,
        incompatibility,
        saturable: incompatibility <= DEFAULT_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BothParameters {
    /// `Tr(F⁻¹)` for the global GHZ probe; `None` because its QFIM is
    /// singular.
    pub ghz_bound: Option<f64>,
    pub separable_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub n: usize,
    pub mu: u64,
    pub comparison: BoundComparison,
    pub allocation: Vec<usize>,
    pub ghz_rotated_qfim: Vec<Vec<f64>>,
    pub ghz_state_bound: f64,
    pub separable_state_bound: f64,
    pub state_ratio: f64,
    pub sum_parameter_qfi: f64,
    pub both_parameters: BothParameters,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Two qubit ensembles with `N/2` qubits each, estimating
/// `θ = (φ₂ - φ₁)/√2`.
pub fn scenario_gradient(cfg: &ScenarioConfig) -> Result<GradientReport> {
    cfg.validate()?;
    let (n, mu, tol) = (cfg.particles(), cfg.mu(), cfg.tol());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = [-s, s];
    let family = SensorFamily::QubitEnsemble;
    let m = DMatrix::from_row_slice(2, 2, &[-s, s, s, s]);
    let first = WeightMatrix::new(vec![1.0, 0.0])?;

    let ghz = ghz_probe_signed(&v, n, family)?;
    let f_ghz = qfim_pure_network(&ghz.network, &ghz.state)?;
    let rotated = rotate_qfim(&f_ghz, &m)?;
    let ghz_state_bound = qcrb(&rotated, &first, mu)?.bound_or_infinity();

    let sep = optimal_separable_probe(&v, n, family, mu)?;
    let f_sep = qfim_pure_network(&sep.network, &sep.state)?;
    let separable_state_bound = qcrb(&rotate_qfim(&f_sep, &m)?, &first, mu)?.bound_or_infinity();

    let functional = LinearFunctional::new(vec![s, s], family.kappa(), n, mu)?;
    let comparison = BoundComparison::new(&functional);
    let state_ratio = separable_state_bound / ghz_state_bound;
    let sum_parameter_qfi = rotated.matrix()[(1, 1)];

    let identity = WeightMatrix::identity(2);
    let both_parameters = BothParameters {
        ghz_bound: qcrb(&f_ghz, &identity, mu)?.bound,
        separable_bound: qcrb(&f_sep, &identity, mu)?.bound,
    };
    let checks = vec![
        Check::new("ratio", (state_ratio - comparison.ratio).abs(), tol),
        Check::new(
            "ghz_closed_form",
            relative_excess(ghz_state_bound, comparison.ghz_bound).abs(),
            tol,
        ),
        Check::new(
            "separable_closed_form",
            relative_excess(separable_state_bound, sep.variance_bound).abs(),
            tol,
        ),
        Check::new("sum_parameter", sum_parameter_qfi.abs(), EQUALITY_TOL),
    ];
    Ok(GradientReport {
        n,
        mu,
        allocation: sep.allocation.0.clone(),
        comparison,
        ghz_rotated_qfim: to_rows(rotated.matrix()),
        ghz_state_bound,
        separable_state_bound,
        state_ratio,
        sum_parameter_qfi,
        both_parameters,
        passed: checks.iter().all(Check::passed),
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OpticalReport {
    pub modes: usize,
    pub n_max: usize,
    pub mu: u64,
    /// QFI of `(|0⟩ + |n_max⟩)/√2` on each mode.
    pub extremal_qfi: Vec<f64>,
    pub per_mode_bound: Vec<f64>,
    /// Probe weight on the cutoff level `|n_max⟩` of each mode.
    pub cutoff_weights: Vec<f64>,
    pub truncation_warning: bool,
    pub vacuum_qfim_zero: bool,
    /// Optimal photon allocation for `v = (1,…,1)/√d` with `N` photons.
    pub photons: usize,
    pub allocation: Vec<usize>,
    pub separable_bound: f64,
    /// Surrogate audit on Haar-random probes of this network.
    pub audit: AuditResult,
    pub passed: bool,
}

/// `d` truncated optical modes with photon-number generators.
pub fn scenario_optical_phases(cfg: &ScenarioConfig) -> Result<OpticalReport> {
    cfg.validate()?;
    let (d, n_max, mu) = (cfg.modes(), cfg.n_max(), cfg.mu());
    let family = SensorFamily::OpticalMode;
    let network = family.network(&vec![n_max; d])?;
    let factors = network
        .sensors()
        .iter()
        .map(extremal_superposition_of)
        .collect::<Result<Vec<_>>>()?;
    let product = PureState::new(
        PureState::product(&factors)?.amplitudes().clone(),
        network.layout().clone(),
    )?;
    let f = qfim_pure_network(&network, &product)?;
    let extremal_qfi: Vec<f64> = (0..d).map(|k| f.matrix()[(k, k)]).collect();
    let per_mode_bound = extremal_qfi.iter().map(|q| 1.0 / (mu as f64 * q)).collect();
    let cutoff_weights: Vec<f64> = (0..d)
        .map(|k| Ok(product.reduced(&[k])?.matrix()[(n_max, n_max)].re))
        .collect::<Result<_>>()?;
    let vacuum = PureState::basis(0, network.layout().clone())?;
    let vacuum_qfim_zero = qfim_pure_network(&network, &vacuum)?.matrix().amax() == 0.0;

    let photons = cfg.particles();
    let v = vec![1.0 / (d as f64).sqrt(); d];
    let sep = optimal_separable_probe(&v, photons, family, mu)?;

    let tol = cfg.tol();
    let audit_network = network.clone();
    let audit = run_trials(cfg, |rng| {
        let psi = random::haar_state(rng, audit_network.layout())?;
        let w = random::random_weights(rng, audit_network.parameter_count());
        theorem1_trial(&audit_network, &psi, &w, tol)
    })?;
    Ok(OpticalReport {
        modes: d,
        n_max,
        mu,
        extremal_qfi,
        per_mode_bound,
        truncation_warning: cutoff_weights.iter().any(|&w| w > CUTOFF_WEIGHT_TOL),
        cutoff_weights,
        vacuum_qfim_zero,
        photons,
        allocation: sep.allocation.0,
        separable_bound: sep.variance_bound,
        passed: audit.passed,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ComplexVector, C64, ZERO};
    use crate::network::qubit_network;
    use crate::report::to_json_string;
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(
            ComplexVector::from_vec(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]),
            Layout::new(vec![2, 2]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bell_state_is_singular_so_regenerated() {
        // Bell QFIM is [[1,1],[1,1]]: the audit redraws such probes.
        let net = qubit_network(2).unwrap();
        let w = WeightMatrix::identity(2);
        assert!(theorem1_trial(&net, &bell(), &w, 1e-9).unwrap().is_none());
    }

    #[test]
    fn partially_entangled_trial_passes() {
        let net = qubit_network(2).unwrap();
        let psi = PureState::normalized(
            ComplexVector::from_vec(vec![
                C64::new(0.6, 0.0),
                C64::new(0.3, 0.1),
                C64::new(0.0, 0.2),
                C64::new(0.5, 0.0),
            ]),
            net.layout().clone(),
        )
        .unwrap();
        let rec = theorem1_trial(
            &net,
            &psi,
            &WeightMatrix::new(vec![1.0, 0.5]).unwrap(),
            1e-9,
        )
        .unwrap()
        .unwrap();
        assert!(rec.passed(), "{rec:?}");
        assert!(rec.value("surrogate_bound").unwrap() <= rec.value("original_bound").unwrap());
    }

    #[test]
    fn product_input_keeps_bound() {
        let net = qubit_network(2).unwrap();
        let a = PureState::normalized(
            ComplexVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
            Layout::single(2).unwrap(),
        )
        .unwrap();
        let b = PureState::normalized(
            ComplexVector::from_vec(vec![C64::new(0.8, 0.0), C64::new(0.6, 0.0)]),
            Layout::single(2).unwrap(),
        )
        .unwrap();
        let psi = a.tensor(&b).unwrap();
        let rec = theorem1_trial(&net, &psi, &WeightMatrix::identity(2), 1e-9)
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(
            rec.value("original_bound").unwrap(),
            rec.value("surrogate_bound").unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn maximally_mixed_probe_is_regenerated() {
        let net = qubit_network(2).unwrap();
        let rho = DensityOperator::maximally_mixed(net.layout().clone());
        assert!(theorem2_trial(&net, &rho, &WeightMatrix::identity(2), 1e-9)
            .unwrap()
            .is_none());
    }

    #[test]
    fn product_mixed_input_gives_trace_equality() {
        let net = qubit_network(2).unwrap();
        let mut rng = trial_rng(9, 0);
        let a = random::random_mixed(&mut rng, &Layout::single(2).unwrap(), 2).unwrap();
        let b = random::random_mixed(&mut rng, &Layout::single(2).unwrap(), 2).unwrap();
        let rho = a.tensor(&b).unwrap();
        let rec = theorem2_trial(&net, &rho, &WeightMatrix::identity(2), 1e-9)
            .unwrap()
            .unwrap();
        assert!(rec.passed());
        assert_abs_diff_eq!(
            rec.value("purified_bound").unwrap(),
            rec.value("local_purified_bound").unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn prop1_hand_case() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let rec = prop1_trial(m, crate::network::Partition::singletons(2), 1e-9).unwrap();
        assert_abs_diff_eq!(
            rec.value("min_residual").unwrap(),
            1.0 / 6.0,
            epsilon = 1e-14
        );
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let rec = prop1_trial(m, crate::network::Partition::singletons(2), 1e-9).unwrap();
        assert!(rec.check("equality_case").unwrap().violation <= 1e-15);
    }

    #[test]
    fn small_audits_pass_and_reproduce() {
        for id in [
            ScenarioId::Theorem1,
            ScenarioId::Theorem2,
            ScenarioId::Prop1,
        ] {
            let cfg = ScenarioConfig::new(id, 11, 6);
            let run = |cfg: &ScenarioConfig| match id {
                ScenarioId::Theorem1 => audit_theorem1(cfg),
                ScenarioId::Theorem2 => audit_theorem2(cfg),
                _ => audit_prop1(cfg),
            };
            let a = run(&cfg).unwrap();
            assert!(a.passed, "{id:?}: {:?}", a.summary);
            assert_eq!(a.trials_run, 6);
            let b = run(&cfg).unwrap();
            assert_eq!(to_json_string(&a).unwrap(), to_json_string(&b).unwrap());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = audit_prop1(&ScenarioConfig::new(ScenarioId::Prop1, 1, 3)).unwrap();
        let b = audit_prop1(&ScenarioConfig::new(ScenarioId::Prop1, 2, 3)).unwrap();
        assert_ne!(a.records[0].input_hash, b.records[0].input_hash);
    }

    #[test]
    fn gradient_n4() {
        let r = scenario_gradient(&ScenarioConfig::new(ScenarioId::Gradient, 0, 1)).unwrap();
        assert!(r.passed, "{:?}", r.checks);
        assert_abs_diff_eq!(r.ghz_state_bound, 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(r.separable_state_bound, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.state_ratio, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.ghz_rotated_qfim[0][0], 8.0, epsilon = 1e-12);
        assert!(r.both_parameters.ghz_bound.is_none());
        assert!(r.both_parameters.separable_bound.is_some());
    }

    #[test]
    fn gradient_rejects_odd_n() {
        let mut cfg = ScenarioConfig::new(ScenarioId::Gradient, 0, 1);
        cfg.n = Some(5);
        assert!(matches!(
            scenario_gradient(&cfg),
            Err(QsnError::InvalidConfig(_))
        ));
    }

    #[test]
    fn optical_defaults() {
        let r = scenario_optical_phases(&ScenarioConfig::new(ScenarioId::Optical, 5, 4)).unwrap();
        for q in &r.extremal_qfi {
            assert_abs_diff_eq!(*q, 9.0, epsilon = 1e-12);
        }
        assert!(r.vacuum_qfim_zero);
        assert_eq!(r.allocation, vec![3, 3]);
        assert!(r.passed);
    }

    #[test]
    fn config_parsing_is_strict() {
        let ok = r#"{"scenario": "prop1", "seed": 3, "trials": 10, "tol": 1e-9}"#;
        assert_eq!(ScenarioConfig::from_json_str(ok).unwrap().trials, 10);
        let unknown = r#"{"scenario": "prop1", "seed": 3, "trials": 10, "extra": 1}"#;
        assert!(ScenarioConfig::from_json_str(unknown).is_err());
        let zero = r#"{"scenario": "prop1", "seed": 3, "trials": 0}"#;
        assert!(ScenarioConfig::from_json_str(zero).is_err());
        let huge = r#"{"scenario": "theorem1", "seed": 3, "trials": 1, "sensors": [2, 9], "local_dim": [2, 9]}"#;
        assert!(matches!(
            ScenarioConfig::from_json_str(huge),
            Err(QsnError::DimensionLimit { .. })
        ));
    }
}
