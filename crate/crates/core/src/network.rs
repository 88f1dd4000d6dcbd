//! Sensor networks: per-sensor generators, resource operators and the
//! parameter partition they induce.
//!
//! Parameters are indexed from 0. Sensor `k` owns the contiguous parameter
//! range `P_k` of length equal to its generator count. Sensors without
//! generators are ancillas; they own no parameters and get no partition
//! block, so block `j` of a QFIM always refers to the `j`-th parameterized
//! sensor.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QsnError, Result};
use crate::hilbert::{
    self, apply_local, apply_local_vector, commutator_norm, embed_local, expm_i, json,
    ComplexMatrix, DensityOperator, HermitianOperator, Layout, PureState, C64,
};

/// Absolute commutator tolerance, scaled by the operand magnitudes.
pub const COMMUTATION_TOL: f64 = 1e-9;

pub(crate) fn commute(a: &HermitianOperator, b: &HermitianOperator) -> (bool, f64) {
    let residual = commutator_norm(a.matrix(), b.matrix());
    let scale = (hilbert::max_abs(a.matrix()) * hilbert::max_abs(b.matrix())).max(1.0);
    (residual <= COMMUTATION_TOL * scale, residual)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorSpec {
    local_dim: usize,
    generators: Vec<HermitianOperator>,
    resource: HermitianOperator,
}

impl SensorSpec {
    pub fn new(
        local_dim: usize,
        generators: Vec<HermitianOperator>,
        resource: HermitianOperator,
    ) -> Result<Self> {
        if local_dim == 0 {
            return Err(QsnError::InvalidNetwork("sensor dimension is 0".into()));
        }
        for g in &generators {
            if g.dim() != local_dim {
                return Err(QsnError::DimensionMismatch {
                    context: "sensor generator",
                    expected: local_dim,
                    found: g.dim(),
                });
            }
        }
        if resource.dim() != local_dim {
            return Err(QsnError::DimensionMismatch {
                context: "sensor resource operator",
                expected: local_dim,
                found: resource.dim(),
            });
        }
        Ok(Self {
            local_dim,
            generators,
            resource,
        })
    }

    /// A sensor with no parameters.
    pub fn ancilla(resource: HermitianOperator) -> Self {
        Self {
            local_dim: resource.dim(),
            generators: Vec::new(),
            resource,
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn resource(&self) -> &HermitianOperator {
        &self.resource
    }

    pub fn parameter_count(&self) -> usize {
        self.generators.len()
    }

    pub fn is_ancilla(&self) -> bool {
        self.generators.is_empty()
    }

    /// Local unitary `exp(-i Σ_j φ_j H_j)` for this sensor's parameters.
    pub fn local_unitary(&self, values: &[f64]) -> ComplexMatrix {
        if self.generators.is_empty() {
            return hilbert::identity(self.local_dim);
        }
        let refs: Vec<&HermitianOperator> = self.generators.iter().collect();
        let exponent = HermitianOperator::linear_combination(values, &refs);
        expm_i(&exponent, 1.0)
    }
}

/// Contiguous block sizes of a parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    sizes: Vec<usize>,
}

impl Partition {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(QsnError::InvalidConfig(format!(
                "partition block sizes must be positive, got {sizes:?}"
            )));
        }
        Ok(Self { sizes })
    }

    /// Every parameter in its own block.
    pub fn singletons(d: usize) -> Self {
        Self { sizes: vec![1; d] }
    }

    /// One block holding all `d` parameters.
    pub fn whole(d: usize) -> Self {
        Self { sizes: vec![d] }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn range(&self, block: usize) -> Range<usize> {
        let start: usize = self.sizes[..block].iter().sum();
        start..start + self.sizes[block]
    }

    pub fn block_of(&self, parameter: usize) -> Option<usize> {
        (0..self.num_blocks()).find(|&b| self.range(b).contains(&parameter))
    }
}

/// Either kind of probe.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl Probe {
    pub fn layout(&self) -> &Layout {
        match self {
            Probe::Pure(s) => s.layout(),
            Probe::Mixed(r) => r.layout(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            Probe::Pure(s) => s.to_density(),
            Probe::Mixed(r) => r.clone(),
        }
    }

    /// Reads `{"layout", "amplitudes"}` (pure) or `{"layout", "density"}`
    /// (mixed). Syntax errors carry line and column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let has = |key: &str| value.get(key).is_some();
        match (has("amplitudes"), has("density")) {
            (true, false) => {
                let spec: json::PureStateJson = serde_json::from_value(value)?;
                Ok(Probe::Pure(spec.try_into()?))
            }
            (false, true) => {
                let spec: DensityJson = serde_json::from_value(value)?;
                let matrix = json::matrix_from_rows(&spec.density)?;
                Ok(Probe::Mixed(DensityOperator::new(
                    matrix,
                    Layout::new(spec.layout)?,
                )?))
            }
            _ => Err(QsnError::InvalidConfig(
                "state needs exactly one of \"amplitudes\" or \"density\"".into(),
            )),
        }
    }
}

/// Serialized mixed state: `{"layout": [...], "density": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityJson {
    pub layout: Vec<usize>,
    pub density: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityOperator> for DensityJson {
    fn from(r: &DensityOperator) -> Self {
        Self {
            layout: r.layout().dims().to_vec(),
            density: json::matrix_to_rows(r.matrix()),
        }
    }
}

/// A point `φ` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QsnError::InvalidConfig(
                "parameter point has non-finite entries".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with `delta` added to parameter `k`.
    pub fn shifted(&self, k: usize, delta: f64) -> Self {
        let mut v = self.0.clone();
        v[k] += delta;
        Self(v)
    }
}

/// Diagonal, nonnegative weighting of the parameter covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightMatrix(Vec<f64>);

impl WeightMatrix {
    pub fn new(diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(QsnError::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = diagonal.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(QsnError::InvalidWeights(format!(
                "entry {w} is not a nonnegative number"
            )));
        }
        if diagonal.iter().all(|&w| w == 0.0) {
            return Err(QsnError::InvalidWeights("all weights are zero".into()));
        }
        Ok(Self(diagonal))
    }

    pub fn identity(d: usize) -> Self {
        Self(vec![1.0; d])
    }

    /// Accepts only diagonal matrices.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(QsnError::InvalidWeights(
                "weight matrix must be square".into(),
            ));
        }
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j && m[(i, j)] != 0.0 {
                    return Err(QsnError::InvalidWeights(format!(
                        "only diagonal weight matrices are supported (entry ({i},{j}) = {})",
                        m[(i, j)]
                    )));
                }
            }
        }
        Self::new(m.diagonal().iter().copied().collect())
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-sensor commutation structure reported by [`SensorNetwork::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorDiagnostics {
    pub sensor: usize,
    pub parameter_count: usize,
    /// `commutators[i][j]` is the max-entry norm of `[H_i, H_j]`.
    pub commutators: Vec<Vec<f64>>,
    pub commuting: bool,
    /// Max-entry norm of `[R_k, H_j]` for each generator.
    pub resource_commutators: Vec<f64>,
    pub resource_conserved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkDiagnostics {
    pub sensors: Vec<SensorDiagnostics>,
    pub parameter_count: usize,
    pub total_dim: usize,
    /// Every generator commutes with every other one.
    pub all_commuting: bool,
    pub all_resources_conserved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNetwork {
    sensors: Vec<SensorSpec>,
    layout: Layout,
    partition: Partition,
    /// For each global parameter: (sensor, local generator index).
    owners: Vec<(usize, usize)>,
}

impl SensorNetwork {
    pub fn new(sensors: Vec<SensorSpec>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(QsnError::InvalidNetwork("network has no sensors".into()));
        }
        let layout = Layout::new(sensors.iter().map(|s| s.local_dim).collect())?;
        let sizes: Vec<usize> = sensors
            .iter()
            .map(SensorSpec::parameter_count)
            .filter(|&c| c > 0)
            .collect();
        if sizes.is_empty() {
            return Err(QsnError::InvalidNetwork("network has no parameters".into()));
        }
        let owners = sensors
            .iter()
            .enumerate()
            .flat_map(|(s, spec)| (0..spec.parameter_count()).map(move |j| (s, j)))
            .collect();
        Ok(Self {
            sensors,
            layout,
            partition: Partition::new(sizes)?,
            owners,
        })
    }

    pub fn sensors(&self) -> &[SensorSpec] {
        &self.sensors
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn parameter_count(&self) -> usize {
        self.owners.len()
    }

    pub fn total_dim(&self) -> usize {
        self.layout.total()
    }

    /// The sensor index owning each partition block.
    pub fn block_sensors(&self) -> Vec<usize> {
        self.sensors
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_ancilla())
            .map(|(i, _)| i)
            .collect()
    }

    /// (sensor, local generator) owning parameter `k`.
    pub fn owner(&self, k: usize) -> Result<(usize, usize)> {
        self.owners
            .get(k)
            .copied()
            .ok_or(QsnError::IndexOutOfRange {
                what: "parameter",
                index: k,
                len: self.owners.len(),
            })
    }

    pub fn local_generator(&self, k: usize) -> Result<(usize, &HermitianOperator)> {
        let (s, j) = self.owner(k)?;
        Ok((s, &self.sensors[s].generators[j]))
    }

    pub fn all_commuting(&self) -> bool {
        self.sensors.iter().all(|s| {
            let g = &s.generators;
            (0..g.len()).all(|i| (i + 1..g.len()).all(|j| commute(&g[i], &g[j]).0))
        })
    }

    /// Commutation tables per sensor. Generators on different sensors always
    /// commute, so only within-sensor pairs are reported.
    pub fn validate(&self) -> Result<NetworkDiagnostics> {
        let mut out = Vec::with_capacity(self.sensors.len());
        for (index, sensor) in self.sensors.iter().enumerate() {
            let g = &sensor.generators;
            let mut commuting = true;
            let commutators = g
                .iter()
                .map(|a| {
                    g.iter()
                        .map(|b| {
                            let (ok, r) = commute(a, b);
                            commuting &= ok;
                            r
                        })
                        .collect()
                })
                .collect();
            let mut conserved = true;
            let resource_commutators = g
                .iter()
                .map(|h| {
                    let (ok, r) = commute(&sensor.resource, h);
                    conserved &= ok;
                    r
                })
                .collect();
            out.push(SensorDiagnostics {
                sensor: index,
                parameter_count: g.len(),
                commutators,
                commuting,
                resource_commutators,
                resource_conserved: conserved,
            });
        }
        Ok(NetworkDiagnostics {
            all_commuting: out.iter().all(|s| s.commuting),
            all_resources_conserved: out.iter().all(|s| s.resource_conserved),
            parameter_count: self.parameter_count(),
            total_dim: self.total_dim(),
            sensors: out,
        })
    }

    /// Generator of parameter `k` on the full network space.
    pub fn global_generator(&self, k: usize) -> Result<HermitianOperator> {
        let (s, h) = self.local_generator(k)?;
        embed_local(h, s, &self.layout)
    }

    pub fn global_generators(&self) -> Result<Vec<HermitianOperator>> {
        (0..self.parameter_count())
            .map(|k| self.global_generator(k))
            .collect()
    }

    /// `H_k |ψ⟩` for every parameter, applied sensor-locally.
    pub fn generator_actions(&self, psi: &PureState) -> Result<Vec<hilbert::ComplexVector>> {
        self.check_layout(psi.layout())?;
        (0..self.parameter_count())
            .map(|k| {
                let (s, h) = self.local_generator(k)?;
                apply_local_vector(h.matrix(), s, &self.layout, psi.amplitudes())
            })
            .collect()
    }

    /// Full-space resource operator `Σ_k R_k`.
    pub fn resource_operator(&self) -> Result<HermitianOperator> {
        let n = self.total_dim();
        let mut total = ComplexMatrix::zeros(n, n);
        for (s, sensor) in self.sensors.iter().enumerate() {
            total += embed_local(&sensor.resource, s, &self.layout)?.into_matrix();
        }
        HermitianOperator::new(total)
    }

    pub(crate) fn check_layout(&self, layout: &Layout) -> Result<()> {
        if layout.dims() != self.layout.dims() {
            return Err(QsnError::DimensionMismatch {
                context: "state layout vs network",
                expected: self.total_dim(),
                found: layout.total(),
            });
        }
        Ok(())
    }

    fn check_point(&self, phi: &ParameterPoint) -> Result<()> {
        if phi.len() != self.parameter_count() {
            return Err(QsnError::DimensionMismatch {
                context: "parameter point",
                expected: self.parameter_count(),
                found: phi.len(),
            });
        }
        Ok(())
    }

    fn local_unitaries(&self, phi: &ParameterPoint) -> Vec<Option<ComplexMatrix>> {
        let mut offset = 0;
        self.sensors
            .iter()
            .map(|sensor| {
                let n = sensor.parameter_count();
                let values = &phi.values()[offset..offset + n];
                offset += n;
                (n > 0 && values.iter().any(|&v| v != 0.0)).then(|| sensor.local_unitary(values))
            })
            .collect()
    }

    /// `U_φ |ψ⟩` with `U_φ = ⊗_k exp(-i Σ_{j∈P_k} φ_j H_j)`.
    pub fn encode_pure(&self, psi: &PureState, phi: &ParameterPoint) -> Result<PureState> {
        self.check_layout(psi.layout())?;
        self.check_point(phi)?;
        let mut v = psi.amplitudes().clone();
        for (s, u) in self.local_unitaries(phi).into_iter().enumerate() {
            if let Some(u) = u {
                v = apply_local_vector(&u, s, &self.layout, &v)?;
            }
        }
        Ok(PureState::from_parts_unchecked(v, psi.layout().clone()))
    }

    /// `U_φ ρ U_φ†`.
    pub fn encode_density(
        &self,
        rho: &DensityOperator,
        phi: &ParameterPoint,
    ) -> Result<DensityOperator> {
        self.check_layout(rho.layout())?;
        self.check_point(phi)?;
        let mut m = rho.matrix().clone();
        for (s, u) in self.local_unitaries(phi).into_iter().enumerate() {
            if let Some(u) = u {
                let left = apply_local(&u, s, &self.layout, &m)?;
                m = apply_local(&u, s, &self.layout, &left.adjoint())?.adjoint();
            }
        }
        Ok(DensityOperator::from_parts_unchecked(
            m,
            rho.layout().clone(),
        ))
    }

    pub fn encode(&self, probe: &Probe, phi: &ParameterPoint) -> Result<Probe> {
        Ok(match probe {
            Probe::Pure(s) => Probe::Pure(self.encode_pure(s, phi)?),
            Probe::Mixed(r) => Probe::Mixed(self.encode_density(r, phi)?),
        })
    }

    /// `Σ_k ⟨ψ| R_k |ψ⟩`.
    pub fn resource_count_pure(&self, psi: &PureState) -> Result<f64> {
        self.check_layout(psi.layout())?;
        let mut total = 0.0;
        for (s, sensor) in self.sensors.iter().enumerate() {
            let rv =
                apply_local_vector(sensor.resource.matrix(), s, &self.layout, psi.amplitudes())?;
            total += psi.amplitudes().dotc(&rv).re;
        }
        Ok(total)
    }

    /// `Σ_k Tr[R_k ρ_k]` over the sensor marginals.
    pub fn resource_count_density(&self, rho: &DensityOperator) -> Result<f64> {
        self.check_layout(rho.layout())?;
        let mut total = 0.0;
        for (s, sensor) in self.sensors.iter().enumerate() {
            let discard: Vec<usize> = (0..self.sensors.len()).filter(|&i| i != s).collect();
            let marginal = if discard.is_empty() {
                rho.clone()
            } else {
                hilbert::partial_trace(rho, &discard)?
            };
            total += marginal.expectation(&sensor.resource);
        }
        Ok(total)
    }

    pub fn resource_count(&self, probe: &Probe) -> Result<f64> {
        match probe {
            Probe::Pure(s) => self.resource_count_pure(s),
            Probe::Mixed(r) => self.resource_count_density(r),
        }
    }

    /// Each sensor followed by a local ancilla copy `[s1, a1, s2, a2, …]`.
    /// Ancillas carry the same resource operator as their sensor.
    pub fn with_local_ancillas(&self) -> Result<SensorNetwork> {
        let sensors = self
            .sensors
            .iter()
            .flat_map(|s| [s.clone(), SensorSpec::ancilla(s.resource.clone())])
            .collect();
        SensorNetwork::new(sensors)
    }

    /// All sensors followed by one ancilla copy of each, `H ⊗ H`.
    pub fn with_global_ancilla(&self) -> Result<SensorNetwork> {
        let mut sensors = self.sensors.clone();
        sensors.extend(
            self.sensors
                .iter()
                .map(|s| SensorSpec::ancilla(s.resource.clone())),
        );
        SensorNetwork::new(sensors)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: NetworkJson = serde_json::from_str(text)?;
        spec.try_into()
    }

    pub fn to_json(&self) -> NetworkJson {
        NetworkJson {
            sensors: self
                .sensors
                .iter()
                .map(|s| SensorJson {
                    dim: s.local_dim,
                    generators: s
                        .generators
                        .iter()
                        .map(|g| json::matrix_to_rows(g.matrix()))
                        .collect(),
                    resource: json::matrix_to_rows(s.resource.matrix()),
                })
                .collect(),
        }
    }
}

/// On-disk network description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkJson {
    pub sensors: Vec<SensorJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorJson {
    pub dim: usize,
    pub generators: Vec<Vec<Vec<[f64; 2]>>>,
    pub resource: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<NetworkJson> for SensorNetwork {
    type Error = QsnError;

    fn try_from(spec: NetworkJson) -> Result<Self> {
        let sensors = spec
            .sensors
            .into_iter()
            .map(|s| {
                let generators = s
                    .generators
                    .iter()
                    .map(|g| HermitianOperator::new(json::matrix_from_rows(g)?))
                    .collect::<Result<Vec<_>>>()?;
                let resource = HermitianOperator::new(json::matrix_from_rows(&s.resource)?)?;
                SensorSpec::new(s.dim, generators, resource)
            })
            .collect::<Result<Vec<_>>>()?;
        SensorNetwork::new(sensors)
    }
}

/// Sensors indexed by a particle number `n` whose single generator has
/// spectral width `κ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorFamily {
    /// `n` qubits with `J_z = ½ Σ_j σ_z,j`. Uses the full `2^n` space up to
    /// [`SensorFamily::FULL_SPACE_MAX_QUBITS`] qubits and the symmetric
    /// `(n+1)`-dimensional sector above that.
    QubitEnsemble,
    /// `n` qubits in the symmetric (collective spin `n/2`) sector.
    CollectiveSpin,
    /// An optical mode truncated at `n` photons, generator `n̂`.
    OpticalMode,
}

impl SensorFamily {
    pub const FULL_SPACE_MAX_QUBITS: usize = 8;

    /// Spectral width per particle.
    pub fn kappa(&self) -> f64 {
        1.0
    }

    /// The sensor for particle number `n`. Qubit sensors count atoms
    /// (`n · I`); optical modes count photons (`n̂`).
    pub fn sensor(&self, n: usize) -> Result<SensorSpec> {
        match self {
            SensorFamily::QubitEnsemble if n <= Self::FULL_SPACE_MAX_QUBITS => {
                let dim = 1usize << n;
                let diag: Vec<f64> = (0..dim)
                    .map(|b| {
                        // bit 0 is spin up (σ_z = +1)
                        let ups = n - (b.count_ones() as usize);
                        ups as f64 - n as f64 / 2.0
                    })
                    .collect();
                let jz = HermitianOperator::from_real_diagonal(&diag);
                let count = HermitianOperator::identity(dim).scale(n as f64);
                SensorSpec::new(dim, vec![jz], count)
            }
            SensorFamily::QubitEnsemble | SensorFamily::CollectiveSpin => {
                let diag: Vec<f64> = (0..=n).map(|m| n as f64 / 2.0 - m as f64).collect();
                let jz = HermitianOperator::from_real_diagonal(&diag);
                let count = HermitianOperator::identity(n + 1).scale(n as f64);
                SensorSpec::new(n + 1, vec![jz], count)
            }
            SensorFamily::OpticalMode => {
                let diag: Vec<f64> = (0..=n).map(|m| m as f64).collect();
                let number = HermitianOperator::from_real_diagonal(&diag);
                SensorSpec::new(n + 1, vec![number.clone()], number)
            }
        }
    }

    pub fn network(&self, particles: &[usize]) -> Result<SensorNetwork> {
        SensorNetwork::new(
            particles
                .iter()
                .map(|&n| self.sensor(n))
                .collect::<Result<_>>()?,
        )
    }
}

/// `σ_z / 2` on a qubit.
pub fn half_sigma_z() -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[0.5, -0.5])
}

/// `σ_x / 2` on a qubit.
pub fn half_sigma_x() -> HermitianOperator {
    let h = C64::new(0.5, 0.0);
    let z = C64::new(0.0, 0.0);
    HermitianOperator::new(ComplexMatrix::from_row_slice(2, 2, &[z, h, h, z])).expect("Hermitian")
}

/// `σ_y / 2` on a qubit.
pub fn half_sigma_y() -> HermitianOperator {
    let z = C64::new(0.0, 0.0);
    HermitianOperator::new(ComplexMatrix::from_row_slice(
        2,
        2,
        &[z, C64::new(0.0, -0.5), C64::new(0.0, 0.5), z],
    ))
    .expect("Hermitian")
}

/// `n` qubit sensors, each with generator `σ_z/2` and excitation-count
/// resource `diag(0, 1)`.
pub fn qubit_network(n: usize) -> Result<SensorNetwork> {
    let sensors = (0..n)
        .map(|_| {
            SensorSpec::new(
                2,
                vec![half_sigma_z()],
                HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
            )
        })
        .collect::<Result<_>>()?;
    SensorNetwork::new(sensors)
}
