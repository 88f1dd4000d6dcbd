//! Dense complex linear algebra on tensor-product Hilbert spaces.
//!
//! Operators and states are stored as dense `nalgebra` matrices of
//! `Complex64`. A [`Layout`] records the subsystem dimensions of a composite
//! space; subsystem 0 is the most significant factor of the Kronecker product.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QsnError, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const DEFAULT_MAX_DIM: usize = 4096;
/// Relative to the largest entry magnitude.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_SLACK` are accepted as roundoff.
pub const PSD_SLACK: f64 = 1e-10;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Upper bound on any total Hilbert-space dimension.
///
/// Read once from `QSN_MAX_DIM`, falling back to [`DEFAULT_MAX_DIM`].
pub fn max_dimension() -> usize {
    static LIMIT: OnceLock<usize> = OnceLock::new();
    *LIMIT.get_or_init(|| {
        std::env::var("QSN_MAX_DIM")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_MAX_DIM)
    })
}

fn check_dimension(requested: usize) -> Result<()> {
    let limit = max_dimension();
    if requested > limit {
        return Err(QsnError::DimensionLimit { requested, limit });
    }
    Ok(())
}

/// Subsystem dimensions of a composite space, in Kronecker order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(Vec<usize>);

impl Layout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(QsnError::InvalidConfig("layout has no subsystems".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(QsnError::InvalidConfig(format!(
                "layout entry {pos} has dimension 0"
            )));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total.checked_mul(d).ok_or(QsnError::DimensionLimit {
                requested: usize::MAX,
                limit: max_dimension(),
            })?;
        }
        check_dimension(total)?;
        Ok(Self(dims))
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        Layout::new(dims)
    }

    /// Product of the dimensions strictly before and strictly after `site`.
    fn split_at(&self, site: usize) -> (usize, usize, usize) {
        let left = self.0[..site].iter().product();
        let right = self.0[site + 1..].iter().product();
        (left, self.0[site], right)
    }
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &ComplexVector) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Max-entry norm of `AB - BA`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.iter().chain(b.iter()).any(|z| !z.is_finite()) {
        return Err(QsnError::NonFinite("tensor_product operand"));
    }
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) => {
            check_dimension(r)?;
            check_dimension(c)?;
        }
        _ => {
            return Err(QsnError::DimensionLimit {
                requested: usize::MAX,
                limit: max_dimension(),
            })
        }
    }
    Ok(a.kronecker(b))
}

/// Kronecker product of state vectors.
pub fn tensor_vectors(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let mut out = ComplexVector::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Multiply the `site` factor of every column of `target` by `op`, without
/// forming the full embedded operator.
pub fn apply_local(
    op: &ComplexMatrix,
    site: usize,
    layout: &Layout,
    target: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if site >= layout.len() {
        return Err(QsnError::IndexOutOfRange {
            what: "site",
            index: site,
            len: layout.len(),
        });
    }
    let (left, dim, right) = layout.split_at(site);
    if op.nrows() != dim || op.ncols() != dim {
        return Err(QsnError::DimensionMismatch {
            context: "apply_local operator",
            expected: dim,
            found: op.nrows(),
        });
    }
    if target.nrows() != layout.total() {
        return Err(QsnError::DimensionMismatch {
            context: "apply_local target",
            expected: layout.total(),
            found: target.nrows(),
        });
    }
    let mut out = ComplexMatrix::zeros(target.nrows(), target.ncols());
    let mut buf = vec![ZERO; dim];
    for c in 0..target.ncols() {
        let col = target.column(c);
        for l in 0..left {
            for r in 0..right {
                let base = l * dim * right + r;
                for (j, slot) in buf.iter_mut().enumerate() {
                    *slot = col[base + j * right];
                }
                for i in 0..dim {
                    let mut acc = ZERO;
                    for (j, &x) in buf.iter().enumerate() {
                        acc += op[(i, j)] * x;
                    }
                    out[(base + i * right, c)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Same as [`apply_local`] for a single vector.
pub fn apply_local_vector(
    op: &ComplexMatrix,
    site: usize,
    layout: &Layout,
    v: &ComplexVector,
) -> Result<ComplexVector> {
    let m = ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice());
    let out = apply_local(op, site, layout, &m)?;
    Ok(ComplexVector::from_column_slice(out.as_slice()))
}

/// Rotate `v` so its largest-magnitude entry (first one on ties) is real and
/// positive.
pub fn canonical_phase(v: &mut ComplexVector) {
    let max = max_abs_vec(v);
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().copied().find(|z| z.norm() >= max * (1.0 - 1e-9)) {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// A Hermitian matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QsnError::DimensionMismatch {
                context: "Hermitian operator (square)",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|z| !z.is_finite()) {
            return Err(QsnError::NonFinite("Hermitian operator"));
        }
        check_dimension(matrix.nrows())?;
        let adjoint = matrix.adjoint();
        let deviation = max_abs(&(&matrix - &adjoint));
        if deviation > HERMITICITY_TOL * max_abs(&matrix) {
            return Err(QsnError::NotHermitian { deviation });
        }
        let matrix = (&matrix + adjoint).scale(0.5);
        Ok(Self { matrix })
    }

    /// Hermitian part `(M + M†)/2` of a computed matrix that is Hermitian
    /// up to roundoff.
    pub(crate) fn hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: (matrix + matrix.adjoint()).scale(0.5),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: ComplexMatrix::from_diagonal(&d),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
        }
    }

    /// Real linear combination `Σ c_i A_i`; panics if `ops` is empty.
    pub fn linear_combination(coeffs: &[f64], ops: &[&HermitianOperator]) -> Self {
        let dim = ops[0].dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (&c, op) in coeffs.iter().zip(ops) {
            m += op.matrix.scale(c);
        }
        Self { matrix: m }
    }

    pub fn commutes_with(&self, other: &HermitianOperator, tol: f64) -> bool {
        commutator_norm(&self.matrix, &other.matrix) <= tol
    }

    /// `Re <v|A|v>`.
    pub fn expectation(&self, v: &ComplexVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, phases canonicalized.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lambda);
        }
        debug_assert_eq!(scaled.ncols(), n);
        &scaled * self.vectors.adjoint()
    }
}

pub fn eigh(op: &HermitianOperator) -> Eigh {
    eigh_matrix(op.matrix())
}

/// Hermitian eigendecomposition of a matrix already known to be Hermitian.
pub(crate) fn eigh_matrix(m: &ComplexMatrix) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let decomposition = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .partial_cmp(&decomposition.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order
        .iter()
        .map(|&i| decomposition.eigenvalues[i])
        .collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: ComplexVector = decomposition.eigenvectors.column(src).into_owned();
        canonical_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigh { values, vectors }
}

/// `exp(-i · angle · op)`, via the eigendecomposition of `op`.
pub fn expm_i(op: &HermitianOperator, angle: f64) -> ComplexMatrix {
    let e = eigh(op);
    let mut scaled = e.vectors.clone();
    for (j, &lambda) in e.values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -angle * lambda);
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    &scaled * e.vectors.adjoint()
}

/// Identity on every subsystem except `site`, where `op` acts.
pub fn embed_local(
    op: &HermitianOperator,
    site: usize,
    layout: &Layout,
) -> Result<HermitianOperator> {
    if site >= layout.len() {
        return Err(QsnError::IndexOutOfRange {
            what: "site",
            index: site,
            len: layout.len(),
        });
    }
    let (left, dim, right) = layout.split_at(site);
    if op.dim() != dim {
        return Err(QsnError::DimensionMismatch {
            context: "embed_local",
            expected: dim,
            found: op.dim(),
        });
    }
    let m = tensor_product(
        &tensor_product(&identity(left), op.matrix())?,
        &identity(right),
    )?;
    Ok(HermitianOperator { matrix: m })
}

/// A normalized state vector with its subsystem layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
    layout: Layout,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.total() {
            return Err(QsnError::DimensionMismatch {
                context: "pure state layout",
                expected: layout.total(),
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(QsnError::NonFinite("pure state"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QsnError::NotNormalized { norm });
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales to unit norm; rejects the zero vector.
    pub fn normalized(amplitudes: ComplexVector, layout: Layout) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QsnError::NotNormalized { norm });
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize, layout: Layout) -> Result<Self> {
        let n = layout.total();
        if index >= n {
            return Err(QsnError::IndexOutOfRange {
                what: "basis",
                index,
                len: n,
            });
        }
        let mut v = ComplexVector::zeros(n);
        v[index] = ONE;
        Self::new(v, layout)
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `self ⊗ other` with concatenated layouts.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(PureState {
            amplitudes: tensor_vectors(&self.amplitudes, &other.amplitudes),
            layout,
        })
    }

    pub fn product(factors: &[PureState]) -> Result<PureState> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| QsnError::InvalidConfig("empty product of states".into()))?;
        rest.iter().try_fold(first.clone(), |acc, f| acc.tensor(f))
    }

    pub fn to_density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator {
            matrix: m,
            layout: self.layout.clone(),
        }
    }

    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        op.expectation(&self.amplitudes)
    }

    /// Reduced density operator on the subsystems in `keep` (kept in layout
    /// order), computed as `Ψ Ψ†` of the reshaped amplitude matrix.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let (kept, index_map) = split_indices(&self.layout, keep)?;
        let keep_dim = kept.total();
        let discard_dim = self.dim() / keep_dim;
        let mut psi = ComplexMatrix::zeros(keep_dim, discard_dim);
        for (full, &(k, d)) in index_map.iter().enumerate() {
            psi[(k, d)] = self.amplitudes[full];
        }
        let mut m = &psi * psi.adjoint();
        let h = m.adjoint();
        m = (m + h).scale(0.5);
        Ok(DensityOperator {
            matrix: m,
            layout: kept,
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub(crate) fn from_parts_unchecked(amplitudes: ComplexVector, layout: Layout) -> Self {
        Self { amplitudes, layout }
    }
}

/// Maps every full-space index to its (kept, discarded) index pair.
fn split_indices(layout: &Layout, keep: &[usize]) -> Result<(Layout, Vec<(usize, usize)>)> {
    let n_sub = layout.len();
    let mut keep_mask = vec![false; n_sub];
    for &k in keep {
        if k >= n_sub {
            return Err(QsnError::IndexOutOfRange {
                what: "subsystem",
                index: k,
                len: n_sub,
            });
        }
        keep_mask[k] = true;
    }
    if !keep_mask.iter().any(|&b| b) {
        return Err(QsnError::EmptyKeepSet);
    }
    let dims = layout.dims();
    let kept_dims: Vec<usize> = (0..n_sub)
        .filter(|&i| keep_mask[i])
        .map(|i| dims[i])
        .collect();
    let total = layout.total();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n_sub];
    for _ in 0..total {
        let (mut k, mut d) = (0usize, 0usize);
        for i in 0..n_sub {
            if keep_mask[i] {
                k = k * dims[i] + digits[i];
            } else {
                d = d * dims[i] + digits[i];
            }
        }
        map.push((k, d));
        for i in (0..n_sub).rev() {
            digits[i] += 1;
            if digits[i] < dims[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    Ok((Layout::new(kept_dims)?, map))
}

/// A density operator with its subsystem layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    layout: Layout,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, layout: Layout) -> Result<Self> {
        if matrix.nrows() != layout.total() || matrix.ncols() != layout.total() {
            return Err(QsnError::DimensionMismatch {
                context: "density operator layout",
                expected: layout.total(),
                found: matrix.nrows(),
            });
        }
        let herm =
            HermitianOperator::new(matrix).map_err(|e| QsnError::InvalidDensity(e.to_string()))?;
        let trace = herm.matrix().trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(QsnError::InvalidDensity(format!("trace {trace} != 1")));
        }
        let min = eigh(&herm).values.first().copied().unwrap_or(0.0);
        if min < -PSD_SLACK {
            return Err(QsnError::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self {
            matrix: herm.into_matrix(),
            layout,
        })
    }

    pub fn maximally_mixed(layout: Layout) -> Self {
        let n = layout.total();
        Self {
            matrix: identity(n).unscale(n as f64),
            layout,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigh(&self) -> Eigh {
        eigh_matrix(&self.matrix)
    }

    /// `Re Tr[A ρ]`.
    pub fn expectation(&self, op: &HermitianOperator) -> f64 {
        self.matrix
            .iter()
            .zip(op.matrix().transpose().iter())
            .map(|(r, a)| (r * a).re)
            .sum()
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            matrix: tensor_product(&self.matrix, &other.matrix)?,
            layout: self.layout.concat(&other.layout)?,
        })
    }

    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, layout: Layout) -> Self {
        Self { matrix, layout }
    }
}

/// Traces out the subsystems listed in `discard`; the rest keep layout order.
pub fn partial_trace(state: &DensityOperator, discard: &[usize]) -> Result<DensityOperator> {
    let n_sub = state.layout.len();
    if let Some(&bad) = discard.iter().find(|&&i| i >= n_sub) {
        return Err(QsnError::IndexOutOfRange {
            what: "subsystem",
            index: bad,
            len: n_sub,
        });
    }
    let keep: Vec<usize> = (0..n_sub).filter(|i| !discard.contains(i)).collect();
    let (kept, map) = split_indices(&state.layout, &keep)?;
    let keep_dim = kept.total();
    let discard_dim = state.dim() / keep_dim;
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(keep_dim); discard_dim];
    for (full, &(k, d)) in map.iter().enumerate() {
        groups[d].push((k, full));
    }
    let mut out = ComplexMatrix::zeros(keep_dim, keep_dim);
    for group in &groups {
        for &(kr, r) in group {
            for &(kc, c) in group {
                out[(kr, kc)] += state.matrix[(r, c)];
            }
        }
    }
    Ok(DensityOperator {
        matrix: out,
        layout: kept,
    })
}

/// JSON encoding of complex matrices and vectors: arrays of `[re, im]`
/// pairs, matrices as arrays of rows.
pub mod json {
    use super::*;

    pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect()
    }

    pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(QsnError::InvalidConfig("matrix has no rows".into()));
        }
        let ncols = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(QsnError::InvalidConfig(format!(
                "matrix row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
        let m = ComplexMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        if m.iter().any(|z| !z.is_finite()) {
            return Err(QsnError::NonFinite("JSON matrix"));
        }
        Ok(m)
    }

    pub fn vector_to_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
        v.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn vector_from_pairs(pairs: &[[f64; 2]]) -> ComplexVector {
        ComplexVector::from_iterator(pairs.len(), pairs.iter().map(|p| C64::new(p[0], p[1])))
    }

    /// Serialized pure state: `{"layout": [...], "amplitudes": [[re, im], ...]}`.
    #[derive(Debug, Clone, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct PureStateJson {
        pub layout: Vec<usize>,
        pub amplitudes: Vec<[f64; 2]>,
    }

    impl From<&PureState> for PureStateJson {
        fn from(s: &PureState) -> Self {
            Self {
                layout: s.layout().dims().to_vec(),
                amplitudes: vector_to_pairs(s.amplitudes()),
            }
        }
    }

    impl TryFrom<PureStateJson> for PureState {
        type Error = QsnError;
        fn try_from(j: PureStateJson) -> Result<Self> {
            PureState::new(vector_from_pairs(&j.amplitudes), Layout::new(j.layout)?)
        }
    }
}
