//! Finite-dimensional quantum state algebra.
//!
//! States live on an ordered basis of [`Label`]s. Composite systems are
//! described by a [`Bipartition`] whose flattened index is
//! `first * dims.second + second`, matching [`StateVector::tensor`].
//!
//! Tolerances follow a fixed ladder: `1e-15` for algebraic identities,
//! `1e-12` for composed linear algebra and `1e-10` for eigenvalue checks.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for composed linear algebra (normalization, trace, hermiticity).
pub const LINALG_TOL: f64 = 1e-12;
/// Tolerance on negative eigenvalues of a density matrix.
pub const EIGEN_TOL: f64 = 1e-10;

/// A basis label: a plain index or a `(first, second)` pair on a product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Index(usize),
    Pair(usize, usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Index(i) => write!(f, "{i}"),
            Label::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// Dimensions of a two-factor product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub first: usize,
    pub second: usize,
}

impl Bipartition {
    pub fn new(first: usize, second: usize) -> Self {
        Bipartition { first, second }
    }

    pub fn dim(&self) -> usize {
        self.first * self.second
    }

    pub fn factor_dim(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::First => self.first,
            Subsystem::Second => self.second,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// A pure state: complex amplitudes over an ordered list of unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<Label>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(labels: Vec<Label>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if labels.len() != amplitudes.len() {
            return Err(Error::LengthMismatch {
                labels: labels.len(),
                amplitudes: amplitudes.len(),
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(*l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }
        Ok(StateVector { labels, amplitudes })
    }

    /// State over the plain index basis `0..n`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        let labels = (0..amplitudes.len()).map(Label::Index).collect();
        StateVector { labels, amplitudes }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `e_i` in dimension `dim`.
    pub fn basis_state(dim: usize, i: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[i] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= LINALG_TOL
    }

    fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    /// Returns the unit vector parallel to `self`.
    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::ZeroVector);
        }
        let inv = 1.0 / n2.sqrt();
        Ok(StateVector {
            labels: self.labels.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * inv).collect(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Product state `self ⊗ other`, labelled by position pairs.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut labels = Vec::with_capacity(self.dim() * other.dim());
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                labels.push(Label::Pair(i, j));
                amplitudes.push(a * b);
            }
        }
        StateVector { labels, amplitudes }
    }

    /// Reduced state of `|self><self|` on one factor, computed directly from
    /// the amplitudes without forming the full density matrix.
    pub fn reduced_density(&self, dims: Bipartition, keep: Subsystem) -> Result<DensityMatrix> {
        self.require_normalized()?;
        check_dim(dims.dim(), self.dim())?;
        let amp = |i: usize, j: usize| self.amplitudes[i * dims.second + j];
        let m = match keep {
            Subsystem::First => DMatrix::from_fn(dims.first, dims.first, |r, c| {
                (0..dims.second).map(|j| amp(r, j) * amp(c, j).conj()).sum()
            }),
            Subsystem::Second => DMatrix::from_fn(dims.second, dims.second, |r, c| {
                (0..dims.first).map(|i| amp(i, r) * amp(i, c).conj()).sum()
            }),
        };
        Ok(DensityMatrix { matrix: m })
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Free-function form of [`StateVector::normalize`].
pub fn normalize(v: &StateVector) -> Result<StateVector> {
    v.normalize()
}

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        let rho = DensityMatrix { matrix };
        let dev = rho.hermiticity_error();
        if dev > LINALG_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > LINALG_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = rho.min_eigenvalue();
        if min < -EIGEN_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(rho)
    }

    /// Rank-one projector `|v><v|`.
    pub fn from_state(v: &StateVector) -> Result<Self> {
        v.require_normalized()?;
        let a = v.amplitudes();
        let n = a.len();
        Ok(DensityMatrix {
            matrix: DMatrix::from_fn(n, n, |r, c| a[r] * a[c].conj()),
        })
    }

    /// Convex combination `sum_k w_k rho_k`. Weights must be nonnegative and sum to one.
    pub fn mixture(components: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        let n = first.1.dim();
        let mut total = 0.0;
        let mut m = DMatrix::zeros(n, n);
        for (w, rho) in components {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("mixture weight {w}")));
            }
            check_dim(n, rho.dim())?;
            total += w;
            m += &rho.matrix * Complex64::new(*w, 0.0);
        }
        if (total - 1.0).abs() > LINALG_TOL {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(DensityMatrix { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entrywise deviation from `rho = rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut max: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                max = max.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        max
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_part(&self.matrix)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Partial trace over the factor not named by `keep`.
    pub fn partial_trace(&self, dims: Bipartition, keep: Subsystem) -> Result<DensityMatrix> {
        check_dim(dims.dim(), self.dim())?;
        let (a, b) = (dims.first, dims.second);
        let m = &self.matrix;
        let reduced = match keep {
            Subsystem::First => {
                DMatrix::from_fn(a, a, |r, c| (0..b).map(|j| m[(r * b + j, c * b + j)]).sum())
            }
            Subsystem::Second => {
                DMatrix::from_fn(b, b, |r, c| (0..a).map(|i| m[(i * b + r, i * b + c)]).sum())
            }
        };
        Ok(DensityMatrix { matrix: reduced })
    }

    /// Diagonal as outcome probabilities. Roundoff negatives down to
    /// `-EIGEN_TOL` are clamped to zero.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        self.matrix
            .diagonal()
            .iter()
            .map(|z| {
                if z.re >= 0.0 {
                    Ok(z.re)
                } else if z.re >= -EIGEN_TOL {
                    Ok(0.0)
                } else {
                    Err(Error::NotPositive(z.re))
                }
            })
            .collect()
    }
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Free-function form of [`DensityMatrix::from_state`].
pub fn density_from_state(v: &StateVector) -> Result<DensityMatrix> {
    DensityMatrix::from_state(v)
}

/// Free-function form of [`DensityMatrix::partial_trace`].
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: Bipartition,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    rho.partial_trace(dims, keep)
}

/// Trace distance `(1/2) sum |lambda_i(a - b)|`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    let diff = hermitian_part(&(&a.matrix - &b.matrix));
    let s: f64 = diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Where a measurement acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// The whole space, of the given dimension.
    Whole(usize),
    /// One factor of a bipartite space.
    Factor(Bipartition, Subsystem),
}

impl Scope {
    fn total_dim(&self) -> usize {
        match self {
            Scope::Whole(n) => *n,
            Scope::Factor(dims, _) => dims.dim(),
        }
    }

    fn local_dim(&self) -> usize {
        match self {
            Scope::Whole(n) => *n,
            Scope::Factor(dims, which) => dims.factor_dim(*which),
        }
    }
}

/// One measurement outcome: a projector given by orthonormal vectors on the
/// measured subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub label: String,
    vectors: Vec<Vec<Complex64>>,
}

/// A complete projective measurement on a subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    scope: Scope,
    outcomes: Vec<Projector>,
}

impl MeasurementBasis {
    /// Projectors onto groups of computational basis indices of the measured
    /// subsystem. Groups must be disjoint and cover every index.
    pub fn from_label_groups<S: Into<String>>(
        scope: Scope,
        groups: Vec<(S, Vec<usize>)>,
    ) -> Result<Self> {
        let d = scope.local_dim();
        let mut seen = vec![false; d];
        let mut outcomes = Vec::with_capacity(groups.len());
        for (label, idx) in groups {
            let label = label.into();
            if idx.is_empty() {
                return Err(Error::InvalidBasis(format!(
                    "outcome {label} has no basis states"
                )));
            }
            let mut vectors = Vec::with_capacity(idx.len());
            for i in idx {
                if i >= d {
                    return Err(Error::InvalidBasis(format!(
                        "index {i} outside subsystem of dimension {d}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidBasis(format!(
                        "index {i} appears in two outcomes"
                    )));
                }
                vectors.push(unit(d, i));
            }
            outcomes.push(Projector { label, vectors });
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidBasis(format!(
                "index {missing} is not covered"
            )));
        }
        Ok(MeasurementBasis { scope, outcomes })
    }

    /// One outcome per computational basis state, labelled by index.
    pub fn computational(scope: Scope) -> Self {
        let groups = (0..scope.local_dim())
            .map(|i| (i.to_string(), vec![i]))
            .collect();
        Self::from_label_groups(scope, groups).expect("computational basis is complete")
    }

    /// Projectors spanned by explicit vectors. All vectors together must form
    /// an orthonormal basis of the measured subsystem.
    pub fn from_vectors<S: Into<String>>(
        scope: Scope,
        outcomes: Vec<(S, Vec<Vec<Complex64>>)>,
    ) -> Result<Self> {
        let d = scope.local_dim();
        let outcomes: Vec<Projector> = outcomes
            .into_iter()
            .map(|(label, vectors)| Projector {
                label: label.into(),
                vectors,
            })
            .collect();
        let all: Vec<&Vec<Complex64>> = outcomes.iter().flat_map(|p| p.vectors.iter()).collect();
        if all.len() != d {
            return Err(Error::InvalidBasis(format!(
                "{} vectors do not span a subsystem of dimension {d}",
                all.len()
            )));
        }
        if outcomes.iter().any(|p| p.vectors.is_empty()) {
            return Err(Error::InvalidBasis("empty outcome".into()));
        }
        for (i, u) in all.iter().enumerate() {
            if u.len() != d {
                return Err(Error::InvalidBasis(format!(
                    "vector length {} != {d}",
                    u.len()
                )));
            }
            for (j, v) in all.iter().enumerate().skip(i) {
                let ip: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip - want).norm() > LINALG_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "vectors {i} and {j} are not orthonormal (<u|v> = {ip})"
                    )));
                }
            }
        }
        Ok(MeasurementBasis { scope, outcomes })
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn label(&self, outcome: usize) -> &str {
        &self.outcomes[outcome].label
    }

    /// Unnormalized projection of `v` onto outcome `k`.
    pub fn project(&self, v: &StateVector, k: usize) -> Result<Vec<Complex64>> {
        check_dim(self.scope.total_dim(), v.dim())?;
        let proj = self
            .outcomes
            .get(k)
            .ok_or_else(|| Error::InvalidBasis(format!("no outcome {k}")))?;
        let a = v.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
        for u in &proj.vectors {
            match self.scope {
                Scope::Whole(_) => {
                    let w: Complex64 = u.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
                    for (o, ui) in out.iter_mut().zip(u) {
                        *o += ui * w;
                    }
                }
                Scope::Factor(dims, Subsystem::First) => {
                    let b = dims.second;
                    for j in 0..b {
                        let w: Complex64 =
                            (0..dims.first).map(|i| u[i].conj() * a[i * b + j]).sum();
                        for (i, ui) in u.iter().enumerate() {
                            out[i * b + j] += ui * w;
                        }
                    }
                }
                Scope::Factor(dims, Subsystem::Second) => {
                    let b = dims.second;
                    for i in 0..dims.first {
                        let row = &a[i * b..(i + 1) * b];
                        let w: Complex64 = u.iter().zip(row).map(|(x, y)| x.conj() * y).sum();
                        for (j, uj) in u.iter().enumerate() {
                            out[i * b + j] += uj * w;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn unit(d: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// Born probabilities of every outcome of `basis` on the normalized state `v`.
pub fn born_probabilities(v: &StateVector, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    v.require_normalized()?;
    (0..basis.len())
        .map(|k| Ok(basis.project(v, k)?.iter().map(|z| z.norm_sqr()).sum()))
        .collect()
}

/// Probability of outcome `k` and the renormalized post-measurement state.
/// Fails with [`Error::ZeroVector`] when the outcome has probability zero.
pub fn born_collapse(
    v: &StateVector,
    basis: &MeasurementBasis,
    k: usize,
) -> Result<(f64, StateVector)> {
    v.require_normalized()?;
    let projected = basis.project(v, k)?;
    let p: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
    let state = StateVector {
        labels: v.labels.clone(),
        amplitudes: projected,
    }
    .normalize()?;
    Ok((p, state))
}

/// Result of [`born_measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: usize,
    pub label: String,
    pub probability: f64,
    pub state: StateVector,
}

/// Samples an outcome with Born probabilities and collapses the state.
pub fn born_measure<R: Rng + ?Sized>(
    v: &StateVector,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<Measurement> {
    let probs = born_probabilities(v, basis)?;
    let sampler = crate::sampling::DiscreteSampler::new(&probs)?;
    let outcome = sampler.sample(rng);
    let (probability, state) = born_collapse(v, basis, outcome)?;
    Ok(Measurement {
        outcome,
        label: basis.label(outcome).to_string(),
        probability,
        state,
    })
}
