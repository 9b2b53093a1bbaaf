//! Truncated Fock spaces for two bosonic modes with an optional two-level
//! system, plus the dense operator and state types built on them.
//!
//! Factor order is fixed as (mode 1, mode 2, TLS) and flattened row-major, so
//! the TLS index varies fastest:
//!
//! ```text
//! index = (n1 * (cutoff2 + 1) + n2) * tls_dim + tls
//! ```
//!
//! with `tls = 0` for the ground state and `1` for the excited state.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat, Side};

use crate::error::{invalid, Error, Result};

/// Tolerances a density matrix must satisfy.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TlsLevel {
    Ground,
    Excited,
}

impl TlsLevel {
    fn index(self) -> usize {
        match self {
            TlsLevel::Ground => 0,
            TlsLevel::Excited => 1,
        }
    }
}

/// A basis label `|n1, n2>` or `|s, n1, n2>` when a TLS is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub n1: usize,
    pub n2: usize,
    pub tls: Option<TlsLevel>,
}

impl BasisLabel {
    pub fn fock(n1: usize, n2: usize) -> Self {
        Self { n1, n2, tls: None }
    }

    pub fn ground(n1: usize, n2: usize) -> Self {
        Self { n1, n2, tls: Some(TlsLevel::Ground) }
    }

    pub fn excited(n1: usize, n2: usize) -> Self {
        Self { n1, n2, tls: Some(TlsLevel::Excited) }
    }

    /// Total number of excitations, photons plus the TLS excitation.
    pub fn excitations(&self) -> usize {
        self.n1 + self.n2 + usize::from(self.tls == Some(TlsLevel::Excited))
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tls {
            None => write!(f, "|{},{}>", self.n1, self.n2),
            Some(TlsLevel::Ground) => write!(f, "|g,{},{}>", self.n1, self.n2),
            Some(TlsLevel::Excited) => write!(f, "|e,{},{}>", self.n1, self.n2),
        }
    }
}

/// Tensor factor of a [`CompositeSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Mode1,
    Mode2,
    Tls,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpace {
    mode_cutoffs: [usize; 2],
    has_tls: bool,
}

impl CompositeSpace {
    pub fn new(mode_cutoffs: [usize; 2], has_tls: bool) -> Result<Self> {
        if mode_cutoffs.iter().any(|&c| c < 1) {
            return Err(invalid(format!("mode cutoffs must be >= 1, got {mode_cutoffs:?}")));
        }
        Ok(Self { mode_cutoffs, has_tls })
    }

    /// Two bosonic modes sharing one cutoff.
    pub fn two_modes(cutoff: usize) -> Result<Self> {
        Self::new([cutoff, cutoff], false)
    }

    /// Two bosonic modes sharing one cutoff plus a TLS.
    pub fn with_tls(cutoff: usize) -> Result<Self> {
        Self::new([cutoff, cutoff], true)
    }

    pub fn mode_cutoffs(&self) -> [usize; 2] {
        self.mode_cutoffs
    }

    pub fn has_tls(&self) -> bool {
        self.has_tls
    }

    pub fn tls_dim(&self) -> usize {
        if self.has_tls {
            2
        } else {
            1
        }
    }

    /// Dimensions of the tensor factors in order.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.mode_cutoffs[0] + 1, self.mode_cutoffs[1] + 1];
        if self.has_tls {
            dims.push(2);
        }
        dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims().iter().product()
    }

    pub fn slot_dim(&self, slot: Slot) -> Result<usize> {
        match slot {
            Slot::Mode1 => Ok(self.mode_cutoffs[0] + 1),
            Slot::Mode2 => Ok(self.mode_cutoffs[1] + 1),
            Slot::Tls if self.has_tls => Ok(2),
            Slot::Tls => Err(invalid("space has no TLS factor")),
        }
    }

    pub fn encode(&self, label: BasisLabel) -> Result<usize> {
        let [c1, c2] = self.mode_cutoffs;
        if label.n1 > c1 || label.n2 > c2 {
            return Err(invalid(format!("{label} exceeds cutoffs {:?}", self.mode_cutoffs)));
        }
        let tls = match (self.has_tls, label.tls) {
            (true, Some(level)) => level.index(),
            (false, None) => 0,
            (true, None) => return Err(invalid(format!("{label} is missing the TLS level"))),
            (false, Some(_)) => return Err(invalid(format!("{label} carries a TLS level"))),
        };
        Ok((label.n1 * (c2 + 1) + label.n2) * self.tls_dim() + tls)
    }

    pub fn decode(&self, index: usize) -> Result<BasisLabel> {
        if index >= self.total_dim() {
            return Err(invalid(format!("index {index} out of range {}", self.total_dim())));
        }
        let td = self.tls_dim();
        let d2 = self.mode_cutoffs[1] + 1;
        let tls = if self.has_tls {
            Some(if index.is_multiple_of(td) { TlsLevel::Ground } else { TlsLevel::Excited })
        } else {
            None
        };
        let photons = index / td;
        Ok(BasisLabel { n1: photons / d2, n2: photons % d2, tls })
    }

    /// All basis labels in index order.
    pub fn labels(&self) -> Vec<BasisLabel> {
        (0..self.total_dim()).map(|i| self.decode(i).expect("index in range")).collect()
    }
}

/// Dense complex square matrix acting on a [`CompositeSpace`] (or a single factor).
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix(Mat<c64>);

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix({0}x{0})", self.dim())
    }
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self(Mat::from_fn(dim, dim, f))
    }

    pub fn from_mat(mat: Mat<c64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(invalid(format!("operator must be square, got {}x{}", mat.nrows(), mat.ncols())));
        }
        Ok(Self(mat))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.0[(row, col)]
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint().to_owned())
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self(Mat::from_fn(self.dim(), self.dim(), |i, j| self.0[(i, j)] * factor))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest elementwise deviation `max |A - A^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max(self.0[(i, j)].norm());
            }
        }
        worst
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Nonzero entries as `(row, col, value)`, column by column.
    pub fn nonzeros(&self) -> Vec<(usize, usize, c64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = self.0[(i, j)];
                if v != c64::new(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(invalid(format!("state dim {} != operator dim {}", state.dim(), self.dim())));
        }
        let n = self.dim();
        let out = (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * state.0[j]).sum())
            .collect();
        Ok(StateVector(out))
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.check_dim(rhs);
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.check_dim(rhs);
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.check_dim(rhs);
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeOp {
    Annihilation,
    Creation,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlsOp {
    Lowering,
    Raising,
    ExcitationProjector,
}

/// Ladder operators of a single truncated mode on `0..=cutoff`.
pub fn build_mode_operator(kind: ModeOp, cutoff: usize) -> Result<OperatorMatrix> {
    if cutoff < 1 {
        return Err(invalid(format!("cutoff must be >= 1, got {cutoff}")));
    }
    let dim = cutoff + 1;
    let op = match kind {
        ModeOp::Annihilation => OperatorMatrix::from_fn(dim, |i, j| {
            if j == i + 1 {
                c64::new((j as f64).sqrt(), 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        }),
        ModeOp::Creation => build_mode_operator(ModeOp::Annihilation, cutoff)?.adjoint(),
        ModeOp::Number => OperatorMatrix::from_fn(dim, |i, j| {
            if i == j {
                c64::new(i as f64, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        }),
    };
    Ok(op)
}

/// TLS operators in the basis `(|g>, |e>)`.
pub fn build_tls_operator(kind: TlsOp) -> OperatorMatrix {
    let (row, col) = match kind {
        TlsOp::Lowering => (0, 1),
        TlsOp::Raising => (1, 0),
        TlsOp::ExcitationProjector => (1, 1),
    };
    OperatorMatrix::from_fn(2, |i, j| {
        if (i, j) == (row, col) {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Lift a single-factor operator to the full space, with identities elsewhere.
pub fn embed(op: &OperatorMatrix, slot: Slot, space: &CompositeSpace) -> Result<OperatorMatrix> {
    let slot_dim = space.slot_dim(slot)?;
    if op.dim() != slot_dim {
        return Err(invalid(format!("operator dim {} does not match {slot:?} dim {slot_dim}", op.dim())));
    }
    let slot_index = match slot {
        Slot::Mode1 => 0,
        Slot::Mode2 => 1,
        Slot::Tls => 2,
    };
    let mut result: Option<OperatorMatrix> = None;
    for (k, &d) in space.factor_dims().iter().enumerate() {
        let factor = if k == slot_index { op.clone() } else { OperatorMatrix::identity(d) };
        result = Some(match result {
            None => factor,
            Some(acc) => acc.kron(&factor),
        });
    }
    Ok(result.expect("at least two factors"))
}

/// Embedded annihilation operators for the two modes.
pub fn mode_lowering(space: &CompositeSpace) -> Result<[OperatorMatrix; 2]> {
    let [c1, c2] = space.mode_cutoffs();
    Ok([
        embed(&build_mode_operator(ModeOp::Annihilation, c1)?, Slot::Mode1, space)?,
        embed(&build_mode_operator(ModeOp::Annihilation, c2)?, Slot::Mode2, space)?,
    ])
}

/// `trace(rho * op)`.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<c64> {
    let n = rho.dim();
    if op.dim() != n {
        return Err(invalid(format!("operator dim {} != state dim {n}", op.dim())));
    }
    let r = rho.as_operator().as_mat();
    let o = op.as_mat();
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += r[(i, j)] * o[(j, i)];
        }
    }
    Ok(acc)
}

/// Pure state amplitudes; perturbative solves keep them unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<c64>);

impl StateVector {
    pub fn new(amplitudes: Vec<c64>) -> Self {
        Self(amplitudes)
    }

    pub fn basis(space: &CompositeSpace, label: BasisLabel) -> Result<Self> {
        let mut v = vec![c64::new(0.0, 0.0); space.total_dim()];
        v[space.encode(label)?] = c64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> c64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Outcome of checking the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub hermitian_deviation: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian_deviation <= HERMITIAN_TOL
            && self.trace_error <= TRACE_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    /// Wrap a matrix after checking Hermiticity, trace and positivity.
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let rho = Self(op);
        let report = rho.check()?;
        if !report.is_valid() {
            return Err(Error::Numerical(format!("not a density matrix: {report:?}")));
        }
        Ok(rho)
    }

    /// Wrap without validation. Callers are expected to run [`DensityMatrix::check`].
    pub fn new_unchecked(op: OperatorMatrix) -> Self {
        Self(op)
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        let norm = state.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("cannot build a density matrix from a zero state"));
        }
        let a = state.amplitudes();
        Ok(Self(OperatorMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj() / norm)))
    }

    /// `|0,0>` or `|g,0,0>`.
    pub fn vacuum(space: &CompositeSpace) -> Self {
        let label = if space.has_tls() { BasisLabel::ground(0, 0) } else { BasisLabel::fock(0, 0) };
        let psi = StateVector::basis(space, label).expect("vacuum is in every space");
        Self::pure(&psi).expect("unit vector")
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn check(&self) -> Result<DensityReport> {
        let hermitian_deviation = self.0.hermitian_deviation();
        let trace_error = (self.0.trace() - c64::new(1.0, 0.0)).norm();
        // Eigenvalues of the Hermitian part.
        let herm = self.0.as_mat();
        let sym = Mat::from_fn(self.dim(), self.dim(), |i, j| (herm[(i, j)] + herm[(j, i)].conj()) * 0.5);
        let eig = sym
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalue solve failed: {e:?}")))?;
        let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
        Ok(DensityReport { hermitian_deviation, trace_error, min_eigenvalue })
    }
}
