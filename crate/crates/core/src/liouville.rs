//! Lindblad generator on row-major vectorized density matrices, the direct
//! stationary solve, and an explicit RK4 propagator used to cross-check it.

use faer::linalg::solvers::{Solve, SolveCore};
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Conj, Mat};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{DensityMatrix, OperatorMatrix};
use crate::model::{effective_hamiltonian, CollapseChannel};

/// Residual bound `||L vec(rho)||_inf` accepted from the stationary solve.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
/// Relative smallest-singular-value bound below which the bordered system
/// is treated as singular, i.e. the stationary state is not unique.
pub const DEGENERACY_TOL: f64 = 1e-11;
/// Trace drift that flags an unstable integration.
pub const TRACE_DRIFT_TOL: f64 = 1e-4;
/// Step bound relative to the generator's spectral bound.
pub const STEP_SAFETY: f64 = 1e-2;

/// Sparse superoperator in compressed-row form. Row/column `i * dim + j`
/// corresponds to the density-matrix entry `(i, j)`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<c64>,
}

impl Liouvillian {
    /// Hilbert-space dimension `d`; the superoperator is `d^2 x d^2`.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, c64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let n = dim * dim;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<c64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// `y = L x`.
    pub fn apply_vec(&self, x: &[c64], y: &mut [c64]) {
        assert_eq!(x.len(), self.size());
        assert_eq!(y.len(), self.size());
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = c64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// The right-hand side of the master equation for `rho`.
    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim {
            return Err(invalid(format!("matrix dim {} != generator dim {}", rho.dim(), self.dim)));
        }
        let x = vectorize(rho);
        let mut y = vec![c64::new(0.0, 0.0); self.size()];
        self.apply_vec(&x, &mut y);
        Ok(unvectorize(self.dim, &y))
    }

    /// Gershgorin bound on the spectral radius (largest absolute row sum).
    pub fn max_rate(&self) -> f64 {
        (0..self.size())
            .map(|r| self.vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest documented-safe RK4 step, `1e-2 / max_rate`.
    pub fn recommended_step(&self) -> f64 {
        STEP_SAFETY / self.max_rate().max(f64::MIN_POSITIVE)
    }

    /// Dense copy of the superoperator, for spectral checks on small systems.
    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.size();
        let mut m = Mat::zeros(n, n);
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

pub fn vectorize(m: &OperatorMatrix) -> Vec<c64> {
    let d = m.dim();
    (0..d * d).map(|k| m.get(k / d, k % d)).collect()
}

pub fn unvectorize(dim: usize, v: &[c64]) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, |i, j| v[i * dim + j])
}

/// Assemble `L` with `L vec(rho) = vec(-i[H, rho] + sum_k g_k (2 c rho c^dag - c^dag c rho - rho c^dag c))`.
pub fn build_liouvillian(h: &OperatorMatrix, channels: &[CollapseChannel]) -> Result<Liouvillian> {
    let d = h.dim();
    // -i H rho - sum g c^dag c rho = -i H_eff rho, and the right action is i rho H_eff^dag.
    let heff = effective_hamiltonian(h, channels)?;
    let mut entries = Vec::new();
    let minus_i = c64::new(0.0, -1.0);
    for (i, k, v) in heff.nonzeros() {
        for j in 0..d {
            entries.push((i * d + j, k * d + j, minus_i * v));
        }
    }
    for (k, j, v) in heff.adjoint().nonzeros() {
        for i in 0..d {
            entries.push((i * d + j, i * d + k, -minus_i * v));
        }
    }
    for ch in channels {
        let nz = ch.operator.nonzeros();
        let w = 2.0 * ch.coefficient;
        for &(i, k, a) in &nz {
            for &(j, l, b) in &nz {
                entries.push((i * d + j, k * d + l, a * b.conj() * w));
            }
        }
    }
    entries.retain(|e| e.2 != c64::new(0.0, 0.0));
    Ok(Liouvillian::from_triplets(d, entries))
}

/// Stationary state with diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `||L vec(rho)||_inf` after Hermitization.
    pub residual: f64,
    /// Estimated smallest singular value of the trace-bordered system,
    /// relative to its largest entry.
    pub conditioning: f64,
}

/// Unique stationary state of `L`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    solve_steady_state(l).map(|s| s.rho)
}

/// Replace the first equation by `trace(rho) = 1` and solve directly.
pub fn solve_steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let d = l.dim;
    let n = l.size();
    let mut triplets = Vec::with_capacity(l.nnz() + d);
    let mut scale = 1.0f64;
    for r in 1..n {
        for k in l.row_ptr[r]..l.row_ptr[r + 1] {
            triplets.push(Triplet::new(r, l.cols[k], l.vals[k]));
            scale = scale.max(l.vals[k].norm());
        }
    }
    for i in 0..d {
        triplets.push(Triplet::new(0, i * d + i, c64::new(1.0, 0.0)));
    }
    let bordered = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Numerical(format!("sparse assembly failed: {e:?}")))?;
    let lu = bordered.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { .. } => {
            Error::Degenerate("stationary system is structurally singular".into())
        }
        other => Error::Numerical(format!("sparse LU failed: {other:?}")),
    })?;

    let mut rhs = Mat::<c64>::zeros(n, 1);
    rhs[(0, 0)] = c64::new(1.0, 0.0);
    let x = lu.solve(&rhs);

    let sigma_min = smallest_singular_estimate(&lu, n);
    let conditioning = sigma_min / scale;
    let finite = (0..n).all(|k| x[(k, 0)].re.is_finite() && x[(k, 0)].im.is_finite());
    if !finite || !(conditioning > DEGENERACY_TOL) {
        return Err(Error::Degenerate(format!(
            "stationary state is not unique (relative singular value {conditioning:.3e})"
        )));
    }

    let raw = OperatorMatrix::from_fn(d, |i, j| x[(i * d + j, 0)]);
    let herm = OperatorMatrix::from_fn(d, |i, j| (raw.get(i, j) + raw.get(j, i).conj()) * 0.5);
    let mut y = vec![c64::new(0.0, 0.0); n];
    l.apply_vec(&vectorize(&herm), &mut y);
    let residual = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(residual < STEADY_RESIDUAL_TOL) {
        return Err(Error::Numerical(format!("stationary residual {residual:.3e} exceeds tolerance")));
    }
    let rho = DensityMatrix::new(herm)?;
    Ok(SteadyState { rho, residual, conditioning })
}

/// A few rounds of inverse iteration on `A^H A` through the LU factors.
fn smallest_singular_estimate<S: SolveCore<c64>>(lu: &S, n: usize) -> f64 {
    // Deterministic start vector with no special alignment to the basis.
    let mut v = Mat::<c64>::from_fn(n, 1, |k, _| {
        let t = (k as f64 + 1.0) * 0.618_033_988_749_895;
        c64::new((t * 12.9898).sin(), (t * 78.233).cos())
    });
    let mut growth = 0.0;
    for _ in 0..6 {
        let norm = v.norm_l2();
        if !(norm > 0.0) || !norm.is_finite() {
            return 0.0;
        }
        v = Mat::from_fn(n, 1, |k, _| v[(k, 0)] / norm);
        lu.solve_in_place_with_conj(Conj::No, v.as_mut());
        lu.solve_transpose_in_place_with_conj(Conj::Yes, v.as_mut());
        growth = v.norm_l2();
    }
    if !growth.is_finite() || growth == 0.0 {
        return 0.0;
    }
    1.0 / growth.sqrt()
}

/// Integrate `d rho / dt = L rho` with classical RK4 up to time `horizon`.
///
/// Uses `ceil(horizon / dt)` equal steps no longer than `dt`. Stability is
/// guaranteed for `dt <= recommended_step()`; larger steps are attempted and
/// rejected if the state drifts off the density-matrix manifold.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, dt: f64, horizon: f64) -> Result<DensityMatrix> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(invalid(format!("dt and horizon must be positive, got dt={dt}, T={horizon}")));
    }
    if rho0.dim() != l.dim {
        return Err(invalid(format!("state dim {} != generator dim {}", rho0.dim(), l.dim)));
    }
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    let n = l.size();
    let d = l.dim;
    let mut x = vectorize(rho0.as_operator());
    let trace0: c64 = (0..d).map(|i| x[i * d + i]).sum();
    let zero = c64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    for step in 0..steps {
        l.apply_vec(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + k1[i] * (0.5 * h);
        }
        l.apply_vec(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + k2[i] * (0.5 * h);
        }
        l.apply_vec(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + k3[i] * h;
        }
        l.apply_vec(&tmp, &mut k4);
        for i in 0..n {
            x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        if step % 16 == 15 || step + 1 == steps {
            let trace: c64 = (0..d).map(|i| x[i * d + i]).sum();
            let frob: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !frob.is_finite() || (trace - trace0).norm() > TRACE_DRIFT_TOL || frob > 1.0 + TRACE_DRIFT_TOL {
                return Err(Error::StepSize(format!(
                    "integration unstable at t={:.4} with dt={h:.3e} (recommended <= {:.3e})",
                    (step + 1) as f64 * h,
                    l.recommended_step()
                )));
            }
        }
    }
    let out = unvectorize(d, &x);
    Ok(DensityMatrix::new_unchecked(OperatorMatrix::from_fn(d, |i, j| {
        (out.get(i, j) + out.get(j, i).conj()) * 0.5
    })))
}
