//! Dense complex matrices and the handful of multilinear operations the rest
//! of the crate is built on: tensor products, partial traces, dephasing,
//! factor permutations and Hermitian eigenvalue helpers.
//!
//! Matrices are small (products of qubit/qutrit factors), so everything is
//! dense and eager. Indices into tensor factors follow the convention that
//! the left factor varies slowest.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

/// Complex scalar used throughout.
pub type Cx = Complex<f64>;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix deviates from Hermitian symmetry by {deviation:.3e} (tolerance {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("product dimensions are empty or contain a zero factor")]
    BadDims,
    #[error("factor index {index} out of range for {count} factors")]
    FactorOutOfRange { index: usize, count: usize },
}

/// Dimensions of a tensor-product space, slowest factor first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDims {
    factors: Vec<usize>,
}

impl ProductDims {
    pub fn new(factors: &[usize]) -> Result<Self, OperatorError> {
        if factors.is_empty() || factors.iter().any(|&d| d == 0) {
            return Err(OperatorError::BadDims);
        }
        Ok(Self {
            factors: factors.to_vec(),
        })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Decompose a flat index into per-factor indices.
    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &d) in out.iter_mut().zip(self.factors.iter()).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    /// Flatten per-factor indices back into a flat index.
    pub fn ravel(&self, parts: &[usize]) -> usize {
        let mut idx = 0;
        for (&p, &d) in parts.iter().zip(self.factors.iter()) {
            idx = idx * d + p;
        }
        idx
    }
}

/// Dense complex matrix with row/column accessors.
///
/// Thin wrapper over an `nalgebra` matrix; entries are addressed as
/// (row, col) and row-major constructors are provided for data coming from
/// serialized channel descriptions.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    data: DMatrix<Cx>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// Matrix unit with a one at (i, j).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.data[(i, j)] = Cx::new(1.0, 0.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Cx) -> Self {
        Self {
            data: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Build from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Cx]) -> Result<Self, OperatorError> {
        if entries.len() != rows * cols {
            return Err(OperatorError::DimensionMismatch {
                context: "from_row_major",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self::from_fn(rows, cols, |r, c| entries[r * cols + c]))
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, OperatorError> {
        let cx: Vec<Cx> = entries.iter().map(|&x| Cx::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &cx)
    }

    pub fn diag(entries: &[Cx]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, c| if r == c { entries[r] } else { Cx::new(0.0, 0.0) })
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let cx: Vec<Cx> = entries.iter().map(|&x| Cx::new(x, 0.0)).collect();
        Self::diag(&cx)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn entry(&self, r: usize, c: usize) -> Cx {
        self.data[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Cx) {
        self.data[(r, c)] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn dagger(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.map(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> Cx {
        self.data.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: &self.data * Cx::new(s, 0.0),
        }
    }

    pub fn scale_cx(&self, s: Cx) -> Self {
        Self {
            data: &self.data * s,
        }
    }

    /// Hilbert-Schmidt inner product Tr[self^dagger other].
    pub fn inner(&self, other: &Self) -> Cx {
        let mut acc = Cx::new(0.0, 0.0);
        for c in 0..self.cols() {
            for r in 0..self.rows() {
                acc += self.data[(r, c)].conj() * other.data[(r, c)];
            }
        }
        acc
    }

    /// Kronecker product, left factor on the slower index.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    /// Largest absolute deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                let d = (self.data[(r, c)] - self.data[(c, r)].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// Zero every off-diagonal entry (dephasing in the computational product
    /// basis of the full space).
    pub fn dephase(&self) -> Self {
        Self::from_fn(self.rows(), self.cols(), |r, c| {
            if r == c {
                self.data[(r, c)]
            } else {
                Cx::new(0.0, 0.0)
            }
        })
    }

    /// Dephase only the listed tensor factors: entries whose row and column
    /// indices differ on any selected factor are zeroed.
    pub fn dephase_factors(
        &self,
        dims: &ProductDims,
        which: &[usize],
    ) -> Result<Self, OperatorError> {
        self.check_square_dims(dims)?;
        for &w in which {
            if w >= dims.len() {
                return Err(OperatorError::FactorOutOfRange {
                    index: w,
                    count: dims.len(),
                });
            }
        }
        let out = Self::from_fn(self.rows(), self.cols(), |r, c| {
            let ri = dims.unravel(r);
            let ci = dims.unravel(c);
            if which.iter().any(|&w| ri[w] != ci[w]) {
                Cx::new(0.0, 0.0)
            } else {
                self.data[(r, c)]
            }
        });
        Ok(out)
    }

    /// Partial trace keeping the listed factors in their current order.
    pub fn partial_trace(
        &self,
        dims: &ProductDims,
        keep: &[usize],
    ) -> Result<Self, OperatorError> {
        self.check_square_dims(dims)?;
        for &k in keep {
            if k >= dims.len() {
                return Err(OperatorError::FactorOutOfRange {
                    index: k,
                    count: dims.len(),
                });
            }
        }
        let keep_dims: Vec<usize> = keep.iter().map(|&k| dims.factors()[k]).collect();
        let out_dim: usize = keep_dims.iter().product();
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&t| dims.factors()[t]).collect();
        let traced_total: usize = traced_dims.iter().product();
        let kd = ProductDims::new(if keep_dims.is_empty() { &[1] } else { &keep_dims })
            .expect("nonempty dims");
        let td = ProductDims::new(if traced_dims.is_empty() { &[1] } else { &traced_dims })
            .expect("nonempty dims");
        let mut out = Self::zeros(out_dim.max(1), out_dim.max(1));
        for rk in 0..out_dim.max(1) {
            for ck in 0..out_dim.max(1) {
                let rparts = kd.unravel(rk);
                let cparts = kd.unravel(ck);
                let mut acc = Cx::new(0.0, 0.0);
                for t in 0..traced_total.max(1) {
                    let tparts = td.unravel(t);
                    let mut rfull = vec![0usize; dims.len()];
                    let mut cfull = vec![0usize; dims.len()];
                    for (pos, &k) in keep.iter().enumerate() {
                        rfull[k] = rparts[pos];
                        cfull[k] = cparts[pos];
                    }
                    for (pos, &tr) in traced.iter().enumerate() {
                        rfull[tr] = tparts[pos];
                        cfull[tr] = tparts[pos];
                    }
                    acc += self.data[(dims.ravel(&rfull), dims.ravel(&cfull))];
                }
                out.data[(rk, ck)] = acc;
            }
        }
        Ok(out)
    }

    /// Reorder tensor factors; `perm[i]` names the old factor that lands at
    /// position `i` of the result.
    pub fn permute_factors(
        &self,
        dims: &ProductDims,
        perm: &[usize],
    ) -> Result<Self, OperatorError> {
        self.check_square_dims(dims)?;
        if perm.len() != dims.len() {
            return Err(OperatorError::DimensionMismatch {
                context: "permute_factors",
                expected: dims.len(),
                got: perm.len(),
            });
        }
        let mut seen = vec![false; dims.len()];
        for &p in perm {
            if p >= dims.len() || seen[p] {
                return Err(OperatorError::FactorOutOfRange {
                    index: p,
                    count: dims.len(),
                });
            }
            seen[p] = true;
        }
        let new_factors: Vec<usize> = perm.iter().map(|&p| dims.factors()[p]).collect();
        let nd = ProductDims::new(&new_factors)?;
        let out = Self::from_fn(self.rows(), self.cols(), |r, c| {
            let rn = nd.unravel(r);
            let cn = nd.unravel(c);
            let mut ro = vec![0usize; dims.len()];
            let mut co = vec![0usize; dims.len()];
            for (new_pos, &old_pos) in perm.iter().enumerate() {
                ro[old_pos] = rn[new_pos];
                co[old_pos] = cn[new_pos];
            }
            self.data[(dims.ravel(&ro), dims.ravel(&co))]
        });
        Ok(out)
    }

    /// Trace norm (sum of singular values).
    pub fn trace_norm(&self) -> f64 {
        if self.is_hermitian(1e-12 * (1.0 + self.frobenius())) {
            eigvalsh(self).iter().map(|v| v.abs()).sum()
        } else {
            self.data
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .sum()
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            data: &self.data * &other.data,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    fn check_square_dims(&self, dims: &ProductDims) -> Result<(), OperatorError> {
        if !self.is_square() {
            return Err(OperatorError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        if dims.total() != self.rows() {
            return Err(OperatorError::DimensionMismatch {
                context: "tensor factor dims",
                expected: self.rows(),
                got: dims.total(),
            });
        }
        Ok(())
    }
}

/// Hermitian operator with a validated matrix.
///
/// Construction symmetrizes deviations below the tolerance and rejects
/// anything larger, so downstream code can rely on exact conjugate symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    dim: usize,
    mat: CMatrix,
}

impl HermitianOp {
    /// Default relative tolerance for accepting nearly-Hermitian input.
    pub const SYM_TOL: f64 = 1e-12;

    pub fn new(mat: CMatrix) -> Result<Self, OperatorError> {
        Self::new_with_tol(mat, Self::SYM_TOL)
    }

    pub fn new_with_tol(mat: CMatrix, rel_tol: f64) -> Result<Self, OperatorError> {
        if !mat.is_square() {
            return Err(OperatorError::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        let scale = 1.0 + mat.frobenius();
        let dev = mat.hermitian_deviation();
        let tol = rel_tol * scale;
        if dev > tol {
            return Err(OperatorError::NotHermitian { deviation: dev, tol });
        }
        let dim = mat.rows();
        let sym = CMatrix::from_fn(dim, dim, |r, c| {
            (mat.entry(r, c) + mat.entry(c, r).conj()) * Cx::new(0.5, 0.0)
        });
        Ok(Self { dim, mat: sym })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn eigvals(&self) -> Vec<f64> {
        eigvalsh(&self.mat)
    }

    pub fn min_eig(&self) -> f64 {
        self.eigvals()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eig() >= -tol
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let se = nalgebra::SymmetricEigen::new(m.data.clone());
    let mut v: Vec<f64> = se.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    v
}

/// Hermitian eigendecomposition: ascending eigenvalues with matching
/// eigenvector columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = nalgebra::SymmetricEigen::new(m.data.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let dim = m.rows();
    let vecs = CMatrix::from_fn(dim, dim, |r, c| se.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// f(H) for Hermitian H via the spectral decomposition.
pub fn herm_func(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let dim = m.rows();
    let fvals = DVector::from_iterator(dim, vals.iter().map(|&v| Cx::new(f(v), 0.0)));
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Cx::new(0.0, 0.0);
            for k in 0..dim {
                acc += vecs.entry(r, k) * fvals[k] * vecs.entry(c, k).conj();
            }
            out.set(r, c, acc);
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse square root of a PSD matrix; eigenvalues
/// below `cut` are treated as zero.
pub fn pinv_sqrt(m: &CMatrix, cut: f64) -> CMatrix {
    herm_func(m, |v| if v > cut { 1.0 / v.sqrt() } else { 0.0 })
}

/// Normalized maximally coherent ("plus") state on one system: the rank-one
/// projector with every entry 1/d.
pub fn plus_state(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| Cx::new(1.0 / d as f64, 0.0))
}

/// Unnormalized maximally entangled projector on a doubled system, with
/// trace d. This is the operator appearing in every Choi construction.
pub fn max_entangled(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (ri, rk) = (r / d, r % d);
        let (ci, ck) = (c / d, c % d);
        if ri == rk && ci == ck {
            Cx::new(1.0, 0.0)
        } else {
            Cx::new(0.0, 0.0)
        }
    })
}

/// Maximally mixed state I/d.
pub fn uniform_state(d: usize) -> CMatrix {
    CMatrix::identity(d).scale(1.0 / d as f64)
}
