//! Dense semidefinite programming over Hermitian matrix variables.
//!
//! The builder assembles affine Hermitian-valued expressions over three kinds
//! of variables (free scalars, free real diagonals, Hermitian matrices) and
//! lowers everything to one real conic program
//!
//! ```text
//! minimize c'x  subject to  Ax + s = b,  s in {0}^m0 x R+^m1 x PSD(k1) x ...
//! ```
//!
//! Hermitian semidefinite blocks are embedded as real symmetric blocks of twice
//! the dimension; equality blocks stay in exact Hermitian coordinates. The
//! bundled [`InteriorPointSolver`] is a homogeneous self-dual interior-point
//! method, so primal or dual infeasibility is certified rather than guessed at.
//!
//! Declare all variables before forming expressions: an expression's
//! coefficient width is fixed by the variable count at creation time, and
//! mixing widths panics.

pub(crate) mod embed;
mod solver;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::operator::{eigvalsh, CMatrix, ProductDims};
use embed::{hvec, hvec_len, phi, unhvec};

pub use solver::InteriorPointSolver;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("problem has no objective")]
    MissingObjective,
    #[error("ill-posed problem: {0}")]
    IllPosed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Termination state of a conic solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIter,
}

/// Stopping tolerances for the interior-point loop.
#[derive(Debug, Clone, Copy)]
pub struct SolveTols {
    /// Relative primal and dual feasibility residual bound.
    pub feas: f64,
    /// Relative duality gap bound.
    pub gap: f64,
    pub max_iter: usize,
}

impl Default for SolveTols {
    fn default() -> Self {
        Self {
            feas: 1e-8,
            gap: 1e-7,
            max_iter: 200,
        }
    }
}

/// Solution summary. Values are in the caller's objective sense; on an
/// infeasible status the values are NaN and the blocks hold the certificate:
/// a separating dual ray for [`SolveStatus::PrimalInfeasible`], an unbounded
/// primal ray for [`SolveStatus::DualInfeasible`].
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// |primal - dual| / (1 + |primal|).
    pub gap: f64,
    pub iterations: usize,
    pub primal_blocks: Vec<(String, CMatrix)>,
    pub dual_blocks: Vec<(String, CMatrix)>,
}

impl SolveReport {
    pub fn primal_block(&self, name: &str) -> Option<&CMatrix> {
        self.primal_blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }

    pub fn dual_block(&self, name: &str) -> Option<&CMatrix> {
        self.dual_blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }
}

/// Anything that can solve the canonical conic form.
pub trait ConicSolver {
    fn solve(&self, prob: &ConicProblem, tols: &SolveTols) -> Result<SolveReport, SdpError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Debug, Clone, Copy)]
pub(crate) enum VarKind {
    Scalar,
    Diag(usize),
    Herm(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct VarMeta {
    pub(crate) name: String,
    pub(crate) kind: VarKind,
    pub(crate) off: usize,
    pub(crate) len: usize,
}

/// Affine real-valued expression a'x + k.
#[derive(Debug, Clone)]
pub struct ScalExpr {
    row: DVector<f64>,
    konst: f64,
}

impl ScalExpr {
    pub fn add(&self, o: &ScalExpr) -> ScalExpr {
        assert_eq!(self.row.len(), o.row.len(), "expression width mismatch");
        ScalExpr {
            row: &self.row + &o.row,
            konst: self.konst + o.konst,
        }
    }

    pub fn sub(&self, o: &ScalExpr) -> ScalExpr {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> ScalExpr {
        ScalExpr {
            row: &self.row * f,
            konst: self.konst * f,
        }
    }

    pub fn shift(&self, k: f64) -> ScalExpr {
        ScalExpr {
            row: self.row.clone(),
            konst: self.konst + k,
        }
    }
}

/// Affine Hermitian-matrix-valued expression, stored in hvec coordinates:
/// `coeffs` is (d^2 x n_x) and `konst` is the hvec of the constant term.
#[derive(Debug, Clone)]
pub struct MatExpr {
    dim: usize,
    coeffs: DMatrix<f64>,
    konst: DVector<f64>,
}

impl MatExpr {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&self, o: &MatExpr) -> MatExpr {
        assert_eq!(self.dim, o.dim, "matrix expression dimension mismatch");
        assert_eq!(
            self.coeffs.ncols(),
            o.coeffs.ncols(),
            "expression width mismatch"
        );
        MatExpr {
            dim: self.dim,
            coeffs: &self.coeffs + &o.coeffs,
            konst: &self.konst + &o.konst,
        }
    }

    pub fn sub(&self, o: &MatExpr) -> MatExpr {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> MatExpr {
        MatExpr {
            dim: self.dim,
            coeffs: &self.coeffs * f,
            konst: &self.konst * f,
        }
    }

    /// Add a constant Hermitian matrix.
    pub fn shift(&self, k: &CMatrix) -> MatExpr {
        assert_eq!(k.rows(), self.dim, "constant dimension mismatch");
        MatExpr {
            dim: self.dim,
            coeffs: self.coeffs.clone(),
            konst: &self.konst + hvec(k),
        }
    }

    /// Push the expression through an R-linear Hermitian-to-Hermitian map,
    /// given by its action on matrices. The map is sampled on the hvec basis.
    pub fn map(&self, out_dim: usize, mut f: impl FnMut(&CMatrix) -> CMatrix) -> MatExpr {
        let d_in = self.dim;
        let mut m = DMatrix::zeros(hvec_len(out_dim), hvec_len(d_in));
        let mut e = DVector::zeros(hvec_len(d_in));
        for k in 0..hvec_len(d_in) {
            e[k] = 1.0;
            let img = f(&unhvec(&e, d_in));
            assert_eq!(img.rows(), out_dim, "map output dimension mismatch");
            m.set_column(k, &hvec(&img));
            e[k] = 0.0;
        }
        MatExpr {
            dim: out_dim,
            coeffs: &m * &self.coeffs,
            konst: &m * &self.konst,
        }
    }

    pub fn partial_trace(&self, dims: &ProductDims, keep: &[usize]) -> MatExpr {
        let out: usize = keep.iter().map(|&k| dims.factors()[k]).product();
        self.map(out.max(1), |x| {
            x.partial_trace(dims, keep).expect("valid partial trace")
        })
    }

    pub fn dephase(&self) -> MatExpr {
        self.map(self.dim, |x| x.dephase())
    }

    pub fn dephase_factors(&self, dims: &ProductDims, which: &[usize]) -> MatExpr {
        self.map(self.dim, |x| {
            x.dephase_factors(dims, which).expect("valid dephase factors")
        })
    }

    pub fn permute_factors(&self, dims: &ProductDims, perm: &[usize]) -> MatExpr {
        self.map(self.dim, |x| {
            x.permute_factors(dims, perm).expect("valid permutation")
        })
    }

    /// K (x) expr.
    pub fn tensor_left(&self, k: &CMatrix) -> MatExpr {
        self.map(k.rows() * self.dim, |x| k.tensor(x))
    }

    /// expr (x) K.
    pub fn tensor_right(&self, k: &CMatrix) -> MatExpr {
        self.map(self.dim * k.rows(), |x| x.tensor(k))
    }

    /// Real inner product Tr[K . expr] as a scalar expression.
    pub fn inner(&self, k: &CMatrix) -> ScalExpr {
        assert_eq!(k.rows(), self.dim, "inner dimension mismatch");
        let hk = hvec(k);
        ScalExpr {
            row: self.coeffs.transpose() * &hk,
            konst: self.konst.dot(&hk),
        }
    }

    pub fn tr(&self) -> ScalExpr {
        self.inner(&CMatrix::identity(self.dim))
    }

    /// scal * K as a matrix expression.
    pub fn from_scal(scal: &ScalExpr, k: &CMatrix) -> MatExpr {
        let hk = hvec(k);
        let mut coeffs = DMatrix::zeros(hk.len(), scal.row.len());
        for c in 0..scal.row.len() {
            if scal.row[c] != 0.0 {
                coeffs.set_column(c, &(&hk * scal.row[c]));
            }
        }
        MatExpr {
            dim: k.rows(),
            coeffs,
            konst: &hk * scal.konst,
        }
    }
}

enum ConKind {
    EqMat(MatExpr),
    EqScal(ScalExpr),
    Nonneg(ScalExpr),
    Psd(MatExpr),
}

struct Constraint {
    label: String,
    kind: ConKind,
}

/// Where a labeled constraint's dual multiplier lives in the conic rows.
#[derive(Debug, Clone)]
pub(crate) enum DualShape {
    /// Hermitian multiplier of a matrix equality; kept rows map conic row
    /// index to hvec coordinate, pruned coordinates read as zero.
    EqMat { d: usize, rows: Vec<(usize, usize)> },
    Scalar { row: Option<usize> },
    Psd { d: usize, row0: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct DualSlot {
    pub(crate) label: String,
    pub(crate) shape: DualShape,
}

/// Canonical dense conic program produced by [`ProblemBuilder::build`].
pub struct ConicProblem {
    pub(crate) c: DVector<f64>,
    pub(crate) a: DMatrix<f64>,
    pub(crate) b: DVector<f64>,
    pub(crate) m_zero: usize,
    pub(crate) m_nonneg: usize,
    /// Embedded real dimensions of the semidefinite blocks, in row order.
    pub(crate) psd: Vec<usize>,
    pub(crate) sense_max: bool,
    pub(crate) obj_konst: f64,
    pub(crate) vars: Vec<VarMeta>,
    pub(crate) duals: Vec<DualSlot>,
}

impl ConicProblem {
    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    /// Human-readable summary of the lowered problem, for debugging.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "conic program: {} over {} reals, {} rows",
            if self.sense_max { "maximize" } else { "minimize" },
            self.c.len(),
            self.b.len()
        );
        for v in &self.vars {
            let kind = match v.kind {
                VarKind::Scalar => "scalar".to_string(),
                VarKind::Diag(n) => format!("diag({n})"),
                VarKind::Herm(d) => format!("herm({d})"),
            };
            let _ = writeln!(s, "  var {} : {} at [{}, {})", v.name, kind, v.off, v.off + v.len);
        }
        let _ = writeln!(
            s,
            "  cones: zero {} | nonneg {} | psd {:?} (embedded dims)",
            self.m_zero, self.m_nonneg, self.psd
        );
        for slot in &self.duals {
            let shape = match &slot.shape {
                DualShape::EqMat { d, rows } => format!("eq herm({d}), {} active rows", rows.len()),
                DualShape::Scalar { row: Some(_) } => "scalar row".to_string(),
                DualShape::Scalar { row: None } => "scalar row (pruned)".to_string(),
                DualShape::Psd { d, .. } => format!("psd herm({d})"),
            };
            let _ = writeln!(s, "  constraint {} : {}", slot.label, shape);
        }
        s
    }
}

/// Incremental builder for one semidefinite program.
pub struct ProblemBuilder {
    sense_max: bool,
    vars: Vec<VarMeta>,
    nx: usize,
    objective: Option<ScalExpr>,
    cons: Vec<Constraint>,
}

impl ProblemBuilder {
    pub fn minimize() -> Self {
        Self {
            sense_max: false,
            vars: Vec::new(),
            nx: 0,
            objective: None,
            cons: Vec::new(),
        }
    }

    pub fn maximize() -> Self {
        Self {
            sense_max: true,
            ..Self::minimize()
        }
    }

    fn push_var(&mut self, name: &str, kind: VarKind, len: usize) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(VarMeta {
            name: name.to_string(),
            kind,
            off: self.nx,
            len,
        });
        self.nx += len;
        id
    }

    /// One free real.
    pub fn scalar(&mut self, name: &str) -> VarId {
        self.push_var(name, VarKind::Scalar, 1)
    }

    /// n free reals, viewed as a diagonal Hermitian matrix by [`Self::mat`].
    pub fn diag(&mut self, name: &str, n: usize) -> VarId {
        assert!(n > 0, "diagonal variable needs positive size");
        self.push_var(name, VarKind::Diag(n), n)
    }

    /// A d x d Hermitian matrix variable (d^2 free reals).
    pub fn herm(&mut self, name: &str, d: usize) -> VarId {
        assert!(d > 0, "matrix variable needs positive dimension");
        self.push_var(name, VarKind::Herm(d), d * d)
    }

    /// The variable as a Hermitian-matrix expression.
    pub fn mat(&self, v: VarId) -> MatExpr {
        let meta = &self.vars[v.0];
        let d = match meta.kind {
            VarKind::Scalar => 1,
            VarKind::Diag(n) => n,
            VarKind::Herm(d) => d,
        };
        let mut coeffs = DMatrix::zeros(hvec_len(d), self.nx);
        match meta.kind {
            VarKind::Herm(_) => {
                for k in 0..meta.len {
                    coeffs[(k, meta.off + k)] = 1.0;
                }
            }
            // Diagonal and scalar coordinates are the leading hvec entries.
            VarKind::Diag(_) | VarKind::Scalar => {
                for k in 0..meta.len {
                    coeffs[(k, meta.off + k)] = 1.0;
                }
            }
        }
        MatExpr {
            dim: d,
            coeffs,
            konst: DVector::zeros(hvec_len(d)),
        }
    }

    /// A scalar variable as a scalar expression.
    pub fn scal(&self, v: VarId) -> ScalExpr {
        let meta = &self.vars[v.0];
        assert!(
            matches!(meta.kind, VarKind::Scalar),
            "scal() needs a scalar variable"
        );
        self.elem(v, 0)
    }

    /// Entry i of a scalar or diagonal variable.
    pub fn elem(&self, v: VarId, i: usize) -> ScalExpr {
        let meta = &self.vars[v.0];
        assert!(i < meta.len, "diagonal entry out of range");
        let mut row = DVector::zeros(self.nx);
        row[meta.off + i] = 1.0;
        ScalExpr { row, konst: 0.0 }
    }

    /// Sum of the entries of a diagonal variable.
    pub fn sum(&self, v: VarId) -> ScalExpr {
        let meta = &self.vars[v.0];
        let mut row = DVector::zeros(self.nx);
        for i in 0..meta.len {
            row[meta.off + i] = 1.0;
        }
        ScalExpr { row, konst: 0.0 }
    }

    /// A constant Hermitian matrix as an expression.
    pub fn constant(&self, k: &CMatrix) -> MatExpr {
        MatExpr {
            dim: k.rows(),
            coeffs: DMatrix::zeros(hvec_len(k.rows()), self.nx),
            konst: hvec(k),
        }
    }

    pub fn constant_scal(&self, v: f64) -> ScalExpr {
        ScalExpr {
            row: DVector::zeros(self.nx),
            konst: v,
        }
    }

    pub fn objective(&mut self, e: ScalExpr) {
        assert_eq!(e.row.len(), self.nx, "objective width mismatch");
        self.objective = Some(e);
    }

    /// Constrain a Hermitian expression to vanish.
    pub fn eq_zero(&mut self, label: &str, e: MatExpr) {
        self.cons.push(Constraint {
            label: label.to_string(),
            kind: ConKind::EqMat(e),
        });
    }

    pub fn eq_scalar(&mut self, label: &str, e: ScalExpr) {
        self.cons.push(Constraint {
            label: label.to_string(),
            kind: ConKind::EqScal(e),
        });
    }

    /// Constrain a scalar expression to be nonnegative.
    pub fn nonneg(&mut self, label: &str, e: ScalExpr) {
        self.cons.push(Constraint {
            label: label.to_string(),
            kind: ConKind::Nonneg(e),
        });
    }

    /// Constrain a Hermitian expression to be positive semidefinite.
    pub fn psd(&mut self, label: &str, e: MatExpr) {
        self.cons.push(Constraint {
            label: label.to_string(),
            kind: ConKind::Psd(e),
        });
    }

    /// Lower to the canonical conic form, pruning trivial rows and rejecting
    /// structurally unbounded or infeasible input.
    pub fn build(self) -> Result<ConicProblem, SdpError> {
        let nx = self.nx;
        let obj = self.objective.ok_or(SdpError::MissingObjective)?;
        let sign = if self.sense_max { -1.0 } else { 1.0 };
        let c = &obj.row * sign;

        const ROW_TOL: f64 = 1e-13;
        let row_zero = |row: &DVector<f64>| row.amax() <= ROW_TOL;

        // Zero cone: matrix equalities in hvec rows, then scalar equalities.
        let mut eq_rows: Vec<DVector<f64>> = Vec::new();
        let mut eq_b: Vec<f64> = Vec::new();
        let mut duals: Vec<DualSlot> = Vec::new();
        for con in &self.cons {
            match &con.kind {
                ConKind::EqMat(e) => {
                    assert_eq!(e.coeffs.ncols(), nx, "constraint width mismatch");
                    let mut kept = Vec::new();
                    for r in 0..e.coeffs.nrows() {
                        let row: DVector<f64> = e.coeffs.row(r).transpose();
                        if row_zero(&row) {
                            if e.konst[r].abs() > 1e-10 {
                                return Err(SdpError::IllPosed(format!(
                                    "equality {} fixes a constant {:.3e} to zero",
                                    con.label, e.konst[r]
                                )));
                            }
                            continue;
                        }
                        kept.push((eq_rows.len(), r));
                        eq_rows.push(row);
                        eq_b.push(-e.konst[r]);
                    }
                    duals.push(DualSlot {
                        label: con.label.clone(),
                        shape: DualShape::EqMat {
                            d: e.dim,
                            rows: kept,
                        },
                    });
                }
                ConKind::EqScal(e) => {
                    assert_eq!(e.row.len(), nx, "constraint width mismatch");
                    if row_zero(&e.row) {
                        if e.konst.abs() > 1e-10 {
                            return Err(SdpError::IllPosed(format!(
                                "equality {} fixes a constant {:.3e} to zero",
                                con.label, e.konst
                            )));
                        }
                        duals.push(DualSlot {
                            label: con.label.clone(),
                            shape: DualShape::Scalar { row: None },
                        });
                        continue;
                    }
                    duals.push(DualSlot {
                        label: con.label.clone(),
                        shape: DualShape::Scalar {
                            row: Some(eq_rows.len()),
                        },
                    });
                    eq_rows.push(e.row.clone());
                    eq_b.push(-e.konst);
                }
                _ => {}
            }
        }
        let m_zero = eq_rows.len();

        // Nonnegative rows: s = a'x + k >= 0, so A row = -a, b = k.
        let mut nn_rows: Vec<DVector<f64>> = Vec::new();
        let mut nn_b: Vec<f64> = Vec::new();
        for con in &self.cons {
            if let ConKind::Nonneg(e) = &con.kind {
                assert_eq!(e.row.len(), nx, "constraint width mismatch");
                if row_zero(&e.row) {
                    if e.konst < -1e-10 {
                        return Err(SdpError::IllPosed(format!(
                            "nonnegativity {} fixes a negative constant {:.3e}",
                            con.label, e.konst
                        )));
                    }
                    duals.push(DualSlot {
                        label: con.label.clone(),
                        shape: DualShape::Scalar { row: None },
                    });
                    continue;
                }
                duals.push(DualSlot {
                    label: con.label.clone(),
                    shape: DualShape::Scalar {
                        row: Some(m_zero + nn_rows.len()),
                    },
                });
                nn_rows.push(-&e.row);
                nn_b.push(e.konst);
            }
        }
        let m_nonneg = nn_rows.len();

        // Semidefinite blocks, embedded: s = Phi (coeffs x + konst) in PSD(2d).
        let mut psd_dims: Vec<usize> = Vec::new();
        let mut psd_a: Vec<DMatrix<f64>> = Vec::new();
        let mut psd_b: Vec<DVector<f64>> = Vec::new();
        let mut psd_row = m_zero + m_nonneg;
        for con in &self.cons {
            if let ConKind::Psd(e) = &con.kind {
                assert_eq!(e.coeffs.ncols(), nx, "constraint width mismatch");
                if e.coeffs.amax() <= ROW_TOL {
                    let k = unhvec(&e.konst, e.dim);
                    let min = eigvalsh(&k).first().copied().unwrap_or(0.0);
                    if min < -1e-10 {
                        return Err(SdpError::IllPosed(format!(
                            "semidefinite block {} is a constant with eigenvalue {:.3e}",
                            con.label, min
                        )));
                    }
                    continue;
                }
                let p = phi(e.dim);
                psd_dims.push(2 * e.dim);
                psd_a.push(-(&p * &e.coeffs));
                psd_b.push(&p * &e.konst);
                duals.push(DualSlot {
                    label: con.label.clone(),
                    shape: DualShape::Psd {
                        d: e.dim,
                        row0: psd_row,
                    },
                });
                psd_row += embed::svec_len(2 * e.dim);
            }
        }

        let m = psd_row;
        let mut a = DMatrix::zeros(m, nx);
        let mut b = DVector::zeros(m);
        for (i, row) in eq_rows.iter().enumerate() {
            a.row_mut(i).tr_copy_from(row);
            b[i] = eq_b[i];
        }
        for (i, row) in nn_rows.iter().enumerate() {
            a.row_mut(m_zero + i).tr_copy_from(row);
            b[m_zero + i] = nn_b[i];
        }
        let mut off = m_zero + m_nonneg;
        for (blk, bb) in psd_a.iter().zip(&psd_b) {
            a.view_mut((off, 0), (blk.nrows(), nx)).copy_from(blk);
            b.rows_mut(off, bb.len()).copy_from(bb);
            off += blk.nrows();
        }

        // A coordinate absent from every constraint but present in the
        // objective makes the problem trivially unbounded.
        for j in 0..nx {
            if c[j].abs() > ROW_TOL {
                let col_absent = a.column(j).amax() <= ROW_TOL;
                if col_absent {
                    let name = self
                        .vars
                        .iter()
                        .find(|v| j >= v.off && j < v.off + v.len)
                        .map(|v| v.name.clone())
                        .unwrap_or_default();
                    return Err(SdpError::IllPosed(format!(
                        "objective depends on unconstrained coordinate of {name}"
                    )));
                }
            }
        }

        Ok(ConicProblem {
            c,
            a,
            b,
            m_zero,
            m_nonneg,
            psd: psd_dims,
            sense_max: self.sense_max,
            obj_konst: obj.konst,
            vars: self.vars,
            duals,
        })
    }
}
