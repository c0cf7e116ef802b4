//! Channels as Choi matrices: constructors, action, composition, the
//! classicality test, diamond distance, and channel max-relative entropy.
//!
//! A channel N from a d_in-dimensional input to a d_out-dimensional output is
//! stored as its Choi matrix J on the product space (input, output), built on
//! the unnormalized maximally entangled projector so that Tr J = d_in for
//! trace-preserving channels. The entry at row (i,k), column (j,l) is
//! <k| N(|i><j|) |l>.

use thiserror::Error;

use crate::operator::{
    eigvalsh, max_entangled, plus_state, CMatrix, Cx, OperatorError, ProductDims,
};
use crate::sdp::{
    InteriorPointSolver, MatExpr, ProblemBuilder, SdpError, SolveStatus, SolveTols,
};

/// Absolute tolerance for accepting externally supplied Choi matrices.
pub(crate) const VALIDATION_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel dimensions must be positive")]
    BadDims,
    #[error("mixing parameter {0} lies outside [0, 1]")]
    BadLambda(f64),
    #[error("matrix is not unitary: deviation {0:.3e}")]
    NotUnitary(f64),
    #[error("replacement target is not a density matrix: {0}")]
    BadTarget(String),
    #[error("Choi matrix is not Hermitian: deviation {0:.3e}")]
    NotHermitian(f64),
    #[error("Choi matrix is not completely positive: minimum eigenvalue {0:.3e}")]
    NotCompletelyPositive(f64),
    #[error("Choi matrix is not trace preserving: marginal deviation {0:.3e}")]
    NotTracePreserving(f64),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("solver did not reach an optimum: {0:?}")]
    SolverStalled(SolveStatus),
    #[error(transparent)]
    Solver(#[from] SdpError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Input and output dimensions of a dynamical system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDim {
    pub d_in: usize,
    pub d_out: usize,
}

impl SystemDim {
    pub fn new(d_in: usize, d_out: usize) -> Result<Self, ChannelError> {
        if d_in == 0 || d_out == 0 {
            return Err(ChannelError::BadDims);
        }
        Ok(Self { d_in, d_out })
    }

    pub fn square(d: usize) -> Result<Self, ChannelError> {
        Self::new(d, d)
    }

    /// Dimension of the Choi matrix.
    pub fn total(&self) -> usize {
        self.d_in * self.d_out
    }

    pub fn dims(&self) -> ProductDims {
        ProductDims::new(&[self.d_in, self.d_out]).expect("positive dims")
    }
}

/// Construction recipes accepted by [`make_channel`].
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    Identity { d: usize },
    Dephasing { d: usize },
    Depolarizing { lambda: f64, d: usize },
    PartialDephasing { lambda: f64, d: usize },
    Replacement { state: CMatrix, d_in: usize },
    ReplacePlus { d: usize },
    Unitary { u: CMatrix },
    Choi { d_in: usize, d_out: usize, mat: CMatrix },
}

/// A channel, stored as its Choi matrix.
#[derive(Debug, Clone)]
pub struct ChannelChoi {
    sys: SystemDim,
    j: CMatrix,
    cp_only: bool,
}

fn check_lambda(lambda: f64) -> Result<(), ChannelError> {
    if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
        return Err(ChannelError::BadLambda(lambda));
    }
    Ok(())
}

impl ChannelChoi {
    /// Validate a Choi matrix as a CPTP channel.
    pub fn new(sys: SystemDim, j: CMatrix) -> Result<Self, ChannelError> {
        Self::validated(sys, j, false)
    }

    /// Validate as completely positive only; trace preservation is not asserted.
    pub fn new_cp_only(sys: SystemDim, j: CMatrix) -> Result<Self, ChannelError> {
        Self::validated(sys, j, true)
    }

    fn validated(sys: SystemDim, j: CMatrix, cp_only: bool) -> Result<Self, ChannelError> {
        if j.rows() != sys.total() || j.cols() != sys.total() {
            return Err(ChannelError::DimensionMismatch {
                context: "Choi matrix",
                expected: sys.total(),
                got: j.rows(),
            });
        }
        let dev = j.hermitian_deviation();
        if dev > VALIDATION_TOL * (1.0 + j.frobenius()) {
            return Err(ChannelError::NotHermitian(dev));
        }
        let sym = j.add(&j.dagger()).scale(0.5);
        let min_eig = eigvalsh(&sym).first().copied().unwrap_or(0.0);
        if min_eig < -VALIDATION_TOL * (1.0 + sym.frobenius()) {
            return Err(ChannelError::NotCompletelyPositive(min_eig));
        }
        if !cp_only {
            let marg = sym.partial_trace(&sys.dims(), &[0])?;
            let dev = marg.sub(&CMatrix::identity(sys.d_in)).frobenius();
            if dev > VALIDATION_TOL * (1.0 + sym.frobenius()) {
                return Err(ChannelError::NotTracePreserving(dev));
            }
        }
        Ok(Self {
            sys,
            j: sym,
            cp_only,
        })
    }

    pub fn identity(d: usize) -> Result<Self, ChannelError> {
        Self::new(SystemDim::square(d)?, max_entangled(d))
    }

    /// The completely dephasing channel in the fixed incoherent basis.
    pub fn dephasing(d: usize) -> Result<Self, ChannelError> {
        Self::new(SystemDim::square(d)?, max_entangled(d).dephase())
    }

    /// lambda * channel + (1 - lambda) * replacement by the uniform state.
    pub fn depolarizing(lambda: f64, d: usize) -> Result<Self, ChannelError> {
        check_lambda(lambda)?;
        let sys = SystemDim::square(d)?;
        let j = max_entangled(d)
            .scale(lambda)
            .add(&CMatrix::identity(d * d).scale((1.0 - lambda) / d as f64));
        Self::new(sys, j)
    }

    /// lambda * channel + (1 - lambda) * complete dephasing.
    pub fn partial_dephasing(lambda: f64, d: usize) -> Result<Self, ChannelError> {
        check_lambda(lambda)?;
        let sys = SystemDim::square(d)?;
        let phi = max_entangled(d);
        let j = phi.scale(lambda).add(&phi.dephase().scale(1.0 - lambda));
        Self::new(sys, j)
    }

    /// The channel that discards its input and outputs `state`.
    pub fn replacement(state: &CMatrix, d_in: usize) -> Result<Self, ChannelError> {
        if !state.is_square() {
            return Err(ChannelError::BadTarget("not square".into()));
        }
        let dev = state.hermitian_deviation();
        if dev > VALIDATION_TOL * (1.0 + state.frobenius()) {
            return Err(ChannelError::BadTarget(format!(
                "Hermitian deviation {dev:.3e}"
            )));
        }
        let sym = state.add(&state.dagger()).scale(0.5);
        if (sym.trace().re - 1.0).abs() > VALIDATION_TOL * (1.0 + sym.frobenius()) {
            return Err(ChannelError::BadTarget(format!(
                "trace {:.6} is not 1",
                sym.trace().re
            )));
        }
        let min_eig = eigvalsh(&sym).first().copied().unwrap_or(0.0);
        if min_eig < -VALIDATION_TOL * (1.0 + sym.frobenius()) {
            return Err(ChannelError::BadTarget(format!(
                "minimum eigenvalue {min_eig:.3e}"
            )));
        }
        let sys = SystemDim::new(d_in, sym.rows())?;
        Self::new(sys, CMatrix::identity(d_in).tensor(&sym))
    }

    /// Replacement by the maximally coherent plus state.
    pub fn replace_plus(d: usize) -> Result<Self, ChannelError> {
        Self::replacement(&plus_state(d), d)
    }

    pub fn unitary(u: &CMatrix) -> Result<Self, ChannelError> {
        if !u.is_square() {
            return Err(ChannelError::NotUnitary(f64::INFINITY));
        }
        let d = u.rows();
        let dev = u
            .dagger()
            .matmul(u)
            .sub(&CMatrix::identity(d))
            .frobenius();
        if dev > VALIDATION_TOL * (d as f64) {
            return Err(ChannelError::NotUnitary(dev));
        }
        let iu = CMatrix::identity(d).tensor(u);
        let j = iu.matmul(&max_entangled(d)).matmul(&iu.dagger());
        Self::new(SystemDim::square(d)?, j)
    }

    pub fn sys(&self) -> SystemDim {
        self.sys
    }

    pub fn choi(&self) -> &CMatrix {
        &self.j
    }

    pub fn is_cp_only(&self) -> bool {
        self.cp_only
    }

    /// N(rho) = Tr_in[J (rho^T (x) I_out)].
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix, ChannelError> {
        if rho.rows() != self.sys.d_in || rho.cols() != self.sys.d_in {
            return Err(ChannelError::DimensionMismatch {
                context: "apply_channel input",
                expected: self.sys.d_in,
                got: rho.rows(),
            });
        }
        let lifted = rho.transpose().tensor(&CMatrix::identity(self.sys.d_out));
        let out = self.j.matmul(&lifted).partial_trace(&self.sys.dims(), &[1])?;
        Ok(out)
    }

    /// Choi of second . first.
    pub fn compose(second: &Self, first: &Self) -> Result<Self, ChannelError> {
        if first.sys.d_out != second.sys.d_in {
            return Err(ChannelError::DimensionMismatch {
                context: "compose_channels",
                expected: first.sys.d_out,
                got: second.sys.d_in,
            });
        }
        let (da, dc) = (first.sys.d_in, second.sys.d_out);
        let sys = SystemDim::new(da, dc)?;
        let j = choi_compose(&first.j, da, first.sys.d_out, &second.j, dc);
        if first.cp_only || second.cp_only {
            Self::new_cp_only(sys, j)
        } else {
            Self::new(sys, j)
        }
    }

    /// Choi of a (x) b on the joint system, inputs then outputs ordered
    /// (a, b) on each side.
    pub fn tensor(a: &Self, b: &Self) -> Result<Self, ChannelError> {
        let sys = SystemDim::new(a.sys.d_in * b.sys.d_in, a.sys.d_out * b.sys.d_out)?;
        let four = ProductDims::new(&[a.sys.d_in, a.sys.d_out, b.sys.d_in, b.sys.d_out])?;
        // (a_in, a_out, b_in, b_out) -> (a_in, b_in, a_out, b_out)
        let j = a.j.tensor(&b.j).permute_factors(&four, &[0, 2, 1, 3])?;
        if a.cp_only || b.cp_only {
            Self::new_cp_only(sys, j)
        } else {
            Self::new(sys, j)
        }
    }

    /// The classical part of the channel: dephase, apply, dephase again. Its
    /// Choi matrix is the diagonal part of this channel's Choi matrix.
    pub fn classical_part(&self) -> Self {
        Self {
            sys: self.sys,
            j: self.j.dephase(),
            cp_only: self.cp_only,
        }
    }

    /// A channel is classical when dephasing the input and output changes
    /// nothing, i.e. its Choi matrix is diagonal.
    pub fn is_classical(&self, tol: f64) -> bool {
        self.j.sub(&self.j.dephase()).frobenius() <= tol
    }
}

/// The preparation channel with trivial input that outputs the maximally
/// coherent plus state on d letters.
pub fn plus_state_preparation(d: usize) -> Result<ChannelChoi, ChannelError> {
    ChannelChoi::replacement(&plus_state(d), 1)
}

/// Choi matrix of second . first from raw Choi matrices: first maps
/// da -> db, second maps db -> dc. No channel validation is performed, so
/// this also serves linear maps that are not channels.
pub(crate) fn choi_compose(
    first: &CMatrix,
    da: usize,
    db: usize,
    second: &CMatrix,
    dc: usize,
) -> CMatrix {
    let mut j = CMatrix::zeros(da * dc, da * dc);
    for a in 0..da {
        for ap in 0..da {
            for c in 0..dc {
                for cp in 0..dc {
                    let mut acc = Cx::new(0.0, 0.0);
                    for b in 0..db {
                        for bp in 0..db {
                            acc += first.entry(a * db + b, ap * db + bp)
                                * second.entry(b * dc + c, bp * dc + cp);
                        }
                    }
                    j.set(a * dc + c, ap * dc + cp, acc);
                }
            }
        }
    }
    j
}

/// Build a channel from a construction recipe.
pub fn make_channel(spec: &ChannelSpec) -> Result<ChannelChoi, ChannelError> {
    match spec {
        ChannelSpec::Identity { d } => ChannelChoi::identity(*d),
        ChannelSpec::Dephasing { d } => ChannelChoi::dephasing(*d),
        ChannelSpec::Depolarizing { lambda, d } => ChannelChoi::depolarizing(*lambda, *d),
        ChannelSpec::PartialDephasing { lambda, d } => {
            ChannelChoi::partial_dephasing(*lambda, *d)
        }
        ChannelSpec::Replacement { state, d_in } => ChannelChoi::replacement(state, *d_in),
        ChannelSpec::ReplacePlus { d } => ChannelChoi::replace_plus(*d),
        ChannelSpec::Unitary { u } => ChannelChoi::unitary(u),
        ChannelSpec::Choi { d_in, d_out, mat } => {
            ChannelChoi::new(SystemDim::new(*d_in, *d_out)?, mat.clone())
        }
    }
}

/// Result of a channel max-relative entropy computation.
#[derive(Debug, Clone)]
pub struct DmaxResult {
    /// log2 of the smallest dominating scale; +infinity on support violation.
    pub value: f64,
    /// The scale itself, 2^value.
    pub scale: f64,
    /// Certified primal-dual agreement of the underlying optimization, NaN
    /// when the problem is infeasible.
    pub gap: f64,
    /// On +infinity: a separating witness Z >= 0 with Tr[Z J^E] = 0 and
    /// Tr[Z J^N] > 0.
    pub certificate: Option<CMatrix>,
}

fn check_same_sys(a: &ChannelChoi, b: &ChannelChoi, context: &'static str) -> Result<(), ChannelError> {
    if a.sys() != b.sys() {
        return Err(ChannelError::DimensionMismatch {
            context,
            expected: a.sys().total(),
            got: b.sys().total(),
        });
    }
    Ok(())
}

/// Max-relative entropy between channels: log2 of the smallest t with
/// t J^E - J^N >= 0, or +infinity when the support of J^N escapes that of J^E.
pub fn dmax_channels(n: &ChannelChoi, e: &ChannelChoi) -> Result<DmaxResult, ChannelError> {
    check_same_sys(n, e, "dmax_channels")?;
    let mut pb = ProblemBuilder::minimize();
    let t = pb.scalar("t");
    pb.objective(pb.scal(t));
    pb.psd(
        "dominating",
        MatExpr::from_scal(&pb.scal(t), e.choi()).sub(&pb.constant(n.choi())),
    );
    let report = InteriorPointSolver.solve(&pb.build()?, &SolveTols::default())?;
    match report.status {
        // The interior-point value can sit on a residual plateau when the
        // ratio of the two channels is large, so refine the scalar by
        // bisection on the smallest eigenvalue of t E - N. That also
        // rescues an uncertified stall as long as its value is finite.
        SolveStatus::Optimal | SolveStatus::MaxIter if report.primal_value.is_finite() => {
            let scale = polish_dominating_scale(n.choi(), e.choi(), report.primal_value)
                .ok_or(ChannelError::SolverStalled(report.status))?;
            Ok(DmaxResult {
                value: scale.max(f64::MIN_POSITIVE).log2(),
                scale,
                gap: report.gap,
                certificate: None,
            })
        }
        SolveStatus::PrimalInfeasible => Ok(DmaxResult {
            value: f64::INFINITY,
            scale: f64::INFINITY,
            gap: f64::NAN,
            certificate: report.dual_block("dominating").cloned(),
        }),
        other => Err(ChannelError::SolverStalled(other)),
    }
}

/// Smallest t with t E - N >= 0, refined from an estimate by geometric
/// bracketing and bisection on the minimum eigenvalue. Returns None when no
/// dominating scale is found within a generous expansion range, which means
/// the estimate came from a solve that was drifting toward infeasibility.
fn polish_dominating_scale(n: &CMatrix, e: &CMatrix, estimate: f64) -> Option<f64> {
    let slack_floor = -1e-12 * (1.0 + n.trace().re.abs());
    let min_eig = |t: f64| {
        let m = e.scale(t).sub(n);
        eigvalsh(&m).first().copied().unwrap_or(f64::NEG_INFINITY)
    };
    let feasible = |t: f64| min_eig(t) >= slack_floor;

    let mut hi = estimate.max(1e-9);
    let mut guard = 0;
    while !feasible(hi) {
        hi *= 1.5;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut lo = hi;
    while feasible(lo) && lo > 1e-12 {
        lo *= 0.75;
    }
    for _ in 0..80 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Half the diamond-norm distance between two channels on one system.
pub fn diamond_distance(n: &ChannelChoi, m: &ChannelChoi) -> Result<f64, ChannelError> {
    check_same_sys(n, m, "diamond_distance")?;
    // Canonical operand order makes the metric exactly symmetric.
    let swap = {
        let (a, b) = (n.choi(), m.choi());
        let mut swap = false;
        'outer: for i in 0..a.rows() {
            for j in 0..a.cols() {
                let (x, y) = (a.entry(i, j), b.entry(i, j));
                for (u, v) in [(x.re, y.re), (x.im, y.im)] {
                    if u < v {
                        break 'outer;
                    }
                    if u > v {
                        swap = true;
                        break 'outer;
                    }
                }
            }
        }
        swap
    };
    let (first, second) = if swap { (m, n) } else { (n, m) };
    let diff = first.choi().sub(second.choi());
    let dims = first.sys().dims();

    let mut pb = ProblemBuilder::minimize();
    let lam = pb.scalar("lambda");
    let om = pb.herm("omega", first.sys().total());
    pb.objective(pb.scal(lam));
    pb.psd("omega-psd", pb.mat(om));
    pb.psd("dominates-difference", pb.mat(om).sub(&pb.constant(&diff)));
    pb.psd(
        "input-marginal-cap",
        MatExpr::from_scal(&pb.scal(lam), &CMatrix::identity(first.sys().d_in))
            .sub(&pb.mat(om).partial_trace(&dims, &[0])),
    );
    let report = InteriorPointSolver.solve(&pb.build()?, &SolveTols::default())?;
    if report.status != SolveStatus::Optimal {
        return Err(ChannelError::SolverStalled(report.status));
    }
    Ok(report.primal_value.max(0.0))
}
