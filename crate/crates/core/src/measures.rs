//! Coherence monotones of channels: log-robustness in primal and dual form,
//! its dephasing and smoothed variants, and the probe-indexed monotone
//! family G.
//!
//! All values are in bits. The log-robustness of a channel N is the base-2
//! logarithm of the smallest t such that t E - N is completely positive for
//! some classical channel E; the optimizations below run over the scaled
//! classical Choi matrix omega = t J^E directly.

use thiserror::Error;

use crate::channel::{dmax_channels, ChannelChoi, ChannelError, DmaxResult};
use crate::operator::{CMatrix, OperatorError, ProductDims};
use crate::sdp::{
    InteriorPointSolver, MatExpr, ProblemBuilder, SdpError, SolveReport, SolveStatus, SolveTols,
};
use crate::superchannel::{free_subspace_basis, FreeSet, SuperchannelError};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("smoothing parameter {0} lies outside [0, 1)")]
    BadEpsilon(f64),
    #[error("solver did not reach an optimum: {0:?}")]
    SolverStalled(SolveStatus),
    #[error("missing witness block {0}")]
    MissingWitness(&'static str),
    #[error(transparent)]
    Solver(#[from] SdpError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Superchannel(#[from] SuperchannelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A certified measure value with the optimizers of both program forms.
#[derive(Debug, Clone)]
pub struct MeasureResult {
    /// The measure in bits.
    pub value: f64,
    /// Optimal scaled classical Choi matrix omega (diagonal).
    pub primal_witness: CMatrix,
    /// Optimal dual operator eta.
    pub dual_witness: CMatrix,
    /// Relative primal/dual agreement on the linear scale.
    pub gap: f64,
}

/// A probe channel together with the free set defining the monotone.
#[derive(Debug, Clone)]
pub struct MonotoneProbe {
    pub p: ChannelChoi,
    pub set: FreeSet,
}

fn expect_optimal(report: &SolveReport) -> Result<(), MeasureError> {
    if report.status != SolveStatus::Optimal {
        return Err(MeasureError::SolverStalled(report.status));
    }
    Ok(())
}

/// Log-robustness: distance to the classical channels in max-relative
/// entropy, as one primal and one independently solved dual program.
pub fn log_robustness(n: &ChannelChoi) -> Result<MeasureResult, MeasureError> {
    let sys = n.sys();
    let dims = sys.dims();
    let d_total = sys.total();
    let a0 = sys.d_in as f64;

    let mut pb = ProblemBuilder::minimize();
    let om = pb.diag("omega", d_total);
    pb.objective(pb.mat(om).tr().scale(1.0 / a0));
    pb.psd("dominates", pb.mat(om).sub(&pb.constant(n.choi())));
    let flat = pb
        .mat(om)
        .partial_trace(&dims, &[0])
        .sub(&MatExpr::from_scal(
            &pb.mat(om).tr(),
            &CMatrix::identity(sys.d_in).scale(1.0 / a0),
        ));
    pb.eq_zero("flat-input-marginal", flat);
    let primal = InteriorPointSolver.solve(&pb.build()?, &SolveTols::default())?;
    expect_optimal(&primal)?;

    let mut db = ProblemBuilder::maximize();
    let eta = db.herm("eta", d_total);
    let c = db.diag("c", sys.d_in);
    db.objective(db.mat(eta).inner(n.choi()));
    db.psd("eta-psd", db.mat(eta));
    db.eq_zero(
        "diagonal-pattern",
        db.mat(eta)
            .dephase()
            .sub(&db.mat(c).tensor_right(&CMatrix::identity(sys.d_out))),
    );
    db.eq_scalar("normalization", db.mat(c).tr().shift(-1.0));
    let dual = InteriorPointSolver.solve(&db.build()?, &SolveTols::default())?;
    expect_optimal(&dual)?;

    let p = primal.primal_value;
    let d = dual.primal_value;
    Ok(MeasureResult {
        value: p.max(f64::MIN_POSITIVE).log2().max(0.0),
        primal_witness: primal
            .primal_block("omega")
            .ok_or(MeasureError::MissingWitness("omega"))?
            .clone(),
        dual_witness: dual
            .primal_block("eta")
            .ok_or(MeasureError::MissingWitness("eta"))?
            .clone(),
        gap: (p - d).abs() / p.abs().max(1.0),
    })
}

/// Dephasing log-robustness: max-relative entropy from the channel to its
/// own classical part. Support violations surface as an infinite value with
/// a certificate, not an error.
pub fn dephasing_log_robustness(n: &ChannelChoi) -> Result<DmaxResult, MeasureError> {
    Ok(dmax_channels(n, &n.classical_part())?)
}

/// Smoothed log-robustness: the smallest log-robustness within diamond
/// distance eps, as one joint program over the channel ball.
pub fn smoothed_log_robustness(n: &ChannelChoi, eps: f64) -> Result<f64, MeasureError> {
    if !(0.0..1.0).contains(&eps) || eps.is_nan() {
        return Err(MeasureError::BadEpsilon(eps));
    }
    if eps <= 1e-12 {
        return Ok(log_robustness(n)?.value);
    }
    let sys = n.sys();
    let dims = sys.dims();
    let d_total = sys.total();
    let a0 = sys.d_in as f64;
    let eye_in = CMatrix::identity(sys.d_in);

    let mut pb = ProblemBuilder::minimize();
    let om = pb.diag("omega", d_total);
    let jp = pb.herm("shifted-choi", d_total);
    let z = pb.herm("ball-slack", d_total);
    pb.objective(pb.mat(om).tr().scale(1.0 / a0));
    pb.psd("dominates", pb.mat(om).sub(&pb.mat(jp)));
    pb.psd("shifted-cp", pb.mat(jp));
    pb.eq_zero(
        "shifted-tp",
        pb.mat(jp).partial_trace(&dims, &[0]).sub(&pb.constant(&eye_in)),
    );
    let flat = pb
        .mat(om)
        .partial_trace(&dims, &[0])
        .sub(&MatExpr::from_scal(
            &pb.mat(om).tr(),
            &eye_in.scale(1.0 / a0),
        ));
    pb.eq_zero("flat-input-marginal", flat);
    pb.psd("slack-psd", pb.mat(z));
    pb.psd(
        "slack-dominates-shift",
        pb.mat(z).sub(&pb.mat(jp).sub(&pb.constant(n.choi()))),
    );
    pb.psd(
        "ball-radius",
        pb.constant(&eye_in.scale(eps))
            .sub(&pb.mat(z).partial_trace(&dims, &[0])),
    );
    let report = InteriorPointSolver.solve(&pb.build()?, &SolveTols::default())?;
    expect_optimal(&report)?;
    Ok(report.primal_value.max(f64::MIN_POSITIVE).log2().max(0.0))
}

/// Best classical correlation with the probe: for each input letter pick the
/// output letter with the largest diagonal Choi weight.
fn best_classical_overlap(p: &ChannelChoi) -> f64 {
    let (b0, b1) = (p.sys().d_in, p.sys().d_out);
    (0..b0)
        .map(|i| {
            (0..b1)
                .map(|j| p.choi().entry(i * b1 + j, i * b1 + j).re)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum()
}

/// The probe-indexed monotone G: the best probe correlation reachable from N
/// through free superchannels, minus the best reachable from any classical
/// channel.
pub fn monotone_g(probe: &MonotoneProbe, n: &ChannelChoi) -> Result<f64, MeasureError> {
    let a = n.sys();
    let b = probe.p.sys();
    let four = ProductDims::new(&[a.d_in, a.d_out, b.d_in, b.d_out])?;
    let three = ProductDims::new(&[a.d_in, b.d_in, a.d_out])?;
    let target = n.choi().transpose().tensor(probe.p.choi());

    let mut pb = ProblemBuilder::maximize();
    let theta = pb.herm("theta", a.total() * b.total());
    pb.objective(pb.mat(theta).inner(&target));
    pb.psd("theta-psd", pb.mat(theta));
    pb.eq_zero(
        "output-marginal",
        pb.mat(theta)
            .partial_trace(&four, &[1, 2])
            .sub(&pb.constant(&CMatrix::identity(a.d_out * b.d_in))),
    );
    let factorized = pb
        .mat(theta)
        .partial_trace(&four, &[0, 1, 2])
        .sub(
            &pb.mat(theta)
                .partial_trace(&four, &[0, 2])
                .tensor_right(&CMatrix::identity(a.d_out).scale(1.0 / a.d_out as f64))
                .permute_factors(&three, &[0, 2, 1]),
        );
    pb.eq_zero("input-factorization", factorized);
    let basis = free_subspace_basis(probe.set, a, b);
    for (i, x) in basis.elements.iter().enumerate() {
        pb.eq_scalar(&format!("free-{i}"), pb.mat(theta).inner(x));
    }
    let report = InteriorPointSolver.solve(&pb.build()?, &SolveTols::default())?;
    expect_optimal(&report)?;
    Ok(report.primal_value - best_classical_overlap(&probe.p))
}
