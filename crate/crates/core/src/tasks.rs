//! Operational tasks: conversion distance between channels under a free set,
//! exact one-shot coherence cost with the realizing superchannel, one-shot
//! coherence distillation, and the incoherent twirl used to reduce
//! distillation instances to a three-parameter family.

use thiserror::Error;

use crate::channel::{ChannelChoi, ChannelError, SystemDim};
use crate::measures::{dephasing_log_robustness, log_robustness, MeasureError};
use crate::operator::{
    eigvalsh, plus_state, CMatrix, Cx, OperatorError, ProductDims,
};
use crate::sdp::{
    InteriorPointSolver, MatExpr, ProblemBuilder, SdpError, SolveReport, SolveStatus, SolveTols,
};
use crate::superchannel::{free_subspace_basis, FreeSet, SuperchannelChoi, SuperchannelError};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("smoothing parameter {0} lies outside [0, 1)")]
    BadEpsilon(f64),
    #[error("solver did not reach an optimum: {0:?}")]
    SolverStalled(SolveStatus),
    #[error("distillation feasibility solve failed at n = {n}: {status:?}")]
    DistillSolve { n: usize, status: SolveStatus },
    #[error("no feasible cost multiple found near {0}")]
    CostSearchFailed(f64),
    #[error("missing witness block {0}")]
    MissingWitness(&'static str),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Superchannel(#[from] SuperchannelError),
    #[error(transparent)]
    Solver(#[from] SdpError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Dual optimizers of the conversion program.
#[derive(Debug, Clone)]
pub struct ConversionDual {
    pub beta: CMatrix,
    pub gamma: CMatrix,
    pub tau: CMatrix,
    pub zeta: CMatrix,
    pub t: Vec<f64>,
}

/// Certified conversion distance with the optimal free superchannel.
#[derive(Debug, Clone)]
pub struct ConversionResult {
    /// Half diamond-norm distance between the converted channel and the
    /// target, minimized over the free set.
    pub value: f64,
    /// The optimal free superchannel.
    pub theta: SuperchannelChoi,
    /// Diamond-norm slack block of the primal optimum.
    pub omega: CMatrix,
    pub dual_value: f64,
    pub dual: ConversionDual,
}

impl ConversionResult {
    pub fn gap(&self) -> f64 {
        (self.value - self.dual_value).abs() / self.value.abs().max(1.0)
    }
}

fn expect_optimal(report: &SolveReport) -> Result<(), TaskError> {
    if report.status != SolveStatus::Optimal {
        return Err(TaskError::SolverStalled(report.status));
    }
    Ok(())
}

fn take_block(report: &SolveReport, name: &'static str) -> Result<CMatrix, TaskError> {
    report
        .primal_block(name)
        .cloned()
        .ok_or(TaskError::MissingWitness(name))
}

/// Conversion distance: how close to the target M a free superchannel can
/// bring N, in half diamond norm. Primal and dual are solved independently.
pub fn conversion_distance(
    n: &ChannelChoi,
    m: &ChannelChoi,
    set: FreeSet,
) -> Result<ConversionResult, TaskError> {
    let a = n.sys();
    let b = m.sys();
    let (a0, a1, b0, b1) = (a.d_in, a.d_out, b.d_in, b.d_out);
    let na = a.total();
    let nb = b.total();
    let four = ProductDims::new(&[a0, a1, b0, b1])?;
    let three = ProductDims::new(&[a0, b0, a1])?;
    let basis = free_subspace_basis(set, a, b);
    let lift = n
        .choi()
        .transpose()
        .tensor(&CMatrix::identity(nb));

    let mut pb = ProblemBuilder::minimize();
    let lam = pb.scalar("lambda");
    let om = pb.herm("omega", nb);
    let alpha = pb.herm("theta", na * nb);
    pb.objective(pb.scal(lam));
    pb.psd("omega-psd", pb.mat(om));
    pb.psd(
        "radius",
        MatExpr::from_scal(&pb.scal(lam), &CMatrix::identity(b0))
            .sub(&pb.mat(om).partial_trace(&b.dims(), &[0])),
    );
    let applied = pb.mat(alpha).map(nb, |x| {
        x.matmul(&lift)
            .partial_trace(&four, &[2, 3])
            .expect("partial trace")
    });
    pb.psd(
        "slack-dominates",
        pb.mat(om).sub(&applied).add(&pb.constant(m.choi())),
    );
    pb.psd("theta-psd", pb.mat(alpha));
    pb.eq_zero(
        "output-marginal",
        pb.mat(alpha)
            .partial_trace(&four, &[1, 2])
            .sub(&pb.constant(&CMatrix::identity(a1 * b0))),
    );
    let factorized = pb
        .mat(alpha)
        .partial_trace(&four, &[0, 1, 2])
        .sub(
            &pb.mat(alpha)
                .partial_trace(&four, &[0, 2])
                .tensor_right(&CMatrix::identity(a1).scale(1.0 / a1 as f64))
                .permute_factors(&three, &[0, 2, 1]),
        );
    pb.eq_zero("input-factorization", factorized);
    for (i, x) in basis.elements.iter().enumerate() {
        pb.eq_scalar(&format!("free-{i}"), pb.mat(alpha).inner(x));
    }
    // Zero-distance instances sit on a flat optimal face and converge slowly.
    let tols = SolveTols {
        max_iter: 500,
        ..SolveTols::default()
    };
    let primal = InteriorPointSolver.solve(&pb.build()?, &tols)?;
    expect_optimal(&primal)?;

    let theta = SuperchannelChoi::new_with_tol(a, b, take_block(&primal, "theta")?, 1e-6)?;

    // Dual: a channel-positivity certificate built from a subnormalized
    // measurement on B0 and a bounded block gamma.
    let mut db = ProblemBuilder::maximize();
    let beta = db.herm("beta", b0);
    let gamma = db.herm("gamma", nb);
    let tau = db.herm("tau", a0 * a1 * b0);
    let zeta = db.herm("zeta", a1 * b0);
    let t = db.diag("t", basis.elements.len().max(1));
    db.objective(
        db.mat(gamma)
            .inner(m.choi())
            .scale(-1.0)
            .add(&db.mat(zeta).tr()),
    );
    db.psd("beta-psd", db.mat(beta));
    db.nonneg("beta-subnormalized", db.mat(beta).tr().scale(-1.0).shift(1.0));
    db.psd("gamma-psd", db.mat(gamma));
    db.psd(
        "gamma-bounded",
        db.mat(beta)
            .tensor_right(&CMatrix::identity(b1))
            .sub(&db.mat(gamma)),
    );
    let three_t = ProductDims::new(&[a0, a1, b0])?;
    let tau_centered = db.mat(tau).sub(
        &db.mat(tau)
            .partial_trace(&three_t, &[0, 2])
            .tensor_right(&CMatrix::identity(a1).scale(1.0 / a1 as f64))
            .permute_factors(&ProductDims::new(&[a0, b0, a1])?, &[0, 2, 1]),
    );
    let mut big = db
        .mat(gamma)
        .tensor_left(&n.choi().transpose())
        .sub(&tau_centered.tensor_right(&CMatrix::identity(b1)))
        .sub(
            &db.mat(zeta)
                .tensor_left(&CMatrix::identity(a0))
                .tensor_right(&CMatrix::identity(b1)),
        );
    for (i, x) in basis.elements.iter().enumerate() {
        big = big.sub(&MatExpr::from_scal(&db.elem(t, i), x));
    }
    db.psd("certificate", big);
    let dual = InteriorPointSolver.solve(&db.build()?, &tols)?;
    expect_optimal(&dual)?;

    let t_block = take_block(&dual, "t")?;
    let t_vals = (0..basis.elements.len())
        .map(|i| t_block.entry(i, i).re)
        .collect();
    Ok(ConversionResult {
        value: primal.primal_value.max(0.0),
        theta,
        omega: take_block(&primal, "omega")?,
        dual_value: dual.primal_value,
        dual: ConversionDual {
            beta: take_block(&dual, "beta")?,
            gamma: take_block(&dual, "gamma")?,
            tau: take_block(&dual, "tau")?,
            zeta: take_block(&dual, "zeta")?,
            t: t_vals,
        },
    })
}

/// Exact one-shot cost certificate: the integer m, its logarithm, and the
/// realizing superchannel from plus-state preparations.
#[derive(Debug, Clone)]
pub struct CostResult {
    /// The log-robustness (or its dephasing variant) that the cost rounds.
    pub lr: f64,
    /// Smallest integer scale admitting a dominating classical channel.
    pub m: usize,
    /// log2 m.
    pub cost_bits: f64,
    /// Superchannel carrying the m-letter plus-state preparation to N.
    pub omega: SuperchannelChoi,
}

/// Exact one-shot coherence cost. The classical dominating channel comes
/// from the log-robustness witness (maximally incoherent set) or from the
/// channel's own classical part (dephasing-incoherent set).
pub fn exact_one_shot_cost(n: &ChannelChoi, set: FreeSet) -> Result<CostResult, TaskError> {
    let sys = n.sys();
    let (lr, e) = match set {
        FreeSet::Misc => {
            let r = log_robustness(n)?;
            let scale = r.primal_witness.trace().re / sys.d_in as f64;
            let e = ChannelChoi::new(sys, r.primal_witness.scale(1.0 / scale))?;
            (r.value, e)
        }
        FreeSet::Disc => {
            let r = dephasing_log_robustness(n)?;
            if !r.value.is_finite() {
                return Err(TaskError::CostSearchFailed(f64::INFINITY));
            }
            (r.value.max(0.0), n.classical_part())
        }
    };

    let prep_scale = 2.0_f64.powf(lr);
    let mut m = (prep_scale - 1e-6).ceil().max(1.0) as usize;
    let feasible_at = |k: usize| -> f64 {
        let diff = e.choi().scale(k as f64).sub(n.choi());
        eigvalsh(&diff).first().copied().unwrap_or(0.0)
    };
    while m > 1 && feasible_at(m - 1) >= -1e-10 {
        m -= 1;
    }
    let mut bumps = 0;
    while feasible_at(m) < -1e-8 {
        m += 1;
        bumps += 1;
        if bumps > 2 {
            return Err(TaskError::CostSearchFailed(prep_scale));
        }
    }

    let omega = if m == 1 {
        SuperchannelChoi::constant(SystemDim::new(1, 1)?, n)?
    } else {
        let x = e
            .choi()
            .scale(m as f64)
            .sub(n.choi())
            .scale(1.0 / (m as f64 - 1.0));
        let j = plus_state(m)
            .tensor(&n.choi().sub(&x))
            .add(&CMatrix::identity(m).tensor(&x));
        SuperchannelChoi::new_with_tol(SystemDim::new(1, m)?, sys, j, 1e-6)?
    };

    Ok(CostResult {
        lr,
        m,
        cost_bits: (m as f64).log2(),
        omega,
    })
}

/// Largest one-shot distillation size with its feasibility witness.
#[derive(Debug, Clone)]
pub struct DistillResult {
    /// Largest feasible plus-state dimension.
    pub n: usize,
    /// log2 n.
    pub bits: f64,
    /// Optimal input state on A0.
    pub rho: CMatrix,
    /// Off-diagonal witness block with zero diagonal.
    pub gamma: CMatrix,
    /// Best fidelity shift reached at the accepted n.
    pub fidelity_margin: f64,
}

/// One feasibility check of the distillation program at size n: maximize the
/// fidelity functional and compare against the threshold.
fn distill_attempt(
    chan: &ChannelChoi,
    eps: f64,
    set: FreeSet,
    n: usize,
) -> Result<(bool, f64, CMatrix, CMatrix), TaskError> {
    let sys = chan.sys();
    let (a0, a1) = (sys.d_in, sys.d_out);
    let total = sys.total();
    let nf = n as f64;

    let mut pb = ProblemBuilder::maximize();
    let gamma = pb.herm("gamma", total);
    let rho = match set {
        FreeSet::Misc => pb.herm("rho", a0),
        FreeSet::Disc => pb.diag("rho", a0),
    };
    pb.objective(pb.mat(gamma).inner(&chan.choi().transpose()));
    pb.eq_zero("zero-diagonal", pb.mat(gamma).dephase());

    match set {
        FreeSet::Misc => {
            pb.psd("rho-psd", pb.mat(rho));
            pb.eq_scalar("rho-trace", pb.mat(rho).tr().shift(-1.0));
            pb.psd(
                "upper",
                pb.mat(rho)
                    .sub(&pb.mat(rho).dephase().scale(1.0 / nf))
                    .tensor_right(&CMatrix::identity(a1))
                    .sub(&pb.mat(gamma)),
            );
            pb.psd(
                "lower",
                pb.mat(gamma).add(
                    &pb.mat(rho)
                        .dephase()
                        .scale(1.0 / nf)
                        .tensor_right(&CMatrix::identity(a1)),
                ),
            );
        }
        FreeSet::Disc => {
            for i in 0..a0 {
                pb.nonneg(&format!("rho-{i}"), pb.elem(rho, i));
            }
            pb.eq_scalar("rho-trace", pb.mat(rho).tr().shift(-1.0));
            pb.psd(
                "upper",
                pb.mat(rho)
                    .scale((nf - 1.0) / nf)
                    .tensor_right(&CMatrix::identity(a1))
                    .sub(&pb.mat(gamma)),
            );
            pb.psd(
                "lower",
                pb.mat(gamma)
                    .add(&pb.mat(rho).scale(1.0 / nf).tensor_right(&CMatrix::identity(a1))),
            );
        }
    }

    let tols = SolveTols {
        feas: 1e-9,
        gap: 1e-9,
        ..SolveTols::default()
    };
    let report = InteriorPointSolver.solve(&pb.build()?, &tols)?;
    if report.status != SolveStatus::Optimal {
        return Err(TaskError::DistillSolve {
            n,
            status: report.status,
        });
    }
    let bound = 1.0 - 1.0 / nf - eps;
    let margin = report.primal_value - bound;
    let rho_m = take_block(&report, "rho")?;
    Ok((margin >= -1e-7, margin, rho_m, take_block(&report, "gamma")?))
}

/// One-shot distillable coherence: scan n upward, return the largest size
/// whose feasibility program accepts, and verify the failure is stable one
/// step further.
pub fn one_shot_distill(
    chan: &ChannelChoi,
    eps: f64,
    set: FreeSet,
) -> Result<DistillResult, TaskError> {
    if !(0.0..1.0).contains(&eps) || eps.is_nan() {
        return Err(TaskError::BadEpsilon(eps));
    }
    let cap = ((chan.sys().total() as f64) / (1.0 - eps)).ceil() as usize + 1;
    let mut best: Option<DistillResult> = None;
    let mut n = 1;
    loop {
        let (ok, margin, rho, gamma) = distill_attempt(chan, eps, set, n)?;
        if ok {
            best = Some(DistillResult {
                n,
                bits: (n as f64).log2(),
                rho,
                gamma,
                fidelity_margin: margin,
            });
        } else {
            // Feasibility is expected to be monotone; check the next size to
            // catch a spurious boundary failure.
            let (again, _, _, _) = distill_attempt(chan, eps, set, n + 1)?;
            assert!(!again, "distillation feasibility not monotone at n = {n}");
            break;
        }
        if n >= cap {
            break;
        }
        n += 1;
    }
    Ok(best.expect("n = 1 is always feasible"))
}

/// Closed-form one-shot distillation size for the lambda-mixed families
/// (depolarizing and partial dephasing agree), any dimension d.
pub fn distill_closed_form(lambda: f64, d: usize, eps: f64) -> usize {
    let df = d as f64;
    let x = if eps < (df - 1.0) * (1.0 - lambda) / df {
        (1.0 - lambda) / (1.0 - lambda - eps)
    } else {
        (1.0 - lambda + lambda * df) / (1.0 - eps)
    };
    (x + 1e-9).floor() as usize
}

/// The three-parameter reduction of an operator on a doubled system under
/// the incoherent-twirling average.
#[derive(Debug, Clone, Copy)]
pub struct TwirlDecomposition {
    /// Common value of the off-pair diagonal entries.
    pub p: f64,
    /// Common value of the paired diagonal entries.
    pub q: f64,
    /// Common value of the pair-to-pair coherences.
    pub r: f64,
    pub d: usize,
}

impl TwirlDecomposition {
    /// The twirled operator itself.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.d;
        CMatrix::from_fn(d * d, d * d, |row, col| {
            let (ri, rk) = (row / d, row % d);
            let (ci, ck) = (col / d, col % d);
            if row == col {
                Cx::new(if ri == rk { self.q } else { self.p }, 0.0)
            } else if ri == rk && ci == ck {
                Cx::new(self.r, 0.0)
            } else {
                Cx::new(0.0, 0.0)
            }
        })
    }

    /// The distinct eigenvalues (p, q - r, q - r + r d).
    pub fn eigenvalues(&self) -> (f64, f64, f64) {
        (
            self.p,
            self.q - self.r,
            self.q - self.r + self.r * self.d as f64,
        )
    }
}

/// Project an operator on a doubled system onto the twirl-invariant family
/// by averaging its three entry classes.
pub fn incoherent_twirl(sigma: &CMatrix, d: usize) -> TwirlDecomposition {
    assert_eq!(sigma.rows(), d * d, "operator must live on a doubled system");
    let df = d as f64;
    let mut q = 0.0;
    let mut p = 0.0;
    let mut r = 0.0;
    for i in 0..d {
        q += sigma.entry(i * d + i, i * d + i).re;
        for j in 0..d {
            if i != j {
                p += sigma.entry(i * d + j, i * d + j).re;
                r += sigma.entry(i * d + i, j * d + j).re;
            }
        }
    }
    q /= df;
    if d > 1 {
        let pairs = df * (df - 1.0);
        p /= pairs;
        r /= pairs;
    }
    TwirlDecomposition { p, q, r, d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{diamond_distance, plus_state_preparation};
    use crate::operator::max_entangled;
    use crate::random::{random_channel, random_hermitian, random_pure, seeded};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "expected {b}, got {a}");
    }

    #[test]
    fn conversion_to_self_and_to_classical_is_free() {
        let mut rng = seeded(71);
        let n = random_channel(2, 2, &mut rng);
        let res = conversion_distance(&n, &n, FreeSet::Misc).unwrap();
        assert!(res.value < 1e-7, "self conversion {}", res.value);
        assert!(res.gap() < 1e-6);
        let flags = res.theta.classify(1e-6);
        assert!(flags.is_misc);

        let classical = random_channel(2, 2, &mut rng).classical_part();
        let res = conversion_distance(&n, &classical, FreeSet::Disc).unwrap();
        assert!(res.value < 1e-7, "to-classical conversion {}", res.value);
        assert!(res.theta.classify(1e-6).is_disc);
    }

    #[test]
    fn conversion_dephasing_to_identity_is_half() {
        let deph = ChannelChoi::dephasing(2).unwrap();
        let id = ChannelChoi::identity(2).unwrap();
        for set in [FreeSet::Misc, FreeSet::Disc] {
            let res = conversion_distance(&deph, &id, set).unwrap();
            assert_close(res.value, 0.5, 1e-6);
            assert!(res.gap() < 1e-6, "gap {}", res.gap());
            // The returned superchannel cannot beat the certified distance.
            let moved = res.theta.apply(&deph).unwrap();
            let dd = diamond_distance(&moved, &id).unwrap();
            assert!(dd <= res.value + 1e-6, "diamond {dd} vs value {}", res.value);
        }
    }

    #[test]
    fn conversion_depolarizing_to_identity_is_quarter() {
        let dep = ChannelChoi::depolarizing(0.5, 2).unwrap();
        let id = ChannelChoi::identity(2).unwrap();
        let res = conversion_distance(&dep, &id, FreeSet::Disc).unwrap();
        assert_close(res.value, 0.25, 1e-6);
        assert!(res.gap() < 1e-6);
    }

    #[test]
    fn cost_examples_and_realizing_superchannel() {
        let classical = ChannelChoi::dephasing(2).unwrap();
        let c = exact_one_shot_cost(&classical, FreeSet::Misc).unwrap();
        assert_eq!(c.m, 1);
        assert_close(c.cost_bits, 0.0, 1e-12);

        for set in [FreeSet::Misc, FreeSet::Disc] {
            let id = ChannelChoi::identity(2).unwrap();
            let c = exact_one_shot_cost(&id, set).unwrap();
            assert_eq!(c.m, 2);
            assert_close(c.cost_bits, 1.0, 1e-12);
            assert!(c.lr <= c.cost_bits + 1e-9 && c.cost_bits <= c.lr + 1.0 + 1e-9);
            let prep = plus_state_preparation(c.m).unwrap();
            let realized = c.omega.apply(&prep).unwrap();
            assert!(realized.choi().sub(id.choi()).frobenius() < 1e-8);
            assert!(c.omega.classify(1e-7).is_in(set));
        }

        let id3 = ChannelChoi::identity(3).unwrap();
        let c = exact_one_shot_cost(&id3, FreeSet::Misc).unwrap();
        assert_eq!(c.m, 3);
        assert_close(c.cost_bits, 3.0_f64.log2(), 1e-12);

        let dep = ChannelChoi::depolarizing(0.5, 2).unwrap();
        for set in [FreeSet::Misc, FreeSet::Disc] {
            let c = exact_one_shot_cost(&dep, set).unwrap();
            assert!(c.lr <= c.cost_bits + 1e-9 && c.cost_bits <= c.lr + 1.0 + 1e-9);
            let prep = plus_state_preparation(c.m).unwrap();
            let realized = c.omega.apply(&prep).unwrap();
            assert!(realized.choi().sub(dep.choi()).frobenius() < 1e-8);
            assert!(c.omega.classify(1e-7).is_in(set));
        }
    }

    #[test]
    fn distill_examples_match_lemma_values() {
        let perfect = ChannelChoi::depolarizing(1.0, 2).unwrap();
        for set in [FreeSet::Misc, FreeSet::Disc] {
            let r = one_shot_distill(&perfect, 0.0, set).unwrap();
            assert_eq!(r.n, 2, "set {set:?}");
            assert_close(r.bits, 1.0, 1e-12);
            assert!(r.gamma.dephase().frobenius() < 1e-8);
            assert!((r.rho.trace().re - 1.0).abs() < 1e-7);
        }

        let half = ChannelChoi::depolarizing(0.5, 2).unwrap();
        let r = one_shot_distill(&half, 0.1, FreeSet::Misc).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(distill_closed_form(0.5, 2, 0.1), 1);

        let pd = ChannelChoi::partial_dephasing(0.5, 2).unwrap();
        let r = one_shot_distill(&pd, 0.3, FreeSet::Disc).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(distill_closed_form(0.5, 2, 0.3), 2);

        assert!(matches!(
            one_shot_distill(&half, 1.0, FreeSet::Misc),
            Err(TaskError::BadEpsilon(_))
        ));
    }

    #[test]
    fn state_preparations_distill_equally_in_both_sets() {
        let mut rng = seeded(72);
        for _ in 0..2 {
            let psi = random_pure(2, &mut rng);
            let prep = ChannelChoi::replacement(&psi, 1).unwrap();
            let misc = one_shot_distill(&prep, 0.2, FreeSet::Misc).unwrap();
            let disc = one_shot_distill(&prep, 0.2, FreeSet::Disc).unwrap();
            assert_eq!(misc.n, disc.n);
        }
    }

    #[test]
    fn conversion_zero_respects_log_robustness_order() {
        let mut rng = seeded(73);
        let n = random_channel(2, 2, &mut rng);
        let target = n.classical_part();
        let res = conversion_distance(&n, &target, FreeSet::Misc).unwrap();
        assert!(res.value < 1e-7);
        let lr_n = log_robustness(&n).unwrap().value;
        let lr_m = log_robustness(&target).unwrap().value;
        assert!(lr_m <= lr_n + 1e-5);
    }

    #[test]
    fn twirl_examples_and_projection() {
        let phi = max_entangled(2);
        let t = incoherent_twirl(&phi, 2);
        assert_close(t.p, 0.0, 1e-12);
        assert_close(t.q, 1.0, 1e-12);
        assert_close(t.r, 1.0, 1e-12);
        assert!(t.reconstruct().sub(&phi).frobenius() < 1e-12);

        let eye = CMatrix::identity(9);
        let t = incoherent_twirl(&eye, 3);
        assert_close(t.p, 1.0, 1e-12);
        assert_close(t.q, 1.0, 1e-12);
        assert_close(t.r, 0.0, 1e-12);

        let mut rng = seeded(74);
        let sigma = random_hermitian(9, &mut rng);
        let once = incoherent_twirl(&sigma, 3);
        let twice = incoherent_twirl(&once.reconstruct(), 3);
        assert!(once.reconstruct().sub(&twice.reconstruct()).frobenius() < 1e-10);

        let lam = 0.4;
        let dep = ChannelChoi::depolarizing(lam, 3).unwrap();
        let t = incoherent_twirl(dep.choi(), 3);
        assert_close(t.p, (1.0 - lam) / 3.0, 1e-12);
        assert_close(t.q - t.r, (1.0 - lam) / 3.0, 1e-12);
        assert_close(t.r, lam, 1e-12);
        let (e1, e2, e3) = t.eigenvalues();
        let eigs = eigvalsh(dep.choi());
        assert_close(eigs[0], e1.min(e2), 1e-12);
        assert_close(eigs[8], e3.max(e1), 1e-12);
    }
}
