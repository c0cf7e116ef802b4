//! Superchannels as Choi matrices on the four factors (A0, A1, B0, B1):
//! validation, action on channels, canonical constructors, membership in the
//! free sets, and the orthogonal bases of the associated trace-constraint
//! subspaces used by the optimization modules.
//!
//! A superchannel maps channels with system A = (A0 -> A1) to channels with
//! system B = (B0 -> B1). Its Choi matrix is characterized by positivity
//! together with two marginal identities: the (A1 B0) marginal equals the
//! identity, and the (A0 A1 B0) marginal factorizes as the (A0 B0) marginal
//! times the uniform state on A1.

use thiserror::Error;

use crate::channel::{choi_compose, ChannelChoi, ChannelError, SystemDim, VALIDATION_TOL};
use crate::operator::{
    eigvalsh, herm_func, max_entangled, CMatrix, Cx, OperatorError, ProductDims,
};
use rand::Rng;

#[derive(Debug, Error)]
pub enum SuperchannelError {
    #[error("Choi matrix is not Hermitian: deviation {0:.3e}")]
    NotHermitian(f64),
    #[error("Choi matrix is not positive semidefinite: minimum eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("the (A0 A1 B0) marginal does not factorize with a uniform A1: deviation {0:.3e}")]
    MarginalNotFactorized(f64),
    #[error("the (A1 B0) marginal is not the identity: deviation {0:.3e}")]
    OutputMarginalNotIdentity(f64),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid construction: {0}")]
    InvalidRecipe(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// The two free sets of superchannels considered by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeSet {
    /// Maximally incoherent: classical channels map to classical channels.
    Misc,
    /// Dephasing incoherent: commutes with the dephasing superchannel.
    Disc,
}

impl std::fmt::Display for FreeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FreeSet::Misc => write!(f, "MISC"),
            FreeSet::Disc => write!(f, "DISC"),
        }
    }
}

/// Outcome of the membership test, with the raw deviations for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SetMembership {
    pub is_misc: bool,
    pub is_disc: bool,
    pub misc_deviation: f64,
    pub disc_deviation: f64,
}

impl SetMembership {
    pub fn is_in(&self, set: FreeSet) -> bool {
        match set {
            FreeSet::Misc => self.is_misc,
            FreeSet::Disc => self.is_disc,
        }
    }
}

/// A superchannel, stored as its Choi matrix on (A0, A1, B0, B1).
#[derive(Debug, Clone)]
pub struct SuperchannelChoi {
    sys_in: SystemDim,
    sys_out: SystemDim,
    j: CMatrix,
}

impl SuperchannelChoi {
    /// Validate a Choi matrix as a superchannel. Violations of the three
    /// defining conditions surface as distinct errors.
    pub fn new(
        sys_in: SystemDim,
        sys_out: SystemDim,
        j: CMatrix,
    ) -> Result<Self, SuperchannelError> {
        Self::new_with_tol(sys_in, sys_out, j, VALIDATION_TOL)
    }

    pub fn new_with_tol(
        sys_in: SystemDim,
        sys_out: SystemDim,
        j: CMatrix,
        tol: f64,
    ) -> Result<Self, SuperchannelError> {
        let total = sys_in.total() * sys_out.total();
        if j.rows() != total || j.cols() != total {
            return Err(SuperchannelError::DimensionMismatch {
                context: "superchannel Choi matrix",
                expected: total,
                got: j.rows(),
            });
        }
        let dev = j.hermitian_deviation();
        if dev > tol * (1.0 + j.frobenius()) {
            return Err(SuperchannelError::NotHermitian(dev));
        }
        let sym = j.add(&j.dagger()).scale(0.5);
        let scale = tol * (1.0 + sym.frobenius());
        let min_eig = eigvalsh(&sym).first().copied().unwrap_or(0.0);
        if min_eig < -scale {
            return Err(SuperchannelError::NotPositive(min_eig));
        }
        let out = Self {
            sys_in,
            sys_out,
            j: sym,
        };
        let (ms, expected) = out.input_marginal_pair()?;
        let dev = ms.sub(&expected).frobenius();
        if dev > scale {
            return Err(SuperchannelError::MarginalNotFactorized(dev));
        }
        let m = out
            .j
            .partial_trace(&out.four_dims(), &[1, 2])?;
        let dev = m
            .sub(&CMatrix::identity(sys_in.d_out * sys_out.d_in))
            .frobenius();
        if dev > scale {
            return Err(SuperchannelError::OutputMarginalNotIdentity(dev));
        }
        Ok(out)
    }

    /// The (A0 A1 B0) marginal alongside its required factorized form.
    fn input_marginal_pair(&self) -> Result<(CMatrix, CMatrix), SuperchannelError> {
        let four = self.four_dims();
        let m_ab0 = self.j.partial_trace(&four, &[0, 1, 2])?;
        let m_a0b0 = self.j.partial_trace(&four, &[0, 2])?;
        let a1 = self.sys_in.d_out;
        let three = ProductDims::new(&[self.sys_in.d_in, self.sys_out.d_in, a1])?;
        let expected = m_a0b0
            .tensor(&CMatrix::identity(a1).scale(1.0 / a1 as f64))
            .permute_factors(&three, &[0, 2, 1])?;
        Ok((m_ab0, expected))
    }

    pub fn sys_in(&self) -> SystemDim {
        self.sys_in
    }

    pub fn sys_out(&self) -> SystemDim {
        self.sys_out
    }

    pub fn choi(&self) -> &CMatrix {
        &self.j
    }

    /// Factor layout (|A0|, |A1|, |B0|, |B1|).
    pub fn four_dims(&self) -> ProductDims {
        ProductDims::new(&[
            self.sys_in.d_in,
            self.sys_in.d_out,
            self.sys_out.d_in,
            self.sys_out.d_out,
        ])
        .expect("positive dims")
    }

    /// Choi of the output channel: Tr_A[J ((J^M)^T (x) I_B)].
    pub fn apply(&self, m: &ChannelChoi) -> Result<ChannelChoi, SuperchannelError> {
        if m.sys() != self.sys_in {
            return Err(SuperchannelError::DimensionMismatch {
                context: "apply_superchannel",
                expected: self.sys_in.total(),
                got: m.sys().total(),
            });
        }
        let lifted = m
            .choi()
            .transpose()
            .tensor(&CMatrix::identity(self.sys_out.total()));
        let out = self
            .j
            .matmul(&lifted)
            .partial_trace(&self.four_dims(), &[2, 3])?;
        let built = if m.is_cp_only() {
            ChannelChoi::new_cp_only(self.sys_out, out)
        } else {
            ChannelChoi::new(self.sys_out, out)
        };
        Ok(built?)
    }

    /// The superchannel leaving every channel unchanged.
    pub fn identity(a: SystemDim) -> Self {
        let phi_in = max_entangled(a.d_in);
        let phi_out = max_entangled(a.d_out);
        let mixed = ProductDims::new(&[a.d_in, a.d_in, a.d_out, a.d_out])
            .expect("positive dims");
        // (A0, B0, A1, B1) -> (A0, A1, B0, B1)
        let j = phi_in
            .tensor(&phi_out)
            .permute_factors(&mixed, &[0, 2, 1, 3])
            .expect("permutation");
        Self::new(a, a, j).expect("identity superchannel is valid")
    }

    /// The dephasing superchannel: N maps to dephasing . N . dephasing.
    pub fn dephasing(a: SystemDim) -> Self {
        let four = ProductDims::new(&[a.d_in, a.d_out, a.d_in, a.d_out])
            .expect("positive dims");
        let n = four.total();
        let mut j = CMatrix::zeros(n, n);
        for i in 0..a.d_in {
            for k in 0..a.d_out {
                let idx = four.ravel(&[i, k, i, k]);
                j.set(idx, idx, Cx::new(1.0, 0.0));
            }
        }
        Self::new(a, a, j).expect("dephasing superchannel is valid")
    }

    /// The superchannel sending every input channel to the fixed channel m.
    pub fn constant(a: SystemDim, m: &ChannelChoi) -> Result<Self, SuperchannelError> {
        let j = CMatrix::identity(a.total())
            .tensor(m.choi())
            .scale(1.0 / a.d_in as f64);
        Self::new(a, m.sys(), j)
    }

    /// The superchannel N maps to post . N . pre, from two fixed channels.
    /// pre feeds the new input into the old one; post carries the old output
    /// to the new one.
    pub fn sandwich(
        pre: &ChannelChoi,
        post: &ChannelChoi,
    ) -> Result<Self, SuperchannelError> {
        let a = SystemDim::new(pre.sys().d_out, post.sys().d_in)?;
        let b = SystemDim::new(pre.sys().d_in, post.sys().d_out)?;
        let j = from_map(a, b, |x| {
            let step = choi_compose(pre.choi(), b.d_in, a.d_in, x, a.d_out);
            choi_compose(&step, b.d_in, a.d_out, post.choi(), b.d_out)
        });
        Self::new(a, b, j)
    }

    /// Dephase the A factors of the Choi matrix: the superchannel that first
    /// dephases the input channel on both sides, then applies this one.
    pub fn pre_dephased(&self) -> Self {
        Self {
            sys_in: self.sys_in,
            sys_out: self.sys_out,
            j: self
                .j
                .dephase_factors(&self.four_dims(), &[0, 1])
                .expect("dephase"),
        }
    }

    /// Dephase the B factors of the Choi matrix: this superchannel followed
    /// by dephasing of the output channel on both sides.
    pub fn post_dephased(&self) -> Self {
        Self {
            sys_in: self.sys_in,
            sys_out: self.sys_out,
            j: self
                .j
                .dephase_factors(&self.four_dims(), &[2, 3])
                .expect("dephase"),
        }
    }

    /// Decide membership in both free sets by dephasing the Choi matrix.
    /// The tolerance is scaled by the Frobenius norm of the matrix.
    pub fn classify(&self, tol: f64) -> SetMembership {
        let four = self.four_dims();
        let deph_a = self.j.dephase_factors(&four, &[0, 1]).expect("dephase");
        let deph_b = self.j.dephase_factors(&four, &[2, 3]).expect("dephase");
        let misc_deviation = self.j.dephase().sub(&deph_a).frobenius();
        let disc_deviation = deph_a.sub(&deph_b).frobenius();
        let scale = tol * (1.0 + self.j.frobenius());
        SetMembership {
            is_misc: misc_deviation <= scale,
            is_disc: disc_deviation <= scale,
            misc_deviation,
            disc_deviation,
        }
    }
}

/// Choi matrix of a linear map on channel Choi matrices, evaluated on the
/// matrix-unit basis of the input system.
fn from_map(a: SystemDim, b: SystemDim, mut f: impl FnMut(&CMatrix) -> CMatrix) -> CMatrix {
    let (na, nb) = (a.total(), b.total());
    let mut j = CMatrix::zeros(na * nb, na * nb);
    for r in 0..na {
        for c in 0..na {
            let mut unit = CMatrix::zeros(na, na);
            unit.set(r, c, Cx::new(1.0, 0.0));
            let block = f(&unit);
            for br in 0..nb {
                for bc in 0..nb {
                    j.set(r * nb + br, c * nb + bc, block.entry(br, bc));
                }
            }
        }
    }
    j
}

/// Orthonormal Hermitian basis of the trace-constraint subspace attached to
/// a free set: a superchannel belongs to the set exactly when its Choi
/// matrix is orthogonal to every element.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub set: FreeSet,
    pub sys_in: SystemDim,
    pub sys_out: SystemDim,
    pub elements: Vec<CMatrix>,
}

/// Build the basis from the matrix-unit positions the defining maps reach:
/// Choi entries whose A indices agree while the B indices differ, plus, for
/// the dephasing-incoherent set, entries whose B indices agree while the A
/// indices differ. The counts are |AB|(|B|-1) and |AB|(|A|+|B|-2).
pub fn free_subspace_basis(set: FreeSet, sys_in: SystemDim, sys_out: SystemDim) -> SubspaceBasis {
    let na = sys_in.total();
    let nb = sys_out.total();
    let n = na * nb;
    let inv = 1.0 / 2.0_f64.sqrt();
    let mut elements = Vec::new();
    let push_pair = |r: usize, c: usize, elements: &mut Vec<CMatrix>| {
        let mut x = CMatrix::zeros(n, n);
        x.set(r, c, Cx::new(inv, 0.0));
        x.set(c, r, Cx::new(inv, 0.0));
        elements.push(x);
        let mut y = CMatrix::zeros(n, n);
        y.set(r, c, Cx::new(0.0, inv));
        y.set(c, r, Cx::new(0.0, -inv));
        elements.push(y);
    };
    for a in 0..na {
        for b in 0..nb {
            for bp in (b + 1)..nb {
                push_pair(a * nb + b, a * nb + bp, &mut elements);
            }
        }
    }
    if set == FreeSet::Disc {
        for b in 0..nb {
            for a in 0..na {
                for ap in (a + 1)..na {
                    push_pair(a * nb + b, ap * nb + b, &mut elements);
                }
            }
        }
    }
    let expected = match set {
        FreeSet::Misc => na * nb * (nb - 1),
        FreeSet::Disc => na * nb * (na + nb - 2),
    };
    assert_eq!(elements.len(), expected, "subspace dimension");
    SubspaceBasis {
        set,
        sys_in,
        sys_out,
        elements,
    }
}

/// Construction recipes for superchannels that are free in both sets
/// (except the identity, which is free only because it never creates
/// coherence on its own).
#[derive(Debug, Clone)]
pub enum FreeRecipe {
    Identity { a: SystemDim },
    Delta { a: SystemDim },
    Constant { a: SystemDim, target: ChannelChoi },
    Sandwich { pre: ChannelChoi, post: ChannelChoi },
}

/// Build a free superchannel; rejects parameters that would make the result
/// leave the free sets (a coherent constant target, a coherent sandwich leg).
pub fn make_free_superchannel(recipe: &FreeRecipe) -> Result<SuperchannelChoi, SuperchannelError> {
    match recipe {
        FreeRecipe::Identity { a } => Ok(SuperchannelChoi::identity(*a)),
        FreeRecipe::Delta { a } => Ok(SuperchannelChoi::dephasing(*a)),
        FreeRecipe::Constant { a, target } => {
            if !target.is_classical(1e-9) {
                return Err(SuperchannelError::InvalidRecipe(
                    "constant recipe requires a classical target channel".into(),
                ));
            }
            SuperchannelChoi::constant(*a, target)
        }
        FreeRecipe::Sandwich { pre, post } => {
            if !pre.is_classical(1e-9) || !post.is_classical(1e-9) {
                return Err(SuperchannelError::InvalidRecipe(
                    "sandwich recipe requires classical legs".into(),
                ));
            }
            SuperchannelChoi::sandwich(pre, post)
        }
    }
}

/// Random superchannel: a Ginibre-seeded positive matrix pushed onto the
/// marginal conditions by alternating projections. A test generator with no
/// uniformity claims.
pub fn random_superchannel(
    sys_in: SystemDim,
    sys_out: SystemDim,
    rng: &mut impl Rng,
) -> SuperchannelChoi {
    let (a0, a1) = (sys_in.d_in, sys_in.d_out);
    let (b0, b1) = (sys_out.d_in, sys_out.d_out);
    let n = a0 * a1 * b0 * b1;
    let four = ProductDims::new(&[a0, a1, b0, b1]).expect("positive dims");
    let three = ProductDims::new(&[a0, b0, a1]).expect("positive dims");

    let affine = |j: &CMatrix| -> CMatrix {
        let m = j.partial_trace(&four, &[0, 1, 2]).expect("marginal");
        let x = m
            .partial_trace(&ProductDims::new(&[a0, a1, b0]).expect("dims"), &[0, 2])
            .expect("marginal");
        let excess = x
            .partial_trace(&ProductDims::new(&[a0, b0]).expect("dims"), &[1])
            .expect("marginal")
            .sub(&CMatrix::identity(b0).scale(a1 as f64));
        let z = x.sub(
            &CMatrix::identity(a0)
                .scale(1.0 / a0 as f64)
                .tensor(&excess),
        );
        let fixed = z
            .tensor(&CMatrix::identity(a1).scale(1.0 / a1 as f64))
            .permute_factors(&three, &[0, 2, 1])
            .expect("permutation");
        let uniform_b1 = |y: &CMatrix| {
            y.tensor(&CMatrix::identity(b1).scale(1.0 / b1 as f64))
        };
        j.sub(&uniform_b1(&m)).add(&uniform_b1(&fixed))
    };

    let mut j = {
        let g = crate::random::random_hermitian(n, rng);
        let w = g.matmul(&g.dagger());
        w.scale((a1 * b0) as f64 / w.trace().re)
    };
    for _ in 0..400 {
        j = affine(&j);
        let min_eig = eigvalsh(&j).first().copied().unwrap_or(0.0);
        if min_eig > -1e-13 {
            break;
        }
        j = herm_func(&j, |v| v.max(0.0));
    }
    j = affine(&j);
    let min_eig = eigvalsh(&j).first().copied().unwrap_or(0.0);
    if min_eig < 0.0 {
        // Blend toward the strictly positive constant-depolarizing point,
        // which satisfies the same marginal conditions.
        let p = 1.0 / (a0 * b1) as f64;
        let t = (2.0 * -min_eig / (p - min_eig)).min(1.0);
        j = j
            .scale(1.0 - t)
            .add(&CMatrix::identity(n).scale(t * p));
    }
    SuperchannelChoi::new(sys_in, sys_out, j).expect("projected matrix is a superchannel")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_channel;
    use crate::channel::ChannelSpec;
    use crate::random::{random_channel, random_density, seeded};

    fn qubit_sys() -> SystemDim {
        SystemDim::square(2).unwrap()
    }

    #[test]
    fn identity_superchannel_is_valid_and_acts_trivially() {
        let id = SuperchannelChoi::identity(qubit_sys());
        let mut rng = seeded(41);
        let n = random_channel(2, 2, &mut rng);
        let out = id.apply(&n).unwrap();
        assert!(out.choi().sub(n.choi()).frobenius() < 1e-10);
        let flags = id.classify(1e-8);
        assert!(flags.is_misc && flags.is_disc);
    }

    #[test]
    fn validation_reports_distinct_violations() {
        let a = qubit_sys();
        let zero = CMatrix::zeros(16, 16);
        match SuperchannelChoi::new(a, a, zero) {
            Err(SuperchannelError::OutputMarginalNotIdentity(_)) => {}
            other => panic!("expected output-marginal diagnostic, got {other:?}"),
        }
        let mut rng = seeded(42);
        let mut generic = random_density(16, &mut rng).scale(4.0);
        match SuperchannelChoi::new(a, a, generic.clone()) {
            Err(SuperchannelError::MarginalNotFactorized(_)) => {}
            other => panic!("expected factorization diagnostic, got {other:?}"),
        }
        generic.set(0, 1, Cx::new(0.0, 5.0));
        assert!(matches!(
            SuperchannelChoi::new(a, a, generic),
            Err(SuperchannelError::NotHermitian(_))
        ));
        assert!(matches!(
            SuperchannelChoi::new(a, a, CMatrix::identity(16).scale(-1.0)),
            Err(SuperchannelError::NotPositive(_))
        ));
    }

    #[test]
    fn dephasing_superchannel_matches_sandwich_action() {
        let delta = SuperchannelChoi::dephasing(qubit_sys());
        let id2 = make_channel(&ChannelSpec::Identity { d: 2 }).unwrap();
        let deph2 = make_channel(&ChannelSpec::Dephasing { d: 2 }).unwrap();
        let out = delta.apply(&id2).unwrap();
        assert!(out.choi().sub(deph2.choi()).frobenius() < 1e-12);

        // Classical channels are fixed points.
        let classical = deph2.clone();
        let fixed = delta.apply(&classical).unwrap();
        assert!(fixed.choi().sub(classical.choi()).frobenius() < 1e-12);

        // Idempotent action.
        let mut rng = seeded(43);
        let n = random_channel(2, 2, &mut rng);
        let once = delta.apply(&n).unwrap();
        let twice = delta.apply(&once).unwrap();
        assert!(twice.choi().sub(once.choi()).frobenius() < 1e-12);

        let flags = delta.classify(1e-8);
        assert!(flags.is_misc && flags.is_disc);
    }

    #[test]
    fn constant_superchannel_replaces_and_classifies_by_target() {
        let a = qubit_sys();
        let mut rng = seeded(44);
        let id2 = make_channel(&ChannelSpec::Identity { d: 2 }).unwrap();
        let theta = SuperchannelChoi::constant(a, &id2).unwrap();
        let n = random_channel(2, 2, &mut rng);
        let out = theta.apply(&n).unwrap();
        assert!(out.choi().sub(id2.choi()).frobenius() < 1e-10);
        let flags = theta.classify(1e-8);
        assert!(!flags.is_misc && !flags.is_disc);

        let deph = make_channel(&ChannelSpec::Dephasing { d: 2 }).unwrap();
        let free = SuperchannelChoi::constant(a, &deph).unwrap();
        let flags = free.classify(1e-8);
        assert!(flags.is_misc && flags.is_disc);
    }

    #[test]
    fn sandwich_with_classical_legs_is_free_and_outputs_classical() {
        let mut rng = seeded(45);
        let pre = random_channel(2, 2, &mut rng).classical_part();
        let post = random_channel(2, 2, &mut rng).classical_part();
        let theta = make_free_superchannel(&FreeRecipe::Sandwich {
            pre: pre.clone(),
            post: post.clone(),
        })
        .unwrap();
        let flags = theta.classify(1e-8);
        assert!(flags.is_misc && flags.is_disc);
        let n = random_channel(2, 2, &mut rng);
        let out = theta.apply(&n).unwrap();
        assert!(out.is_classical(1e-9));
        // Action agrees with direct composition.
        let direct = ChannelChoi::compose(&post, &ChannelChoi::compose(&n, &pre).unwrap()).unwrap();
        assert!(out.choi().sub(direct.choi()).frobenius() < 1e-10);

        let coherent = make_free_superchannel(&FreeRecipe::Sandwich {
            pre: make_channel(&ChannelSpec::Identity { d: 2 }).unwrap(),
            post: post.clone(),
        });
        assert!(matches!(coherent, Err(SuperchannelError::InvalidRecipe(_))));
        let coherent_target = make_free_superchannel(&FreeRecipe::Constant {
            a: qubit_sys(),
            target: make_channel(&ChannelSpec::ReplacePlus { d: 2 }).unwrap(),
        });
        assert!(matches!(
            coherent_target,
            Err(SuperchannelError::InvalidRecipe(_))
        ));
    }

    #[test]
    fn dephased_choi_factors_match_channel_level_dephasing() {
        let mut rng = seeded(46);
        let a = qubit_sys();
        let theta = random_superchannel(a, a, &mut rng);
        let m = random_channel(2, 2, &mut rng);
        let delta = SuperchannelChoi::dephasing(a);

        let lhs = theta.pre_dephased().apply(&m).unwrap();
        let rhs = theta.apply(&delta.apply(&m).unwrap()).unwrap();
        assert!(lhs.choi().sub(rhs.choi()).frobenius() < 1e-10);

        let lhs = theta.post_dephased().apply(&m).unwrap();
        let rhs = theta.apply(&m).unwrap().classical_part();
        assert!(lhs.choi().sub(rhs.choi()).frobenius() < 1e-10);
    }

    #[test]
    fn free_subspace_counts_and_orthonormality() {
        let a = qubit_sys();
        let misc = free_subspace_basis(FreeSet::Misc, a, a);
        assert_eq!(misc.elements.len(), 48);
        let disc = free_subspace_basis(FreeSet::Disc, a, a);
        assert_eq!(disc.elements.len(), 96);
        for (i, x) in disc.elements.iter().enumerate() {
            for (k, y) in disc.elements.iter().enumerate() {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((x.inner(y).re - want).abs() < 1e-12);
                assert!(x.inner(y).im.abs() < 1e-12);
            }
        }
        // Rectangular systems follow the same counting.
        let b = SystemDim::new(1, 2).unwrap();
        assert_eq!(free_subspace_basis(FreeSet::Misc, b, a).elements.len(), 8 * 3);
        assert_eq!(
            free_subspace_basis(FreeSet::Disc, b, a).elements.len(),
            8 * (2 + 4 - 2)
        );
    }

    #[test]
    fn basis_traces_agree_with_classification() {
        let a = qubit_sys();
        let mut rng = seeded(47);
        let mut cases: Vec<SuperchannelChoi> = vec![
            SuperchannelChoi::identity(a),
            SuperchannelChoi::dephasing(a),
            SuperchannelChoi::constant(a, &ChannelChoi::identity(2).unwrap()).unwrap(),
            SuperchannelChoi::constant(a, &ChannelChoi::dephasing(2).unwrap()).unwrap(),
        ];
        for _ in 0..4 {
            cases.push(random_superchannel(a, a, &mut rng));
        }
        for theta in &cases {
            let flags = theta.classify(1e-8);
            for set in [FreeSet::Misc, FreeSet::Disc] {
                let basis = free_subspace_basis(set, a, a);
                let orthogonal = basis
                    .elements
                    .iter()
                    .all(|x| theta.choi().inner(x).re.abs() <= 1e-8 * (1.0 + theta.choi().frobenius()));
                assert_eq!(orthogonal, flags.is_in(set), "set {set}");
            }
        }
    }

    #[test]
    fn random_superchannel_passes_validation_for_varied_dims() {
        let mut rng = seeded(48);
        for (a, b) in [
            (SystemDim::square(2).unwrap(), SystemDim::square(2).unwrap()),
            (SystemDim::new(1, 2).unwrap(), SystemDim::square(2).unwrap()),
            (SystemDim::new(2, 1).unwrap(), SystemDim::new(1, 3).unwrap()),
        ] {
            let theta = random_superchannel(a, b, &mut rng);
            assert_eq!(theta.sys_in(), a);
            assert_eq!(theta.sys_out(), b);
        }
    }

    #[test]
    fn misc_superchannel_preserves_classicality_of_inputs() {
        let a = qubit_sys();
        let mut rng = seeded(49);
        let recipes = [
            FreeRecipe::Identity { a },
            FreeRecipe::Delta { a },
            FreeRecipe::Constant {
                a,
                target: ChannelChoi::dephasing(2).unwrap(),
            },
        ];
        for recipe in &recipes {
            let theta = make_free_superchannel(recipe).unwrap();
            assert!(theta.classify(1e-8).is_misc);
            for _ in 0..3 {
                let n = random_channel(2, 2, &mut rng).classical_part();
                assert!(theta.apply(&n).unwrap().is_classical(1e-9));
            }
        }
    }

    #[test]
    fn plus_state_replacement_superchannel_is_not_free() {
        // Guard that classify genuinely separates: constantly outputting the
        // plus-state preparation creates coherence from classical inputs.
        let a = qubit_sys();
        let rp = ChannelChoi::replace_plus(2).unwrap();
        let theta = SuperchannelChoi::constant(a, &rp).unwrap();
        let flags = theta.classify(1e-8);
        assert!(!flags.is_misc && !flags.is_disc);
        let out = theta.apply(&ChannelChoi::dephasing(2).unwrap()).unwrap();
        assert!(out.choi().sub(rp.choi()).frobenius() < 1e-10);
        assert!(!out.is_classical(1e-9));
    }
}
