//! Choi-matrix toolbox for dynamical coherence resources.
//!
//! The crate models quantum channels and superchannels as Choi matrices,
//! decides membership in the free superchannel sets used in coherence theory
//! (classical-preserving and dephasing-covariant), and evaluates the
//! semidefinite quantities built on them: channel max-relative entropy,
//! log-robustness in its primal and dual forms, smoothed and dephasing
//! variants, a complete family of monotones, conversion distance, and the
//! exact one-shot cost and distillation rates.
//!
//! Conventions, fixed across the crate:
//! - Choi matrices use the unnormalized maximally entangled projector
//!   (trace equal to the input dimension). The entry at row (i,k), column
//!   (j,l) is the (k,l) entry of the channel applied to |i><j|.
//! - Tensor products place the left factor on the slower index.
//! - All logarithms are base 2; rates are in bits.
//! - Every optimization runs on the built-in deterministic interior-point
//!   solver in [`sdp`]; no external solver is required.

#![forbid(unsafe_code)]

pub mod channel;
pub mod measures;
pub mod operator;
pub mod random;
pub mod sdp;
pub mod specfile;
pub mod superchannel;
pub mod tasks;

pub use channel::{
    diamond_distance, dmax_channels, make_channel, plus_state_preparation, ChannelChoi,
    ChannelError, ChannelSpec, DmaxResult, SystemDim,
};
pub use measures::{
    dephasing_log_robustness, log_robustness, monotone_g, smoothed_log_robustness, MeasureError,
    MeasureResult, MonotoneProbe,
};
pub use operator::{
    eigh, eigvalsh, max_entangled, plus_state, uniform_state, CMatrix, Cx, HermitianOp,
    OperatorError, ProductDims,
};
pub use random::{
    random_channel, random_density, random_hermitian, random_pure, random_unitary, seeded,
    SeededRng,
};
pub use sdp::{
    ConicProblem, ConicSolver, InteriorPointSolver, MatExpr, ProblemBuilder, ScalExpr, SdpError,
    SolveReport, SolveStatus, SolveTols, VarId,
};
pub use superchannel::{
    free_subspace_basis, make_free_superchannel, random_superchannel, FreeRecipe, FreeSet,
    SetMembership, SubspaceBasis, SuperchannelChoi, SuperchannelError,
};
pub use specfile::{
    channel_to_value, matrix_to_nested, nested_to_matrix, parse_channel_text, read_channel_file,
    superchannel_to_value, NestedMatrix, SpecFileError,
};
pub use tasks::{
    conversion_distance, distill_closed_form, exact_one_shot_cost, incoherent_twirl,
    one_shot_distill, ConversionDual, ConversionResult, CostResult, DistillResult, TaskError,
    TwirlDecomposition,
};
