//! Benchmark fixtures: a few channels that exercise the solver at the sizes
//! the library is designed around.

use dyncoh_core::{random_channel, seeded, ChannelChoi};

/// The maximally coherent qubit channel.
pub fn identity_qubit() -> ChannelChoi {
    ChannelChoi::identity(2).expect("identity channel")
}

/// A mixed qubit channel with robustness strictly between 0 and 1.
pub fn half_depolarizing() -> ChannelChoi {
    ChannelChoi::depolarizing(0.5, 2).expect("depolarizing channel")
}

/// The classical target used by the conversion benchmark.
pub fn dephasing_qubit() -> ChannelChoi {
    ChannelChoi::dephasing(2).expect("dephasing channel")
}

/// A fixed random qubit channel so runs are comparable.
pub fn random_qubit() -> ChannelChoi {
    random_channel(2, 2, &mut seeded(2024))
}
