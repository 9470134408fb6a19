//! Simulation of PT-symmetric dynamics on small bipartite quantum systems.
//!
//! The crate covers:
//!
//! * dense complex linear algebra sized for qubit/qutrit pairs ([`linalg`], [`quantum`]),
//! * PT-symmetric Hamiltonians and the normalized non-unitary evolution they
//!   generate ([`dynamics`]),
//! * the ancilla dilation that realizes that evolution inside ordinary quantum
//!   mechanics by post-selection ([`dilation`]),
//! * the shared-state families used throughout ([`states`]),
//! * brute-force signaling gaps and distinguishability next to their closed
//!   forms ([`signaling`]),
//! * a seeded Monte-Carlo engine for the randomness-amplification protocol
//!   ([`randamp`]).

pub mod dilation;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod randamp;
pub mod signaling;
pub mod states;
pub mod tolerances;

pub use dilation::{apply_postselected, dilate, sample_round, DilationResult, Postselection};
pub use dynamics::{
    build_hamiltonian, build_qubit_hamiltonian, build_qutrit_hamiltonian, classify_phase,
    evolution_operator, evolve_state, specific_time, EvolutionTime, PTHamiltonian, Phase,
    PhaseLabel, PtMap,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use quantum::{partial_trace, trace_distance, DensityMatrix, PureState, Subsystem};
pub use randamp::{
    analyze, certify_source, draw_bits, run_protocol, DecodeMap, ProtocolConfig, ProtocolStats,
    RoundRecord, SourceModel,
};
pub use signaling::{AliceMeasurement, BobMeasurement, GapReport};
pub use states::{AliceOp, CanonicalQubitParams, NonMaxParams, QutritParams, StateSpec, WernerParams};
pub use tolerances::Tolerances;
