//! Desk-scale relation classifier and the two-phase training protocol.

pub mod metrics;
pub mod model;
pub mod optim;
pub mod protocol;
pub mod synthetic;
pub mod vocab;

pub use metrics::{evaluate, Averaging, ClassScores, EvalReport};
pub use model::{Encoded, ModelError, ModelParams, Shape, Weights};
pub use protocol::{
    run_protocol, sweep, train_phase, DomainSplits, Mode, PhaseLog, PhaseSpec, ProtocolData,
    SweepReport, TrainConfig, TrainError, TrainReport, DEFAULT_SEEDS,
};
pub use vocab::Vocab;
