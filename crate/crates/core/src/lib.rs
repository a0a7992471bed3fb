//! Variational quantum cloning: a small statevector simulator, learnable
//! cloning circuits, cost functions with parameter-shift gradients, an
//! architecture search, and attacks on quantum coin-flipping protocols.

// Argument checks are written as `!(x > 0.0)` on purpose: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod families;
pub mod qmath;
pub mod rng;
pub mod search;
pub mod train;

pub use attack::{AttackReport, ClonerHandle};
pub use circuit::{CloneTask, GateKind, GatePool, GateSequence, GateSpec};
pub use cost::{Batch, BlockKind, CostKind, CostReport, Estimator};
pub use error::{Error, Result};
pub use families::{SampleLabel, StateFamily, StateSample};
pub use qmath::{ComplexMatrix, DensityMatrix, PureState, C64};
pub use search::{SearchConfig, SearchResult};
pub use train::{EstimatorConfig, TrainConfig, TrainOutcome, TrainTrace};
