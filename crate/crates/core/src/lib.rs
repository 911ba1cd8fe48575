//! Reconvergence-driven AIG rewriting with per-cone strategy selection.
//!
//! Each And node gets a reconvergence-driven cut. The cut is rewritten by one
//! of three engines: an NPN structure database, exact chain synthesis, or
//! ISOP refactoring. A policy picks the engine, either learned by tabular
//! Q-learning and distilled into a small MLP, or a fixed rule.

pub mod aig;
pub mod aiger;
pub mod cec;
pub mod chain;
pub mod cone;
pub mod exact;
pub mod isop;
pub mod learn;
pub mod npn;
pub mod pass;
pub mod replace;
pub mod truth;

pub use aig::{AigNetwork, Lit, NodeId};
pub use cone::{Cone, FeatureVector};
pub use learn::Action;
pub use truth::{NpnTransform, TruthTable};

pub type QTable32 = learn::QTable<f32>;
pub type QTable64 = learn::QTable<f64>;
pub type Mlp32 = learn::MlpModel<f32>;
pub type Mlp64 = learn::MlpModel<f64>;
