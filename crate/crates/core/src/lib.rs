//! Silver syntactic pre-training data for relation extraction.
//!
//! The pipeline reads dependency-parsed text ([`conllu`]), rewrites conjunct
//! attachments and extracts shortest dependency paths ([`tree`]), measures
//! which relations connect gold entities ([`corpus`], [`stats`]), and turns
//! whitelisted tree edges into entity-marker training instances ([`silver`],
//! [`instance`]). [`trainer`] is a small from-scratch relation classifier that
//! runs the syntax pre-train / head replacement / fine-tune protocol on those
//! files.

pub mod conllu;
pub mod corpus;
pub mod instance;
pub mod rng;
pub mod scalar;
pub mod silver;
pub mod stats;
pub mod trainer;
pub mod tree;

pub use conllu::{parse_conllu, serialize_conllu, validate_tree, ParsedSentence, Token};
pub use corpus::{candidate_pairs, CorpusRecord, EntitySpan, RelationInstance, NO_RELATION};
pub use instance::{mark_instance, unmark, InstanceRecord, MarkedInstance};
pub use silver::{GenConfig, SilverTriplet};
pub use stats::{GroupBy, PathStatsTable, DEFAULT_WHITELIST};
pub use tree::{path_labels, propagate_conj, shortest_path, span_head, DependencyPath, PathEdge};
pub use scalar::Scalar;
pub use trainer::{run_protocol, ModelParams, TrainConfig, TrainReport};

/// Double-precision model, used for gradient checks and reports.
pub type Model = trainer::ModelParams<f64>;
/// Single-precision model.
pub type Model32 = trainer::ModelParams<f32>;
