//! Unsupervised semantic role induction.
//!
//! A feature-rich log-linear role labeler (the [`encoder`]) is trained
//! jointly with a bilinear tensor-factorization model (the [`decoder`]) that
//! reconstructs each argument lemma from the predicate and the other
//! role–argument pairs. Only the labeler is used at test time; induced
//! roles are scored with purity, collocation and F1 ([`evaluation`]).

pub mod corpus;
pub mod decoder;
pub mod encoder;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod training;

pub use corpus::{
    build_vocabulary, draft_instances, extract_instances, parse_conll, ExtractOptions, Format,
    PredicateInstance, Sentence, SyntaxColumns, Vocabulary,
};
pub use decoder::{DecoderParams, DimensionError};
pub use encoder::{EncoderParams, RolePosteriors};
pub use evaluation::{evaluate_clustering, ClusterEvaluation, EvalError};
pub use training::{train, Model, ModelError, ModelParams, TrainConfig, TrainError};
