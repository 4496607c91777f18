//! Interactive synthesis of regex validations from examples.
//!
//! A regex validation is a regular expression with capturing groups plus a
//! conjunction of integer conditions over the captured values. Synthesis runs
//! in two stages: an enumerative, constraint-guided search for a regex that
//! matches every valid example and no invalid one, then a search for capturing
//! groups and a minimal set of conditions that reject the conditional-invalid
//! examples. Both stages ask the user to classify distinguishing inputs when
//! several solutions fit the examples.

pub mod ast;
pub mod capture;
pub mod dsl;
pub mod engine;
pub mod enumerator;
pub mod model;
pub mod orchestrator;
pub mod solver;
pub mod splitter;

pub use ast::{CharClass, RangeLit, Regex};
pub use model::{
    parse_benchmark, serialize_benchmark, validate, CaptureCondition, CmpOp, ExampleKind, ExampleSet,
    RegexValidation,
};
