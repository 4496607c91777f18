//! Benchmark corpus, example generation and the suite runner.

pub mod corpus;
pub mod generate;
pub mod suite;

pub use corpus::{default_corpus_dir, load_case, load_corpus, Case, CorpusError};
pub use generate::{generate_examples, sample, subsample, Counts, GenError};
pub use suite::{holdout_accuracy, render_table, run_case, run_suite, to_csv, BenchMode, CaseReport, SuiteConfig};
