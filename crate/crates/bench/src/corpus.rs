//! Benchmark cases on disk: `<dir>/<name>/examples.txt` and `truth.txt`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use regval::{parse_benchmark, validate, ExampleSet, RegexValidation};

#[derive(Clone, Debug)]
pub struct Case {
    pub name: String,
    pub examples: ExampleSet,
    pub truth: RegexValidation,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("case {0}: the truth does not classify its own examples correctly")]
    Inconsistent(String),
}

/// The corpus bundled with this crate.
pub fn default_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("cases")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

pub fn load_case(dir: &Path) -> Result<Case, CorpusError> {
    let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
    let ex_path = dir.join("examples.txt");
    let examples = parse_benchmark(&read(&ex_path)?)
        .map_err(|e| CorpusError::Parse { path: ex_path, message: e.to_string() })?;
    let truth_path = dir.join("truth.txt");
    let truth = RegexValidation::parse(&read(&truth_path)?)
        .map_err(|e| CorpusError::Parse { path: truth_path, message: e.to_string() })?;
    if !validate(&truth, &examples).passed() {
        return Err(CorpusError::Inconsistent(name));
    }
    Ok(Case { name, examples, truth })
}

/// Every case directory under `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<Case>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io { path: dir.to_path_buf(), source })?;
    let mut dirs: Vec<PathBuf> = entries.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}
