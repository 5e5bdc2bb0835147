//! Algebra sources and file output.
//!
//! Algebra files are TOML:
//!
//! ```toml
//! name = "SL2"
//! size = 2
//! labels = ["0", "1"]   # optional
//!
//! [[operations]]
//! name = "f"
//! arity = 2
//! table = [0, 0, 0, 1]  # row-major, last argument fastest
//! ```

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use algedge::{fixtures, validate_algebra, FiniteAlgebra, RawAlgebra};
use anyhow::{Context, Result};

/// Problems with what the user asked for, as opposed to analysis outcomes.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Fixture(String),
    File(PathBuf),
}

impl Source {
    pub fn load(&self) -> Result<FiniteAlgebra> {
        match self {
            Source::Fixture(name) => fixtures::by_name(name).ok_or_else(|| {
                input_error(format!("unknown fixture {name:?}; known: {}", fixtures::NAMES.join(", ")))
            }),
            Source::File(path) => read_algebra_file(path),
        }
    }
}

pub fn parse_algebra_toml(text: &str) -> Result<RawAlgebra> {
    toml::from_str(text).map_err(|e| input_error(format!("bad algebra file: {e}")))
}

pub fn algebra_to_toml(alg: &FiniteAlgebra) -> String {
    toml::to_string(&alg.to_raw()).expect("raw algebras serialize")
}

pub fn read_algebra_file(path: &Path) -> Result<FiniteAlgebra> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))?;
    let raw = parse_algebra_toml(&text).with_context(|| path.display().to_string())?;
    validate_algebra(&raw).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| input_error(format!("cannot write to {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| input_error(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_on_fixtures() {
        for alg in fixtures::all() {
            let text = algebra_to_toml(&alg);
            let raw = parse_algebra_toml(&text).unwrap();
            assert_eq!(raw, alg.to_raw());
            assert_eq!(validate_algebra(&raw).unwrap(), alg);
        }
    }

    #[test]
    fn labels_are_optional() {
        let raw = parse_algebra_toml(
            "name = \"S\"\nsize = 2\n[[operations]]\nname = \"f\"\narity = 2\ntable = [0, 0, 0, 1]\n",
        )
        .unwrap();
        assert_eq!(raw.labels, None);
        assert!(validate_algebra(&raw).is_ok());
    }
}
