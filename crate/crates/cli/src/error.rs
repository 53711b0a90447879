use std::path::{Path, PathBuf};

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fdaclust_core::Error),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: fdaclust_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) | CliError::InFile { source: e, .. } => e.category(),
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
        }
    }

    /// Process exit status; one value per category.
    pub fn exit_code(&self) -> i32 {
        exit_code_for(self.category())
    }

    pub fn in_file(path: &Path) -> impl FnOnce(fdaclust_core::Error) -> CliError + '_ {
        move |source| CliError::InFile {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn exit_code_for(category: &str) -> i32 {
    match category {
        "usage" => 2,
        "parse" => 3,
        "schema" => 4,
        "io" => 5,
        "invalid-input" => 6,
        "mismatch" => 7,
        "unsupported" => 8,
        "config" => 9,
        "numerical" => 10,
        _ => 1,
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_have_distinct_codes() {
        let cats = [
            "usage",
            "parse",
            "schema",
            "io",
            "invalid-input",
            "mismatch",
            "unsupported",
            "config",
            "numerical",
        ];
        let mut codes: Vec<i32> = cats.iter().map(|c| exit_code_for(c)).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), cats.len());
        assert!(!codes.contains(&0));
    }

    #[test]
    fn file_errors_keep_inner_category() {
        let e = CliError::in_file(Path::new("x.csv"))(fdaclust_core::Error::InvalidGrade(9));
        assert_eq!(e.category(), "invalid-input");
        assert!(e.to_string().starts_with("x.csv: "));
    }
}
