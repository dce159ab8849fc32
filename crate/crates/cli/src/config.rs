//! Run configuration: defaults, an optional TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use xilab_core::QuadratureConfig;

/// Environment variable naming a TOML config file.
pub const CONFIG_ENV: &str = "XILAB_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub precision_digits: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub parallelism: usize,
    pub output_dir: Option<PathBuf>,
    pub output_formats: Vec<Format>,
    /// Precision came from the file or flags rather than the default.
    #[serde(skip)]
    pub digits_explicit: bool,
}

/// Keys accepted in the config file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub precision_digits: Option<u32>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_panels: Option<usize>,
    pub parallelism: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub output_formats: Option<Vec<Format>>,
}

/// Values given on the command line.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub digits: Option<u32>,
    pub tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_panels: Option<usize>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_digits(30)
    }
}

impl RunConfig {
    fn for_digits(digits: u32) -> Self {
        let q = QuadratureConfig::with_digits(digits);
        RunConfig {
            precision_digits: digits,
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_panels: q.max_panels,
            parallelism: 1,
            output_dir: None,
            output_formats: vec![Format::Json],
            digits_explicit: false,
        }
    }

    /// Reads the file named by `XILAB_CONFIG`, if set.
    pub fn file_from_env() -> anyhow::Result<FileConfig> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => FileConfig::load(Path::new(&p)),
            None => Ok(FileConfig::default()),
        }
    }

    /// Tolerances default to the values implied by the final precision
    /// unless set explicitly in the file or on the command line.
    pub fn resolve(file: FileConfig, cli: Overrides) -> anyhow::Result<RunConfig> {
        let digits = cli.digits.or(file.precision_digits).unwrap_or(30);
        let mut c = RunConfig::for_digits(digits);
        c.digits_explicit = cli.digits.is_some() || file.precision_digits.is_some();
        if let Some(v) = cli.tol.or(file.rel_tol) {
            c.rel_tol = v;
        }
        if let Some(v) = cli.abs_tol.or(file.abs_tol) {
            c.abs_tol = v;
        }
        if let Some(v) = cli.max_panels.or(file.max_panels) {
            c.max_panels = v;
        }
        if let Some(v) = cli.jobs.or(file.parallelism) {
            c.parallelism = v;
        }
        c.output_dir = cli.out.or(file.output_dir);
        if !cli.formats.is_empty() {
            c.output_formats = cli.formats;
        } else if let Some(f) = file.output_formats {
            c.output_formats = f;
        }
        c.output_formats.sort_by_key(|f| *f as u8);
        c.output_formats.dedup();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(10..=1000).contains(&self.precision_digits) {
            bail!("digits must be in 10..=1000, got {}", self.precision_digits);
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            bail!("tolerances must be positive (rel {}, abs {})", self.rel_tol, self.abs_tol);
        }
        if self.parallelism < 1 {
            bail!("jobs must be at least 1");
        }
        if self.max_panels < 1 {
            bail!("max-panels must be at least 1");
        }
        if self.output_formats.is_empty() {
            bail!("at least one output format is required");
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_panels: self.max_panels,
            ..QuadratureConfig::with_digits(self.precision_digits)
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("precision_digits = 40\nrel_tol = 1e-20\nparallelism = 3").unwrap();
        let cli = Overrides {
            digits: Some(50),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(file, cli).unwrap();
        assert_eq!(c.precision_digits, 50);
        assert_eq!(c.rel_tol, 1e-20);
        assert_eq!(c.abs_tol, 1e-48);
        assert_eq!(c.parallelism, 3);
    }

    #[test]
    fn rejects_bad_values() {
        let cli = Overrides {
            jobs: Some(0),
            ..Overrides::default()
        };
        assert!(RunConfig::resolve(FileConfig::default(), cli).is_err());
        assert!(toml::from_str::<FileConfig>("digits = 3").is_err());
    }
}
