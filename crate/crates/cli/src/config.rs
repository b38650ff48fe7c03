//! Experiment configuration from a key-value file and command-line overrides.
//!
//! The file grammar is `key = value` per line with `#` comments. Keys: `case` (preset name
//! or Matrix Market path), `n`, `cert`, `iters`, `seed`, `methods` (comma list), `shift`
//! (`re,im`), `out`, `log_vv` (`true`/`false`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bml_core::genmat;
use bml_core::Complex64;

use crate::certificate::{key_values, parse_complex};
use crate::error::{parse_error, read_text, CliError, Result};

pub const DEFAULT_ITERS: usize = 150;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Arnoldi,
    ArnoldiReorth,
    Fast,
    Bm,
    Isometric,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Arnoldi, Method::ArnoldiReorth, Method::Fast, Method::Bm, Method::Isometric];
    pub const DEFAULT: [Method; 4] = [Method::Arnoldi, Method::ArnoldiReorth, Method::Fast, Method::Bm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Arnoldi => "arnoldi",
            Method::ArnoldiReorth => "arnoldi-reorth",
            Method::Fast => "fast",
            Method::Bm => "bm",
            Method::Isometric => "isometric",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list into declaration order without duplicates.
pub fn parse_methods(text: &str) -> Result<Vec<Method>> {
    let mut methods = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Method::from_str)
        .collect::<Result<Vec<_>>>()?;
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(CliError::Config("at least one method is required".into()));
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseSpec {
    Preset { name: String, n: Option<usize> },
    Files { matrix: PathBuf, certificate: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: CaseSpec,
    pub iters: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Shift `delta` of the reported residuals.
    pub shift: Complex64,
    /// CSV destination; `None` leaves writing to the caller.
    pub out: Option<PathBuf>,
    /// Also write `|V^* V - I|` per method next to the CSV.
    pub log_vv: bool,
}

impl ExperimentConfig {
    pub fn preset(name: &str, n: Option<usize>, iters: usize) -> Self {
        ExperimentConfig {
            case: CaseSpec::Preset { name: name.into(), n },
            iters,
            seed: DEFAULT_SEED,
            methods: Method::DEFAULT.to_vec(),
            shift: Complex64::new(0.0, 0.0),
            out: None,
            log_vv: false,
        }
    }

    /// Builds a configuration from merged settings; see the module docs for the keys.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let get = |k: &str| settings.values.get(k).map(String::as_str);
        let parse_usize = |k: &str| -> Result<Option<usize>> {
            get(k)
                .map(|v| v.parse().map_err(|_| CliError::Config(format!("{k} must be a non-negative integer, got {v:?}"))))
                .transpose()
        };
        let case_name = get("case").ok_or_else(|| CliError::Config("no case given".into()))?;
        let n = parse_usize("n")?;
        let case = if genmat::preset_dim(case_name).is_some() {
            CaseSpec::Preset { name: case_name.into(), n }
        } else {
            let certificate = get("cert").ok_or_else(|| {
                CliError::Config(format!("{case_name:?} is not a preset; a matrix file needs --cert"))
            })?;
            CaseSpec::Files {
                matrix: PathBuf::from(case_name),
                certificate: PathBuf::from(certificate),
            }
        };
        let seed = get("seed")
            .map(|v| v.parse().map_err(|_| CliError::Config(format!("seed must be an integer, got {v:?}"))))
            .transpose()?
            .unwrap_or(DEFAULT_SEED);
        let methods = get("methods").map(parse_methods).transpose()?.unwrap_or_else(|| Method::DEFAULT.to_vec());
        let shift = get("shift")
            .map(|v| parse_complex(v).ok_or_else(|| CliError::Config(format!("shift must be 're,im', got {v:?}"))))
            .transpose()?
            .unwrap_or_default();
        let log_vv = match get("log_vv") {
            None | Some("false") => false,
            Some("true") => true,
            Some(v) => return Err(CliError::Config(format!("log_vv must be true or false, got {v:?}"))),
        };
        let default_iters = match &case {
            CaseSpec::Preset { name, n } => n.or_else(|| genmat::preset_dim(name)).map_or(DEFAULT_ITERS, |d| d.min(DEFAULT_ITERS)),
            CaseSpec::Files { .. } => DEFAULT_ITERS,
        };
        let config = ExperimentConfig {
            case,
            iters: parse_usize("iters")?.unwrap_or(default_iters),
            seed,
            methods,
            shift,
            out: get("out").map(PathBuf::from),
            log_vv,
        };
        if config.iters == 0 {
            return Err(CliError::Config("iters must be positive".into()));
        }
        if config.log_vv && config.out.is_none() {
            return Err(CliError::Config("log_vv needs an output path".into()));
        }
        Ok(config)
    }

    /// Checks the invariants that depend on the dimension.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        if self.iters > n {
            return Err(CliError::Config(format!("iters = {} exceeds n = {n}", self.iters)));
        }
        Ok(())
    }
}

/// Raw key-value settings; later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub values: BTreeMap<String, String>,
}

const KEYS: &[&str] = &["case", "n", "cert", "iters", "seed", "methods", "shift", "out", "log_vv"];

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut settings = Settings::default();
        for (line, key, value) in key_values(text)? {
            let key = if key == "method" { "methods".to_string() } else { key };
            if !KEYS.contains(&key.as_str()) {
                return Err(parse_error(line, format!("unknown key {key:?}")));
            }
            settings.values.insert(key, value);
        }
        Ok(settings)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_lists_follow_declaration_order() {
        assert_eq!(parse_methods("fast,arnoldi,fast").unwrap(), vec![Method::Arnoldi, Method::Fast]);
        assert!(parse_methods("fast,lanczos").is_err());
        assert!(parse_methods(" , ").is_err());
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn settings_file_and_overrides() {
        let mut s = Settings::parse("# experiment\ncase = arc\niters = 20 # short\nmethod = fast, bm\nshift = 0.3, 0.1\n").unwrap();
        s.set("seed", "9");
        let c = ExperimentConfig::from_settings(&s).unwrap();
        assert_eq!(c.case, CaseSpec::Preset { name: "arc".into(), n: None });
        assert_eq!((c.iters, c.seed), (20, 9));
        assert_eq!(c.methods, vec![Method::Fast, Method::Bm]);
        assert_eq!(c.shift, Complex64::new(0.3, 0.1));
        s.set("iters", "40");
        assert_eq!(ExperimentConfig::from_settings(&s).unwrap().iters, 40);
    }

    #[test]
    fn defaults_and_errors() {
        let mut s = Settings::default();
        assert!(matches!(ExperimentConfig::from_settings(&s), Err(CliError::Config(_))));
        s.set("case", "identity");
        let c = ExperimentConfig::from_settings(&s).unwrap();
        assert_eq!(c.iters, 10);
        assert_eq!(c.methods, Method::DEFAULT.to_vec());
        s.set("case", "matrix.mtx");
        assert!(matches!(ExperimentConfig::from_settings(&s), Err(CliError::Config(_))));
        s.set("cert", "matrix.cert");
        assert!(matches!(ExperimentConfig::from_settings(&s).unwrap().case, CaseSpec::Files { .. }));
        s.set("log_vv", "true");
        assert!(ExperimentConfig::from_settings(&s).is_err());
        assert!(matches!(Settings::parse("colour = red"), Err(CliError::Parse { line: 1, .. })));
    }

    #[test]
    fn iteration_count_is_bounded_by_dimension() {
        let c = ExperimentConfig::preset("identity", None, 11);
        assert!(c.check_dimension(10).is_err());
        assert!(c.check_dimension(11).is_ok());
    }
}
