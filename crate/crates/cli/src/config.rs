//! Run configuration: a flat `key = value` file merged with command-line
//! flags. Keys are the long flag names without dashes (`rel-tol`, `kmax`,
//! `basis`, ...); flags override the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cknlab_core::variational::DEFAULT_SCAN_K_MAX;
use cknlab_core::{FamilyId, InequalityParams, QuadratureSpec, QuotientFormula};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_ENV: &str = "CKNLAB_CONFIG";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MODE_SCAN_K_MAX: u32 = 64;
pub const DEFAULT_MINIMIZE_BASIS: [usize; 3] = [4, 8, 16];
pub const DEFAULT_PROBE_BASIS: [usize; 4] = [4, 8, 16, 24];

/// Keys accepted in a config file, in manifest order.
pub const KEYS: [&str; 18] = [
    "command",
    "n",
    "alpha",
    "beta",
    "k",
    "kmax",
    "basis",
    "a",
    "b",
    "seed",
    "jobs",
    "format",
    "out",
    "rel-tol",
    "formula",
    "family",
    "test-function",
    "coeffs",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    ModeScan,
    Quotient,
    Minimize,
    ProbeConjecture,
    Selftest,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::ModeScan => "mode-scan",
            Command::Quotient => "quotient",
            Command::Minimize => "minimize",
            Command::ProbeConjecture => "probe-conjecture",
            Command::Selftest => "selftest",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        [
            Command::Constants,
            Command::ModeScan,
            Command::Quotient,
            Command::Minimize,
            Command::ProbeConjecture,
            Command::Selftest,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| CliError::precondition(format!("unknown command '{s}'")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
    PlotData,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::PlotData => "plot-data",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plot-data" => Ok(OutputFormat::PlotData),
            _ => Err(CliError::precondition(format!(
                "unknown format '{s}' (expected csv, json or plot-data)"
            ))),
        }
    }
}

/// Which profile `quotient` evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ProfileSelector {
    TestFunction,
    Family { id: FamilyId, a: f64, b: f64 },
    Coefficients { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: InequalityParams,
    pub quadrature: QuadratureSpec,
    pub basis_sizes: Vec<usize>,
    pub k_max: u32,
    pub k: u32,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub formula: QuotientFormula,
    pub selector: Option<ProfileSelector>,
}

/// Raw `key -> value` settings before validation.
pub type Settings = BTreeMap<String, String>;

/// Parses a flat config file. Blank lines and `#` comments are skipped;
/// `key = value` and `key value` are both accepted.
pub fn parse_config_text(text: &str) -> CliResult<Settings> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, "true"),
            },
        };
        let key = key.trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::precondition(format!(
                "config line {}: unknown key '{key}'",
                i + 1
            )));
        }
        out.insert(key, value.to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<Settings> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::precondition(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn parse<T: FromStr>(s: &Settings, key: &str) -> CliResult<Option<T>>
where
    T::Err: fmt::Display,
{
    s.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::precondition(format!("bad value for {key}: '{v}' ({e})")))
        })
        .transpose()
}

fn parse_bool(s: &Settings, key: &str) -> CliResult<bool> {
    match s.get(key).map(String::as_str) {
        None | Some("false") | Some("0") | Some("no") => Ok(false),
        Some("true") | Some("1") | Some("yes") | Some("") => Ok(true),
        Some(v) => Err(CliError::precondition(format!("bad value for {key}: '{v}'"))),
    }
}

pub fn parse_basis(v: &str) -> CliResult<Vec<usize>> {
    v.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| CliError::precondition(format!("bad basis size '{t}': {e}")))
        })
        .collect()
}

impl RunConfig {
    /// Validates merged settings for `command`.
    pub fn from_settings(command: Command, s: &Settings) -> CliResult<Self> {
        if let Some(c) = s.get("command") {
            if c != command.as_str() {
                return Err(CliError::precondition(format!(
                    "config is for '{c}' but '{command}' was requested"
                )));
            }
        }
        let n: Option<u32> = parse(s, "n")?;
        let n = match (command, n) {
            (_, Some(n)) => n,
            (Command::ProbeConjecture, None) => 4,
            (Command::Selftest, None) => 2,
            _ => return Err(CliError::precondition("--n is required".into())),
        };
        let alpha = parse(s, "alpha")?.unwrap_or(0.0);
        let mut params = InequalityParams::new(n, alpha).map_err(CliError::from)?;
        if let Some(beta) = parse::<f64>(s, "beta")? {
            params = params.with_beta(beta)?;
        }

        let mut quadrature = QuadratureSpec::default();
        if let Some(t) = parse::<f64>(s, "rel-tol")? {
            quadrature = quadrature.with_rel_tol(t);
        }
        quadrature.validate()?;

        let basis_sizes = match s.get("basis") {
            Some(v) => parse_basis(v)?,
            None => match command {
                Command::ProbeConjecture => DEFAULT_PROBE_BASIS.to_vec(),
                _ => DEFAULT_MINIMIZE_BASIS.to_vec(),
            },
        };
        let k_max = parse(s, "kmax")?.unwrap_or(match command {
            Command::ModeScan => DEFAULT_MODE_SCAN_K_MAX,
            _ => DEFAULT_SCAN_K_MAX,
        });
        let k = parse(s, "k")?.unwrap_or(0);
        let seed = parse(s, "seed")?.unwrap_or(DEFAULT_SEED);
        let jobs: Option<usize> = parse(s, "jobs")?;
        if jobs == Some(0) {
            return Err(CliError::precondition("--jobs must be at least 1".into()));
        }
        let output_format = parse(s, "format")?.unwrap_or_default();
        let output_path = s.get("out").map(PathBuf::from);
        let formula = match s.get("formula") {
            Some(f) => f.parse::<QuotientFormula>()?,
            None => QuotientFormula::J,
        };

        let test_function = parse_bool(s, "test-function")?;
        let family: Option<FamilyId> = s.get("family").map(|f| f.parse()).transpose()?;
        let coeffs = s.get("coeffs").map(PathBuf::from);
        let chosen = test_function as u8 + family.is_some() as u8 + coeffs.is_some() as u8;
        if chosen > 1 {
            return Err(CliError::precondition(
                "choose one of --test-function, --family, --coeffs".into(),
            ));
        }
        let selector = if test_function {
            Some(ProfileSelector::TestFunction)
        } else if let Some(id) = family {
            Some(ProfileSelector::Family {
                id,
                a: parse(s, "a")?.unwrap_or(1.0),
                b: parse(s, "b")?.unwrap_or(if id == FamilyId::ThmC2 { -1.0 } else { 1.0 }),
            })
        } else {
            coeffs.map(|path| ProfileSelector::Coefficients { path })
        };

        Ok(Self {
            command,
            params,
            quadrature,
            basis_sizes,
            k_max,
            k,
            seed,
            jobs,
            output_format,
            output_path,
            formula,
            selector,
        })
    }

    /// The config as a flat file that reproduces this run.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings::new();
        let mut put = |k: &str, v: String| {
            s.insert(k.to_string(), v);
        };
        put("command", self.command.to_string());
        put("n", self.params.n.to_string());
        put("alpha", format!("{:?}", self.params.alpha));
        if let Some(b) = self.params.beta {
            put("beta", format!("{b:?}"));
        }
        put("k", self.k.to_string());
        put("kmax", self.k_max.to_string());
        put(
            "basis",
            self.basis_sizes
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("seed", self.seed.to_string());
        if let Some(j) = self.jobs {
            put("jobs", j.to_string());
        }
        put("format", self.output_format.as_str().to_string());
        if let Some(p) = &self.output_path {
            put("out", p.display().to_string());
        }
        put("rel-tol", format!("{:?}", self.quadrature.rel_tol));
        put("formula", self.formula.to_string());
        match &self.selector {
            Some(ProfileSelector::TestFunction) => put("test-function", "true".into()),
            Some(ProfileSelector::Family { id, a, b }) => {
                put("family", id.to_string());
                put("a", format!("{a:?}"));
                put("b", format!("{b:?}"));
            }
            Some(ProfileSelector::Coefficients { path }) => {
                put("coeffs", path.display().to_string())
            }
            None => {}
        }
        s
    }

    pub fn to_config_text(&self) -> String {
        let s = self.to_settings();
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = s.get(key) {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }

    pub fn minimize_options(&self) -> cknlab_core::MinimizeOptions {
        cknlab_core::MinimizeOptions {
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let s = parse_config_text("# sweep\nn = 5\nalpha 0.5\n--kmax=12\ntest_function\n").unwrap();
        assert_eq!(s["n"], "5");
        assert_eq!(s["alpha"], "0.5");
        assert_eq!(s["kmax"], "12");
        assert_eq!(s["test-function"], "true");
        assert!(parse_config_text("bogus = 1").is_err());
    }

    #[test]
    fn defaults() {
        let mut s = Settings::new();
        s.insert("n".into(), "5".into());
        let c = RunConfig::from_settings(Command::Minimize, &s).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!(c.basis_sizes, vec![4, 8, 16]);
        assert!(RunConfig::from_settings(Command::Constants, &Settings::new()).is_err());
    }

    #[test]
    fn manifest_reproduces_config() {
        let mut s = Settings::new();
        for (k, v) in [("n", "3"), ("alpha", "0.1"), ("family", "thm1.2-2"), ("b", "2.5"), ("jobs", "2")] {
            s.insert(k.into(), v.into());
        }
        let c = RunConfig::from_settings(Command::Quotient, &s).unwrap();
        let back = parse_config_text(&c.to_config_text()).unwrap();
        assert_eq!(RunConfig::from_settings(Command::Quotient, &back).unwrap(), c);
    }
}
