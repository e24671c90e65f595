//! Run configuration: a closed set of `key = value` settings read from a
//! file and/or command-line flags, flags taking precedence.
//!
//! File syntax is one `key = value` per line; `#` starts a comment and blank
//! lines are ignored. Lists are comma separated (`0.5,0.6,0.7`) or ranges
//! `start:step:stop` with both ends included.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{auto_n_max, default_sample_count, InitialState, ProtocolSpec};
use crate::meanfield::Tolerance;
use crate::model::{two_j_from, ModelParams};
use crate::trajectory::{Engine, Observable};

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Default,
    File,
    Flag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Default => "default",
            Provenance::File => "file",
            Provenance::Flag => "flag",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Family of initial states as named in configs; its numeric labels live in
/// separate keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialName {
    StationaryDicke,
    StationaryCircle,
    Fock,
    NearlyFock,
    GroundState,
    Explicit,
}

impl InitialName {
    const ALL: [(InitialName, &'static str); 6] = [
        (InitialName::StationaryDicke, "stationary_dicke"),
        (InitialName::StationaryCircle, "stationary_circle"),
        (InitialName::Fock, "fock"),
        (InitialName::NearlyFock, "nearly_fock"),
        (InitialName::GroundState, "ground_state"),
        (InitialName::Explicit, "explicit"),
    ];

    fn name(self) -> &'static str {
        InitialName::ALL.iter().find(|(k, _)| *k == self).unwrap().1
    }
}

/// Typed settings. Every [`ProtocolSpec`] field is reachable from a key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub engine: Option<Engine>,
    pub initial: Option<InitialName>,
    pub epsilon: f64,
    pub alpha: Complex64,
    pub zeta: Complex64,
    pub driven: bool,
    pub n_revolutions: u32,
    /// `None` means `100·n_R + 1`.
    pub sample_count: Option<usize>,
    pub observables: Vec<Observable>,
    pub omega: f64,
    pub omega0: f64,
    pub lambda: Option<f64>,
    pub two_j: u32,
    pub delta_phi: f64,
    /// `None` chooses the cutoff from the initial state.
    pub n_max: Option<usize>,
    pub rtol: f64,
    pub atol: f64,
    pub lambda_values: Option<Vec<f64>>,
    pub delta_phi_values: Option<Vec<f64>>,
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Significant digits of numeric CSV fields.
    pub precision: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: None,
            initial: None,
            epsilon: 3.0,
            alpha: Complex64::new(0.0, 0.0),
            zeta: Complex64::new(0.0, 0.0),
            driven: true,
            n_revolutions: 1,
            sample_count: None,
            observables: vec![Observable::MeanPhotonScaled],
            omega: 1.0,
            omega0: 1.0,
            lambda: None,
            two_j: 12,
            delta_phi: 1.0,
            n_max: None,
            rtol: Tolerance::default().rtol,
            atol: Tolerance::default().atol,
            lambda_values: None,
            delta_phi_values: None,
            out: None,
            format: Format::Csv,
            precision: 17,
        }
    }
}

/// Every accepted key, in echo order.
pub const KEYS: [&str; 24] = [
    "engine",
    "initial",
    "epsilon",
    "alpha_re",
    "alpha_im",
    "zeta_re",
    "zeta_im",
    "driven",
    "n_revolutions",
    "sample_count",
    "observables",
    "omega",
    "omega0",
    "lambda",
    "j",
    "delta_phi",
    "n_max",
    "rtol",
    "atol",
    "lambda_values",
    "delta_phi_values",
    "out",
    "format",
    "precision",
];

/// A validated configuration together with the source of every key.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub provenance: BTreeMap<String, Provenance>,
}

/// One line of the configuration echo.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EchoEntry {
    pub key: String,
    pub value: String,
    pub source: Provenance,
}

fn parse_value<T: FromStr>(key: &str, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::config(key, format!("expected {what}, got `{raw}`")))
}

fn parse_float(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = parse_value(key, raw, "a number")?;
    if !v.is_finite() {
        return Err(Error::config(key, format!("must be finite, got `{raw}`")));
    }
    Ok(v)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{raw}`"))),
    }
}

/// `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    let values = if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::config(key, format!("range must be start:step:stop, got `{raw}`")));
        }
        let (start, step, stop) = (
            parse_float(key, parts[0])?,
            parse_float(key, parts[1])?,
            parse_float(key, parts[2])?,
        );
        if !(step > 0.0) || stop < start {
            return Err(Error::config(key, "range needs step > 0 and stop >= start"));
        }
        let intervals = ((stop - start) / step).round();
        if ((start + intervals * step) - stop).abs() > 1e-9 * step.max(stop.abs()) {
            return Err(Error::config(key, format!("stop {stop} is not reached from {start} in steps of {step}")));
        }
        if intervals > 1e6 {
            return Err(Error::config(key, "range has more than a million points"));
        }
        let n = intervals as usize;
        (0..=n)
            .map(|i| if i == n { stop } else { start + i as f64 * step })
            .collect()
    } else {
        raw.split(',')
            .map(|s| parse_float(key, s.trim()))
            .collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(key, "values must increase strictly"));
    }
    Ok(values)
}

fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key {
            "engine" => self.engine = Some(raw.parse().map_err(|e: String| Error::config(key, e))?),
            "initial" => {
                let name = InitialName::ALL
                    .iter()
                    .find(|(_, n)| *n == raw)
                    .map(|(k, _)| *k)
                    .ok_or_else(|| {
                        let names: Vec<_> = InitialName::ALL.iter().map(|(_, n)| *n).collect();
                        Error::config(key, format!("unknown initial state `{raw}` (one of {})", names.join(", ")))
                    })?;
                self.initial = Some(name);
            }
            "epsilon" => self.epsilon = parse_float(key, raw)?,
            "alpha_re" => self.alpha.re = parse_float(key, raw)?,
            "alpha_im" => self.alpha.im = parse_float(key, raw)?,
            "zeta_re" => self.zeta.re = parse_float(key, raw)?,
            "zeta_im" => self.zeta.im = parse_float(key, raw)?,
            "driven" => self.driven = parse_bool(key, raw)?,
            "n_revolutions" => {
                let n: u32 = parse_value(key, raw, "a positive integer")?;
                if n == 0 {
                    return Err(Error::config(key, "must be >= 1"));
                }
                self.n_revolutions = n;
            }
            "sample_count" => {
                self.sample_count = if raw == "auto" {
                    None
                } else {
                    let n: usize = parse_value(key, raw, "an integer >= 2 or `auto`")?;
                    if n < 2 {
                        return Err(Error::config(key, "must be >= 2"));
                    }
                    Some(n)
                }
            }
            "observables" => {
                let list = raw
                    .split(',')
                    .map(|s| s.trim().parse::<Observable>().map_err(|e| Error::config(key, e)))
                    .collect::<Result<Vec<_>>>()?;
                if list.is_empty() {
                    return Err(Error::config(key, "needs at least one observable"));
                }
                self.observables = list;
            }
            "omega" => self.omega = positive(key, parse_float(key, raw)?)?,
            "omega0" => self.omega0 = positive(key, parse_float(key, raw)?)?,
            "lambda" => {
                let l = parse_float(key, raw)?;
                if l < 0.0 {
                    return Err(Error::config(key, format!("must be >= 0, got {l}")));
                }
                self.lambda = Some(l);
            }
            "j" => {
                let j = parse_float(key, raw)?;
                self.two_j = two_j_from(j).map_err(|_| {
                    Error::config(key, format!("must be a positive half-integer (2j integer), got {raw}"))
                })?;
            }
            "delta_phi" => self.delta_phi = positive(key, parse_float(key, raw)?)?,
            "n_max" => {
                self.n_max = if raw == "auto" {
                    None
                } else {
                    let n: usize = parse_value(key, raw, "an integer >= 1 or `auto`")?;
                    if n < 1 {
                        return Err(Error::config(key, "must be >= 1"));
                    }
                    Some(n)
                }
            }
            "rtol" => self.rtol = positive(key, parse_float(key, raw)?)?,
            "atol" => self.atol = positive(key, parse_float(key, raw)?)?,
            "lambda_values" => {
                let v = parse_list(key, raw)?;
                if v[0] < 0.0 {
                    return Err(Error::config(key, "couplings must be >= 0"));
                }
                self.lambda_values = Some(v);
            }
            "delta_phi_values" => {
                let v = parse_list(key, raw)?;
                if v[0] <= 0.0 {
                    return Err(Error::config(key, "velocities must be > 0"));
                }
                self.delta_phi_values = Some(v);
            }
            "out" => self.out = if raw == "-" { None } else { Some(PathBuf::from(raw)) },
            "format" => {
                self.format = match raw {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(Error::config(key, format!("expected csv or json, got `{raw}`"))),
                }
            }
            "precision" => {
                let p: usize = parse_value(key, raw, "an integer in 1..=17")?;
                if !(1..=17).contains(&p) {
                    return Err(Error::config(key, format!("must lie in 1..=17, got {p}")));
                }
                self.precision = p;
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Current value of `key` in re-parseable form, `None` when unset.
    pub fn value(&self, key: &str) -> Option<String> {
        let f = |v: f64| format!("{v:?}");
        Some(match key {
            "engine" => self.engine?.to_string(),
            "initial" => self.initial?.name().to_string(),
            "epsilon" => f(self.epsilon),
            "alpha_re" => f(self.alpha.re),
            "alpha_im" => f(self.alpha.im),
            "zeta_re" => f(self.zeta.re),
            "zeta_im" => f(self.zeta.im),
            "driven" => self.driven.to_string(),
            "n_revolutions" => self.n_revolutions.to_string(),
            "sample_count" => self.sample_count.map_or("auto".into(), |n| n.to_string()),
            "observables" => self
                .observables
                .iter()
                .map(|o| o.name())
                .collect::<Vec<_>>()
                .join(","),
            "omega" => f(self.omega),
            "omega0" => f(self.omega0),
            "lambda" => f(self.lambda?),
            "j" => {
                if self.two_j.is_multiple_of(2) {
                    (self.two_j / 2).to_string()
                } else {
                    format!("{}.5", self.two_j / 2)
                }
            }
            "delta_phi" => f(self.delta_phi),
            "n_max" => self.n_max.map_or("auto".into(), |n| n.to_string()),
            "rtol" => f(self.rtol),
            "atol" => f(self.atol),
            "lambda_values" => format_list(self.lambda_values.as_ref()?),
            "delta_phi_values" => format_list(self.delta_phi_values.as_ref()?),
            "out" => self.out.as_ref().map_or("-".into(), |p| p.display().to_string()),
            "format" => match self.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
            "precision" => self.precision.to_string(),
            _ => return None,
        })
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    fn required<T>(key: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| Error::config(key, "is required"))
    }

    fn initial_state(&self) -> Result<InitialState> {
        Ok(match RunConfig::required("initial", self.initial)? {
            InitialName::StationaryDicke => InitialState::StationaryDicke,
            InitialName::StationaryCircle => InitialState::StationaryCircle,
            InitialName::Fock => InitialState::Fock,
            InitialName::NearlyFock => InitialState::NearlyFock { epsilon: self.epsilon },
            InitialName::GroundState => InitialState::GroundState,
            InitialName::Explicit => InitialState::Explicit {
                alpha: self.alpha,
                zeta: self.zeta,
            },
        })
    }

    /// Protocol described by this configuration. `lambda` may be omitted
    /// when `lambda_override` provides one (as λ-sweeps do).
    pub fn protocol(&self, lambda_override: Option<f64>) -> Result<ProtocolSpec> {
        let engine = RunConfig::required("engine", self.engine)?;
        let initial = self.initial_state()?;
        let lambda = match lambda_override {
            Some(l) => l,
            None => RunConfig::required("lambda", self.lambda)?,
        };
        let mut params = ModelParams::new(self.omega0, self.omega, lambda, self.j(), self.delta_phi)
            .map_err(|e| Error::config("model", e.to_string()))?;
        params.n_max = match self.n_max {
            Some(n) => n,
            None => {
                // Largest cutoff needed anywhere on the sweep axes.
                let lambdas = self.lambda_values.clone().unwrap_or_default();
                let velocities = self.delta_phi_values.clone().unwrap_or_default();
                let mut best = auto_n_max(&initial, &params);
                for &l in lambdas.iter().chain(std::iter::once(&lambda)) {
                    for &d in velocities.iter().chain(std::iter::once(&self.delta_phi)) {
                        best = best.max(auto_n_max(&initial, &params.with_lambda(l).with_delta_phi(d)));
                    }
                }
                best
            }
        };
        let spec = ProtocolSpec {
            engine,
            initial,
            driven: self.driven,
            n_revolutions: self.n_revolutions,
            sample_count: self.sample_count.unwrap_or_else(|| default_sample_count(self.n_revolutions)),
            observables: self.observables.clone(),
            params,
            tol: Tolerance {
                rtol: self.rtol,
                atol: self.atol,
            },
        };
        spec.validate().map_err(|e| match e {
            Error::Domain(msg) if msg.contains("scaled_parity") => Error::config("observables", msg),
            Error::Domain(msg) if msg.contains("ground_state") => Error::config("initial", msg),
            other => other,
        })?;
        Ok(spec)
    }
}

/// Splits `key = value` lines, dropping comments and blank lines.
pub fn parse_file_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected key = value, got `{content}`"),
            )
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Turns `--key value` / `--key=value` arguments into pairs.
pub fn parse_flag_args(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::config(arg.clone(), "expected --key value"))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::config(body, "missing value"))?;
                (body.to_string(), v.clone())
            }
        };
        pairs.push((key.replace('-', "_"), value));
    }
    Ok(pairs)
}

/// Applies file settings, then flag settings, on top of the defaults.
pub fn parse_config(file: &[(String, String)], flags: &[(String, String)]) -> Result<ResolvedConfig> {
    let mut config = RunConfig::default();
    let mut provenance: BTreeMap<String, Provenance> =
        KEYS.iter().map(|k| (k.to_string(), Provenance::Default)).collect();
    for (source, pairs) in [(Provenance::File, file), (Provenance::Flag, flags)] {
        for (key, value) in pairs {
            if key == "config" {
                return Err(Error::config(key, "only allowed as a command-line option"));
            }
            config.set(key, value)?;
            provenance.insert(key.clone(), source);
        }
    }
    Ok(ResolvedConfig { config, provenance })
}

/// Parses the text of a config file alone.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    Ok(parse_config(&parse_file_text(text)?, &[])?.config)
}

impl ResolvedConfig {
    /// All keys whose value is set, with their sources.
    pub fn echo(&self) -> Vec<EchoEntry> {
        KEYS.iter()
            .filter_map(|&k| {
                let value = self.config.value(k)?;
                Some(EchoEntry {
                    key: k.to_string(),
                    value,
                    source: self.provenance.get(k).copied().unwrap_or(Provenance::Default),
                })
            })
            .collect()
    }

    /// The echo as config-file text, each line annotated with its source.
    pub fn echo_text(&self) -> String {
        self.echo()
            .iter()
            .map(|e| format!("{} = {}  # {}\n", e.key, e.value, e.source))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let r = parse_config(&pairs(&[("engine", "meanfield"), ("initial", "fock"), ("lambda", "0.9")]), &[]).unwrap();
        let c = &r.config;
        assert_eq!((c.omega, c.omega0, c.delta_phi, c.n_revolutions), (1.0, 1.0, 1.0, 1));
        assert_eq!(c.j(), 6.0);
        assert_eq!(r.provenance["omega"], Provenance::Default);
        assert_eq!(r.provenance["lambda"], Provenance::File);
        let spec = c.protocol(None).unwrap();
        assert_eq!(spec.params.lambda, 0.9);
        assert_eq!(spec.sample_count, 101);
    }

    #[test]
    fn half_integer_constraint_is_named() {
        let err = parse_config(&pairs(&[("j", "0.75")]), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`j`") && msg.contains("half-integer"), "{msg}");
        assert_eq!(err.exit_code(), 1);
        parse_config(&pairs(&[("j", "2.5")]), &[]).unwrap();
    }

    #[test]
    fn flags_override_file() {
        let r = parse_config(&pairs(&[("lambda", "0.4"), ("j", "3")]), &pairs(&[("lambda", "1.1")])).unwrap();
        assert_eq!(r.config.lambda, Some(1.1));
        assert_eq!(r.provenance["lambda"], Provenance::Flag);
        assert_eq!(r.provenance["j"], Provenance::File);
        assert!(r.echo_text().contains("lambda = 1.1  # flag"));
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(matches!(parse_config(&pairs(&[("lamda", "1")]), &[]), Err(Error::Config { key, .. }) if key == "lamda"));
        assert!(parse_config(&pairs(&[("omega", "-1")]), &[]).is_err());
        assert!(parse_config(&pairs(&[("driven", "maybe")]), &[]).is_err());
        assert!(parse_config(&pairs(&[("observables", "parity,photons")]), &[]).is_err());
        assert!(parse_config(&pairs(&[("precision", "18")]), &[]).is_err());
        assert!(parse_config(&pairs(&[("lambda_values", "0.3,0.2")]), &[]).is_err());
        let missing = parse_config(&pairs(&[("engine", "quantum")]), &[]).unwrap().config.protocol(None);
        assert!(matches!(missing, Err(Error::Config { key, .. }) if key == "initial"));
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("k", "0.5, 1, 2").unwrap(), vec![0.5, 1.0, 2.0]);
        let r = parse_list("k", "0.5:0.25:1.5").unwrap();
        assert_eq!(r, vec![0.5, 0.75, 1.0, 1.25, 1.5]);
        let fine = parse_list("k", "0.5:0.01:1.2").unwrap();
        assert_eq!(fine.len(), 71);
        assert_eq!(*fine.last().unwrap(), 1.2);
        assert!(parse_list("k", "0:0.3:1").is_err());
    }

    #[test]
    fn file_syntax() {
        let text = "# comment\nengine = quantum\n\ninitial=ground_state # trailing\nj = 1.5\n";
        let c = parse_config_text(text).unwrap();
        assert_eq!(c.engine, Some(Engine::Quantum));
        assert_eq!(c.initial, Some(InitialName::GroundState));
        assert_eq!(c.two_j, 3);
        assert!(parse_config_text("engine quantum").is_err());
    }

    #[test]
    fn flag_arguments() {
        let args: Vec<String> = ["--lambda", "0.8", "--n-max=40", "--format", "json"].iter().map(|s| s.to_string()).collect();
        let p = parse_flag_args(&args).unwrap();
        assert_eq!(p, pairs(&[("lambda", "0.8"), ("n_max", "40"), ("format", "json")]));
        assert!(parse_flag_args(&["lambda".to_string()]).is_err());
        assert!(parse_flag_args(&["--lambda".to_string()]).is_err());
    }
}
