//! Run configuration: `key = value` files with `[section]` headers, merged
//! with command-line overrides and resolved against the case defaults.

use std::path::{Path, PathBuf};

use icap_core::cases::{CaseName, CaseSetup, Scheme};
use icap_core::integrate::Integrator;
use icap_core::mlp::MlpConfig;
use icap_core::{IcapError, Result};
use ini::Ini;

/// Every accepted key and the section it belongs to.
const KEYS: &[(&str, &str)] = &[
    ("case", "case"),
    ("n", "case"),
    ("t_end", "case"),
    ("subsamples", "case"),
    ("artefact", "case"),
    ("scheme", "scheme"),
    ("beta", "scheme"),
    ("integrator", "scheme"),
    ("cfl", "scheme"),
    ("dir", "output"),
    ("snapshots", "output"),
    ("log_smearing", "output"),
    ("grids", "convergence"),
];

/// Unresolved settings; `None` means "use the case default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub case: Option<String>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub subsamples: Option<usize>,
    pub artefact: Option<bool>,
    pub scheme: Option<String>,
    pub beta: Option<f64>,
    pub integrator: Option<String>,
    pub cfl: Option<f64>,
    pub dir: Option<PathBuf>,
    pub snapshots: Option<Vec<f64>>,
    pub log_smearing: Option<bool>,
    pub grids: Option<Vec<usize>>,
}

fn bad(key: &str, value: &str) -> IcapError {
    IcapError::Config(format!("invalid value '{value}' for key '{key}'"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| IcapError::Config(format!("config syntax: {e}")))?;
        let mut cfg = Self::default();
        for (section, props) in ini.iter() {
            if let Some(s) = section {
                if !KEYS.iter().any(|(_, sec)| *sec == s) {
                    return Err(IcapError::Config(format!("unknown section [{s}]")));
                }
            }
            for (key, value) in props.iter() {
                let Some((_, home)) = KEYS.iter().find(|(k, _)| *k == key) else {
                    return Err(IcapError::Config(format!("unknown key '{key}'")));
                };
                if section.is_some_and(|s| s != *home) {
                    return Err(IcapError::Config(format!("key '{key}' belongs in [{home}]")));
                }
                cfg.set(key, value)?;
            }
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "case" => self.case = Some(v.to_string()),
            "n" => self.n = Some(num(key, v)?),
            "t_end" => self.t_end = Some(num(key, v)?),
            "subsamples" => self.subsamples = Some(num(key, v)?),
            "artefact" => self.artefact = Some(flag(key, v)?),
            "scheme" => self.scheme = Some(v.to_string()),
            "beta" => self.beta = Some(num(key, v)?),
            "integrator" => self.integrator = Some(v.to_string()),
            "cfl" => self.cfl = Some(num(key, v)?),
            "dir" => self.dir = Some(PathBuf::from(v)),
            "snapshots" => self.snapshots = Some(list(key, v)?),
            "log_smearing" => self.log_smearing = Some(flag(key, v)?),
            "grids" => self.grids = Some(list(key, v)?),
            _ => unreachable!("key table and setter agree"),
        }
        Ok(())
    }

    /// Values set in `other` win.
    pub fn overlay(self, other: RunConfig) -> RunConfig {
        RunConfig {
            case: other.case.or(self.case),
            n: other.n.or(self.n),
            t_end: other.t_end.or(self.t_end),
            subsamples: other.subsamples.or(self.subsamples),
            artefact: other.artefact.or(self.artefact),
            scheme: other.scheme.or(self.scheme),
            beta: other.beta.or(self.beta),
            integrator: other.integrator.or(self.integrator),
            cfl: other.cfl.or(self.cfl),
            dir: other.dir.or(self.dir),
            snapshots: other.snapshots.or(self.snapshots),
            log_smearing: other.log_smearing.or(self.log_smearing),
            grids: other.grids.or(self.grids),
        }
    }

    /// Case parameters with every unset value taken from the case defaults.
    pub fn resolve(&self) -> Result<CaseSetup> {
        let name = self
            .case
            .as_deref()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| IcapError::Config("no case given (see `icap list-cases`)".into()))?;
        let case: CaseName = name.parse()?;
        let mut setup = if self.artefact.unwrap_or(false) {
            case.artefact_setup()
                .ok_or_else(|| IcapError::Config(format!("case {case} has no artefact configuration")))?
        } else {
            case.defaults()
        };
        match (&self.scheme, self.beta) {
            (Some(s), beta) => {
                if beta.is_some() && s != "mlp" {
                    return Err(IcapError::Config("beta applies to the mlp scheme only".into()));
                }
                setup.scheme = Scheme::parse(s, beta.unwrap_or(2.0))?;
            }
            (None, Some(beta)) => match setup.scheme {
                Scheme::Mlp(_) => setup.scheme = Scheme::Mlp(MlpConfig::new(beta)?),
                Scheme::Muscl(_) => return Err(IcapError::Config("beta applies to the mlp scheme only".into())),
            },
            (None, None) => {}
        }
        if let Some(name) = &self.integrator {
            setup.integrator = [Integrator::Euler, Integrator::Rk2, Integrator::Rk2Midpoint]
                .into_iter()
                .find(|i| i.name() == name)
                .ok_or_else(|| IcapError::Config(format!("unknown integrator '{name}'")))?;
        }
        if let Some(cfl) = self.cfl {
            setup.cfl = cfl;
        }
        if let Some(n) = self.n {
            setup.n = n;
        }
        if let Some(t) = self.t_end {
            setup.t_end = t;
        }
        if let Some(k) = self.subsamples {
            setup.subsamples = k;
        }
        Ok(setup)
    }
}
