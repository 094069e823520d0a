//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # H6 sweep
//! system = 6
//! spacings = 1.5, 2.0, 3.0
//! cc_ranks = 2, 3, 4
//! active_spaces = {2,3,4,5}, {1,2,5,6}
//! transforms = exact, bch:3
//! solvers = diag, pds:3
//! baselines = hf, fci, cc, active_fci
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Largest chain the dense sector algebra is meant for.
pub const MAX_ATOMS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Transform {
    Exact,
    /// Commutator series truncated after `max_r` nested commutators.
    Bch(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Solver {
    Diag,
    Pds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Baseline {
    Hf,
    Fci,
    Cc,
    ActiveFci,
    /// Placeholder rows for CASSCF(4,4), which is not computed.
    Casscf,
}

/// State the PDS moments are taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdsReference {
    /// The CAS reference determinant.
    Hf,
    /// Equal weights on all CAS determinants.
    Uniform,
    /// A single CAS determinant by position (0 = reference).
    Determinant(usize),
}

impl fmt::Display for PdsReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdsReference::Hf => write!(f, "hf"),
            PdsReference::Uniform => write!(f, "uniform"),
            PdsReference::Determinant(k) => write!(f, "cas:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    /// Number of hydrogen atoms in the chain.
    pub system: usize,
    /// H-H distances in Bohr.
    pub spacings: Vec<f64>,
    pub basis: String,
    pub cc_ranks: Vec<usize>,
    /// Active spaces as 1-based spatial orbital indices.
    pub active_spaces: Vec<Vec<usize>>,
    pub transforms: Vec<Transform>,
    pub solvers: Vec<Solver>,
    pub baselines: BTreeSet<Baseline>,
    pub pds_reference: PdsReference,
    /// Coupled-cluster convergence threshold on the largest residual.
    pub cc_tol: f64,
    pub export_heff: bool,
}

impl ExperimentConfig {
    /// Defaults for everything except the system and geometries.
    pub fn new(name: &str, system: usize, spacings: &[f64]) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            system,
            spacings: spacings.to_vec(),
            basis: "sto-3g".to_string(),
            cc_ranks: vec![2, 3, 4],
            active_spaces: Vec::new(),
            transforms: vec![Transform::Exact],
            solvers: vec![Solver::Diag],
            baselines: [Baseline::Fci, Baseline::Cc].into_iter().collect(),
            pds_reference: PdsReference::Hf,
            cc_tol: 1e-9,
            export_heff: false,
        }
    }

    /// Checks cross-key constraints, returning the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.system < 2 || !self.system.is_multiple_of(2) || self.system > MAX_ATOMS {
            return Err((
                "system",
                format!(
                    "expected an even atom count between 2 and {MAX_ATOMS}, got {}",
                    self.system
                ),
            ));
        }
        if self.spacings.is_empty() {
            return Err(("spacings", "no spacings given".into()));
        }
        if let Some(r) = self.spacings.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(("spacings", format!("{r} is not a positive distance")));
        }
        if self.basis != "sto-3g" {
            return Err(("basis", format!("unsupported basis `{}`", self.basis)));
        }
        if let Some(rank) = self
            .cc_ranks
            .iter()
            .find(|&&r| !(2..=4).contains(&r) || r > self.system)
        {
            return Err((
                "cc_ranks",
                format!("rank {rank} is not valid for {} electrons", self.system),
            ));
        }
        for space in &self.active_spaces {
            if let Some(k) = space.iter().find(|&&k| k == 0 || k > self.system) {
                return Err((
                    "active_spaces",
                    format!("orbital {k} outside 1..{}", self.system),
                ));
            }
        }
        if !(self.cc_tol > 0.0) {
            return Err(("cc_tol", "must be positive".into()));
        }
        Ok(())
    }
}

const KEYS: &[&str] = &[
    "name",
    "system",
    "spacings",
    "basis",
    "cc_ranks",
    "active_spaces",
    "transforms",
    "solvers",
    "baselines",
    "pds_reference",
    "cc_tol",
    "export_heff",
];

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("experiment");
    parse_config_str(&text, stem)
}

/// Parses configuration text; `default_name` is used when `name` is absent.
pub fn parse_config_str(text: &str, default_name: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut seen: Vec<(&str, usize)> = Vec::new();
    let mut cfg = ExperimentConfig::new(default_name, 0, &[]);
    let mut system_line = None;
    let mut spacings_line = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ConfigError::Line { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let key = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| err(format!("unknown key `{key}`")))?;
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == key) {
            return Err(err(format!(
                "duplicate key `{key}` (first set on line {first})"
            )));
        }
        seen.push((key, line));
        let bad = |what: &str| err(format!("{key}: {what}"));

        match key {
            "name" => cfg.name = value.to_string(),
            "system" => {
                cfg.system = value.parse().map_err(|_| bad("expected an atom count"))?;
                system_line = Some(line);
            }
            "spacings" => {
                cfg.spacings = split_list(value)
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| bad(&format!("`{s}` is not a number")))
                    })
                    .collect::<Result<_, _>>()?;
                spacings_line = Some(line);
            }
            "basis" => cfg.basis = value.to_ascii_lowercase(),
            "cc_ranks" => {
                cfg.cc_ranks = split_list(value)
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| bad(&format!("`{s}` is not a rank")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "active_spaces" => cfg.active_spaces = parse_spaces(value).map_err(|m| bad(&m))?,
            "transforms" => {
                cfg.transforms = split_list(value)
                    .map(|s| {
                        parse_transform(s).ok_or_else(|| bad(&format!("unknown transform `{s}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "solvers" => {
                cfg.solvers = split_list(value)
                    .map(|s| parse_solver(s).ok_or_else(|| bad(&format!("unknown solver `{s}`"))))
                    .collect::<Result<_, _>>()?;
            }
            "baselines" => {
                cfg.baselines = split_list(value)
                    .map(|s| {
                        parse_baseline(s).ok_or_else(|| bad(&format!("unknown baseline `{s}`")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "pds_reference" => {
                cfg.pds_reference = parse_reference(value)
                    .ok_or_else(|| bad(&format!("unknown reference `{value}`")))?
            }
            "cc_tol" => cfg.cc_tol = value.parse().map_err(|_| bad("expected a number"))?,
            "export_heff" => {
                cfg.export_heff = parse_bool(value).ok_or_else(|| bad("expected yes or no"))?
            }
            _ => unreachable!("key list and match arms disagree"),
        }
    }

    let system_line = system_line.ok_or(ConfigError::Missing("system"))?;
    spacings_line.ok_or(ConfigError::Missing("spacings"))?;
    if let Err((key, message)) = cfg.validate() {
        let line = seen
            .iter()
            .find(|(k, _)| *k == key)
            .map_or(system_line, |(_, l)| *l);
        return Err(ConfigError::Line {
            line,
            message: format!("{key}: {message}"),
        });
    }
    Ok(cfg)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `{2,3,4,5}, {1,2,5,6}`
fn parse_spaces(value: &str) -> Result<Vec<Vec<usize>>, String> {
    let mut spaces = Vec::new();
    let mut rest = value.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('{')
            .ok_or_else(|| format!("expected `{{` at `{rest}`"))?;
        let close = body.find('}').ok_or("unclosed `{`")?;
        let orbitals = split_list(&body[..close])
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| format!("`{s}` is not an orbital index"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if orbitals.is_empty() {
            return Err("empty active space".into());
        }
        spaces.push(orbitals);
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(format!("unexpected `{rest}`"));
        }
    }
    Ok(spaces)
}

pub fn parse_transform(s: &str) -> Option<Transform> {
    match s {
        "exact" => Some(Transform::Exact),
        _ => s.strip_prefix("bch:")?.parse().ok().map(Transform::Bch),
    }
}

pub fn parse_solver(s: &str) -> Option<Solver> {
    match s {
        "diag" => Some(Solver::Diag),
        _ => s
            .strip_prefix("pds:")?
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .map(Solver::Pds),
    }
}

fn parse_baseline(s: &str) -> Option<Baseline> {
    Some(match s {
        "hf" => Baseline::Hf,
        "fci" => Baseline::Fci,
        "cc" => Baseline::Cc,
        "active_fci" => Baseline::ActiveFci,
        "casscf" => Baseline::Casscf,
        _ => return None,
    })
}

pub fn parse_reference(s: &str) -> Option<PdsReference> {
    match s {
        "hf" => Some(PdsReference::Hf),
        "uniform" => Some(PdsReference::Uniform),
        _ => s
            .strip_prefix("cas:")?
            .parse()
            .ok()
            .map(PdsReference::Determinant),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "yes" | "true" | "on" => Some(true),
        "no" | "false" | "off" => Some(false),
        _ => None,
    }
}

/// `{2,3,4,5}`
pub fn format_space(space: &[usize]) -> String {
    let inner: Vec<String> = space.iter().map(|k| k.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}
