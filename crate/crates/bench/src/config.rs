//! `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use grating_core::geometry::{BoundaryModel, ProfileShape};
use grating_core::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("--{key}: {msg}")]
    Flag { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, Copy)]
pub enum Origin {
    Line(usize),
    Flag,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Flat(f64),
    Sine(f64),
    Saw(f64),
    /// Whitespace or comma separated `x1 f` pairs, `#` comments.
    File(PathBuf),
}

impl ProfileSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (name, arg) = call(s).ok_or_else(|| format!("expected flat(c), sine(a), saw(a) or file(path), got `{s}`"))?;
        match name {
            "flat" => Ok(Self::Flat(num(arg)?)),
            "sine" => Ok(Self::Sine(num(arg)?)),
            "saw" => Ok(Self::Saw(num(arg)?)),
            "file" => Ok(Self::File(PathBuf::from(arg.trim()))),
            _ => Err(format!("unknown profile `{name}`")),
        }
    }

    pub fn shape(&self) -> Result<ProfileShape, ConfigError> {
        Ok(match self {
            Self::Flat(c) => ProfileShape::Flat(*c),
            Self::Sine(a) => ProfileShape::Sine(*a),
            Self::Saw(a) => ProfileShape::Saw(*a),
            Self::File(p) => ProfileShape::Knots(read_knots(p)?),
        })
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flat(c) => write!(f, "flat({c})"),
            Self::Sine(a) => write!(f, "sine({a})"),
            Self::Saw(a) => write!(f, "saw({a})"),
            Self::File(p) => write!(f, "file({})", p.display()),
        }
    }
}

fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        let bad = || ConfigError::Line { line: i + 1, msg: format!("{}: expected `x1 f`, got `{line}`", path.display()) };
        if parts.len() != 2 {
            return Err(bad());
        }
        let x = parts[0].parse().map_err(|_| bad())?;
        let y = parts[1].parse().map_err(|_| bad())?;
        out.push((x, y));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcSpec {
    Dirichlet,
    Impedance { lambda: f64 },
    Transmission { k_minus: f64, lambda: f64 },
}

impl BcSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "dirichlet" {
            return Ok(Self::Dirichlet);
        }
        let (name, arg) = call(s).ok_or_else(|| {
            format!("expected dirichlet, impedance(lambda) or transmission(k_minus, lambda), got `{s}`")
        })?;
        match name {
            "impedance" => Ok(Self::Impedance { lambda: num(arg)? }),
            "transmission" => {
                let v = list(arg)?;
                if v.len() != 2 {
                    return Err("transmission takes (k_minus, lambda)".into());
                }
                Ok(Self::Transmission { k_minus: v[0], lambda: v[1] })
            }
            _ => Err(format!("unknown boundary model `{name}`")),
        }
    }

    pub fn model(&self) -> BoundaryModel {
        match *self {
            Self::Dirichlet => BoundaryModel::Dirichlet,
            Self::Impedance { lambda } => BoundaryModel::Impedance { lambda },
            Self::Transmission { k_minus, lambda } => BoundaryModel::Transmission { k_minus, lambda },
        }
    }
}

impl fmt::Display for BcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirichlet => write!(f, "dirichlet"),
            Self::Impedance { lambda } => write!(f, "impedance({lambda})"),
            Self::Transmission { k_minus, lambda } => write!(f, "transmission({k_minus}, {lambda})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtnN {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    pub n_samples: usize,
    pub bc: BcSpec,
    pub k: Vec<f64>,
    pub theta_deg: Vec<f64>,
    pub gamma: Complex64,
    pub r: Option<f64>,
    pub f_minus: Option<f64>,
    pub f_plus: Option<f64>,
    pub lipschitz: Option<f64>,
    pub mesh_h: f64,
    pub fe_order: usize,
    pub dtn_n: DtnN,
    pub refinements: usize,
    pub seed: u64,
    pub trials: usize,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20240917;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile: ProfileSpec::Flat(0.0),
            n_samples: 256,
            bc: BcSpec::Dirichlet,
            k: vec![1.0],
            theta_deg: vec![30.0],
            gamma: Complex64::new(1.0, 0.0),
            r: None,
            f_minus: None,
            f_plus: None,
            lipschitz: None,
            mesh_h: 0.1,
            fe_order: 2,
            dtn_n: DtnN::Auto,
            refinements: 1,
            seed: DEFAULT_SEED,
            trials: 1000,
            output: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "profile",
    "n_samples",
    "bc",
    "k",
    "theta_deg",
    "gamma",
    "R",
    "f_minus",
    "f_plus",
    "lipschitz_L",
    "mesh_h",
    "fe_order",
    "dtn_N",
    "refinements",
    "seed",
    "trials",
    "output",
];

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Line { line: i + 1, msg: format!("expected `key = value`, got `{line}`") });
            };
            cfg.set(key.trim(), value.trim(), Origin::Line(i + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one setting. Call [`RunConfig::validate`] afterwards.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let wrap = |msg: String| match origin {
            Origin::Line(line) => ConfigError::Line { line, msg: format!("{key}: {msg}") },
            Origin::Flag => ConfigError::Flag { key: key.into(), msg },
        };
        let opt = |v: &str| -> Result<Option<f64>, String> {
            if v == "auto" || v == "default" {
                Ok(None)
            } else {
                num(v).map(Some)
            }
        };
        match key {
            "profile" => self.profile = ProfileSpec::parse(value).map_err(wrap)?,
            "n_samples" => self.n_samples = int(value).map_err(wrap)?,
            "bc" => self.bc = BcSpec::parse(value).map_err(wrap)?,
            "k" => self.k = list(value).map_err(wrap)?,
            "theta_deg" => self.theta_deg = list(value).map_err(wrap)?,
            "gamma" => self.gamma = complex(value).map_err(wrap)?,
            "R" | "r" => self.r = opt(value).map_err(wrap)?,
            "f_minus" => self.f_minus = opt(value).map_err(wrap)?,
            "f_plus" => self.f_plus = opt(value).map_err(wrap)?,
            "lipschitz_L" => self.lipschitz = opt(value).map_err(wrap)?,
            "mesh_h" => self.mesh_h = num(value).map_err(wrap)?,
            "fe_order" => self.fe_order = int(value).map_err(wrap)?,
            "dtn_N" => {
                self.dtn_n = if value == "auto" { DtnN::Auto } else { DtnN::Fixed(int(value).map_err(wrap)?) }
            }
            "refinements" => self.refinements = int(value).map_err(wrap)?,
            "seed" => self.seed = value.parse().map_err(|_| wrap(format!("expected an integer, got `{value}`")))?,
            "trials" => self.trials = int(value).map_err(wrap)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(wrap(format!("unknown key; expected one of {}", KEYS.join(", ")))),
        }
        if let Origin::Line(_) = origin {
            return Ok(());
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.k.is_empty() || self.theta_deg.is_empty() {
            return bad("k and theta_deg lists must be nonempty".into());
        }
        if let Some(k) = self.k.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return bad(format!("wavenumber must be positive, got {k}"));
        }
        if let Some(t) = self.theta_deg.iter().find(|t| !(t.abs() < 90.0)) {
            return bad(format!("theta_deg must lie in (-90, 90), got {t}"));
        }
        if !(self.mesh_h > 0.0) {
            return bad(format!("mesh_h must be positive, got {}", self.mesh_h));
        }
        if !matches!(self.fe_order, 1 | 2) {
            return bad(format!("fe_order must be 1 or 2, got {}", self.fe_order));
        }
        if self.n_samples < 4 {
            return bad("n_samples must be at least 4".into());
        }
        match self.bc {
            BcSpec::Impedance { lambda } if !(lambda > 0.0) => bad(format!("impedance lambda must be positive, got {lambda}")),
            BcSpec::Transmission { k_minus, lambda } if !(k_minus > 0.0 && lambda > 0.0) => {
                bad("transmission k_minus and lambda must be positive".into())
            }
            _ => Ok(()),
        }
    }

    /// Truncation order for the whole sweep.
    pub fn n_max(&self) -> usize {
        match self.dtn_n {
            DtnN::Fixed(n) => n,
            DtnN::Auto => {
                let mut k = self.k.iter().copied().fold(0.0, f64::max);
                if let BcSpec::Transmission { k_minus, .. } = self.bc {
                    k = k.max(k_minus);
                }
                grating_core::dtn::default_truncation(k)
            }
        }
    }
}

fn call(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    Some((s[..open].trim(), inner))
}

fn num(s: &str) -> Result<f64, String> {
    let s = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a number, got `{s}`"))
}

fn int(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("expected a nonnegative integer, got `{}`", s.trim()))
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

/// `a`, `a+bj`, `a-bj`, `bj`.
pub fn complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || format!("expected a complex number like 1 or 0.5+2j, got `{s}`");
    let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) else {
        return num(&t).map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (num(&body[..i]).map_err(|_| err())?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => num(v).map_err(|_| err())?,
    };
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let cfg = RunConfig::parse("# run\nprofile = sine(0.3)\nbc = impedance(2)\nk = 0.5, 1, 2 # sweep\ntheta_deg=0,30\ngamma = 1-0.5j\ndtn_N = 14\n").unwrap();
        assert_eq!(cfg.profile, ProfileSpec::Sine(0.3));
        assert_eq!(cfg.bc, BcSpec::Impedance { lambda: 2.0 });
        assert_eq!(cfg.k, vec![0.5, 1.0, 2.0]);
        assert_eq!(cfg.gamma, Complex64::new(1.0, -0.5));
        assert_eq!(cfg.n_max(), 14);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("k = 1\n\nmesh_h = abc\n").unwrap_err().to_string();
        assert!(e.starts_with("line 3:"), "{e}");
        let e = RunConfig::parse("nonsense\n").unwrap_err().to_string();
        assert!(e.starts_with("line 1:"), "{e}");
        let e = RunConfig::parse("colour = red\n").unwrap_err().to_string();
        assert!(e.contains("unknown key"), "{e}");
    }

    #[test]
    fn rejects_grazing_incidence() {
        assert!(RunConfig::parse("theta_deg = 90\n").is_err());
        assert!(RunConfig::parse("theta_deg = -89.9\n").is_ok());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(complex("-1.5e-1+2j").unwrap(), Complex64::new(-0.15, 2.0));
        assert_eq!(complex("3j").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(complex("1 - j").unwrap(), Complex64::new(1.0, -1.0));
        assert!(complex("one").is_err());
    }

    #[test]
    fn auto_truncation_uses_largest_wavenumber() {
        let cfg = RunConfig::parse("k = 0.5, 2.5\nbc = transmission(3.2, 1)\n").unwrap();
        assert_eq!(cfg.n_max(), 14);
    }
}
