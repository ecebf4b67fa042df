//! Plain-text run configuration.
//!
//! One `key = value` per line, `#` starts a comment. Later sources override
//! earlier ones: built-in defaults, then the config file, then `--set key=value`
//! pairs in order, then dedicated flags such as `--seed`.
//!
//! Lists are comma separated (`0.25,0.5,1`) or inclusive spans
//! `start:stop:step` (`0:1:0.25`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hiersmooth_core::harness::{CertifyParams, Mode};
use hiersmooth_core::sweep::{LowerFamily, Method, ParamRange, Sampling, SweepSpec};
use hiersmooth_core::threat::{continuous_grid, discrete_grid, inclusive_range, inclusive_range_usize};
use hiersmooth_core::{LowerLevel, Selection, SmoothingConfig, ThreatModel};

use crate::CliError;

/// Every accepted key with its default (`None`: no default).
const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("dataset", None, "JSON-lines samples to certify"),
    ("train", None, "JSON-lines samples for fitting centroid classifiers"),
    ("out", None, "output directory"),
    ("workers", None, "worker threads"),
    ("classifier", Some("centroid-extended"), "base classifier registry name"),
    ("seed", Some("0"), "Monte-Carlo seed"),
    ("p", Some("0.9"), "row selection probability, or one per row"),
    ("lower", Some("gaussian"), "lower level: gaussian, sparse or ablation"),
    ("sigma", Some("0.5"), "Gaussian noise scale"),
    ("p_plus", Some("0.01"), "sparse flip probability 0 -> 1"),
    ("p_minus", Some("0.6"), "sparse flip probability 1 -> 0"),
    ("threat", Some("l2"), "threat family: l2 or flip"),
    ("r", Some("1"), "row budgets"),
    ("epsilon", Some("0.5"), "l2 magnitudes"),
    ("r_a", Some("0"), "insertion budgets"),
    ("r_d", Some("1"), "deletion budgets"),
    ("n0", Some("1000"), "selection samples"),
    ("n1", Some("10000"), "certification samples"),
    ("alpha", Some("0.01"), "confidence level"),
    ("mode", Some("binary"), "binary or multiclass"),
    ("method", Some("hierarchical"), "sweep method: hierarchical, lower_only or ablation_only"),
    ("sweep_p", Some("0.6,0.8,0.9,1"), "selection probabilities to sweep"),
    ("sweep_sigma", Some("0.25,0.5,1"), "Gaussian scales to sweep"),
    ("sweep_p_plus", Some("0,0.01"), "sparse p_plus values to sweep"),
    ("sweep_p_minus", Some("0.5,0.7,0.9"), "sparse p_minus values to sweep"),
    ("include_ablation", Some("true"), "hierarchical sweeps also try the ablation lower level"),
    ("sampling", Some("grid"), "grid or random"),
    ("n_trials", Some("20"), "random sampling draws"),
    ("sampling_seed", Some("0"), "random sampling seed"),
    ("repeats", Some("1"), "evaluations averaged per trial"),
];

/// Keys left out of `config.resolved`: they do not affect results.
const UNRECORDED: &[&str] = &["out", "workers"];

pub const VERSION: &str = concat!("hiersmooth ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::config(msg)
}

impl RunConfig {
    pub fn defaults() -> Self {
        let values = KEYS.iter().filter_map(|(k, v, _)| v.map(|v| (k.to_string(), v.to_string()))).collect();
        Self { values }
    }

    pub fn known_keys() -> impl Iterator<Item = (&'static str, Option<&'static str>, &'static str)> {
        KEYS.iter().copied()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(config_err(format!("unknown configuration key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Apply a `key=value` assignment.
    pub fn assign(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| config_err(format!("expected key=value, got `{pair}`")))?;
        self.set(k, v)
    }

    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.assign(line).map_err(|e| config_err(format!("{origin}:{}: {}", i + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config `{}`: {e}", path.display())))?;
        self.merge_text(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| config_err(format!("missing required key `{key}`")))
    }

    pub fn path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.require(key).map(PathBuf::from)
    }

    pub fn optional_path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| config_err(format!("cannot parse `{key}` value `{raw}`")))
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        parse_f64_list(self.require(key)?).map_err(|m| config_err(format!("`{key}`: {m}")))
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        parse_usize_list(self.require(key)?).map_err(|m| config_err(format!("`{key}`: {m}")))
    }

    fn range(&self, key: &str) -> Result<ParamRange, CliError> {
        let raw = self.require(key)?;
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() == 3 {
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| config_err(format!("`{key}`: bad number `{s}`")));
            let r = ParamRange::Span { min: num(parts[0])?, max: num(parts[1])?, step: num(parts[2])? };
            // Surface empty or malformed spans here rather than mid-sweep.
            r.grid().map_err(|e| config_err(format!("`{key}`: {e}")))?;
            Ok(r)
        } else {
            Ok(ParamRange::Values { values: self.f64_list(key)? })
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parse("seed")
    }

    pub fn classifier(&self) -> Result<&str, CliError> {
        self.require("classifier")
    }

    pub fn lower(&self) -> Result<LowerLevel, CliError> {
        Ok(match self.require("lower")? {
            "gaussian" => LowerLevel::Gaussian { sigma: self.parse("sigma")? },
            "sparse" => LowerLevel::SparseFlip { p_plus: self.parse("p_plus")?, p_minus: self.parse("p_minus")? },
            "ablation" => LowerLevel::Ablation,
            other => return Err(config_err(format!("unknown lower level `{other}`"))),
        })
    }

    pub fn smoothing(&self) -> Result<SmoothingConfig, CliError> {
        let ps = self.f64_list("p")?;
        let selection = match ps.as_slice() {
            [p] => Selection::Uniform { p: *p },
            _ => Selection::PerRow { ps },
        };
        let config = SmoothingConfig { selection, lower: self.lower()? };
        config.validate().map_err(CliError::from_config)?;
        Ok(config)
    }

    pub fn threats(&self) -> Result<Vec<ThreatModel>, CliError> {
        let rs = self.usize_list("r")?;
        let grid = match self.require("threat")? {
            "l2" => continuous_grid(&rs, &self.f64_list("epsilon")?),
            "flip" => discrete_grid(&rs, &self.usize_list("r_a")?, &self.usize_list("r_d")?),
            other => return Err(config_err(format!("unknown threat family `{other}`"))),
        };
        if grid.is_empty() {
            return Err(config_err("threat grid is empty"));
        }
        for t in &grid {
            t.validate().map_err(CliError::from_config)?;
        }
        Ok(grid)
    }

    pub fn certify_params(&self) -> Result<CertifyParams, CliError> {
        let mode: Mode = self.require("mode")?.parse().map_err(CliError::from_config)?;
        let params = CertifyParams { n0: self.parse("n0")?, n1: self.parse("n1")?, alpha: self.parse("alpha")?, mode };
        params.validate().map_err(CliError::from_config)?;
        Ok(params)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let method: Method = self.require("method")?.parse().map_err(CliError::from_config)?;
        let family = match (self.require("lower")?, method) {
            ("gaussian", _) => LowerFamily::Gaussian,
            ("sparse", _) => LowerFamily::Sparse,
            (_, Method::AblationOnly) => LowerFamily::Gaussian,
            (other, _) => return Err(config_err(format!("sweeps need lower = gaussian or sparse, got `{other}`"))),
        };
        let include_ablation = match self.require("include_ablation")? {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => return Err(config_err(format!("cannot parse `include_ablation` value `{other}`"))),
        };
        let sampling = match self.require("sampling")? {
            "grid" => Sampling::Grid,
            "random" => Sampling::UniformRandom { n_trials: self.parse("n_trials")?, seed: self.parse("sampling_seed")? },
            other => return Err(config_err(format!("unknown sampling mode `{other}`"))),
        };
        let spec = SweepSpec {
            method,
            family,
            p: self.range("sweep_p")?,
            sigma: self.range("sweep_sigma")?,
            p_plus: self.range("sweep_p_plus")?,
            p_minus: self.range("sweep_p_minus")?,
            include_ablation,
            sampling,
            threats: self.threats()?,
            params: self.certify_params()?,
            repeats: self.parse("repeats")?,
            seed: self.seed()?,
        };
        spec.validate().map_err(CliError::from_config)?;
        Ok(spec)
    }

    /// The text written to `config.resolved`.
    pub fn resolved(&self) -> String {
        let mut out = format!("version = {VERSION}\n");
        for (k, v) in &self.values {
            if !UNRECORDED.contains(&k.as_str()) {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

pub fn parse_f64_list(raw: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", s.trim()));
    match parts.as_slice() {
        [a, b, step] => inclusive_range(num(a)?, num(b)?, num(step)?).map_err(|e| e.to_string()),
        [_] => raw.split(',').map(num).collect(),
        _ => Err(format!("expected a list or start:stop:step, got `{raw}`")),
    }
}

pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad integer `{}`", s.trim()));
    match parts.as_slice() {
        [a, b, step] => inclusive_range_usize(num(a)?, num(b)?, num(step)?).map_err(|e| e.to_string()),
        [_] => raw.split(',').map(num).collect(),
        _ => Err(format!("expected a list or start:stop:step, got `{raw}`")),
    }
}
