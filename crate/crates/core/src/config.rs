//! Run configuration: a flat key-value text file.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored, and
//! values may optionally be wrapped in single or double quotes. Unknown
//! and duplicated keys are rejected so that typos surface as errors
//! instead of silently running with defaults. Every run writes a manifest
//! in this same format, so a manifest is itself a valid config that
//! reproduces the run.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::SweepConfig;
use crate::lattice::LatticeSpec;
use crate::report::fmt_f64;

/// Keys accepted in a config file.
const KEYS: &[&str] = &[
    "dim",
    "side",
    "s",
    "alpha",
    "noise",
    "gamma_min",
    "gamma_max",
    "gamma_steps",
    "e_list",
    "realizations",
    "master_seed",
    "eps_check",
    "output_dir",
    "save_realizations",
];

/// Parsed run configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub side: usize,
    pub s: f64,
    pub alpha: f64,
    pub noise: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    pub e_list: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    pub eps_check: Option<f64>,
    pub output_dir: String,
    /// Whether `simulate` writes the per-realization table alongside the
    /// aggregate table.
    pub save_realizations: bool,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}'")))
}

/// Strips one pair of matching surrounding quotes so that values written
/// in TOML or shell style (`output_dir = "out"`) mean the same as bare
/// ones.
fn unquote(value: &str) -> &str {
    for q in ['"', '\''] {
        if value.len() >= 2 && value.starts_with(q) && value.ends_with(q) {
            return &value[1..value.len() - 1];
        }
    }
    value
}

impl RunConfig {
    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, &e))?;
        RunConfig::from_str_named(&text, &path.display().to_string())
    }

    /// Parses config text; `origin` labels error messages.
    pub fn from_str_named(text: &str, origin: &str) -> Result<RunConfig> {
        let mut seen: HashMap<String, String> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{origin}:{}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "{origin}:{}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if seen
                .insert(key.to_string(), unquote(value.trim()).to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "{origin}:{}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        let mut get = |key: &str| seen.remove(key);
        let mut require = |key: &str| {
            get(key).ok_or_else(|| Error::Config(format!("{origin}: missing key '{key}'")))
        };

        let config = RunConfig {
            dim: parse_num("dim", &require("dim")?)?,
            side: parse_num("side", &require("side")?)?,
            s: parse_num("s", &require("s")?)?,
            alpha: parse_num("alpha", &require("alpha")?)?,
            noise: parse_num("noise", &require("noise")?)?,
            gamma_min: parse_num("gamma_min", &require("gamma_min")?)?,
            gamma_max: parse_num("gamma_max", &require("gamma_max")?)?,
            gamma_steps: parse_num("gamma_steps", &require("gamma_steps")?)?,
            e_list: {
                let raw = require("e_list")?;
                raw.split(',')
                    .map(|part| parse_num("e_list", part))
                    .collect::<Result<Vec<f64>>>()?
            },
            realizations: match get("realizations") {
                Some(v) => parse_num("realizations", &v)?,
                None => 100,
            },
            master_seed: match get("master_seed") {
                Some(v) => parse_num("master_seed", &v)?,
                None => 1,
            },
            eps_check: match get("eps_check") {
                Some(v) => Some(parse_num("eps_check", &v)?),
                None => None,
            },
            output_dir: get("output_dir").unwrap_or_else(|| "out".to_string()),
            save_realizations: match get("save_realizations") {
                Some(v) => match v.as_str() {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "key 'save_realizations': expected true or false, got '{other}'"
                        )))
                    }
                },
                None => true,
            },
        };
        Ok(config)
    }

    /// The target grid: `gamma_steps` points linearly spaced over
    /// [`gamma_min`, `gamma_max`], endpoints exact.
    pub fn gamma_grid(&self) -> Result<Vec<f64>> {
        if self.gamma_steps == 0 {
            return Err(Error::Config("gamma_steps must be at least 1".into()));
        }
        if self.gamma_steps == 1 {
            return Ok(vec![self.gamma_min]);
        }
        if !(self.gamma_max > self.gamma_min) {
            return Err(Error::Config(format!(
                "gamma_max ({}) must exceed gamma_min ({}) for a multi-point grid",
                self.gamma_max, self.gamma_min
            )));
        }
        let steps = self.gamma_steps;
        let width = self.gamma_max - self.gamma_min;
        Ok((0..steps)
            .map(|i| {
                if i + 1 == steps {
                    self.gamma_max
                } else {
                    self.gamma_min + width * i as f64 / (steps - 1) as f64
                }
            })
            .collect())
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.dim, self.side, self.s)
    }

    /// Lowers to the sweep layer, validating everything on the way.
    pub fn to_sweep_config(&self) -> Result<SweepConfig> {
        let config = SweepConfig {
            spec: self.lattice_spec()?,
            alpha: self.alpha,
            noise: self.noise,
            gamma_grid: self.gamma_grid()?,
            e_grid: self.e_list.clone(),
            realizations: self.realizations,
            master_seed: self.master_seed,
            eps_check: self.eps_check,
        };
        config.validate()?;
        Ok(config)
    }

    /// Serializes the effective configuration in config-file format, all
    /// keys explicit and floats at full precision, so re-parsing yields an
    /// identical `RunConfig` (modulo `output_dir`, which callers may point
    /// elsewhere).
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        push("dim", self.dim.to_string());
        push("side", self.side.to_string());
        push("s", fmt_f64(self.s));
        push("alpha", fmt_f64(self.alpha));
        push("noise", fmt_f64(self.noise));
        push("gamma_min", fmt_f64(self.gamma_min));
        push("gamma_max", fmt_f64(self.gamma_max));
        push("gamma_steps", self.gamma_steps.to_string());
        push(
            "e_list",
            self.e_list
                .iter()
                .map(|e| fmt_f64(*e))
                .collect::<Vec<_>>()
                .join(","),
        );
        push("realizations", self.realizations.to_string());
        push("master_seed", self.master_seed.to_string());
        if let Some(eps) = self.eps_check {
            push("eps_check", fmt_f64(eps));
        }
        push("output_dir", self.output_dir.clone());
        push("save_realizations", self.save_realizations.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# toy run
dim = 1
side = 32
s = 0.5
alpha = 4
noise = 1.0
gamma_min = 1.0
gamma_max = 4.0
gamma_steps = 4
e_list = 0.0, 0.3
";

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = RunConfig::from_str_named(MINIMAL, "test").unwrap();
        assert_eq!(c.dim, 1);
        assert_eq!(c.side, 32);
        assert_eq!(c.s, 0.5);
        assert_eq!(c.e_list, vec![0.0, 0.3]);
        assert_eq!(c.realizations, 100);
        assert_eq!(c.master_seed, 1);
        assert_eq!(c.eps_check, None);
        assert_eq!(c.output_dir, "out");
        assert!(c.save_realizations);
    }

    #[test]
    fn quoted_values_mean_the_same_as_bare_ones() {
        let quoted = format!("{MINIMAL}output_dir = \"results dir\"\nmaster_seed = '7'\n");
        let c = RunConfig::from_str_named(&quoted, "t").unwrap();
        assert_eq!(c.output_dir, "results dir");
        assert_eq!(c.master_seed, 7);
        // Mismatched quotes are not a pair and stay literal.
        let odd = format!("{MINIMAL}output_dir = \"out\n");
        assert_eq!(RunConfig::from_str_named(&odd, "t").unwrap().output_dir, "\"out");
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed_keys() {
        let unknown = format!("{MINIMAL}typo_key = 3\n");
        assert!(matches!(
            RunConfig::from_str_named(&unknown, "t"),
            Err(Error::Config(_))
        ));
        let dup = format!("{MINIMAL}side = 64\n");
        assert!(matches!(
            RunConfig::from_str_named(&dup, "t"),
            Err(Error::Config(_))
        ));
        let noeq = format!("{MINIMAL}gamma steps 4\n");
        assert!(matches!(
            RunConfig::from_str_named(&noeq, "t"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_str_named("dim = 1\n", "t"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gamma_grid_has_exact_endpoints() {
        let c = RunConfig::from_str_named(MINIMAL, "t").unwrap();
        let grid = c.gamma_grid().unwrap();
        assert_eq!(grid, vec![1.0, 2.0, 3.0, 4.0]);

        let mut single = c.clone();
        single.gamma_steps = 1;
        assert_eq!(single.gamma_grid().unwrap(), vec![1.0]);

        let mut bad = c;
        bad.gamma_max = bad.gamma_min;
        assert!(bad.gamma_grid().is_err());
    }

    #[test]
    fn config_text_round_trips_exactly() {
        let mut c = RunConfig::from_str_named(MINIMAL, "t").unwrap();
        c.s = 0.1 + 0.2; // not exactly representable as a short decimal
        c.eps_check = Some(1e-9);
        c.master_seed = u64::MAX;
        let echoed = RunConfig::from_str_named(&c.to_config_text(), "echo").unwrap();
        assert_eq!(echoed, c);
    }

    #[test]
    fn lowers_to_sweep_config() {
        let c = RunConfig::from_str_named(MINIMAL, "t").unwrap();
        let sweep = c.to_sweep_config().unwrap();
        assert_eq!(sweep.gamma_grid.len(), 4);
        assert_eq!(sweep.e_grid, vec![0.0, 0.3]);
        assert_eq!(sweep.spec.n(), 32);
    }

    #[test]
    fn invalid_physics_fails_on_lowering() {
        let mut c = RunConfig::from_str_named(MINIMAL, "t").unwrap();
        c.e_list = vec![1.5];
        assert!(c.to_sweep_config().is_err());
        c = RunConfig::from_str_named(MINIMAL, "t").unwrap();
        c.dim = 3;
        assert!(c.to_sweep_config().is_err());
    }
}
