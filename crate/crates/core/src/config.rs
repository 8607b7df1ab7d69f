//! Run configuration: built-in defaults, then a flat `key = value` file,
//! then command-line flags.
//!
//! ```text
//! # comments and blank lines are ignored
//! k = 1
//! measure = atomic:0.5@0.3,2@0.7
//! s_grid = log:0.1:10:9
//! ```
//!
//! Measures: `mono`, `atomic:m@w,...`, `exp:rate`, `power:n:cut`,
//! `gamma:shape:rate` (the last goes through the generic-density path).
//! Grids: comma lists, `log:a:b:n` or `lin:a:b:n`.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::error::{CoreError, Result};
use crate::measure::MeasureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Characteristics,
    Selfsim,
    Simulate,
    Validate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Analytic => "analytic",
            Command::Characteristics => "characteristics",
            Command::Selfsim => "selfsim",
            Command::Simulate => "simulate",
            Command::Validate => "validate",
        })
    }
}

pub const KEYS: &[&str] = &[
    "k",
    "measure",
    "t_grid",
    "s_grid",
    "x_grid",
    "grid",
    "n_particles",
    "seed",
    "replicates",
    "t_end",
    "observe_at",
    "event_cap",
    "order",
    "s0",
    "points",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub k: f64,
    pub measure: String,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// Shared `s` / `x` grid of the `selfsim` subcommand.
    pub grid: Vec<f64>,
    pub n_particles: usize,
    pub seed: u64,
    pub replicates: usize,
    pub t_end: f64,
    /// Empty means "observe at `t_end` only".
    pub observe_at: Vec<f64>,
    pub event_cap: Option<u64>,
    pub order: usize,
    pub s0: f64,
    pub points: usize,
    pub out_dir: PathBuf,
}

fn cfg_err(key: &str, msg: impl fmt::Display) -> CoreError {
    CoreError::Config(format!("{key}: {msg}"))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| cfg_err(key, format!("'{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(cfg_err(key, format!("'{v}' is not finite")));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    let v = v.trim();
    if let Ok(n) = v.parse::<T>() {
        return Ok(n);
    }
    // allow 1e5-style integers
    let x: f64 = v.parse().map_err(|_| cfg_err(key, format!("'{v}' is not an integer")))?;
    if x.fract() != 0.0 || !(0.0..=9.0e15).contains(&x) {
        return Err(cfg_err(key, format!("'{v}' is not a non-negative integer")));
    }
    format!("{}", x as u64).parse::<T>().map_err(|_| cfg_err(key, format!("'{v}' is out of range")))
}

/// Parses a grid: `a,b,c`, `log:a:b:n` or `lin:a:b:n`.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    let spaced = |rest: &str, log: bool| -> Result<Vec<f64>> {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(cfg_err(key, format!("expected a:b:n in '{v}'")));
        }
        let a = parse_f64(key, parts[0])?;
        let b = parse_f64(key, parts[1])?;
        let n: usize = parse_int(key, parts[2])?;
        if n < 2 || !(b > a) || (log && !(a > 0.0)) {
            return Err(cfg_err(key, format!("bad range in '{v}'")));
        }
        Ok((0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if log {
                    (a.ln() + f * (b / a).ln()).exp()
                } else {
                    a + f * (b - a)
                }
            })
            .collect())
    };
    let grid = if let Some(rest) = v.strip_prefix("log:") {
        spaced(rest, true)?
    } else if let Some(rest) = v.strip_prefix("lin:") {
        spaced(rest, false)?
    } else {
        v.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse_f64(key, p)).collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(cfg_err(key, "grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(cfg_err(key, "grid must be strictly ascending"));
    }
    Ok(grid)
}

/// Parses a measure description such as `exp:2` or `atomic:1@0.5,3@0.5`.
pub fn parse_measure(v: &str) -> Result<MeasureSpec> {
    let v = v.trim();
    let (name, rest) = v.split_once(':').unwrap_or((v, ""));
    let args: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let want = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(cfg_err("measure", format!("'{name}' takes {n} parameter(s), got '{v}'")))
        }
    };
    let spec = match name {
        "mono" | "monodisperse" => {
            want(0)?;
            MeasureSpec::monodisperse()
        }
        "atomic" => {
            want(1)?;
            let mut atoms = Vec::new();
            for item in args[0].split(',') {
                let (m, w) = item
                    .split_once('@')
                    .ok_or_else(|| cfg_err("measure", format!("atom '{item}' is not mass@weight")))?;
                atoms.push((parse_f64("measure", m)?, parse_f64("measure", w)?));
            }
            MeasureSpec::atomic(&atoms)?
        }
        "exp" | "exponential" => {
            want(1)?;
            MeasureSpec::exponential(parse_f64("measure", args[0])?)?
        }
        "power" | "power-tail" => {
            want(2)?;
            MeasureSpec::power_tail(parse_int("measure", args[0])?, parse_f64("measure", args[1])?)?
        }
        "gamma" => {
            want(2)?;
            MeasureSpec::generic_gamma(parse_f64("measure", args[0])?, parse_f64("measure", args[1])?)?
        }
        _ => return Err(cfg_err("measure", format!("unknown family '{name}'"))),
    };
    Ok(spec)
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let log = |a: f64, b: f64, n: usize| parse_grid("default", &format!("log:{a}:{b}:{n}")).expect("valid default");
        RunConfig {
            command,
            k: 1.0,
            measure: "mono".to_string(),
            t_grid: vec![0.1, 1.0, 10.0],
            s_grid: vec![0.2, 0.5, 1.0, 2.0, 5.0],
            x_grid: log(0.01, 10.0, 31),
            grid: log(0.01, 100.0, 41),
            n_particles: 100_000,
            seed: 12_345,
            replicates: 1,
            t_end: 2.0,
            observe_at: Vec::new(),
            event_cap: Some(1_000_000_000),
            order: 12,
            s0: 1.0,
            points: 101,
            out_dir: PathBuf::from("."),
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k" => self.k = parse_f64(key, value)?,
            "measure" => {
                parse_measure(value)?;
                self.measure = value.trim().to_string();
            }
            "t_grid" => self.t_grid = parse_grid(key, value)?,
            "s_grid" => self.s_grid = parse_grid(key, value)?,
            "x_grid" => self.x_grid = parse_grid(key, value)?,
            "grid" => self.grid = parse_grid(key, value)?,
            "n_particles" => self.n_particles = parse_int(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "replicates" => self.replicates = parse_int(key, value)?,
            "t_end" => self.t_end = parse_f64(key, value)?,
            "observe_at" => self.observe_at = parse_grid(key, value)?,
            "event_cap" => {
                self.event_cap = match value.trim() {
                    "none" | "off" => None,
                    v => Some(parse_int(key, v)?),
                }
            }
            "order" => self.order = parse_int(key, value)?,
            "s0" => self.s0 = parse_f64(key, value)?,
            "points" => self.points = parse_int(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            _ => return Err(CoreError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` text, rejecting unknown and repeated keys.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CoreError::Config(format!("{origin}:{line_no}: expected key = value")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CoreError::Config(format!("{origin}:{line_no}: unknown key '{key}'")));
            }
            if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
                return Err(CoreError::Config(format!(
                    "{origin}:{line_no}: duplicate key '{key}' (first set on line {first})"
                )));
            }
            seen.push((key.to_string(), line_no));
            self.set(key, value).map_err(|e| match e {
                CoreError::Config(msg) => CoreError::Config(format!("{origin}:{line_no}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Checks cross-field constraints for the configured command.
    pub fn validate(&self) -> Result<()> {
        let allow_zero_k = matches!(self.command, Command::Simulate | Command::Validate);
        if !(self.k > 0.0 || (allow_zero_k && self.k == 0.0)) {
            let need = if allow_zero_k { "non-negative" } else { "positive" };
            return Err(cfg_err("k", format!("must be {need}, got {}", self.k)));
        }
        parse_measure(&self.measure)?;
        if self.t_grid.iter().any(|&t| !(t > 0.0)) {
            return Err(cfg_err("t_grid", "times must be positive"));
        }
        if self.s_grid.iter().any(|&s| !(s >= 0.0)) {
            return Err(cfg_err("s_grid", "values must be non-negative"));
        }
        if self.command == Command::Simulate && self.s_grid.contains(&0.0) {
            return Err(cfg_err("s_grid", "simulation observers need s > 0"));
        }
        if self.x_grid.iter().chain(&self.grid).any(|&x| !(x > 0.0)) {
            return Err(cfg_err("grid", "values must be positive"));
        }
        if self.n_particles == 0 {
            return Err(cfg_err("n_particles", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(cfg_err("replicates", "must be at least 1"));
        }
        if !(self.t_end > 0.0) {
            return Err(cfg_err("t_end", "must be positive"));
        }
        if self.observe_at.iter().any(|&o| !(o > 0.0 && o <= self.t_end)) {
            return Err(cfg_err("observe_at", "times must lie in (0, t_end]"));
        }
        if !self.order.is_multiple_of(2) || !(8..=18).contains(&self.order) {
            return Err(cfg_err("order", "must be even and between 8 and 18"));
        }
        if !(self.s0 > 0.0) {
            return Err(cfg_err("s0", "must be positive"));
        }
        if self.points < 2 {
            return Err(cfg_err("points", "must be at least 2"));
        }
        Ok(())
    }

    pub fn measure_spec(&self) -> Result<MeasureSpec> {
        parse_measure(&self.measure)
    }

    pub fn observation_times(&self) -> Vec<f64> {
        if self.observe_at.is_empty() {
            vec![self.t_end]
        } else {
            self.observe_at.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for c in [Command::Analytic, Command::Characteristics, Command::Selfsim, Command::Simulate, Command::Validate] {
            RunConfig::defaults(c).validate().unwrap();
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("g", "1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_grid("g", "log:0.1:10:3").unwrap();
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert_eq!(parse_grid("g", "lin:0:1:5").unwrap()[2], 0.5);
        assert!(parse_grid("g", "2,1").is_err());
        assert!(parse_grid("g", "log:0:1:5").is_err());
        assert!(parse_grid("g", "").is_err());
    }

    #[test]
    fn measures() {
        assert!(parse_measure("mono").is_ok());
        assert!(parse_measure("atomic:1@0.5,2@0.5").is_ok());
        assert!(parse_measure("exp:2").is_ok());
        assert!(parse_measure("power:2:1").is_ok());
        assert!(parse_measure("gamma:2:2").is_ok());
        assert!(parse_measure("exp").is_err());
        assert!(parse_measure("atomic:1@0.4").is_err());
        assert!(parse_measure("lognormal:1:1").is_err());
    }

    #[test]
    fn integers_accept_exponent_form() {
        let mut c = RunConfig::defaults(Command::Simulate);
        c.set("n_particles", "1e5").unwrap();
        assert_eq!(c.n_particles, 100_000);
        assert!(c.set("n_particles", "1.5").is_err());
    }

    #[test]
    fn duplicate_key_reports_line() {
        let mut c = RunConfig::defaults(Command::Analytic);
        let err = c.apply_text("k = 1\n# note\nk = 2\n", "run.cfg").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("run.cfg:3") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = RunConfig::defaults(Command::Analytic);
        let err = c.apply_text("kk = 1\n", "f").unwrap_err();
        assert!(err.to_string().contains("kk"));
    }

    #[test]
    fn negative_k_rejected() {
        let mut c = RunConfig::defaults(Command::Analytic);
        c.set("k", "-1").unwrap();
        assert!(c.validate().is_err());
        let mut c = RunConfig::defaults(Command::Simulate);
        c.set("k", "0").unwrap();
        assert!(c.validate().is_ok());
    }
}
