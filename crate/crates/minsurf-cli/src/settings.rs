//! Run settings: merge of command-line flags, the optional settings file,
//! and defaults, with validation messages that name the failed field.

use crate::report::Format;
use crate::Failure;
use minsurf::surfaces::Domain;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Fixed default seed for randomized audits.
pub const DEFAULT_SEED: u64 = 24301;
/// Default family angle for the phase-law check.
pub const DEFAULT_PHI: f64 = std::f64::consts::PI / 6.0;
/// Environment variable overriding the default worker count.
pub const THREADS_ENV: &str = "MINSURF_THREADS";

/// Keys accepted in a settings file.
const KNOWN_KEYS: &[&str] = &[
    "surface",
    "spec",
    "grid",
    "domain",
    "max-order",
    "h",
    "tolerance",
    "a",
    "theta",
    "phi",
    "audit",
    "m",
    "format",
    "out",
    "seed",
    "threads",
];

/// Raw option values, command line over settings file.
#[derive(Default)]
pub struct Overrides {
    pub surface: Option<String>,
    pub spec: Option<PathBuf>,
    pub grid: Option<String>,
    pub domain: Option<String>,
    pub max_order: Option<usize>,
    pub h: Option<f64>,
    pub tolerance: Option<f64>,
    pub a: Option<String>,
    pub theta: Option<String>,
    pub phi: Option<f64>,
    pub audit: Option<usize>,
    pub m: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Fully resolved and validated run settings.
#[derive(Debug)]
pub struct Settings {
    pub surface: Option<String>,
    pub spec: Option<PathBuf>,
    pub grid: Option<(usize, usize)>,
    pub domain: Option<Domain>,
    pub max_order: usize,
    pub h: f64,
    pub tolerance: Option<f64>,
    pub a: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
    pub phi: f64,
    pub audit: Option<usize>,
    pub m: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Settings {
    /// Applies the precedence flag > settings file > default and validates.
    pub fn resolve(flags: Overrides, config: Option<&Path>) -> Result<Settings, Failure> {
        let file = match config {
            Some(path) => parse_settings_file(path)?,
            None => BTreeMap::new(),
        };
        let text = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());

        let grid = match text(flags.grid, "grid") {
            Some(t) => Some(parse_grid(&t)?),
            None => None,
        };
        let domain = match text(flags.domain, "domain") {
            Some(t) => Some(parse_domain(&t)?),
            None => None,
        };
        let max_order = match flags.max_order {
            Some(v) => v,
            None => match file.get("max-order") {
                Some(t) => parse_usize("max-order", t)?,
                None => 1,
            },
        };
        if max_order < 1 {
            return Err(Failure::config(format!(
                "max-order: must be at least 1, got {max_order}"
            )));
        }
        let h = match flags.h {
            Some(v) => v,
            None => match file.get("h") {
                Some(t) => parse_f64("h", t)?,
                None => minsurf::conditions::DEFAULT_STEP,
            },
        };
        if !(h.is_finite() && h > 0.0) {
            return Err(Failure::config(format!(
                "h: step must be a positive number, got {h}"
            )));
        }
        let tolerance = match flags.tolerance {
            Some(v) => Some(v),
            None => match file.get("tolerance") {
                Some(t) => Some(parse_f64("tolerance", t)?),
                None => None,
            },
        };
        if let Some(t) = tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(Failure::config(format!(
                    "tolerance: must be a positive number, got {t}"
                )));
            }
        }
        let a = match text(flags.a, "a") {
            Some(t) => Some(parse_list("a", &t)?),
            None => None,
        };
        let theta = match text(flags.theta, "theta") {
            Some(t) => Some(parse_list("theta", &t)?),
            None => None,
        };
        let phi = match flags.phi {
            Some(v) => v,
            None => match file.get("phi") {
                Some(t) => parse_f64("phi", t)?,
                None => DEFAULT_PHI,
            },
        };
        if !phi.is_finite() {
            return Err(Failure::config(format!("phi: must be finite, got {phi}")));
        }
        let audit = match flags.audit {
            Some(v) => Some(v),
            None => match file.get("audit") {
                Some(t) => Some(parse_usize("audit", t)?),
                None => None,
            },
        };
        if audit == Some(0) {
            return Err(Failure::config("audit: must be at least 1, got 0"));
        }
        let m = match flags.m {
            Some(v) => Some(v),
            None => match file.get("m") {
                Some(t) => Some(parse_usize("m", t)?),
                None => None,
            },
        };
        if m == Some(0) {
            return Err(Failure::config("m: must be at least 1, got 0"));
        }
        let format = match flags.format {
            Some(v) => v,
            None => match file.get("format") {
                Some(t) => Format::parse_config(t)?,
                None => Format::Json,
            },
        };
        let seed = match flags.seed {
            Some(v) => v,
            None => match file.get("seed") {
                Some(t) => parse_u64("seed", t)?,
                None => DEFAULT_SEED,
            },
        };
        let threads = match flags.threads {
            Some(v) => Some(v),
            None => match file.get("threads") {
                Some(t) => Some(parse_usize("threads", t)?),
                None => None,
            },
        };
        if threads == Some(0) {
            return Err(Failure::config("threads: must be at least 1, got 0"));
        }
        Ok(Settings {
            surface: text(flags.surface, "surface"),
            spec: flags.spec.or_else(|| file.get("spec").map(PathBuf::from)),
            grid,
            domain,
            max_order,
            h,
            tolerance,
            a,
            theta,
            phi,
            audit,
            m,
            format,
            out: flags.out.or_else(|| file.get("out").map(PathBuf::from)),
            seed,
            threads,
        })
    }
}

/// Sizes the global worker pool from the settings, the environment, or the
/// available parallelism, in that order.
pub fn init_thread_pool(s: &Settings) -> Result<(), Failure> {
    let count = match s.threads {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(text) => {
                let n = parse_usize("threads", &text)?;
                if n == 0 {
                    return Err(Failure::config(format!(
                        "threads: {THREADS_ENV} must be at least 1, got 0"
                    )));
                }
                n
            }
            Err(_) => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|e| Failure::config(format!("threads: cannot build worker pool: {e}")))
}

fn parse_settings_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("config: cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for line in body.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("config: line `{line}` is not key = value")))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Failure::config(format!("config: unknown key `{key}`")));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_usize(key: &str, text: &str) -> Result<usize, Failure> {
    text.trim().parse().map_err(|_| {
        Failure::config(format!(
            "{key}: expected a nonnegative integer, got `{text}`"
        ))
    })
}

fn parse_u64(key: &str, text: &str) -> Result<u64, Failure> {
    text.trim().parse().map_err(|_| {
        Failure::config(format!(
            "{key}: expected a nonnegative integer, got `{text}`"
        ))
    })
}

fn parse_f64(key: &str, text: &str) -> Result<f64, Failure> {
    text.trim()
        .parse()
        .map_err(|_| Failure::config(format!("{key}: expected a number, got `{text}`")))
}

/// Parses a comma-separated list of finite numbers.
fn parse_list(key: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|part| parse_f64(key, part))
        .collect::<Result<_, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::config(format!("{key}: entries must be finite")));
    }
    Ok(values)
}

/// Parses `NXxNY` and enforces the 2x2 minimum.
fn parse_grid(text: &str) -> Result<(usize, usize), Failure> {
    let (nx, ny) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Failure::config(format!("grid: expected NXxNY, got `{text}`")))?;
    let nx = parse_usize("grid", nx)?;
    let ny = parse_usize("grid", ny)?;
    if nx < 2 || ny < 2 {
        return Err(Failure::config(format!(
            "grid: must be at least 2x2, got {nx}x{ny}"
        )));
    }
    Ok((nx, ny))
}

/// Parses `x0,x1,y0,y1` with ordered finite bounds.
fn parse_domain(text: &str) -> Result<Domain, Failure> {
    let v = parse_list("domain", text)?;
    if v.len() != 4 {
        return Err(Failure::config(format!(
            "domain: expected x0,x1,y0,y1, got {} numbers",
            v.len()
        )));
    }
    if v[0] > v[1] || v[2] > v[3] {
        return Err(Failure::config(
            "domain: lower bound exceeds upper bound".to_string(),
        ));
    }
    Ok(Domain {
        x: (v[0], v[1]),
        y: (v[2], v[3]),
    })
}
