//! Strict plain-text run configuration: `key = value` lines grouped
//! under `[section]` headers. Unknown sections or keys are hard errors
//! so a typo in a physics parameter cannot silently pick up a default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::experiments::ExperimentConfig;
use crate::solver::{Bc, EllipticBc, Limiter};
use crate::{Error, Real, Result};

/// Where a run puts its artifacts and how often it records probes.
#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: String,
    pub probe_every: Real,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into(), probe_every: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
    /// Canonical `section.key = value` pairs, sorted; hashing this list
    /// makes the config hash independent of key order in the file.
    pub canonical: Vec<(String, String)>,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Sections {
    path: String,
    map: BTreeMap<String, Entry>,
    section_lines: BTreeMap<String, usize>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("riemann", &["h_minus", "h_plus", "mu", "u_plus"]),
    ("soliton", &["sigma", "z_minus", "z_plus", "offset"]),
    (
        "solver",
        &[
            "dx", "x_left", "x_right", "t_end", "cfl", "limiter", "bc", "elliptic_bc",
            "output_every", "step_width", "dispersion",
        ],
    ),
    ("output", &["dir", "probe_every"]),
];

impl Sections {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Config { path: self.path.clone(), line, msg: msg.into() }
    }

    fn parse(path: &str, text: &str) -> Result<Self> {
        let mut s = Sections {
            path: path.to_string(),
            map: BTreeMap::new(),
            section_lines: BTreeMap::new(),
        };
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let name = name.trim().to_string();
                if !KNOWN.iter().any(|(sec, _)| *sec == name) {
                    return Err(s.err(line, format!("unknown section [{name}]")));
                }
                s.section_lines.entry(name.clone()).or_insert(line);
                section = Some(name);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(s.err(line, format!("expected `key = value`, got `{content}`")));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(sec) = &section else {
                return Err(s.err(line, format!("`{key}` appears before any [section] header")));
            };
            let allowed = KNOWN.iter().find(|(name, _)| name == sec).unwrap().1;
            if !allowed.contains(&key) {
                return Err(s.err(line, format!("unknown key `{key}` in section [{sec}]")));
            }
            let full = format!("{sec}.{key}");
            if s.map.contains_key(&full) {
                return Err(s.err(line, format!("duplicate key `{key}` in section [{sec}]")));
            }
            s.map.insert(full, Entry { value: value.to_string(), line, used: false });
        }
        Ok(s)
    }

    fn section_line(&self, sec: &str) -> usize {
        self.section_lines.get(sec).copied().unwrap_or(0)
    }

    fn raw(&mut self, sec: &str, key: &str) -> Option<(String, usize)> {
        self.map.get_mut(&format!("{sec}.{key}")).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn required<T: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Result<T> {
        match self.raw(sec, key) {
            Some((v, line)) => v
                .parse()
                .map_err(|_| self.err(line, format!("cannot parse `{v}` for `{key}`"))),
            None => Err(self.err(
                self.section_line(sec),
                format!("missing required key `{key}` in section [{sec}]"),
            )),
        }
    }

    fn optional<T: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Result<Option<T>> {
        match self.raw(sec, key) {
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(line, format!("cannot parse `{v}` for `{key}`"))),
            None => Ok(None),
        }
    }
}

/// Parse a config file from text. `path` is only used in diagnostics.
pub fn parse(path: &str, text: &str) -> Result<RunConfig> {
    let mut s = Sections::parse(path, text)?;

    let h_minus: Real = s.required("riemann", "h_minus")?;
    let h_plus: Real = s.required("riemann", "h_plus")?;
    let mu: i8 = s.required("riemann", "mu")?;
    let u_plus: Real = s.optional("riemann", "u_plus")?.unwrap_or(0.0);

    let sigma: i8 = s.optional("soliton", "sigma")?.unwrap_or(1);
    let z_minus: Option<Real> = s.optional("soliton", "z_minus")?;
    let z_plus: Option<Real> = s.optional("soliton", "z_plus")?;
    if z_minus.is_some() && z_plus.is_some() {
        return Err(s.err(
            s.section_line("soliton"),
            "give z_minus or z_plus, not both",
        ));
    }
    let offset: Real = s.optional("soliton", "offset")?.unwrap_or(0.0);

    let mut cfg = ExperimentConfig::new(h_minus, h_plus, mu, sigma);
    cfg.u_plus = u_plus;
    cfg.z_minus = z_minus;
    cfg.z_plus = z_plus;
    cfg.soliton_offset = offset;

    cfg.dx = s.required("solver", "dx")?;
    let x_left: Real = s.required("solver", "x_left")?;
    let x_right: Real = s.required("solver", "x_right")?;
    cfg.domain = (x_left, x_right);
    cfg.solver.t_end = s.required("solver", "t_end")?;
    if let Some(c) = s.optional("solver", "cfl")? {
        cfg.solver.cfl = c;
    }
    if let Some(w) = s.optional("solver", "step_width")? {
        cfg.step_width = w;
    }
    if let Some((v, line)) = s.raw("solver", "limiter") {
        cfg.solver.limiter = match v.as_str() {
            "minmod" => Limiter::Minmod,
            "none" => Limiter::None,
            _ => return Err(s.err(line, format!("limiter must be minmod|none, got `{v}`"))),
        };
    }
    if let Some((v, line)) = s.raw("solver", "bc") {
        cfg.solver.bc = match v.as_str() {
            "outflow" => Bc::Outflow,
            "periodic" => Bc::Periodic,
            _ => return Err(s.err(line, format!("bc must be outflow|periodic, got `{v}`"))),
        };
    }
    if let Some((v, line)) = s.raw("solver", "elliptic_bc") {
        cfg.solver.elliptic_bc = match v.as_str() {
            "zero_flux" => EllipticBc::ZeroFlux,
            "zero_value" => EllipticBc::ZeroValue,
            _ => {
                return Err(
                    s.err(line, format!("elliptic_bc must be zero_flux|zero_value, got `{v}`"))
                )
            }
        };
    }
    cfg.solver.output_every = s.optional("solver", "output_every")?;
    if let Some((v, line)) = s.raw("solver", "dispersion") {
        cfg.solver.dispersion = match v.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(s.err(line, format!("dispersion must be true|false, got `{v}`"))),
        };
    }

    let mut output = OutputConfig::default();
    if let Some((v, _)) = s.raw("output", "dir") {
        output.dir = v;
    }
    if let Some(p) = s.optional("output", "probe_every")? {
        output.probe_every = p;
    }

    debug_assert!(s.map.values().all(|e| e.used));
    cfg.validate().map_err(|e| Error::Config {
        path: path.to_string(),
        line: 0,
        msg: e.to_string(),
    })?;

    let canonical = s
        .map
        .iter()
        .map(|(k, e)| (k.clone(), e.value.clone()))
        .collect();
    Ok(RunConfig { experiment: cfg, output, canonical })
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&path.display().to_string(), &text)
}
