//! Flat key-value experiment configuration with section headers.
//!
//! ```text
//! # comment
//! [scenario]
//! anchors = 4
//! topology = pyramid 5 5 5
//! rotation_deg = 20 -25 10
//!
//! [sweep]
//! zeta_db = 20 30 40
//! trials = 2000
//! ```
//!
//! Lists are whitespace-separated; explicit coordinate matrices separate
//! columns with `;`. Unknown keys in a recognized section are errors
//! (they are usually typos); a `[manifest]` section is ignored so a sweep
//! manifest can be re-run as a config.

use std::collections::BTreeSet;
use std::str::FromStr;

use nalgebra::DMatrix;
use rbl_core::estimators::NewtonSettings;
use rbl_core::geometry::EulerOrder;
use rbl_core::measurement::WhitenOptions;
use rbl_core::montecarlo::{EstimatorKind, ExperimentConfig, Topology};

/// A parsed section: ordered `(key, value)` pairs.
#[derive(Debug, Default, Clone)]
struct Section {
    entries: Vec<(String, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// The raw parse of a config file.
#[derive(Debug, Default)]
pub struct RawConfig {
    sections: Vec<(String, Section)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut sections: Vec<(String, Section)> = Vec::new();
        let mut current: Option<usize> = None;
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| format!("line {}: unterminated section header", lineno + 1))?
                    .trim()
                    .to_ascii_lowercase();
                if sections.iter().any(|(n, _)| *n == name) {
                    return Err(format!("line {}: duplicate section [{}]", lineno + 1, name));
                }
                sections.push((name, Section::default()));
                current = Some(sections.len() - 1);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let idx = current
                .ok_or_else(|| format!("line {}: key outside any [section]", lineno + 1))?;
            let key = key.trim().to_ascii_lowercase();
            let section = &mut sections[idx].1;
            if section.get(&key).is_some() {
                return Err(format!("line {}: duplicate key `{}`", lineno + 1, key));
            }
            section.entries.push((key, value.trim().to_string()));
        }
        Ok(Self { sections })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    fn check_sections(&self, allowed: &[&str]) -> Result<(), String> {
        for (name, _) in &self.sections {
            if name != "manifest" && !allowed.contains(&name.as_str()) {
                return Err(format!("unknown section [{name}]"));
            }
        }
        Ok(())
    }

    fn check_keys(&self, section: &str, allowed: &[&str]) -> Result<(), String> {
        if let Some(s) = self.section(section) {
            for (key, _) in &s.entries {
                if !allowed.contains(&key.as_str()) {
                    return Err(format!("unknown key `{key}` in [{section}]"));
                }
            }
        }
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.section(section).and_then(|s| s.get(key))
    }

    fn require(&self, section: &str, key: &str) -> Result<&str, String> {
        self.get(section, key)
            .ok_or_else(|| format!("missing `{key}` in [{section}]"))
    }
}

fn parse_scalar<T: FromStr>(value: &str, what: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{value}` as {what}"))
}

fn parse_f64_list(value: &str, what: &str) -> Result<Vec<f64>, String> {
    value
        .split_whitespace()
        .map(|tok| parse_scalar::<f64>(tok, what))
        .collect()
}

fn parse_vec3(value: &str, what: &str) -> Result<[f64; 3], String> {
    let list = parse_f64_list(value, what)?;
    <[f64; 3]>::try_from(list).map_err(|v| format!("{what} needs 3 numbers, got {}", v.len()))
}

/// Parse a `;`-separated list of xyz triples into a 3×N matrix.
fn parse_columns(value: &str, what: &str) -> Result<DMatrix<f64>, String> {
    let mut cols: Vec<[f64; 3]> = Vec::new();
    for chunk in value.split(';') {
        let chunk = chunk.trim();
        if chunk.is_empty() {
            continue;
        }
        cols.push(parse_vec3(chunk, what)?);
    }
    if cols.is_empty() {
        return Err(format!("{what} is empty"));
    }
    Ok(DMatrix::from_fn(3, cols.len(), |i, j| cols[j][i]))
}

fn parse_topology(raw: &RawConfig) -> Result<Topology, String> {
    let spec = raw.require("scenario", "topology")?;
    let mut parts = spec.split_whitespace();
    match parts.next() {
        Some("pyramid") => {
            let dims: Vec<f64> = parts
                .map(|tok| parse_scalar::<f64>(tok, "pyramid dimension"))
                .collect::<Result<_, _>>()?;
            if dims.len() != 3 {
                return Err("topology = pyramid needs `length width height`".into());
            }
            Ok(Topology::Pyramid {
                length: dims[0],
                width: dims[1],
                height: dims[2],
            })
        }
        Some("explicit") => {
            let sensors = raw.require("scenario", "sensors")?;
            Ok(Topology::Explicit(parse_columns(sensors, "sensors")?))
        }
        other => Err(format!(
            "unknown topology `{}` (expected `pyramid l w h` or `explicit`)",
            other.unwrap_or("")
        )),
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "anchors",
    "anchor_radius_m",
    "anchor_positions",
    "topology",
    "sensors",
    "rotation_deg",
    "euler_order",
    "translation_m",
    "zeta_db",
    "seed",
];
const SWEEP_KEYS: &[&str] = &[
    "zeta_db",
    "trials",
    "sigma_e_m",
    "estimators",
    "seed",
    "fixed_anchors",
];
const NEWTON_KEYS: &[&str] = &["epsilon", "max_iterations", "linesearch_grid"];
const WHITEN_KEYS: &[&str] = &["reference_sensor", "clamp_floor"];

fn parse_newton(raw: &RawConfig) -> Result<NewtonSettings, String> {
    raw.check_keys("newton", NEWTON_KEYS)?;
    let mut settings = NewtonSettings::default();
    if let Some(v) = raw.get("newton", "epsilon") {
        settings.epsilon = parse_scalar(v, "epsilon")?;
    }
    if let Some(v) = raw.get("newton", "max_iterations") {
        settings.max_iterations = parse_scalar(v, "max_iterations")?;
    }
    if let Some(v) = raw.get("newton", "linesearch_grid") {
        settings.linesearch_grid = parse_scalar(v, "linesearch_grid")?;
    }
    Ok(settings)
}

fn parse_whiten(raw: &RawConfig) -> Result<WhitenOptions, String> {
    raw.check_keys("whiten", WHITEN_KEYS)?;
    let mut opts = WhitenOptions::default();
    if let Some(v) = raw.get("whiten", "reference_sensor") {
        opts.reference_sensor = parse_scalar(v, "reference_sensor")?;
    }
    if let Some(v) = raw.get("whiten", "clamp_floor") {
        opts.clamp_floor = match v {
            "none" | "off" => None,
            other => Some(parse_scalar(other, "clamp_floor")?),
        };
    }
    Ok(opts)
}

fn parse_scenario_common(raw: &RawConfig) -> Result<(usize, f64, Topology, [f64; 3], EulerOrder, [f64; 3]), String> {
    let anchors = parse_scalar(raw.require("scenario", "anchors")?, "anchors")?;
    let radius = match raw.get("scenario", "anchor_radius_m") {
        Some(v) => parse_scalar(v, "anchor_radius_m")?,
        None => 500.0,
    };
    let topology = parse_topology(raw)?;
    let rotation = parse_vec3(raw.require("scenario", "rotation_deg")?, "rotation_deg")?;
    let order = match raw.get("scenario", "euler_order") {
        Some(v) => v
            .parse::<EulerOrder>()
            .map_err(|e| e.to_string())?,
        None => EulerOrder::Xyz,
    };
    let translation = parse_vec3(raw.require("scenario", "translation_m")?, "translation_m")?;
    Ok((anchors, radius, topology, rotation, order, translation))
}

/// A fully resolved sweep configuration.
pub fn parse_sweep(text: &str) -> Result<ExperimentConfig, String> {
    let raw = RawConfig::parse(text)?;
    raw.check_sections(&["scenario", "sweep", "newton", "whiten"])?;
    raw.check_keys("scenario", SCENARIO_KEYS)?;
    raw.check_keys("sweep", SWEEP_KEYS)?;
    if raw.get("scenario", "anchor_positions").is_some() {
        return Err("anchor_positions is only supported by the estimate command".into());
    }
    if raw.get("scenario", "zeta_db").is_some() {
        return Err("zeta_db belongs in [sweep] for sweep configs".into());
    }
    if raw.get("scenario", "seed").is_some() {
        return Err("seed belongs in [sweep] for sweep configs".into());
    }

    let (anchors, anchor_radius_m, topology, rotation_deg, euler_order, translation_m) =
        parse_scenario_common(&raw)?;

    let zeta_db = parse_f64_list(raw.require("sweep", "zeta_db")?, "zeta_db")?;
    if zeta_db.is_empty() {
        return Err("zeta_db list is empty".into());
    }
    let trials = parse_scalar(raw.require("sweep", "trials")?, "trials")?;
    let sigma_e_m = match raw.get("sweep", "sigma_e_m") {
        Some(v) => parse_scalar(v, "sigma_e_m")?,
        None => 0.0,
    };
    let estimators = match raw.get("sweep", "estimators") {
        Some(v) => v
            .split_whitespace()
            .map(|tok| tok.parse::<EstimatorKind>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?,
        None => EstimatorKind::ALL.to_vec(),
    };
    let seed = match raw.get("sweep", "seed") {
        Some(v) => parse_scalar(v, "seed")?,
        None => 1,
    };
    let fixed_anchors = match raw.get("sweep", "fixed_anchors") {
        Some(v) => parse_scalar(v, "fixed_anchors")?,
        None => false,
    };

    Ok(ExperimentConfig {
        anchors,
        anchor_radius_m,
        topology,
        rotation_deg,
        euler_order,
        translation_m,
        zeta_db,
        trials,
        sigma_e_m,
        estimators,
        seed,
        fixed_anchors,
        newton: parse_newton(&raw)?,
        whiten: parse_whiten(&raw)?,
    })
}

/// Scenario description for single estimations.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub anchors: usize,
    pub anchor_radius_m: f64,
    /// Explicit anchor coordinates; when absent, anchors are drawn from
    /// the seed.
    pub anchor_positions: Option<DMatrix<f64>>,
    pub topology: Topology,
    pub rotation_deg: [f64; 3],
    pub euler_order: EulerOrder,
    pub translation_m: [f64; 3],
    pub zeta_db: f64,
    pub seed: u64,
    pub newton: NewtonSettings,
    pub whiten: WhitenOptions,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, String> {
    let raw = RawConfig::parse(text)?;
    raw.check_sections(&["scenario", "sweep", "newton", "whiten"])?;
    raw.check_keys("scenario", SCENARIO_KEYS)?;

    let (anchors, anchor_radius_m, topology, rotation_deg, euler_order, translation_m) =
        parse_scenario_common(&raw)?;
    let anchor_positions = raw
        .get("scenario", "anchor_positions")
        .map(|v| parse_columns(v, "anchor_positions"))
        .transpose()?;
    if let Some(a) = &anchor_positions {
        if a.ncols() != anchors {
            return Err(format!(
                "anchor_positions has {} columns but anchors = {anchors}",
                a.ncols()
            ));
        }
    }
    let zeta_db = match raw.get("scenario", "zeta_db") {
        Some(v) => parse_scalar(v, "zeta_db")?,
        None => 80.0,
    };
    let seed = match raw.get("scenario", "seed") {
        Some(v) => parse_scalar(v, "seed")?,
        None => 1,
    };

    Ok(ScenarioConfig {
        anchors,
        anchor_radius_m,
        anchor_positions,
        topology,
        rotation_deg,
        euler_order,
        translation_m,
        zeta_db,
        seed,
        newton: parse_newton(&raw)?,
        whiten: parse_whiten(&raw)?,
    })
}

fn render_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical text form of a resolved sweep configuration; parsing it
/// back yields an identical configuration.
pub fn render_sweep(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("[scenario]\n");
    out.push_str(&format!("anchors = {}\n", cfg.anchors));
    out.push_str(&format!("anchor_radius_m = {}\n", cfg.anchor_radius_m));
    match &cfg.topology {
        Topology::Pyramid {
            length,
            width,
            height,
        } => out.push_str(&format!("topology = pyramid {length} {width} {height}\n")),
        Topology::Explicit(c) => {
            out.push_str("topology = explicit\n");
            let cols: Vec<String> = c
                .column_iter()
                .map(|col| format!("{} {} {}", col[0], col[1], col[2]))
                .collect();
            out.push_str(&format!("sensors = {}\n", cols.join(" ; ")));
        }
    }
    out.push_str(&format!("rotation_deg = {}\n", render_floats(&cfg.rotation_deg)));
    out.push_str(&format!("euler_order = {}\n", cfg.euler_order.as_str()));
    out.push_str(&format!("translation_m = {}\n", render_floats(&cfg.translation_m)));
    out.push_str("\n[sweep]\n");
    out.push_str(&format!("zeta_db = {}\n", render_floats(&cfg.zeta_db)));
    out.push_str(&format!("trials = {}\n", cfg.trials));
    out.push_str(&format!("sigma_e_m = {}\n", cfg.sigma_e_m));
    let tags: Vec<&str> = cfg
        .estimators
        .iter()
        .map(|k| match k {
            EstimatorKind::Classical => "classical",
            EstimatorKind::Ls => "ls",
            EstimatorKind::SucLs => "suc-ls",
            EstimatorKind::OucLs => "ouc-ls",
            EstimatorKind::SucTls => "suc-tls",
            EstimatorKind::OucTls => "ouc-tls",
        })
        .collect();
    out.push_str(&format!("estimators = {}\n", tags.join(" ")));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("fixed_anchors = {}\n", cfg.fixed_anchors));
    out.push_str("\n[newton]\n");
    out.push_str(&format!("epsilon = {}\n", cfg.newton.epsilon));
    out.push_str(&format!("max_iterations = {}\n", cfg.newton.max_iterations));
    out.push_str(&format!("linesearch_grid = {}\n", cfg.newton.linesearch_grid));
    out.push_str("\n[whiten]\n");
    out.push_str(&format!("reference_sensor = {}\n", cfg.whiten.reference_sensor));
    match cfg.whiten.clamp_floor {
        Some(floor) => out.push_str(&format!("clamp_floor = {floor}\n")),
        None => out.push_str("clamp_floor = none\n"),
    }
    out
}

/// Sanity check used by tests: every estimator tag round-trips.
#[allow(dead_code)]
fn estimator_tags() -> BTreeSet<&'static str> {
    ["classical", "ls", "suc-ls", "ouc-ls", "suc-tls", "ouc-tls"]
        .into_iter()
        .collect()
}
