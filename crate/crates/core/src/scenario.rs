//! Line-oriented scenario files.
//!
//! ```text
//! # six agents, four graphs
//! protocol = p2
//! alpha = 0.5
//! x0 = [-5, -3, 7, 9, 4, 5]
//! dt = 0.001
//! schedule = g1:0.25, g2:0.25, g3:0.25, g4:0.25, cyclic
//!
//! [topology.g1]
//! edge 0 1 2
//! ```
//!
//! Top-level `key = value` pairs come first; each `[topology.NAME]` section
//! holds `edge i j w` lines with 0-indexed vertices. `schedule` is either a
//! single topology name or a comma list of `name:dwell` with an optional
//! trailing `cyclic`. It may be omitted when exactly one topology is defined.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::protocols::{ProtocolKind, ProtocolSpec, StateVector};
use crate::sim::{
    Phase, Scenario, SwitchingSchedule, TopologySource, DEFAULT_AGREE_TOL, DEFAULT_DT,
    DEFAULT_RECORD_EVERY, DEFAULT_T_MAX,
};

const KEYS: [&str; 8] = [
    "protocol",
    "alpha",
    "x0",
    "dt",
    "t_max",
    "agree_tol",
    "record_every",
    "schedule",
];

struct RawTopology {
    line: usize,
    edges: Vec<(usize, usize, f64)>,
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| {
        syntax(
            line,
            format!("`{key}` expects a number, got `{}`", v.trim()),
        )
    })
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_vector(line: usize, v: &str) -> Result<Vec<f64>> {
    let inner = v
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| syntax(line, "x0 must be a bracketed list like [0, 1]"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| parse_f64(line, "x0", item))
        .collect()
}

fn parse_schedule(line: usize, v: &str) -> Result<TopologySource> {
    let mut tokens: Vec<&str> = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    let cyclic = tokens.last() == Some(&"cyclic");
    if cyclic {
        tokens.pop();
    }
    if tokens.is_empty() {
        return Err(syntax(line, "schedule lists no topology"));
    }
    if tokens.len() == 1 && !tokens[0].contains(':') {
        if cyclic {
            return Err(syntax(line, "`cyclic` needs `name:dwell` phases"));
        }
        if !valid_name(tokens[0]) {
            return Err(syntax(
                line,
                format!("invalid topology name `{}`", tokens[0]),
            ));
        }
        return Ok(TopologySource::Fixed(tokens[0].to_string()));
    }
    let mut phases = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let (name, dwell) = tok
            .split_once(':')
            .ok_or_else(|| syntax(line, format!("phase `{tok}` must be written name:dwell")))?;
        if !valid_name(name) {
            return Err(syntax(line, format!("invalid topology name `{name}`")));
        }
        phases.push(Phase {
            topology: name.to_string(),
            dwell: parse_f64(line, "schedule", dwell)?,
        });
    }
    SwitchingSchedule::new(phases, cyclic)
        .map(TopologySource::Switching)
        .map_err(|e| Error::Validation(e.to_string()))
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut raw: BTreeMap<String, RawTopology> = BTreeMap::new();
    let mut section: Option<String> = None;

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .and_then(|h| h.trim().strip_prefix("topology."))
                .ok_or_else(|| syntax(line, format!("unknown section `{content}`")))?;
            if !valid_name(name) {
                return Err(syntax(line, format!("invalid topology name `{name}`")));
            }
            if raw.contains_key(name) {
                return Err(syntax(line, format!("topology `{name}` defined twice")));
            }
            raw.insert(
                name.to_string(),
                RawTopology {
                    line,
                    edges: Vec::new(),
                },
            );
            section = Some(name.to_string());
            continue;
        }
        if let Some(name) = &section {
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "edge" {
                return Err(syntax(
                    line,
                    format!("expected `edge i j w` inside [topology.{name}], got `{content}`"),
                ));
            }
            let index = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    syntax(
                        line,
                        format!("vertex index `{s}` is not a nonnegative integer"),
                    )
                })
            };
            let edge = (
                index(fields[1])?,
                index(fields[2])?,
                parse_f64(line, "edge", fields[3])?,
            );
            if let Some(t) = raw.get_mut(name) {
                t.edges.push(edge);
            }
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(syntax(line, format!("unknown key `{key}`")));
        }
        if values.insert(key, (line, value.trim())).is_some() {
            return Err(syntax(line, format!("duplicate key `{key}`")));
        }
    }

    let required = |key: &str| {
        values
            .get(key)
            .copied()
            .ok_or_else(|| Error::Validation(format!("missing required key `{key}`")))
    };

    let (line, kind) = required("protocol")?;
    let kind: ProtocolKind = kind.parse().map_err(|e: String| syntax(line, e))?;
    let alpha = match (kind, values.get("alpha")) {
        (_, Some(&(line, v))) => parse_f64(line, "alpha", v)?,
        (ProtocolKind::Linear, None) => 1.0,
        (_, None) => return Err(Error::Validation("missing required key `alpha`".into())),
    };
    let protocol =
        ProtocolSpec::new(kind, alpha).map_err(|_| Error::Validation(format!(
            "alpha = {alpha} is out of range for protocol {kind} (p1/p2 need 0 < alpha < 1, linear needs 1)"
        )))?;

    let (line, x0) = required("x0")?;
    let x0 = parse_vector(line, x0)?;
    if x0.is_empty() {
        return Err(Error::Validation("x0 must have at least one entry".into()));
    }
    let x0 = StateVector::new(x0).map_err(|e| Error::Validation(e.to_string()))?;
    let n = x0.len();

    let number = |key: &str, default: f64| -> Result<f64> {
        match values.get(key) {
            Some(&(line, v)) => parse_f64(line, key, v),
            None => Ok(default),
        }
    };
    let dt = number("dt", DEFAULT_DT)?;
    let t_max = number("t_max", DEFAULT_T_MAX)?;
    let agree_tol = number("agree_tol", DEFAULT_AGREE_TOL)?;
    let record_every = match values.get("record_every") {
        Some(&(line, v)) => v.parse::<usize>().map_err(|_| {
            syntax(
                line,
                format!("`record_every` expects a positive integer, got `{v}`"),
            )
        })?,
        None => DEFAULT_RECORD_EVERY,
    };

    let mut topologies = BTreeMap::new();
    for (name, t) in raw {
        let topology = Topology::new(n, &t.edges)
            .map_err(|e| Error::Validation(format!("[topology.{name}] (line {}): {e}", t.line)))?;
        topologies.insert(name, topology);
    }

    let source = match values.get("schedule") {
        Some(&(line, v)) => parse_schedule(line, v)?,
        None if topologies.len() == 1 => {
            TopologySource::Fixed(topologies.keys().next().cloned().unwrap_or_default())
        }
        None => {
            return Err(Error::Validation(format!(
                "`schedule` is required when {} topologies are defined",
                topologies.len()
            )))
        }
    };

    let scenario = Scenario {
        protocol,
        topologies,
        source,
        x0,
        dt,
        t_max,
        agree_tol,
        record_every,
    };
    scenario.validate().map_err(|e| match e {
        Error::Validation(_) => e,
        other => Error::Validation(other.to_string()),
    })?;
    Ok(scenario)
}

/// Renders a scenario in the file grammar; `parse_scenario` inverts it.
pub fn render_scenario(sc: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol = {}", sc.protocol.kind());
    if sc.protocol.kind() != ProtocolKind::Linear {
        let _ = writeln!(out, "alpha = {}", sc.protocol.alpha());
    }
    let x0: Vec<String> = sc.x0.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "x0 = [{}]", x0.join(", "));
    let _ = writeln!(out, "dt = {}", sc.dt);
    let _ = writeln!(out, "t_max = {}", sc.t_max);
    let _ = writeln!(out, "agree_tol = {}", sc.agree_tol);
    let _ = writeln!(out, "record_every = {}", sc.record_every);
    match &sc.source {
        TopologySource::Fixed(id) => {
            let _ = writeln!(out, "schedule = {id}");
        }
        TopologySource::Switching(s) => {
            let mut parts: Vec<String> = s
                .phases()
                .iter()
                .map(|p| format!("{}:{}", p.topology, p.dwell))
                .collect();
            if s.cyclic() {
                parts.push("cyclic".into());
            }
            let _ = writeln!(out, "schedule = {}", parts.join(", "));
        }
    }
    for (name, t) in &sc.topologies {
        let _ = writeln!(out, "\n[topology.{name}]");
        for (i, j, w) in t.edges() {
            let _ = writeln!(out, "edge {i} {j} {w}");
        }
    }
    out
}
