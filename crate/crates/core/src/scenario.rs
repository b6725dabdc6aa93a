//! Scenario files: a network plus default run parameters.
//!
//! The format is line based. `#` starts a comment, blank lines are ignored and
//! `[section]` headers switch between sections:
//!
//! ```text
//! [nodes]
//! n1
//! n2
//! n3
//!
//! [ap-rates]
//! n1 = 1
//! n2 = 1
//! n3 = 3
//!
//! [link-rates]
//! n1 -> n3 = 3     # directed
//! n2 <-> n3 = 3    # both directions
//!
//! [power]
//! 1
//!
//! [defaults]
//! sigma = 0.0088
//! tau = 0.045
//! pending = 10
//! forward-max = inf
//! phases = 30000
//! seed = 1
//! ```
//!
//! `[nodes]` fixes the node order. Every node needs an AP rate and `[power]`
//! is mandatory; `[link-rates]` and `[defaults]` may be omitted. Node names
//! use ASCII letters, digits, `_`, `-` and `.`.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::topology::Network;

/// Upper bound on the number of nodes in a scenario.
pub const MAX_NODES: usize = 1024;

/// Default run parameters carried by a scenario; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Defaults {
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub pending: Option<usize>,
    pub forward_max: Option<usize>,
    pub phases: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: Network,
    pub defaults: Defaults,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Nodes,
    ApRates,
    LinkRates,
    Power,
    Defaults,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "nodes" => Section::Nodes,
            "ap-rates" => Section::ApRates,
            "link-rates" => Section::LinkRates,
            "power" => Section::Power,
            "defaults" => Section::Defaults,
            _ => return None,
        })
    }
}

fn parse_err(line: usize, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.into(),
        message: message.into(),
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn parse_rate(line: usize, field: &str, text: &str) -> Result<f64> {
    let value: f64 = text
        .parse()
        .map_err(|_| parse_err(line, field, format!("`{text}` is not a number")))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(parse_err(
            line,
            field,
            format!("must be finite and > 0, got {text}"),
        ));
    }
    Ok(value)
}

fn parse_limit(line: usize, field: &str, text: &str) -> Result<usize> {
    if text == "inf" {
        return Ok(usize::MAX);
    }
    text.parse()
        .map_err(|_| parse_err(line, field, format!("`{text}` is not a count or `inf`")))
}

/// Splits `lhs = rhs`, trimming both sides.
fn split_assignment(line: usize, body: &str, field: &str) -> Result<(String, String)> {
    let (lhs, rhs) = body
        .split_once('=')
        .ok_or_else(|| parse_err(line, field, format!("expected `key = value`, got `{body}`")))?;
    Ok((lhs.trim().to_string(), rhs.trim().to_string()))
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = None;
        let mut nodes: Vec<(String, usize)> = Vec::new();
        let mut ap_rates: Vec<Option<f64>> = Vec::new();
        let mut links: Vec<(usize, String, String, f64)> = Vec::new();
        let mut power: Option<f64> = None;
        let mut defaults = Defaults::default();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        parse_err(line, "section", format!("unterminated header `{body}`"))
                    })?
                    .trim();
                section = Some(Section::parse(name).ok_or_else(|| {
                    parse_err(line, "section", format!("unknown section `{name}`"))
                })?);
                continue;
            }
            match section {
                None => {
                    return Err(parse_err(
                        line,
                        "section",
                        "content before the first section header",
                    ))
                }
                Some(Section::Nodes) => {
                    if !valid_name(body) {
                        return Err(parse_err(
                            line,
                            "node",
                            format!("invalid node name `{body}`"),
                        ));
                    }
                    if nodes.iter().any(|(n, _)| n == body) {
                        return Err(parse_err(line, "node", format!("duplicate node `{body}`")));
                    }
                    if nodes.len() == MAX_NODES {
                        return Err(parse_err(
                            line,
                            "node",
                            format!("more than {MAX_NODES} nodes"),
                        ));
                    }
                    nodes.push((body.to_string(), line));
                    ap_rates.push(None);
                }
                Some(Section::ApRates) => {
                    let (name, value) = split_assignment(line, body, "ap-rate")?;
                    let field = format!("ap-rate of `{name}`");
                    let k = nodes
                        .iter()
                        .position(|(n, _)| *n == name)
                        .ok_or_else(|| parse_err(line, &field, "unknown node"))?;
                    if ap_rates[k].is_some() {
                        return Err(parse_err(line, &field, "given twice"));
                    }
                    ap_rates[k] = Some(parse_rate(line, &field, &value)?);
                }
                Some(Section::LinkRates) => {
                    let (pair, value) = split_assignment(line, body, "link-rate")?;
                    let (from, to, both) = if let Some((a, b)) = pair.split_once("<->") {
                        (a.trim(), b.trim(), true)
                    } else if let Some((a, b)) = pair.split_once("->") {
                        (a.trim(), b.trim(), false)
                    } else {
                        return Err(parse_err(
                            line,
                            "link-rate",
                            format!("expected `a -> b` or `a <-> b`, got `{pair}`"),
                        ));
                    };
                    let field = format!("link-rate `{from}` -> `{to}`");
                    let rate = parse_rate(line, &field, &value)?;
                    links.push((line, from.to_string(), to.to_string(), rate));
                    if both {
                        links.push((line, to.to_string(), from.to_string(), rate));
                    }
                }
                Some(Section::Power) => {
                    if power.is_some() {
                        return Err(parse_err(line, "power", "given twice"));
                    }
                    power = Some(parse_rate(line, "power", body)?);
                }
                Some(Section::Defaults) => {
                    let (key, value) = split_assignment(line, body, "defaults")?;
                    let twice = || parse_err(line, &key, "given twice");
                    match key.as_str() {
                        "sigma" => {
                            if defaults.sigma.is_some() {
                                return Err(twice());
                            }
                            defaults.sigma = Some(parse_rate(line, "sigma", &value)?);
                        }
                        "tau" => {
                            if defaults.tau.is_some() {
                                return Err(twice());
                            }
                            let tau: f64 = value.parse().map_err(|_| {
                                parse_err(line, "tau", format!("`{value}` is not a number"))
                            })?;
                            if !(0.0..=1.0).contains(&tau) {
                                return Err(parse_err(
                                    line,
                                    "tau",
                                    format!("must lie in [0, 1], got {value}"),
                                ));
                            }
                            defaults.tau = Some(tau);
                        }
                        "pending" => {
                            if defaults.pending.is_some() {
                                return Err(twice());
                            }
                            defaults.pending = Some(parse_limit(line, "pending", &value)?);
                        }
                        "forward-max" => {
                            if defaults.forward_max.is_some() {
                                return Err(twice());
                            }
                            defaults.forward_max = Some(parse_limit(line, "forward-max", &value)?);
                        }
                        "phases" => {
                            if defaults.phases.is_some() {
                                return Err(twice());
                            }
                            let phases: u64 = value.parse().map_err(|_| {
                                parse_err(line, "phases", format!("`{value}` is not a count"))
                            })?;
                            if phases == 0 {
                                return Err(parse_err(line, "phases", "must be at least 1"));
                            }
                            defaults.phases = Some(phases);
                        }
                        "seed" => {
                            if defaults.seed.is_some() {
                                return Err(twice());
                            }
                            defaults.seed = Some(value.parse().map_err(|_| {
                                parse_err(
                                    line,
                                    "seed",
                                    format!("`{value}` is not a 64-bit unsigned integer"),
                                )
                            })?);
                        }
                        other => return Err(parse_err(line, other, "unknown default")),
                    }
                }
            }
        }

        let end = text.lines().count().max(1);
        if nodes.is_empty() {
            return Err(parse_err(end, "nodes", "no nodes declared"));
        }
        let power = power.ok_or_else(|| parse_err(end, "power", "missing [power] section"))?;
        let mut rated = Vec::with_capacity(nodes.len());
        for ((name, line), rate) in nodes.into_iter().zip(ap_rates) {
            let rate =
                rate.ok_or_else(|| parse_err(line, format!("ap-rate of `{name}`"), "missing"))?;
            rated.push((name, rate));
        }
        let mut network =
            Network::new(rated, power).map_err(|e| parse_err(end, "network", e.to_string()))?;
        for (line, from, to, rate) in links {
            let field = format!("link-rate `{from}` -> `{to}`");
            if from == to {
                return Err(parse_err(line, &field, "a node cannot link to itself"));
            }
            if network
                .link_rate(
                    network
                        .node(&from)
                        .map_err(|e| parse_err(line, &field, e.to_string()))?,
                    network
                        .node(&to)
                        .map_err(|e| parse_err(line, &field, e.to_string()))?,
                )
                .is_some()
            {
                return Err(parse_err(line, &field, "given twice"));
            }
            network
                .set_link(&from, &to, rate)
                .map_err(|e| parse_err(line, &field, e.to_string()))?;
        }
        Ok(Scenario { network, defaults })
    }
}

fn fmt_limit(v: usize) -> String {
    if v == usize::MAX {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

impl fmt::Display for Scenario {
    /// Writes the scenario in the format accepted by [`Scenario::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let net = &self.network;
        let mut out = String::from("[nodes]\n");
        for name in net.names() {
            writeln!(out, "{name}")?;
        }
        out.push_str("\n[ap-rates]\n");
        for k in net.ids() {
            writeln!(out, "{} = {}", net.name(k), net.ap_rate(k))?;
        }
        if net.links().next().is_some() {
            out.push_str("\n[link-rates]\n");
            for (a, b, r) in net.links() {
                writeln!(out, "{} -> {} = {}", net.name(a), net.name(b), r)?;
            }
        }
        writeln!(out, "\n[power]\n{}", net.power())?;
        let d = &self.defaults;
        if *d != Defaults::default() {
            out.push_str("\n[defaults]\n");
            if let Some(v) = d.sigma {
                writeln!(out, "sigma = {v}")?;
            }
            if let Some(v) = d.tau {
                writeln!(out, "tau = {v}")?;
            }
            if let Some(v) = d.pending {
                writeln!(out, "pending = {}", fmt_limit(v))?;
            }
            if let Some(v) = d.forward_max {
                writeln!(out, "forward-max = {}", fmt_limit(v))?;
            }
            if let Some(v) = d.phases {
                writeln!(out, "phases = {v}")?;
            }
            if let Some(v) = d.seed {
                writeln!(out, "seed = {v}")?;
            }
        }
        f.write_str(&out)
    }
}
