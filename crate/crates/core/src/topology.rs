//! Network description, helper selection and per-node timing.
//!
//! Rates are in bit/s and every packet carries one bit, so `1 / rate` is the
//! airtime of a packet on that link. A node `k` may relay through a helper `h`
//! when the two-hop time `1/R_kh + 1/R_h` is strictly shorter than its direct
//! time `1/R_k`. Helpers always transmit directly themselves.

use std::fmt;

use crate::error::{Error, Result};

/// Index of a node inside a [`Network`], in node-list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Whether nodes use their helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Every node transmits straight to the AP.
    Direct,
    /// Nodes with a helper relay through it.
    Cooperative,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Cooperative => "cooperative",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uplink network: nodes, AP rates, inter-node rates and the common transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    names: Vec<String>,
    ap_rate: Vec<f64>,
    // Row-major `from * n + to`; `None` marks an unusable link.
    link_rate: Vec<Option<f64>>,
    power: f64,
}

fn check_rate(name: impl Into<String>, rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("rate must be finite and > 0, got {rate}"),
        ))
    }
}

impl Network {
    /// Builds a network without inter-node links. Links are added with [`Network::set_link`].
    pub fn new<S: Into<String>>(
        nodes: impl IntoIterator<Item = (S, f64)>,
        power: f64,
    ) -> Result<Self> {
        let mut names = Vec::new();
        let mut ap_rate = Vec::new();
        for (name, rate) in nodes {
            let name = name.into();
            if name.is_empty() {
                return Err(Error::invalid("node", "empty node identifier"));
            }
            if names.contains(&name) {
                return Err(Error::invalid(
                    "node",
                    format!("duplicate node identifier `{name}`"),
                ));
            }
            check_rate(format!("ap rate of `{name}`"), rate)?;
            names.push(name);
            ap_rate.push(rate);
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::invalid(
                "power",
                format!("must be finite and > 0, got {power}"),
            ));
        }
        let n = names.len();
        Ok(Network {
            names,
            ap_rate,
            link_rate: vec![None; n * n],
            power,
        })
    }

    /// Sets the rate of the directed link `from -> to`.
    pub fn set_link(&mut self, from: &str, to: &str, rate: f64) -> Result<()> {
        let a = self.node(from)?;
        let b = self.node(to)?;
        if a == b {
            return Err(Error::invalid(
                "link",
                format!("node `{from}` cannot be its own link endpoint"),
            ));
        }
        check_rate(format!("link rate `{from}` -> `{to}`"), rate)?;
        let n = self.len();
        self.link_rate[a.0 * n + b.0] = Some(rate);
        Ok(())
    }

    /// The three-node example network: two slow nodes that both reach a fast third node at rate 3.
    pub fn three_node_example() -> Self {
        let mut net = Network::new([("n1", 1.0), ("n2", 1.0), ("n3", 3.0)], 1.0)
            .expect("example network is valid");
        net.set_link("n1", "n3", 3.0).expect("valid link");
        net.set_link("n2", "n3", 3.0).expect("valid link");
        net
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    /// Looks up a node by identifier.
    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(NodeId)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.len()
    }

    pub fn ap_rate(&self, id: NodeId) -> f64 {
        self.ap_rate[id.0]
    }

    pub fn link_rate(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.link_rate[from.0 * self.len() + to.0]
    }

    /// All defined links as `(from, to, rate)` in row-major order.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let n = self.len();
        self.link_rate
            .iter()
            .enumerate()
            .filter_map(move |(i, r)| r.map(|r| (NodeId(i / n), NodeId(i % n), r)))
    }

    /// Common transmit power E in watts.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Copy of the network with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        check_rate("scale factor", factor)?;
        let mut out = self.clone();
        for r in &mut out.ap_rate {
            *r *= factor;
        }
        for r in out.link_rate.iter_mut().flatten() {
            *r *= factor;
        }
        Ok(out)
    }

    fn two_hop_time(&self, from: NodeId, via: NodeId) -> Option<f64> {
        self.link_rate(from, via)
            .map(|r| 1.0 / r + 1.0 / self.ap_rate(via))
    }

    /// Best two-hop relay among `candidates` that strictly beats direct transmission.
    fn best_relay(&self, k: NodeId, candidates: impl Iterator<Item = NodeId>) -> Option<NodeId> {
        let mut best: Option<(NodeId, f64)> = None;
        for h in candidates.filter(|&h| h != k) {
            if let Some(t) = self.two_hop_time(k, h) {
                // strict `<` keeps the earliest node on ties
                if best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((h, t));
                }
            }
        }
        best.filter(|&(_, t)| t < 1.0 / self.ap_rate(k))
            .map(|(h, _)| h)
    }

    /// Nodes for which no two-hop path beats the direct link; only these may help.
    fn eligible_helpers(&self) -> Vec<bool> {
        self.ids()
            .map(|k| self.best_relay(k, self.ids()).is_none())
            .collect()
    }
}

/// Picks the helper of `k`: the eligible relay minimising `1/R_kh + 1/R_h`, if that
/// beats `1/R_k`. Eligible relays are nodes that have no faster two-hop path themselves.
pub fn select_helper(net: &Network, k: NodeId) -> Result<Option<NodeId>> {
    if !net.contains(k) {
        return Err(Error::UnknownNode(k.to_string()));
    }
    let eligible = net.eligible_helpers();
    Ok(net.best_relay(k, net.ids().filter(|h| eligible[h.0])))
}

/// Class of a node under a [`HelperAssignment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Transmits directly and helps nobody.
    Direct,
    /// Transmits directly and relays for at least one node.
    Helper,
    /// Relays its own data through a helper.
    Relayed,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Direct => "direct",
            NodeClass::Helper => "helper",
            NodeClass::Relayed => "relayed",
        }
    }
}

/// Helper of every node together with the derived direct/relayed/helper sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelperAssignment {
    helper: Vec<Option<NodeId>>,
    help_count: Vec<usize>,
}

impl HelperAssignment {
    pub fn len(&self) -> usize {
        self.helper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.helper.is_empty()
    }

    pub fn helper(&self, k: NodeId) -> Option<NodeId> {
        self.helper[k.0]
    }

    /// Number of nodes that relay through `k` (H_k).
    pub fn help_count(&self, k: NodeId) -> usize {
        self.help_count[k.0]
    }

    pub fn class(&self, k: NodeId) -> NodeClass {
        match (self.helper[k.0], self.help_count[k.0]) {
            (Some(_), _) => NodeClass::Relayed,
            (None, 0) => NodeClass::Direct,
            (None, _) => NodeClass::Helper,
        }
    }

    fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.len()).map(NodeId)
    }

    /// Nodes transmitting their first hop straight to the AP.
    pub fn direct_set(&self) -> Vec<NodeId> {
        self.ids().filter(|&k| self.helper(k).is_none()).collect()
    }

    /// Nodes relaying through a helper.
    pub fn relayed_set(&self) -> Vec<NodeId> {
        self.ids().filter(|&k| self.helper(k).is_some()).collect()
    }

    /// Nodes helping at least one other node.
    pub fn helper_set(&self) -> Vec<NodeId> {
        self.ids().filter(|&k| self.help_count(k) > 0).collect()
    }
}

/// Applies [`select_helper`] to every node.
pub fn classify(net: &Network) -> HelperAssignment {
    let eligible = net.eligible_helpers();
    let helper: Vec<Option<NodeId>> = net
        .ids()
        .map(|k| net.best_relay(k, net.ids().filter(|h| eligible[h.0])))
        .collect();
    let mut help_count = vec![0; net.len()];
    for h in helper.iter().flatten() {
        help_count[h.0] += 1;
    }
    HelperAssignment { helper, help_count }
}

/// Per-node travel time `s_k` and first-hop packet duration `u_k`, in seconds per bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingProfile {
    pub travel_time: Vec<f64>,
    pub packet_duration: Vec<f64>,
    pub mode: Mode,
}

impl TimingProfile {
    pub fn len(&self) -> usize {
        self.travel_time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.travel_time.is_empty()
    }
}

pub fn timing(net: &Network, assign: &HelperAssignment, mode: Mode) -> TimingProfile {
    let mut travel_time = Vec::with_capacity(net.len());
    let mut packet_duration = Vec::with_capacity(net.len());
    for k in net.ids() {
        let direct = 1.0 / net.ap_rate(k);
        match (mode, assign.helper(k)) {
            (Mode::Cooperative, Some(h)) => {
                let first = 1.0 / net.link_rate(k, h).expect("helper link exists");
                travel_time.push(first + 1.0 / net.ap_rate(h));
                packet_duration.push(first);
            }
            _ => {
                travel_time.push(direct);
                packet_duration.push(direct);
            }
        }
    }
    TimingProfile {
        travel_time,
        packet_duration,
        mode,
    }
}

/// H_k as seen by a mode: zero for everybody in direct mode.
pub fn help_counts(assign: &HelperAssignment, mode: Mode) -> Vec<usize> {
    match mode {
        Mode::Direct => vec![0; assign.len()],
        Mode::Cooperative => assign.help_count.clone(),
    }
}
