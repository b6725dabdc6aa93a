//! Brute-force evaluation of one CSMA phase over all `2^N` transmit patterns.
//!
//! Serves as ground truth for [`crate::analytic::csma_phase_expectations`]. Each
//! pattern's probability is the plain product of per-node `tau` / `1 - tau`
//! factors and its duration follows directly from who transmits.

use crate::analytic::{CsmaParams, PhaseExpectations};
use crate::error::{Error, Result};
use crate::topology::{timing, HelperAssignment, Mode, Network, NodeId};

/// Largest network the enumeration accepts.
pub const MAX_ENUMERATION_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Idle,
    Success(NodeId),
    Collision,
}

/// One transmit pattern: bit `k` of `mask` set means node `k` transmits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pattern {
    pub mask: u32,
    pub probability: f64,
    pub kind: PatternKind,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEnumeration {
    pub nodes: usize,
    pub sigma: f64,
    pub patterns: Vec<Pattern>,
}

impl PhaseEnumeration {
    pub fn new(
        net: &Network,
        assign: &HelperAssignment,
        mode: Mode,
        params: CsmaParams,
    ) -> Result<Self> {
        let n = net.len();
        if n == 0 {
            return Err(Error::invalid("network", "has no nodes"));
        }
        if n > MAX_ENUMERATION_NODES {
            return Err(Error::EnumerationTooLarge {
                nodes: n,
                max: MAX_ENUMERATION_NODES,
            });
        }
        let tau = params.tau();
        let sigma = params.sigma();
        let profile = timing(net, assign, mode);

        let patterns = (0..1u32 << n)
            .map(|mask| {
                let mut probability = 1.0;
                let mut senders = Vec::new();
                for k in 0..n {
                    if mask >> k & 1 == 1 {
                        probability *= tau;
                        senders.push(k);
                    } else {
                        probability *= 1.0 - tau;
                    }
                }
                let (kind, duration) = match senders.as_slice() {
                    [] => (PatternKind::Idle, sigma),
                    [k] => (
                        PatternKind::Success(NodeId(*k)),
                        profile.travel_time[*k] + sigma,
                    ),
                    many => {
                        let longest = many
                            .iter()
                            .map(|&k| profile.packet_duration[k])
                            .fold(f64::MIN, f64::max);
                        (PatternKind::Collision, longest + sigma)
                    }
                };
                Pattern {
                    mask,
                    probability,
                    kind,
                    duration,
                }
            })
            .collect();

        Ok(PhaseEnumeration {
            nodes: n,
            sigma,
            patterns,
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.patterns.iter().map(|p| p.probability).sum()
    }

    /// Probability mass of the collision patterns.
    pub fn collision_probability(&self) -> f64 {
        self.mass(|k| k == PatternKind::Collision)
    }

    /// Expected phase length summed pattern by pattern.
    pub fn mean_duration(&self) -> f64 {
        self.patterns
            .iter()
            .map(|p| p.probability * p.duration)
            .sum()
    }

    fn mass(&self, pred: impl Fn(PatternKind) -> bool) -> f64 {
        self.patterns
            .iter()
            .filter(|p| pred(p.kind))
            .map(|p| p.probability)
            .sum()
    }

    fn weighted(&self, pred: impl Fn(PatternKind) -> bool) -> f64 {
        self.patterns
            .iter()
            .filter(|p| pred(p.kind))
            .map(|p| p.probability * p.duration)
            .sum()
    }

    pub fn expectations(&self) -> PhaseExpectations {
        let success_mass = self.mass(|k| matches!(k, PatternKind::Success(_)));
        PhaseExpectations {
            nodes: self.nodes,
            p_success: success_mass / self.nodes as f64,
            p_idle: self.mass(|k| k == PatternKind::Idle),
            t_idle: self.weighted(|k| k == PatternKind::Idle),
            t_success: self.weighted(|k| matches!(k, PatternKind::Success(_))),
            t_collision: self.weighted(|k| k == PatternKind::Collision),
        }
    }
}

/// Phase expectations by exhaustive enumeration; refuses networks above
/// [`MAX_ENUMERATION_NODES`].
pub fn enumerate_phase(
    net: &Network,
    assign: &HelperAssignment,
    mode: Mode,
    params: CsmaParams,
) -> Result<PhaseExpectations> {
    Ok(PhaseEnumeration::new(net, assign, mode, params)?.expectations())
}

/// Largest absolute difference between two sets of phase expectations.
pub fn max_abs_difference(a: &PhaseExpectations, b: &PhaseExpectations) -> f64 {
    [
        a.p_success - b.p_success,
        a.p_idle - b.p_idle,
        a.t_idle - b.t_idle,
        a.t_success - b.t_success,
        a.t_collision - b.t_collision,
    ]
    .iter()
    .fold(0.0, |m, d| m.max(d.abs()))
}
