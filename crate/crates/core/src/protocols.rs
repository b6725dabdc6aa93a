//! Node behaviour of Direct Link, CoopMAC and fairMAC.
//!
//! The engine asks a [`MacProtocol`] what a contending node would send
//! ([`MacProtocol::transmission`]) and reports the outcome back through
//! [`MacProtocol::on_success`] or [`MacProtocol::on_collision`]. Acknowledgements
//! take no airtime and are never lost.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::topology::{timing, HelperAssignment, Mode, Network, NodeId};

/// Which protocol the nodes run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Direct,
    CoopMac,
    /// `max_pending` is P, `max_forward` is Q. `usize::MAX` stands for unbounded.
    FairMac {
        max_pending: usize,
        max_forward: usize,
    },
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::Direct => f.write_str("direct"),
            ProtocolKind::CoopMac => f.write_str("coopmac"),
            ProtocolKind::FairMac { .. } => f.write_str("fairmac"),
        }
    }
}

/// What a transmission carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// One own bit straight to the AP.
    Direct,
    /// CoopMAC: own bit to the helper, which forwards it at once.
    Relayed {
        helper: NodeId,
        forward_airtime: f64,
    },
    /// fairMAC: own bit into the helper's forwarding queue.
    FirstHop { helper: NodeId },
    /// fairMAC: one own bit plus the listed queued packets.
    Joint { forwarded: Vec<ForwardedPacket> },
}

/// A source packet waiting in a helper's forwarding queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForwardedPacket {
    pub source: NodeId,
    pub seq: u64,
}

/// A transmission as seen by the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    /// Airtime of the contending packet (`u`); the only part that can collide.
    pub airtime: f64,
    /// Time until the data reaches the AP (`s`), including any immediate relay hop.
    pub travel: f64,
    pub payload: Payload,
}

/// Credits and extra airtime produced by a successful transmission.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuccessEffects {
    /// Own bits delivered to the AP, per owner.
    pub delivered: Vec<(NodeId, u64)>,
    /// Airtime spent by nodes other than the sender, such as a relaying helper.
    pub relay_airtime: Vec<(NodeId, f64)>,
}

pub trait MacProtocol: Send {
    /// Packet node `node` sends if it wins the slot now.
    fn transmission(&self, node: NodeId) -> Transmission;

    fn on_success(&mut self, node: NodeId, tx: &Transmission) -> Result<SuccessEffects>;

    /// The colliding packet is retried later; nothing is acknowledged.
    fn on_collision(&mut self, _node: NodeId, _tx: &Transmission) {}

    /// Length of the forwarding queue held by `node`.
    fn forward_queue_len(&self, _node: NodeId) -> usize {
        0
    }
}

/// Builds the node state machines for `kind`.
pub fn build(net: &Network, assign: &HelperAssignment, kind: ProtocolKind) -> Box<dyn MacProtocol> {
    match kind {
        ProtocolKind::Direct => Box::new(DirectLink::new(net)),
        ProtocolKind::CoopMac => Box::new(CoopMac::new(net, assign)),
        ProtocolKind::FairMac {
            max_pending,
            max_forward,
        } => Box::new(FairMac::new(net, assign, max_pending, max_forward)),
    }
}

/// Every node sends to the AP at its own rate.
#[derive(Debug, Clone)]
pub struct DirectLink {
    airtime: Vec<f64>,
}

impl DirectLink {
    pub fn new(net: &Network) -> Self {
        DirectLink {
            airtime: net.ids().map(|k| 1.0 / net.ap_rate(k)).collect(),
        }
    }
}

impl MacProtocol for DirectLink {
    fn transmission(&self, node: NodeId) -> Transmission {
        let u = self.airtime[node.0];
        Transmission {
            airtime: u,
            travel: u,
            payload: Payload::Direct,
        }
    }

    fn on_success(&mut self, node: NodeId, _tx: &Transmission) -> Result<SuccessEffects> {
        Ok(SuccessEffects {
            delivered: vec![(node, 1)],
            relay_airtime: Vec::new(),
        })
    }
}

/// CoopMAC base mode: relayed nodes send to their helper, which forwards
/// immediately without contention.
#[derive(Debug, Clone)]
pub struct CoopMac {
    helper: Vec<Option<NodeId>>,
    airtime: Vec<f64>,
    travel: Vec<f64>,
}

impl CoopMac {
    pub fn new(net: &Network, assign: &HelperAssignment) -> Self {
        let t = timing(net, assign, Mode::Cooperative);
        CoopMac {
            helper: net.ids().map(|k| assign.helper(k)).collect(),
            airtime: t.packet_duration,
            travel: t.travel_time,
        }
    }
}

impl MacProtocol for CoopMac {
    fn transmission(&self, node: NodeId) -> Transmission {
        let (u, s) = (self.airtime[node.0], self.travel[node.0]);
        let payload = match self.helper[node.0] {
            Some(helper) => Payload::Relayed {
                helper,
                forward_airtime: s - u,
            },
            None => Payload::Direct,
        };
        Transmission {
            airtime: u,
            travel: s,
            payload,
        }
    }

    fn on_success(&mut self, node: NodeId, tx: &Transmission) -> Result<SuccessEffects> {
        let relay_airtime = match tx.payload {
            Payload::Relayed {
                helper,
                forward_airtime,
            } => vec![(helper, forward_airtime)],
            Payload::Direct => Vec::new(),
            ref other => {
                return Err(Error::Protocol(format!("CoopMAC cannot send {other:?}")));
            }
        };
        Ok(SuccessEffects {
            delivered: vec![(node, 1)],
            relay_airtime,
        })
    }
}

/// Source-side fairMAC state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairMacSourceState {
    /// Packets acknowledged by the helper but not yet by the AP (p).
    pub pending: usize,
    /// P
    pub max_pending: usize,
    pub helper: Option<NodeId>,
    next_seq: u64,
}

/// Helper-side fairMAC state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairMacHelperState {
    /// Unbounded, in arrival order.
    pub forward_queue: VecDeque<ForwardedPacket>,
    /// Q
    pub max_forward: usize,
}

/// A helper's own bit bundled with forwarded packets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPacket {
    pub owner: NodeId,
    pub forwarded: Vec<ForwardedPacket>,
    /// `(1 + forwarded.len()) / R_owner`
    pub duration: f64,
}

impl JointPacket {
    /// Assembles from the head of the queue, taking up to `max_forward` packets.
    pub fn assemble(owner: NodeId, ap_rate: f64, helper: &FairMacHelperState) -> Self {
        let m = helper.max_forward.min(helper.forward_queue.len());
        let forwarded: Vec<ForwardedPacket> =
            helper.forward_queue.iter().take(m).copied().collect();
        JointPacket {
            owner,
            duration: (1 + forwarded.len()) as f64 / ap_rate,
            forwarded,
        }
    }
}

/// fairMAC: helpers queue relayed packets and forward up to Q of them with each
/// own transmission; a source routes via its helper while fewer than P of its
/// packets are pending there, and directly otherwise.
#[derive(Debug, Clone)]
pub struct FairMac {
    ap_rate: Vec<f64>,
    first_hop: Vec<Option<f64>>,
    sources: Vec<FairMacSourceState>,
    helpers: Vec<FairMacHelperState>,
}

impl FairMac {
    pub fn new(
        net: &Network,
        assign: &HelperAssignment,
        max_pending: usize,
        max_forward: usize,
    ) -> Self {
        FairMac {
            ap_rate: net.ids().map(|k| net.ap_rate(k)).collect(),
            first_hop: net
                .ids()
                .map(|k| {
                    assign
                        .helper(k)
                        .and_then(|h| net.link_rate(k, h))
                        .map(|r| 1.0 / r)
                })
                .collect(),
            sources: net
                .ids()
                .map(|k| FairMacSourceState {
                    pending: 0,
                    max_pending,
                    helper: assign.helper(k),
                    next_seq: 0,
                })
                .collect(),
            helpers: net
                .ids()
                .map(|_| FairMacHelperState {
                    forward_queue: VecDeque::new(),
                    max_forward,
                })
                .collect(),
        }
    }

    pub fn source(&self, node: NodeId) -> &FairMacSourceState {
        &self.sources[node.0]
    }

    pub fn helper_state(&self, node: NodeId) -> &FairMacHelperState {
        &self.helpers[node.0]
    }

    fn direct(&self, node: NodeId) -> Transmission {
        let u = 1.0 / self.ap_rate[node.0];
        Transmission {
            airtime: u,
            travel: u,
            payload: Payload::Direct,
        }
    }

    fn first_hop_success(&mut self, source: NodeId, helper: NodeId) -> Result<()> {
        let state = &mut self.sources[source.0];
        if state.helper != Some(helper) {
            return Err(Error::Protocol(format!(
                "preACK from {helper} for {source}, which is not its source"
            )));
        }
        let packet = ForwardedPacket {
            source,
            seq: state.next_seq,
        };
        state.next_seq += 1;
        // preACK
        state.pending += 1;
        self.helpers[helper.0].forward_queue.push_back(packet);
        Ok(())
    }

    fn joint_success(
        &mut self,
        owner: NodeId,
        forwarded: &[ForwardedPacket],
    ) -> Result<SuccessEffects> {
        let queue = &mut self.helpers[owner.0].forward_queue;
        if queue.len() < forwarded.len() || !queue.iter().zip(forwarded).all(|(a, b)| a == b) {
            return Err(Error::Protocol(format!(
                "joint packet of {owner} does not match its forwarding queue"
            )));
        }
        queue.drain(..forwarded.len());

        let mut delivered = vec![(owner, 1)];
        // jointACK
        for p in forwarded {
            let state = &mut self.sources[p.source.0];
            if state.pending == 0 {
                return Err(Error::Protocol(format!(
                    "jointACK for {} without pending packets",
                    p.source
                )));
            }
            state.pending -= 1;
            match delivered.iter_mut().find(|(n, _)| *n == p.source) {
                Some((_, bits)) => *bits += 1,
                None => delivered.push((p.source, 1)),
            }
        }
        Ok(SuccessEffects {
            delivered,
            relay_airtime: Vec::new(),
        })
    }
}

impl MacProtocol for FairMac {
    fn transmission(&self, node: NodeId) -> Transmission {
        let source = &self.sources[node.0];
        match (source.helper, self.first_hop[node.0]) {
            (Some(helper), Some(u)) => {
                if source.pending < source.max_pending {
                    Transmission {
                        airtime: u,
                        travel: u,
                        payload: Payload::FirstHop { helper },
                    }
                } else {
                    self.direct(node)
                }
            }
            _ => {
                let joint =
                    JointPacket::assemble(node, self.ap_rate[node.0], &self.helpers[node.0]);
                if joint.forwarded.is_empty() {
                    return self.direct(node);
                }
                Transmission {
                    airtime: joint.duration,
                    travel: joint.duration,
                    payload: Payload::Joint {
                        forwarded: joint.forwarded,
                    },
                }
            }
        }
    }

    fn on_success(&mut self, node: NodeId, tx: &Transmission) -> Result<SuccessEffects> {
        match &tx.payload {
            Payload::Direct => Ok(SuccessEffects {
                delivered: vec![(node, 1)],
                relay_airtime: Vec::new(),
            }),
            Payload::FirstHop { helper } => {
                self.first_hop_success(node, *helper)?;
                Ok(SuccessEffects::default())
            }
            Payload::Joint { forwarded } => self.joint_success(node, forwarded),
            other => Err(Error::Protocol(format!("fairMAC cannot send {other:?}"))),
        }
    }

    fn forward_queue_len(&self, node: NodeId) -> usize {
        self.helpers[node.0].forward_queue.len()
    }
}
