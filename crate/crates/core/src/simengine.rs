//! Slotted-CSMA contention loop.
//!
//! In every slot each node, in node-list order, transmits with probability
//! `tau`. No sender makes an idle slot of length `sigma`; one sender is a success
//! lasting its travel time plus `sigma`; several senders collide for the longest
//! of their packets plus `sigma`. The trailing `sigma` after a busy phase is the
//! idle slot every node must sense before contending again.
//!
//! Randomness comes from a ChaCha8 stream seeded with the run's 64-bit seed,
//! so a given network, configuration and seed always yield the same trace.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::CsmaParams;
use crate::error::{Error, Result};
use crate::metrics::TraceSummary;
use crate::protocols::{build, MacProtocol, ProtocolKind, Transmission};
use crate::topology::{HelperAssignment, Network, NodeId};

/// Default number of contention phases per run.
pub const DEFAULT_CONTENTION_PHASES: u64 = 30_000;

/// Which phases count towards the run length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseCounting {
    /// Successes and collisions only.
    #[default]
    Busy,
    /// Every phase, idle slots included.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: CsmaParams,
    pub contention_phases: u64,
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub counting: PhaseCounting,
    /// Counted phases discarded from the ledger before measuring.
    pub warmup_phases: u64,
    /// Hard limit on simulated slots; defaults to `10_000 * (warmup + phases)`.
    pub max_slots: Option<u64>,
}

impl SimConfig {
    pub fn new(params: CsmaParams, protocol: ProtocolKind, seed: u64) -> Self {
        SimConfig {
            params,
            contention_phases: DEFAULT_CONTENTION_PHASES,
            seed,
            protocol,
            counting: PhaseCounting::Busy,
            warmup_phases: 0,
            max_slots: None,
        }
    }

    pub fn with_phases(mut self, phases: u64) -> Self {
        self.contention_phases = phases;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.contention_phases == 0 {
            return Err(Error::invalid("phases", "must be at least 1"));
        }
        if self.max_slots == Some(0) {
            return Err(Error::invalid("max slots", "must be at least 1"));
        }
        Ok(())
    }

    fn slot_cap(&self) -> u64 {
        self.max_slots
            .unwrap_or_else(|| (self.warmup_phases + self.contention_phases).saturating_mul(10_000))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Idle,
    Success,
    Collision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutcome {
    pub kind: PhaseKind,
    pub transmitters: Vec<NodeId>,
    pub duration: f64,
    /// Own bits credited to each owner this phase.
    pub delivered: Vec<(NodeId, u64)>,
}

/// One simulation instance. Owns the random stream, the protocol state and the ledger.
pub struct Engine {
    rng: ChaCha8Rng,
    protocol: Box<dyn MacProtocol>,
    nodes: usize,
    sigma: f64,
    tau: f64,
    summary: TraceSummary,
    senders: Vec<NodeId>,
}

impl Engine {
    pub fn new(net: &Network, assign: &HelperAssignment, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        if net.is_empty() {
            return Err(Error::invalid("network", "has no nodes"));
        }
        if assign.len() != net.len() {
            return Err(Error::invalid(
                "helper assignment",
                "does not match the network",
            ));
        }
        Ok(Engine {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            protocol: build(net, assign, cfg.protocol),
            nodes: net.len(),
            sigma: cfg.params.sigma(),
            tau: cfg.params.tau(),
            summary: TraceSummary::new(net.names().to_vec()),
            senders: Vec::with_capacity(net.len()),
        })
    }

    pub fn summary(&self) -> &TraceSummary {
        &self.summary
    }

    pub fn into_summary(self) -> TraceSummary {
        self.summary
    }

    pub fn protocol(&self) -> &dyn MacProtocol {
        self.protocol.as_ref()
    }

    /// Draws one slot of transmit decisions and resolves the phase it starts.
    pub fn step_phase(&mut self) -> Result<PhaseOutcome> {
        let mut senders = std::mem::take(&mut self.senders);
        senders.clear();
        for k in 0..self.nodes {
            if self.rng.gen::<f64>() < self.tau {
                senders.push(NodeId(k));
            }
        }
        let outcome = self.resolve(&senders);
        self.senders = senders;
        outcome
    }

    /// Resolves a phase in which exactly `senders` transmit.
    pub fn resolve(&mut self, senders: &[NodeId]) -> Result<PhaseOutcome> {
        if let Some(k) = senders.iter().find(|k| k.0 >= self.nodes) {
            return Err(Error::UnknownNode(k.to_string()));
        }
        match senders {
            [] => {
                self.summary.phase_counts.idle += 1;
                self.summary.elapsed += self.sigma;
                Ok(PhaseOutcome {
                    kind: PhaseKind::Idle,
                    transmitters: Vec::new(),
                    duration: self.sigma,
                    delivered: Vec::new(),
                })
            }
            [k] => {
                let tx = self.attempt(*k);
                let effects = self.protocol.on_success(*k, &tx)?;
                for &(node, seconds) in &effects.relay_airtime {
                    self.summary.charge(node, seconds);
                }
                for &(owner, bits) in &effects.delivered {
                    self.summary.credit(owner, bits);
                }
                let duration = tx.travel + self.sigma;
                self.summary.phase_counts.success += 1;
                self.summary.elapsed += duration;
                Ok(PhaseOutcome {
                    kind: PhaseKind::Success,
                    transmitters: vec![*k],
                    duration,
                    delivered: effects.delivered,
                })
            }
            many => {
                let attempts: Vec<Transmission> = many.iter().map(|&k| self.attempt(k)).collect();
                let longest = attempts.iter().map(|t| t.airtime).fold(0.0, f64::max);
                for (&k, tx) in many.iter().zip(&attempts) {
                    self.protocol.on_collision(k, tx);
                }
                let duration = longest + self.sigma;
                self.summary.phase_counts.collision += 1;
                self.summary.elapsed += duration;
                Ok(PhaseOutcome {
                    kind: PhaseKind::Collision,
                    transmitters: many.to_vec(),
                    duration,
                    delivered: Vec::new(),
                })
            }
        }
    }

    /// Asks the protocol what `k` sends and charges its airtime.
    fn attempt(&mut self, k: NodeId) -> Transmission {
        self.summary
            .sample_queue(k, self.protocol.forward_queue_len(k));
        let tx = self.protocol.transmission(k);
        self.summary.charge(k, tx.airtime);
        tx
    }
}

/// Runs until `cfg.contention_phases` counted phases complete after the warm-up.
pub fn run(net: &Network, assign: &HelperAssignment, cfg: &SimConfig) -> Result<TraceSummary> {
    let mut engine = Engine::new(net, assign, cfg)?;
    let cap = cfg.slot_cap();
    let mut slots = 0u64;
    let mut counted = 0u64;
    let target = cfg.warmup_phases + cfg.contention_phases;
    while counted < target {
        if slots == cap {
            return Err(Error::SlotCapExceeded {
                max_slots: cap,
                phases: counted,
            });
        }
        slots += 1;
        let outcome = engine.step_phase()?;
        if cfg.counting == PhaseCounting::All || outcome.kind != PhaseKind::Idle {
            counted += 1;
            if counted == cfg.warmup_phases {
                engine.summary.clear();
            }
        }
    }
    Ok(engine.into_summary())
}

/// Runs independent configurations in parallel; results keep the input order.
pub fn run_many(
    net: &Network,
    assign: &HelperAssignment,
    configs: &[SimConfig],
) -> Vec<Result<TraceSummary>> {
    configs
        .par_iter()
        .map(|cfg| run(net, assign, cfg))
        .collect()
}
