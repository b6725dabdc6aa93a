//! Throughput and bit-cost of cooperative slotted-CSMA uplinks.
//!
//! Nodes send one-bit packets to a common access point. With Direct Link every
//! node transmits straight to the AP; with CoopMAC slow nodes relay through a
//! faster helper that forwards at once; with fairMAC the helper queues relayed
//! packets and decides itself when to forward them, bundled with its own data.
//!
//! - [`topology`]: networks, helper selection, travel times and packet durations
//! - [`analytic`]: round-robin and CSMA closed forms, small-slot limits, timesharing
//! - [`oracle`]: exhaustive enumeration of one contention phase
//! - [`protocols`]: per-node state machines of the three protocols
//! - [`simengine`]: the seeded slot-by-slot contention loop
//! - [`metrics`]: run ledgers and empirical operating points
//! - [`scenario`]: the scenario file format
//! - [`cli`]: commands of the `fairmac` binary, producing CSV

pub mod analytic;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod protocols;
pub mod scenario;
pub mod simengine;
pub mod topology;

pub use analytic::{CsmaParams, OperatingPoint, PhaseExpectations};
pub use error::{Error, Result};
pub use metrics::TraceSummary;
pub use protocols::ProtocolKind;
pub use scenario::Scenario;
pub use simengine::SimConfig;
pub use topology::{classify, HelperAssignment, Mode, Network, NodeId};
