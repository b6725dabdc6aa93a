//! Delivery and energy ledgers of a simulation run.

use crate::analytic::OperatingPoint;
use crate::error::{Error, Result};
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseCounts {
    pub idle: u64,
    pub success: u64,
    pub collision: u64,
}

impl PhaseCounts {
    pub fn busy(&self) -> u64 {
        self.success + self.collision
    }

    pub fn total(&self) -> u64 {
        self.idle + self.busy()
    }
}

/// Running sum of a node's forwarding-queue length, sampled whenever it transmits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueueSamples {
    pub sum: u64,
    pub count: u64,
}

/// Counters accumulated over a run.
///
/// `delivered_bits` holds only each node's own data; `transmit_seconds`
/// includes airtime spent forwarding for others and in collisions.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub nodes: Vec<String>,
    pub elapsed: f64,
    pub delivered_bits: Vec<u64>,
    pub transmit_seconds: Vec<f64>,
    pub phase_counts: PhaseCounts,
    pub queue_samples: Vec<QueueSamples>,
}

impl TraceSummary {
    pub fn new(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        TraceSummary {
            nodes,
            elapsed: 0.0,
            delivered_bits: vec![0; n],
            transmit_seconds: vec![0.0; n],
            phase_counts: PhaseCounts::default(),
            queue_samples: vec![QueueSamples::default(); n],
        }
    }

    /// Zeroes every counter, keeping the node list.
    pub fn clear(&mut self) {
        *self = TraceSummary::new(std::mem::take(&mut self.nodes));
    }

    pub fn credit(&mut self, node: NodeId, bits: u64) {
        self.delivered_bits[node.index()] += bits;
    }

    pub fn charge(&mut self, node: NodeId, seconds: f64) {
        self.transmit_seconds[node.index()] += seconds;
    }

    pub fn sample_queue(&mut self, node: NodeId, len: usize) {
        let s = &mut self.queue_samples[node.index()];
        s.sum += len as u64;
        s.count += 1;
    }

    /// Mean forwarding-queue length of `node` at its transmission instants.
    pub fn mean_queue_at_transmit(&self, node: NodeId) -> Option<f64> {
        let s = self.queue_samples[node.index()];
        (s.count > 0).then(|| s.sum as f64 / s.count as f64)
    }

    /// Total energy spent by all nodes, `E * sum(transmit_seconds)`.
    pub fn total_energy(&self, power: f64) -> f64 {
        power * self.transmit_seconds.iter().sum::<f64>()
    }

    /// Appends another run's ledger over the same nodes.
    pub fn merge(&mut self, other: &TraceSummary) -> Result<()> {
        if self.nodes != other.nodes {
            return Err(Error::invalid("trace", "node lists differ"));
        }
        self.elapsed += other.elapsed;
        for (a, b) in self.delivered_bits.iter_mut().zip(&other.delivered_bits) {
            *a += b;
        }
        for (a, b) in self
            .transmit_seconds
            .iter_mut()
            .zip(&other.transmit_seconds)
        {
            *a += b;
        }
        for (a, b) in self.queue_samples.iter_mut().zip(&other.queue_samples) {
            a.sum += b.sum;
            a.count += b.count;
        }
        self.phase_counts.idle += other.phase_counts.idle;
        self.phase_counts.success += other.phase_counts.success;
        self.phase_counts.collision += other.phase_counts.collision;
        Ok(())
    }

    /// Empirical operating point: `S_k = bits_k / elapsed`,
    /// `E_k = power * seconds_k / elapsed`, `B_k = E_k / S_k`.
    pub fn finalize(&self, power: f64) -> Result<OperatingPoint> {
        if self.elapsed.is_nan() || self.elapsed <= 0.0 {
            return Err(Error::invalid("trace", "elapsed time must be > 0"));
        }
        if let Some(k) = self.delivered_bits.iter().position(|&b| b == 0) {
            return Err(Error::InsufficientRunLength {
                node: self.nodes[k].clone(),
            });
        }
        let throughput = self
            .delivered_bits
            .iter()
            .map(|&b| b as f64 / self.elapsed)
            .collect();
        let avg_power = self
            .transmit_seconds
            .iter()
            .map(|&t| power * t / self.elapsed)
            .collect();
        Ok(OperatingPoint::from_power(throughput, avg_power))
    }
}

/// Percent changes of an operating point against a baseline, per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeChange {
    pub throughput_gain_pct: Vec<f64>,
    pub bit_cost_increase_pct: Vec<f64>,
}

pub fn relative_to(point: &OperatingPoint, baseline: &OperatingPoint) -> Result<RelativeChange> {
    if point.len() != baseline.len() {
        return Err(Error::invalid("baseline", "node counts differ"));
    }
    if baseline
        .throughput
        .iter()
        .chain(&baseline.bit_cost)
        .any(|&v| v == 0.0)
    {
        return Err(Error::invalid(
            "baseline",
            "contains a zero throughput or bit-cost",
        ));
    }
    let pct = |x: &[f64], base: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(base)
            .map(|(x, b)| 100.0 * (x / b - 1.0))
            .collect()
    };
    Ok(RelativeChange {
        throughput_gain_pct: pct(&point.throughput, &baseline.throughput),
        bit_cost_increase_pct: pct(&point.bit_cost, &baseline.bit_cost),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{rr_performance, timeshare};
    use crate::topology::{classify, Mode, Network};

    #[test]
    fn finalize_single_node() {
        let mut t = TraceSummary::new(vec!["a".into()]);
        for _ in 0..10 {
            t.credit(NodeId(0), 1);
            t.charge(NodeId(0), 0.5);
        }
        t.elapsed = 10.0;
        let p = t.finalize(2.0).unwrap();
        assert_eq!(p.throughput, vec![1.0]);
        assert_eq!(p.avg_power, vec![1.0]);
        assert_eq!(p.bit_cost, vec![1.0]);
    }

    #[test]
    fn finalize_names_starved_node() {
        let mut t = TraceSummary::new(vec!["a".into(), "slow".into()]);
        t.credit(NodeId(0), 3);
        t.elapsed = 1.0;
        assert_eq!(
            t.finalize(1.0),
            Err(Error::InsufficientRunLength {
                node: "slow".into()
            })
        );
        let empty = TraceSummary::new(vec!["a".into()]);
        assert!(empty.finalize(1.0).is_err());
    }

    #[test]
    fn merged_ledgers_add_up() {
        let mut a = TraceSummary::new(vec!["x".into(), "y".into()]);
        a.credit(NodeId(0), 2);
        a.credit(NodeId(1), 1);
        a.charge(NodeId(0), 1.0);
        a.charge(NodeId(1), 0.5);
        a.elapsed = 3.0;
        let mut b = a.clone();
        b.credit(NodeId(1), 3);
        b.elapsed = 5.0;

        let mut both = a.clone();
        both.merge(&b).unwrap();
        assert_eq!(both.delivered_bits, vec![4, 5]);
        assert_eq!(both.transmit_seconds, vec![2.0, 1.0]);
        assert_eq!(both.elapsed, 8.0);
        assert_eq!(both.total_energy(2.0), 6.0);
        let p = both.finalize(1.0).unwrap();
        assert_eq!(p.throughput, vec![0.5, 5.0 / 8.0]);

        let other = TraceSummary::new(vec!["z".into()]);
        assert!(both.merge(&other).is_err());
    }

    #[test]
    fn relative_changes() {
        let net = Network::three_node_example();
        let a = classify(&net);
        let coop = rr_performance(&net, &a, Mode::Cooperative);
        let dir = rr_performance(&net, &a, Mode::Direct);

        let same = relative_to(&dir, &dir).unwrap();
        assert!(same.throughput_gain_pct.iter().all(|&x| x == 0.0));
        assert!(same.bit_cost_increase_pct.iter().all(|&x| x == 0.0));

        // (3/5) / (3/7) - 1 = 2/5 and 1 / (1/3) - 1 = 2
        let r = relative_to(&coop, &dir).unwrap();
        assert!((r.throughput_gain_pct[2] - 40.0).abs() < 1e-9);
        assert!((r.bit_cost_increase_pct[2] - 200.0).abs() < 1e-9);

        // (1/2) / (3/7) - 1 = 1/6 and (2/3) / (1/3) - 1 = 1
        let mid = timeshare(&coop, &dir, 5.0 / 12.0).unwrap();
        let r = relative_to(&mid, &dir).unwrap();
        assert!((r.throughput_gain_pct[2] - 100.0 / 6.0).abs() < 1e-9);
        assert!((r.bit_cost_increase_pct[2] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn relative_to_zero_baseline_fails() {
        let p = OperatingPoint::uniform(1.0, vec![1.0]);
        let zero = OperatingPoint::uniform(0.0, vec![1.0]);
        assert!(relative_to(&p, &zero).is_err());
    }
}
