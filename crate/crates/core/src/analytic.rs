//! Closed-form throughput and bit-cost.
//!
//! Covers round-robin scheduling, the saturated slotted-CSMA model (phase
//! probabilities and mean phase times), its small-slot limit, and the
//! timesharing curve between two operating points.

use crate::error::{Error, Result};
use crate::topology::{help_counts, timing, HelperAssignment, Mode, Network, NodeClass, NodeId};

/// Slot length and per-slot transmit probability of slotted CSMA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmaParams {
    sigma: f64,
    tau: f64,
}

impl CsmaParams {
    /// `sigma` must be finite and positive, `tau` must lie in `[0, 1]`.
    ///
    /// The closed interval admits the degenerate edges; operations that need
    /// `0 < tau < 1` check it themselves.
    pub fn new(sigma: f64, tau: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "sigma",
                format!("must be finite and > 0, got {sigma}"),
            ));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid(
                "tau",
                format!("must lie in [0, 1], got {tau}"),
            ));
        }
        Ok(CsmaParams { sigma, tau })
    }

    /// `tau = coefficient * sqrt(sigma)`.
    pub fn with_tau_coefficient(sigma: f64, coefficient: f64) -> Result<Self> {
        if !(coefficient.is_finite() && coefficient > 0.0) {
            return Err(Error::invalid(
                "tau coefficient",
                format!("must be finite and > 0, got {coefficient}"),
            ));
        }
        let tau = coefficient * sigma.sqrt();
        if tau >= 1.0 {
            return Err(Error::invalid(
                "tau",
                format!("coefficient {coefficient} gives tau = {tau} >= 1 at sigma = {sigma}"),
            ));
        }
        CsmaParams::new(sigma, tau)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn is_interior(&self) -> bool {
        self.tau > 0.0 && self.tau < 1.0
    }

    fn require_interior(&self) -> Result<()> {
        if self.is_interior() {
            Ok(())
        } else {
            Err(Error::invalid(
                "tau",
                format!("must lie in (0, 1), got {}", self.tau),
            ))
        }
    }
}

/// Probabilities and mean durations of one contention phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseExpectations {
    pub nodes: usize,
    /// Probability that one given node transmits alone.
    pub p_success: f64,
    pub p_idle: f64,
    pub t_idle: f64,
    pub t_success: f64,
    pub t_collision: f64,
}

impl PhaseExpectations {
    /// Probability that two or more nodes transmit.
    pub fn p_collision(&self) -> f64 {
        1.0 - self.nodes as f64 * self.p_success - self.p_idle
    }

    /// Expected length of one phase.
    pub fn mean_duration(&self) -> f64 {
        self.t_idle + self.t_success + self.t_collision
    }
}

/// Per-node throughput, bit-cost and average power.
///
/// `bit_cost[k] == avg_power[k] / throughput[k]` for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub throughput: Vec<f64>,
    pub bit_cost: Vec<f64>,
    pub avg_power: Vec<f64>,
}

impl OperatingPoint {
    /// Point where every node has throughput `throughput` and the given bit-costs.
    pub fn uniform(throughput: f64, bit_cost: Vec<f64>) -> Self {
        let avg_power = bit_cost.iter().map(|b| b * throughput).collect();
        OperatingPoint {
            throughput: vec![throughput; bit_cost.len()],
            bit_cost,
            avg_power,
        }
    }

    /// Derives bit-costs from per-node throughput and average power.
    pub fn from_power(throughput: Vec<f64>, avg_power: Vec<f64>) -> Self {
        let bit_cost = avg_power
            .iter()
            .zip(&throughput)
            .map(|(e, s)| e / s)
            .collect();
        OperatingPoint {
            throughput,
            bit_cost,
            avg_power,
        }
    }

    pub fn len(&self) -> usize {
        self.throughput.len()
    }

    pub fn is_empty(&self) -> bool {
        self.throughput.is_empty()
    }

    pub fn mean_throughput(&self) -> f64 {
        self.throughput.iter().sum::<f64>() / self.len() as f64
    }
}

fn require_nodes(net: &Network) -> Result<()> {
    if net.is_empty() {
        Err(Error::invalid("network", "has no nodes"))
    } else {
        Ok(())
    }
}

/// Round-robin throughput and bit-cost.
///
/// Per round every node sends one own bit: `S = 1 / sum(s_k)`. A node's
/// transmission time per round is `1/R_k` when direct, `1/R_kh` when relayed and
/// `(H_k + 1)/R_k` when it also forwards `H_k` bits; `B_k = t_k E`.
pub fn rr_performance(net: &Network, assign: &HelperAssignment, mode: Mode) -> OperatingPoint {
    let timing = timing(net, assign, mode);
    let cycle: f64 = timing.travel_time.iter().sum();
    let throughput = 1.0 / cycle;
    let power = net.power();
    let bit_cost = net
        .ids()
        .map(|k| {
            let u = timing.packet_duration[k.0];
            let t = match (mode, assign.class(k)) {
                (Mode::Cooperative, NodeClass::Helper) => (assign.help_count(k) + 1) as f64 * u,
                _ => u,
            };
            t * power
        })
        .collect();
    OperatingPoint::uniform(throughput, bit_cost)
}

/// Mean phase times of saturated slotted CSMA.
///
/// Idle phases last `sigma`, a success of node `k` lasts `s_k + sigma`, and a
/// collision lasts the longest colliding packet duration plus `sigma`.
pub fn csma_phase_expectations(
    net: &Network,
    assign: &HelperAssignment,
    mode: Mode,
    params: CsmaParams,
) -> Result<PhaseExpectations> {
    require_nodes(net)?;
    let n = net.len();
    let tau = params.tau();
    let sigma = params.sigma();
    let timing = timing(net, assign, mode);

    let p_success = tau * (1.0 - tau).powi(n as i32 - 1);
    let p_idle = (1.0 - tau).powi(n as i32);
    let t_idle = p_idle * sigma;
    let t_success = timing
        .travel_time
        .iter()
        .map(|s| p_success * (s + sigma))
        .sum();

    // Sort durations ascending; the stable sort keeps node order on ties.
    let mut durations = timing.packet_duration.clone();
    durations.sort_by(|a, b| a.total_cmp(b));

    // The k-th shortest packet (1-based) bounds the collision when node k sends,
    // every longer packet stays silent and at least one of the k-1 shorter ones
    // sends. Summing the binomial terms over l >= 1 leaves 1 - (1-tau)^(k-1).
    let log_quiet = (-tau).ln_1p();
    let t_collision = (2..=n)
        .map(|k| {
            let longest_sends = tau * (1.0 - tau).powi((n - k) as i32);
            let some_shorter_sends = -((k - 1) as f64 * log_quiet).exp_m1();
            longest_sends * some_shorter_sends * (durations[k - 1] + sigma)
        })
        .sum();

    Ok(PhaseExpectations {
        nodes: n,
        p_success,
        p_idle,
        t_idle,
        t_success,
        t_collision,
    })
}

/// Per-node throughput `p_s / (t_s + t_c + t_i)`.
pub fn csma_throughput(phase: &PhaseExpectations) -> f64 {
    phase.p_success / phase.mean_duration()
}

/// Per-node CSMA bit-cost `(H_k + tau/p_s) u_k E`.
///
/// Own data needs `tau/p_s = (1-tau)^-(N-1)` attempts per delivered bit while
/// forwarded data never collides. In direct mode `H_k = 0`.
pub fn csma_bitcost(
    net: &Network,
    assign: &HelperAssignment,
    mode: Mode,
    params: CsmaParams,
) -> Result<Vec<f64>> {
    require_nodes(net)?;
    let n = net.len();
    let tau = params.tau();
    if tau >= 1.0 && n > 1 {
        return Err(Error::invalid(
            "tau",
            "tau = 1 with more than one node never succeeds",
        ));
    }
    let attempts = (1.0 - tau).powi(n as i32 - 1).recip();
    let timing = timing(net, assign, mode);
    let help = help_counts(assign, mode);
    Ok(net
        .ids()
        .map(|k| (help[k.0] as f64 + attempts) * timing.packet_duration[k.0] * net.power())
        .collect())
}

/// CSMA operating point for `0 < tau < 1`.
pub fn csma_performance(
    net: &Network,
    assign: &HelperAssignment,
    mode: Mode,
    params: CsmaParams,
) -> Result<OperatingPoint> {
    params.require_interior()?;
    let phase = csma_phase_expectations(net, assign, mode, params)?;
    let bit_cost = csma_bitcost(net, assign, mode, params)?;
    Ok(OperatingPoint::uniform(csma_throughput(&phase), bit_cost))
}

/// Small-slot limit of CSMA: `S* = 1/sum(s_k)` and `B*_k = (H_k + 1) u_k E`.
///
/// Coincides with [`rr_performance`].
pub fn asymptotic_performance(
    net: &Network,
    assign: &HelperAssignment,
    mode: Mode,
) -> OperatingPoint {
    let timing = timing(net, assign, mode);
    let throughput = 1.0 / timing.travel_time.iter().sum::<f64>();
    let help = help_counts(assign, mode);
    let bit_cost = net
        .ids()
        .map(|k| (help[k.0] + 1) as f64 * timing.packet_duration[k.0] * net.power())
        .collect();
    OperatingPoint::uniform(throughput, bit_cost)
}

/// Expected packet length of each node in fairMAC with unbounded pending and
/// forwarding limits: relayed nodes send `1/R_kh`, helpers `(1 + H_k)/R_k`
/// on average, everyone else `1/R_k`.
pub fn fairmac_infty_packet_lengths(net: &Network, assign: &HelperAssignment) -> Vec<f64> {
    net.ids()
        .map(|k| match assign.helper(k) {
            Some(h) => 1.0 / net.link_rate(k, h).expect("helper link exists"),
            None => (1 + assign.help_count(k)) as f64 / net.ap_rate(k),
        })
        .collect()
}

/// Sum of the expected fairMAC packet lengths, grouped by node class:
/// `sum_{D\H} 1/R_k + sum_C 1/R_kh + sum_H (1 + H_k)/R_k`.
pub fn fairmac_infty_cycle_by_class(net: &Network, assign: &HelperAssignment) -> f64 {
    let lengths = fairmac_infty_packet_lengths(net, assign);
    let class_sum = |class: NodeClass| -> f64 {
        net.ids()
            .filter(|&k| assign.class(k) == class)
            .map(|k| lengths[k.0])
            .sum()
    };
    class_sum(NodeClass::Direct) + class_sum(NodeClass::Relayed) + class_sum(NodeClass::Helper)
}

/// The same cycle regrouped per travel time: `sum_D 1/R_k + sum_C (1/R_kh + 1/R_h)`.
pub fn fairmac_infty_cycle_by_travel(net: &Network, assign: &HelperAssignment) -> f64 {
    let direct: f64 = assign
        .direct_set()
        .into_iter()
        .map(|k| 1.0 / net.ap_rate(k))
        .sum();
    let relayed: f64 = assign
        .relayed_set()
        .into_iter()
        .map(|k| {
            let h = assign.helper(k).expect("relayed node has a helper");
            1.0 / net.link_rate(k, h).expect("helper link exists") + 1.0 / net.ap_rate(h)
        })
        .sum();
    direct + relayed
}

/// Small-slot operating point of fairMAC with unbounded limits.
///
/// Computed from expected packet lengths (`S = 1/E[sum v_k]`, `B_k = E[v_k] E`);
/// it equals the cooperative [`asymptotic_performance`].
pub fn fairmac_infty_asymptotic(net: &Network, assign: &HelperAssignment) -> OperatingPoint {
    let lengths = fairmac_infty_packet_lengths(net, assign);
    let throughput = 1.0 / fairmac_infty_cycle_by_class(net, assign);
    OperatingPoint::uniform(
        throughput,
        lengths.iter().map(|v| v * net.power()).collect(),
    )
}

fn require_same_nodes(a: &OperatingPoint, b: &OperatingPoint) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::invalid(
            "operating points",
            format!("node counts differ ({} vs {})", a.len(), b.len()),
        ))
    }
}

/// Uses `a` for a fraction `alpha` of the time and `b` for the rest.
///
/// Throughput and average power mix linearly, bit-cost is their ratio.
pub fn timeshare(a: &OperatingPoint, b: &OperatingPoint, alpha: f64) -> Result<OperatingPoint> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in [0, 1], got {alpha}"),
        ));
    }
    require_same_nodes(a, b)?;
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(y)
            .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
            .collect()
    };
    Ok(OperatingPoint::from_power(
        mix(&a.throughput, &b.throughput),
        mix(&a.avg_power, &b.avg_power),
    ))
}

/// Timesharing fraction at which `node` reaches `bit_cost` on the curve between
/// `a` (alpha = 1) and `b` (alpha = 0), clamped to `[0, 1]`.
///
/// Bit-costs outside the curve's range map to the endpoint with the nearest
/// bit-cost.
pub fn timeshare_alpha_at_bit_cost(
    a: &OperatingPoint,
    b: &OperatingPoint,
    node: NodeId,
    bit_cost: f64,
) -> Result<f64> {
    require_same_nodes(a, b)?;
    let k = node.index();
    if k >= a.len() {
        return Err(Error::UnknownNode(node.to_string()));
    }
    let (sa, sb) = (a.throughput[k], b.throughput[k]);
    let (ea, eb) = (a.avg_power[k], b.avg_power[k]);
    let a_is_cheaper = a.bit_cost[k] <= b.bit_cost[k];
    let (lo, hi) = if a_is_cheaper {
        (a.bit_cost[k], b.bit_cost[k])
    } else {
        (b.bit_cost[k], a.bit_cost[k])
    };
    if bit_cost <= lo {
        return Ok(if a_is_cheaper { 1.0 } else { 0.0 });
    }
    if bit_cost >= hi {
        return Ok(if a_is_cheaper { 0.0 } else { 1.0 });
    }
    // lo < bit_cost < hi rules out a vanishing denominator
    let alpha = (bit_cost * sb - eb) / ((ea - eb) - bit_cost * (sa - sb));
    Ok(alpha.clamp(0.0, 1.0))
}

/// Throughput of `node` on the timesharing curve at the given bit-cost.
pub fn timeshare_throughput_at_bit_cost(
    a: &OperatingPoint,
    b: &OperatingPoint,
    node: NodeId,
    bit_cost: f64,
) -> Result<f64> {
    let alpha = timeshare_alpha_at_bit_cost(a, b, node, bit_cost)?;
    Ok(timeshare(a, b, alpha)?.throughput[node.index()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::classify;
    use num_rational::Ratio;
    use proptest::prelude::*;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> f64 {
        let r = Q::new(n, d);
        *r.numer() as f64 / *r.denom() as f64
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn example() -> (Network, HelperAssignment) {
        let net = Network::three_node_example();
        let a = classify(&net);
        (net, a)
    }

    #[test]
    fn round_robin_example() {
        let (net, a) = example();
        let dir = rr_performance(&net, &a, Mode::Direct);
        assert!(dir.throughput.iter().all(|&s| close(s, q(3, 7), 1e-12)));
        for (b, want) in dir.bit_cost.iter().zip([q(1, 1), q(1, 1), q(1, 3)]) {
            assert!(close(*b, want, 1e-12));
        }
        assert!(close(dir.avg_power[2], q(1, 7), 1e-12));

        let coop = rr_performance(&net, &a, Mode::Cooperative);
        assert!(coop.throughput.iter().all(|&s| close(s, q(3, 5), 1e-12)));
        for (b, want) in coop.bit_cost.iter().zip([q(1, 3), q(1, 3), q(1, 1)]) {
            assert!(close(*b, want, 1e-12));
        }
        assert!(close(coop.avg_power[2], q(3, 5), 1e-12));
    }

    #[test]
    fn round_robin_single_node() {
        let net = Network::new([("a", 2.0)], 1.0).unwrap();
        let p = rr_performance(&net, &classify(&net), Mode::Cooperative);
        assert_eq!(p.throughput, vec![2.0]);
        assert_eq!(p.bit_cost, vec![0.5]);
    }

    #[test]
    fn asymptotic_matches_round_robin_exactly() {
        let (net, a) = example();
        for mode in [Mode::Direct, Mode::Cooperative] {
            assert_eq!(
                asymptotic_performance(&net, &a, mode),
                rr_performance(&net, &a, mode)
            );
        }
    }

    #[test]
    fn single_node_never_collides() {
        let net = Network::new([("a", 2.0)], 1.0).unwrap();
        let params = CsmaParams::new(0.01, 0.3).unwrap();
        let ph = csma_phase_expectations(&net, &classify(&net), Mode::Direct, params).unwrap();
        assert_eq!(ph.t_collision, 0.0);
        assert!(close(ph.p_success, 0.3, 1e-15));
        assert!(close(ph.p_idle, 0.7, 1e-15));
        // one success of 0.5 + 0.01 every 1/0.3 phases on average
        let s = csma_throughput(&ph);
        assert!(close(s, 0.3 / (0.3 * 0.51 + 0.7 * 0.01), 1e-12));
    }

    #[test]
    fn empty_network_is_rejected() {
        let net = Network::new(Vec::<(String, f64)>::new(), 1.0).unwrap();
        let a = classify(&net);
        let params = CsmaParams::new(0.01, 0.1).unwrap();
        assert!(csma_phase_expectations(&net, &a, Mode::Direct, params).is_err());
    }

    #[test]
    fn vanishing_tau_leaves_only_idle_time() {
        let (net, a) = example();
        let params = CsmaParams::new(0.01, 1e-12).unwrap();
        let ph = csma_phase_expectations(&net, &a, Mode::Cooperative, params).unwrap();
        assert!(close(ph.t_idle, 0.01, 1e-9));
        assert!(ph.t_success < 1e-10);
        assert!(ph.t_collision < 1e-20);
    }

    #[test]
    fn bitcost_two_nodes_half_tau() {
        let net = Network::new([("a", 1.0), ("b", 1.0)], 1.0).unwrap();
        let a = classify(&net);
        let b = csma_bitcost(&net, &a, Mode::Direct, CsmaParams::new(0.1, 0.5).unwrap()).unwrap();
        assert_eq!(b, vec![2.0, 2.0]);
    }

    #[test]
    fn bitcost_rejects_certain_collision() {
        let (net, a) = example();
        let p = CsmaParams::new(0.1, 1.0).unwrap();
        assert!(csma_bitcost(&net, &a, Mode::Direct, p).is_err());
        let single = Network::new([("a", 2.0)], 1.0).unwrap();
        let b = csma_bitcost(&single, &classify(&single), Mode::Direct, p).unwrap();
        assert_eq!(b, vec![0.5]);
    }

    #[test]
    fn bitcost_small_tau_limit() {
        let (net, a) = example();
        let p = CsmaParams::new(1e-10, 1e-9).unwrap();
        let b = csma_bitcost(&net, &a, Mode::Cooperative, p).unwrap();
        let star = asymptotic_performance(&net, &a, Mode::Cooperative);
        for (x, y) in b.iter().zip(&star.bit_cost) {
            assert!(close(*x, *y, 1e-8));
        }
        assert!(close(b[2], 1.0, 1e-8));
    }

    #[test]
    fn direct_mode_ignores_helpers_in_bitcost() {
        let (net, a) = example();
        let p = CsmaParams::new(0.0088, 0.045).unwrap();
        let b = csma_bitcost(&net, &a, Mode::Direct, p).unwrap();
        let factor = 1.0 / (1.0 - 0.045f64).powi(2);
        assert!(close(b[0], factor, 1e-12));
        assert!(close(b[2], factor / 3.0, 1e-12));
    }

    #[test]
    fn csma_point_approaches_round_robin() {
        let (net, a) = example();
        let p = CsmaParams::new(0.0001, 0.0033).unwrap();
        let point = csma_performance(&net, &a, Mode::Cooperative, p).unwrap();
        assert!((point.throughput[0] / 0.6 - 1.0).abs() < 0.02);
    }

    #[test]
    fn csma_performance_needs_interior_tau() {
        let (net, a) = example();
        assert!(
            csma_performance(&net, &a, Mode::Direct, CsmaParams::new(0.1, 0.0).unwrap()).is_err()
        );
        assert!(
            csma_performance(&net, &a, Mode::Direct, CsmaParams::new(0.1, 1.0).unwrap()).is_err()
        );
    }

    #[test]
    fn params_validation() {
        assert!(CsmaParams::new(0.0, 0.5).is_err());
        assert!(CsmaParams::new(-1.0, 0.5).is_err());
        assert!(CsmaParams::new(0.1, 1.5).is_err());
        assert!(CsmaParams::new(0.1, f64::NAN).is_err());
        assert!(CsmaParams::with_tau_coefficient(0.5, 2.0).is_err());
        let p = CsmaParams::with_tau_coefficient(1e-4, 0.33).unwrap();
        assert!(close(p.tau(), 0.0033, 1e-12));
    }

    #[test]
    fn fairmac_infty_example() {
        let (net, a) = example();
        let p = fairmac_infty_asymptotic(&net, &a);
        assert!(close(p.throughput[0], 0.6, 1e-12));
        assert!(close(p.bit_cost[2], 1.0, 1e-12));
        let coop = asymptotic_performance(&net, &a, Mode::Cooperative);
        for (x, y) in p.bit_cost.iter().zip(&coop.bit_cost) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn fairmac_infty_without_relays_is_direct() {
        let mut net = Network::new([("a", 3.0), ("b", 3.0)], 2.0).unwrap();
        net.set_link("a", "b", 3.0).unwrap();
        let a = classify(&net);
        let p = fairmac_infty_asymptotic(&net, &a);
        let d = asymptotic_performance(&net, &a, Mode::Direct);
        assert_eq!(p, d);
    }

    #[test]
    fn timeshare_example_five_twelfths() {
        let (net, a) = example();
        let coop = rr_performance(&net, &a, Mode::Cooperative);
        let dir = rr_performance(&net, &a, Mode::Direct);
        // alpha 3/5 + (1 - alpha) 3/7 with alpha = 5/12 is 1/2;
        // (5/12 * 3/5 + 7/12 * 1/7) / (1/2) is 2/3.
        let s = Q::new(5, 12) * Q::new(3, 5) + Q::new(7, 12) * Q::new(3, 7);
        assert_eq!(s, Q::new(1, 2));
        let e = Q::new(5, 12) * Q::new(3, 5) + Q::new(7, 12) * Q::new(1, 7);
        assert_eq!(e / s, Q::new(2, 3));

        let mid = timeshare(&coop, &dir, 5.0 / 12.0).unwrap();
        assert!(close(mid.throughput[2], 0.5, 1e-12));
        assert!(close(mid.bit_cost[2], 2.0 / 3.0, 1e-12));

        assert_eq!(
            timeshare(&coop, &dir, 0.0).unwrap().throughput,
            dir.throughput
        );
        assert_eq!(
            timeshare(&coop, &dir, 1.0).unwrap().throughput,
            coop.throughput
        );
        assert!(timeshare(&coop, &dir, 1.01).is_err());
        assert!(timeshare(&coop, &dir, -0.01).is_err());

        let alpha = timeshare_alpha_at_bit_cost(&coop, &dir, NodeId(2), 2.0 / 3.0).unwrap();
        assert!(close(alpha, 5.0 / 12.0, 1e-12));
        let s = timeshare_throughput_at_bit_cost(&coop, &dir, NodeId(2), 2.0 / 3.0).unwrap();
        assert!(close(s, 0.5, 1e-12));
        // beyond the cooperative end the curve tops out at its throughput
        assert_eq!(
            timeshare_alpha_at_bit_cost(&coop, &dir, NodeId(2), 5.0).unwrap(),
            1.0
        );
        assert_eq!(
            timeshare_alpha_at_bit_cost(&coop, &dir, NodeId(2), 0.1).unwrap(),
            0.0
        );
    }

    #[test]
    fn timeshare_rejects_mismatched_points() {
        let a = OperatingPoint::uniform(1.0, vec![1.0, 1.0]);
        let b = OperatingPoint::uniform(1.0, vec![1.0]);
        assert!(timeshare(&a, &b, 0.5).is_err());
    }

    fn arb_point(n: usize) -> impl Strategy<Value = OperatingPoint> {
        (0.01f64..10.0, proptest::collection::vec(0.01f64..10.0, n))
            .prop_map(|(s, b)| OperatingPoint::uniform(s, b))
    }

    proptest! {
        #[test]
        fn timeshare_is_bounded(a in arb_point(4), b in arb_point(4), alpha in 0.0f64..=1.0) {
            let m = timeshare(&a, &b, alpha).unwrap();
            for k in 0..4 {
                let lo = a.bit_cost[k].min(b.bit_cost[k]);
                let hi = a.bit_cost[k].max(b.bit_cost[k]);
                prop_assert!(m.bit_cost[k] >= lo * (1.0 - 1e-12) && m.bit_cost[k] <= hi * (1.0 + 1e-12));
                let s = alpha * a.throughput[k] + (1.0 - alpha) * b.throughput[k];
                prop_assert!(close(m.throughput[k], s, 1e-12));
                prop_assert!(close(m.bit_cost[k], m.avg_power[k] / m.throughput[k], 1e-12));
            }
            let same = timeshare(&a, &a, alpha).unwrap();
            for k in 0..4 {
                prop_assert!(close(same.throughput[k], a.throughput[k], 1e-12));
                prop_assert!(close(same.bit_cost[k], a.bit_cost[k], 1e-12));
            }
        }

        #[test]
        fn alpha_inverts_timeshare(a in arb_point(2), b in arb_point(2), alpha in 0.0f64..=1.0) {
            prop_assume!((a.bit_cost[0] - b.bit_cost[0]).abs() > 1e-3);
            let m = timeshare(&a, &b, alpha).unwrap();
            let back = timeshare_alpha_at_bit_cost(&a, &b, NodeId(0), m.bit_cost[0]).unwrap();
            prop_assert!((back - alpha).abs() < 1e-6);
        }

        #[test]
        fn fairmac_infty_regrouping(net in crate::topology::tests::arb_network(6)) {
            let a = classify(&net);
            let by_class = fairmac_infty_cycle_by_class(&net, &a);
            let by_travel = fairmac_infty_cycle_by_travel(&net, &a);
            prop_assert!(close(by_class, by_travel, 1e-12));
            let inf = fairmac_infty_asymptotic(&net, &a);
            let coop = asymptotic_performance(&net, &a, Mode::Cooperative);
            for k in 0..net.len() {
                prop_assert!(close(inf.throughput[k], coop.throughput[k], 1e-12));
                prop_assert!(close(inf.bit_cost[k], coop.bit_cost[k], 1e-12));
            }
        }

        #[test]
        fn operating_points_are_consistent(
            net in crate::topology::tests::arb_network(5),
            tau in 0.001f64..0.9,
            sigma in 1e-6f64..0.1,
        ) {
            let a = classify(&net);
            let params = CsmaParams::new(sigma, tau).unwrap();
            for mode in [Mode::Direct, Mode::Cooperative] {
                let points = [
                    rr_performance(&net, &a, mode),
                    asymptotic_performance(&net, &a, mode),
                    csma_performance(&net, &a, mode, params).unwrap(),
                ];
                for p in &points {
                    for k in 0..net.len() {
                        prop_assert!(p.throughput[k] > 0.0 && p.bit_cost[k] > 0.0);
                        prop_assert!(close(p.bit_cost[k], p.avg_power[k] / p.throughput[k], 1e-12));
                    }
                }
                let ph = csma_phase_expectations(&net, &a, mode, params).unwrap();
                prop_assert!(ph.p_collision() >= -1e-12);
            }
        }
    }
}
