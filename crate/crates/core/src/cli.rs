//! Command implementations behind the `fairmac` binary.
//!
//! Every command renders CSV: a fixed header, fixed column order, and floats
//! printed with Rust's shortest round-trip formatting (no locale involved).

use std::fmt::Write as _;

use crate::analytic::{
    asymptotic_performance, csma_performance, rr_performance, timeshare, CsmaParams,
};
use crate::error::{Error, Result};
use crate::metrics::relative_to;
use crate::oracle::{enumerate_phase, max_abs_difference};
use crate::protocols::ProtocolKind;
use crate::scenario::Scenario;
use crate::simengine::{run_many, SimConfig, DEFAULT_CONTENTION_PHASES};
use crate::topology::{classify, timing, Mode, Network};

/// Agreement required between the closed form and the enumeration in `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-12;

/// Reference point for the relative columns of `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    RoundRobinDirect,
    CsmaDirect,
    None,
}

/// Resolved arguments of `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub protocol: ProtocolKind,
    pub params: CsmaParams,
    pub phases: u64,
    pub seed: u64,
    /// Runs seeds `seed, seed + 1, ...`; rows follow seed order.
    pub replicates: u64,
    pub baseline: Baseline,
}

fn fmt_limit(v: usize) -> String {
    if v == usize::MAX {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn node_columns(net: &Network, prefix: &str) -> String {
    net.names()
        .iter()
        .map(|n| format!(",{prefix}{n}"))
        .collect()
}

/// Classification and RR / CSMA / asymptotic operating points for both modes.
pub fn cmd_analytic(scenario: &Scenario, params: CsmaParams) -> Result<String> {
    let net = &scenario.network;
    let assign = classify(net);
    let mut out = String::from(
        "variant,mode,node,class,helper,help_count,travel_time,packet_duration,throughput,bit_cost,avg_power\n",
    );
    for mode in [Mode::Direct, Mode::Cooperative] {
        let t = timing(net, &assign, mode);
        let variants = [
            ("rr", rr_performance(net, &assign, mode)),
            ("csma", csma_performance(net, &assign, mode, params)?),
            ("asymptotic", asymptotic_performance(net, &assign, mode)),
        ];
        for (variant, point) in &variants {
            for k in net.ids() {
                let helper = assign.helper(k).map(|h| net.name(h)).unwrap_or("");
                writeln!(
                    out,
                    "{variant},{mode},{},{},{helper},{},{},{},{},{},{}",
                    net.name(k),
                    assign.class(k).as_str(),
                    assign.help_count(k),
                    t.travel_time[k.0],
                    t.packet_duration[k.0],
                    point.throughput[k.0],
                    point.bit_cost[k.0],
                    point.avg_power[k.0],
                )
                .expect("writing to a String");
            }
        }
    }
    Ok(out)
}

/// Simulates the protocol and reports per-node empirical operating points.
pub fn cmd_simulate(scenario: &Scenario, args: &SimulateArgs) -> Result<String> {
    let net = &scenario.network;
    let assign = classify(net);
    if args.replicates == 0 {
        return Err(Error::invalid("replicates", "must be at least 1"));
    }
    let baseline = match args.baseline {
        Baseline::RoundRobinDirect => Some(rr_performance(net, &assign, Mode::Direct)),
        Baseline::CsmaDirect => Some(csma_performance(net, &assign, Mode::Direct, args.params)?),
        Baseline::None => None,
    };
    let configs: Vec<SimConfig> = (0..args.replicates)
        .map(|i| {
            SimConfig::new(args.params, args.protocol, args.seed.wrapping_add(i))
                .with_phases(args.phases)
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let (pending, forward) = match args.protocol {
        ProtocolKind::FairMac {
            max_pending,
            max_forward,
        } => (fmt_limit(max_pending), fmt_limit(max_forward)),
        _ => (String::new(), String::new()),
    };

    let mut out = String::from(
        "protocol,pending,forward_max,sigma,tau,phases,seed,node,delivered_bits,throughput,bit_cost,avg_power,mean_throughput,throughput_gain_pct,bit_cost_increase_pct\n",
    );
    for (cfg, summary) in configs.iter().zip(run_many(net, &assign, &configs)) {
        let summary = summary?;
        let point = summary.finalize(net.power())?;
        let rel = baseline
            .as_ref()
            .map(|b| relative_to(&point, b))
            .transpose()?;
        let mean = point.mean_throughput();
        for k in net.ids() {
            let (gain, increase) = rel
                .as_ref()
                .map(|r| {
                    (
                        r.throughput_gain_pct[k.0].to_string(),
                        r.bit_cost_increase_pct[k.0].to_string(),
                    )
                })
                .unwrap_or_default();
            writeln!(
                out,
                "{},{pending},{forward},{},{},{},{},{},{},{},{},{},{mean},{gain},{increase}",
                args.protocol,
                args.params.sigma(),
                args.params.tau(),
                cfg.contention_phases,
                cfg.seed,
                net.name(k),
                summary.delivered_bits[k.0],
                point.throughput[k.0],
                point.bit_cost[k.0],
                point.avg_power[k.0],
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

/// Timesharing curves between `mode_a` (alpha = 1) and `mode_b` (alpha = 0),
/// for round-robin and CSMA operating points, on `steps` evenly spaced alphas.
pub fn cmd_curve(
    scenario: &Scenario,
    mode_a: Mode,
    mode_b: Mode,
    params: CsmaParams,
    steps: usize,
) -> Result<String> {
    if steps < 2 {
        return Err(Error::invalid(
            "alpha steps",
            format!("must be at least 2, got {steps}"),
        ));
    }
    let net = &scenario.network;
    let assign = classify(net);
    let families = [
        (
            "rr",
            rr_performance(net, &assign, mode_a),
            rr_performance(net, &assign, mode_b),
        ),
        (
            "csma",
            csma_performance(net, &assign, mode_a, params)?,
            csma_performance(net, &assign, mode_b, params)?,
        ),
    ];
    let mut out = format!(
        "family,alpha,throughput{}\n",
        node_columns(net, "bit_cost_")
    );
    for (family, a, b) in &families {
        for i in 0..steps {
            let alpha = i as f64 / (steps - 1) as f64;
            let p = timeshare(a, b, alpha)?;
            write!(out, "{family},{alpha},{}", p.mean_throughput()).expect("writing to a String");
            for bk in &p.bit_cost {
                write!(out, ",{bk}").expect("writing to a String");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

fn max_rel_gap(x: &[f64], reference: &[f64]) -> f64 {
    x.iter()
        .zip(reference)
        .map(|(x, r)| ((x - r) / r).abs())
        .fold(0.0, f64::max)
}

/// CSMA operating points along `tau = coefficient * sqrt(sigma)`, followed by the
/// small-slot asymptote, for both modes.
pub fn cmd_converge(scenario: &Scenario, coefficient: f64, sigmas: &[f64]) -> Result<String> {
    if !(coefficient.is_finite() && coefficient > 0.0) {
        return Err(Error::invalid(
            "tau coefficient",
            format!("must be > 0, got {coefficient}"),
        ));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return Err(Error::invalid(
            "sigma",
            format!("must lie in (0, 1), got {s}"),
        ));
    }
    let net = &scenario.network;
    let assign = classify(net);
    let mut out = format!(
        "mode,kind,sigma,tau,throughput{},throughput_rel_gap,bit_cost_max_rel_gap,error\n",
        node_columns(net, "bit_cost_")
    );
    let blanks = ",".repeat(net.len());
    for mode in [Mode::Direct, Mode::Cooperative] {
        let star = asymptotic_performance(net, &assign, mode);
        for &sigma in sigmas {
            let tau = coefficient * sigma.sqrt();
            let point = CsmaParams::with_tau_coefficient(sigma, coefficient)
                .and_then(|p| csma_performance(net, &assign, mode, p));
            match point {
                Ok(p) => {
                    write!(out, "{mode},csma,{sigma},{tau},{}", p.throughput[0])
                        .expect("writing to a String");
                    for b in &p.bit_cost {
                        write!(out, ",{b}").expect("writing to a String");
                    }
                    writeln!(
                        out,
                        ",{},{},",
                        ((p.throughput[0] - star.throughput[0]) / star.throughput[0]).abs(),
                        max_rel_gap(&p.bit_cost, &star.bit_cost),
                    )
                    .expect("writing to a String");
                }
                Err(_) => {
                    writeln!(out, "{mode},csma,{sigma},{tau},{blanks},,,tau>=1")
                        .expect("writing to a String");
                }
            }
        }
        write!(out, "{mode},asymptote,0,0,{}", star.throughput[0]).expect("writing to a String");
        for b in &star.bit_cost {
            write!(out, ",{b}").expect("writing to a String");
        }
        out.push_str(",0,0,\n");
    }
    Ok(out)
}

/// Cross-checks closed-form phase expectations against exhaustive enumeration.
///
/// Returns the report and whether every quantity agreed within [`VERIFY_TOLERANCE`].
pub fn cmd_verify(scenario: &Scenario, params: CsmaParams) -> Result<(String, bool)> {
    let net = &scenario.network;
    let assign = classify(net);
    let mut out = String::from("mode,sigma,tau,quantity,analytic,oracle,abs_diff,pass\n");
    let mut all_pass = true;
    for mode in [Mode::Direct, Mode::Cooperative] {
        let analytic = crate::analytic::csma_phase_expectations(net, &assign, mode, params)?;
        let oracle = enumerate_phase(net, &assign, mode, params)?;
        let rows = [
            ("p_success", analytic.p_success, oracle.p_success),
            ("p_idle", analytic.p_idle, oracle.p_idle),
            ("t_idle", analytic.t_idle, oracle.t_idle),
            ("t_success", analytic.t_success, oracle.t_success),
            ("t_collision", analytic.t_collision, oracle.t_collision),
        ];
        for (name, a, o) in rows {
            let diff = (a - o).abs();
            let pass = diff <= VERIFY_TOLERANCE;
            writeln!(
                out,
                "{mode},{},{},{name},{a},{o},{diff},{pass}",
                params.sigma(),
                params.tau()
            )
            .expect("writing to a String");
        }
        all_pass &= max_abs_difference(&analytic, &oracle) <= VERIFY_TOLERANCE;
    }
    Ok((out, all_pass))
}

/// Looks up a default that must be present either as a flag or in the scenario.
pub fn require<T>(flag: Option<T>, default: Option<T>, name: &str) -> Result<T> {
    flag.or(default).ok_or_else(|| {
        Error::invalid(
            name,
            "not given on the command line or in the scenario defaults",
        )
    })
}

/// Resolves sigma and tau from flags and scenario defaults; `--tau-coeff` wins over `--tau`.
pub fn resolve_params(
    scenario: &Scenario,
    sigma: Option<f64>,
    tau: Option<f64>,
    tau_coeff: Option<f64>,
) -> Result<CsmaParams> {
    let sigma = require(sigma, scenario.defaults.sigma, "sigma")?;
    match tau_coeff {
        Some(c) => CsmaParams::with_tau_coefficient(sigma, c),
        None => CsmaParams::new(sigma, require(tau, scenario.defaults.tau, "tau")?),
    }
}

/// Builds `simulate` arguments from flags, falling back to scenario defaults.
#[allow(clippy::too_many_arguments)]
pub fn resolve_simulate(
    scenario: &Scenario,
    protocol: &str,
    params: CsmaParams,
    pending: Option<usize>,
    forward_max: Option<usize>,
    phases: Option<u64>,
    seed: Option<u64>,
    replicates: u64,
    baseline: Baseline,
) -> Result<SimulateArgs> {
    let d = &scenario.defaults;
    let protocol = match protocol {
        "direct" => ProtocolKind::Direct,
        "coopmac" => ProtocolKind::CoopMac,
        "fairmac" => ProtocolKind::FairMac {
            max_pending: require(pending, d.pending, "pending")?,
            max_forward: require(forward_max, d.forward_max, "forward-max")?,
        },
        other => {
            return Err(Error::invalid(
                "protocol",
                format!("unknown protocol `{other}`"),
            ))
        }
    };
    Ok(SimulateArgs {
        protocol,
        params,
        phases: phases.or(d.phases).unwrap_or(DEFAULT_CONTENTION_PHASES),
        seed: require(seed, d.seed, "seed")?,
        replicates,
        baseline,
    })
}

/// Parses a P or Q limit: a count or `inf`.
pub fn parse_limit(text: &str) -> std::result::Result<usize, String> {
    if text == "inf" {
        Ok(usize::MAX)
    } else {
        text.parse()
            .map_err(|_| format!("`{text}` is not a count or `inf`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Scenario {
        Scenario {
            network: Network::three_node_example(),
            defaults: Default::default(),
        }
    }

    fn rows<'a>(csv: &'a str, prefix: &str) -> Vec<Vec<&'a str>> {
        csv.lines()
            .filter(|l| l.starts_with(prefix))
            .map(|l| l.split(',').collect())
            .collect()
    }

    #[test]
    fn analytic_report_contains_round_robin_values() {
        let csv = cmd_analytic(&example(), CsmaParams::new(0.0088, 0.045).unwrap()).unwrap();
        let dir = rows(&csv, "rr,direct,");
        assert_eq!(dir.len(), 3);
        for (row, b) in dir.iter().zip([1.0, 1.0, 1.0 / 3.0]) {
            assert!((row[8].parse::<f64>().unwrap() - 3.0 / 7.0).abs() < 1e-12);
            assert!((row[9].parse::<f64>().unwrap() - b).abs() < 1e-12);
        }
        let coop = rows(&csv, "asymptotic,cooperative,");
        for (row, b) in coop.iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0]) {
            assert!((row[8].parse::<f64>().unwrap() - 0.6).abs() < 1e-12);
            assert!((row[9].parse::<f64>().unwrap() - b).abs() < 1e-12);
        }
        assert_eq!(coop[0][3], "relayed");
        assert_eq!(coop[0][4], "n3");
        assert_eq!(coop[2][3], "helper");
        assert_eq!(coop[2][5], "2");
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let s = example();
        let params = CsmaParams::new(0.0088, 0.045).unwrap();
        let two = cmd_curve(&s, Mode::Cooperative, Mode::Direct, params, 2).unwrap();
        assert_eq!(rows(&two, "rr,").len(), 2);
        assert_eq!(
            two.lines().next().unwrap(),
            "family,alpha,throughput,bit_cost_n1,bit_cost_n2,bit_cost_n3"
        );

        let csv = cmd_curve(&s, Mode::Cooperative, Mode::Direct, params, 13).unwrap();
        let rr = rows(&csv, "rr,");
        let mid = &rr[5];
        assert!((mid[1].parse::<f64>().unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!((mid[2].parse::<f64>().unwrap() - 0.5).abs() < 1e-12);
        assert!((mid[5].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-12);

        assert!(cmd_curve(&s, Mode::Cooperative, Mode::Direct, params, 1).is_err());
    }

    #[test]
    fn converge_rows() {
        let csv = cmd_converge(&example(), 0.33, &[1e-4]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        let star = rows(&csv, "cooperative,asymptote");
        assert_eq!(star.len(), 1);
        assert!((star[0][4].parse::<f64>().unwrap() - 0.6).abs() < 1e-12);
        assert!((star[0][7].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);

        let csv = cmd_converge(&example(), 20.0, &[0.01]).unwrap();
        assert!(rows(&csv, "direct,csma")[0].last() == Some(&"tau>=1"));
        assert!(cmd_converge(&example(), 0.33, &[1.5]).is_err());
    }

    #[test]
    fn verify_passes_on_example() {
        let (csv, ok) = cmd_verify(&example(), CsmaParams::new(0.0088, 0.045).unwrap()).unwrap();
        assert!(ok);
        assert_eq!(csv.lines().count(), 1 + 10);
    }

    #[test]
    fn simulate_requires_seed() {
        let s = example();
        let params = CsmaParams::new(0.0088, 0.045).unwrap();
        let err = resolve_simulate(
            &s,
            "direct",
            params,
            None,
            None,
            None,
            None,
            1,
            Baseline::None,
        );
        assert!(matches!(err, Err(Error::InvalidParameter { ref name, .. }) if name == "seed"));
        let err = resolve_simulate(
            &s,
            "fairmac",
            params,
            None,
            Some(1),
            None,
            Some(1),
            1,
            Baseline::None,
        );
        assert!(matches!(err, Err(Error::InvalidParameter { ref name, .. }) if name == "pending"));
        assert!(resolve_simulate(
            &s,
            "aloha",
            params,
            None,
            None,
            None,
            Some(1),
            1,
            Baseline::None
        )
        .is_err());
    }

    #[test]
    fn simulate_is_reproducible() {
        let s = example();
        let params = CsmaParams::new(0.0088, 0.045).unwrap();
        let args = resolve_simulate(
            &s,
            "coopmac",
            params,
            None,
            None,
            Some(500),
            Some(3),
            2,
            Baseline::CsmaDirect,
        )
        .unwrap();
        let a = cmd_simulate(&s, &args).unwrap();
        let b = cmd_simulate(&s, &args).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 2 * 3);
        let r = rows(&a, "coopmac,");
        assert_eq!(r[0][6], "3");
        assert_eq!(r[3][6], "4");
        assert!(!r[0][13].is_empty());
    }

    #[test]
    fn limits_parse() {
        assert_eq!(parse_limit("inf"), Ok(usize::MAX));
        assert_eq!(parse_limit("4"), Ok(4));
        assert!(parse_limit("-1").is_err());
    }
}
