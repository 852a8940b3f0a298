//! Declarative experiment description and the TOML scenario file format.
//!
//! A scenario pins everything a run needs: bottleneck bandwidth, one-way
//! delay, packet size, tail-drop buffer (as a multiple of the base BDP),
//! horizon, seed, the flow list, and optional random loss, cross traffic,
//! mid-run delay changes, a sweep axis and batch staggering. All fields have
//! stable names; see the repository README for the full key reference.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cc::siad::{Aggressiveness, SiadConfig};
use crate::error::SimError;

pub const DEFAULT_OWD_MS: f64 = 50.0;
pub const DEFAULT_PACKET_SIZE: u32 = 1500;
pub const DEFAULT_HORIZON_S: f64 = 600.0;
pub const DEFAULT_WARMUP_S: f64 = 20.0;
pub const DEFAULT_SAMPLE_INTERVAL_MS: f64 = 10.0;
/// Fixed per-packet header accounting; rates count payload bits only.
pub const HEADER_BYTES: u32 = 40;

fn default_owd() -> f64 {
    DEFAULT_OWD_MS
}
fn default_packet_size() -> u32 {
    DEFAULT_PACKET_SIZE
}
fn default_horizon() -> f64 {
    DEFAULT_HORIZON_S
}
fn default_warmup() -> f64 {
    DEFAULT_WARMUP_S
}
fn default_seed() -> u64 {
    1
}
fn default_sample_interval() -> f64 {
    DEFAULT_SAMPLE_INTERVAL_MS
}
fn default_burst_bytes() -> u64 {
    300_000
}
fn default_iat() -> [f64; 2] {
    [2.0, 3.0]
}
fn default_cross_algorithm() -> AlgorithmName {
    AlgorithmName::Reno
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmName {
    Siad,
    Reno,
    Cubic,
    Scalable,
    Highspeed,
    Htcp,
}

impl AlgorithmName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmName::Siad => "siad",
            AlgorithmName::Reno => "reno",
            AlgorithmName::Cubic => "cubic",
            AlgorithmName::Scalable => "scalable",
            AlgorithmName::Highspeed => "highspeed",
            AlgorithmName::Htcp => "htcp",
        }
    }
}

/// Resolved per-flow controller choice.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowAlgorithm {
    Siad(SiadConfig),
    Reno,
    Cubic,
    Scalable,
    Highspeed,
    Htcp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub algorithm: AlgorithmName,
    /// SIAD epoch length in RTTs; exactly one of `num_rtt` / `num_ms`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_rtt: Option<u32>,
    /// SIAD epoch length in milliseconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_ms: Option<f64>,
    #[serde(default)]
    pub start_s: f64,
    /// Defaults to the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_s: Option<f64>,
    /// Per-flow one-way delay override in milliseconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owd_ms: Option<f64>,
    #[serde(default)]
    pub delayed_ack: bool,
}

impl FlowSpec {
    pub fn greedy(algorithm: AlgorithmName) -> FlowSpec {
        FlowSpec {
            algorithm,
            num_rtt: None,
            num_ms: None,
            start_s: 0.0,
            stop_s: None,
            owd_ms: None,
            delayed_ack: false,
        }
    }

    pub fn siad_num_rtt(num_rtt: u32) -> FlowSpec {
        FlowSpec {
            num_rtt: Some(num_rtt),
            ..FlowSpec::greedy(AlgorithmName::Siad)
        }
    }

    pub fn resolve_algorithm(&self) -> Result<FlowAlgorithm, SimError> {
        match self.algorithm {
            AlgorithmName::Siad => {
                let aggressiveness = match (self.num_rtt, self.num_ms) {
                    (Some(n), None) => {
                        if n < 2 {
                            return Err(SimError::validation(
                                "flows.num_rtt",
                                "must be at least 2",
                            ));
                        }
                        Aggressiveness::NumRtt(n)
                    }
                    (None, Some(ms)) => {
                        if ms <= 0.0 {
                            return Err(SimError::validation(
                                "flows.num_ms",
                                "must be positive",
                            ));
                        }
                        Aggressiveness::NumMs(ms)
                    }
                    _ => {
                        return Err(SimError::validation(
                            "flows",
                            "siad needs exactly one of num_rtt / num_ms",
                        ))
                    }
                };
                Ok(FlowAlgorithm::Siad(SiadConfig {
                    aggressiveness,
                    initial_window: crate::cc::INITIAL_WINDOW,
                }))
            }
            other => {
                if self.num_rtt.is_some() || self.num_ms.is_some() {
                    return Err(SimError::validation(
                        "flows",
                        format!("num_rtt/num_ms only apply to siad, not {}", other.as_str()),
                    ));
                }
                Ok(match other {
                    AlgorithmName::Reno => FlowAlgorithm::Reno,
                    AlgorithmName::Cubic => FlowAlgorithm::Cubic,
                    AlgorithmName::Scalable => FlowAlgorithm::Scalable,
                    AlgorithmName::Highspeed => FlowAlgorithm::Highspeed,
                    AlgorithmName::Htcp => FlowAlgorithm::Htcp,
                    AlgorithmName::Siad => unreachable!(),
                })
            }
        }
    }

    pub fn label(&self) -> String {
        match (self.algorithm, self.num_rtt, self.num_ms) {
            (AlgorithmName::Siad, Some(n), _) => format!("siad(num_rtt={n})"),
            (AlgorithmName::Siad, _, Some(ms)) => format!("siad(num_ms={ms})"),
            (a, _, _) => a.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedDrop {
    pub flow: usize,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    /// Per-packet random drop probability at the bottleneck.
    #[serde(default)]
    pub p_rand: f64,
    /// Deterministic one-shot drops (first transmission of the given
    /// sequence number), mainly a testing aid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drop_seqs: Vec<ForcedDrop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossTrafficSpec {
    #[serde(default = "default_burst_bytes")]
    pub burst_bytes: u64,
    /// Uniform inter-arrival range in seconds.
    #[serde(default = "default_iat")]
    pub iat_s: [f64; 2],
    #[serde(default = "default_cross_algorithm")]
    pub algorithm: AlgorithmName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RttChange {
    pub at_s: f64,
    pub owd_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BufferBdp,
    BandwidthMbps,
    PRand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Per-repetition start staggering for convergence batches: repetition `k`
/// moves `flows[stagger_flow].start_s` to `stagger_start_s + k *
/// stagger_step_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    pub stagger_flow: usize,
    pub stagger_start_s: f64,
    pub stagger_step_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub bandwidth_mbps: f64,
    #[serde(default = "default_owd")]
    pub owd_ms: f64,
    #[serde(default = "default_packet_size")]
    pub packet_size: u32,
    /// Tail-drop buffer as a multiple of the base BDP.
    pub buffer_bdp: f64,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval_ms: f64,
    #[serde(default)]
    pub flows: Vec<FlowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_traffic: Option<CrossTrafficSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rtt_changes: Vec<RttChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<BatchSpec>,
}

impl Scenario {
    /// Minimal single-flow scenario with all defaults applied.
    pub fn single_flow(bandwidth_mbps: f64, buffer_bdp: f64, flow: FlowSpec) -> Scenario {
        Scenario {
            bandwidth_mbps,
            owd_ms: DEFAULT_OWD_MS,
            packet_size: DEFAULT_PACKET_SIZE,
            buffer_bdp,
            horizon_s: DEFAULT_HORIZON_S,
            warmup_s: DEFAULT_WARMUP_S,
            seed: 1,
            sample_interval_ms: DEFAULT_SAMPLE_INTERVAL_MS,
            flows: vec![flow],
            loss: None,
            cross_traffic: None,
            rtt_changes: Vec::new(),
            sweep: None,
            batch: None,
        }
    }

    pub fn bandwidth_bps(&self) -> f64 {
        self.bandwidth_mbps * 1e6
    }

    pub fn owd_s(&self) -> f64 {
        self.owd_ms / 1000.0
    }

    pub fn base_rtt_s(&self) -> f64 {
        2.0 * self.owd_s()
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_size as f64 * 8.0
    }

    pub fn payload_bits(&self) -> f64 {
        (self.packet_size - HEADER_BYTES) as f64 * 8.0
    }

    /// Base BDP in packets: bandwidth times base RTT.
    pub fn bdp_packets(&self) -> f64 {
        self.bandwidth_bps() * self.base_rtt_s() / self.packet_bits()
    }

    pub fn queue_capacity_packets(&self) -> usize {
        ((self.buffer_bdp * self.bdp_packets()).round() as usize).max(1)
    }

    pub fn serialization_s(&self) -> f64 {
        self.packet_bits() / self.bandwidth_bps()
    }

    pub fn sample_interval_s(&self) -> f64 {
        self.sample_interval_ms / 1000.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.bandwidth_mbps > 0.0) {
            return Err(SimError::validation("bandwidth_mbps", "must be positive"));
        }
        if !(self.owd_ms > 0.0) {
            return Err(SimError::validation("owd_ms", "must be positive"));
        }
        if self.packet_size <= HEADER_BYTES {
            return Err(SimError::validation(
                "packet_size",
                format!("must exceed the {HEADER_BYTES}-byte header"),
            ));
        }
        if !(self.buffer_bdp > 0.0) {
            return Err(SimError::validation("buffer_bdp", "must be positive"));
        }
        if !(self.horizon_s > self.warmup_s) || self.warmup_s < 0.0 {
            return Err(SimError::validation(
                "horizon_s",
                "horizon must exceed warmup",
            ));
        }
        if !(self.sample_interval_ms > 0.0) {
            return Err(SimError::validation(
                "sample_interval_ms",
                "must be positive",
            ));
        }
        for (i, f) in self.flows.iter().enumerate() {
            f.resolve_algorithm()?;
            if f.start_s < 0.0 || f.start_s >= self.horizon_s {
                return Err(SimError::validation(
                    format!("flows[{i}].start_s"),
                    "must lie within the horizon",
                ));
            }
            let stop = f.stop_s.unwrap_or(self.horizon_s);
            if stop <= f.start_s || stop > self.horizon_s {
                return Err(SimError::validation(
                    format!("flows[{i}].stop_s"),
                    "must lie in (start_s, horizon_s]",
                ));
            }
            if let Some(owd) = f.owd_ms {
                if !(owd > 0.0) {
                    return Err(SimError::validation(
                        format!("flows[{i}].owd_ms"),
                        "must be positive",
                    ));
                }
            }
        }
        if let Some(loss) = &self.loss {
            if !(0.0..1.0).contains(&loss.p_rand) {
                return Err(SimError::validation("loss.p_rand", "must be in [0, 1)"));
            }
            for d in &loss.drop_seqs {
                if d.flow >= self.flows.len() {
                    return Err(SimError::validation(
                        "loss.drop_seqs",
                        format!("flow index {} out of range", d.flow),
                    ));
                }
            }
        }
        if let Some(cross) = &self.cross_traffic {
            if cross.burst_bytes == 0 {
                return Err(SimError::validation(
                    "cross_traffic.burst_bytes",
                    "must be positive",
                ));
            }
            if !(cross.iat_s[0] > 0.0 && cross.iat_s[1] >= cross.iat_s[0]) {
                return Err(SimError::validation(
                    "cross_traffic.iat_s",
                    "range must be positive and ordered",
                ));
            }
        }
        for (i, c) in self.rtt_changes.iter().enumerate() {
            if c.at_s <= 0.0 || c.at_s >= self.horizon_s {
                return Err(SimError::validation(
                    format!("rtt_changes[{i}].at_s"),
                    "must lie within the horizon",
                ));
            }
            if !(c.owd_ms > 0.0) {
                return Err(SimError::validation(
                    format!("rtt_changes[{i}].owd_ms"),
                    "must be positive",
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(SimError::validation("sweep.values", "must not be empty"));
            }
            for v in &sweep.values {
                let ok = match sweep.axis {
                    SweepAxis::PRand => (0.0..1.0).contains(v),
                    _ => *v > 0.0,
                };
                if !ok {
                    return Err(SimError::validation(
                        "sweep.values",
                        format!("value {v} invalid for the chosen axis"),
                    ));
                }
            }
        }
        if let Some(batch) = &self.batch {
            if batch.stagger_flow >= self.flows.len() {
                return Err(SimError::validation(
                    "batch.stagger_flow",
                    "flow index out of range",
                ));
            }
            if batch.stagger_start_s < 0.0 || batch.stagger_start_s >= self.horizon_s {
                return Err(SimError::validation(
                    "batch.stagger_start_s",
                    "must lie within the horizon",
                ));
            }
        }
        Ok(())
    }

    /// Applies one sweep-axis value, clearing the sweep itself.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Scenario {
        let mut sc = self.clone();
        sc.sweep = None;
        match axis {
            SweepAxis::BufferBdp => sc.buffer_bdp = value,
            SweepAxis::BandwidthMbps => sc.bandwidth_mbps = value,
            SweepAxis::PRand => {
                sc.loss.get_or_insert_with(|| LossSpec {
                    p_rand: 0.0,
                    drop_seqs: Vec::new(),
                });
                sc.loss.as_mut().unwrap().p_rand = value;
            }
        }
        sc
    }
}

/// Loads a scenario (or a run manifest, whose `[scenario]` table is used)
/// from a TOML file and validates it.
pub fn load_scenario(path: &Path) -> Result<Scenario, SimError> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path.display().to_string(), e))?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, SimError> {
    let value: toml::Value = toml::from_str(text).map_err(|e| SimError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let scenario_value = match value.get("scenario") {
        Some(v) => v.clone(),
        None => value,
    };
    let scenario: Scenario = scenario_value.try_into().map_err(|e: toml::de::Error| {
        SimError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let text = r#"
            bandwidth_mbps = 10.0
            buffer_bdp = 0.5
            [[flows]]
            algorithm = "siad"
            num_rtt = 20
        "#;
        let sc = parse_scenario(text, "inline").unwrap();
        assert_eq!(sc.owd_ms, 50.0);
        assert_eq!(sc.packet_size, 1500);
        assert_eq!(sc.horizon_s, 600.0);
        assert_eq!(sc.warmup_s, 20.0);
        assert_eq!(sc.flows.len(), 1);
        assert!((sc.bdp_packets() - 83.333).abs() < 0.01);
        assert_eq!(sc.queue_capacity_packets(), 42);
    }

    #[test]
    fn two_flow_sharing_scenario() {
        let text = r#"
            bandwidth_mbps = 20.0
            buffer_bdp = 0.5
            [[flows]]
            algorithm = "siad"
            num_rtt = 30
            [[flows]]
            algorithm = "siad"
            num_rtt = 30
            start_s = 1.0
        "#;
        let sc = parse_scenario(text, "inline").unwrap();
        assert_eq!(sc.flows.len(), 2);
        assert_eq!(sc.flows[0].label(), "siad(num_rtt=30)");
        assert_eq!(sc.flows[1].start_s, 1.0);
    }

    #[test]
    fn zero_buffer_rejected() {
        let text = r#"
            bandwidth_mbps = 10.0
            buffer_bdp = 0.0
            [[flows]]
            algorithm = "reno"
        "#;
        let err = parse_scenario(text, "inline").unwrap_err();
        assert!(err.to_string().contains("buffer_bdp"));
    }

    #[test]
    fn siad_needs_exactly_one_knob() {
        let text = r#"
            bandwidth_mbps = 10.0
            buffer_bdp = 0.5
            [[flows]]
            algorithm = "siad"
        "#;
        assert!(parse_scenario(text, "inline").is_err());
        let text = r#"
            bandwidth_mbps = 10.0
            buffer_bdp = 0.5
            [[flows]]
            algorithm = "siad"
            num_rtt = 20
            num_ms = 4000.0
        "#;
        assert!(parse_scenario(text, "inline").is_err());
    }

    #[test]
    fn num_rtt_below_two_rejected() {
        let mut sc = Scenario::single_flow(10.0, 0.5, FlowSpec::siad_num_rtt(1));
        assert!(sc.validate().is_err());
        sc.flows[0].num_rtt = Some(2);
        assert!(sc.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
            bandwidth_mbps = 10.0
            buffer_bdp = 0.5
            bogus_key = 1
        "#;
        assert!(parse_scenario(text, "inline").is_err());
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let mut sc = Scenario::single_flow(10.0, 0.7, FlowSpec::siad_num_rtt(20));
        sc.rtt_changes.push(RttChange {
            at_s: 30.0,
            owd_ms: 20.0,
        });
        sc.loss = Some(LossSpec {
            p_rand: 0.002,
            drop_seqs: Vec::new(),
        });
        let text = toml::to_string(&sc).unwrap();
        let back = parse_scenario(&text, "inline").unwrap();
        assert_eq!(sc, back);
    }
}
