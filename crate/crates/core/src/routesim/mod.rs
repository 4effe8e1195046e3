//! Event-driven CBR/UDP traffic simulation over a mobility scenario with an
//! AODV-style reactive routing protocol: RREQ flood with duplicate
//! suppression and expanding-ring search (re-discoveries seed the ring from
//! the last known hop count), RREP unicast installing forward routes, RERR
//! propagation through precursor lists, destination sequence numbers bumped
//! on invalidation so stale caches cannot answer post-break discoveries, and
//! binary exponential backoff toward destinations whose discoveries keep
//! failing.
//!
//! The MAC is idealized: no collisions or contention. Control packets
//! propagate with zero transmission latency (rebroadcasts are spread by a
//! small uniform jitter); data packets cost
//! `packet_size * 8 / data_rate + per_hop_processing` per hop. Link breaks
//! are detected from contact geometry at transmit time, standing in for
//! link-layer feedback. There is no HELLO traffic, local repair, or
//! gratuitous RREP.

mod engine;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::trace::Scenario;

pub use engine::SimCounters;

/// One CBR flow of fixed-size packets at a fixed rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub source: usize,
    pub destination: usize,
    /// Payload size, bytes.
    pub packet_size: u32,
    /// Packets per second.
    pub rate: f64,
    pub start: f64,
    pub stop: f64,
}

/// Routing and traffic parameters for one simulation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    /// Link data rate, bits/second.
    pub data_rate: f64,
    /// Per-hop forwarding cost on data packets, seconds.
    pub per_hop_processing: f64,
    /// RREQ TTL ceiling in hops; 0 means "node count" at run time.
    pub rreq_ttl_max: u32,
    /// Route entry lifetime, refreshed on use, seconds.
    pub route_lifetime: f64,
    /// Wait per discovery attempt before retrying or giving up, seconds.
    pub discovery_timeout: f64,
    /// Buffered-packet cap per destination at a source.
    pub max_buffered_per_flow: usize,
    /// Discovery retries after the initial attempt.
    pub rreq_retries: u32,
    /// Upper bound of the uniform rebroadcast jitter, seconds.
    pub broadcast_jitter_max: f64,
    /// Radio range used by the routing plane, meters.
    pub routing_radio_range: f64,
    /// Duration of performance runs, seconds.
    pub sim_duration: f64,
    /// Number of CBR connections to draw.
    pub max_connections: usize,
    /// CBR payload size, bytes.
    pub packet_size: u32,
    /// CBR sending rate, packets/second.
    pub sending_rate: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            data_rate: 2_000_000.0,
            per_hop_processing: 1e-3,
            rreq_ttl_max: 0,
            route_lifetime: 10.0,
            discovery_timeout: 1.0,
            max_buffered_per_flow: 64,
            rreq_retries: 2,
            broadcast_jitter_max: 0.010,
            routing_radio_range: 250.0,
            sim_duration: 300.0,
            max_connections: 15,
            packet_size: 512,
            sending_rate: 4.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.data_rate <= 0.0 {
            return Err(Error::config("data_rate must be positive"));
        }
        if self.per_hop_processing < 0.0 {
            return Err(Error::config("per_hop_processing must be non-negative"));
        }
        if self.route_lifetime <= 0.0 {
            return Err(Error::config("route_lifetime must be positive"));
        }
        if self.discovery_timeout <= 0.0 {
            return Err(Error::config("discovery_timeout must be positive"));
        }
        if self.max_buffered_per_flow == 0 {
            return Err(Error::config("max_buffered_per_flow must be positive"));
        }
        if self.broadcast_jitter_max < 0.0 {
            return Err(Error::config("broadcast_jitter_max must be non-negative"));
        }
        if self.routing_radio_range <= 0.0 {
            return Err(Error::config("routing_radio_range must be positive"));
        }
        if self.sim_duration <= 0.0 {
            return Err(Error::config("sim_duration must be positive"));
        }
        if self.packet_size == 0 {
            return Err(Error::config("packet_size must be positive"));
        }
        if self.sending_rate <= 0.0 {
            return Err(Error::config("sending_rate must be positive"));
        }
        Ok(())
    }

    /// Effective RREQ TTL ceiling: explicit value, or the node count as a
    /// network diameter bound when left at 0.
    pub fn effective_ttl_max(&self, node_count: usize) -> u32 {
        if self.rreq_ttl_max == 0 {
            node_count as u32
        } else {
            self.rreq_ttl_max
        }
    }
}

/// Flow start times are staggered uniformly over this many initial seconds.
const FLOW_START_STAGGER: f64 = 10.0;

/// Draw `max_connections` CBR flows with distinct (source, destination)
/// pairs, uniformly without replacement.
pub fn build_flows(
    node_count: usize,
    params: &SimParams,
    rng: &mut RandomStream,
) -> Result<Vec<Flow>> {
    params.validate()?;
    if node_count < 2 {
        return Err(Error::config("need at least 2 nodes to build flows"));
    }
    let wanted = params.max_connections;
    if node_count * (node_count - 1) < wanted {
        return Err(Error::config(format!(
            "node_count {node_count} cannot form {wanted} distinct source/destination pairs"
        )));
    }

    let mut taken = HashSet::new();
    let mut flows = Vec::with_capacity(wanted);
    while flows.len() < wanted {
        let source = rng.uniform_index(node_count);
        let offset = rng.uniform_index(node_count - 1);
        let destination = if offset >= source { offset + 1 } else { offset };
        if !taken.insert((source, destination)) {
            continue;
        }
        flows.push(Flow {
            source,
            destination,
            packet_size: params.packet_size,
            rate: params.sending_rate,
            start: rng.uniform(0.0, FLOW_START_STAGGER),
            stop: params.sim_duration,
        });
    }
    Ok(flows)
}

/// Packet-level outcome of one routing run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerfReport {
    /// Delivered data packets as a percentage of sent.
    pub pdr: f64,
    /// Mean source-enqueue-to-delivery time over delivered packets.
    pub avg_delay: Option<f64>,
    /// Routing transmissions per delivered data packet; undefined with no
    /// deliveries.
    pub nrl: Option<f64>,
    pub sent_data: u64,
    pub delivered_data: u64,
    /// Per-hop control transmissions (each RREQ rebroadcast, RREP hop, and
    /// RERR hop counts once per transmitting node).
    pub routing_packets: u64,
    pub dropped_no_route: u64,
    pub dropped_buffer_overflow: u64,
    pub dropped_link_break: u64,
    pub dropped_at_end: u64,
}

impl PerfReport {
    pub fn dropped_total(&self) -> u64 {
        self.dropped_no_route
            + self.dropped_buffer_overflow
            + self.dropped_link_break
            + self.dropped_at_end
    }

    /// sent = delivered + all categorized drops.
    pub fn conserves(&self) -> bool {
        self.sent_data == self.delivered_data + self.dropped_total()
    }
}

/// Reduce raw run counters to the report metrics.
pub fn compute_perf(counters: &SimCounters) -> PerfReport {
    let delivered = counters.delivered_data;
    PerfReport {
        pdr: if counters.sent_data == 0 {
            0.0
        } else {
            100.0 * delivered as f64 / counters.sent_data as f64
        },
        avg_delay: if delivered == 0 {
            None
        } else {
            Some(counters.delay_sum / delivered as f64)
        },
        nrl: if delivered == 0 {
            None
        } else {
            Some(counters.routing_packets as f64 / delivered as f64)
        },
        sent_data: counters.sent_data,
        delivered_data: delivered,
        routing_packets: counters.routing_packets,
        dropped_no_route: counters.dropped_no_route,
        dropped_buffer_overflow: counters.dropped_buffer_overflow,
        dropped_link_break: counters.dropped_link_break,
        dropped_at_end: counters.dropped_at_end,
    }
}

/// Run the event simulation over `[0, scenario.duration]` and report the
/// performance metrics.
pub fn run_simulation(
    scenario: &Scenario,
    flows: &[Flow],
    params: &SimParams,
    rng: &mut RandomStream,
) -> Result<PerfReport> {
    run_simulation_detailed(scenario, flows, params, rng).map(|(report, _)| report)
}

/// As `run_simulation`, also returning the raw counters (control-plane
/// breakdown, discovery bookkeeping).
pub fn run_simulation_detailed(
    scenario: &Scenario,
    flows: &[Flow],
    params: &SimParams,
    rng: &mut RandomStream,
) -> Result<(PerfReport, SimCounters)> {
    params.validate()?;
    let n = scenario.node_count();
    for (i, f) in flows.iter().enumerate() {
        if f.source >= n || f.destination >= n {
            return Err(Error::usage(format!(
                "flow {i} references a node outside 0..{n}"
            )));
        }
        if f.source == f.destination {
            return Err(Error::usage(format!("flow {i} has source == destination")));
        }
        if f.rate <= 0.0 || f.start >= f.stop {
            return Err(Error::usage(format!("flow {i} has an empty schedule")));
        }
    }
    let counters = engine::Engine::new(scenario, flows, params, rng)?.run();
    let report = compute_perf(&counters);
    debug_assert!(report.conserves(), "packet conservation violated");
    Ok((report, counters))
}
