use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use super::{Flow, SimParams};
use crate::error::Result;
use crate::geom::Vec2;
use crate::rng::RandomStream;
use crate::trace::{Scenario, TraceCursor};

/// Initial TTL of the expanding-ring search. Two hops cover the small
/// closed-form fixtures on the first attempt; retries widen to the ceiling.
const RING_TTL_START: u32 = 2;
const RING_TTL_STEP: u32 = 2;
/// Backoff cap for repeated discovery failures to one destination: the wait
/// quadruples per failed round up to discovery_timeout * 2^MAX_BACKOFF_EXPONENT.
const MAX_BACKOFF_EXPONENT: u32 = 4;

/// Raw packet counters accumulated by one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SimCounters {
    pub sent_data: u64,
    pub delivered_data: u64,
    /// Sum of enqueue-to-delivery times over delivered packets.
    pub delay_sum: f64,
    pub routing_packets: u64,
    pub dropped_no_route: u64,
    pub dropped_buffer_overflow: u64,
    pub dropped_link_break: u64,
    pub dropped_at_end: u64,
    /// Control-plane breakdown of `routing_packets`.
    pub rreq_transmissions: u64,
    pub rrep_transmissions: u64,
    pub rerr_transmissions: u64,
    pub discoveries_started: u64,
    pub discovery_rounds_failed: u64,
}

#[derive(Clone, Copy, Debug)]
struct DataPacket {
    flow: usize,
    src: usize,
    dst: usize,
    enqueued: f64,
    hops: u32,
}

#[derive(Clone, Copy, Debug)]
struct RreqMsg {
    origin: usize,
    origin_seq: u64,
    id: u64,
    target: usize,
    /// Last destination sequence number known at the origin (0 = none).
    target_seq: u64,
    hop_count: u32,
    ttl: u32,
}

#[derive(Debug)]
enum EventKind {
    EmitPacket { flow: usize },
    DataArrive { packet: DataPacket, node: usize },
    RreqBroadcast { node: usize, rreq: RreqMsg },
    DiscoveryTimeout { node: usize, dst: usize, attempt: u32 },
}

struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the BinaryHeap pops the earliest event; ties break in
// insertion order.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Copy, Debug)]
struct RouteEntry {
    next_hop: usize,
    hop_count: u32,
    seq: u64,
    expiry: f64,
}

#[derive(Default)]
struct Node {
    routes: HashMap<usize, RouteEntry>,
    own_seq: u64,
    next_rreq_id: u64,
    seen_rreq: HashSet<(usize, u64)>,
    /// Packets held per destination while discovery runs.
    buffers: HashMap<usize, VecDeque<DataPacket>>,
    /// Active discovery attempt number per destination.
    discovering: HashMap<usize, u32>,
    /// No new discovery toward a destination before this time.
    backoff_until: HashMap<usize, f64>,
    /// Consecutive failed discovery rounds per destination.
    failure_streak: HashMap<usize, u32>,
    /// Highest destination sequence number seen (bumped on invalidation so
    /// stale caches cannot answer post-break discoveries).
    last_known_seq: HashMap<usize, u64>,
    /// Hop count of the last route held toward each destination; seeds the
    /// expanding-ring TTL on re-discovery.
    last_known_hops: HashMap<usize, u32>,
    /// Upstream neighbors using this node as next hop, per destination.
    /// Link breaks notify them all at once with one RERR broadcast.
    precursors: HashMap<usize, std::collections::BTreeSet<usize>>,
}

pub(super) struct Engine<'a> {
    flows: &'a [Flow],
    params: SimParams,
    rng: &'a mut RandomStream,
    horizon: f64,
    ttl_max: u32,
    node_count: usize,
    cursors: Vec<TraceCursor<'a>>,
    nodes: Vec<Node>,
    queue: BinaryHeap<Event>,
    next_event_seq: u64,
    counters: SimCounters,
}

impl<'a> Engine<'a> {
    pub(super) fn new(
        scenario: &'a Scenario,
        flows: &'a [Flow],
        params: &SimParams,
        rng: &'a mut RandomStream,
    ) -> Result<Self> {
        let node_count = scenario.node_count();
        let cursors = scenario
            .traces
            .iter()
            .map(TraceCursor::new)
            .collect::<Result<_>>()?;
        let mut nodes = Vec::with_capacity(node_count);
        nodes.resize_with(node_count, Node::default);
        let mut engine = Engine {
            flows,
            params: *params,
            rng,
            horizon: scenario.duration,
            ttl_max: params.effective_ttl_max(node_count),
            node_count,
            cursors,
            nodes,
            queue: BinaryHeap::new(),
            next_event_seq: 0,
            counters: SimCounters::default(),
        };
        for (i, f) in flows.iter().enumerate() {
            engine.schedule(f.start, EventKind::EmitPacket { flow: i });
        }
        Ok(engine)
    }

    pub(super) fn run(mut self) -> SimCounters {
        while let Some(ev) = self.queue.pop() {
            if ev.time > self.horizon {
                // Past the end of the run: in-flight data is lost, control
                // traffic and source clocks simply stop.
                if let EventKind::DataArrive { .. } = ev.kind {
                    self.counters.dropped_at_end += 1;
                }
                continue;
            }
            match ev.kind {
                EventKind::EmitPacket { flow } => self.handle_emit(flow, ev.time),
                EventKind::DataArrive { packet, node } => {
                    self.handle_data_arrive(packet, node, ev.time)
                }
                EventKind::RreqBroadcast { node, rreq } => {
                    self.handle_rreq_broadcast(node, rreq, ev.time)
                }
                EventKind::DiscoveryTimeout { node, dst, attempt } => {
                    self.handle_discovery_timeout(node, dst, attempt, ev.time)
                }
            }
        }
        // Whatever is still buffered at the end never reached the wire.
        for node in &mut self.nodes {
            for (_, buf) in node.buffers.iter_mut() {
                self.counters.dropped_at_end += buf.len() as u64;
                buf.clear();
            }
        }
        self.counters
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_event_seq;
        self.next_event_seq += 1;
        self.queue.push(Event { time, seq, kind });
    }

    fn position(&mut self, node: usize, t: f64) -> Vec2 {
        self.cursors[node].sample(t).0
    }

    fn link_up(&mut self, a: usize, b: usize, t: f64) -> bool {
        let pa = self.position(a, t);
        let pb = self.position(b, t);
        pa.distance(pb) <= self.params.routing_radio_range
    }

    fn data_hop_time(&self, packet_size: u32) -> f64 {
        packet_size as f64 * 8.0 / self.params.data_rate + self.params.per_hop_processing
    }

    fn valid_route(&self, node: usize, dst: usize, t: f64) -> Option<RouteEntry> {
        self.nodes[node]
            .routes
            .get(&dst)
            .copied()
            .filter(|e| e.expiry >= t)
    }

    fn note_seq(&mut self, node: usize, dst: usize, seq: u64) {
        let e = self.nodes[node].last_known_seq.entry(dst).or_insert(0);
        *e = (*e).max(seq);
    }

    /// Drop the route and bump the destination sequence number, so caches
    /// holding the old generation cannot answer the next discovery.
    fn invalidate_route(&mut self, node: usize, dst: usize) {
        if let Some(e) = self.nodes[node].routes.remove(&dst) {
            self.note_seq(node, dst, e.seq + 1);
        }
    }

    fn install_route(&mut self, node: usize, dst: usize, candidate: RouteEntry, t: f64) {
        self.note_seq(node, dst, candidate.seq);
        self.nodes[node].last_known_hops.insert(dst, candidate.hop_count);
        let slot = self.nodes[node].routes.entry(dst);
        use std::collections::hash_map::Entry;
        match slot {
            Entry::Vacant(v) => {
                v.insert(candidate);
            }
            Entry::Occupied(mut o) => {
                let cur = o.get();
                let stale = cur.expiry < t;
                let fresher = candidate.seq > cur.seq
                    || (candidate.seq == cur.seq && candidate.hop_count < cur.hop_count);
                if stale || fresher {
                    o.insert(candidate);
                } else if candidate.seq == cur.seq && candidate.next_hop == cur.next_hop {
                    o.get_mut().expiry = o.get().expiry.max(candidate.expiry);
                }
            }
        }
    }

    // -- traffic ----------------------------------------------------------

    fn handle_emit(&mut self, flow_idx: usize, t: f64) {
        let flow = self.flows[flow_idx];
        self.counters.sent_data += 1;
        let packet = DataPacket {
            flow: flow_idx,
            src: flow.source,
            dst: flow.destination,
            enqueued: t,
            hops: 0,
        };
        self.dispatch_at_source(packet, t);

        let next = t + 1.0 / flow.rate;
        if next < flow.stop {
            self.schedule(next, EventKind::EmitPacket { flow: flow_idx });
        }
    }

    fn dispatch_at_source(&mut self, packet: DataPacket, t: f64) {
        let (src, dst) = (packet.src, packet.dst);
        if self.valid_route(src, dst, t).is_some() {
            self.forward(src, packet, t);
        } else {
            self.buffer_packet(src, packet, t);
        }
    }

    fn buffer_packet(&mut self, src: usize, packet: DataPacket, t: f64) {
        let dst = packet.dst;
        let cap = self.params.max_buffered_per_flow;
        let buf = self.nodes[src].buffers.entry(dst).or_default();
        if buf.len() >= cap {
            self.counters.dropped_buffer_overflow += 1;
        } else {
            buf.push_back(packet);
        }
        self.ensure_discovery(src, dst, t);
    }

    fn forward(&mut self, node: usize, mut packet: DataPacket, t: f64) {
        let Some(entry) = self.valid_route(node, packet.dst, t) else {
            // Route evaporated mid-path; treated as an in-flight loss.
            self.counters.dropped_link_break += 1;
            self.cascade_rerr(node, packet.dst);
            return;
        };
        let next = entry.next_hop;
        if !self.link_up(node, next, t) {
            self.counters.dropped_link_break += 1;
            let mut broken: Vec<usize> = self.nodes[node]
                .routes
                .iter()
                .filter(|(_, e)| e.next_hop == next)
                .map(|(&d, _)| d)
                .collect();
            broken.sort_unstable();
            for &d in &broken {
                self.invalidate_route(node, d);
            }
            for &d in &broken {
                self.cascade_rerr(node, d);
            }
            return;
        }
        if packet.hops as usize > self.node_count {
            // Transient routing loop; the packet is going nowhere.
            self.counters.dropped_link_break += 1;
            return;
        }
        packet.hops += 1;
        if let Some(e) = self.nodes[node].routes.get_mut(&packet.dst) {
            e.expiry = e.expiry.max(t + self.params.route_lifetime);
        }
        if next != packet.dst {
            self.nodes[next]
                .precursors
                .entry(packet.dst)
                .or_default()
                .insert(node);
        }
        let arrive = t + self.data_hop_time(self.flows[packet.flow].packet_size);
        self.schedule(arrive, EventKind::DataArrive { packet, node: next });
    }

    fn handle_data_arrive(&mut self, packet: DataPacket, node: usize, t: f64) {
        if node == packet.dst {
            self.counters.delivered_data += 1;
            self.counters.delay_sum += t - packet.enqueued;
            return;
        }
        self.forward(node, packet, t);
    }

    // -- route discovery --------------------------------------------------

    /// Expanding-ring TTL. A re-discovery starts from the last known hop
    /// count plus one increment; the final attempt searches the whole
    /// network.
    fn ring_ttl(&self, src: usize, dst: usize, attempt: u32, retries: u32) -> u32 {
        if attempt >= retries {
            return self.ttl_max;
        }
        let base = self.nodes[src]
            .last_known_hops
            .get(&dst)
            .map_or(RING_TTL_START, |&h| h + RING_TTL_STEP);
        (base + RING_TTL_STEP * attempt).min(self.ttl_max)
    }

    /// Destinations that already failed a whole round skip the expanding
    /// ring: the round is a single full-TTL search, and the inter-round
    /// backoff does the retrying.
    fn round_retries(&self, src: usize, dst: usize) -> u32 {
        if self.nodes[src].failure_streak.get(&dst).copied().unwrap_or(0) > 0 {
            0
        } else {
            self.params.rreq_retries
        }
    }

    fn ensure_discovery(&mut self, src: usize, dst: usize, t: f64) {
        if self.nodes[src].discovering.contains_key(&dst) {
            return;
        }
        // Back off after failed rounds; the next packet toward this
        // destination re-triggers discovery once the window has passed.
        if let Some(&until) = self.nodes[src].backoff_until.get(&dst) {
            if t < until {
                return;
            }
        }
        self.start_discovery_attempt(src, dst, 0, t);
    }

    fn start_discovery_attempt(&mut self, src: usize, dst: usize, attempt: u32, t: f64) {
        if attempt == 0 {
            self.counters.discoveries_started += 1;
        }
        let ttl = self.ring_ttl(src, dst, attempt, self.round_retries(src, dst));
        let node = &mut self.nodes[src];
        node.discovering.insert(dst, attempt);
        node.own_seq += 1;
        let id = node.next_rreq_id;
        node.next_rreq_id += 1;
        node.seen_rreq.insert((src, id));
        let target_seq = node.last_known_seq.get(&dst).copied().unwrap_or(0);
        let rreq = RreqMsg {
            origin: src,
            origin_seq: node.own_seq,
            id,
            target: dst,
            target_seq,
            hop_count: 0,
            ttl,
        };
        self.schedule(t, EventKind::RreqBroadcast { node: src, rreq });
        self.schedule(
            t + self.params.discovery_timeout,
            EventKind::DiscoveryTimeout {
                node: src,
                dst,
                attempt,
            },
        );
    }

    fn handle_discovery_timeout(&mut self, src: usize, dst: usize, attempt: u32, t: f64) {
        if self.nodes[src].discovering.get(&dst) != Some(&attempt) {
            return; // resolved or superseded
        }
        if self.valid_route(src, dst, t).is_some() {
            // A route appeared (e.g. learned from a passing flood).
            self.flush_buffer(src, dst, t);
            return;
        }
        if attempt >= self.round_retries(src, dst) {
            self.counters.discovery_rounds_failed += 1;
            let node = &mut self.nodes[src];
            node.discovering.remove(&dst);
            let streak = node.failure_streak.entry(dst).or_insert(0);
            *streak += 1;
            let exponent = (2 * *streak).min(MAX_BACKOFF_EXPONENT);
            node.backoff_until.insert(
                dst,
                t + self.params.discovery_timeout * f64::from(1u32 << exponent),
            );
            if let Some(buf) = node.buffers.get_mut(&dst) {
                self.counters.dropped_no_route += buf.len() as u64;
                buf.clear();
            }
            return;
        }
        self.start_discovery_attempt(src, dst, attempt + 1, t);
    }

    fn handle_rreq_broadcast(&mut self, node: usize, rreq: RreqMsg, t: f64) {
        self.counters.routing_packets += 1;
        self.counters.rreq_transmissions += 1;
        let origin_pos = self.position(node, t);
        let receivers: Vec<usize> = (0..self.node_count)
            .filter(|&m| m != node)
            .filter(|&m| self.position(m, t).distance(origin_pos) <= self.params.routing_radio_range)
            .collect();
        for m in receivers {
            self.process_rreq(m, rreq, node, t);
        }
    }

    fn process_rreq(&mut self, m: usize, rreq: RreqMsg, from: usize, t: f64) {
        if !self.nodes[m].seen_rreq.insert((rreq.origin, rreq.id)) {
            return;
        }
        // Reverse route toward the origin.
        self.install_route(
            m,
            rreq.origin,
            RouteEntry {
                next_hop: from,
                hop_count: rreq.hop_count + 1,
                seq: rreq.origin_seq,
                expiry: t + self.params.route_lifetime,
            },
            t,
        );

        if m == rreq.target {
            self.nodes[m].own_seq = self.nodes[m].own_seq.max(rreq.target_seq) + 1;
            let seq = self.nodes[m].own_seq;
            self.send_rrep(m, rreq.origin, rreq.target, seq, 0, t);
            return;
        }
        if let Some(e) = self.valid_route(m, rreq.target, t) {
            if e.seq >= rreq.target_seq {
                self.send_rrep(m, rreq.origin, rreq.target, e.seq, e.hop_count, t);
                return;
            }
        }
        if rreq.ttl > 1 {
            let jitter = self.rng.uniform(0.0, self.params.broadcast_jitter_max);
            let relayed = RreqMsg {
                hop_count: rreq.hop_count + 1,
                ttl: rreq.ttl - 1,
                ..rreq
            };
            self.schedule(
                t + jitter,
                EventKind::RreqBroadcast {
                    node: m,
                    rreq: relayed,
                },
            );
        }
    }

    /// Unicast the RREP hop-by-hop along the reverse route, installing the
    /// forward route at every node it passes. Control hops are instantaneous.
    fn send_rrep(
        &mut self,
        replier: usize,
        origin: usize,
        target: usize,
        dest_seq: u64,
        mut hops_to_target: u32,
        t: f64,
    ) {
        let mut cur = replier;
        let mut steps = 0;
        while cur != origin {
            steps += 1;
            if steps > self.node_count {
                return;
            }
            let Some(reverse) = self.valid_route(cur, origin, t) else {
                return;
            };
            let next = reverse.next_hop;
            if !self.link_up(cur, next, t) {
                return;
            }
            self.counters.routing_packets += 1;
            self.counters.rrep_transmissions += 1;
            hops_to_target += 1;
            self.install_route(
                next,
                target,
                RouteEntry {
                    next_hop: cur,
                    hop_count: hops_to_target,
                    seq: dest_seq,
                    expiry: t + self.params.route_lifetime,
                },
                t,
            );
            self.nodes[cur].precursors.entry(target).or_default().insert(next);
            cur = next;
        }
        self.flush_buffer(origin, target, t);
    }

    fn flush_buffer(&mut self, src: usize, dst: usize, t: f64) {
        let node = &mut self.nodes[src];
        node.discovering.remove(&dst);
        node.backoff_until.remove(&dst);
        // The failure streak persists across reunions: a historically
        // unreachable destination keeps its conservative probing schedule.
        // Ordinary breaks toward reachable destinations never build a streak.
        loop {
            if self.valid_route(src, dst, t).is_none() {
                break;
            }
            let Some(packet) = self
                .nodes[src]
                .buffers
                .get_mut(&dst)
                .and_then(|b| b.pop_front())
            else {
                return;
            };
            self.forward(src, packet, t);
        }
        // Route died while draining; anything left waits on a new discovery.
        let leftovers = self.nodes[src].buffers.get(&dst).map_or(0, |b| b.len());
        if leftovers > 0 {
            self.ensure_discovery(src, dst, t);
        }
    }

    /// Propagate a route error upstream through the precursor lists: each
    /// affected node issues one RERR broadcast, and every neighbor routing
    /// the destination through it invalidates and cascades in turn.
    /// Instantaneous, like the rest of the control plane.
    fn cascade_rerr(&mut self, origin: usize, dst: usize) {
        let mut visited = vec![false; self.node_count];
        visited[origin] = true;
        let mut frontier = vec![origin];
        while let Some(n) = frontier.pop() {
            let upstream: Vec<usize> = match self.nodes[n].precursors.get_mut(&dst) {
                Some(set) => {
                    let list = set.iter().copied().collect();
                    set.clear();
                    list
                }
                None => Vec::new(),
            };
            if upstream.is_empty() {
                continue;
            }
            self.counters.routing_packets += 1;
            self.counters.rerr_transmissions += 1;
            for p in upstream {
                if visited[p] {
                    continue;
                }
                visited[p] = true;
                let via_n = self.nodes[p]
                    .routes
                    .get(&dst)
                    .is_some_and(|e| e.next_hop == n);
                if via_n {
                    self.invalidate_route(p, dst);
                    frontier.push(p);
                }
            }
        }
    }
}
