//! Deterministic discrete-event simulator for the testbed: a virtual clock
//! in integer microseconds, controller/switch/host behaviour, an abstracted
//! OpenFlow-style control channel, data-plane forwarding under VPLS policy,
//! and link taps for sniffing.
//!
//! Everything is driven by (timestamp, sequence-number) ordered events plus
//! synchronous application calls (`ping`, `telnet_session`, `attempt_login`)
//! that execute atomically at the current virtual time, so a (topology,
//! seed, call script) triple fully determines the trace.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::collections::BinaryHeap;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topo::{DomainStatus, NodeKind, TopoError, Topology};

pub const MICROS_PER_SEC: u64 = 1_000_000;

const LINK_LATENCY: u64 = 1_000; // per traversal
const CONTROLLER_PROC: u64 = 1_000; // PacketIn handling
const KEEPALIVE_INTERVAL: u64 = MICROS_PER_SEC;
const KEEPALIVE_MISS_LIMIT: u32 = 2;
const FLOW_IDLE_TIMEOUT: u64 = 10 * MICROS_PER_SEC;
const CONTROL_TICK: u64 = 10_000; // control-plane accounting granularity
const TICKS_PER_SEC: u64 = MICROS_PER_SEC / CONTROL_TICK;
const CONTROL_QUEUE_CAPACITY: usize = 1_024;

pub fn secs_to_micros(secs: f64) -> u64 {
    (secs * MICROS_PER_SEC as f64).round() as u64
}

pub fn micros_to_secs(micros: u64) -> f64 {
    micros as f64 / MICROS_PER_SEC as f64
}

fn fmt_secs(micros: u64) -> String {
    format!("{}.{:06}", micros / MICROS_PER_SEC, micros % MICROS_PER_SEC)
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid topology: {0}")]
    InvalidTopology(#[from] TopoError),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {0} is not a host")]
    NotAHost(String),
    #[error("unknown link {0}")]
    UnknownLink(String),
    #[error("time regression: requested {requested}s but clock is at {now}s")]
    TimeRegression { requested: f64, now: f64 },
    #[error("flood target port {got} is not the controller's OpenFlow port {expected}")]
    WrongTargetPort { expected: u16, got: u16 },
    #[error("hosts {src} and {dst} are not mutually reachable: {reason}")]
    NotReachable {
        src: String,
        dst: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PacketKind {
    Hello,
    PacketIn,
    FlowMod,
    Icmp,
    TelnetData,
    TcpSyn,
    TcpSynAck,
    LoginAttempt,
    LoginResult,
}

impl PacketKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PacketKind::Hello => "hello",
            PacketKind::PacketIn => "packet_in",
            PacketKind::FlowMod => "flow_mod",
            PacketKind::Icmp => "icmp",
            PacketKind::TelnetData => "telnet_data",
            PacketKind::TcpSyn => "tcp_syn",
            PacketKind::TcpSynAck => "tcp_syn_ack",
            PacketKind::LoginAttempt => "login_attempt",
            PacketKind::LoginResult => "login_result",
        }
    }

    /// The network service a plaintext packet of this kind reveals.
    pub fn service(&self) -> &'static str {
        match self {
            PacketKind::Hello => "vpls-keepalive",
            PacketKind::PacketIn | PacketKind::FlowMod => "openflow",
            PacketKind::Icmp => "icmp",
            PacketKind::TelnetData | PacketKind::LoginAttempt | PacketKind::LoginResult => {
                "telnet"
            }
            PacketKind::TcpSyn | PacketKind::TcpSynAck => "tcp",
        }
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A packet as emitted by a node. Fields are plaintext key/value pairs;
/// whether an observer can read them depends on the link it is captured on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub kind: PacketKind,
    pub src: String,
    pub dst: String,
    pub fields: Vec<(String, String)>,
    pub vpls_tag: Option<String>,
    pub timestamp_micros: u64,
}

impl Packet {
    fn wire_size(&self) -> u32 {
        64 + self
            .fields
            .iter()
            .map(|(k, v)| k.len() as u32 + v.len() as u32 + 2)
            .sum::<u32>()
    }
}

/// What a tap saw for one link traversal. On an encrypted link only
/// metadata survives: kind and fields are absent, size/src/dst/timestamp
/// remain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturedPacket {
    pub timestamp_micros: u64,
    pub link: String,
    pub kind: Option<PacketKind>,
    pub src: String,
    pub dst: String,
    pub size: u32,
    pub fields: Option<Vec<(String, String)>>,
    pub vpls_tag: Option<String>,
}

impl CapturedPacket {
    pub fn is_plaintext(&self) -> bool {
        self.fields.is_some()
    }

    pub fn to_line(&self) -> String {
        let mut line = format!(
            "t={} link={} kind={} src={} dst={} size={}",
            fmt_secs(self.timestamp_micros),
            self.link,
            self.kind.map(|k| k.as_str()).unwrap_or("?"),
            self.src,
            self.dst,
            self.size,
        );
        if let Some(tag) = &self.vpls_tag {
            line.push_str(&format!(" vpls={tag}"));
        }
        match &self.fields {
            Some(fields) => {
                for (k, v) in fields {
                    line.push_str(&format!(" {k}={v}"));
                }
            }
            None => line.push_str(" opaque"),
        }
        line
    }
}

/// Packets collected from one tap since the last drain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureSet {
    pub link: String,
    pub packets: Vec<CapturedPacket>,
}

impl CaptureSet {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.packets {
            out.push_str(&p.to_line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TapHandle(usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub timestamp_micros: u64,
    pub node: String,
    pub event: String,
    pub fields: Vec<(String, String)>,
}

impl TraceEntry {
    pub fn to_line(&self) -> String {
        let mut line = format!(
            "t={} {} {}",
            fmt_secs(self.timestamp_micros),
            self.node,
            self.event
        );
        for (k, v) in &self.fields {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLog {
    pub entries: Vec<TraceEntry>,
}

impl TraceLog {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}

/// Control-plane health of the single controller.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControllerState {
    pub pending_queue: usize,
    pub half_open: u64,
    pub stalled: bool,
    pub total_syns: u64,
    pub failed_logins: BTreeMap<String, u32>,
    pub locked_out: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PingOutcome {
    Delivered { rtt: f64 },
    Blocked,
    Timeout,
}

impl PingOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self, PingOutcome::Delivered { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoginOutcome {
    Success,
    Failure,
    LockedOut,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionTranscript {
    pub packets: Vec<Packet>,
}

type FlowKey = (String, String, String); // (src host, dst host, vpls tag)

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    ControlTick,
    Keepalive { domain: String },
    FlowExpiry { switch: String, key: FlowKey },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Scheduled {
    at: u64,
    seq: u64,
    kind: EventKind,
}

#[derive(Debug, Clone)]
struct FlowEntry {
    expires_at: u64,
}

#[derive(Debug, Clone)]
struct FloodState {
    rate: u64,
    end: u64,
    acc: u64,
    src: String,
}

#[derive(Debug)]
struct Tap {
    link: String,
    captured: Vec<CapturedPacket>,
}

/// One simulation run over an immutable topology snapshot.
pub struct Sim {
    topology: Topology,
    seed: u64,
    now: u64,
    seq: u64,
    events: BinaryHeap<Reverse<Scheduled>>,
    controller: ControllerState,
    flow_tables: BTreeMap<String, BTreeMap<FlowKey, FlowEntry>>,
    taps: Vec<Tap>,
    trace: TraceLog,
    floods: Vec<FloodState>,
    control_tick_scheduled: bool,
    drain_acc: u64,
    keepalive_misses: BTreeMap<String, u32>,
    rng: ChaCha8Rng,
}

/// Builds a simulator at time zero with VPLS keepalives scheduled.
pub fn new_sim(topology: Topology, seed: u64) -> Result<Sim, SimError> {
    topology.validate()?;
    let mut sim = Sim {
        seed,
        now: 0,
        seq: 0,
        events: BinaryHeap::new(),
        controller: ControllerState::default(),
        flow_tables: topology
            .switches()
            .map(|s| (s.id.clone(), BTreeMap::new()))
            .collect(),
        taps: Vec::new(),
        trace: TraceLog::default(),
        floods: Vec::new(),
        control_tick_scheduled: false,
        drain_acc: 0,
        keepalive_misses: BTreeMap::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        topology,
    };
    for domain in sim.topology.vpls_domains.clone() {
        sim.keepalive_misses.insert(domain.id.clone(), 0);
        sim.schedule(
            KEEPALIVE_INTERVAL,
            EventKind::Keepalive {
                domain: domain.id.clone(),
            },
        );
    }
    sim.trace("c1", "sim_init", vec![("seed".into(), seed.to_string())]);
    Ok(sim)
}

impl Sim {
    pub fn now_secs(&self) -> f64 {
        micros_to_secs(self.now)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn controller_state(&self) -> &ControllerState {
        &self.controller
    }

    pub fn trace_log(&self) -> &TraceLog {
        &self.trace
    }

    pub fn destroyed_domains(&self) -> usize {
        self.topology
            .vpls_domains
            .iter()
            .filter(|d| d.status == DomainStatus::Destroyed)
            .count()
    }

    /// Deterministic jitter helper: uniform in `0..bound` micros.
    pub fn next_jitter(&mut self, bound: u64) -> u64 {
        if bound == 0 {
            0
        } else {
            self.rng.next_u64() % bound
        }
    }

    fn schedule(&mut self, at: u64, kind: EventKind) {
        let seq = self.seq;
        self.seq += 1;
        self.events.push(Reverse(Scheduled { at, seq, kind }));
    }

    fn trace(&mut self, node: &str, event: &str, fields: Vec<(String, String)>) {
        self.trace.entries.push(TraceEntry {
            timestamp_micros: self.now,
            node: node.to_string(),
            event: event.to_string(),
            fields,
        });
    }

    /// Advances the clock, processing every event with timestamp <= t in
    /// (timestamp, sequence) order, and returns the trace slice produced.
    pub fn run_until(&mut self, t_secs: f64) -> Result<&[TraceEntry], SimError> {
        let target = secs_to_micros(t_secs);
        if target < self.now {
            return Err(SimError::TimeRegression {
                requested: t_secs,
                now: self.now_secs(),
            });
        }
        let start = self.trace.entries.len();
        while let Some(Reverse(next)) = self.events.peek() {
            if next.at > target {
                break;
            }
            let Reverse(event) = self.events.pop().unwrap();
            self.now = event.at;
            match event.kind {
                EventKind::ControlTick => self.on_control_tick(),
                EventKind::Keepalive { domain } => self.on_keepalive(&domain),
                EventKind::FlowExpiry { switch, key } => self.on_flow_expiry(&switch, &key),
            }
        }
        self.now = target;
        Ok(&self.trace.entries[start..])
    }

    // -- events ---------------------------------------------------------------

    fn on_control_tick(&mut self) {
        let limit = self.topology.controller_config.ingress_rate_limit;
        let mut arrivals = 0u64;
        let mut finished: Vec<String> = Vec::new();
        let now = self.now;
        for flood in &mut self.floods {
            let effective = limit.map_or(flood.rate, |cap| flood.rate.min(cap));
            flood.acc += effective;
            arrivals += flood.acc / TICKS_PER_SEC;
            flood.acc %= TICKS_PER_SEC;
            if now >= flood.end {
                finished.push(flood.src.clone());
            }
        }
        self.controller.half_open += arrivals;
        self.controller.total_syns += arrivals;

        self.drain_acc += self.topology.controller_config.packet_capacity;
        let drained = self.drain_acc / TICKS_PER_SEC;
        self.drain_acc %= TICKS_PER_SEC;
        self.controller.half_open = self.controller.half_open.saturating_sub(drained);

        for src in finished {
            self.floods.retain(|f| f.src != src || now < f.end);
            let total = self.controller.total_syns;
            self.trace(
                "c1",
                "flood_end",
                vec![
                    ("src".into(), src),
                    ("total_syns".into(), total.to_string()),
                ],
            );
        }
        self.update_stall();

        if !self.floods.is_empty() || self.controller.half_open > 0 {
            let at = self.now + CONTROL_TICK;
            self.schedule(at, EventKind::ControlTick);
        } else {
            self.control_tick_scheduled = false;
        }
    }

    fn update_stall(&mut self) {
        let limit = self.topology.controller_config.syn_backlog_limit;
        let stalled_now = self.controller.half_open > limit
            || self.controller.pending_queue > CONTROL_QUEUE_CAPACITY;
        if stalled_now && !self.controller.stalled {
            self.controller.stalled = true;
            let fields = vec![
                ("half_open".into(), self.controller.half_open.to_string()),
                ("limit".into(), limit.to_string()),
            ];
            self.trace("c1", "stall", fields);
        } else if !stalled_now && self.controller.stalled {
            self.controller.stalled = false;
            let fields = vec![("half_open".into(), self.controller.half_open.to_string())];
            self.trace("c1", "stall_cleared", fields);
        }
    }

    fn on_keepalive(&mut self, domain_id: &str) {
        let status = self
            .topology
            .vpls_domains
            .iter()
            .find(|d| d.id == domain_id)
            .map(|d| d.status);
        match status {
            Some(DomainStatus::Active) => {
                if self.controller.stalled {
                    let misses = self
                        .keepalive_misses
                        .entry(domain_id.to_string())
                        .or_insert(0);
                    *misses += 1;
                    let missed = *misses;
                    self.trace(
                        "c1",
                        "keepalive_missed",
                        vec![
                            ("domain".into(), domain_id.to_string()),
                            ("missed".into(), missed.to_string()),
                        ],
                    );
                    if missed >= KEEPALIVE_MISS_LIMIT {
                        self.destroy_domain(domain_id);
                    }
                } else {
                    self.keepalive_misses.insert(domain_id.to_string(), 0);
                    self.emit_keepalive(domain_id);
                }
            }
            Some(DomainStatus::Destroyed) | None => {}
        }
        let at = self.now + KEEPALIVE_INTERVAL;
        self.schedule(
            at,
            EventKind::Keepalive {
                domain: domain_id.to_string(),
            },
        );
    }

    fn emit_keepalive(&mut self, domain_id: &str) {
        let switches: Vec<String> = self
            .topology
            .vpls_domains
            .iter()
            .find(|d| d.id == domain_id)
            .map(|d| {
                let mut sw: Vec<String> = d
                    .members
                    .iter()
                    .filter_map(|h| self.topology.access_switch(h))
                    .map(|s| s.to_string())
                    .collect();
                sw.sort();
                sw.dedup();
                sw
            })
            .unwrap_or_default();
        let controller = self.topology.controller().id.clone();
        for switch in switches {
            let packet = Packet {
                kind: PacketKind::Hello,
                src: controller.clone(),
                dst: switch.clone(),
                fields: vec![("domain".into(), domain_id.to_string())],
                vpls_tag: Some(domain_id.to_string()),
                timestamp_micros: self.now,
            };
            let link = link_id(&controller, &switch);
            self.transmit(&controller, &link, packet);
        }
    }

    fn destroy_domain(&mut self, domain_id: &str) {
        for domain in &mut self.topology.vpls_domains {
            if domain.id == domain_id {
                domain.status = DomainStatus::Destroyed;
            }
        }
        for table in self.flow_tables.values_mut() {
            table.retain(|(_, _, tag), _| tag != domain_id);
        }
        self.trace(
            "c1",
            "vpls_destroyed",
            vec![("domain".into(), domain_id.to_string())],
        );
    }

    fn on_flow_expiry(&mut self, switch: &str, key: &FlowKey) {
        let expired = self
            .flow_tables
            .get(switch)
            .and_then(|t| t.get(key))
            .map(|e| e.expires_at <= self.now)
            .unwrap_or(false);
        if expired {
            self.flow_tables.get_mut(switch).unwrap().remove(key);
            self.trace(
                switch,
                "flow_expired",
                vec![
                    ("flow_src".into(), key.0.clone()),
                    ("flow_dst".into(), key.1.clone()),
                    ("vpls".into(), key.2.clone()),
                ],
            );
        }
    }

    // -- packet transmission ----------------------------------------------------

    fn transmit(&mut self, from: &str, link_id: &str, packet: Packet) {
        let encrypted = self
            .topology
            .link(link_id)
            .map(|l| l.encrypted)
            .unwrap_or(false);
        for tap in self.taps.iter_mut().filter(|t| t.link == link_id) {
            tap.captured.push(CapturedPacket {
                timestamp_micros: packet.timestamp_micros,
                link: link_id.to_string(),
                kind: (!encrypted).then_some(packet.kind),
                src: packet.src.clone(),
                dst: packet.dst.clone(),
                size: packet.wire_size(),
                fields: (!encrypted).then(|| packet.fields.clone()),
                vpls_tag: if encrypted {
                    None
                } else {
                    packet.vpls_tag.clone()
                },
            });
        }
        let mut fields = vec![
            ("kind".into(), packet.kind.as_str().to_string()),
            ("dst".into(), packet.dst.clone()),
            ("link".into(), link_id.to_string()),
        ];
        if let Some(tag) = &packet.vpls_tag {
            fields.push(("vpls".into(), tag.clone()));
        }
        if encrypted {
            fields.push(("opaque".into(), "true".into()));
        }
        self.trace(from, "tx", fields);
    }

    // -- application operations ---------------------------------------------------

    fn require_host(&self, id: &str) -> Result<(), SimError> {
        match self.topology.node(id) {
            None => Err(SimError::UnknownNode(id.to_string())),
            Some(n) if n.kind != NodeKind::Host => Err(SimError::NotAHost(id.to_string())),
            _ => Ok(()),
        }
    }

    // Hops of the data path between two hosts: (transmitting node, link id).
    fn data_path(&self, src: &str, dst: &str) -> Vec<(String, String)> {
        let s_in = self
            .topology
            .access_switch(src)
            .unwrap_or_default()
            .to_string();
        let s_out = self
            .topology
            .access_switch(dst)
            .unwrap_or_default()
            .to_string();
        let mut hops = vec![(src.to_string(), link_id(src, &s_in))];
        if s_in != s_out {
            hops.push((s_in.clone(), link_id(&s_in, &s_out)));
            hops.push((s_out.clone(), link_id(&s_out, dst)));
        } else {
            hops.push((s_in.clone(), link_id(&s_in, dst)));
        }
        hops
    }

    fn path_switches(&self, src: &str, dst: &str) -> Vec<String> {
        let mut switches = vec![self
            .topology
            .access_switch(src)
            .unwrap_or_default()
            .to_string()];
        let s_out = self
            .topology
            .access_switch(dst)
            .unwrap_or_default()
            .to_string();
        if !switches.contains(&s_out) {
            switches.push(s_out);
        }
        switches
    }

    fn flows_warm(&self, src: &str, dst: &str, tag: &str) -> bool {
        self.path_switches(src, dst).iter().all(|sw| {
            self.flow_tables
                .get(sw)
                .and_then(|t| t.get(&(src.to_string(), dst.to_string(), tag.to_string())))
                .map(|e| e.expires_at > self.now)
                .unwrap_or(false)
        })
    }

    fn install_flows(&mut self, src: &str, dst: &str, tag: &str) {
        let expires_at = self.now + FLOW_IDLE_TIMEOUT;
        for sw in self.path_switches(src, dst) {
            for key in [
                (src.to_string(), dst.to_string(), tag.to_string()),
                (dst.to_string(), src.to_string(), tag.to_string()),
            ] {
                self.flow_tables
                    .get_mut(&sw)
                    .expect("switch has a flow table")
                    .insert(key.clone(), FlowEntry { expires_at });
                self.schedule(
                    expires_at,
                    EventKind::FlowExpiry {
                        switch: sw.clone(),
                        key,
                    },
                );
            }
        }
    }

    fn refresh_flows(&mut self, src: &str, dst: &str, tag: &str) {
        let expires_at = self.now + FLOW_IDLE_TIMEOUT;
        for sw in self.path_switches(src, dst) {
            for key in [
                (src.to_string(), dst.to_string(), tag.to_string()),
                (dst.to_string(), src.to_string(), tag.to_string()),
            ] {
                if let Some(entry) = self.flow_tables.get_mut(&sw).and_then(|t| t.get_mut(&key)) {
                    entry.expires_at = expires_at;
                    self.schedule(
                        expires_at,
                        EventKind::FlowExpiry {
                            switch: sw.clone(),
                            key,
                        },
                    );
                }
            }
        }
    }

    // PacketIn from the ingress switch, then a FlowMod to every switch on
    // the path.
    fn control_round_trip(&mut self, src: &str, dst: &str, tag: &str) {
        let controller = self.topology.controller().id.clone();
        let ingress = self
            .topology
            .access_switch(src)
            .unwrap_or_default()
            .to_string();
        let packet_in = Packet {
            kind: PacketKind::PacketIn,
            src: ingress.clone(),
            dst: controller.clone(),
            fields: vec![
                ("switch".into(), ingress.clone()),
                ("ping_src".into(), src.to_string()),
                ("ping_dst".into(), dst.to_string()),
            ],
            vpls_tag: Some(tag.to_string()),
            timestamp_micros: self.now,
        };
        let link = link_id(&controller, &ingress);
        self.transmit(&ingress, &link, packet_in);

        for sw in self.path_switches(src, dst) {
            let flow_mod = Packet {
                kind: PacketKind::FlowMod,
                src: controller.clone(),
                dst: sw.clone(),
                fields: vec![
                    ("switch".into(), sw.clone()),
                    ("flow_src".into(), src.to_string()),
                    ("flow_dst".into(), dst.to_string()),
                ],
                vpls_tag: Some(tag.to_string()),
                timestamp_micros: self.now,
            };
            let link = link_id(&controller, &sw);
            self.transmit(&controller, &link, flow_mod);
        }
    }

    fn send_data_packet(
        &mut self,
        kind: PacketKind,
        src: &str,
        dst: &str,
        tag: &str,
        fields: Vec<(String, String)>,
    ) {
        let packet = Packet {
            kind,
            src: src.to_string(),
            dst: dst.to_string(),
            fields,
            vpls_tag: Some(tag.to_string()),
            timestamp_micros: self.now,
        };
        for (from, link) in self.data_path(src, dst) {
            self.transmit(&from, &link, packet.clone());
        }
    }

    /// ICMP reachability probe between two hosts. Cold pings consult the
    /// controller and install flow entries; warm pings forward in the data
    /// plane even while the controller is stalled.
    pub fn ping(&mut self, src: &str, dst: &str) -> Result<PingOutcome, SimError> {
        self.require_host(src)?;
        self.require_host(dst)?;
        let src_domain = self.topology.domain_of(src).cloned();
        let dst_domain = self.topology.domain_of(dst).cloned();
        let domain = match (src_domain, dst_domain) {
            (Some(a), Some(b)) if a.id == b.id => a,
            _ => {
                self.trace(src, "ping_blocked", vec![("dst".into(), dst.to_string())]);
                return Ok(PingOutcome::Blocked);
            }
        };
        if domain.status == DomainStatus::Destroyed {
            self.trace(
                src,
                "ping_timeout",
                vec![
                    ("dst".into(), dst.to_string()),
                    ("reason".into(), "vpls_destroyed".into()),
                ],
            );
            return Ok(PingOutcome::Timeout);
        }
        let tag = domain.id.clone();
        let hop_count = self.data_path(src, dst).len() as u64;
        let warm = self.flows_warm(src, dst, &tag);
        let rtt_micros = if warm {
            self.refresh_flows(src, dst, &tag);
            2 * hop_count * LINK_LATENCY
        } else {
            if self.controller.stalled {
                self.trace(
                    src,
                    "ping_timeout",
                    vec![
                        ("dst".into(), dst.to_string()),
                        ("reason".into(), "controller_stalled".into()),
                    ],
                );
                return Ok(PingOutcome::Timeout);
            }
            self.control_round_trip(src, dst, &tag);
            self.install_flows(src, dst, &tag);
            2 * hop_count * LINK_LATENCY + 2 * LINK_LATENCY + CONTROLLER_PROC
        };
        self.send_data_packet(
            PacketKind::Icmp,
            src,
            dst,
            &tag,
            vec![("seq".into(), "1".into())],
        );
        self.send_data_packet(
            PacketKind::Icmp,
            dst,
            src,
            &tag,
            vec![("seq".into(), "1".into()), ("reply".into(), "true".into())],
        );
        let rtt = micros_to_secs(rtt_micros);
        self.trace(
            src,
            "ping_delivered",
            vec![
                ("dst".into(), dst.to_string()),
                ("rtt".into(), fmt_secs(rtt_micros)),
            ],
        );
        Ok(PingOutcome::Delivered { rtt })
    }

    /// Runs a Telnet session between two hosts in the same Active domain.
    /// Telnet is always plaintext: the transcript carries the credentials
    /// in the clear.
    pub fn telnet_session(
        &mut self,
        src: &str,
        dst: &str,
        username: &str,
        secret: &str,
    ) -> Result<SessionTranscript, SimError> {
        self.require_host(src)?;
        self.require_host(dst)?;
        let reachable = self.topology.same_vpls(src, dst).unwrap_or(false);
        if !reachable {
            return Err(SimError::NotReachable {
                src: src.to_string(),
                dst: dst.to_string(),
                reason: "hosts are not in the same active VPLS domain".into(),
            });
        }
        let tag = self.topology.domain_of(src).map(|d| d.id.clone()).unwrap();
        if !self.flows_warm(src, dst, &tag) {
            if self.controller.stalled {
                return Err(SimError::NotReachable {
                    src: src.to_string(),
                    dst: dst.to_string(),
                    reason: "controller stalled and no flow entries installed".into(),
                });
            }
            self.control_round_trip(src, dst, &tag);
            self.install_flows(src, dst, &tag);
        } else {
            self.refresh_flows(src, dst, &tag);
        }

        let banner = Packet {
            kind: PacketKind::TelnetData,
            src: dst.to_string(),
            dst: src.to_string(),
            fields: vec![("data".into(), "login:".into())],
            vpls_tag: Some(tag.clone()),
            timestamp_micros: self.now,
        };
        let login = Packet {
            kind: PacketKind::LoginAttempt,
            src: src.to_string(),
            dst: dst.to_string(),
            fields: vec![
                ("username".into(), username.to_string()),
                ("secret".into(), secret.to_string()),
            ],
            vpls_tag: Some(tag.clone()),
            timestamp_micros: self.now,
        };
        let result = Packet {
            kind: PacketKind::LoginResult,
            src: dst.to_string(),
            dst: src.to_string(),
            fields: vec![("result".into(), "ok".into())],
            vpls_tag: Some(tag.clone()),
            timestamp_micros: self.now,
        };
        let data = Packet {
            kind: PacketKind::TelnetData,
            src: src.to_string(),
            dst: dst.to_string(),
            fields: vec![("data".into(), "show running-config".into())],
            vpls_tag: Some(tag.clone()),
            timestamp_micros: self.now,
        };

        let transcript = vec![banner, login, result, data];
        for packet in &transcript {
            for (from, link) in self.data_path(&packet.src, &packet.dst) {
                self.transmit(&from, &link, packet.clone());
            }
        }
        self.trace(src, "telnet_session", vec![("dst".into(), dst.to_string())]);
        Ok(SessionTranscript {
            packets: transcript,
        })
    }

    /// Puts a tap on a link; every subsequent traversal is copied into the
    /// capture set until drained.
    pub fn tap_link(&mut self, link: &str) -> Result<TapHandle, SimError> {
        if self.topology.link(link).is_none() {
            return Err(SimError::UnknownLink(link.to_string()));
        }
        self.taps.push(Tap {
            link: link.to_string(),
            captured: Vec::new(),
        });
        Ok(TapHandle(self.taps.len() - 1))
    }

    /// Takes everything the tap captured since the last drain. The tap
    /// stays active.
    pub fn drain_tap(&mut self, handle: TapHandle) -> CaptureSet {
        let tap = &mut self.taps[handle.0];
        CaptureSet {
            link: tap.link.clone(),
            packets: std::mem::take(&mut tap.captured),
        }
    }

    /// Schedules a SYN flood from `src` against the controller's OpenFlow
    /// port: `rate` packets per virtual second for `duration` seconds.
    /// Handshakes are never completed, so the half-open backlog grows by
    /// rate minus the controller's processing capacity.
    pub fn inject_syn_flood(
        &mut self,
        src: &str,
        dst_port: u16,
        rate: u64,
        duration_secs: f64,
    ) -> Result<(), SimError> {
        if self.topology.node(src).is_none() {
            return Err(SimError::UnknownNode(src.to_string()));
        }
        let expected = self.topology.controller_config.openflow_port;
        if dst_port != expected {
            return Err(SimError::WrongTargetPort {
                expected,
                got: dst_port,
            });
        }
        if rate == 0 || duration_secs <= 0.0 {
            return Ok(());
        }
        let end = self.now + secs_to_micros(duration_secs);
        self.floods.push(FloodState {
            rate,
            end,
            acc: 0,
            src: src.to_string(),
        });
        self.trace(
            src,
            "flood_start",
            vec![
                ("dst_port".into(), dst_port.to_string()),
                ("rate".into(), rate.to_string()),
                ("duration".into(), format!("{duration_secs}")),
            ],
        );
        if !self.control_tick_scheduled {
            self.control_tick_scheduled = true;
            let at = self.now + CONTROL_TICK;
            self.schedule(at, EventKind::ControlTick);
        }
        Ok(())
    }

    /// One login attempt against the controller's management endpoint.
    /// Lockout, when configured, dominates even correct credentials.
    pub fn attempt_login(
        &mut self,
        src: &str,
        username: &str,
        secret: &str,
    ) -> Result<LoginOutcome, SimError> {
        if self.topology.node(src).is_none() {
            return Err(SimError::UnknownNode(src.to_string()));
        }
        if let Some(expiry) = self.controller.locked_out.get(src) {
            if *expiry > self.now {
                self.trace(
                    "c1",
                    "login_locked_out",
                    vec![("src".into(), src.to_string())],
                );
                return Ok(LoginOutcome::LockedOut);
            }
        }
        let matched = self
            .topology
            .controller_config
            .credentials
            .iter()
            .any(|c| c.username == username && c.secret == secret);
        if matched {
            self.trace(
                "c1",
                "login_success",
                vec![
                    ("src".into(), src.to_string()),
                    ("username".into(), username.to_string()),
                ],
            );
            return Ok(LoginOutcome::Success);
        }
        let failures = self
            .controller
            .failed_logins
            .entry(src.to_string())
            .or_insert(0);
        *failures += 1;
        let count = *failures;
        self.trace(
            "c1",
            "login_failure",
            vec![
                ("src".into(), src.to_string()),
                ("failures".into(), count.to_string()),
            ],
        );
        if let Some(lockout) = self.topology.controller_config.login_lockout {
            if count >= lockout.max_failures {
                let until = self.now + secs_to_micros(lockout.lockout_duration);
                self.controller.locked_out.insert(src.to_string(), until);
                self.controller.failed_logins.insert(src.to_string(), 0);
                self.trace(
                    "c1",
                    "login_lockout",
                    vec![
                        ("src".into(), src.to_string()),
                        ("until".into(), fmt_secs(until)),
                    ],
                );
            }
        }
        Ok(LoginOutcome::Failure)
    }

    /// Restores all VPLS domains, like the operator re-provisioning the
    /// service. Flow tables stay cold; keepalive accounting restarts.
    pub fn reconfigure_vpls(&mut self) {
        for domain in &mut self.topology.vpls_domains {
            domain.status = DomainStatus::Active;
        }
        for misses in self.keepalive_misses.values_mut() {
            *misses = 0;
        }
        self.trace("c1", "vpls_reconfigured", vec![]);
    }
}

fn link_id(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}-{b}")
    } else {
        format!("{b}-{a}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topo::default_testbed;

    fn sim() -> Sim {
        new_sim(default_testbed(), 42).unwrap()
    }

    #[test]
    fn quiescent_run_keeps_domains_active() {
        let mut s = new_sim(default_testbed(), 7).unwrap();
        s.run_until(10.0).unwrap();
        assert_eq!(s.destroyed_domains(), 0);
        assert!(!s.controller_state().stalled);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let script = |s: &mut Sim| {
            s.run_until(1.5).unwrap();
            s.ping("h1", "h4").unwrap();
            s.run_until(3.0).unwrap();
            s.ping("h2", "h5").unwrap();
            s.run_until(5.0).unwrap();
        };
        let mut a = sim();
        let mut b = sim();
        script(&mut a);
        script(&mut b);
        assert_eq!(a.trace_log().to_text(), b.trace_log().to_text());
    }

    #[test]
    fn ping_follows_vpls_policy() {
        let mut s = sim();
        assert!(s.ping("h1", "h4").unwrap().is_delivered());
        assert_eq!(s.ping("h1", "h2").unwrap(), PingOutcome::Blocked);
        assert!(matches!(
            s.ping("h1", "nope"),
            Err(SimError::UnknownNode(_))
        ));
    }

    #[test]
    fn warm_pings_skip_the_controller() {
        let mut s = sim();
        let cold = s.ping("h1", "h4").unwrap();
        let warm = s.ping("h1", "h4").unwrap();
        let (PingOutcome::Delivered { rtt: cold_rtt }, PingOutcome::Delivered { rtt: warm_rtt }) =
            (cold, warm)
        else {
            panic!("expected deliveries");
        };
        assert!(warm_rtt < cold_rtt);
        // exactly one PacketIn for the pair
        let packet_ins = s
            .trace_log()
            .entries
            .iter()
            .filter(|e| {
                e.event == "tx"
                    && e.fields
                        .iter()
                        .any(|(k, v)| k == "kind" && v == "packet_in")
            })
            .count();
        assert_eq!(packet_ins, 1);
    }

    #[test]
    fn stalled_controller_times_out_cold_pings() {
        let mut s = sim();
        s.inject_syn_flood("atk1", 6653, 500_000, 10.0).unwrap();
        s.run_until(7.0).unwrap();
        assert!(s.controller_state().stalled);
        assert_eq!(s.ping("h1", "h4").unwrap(), PingOutcome::Timeout);
    }

    #[test]
    fn warm_flows_survive_stall_until_destruction() {
        let mut s = sim();
        s.ping("h1", "h4").unwrap();
        s.inject_syn_flood("atk1", 6653, 500_000, 10.0).unwrap();
        s.run_until(7.0).unwrap();
        assert!(s.controller_state().stalled);
        assert!(s.ping("h1", "h4").unwrap().is_delivered());
        s.run_until(8.0).unwrap();
        assert_eq!(s.destroyed_domains(), 3);
        assert_eq!(s.ping("h1", "h4").unwrap(), PingOutcome::Timeout);
    }

    #[test]
    fn flood_stalls_at_expected_time_and_domains_stay_destroyed() {
        let mut s = sim();
        s.inject_syn_flood("atk1", 6653, 500_000, 10.0).unwrap();
        s.run_until(70.0).unwrap();
        assert_eq!(s.destroyed_domains(), 3);
        assert!(!s.controller_state().stalled, "backlog drains after flood");
        let stall = s
            .trace_log()
            .entries
            .iter()
            .find(|e| e.event == "stall")
            .expect("stall event");
        assert_eq!(stall.timestamp_micros, 6_510_000);
        let destroyed: Vec<u64> = s
            .trace_log()
            .entries
            .iter()
            .filter(|e| e.event == "vpls_destroyed")
            .map(|e| e.timestamp_micros)
            .collect();
        assert_eq!(destroyed, vec![8_000_000, 8_000_000, 8_000_000]);
        // still destroyed until reconfiguration
        assert_eq!(s.ping("h1", "h4").unwrap(), PingOutcome::Timeout);
        s.reconfigure_vpls();
        assert!(s.ping("h1", "h4").unwrap().is_delivered());
    }

    #[test]
    fn flood_rejects_wrong_port_and_ignores_zero_rate() {
        let mut s = sim();
        assert!(matches!(
            s.inject_syn_flood("atk1", 80, 1000, 1.0),
            Err(SimError::WrongTargetPort { expected: 6653, .. })
        ));
        s.inject_syn_flood("atk1", 6653, 0, 10.0).unwrap();
        s.run_until(12.0).unwrap();
        assert_eq!(s.controller_state().total_syns, 0);
        assert_eq!(s.destroyed_domains(), 0);
    }

    #[test]
    fn rate_limited_controller_survives_the_flood() {
        let topo = default_testbed().apply_hardening("M8").unwrap();
        let mut s = new_sim(topo, 42).unwrap();
        s.inject_syn_flood("atk1", 6653, 500_000, 10.0).unwrap();
        s.run_until(20.0).unwrap();
        assert!(!s.controller_state().stalled);
        assert_eq!(s.destroyed_domains(), 0);
        assert!(s.ping("h1", "h4").unwrap().is_delivered());
    }

    #[test]
    fn telnet_transcript_carries_plaintext_credentials() {
        let mut s = sim();
        let transcript = s.telnet_session("h1", "h7", "tenant1", "hunter2").unwrap();
        let login = transcript
            .packets
            .iter()
            .find(|p| p.kind == PacketKind::LoginAttempt)
            .expect("login packet");
        assert!(login
            .fields
            .iter()
            .any(|(k, v)| k == "username" && v == "tenant1"));
        assert!(login
            .fields
            .iter()
            .any(|(k, v)| k == "secret" && v == "hunter2"));
        // cross-domain sessions are refused before any packet flows
        assert!(matches!(
            s.telnet_session("h1", "h2", "u", "p"),
            Err(SimError::NotReachable { .. })
        ));
        // degenerate but well-formed application input still transcribes
        assert!(s.telnet_session("h1", "h4", "", "p").is_ok());
    }

    #[test]
    fn taps_capture_traversals_and_respect_encryption() {
        let mut s = sim();
        let tap = s.tap_link("c1-s1").unwrap();
        s.ping("h1", "h4").unwrap();
        let capture = s.drain_tap(tap);
        assert!(!capture.packets.is_empty());
        assert!(capture
            .packets
            .iter()
            .all(|p| p.is_plaintext() && p.kind.is_some()));
        assert!(capture
            .packets
            .iter()
            .any(|p| p.kind == Some(PacketKind::PacketIn)));

        // TLS on the control channel leaves only metadata
        let hardened = default_testbed().apply_hardening("M6").unwrap();
        let mut s2 = new_sim(hardened, 42).unwrap();
        let tap2 = s2.tap_link("c1-s1").unwrap();
        s2.ping("h1", "h4").unwrap();
        let capture2 = s2.drain_tap(tap2);
        assert!(!capture2.packets.is_empty());
        assert!(capture2
            .packets
            .iter()
            .all(|p| !p.is_plaintext() && p.kind.is_none()));

        // idle link taps stay empty
        let tap3 = s.tap_link("h2-s1").unwrap();
        assert!(s.drain_tap(tap3).packets.is_empty());
        assert!(matches!(s.tap_link("c9-s9"), Err(SimError::UnknownLink(_))));
    }

    #[test]
    fn login_lockout_dominates_correct_credentials() {
        let topo = default_testbed().apply_hardening("M13").unwrap();
        let good_secret = topo.controller_config.credentials[0].secret.clone();
        let mut s = new_sim(topo, 1).unwrap();
        for _ in 0..5 {
            assert_eq!(
                s.attempt_login("atk1", "admin", "wrong").unwrap(),
                LoginOutcome::Failure
            );
        }
        assert_eq!(
            s.attempt_login("atk1", "admin", "wrong").unwrap(),
            LoginOutcome::LockedOut
        );
        assert_eq!(
            s.attempt_login("atk1", "admin", &good_secret).unwrap(),
            LoginOutcome::LockedOut
        );
    }

    #[test]
    fn default_credentials_succeed_on_unhardened_testbed() {
        let mut s = sim();
        assert_eq!(
            s.attempt_login("atk1", "admin", "admin").unwrap(),
            LoginOutcome::Success
        );
    }

    #[test]
    fn run_until_rejects_regression_and_empty_slice_is_empty() {
        let mut s = sim();
        s.run_until(5.0).unwrap();
        assert!(matches!(
            s.run_until(4.0),
            Err(SimError::TimeRegression { .. })
        ));
        let slice = s.run_until(5.0).unwrap();
        assert!(slice.is_empty());
    }

    #[test]
    fn flow_expiry_appears_in_trace() {
        let mut s = sim();
        s.ping("h1", "h4").unwrap();
        s.run_until(15.0).unwrap();
        assert!(s
            .trace_log()
            .entries
            .iter()
            .any(|e| e.event == "flow_expired"));
        // after expiry the next ping is cold again
        s.ping("h1", "h4").unwrap();
        let packet_ins = s
            .trace_log()
            .entries
            .iter()
            .filter(|e| {
                e.event == "tx"
                    && e.fields
                        .iter()
                        .any(|(k, v)| k == "kind" && v == "packet_in")
            })
            .count();
        assert_eq!(packet_ins, 2);
    }
}
