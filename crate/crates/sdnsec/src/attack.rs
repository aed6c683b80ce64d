//! Executable attack scenarios against a simulated testbed: credential
//! brute force, link sniffing, and a SYN flood, each producing quantified
//! impact metrics and a verdict against the scored threat category it
//! targets.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvss::Severity;
use crate::kb::Catalog;
use crate::sim::{LoginOutcome, Sim, SimError, TraceEntry};
use crate::topo::NodeKind;

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("scenario document invalid: {0}")]
    Parse(String),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("topology has no attacker node")]
    MissingAttacker,
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("attempt rate must be positive, got {0}")]
    InvalidRate(f64),
    #[error("no attack scenario mapped for ranks {0:?}")]
    UnmappedRanks(Vec<u32>),
    #[error("unknown threat category {0}")]
    UnknownCategory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackKind {
    BruteForce,
    Mitm,
    DosSynFlood,
}

impl AttackKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackKind::BruteForce => "brute-force",
            AttackKind::Mitm => "mitm",
            AttackKind::DosSynFlood => "dos-syn-flood",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceParams {
    /// (username, password) candidates in attempt order.
    pub dictionary: Vec<(String, String)>,
    /// Attempts per virtual second.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitmParams {
    pub tapped_links: Vec<String>,
    /// Observation window in virtual seconds.
    pub window: f64,
    pub telnet_src: String,
    pub telnet_dst: String,
    pub telnet_username: String,
    pub telnet_secret: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosParams {
    /// SYN packets per virtual second.
    pub rate: u64,
    /// Flood duration in virtual seconds.
    pub duration: f64,
    /// Target transport port; must be the controller's OpenFlow port.
    pub port: u16,
    /// Seconds of probing after the flood to observe recovery.
    pub recovery_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScenarioParams {
    BruteForce(BruteForceParams),
    Mitm(MitmParams),
    DosSynFlood(DosParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub id: String,
    pub kind: AttackKind,
    /// The threat category this scenario validates.
    pub target_tc: String,
    pub parameters: ScenarioParams,
}

/// One metric value in an outcome map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Bool(bool),
    Count(u64),
    Seconds(f64),
    Text(String),
}

impl MetricValue {
    pub fn as_count(&self) -> Option<u64> {
        match self {
            MetricValue::Count(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_seconds(&self) -> Option<f64> {
        match self {
            MetricValue::Seconds(s) => Some(*s),
            MetricValue::Count(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            MetricValue::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub scenario_id: String,
    pub kind: AttackKind,
    pub target_tc: String,
    pub succeeded: bool,
    pub metrics: BTreeMap<String, MetricValue>,
    /// Trace slice produced while the scenario ran.
    pub trace: Vec<TraceEntry>,
}

impl AttackOutcome {
    pub fn count(&self, key: &str) -> u64 {
        self.metrics
            .get(key)
            .and_then(|m| m.as_count())
            .unwrap_or(0)
    }

    pub fn seconds(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(|m| m.as_seconds())
    }

    pub fn flag(&self, key: &str) -> bool {
        self.metrics
            .get(key)
            .and_then(|m| m.as_bool())
            .unwrap_or(false)
    }
}

/// Observed impact classes, ordered from harmless to controller takeover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObservedImpact {
    None,
    Degraded,
    ServiceLoss,
    FullCompromise,
}

impl ObservedImpact {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObservedImpact::None => "none",
            ObservedImpact::Degraded => "degraded",
            ObservedImpact::ServiceLoss => "service-loss",
            ObservedImpact::FullCompromise => "full-compromise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tc_id: String,
    pub expectation: Severity,
    pub observed_impact: ObservedImpact,
    pub consistent: bool,
}

// ---------------------------------------------------------------------------
// Scenario loading
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    id: String,
    kind: String,
    target_tc: String,
    parameters: toml::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBruteForce {
    dictionary: String,
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDos {
    rate: u64,
    duration: f64,
    port: u16,
    recovery_window: f64,
}

fn parse_wordlist(content: &str) -> Vec<(String, String)> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            l.split_once(':')
                .map(|(u, p)| (u.to_string(), p.to_string()))
        })
        .collect()
}

/// Parses a scenario document. `resolve` maps a dictionary reference from
/// the document to its content (relative file path for on-disk scenarios,
/// embedded lookup for built-ins).
pub fn load_scenario(
    source: &str,
    resolve: &dyn Fn(&str) -> Result<String, String>,
) -> Result<AttackScenario, AttackError> {
    let raw: RawScenario =
        toml::from_str(source).map_err(|e| AttackError::Parse(e.to_string()))?;
    if raw.schema_version != SCENARIO_SCHEMA_VERSION {
        return Err(AttackError::Parse(format!(
            "expected schema_version {SCENARIO_SCHEMA_VERSION}, found {}",
            raw.schema_version
        )));
    }
    let parameters = match raw.kind.as_str() {
        "BruteForce" => {
            let p: RawBruteForce = raw
                .parameters
                .try_into()
                .map_err(|e: toml::de::Error| AttackError::Parse(e.to_string()))?;
            let content = resolve(&p.dictionary).map_err(AttackError::Parse)?;
            ScenarioParams::BruteForce(BruteForceParams {
                dictionary: parse_wordlist(&content),
                rate: p.rate,
            })
        }
        "Mitm" => {
            let p: MitmParams = raw
                .parameters
                .try_into()
                .map_err(|e: toml::de::Error| AttackError::Parse(e.to_string()))?;
            ScenarioParams::Mitm(p)
        }
        "DosSynFlood" => {
            let p: RawDos = raw
                .parameters
                .try_into()
                .map_err(|e: toml::de::Error| AttackError::Parse(e.to_string()))?;
            ScenarioParams::DosSynFlood(DosParams {
                rate: p.rate,
                duration: p.duration,
                port: p.port,
                recovery_window: p.recovery_window,
            })
        }
        other => return Err(AttackError::Parse(format!("unknown scenario kind {other}"))),
    };
    let kind = match &parameters {
        ScenarioParams::BruteForce(_) => AttackKind::BruteForce,
        ScenarioParams::Mitm(_) => AttackKind::Mitm,
        ScenarioParams::DosSynFlood(_) => AttackKind::DosSynFlood,
    };
    Ok(AttackScenario {
        id: raw.id,
        kind,
        target_tc: raw.target_tc,
        parameters,
    })
}

/// Loads a scenario file; dictionary paths resolve relative to it.
pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<AttackScenario, AttackError> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|source| AttackError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new(".")).to_owned();
    load_scenario(&source, &move |rel: &str| {
        std::fs::read_to_string(dir.join(rel)).map_err(|e| format!("cannot read {rel}: {e}"))
    })
}

const SCENARIO_BRUTE_FAST: &str = include_str!("../data/scenarios/brute_force_fast.toml");
const SCENARIO_BRUTE_SLOW: &str = include_str!("../data/scenarios/brute_force_slow.toml");
const SCENARIO_MITM: &str = include_str!("../data/scenarios/mitm_default.toml");
const SCENARIO_DOS: &str = include_str!("../data/scenarios/dos_syn_flood.toml");
const WORDLIST_FAST: &str = include_str!("../data/wordlists/fast.txt");
const WORDLIST_SLOW: &str = include_str!("../data/wordlists/slow.txt");

fn resolve_builtin(reference: &str) -> Result<String, String> {
    match reference {
        "../wordlists/fast.txt" => Ok(WORDLIST_FAST.to_string()),
        "../wordlists/slow.txt" => Ok(WORDLIST_SLOW.to_string()),
        other => Err(format!("unknown built-in dictionary {other}")),
    }
}

/// A shipped scenario by name: `brute-force` (alias `brute-force-fast`),
/// `brute-force-slow`, `mitm`, `dos`.
pub fn builtin_scenario(name: &str) -> Result<AttackScenario, AttackError> {
    let source = match name {
        "brute-force" | "brute-force-fast" => SCENARIO_BRUTE_FAST,
        "brute-force-slow" => SCENARIO_BRUTE_SLOW,
        "mitm" | "mitm-sniffing" => SCENARIO_MITM,
        "dos" | "dos-syn-flood" => SCENARIO_DOS,
        other => return Err(AttackError::UnknownScenario(other.to_string())),
    };
    load_scenario(source, &resolve_builtin)
}

// ---------------------------------------------------------------------------
// Executors
// ---------------------------------------------------------------------------

/// Dispatches a scenario to its executor.
pub fn run_scenario(
    sim: &mut Sim,
    scenario: &AttackScenario,
) -> Result<AttackOutcome, AttackError> {
    match &scenario.parameters {
        ScenarioParams::BruteForce(p) => run_brute_force(sim, scenario, p),
        ScenarioParams::Mitm(p) => run_mitm(sim, scenario, p),
        ScenarioParams::DosSynFlood(p) => run_dos(sim, scenario, p),
    }
}

fn attacker_id(sim: &Sim) -> Result<String, AttackError> {
    sim.topology()
        .nodes
        .iter()
        .find(|n| n.kind == NodeKind::Attacker)
        .map(|n| n.id.clone())
        .ok_or(AttackError::MissingAttacker)
}

fn outcome_base(scenario: &AttackScenario) -> AttackOutcome {
    AttackOutcome {
        scenario_id: scenario.id.clone(),
        kind: scenario.kind,
        target_tc: scenario.target_tc.clone(),
        succeeded: false,
        metrics: BTreeMap::new(),
        trace: Vec::new(),
    }
}

/// Walks the dictionary against the controller login at the configured
/// attempt rate until a hit or exhaustion. Lockout responses consume
/// attempts without revealing anything.
pub fn run_brute_force(
    sim: &mut Sim,
    scenario: &AttackScenario,
    params: &BruteForceParams,
) -> Result<AttackOutcome, AttackError> {
    let attacker = attacker_id(sim)?;
    if params.dictionary.is_empty() {
        return Err(AttackError::EmptyDictionary);
    }
    if params.rate <= 0.0 {
        return Err(AttackError::InvalidRate(params.rate));
    }
    let trace_start = sim.trace_log().entries.len();
    let t0 = sim.now_secs();

    let mut outcome = outcome_base(scenario);
    let mut attempts = 0u64;
    let mut found: Option<(u64, String, String)> = None;
    let mut saw_lockout = false;
    for (index, (username, secret)) in params.dictionary.iter().enumerate() {
        let position = index as u64 + 1;
        sim.run_until(t0 + position as f64 / params.rate)?;
        attempts = position;
        match sim.attempt_login(&attacker, username, secret)? {
            LoginOutcome::Success => {
                found = Some((position, username.clone(), secret.clone()));
                break;
            }
            LoginOutcome::LockedOut => saw_lockout = true,
            LoginOutcome::Failure => {}
        }
    }

    outcome
        .metrics
        .insert("attempts".into(), MetricValue::Count(attempts));
    outcome
        .metrics
        .insert("lockout_engaged".into(), MetricValue::Bool(saw_lockout));
    if let Some((position, username, secret)) = found {
        outcome.succeeded = true;
        outcome.metrics.insert(
            "time_to_crack".into(),
            MetricValue::Seconds(position as f64 / params.rate),
        );
        outcome.metrics.insert(
            "credential_found".into(),
            MetricValue::Text(format!("{username}:{secret}")),
        );
    }
    outcome.trace = sim.trace_log().entries[trace_start..].to_vec();
    Ok(outcome)
}

// Fixed background traffic: three pings per domain covering every host,
// one Telnet session, plus the controller keepalives that run anyway. Only
// the timing jitters with the seed, so exposure counts stay stable.
fn mitm_background_script(sim: &mut Sim, params: &MitmParams) -> Result<(), SimError> {
    let pings = [
        ("h1", "h4"),
        ("h4", "h7"),
        ("h7", "h1"),
        ("h2", "h5"),
        ("h5", "h8"),
        ("h8", "h2"),
        ("h3", "h6"),
        ("h6", "h9"),
        ("h9", "h3"),
    ];
    let mut t = 1.2;
    for (src, dst) in pings {
        let jitter = sim.next_jitter(50_000) as f64 / 1e6;
        sim.run_until(t + jitter)?;
        sim.ping(src, dst)?;
        t += 0.3;
    }
    let jitter = sim.next_jitter(50_000) as f64 / 1e6;
    sim.run_until(4.0 + jitter)?;
    sim.telnet_session(
        &params.telnet_src,
        &params.telnet_dst,
        &params.telnet_username,
        &params.telnet_secret,
    )?;
    Ok(())
}

/// Taps the configured links, drives the background script for the
/// observation window, then analyzes the captures for exposed node
/// identities, services, and credentials.
pub fn run_mitm(
    sim: &mut Sim,
    scenario: &AttackScenario,
    params: &MitmParams,
) -> Result<AttackOutcome, AttackError> {
    let trace_start = sim.trace_log().entries.len();
    let mut taps = Vec::new();
    for link in &params.tapped_links {
        taps.push(sim.tap_link(link)?);
    }
    mitm_background_script(sim, params)?;
    sim.run_until(params.window)?;

    let node_ids: Vec<String> = sim.topology().nodes.iter().map(|n| n.id.clone()).collect();
    let control_links: Vec<String> = sim.topology().control_links().map(|l| l.id()).collect();

    let mut exposed_nodes: Vec<String> = Vec::new();
    let mut services: Vec<&'static str> = Vec::new();
    let mut credentials: Vec<String> = Vec::new();
    let mut plaintext_packets = 0u64;
    let mut control_plaintext = 0u64;
    let mut total_packets = 0u64;

    for tap in taps {
        let capture = sim.drain_tap(tap);
        for packet in &capture.packets {
            total_packets += 1;
            let Some(fields) = &packet.fields else {
                continue;
            };
            plaintext_packets += 1;
            if control_links.contains(&packet.link) {
                control_plaintext += 1;
            }
            let kind = packet.kind.expect("plaintext packets keep their kind");
            if !services.contains(&kind.service()) {
                services.push(kind.service());
            }
            let mut note_node = |candidate: &str| {
                if node_ids.iter().any(|n| n == candidate)
                    && !exposed_nodes.iter().any(|n| n == candidate)
                {
                    exposed_nodes.push(candidate.to_string());
                }
            };
            note_node(&packet.src);
            note_node(&packet.dst);
            for (_, value) in fields {
                note_node(value);
            }
            if kind == crate::sim::PacketKind::LoginAttempt {
                let username = fields
                    .iter()
                    .find(|(k, _)| k == "username")
                    .map(|(_, v)| v.clone());
                let secret = fields
                    .iter()
                    .find(|(k, _)| k == "secret")
                    .map(|(_, v)| v.clone());
                if let (Some(u), Some(s)) = (username, secret) {
                    let pair = format!("{u}:{s}");
                    if !credentials.contains(&pair) {
                        credentials.push(pair);
                    }
                }
            }
        }
    }

    let mut outcome = outcome_base(scenario);
    outcome.succeeded = !credentials.is_empty() || !exposed_nodes.is_empty();
    outcome.metrics.insert(
        "nodes_exposed".into(),
        MetricValue::Count(exposed_nodes.len() as u64),
    );
    outcome.metrics.insert(
        "services_exposed".into(),
        MetricValue::Count(services.len() as u64),
    );
    outcome.metrics.insert(
        "credentials_exposed".into(),
        MetricValue::Count(credentials.len() as u64),
    );
    outcome.metrics.insert(
        "plaintext_packets".into(),
        MetricValue::Count(plaintext_packets),
    );
    outcome.metrics.insert(
        "control_plaintext_packets".into(),
        MetricValue::Count(control_plaintext),
    );
    outcome
        .metrics
        .insert("captured_packets".into(), MetricValue::Count(total_packets));
    outcome.trace = sim.trace_log().entries[trace_start..].to_vec();
    Ok(outcome)
}

/// Floods the controller, probing one host pair per domain every virtual
/// second; the first failed probe marks the disruption. After the flood a
/// recovery window checks whether traffic comes back on its own.
pub fn run_dos(
    sim: &mut Sim,
    scenario: &AttackScenario,
    params: &DosParams,
) -> Result<AttackOutcome, AttackError> {
    let attacker = attacker_id(sim)?;
    let trace_start = sim.trace_log().entries.len();

    let probe_pairs: Vec<(String, String)> = sim
        .topology()
        .vpls_domains
        .iter()
        .filter(|d| d.members.len() >= 2)
        .map(|d| (d.members[0].clone(), d.members[1].clone()))
        .collect();

    sim.inject_syn_flood(&attacker, params.port, params.rate, params.duration)?;

    let t0 = sim.now_secs();
    let mut time_to_disruption: Option<f64> = None;
    let flood_secs = params.duration.ceil() as u64;
    for second in 1..=flood_secs {
        sim.run_until(t0 + second as f64)?;
        for (a, b) in &probe_pairs {
            let delivered = sim.ping(a, b)?.is_delivered();
            if !delivered && time_to_disruption.is_none() {
                time_to_disruption = Some(sim.now_secs() - t0);
            }
        }
    }

    let mut self_recovered = false;
    let recovery_secs = params.recovery_window.ceil() as u64;
    for second in 1..=recovery_secs {
        sim.run_until(t0 + params.duration + second as f64)?;
        for (a, b) in &probe_pairs {
            if sim.ping(a, b)?.is_delivered() && time_to_disruption.is_some() {
                self_recovered = true;
            }
        }
    }

    let mut outcome = outcome_base(scenario);
    outcome.succeeded = time_to_disruption.is_some();
    outcome.metrics.insert(
        "syn_sent".into(),
        MetricValue::Count((params.rate as f64 * params.duration).round() as u64),
    );
    outcome.metrics.insert(
        "syn_accepted".into(),
        MetricValue::Count(sim.controller_state().total_syns),
    );
    if let Some(t) = time_to_disruption {
        outcome
            .metrics
            .insert("time_to_disruption".into(), MetricValue::Seconds(t));
    }
    outcome.metrics.insert(
        "domains_destroyed".into(),
        MetricValue::Count(sim.destroyed_domains() as u64),
    );
    outcome
        .metrics
        .insert("self_recovered".into(), MetricValue::Bool(self_recovered));
    outcome.trace = sim.trace_log().entries[trace_start..].to_vec();
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// Scenario selection and verdicts
// ---------------------------------------------------------------------------

/// Shipped rank-to-scenario mapping: rank 1 credential brute force, rank 2
/// interception, rank 3 SYN flood. Ranks beyond 3 have no modeled scenario.
pub fn select_scenarios(k: u32) -> Result<Vec<AttackScenario>, AttackError> {
    let mapped = [(1u32, "brute-force-fast"), (2, "mitm"), (3, "dos")];
    if k > mapped.len() as u32 {
        let unmapped: Vec<u32> = (mapped.len() as u32 + 1..=k).collect();
        return Err(AttackError::UnmappedRanks(unmapped));
    }
    mapped
        .iter()
        .take(k as usize)
        .map(|(_, name)| builtin_scenario(name))
        .collect()
}

/// Classifies an outcome and checks it against the target category's
/// severity expectation. Critical and High expect credential exposure or
/// worse; Medium expects at least degradation; lower severities accept
/// anything.
pub fn verdict(outcome: &AttackOutcome, catalog: &Catalog) -> Result<Verdict, AttackError> {
    let category = catalog
        .category(&outcome.target_tc)
        .ok_or_else(|| AttackError::UnknownCategory(outcome.target_tc.clone()))?;

    let observed = match outcome.kind {
        AttackKind::BruteForce => {
            if outcome.succeeded {
                ObservedImpact::FullCompromise
            } else {
                ObservedImpact::None
            }
        }
        AttackKind::Mitm => {
            if outcome.count("credentials_exposed") > 0 || outcome.count("nodes_exposed") > 0 {
                ObservedImpact::Degraded
            } else {
                ObservedImpact::None
            }
        }
        AttackKind::DosSynFlood => {
            if outcome.count("domains_destroyed") > 0
                || outcome.seconds("time_to_disruption").is_some()
            {
                ObservedImpact::ServiceLoss
            } else {
                ObservedImpact::None
            }
        }
    };

    let expectation = category.severity;
    let consistent = match expectation {
        Severity::Critical | Severity::High => {
            observed >= ObservedImpact::ServiceLoss
                || (observed == ObservedImpact::Degraded
                    && outcome.count("credentials_exposed") > 0)
        }
        Severity::Medium => observed >= ObservedImpact::Degraded,
        Severity::Low | Severity::None => true,
    };

    Ok(Verdict {
        tc_id: category.id.clone(),
        expectation,
        observed_impact: observed,
        consistent,
    })
}
