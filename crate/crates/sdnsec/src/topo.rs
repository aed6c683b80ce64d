//! The SDN architecture under evaluation: nodes, links, VPLS isolation
//! domains, and controller hardening toggles, plus the built-in default
//! testbed (one controller, three switches, nine hosts and an attacker
//! node, with three VPLS domains spanning the switches).
//!
//! Topology values are immutable: every operation returns a new value.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::Surface;

pub const TOPOLOGY_SCHEMA_VERSION: u32 = 1;

/// Name accepted by loaders in place of a file path.
pub const BUILTIN_TOPOLOGY_NAME: &str = "builtin";

// Replacement secret installed by the credential-policy mitigations.
const HARDENED_SECRET: &str = "vK9#xT2!qRw8zLp4";

#[derive(Debug, Error)]
pub enum TopoError {
    #[error("cannot read topology {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("topology document invalid: {0}")]
    Parse(String),
    #[error("invalid topology: {0}")]
    Invalid(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {0} is not a host")]
    NotAHost(String),
    #[error("unknown mitigation {0}")]
    UnknownMitigation(String),
    #[error("mitigation {id} has no preventive control; use the central solution: {alternative}")]
    InapplicableMitigation { id: String, alternative: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Controller,
    Switch,
    Host,
    Attacker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
}

impl Node {
    /// The SDN surface a node occupies follows from its kind.
    pub fn surface(&self) -> Surface {
        match self.kind {
            NodeKind::Controller => Surface::ControlLayer,
            NodeKind::Switch | NodeKind::Host | NodeKind::Attacker => Surface::DataLayer,
        }
    }
}

/// An unordered node pair. Control-channel links (controller to switch)
/// carry the encryption toggle used by the TLS mitigation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub control: bool,
    #[serde(default)]
    pub encrypted: bool,
}

impl Link {
    pub fn new(a: &str, b: &str, control: bool) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Link {
            a: a.to_string(),
            b: b.to_string(),
            control,
            encrypted: false,
        }
    }

    pub fn id(&self) -> String {
        format!("{}-{}", self.a, self.b)
    }

    pub fn connects(&self, node: &str) -> bool {
        self.a == node || self.b == node
    }

    pub fn other_end(&self, node: &str) -> Option<&str> {
        if self.a == node {
            Some(&self.b)
        } else if self.b == node {
            Some(&self.a)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainStatus {
    Active,
    Destroyed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VplsDomain {
    pub id: String,
    pub members: Vec<String>,
    pub status: DomainStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub username: String,
    pub secret: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoginLockout {
    pub max_failures: u32,
    /// Virtual seconds a source stays locked out.
    pub lockout_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub credentials: Vec<Credential>,
    pub default_credentials: bool,
    pub openflow_port: u16,
    pub channel_tls: bool,
    pub login_lockout: Option<LoginLockout>,
    /// Control packets the controller can retire per virtual second.
    pub packet_capacity: u64,
    /// Half-open handshakes tolerated before the control plane stalls.
    pub syn_backlog_limit: u64,
    /// Cap on attacker-sourced control-port packets per virtual second.
    pub ingress_rate_limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub name: String,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub vpls_domains: Vec<VplsDomain>,
    pub controller_config: ControllerConfig,
    /// Every mitigation applied to this topology, including ones recorded
    /// for reporting only.
    #[serde(default)]
    pub applied_mitigations: Vec<String>,
}

/// The built-in testbed: one controller over three switches with three
/// hosts each, one attacker node, and three VPLS domains that each take one
/// host per switch. Ships unhardened: plaintext control channel, default
/// credentials, no lockout, no rate limiting.
pub fn default_testbed() -> Topology {
    let mut nodes = vec![Node {
        id: "c1".into(),
        kind: NodeKind::Controller,
    }];
    for s in 1..=3 {
        nodes.push(Node {
            id: format!("s{s}"),
            kind: NodeKind::Switch,
        });
    }
    for h in 1..=9 {
        nodes.push(Node {
            id: format!("h{h}"),
            kind: NodeKind::Host,
        });
    }
    nodes.push(Node {
        id: "atk1".into(),
        kind: NodeKind::Attacker,
    });

    let mut links = vec![
        Link::new("c1", "s1", true),
        Link::new("c1", "s2", true),
        Link::new("c1", "s3", true),
        Link::new("s1", "s2", false),
        Link::new("s2", "s3", false),
        Link::new("s1", "s3", false),
        Link::new("atk1", "s1", false),
    ];
    // h1-h3 on s1, h4-h6 on s2, h7-h9 on s3
    for h in 1..=9u32 {
        let switch = format!("s{}", (h - 1) / 3 + 1);
        links.push(Link::new(&format!("h{h}"), &switch, false));
    }

    // one host per switch in each domain, so intra-domain traffic crosses
    // switches and exercises the control plane
    let vpls_domains = vec![
        VplsDomain {
            id: "d1".into(),
            members: vec!["h1".into(), "h4".into(), "h7".into()],
            status: DomainStatus::Active,
        },
        VplsDomain {
            id: "d2".into(),
            members: vec!["h2".into(), "h5".into(), "h8".into()],
            status: DomainStatus::Active,
        },
        VplsDomain {
            id: "d3".into(),
            members: vec!["h3".into(), "h6".into(), "h9".into()],
            status: DomainStatus::Active,
        },
    ];

    Topology {
        name: "default-testbed".into(),
        nodes,
        links,
        vpls_domains,
        controller_config: ControllerConfig {
            credentials: vec![Credential {
                username: "admin".into(),
                secret: "admin".into(),
            }],
            default_credentials: true,
            openflow_port: 6653,
            channel_tls: false,
            login_lockout: None,
            packet_capacity: 490_000,
            syn_backlog_limit: 65_000,
            ingress_rate_limit: None,
        },
        applied_mitigations: Vec::new(),
    }
}

impl Topology {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn controller(&self) -> &Node {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Controller)
            .expect("validated topology has a controller")
    }

    pub fn attacker(&self) -> Option<&Node> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Attacker)
    }

    pub fn hosts(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Host)
    }

    pub fn switches(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Switch)
    }

    pub fn link(&self, id: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.id() == id)
    }

    pub fn control_links(&self) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(|l| l.control)
    }

    /// The switch a host or attacker node hangs off.
    pub fn access_switch(&self, node: &str) -> Option<&str> {
        self.links
            .iter()
            .filter(|l| l.connects(node))
            .filter_map(|l| l.other_end(node))
            .find(|other| {
                self.node(other)
                    .map(|n| n.kind == NodeKind::Switch)
                    .unwrap_or(false)
            })
    }

    pub fn domain_of(&self, host: &str) -> Option<&VplsDomain> {
        self.vpls_domains
            .iter()
            .find(|d| d.members.iter().any(|m| m == host))
    }

    /// True iff both hosts belong to one Active domain.
    pub fn same_vpls(&self, a: &str, b: &str) -> Result<bool, TopoError> {
        for id in [a, b] {
            match self.node(id) {
                None => return Err(TopoError::UnknownNode(id.to_string())),
                Some(n) if n.kind != NodeKind::Host => {
                    return Err(TopoError::NotAHost(id.to_string()))
                }
                _ => {}
            }
        }
        Ok(self.vpls_domains.iter().any(|d| {
            d.status == DomainStatus::Active
                && d.members.iter().any(|m| m == a)
                && d.members.iter().any(|m| m == b)
        }))
    }

    /// Restores every VPLS domain to Active with its configured membership.
    /// Idempotent.
    pub fn reconfigure_vpls(&self) -> Topology {
        let mut restored = self.clone();
        for domain in &mut restored.vpls_domains {
            domain.status = DomainStatus::Active;
        }
        restored
    }

    /// Applies one mitigation and returns the hardened copy. Mitigations
    /// with a simulated effect flip controller/link toggles; the rest are
    /// recorded for reporting only. The two mitigations without preventive
    /// controls are rejected with their covering central solution.
    pub fn apply_hardening(&self, mitigation: &str) -> Result<Topology, TopoError> {
        let mut hardened = self.clone();
        match mitigation {
            "M2" | "M4" | "M13" => {
                // credential policy: drop default credentials, lock out
                // repeated failures
                hardened.controller_config.credentials = vec![Credential {
                    username: "admin".into(),
                    secret: HARDENED_SECRET.into(),
                }];
                hardened.controller_config.default_credentials = false;
                hardened.controller_config.login_lockout = Some(LoginLockout {
                    max_failures: 5,
                    lockout_duration: 300.0,
                });
            }
            "M6" => {
                hardened.controller_config.channel_tls = true;
                for link in &mut hardened.links {
                    if link.control {
                        link.encrypted = true;
                    }
                }
            }
            "M8" => {
                hardened.controller_config.ingress_rate_limit = Some(1_000);
            }
            "M5" => {
                return Err(TopoError::InapplicableMitigation {
                    id: "M5".into(),
                    alternative: "CS2 ledger-based control-plane recording".into(),
                })
            }
            "M7" => {
                return Err(TopoError::InapplicableMitigation {
                    id: "M7".into(),
                    alternative: "CS3 distributed monitoring and remediation framework".into(),
                })
            }
            other => {
                let known = other.strip_prefix('M').is_some_and(|n| {
                    n.parse::<u32>().map(|n| (1..=18).contains(&n)).unwrap_or(false)
                });
                if !known {
                    return Err(TopoError::UnknownMitigation(other.to_string()));
                }
                // recorded below, no simulated effect
            }
        }
        if !hardened.applied_mitigations.iter().any(|m| m == mitigation) {
            hardened.applied_mitigations.push(mitigation.to_string());
        }
        Ok(hardened)
    }

    /// Structural validation: single controller, connected link graph,
    /// hosts in at most one domain, sane controller parameters.
    pub fn validate(&self) -> Result<(), TopoError> {
        let controllers = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Controller)
            .count();
        if controllers != 1 {
            return Err(TopoError::Invalid(format!(
                "expected exactly one controller, found {controllers}"
            )));
        }
        if self.controller_config.packet_capacity == 0 {
            return Err(TopoError::Invalid("packet_capacity must be positive".into()));
        }
        for link in &self.links {
            for end in [&link.a, &link.b] {
                if self.node(end).is_none() {
                    return Err(TopoError::Invalid(format!(
                        "link {} references unknown node {end}",
                        link.id()
                    )));
                }
            }
        }
        for domain in &self.vpls_domains {
            for member in &domain.members {
                match self.node(member) {
                    Some(n) if n.kind == NodeKind::Host => {}
                    _ => {
                        return Err(TopoError::Invalid(format!(
                            "domain {} member {member} is not a host",
                            domain.id
                        )))
                    }
                }
            }
        }
        for host in self.hosts() {
            let memberships = self
                .vpls_domains
                .iter()
                .filter(|d| d.members.iter().any(|m| m == &host.id))
                .count();
            if memberships > 1 {
                return Err(TopoError::Invalid(format!(
                    "host {} belongs to {memberships} domains",
                    host.id
                )));
            }
        }

        // connectivity over the undirected link graph
        if let Some(start) = self.nodes.first() {
            let mut reached = vec![start.id.clone()];
            let mut frontier = vec![start.id.clone()];
            while let Some(node) = frontier.pop() {
                for link in self.links.iter().filter(|l| l.connects(&node)) {
                    let other = link.other_end(&node).unwrap().to_string();
                    if !reached.contains(&other) {
                        reached.push(other.clone());
                        frontier.push(other);
                    }
                }
            }
            if reached.len() != self.nodes.len() {
                return Err(TopoError::Invalid(format!(
                    "link graph is disconnected: reached {} of {} nodes",
                    reached.len(),
                    self.nodes.len()
                )));
            }
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        let doc = TopologyDoc {
            schema_version: TOPOLOGY_SCHEMA_VERSION,
            topology: self.clone(),
        };
        toml::to_string_pretty(&doc).expect("topology serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TopologyDoc {
    schema_version: u32,
    #[serde(flatten)]
    topology: Topology,
}

/// Parses a topology document and validates it structurally.
pub fn load_topology(source: &str) -> Result<Topology, TopoError> {
    let doc: TopologyDoc = toml::from_str(source).map_err(|e| TopoError::Parse(e.to_string()))?;
    if doc.schema_version != TOPOLOGY_SCHEMA_VERSION {
        return Err(TopoError::Parse(format!(
            "expected schema_version {TOPOLOGY_SCHEMA_VERSION}, found {}",
            doc.schema_version
        )));
    }
    doc.topology.validate()?;
    Ok(doc.topology)
}

/// Loads a topology from a path, or the built-in testbed for the name
/// `builtin`.
pub fn load_topology_source(spec: &str) -> Result<Topology, TopoError> {
    if spec == BUILTIN_TOPOLOGY_NAME {
        return Ok(default_testbed());
    }
    let path = Path::new(spec);
    let source = std::fs::read_to_string(path).map_err(|source| TopoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_topology(&source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_testbed_shape() {
        let t = default_testbed();
        assert_eq!(
            t.nodes.iter().filter(|n| n.kind == NodeKind::Controller).count(),
            1
        );
        assert_eq!(t.switches().count(), 3);
        assert_eq!(t.hosts().count(), 9);
        assert!(t.attacker().is_some());
        assert_eq!(t.vpls_domains.len(), 3);
        assert!(t
            .vpls_domains
            .iter()
            .all(|d| d.status == DomainStatus::Active && d.members.len() == 3));
        assert!(!t.controller_config.channel_tls);
        assert!(t.controller_config.default_credentials);
        assert!(t.controller_config.login_lockout.is_none());
        assert!(t.controller_config.ingress_rate_limit.is_none());
        assert_eq!(t.controller_config.openflow_port, 6653);
    }

    #[test]
    fn default_testbed_is_deterministic_and_valid() {
        assert_eq!(default_testbed(), default_testbed());
        default_testbed().validate().expect("default testbed valid");
    }

    #[test]
    fn hardening_returns_a_copy() {
        let base = default_testbed();
        let hardened = base.apply_hardening("M6").unwrap();
        assert!(hardened.controller_config.channel_tls);
        assert!(hardened.control_links().all(|l| l.encrypted));
        assert_eq!(hardened.applied_mitigations, vec!["M6"]);
        // original untouched
        assert!(!base.controller_config.channel_tls);
        assert!(base.control_links().all(|l| !l.encrypted));
    }

    #[test]
    fn credential_hardening_clears_defaults_and_enables_lockout() {
        let hardened = default_testbed().apply_hardening("M13").unwrap();
        assert!(!hardened.controller_config.default_credentials);
        assert!(hardened.controller_config.login_lockout.is_some());
        assert!(hardened
            .controller_config
            .credentials
            .iter()
            .all(|c| c.secret != "admin"));
    }

    #[test]
    fn inapplicable_mitigations_point_to_central_solutions() {
        let err = default_testbed().apply_hardening("M5").unwrap_err();
        match err {
            TopoError::InapplicableMitigation { id, alternative } => {
                assert_eq!(id, "M5");
                assert!(alternative.contains("CS2"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(matches!(
            default_testbed().apply_hardening("M99"),
            Err(TopoError::UnknownMitigation(_))
        ));
    }

    #[test]
    fn annotation_only_mitigations_are_recorded() {
        let hardened = default_testbed().apply_hardening("M14").unwrap();
        assert_eq!(hardened.applied_mitigations, vec!["M14"]);
        assert_eq!(
            hardened.controller_config,
            default_testbed().controller_config
        );
    }

    #[test]
    fn same_vpls_isolates_domains() {
        let t = default_testbed();
        assert!(t.same_vpls("h1", "h4").unwrap());
        assert!(t.same_vpls("h4", "h1").unwrap());
        assert!(t.same_vpls("h1", "h1").unwrap());
        assert!(!t.same_vpls("h1", "h2").unwrap());
        assert!(matches!(
            t.same_vpls("h1", "hx"),
            Err(TopoError::UnknownNode(_))
        ));
        assert!(matches!(
            t.same_vpls("h1", "s1"),
            Err(TopoError::NotAHost(_))
        ));
    }

    #[test]
    fn reconfigure_restores_and_is_idempotent() {
        let mut broken = default_testbed();
        for d in &mut broken.vpls_domains {
            d.status = DomainStatus::Destroyed;
        }
        let restored = broken.reconfigure_vpls();
        assert!(restored
            .vpls_domains
            .iter()
            .all(|d| d.status == DomainStatus::Active));
        assert_eq!(restored, restored.reconfigure_vpls());
        assert_eq!(default_testbed().reconfigure_vpls(), default_testbed());

        // pointwise: a single destroyed domain comes back alone
        let mut one = default_testbed();
        one.vpls_domains[1].status = DomainStatus::Destroyed;
        let fixed = one.reconfigure_vpls();
        assert_eq!(fixed, default_testbed());
    }

    #[test]
    fn topology_round_trips_through_toml() {
        let t = default_testbed().apply_hardening("M6").unwrap();
        let doc = t.to_toml_string();
        let reloaded = load_topology(&doc).expect("round trip");
        assert_eq!(reloaded, t);
    }

    #[test]
    fn builtin_name_resolves() {
        assert_eq!(
            load_topology_source(BUILTIN_TOPOLOGY_NAME).unwrap(),
            default_testbed()
        );
    }
}
