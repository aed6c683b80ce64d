//! Curated knowledge base of SDN threats, vulnerabilities, mitigations,
//! scored threat categories, and the correlation map linking them.
//!
//! A catalog is loaded from a versioned TOML document (see
//! `docs/formats.md`), cross-linked, and immutable afterwards. Loading
//! rejects documents that are structurally broken (duplicate ids, dangling
//! references, malformed records); [`validate_catalog`] re-checks the full
//! invariant set on any in-memory catalog and reports violations as data.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvss::{self, CvssVector, Score, ScoredCategory, Severity};

/// The default catalog document compiled into the binary; also shipped at
/// `data/catalog.toml` for editing.
pub const BUILTIN_CATALOG_TOML: &str = include_str!("../data/catalog.toml");

/// Environment variable consulted for a catalog path before falling back to
/// the built-in catalog.
pub const KB_ENV_VAR: &str = "SDNSEC_KB";

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema violation in record {record}, field {field}: {message}")]
    SchemaViolation {
        record: String,
        field: String,
        message: String,
    },
    #[error("dangling reference from {from} to {to}")]
    DanglingReference { from: String, to: String },
    #[error("duplicate id {id}")]
    DuplicateId { id: String },
    #[error("unknown threat id {id}")]
    UnknownThreat { id: String },
}

/// The five SDN attack surfaces: three layers and the two interfaces
/// between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Surface {
    AppLayer,
    NorthboundIf,
    ControlLayer,
    SouthboundIf,
    DataLayer,
}

impl Surface {
    pub const ALL: [Surface; 5] = [
        Surface::AppLayer,
        Surface::NorthboundIf,
        Surface::ControlLayer,
        Surface::SouthboundIf,
        Surface::DataLayer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Surface::AppLayer => "AppLayer",
            Surface::NorthboundIf => "NorthboundIf",
            Surface::ControlLayer => "ControlLayer",
            Surface::SouthboundIf => "SouthboundIf",
            Surface::DataLayer => "DataLayer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrideCategory {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
}

impl StrideCategory {
    pub const ALL: [StrideCategory; 6] = [
        StrideCategory::Spoofing,
        StrideCategory::Tampering,
        StrideCategory::Repudiation,
        StrideCategory::InformationDisclosure,
        StrideCategory::DenialOfService,
        StrideCategory::ElevationOfPrivilege,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootThreat {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatRecord {
    pub id: String,
    pub name: String,
    pub description: Vec<String>,
    pub stride_tags: Vec<StrideCategory>,
    pub root_threat: String,
    pub affected_surfaces: Vec<Surface>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnRecord {
    pub id: String,
    pub description: Vec<String>,
    #[serde(default)]
    pub not_mappable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MitigationKind {
    Specific,
    Central,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MitigationRecord {
    pub id: String,
    pub kind: MitigationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covered_threats: Vec<String>,
    #[serde(default = "default_true")]
    pub applicable: bool,
}

fn default_true() -> bool {
    true
}

impl MitigationRecord {
    /// Display name: central solutions carry one, specific records go by id.
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

/// One scored threat category. `base_score`, `overall_score`, `severity`,
/// and `rank` are recorded assessment results; `cvss_vector` is a curated
/// base-metric assignment that reproduces `base_score` under the v3.1
/// equations (validation recomputes it).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatCategory {
    pub id: String,
    pub name: String,
    pub member_threats: Vec<String>,
    pub cvss_vector: CvssVector,
    pub base_score: Score,
    pub overall_score: Score,
    pub severity: Severity,
    pub rank: u32,
}

impl ThreatCategory {
    pub fn impact_direction(&self) -> cvss::ImpactDirection {
        cvss::impact_direction(self.base_score, self.overall_score)
    }
}

impl ScoredCategory for &ThreatCategory {
    fn category_id(&self) -> &str {
        &self.id
    }
    fn category_base(&self) -> Score {
        self.base_score
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrelationMap {
    pub vuln_to_threat: Vec<(String, String)>,
    pub threat_to_specific: Vec<(String, String)>,
    pub threat_to_central: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema_version: u32,
    pub editorial_fields: Vec<String>,
    pub root_threats: Vec<RootThreat>,
    pub threats: Vec<ThreatRecord>,
    pub vulnerabilities: Vec<VulnRecord>,
    pub mitigations: Vec<MitigationRecord>,
    pub categories: Vec<ThreatCategory>,
    pub correlation: CorrelationMap,
}

/// Mitigation lookup result for a single threat: the applicable specific
/// countermeasure, if any, plus every central solution covering the threat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitigationPlanEntry<'a> {
    pub threat_id: String,
    pub specific: Option<&'a MitigationRecord>,
    pub central: Vec<&'a MitigationRecord>,
    pub central_only: bool,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

// Document form: identical to the public types except that categories carry
// the vector string and raw scores, so parse errors can name the record.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    schema_version: u32,
    #[serde(default)]
    editorial: EditorialBlock,
    #[serde(default)]
    root_threats: Vec<RootThreat>,
    #[serde(default)]
    threats: Vec<ThreatRecord>,
    #[serde(default)]
    vulnerabilities: Vec<VulnRecord>,
    #[serde(default)]
    mitigations: Vec<MitigationRecord>,
    #[serde(default)]
    categories: Vec<RawCategory>,
    #[serde(default)]
    correlation: CorrelationMap,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct EditorialBlock {
    #[serde(default)]
    fields: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    id: String,
    name: String,
    member_threats: Vec<String>,
    cvss_vector: String,
    base_score: f64,
    overall_score: f64,
    severity: Severity,
    rank: u32,
}

/// Parses and cross-links a catalog document.
pub fn load_catalog(source: &str) -> Result<Catalog, KbError> {
    let raw: RawCatalog = toml::from_str(source).map_err(|e| KbError::SchemaViolation {
        record: "-".to_string(),
        field: "-".to_string(),
        message: e.message().to_string(),
    })?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(KbError::SchemaViolation {
            record: "-".to_string(),
            field: "schema_version".to_string(),
            message: format!("expected {SCHEMA_VERSION}, found {}", raw.schema_version),
        });
    }

    let mut categories = Vec::with_capacity(raw.categories.len());
    for rc in raw.categories {
        let schema = |field: &str, message: String| KbError::SchemaViolation {
            record: rc.id.clone(),
            field: field.to_string(),
            message,
        };
        let cvss_vector = CvssVector::parse(&rc.cvss_vector)
            .map_err(|e| schema("cvss_vector", e.to_string()))?;
        let base_score =
            Score::from_f64(rc.base_score).map_err(|e| schema("base_score", e.to_string()))?;
        let overall_score = Score::from_f64(rc.overall_score)
            .map_err(|e| schema("overall_score", e.to_string()))?;
        categories.push(ThreatCategory {
            id: rc.id,
            name: rc.name,
            member_threats: rc.member_threats,
            cvss_vector,
            base_score,
            overall_score,
            severity: rc.severity,
            rank: rc.rank,
        });
    }

    let mut catalog = Catalog {
        schema_version: raw.schema_version,
        editorial_fields: raw.editorial.fields,
        root_threats: raw.root_threats,
        threats: raw.threats,
        vulnerabilities: raw.vulnerabilities,
        mitigations: raw.mitigations,
        categories,
        correlation: raw.correlation,
    };
    catalog.sort_records();
    catalog.check_structure()?;
    Ok(catalog)
}

/// Loads a catalog from a file path.
pub fn load_catalog_file(path: impl AsRef<Path>) -> Result<Catalog, KbError> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|source| KbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_catalog(&source)
}

/// The compiled-in default catalog.
pub fn builtin() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| load_catalog(BUILTIN_CATALOG_TOML).expect("built-in catalog is valid"))
}

impl Catalog {
    fn sort_records(&mut self) {
        let key = |id: &str| cvss::id_sort_key(id);
        self.root_threats.sort_by_key(|r| key(&r.id));
        self.threats.sort_by_key(|t| key(&t.id));
        self.vulnerabilities.sort_by_key(|v| key(&v.id));
        self.mitigations.sort_by_key(|m| key(&m.id));
        self.categories.sort_by_key(|c| key(&c.id));
        self.correlation
            .vuln_to_threat
            .sort_by_key(|(a, b)| (key(a), key(b)));
        self.correlation
            .threat_to_specific
            .sort_by_key(|(a, b)| (key(a), key(b)));
        self.correlation
            .threat_to_central
            .sort_by_key(|(a, b)| (key(a), key(b)));
    }

    // Structural rules enforced at load time. Violations of the wider
    // invariant set (cardinalities, coverage rules) are left to
    // validate_catalog, so partial catalogs remain loadable for tests and
    // tooling.
    fn check_structure(&self) -> Result<(), KbError> {
        let mut seen: Vec<&str> = Vec::new();
        for id in self
            .root_threats
            .iter()
            .map(|r| r.id.as_str())
            .chain(self.threats.iter().map(|t| t.id.as_str()))
            .chain(self.vulnerabilities.iter().map(|v| v.id.as_str()))
            .chain(self.mitigations.iter().map(|m| m.id.as_str()))
            .chain(self.categories.iter().map(|c| c.id.as_str()))
        {
            if seen.contains(&id) {
                return Err(KbError::DuplicateId { id: id.to_string() });
            }
            seen.push(id);
        }

        for threat in &self.threats {
            if threat.stride_tags.is_empty() {
                return Err(KbError::SchemaViolation {
                    record: threat.id.clone(),
                    field: "stride_tags".to_string(),
                    message: "must not be empty".to_string(),
                });
            }
            if self.root_threat(&threat.root_threat).is_none() {
                return Err(KbError::DanglingReference {
                    from: threat.id.clone(),
                    to: threat.root_threat.clone(),
                });
            }
        }

        for mitigation in &self.mitigations {
            if !mitigation.applicable && !mitigation.actions.is_empty() {
                return Err(KbError::SchemaViolation {
                    record: mitigation.id.clone(),
                    field: "actions".to_string(),
                    message: "inapplicable mitigation must not list actions".to_string(),
                });
            }
            for covered in &mitigation.covered_threats {
                if self.threat(covered).is_none() {
                    return Err(KbError::DanglingReference {
                        from: mitigation.id.clone(),
                        to: covered.clone(),
                    });
                }
            }
        }

        for category in &self.categories {
            if category.member_threats.is_empty() {
                return Err(KbError::SchemaViolation {
                    record: category.id.clone(),
                    field: "member_threats".to_string(),
                    message: "must not be empty".to_string(),
                });
            }
            for member in &category.member_threats {
                if self.threat(member).is_none() {
                    return Err(KbError::DanglingReference {
                        from: category.id.clone(),
                        to: member.clone(),
                    });
                }
            }
            if category.severity != category.base_score.severity() {
                return Err(KbError::SchemaViolation {
                    record: category.id.clone(),
                    field: "severity".to_string(),
                    message: format!(
                        "severity {} does not match the band of base score {}",
                        category.severity, category.base_score
                    ),
                });
            }
        }

        for (vuln, threat) in &self.correlation.vuln_to_threat {
            if self.vulnerability(vuln).is_none() {
                return Err(KbError::DanglingReference {
                    from: format!("correlation {vuln}->{threat}"),
                    to: vuln.clone(),
                });
            }
            if self.threat(threat).is_none() {
                return Err(KbError::DanglingReference {
                    from: format!("correlation {vuln}->{threat}"),
                    to: threat.clone(),
                });
            }
        }
        for (threat, mitigation) in self
            .correlation
            .threat_to_specific
            .iter()
            .chain(&self.correlation.threat_to_central)
        {
            if self.threat(threat).is_none() {
                return Err(KbError::DanglingReference {
                    from: format!("correlation {threat}->{mitigation}"),
                    to: threat.clone(),
                });
            }
            if self.mitigation(mitigation).is_none() {
                return Err(KbError::DanglingReference {
                    from: format!("correlation {threat}->{mitigation}"),
                    to: mitigation.clone(),
                });
            }
        }
        Ok(())
    }

    /// Serializes back to the document form; reloading yields an equal
    /// catalog.
    pub fn to_toml_string(&self) -> String {
        let raw = RawCatalog {
            schema_version: self.schema_version,
            editorial: EditorialBlock {
                fields: self.editorial_fields.clone(),
            },
            root_threats: self.root_threats.clone(),
            threats: self.threats.clone(),
            vulnerabilities: self.vulnerabilities.clone(),
            mitigations: self.mitigations.clone(),
            categories: self
                .categories
                .iter()
                .map(|c| RawCategory {
                    id: c.id.clone(),
                    name: c.name.clone(),
                    member_threats: c.member_threats.clone(),
                    cvss_vector: c.cvss_vector.to_vector_string(),
                    base_score: c.base_score.value(),
                    overall_score: c.overall_score.value(),
                    severity: c.severity,
                    rank: c.rank,
                })
                .collect(),
            correlation: self.correlation.clone(),
        };
        toml::to_string_pretty(&raw).expect("catalog serializes")
    }

    // -- lookups ------------------------------------------------------------

    pub fn root_threat(&self, id: &str) -> Option<&RootThreat> {
        self.root_threats.iter().find(|r| r.id == id)
    }

    pub fn threat(&self, id: &str) -> Option<&ThreatRecord> {
        self.threats.iter().find(|t| t.id == id)
    }

    pub fn vulnerability(&self, id: &str) -> Option<&VulnRecord> {
        self.vulnerabilities.iter().find(|v| v.id == id)
    }

    pub fn mitigation(&self, id: &str) -> Option<&MitigationRecord> {
        self.mitigations.iter().find(|m| m.id == id)
    }

    pub fn category(&self, id: &str) -> Option<&ThreatCategory> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn specific_mitigations(&self) -> impl Iterator<Item = &MitigationRecord> {
        self.mitigations
            .iter()
            .filter(|m| m.kind == MitigationKind::Specific)
    }

    pub fn central_solutions(&self) -> impl Iterator<Item = &MitigationRecord> {
        self.mitigations
            .iter()
            .filter(|m| m.kind == MitigationKind::Central)
    }

    // -- queries ------------------------------------------------------------

    /// All threats whose affected surfaces include `surface`, ordered by id.
    pub fn threats_for_surface(&self, surface: Surface) -> Vec<&ThreatRecord> {
        self.threats
            .iter()
            .filter(|t| t.affected_surfaces.contains(&surface))
            .collect()
    }

    /// The vulnerabilities correlated with a threat.
    pub fn vulnerabilities_for(&self, threat_id: &str) -> Result<Vec<&VulnRecord>, KbError> {
        if self.threat(threat_id).is_none() {
            return Err(KbError::UnknownThreat {
                id: threat_id.to_string(),
            });
        }
        Ok(self
            .correlation
            .vuln_to_threat
            .iter()
            .filter(|(_, t)| t == threat_id)
            .filter_map(|(v, _)| self.vulnerability(v))
            .collect())
    }

    /// The applicable specific mitigation (if any) and all central solutions
    /// covering a threat.
    pub fn mitigations_for(&self, threat_id: &str) -> Result<MitigationPlanEntry<'_>, KbError> {
        if self.threat(threat_id).is_none() {
            return Err(KbError::UnknownThreat {
                id: threat_id.to_string(),
            });
        }
        let specific = self
            .correlation
            .threat_to_specific
            .iter()
            .filter(|(t, _)| t == threat_id)
            .filter_map(|(_, m)| self.mitigation(m))
            .find(|m| m.applicable);
        let central: Vec<&MitigationRecord> = self
            .correlation
            .threat_to_central
            .iter()
            .filter(|(t, _)| t == threat_id)
            .filter_map(|(_, m)| self.mitigation(m))
            .collect();
        Ok(MitigationPlanEntry {
            threat_id: threat_id.to_string(),
            central_only: specific.is_none(),
            specific,
            central,
        })
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub record: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.checks.iter().all(|c| c.violations.is_empty())
    }

    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations.len()).sum()
    }

    pub fn violations(&self) -> impl Iterator<Item = (&str, &Violation)> {
        self.checks
            .iter()
            .flat_map(|c| c.violations.iter().map(move |v| (c.name.as_str(), v)))
    }

    fn check(&mut self, name: &str, violations: Vec<Violation>) {
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            violations,
        });
    }
}

fn violation(record: impl Into<String>, message: impl Into<String>) -> Violation {
    Violation {
        record: record.into(),
        message: message.into(),
    }
}

/// Runs every catalog invariant and reports each violation with the record
/// it concerns. Violations are data, not errors: the report always comes
/// back.
pub fn validate_catalog(catalog: &Catalog) -> ValidationReport {
    let mut report = ValidationReport::default();

    // ids.unique
    let mut ids: Vec<&str> = Vec::new();
    let mut dups = Vec::new();
    for id in catalog
        .root_threats
        .iter()
        .map(|r| r.id.as_str())
        .chain(catalog.threats.iter().map(|t| t.id.as_str()))
        .chain(catalog.vulnerabilities.iter().map(|v| v.id.as_str()))
        .chain(catalog.mitigations.iter().map(|m| m.id.as_str()))
        .chain(catalog.categories.iter().map(|c| c.id.as_str()))
    {
        if ids.contains(&id) {
            dups.push(violation(id, "duplicate id"));
        }
        ids.push(id);
    }
    report.check("ids.unique", dups);

    // cardinalities of the shipped catalog profile
    let specific = catalog.specific_mitigations().count();
    let central = catalog.central_solutions().count();
    let cardinalities = [
        ("cardinality.threats", catalog.threats.len(), 18usize),
        (
            "cardinality.vulnerabilities",
            catalog.vulnerabilities.len(),
            18,
        ),
        ("cardinality.specific_mitigations", specific, 18),
        ("cardinality.central_solutions", central, 3),
        ("cardinality.categories", catalog.categories.len(), 14),
        ("cardinality.root_threats", catalog.root_threats.len(), 4),
    ];
    for (name, got, want) in cardinalities {
        let violations = if got == want {
            vec![]
        } else {
            vec![violation("-", format!("expected {want} records, found {got}"))]
        };
        report.check(name, violations);
    }

    // threats.stride_tags
    report.check(
        "threats.stride_tags",
        catalog
            .threats
            .iter()
            .filter(|t| t.stride_tags.is_empty())
            .map(|t| violation(&t.id, "no STRIDE tags"))
            .collect(),
    );

    // threats.root_reference
    report.check(
        "threats.root_reference",
        catalog
            .threats
            .iter()
            .filter(|t| catalog.root_threat(&t.root_threat).is_none())
            .map(|t| violation(&t.id, format!("unknown root threat {}", t.root_threat)))
            .collect(),
    );

    // stride.coverage: all six categories appear somewhere
    let missing: Vec<Violation> = StrideCategory::ALL
        .iter()
        .filter(|cat| !catalog.threats.iter().any(|t| t.stride_tags.contains(cat)))
        .map(|cat| violation("-", format!("no threat tagged {cat:?}")))
        .collect();
    report.check("stride.coverage", missing);

    // mitigations.inapplicable
    report.check(
        "mitigations.inapplicable",
        catalog
            .mitigations
            .iter()
            .filter(|m| !m.applicable && !m.actions.is_empty())
            .map(|m| violation(&m.id, "inapplicable mitigation lists actions"))
            .collect(),
    );

    // mitigations.central_coverage: central solutions must name threats
    report.check(
        "mitigations.central_coverage",
        catalog
            .central_solutions()
            .filter(|m| m.covered_threats.is_empty())
            .map(|m| violation(&m.id, "central solution covers no threats"))
            .collect(),
    );

    // categories.members
    report.check(
        "categories.members",
        catalog
            .categories
            .iter()
            .filter(|c| c.member_threats.is_empty())
            .map(|c| violation(&c.id, "no member threats"))
            .collect(),
    );

    // categories.member_references
    report.check(
        "categories.member_references",
        catalog
            .categories
            .iter()
            .flat_map(|c| {
                c.member_threats
                    .iter()
                    .filter(|m| catalog.threat(m).is_none())
                    .map(|m| violation(&c.id, format!("unknown member threat {m}")))
            })
            .collect(),
    );

    // categories.severity_band
    report.check(
        "categories.severity_band",
        catalog
            .categories
            .iter()
            .filter(|c| c.severity != c.base_score.severity())
            .map(|c| {
                violation(
                    &c.id,
                    format!(
                        "severity {} does not match band {} of base score {}",
                        c.severity,
                        c.base_score.severity(),
                        c.base_score
                    ),
                )
            })
            .collect(),
    );

    // categories.vector_score: the curated vector reproduces the base score
    report.check(
        "categories.vector_score",
        catalog
            .categories
            .iter()
            .filter(|c| cvss::base_score(&c.cvss_vector) != c.base_score)
            .map(|c| {
                violation(
                    &c.id,
                    format!(
                        "vector computes base {} but record says {}",
                        cvss::base_score(&c.cvss_vector),
                        c.base_score
                    ),
                )
            })
            .collect(),
    );

    // categories.rank: stored ranks equal the dense ranking by base score
    let ranked = cvss::rank_categories(catalog.categories.iter().collect());
    report.check(
        "categories.rank",
        ranked
            .entries
            .iter()
            .filter(|(rank, c)| *rank != c.rank)
            .map(|(rank, c)| {
                violation(
                    &c.id,
                    format!("stored rank {} but computed rank {rank}", c.rank),
                )
            })
            .collect(),
    );

    // correlation.vuln_totality: every threat has at least one vulnerability
    report.check(
        "correlation.vuln_totality",
        catalog
            .threats
            .iter()
            .filter(|t| {
                !catalog
                    .correlation
                    .vuln_to_threat
                    .iter()
                    .any(|(_, threat)| threat == &t.id)
            })
            .map(|t| violation(&t.id, "no correlated vulnerability"))
            .collect(),
    );

    // correlation.mitigation_totality: every threat has a mitigation edge
    report.check(
        "correlation.mitigation_totality",
        catalog
            .threats
            .iter()
            .filter(|t| {
                let has_specific = catalog
                    .correlation
                    .threat_to_specific
                    .iter()
                    .any(|(threat, _)| threat == &t.id);
                let has_central = catalog
                    .correlation
                    .threat_to_central
                    .iter()
                    .any(|(threat, _)| threat == &t.id);
                !has_specific && !has_central
            })
            .map(|t| violation(&t.id, "no mitigation edge at all"))
            .collect(),
    );

    // correlation.central_fallback: threats without an applicable specific
    // mitigation must be covered by a central solution
    report.check(
        "correlation.central_fallback",
        catalog
            .threats
            .iter()
            .filter(|t| {
                let has_specific = catalog
                    .correlation
                    .threat_to_specific
                    .iter()
                    .any(|(threat, m)| {
                        threat == &t.id
                            && catalog.mitigation(m).map(|m| m.applicable).unwrap_or(false)
                    });
                let has_central = catalog
                    .correlation
                    .threat_to_central
                    .iter()
                    .any(|(threat, _)| threat == &t.id);
                !has_specific && !has_central
            })
            .map(|t| violation(&t.id, "central-only threat lacks a central solution"))
            .collect(),
    );

    // correlation.no_universal_central: no single central solution covers
    // every threat
    report.check(
        "correlation.no_universal_central",
        catalog
            .central_solutions()
            .filter(|m| {
                !catalog.threats.is_empty()
                    && catalog
                        .threats
                        .iter()
                        .all(|t| m.covered_threats.contains(&t.id))
            })
            .map(|m| violation(&m.id, "central solution covers all threats"))
            .collect(),
    );

    // correlation.references
    let mut bad_refs = Vec::new();
    for (v, t) in &catalog.correlation.vuln_to_threat {
        if catalog.vulnerability(v).is_none() {
            bad_refs.push(violation(v, "unknown vulnerability in correlation"));
        }
        if catalog.threat(t).is_none() {
            bad_refs.push(violation(t, "unknown threat in correlation"));
        }
    }
    for (t, m) in catalog
        .correlation
        .threat_to_specific
        .iter()
        .chain(&catalog.correlation.threat_to_central)
    {
        if catalog.threat(t).is_none() {
            bad_refs.push(violation(t, "unknown threat in correlation"));
        }
        if catalog.mitigation(m).is_none() {
            bad_refs.push(violation(m, "unknown mitigation in correlation"));
        }
    }
    report.check("correlation.references", bad_refs);

    // consistency.central_edges: covered_threats and the correlation map
    // describe the same edges
    let mut edge_mismatches = Vec::new();
    for central in catalog.central_solutions() {
        for covered in &central.covered_threats {
            let has_edge = catalog
                .correlation
                .threat_to_central
                .iter()
                .any(|(t, m)| t == covered && m == &central.id);
            if !has_edge {
                edge_mismatches.push(violation(
                    &central.id,
                    format!("covered threat {covered} missing from correlation map"),
                ));
            }
        }
    }
    for (t, m) in &catalog.correlation.threat_to_central {
        if let Some(central) = catalog.mitigation(m) {
            if !central.covered_threats.contains(t) {
                edge_mismatches.push(violation(
                    m,
                    format!("correlation edge {t}->{m} not in covered_threats"),
                ));
            }
        }
    }
    report.check("consistency.central_edges", edge_mismatches);

    report
}
