//! End-to-end orchestration of the four assessment stages and report
//! rendering.
//!
//! Stage 1 enumerates threats per SDN surface with their correlated
//! vulnerabilities, stage 2 ranks the affected threat categories by CVSS
//! base score, stage 3 executes attack scenarios for the top ranks on a
//! fresh simulator each, and stage 4 derives the per-threat mitigation
//! plan. Reports render as plain text, a structured JSON document, or a
//! Graphviz correlation map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{self, AttackError, AttackKind, AttackOutcome, Verdict};
use crate::cvss::{self, ImpactDirection, Score, Severity};
use crate::kb::{Catalog, KbError, Surface};
use crate::sim::{new_sim, SimError};
use crate::topo::{TopoError, Topology};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Topo(#[from] TopoError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error("cannot read report {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("report document invalid: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// Stage data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceFinding {
    pub surface: Surface,
    pub threat_id: String,
    pub threat_name: String,
    pub vulnerability_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSummary {
    pub root_id: String,
    pub root_name: String,
    pub threat_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage1Findings {
    pub per_surface: Vec<SurfaceFinding>,
    pub root_summary: Vec<RootSummary>,
}

impl Stage1Findings {
    /// Distinct threat ids across all surfaces, in catalog order.
    pub fn distinct_threats(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        for finding in &self.per_surface {
            if !ids.contains(&finding.threat_id) {
                ids.push(finding.threat_id.clone());
            }
        }
        ids.sort_by_key(|id| cvss::id_sort_key(id));
        ids
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCategory {
    pub rank: u32,
    pub tc_id: String,
    pub name: String,
    pub base_score: Score,
    pub overall_score: Score,
    pub severity: Severity,
    pub impact_direction: ImpactDirection,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage2Ranking {
    pub entries: Vec<RankedCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub kind: AttackKind,
    pub target_tc: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage3Entry {
    pub scenario: ScenarioSummary,
    pub outcome: AttackOutcome,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralSolutionRef {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub threat_id: String,
    pub specific: Option<String>,
    pub central: Vec<CentralSolutionRef>,
    pub central_only: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MitigationPlan {
    pub entries: Vec<PlanEntry>,
    pub central_required: bool,
    /// Full mitigation node sets, so renderings of the correlation map are
    /// self-contained.
    pub all_specific_mitigations: Vec<String>,
    pub all_central_solutions: Vec<CentralSolutionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub catalog_schema_version: u32,
    pub topology_name: String,
    pub applied_mitigations: Vec<String>,
    pub seed: u64,
    pub attacks: u32,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub meta: ReportMeta,
    pub stage1: Stage1Findings,
    pub stage2: Stage2Ranking,
    pub stage3: Vec<Stage3Entry>,
    pub stage4: MitigationPlan,
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Stage 1: per-surface threat enumeration with correlated vulnerabilities,
/// plus the root-threat summary. Findings are driven by the catalog's
/// surface tagging; the topology is validated but its nodes do not narrow
/// the analysis.
pub fn run_stage1(catalog: &Catalog, topology: &Topology) -> Result<Stage1Findings, PipelineError> {
    topology.validate()?;
    let mut per_surface = Vec::new();
    for surface in Surface::ALL {
        for threat in catalog.threats_for_surface(surface) {
            let vulnerability_ids = catalog
                .vulnerabilities_for(&threat.id)?
                .iter()
                .map(|v| v.id.clone())
                .collect();
            per_surface.push(SurfaceFinding {
                surface,
                threat_id: threat.id.clone(),
                threat_name: threat.name.clone(),
                vulnerability_ids,
            });
        }
    }
    let root_summary = catalog
        .root_threats
        .iter()
        .map(|root| RootSummary {
            root_id: root.id.clone(),
            root_name: root.name.clone(),
            threat_ids: catalog
                .threats
                .iter()
                .filter(|t| t.root_threat == root.id)
                .map(|t| t.id.clone())
                .collect(),
        })
        .collect();
    Ok(Stage1Findings {
        per_surface,
        root_summary,
    })
}

/// Stage 2: ranks every catalog category whose members intersect the
/// findings, annotated with the direction the overall score moved.
pub fn run_stage2(findings: &Stage1Findings, catalog: &Catalog) -> Stage2Ranking {
    let found = findings.distinct_threats();
    let affected: Vec<&crate::kb::ThreatCategory> = catalog
        .categories
        .iter()
        .filter(|tc| tc.member_threats.iter().any(|m| found.contains(m)))
        .collect();
    let ranked = cvss::rank_categories(affected);
    Stage2Ranking {
        entries: ranked
            .entries
            .into_iter()
            .map(|(rank, tc)| RankedCategory {
                rank,
                tc_id: tc.id.clone(),
                name: tc.name.clone(),
                base_score: tc.base_score,
                overall_score: tc.overall_score,
                severity: tc.severity,
                impact_direction: tc.impact_direction(),
            })
            .collect(),
    }
}

/// Stage 3: executes the scenarios mapped to the top-k ranks, each on a
/// fresh simulator built from the topology with the same seed. k = 0 skips
/// simulation entirely.
pub fn run_stage3(
    _ranking: &Stage2Ranking,
    catalog: &Catalog,
    topology: &Topology,
    k: u32,
    seed: u64,
) -> Result<Vec<Stage3Entry>, PipelineError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let scenarios = attack::select_scenarios(k)?;
    let mut entries = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let mut sim = new_sim(topology.clone(), seed)?;
        let outcome = attack::run_scenario(&mut sim, &scenario)?;
        let verdict = attack::verdict(&outcome, catalog)?;
        entries.push(Stage3Entry {
            scenario: ScenarioSummary {
                id: scenario.id.clone(),
                kind: scenario.kind,
                target_tc: scenario.target_tc.clone(),
            },
            outcome,
            verdict,
        });
    }
    Ok(entries)
}

/// Stage 4: one plan entry per threat in the findings; flags whether any
/// threat can only be covered by a central solution.
pub fn run_stage4(
    findings: &Stage1Findings,
    catalog: &Catalog,
) -> Result<MitigationPlan, PipelineError> {
    let mut entries = Vec::new();
    for threat_id in findings.distinct_threats() {
        let entry = catalog.mitigations_for(&threat_id)?;
        entries.push(PlanEntry {
            threat_id,
            specific: entry.specific.map(|m| m.id.clone()),
            central: entry
                .central
                .iter()
                .map(|m| CentralSolutionRef {
                    id: m.id.clone(),
                    name: m.display_name().to_string(),
                })
                .collect(),
            central_only: entry.central_only,
        });
    }
    let central_required = entries.iter().any(|e| e.central_only);
    Ok(MitigationPlan {
        entries,
        central_required,
        all_specific_mitigations: catalog
            .specific_mitigations()
            .map(|m| m.id.clone())
            .collect(),
        all_central_solutions: catalog
            .central_solutions()
            .map(|m| CentralSolutionRef {
                id: m.id.clone(),
                name: m.display_name().to_string(),
            })
            .collect(),
    })
}

/// Everything `assess` needs besides the catalog and base topology.
#[derive(Debug, Clone)]
pub struct AssessOptions {
    /// Number of top-ranked scenarios to execute (0 skips simulation).
    pub attacks: u32,
    pub seed: u64,
    /// Mitigations to apply to the topology before the run.
    pub harden: Vec<String>,
    /// Injected report timestamp, so identical runs render identically.
    pub timestamp: String,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            attacks: 3,
            seed: 42,
            harden: Vec::new(),
            timestamp: "unspecified".into(),
        }
    }
}

/// Runs all four stages and assembles the report.
pub fn assess(
    catalog: &Catalog,
    topology: &Topology,
    options: &AssessOptions,
) -> Result<AssessmentReport, PipelineError> {
    let mut hardened = topology.clone();
    for mitigation in &options.harden {
        hardened = hardened.apply_hardening(mitigation)?;
    }
    let stage1 = run_stage1(catalog, &hardened)?;
    let stage2 = run_stage2(&stage1, catalog);
    let stage3 = run_stage3(&stage2, catalog, &hardened, options.attacks, options.seed)?;
    let stage4 = run_stage4(&stage1, catalog)?;
    Ok(AssessmentReport {
        meta: ReportMeta {
            catalog_schema_version: catalog.schema_version,
            topology_name: hardened.name.clone(),
            applied_mitigations: hardened.applied_mitigations.clone(),
            seed: options.seed,
            attacks: options.attacks,
            timestamp: options.timestamp.clone(),
        },
        stage1,
        stage2,
        stage3,
        stage4,
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
    Dot,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    /// Render scores with a decimal comma instead of a point.
    pub decimal_comma: bool,
}

/// Renders a report. Rendering never mutates the report; identical reports
/// render identically.
pub fn render_report(
    report: &AssessmentReport,
    format: ReportFormat,
    options: &RenderOptions,
) -> String {
    match format {
        ReportFormat::Text => render_text(report, options),
        ReportFormat::Structured => {
            let mut out =
                serde_json::to_string_pretty(report).expect("report serializes to JSON");
            out.push('\n');
            out
        }
        ReportFormat::Dot => render_dot(report),
    }
}

/// Parses a structured (JSON) report document back into memory.
pub fn parse_report(source: &str) -> Result<AssessmentReport, PipelineError> {
    serde_json::from_str(source).map_err(|e| PipelineError::Parse(e.to_string()))
}

fn score_str(score: Score, options: &RenderOptions) -> String {
    let s = score.to_string();
    if options.decimal_comma {
        s.replace('.', ",")
    } else {
        s
    }
}

fn render_text(report: &AssessmentReport, options: &RenderOptions) -> String {
    let mut out = String::new();
    let meta = &report.meta;
    out.push_str("SDN SECURITY ASSESSMENT\n");
    out.push_str("=======================\n");
    out.push_str(&format!("topology:   {}\n", meta.topology_name));
    let hardening = if meta.applied_mitigations.is_empty() {
        "none".to_string()
    } else {
        meta.applied_mitigations.join(",")
    };
    out.push_str(&format!("hardening:  {hardening}\n"));
    out.push_str(&format!(
        "seed:       {}    attacks: {}\n",
        meta.seed, meta.attacks
    ));
    out.push_str(&format!("generated:  {}\n", meta.timestamp));

    // stage 1
    out.push_str("\nStage 1 - Threat & Vulnerability Analysis\n");
    out.push_str("------------------------------------------\n");
    let threats = report.stage1.distinct_threats();
    out.push_str(&format!(
        "{} threats across 5 surfaces, {} root groups\n",
        threats.len(),
        report.stage1.root_summary.len()
    ));
    for surface in Surface::ALL {
        let ids: Vec<&str> = report
            .stage1
            .per_surface
            .iter()
            .filter(|f| f.surface == surface)
            .map(|f| f.threat_id.as_str())
            .collect();
        out.push_str(&format!(
            "  {:<13} {}\n",
            format!("{}:", surface.as_str()),
            ids.join(", ")
        ));
    }
    for root in &report.stage1.root_summary {
        out.push_str(&format!(
            "  {} ({}): {}\n",
            root.root_id,
            root.root_name,
            root.threat_ids.join(", ")
        ));
    }

    // stage 2
    out.push_str("\nStage 2 - Risk & Impact Ranking\n");
    out.push_str("-------------------------------\n");
    let name_width = report
        .stage2
        .entries
        .iter()
        .map(|e| e.name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    out.push_str(&format!(
        "{:<5} {:<5} {:<name_width$} {:>5} {:>8} {:<9} {}\n",
        "Rank", "TC", "Name", "Base", "Overall", "Severity", "Impact"
    ));
    for entry in &report.stage2.entries {
        out.push_str(&format!(
            "{:<5} {:<5} {:<name_width$} {:>5} {:>8} {:<9} {}\n",
            entry.rank,
            entry.tc_id,
            entry.name,
            score_str(entry.base_score, options),
            score_str(entry.overall_score, options),
            entry.severity.as_str(),
            entry.impact_direction.as_str(),
        ));
    }

    // stage 3
    out.push_str("\nStage 3 - Attack Modelling\n");
    out.push_str("--------------------------\n");
    if report.stage3.is_empty() {
        out.push_str("skipped\n");
    } else {
        for entry in &report.stage3 {
            out.push_str(&format!(
                "scenario {} (kind {}, target {}): {}\n",
                entry.scenario.id,
                entry.scenario.kind.as_str(),
                entry.scenario.target_tc,
                if entry.outcome.succeeded {
                    "succeeded"
                } else {
                    "did not succeed"
                }
            ));
            for (key, value) in &entry.outcome.metrics {
                let rendered = match value {
                    attack::MetricValue::Bool(b) => b.to_string(),
                    attack::MetricValue::Count(n) => n.to_string(),
                    attack::MetricValue::Seconds(s) => format!("{s:?}s"),
                    attack::MetricValue::Text(t) => t.clone(),
                };
                out.push_str(&format!("  {key} = {rendered}\n"));
            }
            out.push_str(&format!(
                "  verdict: observed impact {}, {} with {} expectation\n",
                entry.verdict.observed_impact.as_str(),
                if entry.verdict.consistent {
                    "consistent"
                } else {
                    "INCONSISTENT"
                },
                entry.verdict.expectation.as_str(),
            ));
        }
    }

    // stage 4
    out.push_str("\nStage 4 - Mitigation Plan\n");
    out.push_str("-------------------------\n");
    out.push_str(&format!(
        "central solution required: {}\n",
        if report.stage4.central_required {
            "yes"
        } else {
            "no"
        }
    ));
    for entry in &report.stage4.entries {
        let centrals: Vec<String> = entry
            .central
            .iter()
            .map(|c| format!("{} ({})", c.id, c.name))
            .collect();
        match (&entry.specific, entry.central_only) {
            (Some(specific), _) if centrals.is_empty() => {
                out.push_str(&format!("  {}: {}\n", entry.threat_id, specific));
            }
            (Some(specific), _) => {
                out.push_str(&format!(
                    "  {}: {} + {}\n",
                    entry.threat_id,
                    specific,
                    centrals.join(", ")
                ));
            }
            (None, _) => {
                out.push_str(&format!(
                    "  {}: central-only -> {}\n",
                    entry.threat_id,
                    centrals.join(", ")
                ));
            }
        }
    }
    out
}

// Graphviz rendering of the correlation map: vulnerability, threat,
// mitigation, and central-solution nodes with V->T and T->M/T->CS edges.
fn render_dot(report: &AssessmentReport) -> String {
    let mut out = String::new();
    out.push_str("digraph correlation_map {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=box, fontsize=10];\n");

    let mut vulns: Vec<String> = Vec::new();
    let mut threats: Vec<String> = Vec::new();
    let mut vt_edges: Vec<(String, String)> = Vec::new();
    for finding in &report.stage1.per_surface {
        if !threats.contains(&finding.threat_id) {
            threats.push(finding.threat_id.clone());
        }
        for vuln in &finding.vulnerability_ids {
            if !vulns.contains(vuln) {
                vulns.push(vuln.clone());
            }
            let edge = (vuln.clone(), finding.threat_id.clone());
            if !vt_edges.contains(&edge) {
                vt_edges.push(edge);
            }
        }
    }
    vulns.sort_by_key(|id| cvss::id_sort_key(id));
    threats.sort_by_key(|id| cvss::id_sort_key(id));
    vt_edges.sort_by_key(|(a, b)| (cvss::id_sort_key(a), cvss::id_sort_key(b)));

    out.push_str("  subgraph cluster_vulnerabilities {\n    label=\"Vulnerabilities\";\n");
    for vuln in &vulns {
        out.push_str(&format!("    {vuln};\n"));
    }
    out.push_str("  }\n");

    out.push_str("  subgraph cluster_threats {\n    label=\"Threats\";\n");
    for threat in &threats {
        out.push_str(&format!("    {threat};\n"));
    }
    out.push_str("  }\n");

    out.push_str("  subgraph cluster_mitigations {\n    label=\"Specific mitigations\";\n");
    for mitigation in &report.stage4.all_specific_mitigations {
        out.push_str(&format!("    {mitigation};\n"));
    }
    out.push_str("  }\n");

    out.push_str("  subgraph cluster_central {\n    label=\"Central solutions\";\n");
    for central in &report.stage4.all_central_solutions {
        out.push_str(&format!(
            "    {} [label=\"{}\\n{}\"];\n",
            central.id, central.id, central.name
        ));
    }
    out.push_str("  }\n");

    for (vuln, threat) in &vt_edges {
        out.push_str(&format!("  {vuln} -> {threat};\n"));
    }
    for entry in &report.stage4.entries {
        if let Some(specific) = &entry.specific {
            out.push_str(&format!("  {} -> {};\n", entry.threat_id, specific));
        }
        for central in &entry.central {
            out.push_str(&format!("  {} -> {};\n", entry.threat_id, central.id));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb;
    use crate::topo::default_testbed;

    fn catalog() -> &'static Catalog {
        kb::builtin()
    }

    fn full_findings() -> Stage1Findings {
        run_stage1(catalog(), &default_testbed()).unwrap()
    }

    #[test]
    fn stage1_covers_all_surfaces_threats_and_roots() {
        let findings = full_findings();
        assert_eq!(findings.distinct_threats().len(), 18);
        assert_eq!(findings.root_summary.len(), 4);
        let total: usize = findings.root_summary.iter().map(|r| r.threat_ids.len()).sum();
        assert_eq!(total, 18);
        for surface in Surface::ALL {
            assert!(
                findings.per_surface.iter().any(|f| f.surface == surface),
                "no findings for {surface:?}"
            );
        }
        for finding in &findings.per_surface {
            assert!(!finding.vulnerability_ids.is_empty());
        }
    }

    #[test]
    fn stage1_ignores_attacker_presence() {
        let with_attacker = full_findings();
        let mut topo = default_testbed();
        topo.nodes.retain(|n| n.id != "atk1");
        topo.links.retain(|l| !l.connects("atk1"));
        let without_attacker = run_stage1(catalog(), &topo).unwrap();
        assert_eq!(with_attacker, without_attacker);
    }

    #[test]
    fn stage2_reproduces_published_ranking() {
        let ranking = run_stage2(&full_findings(), catalog());
        assert_eq!(ranking.entries.len(), 14);
        let got: Vec<(u32, &str)> = ranking
            .entries
            .iter()
            .map(|e| (e.rank, e.tc_id.as_str()))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, "TC1"),
                (1, "TC2"),
                (2, "TC3"),
                (3, "TC4"),
                (4, "TC5"),
                (4, "TC6"),
                (5, "TC7"),
                (5, "TC8"),
                (5, "TC9"),
                (5, "TC10"),
                (6, "TC11"),
                (6, "TC12"),
                (7, "TC13"),
                (7, "TC14"),
            ]
        );
    }

    #[test]
    fn stage2_restricts_to_findings() {
        let catalog = catalog();
        let mut findings = full_findings();
        findings.per_surface.retain(|f| f.threat_id == "T6");
        let ranking = run_stage2(&findings, catalog);
        let ids: Vec<&str> = ranking.entries.iter().map(|e| e.tc_id.as_str()).collect();
        assert_eq!(ids, vec!["TC3", "TC7", "TC9", "TC10", "TC13"]);
        for entry in &ranking.entries {
            assert!(catalog
                .category(&entry.tc_id)
                .unwrap()
                .member_threats
                .contains(&"T6".to_string()));
        }

        findings.per_surface.clear();
        assert!(run_stage2(&findings, catalog).entries.is_empty());
    }

    #[test]
    fn stage3_runs_topk_and_zero_is_empty() {
        let catalog = catalog();
        let ranking = run_stage2(&full_findings(), catalog);
        let topo = default_testbed();
        assert!(run_stage3(&ranking, catalog, &topo, 0, 42).unwrap().is_empty());
        let three = run_stage3(&ranking, catalog, &topo, 3, 42).unwrap();
        assert_eq!(three.len(), 3);
        assert!(three[0].outcome.succeeded);
        assert_eq!(three[1].outcome.count("nodes_exposed"), 13);
        assert_eq!(three[2].outcome.seconds("time_to_disruption"), Some(8.0));
    }

    #[test]
    fn stage4_builds_full_plan_with_central_requirement() {
        let plan = run_stage4(&full_findings(), catalog()).unwrap();
        assert_eq!(plan.entries.len(), 18);
        assert!(plan.central_required);
        let t5 = plan.entries.iter().find(|e| e.threat_id == "T5").unwrap();
        assert!(t5.central_only);
        assert_eq!(t5.central[0].id, "CS2");
        let t1 = plan.entries.iter().find(|e| e.threat_id == "T1").unwrap();
        assert_eq!(t1.specific.as_deref(), Some("M1"));
    }

    #[test]
    fn stage4_single_threat_plan_needs_no_central() {
        let mut findings = full_findings();
        findings.per_surface.retain(|f| f.threat_id == "T1");
        let plan = run_stage4(&findings, catalog()).unwrap();
        assert_eq!(plan.entries.len(), 1);
        assert!(!plan.central_required);

        findings.per_surface.clear();
        let empty = run_stage4(&findings, catalog()).unwrap();
        assert!(empty.entries.is_empty());
        assert!(!empty.central_required);
    }

    #[test]
    fn rendering_is_pure_and_stable() {
        let report = assess(
            catalog(),
            &default_testbed(),
            &AssessOptions {
                attacks: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let a = render_report(&report, ReportFormat::Text, &RenderOptions::default());
        let b = render_report(&report, ReportFormat::Text, &RenderOptions::default());
        assert_eq!(a, b);
        assert!(a.contains("skipped"));
    }

    #[test]
    fn structured_report_round_trips() {
        let report = assess(
            catalog(),
            &default_testbed(),
            &AssessOptions {
                attacks: 3,
                seed: 42,
                harden: vec![],
                timestamp: "test".into(),
            },
        )
        .unwrap();
        let json = render_report(&report, ReportFormat::Structured, &RenderOptions::default());
        let parsed = parse_report(&json).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn text_report_shows_published_scores() {
        let report = assess(
            catalog(),
            &default_testbed(),
            &AssessOptions {
                attacks: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let text = render_report(&report, ReportFormat::Text, &RenderOptions::default());
        let first_row = text
            .lines()
            .find(|l| l.trim_start().starts_with("1 ") || l.starts_with("1 "))
            .expect("ranked row");
        assert!(first_row.contains("TC1"));
        assert!(first_row.contains("9.0"));
        assert!(first_row.contains("7.9"));
        assert!(first_row.contains("Critical"));

        let comma = render_report(
            &report,
            ReportFormat::Text,
            &RenderOptions {
                decimal_comma: true,
            },
        );
        assert!(comma.contains("9,0"));
        assert!(comma.contains("7,9"));
    }

    #[test]
    fn dot_report_has_all_nodes_and_total_threat_edges() {
        let report = assess(
            catalog(),
            &default_testbed(),
            &AssessOptions {
                attacks: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let dot = render_report(&report, ReportFormat::Dot, &RenderOptions::default());
        for i in 1..=18 {
            assert!(dot.contains(&format!("    V{i};\n")), "missing V{i}");
            assert!(dot.contains(&format!("    T{i};\n")), "missing T{i}");
            assert!(dot.contains(&format!("    M{i};\n")), "missing M{i}");
        }
        for cs in ["CS1", "CS2", "CS3"] {
            assert!(dot.contains(&format!("    {cs} [label=")), "missing {cs}");
        }
        // every threat has at least one incoming and one outgoing edge
        for i in 1..=18 {
            assert!(
                dot.contains(&format!("-> T{i};")),
                "T{i} has no vulnerability edge"
            );
            assert!(
                dot.contains(&format!("  T{i} -> ")),
                "T{i} has no mitigation edge"
            );
        }
    }

    #[test]
    fn hardened_run_dominates_unhardened_run() {
        use crate::attack::ObservedImpact;
        let catalog = catalog();
        let base = AssessOptions {
            attacks: 3,
            seed: 42,
            harden: vec![],
            timestamp: "t".into(),
        };
        let unhardened = assess(catalog, &default_testbed(), &base).unwrap();
        let hardened = assess(
            catalog,
            &default_testbed(),
            &AssessOptions {
                harden: vec!["M6".into(), "M8".into(), "M13".into()],
                ..base
            },
        )
        .unwrap();

        for (open, shut) in unhardened.stage3.iter().zip(&hardened.stage3) {
            assert_eq!(open.scenario.id, shut.scenario.id);
            assert!(
                shut.verdict.observed_impact <= open.verdict.observed_impact,
                "{}: hardened impact grew",
                open.scenario.id
            );
        }
        // credential policy stops the brute force outright
        assert_eq!(
            hardened.stage3[0].verdict.observed_impact,
            ObservedImpact::None
        );
        // TLS blinds the control channel even though telnet stays readable
        assert_eq!(hardened.stage3[1].outcome.count("control_plaintext_packets"), 0);
        assert!(
            hardened.stage3[1].outcome.count("nodes_exposed")
                < unhardened.stage3[1].outcome.count("nodes_exposed")
        );
        // rate limiting keeps the service up
        assert_eq!(
            hardened.stage3[2].verdict.observed_impact,
            ObservedImpact::None
        );
    }

    #[test]
    fn stage_chaining_matches_direct_ranking() {
        let catalog = catalog();
        let ranking = run_stage2(&full_findings(), catalog);
        let direct = cvss::rank_categories(catalog.categories.iter().collect());
        let from_pipeline: Vec<(u32, &str)> = ranking
            .entries
            .iter()
            .map(|e| (e.rank, e.tc_id.as_str()))
            .collect();
        let from_engine: Vec<(u32, &str)> = direct
            .entries
            .iter()
            .map(|(r, tc)| (*r, tc.id.as_str()))
            .collect();
        assert_eq!(from_pipeline, from_engine);
    }
}
