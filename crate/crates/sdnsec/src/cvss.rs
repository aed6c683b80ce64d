//! CVSS v3.1 scoring: base and environmental equations, severity bands,
//! and the dense ranking used for threat categories.
//!
//! Scores carry exactly one fractional digit and are kept as integer tenths
//! internally, so band edges (8.9 vs 9.0) never suffer float drift. The
//! round-up step mirrors the standard's integer formulation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CvssError {
    #[error("vector string must start with \"CVSS:3.1/\"")]
    MissingPrefix,
    #[error("malformed metric token: {0:?}")]
    MalformedToken(String),
    #[error("unknown metric: {0}")]
    UnknownMetric(String),
    #[error("duplicate metric: {0}")]
    DuplicateMetric(String),
    #[error("missing mandatory metric: {0}")]
    MissingMetric(&'static str),
    #[error("illegal value {value:?} for metric {metric}")]
    IllegalValue { metric: String, value: String },
    #[error("score {0} out of range 0.0..=10.0")]
    ScoreOutOfRange(f64),
    #[error("score {0} does not have exactly one fractional digit")]
    NotOneDecimal(f64),
}

/// Severity classes with their base-score bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    None,     // 0.0
    Low,      // 0.1 - 3.9
    Medium,   // 4.0 - 6.9
    High,     // 7.0 - 8.9
    Critical, // 9.0 - 10.0
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::None => "None",
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::Critical => "Critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A CVSS score: one fractional digit, 0.0..=10.0, stored as tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Score(u16);

impl Score {
    pub fn from_tenths(tenths: u16) -> Result<Self, CvssError> {
        if tenths > 100 {
            return Err(CvssError::ScoreOutOfRange(f64::from(tenths) / 10.0));
        }
        Ok(Score(tenths))
    }

    pub fn from_f64(value: f64) -> Result<Self, CvssError> {
        if !(0.0..=10.0).contains(&value) {
            return Err(CvssError::ScoreOutOfRange(value));
        }
        let scaled = value * 10.0;
        let tenths = scaled.round();
        if (scaled - tenths).abs() > 1e-6 {
            return Err(CvssError::NotOneDecimal(value));
        }
        Ok(Score(tenths as u16))
    }

    pub fn tenths(&self) -> u16 {
        self.0
    }

    pub fn value(&self) -> f64 {
        f64::from(self.0) / 10.0
    }

    pub fn severity(&self) -> Severity {
        match self.0 {
            0 => Severity::None,
            1..=39 => Severity::Low,
            40..=69 => Severity::Medium,
            70..=89 => Severity::High,
            _ => Severity::Critical,
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl TryFrom<f64> for Score {
    type Error = CvssError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Score::from_f64(value)
    }
}

impl From<Score> for f64 {
    fn from(score: Score) -> f64 {
        score.value()
    }
}

/// Maps a one-decimal score onto its severity band.
pub fn severity_band(value: f64) -> Result<Severity, CvssError> {
    Ok(Score::from_f64(value)?.severity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackVector {
    Network,
    Adjacent,
    Local,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackComplexity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrivilegesRequired {
    None,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserInteraction {
    None,
    Required,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    Unchanged,
    Changed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ImpactMetric {
    None,
    Low,
    High,
}

/// Security requirement weight; `NotDefined` scores like `Medium`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Requirement {
    #[default]
    NotDefined,
    Low,
    Medium,
    High,
}

impl AttackVector {
    fn weight(self) -> f64 {
        match self {
            AttackVector::Network => 0.85,
            AttackVector::Adjacent => 0.62,
            AttackVector::Local => 0.55,
            AttackVector::Physical => 0.2,
        }
    }
    fn code(self) -> &'static str {
        match self {
            AttackVector::Network => "N",
            AttackVector::Adjacent => "A",
            AttackVector::Local => "L",
            AttackVector::Physical => "P",
        }
    }
}

impl AttackComplexity {
    fn weight(self) -> f64 {
        match self {
            AttackComplexity::Low => 0.77,
            AttackComplexity::High => 0.44,
        }
    }
    fn code(self) -> &'static str {
        match self {
            AttackComplexity::Low => "L",
            AttackComplexity::High => "H",
        }
    }
}

impl PrivilegesRequired {
    // The Low/High weights rise when the scope changes.
    fn weight(self, scope: Scope) -> f64 {
        match (self, scope) {
            (PrivilegesRequired::None, _) => 0.85,
            (PrivilegesRequired::Low, Scope::Unchanged) => 0.62,
            (PrivilegesRequired::Low, Scope::Changed) => 0.68,
            (PrivilegesRequired::High, Scope::Unchanged) => 0.27,
            (PrivilegesRequired::High, Scope::Changed) => 0.5,
        }
    }
    fn code(self) -> &'static str {
        match self {
            PrivilegesRequired::None => "N",
            PrivilegesRequired::Low => "L",
            PrivilegesRequired::High => "H",
        }
    }
}

impl UserInteraction {
    fn weight(self) -> f64 {
        match self {
            UserInteraction::None => 0.85,
            UserInteraction::Required => 0.62,
        }
    }
    fn code(self) -> &'static str {
        match self {
            UserInteraction::None => "N",
            UserInteraction::Required => "R",
        }
    }
}

impl Scope {
    fn code(self) -> &'static str {
        match self {
            Scope::Unchanged => "U",
            Scope::Changed => "C",
        }
    }
}

impl ImpactMetric {
    fn weight(self) -> f64 {
        match self {
            ImpactMetric::None => 0.0,
            ImpactMetric::Low => 0.22,
            ImpactMetric::High => 0.56,
        }
    }
    fn code(self) -> &'static str {
        match self {
            ImpactMetric::None => "N",
            ImpactMetric::Low => "L",
            ImpactMetric::High => "H",
        }
    }
}

impl Requirement {
    fn weight(self) -> f64 {
        match self {
            Requirement::NotDefined | Requirement::Medium => 1.0,
            Requirement::Low => 0.5,
            Requirement::High => 1.5,
        }
    }
    fn code(self) -> &'static str {
        match self {
            Requirement::NotDefined => "X",
            Requirement::Low => "L",
            Requirement::Medium => "M",
            Requirement::High => "H",
        }
    }
}

/// The environmental metric group. `None` on a modified metric means
/// NotDefined: the corresponding base metric applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentalMetrics {
    pub confidentiality_requirement: Requirement,
    pub integrity_requirement: Requirement,
    pub availability_requirement: Requirement,
    pub modified_attack_vector: Option<AttackVector>,
    pub modified_attack_complexity: Option<AttackComplexity>,
    pub modified_privileges_required: Option<PrivilegesRequired>,
    pub modified_user_interaction: Option<UserInteraction>,
    pub modified_scope: Option<Scope>,
    pub modified_confidentiality: Option<ImpactMetric>,
    pub modified_integrity: Option<ImpactMetric>,
    pub modified_availability: Option<ImpactMetric>,
}

impl EnvironmentalMetrics {
    /// True when every metric in the group is NotDefined.
    pub fn is_undefined(&self) -> bool {
        self.confidentiality_requirement == Requirement::NotDefined
            && self.integrity_requirement == Requirement::NotDefined
            && self.availability_requirement == Requirement::NotDefined
            && self.modified_attack_vector.is_none()
            && self.modified_attack_complexity.is_none()
            && self.modified_privileges_required.is_none()
            && self.modified_user_interaction.is_none()
            && self.modified_scope.is_none()
            && self.modified_confidentiality.is_none()
            && self.modified_integrity.is_none()
            && self.modified_availability.is_none()
    }
}

/// A full CVSS v3.1 vector: the eight base metrics plus the environmental
/// group. Temporal metrics are not modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CvssVector {
    pub attack_vector: AttackVector,
    pub attack_complexity: AttackComplexity,
    pub privileges_required: PrivilegesRequired,
    pub user_interaction: UserInteraction,
    pub scope: Scope,
    pub confidentiality: ImpactMetric,
    pub integrity: ImpactMetric,
    pub availability: ImpactMetric,
    #[serde(default)]
    pub environmental: EnvironmentalMetrics,
}

// Round up to one decimal, on integers scaled by 1e5 as in the standard's
// reference formulation, so 8.9/9.0 style boundaries are exact.
fn round_up(value: f64) -> u16 {
    let scaled = (value * 100_000.0).round() as i64;
    let tenths = if scaled % 10_000 == 0 {
        scaled / 10_000
    } else {
        scaled / 10_000 + 1
    };
    tenths.clamp(0, 100) as u16
}

/// Computes the v3.1 base score.
pub fn base_score(v: &CvssVector) -> Score {
    let iss = 1.0
        - (1.0 - v.confidentiality.weight())
            * (1.0 - v.integrity.weight())
            * (1.0 - v.availability.weight());
    let impact = match v.scope {
        Scope::Unchanged => 6.42 * iss,
        Scope::Changed => 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15),
    };
    if impact <= 0.0 {
        return Score(0);
    }
    let exploitability = 8.22
        * v.attack_vector.weight()
        * v.attack_complexity.weight()
        * v.privileges_required.weight(v.scope)
        * v.user_interaction.weight();
    let raw = match v.scope {
        Scope::Unchanged => (impact + exploitability).min(10.0),
        Scope::Changed => (1.08 * (impact + exploitability)).min(10.0),
    };
    Score(round_up(raw))
}

/// Computes the v3.1 environmental score. Every NotDefined modified metric
/// falls back to its base counterpart; an entirely undefined environmental
/// group leaves the base score unchanged.
pub fn environmental_score(v: &CvssVector) -> Score {
    let env = &v.environmental;
    if env.is_undefined() {
        return base_score(v);
    }
    let m_av = env.modified_attack_vector.unwrap_or(v.attack_vector);
    let m_ac = env.modified_attack_complexity.unwrap_or(v.attack_complexity);
    let m_pr = env
        .modified_privileges_required
        .unwrap_or(v.privileges_required);
    let m_ui = env.modified_user_interaction.unwrap_or(v.user_interaction);
    let m_scope = env.modified_scope.unwrap_or(v.scope);
    let m_c = env.modified_confidentiality.unwrap_or(v.confidentiality);
    let m_i = env.modified_integrity.unwrap_or(v.integrity);
    let m_a = env.modified_availability.unwrap_or(v.availability);

    let miss = (1.0
        - (1.0 - env.confidentiality_requirement.weight() * m_c.weight())
            * (1.0 - env.integrity_requirement.weight() * m_i.weight())
            * (1.0 - env.availability_requirement.weight() * m_a.weight()))
    .min(0.915);
    let modified_impact = match m_scope {
        Scope::Unchanged => 6.42 * miss,
        Scope::Changed => 7.52 * (miss - 0.029) - 3.25 * (miss * 0.9731 - 0.02).powi(13),
    };
    if modified_impact <= 0.0 {
        return Score(0);
    }
    let modified_exploitability =
        8.22 * m_av.weight() * m_ac.weight() * m_pr.weight(m_scope) * m_ui.weight();
    let raw = match m_scope {
        Scope::Unchanged => (modified_impact + modified_exploitability).min(10.0),
        Scope::Changed => (1.08 * (modified_impact + modified_exploitability)).min(10.0),
    };
    // Temporal weights are all 1.0 here, so the second round-up of the
    // standard collapses to the first.
    Score(round_up(raw))
}

// ---------------------------------------------------------------------------
// Vector string form
// ---------------------------------------------------------------------------

impl CvssVector {
    /// Canonical vector string: base metrics in standard order, then any
    /// defined environmental metrics in standard order.
    pub fn to_vector_string(&self) -> String {
        let mut s = format!(
            "CVSS:3.1/AV:{}/AC:{}/PR:{}/UI:{}/S:{}/C:{}/I:{}/A:{}",
            self.attack_vector.code(),
            self.attack_complexity.code(),
            self.privileges_required.code(),
            self.user_interaction.code(),
            self.scope.code(),
            self.confidentiality.code(),
            self.integrity.code(),
            self.availability.code(),
        );
        let env = &self.environmental;
        let mut push = |metric: &str, code: &str| {
            s.push('/');
            s.push_str(metric);
            s.push(':');
            s.push_str(code);
        };
        if env.confidentiality_requirement != Requirement::NotDefined {
            push("CR", env.confidentiality_requirement.code());
        }
        if env.integrity_requirement != Requirement::NotDefined {
            push("IR", env.integrity_requirement.code());
        }
        if env.availability_requirement != Requirement::NotDefined {
            push("AR", env.availability_requirement.code());
        }
        if let Some(m) = env.modified_attack_vector {
            push("MAV", m.code());
        }
        if let Some(m) = env.modified_attack_complexity {
            push("MAC", m.code());
        }
        if let Some(m) = env.modified_privileges_required {
            push("MPR", m.code());
        }
        if let Some(m) = env.modified_user_interaction {
            push("MUI", m.code());
        }
        if let Some(m) = env.modified_scope {
            push("MS", m.code());
        }
        if let Some(m) = env.modified_confidentiality {
            push("MC", m.code());
        }
        if let Some(m) = env.modified_integrity {
            push("MI", m.code());
        }
        if let Some(m) = env.modified_availability {
            push("MA", m.code());
        }
        s
    }

    /// Parses the standard vector string form. Metrics may appear in any
    /// order; the eight base metrics are mandatory; duplicates are rejected;
    /// an explicit `X` marks an environmental metric as NotDefined.
    pub fn parse(input: &str) -> Result<Self, CvssError> {
        let body = input
            .strip_prefix("CVSS:3.1/")
            .ok_or(CvssError::MissingPrefix)?;
        let mut av = None;
        let mut ac = None;
        let mut pr = None;
        let mut ui = None;
        let mut scope = None;
        let mut c = None;
        let mut i = None;
        let mut a = None;
        let mut env = EnvironmentalMetrics::default();
        let mut seen: Vec<String> = Vec::new();

        for token in body.split('/') {
            let (metric, value) = token
                .split_once(':')
                .ok_or_else(|| CvssError::MalformedToken(token.to_string()))?;
            if seen.iter().any(|m| m == metric) {
                return Err(CvssError::DuplicateMetric(metric.to_string()));
            }
            seen.push(metric.to_string());
            let illegal = || CvssError::IllegalValue {
                metric: metric.to_string(),
                value: value.to_string(),
            };
            match metric {
                "AV" => av = Some(parse_av(value).ok_or_else(illegal)?),
                "AC" => ac = Some(parse_ac(value).ok_or_else(illegal)?),
                "PR" => pr = Some(parse_pr(value).ok_or_else(illegal)?),
                "UI" => ui = Some(parse_ui(value).ok_or_else(illegal)?),
                "S" => scope = Some(parse_scope(value).ok_or_else(illegal)?),
                "C" => c = Some(parse_impact(value).ok_or_else(illegal)?),
                "I" => i = Some(parse_impact(value).ok_or_else(illegal)?),
                "A" => a = Some(parse_impact(value).ok_or_else(illegal)?),
                "CR" => {
                    env.confidentiality_requirement = parse_req(value).ok_or_else(illegal)?;
                }
                "IR" => env.integrity_requirement = parse_req(value).ok_or_else(illegal)?,
                "AR" => env.availability_requirement = parse_req(value).ok_or_else(illegal)?,
                "MAV" => {
                    env.modified_attack_vector = parse_opt(value, parse_av).ok_or_else(illegal)?;
                }
                "MAC" => {
                    env.modified_attack_complexity =
                        parse_opt(value, parse_ac).ok_or_else(illegal)?;
                }
                "MPR" => {
                    env.modified_privileges_required =
                        parse_opt(value, parse_pr).ok_or_else(illegal)?;
                }
                "MUI" => {
                    env.modified_user_interaction =
                        parse_opt(value, parse_ui).ok_or_else(illegal)?;
                }
                "MS" => {
                    env.modified_scope = parse_opt(value, parse_scope).ok_or_else(illegal)?;
                }
                "MC" => {
                    env.modified_confidentiality =
                        parse_opt(value, parse_impact).ok_or_else(illegal)?;
                }
                "MI" => {
                    env.modified_integrity = parse_opt(value, parse_impact).ok_or_else(illegal)?;
                }
                "MA" => {
                    env.modified_availability =
                        parse_opt(value, parse_impact).ok_or_else(illegal)?;
                }
                other => return Err(CvssError::UnknownMetric(other.to_string())),
            }
        }

        Ok(CvssVector {
            attack_vector: av.ok_or(CvssError::MissingMetric("AV"))?,
            attack_complexity: ac.ok_or(CvssError::MissingMetric("AC"))?,
            privileges_required: pr.ok_or(CvssError::MissingMetric("PR"))?,
            user_interaction: ui.ok_or(CvssError::MissingMetric("UI"))?,
            scope: scope.ok_or(CvssError::MissingMetric("S"))?,
            confidentiality: c.ok_or(CvssError::MissingMetric("C"))?,
            integrity: i.ok_or(CvssError::MissingMetric("I"))?,
            availability: a.ok_or(CvssError::MissingMetric("A"))?,
            environmental: env,
        })
    }
}

impl fmt::Display for CvssVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_vector_string())
    }
}

fn parse_av(v: &str) -> Option<AttackVector> {
    match v {
        "N" => Some(AttackVector::Network),
        "A" => Some(AttackVector::Adjacent),
        "L" => Some(AttackVector::Local),
        "P" => Some(AttackVector::Physical),
        _ => None,
    }
}

fn parse_ac(v: &str) -> Option<AttackComplexity> {
    match v {
        "L" => Some(AttackComplexity::Low),
        "H" => Some(AttackComplexity::High),
        _ => None,
    }
}

fn parse_pr(v: &str) -> Option<PrivilegesRequired> {
    match v {
        "N" => Some(PrivilegesRequired::None),
        "L" => Some(PrivilegesRequired::Low),
        "H" => Some(PrivilegesRequired::High),
        _ => None,
    }
}

fn parse_ui(v: &str) -> Option<UserInteraction> {
    match v {
        "N" => Some(UserInteraction::None),
        "R" => Some(UserInteraction::Required),
        _ => None,
    }
}

fn parse_scope(v: &str) -> Option<Scope> {
    match v {
        "U" => Some(Scope::Unchanged),
        "C" => Some(Scope::Changed),
        _ => None,
    }
}

fn parse_impact(v: &str) -> Option<ImpactMetric> {
    match v {
        "N" => Some(ImpactMetric::None),
        "L" => Some(ImpactMetric::Low),
        "H" => Some(ImpactMetric::High),
        _ => None,
    }
}

fn parse_req(v: &str) -> Option<Requirement> {
    match v {
        "X" => Some(Requirement::NotDefined),
        "L" => Some(Requirement::Low),
        "M" => Some(Requirement::Medium),
        "H" => Some(Requirement::High),
        _ => None,
    }
}

// Wraps a metric parser so "X" yields Some(None) and bad codes yield None.
#[allow(clippy::option_option)]
fn parse_opt<T>(v: &str, f: impl Fn(&str) -> Option<T>) -> Option<Option<T>> {
    if v == "X" {
        Some(None)
    } else {
        f(v).map(Some)
    }
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

/// Anything rankable by (base score, id). Ids order numerically by suffix,
/// so "TC2" sorts before "TC10".
pub trait ScoredCategory {
    fn category_id(&self) -> &str;
    fn category_base(&self) -> Score;
}

/// Splits an id into its alphabetic prefix and numeric suffix for ordering.
pub fn id_sort_key(id: &str) -> (String, u64, String) {
    let split = id
        .char_indices()
        .find(|(_, ch)| ch.is_ascii_digit())
        .map(|(idx, _)| idx)
        .unwrap_or(id.len());
    let (prefix, rest) = id.split_at(split);
    let digits: String = rest.chars().take_while(|ch| ch.is_ascii_digit()).collect();
    let tail = &rest[digits.len()..];
    (prefix.to_string(), digits.parse().unwrap_or(0), tail.to_string())
}

/// Categories ordered by descending base score with dense, tie-sharing ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList<T> {
    pub entries: Vec<(u32, T)>,
}

impl<T> RankedList<T> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Dense ranking: strictly higher base score means a lower (better) rank;
/// equal scores share a rank and are listed by ascending id; the next
/// distinct score takes rank + 1.
pub fn rank_categories<T: ScoredCategory>(categories: Vec<T>) -> RankedList<T> {
    let mut items = categories;
    items.sort_by(|a, b| {
        b.category_base()
            .cmp(&a.category_base())
            .then_with(|| id_sort_key(a.category_id()).cmp(&id_sort_key(b.category_id())))
    });
    let mut entries = Vec::with_capacity(items.len());
    let mut rank = 0u32;
    let mut previous: Option<Score> = None;
    for item in items {
        let score = item.category_base();
        if previous != Some(score) {
            rank += 1;
            previous = Some(score);
        }
        entries.push((rank, item));
    }
    RankedList { entries }
}

/// How the environmental (overall) score moved against the base score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImpactDirection {
    HigherThanAssumed,
    LowerThanAssumed,
    AsAssumed,
}

impl ImpactDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            ImpactDirection::HigherThanAssumed => "higher than assumed",
            ImpactDirection::LowerThanAssumed => "lower than assumed",
            ImpactDirection::AsAssumed => "as assumed",
        }
    }
}

/// Compares an overall (environmental) score against the base score.
pub fn impact_direction(base: Score, overall: Score) -> ImpactDirection {
    match overall.cmp(&base) {
        std::cmp::Ordering::Greater => ImpactDirection::HigherThanAssumed,
        std::cmp::Ordering::Less => ImpactDirection::LowerThanAssumed,
        std::cmp::Ordering::Equal => ImpactDirection::AsAssumed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(s: &str) -> CvssVector {
        CvssVector::parse(s).expect("vector parses")
    }

    #[test]
    fn base_score_reference_values() {
        assert_eq!(
            base_score(&vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H")).value(),
            9.8
        );
        assert_eq!(
            base_score(&vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H")).value(),
            10.0
        );
        // Zero impact forces a zero score regardless of exploitability.
        assert_eq!(
            base_score(&vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N")).value(),
            0.0
        );
        assert_eq!(
            base_score(&vector("CVSS:3.1/AV:L/AC:H/PR:H/UI:R/S:U/C:L/I:N/A:N")).value(),
            1.8
        );
    }

    #[test]
    fn environmental_falls_back_to_base_when_undefined() {
        let v = vector("CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H");
        assert_eq!(environmental_score(&v), base_score(&v));
    }

    #[test]
    fn environmental_requirements_scale_the_score() {
        let v = vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/CR:L/IR:L/AR:L");
        let env = environmental_score(&v);
        assert!(env.value() < 9.8);
        assert_eq!(env.value(), 8.0);
    }

    #[test]
    fn environmental_can_raise_a_zero_impact_vector() {
        let v = vector("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N/MA:H");
        assert_eq!(base_score(&v).value(), 0.0);
        let env = environmental_score(&v);
        assert!(env.value() > 0.0);
        assert_eq!(env.value(), 7.5);
    }

    #[test]
    fn severity_band_edges() {
        assert_eq!(severity_band(0.0).unwrap(), Severity::None);
        assert_eq!(severity_band(0.1).unwrap(), Severity::Low);
        assert_eq!(severity_band(3.9).unwrap(), Severity::Low);
        assert_eq!(severity_band(4.0).unwrap(), Severity::Medium);
        assert_eq!(severity_band(6.9).unwrap(), Severity::Medium);
        assert_eq!(severity_band(7.0).unwrap(), Severity::High);
        assert_eq!(severity_band(8.9).unwrap(), Severity::High);
        assert_eq!(severity_band(9.0).unwrap(), Severity::Critical);
        assert_eq!(severity_band(10.0).unwrap(), Severity::Critical);
        assert_eq!(severity_band(10.1), Err(CvssError::ScoreOutOfRange(10.1)));
        assert_eq!(severity_band(4.05), Err(CvssError::NotOneDecimal(4.05)));
    }

    #[test]
    fn vector_string_round_trip() {
        let cases = [
            "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
            "CVSS:3.1/AV:P/AC:H/PR:H/UI:R/S:C/C:N/I:L/A:H",
            "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/CR:H/IR:M/AR:L/MAV:A/MS:C/MA:N",
        ];
        for case in cases {
            assert_eq!(vector(case).to_vector_string(), case);
        }
    }

    #[test]
    fn vector_parse_rejects_bad_input() {
        assert_eq!(
            CvssVector::parse("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
            Err(CvssError::MissingPrefix)
        );
        assert_eq!(
            CvssVector::parse("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H"),
            Err(CvssError::MissingMetric("A"))
        );
        assert_eq!(
            CvssVector::parse("CVSS:3.1/AV:N/AV:L/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
            Err(CvssError::DuplicateMetric("AV".into()))
        );
        assert_eq!(
            CvssVector::parse("CVSS:3.1/AV:Q/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"),
            Err(CvssError::IllegalValue {
                metric: "AV".into(),
                value: "Q".into()
            })
        );
        assert_eq!(
            CvssVector::parse("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H/ZZ:Q"),
            Err(CvssError::UnknownMetric("ZZ".into()))
        );
    }

    #[test]
    fn ranking_is_dense_with_shared_ranks() {
        struct Tc(&'static str, u16);
        impl ScoredCategory for Tc {
            fn category_id(&self) -> &str {
                self.0
            }
            fn category_base(&self) -> Score {
                Score::from_tenths(self.1).unwrap()
            }
        }
        let ranked = rank_categories(vec![
            Tc("TC10", 50),
            Tc("TC2", 50),
            Tc("TC1", 90),
            Tc("TC3", 37),
        ]);
        let got: Vec<(u32, &str)> = ranked.entries.iter().map(|(r, t)| (*r, t.0)).collect();
        assert_eq!(got, vec![(1, "TC1"), (2, "TC2"), (2, "TC10"), (3, "TC3")]);
    }

    #[test]
    fn ranking_empty_set_is_empty() {
        struct Tc;
        impl ScoredCategory for Tc {
            fn category_id(&self) -> &str {
                ""
            }
            fn category_base(&self) -> Score {
                Score(0)
            }
        }
        assert!(rank_categories(Vec::<Tc>::new()).is_empty());
    }

    #[test]
    fn impact_direction_comparisons() {
        let s = |t| Score::from_tenths(t).unwrap();
        assert_eq!(
            impact_direction(s(68), s(77)),
            ImpactDirection::HigherThanAssumed
        );
        assert_eq!(
            impact_direction(s(90), s(79)),
            ImpactDirection::LowerThanAssumed
        );
        assert_eq!(impact_direction(s(40), s(40)), ImpactDirection::AsAssumed);
    }

    #[test]
    fn score_display_has_one_decimal() {
        assert_eq!(Score::from_tenths(98).unwrap().to_string(), "9.8");
        assert_eq!(Score::from_tenths(100).unwrap().to_string(), "10.0");
        assert_eq!(Score::from_tenths(0).unwrap().to_string(), "0.0");
    }
}
