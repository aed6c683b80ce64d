//! Property tests for module invariants: scoring monotonicity and range,
//! band partitioning, vector-string round trips, capture completeness,
//! ping/PacketIn conservation, and stall soundness.

use proptest::prelude::*;

use sdnsec::cvss::{
    base_score, environmental_score, severity_band, AttackComplexity, AttackVector, CvssVector,
    EnvironmentalMetrics, ImpactMetric, PrivilegesRequired, Requirement, Scope, Severity,
    UserInteraction,
};
use sdnsec::sim::new_sim;
use sdnsec::topo::default_testbed;

const AVS: [AttackVector; 4] = [
    AttackVector::Network,
    AttackVector::Adjacent,
    AttackVector::Local,
    AttackVector::Physical,
];
const ACS: [AttackComplexity; 2] = [AttackComplexity::Low, AttackComplexity::High];
const PRS: [PrivilegesRequired; 3] = [
    PrivilegesRequired::None,
    PrivilegesRequired::Low,
    PrivilegesRequired::High,
];
const UIS: [UserInteraction; 2] = [UserInteraction::None, UserInteraction::Required];
const SCOPES: [Scope; 2] = [Scope::Unchanged, Scope::Changed];
const IMPACTS: [ImpactMetric; 3] = [ImpactMetric::None, ImpactMetric::Low, ImpactMetric::High];

fn all_base_vectors() -> Vec<CvssVector> {
    let mut vectors = Vec::with_capacity(2592);
    for av in AVS {
        for ac in ACS {
            for pr in PRS {
                for ui in UIS {
                    for scope in SCOPES {
                        for c in IMPACTS {
                            for i in IMPACTS {
                                for a in IMPACTS {
                                    vectors.push(CvssVector {
                                        attack_vector: av,
                                        attack_complexity: ac,
                                        privileges_required: pr,
                                        user_interaction: ui,
                                        scope,
                                        confidentiality: c,
                                        integrity: i,
                                        availability: a,
                                        environmental: EnvironmentalMetrics::default(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    vectors
}

fn raised(metric: ImpactMetric) -> Option<ImpactMetric> {
    match metric {
        ImpactMetric::None => Some(ImpactMetric::Low),
        ImpactMetric::Low => Some(ImpactMetric::High),
        ImpactMetric::High => None,
    }
}

#[test]
fn base_score_monotone_in_each_impact_metric() {
    for vector in all_base_vectors() {
        let score = base_score(&vector);
        for field in 0..3 {
            let mut bumped = vector;
            let current = match field {
                0 => &mut bumped.confidentiality,
                1 => &mut bumped.integrity,
                _ => &mut bumped.availability,
            };
            if let Some(next) = raised(*current) {
                *current = next;
                assert!(
                    base_score(&bumped) >= score,
                    "raising impact lowered the score: {vector} -> {bumped}"
                );
            }
        }
    }
}

#[test]
fn scores_stay_in_range_with_one_decimal() {
    for vector in all_base_vectors() {
        for score in [base_score(&vector), environmental_score(&vector)] {
            assert!(score.tenths() <= 100);
            let value = score.value();
            assert!((0.0..=10.0).contains(&value));
            assert_eq!((value * 10.0).round() / 10.0, value);
        }
    }
}

#[test]
fn severity_bands_partition_the_score_range() {
    let mut counts = [0usize; 5];
    for tenths in 0..=100u16 {
        let severity = severity_band(f64::from(tenths) / 10.0).unwrap();
        counts[match severity {
            Severity::None => 0,
            Severity::Low => 1,
            Severity::Medium => 2,
            Severity::High => 3,
            Severity::Critical => 4,
        }] += 1;
    }
    assert_eq!(counts, [1, 39, 30, 20, 11]);
}

fn arb_requirement() -> impl Strategy<Value = Requirement> {
    prop_oneof![
        Just(Requirement::NotDefined),
        Just(Requirement::Low),
        Just(Requirement::Medium),
        Just(Requirement::High),
    ]
}

fn arb_vector() -> impl Strategy<Value = CvssVector> {
    (
        (0usize..4, 0usize..2, 0usize..3, 0usize..2, 0usize..2),
        (0usize..3, 0usize..3, 0usize..3),
        (arb_requirement(), arb_requirement(), arb_requirement()),
        (
            proptest::option::of(0usize..4),
            proptest::option::of(0usize..2),
            proptest::option::of(0usize..3),
            proptest::option::of(0usize..2),
            proptest::option::of(0usize..2),
        ),
        (
            proptest::option::of(0usize..3),
            proptest::option::of(0usize..3),
            proptest::option::of(0usize..3),
        ),
    )
        .prop_map(
            |((av, ac, pr, ui, s), (c, i, a), (cr, ir, ar), (mav, mac, mpr, mui, ms), (mc, mi, ma))| {
                CvssVector {
                    attack_vector: AVS[av],
                    attack_complexity: ACS[ac],
                    privileges_required: PRS[pr],
                    user_interaction: UIS[ui],
                    scope: SCOPES[s],
                    confidentiality: IMPACTS[c],
                    integrity: IMPACTS[i],
                    availability: IMPACTS[a],
                    environmental: EnvironmentalMetrics {
                        confidentiality_requirement: cr,
                        integrity_requirement: ir,
                        availability_requirement: ar,
                        modified_attack_vector: mav.map(|x| AVS[x]),
                        modified_attack_complexity: mac.map(|x| ACS[x]),
                        modified_privileges_required: mpr.map(|x| PRS[x]),
                        modified_user_interaction: mui.map(|x| UIS[x]),
                        modified_scope: ms.map(|x| SCOPES[x]),
                        modified_confidentiality: mc.map(|x| IMPACTS[x]),
                        modified_integrity: mi.map(|x| IMPACTS[x]),
                        modified_availability: ma.map(|x| IMPACTS[x]),
                    },
                }
            },
        )
}

proptest! {
    #[test]
    fn vector_string_round_trips(vector in arb_vector()) {
        let printed = vector.to_vector_string();
        let parsed = CvssVector::parse(&printed).expect("canonical form parses");
        prop_assert_eq!(parsed, vector);
        prop_assert_eq!(parsed.to_vector_string(), printed);
    }
}

#[test]
fn capture_counts_equal_link_traversals() {
    let topology = default_testbed();
    let mut sim = new_sim(topology.clone(), 5).unwrap();
    let taps: Vec<(String, _)> = topology
        .links
        .iter()
        .map(|l| (l.id(), sim.tap_link(&l.id()).unwrap()))
        .collect();

    sim.run_until(1.5).unwrap();
    sim.ping("h1", "h4").unwrap();
    sim.ping("h1", "h2").unwrap();
    sim.run_until(2.5).unwrap();
    sim.telnet_session("h2", "h5", "user", "pw").unwrap();
    sim.run_until(4.0).unwrap();

    let trace = sim.trace_log().clone();
    for (link, tap) in taps {
        let captured = sim.drain_tap(tap).packets.len();
        let traversals = trace
            .entries
            .iter()
            .filter(|e| {
                e.event == "tx" && e.fields.iter().any(|(k, v)| k == "link" && v == &link)
            })
            .count();
        assert_eq!(captured, traversals, "tap on {link} missed traffic");
    }
}

#[test]
fn delivered_pings_cost_exactly_one_packet_in_when_cold() {
    use rand::{Rng, SeedableRng};
    let hosts: Vec<String> = default_testbed().hosts().map(|h| h.id.clone()).collect();
    for seed in 0..20u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut sim = new_sim(default_testbed(), seed).unwrap();
        let mut warm_pairs: Vec<(String, String)> = Vec::new();
        let mut expected_packet_ins = 0usize;
        let mut t = 0.0;
        for _ in 0..12 {
            let a = hosts[rng.gen_range(0..hosts.len())].clone();
            let b = hosts[rng.gen_range(0..hosts.len())].clone();
            if a == b {
                continue;
            }
            t += rng.gen_range(0.01..0.4); // stays far below the idle timeout
            sim.run_until(t).unwrap();
            let delivered = sim.ping(&a, &b).unwrap().is_delivered();
            if delivered && !warm_pairs.contains(&(a.clone(), b.clone())) {
                expected_packet_ins += 1;
                warm_pairs.push((a.clone(), b.clone()));
                warm_pairs.push((b, a));
            }
        }
        let packet_ins = sim
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
        assert_eq!(
            packet_ins, expected_packet_ins,
            "seed {seed}: cold deliveries and PacketIn count disagree"
        );
    }
}

#[test]
fn stall_flag_tracks_backlog_at_every_boundary() {
    let topology = default_testbed();
    let limit = topology.controller_config.syn_backlog_limit;
    let mut sim = new_sim(topology, 3).unwrap();
    sim.inject_syn_flood("atk1", 6653, 500_000, 10.0).unwrap();
    let mut t = 0.0;
    while t < 20.0 {
        t += 0.01;
        sim.run_until(t).unwrap();
        let state = sim.controller_state();
        assert_eq!(
            state.stalled,
            state.half_open > limit,
            "stall flag out of sync at t={t}: half_open={}",
            state.half_open
        );
    }
}
