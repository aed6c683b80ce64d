//! Golden-file tests for the stable text formats: the rendered assessment
//! report (text and dot) and the trace/capture line formats.
//!
//! Regenerate with `SDNSEC_BLESS=1 cargo test -p sdnsec --test golden` and
//! review the diff.

use std::path::PathBuf;

use sdnsec::kb;
use sdnsec::pipeline::{self, AssessOptions, RenderOptions, ReportFormat};
use sdnsec::sim::new_sim;
use sdnsec::topo::default_testbed;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var("SDNSEC_BLESS").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        actual,
        expected,
        "{name} drifted from its golden file (re-bless with SDNSEC_BLESS=1 if intended)"
    );
}

fn seeded_report() -> pipeline::AssessmentReport {
    pipeline::assess(
        kb::builtin(),
        &default_testbed(),
        &AssessOptions {
            attacks: 3,
            seed: 42,
            harden: vec![],
            timestamp: "2024-01-01T00:00:00Z".into(),
        },
    )
    .unwrap()
}

#[test]
fn golden_report_text() {
    let text = pipeline::render_report(
        &seeded_report(),
        ReportFormat::Text,
        &RenderOptions::default(),
    );
    check("assess_seed42.txt", &text);
}

#[test]
fn golden_report_dot() {
    let dot = pipeline::render_report(
        &seeded_report(),
        ReportFormat::Dot,
        &RenderOptions::default(),
    );
    check("assess_seed42.dot", &dot);
}

// A short deterministic script exercising keepalives, cold and warm pings,
// a blocked ping, and a telnet session.
fn sample_sim() -> sdnsec::sim::Sim {
    let mut sim = new_sim(default_testbed(), 7).unwrap();
    sim.run_until(1.5).unwrap();
    sim.ping("h1", "h4").unwrap();
    sim.ping("h1", "h4").unwrap();
    sim.ping("h1", "h2").unwrap();
    sim.run_until(2.5).unwrap();
    sim.telnet_session("h2", "h5", "operator", "changeme").unwrap();
    sim.run_until(3.0).unwrap();
    sim
}

#[test]
fn golden_trace_export() {
    let sim = sample_sim();
    check("trace_sample.txt", &sim.trace_log().to_text());
}

#[test]
fn golden_capture_export() {
    let mut sim = new_sim(default_testbed(), 7).unwrap();
    let tap = sim.tap_link("c1-s1").unwrap();
    sim.run_until(1.5).unwrap();
    sim.ping("h1", "h4").unwrap();
    sim.run_until(2.5).unwrap();
    sim.telnet_session("h1", "h7", "operator", "changeme").unwrap();
    sim.run_until(3.0).unwrap();
    let capture = sim.drain_tap(tap);
    check("capture_sample.txt", &capture.to_text());
}
