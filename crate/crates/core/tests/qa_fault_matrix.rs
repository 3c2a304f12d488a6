mod common;

use ardkit::qa::{registry, run_rules, Severity};
use common::qa::{clean, clean_percentages, faults};

#[test]
fn clean_fixtures_have_no_findings() {
    for (d, ctx) in [clean(), clean_percentages()] {
        let report = run_rules(&d, &ctx);
        assert!(report.pass);
        assert!(report.findings.is_empty(), "{}", report.to_text());
    }
}

#[test]
fn every_rule_has_a_fault_fixture() {
    let covered: Vec<&str> = faults().iter().map(|f| f.rule_id).collect();
    for rule in registry() {
        assert!(covered.contains(&rule.rule_id), "no fixture for {}", rule.rule_id);
    }
}

#[test]
fn each_fault_yields_exactly_one_finding() {
    for f in faults() {
        let report = run_rules(&f.dataset, &f.ctx);
        assert_eq!(report.findings.len(), 1, "{}: {}", f.rule_id, report.to_text());
        let finding = &report.findings[0];
        assert_eq!(finding.rule_id, f.rule_id);
        assert_eq!(finding.severity, f.severity);
        assert_eq!(report.pass, f.severity != Severity::Error);
    }
}

#[test]
fn messages_match_documented_wording() {
    let by_rule = |id: &str| {
        let f = faults().into_iter().find(|f| f.rule_id == id).unwrap();
        run_rules(&f.dataset, &f.ctx).findings.remove(0).message
    };
    assert_eq!(by_rule("temporal.coverage_gap"), "temporal coverage gap: 2015");
    assert!(by_rule("mass.conservation").starts_with("mass conservation violated"));
    assert!(by_rule("indicator.fully_removed").starts_with("indicator fully removed"));
    assert_eq!(by_rule("correspondence.ratio_sum"), "ratios for 101 sum to 0.9");
}

#[test]
fn run_rules_is_read_only_and_deterministic() {
    for f in faults() {
        let before = f.dataset.clone();
        let a = run_rules(&f.dataset, &f.ctx);
        assert_eq!(f.dataset, before);
        assert_eq!(a, run_rules(&f.dataset, &f.ctx));
    }
}
