use super::{run_rules, QaContext, QaError, QaReport};
use crate::cleaning::{clean, CleaningLog, CleaningRuleSet};
use crate::model::Dataset;

pub const DEFAULT_ITERATION_CAP: usize = 10;

#[derive(Debug, Clone)]
pub struct LoopOutcome {
    pub dataset: Dataset,
    pub log: CleaningLog,
    pub report: QaReport,
    /// 1-based index of the revision that passed.
    pub iterations: usize,
}

/// Cleans with each rule revision in turn and checks the result, stopping at
/// the first passing revision.
pub fn clean_until_pass(
    input: &Dataset,
    revisions: &[CleaningRuleSet],
    ctx: &QaContext,
    cap: usize,
) -> Result<LoopOutcome, QaError> {
    if cap == 0 {
        return Err(QaError::ZeroCap);
    }
    let default = [CleaningRuleSet::default()];
    let revisions = if revisions.is_empty() { &default[..] } else { revisions };
    let mut last = String::new();
    for (i, rules) in revisions.iter().enumerate().take(cap) {
        match clean(input, rules) {
            Ok((dataset, log)) => {
                let report = run_rules(&dataset, ctx);
                if report.pass {
                    return Ok(LoopOutcome { dataset, log, report, iterations: i + 1 });
                }
                last = report
                    .findings
                    .iter()
                    .find(|f| f.severity == super::Severity::Error)
                    .map(|f| format!("{} at {}: {}", f.rule_id, f.locator, f.message))
                    .unwrap_or_default();
            }
            Err(e) => last = e.to_string(),
        }
    }
    if revisions.len() >= cap {
        Err(QaError::NonConvergence { cap, last })
    } else {
        Err(QaError::Unresolved { iterations: revisions.len(), last })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleaning::DedupePolicy;
    use crate::model::*;

    fn dup() -> Dataset {
        let g = RegionCode::new("A", GeoLevel::Sa3, BoundaryEdition::Asgs2016).unwrap();
        let r = StandardRecord::new(RecordKey::new(g, 2016, "ALL", "P"), CellValue::count(3.0));
        Dataset::new(
            Indicator::new("i", "I", NestDomain::Healthy, ValueKind::Count, "s"),
            BoundaryEdition::Asgs2016,
            GeoLevel::Sa3,
            vec![r.clone(), r],
        )
    }

    #[test]
    fn revision_resolves_duplicates() {
        let fix = CleaningRuleSet { dedupe_policy: DedupePolicy::KeepFirst, ..Default::default() };
        let out = clean_until_pass(&dup(), &[CleaningRuleSet::default(), fix], &QaContext::new(), 10).unwrap();
        assert_eq!(out.iterations, 2);
        assert_eq!(out.dataset.len(), 1);
    }

    #[test]
    fn exhausted_revisions_and_cap() {
        let bad = CleaningRuleSet::default();
        assert!(matches!(
            clean_until_pass(&dup(), std::slice::from_ref(&bad), &QaContext::new(), 10),
            Err(QaError::Unresolved { iterations: 1, .. })
        ));
        let many = vec![bad; 12];
        assert!(matches!(
            clean_until_pass(&dup(), &many, &QaContext::new(), 3),
            Err(QaError::NonConvergence { cap: 3, .. })
        ));
        assert!(matches!(clean_until_pass(&dup(), &many, &QaContext::new(), 0), Err(QaError::ZeroCap)));
    }
}
