use crate::error::{Error, Result};
use crate::verdict::Fuel;

use super::direct::DirectEvaluator;
use super::engine::Engine;
use super::instance::Instance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub x: u64,
    pub n: u64,
    pub engine: bool,
    pub direct: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// `(x, n, member)` decided identically by both evaluators.
    pub agreements: Vec<(u64, u64, bool)>,
    pub disagreements: Vec<Disagreement>,
    /// Queries at least one evaluator left undecided.
    pub undetermined: Vec<(u64, u64)>,
    pub violations: Vec<Error>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty() && self.violations.is_empty()
    }
}

/// Answers every query with both the engine and direct recursion and
/// compares the decided answers.
pub fn cross_validate(
    instance: &Instance,
    queries: &[(u64, u64)],
    fuel_per_query: u64,
    depth_budget: u32,
) -> Result<ValidationReport> {
    let mut engine = Engine::new(instance.clone());
    let mut direct = DirectEvaluator::new(instance, depth_budget);
    let mut report = ValidationReport::default();
    for &(x, n) in queries {
        let a = match engine.membership(x, n, &mut Fuel::new(fuel_per_query)) {
            Ok(v) => v,
            Err(e @ Error::PremiseViolation { .. }) => {
                report.violations.push(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let b = match direct.membership(x, n, &mut Fuel::new(fuel_per_query)) {
            Ok(v) => v,
            Err(e @ Error::PremiseViolation { .. }) => {
                report.violations.push(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        match (a.decision(), b.decision()) {
            (Some(p), Some(q)) if p == q => report.agreements.push((x, n, p)),
            (Some(engine), Some(direct)) => report.disagreements.push(Disagreement { x, n, engine, direct }),
            _ => report.undetermined.push((x, n)),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgh::{fgh_instance, pair_code};

    #[test]
    fn examples() {
        let inst = fgh_instance();
        let table = [[1u64, 2, 3, 4], [0, 2, 4, 6], [0, 2, 8, 24]];
        let queries: Vec<(u64, u64)> = (0..3u64)
            .flat_map(|k| (0..4u64).map(move |m| (k, pair_code(m, table[k as usize][m as usize]).unwrap())))
            .collect();
        let report = cross_validate(&inst, &queries, 10_000_000, 16).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.agreements.len(), queries.len());
        assert!(report.agreements.iter().all(|(_, _, member)| *member));

        let report = cross_validate(&inst, &[(1, pair_code(2, 5).unwrap())], 1_000_000, 16).unwrap();
        assert_eq!(report.agreements, vec![(1, pair_code(2, 5).unwrap(), false)]);

        let report = cross_validate(&inst, &[], 10, 1).unwrap();
        assert!(report.agreements.is_empty() && report.undetermined.is_empty() && report.is_clean());
    }
}
