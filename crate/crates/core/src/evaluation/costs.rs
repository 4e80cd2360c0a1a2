use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::Dataset;
use crate::models::RelErrorCertificate;
use crate::solution::IntegralSolution;

/// How a group's connection costs are summarised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// Average distance over the group.
    #[default]
    Abs,
    /// Total distance divided by the group's own k-median optimum.
    Rel,
    /// Total distance, unnormalised.
    AbsTotal,
}

impl CostKind {
    /// Factor turning a group's total distance into its cost.
    pub fn scales(self, dataset: &Dataset, certificate: Option<&RelErrorCertificate>) -> Result<Vec<f64>> {
        match self {
            CostKind::Abs => Ok(dataset.groups().iter().map(|g| 1.0 / g.len() as f64).collect()),
            CostKind::AbsTotal => Ok(vec![1.0; dataset.num_groups()]),
            CostKind::Rel => {
                let cert = certificate.ok_or_else(|| invalid("relative error needs a certificate"))?;
                if cert.values().len() != dataset.num_groups() {
                    return Err(invalid(format!(
                        "certificate has {} values for {} groups",
                        cert.values().len(),
                        dataset.num_groups()
                    )));
                }
                Ok(cert.values().iter().map(|v| 1.0 / v).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCost {
    pub name: String,
    pub size: usize,
    pub total: f64,
    pub average: f64,
    pub relative: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub kind: CostKind,
    pub groups: Vec<GroupCost>,
    pub max_average: f64,
}

impl GroupReport {
    pub fn averages(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.average).collect()
    }
}

pub fn group_costs(
    dataset: &Dataset,
    solution: &IntegralSolution,
    kind: CostKind,
    certificate: Option<&RelErrorCertificate>,
) -> Result<GroupReport> {
    if solution.connection.len() != dataset.len() {
        return Err(invalid(format!(
            "solution covers {} of {} points",
            solution.connection.len(),
            dataset.len()
        )));
    }
    if kind == CostKind::Rel && certificate.is_none() {
        return Err(invalid("relative error needs a certificate"));
    }
    let groups: Vec<GroupCost> = dataset
        .groups()
        .iter()
        .enumerate()
        .map(|(g, members)| {
            let total: f64 = members.iter().map(|&u| solution.connection[u]).sum();
            GroupCost {
                name: dataset.group_names()[g].clone(),
                size: members.len(),
                total,
                average: total / members.len() as f64,
                relative: certificate.map(|c| total / c.value(g)),
            }
        })
        .collect();
    let max_average = groups.iter().map(|g| g.average).fold(f64::NEG_INFINITY, f64::max);
    Ok(GroupReport {
        kind,
        groups,
        max_average,
    })
}

/// Largest group cost under the report's kind.
pub fn fair_objective(report: &GroupReport) -> Result<f64> {
    if report.groups.is_empty() {
        return Err(invalid("report has no groups"));
    }
    let value = |g: &GroupCost| match report.kind {
        CostKind::Abs => Ok(g.average),
        CostKind::AbsTotal => Ok(g.total),
        CostKind::Rel => g
            .relative
            .ok_or_else(|| invalid(format!("group {} lacks a relative cost", g.name))),
    };
    report
        .groups
        .iter()
        .map(value)
        .try_fold(f64::NEG_INFINITY, |acc, v| Ok(acc.max(v?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::build_dataset;
    use crate::metric::{build_metric, DistanceMode};

    fn pair() -> Dataset {
        build_dataset(vec![vec![-1.0], vec![1.0]], vec!["p".into(), "q".into()]).unwrap()
    }

    #[test]
    fn singleton_groups_on_a_line() {
        let d = pair();
        let m = build_metric(&d, DistanceMode::Euclidean);
        let s = IntegralSolution::nearest(vec![0], &m).unwrap();
        let r = group_costs(&d, &s, CostKind::Abs, None).unwrap();
        assert_eq!(r.averages(), vec![0.0, 2.0]);
        assert_eq!(fair_objective(&r).unwrap(), 2.0);
        assert_eq!(r.max_average, 2.0);
    }

    #[test]
    fn relative_cost_against_own_value_is_one() {
        let d = pair();
        let m = build_metric(&d, DistanceMode::Euclidean);
        let s = IntegralSolution::nearest(vec![0], &m).unwrap();
        let cert = RelErrorCertificate::new(vec![1.0, 2.0], "fixed").unwrap();
        let r = group_costs(&d, &s, CostKind::Rel, Some(&cert)).unwrap();
        assert_eq!(r.groups[1].relative, Some(1.0));
        assert!(group_costs(&d, &s, CostKind::Rel, None).is_err());
    }

    #[test]
    fn empty_report_has_no_objective() {
        let r = GroupReport {
            kind: CostKind::Abs,
            groups: vec![],
            max_average: 0.0,
        };
        assert!(fair_objective(&r).is_err());
    }
}
