//! Cluster profiling: member counts, policy-group saturation, and the
//! policies in force across every member state-year.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::cut::ClusterAssignment;
use crate::error::{Error, Result};
use crate::ingest::policy::StateYearPolicyMatrix;

pub const UNGROUPED: &str = "ungrouped";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: u32,
    pub member_count: usize,
    /// Policy group -> mean in-force proportion over member rows and the
    /// group's policies.
    pub group_proportions: BTreeMap<String, f64>,
    /// Policies in force in every member state-year.
    pub universal_policies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub profiles: Vec<ClusterProfile>,
}

/// Profile each cluster of the assignment over the policy matrix. Policies
/// absent from the group map fall into the "ungrouped" group.
pub fn summarize_clusters(
    assignment: &ClusterAssignment,
    matrix: &StateYearPolicyMatrix,
    policy_group_map: &BTreeMap<String, String>,
) -> Result<ClusterSummary> {
    if assignment.keys != matrix.row_keys {
        return Err(Error::Data(
            "cluster assignment and policy matrix rows do not match".into(),
        ));
    }
    let group_of: Vec<&str> = matrix
        .col_keys
        .iter()
        .map(|id| policy_group_map.get(id).map(|g| g.as_str()).unwrap_or(UNGROUPED))
        .collect();
    let mut groups: Vec<&str> = group_of.clone();
    groups.sort_unstable();
    groups.dedup();

    let p = matrix.n_cols();
    let mut profiles = Vec::new();
    for cluster in 1..=assignment.k {
        let members: Vec<usize> = assignment
            .leaf_labels
            .iter()
            .enumerate()
            .filter(|(_, &label)| label == cluster)
            .map(|(i, _)| i)
            .collect();
        let mut col_totals = vec![0usize; p];
        for &row in &members {
            for (j, total) in col_totals.iter_mut().enumerate() {
                *total += matrix.cell(row, j) as usize;
            }
        }
        let mut group_sum: BTreeMap<&str, (f64, usize)> = groups.iter().map(|&g| (g, (0.0, 0))).collect();
        for (j, &group) in group_of.iter().enumerate() {
            let entry = group_sum.get_mut(group).unwrap();
            if !members.is_empty() {
                entry.0 += col_totals[j] as f64 / members.len() as f64;
            }
            entry.1 += 1;
        }
        let group_proportions = group_sum
            .into_iter()
            .map(|(g, (sum, count))| (g.to_string(), if count > 0 { sum / count as f64 } else { 0.0 }))
            .collect();
        let universal_policies = matrix
            .col_keys
            .iter()
            .enumerate()
            .filter(|(j, _)| !members.is_empty() && col_totals[*j] == members.len())
            .map(|(_, id)| id.clone())
            .collect();
        profiles.push(ClusterProfile {
            cluster,
            member_count: members.len(),
            group_proportions,
            universal_policies,
        });
    }
    Ok(ClusterSummary { profiles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateCode;

    fn st(code: &str) -> StateCode {
        StateCode::parse(code).unwrap()
    }

    fn fixture() -> (ClusterAssignment, StateYearPolicyMatrix, BTreeMap<String, String>) {
        let keys = vec![(st("AK"), 2010), (st("AL"), 2010), (st("AR"), 2010)];
        let matrix = StateYearPolicyMatrix {
            row_keys: keys.clone(),
            col_keys: vec!["nal.a".into(), "nal.b".into(), "pdmp.a".into()],
            cells: vec![
                1, 1, 0, // AK
                1, 0, 0, // AL
                0, 0, 0, // AR
            ],
        };
        let assignment = ClusterAssignment {
            k: 2,
            leaf_labels: vec![1, 1, 2],
            keys,
        };
        let mut groups = BTreeMap::new();
        groups.insert("nal.a".to_string(), "NAL".to_string());
        groups.insert("nal.b".to_string(), "NAL".to_string());
        (assignment, matrix, groups)
    }

    #[test]
    fn all_zero_cluster_has_empty_profile() {
        let (assignment, matrix, groups) = fixture();
        let summary = summarize_clusters(&assignment, &matrix, &groups).unwrap();
        let c2 = &summary.profiles[1];
        assert_eq!(c2.member_count, 1);
        assert!(c2.group_proportions.values().all(|&v| v == 0.0));
        assert!(c2.universal_policies.is_empty());
    }

    #[test]
    fn singleton_cluster_universal_list_is_its_row() {
        let keys = vec![(st("AK"), 2010)];
        let matrix = StateYearPolicyMatrix {
            row_keys: keys.clone(),
            col_keys: vec!["a".into(), "b".into()],
            cells: vec![1, 0],
        };
        let assignment = ClusterAssignment {
            k: 1,
            leaf_labels: vec![1],
            keys,
        };
        let summary = summarize_clusters(&assignment, &matrix, &BTreeMap::new()).unwrap();
        assert_eq!(summary.profiles[0].universal_policies, vec!["a".to_string()]);
    }

    #[test]
    fn unmapped_policies_are_ungrouped() {
        let (assignment, matrix, groups) = fixture();
        let summary = summarize_clusters(&assignment, &matrix, &groups).unwrap();
        let c1 = &summary.profiles[0];
        assert!(c1.group_proportions.contains_key(UNGROUPED));
        // NAL group over cluster 1: nal.a = 2/2, nal.b = 1/2 -> mean 0.75
        assert!((c1.group_proportions["NAL"] - 0.75).abs() < 1e-12);
        assert_eq!(c1.universal_policies, vec!["nal.a".to_string()]);
    }

    #[test]
    fn member_counts_cover_all_rows() {
        let (assignment, matrix, groups) = fixture();
        let summary = summarize_clusters(&assignment, &matrix, &groups).unwrap();
        let total: usize = summary.profiles.iter().map(|p| p.member_count).sum();
        assert_eq!(total, matrix.n_rows());
    }
}
