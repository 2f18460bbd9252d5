//! Randomized properties over the clustering and ingest paths.

mod common;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use proptest::prelude::*;

use policy_bundles::cluster::cut::cut_tree;
use policy_bundles::cluster::gower::{gower_dissimilarity, BinaryMode};
use policy_bundles::cluster::linkage::agglomerate_complete_linkage;
use policy_bundles::ingest::outcomes::{CovariateRecord, OutcomeRecord};
use policy_bundles::ingest::panel::{assemble_panel, PanelLags};
use policy_bundles::ingest::policy::{derive_in_force_years, PolicyRecord, StateYearPolicyMatrix};
use policy_bundles::states::{Gender, StateCode};

fn binary_matrix(n: usize, p: usize, bits: &[bool]) -> StateYearPolicyMatrix {
    StateYearPolicyMatrix {
        row_keys: (0..n)
            .map(|i| (StateCode::all().nth(i % 51).unwrap(), 2000 + (i / 51) as i32))
            .collect(),
        col_keys: (0..p).map(|j| format!("v{j}")).collect(),
        cells: bits.iter().map(|&b| u8::from(b)).collect(),
    }
}

proptest! {
    #[test]
    fn gower_matches_brute_force(
        n in 2usize..12,
        p in 1usize..10,
        bits in proptest::collection::vec(any::<bool>(), 12 * 10),
    ) {
        let matrix = binary_matrix(n, p, &bits[..n * p]);
        let symmetric = gower_dissimilarity(&matrix, BinaryMode::Symmetric, false).unwrap();
        let asymmetric = gower_dissimilarity(&matrix, BinaryMode::Asymmetric, false).unwrap();
        for i in 1..n {
            for j in 0..i {
                let mismatches = (0..p)
                    .filter(|&c| matrix.cell(i, c) != matrix.cell(j, c))
                    .count();
                prop_assert_eq!(symmetric.get(i, j), mismatches as f64 / p as f64);

                let informative = (0..p)
                    .filter(|&c| matrix.cell(i, c) != 0 || matrix.cell(j, c) != 0)
                    .count();
                let expected = if informative == 0 {
                    0.0
                } else {
                    mismatches as f64 / informative as f64
                };
                prop_assert_eq!(asymmetric.get(i, j), expected);
                if informative == 0 {
                    prop_assert!(asymmetric.empty_denominator_pairs.contains(&(i, j)));
                }
            }
        }
    }

    #[test]
    fn linkage_heights_are_monotone_and_permutation_invariant(
        n in 2usize..20,
        values in proptest::collection::vec(0.0f64..1.0, 20 * 19 / 2),
        seed in any::<u64>(),
    ) {
        let condensed = values[..n * (n - 1) / 2].to_vec();
        let d = common::matrix_from_condensed(n, condensed);
        let dend = agglomerate_complete_linkage(&d);
        prop_assert_eq!(dend.merges.len(), n - 1);
        for pair in dend.merges.windows(2) {
            prop_assert!(pair[0].height <= pair[1].height);
        }

        // Permute the leaves; the multiset of merge heights is unchanged.
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = common::SplitMix(seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.below(i as u64 + 1) as usize);
        }
        let permuted = common::matrix_from_condensed(
            n,
            (0..n * (n - 1) / 2)
                .map(|idx| {
                    let mut i = 1usize;
                    while (i + 1) * i / 2 <= idx {
                        i += 1;
                    }
                    let j = idx - i * (i - 1) / 2;
                    d.get(perm[i], perm[j])
                })
                .collect(),
        );
        let other = agglomerate_complete_linkage(&permuted);
        let mut a: Vec<f64> = dend.merges.iter().map(|m| m.height).collect();
        let mut b: Vec<f64> = other.merges.iter().map(|m| m.height).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cuts_nest_and_have_k_labels(
        n in 2usize..16,
        values in proptest::collection::vec(0.0f64..1.0, 16 * 15 / 2),
    ) {
        let d = common::matrix_from_condensed(n, values[..n * (n - 1) / 2].to_vec());
        let dend = agglomerate_complete_linkage(&d);
        let mut previous = cut_tree(&dend, 1).unwrap().leaf_labels;
        for k in 2..=n {
            let labels = cut_tree(&dend, k).unwrap().leaf_labels;
            let distinct: std::collections::BTreeSet<u32> = labels.iter().copied().collect();
            prop_assert_eq!(distinct.len(), k);
            prop_assert_eq!(distinct.iter().copied().max(), Some(k as u32));
            for a in 1..n {
                for b in 0..a {
                    if labels[a] == labels[b] {
                        prop_assert_eq!(previous[a], previous[b]);
                    }
                }
            }
            previous = labels;
        }
    }

    #[test]
    fn in_force_rule_matches_day_count(
        start_offset in 0u64..3650,
        duration in 0u64..1500,
        open_ended in any::<bool>(),
        year in 2005i32..2014,
    ) {
        let state = StateCode::parse("WA").unwrap();
        let start = NaiveDate::from_ymd_opt(2004, 1, 1).unwrap()
            + chrono::Days::new(start_offset);
        let end = if open_ended {
            None
        } else {
            Some(start + chrono::Days::new(duration))
        };
        let record = PolicyRecord {
            state,
            policy_id: "law.x".to_string(),
            effective_date: start,
            valid_through: end,
        };
        let matrix = derive_in_force_years(&[record], &[state], year..=year);
        let mut covered = 0i64;
        let mut total = 0i64;
        let mut day = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        let last = NaiveDate::from_ymd_opt(year, 12, 31).unwrap();
        while day <= last {
            total += 1;
            if day >= start && end.map_or(true, |e| day <= e) {
                covered += 1;
            }
            day = day.succ_opt().unwrap();
        }
        prop_assert_eq!(matrix.cell(0, 0), u8::from(covered * 2 > total));
    }

    #[test]
    fn deaths_lag_shifts_outcome_history(
        deaths in proptest::collection::vec(1u64..500, 12),
        lag in 1u32..4,
    ) {
        let state = StateCode::parse("OH").unwrap();
        let mut outcomes = Vec::new();
        let mut covariates = Vec::new();
        let mut assignment = BTreeMap::new();
        for (i, &d) in deaths.iter().enumerate() {
            let year = 2005 + i as i32;
            for gender in [Gender::Female, Gender::Male] {
                outcomes.push(OutcomeRecord {
                    state,
                    year,
                    gender,
                    deaths: if gender == Gender::Male { d + 7 } else { d },
                    population: 2_000_000,
                });
            }
            covariates.push(CovariateRecord {
                state,
                year,
                prescribing_rate: 80.0,
                gini: 0.45,
                income: 52.0,
            });
            assignment.insert((state, year), 1);
        }
        let lags = PanelLags { cluster_lags: vec![1], deaths_lags: vec![lag] };
        let window = (2005 + lag as i32)..=2016;
        let (panel, report) =
            assemble_panel(&outcomes, &covariates, &assignment, window, &lags).unwrap();
        prop_assert_eq!(report.incomplete_rows, 0);
        for row in &panel {
            let source = deaths[(row.year - 2005 - lag as i32) as usize];
            let expected = if row.gender == Gender::Male { source + 7 } else { source };
            prop_assert_eq!(row.deaths_lag[&lag], expected);
        }
    }
}
