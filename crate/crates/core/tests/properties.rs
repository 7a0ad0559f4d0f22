//! Property tests for the crate-wide invariants: permutation invariance of
//! ingestion, standardization round-trips, responsibility normalization,
//! fold partitioning, ARI symmetry, and SVR dual feasibility.

use proptest::prelude::*;

use zonecast_core::cluster::{e_step, GaussianComponent, MixtureModel};
use zonecast_core::cv::make_folds;
use zonecast_core::grid::{ingest_csv, write_dataset_csv, CSV_HEADER};
use zonecast_core::regress::{svr_train, KernelSpec, SvrParams};
use zonecast_core::scale::{standardize, Scaler};
use zonecast_core::synth::adjusted_rand_index_labels;

/// A small rectangular panel as CSV rows (without header).
fn panel_rows() -> impl Strategy<Value = Vec<String>> {
    (1usize..4, 1usize..4, 1usize..4, any::<u64>()).prop_map(|(nlat, nlon, nyears, seed)| {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) * 20.0 - 10.0
        };
        let mut rows = Vec::new();
        for i in 0..nlat {
            for j in 0..nlon {
                for y in 0..nyears {
                    let values: Vec<String> = (0..7).map(|_| next().to_string()).collect();
                    rows.push(format!(
                        "{},{},{},{}",
                        7.5 + 2.5 * i as f64,
                        67.5 + 2.5 * j as f64,
                        2000 + y,
                        values.join(",")
                    ));
                }
            }
        }
        rows
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingestion_is_permutation_invariant(rows in panel_rows(), perm_seed in any::<u64>()) {
        let csv = format!("{CSV_HEADER}\n{}\n", rows.join("\n"));
        let reference = ingest_csv(csv.as_bytes(), 2.5).unwrap();

        let mut shuffled = rows.clone();
        let mut state = perm_seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let csv = format!("{CSV_HEADER}\n{}\n", shuffled.join("\n"));
        let permuted = ingest_csv(csv.as_bytes(), 2.5).unwrap();
        prop_assert_eq!(&reference, &permuted);

        // Canonical export is identical as well.
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_dataset_csv(&reference, &mut a).unwrap();
        write_dataset_csv(&permuted, &mut b).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn standardize_centers_and_inverts(
        points in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..40)
    ) {
        let (zs, scaler) = standardize(&points).unwrap();
        for d in 0..3 {
            let mean: f64 = zs.iter().map(|z| z[d]).sum::<f64>() / zs.len() as f64;
            prop_assert!(mean.abs() < 1e-9, "dim {} mean {}", d, mean);
        }
        for (p, z) in points.iter().zip(&zs) {
            let back = scaler.inverse_point(z);
            for (a, b) in p.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn responsibilities_sum_to_one_even_far_from_components(
        points in prop::collection::vec(prop::collection::vec(-200f64..200.0, 2), 1..20),
        means in prop::collection::vec(prop::collection::vec(-200f64..200.0, 2), 1..5),
    ) {
        let k = means.len();
        let components: Vec<GaussianComponent> = means
            .into_iter()
            .map(|mean| GaussianComponent {
                weight: 1.0 / k as f64,
                mean,
                variance: vec![0.5, 2.0],
            })
            .collect();
        let model = MixtureModel {
            k,
            scaler: Scaler::identity(2),
            components,
            final_log_likelihood: 0.0,
        };
        for row in e_step(&points, &model) {
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12, "row sum {}", sum);
            prop_assert!(row.iter().all(|r| r.is_finite() && *r >= 0.0));
        }
    }

    #[test]
    fn folds_partition_any_index_set(n in 2usize..200, folds in 2usize..11, seed in any::<u64>()) {
        prop_assume!(n >= folds);
        let partition = make_folds(n, folds, seed).unwrap();
        let mut seen = vec![false; n];
        for fold in &partition {
            for &i in fold {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.into_iter().all(|s| s));
        let sizes: Vec<usize> = partition.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn ari_is_symmetric_bounded_and_relabel_invariant(
        labels in prop::collection::vec((0usize..4, 0usize..4), 2..30),
        shift in 0usize..4,
    ) {
        let a: Vec<usize> = labels.iter().map(|(x, _)| *x).collect();
        let b: Vec<usize> = labels.iter().map(|(_, y)| *y).collect();
        let ab = adjusted_rand_index_labels(&a, &b);
        let ba = adjusted_rand_index_labels(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!(ab <= 1.0 + 1e-12);

        let relabeled: Vec<usize> = a.iter().map(|&l| (l + shift) % 4).collect();
        prop_assert_eq!(adjusted_rand_index_labels(&a, &relabeled), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn svr_duals_stay_feasible(
        data in prop::collection::vec((-2f64..2.0, -2f64..2.0), 4..12),
        c in 0.5f64..20.0,
    ) {
        let x: Vec<Vec<f64>> = data.iter().map(|(a, _)| vec![*a]).collect();
        let y: Vec<f64> = data.iter().map(|(_, b)| *b).collect();
        let params = SvrParams {
            c,
            epsilon: 0.1,
            ..SvrParams::new(KernelSpec::Rbf { gamma: 1.0 })
        };
        let model = svr_train(&x, &y, &params).unwrap();
        let sum: f64 = model.dual_coefs.iter().sum();
        prop_assert!(sum.abs() <= 1e-8 * c * x.len() as f64);
        for &b in &model.dual_coefs {
            prop_assert!(b.abs() <= c + 1e-9);
            prop_assert!(b != 0.0);
        }
        prop_assert!(model.kkt_violation <= params.kkt_tol);
    }
}
