use lpframes::diagnostics::{disjoint_support_coefficient_bound, DisjointnessCertificate};
use lpframes::separation::min_distance_of;
use lpframes::{make_indicator, partition_uniformly_separated, refine, GridSpec, LatticeBox, PointFamily, SweepMode};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-20.0f64..20.0, d), 1..60))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_are_separated_and_refine(points in family(), t in 0.5f64..6.0) {
        let fam = PointFamily::new(points).unwrap();
        let part = partition_uniformly_separated(&fam, t).unwrap();
        prop_assert!(part.is_valid_for(&fam));
        for class in &part.classes {
            prop_assert!(min_distance_of(&fam, class) >= t);
        }
        let fine = refine(&fam, &part, 2.0 * t).unwrap();
        prop_assert!(fine.is_valid_for(&fam));
        for class in &fine.classes {
            prop_assert!(part.classes.iter().any(|c| class.iter().all(|i| c.contains(i))));
        }
    }

    #[test]
    fn translation_preserves_norms(shift in -30i64..30, vals in prop::collection::vec(-3.0f64..3.0, 1..8), p in 1.0f64..6.0) {
        let spec = GridSpec::centered(1, 1, 64.0).unwrap();
        let f = lpframes::GridFunction::from_cells(&spec, vals.iter().enumerate().map(|(i, v)| (vec![i as i64], *v))).unwrap();
        let g = f.translate(&[shift]).unwrap();
        prop_assert!((f.lp_norm(p) - g.lp_norm(p)).abs() <= 1e-12 * (1.0 + f.lp_norm(p)));
    }

    #[test]
    fn disjoint_bump_coefficients_are_bounded(
        a in prop::collection::vec(-2.0f64..2.0, 1..8),
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]),
        heights in prop::collection::vec(1.0f64..2.0, 8),
    ) {
        let spec = GridSpec::centered(1, 0, 32.0).unwrap();
        let n = a.len();
        let fs: Vec<_> = (0..n)
            .map(|i| make_indicator(&spec, &[2.0 * i as f64], &[2.0 * i as f64 + 1.0], heights[i]).unwrap())
            .collect();
        let cert = DisjointnessCertificate {
            classes: vec![(0..n).map(|i| (i, LatticeBox::new(vec![2 * i as i64], vec![2 * i as i64 + 1]))).collect()],
            epsilon: 1.0,
        };
        let e = disjoint_support_coefficient_bound(&fs, p, &cert, &a, SweepMode::Exhaustive, 0).unwrap();
        prop_assert!(e.passed());
    }
}
