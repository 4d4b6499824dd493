use std::collections::{BTreeMap, HashSet};

use ndarray::Array2;
use proptest::prelude::*;

use readervar::casecontrol::{assign_quintiles, odds_ratio_from_counts, QuintileAssignment};
use readervar::data::{grouped_kfold, grouped_split, FeatureTable, ImageRecord, Side, View};
use readervar::metrics::{average_ranks, rmse, spearman};
use readervar::net::{init_network, masked_loss, NetworkArch};
use readervar::ridge::fit_ridge;
use readervar::simulate::DistTransform;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-5.0..5.0f64, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn design() -> impl Strategy<Value = (Array2<f64>, Vec<f64>)> {
    (1usize..30, 1usize..8).prop_flat_map(|(n, p)| (matrix(n, p), prop::collection::vec(-50.0..50.0f64, n)))
}

fn table(women: usize, per: usize) -> FeatureTable {
    let records = (0..women * per)
        .map(|i| ImageRecord::new(format!("i{i}"), format!("w{}", i / per), View::CC, Side::L))
        .collect();
    FeatureTable::new(records, Array2::zeros((women * per, 1)), false).unwrap()
}

proptest! {
    #[test]
    fn ridge_solution_is_stationary((x, y) in design(), lambda in 0.01..10.0f64) {
        let w = fit_ridge(x.view(), &y, lambda).unwrap().w;
        let scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for j in 0..x.ncols() {
            let g: f64 = (0..x.nrows())
                .map(|i| x[[i, j]] * ((0..x.ncols()).map(|k| x[[i, k]] * w[k]).sum::<f64>() - y[i]))
                .sum::<f64>()
                + lambda * w[j];
            prop_assert!(g.abs() < 1e-8 * scale * x.nrows() as f64, "component {j}: {g}");
        }
    }

    #[test]
    fn ridge_is_linear_in_targets((x, y) in design(), c in -4.0..4.0f64) {
        let w = fit_ridge(x.view(), &y, 1.0).unwrap().w;
        let scaled: Vec<f64> = y.iter().map(|v| c * v).collect();
        let wc = fit_ridge(x.view(), &scaled, 1.0).unwrap().w;
        for (a, b) in w.iter().zip(&wc) {
            prop_assert!((c * a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn masked_placeholders_never_matter(
        seed in 0u64..1000,
        n in 1usize..10,
        m in 1usize..5,
        mask in prop::collection::vec(any::<bool>(), 50),
        junk in prop::collection::vec(-1e9..1e9f64, 50),
    ) {
        let net = init_network(&NetworkArch::new(3, vec![4], m), seed).unwrap();
        let x = Array2::from_shape_fn((n, 3), |(i, j)| ((i * 3 + j) as f64).sin());
        let phi = Array2::from_shape_fn((n, m), |(i, j)| f64::from(mask[i * m + j]));
        let d = Array2::from_shape_fn((n, m), |(i, j)| ((i + 2 * j) % 100) as f64);
        let d2 = Array2::from_shape_fn((n, m), |(i, j)| if mask[i * m + j] { d[[i, j]] } else { junk[i * m + j] });
        let (l1, g1) = net.loss_gradient(x.view(), d.view(), phi.view()).unwrap();
        let (l2, g2) = net.loss_gradient(x.view(), d2.view(), phi.view()).unwrap();
        prop_assert_eq!(l1, l2);
        prop_assert_eq!(g1.to_flat(), g2.to_flat());
        let out = net.forward(x.view()).unwrap().outputs;
        prop_assert_eq!(masked_loss(out.view(), d2.view(), phi.view()).unwrap(), l1);
    }

    #[test]
    fn spearman_bounded_and_symmetric(v in prop::collection::vec((0..20i32, 0..20i32), 3..40)) {
        let a: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
        let b: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
        if let (Ok(r), Ok(s)) = (spearman(&a, &b), spearman(&b, &a)) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            prop_assert!((r - s).abs() < 1e-12);
        }
    }

    #[test]
    fn ranks_sum_and_order(v in prop::collection::vec(0..10i32, 1..50)) {
        let x: Vec<f64> = v.iter().map(|&a| a as f64).collect();
        let r = average_ranks(&x);
        let n = x.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for i in 0..x.len() {
            for j in 0..x.len() {
                if x[i] < x[j] {
                    prop_assert!(r[i] < r[j]);
                }
                if x[i] == x[j] {
                    prop_assert_eq!(r[i], r[j]);
                }
            }
        }
    }

    #[test]
    fn rmse_symmetric_and_nonnegative(v in prop::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 1..40)) {
        let a: Vec<f64> = v.iter().map(|p| p.0).collect();
        let b: Vec<f64> = v.iter().map(|p| p.1).collect();
        let r = rmse(&a, &b).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert_eq!(r, rmse(&b, &a).unwrap());
    }

    #[test]
    fn splits_keep_women_together(women in 3usize..60, per in 1usize..5, seed in 0u64..500) {
        let t = table(women, per);
        let s = grouped_split(&t, (0.6, 0.2, 0.2), seed).unwrap();
        let owner = |rows: &[usize]| rows.iter().map(|&r| t.records()[r].woman_id.clone()).collect::<HashSet<_>>();
        let (a, b, c) = (owner(&s.train), owner(&s.validation), owner(&s.test));
        prop_assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), t.len());
    }

    #[test]
    fn folds_hold_out_each_image_once(women in 5usize..40, per in 1usize..5, k in 2usize..6, seed in 0u64..500) {
        let t = table(women, per);
        let folds = grouped_kfold(&t, k, seed).unwrap();
        let mut seen = vec![0; t.len()];
        for f in &folds {
            for &r in &f.heldout {
                seen[r] += 1;
            }
            let held: HashSet<_> = f.heldout.iter().map(|&r| &t.records()[r].woman_id).collect();
            prop_assert!(f.train.iter().all(|&r| !held.contains(&t.records()[r].woman_id)));
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn transforms_are_monotone(mid in 1.0..99.0f64, to in 0.0..100.0f64, xs in prop::collection::vec(0.0..100.0f64, 2..20)) {
        let t = DistTransform::new(vec![(0.0, 0.0), (mid, to), (100.0, 100.0)]).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let ys: Vec<f64> = xs.iter().map(|&x| t.apply(x)).collect();
        prop_assert!(ys.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(t.apply(0.0), 0.0);
        prop_assert_eq!(t.apply(100.0), 100.0);
    }

    #[test]
    fn quintiles_follow_scores(controls in prop::collection::vec(0.0..100.0f64, 5..60)) {
        let scores: BTreeMap<String, f64> = controls.iter().enumerate().map(|(i, &s)| (format!("w{i}"), s)).collect();
        let Ok(q) = assign_quintiles(&controls, &scores) else { return Ok(()) };
        prop_assert!(q.boundaries.windows(2).all(|w| w[0] <= w[1]));
        for (w, &s) in &scores {
            prop_assert_eq!(q.quintile[w], QuintileAssignment::quintile_of(&q.boundaries, s));
        }
        let top = q.quintile.values().filter(|&&v| v == 5).count();
        let bottom = q.quintile.values().filter(|&&v| v == 1).count();
        prop_assert!(top > 0 && bottom > 0);
    }

    #[test]
    fn swapping_quintiles_inverts_odds_ratio(a in 1usize..200, b in 1usize..200, c in 1usize..200, d in 1usize..200) {
        let r = odds_ratio_from_counts(a, b, c, d);
        let s = odds_ratio_from_counts(c, d, a, b);
        prop_assert!((r.or_point * s.or_point - 1.0).abs() < 1e-12);
        prop_assert!((r.ci_low * s.ci_high - 1.0).abs() < 1e-9);
        prop_assert!(r.ci_low <= r.or_point && r.or_point <= r.ci_high);
    }
}
