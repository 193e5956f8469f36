//! Randomized invariant checks over the numeric operators: bounds, symmetry,
//! monotonicity, idempotence, and exact alphabets.

use depthmatte::bayes::{posterior_fg, BayesParams};
use depthmatte::bgmodel::{build_background_model, BackgroundDepthModel};
use depthmatte::fusion::{fuse_error_maps, residual_map};
use depthmatte::imgcore::{
    gaussian_blur, nearest_src_index, remove_small_regions, resize_nearest, upsample_bilinear,
    DepthMap, ScalarMap,
};
use depthmatte::metrics::sad;
use depthmatte::refine::{depth_posterior_update, make_trimap, select_patches, RefineParams};
use proptest::prelude::*;

fn scalar_map(max_side: usize) -> impl Strategy<Value = ScalarMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0.0f32..=1.0, w * h)
            .prop_map(move |data| ScalarMap::new(w, h, data).unwrap())
    })
}

fn scalar_map_pair(max_side: usize) -> impl Strategy<Value = (ScalarMap, ScalarMap)> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec(0.0f32..=1.0, w * h),
            proptest::collection::vec(0.0f32..=1.0, w * h),
        )
            .prop_map(move |(a, b)| {
                (
                    ScalarMap::new(w, h, a).unwrap(),
                    ScalarMap::new(w, h, b).unwrap(),
                )
            })
    })
}

fn depth_value() -> impl Strategy<Value = f32> {
    prop_oneof![3 => 1.0f32..=6000.0, 1 => Just(-1.0f32)]
}

fn depth_map(max_side: usize) -> impl Strategy<Value = DepthMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(depth_value(), w * h)
            .prop_map(move |data| DepthMap::new(w, h, data).unwrap())
    })
}

/// Map whose samples are multiples of 1/16, so any summation order yields
/// bit-identical cell totals and ordering comparisons are exact.
fn sixteenths_map_multiple_of_cell() -> impl Strategy<Value = ScalarMap> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(cw, ch)| {
        let (w, h) = (cw * 4, ch * 4);
        proptest::collection::vec((0u8..=16).prop_map(|v| f32::from(v) / 16.0), w * h)
            .prop_map(move |data| ScalarMap::new(w, h, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_is_a_probability_and_prior_at_unknown_depth(
        d in prop_oneof![2 => 0.5f64..=6000.0, 1 => Just(-1.0f64)],
        mean in 1.0f64..=5460.0,
        std in 0.5f64..=500.0,
        prior in 0.01f64..=0.99,
    ) {
        let params = BayesParams { prior_fg: prior, ..BayesParams::default() };
        let p = posterior_fg(d, mean, std, &params);
        prop_assert!((0.0..=1.0).contains(&p), "posterior {p} out of range");
        if d <= 0.0 {
            prop_assert_eq!(p, prior);
        }
    }

    #[test]
    fn fusion_is_affine_and_bounded((e_d, e_rgb) in scalar_map_pair(10), beta in 0.0f64..=1.0) {
        let fused = fuse_error_maps(&e_d, &e_rgb, beta).unwrap();
        for i in 0..fused.data().len() {
            let (a, b) = (f64::from(e_d.data()[i]), f64::from(e_rgb.data()[i]));
            let f = f64::from(fused.data()[i]);
            prop_assert!((f - (beta * a + (1.0 - beta) * b)).abs() < 1e-6);
            prop_assert!(f >= a.min(b) - 1e-6 && f <= a.max(b) + 1e-6);
        }
    }

    #[test]
    fn residual_satisfies_the_triangle_inequality(
        (a, b) in scalar_map_pair(8),
        c_seed in 0.0f32..=1.0,
    ) {
        let (w, h) = a.dims();
        let c = ScalarMap::filled(w, h, c_seed).unwrap();
        let ab = residual_map(&a, &b).unwrap();
        let bc = residual_map(&b, &c).unwrap();
        let ac = residual_map(&a, &c).unwrap();
        for i in 0..w * h {
            prop_assert!(ac.data()[i] <= ab.data()[i] + bc.data()[i] + 1e-6);
        }
    }

    #[test]
    fn sad_is_symmetric_zero_on_self_and_grows_with_perturbation(
        (pred, gt) in scalar_map_pair(10),
        pick in any::<prop::sample::Index>(),
        delta in 0.05f32..=0.5,
    ) {
        prop_assert_eq!(sad(&pred, &pred).unwrap(), 0.0);
        prop_assert_eq!(sad(&pred, &gt).unwrap(), sad(&gt, &pred).unwrap());

        // Push one pixel strictly further from the target.
        let (w, h) = pred.dims();
        let i = pick.index(w * h);
        let mut data = pred.data().to_vec();
        data[i] = if data[i] >= gt.data()[i] {
            (data[i] + delta).min(1.0)
        } else {
            (data[i] - delta).max(0.0)
        };
        let moved = ScalarMap::new(w, h, data).unwrap();
        prop_assert!(sad(&moved, &gt).unwrap() >= sad(&pred, &gt).unwrap());
    }

    #[test]
    fn nearest_resampling_emits_only_source_samples(
        depth in depth_map(8),
        ow in 1usize..=20,
        oh in 1usize..=20,
    ) {
        let out = resize_nearest(&depth, ow, oh).unwrap();
        prop_assert_eq!(out.dims(), (ow, oh));
        for &v in out.data() {
            prop_assert!(
                depth.data().iter().any(|&s| s.to_bits() == v.to_bits()),
                "output sample {v} not present in source"
            );
        }
    }

    #[test]
    fn nearest_index_is_monotone_bounded_and_identity_on_equal_sizes(
        dst_len in 1usize..=64,
        src_len in 1usize..=64,
    ) {
        let idx: Vec<usize> = (0..dst_len).map(|d| nearest_src_index(d, dst_len, src_len)).collect();
        prop_assert!(idx.iter().all(|&i| i < src_len));
        prop_assert!(idx.windows(2).all(|w| w[0] <= w[1]));
        if dst_len == src_len {
            prop_assert!(idx.iter().enumerate().all(|(d, &i)| d == i));
        }
    }

    #[test]
    fn bilinear_upsampling_respects_the_value_envelope(
        map in scalar_map(8),
        scale in 2usize..=5,
    ) {
        let (w, h) = map.dims();
        let out = upsample_bilinear(&map, w * scale, h * scale).unwrap();
        let lo = map.data().iter().copied().fold(f32::INFINITY, f32::min);
        let hi = map.data().iter().copied().fold(f32::NEG_INFINITY, f32::max);
        for &v in out.data() {
            prop_assert!(v >= lo - 1e-6 && v <= hi + 1e-6, "{v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn small_region_removal_is_idempotent(map in scalar_map(12), min_area in 1usize..=12) {
        let once = remove_small_regions(&map, 0.5, min_area).unwrap();
        let twice = remove_small_regions(&once, 0.5, min_area).unwrap();
        prop_assert_eq!(once.data(), twice.data());
    }

    #[test]
    fn blur_preserves_constant_maps(
        c in 0.0f32..=1.0,
        w in 1usize..=16,
        h in 1usize..=16,
        sigma in 0.3f64..=3.0,
    ) {
        let out = gaussian_blur(&ScalarMap::filled(w, h, c).unwrap(), sigma).unwrap();
        for &v in out.data() {
            prop_assert!((v - c).abs() < 1e-6);
        }
    }

    #[test]
    fn trimap_alphabet_is_exactly_three_levels(map in scalar_map(12)) {
        let params = RefineParams::default();
        let tri = make_trimap(&map, &params).unwrap();
        for &v in tri.data() {
            prop_assert!(v == 0.0 || v == 0.5 || v == 1.0);
        }
    }

    #[test]
    fn depth_conditioned_update_is_monotone_in_the_prior(
        d in depth_value(),
        mean in 100.0f64..=5000.0,
        std in 1.0f64..=300.0,
        p_lo in 0.0f32..=1.0,
        p_hi in 0.0f32..=1.0,
    ) {
        let (p_lo, p_hi) = if p_lo <= p_hi { (p_lo, p_hi) } else { (p_hi, p_lo) };
        let params = BayesParams::default();
        let model = BackgroundDepthModel::new(
            1, 1, vec![mean as f32], vec![std as f32], 0.01, 5460.0,
        ).unwrap();
        let depth = DepthMap::new(1, 1, vec![d]).unwrap();
        let run = |p: f32| -> f32 {
            let a = ScalarMap::new(1, 1, vec![p]).unwrap();
            depth_posterior_update(&a, &depth, &model, &params).unwrap().get(0, 0)
        };
        prop_assert!(run(p_lo) <= run(p_hi) + 1e-6);
    }

    #[test]
    fn background_statistics_ignore_observation_order(
        maps in (1usize..=4, 1usize..=4).prop_flat_map(|(w, h)| {
            proptest::collection::vec(
                proptest::collection::vec(depth_value(), w * h)
                    .prop_map(move |d| DepthMap::new(w, h, d).unwrap()),
                2..=6,
            )
        }),
    ) {
        let forward = build_background_model(&maps, 0.01, 5460.0).unwrap();
        let reversed: Vec<DepthMap> = maps.iter().rev().cloned().collect();
        let backward = build_background_model(&reversed, 0.01, 5460.0).unwrap();
        for i in 0..forward.mean().len() {
            prop_assert!((forward.mean()[i] - backward.mean()[i]).abs() <= 1e-3);
            prop_assert!((forward.std()[i] - backward.std()[i]).abs() <= 1e-3);
        }
    }

    #[test]
    fn patch_selection_is_unique_bounded_ordered_and_quota_exact(
        map in sixteenths_map_multiple_of_cell(),
    ) {
        let params = RefineParams::default();
        let grid = select_patches(&map, &params).unwrap();
        let (w, h) = map.dims();
        let (cols, rows) = (w / 4, h / 4);

        // Exact cell totals: samples are multiples of 1/16, so f64 sums are
        // association-independent and comparable against the implementation.
        let cell_sum = |row: usize, col: usize| -> f64 {
            let mut s = 0.0f64;
            for y in row * 4..row * 4 + 4 {
                for x in col * 4..col * 4 + 4 {
                    s += f64::from(map.get(x, y));
                }
            }
            s
        };

        let mut seen = std::collections::BTreeSet::new();
        for &(row, col) in &grid.selected {
            prop_assert!(row < rows && col < cols, "cell ({row}, {col}) out of grid");
            prop_assert!(seen.insert((row, col)), "duplicate cell ({row}, {col})");
            prop_assert!(cell_sum(row, col) > 0.0, "zero-error cell selected");
        }

        let nonzero = (0..rows * cols)
            .filter(|i| cell_sum(i / cols, i % cols) > 0.0)
            .count();
        let quota = (params.top_fraction * (rows * cols) as f64).ceil() as usize;
        prop_assert_eq!(grid.selected.len(), quota.min(nonzero));

        // Descending total, row-major position on ties, and no unselected
        // cell strictly beats a selected one.
        let sums: Vec<f64> = grid.selected.iter().map(|&(r, c)| cell_sum(r, c)).collect();
        for a in sums.windows(2) {
            prop_assert!(a[0] >= a[1]);
        }
        for pair in grid.selected.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if cell_sum(a.0, a.1) == cell_sum(b.0, b.1) {
                prop_assert!(a.0 * cols + a.1 < b.0 * cols + b.1);
            }
        }
        if let Some(&floor) = sums.last() {
            for row in 0..rows {
                for col in 0..cols {
                    if !seen.contains(&(row, col)) {
                        prop_assert!(cell_sum(row, col) <= floor);
                    }
                }
            }
        }
    }
}
