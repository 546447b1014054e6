mod common;

use std::path::Path;

use cdcp_core::imaging::{load_depth, load_rgbd, normalize_values, srgb_to_lab};
use cdcp_core::metrics::{
    aggregate, evaluate, f_measure, mae, pr_at_threshold, roc_at_threshold, GroundTruth,
    DEFAULT_BETA2, LEVELS,
};
use cdcp_core::SaliencyMap;
use common::{count_at, f_beta, mae_oracle, random_map, random_mask};
use image::{ImageBuffer, Luma, Rgb};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(v in prop::collection::vec(-1e3f64..1e3, 2..64)) {
        let once = normalize_values(&v).unwrap();
        prop_assert_eq!(normalize_values(&once).unwrap(), once.clone());
        prop_assert!(once.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn normalize_ignores_positive_affine_maps(
        v in prop::collection::vec(-10.0f64..10.0, 2..64).prop_filter("spread", |v| {
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min) > 1.0
        }),
        a in 0.1f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let base = normalize_values(&v).unwrap();
        let moved: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        for (x, y) in normalize_values(&moved).unwrap().iter().zip(&base) {
            prop_assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn grays_have_no_chroma(v in 0.0f64..=1.0) {
        let [_, a, b] = srgb_to_lab([v, v, v]);
        prop_assert!(a.abs() < 0.5 && b.abs() < 0.5);
    }

    #[test]
    fn metrics_match_set_counting(seed in any::<u64>(), w in 2usize..=32, h in 2usize..=32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_map(&mut rng, w, h);
        let mask = random_mask(&mut rng, w * h);
        let gt = GroundTruth::new(w, h, mask.clone()).unwrap();
        let r = evaluate(&s, &gt, DEFAULT_BETA2).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..LEVELS {
            let c = count_at(s.values(), &mask, i as f64 / 255.0);
            prop_assert!((r.precision[i] - c.precision).abs() < 1e-9);
            prop_assert!((r.recall[i] - c.recall).abs() < 1e-9);
            prop_assert!((r.fpr[i] - c.fpr).abs() < 1e-9);
            prop_assert!((r.tpr[i] - c.recall).abs() < 1e-9);
            best = best.max(f_beta(c.precision, c.recall, 0.3));
        }
        prop_assert!((r.f_max - best).abs() < 1e-9);
        let t = (2.0 * s.values().iter().sum::<f64>() / (w * h) as f64).min(1.0);
        let c = count_at(s.values(), &mask, t);
        prop_assert!((r.f_adaptive - f_beta(c.precision, c.recall, 0.3)).abs() < 1e-9);
        prop_assert!((r.mae - mae_oracle(s.values(), &mask)).abs() < 1e-9);
    }

    #[test]
    fn recall_and_fpr_fall_with_threshold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_map(&mut rng, 17, 13);
        let gt = GroundTruth::new(17, 13, random_mask(&mut rng, 17 * 13)).unwrap();
        let r = evaluate(&s, &gt, DEFAULT_BETA2).unwrap();
        for i in 1..LEVELS {
            prop_assert!(r.recall[i] <= r.recall[i - 1]);
            prop_assert!(r.fpr[i] <= r.fpr[i - 1]);
        }
    }

    #[test]
    fn f_of_equal_terms_is_that_term(p in 0.0f64..=1.0, beta2 in 0.01f64..10.0) {
        prop_assert_eq!(f_measure(p, p, 0.3), p);
        prop_assert!((f_measure(p, p, beta2) - p).abs() <= 1e-15);
    }

    #[test]
    fn mae_ignores_pixel_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12 * 9;
        let s = random_map(&mut rng, 12, 9);
        let mask = random_mask(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let s2 = SaliencyMap::new(12, 9, perm.iter().map(|&p| s.values()[p]).collect()).unwrap();
        let m2 = GroundTruth::new(12, 9, perm.iter().map(|&p| mask[p]).collect()).unwrap();
        let a = mae(&s, &GroundTruth::new(12, 9, mask).unwrap()).unwrap();
        prop_assert!((a - mae(&s2, &m2).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn single_threshold_queries_match_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let s = random_map(&mut rng, 8, 8);
        let mask = random_mask(&mut rng, 64);
        let gt = GroundTruth::new(8, 8, mask.clone()).unwrap();
        let t = rng.gen_range(0.0..=1.0);
        let c = count_at(s.values(), &mask, t);
        let (p, r) = pr_at_threshold(&s, &gt, t).unwrap();
        let (fpr, tpr) = roc_at_threshold(&s, &gt, t).unwrap();
        assert!((p - c.precision).abs() < 1e-12 && (r - c.recall).abs() < 1e-12);
        assert!((fpr - c.fpr).abs() < 1e-12 && (tpr - c.recall).abs() < 1e-12);
    }
}

#[test]
fn aggregate_of_three_matches_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pairs: Vec<(SaliencyMap, Vec<bool>)> = (0..3)
        .map(|_| (random_map(&mut rng, 16, 16), random_mask(&mut rng, 256)))
        .collect();
    let reports: Vec<_> = pairs
        .iter()
        .map(|(s, m)| evaluate(s, &GroundTruth::new(16, 16, m.clone()).unwrap(), 0.3).unwrap())
        .collect();
    let agg = aggregate(&reports, 0.3).unwrap();
    let mut best = f64::NEG_INFINITY;
    for i in 0..LEVELS {
        let t = i as f64 / 255.0;
        let cs: Vec<_> = pairs.iter().map(|(s, m)| count_at(s.values(), m, t)).collect();
        let p = cs.iter().map(|c| c.precision).sum::<f64>() / 3.0;
        let r = cs.iter().map(|c| c.recall).sum::<f64>() / 3.0;
        assert!((agg.precision[i] - p).abs() < 1e-9 && (agg.recall[i] - r).abs() < 1e-9);
        best = best.max(f_beta(p, r, 0.3));
    }
    assert!((agg.f_max - best).abs() < 1e-9);
    let m = pairs.iter().map(|(s, g)| mae_oracle(s.values(), g)).sum::<f64>() / 3.0;
    assert!((agg.mae - m).abs() < 1e-9);
    assert_eq!(agg.images, 3);
}

fn write_rgb8(path: &Path, w: u32, h: u32) {
    ImageBuffer::from_fn(w, h, |x, y| Rgb([(x * 37 % 256) as u8, (y * 91 % 256) as u8, 255]))
        .save(path)
        .unwrap();
}

#[test]
fn rgbd_loading_scales_by_bit_depth() {
    let dir = tempfile::tempdir().unwrap();
    let rgb = dir.path().join("rgb.png");
    write_rgb8(&rgb, 12, 8);
    let d16 = dir.path().join("d16.png");
    let mut img16: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::new(12, 8);
    img16.put_pixel(3, 2, Luma([65535]));
    img16.put_pixel(4, 2, Luma([32768]));
    img16.save(&d16).unwrap();
    let (c, d) = load_rgbd(&rgb, &d16).unwrap();
    assert_eq!(c.dims(), (12, 8));
    assert_eq!(d.values()[2 * 12 + 3], 1.0);
    assert!((d.values()[2 * 12 + 4] - 32768.0 / 65535.0).abs() < 1e-12);
    assert!(c.pixels().iter().flatten().all(|v| (0.0..=1.0).contains(v)));

    let d8 = dir.path().join("d8.png");
    ImageBuffer::from_fn(12, 8, |x, _| Luma([(x * 20) as u8])).save(&d8).unwrap();
    let d = load_depth(&d8).unwrap();
    assert!((d.values()[5] - 100.0 / 255.0).abs() < 1e-12);

    let small = dir.path().join("small.png");
    ImageBuffer::from_fn(6, 4, |_, _| Luma([7u8])).save(&small).unwrap();
    let err = load_rgbd(&rgb, &small).unwrap_err();
    assert!(err.to_string().contains("12"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn loaded_values_stay_in_unit_range(seed in any::<u64>(), wide in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dir = tempfile::tempdir().unwrap();
        let rgb = dir.path().join("c.png");
        ImageBuffer::from_fn(9, 7, |_, _| Rgb([rng.gen::<u8>(), rng.gen(), rng.gen()])).save(&rgb).unwrap();
        let depth = dir.path().join("d.png");
        if wide {
            let img: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(9, 7, |_, _| Luma([rng.gen()]));
            img.save(&depth).unwrap();
        } else {
            ImageBuffer::from_fn(9, 7, |_, _| Luma([rng.gen::<u8>()])).save(&depth).unwrap();
        }
        let (c, d) = load_rgbd(&rgb, &depth).unwrap();
        prop_assert!(c.pixels().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(d.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
