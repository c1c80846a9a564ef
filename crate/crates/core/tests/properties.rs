use anamorph_core::geometry::{self, build_trapezoid, far_edge_distance, far_edge_width};
use anamorph_core::metrics::{asr_per_bin, auc, reaction_window, AsrCurve, Trial};
use anamorph_core::oracle::{attack_loss, BBox, Detection, DetectionSet};
use anamorph_core::warp::{apply_homography, constrain, PrintConstraints};
use anamorph_core::{CameraGeometry, Homography, IllusionSpec, RasterImage, Rgb};
use proptest::prelude::*;

fn valid_triple() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    // (H, d, h as a fraction of H, w)
    (0.5f64..3.0, 1.0f64..30.0, 0.0f64..0.95, 0.2f64..4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ground_length_increases_with_height((big_h, d, frac, w) in valid_triple(), bump in 0.001f64..0.04) {
        let cam = CameraGeometry::new(big_h, d).unwrap();
        let lo = IllusionSpec::new(frac * big_h, w).unwrap();
        let hi = IllusionSpec::new((frac + bump) * big_h, w).unwrap();
        prop_assert!(far_edge_distance(&cam, &hi).unwrap() > far_edge_distance(&cam, &lo).unwrap());
    }

    #[test]
    fn far_width_never_narrower((big_h, d, frac, w) in valid_triple()) {
        let cam = CameraGeometry::new(big_h, d).unwrap();
        let spec = IllusionSpec::new(frac * big_h, w).unwrap();
        let wf = far_edge_width(&cam, &spec).unwrap();
        prop_assert!(wf >= w);
        prop_assert_eq!(wf == w, frac == 0.0);
    }

    #[test]
    fn geometry_is_pure((big_h, d, frac, w) in valid_triple()) {
        let cam = CameraGeometry::new(big_h, d).unwrap();
        let spec = IllusionSpec::new(frac * big_h, w).unwrap();
        let a = build_trapezoid(&cam, &spec).unwrap();
        let b = build_trapezoid(&cam, &spec).unwrap();
        prop_assert_eq!(a.ground_length_m.to_bits(), b.ground_length_m.to_bits());
        prop_assert_eq!(a.far_width_m.to_bits(), b.far_width_m.to_bits());
        let ma = geometry::ground_mapping(&a, (32, 24), 50.0).unwrap();
        let mb = geometry::ground_mapping(&b, (32, 24), 50.0).unwrap();
        prop_assert_eq!(ma.homography.0.map(f64::to_bits), mb.homography.0.map(f64::to_bits));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_image_stays_constant(
        c in any::<[u8; 3]>(),
        (w, h) in (1usize..24, 1usize..24),
        sx in 0.3f64..3.0, sy in 0.3f64..3.0, p in -0.01f64..0.01,
    ) {
        let src = RasterImage::filled(w, h, Rgb(c)).unwrap();
        let mut hom = Homography::scale(sx, sy);
        hom.0[6] = p / w as f64;
        let fill = Rgb([c[0].wrapping_add(1), c[1], c[2]]);
        let out = apply_homography(&src, &hom, (32, 32), fill).unwrap();
        for px in out.as_raw().chunks(3) {
            prop_assert!(px == c || px == fill.0);
        }
    }

    #[test]
    fn constrain_idempotent_and_in_range(
        data in proptest::collection::vec(any::<u8>(), 3 * 6 * 5),
        lo in 0u8..120, span in 1u8..135,
        weight in prop_oneof![Just(0.0), 0.0f64..1.0],
    ) {
        let img = RasterImage::from_raw(6, 5, data).unwrap();
        let c = PrintConstraints { channel_min: lo, channel_max: lo + span, smoothing_weight: weight };
        let once = constrain(&img, &c);
        prop_assert!(once.as_raw().iter().all(|&v| v >= lo && v <= lo + span));
        if weight == 0.0 {
            prop_assert_eq!(constrain(&once, &c), once);
        }
    }
}

fn det(conf: f64, x: f64) -> Detection {
    Detection::new("car", conf, BBox { x, y: 0.1, w: 0.1, h: 0.1 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn loss_ignores_order(confs in proptest::collection::vec(0.0f64..=1.0, 0..8), seed in any::<u64>()) {
        let dets: Vec<Detection> = confs.iter().enumerate().map(|(i, &c)| det(c, 0.11 * i as f64 % 0.8)).collect();
        let mut shuffled = dets.clone();
        let n = shuffled.len();
        if n > 1 {
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
        }
        let benign = DetectionSet::empty("b");
        let a = attack_loss(&DetectionSet { detections: dets, image_id: "a".into() }, &benign, "car").unwrap();
        let b = attack_loss(&DetectionSet { detections: shuffled, image_id: "a".into() }, &benign, "car").unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn loss_monotone_in_qualifying_confidence(c in 0.0f64..0.99, up in 0.0f64..0.01, other in 0.0f64..=1.0) {
        let benign = DetectionSet { detections: vec![det(0.9, 0.6)], image_id: "b".into() };
        let mk = |conf| DetectionSet { detections: vec![det(conf, 0.0), det(other, 0.6)], image_id: "a".into() };
        let lo = attack_loss(&mk(c), &benign, "car").unwrap().value;
        let hi = attack_loss(&mk(c + up), &benign, "car").unwrap().value;
        prop_assert!(hi >= lo);
        // the detection overlapping the benign one never counts
        prop_assert_eq!(lo, c);
    }

    #[test]
    fn asr_ignores_trial_order(outcomes in proptest::collection::vec((3i32..10, proptest::option::of(0.0f64..=1.0)), 1..80)) {
        let trials: Vec<Trial> = outcomes.iter().enumerate().map(|(i, &(bin, conf))| Trial {
            distance_bin_m: bin,
            sample_index: i as u32,
            seed_index: 0,
            detection: conf.map(|c| det(c, 0.0)),
        }).collect();
        let mut rev = trials.clone();
        rev.reverse();
        prop_assert_eq!(asr_per_bin(&trials, "car"), asr_per_bin(&rev, "car"));
    }

    #[test]
    fn auc_monotone(vals in proptest::collection::vec(0.0f64..=100.0, 7), bin in 3i32..=9, raise in 0.0f64..=100.0) {
        let mut curve = AsrCurve::default();
        for (i, v) in vals.iter().enumerate() {
            curve.bins.insert(3 + i as i32, *v);
        }
        let before = auc(&curve, 3, 9).unwrap().auc;
        let slot = curve.bins.get_mut(&bin).unwrap();
        *slot = (*slot + raise).min(100.0);
        prop_assert!(auc(&curve, 3, 9).unwrap().auc >= before);
        prop_assert!((0.0..=1.0).contains(&before));
    }

    #[test]
    fn reaction_window_decreases_with_speed(dist in 0.1f64..50.0, v in 1.0f64..100.0, dv in 0.01f64..20.0) {
        let slow = reaction_window(dist, v).unwrap().seconds;
        let fast = reaction_window(dist, v + dv).unwrap().seconds;
        prop_assert!(fast < slow);
    }
}
