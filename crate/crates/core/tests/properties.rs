use fieldlabel_core::annotation::{parse_label_file, serialize_labels, NormalizedBox};
use fieldlabel_core::detect::{iou, nms, Detection};
use fieldlabel_core::prep::{GeometricOp, SplitRatios};
use fieldlabel_core::stats::{box_summary, histogram, t_test, TTestVariant, DEFAULT_ALPHA};
use proptest::prelude::*;

fn a_box() -> impl Strategy<Value = NormalizedBox> {
    (0u32..8, 0.001f64..1.0, 0.001f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(c, w, h, fx, fy)| {
        let cx = w / 2.0 + fx * (1.0 - w);
        let cy = h / 2.0 + fy * (1.0 - h);
        NormalizedBox::new(c, cx, cy, w, h).unwrap()
    })
}

fn an_op() -> impl Strategy<Value = GeometricOp> {
    prop::sample::select(GeometricOp::ALL.to_vec())
}

proptest! {
    #[test]
    fn serialized_labels_reparse_to_a_fixed_point(boxes in prop::collection::vec(a_box(), 0..30)) {
        let text = serialize_labels(&boxes);
        let parsed = parse_label_file(&text, 8).unwrap();
        prop_assert_eq!(parsed.len(), boxes.len());
        for (p, b) in parsed.iter().zip(&boxes) {
            prop_assert_eq!(p.class_id(), b.class_id());
            prop_assert!((p.cx() - b.cx()).abs() <= 5e-7 + 1e-12);
            prop_assert!((p.w() - b.w()).abs() <= 5e-7 + 1e-12);
        }
        prop_assert_eq!(serialize_labels(&parsed), text);
    }

    #[test]
    fn every_op_is_undone_by_its_inverse(b in a_box(), op in an_op()) {
        prop_assert_eq!(op.inverse().apply_box(&op.apply_box(&b)), b);
        prop_assert!((op.apply_box(&b).area() - b.area()).abs() < 1e-15);
    }

    #[test]
    fn transforms_preserve_iou(a in a_box(), b in a_box(), op in an_op()) {
        let before = iou(&a, &b);
        let after = iou(&op.apply_box(&a), &op.apply_box(&b));
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn allocation_is_exhaustive_and_close(n in 0usize..5000, t in 0.05f64..0.9, v in 0.05f64..0.5) {
        prop_assume!(t + v < 0.99);
        let r = SplitRatios::new(t, v, 1.0 - t - v).unwrap();
        let counts = r.allocate(n);
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
        for (c, share) in counts.iter().zip([r.train, r.val, r.test]) {
            prop_assert!((*c as f64 - share * n as f64).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn nms_output_is_a_subset_in_rank_order(
        boxes in prop::collection::vec((a_box(), 0.0f64..1.0), 0..20),
        threshold in 0.1f64..0.9,
    ) {
        let dets: Vec<Detection> = boxes.into_iter().map(|(b, c)| Detection::new(b, c)).collect();
        let kept = nms(&dets, threshold);
        prop_assert!(kept.iter().all(|k| dets.contains(k)));
        prop_assert!(kept.windows(2).all(|w| w[0].confidence >= w[1].confidence));
        if let Some(best) = dets.iter().map(|d| d.confidence).reduce(f64::max) {
            prop_assert_eq!(kept[0].confidence, best);
        }
    }

    #[test]
    fn histogram_counts_every_value(values in prop::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..30) {
        let h = histogram(&values, bins).unwrap();
        prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), values.len());
    }

    #[test]
    fn box_summary_is_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let s = box_summary(&values).unwrap();
        prop_assert!(s.whisker_low <= s.whisker_high);
        prop_assert!(s.outliers.iter().all(|o| *o < s.whisker_low || *o > s.whisker_high));
        prop_assert!(s.q1 <= s.median && s.median <= s.q3);
        prop_assert_eq!(s.count, values.len());
    }

    #[test]
    fn t_is_shift_invariant(
        a in prop::collection::vec(0.0f64..1.0, 2..20),
        b in prop::collection::vec(0.0f64..1.0, 2..20),
        shift in -10.0f64..10.0,
    ) {
        let base = t_test(&a, &b, TTestVariant::Welch, DEFAULT_ALPHA);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let moved = |xs: &[f64]| xs.iter().map(|x| x + shift).collect::<Vec<_>>();
        let s = t_test(&moved(&a), &moved(&b), TTestVariant::Welch, DEFAULT_ALPHA).unwrap();
        prop_assert!((s.t_statistic - base.t_statistic).abs() <= 1e-6 * base.t_statistic.abs().max(1.0));
    }
}
