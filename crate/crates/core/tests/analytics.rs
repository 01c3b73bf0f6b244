use hfo_core::adm::compute_baseline;
use hfo_core::analytics::{
    classify_outcome, compute_metrics, detect_hfos, detect_hfos_with, format_percent, hfo_area,
    merge_events, sweep_parameters, test_retest, Classification, HfoVector, LabeledRecording,
};
use hfo_core::filters::{design_bandpass, BandSpec};
use hfo_core::pipeline::{AdmSettings, ChainSettings};
use hfo_core::signal_io::{synthesize_ieeg, BurstBand, SynthEvent, SynthSpec};
use hfo_core::snn::{NetworkConfig, OutputRaster};
use proptest::prelude::*;

/// Containment and ILAE class per patient, in table order.
const PATIENTS: [(bool, u8); 9] = [
    (true, 1),
    (true, 1),
    (true, 1),
    (true, 1),
    (true, 1),
    (true, 1),
    (true, 3),
    (false, 3),
    (true, 5),
];

fn classify(contained: bool, ilae: u8) -> Classification {
    let area = ["AR1-2"];
    let resection: &[&str] = if contained {
        &["AR1-2", "AR2-3"]
    } else {
        &["HL1-2"]
    };
    classify_outcome(&area, resection, ilae)
}

fn percents(c: &[Classification]) -> Vec<String> {
    let m = compute_metrics(c).unwrap();
    m.rows().iter().map(|(_, r)| format_percent(*r)).collect()
}

#[test]
fn snn_column() {
    let c: Vec<_> = PATIENTS.iter().map(|(k, i)| classify(*k, *i)).collect();
    assert_eq!(
        c,
        [
            vec![Classification::TN; 6],
            vec![Classification::FN, Classification::TP, Classification::FN]
        ]
        .concat()
    );
    assert_eq!(percents(&c), ["100", "33", "75", "100", "78"]);
}

#[test]
fn morphology_column() {
    let mut c: Vec<_> = PATIENTS.iter().map(|(k, i)| classify(*k, *i)).collect();
    c[7] = Classification::FN;
    assert_eq!(percents(&c), ["100", "--", "67", "--", "67"]);
}

#[test]
fn single_true_negative() {
    assert_eq!(
        percents(&[Classification::TN]),
        ["100", "--", "100", "--", "100"]
    );
}

#[test]
fn empty_area_is_contained() {
    let none: [&str; 0] = [];
    assert_eq!(classify_outcome(&none, &none, 1), Classification::TN);
    assert_eq!(classify_outcome(&none, &none, 4), Classification::FN);
}

#[test]
fn area_of_single_dominant_channel() {
    let channels: Vec<String> = (0..20).map(|i| format!("C{i}")).collect();
    let mut rates = vec![1.0; 20];
    rates[4] = 10.0;
    let v = HfoVector::new("mean", channels, rates).unwrap();
    assert_eq!(hfo_area(&v), ["C4"]);
}

#[test]
fn retest_extremes() {
    let ch = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let v = |r: Vec<f64>| HfoVector::new("i", ch.clone(), r).unwrap();
    assert_eq!(
        test_retest(&[v(vec![1.0, 2.0, 0.0]), v(vec![1.0, 2.0, 0.0])])
            .unwrap()
            .score,
        1.0
    );
    assert_eq!(
        test_retest(&[v(vec![1.0, 0.0, 0.0]), v(vec![0.0, 2.0, 3.0])])
            .unwrap()
            .score,
        0.0
    );
    let zero = test_retest(&[v(vec![0.0; 3]), v(vec![1.0, 0.0, 0.0])]).unwrap();
    assert_eq!((zero.score, zero.zero_pairs), (0.0, 1));
}

fn raster_from(times: &[(f64, usize)], n: usize) -> OutputRaster {
    let mut r = OutputRaster::empty(n, 10.0);
    for (t, i) in times {
        r.spikes[*i].push(*t);
    }
    r.spikes.iter_mut().for_each(|s| s.sort_by(f64::total_cmp));
    r
}

fn raster_strategy() -> impl Strategy<Value = OutputRaster> {
    prop::collection::vec((0.0..2.0f64, 0usize..6), 0..60).prop_map(|v| raster_from(&v, 6))
}

fn sweep_fixture() -> LabeledRecording {
    let mut spec = SynthSpec::new(12.0, 10.0, 31);
    let (noise, _) = synthesize_ieeg(&spec).unwrap();
    let baseline = |b: BandSpec| {
        let y = design_bandpass(&b, 2000.0)
            .unwrap()
            .filter()
            .run(noise.channel("CH1").unwrap());
        compute_baseline(&y, 2000.0).unwrap()
    };
    let (rb, fb) = (
        baseline(BandSpec::ripple()),
        baseline(BandSpec::fast_ripple()),
    );
    for i in 0..4 {
        let fr = i % 2 == 1;
        spec.events.push(SynthEvent {
            time_s: 2.0 + 2.5 * i as f64,
            band: if fr {
                BurstBand::FastRipple
            } else {
                BurstBand::Ripple
            },
            burst_frequency_hz: if fr { 380.0 } else { 130.0 },
            amplitude_uv: 3.0 * if fr { fb } else { rb },
            length_s: 0.05,
            channel: None,
        });
    }
    let (recording, annotations) = synthesize_ieeg(&spec).unwrap();
    LabeledRecording {
        recording,
        annotations,
    }
}

#[test]
fn sweep_ranks_baseline_threshold_first() {
    let labeled = sweep_fixture();
    let grid = [
        AdmSettings::with_baseline_scale(0.2),
        AdmSettings::with_baseline_scale(3.0),
        AdmSettings::with_baseline_scale(1.0),
    ];
    let net = [NetworkConfig::default()];
    let scores = sweep_parameters(&labeled, &grid, &net, &ChainSettings::default()).unwrap();
    assert_eq!(scores.len(), 3);
    assert_eq!(scores[0].adm_index, 2, "{scores:#?}");
    assert_eq!((scores[0].hits, scores[0].labeled), (4, 4));
    assert_eq!(scores[0].false_hits, 0);
    assert!(scores[1..]
        .iter()
        .all(|s| s.hits < s.labeled || s.false_hits > 0));
}

#[test]
fn sweep_ties_keep_grid_order_and_single_config_returns() {
    let labeled = sweep_fixture();
    let a = AdmSettings::with_baseline_scale(1.0);
    let net = [NetworkConfig::default()];
    let scores = sweep_parameters(&labeled, &[a, a], &net, &ChainSettings::default()).unwrap();
    assert_eq!(scores[0].hits, scores[1].hits);
    assert_eq!((scores[0].adm_index, scores[1].adm_index), (0, 1));
    let one = sweep_parameters(&labeled, &[a], &net, &ChainSettings::default()).unwrap();
    assert_eq!(one.len(), 1);
    assert!(sweep_parameters(&labeled, &[], &net, &ChainSettings::default()).is_err());
}

proptest! {
    #[test]
    fn merging_detected_events_is_identity(r in raster_strategy(), w in 0.001..0.1f64) {
        let ev = detect_hfos_with(&r, "c", w, 0.0);
        prop_assert_eq!(merge_events(&ev, w), ev);
    }

    #[test]
    fn event_count_non_increasing_in_window(r in raster_strategy(), w in 0.001..0.1f64, k in 1.0..5.0f64) {
        prop_assert!(detect_hfos_with(&r, "c", w * k, 0.0).len() <= detect_hfos_with(&r, "c", w, 0.0).len());
    }

    #[test]
    fn events_cover_every_spike(r in raster_strategy()) {
        let ev = detect_hfos(&r, "c");
        for (t, _) in r.pooled() {
            prop_assert!(ev.iter().any(|e| e.start_s <= t && t <= e.end_s));
        }
        for w in ev.windows(2) {
            prop_assert!(w[1].start_s - w[0].end_s >= 0.015);
        }
    }

    #[test]
    fn area_is_scale_invariant(rates in prop::collection::vec(0.0..50.0f64, 1..30), k in 0.01..100.0f64) {
        let ch: Vec<String> = (0..rates.len()).map(|i| format!("C{i}")).collect();
        let a = hfo_area(&HfoVector::new("m", ch.clone(), rates.clone()).unwrap());
        let b = hfo_area(&HfoVector::new("m", ch.clone(), rates.iter().map(|r| r * k).collect()).unwrap());
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|c| ch.contains(c)));
    }

    #[test]
    fn retest_within_unit_interval(v in prop::collection::vec(prop::collection::vec(0.0..20.0f64, 5), 2..8)) {
        let ch: Vec<String> = (0..5).map(|i| format!("C{i}")).collect();
        let vs: Vec<HfoVector> = v.into_iter().map(|r| HfoVector::new("i", ch.clone(), r).unwrap()).collect();
        let s = test_retest(&vs).unwrap().score;
        prop_assert!((0.0..=1.0).contains(&s));
        let dup = test_retest(&[vs[0].clone(), vs[0].clone()]).unwrap();
        if vs[0].rates_per_min.iter().any(|r| *r > 0.0) {
            prop_assert_eq!(dup.score, 1.0);
        }
    }

    #[test]
    fn metrics_ignore_patient_order(mut c in prop::collection::vec(0usize..4, 1..20), seed in any::<u64>()) {
        let all = [Classification::TN, Classification::TP, Classification::FN, Classification::FP];
        let a: Vec<_> = c.iter().map(|i| all[*i]).collect();
        let n = c.len();
        c.rotate_left((seed as usize) % n);
        c.reverse();
        let b: Vec<_> = c.iter().map(|i| all[*i]).collect();
        prop_assert_eq!(compute_metrics(&a).unwrap(), compute_metrics(&b).unwrap());
    }

    #[test]
    fn classification_is_total(area in prop::collection::vec(0u8..5, 0..4), rs in prop::collection::vec(0u8..5, 0..4), ilae in 1u8..=6) {
        let a: Vec<String> = area.iter().map(|i| format!("C{i}")).collect();
        let r: Vec<String> = rs.iter().map(|i| format!("C{i}")).collect();
        let contained = a.iter().all(|x| r.contains(x));
        let want = match (contained, ilae == 1) {
            (true, true) => Classification::TN,
            (true, false) => Classification::FN,
            (false, false) => Classification::TP,
            (false, true) => Classification::FP,
        };
        prop_assert_eq!(classify_outcome(&a, &r, ilae), want);
    }
}
