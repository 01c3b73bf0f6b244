use std::f64::consts::PI;

use hfo_core::signal_io::{
    load_annotations, load_recording, save_annotations, save_recording, synthesize_ieeg,
    AnnotationKind, BurstBand, EventAnnotation, Recording, RecordingFormat, SynthEvent, SynthSpec,
};
use hfo_core::Error;
use proptest::prelude::*;

fn burst(time_s: f64, band: BurstBand, f: f64, amplitude_uv: f64, length_s: f64) -> SynthEvent {
    SynthEvent {
        time_s,
        band,
        burst_frequency_hz: f,
        amplitude_uv,
        length_s,
        channel: None,
    }
}

/// Share of energy within `half_width` of `f`, by a direct DFT over one-hertz
/// bins.
fn energy_near(x: &[f64], fs: f64, f: f64, half_width: f64) -> f64 {
    let n = x.len();
    let bins = (fs / 2.0) as usize;
    let (mut near, mut total) = (0.0, 0.0);
    for k in 1..bins {
        let freq = k as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in x.iter().enumerate() {
            let ph = 2.0 * PI * freq * i as f64 / fs;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        let e = (re * re + im * im) / n as f64;
        total += e;
        if (freq - f).abs() <= half_width {
            near += e;
        }
    }
    near / total
}

#[test]
fn synthesis_is_deterministic() {
    let mut spec = SynthSpec::new(3.0, 6.0, 44);
    spec.events
        .push(burst(1.0, BurstBand::Ripple, 120.0, 30.0, 0.05));
    let (a, ann_a) = synthesize_ieeg(&spec).unwrap();
    let (b, ann_b) = synthesize_ieeg(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(ann_a, ann_b);
    spec.seed += 1;
    assert_ne!(synthesize_ieeg(&spec).unwrap().0, a);
}

#[test]
fn isolated_bursts_are_band_pure() {
    for (band, f) in [
        (BurstBand::Ripple, 90.0),
        (BurstBand::Ripple, 200.0),
        (BurstBand::FastRipple, 300.0),
        (BurstBand::FastRipple, 450.0),
        (BurstBand::Both, 250.0),
    ] {
        let mut spec = SynthSpec::new(1.0, 0.0, 1);
        spec.events.push(burst(0.3, band, f, 50.0, 0.1));
        let (rec, ann) = synthesize_ieeg(&spec).unwrap();
        assert_eq!(ann[0].kind, AnnotationKind::PlantedHfo);
        assert_eq!((ann[0].start_s, ann[0].end_s), (0.3, 0.4));
        let share = energy_near(rec.channel("CH1").unwrap(), 2000.0, f, 20.0);
        assert!(share >= 0.9, "{f} Hz: {share}");
    }
}

#[test]
fn out_of_range_burst_is_rejected() {
    let mut spec = SynthSpec::new(1.0, 1.0, 1);
    spec.events
        .push(burst(0.9, BurstBand::Ripple, 150.0, 10.0, 0.2));
    assert!(matches!(
        synthesize_ieeg(&spec),
        Err(Error::EventPastEnd { index: 0, .. })
    ));
}

#[test]
fn binary_and_csv_agree() {
    let (rec, _) = synthesize_ieeg(&SynthSpec::new(0.5, 4.0, 2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (c, b) = (dir.path().join("r.csv"), dir.path().join("r.bin"));
    save_recording(&c, &rec, RecordingFormat::Csv).unwrap();
    save_recording(&b, &rec, RecordingFormat::Binary).unwrap();
    assert_eq!(RecordingFormat::from_path(&b), RecordingFormat::Binary);
    assert_eq!(load_recording(&c, RecordingFormat::Csv).unwrap(), rec);
    assert_eq!(load_recording(&b, RecordingFormat::Binary).unwrap(), rec);
}

#[test]
fn missing_file_reports_path() {
    let err = load_recording("/nonexistent/x.csv", RecordingFormat::Csv).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/x.csv"));
}

fn recording_strategy() -> impl Strategy<Value = Recording> {
    (1usize..4, 1usize..50).prop_flat_map(|(channels, n)| {
        (
            prop::collection::vec(prop::collection::vec(-1e6..1e6f64, n), channels),
            prop::sample::select(vec![1000.0, 2000.0, 2048.0, 30000.0]),
            "[A-Za-z0-9]{0,6}",
        )
            .prop_map(move |(samples, fs, pid)| {
                let labels = (0..channels)
                    .map(|i| format!("AR{}-{}", i + 1, i + 2))
                    .collect();
                Recording::new(fs, labels, samples, pid, "N1-01").unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recordings_round_trip(rec in recording_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        for format in [RecordingFormat::Csv, RecordingFormat::Binary] {
            let p = dir.path().join("r");
            save_recording(&p, &rec, format).unwrap();
            prop_assert_eq!(&load_recording(&p, format).unwrap(), &rec);
        }
    }

    #[test]
    fn annotations_round_trip(spans in prop::collection::vec((0.0..100.0f64, 0.0..1.0f64), 0..10)) {
        let ann: Vec<EventAnnotation> = spans
            .iter()
            .enumerate()
            .map(|(i, (s, l))| EventAnnotation {
                channel: format!("C{i}"),
                start_s: *s,
                end_s: s + l,
                kind: if i % 2 == 0 { AnnotationKind::PlantedHfo } else { AnnotationKind::LabeledHfo },
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        save_annotations(&p, &ann).unwrap();
        prop_assert_eq!(load_annotations(&p).unwrap(), ann);
    }
}
