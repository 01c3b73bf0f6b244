//! Acceptance suite: one PASS/FAIL line per criterion, with runtimes.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hfo_core::adm::{compute_baseline, decode, encode, AdmConfig, Polarity, SpikeTrain};
use hfo_core::analytics::{
    classify_outcome, compute_metrics, format_percent, hfo_rate, test_retest, Classification,
};
use hfo_core::filters::{design_bandpass, BandName, BandSpec, BiquadCoeffs};
use hfo_core::pipeline::{calibrate, detect_encodings, encode_recording};
use hfo_core::signal_io::{
    save_recording, synthesize_ieeg, BurstBand, SynthChannel, SynthEvent, SynthSpec,
};
use hfo_core::snn::{
    reference_simulate, sample_network, simulate, NetworkParams, NeuronParams, DEFAULT_SEED,
};
use hfo_core::{ChainSettings, HfoVector, NetworkConfig, RecordingFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// 1. Outcome metrics

/// Containment of the HFO area in the resection and ILAE class, per patient.
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

fn percents(c: &[Classification]) -> Result<Vec<String>, String> {
    let m = compute_metrics(c).map_err(|e| e.to_string())?;
    Ok(m.rows().iter().map(|(_, r)| format_percent(*r)).collect())
}

fn metrics_reproduction() -> Outcome {
    let mut c: Vec<Classification> = PATIENTS
        .iter()
        .map(|(contained, ilae)| {
            let resection: &[&str] = if *contained {
                &["AR1-2", "AR2-3"]
            } else {
                &["HL1-2"]
            };
            classify_outcome(&["AR1-2"], resection, *ilae)
        })
        .collect();
    let snn = percents(&c)?;
    ensure(
        snn == ["100", "33", "75", "100", "78"],
        format!("SNN column {snn:?}"),
    )?;
    c[7] = Classification::FN;
    let morph = percents(&c)?;
    ensure(
        morph == ["100", "--", "67", "--", "67"],
        format!("morphology column {morph:?}"),
    )?;
    Ok(format!(
        "SNN {}, morphology {}",
        snn.join("/"),
        morph.join("/")
    ))
}

// 2. ADM reconstruction

fn adm_reconstruction() -> Outcome {
    let fs = 2000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let n = rng.random_range(500..4000);
        let comps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..8))
            .map(|_| {
                (
                    rng.random_range(0.1..1.0),
                    rng.random_range(80.0..500.0),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                comps
                    .iter()
                    .map(|(a, f, p)| a * (2.0 * PI * f * i as f64 / fs + p).sin())
                    .sum()
            })
            .collect();
        let mut c = AdmConfig::symmetric(rng.random_range(1.0..40.0));
        c.refractory_s = hfo_core::adm::DEFAULT_REFRACTORY_S;
        // the amplified signal moves at most one threshold per sample
        let step = raw
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        let scale = rng.random_range(0.1..1.0) * c.v_tu_uv / (c.amplifier_gain * step);
        let offset = rng.random_range(-50.0..50.0);
        let x: Vec<f64> = raw.iter().map(|v| v * scale + offset).collect();
        let (up, dn) = encode(&x, fs, &c, "c", BandName::Ripple).map_err(|e| e.to_string())?;
        let stairs = decode(&up, &dn, &c, n as f64 / fs).map_err(|e| e.to_string())?;
        let rec = stairs.sample(fs, n);
        let err = x
            .iter()
            .zip(&rec)
            .map(|(v, r)| (r - (v - x[0])).abs())
            .fold(0.0, f64::max);
        let bound = c.reconstruction_bound();
        ensure(
            err <= bound * (1.0 + 1e-12),
            format!("signal {k}: error {err} > bound {bound}"),
        )?;
        worst = worst.max(err / bound);
    }
    Ok(format!("50 signals, worst error {:.3} of the bound", worst))
}

// 3. Event-driven SNN against the dense reference

/// Peak membrane response to one synaptic kick of weight `w`.
fn psp_peak(w: f64, tau_m: f64, tau_s: f64) -> f64 {
    let r = tau_s / tau_m;
    let d = tau_m - tau_s;
    w * (tau_m * tau_s / d) * (r.powf(tau_s / d) - r.powf(tau_m / d))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (NetworkParams, Vec<SpikeTrain>, f64) {
    let tau_m = rng.random_range(0.005..0.03);
    let tau_exc = rng.random_range(0.003..0.006);
    let tau_inh = rng.random_range(0.0001..0.001);
    let w_exc = rng.random_range(0.5..3.0) / psp_peak(1.0, tau_m, tau_exc) / 6.0;
    let w_inh = w_exc * rng.random_range(0.0..3.0);
    let refractory_s = rng.random_range(0.0..0.002);
    let duration = 0.25;
    let trains = [Polarity::Up, Polarity::Dn]
        .into_iter()
        .map(|pol| {
            let rate = rng.random_range(50.0..1500.0);
            let mut t = rng.random_range(0.0..0.01);
            let mut times = Vec::new();
            while t < duration {
                times.push(t);
                t += rng.random_range(0.0..2.0) / rate + 1e-5;
            }
            SpikeTrain::new(pol, "c", BandName::Ripple, times).unwrap()
        })
        .collect();
    let neuron = NeuronParams {
        tau_m,
        tau_exc,
        tau_inh,
        w_exc,
        w_inh,
        threshold: 1.0,
        enabled: true,
    };
    (
        NetworkParams {
            neurons: vec![neuron],
            refractory_s,
        },
        trains,
        duration,
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut spikes, mut worst) = (0, 0.0_f64);
    for k in 0..100 {
        let (p, inputs, duration) = random_instance(&mut rng);
        let fast = simulate(&p, &inputs, duration).map_err(|e| e.to_string())?;
        let slow = reference_simulate(&p, &inputs, duration, 10e-6).map_err(|e| e.to_string())?;
        let (a, b) = (&fast.spikes[0], &slow.spikes[0]);
        ensure(
            a.len() == b.len(),
            format!("instance {k}: {} vs {} spikes", a.len(), b.len()),
        )?;
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs());
        }
        ensure(
            worst <= 20e-6,
            format!("instance {k}: timing error {:.1} us", worst * 1e6),
        )?;
        spikes += a.len();
    }
    ensure(
        spikes > 100,
        format!("only {spikes} spikes across all instances"),
    )?;
    Ok(format!(
        "100 instances, {spikes} spikes, worst |dt| {:.1} us",
        worst * 1e6
    ))
}

// 4. Filter edges

fn magnitude(c: &BiquadCoeffs, f: f64, fs: f64) -> f64 {
    let w = 2.0 * PI * f / fs;
    c.sections
        .iter()
        .map(|s| {
            let (c1, s1, c2, s2) = (w.cos(), w.sin(), (2.0 * w).cos(), (2.0 * w).sin());
            let num =
                ((s.b0 + s.b1 * c1 + s.b2 * c2).powi(2) + (s.b1 * s1 + s.b2 * s2).powi(2)).sqrt();
            let den =
                ((1.0 + s.a1 * c1 + s.a2 * c2).powi(2) + (s.a1 * s1 + s.a2 * s2).powi(2)).sqrt();
            num / den
        })
        .product()
}

fn crossing(c: &BiquadCoeffs, fs: f64, mut a: f64, mut b: f64, level: f64) -> f64 {
    let above_a = magnitude(c, a, fs) > level;
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if (magnitude(c, m, fs) > level) == above_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn filter_edges() -> Outcome {
    let fs = 2000.0;
    let mut found = Vec::new();
    for (band, lo_want, hi_want) in [
        (BandSpec::ripple(), 80.0, 250.0),
        (BandSpec::fast_ripple(), 250.0, 500.0),
    ] {
        let c = design_bandpass(&band, fs).map_err(|e| e.to_string())?;
        let (fp, gp) = (1..100_000)
            .map(|i| i as f64 * 0.01)
            .map(|f| (f, magnitude(&c, f, fs)))
            .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let level = gp / 2f64.sqrt();
        let lo = crossing(&c, fs, 0.01, fp, level);
        let hi = crossing(&c, fs, fp, fs / 2.0 - 0.01, level);
        ensure(
            (lo / lo_want - 1.0).abs() <= 0.05,
            format!("{band:?} low edge {lo:.2} Hz"),
        )?;
        ensure(
            (hi / hi_want - 1.0).abs() <= 0.05,
            format!("{band:?} high edge {hi:.2} Hz"),
        )?;
        found.push(format!("[{lo:.1}, {hi:.1}]"));
    }
    Ok(format!("-3 dB edges {} Hz", found.join(" and ")))
}

// 5. Baseline

fn baseline_algorithm() -> Outcome {
    let fs = 2000.0;
    let mut x = Vec::new();
    for k in 1..=20 {
        let mut w = vec![0.0; 100];
        w[37] = if k % 2 == 0 { k as f64 } else { -(k as f64) };
        x.extend(w);
    }
    let b = compute_baseline(&x, fs).map_err(|e| e.to_string())?;
    ensure(b == 3.0, format!("window-maxima fixture gave {b}"))?;

    let floors = [5.0, 8.0, 13.0];
    let mut spec = SynthSpec::new(2.0, 1.0, DEFAULT_SEED);
    spec.channels = floors
        .iter()
        .map(|f| SynthChannel {
            label: format!("F{f}"),
            noise_floor_uv: Some(*f),
        })
        .collect();
    let (rec, _) = synthesize_ieeg(&spec).map_err(|e| e.to_string())?;
    let base: Vec<f64> = rec
        .samples()
        .iter()
        .map(|s| compute_baseline(s, fs).unwrap())
        .collect();
    for i in 0..3 {
        ensure(
            (base[i] / floors[i] - 1.0).abs() <= 0.15,
            format!("baselines {base:?} vs floors {floors:?}"),
        )?;
        if i > 0 {
            ensure(
                base[i] > base[i - 1],
                format!("baselines {base:?} not ordered"),
            )?;
        }
    }
    Ok(format!(
        "fixture 3.0 uV, floors 5/8/13 -> {:.2}/{:.2}/{:.2} uV",
        base[0], base[1], base[2]
    ))
}

// 6. End-to-end synthetic detection

const PLANTED: usize = 10;
const HIT_WINDOW_S: f64 = 0.025;

fn end_to_end() -> Outcome {
    let noise_spec = SynthSpec::new(60.0, 10.0, DEFAULT_SEED);
    let (noise, _) = synthesize_ieeg(&noise_spec).map_err(|e| e.to_string())?;
    let band_baseline = |b: BandSpec| {
        let y = design_bandpass(&b, noise.sample_rate_hz())
            .unwrap()
            .filter()
            .run(&noise.samples()[0]);
        compute_baseline(&y, noise.sample_rate_hz()).unwrap()
    };
    let (rb, fb) = (
        band_baseline(BandSpec::ripple()),
        band_baseline(BandSpec::fast_ripple()),
    );
    let mut spec = noise_spec.clone();
    for i in 0..PLANTED {
        let fr = i % 2 == 1;
        spec.events.push(SynthEvent {
            time_s: 3.0 + 5.5 * i as f64,
            band: if fr {
                BurstBand::FastRipple
            } else {
                BurstBand::Ripple
            },
            burst_frequency_hz: if fr { 350.0 } else { 140.0 },
            amplitude_uv: 3.0 * if fr { fb } else { rb },
            length_s: 0.05,
            channel: None,
        });
    }
    let (planted, ann) = synthesize_ieeg(&spec).map_err(|e| e.to_string())?;

    let settings = ChainSettings::default();
    let net = sample_network(&NetworkConfig::default()).map_err(|e| e.to_string())?;
    let noise_enc = encode_recording(&noise, &settings).map_err(|e| e.to_string())?;
    let params = calibrate(
        &net,
        &[(noise_enc.clone(), noise.duration_s())],
        settings.detection.outlier_rate_hz,
    )
    .map_err(|e| e.to_string())?;
    let planted_enc = encode_recording(&planted, &settings).map_err(|e| e.to_string())?;
    let found = detect_encodings(
        &params,
        &planted_enc,
        planted.duration_s(),
        &settings.detection,
    )
    .map_err(|e| e.to_string())?;
    let quiet = detect_encodings(&params, &noise_enc, noise.duration_s(), &settings.detection)
        .map_err(|e| e.to_string())?;
    let events = &found[0].events;
    // a burst and an event are compared at their centres
    let hits = ann
        .iter()
        .filter(|a| {
            events
                .iter()
                .any(|e| (0.5 * (e.start_s + e.end_s) - a.center_s()).abs() <= HIT_WINDOW_S)
        })
        .count();
    let onset_hits = ann
        .iter()
        .filter(|a| {
            events
                .iter()
                .any(|e| (e.start_s - a.start_s).abs() <= HIT_WINDOW_S)
        })
        .count();
    let noise_events: usize = quiet.iter().map(|d| d.events.len()).sum();
    let summary = format!(
        "{hits}/{PLANTED} detected within 25 ms ({onset_hits}/{PLANTED} by onset), {} events in total, \
         {noise_events} on noise, {} neurons enabled",
        events.len(),
        params.enabled_count()
    );
    ensure(hits >= 9 && noise_events == 0, summary.clone())?;
    Ok(summary)
}

// 7. Mismatch sampling

fn mismatch_sampling() -> Outcome {
    let p = sample_network(&NetworkConfig::default()).map_err(|e| e.to_string())?;
    let tm: Vec<f64> = p.neurons.iter().map(|n| n.tau_m).collect();
    let mean = tm.iter().sum::<f64>() / tm.len() as f64;
    let sd = (tm.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (tm.len() - 1) as f64).sqrt();
    let cv = sd / mean;
    ensure((mean - 0.015).abs() <= 0.001, format!("tau_m mean {mean}"))?;
    ensure((0.15..=0.25).contains(&cv), format!("tau_m cv {cv}"))?;
    ensure(
        p.neurons
            .iter()
            .all(|n| (0.003..=0.006).contains(&n.tau_exc)),
        "tau_exc out of range",
    )?;
    ensure(
        p.neurons
            .iter()
            .all(|n| (0.0001..=0.001).contains(&n.tau_inh)),
        "tau_inh out of range",
    )?;
    Ok(format!("tau_m mean {:.2} ms, cv {cv:.3}", mean * 1e3))
}

// 8. Test-retest

fn retest_bounds() -> Outcome {
    let ch: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let v = |r: Vec<f64>| HfoVector::new("i", ch.clone(), r).unwrap();
    let same = test_retest(&[v(vec![1.0, 2.0, 0.0]), v(vec![1.0, 2.0, 0.0])])
        .unwrap()
        .score;
    let disjoint = test_retest(&[v(vec![1.0, 0.0, 0.0]), v(vec![0.0, 2.0, 3.0])])
        .unwrap()
        .score;
    ensure(
        same == 1.0 && disjoint == 0.0,
        format!("duplicate {same}, disjoint {disjoint}"),
    )?;

    let settings = ChainSettings::default();
    let net = sample_network(&NetworkConfig::default()).map_err(|e| e.to_string())?;
    let labels = ["AR1-2", "AR2-3", "HL1-2"];
    let mut vectors = Vec::new();
    for interval in 0..4u64 {
        let mut spec = SynthSpec::new(10.0, 10.0, DEFAULT_SEED + interval);
        spec.channels = labels
            .iter()
            .map(|l| SynthChannel {
                label: l.to_string(),
                noise_floor_uv: None,
            })
            .collect();
        for k in 0..(2 + interval) {
            spec.events.push(SynthEvent {
                time_s: 1.5 + 2.0 * k as f64,
                band: BurstBand::Ripple,
                burst_frequency_hz: 150.0,
                amplitude_uv: 60.0,
                length_s: 0.05,
                channel: Some(labels[(k % 2) as usize].to_string()),
            });
        }
        let (rec, _) = synthesize_ieeg(&spec).map_err(|e| e.to_string())?;
        let enc = encode_recording(&rec, &settings).map_err(|e| e.to_string())?;
        let params = calibrate(
            &net,
            &[(enc.clone(), rec.duration_s())],
            settings.detection.outlier_rate_hz,
        )
        .map_err(|e| e.to_string())?;
        let det = detect_encodings(&params, &enc, rec.duration_s(), &settings.detection)
            .map_err(|e| e.to_string())?;
        let rates = det
            .iter()
            .map(|d| hfo_rate(d.events.len(), rec.duration_s()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        vectors.push(
            HfoVector::new(
                format!("N{interval}"),
                labels.map(String::from).to_vec(),
                rates,
            )
            .unwrap(),
        );
    }
    let s = test_retest(&vectors).map_err(|e| e.to_string())?.score;
    ensure(
        (0.0..=1.0).contains(&s),
        format!("multi-interval score {s}"),
    )?;
    Ok(format!("duplicate 1, disjoint 0, 4-interval run {s:.3}"))
}

// 9. Determinism of detect

/// Runs `detect` inside `dir` with relative paths and returns every output
/// file, concatenated.
fn detect_once(dir: &Path) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hfo-pipe"));
    cmd.current_dir(dir).args(["detect", "--out", "out"]);
    for i in 1..=3 {
        cmd.arg("--input").arg(format!("N{i}.csv"));
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    ensure(
        o.status.success(),
        format!("detect failed: {}", String::from_utf8_lossy(&o.stderr)),
    )?;
    let mut bytes = Vec::new();
    for sub in [
        "reports/P9.json",
        "events/P9/N1.csv",
        "events/P9/N2.csv",
        "events/P9/N3.csv",
        "manifest.json",
    ] {
        bytes.extend(fs::read(dir.join("out").join(sub)).map_err(|e| format!("{sub}: {e}"))?);
    }
    Ok(bytes)
}

fn determinism() -> Outcome {
    let runs = [tempfile::tempdir(), tempfile::tempdir()];
    let dirs: Vec<&Path> = runs.iter().flatten().map(|d| d.path()).collect();
    ensure(dirs.len() == 2, "cannot create run directories")?;
    for i in 1..=3u64 {
        let mut spec = SynthSpec::new(8.0, 10.0, 100 + i);
        spec.patient_id = "P9".into();
        spec.interval_id = format!("N{i}");
        spec.channels = ["A1", "A2"]
            .map(|l| SynthChannel {
                label: l.into(),
                noise_floor_uv: None,
            })
            .to_vec();
        spec.events.push(SynthEvent {
            time_s: 2.0 + i as f64,
            band: BurstBand::Ripple,
            burst_frequency_hz: 120.0,
            amplitude_uv: 50.0,
            length_s: 0.05,
            channel: Some("A1".into()),
        });
        let (rec, _) = synthesize_ieeg(&spec).map_err(|e| e.to_string())?;
        for d in &dirs {
            save_recording(d.join(format!("N{i}.csv")), &rec, RecordingFormat::Csv)
                .map_err(|e| e.to_string())?;
        }
    }
    let a = detect_once(dirs[0])?;
    let b = detect_once(dirs[1])?;
    ensure(a == b, "detect outputs differ between runs")?;
    Ok(format!("two runs, {} output bytes identical", a.len()))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: "1",
            name: "outcome metrics",
            limit: secs(1),
            run: metrics_reproduction,
        },
        Criterion {
            id: "2",
            name: "ADM reconstruction bound",
            limit: secs(10),
            run: adm_reconstruction,
        },
        Criterion {
            id: "3",
            name: "event-driven vs dense SNN",
            limit: secs(60),
            run: oracle_equivalence,
        },
        Criterion {
            id: "4",
            name: "filter -3 dB edges",
            limit: secs(1),
            run: filter_edges,
        },
        Criterion {
            id: "5",
            name: "baseline estimation",
            limit: None,
            run: baseline_algorithm,
        },
        Criterion {
            id: "6",
            name: "end-to-end synthetic detection",
            limit: secs(120),
            run: end_to_end,
        },
        Criterion {
            id: "7",
            name: "mismatch sampling",
            limit: None,
            run: mismatch_sampling,
        },
        Criterion {
            id: "8",
            name: "test-retest bounds",
            limit: None,
            run: retest_bounds,
        },
        Criterion {
            id: "9",
            name: "detect determinism",
            limit: None,
            run: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if took > limit => {
                Err(format!("took {took:.2?}, limit {limit:.0?}"))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!(
                "PASS {:>2} {}: {detail} ({:.3} s)",
                c.id,
                c.name,
                took.as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL {:>2} {}: {why} ({:.3} s)",
                    c.id,
                    c.name,
                    took.as_secs_f64()
                );
            }
        }
    }
    println!("SKIP 10 patient 1 clinical recordings: dataset not bundled");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
