//! Multichannel iEEG recordings: validation, CSV/binary persistence, event
//! annotations, and a seeded synthetic generator.
//!
//! CSV layout:
//!
//! ```text
//! # sample_rate_hz=2000 patient_id=P1 interval_id=N1-03
//! AR1-2,AR2-3,AR3-4
//! 1.25,-0.5,3
//! ...
//! ```
//!
//! Only `sample_rate_hz` is required on the first line; the other
//! `key=value` tokens are optional metadata. Annotation sidecars are plain
//! CSV with the header `channel,start_s,end_s,kind`.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::adm::{lowest_quartile_window_peak, BASELINE_WINDOWS, BASELINE_WINDOW_S};
use crate::error::{Error, Result};
use crate::filters::{FAST_RIPPLE_BAND_HZ, RIPPLE_BAND_HZ};

pub const MIN_SAMPLE_RATE_HZ: f64 = 1000.0;
pub const DEFAULT_SYNTH_SAMPLE_RATE_HZ: f64 = 2000.0;

const BINARY_MAGIC: &[u8; 8] = b"HFOREC1\0";

/// A multichannel recording in µV. Construct through [`Recording::new`] so the
/// invariants hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    sample_rate_hz: f64,
    channels: Vec<String>,
    samples: Vec<Vec<f64>>,
    pub patient_id: String,
    pub interval_id: String,
}

impl Recording {
    pub fn new(
        sample_rate_hz: f64,
        channels: Vec<String>,
        samples: Vec<Vec<f64>>,
        patient_id: impl Into<String>,
        interval_id: impl Into<String>,
    ) -> Result<Self> {
        if !sample_rate_hz.is_finite() || sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(Error::SampleRateTooLow(sample_rate_hz));
        }
        if channels.is_empty() {
            return Err(Error::InvalidRecording("no channels".into()));
        }
        if channels.len() != samples.len() {
            return Err(Error::InvalidRecording(format!(
                "{} channel labels but {} sample vectors",
                channels.len(),
                samples.len()
            )));
        }
        for (i, label) in channels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(Error::InvalidRecording(format!(
                    "channel {i} has an empty label"
                )));
            }
            if channels[..i].contains(label) {
                return Err(Error::InvalidRecording(format!(
                    "duplicate channel label {label:?}"
                )));
            }
        }
        let n = samples[0].len();
        for (label, s) in channels.iter().zip(&samples) {
            if s.len() != n {
                return Err(Error::InvalidRecording(format!(
                    "channel {label:?} has {} samples, expected {n}",
                    s.len()
                )));
            }
            if let Some(idx) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidRecording(format!(
                    "channel {label:?} sample {idx} is not finite"
                )));
            }
        }
        Ok(Recording {
            sample_rate_hz,
            channels,
            samples,
            patient_id: patient_id.into(),
            interval_id: interval_id.into(),
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel(&self, label: &str) -> Option<&[f64]> {
        self.channel_index(label)
            .map(|i| self.samples[i].as_slice())
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == label)
    }

    pub fn sample_count(&self) -> usize {
        self.samples[0].len()
    }

    pub fn duration_s(&self) -> f64 {
        self.sample_count() as f64 / self.sample_rate_hz
    }

    /// Same metadata and channel layout, new sample data. Lengths must match.
    pub(crate) fn with_samples(&self, samples: Vec<Vec<f64>>) -> Recording {
        debug_assert_eq!(samples.len(), self.channels.len());
        Recording {
            sample_rate_hz: self.sample_rate_hz,
            channels: self.channels.clone(),
            samples,
            patient_id: self.patient_id.clone(),
            interval_id: self.interval_id.clone(),
        }
    }

    /// Rename every channel by appending `suffix`.
    pub(crate) fn append_to_labels(&mut self, suffix: &str) {
        for c in &mut self.channels {
            c.push_str(suffix);
        }
    }

    /// Samples `[start_s, end_s)` of every channel, clamped to the recording.
    pub fn slice(&self, start_s: f64, end_s: f64) -> Result<Recording> {
        let n = self.sample_count();
        let a = ((start_s * self.sample_rate_hz).round().max(0.0) as usize).min(n);
        let b = ((end_s * self.sample_rate_hz).round().max(0.0) as usize).min(n);
        if b <= a {
            return Err(Error::InvalidInput(format!(
                "empty slice [{start_s}, {end_s}) s"
            )));
        }
        Ok(self.with_samples(self.samples.iter().map(|s| s[a..b].to_vec()).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordingFormat {
    Csv,
    Binary,
}

impl RecordingFormat {
    /// `.bin` and `.hfor` are binary; everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("hfor") => RecordingFormat::Binary,
            _ => RecordingFormat::Csv,
        }
    }
}

pub fn load_recording(path: impl AsRef<Path>, format: RecordingFormat) -> Result<Recording> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        RecordingFormat::Csv => read_csv(BufReader::new(file), path),
        RecordingFormat::Binary => read_binary(BufReader::new(file), path),
    }
}

pub fn save_recording(
    path: impl AsRef<Path>,
    recording: &Recording,
    format: RecordingFormat,
) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        RecordingFormat::Csv => write_csv(&mut w, recording),
        RecordingFormat::Binary => write_binary(&mut w, recording),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

fn write_csv(w: &mut impl Write, r: &Recording) -> std::io::Result<()> {
    write!(w, "# sample_rate_hz={}", r.sample_rate_hz)?;
    if !r.patient_id.is_empty() {
        write!(w, " patient_id={}", r.patient_id)?;
    }
    if !r.interval_id.is_empty() {
        write!(w, " interval_id={}", r.interval_id)?;
    }
    writeln!(w)?;
    writeln!(w, "{}", r.channels.join(","))?;
    let mut line = String::new();
    for i in 0..r.sample_count() {
        line.clear();
        for (c, s) in r.samples.iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            // `Display` for f64 is the shortest representation that parses
            // back to the same bits.
            use fmt::Write as _;
            let _ = write!(line, "{}", s[i]);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn read_csv(reader: impl BufRead, path: &Path) -> Result<Recording> {
    let mut lines = reader.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i + 1, l)),
            Some((_, Err(e))) => Err(Error::io(path, e)),
            None => Err(Error::MalformedHeader(format!("missing {what} line"))),
        }
    };

    let (_, first) = next_line("sample-rate")?;
    let meta = parse_meta_line(&first)?;
    let (_, labels_line) = next_line("channel-label")?;
    let channels: Vec<String> = labels_line
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if channels.iter().any(|c| c.is_empty()) {
        return Err(Error::MalformedHeader(
            "empty channel label on line 2".into(),
        ));
    }

    let mut samples = vec![Vec::new(); channels.len()];
    for (idx, line) in lines {
        let row = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != channels.len() {
            return Err(Error::RaggedRow {
                row,
                expected: channels.len(),
                found: fields.len(),
            });
        }
        for (field, (raw, out)) in fields.iter().zip(samples.iter_mut()).enumerate() {
            let raw = raw.trim();
            let v = f64::from_str(raw).map_err(|_| Error::NonNumeric {
                row,
                field,
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row, field });
            }
            out.push(v);
        }
    }
    if samples[0].is_empty() {
        return Err(Error::InvalidRecording("no sample rows".into()));
    }
    Recording::new(
        meta.sample_rate_hz,
        channels,
        samples,
        meta.patient_id,
        meta.interval_id,
    )
}

struct Meta {
    sample_rate_hz: f64,
    patient_id: String,
    interval_id: String,
}

fn parse_meta_line(line: &str) -> Result<Meta> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::MalformedHeader("line 1 must start with '#'".into()))?;
    let mut rate = None;
    let mut patient_id = String::new();
    let mut interval_id = String::new();
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| {
            Error::MalformedHeader(format!("expected key=value, found {token:?}"))
        })?;
        match key {
            "sample_rate_hz" => {
                let v = f64::from_str(value).map_err(|_| {
                    Error::MalformedHeader(format!("sample_rate_hz {value:?} is not a number"))
                })?;
                rate = Some(v);
            }
            "patient_id" => patient_id = value.to_string(),
            "interval_id" => interval_id = value.to_string(),
            _ => {}
        }
    }
    let sample_rate_hz =
        rate.ok_or_else(|| Error::MalformedHeader("line 1 lacks sample_rate_hz".into()))?;
    if !sample_rate_hz.is_finite() || sample_rate_hz < MIN_SAMPLE_RATE_HZ {
        return Err(Error::SampleRateTooLow(sample_rate_hz));
    }
    Ok(Meta {
        sample_rate_hz,
        patient_id,
        interval_id,
    })
}

fn write_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn write_binary(w: &mut impl Write, r: &Recording) -> std::io::Result<()> {
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&r.sample_rate_hz.to_le_bytes())?;
    w.write_all(&(r.channels.len() as u32).to_le_bytes())?;
    w.write_all(&(r.sample_count() as u64).to_le_bytes())?;
    write_str(w, &r.patient_id)?;
    write_str(w, &r.interval_id)?;
    for c in &r.channels {
        write_str(w, c)?;
    }
    for s in &r.samples {
        for v in s {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_binary(mut r: impl Read, path: &Path) -> Result<Recording> {
    let io = |e| Error::io(path, e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::MalformedHeader("bad binary magic".into()));
    }
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b8).map_err(io)?;
    let rate = f64::from_le_bytes(b8);
    r.read_exact(&mut b4).map_err(io)?;
    let n_ch = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8).map_err(io)?;
    let n = u64::from_le_bytes(b8) as usize;
    let read_string = |r: &mut dyn Read| -> Result<String> {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let mut buf = vec![0u8; u32::from_le_bytes(b4) as usize];
        r.read_exact(&mut buf).map_err(io)?;
        String::from_utf8(buf).map_err(|_| Error::MalformedHeader("label is not UTF-8".into()))
    };
    let patient_id = read_string(&mut r)?;
    let interval_id = read_string(&mut r)?;
    let channels = (0..n_ch)
        .map(|_| read_string(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(n_ch);
    for _ in 0..n_ch {
        let mut ch = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8).map_err(io)?;
            ch.push(f64::from_le_bytes(b8));
        }
        samples.push(ch);
    }
    Recording::new(rate, channels, samples, patient_id, interval_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnotationKind {
    #[serde(rename = "planted-HFO")]
    PlantedHfo,
    #[serde(rename = "labeled-HFO")]
    LabeledHfo,
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnotationKind::PlantedHfo => "planted-HFO",
            AnnotationKind::LabeledHfo => "labeled-HFO",
        })
    }
}

impl FromStr for AnnotationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "planted-HFO" => Ok(AnnotationKind::PlantedHfo),
            "labeled-HFO" => Ok(AnnotationKind::LabeledHfo),
            other => Err(Error::InvalidAnnotation(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventAnnotation {
    pub channel: String,
    pub start_s: f64,
    pub end_s: f64,
    pub kind: AnnotationKind,
}

impl EventAnnotation {
    pub fn validate(&self, duration_s: f64) -> Result<()> {
        if !(0.0 <= self.start_s && self.start_s < self.end_s && self.end_s <= duration_s) {
            return Err(Error::InvalidAnnotation(format!(
                "{} [{}, {}] is outside 0 <= start < end <= {duration_s}",
                self.channel, self.start_s, self.end_s
            )));
        }
        Ok(())
    }

    pub fn center_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

pub fn save_annotations(path: impl AsRef<Path>, annotations: &[EventAnnotation]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("channel,start_s,end_s,kind\n");
    for a in annotations {
        out.push_str(&format!(
            "{},{},{},{}\n",
            a.channel, a.start_s, a.end_s, a.kind
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<EventAnnotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "channel,start_s,end_s,kind" => {}
        _ => {
            return Err(Error::MalformedHeader(
                "annotation header must be channel,start_s,end_s,kind".into(),
            ))
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(Error::RaggedRow {
                row,
                expected: 4,
                found: f.len(),
            });
        }
        let num = |field: usize| {
            f64::from_str(f[field]).map_err(|_| Error::NonNumeric {
                row,
                field,
                value: f[field].to_string(),
            })
        };
        let a = EventAnnotation {
            channel: f[0].to_string(),
            start_s: num(1)?,
            end_s: num(2)?,
            kind: f[3].parse()?,
        };
        if !(a.start_s < a.end_s) || a.start_s < 0.0 {
            return Err(Error::InvalidAnnotation(format!(
                "row {row}: start must precede end"
            )));
        }
        out.push(a);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BurstBand {
    Ripple,
    FastRipple,
    Both,
}

impl BurstBand {
    pub fn range_hz(self) -> (f64, f64) {
        match self {
            BurstBand::Ripple => RIPPLE_BAND_HZ,
            BurstBand::FastRipple => FAST_RIPPLE_BAND_HZ,
            BurstBand::Both => (RIPPLE_BAND_HZ.0, FAST_RIPPLE_BAND_HZ.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthEvent {
    pub time_s: f64,
    pub band: BurstBand,
    pub burst_frequency_hz: f64,
    pub amplitude_uv: f64,
    pub length_s: f64,
    /// Target channel label; `None` means the first channel.
    #[serde(default)]
    pub channel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthChannel {
    pub label: String,
    /// Overrides the spec-wide noise floor for this channel.
    #[serde(default)]
    pub noise_floor_uv: Option<f64>,
}

fn default_synth_rate() -> f64 {
    DEFAULT_SYNTH_SAMPLE_RATE_HZ
}

fn default_synth_channels() -> Vec<SynthChannel> {
    vec![SynthChannel {
        label: "CH1".into(),
        noise_floor_uv: None,
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub noise_floor_uv: f64,
    #[serde(default)]
    pub events: Vec<SynthEvent>,
    pub seed: u64,
    #[serde(default = "default_synth_rate")]
    pub sample_rate_hz: f64,
    #[serde(default = "default_synth_channels")]
    pub channels: Vec<SynthChannel>,
    #[serde(default)]
    pub patient_id: String,
    #[serde(default)]
    pub interval_id: String,
}

impl SynthSpec {
    pub fn new(duration_s: f64, noise_floor_uv: f64, seed: u64) -> Self {
        SynthSpec {
            duration_s,
            noise_floor_uv,
            events: Vec::new(),
            seed,
            sample_rate_hz: DEFAULT_SYNTH_SAMPLE_RATE_HZ,
            channels: default_synth_channels(),
            patient_id: String::new(),
            interval_id: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthSpec(m));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!(
                "duration_s must be positive, got {}",
                self.duration_s
            ));
        }
        if !(self.noise_floor_uv >= 0.0 && self.noise_floor_uv.is_finite()) {
            return bad(format!(
                "noise_floor_uv must be non-negative, got {}",
                self.noise_floor_uv
            ));
        }
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz < MIN_SAMPLE_RATE_HZ {
            return Err(Error::SampleRateTooLow(self.sample_rate_hz));
        }
        if self.channels.is_empty() {
            return bad("at least one channel is required".into());
        }
        for ch in &self.channels {
            if let Some(f) = ch.noise_floor_uv {
                if !(f >= 0.0 && f.is_finite()) {
                    return bad(format!("channel {} noise floor {f} is invalid", ch.label));
                }
            }
        }
        for (i, ev) in self.events.iter().enumerate() {
            let (lo, hi) = ev.band.range_hz();
            if !(lo..=hi).contains(&ev.burst_frequency_hz) {
                return bad(format!(
                    "event {i}: burst frequency {} Hz is outside {:?} band [{lo}, {hi}] Hz",
                    ev.burst_frequency_hz, ev.band
                ));
            }
            if !(ev.amplitude_uv > 0.0) {
                return bad(format!("event {i}: amplitude must be positive"));
            }
            if !(ev.length_s > 0.0) || ev.time_s < 0.0 {
                return bad(format!("event {i}: needs time_s >= 0 and length_s > 0"));
            }
            if ev.time_s + ev.length_s > self.duration_s {
                return Err(Error::EventPastEnd {
                    index: i,
                    start_s: ev.time_s,
                    length_s: ev.length_s,
                    duration_s: self.duration_s,
                });
            }
            if let Some(c) = &ev.channel {
                if !self.channels.iter().any(|ch| &ch.label == c) {
                    return bad(format!("event {i}: unknown channel {c:?}"));
                }
            }
        }
        Ok(())
    }
}

/// Pink-noise background plus Hann-windowed sinusoidal bursts. Each channel's
/// background is scaled so the baseline estimator on the first second returns
/// that channel's noise floor.
pub fn synthesize_ieeg(spec: &SynthSpec) -> Result<(Recording, Vec<EventAnnotation>)> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let n = (spec.duration_s * fs).round() as usize;
    if n == 0 {
        return Err(Error::InvalidSynthSpec(
            "duration shorter than one sample".into(),
        ));
    }

    let mut samples = Vec::with_capacity(spec.channels.len());
    for (ci, ch) in spec.channels.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(ci as u64);
        let floor = ch.noise_floor_uv.unwrap_or(spec.noise_floor_uv);
        let mut x = pink_noise(n, fs, &mut rng);
        let level = background_level(&x, fs);
        let scale = if level > 0.0 { floor / level } else { 0.0 };
        x.iter_mut().for_each(|v| *v *= scale);
        samples.push(x);
    }

    let mut annotations = Vec::with_capacity(spec.events.len());
    for ev in &spec.events {
        let ci = match &ev.channel {
            Some(c) => spec
                .channels
                .iter()
                .position(|ch| &ch.label == c)
                .unwrap_or(0),
            None => 0,
        };
        add_burst(&mut samples[ci], fs, ev);
        annotations.push(EventAnnotation {
            channel: spec.channels[ci].label.clone(),
            start_s: ev.time_s,
            end_s: ev.time_s + ev.length_s,
            kind: AnnotationKind::PlantedHfo,
        });
    }

    let labels = spec.channels.iter().map(|c| c.label.clone()).collect();
    let rec = Recording::new(fs, labels, samples, &spec.patient_id, &spec.interval_id)?;
    Ok((rec, annotations))
}

/// Level the baseline estimator reports for `x`, falling back to fewer
/// windows (or RMS) when the signal is shorter than a second.
fn background_level(x: &[f64], fs: f64) -> f64 {
    let win = (BASELINE_WINDOW_S * fs).round() as usize;
    let windows = (x.len() / win.max(1)).min(BASELINE_WINDOWS);
    if windows >= 4 {
        lowest_quartile_window_peak(x, win, windows)
    } else {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }
}

/// 1/f-power noise shaped in the frequency domain. Bins below 1 Hz are held at
/// the 1 Hz level so long recordings are not dominated by drift.
fn pink_noise(n: usize, fs: f64, rng: &mut impl Rng) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    let df = fs / n as f64;
    for k in 1..=n / 2 {
        let f = (k as f64 * df).max(1.0);
        let amp = 1.0 / f.sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let c = if 2 * k == n {
            Complex::new(re * amp, 0.0)
        } else {
            Complex::new(re * amp, im * amp)
        };
        spectrum[k] = c;
        if 2 * k != n {
            spectrum[n - k] = c.conj();
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(&mut spectrum);
    spectrum.into_iter().map(|c| c.re).collect()
}

fn add_burst(x: &mut [f64], fs: f64, ev: &SynthEvent) {
    let start = (ev.time_s * fs).round() as usize;
    let len = (ev.length_s * fs).round() as usize;
    let w = 2.0 * std::f64::consts::PI * ev.burst_frequency_hz;
    for i in 0..len {
        let Some(slot) = x.get_mut(start + i) else {
            break;
        };
        let t = i as f64 / fs;
        let envelope = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos());
        *slot += ev.amplitude_uv * envelope * (w * t).sin();
    }
}
