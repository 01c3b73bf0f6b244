//! Shared fixtures for the benchmarks in `benches/`.

use hfo_core::pipeline::{encode_recording, ChannelEncoding};
use hfo_core::signal_io::{synthesize_ieeg, BurstBand, SynthEvent};
use hfo_core::{ChainSettings, Recording, SynthSpec};

pub const SEED: u64 = 0x5EED;

/// One channel of noise with a ripple burst every second.
pub fn recording(duration_s: f64) -> Recording {
    let mut spec = SynthSpec::new(duration_s, 10.0, SEED);
    let mut t = 1.0;
    while t + 0.05 < duration_s {
        spec.events.push(SynthEvent {
            time_s: t,
            band: BurstBand::Ripple,
            burst_frequency_hz: 140.0,
            amplitude_uv: 50.0,
            length_s: 0.05,
            channel: None,
        });
        t += 1.0;
    }
    synthesize_ieeg(&spec).expect("fixture spec is valid").0
}

pub fn encoding(duration_s: f64) -> ChannelEncoding {
    let rec = recording(duration_s);
    encode_recording(&rec, &ChainSettings::default())
        .expect("fixture encodes")
        .remove(0)
}
