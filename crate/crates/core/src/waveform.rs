//! Complex-baseband synthesis of rectangular RF pulses, fixed-PSD noise
//! injection, and SNR calibration.
//!
//! The carrier is phase-coherent between channels and the downstream
//! coupler and energy detection depend only on the complex envelopes, so
//! pulses are represented at baseband; the carrier frequency only enters
//! through the pulse width `τ = cycles / carrier` and the sample period.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Rectangular pulse parameters. Defaults follow the reference setup:
/// 120 MHz carrier, 82 cycles per pulse, 8 samples per cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub carrier_freq: f64,
    pub cycles_per_pulse: u32,
    pub samples_per_cycle: u32,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    Rectangular,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            carrier_freq: 1.2e8,
            cycles_per_pulse: 82,
            samples_per_cycle: 8,
            envelope: Envelope::Rectangular,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq > 0.0) || !self.carrier_freq.is_finite() {
            return Err(invalid("pulse spec", format!("carrier {}", self.carrier_freq)));
        }
        if self.cycles_per_pulse < 1 {
            return Err(invalid("pulse spec", "cycles_per_pulse < 1"));
        }
        if self.samples_per_cycle < 2 {
            return Err(invalid("pulse spec", "samples_per_cycle < 2"));
        }
        Ok(())
    }

    /// Pulse width τ in seconds.
    pub fn tau(&self) -> f64 {
        self.cycles_per_pulse as f64 / self.carrier_freq
    }

    /// Sample period in seconds.
    pub fn sample_period(&self) -> f64 {
        1.0 / (self.carrier_freq * self.samples_per_cycle as f64)
    }

    /// Number of samples inside one pulse (exactly τ / sample_period).
    pub fn samples_per_pulse(&self) -> usize {
        self.cycles_per_pulse as usize * self.samples_per_cycle as usize
    }
}

/// A sampled complex-baseband waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTrace {
    samples: Vec<Complex64>,
    sample_period: f64,
    start_time: f64,
}

impl ComplexTrace {
    pub fn zeros(len: usize, sample_period: f64, start_time: f64) -> Self {
        Self { samples: vec![Complex64::new(0.0, 0.0); len], sample_period, start_time }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    /// True when two traces share length, sample period and origin.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.sample_period == other.sample_period
            && self.start_time == other.start_time
    }
}

/// Additive Gaussian noise levels. Variances are per quadrature and per
/// sample, independent of the signal amplitude (fixed power spectral
/// density).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Injected on each generator output before the coupler.
    pub source_variance: f64,
    /// Injected on each coupler output.
    pub coupler_variance: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { source_variance: 0.0, coupler_variance: 0.0, seed: 0 }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.source_variance < 0.0 || !self.source_variance.is_finite() {
            return Err(invalid("noise model", "source_variance"));
        }
        if self.coupler_variance < 0.0 || !self.coupler_variance.is_finite() {
            return Err(invalid("noise model", "coupler_variance"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.source_variance == 0.0 && self.coupler_variance == 0.0
    }
}

/// Counter-based random stream. Sweep points derive independent streams
/// from `(seed, point_index)`, so any partition of the points across
/// workers draws identical noise.
pub type RandomStream = ChaCha8Rng;

pub fn stream_for_point(seed: u64, point_index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point_index);
    rng
}

/// Synthesize one pulse into a record that starts at `t = 0`.
///
/// The trace is `amplitude · e^{i·phase}` on `[delay, delay + τ]` and zero
/// elsewhere; the delay is quantized to the nearest sample.
pub fn synthesize(
    spec: &PulseSpec,
    amplitude: f64,
    phase: f64,
    delay: f64,
    record_length: f64,
) -> Result<ComplexTrace> {
    synthesize_at(spec, amplitude, phase, delay, 0.0, record_length)
}

/// Synthesize one pulse into a record `[record_start, record_start +
/// record_length]`. The sweep runner uses a record centered on the
/// overlap region, so `record_start` is negative there.
pub fn synthesize_at(
    spec: &PulseSpec,
    amplitude: f64,
    phase: f64,
    delay: f64,
    record_start: f64,
    record_length: f64,
) -> Result<ComplexTrace> {
    spec.validate()?;
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(invalid("amplitude", format!("{amplitude}")));
    }
    let dt = spec.sample_period();
    let n_pulse = spec.samples_per_pulse();
    let n_record = (record_length / dt).round() as i64;
    if n_record < n_pulse as i64 {
        return Err(Error::DelayOutOfRange { delay_s: delay });
    }
    let first = ((delay - record_start) / dt).round() as i64;
    if first < 0 || first + n_pulse as i64 > n_record {
        return Err(Error::DelayOutOfRange { delay_s: delay });
    }
    let mut trace = ComplexTrace::zeros(n_record as usize, dt, record_start);
    let value = Complex64::new(amplitude * phase.cos(), amplitude * phase.sin());
    for s in &mut trace.samples_mut()[first as usize..first as usize + n_pulse] {
        *s = value;
    }
    Ok(trace)
}

/// Add zero-mean Gaussian noise of the given per-quadrature variance to
/// every sample. Draw order is fixed (re then im, ascending sample), so a
/// given stream state maps to bit-identical output.
pub fn add_noise(trace: &ComplexTrace, variance: f64, stream: &mut RandomStream) -> ComplexTrace {
    let mut out = trace.clone();
    add_noise_in_place(&mut out, variance, stream);
    out
}

pub(crate) fn add_noise_in_place(
    trace: &mut ComplexTrace,
    variance: f64,
    stream: &mut RandomStream,
) {
    if variance == 0.0 {
        return;
    }
    let sigma = variance.sqrt();
    for s in trace.samples_mut() {
        let re: f64 = StandardNormal.sample(stream);
        let im: f64 = StandardNormal.sample(stream);
        s.re += sigma * re;
        s.im += sigma * im;
    }
}

/// In-pulse signal power over total per-sample noise power, in dB:
/// `10·log10(a² / (2σ²))`.
pub fn snr_db(amplitude: f64, noise: &NoiseModel) -> Result<f64> {
    if noise.source_variance == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    if !(amplitude > 0.0) {
        return Err(invalid("amplitude", format!("{amplitude} must be positive")));
    }
    Ok(10.0 * (amplitude * amplitude / (2.0 * noise.source_variance)).log10())
}

/// Source variance that puts `reference_amplitude` at `target_snr_db`.
pub fn calibrate_noise(reference_amplitude: f64, target_snr_db: f64) -> f64 {
    assert!(reference_amplitude > 0.0, "reference amplitude must be positive");
    reference_amplitude * reference_amplitude / (2.0 * 10f64.powf(target_snr_db / 10.0))
}
