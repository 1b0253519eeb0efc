//! Phase-vocoder time stretching and pitch shifting.

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::float::Float;

/// Analysis window length.
const WINDOW: usize = 2048;
/// Analysis hop.
const HOP: usize = 512;

/// Change duration to `factor` times the original, preserving pitch.
/// `factor` must lie in `[0.5, 2.0]`.
pub fn time_stretch<T: Float>(signal: &AudioClip<T>, factor: f64) -> Result<AudioClip<T>> {
    check_mono(signal)?;
    if !(0.5..=2.0).contains(&factor) {
        return Err(Error::Range {
            what: "time-stretch factor",
            value: factor,
            min: 0.5,
            max: 2.0,
        });
    }
    let out = stretch_mono(&signal.samples[0], factor);
    Ok(AudioClip::from_mono(signal.sample_rate, out))
}

/// Shift spectral content by `semitones` (up to an octave either way) while
/// preserving duration to within one analysis hop.
pub fn pitch_shift<T: Float>(signal: &AudioClip<T>, semitones: f64) -> Result<AudioClip<T>> {
    check_mono(signal)?;
    if !(-12.0..=12.0).contains(&semitones) {
        return Err(Error::Range {
            what: "pitch shift",
            value: semitones,
            min: -12.0,
            max: 12.0,
        });
    }
    let ratio = 2f64.powf(semitones / 12.0);
    // Stretch by the ratio, then read back at the same ratio: duration
    // returns to the original while the spectrum scales by `ratio`.
    let stretched = stretch_mono(&signal.samples[0], ratio);
    let mut out = resample_read(&stretched, ratio, signal.len());
    out.truncate(signal.len());
    while out.len() < signal.len() {
        out.push(T::zero());
    }
    Ok(AudioClip::from_mono(signal.sample_rate, out))
}

fn check_mono<T: Float>(signal: &AudioClip<T>) -> Result<()> {
    if signal.channels() != 1 {
        return Err(Error::Format(format!(
            "vocoder input must be mono, got {} channels",
            signal.channels()
        )));
    }
    Ok(())
}

/// Classic phase vocoder: analysis at hop [`HOP`], synthesis at
/// `round(HOP * factor)`, with per-bin phase propagation and weighted
/// overlap-add resynthesis.
fn stretch_mono<T: Float>(input: &[T], factor: f64) -> Vec<T> {
    if input.is_empty() {
        return Vec::new();
    }
    let syn_hop = ((HOP as f64) * factor).round().max(1.0) as usize;
    let true_ratio = syn_hop as f64 / HOP as f64;
    let out_len = ((input.len() as f64) * factor).round() as usize;

    // Zero-pad one window on each side so every retained sample has full
    // overlap coverage.
    let lead = WINDOW;
    let padded_len = input.len() + 2 * WINDOW;
    let mut padded = vec![T::zero(); padded_len];
    padded[lead..lead + input.len()].copy_from_slice(input);

    let window: Vec<T> = hann(WINDOW);
    let mut planner = RealFftPlanner::<T>::new();
    let r2c = planner.plan_fft_forward(WINDOW);
    let c2r = planner.plan_fft_inverse(WINDOW);
    let bins = WINDOW / 2 + 1;
    let fft_norm = T::one() / T::cast(WINDOW as f64);

    let n_frames = (padded_len - WINDOW) / HOP + 1;
    let syn_len = (n_frames - 1) * syn_hop + WINDOW;
    let mut acc = vec![T::zero(); syn_len];
    let mut weight = vec![T::zero(); syn_len];

    let mut prev_phase = vec![0.0f64; bins];
    let mut syn_phase = vec![0.0f64; bins];
    let mut frame = vec![T::zero(); WINDOW];
    let mut spec = vec![Complex::new(T::zero(), T::zero()); bins];
    let two_pi = 2.0 * std::f64::consts::PI;

    for m in 0..n_frames {
        let start = m * HOP;
        for (f, (&s, &w)) in frame
            .iter_mut()
            .zip(padded[start..start + WINDOW].iter().zip(window.iter()))
        {
            *f = s * w;
        }
        r2c.process(&mut frame, &mut spec).expect("fft sizes match");

        // DC and Nyquist stay purely real; only the interior bins carry a
        // propagated phase.
        spec[0] = Complex::new(spec[0].re, T::zero());
        spec[bins - 1] = Complex::new(spec[bins - 1].re, T::zero());
        for k in 1..bins - 1 {
            let mag = spec[k].re.as_f64().hypot(spec[k].im.as_f64());
            let phase = spec[k].im.as_f64().atan2(spec[k].re.as_f64());
            let bin_freq = two_pi * k as f64 / WINDOW as f64; // rad/sample
            if m == 0 {
                syn_phase[k] = phase;
            } else {
                let expected = bin_freq * HOP as f64;
                let mut dev = phase - prev_phase[k] - expected;
                dev -= two_pi * (dev / two_pi).round();
                let true_freq = bin_freq + dev / HOP as f64;
                syn_phase[k] += true_freq * syn_hop as f64;
            }
            prev_phase[k] = phase;
            let (s, c) = syn_phase[k].sin_cos();
            spec[k] = Complex::new(T::cast(mag * c), T::cast(mag * s));
        }

        c2r.process(&mut spec, &mut frame).expect("fft sizes match");
        let out_start = m * syn_hop;
        for (i, (&f, &w)) in frame.iter().zip(window.iter()).enumerate() {
            acc[out_start + i] += f * w * fft_norm;
            weight[out_start + i] += w * w;
        }
    }

    // Input position p maps to output position p * true_ratio.
    let out_offset = ((lead as f64) * true_ratio).round() as usize;
    let eps = T::cast(1e-8);
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let idx = out_offset + n;
        if idx < acc.len() {
            out.push(acc[idx] / weight[idx].max(eps));
        } else {
            out.push(T::zero());
        }
    }
    out
}

/// Periodic Hann window.
pub(crate) fn hann<T: Float>(len: usize) -> Vec<T> {
    (0..len)
        .map(|n| {
            let x = 2.0 * std::f64::consts::PI * n as f64 / len as f64;
            T::cast(0.5 * (1.0 - x.cos()))
        })
        .collect()
}

/// Resample by reading `input` at a step of `ratio` input samples per output
/// sample, using a 65-tap Hann-windowed sinc with anti-alias cutoff.
fn resample_read<T: Float>(input: &[T], ratio: f64, out_len: usize) -> Vec<T> {
    const HALF: i64 = 32;
    if input.is_empty() {
        return vec![T::zero(); out_len];
    }
    let cutoff = (1.0 / ratio).min(1.0);
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let center = n as f64 * ratio;
        let base = center.floor() as i64;
        let mut acc = T::zero();
        for k in -HALF..=HALF {
            let idx = base + k;
            if idx < 0 || idx as usize >= input.len() {
                continue;
            }
            let t = center - idx as f64;
            if t.abs() > HALF as f64 {
                continue;
            }
            let w = 0.5 * (1.0 + (std::f64::consts::PI * t / (HALF as f64 + 0.5)).cos());
            let h = cutoff * crate::float::sinc(cutoff * t) * w;
            acc += input[idx as usize] * T::cast(h);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, sr: u32, secs: f64) -> AudioClip<f64> {
        let n = (sr as f64 * secs) as usize;
        AudioClip::from_mono(
            sr,
            (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin() * 0.5)
                .collect(),
        )
    }

    fn rms(v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }

    /// Frequency of the strongest FFT bin.
    fn dominant_freq(signal: &[f64], sr: f64) -> (f64, f64) {
        let n = signal.len().next_power_of_two();
        let mut planner = RealFftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut buf = vec![0.0; n];
        buf[..signal.len()].copy_from_slice(signal);
        let mut spec = vec![Complex::new(0.0, 0.0); n / 2 + 1];
        fft.process(&mut buf, &mut spec).unwrap();
        let (best, _) = spec
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap();
        (best as f64 * sr / n as f64, sr / n as f64)
    }

    #[test]
    fn zero_semitones_is_near_identity() {
        let clip = sine(440.0, 24000, 0.5);
        let out = pitch_shift(&clip, 0.0).unwrap();
        assert_eq!(out.len(), clip.len());
        // Compare away from the very edges.
        let a = &clip.samples[0][1000..11000];
        let b = &out.samples[0][1000..11000];
        let err: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let rel_db = 20.0 * (rms(&err) / rms(a)).log10();
        assert!(rel_db < -40.0, "identity error {rel_db} dB");
    }

    #[test]
    fn octave_up_doubles_frequency() {
        let clip = sine(440.0, 24000, 1.0);
        let out = pitch_shift(&clip, 12.0).unwrap();
        assert_eq!(out.len(), clip.len());
        let (freq, bin_hz) = dominant_freq(&out.samples[0][2048..22000], 24000.0);
        assert!(
            (freq - 880.0).abs() <= bin_hz,
            "dominant {freq} Hz (bin {bin_hz} Hz)"
        );
    }

    #[test]
    fn stretch_changes_duration() {
        let clip = sine(440.0, 24000, 1.0);
        let out = time_stretch(&clip, 2.0).unwrap();
        let hop_secs = HOP as f64 / 24000.0;
        assert!((out.duration() - 2.0).abs() <= hop_secs, "{}", out.duration());
        // Pitch is preserved.
        let (freq, bin_hz) = dominant_freq(&out.samples[0][2048..40000], 24000.0);
        assert!((freq - 440.0).abs() <= bin_hz, "dominant {freq}");

        let short = time_stretch(&clip, 0.5).unwrap();
        assert!((short.duration() - 0.5).abs() <= hop_secs);
    }

    #[test]
    fn parameter_ranges_enforced() {
        let clip = sine(440.0, 24000, 0.1);
        assert!(matches!(pitch_shift(&clip, 12.5), Err(Error::Range { .. })));
        assert!(matches!(pitch_shift(&clip, -13.0), Err(Error::Range { .. })));
        assert!(matches!(time_stretch(&clip, 0.4), Err(Error::Range { .. })));
        assert!(matches!(time_stretch(&clip, 2.1), Err(Error::Range { .. })));
    }

    #[test]
    fn empty_input_passes_through() {
        let clip = AudioClip::<f64>::from_mono(24000, vec![]);
        assert_eq!(pitch_shift(&clip, 3.0).unwrap().len(), 0);
        assert_eq!(time_stretch(&clip, 1.5).unwrap().len(), 0);
    }
}
