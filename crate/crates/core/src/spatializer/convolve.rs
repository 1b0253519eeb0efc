//! FFT overlap-add convolution of mono signals with multichannel RIRs.

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::rir::Rir;

/// Full linear convolution of a mono signal with every channel of `rir`.
///
/// Output length is `signal_len + rir_len - 1` per channel, computed by
/// overlap-add with an FFT block of at least four RIR lengths rounded up to
/// a power of two.
pub fn convolve<T: Float>(signal: &AudioClip<T>, rir: &Rir<T>) -> Result<AudioClip<T>> {
    if signal.channels() != 1 {
        return Err(Error::Format(format!(
            "convolution input must be mono, got {} channels",
            signal.channels()
        )));
    }
    if signal.sample_rate != rir.sample_rate {
        return Err(Error::Format(format!(
            "sample-rate mismatch: signal {} Hz vs RIR {} Hz",
            signal.sample_rate, rir.sample_rate
        )));
    }
    let out = convolve_channels(&signal.samples[0], &rir.taps)?;
    AudioClip::new(signal.sample_rate, out)
}

/// Overlap-add convolution of one mono buffer against several kernels.
pub(crate) fn convolve_channels<T: Float>(
    signal: &[T],
    kernels: &[Vec<T>],
) -> Result<Vec<Vec<T>>> {
    let rir_len = kernels.first().map_or(0, |k| k.len());
    if rir_len == 0 {
        return Err(Error::Format("empty convolution kernel".into()));
    }
    if signal.is_empty() {
        return Ok(vec![Vec::new(); kernels.len()]);
    }

    let fft_size = (4 * rir_len).next_power_of_two();
    let block = fft_size - rir_len + 1;
    let out_len = signal.len() + rir_len - 1;

    let mut planner = RealFftPlanner::<T>::new();
    let r2c = planner.plan_fft_forward(fft_size);
    let c2r = planner.plan_fft_inverse(fft_size);
    let spectrum_len = fft_size / 2 + 1;
    let norm = T::one() / T::cast(fft_size as f64);

    // Kernel spectra, one per output channel.
    let mut scratch = vec![T::zero(); fft_size];
    let kernel_spectra: Vec<Vec<Complex<T>>> = kernels
        .iter()
        .map(|k| {
            scratch.fill(T::zero());
            scratch[..k.len()].copy_from_slice(k);
            let mut spec = vec![Complex::new(T::zero(), T::zero()); spectrum_len];
            r2c.process(&mut scratch, &mut spec).expect("fft sizes match");
            spec
        })
        .collect();

    let mut out = vec![vec![T::zero(); out_len]; kernels.len()];
    let mut spec = vec![Complex::new(T::zero(), T::zero()); spectrum_len];
    let mut prod = vec![Complex::new(T::zero(), T::zero()); spectrum_len];
    let mut time = vec![T::zero(); fft_size];
    let mut offset = 0usize;
    while offset < signal.len() {
        let n = block.min(signal.len() - offset);
        scratch.fill(T::zero());
        scratch[..n].copy_from_slice(&signal[offset..offset + n]);
        r2c.process(&mut scratch, &mut spec).expect("fft sizes match");
        for (ch, kspec) in kernel_spectra.iter().enumerate() {
            for ((p, &s), &k) in prod.iter_mut().zip(spec.iter()).zip(kspec.iter()) {
                *p = s * k;
            }
            c2r.process(&mut prod, &mut time).expect("fft sizes match");
            let chunk = (n + rir_len - 1).min(out_len - offset);
            let dst = &mut out[ch][offset..offset + chunk];
            for (d, &t) in dst.iter_mut().zip(time.iter()) {
                *d += t * norm;
            }
        }
        offset += n;
    }
    Ok(out)
}

/// Direct O(N*M) time-domain convolution; the validation oracle for
/// [`convolve`].
pub fn convolve_direct<T: Float>(signal: &[T], kernel: &[T]) -> Vec<T> {
    if signal.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); signal.len() + kernel.len() - 1];
    for (i, &s) in signal.iter().enumerate() {
        for (j, &k) in kernel.iter().enumerate() {
            out[i + j] += s * k;
        }
    }
    out
}
