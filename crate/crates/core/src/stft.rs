//! Short-time Fourier transform with exact overlap-add reconstruction.
//!
//! Periodic Hann analysis window at 50% overlap; frames are reconstructed by
//! plain overlap-add, which is exact because the shifted windows sum to one.

use realfft::num_complex::Complex;
use realfft::RealFftPlanner;

use crate::float::Float;

/// A frames-by-bins complex spectrogram of one channel.
pub type Spectrogram<T> = Vec<Vec<Complex<T>>>;

/// STFT configuration bound to one window/hop pair.
pub struct Stft<T: Float> {
    pub window_len: usize,
    pub hop: usize,
    window: Vec<T>,
}

impl<T: Float> Stft<T> {
    /// `hop` must divide `window_len` into two for exact reconstruction.
    pub fn new(window_len: usize, hop: usize) -> Self {
        assert_eq!(window_len % hop, 0, "hop must divide the window length");
        let window = (0..window_len)
            .map(|n| {
                let x = 2.0 * std::f64::consts::PI * n as f64 / window_len as f64;
                T::cast(0.5 * (1.0 - x.cos()))
            })
            .collect();
        Stft {
            window_len,
            hop,
            window,
        }
    }

    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    /// Number of frames produced for an input of `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        (len + self.window_len) / self.hop + 1
    }

    /// Analyze a padded copy of `input`. The padding keeps every retained
    /// sample under full window coverage so [`Self::synthesize`] is exact.
    pub fn analyze(&self, input: &[T]) -> Spectrogram<T> {
        let n_frames = self.frames_for(input.len());
        let padded_len = (n_frames - 1) * self.hop + self.window_len;
        let mut padded = vec![T::zero(); padded_len];
        padded[self.hop..self.hop + input.len()].copy_from_slice(input);

        let mut planner = RealFftPlanner::<T>::new();
        let r2c = planner.plan_fft_forward(self.window_len);
        let mut frame = vec![T::zero(); self.window_len];
        let mut out = Vec::with_capacity(n_frames);
        for m in 0..n_frames {
            let start = m * self.hop;
            for (f, (&s, &w)) in frame
                .iter_mut()
                .zip(padded[start..start + self.window_len].iter().zip(&self.window))
            {
                *f = s * w;
            }
            let mut spec = vec![Complex::new(T::zero(), T::zero()); self.bins()];
            r2c.process(&mut frame, &mut spec).expect("fft sizes match");
            out.push(spec);
        }
        out
    }

    /// Inverse of [`Self::analyze`], trimming back to `out_len` samples.
    pub fn synthesize(&self, spec: &Spectrogram<T>, out_len: usize) -> Vec<T> {
        let n_frames = spec.len();
        if n_frames == 0 {
            return vec![T::zero(); out_len];
        }
        let padded_len = (n_frames - 1) * self.hop + self.window_len;
        let mut acc = vec![T::zero(); padded_len];
        let mut planner = RealFftPlanner::<T>::new();
        let c2r = planner.plan_fft_inverse(self.window_len);
        let norm = T::one() / T::cast(self.window_len as f64);
        let mut frame = vec![T::zero(); self.window_len];
        let mut spec_buf = vec![Complex::new(T::zero(), T::zero()); self.bins()];
        for (m, s) in spec.iter().enumerate() {
            spec_buf.copy_from_slice(s);
            c2r.process(&mut spec_buf, &mut frame).expect("fft sizes match");
            let start = m * self.hop;
            for (a, &f) in acc[start..start + self.window_len].iter_mut().zip(&frame) {
                *a += f * norm;
            }
        }
        acc[self.hop..(self.hop + out_len).min(acc.len())]
            .iter()
            .copied()
            .chain(std::iter::repeat(T::zero()))
            .take(out_len)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let stft = Stft::<f64>::new(1024, 512);
        let mut state = 0xDEADBEEFu64;
        let input: Vec<f64> = (0..5000)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) * 2.0 - 1.0
            })
            .collect();
        let spec = stft.analyze(&input);
        let back = stft.synthesize(&spec, input.len());
        let err: f64 = input
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-10, "reconstruction error {err}");
    }

    #[test]
    fn short_inputs_survive() {
        let stft = Stft::<f64>::new(1024, 512);
        let input = vec![0.5f64; 100];
        let spec = stft.analyze(&input);
        let back = stft.synthesize(&spec, 100);
        for (a, b) in input.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
