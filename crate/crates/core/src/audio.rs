//! Multichannel audio buffers and level arithmetic.

use crate::error::{Error, Result};
use crate::float::Float;

/// Sample-rate-tagged multichannel audio, nominally in `[-1, 1]`.
///
/// Samples are stored per channel (`channels x length`), not interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    pub sample_rate: u32,
    /// `samples[channel][frame]`; all channels share one length.
    pub samples: Vec<Vec<T>>,
}

impl<T: Float> AudioClip<T> {
    pub fn new(sample_rate: u32, samples: Vec<Vec<T>>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let len = first.len();
            if samples.iter().any(|c| c.len() != len) {
                return Err(Error::Format("channels have differing lengths".into()));
            }
        }
        debug_assert!(
            samples.iter().all(|c| c.iter().all(|s| s.is_finite())),
            "audio clips must hold finite samples"
        );
        Ok(AudioClip {
            sample_rate,
            samples,
        })
    }

    pub fn silence(sample_rate: u32, channels: usize, len: usize) -> Self {
        AudioClip {
            sample_rate,
            samples: vec![vec![T::zero(); len]; channels],
        }
    }

    pub fn from_mono(sample_rate: u32, samples: Vec<T>) -> Self {
        AudioClip {
            sample_rate,
            samples: vec![samples],
        }
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    /// Average all channels down to one.
    pub fn to_mono(&self) -> AudioClip<T> {
        if self.channels() == 1 {
            return self.clone();
        }
        let scale = T::one() / T::cast(self.channels() as f64);
        let mut mono = vec![T::zero(); self.len()];
        for ch in &self.samples {
            for (m, &s) in mono.iter_mut().zip(ch) {
                *m += s * scale;
            }
        }
        AudioClip::from_mono(self.sample_rate, mono)
    }

    /// Copy of the frame range `[start, end)`, clamped to the clip length.
    pub fn slice(&self, start: usize, end: usize) -> AudioClip<T> {
        let end = end.min(self.len());
        let start = start.min(end);
        AudioClip {
            sample_rate: self.sample_rate,
            samples: self
                .samples
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect(),
        }
    }

    pub fn scaled(&self, gain: T) -> AudioClip<T> {
        AudioClip {
            sample_rate: self.sample_rate,
            samples: self
                .samples
                .iter()
                .map(|c| c.iter().map(|&s| s * gain).collect())
                .collect(),
        }
    }

    pub fn peak(&self) -> T {
        self.samples
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |acc, &s| acc.max(s.abs()))
    }

    /// RMS over all samples of all channels. Zero for empty clips.
    pub fn rms(&self) -> f64 {
        let n: usize = self.samples.iter().map(|c| c.len()).sum();
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .samples
            .iter()
            .flat_map(|c| c.iter())
            .map(|&s| {
                let v = s.as_f64();
                v * v
            })
            .sum();
        (sum / n as f64).sqrt()
    }

    /// RMS in dBFS over the active extent: the span from the first to the
    /// last frame where any channel exceeds -60 dBFS. Trimming the extent
    /// rather than gating per sample keeps the measurement stable under
    /// scaling. Falls back to the plain RMS when nothing crosses the gate.
    pub fn active_rms_db(&self) -> f64 {
        let gate = 10f64.powf(-60.0 / 20.0);
        let active = |n: usize| {
            self.samples
                .iter()
                .any(|ch| ch[n].as_f64().abs() > gate)
        };
        let first = (0..self.len()).find(|&n| active(n));
        let rms = match first {
            Some(first) => {
                let last = (first..self.len()).rev().find(|&n| active(n)).unwrap();
                let span = (last - first + 1) as f64;
                let sum: f64 = self
                    .samples
                    .iter()
                    .map(|ch| {
                        ch[first..=last]
                            .iter()
                            .map(|&s| {
                                let v = s.as_f64();
                                v * v
                            })
                            .sum::<f64>()
                    })
                    .sum();
                (sum / (span * self.channels() as f64)).sqrt()
            }
            None => self.rms(),
        };
        linear_to_db(rms)
    }
}

pub fn linear_to_db(v: f64) -> f64 {
    if v <= 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * v.log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ragged_channels_rejected() {
        assert!(AudioClip::new(24000, vec![vec![0.0f64; 3], vec![0.0; 4]]).is_err());
    }

    #[test]
    fn mono_mixdown_averages() {
        let clip = AudioClip::new(24000, vec![vec![1.0f64, 0.0], vec![0.0, 1.0]]).unwrap();
        let mono = clip.to_mono();
        assert_eq!(mono.channels(), 1);
        assert_abs_diff_eq!(mono.samples[0][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(mono.samples[0][1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn db_round_trip() {
        assert_abs_diff_eq!(linear_to_db(db_to_linear(-50.0)), -50.0, epsilon = 1e-12);
    }

    #[test]
    fn active_rms_ignores_silence() {
        // Half the clip silent: plain RMS halves the power, active RMS does not.
        let mut s = vec![0.0f64; 1000];
        for (i, v) in s.iter_mut().enumerate().take(500) {
            *v = if i % 2 == 0 { 0.1 } else { -0.1 };
        }
        let clip = AudioClip::from_mono(24000, s);
        assert_abs_diff_eq!(clip.active_rms_db(), linear_to_db(0.1), epsilon = 1e-9);
        assert!(clip.rms() < 0.1);
    }
}
