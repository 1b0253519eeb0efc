//! Label-consistent spatial augmentations for FOA SELD recordings.

mod dataset;
mod tf_mask;

pub use dataset::{apply_augmentation, AugmentKind, AugmentParams, AugmentSummary};
pub use tf_mask::{apply_masks, tf_mask, MaskSet};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::wrap_azimuth_deg;
use crate::io::AnnotationFrame;

/// One of the 16 first-order channel-swap patterns: eight azimuth maps
/// (`az, az+90, az+180, az-90` with either sign of `az`) crossed with the two
/// elevation maps (`el, -el`).
///
/// Each pattern induces a signed permutation of the dipole channels
/// `(Y, Z, X)` with `W` fixed; pattern 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapPattern {
    k: u8,
}

impl SwapPattern {
    pub fn new(k: u8) -> Result<Self> {
        if k > 15 {
            return Err(Error::Range {
                what: "swap pattern index",
                value: k as f64,
                min: 0.0,
                max: 15.0,
            });
        }
        Ok(SwapPattern { k })
    }

    pub fn index(&self) -> u8 {
        self.k
    }

    pub fn identity() -> Self {
        SwapPattern { k: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0
    }

    /// All 16 patterns, identity first.
    pub fn all() -> impl Iterator<Item = SwapPattern> {
        (0..16).map(|k| SwapPattern { k })
    }

    /// Azimuth sign: +1 keeps `az`, -1 mirrors it.
    fn az_sign(&self) -> i32 {
        if self.k & 0b100 == 0 {
            1
        } else {
            -1
        }
    }

    /// Azimuth offset in degrees, a multiple of 90.
    fn az_offset(&self) -> i32 {
        match self.k & 0b11 {
            0 => 0,
            1 => 90,
            2 => 180,
            _ => -90,
        }
    }

    /// Elevation sign.
    fn el_sign(&self) -> i32 {
        if self.k & 0b1000 == 0 {
            1
        } else {
            -1
        }
    }

    /// The azimuth map applied to labels, wrapped to `[-180, 180)`.
    pub fn map_azimuth(&self, az_deg: f64) -> f64 {
        wrap_azimuth_deg(self.az_sign() as f64 * az_deg + self.az_offset() as f64)
    }

    /// The elevation map applied to labels.
    pub fn map_elevation(&self, el_deg: f64) -> f64 {
        self.el_sign() as f64 * el_deg
    }

    /// Signed-permutation matrix over `(W, Y, Z, X)`: row i holds the
    /// coefficients combining the old channels into new channel i.
    ///
    /// For the map `az -> s*az + r`, `el -> e*el`, first-order plane-wave
    /// algebra gives `Y' = s cos(r) Y + sin(r) X`, `Z' = e Z`,
    /// `X' = -s sin(r) Y + cos(r) X`.
    pub fn channel_matrix(&self) -> [[i32; 4]; 4] {
        let s = self.az_sign();
        let e = self.el_sign();
        let (cos_r, sin_r) = match self.az_offset() {
            0 => (1, 0),
            90 => (0, 1),
            180 => (-1, 0),
            _ => (0, -1),
        };
        [
            [1, 0, 0, 0],
            [0, s * cos_r, 0, sin_r],
            [0, 0, e, 0],
            [0, -s * sin_r, 0, cos_r],
        ]
    }

    /// The pattern equivalent to applying `self` after `first`.
    pub fn compose(&self, first: &SwapPattern) -> SwapPattern {
        let s = self.az_sign() * first.az_sign();
        let r = self.az_sign() * first.az_offset() + self.az_offset();
        let e = self.el_sign() * first.el_sign();
        Self::from_maps(s, r, e)
    }

    /// The pattern undoing `self`.
    pub fn inverse(&self) -> SwapPattern {
        let s = self.az_sign();
        Self::from_maps(s, -s * self.az_offset(), self.el_sign())
    }

    fn from_maps(s: i32, r: i32, e: i32) -> SwapPattern {
        let r = r.rem_euclid(360);
        let az_part = match r {
            0 => 0u8,
            90 => 1,
            180 => 2,
            270 => 3,
            _ => unreachable!("offsets stay on the 90-degree lattice"),
        };
        let k = az_part | if s < 0 { 0b100 } else { 0 } | if e < 0 { 0b1000 } else { 0 };
        SwapPattern { k }
    }
}

fn check_foa<T: Float>(foa: &AudioClip<T>) -> Result<()> {
    if foa.channels() != 4 {
        return Err(Error::Format(format!(
            "channel augmentation needs 4-channel FOA input, got {} channels",
            foa.channels()
        )));
    }
    Ok(())
}

/// Transform labels by the pattern's angle maps.
fn map_labels(labels: &[AnnotationFrame], pattern: &SwapPattern) -> Vec<AnnotationFrame> {
    labels
        .iter()
        .map(|l| {
            let az = pattern.map_azimuth(l.azimuth as f64).round();
            let az = if az >= 180.0 { az - 360.0 } else { az };
            AnnotationFrame {
                azimuth: az as i32,
                elevation: pattern.map_elevation(l.elevation as f64).round() as i32,
                ..*l
            }
        })
        .collect()
}

/// Apply a channel-swap pattern to FOA audio and its labels.
pub fn channel_swap<T: Float>(
    foa: &AudioClip<T>,
    labels: &[AnnotationFrame],
    pattern: &SwapPattern,
) -> Result<(AudioClip<T>, Vec<AnnotationFrame>)> {
    check_foa(foa)?;
    let m = pattern.channel_matrix();
    let len = foa.len();
    let mut out = vec![vec![T::zero(); len]; 4];
    for (row, out_ch) in m.iter().zip(out.iter_mut()) {
        for (coef, src) in row.iter().zip(foa.samples.iter()) {
            match coef {
                0 => {}
                1 => {
                    for (o, &s) in out_ch.iter_mut().zip(src) {
                        *o += s;
                    }
                }
                -1 => {
                    for (o, &s) in out_ch.iter_mut().zip(src) {
                        *o -= s;
                    }
                }
                _ => unreachable!("matrix entries are signed units"),
            }
        }
    }
    Ok((AudioClip::new(foa.sample_rate, out)?, map_labels(labels, pattern)))
}

/// Rotate the sound field around the vertical axis by `yaw` degrees: the
/// `(X, Y)` channels rotate, `W` and `Z` are untouched, and label azimuths
/// shift by `yaw`.
pub fn rotate_soundscape<T: Float>(
    foa: &AudioClip<T>,
    labels: &[AnnotationFrame],
    yaw_deg: f64,
) -> Result<(AudioClip<T>, Vec<AnnotationFrame>)> {
    check_foa(foa)?;
    let (sin, cos) = yaw_deg.to_radians().sin_cos();
    let (sin_t, cos_t) = (T::cast(sin), T::cast(cos));
    let len = foa.len();
    let mut out = vec![
        foa.samples[0].clone(),
        vec![T::zero(); len],
        foa.samples[2].clone(),
        vec![T::zero(); len],
    ];
    for i in 0..len {
        let y = foa.samples[1][i];
        let x = foa.samples[3][i];
        out[1][i] = cos_t * y + sin_t * x;
        out[3][i] = cos_t * x - sin_t * y;
    }
    let labels = labels
        .iter()
        .map(|l| {
            let az = wrap_azimuth_deg(l.azimuth as f64 + yaw_deg).round();
            let az = if az >= 180.0 { az - 360.0 } else { az };
            AnnotationFrame {
                azimuth: az as i32,
                ..*l
            }
        })
        .collect();
    Ok((AudioClip::new(foa.sample_rate, out)?, labels))
}

/// Sum two equal-format recordings scaled by `1/sqrt(2)`, unioning their
/// labels with `b`'s tracks offset past `a`'s. The shorter clip is
/// zero-padded. Fails when any frame would exceed `track_limit` active
/// tracks.
pub fn remix<T: Float>(
    a: (&AudioClip<T>, &[AnnotationFrame]),
    b: (&AudioClip<T>, &[AnnotationFrame]),
    track_limit: usize,
) -> Result<(AudioClip<T>, Vec<AnnotationFrame>)> {
    let (ca, la) = a;
    let (cb, lb) = b;
    if ca.sample_rate != cb.sample_rate {
        return Err(Error::Format(format!(
            "remix sample rates differ: {} vs {}",
            ca.sample_rate, cb.sample_rate
        )));
    }
    if ca.channels() != cb.channels() {
        return Err(Error::Format(format!(
            "remix channel counts differ: {} vs {}",
            ca.channels(),
            cb.channels()
        )));
    }
    let len = ca.len().max(cb.len());
    let gain = T::cast(std::f64::consts::FRAC_1_SQRT_2);
    let mut out = vec![vec![T::zero(); len]; ca.channels()];
    for (ch, out_ch) in out.iter_mut().enumerate() {
        for (i, o) in out_ch.iter_mut().enumerate() {
            let va = ca.samples[ch].get(i).copied().unwrap_or_else(T::zero);
            let vb = cb.samples[ch].get(i).copied().unwrap_or_else(T::zero);
            *o = (va + vb) * gain;
        }
    }

    let offset = la.iter().map(|l| l.track_index + 1).max().unwrap_or(0);
    let mut labels: Vec<AnnotationFrame> = la.to_vec();
    labels.extend(lb.iter().map(|l| AnnotationFrame {
        track_index: l.track_index + offset,
        ..*l
    }));
    labels.sort();

    let mut per_frame: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    for l in &labels {
        *per_frame.entry(l.frame).or_default() += 1;
    }
    if let Some((frame, count)) = per_frame.iter().find(|(_, &c)| c > track_limit) {
        return Err(Error::Format(format!(
            "remix would put {count} active tracks in frame {frame}, limit is {track_limit}"
        )));
    }
    Ok((AudioClip::new(ca.sample_rate, out)?, labels))
}
