//! Room impulse response synthesis and measured-RIR databases.

mod database;
mod ism;
mod t60;

pub use database::{load_rir_database, nearest_rir, RirDatabase};
pub use ism::{default_max_order, enumerate_images, image_positions, ImageSource};
pub use t60::estimate_t60;

use crate::ambisonics::sh_gains_for_direction;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::{MicArray, RoomSpec, Vec3};

/// Sample rate used by the DCASE-style pipeline when none is given, Hz.
pub const DEFAULT_SAMPLE_RATE: u32 = 24000;

/// Length of the Hann-windowed sinc kernel realizing fractional delays.
pub const FRACTIONAL_DELAY_TAPS: usize = 81;

/// Channel layout of a [`Rir`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RirFormat {
    /// One channel per physical capsule.
    Capsules,
    /// Four first-order ambisonics channels (ACN/SN3D).
    Foa,
}

/// A multichannel room impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct Rir<T> {
    pub sample_rate: u32,
    /// `taps[channel][sample]`.
    pub taps: Vec<Vec<T>>,
    pub source_pos: Vec3<T>,
    pub mic_center: Vec3<T>,
    pub format: RirFormat,
}

impl<T: Float> Rir<T> {
    pub fn new(
        sample_rate: u32,
        taps: Vec<Vec<T>>,
        source_pos: Vec3<T>,
        mic_center: Vec3<T>,
        format: RirFormat,
    ) -> Result<Self> {
        if taps.is_empty() || taps[0].is_empty() {
            return Err(Error::Format("RIR must have at least one tap".into()));
        }
        let len = taps[0].len();
        if taps.iter().any(|c| c.len() != len) {
            return Err(Error::Format("RIR channels have differing lengths".into()));
        }
        if format == RirFormat::Foa && taps.len() != 4 {
            return Err(Error::Format(format!(
                "FOA RIR must have 4 channels, got {}",
                taps.len()
            )));
        }
        if taps
            .iter()
            .any(|c| c.iter().any(|s| !s.is_finite()))
        {
            return Err(Error::Format("RIR contains non-finite samples".into()));
        }
        Ok(Rir {
            sample_rate,
            taps,
            source_pos,
            mic_center,
            format,
        })
    }

    pub fn channels(&self) -> usize {
        self.taps.len()
    }

    pub fn len(&self) -> usize {
        self.taps.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total energy summed over all channels.
    pub fn energy(&self) -> f64 {
        self.taps
            .iter()
            .flat_map(|c| c.iter())
            .map(|&s| {
                let v = s.as_f64();
                v * v
            })
            .sum()
    }
}

/// DC-blocker cutoff for synthesized RIRs, Hz.
///
/// Uniform positive reflection coefficients make the overlapping image
/// pulses accumulate a DC offset that dominates the late energy decay; a
/// gentle one-pole blocker removes it without disturbing the direct pulse.
const DC_BLOCK_HZ: f64 = 20.0;

fn remove_dc<T: Float>(taps: &mut [T], sample_rate: u32) {
    let rho = T::cast(1.0 - 2.0 * std::f64::consts::PI * DC_BLOCK_HZ / sample_rate as f64);
    let mut x1 = T::zero();
    let mut y1 = T::zero();
    for t in taps.iter_mut() {
        let x0 = *t;
        let y0 = x0 - x1 + rho * y1;
        x1 = x0;
        y1 = y0;
        *t = y0;
    }
}

/// Add `amplitude` times a bandlimited impulse delayed by `delay_samples`
/// (fractional) into `out`, using the 81-tap Hann-windowed sinc kernel.
/// Taps that would land before the start of the buffer are clipped.
///
/// This runs once per image-capsule pair, so the trig is hoisted out of the
/// tap loop: `sin(pi t)` only alternates sign from tap to tap, and the Hann
/// term advances by a fixed rotation.
fn add_fractional_impulse<T: Float>(out: &mut [T], delay_samples: f64, amplitude: T) {
    use std::f64::consts::PI;
    let half = (FRACTIONAL_DELAY_TAPS / 2) as i64; // 40
    let base = delay_samples.floor() as i64;
    let frac = delay_samples - base as f64;
    let win_len = FRACTIONAL_DELAY_TAPS as f64;

    // sin(pi t) at tap k equals -(-1)^k sin(pi frac) for t = (k - 40) - frac.
    let sin_pf = (PI * frac).sin();
    // Window phase 2 pi t / 81, advanced per tap by complex rotation.
    let delta = 2.0 * PI / win_len;
    let (mut wsin, mut wcos) = (delta * (-(half as f64) - frac)).sin_cos();
    let (dsin, dcos) = delta.sin_cos();
    let mut alt = 1.0f64; // (-1)^k

    for k in 0..FRACTIONAL_DELAY_TAPS as i64 {
        let idx = base - half + k;
        if idx >= 0 {
            let idx = idx as usize;
            if idx >= out.len() {
                break;
            }
            let t = (k - half) as f64 - frac;
            let sinc = if t.abs() < 1e-9 {
                1.0
            } else {
                -alt * sin_pf / (PI * t)
            };
            let w = 0.5 * (1.0 + wcos);
            out[idx] += amplitude * T::cast(sinc * w);
        }
        let next_cos = wcos * dcos - wsin * dsin;
        wsin = wsin * dcos + wcos * dsin;
        wcos = next_cos;
        alt = -alt;
    }
}

/// Synthesize a capsule-format RIR for a microphone array in a shoebox room.
///
/// Every image source contributes an `beta^r / (4 pi d)` scaled bandlimited
/// impulse at delay `d / c` per capsule, where `d` is measured to the
/// capsule's absolute position; cardioid capsules weight each image by
/// `0.5 (1 + cos theta)` against their look direction.
pub fn synth_rir<T: Float>(
    room: &RoomSpec<T>,
    source: Vec3<T>,
    array: &MicArray<T>,
    sample_rate: u32,
    max_order: usize,
) -> Result<Rir<T>> {
    array.validate_in_room(room)?;
    // Errors (outside room, coincident positions) surface against the center.
    let images = ism::enumerate_images(room, source, array.center, max_order)?;
    for i in 0..array.capsules.len() {
        if array.capsule_position(i) == source {
            return Err(Error::Geometry(format!(
                "capsule {i} coincides with the source"
            )));
        }
    }

    let fs = sample_rate as f64;
    let c = room.speed_of_sound.as_f64();
    // Worst-case delay over capsules: center delay plus the array radius.
    let radius = array
        .capsules
        .iter()
        .map(|cap| cap.offset.norm().as_f64())
        .fold(0.0, f64::max);
    let max_delay = images
        .iter()
        .map(|img| img.delay.as_f64())
        .fold(0.0, f64::max)
        + radius / c;
    let len = (max_delay * fs).ceil() as usize + FRACTIONAL_DELAY_TAPS;

    let four_pi = T::cast(4.0) * T::PI();
    let mut taps = vec![vec![T::zero(); len]; array.capsules.len()];
    for (ci, cap) in array.capsules.iter().enumerate() {
        let cap_pos = array.capsule_position(ci);
        let chan = &mut taps[ci];
        for img in &images {
            let d = img.position.distance(cap_pos);
            if d == T::zero() {
                continue;
            }
            let mut amp =
                room.reflection.powi(img.reflection_count as i32) / (four_pi * d);
            if amp == T::zero() {
                continue;
            }
            let arrival = img.position.sub(cap_pos).scale(T::one() / d);
            amp *= cap.directivity.gain(arrival);
            add_fractional_impulse(chan, d.as_f64() / c * fs, amp);
        }
        remove_dc(chan, sample_rate);
    }

    Rir::new(sample_rate, taps, source, array.center, RirFormat::Capsules)
}

/// Synthesize a first-order ambisonics RIR directly: each image contributes
/// its delayed, scaled impulse weighted by the four SN3D/ACN gains of its
/// arrival direction at `mic_center`.
pub fn synth_foa_rir<T: Float>(
    room: &RoomSpec<T>,
    source: Vec3<T>,
    mic_center: Vec3<T>,
    sample_rate: u32,
    max_order: usize,
) -> Result<Rir<T>> {
    let images = ism::enumerate_images(room, source, mic_center, max_order)?;
    let fs = sample_rate as f64;
    let max_delay = images
        .iter()
        .map(|img| img.delay.as_f64())
        .fold(0.0, f64::max);
    let len = (max_delay * fs).ceil() as usize + FRACTIONAL_DELAY_TAPS;

    let mut taps = vec![vec![T::zero(); len]; 4];
    for img in &images {
        if img.amplitude == T::zero() {
            continue;
        }
        let gains = sh_gains_for_direction(img.position.sub(mic_center))?.to_array();
        let delay = img.delay.as_f64() * fs;
        for (chan, &g) in taps.iter_mut().zip(gains.iter()) {
            if g != T::zero() {
                add_fractional_impulse(chan, delay, img.amplitude * g);
            }
        }
    }
    for chan in &mut taps {
        remove_dc(chan, sample_rate);
    }

    Rir::new(sample_rate, taps, source, mic_center, RirFormat::Foa)
}
