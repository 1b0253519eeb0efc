//! First-order ambisonics in ACN channel order with SN3D normalization.
//!
//! Channel order is `(W, Y, Z, X)`. Encoding is frequency-independent: no
//! radial or diffuse-field equalization is applied, which matches an open
//! (non-scattering) array model.

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::{cos_deg, sin_deg, wrap_azimuth_deg, Vec3};

/// Number of first-order ambisonics channels.
pub const FOA_CHANNELS: usize = 4;

/// Silence threshold for DOA estimation, dBFS RMS of the W channel.
pub const DOA_SILENCE_DB: f64 = -80.0;

/// Condition-number limit for the capsule encoding matrix.
pub const ENCODER_COND_LIMIT: f64 = 1e6;

/// First-order spherical-harmonic gains of a direction (ACN/SN3D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShGains<T> {
    pub w: T,
    pub y: T,
    pub z: T,
    pub x: T,
}

impl<T: Float> ShGains<T> {
    pub fn to_array(self) -> [T; 4] {
        [self.w, self.y, self.z, self.x]
    }
}

/// SN3D first-order gains for a plane wave arriving from `(azimuth, elevation)`
/// in degrees. Azimuth is wrapped; elevation must lie in `[-90, 90]`. Gains
/// are exact on the coordinate axes.
pub fn sh_gains<T: Float>(azimuth_deg: T, elevation_deg: T) -> ShGains<T> {
    let az = wrap_azimuth_deg(azimuth_deg);
    let el = elevation_deg;
    ShGains {
        w: T::one(),
        y: sin_deg(az) * cos_deg(el),
        z: sin_deg(el),
        x: cos_deg(az) * cos_deg(el),
    }
}

/// Gains for the unit direction pointing from `origin` toward `p`.
pub fn sh_gains_for_direction<T: Float>(direction: Vec3<T>) -> Result<ShGains<T>> {
    let n = direction.norm();
    if n == T::zero() {
        return Err(Error::DegenerateDirection);
    }
    let u = direction.scale(T::one() / n);
    Ok(ShGains {
        w: T::one(),
        y: u.y,
        z: u.z,
        x: u.x,
    })
}

/// Least-squares encode capsule signals to first-order ambisonics.
///
/// `capsule_directions` are the `(azimuth, elevation)` look directions in
/// degrees, one per input channel. The encoder is the Moore-Penrose
/// pseudoinverse of the capsule-gain matrix applied framewise; it requires at
/// least 4 capsules whose directions span first order.
pub fn encode_capsules_to_foa<T: Float>(
    clip: &AudioClip<T>,
    capsule_directions: &[(T, T)],
) -> Result<AudioClip<T>> {
    let c = capsule_directions.len();
    if clip.channels() != c {
        return Err(Error::Format(format!(
            "clip has {} channels but {} capsule directions were given",
            clip.channels(),
            c
        )));
    }
    if c < FOA_CHANNELS {
        return Err(Error::Format(format!(
            "least-squares FOA encoding needs at least 4 capsules, got {c}"
        )));
    }

    // Capsule-gain matrix A (C x 4): row i holds the SH gains of capsule i.
    let a: Vec<[f64; 4]> = capsule_directions
        .iter()
        .map(|&(az, el)| {
            let g = sh_gains(az, el);
            [g.w.as_f64(), g.y.as_f64(), g.z.as_f64(), g.x.as_f64()]
        })
        .collect();

    // Normal matrix A^T A and its eigenvalues give cond(A)^2.
    let mut ata = [[0.0f64; 4]; 4];
    for row in &a {
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let eig = jacobi_eigenvalues(ata);
    let lmax = eig.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = eig.iter().cloned().fold(f64::MAX, f64::min);
    let cond = if lmin <= 0.0 {
        f64::INFINITY
    } else {
        (lmax / lmin).sqrt()
    };
    if !(cond < ENCODER_COND_LIMIT) {
        return Err(Error::Conditioning {
            cond,
            limit: ENCODER_COND_LIMIT,
        });
    }

    // Encoder M = (A^T A)^-1 A^T, 4 x C.
    let inv = invert4(ata).ok_or(Error::Conditioning {
        cond,
        limit: ENCODER_COND_LIMIT,
    })?;
    let mut m = vec![[0.0f64; 4]; c];
    for (ci, row) in a.iter().enumerate() {
        for oi in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += inv[oi][k] * row[k];
            }
            m[ci][oi] = acc;
        }
    }

    let n = clip.len();
    let mut out = vec![vec![T::zero(); n]; FOA_CHANNELS];
    for (ci, ch) in clip.samples.iter().enumerate() {
        for oi in 0..4 {
            let g = T::cast(m[ci][oi]);
            if g == T::zero() {
                continue;
            }
            for (o, &s) in out[oi].iter_mut().zip(ch.iter()) {
                *o += g * s;
            }
        }
    }
    AudioClip::new(clip.sample_rate, out)
}

/// Direction of arrival over a frame of FOA audio via the pseudo-intensity
/// vector `(sum W*X, sum W*Y, sum W*Z)`. Returns `(azimuth, elevation)` in
/// degrees.
pub fn doa_estimate<T: Float>(
    foa: &AudioClip<T>,
    frame: std::ops::Range<usize>,
) -> Result<(T, T)> {
    if foa.channels() != FOA_CHANNELS {
        return Err(Error::Format(format!(
            "DOA estimation needs 4-channel FOA input, got {} channels",
            foa.channels()
        )));
    }
    let end = frame.end.min(foa.len());
    let start = frame.start.min(end);
    if start >= end {
        return Err(Error::NoEstimate);
    }
    let w = &foa.samples[0][start..end];
    let y = &foa.samples[1][start..end];
    let z = &foa.samples[2][start..end];
    let x = &foa.samples[3][start..end];

    let n = (end - start) as f64;
    let w_energy: f64 = w.iter().map(|&v| v.as_f64() * v.as_f64()).sum();
    let w_rms_db = crate::audio::linear_to_db((w_energy / n).sqrt());
    if w_rms_db <= DOA_SILENCE_DB {
        return Err(Error::NoEstimate);
    }

    let mut ix = 0.0f64;
    let mut iy = 0.0f64;
    let mut iz = 0.0f64;
    for i in 0..end - start {
        let wv = w[i].as_f64();
        ix += wv * x[i].as_f64();
        iy += wv * y[i].as_f64();
        iz += wv * z[i].as_f64();
    }
    let horiz = (ix * ix + iy * iy).sqrt();
    if horiz == 0.0 && iz == 0.0 {
        return Err(Error::NoEstimate);
    }
    let az = if horiz == 0.0 {
        0.0
    } else {
        wrap_azimuth_deg(iy.atan2(ix).to_degrees())
    };
    let el = iz.atan2(horiz).to_degrees();
    Ok((T::cast(az), T::cast(el)))
}

/// Eigenvalues of a symmetric 4x4 matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut m: [[f64; 4]; 4]) -> [f64; 4] {
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if m[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (2.0 * m[p][q]).atan2(m[q][q] - m[p][p]);
                let (s, c) = theta.sin_cos();
                for k in 0..4 {
                    let (kp, kq) = (m[k][p], m[k][q]);
                    m[k][p] = c * kp - s * kq;
                    m[k][q] = s * kp + c * kq;
                }
                for k in 0..4 {
                    let (pk, qk) = (m[p][k], m[q][k]);
                    m[p][k] = c * pk - s * qk;
                    m[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    [m[0][0], m[1][1], m[2][2], m[3][3]]
}

/// Invert a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.
fn invert4(m: [[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut a = m;
    let mut inv = [[0.0f64; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = a[r][col];
            for k in 0..4 {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    Some(inv)
}
