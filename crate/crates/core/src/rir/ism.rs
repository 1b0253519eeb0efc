//! Shoebox image-source enumeration.
//!
//! Mirror images are indexed per axis by a cell index `m`: the image of a
//! source at coordinate `s` in the m-th mirrored copy of the room sits at
//! `s + m L` for even `m` and `(m + 1) L - s` for odd `m`, and reaches the
//! listener through `|m|` wall reflections on that axis.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::geometry::{RoomSpec, Vec3};

/// One mirror-image source: where it sits, how many reflections produced it,
/// and its contribution toward a given listening position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource<T> {
    /// Mirror-image coordinate, possibly outside the room.
    pub position: Vec3<T>,
    /// Total number of wall reflections.
    pub reflection_count: u32,
    /// Pressure amplitude `beta^r / (4 pi d)` toward the reference mic.
    pub amplitude: T,
    /// Propagation delay `d / c` toward the reference mic, seconds.
    pub delay: T,
}

/// Image coordinate on one axis for cell index `m`.
#[inline]
fn mirror_coord<T: Float>(source: T, room_len: T, m: i64) -> T {
    if m.rem_euclid(2) == 0 {
        source + T::cast(m as f64) * room_len
    } else {
        T::cast((m + 1) as f64) * room_len - source
    }
}

/// All image positions with total reflection count `<= max_order`, paired
/// with their reflection counts. Positions do not depend on the mic.
pub fn image_positions<T: Float>(
    room: &RoomSpec<T>,
    source: Vec3<T>,
    max_order: usize,
) -> Vec<(Vec3<T>, u32)> {
    let n = max_order as i64;
    let mut out = Vec::new();
    for mx in -n..=n {
        let rx = mx.unsigned_abs();
        let x = mirror_coord(source.x, room.dims.x, mx);
        for my in -(n - mx.abs())..=(n - mx.abs()) {
            let ry = my.unsigned_abs();
            let y = mirror_coord(source.y, room.dims.y, my);
            let budget = n - mx.abs() - my.abs();
            for mz in -budget..=budget {
                let rz = mz.unsigned_abs();
                let z = mirror_coord(source.z, room.dims.z, mz);
                out.push((Vec3::new(x, y, z), (rx + ry + rz) as u32));
            }
        }
    }
    out
}

fn check_inside<T: Float>(room: &RoomSpec<T>, p: Vec3<T>, what: &str) -> Result<()> {
    if !room.contains(p) {
        return Err(Error::Geometry(format!(
            "{what} at ({}, {}, {}) is not strictly inside the room",
            p.x, p.y, p.z
        )));
    }
    Ok(())
}

/// Enumerate all image sources of `source` up to `max_order` reflections,
/// with amplitudes and delays measured at `mic`.
///
/// Order 0 is the direct path. Amplitude is `beta^r / (4 pi d)` and delay is
/// `d / c`, where `d` is the image-to-mic distance.
pub fn enumerate_images<T: Float>(
    room: &RoomSpec<T>,
    source: Vec3<T>,
    mic: Vec3<T>,
    max_order: usize,
) -> Result<Vec<ImageSource<T>>> {
    check_inside(room, source, "source")?;
    check_inside(room, mic, "mic")?;
    if source == mic {
        return Err(Error::Geometry(
            "source and mic positions coincide".into(),
        ));
    }
    let four_pi = T::cast(4.0) * T::PI();
    let images = image_positions(room, source, max_order)
        .into_iter()
        .map(|(position, reflection_count)| {
            let d = position.distance(mic);
            ImageSource {
                position,
                reflection_count,
                amplitude: room.reflection.powi(reflection_count as i32) / (four_pi * d),
                delay: d / room.speed_of_sound,
            }
        })
        .collect();
    Ok(images)
}

/// Smallest reflection order whose next shell falls below `1e-4` of the
/// direct-path amplitude, capped at 40.
///
/// The bound treats an order-`n` image as no closer than `n` times the
/// smallest room dimension.
pub fn default_max_order<T: Float>(room: &RoomSpec<T>, source: Vec3<T>, mic: Vec3<T>) -> usize {
    const CAP: usize = 40;
    const RELATIVE_FLOOR: f64 = 1e-4;
    let beta = room.reflection.as_f64();
    if beta <= 0.0 {
        return 0;
    }
    let d0 = source.distance(mic).as_f64().max(1e-6);
    let l_min = room
        .dims
        .x
        .min(room.dims.y)
        .min(room.dims.z)
        .as_f64();
    for n in 0..CAP {
        let next = (n + 1) as f64;
        let d_min = (next * l_min).max(d0);
        if beta.powf(next) * d0 / d_min < RELATIVE_FLOOR {
            return n;
        }
    }
    CAP
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn room(beta: f64) -> RoomSpec<f64> {
        RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), beta).unwrap()
    }

    #[test]
    fn direct_path_only_at_order_zero() {
        let r = room(0.8);
        let imgs = enumerate_images(
            &r,
            Vec3::new(2.0, 1.5, 1.0),
            Vec3::new(1.0, 1.5, 1.0),
            0,
        )
        .unwrap();
        assert_eq!(imgs.len(), 1);
        let img = imgs[0];
        assert_eq!(img.position, Vec3::new(2.0, 1.5, 1.0));
        assert_eq!(img.reflection_count, 0);
        assert_abs_diff_eq!(img.amplitude, 0.0795775, epsilon = 1e-6);
        assert_abs_diff_eq!(img.delay, 1.0 / 343.0, epsilon = 1e-12);
        assert_abs_diff_eq!(img.delay * 1e3, 2.915, epsilon = 1e-3);
    }

    #[test]
    fn first_order_has_seven_images() {
        let r = room(0.8);
        let source = Vec3::new(2.0, 1.5, 1.0);
        let mic = Vec3::new(1.0, 1.5, 1.0);
        let imgs = enumerate_images(&r, source, mic, 1).unwrap();
        assert_eq!(imgs.len(), 7);
        assert_eq!(
            imgs.iter().filter(|i| i.reflection_count == 0).count(),
            1
        );
        // The x=0 wall mirrors the source to (-2, 1.5, 1), 3 m from the mic.
        let wall_x = imgs
            .iter()
            .find(|i| (i.position.x - (-2.0)).abs() < 1e-12)
            .expect("x=0 wall image");
        assert_eq!(wall_x.reflection_count, 1);
        assert_eq!(wall_x.position, Vec3::new(-2.0, 1.5, 1.0));
        assert_abs_diff_eq!(
            wall_x.amplitude,
            0.8 / (4.0 * std::f64::consts::PI * 3.0),
            epsilon = 1e-12
        );
        // Remaining first-order positions: one mirror per wall.
        let expected = [
            Vec3::new(8.0, 1.5, 1.0),
            Vec3::new(2.0, -1.5, 1.0),
            Vec3::new(2.0, 4.5, 1.0),
            Vec3::new(2.0, 1.5, -1.0),
            Vec3::new(2.0, 1.5, 3.0),
        ];
        for e in expected {
            assert!(
                imgs.iter().any(|i| i.position.distance(e) < 1e-12),
                "missing image {e:?}"
            );
        }
    }

    #[test]
    fn zero_reflection_coefficient_kills_reflections() {
        let r = room(0.0);
        let imgs = enumerate_images(
            &r,
            Vec3::new(2.0, 1.5, 1.0),
            Vec3::new(1.0, 1.5, 1.0),
            3,
        )
        .unwrap();
        for img in &imgs {
            if img.reflection_count > 0 {
                assert_eq!(img.amplitude, 0.0);
            } else {
                assert!(img.amplitude > 0.0);
            }
        }
    }

    #[test]
    fn image_count_matches_brute_force() {
        // Independent count: walk the full lattice cube and filter on the
        // total reflection count.
        let r = room(0.5);
        let source = Vec3::new(2.0, 1.5, 1.0);
        let mic = Vec3::new(1.0, 1.2, 0.8);
        for order in 0..=4usize {
            let fast = enumerate_images(&r, source, mic, order).unwrap().len();
            let n = order as i64;
            let mut brute = 0usize;
            for mx in -6..=6i64 {
                for my in -6..=6i64 {
                    for mz in -6..=6i64 {
                        if mx.abs() + my.abs() + mz.abs() <= n {
                            brute += 1;
                        }
                    }
                }
            }
            assert_eq!(fast, brute, "order {order}");
            // Cross-check against the closed-form shell count 4r^2 + 2.
            let closed: usize = 1 + (1..=order).map(|k| 4 * k * k + 2).sum::<usize>();
            assert_eq!(fast, closed, "order {order} closed form");
        }
    }

    #[test]
    fn geometry_errors() {
        let r = room(0.8);
        let inside = Vec3::new(1.0, 1.0, 1.0);
        assert!(matches!(
            enumerate_images(&r, Vec3::new(6.0, 1.0, 1.0), inside, 1),
            Err(Error::Geometry(_))
        ));
        assert!(matches!(
            enumerate_images(&r, inside, Vec3::new(1.0, -0.5, 1.0), 1),
            Err(Error::Geometry(_))
        ));
        assert!(matches!(
            enumerate_images(&r, inside, inside, 1),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn default_order_grows_with_beta() {
        let source = Vec3::new(2.0, 1.5, 1.0);
        let mic = Vec3::new(1.0, 1.5, 1.0);
        assert_eq!(default_max_order(&room(0.0), source, mic), 0);
        let mut last = 0;
        for beta in [0.3, 0.5, 0.7, 0.9] {
            let n = default_max_order(&room(beta), source, mic);
            assert!(n >= last, "order should not shrink with beta");
            last = n;
        }
        assert_eq!(default_max_order(&room(0.99), source, mic), 40);
    }
}
