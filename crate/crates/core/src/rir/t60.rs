//! Reverberation-time estimation via Schroeder backward integration.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::rir::Rir;

/// Decibel range the level fit runs over: -5 dB down to -25 dB.
const FIT_TOP_DB: f64 = -5.0;
const FIT_BOTTOM_DB: f64 = -25.0;

/// Shortest fit window accepted as a reverberant tail, seconds. A lone
/// bandlimited pulse decays 20 dB within its 3 ms kernel; genuine room
/// decays take far longer.
const MIN_FIT_SPAN_SECONDS: f64 = 0.01;

/// Estimate T60 of `rir` from channel 0.
///
/// Computes the backward-integrated energy decay curve, fits a line between
/// its -5 dB and -25 dB crossings, and extrapolates the slope to -60 dB.
/// Fails when the response does not decay far enough for the fit.
pub fn estimate_t60<T: Float>(rir: &Rir<T>) -> Result<f64> {
    let channel = rir
        .taps
        .first()
        .ok_or_else(|| Error::Analysis("empty impulse response".into()))?;

    // Backward-integrated energy, dropping the all-zero tail which carries
    // no decay information.
    let mut edc: Vec<f64> = Vec::with_capacity(channel.len());
    let mut acc = 0.0f64;
    for &h in channel.iter().rev() {
        let v = h.as_f64();
        acc += v * v;
        edc.push(acc);
    }
    edc.reverse();
    let total = edc[0];
    if total <= 0.0 {
        return Err(Error::Analysis("impulse response is silent".into()));
    }
    while edc.last() == Some(&0.0) {
        edc.pop();
    }

    let db: Vec<f64> = edc.iter().map(|&e| 10.0 * (e / total).log10()).collect();
    let top = db.iter().position(|&v| v <= FIT_TOP_DB);
    let bottom = db.iter().position(|&v| v <= FIT_BOTTOM_DB);
    let fs = rir.sample_rate as f64;
    let (n_top, n_bottom) = match (top, bottom) {
        (Some(a), Some(b)) if b > a + 1 => (a, b),
        _ => {
            let range = db.last().copied().unwrap_or(0.0);
            return Err(Error::Analysis(format!(
                "insufficient decay range for a T60 fit (reached {range:.1} dB, need {FIT_BOTTOM_DB} dB)"
            )));
        }
    };
    if ((n_bottom - n_top) as f64) < MIN_FIT_SPAN_SECONDS * fs {
        return Err(Error::Analysis(format!(
            "decay from {FIT_TOP_DB} to {FIT_BOTTOM_DB} dB spans only {:.2} ms; not a reverberant tail",
            (n_bottom - n_top) as f64 / fs * 1e3
        )));
    }

    // Least-squares line through (time, dB) over the fit window.
    let n = (n_bottom - n_top + 1) as f64;
    let mut st = 0.0;
    let mut sd = 0.0;
    let mut stt = 0.0;
    let mut std_ = 0.0;
    for i in n_top..=n_bottom {
        let t = i as f64 / fs;
        st += t;
        sd += db[i];
        stt += t * t;
        std_ += t * db[i];
    }
    let denom = n * stt - st * st;
    if denom <= 0.0 {
        return Err(Error::Analysis("degenerate decay fit window".into()));
    }
    let slope = (n * std_ - st * sd) / denom; // dB per second
    if slope >= 0.0 {
        return Err(Error::Analysis("energy decay curve is not decaying".into()));
    }
    Ok(-60.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{MicArray, RoomSpec, Vec3};
    use crate::rir::{synth_rir, RirFormat};

    fn rir_from(taps: Vec<f64>) -> Rir<f64> {
        Rir::new(
            24000,
            vec![taps],
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(2.0, 1.0, 1.0),
            RirFormat::Capsules,
        )
        .unwrap()
    }

    #[test]
    fn unit_impulse_has_no_decay_range() {
        let mut taps = vec![0.0; 512];
        taps[0] = 1.0;
        assert!(matches!(
            estimate_t60(&rir_from(taps)),
            Err(Error::Analysis(_))
        ));
    }

    #[test]
    fn synthetic_exponential_decay() {
        // Noise-modulated e^{-t/tau} with tau for T60 = 0.3 s
        // (T60 = 6.9078 tau analytically).
        let fs = 24000.0;
        let tau = 0.3 / 6.9078;
        let mut state = 0x2545F4914F6CDD1Du64;
        let taps: Vec<f64> = (0..(fs * 0.5) as usize)
            .map(|n| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let noise = (state as f64 / u64::MAX as f64) * 2.0 - 1.0;
                noise * (-(n as f64) / (fs * tau)).exp()
            })
            .collect();
        let t60 = estimate_t60(&rir_from(taps)).unwrap();
        assert!((t60 - 0.3).abs() / 0.3 < 0.10, "T60 {t60}");
    }

    #[test]
    fn sabine_room_prediction() {
        let room = RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), 0.8).unwrap();
        let rir = synth_rir(
            &room,
            Vec3::new(2.0, 1.5, 1.0),
            &MicArray::single_omni(Vec3::new(3.8, 1.1, 0.7)),
            24000,
            36,
        )
        .unwrap();
        let t60 = estimate_t60(&rir).unwrap();
        let sabine = room.sabine_t60();
        assert!((t60 - sabine).abs() / sabine < 0.25, "T60 {t60} vs Sabine {sabine}");
    }

    #[test]
    fn t60_monotone_in_beta() {
        let mut last = 0.0;
        for beta in [0.3, 0.5, 0.7, 0.9] {
            let room = RoomSpec::new(Vec3::new(5.0, 3.0, 2.0), beta).unwrap();
            let rir = synth_rir(
                &room,
                Vec3::new(2.0, 1.5, 1.0),
                &MicArray::single_omni(Vec3::new(3.8, 1.1, 0.7)),
                24000,
                36,
            )
            .unwrap();
            let t60 = estimate_t60(&rir).unwrap();
            assert!(t60 > last, "beta {beta}: T60 {t60} not above {last}");
            last = t60;
        }
    }
}
