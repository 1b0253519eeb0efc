//! Minimal RIFF/WAV reader and writer.
//!
//! Supports 16-bit PCM and 32-bit IEEE float, mono to arbitrary channel
//! counts. Parse failures report the byte offset where the file went wrong.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::float::Float;

/// Sample encoding for [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Float32,
    Int16,
}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Wav {
            path: self.path.to_path_buf(),
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.err(format!(
                "unexpected end of file (wanted {n} bytes, {} left)",
                self.bytes.len() - self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn tag(&mut self) -> Result<[u8; 4]> {
        let b = self.take(4)?;
        Ok([b[0], b[1], b[2], b[3]])
    }
}

struct Fmt {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

/// Read a WAV file into a float clip. 16-bit PCM samples are scaled by
/// `1/32768`; 32-bit float samples pass through unchanged.
pub fn read_wav<T: Float>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };

    if r.tag()? != *b"RIFF" {
        r.pos = 0;
        return Err(r.err("missing RIFF magic"));
    }
    let _riff_size = r.u32()?;
    if r.tag()? != *b"WAVE" {
        r.pos -= 4;
        return Err(r.err("missing WAVE form type"));
    }

    let mut fmt: Option<Fmt> = None;
    let mut data: Option<(usize, usize)> = None; // (offset, len)
    while r.pos + 8 <= r.bytes.len() {
        let tag = r.tag()?;
        let size = r.u32()? as usize;
        match &tag {
            b"fmt " => {
                if size < 16 {
                    return Err(r.err(format!("fmt chunk too short ({size} bytes)")));
                }
                let chunk_start = r.pos;
                let mut format = r.u16()?;
                let channels = r.u16()?;
                let sample_rate = r.u32()?;
                let _byte_rate = r.u32()?;
                let _block_align = r.u16()?;
                let bits = r.u16()?;
                if format == FORMAT_EXTENSIBLE {
                    if size < 40 {
                        return Err(r.err("extensible fmt chunk too short"));
                    }
                    let _ext_size = r.u16()?;
                    let _valid_bits = r.u16()?;
                    let _channel_mask = r.u32()?;
                    format = r.u16()?; // first two bytes of the subformat GUID
                }
                if channels == 0 {
                    return Err(r.err("zero channels"));
                }
                fmt = Some(Fmt {
                    format,
                    channels,
                    sample_rate,
                    bits,
                });
                r.pos = chunk_start + size + (size & 1);
            }
            b"data" => {
                if r.pos + size > r.bytes.len() {
                    return Err(r.err(format!(
                        "data chunk claims {size} bytes but only {} remain",
                        r.bytes.len() - r.pos
                    )));
                }
                data = Some((r.pos, size));
                r.pos += size + (size & 1);
            }
            _ => {
                // Skip unknown chunks (fact, LIST, ...), word-aligned.
                if r.pos + size > r.bytes.len() {
                    return Err(r.err(format!("chunk claims {size} bytes beyond end of file")));
                }
                r.pos += size + (size & 1);
            }
        }
    }

    let fmt = fmt.ok_or_else(|| r.err("missing fmt chunk"))?;
    let (data_off, data_len) = data.ok_or_else(|| r.err("missing data chunk"))?;
    r.pos = data_off;

    let bytes_per_sample = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => 2,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (f, b) => {
            return Err(r.err(format!(
                "unsupported encoding (format tag {f}, {b} bits); supported: 16-bit PCM, 32-bit float"
            )))
        }
    };
    let channels = fmt.channels as usize;
    let frame_bytes = bytes_per_sample * channels;
    if data_len % frame_bytes != 0 {
        return Err(r.err(format!(
            "data length {data_len} is not a whole number of {frame_bytes}-byte frames"
        )));
    }
    let frames = data_len / frame_bytes;
    let mut samples = vec![Vec::with_capacity(frames); channels];
    let raw = &r.bytes[data_off..data_off + data_len];
    match bytes_per_sample {
        2 => {
            for frame in raw.chunks_exact(frame_bytes) {
                for (ch, b) in frame.chunks_exact(2).enumerate() {
                    let v = i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0;
                    samples[ch].push(T::cast(v));
                }
            }
        }
        4 => {
            for frame in raw.chunks_exact(frame_bytes) {
                for (ch, b) in frame.chunks_exact(4).enumerate() {
                    let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                    samples[ch].push(T::from_f32(v).unwrap_or_else(T::zero));
                }
            }
        }
        _ => unreachable!(),
    }
    AudioClip::new(fmt.sample_rate, samples)
}

/// Write `clip` to a WAV file with the given sample encoding.
pub fn write_wav<T: Float>(
    path: impl AsRef<Path>,
    clip: &AudioClip<T>,
    encoding: WavEncoding,
) -> Result<()> {
    let path = path.as_ref();
    if clip
        .samples
        .iter()
        .any(|c| c.iter().any(|s| !s.is_finite()))
    {
        return Err(Error::Format(
            "refusing to write non-finite samples".into(),
        ));
    }
    let channels = clip.channels() as u16;
    if channels == 0 {
        return Err(Error::Format("cannot write a zero-channel clip".into()));
    }
    let frames = clip.len();
    let (format, bits): (u16, u16) = match encoding {
        WavEncoding::Float32 => (FORMAT_IEEE_FLOAT, 32),
        WavEncoding::Int16 => (FORMAT_PCM, 16),
    };
    let bytes_per_sample = (bits / 8) as u32;
    let block_align = channels as u32 * bytes_per_sample;
    let data_len = frames as u32 * block_align;
    let fact_len = if format == FORMAT_IEEE_FLOAT { 12 } else { 0 };
    let riff_len = 4 + (8 + 16) + fact_len + (8 + data_len);

    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(path, e);

    w.write_all(b"RIFF").map_err(io_err)?;
    w.write_all(&riff_len.to_le_bytes()).map_err(io_err)?;
    w.write_all(b"WAVE").map_err(io_err)?;
    w.write_all(b"fmt ").map_err(io_err)?;
    w.write_all(&16u32.to_le_bytes()).map_err(io_err)?;
    w.write_all(&format.to_le_bytes()).map_err(io_err)?;
    w.write_all(&channels.to_le_bytes()).map_err(io_err)?;
    w.write_all(&clip.sample_rate.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(clip.sample_rate * block_align).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(block_align as u16).to_le_bytes()).map_err(io_err)?;
    w.write_all(&bits.to_le_bytes()).map_err(io_err)?;
    if format == FORMAT_IEEE_FLOAT {
        w.write_all(b"fact").map_err(io_err)?;
        w.write_all(&4u32.to_le_bytes()).map_err(io_err)?;
        w.write_all(&(frames as u32).to_le_bytes()).map_err(io_err)?;
    }
    w.write_all(b"data").map_err(io_err)?;
    w.write_all(&data_len.to_le_bytes()).map_err(io_err)?;

    let mut buf = Vec::with_capacity(frames * block_align as usize);
    match encoding {
        WavEncoding::Float32 => {
            for n in 0..frames {
                for ch in &clip.samples {
                    let v = ch[n].to_f32().unwrap_or(0.0);
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        WavEncoding::Int16 => {
            for n in 0..frames {
                for ch in &clip.samples {
                    let v = (ch[n].as_f64() * 32768.0).round().clamp(-32768.0, 32767.0);
                    buf.extend_from_slice(&(v as i16).to_le_bytes());
                }
            }
        }
    }
    w.write_all(&buf).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}
