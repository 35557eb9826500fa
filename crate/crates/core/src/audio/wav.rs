//! RIFF/WAVE reading (PCM16 and float32, any channel count) and PCM16 mono
//! writing.

use std::fs;
use std::path::Path;

use super::{clip_in_place, downmix, Waveform};
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

const PCM16_MAX: i32 = 32767;

/// Reads a WAV file into a mono waveform at the file's declared rate.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_wav_bytes(&bytes)
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn malformed(field: &'static str, detail: impl Into<String>) -> Error {
    Error::MalformedWav {
        field,
        detail: detail.into(),
    }
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(malformed(
            "fmt chunk",
            format!("{} bytes, need 16", body.len()),
        ));
    }
    let mut tag = le_u16(body, 0);
    let channels = le_u16(body, 2);
    let sample_rate = le_u32(body, 4);
    let bits = le_u16(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the sub-format GUID,
        // whose first two bytes carry the real format tag.
        if body.len() < 26 {
            return Err(malformed("fmt extensible sub-format", "chunk truncated"));
        }
        tag = le_u16(body, 24);
    }
    if channels == 0 {
        return Err(malformed("channel count", "0"));
    }
    if sample_rate == 0 {
        return Err(malformed("sample rate", "0"));
    }
    Ok(Format {
        tag,
        channels,
        sample_rate,
        bits,
    })
}

/// Parses an in-memory WAV file.
pub fn read_wav_bytes(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 {
        return Err(malformed(
            "RIFF header",
            format!("file is {} bytes", bytes.len()),
        ));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed(
            "RIFF magic",
            format!("found {:?}", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed(
            "WAVE form type",
            format!("found {:?}", String::from_utf8_lossy(&bytes[8..12])),
        ));
    }

    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = le_u32(bytes, pos + 4) as usize;
        let start = pos + 8;
        // Writers that stream often leave the data size at 0 or 0xFFFFFFFF.
        let end = start.saturating_add(size).min(bytes.len());
        match id {
            b"fmt " => format = Some(parse_fmt(&bytes[start..end])?),
            b"data" => {
                data = Some(&bytes[start..end]);
                if format.is_some() {
                    break;
                }
            }
            _ => {}
        }
        pos = end + (size & 1);
    }

    let format = format.ok_or_else(|| malformed("fmt chunk", "missing"))?;
    let data = data.ok_or_else(|| malformed("data chunk", "missing"))?;
    let channels = format.channels as usize;

    let mut interleaved: Vec<f32> = match (format.tag, format.bits) {
        (FORMAT_PCM, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f32 / 32768.0)
            .collect(),
        (FORMAT_IEEE_FLOAT, 32) => data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
        (format_tag, bits) => return Err(Error::UnsupportedCodec { format_tag, bits }),
    };
    if let Some(i) = interleaved.iter().position(|s| !s.is_finite()) {
        return Err(malformed(
            "data chunk",
            format!("non-finite float sample at {i}"),
        ));
    }
    interleaved.truncate(interleaved.len() - interleaved.len() % channels);
    let mut samples = downmix(&interleaved, channels);
    clip_in_place(&mut samples);
    Ok(Waveform {
        samples,
        sample_rate: format.sample_rate,
    })
}

/// Quantizes one amplitude to PCM16: scale by 32768, round to nearest, clamp
/// symmetrically to ±32767 so that full scale maps to ±32767.
pub(crate) fn quantize(sample: f32) -> i16 {
    let v = (sample as f64 * 32768.0).round() as i64;
    v.clamp(-(PCM16_MAX as i64), PCM16_MAX as i64) as i16
}

/// Encodes a waveform as mono PCM16 WAV bytes.
pub fn write_wav_bytes(w: &Waveform) -> Result<Vec<u8>> {
    if w.sample_rate == 0 {
        return Err(Error::InvalidWaveform(
            "sample rate must be positive".into(),
        ));
    }
    let data_len = w.samples.len() * 2;
    if data_len > u32::MAX as usize - 36 {
        return Err(Error::InvalidWaveform(
            "too long for a RIFF container".into(),
        ));
    }
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate.to_le_bytes());
    out.extend_from_slice(&(w.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &w.samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    Ok(out)
}

/// Writes a waveform as a mono 16-bit PCM WAV file.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_wav_bytes(w)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
