//! Snapshot files: a `key = value` text sidecar (`<base>.hdr`) and a raw
//! payload (`<base>.iq`) of channel-major f32 little-endian I/Q pairs.
//! Samples are stored in single precision, so a capture survives the round
//! trip bit-exactly once it has been through
//! [`MultiChannelCapture::quantize_f32`].

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::simchannel::{CaptureMeta, MultiChannelCapture, NUM_RX_CHANNELS};
use crate::waveform::ConfigId;
use crate::{Error, Result};

const MAGIC: &str = "srspos-snapshot-v1";
const BYTES_PER_SAMPLE: u64 = 8;

pub fn header_path(base: &Path) -> PathBuf {
    with_suffix(base, "hdr")
}

pub fn payload_path(base: &Path) -> PathBuf {
    with_suffix(base, "iq")
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Expected payload size for `num_samples` per channel.
pub fn payload_len(num_samples: usize) -> u64 {
    NUM_RX_CHANNELS as u64 * num_samples as u64 * BYTES_PER_SAMPLE
}

fn header_text(capture: &MultiChannelCapture) -> String {
    let m = &capture.meta;
    let id = m.config_id.map_or("none", ConfigId::as_str);
    format!(
        "format = {MAGIC}\nconfig_id = {id}\nsample_rate_hz = {:?}\ncarrier_freq_hz = {:?}\nnum_channels = {}\nnum_samples = {}\ntimestamp_s = {:?}\nseed = {}\n",
        capture.sample_rate_hz,
        m.carrier_freq_hz,
        NUM_RX_CHANNELS,
        capture.num_samples(),
        m.timestamp_s,
        m.seed,
    )
}

/// Writes `<base>.hdr` and `<base>.iq`.
pub fn write_snapshot(capture: &MultiChannelCapture, base: &Path) -> Result<()> {
    capture.validate()?;
    fs::write(header_path(base), header_text(capture))?;
    let mut w = BufWriter::new(fs::File::create(payload_path(base))?);
    for ch in &capture.channels {
        for z in ch {
            w.write_all(&(z.re as f32).to_le_bytes())?;
            w.write_all(&(z.im as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Header {
    config_id: Option<ConfigId>,
    sample_rate_hz: f64,
    carrier_freq_hz: f64,
    num_samples: usize,
    timestamp_s: f64,
    seed: u64,
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn parse_header(text: &str) -> Result<Header> {
    let mut fields: Vec<(&str, &str, usize)> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| format_err(start, format!("expected `key = value`, found `{body}`")))?;
        let k = k.trim();
        if fields.iter().any(|f| f.0 == k) {
            return Err(format_err(start, format!("duplicate key `{k}`")));
        }
        fields.push((k, v.trim(), start));
    }
    let get = |key: &str| -> Result<(&str, usize)> {
        fields
            .iter()
            .find(|f| f.0 == key)
            .map(|f| (f.1, f.2))
            .ok_or_else(|| format_err(text.len(), format!("missing key `{key}`")))
    };
    fn parse<T: std::str::FromStr>(key: &str, (v, at): (&str, usize)) -> Result<T> {
        v.parse().map_err(|_| format_err(at, format!("invalid value `{v}` for `{key}`")))
    }

    let (magic, at) = get("format")?;
    if magic != MAGIC {
        return Err(format_err(at, format!("unsupported format `{magic}`")));
    }
    let known = [
        "format",
        "config_id",
        "sample_rate_hz",
        "carrier_freq_hz",
        "num_channels",
        "num_samples",
        "timestamp_s",
        "seed",
    ];
    if let Some(f) = fields.iter().find(|f| !known.contains(&f.0)) {
        return Err(format_err(f.2, format!("unknown key `{}`", f.0)));
    }
    let (id, at) = get("config_id")?;
    let config_id = match id {
        "none" => None,
        s => Some(s.parse::<ConfigId>().map_err(|_| format_err(at, format!("unknown config_id `{s}`")))?),
    };
    let num_channels: usize = parse("num_channels", get("num_channels")?)?;
    if num_channels != NUM_RX_CHANNELS {
        return Err(format_err(
            get("num_channels")?.1,
            format!("num_channels = {num_channels}, expected {NUM_RX_CHANNELS}"),
        ));
    }
    let sample_rate_hz: f64 = parse("sample_rate_hz", get("sample_rate_hz")?)?;
    if !(sample_rate_hz > 0.0) {
        return Err(format_err(get("sample_rate_hz")?.1, "sample_rate_hz must be positive"));
    }
    Ok(Header {
        config_id,
        sample_rate_hz,
        carrier_freq_hz: parse("carrier_freq_hz", get("carrier_freq_hz")?)?,
        num_samples: parse("num_samples", get("num_samples")?)?,
        timestamp_s: parse("timestamp_s", get("timestamp_s")?)?,
        seed: parse("seed", get("seed")?)?,
    })
}

/// Reads the capture written by [`write_snapshot`] under `base`.
pub fn read_snapshot(base: &Path) -> Result<MultiChannelCapture> {
    let text = fs::read(header_path(base))?;
    let text = std::str::from_utf8(&text).map_err(|e| format_err(e.valid_up_to(), "sidecar is not UTF-8"))?;
    let h = parse_header(text)?;
    let payload = fs::read(payload_path(base))?;
    let expected = payload_len(h.num_samples);
    if payload.len() as u64 != expected {
        return Err(Error::Format {
            offset: (payload.len() as u64).min(expected),
            message: format!(
                "payload is {} bytes, expected {expected} ({NUM_RX_CHANNELS} channels × {} samples × {BYTES_PER_SAMPLE})",
                payload.len(),
                h.num_samples
            ),
        });
    }
    let f = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
    let channels = if h.num_samples == 0 {
        vec![Vec::new(); NUM_RX_CHANNELS]
    } else {
        payload
            .chunks_exact(h.num_samples * BYTES_PER_SAMPLE as usize)
            .map(|ch| ch.chunks_exact(8).map(|s| Complex64::new(f(&s[..4]), f(&s[4..]))).collect())
            .collect()
    };
    MultiChannelCapture::new(
        channels,
        h.sample_rate_hz,
        CaptureMeta {
            config_id: h.config_id,
            carrier_freq_hz: h.carrier_freq_hz,
            timestamp_s: h.timestamp_s,
            seed: h.seed,
        },
    )
}
