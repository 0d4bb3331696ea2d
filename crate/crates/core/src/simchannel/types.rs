use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::util::wrap_phase;
use crate::waveform::ConfigId;
use crate::{Error, Result};

pub const NUM_RX_CHANNELS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    pub num_elements: usize,
    pub element_spacing_wavelengths: f64,
    /// Receiver channel feeding each array element, element 0 first.
    pub element_channel_map: Vec<usize>,
}

impl Default for UlaGeometry {
    fn default() -> Self {
        Self {
            num_elements: 3,
            element_spacing_wavelengths: 0.5,
            element_channel_map: vec![1, 2, 3],
        }
    }
}

impl UlaGeometry {
    pub fn new(spacing_wavelengths: f64, element_channel_map: Vec<usize>) -> Result<Self> {
        let g = Self {
            num_elements: element_channel_map.len(),
            element_spacing_wavelengths: spacing_wavelengths,
            element_channel_map,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.element_spacing_wavelengths > 0.0) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        if self.num_elements < 2 || self.element_channel_map.len() != self.num_elements {
            return Err(Error::Config("array needs ≥2 elements, one channel each".into()));
        }
        for (i, &c) in self.element_channel_map.iter().enumerate() {
            if c >= NUM_RX_CHANNELS {
                return Err(Error::Config(format!("channel index {c} outside [0, 3]")));
            }
            if self.element_channel_map[..i].contains(&c) {
                return Err(Error::Config(format!("channel {c} mapped twice")));
            }
        }
        Ok(())
    }

    pub fn reference_channel(&self) -> usize {
        self.element_channel_map[0]
    }
}

/// Receiver-side impairments injected by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentState {
    /// Static offsets of channel 1 against 0 and channel 3 against 2.
    pub intra_pair_offsets_rad: [f64; 2],
    /// Per-run phase of pair B against pair A.
    pub lo_differential_rad: f64,
    pub cfo_hz: f64,
    pub timing_offset_samples: usize,
    /// Per-resource-element SNR; `f64::INFINITY` disables noise.
    pub snr_db: f64,
}

impl ImpairmentState {
    pub fn ideal() -> Self {
        Self {
            intra_pair_offsets_rad: [0.0, 0.0],
            lo_differential_rad: 0.0,
            cfo_hz: 0.0,
            timing_offset_samples: 0,
            snr_db: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let phases = [
            self.intra_pair_offsets_rad[0],
            self.intra_pair_offsets_rad[1],
            self.lo_differential_rad,
        ];
        for p in phases {
            if !p.is_finite() || (wrap_phase(p) - p).abs() > 1e-12 {
                return Err(Error::Domain(format!("phase {p} outside (-π, π]")));
            }
        }
        if self.snr_db.is_nan() || !self.cfo_hz.is_finite() {
            return Err(Error::Domain("SNR and CFO must be numbers".into()));
        }
        Ok(())
    }
}

/// For channel `ch`: (pair index, whether it is the rotated member).
pub fn intra_pair_member(ch: usize) -> (usize, bool) {
    (ch / 2, ch % 2 == 1)
}

/// Total receiver-chain phase of channel `ch` under `imp`.
pub fn channel_phase(ch: usize, intra: [f64; 2], lo: f64) -> f64 {
    let (pair, rotated) = intra_pair_member(ch);
    let mut p = if rotated { intra[pair] } else { 0.0 };
    if pair == 1 {
        p += lo;
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub aoa_deg: f64,
    pub delay_samples: f64,
    pub complex_gain: Complex64,
}

impl Ray {
    pub fn new(aoa_deg: f64, delay_samples: f64, complex_gain: Complex64) -> Result<Self> {
        let r = Self {
            aoa_deg,
            delay_samples,
            complex_gain,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aoa_deg.abs() < 90.0) {
            return Err(Error::Domain(format!("ray angle {} outside (-90, 90)", self.aoa_deg)));
        }
        if !(self.delay_samples >= 0.0) {
            return Err(Error::Domain("ray delay must be non-negative".into()));
        }
        if !(self.complex_gain.norm() > 0.0) {
            return Err(Error::Domain("ray gain must be non-zero".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CaptureMeta {
    pub config_id: Option<ConfigId>,
    pub carrier_freq_hz: f64,
    pub timestamp_s: f64,
    pub seed: u64,
}

/// Four-channel complex baseband capture.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelCapture {
    pub channels: Vec<Vec<Complex64>>,
    pub sample_rate_hz: f64,
    pub meta: CaptureMeta,
}

impl MultiChannelCapture {
    pub fn new(channels: Vec<Vec<Complex64>>, sample_rate_hz: f64, meta: CaptureMeta) -> Result<Self> {
        let c = Self {
            channels,
            sample_rate_hz,
            meta,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != NUM_RX_CHANNELS {
            return Err(Error::Usage(format!(
                "capture has {} channels, expected {NUM_RX_CHANNELS}",
                self.channels.len()
            )));
        }
        let n = self.channels[0].len();
        if self.channels.iter().any(|c| c.len() != n) {
            return Err(Error::Usage("capture channels differ in length".into()));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Rounds every sample to single precision, as the SDR delivers them.
    pub fn quantize_f32(&mut self) {
        for ch in &mut self.channels {
            for z in ch.iter_mut() {
                *z = Complex64::new(z.re as f32 as f64, z.im as f32 as f64);
            }
        }
    }

    /// ULA snapshots in element order.
    pub fn ula_channels<'a>(&'a self, geometry: &UlaGeometry) -> Vec<&'a [Complex64]> {
        geometry
            .element_channel_map
            .iter()
            .map(|&c| self.channels[c].as_slice())
            .collect()
    }
}
