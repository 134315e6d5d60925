//! One-sided DFT magnitude spectra of interferograms and peak picking.
//!
//! The transform is evaluated directly in O(N²); scans are a few hundred to a
//! few thousand samples long.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::exec::{map_indices, Execution};
use crate::numfmt::fmt_sig;
use crate::tomography::Interferogram;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectrumOptions {
    pub remove_mean: bool,
    pub window: Window,
}

/// Magnitudes `|X_k|` for `k = 0..=N/2` of `X_k = Σ_n x_n e^{−2πi kn/N}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    /// Bin spacing 1/(NΔt), Hz.
    pub bin_width: f64,
    pub mean_removed: bool,
    pub window: Window,
    pub n_samples: usize,
    /// Magnitudes at or below this are round-off (1e-12 · Σ|x_n|).
    pub floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub bin: usize,
    /// Bin-centre frequency, Hz.
    pub frequency: f64,
    pub magnitude: f64,
}

pub fn dft_magnitude(ig: &Interferogram, remove_mean: bool) -> Spectrum {
    spectrum(
        ig,
        SpectrumOptions {
            remove_mean,
            window: Window::Rectangular,
        },
        Execution::Sequential,
    )
}

pub fn spectrum(ig: &Interferogram, opts: SpectrumOptions, exec: Execution) -> Spectrum {
    let n = ig.samples.len();
    let mean = if opts.remove_mean {
        ig.samples.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let x: Vec<f64> = ig
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = match opts.window {
                Window::Rectangular => 1.0,
                Window::Hann => 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos()),
            };
            (s - mean) * w
        })
        .collect();
    let magnitudes = map_indices(n / 2 + 1, exec, |k| dft_bin(&x, k).norm());
    let floor = 1e-12 * ig.samples.iter().map(|v| v.abs()).sum::<f64>();
    Spectrum {
        magnitudes,
        bin_width: 1.0 / (n as f64 * ig.dt),
        mean_removed: opts.remove_mean,
        window: opts.window,
        n_samples: n,
        floor,
    }
}

fn dft_bin(x: &[f64], k: usize) -> C64 {
    let n = x.len();
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            // Reduce kn mod N first to keep the twiddle argument small.
            let phase = -TAU * ((k * i) % n) as f64 / n as f64;
            C64::from_polar(v, phase)
        })
        .sum()
}

impl Spectrum {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width
    }

    /// `(1/N) Σ_{k=0}^{N−1} |X_k|²` reconstructed from the one-sided bins.
    /// Equals `Σ x_n²` of the transformed samples (Parseval).
    pub fn two_sided_energy(&self) -> f64 {
        let n = self.n_samples;
        let m = &self.magnitudes;
        let mut e = m[0] * m[0];
        for (k, v) in m.iter().enumerate().skip(1) {
            let mult = if n.is_multiple_of(2) && k == n / 2 {
                1.0
            } else {
                2.0
            };
            e += mult * v * v;
        }
        e / n as f64
    }

    /// CSV with header `freq_MHz,magnitude`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_MHz,magnitude\n");
        for (k, m) in self.magnitudes.iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                fmt_sig(self.frequency(k) / 1e6, 12),
                fmt_sig(*m, 12)
            ));
        }
        out
    }
}

/// Local maxima of at least `min_relative` × the largest magnitude, sorted by
/// descending magnitude. The DC bin is ignored for mean-removed spectra.
pub fn find_peaks(spec: &Spectrum, min_relative: f64) -> Result<Vec<Peak>> {
    if !(min_relative > 0.0 && min_relative <= 1.0) {
        return Err(Error::domain(format!(
            "min_relative {min_relative} outside (0, 1]"
        )));
    }
    let m = &spec.magnitudes;
    if m.is_empty() {
        return Err(Error::domain("empty spectrum"));
    }
    let first = usize::from(spec.mean_removed);
    let global = m.iter().skip(first).copied().fold(0.0, f64::max);
    if global <= spec.floor {
        return Ok(Vec::new());
    }
    let threshold = (min_relative * global).max(spec.floor);
    let mut peaks: Vec<Peak> = (first..m.len())
        .filter(|&k| {
            let left = if k > first {
                m[k - 1]
            } else {
                f64::NEG_INFINITY
            };
            let right = m.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
            m[k] >= threshold && m[k] > spec.floor && m[k] > left && m[k] >= right
        })
        .map(|k| Peak {
            bin: k,
            frequency: spec.frequency(k),
            magnitude: m[k],
        })
        .collect();
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.bin.cmp(&b.bin)));
    Ok(peaks)
}
