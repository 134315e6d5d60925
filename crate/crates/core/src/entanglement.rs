//! Partial transpose, negativity and the PPT quantum-limit temperature.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::config::{BOLTZMANN, PLANCK};
use crate::linalg::{hermitian_eigenvalues, Mat4, DIM};
use crate::prep::{bell_prep_program, boltzmann_density, BellLabel};
use crate::spin::{evolve, DensityMatrix, Operator};
use crate::{Error, Result};

/// Eigenvalues below this count as negative.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Polarization above which the thermally prepared singlet ensemble is
/// entangled.
pub const THRESHOLD_POLARIZATION: f64 = FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Electron,
    Nucleus,
}

/// Transposes the indices of one spin; index = 2·electron_bit + nuclear_bit.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: Subsystem) -> Operator {
    let m = rho.matrix();
    let mut out = Mat4::zeros();
    for row in 0..DIM {
        for col in 0..DIM {
            let (re, rn) = (row >> 1, row & 1);
            let (ce, cn) = (col >> 1, col & 1);
            let (src_r, src_c) = match subsystem {
                Subsystem::Electron => ((ce << 1) | rn, (re << 1) | cn),
                Subsystem::Nucleus => ((re << 1) | cn, (ce << 1) | rn),
            };
            out.0[row][col] = m.get(src_r, src_c);
        }
    }
    Operator::hermitian(out).expect("partial transpose of a Hermitian matrix is Hermitian")
}

/// Smallest eigenvalue of the nuclear partial transpose.
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(partial_transpose(rho, Subsystem::Nucleus).matrix())[0]
}

/// Sum of |λ| over negative eigenvalues of the partial transpose.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(partial_transpose(rho, Subsystem::Nucleus).matrix())
        .iter()
        .filter(|&&l| l < -NEGATIVE_TOL)
        .fold(0.0, |acc, l| acc - l)
}

/// Exact electron polarization `tanh(hν/(2 k_B T))`.
pub fn polarization_at(frequency_hz: f64, temperature_k: f64) -> Result<f64> {
    check_positive("frequency", frequency_hz)?;
    check_positive("temperature", temperature_k)?;
    Ok((PLANCK * frequency_hz / (2.0 * BOLTZMANN * temperature_k)).tanh())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumLimitResult {
    pub threshold_polarization: f64,
    /// T_Q, kelvin.
    pub temperature: f64,
    /// Electron Larmor frequency, Hz.
    pub frequency: f64,
}

impl QuantumLimitResult {
    pub fn summary(&self) -> String {
        format!(
            "T_Q = {:.4} K at {:.4} GHz (threshold polarization K* = {:.6})",
            self.temperature,
            self.frequency / 1e9,
            self.threshold_polarization
        )
    }
}

/// `T_Q = hν / (2 k_B artanh K*)`.
pub fn quantum_limit_temperature(frequency_hz: f64) -> Result<QuantumLimitResult> {
    check_positive("frequency", frequency_hz)?;
    let k = THRESHOLD_POLARIZATION;
    Ok(QuantumLimitResult {
        threshold_polarization: k,
        temperature: PLANCK * frequency_hz / (2.0 * BOLTZMANN * k.atanh()),
        frequency: frequency_hz,
    })
}

/// Whether the thermal polarization at `T` exceeds the threshold. `T = T_Q`
/// itself is not entangled.
pub fn entangled_at(frequency_hz: f64, temperature_k: f64) -> Result<bool> {
    check_positive("temperature", temperature_k)?;
    Ok(temperature_k < quantum_limit_temperature(frequency_hz)?.temperature)
}

/// Ψ⁻ preparation (with the pseudo-pure step) applied to the thermal state.
pub fn thermal_singlet(frequency_hz: f64, temperature_k: f64) -> Result<DensityMatrix> {
    let k = polarization_at(frequency_hz, temperature_k)?;
    let prog = bell_prep_program(BellLabel::PsiMinus, true);
    Ok(evolve(&boltzmann_density(k)?, &prog.compile()))
}

/// Locates T_Q by bisecting the sign of the smallest partial-transpose
/// eigenvalue of [`thermal_singlet`] in log-temperature.
pub fn bisect_quantum_limit(frequency_hz: f64) -> Result<f64> {
    let g = |t: f64| thermal_singlet(frequency_hz, t).map(|r| min_pt_eigenvalue(&r));
    let scale = PLANCK * frequency_hz / BOLTZMANN;
    let (mut lo, mut hi) = (scale * 1e-3, scale * 1e3);
    if !(g(lo)? < 0.0 && g(hi)? > 0.0) {
        return Err(Error::domain("entanglement threshold not bracketed"));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
