//! Flip-angle errors and Fourier analysis of the detector phase surface.
//!
//! The surface `S(φ1, φ2)` is projected onto
//! `{1, cos φ1, cos φ2, cos(φ1−φ2), cos(φ1+φ2)}` and the matching sines. On a
//! uniform grid these functions are mutually orthogonal, so each amplitude
//! is a plain inner product.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::exec::{map_indices, Execution};
use crate::pulse::{Channel, PulseProgram};
use crate::tomography::Experiment;
use crate::{Error, Result};

/// Smallest grid edge accepted by [`fit_phase_components`].
pub const MIN_GRID: usize = 8;

fn check_deviation(d: f64) -> Result<()> {
    if d.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "flip-angle deviation {d} outside (-1, 1)"
        )))
    }
}

/// Scales every S-channel flip angle by `1−δ1` and every I-channel one by
/// `1−δ2`. Phases are untouched.
pub fn perturb_program(program: &PulseProgram, delta1: f64, delta2: f64) -> Result<PulseProgram> {
    check_deviation(delta1)?;
    check_deviation(delta2)?;
    let steps = program
        .steps()
        .iter()
        .map(|s| {
            let f = match s.channel() {
                Channel::S => 1.0 - delta1,
                Channel::I => 1.0 - delta2,
            };
            s.with_flip_angle(s.flip_angle() * f)
        })
        .collect::<Result<Vec<_>>>()?;
    let out = PulseProgram::new(steps);
    Ok(match program.label() {
        Some(l) => out.with_label(l),
        None => out,
    })
}

/// Detector signal sampled on a uniform `n1 × n2` grid over [0, 2π)².
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSurface {
    n1: usize,
    n2: usize,
    /// Row-major: `values[i1 * n2 + i2] = S(2π i1/n1, 2π i2/n2)`.
    values: Vec<f64>,
}

impl PhaseSurface {
    pub fn new(n1: usize, n2: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n1 * n2 {
            return Err(Error::Fit(format!(
                "{} values for a {n1}×{n2} grid",
                values.len()
            )));
        }
        Ok(PhaseSurface { n1, n2, values })
    }

    /// Tabulates `f(φ1, φ2)` on an `n × n` grid.
    pub fn tabulate<F>(n: usize, exec: Execution, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let values = map_indices(n * n, exec, |idx| {
            let (i1, i2) = (idx / n, idx % n);
            f(TAU * i1 as f64 / n as f64, TAU * i2 as f64 / n as f64)
        });
        PhaseSurface {
            n1: n,
            n2: n,
            values,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn phases(&self, idx: usize) -> (f64, f64) {
        let (i1, i2) = (idx / self.n2, idx % self.n2);
        (
            TAU * i1 as f64 / self.n1 as f64,
            TAU * i2 as f64 / self.n2 as f64,
        )
    }
}

/// Samples an experiment's signal on an `n × n` phase grid.
pub fn sample_phase_surface(
    exp: &Experiment,
    n: usize,
    phase_cycle: bool,
    exec: Execution,
) -> PhaseSurface {
    PhaseSurface::tabulate(n, exec, |p1, p2| exp.sample(p1, p2, phase_cycle))
}

/// Fourier amplitudes of a phase surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseComponents {
    pub a0: f64,
    /// cos φ1
    pub a1: f64,
    /// cos φ2
    pub a2: f64,
    /// cos(φ1 − φ2)
    pub a12m: f64,
    /// cos(φ1 + φ2)
    pub a12p: f64,
    pub s1: f64,
    pub s2: f64,
    pub s12m: f64,
    pub s12p: f64,
    /// L2 norm over the grid of surface minus reconstruction.
    pub residual: f64,
}

impl PhaseComponents {
    pub fn evaluate(&self, p1: f64, p2: f64) -> f64 {
        self.a0
            + self.a1 * p1.cos()
            + self.a2 * p2.cos()
            + self.a12m * (p1 - p2).cos()
            + self.a12p * (p1 + p2).cos()
            + self.s1 * p1.sin()
            + self.s2 * p2.sin()
            + self.s12m * (p1 - p2).sin()
            + self.s12p * (p1 + p2).sin()
    }

    pub fn max_sine(&self) -> f64 {
        [self.s1, self.s2, self.s12m, self.s12p]
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
    }
}

pub fn fit_phase_components(surface: &PhaseSurface) -> Result<PhaseComponents> {
    let (n1, n2) = surface.dims();
    if n1 < MIN_GRID || n2 < MIN_GRID {
        return Err(Error::Fit(format!(
            "grid {n1}×{n2} is smaller than {MIN_GRID}×{MIN_GRID}"
        )));
    }
    if surface.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("surface contains non-finite samples".into()));
    }
    let count = surface.values.len() as f64;
    let mut acc = [0.0f64; 9];
    for (idx, &v) in surface.values.iter().enumerate() {
        let (p1, p2) = surface.phases(idx);
        let basis = [
            1.0,
            p1.cos(),
            p2.cos(),
            (p1 - p2).cos(),
            (p1 + p2).cos(),
            p1.sin(),
            p2.sin(),
            (p1 - p2).sin(),
            (p1 + p2).sin(),
        ];
        for (a, b) in acc.iter_mut().zip(basis) {
            *a += v * b;
        }
    }
    let mut c = PhaseComponents {
        a0: acc[0] / count,
        a1: 2.0 * acc[1] / count,
        a2: 2.0 * acc[2] / count,
        a12m: 2.0 * acc[3] / count,
        a12p: 2.0 * acc[4] / count,
        s1: 2.0 * acc[5] / count,
        s2: 2.0 * acc[6] / count,
        s12m: 2.0 * acc[7] / count,
        s12p: 2.0 * acc[8] / count,
        residual: 0.0,
    };
    c.residual = surface
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (p1, p2) = surface.phases(idx);
            (v - c.evaluate(p1, p2)).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(c)
}

/// Closed-form error coefficients of the published fourth-order model.
/// `a0` and `a12p` have no published expression and stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelCoefficients {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    pub a1: f64,
    pub a2: f64,
    pub a12: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a12p: Option<f64>,
}

pub fn model_coefficients(delta1: f64, delta2: f64) -> Result<ModelCoefficients> {
    check_deviation(delta1)?;
    check_deviation(delta2)?;
    Ok(ModelCoefficients {
        a0: None,
        a1: -0.5 * delta1 * (1.0 - delta1) * delta2 * delta2,
        a2: -0.25 * delta1 * delta2,
        a12: 0.25 * (1.0 - delta1 * delta1) * (1.0 - delta2 * delta2),
        a12p: None,
    })
}
