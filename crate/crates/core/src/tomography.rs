//! Bell-state detector sequences, echo signal and phase interferograms.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::exec::{map_indices, Execution};
use crate::imperfections::perturb_program;
use crate::numfmt::fmt_sig;
use crate::pulse::{Channel, PulseProgram, PulseStep};
use crate::spin::{evolve, fictitious_z, trace_expectation, DensityMatrix, Operator};
use crate::{Error, Result};

/// Which three-level subsystem the detector addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorFamily {
    /// ESR 1↔3 + NMR 1↔2, observable 2·Sz^{13}.
    Psi,
    /// ESR 2↔4 + NMR 1↔2, observable 2·Sz^{24}.
    Phi,
}

impl DetectorFamily {
    pub fn esr_transition(self) -> (usize, usize) {
        match self {
            DetectorFamily::Psi => (1, 3),
            DetectorFamily::Phi => (2, 4),
        }
    }

    /// `2·Sz^{jk}` of the observed ESR transition.
    pub fn observable(self) -> Operator {
        let (j, k) = self.esr_transition();
        fictitious_z(j, k).expect("ESR pair").scale(2.0)
    }
}

impl fmt::Display for DetectorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorFamily::Psi => "psi",
            DetectorFamily::Phi => "phi",
        })
    }
}

impl FromStr for DetectorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi" => Ok(DetectorFamily::Psi),
            "phi" => Ok(DetectorFamily::Phi),
            other => Err(Error::domain(format!("unknown detector family '{other}'"))),
        }
    }
}

/// Back-transformation `P^{12}_I(−π/2, φ2) · P^{jk}_S(−π, φ1)` as a time
/// ordered program: the ESR pulse acts first.
pub fn detector_program(family: DetectorFamily, phi1: f64, phi2: f64) -> PulseProgram {
    let (j, k) = family.esr_transition();
    PulseProgram::new(vec![
        PulseStep::new(Channel::S, j, k, -PI, phi1).expect("ESR transition"),
        PulseStep::new(Channel::I, 1, 2, -FRAC_PI_2, phi2).expect("NMR transition"),
    ])
    .with_label(format!("detect {family}"))
}

/// Population difference on the family's ESR transition.
pub fn echo_signal(rho: &DensityMatrix, family: DetectorFamily) -> f64 {
    trace_expectation(rho, &family.observable())
}

/// Echo signal after the ideal detector at phases (φ1, φ2).
pub fn detect(rho: &DensityMatrix, family: DetectorFamily, phi1: f64, phi2: f64) -> f64 {
    let u = detector_program(family, phi1, phi2).compile();
    echo_signal(&evolve(rho, &u), family)
}

/// A complete preparation + detection experiment.
///
/// Flip-angle deviations apply to every pulse of a channel, preparation and
/// detection alike.
#[derive(Debug, Clone)]
pub struct Experiment {
    prepared: DensityMatrix,
    family: DetectorFamily,
    delta1: f64,
    delta2: f64,
}

impl Experiment {
    pub fn new(
        prep: &PulseProgram,
        init: &DensityMatrix,
        family: DetectorFamily,
        delta1: f64,
        delta2: f64,
    ) -> Result<Self> {
        let prep = perturb_program(prep, delta1, delta2)?;
        Ok(Experiment {
            prepared: evolve(init, &prep.compile()),
            family,
            delta1,
            delta2,
        })
    }

    /// State after the (possibly imperfect) preparation.
    pub fn prepared(&self) -> &DensityMatrix {
        &self.prepared
    }

    pub fn family(&self) -> DetectorFamily {
        self.family
    }

    pub fn signal(&self, phi1: f64, phi2: f64) -> f64 {
        let det = perturb_program(
            &detector_program(self.family, phi1, phi2),
            self.delta1,
            self.delta2,
        )
        .expect("deviations validated at construction");
        echo_signal(&evolve(&self.prepared, &det.compile()), self.family)
    }

    /// Mean of S(φ1, φ2) and S(φ1+π, φ2+π).
    pub fn cycled_signal(&self, phi1: f64, phi2: f64) -> f64 {
        0.5 * (self.signal(phi1, phi2) + self.signal(phi1 + PI, phi2 + PI))
    }

    pub fn sample(&self, phi1: f64, phi2: f64, phase_cycle: bool) -> f64 {
        if phase_cycle {
            self.cycled_signal(phi1, phi2)
        } else {
            self.signal(phi1, phi2)
        }
    }
}

pub fn phase_cycled_detect(
    prep: &PulseProgram,
    init: &DensityMatrix,
    family: DetectorFamily,
    phi1: f64,
    phi2: f64,
    delta1: f64,
    delta2: f64,
) -> Result<f64> {
    Ok(Experiment::new(prep, init, family, delta1, delta2)?.cycled_signal(phi1, phi2))
}

/// Parameters of a phase-increment scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSettings {
    /// Artificial phase frequency of the ESR detection pulse, Hz.
    pub nu1: f64,
    /// Artificial phase frequency of the NMR detection pulse, Hz.
    pub nu2: f64,
    /// Increment between consecutive experiments, s.
    pub dt: f64,
    pub n: usize,
    pub phase_cycle: bool,
    pub delta1: f64,
    pub delta2: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            nu1: 2.0e6,
            nu2: 1.5e6,
            dt: 100e-9,
            n: 200,
            phase_cycle: false,
            delta1: 0.0,
            delta2: 0.0,
        }
    }
}

impl ScanSettings {
    /// Hard checks; returns non-fatal warnings (Nyquist).
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.n < 2 {
            return Err(Error::domain(format!(
                "scan needs at least 2 samples, got {}",
                self.n
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.nu1.is_finite() && self.nu2.is_finite()) {
            return Err(Error::domain("phase frequencies must be finite"));
        }
        for d in [self.delta1, self.delta2] {
            if !(d.abs() < 1.0) {
                return Err(Error::domain(format!(
                    "flip-angle deviation {d} outside (-1, 1)"
                )));
            }
        }
        let mut warnings = Vec::new();
        let fmax = self.nu1.abs() + self.nu2.abs();
        if fmax > 0.0 && self.dt >= 1.0 / (2.0 * fmax) {
            warnings.push(format!(
                "dt = {} s aliases the sum frequency {} Hz (Nyquist limit {} s)",
                self.dt,
                fmax,
                1.0 / (2.0 * fmax)
            ));
        }
        Ok(warnings)
    }

    /// Detection phases of sample `n`.
    pub fn phases(&self, n: usize) -> (f64, f64) {
        let t = n as f64 * self.dt;
        (TAU * self.nu1 * t, TAU * self.nu2 * t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferogramMeta {
    pub family: DetectorFamily,
    pub state: Option<String>,
    pub settings: ScanSettings,
}

/// Detector signal versus experiment index.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub samples: Vec<f64>,
    /// Sample spacing, s.
    pub dt: f64,
    pub meta: Option<InterferogramMeta>,
}

impl Interferogram {
    pub fn from_samples(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("interferogram needs at least 2 samples"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation(
                "interferogram contains non-finite samples",
            ));
        }
        Ok(Interferogram {
            samples,
            dt,
            meta: None,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV with header `n,t_us,signal`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t_us,signal\n");
        for (n, s) in self.samples.iter().enumerate() {
            let t_us = n as f64 * self.dt * 1e6;
            out.push_str(&format!("{n},{},{}\n", fmt_sig(t_us, 12), fmt_sig(*s, 12)));
        }
        out
    }
}

/// Runs a phase-increment scan: sample `n` is a fresh experiment detected at
/// φ_j = 2π ν_j n Δt.
pub fn interferogram(
    prep: &PulseProgram,
    init: &DensityMatrix,
    family: DetectorFamily,
    settings: &ScanSettings,
    exec: Execution,
) -> Result<Interferogram> {
    settings.validate()?;
    let exp = Experiment::new(prep, init, family, settings.delta1, settings.delta2)?;
    let samples = map_indices(settings.n, exec, |n| {
        let (p1, p2) = settings.phases(n);
        exp.sample(p1, p2, settings.phase_cycle)
    });
    Ok(Interferogram {
        samples,
        dt: settings.dt,
        meta: Some(InterferogramMeta {
            family,
            state: prep.label().map(str::to_string),
            settings: *settings,
        }),
    })
}
