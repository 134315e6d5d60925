//! Initial density matrices and the Bell-state preparation programs.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::config::{ExperimentConfig, BOHR_MAGNETON, BOLTZMANN};
use crate::linalg::Mat4;
use crate::pulse::{Channel, PulseProgram, PulseStep};
use crate::spin::{basis_state, check_level, DensityMatrix, PureState};
use crate::tomography::DetectorFamily;
use crate::{Error, Result};

/// How the thermal polarization is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationMode {
    /// High-temperature expansion `x = g μ_B B_0 / (2 k_B T)`.
    Linear,
    /// `tanh(x)`.
    Exact,
}

/// Electron thermal polarization K of the configured sample.
pub fn thermal_polarization(config: &ExperimentConfig, mode: PolarizationMode) -> Result<f64> {
    config.validate()?;
    let x = config.g_factor * BOHR_MAGNETON * config.field / (2.0 * BOLTZMANN * config.temperature);
    match mode {
        PolarizationMode::Linear if x >= 1.0 => Err(Error::domain(format!(
            "linear polarization {x} ≥ 1; the high-temperature expansion does not apply"
        ))),
        PolarizationMode::Linear => Ok(x),
        PolarizationMode::Exact => Ok(x.tanh()),
    }
}

/// `(1−K)·¼1 + K·ρ_P`.
pub fn boltzmann_density(k: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::domain(format!("polarization {k} outside [0, 1]")));
    }
    let lo = (1.0 - k) / 4.0;
    let hi = (1.0 + k) / 4.0;
    Ok(DensityMatrix::new_unchecked(Mat4::from_real_diagonal([
        lo, lo, hi, hi,
    ])))
}

/// ρ_P = ¼1 − ½Sz: populations (0, 0, ½, ½).
pub fn pseudo_boltzmann() -> DensityMatrix {
    DensityMatrix::new_unchecked(Mat4::from_real_diagonal([0.0, 0.0, 0.5, 0.5]))
}

/// `|level⟩⟨level|`.
pub fn pseudo_pure(level: usize) -> Result<DensityMatrix> {
    check_level(level)?;
    Ok(basis_state(level)?.projector())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiMinus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PhiPlus,
    ];

    /// Level whose pseudo-pure population seeds the preparation.
    pub fn start_level(self) -> usize {
        match self {
            BellLabel::PsiMinus | BellLabel::PsiPlus => 1,
            BellLabel::PhiMinus | BellLabel::PhiPlus => 2,
        }
    }

    /// Detector family matched to this state's three-level subsystem.
    pub fn family(self) -> DetectorFamily {
        match self {
            BellLabel::PsiMinus | BellLabel::PsiPlus => DetectorFamily::Psi,
            BellLabel::PhiMinus | BellLabel::PhiPlus => DetectorFamily::Phi,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PsiMinus => "psi-minus",
            BellLabel::PsiPlus => "psi-plus",
            BellLabel::PhiMinus => "phi-minus",
            BellLabel::PhiPlus => "phi-plus",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown Bell state '{s}'")))
    }
}

/// Ψ± = (|↑↓⟩ ± |↓↑⟩)/√2, Φ± = (|↑↑⟩ ± |↓↓⟩)/√2.
pub fn bell_state(label: BellLabel) -> PureState {
    let h = FRAC_1_SQRT_2;
    let a = match label {
        BellLabel::PsiMinus => [0.0, h, -h, 0.0],
        BellLabel::PsiPlus => [0.0, h, h, 0.0],
        BellLabel::PhiMinus => [h, 0.0, 0.0, -h],
        BellLabel::PhiPlus => [h, 0.0, 0.0, h],
    };
    PureState::new_unchecked(a.map(|x| C64::new(x, 0.0)))
}

/// Pulse program preparing `label`.
///
/// From `|start_level⟩` the program yields the Bell state up to a global
/// sign. With `include_pseudo_pure_step` a leading ESR π-pulse first turns
/// ρ_P into the pseudo-pure populations of the required three-level
/// subsystem (1↔3 for Ψ, 2↔4 for Φ).
pub fn bell_prep_program(label: BellLabel, include_pseudo_pure_step: bool) -> PulseProgram {
    let s = |j, k, b| PulseStep::new(Channel::S, j, k, b, 0.0).expect("ESR transition");
    let i = |b| PulseStep::new(Channel::I, 1, 2, b, 0.0).expect("NMR transition");
    let (esr, nmr_angle, esr_angle) = match label {
        BellLabel::PsiMinus => ((1, 3), FRAC_PI_2, -PI),
        BellLabel::PsiPlus => ((1, 3), FRAC_PI_2, PI),
        BellLabel::PhiPlus => ((2, 4), FRAC_PI_2, -PI),
        BellLabel::PhiMinus => ((2, 4), -FRAC_PI_2, -PI),
    };
    let mut steps = Vec::with_capacity(3);
    if include_pseudo_pure_step {
        steps.push(s(esr.0, esr.1, PI));
    }
    steps.push(i(nmr_angle));
    steps.push(s(esr.0, esr.1, esr_angle));
    PulseProgram::new(steps).with_label(format!("prepare {label}"))
}

/// Named initial ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// `|start⟩⟨start|` of the target's subsystem, no preparatory pulse.
    PseudoPure,
    /// ρ_P followed by the preparatory π-pulse.
    PseudoBoltzmann,
    /// ρ_B at the configured temperature, followed by the preparatory π-pulse.
    Boltzmann,
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudo-pure" => Ok(InitKind::PseudoPure),
            "pseudo-boltzmann" => Ok(InitKind::PseudoBoltzmann),
            "boltzmann" => Ok(InitKind::Boltzmann),
            other => Err(Error::domain(format!("unknown init '{other}'"))),
        }
    }
}

/// Initial density matrix and matching preparation program for `label`.
pub fn preparation(
    label: BellLabel,
    init: InitKind,
    config: &ExperimentConfig,
) -> Result<(DensityMatrix, PulseProgram)> {
    Ok(match init {
        InitKind::PseudoPure => (
            pseudo_pure(label.start_level())?,
            bell_prep_program(label, false),
        ),
        InitKind::PseudoBoltzmann => (pseudo_boltzmann(), bell_prep_program(label, true)),
        InitKind::Boltzmann => {
            let k = thermal_polarization(config, PolarizationMode::Linear)?;
            (boltzmann_density(k)?, bell_prep_program(label, true))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{selective_unitary, Channel};
    use crate::spin::{evolve, fidelity, standard_operator, trace_expectation, StandardOp};

    #[test]
    fn polarization_at_reference_conditions() {
        // μ_B·B_0/(k_B·T) at 338.7 mT, 40 K, evaluated by hand: 5.6878e-3.
        let k =
            thermal_polarization(&ExperimentConfig::default(), PolarizationMode::Linear).unwrap();
        assert!((k - 5.6878e-3).abs() < 5e-7, "{k}");
        let exact =
            thermal_polarization(&ExperimentConfig::default(), PolarizationMode::Exact).unwrap();
        assert!(exact < k && (k - exact) / k < 1e-4);

        let hot = ExperimentConfig {
            temperature: 1e12,
            ..Default::default()
        };
        assert!(thermal_polarization(&hot, PolarizationMode::Linear).unwrap() < 1e-12);

        let cold = ExperimentConfig {
            temperature: 1e-3,
            ..Default::default()
        };
        assert!(thermal_polarization(&cold, PolarizationMode::Linear).is_err());
        assert!(thermal_polarization(&cold, PolarizationMode::Exact).unwrap() <= 1.0);
    }

    #[test]
    fn exact_polarization_inverse() {
        let x = FRAC_1_SQRT_2.atanh();
        let t = 2.0 * BOHR_MAGNETON * 0.3387 / (2.0 * BOLTZMANN * x);
        let cfg = ExperimentConfig {
            temperature: t,
            ..Default::default()
        };
        let k = thermal_polarization(&cfg, PolarizationMode::Exact).unwrap();
        assert!((k - FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn boltzmann_family() {
        assert_eq!(
            boltzmann_density(0.0).unwrap(),
            DensityMatrix::maximally_mixed()
        );
        assert_eq!(boltzmann_density(1.0).unwrap(), pseudo_boltzmann());
        let p = boltzmann_density(0.005688).unwrap().populations();
        for (x, y) in p.iter().zip([0.248578, 0.248578, 0.251422, 0.251422]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(boltzmann_density(-0.1).is_err());
        assert!(boltzmann_density(1.1).is_err());
        for i in 0..=20 {
            let k = i as f64 / 20.0;
            let mix = pseudo_boltzmann()
                .mix(&DensityMatrix::maximally_mixed(), k)
                .unwrap();
            assert!(boltzmann_density(k).unwrap().max_abs_diff(&mix) < 1e-15);
        }
    }

    #[test]
    fn pseudo_boltzmann_properties() {
        let rho = pseudo_boltzmann();
        assert_eq!(rho.matrix().trace().re, 1.0);
        assert_eq!(rho.populations(), [0.0, 0.0, 0.5, 0.5]);
        let two_sz = standard_operator(StandardOp::Sz).scale(2.0);
        assert_eq!(trace_expectation(&rho, &two_sz), -1.0);
        rho.validate().unwrap();
    }

    #[test]
    fn pseudo_pure_states() {
        assert_eq!(pseudo_pure(1).unwrap().populations(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(pseudo_pure(2).unwrap().populations(), [0.0, 1.0, 0.0, 0.0]);
        assert!(pseudo_pure(5).is_err());
        let after = evolve(
            &pseudo_boltzmann(),
            &selective_unitary(Channel::S, 1, 3, PI, 0.0).unwrap(),
        );
        let p = after.populations();
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1].abs() < 1e-15 && p[2].abs() < 1e-15);
        assert!(
            after.max_abs_diff(&DensityMatrix::from_populations([0.5, 0.0, 0.0, 0.5]).unwrap())
                < 1e-15
        );
    }

    #[test]
    fn bell_basis_orthonormal() {
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let ip = bell_state(a).inner(&bell_state(b));
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
        let psi = bell_state(BellLabel::PsiMinus);
        assert_eq!(psi.amplitudes()[1].re, FRAC_1_SQRT_2);
        assert_eq!(psi.amplitudes()[2].re, -FRAC_1_SQRT_2);
    }

    #[test]
    fn preparation_from_pure_start() {
        let psi = basis_state(1)
            .unwrap()
            .evolve(&bell_prep_program(BellLabel::PsiMinus, false).compile());
        assert!(psi.max_abs_diff(&bell_state(BellLabel::PsiMinus)) < 1e-15);

        let phi = basis_state(2)
            .unwrap()
            .evolve(&bell_prep_program(BellLabel::PhiPlus, false).compile());
        let neg: [C64; 4] = bell_state(BellLabel::PhiPlus).amplitudes().map(|z| -z);
        assert!(phi.max_abs_diff(&PureState::new(neg).unwrap()) < 1e-15);

        for label in BellLabel::ALL {
            let rho = evolve(
                &pseudo_pure(label.start_level()).unwrap(),
                &bell_prep_program(label, false).compile(),
            );
            for other in BellLabel::ALL {
                let f = fidelity(&rho, &bell_state(other));
                let want = if other == label { 1.0 } else { 0.0 };
                assert!((f - want).abs() < 1e-12, "{label} vs {other}: {f}");
            }
        }
    }

    #[test]
    fn ensemble_preparation() {
        let rho = evolve(
            &pseudo_boltzmann(),
            &bell_prep_program(BellLabel::PsiMinus, true).compile(),
        );
        let expected = bell_state(BellLabel::PsiMinus)
            .projector()
            .mix(&pseudo_pure(4).unwrap(), 0.5)
            .unwrap();
        assert!(rho.max_abs_diff(&expected) < 1e-15);

        for i in 0..=10 {
            let k = i as f64 / 10.0;
            let out = evolve(
                &boltzmann_density(k).unwrap(),
                &bell_prep_program(BellLabel::PsiMinus, true).compile(),
            );
            let want = expected.mix(&DensityMatrix::maximally_mixed(), k).unwrap();
            assert!(out.max_abs_diff(&want) < 1e-12);
        }

        for label in BellLabel::ALL {
            let rho = evolve(
                &pseudo_boltzmann(),
                &bell_prep_program(label, true).compile(),
            );
            assert!(
                (fidelity(&rho, &bell_state(label)) - 0.5).abs() < 1e-12,
                "{label}"
            );
        }
    }

    #[test]
    fn label_parsing() {
        assert_eq!("phi-plus".parse::<BellLabel>().unwrap(), BellLabel::PhiPlus);
        assert!("phi".parse::<BellLabel>().is_err());
        assert_eq!(
            "boltzmann".parse::<InitKind>().unwrap(),
            InitKind::Boltzmann
        );
    }
}
