//! Transition-selective pulses, z-rotations and pulse programs.
//!
//! A selective pulse `P^{jk}_c(β, φ)` acts as a rotation on the two-level
//! subspace `{|j⟩, |k⟩}` and as identity elsewhere:
//!
//! ```text
//! |j⟩ →  cos(β/2)|j⟩ + e^{-iφ} sin(β/2)|k⟩
//! |k⟩ → −e^{+iφ} sin(β/2)|j⟩ + cos(β/2)|k⟩
//! ```
//!
//! With this convention a phase shift is a conjugation by a z-rotation of
//! the same transition: `P(β, φ) = Z(−φ) P(β, 0) Z(φ)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::config::ExperimentConfig;
use crate::linalg::Mat4;
use crate::spin::{
    check_level, fictitious_z, standard_operator, transition_class, StandardOp, TransitionClass,
    Unitary,
};
use crate::{Error, Result};

/// Which spin a pulse drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Electron (microwave, ESR).
    S,
    /// Nucleus (radio frequency, NMR).
    I,
}

impl Channel {
    fn allowed_class(self) -> TransitionClass {
        match self {
            Channel::S => TransitionClass::Esr,
            Channel::I => TransitionClass::Nmr,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Channel::S => 'S',
            Channel::I => 'I',
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" => Ok(Channel::S),
            "I" => Ok(Channel::I),
            other => Err(Error::domain(format!(
                "unknown channel '{other}', expected S or I"
            ))),
        }
    }
}

/// An ordered level pair `j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    j: usize,
    k: usize,
}

impl Transition {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        check_level(j)?;
        check_level(k)?;
        if j >= k {
            return Err(Error::domain(format!(
                "transition needs j < k, got {j}<->{k}"
            )));
        }
        Ok(Transition { j, k })
    }

    /// Checks that `channel` may drive `j↔k`.
    pub fn for_channel(channel: Channel, j: usize, k: usize) -> Result<Self> {
        let t = Transition::new(j, k)?;
        if transition_class(j, k)? != channel.allowed_class() {
            return Err(Error::Transition {
                channel: channel.as_char(),
                j,
                k,
            });
        }
        Ok(t)
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.j, self.k)
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<->{}", self.j, self.k)
    }
}

/// Wraps an angle into (−π, π].
pub fn normalize_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// One selective pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseStep {
    channel: Channel,
    transition: Transition,
    flip_angle: f64,
    phase: f64,
}

impl PulseStep {
    /// Validates the channel/transition pairing and `β ∈ [−2π, 2π]`; the
    /// phase is wrapped into (−π, π].
    pub fn new(channel: Channel, j: usize, k: usize, flip_angle: f64, phase: f64) -> Result<Self> {
        let transition = Transition::for_channel(channel, j, k)?;
        check_flip_angle(flip_angle)?;
        if !phase.is_finite() {
            return Err(Error::domain(format!("phase {phase} is not finite")));
        }
        Ok(PulseStep {
            channel,
            transition,
            flip_angle,
            phase: normalize_phase(phase),
        })
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn transition(&self) -> Transition {
        self.transition
    }

    pub fn flip_angle(&self) -> f64 {
        self.flip_angle
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn with_flip_angle(&self, flip_angle: f64) -> Result<Self> {
        check_flip_angle(flip_angle)?;
        Ok(PulseStep {
            flip_angle,
            ..*self
        })
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        PulseStep {
            phase: normalize_phase(phase),
            ..*self
        }
    }

    pub fn unitary(&self) -> Unitary {
        let (j, k) = self.transition.levels();
        rotation(j, k, self.flip_angle, self.phase)
    }
}

fn check_flip_angle(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta.abs() <= 2.0 * PI) {
        return Err(Error::domain(format!(
            "flip angle {beta} outside [-2π, 2π]"
        )));
    }
    Ok(())
}

fn rotation(j: usize, k: usize, beta: f64, phi: f64) -> Unitary {
    let (a, b) = (j - 1, k - 1);
    let (s, c) = (beta / 2.0).sin_cos();
    let mut m = Mat4::identity();
    m.0[a][a] = C64::new(c, 0.0);
    m.0[b][b] = C64::new(c, 0.0);
    m.0[b][a] = C64::from_polar(s, -phi);
    m.0[a][b] = -C64::from_polar(s, phi);
    Unitary::new_unchecked(m)
}

/// Unitary of a selective pulse on `j↔k`.
pub fn selective_unitary(
    channel: Channel,
    j: usize,
    k: usize,
    beta: f64,
    phi: f64,
) -> Result<Unitary> {
    PulseStep::new(channel, j, k, beta, phi).map(|s| s.unitary())
}

/// Axis of a z-rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZTarget {
    S,
    I,
    Transition(Transition),
}

/// `exp(−i·angle·G)` for the generator G = Sz, Iz or a fictitious Sz^{jk}.
pub fn z_rotation(target: ZTarget, angle: f64) -> Unitary {
    let generator = match target {
        ZTarget::S => standard_operator(StandardOp::Sz),
        ZTarget::I => standard_operator(StandardOp::Iz),
        ZTarget::Transition(t) => {
            let (j, k) = t.levels();
            fictitious_z(j, k).expect("validated transition")
        }
    };
    let d = generator
        .matrix()
        .diagonal()
        .map(|g| C64::from_polar(1.0, -angle * g.re));
    Unitary::new_unchecked(Mat4::from_diagonal(d))
}

/// Raw step description used to build a program with indexed diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSpec {
    pub channel: Channel,
    pub j: usize,
    pub k: usize,
    pub flip_angle: f64,
    pub phase: f64,
}

/// Time-ordered list of pulses; the first step acts first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseProgram {
    steps: Vec<PulseStep>,
    label: Option<String>,
}

impl PulseProgram {
    pub fn new(steps: Vec<PulseStep>) -> Self {
        PulseProgram { steps, label: None }
    }

    /// Builds every step, reporting the first invalid one by index.
    pub fn try_from_specs(specs: &[StepSpec]) -> Result<Self> {
        let steps = specs
            .iter()
            .enumerate()
            .map(|(index, s)| {
                PulseStep::new(s.channel, s.j, s.k, s.flip_angle, s.phase).map_err(|e| {
                    Error::Step {
                        index,
                        source: Box::new(e),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PulseProgram::new(steps))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn steps(&self) -> &[PulseStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn push(&mut self, step: PulseStep) {
        self.steps.push(step);
    }

    /// `self` followed by `later`.
    pub fn concat(&self, later: &PulseProgram) -> PulseProgram {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&later.steps);
        PulseProgram {
            steps,
            label: self.label.clone(),
        }
    }

    /// Net propagator `U_n ··· U_2 U_1`.
    pub fn compile(&self) -> Unitary {
        self.steps
            .iter()
            .fold(Unitary::identity(), |acc, s| acc.then(&s.unitary()))
    }

    /// Total pulse time in ns; each step costs `t_π(channel)·|β|/π`.
    pub fn duration_ns(&self, config: &ExperimentConfig) -> Result<f64> {
        self.steps.iter().try_fold(0.0, |acc, s| {
            let t_pi = match s.channel {
                Channel::S => config.esr_pi_duration,
                Channel::I => config.nmr_pi_duration,
            }
            .ok_or_else(|| {
                Error::Config(format!(
                    "no π-pulse duration configured for channel {}",
                    s.channel
                ))
            })?;
            Ok(acc + t_pi * s.flip_angle.abs() / PI)
        })
    }
}

pub fn compile(program: &PulseProgram) -> Unitary {
    program.compile()
}

pub fn program_duration(program: &PulseProgram, config: &ExperimentConfig) -> Result<f64> {
    program.duration_ns(config)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::spin::{basis_state, evolve, DensityMatrix, PureState};

    fn step(c: Channel, j: usize, k: usize, b: f64, p: f64) -> PulseStep {
        PulseStep::new(c, j, k, b, p).unwrap()
    }

    fn real_state(a: [f64; 4]) -> PureState {
        PureState::from_real_unnormalized(a).unwrap()
    }

    #[test]
    fn entangling_arrows() {
        let up_up = basis_state(1).unwrap();
        let after_nmr = up_up.evolve(&step(Channel::I, 1, 2, FRAC_PI_2, 0.0).unitary());
        assert!(after_nmr.max_abs_diff(&real_state([1.0, 1.0, 0.0, 0.0])) < 1e-15);
        let after_esr = after_nmr.evolve(&step(Channel::S, 1, 3, -PI, 0.0).unitary());
        assert!(after_esr.max_abs_diff(&real_state([0.0, 1.0, -1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn detector_pair_population_law() {
        // Frozen from a symbolic 4×4 product: p1 = ½(1 − cos(φ1 − φ2)).
        let singlet = real_state([0.0, 1.0, -1.0, 0.0]);
        for &(p1, p2) in &[(0.0, 0.0), (0.7, -0.4), (PI, 0.0), (2.0, 2.0), (-1.3, 2.9)] {
            let s = singlet
                .evolve(&step(Channel::S, 1, 3, -PI, p1).unitary())
                .evolve(&step(Channel::I, 1, 2, -FRAC_PI_2, p2).unitary());
            let pop1 = s.amplitudes()[0].norm_sqr();
            assert!((pop1 - 0.5 * (1.0 - (p1 - p2).cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn forbidden_transitions_rejected() {
        assert!(matches!(
            selective_unitary(Channel::S, 1, 2, PI, 0.0),
            Err(Error::Transition {
                channel: 'S',
                j: 1,
                k: 2
            })
        ));
        assert!(selective_unitary(Channel::I, 1, 3, PI, 0.0).is_err());
        for c in [Channel::S, Channel::I] {
            assert!(selective_unitary(c, 1, 4, PI, 0.0).is_err());
            assert!(selective_unitary(c, 2, 3, PI, 0.0).is_err());
        }
        assert!(selective_unitary(Channel::S, 3, 1, PI, 0.0).is_err());
        assert!(selective_unitary(Channel::S, 1, 3, 7.0, 0.0).is_err());
    }

    #[test]
    fn z_rotation_phases() {
        let (p1, p2) = (0.37, -1.21);
        let u = z_rotation(ZTarget::I, p2).then(&z_rotation(ZTarget::S, p1));
        for level in 1..=4 {
            let info = crate::spin::level_info(level).unwrap();
            let got = u.matrix().get(level - 1, level - 1);
            let want = C64::from_polar(1.0, -(p1 * info.m_s + p2 * info.m_i));
            assert!((got - want).norm() < 1e-15);
        }
        assert_eq!(*z_rotation(ZTarget::S, 0.0).matrix(), Mat4::identity());
        let full = z_rotation(ZTarget::S, 2.0 * PI);
        assert!(
            full.matrix()
                .max_abs_diff(&Mat4::identity().scale_real(-1.0))
                < 1e-15
        );
    }

    #[test]
    fn phase_shift_is_z_conjugation() {
        for (c, j, k) in [
            (Channel::S, 1, 3),
            (Channel::S, 2, 4),
            (Channel::I, 1, 2),
            (Channel::I, 3, 4),
        ] {
            let t = ZTarget::Transition(Transition::new(j, k).unwrap());
            for bi in -8..=8 {
                let beta = bi as f64 * PI / 4.0;
                for pi in 0..12 {
                    let phi = -PI + pi as f64 * PI / 6.0 + 0.1;
                    let lhs = selective_unitary(c, j, k, beta, phi).unwrap();
                    let rhs = z_rotation(t, phi)
                        .then(&selective_unitary(c, j, k, beta, 0.0).unwrap())
                        .then(&z_rotation(t, -phi));
                    assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_and_period() {
        let u = selective_unitary(Channel::I, 3, 4, 1.1, 0.4).unwrap();
        let v = selective_unitary(Channel::I, 3, 4, -1.1, 0.4).unwrap();
        assert!((u * v).matrix().max_abs_diff(&Mat4::identity()) < 1e-15);

        let a = rotation(1, 3, 0.9, -0.2);
        let b = rotation(1, 3, 0.9 + 4.0 * PI, -0.2);
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-14);
        // β + 2π negates the driven 2×2 block only.
        let c = rotation(1, 3, 0.9 + 2.0 * PI, -0.2);
        let block_sign = Mat4::from_real_diagonal([-1.0, 1.0, -1.0, 1.0]);
        assert!(a.matrix().max_abs_diff(&(*c.matrix() * block_sign)) < 1e-14);
        let rho = DensityMatrix::from_populations([0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(evolve(&rho, &a).max_abs_diff(&evolve(&rho, &c)) < 1e-14);
        // Coherence between the block and level 2 picks up the sign.
        let coherent = PureState::from_real_unnormalized([1.0, 1.0, 0.0, 0.0])
            .unwrap()
            .projector();
        assert!(evolve(&coherent, &a).max_abs_diff(&evolve(&coherent, &c)) > 0.1);
    }

    #[test]
    fn compile_and_errors() {
        assert_eq!(PulseProgram::default().compile(), Unitary::identity());
        let err = PulseProgram::try_from_specs(&[
            StepSpec {
                channel: Channel::I,
                j: 1,
                k: 2,
                flip_angle: FRAC_PI_2,
                phase: 0.0,
            },
            StepSpec {
                channel: Channel::S,
                j: 1,
                k: 2,
                flip_angle: PI,
                phase: 0.0,
            },
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Step { index: 1, .. }));
    }

    #[test]
    fn durations() {
        let cfg = ExperimentConfig::default();
        let prog = PulseProgram::new(vec![
            step(Channel::I, 1, 2, FRAC_PI_2, 0.0),
            step(Channel::S, 1, 3, -PI, 0.0),
        ]);
        assert_eq!(prog.duration_ns(&cfg).unwrap(), 832.0);
        assert_eq!(PulseProgram::default().duration_ns(&cfg).unwrap(), 0.0);
        let esr = PulseProgram::new(vec![step(Channel::S, 1, 3, PI, 0.3)]);
        assert_eq!(esr.duration_ns(&cfg).unwrap(), 32.0);

        let missing = ExperimentConfig {
            nmr_pi_duration: None,
            ..Default::default()
        };
        assert!(matches!(prog.duration_ns(&missing), Err(Error::Config(_))));
        assert_eq!(esr.duration_ns(&missing).unwrap(), 32.0);
    }

    #[test]
    fn phase_normalization() {
        assert_eq!(normalize_phase(PI), PI);
        assert!((normalize_phase(-PI) - PI).abs() < 1e-15);
        assert!((normalize_phase(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(step(Channel::S, 1, 3, PI, 2.0 * PI).phase(), 0.0);
    }
}
