//! Random-instance generators shared by the property suites and the
//! acceptance gate (`endor-verify` includes this file).

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use endor_core::parser::{DocStep, InitDirective, Measure, ProgramDocument};
use endor_core::prep::{boltzmann_density, pseudo_boltzmann, pseudo_pure};
use endor_core::pulse::{Channel, PulseProgram, PulseStep};
use endor_core::spin::{DensityMatrix, PureState};
use endor_core::C64;
use proptest::prelude::*;

pub const TRANSITIONS: [(Channel, usize, usize); 4] = [
    (Channel::S, 1, 3),
    (Channel::S, 2, 4),
    (Channel::I, 1, 2),
    (Channel::I, 3, 4),
];

pub fn step() -> impl Strategy<Value = PulseStep> {
    (0..4usize, -TAU..=TAU, -PI..PI).prop_map(|(t, beta, phi)| {
        let (c, j, k) = TRANSITIONS[t];
        PulseStep::new(c, j, k, beta, phi).unwrap()
    })
}

pub fn program() -> impl Strategy<Value = PulseProgram> {
    prop::collection::vec(step(), 0..12).prop_map(PulseProgram::new)
}

pub fn pure_state() -> impl Strategy<Value = PureState> {
    prop::array::uniform4((-1.0..1.0f64, -1.0..1.0f64))
        .prop_filter("non-zero", |a| {
            a.iter().map(|(r, i)| r * r + i * i).sum::<f64>() > 1e-3
        })
        .prop_map(|a| {
            let norm = a.iter().map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
            PureState::new(a.map(|(r, i)| C64::new(r / norm, i / norm))).unwrap()
        })
}

pub fn mixed_state() -> impl Strategy<Value = DensityMatrix> {
    (pure_state(), pure_state(), 0.0..=1.0f64)
        .prop_map(|(a, b, w)| a.projector().mix(&b.projector(), w).unwrap())
}

pub fn initial_state() -> impl Strategy<Value = DensityMatrix> {
    prop_oneof![
        (1..=4usize).prop_map(|l| pseudo_pure(l).unwrap()),
        Just(pseudo_boltzmann()),
        (0.0..=1.0f64).prop_map(|k| boltzmann_density(k).unwrap()),
        mixed_state(),
    ]
}

pub fn doc_step() -> impl Strategy<Value = DocStep> {
    (0..4usize, -3600..=3600i32, -17999..=18000i32, any::<bool>()).prop_map(|(t, a, p, phased)| {
        let (channel, j, k) = TRANSITIONS[t];
        DocStep {
            channel,
            j,
            k,
            angle_deg: a as f64 / 10.0,
            phase_deg: if phased { p as f64 / 100.0 } else { 0.0 },
        }
    })
}

/// Documents whose numbers survive 6-significant-digit formatting.
pub fn document() -> impl Strategy<Value = ProgramDocument> {
    let init = prop_oneof![
        Just(None),
        (1..=4usize).prop_map(|l| Some(InitDirective::PseudoPure(l))),
        (1..=4usize).prop_map(|l| Some(InitDirective::Pure(l))),
        Just(Some(InitDirective::PseudoBoltzmann)),
        (100..=40000u32, 1000..=10000u32).prop_map(|(t, b)| Some(InitDirective::Boltzmann {
            temperature: t as f64 / 100.0,
            field_mt: b as f64 / 10.0
        })),
    ];
    let measure = prop_oneof![
        Just(None),
        (0..4usize).prop_map(|t| {
            let (channel, j, k) = TRANSITIONS[t];
            Some(Measure { channel, j, k })
        }),
    ];
    (init, prop::collection::vec(doc_step(), 0..10), measure).prop_map(|(init, steps, measure)| {
        ProgramDocument {
            init,
            steps,
            measure,
            lines: Vec::new(),
        }
    })
}
