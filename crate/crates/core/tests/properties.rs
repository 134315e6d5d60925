use std::f64::consts::PI;

use endor_core::entanglement::{negativity, partial_transpose, thermal_singlet, Subsystem};
use endor_core::parser::{format, parse};
use endor_core::pulse::{selective_unitary, z_rotation, Channel, ZTarget};
use endor_core::spectral::dft_magnitude;
use endor_core::spin::{
    evolve, standard_operator, trace_expectation, DensityMatrix, Operator, PureState, StandardOp,
    Unitary,
};
use endor_core::tomography::Interferogram;
use endor_core::C64;
use proptest::prelude::*;

mod common;
use common::*;

fn hermitian_op() -> impl Strategy<Value = Operator> {
    (0..4usize, pure_state(), -2.0..2.0f64).prop_map(|(a, psi, s)| {
        let ops = [
            StandardOp::Sz,
            StandardOp::Iz,
            StandardOp::SzIz,
            StandardOp::Identity,
        ];
        standard_operator(ops[a])
            + Operator::hermitian(*psi.projector().matrix())
                .unwrap()
                .scale(s)
    })
}

/// Product of single-spin rotations built from paired selective pulses.
fn local_unitary() -> impl Strategy<Value = Unitary> {
    prop::array::uniform4((-PI..PI, -PI..PI)).prop_map(|a| {
        let electron = |b: f64, p: f64| {
            selective_unitary(Channel::S, 1, 3, b, p)
                .unwrap()
                .then(&selective_unitary(Channel::S, 2, 4, b, p).unwrap())
        };
        let nucleus = |b: f64, p: f64| {
            selective_unitary(Channel::I, 1, 2, b, p)
                .unwrap()
                .then(&selective_unitary(Channel::I, 3, 4, b, p).unwrap())
        };
        electron(a[0].0, a[0].1)
            .then(&nucleus(a[1].0, a[1].1))
            .then(&z_rotation(ZTarget::S, a[2].0))
            .then(&z_rotation(ZTarget::I, a[2].1))
            .then(&electron(a[3].0, a[3].1))
    })
}

fn qubit() -> impl Strategy<Value = [C64; 2]> {
    (0.0..PI, -PI..PI).prop_map(|(theta, phi)| {
        [
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ]
    })
}

fn product_state() -> impl Strategy<Value = DensityMatrix> {
    (qubit(), qubit()).prop_map(|(e, n)| {
        let amps = [e[0] * n[0], e[0] * n[1], e[1] * n[0], e[1] * n[1]];
        PureState::new(amps).unwrap().projector()
    })
}

fn separable_mixture() -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((product_state(), 0.01..1.0f64), 1..6).prop_map(|parts| {
        let mut acc = parts[0].0;
        let mut total = parts[0].1;
        for (rho, w) in &parts[1..] {
            total += w;
            acc = acc.mix(rho, 1.0 - w / total).unwrap();
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compiled_programs_are_unitary(prog in program()) {
        prop_assert!(prog.compile().matrix().is_unitary(1e-12));
    }

    #[test]
    fn evolution_preserves_density_structure(prog in program(), rho in initial_state()) {
        let out = evolve(&rho, &prog.compile());
        prop_assert!(out.matrix().is_hermitian(1e-12));
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.validate().is_ok());
        let (a, b) = (rho.eigenvalues(), out.eigenvalues());
        for i in 0..4 {
            prop_assert!((a[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn parser_round_trip(doc in document()) {
        let text = format(&doc);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(format(&back), text);
    }

    #[test]
    fn parser_ignores_comments_and_spacing(doc in document(), pad in 1..4usize) {
        let spaced: String = format(&doc)
            .lines()
            .map(|l| format!("{}{}   # note\n\n", " ".repeat(pad), l.replace(' ', &" ".repeat(pad))))
            .collect();
        prop_assert_eq!(parse(&spaced).unwrap(), doc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parseval_identity(samples in prop::collection::vec(-1.0..1.0f64, 2..300), dt in 1e-9..1e-6f64) {
        let ig = Interferogram::from_samples(samples.clone(), dt).unwrap();
        let energy: f64 = samples.iter().map(|x| x * x).sum();
        let spec = dft_magnitude(&ig, false);
        prop_assert!((spec.two_sided_energy() - energy).abs() <= 1e-9 * energy.max(1e-300));
    }

    #[test]
    fn expectation_is_linear(rho in mixed_state(), a in hermitian_op(), b in hermitian_op(), x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let combined = a.scale(x) + b.scale(y);
        let lhs = trace_expectation(&rho, &combined);
        let rhs = x * trace_expectation(&rho, &a) + y * trace_expectation(&rho, &b);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn negativity_invariant_under_local_unitaries(rho in mixed_state(), u in local_unitary()) {
        let rotated = evolve(&rho, &u);
        prop_assert!((negativity(&rho) - negativity(&rotated)).abs() < 1e-10);
    }

    #[test]
    fn separable_mixtures_have_zero_negativity(rho in separable_mixture()) {
        prop_assert!(negativity(&rho) < 1e-10);
    }

    #[test]
    fn partial_transpose_keeps_trace_and_hermiticity(rho in mixed_state()) {
        for sub in [Subsystem::Electron, Subsystem::Nucleus] {
            let pt = partial_transpose(&rho, sub);
            prop_assert!(pt.matrix().is_hermitian(0.0));
            prop_assert_eq!(pt.matrix().trace(), rho.matrix().trace());
        }
        let e = partial_transpose(&rho, Subsystem::Electron).eigenvalues().unwrap();
        let n = partial_transpose(&rho, Subsystem::Nucleus).eigenvalues().unwrap();
        for i in 0..4 {
            prop_assert!((e[i] - n[i]).abs() < 1e-10);
        }
    }
}

#[test]
fn thermal_negativity_non_increasing_in_temperature() {
    let nu = 95e9;
    let mut last = f64::INFINITY;
    for i in 0..200 {
        let t = 0.05 * 1.03f64.powi(i);
        let n = negativity(&thermal_singlet(nu, t).unwrap());
        assert!(n <= last + 1e-12, "T = {t}: {n} > {last}");
        last = n;
    }
    assert_eq!(last, 0.0);
}
