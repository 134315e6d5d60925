//! The four-level electron–nuclear spin pair.
//!
//! Levels are numbered 1..4 and map onto matrix indices `level - 1`:
//!
//! | level | \|m_S m_I⟩ | qubits |
//! |-------|-----------|--------|
//! | 1     | \|↑↑⟩      | \|00⟩   |
//! | 2     | \|↑↓⟩      | \|01⟩   |
//! | 3     | \|↓↑⟩      | \|10⟩   |
//! | 4     | \|↓↓⟩      | \|11⟩   |
//!
//! Every other module derives its basis ordering from this table.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigenvalues, Mat4, DIM};
use crate::numfmt::round_sig;
use crate::{Error, Result};

/// Absolute tolerance for Hermiticity, trace and normalization checks.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may have.
pub const PSD_TOL: f64 = 1e-10;

/// Quantum numbers attached to one of the four levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelInfo {
    pub level: usize,
    /// Electron projection m_S (±1/2).
    pub m_s: f64,
    /// Nuclear projection m_I (±1/2).
    pub m_i: f64,
    /// (electron bit, nuclear bit); ↑ ↔ 0, ↓ ↔ 1.
    pub qubits: (u8, u8),
}

pub fn level_info(level: usize) -> Result<LevelInfo> {
    check_level(level)?;
    let idx = level - 1;
    let (se, ni) = ((idx >> 1) as u8, (idx & 1) as u8);
    let m = |bit: u8| if bit == 0 { 0.5 } else { -0.5 };
    Ok(LevelInfo {
        level,
        m_s: m(se),
        m_i: m(ni),
        qubits: (se, ni),
    })
}

/// Level with the given electron and nuclear bits.
pub fn level_of(electron_bit: u8, nuclear_bit: u8) -> usize {
    1 + 2 * electron_bit as usize + nuclear_bit as usize
}

pub(crate) fn check_level(level: usize) -> Result<()> {
    if (1..=DIM).contains(&level) {
        Ok(())
    } else {
        Err(Error::domain(format!("level {level} outside 1..4")))
    }
}

/// Selection-rule class of a level pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionClass {
    /// Δm_S = ±1, Δm_I = 0.
    Esr,
    /// Δm_I = ±1, Δm_S = 0.
    Nmr,
    /// Double- or zero-quantum.
    Forbidden,
}

pub fn transition_class(j: usize, k: usize) -> Result<TransitionClass> {
    let (a, b) = (level_info(j)?, level_info(k)?);
    if j == k {
        return Err(Error::domain(format!("degenerate transition {j}<->{k}")));
    }
    let ds = a.qubits.0 != b.qubits.0;
    let di = a.qubits.1 != b.qubits.1;
    Ok(match (ds, di) {
        (true, false) => TransitionClass::Esr,
        (false, true) => TransitionClass::Nmr,
        _ => TransitionClass::Forbidden,
    })
}

/// Normalized state vector in level order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState([C64; DIM]);

impl PureState {
    pub fn new(amplitudes: [C64; DIM]) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::validation(format!("state norm² {n} differs from 1")));
        }
        Ok(PureState(amplitudes))
    }

    /// Builds a state from real amplitudes, normalizing them.
    pub fn from_real_unnormalized(amps: [f64; DIM]) -> Result<Self> {
        let n = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::domain("zero vector has no direction"));
        }
        Ok(PureState(amps.map(|x| C64::new(x / n, 0.0))))
    }

    pub(crate) fn new_unchecked(amplitudes: [C64; DIM]) -> Self {
        PureState(amplitudes)
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.0
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(Mat4::outer(&self.0, &self.0))
    }

    pub fn evolve(&self, u: &Unitary) -> PureState {
        PureState(u.matrix().apply(&self.0))
    }

    /// Equality up to a global phase: |⟨a|b⟩| = 1.
    pub fn equal_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        (self.inner(other).norm() - 1.0).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn basis_state(level: usize) -> Result<PureState> {
    check_level(level)?;
    let mut a = [C64::new(0.0, 0.0); DIM];
    a[level - 1] = C64::new(1.0, 0.0);
    Ok(PureState(a))
}

/// Unitary 4×4 matrix (pulse propagator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary(Mat4);

impl Unitary {
    /// Validates `U†U = 1` within [`STRUCTURE_TOL`].
    pub fn new(m: Mat4) -> Result<Self> {
        if !m.is_finite() || !m.is_unitary(STRUCTURE_TOL) {
            return Err(Error::validation("matrix is not unitary within 1e-12"));
        }
        Ok(Unitary(m))
    }

    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        Unitary(m)
    }

    pub fn identity() -> Self {
        Unitary(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary(self.0.adjoint())
    }

    /// `self` followed in time by `later`, i.e. `later · self`.
    pub fn then(&self, later: &Unitary) -> Self {
        Unitary(later.0 * self.0)
    }
}

impl std::ops::Mul for Unitary {
    type Output = Unitary;

    fn mul(self, rhs: Unitary) -> Unitary {
        Unitary(self.0 * rhs.0)
    }
}

/// Observable or generic operator on the spin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator {
    matrix: Mat4,
    hermitian: bool,
}

impl Operator {
    /// Builds a Hermitian operator, checking `O = O†`.
    pub fn hermitian(m: Mat4) -> Result<Self> {
        if !m.is_hermitian(STRUCTURE_TOL) {
            return Err(Error::validation("operator is not Hermitian within 1e-12"));
        }
        Ok(Operator {
            matrix: m,
            hermitian: true,
        })
    }

    pub fn general(m: Mat4) -> Self {
        Operator {
            matrix: m,
            hermitian: false,
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator {
            matrix: self.matrix.scale_real(s),
            hermitian: self.hermitian,
        }
    }

    pub fn eigenvalues(&self) -> Result<[f64; DIM]> {
        if !self.hermitian {
            return Err(Error::domain(
                "eigenvalues requested for a non-Hermitian operator",
            ));
        }
        Ok(hermitian_eigenvalues(&self.matrix))
    }
}

impl std::ops::Add for Operator {
    type Output = Operator;

    fn add(self, rhs: Operator) -> Operator {
        Operator {
            matrix: self.matrix + rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// Named spin operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardOp {
    Sz,
    Iz,
    SzIz,
    Identity,
}

impl FromStr for StandardOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Sz" => Ok(StandardOp::Sz),
            "Iz" => Ok(StandardOp::Iz),
            "SzIz" => Ok(StandardOp::SzIz),
            "identity" | "1" => Ok(StandardOp::Identity),
            other => Err(Error::domain(format!("unknown operator name '{other}'"))),
        }
    }
}

pub fn standard_operator(op: StandardOp) -> Operator {
    let diag = |f: &dyn Fn(&LevelInfo) -> f64| {
        let d: [f64; DIM] = std::array::from_fn(|i| f(&level_info(i + 1).expect("valid level")));
        Operator {
            matrix: Mat4::from_real_diagonal(d),
            hermitian: true,
        }
    };
    match op {
        StandardOp::Sz => diag(&|l| l.m_s),
        StandardOp::Iz => diag(&|l| l.m_i),
        StandardOp::SzIz => diag(&|l| l.m_s * l.m_i),
        StandardOp::Identity => diag(&|_| 1.0),
    }
}

/// Fictitious spin-1/2 z operator of the `j↔k` two-level subspace:
/// ½(|j⟩⟨j| − |k⟩⟨k|).
pub fn fictitious_z(j: usize, k: usize) -> Result<Operator> {
    check_level(j)?;
    check_level(k)?;
    if j >= k {
        return Err(Error::domain(format!(
            "fictitious spin needs j < k, got {j}, {k}"
        )));
    }
    let mut d = [0.0; DIM];
    d[j - 1] = 0.5;
    d[k - 1] = -0.5;
    Ok(Operator {
        matrix: Mat4::from_real_diagonal(d),
        hermitian: true,
    })
}

/// Hermitian, unit-trace, positive semidefinite 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        DensityMatrix(m)
    }

    pub fn from_populations(p: [f64; DIM]) -> Result<Self> {
        Self::new(Mat4::from_real_diagonal(p))
    }

    /// The maximally mixed state ¼·1.
    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity().scale_real(0.25))
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.0;
        if !m.is_finite() {
            return Err(Error::validation("density matrix has non-finite entries"));
        }
        if !m.is_hermitian(STRUCTURE_TOL) {
            return Err(Error::validation(
                "density matrix is not Hermitian within 1e-12",
            ));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(Error::validation(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = self.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::validation(format!(
                "density matrix has eigenvalue {min} < 0"
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn populations(&self) -> [f64; DIM] {
        self.0.diagonal().map(|z| z.re)
    }

    pub fn eigenvalues(&self) -> [f64; DIM] {
        hermitian_eigenvalues(&self.0)
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::domain(format!("mixing weight {w} outside [0, 1]")));
        }
        Ok(DensityMatrix(
            self.0.scale_real(w) + other.0.scale_real(1.0 - w),
        ))
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

/// `UρU†`.
pub fn evolve(rho: &DensityMatrix, u: &Unitary) -> DensityMatrix {
    let m = u.0 * rho.0 * u.0.adjoint();
    DensityMatrix(m)
}

/// `tr(Oρ)`; the imaginary part is discarded.
pub fn trace_expectation(rho: &DensityMatrix, op: &Operator) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..DIM {
        for k in 0..DIM {
            s += op.matrix.0[i][k] * rho.0 .0[k][i];
        }
    }
    s.re
}

/// ⟨ψ|ρ|ψ⟩ clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> f64 {
    let v = rho.0.apply(&psi.0);
    let f: C64 = psi.0.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    f.re.clamp(0.0, 1.0)
}

/// JSON form of a 4×4 matrix: row-major `[re, im]` pairs rounded to 12
/// significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub basis: String,
    pub entries: Vec<Vec<[f64; 2]>>,
}

pub const BASIS_TAG: &str = "level-1..4";

impl MatrixJson {
    pub fn from_matrix(m: &Mat4) -> Self {
        let entries =
            m.0.iter()
                .map(|row| {
                    row.iter()
                        .map(|z| [round_json(z.re), round_json(z.im)])
                        .collect()
                })
                .collect();
        MatrixJson {
            basis: BASIS_TAG.to_string(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<Mat4> {
        if self.basis != BASIS_TAG {
            return Err(Error::validation(format!(
                "unsupported basis '{}'",
                self.basis
            )));
        }
        if self.entries.len() != DIM || self.entries.iter().any(|r| r.len() != DIM) {
            return Err(Error::validation("matrix JSON must be 4×4"));
        }
        let mut m = Mat4::zeros();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                m.0[i][j] = C64::new(*re, *im);
            }
        }
        Ok(m)
    }
}

fn round_json(x: f64) -> f64 {
    // Avoid emitting "-0.0".
    let r = round_sig(x, 12);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = j.to_matrix().map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    #[serde(flatten)]
    matrix: MatrixJson,
    hermitian: bool,
}

impl Serialize for Operator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson {
            matrix: MatrixJson::from_matrix(&self.matrix),
            hermitian: self.hermitian,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = OperatorJson::deserialize(d)?;
        let m = j.matrix.to_matrix().map_err(serde::de::Error::custom)?;
        if j.hermitian {
            Operator::hermitian(m).map_err(serde::de::Error::custom)
        } else {
            Ok(Operator::general(m))
        }
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 .0 {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "{}", cells.join("  "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_map_bijection() {
        let expect = [(0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5)];
        for (i, (ms, mi)) in expect.iter().enumerate() {
            let l = level_info(i + 1).unwrap();
            assert_eq!((l.m_s, l.m_i), (*ms, *mi));
            assert_eq!(level_of(l.qubits.0, l.qubits.1), i + 1);
        }
        assert!(level_info(0).is_err());
        assert!(level_info(5).is_err());
    }

    #[test]
    fn transition_classes_partition_pairs() {
        use TransitionClass::*;
        let mut seen = Vec::new();
        for j in 1..=4 {
            for k in j + 1..=4 {
                seen.push(((j, k), transition_class(j, k).unwrap()));
            }
        }
        let of = |c| {
            seen.iter()
                .filter(|(_, x)| *x == c)
                .map(|(p, _)| *p)
                .collect::<Vec<_>>()
        };
        assert_eq!(of(Esr), vec![(1, 3), (2, 4)]);
        assert_eq!(of(Nmr), vec![(1, 2), (3, 4)]);
        assert_eq!(of(Forbidden), vec![(1, 4), (2, 3)]);
        assert!(transition_class(2, 2).is_err());
    }

    #[test]
    fn basis_states() {
        let one = basis_state(1).unwrap();
        assert_eq!(one.amplitudes()[0], C64::new(1.0, 0.0));
        let four = basis_state(4).unwrap();
        assert_eq!(four.amplitudes()[3], C64::new(1.0, 0.0));
        let l3 = level_info(3).unwrap();
        assert_eq!((l3.m_s, l3.m_i), (-0.5, 0.5));
        for a in 1..=4 {
            for b in 1..=4 {
                let ip = basis_state(a).unwrap().inner(&basis_state(b).unwrap());
                assert_eq!(ip.re, if a == b { 1.0 } else { 0.0 });
            }
        }
        assert!(basis_state(0).is_err());
    }

    #[test]
    fn standard_operators() {
        let sz = standard_operator(StandardOp::Sz);
        assert_eq!(
            *sz.matrix(),
            Mat4::from_real_diagonal([0.5, 0.5, -0.5, -0.5])
        );
        let iz = standard_operator(StandardOp::Iz);
        assert_eq!(
            *iz.matrix(),
            Mat4::from_real_diagonal([0.5, -0.5, 0.5, -0.5])
        );
        let sziz = standard_operator(StandardOp::SzIz);
        assert_eq!(
            *sziz.matrix(),
            Mat4::from_real_diagonal([0.25, -0.25, -0.25, 0.25])
        );

        let id = standard_operator(StandardOp::Identity);
        let rho00 = id.scale(0.25) + sz.scale(0.5) + iz.scale(0.5) + sziz;
        assert_eq!(
            *rho00.matrix(),
            Mat4::from_real_diagonal([1.0, 0.0, 0.0, 0.0])
        );
        let rho_p = id.scale(0.25) + sz.scale(-0.5);
        assert_eq!(
            *rho_p.matrix(),
            Mat4::from_real_diagonal([0.0, 0.0, 0.5, 0.5])
        );

        assert!("Sx".parse::<StandardOp>().is_err());
        assert_eq!("SzIz".parse::<StandardOp>().unwrap(), StandardOp::SzIz);
    }

    #[test]
    fn fictitious_operators() {
        let d = |j, k| *fictitious_z(j, k).unwrap().matrix();
        assert_eq!(d(1, 3), Mat4::from_real_diagonal([0.5, 0.0, -0.5, 0.0]));
        assert_eq!(d(2, 4), Mat4::from_real_diagonal([0.0, 0.5, 0.0, -0.5]));
        assert_eq!(d(1, 2), Mat4::from_real_diagonal([0.5, -0.5, 0.0, 0.0]));
        assert!(fictitious_z(2, 2).is_err());
        assert!(fictitious_z(0, 3).is_err());
        assert!(fictitious_z(1, 5).is_err());
    }

    #[test]
    fn expectations_and_fidelity() {
        let obs = fictitious_z(1, 3).unwrap().scale(2.0);
        let rho00 = basis_state(1).unwrap().projector();
        assert_eq!(trace_expectation(&rho00, &obs), 1.0);
        let rho3 = basis_state(3).unwrap().projector();
        assert_eq!(trace_expectation(&rho3, &obs), -1.0);
        let mixed = DensityMatrix::maximally_mixed();
        for (j, k) in [(1, 2), (1, 3), (2, 4), (3, 4), (1, 4)] {
            assert_eq!(trace_expectation(&mixed, &fictitious_z(j, k).unwrap()), 0.0);
        }

        let h = 1.0 / 2f64.sqrt();
        let psi = PureState::new([0.0, h, -h, 0.0].map(|x| C64::new(x, 0.0))).unwrap();
        assert!((fidelity(&psi.projector(), &psi) - 1.0).abs() < 1e-15);
        assert!((fidelity(&mixed, &psi) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn density_validation_rejects_bad_input() {
        assert!(DensityMatrix::from_populations([0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(DensityMatrix::from_populations([0.6, 0.5, 0.0, 0.0]).is_err());
        assert!(DensityMatrix::from_populations([1.2, -0.2, 0.0, 0.0]).is_err());
        let mut m = Mat4::from_real_diagonal([0.5, 0.5, 0.0, 0.0]);
        m.0[0][1] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn evolve_identity_and_swap() {
        let rho = DensityMatrix::from_populations([0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(evolve(&rho, &Unitary::identity()), rho);
        assert!(Unitary::new(Mat4::identity().scale_real(2.0)).is_err());
    }

    #[test]
    fn json_shape() {
        let rho = DensityMatrix::from_populations([1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0]).unwrap();
        let v = serde_json::to_value(rho).unwrap();
        assert_eq!(v["basis"], "level-1..4");
        assert_eq!(v["entries"][0][0][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["entries"][1][1][0].as_f64().unwrap(), 0.666666666667);
        let back: DensityMatrix = serde_json::from_value(v).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-12);

        let op = fictitious_z(1, 3).unwrap();
        let s = serde_json::to_string(&op).unwrap();
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
    }
}
