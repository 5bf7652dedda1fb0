//! CHSH values of two-qubit states, the two-qubit symmetric-extension
//! criterion, and CHSH monogamy on three qubits.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{determinant, hermitian_eigenvalues, partial_trace, tensor, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::sampling::{restart_seed, stream_rng};
use crate::tolerance;

pub const DEFAULT_CHSH_RESTARTS: usize = 16;

/// `sigma_x`, `sigma_y`, `sigma_z`.
pub fn paulis() -> [ComplexMatrix; 3] {
    let i = C64::new(0.0, 1.0);
    [
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap(),
        ComplexMatrix::from_rows(&[vec![ZERO, -i], vec![i, ZERO]]).unwrap(),
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0]),
    ]
}

fn require_qubit_pair(rho: &DensityMatrix) -> Result<()> {
    if rho.subsystem_dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "expected a two-qubit state (dims [2, 2]), got {:?}",
            rho.subsystem_dims()
        )));
    }
    Ok(())
}

/// `t[i][j] = tr(rho sigma_i ⊗ sigma_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationTensor(pub [[f64; 3]; 3]);

impl CorrelationTensor {
    /// Eigenvalues of `U = T^T T`, descending.
    pub fn u_eigenvalues(&self) -> Result<[f64; 3]> {
        let t = &self.0;
        let mut u = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| t[k][i] * t[k][j]).sum();
                u[(i, j)] = C64::new(s, 0.0);
            }
        }
        let ev = hermitian_eigenvalues(&u)?;
        Ok([ev[2], ev[1], ev[0]])
    }
}

pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    require_qubit_pair(rho)?;
    let s = paulis();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            t[i][j] = rho.expectation(&tensor(si, sj))?.re;
        }
    }
    Ok(CorrelationTensor(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReport {
    pub value: f64,
    /// `value > 2`, with no guard band.
    pub violates: bool,
    /// Eigenvalues of `T^T T`, descending.
    pub eigenvalues_u: [f64; 3],
}

impl ChshReport {
    pub fn violates_with(&self, eps: f64) -> bool {
        self.value > 2.0 + eps
    }
}

/// Closed-form CHSH maximum `2 sqrt(u + v)` from the two largest eigenvalues
/// of `T^T T`.
pub fn chsh_value(rho: &DensityMatrix) -> Result<ChshReport> {
    let t = correlation_tensor(rho)?;
    let eigenvalues_u = t.u_eigenvalues()?;
    let value = 2.0 * (eigenvalues_u[0] + eigenvalues_u[1]).max(0.0).sqrt();
    Ok(ChshReport {
        value,
        violates: value > 2.0,
        eigenvalues_u,
    })
}

/// Bloch directions of the four dichotomic observables `A = a . sigma`, etc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementFrame {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
}

fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn observable(n: &[f64; 3]) -> ComplexMatrix {
    let s = paulis();
    let mut m = ComplexMatrix::zeros(2, 2);
    for (k, sk) in s.iter().enumerate() {
        m = m.add(&sk.scale(C64::new(n[k], 0.0))).unwrap();
    }
    m
}

impl MeasurementFrame {
    /// From `(theta, phi)` spherical angles, in the order a, a', b, b'.
    pub fn from_angles(angles: &[f64; 8]) -> Self {
        Self {
            a: unit_vector(angles[0], angles[1]),
            a_prime: unit_vector(angles[2], angles[3]),
            b: unit_vector(angles[4], angles[5]),
            b_prime: unit_vector(angles[6], angles[7]),
        }
    }

    /// `A⊗B + A⊗B' + A'⊗B - A'⊗B'`.
    pub fn chsh_operator(&self) -> ComplexMatrix {
        let (a, ap) = (observable(&self.a), observable(&self.a_prime));
        let (b, bp) = (observable(&self.b), observable(&self.b_prime));
        tensor(&a, &b)
            .add(&tensor(&a, &bp))
            .and_then(|m| m.add(&tensor(&ap, &b)))
            .and_then(|m| m.sub(&tensor(&ap, &bp)))
            .unwrap()
    }

    pub fn chsh_expectation(&self, rho: &DensityMatrix) -> f64 {
        rho.expectation(&self.chsh_operator()).unwrap().re
    }
}

/// CHSH maximum by direct multi-start Nelder–Mead search over measurement
/// frames. Restart `i` is seeded with `restart_seed(seed, i)`, so the result
/// depends only on `(rho, restarts, seed)`.
pub fn chsh_direct(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<f64> {
    require_qubit_pair(rho)?;
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let objective = |x: &[f64]| {
        let angles: [f64; 8] = x.try_into().unwrap();
        -MeasurementFrame::from_angles(&angles).chsh_expectation(rho)
    };
    let opts = NelderMeadOptions {
        f_tol: 1e-12,
        x_tol: 1e-7,
        max_evals: 4000,
        initial_step: 0.6,
    };
    let polish = NelderMeadOptions {
        initial_step: 0.05,
        ..opts
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..restarts {
        let mut rng = stream_rng(restart_seed(seed, i as u64), 0);
        let x0: Vec<f64> = (0..4)
            .flat_map(|_| [rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)])
            .collect();
        let first = nelder_mead(objective, &x0, &opts);
        let second = nelder_mead(objective, &first.x, &polish);
        best = best.max(-first.value.min(second.value));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChenReport {
    pub extendible: bool,
    /// `tr(rho_B^2)`.
    pub lhs: f64,
    /// `tr(rho_AB^2) - 4 sqrt(det rho_AB)`.
    pub rhs: f64,
}

/// Two-qubit symmetric extendibility test (extension of subsystem B):
/// extendible iff `tr(rho_B^2) >= tr(rho_AB^2) - 4 sqrt(det rho_AB)`.
pub fn chen_criterion(rho: &DensityMatrix) -> Result<ChenReport> {
    require_qubit_pair(rho)?;
    let det = determinant(rho.matrix())?.re;
    if det < tolerance::DET_CLAMP {
        return Err(Error::InvalidState(format!(
            "det(rho) = {det:e} is negative beyond round-off"
        )));
    }
    let rho_b = partial_trace(rho, &[1])?;
    let lhs = rho_b.purity();
    let rhs = rho.purity() - 4.0 * det.max(0.0).sqrt();
    Ok(ChenReport {
        extendible: lhs >= rhs - tolerance::CHEN_SLACK,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshMonogamyReport {
    /// Reports for the AB, BC and AC marginals.
    pub values: [ChshReport; 3],
    pub violations: usize,
}

/// Bipartitions of three parties as kept subsystem pairs: AB, BC, AC.
pub const PAIRS: [[usize; 2]; 3] = [[0, 1], [1, 2], [0, 2]];

pub fn chsh_monogamy_check(rho: &DensityMatrix) -> Result<ChshMonogamyReport> {
    if rho.subsystem_dims() != [2, 2, 2] {
        return Err(Error::Dimension(format!(
            "expected a three-qubit state (dims [2, 2, 2]), got {:?}",
            rho.subsystem_dims()
        )));
    }
    let mut values = [ChshReport {
        value: 0.0,
        violates: false,
        eigenvalues_u: [0.0; 3],
    }; 3];
    for (slot, pair) in values.iter_mut().zip(PAIRS) {
        *slot = chsh_value(&partial_trace(rho, &pair)?)?;
    }
    let violations = values
        .iter()
        .filter(|r| r.violates_with(tolerance::CHSH_VIOLATION))
        .count();
    Ok(ChshMonogamyReport { values, violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QubitVerdict {
    NoSymmetricExtensionBellViolation,
    ExtendibleChenCriterion,
    NotExtendibleChenCriterion,
}

impl std::fmt::Display for QubitVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NoSymmetricExtensionBellViolation => "NoSymmetricExtension_BellViolation",
            Self::ExtendibleChenCriterion => "Extendible_ChenCriterion",
            Self::NotExtendibleChenCriterion => "NotExtendible_ChenCriterion",
        })
    }
}

/// A CHSH violation rules out a symmetric extension outright; otherwise the
/// two-qubit criterion decides.
pub fn nonextendibility_verdict_qubit(rho: &DensityMatrix) -> Result<QubitVerdict> {
    if chsh_value(rho)?.violates_with(tolerance::CHSH_VIOLATION) {
        return Ok(QubitVerdict::NoSymmetricExtensionBellViolation);
    }
    Ok(if chen_criterion(rho)?.extendible {
        QubitVerdict::ExtendibleChenCriterion
    } else {
        QubitVerdict::NotExtendibleChenCriterion
    })
}

/// `(|00> + |11>) / sqrt(2)`.
pub fn phi_plus() -> DensityMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = crate::linalg::StateVector::new(
        vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)],
        vec![2, 2],
    )
    .unwrap();
    crate::linalg::outer(&psi)
}

/// `p |Phi+><Phi+| + (1 - p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    phi_plus().mix(&DensityMatrix::maximally_mixed(vec![2, 2]), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{outer, StateVector};
    use crate::sampling::{random_mixed_state, random_pure_state};

    const SQRT8: f64 = 2.0 * std::f64::consts::SQRT_2;

    #[test]
    fn correlation_tensor_examples() {
        let t = correlation_tensor(&DensityMatrix::maximally_mixed(vec![2, 2])).unwrap();
        assert!(t.0.iter().flatten().all(|x| x.abs() < 1e-15));

        // hand evaluation: <XX> = 1, <YY> = -1, <ZZ> = 1, off-diagonal zero
        let t = correlation_tensor(&phi_plus()).unwrap();
        let expected = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.0[i][j] - expected[i][j]).abs() < 1e-12);
            }
        }

        let zz = outer(&StateVector::basis(&[2, 2], &[0, 0]).unwrap());
        let t = correlation_tensor(&zz).unwrap();
        assert_eq!(t.0[2][2], 1.0);
        assert_eq!(t.0.iter().flatten().filter(|x| **x != 0.0).count(), 1);

        assert!(correlation_tensor(&DensityMatrix::maximally_mixed(vec![4])).is_err());
    }

    #[test]
    fn chsh_value_examples() {
        let r = chsh_value(&phi_plus()).unwrap();
        assert!((r.value - SQRT8).abs() < 1e-12);
        assert!(r.violates);
        assert!((r.value - 2.0 * (r.eigenvalues_u[0] + r.eigenvalues_u[1]).sqrt()).abs() < 1e-12);

        let zz = outer(&StateVector::basis(&[2, 2], &[0, 0]).unwrap());
        let r = chsh_value(&zz).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);

        // T scales linearly with p: T = 0.8 diag(1, -1, 1)
        let w = werner(0.8).unwrap();
        let t = correlation_tensor(&w).unwrap();
        assert!((t.0[1][1] + 0.8).abs() < 1e-12);
        let r = chsh_value(&w).unwrap();
        assert!((r.value - SQRT8 * 0.8).abs() < 1e-12);
    }

    #[test]
    fn chsh_direct_examples() {
        let v = chsh_direct(&phi_plus(), 16, 1).unwrap();
        assert!((v - SQRT8).abs() < 1e-4, "{v}");
        let v = chsh_direct(&DensityMatrix::maximally_mixed(vec![2, 2]), 3, 1).unwrap();
        assert!(v.abs() < 1e-8);
        assert_eq!(chsh_direct(&phi_plus(), 4, 9).unwrap(), chsh_direct(&phi_plus(), 4, 9).unwrap());
        assert!(chsh_direct(&phi_plus(), 0, 1).is_err());
    }

    #[test]
    fn chsh_direct_bounded_by_closed_form() {
        let mut rng = stream_rng(77, 0);
        for k in 0..20 {
            let rho = random_mixed_state(&mut rng, &[2, 2]).unwrap();
            let closed = chsh_value(&rho).unwrap().value;
            let direct = chsh_direct(&rho, 8, k).unwrap();
            assert!(direct <= closed + 1e-6);
            assert!(direct >= closed - 1e-3, "{direct} vs {closed}");
        }
    }

    #[test]
    fn chen_examples() {
        let r = chen_criterion(&DensityMatrix::maximally_mixed(vec![2, 2])).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        assert!(r.rhs.abs() < 1e-15);
        assert!(r.extendible);

        let zz = outer(&StateVector::basis(&[2, 2], &[0, 0]).unwrap());
        let r = chen_criterion(&zz).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-15 && (r.rhs - 1.0).abs() < 1e-15);
        assert!(r.extendible);

        // entangled pure states: lhs - rhs = tr(rho_A^2) - 1 < 0
        let mut rng = stream_rng(5, 0);
        for _ in 0..20 {
            let psi = random_pure_state(&mut rng, &[2, 2]).unwrap();
            let rho = outer(&psi);
            let r = chen_criterion(&rho).unwrap();
            let purity_a = psi.reduced(&[0]).unwrap().purity();
            assert!(!r.extendible);
            assert!((r.lhs - r.rhs - (purity_a - 1.0)).abs() < 1e-7);
        }
    }

    #[test]
    fn werner_half_by_hand() {
        // p = 1/2: eigenvalues (5/8, 1/8, 1/8, 1/8), rho_B = I/2
        // lhs = 1/2, rhs = 25/64 + 3/64 - 4 sqrt(5/4096) = 7/16 - sqrt(5)/16
        let w = werner(0.5).unwrap();
        let r = chen_criterion(&w).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-12);
        let rhs = 7.0 / 16.0 - 5f64.sqrt() / 16.0;
        assert!((r.rhs - rhs).abs() < 1e-12);
        assert!(r.extendible);
        assert_eq!(
            nonextendibility_verdict_qubit(&w).unwrap(),
            QubitVerdict::ExtendibleChenCriterion
        );
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(
            nonextendibility_verdict_qubit(&werner(0.9).unwrap()).unwrap(),
            QubitVerdict::NoSymmetricExtensionBellViolation
        );
        assert_eq!(
            nonextendibility_verdict_qubit(&DensityMatrix::maximally_mixed(vec![2, 2])).unwrap(),
            QubitVerdict::ExtendibleChenCriterion
        );
        // Werner p = 0.7 is CHSH-local but past the 2/3 extendibility threshold
        assert_eq!(
            nonextendibility_verdict_qubit(&werner(0.7).unwrap()).unwrap(),
            QubitVerdict::NotExtendibleChenCriterion
        );
    }

    #[test]
    fn monogamy_examples() {
        let state = phi_plus().tensor(&DensityMatrix::maximally_mixed(vec![2]));
        let r = chsh_monogamy_check(&state).unwrap();
        assert!((r.values[0].value - SQRT8).abs() < 1e-12);
        assert!(r.values[1].value <= 2.0 && r.values[2].value <= 2.0);
        assert_eq!(r.violations, 1);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![ZERO; 8];
        amps[0] = C64::new(h, 0.0);
        amps[7] = C64::new(h, 0.0);
        let ghz = outer(&StateVector::new(amps, vec![2, 2, 2]).unwrap());
        let r = chsh_monogamy_check(&ghz).unwrap();
        // each marginal is (|00><00| + |11><11|)/2, T = diag(0, 0, 1)
        for v in &r.values {
            assert!((v.value - 2.0).abs() < 1e-12);
        }
        assert_eq!(r.violations, 0);

        assert!(chsh_monogamy_check(&phi_plus()).is_err());
    }
}
