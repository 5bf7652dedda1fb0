//! Permutation-symmetric multiqubit pure states in the Dicke basis and their
//! two-qubit reduced states.
//!
//! Dicke coefficients are indexed by `m = -j..=j` in ascending order, so
//! index `k` holds `c_{k - j}`. A qubit in `|0>` is spin up: the Dicke state
//! `|j, m>` is the symmetric superposition of all `N = 2j` bit strings with
//! `j + m` zeros.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dagger, hermitian_eigenvalues, matmul, ComplexMatrix, DensityMatrix, StateVector, C64, ZERO};
use crate::qubit::{chsh_value, CorrelationTensor};
use crate::sampling::complex_gaussian;
use crate::tolerance;

/// Spin quantum number `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Spin {
    two_j: usize,
}

impl Spin {
    pub fn from_j(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !two_j.is_finite() || two_j.fract() != 0.0 || two_j < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "spin j = {j} is not a positive half-integer"
            )));
        }
        Ok(Self {
            two_j: two_j as usize,
        })
    }

    /// Spin of the symmetric subspace of `n` qubits.
    pub fn from_qubits(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        Ok(Self { two_j: n })
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn qubits(&self) -> usize {
        self.two_j
    }

    pub fn multiplicity(&self) -> usize {
        self.two_j + 1
    }

    /// `m` value of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }
}

/// Collective angular-momentum matrices in the `|j, m>` basis (`m` ascending).
#[derive(Debug, Clone)]
pub struct CollectiveSpinOps {
    pub jz: ComplexMatrix,
    pub j_plus: ComplexMatrix,
    pub j_minus: ComplexMatrix,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
}

pub fn collective_ops(spin: Spin) -> CollectiveSpinOps {
    let d = spin.multiplicity();
    let j = spin.j();
    let jz = ComplexMatrix::from_real_diagonal(&(0..d).map(|k| spin.m(k)).collect::<Vec<_>>());
    let mut j_plus = ComplexMatrix::zeros(d, d);
    for k in 0..d - 1 {
        let m = spin.m(k);
        j_plus[(k + 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let j_minus = dagger(&j_plus);
    let jx = j_plus.add(&j_minus).unwrap().scale(C64::new(0.5, 0.0));
    let jy = j_plus.sub(&j_minus).unwrap().scale(C64::new(0.0, -0.5));
    CollectiveSpinOps {
        jz,
        j_plus,
        j_minus,
        jx,
        jy,
    }
}

/// Pure symmetric state of `N = 2j >= 3` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DickeState {
    spin: Spin,
    coefficients: Vec<C64>,
}

impl DickeState {
    /// `coefficients[k]` multiplies `|j, -j + k>`; `N = coefficients.len() - 1`.
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() < 4 {
            return Err(Error::InvalidState(format!(
                "need at least 3 qubits (4 coefficients), got {} coefficients",
                coefficients.len()
            )));
        }
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::InvalidState(format!(
                "Dicke coefficients have norm {norm}, expected 1"
            )));
        }
        let spin = Spin::from_qubits(coefficients.len() - 1)?;
        Ok(Self { spin, coefficients })
    }

    pub fn normalized(mut coefficients: Vec<C64>) -> Result<Self> {
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("zero or non-finite coefficients".into()));
        }
        coefficients.iter_mut().for_each(|c| *c /= norm);
        Self::new(coefficients)
    }

    /// `|j, m>` for `N = qubits` with `m = -j + k`.
    pub fn basis(qubits: usize, k: usize) -> Result<Self> {
        if k > qubits {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for {qubits} qubits"
            )));
        }
        let mut c = vec![ZERO; qubits + 1];
        c[k] = C64::new(1.0, 0.0);
        Self::new(c)
    }

    /// Uniformly random direction in the symmetric subspace.
    pub fn random(qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::normalized(complex_gaussian(rng, qubits + 1))
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn qubits(&self) -> usize {
        self.spin.qubits()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let c = &self.coefficients;
        let mut acc = ZERO;
        for r in 0..c.len() {
            for k in 0..c.len() {
                acc += c[r].conj() * op[(r, k)] * c[k];
            }
        }
        acc
    }
}

/// Two-qubit reduced state of a symmetric pure state, in the basis
/// `|00>, |01>, |10>, |11>`:
///
/// ```text
/// [ v+   x+*  x+*  u*  ]
/// [ x+   w    y*   x-* ]
/// [ x+   y    w    x-* ]
/// [ u    x-   x-   v-  ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricRdm {
    pub v_plus: f64,
    pub v_minus: f64,
    pub w: f64,
    pub y: f64,
    pub x_plus: C64,
    pub x_minus: C64,
    pub u: C64,
}

impl SymmetricRdm {
    pub fn to_matrix(&self) -> ComplexMatrix {
        let (xp, xm, u) = (self.x_plus, self.x_minus, self.u);
        let v = |x: f64| C64::new(x, 0.0);
        ComplexMatrix::from_rows(&[
            vec![v(self.v_plus), xp.conj(), xp.conj(), u.conj()],
            vec![xp, v(self.w), v(self.y), xm.conj()],
            vec![xp, v(self.y), v(self.w), xm.conj()],
            vec![u, xm, xm, v(self.v_minus)],
        ])
        .unwrap()
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix(), vec![2, 2])
    }

    /// Pauli correlation tensor written directly in terms of the matrix elements.
    pub fn t_matrix(&self) -> CorrelationTensor {
        let d = self.x_plus - self.x_minus;
        let (w, u) = (self.w, self.u);
        CorrelationTensor([
            [2.0 * (w + u.re), 2.0 * u.im, 2.0 * d.re],
            [2.0 * u.im, 2.0 * (w - u.re), 2.0 * d.im],
            [2.0 * d.re, 2.0 * d.im, 1.0 - 4.0 * w],
        ])
    }

    /// `tr(rho_AA^2)` from the matrix elements.
    pub fn pair_purity(&self) -> f64 {
        self.v_plus.powi(2)
            + self.v_minus.powi(2)
            + 2.0 * self.u.norm_sqr()
            + 4.0 * (self.x_plus.norm_sqr() + self.x_minus.norm_sqr() + self.w.powi(2))
    }

    /// `tr(rho_A^2)` of the single-qubit marginal from the matrix elements.
    pub fn single_purity(&self) -> f64 {
        (self.v_plus + self.w).powi(2)
            + (self.v_minus + self.w).powi(2)
            + 2.0 * (self.x_plus + self.x_minus).norm_sqr()
    }
}

/// Two-qubit marginal from collective-spin expectation values.
pub fn rdm_from_dicke(psi: &DickeState) -> SymmetricRdm {
    let ops = collective_ops(psi.spin());
    let n = psi.qubits() as f64;
    let jz = psi.expectation(&ops.jz).re;
    let jz2 = psi.expectation(&matmul(&ops.jz, &ops.jz).unwrap()).re;
    let jp = psi.expectation(&ops.j_plus);
    let anti = matmul(&ops.j_plus, &ops.jz)
        .unwrap()
        .add(&matmul(&ops.jz, &ops.j_plus).unwrap())
        .unwrap();
    let jp_jz = psi.expectation(&anti);
    let jp2 = psi.expectation(&matmul(&ops.j_plus, &ops.j_plus).unwrap());
    let jxy2 = psi
        .expectation(
            &matmul(&ops.jx, &ops.jx)
                .unwrap()
                .add(&matmul(&ops.jy, &ops.jy).unwrap())
                .unwrap(),
        )
        .re;

    let pair = n * (n - 1.0);
    SymmetricRdm {
        v_plus: (n * n - 2.0 * n + 4.0 * jz2 + 4.0 * jz * (n - 1.0)) / (4.0 * pair),
        v_minus: (n * n - 2.0 * n + 4.0 * jz2 - 4.0 * jz * (n - 1.0)) / (4.0 * pair),
        x_plus: ((n - 1.0) * jp + jp_jz) / (2.0 * pair),
        x_minus: ((n - 1.0) * jp - jp_jz) / (2.0 * pair),
        w: (n * n - 4.0 * jz2) / (4.0 * pair),
        y: (2.0 * jxy2 - n) / (2.0 * pair),
        u: jp2 / pair,
    }
}

pub const BRUTE_FORCE_MAX_QUBITS: usize = 12;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expands the state over all `2^N` bit strings and traces out all but the
/// qubits in `keep`.
pub fn brute_force_rdm_on(psi: &DickeState, keep: &[usize]) -> Result<DensityMatrix> {
    let n = psi.qubits();
    if n > BRUTE_FORCE_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "brute-force expansion limited to {BRUTE_FORCE_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let mut amps = vec![ZERO; 1 << n];
    for (index, amp) in amps.iter_mut().enumerate() {
        let zeros = n - index.count_ones() as usize;
        // zeros = j + m = k
        let c = psi.coefficients[zeros];
        *amp = c / binomial(n, zeros).sqrt();
    }
    let full = StateVector::new(amps, vec![2; n])?;
    full.reduced(keep)
}

pub fn brute_force_rdm(psi: &DickeState) -> Result<DensityMatrix> {
    brute_force_rdm_on(psi, &[0, 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub chsh: f64,
    pub passed: bool,
}

/// CHSH value of the two-qubit marginal; passes when it is at most 2.
pub fn theorem1_check(psi: &DickeState) -> Result<Theorem1Report> {
    let rho = rdm_from_dicke(psi).to_density_matrix()?;
    let chsh = chsh_value(&rho)?.value;
    Ok(Theorem1Report {
        chsh,
        passed: chsh <= 2.0 + tolerance::CHSH_VIOLATION,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenIdentityReport {
    /// `l1 l2 + l2 l3 + l1 l3` over the eigenvalues of the T-matrix.
    pub lhs: f64,
    /// `4 (w - 3 w^2 - |u|^2 - |x+ - x-|^2)`.
    pub rhs: f64,
    /// `l1 + l2 + l3`, which equals one.
    pub eigenvalue_sum: f64,
    pub single_purity: f64,
    pub pair_purity: f64,
}

pub fn eigenidentity_check(psi: &DickeState) -> Result<EigenIdentityReport> {
    let rdm = rdm_from_dicke(psi);
    let t = rdm.t_matrix().0;
    let mut m = ComplexMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = C64::new(t[i][j], 0.0);
        }
    }
    let l = hermitian_eigenvalues(&m)?;
    let lhs = l[0] * l[1] + l[1] * l[2] + l[0] * l[2];
    let rhs = 4.0
        * (rdm.w - 3.0 * rdm.w * rdm.w - rdm.u.norm_sqr() - (rdm.x_plus - rdm.x_minus).norm_sqr());
    Ok(EigenIdentityReport {
        lhs,
        rhs,
        eigenvalue_sum: l.iter().sum(),
        single_purity: rdm.single_purity(),
        pair_purity: rdm.pair_purity(),
    })
}
