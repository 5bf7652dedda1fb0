//! CGLMP correlation value `I3` for pairs of qutrits.
//!
//! Measurements come from the Fourier family: party A applies
//! `A_k = F U(phi_k)`, party B applies `B_l = conj(F) U(varphi_l)`, both
//! followed by a computational-basis readout, where
//! `F[a][b] = exp(2 pi i a b / 3) / sqrt(3)` and
//! `U(phi) = diag(exp(-i phi(0)), exp(-i phi(1)), exp(-i phi(2)))`.
//! All outcome shifts are taken modulo 3.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dagger, matmul, tensor, ComplexMatrix, DensityMatrix, StateVector, C64, ZERO};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::sampling::{restart_seed, stream_rng};
use crate::tolerance;

pub const DEFAULT_CGLMP_RESTARTS: usize = 24;

/// Twelve measurement phases: `phi[k][j]` for party A and `varphi[l][j]`
/// for party B, `k, l` in {0, 1} (settings 1 and 2), `j` in {0, 1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSet {
    pub phi: [[f64; 3]; 2],
    pub varphi: [[f64; 3]; 2],
}

impl AngleSet {
    pub fn zeros() -> Self {
        Self {
            phi: [[0.0; 3]; 2],
            varphi: [[0.0; 3]; 2],
        }
    }

    /// Flat layout: `phi_1, phi_2, varphi_1, varphi_2`, three entries each.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() != 12 {
            return Err(Error::InvalidArgument(format!(
                "an angle set has 12 entries, got {}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("angles must be finite".into()));
        }
        let mut s = Self::zeros();
        let rows = s.phi.iter_mut().chain(s.varphi.iter_mut());
        for (row, chunk) in rows.zip(x.chunks_exact(3)) {
            row.copy_from_slice(chunk);
        }
        Ok(s.reduced())
    }

    pub fn to_flat(&self) -> [f64; 12] {
        let mut x = [0.0; 12];
        let rows = self.phi.iter().chain(self.varphi.iter());
        for (chunk, row) in x.chunks_exact_mut(3).zip(rows) {
            chunk.copy_from_slice(row);
        }
        x
    }

    /// Every angle mapped into `[0, 2 pi)`.
    pub fn reduced(&self) -> Self {
        let r = |a: [[f64; 3]; 2]| a.map(|row| row.map(|v| v.rem_euclid(TAU)));
        Self {
            phi: r(self.phi),
            varphi: r(self.varphi),
        }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..TAU)).collect();
        Self::from_flat(&x).unwrap()
    }
}

/// `F[a][b] = exp(2 pi i a b / 3) / sqrt(3)`.
pub fn fourier3() -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(3, 3);
    let s = 1.0 / 3f64.sqrt();
    for a in 0..3 {
        for b in 0..3 {
            f[(a, b)] = C64::from_polar(s, 2.0 * PI * (a * b) as f64 / 3.0);
        }
    }
    f
}

fn phase_diag(angles: &[f64; 3]) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(3, 3);
    for (j, &a) in angles.iter().enumerate() {
        u[(j, j)] = C64::from_polar(1.0, -a);
    }
    u
}

#[derive(Debug, Clone)]
pub struct MeasurementOperators {
    pub a: [ComplexMatrix; 2],
    pub b: [ComplexMatrix; 2],
}

pub fn measurement_operators(angles: &AngleSet) -> MeasurementOperators {
    let f = fourier3();
    let f_conj = ComplexMatrix::from_vec(3, 3, f.as_slice().iter().map(|z| z.conj()).collect()).unwrap();
    let a = angles.phi.map(|p| matmul(&f, &phase_diag(&p)).unwrap());
    let b = angles.varphi.map(|p| matmul(&f_conj, &phase_diag(&p)).unwrap());
    MeasurementOperators { a, b }
}

/// `p[m][n][a][b] = P(A_m = a, B_n = b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub p: [[[[f64; 3]; 3]; 2]; 2],
}

impl OutcomeDistribution {
    /// CGLMP combination of the 36 probabilities.
    pub fn i3(&self) -> f64 {
        let p = &self.p;
        let mut pos = 0.0;
        let mut neg = 0.0;
        for j in 0..3 {
            let j1 = (j + 1) % 3;
            pos += p[0][0][j][j] + p[1][0][j][j1] + p[1][1][j][j] + p[0][1][j][j];
            neg += p[0][0][j][j1] + p[1][0][j][j] + p[1][1][j][j1] + p[0][1][j1][j];
        }
        pos - neg
    }

    /// Largest `|sum_ab p - 1|` over the four setting pairs.
    pub fn normalization_residual(&self) -> f64 {
        self.p
            .iter()
            .flatten()
            .map(|block| (block.iter().flatten().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest change in either party's marginal when the other party
    /// switches setting.
    pub fn no_signalling_residual(&self) -> f64 {
        let p = &self.p;
        let mut worst: f64 = 0.0;
        for m in 0..2 {
            for a in 0..3 {
                let marg = |n: usize| (0..3).map(|b| p[m][n][a][b]).sum::<f64>();
                worst = worst.max((marg(0) - marg(1)).abs());
            }
        }
        for n in 0..2 {
            for b in 0..3 {
                let marg = |m: usize| (0..3).map(|a| p[m][n][a][b]).sum::<f64>();
                worst = worst.max((marg(0) - marg(1)).abs());
            }
        }
        worst
    }

    pub fn consistency_residual(&self) -> f64 {
        self.normalization_residual().max(self.no_signalling_residual())
    }

    /// Smallest and largest single entries.
    pub fn range(&self) -> (f64, f64) {
        self.p
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }
}

fn require_qutrit_pair(rho: &DensityMatrix) -> Result<()> {
    if rho.subsystem_dims() != [3, 3] {
        return Err(Error::Dimension(format!(
            "expected a two-qutrit state (dims [3, 3]), got {:?}",
            rho.subsystem_dims()
        )));
    }
    Ok(())
}

/// `P(A_m = a, B_n = b) = <ab| (A_m⊗B_n) rho (A_m⊗B_n)^dagger |ab>`.
pub fn outcome_distribution(rho: &DensityMatrix, angles: &AngleSet) -> Result<OutcomeDistribution> {
    require_qutrit_pair(rho)?;
    let ops = measurement_operators(angles);
    let mut p = [[[[0.0; 3]; 3]; 2]; 2];
    for m in 0..2 {
        for n in 0..2 {
            let k = tensor(&ops.a[m], &ops.b[n]);
            let rotated = matmul(&matmul(&k, rho.matrix())?, &dagger(&k))?;
            for a in 0..3 {
                for b in 0..3 {
                    p[m][n][a][b] = rotated[(3 * a + b, 3 * a + b)].re;
                }
            }
        }
    }
    Ok(OutcomeDistribution { p })
}

pub fn i3_value(rho: &DensityMatrix, angles: &AngleSet) -> Result<f64> {
    Ok(outcome_distribution(rho, angles)?.i3())
}

type Mat3 = [[C64; 3]; 3];

/// Fast `I3` evaluation for the optimiser. The state is held as an ensemble
/// `rho = sum_c |v_c><v_c|`; for each component the post-measurement
/// amplitudes are `A V_c B^T` with `V_c` the 3x3 reshaping of `v_c`.
#[derive(Debug, Clone)]
pub struct I3Evaluator {
    components: Vec<Mat3>,
    fourier: Mat3,
}

impl I3Evaluator {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        require_qutrit_pair(rho)?;
        let components = rho
            .ensemble(1e-15)?
            .into_iter()
            .map(|v| std::array::from_fn(|i| std::array::from_fn(|j| v[3 * i + j])))
            .collect();
        let f = fourier3();
        Ok(Self {
            components,
            fourier: std::array::from_fn(|a| std::array::from_fn(|b| f[(a, b)])),
        })
    }

    fn operator(&self, angles: &[f64], conjugate: bool) -> Mat3 {
        let phases: [C64; 3] = std::array::from_fn(|j| C64::from_polar(1.0, -angles[j]));
        std::array::from_fn(|a| {
            std::array::from_fn(|j| {
                let f = self.fourier[a][j];
                (if conjugate { f.conj() } else { f }) * phases[j]
            })
        })
    }

    pub fn distribution(&self, x: &[f64; 12]) -> OutcomeDistribution {
        let a_ops = [self.operator(&x[0..3], false), self.operator(&x[3..6], false)];
        let b_ops = [self.operator(&x[6..9], true), self.operator(&x[9..12], true)];
        let mut p = [[[[0.0; 3]; 3]; 2]; 2];
        for v in &self.components {
            for (m, a_op) in a_ops.iter().enumerate() {
                // A V
                let av: Mat3 = std::array::from_fn(|a| {
                    std::array::from_fn(|k| (0..3).map(|j| a_op[a][j] * v[j][k]).sum::<C64>())
                });
                for (n, b_op) in b_ops.iter().enumerate() {
                    for a in 0..3 {
                        for b in 0..3 {
                            let mut amp = ZERO;
                            for k in 0..3 {
                                amp += av[a][k] * b_op[b][k];
                            }
                            p[m][n][a][b] += amp.norm_sqr();
                        }
                    }
                }
            }
        }
        OutcomeDistribution { p }
    }

    pub fn i3(&self, x: &[f64; 12]) -> f64 {
        self.distribution(x).i3()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CglmpReport {
    pub value: f64,
    pub best_angles: AngleSet,
    pub restarts_used: usize,
    pub evaluations: usize,
    /// Consistency residual (normalisation, no-signalling) of the outcome
    /// distribution at `best_angles`.
    pub distribution_residual: f64,
}

impl CglmpReport {
    pub fn violates(&self) -> bool {
        self.value > 2.0 + tolerance::CGLMP_VIOLATION
    }
}

/// Multi-start Nelder–Mead maximisation of `I3` over the twelve phases.
///
/// Restart `i` starts from uniform random phases drawn from the stream
/// `restart_seed(seed, i)`, and each restart is followed by a short polish
/// from its end point. The best restart wins; ties go to the lowest index.
pub fn cglmp_max(rho: &DensityMatrix, restarts: usize, seed: u64, tol: f64) -> Result<CglmpReport> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let evaluator = I3Evaluator::new(rho)?;
    let objective = |x: &[f64]| -evaluator.i3(x.try_into().unwrap());
    let opts = NelderMeadOptions {
        f_tol: tol,
        x_tol: 1e-4,
        max_evals: 6000,
        initial_step: 0.6,
    };
    let polish = NelderMeadOptions {
        initial_step: 0.05,
        max_evals: 3000,
        ..opts
    };

    let mut best_value = f64::NEG_INFINITY;
    let mut best_x = [0.0; 12];
    let mut evaluations = 0;
    for i in 0..restarts {
        let mut rng = stream_rng(restart_seed(seed, i as u64), 0);
        let x0 = AngleSet::random(&mut rng).to_flat();
        let first = nelder_mead(objective, &x0, &opts);
        let second = nelder_mead(objective, &first.x, &polish);
        evaluations += first.evaluations + second.evaluations;
        let (value, x) = if second.value <= first.value {
            (-second.value, second.x)
        } else {
            (-first.value, first.x)
        };
        if value > best_value {
            best_value = value;
            best_x.copy_from_slice(&x);
        }
    }

    let best_angles = AngleSet::from_flat(&best_x)?;
    let distribution = outcome_distribution(rho, &best_angles)?;
    Ok(CglmpReport {
        value: distribution.i3(),
        best_angles,
        restarts_used: restarts,
        evaluations,
        distribution_residual: distribution.consistency_residual(),
    })
}

/// `(|00> + gamma |11> + |22>) / sqrt(2 + gamma^2)`.
pub fn correlated_qutrit_pair(gamma: f64) -> Result<StateVector> {
    let mut amps = vec![ZERO; 9];
    amps[0] = C64::new(1.0, 0.0);
    amps[4] = C64::new(gamma, 0.0);
    amps[8] = C64::new(1.0, 0.0);
    StateVector::normalized(amps, vec![3, 3])
}

/// `1 + sqrt(11/3)`.
pub fn max_cglmp_value() -> f64 {
    1.0 + (11.0f64 / 3.0).sqrt()
}

pub const OPTIMAL_GAMMA: f64 = 0.7923;
