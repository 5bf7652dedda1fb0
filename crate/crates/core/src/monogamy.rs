//! CGLMP monogamy experiments on three qutrits: Haar-random scans, the two
//! one-parameter state families, and the qutrit non-extendibility verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::cglmp::{cglmp_max, CglmpReport};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector, C64, ZERO};
use crate::qubit::PAIRS;
use crate::sampling::{complex_gaussian, splitmix64, stream_rng};
use crate::tolerance;

pub const DEFAULT_SCAN_STATES: usize = 1000;
pub const DEFAULT_GAMMA_POINTS: usize = 41;
pub const DEFAULT_GAMMA_RANGE: (f64, f64) = (0.0, 2.0);

/// States handed to the thread pool per batch; records are released to the
/// caller in index order after each batch.
const SCAN_BATCH: usize = 16;

/// Haar-random three-qutrit pure state; the `(seed, index)` pair selects an
/// independent generator stream.
pub fn random_3qutrit(seed: u64, index: u64) -> StateVector {
    let mut rng = stream_rng(seed, index);
    StateVector::normalized(complex_gaussian(&mut rng, 27), vec![3, 3, 3])
        .expect("a Gaussian vector is nonzero")
}

/// Marginals on (A, B), (B, C) and (A, C).
pub fn rdm_triple(psi: &StateVector) -> Result<[DensityMatrix; 3]> {
    if psi.subsystem_dims() != [3, 3, 3] {
        return Err(Error::Dimension(format!(
            "expected a three-qutrit state (dims [3, 3, 3]), got {:?}",
            psi.subsystem_dims()
        )));
    }
    Ok([
        psi.reduced(&PAIRS[0])?,
        psi.reduced(&PAIRS[1])?,
        psi.reduced(&PAIRS[2])?,
    ])
}

fn optimizer_seed(seed: u64, index: u64, pair: usize) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(index)) ^ pair as u64)
}

fn count_violations(values: &[f64; 3]) -> usize {
    values
        .iter()
        .filter(|&&v| v > 2.0 + tolerance::CGLMP_VIOLATION)
        .count()
}

/// CGLMP maxima of the three marginals of a pure three-qutrit state.
#[derive(Debug, Clone, Copy)]
pub struct TripleEvaluation {
    pub values: [f64; 3],
    pub violations: usize,
    pub distribution_residual: f64,
}

pub fn evaluate_triple(psi: &StateVector, seed: u64, index: u64, restarts: usize, tol: f64) -> Result<TripleEvaluation> {
    let rdms = rdm_triple(psi)?;
    let mut values = [0.0; 3];
    let mut residual: f64 = 0.0;
    for (pair, rho) in rdms.iter().enumerate() {
        let report: CglmpReport = cglmp_max(rho, restarts, optimizer_seed(seed, index, pair), tol)?;
        values[pair] = report.value;
        residual = residual.max(report.distribution_residual);
    }
    Ok(TripleEvaluation {
        values,
        violations: count_violations(&values),
        distribution_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRecord {
    pub index: u64,
    pub seed: u64,
    pub b_ab: f64,
    pub b_bc: f64,
    pub b_ac: f64,
    pub violations: usize,
    pub double_violation: bool,
    /// Worst normalisation / no-signalling residual among the three optimal
    /// outcome distributions.
    pub distribution_residual: f64,
}

impl ScanRecord {
    pub fn values(&self) -> [f64; 3] {
        [self.b_ab, self.b_bc, self.b_ac]
    }

    pub fn second_largest(&self) -> f64 {
        let mut v = self.values();
        v.sort_by(f64::total_cmp);
        v[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSummary {
    pub states: usize,
    pub max_second_largest: f64,
    pub double_violations: usize,
    pub single_violations: usize,
}

impl ScanSummary {
    pub fn from_records(records: &[ScanRecord]) -> Self {
        Self {
            states: records.len(),
            max_second_largest: records
                .iter()
                .map(ScanRecord::second_largest)
                .fold(f64::NEG_INFINITY, f64::max),
            double_violations: records.iter().filter(|r| r.double_violation).count(),
            single_violations: records.iter().filter(|r| r.violations == 1).count(),
        }
    }
}

/// A state with two or more violating marginals, with everything needed to
/// reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub seed: u64,
    pub index: u64,
    pub restarts: usize,
    pub values: [f64; 3],
    pub subsystem_dims: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    pub summary: ScanSummary,
    pub counterexamples: Vec<Counterexample>,
}

pub fn scan_state(seed: u64, index: u64, restarts: usize, tol: f64) -> Result<(ScanRecord, StateVector)> {
    let psi = random_3qutrit(seed, index);
    let eval = evaluate_triple(&psi, seed, index, restarts, tol)?;
    let [b_ab, b_bc, b_ac] = eval.values;
    let record = ScanRecord {
        index,
        seed,
        b_ab,
        b_bc,
        b_ac,
        violations: eval.violations,
        double_violation: eval.violations >= 2,
        distribution_residual: eval.distribution_residual,
    };
    Ok((record, psi))
}

/// Monogamy scan over `n_states` random states. `on_record` sees every record
/// in index order as soon as its batch finishes. Results do not depend on the
/// number of worker threads.
pub fn monogamy_scan_with<F>(n_states: usize, seed: u64, restarts: usize, tol: f64, mut on_record: F) -> Result<ScanOutcome>
where
    F: FnMut(&ScanRecord) -> Result<()>,
{
    if n_states == 0 {
        return Err(Error::InvalidArgument("n_states must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(n_states);
    let mut counterexamples = Vec::new();
    for start in (0..n_states).step_by(SCAN_BATCH) {
        let end = (start + SCAN_BATCH).min(n_states);
        let batch: Vec<(ScanRecord, StateVector)> = (start..end)
            .into_par_iter()
            .map(|i| scan_state(seed, i as u64, restarts, tol))
            .collect::<Result<_>>()?;
        for (record, psi) in batch {
            on_record(&record)?;
            if record.double_violation {
                counterexamples.push(Counterexample {
                    seed,
                    index: record.index,
                    restarts,
                    values: record.values(),
                    subsystem_dims: psi.subsystem_dims().to_vec(),
                    amplitudes: psi.amplitudes().to_vec(),
                });
            }
            records.push(record);
        }
    }
    let summary = ScanSummary::from_records(&records);
    Ok(ScanOutcome {
        records,
        summary,
        counterexamples,
    })
}

pub fn monogamy_scan(n_states: usize, seed: u64, restarts: usize) -> Result<ScanOutcome> {
    monogamy_scan_with(n_states, seed, restarts, tolerance::CGLMP_OPTIMIZER, |_| Ok(()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaFamily {
    Psi1,
    Psi2,
}

impl std::str::FromStr for GammaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi1" => Ok(Self::Psi1),
            "psi2" => Ok(Self::Psi2),
            other => Err(Error::InvalidArgument(format!(
                "unknown family {other:?} (expected psi1 or psi2)"
            ))),
        }
    }
}

impl std::fmt::Display for GammaFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Psi1 => "psi1",
            Self::Psi2 => "psi2",
        })
    }
}

fn ket(digits: [usize; 3]) -> usize {
    9 * digits[0] + 3 * digits[1] + digits[2]
}

fn kets(labels: &[&str]) -> Vec<usize> {
    labels
        .iter()
        .map(|s| {
            let d: Vec<usize> = s.bytes().map(|b| (b - b'0') as usize).collect();
            ket([d[0], d[1], d[2]])
        })
        .collect()
}

/// Coefficients `(c1, c2, c3)` of the second family.
pub fn psi2_coefficients(gamma: f64) -> Result<(f64, f64, f64)> {
    let c1 = 1.0 / (10.0 * gamma + 0.01);
    if !c1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} sits on the pole of c1 = 1 / (10 gamma + 0.01)"
        )));
    }
    let c2 = -3.0 * gamma * (gamma - 1.4) * (-gamma).exp();
    let c3 = gamma * (gamma - 1.0);
    Ok((c1, c2, c3))
}

/// Unnormalised amplitudes of a family member, ket by ket. For `psi1`, `|112>`
/// appears in both groups and so collects `1 + gamma`.
pub fn gamma_state_literal(family: GammaFamily, gamma: f64) -> Result<Vec<C64>> {
    if !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be finite, got {gamma}")));
    }
    let mut amps = vec![ZERO; 27];
    let mut put = |labels: &[&str], coef: f64| {
        for k in kets(labels) {
            amps[k] += C64::new(coef, 0.0);
        }
    };
    match family {
        GammaFamily::Psi1 => {
            put(&["000", "001", "002", "110", "111", "112", "221", "222"], 1.0);
            put(&["010", "020", "112", "101", "121", "212"], gamma);
        }
        GammaFamily::Psi2 => {
            let (c1, c2, c3) = psi2_coefficients(gamma)?;
            put(&["000", "111", "222"], 1.0);
            put(&["001", "002", "110", "112", "220", "221"], c1);
            put(&["100", "200", "011", "211", "022", "122"], c2);
            put(&["010", "020", "101", "121", "202", "212"], c3);
        }
    }
    Ok(amps)
}

/// Family member, renormalised to unit norm.
pub fn gamma_state(family: GammaFamily, gamma: f64) -> Result<StateVector> {
    StateVector::normalized(gamma_state_literal(family, gamma)?, vec![3, 3, 3])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub b_ab: f64,
    pub b_bc: f64,
    pub b_ac: f64,
    pub violations: usize,
    pub distribution_residual: f64,
}

/// `points` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// CGLMP maxima of the three marginals along a grid of `gamma` values.
pub fn gamma_sweep_with<S>(grid: &[f64], restarts: usize, seed: u64, tol: f64, state: S) -> Result<Vec<GammaPoint>>
where
    S: Fn(f64) -> Result<StateVector> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("gamma grid is empty".into()));
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let psi = state(gamma)?;
            let eval = evaluate_triple(&psi, seed, i as u64, restarts, tol)?;
            let [b_ab, b_bc, b_ac] = eval.values;
            Ok(GammaPoint {
                gamma,
                b_ab,
                b_bc,
                b_ac,
                violations: eval.violations,
                distribution_residual: eval.distribution_residual,
            })
        })
        .collect()
}

pub fn gamma_sweep(family: GammaFamily, grid: &[f64], restarts: usize, seed: u64) -> Result<Vec<GammaPoint>> {
    gamma_sweep_with(grid, restarts, seed, tolerance::CGLMP_OPTIMIZER, |g| gamma_state(family, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QutritVerdict {
    /// The state violates CGLMP; it has no symmetric extension provided the
    /// CGLMP inequality is monogamous, which is conjectured, not proven.
    NoSymmetricExtensionConjecturalBellViolation,
    Inconclusive,
}

impl std::fmt::Display for QutritVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::NoSymmetricExtensionConjecturalBellViolation => {
                "NoSymmetricExtension_ConjecturalBellViolation"
            }
            Self::Inconclusive => "Inconclusive",
        })
    }
}

pub fn nonextendibility_verdict_qutrit(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<(QutritVerdict, CglmpReport)> {
    let report = cglmp_max(rho, restarts, seed, tolerance::CGLMP_OPTIMIZER)?;
    let verdict = if report.violates() {
        QutritVerdict::NoSymmetricExtensionConjecturalBellViolation
    } else {
        QutritVerdict::Inconclusive
    };
    Ok((verdict, report))
}
