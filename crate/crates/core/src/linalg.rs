//! Dense complex linear algebra for the small operators used throughout the
//! crate (dimensions up to 27).
//!
//! Subsystem order follows ket order: index 0 is the leftmost tensor factor.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(n_rows, n_cols, rows.concat())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise `|M - M^dagger|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Kronecker product; entry `(i*b.rows + k, j*b.cols + l)` is `a[i,j] * b[k,l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols, m.rows);
    for r in 0..m.rows {
        for c in 0..m.cols {
            out[(c, r)] = m[(r, c)].conj();
        }
    }
    out
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

pub fn trace(m: &ComplexMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    Ok((0..m.rows).map(|i| m[(i, i)]).sum())
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.cols != b.rows || a.rows != b.cols {
        return Err(Error::Dimension(format!(
            "tr(AB) needs compatible shapes, got {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = ZERO;
    for i in 0..a.rows {
        for k in 0..a.cols {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Determinant by LU factorisation with partial pivoting. Only defined for
/// matrices up to 4x4.
pub fn determinant(m: &ComplexMatrix) -> Result<C64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n > 4 {
        return Err(Error::InvalidArgument(format!(
            "determinant supports dimension <= 4, got {n}"
        )));
    }
    let mut lu = m.clone();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| lu[(a, col)].norm().total_cmp(&lu[(b, col)].norm()))
            .unwrap();
        if lu[(pivot, col)] == ZERO {
            return Ok(ZERO);
        }
        if pivot != col {
            for c in 0..n {
                let tmp = lu[(col, c)];
                lu[(col, c)] = lu[(pivot, c)];
                lu[(pivot, c)] = tmp;
            }
            det = -det;
        }
        let p = lu[(col, col)];
        det *= p;
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            for c in col..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= factor * v;
            }
        }
    }
    Ok(det)
}

fn check_hermitian_input(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let deviation = m.hermiticity_deviation();
    if deviation > tolerance::HERMITICITY {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.values)
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the normalised eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

/// Cyclic complex Jacobi diagonalisation of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a[p,q]`, then applies
/// the real symmetric Jacobi rotation that zeroes it.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian_input(m)?;
    let n = m.rows;
    let mut a = m.clone();
    // symmetrise so the rotations act on an exactly Hermitian matrix
    for r in 0..n {
        a[(r, r)] = C64::new(a[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (a[(r, c)] + a[(c, r)].conj()) * 0.5;
            a[(r, c)] = avg;
            a[(c, r)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tolerance::JACOBI_OFF_DIAGONAL * a.frobenius_norm().max(1.0);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off < threshold {
            break;
        }
        if sweeps == tolerance::JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // V restricted to (p, q): [[c, s], [-s e^{-i th}, c e^{-i th}]]
                let vpp = C64::new(c, 0.0);
                let vpq = C64::new(s, 0.0);
                let vqp = -phase.conj() * s;
                let vqq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * vpp + akq * vqp;
                    a[(k, q)] = akp * vpq + akq * vqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
                    a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(app - t * r, 0.0);
                a[(q, q)] = C64::new(aqq + t * r, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * vpp + vkq * vqp;
                    v[(k, q)] = vkp * vpq + vkq * vqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Dimension(format!(
            "subsystem dimensions {dims:?} multiply to {product}, expected {total}"
        )));
    }
    Ok(())
}

/// Normalised pure state with its tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    /// Wraps already-normalised amplitudes.
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("amplitudes must be finite".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(
                "cannot normalise a zero or non-finite vector".into(),
            ));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes, dims)
    }

    /// Computational basis state; `digits` gives the level of each subsystem.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        if dims.len() != digits.len() || digits.iter().zip(dims).any(|(d, n)| d >= n) {
            return Err(Error::InvalidArgument(format!(
                "basis digits {digits:?} do not fit dimensions {dims:?}"
            )));
        }
        let total: usize = dims.iter().product();
        let index = digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d);
        let mut amps = vec![ZERO; total];
        amps[index] = ONE;
        Self::new(amps, dims.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        StateVector { amplitudes, dims }
    }

    /// Reduced density matrix on `keep`, contracted directly from the
    /// amplitudes without forming the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let split = SubsystemSplit::new(&self.dims, keep)?;
        let mut psi = vec![ZERO; split.kept_dim * split.traced_dim];
        for (i, &amp) in self.amplitudes.iter().enumerate() {
            let (k, t) = split.split(i);
            psi[k * split.traced_dim + t] = amp;
        }
        let mut out = ComplexMatrix::zeros(split.kept_dim, split.kept_dim);
        for r in 0..split.kept_dim {
            let row_r = &psi[r * split.traced_dim..(r + 1) * split.traced_dim];
            for c in r..split.kept_dim {
                let row_c = &psi[c * split.traced_dim..(c + 1) * split.traced_dim];
                let z: C64 = row_r.iter().zip(row_c).map(|(a, b)| a * b.conj()).sum();
                out[(r, c)] = z;
                out[(c, r)] = z.conj();
            }
        }
        DensityMatrix::new(out, split.kept_dims)
    }
}

/// Bookkeeping for splitting a composite index into kept and traced parts.
struct SubsystemSplit {
    kept_dims: Vec<usize>,
    kept_dim: usize,
    traced_dim: usize,
    // per full index: (kept index, traced index)
    table: Vec<(usize, usize)>,
}

impl SubsystemSplit {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("keep set must not be empty".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() {
            return Err(Error::InvalidArgument(format!(
                "keep set {keep:?} has duplicates"
            )));
        }
        if let Some(&bad) = sorted.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::InvalidArgument(format!(
                "subsystem index {bad} out of range for {} subsystems",
                dims.len()
            )));
        }
        let kept_dims: Vec<usize> = sorted.iter().map(|&k| dims[k]).collect();
        let kept_dim: usize = kept_dims.iter().product();
        let total: usize = dims.iter().product();
        let traced_dim = total / kept_dim;
        let table = (0..total)
            .map(|mut idx| {
                let mut digits = vec![0; dims.len()];
                for (s, &d) in dims.iter().enumerate().rev() {
                    digits[s] = idx % d;
                    idx /= d;
                }
                let (mut k, mut t) = (0, 0);
                for (s, &d) in dims.iter().enumerate() {
                    if sorted.binary_search(&s).is_ok() {
                        k = k * d + digits[s];
                    } else {
                        t = t * d + digits[s];
                    }
                }
                (k, t)
            })
            .collect();
        Ok(Self {
            kept_dims,
            kept_dim,
            traced_dim,
            table,
        })
    }

    #[inline]
    fn split(&self, index: usize) -> (usize, usize) {
        self.table[index]
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix with subsystem structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        check_dims(&dims, matrix.rows)?;
        let deviation = matrix.hermiticity_deviation();
        if deviation > tolerance::DENSITY_HERMITICITY {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian (deviation {deviation:e})"
            )));
        }
        let tr = trace(&matrix)?;
        if (tr - ONE).norm() > tolerance::TRACE {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min_eig = hermitian_eigenvalues(&matrix)?[0];
        if min_eig < tolerance::PSD_FLOOR {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let matrix = ComplexMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0));
        Self { matrix, dims }
    }

    /// Convex combination `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::Dimension(format!(
                "cannot mix states with dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        let m = self
            .matrix
            .scale(C64::new(p, 0.0))
            .add(&other.matrix.scale(C64::new(1.0 - p, 0.0)))?;
        DensityMatrix::new(m, self.dims.clone())
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).unwrap().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Expectation value `tr(rho * op)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        trace_of_product(&self.matrix, op)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            matrix: tensor(&self.matrix, &other.matrix),
            dims: self.dims.iter().chain(&other.dims).copied().collect(),
        }
    }

    /// Pure-state ensemble `{ sqrt(lambda_k) |e_k> }` from the eigendecomposition,
    /// dropping components with weight at or below `cutoff`.
    pub fn ensemble(&self, cutoff: f64) -> Result<Vec<Vec<C64>>> {
        let eig = hermitian_eigen(&self.matrix)?;
        let n = self.dim();
        Ok(eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam > cutoff)
            .map(|(k, &lam)| {
                let s = lam.sqrt();
                (0..n).map(|i| eig.vectors[(i, k)] * s).collect()
            })
            .collect())
    }
}

/// Reduced density matrix over `keep` (kept subsystems stay in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let split = SubsystemSplit::new(&rho.dims, keep)?;
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(split.kept_dim, split.kept_dim);
    for i in 0..n {
        let (ki, ti) = split.split(i);
        for j in 0..n {
            let (kj, tj) = split.split(j);
            if ti == tj {
                out[(ki, kj)] += rho.matrix[(i, j)];
            }
        }
    }
    DensityMatrix::new(out, split.kept_dims)
}

/// Projector `|v><v|`.
pub fn outer(v: &StateVector) -> DensityMatrix {
    let n = v.dim();
    let mut m = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            m[(r, c)] = v.amplitudes[r] * v.amplitudes[c].conj();
        }
    }
    DensityMatrix {
        matrix: m,
        dims: v.dims.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]]).unwrap()
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let data = (0..n * n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_vec(n, n, data).unwrap()
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let m = random_matrix(rng, n);
        m.add(&dagger(&m)).unwrap()
    }

    fn random_state(rng: &mut impl Rng, dims: Vec<usize>) -> StateVector {
        let n = dims.iter().product();
        let amps = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        StateVector::normalized(amps, dims).unwrap()
    }

    #[test]
    fn tensor_identities_and_paulis() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert_eq!(
            tensor(&z, &z),
            ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn tensor_mixed_product_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b, cm, d) = (
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 3),
        );
        let lhs = matmul(&tensor(&a, &b), &tensor(&cm, &d)).unwrap();
        let rhs = tensor(&matmul(&a, &cm).unwrap(), &matmul(&b, &d).unwrap());
        assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, b, cm) = (
            random_matrix(&mut rng, 2),
            random_matrix(&mut rng, 3),
            random_matrix(&mut rng, 2),
        );
        let left = tensor(&tensor(&a, &b), &cm);
        let right = tensor(&a, &tensor(&b, &cm));
        assert!(left.max_abs_diff(&right) <= 1e-14);
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let zz = outer(&StateVector::basis(&[2, 2], &[0, 0]).unwrap());
        let r = partial_trace(&zz, &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)], vec![2, 2]).unwrap();
        let r = partial_trace(&outer(&bell), &[1]).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_explicit_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_state(&mut rng, vec![3, 3, 3]);
        let rho = outer(&psi);
        let reduced = partial_trace(&rho, &[0, 1]).unwrap();
        // independent triple loop: rho_AB[(a,b),(a',b')] = sum_k rho[(a,b,k),(a',b',k)]
        let mut oracle = ComplexMatrix::zeros(9, 9);
        for a in 0..3 {
            for b in 0..3 {
                for ap in 0..3 {
                    for bp in 0..3 {
                        let mut s = ZERO;
                        for k in 0..3 {
                            s += rho.matrix()[(9 * a + 3 * b + k, 9 * ap + 3 * bp + k)];
                        }
                        oracle[(3 * a + b, 3 * ap + bp)] = s;
                    }
                }
            }
        }
        assert!(reduced.matrix().max_abs_diff(&oracle) <= 1e-12);
        let direct = psi.reduced(&[0, 1]).unwrap();
        assert!(direct.matrix().max_abs_diff(&oracle) <= 1e-12);
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = outer(&random_state(&mut rng, vec![2, 3, 2]));
        let one_step = partial_trace(&rho, &[1]).unwrap();
        let two_step = partial_trace(&partial_trace(&rho, &[0, 1]).unwrap(), &[1]).unwrap();
        assert!(one_step.matrix().max_abs_diff(two_step.matrix()) <= 1e-12);
        let keep_02 = partial_trace(&rho, &[0, 2]).unwrap();
        assert_eq!(keep_02.subsystem_dims(), &[2, 2]);
        assert!(partial_trace(&rho, &[2, 0]).unwrap().matrix().max_abs_diff(keep_02.matrix()) == 0.0);
    }

    #[test]
    fn partial_trace_rejects_bad_keep_sets() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidArgument(_))));
        assert!(matches!(partial_trace(&rho, &[0, 0]), Err(Error::InvalidArgument(_))));
        assert!(partial_trace(&rho, &[0, 1]).is_ok());
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let d = ComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let ev = hermitian_eigenvalues(&d).unwrap();
        assert_eq!(ev, vec![1.0, 2.0, 3.0]);
        let ev = hermitian_eigenvalues(&sigma_x()).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_match_trace_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 9);
            let ev = hermitian_eigenvalues(&h).unwrap();
            let tr1 = trace(&h).unwrap().re;
            let tr2 = trace_of_product(&h, &h).unwrap().re;
            assert!((ev.iter().sum::<f64>() - tr1).abs() <= 1e-10);
            assert!((ev.iter().map(|x| x * x).sum::<f64>() - tr2).abs() <= 1e-10);
            assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_hermitian(&mut rng, 27);
        let eig = hermitian_eigen(&h).unwrap();
        let lam = ComplexMatrix::from_real_diagonal(&eig.values);
        let rebuilt = matmul(&matmul(&eig.vectors, &lam).unwrap(), &dagger(&eig.vectors)).unwrap();
        assert!(rebuilt.max_abs_diff(&h) < 1e-11);
        let gram = matmul(&dagger(&eig.vectors), &eig.vectors).unwrap();
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(27)) < 1e-12);
    }

    #[test]
    fn eigensolver_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigenvalues(&rect), Err(Error::NotSquare { .. })));
        let skew = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn determinant_cases() {
        assert!((determinant(&ComplexMatrix::identity(4)).unwrap() - ONE).norm() < 1e-15);
        let quarter = ComplexMatrix::identity(4).scale(c(0.25, 0.0));
        assert!((determinant(&quarter).unwrap() - c(1.0 / 256.0, 0.0)).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let proj = outer(&random_state(&mut rng, vec![2, 2]));
        assert!(determinant(proj.matrix()).unwrap().norm() <= 1e-12);
        assert!(determinant(&ComplexMatrix::identity(5)).is_err());
        // permutation with one swap
        let swap = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        assert!((determinant(&swap).unwrap() + ONE).norm() < 1e-15);
    }

    #[test]
    fn plumbing_ops() {
        assert_eq!(dagger(&sigma_y()), sigma_y());
        assert_eq!(trace(&ComplexMatrix::identity(3)).unwrap(), c(3.0, 0.0));
        let zero = outer(&StateVector::basis(&[2], &[0]).unwrap());
        assert_eq!(*zero.matrix(), ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
        assert!(matmul(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn projector_spectrum_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dims in [vec![2, 2], vec![3, 3], vec![3, 3, 3]] {
            let rho = outer(&random_state(&mut rng, dims));
            let ev = rho.eigenvalues().unwrap();
            let (last, rest) = ev.split_last().unwrap();
            assert!((last - 1.0).abs() < 1e-10);
            assert!(rest.iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(not_unit, vec![2]).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative, vec![2]).is_err());
        let ok = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(DensityMatrix::new(ok.clone(), vec![3]).is_err());
        assert!(DensityMatrix::new(ok, vec![2]).is_ok());
        assert!(StateVector::new(vec![ONE, ONE], vec![2]).is_err());
    }

    #[test]
    fn ensemble_reproduces_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let psi = random_state(&mut rng, vec![3, 3, 3]);
        let rho = psi.reduced(&[0, 1]).unwrap();
        let ens = rho.ensemble(1e-14).unwrap();
        assert!(ens.len() <= 3);
        let mut rebuilt = ComplexMatrix::zeros(9, 9);
        for v in &ens {
            for r in 0..9 {
                for cc in 0..9 {
                    rebuilt[(r, cc)] += v[r] * v[cc].conj();
                }
            }
        }
        assert!(rebuilt.max_abs_diff(rho.matrix()) < 1e-12);
    }
}
