//! Dense complex linear algebra used throughout the crate.
//!
//! Sizes here are small (a few hundred rows at most), so everything is
//! row-major `Vec<Complex64>` and the eigensolver is cyclic Jacobi.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Cap on full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Relative gap under which eigenvalues of the random combination are
/// treated as one cluster in [`simultaneous_diag`].
pub const CLUSTER_GAP: f64 = 1e-6;

const SIMDIAG_SEED: u64 = 0x5eed_d1a6_0000_0001;
const MAX_SPLIT_DEPTH: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("no convergence after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("operators {i} and {j} do not commute (deviation {deviation:e})")]
    NotCommuting { i: usize, j: usize, deviation: f64 },
    #[error("operator {index} is not normal (deviation {deviation:e})")]
    NotNormal { index: usize, deviation: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("non-finite entry")]
    NonFinite,
    #[error("tolerances must be finite and positive")]
    InvalidTolerance,
}

/// Absolute/relative tolerance pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_eps: 1e-9, rel_eps: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self, NumError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(abs_eps) && ok(rel_eps) {
            Ok(Tolerance { abs_eps, rel_eps })
        } else {
            Err(NumError::InvalidTolerance)
        }
    }

    /// Both components set to `eps`.
    pub fn uniform(eps: f64) -> Result<Self, NumError> {
        Self::new(eps, eps)
    }

    /// `abs_eps + rel_eps * scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale.abs()
    }
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and NaN/Inf.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, NumError> {
        if data.len() != rows * cols {
            return Err(NumError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumError::NonFinite);
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        Self::from_fn(rows, columns.len(), |r, c| columns[c][r])
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
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

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Largest entry modulus, `‖M‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension");
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `max |self - other|` entrywise; panics on shape mismatch.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.is_square() && self.max_diff(&self.adjoint()) <= eps
    }

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    m = m.max(self[(r, c)].norm());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix, NumError> {
        if !self.is_square() {
            return Err(NumError::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm())).unwrap();
            if a[(pivot, col)].norm() <= 1e3 * f64::EPSILON * scale * n as f64 {
                return Err(NumError::Singular);
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let d = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] *= d;
                inv[(col, c)] *= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for c in 0..n {
                    let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                    a[(r, c)] -= f * ac;
                    inv[(r, c)] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    fn check_square(&self) -> Result<(), NumError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(NumError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Euclidean norm of a coordinate vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_max_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn unit_vector(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(m: &CMatrix, tol: Tolerance) -> Result<Eigen, NumError> {
    m.check_square()?;
    let n = m.rows;
    let scale = m.max_abs();
    let dev = m.max_diff(&m.adjoint());
    if dev > tol.bound(scale) {
        return Err(NumError::NotHermitian { deviation: dev });
    }
    // symmetrize away the admissible round-off
    let mut a = CMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 0.5 * scale.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = a.off_diagonal_max();
        if off > tol.bound(scale) {
            return Err(NumError::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`: `a <- G* a G`, `v <- v G`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph = apq / mag;
    let phc = ph.conj();
    // G = [[c, s], [-s*conj(ph), c*conj(ph)]]
    let n = a.rows;
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * c - akq * s * phc;
        a[(k, q)] = akp * s + akq * c * phc;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * c - vkq * s * phc;
        v[(k, q)] = vkp * s + vkq * c * phc;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = apk * c - aqk * s * ph;
        a[(q, k)] = apk * s + aqk * c * ph;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Unitary `U` with every `U* M U` diagonal, for pairwise commuting normal `M`s.
pub fn simultaneous_diag(ms: &[CMatrix], tol: Tolerance) -> Result<CMatrix, NumError> {
    joint_eigen(ms, tol).map(|j| j.vectors)
}

#[derive(Clone, Debug)]
pub struct JointEigen {
    pub vectors: CMatrix,
    /// `values[k][i]` is the eigenvalue of `ms[i]` on column `k`.
    pub values: Vec<Vec<C64>>,
}

/// Joint eigenbasis together with the joint eigenvalue tuples.
pub fn joint_eigen(ms: &[CMatrix], tol: Tolerance) -> Result<JointEigen, NumError> {
    let n = match ms.first() {
        Some(m) => m.rows,
        None => return Err(NumError::DimensionMismatch("no operators".into())),
    };
    for m in ms {
        m.check_square()?;
        if m.rows != n {
            return Err(NumError::DimensionMismatch(format!("operator of size {} among size {n}", m.rows)));
        }
    }
    for (i, m) in ms.iter().enumerate() {
        let s = m.max_abs();
        let ad = m.adjoint();
        let dev = (m * &ad).max_diff(&(&ad * m));
        if dev > 100.0 * tol.bound(1.0 + s * s) {
            return Err(NumError::NotNormal { index: i, deviation: dev });
        }
    }
    for i in 0..ms.len() {
        for j in (i + 1)..ms.len() {
            let dev = (&ms[i] * &ms[j]).max_diff(&(&ms[j] * &ms[i]));
            let s = ms[i].max_abs() * ms[j].max_abs();
            if dev > 100.0 * tol.bound(1.0 + s) {
                return Err(NumError::NotCommuting { i, j, deviation: dev });
            }
        }
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(SIMDIAG_SEED);
    let mut columns = Vec::with_capacity(n);
    split(ms, CMatrix::identity(n), 0, tol, &mut rng, &mut columns)?;
    let u = CMatrix::from_columns(n, &columns);
    let mut values = vec![Vec::with_capacity(ms.len()); n];
    for m in ms {
        let d = &(&u.adjoint() * m) * &u;
        let off = d.off_diagonal_max();
        if off > 100.0 * tol.bound(m.max_abs()) {
            return Err(NumError::NoConvergence { sweeps: MAX_SWEEPS });
        }
        for (k, z) in d.diagonal().into_iter().enumerate() {
            values[k].push(z);
        }
    }
    Ok(JointEigen { vectors: u, values })
}

fn split(
    ms: &[CMatrix],
    basis: CMatrix,
    depth: usize,
    tol: Tolerance,
    rng: &mut Xoshiro256StarStar,
    out: &mut Vec<Vec<C64>>,
) -> Result<(), NumError> {
    let k = basis.cols;
    if k == 1 {
        out.push(basis.column(0));
        return Ok(());
    }
    let bad = basis.adjoint();
    let restricted: Vec<CMatrix> = ms.iter().map(|m| &(&bad * m) * &basis).collect();
    let all_scalar = restricted.iter().all(|r| {
        let d = r.diagonal();
        let spread = d.iter().map(|z| (z - d[0]).norm()).fold(0.0, f64::max);
        let thr = tol.bound(r.max_abs());
        r.off_diagonal_max() <= thr && spread <= thr
    });
    if all_scalar || depth >= MAX_SPLIT_DEPTH {
        for c in 0..k {
            out.push(basis.column(c));
        }
        return Ok(());
    }
    let mut h = CMatrix::zeros(k, k);
    for r in &restricted {
        let w = 1.0 / (1.0 + r.max_abs());
        let ad = r.adjoint();
        let herm = r + &ad;
        let skew = (r - &ad).scale(I);
        let alpha: f64 = rng.gen_range(-1.0..1.0);
        let beta: f64 = rng.gen_range(-1.0..1.0);
        h = &h + &(&herm.scale(C64::new(alpha * w, 0.0)) + &skew.scale(C64::new(beta * w, 0.0)));
    }
    let eig = hermitian_eig(&h, tol)?;
    let gap = CLUSTER_GAP * h.max_abs().max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.values[end] - eig.values[end - 1] < gap {
            end += 1;
        }
        let cols: Vec<Vec<C64>> = (start..end).map(|c| eig.vectors.column(c)).collect();
        let sub = &basis * &CMatrix::from_columns(k, &cols);
        if end - start == 1 {
            out.push(sub.column(0));
        } else {
            split(ms, sub, depth + 1, tol, rng, out)?;
        }
        start = end;
    }
    Ok(())
}

/// Singular values (descending) and the matching left singular vectors,
/// read off the Hermitian dilation `[[0, M], [M*, 0]]`.
pub fn singular_values(m: &CMatrix, tol: Tolerance) -> Result<(Vec<f64>, Vec<Vec<C64>>), NumError> {
    let (r, c) = (m.rows, m.cols);
    let k = r.min(c);
    if k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let n = r + c;
    let mut h = CMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            h[(i, r + j)] = m[(i, j)];
            h[(r + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = hermitian_eig(&h, tol)?;
    let mut sv = Vec::with_capacity(k);
    let mut left = Vec::with_capacity(k);
    for idx in (n - k..n).rev() {
        sv.push(eig.values[idx].max(0.0));
        let u: Vec<C64> = (0..r).map(|i| eig.vectors[(i, idx)]).collect();
        let nu = vec_norm(&u);
        left.push(if nu > 0.0 { u.iter().map(|z| z / nu).collect() } else { u });
    }
    Ok((sv, left))
}

/// Number of singular values above `rel_eps * σ_max + abs_eps`.
pub fn numeric_rank(m: &CMatrix, tol: Tolerance) -> usize {
    match singular_values(m, tol) {
        Ok((sv, _)) => {
            let top = sv.first().copied().unwrap_or(0.0);
            let thr = tol.rel_eps * top + tol.abs_eps;
            sv.iter().filter(|&&s| s > thr).count()
        }
        // the dilation is hermitian by construction; a failure here means
        // non-convergence, which only happens on pathological input
        Err(_) => m.rows.min(m.cols),
    }
}

/// Hermitian square root and inverse square root of a positive definite matrix.
pub fn sqrt_and_inv_sqrt(g: &CMatrix, tol: Tolerance) -> Result<Option<(CMatrix, CMatrix)>, NumError> {
    let eig = hermitian_eig(g, tol)?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    if eig.values.iter().any(|&l| l <= tol.bound(top)) {
        return Ok(None);
    }
    let v = &eig.vectors;
    let root = CMatrix::diag_real(&eig.values.iter().map(|l| l.sqrt()).collect::<Vec<_>>());
    let inv_root = CMatrix::diag_real(&eig.values.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
    let s = &(v * &root) * &v.adjoint();
    let si = &(v * &inv_root) * &v.adjoint();
    Ok(Some((s, si)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m(rows: usize, cols: usize, v: &[(f64, f64)]) -> CMatrix {
        CMatrix::from_row_major(rows, cols, v.iter().map(|&(a, b)| c(a, b)).collect()).unwrap()
    }

    fn reconstruct(e: &Eigen) -> CMatrix {
        &(&e.vectors * &CMatrix::diag_real(&e.values)) * &e.vectors.adjoint()
    }

    #[test]
    fn identity_eig() {
        let e = hermitian_eig(&CMatrix::identity(2), Tolerance::default()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        assert!(e.vectors.max_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn pauli_x_eig() {
        let px = m(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let e = hermitian_eig(&px, Tolerance::default()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        assert!(reconstruct(&e).max_diff(&px) < 1e-12);
    }

    #[test]
    fn complex_hermitian_eig() {
        // characteristic polynomial λ² − 4λ + 3
        let h = m(2, 2, &[(2., 0.), (0., 1.), (0., -1.), (2., 0.)]);
        let e = hermitian_eig(&h, Tolerance::default()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        let u = &e.vectors;
        assert!((&u.adjoint() * u).max_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn eig_errors() {
        let tol = Tolerance::default();
        assert!(matches!(hermitian_eig(&CMatrix::zeros(2, 3), tol), Err(NumError::NotSquare { .. })));
        let nh = m(2, 2, &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)]);
        assert!(matches!(hermitian_eig(&nh, tol), Err(NumError::NotHermitian { .. })));
    }

    #[test]
    fn simdiag_examples() {
        let tol = Tolerance::default();
        let u = simultaneous_diag(&[CMatrix::identity(2)], tol).unwrap();
        assert!(u.max_diff(&CMatrix::identity(2)) < 1e-15);

        let d1 = CMatrix::diag_real(&[1.0, 2.0]);
        let d2 = CMatrix::diag_real(&[3.0, 3.0]);
        let u = simultaneous_diag(&[d1, d2], tol).unwrap();
        for col in 0..2 {
            let v = u.column(col);
            assert!(v.iter().filter(|z| z.norm() > 1e-12).count() == 1);
        }

        // Pauli-X eigenvectors are (1, ±1)/√2 up to phase and order
        let px = m(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let u = simultaneous_diag(&[px, CMatrix::identity(2)], tol).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for col in 0..2 {
            let v = u.column(col);
            assert!((v[0].norm() - r).abs() < 1e-12 && (v[1].norm() - r).abs() < 1e-12);
        }
        let ratio0 = u[(1, 0)] / u[(0, 0)];
        let ratio1 = u[(1, 1)] / u[(0, 1)];
        assert!(((ratio0 - ratio1).norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simdiag_rejects_noncommuting() {
        let px = m(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let pz = CMatrix::diag_real(&[1.0, -1.0]);
        assert!(matches!(simultaneous_diag(&[px, pz], Tolerance::default()), Err(NumError::NotCommuting { .. })));
        let nilp = m(2, 2, &[(0., 0.), (1., 0.), (0., 0.), (0., 0.)]);
        assert!(matches!(simultaneous_diag(&[nilp], Tolerance::default()), Err(NumError::NotNormal { .. })));
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerance::default();
        assert_eq!(numeric_rank(&CMatrix::zeros(2, 3), tol), 0);
        assert_eq!(numeric_rank(&CMatrix::identity(3), tol), 3);
        let ones = m(2, 2, &[(1., 0.), (1., 0.), (1., 0.), (1., 0.)]);
        assert_eq!(numeric_rank(&ones, tol), 1);
        let (sv, _) = singular_values(&ones, tol).unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-12 && sv[1].abs() < 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(2, 2, &[(1., 1.), (2., 0.), (0., -1.), (3., 0.5)]);
        let ai = a.inverse().unwrap();
        assert!((&a * &ai).max_diff(&CMatrix::identity(2)) < 1e-14);
        let sing = m(2, 2, &[(1., 0.), (2., 0.), (2., 0.), (4., 0.)]);
        assert_eq!(sing.inverse(), Err(NumError::Singular));
    }
}
