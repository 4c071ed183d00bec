//! Finite-dimensional commutative C*-categories.
//!
//! A category is stored by structure constants: every Hom-set `C_AB` has a
//! fixed basis, composition is a bilinear tensor, the involution is an
//! antilinear map `x ↦ J·conj(x)`. Characters of the diagonal algebras,
//! the rank-one corners `e_p∘C_AB∘e_q` and the orbit classes of characters
//! are all computed from these constants.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::numlin::{
    self, joint_eigen, numeric_rank, singular_values, sqrt_and_inv_sqrt, vec_max_abs, CMatrix, NumError, Tolerance,
    C64, ONE, ZERO,
};
use crate::par::{self, Exec};
use crate::report::ValidationReport;

/// Spectrum entries of `x*∘x` down to `-POSITIVITY_SLACK·(1+‖x‖²)` are accepted.
pub const POSITIVITY_SLACK: f64 = 1e-7;

/// Hard cap on explicit enumeration of orbit classes.
pub const MAX_ORBIT_CLASSES: u128 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CStarError {
    #[error("malformed category: {0}")]
    Shape(String),
    #[error("diagonal algebra of {object} is not a commutative C*-algebra: {reason}")]
    DiagonalNotSemisimple { object: String, reason: String },
    #[error("corner ({a},{b}) at characters ({p},{q}) has dimension {dim} > 1")]
    CornerDimensionExceedsOne { a: String, b: String, p: usize, q: usize, dim: usize },
    #[error("holonomy violation: {0}")]
    HolonomyViolation(String),
    #[error("corners of ({a},{b}) span {found} dimensions, Hom-set has {expected}")]
    IncompleteDecomposition { a: String, b: String, expected: usize, found: usize },
    #[error("bimodule axiom violation: {0}")]
    BimoduleAxiomViolation(String),
    #[error("invalid category: {0}")]
    InvalidCategory(String),
    #[error("too many orbit classes to enumerate ({0})")]
    TooManyClasses(u128),
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCStarCategory {
    objects: Vec<String>,
    dims: Vec<usize>,
    /// Indexed `(a*n+b)*n+c`; entry `(i*d_bc + j)*d_ac + k` is the `k`-th
    /// coordinate of `e_i∘e_j`.
    comp: Vec<Vec<C64>>,
    /// `d_ba × d_ab`, applied to conjugated coordinates.
    invol: Vec<CMatrix>,
    units: Vec<Vec<C64>>,
    labels: Vec<Option<Vec<String>>>,
}

impl FiniteCStarCategory {
    /// All structure constants zero; fill with the `set_*` methods.
    pub fn zeroed(objects: Vec<String>, dims: Vec<Vec<usize>>) -> Result<Self, CStarError> {
        let n = objects.len();
        if n == 0 {
            return Err(CStarError::Shape("no objects".into()));
        }
        let distinct: BTreeSet<&String> = objects.iter().collect();
        if distinct.len() != n {
            return Err(CStarError::Shape("duplicate object names".into()));
        }
        if dims.len() != n || dims.iter().any(|r| r.len() != n) {
            return Err(CStarError::Shape("dims must be an n×n table".into()));
        }
        let flat: Vec<usize> = dims.into_iter().flatten().collect();
        for a in 0..n {
            for b in 0..n {
                if flat[a * n + b] != flat[b * n + a] {
                    return Err(CStarError::Shape(format!("dim({0},{1}) != dim({1},{0})", objects[a], objects[b])));
                }
            }
        }
        let mut comp = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    comp.push(vec![ZERO; flat[a * n + b] * flat[b * n + c] * flat[a * n + c]]);
                }
            }
        }
        let invol = (0..n * n)
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                CMatrix::zeros(flat[b * n + a], flat[a * n + b])
            })
            .collect();
        let units = (0..n).map(|a| vec![ZERO; flat[a * n + a]]).collect();
        Ok(FiniteCStarCategory { objects, dims: flat, comp, invol, units, labels: vec![None; n * n] })
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_index(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn dim(&self, a: usize, b: usize) -> usize {
        self.dims[a * self.n() + b]
    }

    fn cidx(&self, a: usize, b: usize, c: usize) -> usize {
        let n = self.n();
        (a * n + b) * n + c
    }

    /// Sets the coordinates of `e_i∘e_j` for `e_i ∈ C_ab`, `e_j ∈ C_bc`.
    pub fn set_product(&mut self, a: usize, b: usize, c: usize, i: usize, j: usize, value: &[C64]) {
        let (dbc, dac) = (self.dim(b, c), self.dim(a, c));
        assert_eq!(value.len(), dac);
        let idx = self.cidx(a, b, c);
        let off = (i * dbc + j) * dac;
        self.comp[idx][off..off + dac].copy_from_slice(value);
    }

    /// Sets the coordinates (in `C_ba`) of `e_i*` for the basis vector `e_i ∈ C_ab`.
    pub fn set_star(&mut self, a: usize, b: usize, i: usize, value: &[C64]) {
        let n = self.n();
        let m = &mut self.invol[a * n + b];
        assert_eq!(value.len(), m.rows());
        for (r, v) in value.iter().enumerate() {
            m[(r, i)] = *v;
        }
    }

    pub fn set_unit(&mut self, a: usize, value: &[C64]) {
        assert_eq!(value.len(), self.units[a].len());
        self.units[a].copy_from_slice(value);
    }

    pub fn set_labels(&mut self, a: usize, b: usize, labels: Vec<String>) {
        assert_eq!(labels.len(), self.dim(a, b));
        let n = self.n();
        // an empty Hom-set has nothing to label
        self.labels[a * n + b] = (!labels.is_empty()).then_some(labels);
    }

    pub fn labels(&self, a: usize, b: usize) -> Option<&[String]> {
        self.labels[a * self.n() + b].as_deref()
    }

    /// Raw tensor for `(a,b,c)`.
    pub fn comp_tensor(&self, a: usize, b: usize, c: usize) -> &[C64] {
        &self.comp[self.cidx(a, b, c)]
    }

    pub fn invol_matrix(&self, a: usize, b: usize) -> &CMatrix {
        &self.invol[a * self.n() + b]
    }

    pub fn unit(&self, a: usize) -> &[C64] {
        &self.units[a]
    }

    pub fn basis_product(&self, a: usize, b: usize, c: usize, i: usize, j: usize) -> &[C64] {
        let (dbc, dac) = (self.dim(b, c), self.dim(a, c));
        let off = (i * dbc + j) * dac;
        &self.comp[self.cidx(a, b, c)][off..off + dac]
    }

    /// `x∘y` for `x ∈ C_ab`, `y ∈ C_bc`.
    pub fn compose(&self, a: usize, b: usize, c: usize, x: &[C64], y: &[C64]) -> Vec<C64> {
        let (dab, dbc, dac) = (self.dim(a, b), self.dim(b, c), self.dim(a, c));
        assert_eq!(x.len(), dab);
        assert_eq!(y.len(), dbc);
        let t = &self.comp[self.cidx(a, b, c)];
        let mut out = vec![ZERO; dac];
        for (i, xi) in x.iter().enumerate() {
            if *xi == ZERO {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj == ZERO {
                    continue;
                }
                let f = xi * yj;
                let off = (i * dbc + j) * dac;
                for (o, v) in out.iter_mut().zip(&t[off..off + dac]) {
                    *o += f * v;
                }
            }
        }
        out
    }

    /// `x*` for `x ∈ C_ab`, as coordinates in `C_ba`.
    pub fn star(&self, a: usize, b: usize, x: &[C64]) -> Vec<C64> {
        let xc: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.invol_matrix(a, b).mul_vec(&xc)
    }

    /// Matrix of `y ↦ x∘y : C_bc → C_ac`.
    pub fn left_mult(&self, a: usize, b: usize, c: usize, x: &[C64]) -> CMatrix {
        let (dbc, dac) = (self.dim(b, c), self.dim(a, c));
        let mut m = CMatrix::zeros(dac, dbc);
        for j in 0..dbc {
            let col = self.compose(a, b, c, x, &numlin::unit_vector(dbc, j));
            for (k, v) in col.into_iter().enumerate() {
                m[(k, j)] = v;
            }
        }
        m
    }

    /// Matrix of `x ↦ x∘y : C_ab → C_ac`.
    pub fn right_mult(&self, a: usize, b: usize, c: usize, y: &[C64]) -> CMatrix {
        let (dab, dac) = (self.dim(a, b), self.dim(a, c));
        let mut m = CMatrix::zeros(dac, dab);
        for i in 0..dab {
            let col = self.compose(a, b, c, &numlin::unit_vector(dab, i), y);
            for (k, v) in col.into_iter().enumerate() {
                m[(k, i)] = v;
            }
        }
        m
    }

    /// Magnitude of the structure constants, at least 1.
    pub fn scale(&self) -> f64 {
        let t = self.comp.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let j = self.invol.iter().map(CMatrix::max_abs).fold(0.0, f64::max);
        let u = self.units.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        t.max(j).max(u).max(1.0)
    }

    /// Re-expresses the category in new bases: column `k` of `bases[a*n+b]`
    /// is the `k`-th new basis vector of `C_ab` in old coordinates.
    pub fn transport(&self, bases: &[CMatrix]) -> Result<Self, CStarError> {
        let n = self.n();
        if bases.len() != n * n {
            return Err(CStarError::Shape("one basis per Hom-set required".into()));
        }
        let mut inv = Vec::with_capacity(n * n);
        for (ab, t) in bases.iter().enumerate() {
            let d = self.dims[ab];
            if t.rows() != d || t.cols() != d {
                return Err(CStarError::Shape(format!("basis change {ab} has wrong size")));
            }
            inv.push(t.inverse()?);
        }
        let dims = (0..n).map(|a| (0..n).map(|b| self.dim(a, b)).collect()).collect();
        let mut out = Self::zeroed(self.objects.clone(), dims)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (tab, tbc, tac_inv) = (&bases[a * n + b], &bases[b * n + c], &inv[a * n + c]);
                    for i in 0..self.dim(a, b) {
                        let x = tab.column(i);
                        for j in 0..self.dim(b, c) {
                            let z = self.compose(a, b, c, &x, &tbc.column(j));
                            out.set_product(a, b, c, i, j, &tac_inv.mul_vec(&z));
                        }
                    }
                }
                let j = &(&inv[b * n + a] * &self.invol[a * n + b]) * &bases[a * n + b].conj();
                out.invol[a * n + b] = j;
            }
            out.units[a] = inv[a * n + a].mul_vec(&self.units[a]);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// characters of the diagonal algebras

/// A character of `C_AA`, by its values on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalCharacter {
    pub object: usize,
    pub values: Vec<C64>,
}

impl DiagonalCharacter {
    pub fn eval(&self, x: &[C64]) -> C64 {
        numlin::dot(&self.values, x)
    }
}

/// Characters of one diagonal algebra together with the dual minimal idempotents.
#[derive(Clone, Debug)]
pub struct DiagonalSpectrum {
    pub characters: Vec<DiagonalCharacter>,
    /// `idempotents[p]` is `e_p`, with `characters[q](e_p) = δ_pq`.
    pub idempotents: Vec<Vec<C64>>,
}

fn semisimple_err(c: &FiniteCStarCategory, a: usize, reason: impl Into<String>) -> CStarError {
    CStarError::DiagonalNotSemisimple { object: c.objects[a].clone(), reason: reason.into() }
}

/// Multiplicative unital functionals on `C_aa`, in canonical order. The
/// involution is not consulted beyond whitening, so this also works on
/// algebras that fail the C*-axioms (needed to report positivity failures).
fn algebra_characters(c: &FiniteCStarCategory, a: usize, tol: Tolerance) -> Result<Vec<Vec<C64>>, CStarError> {
    let d = c.dim(a, a);
    if d == 0 {
        return Err(semisimple_err(c, a, "zero algebra"));
    }
    let ops: Vec<CMatrix> = (0..d).map(|i| c.left_mult(a, a, a, &numlin::unit_vector(d, i))).collect();
    // trace form <x,y> = tr L(x*∘y) makes every L(x) normal when the algebra is a C*-algebra
    let traces: Vec<C64> = ops.iter().map(CMatrix::trace).collect();
    let mut gram = CMatrix::zeros(d, d);
    for i in 0..d {
        let si = c.star(a, a, &numlin::unit_vector(d, i));
        for j in 0..d {
            let p = c.compose(a, a, a, &si, &numlin::unit_vector(d, j));
            gram[(i, j)] = numlin::dot(&p, &traces);
        }
    }
    let whitened = match hermitian_part_if_close(&gram, tol).map(|g| sqrt_and_inv_sqrt(&g, tol)).transpose()?.flatten()
    {
        Some((s, si)) => ops.iter().map(|m| &(&s * m) * &si).collect::<Vec<_>>(),
        None => ops.clone(),
    };
    let joint = joint_eigen(&whitened, tol).map_err(|e| semisimple_err(c, a, e.to_string()))?;
    let mut chars = joint.values;
    sort_characters(&mut chars);
    Ok(chars)
}

fn hermitian_part_if_close(g: &CMatrix, tol: Tolerance) -> Option<CMatrix> {
    let dev = g.max_diff(&g.adjoint());
    if dev > 100.0 * tol.bound(g.max_abs()) {
        return None;
    }
    Some(CMatrix::from_fn(g.rows(), g.cols(), |r, c| (g[(r, c)] + g[(c, r)].conj()) * 0.5))
}

/// Descending lexicographic order on `(re, im)` of the value tuple.
fn sort_characters(chars: &mut [Vec<C64>]) {
    let scale = chars.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = 1e-7 * scale;
    let cmp_f = |x: f64, y: f64| {
        if (x - y).abs() <= eps {
            std::cmp::Ordering::Equal
        } else {
            y.total_cmp(&x)
        }
    };
    chars.sort_by(|u, v| {
        for (x, y) in u.iter().zip(v) {
            let o = cmp_f(x.re, y.re).then(cmp_f(x.im, y.im));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Worst violation of multiplicativity, unitality and involutivity.
fn character_defect(c: &FiniteCStarCategory, a: usize, values: &[C64]) -> (f64, f64, f64) {
    let d = c.dim(a, a);
    let mut mult: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let p = numlin::dot(values, c.basis_product(a, a, a, i, j));
            mult = mult.max((p - values[i] * values[j]).norm());
        }
        let s = numlin::dot(values, &c.star(a, a, &numlin::unit_vector(d, i)));
        inv = inv.max((s - values[i].conj()).norm());
    }
    let unital = (numlin::dot(values, c.unit(a)) - ONE).norm();
    (mult, unital, inv)
}

/// The `d_AA` characters of `C_AA`, canonically ordered, each checked to be
/// multiplicative, unital and involutive.
pub fn characters_of_diagonal(
    c: &FiniteCStarCategory,
    a: usize,
    tol: Tolerance,
) -> Result<Vec<DiagonalCharacter>, CStarError> {
    let chars = algebra_characters(c, a, tol)?;
    let thr = 1e3 * tol.bound(c.scale());
    for values in &chars {
        let (m, u, i) = character_defect(c, a, values);
        if m > thr || u > thr || i > thr {
            return Err(semisimple_err(
                c,
                a,
                format!("character defect: multiplicative {m:.2e}, unital {u:.2e}, involutive {i:.2e}"),
            ));
        }
    }
    Ok(chars.into_iter().map(|values| DiagonalCharacter { object: a, values }).collect())
}

pub fn diagonal_spectrum(c: &FiniteCStarCategory, a: usize, tol: Tolerance) -> Result<DiagonalSpectrum, CStarError> {
    let characters = characters_of_diagonal(c, a, tol)?;
    let d = c.dim(a, a);
    let w = CMatrix::from_fn(d, d, |p, i| characters[p].values[i]);
    let winv = w.inverse().map_err(|e| semisimple_err(c, a, format!("character matrix: {e}")))?;
    let idempotents = (0..d).map(|p| winv.column(p)).collect();
    Ok(DiagonalSpectrum { characters, idempotents })
}

pub fn diagonal_spectra(c: &FiniteCStarCategory, tol: Tolerance) -> Result<Vec<DiagonalSpectrum>, CStarError> {
    (0..c.n()).map(|a| diagonal_spectrum(c, a, tol)).collect()
}

// ---------------------------------------------------------------------------
// corners and norms

/// Orthonormal (coordinate) basis of `e_p∘C_ab∘e_q`; at most one vector.
pub fn corner(
    c: &FiniteCStarCategory,
    a: usize,
    b: usize,
    e_p: &[C64],
    e_q: &[C64],
    tol: Tolerance,
) -> Result<Vec<Vec<C64>>, CStarError> {
    if c.dim(a, b) == 0 {
        return Ok(Vec::new());
    }
    let proj = &c.left_mult(a, a, b, e_p) * &c.right_mult(a, b, b, e_q);
    let rank = numeric_rank(&proj, tol);
    if rank > 1 {
        return Err(CStarError::CornerDimensionExceedsOne {
            a: c.objects[a].clone(),
            b: c.objects[b].clone(),
            p: usize::MAX,
            q: usize::MAX,
            dim: rank,
        });
    }
    let (_, left) = singular_values(&proj, tol)?;
    Ok(left.into_iter().take(rank).collect())
}

/// C*-norm of `x ∈ C_ab`: `sqrt(max_q q(x*∘x))` over characters of `C_bb`.
pub fn cstar_norm_with(c: &FiniteCStarCategory, spectra: &[DiagonalSpectrum], a: usize, b: usize, x: &[C64]) -> f64 {
    let xx = c.compose(b, a, b, &c.star(a, b, x), x);
    spectra[b].characters.iter().map(|q| q.eval(&xx).re).fold(0.0, f64::max).sqrt()
}

pub fn cstar_norm(c: &FiniteCStarCategory, a: usize, b: usize, x: &[C64], tol: Tolerance) -> Result<f64, CStarError> {
    let spectrum = diagonal_spectrum(c, b, tol)?;
    let xx = c.compose(b, a, b, &c.star(a, b, x), x);
    Ok(spectrum.characters.iter().map(|q| q.eval(&xx).re).fold(0.0, f64::max).sqrt())
}

/// A point of the spectrum inside `C_ab`: the characters it links and the
/// chosen unit vector of its corner.
#[derive(Clone, Debug)]
pub struct CornerPoint {
    pub p: usize,
    pub q: usize,
    /// Unit of the corner: `u*∘u = e_q`, `u∘u* = e_p`. On the diagonal, `e_p`.
    pub unit: Vec<C64>,
    /// `x ↦ q(u*∘x)`, the coefficient of `x` along `unit` after cutting down to the corner.
    pub functional: Vec<C64>,
}

impl CornerPoint {
    pub fn coefficient(&self, x: &[C64]) -> C64 {
        numlin::dot(&self.functional, x)
    }
}

/// All nonzero corners of every Hom-set.
#[derive(Clone, Debug)]
pub struct Decomposition {
    n: usize,
    pub spectra: Vec<DiagonalSpectrum>,
    points: Vec<Vec<CornerPoint>>,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self, a: usize, b: usize) -> &[CornerPoint] {
        &self.points[a * self.n + b]
    }

    /// Index of the point in `(a,b)` whose target character is `p`.
    pub fn link(&self, a: usize, b: usize, p: usize) -> Option<usize> {
        self.points(a, b).iter().position(|pt| pt.p == p)
    }

    pub fn find(&self, a: usize, b: usize, p: usize, q: usize) -> Option<usize> {
        self.points(a, b).iter().position(|pt| pt.p == p && pt.q == q)
    }

    pub fn n_characters(&self, a: usize) -> usize {
        self.spectra[a].characters.len()
    }

    /// Checks that linking is a partial bijection per Hom-set, symmetric
    /// and transitive, so that matched characters form pair groupoids.
    pub fn check_holonomy(&self, objects: &[String]) -> Result<(), CStarError> {
        let n = self.n;
        let err = |msg: String| Err(CStarError::HolonomyViolation(msg));
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let pts = self.points(a, b);
                for (i, x) in pts.iter().enumerate() {
                    for y in &pts[i + 1..] {
                        if x.p == y.p || x.q == y.q {
                            return err(format!(
                                "({},{}) links ({},{}) and ({},{})",
                                objects[a], objects[b], x.p, x.q, y.p, y.q
                            ));
                        }
                    }
                    if self.find(b, a, x.q, x.p).is_none() {
                        return err(format!("({},{}) point ({},{}) has no reverse", objects[a], objects[b], x.p, x.q));
                    }
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a == b || b == c {
                        continue;
                    }
                    for x in self.points(a, b) {
                        for y in self.points(b, c).iter().filter(|y| y.p == x.q) {
                            let closed = if a == c { x.p == y.q } else { self.find(a, c, x.p, y.q).is_some() };
                            if !closed {
                                return err(format!(
                                    "chain {}:{} -> {}:{} -> {}:{} does not close",
                                    objects[a], x.p, objects[b], x.q, objects[c], y.q
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn corner_points(
    c: &FiniteCStarCategory,
    spectra: &[DiagonalSpectrum],
    a: usize,
    b: usize,
    tol: Tolerance,
) -> Result<Vec<CornerPoint>, CStarError> {
    if a == b {
        let s = &spectra[a];
        return Ok((0..s.characters.len())
            .map(|p| CornerPoint {
                p,
                q: p,
                unit: s.idempotents[p].clone(),
                functional: s.characters[p].values.clone(),
            })
            .collect());
    }
    let mut out = Vec::new();
    if c.dim(a, b) == 0 {
        return Ok(out);
    }
    for (p, e_p) in spectra[a].idempotents.iter().enumerate() {
        for (q, e_q) in spectra[b].idempotents.iter().enumerate() {
            let basis = corner(c, a, b, e_p, e_q, tol).map_err(|e| match e {
                CStarError::CornerDimensionExceedsOne { a, b, dim, .. } => {
                    CStarError::CornerDimensionExceedsOne { a, b, p, q, dim }
                }
                other => other,
            })?;
            let Some(mut u) = basis.into_iter().next() else { continue };
            let top = vec_max_abs(&u);
            if let Some(z) = u.iter().copied().find(|z| z.norm() > 1e-6 * top) {
                let ph = z.conj() / z.norm();
                u.iter_mut().for_each(|v| *v *= ph);
            }
            let qchar = &spectra[b].characters[q];
            let uu = qchar.eval(&c.compose(b, a, b, &c.star(a, b, &u), &u));
            if uu.re <= 0.0 {
                return Err(CStarError::InvalidCategory(format!(
                    "corner ({},{}) at ({p},{q}) has non-positive u*u = {uu}",
                    c.objects[a], c.objects[b]
                )));
            }
            let s = 1.0 / uu.re.sqrt();
            u.iter_mut().for_each(|v| *v *= s);
            let ustar = c.star(a, b, &u);
            let lm = c.left_mult(b, a, b, &ustar);
            let functional =
                (0..c.dim(a, b)).map(|i| (0..c.dim(b, b)).map(|k| qchar.values[k] * lm[(k, i)]).sum()).collect();
            out.push(CornerPoint { p, q, unit: u, functional });
        }
    }
    if out.len() != c.dim(a, b) {
        return Err(CStarError::IncompleteDecomposition {
            a: c.objects[a].clone(),
            b: c.objects[b].clone(),
            expected: c.dim(a, b),
            found: out.len(),
        });
    }
    Ok(out)
}

/// Computes characters, idempotents and all corners. Hom-sets are processed
/// independently (in parallel under [`Exec::Parallel`]) and merged in order.
pub fn decompose_with(c: &FiniteCStarCategory, tol: Tolerance, exec: Exec) -> Result<Decomposition, CStarError> {
    let n = c.n();
    let spectra: Vec<DiagonalSpectrum> =
        par::map_range(exec, n, |a| diagonal_spectrum(c, a, tol)).into_iter().collect::<Result<_, _>>()?;
    let points = par::map_range(exec, n * n, |ab| corner_points(c, &spectra, ab / n, ab % n, tol))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let d = Decomposition { n, spectra, points };
    d.check_holonomy(&c.objects)?;
    Ok(d)
}

pub fn decompose(c: &FiniteCStarCategory, tol: Tolerance) -> Result<Decomposition, CStarError> {
    decompose_with(c, tol, Exec::default())
}

// ---------------------------------------------------------------------------
// validation

pub fn validate_category(c: &FiniteCStarCategory, tol: Tolerance) -> ValidationReport {
    let n = c.n();
    let s = c.scale();
    let thr = 100.0 * tol.bound(s * s * s);
    let name = |a: usize| c.objects[a].as_str();
    let mut report = ValidationReport::new("C*-category");

    let chk = report.begin("associativity");
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    for i in 0..c.dim(a, b) {
                        for j in 0..c.dim(b, cc) {
                            let xy = c.basis_product(a, b, cc, i, j).to_vec();
                            for k in 0..c.dim(cc, d) {
                                let ek = numlin::unit_vector(c.dim(cc, d), k);
                                let lhs = c.compose(a, cc, d, &xy, &ek);
                                let yz = c.basis_product(b, cc, d, j, k);
                                let rhs = c.compose(a, b, d, &numlin::unit_vector(c.dim(a, b), i), yz);
                                chk.observe(numlin::vec_max_diff(&lhs, &rhs), thr, || {
                                    format!("{}|{}|{}|{} basis ({i},{j},{k})", name(a), name(b), name(cc), name(d))
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let chk = report.begin("unit_laws");
    for a in 0..n {
        if c.dim(a, a) == 0 {
            chk.fail(format!("{} has a zero diagonal algebra", name(a)));
        }
        for b in 0..n {
            for i in 0..c.dim(a, b) {
                let x = numlin::unit_vector(c.dim(a, b), i);
                let l = c.compose(a, a, b, c.unit(a), &x);
                let r = c.compose(a, b, b, &x, c.unit(b));
                let dev = numlin::vec_max_diff(&l, &x).max(numlin::vec_max_diff(&r, &x));
                chk.observe(dev, thr, || format!("{}|{} basis {i}", name(a), name(b)));
            }
        }
    }

    let chk = report.begin("involution_involutive");
    for a in 0..n {
        for b in 0..n {
            let jj = c.invol_matrix(b, a) * &c.invol_matrix(a, b).conj();
            let dev = jj.max_diff(&CMatrix::identity(c.dim(a, b)));
            chk.observe(dev, thr, || format!("{}|{}", name(a), name(b)));
        }
    }
    // antilinearity is built into the representation x ↦ J·conj(x)
    report.begin("involution_conjugate_linear");

    let chk = report.begin("involution_antimultiplicative");
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for i in 0..c.dim(a, b) {
                    let xs = c.star(a, b, &numlin::unit_vector(c.dim(a, b), i));
                    for j in 0..c.dim(b, cc) {
                        let ys = c.star(b, cc, &numlin::unit_vector(c.dim(b, cc), j));
                        let lhs = c.star(a, cc, c.basis_product(a, b, cc, i, j));
                        let rhs = c.compose(cc, b, a, &ys, &xs);
                        chk.observe(numlin::vec_max_diff(&lhs, &rhs), thr, || {
                            format!("{}|{}|{} basis ({i},{j})", name(a), name(b), name(cc))
                        });
                    }
                }
            }
        }
    }

    let chk = report.begin("involution_unit");
    for a in 0..n {
        let dev = numlin::vec_max_diff(&c.star(a, a, c.unit(a)), c.unit(a));
        chk.observe(dev, thr, || name(a).to_string());
    }

    let chk = report.begin("diagonal_commutative");
    for a in 0..n {
        let d = c.dim(a, a);
        for i in 0..d {
            for j in (i + 1)..d {
                let dev = numlin::vec_max_diff(c.basis_product(a, a, a, i, j), c.basis_product(a, a, a, j, i));
                chk.observe(dev, thr, || format!("{} basis ({i},{j})", name(a)));
            }
        }
    }

    let mut chars: Vec<Option<Vec<Vec<C64>>>> = Vec::with_capacity(n);
    let chk = report.begin("diagonal_semisimple");
    for a in 0..n {
        match algebra_characters(c, a, tol) {
            Ok(ch) if ch.len() == c.dim(a, a) => chars.push(Some(ch)),
            Ok(ch) => {
                chk.fail(format!("{}: {} characters for dimension {}", name(a), ch.len(), c.dim(a, a)));
                chars.push(None);
            }
            Err(e) => {
                chk.fail(format!("{}: {e}", name(a)));
                chars.push(None);
            }
        }
    }

    let chk = report.begin("diagonal_characters_involutive");
    for a in 0..n {
        for (k, values) in chars[a].iter().flatten().enumerate() {
            let (m, u, i) = character_defect(c, a, values);
            chk.observe(m.max(u).max(i), 1e3 * tol.bound(s), || format!("{} character {k}", name(a)));
        }
    }

    let chk = report.begin("positivity");
    for a in 0..n {
        for b in 0..n {
            let Some(qs) = &chars[b] else {
                if c.dim(a, b) > 0 {
                    chk.fail(format!("{}|{}: characters of {} unavailable", name(a), name(b), name(b)));
                }
                continue;
            };
            for i in 0..c.dim(a, b) {
                let x = numlin::unit_vector(c.dim(a, b), i);
                let xx = c.compose(b, a, b, &c.star(a, b, &x), &x);
                let vals: Vec<C64> = qs.iter().map(|q| numlin::dot(q, &xx)).collect();
                let top = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let slack = POSITIVITY_SLACK * (1.0 + top);
                for v in &vals {
                    let dev = (-v.re).max(v.im.abs()).max(0.0);
                    chk.observe(dev, slack, || {
                        format!("{}|{} basis {i}: spectrum value {:.6}{:+.6}i", name(a), name(b), v.re, v.im)
                    });
                }
            }
        }
    }
    report
}

// ---------------------------------------------------------------------------
// orbit classes and characters of the whole category

/// A class of characters `C → ℂ` modulo per-Hom-set phases: one diagonal
/// character per object, grouped by which of them are linked by nonzero corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClass {
    pub assignment: Vec<usize>,
    /// Objects whose chosen characters are mutually linked.
    pub components: Vec<Vec<usize>>,
    /// Ordered pairs `(A,B)`, `A≠B`, on which the class vanishes.
    pub zero_homs: Vec<(usize, usize)>,
}

impl OrbitClass {
    pub fn from_assignment(decomp: &Decomposition, assignment: Vec<usize>) -> Self {
        let n = decomp.n();
        let mut zero_homs = Vec::new();
        let mut comp_of: Vec<Option<usize>> = vec![None; n];
        let mut components: Vec<Vec<usize>> = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && decomp.find(a, b, assignment[a], assignment[b]).is_none() {
                    zero_homs.push((a, b));
                }
            }
        }
        for a in 0..n {
            if comp_of[a].is_some() {
                continue;
            }
            let id = components.len();
            let members: Vec<usize> =
                (0..n).filter(|&b| b == a || decomp.find(a, b, assignment[a], assignment[b]).is_some()).collect();
            for &m in &members {
                comp_of[m] = Some(id);
            }
            components.push(members);
        }
        OrbitClass { assignment, components, zero_homs }
    }

    /// Explicit representative: value 1 on the unit vectors of a spanning
    /// tree rooted at the first object of each component.
    pub fn representative(&self, c: &FiniteCStarCategory, decomp: &Decomposition) -> Character {
        let n = c.n();
        let mut hom_values = vec![Vec::new(); n * n];
        for comp in &self.components {
            let root = comp[0];
            // v(A→B): an element of the (A,B) corner with ω(v) = 1
            let tree = |a: usize| -> Vec<C64> {
                let i = decomp.find(root, a, self.assignment[root], self.assignment[a]).unwrap();
                decomp.points(root, a)[i].unit.clone()
            };
            for &a in comp {
                for &b in comp {
                    let i = decomp.find(a, b, self.assignment[a], self.assignment[b]).unwrap();
                    let pt = &decomp.points(a, b)[i];
                    let v = if a == b {
                        pt.unit.clone()
                    } else if a == root {
                        tree(b)
                    } else if b == root {
                        c.star(root, a, &tree(a))
                    } else {
                        c.compose(a, root, b, &c.star(root, a, &tree(a)), &tree(b))
                    };
                    let scale = pt.coefficient(&v);
                    hom_values[a * n + b] = pt.functional.iter().map(|f| f / scale).collect();
                }
            }
        }
        for &(a, b) in &self.zero_homs {
            hom_values[a * n + b] = vec![ZERO; c.dim(a, b)];
        }
        Character { assignment: self.assignment.clone(), hom_values }
    }
}

/// A *-functor `C → ℂ`, linear on each Hom-set.
#[derive(Clone, Debug)]
pub struct Character {
    pub assignment: Vec<usize>,
    /// Covector on each `C_ab`, indexed `a*n+b`.
    pub hom_values: Vec<Vec<C64>>,
}

impl Character {
    pub fn eval(&self, n: usize, a: usize, b: usize, x: &[C64]) -> C64 {
        numlin::dot(&self.hom_values[a * n + b], x)
    }

    /// Worst violation of multiplicativity, unitality and involutivity over basis pairs.
    pub fn defect(&self, c: &FiniteCStarCategory) -> f64 {
        let n = c.n();
        let mut dev: f64 = 0.0;
        for a in 0..n {
            dev = dev.max((self.eval(n, a, a, c.unit(a)) - ONE).norm());
            for b in 0..n {
                for i in 0..c.dim(a, b) {
                    let x = numlin::unit_vector(c.dim(a, b), i);
                    let wx = self.eval(n, a, b, &x);
                    dev = dev.max((self.eval(n, b, a, &c.star(a, b, &x)) - wx.conj()).norm());
                    for cc in 0..n {
                        for j in 0..c.dim(b, cc) {
                            let wy = self.hom_values[b * n + cc][j];
                            let wxy = self.eval(n, a, cc, c.basis_product(a, b, cc, i, j));
                            dev = dev.max((wxy - wx * wy).norm());
                        }
                    }
                }
            }
        }
        dev
    }
}

/// Every orbit class: one per choice of diagonal character per object.
pub fn enumerate_orbit_classes(c: &FiniteCStarCategory, tol: Tolerance) -> Result<Vec<OrbitClass>, CStarError> {
    let decomp = decompose(c, tol)?;
    enumerate_orbit_classes_with(&decomp)
}

pub fn enumerate_orbit_classes_with(decomp: &Decomposition) -> Result<Vec<OrbitClass>, CStarError> {
    let n = decomp.n();
    let sizes: Vec<usize> = (0..n).map(|a| decomp.n_characters(a)).collect();
    let total: u128 = sizes.iter().map(|&s| s as u128).product();
    if total > MAX_ORBIT_CLASSES {
        return Err(CStarError::TooManyClasses(total));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut assignment = vec![0usize; n];
    loop {
        out.push(OrbitClass::from_assignment(decomp, assignment.clone()));
        // odometer, last object fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < sizes[k] {
                break;
            }
            assignment[k] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// *-functors

#[derive(Clone, Debug)]
pub struct StarFunctor {
    pub source: Arc<FiniteCStarCategory>,
    pub target: Arc<FiniteCStarCategory>,
    pub obj_map: Vec<usize>,
    /// Indexed by source `a*n+b`; shape `d_target(φa,φb) × d_source(a,b)`.
    pub homs: Vec<CMatrix>,
}

impl StarFunctor {
    pub fn new(
        source: Arc<FiniteCStarCategory>,
        target: Arc<FiniteCStarCategory>,
        obj_map: Vec<usize>,
        homs: Vec<CMatrix>,
    ) -> Result<Self, CStarError> {
        let n = source.n();
        if target.n() != n || obj_map.len() != n {
            return Err(CStarError::Shape("functor must be object-bijective".into()));
        }
        let distinct: BTreeSet<usize> = obj_map.iter().copied().collect();
        if distinct.len() != n || obj_map.iter().any(|&t| t >= n) {
            return Err(CStarError::Shape("object map is not a bijection".into()));
        }
        if homs.len() != n * n {
            return Err(CStarError::Shape("one matrix per Hom-set required".into()));
        }
        for a in 0..n {
            for b in 0..n {
                let m = &homs[a * n + b];
                let want = (target.dim(obj_map[a], obj_map[b]), source.dim(a, b));
                if (m.rows(), m.cols()) != want {
                    return Err(CStarError::Shape(format!(
                        "Hom map ({},{}) is {}x{}, expected {}x{}",
                        source.objects[a],
                        source.objects[b],
                        m.rows(),
                        m.cols(),
                        want.0,
                        want.1
                    )));
                }
            }
        }
        Ok(StarFunctor { source, target, obj_map, homs })
    }

    pub fn identity(c: Arc<FiniteCStarCategory>) -> Self {
        let n = c.n();
        let homs = (0..n * n).map(|ab| CMatrix::identity(c.dims[ab])).collect();
        StarFunctor { source: c.clone(), target: c, obj_map: (0..n).collect(), homs }
    }

    pub fn hom(&self, a: usize, b: usize) -> &CMatrix {
        &self.homs[a * self.source.n() + b]
    }

    pub fn apply(&self, a: usize, b: usize, x: &[C64]) -> Vec<C64> {
        self.hom(a, b).mul_vec(x)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &StarFunctor) -> Result<StarFunctor, CStarError> {
        if !same_category(&self.target, &next.source) {
            return Err(CStarError::Shape("functors are not composable".into()));
        }
        let n = self.source.n();
        let obj_map: Vec<usize> = self.obj_map.iter().map(|&t| next.obj_map[t]).collect();
        let homs = (0..n * n)
            .map(|ab| {
                let (a, b) = (ab / n, ab % n);
                next.hom(self.obj_map[a], self.obj_map[b]) * self.hom(a, b)
            })
            .collect();
        Ok(StarFunctor { source: self.source.clone(), target: next.target.clone(), obj_map, homs })
    }

    /// Max entrywise difference of Hom maps; `None` when object maps differ.
    pub fn max_deviation(&self, other: &StarFunctor) -> Option<f64> {
        if self.obj_map != other.obj_map || self.homs.len() != other.homs.len() {
            return None;
        }
        let mut dev: f64 = 0.0;
        for (x, y) in self.homs.iter().zip(&other.homs) {
            if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
                return None;
            }
            dev = dev.max(x.max_diff(y));
        }
        Some(dev)
    }

    /// The same abstract functor after re-basing source and target
    /// (see [`FiniteCStarCategory::transport`]).
    pub fn transported(
        &self,
        source: Arc<FiniteCStarCategory>,
        source_bases: &[CMatrix],
        target: Arc<FiniteCStarCategory>,
        target_bases: &[CMatrix],
    ) -> Result<StarFunctor, CStarError> {
        let n = self.source.n();
        let mut homs = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let tinv = target_bases[self.obj_map[a] * n + self.obj_map[b]].inverse()?;
                homs.push(&(&tinv * self.hom(a, b)) * &source_bases[a * n + b]);
            }
        }
        StarFunctor::new(source, target, self.obj_map.clone(), homs)
    }
}

pub(crate) fn same_category(x: &Arc<FiniteCStarCategory>, y: &Arc<FiniteCStarCategory>) -> bool {
    Arc::ptr_eq(x, y) || **x == **y
}

pub fn check_star_functor(f: &StarFunctor, tol: Tolerance) -> ValidationReport {
    let (src, tgt) = (&*f.source, &*f.target);
    let n = src.n();
    let s = src.scale().max(tgt.scale()) * f.homs.iter().map(CMatrix::max_abs).fold(1.0, f64::max);
    let thr = 100.0 * tol.bound(s * s);
    let name = |a: usize| src.objects[a].as_str();
    let mut report = ValidationReport::new("*-functor");

    let chk = report.begin("object_bijective");
    let distinct: BTreeSet<usize> = f.obj_map.iter().copied().collect();
    if distinct.len() != n {
        chk.fail(format!("object map {:?}", f.obj_map));
    }

    let phi = &f.obj_map;
    let chk = report.begin("composition");
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for i in 0..src.dim(a, b) {
                    let fx = f.hom(a, b).column(i);
                    for j in 0..src.dim(b, c) {
                        let fy = f.hom(b, c).column(j);
                        let lhs = f.apply(a, c, src.basis_product(a, b, c, i, j));
                        let rhs = tgt.compose(phi[a], phi[b], phi[c], &fx, &fy);
                        chk.observe(numlin::vec_max_diff(&lhs, &rhs), thr, || {
                            format!("{}|{}|{} basis ({i},{j})", name(a), name(b), name(c))
                        });
                    }
                }
            }
        }
    }

    let chk = report.begin("units");
    for a in 0..n {
        let dev = numlin::vec_max_diff(&f.apply(a, a, src.unit(a)), tgt.unit(phi[a]));
        chk.observe(dev, thr, || format!("unit of {}", name(a)));
    }

    let chk = report.begin("involution");
    for a in 0..n {
        for b in 0..n {
            for i in 0..src.dim(a, b) {
                let x = numlin::unit_vector(src.dim(a, b), i);
                let lhs = f.apply(b, a, &src.star(a, b, &x));
                let rhs = tgt.star(phi[a], phi[b], &f.apply(a, b, &x));
                chk.observe(numlin::vec_max_diff(&lhs, &rhs), thr, || format!("{}|{} basis {i}", name(a), name(b)));
            }
        }
    }
    report
}

/// Where a *-functor fails to pull a nonvanishing class back to a nonvanishing one.
#[derive(Clone, Debug)]
pub struct DegeneracyWitness {
    /// Orbit class of the target category.
    pub class: OrbitClass,
    /// Source Hom-set on which the pulled-back class vanishes.
    pub hom: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct NonDegeneracy {
    pub non_degenerate: bool,
    pub witness: Option<DegeneracyWitness>,
}

/// Every target class nonzero on `D_{φA,φB}` must stay nonzero on `C_AB`
/// after pulling back along the functor.
pub fn check_non_degenerate(f: &StarFunctor, tol: Tolerance) -> Result<NonDegeneracy, CStarError> {
    let decomp = decompose(&f.target, tol)?;
    Ok(check_non_degenerate_with(f, &decomp, tol))
}

pub fn check_non_degenerate_with(f: &StarFunctor, target: &Decomposition, tol: Tolerance) -> NonDegeneracy {
    let n = f.source.n();
    let scale = f.homs.iter().map(CMatrix::max_abs).fold(1.0, f64::max);
    for a in 0..n {
        for b in 0..n {
            let (ta, tb) = (f.obj_map[a], f.obj_map[b]);
            for pt in target.points(ta, tb) {
                let h = f.hom(a, b);
                let pulled = (0..h.cols())
                    .map(|i| (0..h.rows()).map(|k| pt.functional[k] * h[(k, i)]).sum::<C64>().norm())
                    .fold(0.0, f64::max);
                let fscale = vec_max_abs(&pt.functional).max(1.0) * scale;
                if pulled <= 1e3 * tol.bound(fscale) {
                    let assignment = extend_assignment(target, ta, pt.p, tb, pt.q);
                    return NonDegeneracy {
                        non_degenerate: false,
                        witness: Some(DegeneracyWitness {
                            class: OrbitClass::from_assignment(target, assignment),
                            hom: (a, b),
                        }),
                    };
                }
            }
        }
    }
    NonDegeneracy { non_degenerate: true, witness: None }
}

/// A full assignment containing `a ↦ p`, `b ↦ q`: objects linked to `p`
/// take their linked character, the rest take character 0.
fn extend_assignment(decomp: &Decomposition, a: usize, p: usize, b: usize, q: usize) -> Vec<usize> {
    (0..decomp.n())
        .map(|c| {
            if c == a {
                p
            } else if c == b {
                q
            } else {
                decomp.link(a, c, p).map(|i| decomp.points(a, c)[i].q).unwrap_or(0)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Hilbert bimodules

/// A bimodule `M` over two commutative algebras with `A`- and `B`-valued
/// inner products, `_A<x,y> = x∘y*` and `<x,y>_B = x*∘y`.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertBimodule {
    /// One-object categories.
    pub alg_a: FiniteCStarCategory,
    pub alg_b: FiniteCStarCategory,
    pub module_dim: usize,
    /// `(x*m + i)*m + k`: coordinate `k` of `a_x · m_i`.
    pub left_action: Vec<C64>,
    /// `(i*d_b + y)*m + k`: coordinate `k` of `m_i · b_y`.
    pub right_action: Vec<C64>,
    /// `(i*m + j)*d_a + k`: coordinate `k` of `_A<m_i, m_j>`.
    pub ip_a: Vec<C64>,
    /// `(i*m + j)*d_b + k`: coordinate `k` of `<m_i, m_j>_B`.
    pub ip_b: Vec<C64>,
}

impl HilbertBimodule {
    pub fn new(
        alg_a: FiniteCStarCategory,
        alg_b: FiniteCStarCategory,
        module_dim: usize,
        left_action: Vec<C64>,
        right_action: Vec<C64>,
        ip_a: Vec<C64>,
        ip_b: Vec<C64>,
    ) -> Result<Self, CStarError> {
        if alg_a.n() != 1 || alg_b.n() != 1 {
            return Err(CStarError::Shape("bimodule algebras must have exactly one object".into()));
        }
        let (da, db, m) = (alg_a.dim(0, 0), alg_b.dim(0, 0), module_dim);
        let check = |what: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(CStarError::Shape(format!("{what} has {got} entries, expected {want}")))
            }
        };
        check("left_action", left_action.len(), da * m * m)?;
        check("right_action", right_action.len(), m * db * m)?;
        check("ip_a", ip_a.len(), m * m * da)?;
        check("ip_b", ip_b.len(), m * m * db)?;
        Ok(HilbertBimodule { alg_a, alg_b, module_dim, left_action, right_action, ip_a, ip_b })
    }

    pub fn da(&self) -> usize {
        self.alg_a.dim(0, 0)
    }

    pub fn db(&self) -> usize {
        self.alg_b.dim(0, 0)
    }

    pub fn inner_a(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let (m, da) = (self.module_dim, self.da());
        let mut out = vec![ZERO; da];
        for i in 0..m {
            for j in 0..m {
                let f = x[i] * y[j].conj();
                if f == ZERO {
                    continue;
                }
                for k in 0..da {
                    out[k] += f * self.ip_a[(i * m + j) * da + k];
                }
            }
        }
        out
    }

    pub fn inner_b(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let (m, db) = (self.module_dim, self.db());
        let mut out = vec![ZERO; db];
        for i in 0..m {
            for j in 0..m {
                let f = x[i].conj() * y[j];
                if f == ZERO {
                    continue;
                }
                for k in 0..db {
                    out[k] += f * self.ip_b[(i * m + j) * db + k];
                }
            }
        }
        out
    }

    pub fn act_left(&self, a: &[C64], x: &[C64]) -> Vec<C64> {
        let m = self.module_dim;
        let mut out = vec![ZERO; m];
        for (l, al) in a.iter().enumerate() {
            for (i, xi) in x.iter().enumerate() {
                let f = al * xi;
                if f == ZERO {
                    continue;
                }
                for k in 0..m {
                    out[k] += f * self.left_action[(l * m + i) * m + k];
                }
            }
        }
        out
    }

    pub fn act_right(&self, x: &[C64], b: &[C64]) -> Vec<C64> {
        let (m, db) = (self.module_dim, self.db());
        let mut out = vec![ZERO; m];
        for (i, xi) in x.iter().enumerate() {
            for (l, bl) in b.iter().enumerate() {
                let f = xi * bl;
                if f == ZERO {
                    continue;
                }
                for k in 0..m {
                    out[k] += f * self.right_action[(i * db + l) * m + k];
                }
            }
        }
        out
    }
}

/// Bimodule-level axioms: compatibility of the two inner products with the
/// actions, hermitian symmetry and positivity of both inner products.
pub fn check_bimodule(mb: &HilbertBimodule, tol: Tolerance) -> ValidationReport {
    let m = mb.module_dim;
    let s = mb.alg_a.scale().max(mb.alg_b.scale());
    let thr = 100.0 * tol.bound(s * s * s);
    let e = |i: usize| numlin::unit_vector(m, i);
    let mut report = ValidationReport::new("Hilbert bimodule");

    let chk = report.begin("compatibility");
    for i in 0..m {
        for j in 0..m {
            let ip_a = mb.inner_a(&e(i), &e(j));
            for k in 0..m {
                let lhs = mb.act_left(&ip_a, &e(k));
                let rhs = mb.act_right(&e(i), &mb.inner_b(&e(j), &e(k)));
                chk.observe(numlin::vec_max_diff(&lhs, &rhs), thr, || format!("basis ({i},{j},{k})"));
            }
        }
    }

    let chk = report.begin("hermitian_a");
    for i in 0..m {
        for j in 0..m {
            let lhs = mb.alg_a.star(0, 0, &mb.inner_a(&e(i), &e(j)));
            chk.observe(numlin::vec_max_diff(&lhs, &mb.inner_a(&e(j), &e(i))), thr, || format!("basis ({i},{j})"));
        }
    }
    let chk = report.begin("hermitian_b");
    for i in 0..m {
        for j in 0..m {
            let lhs = mb.alg_b.star(0, 0, &mb.inner_b(&e(i), &e(j)));
            chk.observe(numlin::vec_max_diff(&lhs, &mb.inner_b(&e(j), &e(i))), thr, || format!("basis ({i},{j})"));
        }
    }

    for (name, alg, inner) in [
        ("positivity_a", &mb.alg_a, &(|x: &[C64]| mb.inner_a(x, x)) as &dyn Fn(&[C64]) -> Vec<C64>),
        ("positivity_b", &mb.alg_b, &(|x: &[C64]| mb.inner_b(x, x)) as &dyn Fn(&[C64]) -> Vec<C64>),
    ] {
        let chars = algebra_characters(alg, 0, tol);
        let chk = report.begin(name);
        match chars {
            Err(err) => chk.fail(err.to_string()),
            Ok(chars) => {
                for i in 0..m {
                    let v = inner(&e(i));
                    for q in &chars {
                        let z = numlin::dot(q, &v);
                        let slack = POSITIVITY_SLACK * (1.0 + z.norm());
                        chk.observe((-z.re).max(z.im.abs()).max(0.0), slack, || {
                            format!("basis {i}: value {:.6}{:+.6}i", z.re, z.im)
                        });
                    }
                }
            }
        }
    }
    report
}

/// The two-object category `[[A, M], [M*, B]]`.
pub fn linking_category(mb: &HilbertBimodule, tol: Tolerance) -> Result<FiniteCStarCategory, CStarError> {
    let bimod = check_bimodule(mb, tol);
    if !bimod.is_valid() {
        let failed: Vec<&str> = bimod.failures().map(|c| c.name.as_str()).collect();
        return Err(CStarError::BimoduleAxiomViolation(failed.join(", ")));
    }
    let link = assemble_linking(mb)?;
    let report = validate_category(&link, tol);
    if !report.is_valid() {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(CStarError::BimoduleAxiomViolation(format!("linking category fails {}", failed.join(", "))));
    }
    Ok(link)
}

fn assemble_linking(mb: &HilbertBimodule) -> Result<FiniteCStarCategory, CStarError> {
    let (da, db, m) = (mb.da(), mb.db(), mb.module_dim);
    let (na, nb) = (&mb.alg_a.objects[0], &mb.alg_b.objects[0]);
    let names = if na != nb { vec![na.clone(), nb.clone()] } else { vec!["A".to_string(), "B".to_string()] };
    let mut c = FiniteCStarCategory::zeroed(names, vec![vec![da, m], vec![m, db]])?;
    let (a, b) = (0, 1);
    let idx = c.cidx(a, a, a);
    c.comp[idx] = mb.alg_a.comp[0].clone();
    let idx = c.cidx(b, b, b);
    c.comp[idx] = mb.alg_b.comp[0].clone();
    let idx = c.cidx(a, a, b);
    c.comp[idx] = mb.left_action.clone();
    let idx = c.cidx(a, b, b);
    c.comp[idx] = mb.right_action.clone();
    let idx = c.cidx(a, b, a);
    c.comp[idx] = mb.ip_a.clone();
    let idx = c.cidx(b, a, b);
    c.comp[idx] = mb.ip_b.clone();
    let ja = mb.alg_a.invol_matrix(0, 0);
    let jb = mb.alg_b.invol_matrix(0, 0);
    // m_i* ∘ a_x = (a_x* ∘ m_i)*
    for i in 0..m {
        for x in 0..da {
            let ax_star = ja.column(x);
            let v = mb.act_left(&ax_star, &numlin::unit_vector(m, i));
            let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
            c.set_product(b, a, a, i, x, &conj);
        }
    }
    // b_y ∘ m_i* = (m_i ∘ b_y*)*
    for y in 0..db {
        let by_star = jb.column(y);
        for i in 0..m {
            let w = mb.act_right(&numlin::unit_vector(m, i), &by_star);
            let conj: Vec<C64> = w.iter().map(|z| z.conj()).collect();
            c.set_product(b, b, a, y, i, &conj);
        }
    }
    c.invol[0] = ja.clone();
    c.invol[3] = jb.clone();
    c.invol[1] = CMatrix::identity(m);
    c.invol[2] = CMatrix::identity(m);
    c.units[0] = mb.alg_a.units[0].clone();
    c.units[1] = mb.alg_b.units[0].clone();
    if let Some(l) = mb.alg_a.labels(0, 0) {
        c.set_labels(a, a, l.to_vec());
    }
    if let Some(l) = mb.alg_b.labels(0, 0) {
        c.set_labels(b, b, l.to_vec());
    }
    c.set_labels(a, b, (0..m).map(|i| format!("m{i}")).collect());
    c.set_labels(b, a, (0..m).map(|i| format!("m{i}*")).collect());
    Ok(c)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn complex_numbers_valid() {
        let r = validate_category(&complex_numbers(), tol());
        assert!(r.is_valid(), "{}", r.summary());
    }

    #[test]
    fn full_two_by_two_valid() {
        let r = validate_category(&two_by_two(true), tol());
        assert!(r.is_valid(), "{}", r.summary());
    }

    #[test]
    fn negative_square_fails_positivity() {
        let r = validate_category(&c2_group_basis(-1.0), tol());
        assert!(!r.is_valid());
        let pos = r.check("positivity").unwrap();
        assert!(!pos.passed, "{}", r.summary());
        assert!(pos.witnesses.iter().any(|w| w.contains("-1.000000")), "{:?}", pos.witnesses);
    }

    #[test]
    fn characters_of_c() {
        let ch = characters_of_diagonal(&complex_numbers(), 0, tol()).unwrap();
        assert_eq!(ch.len(), 1);
        assert!((ch[0].values[0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn characters_of_c2_group_basis() {
        // ω(b2)² = ω(b2²) = 1 ⇒ ω(b2) = ±1
        let ch = characters_of_diagonal(&c2_group_basis(1.0), 0, tol()).unwrap();
        assert_eq!(ch.len(), 2);
        assert!((ch[0].values[0] - ONE).norm() < 1e-10 && (ch[0].values[1] - ONE).norm() < 1e-10);
        assert!((ch[1].values[0] - ONE).norm() < 1e-10 && (ch[1].values[1] + ONE).norm() < 1e-10);
    }

    #[test]
    fn characters_of_c3_idempotent_basis() {
        let ch = characters_of_diagonal(&function_algebra("A", &["x", "y", "z"]), 0, tol()).unwrap();
        for (k, c) in ch.iter().enumerate() {
            assert!(numlin::vec_max_diff(&c.values, &numlin::unit_vector(3, k)) < 1e-10);
        }
    }

    #[test]
    fn noninvolutive_characters_rejected() {
        assert!(matches!(
            characters_of_diagonal(&c2_group_basis(-1.0), 0, tol()),
            Err(CStarError::DiagonalNotSemisimple { .. })
        ));
    }

    #[test]
    fn corner_examples() {
        let c = function_algebra("A", &["x", "y"]);
        let s = diagonal_spectrum(&c, 0, tol()).unwrap();
        let same = corner(&c, 0, 0, &s.idempotents[0], &s.idempotents[0], tol()).unwrap();
        assert_eq!(same.len(), 1);
        assert!((same[0][0].norm() - 1.0).abs() < 1e-12 && same[0][1].norm() < 1e-12);
        let cross = corner(&c, 0, 0, &s.idempotents[0], &s.idempotents[1], tol()).unwrap();
        assert!(cross.is_empty());

        let full = two_by_two(true);
        let sp = diagonal_spectra(&full, tol()).unwrap();
        let k = corner(&full, 0, 1, &sp[0].idempotents[0], &sp[1].idempotents[0], tol()).unwrap();
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn corner_of_rank_two_is_rejected() {
        // C_AB = ℂ² over ℂ, ℂ: not a rank-one bundle
        let mut c = FiniteCStarCategory::zeroed(vec!["A".into(), "B".into()], vec![vec![1, 2], vec![2, 1]]).unwrap();
        c.set_product(0, 0, 0, 0, 0, &[ONE]);
        c.set_product(1, 1, 1, 0, 0, &[ONE]);
        for i in 0..2 {
            c.set_product(0, 0, 1, 0, i, &numlin::unit_vector(2, i));
            c.set_product(0, 1, 1, i, 0, &numlin::unit_vector(2, i));
        }
        c.set_unit(0, &[ONE]);
        c.set_unit(1, &[ONE]);
        assert!(matches!(
            corner(&c, 0, 1, &[ONE], &[ONE], tol()),
            Err(CStarError::CornerDimensionExceedsOne { dim: 2, .. })
        ));
    }

    #[test]
    fn norm_examples() {
        let c = c2_group_basis(1.0);
        assert!((cstar_norm(&c, 0, 0, &[ONE, ZERO], tol()).unwrap() - 1.0).abs() < 1e-10);
        assert!((cstar_norm(&c, 0, 0, &[ZERO, ONE], tol()).unwrap() - 1.0).abs() < 1e-10);
        let f = function_algebra("A", &["x", "y"]);
        assert!((cstar_norm(&f, 0, 0, &[cx(3.0), ZERO], tol()).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn orbit_classes_discrete_and_full() {
        let discrete = enumerate_orbit_classes(&two_by_two(false), tol()).unwrap();
        assert_eq!(discrete.len(), 1);
        assert_eq!(discrete[0].zero_homs, vec![(0, 1), (1, 0)]);
        let full = enumerate_orbit_classes(&two_by_two(true), tol()).unwrap();
        assert_eq!(full.len(), 1);
        assert!(full[0].zero_homs.is_empty());
    }

    #[test]
    fn orbit_representatives_are_characters() {
        let c = two_by_two(true);
        let d = decompose(&c, tol()).unwrap();
        for class in enumerate_orbit_classes_with(&d).unwrap() {
            assert!(class.representative(&c, &d).defect(&c) < 1e-9);
        }
    }

    #[test]
    fn functor_checks() {
        let id = StarFunctor::identity(Arc::new(two_by_two(true)));
        assert!(check_star_functor(&id, tol()).is_valid());
        assert!(check_non_degenerate(&id, tol()).unwrap().non_degenerate);

        let emb = diagonal_embedding();
        assert!(check_star_functor(&emb, tol()).is_valid());
        let nd = check_non_degenerate(&emb, tol()).unwrap();
        assert!(!nd.non_degenerate);
        let w = nd.witness.unwrap();
        assert_ne!(w.hom.0, w.hom.1);
        assert!(w.class.zero_homs.is_empty());

        let disc = Arc::new(two_by_two(false));
        assert!(check_non_degenerate(&StarFunctor::identity(disc), tol()).unwrap().non_degenerate);
    }

    #[test]
    fn unit_killing_map_is_not_a_functor() {
        let c = Arc::new(complex_numbers());
        let f = StarFunctor::new(c.clone(), c, vec![0], vec![CMatrix::zeros(1, 1)]).unwrap();
        let r = check_star_functor(&f, tol());
        assert!(!r.check("units").unwrap().passed);
    }

    #[test]
    fn linking_examples() {
        let zero = HilbertBimodule::new(
            function_algebra("A", &["1"]),
            function_algebra("B", &["1"]),
            0,
            vec![],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        let l = linking_category(&zero, tol()).unwrap();
        assert_eq!(l.dim(0, 1), 0);
        assert!(validate_category(&l, tol()).is_valid());

        let one = HilbertBimodule::new(
            function_algebra("A", &["1"]),
            function_algebra("B", &["1"]),
            1,
            vec![ONE],
            vec![ONE],
            vec![ONE],
            vec![ONE],
        )
        .unwrap();
        let l = linking_category(&one, tol()).unwrap();
        let full = two_by_two(true);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(l.comp_tensor(a, b, c), full.comp_tensor(a, b, c));
                }
            }
        }

        let nf = nonfull_bimodule();
        let l = linking_category(&nf, tol()).unwrap();
        assert_eq!(l.comp_tensor(0, 0, 0), nf.alg_a.comp_tensor(0, 0, 0));
        let d = decompose(&l, tol()).unwrap();
        assert_eq!(d.points(0, 1).len(), 2);
    }

    #[test]
    fn broken_bimodule_rejected() {
        let mut nf = nonfull_bimodule();
        nf.ip_b[0] = cx(-1.0);
        assert!(matches!(linking_category(&nf, tol()), Err(CStarError::BimoduleAxiomViolation(_))));
    }
}
