//! The section functor Γ and the spectrum functor Σ.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::cstarcat::{
    check_non_degenerate_with, check_star_functor, decompose_with, CStarError, Decomposition, FiniteCStarCategory,
    StarFunctor,
};
use crate::numlin::{self, CMatrix, Tolerance, C64, ONE, ZERO};
use crate::par::Exec;
use crate::spaceoid::{
    check_morphism, validate_spaceoid, Arrow, FiniteSpaceoid, Point, SpaceoidError, SpaceoidMorphism,
};

/// Pulled-back characters are matched within this distance.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctorError {
    #[error("invalid spaceoid: {0}")]
    InvalidSpaceoid(String),
    #[error("invalid spaceoid morphism: {0}")]
    InvalidMorphism(String),
    #[error("invalid *-functor: {0}")]
    InvalidFunctor(String),
    #[error("invalid category: {0}")]
    InvalidCategory(String),
    #[error("degenerate functor: {0}")]
    DegenerateFunctor(String),
    #[error(transparent)]
    CStar(#[from] CStarError),
    #[error(transparent)]
    Spaceoid(#[from] SpaceoidError),
}

fn failed_checks(r: &crate::report::ValidationReport) -> String {
    r.failures().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// Γ

/// `Γ(S)` in the δ basis. Requires a valid spaceoid.
pub fn sections_category(s: &FiniteSpaceoid, tol: Tolerance) -> Result<FiniteCStarCategory, FunctorError> {
    let report = validate_spaceoid(s, tol);
    if !report.is_valid() {
        return Err(FunctorError::InvalidSpaceoid(failed_checks(&report)));
    }
    Ok(sections_category_unchecked(s))
}

/// `Γ(S)` without validating `S`; composable pairs lacking a composite
/// multiply to zero, arrows lacking an inverse have zero adjoint.
pub fn sections_category_unchecked(s: &FiniteSpaceoid) -> FiniteCStarCategory {
    let n = s.n();
    let dims = (0..n).map(|a| (0..n).map(|b| s.hom_size(a, b)).collect()).collect();
    let mut c = FiniteCStarCategory::zeroed(s.objects().to_vec(), dims).expect("spaceoid objects are distinct");
    for a in 0..n {
        for b in 0..n {
            let dab = s.hom_size(a, b);
            for p in s.arrows(a, b) {
                for cc in 0..n {
                    let dac = s.hom_size(a, cc);
                    for q in s.arrows(b, cc) {
                        let mut v = vec![ZERO; dac];
                        if s.s(p) == s.t(q) {
                            if let Some(r) = s.compose(p, q) {
                                v[r.k] = s.phase(p, q);
                            }
                        }
                        if v.iter().any(|z| *z != ZERO) {
                            c.set_product(a, b, cc, p.k, q.k, &v);
                        }
                    }
                }
                let mut star = vec![ZERO; s.hom_size(b, a)];
                if let Some(ps) = s.inverse(p) {
                    star[ps.k] = s.nu(p);
                }
                c.set_star(a, b, p.k, &star);
            }
            let labels = (0..dab).map(|k| s.id(Arrow::new(a, b, k)).to_string()).collect();
            c.set_labels(a, b, labels);
        }
        c.set_unit(a, &vec![ONE; s.hom_size(a, a)]);
    }
    c
}

/// `Γ_m : Γ(E²) → Γ(E¹)` for `m : E¹ → E²`, between the given section categories.
pub fn gamma_on_morphism_with(
    m: &SpaceoidMorphism,
    gamma1: Arc<FiniteCStarCategory>,
    gamma2: Arc<FiniteCStarCategory>,
) -> Result<StarFunctor, FunctorError> {
    let n = m.source.n();
    let mut inv = vec![0; n];
    for (a, &t) in m.obj_map.iter().enumerate() {
        inv[t] = a;
    }
    let mut homs = Vec::with_capacity(n * n);
    for a2 in 0..n {
        for b2 in 0..n {
            let (a1, b1) = (inv[a2], inv[b2]);
            let mut h = CMatrix::zeros(m.source.hom_size(a1, b1), m.target.hom_size(a2, b2));
            for p in m.source.arrows(a1, b1) {
                h[(p.k, m.map(p).k)] = m.scalar(p);
            }
            homs.push(h);
        }
    }
    Ok(StarFunctor::new(gamma2, gamma1, inv, homs)?)
}

pub fn gamma_on_morphism(m: &SpaceoidMorphism, tol: Tolerance) -> Result<StarFunctor, FunctorError> {
    let report = check_morphism(m, tol);
    if !report.is_valid() {
        return Err(FunctorError::InvalidMorphism(failed_checks(&report)));
    }
    let g1 = Arc::new(sections_category(&m.source, tol)?);
    let g2 = Arc::new(sections_category(&m.target, tol)?);
    gamma_on_morphism_with(m, g1, g2)
}

// ---------------------------------------------------------------------------
// Σ

/// Gel'fand transforms: `x̂(P) = (transform(a,b) · x)[P]` for `x ∈ C_ab`,
/// with points of `X_ab` in spaceoid order.
#[derive(Clone, Debug)]
pub struct GelfandData {
    n: usize,
    transforms: Vec<CMatrix>,
}

impl GelfandData {
    pub fn transform(&self, a: usize, b: usize) -> &CMatrix {
        &self.transforms[a * self.n + b]
    }

    /// `x̂` as a coefficient vector over the points of `X_ab`.
    pub fn hat(&self, a: usize, b: usize, x: &[C64]) -> Vec<C64> {
        self.transform(a, b).mul_vec(x)
    }
}

/// Everything computed while taking the spectrum of a category.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub category: Arc<FiniteCStarCategory>,
    pub spaceoid: Arc<FiniteSpaceoid>,
    pub gelfand: GelfandData,
    pub decomposition: Decomposition,
}

impl Spectrum {
    pub fn new(category: Arc<FiniteCStarCategory>, tol: Tolerance) -> Result<Self, FunctorError> {
        Self::new_with(category, tol, Exec::default())
    }

    pub fn new_with(category: Arc<FiniteCStarCategory>, tol: Tolerance, exec: Exec) -> Result<Self, FunctorError> {
        let decomposition = decompose_with(&category, tol, exec)?;
        let (spaceoid, gelfand) = assemble_spectrum(&category, &decomposition)?;
        Ok(Spectrum { category, spaceoid: Arc::new(spaceoid), gelfand, decomposition })
    }
}

pub fn spectral_spaceoid(
    c: &FiniteCStarCategory,
    tol: Tolerance,
) -> Result<(FiniteSpaceoid, GelfandData), FunctorError> {
    let d = decompose_with(c, tol, Exec::default())?;
    assemble_spectrum(c, &d)
}

fn base_label(c: &FiniteCStarCategory, a: usize, p: usize, values: &[C64]) -> String {
    if let Some(labels) = c.labels(a, a) {
        let hit = (0..values.len())
            .find(|&j| numlin::vec_max_diff(values, &numlin::unit_vector(values.len(), j)) < MATCH_TOL);
        if let Some(j) = hit {
            return labels[j].clone();
        }
    }
    format!("{}{p}", c.objects()[a].to_lowercase())
}

fn assemble_spectrum(
    c: &FiniteCStarCategory,
    d: &Decomposition,
) -> Result<(FiniteSpaceoid, GelfandData), FunctorError> {
    let n = c.n();
    let base: Vec<Vec<String>> = (0..n)
        .map(|a| d.spectra[a].characters.iter().enumerate().map(|(p, ch)| base_label(c, a, p, &ch.values)).collect())
        .collect();
    let mut points = BTreeMap::new();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let pts = d
                .points(a, b)
                .iter()
                .map(|pt| {
                    let back = d.find(b, a, pt.q, pt.p).expect("holonomy checked");
                    let nu = d.points(b, a)[back].coefficient(&c.star(a, b, &pt.unit));
                    Point { id: format!("{}>{}", base[a][pt.p], base[b][pt.q]), t: pt.p, s: pt.q, nu }
                })
                .collect::<Vec<_>>();
            if !pts.is_empty() {
                points.insert((a, b), pts);
            }
        }
    }
    let mut phases = BTreeMap::new();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            for (i, x) in d.points(a, b).iter().enumerate() {
                for cc in (0..n).filter(|&cc| cc != b) {
                    for (j, y) in d.points(b, cc).iter().enumerate().filter(|(_, y)| y.p == x.q) {
                        let Some(k) = d.find(a, cc, x.p, y.q) else { continue };
                        let phase = d.points(a, cc)[k].coefficient(&c.compose(a, b, cc, &x.unit, &y.unit));
                        phases.insert((Arrow::new(a, b, i), Arrow::new(b, cc, j)), phase);
                    }
                }
            }
        }
    }
    let spaceoid = FiniteSpaceoid::new(c.objects().to_vec(), base, points, phases)?;
    let transforms = (0..n * n)
        .map(|ab| {
            let (a, b) = (ab / n, ab % n);
            let pts = d.points(a, b);
            CMatrix::from_fn(pts.len(), c.dim(a, b), |r, col| pts[r].functional[col])
        })
        .collect();
    Ok((spaceoid, GelfandData { n, transforms }))
}

/// `Σ_Φ : Σ(C²) → Σ(C¹)` for `Φ : C¹ → C²`, using precomputed spectra.
pub fn sigma_on_morphism_with(
    f: &StarFunctor,
    spec1: &Spectrum,
    spec2: &Spectrum,
    tol: Tolerance,
) -> Result<SpaceoidMorphism, FunctorError> {
    let n = f.source.n();
    let gate = check_non_degenerate_with(f, &spec2.decomposition, tol);
    if let Some(w) = gate.witness {
        let (a, b) = w.hom;
        return Err(FunctorError::DegenerateFunctor(format!(
            "class {:?} of the target pulls back to zero on Hom({},{})",
            w.class.assignment,
            f.source.objects()[a],
            f.source.objects()[b]
        )));
    }
    let (d1, d2) = (&spec1.decomposition, &spec2.decomposition);
    let mut inv = vec![0; n];
    for (a, &t) in f.obj_map.iter().enumerate() {
        inv[t] = a;
    }
    // base point map: ω ↦ ω∘Φ
    let mut base_map: Vec<Vec<usize>> = Vec::with_capacity(n);
    for a2 in 0..n {
        let a1 = inv[a2];
        let h = f.hom(a1, a1);
        let mut map = Vec::new();
        for ch in &d2.spectra[a2].characters {
            let pulled: Vec<C64> =
                (0..h.cols()).map(|i| (0..h.rows()).map(|k| ch.values[k] * h[(k, i)]).sum()).collect();
            let scale = numlin::vec_max_abs(&pulled).max(1.0);
            let hit = d1.spectra[a1]
                .characters
                .iter()
                .position(|c1| numlin::vec_max_diff(&c1.values, &pulled) <= MATCH_TOL * scale)
                .ok_or_else(|| {
                    FunctorError::InvalidFunctor(format!(
                        "pulled-back character on {} is not a character",
                        f.source.objects()[a1]
                    ))
                })?;
            map.push(hit);
        }
        base_map.push(map);
    }
    let e1 = &spec2.spaceoid;
    let e2 = &spec1.spaceoid;
    let mut arrow_map = vec![Vec::new(); n * n];
    let mut scalars = vec![Vec::new(); n * n];
    for a2 in 0..n {
        for b2 in 0..n {
            let (a1, b1) = (inv[a2], inv[b2]);
            for pt in d2.points(a2, b2) {
                let (tp, tq) = (base_map[a2][pt.p], base_map[b2][pt.q]);
                let k = if a2 == b2 {
                    tp
                } else {
                    d1.find(a1, b1, tp, tq).ok_or_else(|| {
                        FunctorError::DegenerateFunctor(format!(
                            "point {} has no image in Hom({},{})",
                            e1.id(Arrow::new(a2, b2, arrow_map[a2 * n + b2].len())),
                            e2.objects()[a1],
                            e2.objects()[b1]
                        ))
                    })?
                };
                let scalar = if a2 == b2 {
                    ONE
                } else {
                    let u1 = &d1.points(a1, b1)[k].unit;
                    pt.coefficient(&f.apply(a1, b1, u1))
                };
                arrow_map[a2 * n + b2].push(k);
                scalars[a2 * n + b2].push(scalar);
            }
        }
    }
    Ok(SpaceoidMorphism::new(e1.clone(), e2.clone(), inv, arrow_map, scalars)?)
}

pub fn sigma_on_morphism(f: &StarFunctor, tol: Tolerance) -> Result<SpaceoidMorphism, FunctorError> {
    let report = check_star_functor(f, tol);
    if !report.is_valid() {
        return Err(FunctorError::InvalidFunctor(failed_checks(&report)));
    }
    let spec1 = Spectrum::new(f.source.clone(), tol)?;
    let spec2 = Spectrum::new(f.target.clone(), tol)?;
    sigma_on_morphism_with(f, &spec1, &spec2, tol)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::spaceoid::fixtures::point;

    /// `X_A = {1,2}`, `X_B = {1',2',3'}`, one arrow `1 ↔ 1'`.
    pub fn e1() -> FiniteSpaceoid {
        let mut points = BTreeMap::new();
        points.insert((0, 1), vec![point("1>1'", 0, 0)]);
        points.insert((1, 0), vec![point("1'>1", 0, 0)]);
        FiniteSpaceoid::new(
            vec!["A".into(), "B".into()],
            vec![vec!["1".into(), "2".into()], vec!["1'".into(), "2'".into(), "3'".into()]],
            points,
            BTreeMap::new(),
        )
        .unwrap()
    }

    /// Two objects with singleton base sets, fully linked.
    pub fn full_pair() -> FiniteSpaceoid {
        let mut points = BTreeMap::new();
        points.insert((0, 1), vec![point("a>b", 0, 0)]);
        points.insert((1, 0), vec![point("b>a", 0, 0)]);
        FiniteSpaceoid::new(
            vec!["A".into(), "B".into()],
            vec![vec!["a".into()], vec!["b".into()]],
            points,
            BTreeMap::new(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::cstarcat::{enumerate_orbit_classes, fixtures as cat, validate_category};
    use crate::spaceoid::{fixtures::discrete, spaceoids_isomorphic};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn gamma_of_point_is_c() {
        let g = sections_category(&discrete(1), tol()).unwrap();
        assert_eq!(g.dim(0, 0), 1);
        assert_eq!(g.comp_tensor(0, 0, 0), cat::complex_numbers().comp_tensor(0, 0, 0));
    }

    #[test]
    fn gamma_e1_zero_extension() {
        let g = sections_category(&e1(), tol()).unwrap();
        assert_eq!((g.dim(0, 0), g.dim(1, 1), g.dim(0, 1), g.dim(1, 0)), (2, 3, 1, 1));
        assert!(validate_category(&g, tol()).is_valid());
        let delta_p = [ONE];
        assert_eq!(g.compose(0, 0, 1, &[ONE, ZERO], &delta_p), vec![ONE]);
        assert_eq!(g.compose(0, 0, 1, &[ZERO, ONE], &delta_p), vec![ZERO]);
        assert_eq!(g.compose(0, 1, 1, &delta_p, &[ONE, ZERO, ZERO]), vec![ONE]);
        assert_eq!(g.compose(0, 1, 1, &delta_p, &[ZERO, ONE, ZERO]), vec![ZERO]);
    }

    #[test]
    fn gamma_full_pair_is_footnote_target() {
        let g = sections_category(&full_pair(), tol()).unwrap();
        let full = cat::two_by_two(true);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    assert_eq!(g.comp_tensor(a, b, c), full.comp_tensor(a, b, c));
                }
            }
        }
    }

    #[test]
    fn zero_extension_branch_on_invalid_spaceoid() {
        // A→B and B→A points whose composite around the loop is missing
        let mut points = BTreeMap::new();
        points.insert((0, 1), vec![crate::spaceoid::fixtures::point("x", 0, 0)]);
        points.insert((1, 0), vec![crate::spaceoid::fixtures::point("y", 0, 1)]);
        let s = FiniteSpaceoid::new(
            vec!["A".into(), "B".into()],
            vec![vec!["a0".into(), "a1".into()], vec!["b0".into()]],
            points,
            BTreeMap::new(),
        )
        .unwrap();
        assert!(sections_category(&s, tol()).is_err());
        let g = sections_category_unchecked(&s);
        // x∘y would be the loop a0 → a1, which is not a base arrow
        assert_eq!(g.basis_product(0, 1, 0, 0, 0), &[ZERO, ZERO]);
    }

    #[test]
    fn sigma_examples() {
        let (s, _) = spectral_spaceoid(&cat::complex_numbers(), tol()).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(s.base(0).len(), 1);

        let (s, _) = spectral_spaceoid(&cat::two_by_two(true), tol()).unwrap();
        assert_eq!((s.base(0).len(), s.base(1).len(), s.points(0, 1).len()), (1, 1, 1));

        let e = Arc::new(e1());
        let (s, _) = spectral_spaceoid(&sections_category(&e, tol()).unwrap(), tol()).unwrap();
        assert_eq!(s.points(0, 1)[0].id, "1>1'");
        assert!(spaceoids_isomorphic(&e, &Arc::new(s), tol()).unwrap().is_some());
    }

    #[test]
    fn e1_orbit_classes() {
        let g = sections_category(&e1(), tol()).unwrap();
        let classes = enumerate_orbit_classes(&g, tol()).unwrap();
        assert_eq!(classes.len(), 6);
        let linked: Vec<&Vec<usize>> =
            classes.iter().filter(|c| c.zero_homs.is_empty()).map(|c| &c.assignment).collect();
        assert_eq!(linked, vec![&vec![0, 0]]);
    }

    #[test]
    fn gamma_on_morphisms() {
        let e = Arc::new(e1());
        let id = SpaceoidMorphism::identity(e.clone());
        let g = gamma_on_morphism(&id, tol()).unwrap();
        let gid = StarFunctor::identity(g.source.clone());
        assert!(g.max_deviation(&gid).unwrap() < 1e-15);

        let mut neg = SpaceoidMorphism::identity(e.clone());
        neg.scalars[1] = vec![-ONE];
        neg.scalars[2] = vec![-ONE];
        let g = gamma_on_morphism(&neg, tol()).unwrap();
        assert_eq!(g.hom(0, 1)[(0, 0)], -ONE);
        assert_eq!(g.hom(0, 0), &CMatrix::identity(2));
    }

    #[test]
    fn sigma_on_morphisms() {
        let c = Arc::new(sections_category(&e1(), tol()).unwrap());
        let id = StarFunctor::identity(c.clone());
        let m = sigma_on_morphism(&id, tol()).unwrap();
        let mid = SpaceoidMorphism::identity(m.source.clone());
        assert!(m.max_deviation(&mid).unwrap() < 1e-12);

        // rescale C_AB by a unit u, C_BA by conj(u)
        let u = C64::from_polar(1.0, 0.9);
        let mut f = StarFunctor::identity(c);
        f.homs[1] = CMatrix::from_fn(1, 1, |_, _| u);
        f.homs[2] = CMatrix::from_fn(1, 1, |_, _| u.conj());
        assert!(check_star_functor(&f, tol()).is_valid());
        let m = sigma_on_morphism(&f, tol()).unwrap();
        assert_eq!(m.arrow_map, mid.arrow_map);
        assert!((m.scalars[1][0] - u).norm() < 1e-12);
        assert!(check_morphism(&m, tol()).is_valid());
    }

    #[test]
    fn footnote_embedding_is_degenerate() {
        let f = cat::diagonal_embedding();
        assert!(check_star_functor(&f, tol()).is_valid());
        assert!(matches!(sigma_on_morphism(&f, tol()), Err(FunctorError::DegenerateFunctor(_))));
    }
}
