//! The natural isomorphisms `𝔊 : C → Γ(Σ(C))` and `𝔈 : S → Σ(Γ(S))`,
//! their naturality squares, and the spectrum of a Hilbert bimodule.

use std::sync::Arc;

use serde::Serialize;

use crate::cstarcat::{
    cstar_norm_with, diagonal_spectra, linking_category, validate_category, FiniteCStarCategory, HilbertBimodule,
    StarFunctor,
};
use crate::functors::{
    gamma_on_morphism_with, sections_category, sigma_on_morphism_with, FunctorError, Spectrum, MATCH_TOL,
};
use crate::numlin::{self, numeric_rank, CMatrix, Tolerance, C64, ONE};
use crate::par::Exec;
use crate::spaceoid::{check_morphism, validate_spaceoid, Arrow, FiniteSpaceoid, SpaceoidMorphism};

/// Deviation budget for naturality squares and round trips.
pub const NATURALITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct NaturalityReport {
    pub square_identity: f64,
    pub witnesses: Vec<(String, f64)>,
    pub points_match: bool,
    pub passed: bool,
}

impl NaturalityReport {
    fn from_deviations(devs: Vec<(String, f64)>, points_match: bool, threshold: f64) -> Self {
        let square_identity = devs.iter().map(|d| d.1).fold(0.0, f64::max);
        let mut witnesses: Vec<(String, f64)> = devs.into_iter().filter(|d| d.1 > threshold).collect();
        witnesses.truncate(8);
        NaturalityReport {
            square_identity,
            witnesses,
            points_match,
            passed: points_match && square_identity <= threshold,
        }
    }
}

// ---------------------------------------------------------------------------
// 𝔊

/// `𝔊_C` together with the intermediate spectrum and section category.
#[derive(Clone, Debug)]
pub struct GelfandTransform {
    pub spectrum: Spectrum,
    pub sections: Arc<FiniteCStarCategory>,
    pub functor: StarFunctor,
}

/// Per-Hom-set verification of `𝔊_C`.
#[derive(Clone, Debug, Serialize)]
pub struct GelfandCheck {
    pub bijective: bool,
    /// Max of `|‖x̂‖ − ‖x‖| / (1 + ‖x‖)` over basis vectors and their sums.
    pub isometry_deviation: f64,
    /// Max entry of `K·K⁻¹ − 1` over Hom-sets.
    pub inverse_deviation: f64,
    pub star_functor: bool,
}

impl GelfandCheck {
    pub fn passed(&self) -> bool {
        self.bijective
            && self.star_functor
            && self.isometry_deviation <= NATURALITY_TOL
            && self.inverse_deviation <= NATURALITY_TOL
    }
}

pub fn gelfand_transform(c: Arc<FiniteCStarCategory>, tol: Tolerance) -> Result<GelfandTransform, FunctorError> {
    gelfand_transform_with(c, tol, Exec::default())
}

pub fn gelfand_transform_with(
    c: Arc<FiniteCStarCategory>,
    tol: Tolerance,
    exec: Exec,
) -> Result<GelfandTransform, FunctorError> {
    let report = validate_category(&c, tol);
    if !report.is_valid() {
        let failed: Vec<&str> = report.failures().map(|r| r.name.as_str()).collect();
        return Err(FunctorError::InvalidCategory(failed.join(", ")));
    }
    gelfand_transform_of(Spectrum::new_with(c, tol, exec)?, tol)
}

/// `𝔊` from an already computed spectrum (skips category validation).
pub fn gelfand_transform_of(spectrum: Spectrum, tol: Tolerance) -> Result<GelfandTransform, FunctorError> {
    let sections = Arc::new(sections_category(&spectrum.spaceoid, tol)?);
    let c = spectrum.category.clone();
    let n = c.n();
    let homs = (0..n * n).map(|ab| spectrum.gelfand.transform(ab / n, ab % n).clone()).collect();
    let functor = StarFunctor::new(c, sections.clone(), (0..n).collect(), homs)?;
    Ok(GelfandTransform { spectrum, sections, functor })
}

impl GelfandTransform {
    pub fn verify(&self, tol: Tolerance) -> Result<GelfandCheck, FunctorError> {
        let c = &*self.spectrum.category;
        let n = c.n();
        let src_spectra = &self.spectrum.decomposition.spectra;
        let tgt_spectra = diagonal_spectra(&self.sections, tol)?;
        let mut bijective = true;
        let mut isometry: f64 = 0.0;
        let mut inverse_dev: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let k = self.functor.hom(a, b);
                let d = c.dim(a, b);
                if k.rows() != d || numeric_rank(k, tol) != d {
                    bijective = false;
                    continue;
                }
                if d == 0 {
                    continue;
                }
                match k.inverse() {
                    Ok(kinv) => inverse_dev = inverse_dev.max((k * &kinv).max_diff(&CMatrix::identity(d))),
                    Err(_) => bijective = false,
                }
                let mut probes: Vec<Vec<C64>> = (0..d).map(|i| numlin::unit_vector(d, i)).collect();
                probes.push(vec![ONE; d]);
                for x in probes {
                    let nx = cstar_norm_with(c, src_spectra, a, b, &x);
                    let nhat = cstar_norm_with(&self.sections, &tgt_spectra, a, b, &k.mul_vec(&x));
                    isometry = isometry.max((nhat - nx).abs() / (1.0 + nx));
                }
            }
        }
        let star_functor = crate::cstarcat::check_star_functor(&self.functor, tol).is_valid();
        Ok(GelfandCheck { bijective, isometry_deviation: isometry, inverse_deviation: inverse_dev, star_functor })
    }
}

// ---------------------------------------------------------------------------
// 𝔈

/// `𝔈_S` with the section category and its spectrum.
#[derive(Clone, Debug)]
pub struct EvaluationTransform {
    pub sections: Arc<FiniteCStarCategory>,
    pub spectrum: Spectrum,
    pub morphism: SpaceoidMorphism,
}

pub fn evaluation_transform(s: Arc<FiniteSpaceoid>, tol: Tolerance) -> Result<EvaluationTransform, FunctorError> {
    let report = validate_spaceoid(&s, tol);
    if !report.is_valid() {
        let failed: Vec<&str> = report.failures().map(|r| r.name.as_str()).collect();
        return Err(FunctorError::InvalidSpaceoid(failed.join(", ")));
    }
    let sections = Arc::new(sections_category(&s, tol)?);
    let spectrum = Spectrum::new(sections.clone(), tol)?;
    evaluation_transform_with(s, spectrum)
}

/// `𝔈_S` given the spectrum of `Γ(S)` (which must be in the δ basis).
pub fn evaluation_transform_with(
    s: Arc<FiniteSpaceoid>,
    spectrum: Spectrum,
) -> Result<EvaluationTransform, FunctorError> {
    let n = s.n();
    let d = &spectrum.decomposition;
    // ev_x is the coordinate functional at δ_x
    let mut base_map = Vec::with_capacity(n);
    for a in 0..n {
        let size = s.base(a).len();
        let mut map = Vec::with_capacity(size);
        for x in 0..size {
            let ev = numlin::unit_vector(size, x);
            let hit = d.spectra[a]
                .characters
                .iter()
                .position(|ch| numlin::vec_max_diff(&ch.values, &ev) <= MATCH_TOL)
                .ok_or_else(|| FunctorError::InvalidSpaceoid(format!("no character evaluates at {}", s.base(a)[x])))?;
            map.push(hit);
        }
        base_map.push(map);
    }
    let mut arrow_map = vec![Vec::new(); n * n];
    let mut scalars = vec![Vec::new(); n * n];
    for p in s.all_arrows() {
        let (t, u) = (base_map[p.a][s.t(p)], base_map[p.b][s.s(p)]);
        let k = if p.is_base() {
            t
        } else {
            d.find(p.a, p.b, t, u).ok_or_else(|| FunctorError::InvalidSpaceoid(format!("no corner for {}", s.id(p))))?
        };
        let omega = if p.is_base() { ONE } else { d.points(p.a, p.b)[k].unit[p.k] };
        arrow_map[p.a * n + p.b].push(k);
        scalars[p.a * n + p.b].push(omega);
    }
    let morphism = SpaceoidMorphism::new(s, spectrum.spaceoid.clone(), (0..n).collect(), arrow_map, scalars)?;
    Ok(EvaluationTransform { sections: spectrum.category.clone(), spectrum, morphism })
}

impl EvaluationTransform {
    /// `𝔈` is a valid morphism with a valid inverse.
    pub fn is_invertible(&self, tol: Tolerance) -> bool {
        check_morphism(&self.morphism, tol).is_valid()
            && self.morphism.inverse().map(|inv| check_morphism(&inv, tol).is_valid()).unwrap_or(false)
    }
}

// ---------------------------------------------------------------------------
// naturality

/// `Γ_{Σ_Φ} ∘ 𝔊_{C¹} = 𝔊_{C²} ∘ Φ` on every basis vector of `C¹`.
pub fn check_naturality_g(f: &StarFunctor, tol: Tolerance) -> Result<NaturalityReport, FunctorError> {
    let spec1 = Spectrum::new(f.source.clone(), tol)?;
    let spec2 = Spectrum::new(f.target.clone(), tol)?;
    let sigma = sigma_on_morphism_with(f, &spec1, &spec2, tol)?;
    let g1 = gelfand_transform_of(spec1, tol)?;
    let g2 = gelfand_transform_of(spec2, tol)?;
    let gamma = gamma_on_morphism_with(&sigma, g2.sections.clone(), g1.sections.clone())?;
    let (c1, n) = (&*f.source, f.source.n());
    let scale = 1.0 + c1.scale().max(f.target.scale()).max(f.homs.iter().map(CMatrix::max_abs).fold(0.0, f64::max));
    let mut devs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let (fa, fb) = (f.obj_map[a], f.obj_map[b]);
            for i in 0..c1.dim(a, b) {
                let x = numlin::unit_vector(c1.dim(a, b), i);
                let lhs = gamma.apply(a, b, &g1.functor.apply(a, b, &x));
                let rhs = g2.functor.apply(fa, fb, &f.apply(a, b, &x));
                let dev = numlin::vec_max_diff(&lhs, &rhs);
                devs.push((format!("{}|{} basis {i}", c1.objects()[a], c1.objects()[b]), dev));
            }
        }
    }
    Ok(NaturalityReport::from_deviations(devs, true, NATURALITY_TOL * scale))
}

/// `Σ_{Γ_m} ∘ 𝔈_{E¹} = 𝔈_{E²} ∘ m` pointwise and scalar-wise.
pub fn check_naturality_e(m: &SpaceoidMorphism, tol: Tolerance) -> Result<NaturalityReport, FunctorError> {
    let gam1 = Arc::new(sections_category(&m.source, tol)?);
    let gam2 = Arc::new(sections_category(&m.target, tol)?);
    let gamma = gamma_on_morphism_with(m, gam1.clone(), gam2.clone())?;
    let spec1 = Spectrum::new(gam1, tol)?;
    let spec2 = Spectrum::new(gam2, tol)?;
    let ev1 = evaluation_transform_with(m.source.clone(), spec1.clone())?;
    let ev2 = evaluation_transform_with(m.target.clone(), spec2.clone())?;
    // Γ_m : Γ(E²) → Γ(E¹), so Σ_{Γ_m} : Σ(Γ(E¹)) → Σ(Γ(E²))
    let sigma = sigma_on_morphism_with(&gamma, &spec2, &spec1, tol)?;
    let lhs = ev1.morphism.then(&sigma)?;
    let rhs = m.then(&ev2.morphism)?;
    let points_match = lhs.obj_map == rhs.obj_map && lhs.arrow_map == rhs.arrow_map;
    let mut devs = Vec::new();
    if points_match {
        for p in m.source.all_arrows() {
            devs.push((m.source.id(p).to_string(), (lhs.scalar(p) - rhs.scalar(p)).norm()));
        }
    } else {
        for p in m.source.all_arrows() {
            if lhs.map(p) != rhs.map(p) {
                devs.push((format!("{} maps to different points", m.source.id(p)), f64::INFINITY));
            }
        }
    }
    Ok(NaturalityReport::from_deviations(devs, points_match, NATURALITY_TOL))
}

// ---------------------------------------------------------------------------
// bimodules

#[derive(Clone, Debug, Serialize)]
pub struct BimoduleSpectrum {
    pub left_points: Vec<String>,
    pub right_points: Vec<String>,
    /// The partial bijection, as indices into the two spectra.
    pub pairs: Vec<(usize, usize)>,
    pub pair_labels: Vec<(String, String)>,
    /// Unit vector in `M` spanning the fiber over each pair.
    #[serde(skip)]
    pub frames: Vec<Vec<C64>>,
    /// Involution phases `ν` of the pairs in the linking spectrum.
    #[serde(skip)]
    pub phases: Vec<C64>,
    /// `M → sections`, one row per pair.
    #[serde(skip)]
    pub iso: CMatrix,
    pub left_support: Vec<usize>,
    pub right_support: Vec<usize>,
    pub left_full: bool,
    pub right_full: bool,
    pub bijective: bool,
    /// Max deviation of `_A<·,·>` and `<·,·>_B` from their section counterparts.
    pub inner_product_deviation: f64,
}

pub fn bimodule_spectrum(mb: &HilbertBimodule, tol: Tolerance) -> Result<BimoduleSpectrum, FunctorError> {
    let link = Arc::new(linking_category(mb, tol)?);
    let spectrum = Spectrum::new(link.clone(), tol)?;
    let g = gelfand_transform_of(spectrum, tol)?;
    let (s, d) = (&g.spectrum.spaceoid, &g.spectrum.decomposition);
    let m = mb.module_dim;
    let pts = d.points(0, 1);
    let pairs: Vec<(usize, usize)> = pts.iter().map(|pt| (pt.p, pt.q)).collect();
    let pair_labels = pairs.iter().map(|&(p, q)| (s.base(0)[p].clone(), s.base(1)[q].clone())).collect();
    let frames = pts.iter().map(|pt| pt.unit.clone()).collect();
    let phases = (0..pts.len()).map(|k| s.nu(Arrow::new(0, 1, k))).collect();
    let iso = g.functor.hom(0, 1).clone();

    let mut left_support: Vec<usize> = pairs.iter().map(|x| x.0).collect();
    let mut right_support: Vec<usize> = pairs.iter().map(|x| x.1).collect();
    left_support.sort();
    right_support.sort();
    let left_full = left_support.len() == s.base(0).len();
    let right_full = right_support.len() == s.base(1).len();
    let bijective = iso.rows() == m && numeric_rank(&iso, tol) == m;

    // 𝔊 must carry both inner products to the section inner products
    let sec = &g.sections;
    let mut ip_dev: f64 = 0.0;
    for i in 0..m {
        let xi = numlin::unit_vector(m, i);
        let hi = iso.mul_vec(&xi);
        for j in 0..m {
            let xj = numlin::unit_vector(m, j);
            let hj = iso.mul_vec(&xj);
            let a_side = g.functor.apply(0, 0, &mb.inner_a(&xi, &xj));
            let a_sec = sec.compose(0, 1, 0, &hi, &sec.star(0, 1, &hj));
            let b_side = g.functor.apply(1, 1, &mb.inner_b(&xi, &xj));
            let b_sec = sec.compose(1, 0, 1, &sec.star(0, 1, &hi), &hj);
            ip_dev = ip_dev.max(numlin::vec_max_diff(&a_side, &a_sec)).max(numlin::vec_max_diff(&b_side, &b_sec));
        }
    }
    Ok(BimoduleSpectrum {
        left_points: s.base(0).to_vec(),
        right_points: s.base(1).to_vec(),
        pairs,
        pair_labels,
        frames,
        phases,
        iso,
        left_support,
        right_support,
        left_full,
        right_full,
        bijective,
        inner_product_deviation: ip_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstarcat::fixtures as cat;
    use crate::functors::fixtures::{e1, full_pair};
    use crate::spaceoid::{fixtures::discrete, spaceoids_isomorphic};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn gelfand_of_c_and_c2() {
        for c in [cat::complex_numbers(), cat::c2_group_basis(1.0), cat::two_by_two(true), cat::two_by_two(false)] {
            let g = gelfand_transform(Arc::new(c), tol()).unwrap();
            let chk = g.verify(tol()).unwrap();
            assert!(chk.passed(), "{chk:?}");
        }
    }

    #[test]
    fn b2_has_unit_norm_after_transform() {
        let g = gelfand_transform(Arc::new(cat::c2_group_basis(1.0)), tol()).unwrap();
        let hat = g.functor.apply(0, 0, &[numlin::ZERO, ONE]);
        let sup = hat.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gelfand_on_gamma_e1_is_permutation_with_phases() {
        let c = Arc::new(sections_category(&e1(), tol()).unwrap());
        let g = gelfand_transform(c, tol()).unwrap();
        for k in &g.functor.homs {
            for r in 0..k.rows() {
                let mags: Vec<f64> = k.row(r).iter().map(|z| z.norm()).collect();
                assert_eq!(mags.iter().filter(|&&m| (m - 1.0).abs() < 1e-12).count(), 1);
                assert_eq!(mags.iter().filter(|&&m| m < 1e-12).count(), mags.len() - 1);
            }
        }
    }

    #[test]
    fn evaluation_examples() {
        for s in [discrete(1), e1(), full_pair()] {
            let s = Arc::new(s);
            let ev = evaluation_transform(s.clone(), tol()).unwrap();
            assert!(ev.is_invertible(tol()));
            assert!(spaceoids_isomorphic(&s, &ev.spectrum.spaceoid, tol()).unwrap().is_some());
        }
        let ev = evaluation_transform(Arc::new(e1()), tol()).unwrap();
        assert!((ev.morphism.scalars[1][0] - ONE).norm() < 1e-12);
    }

    #[test]
    fn naturality_of_identities() {
        let c = Arc::new(sections_category(&e1(), tol()).unwrap());
        let r = check_naturality_g(&StarFunctor::identity(c), tol()).unwrap();
        assert!(r.passed && r.square_identity < 1e-12, "{r:?}");
        let r = check_naturality_e(&SpaceoidMorphism::identity(Arc::new(e1())), tol()).unwrap();
        assert!(r.passed && r.square_identity < 1e-12, "{r:?}");
    }

    #[test]
    fn naturality_of_rescaling_and_phase_automorphism() {
        let c = Arc::new(sections_category(&e1(), tol()).unwrap());
        let u = C64::from_polar(1.0, -2.2);
        let mut f = StarFunctor::identity(c);
        f.homs[1] = CMatrix::from_fn(1, 1, |_, _| u);
        f.homs[2] = CMatrix::from_fn(1, 1, |_, _| u.conj());
        let r = check_naturality_g(&f, tol()).unwrap();
        assert!(r.passed && r.square_identity <= 1e-9, "{r:?}");

        let mut m = SpaceoidMorphism::identity(Arc::new(e1()));
        m.scalars[1] = vec![u];
        m.scalars[2] = vec![u.conj()];
        assert!(check_morphism(&m, tol()).is_valid());
        let r = check_naturality_e(&m, tol()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn degenerate_functor_has_no_naturality_square() {
        assert!(matches!(
            check_naturality_g(&cat::diagonal_embedding(), tol()),
            Err(FunctorError::DegenerateFunctor(_))
        ));
    }

    #[test]
    fn nonfull_bimodule_spectrum() {
        let r = bimodule_spectrum(&cat::nonfull_bimodule(), tol()).unwrap();
        assert_eq!(r.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(r.pair_labels, vec![("1".to_string(), "1'".to_string()), ("2".to_string(), "2'".to_string())]);
        let right: Vec<&str> = r.right_support.iter().map(|&q| r.right_points[q].as_str()).collect();
        assert_eq!(right, vec!["1'", "2'"]);
        assert!(r.left_full && !r.right_full);
        assert!(r.bijective);
        assert!(r.inner_product_deviation <= 1e-9);
    }
}
