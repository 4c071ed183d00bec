//! Seeded generators with built-in oracles.
//!
//! All randomness comes from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`), so a seed fixes every instance.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::cstarcat::{FiniteCStarCategory, StarFunctor};
use crate::functors::{gamma_on_morphism_with, sections_category_unchecked};
use crate::numlin::{self, CMatrix, C64, ONE};
use crate::spaceoid::{Arrow, FiniteSpaceoid, Point, SpaceoidMorphism};

pub const MAX_OBJECTS: usize = 8;
pub const MAX_BASE: usize = 6;

pub type GenRng = Xoshiro256StarStar;

pub fn rng_for(seed: u64) -> GenRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    Trivial,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scramble {
    None,
    Unitary,
    Invertible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub seed: u64,
    pub n_objects: usize,
    pub max_base: usize,
    pub edge_density: f64,
    pub phase_mode: PhaseMode,
    pub scramble: Scramble,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            n_objects: 3,
            max_base: 3,
            edge_density: 0.6,
            phase_mode: PhaseMode::Random,
            scramble: Scramble::Unitary,
        }
    }
}

impl GenParams {
    pub fn with_seed(seed: u64) -> Self {
        GenParams { seed, ..Default::default() }
    }

    /// Sizes drawn from the seed: up to 5 objects, base sets up to 6.
    pub fn sampled(seed: u64, scramble: Scramble) -> Self {
        let mut rng = rng_for(seed ^ 0x9e37_79b9_7f4a_7c15);
        GenParams {
            seed,
            n_objects: rng.gen_range(1..=5),
            max_base: rng.gen_range(1..=MAX_BASE),
            edge_density: rng.gen_range(0.0..=1.0),
            phase_mode: PhaseMode::Random,
            scramble,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Params(m));
        if self.n_objects == 0 || self.n_objects > MAX_OBJECTS {
            return bad(format!("n_objects must be in 1..={MAX_OBJECTS}"));
        }
        if self.max_base == 0 || self.max_base > MAX_BASE {
            return bad(format!("max_base must be in 1..={MAX_BASE}"));
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return bad("edge_density must be in [0,1]".into());
        }
        Ok(())
    }
}

pub fn object_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

fn base_label(object: &str, i: usize) -> String {
    format!("{}{i}", object.to_lowercase())
}

fn random_phase(rng: &mut GenRng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..TAU))
}

fn random_complex(rng: &mut GenRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Spaceoid whose orbits are the given sets of `(object, base index)`,
/// each a full pair groupoid, with trivial phases.
fn from_orbits(objects: Vec<String>, base: Vec<Vec<String>>, orbits: &[Vec<(usize, usize)>]) -> FiniteSpaceoid {
    let mut points: BTreeMap<(usize, usize), Vec<Point>> = BTreeMap::new();
    for orbit in orbits {
        for &(a, x) in orbit {
            for &(b, y) in orbit {
                if a != b {
                    points.entry((a, b)).or_default().push(Point {
                        id: format!("{}>{}", base[a][x], base[b][y]),
                        t: x,
                        s: y,
                        nu: ONE,
                    });
                }
            }
        }
    }
    FiniteSpaceoid::new(objects, base, points, BTreeMap::new()).expect("orbits define a well-formed spaceoid")
}

fn random_weights(s: &FiniteSpaceoid, rng: &mut GenRng) -> Vec<Vec<C64>> {
    let n = s.n();
    let mut w = s.unit_weights();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            for z in w[a * n + b].iter_mut() {
                *z = random_phase(rng);
            }
        }
    }
    w
}

fn spaceoid_with(p: &GenParams, rng: &mut GenRng) -> FiniteSpaceoid {
    let n = p.n_objects;
    let objects = object_names(n);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=p.max_base)).collect();
    let base: Vec<Vec<String>> = (0..n).map(|a| (0..sizes[a]).map(|i| base_label(&objects[a], i)).collect()).collect();
    let mut free: Vec<Vec<usize>> = sizes.iter().map(|&s| (0..s).collect()).collect();
    let mut orbits = Vec::new();
    for a in 0..n {
        while !free[a].is_empty() {
            let x = free[a].remove(0);
            let mut orbit = vec![(a, x)];
            for b in (a + 1)..n {
                if !free[b].is_empty() && rng.gen_bool(p.edge_density) {
                    let i = rng.gen_range(0..free[b].len());
                    orbit.push((b, free[b].remove(i)));
                }
            }
            orbits.push(orbit);
        }
    }
    let s = from_orbits(objects, base, &orbits);
    match p.phase_mode {
        PhaseMode::Trivial => s,
        PhaseMode::Random => {
            let w = random_weights(&s, rng);
            s.rephase(&w)
        }
    }
}

pub fn gen_spaceoid(p: &GenParams) -> Result<FiniteSpaceoid, HarnessError> {
    p.validate()?;
    Ok(spaceoid_with(p, &mut rng_for(p.seed)))
}

/// Orthonormal columns from a random complex matrix (modified Gram–Schmidt).
fn random_unitary(d: usize, rng: &mut GenRng) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| random_complex(rng)).collect();
        for c in &cols {
            let proj = numlin::dot(&c.iter().map(|z| z.conj()).collect::<Vec<_>>(), &v);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let norm = numlin::vec_norm(&v);
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMatrix::from_columns(d, &cols)
}

fn random_basis(d: usize, mode: Scramble, rng: &mut GenRng) -> CMatrix {
    match mode {
        Scramble::None => CMatrix::identity(d),
        Scramble::Unitary => random_unitary(d, rng),
        Scramble::Invertible => {
            let u1 = random_unitary(d, rng);
            let diag: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..=2.0)).collect();
            let u2 = random_unitary(d, rng);
            &(&u1 * &CMatrix::diag_real(&diag)) * &u2
        }
    }
}

/// `Γ(S)` transported to random bases; also returns the bases.
fn scrambled_sections(
    s: &FiniteSpaceoid,
    mode: Scramble,
    rng: &mut GenRng,
) -> Result<(FiniteCStarCategory, Vec<CMatrix>), HarnessError> {
    let g = sections_category_unchecked(s);
    let n = g.n();
    let bases: Vec<CMatrix> = (0..n * n).map(|ab| random_basis(g.dim(ab / n, ab % n), mode, rng)).collect();
    if mode == Scramble::None {
        return Ok((g, bases));
    }
    Ok((g.transport(&bases)?, bases))
}

/// `(C, oracle)`: `C` is `Γ(oracle)` in scrambled bases.
pub fn gen_category(p: &GenParams) -> Result<(FiniteCStarCategory, FiniteSpaceoid), HarnessError> {
    gen_category_with_bases(p).map(|(c, oracle, _)| (c, oracle))
}

/// [`gen_category`] plus the basis changes: `T_ab · x` are the coordinates
/// of `x ∈ C_ab` in the δ basis of `Γ(oracle)`.
pub fn gen_category_with_bases(
    p: &GenParams,
) -> Result<(FiniteCStarCategory, FiniteSpaceoid, Vec<CMatrix>), HarnessError> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let oracle = spaceoid_with(p, &mut rng);
    let (c, bases) = scrambled_sections(&oracle, p.scramble, &mut rng)?;
    Ok((c, oracle, bases))
}

/// A morphism `E¹ → target`: `E¹` is made of 0, 1 or 2 copies of each orbit
/// of `target` (every object keeps a point), objects are permuted and the
/// frames of `E¹` are randomly rephased.
fn morphism_onto(target: Arc<FiniteSpaceoid>, phase_mode: PhaseMode, rng: &mut GenRng) -> SpaceoidMorphism {
    let n = target.n();
    let orbits = target.orbits();
    let mut mult: Vec<usize> = orbits.iter().map(|_| rng.gen_range(0..=2)).collect();
    for a in 0..n {
        let covered = orbits.iter().zip(&mult).any(|(o, &m)| m > 0 && o.iter().any(|&(b, _)| b == a));
        if !covered {
            let i =
                orbits.iter().position(|o| o.iter().any(|&(b, _)| b == a)).expect("every base point lies in an orbit");
            mult[i] = 1;
        }
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let mut sigma_inv = vec![0; n];
    for (i, &t) in sigma.iter().enumerate() {
        sigma_inv[t] = i;
    }
    let objects = object_names(n);
    let mut base: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut base_src: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut copies = Vec::new();
    for (o, orbit) in orbits.iter().enumerate() {
        for _ in 0..mult[o] {
            let mut members = Vec::with_capacity(orbit.len());
            for &(t, y) in orbit {
                let i = sigma_inv[t];
                members.push((i, base[i].len()));
                let label = base_label(&objects[i], base[i].len());
                base[i].push(label);
                base_src[i].push(y);
            }
            members.sort();
            copies.push(members);
        }
    }
    let plain = from_orbits(objects.clone(), base.clone(), &copies);
    let image = |p: Arrow| -> Arrow {
        target
            .find(sigma[p.a], sigma[p.b], base_src[p.a][plain.t(p)], base_src[p.b][plain.s(p)])
            .expect("copies map onto orbits")
    };
    // pull the target's phases back so that F ≡ 1 is a morphism
    let mut points = BTreeMap::new();
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let pts: Vec<Point> = plain
                .points(a, b)
                .iter()
                .enumerate()
                .map(|(k, pt)| Point { nu: target.nu(image(Arrow::new(a, b, k))), ..pt.clone() })
                .collect();
            if !pts.is_empty() {
                points.insert((a, b), pts);
            }
        }
    }
    let mut phases = BTreeMap::new();
    for (p, q) in plain.composable_pairs() {
        if !p.is_base() && !q.is_base() {
            phases.insert((p, q), target.phase(image(p), image(q)));
        }
    }
    let e1 = Arc::new(FiniteSpaceoid::new(objects, base, points, phases).expect("pulled-back spaceoid"));
    let mut arrow_map = vec![Vec::new(); n * n];
    for p in e1.all_arrows() {
        arrow_map[p.a * n + p.b].push(image(p).k);
    }
    let plain_m = SpaceoidMorphism::new(e1.clone(), target, sigma, arrow_map, e1.unit_weights())
        .expect("shapes agree by construction");
    match phase_mode {
        PhaseMode::Trivial => plain_m,
        PhaseMode::Random => {
            let w = random_weights(&e1, rng);
            SpaceoidMorphism::from_rephase(e1, &w).then(&plain_m).expect("composable by construction")
        }
    }
}

/// A morphism into `gen_spaceoid(p)`.
pub fn gen_morphism(p: &GenParams) -> Result<SpaceoidMorphism, HarnessError> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let target = Arc::new(spaceoid_with(p, &mut rng));
    Ok(morphism_onto(target, p.phase_mode, &mut rng))
}

/// Composable `(m_b : E³ → E², m_a : E² → E¹)` with `E¹ = gen_spaceoid(p)`.
pub fn gen_morphism_pair(p: &GenParams) -> Result<(SpaceoidMorphism, SpaceoidMorphism), HarnessError> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let e1 = Arc::new(spaceoid_with(p, &mut rng));
    let m_a = morphism_onto(e1, p.phase_mode, &mut rng);
    let m_b = morphism_onto(m_a.source.clone(), p.phase_mode, &mut rng);
    Ok((m_b, m_a))
}

/// Composable non-degenerate `(φ : C¹ → C², ψ : C² → C³)`, each the
/// transported image under Γ of a generated spaceoid morphism.
pub fn gen_functor_pair(p: &GenParams) -> Result<(StarFunctor, StarFunctor), HarnessError> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let e1 = Arc::new(spaceoid_with(p, &mut rng));
    let m_a = morphism_onto(e1.clone(), p.phase_mode, &mut rng);
    let m_b = morphism_onto(m_a.source.clone(), p.phase_mode, &mut rng);
    let e2 = m_a.source.clone();
    let e3 = m_b.source.clone();
    let (c1, t1) = scrambled_sections(&e1, p.scramble, &mut rng)?;
    let (c2, t2) = scrambled_sections(&e2, p.scramble, &mut rng)?;
    let (c3, t3) = scrambled_sections(&e3, p.scramble, &mut rng)?;
    let g1 = Arc::new(sections_category_unchecked(&e1));
    let g2 = Arc::new(sections_category_unchecked(&e2));
    let g3 = Arc::new(sections_category_unchecked(&e3));
    let (c1, c2, c3) = (Arc::new(c1), Arc::new(c2), Arc::new(c3));
    let phi = gamma_on_morphism_with(&m_a, g2.clone(), g1)?.transported(c1, &t1, c2.clone(), &t2)?;
    let psi = gamma_on_morphism_with(&m_b, g3, g2)?.transported(c2, &t2, c3, &t3)?;
    Ok((phi, psi))
}

pub fn gen_functor(p: &GenParams) -> Result<StarFunctor, HarnessError> {
    gen_functor_pair(p).map(|(phi, _)| phi)
}

/// Random element of `C_ab`, entries uniform in the unit square.
pub fn random_element(c: &FiniteCStarCategory, a: usize, b: usize, rng: &mut GenRng) -> Vec<C64> {
    (0..c.dim(a, b)).map(|_| random_complex(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstarcat::{check_non_degenerate, check_star_functor, validate_category};
    use crate::numlin::Tolerance;
    use crate::spaceoid::{check_morphism, validate_spaceoid};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn examples() {
        let s = gen_spaceoid(&GenParams { seed: 1, n_objects: 1, ..Default::default() }).unwrap();
        assert_eq!(s.n(), 1);
        let s = gen_spaceoid(&GenParams { seed: 42, n_objects: 2, edge_density: 0.0, ..Default::default() }).unwrap();
        assert!(s.points(0, 1).is_empty());
        let (c, _) = gen_category(&GenParams {
            seed: 3,
            scramble: Scramble::None,
            phase_mode: PhaseMode::Trivial,
            ..Default::default()
        })
        .unwrap();
        assert!(c.labels(0, 0).is_some());
    }

    #[test]
    fn generators_are_deterministic() {
        let p = GenParams::sampled(11, Scramble::Invertible);
        assert_eq!(gen_category(&p).unwrap(), gen_category(&p).unwrap());
        assert_eq!(gen_spaceoid(&p).unwrap(), gen_spaceoid(&p).unwrap());
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..20 {
            let p = GenParams::sampled(seed, Scramble::Invertible);
            assert!(validate_spaceoid(&gen_spaceoid(&p).unwrap(), tol()).is_valid());
            let (c, _) = gen_category(&p).unwrap();
            let r = validate_category(&c, tol());
            assert!(r.is_valid(), "seed {seed}: {}", r.summary());
            let m = gen_morphism(&p).unwrap();
            let r = check_morphism(&m, tol());
            assert!(r.is_valid(), "seed {seed}: {}", r.summary());
            let (phi, psi) = gen_functor_pair(&p).unwrap();
            for f in [&phi, &psi] {
                let r = check_star_functor(f, tol());
                assert!(r.is_valid(), "seed {seed}: {}", r.summary());
                assert!(check_non_degenerate(f, tol()).unwrap().non_degenerate);
            }
        }
    }

    #[test]
    fn bad_params_rejected() {
        assert!(GenParams { n_objects: 9, ..Default::default() }.validate().is_err());
        assert!(GenParams { max_base: 0, ..Default::default() }.validate().is_err());
        assert!(GenParams { edge_density: 1.5, ..Default::default() }.validate().is_err());
    }
}
