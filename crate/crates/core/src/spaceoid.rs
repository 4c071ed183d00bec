//! Finite spaceoids.
//!
//! Over each object `A` sits a finite base set `X_AA`. Arrows `A → B` are
//! points `p` of `X_AB` with target `t(p) ∈ X_AA` and source `s(p) ∈ X_BB`;
//! together with the base points (identities) they form a groupoid of
//! partial bijections. A unit-modulus cocycle `c(p,q)` and an involution
//! phase `ν(p)` record the line-bundle structure: in `Γ(E)`,
//! `δ_p∘δ_q = c(p,q)·δ_pq` and `δ_p* = ν(p)·δ_{p*}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::numlin::{Tolerance, C64, ONE};
use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceoidError {
    #[error("malformed spaceoid: {0}")]
    Shape(String),
    #[error("morphisms are not composable")]
    NotComposable,
    #[error("morphism is not invertible: {0}")]
    NotInvertible(String),
    #[error("isomorphism search limited to {limit} objects, got {got}")]
    TooLarge { limit: usize, got: usize },
}

/// Isomorphism search enumerates object bijections up to this size.
pub const MAX_ISO_OBJECTS: usize = 8;

/// An arrow `A → B`; for `a == b`, `k` indexes the base set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arrow {
    pub a: usize,
    pub b: usize,
    pub k: usize,
}

impl Arrow {
    pub fn new(a: usize, b: usize, k: usize) -> Self {
        Arrow { a, b, k }
    }

    pub fn is_base(&self) -> bool {
        self.a == self.b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub id: String,
    pub t: usize,
    pub s: usize,
    pub nu: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpaceoid {
    objects: Vec<String>,
    base: Vec<Vec<String>>,
    /// Off-diagonal points, indexed `a*n+b`; diagonal entries are empty.
    points: Vec<Vec<Point>>,
    /// Keyed by pairs of off-diagonal arrows; absent entries are 1.
    phases: BTreeMap<(Arrow, Arrow), C64>,
}

impl FiniteSpaceoid {
    pub fn new(
        objects: Vec<String>,
        base: Vec<Vec<String>>,
        points: BTreeMap<(usize, usize), Vec<Point>>,
        phases: BTreeMap<(Arrow, Arrow), C64>,
    ) -> Result<Self, SpaceoidError> {
        let n = objects.len();
        let shape = |m: String| Err(SpaceoidError::Shape(m));
        if n == 0 {
            return shape("no objects".into());
        }
        if objects.iter().collect::<BTreeSet<_>>().len() != n {
            return shape("duplicate object names".into());
        }
        if base.len() != n {
            return shape(format!("{} base sets for {n} objects", base.len()));
        }
        let mut flat = vec![Vec::new(); n * n];
        for ((a, b), pts) in points {
            if a >= n || b >= n {
                return shape(format!("points for unknown object pair ({a},{b})"));
            }
            if a == b && !pts.is_empty() {
                return shape(format!("diagonal Hom({0},{0}) is the base set", objects[a]));
            }
            for p in &pts {
                if p.t >= base[a].len() || p.s >= base[b].len() {
                    return shape(format!("point {} has endpoints out of range", p.id));
                }
            }
            flat[a * n + b] = pts;
        }
        let s = FiniteSpaceoid { objects, base, points: flat, phases: BTreeMap::new() };
        let mut phases_checked = BTreeMap::new();
        for ((p, q), c) in phases {
            if !s.contains(p) || !s.contains(q) || p.is_base() || q.is_base() {
                return shape(format!("phase on invalid arrow pair {p:?}, {q:?}"));
            }
            if p.b != q.a || s.t(q) != s.s(p) {
                return shape(format!("phase on non-composable pair {}, {}", s.id(p), s.id(q)));
            }
            phases_checked.insert((p, q), c);
        }
        Ok(FiniteSpaceoid { phases: phases_checked, ..s })
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn base(&self, a: usize) -> &[String] {
        &self.base[a]
    }

    /// Off-diagonal points of `Hom(a,b)`; empty for `a == b`.
    pub fn points(&self, a: usize, b: usize) -> &[Point] {
        &self.points[a * self.n() + b]
    }

    pub fn hom_size(&self, a: usize, b: usize) -> usize {
        if a == b {
            self.base[a].len()
        } else {
            self.points(a, b).len()
        }
    }

    pub fn arrows(&self, a: usize, b: usize) -> impl Iterator<Item = Arrow> {
        (0..self.hom_size(a, b)).map(move |k| Arrow::new(a, b, k))
    }

    pub fn all_arrows(&self) -> Vec<Arrow> {
        let n = self.n();
        (0..n).flat_map(|a| (0..n).flat_map(move |b| self.arrows(a, b))).collect()
    }

    pub fn contains(&self, p: Arrow) -> bool {
        p.a < self.n() && p.b < self.n() && p.k < self.hom_size(p.a, p.b)
    }

    pub fn t(&self, p: Arrow) -> usize {
        if p.is_base() {
            p.k
        } else {
            self.points(p.a, p.b)[p.k].t
        }
    }

    pub fn s(&self, p: Arrow) -> usize {
        if p.is_base() {
            p.k
        } else {
            self.points(p.a, p.b)[p.k].s
        }
    }

    pub fn id(&self, p: Arrow) -> &str {
        if p.is_base() {
            &self.base[p.a][p.k]
        } else {
            &self.points(p.a, p.b)[p.k].id
        }
    }

    pub fn nu(&self, p: Arrow) -> C64 {
        if p.is_base() {
            ONE
        } else {
            self.points(p.a, p.b)[p.k].nu
        }
    }

    pub fn phase(&self, p: Arrow, q: Arrow) -> C64 {
        self.phases.get(&(p, q)).copied().unwrap_or(ONE)
    }

    pub fn phases(&self) -> &BTreeMap<(Arrow, Arrow), C64> {
        &self.phases
    }

    /// The arrow in `Hom(a,b)` with the given endpoints.
    pub fn find(&self, a: usize, b: usize, t: usize, s: usize) -> Option<Arrow> {
        if a == b {
            return (t == s && t < self.base[a].len()).then_some(Arrow::new(a, a, t));
        }
        self.points(a, b).iter().position(|p| p.t == t && p.s == s).map(|k| Arrow::new(a, b, k))
    }

    /// `p∘q` for `p: A→B`, `q: B→C` with `s(p) = t(q)`.
    pub fn compose(&self, p: Arrow, q: Arrow) -> Option<Arrow> {
        if p.b != q.a || self.s(p) != self.t(q) {
            return None;
        }
        self.find(p.a, q.b, self.t(p), self.s(q))
    }

    pub fn inverse(&self, p: Arrow) -> Option<Arrow> {
        self.find(p.b, p.a, self.s(p), self.t(p))
    }

    /// Composable arrow pairs `(p, q)` with `s(p) = t(q)`.
    pub fn composable_pairs(&self) -> Vec<(Arrow, Arrow)> {
        let n = self.n();
        let mut out = Vec::new();
        for p in self.all_arrows() {
            for c in 0..n {
                for q in self.arrows(p.b, c) {
                    if self.t(q) == self.s(p) {
                        out.push((p, q));
                    }
                }
            }
        }
        out
    }

    /// Orbits of base points under the arrows: sets of `(object, base index)`.
    pub fn orbits(&self) -> Vec<Vec<(usize, usize)>> {
        let n = self.n();
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut out = Vec::new();
        for a in 0..n {
            for x in 0..self.base[a].len() {
                if seen.contains(&(a, x)) {
                    continue;
                }
                let mut orbit = vec![(a, x)];
                seen.insert((a, x));
                let mut i = 0;
                while i < orbit.len() {
                    let (oa, ox) = orbit[i];
                    for b in 0..n {
                        for p in self.points(oa, b) {
                            if p.t == ox && seen.insert((b, p.s)) {
                                orbit.push((b, p.s));
                            }
                        }
                    }
                    i += 1;
                }
                orbit.sort();
                out.push(orbit);
            }
        }
        out
    }

    /// Multiplies the chosen unit sections by `w` (indexed like the arrows,
    /// `w[a*n+b][k]`); diagonal weights must be 1.
    pub fn rephase(&self, w: &[Vec<C64>]) -> FiniteSpaceoid {
        let n = self.n();
        let weight = |p: Arrow| if p.is_base() { ONE } else { w[p.a * n + p.b][p.k] };
        let mut out = self.clone();
        for a in 0..n {
            for b in 0..n {
                for (k, pt) in out.points[a * n + b].iter_mut().enumerate() {
                    let p = Arrow::new(a, b, k);
                    let pstar = self.inverse(p).map(weight).unwrap_or(ONE);
                    pt.nu = pt.nu * weight(p).conj() / pstar;
                }
            }
        }
        let mut phases = BTreeMap::new();
        for (p, q) in self.composable_pairs() {
            if p.is_base() || q.is_base() {
                continue;
            }
            let pq = self.compose(p, q).map(weight).unwrap_or(ONE);
            let c = self.phase(p, q) * weight(p) * weight(q) / pq;
            phases.insert((p, q), c);
        }
        out.phases = phases;
        out
    }

    /// Trivial-weight table shaped for [`FiniteSpaceoid::rephase`].
    pub fn unit_weights(&self) -> Vec<Vec<C64>> {
        let n = self.n();
        (0..n * n).map(|ab| vec![ONE; self.hom_size(ab / n, ab % n)]).collect()
    }

    /// Same objects, base labels, point ids and endpoints; phases within `eps`.
    pub fn approx_eq(&self, other: &FiniteSpaceoid, eps: f64) -> bool {
        if self.objects != other.objects || self.base != other.base {
            return false;
        }
        for (x, y) in self.points.iter().zip(&other.points) {
            if x.len() != y.len() {
                return false;
            }
            for (p, q) in x.iter().zip(y) {
                if p.id != q.id || p.t != q.t || p.s != q.s || (p.nu - q.nu).norm() > eps {
                    return false;
                }
            }
        }
        self.composable_pairs().into_iter().all(|(p, q)| (self.phase(p, q) - other.phase(p, q)).norm() <= eps)
    }

    /// Largest `|c - 1|` or `|ν - 1|`.
    pub fn phase_triviality(&self) -> f64 {
        let c = self.phases.values().map(|c| (c - ONE).norm()).fold(0.0, f64::max);
        let nu = self.points.iter().flatten().map(|p| (p.nu - ONE).norm()).fold(0.0, f64::max);
        c.max(nu)
    }
}

pub fn validate_spaceoid(s: &FiniteSpaceoid, tol: Tolerance) -> ValidationReport {
    let n = s.n();
    let thr = 100.0 * tol.bound(1.0);
    let arrows = s.all_arrows();
    let pairs = s.composable_pairs();
    let mut report = ValidationReport::new("spaceoid");

    let chk = report.begin("base_nonempty");
    for a in 0..n {
        if s.base(a).is_empty() {
            chk.fail(format!("X_{0}{0} is empty", s.objects[a]));
        }
    }

    let chk = report.begin("source_target_injective");
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            let pts = s.points(a, b);
            let ts: BTreeSet<usize> = pts.iter().map(|p| p.t).collect();
            let ss: BTreeSet<usize> = pts.iter().map(|p| p.s).collect();
            if ts.len() != pts.len() || ss.len() != pts.len() {
                chk.fail(format!("Hom({},{}) has repeated endpoints", s.objects[a], s.objects[b]));
            }
        }
    }

    let chk = report.begin("inverses");
    for &p in &arrows {
        if s.inverse(p).is_none() {
            chk.fail(format!("{} has no inverse", s.id(p)));
        }
    }

    let chk = report.begin("closure");
    for &(p, q) in &pairs {
        if p.a != q.b && s.compose(p, q).is_none() {
            chk.fail(format!("{} ∘ {} has no composite", s.id(p), s.id(q)));
        }
    }

    let chk = report.begin("holonomy");
    for &(p, q) in &pairs {
        if p.a == q.b && s.t(p) != s.s(q) {
            chk.fail(format!("loop {} ∘ {} returns to a different base point", s.id(p), s.id(q)));
        }
    }

    let chk = report.begin("unit_modulus");
    for &p in &arrows {
        chk.observe((s.nu(p).norm() - 1.0).abs(), thr, || format!("|ν({})| != 1", s.id(p)));
    }
    for (&(p, q), c) in s.phases() {
        chk.observe((c.norm() - 1.0).abs(), thr, || format!("|c({},{})| != 1", s.id(p), s.id(q)));
    }

    let chk = report.begin("involution_phase");
    for &p in &arrows {
        if let Some(ps) = s.inverse(p) {
            let dev = (s.nu(p) * s.phase(p, ps) - ONE).norm();
            chk.observe(dev, thr, || format!("ν({0})·c({0},{0}*) != 1", s.id(p)));
        }
    }

    let chk = report.begin("involution_symmetric");
    for &p in &arrows {
        if let Some(ps) = s.inverse(p) {
            chk.observe((s.nu(ps) - s.nu(p)).norm(), thr, || format!("ν({0}*) != ν({0})", s.id(p)));
        }
    }

    let chk = report.begin("involution_compatible");
    for &(p, q) in &pairs {
        let (Some(pq), Some(ps), Some(qs)) = (s.compose(p, q), s.inverse(p), s.inverse(q)) else { continue };
        let lhs = s.phase(p, q).conj() * s.nu(pq);
        let rhs = s.nu(p) * s.nu(q) * s.phase(qs, ps);
        chk.observe((lhs - rhs).norm(), thr, || format!("involution vs cocycle at ({}, {})", s.id(p), s.id(q)));
    }

    let chk = report.begin("cocycle");
    for &(p, q) in &pairs {
        let Some(pq) = s.compose(p, q) else { continue };
        for c in 0..n {
            for r in s.arrows(q.b, c) {
                if s.t(r) != s.s(q) {
                    continue;
                }
                let (Some(qr), Some(_)) = (s.compose(q, r), s.compose(pq, r)) else { continue };
                let lhs = s.phase(p, q) * s.phase(pq, r);
                let rhs = s.phase(q, r) * s.phase(p, qr);
                chk.observe((lhs - rhs).norm(), thr, || format!("cocycle at ({}, {}, {})", s.id(p), s.id(q), s.id(r)));
            }
        }
    }

    // finite discrete spaces: every map is continuous and proper
    report.begin("converging");
    report.begin("vanishing_at_infinity");
    report
}

/// `(f, F): E¹ → E²`. On sections it acts contravariantly,
/// `δ_q ↦ Σ_{f(p)=q} F_p·δ_p`.
#[derive(Clone, Debug)]
pub struct SpaceoidMorphism {
    pub source: Arc<FiniteSpaceoid>,
    pub target: Arc<FiniteSpaceoid>,
    pub obj_map: Vec<usize>,
    /// Indexed by source `a*n+b`: arrow index in `Hom(φa,φb)` of the image.
    pub arrow_map: Vec<Vec<usize>>,
    /// Indexed like `arrow_map`; 1 on base points.
    pub scalars: Vec<Vec<C64>>,
}

fn same_spaceoid(x: &Arc<FiniteSpaceoid>, y: &Arc<FiniteSpaceoid>) -> bool {
    Arc::ptr_eq(x, y) || x.approx_eq(y, 1e-9)
}

impl SpaceoidMorphism {
    pub fn new(
        source: Arc<FiniteSpaceoid>,
        target: Arc<FiniteSpaceoid>,
        obj_map: Vec<usize>,
        arrow_map: Vec<Vec<usize>>,
        scalars: Vec<Vec<C64>>,
    ) -> Result<Self, SpaceoidError> {
        let n = source.n();
        let shape = |m: String| Err(SpaceoidError::Shape(m));
        if target.n() != n || obj_map.len() != n || obj_map.iter().any(|&t| t >= n) {
            return shape("object map must be a bijection between object sets".into());
        }
        if obj_map.iter().collect::<BTreeSet<_>>().len() != n {
            return shape("object map is not injective".into());
        }
        if arrow_map.len() != n * n || scalars.len() != n * n {
            return shape("arrow maps and scalars needed for every Hom-set".into());
        }
        for a in 0..n {
            for b in 0..n {
                let ab = a * n + b;
                let size = source.hom_size(a, b);
                if arrow_map[ab].len() != size || scalars[ab].len() != size {
                    return shape(format!("Hom({},{}) map has wrong length", source.objects[a], source.objects[b]));
                }
                let tsize = target.hom_size(obj_map[a], obj_map[b]);
                if arrow_map[ab].iter().any(|&k| k >= tsize) {
                    return shape(format!("Hom({},{}) maps out of range", source.objects[a], source.objects[b]));
                }
            }
        }
        Ok(SpaceoidMorphism { source, target, obj_map, arrow_map, scalars })
    }

    pub fn identity(s: Arc<FiniteSpaceoid>) -> Self {
        let n = s.n();
        let arrow_map = (0..n * n).map(|ab| (0..s.hom_size(ab / n, ab % n)).collect()).collect();
        let scalars = s.unit_weights();
        SpaceoidMorphism { source: s.clone(), target: s, obj_map: (0..n).collect(), arrow_map, scalars }
    }

    /// The identity-on-points morphism `rephase(S, w) → S`, with `F = conj(w)`.
    pub fn from_rephase(s: Arc<FiniteSpaceoid>, w: &[Vec<C64>]) -> Self {
        let rephased = Arc::new(s.rephase(w));
        let mut m = SpaceoidMorphism::identity(s.clone());
        m.source = rephased;
        let n = s.n();
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                m.scalars[a * n + b] = w[a * n + b].iter().map(|z| z.conj()).collect();
            }
        }
        m
    }

    pub fn map(&self, p: Arrow) -> Arrow {
        let n = self.source.n();
        Arrow::new(self.obj_map[p.a], self.obj_map[p.b], self.arrow_map[p.a * n + p.b][p.k])
    }

    pub fn scalar(&self, p: Arrow) -> C64 {
        self.scalars[p.a * self.source.n() + p.b][p.k]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &SpaceoidMorphism) -> Result<SpaceoidMorphism, SpaceoidError> {
        if !same_spaceoid(&self.target, &next.source) {
            return Err(SpaceoidError::NotComposable);
        }
        let n = self.source.n();
        let mut arrow_map = vec![Vec::new(); n * n];
        let mut scalars = vec![Vec::new(); n * n];
        for p in self.source.all_arrows() {
            let fp = self.map(p);
            let gfp = next.map(fp);
            arrow_map[p.a * n + p.b].push(gfp.k);
            scalars[p.a * n + p.b].push(self.scalar(p) * next.scalar(fp));
        }
        let obj_map = self.obj_map.iter().map(|&t| next.obj_map[t]).collect();
        Ok(SpaceoidMorphism { source: self.source.clone(), target: next.target.clone(), obj_map, arrow_map, scalars })
    }

    pub fn inverse(&self) -> Result<SpaceoidMorphism, SpaceoidError> {
        let n = self.source.n();
        let mut inv_obj = vec![0; n];
        for (a, &t) in self.obj_map.iter().enumerate() {
            inv_obj[t] = a;
        }
        let mut arrow_map: Vec<Vec<Option<usize>>> =
            (0..n * n).map(|ab| vec![None; self.target.hom_size(ab / n, ab % n)]).collect();
        let mut scalars = self.target.unit_weights();
        for p in self.source.all_arrows() {
            let q = self.map(p);
            let slot = &mut arrow_map[q.a * n + q.b][q.k];
            if slot.is_some() {
                return Err(SpaceoidError::NotInvertible(format!("{} is hit twice", self.target.id(q))));
            }
            *slot = Some(p.k);
            scalars[q.a * n + q.b][q.k] = ONE / self.scalar(p);
        }
        let arrow_map = arrow_map
            .into_iter()
            .enumerate()
            .map(|(ab, m)| {
                m.into_iter()
                    .enumerate()
                    .map(|(k, x)| {
                        x.ok_or_else(|| {
                            SpaceoidError::NotInvertible(format!(
                                "{} is not hit",
                                self.target.id(Arrow::new(ab / n, ab % n, k))
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpaceoidMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            obj_map: inv_obj,
            arrow_map,
            scalars,
        })
    }

    /// Largest difference in scalars; `None` unless the underlying maps agree.
    pub fn max_deviation(&self, other: &SpaceoidMorphism) -> Option<f64> {
        if self.obj_map != other.obj_map || self.arrow_map != other.arrow_map {
            return None;
        }
        Some(
            self.scalars
                .iter()
                .flatten()
                .zip(other.scalars.iter().flatten())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max),
        )
    }
}

pub fn check_morphism(m: &SpaceoidMorphism, tol: Tolerance) -> ValidationReport {
    let (e1, e2) = (&*m.source, &*m.target);
    let n = e1.n();
    let thr = 100.0 * tol.bound(1.0);
    let mut report = ValidationReport::new("spaceoid morphism");

    let chk = report.begin("endpoints_preserved");
    for p in e1.all_arrows() {
        let fp = m.map(p);
        let ft = m.map(Arrow::new(p.a, p.a, e1.t(p)));
        let fs = m.map(Arrow::new(p.b, p.b, e1.s(p)));
        if e2.t(fp) != ft.k || e2.s(fp) != fs.k {
            chk.fail(format!("{} ↦ {} moves endpoints", e1.id(p), e2.id(fp)));
        }
    }

    let chk = report.begin("arrow_lifting");
    // every factorisation of an image arrow lifts: f(p) = q1∘q2 forces p = p1∘p2
    for p in e1.all_arrows() {
        let fp = m.map(p);
        for c in 0..n {
            for q2 in e2.arrows(m.obj_map[c], fp.b) {
                if e2.s(q2) != e2.s(fp) {
                    continue;
                }
                // q1 = fp ∘ q2*, lift must be an arrow p1 : a → c with f(p1) = q1, t(p1) = t(p)
                let lift = e1.arrows(p.a, c).find(|&p1| {
                    e1.t(p1) == e1.t(p)
                        && m.map(p1).k == {
                            match e2.inverse(q2).and_then(|q2s| e2.compose(fp, q2s)) {
                                Some(q1) => q1.k,
                                None => usize::MAX,
                            }
                        }
                });
                if lift.is_none() {
                    chk.fail(format!("{} has no lift through {}", e1.id(p), e1.objects[c]));
                }
            }
        }
    }

    let chk = report.begin("unit_modulus");
    for p in e1.all_arrows() {
        chk.observe((m.scalar(p).norm() - 1.0).abs(), thr, || format!("|F({})| != 1", e1.id(p)));
    }

    let chk = report.begin("base_scalars");
    for a in 0..n {
        for p in e1.arrows(a, a) {
            chk.observe((m.scalar(p) - ONE).norm(), thr, || format!("F({}) != 1", e1.id(p)));
        }
    }

    let chk = report.begin("cocycle_intertwined");
    for (p, q) in e1.composable_pairs() {
        let Some(pq) = e1.compose(p, q) else { continue };
        let lhs = m.scalar(pq) * e2.phase(m.map(p), m.map(q));
        let rhs = m.scalar(p) * m.scalar(q) * e1.phase(p, q);
        chk.observe((lhs - rhs).norm(), thr, || {
            format!("F({0}{1})c(f{0},f{1}) != F{0}F{1}c({0},{1})", e1.id(p), e1.id(q))
        });
    }

    let chk = report.begin("involution_intertwined");
    for p in e1.all_arrows() {
        let Some(ps) = e1.inverse(p) else { continue };
        let lhs = e2.nu(m.map(p)) * m.scalar(ps);
        let rhs = m.scalar(p).conj() * e1.nu(p);
        chk.observe((lhs - rhs).norm(), thr, || format!("involution at {}", e1.id(p)));
    }
    report
}

/// Weights `w` such that `s.rephase(w)` has trivial `c` and `ν`: per orbit,
/// rooted at its smallest object `r`, `u'_{r→B} = u_{r→B}`,
/// `u'_{B→r} = u_{r→B}*`, `u'_{B→C} = u'_{B→r}∘u'_{r→C}`.
pub fn gauge_weights(s: &FiniteSpaceoid) -> Vec<Vec<C64>> {
    let n = s.n();
    let mut w = s.unit_weights();
    for orbit in s.orbits() {
        let (r, x) = orbit[0];
        let root_arrow = |b: usize, y: usize| s.find(r, b, x, y).expect("orbit member is reachable from its root");
        for &(b, y) in &orbit {
            for &(c, z) in &orbit {
                if b == c {
                    continue;
                }
                let p = s.find(b, c, y, z).expect("orbit is a pair groupoid");
                let weight = if b == r {
                    ONE
                } else if c == r {
                    s.nu(root_arrow(b, y))
                } else {
                    let to_root = s.inverse(root_arrow(b, y)).expect("inverse");
                    s.nu(root_arrow(b, y)) * s.phase(to_root, root_arrow(c, z))
                };
                w[b * n + c][p.k] = weight;
            }
        }
    }
    w
}

/// Gauge-fixed copy together with the morphism from it back to `s`.
pub fn gauge_fix(s: &Arc<FiniteSpaceoid>) -> (Arc<FiniteSpaceoid>, SpaceoidMorphism) {
    let w = gauge_weights(s);
    let m = SpaceoidMorphism::from_rephase(s.clone(), &w);
    (m.source.clone(), m)
}

/// Searches for an isomorphism `s1 → s2`. Both must be valid spaceoids.
pub fn spaceoids_isomorphic(
    s1: &Arc<FiniteSpaceoid>,
    s2: &Arc<FiniteSpaceoid>,
    tol: Tolerance,
) -> Result<Option<SpaceoidMorphism>, SpaceoidError> {
    let n = s1.n();
    if s2.n() != n {
        return Ok(None);
    }
    if n > MAX_ISO_OBJECTS {
        return Err(SpaceoidError::TooLarge { limit: MAX_ISO_OBJECTS, got: n });
    }
    let (g1, m1) = gauge_fix(s1);
    let (g2, m2) = gauge_fix(s2);
    let orbits1 = g1.orbits();
    let orbits2 = g2.orbits();
    if orbits1.len() != orbits2.len() {
        return Ok(None);
    }
    let supports = |orbits: &[Vec<(usize, usize)>]| -> Vec<Vec<usize>> {
        orbits.iter().map(|o| o.iter().map(|&(a, _)| a).collect()).collect()
    };
    let (sup1, sup2) = (supports(&orbits1), supports(&orbits2));
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if !search_permutation(0, &mut perm, &mut used, &sup1, &sup2) {
        return Ok(None);
    }
    // match orbits with equal (permuted) supports
    let mut taken = vec![false; orbits2.len()];
    let mut base_map: Vec<Vec<usize>> = (0..n).map(|a| vec![usize::MAX; g1.base(a).len()]).collect();
    for (i, o1) in orbits1.iter().enumerate() {
        let mut image: Vec<usize> = sup1[i].iter().map(|&a| perm[a]).collect();
        image.sort();
        let j = (0..orbits2.len()).find(|&j| !taken[j] && sup2[j] == image).expect("supports match");
        taken[j] = true;
        for &(a, x) in o1 {
            let &(_, y) = orbits2[j].iter().find(|&&(b, _)| b == perm[a]).expect("object in support");
            base_map[a][x] = y;
        }
    }
    let mut arrow_map = vec![Vec::new(); n * n];
    for p in g1.all_arrows() {
        let (fa, fb) = (perm[p.a], perm[p.b]);
        let q = g2
            .find(fa, fb, base_map[p.a][g1.t(p)], base_map[p.b][g1.s(p)])
            .ok_or_else(|| SpaceoidError::Shape("relabelling does not preserve arrows".into()))?;
        arrow_map[p.a * n + p.b].push(q.k);
    }
    let relabel = SpaceoidMorphism::new(g1.clone(), g2.clone(), perm, arrow_map, g1.unit_weights())?;
    let iso = m1.inverse()?.then(&relabel)?.then(&m2)?;
    if !check_morphism(&iso, tol).is_valid() || iso.inverse().is_err() {
        return Ok(None);
    }
    Ok(Some(iso))
}

fn search_permutation(
    a: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    sup1: &[Vec<usize>],
    sup2: &[Vec<usize>],
) -> bool {
    let n = perm.len();
    if a == n {
        let mut x: Vec<Vec<usize>> = sup1
            .iter()
            .map(|s| {
                let mut v: Vec<usize> = s.iter().map(|&o| perm[o]).collect();
                v.sort();
                v
            })
            .collect();
        let mut y = sup2.to_vec();
        x.sort();
        y.sort();
        return x == y;
    }
    // cheap pruning: orbit-size profile through each object must agree
    let profile = |sup: &[Vec<usize>], o: usize| {
        let mut v: Vec<usize> = sup.iter().filter(|s| s.contains(&o)).map(Vec::len).collect();
        v.sort();
        v
    };
    for b in 0..n {
        if used[b] || profile(sup1, a) != profile(sup2, b) {
            continue;
        }
        perm[a] = b;
        used[b] = true;
        if search_permutation(a + 1, perm, used, sup1, sup2) {
            return true;
        }
        used[b] = false;
    }
    perm[a] = usize::MAX;
    false
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::numlin::I;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn basic_spaceoids_valid() {
        assert!(validate_spaceoid(&discrete(3), tol()).is_valid());
        let r = validate_spaceoid(&linked_pair(), tol());
        assert!(r.is_valid(), "{}", r.summary());
    }

    #[test]
    fn missing_inverse_detected() {
        let mut points = BTreeMap::new();
        points.insert((0, 1), vec![point("a0>b0", 0, 0)]);
        let s = FiniteSpaceoid::new(
            vec!["A".into(), "B".into()],
            vec![vec!["a0".into()], vec!["b0".into()]],
            points,
            BTreeMap::new(),
        )
        .unwrap();
        assert!(!validate_spaceoid(&s, tol()).check("inverses").unwrap().passed);
    }

    #[test]
    fn bad_involution_phase_detected() {
        let mut s = linked_pair();
        s.points[1][0].nu = I;
        let r = validate_spaceoid(&s, tol());
        assert!(!r.check("involution_phase").unwrap().passed);
    }

    #[test]
    fn rephase_keeps_validity_and_gauge_trivialises() {
        let s = linked_pair();
        let mut w = s.unit_weights();
        w[1] = vec![C64::from_polar(1.0, 0.3), C64::from_polar(1.0, -1.1)];
        w[2] = vec![C64::from_polar(1.0, 2.0), ONE];
        let r = s.rephase(&w);
        assert!(validate_spaceoid(&r, tol()).is_valid());
        assert!(r.phase_triviality() > 0.1);
        let r = Arc::new(r);
        let (g, m) = gauge_fix(&r);
        assert!(g.phase_triviality() < 1e-12);
        assert!(check_morphism(&m, tol()).is_valid());
    }

    #[test]
    fn morphism_algebra() {
        let s = Arc::new(linked_pair());
        let mut w = s.unit_weights();
        w[1] = vec![I, ONE];
        w[2] = vec![C64::from_polar(1.0, 0.7), ONE];
        let m = SpaceoidMorphism::from_rephase(s.clone(), &w);
        let r = check_morphism(&m, tol());
        assert!(r.is_valid(), "{}", r.summary());
        let inv = m.inverse().unwrap();
        assert!(check_morphism(&inv, tol()).is_valid());
        let round = m.then(&inv).unwrap();
        let id = SpaceoidMorphism::identity(m.source.clone());
        assert!(round.max_deviation(&id).unwrap() < 1e-12);
    }

    #[test]
    fn isomorphism_search() {
        let s1 = Arc::new(linked_pair());
        let mut w = s1.unit_weights();
        w[1] = vec![C64::from_polar(1.0, 1.3), I];
        w[2] = vec![ONE, C64::from_polar(1.0, -0.4)];
        let s2 = Arc::new(s1.rephase(&w));
        let iso = spaceoids_isomorphic(&s1, &s2, tol()).unwrap().expect("isomorphic");
        assert!(check_morphism(&iso, tol()).is_valid());
        assert!(spaceoids_isomorphic(&s1, &Arc::new(discrete(5)), tol()).unwrap().is_none());
    }
}
