//! JSON documents for categories, spaceoids, bimodules, functors and
//! spaceoid morphisms. Complex numbers are `[re, im]` pairs; Hom-sets are
//! keyed `"A|B"`, composition tensors `"A|B|C"`. Missing tensors are zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;
use crate::cstarcat::{FiniteCStarCategory, HilbertBimodule, StarFunctor};
use crate::numlin::{CMatrix, C64};
use crate::spaceoid::{Arrow, FiniteSpaceoid, Point, SpaceoidMorphism};

pub type Cx = [f64; 2];

fn cx(z: C64) -> Cx {
    [z.re, z.im]
}

fn from_cx(z: &Cx) -> C64 {
    C64::new(z[0], z[1])
}

fn key2(objects: &[String], a: usize, b: usize) -> String {
    format!("{}|{}", objects[a], objects[b])
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> HarnessError {
    HarnessError::Schema { path: path.into(), message: message.into() }
}

/// Parses text, reporting syntax errors by position and schema errors by path.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, HarnessError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
        HarnessError::Syntax { line: e.line(), column: e.column(), message }
    })?;
    from_value(value)
}

pub fn from_value<T: DeserializeOwned>(value: Value) -> Result<T, HarnessError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

/// What a document describes, by its distinguishing fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocKind {
    Category,
    Spaceoid,
    Bimodule,
    Functor,
    Morphism,
}

pub fn doc_kind(value: &Value) -> Result<DocKind, HarnessError> {
    let obj = value.as_object().ok_or_else(|| schema(".", "expected a JSON object"))?;
    match obj.get("kind").and_then(Value::as_str) {
        Some("functor") => return Ok(DocKind::Functor),
        Some("morphism") => return Ok(DocKind::Morphism),
        Some(other) => return Err(schema("kind", format!("unknown document kind {other:?}"))),
        None => {}
    }
    if obj.contains_key("module_dim") {
        Ok(DocKind::Bimodule)
    } else if obj.contains_key("base_sets") {
        Ok(DocKind::Spaceoid)
    } else {
        Ok(DocKind::Category)
    }
}

// ---------------------------------------------------------------------------
// categories

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDoc {
    pub objects: Vec<String>,
    #[serde(default)]
    pub dims: BTreeMap<String, usize>,
    /// Row `i*d_bc + j` holds the coordinates of `e_i∘e_j`.
    #[serde(default)]
    pub comp: BTreeMap<String, Vec<Vec<Cx>>>,
    /// Row-major `d_ba × d_ab`, acting on conjugated coordinates.
    #[serde(default)]
    pub invol: BTreeMap<String, Vec<Cx>>,
    #[serde(default)]
    pub units: BTreeMap<String, Vec<Cx>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, Vec<String>>,
}

fn object_lookup(objects: &[String]) -> BTreeMap<&str, usize> {
    objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect()
}

fn split_key<'a>(key: &'a str, parts: usize, field: &str) -> Result<Vec<&'a str>, HarnessError> {
    let v: Vec<&str> = key.split('|').collect();
    if v.len() != parts {
        return Err(schema(format!("{field}.{key}"), format!("key must have {parts} objects separated by '|'")));
    }
    Ok(v)
}

fn resolve(lookup: &BTreeMap<&str, usize>, names: &[&str], path: &str) -> Result<Vec<usize>, HarnessError> {
    names.iter().map(|n| lookup.get(n).copied().ok_or_else(|| schema(path, format!("unknown object {n:?}")))).collect()
}

impl CategoryDoc {
    pub fn from_category(c: &FiniteCStarCategory) -> Self {
        let objs = c.objects();
        let n = c.n();
        let mut doc = CategoryDoc {
            objects: objs.to_vec(),
            dims: BTreeMap::new(),
            comp: BTreeMap::new(),
            invol: BTreeMap::new(),
            units: BTreeMap::new(),
            labels: BTreeMap::new(),
        };
        for a in 0..n {
            for b in 0..n {
                if c.dim(a, b) == 0 {
                    continue;
                }
                let k = key2(objs, a, b);
                doc.dims.insert(k.clone(), c.dim(a, b));
                doc.invol.insert(k.clone(), c.invol_matrix(a, b).as_slice().iter().map(|z| cx(*z)).collect());
                if let Some(l) = c.labels(a, b) {
                    doc.labels.insert(k, l.to_vec());
                }
                for cc in 0..n {
                    let t = c.comp_tensor(a, b, cc);
                    if t.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                        continue;
                    }
                    let dac = c.dim(a, cc);
                    let rows = t.chunks(dac).map(|r| r.iter().map(|z| cx(*z)).collect()).collect();
                    doc.comp.insert(format!("{}|{}|{}", objs[a], objs[b], objs[cc]), rows);
                }
            }
            doc.units.insert(objs[a].clone(), c.unit(a).iter().map(|z| cx(*z)).collect());
        }
        doc
    }

    pub fn to_category(&self) -> Result<FiniteCStarCategory, HarnessError> {
        let n = self.objects.len();
        let lookup = object_lookup(&self.objects);
        if lookup.len() != n {
            return Err(schema("objects", "duplicate object names"));
        }
        let mut dims = vec![vec![0usize; n]; n];
        for (key, &d) in &self.dims {
            let path = format!("dims.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "dims")?, &path)?;
            dims[ab[0]][ab[1]] = d;
        }
        for a in 0..n {
            for b in 0..n {
                if dims[a][b] != dims[b][a] {
                    return Err(schema(
                        format!("dims.{}", key2(&self.objects, a, b)),
                        format!(
                            "dim({0},{1}) = {2} but dim({1},{0}) = {3}",
                            self.objects[a], self.objects[b], dims[a][b], dims[b][a]
                        ),
                    ));
                }
            }
        }
        let mut c = FiniteCStarCategory::zeroed(self.objects.clone(), dims).map_err(|e| schema(".", e.to_string()))?;
        for (key, rows) in &self.comp {
            let path = format!("comp.{key}");
            let abc = resolve(&lookup, &split_key(key, 3, "comp")?, &path)?;
            let (a, b, cc) = (abc[0], abc[1], abc[2]);
            let (dab, dbc, dac) = (c.dim(a, b), c.dim(b, cc), c.dim(a, cc));
            if rows.len() != dab * dbc {
                return Err(schema(&path, format!("expected {} rows, found {}", dab * dbc, rows.len())));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != dac {
                    return Err(schema(format!("{path}[{r}]"), format!("expected {dac} entries, found {}", row.len())));
                }
                let v: Vec<C64> = row.iter().map(from_cx).collect();
                c.set_product(a, b, cc, r / dbc.max(1), r % dbc.max(1), &v);
            }
        }
        for (key, flat) in &self.invol {
            let path = format!("invol.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "invol")?, &path)?;
            let (a, b) = (ab[0], ab[1]);
            let (dab, dba) = (c.dim(a, b), c.dim(b, a));
            if flat.len() != dab * dba {
                return Err(schema(&path, format!("expected {} entries, found {}", dab * dba, flat.len())));
            }
            for i in 0..dab {
                let col: Vec<C64> = (0..dba).map(|r| from_cx(&flat[r * dab + i])).collect();
                c.set_star(a, b, i, &col);
            }
        }
        for (name, u) in &self.units {
            let path = format!("units.{name}");
            let a = resolve(&lookup, &[name.as_str()], &path)?[0];
            if u.len() != c.dim(a, a) {
                return Err(schema(&path, format!("expected {} entries, found {}", c.dim(a, a), u.len())));
            }
            c.set_unit(a, &u.iter().map(from_cx).collect::<Vec<_>>());
        }
        for (key, l) in &self.labels {
            let path = format!("labels.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "labels")?, &path)?;
            if l.len() != c.dim(ab[0], ab[1]) {
                return Err(schema(&path, "one label per basis vector required"));
            }
            c.set_labels(ab[0], ab[1], l.clone());
        }
        if c.scale().is_nan() || !c.scale().is_finite() {
            return Err(schema(".", "non-finite entries"));
        }
        Ok(c)
    }
}

// ---------------------------------------------------------------------------
// spaceoids

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    pub t: String,
    pub s: String,
    #[serde(default = "one_cx")]
    pub nu: Cx,
}

fn one_cx() -> Cx {
    [1.0, 0.0]
}

/// `p` and `q` are written `"A|B/point-id"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDoc {
    pub p: String,
    pub q: String,
    pub c: Cx,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceoidDoc {
    pub objects: Vec<String>,
    pub base_sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub points: BTreeMap<String, Vec<PointDoc>>,
    #[serde(default)]
    pub phases: Vec<PhaseDoc>,
}

fn arrow_ref(s: &FiniteSpaceoid, p: Arrow) -> String {
    format!("{}/{}", key2(s.objects(), p.a, p.b), s.id(p))
}

impl SpaceoidDoc {
    pub fn from_spaceoid(s: &FiniteSpaceoid) -> Self {
        let objs = s.objects();
        let n = s.n();
        let base_sets = (0..n).map(|a| (objs[a].clone(), s.base(a).to_vec())).collect();
        let mut points = BTreeMap::new();
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                let pts = s.points(a, b);
                if pts.is_empty() {
                    continue;
                }
                let docs = pts
                    .iter()
                    .map(|p| PointDoc {
                        id: p.id.clone(),
                        t: s.base(a)[p.t].clone(),
                        s: s.base(b)[p.s].clone(),
                        nu: cx(p.nu),
                    })
                    .collect();
                points.insert(key2(objs, a, b), docs);
            }
        }
        let phases = s
            .phases()
            .iter()
            .map(|(&(p, q), &c)| PhaseDoc { p: arrow_ref(s, p), q: arrow_ref(s, q), c: cx(c) })
            .collect();
        SpaceoidDoc { objects: objs.to_vec(), base_sets, points, phases }
    }

    pub fn to_spaceoid(&self) -> Result<FiniteSpaceoid, HarnessError> {
        let n = self.objects.len();
        let lookup = object_lookup(&self.objects);
        if lookup.len() != n {
            return Err(schema("objects", "duplicate object names"));
        }
        let mut base = vec![Vec::new(); n];
        for (name, labels) in &self.base_sets {
            let a = resolve(&lookup, &[name.as_str()], &format!("base_sets.{name}"))?[0];
            base[a] = labels.clone();
        }
        for (a, labels) in base.iter().enumerate() {
            if !self.base_sets.contains_key(&self.objects[a]) {
                return Err(schema("base_sets", format!("missing base set for {}", self.objects[a])));
            }
            let distinct: std::collections::BTreeSet<&String> = labels.iter().collect();
            if distinct.len() != labels.len() {
                return Err(schema(format!("base_sets.{}", self.objects[a]), "duplicate labels"));
            }
        }
        let find_base = |a: usize, label: &str, path: &str| {
            base[a].iter().position(|l| l == label).ok_or_else(|| schema(path, format!("unknown base point {label:?}")))
        };
        let mut points = BTreeMap::new();
        for (key, docs) in &self.points {
            let path = format!("points.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "points")?, &path)?;
            let mut pts = Vec::with_capacity(docs.len());
            for (i, d) in docs.iter().enumerate() {
                let ppath = format!("{path}[{i}]");
                pts.push(Point {
                    id: d.id.clone(),
                    t: find_base(ab[0], &d.t, &format!("{ppath}.t"))?,
                    s: find_base(ab[1], &d.s, &format!("{ppath}.s"))?,
                    nu: from_cx(&d.nu),
                });
            }
            points.insert((ab[0], ab[1]), pts);
        }
        let shell = FiniteSpaceoid::new(self.objects.clone(), base, points, BTreeMap::new())
            .map_err(|e| schema(".", e.to_string()))?;
        let arrow = |r: &str, path: &str| -> Result<Arrow, HarnessError> {
            let (hom, id) = r.split_once('/').ok_or_else(|| schema(path, "expected \"A|B/point-id\""))?;
            let ab = resolve(&lookup, &split_key(hom, 2, path)?, path)?;
            shell
                .arrows(ab[0], ab[1])
                .find(|&p| shell.id(p) == id)
                .ok_or_else(|| schema(path, format!("unknown point {id:?}")))
        };
        let mut phases = BTreeMap::new();
        for (i, ph) in self.phases.iter().enumerate() {
            let path = format!("phases[{i}]");
            let p = arrow(&ph.p, &format!("{path}.p"))?;
            let q = arrow(&ph.q, &format!("{path}.q"))?;
            phases.insert((p, q), from_cx(&ph.c));
        }
        let mut pts_map = BTreeMap::new();
        for a in 0..n {
            for b in (0..n).filter(|&b| b != a) {
                if !shell.points(a, b).is_empty() {
                    pts_map.insert((a, b), shell.points(a, b).to_vec());
                }
            }
        }
        let base = (0..n).map(|a| shell.base(a).to_vec()).collect();
        FiniteSpaceoid::new(self.objects.clone(), base, pts_map, phases).map_err(|e| schema("phases", e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// bimodules

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BimoduleDoc {
    pub alg_a: CategoryDoc,
    pub alg_b: CategoryDoc,
    pub module_dim: usize,
    /// Entry `(x*m + i)*m + k`: coordinate `k` of `a_x · m_i`.
    pub left_action: Vec<Cx>,
    /// Entry `(i*d_b + y)*m + k`: coordinate `k` of `m_i · b_y`.
    pub right_action: Vec<Cx>,
    /// Entry `(i*m + j)*d_a + k`.
    pub ip_a: Vec<Cx>,
    /// Entry `(i*m + j)*d_b + k`.
    pub ip_b: Vec<Cx>,
}

impl BimoduleDoc {
    pub fn from_bimodule(m: &HilbertBimodule) -> Self {
        let v = |x: &[C64]| x.iter().map(|z| cx(*z)).collect();
        BimoduleDoc {
            alg_a: CategoryDoc::from_category(&m.alg_a),
            alg_b: CategoryDoc::from_category(&m.alg_b),
            module_dim: m.module_dim,
            left_action: v(&m.left_action),
            right_action: v(&m.right_action),
            ip_a: v(&m.ip_a),
            ip_b: v(&m.ip_b),
        }
    }

    pub fn to_bimodule(&self) -> Result<HilbertBimodule, HarnessError> {
        let v = |x: &[Cx]| x.iter().map(from_cx).collect();
        let a = self.alg_a.to_category().map_err(|e| prefix("alg_a", e))?;
        let b = self.alg_b.to_category().map_err(|e| prefix("alg_b", e))?;
        HilbertBimodule::new(
            a,
            b,
            self.module_dim,
            v(&self.left_action),
            v(&self.right_action),
            v(&self.ip_a),
            v(&self.ip_b),
        )
        .map_err(|e| schema(".", e.to_string()))
    }
}

fn prefix(field: &str, e: HarnessError) -> HarnessError {
    match e {
        HarnessError::Schema { path, message } => schema(format!("{field}.{path}"), message),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// functors and morphisms

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctorDoc {
    pub kind: String,
    pub source: CategoryDoc,
    pub target: CategoryDoc,
    pub objects: BTreeMap<String, String>,
    /// Row-major `d_target × d_source` per source Hom-set; missing means zero.
    #[serde(default)]
    pub homs: BTreeMap<String, Vec<Cx>>,
}

fn object_map(objects: &BTreeMap<String, String>, src: &[String], tgt: &[String]) -> Result<Vec<usize>, HarnessError> {
    let (ls, lt) = (object_lookup(src), object_lookup(tgt));
    let mut map = vec![usize::MAX; src.len()];
    for (s, t) in objects {
        let a = resolve(&ls, &[s.as_str()], &format!("objects.{s}"))?[0];
        map[a] = resolve(&lt, &[t.as_str()], &format!("objects.{s}"))?[0];
    }
    if let Some(a) = map.iter().position(|&t| t == usize::MAX) {
        return Err(schema("objects", format!("no image for {}", src[a])));
    }
    Ok(map)
}

impl FunctorDoc {
    pub fn from_functor(f: &StarFunctor) -> Self {
        let (src, tgt) = (f.source.objects(), f.target.objects());
        let n = src.len();
        let objects = (0..n).map(|a| (src[a].clone(), tgt[f.obj_map[a]].clone())).collect();
        let mut homs = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let h = f.hom(a, b);
                if h.rows() * h.cols() > 0 {
                    homs.insert(key2(src, a, b), h.as_slice().iter().map(|z| cx(*z)).collect());
                }
            }
        }
        FunctorDoc {
            kind: "functor".into(),
            source: CategoryDoc::from_category(&f.source),
            target: CategoryDoc::from_category(&f.target),
            objects,
            homs,
        }
    }

    pub fn to_functor(&self) -> Result<StarFunctor, HarnessError> {
        let src = Arc::new(self.source.to_category().map_err(|e| prefix("source", e))?);
        let tgt = Arc::new(self.target.to_category().map_err(|e| prefix("target", e))?);
        let map = object_map(&self.objects, src.objects(), tgt.objects())?;
        let n = src.n();
        let lookup = object_lookup(src.objects());
        let mut homs: Vec<CMatrix> =
            (0..n * n).map(|ab| CMatrix::zeros(tgt.dim(map[ab / n], map[ab % n]), src.dim(ab / n, ab % n))).collect();
        for (key, flat) in &self.homs {
            let path = format!("homs.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "homs")?, &path)?;
            let (r, c) = (tgt.dim(map[ab[0]], map[ab[1]]), src.dim(ab[0], ab[1]));
            homs[ab[0] * n + ab[1]] = CMatrix::from_row_major(r, c, flat.iter().map(from_cx).collect())
                .map_err(|_| schema(&path, format!("expected {} entries, found {}", r * c, flat.len())))?;
        }
        StarFunctor::new(src, tgt, map, homs).map_err(|e| schema(".", e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub kind: String,
    pub source: SpaceoidDoc,
    pub target: SpaceoidDoc,
    pub objects: BTreeMap<String, String>,
    /// Per source Hom-set: the target point id (or base label) of each arrow.
    pub arrows: BTreeMap<String, Vec<String>>,
    /// Per source Hom-set; missing means 1.
    #[serde(default)]
    pub scalars: BTreeMap<String, Vec<Cx>>,
}

impl MorphismDoc {
    pub fn from_morphism(m: &SpaceoidMorphism) -> Self {
        let (e1, e2) = (&*m.source, &*m.target);
        let objs = e1.objects();
        let n = e1.n();
        let objects = (0..n).map(|a| (objs[a].clone(), e2.objects()[m.obj_map[a]].clone())).collect();
        let mut arrows = BTreeMap::new();
        let mut scalars = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if e1.hom_size(a, b) == 0 {
                    continue;
                }
                let ids = e1.arrows(a, b).map(|p| e2.id(m.map(p)).to_string()).collect();
                arrows.insert(key2(objs, a, b), ids);
                if a != b {
                    scalars.insert(key2(objs, a, b), e1.arrows(a, b).map(|p| cx(m.scalar(p))).collect());
                }
            }
        }
        MorphismDoc {
            kind: "morphism".into(),
            source: SpaceoidDoc::from_spaceoid(e1),
            target: SpaceoidDoc::from_spaceoid(e2),
            objects,
            arrows,
            scalars,
        }
    }

    pub fn to_morphism(&self) -> Result<SpaceoidMorphism, HarnessError> {
        let e1 = Arc::new(self.source.to_spaceoid().map_err(|e| prefix("source", e))?);
        let e2 = Arc::new(self.target.to_spaceoid().map_err(|e| prefix("target", e))?);
        let map = object_map(&self.objects, e1.objects(), e2.objects())?;
        let n = e1.n();
        let lookup = object_lookup(e1.objects());
        let mut arrow_map: Vec<Vec<usize>> = (0..n * n).map(|_| Vec::new()).collect();
        let mut scalars = e1.unit_weights();
        for (key, ids) in &self.arrows {
            let path = format!("arrows.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "arrows")?, &path)?;
            let (fa, fb) = (map[ab[0]], map[ab[1]]);
            let mut ks = Vec::with_capacity(ids.len());
            for (i, id) in ids.iter().enumerate() {
                let k = e2
                    .arrows(fa, fb)
                    .find(|&q| e2.id(q) == id)
                    .ok_or_else(|| schema(format!("{path}[{i}]"), format!("unknown target point {id:?}")))?;
                ks.push(k.k);
            }
            arrow_map[ab[0] * n + ab[1]] = ks;
        }
        for (key, vals) in &self.scalars {
            let path = format!("scalars.{key}");
            let ab = resolve(&lookup, &split_key(key, 2, "scalars")?, &path)?;
            if vals.len() != e1.hom_size(ab[0], ab[1]) {
                return Err(schema(&path, "one scalar per arrow required"));
            }
            scalars[ab[0] * n + ab[1]] = vals.iter().map(from_cx).collect();
        }
        SpaceoidMorphism::new(e1, e2, map, arrow_map, scalars).map_err(|e| schema(".", e.to_string()))
    }
}

pub fn category_to_json(c: &FiniteCStarCategory) -> Value {
    serde_json::to_value(CategoryDoc::from_category(c)).expect("serializable")
}

pub fn spaceoid_to_json(s: &FiniteSpaceoid) -> Value {
    serde_json::to_value(SpaceoidDoc::from_spaceoid(s)).expect("serializable")
}

pub fn bimodule_to_json(m: &HilbertBimodule) -> Value {
    serde_json::to_value(BimoduleDoc::from_bimodule(m)).expect("serializable")
}

pub fn functor_to_json(f: &StarFunctor) -> Value {
    serde_json::to_value(FunctorDoc::from_functor(f)).expect("serializable")
}

pub fn morphism_to_json(m: &SpaceoidMorphism) -> Value {
    serde_json::to_value(MorphismDoc::from_morphism(m)).expect("serializable")
}

pub fn category_from_json(text: &str) -> Result<FiniteCStarCategory, HarnessError> {
    parse::<CategoryDoc>(text)?.to_category()
}

pub fn spaceoid_from_json(text: &str) -> Result<FiniteSpaceoid, HarnessError> {
    parse::<SpaceoidDoc>(text)?.to_spaceoid()
}

/// `[re, im]` pairs for a coefficient vector.
pub fn complex_list(v: &[C64]) -> Vec<Cx> {
    v.iter().map(|z| cx(*z)).collect()
}
