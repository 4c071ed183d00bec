//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Norm oracles are independent of the spectrum code:
//! a generated category is `Γ(S)` in known bases, and the norm of a section
//! of a unit-modulus line bundle is the sup of its coefficients.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gelfand_core::cstarcat::{check_non_degenerate, check_star_functor};
use gelfand_core::duality::{bimodule_spectrum, check_naturality_e, check_naturality_g, gelfand_transform_with};
use gelfand_core::functors::{
    gamma_on_morphism_with, sections_category, sigma_on_morphism, sigma_on_morphism_with, FunctorError, Spectrum,
};
use gelfand_core::harness::gen::{
    gen_category_with_bases, gen_functor, gen_functor_pair, gen_morphism, gen_morphism_pair, random_element, rng_for,
    GenParams, Scramble,
};
use gelfand_core::harness::json::{category_from_json, parse, BimoduleDoc, FunctorDoc};
use gelfand_core::harness::sweep::{self, corner_census};
use gelfand_core::numlin::vec_max_abs;
use gelfand_core::par::Exec;
use gelfand_core::{CMatrix, StarFunctor, Tolerance, C64};
use rand::Rng;

const INSTANCES: u64 = 200;
const PAIRS: u64 = 50;
const NATURALITY_SAMPLES: u64 = 50;
const CSTAR_SAMPLES: usize = 1000;

const ISOMETRY_TOL: f64 = 1e-6;
const A_SIDE_BUDGET: Duration = Duration::from_secs(60);
const T_SIDE_BUDGET: Duration = Duration::from_secs(30);
const FUNCTORIALITY_TOL: f64 = 1e-6;
const NATURALITY_TOL: f64 = 1e-6;
const INNER_PRODUCT_TOL: f64 = 1e-9;
const CSTAR_REL_TOL: f64 = 1e-6;

const FOOTNOTE_EMBEDDING: &str = include_str!("../../../fixtures/footnote_embedding.json");
const FOOTNOTE_FULL: &str = include_str!("../../../fixtures/footnote_full.json");
const NONFULL_BIMODULE: &str = include_str!("../../../fixtures/nonfull_bimodule.json");

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn sampled(seed: u64, scramble: Scramble) -> GenParams {
    GenParams::sampled(seed, scramble)
}

/// `‖x‖` for `x ∈ C_ab` of a generated category, via the generator's bases.
fn oracle_norm(bases: &[CMatrix], n: usize, a: usize, b: usize, x: &[C64]) -> f64 {
    vec_max_abs(&bases[a * n + b].mul_vec(x))
}

fn a_side() -> Outcome {
    let start = Instant::now();
    let rows = sweep::run(Exec::default(), 0..INSTANCES, |seed| -> Result<(bool, f64, usize), String> {
        let p = sampled(seed, Scramble::Unitary);
        let (c, _, bases) = gen_category_with_bases(&p).map_err(|e| e.to_string())?;
        let n = c.n();
        let total_dim = (0..n * n).map(|ab| c.dim(ab / n, ab % n)).sum();
        let g = gelfand_transform_with(Arc::new(c), tol(), Exec::Sequential).map_err(|e| e.to_string())?;
        let check = g.verify(tol()).map_err(|e| e.to_string())?;
        let c = &g.spectrum.category;
        let mut rng = rng_for(seed.wrapping_add(1 << 32));
        let mut dev = check.isometry_deviation;
        for a in 0..n {
            for b in 0..n {
                if g.spectrum.gelfand.transform(a, b).rows() != c.dim(a, b) {
                    return Ok((false, dev, total_dim));
                }
                for _ in 0..4 {
                    let x = random_element(c, a, b, &mut rng);
                    let nx = oracle_norm(&bases, n, a, b, &x);
                    let nhat = vec_max_abs(&g.spectrum.gelfand.hat(a, b, &x));
                    dev = dev.max((nhat - nx).abs() / (1.0 + nx));
                }
            }
        }
        Ok((check.bijective && check.star_functor && check.inverse_deviation <= ISOMETRY_TOL, dev, total_dim))
    });
    let elapsed = start.elapsed();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let ok = rows.iter().filter(|r| matches!(r, Ok((true, _, _)))).count();
    let dev = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.1).fold(0.0, f64::max);
    let dims: Vec<usize> = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.2).collect();
    let (max_dim, mean_dim) =
        (dims.iter().copied().max().unwrap_or(0), dims.iter().sum::<usize>() as f64 / dims.len().max(1) as f64);
    let passed = errors.is_empty() && ok as u64 == INSTANCES && dev <= ISOMETRY_TOL && elapsed <= A_SIDE_BUDGET;
    outcome(
        passed,
        format!(
            "{ok}/{INSTANCES} bijective (Σ d_AB mean {mean_dim:.1}, max {max_dim}), max isometry deviation {dev:.2e} (limit {ISOMETRY_TOL:.0e}), {:.1} s (limit {} s){}",
            elapsed.as_secs_f64(),
            A_SIDE_BUDGET.as_secs(),
            first_error(&errors)
        ),
    )
}

fn first_error(errors: &[&String]) -> String {
    errors.first().map(|e| format!(", {} errors, first: {e}", errors.len())).unwrap_or_default()
}

fn t_side() -> Outcome {
    let start = Instant::now();
    let rows = sweep::run(Exec::default(), 0..INSTANCES, |seed| {
        sweep::t_side(&sampled(seed, Scramble::None), tol(), Exec::Sequential)
    });
    let elapsed = start.elapsed();
    let ok = rows.iter().filter(|r| r.passed).count();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
    outcome(
        ok as u64 == INSTANCES && elapsed <= T_SIDE_BUDGET,
        format!(
            "{ok}/{INSTANCES} invertible and isomorphic, {:.1} s (limit {} s){}",
            elapsed.as_secs_f64(),
            T_SIDE_BUDGET.as_secs(),
            first_error(&errors)
        ),
    )
}

fn oracle_recovery() -> Outcome {
    let rows = sweep::run(Exec::default(), 0..INSTANCES, |seed| {
        sweep::oracle_recovery(&sampled(seed, Scramble::Invertible), tol(), Exec::Sequential)
    });
    let ok = rows.iter().filter(|r| r.passed).count();
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.error.as_ref()).collect();
    outcome(
        ok as u64 == INSTANCES,
        format!("{ok}/{INSTANCES} spectra isomorphic to their oracle{}", first_error(&errors)),
    )
}

fn rank_bound() -> Outcome {
    let rows = sweep::run(Exec::default(), 0..2 * INSTANCES, |i| -> Result<(usize, usize), String> {
        let scramble = if i % 2 == 0 { Scramble::Unitary } else { Scramble::Invertible };
        let (c, oracle, _) = gen_category_with_bases(&sampled(i / 2, scramble)).map_err(|e| e.to_string())?;
        let spec = Spectrum::new_with(Arc::new(c), tol(), Exec::Sequential).map_err(|e| e.to_string())?;
        let census = corner_census(&spec.category, &spec.decomposition.spectra, tol());
        // points found per Hom-set against the oracle's count
        let n = oracle.n();
        let miscounts =
            (0..n * n).filter(|ab| spec.spaceoid.hom_size(ab / n, ab % n) != oracle.hom_size(ab / n, ab % n)).count();
        Ok((census.max_dimension, census.mismatches.len() + miscounts))
    });
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let max_dim = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.0).max().unwrap_or(0);
    let mismatches: usize = rows.iter().filter_map(|r| r.as_ref().ok()).map(|r| r.1).sum();
    outcome(
        errors.is_empty() && max_dim <= 1 && mismatches == 0,
        format!(
            "{} instances, max corner dimension {max_dim}, {mismatches} Hom-sets with sum ≠ d_AB{}",
            2 * INSTANCES,
            first_error(&errors)
        ),
    )
}

fn degeneracy_gate() -> Outcome {
    let f: StarFunctor = match parse::<FunctorDoc>(FOOTNOTE_EMBEDDING).map(|d| d.to_functor()) {
        Ok(Ok(f)) => f,
        other => return outcome(false, format!("fixture did not load: {other:?}")),
    };
    let full = category_from_json(FOOTNOTE_FULL).expect("fixture");
    let is_star = check_star_functor(&f, tol()).is_valid();
    let rejected = matches!(sigma_on_morphism(&f, tol()), Err(FunctorError::DegenerateFunctor(_)));
    let target_points = Spectrum::new(Arc::new(full), tol()).map(|s| s.spaceoid.hom_size(0, 1)).unwrap_or(0);
    let identities = sweep::run(Exec::default(), 0..INSTANCES, |seed| {
        let p = sampled(seed, if seed % 2 == 0 { Scramble::Unitary } else { Scramble::Invertible });
        let (c, _, _) = gen_category_with_bases(&p).ok()?;
        let id = StarFunctor::identity(Arc::new(c));
        Some(check_non_degenerate(&id, tol()).ok()?.non_degenerate)
    });
    let id_ok = identities.iter().filter(|r| **r == Some(true)).count();
    outcome(
        is_star && rejected && target_points == 1 && id_ok as u64 == INSTANCES,
        format!(
            "embedding is a *-functor: {is_star}, rejected as degenerate: {rejected}, |X_AB| of target = {target_points}, identities pass: {id_ok}/{INSTANCES}"
        ),
    )
}

fn functoriality() -> Outcome {
    let sigma = sweep::run(Exec::default(), 0..PAIRS, |seed| -> Result<f64, String> {
        let (phi, psi) = gen_functor_pair(&sampled(seed, Scramble::Invertible)).map_err(|e| e.to_string())?;
        let s1 = Spectrum::new(phi.source.clone(), tol()).map_err(|e| e.to_string())?;
        let s2 = Spectrum::new(phi.target.clone(), tol()).map_err(|e| e.to_string())?;
        let s3 = Spectrum::new(psi.target.clone(), tol()).map_err(|e| e.to_string())?;
        let s_phi = sigma_on_morphism_with(&phi, &s1, &s2, tol()).map_err(|e| e.to_string())?;
        let s_psi = sigma_on_morphism_with(&psi, &s2, &s3, tol()).map_err(|e| e.to_string())?;
        let comp = phi.then(&psi).map_err(|e| e.to_string())?;
        let s_comp = sigma_on_morphism_with(&comp, &s1, &s3, tol()).map_err(|e| e.to_string())?;
        let rhs = s_psi.then(&s_phi).map_err(|e| e.to_string())?;
        s_comp.max_deviation(&rhs).ok_or_else(|| "arrow maps differ".to_string())
    });
    let gamma = sweep::run(Exec::default(), 0..PAIRS, |seed| -> Result<f64, String> {
        let (m_b, m_a) = gen_morphism_pair(&sampled(seed, Scramble::None)).map_err(|e| e.to_string())?;
        let section = |s| sections_category(s, tol()).map(Arc::new).map_err(|e| e.to_string());
        let (g1, g2, g3) = (section(&m_a.target)?, section(&m_a.source)?, section(&m_b.source)?);
        let gamma_a = gamma_on_morphism_with(&m_a, g2.clone(), g1.clone()).map_err(|e| e.to_string())?;
        let gamma_b = gamma_on_morphism_with(&m_b, g3.clone(), g2).map_err(|e| e.to_string())?;
        let comp = m_b.then(&m_a).map_err(|e| e.to_string())?;
        let gamma_comp = gamma_on_morphism_with(&comp, g3, g1).map_err(|e| e.to_string())?;
        let rhs = gamma_a.then(&gamma_b).map_err(|e| e.to_string())?;
        gamma_comp.max_deviation(&rhs).ok_or_else(|| "object maps differ".to_string())
    });
    summarize_deviations(&[("Σ", &sigma), ("Γ", &gamma)], PAIRS, FUNCTORIALITY_TOL)
}

fn summarize_deviations(parts: &[(&str, &Vec<Result<f64, String>>)], expected: u64, limit: f64) -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, rows) in parts {
        let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
        let dev = rows.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
        let ok = rows.iter().filter(|r| matches!(r, Ok(d) if *d <= limit)).count();
        passed &= ok as u64 == expected;
        detail.push(format!("{name}: {ok}/{expected}, max deviation {dev:.2e}{}", first_error(&errors)));
    }
    outcome(passed, format!("{} (limit {limit:.0e})", detail.join("; ")))
}

fn naturality() -> Outcome {
    let g = sweep::run(Exec::default(), 0..NATURALITY_SAMPLES, |seed| -> Result<f64, String> {
        let f = gen_functor(&sampled(seed, Scramble::Invertible)).map_err(|e| e.to_string())?;
        let r = check_naturality_g(&f, tol()).map_err(|e| e.to_string())?;
        if r.points_match {
            Ok(r.square_identity)
        } else {
            Err("points of the square do not match".into())
        }
    });
    let e = sweep::run(Exec::default(), 0..NATURALITY_SAMPLES, |seed| -> Result<f64, String> {
        let m = gen_morphism(&sampled(seed, Scramble::None)).map_err(|e| e.to_string())?;
        let r = check_naturality_e(&m, tol()).map_err(|e| e.to_string())?;
        if r.points_match {
            Ok(r.square_identity)
        } else {
            Err("points of the square do not match".into())
        }
    });
    summarize_deviations(&[("𝔊", &g), ("𝔈", &e)], NATURALITY_SAMPLES, NATURALITY_TOL)
}

fn bimodule() -> Outcome {
    let mb = match parse::<BimoduleDoc>(NONFULL_BIMODULE).map(|d| d.to_bimodule()) {
        Ok(Ok(m)) => m,
        other => return outcome(false, format!("fixture did not load: {other:?}")),
    };
    let bs = match bimodule_spectrum(&mb, tol()) {
        Ok(bs) => bs,
        Err(e) => return outcome(false, e.to_string()),
    };
    let pairs: BTreeSet<(String, String)> = bs.pair_labels.iter().cloned().collect();
    let expected: BTreeSet<(String, String)> =
        [("1", "1'"), ("2", "2'")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let support: BTreeSet<&str> = bs.right_support.iter().map(|&q| bs.right_points[q].as_str()).collect();
    let expected_support: BTreeSet<&str> = ["1'", "2'"].into_iter().collect();

    // The algebras are in their idempotent bases, so inner-product
    // coordinates are point values; compare with fiberwise products.
    let label_index = |labels: Option<&[String]>, l: &str| labels.and_then(|ls| ls.iter().position(|x| x == l));
    let mut rng = rng_for(11);
    let m = mb.module_dim;
    let mut dev: f64 = 0.0;
    for _ in 0..200 {
        let x: Vec<C64> = (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y: Vec<C64> = (0..m).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (hx, hy) = (bs.iso.mul_vec(&x), bs.iso.mul_vec(&y));
        let mut ia = vec![C64::new(0.0, 0.0); mb.da()];
        let mut ib = vec![C64::new(0.0, 0.0); mb.db()];
        for (k, &(p, q)) in bs.pairs.iter().enumerate() {
            let Some(i) = label_index(mb.alg_a.labels(0, 0), &bs.left_points[p]) else {
                return outcome(false, "unlabelled left point");
            };
            let Some(j) = label_index(mb.alg_b.labels(0, 0), &bs.right_points[q]) else {
                return outcome(false, "unlabelled right point");
            };
            ia[i] += hx[k] * hy[k].conj();
            ib[j] += hx[k].conj() * hy[k];
        }
        dev = dev.max(vec_max_abs(&sub(&mb.inner_a(&x, &y), &ia))).max(vec_max_abs(&sub(&mb.inner_b(&x, &y), &ib)));
    }
    let dev = dev.max(bs.inner_product_deviation);
    outcome(
        pairs == expected && support == expected_support && bs.bijective && dev <= INNER_PRODUCT_TOL,
        format!(
            "pairs {:?}, right support {:?}, bijective {}, inner-product deviation {dev:.2e} (limit {INNER_PRODUCT_TOL:.0e})",
            bs.pair_labels, support, bs.bijective
        ),
    )
}

fn sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn cstar_identity() -> Outcome {
    let per_seed = CSTAR_SAMPLES / INSTANCES as usize;
    let rows = sweep::run(Exec::default(), 0..INSTANCES, |seed| -> Result<(f64, f64), String> {
        let (c, _, bases) = gen_category_with_bases(&sampled(seed, Scramble::Invertible)).map_err(|e| e.to_string())?;
        let n = c.n();
        let spectra = gelfand_core::cstarcat::diagonal_spectra(&c, tol()).map_err(|e| e.to_string())?;
        let homs: Vec<(usize, usize)> =
            (0..n * n).map(|ab| (ab / n, ab % n)).filter(|&(a, b)| c.dim(a, b) > 0).collect();
        let mut rng = rng_for(seed.wrapping_add(2 << 32));
        let (mut identity_dev, mut norm_dev): (f64, f64) = (0.0, 0.0);
        for _ in 0..per_seed {
            let (a, b) = homs[rng.gen_range(0..homs.len())];
            let x = random_element(&c, a, b, &mut rng);
            let xx = c.compose(b, a, b, &c.star(a, b, &x), &x);
            let nx = oracle_norm(&bases, n, a, b, &x);
            let nxx = oracle_norm(&bases, n, b, b, &xx);
            identity_dev = identity_dev.max((nxx - nx * nx).abs() / (1.0 + nx * nx));
            let lib = gelfand_core::cstarcat::cstar_norm_with(&c, &spectra, a, b, &x);
            norm_dev = norm_dev.max((lib - nx).abs() / (1.0 + nx));
        }
        Ok((identity_dev, norm_dev))
    });
    let errors: Vec<&String> = rows.iter().filter_map(|r| r.as_ref().err()).collect();
    let ok: Vec<&(f64, f64)> = rows.iter().filter_map(|r| r.as_ref().ok()).collect();
    let identity = ok.iter().map(|r| r.0).fold(0.0, f64::max);
    let norm = ok.iter().map(|r| r.1).fold(0.0, f64::max);
    outcome(
        errors.is_empty() && identity <= CSTAR_REL_TOL && norm <= CSTAR_REL_TOL,
        format!(
            "{} elements, max |‖x*x‖ − ‖x‖²|/(1+‖x‖²) = {identity:.2e}, library norm vs oracle {norm:.2e} (limit {CSTAR_REL_TOL:.0e}){}",
            ok.len() * per_seed,
            first_error(&errors)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1", "Gel'fand transform bijective and isometric", a_side),
        ("AC2", "evaluation transform invertible, S ≅ Σ(Γ(S))", t_side),
        ("AC3", "spectrum recovers the generating spaceoid", oracle_recovery),
        ("AC4", "corner dimensions in {0,1}, sums equal d_AB", rank_bound),
        ("AC5", "non-degeneracy gate", degeneracy_gate),
        ("AC6", "contravariant functoriality of Σ and Γ", functoriality),
        ("AC7", "naturality of 𝔊 and 𝔈", naturality),
        ("AC8", "non-full bimodule spectrum", bimodule),
        ("AC9", "C*-identity", cstar_identity),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        let o = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !o.passed {
            failures += 1;
        }
        println!("[{}] {id} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
