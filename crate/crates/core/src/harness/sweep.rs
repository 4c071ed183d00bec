//! Seed sweeps over generated instances. Seeds are independent, so a sweep
//! maps over them with [`Exec`] and keeps results in seed order. The
//! per-instance drivers take their own `Exec` for the per-Hom-set work;
//! pass `Exec::Sequential` there when the sweep itself is parallel.

use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;

use super::gen::{gen_category, gen_spaceoid, GenParams};
use crate::cstarcat::{DiagonalSpectrum, FiniteCStarCategory};
use crate::duality::{evaluation_transform_with, gelfand_transform_with};
use crate::functors::{sections_category, FunctorError, Spectrum};
use crate::numlin::{numeric_rank, Tolerance};
use crate::par::{self, Exec};
use crate::spaceoid::{check_morphism, spaceoids_isomorphic, validate_spaceoid, FiniteSpaceoid};

pub fn run<T, F>(exec: Exec, seeds: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let start = seeds.start;
    par::map_range(exec, (seeds.end - seeds.start) as usize, |i| f(start + i as u64))
}

/// Numeric dimension of every corner `e_p∘C_ab∘e_q`.
#[derive(Clone, Debug, Serialize)]
pub struct CornerCensus {
    pub max_dimension: usize,
    /// `(a, b, Σ dims, d_ab)` for Hom-sets where the sum is off.
    pub mismatches: Vec<(usize, usize, usize, usize)>,
}

impl CornerCensus {
    pub fn passed(&self) -> bool {
        self.max_dimension <= 1 && self.mismatches.is_empty()
    }
}

pub fn corner_census(c: &FiniteCStarCategory, spectra: &[DiagonalSpectrum], tol: Tolerance) -> CornerCensus {
    let n = c.n();
    let mut max_dimension = 0;
    let mut mismatches = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut sum = 0;
            for e_p in &spectra[a].idempotents {
                for e_q in &spectra[b].idempotents {
                    let dim = if c.dim(a, b) == 0 {
                        0
                    } else {
                        numeric_rank(&(&c.left_mult(a, a, b, e_p) * &c.right_mult(a, b, b, e_q)), tol)
                    };
                    max_dimension = max_dimension.max(dim);
                    sum += dim;
                }
            }
            if sum != c.dim(a, b) {
                mismatches.push((a, b, sum, c.dim(a, b)));
            }
        }
    }
    CornerCensus { max_dimension, mismatches }
}

#[derive(Clone, Debug, Serialize)]
pub struct ASide {
    pub seed: Option<u64>,
    pub n_objects: usize,
    pub passed: bool,
    pub bijective: bool,
    pub isometry_deviation: f64,
    pub inverse_deviation: f64,
    pub corners: Option<CornerCensus>,
    pub error: Option<String>,
}

/// `𝔊_C` is bijective and isometric on a generated category.
pub fn a_side(p: &GenParams, tol: Tolerance, exec: Exec) -> ASide {
    let mut out = match gen_category(p) {
        Ok((c, _)) => a_side_of(c, tol, exec),
        Err(e) => a_side_failed(p.n_objects, e.to_string()),
    };
    out.seed = Some(p.seed);
    out
}

fn a_side_failed(n_objects: usize, error: String) -> ASide {
    ASide {
        seed: None,
        n_objects,
        passed: false,
        bijective: false,
        isometry_deviation: f64::NAN,
        inverse_deviation: f64::NAN,
        corners: None,
        error: Some(error),
    }
}

pub fn a_side_of(c: FiniteCStarCategory, tol: Tolerance, exec: Exec) -> ASide {
    let n_objects = c.n();
    let result = (|| -> Result<ASide, String> {
        let g = gelfand_transform_with(Arc::new(c), tol, exec).map_err(|e| e.to_string())?;
        let chk = g.verify(tol).map_err(|e| e.to_string())?;
        let census = corner_census(&g.spectrum.category, &g.spectrum.decomposition.spectra, tol);
        Ok(ASide {
            seed: None,
            n_objects,
            passed: chk.passed() && census.passed(),
            bijective: chk.bijective,
            isometry_deviation: chk.isometry_deviation,
            inverse_deviation: chk.inverse_deviation,
            corners: Some(census),
            error: None,
        })
    })();
    result.unwrap_or_else(|e| a_side_failed(n_objects, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct TSide {
    pub seed: Option<u64>,
    pub passed: bool,
    pub invertible: bool,
    pub isomorphic: bool,
    /// Largest defect of `𝔈_S` and of the isomorphism as spaceoid morphisms.
    pub morphism_deviation: f64,
    pub error: Option<String>,
}

/// `𝔈_S` is invertible and `S ≅ Σ(Γ(S))` on a generated spaceoid.
pub fn t_side(p: &GenParams, tol: Tolerance, exec: Exec) -> TSide {
    let mut out = match gen_spaceoid(p) {
        Ok(s) => t_side_of(s, tol, exec),
        Err(e) => TSide {
            seed: None,
            passed: false,
            invertible: false,
            isomorphic: false,
            morphism_deviation: f64::NAN,
            error: Some(e.to_string()),
        },
    };
    out.seed = Some(p.seed);
    out
}

pub fn t_side_of(s: FiniteSpaceoid, tol: Tolerance, exec: Exec) -> TSide {
    let mut out = TSide {
        seed: None,
        passed: false,
        invertible: false,
        isomorphic: false,
        morphism_deviation: f64::NAN,
        error: None,
    };
    let result = (|| -> Result<(), String> {
        let s = Arc::new(s);
        let report = validate_spaceoid(&s, tol);
        if !report.is_valid() {
            return Err(FunctorError::InvalidSpaceoid(report.summary()).to_string());
        }
        let sections = Arc::new(sections_category(&s, tol).map_err(|e| e.to_string())?);
        let spectrum = Spectrum::new_with(sections, tol, exec).map_err(|e| e.to_string())?;
        let ev = evaluation_transform_with(s.clone(), spectrum).map_err(|e| e.to_string())?;
        out.invertible = ev.is_invertible(tol);
        let iso = spaceoids_isomorphic(&s, &ev.spectrum.spaceoid, tol).map_err(|e| e.to_string())?;
        out.isomorphic = iso.is_some();
        let reports =
            std::iter::once(check_morphism(&ev.morphism, tol)).chain(iso.iter().map(|m| check_morphism(m, tol)));
        out.morphism_deviation =
            reports.flat_map(|r| r.checks.into_iter().map(|c| c.max_deviation)).fold(0.0, f64::max);
        out.passed = out.invertible && out.isomorphic;
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRecovery {
    pub seed: u64,
    pub passed: bool,
    pub corners: Option<CornerCensus>,
    pub error: Option<String>,
}

/// `Σ(C)` of a scrambled generated category is isomorphic to its oracle.
pub fn oracle_recovery(p: &GenParams, tol: Tolerance, exec: Exec) -> OracleRecovery {
    let mut out = OracleRecovery { seed: p.seed, passed: false, corners: None, error: None };
    let result = (|| -> Result<(), String> {
        let (c, oracle) = gen_category(p).map_err(|e| e.to_string())?;
        let spec = Spectrum::new_with(Arc::new(c), tol, exec).map_err(|e| e.to_string())?;
        let census = corner_census(&spec.category, &spec.decomposition.spectra, tol);
        let iso = spaceoids_isomorphic(&spec.spaceoid, &Arc::new(oracle), tol).map_err(|e| e.to_string())?;
        out.passed = iso.is_some() && census.passed();
        out.corners = Some(census);
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::Scramble;

    #[test]
    fn small_sweeps_pass_in_both_modes() {
        let tol = Tolerance::default();
        for exec in [Exec::Sequential, Exec::Parallel] {
            let a = run(exec, 0..6, |s| a_side(&GenParams::sampled(s, Scramble::Unitary), tol, exec));
            assert!(a.iter().all(|r| r.passed), "{a:?}");
            let t = run(exec, 0..6, |s| t_side(&GenParams::sampled(s, Scramble::None), tol, exec));
            assert!(t.iter().all(|r| r.passed), "{t:?}");
            let o = run(exec, 0..6, |s| oracle_recovery(&GenParams::sampled(s, Scramble::Invertible), tol, exec));
            assert!(o.iter().all(|r| r.passed), "{o:?}");
        }
    }
}
