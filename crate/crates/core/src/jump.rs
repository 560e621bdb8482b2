//! Jump loci of twisted cohomology as minor ideals, with sampling and torsion
//! certification of their zero sets.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cech::{CechComplex, CharacterValue, Scalars, DEFAULT_RANK_TOL};
use crate::error::CechError;
use crate::laurent::{
    fitting_generators, laurent_minors, lcm_all, minor_count, numeric_rank, Cyclo, LaurentPoly, TermSerial,
};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_MINOR_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericRank {
    pub rank: usize,
    pub samples: Vec<usize>,
    pub agree: bool,
}

/// Numeric rank of `A_nu` at three independent random characters.
pub fn generic_rank(c: &CechComplex, nu: usize, seed: u64) -> Result<GenericRank, CechError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (nu as u64).wrapping_mul(0x9E37_79B9));
    let mut samples = Vec::with_capacity(3);
    for _ in 0..3 {
        let chi = CharacterValue::random(&mut rng, c.free_rank(), c.torsion_orders());
        samples.push(c.coboundary_rank(nu, &chi, Scalars::Numeric { tol: DEFAULT_RANK_TOL })?);
    }
    let rank = *samples.iter().max().unwrap_or(&0);
    let agree = samples.iter().all(|&s| s == rank);
    Ok(GenericRank { rank, samples, agree })
}

/// Generators for one torsion component of the character group.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentIdeal {
    pub torsion: Vec<u32>,
    pub generators: Vec<LaurentPoly>,
}

/// The locus `{dim H^p >= dim H^p(gamma_0)}` cut out by the `(q_nu + 1)`-minors of
/// `A_{p-1}` and `A_p`, where `q_nu` is the rank at the reference character.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpIdeal {
    pub degree: usize,
    pub reference: CharacterValue,
    pub reference_dim: usize,
    /// `(q_{p-1}, q_p)`.
    pub q: (usize, usize),
    pub components: Vec<ComponentIdeal>,
    pub method: String,
}

impl JumpIdeal {
    /// Generators on the reference character's torsion component.
    pub fn generators(&self) -> &[LaurentPoly] {
        let t = self.reference.torsion();
        self.components
            .iter()
            .find(|c| c.torsion == t)
            .map(|c| c.generators.as_slice())
            .unwrap_or(&[])
    }

    fn component(&self, torsion: &[u32]) -> Option<&ComponentIdeal> {
        self.components.iter().find(|c| c.torsion == torsion)
    }
}

fn torsion_tuples(orders: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &o in orders {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..o).map(move |k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    out
}

fn rank_at(c: &CechComplex, nu: usize, chi: &CharacterValue) -> Result<usize, CechError> {
    let scalars = match chi {
        CharacterValue::Exact { .. } => Scalars::Exact,
        CharacterValue::Numeric { .. } => Scalars::Numeric { tol: DEFAULT_RANK_TOL },
    };
    c.coboundary_rank(nu, chi, scalars)
}

/// Minor ideal of `A_p` and `A_{p-1}` at the reference character.
pub fn jump_ideal(
    c: &CechComplex,
    p: usize,
    reference: &CharacterValue,
    budget: u128,
) -> Result<JumpIdeal, CechError> {
    let q_prev = if p == 0 { 0 } else { rank_at(c, p - 1, reference)? };
    let q_p = rank_at(c, p, reference)?;
    let reference_dim = c.count(p) - q_p - q_prev;
    let mut used_reduction = false;
    let mut components = Vec::new();
    for torsion in torsion_tuples(c.torsion_orders()) {
        let mut gens = BTreeSet::new();
        let mut blocks = vec![(p, q_p)];
        if p > 0 {
            blocks.push((p - 1, q_prev));
        }
        for (nu, q) in blocks {
            if nu > c.dimension() {
                continue;
            }
            let m = c.coboundary_symbolic(nu, &torsion)?.into_inner();
            let k = q + 1;
            if k > m.rows().min(m.cols()) {
                continue;
            }
            let found = if minor_count(m.rows(), m.cols(), k) <= budget {
                laurent_minors(&m, k, budget)?
            } else {
                used_reduction = true;
                fitting_generators(&m, k, budget)?
                    .into_iter()
                    .filter(|g| !g.is_zero())
                    .map(|g| g.normalized())
                    .collect()
            };
            gens.extend(found);
        }
        components.push(ComponentIdeal {
            torsion,
            generators: gens.into_iter().collect(),
        });
    }
    Ok(JumpIdeal {
        degree: p,
        reference: reference.clone(),
        reference_dim,
        q: (q_prev, q_p),
        components,
        method: if used_reduction {
            "unit-pivot reduction".into()
        } else {
            "minors".into()
        },
    })
}

/// True when every generator of the character's component has modulus below `tol`.
pub fn is_in_jump_locus(ideal: &JumpIdeal, chi: &CharacterValue, tol: f64) -> Result<bool, CechError> {
    let Some(comp) = ideal.component(chi.torsion()) else {
        return Err(CechError::BadCharacter("torsion component not covered by the ideal".into()));
    };
    let (free, _) = chi.numeric_parts();
    for g in &comp.generators {
        if g.eval(&free)?.norm() >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact membership for a character with cyclotomic free coordinates.
pub fn is_in_jump_locus_exact(ideal: &JumpIdeal, chi: &CharacterValue) -> Result<bool, CechError> {
    let CharacterValue::Exact { free, torsion } = chi else {
        return Err(CechError::BadCharacter("exact membership needs an exact character".into()));
    };
    let Some(comp) = ideal.component(torsion) else {
        return Err(CechError::BadCharacter("torsion component not covered by the ideal".into()));
    };
    let n = lcm_all(
        free.iter()
            .map(Cyclo::conductor)
            .chain(comp.generators.iter().map(LaurentPoly::conductor)),
    );
    let point: Vec<Cyclo> = free.iter().map(|z| z.embed(n)).collect();
    for g in &comp.generators {
        if !g.embed(n).eval_exact(&point)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Definitional membership: `dim H^p(chi) >= dim H^p(gamma_0)`.
pub fn definitional_membership(c: &CechComplex, ideal: &JumpIdeal, chi: &CharacterValue) -> Result<bool, CechError> {
    let scalars = match chi {
        CharacterValue::Exact { .. } => Scalars::Exact,
        CharacterValue::Numeric { .. } => Scalars::Numeric { tol: DEFAULT_RANK_TOL },
    };
    Ok(c.cohomology_dim(chi, ideal.degree, scalars)? >= ideal.reference_dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub character: Vec<[f64; 2]>,
    pub order: Option<u32>,
    pub coordinate_orders: Vec<Option<u32>>,
    pub search_bound: u32,
}

fn coordinate_order(z: Complex64, n_max: u32) -> Option<u32> {
    if (z.norm() - 1.0).abs() > 1e-10 {
        return None;
    }
    (1..=n_max).find(|&k| (z.powu(k) - 1.0).norm() < 1e-10)
}

/// Smallest `k <= n_max` with every coordinate a `k`-th root of unity.
pub fn torsion_order(coords: &[Complex64], n_max: u32) -> TorsionReport {
    let coordinate_orders: Vec<Option<u32>> = coords.iter().map(|&z| coordinate_order(z, n_max)).collect();
    let order = if coordinate_orders.iter().all(Option::is_some) {
        let l = lcm_all(coordinate_orders.iter().map(|o| o.unwrap_or(1)));
        (l <= n_max && coords.iter().all(|z| (z.powu(l) - 1.0).norm() < 1e-10)).then_some(l)
    } else {
        None
    };
    TorsionReport {
        character: coords.iter().map(|z| [z.re, z.im]).collect(),
        order,
        coordinate_orders,
        search_bound: n_max,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetPoint {
    pub character: Vec<[f64; 2]>,
    pub certified_exact: bool,
    pub isolated: bool,
    pub cohomology_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSerial {
    pub display: String,
    pub terms: Vec<TermSerial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSerial {
    pub torsion: Vec<u32>,
    pub generators: Vec<GeneratorSerial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub degree: usize,
    pub generic_dims: Vec<usize>,
    pub generic_ranks: Vec<GenericRank>,
    pub reference_dim: usize,
    pub q: (usize, usize),
    pub method: String,
    pub generators: Vec<ComponentSerial>,
    pub sampled_zero_set: Vec<ZeroSetPoint>,
    pub random_hits: usize,
    pub random_samples: usize,
    pub torsion_candidates_checked: usize,
    pub torsion_reports: Vec<TorsionReport>,
    pub membership_checks: usize,
    pub membership_disagreements: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpOptions {
    pub seed: u64,
    pub random_samples: usize,
    pub membership_samples: usize,
    pub max_torsion_order: u32,
    /// Upper bound on torsion candidates evaluated; larger sets are subsampled.
    pub max_candidates: usize,
    pub budget: u128,
    pub tol: f64,
}

impl Default for JumpOptions {
    fn default() -> Self {
        JumpOptions {
            seed: DEFAULT_SEED,
            random_samples: 200,
            membership_samples: 100,
            max_torsion_order: 6,
            max_candidates: 25_000,
            budget: DEFAULT_MINOR_BUDGET,
            tol: 1e-8,
        }
    }
}

pub fn serialize_generators(ideal: &JumpIdeal) -> Vec<ComponentSerial> {
    ideal
        .components
        .iter()
        .map(|c| ComponentSerial {
            torsion: c.torsion.clone(),
            generators: c
                .generators
                .iter()
                .map(|g| GeneratorSerial {
                    display: g.to_string(),
                    terms: g.to_serial(),
                })
                .collect(),
        })
        .collect()
}

/// Full zero-set analysis: ideal, random sampling, torsion candidates with exact
/// certification, and the definitional membership cross-check.
pub fn analyze(c: &CechComplex, p: usize, reference: &CharacterValue, opts: &JumpOptions) -> Result<JumpReport, CechError> {
    use rand::seq::SliceRandom;

    let ideal = jump_ideal(c, p, reference, opts.budget)?;
    let generic_ranks = (0..=c.dimension())
        .map(|nu| generic_rank(c, nu, opts.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let generic_dims: Vec<usize> = (0..=c.dimension())
        .map(|q| c.count(q) - generic_ranks[q].rank - if q == 0 { 0 } else { generic_ranks[q - 1].rank })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut random_hits = 0;
    for _ in 0..opts.random_samples {
        let chi = CharacterValue::random(&mut rng, c.free_rank(), c.torsion_orders());
        if is_in_jump_locus(&ideal, &chi, opts.tol)? {
            random_hits += 1;
        }
    }

    let mut membership_disagreements = 0;
    for _ in 0..opts.membership_samples {
        let chi = CharacterValue::random(&mut rng, c.free_rank(), c.torsion_orders());
        if is_in_jump_locus(&ideal, &chi, opts.tol)? != definitional_membership(c, &ideal, &chi)? {
            membership_disagreements += 1;
        }
    }

    let mut candidates = CharacterValue::torsion_characters(c.free_rank(), c.torsion_orders(), opts.max_torsion_order);
    if candidates.len() > opts.max_candidates {
        candidates.shuffle(&mut rng);
        candidates.truncate(opts.max_candidates);
        // The reference torsion point is always examined.
        candidates.push(CharacterValue::exact(vec![Cyclo::one(1); c.free_rank()], reference.torsion().to_vec()));
    }
    let checked = candidates.len();
    let mut zero_set = Vec::new();
    let mut torsion_reports = Vec::new();
    let mut seen = BTreeSet::new();
    for chi in candidates {
        if !is_in_jump_locus(&ideal, &chi, opts.tol)? {
            continue;
        }
        let certified = is_in_jump_locus_exact(&ideal, &chi)?;
        let coords = chi.coordinates(c.torsion_orders());
        let key: Vec<(i64, i64)> = coords
            .iter()
            .map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64))
            .collect();
        if !seen.insert(key) {
            continue;
        }
        let (free, tors) = chi.numeric_parts();
        let mut isolated = true;
        for _ in 0..8 {
            let nearby: Vec<Complex64> = free
                .iter()
                .map(|z| {
                    use rand::Rng;
                    z * Complex64::from_polar(1.0 + rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3))
                })
                .collect();
            let probe = CharacterValue::numeric(nearby, tors.to_vec());
            if c.free_rank() > 0 && is_in_jump_locus(&ideal, &probe, opts.tol)? {
                isolated = false;
            }
        }
        let dim = c.cohomology_dim(&chi, p, Scalars::Exact)?;
        torsion_reports.push(torsion_order(&coords, opts.max_torsion_order.max(12)));
        zero_set.push(ZeroSetPoint {
            character: coords.iter().map(|z| [z.re, z.im]).collect(),
            certified_exact: certified,
            isolated,
            cohomology_dim: dim,
        });
    }

    Ok(JumpReport {
        degree: p,
        generic_dims,
        generic_ranks,
        reference_dim: ideal.reference_dim,
        q: ideal.q,
        method: ideal.method.clone(),
        generators: serialize_generators(&ideal),
        sampled_zero_set: zero_set,
        random_hits,
        random_samples: opts.random_samples,
        torsion_candidates_checked: checked,
        torsion_reports,
        membership_checks: opts.membership_samples,
        membership_disagreements,
        seed: opts.seed,
    })
}

/// Largest-rank cross-check: the exact symbolic rank equals the numeric rank at
/// a random character.
pub fn exact_vs_numeric_rank(c: &CechComplex, nu: usize, seed: u64) -> Result<(usize, usize), CechError> {
    let m = c.coboundary_symbolic(nu, &vec![0; c.torsion_orders().len()])?.into_inner();
    let exact = crate::laurent::symbolic_rank(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = CharacterValue::random(&mut rng, c.free_rank(), &vec![1; c.torsion_orders().len()]);
    let (free, _) = chi.numeric_parts();
    let numeric = numeric_rank(&m.eval(&free)?, DEFAULT_RANK_TOL)?;
    Ok((exact, numeric))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::data;

    fn one(n: usize) -> CharacterValue {
        CharacterValue::exact(vec![Cyclo::one(1); n], vec![])
    }

    #[test]
    fn circle3_ideal_at_trivial() {
        let c = data::circle3().validate().unwrap();
        let ideal = jump_ideal(&c, 0, &one(1), DEFAULT_MINOR_BUDGET).unwrap();
        let names: Vec<String> = ideal.generators().iter().map(|g| g.to_string()).collect();
        assert_eq!(names, vec!["g1 - 1"]);
        let at = |x: Complex64| CharacterValue::numeric(vec![x], vec![]);
        assert!(is_in_jump_locus(&ideal, &at(Complex64::new(1.0, 0.0)), 1e-8).unwrap());
        assert!(!is_in_jump_locus(&ideal, &at(Complex64::new(-1.0, 0.0)), 1e-8).unwrap());
    }

    #[test]
    fn circle3_ideal_at_generic_point_is_everything() {
        let c = data::circle3().validate().unwrap();
        let two = CharacterValue::exact(vec![Cyclo::from_int(1, 2)], vec![]);
        let ideal = jump_ideal(&c, 0, &two, DEFAULT_MINOR_BUDGET).unwrap();
        assert_eq!(ideal.q, (0, 3));
        assert!(ideal.generators().is_empty());
        assert_eq!(ideal.reference_dim, 0);
    }

    #[test]
    fn torus9_uses_reduction_and_finds_trivial_point() {
        let c = data::torus9().validate().unwrap();
        let ideal = jump_ideal(&c, 0, &one(2), DEFAULT_MINOR_BUDGET).unwrap();
        assert_eq!(ideal.method, "unit-pivot reduction");
        let probe = CharacterValue::numeric(
            vec![Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)],
            vec![],
        );
        assert!(!is_in_jump_locus(&ideal, &probe, 1e-8).unwrap());
        assert!(is_in_jump_locus(&ideal, &one(2).to_numeric(), 1e-8).unwrap());
    }

    #[test]
    fn torsion_order_examples() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(torsion_order(&[c(1.0, 0.0), c(1.0, 0.0)], 12).order, Some(1));
        assert_eq!(torsion_order(&[c(-1.0, 0.0), c(0.0, 1.0)], 12).order, Some(4));
        assert_eq!(torsion_order(&[c(0.5, 0.0)], 12).order, None);
    }

    #[test]
    fn rp2_jump_is_the_sign_character() {
        let c = data::rp2().validate().unwrap();
        let sign = CharacterValue::exact(vec![], vec![1]);
        let rep = analyze(&c, 2, &sign, &JumpOptions::default()).unwrap();
        assert_eq!(rep.reference_dim, 1);
        assert_eq!(rep.sampled_zero_set.len(), 1);
        assert_eq!(rep.torsion_reports[0].order, Some(2));
    }
}
