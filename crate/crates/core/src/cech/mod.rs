//! Twisted Čech complexes of rank-one local systems on a finite nerve.

mod character;
pub mod data;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use character::{CharacterValue, Scalars};

use crate::error::{CechError, DatumViolation};
use crate::laurent::{lcm_all, numeric_rank, Cyclo, CycloMatrix, LaurentMatrix, LaurentPoly, MonomialMatrix};

/// Default relative singular-value tolerance for numeric ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// The serialized form of a twisted nerve: simplices, H_1 generators and the
/// exponent cocycle of the monomial transition functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedCechDatum {
    pub cover_size: usize,
    /// Simplices of positive dimension; every vertex `0..cover_size` is implied.
    pub simplices: Vec<Vec<usize>>,
    pub free_rank: usize,
    #[serde(default)]
    pub torsion_orders: Vec<u32>,
    /// Keys are `"j,k"`; a missing edge carries the zero vector.
    #[serde(default)]
    pub edge_exponents: BTreeMap<String, Vec<i64>>,
}

impl TwistedCechDatum {
    pub fn generator_count(&self) -> usize {
        self.free_rank + self.torsion_orders.len()
    }

    pub fn validate(self) -> Result<CechComplex, Vec<DatumViolation>> {
        CechComplex::new(self)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn parse_edge_key(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// A validated datum with simplices sorted lexicographically in each dimension.
#[derive(Debug, Clone)]
pub struct CechComplex {
    datum: TwistedCechDatum,
    levels: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// Exponents of `g_{jk}` for `j < k`.
    exponents: BTreeMap<(usize, usize), Vec<i64>>,
}

impl CechComplex {
    pub fn new(datum: TwistedCechDatum) -> Result<Self, Vec<DatumViolation>> {
        let mut errs = Vec::new();
        let n = datum.cover_size;
        let g = datum.generator_count();
        if n == 0 {
            errs.push(DatumViolation::Malformed("cover_size must be positive".into()));
        }
        if datum.torsion_orders.iter().any(|&o| o == 0) {
            errs.push(DatumViolation::Malformed("torsion orders must be positive".into()));
        }
        let mut all: BTreeSet<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
        for s in &datum.simplices {
            if s.windows(2).any(|w| w[0] >= w[1]) {
                errs.push(DatumViolation::Malformed(format!(
                    "simplex {s:?} is not strictly increasing"
                )));
                continue;
            }
            if s.iter().any(|&v| v >= n) {
                errs.push(DatumViolation::Malformed(format!(
                    "simplex {s:?} uses a vertex outside 0..{n}"
                )));
                continue;
            }
            if !s.is_empty() {
                all.insert(s.clone());
            }
        }
        for s in &all {
            if s.len() < 3 {
                continue;
            }
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                if !all.contains(&face) {
                    errs.push(DatumViolation::MissingFace {
                        simplex: s.clone(),
                        face,
                    });
                }
            }
        }
        let mut exponents: BTreeMap<(usize, usize), Vec<i64>> = BTreeMap::new();
        let mut reversed: Vec<((usize, usize), Vec<i64>)> = Vec::new();
        for (key, v) in &datum.edge_exponents {
            let Some((j, k)) = parse_edge_key(key) else {
                errs.push(DatumViolation::Malformed(format!("bad edge key `{key}`")));
                continue;
            };
            if v.len() != g {
                errs.push(DatumViolation::Malformed(format!(
                    "edge ({j}, {k}) has {} exponents, expected {g}",
                    v.len()
                )));
                continue;
            }
            let (lo, hi) = (j.min(k), j.max(k));
            if j == k || !all.contains(&vec![lo, hi]) {
                errs.push(DatumViolation::Malformed(format!(
                    "edge ({j}, {k}) is not in the nerve"
                )));
                continue;
            }
            if j < k {
                exponents.insert((j, k), v.clone());
            } else {
                reversed.push(((k, j), v.clone()));
            }
        }
        for ((j, k), v) in reversed {
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            match exponents.get(&(j, k)) {
                Some(fwd) if *fwd != neg => errs.push(DatumViolation::AntisymmetryViolation(j, k)),
                Some(_) => {}
                None => {
                    exponents.insert((j, k), neg);
                }
            }
        }
        for s in &all {
            if s.len() == 2 {
                exponents.entry((s[0], s[1])).or_insert_with(|| vec![0; g]);
            }
        }
        let orders: Vec<i64> = std::iter::repeat(0)
            .take(datum.free_rank)
            .chain(datum.torsion_orders.iter().map(|&o| o as i64))
            .collect();
        for s in all.iter().filter(|s| s.len() == 3) {
            let (a, b, c) = (s[0], s[1], s[2]);
            let (Some(ab), Some(bc), Some(ac)) = (
                exponents.get(&(a, b)),
                exponents.get(&(b, c)),
                exponents.get(&(a, c)),
            ) else {
                continue;
            };
            let ok = (0..g).all(|i| {
                let d = ab[i] + bc[i] - ac[i];
                if orders[i] == 0 {
                    d == 0
                } else {
                    d.rem_euclid(orders[i]) == 0
                }
            });
            if !ok {
                errs.push(DatumViolation::CocycleViolation(a, b, c));
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let top = all.iter().map(Vec::len).max().unwrap_or(1);
        let mut levels = vec![Vec::new(); top];
        for s in all {
            levels[s.len() - 1].push(s);
        }
        let index = levels
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(CechComplex {
            datum,
            levels,
            index,
            exponents,
        })
    }

    pub fn datum(&self) -> &TwistedCechDatum {
        &self.datum
    }

    /// Largest simplex dimension.
    pub fn dimension(&self) -> usize {
        self.levels.len() - 1
    }

    /// Number of `nu`-simplices (0 above the top dimension).
    pub fn count(&self, nu: usize) -> usize {
        self.levels.get(nu).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn simplices(&self, nu: usize) -> &[Vec<usize>] {
        self.levels.get(nu).map_or(&[], Vec::as_slice)
    }

    pub fn free_rank(&self) -> usize {
        self.datum.free_rank
    }

    pub fn torsion_orders(&self) -> &[u32] {
        &self.datum.torsion_orders
    }

    /// Conductor of the coefficient field: lcm of the torsion orders.
    pub fn base_conductor(&self) -> u32 {
        lcm_all(self.datum.torsion_orders.iter().copied())
    }

    pub fn edge_exponent(&self, j: usize, k: usize) -> Option<Vec<i64>> {
        if j < k {
            self.exponents.get(&(j, k)).cloned()
        } else {
            self.exponents
                .get(&(k, j))
                .map(|v| v.iter().map(|x| -x).collect())
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(nu, l)| if nu % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    fn check_dim(&self, nu: usize) -> Result<(), CechError> {
        if nu > self.dimension() {
            return Err(CechError::InvalidDimension {
                nu,
                max: self.dimension(),
            });
        }
        Ok(())
    }

    /// Row structure of the coboundary: for each `(nu+1)`-simplex, the
    /// `(column, sign, twisted)` triples; `twisted` marks the `g_{j0 j1}` term.
    fn stencil(&self, nu: usize) -> Vec<(Vec<usize>, Vec<(usize, i64, bool)>)> {
        let faces = &self.index[nu];
        self.simplices(nu + 1)
            .iter()
            .map(|s| {
                let row = (0..s.len())
                    .map(|lam| {
                        let face: Vec<usize> = s
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != lam)
                            .map(|(_, &v)| v)
                            .collect();
                        let col = faces[&face];
                        if lam == 0 {
                            (col, 1, true)
                        } else {
                            (col, if lam % 2 == 0 { 1 } else { -1 }, false)
                        }
                    })
                    .collect();
                (s.clone(), row)
            })
            .collect()
    }

    fn check_character(&self, chi: &CharacterValue) -> Result<(), CechError> {
        let (f, t) = chi.shape();
        if f != self.free_rank() || t != self.torsion_orders().len() {
            return Err(CechError::CharacterShape {
                free: self.free_rank(),
                tors: self.torsion_orders().len(),
                got_free: f,
                got_tors: t,
            });
        }
        chi.validate(self.torsion_orders())
    }

    /// Symbolic coboundary in the free variables with the torsion part fixed by
    /// residues `k_t` (coordinate `exp(2 pi i k_t / order_t)`).
    pub fn coboundary_symbolic(&self, nu: usize, torsion: &[u32]) -> Result<MonomialMatrix, CechError> {
        self.check_dim(nu)?;
        if torsion.len() != self.torsion_orders().len() {
            return Err(CechError::CharacterShape {
                free: self.free_rank(),
                tors: self.torsion_orders().len(),
                got_free: self.free_rank(),
                got_tors: torsion.len(),
            });
        }
        let n = self.base_conductor();
        let m0 = self.free_rank();
        let mut m = LaurentMatrix::zeros(self.count(nu + 1), self.count(nu), m0, n);
        for (r, (s, row)) in self.stencil(nu).into_iter().enumerate() {
            for (col, sign, twisted) in row {
                let entry = if twisted {
                    let a = self.edge_exponent(s[0], s[1]).expect("edge in nerve");
                    let mut k: i64 = 0;
                    for (t, &ord) in self.torsion_orders().iter().enumerate() {
                        k += a[m0 + t] * torsion[t] as i64 * (n / ord) as i64;
                    }
                    let c = Cyclo::root_of_unity(n, k);
                    LaurentPoly::monomial(a[..m0].to_vec(), if sign < 0 { c.neg() } else { c })
                } else {
                    LaurentPoly::constant(m0, Cyclo::from_int(n, sign))
                };
                m.set(r, col, entry);
            }
        }
        Ok(MonomialMatrix::new(m)?)
    }

    /// Value of `g_{jk}` at a numeric character.
    fn transition_numeric(&self, j: usize, k: usize, chi: &CharacterValue) -> Complex64 {
        let a = self.edge_exponent(j, k).expect("edge in nerve");
        let (free, tors) = chi.numeric_parts();
        let m0 = self.free_rank();
        let mut g = Complex64::new(1.0, 0.0);
        for (z, &e) in free.iter().zip(&a[..m0]) {
            g *= z.powi(e as i32);
        }
        let mut phase = 0.0;
        for ((&kres, &ord), &e) in tors.iter().zip(self.torsion_orders()).zip(&a[m0..]) {
            phase += ((e * kres as i64).rem_euclid(ord as i64)) as f64 / ord as f64;
        }
        g * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
    }

    pub fn coboundary_numeric(&self, nu: usize, chi: &CharacterValue) -> Result<DMatrix<Complex64>, CechError> {
        self.check_dim(nu)?;
        self.check_character(chi)?;
        let mut m = DMatrix::zeros(self.count(nu + 1), self.count(nu));
        for (r, (s, row)) in self.stencil(nu).into_iter().enumerate() {
            for (col, sign, twisted) in row {
                m[(r, col)] = if twisted {
                    self.transition_numeric(s[0], s[1], chi) * sign as f64
                } else {
                    Complex64::new(sign as f64, 0.0)
                };
            }
        }
        Ok(m)
    }

    /// Conductor needed to hold an exact character's values.
    pub fn exact_conductor(&self, chi: &CharacterValue) -> u32 {
        let free = match chi {
            CharacterValue::Exact { free, .. } => lcm_all(free.iter().map(Cyclo::conductor)),
            CharacterValue::Numeric { .. } => 1,
        };
        lcm_all([free, self.base_conductor()])
    }

    pub fn coboundary_exact(&self, nu: usize, chi: &CharacterValue) -> Result<CycloMatrix, CechError> {
        self.check_dim(nu)?;
        self.check_character(chi)?;
        let CharacterValue::Exact { free, torsion } = chi else {
            return Err(CechError::BadCharacter(
                "exact scalars need an exact character".into(),
            ));
        };
        let n = self.exact_conductor(chi);
        let point: Vec<Cyclo> = free.iter().map(|z| z.embed(n)).collect();
        let sym = self.coboundary_symbolic(nu, torsion)?.into_inner().embed(n);
        Ok(sym.eval_exact(&point)?)
    }

    pub fn coboundary_rank(&self, nu: usize, chi: &CharacterValue, scalars: Scalars) -> Result<usize, CechError> {
        if nu > self.dimension() {
            return Ok(0);
        }
        match scalars {
            Scalars::Exact => Ok(self.coboundary_exact(nu, chi)?.rank()),
            Scalars::Numeric { tol } => Ok(numeric_rank(&self.coboundary_numeric(nu, chi)?, tol)?),
        }
    }

    /// `I_p - rank A_p - rank A_{p-1}`.
    pub fn cohomology_dim(&self, chi: &CharacterValue, p: usize, scalars: Scalars) -> Result<usize, CechError> {
        self.check_character(chi)?;
        let ip = self.count(p);
        if ip == 0 {
            return Ok(0);
        }
        let rp = self.coboundary_rank(p, chi, scalars)?;
        let rq = if p == 0 {
            0
        } else {
            self.coboundary_rank(p - 1, chi, scalars)?
        };
        Ok(ip - rp - rq)
    }

    /// All Betti numbers `dim H^0 ..= dim H^top`.
    pub fn cohomology_dims(&self, chi: &CharacterValue, scalars: Scalars) -> Result<Vec<usize>, CechError> {
        self.check_character(chi)?;
        let ranks = (0..=self.dimension())
            .map(|nu| self.coboundary_rank(nu, chi, scalars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..=self.dimension())
            .map(|p| self.count(p) - ranks[p] - if p == 0 { 0 } else { ranks[p - 1] })
            .collect())
    }

    /// Product cover: vertices are pairs `(a, b)` indexed `a * |B| + b`, a set of
    /// pairs spans a simplex when both projections do; exponents concatenate as
    /// `[free A, free B, torsion A, torsion B]`.
    pub fn product(&self, other: &CechComplex) -> TwistedCechDatum {
        let nb = other.datum.cover_size;
        let n = self.datum.cover_size * nb;
        let is_simplex = |c: &CechComplex, verts: &BTreeSet<usize>| {
            let v: Vec<usize> = verts.iter().copied().collect();
            c.index.get(v.len() - 1).is_some_and(|m| m.contains_key(&v))
        };
        let admissible = |set: &[usize]| {
            let pa: BTreeSet<usize> = set.iter().map(|&v| v / nb).collect();
            let pb: BTreeSet<usize> = set.iter().map(|&v| v % nb).collect();
            is_simplex(self, &pa) && is_simplex(other, &pb)
        };
        let mut simplices = Vec::new();
        let mut frontier: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for s in &frontier {
                for v in s[s.len() - 1] + 1..n {
                    let mut t = s.clone();
                    t.push(v);
                    if admissible(&t) {
                        next.push(t);
                    }
                }
            }
            simplices.extend(next.iter().cloned());
            frontier = next;
        }
        let (fa, fb) = (self.free_rank(), other.free_rank());
        let (ta, tb) = (self.torsion_orders().len(), other.torsion_orders().len());
        let mut edge_exponents = BTreeMap::new();
        for s in simplices.iter().filter(|s| s.len() == 2) {
            let (a1, b1, a2, b2) = (s[0] / nb, s[0] % nb, s[1] / nb, s[1] % nb);
            let ea = if a1 == a2 {
                vec![0; fa + ta]
            } else {
                self.edge_exponent(a1, a2).expect("edge")
            };
            let eb = if b1 == b2 {
                vec![0; fb + tb]
            } else {
                other.edge_exponent(b1, b2).expect("edge")
            };
            let mut v = Vec::with_capacity(fa + fb + ta + tb);
            v.extend_from_slice(&ea[..fa]);
            v.extend_from_slice(&eb[..fb]);
            v.extend_from_slice(&ea[fa..]);
            v.extend_from_slice(&eb[fb..]);
            if v.iter().any(|&x| x != 0) {
                edge_exponents.insert(format!("{},{}", s[0], s[1]), v);
            }
        }
        let mut torsion_orders = self.torsion_orders().to_vec();
        torsion_orders.extend_from_slice(other.torsion_orders());
        TwistedCechDatum {
            cover_size: n,
            simplices,
            free_rank: fa + fb,
            torsion_orders,
            edge_exponents,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{laurent_det, DetOptions};

    fn circle3() -> CechComplex {
        data::circle3().validate().unwrap()
    }

    fn num(xs: &[f64]) -> CharacterValue {
        CharacterValue::numeric(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect(), vec![])
    }

    #[test]
    fn circle3_matrix_by_hand() {
        let c = circle3();
        let m = c.coboundary_symbolic(0, &[]).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 3));
        // rows: (0,1), (0,2), (1,2)
        let one = |k| LaurentPoly::constant(1, Cyclo::from_int(1, k));
        assert_eq!(*m.get(0, 0), one(-1));
        assert_eq!(*m.get(0, 1), one(1));
        assert_eq!(*m.get(1, 0), one(-1));
        assert_eq!(*m.get(1, 2), LaurentPoly::var(1, 1, 0));
        assert_eq!(*m.get(2, 1), one(-1));
        assert_eq!(*m.get(2, 2), one(1));
        for r in 0..3 {
            assert_eq!((0..3).filter(|&k| !m.get(r, k).is_zero()).count(), 2);
        }
        let d = laurent_det(&m, DetOptions::default()).unwrap();
        assert_eq!(d.normalized().to_string(), "g1 - 1");
        let top = c.coboundary_symbolic(1, &[]).unwrap();
        assert_eq!((top.rows(), top.cols()), (0, 3));
        assert!(matches!(
            c.coboundary_symbolic(2, &[]),
            Err(CechError::InvalidDimension { nu: 2, max: 1 })
        ));
    }

    #[test]
    fn circle3_cohomology() {
        let c = circle3();
        let s = Scalars::Numeric { tol: DEFAULT_RANK_TOL };
        assert_eq!(c.cohomology_dims(&num(&[1.0]), s).unwrap(), vec![1, 1]);
        assert_eq!(c.cohomology_dims(&num(&[2.0]), s).unwrap(), vec![0, 0]);
        let ex = CharacterValue::exact(vec![Cyclo::from_int(1, 2)], vec![]);
        assert_eq!(c.cohomology_dims(&ex, Scalars::Exact).unwrap(), vec![0, 0]);
    }

    #[test]
    fn validation_reports_each_violation() {
        let mut d = data::circle3();
        d.edge_exponents.insert("2,0".into(), vec![1]);
        let errs = d.validate().unwrap_err();
        assert_eq!(errs, vec![DatumViolation::AntisymmetryViolation(0, 2)]);

        let tet = TwistedCechDatum {
            cover_size: 4,
            simplices: vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3],
                vec![0, 1, 2],
                vec![0, 1, 3],
                vec![0, 2, 3],
                vec![1, 2, 3],
            ],
            free_rank: 1,
            torsion_orders: vec![],
            edge_exponents: [("0,1".to_string(), vec![1]), ("1,2".to_string(), vec![1])]
                .into_iter()
                .collect(),
        };
        let errs = tet.validate().unwrap_err();
        assert!(errs.contains(&DatumViolation::CocycleViolation(0, 1, 2)));

        let missing = TwistedCechDatum {
            cover_size: 3,
            simplices: vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]],
            free_rank: 0,
            torsion_orders: vec![],
            edge_exponents: BTreeMap::new(),
        };
        let errs = missing.validate().unwrap_err();
        assert_eq!(
            errs,
            vec![DatumViolation::MissingFace {
                simplex: vec![0, 1, 2],
                face: vec![0, 2]
            }]
        );
    }

    #[test]
    fn torus_product_counts() {
        let c = circle3();
        let t = c.product(&c).validate().unwrap();
        assert_eq!(t.counts(), vec![9, 36, 36, 9]);
        assert_eq!(t.euler_characteristic(), 0);
        let s = Scalars::Numeric { tol: DEFAULT_RANK_TOL };
        assert_eq!(t.cohomology_dim(&num(&[1.0, 1.0]), 1, s).unwrap(), 2);
    }

    #[test]
    fn coboundary_squares_to_zero() {
        for d in data::all_nerves() {
            let c = d.1.validate().unwrap();
            if c.dimension() < 2 {
                continue;
            }
            let chi = CharacterValue::numeric(
                vec![Complex64::new(3.0, 0.0); c.free_rank()],
                vec![1; c.torsion_orders().len()],
            );
            let a0 = c.coboundary_numeric(0, &chi).unwrap();
            let a1 = c.coboundary_numeric(1, &chi).unwrap();
            assert!((a1 * a0).iter().all(|z| z.norm() < 1e-10), "{}", d.0);
        }
    }

    #[test]
    fn known_betti_numbers() {
        let s = Scalars::Numeric { tol: DEFAULT_RANK_TOL };
        let generic = |n| CharacterValue::numeric(vec![Complex64::new(1.3, 0.4); n], vec![]);
        let w = data::wedge2().validate().unwrap();
        assert_eq!(w.cohomology_dims(&generic(2), s).unwrap(), vec![0, 1]);
        assert_eq!(w.cohomology_dims(&num(&[1.0, 1.0]), s).unwrap(), vec![1, 2]);
        let g = data::genus2().validate().unwrap();
        let chi = CharacterValue::numeric(
            [1.3, 0.7, 1.9, 0.6].iter().map(|&x| Complex64::from_polar(x, x)).collect(),
            vec![],
        );
        assert_eq!(g.cohomology_dims(&chi, s).unwrap(), vec![0, 2, 0]);
        assert_eq!(g.cohomology_dims(&num(&[1.0; 4]), s).unwrap(), vec![1, 4, 1]);
        let r = data::rp2().validate().unwrap();
        let triv = CharacterValue::exact(vec![], vec![0]);
        let sign = CharacterValue::exact(vec![], vec![1]);
        assert_eq!(r.cohomology_dims(&triv, Scalars::Exact).unwrap(), vec![1, 0, 0]);
        assert_eq!(r.cohomology_dims(&sign, Scalars::Exact).unwrap(), vec![0, 0, 1]);
        assert_eq!(r.cohomology_dims(&sign.to_numeric(), s).unwrap(), vec![0, 0, 1]);
    }
}
