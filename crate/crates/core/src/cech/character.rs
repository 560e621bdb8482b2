use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CechError;
use crate::laurent::Cyclo;

/// Scalar field used for ranks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalars {
    Exact,
    Numeric { tol: f64 },
}

/// A rank-one character: free coordinates in `C*` and torsion coordinates stored
/// as residues `k` meaning `exp(2 pi i k / order)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CharacterValue {
    Numeric { free: Vec<Complex64>, torsion: Vec<u32> },
    Exact { free: Vec<Cyclo>, torsion: Vec<u32> },
}

impl CharacterValue {
    pub fn numeric(free: Vec<Complex64>, torsion: Vec<u32>) -> Self {
        CharacterValue::Numeric { free, torsion }
    }

    pub fn exact(free: Vec<Cyclo>, torsion: Vec<u32>) -> Self {
        CharacterValue::Exact { free, torsion }
    }

    pub fn trivial(free_rank: usize, torsion_count: usize) -> Self {
        Self::numeric(vec![Complex64::new(1.0, 0.0); free_rank], vec![0; torsion_count])
    }

    /// Builds the torsion residues from complex values, which must be `order`-th
    /// roots of unity within `1e-12`.
    pub fn numeric_from_values(
        free: Vec<Complex64>,
        torsion_values: &[Complex64],
        orders: &[u32],
    ) -> Result<Self, CechError> {
        if torsion_values.len() != orders.len() {
            return Err(CechError::BadCharacter("torsion length mismatch".into()));
        }
        let mut torsion = Vec::with_capacity(orders.len());
        for (z, &ord) in torsion_values.iter().zip(orders) {
            let k = (z.arg() / (2.0 * PI) * ord as f64).round().rem_euclid(ord as f64) as u32;
            let snapped = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / ord as f64);
            if (z - snapped).norm() > 1e-12 {
                return Err(CechError::BadCharacter(format!(
                    "{z} is not a root of unity of order {ord}"
                )));
            }
            torsion.push(k);
        }
        Ok(Self::numeric(free, torsion))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            CharacterValue::Numeric { free, torsion } => (free.len(), torsion.len()),
            CharacterValue::Exact { free, torsion } => (free.len(), torsion.len()),
        }
    }

    pub fn torsion(&self) -> &[u32] {
        match self {
            CharacterValue::Numeric { torsion, .. } | CharacterValue::Exact { torsion, .. } => torsion,
        }
    }

    pub fn validate(&self, orders: &[u32]) -> Result<(), CechError> {
        for (&k, &o) in self.torsion().iter().zip(orders) {
            if k >= o {
                return Err(CechError::BadCharacter(format!(
                    "torsion residue {k} out of range for order {o}"
                )));
            }
        }
        let zero_free = match self {
            CharacterValue::Numeric { free, .. } => free.iter().any(|z| z.norm() == 0.0 || !z.re.is_finite() || !z.im.is_finite()),
            CharacterValue::Exact { free, .. } => free.iter().any(Cyclo::is_zero),
        };
        if zero_free {
            return Err(CechError::BadCharacter("free coordinates must be nonzero and finite".into()));
        }
        Ok(())
    }

    /// Free coordinates as complex numbers, and torsion residues.
    pub fn numeric_parts(&self) -> (Vec<Complex64>, &[u32]) {
        match self {
            CharacterValue::Numeric { free, torsion } => (free.clone(), torsion),
            CharacterValue::Exact { free, torsion } => (free.iter().map(Cyclo::to_complex).collect(), torsion),
        }
    }

    pub fn to_numeric(&self) -> CharacterValue {
        let (free, t) = self.numeric_parts();
        CharacterValue::numeric(free, t.to_vec())
    }

    /// All coordinates as complex numbers (free first, then torsion).
    pub fn coordinates(&self, orders: &[u32]) -> Vec<Complex64> {
        let (mut free, t) = self.numeric_parts();
        free.extend(
            t.iter()
                .zip(orders)
                .map(|(&k, &o)| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / o as f64)),
        );
        free
    }

    /// Random character: free moduli uniform in `[0.5, 2]`, uniform phases,
    /// uniform torsion residues.
    pub fn random<R: Rng>(rng: &mut R, free_rank: usize, orders: &[u32]) -> Self {
        let free = (0..free_rank)
            .map(|_| {
                let r = rng.random_range(0.5..2.0);
                let th = rng.random_range(0.0..2.0 * PI);
                Complex64::from_polar(r, th)
            })
            .collect();
        let torsion = orders.iter().map(|&o| rng.random_range(0..o)).collect();
        Self::numeric(free, torsion)
    }

    /// Random exact character with small nonzero rational free coordinates.
    pub fn random_rational<R: Rng>(rng: &mut R, free_rank: usize, orders: &[u32]) -> Self {
        let free = (0..free_rank)
            .map(|_| {
                let mut p: i64 = rng.random_range(1..=12);
                if rng.random_bool(0.5) {
                    p = -p;
                }
                let q: i64 = rng.random_range(1..=7);
                Cyclo::from_ratio(1, p, q)
            })
            .collect();
        let torsion = orders.iter().map(|&o| rng.random_range(0..o)).collect();
        Self::exact(free, torsion)
    }

    /// Every character whose coordinates are roots of unity of order dividing
    /// some `k <= max_order`, free coordinates exact in `Q(zeta_L)` with
    /// `L = lcm(1..=max_order)`.
    pub fn torsion_characters(free_rank: usize, orders: &[u32], max_order: u32) -> Vec<Self> {
        let l = crate::laurent::lcm_all(1..=max_order);
        let exps: Vec<u32> = (0..l)
            .filter(|&e| {
                let ord = l / num_integer::gcd(e, l);
                ord <= max_order
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; free_rank];
        let tors_all = torsion_tuples(orders);
        loop {
            let free: Vec<Cyclo> = idx.iter().map(|&i| Cyclo::root_of_unity(l, exps[i] as i64)).collect();
            for t in &tors_all {
                out.push(Self::exact(free.clone(), t.clone()));
            }
            let mut v = free_rank;
            loop {
                if v == 0 {
                    return out;
                }
                v -= 1;
                idx[v] += 1;
                if idx[v] < exps.len() {
                    break;
                }
                idx[v] = 0;
            }
        }
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torsion_enumeration_counts() {
        // Roots of unity of order <= 6: 1 + 1 + 2 + 2 + 4 + 2 = 12.
        assert_eq!(CharacterValue::torsion_characters(1, &[], 6).len(), 12);
        assert_eq!(CharacterValue::torsion_characters(2, &[2], 6).len(), 12 * 12 * 2);
        assert_eq!(CharacterValue::torsion_characters(0, &[3], 6).len(), 3);
    }

    #[test]
    fn residues_from_values() {
        let i = Complex64::new(0.0, 1.0);
        let chi = CharacterValue::numeric_from_values(vec![], &[i], &[4]).unwrap();
        assert_eq!(chi.torsion(), &[1]);
        assert!(CharacterValue::numeric_from_values(vec![], &[i], &[3]).is_err());
    }
}
