//! Laurent polynomials in the free character variables with cyclotomic coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::cyclo::Cyclo;
use crate::error::LaurentError;

/// Sparse Laurent polynomial; no zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LaurentPoly {
    nvars: usize,
    conductor: u32,
    terms: BTreeMap<Vec<i64>, Cyclo>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize, conductor: u32) -> Self {
        LaurentPoly {
            nvars,
            conductor,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Cyclo) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn one(nvars: usize, conductor: u32) -> Self {
        Self::constant(nvars, Cyclo::one(conductor))
    }

    pub fn monomial(exponents: Vec<i64>, c: Cyclo) -> Self {
        let mut p = Self::zero(exponents.len(), c.conductor());
        if !c.is_zero() {
            p.terms.insert(exponents, c);
        }
        p
    }

    /// The variable `gamma_i`.
    pub fn var(nvars: usize, conductor: u32, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Cyclo::one(conductor))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Cyclo> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Single-term polynomials are the units of the Laurent ring.
    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(e, c)| e.iter().all(|&x| x == 0) && c.is_one())
    }

    /// Lex-greatest term.
    pub fn leading(&self) -> Option<(&Vec<i64>, &Cyclo)> {
        self.terms.iter().next_back()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        assert_eq!(self.conductor, other.conductor, "conductor mismatch");
    }

    fn insert_add(&mut self, e: Vec<i64>, c: Cyclo) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            conductor: self.conductor,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let mut out = Self::zero(self.nvars, self.conductor);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert_add(e, c1.mul(c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Cyclo) -> Self {
        let mut out = Self::zero(self.nvars, self.conductor);
        for (e, x) in &self.terms {
            out.insert_add(e.clone(), x.mul(c));
        }
        out
    }

    /// Inverse of a unit; `None` unless the polynomial is a single term.
    pub fn unit_inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        Some(Self::monomial(e.iter().map(|x| -x).collect(), c.inv()?))
    }

    /// Re-expresses the coefficients in a larger cyclotomic field.
    pub fn embed(&self, conductor: u32) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            conductor,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.embed(conductor)))
                .collect(),
        }
    }

    /// Per-variable (min, max) exponents; `None` for the zero polynomial.
    pub fn exponent_bounds(&self) -> Option<Vec<(i64, i64)>> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut b: Vec<(i64, i64)> = first.iter().map(|&x| (x, x)).collect();
        for e in it {
            for (bi, &x) in b.iter_mut().zip(e) {
                bi.0 = bi.0.min(x);
                bi.1 = bi.1.max(x);
            }
        }
        Some(b)
    }

    /// Removes the gcd monomial and makes the lex-leading coefficient 1.
    pub fn normalized(&self) -> Self {
        let Some(bounds) = self.exponent_bounds() else {
            return self.clone();
        };
        let lead_inv = self
            .leading()
            .and_then(|(_, c)| c.inv())
            .expect("nonzero leading coefficient");
        let mut out = Self::zero(self.nvars, self.conductor);
        for (e, c) in &self.terms {
            let shifted: Vec<i64> = e.iter().zip(&bounds).map(|(x, b)| x - b.0).collect();
            out.terms.insert(shifted, c.mul(&lead_inv));
        }
        out
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64, LaurentError> {
        if point.len() != self.nvars {
            return Err(LaurentError::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.to_complex();
            for (z, &k) in point.iter().zip(e) {
                t *= z.powi(k as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact evaluation; the point's coordinates must share the polynomial's conductor.
    pub fn eval_exact(&self, point: &[Cyclo]) -> Result<Cyclo, LaurentError> {
        if point.len() != self.nvars {
            return Err(LaurentError::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = Cyclo::zero(self.conductor);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (z, &k) in point.iter().zip(e) {
                if k != 0 {
                    t = t.mul(&z.pow(k).ok_or(LaurentError::ZeroCoordinate)?);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    pub fn to_serial(&self) -> Vec<TermSerial> {
        self.terms
            .iter()
            .map(|(e, c)| TermSerial {
                exponents: e.clone(),
                coeff: CoeffSerial {
                    conductor: c.conductor(),
                    rationals: c.rational_strings(),
                },
            })
            .collect()
    }

    pub fn from_serial(nvars: usize, conductor: u32, terms: &[TermSerial]) -> Result<Self, LaurentError> {
        let mut p = Self::zero(nvars, conductor);
        for t in terms {
            if t.exponents.len() != nvars {
                return Err(LaurentError::DimensionMismatch {
                    expected: nvars,
                    got: t.exponents.len(),
                });
            }
            let coeffs = t
                .coeff
                .rationals
                .iter()
                .map(|s| s.parse::<BigRational>().map_err(|_| LaurentError::BadRational(s.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let c = Cyclo::from_coeffs(t.coeff.conductor, coeffs).embed(conductor);
            p.insert_add(t.exponents.clone(), c);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSerial {
    pub conductor: u32,
    pub rationals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSerial {
    pub exponents: Vec<i64>,
    pub coeff: CoeffSerial,
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("g{}", i + 1)
                    } else {
                        format!("g{}^{k}", i + 1)
                    }
                })
                .collect();
            let cs = c.to_string();
            let (neg, body) = match cs.strip_prefix('-') {
                Some(rest) if c.rational_part().is_some() => (true, rest.to_string()),
                _ => (false, cs),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            match (mono.is_empty(), body.as_str()) {
                (true, _) => write!(f, "{body}")?,
                (false, "1") => write!(f, "{}", mono.join("*"))?,
                (false, _) => write!(f, "{body}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1_minus_1() -> LaurentPoly {
        LaurentPoly::var(1, 1, 0).sub(&LaurentPoly::one(1, 1))
    }

    #[test]
    fn evaluation_examples() {
        let p = g1_minus_1();
        assert_eq!(p.eval(&[Complex64::new(1.0, 0.0)]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(p.eval(&[Complex64::new(2.0, 0.0)]).unwrap(), Complex64::new(1.0, 0.0));
        let q = LaurentPoly::monomial(vec![1, -1], Cyclo::one(1));
        let v = q.eval(&[Complex64::new(6.0, 0.0), Complex64::new(2.0, 0.0)]).unwrap();
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            q.eval(&[Complex64::new(1.0, 0.0)]),
            Err(LaurentError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn normalization_strips_monomials_and_scales() {
        let p = g1_minus_1();
        let q = p
            .mul(&LaurentPoly::monomial(vec![-3], Cyclo::from_int(1, -5)))
            .normalized();
        assert_eq!(q, p);
        assert_eq!(q.normalized(), q);
        assert_eq!(q.to_string(), "g1 - 1");
        let mono = LaurentPoly::monomial(vec![4, -2], Cyclo::root_of_unity(6, 1)).normalized();
        assert!(mono.is_one());
    }

    #[test]
    fn unit_inverse_round_trip() {
        let u = LaurentPoly::monomial(vec![2, -1], Cyclo::root_of_unity(3, 1));
        let prod = u.mul(&u.unit_inverse().unwrap());
        assert!(prod.is_one());
        assert!(g1_minus_1().unit_inverse().is_none());
    }

    #[test]
    fn serial_round_trip() {
        let p = g1_minus_1().embed(4).scale(&Cyclo::root_of_unity(4, 1));
        let p = LaurentPoly::from_serial(1, 4, &p.to_serial()).unwrap().sub(&p);
        assert!(p.is_zero());
    }
}
