//! Exact arithmetic in the cyclotomic field `Q(zeta_N)`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^(phi(N)-1)` and
//! every product is reduced modulo the `N`-th cyclotomic polynomial.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The `N`-th cyclotomic polynomial, monic, lowest degree first.
#[derive(Debug, PartialEq, Eq)]
pub struct Modulus {
    conductor: u32,
    poly: Vec<BigInt>,
}

impl Modulus {
    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }
}

fn modulus_cache() -> &'static Mutex<HashMap<u32, Arc<Modulus>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Modulus>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Integer coefficients of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u32) -> Vec<BigInt> {
    assert!(n >= 1, "conductor must be positive");
    // x^n - 1 divided by every Phi_d with d | n, d < n.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = exact_div_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![BigInt::zero(); qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (i, di) in den.iter().enumerate() {
            rem[k + i] -= &c * di;
        }
        quot[k] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

/// Shared handle on the cyclotomic modulus for conductor `n`.
pub fn modulus(n: u32) -> Arc<Modulus> {
    let mut cache = modulus_cache().lock().expect("modulus cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            Arc::new(Modulus {
                conductor: n,
                poly: cyclotomic_polynomial(n),
            })
        })
        .clone()
}

pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
}

/// An element of `Q(zeta_N)`.
#[derive(Clone)]
pub struct Cyclo {
    modulus: Arc<Modulus>,
    coeffs: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero(conductor: u32) -> Self {
        let m = modulus(conductor);
        let d = m.degree();
        Cyclo {
            modulus: m,
            coeffs: vec![BigRational::zero(); d],
        }
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_rational(conductor, BigRational::one())
    }

    pub fn from_rational(conductor: u32, q: BigRational) -> Self {
        let mut z = Self::zero(conductor);
        z.coeffs[0] = q;
        z
    }

    pub fn from_int(conductor: u32, k: i64) -> Self {
        Self::from_rational(conductor, BigRational::from_integer(BigInt::from(k)))
    }

    pub fn from_ratio(conductor: u32, num: i64, den: i64) -> Self {
        Self::from_rational(
            conductor,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    /// Builds an element from power-basis coefficients (reduced on the way in).
    pub fn from_coeffs(conductor: u32, coeffs: Vec<BigRational>) -> Self {
        let m = modulus(conductor);
        let mut z = Cyclo {
            modulus: m,
            coeffs: Vec::new(),
        };
        z.coeffs = z.reduce(coeffs);
        z
    }

    /// `zeta_N^k` for any integer `k`.
    pub fn root_of_unity(conductor: u32, k: i64) -> Self {
        let n = conductor as i64;
        let e = k.rem_euclid(n) as usize;
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = BigRational::one();
        Self::from_coeffs(conductor, v)
    }

    pub fn conductor(&self) -> u32 {
        self.modulus.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// True when the element lies in `Q`.
    pub fn rational_part(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn reduce(&self, mut p: Vec<BigRational>) -> Vec<BigRational> {
        let phi = &self.modulus.poly;
        let d = phi.len() - 1;
        if p.len() > d {
            for k in (d..p.len()).rev() {
                let c = std::mem::replace(&mut p[k], BigRational::zero());
                if c.is_zero() {
                    continue;
                }
                for i in 0..d {
                    if !phi[i].is_zero() {
                        let t = &c * BigRational::from_integer(phi[i].clone());
                        p[k - d + i] -= t;
                    }
                }
            }
            p.truncate(d);
        }
        p.resize(d, BigRational::zero());
        p
    }

    /// Re-expresses `self` in `Q(zeta_M)` where `N | M`.
    pub fn embed(&self, target: u32) -> Cyclo {
        let n = self.conductor();
        assert!(target % n == 0, "conductor {n} does not divide {target}");
        if target == n {
            return self.clone();
        }
        let step = (target / n) as usize;
        let mut v = vec![BigRational::zero(); step * self.coeffs.len().max(1)];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * step] = c.clone();
        }
        Cyclo::from_coeffs(target, v)
    }

    fn check_same(&self, other: &Cyclo) {
        assert_eq!(
            self.conductor(),
            other.conductor(),
            "mixed conductors; embed first"
        );
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        self.check_same(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Cyclo {
            modulus: self.modulus.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        self.check_same(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Cyclo {
            modulus: self.modulus.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo {
            modulus: self.modulus.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        self.check_same(other);
        if let Some(q) = other.rational_part() {
            return self.scale(q);
        }
        if let Some(q) = self.rational_part() {
            return other.scale(q);
        }
        let d = self.coeffs.len();
        let mut p = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    p[i + j] += a * b;
                }
            }
        }
        Cyclo {
            modulus: self.modulus.clone(),
            coeffs: self.reduce(p),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Cyclo {
        Cyclo {
            modulus: self.modulus.clone(),
            coeffs: self.coeffs.iter().map(|a| a * q).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in `Q[x]`.
    pub fn inv(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        if let Some(q) = self.rational_part() {
            return Some(Cyclo::from_rational(self.conductor(), q.recip()));
        }
        let phi: Vec<BigRational> = self
            .modulus
            .poly
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let a = trim(self.coeffs.clone());
        // Invariant: s * a == r (mod phi).
        let (mut r0, mut r1) = (phi, a);
        let (mut s0, mut s1) = (vec![], vec![BigRational::one()]);
        while !(r1.len() == 1 && !r1[0].is_zero()) {
            let (q, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            if r1.is_empty() {
                return None;
            }
        }
        let c = r1[0].recip();
        let s: Vec<BigRational> = s1.iter().map(|x| x * &c).collect();
        Some(Cyclo::from_coeffs(self.conductor(), s))
    }

    pub fn pow(&self, e: i64) -> Option<Cyclo> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Cyclo::one(self.conductor());
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Some(acc)
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.conductor() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * std::f64::consts::PI * i as f64 / n;
            acc += Complex64::from_polar(ratio_to_f64(c), angle);
        }
        acc
    }

    /// Coefficients rendered as `"p/q"` strings.
    pub fn rational_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // Fall back to scaling for huge numerators/denominators.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900) as usize;
            let a = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let b = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut p = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            p[i + j] += x * y;
        }
    }
    trim(p)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut p = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        p[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        p[i] -= y;
    }
    trim(p)
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &c * bi;
        }
        q[k] = c;
        r = trim(r);
    }
    (trim(q), r)
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        self.conductor() == other.conductor() && self.coeffs == other.coeffs
    }
}

impl Eq for Cyclo {}

impl PartialOrd for Cyclo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cyclo {
    fn cmp(&self, other: &Self) -> Ordering {
        self.conductor()
            .cmp(&other.conductor())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.rational_part() {
            return write!(f, "{q}");
        }
        let mut first = true;
        write!(f, "(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if i == 1 {
                        write!(f, "z{}", self.conductor())?
                    } else {
                        write!(f, "z{}^{i}", self.conductor())?
                    }
                }
            }
        }
        write!(f, ")")
    }
}

/// Least common multiple of a list of conductors (1 for an empty list).
pub fn lcm_all<I: IntoIterator<Item = u32>>(it: I) -> u32 {
    it.into_iter().fold(1u32, |acc, x| acc.lcm(&x.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        let as_i64 = |n| {
            cyclotomic_polynomial(n)
                .iter()
                .map(|c| i64::try_from(c.clone()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(3), vec![1, 1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(12), 4);
    }

    #[test]
    fn roots_of_unity_relations() {
        for n in [2u32, 3, 4, 6] {
            let z = Cyclo::root_of_unity(n, 1);
            assert!(z.pow(n as i64).unwrap().is_one(), "zeta_{n}^{n} != 1");
            let mut sum = Cyclo::zero(n);
            for k in 0..n {
                sum = sum.add(&Cyclo::root_of_unity(n, k as i64));
            }
            assert!(sum.is_zero(), "sum of {n}-th roots of unity != 0");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let z = Cyclo::root_of_unity(5, 1);
        let a = z.add(&Cyclo::from_int(5, 3)).mul(&z.mul(&z).sub(&Cyclo::from_ratio(5, 1, 2)));
        let inv = a.inv().unwrap();
        assert!(a.mul(&inv).is_one());
        assert!(Cyclo::zero(5).inv().is_none());
    }

    #[test]
    fn embedding_preserves_value() {
        let z = Cyclo::root_of_unity(3, 1).add(&Cyclo::from_int(3, 2));
        let e = z.embed(6);
        assert!((z.to_complex() - e.to_complex()).norm() < 1e-14);
        let e12 = Cyclo::root_of_unity(4, 1).embed(12);
        assert!((e12.to_complex() - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn to_complex_matches_polar() {
        let z = Cyclo::root_of_unity(6, 5);
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 / 6.0);
        assert!((z.to_complex() - expect).norm() < 1e-14);
    }
}
