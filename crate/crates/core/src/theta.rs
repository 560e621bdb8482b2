//! Riemann theta functions with explicit truncation, quasi-periodicity checks,
//! theta triples and the log-affine fit of lattice-translation ratios.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ThetaError;

pub const DEFAULT_EPS: f64 = 1e-15;
pub const RADIUS_CAP: usize = 200;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// JSON form of the theta parameters; complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    pub period_matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub polarization: Vec<u32>,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaParams {
    z: DMatrix<Complex64>,
    m: Vec<u32>,
    eps: f64,
    min_eig: f64,
}

pub fn c64(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl ThetaParams {
    pub fn new(z: DMatrix<Complex64>, m: Vec<u32>, eps: f64) -> Result<Self, ThetaError> {
        let l = z.nrows();
        if l == 0 || z.ncols() != l {
            return Err(ThetaError::InvalidParams("period matrix must be square and nonempty".into()));
        }
        if m.len() != l || m.iter().any(|&x| x == 0) {
            return Err(ThetaError::InvalidParams("need one positive polarization integer per dimension".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ThetaError::InvalidParams("eps must be positive".into()));
        }
        for r in 0..l {
            for c in 0..l {
                if (z[(r, c)] - z[(c, r)]).norm() > 1e-12 {
                    return Err(ThetaError::InvalidParams("period matrix is not symmetric".into()));
                }
            }
        }
        let y = DMatrix::from_fn(l, l, |r, c| 0.5 * (z[(r, c)].im + z[(c, r)].im));
        let min_eig = SymmetricEigen::new(y).eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(ThetaError::InvalidParams(format!(
                "imaginary part is not positive definite (least eigenvalue {min_eig})"
            )));
        }
        Ok(ThetaParams { z, m, eps, min_eig })
    }

    pub fn from_config(cfg: &ThetaConfig) -> Result<Self, ThetaError> {
        let l = cfg.period_matrix.len();
        if cfg.period_matrix.iter().any(|r| r.len() != l) {
            return Err(ThetaError::InvalidParams("period matrix rows have unequal length".into()));
        }
        let z = DMatrix::from_fn(l, l, |r, c| c64(cfg.period_matrix[r][c]));
        let m = if cfg.polarization.is_empty() {
            vec![1; l]
        } else {
            cfg.polarization.clone()
        };
        Self::new(z, m, cfg.eps)
    }

    /// `l = 1`, `Z = i`.
    pub fn standard_1d() -> Self {
        Self::new(DMatrix::from_element(1, 1, I), vec![1], DEFAULT_EPS).expect("valid")
    }

    /// `l = 2`, `Z = [[i, 0.3], [0.3, 2i]]`.
    pub fn standard_2d() -> Self {
        let z = DMatrix::from_row_slice(2, 2, &[I, Complex64::new(0.3, 0.0), Complex64::new(0.3, 0.0), 2.0 * I]);
        Self::new(z, vec![1, 1], DEFAULT_EPS).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    pub fn period_matrix(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    pub fn polarization(&self) -> &[u32] {
        &self.m
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        ThetaParams { eps, ..self.clone() }
    }

    pub fn least_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// Bound on the sum of all terms with `|lambda|_inf > r`.
    pub fn tail_bound(&self, r: usize, im_sup: f64) -> f64 {
        let l = self.dim() as i32;
        let mut total = 0.0;
        let mut k = r + 1;
        loop {
            let kf = k as f64;
            let shell = (2.0 * kf + 1.0).powi(l) - (2.0 * kf - 1.0).powi(l);
            let term = shell * (-PI * self.min_eig * kf * kf + 2.0 * PI * l as f64 * kf * im_sup).exp();
            total += term;
            // Past the peak the shells decay faster than geometrically.
            if kf * self.min_eig > l as f64 * im_sup + 1.0 && term < total * 1e-18 {
                break;
            }
            if k > 10 * RADIUS_CAP {
                return f64::INFINITY;
            }
            k += 1;
        }
        total
    }

    /// Smallest radius whose tail bound is below `eps`.
    pub fn radius(&self, zeta: &[Complex64]) -> Result<usize, ThetaError> {
        let s = zeta.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        for r in 0..=RADIUS_CAP {
            if self.tail_bound(r, s) < self.eps {
                return Ok(r);
            }
        }
        let mut needed = RADIUS_CAP + 1;
        while needed < 100 * RADIUS_CAP && self.tail_bound(needed, s) >= self.eps {
            needed += 1;
        }
        Err(ThetaError::TruncationFailure { needed, cap: RADIUS_CAP })
    }

    fn check_arg(&self, zeta: &[Complex64]) -> Result<(), ThetaError> {
        if zeta.len() != self.dim() {
            return Err(ThetaError::InvalidParams(format!(
                "argument has {} coordinates, expected {}",
                zeta.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Sum over `|lambda|_inf <= r` in a fixed odometer order.
    pub fn partial_sum(&self, zeta: &[Complex64], r: usize) -> Complex64 {
        let l = self.dim();
        let r = r as i64;
        let mut lam = vec![-r; l];
        let mut acc = Complex64::new(0.0, 0.0);
        loop {
            let mut q = Complex64::new(0.0, 0.0);
            for a in 0..l {
                let la = lam[a] as f64;
                if la == 0.0 {
                    continue;
                }
                q += 2.0 * la * zeta[a];
                for b in 0..l {
                    q += la * lam[b] as f64 * self.z[(a, b)];
                }
            }
            acc += (PI * I * q).exp();
            let mut a = l;
            loop {
                if a == 0 {
                    return acc;
                }
                a -= 1;
                lam[a] += 1;
                if lam[a] <= r {
                    break;
                }
                lam[a] = -r;
            }
        }
    }

    pub fn theta(&self, zeta: &[Complex64]) -> Result<Complex64, ThetaError> {
        self.check_arg(zeta)?;
        let r = self.radius(zeta)?;
        Ok(self.partial_sum(zeta, r))
    }

    /// `n = m * q` for a lattice point.
    fn z_part(&self, lp: &LatticePoint) -> Vec<f64> {
        lp.q.iter().zip(&self.m).map(|(&q, &m)| (q * m as i64) as f64).collect()
    }

    /// `p + Z (m * q)`.
    pub fn shift(&self, lp: &LatticePoint) -> Vec<Complex64> {
        let n = self.z_part(lp);
        (0..self.dim())
            .map(|a| {
                let mut s = Complex64::new(lp.p[a] as f64, 0.0);
                for b in 0..self.dim() {
                    s += self.z[(a, b)] * n[b];
                }
                s
            })
            .collect()
    }

    /// `exp(pi i (-n^T Z n - 2 n^T zeta))` with `n = m * q`.
    pub fn multiplier(&self, lp: &LatticePoint, zeta: &[Complex64]) -> Complex64 {
        (PI * I * self.log_multiplier_arg(lp, zeta)).exp()
    }

    fn log_multiplier_arg(&self, lp: &LatticePoint, zeta: &[Complex64]) -> Complex64 {
        let n = self.z_part(lp);
        let mut q = Complex64::new(0.0, 0.0);
        for a in 0..self.dim() {
            q -= 2.0 * n[a] * zeta[a];
            for b in 0..self.dim() {
                q -= n[a] * n[b] * self.z[(a, b)];
            }
        }
        q
    }

    pub fn quasi_periodicity(&self, zeta: &[Complex64], lp: &LatticePoint) -> Result<QuasiResidual, ThetaError> {
        self.check_arg(zeta)?;
        lp.check(self.dim())?;
        if lp.is_zero() {
            return Ok(QuasiResidual { absolute: 0.0, normalized: 0.0, multiplier_modulus: 1.0 });
        }
        let shifted: Vec<Complex64> = zeta.iter().zip(self.shift(lp)).map(|(a, b)| a + b).collect();
        let lhs = self.theta(&shifted)?;
        let base = self.theta(zeta)?;
        let mult = self.multiplier(lp, zeta);
        Ok(QuasiResidual {
            absolute: (lhs - mult * base).norm(),
            normalized: (lhs / mult - base).norm(),
            multiplier_modulus: mult.norm(),
        })
    }
}

/// Residual of the translation law, absolute and after dividing out the multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiResidual {
    pub absolute: f64,
    pub normalized: f64,
    pub multiplier_modulus: f64,
}

/// The lattice vector `sum p_j u_j + sum q_j m_j Z u_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
}

impl LatticePoint {
    pub fn new(p: Vec<i64>, q: Vec<i64>) -> Self {
        LatticePoint { p, q }
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().chain(&self.q).all(|&x| x == 0)
    }

    fn check(&self, l: usize) -> Result<(), ThetaError> {
        if self.p.len() != l || self.q.len() != l {
            return Err(ThetaError::InvalidParams(format!("lattice point needs {l}+{l} integers")));
        }
        Ok(())
    }
}

/// `Theta(zeta - v1) Theta(zeta - v2) Theta(zeta + v1 + v2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTriple {
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
}

impl ThetaTriple {
    pub fn new(v1: Vec<Complex64>, v2: Vec<Complex64>) -> Self {
        ThetaTriple { v1, v2 }
    }

    pub fn eval(&self, params: &ThetaParams, zeta: &[Complex64]) -> Result<Complex64, ThetaError> {
        let l = params.dim();
        if self.v1.len() != l || self.v2.len() != l {
            return Err(ThetaError::InvalidParams("shift vectors have the wrong length".into()));
        }
        let a: Vec<Complex64> = (0..l).map(|i| zeta[i] - self.v1[i]).collect();
        let b: Vec<Complex64> = (0..l).map(|i| zeta[i] - self.v2[i]).collect();
        let c: Vec<Complex64> = (0..l).map(|i| zeta[i] + self.v1[i] + self.v2[i]).collect();
        Ok(params.theta(&a)? * params.theta(&b)? * params.theta(&c)?)
    }
}

/// `F(zeta) = num(zeta - translation) / den(zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaQuotient {
    pub numerator: ThetaTriple,
    pub denominator: ThetaTriple,
    pub translation: Vec<Complex64>,
}

impl ThetaQuotient {
    fn parts(&self, params: &ThetaParams, zeta: &[Complex64]) -> Result<(Complex64, Complex64), ThetaError> {
        let shifted: Vec<Complex64> = zeta.iter().zip(&self.translation).map(|(a, b)| a - b).collect();
        Ok((self.numerator.eval(params, &shifted)?, self.denominator.eval(params, zeta)?))
    }
}

/// Least-squares fit of `log r(zeta) = c + b^T zeta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub constant: [f64; 2],
    pub linear: Vec<[f64; 2]>,
    /// `b / (2 pi i)`.
    pub linear_over_2pi_i: Vec<[f64; 2]>,
    pub residual: f64,
    pub samples: Vec<Vec<[f64; 2]>>,
    pub seed: u64,
}

/// Guard on triple values at sample points.
pub const NEAR_ZERO: f64 = 1e-6;

/// Uniform samples in the open parallotope spanned by `u_j` and `m_j Z u_j`.
pub fn parallotope_samples(params: &ThetaParams, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = params.dim();
    (0..count)
        .map(|_| {
            let t: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..1.0)).collect();
            (0..l)
                .map(|a| {
                    let mut z = Complex64::new(t[a], 0.0);
                    for b in 0..l {
                        z += params.z[(a, b)] * params.m[b] as f64 * s[b];
                    }
                    z
                })
                .collect()
        })
        .collect()
}

pub fn transition_ratio_fit(
    params: &ThetaParams,
    f: &ThetaQuotient,
    lp: &LatticePoint,
    samples: usize,
    seed: u64,
) -> Result<AffineFit, ThetaError> {
    lp.check(params.dim())?;
    let l = params.dim();
    let shift = params.shift(lp);
    let points = parallotope_samples(params, samples, seed);
    let mut logs = Vec::with_capacity(samples);
    for (idx, z) in points.iter().enumerate() {
        let zs: Vec<Complex64> = z.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let (n0, d0) = f.parts(params, z)?;
        let (n1, d1) = f.parts(params, &zs)?;
        // Guard relative to the multiplier so shifted values are judged on the same scale.
        let scale = params.multiplier(lp, z).norm().powi(3).max(1.0);
        for (v, sc) in [(n0, 1.0), (d0, 1.0), (n1, scale), (d1, scale)] {
            if v.norm() / sc < NEAR_ZERO {
                return Err(ThetaError::NearZeroSample { index: idx, value: v.norm() / sc });
            }
        }
        let r = (n1 / d1) / (n0 / d0);
        logs.push(r.ln());
    }
    // Continuous branch: unwrap imaginary parts against the first sample.
    if let Some(&first) = logs.first() {
        for v in logs.iter_mut() {
            let k = ((v.im - first.im) / (2.0 * PI)).round();
            v.im -= 2.0 * PI * k;
        }
    }
    let a = DMatrix::from_fn(samples, l + 1, |r, c| if c == 0 { Complex64::new(1.0, 0.0) } else { points[r][c - 1] });
    let rhs = DVector::from_vec(logs.clone());
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| ThetaError::InvalidParams(e.to_string()))?;
    let fitted = &a * &sol;
    let residual = (0..samples).map(|k| (fitted[k] - logs[k]).norm()).fold(0.0, f64::max);
    let two_pi_i = 2.0 * PI * I;
    Ok(AffineFit {
        constant: pair(sol[0]),
        linear: (1..=l).map(|k| pair(sol[k])).collect(),
        linear_over_2pi_i: (1..=l).map(|k| pair(sol[k] / two_pi_i)).collect(),
        residual,
        samples: points.iter().map(|z| z.iter().map(|&c| pair(c)).collect()).collect(),
        seed,
    })
}

/// A named quotient with the lattice points whose transition ratios are probed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientCase {
    pub name: &'static str,
    pub params: ThetaParams,
    pub quotient: ThetaQuotient,
    pub lattice_points: Vec<LatticePoint>,
}

impl QuotientCase {
    /// Lattice points with no period-matrix part, along which the ratio is identically 1.
    pub fn integer_points(&self) -> impl Iterator<Item = &LatticePoint> {
        self.lattice_points.iter().filter(|lp| lp.q.iter().all(|&q| q == 0))
    }
}

/// The theta-quotient configurations shipped with the scenarios.
pub fn shipped_quotients() -> Vec<QuotientCase> {
    let c = |re, im| Complex64::new(re, im);
    let t1 = ThetaTriple::new(vec![c(0.2, 0.1)], vec![c(0.3, -0.2)]);
    let t2 = ThetaTriple::new(vec![c(0.45, 0.05)], vec![c(-0.1, 0.3)]);
    let one_d = |p: i64, q: i64| LatticePoint::new(vec![p], vec![q]);
    let u1 = ThetaTriple::new(vec![c(0.2, 0.1), c(-0.1, 0.25)], vec![c(0.3, -0.2), c(0.15, 0.1)]);
    let u2 = ThetaTriple::new(vec![c(0.4, 0.05), c(0.1, -0.3)], vec![c(-0.1, 0.3), c(0.35, 0.2)]);
    let two_d = |p: [i64; 2], q: [i64; 2]| LatticePoint::new(p.to_vec(), q.to_vec());
    let l1_points = vec![one_d(1, 0), one_d(0, 1), one_d(1, 1), one_d(-2, 1)];
    let l2_points = vec![
        two_d([1, 0], [0, 0]),
        two_d([0, 1], [0, 0]),
        two_d([0, 0], [1, 0]),
        two_d([0, 0], [0, 1]),
        two_d([1, -1], [1, 1]),
    ];
    vec![
        QuotientCase {
            name: "theta-l1",
            params: ThetaParams::standard_1d(),
            quotient: ThetaQuotient { numerator: t1.clone(), denominator: t2.clone(), translation: vec![c(0.0, 0.0)] },
            lattice_points: l1_points.clone(),
        },
        QuotientCase {
            name: "theta-l1-translated",
            params: ThetaParams::standard_1d(),
            quotient: ThetaQuotient { numerator: t1, denominator: t2, translation: vec![c(0.15, 0.05)] },
            lattice_points: l1_points,
        },
        QuotientCase {
            name: "theta-l2",
            params: ThetaParams::standard_2d(),
            quotient: ThetaQuotient { numerator: u1.clone(), denominator: u2.clone(), translation: vec![c(0.0, 0.0); 2] },
            lattice_points: l2_points.clone(),
        },
        QuotientCase {
            name: "theta-l2-translated",
            params: ThetaParams::standard_2d(),
            quotient: ThetaQuotient { numerator: u1, denominator: u2, translation: vec![c(0.1, 0.0), c(0.0, 0.05)] },
            lattice_points: l2_points,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: plain sum over a generous box.
    fn brute(params: &ThetaParams, zeta: &[Complex64], r: i64) -> Complex64 {
        let z = params.period_matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        match params.dim() {
            1 => {
                for n in -r..=r {
                    let n = n as f64;
                    acc += (PI * I * (n * n * z[(0, 0)] + 2.0 * n * zeta[0])).exp();
                }
            }
            2 => {
                for a in -r..=r {
                    for b in -r..=r {
                        let (a, b) = (a as f64, b as f64);
                        let q = a * a * z[(0, 0)] + 2.0 * a * b * z[(0, 1)] + b * b * z[(1, 1)]
                            + 2.0 * (a * zeta[0] + b * zeta[1]);
                        acc += (PI * I * q).exp();
                    }
                }
            }
            _ => unreachable!(),
        }
        acc
    }

    #[test]
    fn theta_at_origin() {
        let p = ThetaParams::standard_1d();
        let v = p.theta(&[Complex64::new(0.0, 0.0)]).unwrap();
        let oracle: f64 = (-10i32..=10).map(|n| (-PI * (n * n) as f64).exp()).sum();
        assert!((v.re - 1.086434811213308).abs() < 1e-12);
        assert!((v.re - oracle).abs() < 1e-12 && v.im.abs() < 1e-15);
    }

    #[test]
    fn periodicity_and_evenness() {
        let p = ThetaParams::standard_1d();
        let z = Complex64::new(0.3, 0.2);
        let a = p.theta(&[z]).unwrap();
        let b = p.theta(&[z + 1.0]).unwrap();
        assert!((a - b).norm() < 1e-12);
        let w = Complex64::new(0.7, 0.1);
        assert!((p.theta(&[w]).unwrap() - p.theta(&[-w]).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn quasi_periodicity_examples() {
        let p = ThetaParams::standard_1d();
        let z = [Complex64::new(0.1, 0.0)];
        let r = p.quasi_periodicity(&z, &LatticePoint::new(vec![0], vec![1])).unwrap();
        assert!(r.absolute < 1e-10 && r.normalized < 1e-10);
        let r = p.quasi_periodicity(&z, &LatticePoint::new(vec![1], vec![0])).unwrap();
        assert!(r.absolute < 1e-12);
        let r = p.quasi_periodicity(&z, &LatticePoint::new(vec![0], vec![0])).unwrap();
        assert_eq!(r.absolute, 0.0);
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [ThetaParams::standard_1d(), ThetaParams::standard_2d()] {
            for _ in 0..10 {
                let zeta: Vec<Complex64> = (0..p.dim())
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.8..0.8)))
                    .collect();
                let r = p.radius(&zeta).unwrap() as i64;
                let d = (p.theta(&zeta).unwrap() - brute(&p, &zeta, r + 5)).norm();
                assert!(d < 2.0 * p.eps() + 1e-14, "diff {d}");
            }
        }
    }

    #[test]
    fn triple_examples() {
        let p = ThetaParams::standard_1d();
        let z = [Complex64::new(0.2, 0.1)];
        let zero = ThetaTriple::new(vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 0.0)]);
        let t = zero.eval(&p, &z).unwrap();
        assert!((t - p.theta(&z).unwrap().powu(3)).norm() < 1e-12);
        let tr = ThetaTriple::new(vec![Complex64::new(0.2, 0.0)], vec![Complex64::new(0.3, 0.0)]);
        let origin = [Complex64::new(0.0, 0.0)];
        let expect = brute(&p, &[Complex64::new(-0.2, 0.0)], 12)
            * brute(&p, &[Complex64::new(-0.3, 0.0)], 12)
            * brute(&p, &[Complex64::new(0.5, 0.0)], 12);
        assert!((tr.eval(&p, &origin).unwrap() - expect).norm() < 1e-12);
        let shifted = [z[0] + 1.0];
        assert!((tr.eval(&p, &z).unwrap() - tr.eval(&p, &shifted).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn ratio_fit_examples() {
        let p = ThetaParams::standard_1d();
        let c = |re, im| Complex64::new(re, im);
        let t1 = ThetaTriple::new(vec![c(0.2, 0.1)], vec![c(0.3, -0.2)]);
        let t2 = ThetaTriple::new(vec![c(0.45, 0.05)], vec![c(-0.1, 0.3)]);
        let same = ThetaQuotient { numerator: t1.clone(), denominator: t1.clone(), translation: vec![c(0.0, 0.0)] };
        let fit = transition_ratio_fit(&p, &same, &LatticePoint::new(vec![0], vec![1]), 20, 1).unwrap();
        assert!(fit.residual < 1e-10 && c64(fit.constant).norm() < 1e-10);
        let q = ThetaQuotient { numerator: t1, denominator: t2, translation: vec![c(0.0, 0.0)] };
        let fit = transition_ratio_fit(&p, &q, &LatticePoint::new(vec![1], vec![0]), 20, 1).unwrap();
        assert!(fit.residual < 1e-10 && c64(fit.constant).norm() < 1e-10);
        let fit = transition_ratio_fit(&p, &q, &LatticePoint::new(vec![0], vec![1]), 20, 1).unwrap();
        assert!(fit.residual < 1e-8, "residual {}", fit.residual);
    }

    #[test]
    fn shipped_quotients_are_log_affine() {
        for case in shipped_quotients() {
            for lp in &case.lattice_points {
                let fit = transition_ratio_fit(&case.params, &case.quotient, lp, 24, 5).unwrap();
                assert!(fit.residual < 1e-8, "{} {lp:?}: {}", case.name, fit.residual);
            }
            for lp in case.integer_points() {
                let fit = transition_ratio_fit(&case.params, &case.quotient, lp, 24, 5).unwrap();
                assert!(c64(fit.constant).norm() < 1e-10, "{} {lp:?}", case.name);
                assert!(fit.linear.iter().all(|b| c64(*b).norm() < 1e-10));
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let z = DMatrix::from_element(1, 1, Complex64::new(0.0, -1.0));
        assert!(ThetaParams::new(z, vec![1], 1e-12).is_err());
        let z = DMatrix::from_row_slice(2, 2, &[I, Complex64::new(0.3, 0.0), Complex64::new(0.2, 0.0), I]);
        assert!(ThetaParams::new(z, vec![1, 1], 1e-12).is_err());
    }
}
