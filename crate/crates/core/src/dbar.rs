//! Hyperbolic cut-offs, cyclic-cover integrals, weighted minimal-norm dbar
//! solves on polar grids, the explicit extension constant and the smoothed
//! punctured-disk curvature identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DbarError;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn smoothstep_prime(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// `Lambda_m(w) = Lambda(log log(1/|w|^(2/m)))`, a quintic smoothstep ramp in
/// that variable, equal to 1 for `|w| < r1^m` and 0 for `|w| > r2^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r1: f64,
    pub r2: f64,
    pub m: u32,
}

impl CutoffSpec {
    pub fn new(r1: f64, r2: f64, m: u32) -> Result<Self, DbarError> {
        let spec = CutoffSpec { r1, r2, m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DbarError> {
        if !(0.0 < self.r1 && self.r1 < self.r2 && self.r2 < 1.0) || self.m == 0 {
            return Err(DbarError::OutOfAdmissibleRegion(self.r1, self.r2));
        }
        Ok(())
    }

    /// Upper end of the ramp variable (plateau 1 above it).
    pub fn x1(&self) -> f64 {
        (1.0 / (self.r1 * self.r1)).ln().ln()
    }

    pub fn x2(&self) -> f64 {
        (1.0 / (self.r2 * self.r2)).ln().ln()
    }

    /// `max |Lambda'| * (x1 - x2)`.
    pub fn eta_achieved(&self) -> f64 {
        1.875
    }

    fn ramp_variable(&self, r: f64) -> f64 {
        ((1.0 / (r * r)).ln() / self.m as f64).ln()
    }

    fn check(w: Complex64) -> Result<f64, DbarError> {
        let r = w.norm();
        if r == 0.0 || r >= 1.0 || !r.is_finite() {
            return Err(DbarError::OutOfDomain(r));
        }
        Ok(r)
    }

    /// Radial profile; defined for every `r > 0`, vanishing from `r2^m` on.
    pub fn profile(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let t = (self.ramp_variable(r) - self.x2()) / (self.x1() - self.x2());
        smoothstep(t)
    }

    pub fn eval(&self, w: Complex64) -> Result<f64, DbarError> {
        Ok(self.profile(Self::check(w)?))
    }

    /// `dbar Lambda_m = -Lambda'(x) / (conj(w) log(1/|w|^2))`.
    pub fn dbar(&self, w: Complex64) -> Result<Complex64, DbarError> {
        Self::check(w)?;
        Ok(self.dbar_unchecked(w))
    }

    fn dbar_unchecked(&self, w: Complex64) -> Complex64 {
        let r = w.norm();
        if r >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let span = self.x1() - self.x2();
        let t = (self.ramp_variable(r) - self.x2()) / span;
        let lp = smoothstep_prime(t) / span;
        let l = (1.0 / (r * r)).ln();
        -lp / (w.conj() * l)
    }

    /// `(1/2)(d_x + i d_y) Lambda_m` by central differences.
    pub fn dbar_fd(&self, w: Complex64, h: f64) -> Result<Complex64, DbarError> {
        let f = |z: Complex64| self.eval(z);
        let dx = (f(w + h)? - f(w - h)?) / (2.0 * h);
        let dy = (f(w + I * h)? - f(w - I * h)?) / (2.0 * h);
        Ok(0.5 * (dx + I * dy))
    }
}

/// Radially specified integrands `U` for the cyclic-cover transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrand {
    One,
    Power { k: u32 },
    Gaussian { c: f64 },
}

impl Integrand {
    pub fn eval(&self, w: Complex64) -> Complex64 {
        match *self {
            Integrand::One => Complex64::new(1.0, 0.0),
            Integrand::Power { k } => w.powu(k),
            Integrand::Gaussian { c } => Complex64::new((-c * w.norm_sqr()).exp(), 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardReport {
    pub m: u32,
    pub a: f64,
    pub b: f64,
    /// `int_{a<|w|<b} |U(w)|^2 |dw|^2 / |w|^2` with `|dw|^2 = i dw ^ dw-bar`.
    pub lhs: f64,
    /// `int_{a^(1/m)<|z|<b^(1/m)} |U(z^m)|^2 |dz|^2 / |z|^2`.
    pub rhs_inner: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `4 pi log(b/a)` when `U = 1`.
    pub analytic: Option<f64>,
}

/// Composite Simpson over `[lo, hi]` with `n` (even) intervals.
fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `int_{lo<|w|<hi} g(w) |dw|^2/|w|^2` in `(log r, theta)`, Simpson times trapezoid.
fn annulus_log_integral(lo: f64, hi: f64, g: impl Fn(Complex64) -> f64) -> f64 {
    const NS: usize = 1024;
    const NT: usize = 256;
    let dt = 2.0 * PI / NT as f64;
    simpson(lo.ln(), hi.ln(), NS, |s| {
        let r = s.exp();
        let ring: f64 = (0..NT).map(|j| g(Complex64::from_polar(r, j as f64 * dt))).sum();
        2.0 * ring * dt
    })
}

pub fn pushforward_integral_check(u: &Integrand, m: u32, a: f64, b: f64) -> Result<PushforwardReport, DbarError> {
    if !(a > 0.0 && b > a) || m == 0 {
        return Err(DbarError::QuadratureFailure(format!("need 0 < a < b and m > 0, got a={a}, b={b}, m={m}")));
    }
    let lhs = annulus_log_integral(a, b, |w| u.eval(w).norm_sqr());
    let inv = 1.0 / m as f64;
    let rhs_inner = annulus_log_integral(a.powf(inv), b.powf(inv), |z| u.eval(z.powu(m)).norm_sqr());
    let rhs = m as f64 * rhs_inner;
    if !(lhs.is_finite() && rhs.is_finite()) || rhs == 0.0 {
        return Err(DbarError::QuadratureFailure("non-finite or vanishing integral".into()));
    }
    Ok(PushforwardReport {
        m,
        a,
        b,
        lhs,
        rhs_inner,
        rhs,
        ratio: lhs / rhs,
        analytic: matches!(u, Integrand::One).then(|| 4.0 * PI * (b / a).ln()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegralReport {
    pub r1: f64,
    pub r2: f64,
    /// Lebesgue-measure quadrature of `1 / (|z|^2 log^2(1/|z|^2))` over the annulus.
    pub quadrature: f64,
    pub refinement_change: f64,
    /// `(pi/2) (1/log(1/r2) - 1/log(1/r1))`.
    pub closed_form: f64,
    /// The same bracket without the `pi/2` factor.
    pub closed_form_without_factor: f64,
}

pub fn radial_integral_eval(r1: f64, r2: f64) -> Result<RadialIntegralReport, DbarError> {
    if !(0.0 < r1 && r1 < r2 && r2 < 1.0) {
        return Err(DbarError::OutOfAdmissibleRegion(r1, r2));
    }
    // In s = log r the integrand is (pi/2) / s^2.
    let q = |n: usize| simpson(r1.ln(), r2.ln(), n, |s| 0.5 * PI / (s * s));
    let coarse = q(2048);
    let fine = q(4096);
    let bracket = 1.0 / (1.0 / r2).ln() - 1.0 / (1.0 / r1).ln();
    Ok(RadialIntegralReport {
        r1,
        r2,
        quadrature: fine,
        refinement_change: ((fine - coarse) / fine).abs(),
        closed_form: 0.5 * PI * bracket,
        closed_form_without_factor: bracket,
    })
}

/// `log log(1/r) - log log(1/r^(1/m))` over a radius sweep: returns the
/// largest deviation from `log m`.
pub fn hyperbolic_invariance(m: u32, radii: &[f64]) -> Result<f64, DbarError> {
    let lm = (m as f64).ln();
    let mut worst: f64 = 0.0;
    for &r in radii {
        if !(0.0 < r && r < 1.0) {
            return Err(DbarError::OutOfDomain(r));
        }
        let a = (1.0 / r).ln().ln();
        let b = (1.0 / r.powf(1.0 / m as f64)).ln().ln();
        worst = worst.max((a - b - lm).abs());
    }
    Ok(worst)
}

/// Background weight `e^(-phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    Zero,
    /// `phi = c |w|^2`.
    Quadratic { c: f64 },
}

impl Phi {
    pub fn value(&self, w: Complex64) -> f64 {
        match *self {
            Phi::Zero => 0.0,
            Phi::Quadratic { c } => c * w.norm_sqr(),
        }
    }

    /// `d d-bar phi`.
    pub fn curvature(&self) -> f64 {
        match *self {
            Phi::Zero => 0.0,
            Phi::Quadratic { c } => c,
        }
    }
}

/// Which weight the minimal-norm solve uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSelector {
    /// `e^(-phi)`.
    Plain,
    /// `e^(-phi) / (|w|^2 (1 + |w|^(2/m))^2)`.
    Blowup { m: u32 },
}

impl WeightSelector {
    fn weight(&self, phi: &Phi, w: Complex64) -> f64 {
        let base = (-phi.value(w)).exp();
        match *self {
            WeightSelector::Plain => base,
            WeightSelector::Blowup { m } => {
                let r2 = w.norm_sqr();
                let p = r2.powf(1.0 / m as f64);
                base / (r2 * (1.0 + p) * (1.0 + p))
            }
        }
    }

    /// `d d-bar psi` for `e^(-psi)` the weight, away from the origin.
    fn curvature(&self, phi: &Phi, w: Complex64) -> f64 {
        let extra = match *self {
            WeightSelector::Plain => 0.0,
            WeightSelector::Blowup { m } => {
                let a = 1.0 / m as f64;
                let p = w.norm_sqr().powf(a);
                2.0 * a * a * p / (w.norm_sqr() * (1.0 + p) * (1.0 + p))
            }
        };
        phi.curvature() + extra
    }
}

/// Polar grid `rho_min <= |w| <= rho_max`, uniform in `log r` and `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    rho_min: f64,
    rho_max: f64,
    nr: usize,
    ntheta: usize,
    radii: Vec<f64>,
    ring_weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(rho_min: f64, rho_max: f64, nr: usize, ntheta: usize) -> Result<Self, DbarError> {
        if !(0.0 < rho_min && rho_min < rho_max && rho_max.is_finite()) {
            return Err(DbarError::InvalidGrid(format!("need 0 < rho_min < rho_max, got {rho_min}, {rho_max}")));
        }
        if nr < 3 || ntheta < 4 {
            return Err(DbarError::InvalidGrid("need at least 3 radii and 4 angles".into()));
        }
        let ds = (rho_max / rho_min).ln() / (nr - 1) as f64;
        let radii: Vec<f64> = (0..nr).map(|i| rho_min * (i as f64 * ds).exp()).collect();
        radii.last().expect("nonempty");
        let dt = 2.0 * PI / ntheta as f64;
        // Dual cells run between geometric midpoints; the end cells are halves.
        let edge = |i: usize| -> f64 {
            if i == 0 {
                rho_min
            } else if i == nr {
                rho_max
            } else {
                (radii[i - 1] * radii[i]).sqrt()
            }
        };
        let ring_weights = (0..nr)
            .map(|i| 0.5 * (edge(i + 1).powi(2) - edge(i).powi(2)) * dt)
            .collect();
        Ok(PolarGrid { rho_min, rho_max, nr, ntheta, radii, ring_weights })
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    fn ds(&self) -> f64 {
        (self.rho_max / self.rho_min).ln() / (self.nr - 1) as f64
    }

    fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    pub fn node(&self, k: usize) -> Complex64 {
        let (i, j) = (k / self.ntheta, k % self.ntheta);
        Complex64::from_polar(self.radii[i], j as f64 * self.dtheta())
    }

    pub fn nodes(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.len()).map(|k| self.node(k))
    }

    pub fn quad_weight(&self, k: usize) -> f64 {
        self.ring_weights[k / self.ntheta]
    }

    pub fn area(&self) -> f64 {
        self.ring_weights.iter().sum::<f64>() * self.ntheta as f64
    }

    pub fn exact_area(&self) -> f64 {
        PI * (self.rho_max.powi(2) - self.rho_min.powi(2))
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(k, v)| v * self.quad_weight(k)).sum()
    }

    /// Mean over the innermost ring.
    pub fn inner_mean(&self, values: &[Complex64]) -> Complex64 {
        values[..self.ntheta].iter().sum::<Complex64>() / self.ntheta as f64
    }
}

/// Discrete `dbar = (e^(i theta) / 2r)(d_s + i d_theta)`, centered in the
/// interior, one-sided at the radial ends, periodic in angle.
struct DbarOp {
    rows: Vec<[(usize, Complex64); 4]>,
    n: usize,
}

impl DbarOp {
    fn new(grid: &PolarGrid) -> Self {
        let (nr, nt) = (grid.nr, grid.ntheta);
        let ds = grid.ds();
        let dt = grid.dtheta();
        let mut rows = Vec::with_capacity(grid.len());
        for i in 0..nr {
            for j in 0..nt {
                let c = Complex64::from_polar(1.0, j as f64 * dt) / (2.0 * grid.radii[i]);
                let idx = |a: usize, b: usize| a * nt + b;
                let (lo, hi, w) = if i == 0 {
                    (0, 1, ds)
                } else if i == nr - 1 {
                    (nr - 2, nr - 1, ds)
                } else {
                    (i - 1, i + 1, 2.0 * ds)
                };
                let ct = c * I / (2.0 * dt);
                rows.push([
                    (idx(hi, j), c / w),
                    (idx(lo, j), -c / w),
                    (idx(i, (j + 1) % nt), ct),
                    (idx(i, (j + nt - 1) % nt), -ct),
                ]);
            }
        }
        DbarOp { rows, n: grid.len() }
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(c, v)| v * x[c]).sum();
        }
    }

    fn apply_adjoint(&self, y: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (yr, row) in y.iter().zip(&self.rows) {
            for &(c, v) in row {
                out[c] += v.conj() * yr;
            }
        }
    }
}

/// Applies the discrete `dbar` to nodal values.
pub fn dbar_apply(grid: &PolarGrid, u: &[Complex64]) -> Vec<Complex64> {
    let op = DbarOp::new(grid);
    let mut out = vec![Complex64::new(0.0, 0.0); op.n];
    op.apply(u, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Constrain the innermost-ring mean of `u` (its value at the origin) to zero.
    pub pin_origin: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 100_000, pin_origin: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbarSolution {
    #[serde(skip)]
    pub u: Vec<Complex64>,
    /// `sum q |u|^2 W`.
    pub weighted_norm_sq: f64,
    /// `(sum q |dbar u - v|^2)^(1/2)`.
    pub residual: f64,
    pub rhs_norm: f64,
    /// `sum q W |v|^2 / (d d-bar psi)` with `W = e^(-psi)`; absent when `d d-bar psi` vanishes.
    pub hormander_rhs: Option<f64>,
    pub iterations: usize,
}

fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Minimal weighted-norm least-squares solution of `dbar u = v` by CGLS on
/// `y = sqrt(q W) u`.
pub fn dbar_solve(
    grid: &PolarGrid,
    phi: &Phi,
    weight: WeightSelector,
    v: &[Complex64],
    opts: &SolveOptions,
) -> Result<DbarSolution, DbarError> {
    let n = grid.len();
    if v.len() != n {
        return Err(DbarError::InvalidGrid(format!("right side has {} values, grid has {n}", v.len())));
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DbarError::InvalidGrid("right side is not finite".into()));
    }
    let op = DbarOp::new(grid);
    let mut wts = Vec::with_capacity(n);
    for (k, w) in grid.nodes().enumerate() {
        let x = weight.weight(phi, w);
        if !(x.is_finite() && x > 0.0) {
            return Err(DbarError::SingularWeight(k));
        }
        wts.push(x);
    }
    let sq: Vec<f64> = (0..n).map(|k| grid.quad_weight(k).sqrt()).collect();
    let winv: Vec<f64> = (0..n).map(|k| 1.0 / (grid.quad_weight(k) * wts[k]).sqrt()).collect();
    let nt = grid.ntheta;
    let c0: Vec<f64> = winv[..nt].to_vec();
    let c0n: f64 = c0.iter().map(|c| c * c).sum();
    let project = |y: &mut [Complex64]| {
        if opts.pin_origin {
            let dot: Complex64 = y[..nt].iter().zip(&c0).map(|(a, c)| a * c).sum::<Complex64>() / c0n;
            for (a, c) in y[..nt].iter_mut().zip(&c0) {
                *a -= dot * c;
            }
        }
    };
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut tmp2 = vec![Complex64::new(0.0, 0.0); n];
    let mut apply_a = |y: &[Complex64], out: &mut [Complex64]| {
        tmp.copy_from_slice(y);
        project(&mut tmp);
        for (t, w) in tmp.iter_mut().zip(&winv) {
            *t *= w;
        }
        op.apply(&tmp, out);
        for (o, s) in out.iter_mut().zip(&sq) {
            *o *= s;
        }
    };
    let apply_at = |z: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]| {
        for ((s, zz), q) in scratch.iter_mut().zip(z).zip(&sq) {
            *s = zz * q;
        }
        op.apply_adjoint(scratch, out);
        for (o, w) in out.iter_mut().zip(&winv) {
            *o *= w;
        }
        project(out);
    };

    let b: Vec<Complex64> = v.iter().zip(&sq).map(|(a, s)| a * s).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.clone();
    let mut s = vec![Complex64::new(0.0, 0.0); n];
    apply_at(&r, &mut s, &mut tmp2);
    let s0 = norm_sq(&s).sqrt();
    let mut p = s.clone();
    let mut gamma = norm_sq(&s);
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    if s0 > 0.0 {
        loop {
            if gamma.sqrt() <= opts.tol * s0 {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(DbarError::SolverDivergence(iterations, gamma.sqrt() / s0));
            }
            apply_a(&p, &mut q);
            let qq = norm_sq(&q);
            if qq == 0.0 {
                break;
            }
            let alpha = gamma / qq;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
            }
            apply_at(&r, &mut s, &mut tmp2);
            let g_new = norm_sq(&s);
            let beta = g_new / gamma;
            gamma = g_new;
            for k in 0..n {
                p[k] = s[k] + beta * p[k];
            }
            iterations += 1;
        }
    }
    project(&mut x);
    let u: Vec<Complex64> = x.iter().zip(&winv).map(|(a, w)| a * w).collect();
    let du = dbar_apply(grid, &u);
    let residual = (0..n)
        .map(|k| grid.quad_weight(k) * (du[k] - v[k]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let weighted_norm_sq = (0..n).map(|k| grid.quad_weight(k) * wts[k] * u[k].norm_sqr()).sum();
    let rhs_norm = (0..n).map(|k| grid.quad_weight(k) * v[k].norm_sqr()).sum::<f64>().sqrt();
    let mut hormander = 0.0;
    let mut finite = true;
    for (k, w) in grid.nodes().enumerate() {
        let curv = weight.curvature(phi, w);
        if curv <= 0.0 {
            if v[k].norm_sqr() > 0.0 {
                finite = false;
            }
            continue;
        }
        hormander += grid.quad_weight(k) * wts[k] * v[k].norm_sqr() / curv;
    }
    Ok(DbarSolution {
        u,
        weighted_norm_sq,
        residual,
        rhs_norm,
        hormander_rhs: finite.then_some(hormander),
        iterations,
    })
}

/// How the log-log factor of the extension constant is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLogVariant {
    /// `log log(1/r1^2) - log log(1/r2^2)`.
    Difference,
    /// `log log(r2^2 / r1^2)`.
    Displayed,
}

/// `pi / (r1^2 L) (1/log(1/r2) - 1/log(1/r1))`.
pub fn ot_constant(r1: f64, r2: f64, variant: LogLogVariant) -> Result<f64, DbarError> {
    if !(0.0 < r1 && r1 < r2 && r2 < 1.0) {
        return Err(DbarError::OutOfAdmissibleRegion(r1, r2));
    }
    let a = (1.0 / r1).ln();
    let b = (1.0 / r2).ln();
    let l = match variant {
        LogLogVariant::Difference => ((a - b) / b).ln_1p(),
        LogLogVariant::Displayed => (2.0 * (a - b)).ln(),
    };
    if !(l > 0.0) {
        return Err(DbarError::OutOfAdmissibleRegion(r1, r2));
    }
    Ok(PI * (a - b) / (a * b * r1 * r1 * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtSearchBox {
    pub r1: [f64; 2],
    pub r2: [f64; 2],
    /// Lower bound on `r2 - r1`; the difference variant has its infimum on the diagonal.
    pub min_gap: f64,
}

impl Default for OtSearchBox {
    fn default() -> Self {
        OtSearchBox { r1: [0.01, 0.99], r2: [0.01, 0.99], min_gap: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtOptimum {
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
    pub variant: LogLogVariant,
    pub evaluations: usize,
}

/// Grid search over the box followed by compass search down to step `1e-12`.
pub fn ot_constant_optimize(bx: &OtSearchBox, variant: LogLogVariant) -> Result<OtOptimum, DbarError> {
    let feasible = |r1: f64, r2: f64| {
        r1 >= bx.r1[0] && r1 <= bx.r1[1] && r2 >= bx.r2[0] && r2 <= bx.r2[1] && r2 - r1 >= bx.min_gap
    };
    let mut evals = 0usize;
    let mut f = |r1: f64, r2: f64| -> f64 {
        evals += 1;
        if !feasible(r1, r2) {
            return f64::INFINITY;
        }
        ot_constant(r1, r2, variant).unwrap_or(f64::INFINITY)
    };
    const N: usize = 200;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=N {
        for j in 0..=N {
            let r1 = bx.r1[0] + (bx.r1[1] - bx.r1[0]) * i as f64 / N as f64;
            let r2 = bx.r2[0] + (bx.r2[1] - bx.r2[0]) * j as f64 / N as f64;
            let c = f(r1, r2);
            if c < best.0 {
                best = (c, r1, r2);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(DbarError::OutOfAdmissibleRegion(bx.r1[0], bx.r2[1]));
    }
    let mut step = ((bx.r1[1] - bx.r1[0]).max(bx.r2[1] - bx.r2[0])) / N as f64;
    let dirs = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0)];
    while step > 1e-12 {
        let mut improved = false;
        for (dx, dy) in dirs {
            let (r1, r2) = (best.1 + dx * step, best.2 + dy * step);
            let c = f(r1, r2);
            if c < best.0 {
                best = (c, r1, r2);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    // Land exactly on the gap constraint when the search hugs it.
    if (best.2 - best.1 - bx.min_gap).abs() < 1e-9 {
        let r2 = best.1 + bx.min_gap;
        let c = f(best.1, r2);
        if c.is_finite() {
            best = (c.min(best.0), best.1, if c <= best.0 { r2 } else { best.2 });
        }
    }
    Ok(OtOptimum { r1: best.1, r2: best.2, c: best.0, variant, evaluations: evals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtExtensionConfig {
    #[serde(default = "d_r1")]
    pub r1: f64,
    #[serde(default = "d_r2")]
    pub r2: f64,
    #[serde(default = "d_m")]
    pub m: u32,
    #[serde(default = "d_phi")]
    pub phi: Phi,
    #[serde(default = "d_f0")]
    pub f0: [f64; 2],
    #[serde(default = "d_rho_min")]
    pub rho_min: f64,
    #[serde(default = "d_rho_max")]
    pub rho_max: f64,
    #[serde(default = "d_n")]
    pub nr: usize,
    #[serde(default = "d_n")]
    pub ntheta: usize,
    #[serde(default = "d_tol")]
    pub tol: f64,
    #[serde(default = "d_iter")]
    pub max_iter: usize,
}

fn d_r1() -> f64 {
    0.3
}
fn d_r2() -> f64 {
    0.6
}
fn d_m() -> u32 {
    2
}
fn d_phi() -> Phi {
    Phi::Zero
}
fn d_f0() -> [f64; 2] {
    [1.0, 0.0]
}
fn d_rho_min() -> f64 {
    1e-4
}
fn d_rho_max() -> f64 {
    1.0
}
fn d_n() -> usize {
    256
}
fn d_tol() -> f64 {
    1e-10
}
fn d_iter() -> usize {
    100_000
}

impl Default for OtExtensionConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtExtensionReport {
    pub r1: f64,
    pub r2: f64,
    pub m: u32,
    pub nr: usize,
    pub ntheta: usize,
    pub f_at_zero: [f64; 2],
    pub f_at_zero_error: f64,
    /// `int |F|^2 e^(-phi)`.
    pub weighted_norm_sq: f64,
    /// `|f0|^2 e^(-phi(0))`.
    pub normalizer: f64,
    pub ratio: Option<f64>,
    /// Extension constant at `(r1, r2)`, difference variant.
    pub bound: f64,
    /// `(sum q e^(-phi) |dbar F|^2)^(1/2)`.
    pub dbar_residual: f64,
    pub solver_residual: f64,
    pub iterations: usize,
    pub min_phi_laplacian: f64,
}

/// Finite-difference `d d-bar` on the grid nodes, for the subharmonicity precondition.
fn min_laplacian(phi: &Phi, grid: &PolarGrid) -> f64 {
    let h = 1e-4;
    grid.nodes()
        .map(|w| {
            let f = |z: Complex64| phi.value(z);
            0.25 * (f(w + h) + f(w - h) + f(w + I * h) + f(w - I * h) - 4.0 * f(w)) / (h * h)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Extends the value `f0` from the origin: `F = Lambda_m f0 - u` with
/// `dbar u = f0 dbar Lambda_m`, `u(0) = 0`, minimal in the blowup weight.
pub fn ot_extension_experiment(cfg: &OtExtensionConfig) -> Result<OtExtensionReport, DbarError> {
    let cut = CutoffSpec::new(cfg.r1, cfg.r2, cfg.m)?;
    let grid = PolarGrid::new(cfg.rho_min, cfg.rho_max, cfg.nr, cfg.ntheta)?;
    let lap = min_laplacian(&cfg.phi, &grid);
    if lap < -1e-8 {
        return Err(DbarError::NotSubharmonic(lap));
    }
    let f0 = Complex64::new(cfg.f0[0], cfg.f0[1]);
    let v: Vec<Complex64> = grid.nodes().map(|w| f0 * cut.dbar_unchecked(w)).collect();
    let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, pin_origin: true };
    let sol = dbar_solve(&grid, &cfg.phi, WeightSelector::Blowup { m: cfg.m }, &v, &opts)?;
    let f: Vec<Complex64> = grid
        .nodes()
        .zip(&sol.u)
        .map(|(w, u)| f0 * cut.profile(w.norm()) - u)
        .collect();
    let f_zero = grid.inner_mean(&f);
    let origin = Complex64::new(0.0, 0.0);
    let e_phi: Vec<f64> = grid.nodes().map(|w| (-cfg.phi.value(w)).exp()).collect();
    let mut norm: f64 = (0..grid.len()).map(|k| grid.quad_weight(k) * e_phi[k] * f[k].norm_sqr()).sum();
    norm += PI * cfg.rho_min * cfg.rho_min * f_zero.norm_sqr() * (-cfg.phi.value(origin)).exp();
    let df = dbar_apply(&grid, &f);
    let dbar_residual = (0..grid.len())
        .map(|k| grid.quad_weight(k) * e_phi[k] * df[k].norm_sqr())
        .sum::<f64>()
        .sqrt();
    let normalizer = f0.norm_sqr() * (-cfg.phi.value(origin)).exp();
    Ok(OtExtensionReport {
        r1: cfg.r1,
        r2: cfg.r2,
        m: cfg.m,
        nr: cfg.nr,
        ntheta: cfg.ntheta,
        f_at_zero: [f_zero.re, f_zero.im],
        f_at_zero_error: (f_zero - f0).norm(),
        weighted_norm_sq: norm,
        normalizer,
        ratio: (normalizer > 0.0).then(|| norm / normalizer),
        bound: ot_constant(cfg.r1, cfg.r2, LogLogVariant::Difference)?,
        dbar_residual,
        solver_residual: sol.residual,
        iterations: sol.iterations,
        min_phi_laplacian: lap,
    })
}

/// `log(1/(|w|^2 + eps^2))`, the smoothed metric `e^(-kappa)`.
fn smoothed_l(w: Complex64, eps: f64) -> f64 {
    -(w.norm_sqr() + eps * eps).ln()
}

/// `d d-bar f = Laplacian / 4` with the nine-point stencil, whose `h^2` error
/// term is a multiple of the bi-Laplacian and hence rotation invariant.
fn laplacian_quarter(f: &impl Fn(Complex64) -> f64, w: Complex64, h: f64) -> f64 {
    let (e, n) = (Complex64::new(h, 0.0), Complex64::new(0.0, h));
    let edges = f(w + e) + f(w - e) + f(w + n) + f(w - n);
    let corners = f(w + e + n) + f(w + e - n) + f(w - e + n) + f(w - e - n);
    0.25 * (4.0 * edges + corners - 20.0 * f(w)) / (6.0 * h * h)
}

/// `d f = (1/2)(f_x - i f_y)` by central differences.
fn partial(f: &impl Fn(Complex64) -> f64, w: Complex64, h: f64) -> Complex64 {
    let fx = (f(w + h) - f(w - h)) / (2.0 * h);
    let fy = (f(w + I * h) - f(w - I * h)) / (2.0 * h);
    0.5 * Complex64::new(fx, -fy)
}

fn check_stencil(samples: &[Complex64], eps: f64, h: f64) -> Result<(), DbarError> {
    for w in samples {
        let outer = w.norm() + 3.0 * h;
        if outer * outer + eps * eps >= 1.0 {
            return Err(DbarError::StencilOutOfDomain);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureIdentityReport {
    pub eps: f64,
    pub step: f64,
    pub samples: usize,
    /// `max |L d d-bar kappa - eps^2/t^2 - |w|^2/(t^2 L)|` with `t = |w|^2 + eps^2`, `L = log 1/t`, `kappa = -log L`.
    pub max_residual: f64,
    pub max_residual_half_step: f64,
    pub observed_order: f64,
    /// Largest gap between the exact right side and `eps^2/t^2 + 1/(|w|^2 L)`.
    pub literal_form_gap: f64,
}

fn identity_residual(eps: f64, w: Complex64, h: f64) -> f64 {
    let kappa = |z: Complex64| -smoothed_l(z, eps).ln();
    let l = smoothed_l(w, eps);
    let t = w.norm_sqr() + eps * eps;
    let exact = eps * eps / (t * t) + w.norm_sqr() / (t * t * l);
    (l * laplacian_quarter(&kappa, w, h) - exact).abs()
}

pub fn curvature_identity_check(eps: f64, samples: &[Complex64], step: f64) -> Result<CurvatureIdentityReport, DbarError> {
    check_stencil(samples, eps, step)?;
    let mut worst: f64 = 0.0;
    let mut worst_half: f64 = 0.0;
    let mut gap: f64 = 0.0;
    // The order is measured at steps large enough to sit above round-off.
    let (coarse, fine) = (2e-2, 1e-2);
    let mut order_num: f64 = 0.0;
    let mut order_den: f64 = 0.0;
    for &w in samples {
        worst = worst.max(identity_residual(eps, w, step));
        worst_half = worst_half.max(identity_residual(eps, w, 0.5 * step));
        order_num = order_num.max(identity_residual(eps, w, coarse));
        order_den = order_den.max(identity_residual(eps, w, fine));
        let t = w.norm_sqr() + eps * eps;
        let l = smoothed_l(w, eps);
        if w.norm() > 0.0 {
            let exact = eps * eps / (t * t) + w.norm_sqr() / (t * t * l);
            let literal = eps * eps / (t * t) + 1.0 / (w.norm_sqr() * l);
            gap = gap.max((literal - exact).abs());
        }
    }
    Ok(CurvatureIdentityReport {
        eps,
        step,
        samples: samples.len(),
        max_residual: worst,
        max_residual_half_step: worst_half,
        observed_order: (order_num / order_den).log2(),
        literal_form_gap: gap,
    })
}

/// Random samples in `lo <= |w| <= hi`.
pub fn annulus_samples(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.random_range(lo..=hi);
            let t = rng.random_range(0.0..2.0 * PI);
            Complex64::from_polar(r, t)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoWeightSpec {
    pub eps: f64,
}

impl TwoWeightSpec {
    pub fn kappa(&self, w: Complex64) -> f64 {
        -smoothed_l(w, self.eps).ln()
    }

    pub fn gamma(&self, w: Complex64) -> f64 {
        1.0 / (w.norm_sqr() + self.eps * self.eps)
    }

    pub fn alpha(&self, w: Complex64) -> f64 {
        smoothed_l(w, self.eps).sqrt()
    }

    pub fn beta(&self, w: Complex64) -> f64 {
        (self.gamma(w) + smoothed_l(w, self.eps)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoWeightReport {
    pub eps: f64,
    pub samples: usize,
    /// Largest `c0` with `e^-k Theta_k - e^-k |omega_k|^2 >= c0 eps^2 / (2 pi t^2)` at every sample.
    pub c0: f64,
    pub min_defect: f64,
    /// `min (gamma Theta_phi - |e^-k omega_k|^2)`.
    pub min_slack: f64,
    pub min_theta_phi: f64,
    pub alpha_range: [f64; 2],
    pub beta_range: [f64; 2],
    pub sup_w_beta: f64,
}

pub fn two_weight_pointwise_check(
    spec: &TwoWeightSpec,
    phi: &Phi,
    samples: &[Complex64],
    step: f64,
) -> Result<TwoWeightReport, DbarError> {
    check_stencil(samples, spec.eps, step)?;
    let eps = spec.eps;
    let kappa = |z: Complex64| spec.kappa(z);
    let phif = |z: Complex64| phi.value(z);
    let mut rep = TwoWeightReport {
        eps,
        samples: samples.len(),
        c0: f64::INFINITY,
        min_defect: f64::INFINITY,
        min_slack: f64::INFINITY,
        min_theta_phi: f64::INFINITY,
        alpha_range: [f64::INFINITY, f64::NEG_INFINITY],
        beta_range: [f64::INFINITY, f64::NEG_INFINITY],
        sup_w_beta: 0.0,
    };
    for &w in samples {
        let ek = smoothed_l(w, eps);
        let theta_k = laplacian_quarter(&kappa, w, step);
        let omega = partial(&kappa, w, step);
        let defect = ek * theta_k - ek * omega.norm_sqr();
        let t = w.norm_sqr() + eps * eps;
        let dirac = eps * eps / (2.0 * PI * t * t);
        rep.min_defect = rep.min_defect.min(defect);
        rep.c0 = rep.c0.min(defect / dirac);
        let theta_phi = laplacian_quarter(&phif, w, step);
        rep.min_theta_phi = rep.min_theta_phi.min(theta_phi);
        let slack = spec.gamma(w) * theta_phi - (ek * omega).norm_sqr();
        rep.min_slack = rep.min_slack.min(slack);
        let (a, b) = (spec.alpha(w), spec.beta(w));
        rep.alpha_range = [rep.alpha_range[0].min(a), rep.alpha_range[1].max(a)];
        rep.beta_range = [rep.beta_range[0].min(b), rep.beta_range[1].max(b)];
        rep.sup_w_beta = rep.sup_w_beta.max(w.norm() * b);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> CutoffSpec {
        CutoffSpec::new(0.3, 0.6, 2).unwrap()
    }

    #[test]
    fn cutoff_plateaus_and_derivative() {
        let s = spec();
        assert_eq!(s.eval(Complex64::new(0.05, 0.0)).unwrap(), 1.0);
        assert_eq!(s.eval(Complex64::new(0.5, 0.0)).unwrap(), 0.0);
        let w = Complex64::from_polar(0.2, 0.7);
        let a = s.dbar(w).unwrap();
        let fd = s.dbar_fd(w, 1e-5).unwrap();
        assert!((a - fd).norm() / a.norm() < 1e-6, "{a} vs {fd}");
        assert!(matches!(s.eval(Complex64::new(0.0, 0.0)), Err(DbarError::OutOfDomain(_))));
        assert!(matches!(s.eval(Complex64::new(1.0, 0.0)), Err(DbarError::OutOfDomain(_))));
    }

    #[test]
    fn pushforward_examples() {
        let one = pushforward_integral_check(&Integrand::One, 2, 0.25, 0.5).unwrap();
        let exact = 4.0 * PI * 2f64.ln();
        assert!((one.lhs - exact).abs() / exact < 1e-3);
        assert!((one.rhs - exact).abs() / exact < 1e-3);
        let m1 = pushforward_integral_check(&Integrand::Power { k: 1 }, 1, 0.25, 0.5).unwrap();
        assert_eq!(m1.lhs, m1.rhs);
        let m3 = pushforward_integral_check(&Integrand::Power { k: 1 }, 3, 0.25, 0.5).unwrap();
        assert!((m3.ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn radial_integral_closed_form() {
        let r = radial_integral_eval(0.25, 0.5).unwrap();
        assert!((r.quadrature - 1.1331).abs() < 1e-4);
        assert!((r.quadrature - r.closed_form).abs() < 1e-10);
        assert!(r.refinement_change < 1e-6);
        assert!(radial_integral_eval(0.25, 0.25 + 1e-9).unwrap().quadrature < 1e-7);
    }

    #[test]
    fn ot_constant_values() {
        let c = ot_constant(0.5, 0.9, LogLogVariant::Displayed).unwrap();
        // 625.1 comes from rounded intermediate values.
        assert!((c - 625.1).abs() / 625.1 < 1e-3, "{c}");
        let d = ot_constant(0.3, 0.6, LogLogVariant::Difference).unwrap();
        assert!((d - 45.88).abs() < 0.01, "{d}");
        assert!(ot_constant(0.5, 0.6, LogLogVariant::Displayed).is_err());
        assert!(ot_constant(0.6, 0.5, LogLogVariant::Difference).is_err());
    }

    #[test]
    fn optimizer_is_stable() {
        let opt = ot_constant_optimize(&OtSearchBox::default(), LogLogVariant::Difference).unwrap();
        assert!(opt.c >= PI);
        let tight = OtSearchBox {
            r1: [opt.r1 - 0.01, opt.r1 + 0.01],
            r2: [opt.r2 - 0.01, opt.r2 + 0.01],
            min_gap: 0.05,
        };
        let again = ot_constant_optimize(&tight, LogLogVariant::Difference).unwrap();
        assert!((again.c - opt.c).abs() < 1e-6, "{opt:?} {again:?}");
        let shown = ot_constant_optimize(&OtSearchBox::default(), LogLogVariant::Displayed).unwrap();
        assert!(shown.c >= PI);
    }

    #[test]
    fn grid_quadrature_exact_for_constants() {
        let g = PolarGrid::new(1e-3, 0.8, 40, 16).unwrap();
        assert!((g.area() - g.exact_area()).abs() / g.exact_area() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = PolarGrid::new(0.05, 0.8, 16, 16).unwrap();
        let v = vec![Complex64::new(0.0, 0.0); g.len()];
        let s = dbar_solve(&g, &Phi::Zero, WeightSelector::Plain, &v, &SolveOptions::default()).unwrap();
        assert!(s.u.iter().all(|z| z.norm() == 0.0));
        assert_eq!(s.weighted_norm_sq, 0.0);
    }

    #[test]
    fn hormander_estimate_on_disk() {
        let phi = Phi::Quadratic { c: 1.0 };
        let mut prev = f64::INFINITY;
        for n in [24, 48] {
            let g = PolarGrid::new(0.05, 0.8, n, n).unwrap();
            let v = vec![Complex64::new(1.0, 0.0); g.len()];
            let s = dbar_solve(&g, &phi, WeightSelector::Plain, &v, &SolveOptions::default()).unwrap();
            let rhs = s.hormander_rhs.unwrap();
            assert!(s.weighted_norm_sq <= 1.05 * rhs, "{} vs {rhs}", s.weighted_norm_sq);
            let explicit: f64 = (0..g.len())
                .map(|k| {
                    let w = g.node(k);
                    g.quad_weight(k) * (-w.norm_sqr()).exp() * w.norm_sqr()
                })
                .sum();
            assert!(s.weighted_norm_sq <= explicit * 1.01);
            assert!(s.residual < 1e-8);
            // Stencil consistency on the explicit solution conj(w).
            let du = dbar_apply(&g, &g.nodes().map(|w| w.conj()).collect::<Vec<_>>());
            let consistency = (0..g.len()).map(|k| g.quad_weight(k) * (du[k] - 1.0).norm_sqr()).sum::<f64>().sqrt();
            assert!(consistency < prev);
            prev = consistency;
        }
    }

    #[test]
    fn extension_small_grid() {
        let cfg = OtExtensionConfig { nr: 48, ntheta: 32, ..OtExtensionConfig::default() };
        let rep = ot_extension_experiment(&cfg).unwrap();
        assert!(rep.f_at_zero_error < 1e-6);
        let ratio = rep.ratio.unwrap();
        assert!(ratio >= PI * 0.99 && ratio <= rep.bound, "{rep:?}");
        let zero = ot_extension_experiment(&OtExtensionConfig { f0: [0.0, 0.0], ..cfg }).unwrap();
        assert_eq!(zero.weighted_norm_sq, 0.0);
        assert!(zero.ratio.is_none());
    }

    #[test]
    fn curvature_identity_and_two_weight() {
        let r = curvature_identity_check(0.5, &[Complex64::new(0.3, 0.1)], 1e-3).unwrap();
        assert!(r.max_residual < 1e-5);
        assert!((r.observed_order - 2.0).abs() < 0.2, "{r:?}");
        let ring: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.2, k as f64)).collect();
        let res: Vec<f64> = ring.iter().map(|&w| identity_residual(0.5, w, 1e-3)).collect();
        let spread = res.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - res.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-8);
        for eps in [0.1, 0.2, 0.3] {
            let samples = annulus_samples(50, 0.05, 0.7, 7);
            let tw = two_weight_pointwise_check(&TwoWeightSpec { eps }, &Phi::Quadratic { c: 1.0 }, &samples, 1e-3).unwrap();
            assert!(tw.c0 > 0.0 && tw.min_slack >= 0.0, "{tw:?}");
        }
    }

    #[test]
    fn hyperbolic_invariance_sweep() {
        let radii: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
        assert!(hyperbolic_invariance(3, &radii).unwrap() < 1e-12);
    }
}
