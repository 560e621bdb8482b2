//! The holomorphic family of flat line bundles `L^(tau)` on an elliptic curve
//! `X = C / (Z + tau0 Z)` with `omega = dz`, its rank-2 jet bundle and the
//! curvature of the modified metric on `X x C`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::FamilyError;
use crate::theta::{c64, pair, ThetaParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which exponent the family metric carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSign {
    /// `h_j = h0_j exp(-2 Re(tau conj f_j))`, the zero-curvature metric of `L^(tau)`.
    MinusTauConjF,
    /// `exp(+2 Re(conj(tau) f_j))`, the factor in the modified metric on `X x C`.
    PlusConjTauF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorModel {
    /// Theta divisor with `h_D = exp(-2 pi scale y^2 / Im tau0)` and `s_D = Theta(z)`.
    Theta,
    /// `h_D = 1`, `s_D = 1`.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    /// `(h_D)^eta |s_D|^(2 eta)`.
    Eta,
    /// `(h_D)^(2 eta) |s_D|^(4 eta)`.
    TwoEta,
}

impl CurvatureMode {
    fn k(self) -> f64 {
        match self {
            CurvatureMode::Eta => 1.0,
            CurvatureMode::TwoEta => 2.0,
        }
    }
}

/// JSON configuration of the elliptic-curve family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(default = "default_tau0")]
    pub tau0: [f64; 2],
    #[serde(default = "default_per_side")]
    pub charts_per_side: usize,
    #[serde(default = "default_overlap")]
    pub overlap: f64,
    /// Constants `s_j` in `f_j = z + s_j`; zero when omitted.
    #[serde(default)]
    pub shifts: Vec<[f64; 2]>,
    /// `log h0_j`; zero when omitted.
    #[serde(default)]
    pub base_log_metric: Vec<f64>,
    /// Unitary character `(alpha, beta)` of the base bundle along `1` and `tau0`.
    #[serde(default)]
    pub base_character: [f64; 2],
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_divisor")]
    pub divisor: DivisorModel,
    /// Multiplies the theta-metric curvature.
    #[serde(default = "default_scale")]
    pub divisor_scale: f64,
    #[serde(default = "default_sign")]
    pub metric_sign: MetricSign,
    #[serde(default = "default_z_grid")]
    pub z_grid: usize,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: usize,
    #[serde(default = "default_tau_radius")]
    pub tau_radius: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_tau0() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_per_side() -> usize {
    3
}
fn default_overlap() -> f64 {
    0.1
}
fn default_eta() -> f64 {
    0.1
}
fn default_divisor() -> DivisorModel {
    DivisorModel::Theta
}
fn default_scale() -> f64 {
    1.0
}
fn default_sign() -> MetricSign {
    MetricSign::PlusConjTauF
}
fn default_z_grid() -> usize {
    8
}
fn default_tau_grid() -> usize {
    5
}
fn default_tau_radius() -> f64 {
    1.0
}
fn default_step() -> f64 {
    1e-3
}

impl Default for FamilyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Chart `j = a * n + b` covers lattice coordinates
/// `(a/n - d, (a+1)/n + d) x (b/n - d, (b+1)/n + d)`, where `z = x + y tau0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartFamily {
    tau0: Complex64,
    n: usize,
    overlap: f64,
    shifts: Vec<Complex64>,
    h0: Vec<f64>,
    character: [f64; 2],
}

impl ChartFamily {
    pub fn new(cfg: &FamilyConfig) -> Result<Self, FamilyError> {
        let tau0 = c64(cfg.tau0);
        if tau0.im <= 0.0 {
            return Err(FamilyError::InvalidConfig("tau0 must lie in the upper half plane".into()));
        }
        let n = cfg.charts_per_side;
        if n < 3 {
            return Err(FamilyError::InvalidConfig("need at least 3 charts per side for connected overlaps".into()));
        }
        if !(cfg.overlap > 0.0 && cfg.overlap < 0.5 / n as f64) {
            return Err(FamilyError::InvalidConfig("overlap must lie in (0, 1/(2n))".into()));
        }
        let count = n * n;
        let shifts = if cfg.shifts.is_empty() {
            vec![Complex64::new(0.0, 0.0); count]
        } else if cfg.shifts.len() == count {
            cfg.shifts.iter().map(|&p| c64(p)).collect()
        } else {
            return Err(FamilyError::InvalidConfig(format!("need {count} shifts")));
        };
        let h0 = if cfg.base_log_metric.is_empty() {
            vec![1.0; count]
        } else if cfg.base_log_metric.len() == count {
            cfg.base_log_metric.iter().map(|x| x.exp()).collect()
        } else {
            return Err(FamilyError::InvalidConfig(format!("need {count} base metric constants")));
        };
        Ok(ChartFamily {
            tau0,
            n,
            overlap: cfg.overlap,
            shifts,
            h0,
            character: cfg.base_character,
        })
    }

    pub fn chart_count(&self) -> usize {
        self.n * self.n
    }

    pub fn tau0(&self) -> Complex64 {
        self.tau0
    }

    fn to_lattice(&self, z: Complex64) -> (f64, f64) {
        let y = z.im / self.tau0.im;
        (z.re - y * self.tau0.re, y)
    }

    fn from_lattice(&self, x: f64, y: f64) -> Complex64 {
        x + y * self.tau0
    }

    /// Lattice-coordinate box of chart `j`.
    fn bounds(&self, j: usize) -> [(f64, f64); 2] {
        let (a, b) = ((j / self.n) as f64, (j % self.n) as f64);
        let w = 1.0 / self.n as f64;
        let d = self.overlap;
        [(a * w - d, (a + 1.0) * w + d), (b * w - d, (b + 1.0) * w + d)]
    }

    pub fn contains(&self, j: usize, z: Complex64, margin: f64) -> bool {
        let (x, y) = self.to_lattice(z);
        let [(x0, x1), (y0, y1)] = self.bounds(j);
        x > x0 + margin && x < x1 - margin && y > y0 + margin && y < y1 - margin
    }

    /// Interval intersection of chart `j` with chart `k` translated by `-omega`.
    fn overlap_box(&self, j: usize, k: usize, m: i64, l: i64) -> Option<[(f64, f64); 2]> {
        let bj = self.bounds(j);
        let bk = self.bounds(k);
        let ix = (bj[0].0.max(bk[0].0 - m as f64), bj[0].1.min(bk[0].1 - m as f64));
        let iy = (bj[1].0.max(bk[1].0 - l as f64), bj[1].1.min(bk[1].1 - l as f64));
        (ix.0 < ix.1 && iy.0 < iy.1).then_some([ix, iy])
    }

    /// The lattice translation `omega_jk = m + l tau0` carrying chart-`j`
    /// coordinates to chart-`k` coordinates on the overlap.
    pub fn translation(&self, j: usize, k: usize) -> Result<(i64, i64), FamilyError> {
        let mut found = None;
        for m in -1..=1 {
            for l in -1..=1 {
                if self.overlap_box(j, k, m, l).is_some() {
                    if found.is_some() {
                        return Err(FamilyError::InvalidConfig(format!("overlap of {j} and {k} is disconnected")));
                    }
                    found = Some((m, l));
                }
            }
        }
        found.ok_or(FamilyError::NoOverlap(j, k))
    }

    fn omega(&self, j: usize, k: usize) -> Result<Complex64, FamilyError> {
        let (m, l) = self.translation(j, k)?;
        Ok(m as f64 + l as f64 * self.tau0)
    }

    /// Chart-`k` coordinate of a point given in chart `j`.
    pub fn change_chart(&self, j: usize, k: usize, z: Complex64) -> Result<Complex64, FamilyError> {
        Ok(z + self.omega(j, k)?)
    }

    /// `f_j(z) = z + s_j`.
    pub fn primitive(&self, j: usize, z: Complex64) -> Complex64 {
        z + self.shifts[j]
    }

    /// `c_jk = f_k - f_j` on the overlap.
    pub fn c(&self, j: usize, k: usize) -> Result<Complex64, FamilyError> {
        Ok(self.omega(j, k)? + self.shifts[k] - self.shifts[j])
    }

    pub fn h0(&self, j: usize) -> f64 {
        self.h0[j]
    }

    /// Unitary character times the coboundary `sqrt(h0_k / h0_j)`.
    pub fn g0(&self, j: usize, k: usize) -> Result<Complex64, FamilyError> {
        let (m, l) = self.translation(j, k)?;
        let phase = 2.0 * PI * (self.character[0] * m as f64 + self.character[1] * l as f64);
        Ok(Complex64::from_polar((self.h0[k] / self.h0[j]).sqrt(), phase))
    }

    /// Random points in the overlap of `j` and `k`, in chart-`j` coordinates.
    pub fn overlap_samples<R: Rng>(&self, j: usize, k: usize, count: usize, rng: &mut R) -> Result<Vec<Complex64>, FamilyError> {
        let (m, l) = self.translation(j, k)?;
        let [(x0, x1), (y0, y1)] = self.overlap_box(j, k, m, l).ok_or(FamilyError::NoOverlap(j, k))?;
        Ok((0..count)
            .map(|_| {
                let x = x0 + (x1 - x0) * rng.random_range(0.05..0.95);
                let y = y0 + (y1 - y0) * rng.random_range(0.05..0.95);
                self.from_lattice(x, y)
            })
            .collect())
    }

    /// Triples whose common overlap is nonempty.
    pub fn triple_overlaps(&self) -> Vec<(usize, usize, usize)> {
        let n = self.chart_count();
        let mut out = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let (Ok((a1, b1)), Ok((a2, b2))) = (self.translation(j, k), self.translation(j, l)) else {
                        continue;
                    };
                    let (Some(bk), Some(bl)) = (self.overlap_box(j, k, a1, b1), self.overlap_box(j, l, a2, b2)) else {
                        continue;
                    };
                    let ix = (bk[0].0.max(bl[0].0), bk[0].1.min(bl[0].1));
                    let iy = (bk[1].0.max(bl[1].0), bk[1].1.min(bl[1].1));
                    if ix.0 < ix.1 && iy.0 < iy.1 {
                        out.push((j, k, l));
                    }
                }
            }
        }
        out
    }

    /// `g_{jk,tau} = exp(-tau conj(c_jk)) g0_jk`.
    pub fn transition(&self, tau: Complex64, j: usize, k: usize) -> Result<Complex64, FamilyError> {
        Ok((-tau * self.c(j, k)?.conj()).exp() * self.g0(j, k)?)
    }

    fn check_in(&self, j: usize, z: Complex64) -> Result<(), FamilyError> {
        if self.contains(j, z, 0.0) {
            Ok(())
        } else {
            Err(FamilyError::OutOfChart(j))
        }
    }

    /// `h_j = h0_j exp(-2 Re(tau conj f_j))`.
    pub fn metric(&self, tau: Complex64, j: usize, z: Complex64) -> Result<f64, FamilyError> {
        self.check_in(j, z)?;
        Ok(self.h0[j] * (-2.0 * (tau * self.primitive(j, z).conj()).re).exp())
    }

    /// `|dbar s - tau s dzbar|` for `s = exp(tau conj f_j)`, by central differences.
    pub fn dbar_tau_residual(&self, tau: Complex64, j: usize, z: Complex64, h: f64) -> Result<f64, FamilyError> {
        if !self.contains(j, z, 2.0 * h) {
            return Err(FamilyError::StencilOutOfChart(j));
        }
        let s = |w: Complex64| (tau * self.primitive(j, w).conj()).exp();
        let dx = (s(z + h) - s(z - h)) / (2.0 * h);
        let dy = (s(z + I * h) - s(z - I * h)) / (2.0 * h);
        let dbar = 0.5 * (dx + I * dy);
        Ok((dbar - tau * s(z)).norm())
    }

    /// Finite-difference `d d-bar` of `-log h_j` in `z` (zero for flat fibres).
    pub fn fiber_curvature(&self, tau: Complex64, j: usize, z: Complex64, h: f64) -> Result<f64, FamilyError> {
        if !self.contains(j, z, 2.0 * h) {
            return Err(FamilyError::StencilOutOfChart(j));
        }
        let psi = |w: Complex64| -> Result<f64, FamilyError> { Ok(-self.metric(tau, j, w)?.ln()) };
        let lap = (psi(z + h)? + psi(z - h)? + psi(z + I * h)? + psi(z - I * h)? - 4.0 * psi(z)?) / (h * h);
        Ok(0.25 * lap)
    }

    /// `G_jk = g_{jk,tau} [[1, 0], [2 (conj f_j - conj f_k), 1]]`.
    pub fn jet_transition(&self, tau: Complex64, j: usize, k: usize, z: Complex64) -> Result<Matrix2<Complex64>, FamilyError> {
        self.check_in(j, z)?;
        let zk = self.change_chart(j, k, z)?;
        if !self.contains(k, zk, 0.0) {
            return Err(FamilyError::NoOverlap(j, k));
        }
        let g = self.transition(tau, j, k)?;
        let lower = 2.0 * (self.primitive(j, z).conj() - self.primitive(k, zk).conj());
        Ok(Matrix2::new(g, Complex64::new(0.0, 0.0), g * lower, g))
    }

    /// `H_j = h_j N_j^* N_j` with `N_j = [[1, 0], [-2 conj f_j, 1]]`, i.e.
    /// `h_j [[1 + 4|f_j|^2, -2 f_j], [-2 conj f_j, 1]]` acting on column vectors.
    pub fn jet_metric(&self, tau: Complex64, j: usize, z: Complex64) -> Result<Matrix2<Complex64>, FamilyError> {
        let h = self.metric(tau, j, z)?;
        let f = self.primitive(j, z);
        let one = Complex64::new(1.0, 0.0);
        Ok(Matrix2::new(one + 4.0 * f.norm_sqr(), -2.0 * f, -2.0 * f.conj(), one) * Complex64::new(h, 0.0))
    }

    /// `N_j`, converting `(s_j, d_tau s_j)` to `(s_j, nabla_tau s_j)`.
    pub fn jet_frame_change(&self, j: usize, z: Complex64) -> Matrix2<Complex64> {
        let f = self.primitive(j, z);
        Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            -2.0 * f.conj(),
            Complex64::new(1.0, 0.0),
        )
    }
}

/// Weight data entering the modified metric on `X x C`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMetricSpec {
    pub eta: f64,
    pub divisor: DivisorModel,
    pub divisor_scale: f64,
    pub sign: MetricSign,
    /// Keep the `exp(-(|tau|^2 - 1) / (2 eta))` factor.
    pub tau_normalization: bool,
}

impl FamilyMetricSpec {
    pub fn from_config(cfg: &FamilyConfig) -> Result<Self, FamilyError> {
        if !(cfg.eta > 0.0) {
            return Err(FamilyError::InvalidConfig("eta must be positive".into()));
        }
        Ok(FamilyMetricSpec {
            eta: cfg.eta,
            divisor: cfg.divisor,
            divisor_scale: cfg.divisor_scale,
            sign: cfg.metric_sign,
            tau_normalization: true,
        })
    }
}

/// Guard distance from the divisor.
pub const DIVISOR_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub mode: CurvatureMode,
    pub eta: f64,
    pub sign: MetricSign,
    pub points: usize,
    pub step: f64,
    /// Least eigenvalue of the complex Hessian of `-log(metric)` in `(z, tau)`,
    /// Richardson-extrapolated from steps `h` and `h/2`.
    pub min_eigenvalue: f64,
    pub min_eigenvalue_at: [[f64; 2]; 2],
    pub skipped_near_divisor: usize,
    /// Unextrapolated values at steps `h` and `h/2`.
    pub min_eigenvalue_step: f64,
    pub min_eigenvalue_half_step: f64,
    /// `min (1/2pi) d_tau d_taubar psi - 1/(4 pi eta)`; 2-eta mode only.
    pub tau_margin: Option<f64>,
    /// `min (1/2pi)(psi_tt - |psi_zt|^2 / psi_zz) - 1/(4 pi eta)`: the margin with the
    /// `z` direction optimised out (2-eta mode only).
    pub schur_margin: Option<f64>,
    /// Least eigenvalue of `(1/2pi) Hess - diag(0, 1/(4 pi eta))` (2-eta mode only).
    pub form_margin: Option<f64>,
}

struct Psi<'a> {
    fam: &'a ChartFamily,
    spec: &'a FamilyMetricSpec,
    theta: ThetaParams,
    k: f64,
    chart: usize,
}

impl Psi<'_> {
    /// `-log` of the modified metric at `(z, tau)`.
    fn eval(&self, z: Complex64, tau: Complex64) -> Result<f64, FamilyError> {
        let f = self.fam.primitive(self.chart, z);
        let keta = self.k * self.spec.eta;
        let mut psi = -self.fam.h0(self.chart).ln();
        psi += match self.spec.sign {
            MetricSign::PlusConjTauF => -2.0 * (tau.conj() * f).re,
            MetricSign::MinusTauConjF => 2.0 * (tau * f.conj()).re,
        };
        if self.spec.tau_normalization {
            psi += (tau.norm_sqr() - 1.0) / (2.0 * self.spec.eta);
        }
        if self.spec.divisor == DivisorModel::Theta {
            let y = z.im / self.fam.tau0().im;
            let chi = 2.0 * PI * self.spec.divisor_scale * y * y * self.fam.tau0().im;
            let s = self
                .theta
                .theta(&[z])
                .map_err(|e| FamilyError::InvalidConfig(e.to_string()))?;
            if s.norm() < DIVISOR_GUARD {
                return Err(FamilyError::DivisorTooClose(s.norm()));
            }
            psi += keta * chi - 2.0 * keta * s.norm().ln();
        }
        Ok(psi)
    }

    /// Hermitian complex Hessian `[[psi_zz, psi_zt], [conj, psi_tt]]` by central differences
    /// in the four real coordinates.
    fn hessian(&self, z: Complex64, tau: Complex64, h: f64) -> Result<Matrix2<Complex64>, FamilyError> {
        let dirs = [
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            (I, Complex64::new(0.0, 0.0)),
            (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            (Complex64::new(0.0, 0.0), I),
        ];
        let f = |a: usize, sa: f64, b: usize, sb: f64| -> Result<f64, FamilyError> {
            let dz = dirs[a].0 * sa + dirs[b].0 * sb;
            let dt = dirs[a].1 * sa + dirs[b].1 * sb;
            self.eval(z + dz * h, tau + dt * h)
        };
        let center = self.eval(z, tau)?;
        let mut d2 = [[0.0; 4]; 4];
        for a in 0..4 {
            let plus = self.eval(z + dirs[a].0 * h, tau + dirs[a].1 * h)?;
            let minus = self.eval(z - dirs[a].0 * h, tau - dirs[a].1 * h)?;
            d2[a][a] = (plus - 2.0 * center + minus) / (h * h);
            for b in a + 1..4 {
                let v = (f(a, 1.0, b, 1.0)? - f(a, 1.0, b, -1.0)? - f(a, -1.0, b, 1.0)? + f(a, -1.0, b, -1.0)?) / (4.0 * h * h);
                d2[a][b] = v;
                d2[b][a] = v;
            }
        }
        // Coordinates: 0 = x, 1 = y (z = x + iy), 2 = u, 3 = v (tau = u + iv).
        let zz = 0.25 * (d2[0][0] + d2[1][1]);
        let tt = 0.25 * (d2[2][2] + d2[3][3]);
        let zt = 0.25 * Complex64::new(d2[0][2] + d2[1][3], d2[0][3] - d2[1][2]);
        Ok(Matrix2::new(Complex64::new(zz, 0.0), zt, zt.conj(), Complex64::new(tt, 0.0)))
    }
}

fn hermitian_eigen_min(m: &Matrix2<Complex64>) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm();
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    mean - rad
}

/// Grid of `(z, tau)` sample points: `z_grid` points per chart side over the
/// whole fundamental domain, `tau` over a square of the given radius.
pub fn curvature_grid(fam: &ChartFamily, z_grid: usize, tau_grid: usize, tau_radius: f64) -> Vec<(Complex64, Complex64)> {
    let side = z_grid * fam.n;
    let t = |i: usize| {
        if tau_grid == 1 {
            0.0
        } else {
            -tau_radius + 2.0 * tau_radius * i as f64 / (tau_grid - 1) as f64
        }
    };
    let mut out = Vec::new();
    for a in 0..side {
        for b in 0..side {
            let z = fam.from_lattice((a as f64 + 0.5) / side as f64, (b as f64 + 0.5) / side as f64);
            for c in 0..tau_grid {
                for d in 0..tau_grid {
                    out.push((z, Complex64::new(t(c), t(d))));
                }
            }
        }
    }
    out
}

/// Points with `|Theta(z)|` below this are skipped by the curvature sweep.
pub const DIVISOR_EXCLUSION: f64 = 0.1;

pub fn curvature_semipositivity(
    fam: &ChartFamily,
    spec: &FamilyMetricSpec,
    grid: &[(Complex64, Complex64)],
    mode: CurvatureMode,
    step: f64,
) -> Result<CurvatureReport, FamilyError> {
    let mut psi = Psi {
        fam,
        spec,
        theta: ThetaParams::new(nalgebra::DMatrix::from_element(1, 1, fam.tau0()), vec![1], 1e-15)
            .map_err(|e| FamilyError::InvalidConfig(e.to_string()))?,
        k: mode.k(),
        chart: 0,
    };
    let target = 1.0 / (4.0 * PI * spec.eta);
    let mut min_eig = f64::INFINITY;
    let mut min_half = f64::INFINITY;
    let mut min_raw = f64::INFINITY;
    let mut at = [[0.0; 2]; 2];
    let mut tau_margin = f64::INFINITY;
    let mut schur_margin = f64::INFINITY;
    let mut form_margin = f64::INFINITY;
    let mut skipped = 0;
    let mut points = 0;
    for &(z, tau) in grid {
        let (x, y) = fam.to_lattice(z);
        let n = fam.n as f64;
        psi.chart = ((x * n).floor().clamp(0.0, n - 1.0) as usize) * fam.n + (y * n).floor().clamp(0.0, n - 1.0) as usize;
        if !fam.contains(psi.chart, z, 2.0 * step) {
            return Err(FamilyError::StencilOutOfChart(psi.chart));
        }
        if spec.divisor == DivisorModel::Theta {
            let s = psi.theta.theta(&[z]).map_err(|e| FamilyError::InvalidConfig(e.to_string()))?;
            if s.norm() < DIVISOR_EXCLUSION {
                skipped += 1;
                continue;
            }
        }
        points += 1;
        let coarse = psi.hessian(z, tau, step)?;
        let half = psi.hessian(z, tau, 0.5 * step)?;
        let hess = (half * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0);
        let e = hermitian_eigen_min(&hess);
        min_raw = min_raw.min(hermitian_eigen_min(&coarse));
        if e < min_eig {
            min_eig = e;
            at = [pair(z), pair(tau)];
        }
        min_half = min_half.min(hermitian_eigen_min(&half));
        let tt = hess[(1, 1)].re / (2.0 * PI);
        tau_margin = tau_margin.min(tt - target);
        let zz = hess[(0, 0)].re;
        let schur = (hess[(1, 1)].re - hess[(0, 1)].norm_sqr() / zz) / (2.0 * PI);
        schur_margin = schur_margin.min(schur - target);
        let shifted = hess / Complex64::new(2.0 * PI, 0.0) - Matrix2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(target, 0.0),
        );
        form_margin = form_margin.min(hermitian_eigen_min(&shifted));
    }
    let two = mode == CurvatureMode::TwoEta;
    Ok(CurvatureReport {
        mode,
        eta: spec.eta,
        sign: spec.sign,
        points,
        skipped_near_divisor: skipped,
        step,
        min_eigenvalue: min_eig,
        min_eigenvalue_at: at,
        min_eigenvalue_step: min_raw,
        min_eigenvalue_half_step: min_half,
        tau_margin: two.then_some(tau_margin),
        schur_margin: two.then_some(schur_margin),
        form_margin: two.then_some(form_margin),
    })
}

/// Maximum residuals of every algebraic identity of the family, sampled at
/// random `(tau, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub c_spread: f64,
    pub c_cocycle: f64,
    pub base_compatibility: f64,
    pub line_cocycle: f64,
    pub metric_compatibility: f64,
    pub jet_cocycle: f64,
    pub jet_det: f64,
    pub jet_metric_det: f64,
    pub jet_metric_compatibility: f64,
    pub jet_metric_min_eigenvalue: f64,
    pub fiber_curvature: f64,
    pub dbar_tau_residual: f64,
    /// Residual ratios `r(h) / r(h/2)` for halving steps.
    pub dbar_tau_ratios: Vec<f64>,
    pub seed: u64,
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn mat_rel(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

pub fn check_identities(fam: &ChartFamily, samples: usize, seed: u64) -> Result<IdentityReport, FamilyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = fam.chart_count();
    let mut rep = IdentityReport {
        c_spread: 0.0,
        c_cocycle: 0.0,
        base_compatibility: 0.0,
        line_cocycle: 0.0,
        metric_compatibility: 0.0,
        jet_cocycle: 0.0,
        jet_det: 0.0,
        jet_metric_det: 0.0,
        jet_metric_min_eigenvalue: f64::INFINITY,
        jet_metric_compatibility: 0.0,
        fiber_curvature: 0.0,
        dbar_tau_residual: 0.0,
        dbar_tau_ratios: Vec::new(),
        seed,
    };
    let rand_tau = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let c = fam.c(j, k)?;
            for z in fam.overlap_samples(j, k, 5, &mut rng)? {
                let zk = fam.change_chart(j, k, z)?;
                let direct = fam.primitive(k, zk) - fam.primitive(j, z);
                rep.c_spread = rep.c_spread.max((direct - c).norm());
            }
            let g0 = fam.g0(j, k)?;
            rep.base_compatibility = rep
                .base_compatibility
                .max((fam.h0(j) * g0.norm_sqr() - fam.h0(k)).abs() / fam.h0(k));
            for z in fam.overlap_samples(j, k, samples, &mut rng)? {
                let tau = rand_tau(&mut rng);
                let zk = fam.change_chart(j, k, z)?;
                let g = fam.transition(tau, j, k)?;
                let hj = fam.metric(tau, j, z)?;
                let hk = fam.metric(tau, k, zk)?;
                rep.metric_compatibility = rep.metric_compatibility.max((hj * g.norm_sqr() - hk).abs() / hk);
                let gm = fam.jet_transition(tau, j, k, z)?;
                rep.jet_det = rep.jet_det.max(rel(gm.determinant(), g * g));
                let hjm = fam.jet_metric(tau, j, z)?;
                let hkm = fam.jet_metric(tau, k, zk)?;
                let pulled = gm.adjoint() * hjm * gm;
                rep.jet_metric_compatibility = rep.jet_metric_compatibility.max(mat_rel(&pulled, &hkm));
                rep.jet_metric_det = rep.jet_metric_det.max(rel(hjm.determinant(), Complex64::new(hj * hj, 0.0)));
                let herm = (hjm - hjm.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                rep.jet_metric_det = rep.jet_metric_det.max(herm / hj);
                rep.jet_metric_min_eigenvalue = rep.jet_metric_min_eigenvalue.min(hermitian_eigen_min(&hjm));
            }
        }
    }
    for (j, k, l) in fam.triple_overlaps() {
        rep.c_cocycle = rep.c_cocycle.max((fam.c(j, k)? + fam.c(k, l)? - fam.c(j, l)?).norm());
        for _ in 0..samples {
            let tau = rand_tau(&mut rng);
            let lhs = fam.transition(tau, j, k)? * fam.transition(tau, k, l)?;
            rep.line_cocycle = rep.line_cocycle.max(rel(lhs, fam.transition(tau, j, l)?));
        }
        // A point in the triple overlap: a sample of (j, k) that also lies in l.
        let pts: Vec<Complex64> = fam
            .overlap_samples(j, k, 64, &mut rng)?
            .into_iter()
            .filter(|&z| fam.change_chart(j, l, z).is_ok_and(|w| fam.contains(l, w, 0.0)))
            .take(samples)
            .collect();
        for z in pts {
            let tau = rand_tau(&mut rng);
            let zk = fam.change_chart(j, k, z)?;
            let lhs = fam.jet_transition(tau, j, k, z)? * fam.jet_transition(tau, k, l, zk)?;
            rep.jet_cocycle = rep.jet_cocycle.max(mat_rel(&lhs, &fam.jet_transition(tau, j, l, z)?));
        }
    }
    let centre = fam.from_lattice(0.5 / fam.n as f64, 0.5 / fam.n as f64);
    for _ in 0..samples {
        let tau = rand_tau(&mut rng);
        rep.fiber_curvature = rep.fiber_curvature.max(fam.fiber_curvature(tau, 0, centre, 1e-3)?.abs());
    }
    let tau1 = Complex64::new(1.0, 0.0);
    rep.dbar_tau_residual = fam.dbar_tau_residual(tau1, 0, centre, 1e-3)?;
    let mut h = 4e-2;
    for _ in 0..3 {
        let a = fam.dbar_tau_residual(tau1, 0, centre, h)?;
        let b = fam.dbar_tau_residual(tau1, 0, centre, h / 2.0)?;
        rep.dbar_tau_ratios.push(a / b);
        h /= 2.0;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> ChartFamily {
        let mut cfg = FamilyConfig::default();
        cfg.shifts = (0..9).map(|j| [0.05 * j as f64, -0.03 * j as f64]).collect();
        cfg.base_log_metric = (0..9).map(|j| 0.1 * j as f64).collect();
        cfg.base_character = [0.2, 0.35];
        ChartFamily::new(&cfg).unwrap()
    }

    #[test]
    fn transitions_at_special_tau() {
        let f = family();
        assert!((f.transition(Complex64::new(0.0, 0.0), 0, 1).unwrap() - f.g0(0, 1).unwrap()).norm() < 1e-15);
        // c = 1, g0 = 1, tau = pi i gives -1.
        let g = (-(PI * I) * Complex64::new(1.0, 0.0).conj()).exp();
        assert!((g + 1.0).norm() < 1e-15);
    }

    #[test]
    fn every_identity_holds() {
        let rep = check_identities(&family(), 10, 3).unwrap();
        assert!(rep.c_spread < 1e-12, "{rep:?}");
        assert!(rep.c_cocycle < 1e-12);
        assert!(rep.line_cocycle < 1e-12);
        assert!(rep.jet_cocycle < 1e-12);
        assert!(rep.metric_compatibility < 1e-10);
        assert!(rep.jet_metric_compatibility < 1e-10);
        assert!(rep.jet_metric_det < 1e-12);
        assert!(rep.jet_det < 1e-12);
        assert!(rep.jet_metric_min_eigenvalue > 0.0);
        assert!(rep.fiber_curvature < 1e-6);
        assert!(rep.dbar_tau_residual < 1e-5);
        // The h^2 terms of the x and y stencils cancel on an antiholomorphic
        // frame, so the observed order is at least two (in fact four).
        for r in &rep.dbar_tau_ratios {
            assert!(r.log2() > 1.9, "ratios {:?}", rep.dbar_tau_ratios);
        }
    }

    #[test]
    fn dbar_tau_vanishes_for_holomorphic_frame() {
        let f = family();
        let z = Complex64::new(0.15, 0.15);
        assert!(f.dbar_tau_residual(Complex64::new(0.0, 0.0), 0, z, 1e-3).unwrap() < 1e-10);
    }

    #[test]
    fn jet_metric_special_cases() {
        let cfg = FamilyConfig::default();
        let f = ChartFamily::new(&cfg).unwrap();
        // f_0(0) = 0 gives h times the identity.
        let h = f.jet_metric(Complex64::new(0.3, 0.1), 0, Complex64::new(0.0, 0.0)).unwrap();
        assert!((h[(0, 1)]).norm() < 1e-15 && (h[(0, 0)] - h[(1, 1)]).norm() < 1e-15);
        let g = f.jet_transition(Complex64::new(0.0, 0.0), 0, 1, Complex64::new(0.1, 0.3)).unwrap();
        assert!(mat_rel(&g, &Matrix2::identity()) < 1e-15);
    }

    #[test]
    fn curvature_modes() {
        let cfg = FamilyConfig { z_grid: 3, tau_grid: 2, ..FamilyConfig::default() };
        let fam = ChartFamily::new(&cfg).unwrap();
        let spec = FamilyMetricSpec::from_config(&cfg).unwrap();
        let grid = curvature_grid(&fam, cfg.z_grid, cfg.tau_grid, cfg.tau_radius);
        let eta = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::Eta, cfg.step).unwrap();
        assert!((eta.min_eigenvalue - 0.10958).abs() < 1e-3, "{eta:?}");
        let two = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::TwoEta, cfg.step).unwrap();
        assert!(two.tau_margin.unwrap().abs() < 1e-4, "{two:?}");
        let flat = FamilyMetricSpec {
            divisor: DivisorModel::Trivial,
            tau_normalization: false,
            ..spec
        };
        // Only the mixed term -2 Re(conj(tau) z) survives: eigenvalues are +-1.
        let r = curvature_semipositivity(&fam, &flat, &grid, CurvatureMode::Eta, cfg.step).unwrap();
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-5, "{r:?}");
    }
}
