//! Browser bindings: cut-off profiles, theta moduli and the extension-constant landscape.

use flatlab_core::dbar::{ot_constant, ot_constant_optimize, CutoffSpec, LogLogVariant, OtSearchBox};
use flatlab_core::theta::{ThetaParams, DEFAULT_EPS};
use nalgebra::DMatrix;
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn variant(displayed: bool) -> LogLogVariant {
    if displayed {
        LogLogVariant::Displayed
    } else {
        LogLogVariant::Difference
    }
}

/// `(r, Lambda, |dbar Lambda|)` triples on a geometric sweep of `(0, 1)`.
pub fn cutoff_samples(r1: f64, r2: f64, m: u32, points: usize) -> Result<Vec<f64>, String> {
    let spec = CutoffSpec::new(r1, r2, m).map_err(|e| e.to_string())?;
    let (lo, hi) = (1e-4f64, 0.999f64);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let r = lo * (hi / lo).powf(i as f64 / (points.max(2) - 1) as f64);
        let w = Complex64::new(r, 0.0);
        out.push(r);
        out.push(spec.eval(w).map_err(|e| e.to_string())?);
        out.push(spec.dbar(w).map_err(|e| e.to_string())?.norm());
    }
    Ok(out)
}

/// `|Theta(x + y tau; tau)|` on an `n x n` grid over the fundamental
/// parallelogram, row-major in `y`.
pub fn theta_grid(tau_re: f64, tau_im: f64, n: usize) -> Result<Vec<f64>, String> {
    let tau = Complex64::new(tau_re, tau_im);
    let params = ThetaParams::new(DMatrix::from_element(1, 1, tau), vec![1], DEFAULT_EPS).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let z = Complex64::new(i as f64 / n as f64, 0.0) + tau * (j as f64 / n as f64);
            out.push(params.theta(&[z]).map_err(|e| e.to_string())?.norm());
        }
    }
    Ok(out)
}

/// Extension constant on an `n x n` grid of `(r1, r2)` in `(0, 1)^2`, row-major
/// in `r2`; `NaN` outside `r1 < r2`.
pub fn ot_grid(n: usize, displayed: bool) -> Vec<f64> {
    let v = variant(displayed);
    let at = |k: usize| (k as f64 + 0.5) / n as f64;
    (0..n)
        .flat_map(|j| (0..n).map(move |i| ot_constant(at(i), at(j), v).unwrap_or(f64::NAN)))
        .collect()
}

#[wasm_bindgen]
pub fn cutoff_profile(r1: f64, r2: f64, m: u32, points: usize) -> Result<Vec<f64>, JsError> {
    cutoff_samples(r1, r2, m, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn theta_modulus(tau_re: f64, tau_im: f64, n: usize) -> Result<Vec<f64>, JsError> {
    theta_grid(tau_re, tau_im, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ot_landscape(n: usize, displayed: bool) -> Vec<f64> {
    ot_grid(n, displayed)
}

/// `[r1, r2, C]` at the minimizer over the default search box.
#[wasm_bindgen]
pub fn ot_optimum(displayed: bool) -> Result<Vec<f64>, JsError> {
    let o = ot_constant_optimize(&OtSearchBox::default(), variant(displayed)).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(vec![o.r1, o.r2, o.c])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_runs_from_one_to_zero() {
        let s = cutoff_samples(0.3, 0.6, 2, 50).unwrap();
        assert_eq!(s.len(), 150);
        assert_eq!(s[1], 1.0);
        assert_eq!(s[148], 0.0);
        assert!(s.chunks(3).all(|t| (0.0..=1.0).contains(&t[1])));
        assert!(cutoff_samples(0.6, 0.3, 2, 10).is_err());
    }

    #[test]
    fn theta_grid_matches_the_origin_value() {
        let g = theta_grid(0.0, 1.0, 8).unwrap();
        assert!((g[0] - 1.086434811213308).abs() < 1e-12);
        // The zero of Theta sits at (1 + tau) / 2.
        let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 1e-10, "min {min}");
        assert!(theta_grid(0.0, -1.0, 4).is_err());
    }

    #[test]
    fn landscape_is_infeasible_below_the_diagonal() {
        let g = ot_grid(10, false);
        assert!(g[0].is_nan());
        assert!(g[9 * 10].is_finite());
    }
}
