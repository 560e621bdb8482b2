//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flatlab_core::cech::{data, CechComplex, CharacterValue, Scalars};
use flatlab_core::dbar::{
    annulus_samples, curvature_identity_check, ot_constant_optimize, ot_extension_experiment,
    pushforward_integral_check, two_weight_pointwise_check, Integrand, LogLogVariant, OtExtensionConfig,
    OtSearchBox, Phi, TwoWeightSpec,
};
use flatlab_core::family::{
    check_identities, curvature_grid, curvature_semipositivity, ChartFamily, CurvatureMode, FamilyConfig,
    FamilyMetricSpec,
};
use flatlab_core::jump::{analyze, definitional_membership, is_in_jump_locus, jump_ideal, JumpOptions, DEFAULT_MINOR_BUDGET};
use flatlab_core::laurent::Cyclo;
use flatlab_core::theta::{shipped_quotients, transition_ratio_fit, LatticePoint, ThetaParams};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn complex(name: &str) -> CechComplex {
    data::nerve_by_name(name).expect("shipped nerve").validate().expect("valid nerve")
}

fn generic(c: &CechComplex, rng: &mut ChaCha8Rng) -> CharacterValue {
    CharacterValue::random(rng, c.free_rank(), c.torsion_orders())
}

/// Rank by full-pivot Gaussian elimination, independent of the SVD path.
fn oracle_rank(m: &DMatrix<Complex64>) -> usize {
    let mut a = m.clone();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let (rows, cols) = a.shape();
    let mut rank = 0;
    for _ in 0..rows.min(cols) {
        let mut best = (0.0, 0, 0);
        for i in rank..rows {
            for j in rank..cols {
                let v = a[(i, j)].norm();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.0 <= 1e-9 * scale {
            break;
        }
        a.swap_rows(rank, best.1);
        a.swap_columns(rank, best.2);
        let piv = a[(rank, rank)];
        for i in rank + 1..rows {
            let f = a[(i, rank)] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for j in rank..cols {
                let t = a[(rank, j)];
                a[(i, j)] -= f * t;
            }
        }
        rank += 1;
    }
    rank
}

fn oracle_dims(c: &CechComplex, chi: &CharacterValue) -> Vec<usize> {
    let d = c.dimension();
    let ranks: Vec<usize> = (0..d)
        .map(|nu| oracle_rank(&c.coboundary_numeric(nu, chi).expect("coboundary")))
        .collect();
    (0..=d)
        .map(|p| c.count(p) - ranks.get(p).copied().unwrap_or(0) - if p == 0 { 0 } else { ranks[p - 1] })
        .collect()
}

fn euler(dims: &[usize]) -> i64 {
    dims.iter().enumerate().map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for name in ["circle3", "torus9", "wedge2", "genus2"] {
        let c = complex(name);
        let chi_expected = c.euler_characteristic();
        for _ in 0..100 {
            let exact = CharacterValue::random_rational(&mut rng, c.free_rank(), c.torsion_orders());
            let dims = c.cohomology_dims(&exact, Scalars::Exact).map_err(|e| e.to_string())?;
            ensure(euler(&dims) == chi_expected, format!("{name}: exact {dims:?} vs chi {chi_expected}"))?;
            let numeric = generic(&c, &mut rng);
            let dims = c
                .cohomology_dims(&numeric, Scalars::Numeric { tol: 1e-9 })
                .map_err(|e| e.to_string())?;
            ensure(euler(&dims) == chi_expected, format!("{name}: numeric {dims:?} vs chi {chi_expected}"))?;
            checked += 2;
        }
    }
    Ok(format!("{checked} characters, alternating sums equal simplex counts exactly"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let exact_int = |n: usize, k: i64| CharacterValue::exact(vec![Cyclo::from_int(1, k); n], vec![]);
    let mut cases: Vec<(&str, CharacterValue, usize, usize)> = vec![
        ("circle3", exact_int(1, 1), 0, 1),
        ("circle3", exact_int(1, 1), 1, 1),
        ("circle3", exact_int(1, 2), 0, 0),
        ("circle3", exact_int(1, 2), 1, 0),
        ("wedge2", exact_int(2, 1), 1, 2),
        ("torus9", exact_int(2, 1), 1, 2),
    ];
    let w = complex("wedge2");
    cases.push(("wedge2", generic(&w, &mut rng), 1, 1));
    let g = complex("genus2");
    cases.push(("genus2", generic(&g, &mut rng), 1, 2));
    for (name, chi, p, expected) in &cases {
        let c = complex(name);
        let scalars = match chi {
            CharacterValue::Exact { .. } => Scalars::Exact,
            CharacterValue::Numeric { .. } => Scalars::Numeric { tol: 1e-9 },
        };
        let got = c.cohomology_dim(chi, *p, scalars).map_err(|e| e.to_string())?;
        let oracle = oracle_dims(&c, &chi.to_numeric())[*p];
        ensure(
            got == *expected && oracle == *expected,
            format!("{name} H^{p}: module {got}, oracle {oracle}, expected {expected}"),
        )?;
    }
    Ok(format!("{} cohomology dimensions match the elimination oracle", cases.len()))
}

fn criterion_3() -> Outcome {
    let c = complex("circle3");
    let one = CharacterValue::exact(vec![Cyclo::one(1)], vec![]);
    let ideal = jump_ideal(&c, 0, &one, DEFAULT_MINOR_BUDGET).map_err(|e| e.to_string())?;
    let names: Vec<String> = ideal.generators().iter().map(|g| g.to_string()).collect();
    ensure(names == ["g1 - 1"], format!("generators {names:?}"))?;
    let rep = analyze(&c, 0, &one, &JumpOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.sampled_zero_set.len() == 1, format!("zero set {:?}", rep.sampled_zero_set))?;
    ensure(rep.torsion_reports[0].order == Some(1), "zero-set point is not of order 1")?;
    ensure(rep.sampled_zero_set[0].certified_exact, "zero-set point not certified")?;
    // 100 characters: half on the unit circle near 1, half uniformly random.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut disagreements = 0;
    for k in 0..100 {
        let chi = if k % 10 == 0 {
            CharacterValue::numeric(vec![Complex64::new(1.0, 0.0)], vec![])
        } else if k % 2 == 0 {
            CharacterValue::numeric(vec![Complex64::from_polar(1.0, rng.random_range(-0.5..0.5))], vec![])
        } else {
            generic(&c, &mut rng)
        };
        let a = is_in_jump_locus(&ideal, &chi, 1e-8).map_err(|e| e.to_string())?;
        let b = definitional_membership(&c, &ideal, &chi).map_err(|e| e.to_string())?;
        disagreements += usize::from(a != b);
    }
    ensure(disagreements == 0 && rep.membership_disagreements == 0, format!("{disagreements} disagreements"))?;
    Ok("ideal {g1 - 1}, zero set = order-1 point, 100 + 100 membership checks agree".into())
}

fn criterion_4() -> Outcome {
    let p1 = ThetaParams::standard_1d();
    let t0 = p1.theta(&[Complex64::new(0.0, 0.0)]).map_err(|e| e.to_string())?;
    let oracle: f64 = (-60i64..=60).map(|n| (-PI * (n * n) as f64).exp()).sum();
    let err0 = (t0 - oracle).norm().max((t0.re - 1.086434811213308).abs());
    ensure(err0 < 1e-12, format!("Theta(0) error {err0:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_q: f64 = 0.0;
    let mut worst_even: f64 = 0.0;
    for params in [ThetaParams::standard_1d(), ThetaParams::standard_2d()] {
        let l = params.dim();
        for _ in 0..20 {
            let zeta: Vec<Complex64> = (0..l)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let lp = LatticePoint::new(
                (0..l).map(|_| rng.random_range(-2..=2)).collect(),
                (0..l).map(|_| rng.random_range(-2..=2)).collect(),
            );
            let r = params.quasi_periodicity(&zeta, &lp).map_err(|e| e.to_string())?;
            worst_q = worst_q.max(r.normalized);
            let neg: Vec<Complex64> = zeta.iter().map(|z| -z).collect();
            let a = params.theta(&zeta).map_err(|e| e.to_string())?;
            let b = params.theta(&neg).map_err(|e| e.to_string())?;
            worst_even = worst_even.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    ensure(worst_q < 1e-10, format!("quasi-periodicity residual {worst_q:e}"))?;
    ensure(worst_even < 1e-12, format!("evenness residual {worst_even:e}"))?;
    Ok(format!("Theta(0) err {err0:.1e}, quasi {worst_q:.1e} < 1e-10, even {worst_even:.1e} < 1e-12"))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_one: f64 = 0.0;
    let mut fits = 0;
    for case in shipped_quotients() {
        for lp in &case.lattice_points {
            let fit = transition_ratio_fit(&case.params, &case.quotient, lp, 24, 5).map_err(|e| e.to_string())?;
            worst = worst.max(fit.residual);
            fits += 1;
            if lp.q.iter().all(|&q| q == 0) {
                let c = Complex64::new(fit.constant[0], fit.constant[1]).norm();
                let b = fit.linear.iter().map(|b| Complex64::new(b[0], b[1]).norm()).fold(0.0, f64::max);
                worst_one = worst_one.max(c.max(b).max(fit.residual));
            }
        }
    }
    ensure(worst < 1e-8, format!("affine residual {worst:e}"))?;
    ensure(worst_one < 1e-10, format!("integer translations deviate from 1 by {worst_one:e}"))?;
    Ok(format!("{fits} fits, residual {worst:.1e} < 1e-8, integer ratios {worst_one:.1e} < 1e-10"))
}

fn shipped_family() -> FamilyConfig {
    let mut cfg = FamilyConfig::default();
    cfg.shifts = (0..9).map(|j| [0.05 * j as f64, -0.03 * j as f64]).collect();
    cfg.base_log_metric = (0..9).map(|j| 0.1 * j as f64).collect();
    cfg.base_character = [0.2, 0.35];
    cfg
}

fn criterion_6() -> Outcome {
    let fam = ChartFamily::new(&shipped_family()).map_err(|e| e.to_string())?;
    let r = check_identities(&fam, 20, 6).map_err(|e| e.to_string())?;
    ensure(r.line_cocycle < 1e-12 && r.jet_cocycle < 1e-12, format!("cocycles {:e} {:e}", r.line_cocycle, r.jet_cocycle))?;
    ensure(
        r.metric_compatibility < 1e-10 && r.jet_metric_compatibility < 1e-10,
        format!("compatibilities {:e} {:e}", r.metric_compatibility, r.jet_metric_compatibility),
    )?;
    ensure(r.jet_metric_det < 1e-12, format!("det H - h^2: {:e}", r.jet_metric_det))?;
    ensure(
        r.dbar_tau_ratios.iter().all(|q| q.log2() > 1.9),
        format!("dbar_tau halving ratios {:?}", r.dbar_tau_ratios),
    )?;
    ensure(r.fiber_curvature < 1e-6, format!("fibre curvature {:e}", r.fiber_curvature))?;
    Ok(format!(
        "cocycles {:.1e}/{:.1e}, compat {:.1e}/{:.1e}, det {:.1e}, dbar_tau ratios {:?}, fibre {:.1e}",
        r.line_cocycle,
        r.jet_cocycle,
        r.metric_compatibility,
        r.jet_metric_compatibility,
        r.jet_metric_det,
        r.dbar_tau_ratios.iter().map(|q| (q * 10.0).round() / 10.0).collect::<Vec<_>>(),
        r.fiber_curvature
    ))
}

fn criterion_7() -> Outcome {
    let cfg = shipped_family();
    let fam = ChartFamily::new(&cfg).map_err(|e| e.to_string())?;
    let spec = FamilyMetricSpec::from_config(&cfg).map_err(|e| e.to_string())?;
    let grid = curvature_grid(&fam, cfg.z_grid, cfg.tau_grid, cfg.tau_radius);
    let eta = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::Eta, cfg.step).map_err(|e| e.to_string())?;
    ensure(eta.min_eigenvalue >= -1e-4, format!("eta-mode min eigenvalue {}", eta.min_eigenvalue))?;
    let two = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::TwoEta, cfg.step).map_err(|e| e.to_string())?;
    let margin = two.tau_margin.unwrap_or(f64::NEG_INFINITY);
    ensure(margin >= -1e-4, format!("2eta-mode tau margin {margin}"))?;
    Ok(format!(
        "{} points ({} skipped near the divisor), eta-mode min eigenvalue {:.4} >= -1e-4, 2eta tau margin {:.1e} >= -1e-4",
        eta.points, eta.skipped_near_divisor, eta.min_eigenvalue, margin
    ))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        for u in [Integrand::One, Integrand::Power { k: 1 }, Integrand::Gaussian { c: 2.0 }] {
            let r = pushforward_integral_check(&u, m, 0.25, 0.5).map_err(|e| e.to_string())?;
            worst = worst.max((r.ratio - 1.0).abs());
        }
    }
    let one = pushforward_integral_check(&Integrand::One, 2, 0.25, 0.5).map_err(|e| e.to_string())?;
    let exact = 4.0 * PI * 2f64.ln();
    let rel = ((one.lhs - exact) / exact).abs().max(((one.rhs - exact) / exact).abs());
    ensure(worst < 1e-3, format!("ratio deviation {worst:e}"))?;
    ensure(rel < 1e-3, format!("U = 1 relative error {rel:e}"))?;
    Ok(format!("ratio deviation {worst:.1e} < 1e-3, U = 1 vs 4 pi ln 2: {rel:.1e}"))
}

fn criterion_9() -> Outcome {
    let opt = ot_constant_optimize(&OtSearchBox::default(), LogLogVariant::Difference).map_err(|e| e.to_string())?;
    ensure(opt.c >= PI, format!("C* = {} < pi", opt.c))?;
    let coarse = ot_extension_experiment(&OtExtensionConfig { nr: 128, ntheta: 128, ..OtExtensionConfig::default() })
        .map_err(|e| e.to_string())?;
    let fine = ot_extension_experiment(&OtExtensionConfig::default()).map_err(|e| e.to_string())?;
    ensure(fine.f_at_zero_error < 1e-6, format!("|F(0) - 1| = {:e}", fine.f_at_zero_error))?;
    ensure(
        fine.dbar_residual < coarse.dbar_residual,
        format!("dbar F residual {:e} -> {:e}", coarse.dbar_residual, fine.dbar_residual),
    )?;
    let ratio = fine.ratio.unwrap_or(f64::INFINITY);
    ensure(ratio <= 1.1 * opt.c, format!("ratio {ratio} vs C* {}", opt.c))?;
    Ok(format!(
        "C* = {:.4} at ({:.4}, {:.4}), |F(0)-1| {:.1e}, dbar F {:.2e} -> {:.2e}, ratio {:.4} <= 1.1 C*",
        opt.c, opt.r1, opt.r2, fine.f_at_zero_error, coarse.dbar_residual, fine.dbar_residual, ratio
    ))
}

fn criterion_10() -> Outcome {
    let samples = annulus_samples(50, 0.05, 0.5, 10);
    let r = curvature_identity_check(0.5, &samples, 1e-3).map_err(|e| e.to_string())?;
    ensure(r.max_residual < 1e-5, format!("identity residual {:e}", r.max_residual))?;
    ensure((r.observed_order - 2.0).abs() < 0.25, format!("observed order {}", r.observed_order))?;
    let mut c0s = Vec::new();
    for eps in [0.1, 0.2, 0.3] {
        let s = annulus_samples(50, 0.05, 0.7, 11);
        let tw = two_weight_pointwise_check(&TwoWeightSpec { eps }, &Phi::Quadratic { c: 1.0 }, &s, 1e-3)
            .map_err(|e| e.to_string())?;
        ensure(tw.c0 > 0.0, format!("eps {eps}: c0 {}", tw.c0))?;
        ensure(tw.min_slack >= 0.0, format!("eps {eps}: slack {}", tw.min_slack))?;
        c0s.push(tw.c0);
    }
    Ok(format!(
        "identity residual {:.1e} < 1e-5, order {:.2}, c0 {:?}",
        r.max_residual,
        r.observed_order,
        c0s.iter().map(|c| (c * 1e4).round() / 1e4).collect::<Vec<_>>()
    ))
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, u64, fn() -> Outcome); 10] = [
        (1, "Euler-characteristic invariance", 10, criterion_1),
        (2, "known cohomology", 30, criterion_2),
        (3, "circle3 jump ideal", 10, criterion_3),
        (4, "theta laws", 5, criterion_4),
        (5, "transition-ratio log-affinity", 5, criterion_5),
        (6, "flat-family identities", 30, criterion_6),
        (7, "curvature semipositivity", 60, criterion_7),
        (8, "cyclic-cover transform", 10, criterion_8),
        (9, "extension constant and experiment", 120, criterion_9),
        (10, "smoothed curvature identity and two-weight checks", 30, criterion_10),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; runtime {:.1}s exceeds {limit}s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{:.2}s]", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {n:>2} {name}: {detail} [{:.2}s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
