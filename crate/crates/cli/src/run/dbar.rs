use std::f64::consts::PI;

use flatlab_core::dbar::{
    annulus_samples, curvature_identity_check, dbar_apply, dbar_solve, hyperbolic_invariance, ot_constant,
    ot_constant_optimize, ot_extension_experiment, pushforward_integral_check, radial_integral_eval,
    two_weight_pointwise_check, CutoffSpec, OtExtensionConfig, PolarGrid, SolveOptions, TwoWeightSpec,
};
use num_complex::Complex64;
use serde_json::json;

use super::{merge_steps, Ctx};
use crate::error::{CliError, CliResult};
use crate::report::{Outcome, Table, Verdict};
use crate::scenario::{DbarPayload, RhsInput};

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::module("dbar", e)
}

fn op_name(p: &DbarPayload) -> &'static str {
    match p {
        DbarPayload::Cutoff { .. } => "cutoff",
        DbarPayload::Pushforward { .. } => "pushforward",
        DbarPayload::Solve { .. } => "solve",
        DbarPayload::OtConstant { .. } => "ot-constant",
        DbarPayload::OtExtend { .. } => "ot-extend",
        DbarPayload::Curvature { .. } => "curvature",
        DbarPayload::TwoWeight { .. } => "two-weight",
        DbarPayload::Suite { .. } => "suite",
    }
}

pub(crate) fn run(payload: &DbarPayload, ctx: &Ctx) -> CliResult<Outcome> {
    match payload {
        DbarPayload::Cutoff { r1, r2, m, points, fd_step } => cutoff(*r1, *r2, *m, *points, *fd_step),
        DbarPayload::Pushforward { integrands, m, a, b } => {
            let mut worst: f64 = 0.0;
            let mut worst_analytic: Option<f64> = None;
            let mut reports = Vec::new();
            let mut table = Table::new(&["integrand", "m", "lhs", "rhs", "ratio", "analytic"]);
            for u in integrands {
                for &mm in m {
                    let r = pushforward_integral_check(u, mm, *a, *b).map_err(module)?;
                    worst = worst.max((r.ratio - 1.0).abs());
                    if let Some(x) = r.analytic {
                        let rel = ((r.lhs - x) / x).abs().max(((r.rhs - x) / x).abs());
                        worst_analytic = Some(worst_analytic.unwrap_or(0.0).max(rel));
                    }
                    table.push(vec![json!(u), json!(mm), json!(r.lhs), json!(r.rhs), json!(r.ratio), json!(r.analytic)]);
                    reports.push(r);
                }
            }
            let mut verdicts = vec![Verdict::below("ratio_deviation", worst, 1e-3)];
            if let Some(w) = worst_analytic {
                verdicts.push(Verdict::below("analytic_error", w, 1e-3));
            }
            Outcome::new(reports, verdicts, Some(table))
        }
        DbarPayload::Solve { rho_min, rho_max, n, phi, weight, rhs, pin_origin } => {
            let n = ctx.grid.unwrap_or(*n);
            let grid = PolarGrid::new(*rho_min, *rho_max, n, n).map_err(module)?;
            let v: Vec<Complex64> = grid
                .nodes()
                .map(|w| match rhs {
                    RhsInput::Constant { re, im } => Complex64::new(*re, *im),
                    RhsInput::ConjW => w.conj(),
                    RhsInput::W => w,
                })
                .collect();
            let opts = SolveOptions { tol: ctx.tol.unwrap_or(SolveOptions::default().tol), pin_origin: *pin_origin, ..SolveOptions::default() };
            let sol = dbar_solve(&grid, phi, *weight, &v, &opts).map_err(module)?;
            let du = dbar_apply(&grid, &sol.u);
            let nt = grid.ntheta();
            let mut table = Table::new(&["r", "mean_abs_u", "mean_abs_residual"]);
            for i in 0..grid.nr() {
                let ring = i * nt..(i + 1) * nt;
                let mu = ring.clone().map(|k| sol.u[k].norm()).sum::<f64>() / nt as f64;
                let mr = ring.map(|k| (du[k] - v[k]).norm()).sum::<f64>() / nt as f64;
                table.push(vec![json!(grid.radius(i)), json!(mu), json!(mr)]);
            }
            let mut verdicts = vec![Verdict::below("relative_residual", sol.residual / sol.rhs_norm.max(f64::MIN_POSITIVE), 1e-6)];
            if let Some(h) = sol.hormander_rhs {
                verdicts.push(Verdict::at_most("hormander_ratio", sol.weighted_norm_sq / h, 1.0));
            }
            let result = json!({ "grid": { "rho_min": rho_min, "rho_max": rho_max, "nr": n, "ntheta": n }, "solution": sol });
            Outcome::new(result, verdicts, Some(table))
        }
        DbarPayload::OtConstant { r1, r2, variant, search } => {
            let (result, c) = match (r1, r2) {
                (Some(a), Some(b)) => {
                    let c = ot_constant(*a, *b, *variant).map_err(module)?;
                    (json!({ "r1": a, "r2": b, "c": c, "variant": variant }), c)
                }
                (None, None) => {
                    let opt = ot_constant_optimize(search, *variant).map_err(module)?;
                    (json!(opt), opt.c)
                }
                _ => return Err(CliError::Schema("give both r1 and r2, or neither to optimize".into())),
            };
            Outcome::new(result, vec![Verdict::at_least("at_least_pi", c, PI)], None)
        }
        DbarPayload::OtExtend { config, refine } => {
            let mut cfg = config.clone();
            if let Some(g) = ctx.grid {
                cfg.nr = g;
                cfg.ntheta = g;
            }
            if let Some(t) = ctx.tol {
                cfg.tol = t;
            }
            ot_extend(&cfg, *refine)
        }
        DbarPayload::Curvature { eps, samples, lo, hi, step } => {
            let pts = annulus_samples(*samples, *lo, *hi, ctx.seed);
            let r = curvature_identity_check(*eps, &pts, *step).map_err(module)?;
            let verdicts = vec![
                Verdict::below("max_residual", r.max_residual, 1e-5),
                Verdict::below("order_deviation", (r.observed_order - 2.0).abs(), 0.25),
            ];
            Outcome::new(r, verdicts, None)
        }
        DbarPayload::TwoWeight { eps, samples, lo, hi, phi, step } => {
            let pts = annulus_samples(*samples, *lo, *hi, ctx.seed);
            let mut reports = Vec::new();
            let mut table = Table::new(&["eps", "c0", "min_defect", "min_slack", "min_theta_phi", "sup_w_beta"]);
            let (mut c0, mut slack) = (f64::INFINITY, f64::INFINITY);
            for &e in eps {
                let r = two_weight_pointwise_check(&TwoWeightSpec { eps: e }, phi, &pts, *step).map_err(module)?;
                c0 = c0.min(r.c0);
                slack = slack.min(r.min_slack);
                table.push(vec![json!(e), json!(r.c0), json!(r.min_defect), json!(r.min_slack), json!(r.min_theta_phi), json!(r.sup_w_beta)]);
                reports.push(r);
            }
            let verdicts = vec![Verdict::above("min_c0", c0, 0.0), Verdict::at_least("min_slack", slack, 0.0)];
            Outcome::new(reports, verdicts, Some(table))
        }
        DbarPayload::Suite { steps } => {
            let outcomes = steps
                .iter()
                .map(|s| Ok((op_name(s).to_string(), run(s, ctx)?)))
                .collect::<CliResult<Vec<_>>>()?;
            merge_steps(outcomes)
        }
    }
}

fn cutoff(r1: f64, r2: f64, m: u32, points: usize, h: f64) -> CliResult<Outcome> {
    let spec = CutoffSpec::new(r1, r2, m).map_err(module)?;
    if points < 2 {
        return Err(CliError::Schema("cutoff profile needs at least 2 points".into()));
    }
    // Geometric sweep across the ramp, padded on both sides.
    let lo = 0.5 * r1.powi(m as i32);
    let hi = (2.0 * r2.powi(m as i32)).min(0.99);
    let radii: Vec<f64> = (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect();
    let mut table = Table::new(&["r", "lambda", "dbar_abs", "fd_error"]);
    let mut fd_err: f64 = 0.0;
    let mut range_ok = true;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for &r in &radii {
        let w = Complex64::from_polar(r, 0.3);
        let v = spec.eval(w).map_err(module)?;
        let d = spec.dbar(w).map_err(module)?;
        let e = if r + h < 1.0 {
            (d - spec.dbar_fd(w, h).map_err(module)?).norm() / d.norm().max(1.0)
        } else {
            0.0
        };
        fd_err = fd_err.max(e);
        range_ok &= (0.0..=1.0).contains(&v);
        monotone &= v <= prev;
        prev = v;
        table.push(vec![json!(r), json!(v), json!(d.norm()), json!(e)]);
    }
    let radial = radial_integral_eval(r1, r2).map_err(module)?;
    let invariance = hyperbolic_invariance(m, &radii).map_err(module)?;
    let verdicts = vec![
        Verdict::holds("profile_in_unit_interval", range_ok),
        Verdict::holds("profile_monotone", monotone),
        Verdict::below("dbar_fd_error", fd_err, 1e-6),
        Verdict::below("hyperbolic_invariance", invariance, 1e-12),
        Verdict::below("radial_integral_error", ((radial.quadrature - radial.closed_form) / radial.closed_form).abs(), 1e-10),
    ];
    let result = json!({
        "spec": spec,
        "x1": spec.x1(),
        "x2": spec.x2(),
        "eta_achieved": spec.eta_achieved(),
        "radial_integral": radial,
        "hyperbolic_invariance": invariance,
    });
    Outcome::new(result, verdicts, Some(table))
}

fn ot_extend(cfg: &OtExtensionConfig, refine: bool) -> CliResult<Outcome> {
    let opt = ot_constant_optimize(&Default::default(), flatlab_core::dbar::LogLogVariant::Difference).map_err(module)?;
    let fine = ot_extension_experiment(cfg).map_err(module)?;
    let ratio = fine.ratio.unwrap_or(f64::NAN);
    let mut verdicts = vec![
        Verdict::below("f_at_zero_error", fine.f_at_zero_error, 1e-6),
        Verdict::at_most("ratio_over_constant", ratio / opt.c, 1.1),
    ];
    let mut table = Table::new(&["nr", "ntheta", "dbar_residual", "f_at_zero_error", "ratio"]);
    let coarse = if refine {
        let c = OtExtensionConfig { nr: cfg.nr / 2, ntheta: cfg.ntheta / 2, ..cfg.clone() };
        let r = ot_extension_experiment(&c).map_err(module)?;
        verdicts.push(Verdict::below("residual_refinement_ratio", fine.dbar_residual / r.dbar_residual, 1.0));
        table.push(vec![json!(r.nr), json!(r.ntheta), json!(r.dbar_residual), json!(r.f_at_zero_error), json!(r.ratio)]);
        Some(r)
    } else {
        None
    };
    table.push(vec![json!(fine.nr), json!(fine.ntheta), json!(fine.dbar_residual), json!(fine.f_at_zero_error), json!(fine.ratio)]);
    let result = json!({ "constant": opt, "extension": fine, "coarse": coarse });
    Outcome::new(result, verdicts, Some(table))
}
