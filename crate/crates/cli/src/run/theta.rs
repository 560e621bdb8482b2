use flatlab_core::theta::{
    shipped_quotients, transition_ratio_fit, LatticePoint, ThetaParams, ThetaQuotient, ThetaTriple,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{c64, merge_steps, pair, Ctx};
use crate::error::{CliError, CliResult};
use crate::report::{Outcome, Table, Verdict};
use crate::scenario::{QuotientInput, ThetaParamsInput, ThetaPayload, TripleInput};

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::module("theta", e)
}

fn params(input: &ThetaParamsInput, ctx: &Ctx) -> CliResult<ThetaParams> {
    let p = match input {
        ThetaParamsInput::Name(n) if n == "standard_1d" => ThetaParams::standard_1d(),
        ThetaParamsInput::Name(n) if n == "standard_2d" => ThetaParams::standard_2d(),
        ThetaParamsInput::Name(n) => {
            return Err(CliError::Schema(format!("unknown theta parameters `{n}` (standard_1d, standard_2d)")))
        }
        ThetaParamsInput::Config(cfg) => ThetaParams::from_config(cfg).map_err(module)?,
    };
    Ok(match ctx.tol {
        Some(t) => p.with_eps(t),
        None => p,
    })
}

fn point(p: &ThetaParams, raw: &[[f64; 2]]) -> CliResult<Vec<Complex64>> {
    if raw.len() != p.dim() {
        return Err(CliError::Schema(format!("point has {} coordinates, parameters have dimension {}", raw.len(), p.dim())));
    }
    Ok(raw.iter().map(|&z| c64(z)).collect())
}

fn triple(t: &TripleInput) -> ThetaTriple {
    ThetaTriple::new(t.v1.iter().map(|&z| c64(z)).collect(), t.v2.iter().map(|&z| c64(z)).collect())
}

fn quotient(input: &QuotientInput, ctx: &Ctx) -> CliResult<(String, ThetaParams, ThetaQuotient, Vec<LatticePoint>)> {
    match input {
        QuotientInput::Name(n) => {
            let cases = shipped_quotients();
            let known: Vec<&str> = cases.iter().map(|c| c.name).collect();
            let case = cases
                .iter()
                .find(|c| c.name == n)
                .ok_or_else(|| CliError::Schema(format!("unknown quotient `{n}`; shipped cases are {known:?}")))?;
            let p = match ctx.tol {
                Some(t) => case.params.with_eps(t),
                None => case.params.clone(),
            };
            Ok((n.clone(), p, case.quotient.clone(), case.lattice_points.clone()))
        }
        QuotientInput::Explicit { params: pi, numerator, denominator, translation, lattice_points } => {
            let p = params(pi, ctx)?;
            let translation = match translation {
                Some(t) => point(&p, t)?,
                None => vec![Complex64::new(0.0, 0.0); p.dim()],
            };
            let q = ThetaQuotient { numerator: triple(numerator), denominator: triple(denominator), translation };
            Ok(("explicit".into(), p, q, lattice_points.clone()))
        }
    }
}

fn op_name(p: &ThetaPayload) -> &'static str {
    match p {
        ThetaPayload::Eval { .. } => "eval",
        ThetaPayload::Quasi { .. } => "quasi",
        ThetaPayload::Triple { .. } => "triple",
        ThetaPayload::Fit { .. } => "fit",
        ThetaPayload::Suite { .. } => "suite",
    }
}

pub(crate) fn run(payload: &ThetaPayload, ctx: &Ctx) -> CliResult<Outcome> {
    match payload {
        ThetaPayload::Eval { params: pi, points, expected } => {
            let p = params(pi, ctx)?;
            let mut values = Vec::new();
            let mut table = Table::new(&["index", "re", "im"]);
            for (i, raw) in points.iter().enumerate() {
                let v = p.theta(&point(&p, raw)?).map_err(module)?;
                table.push(vec![json!(i), json!(v.re), json!(v.im)]);
                values.push(v);
            }
            let mut verdicts = Vec::new();
            if let Some(exp) = expected {
                if exp.len() != values.len() {
                    return Err(CliError::Schema(format!("{} expected values for {} points", exp.len(), values.len())));
                }
                let err = values.iter().zip(exp).map(|(v, &e)| (v - c64(e)).norm()).fold(0.0, f64::max);
                verdicts.push(Verdict::below("value_error", err, 1e-12));
            }
            let result = json!({ "values": values.iter().map(|&v| pair(v)).collect::<Vec<_>>() });
            Outcome::new(result, verdicts, Some(table))
        }
        ThetaPayload::Quasi { params: pi, samples } => {
            let p = params(pi, ctx)?;
            let l = p.dim();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let mut worst_q: f64 = 0.0;
            let mut worst_even: f64 = 0.0;
            let mut table = Table::new(&["index", "lattice_p", "lattice_q", "normalized_residual", "evenness"]);
            for i in 0..*samples {
                let zeta: Vec<Complex64> =
                    (0..l).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                let lp = LatticePoint::new(
                    (0..l).map(|_| rng.random_range(-2..=2)).collect(),
                    (0..l).map(|_| rng.random_range(-2..=2)).collect(),
                );
                let r = p.quasi_periodicity(&zeta, &lp).map_err(module)?;
                let neg: Vec<Complex64> = zeta.iter().map(|z| -z).collect();
                let a = p.theta(&zeta).map_err(module)?;
                let b = p.theta(&neg).map_err(module)?;
                let even = (a - b).norm() / a.norm().max(1.0);
                worst_q = worst_q.max(r.normalized);
                worst_even = worst_even.max(even);
                table.push(vec![json!(i), json!(format!("{:?}", lp.p)), json!(format!("{:?}", lp.q)), json!(r.normalized), json!(even)]);
            }
            let verdicts = vec![
                Verdict::below("quasi_periodicity", worst_q, 1e-10),
                Verdict::below("evenness", worst_even, 1e-12),
            ];
            let result = json!({ "samples": samples, "max_quasi_residual": worst_q, "max_evenness_residual": worst_even });
            Outcome::new(result, verdicts, Some(table))
        }
        ThetaPayload::Triple { params: pi, triple: t, points } => {
            let p = params(pi, ctx)?;
            let tr = triple(t);
            let mut values = Vec::new();
            let mut table = Table::new(&["index", "re", "im"]);
            for (i, raw) in points.iter().enumerate() {
                let v = tr.eval(&p, &point(&p, raw)?).map_err(module)?;
                table.push(vec![json!(i), json!(v.re), json!(v.im)]);
                values.push(pair(v));
            }
            Outcome::new(json!({ "values": values }), Vec::new(), Some(table))
        }
        ThetaPayload::Fit { quotient: qi, samples } => {
            let (name, p, q, points) = quotient(qi, ctx)?;
            let mut fits = Vec::new();
            let mut worst: f64 = 0.0;
            let mut worst_one: Option<f64> = None;
            let mut table = Table::new(&["lattice_p", "lattice_q", "residual", "constant_re", "constant_im"]);
            for lp in &points {
                let fit = transition_ratio_fit(&p, &q, lp, *samples, ctx.seed).map_err(module)?;
                worst = worst.max(fit.residual);
                if lp.q.iter().all(|&x| x == 0) {
                    let c = c64(fit.constant).norm();
                    let b = fit.linear.iter().map(|&b| c64(b).norm()).fold(0.0, f64::max);
                    worst_one = Some(worst_one.unwrap_or(0.0).max(c.max(b).max(fit.residual)));
                }
                table.push(vec![
                    json!(format!("{:?}", lp.p)),
                    json!(format!("{:?}", lp.q)),
                    json!(fit.residual),
                    json!(fit.constant[0]),
                    json!(fit.constant[1]),
                ]);
                fits.push(json!({ "lattice_point": lp, "fit": fit }));
            }
            let mut verdicts = vec![Verdict::below("affine_residual", worst, 1e-8)];
            if let Some(w) = worst_one {
                verdicts.push(Verdict::below("integer_ratio", w, 1e-10));
            }
            Outcome::new(json!({ "quotient": name, "fits": fits }), verdicts, Some(table))
        }
        ThetaPayload::Suite { steps } => {
            let outcomes = steps
                .iter()
                .map(|s| Ok((op_name(s).to_string(), run(s, ctx)?)))
                .collect::<CliResult<Vec<_>>>()?;
            merge_steps(outcomes)
        }
    }
}
