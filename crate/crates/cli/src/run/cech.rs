use flatlab_core::cech::{data, CechComplex, CharacterValue, Scalars, DEFAULT_RANK_TOL};
use flatlab_core::jump::{analyze, JumpOptions};
use flatlab_core::laurent::Cyclo;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{c64, pair, Ctx};
use crate::error::{CliError, CliResult};
use crate::report::{Outcome, Table, Verdict};
use crate::scenario::{CechPayload, CharacterInput, JumpPayload, NamedCharacter, NerveInput};

pub(crate) fn complex(nerve: &NerveInput) -> CliResult<CechComplex> {
    let datum = match nerve {
        NerveInput::Name(name) => data::nerve_by_name(name).ok_or_else(|| {
            let known: Vec<&str> = data::all_nerves().into_iter().map(|(n, _)| n).collect();
            CliError::Schema(format!("unknown nerve `{name}`; shipped nerves are {known:?}"))
        })?,
        NerveInput::Datum(d) => d.clone(),
    };
    datum.validate().map_err(|violations| {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        CliError::module("cech", msgs.join("; "))
    })
}

fn character(input: &CharacterInput, c: &CechComplex, rng: &mut ChaCha8Rng) -> CliResult<CharacterValue> {
    let chi = match input {
        CharacterInput::Named(NamedCharacter::Trivial) => {
            CharacterValue::exact(vec![Cyclo::one(1); c.free_rank()], vec![0; c.torsion_orders().len()])
        }
        CharacterInput::Named(NamedCharacter::Random) => CharacterValue::random(rng, c.free_rank(), c.torsion_orders()),
        CharacterInput::Named(NamedCharacter::RandomRational) => {
            CharacterValue::random_rational(rng, c.free_rank(), c.torsion_orders())
        }
        CharacterInput::Exact { free, torsion } => {
            let free = free
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<BigRational>()
                        .map(|q| Cyclo::from_rational(1, q))
                        .map_err(|_| CliError::Schema(format!("`{s}` is not a rational number")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            CharacterValue::exact(free, torsion.clone())
        }
        CharacterInput::Numeric { free, torsion } => {
            CharacterValue::numeric(free.iter().map(|&p| c64(p)).collect(), torsion.clone())
        }
    };
    chi.validate(c.torsion_orders()).map_err(|e| CliError::module("cech", e))?;
    Ok(chi)
}

fn scalars(chi: &CharacterValue, ctx: &Ctx) -> Scalars {
    match chi {
        CharacterValue::Exact { .. } => Scalars::Exact,
        CharacterValue::Numeric { .. } => Scalars::Numeric { tol: ctx.tol.unwrap_or(DEFAULT_RANK_TOL) },
    }
}

fn alternating(dims: &[usize]) -> i64 {
    dims.iter().enumerate().map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
}

/// Largest entry of `delta^(nu+1) delta^nu` over all degrees.
fn coboundary_square(c: &CechComplex, chi: &CharacterValue) -> CliResult<f64> {
    let chi = chi.to_numeric();
    let mut worst: f64 = 0.0;
    for nu in 0..c.dimension().saturating_sub(1) {
        let a = c.coboundary_numeric(nu, &chi).map_err(|e| CliError::module("cech", e))?;
        let b = c.coboundary_numeric(nu + 1, &chi).map_err(|e| CliError::module("cech", e))?;
        worst = (b * a).iter().map(|z| z.norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

#[derive(Serialize)]
struct CharacterResult {
    label: String,
    character: Vec<[f64; 2]>,
    scalars: &'static str,
    dims: Vec<usize>,
    expected_dims: Option<Vec<usize>>,
}

pub(crate) fn run_cech(p: &CechPayload, ctx: &Ctx) -> CliResult<Outcome> {
    let c = complex(&p.nerve)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let chi_euler = c.euler_characteristic();
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    let mut euler_failures = 0usize;
    let mut square: f64 = 0.0;
    let mut table = Table::new(&["label", "p", "dim", "expected"]);

    let mut cases: Vec<(String, CharacterValue, Option<Vec<usize>>)> = Vec::new();
    for (i, case) in p.characters.iter().enumerate() {
        let label = case.label.clone().unwrap_or_else(|| format!("chi{i}"));
        cases.push((label, character(&case.character, &c, &mut rng)?, case.expected_dims.clone()));
    }
    for i in 0..p.random_characters {
        let named = if i % 2 == 0 { NamedCharacter::RandomRational } else { NamedCharacter::Random };
        cases.push((format!("random{i}"), character(&CharacterInput::Named(named), &c, &mut rng)?, None));
    }

    for (label, chi, expected) in cases {
        let sc = scalars(&chi, ctx);
        let dims = c.cohomology_dims(&chi, sc).map_err(|e| CliError::module("cech", e))?;
        euler_failures += usize::from(alternating(&dims) != chi_euler);
        square = square.max(coboundary_square(&c, &chi)?);
        if let Some(exp) = &expected {
            let mismatch: usize = (0..dims.len().max(exp.len()))
                .map(|q| dims.get(q).copied().unwrap_or(0).abs_diff(exp.get(q).copied().unwrap_or(0)))
                .sum();
            verdicts.push(Verdict::equals(format!("dims.{label}"), mismatch as f64, 0.0));
        }
        if !label.starts_with("random") {
            for (q, &d) in dims.iter().enumerate() {
                let e = expected.as_ref().and_then(|e| e.get(q)).map_or(json!(null), |&e| json!(e));
                table.push(vec![json!(label), json!(q), json!(d), e]);
            }
        }
        results.push(CharacterResult {
            label,
            character: chi.coordinates(c.torsion_orders()).into_iter().map(pair).collect(),
            scalars: if matches!(sc, Scalars::Exact) { "exact" } else { "numeric" },
            dims,
            expected_dims: expected,
        });
    }
    verdicts.insert(0, Verdict::equals("euler_characteristic", euler_failures as f64, 0.0));
    verdicts.insert(1, Verdict::below("coboundary_square", square, 1e-9));

    let result = json!({
        "complex": {
            "counts": c.counts(),
            "free_rank": c.free_rank(),
            "torsion_orders": c.torsion_orders(),
            "euler_characteristic": chi_euler,
        },
        "characters": results,
        "euler_failures": euler_failures,
        "coboundary_square": square,
    });
    Outcome::new(result, verdicts, Some(table))
}

pub(crate) fn run_jump(p: &JumpPayload, ctx: &Ctx) -> CliResult<Outcome> {
    let c = complex(&p.nerve)?;
    if p.degree > c.dimension() {
        return Err(CliError::Schema(format!("degree {} exceeds nerve dimension {}", p.degree, c.dimension())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let reference = character(p.reference.as_ref().unwrap_or(&CharacterInput::Named(NamedCharacter::Trivial)), &c, &mut rng)?;
    let d = JumpOptions::default();
    let o = &p.options;
    let opts = JumpOptions {
        seed: ctx.seed,
        random_samples: o.random_samples.unwrap_or(d.random_samples),
        membership_samples: o.membership_samples.unwrap_or(d.membership_samples),
        max_torsion_order: o.max_torsion_order.unwrap_or(d.max_torsion_order),
        max_candidates: o.max_candidates.unwrap_or(d.max_candidates),
        budget: o.budget.map_or(d.budget, u128::from),
        tol: ctx.tol.unwrap_or(d.tol),
    };
    let rep = analyze(&c, p.degree, &reference, &opts).map_err(|e| CliError::module("jumploci", e))?;

    let mut verdicts = vec![
        Verdict::equals("membership_disagreements", rep.membership_disagreements as f64, 0.0),
        Verdict::holds("zero_set_certified", rep.sampled_zero_set.iter().all(|z| z.certified_exact)),
    ];
    // Generic ranks legitimately differ between torsion components.
    if c.torsion_orders().is_empty() {
        verdicts.push(Verdict::holds("generic_rank_agreement", rep.generic_ranks.iter().all(|g| g.agree)));
    }
    let reference_component = rep.generators.iter().find(|comp| comp.torsion == reference.torsion());
    let names: Vec<String> = reference_component
        .map(|comp| comp.generators.iter().map(|g| g.display.clone()).collect())
        .unwrap_or_default();
    if let Some(expected) = &p.expected_generators {
        verdicts.push(Verdict::holds("generators", &names == expected));
    }
    if let Some(expected) = &p.expected_zero_set_orders {
        let mut orders: Vec<Option<u32>> = rep.torsion_reports.iter().map(|t| t.order).collect();
        orders.sort();
        let want: Vec<Option<u32>> = expected.iter().map(|&o| Some(o)).collect();
        verdicts.push(Verdict::holds("zero_set_orders", orders == want));
    }

    let mut table = Table::new(&["torsion", "generator"]);
    for comp in &rep.generators {
        for g in &comp.generators {
            table.push(vec![json!(format!("{:?}", comp.torsion)), json!(g.display)]);
        }
    }
    let result = json!({ "reference_generators": names, "analysis": rep });
    Outcome::new(result, verdicts, Some(table))
}
