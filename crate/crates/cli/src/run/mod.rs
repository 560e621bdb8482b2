use flatlab_core::jump::DEFAULT_SEED;

use crate::error::CliResult;
use crate::report::{Outcome, Provenance, Report, Verdict, Versions, SCHEMA_VERSION, TOOL};
use crate::scenario::{Scenario, Task};

mod cech;
mod dbar;
mod family;
mod theta;

/// Command-line settings layered over a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Numeric tolerance handed to the computation (rank and membership
    /// tolerance, solver tolerance, theta truncation target).
    pub tol: Option<f64>,
    /// Grid resolution (polar grid side for dbar solves, chart grid for the family).
    pub grid: Option<usize>,
}

pub(crate) struct Ctx {
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
}

pub fn execute(mut scenario: Scenario, ov: &Overrides) -> CliResult<Report> {
    let seed = ov.seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);
    scenario.seed = Some(seed);
    let ctx = Ctx { seed, tol: ov.tol, grid: ov.grid };
    let mut outcome = match &scenario.task {
        Task::Cech(p) => cech::run_cech(p, &ctx)?,
        Task::Jumploci(p) => cech::run_jump(p, &ctx)?,
        Task::Theta(p) => theta::run(p, &ctx)?,
        Task::Family(p) => family::run(p, &ctx)?,
        Task::Dbar(p) => dbar::run(p, &ctx)?,
    };
    outcome.apply_tolerances(&scenario.tolerances)?;
    let pass = outcome.verdicts.iter().all(|v| v.pass);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        tool: TOOL.to_string(),
        scenario,
        provenance: Provenance {
            versions: Versions {
                flatlab: env!("CARGO_PKG_VERSION").to_string(),
                flatlab_core: flatlab_core::VERSION.to_string(),
            },
            seed,
            tol: ov.tol,
            grid: ov.grid,
        },
        result: outcome.result,
        verdicts: outcome.verdicts,
        table: outcome.table,
        pass,
    })
}

/// Runs suite steps and merges them; verdict names get a `<index>.<op>` prefix.
pub(crate) fn merge_steps(steps: Vec<(String, Outcome)>) -> CliResult<Outcome> {
    let mut results = Vec::new();
    let mut verdicts: Vec<Verdict> = Vec::new();
    let single_table = steps.len() == 1;
    let mut table = None;
    for (i, (op, o)) in steps.into_iter().enumerate() {
        let prefix = format!("{i}.{op}");
        verdicts.extend(o.verdicts.into_iter().map(|v| v.prefixed(&prefix)));
        if single_table {
            table = o.table;
        }
        results.push(serde_json::json!({ "op": op, "result": o.result }));
    }
    Outcome::new(results, verdicts, table)
}

pub(crate) fn c64(p: [f64; 2]) -> num_complex::Complex64 {
    num_complex::Complex64::new(p[0], p[1])
}

pub(crate) fn pair(z: num_complex::Complex64) -> [f64; 2] {
    [z.re, z.im]
}
