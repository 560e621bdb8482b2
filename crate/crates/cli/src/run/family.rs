use flatlab_core::family::{
    check_identities, curvature_grid, curvature_semipositivity, ChartFamily, CurvatureMode, FamilyMetricSpec,
};
use serde_json::json;

use super::Ctx;
use crate::error::{CliError, CliResult};
use crate::report::{Outcome, Verdict};
use crate::scenario::{FamilyCheck, FamilyPayload};

fn module(e: impl std::fmt::Display) -> CliError {
    CliError::module("family", e)
}

pub(crate) fn run(p: &FamilyPayload, ctx: &Ctx) -> CliResult<Outcome> {
    let mut cfg = p.config.clone();
    if let Some(g) = ctx.grid {
        cfg.z_grid = g;
    }
    let fam = ChartFamily::new(&cfg).map_err(module)?;
    let mut verdicts = Vec::new();
    let mut result = serde_json::Map::new();

    if p.checks.contains(&FamilyCheck::Identities) {
        let r = check_identities(&fam, p.identity_samples, ctx.seed).map_err(module)?;
        let order = r.dbar_tau_ratios.iter().map(|q| q.log2()).fold(f64::INFINITY, f64::min);
        verdicts.extend([
            Verdict::below("line_cocycle", r.line_cocycle, 1e-12),
            Verdict::below("jet_cocycle", r.jet_cocycle, 1e-12),
            Verdict::below("metric_compatibility", r.metric_compatibility, 1e-10),
            Verdict::below("jet_metric_compatibility", r.jet_metric_compatibility, 1e-10),
            Verdict::below("jet_metric_det", r.jet_metric_det, 1e-12),
            Verdict::above("dbar_tau_order", order, 1.9),
            Verdict::below("fiber_curvature", r.fiber_curvature, 1e-6),
        ]);
        result.insert("identities".into(), json!(r));
    }
    if p.checks.contains(&FamilyCheck::Curvature) {
        let spec = FamilyMetricSpec::from_config(&cfg).map_err(module)?;
        let grid = curvature_grid(&fam, cfg.z_grid, cfg.tau_grid, cfg.tau_radius);
        let eta = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::Eta, cfg.step).map_err(module)?;
        let two = curvature_semipositivity(&fam, &spec, &grid, CurvatureMode::TwoEta, cfg.step).map_err(module)?;
        verdicts.push(Verdict::at_least("eta_min_eigenvalue", eta.min_eigenvalue, -1e-4));
        verdicts.push(Verdict::at_least("two_eta_tau_margin", two.tau_margin.unwrap_or(f64::NAN), -1e-4));
        result.insert("curvature_eta".into(), json!(eta));
        result.insert("curvature_two_eta".into(), json!(two));
    }
    result.insert("config".into(), json!(cfg));
    Outcome::new(result, verdicts, None)
}
