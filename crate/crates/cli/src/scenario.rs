use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use flatlab_core::cech::TwistedCechDatum;
use flatlab_core::dbar::{Integrand, LogLogVariant, OtExtensionConfig, OtSearchBox, Phi, WeightSelector};
use flatlab_core::family::FamilyConfig;
use flatlab_core::theta::{LatticePoint, ThetaConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::report::SCHEMA_VERSION;

/// Environment variable naming a directory of scenario files that replaces the
/// built-in catalog.
pub const EXAMPLES_ENV: &str = "FLATLAB_EXAMPLES";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Threshold overrides keyed by verdict name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(flatten)]
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Task {
    Cech(CechPayload),
    Jumploci(JumpPayload),
    Theta(ThetaPayload),
    Family(FamilyPayload),
    Dbar(DbarPayload),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Cech(_) => "cech",
            Task::Jumploci(_) => "jumploci",
            Task::Theta(_) => "theta",
            Task::Family(_) => "family",
            Task::Dbar(_) => "dbar",
        }
    }
}

impl Scenario {
    pub fn parse(origin: &str, text: &str) -> CliResult<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::from_json(origin, e))?;
        let s: Scenario = serde_json::from_value(raw).map_err(|e| CliError::from_json(origin, e))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "{origin}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        Ok(s)
    }
}

// ---- cech / jumploci ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NerveInput {
    Name(String),
    Datum(TwistedCechDatum),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedCharacter {
    Trivial,
    Random,
    RandomRational,
}

/// Free coordinates as rational strings ("2", "-1/3") select exact arithmetic;
/// `[re, im]` pairs select floating point. Torsion entries are residues `k`
/// standing for `exp(2 pi i k / order)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharacterInput {
    Named(NamedCharacter),
    Exact {
        free: Vec<String>,
        #[serde(default)]
        torsion: Vec<u32>,
    },
    Numeric {
        free: Vec<[f64; 2]>,
        #[serde(default)]
        torsion: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterCase {
    #[serde(default)]
    pub label: Option<String>,
    pub character: CharacterInput,
    #[serde(default)]
    pub expected_dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CechPayload {
    pub nerve: NerveInput,
    #[serde(default)]
    pub characters: Vec<CharacterCase>,
    /// Extra random characters (half exact rational, half floating) for the
    /// Euler-characteristic check.
    #[serde(default)]
    pub random_characters: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpOptionsInput {
    #[serde(default)]
    pub random_samples: Option<usize>,
    #[serde(default)]
    pub membership_samples: Option<usize>,
    #[serde(default)]
    pub max_torsion_order: Option<u32>,
    #[serde(default)]
    pub max_candidates: Option<usize>,
    #[serde(default)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPayload {
    pub nerve: NerveInput,
    pub degree: usize,
    #[serde(default)]
    pub reference: Option<CharacterInput>,
    #[serde(default)]
    pub options: JumpOptionsInput,
    #[serde(default)]
    pub expected_generators: Option<Vec<String>>,
    /// Sorted torsion orders of the sampled zero set.
    #[serde(default)]
    pub expected_zero_set_orders: Option<Vec<u32>>,
}

// ---- theta ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaParamsInput {
    /// `standard_1d` or `standard_2d`.
    Name(String),
    Config(ThetaConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleInput {
    pub v1: Vec<[f64; 2]>,
    pub v2: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuotientInput {
    /// One of the shipped quotient cases.
    Name(String),
    Explicit {
        params: ThetaParamsInput,
        numerator: TripleInput,
        denominator: TripleInput,
        #[serde(default)]
        translation: Option<Vec<[f64; 2]>>,
        lattice_points: Vec<LatticePoint>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ThetaPayload {
    Eval {
        params: ThetaParamsInput,
        points: Vec<Vec<[f64; 2]>>,
        #[serde(default)]
        expected: Option<Vec<[f64; 2]>>,
    },
    Quasi {
        #[serde(default = "d_quasi_params")]
        params: ThetaParamsInput,
        #[serde(default = "d_quasi_samples")]
        samples: usize,
    },
    Triple {
        params: ThetaParamsInput,
        triple: TripleInput,
        points: Vec<Vec<[f64; 2]>>,
    },
    Fit {
        quotient: QuotientInput,
        #[serde(default = "d_fit_samples")]
        samples: usize,
    },
    Suite {
        steps: Vec<ThetaPayload>,
    },
}

fn d_quasi_params() -> ThetaParamsInput {
    ThetaParamsInput::Name("standard_1d".into())
}

fn d_quasi_samples() -> usize {
    20
}

fn d_fit_samples() -> usize {
    24
}

// ---- family ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyCheck {
    Identities,
    Curvature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPayload {
    #[serde(default)]
    pub config: FamilyConfig,
    #[serde(default = "d_identity_samples")]
    pub identity_samples: usize,
    #[serde(default = "d_checks")]
    pub checks: Vec<FamilyCheck>,
}

fn d_identity_samples() -> usize {
    20
}

fn d_checks() -> Vec<FamilyCheck> {
    vec![FamilyCheck::Identities, FamilyCheck::Curvature]
}

// ---- dbar ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsInput {
    Constant { re: f64, im: f64 },
    ConjW,
    W,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum DbarPayload {
    Cutoff {
        r1: f64,
        r2: f64,
        m: u32,
        #[serde(default = "d_profile_points")]
        points: usize,
        #[serde(default = "d_fd_step")]
        fd_step: f64,
    },
    Pushforward {
        #[serde(default = "d_integrands")]
        integrands: Vec<Integrand>,
        #[serde(default = "d_ms")]
        m: Vec<u32>,
        a: f64,
        b: f64,
    },
    Solve {
        #[serde(default = "d_solve_rho_min")]
        rho_min: f64,
        #[serde(default = "d_rho_max")]
        rho_max: f64,
        #[serde(default = "d_solve_n")]
        n: usize,
        #[serde(default = "d_phi")]
        phi: Phi,
        #[serde(default = "d_weight")]
        weight: WeightSelector,
        #[serde(default = "d_rhs")]
        rhs: RhsInput,
        #[serde(default)]
        pin_origin: bool,
    },
    OtConstant {
        #[serde(default)]
        r1: Option<f64>,
        #[serde(default)]
        r2: Option<f64>,
        #[serde(default = "d_variant")]
        variant: LogLogVariant,
        #[serde(default)]
        search: OtSearchBox,
    },
    OtExtend {
        #[serde(default)]
        config: OtExtensionConfig,
        /// Also solve on the half-resolution grid to observe the residual decay.
        #[serde(default = "d_true")]
        refine: bool,
    },
    Curvature {
        #[serde(default = "d_curv_eps")]
        eps: f64,
        #[serde(default = "d_samples")]
        samples: usize,
        #[serde(default = "d_curv_lo")]
        lo: f64,
        #[serde(default = "d_curv_hi")]
        hi: f64,
        #[serde(default = "d_step")]
        step: f64,
    },
    TwoWeight {
        #[serde(default = "d_tw_eps")]
        eps: Vec<f64>,
        #[serde(default = "d_samples")]
        samples: usize,
        #[serde(default = "d_curv_lo")]
        lo: f64,
        #[serde(default = "d_tw_hi")]
        hi: f64,
        #[serde(default = "d_phi")]
        phi: Phi,
        #[serde(default = "d_step")]
        step: f64,
    },
    Suite {
        steps: Vec<DbarPayload>,
    },
}

fn d_profile_points() -> usize {
    64
}
fn d_fd_step() -> f64 {
    1e-6
}
fn d_integrands() -> Vec<Integrand> {
    vec![Integrand::One]
}
fn d_ms() -> Vec<u32> {
    vec![1, 2, 3]
}
fn d_solve_rho_min() -> f64 {
    1e-2
}
fn d_rho_max() -> f64 {
    1.0
}
fn d_solve_n() -> usize {
    64
}
fn d_phi() -> Phi {
    Phi::Quadratic { c: 1.0 }
}
fn d_weight() -> WeightSelector {
    WeightSelector::Plain
}
fn d_rhs() -> RhsInput {
    RhsInput::ConjW
}
fn d_variant() -> LogLogVariant {
    LogLogVariant::Difference
}
fn d_true() -> bool {
    true
}
fn d_curv_eps() -> f64 {
    0.5
}
fn d_samples() -> usize {
    50
}
fn d_curv_lo() -> f64 {
    0.05
}
fn d_curv_hi() -> f64 {
    0.5
}
fn d_tw_hi() -> f64 {
    0.7
}
fn d_tw_eps() -> Vec<f64> {
    vec![0.1, 0.2, 0.3]
}
fn d_step() -> f64 {
    1e-3
}

// ---- catalog ----

const BUILTIN: &[(&str, &str)] = &[
    ("circle3_jump.json", include_str!("../../../scenarios/circle3_jump.json")),
    ("dbar_disk.json", include_str!("../../../scenarios/dbar_disk.json")),
    ("dbar_ot.json", include_str!("../../../scenarios/dbar_ot.json")),
    ("elliptic_family.json", include_str!("../../../scenarios/elliptic_family.json")),
    ("genus2_cech.json", include_str!("../../../scenarios/genus2_cech.json")),
    ("rp2_jump.json", include_str!("../../../scenarios/rp2_jump.json")),
    ("theta_l1.json", include_str!("../../../scenarios/theta_l1.json")),
    ("theta_l2.json", include_str!("../../../scenarios/theta_l2.json")),
    ("torus9_cech.json", include_str!("../../../scenarios/torus9_cech.json")),
    ("wedge2_jump.json", include_str!("../../../scenarios/wedge2_jump.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub file: String,
    pub kind: String,
    pub description: String,
}

/// Scenario sources as `(file name, contents)`: the directory named by
/// `FLATLAB_EXAMPLES` when set, the embedded corpus otherwise.
pub fn example_sources() -> CliResult<Vec<(String, String)>> {
    match std::env::var_os(EXAMPLES_ENV) {
        Some(dir) => read_dir_sources(Path::new(&dir)),
        None => Ok(BUILTIN.iter().map(|(f, s)| (f.to_string(), s.to_string())).collect()),
    }
}

fn read_dir_sources(dir: &Path) -> CliResult<Vec<(String, String)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Parse(format!("{EXAMPLES_ENV}={}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::Io(e.to_string()))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            out.push((file, text));
        }
    }
    out.sort();
    Ok(out)
}

/// Deterministic catalog sorted by scenario name.
pub fn list_examples() -> CliResult<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    for (file, text) in example_sources()? {
        let s = Scenario::parse(&file, &text)?;
        out.push(CatalogEntry { name: s.name, kind: s.task.kind().to_string(), description: s.description, file });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.file.cmp(&b.file)));
    Ok(out)
}

/// Loads a scenario from a path; when the path does not exist, falls back to
/// the example corpus by file name or catalog name.
pub fn load(arg: &str) -> CliResult<(String, Scenario)> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{arg}: {e}")))?;
        return Ok((arg.to_string(), Scenario::parse(arg, &text)?));
    }
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    for (f, text) in example_sources()? {
        if f == file {
            return Ok((f.clone(), Scenario::parse(&f, &text)?));
        }
        let s = Scenario::parse(&f, &text)?;
        if s.name == arg {
            return Ok((f, s));
        }
    }
    Err(CliError::Parse(format!("{arg}: no such file or example")))
}
