//! Command implementations behind the `deltahomog` binary: dump root
//! systems, run condition suites on a space, and produce the phase table of
//! the SO(5)/U(2) metric family.
//!
//! Exit codes: 0 all requested checks hold, 1 at least one fails, 2
//! malformed arguments or configuration, 3 (with --strict) when the only
//! positive evidence is an oracle "plausible".

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compact_lie::SoAlgebra;
use crate::delta_conditions::{ncdo_check, param_range_check, t31_9n_check, CheckTolerances};
use crate::homogeneous_metric::{
    geodesic_completion, is_geodesic_vector, load_space, MetricParams, ReductiveSplit, SpaceFile,
};
use crate::orbit_oracle::{is_delta_vector_numeric, DeltaVerdict, OracleBudget};
use crate::root_systems::{build_bracket_table, build_root_system, to_doc, Family};
use crate::so5::{build_so5_u2, candidate_w, verify_delta_vector_spectral, verify_theorem_main};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PLAUSIBLE_ONLY: i32 = 3;

/// Known condition suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckId {
    Range,
    T319n,
    Ncdo,
    Geodesic,
    Delta,
}

impl CheckId {
    pub fn parse(s: &str) -> Option<CheckId> {
        match s {
            "range" | "param_range" => Some(CheckId::Range),
            "t31_9n" | "t31.9n" => Some(CheckId::T319n),
            "ncdo" => Some(CheckId::Ncdo),
            "geodesic" => Some(CheckId::Geodesic),
            "delta" => Some(CheckId::Delta),
            _ => None,
        }
    }

    pub fn all() -> Vec<CheckId> {
        vec![
            CheckId::Range,
            CheckId::T319n,
            CheckId::Ncdo,
            CheckId::Geodesic,
            CheckId::Delta,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Plausible,
    Fails,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub outcome: Outcome,
    pub worst_residual: f64,
    pub note: String,
    /// Refuting group element, as a row-major matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub space: String,
    pub x1: f64,
    pub x2: f64,
    pub seed: u64,
    pub strict: bool,
    pub results: Vec<CheckResult>,
    pub exit_code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "json" => Some(OutputFormat::Json),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }
}

/// Optional JSON configuration file.
#[derive(Clone, Copy, Debug, Default, Deserialize)]
pub struct FileConfig {
    #[serde(rename = "oracle.restarts")]
    pub restarts: Option<u32>,
    #[serde(rename = "oracle.steps")]
    pub steps: Option<u32>,
    #[serde(rename = "oracle.seed")]
    pub seed: Option<u64>,
}

/// Budget resolution order: defaults, then config file, then the
/// DELTAHOMOG_SEED environment variable, then explicit flags.
pub fn resolve_budget(
    config: Option<&FileConfig>,
    restarts: Option<u32>,
    steps: Option<u32>,
    seed: Option<u64>,
) -> OracleBudget {
    let mut budget = OracleBudget::default();
    if let Some(cfg) = config {
        if let Some(r) = cfg.restarts {
            budget.restarts = r;
        }
        if let Some(s) = cfg.steps {
            budget.steps_per_restart = s;
        }
        if let Some(s) = cfg.seed {
            budget.seed = s;
        }
    }
    if let Ok(env_seed) = std::env::var("DELTAHOMOG_SEED") {
        if let Ok(s) = env_seed.parse::<u64>() {
            budget.seed = s;
        }
    }
    if let Some(r) = restarts {
        budget.restarts = r;
    }
    if let Some(s) = steps {
        budget.steps_per_restart = s;
    }
    if let Some(s) = seed {
        budget.seed = s;
    }
    budget
}

pub fn load_config(path: &Path) -> Result<FileConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {path:?}: {e}"))
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {path:?}: {e}")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// `roots FAMILY RANK`: dump the root system and bracket table as JSON.
pub fn cmd_roots(family: &str, rank: usize, out: Option<&PathBuf>) -> i32 {
    let Some(family) = Family::parse(family) else {
        eprintln!("unknown family '{family}' (expected A, B, C, D, G2 or F4)");
        return EXIT_USAGE;
    };
    let rs = match build_root_system(family, rank) {
        Ok(rs) => rs,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let table = match build_bracket_table(&rs) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_FAIL;
        }
    };
    let doc = to_doc(&table);
    let json = serde_json::to_string_pretty(&doc).expect("serializable document");
    match write_output(out, &json) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
    }
}

/// Resolved target of a `check` run.
enum SpaceHandle {
    So5U2,
    Custom(Box<ReductiveSplit<SoAlgebra>>),
}

pub struct RunConfig {
    pub space: String,
    pub params: MetricParams,
    pub checks: Vec<CheckId>,
    pub oracle: OracleBudget,
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

fn random_p_vector<R: Rng>(split: &ReductiveSplit<SoAlgebra>, rng: &mut R) -> DVector<f64> {
    let mut v = DVector::zeros(split.algebra.dim());
    for b in split.basis_p() {
        v += b * rng.gen_range(-1.0f64..1.0);
    }
    v
}

/// `check SPACE --x1 --x2 ...`: run the requested condition suites.
pub fn cmd_check(config: &RunConfig) -> i32 {
    if config.checks.is_empty() {
        eprintln!("no checks requested (use --all or --checks ...)");
        return EXIT_USAGE;
    }
    let handle = if config.space == "so5_u2" {
        SpaceHandle::So5U2
    } else {
        let text = match fs::read_to_string(&config.space) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read space file '{}': {e}", config.space);
                return EXIT_USAGE;
            }
        };
        let file: SpaceFile = match serde_json::from_str(&text) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("bad space file '{}': {e}", config.space);
                return EXIT_USAGE;
            }
        };
        match load_space(&file) {
            Ok(split) => SpaceHandle::Custom(Box::new(split)),
            Err(e) => {
                eprintln!("bad space '{}': {e}", config.space);
                return EXIT_USAGE;
            }
        }
    };
    let split = match &handle {
        SpaceHandle::So5U2 => match build_so5_u2(config.params) {
            Ok(space) => space.split,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_FAIL;
            }
        },
        SpaceHandle::Custom(split) => (**split).clone(),
    };
    let builtin = matches!(handle, SpaceHandle::So5U2);

    let params = &config.params;
    let tol = CheckTolerances::default();
    let mut results = Vec::new();
    for check in &config.checks {
        let result = match check {
            CheckId::Range => run_range(params, &tol),
            CheckId::T319n => run_t31_9n(&split, params, &tol, config.oracle.seed),
            CheckId::Ncdo => run_ncdo(&split, params, &tol, builtin, config.oracle.seed),
            CheckId::Geodesic => run_geodesic(&split, params, config.oracle.seed),
            CheckId::Delta => run_delta(&split, params, builtin, &config.oracle),
        };
        results.push(result);
    }

    let exit_code = if results.iter().any(|r| r.outcome == Outcome::Fails) {
        EXIT_FAIL
    } else if config.strict && results.iter().any(|r| r.outcome == Outcome::Plausible) {
        EXIT_PLAUSIBLE_ONLY
    } else {
        EXIT_OK
    };
    let report = CheckReport {
        space: config.space.clone(),
        x1: params.x1,
        x2: params.x2,
        seed: config.oracle.seed,
        strict: config.strict,
        results,
        exit_code,
    };
    let text = match config.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report).expect("serializable"),
        OutputFormat::Csv => {
            let mut s = String::from("id,outcome,worst_residual\n");
            for r in &report.results {
                s.push_str(&format!(
                    "{},{},{:e}\n",
                    r.id,
                    match r.outcome {
                        Outcome::Holds => "holds",
                        Outcome::Plausible => "plausible",
                        Outcome::Fails => "fails",
                    },
                    r.worst_residual
                ));
            }
            s
        }
    };
    if let Err(e) = write_output(config.out.as_ref(), &text) {
        eprintln!("{e}");
        return EXIT_USAGE;
    }
    exit_code
}

/// The phase condition x1 <= x2 <= 2 x1 (normal cases included).
fn run_range(params: &MetricParams, tol: &CheckTolerances) -> CheckResult {
    let range = param_range_check(params, tol);
    let normal = params.near_equal();
    let holds = normal || range.holds;
    CheckResult {
        id: "range".into(),
        outcome: if holds {
            Outcome::Holds
        } else {
            Outcome::Fails
        },
        worst_residual: range.worst_residual,
        note: if normal {
            "normal metric (x1 = x2)".into()
        } else {
            "x1 < x2 <= 2 x1".into()
        },
        witness: None,
    }
}

fn run_t31_9n(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    tol: &CheckTolerances,
    seed: u64,
) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7431);
    let mut pairs: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    for x in &split.basis_p1 {
        for y in &split.basis_p2 {
            pairs.push((x.clone(), y.clone()));
        }
    }
    for _ in 0..16 {
        let x = split
            .basis_p1
            .iter()
            .fold(DVector::zeros(split.algebra.dim()), |acc, b| {
                acc + b * rng.gen_range(-1.0f64..1.0)
            });
        let y = split
            .basis_p2
            .iter()
            .fold(DVector::zeros(split.algebra.dim()), |acc, b| {
                acc + b * rng.gen_range(-1.0f64..1.0)
            });
        pairs.push((x, y));
    }
    for (x, y) in &pairs {
        match t31_9n_check(split, params, x, y, tol) {
            Ok(rep) => {
                worst = worst.max(rep.worst_residual);
                all &= rep.holds;
            }
            Err(e) => {
                return CheckResult {
                    id: "t31_9n".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::NAN,
                    note: e.to_string(),
                    witness: None,
                }
            }
        }
    }
    CheckResult {
        id: "t31_9n".into(),
        outcome: if all { Outcome::Holds } else { Outcome::Fails },
        worst_residual: worst,
        note: format!("{} (X, Y) pairs", pairs.len()),
        witness: None,
    }
}

fn run_ncdo(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    tol: &CheckTolerances,
    builtin: bool,
    seed: u64,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e63);
    let mut vs: Vec<DVector<f64>> = Vec::new();
    if builtin {
        for (b, c) in [(1.0, 1.0), (1.0, -1.0), (0.5, 2.0)] {
            let w = candidate_w(b, c, params);
            vs.push(
                split
                    .project(&w, crate::homogeneous_metric::Component::P)
                    .unwrap(),
            );
        }
    }
    for _ in 0..3 {
        vs.push(random_p_vector(split, &mut rng));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for v in &vs {
        let family = match geodesic_completion(split, params, v) {
            Ok(Some(f)) => f,
            Ok(None) => {
                return CheckResult {
                    id: "ncdo".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::INFINITY,
                    note: "a p-vector admits no geodesic completion".into(),
                    witness: None,
                }
            }
            Err(e) => {
                return CheckResult {
                    id: "ncdo".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::NAN,
                    note: e.to_string(),
                    witness: None,
                }
            }
        };
        match ncdo_check(split, params, v, &family.particular, None, tol) {
            Ok(rep) => {
                worst = worst
                    .max(rep.rav2.worst_residual)
                    .max(rep.rav3.worst_residual);
                all &= rep.rav2.holds && rep.rav3.holds;
            }
            Err(e) => {
                return CheckResult {
                    id: "ncdo".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::NAN,
                    note: e.to_string(),
                    witness: None,
                }
            }
        }
    }
    CheckResult {
        id: "ncdo".into(),
        outcome: if all { Outcome::Holds } else { Outcome::Fails },
        worst_residual: worst,
        note: format!(
            "{} completed vectors, basis + 64 random directions",
            vs.len()
        ),
        witness: None,
    }
}

fn run_geodesic(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    seed: u64,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x67656f);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v = random_p_vector(split, &mut rng);
        match geodesic_completion(split, params, &v) {
            Ok(Some(family)) => {
                let w = &v + &family.particular;
                let (_, res) = is_geodesic_vector(split, params, &w);
                worst = worst.max(res);
            }
            Ok(None) => {
                return CheckResult {
                    id: "geodesic".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::INFINITY,
                    note: "no geodesic completion".into(),
                    witness: None,
                }
            }
            Err(e) => {
                return CheckResult {
                    id: "geodesic".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::NAN,
                    note: e.to_string(),
                    witness: None,
                }
            }
        }
    }
    CheckResult {
        id: "geodesic".into(),
        outcome: if worst <= 1e-10 {
            Outcome::Holds
        } else {
            Outcome::Fails
        },
        worst_residual: worst,
        note: "10 random completions".into(),
        witness: None,
    }
}

fn run_delta(
    split: &ReductiveSplit<SoAlgebra>,
    params: &MetricParams,
    builtin: bool,
    budget: &OracleBudget,
) -> CheckResult {
    let ratio = params.ratio();
    if builtin {
        let boundary_tol = 1e-9;
        if (ratio - 1.0).abs() <= boundary_tol {
            return CheckResult {
                id: "delta".into(),
                outcome: Outcome::Holds,
                worst_residual: 0.0,
                note: "normal metric (SO(5))".into(),
                witness: None,
            };
        }
        if (ratio - 2.0).abs() <= 2.0 * boundary_tol {
            return CheckResult {
                id: "delta".into(),
                outcome: Outcome::Holds,
                worst_residual: 0.0,
                note: "normal metric (SO(6))".into(),
                witness: None,
            };
        }
        if ratio > 1.0 && ratio < 2.0 {
            let space = crate::so5::So5Space {
                split: split.clone(),
                params: *params,
            };
            let mut worst = f64::NEG_INFINITY;
            let mut confirmed = true;
            for (b, c) in crate::so5::default_grid() {
                match verify_delta_vector_spectral(&space, b, c) {
                    Ok(cert) => {
                        confirmed &= cert.verdict == DeltaVerdict::Confirmed;
                        worst = worst.max(cert.excess);
                    }
                    Err(e) => {
                        return CheckResult {
                            id: "delta".into(),
                            outcome: Outcome::Fails,
                            worst_residual: f64::NAN,
                            note: e.to_string(),
                            witness: None,
                        }
                    }
                }
            }
            return CheckResult {
                id: "delta".into(),
                outcome: if confirmed {
                    Outcome::Holds
                } else {
                    Outcome::Fails
                },
                worst_residual: worst,
                note: "spectral certification over the (b, c) grid".into(),
                witness: None,
            };
        }
        // outside [1, 2]: refute with the oracle witness
        let w = crate::so5::refutation_candidate(params);
        return match is_delta_vector_numeric(split, params, &w, budget) {
            Ok(cert) => CheckResult {
                id: "delta".into(),
                outcome: Outcome::Fails,
                worst_residual: cert.excess,
                note: match cert.verdict {
                    DeltaVerdict::Refuted => {
                        "parameter range violated; oracle found a witness".into()
                    }
                    _ => "parameter range violated".into(),
                },
                witness: cert
                    .witness
                    .map(|g| crate::compact_lie::matrix_rows(&g.entries)),
            },
            Err(e) => CheckResult {
                id: "delta".into(),
                outcome: Outcome::Fails,
                worst_residual: f64::NAN,
                note: e.to_string(),
                witness: None,
            },
        };
    }
    // custom space: oracle evidence only
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ 0x64656c);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let v = random_p_vector(split, &mut rng);
        let w = match geodesic_completion(split, params, &v) {
            Ok(Some(f)) => &v + &f.particular,
            _ => {
                return CheckResult {
                    id: "delta".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::INFINITY,
                    note: "no geodesic completion".into(),
                    witness: None,
                }
            }
        };
        match is_delta_vector_numeric(split, params, &w, budget) {
            Ok(cert) => {
                worst = worst.max(cert.excess);
                if cert.verdict == DeltaVerdict::Refuted {
                    return CheckResult {
                        id: "delta".into(),
                        outcome: Outcome::Fails,
                        worst_residual: cert.excess,
                        note: "oracle refuted a completed vector".into(),
                        witness: cert
                            .witness
                            .map(|g| crate::compact_lie::matrix_rows(&g.entries)),
                    };
                }
            }
            Err(e) => {
                return CheckResult {
                    id: "delta".into(),
                    outcome: Outcome::Fails,
                    worst_residual: f64::NAN,
                    note: e.to_string(),
                    witness: None,
                }
            }
        }
    }
    CheckResult {
        id: "delta".into(),
        outcome: Outcome::Plausible,
        worst_residual: worst,
        note: "oracle searched 5 completed vectors without refutation".into(),
        witness: None,
    }
}

#[derive(Clone, Debug, Serialize)]
struct PhaseReport {
    ratio_min: f64,
    ratio_max: f64,
    steps: usize,
    seed: u64,
    rows: Vec<crate::so5::PhaseRow>,
}

/// `phase MIN MAX STEPS`: delta-homogeneity verdict per sampled ratio.
pub fn cmd_phase(
    ratio_min: f64,
    ratio_max: f64,
    steps: usize,
    budget: &OracleBudget,
    out: Option<&PathBuf>,
    format: OutputFormat,
) -> i32 {
    if ratio_min <= 0.0 || ratio_min.is_nan() || ratio_max < ratio_min || steps == 0 {
        eprintln!("bad range: need 0 < MIN <= MAX and STEPS >= 1");
        return EXIT_USAGE;
    }
    let ratios: Vec<f64> = if steps == 1 {
        vec![ratio_min]
    } else {
        (0..steps)
            .map(|i| ratio_min + (ratio_max - ratio_min) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let rows = match verify_theorem_main(&ratios, budget) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_FAIL;
        }
    };
    let text = match format {
        OutputFormat::Json => {
            let report = PhaseReport {
                ratio_min,
                ratio_max,
                steps,
                seed: budget.seed,
                rows,
            };
            serde_json::to_string_pretty(&report).expect("serializable")
        }
        OutputFormat::Csv => {
            let mut s = String::from("ratio,verdict,method,worst_excess,runtime_ms\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{:e},{}\n",
                    r.ratio, r.delta_homogeneous, r.method, r.worst_excess, r.runtime_ms
                ));
            }
            s
        }
    };
    if let Err(e) = write_output(out, &text) {
        eprintln!("{e}");
        return EXIT_USAGE;
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_ids_parse() {
        assert_eq!(CheckId::parse("range"), Some(CheckId::Range));
        assert_eq!(CheckId::parse("t31_9n"), Some(CheckId::T319n));
        assert_eq!(CheckId::parse("nonsense"), None);
        assert_eq!(CheckId::all().len(), 5);
    }

    #[test]
    fn budget_resolution_order() {
        let cfg = FileConfig {
            restarts: Some(5),
            steps: Some(50),
            seed: Some(99),
        };
        let b = resolve_budget(Some(&cfg), None, None, None);
        assert_eq!(b.restarts, 5);
        assert_eq!(b.steps_per_restart, 50);
        assert_eq!(b.seed, 99);
        // explicit flags win
        let b = resolve_budget(Some(&cfg), Some(7), None, Some(1));
        assert_eq!(b.restarts, 7);
        assert_eq!(b.seed, 1);
    }

    #[test]
    fn config_file_parses_dotted_keys() {
        let cfg: FileConfig =
            serde_json::from_str(r#"{"oracle.restarts": 3, "oracle.seed": 17}"#).unwrap();
        assert_eq!(cfg.restarts, Some(3));
        assert_eq!(cfg.seed, Some(17));
        assert_eq!(cfg.steps, None);
    }

    #[test]
    fn check_run_on_builtin_space_holds_inside_the_range() {
        let config = RunConfig {
            space: "so5_u2".into(),
            params: MetricParams::new(1.0, 1.5).unwrap(),
            checks: CheckId::all(),
            oracle: OracleBudget {
                restarts: 6,
                steps_per_restart: 100,
                step_size: 0.1,
                seed: 2,
            },
            strict: true,
            out: Some(std::env::temp_dir().join("deltahomog_check_test.json")),
            format: OutputFormat::Json,
        };
        assert_eq!(cmd_check(&config), EXIT_OK);
    }

    #[test]
    fn check_run_fails_outside_the_range() {
        let config = RunConfig {
            space: "so5_u2".into(),
            params: MetricParams::new(1.0, 2.5).unwrap(),
            checks: vec![CheckId::Range, CheckId::T319n, CheckId::Delta],
            oracle: OracleBudget {
                restarts: 8,
                steps_per_restart: 120,
                step_size: 0.1,
                seed: 2,
            },
            strict: false,
            out: Some(std::env::temp_dir().join("deltahomog_check_fail.json")),
            format: OutputFormat::Json,
        };
        assert_eq!(cmd_check(&config), EXIT_FAIL);
    }

    #[test]
    fn roots_exit_codes() {
        let out = std::env::temp_dir().join("deltahomog_roots.json");
        assert_eq!(cmd_roots("B", 2, Some(&out)), EXIT_OK);
        assert_eq!(cmd_roots("G2", 3, Some(&out)), EXIT_USAGE);
        assert_eq!(cmd_roots("X", 2, Some(&out)), EXIT_USAGE);
    }

    #[test]
    fn phase_exit_codes_and_csv() {
        let out = std::env::temp_dir().join("deltahomog_phase.csv");
        let budget = OracleBudget {
            restarts: 6,
            steps_per_restart: 100,
            step_size: 0.1,
            seed: 4,
        };
        assert_eq!(
            cmd_phase(1.0, 1.0, 1, &budget, Some(&out), OutputFormat::Csv),
            EXIT_OK
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("ratio,verdict,method"));
        assert!(text.contains("1,true"));
        assert_eq!(
            cmd_phase(0.0, 1.0, 3, &budget, Some(&out), OutputFormat::Csv),
            EXIT_USAGE
        );
        assert_eq!(
            cmd_phase(2.0, 1.0, 3, &budget, Some(&out), OutputFormat::Csv),
            EXIT_USAGE
        );
    }
}
