//! Serialized report payloads. Every report embeds the configuration that
//! produced it; run metadata (timestamps, timings) lives in a separate file.

use gabor_lab::config::ExperimentConfig;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ConfigRecord {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    pub union: Option<String>,
    pub reflattice: String,
    pub ref_window: String,
    pub jitter: f64,
    pub seed: u64,
    /// A number, or `inf`.
    pub p: String,
    /// Box sides in effect.
    #[serde(rename = "N")]
    pub sides: Vec<usize>,
    pub iterative: bool,
    pub points: Option<String>,
    pub fraction: f64,
    pub cell: String,
    pub size: Option<usize>,
}

impl ConfigRecord {
    pub fn new(cfg: &ExperimentConfig, sides: &[usize]) -> Self {
        Self {
            l: cfg.l,
            window: cfg.window.clone(),
            lattice: cfg.lattice.clone(),
            union: cfg.union.clone(),
            reflattice: cfg.reflattice.clone(),
            ref_window: cfg.ref_window.clone(),
            jitter: cfg.jitter,
            seed: cfg.seed,
            p: if cfg.p.is_infinite() {
                "inf".into()
            } else {
                cfg.p.to_string()
            },
            sides: sides.to_vec(),
            iterative: cfg.iterative,
            points: cfg.points.clone(),
            fraction: cfg.fraction,
            cell: cfg.cell.clone(),
            size: cfg.size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DensityLevel {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D_minus")]
    pub d_minus: f64,
    #[serde(rename = "D_plus")]
    pub d_plus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DensityReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub lattice: String,
    pub n_points: usize,
    pub levels: Vec<DensityLevel>,
    pub config: ConfigRecord,
}

/// Frame bounds, densities and measures of one system. Densities, measures
/// and the reciprocity residual are taken at the largest box side `N`;
/// measure fields are null when the system is not a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FrameReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    pub n_points: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "D_minus")]
    pub d_minus: f64,
    #[serde(rename = "D_plus")]
    pub d_plus: f64,
    pub measure_minus: Option<f64>,
    pub measure_plus: Option<f64>,
    pub reciprocity_residual: Option<f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub method: String,
    pub is_frame: bool,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DualReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    pub n_points: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub method: String,
    /// `max ||S g~ - g|| / ||g||` over the family.
    pub max_residual: f64,
    /// Range of `Re <g, g~>` over the family.
    pub diagonal_min: f64,
    pub diagonal_max: f64,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DecayRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub column_eps: f64,
    pub row_eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LocalizeReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub ref_window: String,
    pub lattice: String,
    pub reflattice: String,
    pub p: f64,
    pub n_points: usize,
    pub n_reference: usize,
    pub decay: Vec<DecayRow>,
    /// `l^p` norm of the envelope.
    pub envelope_norm: f64,
    pub envelope_support: usize,
    pub domination_violation: f64,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MeasureSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub measure_minus: f64,
    pub measure_plus: f64,
    #[serde(rename = "D_minus")]
    pub d_minus: f64,
    #[serde(rename = "D_plus")]
    pub d_plus: f64,
    /// `M^-_N D^+_N`.
    pub lower_product: f64,
    /// `M^+_N D^-_N`.
    pub upper_product: f64,
    pub reciprocity_r1: f64,
    pub reciprocity_r2: f64,
    pub skipped_centers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MeasureReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    pub n_points: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub levels: Vec<MeasureSummary>,
    /// `r1` at the largest side.
    pub reciprocity_residual: f64,
    pub warnings: Vec<String>,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ExcessReport {
    #[serde(rename = "L")]
    pub l: usize,
    pub window: String,
    pub lattice: String,
    pub cell: String,
    pub fraction: f64,
    pub n_before: usize,
    pub n_removed: usize,
    pub n_after: usize,
    #[serde(rename = "A_before")]
    pub a_before: f64,
    #[serde(rename = "B_before")]
    pub b_before: f64,
    #[serde(rename = "A_after")]
    pub a_after: f64,
    #[serde(rename = "B_after")]
    pub b_after: f64,
    /// `A_after / A_before`.
    pub ratio: f64,
    pub frame_after: bool,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CheckRecord {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    /// `equal`, `at_least` or `at_most`.
    pub comparison: String,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CounterexampleReport {
    pub name: String,
    pub size: usize,
    pub all_pass: bool,
    pub checks: Vec<CheckRecord>,
    pub config: ConfigRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CriterionRecord {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionRecord>,
    pub passed: usize,
    pub failed: usize,
    pub config: ConfigRecord,
}

/// Non-reproducible facts about a run, kept out of the payloads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    /// Seconds since the Unix epoch at the start of the run.
    pub started_unix: f64,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub files: Vec<String>,
    pub exit_code: i32,
}

/// `(file stem, pretty JSON schema)` for every report type.
pub fn schemas() -> Vec<(&'static str, String)> {
    fn render<T: JsonSchema>() -> String {
        serde_json::to_string_pretty(&schemars::schema_for!(T)).expect("schemas serialize") + "\n"
    }
    vec![
        ("density", render::<DensityReport>()),
        ("framebounds", render::<FrameReport>()),
        ("dual", render::<DualReport>()),
        ("localize", render::<LocalizeReport>()),
        ("measure", render::<MeasureReport>()),
        ("excess", render::<ExcessReport>()),
        ("counterexample", render::<CounterexampleReport>()),
        ("suite", render::<SuiteReport>()),
        ("metadata", render::<Metadata>()),
    ]
}
