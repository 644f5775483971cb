//! Run configuration: defaults, command-line overrides, TOML config file,
//! and the worker-count environment override.
//!
//! Precedence, lowest to highest: built-in defaults, command-line flags,
//! config-file values, then `LLSP_WORKERS` for the worker count.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use llsp_core::classifiers::{ClassifierKind, TrainOptions};
use llsp_core::data_ingest::{LengthPolicy, SetTag, SplitMode, SyntheticClassSpec};
use llsp_core::feature_extraction::GridSpec;
use llsp_core::label::ClassLabel;
use llsp_core::signal_model::{AmplitudeSpec, KnotVector, LlspVariant};

use crate::error::{StageError, StageResult};

pub const WORKERS_ENV: &str = "LLSP_WORKERS";

/// A feature-set column: the raw samples or one of the four models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantChoice {
    Raw,
    Model(LlspVariant),
}

impl VariantChoice {
    pub fn name(self) -> &'static str {
        match self {
            VariantChoice::Raw => "raw",
            VariantChoice::Model(v) => v.name(),
        }
    }
}

impl FromStr for VariantChoice {
    type Err = StageError;

    fn from_str(s: &str) -> StageResult<Self> {
        if s == "raw" {
            return Ok(VariantChoice::Raw);
        }
        s.parse::<LlspVariant>()
            .map(VariantChoice::Model)
            .map_err(|_| StageError::config(format!("variants: unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub omega_start: f64,
    pub omega_end: f64,
    pub omega_step: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub tau_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = GridSpec::band_pass_default();
        GridConfig {
            omega_start: g.omega_start_hz,
            omega_end: g.omega_end_hz,
            omega_step: g.omega_step_hz,
            tau_start: g.tau_start,
            tau_end: g.tau_end,
            tau_step: g.tau_step,
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> GridSpec {
        GridSpec {
            omega_start_hz: self.omega_start,
            omega_end_hz: self.omega_end,
            omega_step_hz: self.omega_step,
            tau_start: self.tau_start,
            tau_end: self.tau_end,
            tau_step: self.tau_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplitudeConfig {
    pub poly_degree: usize,
    pub spline_degree: usize,
    pub spline_subintervals: usize,
}

impl Default for AmplitudeConfig {
    fn default() -> Self {
        AmplitudeConfig {
            poly_degree: 48,
            spline_degree: 4,
            spline_subintervals: 12,
        }
    }
}

impl AmplitudeConfig {
    pub fn for_variant(&self, variant: LlspVariant) -> StageResult<AmplitudeSpec> {
        let spec = if variant.requires_spline() {
            AmplitudeSpec::spline(
                self.spline_degree,
                KnotVector::equidistant((0.0, 1.0), self.spline_subintervals).map_err(|e| {
                    StageError::config(format!("amplitude.spline_subintervals: {e}"))
                })?,
            )
        } else {
            AmplitudeSpec::polynomial(self.poly_degree)
        };
        spec.map_err(|e| StageError::config(format!("amplitude: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
    /// "random" or "deterministic-tail".
    pub mode: String,
    pub exact_train: Option<usize>,
    pub exact_test: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.9,
            seed: 20260811,
            mode: "random".into(),
            exact_train: None,
            exact_test: None,
        }
    }
}

impl SplitConfig {
    pub fn mode(&self) -> StageResult<SplitMode> {
        match self.mode.as_str() {
            "random" => Ok(SplitMode::Random { seed: self.seed }),
            "deterministic-tail" => Ok(SplitMode::DeterministicTail),
            other => Err(StageError::config(format!(
                "split.mode: expected \"random\" or \"deterministic-tail\", got {other:?}"
            ))),
        }
    }

    pub fn exact_counts(&self) -> StageResult<Option<(usize, usize)>> {
        match (self.exact_train, self.exact_test) {
            (Some(tr), Some(te)) => Ok(Some((tr, te))),
            (None, None) => Ok(None),
            _ => Err(StageError::config(
                "split.exact_train and split.exact_test must be given together",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BonnConfig {
    /// Per-set subdirectory under `data_root` and file prefix, e.g. set A
    /// lives in `Z/` as `Z001.txt` in the public distribution.
    pub a_dir: String,
    pub b_dir: String,
    pub c_dir: String,
    pub d_dir: String,
    pub e_dir: String,
    pub a_prefix: String,
    pub b_prefix: String,
    pub c_prefix: String,
    pub d_prefix: String,
    pub e_prefix: String,
    /// "strict" or "warn-accept" (public mirrors carry 4096/4097 variance).
    pub length_policy: String,
}

impl Default for BonnConfig {
    fn default() -> Self {
        BonnConfig {
            a_dir: "Z".into(),
            b_dir: "O".into(),
            c_dir: "N".into(),
            d_dir: "F".into(),
            e_dir: "S".into(),
            a_prefix: "Z".into(),
            b_prefix: "O".into(),
            c_prefix: "N".into(),
            d_prefix: "F".into(),
            e_prefix: "S".into(),
            length_policy: "warn-accept".into(),
        }
    }
}

impl BonnConfig {
    pub fn dir(&self, tag: SetTag) -> &str {
        match tag {
            SetTag::A => &self.a_dir,
            SetTag::B => &self.b_dir,
            SetTag::C => &self.c_dir,
            SetTag::D => &self.d_dir,
            SetTag::E => &self.e_dir,
        }
    }

    pub fn prefix(&self, tag: SetTag) -> &str {
        match tag {
            SetTag::A => &self.a_prefix,
            SetTag::B => &self.b_prefix,
            SetTag::C => &self.c_prefix,
            SetTag::D => &self.d_prefix,
            SetTag::E => &self.e_prefix,
        }
    }

    pub fn length_policy(&self) -> StageResult<LengthPolicy> {
        match self.length_policy.as_str() {
            "strict" => Ok(LengthPolicy::Strict),
            "warn-accept" => Ok(LengthPolicy::WarnAccept),
            other => Err(StageError::config(format!(
                "bonn.length_policy: expected \"strict\" or \"warn-accept\", got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub count_per_class: usize,
    pub length: usize,
    pub sample_rate: f64,
    pub seed: u64,
    pub nonseizure_freq: f64,
    pub nonseizure_phase: f64,
    pub nonseizure_amplitude: Vec<f64>,
    pub nonseizure_noise_sigma: f64,
    pub seizure_freq: f64,
    pub seizure_phase: f64,
    pub seizure_amplitude: Vec<f64>,
    pub seizure_noise_sigma: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            count_per_class: 20,
            length: 512,
            sample_rate: 173.61,
            seed: 7,
            nonseizure_freq: 2.53,
            nonseizure_phase: std::f64::consts::FRAC_PI_4,
            nonseizure_amplitude: vec![1.0],
            nonseizure_noise_sigma: 0.0,
            seizure_freq: 20.53,
            seizure_phase: std::f64::consts::FRAC_PI_4,
            seizure_amplitude: vec![1.0],
            seizure_noise_sigma: 0.0,
        }
    }
}

impl SyntheticConfig {
    pub fn class_specs(&self) -> Vec<SyntheticClassSpec> {
        vec![
            SyntheticClassSpec {
                label: ClassLabel::NonSeizure,
                frequency_hz: self.nonseizure_freq,
                phase: self.nonseizure_phase,
                amplitude_poly: self.nonseizure_amplitude.clone(),
                noise_sigma: self.nonseizure_noise_sigma,
            },
            SyntheticClassSpec {
                label: ClassLabel::Seizure,
                frequency_hz: self.seizure_freq,
                phase: self.seizure_phase,
                amplitude_poly: self.seizure_amplitude.clone(),
                noise_sigma: self.seizure_noise_sigma,
            },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub oner_min_bucket: usize,
    pub tree_min_leaf: usize,
    pub logistic_ridge: f64,
    pub logistic_grad_tol: f64,
    pub logistic_max_iter: usize,
    pub logistic_memory_cap_mb: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let t = TrainOptions::default();
        TrainingConfig {
            oner_min_bucket: t.oner_min_bucket,
            tree_min_leaf: t.tree_min_leaf,
            logistic_ridge: t.logistic_ridge,
            logistic_grad_tol: t.logistic_grad_tol,
            logistic_max_iter: t.logistic_max_iter,
            logistic_memory_cap_mb: 4096,
        }
    }
}

impl TrainingConfig {
    pub fn to_options(&self) -> TrainOptions {
        TrainOptions {
            oner_min_bucket: self.oner_min_bucket,
            tree_min_leaf: self.tree_min_leaf,
            logistic_ridge: self.logistic_ridge,
            logistic_grad_tol: self.logistic_grad_tol,
            logistic_max_iter: self.logistic_max_iter,
            logistic_memory_cap_bytes: Some(self.logistic_memory_cap_mb * 1024 * 1024),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bonn data root directory, or the literal string `synthetic`.
    pub data_root: String,
    pub experiment: u8,
    pub variants: Vec<String>,
    pub classifiers: Vec<String>,
    pub output_dir: PathBuf,
    /// 0 means all available cores.
    pub workers: usize,
    pub save_models: bool,
    pub grid: GridConfig,
    pub amplitude: AmplitudeConfig,
    pub split: SplitConfig,
    pub bonn: BonnConfig,
    pub synthetic: SyntheticConfig,
    pub training: TrainingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_root: "synthetic".into(),
            experiment: 1,
            variants: vec![
                "llsp1".into(),
                "llsp2".into(),
                "llsp3".into(),
                "llsp4".into(),
            ],
            classifiers: vec![
                "knn1".into(),
                "knn5".into(),
                "logistic".into(),
                "oner".into(),
                "tree".into(),
            ],
            output_dir: PathBuf::from("out"),
            workers: 0,
            save_models: false,
            grid: GridConfig::default(),
            amplitude: AmplitudeConfig::default(),
            split: SplitConfig::default(),
            bonn: BonnConfig::default(),
            synthetic: SyntheticConfig::default(),
            training: TrainingConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn is_synthetic(&self) -> bool {
        self.data_root == "synthetic"
    }

    /// Dataset tag used in output file names: `exp{N}` or `synthetic`.
    pub fn dataset_tag(&self) -> String {
        if self.is_synthetic() {
            "synthetic".into()
        } else {
            format!("exp{}", self.experiment)
        }
    }

    pub fn parsed_variants(&self) -> StageResult<Vec<VariantChoice>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in &self.variants {
            let choice: VariantChoice = v.parse()?;
            if seen.insert(choice) {
                out.push(choice);
            }
        }
        Ok(out)
    }

    pub fn parsed_classifiers(&self) -> StageResult<Vec<ClassifierKind>> {
        let mut out = Vec::new();
        for c in &self.classifiers {
            out.push(
                c.parse::<ClassifierKind>()
                    .map_err(|e| StageError::config(format!("classifiers: {e}")))?,
            );
        }
        Ok(out)
    }

    pub fn effective_workers(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            self.workers
        }
    }

    /// Validate every field before any computation; messages name the field.
    pub fn validate(&self) -> StageResult<()> {
        if !self.is_synthetic() && !PathBuf::from(&self.data_root).is_dir() {
            return Err(StageError::config(format!(
                "data_root: {:?} is not a directory (use \"synthetic\" for generated data)",
                self.data_root
            )));
        }
        if !(1..=4).contains(&self.experiment) {
            return Err(StageError::config(format!(
                "experiment: must be 1..=4, got {}",
                self.experiment
            )));
        }
        if self.variants.is_empty() {
            return Err(StageError::config("variants: at least one required"));
        }
        self.parsed_variants()?;
        if self.classifiers.is_empty() {
            return Err(StageError::config("classifiers: at least one required"));
        }
        self.parsed_classifiers()?;
        self.grid
            .to_grid()
            .points()
            .map_err(|e| StageError::config(format!("grid: {e}")))?;
        for variant in LlspVariant::ALL {
            self.amplitude.for_variant(variant)?;
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(StageError::config(format!(
                "split.train_fraction: must lie in (0, 1), got {}",
                self.split.train_fraction
            )));
        }
        self.split.mode()?;
        self.split.exact_counts()?;
        self.bonn.length_policy()?;
        if self.synthetic.count_per_class == 0 {
            return Err(StageError::config(
                "synthetic.count_per_class: must be >= 1",
            ));
        }
        if self.synthetic.length < 2 {
            return Err(StageError::config("synthetic.length: must be >= 2"));
        }
        if !(self.synthetic.sample_rate > 0.0) {
            return Err(StageError::config("synthetic.sample_rate: must be > 0"));
        }
        if self.training.logistic_max_iter == 0 {
            return Err(StageError::config(
                "training.logistic_max_iter: must be >= 1",
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; differs iff any field differs.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

pub fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Command-line overrides applied on top of the defaults, below the file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub data_root: Option<String>,
    pub experiment: Option<u8>,
    pub variants: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub save_models: Option<bool>,
    pub split_seed: Option<u64>,
    pub split_mode: Option<String>,
    pub train_fraction: Option<f64>,
}

impl ConfigOverrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = &self.data_root {
            config.data_root = v.clone();
        }
        if let Some(v) = self.experiment {
            config.experiment = v;
        }
        if let Some(v) = &self.variants {
            config.variants = v.clone();
        }
        if let Some(v) = &self.classifiers {
            config.classifiers = v.clone();
        }
        if let Some(v) = &self.output_dir {
            config.output_dir = v.clone();
        }
        if let Some(v) = self.workers {
            config.workers = v;
        }
        if let Some(v) = self.save_models {
            config.save_models = v;
        }
        if let Some(v) = self.split_seed {
            config.split.seed = v;
        }
        if let Some(v) = &self.split_mode {
            config.split.mode = v.clone();
        }
        if let Some(v) = self.train_fraction {
            config.split.train_fraction = v;
        }
    }
}

fn merge_toml(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(base_table), toml::Value::Table(overlay_table)) => {
            for (key, value) in overlay_table {
                match base_table.get_mut(&key) {
                    Some(existing) => merge_toml(existing, value),
                    None => {
                        base_table.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Assemble the effective configuration. Values from the config file
/// override flag values; `LLSP_WORKERS` overrides the worker count last.
pub fn build_config(
    file: Option<&std::path::Path>,
    overrides: &ConfigOverrides,
) -> StageResult<RunConfig> {
    let mut config = RunConfig::default();
    overrides.apply(&mut config);

    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StageError::config(format!("config file {}: {e}", path.display())))?;
        let overlay: toml::Table = text
            .parse()
            .map_err(|e| StageError::config(format!("config file {}: {e}", path.display())))?;
        let overlay = toml::Value::Table(overlay);
        let mut base = toml::Value::try_from(&config)
            .map_err(|e| StageError::internal(format!("config serialization: {e}")))?;
        merge_toml(&mut base, overlay);
        config = base
            .try_into()
            .map_err(|e| StageError::config(format!("config file {}: {e}", path.display())))?;
    }

    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let workers: usize = value.parse().map_err(|_| {
            StageError::config(format!("{WORKERS_ENV}: cannot parse {value:?} as a count"))
        })?;
        config.workers = workers;
    }

    config.validate()?;
    Ok(config)
}
