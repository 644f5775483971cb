//! Dataset handling: Bonn-format EEG sets A–E, the four balanced binary
//! experiments, stratified train/test splitting, and synthetic segments for
//! dataset-free testing.
//!
//! The Bonn ASCII format is one signed integer sample per line, 100 files
//! per set directory, file names like `Z001.txt`. Public mirrors use the
//! Z/O/N/F/S prefixes for sets A/B/C/D/E.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::ClassLabel;
use crate::signal_model::{eval_polynomial, TimeGrid};

pub const BONN_SAMPLE_RATE_HZ: f64 = 173.61;
pub const BONN_SEGMENT_SAMPLES: usize = 4097;
pub const BONN_SET_SIZE: usize = 100;

/// The five Bonn recording sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetTag {
    A,
    B,
    C,
    D,
    E,
}

impl SetTag {
    pub const ALL: [SetTag; 5] = [SetTag::A, SetTag::B, SetTag::C, SetTag::D, SetTag::E];

    /// Set E is the ictal set; everything else counts as non-seizure.
    pub fn label(self) -> ClassLabel {
        if self == SetTag::E {
            ClassLabel::Seizure
        } else {
            ClassLabel::NonSeizure
        }
    }

    pub fn letter(self) -> char {
        match self {
            SetTag::A => 'A',
            SetTag::B => 'B',
            SetTag::C => 'C',
            SetTag::D => 'D',
            SetTag::E => 'E',
        }
    }

    /// File prefix used by the public Bonn distribution.
    pub fn default_file_prefix(self) -> char {
        match self {
            SetTag::A => 'Z',
            SetTag::B => 'O',
            SetTag::C => 'N',
            SetTag::D => 'F',
            SetTag::E => 'S',
        }
    }
}

impl fmt::Display for SetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for SetTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(SetTag::A),
            "B" | "b" => Ok(SetTag::B),
            "C" | "c" => Ok(SetTag::C),
            "D" | "d" => Ok(SetTag::D),
            "E" | "e" => Ok(SetTag::E),
            other => Err(Error::InvalidSpec(format!("unknown set tag {other:?}"))),
        }
    }
}

/// One EEG recording window treated as a single classification instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: String,
    pub set_tag: SetTag,
    pub index_in_set: usize,
    pub label: ClassLabel,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl Segment {
    pub fn new(
        set_tag: SetTag,
        index_in_set: usize,
        sample_rate_hz: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("segment samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("segment samples"));
        }
        if index_in_set == 0 {
            return Err(Error::InvalidSpec("segment index is 1-based".into()));
        }
        Ok(Segment {
            id: format!("{}{:03}", set_tag.letter(), index_in_set),
            set_tag,
            index_in_set,
            label: set_tag.label(),
            sample_rate_hz,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.sample_rate_hz, self.samples.len())
    }
}

/// How to treat segments whose sample count differs from the Bonn nominal
/// 4097. Public mirrors contain occasional 4096-sample files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthPolicy {
    Strict,
    WarnAccept,
}

/// Load one Bonn set directory: 100 files, one signed integer per line.
///
/// File names are matched case-insensitively against
/// `{prefix}{index:03}.txt`. Returns the segments ordered by index together
/// with any length warnings produced under [`LengthPolicy::WarnAccept`].
pub fn load_bonn_set(
    directory: &Path,
    tag: SetTag,
    file_prefix: &str,
    policy: LengthPolicy,
) -> Result<(Vec<Segment>, Vec<String>)> {
    let mut by_lower_name = BTreeMap::new();
    for entry in fs::read_dir(directory)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().to_lowercase();
        by_lower_name.insert(name, entry.path());
    }

    let mut segments = Vec::with_capacity(BONN_SET_SIZE);
    let mut warnings = Vec::new();
    for index in 1..=BONN_SET_SIZE {
        let expected = format!("{file_prefix}{index:03}.txt");
        let path = by_lower_name.get(&expected.to_lowercase()).ok_or_else(|| {
            Error::MissingSegmentFile {
                set: tag.letter(),
                index,
                expected: expected.clone(),
            }
        })?;
        let text = fs::read_to_string(path)?;
        let mut samples = Vec::with_capacity(BONN_SEGMENT_SAMPLES);
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let value: i64 = trimmed.parse().map_err(|_| Error::SampleParse {
                file: expected.clone(),
                line: lineno + 1,
                content: trimmed.to_owned(),
            })?;
            samples.push(value as f64);
        }
        if samples.len() != BONN_SEGMENT_SAMPLES {
            match policy {
                LengthPolicy::Strict => {
                    return Err(Error::SampleCount {
                        file: expected,
                        expected: BONN_SEGMENT_SAMPLES,
                        got: samples.len(),
                    });
                }
                LengthPolicy::WarnAccept => {
                    warnings.push(format!(
                        "{expected}: {} samples (expected {BONN_SEGMENT_SAMPLES})",
                        samples.len()
                    ));
                }
            }
        }
        segments.push(Segment::new(tag, index, BONN_SAMPLE_RATE_HZ, samples)?);
    }
    Ok((segments, warnings))
}

/// Write segments back in the Bonn ASCII format (integer samples required).
pub fn save_bonn_set(directory: &Path, segments: &[Segment], file_prefix: &str) -> Result<()> {
    fs::create_dir_all(directory)?;
    for segment in segments {
        let mut out = String::with_capacity(segment.len() * 6);
        for &v in &segment.samples {
            if v.fract() != 0.0 {
                return Err(Error::Data(format!(
                    "segment {} holds non-integer sample {v}; Bonn format is integral",
                    segment.id
                )));
            }
            out.push_str(&format!("{}\n", v as i64));
        }
        let path = directory.join(format!("{file_prefix}{:03}.txt", segment.index_in_set));
        fs::write(path, out)?;
    }
    Ok(())
}

/// 1-based inclusive index range into one set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionBlock {
    pub set: SetTag,
    pub range: RangeInclusive<usize>,
}

impl SelectionBlock {
    pub fn new(set: SetTag, range: RangeInclusive<usize>) -> Self {
        SelectionBlock { set, range }
    }

    pub fn len(&self) -> usize {
        self.range.end() - self.range.start() + 1
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

/// Segment selection and split sizes for one balanced experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: u8,
    pub nonseizure: Vec<SelectionBlock>,
    pub seizure: SelectionBlock,
    pub train_count: usize,
    pub test_count: usize,
}

impl ExperimentSpec {
    /// The four standard experiments.
    ///
    /// The non-seizure class is staggered across block positions so the
    /// per-set ranges do not overlap: experiment 1 takes A 1–25, B 26–50,
    /// C 51–75, D 76–100; experiment 2 takes C 1–33, A 34–66, D 67–100.
    /// Experiment 1 splits 178/22, the rest 180/20.
    pub fn standard(id: u8) -> Result<Self> {
        use SetTag::*;
        let spec = match id {
            1 => ExperimentSpec {
                id,
                nonseizure: vec![
                    SelectionBlock::new(A, 1..=25),
                    SelectionBlock::new(B, 26..=50),
                    SelectionBlock::new(C, 51..=75),
                    SelectionBlock::new(D, 76..=100),
                ],
                seizure: SelectionBlock::new(E, 1..=100),
                train_count: 178,
                test_count: 22,
            },
            2 => ExperimentSpec {
                id,
                nonseizure: vec![
                    SelectionBlock::new(C, 1..=33),
                    SelectionBlock::new(A, 34..=66),
                    SelectionBlock::new(D, 67..=100),
                ],
                seizure: SelectionBlock::new(E, 1..=100),
                train_count: 180,
                test_count: 20,
            },
            3 => ExperimentSpec {
                id,
                nonseizure: vec![SelectionBlock::new(B, 1..=100)],
                seizure: SelectionBlock::new(E, 1..=100),
                train_count: 180,
                test_count: 20,
            },
            4 => ExperimentSpec {
                id,
                nonseizure: vec![SelectionBlock::new(A, 1..=100)],
                seizure: SelectionBlock::new(E, 1..=100),
                train_count: 180,
                test_count: 20,
            },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "experiment id must be 1..=4, got {other}"
                )))
            }
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nonseizure_total: usize = self.nonseizure.iter().map(SelectionBlock::len).sum();
        if nonseizure_total != BONN_SET_SIZE || self.seizure.len() != BONN_SET_SIZE {
            return Err(Error::InvalidSpec(format!(
                "experiment {} is unbalanced: {} non-seizure vs {} seizure segments",
                self.id,
                nonseizure_total,
                self.seizure.len()
            )));
        }
        if self.seizure.set != SetTag::E {
            return Err(Error::InvalidSpec(
                "the seizure class is drawn from set E".into(),
            ));
        }
        if self.train_count + self.test_count != nonseizure_total + self.seizure.len() {
            return Err(Error::InvalidSpec(format!(
                "train {} + test {} must cover all {} segments",
                self.train_count,
                self.test_count,
                nonseizure_total + self.seizure.len()
            )));
        }
        Ok(())
    }

    fn all_blocks(&self) -> impl Iterator<Item = &SelectionBlock> {
        self.nonseizure.iter().chain(std::iter::once(&self.seizure))
    }
}

/// Assemble one balanced experiment: non-seizure blocks in order, then the
/// seizure block.
pub fn assemble_experiment(
    sets: &BTreeMap<SetTag, Vec<Segment>>,
    spec: &ExperimentSpec,
) -> Result<Vec<Segment>> {
    spec.validate()?;

    // Reject duplicate indices within a set before touching the data.
    let mut used: BTreeMap<SetTag, HashSet<usize>> = BTreeMap::new();
    for block in spec.all_blocks() {
        let seen = used.entry(block.set).or_default();
        for index in block.range.clone() {
            if !seen.insert(index) {
                return Err(Error::Data(format!(
                    "segment {}{index:03} selected twice",
                    block.set
                )));
            }
        }
    }

    let mut out = Vec::with_capacity(2 * BONN_SET_SIZE);
    for block in spec.all_blocks() {
        let set = sets.get(&block.set).ok_or_else(|| {
            Error::Data(format!(
                "set {} not loaded for experiment {}",
                block.set, spec.id
            ))
        })?;
        for index in block.range.clone() {
            let segment = set.get(index - 1).ok_or_else(|| {
                Error::Data(format!(
                    "selection overflow: set {} has {} segments, index {index} requested",
                    block.set,
                    set.len()
                ))
            })?;
            if segment.index_in_set != index {
                return Err(Error::Data(format!(
                    "set {} is not ordered by index at position {index}",
                    block.set
                )));
            }
            out.push(segment.clone());
        }
    }
    Ok(out)
}

/// Test-set selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    /// Pseudorandom under a recorded seed.
    Random { seed: u64 },
    /// The last k segments per class; exactly reproducible without a seed.
    DeterministicTail,
}

/// Largest-remainder allocation of `total` across the class sizes.
fn allocate_per_class(class_sizes: &[usize], total: usize) -> Vec<usize> {
    let population: usize = class_sizes.iter().sum();
    let mut counts: Vec<usize> = Vec::with_capacity(class_sizes.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(class_sizes.len());
    for (c, &size) in class_sizes.iter().enumerate() {
        let exact = total as f64 * size as f64 / population as f64;
        counts.push(exact.floor() as usize);
        remainders.push((exact - exact.floor(), c));
    }
    let mut assigned: usize = counts.iter().sum();
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut i = 0;
    while assigned < total {
        counts[remainders[i % remainders.len()].1] += 1;
        assigned += 1;
        i += 1;
    }
    counts
}

/// Stratified train/test split over class labels.
///
/// Returns ascending index lists (train, test). `exact_counts` overrides the
/// fraction, e.g. (178, 22) for experiment 1.
pub fn split_train_test(
    labels: &[ClassLabel],
    train_fraction: f64,
    mode: SplitMode,
    exact_counts: Option<(usize, usize)>,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("split population"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let total = labels.len();
    let (train_count, test_count) = match exact_counts {
        Some((tr, te)) => {
            if tr + te != total {
                return Err(Error::InvalidSpec(format!(
                    "exact counts {tr}+{te} do not cover the {total} segments"
                )));
            }
            (tr, te)
        }
        None => {
            let tr = (total as f64 * train_fraction).round() as usize;
            (tr, total - tr)
        }
    };
    if train_count == 0 || test_count == 0 {
        return Err(Error::InvalidSpec(format!(
            "degenerate split {train_count}/{test_count}"
        )));
    }

    let class_indices: Vec<Vec<usize>> = ClassLabel::ALL
        .iter()
        .map(|&cls| {
            labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == cls)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let class_sizes: Vec<usize> = class_indices.iter().map(Vec::len).collect();
    let per_class_test = allocate_per_class(&class_sizes, test_count);
    for (c, (&want, &have)) in per_class_test.iter().zip(&class_sizes).enumerate() {
        if want > have {
            return Err(Error::InvalidSpec(format!(
                "test allocation {want} exceeds class {c} population {have}"
            )));
        }
    }

    let mut test: Vec<usize> = Vec::with_capacity(test_count);
    match mode {
        SplitMode::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (indices, &take) in class_indices.iter().zip(&per_class_test) {
                let mut shuffled = indices.clone();
                shuffled.shuffle(&mut rng);
                test.extend_from_slice(&shuffled[..take]);
            }
        }
        SplitMode::DeterministicTail => {
            for (indices, &take) in class_indices.iter().zip(&per_class_test) {
                test.extend_from_slice(&indices[indices.len() - take..]);
            }
        }
    }
    test.sort_unstable();
    let test_set: HashSet<usize> = test.iter().copied().collect();
    let train: Vec<usize> = (0..total).filter(|i| !test_set.contains(i)).collect();
    Ok((train, test))
}

/// Planted-signal description for one synthetic class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticClassSpec {
    pub label: ClassLabel,
    pub frequency_hz: f64,
    pub phase: f64,
    /// Amplitude polynomial coefficients, evaluated on normalized time.
    pub amplitude_poly: Vec<f64>,
    pub noise_sigma: f64,
}

impl SyntheticClassSpec {
    fn validate(&self) -> Result<()> {
        if self.amplitude_poly.is_empty() {
            return Err(Error::EmptyInput("synthetic amplitude polynomial"));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz >= 0.0) {
            return Err(Error::InvalidSpec(
                "synthetic frequency must be >= 0".into(),
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    fn set_tag(&self) -> SetTag {
        match self.label {
            ClassLabel::NonSeizure => SetTag::A,
            ClassLabel::Seizure => SetTag::E,
        }
    }
}

/// Reproducible pseudo-random segments `A(u)·sin(2π f t + τ) + noise`.
pub fn generate_synthetic(
    classes: &[SyntheticClassSpec],
    count_per_class: usize,
    length: usize,
    sample_rate_hz: f64,
    seed: u64,
) -> Result<Vec<Segment>> {
    if classes.is_empty() {
        return Err(Error::EmptyInput("synthetic class specs"));
    }
    if count_per_class == 0 {
        return Err(Error::InvalidSpec("count per class must be >= 1".into()));
    }
    let grid = TimeGrid::new(sample_rate_hz, length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(classes.len() * count_per_class);
    for class in classes {
        class.validate()?;
        let noise = if class.noise_sigma > 0.0 {
            Some(
                Normal::new(0.0, class.noise_sigma)
                    .map_err(|e| Error::InvalidSpec(format!("noise distribution: {e}")))?,
            )
        } else {
            None
        };
        for index in 1..=count_per_class {
            let mut samples = Vec::with_capacity(length);
            for i in 0..length {
                let amp = eval_polynomial(&class.amplitude_poly, grid.normalized(i))?;
                let carrier = (2.0 * std::f64::consts::PI * class.frequency_hz * grid.physical(i)
                    + class.phase)
                    .sin();
                let eps = match &noise {
                    Some(dist) => dist.sample(&mut rng),
                    None => 0.0,
                };
                samples.push(amp * carrier + eps);
            }
            out.push(Segment::new(
                class.set_tag(),
                index,
                sample_rate_hz,
                samples,
            )?);
        }
    }
    // Trailing draw keeps class blocks aligned if more classes are appended.
    let _ = rng.random::<u64>();
    Ok(out)
}
