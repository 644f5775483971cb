//! Pipeline stages: extract, classify, run-all, synth-gen, report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use llsp_core::classifiers::{evaluate, save_model, train, Dataset};
use llsp_core::data_ingest::{
    assemble_experiment, generate_synthetic, load_bonn_set, split_train_test, ExperimentSpec,
    Segment,
};
use llsp_core::evaluation::{ResultCell, ResultsTable};
use llsp_core::feature_extraction::{extract_dataset, write_features_csv};
use llsp_core::label::ClassLabel;

use crate::config::{RunConfig, VariantChoice};
use crate::error::{StageError, StageResult};
use crate::manifest::{clear_partial_marker, write_partial_marker, Manifest};

/// One wall-clock measurement; classifier is empty for extraction entries.
#[derive(Debug, Clone)]
pub struct TimingEntry {
    pub stage: String,
    pub dataset: String,
    pub variant: String,
    pub classifier: String,
    pub seconds: f64,
}

pub fn write_timing_csv(path: &Path, entries: &[TimingEntry]) -> StageResult<()> {
    let mut out = String::from("stage,dataset,variant,classifier,seconds\n");
    for e in entries {
        writeln!(
            out,
            "{},{},{},{},{:.6}",
            e.stage, e.dataset, e.variant, e.classifier, e.seconds
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load or generate the segments for this run.
pub fn load_segments(config: &RunConfig) -> StageResult<(Vec<Segment>, Vec<String>)> {
    if config.is_synthetic() {
        let segments = generate_synthetic(
            &config.synthetic.class_specs(),
            config.synthetic.count_per_class,
            config.synthetic.length,
            config.synthetic.sample_rate,
            config.synthetic.seed,
        )?;
        return Ok((segments, Vec::new()));
    }
    let spec = ExperimentSpec::standard(config.experiment)?;
    let policy = config.bonn.length_policy()?;
    let root = PathBuf::from(&config.data_root);
    let mut needed: Vec<_> = spec.nonseizure.iter().map(|b| b.set).collect();
    needed.push(spec.seizure.set);
    needed.sort();
    needed.dedup();
    let mut sets = BTreeMap::new();
    let mut warnings = Vec::new();
    for tag in needed {
        let dir = root.join(config.bonn.dir(tag));
        let (segments, mut w) = load_bonn_set(&dir, tag, config.bonn.prefix(tag), policy)?;
        warnings.append(&mut w);
        sets.insert(tag, segments);
    }
    let segments = assemble_experiment(&sets, &spec)?;
    Ok((segments, warnings))
}

/// Raw passthrough CSV: `segment_id,label,s0..s{N-1}`.
pub fn write_raw_csv(path: &Path, segments: &[Segment]) -> StageResult<()> {
    let first = segments
        .first()
        .ok_or_else(|| StageError::data("no segments to write"))?;
    let n = first.len();
    let mut out = String::new();
    out.push_str("segment_id,label");
    for i in 0..n {
        write!(out, ",s{i}").unwrap();
    }
    out.push('\n');
    for segment in segments {
        if segment.len() != n {
            return Err(StageError::data(format!(
                "raw output needs uniform segment lengths: {} has {} samples, expected {n}",
                segment.id,
                segment.len()
            )));
        }
        write!(out, "{},{}", segment.id, segment.label).unwrap();
        for v in &segment.samples {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug)]
pub struct ExtractOutputs {
    pub feature_files: Vec<(VariantChoice, PathBuf)>,
    pub timings: Vec<TimingEntry>,
    pub warnings: Vec<String>,
}

/// Extract one CSV per requested variant; wall-clock timing covers the
/// extraction loop only, not file I/O.
pub fn run_extract(config: &RunConfig) -> StageResult<ExtractOutputs> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let tag = config.dataset_tag();
    let (segments, warnings) = load_segments(config)?;
    let grid = config.grid.to_grid();
    let workers = config.effective_workers();

    let mut feature_files = Vec::new();
    let mut timings = Vec::new();
    for choice in config.parsed_variants()? {
        let path = config
            .output_dir
            .join(format!("{tag}_{}.csv", choice.name()));
        let seconds = match choice {
            VariantChoice::Raw => {
                let t0 = Instant::now();
                write_raw_csv(&path, &segments)?;
                t0.elapsed().as_secs_f64()
            }
            VariantChoice::Model(variant) => {
                let amplitude = config.amplitude.for_variant(variant)?;
                let t0 = Instant::now();
                let features = extract_dataset(&segments, variant, &grid, &amplitude, workers)?;
                let seconds = t0.elapsed().as_secs_f64();
                let mut buf = Vec::new();
                write_features_csv(&mut buf, &features)?;
                fs::write(&path, buf)?;
                seconds
            }
        };
        timings.push(TimingEntry {
            stage: "extract".into(),
            dataset: tag.clone(),
            variant: choice.name().into(),
            classifier: String::new(),
            seconds,
        });
        feature_files.push((choice, path));
    }
    write_timing_csv(&config.output_dir.join("timings_extract.csv"), &timings)?;
    Ok(ExtractOutputs {
        feature_files,
        timings,
        warnings,
    })
}

#[derive(Debug)]
pub struct ClassifyOutputs {
    pub metrics_csv: PathBuf,
    pub report_txt: PathBuf,
    pub model_files: Vec<PathBuf>,
    pub table: ResultsTable,
    pub timings: Vec<TimingEntry>,
}

/// Train and evaluate every (variant, classifier) combination on a shared
/// stratified split, then emit the metrics CSV and the report tables.
pub fn run_classify(
    config: &RunConfig,
    feature_files: &[(VariantChoice, PathBuf)],
) -> StageResult<ClassifyOutputs> {
    config.validate()?;
    if feature_files.is_empty() {
        return Err(StageError::data("no feature files to classify"));
    }
    fs::create_dir_all(&config.output_dir)?;
    let tag = config.dataset_tag();
    let options = config.training.to_options();

    let mut datasets = Vec::new();
    let mut reference: Option<(Vec<String>, Vec<ClassLabel>)> = None;
    for (choice, path) in feature_files {
        let file = fs::File::open(path)
            .map_err(|e| StageError::data(format!("{}: {e}", path.display())))?;
        let (dataset, ids) = Dataset::from_labelled_csv(BufReader::new(file))?;
        match &reference {
            None => reference = Some((ids, dataset.labels.clone())),
            Some((ref_ids, ref_labels)) => {
                if ref_ids != &ids || ref_labels != &dataset.labels {
                    return Err(StageError::data(format!(
                        "{}: segment order or labels disagree with {}",
                        path.display(),
                        feature_files[0].1.display()
                    )));
                }
            }
        }
        datasets.push((*choice, dataset));
    }
    let (_, labels) = reference.expect("at least one file");

    // Experiment 1 keeps its published 178/22 split; explicit config counts
    // win over that, synthetic runs use the fraction.
    let exact_counts = match config.split.exact_counts()? {
        Some(counts) => Some(counts),
        None if !config.is_synthetic() => {
            let spec = ExperimentSpec::standard(config.experiment)?;
            Some((spec.train_count, spec.test_count))
        }
        None => None,
    };
    let (train_idx, test_idx) = split_train_test(
        &labels,
        config.split.train_fraction,
        config.split.mode()?,
        exact_counts,
    )?;

    let mut table = ResultsTable::new();
    let mut timings = Vec::new();
    let mut model_files = Vec::new();
    for (choice, dataset) in &datasets {
        let train_set = dataset.subset(&train_idx)?;
        let test_set = dataset.subset(&test_idx)?;
        for kind in config.parsed_classifiers()? {
            let t0 = Instant::now();
            let model = train(kind, &train_set, &options)?;
            let train_seconds = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let confusion = evaluate(&model, &test_set)?;
            let test_seconds = t1.elapsed().as_secs_f64();

            let mut cell = ResultCell::from_confusion(confusion)?;
            cell.train_seconds = Some(train_seconds);
            cell.test_seconds = Some(test_seconds);
            table.insert(&tag, choice.name(), &kind.name(), cell);
            timings.push(TimingEntry {
                stage: "classify-train".into(),
                dataset: tag.clone(),
                variant: choice.name().into(),
                classifier: kind.name(),
                seconds: train_seconds,
            });
            timings.push(TimingEntry {
                stage: "classify-test".into(),
                dataset: tag.clone(),
                variant: choice.name().into(),
                classifier: kind.name(),
                seconds: test_seconds,
            });

            if config.save_models {
                let dir = config.output_dir.join("models");
                fs::create_dir_all(&dir)?;
                let path = dir.join(format!("{tag}_{}_{}.json", choice.name(), kind.name()));
                let file = fs::File::create(&path)?;
                save_model(file, &model)?;
                model_files.push(path);
            }
        }
    }

    let metrics_csv = config.output_dir.join(format!("metrics_{tag}.csv"));
    fs::write(&metrics_csv, table.to_csv())?;
    let report_txt = config.output_dir.join(format!("report_{tag}.txt"));
    fs::write(&report_txt, table.render_text()?)?;
    write_timing_csv(&config.output_dir.join("timings_classify.csv"), &timings)?;
    Ok(ClassifyOutputs {
        metrics_csv,
        report_txt,
        model_files,
        table,
        timings,
    })
}

fn write_timing_log(
    dir: &Path,
    extract: &[TimingEntry],
    table: &ResultsTable,
) -> StageResult<PathBuf> {
    let mut out = String::new();
    writeln!(
        out,
        "Preprocessing wall-clock seconds (extraction loop only)"
    )
    .unwrap();
    for e in extract {
        writeln!(out, "{:10}  {:7}  {:10.3}", e.dataset, e.variant, e.seconds).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "Classification wall-clock seconds").unwrap();
    out.push_str(&table.render_timing_text());
    let path = dir.join("timing_log.txt");
    fs::write(&path, out)?;
    Ok(path)
}

/// Extract, classify, and write the manifest. A `.partial` marker guards
/// the output directory while the run is in flight; failures leave the
/// marker and whatever outputs already exist, plus a failed-status manifest.
pub fn run_all(config: &RunConfig) -> StageResult<Manifest> {
    config.validate()?;
    fs::create_dir_all(&config.output_dir)?;
    let mut manifest = Manifest::new(config);
    write_partial_marker(&config.output_dir, &manifest.config_hash)?;

    match run_all_inner(config, &mut manifest) {
        Ok(()) => {
            manifest.status = "complete".into();
            manifest.write(&config.output_dir)?;
            clear_partial_marker(&config.output_dir)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = format!("failed: {e}");
            // Best effort: keep partial outputs flagged by the marker.
            let _ = manifest.write(&config.output_dir);
            Err(e)
        }
    }
}

fn run_all_inner(config: &RunConfig, manifest: &mut Manifest) -> StageResult<()> {
    let extracted = run_extract(config)?;
    for warning in &extracted.warnings {
        eprintln!("warning: {warning}");
    }
    let feature_paths: Vec<PathBuf> = extracted
        .feature_files
        .iter()
        .map(|(_, p)| p.clone())
        .collect();
    manifest.add_stage("extract", &feature_paths, &config.output_dir)?;

    let classified = run_classify(config, &extracted.feature_files)?;
    let mut deterministic = vec![
        classified.metrics_csv.clone(),
        classified.report_txt.clone(),
    ];
    deterministic.extend(classified.model_files.iter().cloned());
    manifest.add_stage("classify", &deterministic, &config.output_dir)?;

    write_timing_log(&config.output_dir, &extracted.timings, &classified.table)?;
    Ok(())
}

/// Materialize the synthetic segments as a raw-format CSV for inspection;
/// the same seed reproduces exactly what the pipeline consumes in memory.
pub fn run_synth_gen(config: &RunConfig, out: &Path) -> StageResult<PathBuf> {
    config.validate()?;
    let segments = generate_synthetic(
        &config.synthetic.class_specs(),
        config.synthetic.count_per_class,
        config.synthetic.length,
        config.synthetic.sample_rate,
        config.synthetic.seed,
    )?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_raw_csv(out, &segments)?;
    Ok(out.to_path_buf())
}

/// Rebuild report text from the persisted metrics CSVs in a directory.
/// Every reported number is recomputed from the stored confusion counts.
pub fn run_report(dir: &Path) -> StageResult<String> {
    let mut metric_files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("metrics_") && n.ends_with(".csv"))
        })
        .collect();
    metric_files.sort();
    if metric_files.is_empty() {
        return Err(StageError::data(format!(
            "no metrics_*.csv files in {}",
            dir.display()
        )));
    }
    let mut combined = String::new();
    for path in &metric_files {
        let text = fs::read_to_string(path)?;
        let table = ResultsTable::from_csv(&text)?;
        let rendered = table.render_text()?;
        let name = path.file_name().unwrap().to_string_lossy();
        let tag = name
            .trim_start_matches("metrics_")
            .trim_end_matches(".csv")
            .to_string();
        fs::write(dir.join(format!("report_{tag}.txt")), &rendered)?;
        combined.push_str(&rendered);
    }
    Ok(combined)
}
