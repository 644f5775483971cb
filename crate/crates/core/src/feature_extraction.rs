//! Per-segment feature extraction: scan the (ω, τ) grid, solve the least
//! squares problem at every grid point, and keep the minimizer.
//!
//! A feature vector is `[objective, ω, τ, amplitude parameters…]`, giving
//! 52 features for LLSP1/3 (49 coefficients) and 101 for LLSP2/4.

use std::io::{BufRead, Write};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data_ingest::Segment;
use crate::error::{Error, Result};
use crate::label::ClassLabel;
use crate::lls_solver::{
    default_rank_tol, estimate_condition, solve_normal_equations, solve_orthogonal,
    solve_svd_min_norm, LlsSolution,
};
use crate::signal_model::{
    assemble_design, AmplitudeBasis, AmplitudeSpec, KnotVector, LlspVariant, TimeGrid,
    WaveModelSpec,
};

/// Full-rank solves switch from normal equations to the orthogonal path when
/// the design-matrix condition number exceeds this bound. Beyond it the Gram
/// matrix carries no trustworthy digits in f64.
pub const CONDITION_ROUTING_LIMIT: f64 = 1e8;

/// Frequency/phase search grid. Values are `start + k·step` for k = 0, 1, …
/// while they stay within `end + 1e−12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega_start_hz: f64,
    pub omega_end_hz: f64,
    pub omega_step_hz: f64,
    pub tau_start: f64,
    pub tau_end: f64,
    pub tau_step: f64,
}

const GRID_END_SLACK: f64 = 1e-12;

fn arithmetic_values(start: f64, end: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidSpec(format!("{what} step must be positive")));
    }
    if !(start.is_finite() && end.is_finite() && start <= end) {
        return Err(Error::InvalidSpec(format!(
            "{what} range [{start}, {end}] is invalid"
        )));
    }
    if (end - start) / step > 1e6 {
        return Err(Error::InvalidSpec(format!("{what} grid is absurdly fine")));
    }
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let value = start + k as f64 * step;
        if value > end + GRID_END_SLACK {
            break;
        }
        out.push(value);
        k += 1;
    }
    Ok(out)
}

impl GridSpec {
    /// Band-pass-matched defaults: ω from 0.53 Hz to 40 Hz in 1 Hz steps
    /// (40 values, 0.53…39.53) and τ from 0 to π in π/4 steps (5 values).
    pub fn band_pass_default() -> Self {
        GridSpec {
            omega_start_hz: 0.53,
            omega_end_hz: 40.0,
            omega_step_hz: 1.0,
            tau_start: 0.0,
            tau_end: std::f64::consts::PI,
            tau_step: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn omega_values(&self) -> Result<Vec<f64>> {
        arithmetic_values(
            self.omega_start_hz,
            self.omega_end_hz,
            self.omega_step_hz,
            "omega",
        )
    }

    pub fn tau_values(&self) -> Result<Vec<f64>> {
        arithmetic_values(self.tau_start, self.tau_end, self.tau_step, "tau")
    }

    /// All grid points in ω-major, τ-minor scan order.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        let omegas = self.omega_values()?;
        let taus = self.tau_values()?;
        if omegas.is_empty() || taus.is_empty() {
            return Err(Error::EmptyInput("grid"));
        }
        let mut out = Vec::with_capacity(omegas.len() * taus.len());
        for &omega in &omegas {
            for &tau in &taus {
                out.push((omega, tau));
            }
        }
        Ok(out)
    }
}

/// Default amplitude specs: degree-48 polynomial for LLSP1/2 so the
/// coefficient count matches the degree-4, 12-subinterval spline of LLSP3/4.
pub fn default_amplitude(variant: LlspVariant) -> Result<AmplitudeSpec> {
    if variant.requires_spline() {
        AmplitudeSpec::spline(4, KnotVector::equidistant((0.0, 1.0), 12)?)
    } else {
        AmplitudeSpec::polynomial(48)
    }
}

/// Optimal grid point and its solution for one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub segment_id: String,
    pub label: ClassLabel,
    /// Residual sum of squares at the optimal grid point.
    pub objective: f64,
    pub omega_hz: f64,
    pub tau: f64,
    pub amplitude_params: Vec<f64>,
}

impl FeatureVector {
    /// 3 + coefficient count: 52 for LLSP1/3, 101 for LLSP2/4.
    pub fn feature_count(&self) -> usize {
        3 + self.amplitude_params.len()
    }

    /// Numeric row in CSV column order.
    pub fn as_row(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.feature_count());
        row.push(self.objective);
        row.push(self.omega_hz);
        row.push(self.tau);
        row.extend_from_slice(&self.amplitude_params);
        row
    }

    pub fn feature_names(param_count: usize) -> Vec<String> {
        let mut names = vec!["objective".into(), "omega".into(), "tau".into()];
        names.extend((0..param_count).map(|i| format!("p{i}")));
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SolverRoute {
    NormalEquations,
    Orthogonal,
    SvdMinNorm,
}

/// Pick the solver for a whole grid scan.
///
/// Shift variants always take the SVD. For LLSP1/3 the condition number is
/// estimated once at a mid-grid representative point; estimating it per grid
/// point would cost more than the solves themselves. When even the
/// orthogonal path flags the probe matrix as numerically rank-deficient
/// (degree-48 monomial bases do this), the scan honours that redirection and
/// uses the SVD minimum-norm solver.
fn choose_route(
    variant: LlspVariant,
    amplitude: &AmplitudeSpec,
    grid: &TimeGrid,
    basis: &AmplitudeBasis,
    points: &[(f64, f64)],
    y: &DVector<f64>,
) -> Result<SolverRoute> {
    if variant.has_shift() {
        return Ok(SolverRoute::SvdMinNorm);
    }
    let (omega, tau) = points[points.len() / 2];
    let spec = WaveModelSpec::new(variant, amplitude.clone(), omega, tau)?;
    let probe = assemble_design(&spec, grid, basis)?;
    if estimate_condition(&probe) <= CONDITION_ROUTING_LIMIT {
        return Ok(SolverRoute::NormalEquations);
    }
    match solve_orthogonal(&probe, y) {
        Ok(_) => Ok(SolverRoute::Orthogonal),
        Err(Error::RankDeficient { .. }) => Ok(SolverRoute::SvdMinNorm),
        Err(other) => Err(other),
    }
}

fn solve_at(
    route: SolverRoute,
    matrix: &crate::lls_solver::DesignMatrix,
    y: &DVector<f64>,
) -> Result<LlsSolution> {
    match route {
        SolverRoute::NormalEquations => solve_normal_equations(matrix, y),
        SolverRoute::Orthogonal => solve_orthogonal(matrix, y),
        SolverRoute::SvdMinNorm => {
            solve_svd_min_norm(matrix, y, default_rank_tol(matrix.nrows(), matrix.ncols()))
        }
    }
}

/// Grid-search one segment under one variant.
///
/// Ties on the objective resolve to the first grid point in ω-major,
/// τ-minor scan order (strict-less argmin over the ordered scan).
pub fn extract_features(
    segment: &Segment,
    variant: LlspVariant,
    grid: &GridSpec,
    amplitude: &AmplitudeSpec,
) -> Result<FeatureVector> {
    let points = grid.points()?;
    let time_grid = segment.time_grid()?;
    let basis = AmplitudeBasis::build(amplitude, &time_grid)?;
    let y = DVector::from_column_slice(&segment.samples);
    let route = choose_route(variant, amplitude, &time_grid, &basis, &points, &y)?;

    let mut best: Option<(f64, f64, LlsSolution)> = None;
    for &(omega, tau) in &points {
        let spec = WaveModelSpec::new(variant, amplitude.clone(), omega, tau)?;
        let matrix = assemble_design(&spec, &time_grid, &basis)
            .map_err(|e| e.at_grid_point(&segment.id, omega, tau))?;
        let solution =
            solve_at(route, &matrix, &y).map_err(|e| e.at_grid_point(&segment.id, omega, tau))?;
        let better = match &best {
            None => true,
            Some((_, _, incumbent)) => solution.residual_ssq < incumbent.residual_ssq,
        };
        if better {
            best = Some((omega, tau, solution));
        }
    }
    let (omega_hz, tau, solution) = best.expect("grid is nonempty");
    Ok(FeatureVector {
        segment_id: segment.id.clone(),
        label: segment.label,
        objective: solution.residual_ssq,
        omega_hz,
        tau,
        amplitude_params: solution.x.iter().copied().collect(),
    })
}

/// Reconstruct the fitted series from a feature vector.
pub fn reconstruct_fit(
    feature: &FeatureVector,
    variant: LlspVariant,
    amplitude: &AmplitudeSpec,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let spec = WaveModelSpec::new(variant, amplitude.clone(), feature.omega_hz, feature.tau)?;
    crate::signal_model::predict_series(&spec, &feature.amplitude_params, grid)
}

fn identify(err: Error, segment_id: &str) -> Error {
    match err {
        e @ Error::Extraction { .. } => e,
        other => Error::Data(format!("segment {segment_id}: {other}")),
    }
}

/// Extract every segment on a worker pool of the given size.
///
/// Output order matches input order and every element is bit-identical to
/// the single-segment result regardless of the worker count.
pub fn extract_dataset(
    segments: &[Segment],
    variant: LlspVariant,
    grid: &GridSpec,
    amplitude: &AmplitudeSpec,
    workers: usize,
) -> Result<Vec<FeatureVector>> {
    if segments.is_empty() {
        return Err(Error::EmptyInput("segment list"));
    }
    if workers == 0 {
        return Err(Error::InvalidSpec("worker count must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Data(format!("worker pool: {e}")))?;
    pool.install(|| {
        segments
            .par_iter()
            .map(|segment| {
                extract_features(segment, variant, grid, amplitude)
                    .map_err(|e| identify(e, &segment.id))
            })
            .collect()
    })
}

/// Arithmetic mean of the recovered ω over the selected feature vectors.
pub fn mean_frequency<F>(features: &[FeatureVector], select: F) -> Result<f64>
where
    F: Fn(&FeatureVector) -> bool,
{
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in features.iter().filter(|f| select(f)) {
        sum += f.omega_hz;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("mean-frequency selection"));
    }
    Ok(sum / count as f64)
}

/// Write the feature CSV: `segment_id,label,objective,omega,tau,p0..p{K-1}`.
///
/// Floats are written in Rust's shortest round-trip form, which preserves
/// every bit on re-parse (beyond 15 significant digits).
pub fn write_features_csv<W: Write>(mut w: W, features: &[FeatureVector]) -> Result<()> {
    let first = features
        .first()
        .ok_or(Error::EmptyInput("feature vectors"))?;
    let param_count = first.amplitude_params.len();
    let names = FeatureVector::feature_names(param_count);
    writeln!(w, "segment_id,label,{}", names.join(","))?;
    for f in features {
        if f.amplitude_params.len() != param_count {
            return Err(Error::CsvSchema(format!(
                "segment {} has {} parameters, expected {param_count}",
                f.segment_id,
                f.amplitude_params.len()
            )));
        }
        let row: Vec<String> = f.as_row().iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{},{},{}", f.segment_id, f.label, row.join(","))?;
    }
    Ok(())
}

/// Parse a feature CSV written by [`write_features_csv`].
pub fn read_features_csv<R: BufRead>(reader: R) -> Result<Vec<FeatureVector>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or(Error::EmptyInput("feature CSV"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 6 || columns[..5] != ["segment_id", "label", "objective", "omega", "tau"] {
        return Err(Error::CsvSchema(format!(
            "unexpected feature CSV header: {header:?}"
        )));
    }
    let param_count = columns.len() - 5;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::CsvSchema(format!(
                "feature CSV line {}: expected {} fields, got {}",
                lineno + 2,
                columns.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::CsvSchema(format!("cannot parse value {s:?}")))
        };
        out.push(FeatureVector {
            segment_id: fields[0].to_owned(),
            label: fields[1].parse()?,
            objective: parse(fields[2])?,
            omega_hz: parse(fields[3])?,
            tau: parse(fields[4])?,
            amplitude_params: fields[5..]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<Vec<f64>>>()?,
        });
        debug_assert_eq!(out.last().unwrap().amplitude_params.len(), param_count);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_ingest::{SetTag, SyntheticClassSpec};
    use approx::assert_relative_eq;

    fn planted_segment(freq: f64, phase: f64, length: usize) -> Segment {
        let classes = [SyntheticClassSpec {
            label: ClassLabel::Seizure,
            frequency_hz: freq,
            phase,
            amplitude_poly: vec![3.0],
            noise_sigma: 0.0,
        }];
        crate::data_ingest::generate_synthetic(&classes, 1, length, 173.61, 0)
            .unwrap()
            .remove(0)
    }

    fn small_grid() -> GridSpec {
        GridSpec {
            omega_start_hz: 4.53,
            omega_end_hz: 6.53,
            omega_step_hz: 1.0,
            tau_start: 0.0,
            tau_end: std::f64::consts::FRAC_PI_2,
            tau_step: std::f64::consts::FRAC_PI_2,
        }
    }

    #[test]
    fn band_pass_grid_has_200_points() {
        let grid = GridSpec::band_pass_default();
        let omegas = grid.omega_values().unwrap();
        let taus = grid.tau_values().unwrap();
        assert_eq!(omegas.len(), 40);
        assert_eq!(taus.len(), 5);
        assert_eq!(grid.points().unwrap().len(), 200);
        assert_relative_eq!(omegas[0], 0.53);
        assert_relative_eq!(omegas[39], 39.53);
        assert_relative_eq!(taus[4], std::f64::consts::PI);
    }

    #[test]
    fn recovers_planted_grid_point() {
        let segment = planted_segment(5.53, 0.0, 128);
        let amp = AmplitudeSpec::polynomial(4).unwrap();
        let f = extract_features(&segment, LlspVariant::Llsp1, &small_grid(), &amp).unwrap();
        assert_eq!(f.omega_hz, 5.53);
        assert_eq!(f.tau, 0.0);
        let energy: f64 = segment.samples.iter().map(|v| v * v).sum();
        assert!(
            f.objective <= 1e-6 * energy,
            "objective {} too large",
            f.objective
        );

        // Oracle: the residual at the planted grid point itself.
        let time_grid = segment.time_grid().unwrap();
        let spec = WaveModelSpec::new(LlspVariant::Llsp1, amp.clone(), 5.53, 0.0).unwrap();
        let dm = crate::signal_model::build_design_matrix(&spec, &time_grid).unwrap();
        let y = DVector::from_column_slice(&segment.samples);
        let planted = solve_orthogonal(&dm, &y).unwrap();
        assert!(f.objective <= planted.residual_ssq + 1e-12);
    }

    #[test]
    fn zero_signal_yields_zero_objective_and_params() {
        let segment = Segment::new(SetTag::A, 1, 173.61, vec![0.0; 64]).unwrap();
        for variant in LlspVariant::ALL {
            let amp = if variant.requires_spline() {
                AmplitudeSpec::spline(2, KnotVector::equidistant((0.0, 1.0), 3).unwrap()).unwrap()
            } else {
                AmplitudeSpec::polynomial(3).unwrap()
            };
            let f = extract_features(&segment, variant, &small_grid(), &amp).unwrap();
            assert_eq!(f.objective, 0.0, "{}", variant.name());
            assert!(f.amplitude_params.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn objective_is_grid_minimum() {
        let segment = planted_segment(5.0, 0.4, 96);
        let amp = AmplitudeSpec::polynomial(3).unwrap();
        let grid = small_grid();
        let f = extract_features(&segment, LlspVariant::Llsp1, &grid, &amp).unwrap();
        let time_grid = segment.time_grid().unwrap();
        let y = DVector::from_column_slice(&segment.samples);
        for (omega, tau) in grid.points().unwrap() {
            let spec = WaveModelSpec::new(LlspVariant::Llsp1, amp.clone(), omega, tau).unwrap();
            let dm = crate::signal_model::build_design_matrix(&spec, &time_grid).unwrap();
            let sol = solve_orthogonal(&dm, &y).unwrap();
            assert!(
                f.objective <= sol.residual_ssq + 1e-9 * (1.0 + sol.residual_ssq),
                "grid point ({omega}, {tau}) beats the reported optimum"
            );
        }
    }

    #[test]
    fn reconstruction_reproduces_objective() {
        let segment = planted_segment(6.0, 0.9, 80);
        let grid = small_grid();
        for variant in LlspVariant::ALL {
            let amp = if variant.requires_spline() {
                AmplitudeSpec::spline(2, KnotVector::equidistant((0.0, 1.0), 4).unwrap()).unwrap()
            } else {
                AmplitudeSpec::polynomial(5).unwrap()
            };
            let f = extract_features(&segment, variant, &grid, &amp).unwrap();
            let fitted = reconstruct_fit(&f, variant, &amp, &segment.time_grid().unwrap()).unwrap();
            let rss: f64 = segment
                .samples
                .iter()
                .zip(&fitted)
                .map(|(y, yhat)| (y - yhat).powi(2))
                .sum();
            assert_relative_eq!(rss, f.objective, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn default_dimensions_are_52_and_101() {
        let segment = planted_segment(5.53, 0.2, 128);
        let tiny = GridSpec {
            omega_start_hz: 5.53,
            omega_end_hz: 5.53,
            omega_step_hz: 1.0,
            tau_start: 0.0,
            tau_end: 0.0,
            tau_step: 1.0,
        };
        for (variant, expected) in [
            (LlspVariant::Llsp1, 52),
            (LlspVariant::Llsp2, 101),
            (LlspVariant::Llsp3, 52),
            (LlspVariant::Llsp4, 101),
        ] {
            let amp = default_amplitude(variant).unwrap();
            let f = extract_features(&segment, variant, &tiny, &amp).unwrap();
            assert_eq!(f.feature_count(), expected, "{}", variant.name());
        }
    }

    #[test]
    fn shift_variant_objective_never_exceeds_base() {
        let segment = planted_segment(4.8, 1.2, 72);
        let time_grid = segment.time_grid().unwrap();
        let y = DVector::from_column_slice(&segment.samples);
        let poly = AmplitudeSpec::polynomial(4).unwrap();
        let spline =
            AmplitudeSpec::spline(2, KnotVector::equidistant((0.0, 1.0), 4).unwrap()).unwrap();
        for (base_variant, shift_variant, amp) in [
            (LlspVariant::Llsp1, LlspVariant::Llsp2, poly),
            (LlspVariant::Llsp3, LlspVariant::Llsp4, spline),
        ] {
            for (omega, tau) in small_grid().points().unwrap() {
                let base = WaveModelSpec::new(base_variant, amp.clone(), omega, tau).unwrap();
                let shifted = WaveModelSpec::new(shift_variant, amp.clone(), omega, tau).unwrap();
                let base_dm = crate::signal_model::build_design_matrix(&base, &time_grid).unwrap();
                let shift_dm =
                    crate::signal_model::build_design_matrix(&shifted, &time_grid).unwrap();
                let base_sol = solve_orthogonal(&base_dm, &y).unwrap();
                let shift_sol =
                    solve_svd_min_norm(&shift_dm, &y, default_rank_tol(72, shift_dm.ncols()))
                        .unwrap();
                assert!(
                    shift_sol.residual_ssq <= base_sol.residual_ssq * (1.0 + 1e-9) + 1e-9,
                    "{} lost to {} at ({omega}, {tau})",
                    shift_variant.name(),
                    base_variant.name()
                );
            }
        }
    }

    #[test]
    fn dataset_extraction_matches_single_segment_bit_for_bit() {
        let classes = [
            SyntheticClassSpec {
                label: ClassLabel::NonSeizure,
                frequency_hz: 4.53,
                phase: 0.0,
                amplitude_poly: vec![1.0],
                noise_sigma: 0.2,
            },
            SyntheticClassSpec {
                label: ClassLabel::Seizure,
                frequency_hz: 6.53,
                phase: 0.0,
                amplitude_poly: vec![2.0],
                noise_sigma: 0.2,
            },
        ];
        let segments = crate::data_ingest::generate_synthetic(&classes, 3, 64, 173.61, 5).unwrap();
        let amp = AmplitudeSpec::polynomial(3).unwrap();
        let grid = small_grid();
        let batch1 = extract_dataset(&segments, LlspVariant::Llsp1, &grid, &amp, 1).unwrap();
        let batch4 = extract_dataset(&segments, LlspVariant::Llsp1, &grid, &amp, 4).unwrap();
        assert_eq!(batch1, batch4, "worker count changed the output");
        for (segment, feature) in segments.iter().zip(&batch1) {
            let single = extract_features(segment, LlspVariant::Llsp1, &grid, &amp).unwrap();
            assert_eq!(&single, feature);
            assert_eq!(single.segment_id, segment.id);
        }
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let amp = AmplitudeSpec::polynomial(3).unwrap();
        assert!(matches!(
            extract_dataset(&[], LlspVariant::Llsp1, &small_grid(), &amp, 2),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn mean_frequency_examples() {
        let mk = |id: &str, omega: f64| FeatureVector {
            segment_id: id.into(),
            label: ClassLabel::NonSeizure,
            objective: 0.0,
            omega_hz: omega,
            tau: 0.0,
            amplitude_params: vec![0.0],
        };
        let single = [mk("A001", 4.85)];
        assert_relative_eq!(mean_frequency(&single, |_| true).unwrap(), 4.85);
        let pair = [mk("A001", 0.53), mk("A002", 1.53)];
        assert_relative_eq!(mean_frequency(&pair, |_| true).unwrap(), 1.03);
        assert!(mean_frequency(&pair, |_| false).is_err());
    }

    #[test]
    fn feature_csv_round_trips_exactly() {
        let features = vec![
            FeatureVector {
                segment_id: "A001".into(),
                label: ClassLabel::NonSeizure,
                objective: 1234.567890123456789,
                omega_hz: 5.53,
                tau: std::f64::consts::FRAC_PI_4,
                amplitude_params: vec![1.0 / 3.0, -2.5e-17, 7.25],
            },
            FeatureVector {
                segment_id: "E077".into(),
                label: ClassLabel::Seizure,
                objective: 9.871234e8,
                omega_hz: 39.53,
                tau: std::f64::consts::PI,
                amplitude_params: vec![0.0, 1e300, -4.9e-300],
            },
        ];
        let mut buf = Vec::new();
        write_features_csv(&mut buf, &features).unwrap();
        let parsed = read_features_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed, features);
    }

    #[test]
    fn feature_csv_rejects_wrong_header() {
        let bad = "id,label,objective\nA001,NonSeizure,1.0\n";
        assert!(matches!(
            read_features_csv(bad.as_bytes()),
            Err(Error::CsvSchema(_))
        ));
    }
}
