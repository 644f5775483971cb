//! Amplitude-modulated sinusoid models.
//!
//! A segment y is approximated by `A(t) · sin(2π ω t + τ)`, optionally
//! shifted vertically by a second copy of the amplitude function. The
//! amplitude `A` is either a polynomial or a truncated-power spline. Four
//! variants are supported:
//!
//! | variant | amplitude  | vertical shift | columns  |
//! |---------|------------|----------------|----------|
//! | LLSP1   | polynomial | no             | m+1      |
//! | LLSP2   | polynomial | yes            | 2m+2     |
//! | LLSP3   | spline     | no             | mn+1     |
//! | LLSP4   | spline     | yes            | 2mn+2    |
//!
//! Frequencies are in Hz and enter the carrier as `sin(2π ω t + τ)` with
//! physical sample times `t_i = i / f_s`. The amplitude basis is evaluated
//! on time normalized to [0, 1] (`u_i = i/(N−1)`); a high-degree monomial
//! basis on tens of seconds would be numerically unusable, and the
//! normalization is only a reparameterization of the coefficient vector.
//! Knot positions are mapped affinely from their declared domain onto the
//! normalized span.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lls_solver::{DesignMatrix, RankClass};

/// Strictly increasing interior knots on an explicit domain.
///
/// `n` subintervals require `n − 1` knots; an empty knot list is the
/// polynomial case (`n = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    domain: (f64, f64),
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(domain: (f64, f64), knots: Vec<f64>) -> Result<Self> {
        if !(domain.0.is_finite() && domain.1.is_finite() && domain.0 < domain.1) {
            return Err(Error::InvalidSpec(format!(
                "knot domain must be a finite nonempty interval, got ({}, {})",
                domain.0, domain.1
            )));
        }
        for pair in knots.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidSpec(format!(
                    "knots must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &theta in &knots {
            if !(theta > domain.0 && theta < domain.1) {
                return Err(Error::OutOfDomain {
                    value: theta,
                    min: domain.0,
                    max: domain.1,
                });
            }
        }
        Ok(KnotVector { domain, knots })
    }

    /// No interior knots: the spline degenerates to a single polynomial piece.
    pub fn empty(domain: (f64, f64)) -> Result<Self> {
        KnotVector::new(domain, Vec::new())
    }

    /// `n − 1` equidistant interior knots at k/n of the domain span, k = 1..n−1.
    ///
    /// Endpoints are open so every truncated-power column is nonzero on part
    /// of the domain.
    pub fn equidistant(domain: (f64, f64), subintervals: usize) -> Result<Self> {
        if subintervals == 0 {
            return Err(Error::InvalidSpec("subinterval count must be >= 1".into()));
        }
        let span = domain.1 - domain.0;
        let knots = (1..subintervals)
            .map(|k| domain.0 + span * k as f64 / subintervals as f64)
            .collect();
        KnotVector::new(domain, knots)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn subintervals(&self) -> usize {
        self.knots.len() + 1
    }

    /// Affinely map the knots onto the (0, 1) domain.
    pub fn normalized(&self) -> KnotVector {
        let span = self.domain.1 - self.domain.0;
        KnotVector {
            domain: (0.0, 1.0),
            knots: self
                .knots
                .iter()
                .map(|&t| (t - self.domain.0) / span)
                .collect(),
        }
    }
}

/// Amplitude function family: polynomial of degree m, or degree-m spline
/// with fixed knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AmplitudeSpec {
    Polynomial { degree: usize },
    Spline { degree: usize, knots: KnotVector },
}

impl AmplitudeSpec {
    pub fn polynomial(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidSpec("polynomial degree must be >= 1".into()));
        }
        Ok(AmplitudeSpec::Polynomial { degree })
    }

    pub fn spline(degree: usize, knots: KnotVector) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidSpec("spline degree must be >= 1".into()));
        }
        Ok(AmplitudeSpec::Spline { degree, knots })
    }

    pub fn degree(&self) -> usize {
        match self {
            AmplitudeSpec::Polynomial { degree } | AmplitudeSpec::Spline { degree, .. } => *degree,
        }
    }

    pub fn subintervals(&self) -> usize {
        match self {
            AmplitudeSpec::Polynomial { .. } => 1,
            AmplitudeSpec::Spline { knots, .. } => knots.subintervals(),
        }
    }

    /// m + 1 coefficients for a polynomial, m·n + 1 for a spline.
    pub fn param_count(&self) -> usize {
        self.degree() * self.subintervals() + 1
    }

    /// Same spec with knots mapped onto (0, 1).
    pub fn normalized(&self) -> AmplitudeSpec {
        match self {
            AmplitudeSpec::Polynomial { degree } => AmplitudeSpec::Polynomial { degree: *degree },
            AmplitudeSpec::Spline { degree, knots } => AmplitudeSpec::Spline {
                degree: *degree,
                knots: knots.normalized(),
            },
        }
    }
}

/// Uniformly sampled time axis for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    sample_rate_hz: f64,
    len: usize,
}

impl TimeGrid {
    pub fn new(sample_rate_hz: f64, len: usize) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if len < 2 {
            return Err(Error::InvalidSpec(format!(
                "time grid needs at least 2 samples, got {len}"
            )));
        }
        Ok(TimeGrid {
            sample_rate_hz,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Physical time of sample i, starting at t = 0.
    pub fn physical(&self, i: usize) -> f64 {
        i as f64 / self.sample_rate_hz
    }

    /// Time of sample i mapped onto [0, 1].
    pub fn normalized(&self, i: usize) -> f64 {
        i as f64 / (self.len - 1) as f64
    }

    pub fn duration(&self) -> f64 {
        self.physical(self.len - 1)
    }
}

/// The four wave-model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LlspVariant {
    Llsp1,
    Llsp2,
    Llsp3,
    Llsp4,
}

impl LlspVariant {
    pub const ALL: [LlspVariant; 4] = [
        LlspVariant::Llsp1,
        LlspVariant::Llsp2,
        LlspVariant::Llsp3,
        LlspVariant::Llsp4,
    ];

    /// LLSP3/4 use a spline amplitude, LLSP1/2 a polynomial.
    pub fn requires_spline(self) -> bool {
        matches!(self, LlspVariant::Llsp3 | LlspVariant::Llsp4)
    }

    /// LLSP2/4 add a vertical shift formed by a second amplitude block.
    pub fn has_shift(self) -> bool {
        matches!(self, LlspVariant::Llsp2 | LlspVariant::Llsp4)
    }

    /// Total coefficient count for a given amplitude spec.
    pub fn param_count(self, amplitude: &AmplitudeSpec) -> usize {
        amplitude.param_count() * if self.has_shift() { 2 } else { 1 }
    }

    pub fn rank_class(self) -> RankClass {
        if self.has_shift() {
            RankClass::PossiblyDeficient
        } else {
            RankClass::FullRank
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LlspVariant::Llsp1 => "llsp1",
            LlspVariant::Llsp2 => "llsp2",
            LlspVariant::Llsp3 => "llsp3",
            LlspVariant::Llsp4 => "llsp4",
        }
    }
}

impl std::str::FromStr for LlspVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "llsp1" => Ok(LlspVariant::Llsp1),
            "llsp2" => Ok(LlspVariant::Llsp2),
            "llsp3" => Ok(LlspVariant::Llsp3),
            "llsp4" => Ok(LlspVariant::Llsp4),
            other => Err(Error::InvalidSpec(format!("unknown variant {other:?}"))),
        }
    }
}

/// One wave model at a fixed grid point (ω, τ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveModelSpec {
    pub variant: LlspVariant,
    pub amplitude: AmplitudeSpec,
    pub omega_hz: f64,
    pub tau: f64,
}

impl WaveModelSpec {
    pub fn new(
        variant: LlspVariant,
        amplitude: AmplitudeSpec,
        omega_hz: f64,
        tau: f64,
    ) -> Result<Self> {
        let is_spline = matches!(amplitude, AmplitudeSpec::Spline { .. });
        if variant.requires_spline() != is_spline {
            return Err(Error::InvalidSpec(format!(
                "{} requires a {} amplitude",
                variant.name(),
                if variant.requires_spline() {
                    "spline"
                } else {
                    "polynomial"
                }
            )));
        }
        if !omega_hz.is_finite() || !tau.is_finite() {
            return Err(Error::NonFinite("wave model omega/tau"));
        }
        Ok(WaveModelSpec {
            variant,
            amplitude,
            omega_hz,
            tau,
        })
    }

    pub fn param_count(&self) -> usize {
        self.variant.param_count(&self.amplitude)
    }

    /// Carrier value sin(2π ω t + τ) at physical time t.
    pub fn carrier(&self, t: f64) -> f64 {
        (2.0 * std::f64::consts::PI * self.omega_hz * t + self.tau).sin()
    }
}

/// Truncated power function (t − θ)₊^j = max(0, t − θ)^j, for j ≥ 1.
pub fn truncated_power(t: f64, theta: f64, j: u32) -> f64 {
    (t - theta).max(0.0).powi(j as i32)
}

/// Evaluate x₀ + Σ x_j tʲ by Horner's scheme; x has m + 1 entries.
pub fn eval_polynomial(x: &[f64], t: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "polynomial coefficients",
            expected: 1,
            got: 0,
        });
    }
    let mut acc = 0.0;
    for &coeff in x.iter().rev() {
        acc = acc * t + coeff;
    }
    Ok(acc)
}

/// Evaluate a truncated-power spline at `t` in the knots' own coordinates.
///
/// The coefficient layout is `[x₀, x_{1,1..m}, x_{2,1..m}, …, x_{n,1..m}]`:
/// the global polynomial first, then one block of m truncated-power
/// coefficients per interior knot.
pub fn eval_spline(x: &[f64], spec: &AmplitudeSpec, t: f64) -> Result<f64> {
    let AmplitudeSpec::Spline { degree, knots } = spec else {
        return Err(Error::InvalidSpec(
            "eval_spline requires a spline amplitude spec".into(),
        ));
    };
    let m = *degree;
    let expected = spec.param_count();
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "spline coefficients",
            expected,
            got: x.len(),
        });
    }
    let (d0, d1) = knots.domain();
    let slack = 1e-12 * (d1 - d0);
    if t < d0 - slack || t > d1 + slack {
        return Err(Error::OutOfDomain {
            value: t,
            min: d0,
            max: d1,
        });
    }

    let mut value = eval_polynomial(&x[..=m], t)?;
    for (l, &theta) in knots.knots().iter().enumerate() {
        let base = (t - theta).max(0.0);
        if base > 0.0 {
            let block = &x[1 + m * (l + 1)..1 + m * (l + 2)];
            let mut power = 1.0;
            for &coeff in block {
                power *= base;
                value += coeff * power;
            }
        }
    }
    Ok(value)
}

/// Evaluate either amplitude family with its canonical coefficient layout.
pub fn eval_amplitude(x: &[f64], spec: &AmplitudeSpec, t: f64) -> Result<f64> {
    match spec {
        AmplitudeSpec::Polynomial { .. } => {
            let expected = spec.param_count();
            if x.len() != expected {
                return Err(Error::DimensionMismatch {
                    context: "polynomial coefficients",
                    expected,
                    got: x.len(),
                });
            }
            eval_polynomial(x, t)
        }
        AmplitudeSpec::Spline { .. } => eval_spline(x, spec, t),
    }
}

/// Amplitude basis columns evaluated on the normalized time grid.
///
/// Shared by every grid point of a frequency/phase scan: only the carrier
/// weights change with (ω, τ), the basis does not.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeBasis {
    columns: nalgebra::DMatrix<f64>,
}

impl AmplitudeBasis {
    pub fn build(amplitude: &AmplitudeSpec, grid: &TimeGrid) -> Result<Self> {
        let spec = amplitude.normalized();
        let m = spec.degree();
        let k = spec.param_count();
        let n = grid.len();
        let mut columns = nalgebra::DMatrix::<f64>::zeros(n, k);
        let knots: &[f64] = match &spec {
            AmplitudeSpec::Polynomial { .. } => &[],
            AmplitudeSpec::Spline { knots, .. } => knots.knots(),
        };
        for i in 0..n {
            let u = grid.normalized(i);
            columns[(i, 0)] = 1.0;
            let mut power = 1.0;
            for j in 1..=m {
                power *= u;
                columns[(i, j)] = power;
            }
            for (l, &theta) in knots.iter().enumerate() {
                let base = (u - theta).max(0.0);
                let mut tp = 1.0;
                for j in 1..=m {
                    tp *= base;
                    columns[(i, 1 + m * (l + 1) + (j - 1))] = tp;
                }
            }
        }
        Ok(AmplitudeBasis { columns })
    }

    pub fn nrows(&self) -> usize {
        self.columns.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &nalgebra::DMatrix<f64> {
        &self.columns
    }
}

/// Assemble the design matrix for one grid point, reusing a prebuilt basis.
///
/// LLSP1/3 rows are the amplitude basis scaled by α_i = sin(2π ω t_i + τ);
/// LLSP2/4 append the unscaled basis as the vertical-shift block.
pub fn assemble_design(
    spec: &WaveModelSpec,
    grid: &TimeGrid,
    basis: &AmplitudeBasis,
) -> Result<DesignMatrix> {
    if basis.nrows() != grid.len() || basis.ncols() != spec.amplitude.param_count() {
        return Err(Error::InvalidSpec(format!(
            "amplitude basis shape {}x{} does not match grid length {} and parameter count {}",
            basis.nrows(),
            basis.ncols(),
            grid.len(),
            spec.amplitude.param_count()
        )));
    }
    let n = grid.len();
    let k = basis.ncols();
    let p = spec.param_count();
    if p > n {
        return Err(Error::InvalidSpec(format!(
            "parameter count {p} exceeds segment length {n}"
        )));
    }
    let mut data = nalgebra::DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        let alpha = spec.carrier(grid.physical(i));
        for j in 0..k {
            data[(i, j)] = alpha * basis.columns()[(i, j)];
        }
        if spec.variant.has_shift() {
            for j in 0..k {
                data[(i, k + j)] = basis.columns()[(i, j)];
            }
        }
    }
    DesignMatrix::new(data, spec.variant.rank_class())
}

/// Build the N×p design matrix for one wave model on one time grid.
pub fn build_design_matrix(spec: &WaveModelSpec, grid: &TimeGrid) -> Result<DesignMatrix> {
    let basis = AmplitudeBasis::build(&spec.amplitude, grid)?;
    assemble_design(spec, grid, &basis)
}

/// Model values at every grid sample for a given coefficient vector.
///
/// This is the evaluation route paired with `build_design_matrix`: for every
/// coefficient vector the two agree on the fitted values.
pub fn predict_series(spec: &WaveModelSpec, params: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    let p = spec.param_count();
    if params.len() != p {
        return Err(Error::DimensionMismatch {
            context: "model coefficients",
            expected: p,
            got: params.len(),
        });
    }
    let amp_spec = spec.amplitude.normalized();
    let k = amp_spec.param_count();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let u = grid.normalized(i);
        let alpha = spec.carrier(grid.physical(i));
        let mut value = eval_amplitude(&params[..k], &amp_spec, u)? * alpha;
        if spec.variant.has_shift() {
            value += eval_amplitude(&params[k..], &amp_spec, u)?;
        }
        out.push(value);
    }
    Ok(out)
}
