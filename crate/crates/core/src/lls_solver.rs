//! Linear least-squares solvers: normal equations for full-rank systems,
//! orthogonal triangularization as the stability path, and an SVD
//! minimum-norm solution for rank-deficient systems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared rank class of a design matrix.
///
/// `FullRank` enables the normal-equations path; `PossiblyDeficient`
/// systems go straight to the SVD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankClass {
    FullRank,
    PossiblyDeficient,
}

/// Dense N×p design matrix with a declared rank class.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub data: DMatrix<f64>,
    pub rank_class: RankClass,
}

impl DesignMatrix {
    /// Wrap a dense matrix, rejecting empty shapes and non-finite entries.
    pub fn new(data: DMatrix<f64>, rank_class: RankClass) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyInput("design matrix"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        Ok(DesignMatrix { data, rank_class })
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    NormalEquations,
    Orthogonal,
    SvdMinNorm,
}

/// Solution of min_x ‖Ax − y‖².
#[derive(Debug, Clone, PartialEq)]
pub struct LlsSolution {
    pub x: DVector<f64>,
    /// ‖Ax − y‖², recomputed from the inputs, never from factor shortcuts.
    pub residual_ssq: f64,
    pub effective_rank: usize,
    pub method: SolveMethod,
}

/// Default relative rank tolerance: max(N, p) · machine epsilon.
pub fn default_rank_tol(nrows: usize, ncols: usize) -> f64 {
    nrows.max(ncols) as f64 * f64::EPSILON
}

fn check_rhs_len(a: &DesignMatrix, y: &DVector<f64>) -> Result<()> {
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "right-hand side",
            expected: a.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}

fn residual_ssq(a: &DesignMatrix, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let r = &a.data * x - y;
    r.norm_squared()
}

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` when a
/// pivot cancels down to rounding noise. The pivot test is relative to the
/// column's own diagonal entry: a column that is merely small keeps a healthy
/// ratio, a linearly dependent column cancels to O(eps) of its diagonal.
fn cholesky_factor(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let p = g.nrows();
    let mut l = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 4.0 * f64::EPSILON * g[(j, j)]) {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..p {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Some(l)
}

fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = l.nrows();
    let mut z = DVector::<f64>::zeros(p);
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

fn back_substitute_transpose(l: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    let p = l.nrows();
    let mut x = DVector::<f64>::zeros(p);
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in (i + 1)..p {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solve (AᵀA)x = Aᵀy by a symmetric positive-definite factorization.
///
/// Requires a `FullRank` design matrix. A numerically singular Gram matrix is
/// an error directing the caller to [`solve_svd_min_norm`]; it is never a
/// silent fallback.
pub fn solve_normal_equations(a: &DesignMatrix, y: &DVector<f64>) -> Result<LlsSolution> {
    if a.rank_class != RankClass::FullRank {
        return Err(Error::InvalidSpec(
            "normal equations require a FullRank design matrix".into(),
        ));
    }
    check_rhs_len(a, y)?;
    if a.nrows() < a.ncols() {
        return Err(Error::InvalidSpec(format!(
            "normal equations require N >= p, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let gram = a.data.tr_mul(&a.data);
    let rhs = a.data.tr_mul(y);
    let l = cholesky_factor(&gram).ok_or(Error::SingularGram)?;
    let z = forward_substitute(&l, &rhs);
    let mut x = back_substitute_transpose(&l, &z);
    // Corrected semi-normal equations: refine against the residual of the
    // least-squares problem itself (length N, no Gram-matrix cancellation).
    // This recovers the accuracy the squared condition number of AᵀA costs.
    for _ in 0..2 {
        let residual = y - &a.data * &x;
        let correction_rhs = a.data.tr_mul(&residual);
        let dz = forward_substitute(&l, &correction_rhs);
        let dx = back_substitute_transpose(&l, &dz);
        let done = dx.norm() <= f64::EPSILON * x.norm();
        x += dx;
        if done {
            break;
        }
    }
    // A factorization that squeaked through on noise-level pivots produces a
    // solution whose residual is no longer orthogonal to the column space;
    // reject it rather than return garbage.
    let r = &a.data * &x - y;
    if a.data.tr_mul(&r).norm() > 1e-6 * a.data.norm() * y.norm() {
        return Err(Error::SingularGram);
    }
    Ok(LlsSolution {
        effective_rank: a.ncols(),
        residual_ssq: r.norm_squared(),
        x,
        method: SolveMethod::NormalEquations,
    })
}

/// Solve the least-squares problem by column-pivoted QR.
///
/// Detected rank deficiency is reported as an error directing the caller to
/// [`solve_svd_min_norm`].
pub fn solve_orthogonal(a: &DesignMatrix, y: &DVector<f64>) -> Result<LlsSolution> {
    check_rhs_len(a, y)?;
    let (n, p) = (a.nrows(), a.ncols());
    let qr = a.data.clone().col_piv_qr();
    let r = qr.r();
    let k = n.min(p);
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    let threshold = default_rank_tol(n, p) * max_diag;
    let rank = (0..k).filter(|&i| r[(i, i)].abs() > threshold).count();
    if rank < p {
        return Err(Error::RankDeficient { rank, cols: p });
    }
    let q = qr.q();
    let apply = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
        let qty = q.tr_mul(rhs);
        let mut w = r
            .solve_upper_triangular(&qty)
            .ok_or(Error::RankDeficient { rank, cols: p })?;
        qr.p().inv_permute_rows(&mut w);
        Ok(w)
    };
    let mut x = apply(y)?;
    for _ in 0..2 {
        let residual = y - &a.data * &x;
        let dx = apply(&residual)?;
        let done = dx.norm() <= f64::EPSILON * x.norm();
        x += dx;
        if done {
            break;
        }
    }
    let residual_ssq = residual_ssq(a, &x, y);
    Ok(LlsSolution {
        effective_rank: p,
        residual_ssq,
        x,
        method: SolveMethod::Orthogonal,
    })
}

/// Minimum-norm least-squares solution via the SVD pseudoinverse.
///
/// Singular values below `rank_tol · σ_max` are treated as zero. An all-zero
/// matrix yields x = 0 with residual ‖y‖², not an error.
pub fn solve_svd_min_norm(
    a: &DesignMatrix,
    y: &DVector<f64>,
    rank_tol: f64,
) -> Result<LlsSolution> {
    if !(rank_tol > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "rank_tol must be positive, got {rank_tol}"
        )));
    }
    check_rhs_len(a, y)?;
    let p = a.ncols();
    let svd = a
        .data
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::NonFinite("SVD did not converge"))?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("Vt requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().copied().fold(0.0_f64, f64::max);

    let mut effective_rank = 0;
    let mut retained = Vec::new();
    if sigma_max > 0.0 {
        let threshold = rank_tol * sigma_max;
        for i in 0..sigma.len() {
            if sigma[i] >= threshold {
                effective_rank += 1;
                retained.push(i);
            }
        }
    }
    let apply_pinv = |rhs: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::<f64>::zeros(p);
        for &i in &retained {
            let coeff = u.column(i).dot(rhs) / sigma[i];
            out.axpy(coeff, &v_t.row(i).transpose(), 1.0);
        }
        out
    };
    let mut x = apply_pinv(y);
    // Refinement through the pseudoinverse keeps every correction inside the
    // retained row space, so the minimum-norm property survives.
    for _ in 0..2 {
        let residual = y - &a.data * &x;
        let dx = apply_pinv(&residual);
        let done = dx.norm() <= f64::EPSILON * x.norm();
        x += dx;
        if done {
            break;
        }
    }
    let residual_ssq = residual_ssq(a, &x, y);
    Ok(LlsSolution {
        x,
        residual_ssq,
        effective_rank,
        method: SolveMethod::SvdMinNorm,
    })
}

/// Spectral condition number σ_max/σ_min; infinite when σ_min vanishes.
pub fn estimate_condition(a: &DesignMatrix) -> f64 {
    let sigma = a.data.clone().singular_values();
    let sigma_max = sigma.iter().copied().fold(0.0_f64, f64::max);
    let sigma_min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    if sigma_min < 1e-300 {
        return f64::INFINITY;
    }
    sigma_max / sigma_min
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn full_rank(data: DMatrix<f64>) -> DesignMatrix {
        DesignMatrix::new(data, RankClass::FullRank).unwrap()
    }

    fn deficient(data: DMatrix<f64>) -> DesignMatrix {
        DesignMatrix::new(data, RankClass::PossiblyDeficient).unwrap()
    }

    fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, k, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        m.qr().q()
    }

    /// N×p matrix with a prescribed singular spectrum.
    fn matrix_with_spectrum(rng: &mut ChaCha8Rng, n: usize, sigmas: &[f64]) -> DMatrix<f64> {
        let p = sigmas.len();
        let u = random_orthonormal(rng, n, p);
        let v = random_orthonormal(rng, p, p);
        let mut s = DMatrix::<f64>::zeros(p, p);
        for (i, &sv) in sigmas.iter().enumerate() {
            s[(i, i)] = sv;
        }
        u * s * v.transpose()
    }

    #[test]
    fn normal_equations_identity() {
        let a = full_rank(DMatrix::identity(3, 3));
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let sol = solve_normal_equations(&a, &y).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(sol.x[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(sol.x[2], 3.0, max_relative = 1e-12);
        assert!(sol.residual_ssq < 1e-24);
        assert_eq!(sol.method, SolveMethod::NormalEquations);
        assert_eq!(sol.effective_rank, 3);
    }

    #[test]
    fn normal_equations_scalar_mean_matches_grid_scan() {
        let a = full_rank(DMatrix::from_vec(2, 1, vec![1.0, 1.0]));
        let y = DVector::from_vec(vec![1.0, 3.0]);
        let sol = solve_normal_equations(&a, &y).unwrap();

        // Independent oracle: exhaustive 1-D scan of the objective.
        let objective = |x: f64| (1.0 - x).powi(2) + (3.0 - x).powi(2);
        let mut best_x = f64::NAN;
        let mut best_obj = f64::INFINITY;
        let steps = (20.0 / 1e-4) as usize;
        for k in 0..=steps {
            let x = -10.0 + k as f64 * 1e-4;
            let obj = objective(x);
            if obj < best_obj {
                best_obj = obj;
                best_x = x;
            }
        }
        assert!((best_x - 2.0).abs() < 1e-9, "scan oracle located {best_x}");
        assert!((sol.x[0] - best_x).abs() <= 1e-4);
        assert_relative_eq!(sol.x[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(sol.residual_ssq, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn normal_equations_consistent_system() {
        let a = full_rank(DMatrix::from_row_slice(
            3,
            2,
            &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ));
        let y = DVector::from_vec(vec![1.0, 1.0, 2.0]);
        let sol = solve_normal_equations(&a, &y).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(sol.x[1], 1.0, max_relative = 1e-12);
        // Substitution check: A·[1,1] reproduces y exactly.
        let reproduced = &a.data * &sol.x;
        for i in 0..3 {
            assert_relative_eq!(reproduced[i], y[i], epsilon = 1e-12);
        }
        assert!(sol.residual_ssq < 1e-20);
    }

    #[test]
    fn singular_gram_is_an_error_not_a_fallback() {
        let a = full_rank(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let y = DVector::from_vec(vec![2.0, 2.0]);
        match solve_normal_equations(&a, &y) {
            Err(Error::SingularGram) => {}
            other => panic!("expected SingularGram, got {other:?}"),
        }
    }

    #[test]
    fn normal_equations_reject_deficient_class() {
        let a = deficient(DMatrix::identity(2, 2));
        let y = DVector::from_vec(vec![1.0, 2.0]);
        assert!(solve_normal_equations(&a, &y).is_err());
    }

    #[test]
    fn orthogonal_identity() {
        let a = full_rank(DMatrix::identity(4, 4));
        let y = DVector::from_vec(vec![4.0, -1.0, 0.5, 2.0]);
        let sol = solve_orthogonal(&a, &y).unwrap();
        for i in 0..4 {
            assert_relative_eq!(sol.x[i], y[i], epsilon = 1e-12);
        }
        assert_eq!(sol.method, SolveMethod::Orthogonal);
    }

    #[test]
    fn orthogonal_agrees_with_normal_equations_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let data = DMatrix::from_fn(50, 6, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let a = full_rank(data);
            let y = DVector::from_fn(50, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let ne = solve_normal_equations(&a, &y).unwrap();
            let qr = solve_orthogonal(&a, &y).unwrap();
            let rel = (&ne.x - &qr.x).norm() / ne.x.norm().max(1e-30);
            assert!(rel <= 1e-8, "methods disagree: relative gap {rel}");
        }
    }

    #[test]
    fn orthogonal_vandermonde_matches_normal_equations_predictions() {
        // Degree-10 Vandermonde on normalized points: the Gram matrix is
        // poorly conditioned but still factorable. A polynomial-plus-noise
        // right-hand side keeps the residual in the regime where the normal
        // equations carry usable digits.
        let n = 100;
        let degree = 10;
        let data = DMatrix::from_fn(n, degree + 1, |i, j| {
            let t = i as f64 / (n - 1) as f64;
            t.powi(j as i32)
        });
        let a = full_rank(data);
        let y = DVector::from_fn(n, |i, _| {
            let t = i as f64 / (n - 1) as f64;
            2.0 * t * t * t - t + 0.25 + 1e-8 * (7.0 * t).sin()
        });
        let ne = solve_normal_equations(&a, &y).unwrap();
        let qr = solve_orthogonal(&a, &y).unwrap();
        let gap = (&a.data * &ne.x - &a.data * &qr.x).norm();
        assert!(
            gap <= 1e-6 * y.norm(),
            "prediction gap {gap} exceeds 1e-6 ||y||"
        );
    }

    #[test]
    fn orthogonal_detects_rank_deficiency() {
        let a = deficient(DMatrix::from_row_slice(
            3,
            2,
            &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0],
        ));
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        match solve_orthogonal(&a, &y) {
            Err(Error::RankDeficient { rank: 1, cols: 2 }) => {}
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn svd_min_norm_splits_symmetric_system() {
        let a = deficient(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        let y = DVector::from_vec(vec![2.0, 2.0]);
        let sol = solve_svd_min_norm(&a, &y, default_rank_tol(2, 2)).unwrap();
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-10);
        assert!(sol.residual_ssq < 1e-20);
        assert_eq!(sol.effective_rank, 1);
    }

    #[test]
    fn svd_unreachable_row_contributes_full_residual() {
        let a = deficient(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let y = DVector::from_vec(vec![3.0, 5.0]);
        let sol = solve_svd_min_norm(&a, &y, default_rank_tol(2, 2)).unwrap();
        assert_relative_eq!(sol.x[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(sol.x[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(sol.residual_ssq, 25.0, max_relative = 1e-12);
    }

    #[test]
    fn svd_zero_matrix_returns_zero_solution() {
        let a = deficient(DMatrix::zeros(3, 2));
        let y = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let sol = solve_svd_min_norm(&a, &y, 1e-12).unwrap();
        assert_eq!(sol.x, DVector::from_vec(vec![0.0, 0.0]));
        assert_relative_eq!(sol.residual_ssq, 9.0, max_relative = 1e-12);
        assert_eq!(sol.effective_rank, 0);
    }

    #[test]
    fn svd_agrees_with_orthogonal_on_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let data = matrix_with_spectrum(&mut rng, 40, &[5.0, 3.0, 1.0, 0.5, 0.01]);
            let a = full_rank(data);
            let y = DVector::from_fn(40, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let qr = solve_orthogonal(&a, &y).unwrap();
            let svd = solve_svd_min_norm(&a, &y, default_rank_tol(40, 5)).unwrap();
            let rel = (&qr.x - &svd.x).norm() / qr.x.norm().max(1e-30);
            assert!(rel <= 1e-8, "relative gap {rel}");
        }
    }

    #[test]
    fn condition_estimates() {
        let id = deficient(DMatrix::identity(3, 3));
        assert_relative_eq!(estimate_condition(&id), 1.0, epsilon = 1e-12);

        let diag = deficient(DMatrix::from_row_slice(2, 2, &[10.0, 0.0, 0.0, 1.0]));
        assert_relative_eq!(estimate_condition(&diag), 10.0, max_relative = 1e-10);

        let near = deficient(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-12]));
        assert!(estimate_condition(&near) >= 1e12);
    }

    #[test]
    fn residual_orthogonality_on_full_rank_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let data = DMatrix::from_fn(30, 4, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let a = full_rank(data);
            let y = DVector::from_fn(30, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            for sol in [
                solve_normal_equations(&a, &y).unwrap(),
                solve_orthogonal(&a, &y).unwrap(),
                solve_svd_min_norm(&a, &y, default_rank_tol(30, 4)).unwrap(),
            ] {
                let atr = a.data.tr_mul(&(&a.data * &sol.x - &y));
                let bound = 1e-6 * a.data.norm() * y.norm();
                assert!(
                    atr.norm() <= bound,
                    "{:?}: residual not orthogonal: {} > {}",
                    sol.method,
                    atr.norm(),
                    bound
                );
            }
        }
    }

    #[test]
    fn min_norm_property_under_null_space_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // Rank-2 matrix in R^{20x5}: columns 2..5 are combinations of the first two.
        let c0 = DVector::from_fn(20, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let c1 = DVector::from_fn(20, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let mut data = DMatrix::<f64>::zeros(20, 5);
        data.set_column(0, &c0);
        data.set_column(1, &c1);
        data.set_column(2, &(&c0 * 2.0 - &c1));
        data.set_column(3, &(&c0 * -1.0 + &c1 * 0.5));
        data.set_column(4, &(&c0 * 0.25));
        let a = deficient(data);
        let y = DVector::from_fn(20, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let sol = solve_svd_min_norm(&a, &y, default_rank_tol(20, 5)).unwrap();
        assert_eq!(sol.effective_rank, 2);

        let svd = a.data.clone().svd(true, true);
        let v_t = svd.v_t.unwrap();
        for _ in 0..20 {
            // Random combination of null-space rows of Vᵀ (indices >= rank).
            let mut z = DVector::<f64>::zeros(5);
            for i in sol.effective_rank..5 {
                z.axpy(
                    rng.random::<f64>() * 2.0 - 1.0,
                    &v_t.row(i).transpose(),
                    1.0,
                );
            }
            let perturbed = &sol.x + &z;
            assert!(perturbed.norm() >= sol.x.norm() - 1e-12);
            let perturbed_rss = (&a.data * &perturbed - &y).norm_squared();
            assert_relative_eq!(perturbed_rss, sol.residual_ssq, max_relative = 1e-8);
        }
    }

    #[test]
    fn recovers_planted_solution_up_to_condition_1e8() {
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        for cond in [1.0_f64, 1e2, 1e5, 1e8] {
            let sigmas: Vec<f64> = (0..6).map(|i| cond.powf(-(i as f64) / 5.0)).collect();
            let data = matrix_with_spectrum(&mut rng, 60, &sigmas);
            let a = full_rank(data);
            let x_true = DVector::from_fn(6, |i, _| (i as f64 + 1.0) * 0.5);
            let y = &a.data * &x_true;
            let sol = solve_orthogonal(&a, &y).unwrap();
            let rel = (&sol.x - &x_true).norm() / x_true.norm();
            assert!(rel <= 1e-6, "cond {cond}: relative error {rel}");
        }
    }

    #[test]
    fn duplicate_column_flips_to_error_or_keeps_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = DMatrix::from_fn(25, 3, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(25, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let a = full_rank(base.clone());
        let reference = solve_orthogonal(&a, &y).unwrap();

        let mut widened = DMatrix::<f64>::zeros(25, 4);
        for j in 0..3 {
            widened.set_column(j, &base.column(j));
        }
        widened.set_column(3, &base.column(1));

        // The full-rank paths must refuse.
        let forced = full_rank(widened.clone());
        assert!(matches!(
            solve_normal_equations(&forced, &y),
            Err(Error::SingularGram)
        ));
        assert!(matches!(
            solve_orthogonal(&forced, &y),
            Err(Error::RankDeficient { .. })
        ));

        // The SVD path keeps the fitted values unchanged.
        let dup = deficient(widened);
        let sol = solve_svd_min_norm(&dup, &y, default_rank_tol(25, 4)).unwrap();
        let pred_gap = (&dup.data * &sol.x - &base * &reference.x).norm();
        assert!(pred_gap <= 1e-8 * y.norm().max(1.0), "gap {pred_gap}");
    }
}
