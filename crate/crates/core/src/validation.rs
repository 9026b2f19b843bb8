//! Numerical checks of properties that are argued rather than computed:
//! symmetry and concavity of `Q_E`, the mixed-isometry construction, and the
//! random search for improvements on conjectured optimal pairs.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    b_from_e, diagonalize, e_from_b, extract_e_vectors, tetrahedron_check, AffineBlochMap, EVectors, GramMatrixE,
    IsometryMap, Output,
};
use crate::error::{Error, Result};
use crate::optimizer::{b_from_beta, beta_from_b, g_map, good_region_check};
use crate::pauli::LTensor;
use crate::quality::{quality_c, quality_e_closed_form, quality_e_vectors, ModeVector};
use crate::sampling::{self, trial_rng};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanRegion {
    /// `b` satisfying `0 ≤ b_q ≤ 1` and `b_q ≥ b_{q'}b_{q''}`.
    Good,
    /// `b` in the unit cube and the tetrahedron but outside the good region.
    Outside,
}

/// Sizes used by the original experiment.
pub const FULL_SCALE: (usize, usize) = (4000, 100_000);
/// Default desk-scale sizes.
pub const DESK_SCALE: (usize, usize) = (100, 1000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_outer: usize,
    /// Accepted `b̆` samples per `b`.
    pub n_inner: usize,
    pub seed: u64,
    pub region: ScanRegion,
    /// Cap on proposals per `b`, as a multiple of `n_inner`.
    pub attempt_factor: usize,
}

impl ScanConfig {
    pub fn new(region: ScanRegion, n_outer: usize, n_inner: usize, seed: u64) -> Self {
        ScanConfig { n_outer, n_inner, seed, region, attempt_factor: 200 }
    }

    pub fn desk(region: ScanRegion, seed: u64) -> Self {
        Self::new(region, DESK_SCALE.0, DESK_SCALE.1, seed)
    }

    pub fn full(region: ScanRegion, seed: u64) -> Self {
        Self::new(region, FULL_SCALE.0, FULL_SCALE.1, seed)
    }
}

/// A pair `b̆ > b` with `G(b̆) ≥ G(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub outer_index: usize,
    pub b: [f64; 3],
    pub b_breve: [f64; 3],
    pub g_b: [f64; 3],
    pub g_b_breve: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub violations: Vec<Violation>,
    pub outer_trials: usize,
    pub inner_accepted: u64,
    pub inner_attempts: u64,
    /// Wall-clock time; not part of the serialized data.
    #[serde(skip)]
    pub elapsed: Duration,
}

/// `b` from a normalized `β ≥ 0` in class P, `β²` uniform on the simplex
/// before rejection.
pub fn sample_good_region<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    b_from_beta(&sampling::class_p_beta(rng))
}

/// `b` uniform in the tetrahedron, kept when all components lie in `[0,1]`
/// and the good-region inequality fails.
pub fn sample_outside_region<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let b = sampling::tetrahedron_point(rng);
        if b.iter().all(|x| (0.0..=1.0).contains(x)) && !good_region_check(&b) {
            return b;
        }
    }
}

fn dominates(a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x >= y)
}

fn scan_one(cfg: &ScanConfig, index: usize) -> (Vec<Violation>, u64, u64) {
    let mut rng = trial_rng(cfg.seed, index as u64);
    let b = match cfg.region {
        ScanRegion::Good => sample_good_region(&mut rng),
        ScanRegion::Outside => sample_outside_region(&mut rng),
    };
    let g_b = g_map(&b).expect("sampled b is possible");
    let max_attempts = (cfg.n_inner as u64).saturating_mul(cfg.attempt_factor.max(1) as u64);
    let (mut accepted, mut attempts) = (0u64, 0u64);
    let mut found = Vec::new();
    while accepted < cfg.n_inner as u64 && attempts < max_attempts {
        attempts += 1;
        let bb = Vector3::from_fn(|q, _| b[q] + rng.random::<f64>() * (1.0 - b[q]));
        if !bb.iter().zip(b.iter()).all(|(x, y)| x > y) {
            continue;
        }
        let admissible = match cfg.region {
            ScanRegion::Good => good_region_check(&bb),
            ScanRegion::Outside => tetrahedron_check(&bb),
        };
        if !admissible {
            continue;
        }
        accepted += 1;
        let g_bb = g_map(&bb).expect("admissible b̆ is possible");
        if dominates(&g_bb, &g_b) {
            found.push(Violation {
                outer_index: index,
                b: b.into(),
                b_breve: bb.into(),
                g_b: g_b.into(),
                g_b_breve: g_bb.into(),
            });
        }
    }
    (found, accepted, attempts)
}

/// Searches for `b̆ > b` with `G(b̆) ≥ G(b)`. Trial `i` draws from its own
/// stream of `cfg.seed`, so the report does not depend on thread scheduling.
pub fn monotonicity_scan(cfg: &ScanConfig) -> ScanReport {
    let start = Instant::now();
    let per_trial: Vec<_> = (0..cfg.n_outer).into_par_iter().map(|i| scan_one(cfg, i)).collect();
    let mut report = ScanReport {
        config: *cfg,
        violations: Vec::new(),
        outer_trials: cfg.n_outer,
        inner_accepted: 0,
        inner_attempts: 0,
        elapsed: Duration::ZERO,
    };
    for (v, acc, att) in per_trial {
        report.violations.extend(v);
        report.inner_accepted += acc;
        report.inner_attempts += att;
    }
    report.elapsed = start.elapsed();
    report
}

/// Time-reversed vectors `|e'_0⟩ = |e_0*⟩`, `|e'_q⟩ = −|e_q*⟩`.
pub fn time_reversed(e: &EVectors) -> EVectors {
    EVectors(std::array::from_fn(|l| {
        let sign = if l == 0 { 1.0 } else { -1.0 };
        e.0[l].map(|z| z.conj() * sign)
    }))
}

/// `F̂_{lm} = Σ_{jk} L(jk;lm)|e_j⟩⟨e_k|`.
pub fn f_hat(e: &EVectors, l: usize, m: usize) -> DMatrix<C64> {
    let t = LTensor::get();
    let n = e.dim();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..4 {
        for k in 0..4 {
            let coeff = t.at(j, k, l, m);
            if coeff != C64::new(0.0, 0.0) {
                out += &e.0[j] * e.0[k].adjoint() * coeff;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub q: f64,
    pub q_prime: f64,
    /// `max |B' − B with δ negated|`.
    pub b_sign_residual: f64,
    /// `max_{lm} |F̂'_{lm} ∓ F̂*_{lm}|`, minus for exactly one of `l`, `m` zero.
    pub f_sign_residual: f64,
}

/// Compares `Q_E` of a machine with that of its time reversal, whose `B`
/// matrix has `δ` negated.
pub fn symmetry_check(e: &GramMatrixE, m: &ModeVector) -> Result<SymmetryReport> {
    let report = crate::channel::check_physical(e, crate::DEFAULT_TOL);
    if !report.pass {
        return Err(Error::NotPhysical(format!("min eigenvalue {:e}", report.min_eigenvalue)));
    }
    let vecs = EVectors::from_gram(e)?;
    let primed = time_reversed(&vecs);
    let b = b_from_e(e)?;
    let b_prime = b_from_e(&primed.gram())?;
    let mirrored = AffineBlochMap { delta: -b.delta, linear: b.linear };
    let b_sign_residual = (b_prime.to_matrix4() - mirrored.to_matrix4()).amax();

    let mut f_sign_residual = 0.0f64;
    for l in 0..4 {
        for mm in 0..4 {
            let sign = if (l == 0) != (mm == 0) { -1.0 } else { 1.0 };
            let want = f_hat(&vecs, l, mm).map(|z| z.conj() * sign);
            f_sign_residual = f_sign_residual.max((f_hat(&primed, l, mm) - want).camax());
        }
    }
    Ok(SymmetryReport {
        q: quality_e_vectors(&vecs, m),
        q_prime: quality_e_vectors(&primed, m),
        b_sign_residual,
        f_sign_residual,
    })
}

fn check_p1(p1: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p1) {
        Ok(())
    } else {
        Err(Error::OutOfRange { value: p1, lo: 0.0, hi: 1.0 })
    }
}

/// `V = √p₁V¹ + √p₂V²` with the two `E` spaces embedded orthogonally, so
/// `dim E = dim E¹ + dim E²`.
pub fn mixed_isometry(v1: &IsometryMap, v2: &IsometryMap, p1: f64) -> Result<IsometryMap> {
    check_p1(p1)?;
    let (e1, e2) = (extract_e_vectors(v1), extract_e_vectors(v2));
    let (w1, w2) = (p1.sqrt(), (1.0 - p1).sqrt());
    let (d1, d2) = (e1.dim(), e2.dim());
    let mixed = EVectors(std::array::from_fn(|l| {
        DVector::from_fn(d1 + d2, |i, _| {
            if i < d1 {
                e1.0[l][i] * w1
            } else {
                e2.0[l][i - d1] * w2
            }
        })
    }));
    IsometryMap::from_e_vectors(&mixed)
}

/// `Q_E` of the mixed machine and the mixture `p₁Q_E¹ + p₂Q_E²`.
pub fn concavity_check(v1: &IsometryMap, v2: &IsometryMap, p1: f64, m: &ModeVector) -> Result<(f64, f64)> {
    let mixed = mixed_isometry(v1, v2, p1)?;
    let lhs = quality_e_vectors(&extract_e_vectors(&mixed), m);
    let rhs = p1 * quality_e_vectors(&extract_e_vectors(v1), m)
        + (1.0 - p1) * quality_e_vectors(&extract_e_vectors(v2), m);
    Ok((lhs, rhs))
}

/// `Tr_E[√(p₁p₂)(V¹κV²† + V²κV¹†)]` with both isometries embedded in the mixed
/// `E` space; zero because the embeddings are orthogonal.
pub fn cross_term_trace(v1: &IsometryMap, v2: &IsometryMap, p1: f64, kappa: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_p1(p1)?;
    let (d1, d2) = (v1.dim_e(), v2.dim_e());
    let d = d1 + d2;
    let embed = |v: &IsometryMap, offset: usize| {
        let dv = v.dim_e();
        let mut out = DMatrix::<C64>::zeros(2 * d, 2);
        for b in 0..2 {
            for e in 0..dv {
                for a in 0..2 {
                    out[(b * d + offset + e, a)] = v.matrix()[(b * dv + e, a)];
                }
            }
        }
        out
    };
    let (w1, w2) = (embed(v1, 0), embed(v2, d1));
    let _ = d2;
    let w = (&w1 * kappa * w2.adjoint() + &w2 * kappa * w1.adjoint()) * C64::new((p1 * (1.0 - p1)).sqrt(), 0.0);
    crate::linalg::partial_trace(&w, &[2, d], &[0])
}

/// `Q_C(m̂)` of a machine and `Q_E(m̂)` of the centered machine with the same
/// semi-axes; the first never exceeds the second.
pub fn off_center_bound(v: &IsometryMap, m: &ModeVector) -> Result<(f64, f64)> {
    let b = v.bloch_map(Output::B)?;
    let diag = diagonalize(&b);
    let beta = beta_from_b(&diag.semi_axes)?;
    let mu = diag.mode_coordinates(m.vector());
    Ok((quality_c(v, m)?, quality_e_closed_form(&beta, &mu)))
}

/// `p·B¹ + (1−p)·B²` mapped back to a Gram matrix.
pub fn convex_combination(b1: &AffineBlochMap, b2: &AffineBlochMap, p: f64) -> GramMatrixE {
    let m = b1.to_matrix4() * p + b2.to_matrix4() * (1.0 - p);
    e_from_b(&AffineBlochMap::from_matrix4(&m, 1e-12).expect("first column is preserved"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub trials: usize,
    pub seed: u64,
    /// Trials with `Q_E` of the mixture below the mixture of `Q_E` by more than `tol`.
    pub violations: usize,
    pub min_gap: f64,
    /// Largest `|lhs − rhs|` when both isometries coincide.
    pub max_equal_case_error: f64,
    pub tol: f64,
}

/// Concavity of `Q_E` on random pairs of `dim E = 4` isometries.
pub fn concavity_trials(trials: usize, seed: u64, tol: f64) -> Result<ConcavityReport> {
    let per: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let v1 = sampling::isometry(&mut rng, 4);
            let v2 = sampling::isometry(&mut rng, 4);
            let p1: f64 = rng.random();
            let m = sampling::mode(&mut rng);
            let (lhs, rhs) = concavity_check(&v1, &v2, p1, &m)?;
            let (l, r) = concavity_check(&v1, &v1, p1, &m)?;
            Ok((lhs - rhs, (l - r).abs()))
        })
        .collect();
    let mut report = ConcavityReport {
        trials,
        seed,
        violations: 0,
        min_gap: f64::INFINITY,
        max_equal_case_error: 0.0,
        tol,
    };
    for r in per {
        let (gap, eq) = r?;
        if gap < -tol {
            report.violations += 1;
        }
        report.min_gap = report.min_gap.min(gap);
        report.max_equal_case_error = report.max_equal_case_error.max(eq);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub trials: usize,
    pub seed: u64,
    /// `β_4` threshold below which samples are redrawn.
    pub min_beta4: f64,
    /// Worst relative error of `(16β_4)⁻¹J·db` against a central difference of `G`.
    pub max_relative_error: f64,
    /// Worst entry of `(16β_4)⁻¹J·(16γ_4)⁻¹K − I`.
    pub max_inverse_error: f64,
}

/// Compares the analytic differential of `G` with central differences at
/// random interior `β`.
pub fn jacobian_trials(trials: usize, seed: u64, min_beta4: f64) -> Result<JacobianReport> {
    let mut rng = trial_rng(seed, 0);
    let mut report =
        JacobianReport { trials, seed, min_beta4, max_relative_error: 0.0, max_inverse_error: 0.0 };
    let mut done = 0;
    while done < trials {
        let beta = sampling::positive_beta(&mut rng);
        if beta.product() <= min_beta4 {
            continue;
        }
        let jp = crate::optimizer::jacobians(&beta);
        let b = b_from_beta(&beta);
        let dir = sampling::unit_vector3(&mut rng);
        let eps = 1e-6;
        let (Ok(cp), Ok(cm)) = (g_map(&(b + dir * eps)), g_map(&(b - dir * eps))) else {
            continue;
        };
        let fd = (cp - cm) / (2.0 * eps);
        let dc_db = jp.dc_db().expect("β_4 > 0");
        let analytic = dc_db * dir;
        report.max_relative_error = report.max_relative_error.max((fd - analytic).norm() / analytic.norm());
        if let Some(db_dc) = jp.db_dc() {
            let err = (dc_db * db_dc - nalgebra::Matrix3::identity()).amax();
            report.max_inverse_error = report.max_inverse_error.max(err);
        }
        done += 1;
    }
    Ok(report)
}
