//! The optimization map `G: b ↦ c` and the classification of optimal pairs.
//!
//! `G` follows the chain `b → β² → β → γ → γ² → c` with `β² = ¼Λ·(1,b)`,
//! positive roots, `γ = ½Λ·β` and `c = Λ·γ²`, which simplifies to
//! `c_q = 2(β_0β_q + β_{q'}β_{q''})`.

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::channel::{tetrahedron_violation, tetrahedron_violation_tol, FourVector};
use crate::error::{Error, Result};
use crate::pauli::lambda_matrix;
use crate::{CYCLIC, DEFAULT_TOL};

/// Default slack for class-P membership.
pub const CLASS_P_TOL: f64 = 1e-12;
/// Width of the band treated as a tie by [`same_order`].
pub const ORDER_TIE: f64 = 1e-12;

/// `β² = ¼Λ·(1,b)`. Entries in `[−tol, 0)` are clamped to zero.
pub fn beta_squared(b: &Vector3<f64>) -> FourVector {
    FourVector(lambda_matrix().0 * Vector4::new(1.0, b[0], b[1], b[2]) * 0.25)
}

/// Positive-root `β` for a possible centered `b`.
pub fn beta_from_b(b: &Vector3<f64>) -> Result<FourVector> {
    beta_from_b_with_tol(b, DEFAULT_TOL)
}

pub fn beta_from_b_with_tol(b: &Vector3<f64>, tol: f64) -> Result<FourVector> {
    let sq = beta_squared(b);
    if sq.0.iter().any(|&x| x < -tol) {
        let msg = tetrahedron_violation_tol(b, tol)
            .or_else(|| tetrahedron_violation(b))
            .unwrap_or_else(|| format!("tetrahedron violated: ¼Λ·(1,b) = {:?} has a negative entry", sq.0.as_slice()));
        return Err(Error::NotPossible(msg));
    }
    Ok(FourVector(sq.0.map(|x| x.max(0.0).sqrt())))
}

/// `γ = ½Λ·β`; an involution.
pub fn gamma_from_beta(beta: &FourVector) -> FourVector {
    FourVector(lambda_matrix().0 * beta.0 * 0.5)
}

/// `b_q = β_0² + β_q² − β_{q'}² − β_{q''}²`.
pub fn b_from_beta(beta: &FourVector) -> Vector3<f64> {
    let t = lambda_matrix().0 * beta.squared().0;
    Vector3::new(t[1], t[2], t[3])
}

/// `c_q = 2(β_0β_q + β_{q'}β_{q''})`.
pub fn c_from_beta(beta: &FourVector) -> Vector3<f64> {
    Vector3::from_fn(|q, _| {
        let (_, qp, qpp) = CYCLIC[q];
        2.0 * (beta[0] * beta[q + 1] + beta[qp + 1] * beta[qpp + 1])
    })
}

/// The optimization map `c = G(b)`.
pub fn g_map(b: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(c_from_beta(&beta_from_b(b)?))
}

/// `s = ½[1 − r + √((1−r)(1+3r))]`, the isotropic branch of `G`.
pub fn isotropic_tradeoff(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange { value: r, lo: 0.0, hi: 1.0 });
    }
    Ok(0.5 * (1.0 - r + ((1.0 - r) * (1.0 + 3.0 * r)).sqrt()))
}

/// `(r, s)` pairs along the isotropic curve for `r = i/steps`.
pub fn isotropic_curve(steps: usize) -> Result<Vec<(f64, f64)>> {
    if steps == 0 {
        return Err(Error::OutOfRange { value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    (0..=steps)
        .map(|i| {
            let r = i as f64 / steps as f64;
            Ok((r, isotropic_tradeoff(r)?))
        })
        .collect()
}

/// `h_q = 2(β_0β_q − β_{q'}β_{q''})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HVector(pub Vector3<f64>);

fn h_form(v: &FourVector) -> Vector3<f64> {
    Vector3::from_fn(|q, _| {
        let (_, qp, qpp) = CYCLIC[q];
        2.0 * (v[0] * v[q + 1] - v[qp + 1] * v[qpp + 1])
    })
}

pub fn h_vector(beta: &FourVector) -> HVector {
    let h = h_form(beta);
    let via_gamma = h_form(&gamma_from_beta(beta));
    debug_assert!(
        (h - via_gamma).amax() <= 1e-12 * beta.norm_squared().max(1.0),
        "β- and γ-forms of h disagree"
    );
    HVector(h)
}

/// The same vector computed from `γ`.
pub fn h_vector_gamma_form(beta: &FourVector) -> HVector {
    HVector(h_form(&gamma_from_beta(beta)))
}

/// `0 ≤ ξ_q ≤ ξ_0` and `ξ_0ξ_q ≥ ξ_{q'}ξ_{q''}` for every `q`.
pub fn class_p_check(xi: &FourVector) -> bool {
    class_p_check_with_tol(xi, CLASS_P_TOL)
}

pub fn class_p_check_with_tol(xi: &FourVector, tol: f64) -> bool {
    CYCLIC.iter().all(|&(q, qp, qpp)| {
        let x = xi[q + 1];
        x >= -tol && x <= xi[0] + tol && xi[0] * x >= xi[qp + 1] * xi[qpp + 1] - tol
    })
}

/// `0 ≤ b_q ≤ 1` and `b_q ≥ b_{q'}b_{q''}`.
pub fn good_region_check(b: &Vector3<f64>) -> bool {
    class_p_check_with_tol(&FourVector::with_unit_head(b), 0.0)
}

fn tied_sign(x: f64) -> i8 {
    if x > ORDER_TIE {
        1
    } else if x < -ORDER_TIE {
        -1
    } else {
        0
    }
}

/// `sign(ξ_p − ξ_q) = sign(η_p − η_q)` for `1 ≤ p, q ≤ 3`.
pub fn same_order(xi: &FourVector, eta: &FourVector) -> bool {
    (1..4).all(|p| (1..4).all(|q| tied_sign(xi[p] - xi[q]) == tied_sign(eta[p] - eta[q])))
}

/// Operation (a): `kξ` with `k > 0`.
pub fn class_p_scale(xi: &FourVector, k: f64) -> FourVector {
    FourVector(xi.0 * k)
}

/// Operation (b): componentwise `ξ^a` with `a > 0`.
pub fn class_p_power(xi: &FourVector, a: f64) -> FourVector {
    FourVector(xi.0.map(|x| x.max(0.0).powf(a)))
}

/// Operation (c): `Λ·ξ`.
pub fn class_p_lambda(xi: &FourVector) -> FourVector {
    FourVector(lambda_matrix().0 * xi.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairFlags {
    /// Both `b` and `c` lie in the tetrahedron.
    pub possible: bool,
    /// All components of `b` and `c` are non-negative.
    pub positive: bool,
    /// `c = G(b)` and `b = G(c)`.
    pub mutual: bool,
    /// `0 ≤ b_q ≤ 1` and `b_q ≥ b_{q'}b_{q''}` for both members.
    pub good_region: bool,
    pub h_non_negative: bool,
    pub gamma4_non_negative: bool,
    /// Some `h_q` vanishes; such pairs are flagged, not resolved.
    pub boundary: bool,
    /// Positive, mutual and in the good region. Optimality of this set is
    /// supported numerically rather than proven.
    pub conjecturally_optimal: bool,
}

/// Classification of a candidate pair `(b, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPair {
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    pub beta: Option<FourVector>,
    pub gamma: Option<FourVector>,
    pub h: Option<Vector3<f64>>,
    /// `G(b)` when `b` is possible.
    pub g_of_b: Option<Vector3<f64>>,
    /// `max(|c − G(b)|, |b − G(c)|)`, when both are defined.
    pub mutual_residual: Option<f64>,
    pub flags: PairFlags,
    /// Human-readable reasons for failed checks.
    pub notes: Vec<String>,
}

/// Slack for the `mutual` test.
pub const MUTUAL_TOL: f64 = 1e-9;

pub fn classify_pair(b: &Vector3<f64>, c: &Vector3<f64>) -> OptimalPair {
    let mut notes = Vec::new();
    let beta = match beta_from_b(b) {
        Ok(x) => Some(x),
        Err(e) => {
            notes.push(format!("b: {e}"));
            None
        }
    };
    let beta_c = match beta_from_b(c) {
        Ok(x) => Some(x),
        Err(e) => {
            notes.push(format!("c: {e}"));
            None
        }
    };
    let gamma = beta.as_ref().map(gamma_from_beta);
    let h = beta.as_ref().map(|x| h_vector(x).0);
    let g_of_b = beta.as_ref().map(c_from_beta);
    let g_of_c = beta_c.as_ref().map(c_from_beta);
    let mutual_residual = match (g_of_b, g_of_c) {
        (Some(gb), Some(gc)) => Some((gb - c).amax().max((gc - b).amax())),
        _ => None,
    };

    let possible = beta.is_some() && beta_c.is_some();
    let positive = b.iter().chain(c.iter()).all(|&x| x >= 0.0);
    let mutual = mutual_residual.is_some_and(|r| r <= MUTUAL_TOL);
    let good_region = good_region_check(b) && good_region_check(c);
    let h_non_negative = h.is_some_and(|h| h.iter().all(|&x| x >= -CLASS_P_TOL));
    let gamma4_non_negative = gamma.is_some_and(|g| g.product() >= 0.0);
    let boundary = h.is_some_and(|h| h.iter().any(|x| x.abs() <= CLASS_P_TOL));

    if possible && !mutual {
        notes.push(format!("c differs from G(b) or b from G(c) by {:e}", mutual_residual.unwrap_or(f64::NAN)));
    }
    if !good_region {
        for (name, v) in [("b", b), ("c", c)] {
            for &(q, qp, qpp) in &CYCLIC {
                if v[q] < 0.0 || v[q] > 1.0 {
                    notes.push(format!("{name}{} = {} outside [0,1]", q + 1, v[q]));
                } else if v[q] < v[qp] * v[qpp] {
                    notes.push(format!(
                        "{name}{} = {} < {name}{}·{name}{} = {}",
                        q + 1,
                        v[q],
                        qp + 1,
                        qpp + 1,
                        v[qp] * v[qpp]
                    ));
                }
            }
        }
    }
    if boundary {
        notes.push("boundary case: some h_q = 0".to_string());
    }

    let flags = PairFlags {
        possible,
        positive,
        mutual,
        good_region,
        h_non_negative,
        gamma4_non_negative,
        boundary,
        conjecturally_optimal: possible && positive && mutual && good_region,
    };
    OptimalPair { b: *b, c: *c, beta, gamma, h, g_of_b, mutual_residual, flags, notes }
}

/// `(b, G(b))` classified.
pub fn classify_b(b: &Vector3<f64>) -> Result<OptimalPair> {
    Ok(classify_pair(b, &g_map(b)?))
}

fn side_variants(v: &Vector3<f64>) -> Vec<Vector3<f64>> {
    const EVEN: [[f64; 3]; 4] = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0]];
    let patterns: Vec<[f64; 3]> = if v.iter().any(|&x| x == 0.0) {
        (0..8)
            .map(|bits| std::array::from_fn(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }))
            .collect()
    } else {
        EVEN.to_vec()
    };
    let mut out: Vec<Vector3<f64>> = Vec::new();
    for p in patterns {
        // adding 0.0 turns −0 into +0
        let w = Vector3::from_fn(|i, _| v[i] * p[i] + 0.0);
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// All optimal pairs obtained from a positive optimal pair by reversing two
/// signs of `b` and/or two signs of `c`; zero components leave every sign of
/// the other components free.
pub fn sign_flip_variants(pair: &OptimalPair) -> Result<Vec<(Vector3<f64>, Vector3<f64>)>> {
    if !(pair.flags.positive && pair.flags.conjecturally_optimal) {
        return Err(Error::NotPositiveOptimal);
    }
    let bs = side_variants(&pair.b);
    let cs = side_variants(&pair.c);
    Ok(bs.iter().flat_map(|b| cs.iter().map(move |c| (*b, *c))).collect())
}

/// Jacobians of `G` and its inverse: `dc = (16β_4)⁻¹J·db`, `db = (16γ_4)⁻¹K·dc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianPair {
    pub j: Matrix3<f64>,
    pub k: Matrix3<f64>,
    pub beta4: f64,
    pub gamma4: f64,
}

impl JacobianPair {
    /// `(16β_4)⁻¹J`, if `β_4 ≠ 0`.
    pub fn dc_db(&self) -> Option<Matrix3<f64>> {
        (self.beta4 != 0.0).then(|| self.j / (16.0 * self.beta4))
    }

    /// `(16γ_4)⁻¹K`, if `γ_4 ≠ 0`.
    pub fn db_dc(&self) -> Option<Matrix3<f64>> {
        (self.gamma4 != 0.0).then(|| self.k / (16.0 * self.gamma4))
    }

    pub fn degenerate(&self) -> bool {
        self.beta4 == 0.0 || self.gamma4 == 0.0
    }
}

/// `J_{qq} = h_{q'}h_{q''}`, `J_{qq'} = −h_{q'}c_{q''}`, `J_{q'q} = −h_q c_{q''}`;
/// `K` likewise with `b` for `c`.
pub fn jacobians(beta: &FourVector) -> JacobianPair {
    let h = h_vector(beta).0;
    let b = b_from_beta(beta);
    let c = c_from_beta(beta);
    let build = |other: &Vector3<f64>| {
        Matrix3::from_fn(|i, j| {
            if i == j {
                let (_, ip, ipp) = CYCLIC[i];
                h[ip] * h[ipp]
            } else {
                let k = 3 - i - j;
                -h[j] * other[k]
            }
        })
    };
    JacobianPair {
        j: build(&c),
        k: build(&b),
        beta4: beta.product(),
        gamma4: gamma_from_beta(beta).product(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn iso_beta() -> FourVector {
        let t = 1.0 / 12f64.sqrt();
        FourVector::new(3f64.sqrt() / 2.0, t, t, t)
    }

    fn v3(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_from_b(&v3(1.0, 1.0, 1.0)).unwrap(), FourVector::new(1.0, 0.0, 0.0, 0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let b = beta_from_b(&v3(0.0, 0.0, 1.0)).unwrap();
        assert!((b.0 - Vector4::new(r, 0.0, 0.0, r)).amax() < 1e-15);
        let t = 2.0 / 3.0;
        let b = beta_from_b(&v3(t, t, t)).unwrap();
        assert!((b.0 - iso_beta().0).amax() < 1e-15);
        let err = beta_from_b(&v3(1.0, 1.0, -1.0)).unwrap_err();
        assert_eq!(err.to_string(), "tetrahedron violated: b1+b2 > 1+b3");
        // a hair outside is clamped
        let b = beta_from_b(&v3(1.0 + 1e-12, 1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(b.norm_squared(), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_from_beta(&FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(g, FourVector::new(0.5, 0.5, 0.5, 0.5));
        assert_eq!(gamma_from_beta(&g), FourVector::new(1.0, 0.0, 0.0, 0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let fixed = FourVector::new(r, 0.0, 0.0, r);
        assert!((gamma_from_beta(&fixed).0 - fixed.0).amax() < 1e-15);
    }

    #[test]
    fn g_map_examples() {
        assert_eq!(g_map(&v3(1.0, 1.0, 1.0)).unwrap(), v3(0.0, 0.0, 0.0));
        assert!((g_map(&v3(0.0, 0.0, 1.0)).unwrap() - v3(0.0, 0.0, 1.0)).amax() < 1e-15);
        let t = 2.0 / 3.0;
        assert!((g_map(&v3(t, t, t)).unwrap() - v3(t, t, t)).amax() < 1e-15);
        assert!(matches!(g_map(&v3(1.0, 1.0, -1.0)), Err(Error::NotPossible(_))));
    }

    #[test]
    fn g_equals_lambda_gamma_squared() {
        let mut rng = sampling::trial_rng(1, 0);
        for _ in 0..1000 {
            let b = sampling::tetrahedron_point(&mut rng);
            let beta = beta_from_b(&b).unwrap();
            let g2 = gamma_from_beta(&beta).squared();
            let c_full = lambda_matrix().0 * g2.0;
            assert_abs_diff_eq!(c_full[0], 1.0, epsilon = 1e-14);
            let c = g_map(&b).unwrap();
            assert!((c - Vector3::new(c_full[1], c_full[2], c_full[3])).amax() < 1e-14);
            assert!(c.iter().all(|&x| x >= 0.0));
            assert!((b_from_beta(&beta) - b).amax() < 1e-14);
        }
    }

    #[test]
    fn isotropic_examples_and_consistency() {
        assert_eq!(isotropic_tradeoff(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(isotropic_tradeoff(2.0 / 3.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(isotropic_tradeoff(1.0).unwrap(), 0.0);
        assert!(isotropic_tradeoff(1.5).is_err());
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            let s = isotropic_tradeoff(r).unwrap();
            let c = g_map(&v3(r, r, r)).unwrap();
            assert!((c - v3(s, s, s)).amax() < 1e-12, "r = {r}");
            assert!((isotropic_tradeoff(s).unwrap() - r).abs() < 1e-10);
        }
        let curve = isotropic_curve(2).unwrap();
        assert_eq!(curve.len(), 3);
        assert_abs_diff_eq!(curve[1].1, 0.5 * (0.5 + 1.25f64.sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_vector(&FourVector::new(1.0, 0.0, 0.0, 0.0)).0, Vector3::zeros());
        let h = h_vector(&iso_beta()).0;
        assert!((h - v3(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)).amax() < 1e-15);
        let mut rng = sampling::trial_rng(2, 0);
        for _ in 0..1000 {
            let beta = sampling::positive_beta(&mut rng);
            let mut v: Vec<f64> = beta.0.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            let ordered = FourVector::new(v[3], v[0], v[1], v[2]);
            let h = h_vector(&ordered).0;
            assert!(h[1] >= -1e-15 && h[2] >= -1e-15);
            assert!((h - h_vector_gamma_form(&ordered).0).amax() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let t = 2.0 / 3.0;
        let p = classify_pair(&v3(t, t, t), &v3(t, t, t));
        assert!(p.flags.possible && p.flags.positive && p.flags.mutual && p.flags.good_region);
        assert!(p.flags.h_non_negative && p.flags.gamma4_non_negative && p.flags.conjecturally_optimal);
        assert!(!p.flags.boundary);

        let p = classify_pair(&v3(1.0, 1.0, 1.0), &v3(0.0, 0.0, 0.0));
        assert!(p.flags.conjecturally_optimal && p.flags.boundary);

        // this b lies outside the tetrahedron, so no pair contains it
        let p = classify_pair(&v3(0.9, 0.9, 0.5), &v3(0.5, 0.5, 0.5));
        assert!(!p.flags.possible && !p.flags.good_region && !p.flags.conjecturally_optimal);
        assert!(p.notes.iter().any(|n| n.contains("0.5 < b1·b2")));

        // inside the tetrahedron but outside the good region
        let b = v3(0.5, 0.5, 0.1);
        let p = classify_b(&b).unwrap();
        assert!(p.flags.possible && !p.flags.good_region && !p.flags.conjecturally_optimal);
        let gg = g_map(&g_map(&b).unwrap()).unwrap();
        assert!(gg.iter().zip(b.iter()).all(|(x, y)| *x >= y - 1e-12));
        assert!((gg - b).amax() > 1e-6);
    }

    #[test]
    fn sign_flip_examples() {
        let t = 2.0 / 3.0;
        let p = classify_pair(&v3(t, t, t), &v3(t, t, t));
        let vars = sign_flip_variants(&p).unwrap();
        assert_eq!(vars.len(), 16);
        assert!(vars.contains(&(v3(-t, -t, t), v3(t, t, t))));
        assert!(!vars.iter().any(|(b, _)| *b == v3(-t, t, t)));
        for (b, c) in &vars {
            assert!(b.product() >= 0.0 && c.product() >= 0.0);
        }

        let p = classify_pair(&v3(1.0, 1.0, 1.0), &v3(0.0, 0.0, 0.0));
        let vars = sign_flip_variants(&p).unwrap();
        assert_eq!(vars.len(), 4);
        assert!(vars.iter().all(|(_, c)| c.iter().all(|x| x.to_bits() == 0)));

        let p = classify_pair(&v3(0.5, 0.5, 0.5), &v3(0.5, 0.5, 0.5));
        assert!(matches!(sign_flip_variants(&p), Err(Error::NotPositiveOptimal)));
    }

    #[test]
    fn jacobian_examples() {
        let jp = jacobians(&iso_beta());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 9.0 } else { -2.0 / 9.0 };
                assert_abs_diff_eq!(jp.j[(i, j)], want, epsilon = 1e-15);
            }
        }
        let jp = jacobians(&FourVector::new(0.8, 0.6, 0.0, 0.0));
        assert_eq!(jp.beta4, 0.0);
        assert!(jp.degenerate() && jp.dc_db().is_none());
    }

    fn central_difference(b: &Vector3<f64>, step: f64) -> Matrix3<f64> {
        let mut d = Matrix3::zeros();
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = step;
            let col = (g_map(&(b + e)).unwrap() - g_map(&(b - e)).unwrap()) / (2.0 * step);
            d.set_column(k, &col);
        }
        d
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = sampling::trial_rng(3, 0);
        let mut checked = 0;
        while checked < 200 {
            let beta = sampling::positive_beta(&mut rng);
            if beta.product() < 0.01 {
                continue;
            }
            checked += 1;
            let b = b_from_beta(&beta);
            let jp = jacobians(&beta);
            let fd = central_difference(&b, 1e-6);
            let analytic = jp.dc_db().unwrap();
            assert!((fd - analytic).norm() / analytic.norm() < 1e-4);
            if let Some(inv) = jp.db_dc() {
                assert!((analytic * inv - Matrix3::identity()).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn class_p_examples() {
        assert!(class_p_check(&FourVector::new(1.0, 0.0, 0.0, 0.0)));
        assert!(class_p_check(&iso_beta()));
        assert!(class_p_check(&class_p_scale(&FourVector::new(1.0, 0.8, 0.8, 0.7), 3.0)));
        assert!(!class_p_check(&FourVector::new(1.0, 0.0, 0.5, 0.5)));
    }

    #[test]
    fn same_order_examples() {
        let a = FourVector::new(1.0, 0.1, 0.2, 0.3);
        assert!(same_order(&a, &a));
        assert!(same_order(&a, &FourVector::new(1.0, 0.4, 0.5, 0.6)));
        assert!(!same_order(&a, &FourVector::new(1.0, 0.2, 0.1, 0.3)));
    }

    #[test]
    fn order_preserved_along_the_chain() {
        let mut rng = sampling::trial_rng(4, 0);
        for _ in 0..2000 {
            let beta = sampling::class_p_beta(&mut rng);
            let mut b = b_from_beta(&beta);
            b.as_mut_slice().sort_by(f64::total_cmp);
            let c = g_map(&b).unwrap();
            assert!(c[0] <= c[1] + 1e-12 && c[1] <= c[2] + 1e-12);
            assert!(good_region_check(&c) || class_p_check(&FourVector::with_unit_head(&c)));
        }
        let c = g_map(&v3(0.3, 0.3, 0.8)).unwrap();
        assert!((c[0] - c[1]).abs() < 1e-14);
    }

    #[test]
    fn h_has_at_most_one_negative_component() {
        let mut rng = sampling::trial_rng(5, 0);
        let mut seen = 0;
        while seen < 20_000 {
            let beta = sampling::positive_beta(&mut rng);
            if gamma_from_beta(&beta).0.iter().any(|&x| x < 0.0) {
                continue;
            }
            seen += 1;
            let negs = h_vector(&beta).0.iter().filter(|&&x| x < 0.0).count();
            assert!(negs <= 1);
        }
    }

    #[test]
    fn double_map_equality_iff_gamma4_non_negative() {
        let mut rng = sampling::trial_rng(6, 0);
        let (mut eq, mut strict) = (0, 0);
        for _ in 0..5000 {
            let b = sampling::tetrahedron_point(&mut rng);
            let beta = beta_from_b(&b).unwrap();
            let gg = g_map(&g_map(&b).unwrap()).unwrap();
            // G(G(b)) dominates |b|
            for q in 0..3 {
                assert!(gg[q] >= b[q].abs() - 1e-12);
            }
            let g4 = gamma_from_beta(&beta).product();
            if g4.abs() < 1e-9 {
                continue;
            }
            if g4 > 0.0 {
                assert!((gg - b.abs()).amax() < 1e-9);
                eq += 1;
            } else {
                assert!((gg - b.abs()).amax() > 1e-12);
                strict += 1;
            }
        }
        assert!(eq > 0 && strict > 0);
    }

    proptest! {
        #[test]
        fn gamma_is_an_involution(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64) {
            let beta = FourVector::new(a, b, c, d);
            let back = gamma_from_beta(&gamma_from_beta(&beta));
            prop_assert!((back.0 - beta.0).amax() < 1e-15);
        }

        #[test]
        fn g_is_an_involution_on_the_good_region(seed in any::<u64>()) {
            let mut rng = sampling::trial_rng(seed, 0);
            let b = b_from_beta(&sampling::class_p_beta(&mut rng));
            let c = g_map(&b).unwrap();
            prop_assert!((g_map(&c).unwrap() - b).amax() < 1e-10);
            prop_assert!(good_region_check(&b.map(|x| x.clamp(0.0, 1.0))) || b.iter().any(|x| x.abs() < 1e-12));
        }

        #[test]
        fn class_p_operations_preserve_class_and_order(seed in any::<u64>()) {
            let mut rng = sampling::trial_rng(seed, 0);
            let xi = sampling::class_p_beta(&mut rng);
            let mut eta = xi;
            for _ in 0..rng.random_range(1..=4) {
                eta = match rng.random_range(0..3) {
                    0 => class_p_scale(&eta, rng.random_range(0.1..10.0)),
                    1 => class_p_power(&eta, rng.random_range(0.1..4.0)),
                    _ => class_p_lambda(&eta),
                };
                let tol = 1e-12 * eta.0.amax().max(1.0);
                prop_assert!(class_p_check_with_tol(&eta, tol));
            }
        }

        #[test]
        fn tetrahedron_points_are_possible(seed in any::<u64>()) {
            let mut rng = sampling::trial_rng(seed, 0);
            let b = sampling::tetrahedron_point(&mut rng);
            prop_assert!(beta_from_b(&b).is_ok());
            prop_assert!((beta_from_b(&b).unwrap().norm_squared() - 1.0).abs() < 1e-12);
        }
    }
}
