//! Representations of a copying machine and conversions among them.
//!
//! A machine is an isometry `V: A → B ⊗ E` written as
//! `V|α⟩ = Σ_l (σ_l|α⟩) ⊗ |e_l⟩`. Its Gram matrix `E_{lm} = ⟨e_l|e_m⟩` fixes
//! the real 4×4 matrix `B_{lm} = Σ_{jk} L(lm;jk) E_{jk}` of the affine Bloch
//! map `s = δ + Bᵀ·r` on the `B` output, and vice versa
//! `E_{jk} = ¼ Σ_{lm} L(jk;lm) B_{lm}`.
//!
//! Row layout of an isometry matrix: index `(b, e) ↦ b·dim_e + e`, with the
//! `B` qubit most significant. When `E = C ⊗ D` the `C` qubit is the most
//! significant factor of `e`.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, hermiticity_defect, partial_trace};
use crate::pauli::{paulis, LTensor};
use crate::{C64, CYCLIC, DEFAULT_TOL};

/// Real four-vector such as `b = (1, b)`, `β`, `γ` or `β²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct FourVector(pub Vector4<f64>);

impl FourVector {
    pub fn new(v0: f64, v1: f64, v2: f64, v3: f64) -> Self {
        FourVector(Vector4::new(v0, v1, v2, v3))
    }

    /// `(1, v)`.
    pub fn with_unit_head(v: &Vector3<f64>) -> Self {
        Self::new(1.0, v[0], v[1], v[2])
    }

    /// Spatial part `(v_1, v_2, v_3)`.
    pub fn tail(&self) -> Vector3<f64> {
        Vector3::new(self.0[1], self.0[2], self.0[3])
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }

    pub fn squared(&self) -> FourVector {
        FourVector(self.0.map(|x| x * x))
    }
}

impl std::ops::Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<[f64; 4]> for FourVector {
    fn from(a: [f64; 4]) -> Self {
        FourVector(Vector4::from(a))
    }
}

impl From<FourVector> for [f64; 4] {
    fn from(v: FourVector) -> Self {
        v.0.into()
    }
}

/// 4×4 Gram matrix `E_{lm} = ⟨e_l|e_m⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "GramJson", try_from = "GramJson")]
pub struct GramMatrixE(pub Matrix4<C64>);

/// Wire form: 16 `[re, im]` pairs in row-major order.
#[derive(Serialize, Deserialize)]
struct GramJson {
    entries: Vec<[f64; 2]>,
}

impl From<GramMatrixE> for GramJson {
    fn from(e: GramMatrixE) -> Self {
        let mut entries = Vec::with_capacity(16);
        for r in 0..4 {
            for c in 0..4 {
                let z = e.0[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        GramJson { entries }
    }
}

impl TryFrom<GramJson> for GramMatrixE {
    type Error = String;
    fn try_from(j: GramJson) -> std::result::Result<Self, String> {
        if j.entries.len() != 16 {
            return Err(format!("expected 16 entries, got {}", j.entries.len()));
        }
        Ok(GramMatrixE(Matrix4::from_fn(|r, c| {
            let [re, im] = j.entries[r * 4 + c];
            C64::new(re, im)
        })))
    }
}

impl GramMatrixE {
    /// Diagonal `E = diag(β_0², …, β_3²)` of a centered machine.
    pub fn diagonal(beta: &FourVector) -> Self {
        GramMatrixE(Matrix4::from_diagonal(&beta.0.map(|x| C64::new(x * x, 0.0))))
    }

    pub fn from_real_diagonal(d: [f64; 4]) -> Self {
        GramMatrixE(Matrix4::from_diagonal(&Vector4::from(d).map(|x| C64::new(x, 0.0))))
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |r, c| self.0[(r, c)])
    }

    /// `max_q |Re E_{0q} − Im E_{q'q''}|`.
    pub fn isometry_residual(&self) -> f64 {
        CYCLIC
            .iter()
            .map(|&(q, qp, qpp)| (self.0[(0, q + 1)].re - self.0[(qp + 1, qpp + 1)].im).abs())
            .fold(0.0, f64::max)
    }

    pub fn trace_deviation(&self) -> f64 {
        (self.0.trace().re - 1.0).abs()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.to_dmatrix())[0]
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        (0..4).all(|r| (0..4).all(|c| r == c || self.0[(r, c)].norm() <= tol))
    }
}

/// Affine map `s = δ + Bᵀ·r` on Bloch vectors. `linear` is the 3×3 block of
/// the 4×4 matrix `B_{lm}` (row `l` = input Pauli index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "BlochJson", from = "BlochJson")]
pub struct AffineBlochMap {
    pub delta: Vector3<f64>,
    pub linear: Matrix3<f64>,
}

#[derive(Serialize, Deserialize)]
struct BlochJson {
    delta: [f64; 3],
    linear: [[f64; 3]; 3],
}

impl From<AffineBlochMap> for BlochJson {
    fn from(b: AffineBlochMap) -> Self {
        let mut linear = [[0.0; 3]; 3];
        for (r, row) in linear.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = b.linear[(r, c)];
            }
        }
        BlochJson { delta: b.delta.into(), linear }
    }
}

impl From<BlochJson> for AffineBlochMap {
    fn from(j: BlochJson) -> Self {
        AffineBlochMap {
            delta: Vector3::from(j.delta),
            linear: Matrix3::from_fn(|r, c| j.linear[r][c]),
        }
    }
}

impl AffineBlochMap {
    pub fn identity() -> Self {
        Self::centered_diagonal(&Vector3::new(1.0, 1.0, 1.0))
    }

    pub fn centered_diagonal(b: &Vector3<f64>) -> Self {
        AffineBlochMap { delta: Vector3::zeros(), linear: Matrix3::from_diagonal(b) }
    }

    /// Full 4×4 matrix with first column `(1,0,0,0)ᵀ` and first row `(1, δ)`.
    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        for q in 0..3 {
            m[(0, q + 1)] = self.delta[q];
            for p in 0..3 {
                m[(p + 1, q + 1)] = self.linear[(p, q)];
            }
        }
        m
    }

    /// Inverse of [`to_matrix4`](Self::to_matrix4); fails unless the first
    /// column is `(1,0,0,0)ᵀ` within `tol`.
    pub fn from_matrix4(m: &Matrix4<f64>, tol: f64) -> Result<Self> {
        let col_dev = (m[(0, 0)] - 1.0).abs().max(m[(1, 0)].abs()).max(m[(2, 0)].abs()).max(m[(3, 0)].abs());
        if col_dev > tol {
            return Err(Error::NotIsometric(format!(
                "first column of B deviates from (1,0,0,0) by {col_dev:e}"
            )));
        }
        Ok(AffineBlochMap {
            delta: Vector3::new(m[(0, 1)], m[(0, 2)], m[(0, 3)]),
            linear: Matrix3::from_fn(|p, q| m[(p + 1, q + 1)]),
        })
    }

    /// The matrix acting on input Bloch vectors, `Bᵀ`.
    pub fn transfer(&self) -> Matrix3<f64> {
        self.linear.transpose()
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        self.delta.amax() <= tol
    }
}

/// `s = δ + Bᵀ·r`.
pub fn map_bloch(map: &AffineBlochMap, r: &Vector3<f64>) -> Vector3<f64> {
    map.delta + map.transfer() * r
}

/// Raw `B_{lm} = Σ_{jk} L(lm;jk) E_{jk}` with no isometry check. Also returns
/// the largest imaginary part encountered.
pub fn b_matrix_unchecked(e: &GramMatrixE) -> (Matrix4<f64>, f64) {
    let full = LTensor::get().apply(&e.0);
    let imag = full.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (full.map(|z| z.re), imag)
}

pub fn b_from_e(e: &GramMatrixE) -> Result<AffineBlochMap> {
    b_from_e_with_tol(e, DEFAULT_TOL)
}

pub fn b_from_e_with_tol(e: &GramMatrixE, tol: f64) -> Result<AffineBlochMap> {
    let defect = hermiticity_defect(&e.to_dmatrix());
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    if e.trace_deviation() > tol {
        return Err(Error::NotIsometric(format!("Σ E_ll = {} ≠ 1", e.0.trace().re)));
    }
    let res = e.isometry_residual();
    if res > tol {
        return Err(Error::NotIsometric(format!("Re E_0q ≠ Im E_q'q'' (residual {res:e})")));
    }
    let (m, _) = b_matrix_unchecked(e);
    AffineBlochMap::from_matrix4(&m, tol)
}

/// `E_{jk} = ¼ Σ_{lm} L(jk;lm) B_{lm}`. Positivity is not enforced.
pub fn e_from_b_matrix(b: &Matrix4<f64>) -> GramMatrixE {
    let bc = b.map(|x| C64::new(x, 0.0));
    GramMatrixE(LTensor::get().apply(&bc) * C64::new(0.25, 0.0))
}

pub fn e_from_b(b: &AffineBlochMap) -> GramMatrixE {
    e_from_b_matrix(&b.to_matrix4())
}

/// Outcome of [`check_physical`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
    pub isometry_residual: f64,
    pub hermiticity_defect: f64,
    pub pass: bool,
}

pub fn check_physical(e: &GramMatrixE, tol: f64) -> ConstraintReport {
    let herm = hermiticity_defect(&e.to_dmatrix());
    let min_eigenvalue = e.min_eigenvalue();
    let trace_deviation = e.trace_deviation();
    let isometry_residual = e.isometry_residual();
    let pass = herm <= tol && min_eigenvalue >= -tol && trace_deviation <= tol && isometry_residual <= tol;
    ConstraintReport { min_eigenvalue, trace_deviation, isometry_residual, hermiticity_defect: herm, pass }
}

/// Semi-axes and rotations with `Bᵀ = rot_out · diag(semi_axes) · rot_in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagonalization {
    /// Sorted by magnitude; at most one entry is negative.
    pub semi_axes: Vector3<f64>,
    /// Center of the ellipsoid in the rotated output basis, `rot_outᵀ·δ`.
    pub delta: Vector3<f64>,
    /// Rows are the principal input modes.
    pub rot_in: Matrix3<f64>,
    pub rot_out: Matrix3<f64>,
}

impl Diagonalization {
    /// Components of `m` along the principal input modes.
    pub fn mode_coordinates(&self, m: &Vector3<f64>) -> Vector3<f64> {
        self.rot_in * m
    }

    pub fn transfer(&self) -> Matrix3<f64> {
        self.rot_out * Matrix3::from_diagonal(&self.semi_axes) * self.rot_in
    }
}

pub fn diagonalize(map: &AffineBlochMap) -> Diagonalization {
    let t = map.transfer();
    let is_diag = (0..3).all(|r| (0..3).all(|c| r == c || t[(r, c)] == 0.0));
    let (mut u, mut s, mut vt) = if is_diag {
        (Matrix3::identity(), t.diagonal(), Matrix3::identity())
    } else {
        let svd = t.svd(true, true);
        (svd.u.expect("u"), svd.singular_values, svd.v_t.expect("v_t"))
    };

    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    if vt.determinant() < 0.0 {
        vt.row_mut(2).neg_mut();
        s[2] = -s[2];
    }
    let negatives: Vec<usize> = (0..3).filter(|&i| s[i] < 0.0).collect();
    if negatives.len() >= 2 {
        for &i in &negatives[..2] {
            s[i] = -s[i];
            u.column_mut(i).neg_mut();
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| s[a].abs().total_cmp(&s[b].abs()));
    let odd = permutation_is_odd(&order);
    let semi_axes = Vector3::from_fn(|i, _| s[order[i]]);
    let mut rot_out = Matrix3::from_fn(|r, c| u[(r, order[c])]);
    let mut rot_in = Matrix3::from_fn(|r, c| vt[(order[r], c)]);
    if odd {
        rot_out.column_mut(0).neg_mut();
        rot_in.row_mut(0).neg_mut();
    }
    let delta = rot_out.transpose() * map.delta;
    Diagonalization { semi_axes, delta, rot_in, rot_out }
}

fn permutation_is_odd(p: &[usize; 3]) -> bool {
    let mut inversions = 0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Name of the first violated tetrahedron face, if any.
pub fn tetrahedron_violation(b: &Vector3<f64>) -> Option<String> {
    tetrahedron_violation_tol(b, 0.0)
}

pub fn tetrahedron_violation_tol(b: &Vector3<f64>, tol: f64) -> Option<String> {
    if b.sum() < -1.0 - tol {
        return Some("tetrahedron violated: b1+b2+b3 < -1".to_string());
    }
    for (q, qp, qpp) in CYCLIC {
        if b[q] + b[qp] > 1.0 + b[qpp] + tol {
            return Some(format!(
                "tetrahedron violated: b{}+b{} > 1+b{}",
                q.min(qp) + 1,
                q.max(qp) + 1,
                qpp + 1
            ));
        }
    }
    None
}

/// `Σ b_p ≥ −1` and `b_q + b_{q'} ≤ 1 + b_{q''}`.
pub fn tetrahedron_check(b: &Vector3<f64>) -> bool {
    tetrahedron_violation(b).is_none()
}

/// The orthonormal `E`-space vectors `|ê_l⟩` in the `|cd⟩` basis that make the
/// `C` copy optimal.
pub fn e_hat_basis() -> [Vector4<C64>; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let re = |x: f64| C64::new(x, 0.0);
    let im = |x: f64| C64::new(0.0, x);
    [
        Vector4::new(re(r), re(0.0), re(0.0), re(r)),
        Vector4::new(re(0.0), re(r), re(r), re(0.0)),
        Vector4::new(re(0.0), im(-r), im(r), re(0.0)),
        Vector4::new(re(r), re(0.0), re(0.0), re(-r)),
    ]
}

/// An isometry `V: A → B ⊗ E`, stored as a `(2·dim_e) × 2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMap {
    matrix: DMatrix<C64>,
}

/// Which output space a channel refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Output {
    B,
    C,
    E,
}

impl IsometryMap {
    /// Checks shape and `V†V = I₂` to [`DEFAULT_TOL`].
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.ncols() != 2 || matrix.nrows() < 2 || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "isometry must be (2·dim_e)×2, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = (matrix.adjoint() * &matrix - DMatrix::<C64>::identity(2, 2)).camax();
        if dev > DEFAULT_TOL {
            return Err(Error::NotIsometric(format!("V†V deviates from I by {dev:e}")));
        }
        Ok(IsometryMap { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim_e(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `V = Σ_l σ_l ⊗ |e_l⟩`.
    pub fn from_e_vectors(e: &EVectors) -> Result<Self> {
        let dim_e = e.dim();
        let s = paulis();
        let m = DMatrix::from_fn(2 * dim_e, 2, |row, a| {
            let (b, d) = (row / dim_e, row % dim_e);
            (0..4).map(|l| s[l][(b, a)] * e.0[l][d]).sum()
        });
        Self::new(m)
    }

    pub fn apply(&self, input: &Vector2<C64>) -> DVector<C64> {
        &self.matrix * input
    }

    /// `V κ V†` for a 2×2 operator `κ`.
    pub fn conjugate(&self, kappa: &DMatrix<C64>) -> DMatrix<C64> {
        &self.matrix * kappa * self.matrix.adjoint()
    }

    pub fn gram(&self) -> GramMatrixE {
        extract_e_vectors(self).gram()
    }

    fn reduce(&self, full: &DMatrix<C64>, output: Output) -> Result<DMatrix<C64>> {
        let dim_e = self.dim_e();
        match output {
            Output::B => partial_trace(full, &[2, dim_e], &[0]),
            Output::E => partial_trace(full, &[2, dim_e], &[1]),
            Output::C => {
                if !dim_e.is_multiple_of(2) {
                    return Err(Error::Dimension(format!("dim E = {dim_e} has no qubit factor")));
                }
                partial_trace(full, &[2, 2, dim_e / 2], &[1])
            }
        }
    }

    /// `V̂_F(κ)` for the output `F`.
    pub fn channel_output(&self, kappa: &DMatrix<C64>, output: Output) -> Result<DMatrix<C64>> {
        self.reduce(&self.conjugate(kappa), output)
    }

    /// The affine Bloch map of the `B` or `C` output computed from partial traces:
    /// `M_{lm} = ½ Tr[σ_m V̂_F(σ_l)]`.
    pub fn bloch_map(&self, output: Output) -> Result<AffineBlochMap> {
        if output == Output::E {
            return Err(Error::Dimension("E output is not a qubit".into()));
        }
        let s = paulis();
        let mut m = Matrix4::zeros();
        for l in 0..4 {
            let sl = DMatrix::from_fn(2, 2, |r, c| s[l][(r, c)]);
            let out = self.channel_output(&sl, output)?;
            for mm in 0..4 {
                let sm = DMatrix::from_fn(2, 2, |r, c| s[mm][(r, c)]);
                m[(l, mm)] = (sm * &out).trace().re * 0.5;
            }
        }
        AffineBlochMap::from_matrix4(&m, 1e-8)
    }
}

/// The four vectors `|e_l⟩` of a decomposition `V = Σ σ_l ⊗ |e_l⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct EVectors(pub [DVector<C64>; 4]);

impl EVectors {
    pub fn dim(&self) -> usize {
        self.0[0].len()
    }

    pub fn gram(&self) -> GramMatrixE {
        GramMatrixE(Matrix4::from_fn(|l, m| self.0[l].dotc(&self.0[m])))
    }

    /// Vectors realizing a positive Gram matrix: with `E = U·diag(w)·U†`,
    /// `e_l[k] = √w_k · conj(U_{lk})`. Unique up to a unitary on `E`.
    pub fn from_gram(e: &GramMatrixE) -> Result<Self> {
        let eig = hermitian_eigen(&e.to_dmatrix());
        if eig.values[0] < -DEFAULT_TOL {
            return Err(Error::NotPhysical(format!("E has eigenvalue {}", eig.values[0])));
        }
        let w = eig.values.map(|x| x.max(0.0).sqrt());
        Ok(EVectors(std::array::from_fn(|l| {
            DVector::from_fn(4, |k, _| eig.vectors[(l, k)].conj() * w[k])
        })))
    }

    /// Centered machine `|e_l⟩ = β_l |ê_l⟩`.
    pub fn centered(beta: &FourVector) -> Self {
        let basis = e_hat_basis();
        EVectors(std::array::from_fn(|l| {
            DVector::from_iterator(4, basis[l].iter().map(|z| z * beta[l]))
        }))
    }
}

/// `e_l[d] = ½ Σ_{b,a} conj(σ_l[b,a]) · V[(b,d),a]`.
pub fn extract_e_vectors(v: &IsometryMap) -> EVectors {
    let dim_e = v.dim_e();
    let s = paulis();
    let m = v.matrix();
    EVectors(std::array::from_fn(|l| {
        DVector::from_fn(dim_e, |d, _| {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..2 {
                for a in 0..2 {
                    acc += s[l][(b, a)].conj() * m[(b * dim_e + d, a)];
                }
            }
            acc * 0.5
        })
    }))
}

/// The centered optimal machine for `β` (columns `V|0⟩`, `V|1⟩` in `|bcd⟩`).
pub fn isometry_from_beta(beta: &FourVector) -> Result<IsometryMap> {
    let n2 = beta.norm_squared();
    if (n2 - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let [b0, b1, b2, b3] = [beta[0], beta[1], beta[2], beta[3]];
    let mut m = DMatrix::<C64>::zeros(8, 2);
    let mut set = |row: usize, col: usize, x: f64| m[(row, col)] = C64::new(x * r, 0.0);
    set(0b000, 0, b0 + b3);
    set(0b011, 0, b0 - b3);
    set(0b101, 0, b1 + b2);
    set(0b110, 0, b1 - b2);
    set(0b100, 1, b0 - b3);
    set(0b111, 1, b0 + b3);
    set(0b001, 1, b1 - b2);
    set(0b010, 1, b1 + b2);
    IsometryMap::new(m)
}
