//! Distinguishability of the two images of a mode under each output channel.
//!
//! For a mode `±m̂` the quality factor of output `F` is `Tr|Ω_F(m̂)|` with
//! `Ω_F(m̂) = V̂_F(½ m̂·σ)`. For the qubit outputs this is the length `|m̂·B|` of
//! the image semi-axis; for the environment it needs an eigensolve except for
//! centered machines, where `Q_E = √(Γ + 2|Δ|)`.

use nalgebra::{DMatrix, Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::channel::{
    b_from_e, check_physical, AffineBlochMap, EVectors, FourVector, GramMatrixE, IsometryMap, Output,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};
use crate::pauli::{paulis, LTensor};
use crate::registry::Registry;
use crate::{C64, CYCLIC, DEFAULT_TOL};

pub use crate::linalg::trace_norm;

/// Unit vector `m̂` labelling the mode `±m̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ModeVector(Vector3<f64>);

impl ModeVector {
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let n2 = v.norm_squared();
        if (n2.sqrt() - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(ModeVector(v))
    }

    /// Scales a non-zero vector to unit length.
    pub fn normalized(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(ModeVector(v / n))
    }

    pub fn axis(i: usize) -> Self {
        let mut v = Vector3::zeros();
        v[i] = 1.0;
        ModeVector(v)
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// `½ m̂·σ` as a 2×2 operator.
    pub fn half_sigma(&self) -> DMatrix<C64> {
        let s = paulis();
        let m = (0..3).fold(Matrix2::zeros(), |acc, q| acc + s[q + 1] * C64::new(0.5 * self.0[q], 0.0));
        DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
    }
}

impl TryFrom<[f64; 3]> for ModeVector {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        ModeVector::new(Vector3::from(a))
    }
}

impl From<ModeVector> for [f64; 3] {
    fn from(m: ModeVector) -> Self {
        m.0.into()
    }
}

/// A qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Matrix2<C64>);

impl DensityMatrix2 {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let d = DMatrix::from_fn(2, 2, |r, c| m[(r, c)]);
        let defect = hermiticity_defect(&d);
        if defect > DEFAULT_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
            return Err(Error::NotPhysical(format!("trace {tr} ≠ 1")));
        }
        let ev = hermitian_eigenvalues(&d);
        if ev[0] < -DEFAULT_TOL || ev[1] > 1.0 + DEFAULT_TOL {
            return Err(Error::NotPhysical(format!("eigenvalues {} and {} outside [0,1]", ev[0], ev[1])));
        }
        Ok(DensityMatrix2(m))
    }

    /// `ρ = ½(I + r·σ)` with `|r| ≤ 1`.
    pub fn from_bloch(r: &Vector3<f64>) -> Result<Self> {
        if r.norm() > 1.0 + DEFAULT_TOL {
            return Err(Error::NotPhysical(format!("Bloch vector length {} exceeds 1", r.norm())));
        }
        let s = paulis();
        let m = (0..3).fold(s[0], |acc, q| acc + s[q + 1] * C64::new(r[q], 0.0)) * C64::new(0.5, 0.0);
        Ok(DensityMatrix2(m))
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &Vector2<C64>) -> Result<Self> {
        let n2 = psi.norm_squared();
        if (n2 - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(DensityMatrix2(psi * psi.adjoint()))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |r, c| self.0[(r, c)])
    }

    pub fn bloch(&self) -> Vector3<f64> {
        let s = paulis();
        Vector3::from_fn(|q, _| (self.0 * s[q + 1]).trace().re)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

/// `Ω_F(m̂)` for some output `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaOperator(pub DMatrix<C64>);

impl OmegaOperator {
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0).iter().copied().collect()
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).sum()
    }
}

/// `½[1 − Tr|p₁ρ₁ − p₂ρ₂|]`, the best achievable error rate.
pub fn min_error_rate(rho1: &DensityMatrix2, rho2: &DensityMatrix2, p1: f64, p2: f64) -> Result<f64> {
    if p1 < 0.0 || p2 < 0.0 || (p1 + p2 - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::BadProbabilities(p1, p2));
    }
    let diff = rho1.to_dmatrix() * C64::new(p1, 0.0) - rho2.to_dmatrix() * C64::new(p2, 0.0);
    Ok(0.5 * (1.0 - trace_norm(&diff)?))
}

/// `Q(m̂) = |m̂·B|`.
pub fn quality_bloch(b: &AffineBlochMap, m: &ModeVector) -> f64 {
    (b.transfer() * m.vector()).norm()
}

/// `Ω_E(m̂) = Σ_q m_q F̂_{q0}` with `F̂_{lm} = Σ_{jk} L(jk;lm)|e_j⟩⟨e_k|`, in the
/// basis the vectors are written in.
pub fn omega_e(e: &EVectors, m: &ModeVector) -> OmegaOperator {
    let n = e.dim();
    let t = LTensor::get();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for j in 0..4 {
        for k in 0..4 {
            let coeff: C64 = (0..3).map(|q| t.at(j, k, q + 1, 0) * m.vector()[q]).sum();
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            out += &e.0[j] * e.0[k].adjoint() * coeff;
        }
    }
    OmegaOperator(out)
}

/// `Q_E` from the `E`-space vectors of any decomposition.
pub fn quality_e_vectors(e: &EVectors, m: &ModeVector) -> f64 {
    omega_e(e, m).trace_norm()
}

/// `Q_E(m̂)` of a physical Gram matrix, via a realization of its vectors.
pub fn quality_e(e: &GramMatrixE, m: &ModeVector) -> Result<f64> {
    let report = check_physical(e, DEFAULT_TOL);
    if !report.pass {
        return Err(Error::NotPhysical(format!(
            "min eigenvalue {:e}, trace deviation {:e}, isometry residual {:e}",
            report.min_eigenvalue, report.trace_deviation, report.isometry_residual
        )));
    }
    Ok(quality_e_vectors(&EVectors::from_gram(e)?, m))
}

/// `2√(Γ + 2|Δ|)` for the centered machine `β`, with `μ` the mode in the
/// principal axes. The eigenvalues of `Ω_E` are `±λ₁, ±λ₂` with
/// `λ₁ + λ₂ = √(Γ + 2|Δ|)`, so the trace norm carries the factor 2; it equals
/// `|c̆·μ|`.
pub fn quality_e_closed_form(beta: &FourVector, mu: &Vector3<f64>) -> f64 {
    let sq = beta.squared();
    let gamma: f64 = CYCLIC
        .iter()
        .map(|&(q, qp, qpp)| mu[q] * mu[q] * (sq[0] * sq[q + 1] + sq[qp + 1] * sq[qpp + 1]))
        .sum();
    let delta = beta.product() * mu.norm_squared();
    2.0 * (gamma + 2.0 * delta.abs()).max(0.0).sqrt()
}

/// `Q_C(m̂)` with `E = C ⊗ D`, from the `C` output's Bloch map.
pub fn quality_c(v: &IsometryMap, m: &ModeVector) -> Result<f64> {
    Ok(quality_bloch(&v.bloch_map(Output::C)?, m))
}

/// `Q_C(m̂)` of the centered machine `β` as measured by tomography of the copy
/// circuit.
pub fn quality_c_from_circuit(beta: &FourVector, m: &ModeVector) -> Result<f64> {
    let spec = crate::circuit::AncillaSpec::Beta(*beta);
    let c = crate::circuit::channel_tomography(&spec, Output::C)?;
    Ok(quality_bloch(&c, m))
}

/// `Tr|V(½m̂·σ)V†|`, which is 1 for every isometry.
pub fn quality_h(v: &IsometryMap, m: &ModeVector) -> Result<f64> {
    trace_norm(&v.conjugate(&m.half_sigma()))
}

/// A way of scoring one output of a machine.
pub trait ChannelQuality: Send + Sync {
    fn quality(&self, v: &IsometryMap, m: &ModeVector) -> Result<f64>;
}

struct BlochQuality(Output);
struct EnvironmentQuality;
struct WholeOutputQuality;

impl ChannelQuality for BlochQuality {
    fn quality(&self, v: &IsometryMap, m: &ModeVector) -> Result<f64> {
        Ok(quality_bloch(&v.bloch_map(self.0)?, m))
    }
}

impl ChannelQuality for EnvironmentQuality {
    fn quality(&self, v: &IsometryMap, m: &ModeVector) -> Result<f64> {
        Ok(quality_e_vectors(&crate::channel::extract_e_vectors(v), m))
    }
}

impl ChannelQuality for WholeOutputQuality {
    fn quality(&self, v: &IsometryMap, m: &ModeVector) -> Result<f64> {
        quality_h(v, m)
    }
}

/// Quality functions keyed `b`, `c`, `e` and `h` (the whole output `B ⊗ E`).
pub fn quality_registry() -> Registry<dyn ChannelQuality> {
    let mut r: Registry<dyn ChannelQuality> = Registry::new();
    r.register("b", Box::new(BlochQuality(Output::B)))
        .register("c", Box::new(BlochQuality(Output::C)))
        .register("e", Box::new(EnvironmentQuality))
        .register("h", Box::new(WholeOutputQuality));
    r
}

/// How a machine is given to [`distinguishability_general`].
#[derive(Debug, Clone)]
pub enum MachineRep {
    Bloch(AffineBlochMap),
    Gram(GramMatrixE),
    Isometry(IsometryMap),
}

impl MachineRep {
    /// An isometry realizing the machine. Gram and Bloch forms are realized
    /// with `dim E = 4` read as `C ⊗ D` in the eigenbasis of `E`; this is one
    /// of many splittings, so the `C` quality of such a realization is only
    /// one admissible value.
    pub fn isometry(&self) -> Result<IsometryMap> {
        match self {
            MachineRep::Isometry(v) => Ok(v.clone()),
            MachineRep::Gram(e) => {
                check_gram(e)?;
                IsometryMap::from_e_vectors(&EVectors::from_gram(e)?)
            }
            MachineRep::Bloch(b) => {
                let e = crate::channel::e_from_b(b);
                check_gram(&e)?;
                IsometryMap::from_e_vectors(&EVectors::from_gram(&e)?)
            }
        }
    }

    pub fn quality(&self, channel: Output, m: &ModeVector) -> Result<f64> {
        match (self, channel) {
            (MachineRep::Bloch(b), Output::B) => Ok(quality_bloch(b, m)),
            (MachineRep::Gram(e), Output::B) => Ok(quality_bloch(&b_from_e(e)?, m)),
            (MachineRep::Gram(e), Output::E) => quality_e(e, m),
            (MachineRep::Bloch(b), Output::E) => quality_e(&crate::channel::e_from_b(b), m),
            (MachineRep::Isometry(v), Output::E) => EnvironmentQuality.quality(v, m),
            (rep, _) => Ok(quality_bloch(&rep.isometry()?.bloch_map(channel)?, m)),
        }
    }
}

fn check_gram(e: &GramMatrixE) -> Result<()> {
    let rep = check_physical(e, DEFAULT_TOL);
    if rep.pass {
        Ok(())
    } else {
        Err(Error::NotPhysical(format!("min eigenvalue {:e}", rep.min_eigenvalue)))
    }
}

/// Unit vector along `x1 − x2`, or [`Error::DegeneratePair`].
pub fn pair_direction(x1: &Vector3<f64>, x2: &Vector3<f64>) -> Result<(f64, ModeVector)> {
    let d = x1 - x2;
    let len = d.norm();
    if len == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok((len, ModeVector::normalized(d)?))
}

/// `½|x₁ − x₂|·Q_F(x̂)`, the distinguishability of the images of two inputs
/// with Bloch vectors `x₁`, `x₂`. Coinciding inputs give 0.
pub fn distinguishability_general(
    rep: &MachineRep,
    x1: &Vector3<f64>,
    x2: &Vector3<f64>,
    channel: Output,
) -> Result<f64> {
    for x in [x1, x2] {
        if x.norm() > 1.0 + DEFAULT_TOL {
            return Err(Error::NotPhysical(format!("Bloch vector length {} exceeds 1", x.norm())));
        }
    }
    match pair_direction(x1, x2) {
        Err(Error::DegeneratePair) => Ok(0.0),
        Err(e) => Err(e),
        Ok((len, dir)) => Ok(0.5 * len * rep.quality(channel, &dir)?),
    }
}
