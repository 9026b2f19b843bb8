//! Three-qubit state-vector simulation of the optimal copy circuits.
//!
//! Qubit 0 is the top line and the `B` output, qubit 1 is `C` and qubit 2 is
//! `D`. Amplitudes are indexed `|b c d⟩` with `b` the most significant bit.
//! The input `|α⟩` enters on qubit 0 and the ancilla `|ε⟩` on qubits 1 and 2.

use nalgebra::{DMatrix, SMatrix, SVector, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::channel::{AffineBlochMap, FourVector, Output};
use crate::error::{Error, Result};
use crate::linalg::partial_trace;
use crate::quality::DensityMatrix2;
use crate::registry::Registry;
use crate::{C64, DEFAULT_TOL};

pub type Unitary8 = SMatrix<C64, 8, 8>;

/// Normalized amplitudes in the `|bcd⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector8(SVector<C64, 8>);

impl StateVector8 {
    pub fn new(amps: SVector<C64, 8>) -> Result<Self> {
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(StateVector8(amps))
    }

    /// `|α⟩ ⊗ |ε⟩`.
    pub fn product(alpha: &Vector2<C64>, ancilla: &Vector4<C64>) -> Result<Self> {
        Self::new(SVector::from_fn(|i, _| alpha[i >> 2] * ancilla[i & 3]))
    }

    pub fn basis(index: usize) -> Self {
        let mut v = SVector::zeros();
        v[index] = C64::new(1.0, 0.0);
        StateVector8(v)
    }

    pub fn amplitudes(&self) -> &SVector<C64, 8> {
        &self.0
    }

    pub fn density(&self) -> DMatrix<C64> {
        let v = DMatrix::from_fn(8, 1, |r, _| self.0[r]);
        &v * v.adjoint()
    }
}

/// One gate of a copy circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Hadamard { target: usize },
    /// Controlled NOT: flips `target` when `control` is `|1⟩`.
    Xor { control: usize, target: usize },
    /// Multiplies `|11⟩` on the two qubits by `−1`.
    PhasePi { a: usize, b: usize },
}

fn mask(q: usize) -> usize {
    1 << (2 - q)
}

impl Gate {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadIndex(msg));
        match *self {
            Gate::Hadamard { target } if target > 2 => bad(format!("qubit {target} not in 0..3")),
            Gate::Xor { control, target } | Gate::PhasePi { a: control, b: target } => {
                if control > 2 || target > 2 {
                    bad(format!("qubits ({control}, {target}) not in 0..3"))
                } else if control == target {
                    bad(format!("gate acts twice on qubit {control}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// In-place update by index arithmetic.
    fn apply_in_place(&self, amps: &mut SVector<C64, 8>) {
        match *self {
            Gate::Hadamard { target } => {
                let m = mask(target);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                for i in (0..8).filter(|i| i & m == 0) {
                    let (a0, a1) = (amps[i], amps[i | m]);
                    amps[i] = (a0 + a1) * r;
                    amps[i | m] = (a0 - a1) * r;
                }
            }
            Gate::Xor { control, target } => {
                let (c, t) = (mask(control), mask(target));
                for i in (0..8).filter(|i| i & c != 0 && i & t == 0) {
                    amps.swap_rows(i, i | t);
                }
            }
            Gate::PhasePi { a, b } => {
                let both = mask(a) | mask(b);
                for i in (0..8).filter(|i| i & both == both) {
                    amps[i] = -amps[i];
                }
            }
        }
    }

    /// The full 8×8 matrix, built by applying the gate to each basis state.
    pub fn matrix(&self) -> Unitary8 {
        let mut u = Unitary8::zeros();
        for col in 0..8 {
            let mut v = SVector::<C64, 8>::zeros();
            v[col] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut v);
            u.set_column(col, &v);
        }
        u
    }
}

pub fn apply_gate(state: &StateVector8, g: &Gate) -> Result<StateVector8> {
    g.validate()?;
    let mut amps = state.0;
    g.apply_in_place(&mut amps);
    Ok(StateVector8(amps))
}

/// The ancilla, given either by its four coefficients or in product form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaSpec {
    Beta(FourVector),
    /// `(√(1−D_xy)|0⟩ + √D_xy|1⟩) ⊗ (√(1−D_uv)|0⟩ + √D_uv|1⟩)`.
    Product { dxy: f64, duv: f64 },
}

impl AncillaSpec {
    /// Coefficients `β` with `|ε⟩ = β_0|00⟩ + β_1|01⟩ + β_2|11⟩ + β_3|10⟩`.
    pub fn beta(&self) -> Result<FourVector> {
        match *self {
            AncillaSpec::Beta(b) => {
                let n2 = b.norm_squared();
                if (n2 - 1.0).abs() > DEFAULT_TOL {
                    return Err(Error::NotNormalized(n2));
                }
                Ok(b)
            }
            AncillaSpec::Product { dxy, duv } => {
                for d in [dxy, duv] {
                    if !(0.0..=1.0).contains(&d) {
                        return Err(Error::OutOfRange { value: d, lo: 0.0, hi: 1.0 });
                    }
                }
                Ok(FourVector::new(
                    ((1.0 - dxy) * (1.0 - duv)).sqrt(),
                    ((1.0 - dxy) * duv).sqrt(),
                    (dxy * duv).sqrt(),
                    (dxy * (1.0 - duv)).sqrt(),
                ))
            }
        }
    }
}

/// Amplitudes of `|ε⟩` on `|cd⟩ = |00⟩, |01⟩, |10⟩, |11⟩`. Note `β_3` sits on
/// `|10⟩` and `β_2` on `|11⟩`.
pub fn prepare_ancilla(spec: &AncillaSpec) -> Result<Vector4<C64>> {
    let b = spec.beta()?;
    let r = |x: f64| C64::new(x, 0.0);
    Ok(Vector4::new(r(b[0]), r(b[1]), r(b[3]), r(b[2])))
}

/// A gate sequence that realizes the optimal copying isometry.
pub trait CopyCircuit: Send + Sync {
    fn gates(&self) -> Vec<Gate>;

    fn unitary(&self) -> Unitary8 {
        self.gates().iter().fold(Unitary8::identity(), |u, g| g.matrix() * u)
    }

    fn run(&self, input: &Vector2<C64>, spec: &AncillaSpec) -> Result<StateVector8> {
        let n2 = input.norm_squared();
        if (n2 - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::NotNormalized(n2));
        }
        let mut state = StateVector8::product(input, &prepare_ancilla(spec)?)?;
        for g in self.gates() {
            state = apply_gate(&state, &g)?;
        }
        Ok(state)
    }
}

/// Hadamard on `C`, then XOR gates controlled by the top, bottom and middle
/// qubits in turn.
pub struct XorCircuit;

/// Phase-π gate between `B` and `C` and an XOR from `D` onto `B`, followed by
/// a two-qubit unitary on `C` and `D`.
pub struct PhaseCircuit;

impl CopyCircuit for XorCircuit {
    fn gates(&self) -> Vec<Gate> {
        vec![
            Gate::Hadamard { target: 1 },
            Gate::Xor { control: 0, target: 1 },
            Gate::Xor { control: 2, target: 0 },
            Gate::Xor { control: 1, target: 2 },
        ]
    }
}

impl PhaseCircuit {
    /// The part in which the ancilla controls the input qubit.
    pub fn first_part() -> Vec<Gate> {
        vec![Gate::PhasePi { a: 0, b: 1 }, Gate::Xor { control: 2, target: 0 }]
    }

    /// The unitary on the ancilla that maps `|ε̂_l⟩` to `|ê_l⟩`.
    pub fn second_part() -> Vec<Gate> {
        vec![Gate::Hadamard { target: 1 }, Gate::Xor { control: 1, target: 2 }]
    }
}

impl CopyCircuit for PhaseCircuit {
    fn gates(&self) -> Vec<Gate> {
        let mut g = Self::first_part();
        g.extend(Self::second_part());
        g
    }
}

/// Circuits keyed `xor` and `phase`.
pub fn circuit_registry() -> Registry<dyn CopyCircuit> {
    let mut r: Registry<dyn CopyCircuit> = Registry::new();
    r.register("xor", Box::new(XorCircuit)).register("phase", Box::new(PhaseCircuit));
    r
}

pub fn circuit_a(input: &Vector2<C64>, spec: &AncillaSpec) -> Result<StateVector8> {
    XorCircuit.run(input, spec)
}

pub fn circuit_b(input: &Vector2<C64>, spec: &AncillaSpec) -> Result<StateVector8> {
    PhaseCircuit.run(input, spec)
}

/// Applies a gate list to `|α⟩ ⊗ |cd⟩` for a computational ancilla state.
pub fn run_gates(gates: &[Gate], alpha: &Vector2<C64>, cd: usize) -> Result<StateVector8> {
    let mut anc = Vector4::zeros();
    anc[cd] = C64::new(1.0, 0.0);
    let mut state = StateVector8::product(alpha, &anc)?;
    for g in gates {
        state = apply_gate(&state, g)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    B = 0,
    C = 1,
    D = 2,
}

impl Subsystem {
    pub fn parse(s: &str) -> Result<Vec<Subsystem>> {
        let mut out: Vec<Subsystem> = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'B' => Ok(Subsystem::B),
                'C' => Ok(Subsystem::C),
                'D' => Ok(Subsystem::D),
                other => Err(Error::BadIndex(format!("unknown subsystem {other}"))),
            })
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Density matrix of the listed qubits, in the order `B, C, D`.
pub fn reduced_state(state: &StateVector8, keep: &[Subsystem]) -> Result<DMatrix<C64>> {
    let mut idx: Vec<usize> = keep.iter().map(|&s| s as usize).collect();
    idx.sort();
    idx.dedup();
    partial_trace(&state.density(), &[2, 2, 2], &idx)
}

pub fn reduced_qubit(state: &StateVector8, which: Subsystem) -> Result<DensityMatrix2> {
    let m = reduced_state(state, &[which])?;
    DensityMatrix2::new(nalgebra::Matrix2::from_fn(|r, c| m[(r, c)]))
}

/// Pure input state with Bloch vector `±e_axis`.
pub fn axis_state(axis: usize, positive: bool) -> Vector2<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let s = if positive { 1.0 } else { -1.0 };
    match axis {
        0 => Vector2::new(C64::new(r, 0.0), C64::new(s * r, 0.0)),
        1 => Vector2::new(C64::new(r, 0.0), C64::new(0.0, s * r)),
        _ if positive => Vector2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        _ => Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
    }
}

/// Affine Bloch map of output `B` or `C`, reconstructed from the images of the
/// six axis states.
pub fn channel_tomography_with(circuit: &dyn CopyCircuit, spec: &AncillaSpec, output: Output) -> Result<AffineBlochMap> {
    let which = match output {
        Output::B => Subsystem::B,
        Output::C => Subsystem::C,
        Output::E => return Err(Error::Dimension("tomography needs a qubit output".into())),
    };
    let image = |axis: usize, positive: bool| -> Result<Vector3<f64>> {
        let out = circuit.run(&axis_state(axis, positive), spec)?;
        Ok(reduced_qubit(&out, which)?.bloch())
    };
    let mut linear = nalgebra::Matrix3::zeros();
    let mut delta = Vector3::zeros();
    for axis in 0..3 {
        let (plus, minus) = (image(axis, true)?, image(axis, false)?);
        linear.set_row(axis, &((plus - minus) * 0.5).transpose());
        delta += (plus + minus) * 0.5;
    }
    Ok(AffineBlochMap { delta: delta / 3.0, linear })
}

pub fn channel_tomography(spec: &AncillaSpec, output: Output) -> Result<AffineBlochMap> {
    channel_tomography_with(&XorCircuit, spec, output)
}

/// The `B` output of the circuit for input `ρ`, and `Σ_l β_l² σ_l ρ σ_l`.
pub fn pauli_mixture_check(spec: &AncillaSpec, input: &DensityMatrix2) -> Result<(DensityMatrix2, DensityMatrix2)> {
    let beta = spec.beta()?;
    let anc = prepare_ancilla(spec)?;
    let anc_rho = DMatrix::from_fn(4, 4, |r, c| anc[r] * anc[c].conj());
    let full_in = input.to_dmatrix().kronecker(&anc_rho);
    let u = XorCircuit.unitary();
    let u = DMatrix::from_fn(8, 8, |r, c| u[(r, c)]);
    let full_out = &u * full_in * u.adjoint();
    let b = partial_trace(&full_out, &[2, 2, 2], &[0])?;
    let lhs = DensityMatrix2::new(nalgebra::Matrix2::from_fn(|r, c| b[(r, c)]))?;

    let s = crate::pauli::paulis();
    let rho = input.matrix();
    let rhs = (0..4).fold(nalgebra::Matrix2::zeros(), |acc, l| {
        acc + s[l] * rho * s[l] * C64::new(beta[l] * beta[l], 0.0)
    });
    Ok((lhs, DensityMatrix2::new(rhs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::isometry_from_beta;
    use crate::optimizer::{b_from_beta, c_from_beta, gamma_from_beta};
    use crate::pauli::paulis;
    use crate::sampling;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket0() -> Vector2<C64> {
        Vector2::new(c(1.0, 0.0), c(0.0, 0.0))
    }

    fn ket1() -> Vector2<C64> {
        Vector2::new(c(0.0, 0.0), c(1.0, 0.0))
    }

    fn iso_beta() -> FourVector {
        let t = 1.0 / 12f64.sqrt();
        FourVector::new(3f64.sqrt() / 2.0, t, t, t)
    }

    fn random_input(rng: &mut sampling::TrialRng) -> Vector2<C64> {
        let g = sampling::gaussian_matrix(rng, 2, 1);
        let v = Vector2::new(g[(0, 0)], g[(1, 0)]);
        v / C64::new(v.norm(), 0.0)
    }

    #[test]
    fn gate_examples() {
        // Hadamard on the top qubit of |000⟩
        let s = apply_gate(&StateVector8::basis(0), &Gate::Hadamard { target: 0 }).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0b000].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[0b100].re, r, epsilon = 1e-15);
        let s = apply_gate(&StateVector8::basis(0b100), &Gate::Hadamard { target: 0 }).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0b100].re, -r, epsilon = 1e-15);

        // |10⟩ → |11⟩ on qubits (0, 2)
        let s = apply_gate(&StateVector8::basis(0b100), &Gate::Xor { control: 0, target: 2 }).unwrap();
        assert_eq!(s, StateVector8::basis(0b101));
        let s = apply_gate(&StateVector8::basis(0b001), &Gate::Xor { control: 0, target: 2 }).unwrap();
        assert_eq!(s, StateVector8::basis(0b001));

        let s = apply_gate(&StateVector8::basis(0b110), &Gate::PhasePi { a: 0, b: 1 }).unwrap();
        assert_eq!(s.amplitudes()[0b110], c(-1.0, 0.0));
        let s = apply_gate(&StateVector8::basis(0b100), &Gate::PhasePi { a: 0, b: 1 }).unwrap();
        assert_eq!(s, StateVector8::basis(0b100));
        assert_eq!(Gate::PhasePi { a: 0, b: 1 }.matrix(), Gate::PhasePi { a: 1, b: 0 }.matrix());

        assert!(matches!(
            apply_gate(&StateVector8::basis(0), &Gate::Xor { control: 1, target: 1 }),
            Err(Error::BadIndex(_))
        ));
        assert!(apply_gate(&StateVector8::basis(0), &Gate::Hadamard { target: 3 }).is_err());
    }

    #[test]
    fn gates_are_unitary() {
        let gates = [
            Gate::Hadamard { target: 0 },
            Gate::Hadamard { target: 2 },
            Gate::Xor { control: 2, target: 0 },
            Gate::Xor { control: 0, target: 1 },
            Gate::PhasePi { a: 1, b: 2 },
        ];
        for g in gates {
            let u = g.matrix();
            assert!((u.adjoint() * u - Unitary8::identity()).camax() < 1e-14);
        }
    }

    #[test]
    fn ancilla_layout() {
        let a = prepare_ancilla(&AncillaSpec::Beta(FourVector::new(0.1, 0.2, 0.3, (1.0f64 - 0.14).sqrt()))).unwrap();
        assert_eq!(a[0b10], c((1.0f64 - 0.14).sqrt(), 0.0));
        assert_eq!(a[0b11], c(0.3, 0.0));
        assert_eq!(prepare_ancilla(&AncillaSpec::Beta(FourVector::new(1.0, 0.0, 0.0, 0.0))).unwrap()[0], c(1.0, 0.0));
        let a = prepare_ancilla(&AncillaSpec::Product { dxy: 0.0, duv: 0.0 }).unwrap();
        assert_eq!(a, Vector4::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert!(matches!(
            prepare_ancilla(&AncillaSpec::Beta(FourVector::new(1.0, 1.0, 0.0, 0.0))),
            Err(Error::NotNormalized(_))
        ));

        // product form: the amplitudes are the tensor product itself
        let (x, u) = (0.2f64, 0.35f64);
        let a = prepare_ancilla(&AncillaSpec::Product { dxy: x, duv: u }).unwrap();
        let p = [(1.0 - x).sqrt(), x.sqrt()];
        let q = [(1.0 - u).sqrt(), u.sqrt()];
        for cc in 0..2 {
            for d in 0..2 {
                assert_abs_diff_eq!(a[cc * 2 + d].re, p[cc] * q[d], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn circuits_reproduce_the_isometry() {
        let mut rng = sampling::trial_rng(1, 0);
        for _ in 0..100 {
            let beta = sampling::positive_beta(&mut rng);
            let spec = AncillaSpec::Beta(beta);
            let v = isometry_from_beta(&beta).unwrap();
            for (col, input) in [ket0(), ket1()].iter().enumerate() {
                for out in [circuit_a(input, &spec).unwrap(), circuit_b(input, &spec).unwrap()] {
                    for i in 0..8 {
                        assert!((out.amplitudes()[i] - v.matrix()[(i, col)]).norm() < 1e-12);
                    }
                }
            }
            // linearity
            let plus = axis_state(0, true);
            let out = circuit_a(&plus, &spec).unwrap();
            let want = (v.matrix().column(0) + v.matrix().column(1)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for i in 0..8 {
                assert!((out.amplitudes()[i] - want[i]).norm() < 1e-12);
            }
        }
        let out = circuit_a(&ket0(), &AncillaSpec::Beta(FourVector::new(1.0, 0.0, 0.0, 0.0))).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.amplitudes()[0b000].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[0b011].re, r, epsilon = 1e-15);
    }

    #[test]
    fn the_two_circuits_are_the_same_unitary() {
        let (a, b) = (XorCircuit.unitary(), PhaseCircuit.unitary());
        assert!((a - b).camax() < 1e-12);
        assert!((a.adjoint() * a - Unitary8::identity()).camax() < 1e-14);
        let reg = circuit_registry();
        assert_eq!(reg.names(), vec!["xor", "phase"]);
        assert!((reg.get("phase").unwrap().unitary() - a).camax() < 1e-12);
    }

    #[test]
    fn first_part_applies_pauli_by_ancilla_label() {
        let s = paulis();
        let mut rng = sampling::trial_rng(2, 0);
        let first = PhaseCircuit::first_part();
        for _ in 0..20 {
            let alpha = random_input(&mut rng);
            // |cd⟩ label → operator on |α⟩
            let expected = [
                (0b00, s[0]),
                (0b01, s[1]),
                (0b11, s[2] * c(0.0, -1.0)),
                (0b10, s[3]),
            ];
            for (cd, op) in expected {
                let out = run_gates(&first, &alpha, cd).unwrap();
                let want = StateVector8::product(&(op * alpha), &{
                    let mut a = Vector4::zeros();
                    a[cd] = c(1.0, 0.0);
                    a
                })
                .unwrap();
                assert!((out.amplitudes() - want.amplitudes()).camax() < 1e-14);
            }
        }
    }

    #[test]
    fn norm_preserved_over_random_inputs() {
        let mut rng = sampling::trial_rng(3, 0);
        for _ in 0..1000 {
            let alpha = random_input(&mut rng);
            let spec = AncillaSpec::Beta(sampling::positive_beta(&mut rng));
            let out = circuit_a(&alpha, &spec).unwrap();
            assert!((out.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_state_examples() {
        let prod = StateVector8::basis(0b010);
        let rb = reduced_qubit(&prod, Subsystem::B).unwrap();
        assert_abs_diff_eq!(rb.purity(), 1.0, epsilon = 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut bell = SVector::<C64, 8>::zeros();
        bell[0b000] = c(r, 0.0);
        bell[0b110] = c(r, 0.0);
        let bell = StateVector8::new(bell).unwrap();
        let rb = reduced_qubit(&bell, Subsystem::B).unwrap();
        assert!((rb.bloch()).amax() < 1e-15);
        assert_abs_diff_eq!(rb.purity(), 0.5, epsilon = 1e-15);
        let bc = reduced_state(&bell, &Subsystem::parse("cb").unwrap()).unwrap();
        assert_abs_diff_eq!(bc.trace().re, 1.0, epsilon = 1e-15);

        let out = circuit_a(&ket0(), &AncillaSpec::Beta(iso_beta())).unwrap();
        let s = reduced_qubit(&out, Subsystem::B).unwrap().bloch();
        assert!((s - Vector3::new(0.0, 0.0, 2.0 / 3.0)).amax() < 1e-12);
    }

    #[test]
    fn tomography_examples() {
        let t = 2.0 / 3.0;
        let b = channel_tomography(&AncillaSpec::Beta(iso_beta()), Output::B).unwrap();
        assert!((b.linear - nalgebra::Matrix3::from_diagonal_element(t)).amax() < 1e-12);
        assert!(b.delta.amax() < 1e-12);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = AncillaSpec::Beta(FourVector::new(r, 0.0, 0.0, r));
        let want = AffineBlochMap::centered_diagonal(&Vector3::new(0.0, 0.0, 1.0));
        for out in [Output::B, Output::C] {
            let m = channel_tomography(&z, out).unwrap();
            assert!((m.to_matrix4() - want.to_matrix4()).amax() < 1e-12);
        }

        let perfect = AncillaSpec::Beta(FourVector::new(1.0, 0.0, 0.0, 0.0));
        let b = channel_tomography(&perfect, Output::B).unwrap();
        assert!((b.to_matrix4() - AffineBlochMap::identity().to_matrix4()).amax() < 1e-12);
        let cmap = channel_tomography(&perfect, Output::C).unwrap();
        assert!(cmap.to_matrix4().fixed_view::<3, 3>(1, 1).amax() < 1e-12);
    }

    #[test]
    fn tomography_matches_beta_formulas_and_isometry() {
        let mut rng = sampling::trial_rng(4, 0);
        let reg = circuit_registry();
        for _ in 0..50 {
            let beta = sampling::positive_beta(&mut rng);
            let spec = AncillaSpec::Beta(beta);
            for name in ["xor", "phase"] {
                let circ = reg.get(name).unwrap();
                let b = channel_tomography_with(circ, &spec, Output::B).unwrap();
                let cm = channel_tomography_with(circ, &spec, Output::C).unwrap();
                let want_b = AffineBlochMap::centered_diagonal(&b_from_beta(&beta));
                let want_c = AffineBlochMap::centered_diagonal(&c_from_beta(&beta));
                assert!((b.to_matrix4() - want_b.to_matrix4()).amax() < 1e-10);
                assert!((cm.to_matrix4() - want_c.to_matrix4()).amax() < 1e-10);
            }
            let v = isometry_from_beta(&beta).unwrap();
            let direct = v.bloch_map(Output::C).unwrap();
            let tomo = channel_tomography(&spec, Output::C).unwrap();
            assert!((direct.to_matrix4() - tomo.to_matrix4()).amax() < 1e-12);
        }
    }

    #[test]
    fn c_channel_of_beta_is_b_channel_of_gamma() {
        let mut rng = sampling::trial_rng(5, 0);
        for _ in 0..50 {
            let beta = sampling::positive_beta(&mut rng);
            let gamma = gamma_from_beta(&beta);
            let c_of_beta = channel_tomography(&AncillaSpec::Beta(beta), Output::C).unwrap();
            let b_of_gamma = channel_tomography(&AncillaSpec::Beta(gamma), Output::B).unwrap();
            assert!((c_of_beta.to_matrix4() - b_of_gamma.to_matrix4()).amax() < 1e-12);
        }
    }

    #[test]
    fn eavesdropping_ancilla_trades_b_against_c() {
        let mut last: Option<(f64, f64)> = None;
        for i in 0..=10 {
            let d = 0.05 * i as f64;
            let spec = AncillaSpec::Product { dxy: d, duv: d };
            let beta = spec.beta().unwrap();
            let b = channel_tomography(&spec, Output::B).unwrap();
            let cm = channel_tomography(&spec, Output::C).unwrap();
            let want_b = AffineBlochMap::centered_diagonal(&b_from_beta(&beta));
            let want_c = AffineBlochMap::centered_diagonal(&c_from_beta(&beta));
            assert!((b.to_matrix4() - want_b.to_matrix4()).amax() < 1e-12);
            assert!((cm.to_matrix4() - want_c.to_matrix4()).amax() < 1e-12);
            let qb = crate::quality::quality_bloch(&b, &crate::quality::ModeVector::axis(0));
            let qc = crate::quality::quality_bloch(&cm, &crate::quality::ModeVector::axis(0));
            let qbz = crate::quality::quality_bloch(&b, &crate::quality::ModeVector::axis(2));
            let qcz = crate::quality::quality_bloch(&cm, &crate::quality::ModeVector::axis(2));
            // x and z behave alike for equal error rates
            assert_abs_diff_eq!(qb, qbz, epsilon = 1e-12);
            assert_abs_diff_eq!(qc, qcz, epsilon = 1e-12);
            if let Some((pb, pc)) = last {
                assert!(qb < pb && qc > pc);
            }
            last = Some((qb, qc));
        }
        assert!(AncillaSpec::Product { dxy: 1.2, duv: 0.0 }.beta().is_err());
    }

    #[test]
    fn pauli_mixture_examples() {
        let mut rng = sampling::trial_rng(6, 0);
        let up = DensityMatrix2::from_bloch(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let (l, r) = pauli_mixture_check(&AncillaSpec::Beta(FourVector::new(1.0, 0.0, 0.0, 0.0)), &up).unwrap();
        assert!((l.matrix() - up.matrix()).camax() < 1e-14 && (r.matrix() - up.matrix()).camax() < 1e-14);
        let (l, r) = pauli_mixture_check(&AncillaSpec::Beta(iso_beta()), &up).unwrap();
        assert!((l.bloch() - Vector3::new(0.0, 0.0, 2.0 / 3.0)).amax() < 1e-12);
        assert!((r.bloch() - Vector3::new(0.0, 0.0, 2.0 / 3.0)).amax() < 1e-12);
        for _ in 0..100 {
            let rho = DensityMatrix2::pure(&random_input(&mut rng)).unwrap();
            let (l, r) = pauli_mixture_check(&AncillaSpec::Beta(sampling::positive_beta(&mut rng)), &rho).unwrap();
            assert!((l.matrix() - r.matrix()).camax() < 1e-10);
        }
    }

    #[test]
    fn gate_json_shape() {
        let g = Gate::Xor { control: 0, target: 1 };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"gate":"xor","control":0,"target":1}"#);
        assert_eq!(serde_json::from_str::<Gate>(&s).unwrap(), g);
    }
}
