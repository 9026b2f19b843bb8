//! Pauli algebra constants: `σ_l`, the tensor `L(jk;lm) = ½Tr[σ_j σ_l σ_k σ_m]`
//! and the `Λ` matrix.

use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::C64;

/// Index of a Pauli matrix; `0` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliIndex(u8);

impl PauliIndex {
    pub const I: PauliIndex = PauliIndex(0);
    pub const X: PauliIndex = PauliIndex(1);
    pub const Y: PauliIndex = PauliIndex(2);
    pub const Z: PauliIndex = PauliIndex(3);

    pub fn new(value: usize) -> Result<Self> {
        if value < 4 {
            Ok(PauliIndex(value as u8))
        } else {
            Err(Error::BadIndex(format!("Pauli index {value} not in 0..4")))
        }
    }

    pub fn value(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> [PauliIndex; 4] {
        [Self::I, Self::X, Self::Y, Self::Z]
    }
}

/// The Pauli matrix `σ_l` in the basis where `|0⟩` has `S_z = +1/2`.
pub fn pauli(l: PauliIndex) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match l.value() {
        0 => Matrix2::new(one, o, o, one),
        1 => Matrix2::new(o, one, one, o),
        2 => Matrix2::new(o, -i, i, o),
        _ => Matrix2::new(one, o, o, -one),
    }
}

/// All four Pauli matrices, indexed by `l`.
pub fn paulis() -> &'static [Matrix2<C64>; 4] {
    static SIGMA: OnceLock<[Matrix2<C64>; 4]> = OnceLock::new();
    SIGMA.get_or_init(|| PauliIndex::all().map(pauli))
}

/// `L(jk;lm)`, stored as a 256-entry table built once from the trace formula.
#[derive(Debug, Clone)]
pub struct LTensor {
    entries: [C64; 256],
}

impl LTensor {
    fn build() -> Self {
        let s = paulis();
        let mut entries = [C64::new(0.0, 0.0); 256];
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    for m in 0..4 {
                        let prod = s[j] * s[l] * s[k] * s[m];
                        entries[Self::flat(j, k, l, m)] = prod.trace() * 0.5;
                    }
                }
            }
        }
        LTensor { entries }
    }

    /// The shared table.
    pub fn get() -> &'static LTensor {
        static TABLE: OnceLock<LTensor> = OnceLock::new();
        TABLE.get_or_init(LTensor::build)
    }

    #[inline]
    fn flat(j: usize, k: usize, l: usize, m: usize) -> usize {
        ((j * 4 + k) * 4 + l) * 4 + m
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize, l: usize, m: usize) -> C64 {
        self.entries[Self::flat(j, k, l, m)]
    }

    /// `P_{jk} = Σ_{lm} L(jk;lm) Q_{lm}`.
    pub fn apply(&self, q: &Matrix4<C64>) -> Matrix4<C64> {
        Matrix4::from_fn(|j, k| {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..4 {
                for m in 0..4 {
                    acc += self.at(j, k, l, m) * q[(l, m)];
                }
            }
            acc
        })
    }
}

pub fn l_tensor(j: PauliIndex, k: PauliIndex, l: PauliIndex, m: PauliIndex) -> C64 {
    LTensor::get().at(j.value(), k.value(), l.value(), m.value())
}

/// `L(jk;lm)` from its tabulated non-zero values (`L(00;qq) = L(0q;0q) = 1`,
/// `L(0q;q'q'') = -i`, `L(qq;qq) = L(qq';qq') = 1`, `L(qq;q'q') = -1`),
/// closed under `L(kj;lm) = L(jk;ml) = L(lm;jk) = L*(jk;lm)`. Independent of
/// the trace formula, flat index `((j*4+k)*4+l)*4+m`.
pub fn l_tensor_closed_form() -> [C64; 256] {
    let one = C64::new(1.0, 0.0);
    let mut seed: Vec<([usize; 4], C64)> = vec![([0, 0, 0, 0], one)];
    for q in 1..4 {
        seed.push(([0, 0, q, q], one));
        seed.push(([0, q, 0, q], one));
        seed.push(([q, q, q, q], one));
        for p in (1..4).filter(|&p| p != q) {
            seed.push(([q, p, q, p], one));
            seed.push(([q, q, p, p], -one));
        }
    }
    for (q, qp, qpp) in crate::CYCLIC {
        seed.push(([0, q + 1, qp + 1, qpp + 1], C64::new(0.0, -1.0)));
    }
    let mut filled = [false; 256];
    let mut out = [C64::new(0.0, 0.0); 256];
    let mut stack = seed;
    while let Some(([j, k, l, m], v)) = stack.pop() {
        let idx = LTensor::flat(j, k, l, m);
        if filled[idx] {
            continue;
        }
        filled[idx] = true;
        out[idx] = v;
        for next in [[k, j, l, m], [j, k, m, l], [l, m, j, k]] {
            stack.push((next, v.conj()));
        }
    }
    out
}

/// The `±1` matrix linking semi-axis four-vectors and squared amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMatrix(pub Matrix4<f64>);

impl LambdaMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

pub fn lambda_matrix() -> LambdaMatrix {
    #[rustfmt::skip]
    let m = Matrix4::new(
        1.0,  1.0,  1.0,  1.0,
        1.0,  1.0, -1.0, -1.0,
        1.0, -1.0,  1.0, -1.0,
        1.0, -1.0, -1.0,  1.0,
    );
    LambdaMatrix(m)
}
