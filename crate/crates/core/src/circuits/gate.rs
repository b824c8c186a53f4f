//! Gate set, unitaries and operator-Schmidt factorizations.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    T,
    X12,
    Y12,
    CZ,
    ISWAP,
    /// Projection onto |0> (input/output constraint).
    Delta0,
    /// Projection onto |1>.
    Delta1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub q0: usize,
    pub q1: Option<usize>,
    pub cycle: usize,
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const O: Complex64 = c(0.0, 0.0);
const I1: Complex64 = c(1.0, 0.0);

pub const ID2: Mat2 = [[I1, O], [O, I1]];
pub const PAULI_X: Mat2 = [[O, I1], [I1, O]];
pub const PAULI_Y: Mat2 = [[O, c(0.0, -1.0)], [c(0.0, 1.0), O]];
pub const PAULI_Z: Mat2 = [[I1, O], [O, c(-1.0, 0.0)]];

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ | GateKind::ISWAP => 2,
            _ => 1,
        }
    }

    /// Lower-case name used in circuit files.
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::T => "t",
            GateKind::X12 => "x_1_2",
            GateKind::Y12 => "y_1_2",
            GateKind::CZ => "cz",
            GateKind::ISWAP => "iswap",
            GateKind::Delta0 => "delta_0",
            GateKind::Delta1 => "delta_1",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "h" => GateKind::H,
            "t" => GateKind::T,
            "x_1_2" => GateKind::X12,
            "y_1_2" => GateKind::Y12,
            "cz" => GateKind::CZ,
            "iswap" => GateKind::ISWAP,
            "delta_0" => GateKind::Delta0,
            "delta_1" => GateKind::Delta1,
            _ => return None,
        })
    }

    /// 2x2 matrix `m[out][in]` of a one-qubit gate.
    pub fn matrix1(self) -> Option<Mat2> {
        let h = FRAC_1_SQRT_2;
        Some(match self {
            GateKind::H => [[c(h, 0.), c(h, 0.)], [c(h, 0.), c(-h, 0.)]],
            GateKind::T => [[I1, O], [O, c(h, h)]],
            GateKind::X12 => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
            GateKind::Y12 => [[c(0.5, 0.5), c(-0.5, -0.5)], [c(0.5, 0.5), c(0.5, 0.5)]],
            GateKind::Delta0 => [[I1, O], [O, O]],
            GateKind::Delta1 => [[O, O], [O, I1]],
            _ => return None,
        })
    }

    /// 4x4 matrix of a two-qubit gate; basis index is `2 * b0 + b1`.
    pub fn matrix2(self) -> Option<Mat4> {
        let mut m = [[O; 4]; 4];
        match self {
            GateKind::CZ => {
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] = I1;
                }
                m[3][3] = c(-1.0, 0.0);
            }
            GateKind::ISWAP => {
                m[0][0] = I1;
                m[3][3] = I1;
                m[1][2] = c(0.0, 1.0);
                m[2][1] = c(0.0, 1.0);
            }
            _ => return None,
        }
        Some(m)
    }

    /// Operator-Schmidt factorization `U = sum_k A_k (x) B_k` with `A_k`
    /// acting on the first qubit; the number of terms is the Schmidt rank.
    pub fn schmidt_factors(self) -> Option<(Vec<Mat2>, Vec<Mat2>)> {
        let scale = |m: Mat2, s: Complex64| m.map(|r| r.map(|z| z * s));
        match self {
            GateKind::CZ => Some((
                vec![GateKind::Delta0.matrix1()?, GateKind::Delta1.matrix1()?],
                vec![ID2, PAULI_Z],
            )),
            GateKind::ISWAP => Some((
                vec![ID2, PAULI_Z, PAULI_X, PAULI_Y],
                vec![
                    scale(ID2, c(0.5, 0.)),
                    scale(PAULI_Z, c(0.5, 0.)),
                    scale(PAULI_X, c(0., 0.5)),
                    scale(PAULI_Y, c(0., 0.5)),
                ],
            )),
            _ => None,
        }
    }

    pub fn schmidt_rank(self) -> usize {
        self.schmidt_factors().map_or(1, |(a, _)| a.len())
    }
}

impl Gate {
    pub fn one(kind: GateKind, q: usize, cycle: usize) -> Self {
        Gate { kind, q0: q, q1: None, cycle }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, cycle: usize) -> Self {
        Gate { kind, q0: a, q1: Some(b), cycle }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        std::iter::once(self.q0).chain(self.q1)
    }
}

/// Product `a * b` of 2x2 matrices.
pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut m = [[O; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}
