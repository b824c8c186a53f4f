//! Lattices, gates, the random-circuit generator and the circuit file format.

mod format;
mod gate;
mod generate;
mod lattice;

pub use format::{parse_circuit, write_circuit};
pub use gate::{mul2, Gate, GateKind, Mat2, Mat4, ID2, PAULI_X, PAULI_Y, PAULI_Z};
pub use generate::{generate_rqc, layer_pattern, Orientation, LAYER_ORDER, RNG_NAME};
pub use lattice::{parse_sites, Lattice, LatticeKind, BRISTLECONE_SIZES};

use crate::error::{invalid, Error, Result};

/// Depth `1 + t + 1`: `t` two-qubit cycles between two Hadamard layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthSpec {
    pub t: usize,
}

impl DepthSpec {
    pub fn new(t: usize) -> Self {
        DepthSpec { t }
    }

    /// Accepts `1+t+1` or a bare `t`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let t = match s.split('+').collect::<Vec<_>>().as_slice() {
            [t] => t.trim(),
            ["1", t, "1"] => t.trim(),
            _ => return invalid(format!("bad depth `{s}`, expected 1+t+1")),
        };
        if t.starts_with('-') {
            return invalid("depth must be non-negative");
        }
        t.parse()
            .map(DepthSpec::new)
            .map_err(|_| Error::Invalid(format!("bad depth `{s}`")))
    }

    /// Number of 8-cycle blocks, at least one.
    pub fn blocks(&self) -> usize {
        self.t.div_ceil(8).max(1)
    }
}

impl std::fmt::Display for DepthSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "1+{}+1", self.t)
    }
}

/// A circuit on a lattice; gates sorted by (cycle, first qubit).
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub lattice: Lattice,
    pub depth: DepthSpec,
    pub gates: Vec<Gate>,
    /// Generator provenance, written into the file header.
    pub seed: Option<u64>,
}

impl Circuit {
    pub fn new(lattice: Lattice, depth: DepthSpec, mut gates: Vec<Gate>, seed: Option<u64>) -> Result<Self> {
        gates.sort_by_key(|g| (g.cycle, g.q0));
        let c = Circuit { lattice, depth, gates, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.lattice.len()
    }

    /// Number of cycles including both Hadamard layers.
    pub fn cycles(&self) -> usize {
        self.depth.t + 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let mut last_seen = vec![usize::MAX; n];
        for g in &self.gates {
            if g.kind.arity() != 1 + g.q1.is_some() as usize {
                return invalid(format!("gate {:?} has the wrong number of qubits", g.kind));
            }
            for q in g.qubits() {
                if q >= n {
                    return invalid(format!("qubit {q} out of range"));
                }
                if last_seen[q] == g.cycle {
                    return Err(Error::DuplicateQubit { cycle: g.cycle, qubit: q });
                }
                last_seen[q] = g.cycle;
            }
            if let Some(b) = g.q1 {
                if !self.lattice.adjacent(g.q0, b) {
                    return Err(Error::NotAdjacent(g.q0, b));
                }
            }
        }
        Ok(())
    }

    pub fn two_qubit_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.q1.is_some())
    }
}

/// Number of two-qubit gates with endpoints in different parts of a
/// bipartition of the qubits.
pub fn cz_cut_count(circuit: &Circuit, a: &[usize], b: &[usize]) -> Result<usize> {
    let side = partition_sides(circuit.n(), &[a, b])?;
    Ok(circuit
        .two_qubit_gates()
        .filter(|g| side[g.q0] != side[g.q1.unwrap()])
        .count())
}

/// Part index of every qubit; errors unless the parts are disjoint and
/// cover all qubits.
pub fn partition_sides(n: usize, parts: &[&[usize]]) -> Result<Vec<usize>> {
    let mut side = vec![usize::MAX; n];
    for (i, part) in parts.iter().enumerate() {
        for &q in *part {
            if q >= n {
                return invalid(format!("qubit {q} out of range"));
            }
            if side[q] != usize::MAX {
                return invalid(format!("qubit {q} appears in two parts"));
            }
            side[q] = i;
        }
    }
    if let Some(q) = side.iter().position(|&s| s == usize::MAX) {
        return invalid(format!("qubit {q} is in no part"));
    }
    Ok(side)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_parsing() {
        assert_eq!(DepthSpec::parse("1+32+1").unwrap().t, 32);
        assert_eq!(DepthSpec::parse("8").unwrap().t, 8);
        assert!(DepthSpec::parse("1+-3+1").is_err());
        assert!(DepthSpec::parse("2+3").is_err());
        assert_eq!(DepthSpec::new(17).blocks(), 3);
        assert_eq!(DepthSpec::new(0).blocks(), 1);
    }

    #[test]
    fn trivial_partition_cuts_nothing() {
        let l = Lattice::grid(3, 3).unwrap();
        let c = generate_rqc(&l, DepthSpec::new(16), 3).unwrap();
        let all: Vec<usize> = (0..9).collect();
        assert_eq!(cz_cut_count(&c, &all, &[]).unwrap(), 0);
    }

    #[test]
    fn bad_partitions_rejected() {
        let l = Lattice::grid(2, 2).unwrap();
        let c = generate_rqc(&l, DepthSpec::new(8), 3).unwrap();
        assert!(cz_cut_count(&c, &[0, 1], &[1, 2, 3]).is_err());
        assert!(cz_cut_count(&c, &[0, 1], &[2]).is_err());
    }
}
