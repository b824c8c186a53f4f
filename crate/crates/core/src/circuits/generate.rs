//! Random circuit generator.
//!
//! Two-qubit layers cycle through eight brick patterns, alternating
//! horizontal and vertical so that no two consecutive layers share an
//! orientation. Every nearest-neighbour pair of the square grid belongs to
//! exactly one pattern, so each qubit meets each neighbour exactly once per
//! eight cycles.

use super::{Circuit, DepthSpec, Gate, GateKind, Lattice};
use crate::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the generator recorded in circuit file headers.
pub const RNG_NAME: &str = "chacha8";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Pairs `(r, c)-(r, c+1)`.
    Horizontal,
    /// Pairs `(r, c)-(r+1, c)`.
    Vertical,
}

/// Layer `k` (cycle `8m + k + 1`) pairs sites whose first endpoint has
/// `(coordinate along the pair, coordinate across) mod 2 = (a, b)`.
pub const LAYER_ORDER: [(Orientation, i32, i32); 8] = [
    (Orientation::Horizontal, 0, 0),
    (Orientation::Vertical, 0, 0),
    (Orientation::Horizontal, 1, 1),
    (Orientation::Vertical, 1, 1),
    (Orientation::Horizontal, 0, 1),
    (Orientation::Vertical, 0, 1),
    (Orientation::Horizontal, 1, 0),
    (Orientation::Vertical, 1, 0),
];

/// Lattice pairs acted on in two-qubit cycle `cycle >= 1`.
pub fn layer_pattern(lattice: &Lattice, cycle: usize) -> Vec<(usize, usize)> {
    let (orient, a, b) = LAYER_ORDER[(cycle - 1) % 8];
    let mut out = Vec::new();
    for (q, &(r, c)) in lattice.sites().iter().enumerate() {
        let (along, across, next) = match orient {
            Orientation::Horizontal => (c, r, (r, c + 1)),
            Orientation::Vertical => (r, c, (r + 1, c)),
        };
        if along.rem_euclid(2) == a && across.rem_euclid(2) == b {
            if let Some(p) = lattice.qubit_at(next) {
                out.push((q.min(p), q.max(p)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Generates a random circuit of depth `1+t+1`.
///
/// Cycle 0 and cycle `t+1` are Hadamard layers. In two-qubit cycle `c`, a
/// qubit outside the current pattern gets X^1/2 or Y^1/2 (uniformly) if it
/// was under a CZ in cycle `c-1`, and T if its gate in cycle `c-1` was
/// X^1/2, Y^1/2 or H. One random draw is consumed per X^1/2/Y^1/2 choice,
/// in cycle then qubit order.
pub fn generate_rqc(lattice: &Lattice, depth: DepthSpec, seed: u64) -> Result<Circuit> {
    let n = lattice.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::one(GateKind::H, q, 0)).collect();
    let mut prev: Vec<Option<GateKind>> = vec![Some(GateKind::H); n];
    for cycle in 1..=depth.t {
        let mut cur: Vec<Option<GateKind>> = vec![None; n];
        for (a, b) in layer_pattern(lattice, cycle) {
            gates.push(Gate::two(GateKind::CZ, a, b, cycle));
            cur[a] = Some(GateKind::CZ);
            cur[b] = Some(GateKind::CZ);
        }
        for q in 0..n {
            if cur[q].is_some() {
                continue;
            }
            let kind = match prev[q] {
                Some(GateKind::CZ) => Some(if rng.gen_bool(0.5) {
                    GateKind::X12
                } else {
                    GateKind::Y12
                }),
                Some(GateKind::X12 | GateKind::Y12 | GateKind::H) => Some(GateKind::T),
                _ => None,
            };
            if let Some(k) = kind {
                gates.push(Gate::one(k, q, cycle));
                cur[q] = Some(k);
            }
        }
        prev = cur;
    }
    gates.extend((0..n).map(|q| Gate::one(GateKind::H, q, depth.t + 1)));
    Circuit::new(lattice.clone(), depth, gates, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn patterns_partition_all_edges() {
        let l = Lattice::grid(5, 6).unwrap();
        let mut seen = BTreeMap::new();
        for c in 1..=8 {
            for e in layer_pattern(&l, c) {
                *seen.entry(e).or_insert(0) += 1;
            }
        }
        assert_eq!(seen.len(), l.edges().len());
        assert!(seen.values().all(|&v| v == 1));
    }

    #[test]
    fn orientations_alternate() {
        for k in 0..8 {
            assert_ne!(LAYER_ORDER[k].0, LAYER_ORDER[(k + 1) % 8].0);
        }
    }

    #[test]
    fn layers_touch_each_qubit_at_most_once() {
        let l = Lattice::bristlecone(72).unwrap();
        for c in 1..=8 {
            let mut used = vec![false; l.len()];
            for (a, b) in layer_pattern(&l, c) {
                assert!(!used[a] && !used[b]);
                used[a] = true;
                used[b] = true;
            }
        }
    }

    #[test]
    fn no_t_after_cz_and_first_layer_t() {
        let l = Lattice::grid(4, 4).unwrap();
        let c = generate_rqc(&l, DepthSpec::new(24), 11).unwrap();
        let mut last: Vec<Option<(usize, GateKind)>> = vec![None; 16];
        for g in &c.gates {
            for q in g.qubits() {
                if g.kind == GateKind::T {
                    if let Some((cy, k)) = last[q] {
                        assert!(!(k == GateKind::CZ && cy + 1 == g.cycle));
                    }
                }
                last[q] = Some((g.cycle, g.kind));
            }
        }
        let mut in_cz = [false; 16];
        for g in c.gates.iter().filter(|g| g.cycle == 1 && g.kind == GateKind::CZ) {
            in_cz[g.q0] = true;
            in_cz[g.q1.unwrap()] = true;
        }
        for q in 0..16 {
            let g = c.gates.iter().find(|g| g.cycle == 1 && g.qubits().any(|x| x == q));
            if !in_cz[q] {
                assert_eq!(g.unwrap().kind, GateKind::T);
            }
        }
    }

    #[test]
    fn seeds_change_only_rule_three_choices() {
        let l = Lattice::grid(3, 4).unwrap();
        let a = generate_rqc(&l, DepthSpec::new(16), 1).unwrap();
        let b = generate_rqc(&l, DepthSpec::new(16), 2).unwrap();
        assert_eq!(a.gates.len(), b.gates.len());
        let mut differ = 0;
        for (x, y) in a.gates.iter().zip(&b.gates) {
            assert_eq!((x.cycle, x.q0, x.q1), (y.cycle, y.q0, y.q1));
            if x.kind != y.kind {
                assert!(matches!(x.kind, GateKind::X12 | GateKind::Y12));
                assert!(matches!(y.kind, GateKind::X12 | GateKind::Y12));
                differ += 1;
            }
        }
        assert!(differ > 0);
    }
}
