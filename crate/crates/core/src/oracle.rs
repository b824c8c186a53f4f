//! Dense double-precision state-vector simulator used as ground truth.
//!
//! Amplitude index `i` has qubit 0 as its most significant bit (see
//! [`crate::bits::to_index`]). Runs of one-qubit gates are multiplied into a
//! single 2x2 matrix per qubit and applied lazily, just before the qubit
//! enters a two-qubit gate; all CZs of a cycle share one diagonal pass.

use crate::bits::{to_index, Bits};
use crate::circuits::{mul2, Circuit, GateKind, Mat2, ID2};
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest qubit count the oracle accepts by default (16 GiB would be 30).
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Entries per rayon task in the elementwise passes.
const PAR_CHUNK: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(bits: &[u8]) -> Self {
        let n = bits.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[to_index(bits)] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        let partial: Vec<f64> = self
            .amps
            .par_chunks(PAR_CHUNK)
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        partial.iter().sum()
    }

    pub fn amplitude(&self, bits: &[u8]) -> Complex64 {
        self.amps[to_index(bits)]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.par_iter().map(|z| z.norm_sqr()).collect()
    }

    /// Applies `m` (`m[out][in]`) to qubit `q`.
    pub fn apply1(&mut self, q: usize, m: &Mat2) {
        let stride = 1usize << (self.n - 1 - q);
        let kernel = |lo: &mut Complex64, hi: &mut Complex64| {
            let (a, b) = (*lo, *hi);
            *lo = m[0][0] * a + m[0][1] * b;
            *hi = m[1][0] * a + m[1][1] * b;
        };
        if stride >= PAR_CHUNK {
            for block in self.amps.chunks_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(a, b)| kernel(a, b));
            }
        } else {
            let per = (PAR_CHUNK / (2 * stride)).max(1) * 2 * stride;
            self.amps.par_chunks_mut(per).for_each(|chunk| {
                for block in chunk.chunks_mut(2 * stride) {
                    let (lo, hi) = block.split_at_mut(stride);
                    lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| kernel(a, b));
                }
            });
        }
    }

    /// Applies a general two-qubit gate `m` (basis `2 * b_a + b_b`).
    pub fn apply2(&mut self, a: usize, b: usize, m: &[[Complex64; 4]; 4]) {
        let n = self.n;
        let (ma, mb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        let amps = &mut self.amps;
        for i in 0..amps.len() {
            if i & ma != 0 || i & mb != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let v = idx.map(|j| amps[j]);
            for (r, &j) in idx.iter().enumerate() {
                amps[j] = (0..4).map(|c| m[r][c] * v[c]).sum();
            }
        }
    }

    /// Applies a product of CZ gates in one pass.
    pub fn apply_cz_layer(&mut self, pairs: &[(usize, usize)]) {
        if pairs.is_empty() {
            return;
        }
        let n = self.n;
        let masks: Vec<usize> = pairs
            .iter()
            .map(|&(a, b)| (1usize << (n - 1 - a)) | (1usize << (n - 1 - b)))
            .collect();
        self.amps.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * PAR_CHUNK;
            for (k, z) in chunk.iter_mut().enumerate() {
                let i = base + k;
                let odd = masks.iter().filter(|&&m| i & m == m).count() & 1;
                if odd == 1 {
                    *z = -*z;
                }
            }
        });
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooManyQubits(n, cap));
    }
    Ok(())
}

/// Evolves `|in_bits>` through the circuit, leaving the trailing one-qubit
/// matrices unapplied; returns them alongside the state.
fn evolve_pending(circuit: &Circuit, in_bits: &[u8], cap: usize) -> Result<(StateVector, Vec<Mat2>)> {
    let n = circuit.n();
    check_cap(n, cap)?;
    if in_bits.len() != n {
        return invalid(format!("input has {} bits, circuit has {n} qubits", in_bits.len()));
    }
    let mut pending = vec![ID2; n];
    let mut psi: Option<StateVector> = None;
    let mut i = 0;
    let gates = &circuit.gates;
    while i < gates.len() {
        let cycle = gates[i].cycle;
        let mut cz = Vec::new();
        let mut other2 = Vec::new();
        while i < gates.len() && gates[i].cycle == cycle {
            let g = &gates[i];
            match (g.q1, g.kind) {
                (None, k) => pending[g.q0] = mul2(&k.matrix1().unwrap(), &pending[g.q0]),
                (Some(b), GateKind::CZ) => cz.push((g.q0, b)),
                (Some(b), k) => other2.push((g.q0, b, k)),
            }
            i += 1;
        }
        if cz.is_empty() && other2.is_empty() {
            continue;
        }
        // The state is a product state until the first two-qubit gate.
        let state = psi.get_or_insert_with(|| {
            let mut s = StateVector::basis(&vec![0; n]);
            s.amps[0] = Complex64::new(0.0, 0.0);
            let cols: Vec<[Complex64; 2]> = (0..n)
                .map(|q| [pending[q][0][in_bits[q] as usize], pending[q][1][in_bits[q] as usize]])
                .collect();
            s.amps.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(c, chunk)| {
                for (k, z) in chunk.iter_mut().enumerate() {
                    let idx = c * PAR_CHUNK + k;
                    let mut v = Complex64::new(1.0, 0.0);
                    for (q, col) in cols.iter().enumerate() {
                        v *= col[(idx >> (n - 1 - q)) & 1];
                    }
                    *z = v;
                }
            });
            pending.iter_mut().for_each(|m| *m = ID2);
            s
        });
        let touched = cz.iter().copied().chain(other2.iter().map(|&(a, b, _)| (a, b)));
        for (a, b) in touched {
            for q in [a, b] {
                if pending[q] != ID2 {
                    state.apply1(q, &pending[q]);
                    pending[q] = ID2;
                }
            }
        }
        state.apply_cz_layer(&cz);
        for (a, b, k) in other2 {
            state.apply2(a, b, &k.matrix2().unwrap());
        }
    }
    let psi = match psi {
        Some(s) => s,
        None => {
            // No two-qubit gates at all: apply the pending matrices directly.
            let mut s = StateVector::basis(in_bits);
            for (q, m) in pending.iter().enumerate() {
                s.apply1(q, m);
            }
            return Ok((s, vec![ID2; n]));
        }
    };
    Ok((psi, pending))
}

/// Final state `U |in_bits>`, capped at `cap` qubits.
pub fn evolve_with_cap(circuit: &Circuit, in_bits: &[u8], cap: usize) -> Result<StateVector> {
    let (mut psi, pending) = evolve_pending(circuit, in_bits, cap)?;
    for (q, m) in pending.iter().enumerate() {
        if *m != ID2 {
            psi.apply1(q, m);
        }
    }
    Ok(psi)
}

/// Final state `U |0...0>`.
pub fn evolve(circuit: &Circuit) -> Result<StateVector> {
    evolve_with_cap(circuit, &vec![0; circuit.n()], DEFAULT_QUBIT_CAP)
}

/// `<out|U|in>`.
pub fn exact_amplitude(circuit: &Circuit, in_bits: &[u8], out_bits: &[u8]) -> Result<Complex64> {
    Ok(exact_amplitudes(circuit, in_bits, &[out_bits.to_vec()])?[0])
}

/// `<out|U|in>` for several outputs from one evolution.
pub fn exact_amplitudes(circuit: &Circuit, in_bits: &[u8], outs: &[Bits]) -> Result<Vec<Complex64>> {
    let n = circuit.n();
    if let Some(o) = outs.iter().find(|o| o.len() != n) {
        return invalid(format!("output has {} bits, circuit has {n} qubits", o.len()));
    }
    let (psi, pending) = evolve_pending(circuit, in_bits, DEFAULT_QUBIT_CAP)?;
    // <out| P |psi> where P is the product of pending matrices: contract
    // the row vectors <out_q| P_q into psi one entry at a time.
    Ok(outs
        .iter()
        .map(|out| {
            let rows: Vec<[Complex64; 2]> = (0..n).map(|q| pending[q][out[q] as usize]).collect();
            psi.amps
                .par_chunks(PAR_CHUNK)
                .enumerate()
                .map(|(c, chunk)| {
                    chunk
                        .iter()
                        .enumerate()
                        .map(|(k, z)| {
                            let idx = c * PAR_CHUNK + k;
                            let mut w = *z;
                            for (q, row) in rows.iter().enumerate() {
                                w *= row[(idx >> (n - 1 - q)) & 1];
                            }
                            w
                        })
                        .sum::<Complex64>()
                })
                .collect::<Vec<_>>()
                .into_iter()
                .sum()
        })
        .collect())
}

/// `|<b|U|in>|^2` for every `b`, indexed by [`to_index`].
pub fn exact_distribution(circuit: &Circuit, in_bits: &[u8]) -> Result<Vec<f64>> {
    Ok(evolve_with_cap(circuit, in_bits, DEFAULT_QUBIT_CAP)?.probabilities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::from_index;
    use crate::circuits::{generate_rqc, DepthSpec, Gate, Lattice};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Straightforward gate-by-gate evolution without any fusion.
    fn reference(c: &Circuit, in_bits: &[u8]) -> StateVector {
        let mut s = StateVector::basis(in_bits);
        for g in &c.gates {
            match g.q1 {
                None => s.apply1(g.q0, &g.kind.matrix1().unwrap()),
                Some(b) => s.apply2(g.q0, b, &g.kind.matrix2().unwrap()),
            }
        }
        s
    }

    #[test]
    fn hadamards_give_uniform_state() {
        let l = Lattice::grid(2, 3).unwrap();
        let gates = (0..6).map(|q| Gate::one(GateKind::H, q, 0)).collect();
        let c = Circuit::new(l, DepthSpec::new(0), gates, None).unwrap();
        let s = evolve_with_cap(&c, &[0; 6], DEFAULT_QUBIT_CAP).unwrap();
        for z in &s.amps {
            assert!(close(*z, Complex64::new(0.125, 0.0), 1e-14));
        }
    }

    #[test]
    fn depth_zero_is_identity() {
        let l = Lattice::grid(2, 2).unwrap();
        let c = generate_rqc(&l, DepthSpec::new(0), 1).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let a = exact_amplitude(&c, &from_index(i, 4), &from_index(j, 4)).unwrap();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(close(a, Complex64::new(want, 0.0), 1e-12));
            }
        }
    }

    #[test]
    fn cz_phases_only_11() {
        let mut s = StateVector { n: 2, amps: vec![Complex64::new(0.5, 0.0); 4] };
        s.apply_cz_layer(&[(0, 1)]);
        let want = [0.5, 0.5, 0.5, -0.5];
        for (z, w) in s.amps.iter().zip(want) {
            assert_eq!(z.re, w);
        }
    }

    #[test]
    fn fused_evolution_matches_reference() {
        for (spec, t) in [("grid:3x3", 12), ("grid:2x4", 9), ("bristlecone:24", 3)] {
            let l = Lattice::from_spec(spec).unwrap();
            let c = generate_rqc(&l, DepthSpec::new(t), 4).unwrap();
            let mut inp = vec![0; l.len()];
            inp[1] = 1;
            let a = evolve_with_cap(&c, &inp, DEFAULT_QUBIT_CAP).unwrap();
            if l.len() <= 12 {
                let b = reference(&c, &inp);
                for (x, y) in a.amps.iter().zip(&b.amps) {
                    assert!(close(*x, *y, 1e-12));
                }
            }
            assert!((a.norm_sqr() - 1.0).abs() < 1e-12, "{spec}: {}", a.norm_sqr());
            let out = from_index(5, l.len());
            let amp = exact_amplitude(&c, &inp, &out).unwrap();
            assert!(close(amp, a.amplitude(&out), 1e-12));
        }
    }

    #[test]
    fn iswap_circuit_matches_reference() {
        let l = Lattice::grid(1, 3).unwrap();
        let gates = vec![
            Gate::one(GateKind::H, 0, 0),
            Gate::one(GateKind::X12, 2, 0),
            Gate::two(GateKind::ISWAP, 0, 1, 1),
            Gate::one(GateKind::T, 2, 1),
            Gate::two(GateKind::CZ, 1, 2, 2),
        ];
        let c = Circuit::new(l, DepthSpec::new(2), gates, None).unwrap();
        let a = evolve_with_cap(&c, &[0, 1, 0], 26).unwrap();
        let b = reference(&c, &[0, 1, 0]);
        for (x, y) in a.amps.iter().zip(&b.amps) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn distribution_sums_to_one_and_cap_enforced() {
        let l = Lattice::grid(3, 4).unwrap();
        let c = generate_rqc(&l, DepthSpec::new(16), 9).unwrap();
        let p = exact_distribution(&c, &[0; 12]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(matches!(evolve_with_cap(&c, &[0; 12], 10), Err(Error::TooManyQubits(12, 10))));
    }
}
