//! Timing harness for the permutation kernel.

use super::{permute_fast, permute_naive, Move, MoveKind, PermutePlan, Tensor, DEFAULT_MU, DEFAULT_NU};
use crate::error::Result;
use num_complex::Complex32;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub op: String,
    pub rank: usize,
    pub gamma: usize,
    pub threads: usize,
    pub median_ns: u64,
    pub p10_ns: u64,
    pub p90_ns: u64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "op,rank,gamma,threads,median_ns,p10_ns,p90_ns";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.op, self.rank, self.gamma, self.threads, self.median_ns, self.p10_ns, self.p90_ns
        )
    }
}

fn quantiles(mut v: Vec<u64>) -> (u64, u64, u64) {
    v.sort_unstable();
    let q = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
    (q(0.5), q(0.1), q(0.9))
}

fn time<F: FnMut()>(reps: usize, mut f: F) -> (u64, u64, u64) {
    f();
    let samples = (0..reps.max(1))
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed().as_nanos() as u64
        })
        .collect();
    quantiles(samples)
}

/// Times single L and R moves of boundary `gamma` on a rank-`rank` binary
/// tensor against the naive kernel performing the same permutation.
/// Emits rows `L`, `naive_L`, `R`, `naive_R` per (gamma, threads).
pub fn benchmark_permute(
    rank: usize,
    gammas: &[usize],
    threads: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = vec![2usize; rank];
    let n = 1usize << rank;
    let data: Vec<Complex32> = (0..n).map(|i| Complex32::new(i as f32, -(i as f32))).collect();
    let t = Tensor::new((0..rank as u64).collect(), dims.clone(), data)?;
    let mut rows = Vec::new();
    for &g in gammas.iter().filter(|&&g| g <= rank) {
        let left = rank - g;
        let mut lperm: Vec<usize> = (0..left).collect();
        lperm.shuffle(&mut rng);
        lperm.extend(left..rank);
        let mut rperm: Vec<usize> = (left..rank).collect();
        rperm.shuffle(&mut rng);
        let rperm: Vec<usize> = (0..left).chain(rperm).collect();
        for (name, perm) in [("L", &lperm), ("R", &rperm)] {
            let mv = match name {
                "L" => Move { kind: MoveKind::L, gamma: g, sub: perm[..left].to_vec() },
                _ => Move { kind: MoveKind::R, gamma: g, sub: perm[left..].iter().map(|p| p - left).collect() },
            };
            let plan = PermutePlan {
                permutation: perm.clone(),
                dims: dims.clone(),
                binary: perm.clone(),
                moves: vec![mv],
                mu: DEFAULT_MU,
                nu: DEFAULT_NU,
                fallback: None,
            };
            for &th in threads {
                let (m, p10, p90) = time(reps, || {
                    std::hint::black_box(permute_fast(&t, &plan, th).unwrap());
                });
                rows.push(row(name, rank, g, th, m, p10, p90));
            }
            let (m, p10, p90) = time(reps, || {
                std::hint::black_box(permute_naive(&t, perm).unwrap());
            });
            rows.push(row(&format!("naive_{name}"), rank, g, 1, m, p10, p90));
        }
    }
    Ok(rows)
}

fn row(op: &str, rank: usize, gamma: usize, threads: usize, m: u64, p10: u64, p90: u64) -> BenchRow {
    BenchRow {
        op: op.to_string(),
        rank,
        gamma,
        threads,
        median_ns: m,
        p10_ns: p10,
        p90_ns: p90,
    }
}
