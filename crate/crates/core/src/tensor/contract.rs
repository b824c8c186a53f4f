//! Pairwise contraction: permute both operands to matrix form, multiply,
//! and read the result off as (free of a) ++ (free of b).

use super::{Label, Scalar, Tensor};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// Multiply-adds above which the row loop is split across the rayon pool.
const PAR_WORK: usize = 1 << 16;

/// `c[m x n] = a[m x k] * b[k x n]`, all row-major.
pub fn matmul<T: Scalar>(a: &[T], b: &[T], m: usize, k: usize, n: usize) -> Vec<T> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut c = vec![T::ZERO; m * n];
    if m == 0 || n == 0 {
        return c;
    }
    let row = |(i, ci): (usize, &mut [T])| {
        let ai = &a[i * k..(i + 1) * k];
        for (p, &aip) in ai.iter().enumerate() {
            let bp = &b[p * n..(p + 1) * n];
            for (cij, &bpj) in ci.iter_mut().zip(bp) {
                *cij += aip * bpj;
            }
        }
    };
    if m * n * k >= PAR_WORK && m > 1 {
        c.par_chunks_mut(n).enumerate().for_each(row);
    } else if m * n * k >= PAR_WORK && n >= 64 {
        // single row: split the columns instead
        let cols = n.div_ceil(rayon::current_num_threads().max(1)).max(64);
        c.par_chunks_mut(cols).enumerate().for_each(|(j0, cj)| {
            let off = j0 * cols;
            for (p, &ap) in a.iter().enumerate() {
                let bp = &b[p * n + off..p * n + off + cj.len()];
                for (x, &y) in cj.iter_mut().zip(bp) {
                    *x += ap * y;
                }
            }
        });
    } else {
        c.chunks_mut(n).enumerate().for_each(row);
    }
    c
}

/// Contracts `a` and `b` over `shared`. The result carries a's free labels
/// followed by b's free labels, each in their original order.
pub fn contract<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, shared: &[Label]) -> Result<Tensor<T>> {
    for &l in shared {
        let (da, db) = match (a.dim_of(l), b.dim_of(l)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::Dimension(format!("label {l} missing from an operand"))),
        };
        if da != db {
            return Err(Error::Dimension(format!("label {l}: {da} vs {db}")));
        }
    }
    let free_a: Vec<Label> = a.labels().iter().copied().filter(|l| !shared.contains(l)).collect();
    let free_b: Vec<Label> = b.labels().iter().copied().filter(|l| !shared.contains(l)).collect();
    if free_a.iter().any(|l| free_b.contains(l)) {
        return Err(Error::Dimension("free label present in both operands".into()));
    }
    let order_a: Vec<Label> = free_a.iter().chain(shared).copied().collect();
    let order_b: Vec<Label> = shared.iter().chain(&free_b).copied().collect();
    let pa = a.permuted_to(&order_a)?;
    let pb = b.permuted_to(&order_b)?;
    let k: usize = shared.iter().map(|&l| a.dim_of(l).unwrap()).product();
    let m = a.len() / k;
    let n = b.len() / k;
    let data = matmul(pa.data(), pb.data(), m, k, n);
    let dims: Vec<usize> = pa.dims()[..free_a.len()]
        .iter()
        .chain(&pb.dims()[shared.len()..])
        .copied()
        .collect();
    Tensor::new(free_a.into_iter().chain(free_b).collect(), dims, data)
}

/// Contracts over every label the two tensors have in common.
pub fn contract_all<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let shared: Vec<Label> = a.labels().iter().copied().filter(|l| b.labels().contains(l)).collect();
    contract(a, b, &shared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn t(labels: Vec<Label>, dims: Vec<usize>, f: impl Fn(usize) -> Complex64) -> Tensor<Complex64> {
        let n = dims.iter().product();
        Tensor::new(labels, dims, (0..n).map(f).collect()).unwrap()
    }

    #[test]
    fn identity_times_identity() {
        let id = |l: Vec<Label>| {
            t(l, vec![2, 2], |i| if i == 0 || i == 3 { Complex64::new(1., 0.) } else { Complex64::new(0., 0.) })
        };
        let r = contract_all(&id(vec![1, 2]), &id(vec![2, 3])).unwrap();
        assert_eq!(r.labels(), &[1, 3]);
        assert_eq!(r.data(), id(vec![1, 3]).data());
    }

    #[test]
    fn rank3_against_triple_loop() {
        let a = t(vec![1, 2, 3], vec![2, 4, 2], |i| Complex64::new(i as f64, 1.0 - i as f64));
        let b = t(vec![4, 2, 5], vec![2, 4, 2], |i| Complex64::new((i * i) as f64 * 0.1, i as f64));
        let r = contract(&a, &b, &[2]).unwrap();
        assert_eq!(r.labels(), &[1, 3, 4, 5]);
        for x in 0..2 {
            for y in 0..2 {
                for u in 0..2 {
                    for v in 0..2 {
                        let mut s = Complex64::new(0., 0.);
                        for k in 0..4 {
                            s += a.get(&[x, k, y]) * b.get(&[u, k, v]);
                        }
                        assert!((r.get(&[x, y, u, v]) - s).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_dims_rejected() {
        let a = t(vec![1, 2], vec![2, 2], |_| Complex64::new(1., 0.));
        let b = t(vec![2], vec![4], |_| Complex64::new(1., 0.));
        assert!(contract(&a, &b, &[2]).is_err());
    }

    #[test]
    fn single_row_parallel_path() {
        let k = 64;
        let n = 2048;
        let a: Vec<Complex64> = (0..k).map(|i| Complex64::new(i as f64, 0.5)).collect();
        let b: Vec<Complex64> = (0..k * n).map(|i| Complex64::new((i % 7) as f64, 1.0)).collect();
        let c = matmul(&a, &b, 1, k, n);
        for j in [0, 1, 777, n - 1] {
            let mut s = Complex64::new(0., 0.);
            for p in 0..k {
                s += a[p] * b[p * n + j];
            }
            assert!((c[j] - s).norm() < 1e-9);
        }
    }
}
