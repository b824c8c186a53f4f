//! Dense complex tensors with labelled, power-of-two indexes.
//!
//! Storage is row-major: the last index varies fastest.

mod bench;
mod contract;
mod permute;

pub use bench::{benchmark_permute, BenchRow};
pub use contract::{contract, contract_all, matmul};
pub use permute::{
    permute_fast, permute_fast_with, permute_naive, plan_permutation, Move, MoveKind,
    MoveMapCache, PermutePlan, DEFAULT_MU, DEFAULT_NU,
};

use crate::error::{invalid, Error, Result};
use num_complex::{Complex, Complex32, Complex64};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Index label. Labels are opaque integers; see `network::label` for the
/// encoding used by the circuit networks.
pub type Label = u64;

/// Element type of a tensor: single or double precision complex.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Default
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    /// Bytes per element.
    const BYTES: usize;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn conj(self) -> Self;
}

impl Scalar for Complex32 {
    const ZERO: Self = Complex::new(0.0, 0.0);
    const ONE: Self = Complex::new(1.0, 0.0);
    const BYTES: usize = 8;
    fn from_c64(z: Complex64) -> Self {
        Complex::new(z.re as f32, z.im as f32)
    }
    fn to_c64(self) -> Complex64 {
        Complex::new(self.re as f64, self.im as f64)
    }
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex::new(0.0, 0.0);
    const ONE: Self = Complex::new(1.0, 0.0);
    const BYTES: usize = 16;
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}

/// Dense tensor. `data.len()` is the product of `dims`; a rank-0 tensor
/// holds one scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    labels: Vec<Label>,
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(labels: Vec<Label>, dims: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if labels.len() != dims.len() {
            return invalid("label and dimension counts differ");
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return invalid(format!("duplicate label {l}"));
            }
        }
        if let Some(d) = dims.iter().find(|d| !d.is_power_of_two()) {
            return invalid(format!("dimension {d} is not a power of two"));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::Dimension(format!(
                "data length {} != product of dims {}",
                data.len(),
                len
            )));
        }
        Ok(Tensor { labels, dims, data })
    }

    pub fn zeros(labels: Vec<Label>, dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(labels, dims, vec![T::ZERO; len])
    }

    pub fn scalar(v: T) -> Self {
        Tensor {
            labels: vec![],
            dims: vec![],
            data: vec![v],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn dim_of(&self, label: Label) -> Option<usize> {
        self.position(label).map(|p| self.dims[p])
    }

    /// Value of a rank-0 tensor.
    pub fn scalar_value(&self) -> Option<T> {
        (self.rank() == 0).then(|| self.data[0])
    }

    pub fn relabel(&mut self, from: Label, to: Label) -> Result<()> {
        if from != to && self.labels.contains(&to) {
            return invalid(format!("label {to} already present"));
        }
        match self.position(from) {
            Some(p) => {
                self.labels[p] = to;
                Ok(())
            }
            None => invalid(format!("label {from} not present")),
        }
    }

    /// Element at a multi-index (one coordinate per index).
    pub fn get(&self, idx: &[usize]) -> T {
        let mut off = 0;
        for (i, &x) in idx.iter().enumerate() {
            off = off * self.dims[i] + x;
        }
        self.data[off]
    }

    /// Reorders indexes so that labels appear in `order`.
    pub fn permuted_to(&self, order: &[Label]) -> Result<Self> {
        if order.len() != self.rank() {
            return invalid("permutation order must list every label");
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| {
                self.position(*l)
                    .ok_or_else(|| Error::Invalid(format!("label {l} not present")))
            })
            .collect::<Result<_>>()?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        permute_auto(self, &perm)
    }

    /// Fixes index `label` to `value`, removing it.
    pub fn slice(&self, label: Label, value: usize) -> Result<Self> {
        let p = self
            .position(label)
            .ok_or_else(|| Error::Invalid(format!("label {label} not present")))?;
        let d = self.dims[p];
        if value >= d {
            return invalid(format!("slice value {value} out of range {d}"));
        }
        let outer: usize = self.dims[..p].iter().product();
        let inner: usize = self.dims[p + 1..].iter().product();
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * d + value) * inner;
            data.extend_from_slice(&self.data[base..base + inner]);
        }
        let mut labels = self.labels.clone();
        let mut dims = self.dims.clone();
        labels.remove(p);
        dims.remove(p);
        Ok(Tensor { labels, dims, data })
    }

    /// Merges `group` (in the given order) into a single index `new`,
    /// placed where the first member of the group sat.
    pub fn fuse(&self, group: &[Label], new: Label) -> Result<Self> {
        if group.is_empty() {
            return invalid("empty fuse group");
        }
        let first = self
            .position(group[0])
            .ok_or_else(|| Error::Invalid(format!("label {} not present", group[0])))?;
        let mut order: Vec<Label> = Vec::with_capacity(self.rank());
        for (i, &l) in self.labels.iter().enumerate() {
            if i == first {
                order.extend_from_slice(group);
            } else if !group.contains(&l) {
                order.push(l);
            }
        }
        let t = self.permuted_to(&order)?;
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        let mut fused = 1;
        for (l, d) in t.labels.iter().zip(&t.dims) {
            if group.contains(l) {
                fused *= d;
                if *l == group[group.len() - 1] {
                    labels.push(new);
                    dims.push(fused);
                }
            } else {
                labels.push(*l);
                dims.push(*d);
            }
        }
        Tensor::new(labels, dims, t.data)
    }

    pub fn conj(&self) -> Self {
        Tensor {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Tensor {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Elementwise sum; `other` is first brought to this tensor's label order.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let o = other.permuted_to(&self.labels)?;
        if o.dims != self.dims {
            return Err(Error::Dimension("addend dimensions differ".into()));
        }
        Ok(Tensor {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| U::from_c64(z.to_c64())).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.to_c64().norm_sqr()).sum()
    }
}

/// Tensors below this many entries are permuted with the naive kernel;
/// planning overhead dominates there.
const FAST_PERMUTE_MIN: usize = 1 << 12;

pub(crate) fn permute_auto<T: Scalar>(t: &Tensor<T>, perm: &[usize]) -> Result<Tensor<T>> {
    if t.len() < FAST_PERMUTE_MIN {
        return permute_naive(t, perm);
    }
    let plan = plan_permutation(t.dims(), perm, DEFAULT_MU, DEFAULT_NU)?;
    permute_fast(t, &plan, rayon::current_num_threads())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn slice_removes_index() {
        let t = Tensor::new(vec![1, 2], vec![2, 2], vec![c(1.), c(2.), c(3.), c(4.)]).unwrap();
        let s = t.slice(1, 1).unwrap();
        assert_eq!(s.labels(), &[2]);
        assert_eq!(s.data(), &[c(3.), c(4.)]);
        let s = t.slice(2, 0).unwrap();
        assert_eq!(s.data(), &[c(1.), c(3.)]);
    }

    #[test]
    fn fuse_groups_adjacent() {
        let data: Vec<_> = (0..8).map(|i| c(i as f64)).collect();
        let t = Tensor::new(vec![1, 2, 3], vec![2, 2, 2], data).unwrap();
        let f = t.fuse(&[3, 1], 9).unwrap();
        assert_eq!(f.labels(), &[2, 9]);
        assert_eq!(f.dims(), &[2, 4]);
        // f[b, c*2 + a] = t[a, b, c]
        assert_eq!(f.get(&[1, 2]), t.get(&[0, 1, 1]));
        assert_eq!(f.get(&[0, 1]), t.get(&[1, 0, 0]));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Tensor::<Complex64>::zeros(vec![1], vec![3]).is_err());
    }

    #[test]
    fn rejects_duplicate_labels() {
        assert!(Tensor::<Complex64>::zeros(vec![1, 1], vec![2, 2]).is_err());
    }
}
