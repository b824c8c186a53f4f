//! From a circuit to tensor networks.
//!
//! Every qubit's gates are grouped into blocks of eight two-qubit cycles
//! (the first block also takes the opening Hadamard layer and the input
//! bit, the last block the closing layer and the output bit). A two-qubit
//! gate is split by its operator-Schmidt decomposition into one factor per
//! endpoint joined by a bond of dimension equal to the Schmidt rank. This
//! gives a 3D network of (site, block) tensors; contracting each site's
//! column in time yields a 2D network with one tensor per site whose bond
//! to a neighbour has dimension `2^(number of gates on that pair)`.

use crate::circuits::{layer_pattern, Circuit, DepthSpec, GateKind, Lattice, Mat2};
use crate::error::{invalid, Result};
use crate::tensor::{contract, contract_all, Label, Scalar, Tensor};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

/// Label encoding: the top byte is a tag, the rest the payload.
pub mod label {
    use crate::tensor::Label;

    const SHIFT: u32 = 56;
    pub const TAG_BOND: u64 = 1;
    pub const TAG_GATE: u64 = 2;
    pub const TAG_TIME: u64 = 3;
    pub const TAG_OUT: u64 = 4;
    pub const TAG_WORK: u64 = 5;

    /// Spatial bond between sites `u` and `v` of the 2D network.
    pub fn bond(u: usize, v: usize) -> Label {
        let (a, b) = (u.min(v) as u64, u.max(v) as u64);
        (TAG_BOND << SHIFT) | (a << 28) | b
    }

    /// Bond created by splitting gate number `g` of the circuit.
    pub fn gate(g: usize) -> Label {
        (TAG_GATE << SHIFT) | g as u64
    }

    /// Wire of `site` between block `k` and block `k + 1`.
    pub fn time(site: usize, k: usize) -> Label {
        (TAG_TIME << SHIFT) | ((site as u64) << 28) | k as u64
    }

    /// Open output index of `site`.
    pub fn out(site: usize) -> Label {
        (TAG_OUT << SHIFT) | site as u64
    }

    pub(crate) fn work(k: u64) -> Label {
        (TAG_WORK << SHIFT) | k
    }

    pub fn tag(l: Label) -> u64 {
        l >> SHIFT
    }

    /// Endpoints of a spatial bond label.
    pub fn bond_sites(l: Label) -> Option<(usize, usize)> {
        (tag(l) == TAG_BOND).then_some((((l >> 28) & 0x0fff_ffff) as usize, (l & 0x0fff_ffff) as usize))
    }

    /// Site of an output label.
    pub fn out_site(l: Label) -> Option<usize> {
        (tag(l) == TAG_OUT).then_some((l & 0x00ff_ffff_ffff_ffff) as usize)
    }
}

/// Tensor-network input: input bits, output bits, and the sites whose
/// output is left open (their output bit is ignored).
#[derive(Clone, Debug)]
pub struct Boundary<'a> {
    pub input: &'a [u8],
    pub output: &'a [u8],
    pub open: &'a [usize],
}

/// Network of (site, block) tensors.
#[derive(Clone, Debug)]
pub struct GridNetwork3D<T> {
    pub lattice: Lattice,
    pub blocks: usize,
    /// `tensors[site][block]`.
    pub tensors: Vec<Vec<Tensor<T>>>,
    pub open: Vec<usize>,
    /// Endpoints of every gate-bond label.
    pub gate_sites: HashMap<Label, (usize, usize)>,
}

/// One tensor per site; labels are the bonds to neighbours in ascending
/// neighbour order, then the open output label if any.
#[derive(Clone, Debug)]
pub struct GridNetwork2D<T> {
    pub lattice: Lattice,
    pub tensors: Vec<Tensor<T>>,
    pub open: Vec<usize>,
}

/// Block of a gate in a circuit of depth `1+t+1`.
pub fn block_of(cycle: usize, depth: DepthSpec) -> usize {
    let k = depth.blocks();
    if cycle == 0 {
        0
    } else if cycle > depth.t {
        k - 1
    } else {
        ((cycle - 1) / 8).min(k - 1)
    }
}

/// Unitary of a one-qubit gate as a tensor with labels `[input, output]`.
pub fn gate_tensor(kind: GateKind, input: Label, output: Label) -> Result<Tensor<Complex64>> {
    match kind.matrix1() {
        Some(m) => matrix_tensor(&m, input, output),
        None => invalid(format!("{} is not a one-qubit gate", kind.name())),
    }
}

/// Two-qubit unitary as a rank-4 tensor `[in0, in1, out0, out1]`.
pub fn gate_tensor2(kind: GateKind, labels: [Label; 4]) -> Result<Tensor<Complex64>> {
    let m = match kind.matrix2() {
        Some(m) => m,
        None => return invalid(format!("{} is not a two-qubit gate", kind.name())),
    };
    let mut data = Vec::with_capacity(16);
    for i in 0..4 {
        for o in 0..4 {
            data.push(m[o][i]);
        }
    }
    Tensor::new(labels.to_vec(), vec![2; 4], data)
}

/// Factored form of a two-qubit gate: factor tensors `[in, bond, out]` for
/// the first and second qubit; the bond dimension is the Schmidt rank.
pub fn gate_factors(kind: GateKind, bond: Label, ins: [Label; 2], outs: [Label; 2]) -> Result<[Tensor<Complex64>; 2]> {
    let (a, b) = match kind.schmidt_factors() {
        Some(f) => f,
        None => return invalid(format!("{} is not a two-qubit gate", kind.name())),
    };
    let one = |fs: &[Mat2], i: Label, o: Label| {
        let r = fs.len();
        let mut data = Vec::with_capacity(4 * r);
        for x in 0..2 {
            for f in fs {
                for y in 0..2 {
                    data.push(f[y][x]);
                }
            }
        }
        Tensor::new(vec![i, bond, o], vec![2, r, 2], data)
    };
    Ok([one(&a, ins[0], outs[0])?, one(&b, ins[1], outs[1])?])
}

fn matrix_tensor(m: &Mat2, input: Label, output: Label) -> Result<Tensor<Complex64>> {
    Tensor::new(vec![input, output], vec![2, 2], vec![m[0][0], m[1][0], m[0][1], m[1][1]])
}

/// Builds the (site, block) network for `<output| U |input>`.
pub fn build_3d<T: Scalar>(circuit: &Circuit, bnd: &Boundary) -> Result<GridNetwork3D<T>> {
    let n = circuit.n();
    if bnd.input.len() != n || bnd.output.len() != n {
        return invalid(format!(
            "bit-strings have lengths {} and {}, circuit has {n} qubits",
            bnd.input.len(),
            bnd.output.len()
        ));
    }
    if let Some(&q) = bnd.open.iter().find(|&&q| q >= n) {
        return invalid(format!("open site {q} out of range"));
    }
    let k = circuit.depth.blocks();
    // Gates per (site, block) in cycle order, with their factor tensors.
    let mut per: Vec<Vec<Vec<(usize, Option<(Label, usize)>)>>> = vec![vec![Vec::new(); k]; n];
    let mut gate_sites = HashMap::new();
    for (gi, g) in circuit.gates.iter().enumerate() {
        let b = block_of(g.cycle, circuit.depth);
        per[g.q0][b].push((gi, g.q1.map(|_| (label::gate(gi), 0))));
        if let Some(q1) = g.q1 {
            per[q1][b].push((gi, Some((label::gate(gi), 1))));
            gate_sites.insert(label::gate(gi), (g.q0, q1));
        }
    }
    let cur = label::work(0);
    let next = label::work(1);
    let tensors = (0..n)
        .into_par_iter()
        .map(|q| {
            (0..k)
                .map(|b| {
                    let mut t = if b == 0 {
                        let mut v = vec![Complex64::new(0.0, 0.0); 2];
                        v[bnd.input[q] as usize] = Complex64::new(1.0, 0.0);
                        Tensor::new(vec![cur], vec![2], v)?
                    } else {
                        matrix_tensor(&crate::circuits::ID2, label::time(q, b - 1), cur)?
                    };
                    for &(gi, split) in &per[q][b] {
                        let g = &circuit.gates[gi];
                        let op = match split {
                            None => gate_tensor(g.kind, cur, next)?,
                            Some((bond, side)) => {
                                let f = gate_factors(g.kind, bond, [cur; 2], [next; 2])?;
                                f.into_iter().nth(side).unwrap()
                            }
                        };
                        t = contract(&t, &op, &[cur])?;
                        t.relabel(next, cur)?;
                    }
                    if b + 1 < k {
                        t.relabel(cur, label::time(q, b))?;
                    } else if bnd.open.contains(&q) {
                        t.relabel(cur, label::out(q))?;
                    } else {
                        t = t.slice(cur, bnd.output[q] as usize)?;
                    }
                    Ok(t.cast::<T>())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut open = bnd.open.to_vec();
    open.sort_unstable();
    open.dedup();
    Ok(GridNetwork3D { lattice: circuit.lattice.clone(), blocks: k, tensors, open, gate_sites })
}

/// Contracts every site's column in time and fuses the gate bonds of each
/// neighbour pair into one spatial bond.
pub fn contract_time<T: Scalar>(net: &GridNetwork3D<T>) -> Result<GridNetwork2D<T>> {
    let lat = &net.lattice;
    let tensors = (0..lat.len())
        .into_par_iter()
        .map(|q| {
            let col = &net.tensors[q];
            let mut t = col[0].clone();
            for b in &col[1..] {
                t = contract_all(&t, b)?;
            }
            let gate_labels: Vec<Label> =
                t.labels().iter().copied().filter(|&l| label::tag(l) == label::TAG_GATE).collect();
            let mut order = Vec::new();
            for &p in sorted(lat.neighbors(q)).iter() {
                let mut group: Vec<Label> = gate_labels
                    .iter()
                    .copied()
                    .filter(|&l| {
                        net.gate_sites.get(&l).is_some_and(|&(a, b)| (a == q && b == p) || (a == p && b == q))
                    })
                    .collect();
                if group.is_empty() {
                    continue;
                }
                group.sort_unstable();
                let bond = label::bond(q, p);
                t = t.fuse(&group, bond)?;
                order.push(bond);
            }
            if net.open.contains(&q) {
                order.push(label::out(q));
            }
            t.permuted_to(&order)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridNetwork2D { lattice: lat.clone(), tensors, open: net.open.clone() })
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// `build_3d` followed by `contract_time`.
pub fn build_2d<T: Scalar>(circuit: &Circuit, bnd: &Boundary) -> Result<GridNetwork2D<T>> {
    contract_time(&build_3d::<T>(circuit, bnd)?)
}

impl<T: Scalar> GridNetwork2D<T> {
    pub fn shape(&self) -> NetworkShape {
        NetworkShape {
            labels: self.tensors.iter().map(|t| t.labels().to_vec()).collect(),
            dims: self.tensors.iter().map(|t| t.dims().to_vec()).collect(),
        }
    }

    /// Contracts the whole network site by site (small networks only).
    pub fn contract_full(&self) -> Result<Tensor<T>> {
        let mut acc = Tensor::scalar(T::ONE);
        for t in &self.tensors {
            acc = contract_all(&acc, t)?;
        }
        Ok(acc)
    }
}

impl<T: Scalar> GridNetwork3D<T> {
    /// Contracts all (site, block) tensors, site-major (small networks only).
    pub fn contract_full(&self) -> Result<Tensor<T>> {
        let mut acc = Tensor::scalar(T::ONE);
        for col in &self.tensors {
            for t in col {
                acc = contract_all(&acc, t)?;
            }
        }
        Ok(acc)
    }
}

/// Labels and dimensions of a 2D network without its entries; enough to
/// plan and cost a contraction.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkShape {
    pub labels: Vec<Vec<Label>>,
    pub dims: Vec<Vec<usize>>,
}

impl NetworkShape {
    /// Shape of the network for `circuit` with the given open sites.
    pub fn of_circuit(circuit: &Circuit, open: &[usize]) -> Self {
        let lat = &circuit.lattice;
        let mut rank = HashMap::new();
        for g in circuit.two_qubit_gates() {
            let key = label::bond(g.q0, g.q1.unwrap());
            *rank.entry(key).or_insert(1usize) *= g.kind.schmidt_rank();
        }
        Self::from_bond_dims(lat, &rank, open)
    }

    /// Shape for a generated circuit of this depth; the layout does not
    /// depend on the seed.
    pub fn of_rqc(lattice: &Lattice, depth: DepthSpec, open: &[usize]) -> Self {
        let mut rank = HashMap::new();
        for c in 1..=depth.t {
            for (a, b) in layer_pattern(lattice, c) {
                *rank.entry(label::bond(a, b)).or_insert(1usize) *= 2;
            }
        }
        Self::from_bond_dims(lattice, &rank, open)
    }

    fn from_bond_dims(lat: &Lattice, rank: &HashMap<Label, usize>, open: &[usize]) -> Self {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for q in 0..lat.len() {
            let (mut l, mut d) = (Vec::new(), Vec::new());
            for p in sorted(lat.neighbors(q)) {
                if let Some(&r) = rank.get(&label::bond(q, p)) {
                    l.push(label::bond(q, p));
                    d.push(r);
                }
            }
            if open.contains(&q) {
                l.push(label::out(q));
                d.push(2);
            }
            labels.push(l);
            dims.push(d);
        }
        NetworkShape { labels, dims }
    }

    pub fn dim_of(&self, l: Label) -> Option<usize> {
        self.labels.iter().zip(&self.dims).find_map(|(ls, ds)| ls.iter().position(|&x| x == l).map(|i| ds[i]))
    }
}
