//! Qubit complexity of Schrodinger-Feynman style simulation: the lattice is
//! split into parts that are evolved as full state vectors once per path
//! over the two-qubit gates cut between them.
//!
//! Partitions come from three geometric families: straight bisections,
//! three parts (a lower half and an upper half split along a diagonal
//! shifted by `d`), and four quadrants connected in a ring.

use crate::circuits::{cz_cut_count, generate_rqc, partition_sides, Circuit, DepthSpec, Lattice};
use crate::error::{invalid, Result};
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Bi,
    /// Three parts with diagonal offset `d` in `1..=5`.
    Tri(usize),
    Quad,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Vec<Scheme>> {
        match s {
            "bi" => Ok(vec![Scheme::Bi]),
            "tri" => Ok((1..=5).map(Scheme::Tri).collect()),
            "quad" => Ok(vec![Scheme::Quad]),
            "all" => Ok([Scheme::Bi].into_iter().chain((1..=5).map(Scheme::Tri)).chain([Scheme::Quad]).collect()),
            _ => match s.strip_prefix("tri") {
                Some(d) => match d.parse::<usize>() {
                    Ok(d) if (1..=5).contains(&d) => Ok(vec![Scheme::Tri(d)]),
                    _ => invalid(format!("bad scheme `{s}`; tri offsets are 1..5")),
                },
                None => invalid(format!("unknown scheme `{s}` (expected bi, tri, triD, quad or all)")),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Bi => "bi",
            Scheme::Tri(_) => "tri",
            Scheme::Quad => "quad",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSpec {
    /// Qubits of each part; for four parts, in ring order.
    pub parts: Vec<Vec<usize>>,
    /// `alpha[i][j]`: two-qubit gates between parts `i` and `j`.
    pub alpha: Vec<Vec<usize>>,
    /// Diagonal offset of a three-part scheme.
    pub d: Option<usize>,
    /// Description of the cut geometry.
    pub label: String,
}

impl PartitionSpec {
    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }
}

/// Gate counts between every pair of parts. For two parts this is
/// [`cz_cut_count`].
pub fn cross_gates(circuit: &Circuit, parts: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    let refs: Vec<&[usize]> = parts.iter().map(Vec::as_slice).collect();
    let side = partition_sides(circuit.n(), &refs)?;
    let k = parts.len();
    let mut alpha = vec![vec![0; k]; k];
    for g in circuit.two_qubit_gates() {
        let (i, j) = (side[g.q0], side[g.q1.unwrap()]);
        if i != j {
            alpha[i][j] += 1;
            alpha[j][i] += 1;
        }
    }
    if k == 2 {
        debug_assert_eq!(alpha[0][1], cz_cut_count(circuit, &parts[0], &parts[1])?);
    }
    Ok(alpha)
}

fn complement(n: usize, part: &[usize]) -> Vec<usize> {
    (0..n).filter(|q| !part.contains(q)).collect()
}

/// `log2(sum 2^x)` without overflow.
fn log2_sum(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp2()).sum::<f64>().log2()
}

/// Log2 cost of simulating one amplitude (or batch) with the partition.
pub fn qubit_complexity(spec: &PartitionSpec) -> Result<f64> {
    let n: Vec<f64> = spec.parts.iter().map(|p| p.len() as f64).collect();
    let a = |i: usize, j: usize| spec.alpha[i][j] as f64;
    match spec.parts.len() {
        2 => Ok(a(0, 1) + log2_sum(&[n[0], n[1]])),
        3 => {
            // The largest part is simulated once per path over its own cuts.
            let big = (0..3).max_by(|&i, &j| n[i].total_cmp(&n[j]).then(j.cmp(&i))).unwrap();
            let (b, c) = match big {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let outer = a(big, b) + a(big, c);
            Ok(outer + log2_sum(&[n[big], a(b, c) + log2_sum(&[n[b], n[c]])]))
        }
        4 => {
            if spec.alpha[0][2] != 0 || spec.alpha[1][3] != 0 {
                return invalid("four parts must only share gates around the ring A-B-C-D-A");
            }
            let bc = a(1, 2) + log2_sum(&[n[1], n[2]]);
            let ad = a(0, 3) + log2_sum(&[n[0], n[3]]);
            Ok(a(0, 1) + a(2, 3) + log2_sum(&[bc, ad]))
        }
        k => invalid(format!("{k} parts; expected 2, 3 or 4")),
    }
}

fn coords(lat: &Lattice) -> Vec<(i64, i64)> {
    lat.sites().iter().map(|&(r, c)| (r as i64, c as i64)).collect()
}

/// Straight cuts along rows, columns and both diagonals.
fn bisections(lat: &Lattice) -> Vec<(String, Vec<usize>)> {
    let xy = coords(lat);
    type Key = fn((i64, i64)) -> i64;
    let keys: [(&str, Key); 4] =
        [("row", |p| p.0), ("col", |p| p.1), ("row+col", |p| p.0 + p.1), ("col-row", |p| p.1 - p.0)];
    let mut out = Vec::new();
    for (name, key) in keys {
        let mut vals: Vec<i64> = xy.iter().map(|&p| key(p)).collect();
        vals.sort_unstable();
        vals.dedup();
        for &k in &vals[1..] {
            let a: Vec<usize> = (0..xy.len()).filter(|&q| key(xy[q]) < k).collect();
            out.push((format!("{name}<{k}"), a));
        }
    }
    out
}

/// Lower half (rows from the middle down) and upper half split at the
/// `d + 1`-th smallest value of `col - row` found in the upper half.
fn tri_parts(lat: &Lattice, d: usize) -> Result<(String, Vec<Vec<usize>>)> {
    let xy = coords(lat);
    let mut rows: Vec<i64> = xy.iter().map(|p| p.0).collect();
    rows.sort_unstable();
    let mid = rows[rows.len() / 2];
    let low: Vec<usize> = (0..xy.len()).filter(|&q| xy[q].0 >= mid).collect();
    let top: Vec<usize> = (0..xy.len()).filter(|&q| xy[q].0 < mid).collect();
    let mut diag: Vec<i64> = top.iter().map(|&q| xy[q].1 - xy[q].0).collect();
    diag.sort_unstable();
    diag.dedup();
    let k = *diag.get(d + 1).ok_or_else(|| crate::Error::Invalid(format!("lattice too small for offset {d}")))?;
    let (b, c): (Vec<usize>, Vec<usize>) = top.iter().partition(|&&q| xy[q].1 - xy[q].0 < k);
    if b.is_empty() || c.is_empty() {
        return invalid(format!("offset {d} leaves an empty part"));
    }
    Ok((format!("row>={mid}; col-row<{k}"), vec![low, b, c]))
}

/// Quadrants around the middle row and column, in ring order top-left,
/// top-right, bottom-right, bottom-left.
fn quad_parts(lat: &Lattice) -> (String, Vec<Vec<usize>>) {
    let xy = coords(lat);
    let median = |mut v: Vec<i64>| {
        v.sort_unstable();
        v[v.len() / 2]
    };
    let r = median(xy.iter().map(|p| p.0).collect());
    let c = median(xy.iter().map(|p| p.1).collect());
    let pick = |f: &dyn Fn((i64, i64)) -> bool| (0..xy.len()).filter(|&q| f(xy[q])).collect::<Vec<_>>();
    let parts = vec![
        pick(&|p| p.0 < r && p.1 < c),
        pick(&|p| p.0 < r && p.1 >= c),
        pick(&|p| p.0 >= r && p.1 >= c),
        pick(&|p| p.0 >= r && p.1 < c),
    ];
    (format!("row<{r}; col<{c}"), parts)
}

/// Cheapest partition of the circuit's lattice within a family. Bisections
/// are restricted to the most balanced straight cuts.
pub fn best_partition_for(circuit: &Circuit, scheme: Scheme) -> Result<(PartitionSpec, f64)> {
    let lat = &circuit.lattice;
    let n = lat.len();
    let candidates: Vec<(String, Vec<Vec<usize>>, Option<usize>)> = match scheme {
        Scheme::Bi => {
            let all = bisections(lat);
            let gap = |a: &Vec<usize>| (2 * a.len()).abs_diff(n);
            let best = all.iter().map(|(_, a)| gap(a)).min().ok_or_else(|| crate::Error::Invalid("lattice has one site".into()))?;
            all.into_iter()
                .filter(|(_, a)| gap(a) == best)
                .map(|(l, a)| {
                    let b = complement(n, &a);
                    (l, vec![a, b], None)
                })
                .collect()
        }
        Scheme::Tri(d) => {
            if !(1..=5).contains(&d) {
                return invalid(format!("tri offset {d} outside 1..5"));
            }
            let (l, p) = tri_parts(lat, d)?;
            vec![(l, p, Some(d))]
        }
        Scheme::Quad => {
            let (l, p) = quad_parts(lat);
            if p.iter().any(Vec::is_empty) {
                return invalid("lattice too small for four parts");
            }
            vec![(l, p, None)]
        }
    };
    let mut best: Option<(PartitionSpec, f64)> = None;
    for (label, parts, d) in candidates {
        let alpha = cross_gates(circuit, &parts)?;
        let spec = PartitionSpec { parts, alpha, d, label };
        let cost = qubit_complexity(&spec)?;
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((spec, cost));
        }
    }
    best.ok_or_else(|| crate::Error::Invalid("no candidate partition".into()))
}

/// [`best_partition_for`] on a circuit generated for the lattice and depth.
/// Gate counts between parts do not depend on the generator seed.
pub fn best_partition(lattice: &Lattice, depth: DepthSpec, scheme: Scheme) -> Result<(PartitionSpec, f64)> {
    best_partition_for(&generate_rqc(lattice, depth, 0)?, scheme)
}

/// One row of the complexity table.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityRow {
    pub scheme: Scheme,
    pub spec: PartitionSpec,
    pub cost_log2: f64,
}

pub fn complexity_table(lattice: &Lattice, depth: DepthSpec, schemes: &[Scheme]) -> Result<Vec<ComplexityRow>> {
    let c = generate_rqc(lattice, depth, 0)?;
    schemes
        .iter()
        .map(|&s| best_partition_for(&c, s).map(|(spec, cost_log2)| ComplexityRow { scheme: s, spec, cost_log2 }))
        .collect()
}

/// Four decimals with trailing zeros dropped, so whole costs print as
/// integers.
pub fn format_cost(x: f64) -> String {
    let s = format!("{x:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut s = String::from("scheme,params,cost_log2\n");
    for r in rows {
        let sizes: Vec<String> = r.spec.sizes().iter().map(|x| x.to_string()).collect();
        let mut params = format!("n={}", sizes.join("/"));
        if let Some(d) = r.spec.d {
            write!(params, " d={d}").unwrap();
        }
        write!(params, " {}", r.spec.label).unwrap();
        writeln!(s, "{},{},{}", r.scheme.name(), params, format_cost(r.cost_log2)).unwrap();
    }
    s
}
