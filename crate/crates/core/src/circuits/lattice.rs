//! Lattices: finite site sets on the square grid with nearest-neighbour
//! adjacency.

use crate::error::{invalid, Error, Result};
use std::collections::HashMap;

/// Shape family of a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeKind {
    Grid { rows: usize, cols: usize },
    Bristlecone(usize),
    Explicit,
}

/// Sites are held in row-major order; qubit `q` is `sites[q]`. Circuit files
/// refer to sites by their row-major index on the bounding grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    sites: Vec<(i32, i32)>,
    index: HashMap<(i32, i32), usize>,
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    origin: (i32, i32),
    width: usize,
    height: usize,
}

pub const BRISTLECONE_SIZES: [usize; 8] = [24, 30, 40, 48, 60, 64, 70, 72];

fn bristlecone_data(n: usize) -> Option<&'static str> {
    Some(match n {
        24 => include_str!("../../data/bristlecone_24.txt"),
        30 => include_str!("../../data/bristlecone_30.txt"),
        40 => include_str!("../../data/bristlecone_40.txt"),
        48 => include_str!("../../data/bristlecone_48.txt"),
        60 => include_str!("../../data/bristlecone_60.txt"),
        64 => include_str!("../../data/bristlecone_64.txt"),
        70 => include_str!("../../data/bristlecone_70.txt"),
        72 => include_str!("../../data/bristlecone_72.txt"),
        _ => return None,
    })
}

/// Parses `(row, col)` lines; `#` starts a comment.
pub fn parse_sites(text: &str) -> Result<Vec<(i32, i32)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            msg: format!("expected `(row, col)`, got `{line}`"),
        };
        let inner = line
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut it = inner.split(',').map(|s| s.trim().parse::<i32>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(r)), Some(Ok(c)), None) => out.push((r, c)),
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

impl Lattice {
    pub fn from_sites(kind: LatticeKind, mut sites: Vec<(i32, i32)>) -> Result<Self> {
        if sites.is_empty() {
            return invalid("lattice has no sites");
        }
        sites.sort_unstable();
        sites.dedup();
        let index: HashMap<_, _> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut neighbors = vec![Vec::new(); sites.len()];
        let mut edges = Vec::new();
        for (i, &(r, c)) in sites.iter().enumerate() {
            for d in [(-1, 0), (0, -1), (0, 1), (1, 0)] {
                if let Some(&j) = index.get(&(r + d.0, c + d.1)) {
                    neighbors[i].push(j);
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        edges.sort_unstable();
        let rmin = sites.iter().map(|s| s.0).min().unwrap();
        let rmax = sites.iter().map(|s| s.0).max().unwrap();
        let cmin = sites.iter().map(|s| s.1).min().unwrap();
        let cmax = sites.iter().map(|s| s.1).max().unwrap();
        Ok(Lattice {
            kind,
            sites,
            index,
            neighbors,
            edges,
            origin: (rmin, cmin),
            width: (cmax - cmin + 1) as usize,
            height: (rmax - rmin + 1) as usize,
        })
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("grid dimensions must be positive");
        }
        let sites = (0..rows as i32)
            .flat_map(|r| (0..cols as i32).map(move |c| (r, c)))
            .collect();
        Self::from_sites(LatticeKind::Grid { rows, cols }, sites)
    }

    pub fn bristlecone(n: usize) -> Result<Self> {
        let text = bristlecone_data(n).ok_or_else(|| {
            Error::Invalid(format!("unknown Bristlecone size {n}; known: {BRISTLECONE_SIZES:?}"))
        })?;
        Self::from_sites(LatticeKind::Bristlecone(n), parse_sites(text)?)
    }

    /// Parses `grid:IxJ`, `bristlecone:N` (also `bris-N`), or `file:PATH`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let s = spec.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix("grid:") {
            let (a, b) = rest
                .split_once('x')
                .ok_or_else(|| Error::Invalid(format!("bad grid spec `{spec}`")))?;
            let p = |x: &str| {
                x.parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("bad grid spec `{spec}`")))
            };
            return Self::grid(p(a)?, p(b)?);
        }
        for pre in ["bristlecone:", "bristlecone-", "bris-", "bris:"] {
            if let Some(rest) = s.strip_prefix(pre) {
                let n = rest
                    .parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("bad lattice spec `{spec}`")))?;
                return Self::bristlecone(n);
            }
        }
        if let Some(path) = spec.trim().strip_prefix("file:") {
            let text = std::fs::read_to_string(path)?;
            return Self::from_sites(LatticeKind::Explicit, parse_sites(&text)?);
        }
        invalid(format!("unknown lattice `{spec}`"))
    }

    /// Canonical spec string accepted by `from_spec` (explicit lattices
    /// have none).
    pub fn spec(&self) -> Option<String> {
        match &self.kind {
            LatticeKind::Grid { rows, cols } => Some(format!("grid:{rows}x{cols}")),
            LatticeKind::Bristlecone(n) => Some(format!("bristlecone:{n}")),
            LatticeKind::Explicit => None,
        }
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[(i32, i32)] {
        &self.sites
    }

    pub fn site(&self, q: usize) -> (i32, i32) {
        self.sites[q]
    }

    pub fn qubit_at(&self, rc: (i32, i32)) -> Option<usize> {
        self.index.get(&rc).copied()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    /// Nearest-neighbour pairs `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors.get(a).is_some_and(|n| n.contains(&b))
    }

    /// Bounding grid (height, width).
    pub fn bounds(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Row-major index of qubit `q` on the bounding grid.
    pub fn grid_id(&self, q: usize) -> usize {
        let (r, c) = self.sites[q];
        (r - self.origin.0) as usize * self.width + (c - self.origin.1) as usize
    }

    pub fn qubit_of_grid_id(&self, id: usize) -> Option<usize> {
        let r = (id / self.width) as i32 + self.origin.0;
        let c = (id % self.width) as i32 + self.origin.1;
        self.qubit_at((r, c))
    }

    /// Lattice with the given qubits removed.
    pub fn without(&self, drop: &[usize]) -> Result<Self> {
        let sites = (0..self.len())
            .filter(|q| !drop.contains(q))
            .map(|q| self.sites[q])
            .collect();
        Self::from_sites(LatticeKind::Explicit, sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let l = Lattice::grid(4, 5).unwrap();
        assert_eq!(l.len(), 20);
        assert_eq!(l.edges().len(), 4 * 4 + 5 * 3);
    }

    #[test]
    fn adjacency_is_symmetric() {
        for n in BRISTLECONE_SIZES {
            let l = Lattice::bristlecone(n).unwrap();
            assert_eq!(l.len(), n);
            for q in 0..l.len() {
                assert!(!l.neighbors(q).is_empty() && l.neighbors(q).len() <= 4);
                for &p in l.neighbors(q) {
                    assert!(l.adjacent(p, q));
                }
            }
        }
    }

    #[test]
    fn bristlecone_70_is_72_without_single_neighbour_corners() {
        let b72 = Lattice::bristlecone(72).unwrap();
        let corners: Vec<usize> = (0..72).filter(|&q| b72.neighbors(q).len() == 1).collect();
        assert_eq!(corners.len(), 2);
        let b70 = Lattice::bristlecone(70).unwrap();
        assert_eq!(b72.without(&corners).unwrap().sites(), b70.sites());
        assert_eq!(b70.bounds(), (11, 10));
    }

    #[test]
    fn spec_round_trip() {
        for s in ["grid:4x4", "bristlecone:24"] {
            assert_eq!(Lattice::from_spec(s).unwrap().spec().unwrap(), s);
        }
        assert!(Lattice::from_spec("hex:3").is_err());
        assert_eq!(Lattice::from_spec("bris-60").unwrap().len(), 60);
    }

    #[test]
    fn grid_ids_round_trip() {
        let l = Lattice::bristlecone(24).unwrap();
        for q in 0..l.len() {
            assert_eq!(l.qubit_of_grid_id(l.grid_id(q)), Some(q));
        }
    }
}
